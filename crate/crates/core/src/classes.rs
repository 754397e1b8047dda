//! Constructors for the explicit function classes.
//!
//! Every constructor emits exact rationals in `[0,1]` and pairwise distinct
//! rows; [`ExplicitClass::new`] re-checks both.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::model::{ActionId, ExplicitClass, RewardFunction};
use crate::rational::{self, int, ratio, Exact, Rational};

/// Binary tree with `d + 1` levels; one function per root-to-leaf path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeClassParams {
    pub d: u32,
    pub delta: f64,
}

/// Cheap-to-decode but high-regret actions `A_1` locking the identity of the
/// optimum among `A_2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfoLockParams {
    #[serde(rename = "K")]
    pub k: usize,
    pub eps1: f64,
    pub eps2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InformativeKParams {
    #[serde(rename = "K")]
    pub k: usize,
}

const MAX_TREE_DEPTH: u32 = 20;

/// Heap index of `a_{level, position}` (both 1-based).
pub fn tree_action(level: u32, position: usize) -> ActionId {
    ActionId((1usize << (level - 1)) - 1 + (position - 1))
}

/// Inverse of [`tree_action`].
pub fn tree_level_position(action: ActionId) -> (u32, usize) {
    let level = usize::BITS - (action.0 + 1).leading_zeros();
    let position = action.0 + 2 - (1usize << (level - 1));
    (level, position)
}

pub fn make_tree_class(params: TreeClassParams) -> Result<ExplicitClass> {
    let TreeClassParams { d, delta } = params;
    if d < 1 || d > MAX_TREE_DEPTH {
        return Err(Error::domain(format!("tree depth d must lie in 1..={MAX_TREE_DEPTH}, got {d}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain(format!("Delta must lie in (0,1), got {delta}")));
    }
    let high = int(1) - rational::from_f64(delta)?;
    let n_actions = (1usize << (d + 1)) - 1;
    let n_leaves = 1usize << d;
    let leaf_level = d + 1;

    let rows = (1..=n_leaves)
        .map(|leaf| {
            let mut row = vec![high.clone(); n_actions];
            for pos in 1..=n_leaves {
                row[tree_action(leaf_level, pos).0] = if pos == leaf { int(1) } else { int(0) };
            }
            // Ancestors of the leaf strictly between the root and the leaf read 0.
            let mut pos = leaf;
            for level in (2..leaf_level).rev() {
                pos = pos.div_ceil(2);
                row[tree_action(level, pos).0] = int(0);
            }
            row
        })
        .collect();

    let labels = (0..n_actions)
        .map(|a| {
            let (l, i) = tree_level_position(ActionId(a));
            format!("a_{{{l},{i}}}")
        })
        .collect();
    ExplicitClass::new("tree", json!({"kind": "tree", "d": d, "delta": delta}), rows, Some(labels))
}

/// Number of `A_1` actions: `ceil(log2 K)`.
pub fn info_lock_bits(k: usize) -> usize {
    (usize::BITS - (k - 1).leading_zeros()) as usize
}

fn check_info_lock(params: &InfoLockParams) -> Result<()> {
    let InfoLockParams { k, eps1, eps2 } = *params;
    if k < 2 {
        return Err(Error::domain(format!("K must be >= 2, got {k}")));
    }
    if !(eps1 > 0.0 && eps1 <= 0.25) {
        return Err(Error::domain(format!("eps1 must lie in (0, 1/4], got {eps1}")));
    }
    if !(eps2 > 0.0 && eps2 <= eps1) {
        return Err(Error::domain(format!("eps2 must lie in (0, eps1], got {eps2}")));
    }
    Ok(())
}

/// Function `f_k` (`k` in `1..=K`) is stored at index `k - 1`. Action layout:
/// `A_1` first (`ceil(log2 K)` actions), then `A_2` (`K` actions). Bit `j` of
/// `k - 1`, most significant first, sets `f_k(a^(1)_j)` to `1/2 + eps1`
/// (bit 1) or `1/2 - eps1` (bit 0).
pub fn make_info_lock(params: InfoLockParams) -> Result<ExplicitClass> {
    check_info_lock(&params)?;
    let InfoLockParams { k, eps1, eps2 } = params;
    let bits = info_lock_bits(k);
    let half = ratio(1, 2);
    let e1 = rational::from_f64(eps1)?;
    let low2 = int(1) - rational::from_f64(eps2)?;

    let rows = (0..k)
        .map(|code| {
            let mut row = Vec::with_capacity(bits + k);
            for j in 0..bits {
                let bit = (code >> (bits - 1 - j)) & 1 == 1;
                row.push(if bit { &half + &e1 } else { &half - &e1 });
            }
            for other in 0..k {
                row.push(if other == code { int(1) } else { low2.clone() });
            }
            row
        })
        .collect();

    let labels = (1..=bits)
        .map(|j| format!("a1_{j}"))
        .chain((1..=k).map(|j| format!("a2_{j}")))
        .collect();
    ExplicitClass::new(
        "info_lock",
        json!({"kind": "info_lock", "K": k, "eps1": eps1, "eps2": eps2}),
        rows,
        Some(labels),
    )
}

/// Decodes the `A_1` sign pattern back to the function index `k - 1`.
pub fn info_lock_decode(signs: &[bool]) -> usize {
    signs.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b))
}

/// Companion with every `A_1` action at `1/2` and every `A_2` action at `a2_value`.
fn info_lock_flat(params: &InfoLockParams, a2_value: Rational) -> Result<RewardFunction> {
    check_info_lock(params)?;
    let bits = info_lock_bits(params.k);
    let mut row = vec![ratio(1, 2); bits];
    row.extend(std::iter::repeat_n(a2_value, params.k));
    Ok(RewardFunction::new(row))
}

/// `f_0`: `A_1` at `1/2`, `A_2` at `1 - eps2`.
pub fn info_lock_empty(params: &InfoLockParams) -> Result<RewardFunction> {
    info_lock_flat(params, int(1) - rational::from_f64(params.eps2)?)
}

/// `f_0'`: `A_1` at `1/2`, `A_2` at `1`.
pub fn info_lock_open(params: &InfoLockParams) -> Result<RewardFunction> {
    info_lock_flat(params, int(1))
}

/// Actions `a_0, a_1, ..., a_K`; `f_i(a_0) = i/(4K)`, `f_i(a_i) = 1`, else `1/2`.
/// Function `f_i` is stored at index `i - 1`.
pub fn make_informative_k(params: InformativeKParams) -> Result<ExplicitClass> {
    let k = params.k;
    if k < 2 {
        return Err(Error::domain(format!("K must be >= 2, got {k}")));
    }
    let rows = (1..=k)
        .map(|i| {
            let mut row = vec![ratio(1, 2); k + 1];
            row[0] = ratio(i as i64, 4 * k as i64);
            row[i] = int(1);
            row
        })
        .collect();
    let labels = (0..=k).map(|a| format!("a_{a}")).collect();
    ExplicitClass::new("informative_k", json!({"kind": "informative_k", "K": k}), rows, Some(labels))
}

/// `f̄_K`: `1/4` at `a_0`, `1/2` elsewhere.
pub fn informative_k_companion(k: usize) -> RewardFunction {
    let mut row = vec![ratio(1, 2); k + 1];
    row[0] = ratio(1, 4);
    RewardFunction::new(row)
}

/// Truncation to `i in 1..=N` of the class with `f_i(0) = 1/(2i)`,
/// `f_i(i) = 1` and `0` elsewhere. Function `f_i` is stored at index `i - 1`.
pub fn make_informative_chain(n: usize) -> Result<ExplicitClass> {
    if n < 1 {
        return Err(Error::domain("N must be >= 1"));
    }
    let rows = (1..=n)
        .map(|i| {
            let mut row = vec![int(0); n + 1];
            row[0] = ratio(1, 2 * i as i64);
            row[i] = int(1);
            row
        })
        .collect();
    let labels = (0..=n).map(|a| a.to_string()).collect();
    ExplicitClass::new("informative_chain", json!({"kind": "informative_chain", "N": n}), rows, Some(labels))
}

/// Appends an action `x_0` whose value encodes the lowest-index maximizer of
/// each row as `(1 + argmax) / scale`.
///
/// `scale` defaults to `2|A| + 2`. It must exceed `|A|` so that all codes are
/// distinct and lie in `(0, 1)`; otherwise codes would collide with each
/// other or with the boundary value 1.
pub fn augment_with_oracle_point(base: &ExplicitClass, scale: Option<u64>) -> Result<ExplicitClass> {
    let n = base.n_actions();
    let scale = scale.unwrap_or(2 * n as u64 + 2);
    if scale <= n as u64 {
        return Err(Error::Construction(format!(
            "encoding scale {scale} must exceed the base action count {n}"
        )));
    }
    let scale = Rational::from_integer(BigInt::from(scale));
    let rows = base
        .functions()
        .iter()
        .map(|f| {
            let mut row = f.values().to_vec();
            row.push(Rational::from_integer(BigInt::from(f.argmax().0 + 1)) / &scale);
            row
        })
        .collect();
    let labels = base.labels().map(|l| {
        let mut l = l.to_vec();
        l.push("x_0".to_string());
        l
    });
    ExplicitClass::new(
        format!("{}+oracle", base.name()),
        json!({"kind": "oracle_augmented", "base": base.params(), "scale": rational::format(&scale)}),
        rows,
        labels,
    )
}

/// Decodes the lowest-index maximizer from an observation of `x_0`.
pub fn decode_oracle_point(value: &Rational, scale: u64) -> Option<ActionId> {
    let idx = rational::as_multiple_of(value, &BigInt::from(scale))?;
    let idx: usize = idx.try_into().ok()?;
    idx.checked_sub(1).map(ActionId)
}

/// JSON class description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClassSpec {
    Tree {
        d: u32,
        delta: f64,
    },
    InfoLock {
        #[serde(rename = "K")]
        k: usize,
        eps1: f64,
        eps2: f64,
    },
    InformativeK {
        #[serde(rename = "K")]
        k: usize,
    },
    InformativeChain {
        #[serde(rename = "N")]
        n: usize,
    },
    OracleAugmented {
        base: Box<ClassSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scale: Option<u64>,
    },
    Explicit {
        rewards: Vec<Vec<Exact>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<String>>,
    },
}

impl ClassSpec {
    pub fn build(&self) -> Result<ExplicitClass> {
        match self {
            ClassSpec::Tree { d, delta } => make_tree_class(TreeClassParams { d: *d, delta: *delta }),
            ClassSpec::InfoLock { k, eps1, eps2 } => {
                make_info_lock(InfoLockParams { k: *k, eps1: *eps1, eps2: *eps2 })
            }
            ClassSpec::InformativeK { k } => make_informative_k(InformativeKParams { k: *k }),
            ClassSpec::InformativeChain { n } => make_informative_chain(*n),
            ClassSpec::OracleAugmented { base, scale } => augment_with_oracle_point(&base.build()?, *scale),
            ClassSpec::Explicit { rewards, labels } => {
                let rows = rewards.iter().map(|r| r.iter().map(|v| v.0.clone()).collect()).collect();
                ExplicitClass::new("explicit", json!({"kind": "explicit"}), rows, labels.clone())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{eps_optimal_set, Reward};

    fn half_tree(d: u32) -> ExplicitClass {
        make_tree_class(TreeClassParams { d, delta: 0.5 }).unwrap()
    }

    #[test]
    fn tree_indexing_roundtrip() {
        for a in 0..63 {
            let (l, i) = tree_level_position(ActionId(a));
            assert_eq!(tree_action(l, i), ActionId(a));
        }
        assert_eq!(tree_level_position(ActionId(0)), (1, 1));
        assert_eq!(tree_level_position(ActionId(2)), (2, 2));
    }

    #[test]
    fn tree_d1_values() {
        let class = half_tree(1);
        // Path (a_{1,1}, a_{2,2}) is the second function.
        let f = class.function(1).unwrap();
        assert_eq!(f.values(), &[ratio(1, 2), int(0), int(1)]);
    }

    #[test]
    fn tree_counts_and_leaf_sums() {
        let class = half_tree(2);
        assert_eq!(class.n_actions(), 7);
        assert_eq!(class.n_functions(), 4);
        for d in 1..=5 {
            let class = half_tree(d);
            let first_leaf = tree_action(d + 1, 1).0;
            for f in class.functions() {
                let s: Rational = f.values()[first_leaf..].iter().sum();
                assert_eq!(s, int(1));
            }
        }
    }

    #[test]
    fn tree_root_and_only_eps_optimal_leaf() {
        let class = half_tree(3);
        let eps = rational::from_f64(0.1).unwrap();
        for (p, f) in class.functions().iter().enumerate() {
            assert_eq!(f.values()[0], ratio(1, 2));
            assert_eq!(eps_optimal_set(f, &eps), vec![tree_action(4, p + 1)]);
        }
    }

    #[test]
    fn tree_restrict_splits_through_node() {
        let class = half_tree(2);
        let full = class.full_version_space();
        let v = full.restrict(tree_action(2, 1), &Reward::Exact(int(0))).unwrap();
        assert_eq!(v.members().collect::<Vec<_>>(), vec![0, 1]);
        for d in 2..=5 {
            let class = half_tree(d);
            let full = class.full_version_space();
            for pos in 1..=2 {
                for r in [int(0), ratio(1, 2)] {
                    let v = full.restrict(tree_action(2, pos), &Reward::Exact(r)).unwrap();
                    assert_eq!(v.len(), class.n_functions() / 2);
                }
            }
            // Any on-path internal node: restricting by 0 keeps exactly the functions through it.
            for level in 2..=d {
                for pos in 1..=(1usize << (level - 1)) {
                    let v = full.restrict(tree_action(level, pos), &Reward::Exact(int(0))).unwrap();
                    let span = 1usize << (d + 1 - level);
                    let expected: Vec<usize> = ((pos - 1) * span..pos * span).collect();
                    assert_eq!(v.members().collect::<Vec<_>>(), expected);
                }
            }
        }
    }

    #[test]
    fn info_lock_examples() {
        let class = make_info_lock(InfoLockParams { k: 4, eps1: 0.1, eps2: 0.05 }).unwrap();
        let f3 = class.function(2).unwrap();
        assert_eq!(rational::to_f64(&f3.values()[0]), 0.6);
        assert_eq!(rational::to_f64(&f3.values()[1]), 0.4);
        assert_eq!(f3.values()[2 + 2], int(1));
        assert_eq!(f3.values()[2], int(1) - rational::from_f64(0.05).unwrap());

        let class = make_info_lock(InfoLockParams { k: 2, eps1: 0.1, eps2: 0.1 }).unwrap();
        assert_eq!(class.n_actions(), 3);
        assert_ne!(class.function(0).unwrap().values()[0], class.function(1).unwrap().values()[0]);
    }

    #[test]
    fn info_lock_decoding_bijective() {
        for k in 2..=64 {
            let class = make_info_lock(InfoLockParams { k, eps1: 0.2, eps2: 0.1 }).unwrap();
            let bits = info_lock_bits(k);
            assert_eq!(class.n_actions(), bits + k);
            let half = ratio(1, 2);
            for (idx, f) in class.functions().iter().enumerate() {
                let signs: Vec<bool> = f.values()[..bits].iter().map(|v| *v > half).collect();
                assert_eq!(info_lock_decode(&signs), idx);
                assert_eq!(f.argmax(), ActionId(bits + idx));
            }
        }
    }

    #[test]
    fn informative_k_examples() {
        let class = make_informative_k(InformativeKParams { k: 4 }).unwrap();
        let f3 = class.function(2).unwrap();
        assert_eq!(f3.values(), &[ratio(3, 16), ratio(1, 2), ratio(1, 2), int(1), ratio(1, 2)]);
        let eps = rational::from_f64(0.3).unwrap();
        assert_eq!(eps_optimal_set(f3, &eps), vec![ActionId(3)]);
        let class = make_informative_k(InformativeKParams { k: 2 }).unwrap();
        assert_eq!(class.value(0, ActionId(0)).unwrap(), &ratio(1, 8));
        assert_eq!(class.value(1, ActionId(0)).unwrap(), &ratio(1, 4));
        assert!(make_informative_k(InformativeKParams { k: 1 }).is_err());
    }

    #[test]
    fn informative_chain_examples() {
        let class = make_informative_chain(1).unwrap();
        assert_eq!(class.function(0).unwrap().values(), &[ratio(1, 2), int(1)]);
        let class = make_informative_chain(4).unwrap();
        assert_eq!(class.function(2).unwrap().values(), &[ratio(1, 6), int(0), int(0), int(1), int(0)]);
    }

    #[test]
    fn oracle_point_formula() {
        let base = ExplicitClass::new(
            "b",
            serde_json::Value::Null,
            vec![vec![int(0), ratio(1, 4), int(1), ratio(1, 2)]],
            None,
        )
        .unwrap();
        let aug = augment_with_oracle_point(&base, None).unwrap();
        assert_eq!(aug.n_actions(), 5);
        assert_eq!(aug.value(0, ActionId(4)).unwrap(), &ratio(3, 10));
        assert_eq!(decode_oracle_point(&ratio(3, 10), 10), Some(ActionId(2)));
        assert!(augment_with_oracle_point(&base, Some(4)).is_err());
    }

    #[test]
    fn oracle_point_decodes_to_maximizer() {
        let base = make_tree_class(TreeClassParams { d: 2, delta: 0.25 }).unwrap();
        let aug = augment_with_oracle_point(&base, None).unwrap();
        let scale = 2 * base.n_actions() as u64 + 2;
        let x0 = ActionId(base.n_actions());
        for f in aug.functions() {
            let a = decode_oracle_point(&f.values()[x0.0], scale).unwrap();
            let best = std::cmp::max(&f.values()[a.0], &f.values()[x0.0]);
            assert_eq!(best, f.max_value());
        }
    }

    #[test]
    fn rows_in_range_and_distinct() {
        let classes = vec![
            half_tree(4),
            make_info_lock(InfoLockParams { k: 5, eps1: 0.25, eps2: 0.25 }).unwrap(),
            make_informative_k(InformativeKParams { k: 16 }).unwrap(),
            make_informative_chain(16).unwrap(),
        ];
        for class in classes {
            let rows = class.rows();
            for (i, r) in rows.iter().enumerate() {
                assert!(r.iter().all(rational::in_unit_interval));
                for s in &rows[i + 1..] {
                    assert_ne!(r, s);
                }
            }
        }
    }

    #[test]
    fn spec_json() {
        let spec: ClassSpec = serde_json::from_str(r#"{"kind":"tree","d":3,"delta":0.5}"#).unwrap();
        assert_eq!(spec.build().unwrap().n_functions(), 8);
        let spec: ClassSpec =
            serde_json::from_str(r#"{"kind":"oracle_augmented","base":{"kind":"informative_chain","N":3}}"#).unwrap();
        assert_eq!(spec.build().unwrap().n_actions(), 5);
        let spec: ClassSpec = serde_json::from_str(r#"{"kind":"explicit","rewards":[[0,"1/3"],[1,0.5]]}"#).unwrap();
        assert_eq!(spec.build().unwrap().value(0, ActionId(1)).unwrap(), &ratio(1, 3));
        let err = serde_json::from_str::<ClassSpec>(r#"{"kind":"tree","d":3,"Delta":0.5}"#).unwrap_err();
        assert!(err.to_string().contains("Delta") || err.to_string().contains("delta"), "{err}");
        let err = serde_json::from_str::<ClassSpec>(r#"{"kind":"informative_k"}"#).unwrap_err();
        assert!(err.to_string().contains("K"), "{err}");
    }
}
