//! Exact noise-free query complexity by memoized minimax over version spaces.
//!
//! A version space is a bitset over function indices. `QC(V) = 0` when some
//! action is epsilon-optimal for every member of `V`; otherwise it is one
//! plus the best worst-case value over actions that split `V`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use fixedbitset::FixedBitSet;
use serde::de::Error as _;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{eps_optimal_set, ActionId, ExplicitClass, RewardFunction};
use crate::rational::{self, Rational};

pub const DEFAULT_CAP: usize = 20;
/// Number of `(version space, budget)` states the gap search may evaluate.
pub const DEFAULT_GAP_NODE_BUDGET: usize = 2_000_000;

/// Deterministic noise-free strategy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PolicyTree {
    Stop { output: ActionId },
    Query { action: ActionId, branches: BTreeMap<Rational, PolicyTree> },
}

impl PolicyTree {
    /// Worst-case number of queries.
    pub fn depth(&self) -> usize {
        match self {
            PolicyTree::Stop { .. } => 0,
            PolicyTree::Query { branches, .. } => 1 + branches.values().map(PolicyTree::depth).max().unwrap_or(0),
        }
    }

    pub fn n_nodes(&self) -> usize {
        match self {
            PolicyTree::Stop { .. } => 1,
            PolicyTree::Query { branches, .. } => 1 + branches.values().map(PolicyTree::n_nodes).sum::<usize>(),
        }
    }

    /// Runs the tree against `f`, returning the output and the number of queries.
    pub fn replay(&self, f: &RewardFunction) -> Result<(ActionId, usize)> {
        let mut node = self;
        let mut queries = 0;
        loop {
            match node {
                PolicyTree::Stop { output } => return Ok((*output, queries)),
                PolicyTree::Query { action, branches } => {
                    let r = f.value(*action)?;
                    queries += 1;
                    node = branches.get(r).ok_or_else(|| {
                        Error::protocol(format!(
                            "policy has no branch for value {} at action {action}",
                            rational::format(r)
                        ))
                    })?;
                }
            }
        }
    }
}

impl Serialize for PolicyTree {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PolicyTree::Stop { output } => {
                let mut m = s.serialize_map(Some(1))?;
                m.serialize_entry("stop", output)?;
                m.end()
            }
            PolicyTree::Query { action, branches } => {
                struct Branches<'a>(&'a BTreeMap<Rational, PolicyTree>);
                impl Serialize for Branches<'_> {
                    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                        let mut m = s.serialize_map(Some(self.0.len()))?;
                        for (r, child) in self.0 {
                            m.serialize_entry(&rational::format(r), child)?;
                        }
                        m.end()
                    }
                }
                let mut m = s.serialize_map(Some(2))?;
                m.serialize_entry("query", action)?;
                m.serialize_entry("branches", &Branches(branches))?;
                m.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for PolicyTree {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Stop { stop: ActionId },
            Query { query: ActionId, branches: BTreeMap<String, PolicyTree> },
        }
        match Repr::deserialize(d)? {
            Repr::Stop { stop } => Ok(PolicyTree::Stop { output: stop }),
            Repr::Query { query, branches } => {
                let branches = branches
                    .into_iter()
                    .map(|(k, v)| rational::parse(&k).map(|r| (r, v)))
                    .collect::<Result<_>>()
                    .map_err(D::Error::custom)?;
                Ok(PolicyTree::Query { action: query, branches })
            }
        }
    }
}

/// A rational or `+inf`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtendedRational {
    Finite(Rational),
    Infinite,
}

impl ExtendedRational {
    pub fn to_f64(&self) -> f64 {
        match self {
            ExtendedRational::Finite(r) => rational::to_f64(r),
            ExtendedRational::Infinite => f64::INFINITY,
        }
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            ExtendedRational::Finite(r) => Some(r),
            ExtendedRational::Infinite => None,
        }
    }
}

impl fmt::Display for ExtendedRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedRational::Finite(r) => f.write_str(&rational::format(r)),
            ExtendedRational::Infinite => f.write_str("+inf"),
        }
    }
}

/// Optimal value of a version space and every action attaining it.
///
/// For `qc = 0` the actions are the common epsilon-optimal actions; otherwise
/// they are the optimal first queries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemoEntry {
    pub qc: u32,
    pub actions: Vec<ActionId>,
}

#[derive(Debug, Clone)]
pub struct QcResult {
    pub qc: u32,
    pub tree: PolicyTree,
    memo: HashMap<FixedBitSet, MemoEntry>,
}

impl QcResult {
    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }

    /// Memo entry for the version space with the given members, if visited.
    pub fn memo_entry(&self, members: &[usize], n_functions: usize) -> Option<&MemoEntry> {
        let mut key = FixedBitSet::with_capacity(n_functions);
        for &m in members {
            key.insert(m);
        }
        self.memo.get(&key)
    }

    pub fn memo(&self) -> impl Iterator<Item = (Vec<usize>, &MemoEntry)> {
        self.memo.iter().map(|(k, v)| (k.ones().collect(), v))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GapResult {
    pub value: ExtendedRational,
    /// Set when the node budget ran out; `value` is then the gap of the
    /// lowest-index optimal tree, a lower bound on the true maximum.
    pub partial: bool,
}

/// Memoized minimax engine for one class and tolerance.
pub struct Solver<'c> {
    class: &'c ExplicitClass,
    n_actions: usize,
    eps_sets: Vec<FixedBitSet>,
    /// Per action, the distinct values in increasing order with the functions taking them.
    level_sets: Vec<Vec<(Rational, FixedBitSet)>>,
    memo: HashMap<FixedBitSet, MemoEntry>,
}

impl<'c> Solver<'c> {
    pub fn new(class: &'c ExplicitClass, epsilon: &Rational, cap: usize) -> Result<Self> {
        if epsilon < &rational::zero() {
            return Err(Error::domain("epsilon must be >= 0"));
        }
        let n_f = class.n_functions();
        if n_f == 0 {
            return Err(Error::domain("empty class"));
        }
        if n_f > cap {
            return Err(Error::CapExceeded { cap, size: n_f });
        }
        let n_actions = class.n_actions();
        let eps_sets = class
            .functions()
            .iter()
            .map(|f| {
                let mut s = FixedBitSet::with_capacity(n_actions);
                for a in eps_optimal_set(f, epsilon) {
                    s.insert(a.0);
                }
                s
            })
            .collect();
        let level_sets = (0..n_actions)
            .map(|a| {
                let mut groups: BTreeMap<&Rational, FixedBitSet> = BTreeMap::new();
                for (i, f) in class.functions().iter().enumerate() {
                    groups
                        .entry(&f.values()[a])
                        .or_insert_with(|| FixedBitSet::with_capacity(n_f))
                        .insert(i);
                }
                groups.into_iter().map(|(r, s)| (r.clone(), s)).collect()
            })
            .collect();
        Ok(Solver { class, n_actions, eps_sets, level_sets, memo: HashMap::new() })
    }

    pub fn class(&self) -> &'c ExplicitClass {
        self.class
    }

    fn full(&self) -> FixedBitSet {
        let mut v = FixedBitSet::with_capacity(self.class.n_functions());
        v.insert_range(..);
        v
    }

    /// Non-empty cells of the partition of `v` induced by `action`, in value order.
    fn split(&self, v: &FixedBitSet, action: usize) -> Vec<(&Rational, FixedBitSet)> {
        self.level_sets[action]
            .iter()
            .filter_map(|(r, s)| {
                let mut part = v.clone();
                part.intersect_with(s);
                (!part.is_clear()).then_some((r, part))
            })
            .collect()
    }

    /// Actions epsilon-optimal for every member of `v`.
    fn common_actions(&self, v: &FixedBitSet) -> FixedBitSet {
        let mut common = FixedBitSet::with_capacity(self.n_actions);
        common.insert_range(..);
        for f in v.ones() {
            common.intersect_with(&self.eps_sets[f]);
            if common.is_clear() {
                break;
            }
        }
        common
    }

    pub fn entry(&mut self, v: &FixedBitSet) -> MemoEntry {
        if let Some(e) = self.memo.get(v) {
            return e.clone();
        }
        let common = self.common_actions(v);
        let entry = if !common.is_clear() {
            MemoEntry { qc: 0, actions: common.ones().map(ActionId).collect() }
        } else {
            let mut best = u32::MAX;
            let mut actions = Vec::new();
            for a in 0..self.n_actions {
                let parts: Vec<FixedBitSet> = self.split(v, a).into_iter().map(|(_, p)| p).collect();
                if parts.len() < 2 {
                    continue;
                }
                let mut worst = 0;
                for p in &parts {
                    // Once a one-query split is known, only zero-cost cells can tie.
                    let q = if best == 1 {
                        if self.common_actions(p).is_clear() { 1 } else { 0 }
                    } else {
                        self.qc_of(p)
                    };
                    worst = worst.max(q);
                    if worst + 1 > best {
                        break;
                    }
                }
                match (worst + 1).cmp(&best) {
                    std::cmp::Ordering::Less => {
                        best = worst + 1;
                        actions = vec![ActionId(a)];
                    }
                    std::cmp::Ordering::Equal => actions.push(ActionId(a)),
                    std::cmp::Ordering::Greater => {}
                }
            }
            // Distinct rows guarantee a splitting action whenever |V| >= 2.
            debug_assert!(best != u32::MAX);
            MemoEntry { qc: best, actions }
        };
        self.memo.insert(v.clone(), entry.clone());
        entry
    }

    pub fn qc_of(&mut self, v: &FixedBitSet) -> u32 {
        self.entry(v).qc
    }

    /// Lowest-index optimal tree for `v`.
    pub fn tree_of(&mut self, v: &FixedBitSet) -> PolicyTree {
        let entry = self.entry(v);
        let first = entry.actions[0];
        if entry.qc == 0 {
            return PolicyTree::Stop { output: first };
        }
        let parts: Vec<(Rational, FixedBitSet)> =
            self.split(v, first.0).into_iter().map(|(r, p)| (r.clone(), p)).collect();
        let branches = parts.into_iter().map(|(r, p)| (r, self.tree_of(&p))).collect();
        PolicyTree::Query { action: first, branches }
    }

    pub fn solve(mut self) -> QcResult {
        let full = self.full();
        let qc = self.qc_of(&full);
        let tree = self.tree_of(&full);
        QcResult { qc, tree, memo: self.memo }
    }

    /// Largest gap over trees of depth at most `budget` that solve `v`.
    /// `None` once `remaining` state evaluations are exhausted.
    fn gap_dp(
        &mut self,
        v: &FixedBitSet,
        budget: u32,
        memo: &mut HashMap<(FixedBitSet, u32), ExtendedRational>,
        remaining: &mut usize,
    ) -> Option<ExtendedRational> {
        if self.qc_of(v) == 0 {
            return Some(ExtendedRational::Infinite);
        }
        if let Some(g) = memo.get(&(v.clone(), budget)) {
            return Some(g.clone());
        }
        if *remaining == 0 {
            return None;
        }
        *remaining -= 1;

        let mut best: Option<ExtendedRational> = None;
        for a in 0..self.n_actions {
            let parts: Vec<(Rational, FixedBitSet)> =
                self.split(v, a).into_iter().map(|(r, p)| (r.clone(), p)).collect();
            if parts.len() < 2 || parts.iter().any(|(_, p)| self.qc_of(p) + 1 > budget) {
                continue;
            }
            let values: Vec<Rational> = parts.iter().map(|(r, _)| r.clone()).collect();
            let spacing = rational::min_spacing(&values).expect("at least two values");
            let mut value = ExtendedRational::Finite(spacing);
            if best.as_ref().is_some_and(|b| value <= *b) {
                continue;
            }
            for (_, p) in &parts {
                let g = self.gap_dp(p, budget - 1, memo, remaining)?;
                value = value.min(g);
                if best.as_ref().is_some_and(|b| value <= *b) {
                    break;
                }
            }
            if best.as_ref().is_none_or(|b| value > *b) {
                best = Some(value);
            }
        }
        let best = best.expect("an optimal action exists within budget");
        memo.insert((v.clone(), budget), best.clone());
        Some(best)
    }
}

pub fn exact_qc(class: &ExplicitClass, epsilon: &Rational) -> Result<QcResult> {
    exact_qc_with_cap(class, epsilon, DEFAULT_CAP)
}

pub fn exact_qc_with_cap(class: &ExplicitClass, epsilon: &Rational, cap: usize) -> Result<QcResult> {
    Ok(Solver::new(class, epsilon, cap)?.solve())
}

/// Minimum, over every reachable query, of the distance from the observed
/// value to the nearest other value the current version space allows.
pub fn gap_of_policy(tree: &PolicyTree, class: &ExplicitClass) -> Result<ExtendedRational> {
    fn walk(
        node: &PolicyTree,
        class: &ExplicitClass,
        v: &crate::model::VersionSpace<'_>,
    ) -> Result<ExtendedRational> {
        match node {
            PolicyTree::Stop { .. } => Ok(ExtendedRational::Infinite),
            PolicyTree::Query { action, branches } => {
                let values = v.achievable_values(*action)?;
                let mut gap = rational::min_spacing(&values)
                    .map(ExtendedRational::Finite)
                    .unwrap_or(ExtendedRational::Infinite);
                for (r, child) in branches {
                    // Branches no member of `v` can reach are not trajectories.
                    if let Ok(next) = v.restrict(*action, &crate::model::Reward::Exact(r.clone())) {
                        gap = gap.min(walk(child, class, &next)?);
                    }
                }
                Ok(gap)
            }
        }
    }
    walk(tree, class, &class.full_version_space())
}

/// Largest [`gap_of_policy`] over deterministic trees attaining the optimal
/// query complexity.
pub fn gap_of_class(class: &ExplicitClass, epsilon: &Rational) -> Result<GapResult> {
    gap_of_class_with(class, epsilon, DEFAULT_CAP, DEFAULT_GAP_NODE_BUDGET)
}

pub fn gap_of_class_with(
    class: &ExplicitClass,
    epsilon: &Rational,
    cap: usize,
    node_budget: usize,
) -> Result<GapResult> {
    let mut solver = Solver::new(class, epsilon, cap)?;
    let full = solver.full();
    let qc = solver.qc_of(&full);
    let mut memo = HashMap::new();
    let mut remaining = node_budget;
    match solver.gap_dp(&full, qc, &mut memo, &mut remaining) {
        Some(value) => Ok(GapResult { value, partial: false }),
        None => {
            let tree = solver.tree_of(&full);
            Ok(GapResult { value: gap_of_policy(&tree, class)?, partial: true })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::{
        augment_with_oracle_point, make_informative_chain, make_informative_k, make_tree_class, InformativeKParams,
        TreeClassParams,
    };
    use crate::rational::{from_f64, int, ratio};
    use proptest::prelude::*;

    fn tree(d: u32) -> ExplicitClass {
        make_tree_class(TreeClassParams { d, delta: 0.5 }).unwrap()
    }

    fn eps(x: f64) -> Rational {
        from_f64(x).unwrap()
    }

    fn assert_replay_sound(class: &ExplicitClass, t: &PolicyTree, epsilon: &Rational) {
        for f in class.functions() {
            let (out, q) = t.replay(f).unwrap();
            assert!(eps_optimal_set(f, epsilon).contains(&out));
            assert!(q <= t.depth());
        }
    }

    /// Plain recursion over explicit member lists, no memo and no pruning.
    fn brute_qc(class: &ExplicitClass, members: &[usize], epsilon: &Rational) -> u32 {
        let common = (0..class.n_actions()).any(|a| {
            members
                .iter()
                .all(|&f| eps_optimal_set(&class.functions()[f], epsilon).contains(&ActionId(a)))
        });
        if common {
            return 0;
        }
        let mut best = u32::MAX;
        for a in 0..class.n_actions() {
            let mut groups: BTreeMap<&Rational, Vec<usize>> = BTreeMap::new();
            for &f in members {
                groups.entry(&class.functions()[f].values()[a]).or_default().push(f);
            }
            if groups.len() < 2 {
                continue;
            }
            let worst = groups.values().map(|g| brute_qc(class, g, epsilon)).max().unwrap();
            best = best.min(worst + 1);
        }
        best
    }

    /// Max gap over all trees of depth `budget` by plain enumeration.
    fn brute_gap(class: &ExplicitClass, members: &[usize], budget: u32, epsilon: &Rational) -> ExtendedRational {
        if brute_qc(class, members, epsilon) == 0 {
            return ExtendedRational::Infinite;
        }
        let mut best: Option<ExtendedRational> = None;
        for a in 0..class.n_actions() {
            let mut groups: BTreeMap<Rational, Vec<usize>> = BTreeMap::new();
            for &f in members {
                groups.entry(class.functions()[f].values()[a].clone()).or_default().push(f);
            }
            if groups.len() < 2 || groups.values().any(|g| brute_qc(class, g, epsilon) + 1 > budget) {
                continue;
            }
            let keys: Vec<Rational> = groups.keys().cloned().collect();
            let spacing = keys.windows(2).map(|w| &w[1] - &w[0]).min().unwrap();
            let value = groups
                .values()
                .map(|g| brute_gap(class, g, budget - 1, epsilon))
                .fold(ExtendedRational::Finite(spacing), std::cmp::min);
            best = Some(best.map_or(value.clone(), |b| b.max(value)));
        }
        best.unwrap()
    }

    #[test]
    fn tree_class_qc_equals_depth() {
        for d in 1..=4 {
            let class = tree(d);
            let res = exact_qc(&class, &eps(0.1)).unwrap();
            assert_eq!(res.qc, d);
            assert_eq!(res.tree.depth(), d as usize);
            assert_replay_sound(&class, &res.tree, &eps(0.1));
        }
    }

    #[test]
    fn informative_classes_need_one_query() {
        let class = make_informative_k(InformativeKParams { k: 8 }).unwrap();
        let res = exact_qc(&class, &eps(0.4)).unwrap();
        assert_eq!(res.qc, 1);
        let chain = make_informative_chain(4).unwrap();
        let res = exact_qc(&chain, &int(0)).unwrap();
        assert_eq!(res.qc, 1);
        assert!(matches!(res.tree, PolicyTree::Query { action: ActionId(0), .. }));
    }

    #[test]
    fn singleton_needs_nothing() {
        let class = ExplicitClass::new("s", serde_json::Value::Null, vec![vec![int(0), int(1)]], None).unwrap();
        let res = exact_qc(&class, &int(0)).unwrap();
        assert_eq!(res.qc, 0);
        assert_eq!(res.tree, PolicyTree::Stop { output: ActionId(1) });
        assert_eq!(gap_of_class(&class, &int(0)).unwrap().value, ExtendedRational::Infinite);
    }

    #[test]
    fn oracle_augmented_needs_at_most_two() {
        for d in 1..=4 {
            let aug = augment_with_oracle_point(&tree(d), None).unwrap();
            let res = exact_qc(&aug, &int(0)).unwrap();
            assert!(res.qc <= 2, "d={d}: {}", res.qc);
            assert_replay_sound(&aug, &res.tree, &int(0));
        }
    }

    #[test]
    fn large_chain_solves_quickly() {
        let chain = make_informative_chain(64).unwrap();
        let res = exact_qc_with_cap(&chain, &int(0), 64).unwrap();
        assert_eq!(res.qc, 1);
        let g = gap_of_class_with(&chain, &int(0), 64, DEFAULT_GAP_NODE_BUDGET).unwrap();
        assert_eq!(g.value, ExtendedRational::Finite(ratio(1, 2 * 63) - ratio(1, 2 * 64)));
    }

    #[test]
    fn cap_is_enforced() {
        let class = tree(5);
        assert_eq!(exact_qc(&class, &int(0)).unwrap_err(), Error::CapExceeded { cap: 20, size: 32 });
        assert!(matches!(
            exact_qc_with_cap(&class, &eps(0.1), 31),
            Err(Error::CapExceeded { cap: 31, size: 32 })
        ));
    }

    #[test]
    fn gaps() {
        let chain = make_informative_chain(4).unwrap();
        let res = exact_qc(&chain, &int(0)).unwrap();
        assert_eq!(gap_of_policy(&res.tree, &chain).unwrap(), ExtendedRational::Finite(ratio(1, 24)));
        assert_eq!(gap_of_class(&chain, &int(0)).unwrap().value, ExtendedRational::Finite(ratio(1, 24)));

        let t2 = tree(2);
        let res = exact_qc(&t2, &eps(0.1)).unwrap();
        assert_eq!(gap_of_policy(&res.tree, &t2).unwrap(), ExtendedRational::Finite(ratio(1, 2)));

        // Depth 1: both optimal first queries are leaves reading {0, 1}.
        let t1 = tree(1);
        let g = gap_of_class(&t1, &eps(0.1)).unwrap();
        assert_eq!(g, GapResult { value: ExtendedRational::Finite(int(1)), partial: false });
    }

    #[test]
    fn constant_query_contributes_infinity() {
        let t1 = tree(1);
        // Query the root (constant 1/2) and then a leaf.
        let leaf = exact_qc(&t1, &eps(0.1)).unwrap().tree;
        let mut branches = BTreeMap::new();
        branches.insert(ratio(1, 2), leaf);
        let padded = PolicyTree::Query { action: ActionId(0), branches };
        assert_eq!(gap_of_policy(&padded, &t1).unwrap(), ExtendedRational::Finite(int(1)));
        let mut branches = BTreeMap::new();
        branches.insert(ratio(1, 2), PolicyTree::Stop { output: ActionId(0) });
        let only_constant = PolicyTree::Query { action: ActionId(0), branches };
        assert_eq!(gap_of_policy(&only_constant, &t1).unwrap(), ExtendedRational::Infinite);
    }

    #[test]
    fn gap_budget_falls_back_to_partial() {
        let t3 = tree(3);
        let full = gap_of_class(&t3, &eps(0.1)).unwrap();
        let partial = gap_of_class_with(&t3, &eps(0.1), DEFAULT_CAP, 1).unwrap();
        assert!(partial.partial);
        assert!(partial.value <= full.value);
    }

    #[test]
    fn tree_json_roundtrip() {
        let t2 = tree(2);
        let res = exact_qc(&t2, &eps(0.1)).unwrap();
        let json = serde_json::to_string(&res.tree).unwrap();
        assert!(json.contains("\"1/2^1\""), "{json}");
        let back: PolicyTree = serde_json::from_str(&json).unwrap();
        assert_eq!(back, res.tree);
    }

    #[test]
    fn memo_records_optimal_first_actions() {
        let chain = make_informative_chain(4).unwrap();
        let res = exact_qc(&chain, &int(0)).unwrap();
        let root = res.memo_entry(&[0, 1, 2, 3], 4).unwrap();
        assert_eq!(root, &MemoEntry { qc: 1, actions: vec![ActionId(0)] });
        let t1 = tree(1);
        let res = exact_qc(&t1, &eps(0.1)).unwrap();
        assert_eq!(res.memo_entry(&[0, 1], 2).unwrap().actions, vec![ActionId(1), ActionId(2)]);
    }

    fn small_class() -> impl Strategy<Value = ExplicitClass> {
        (1usize..=6, 1usize..=6).prop_flat_map(|(n_f, n_a)| {
            proptest::collection::btree_set(proptest::collection::vec(0i64..=4, n_a), 1..=n_f).prop_map(move |rows| {
                let rows = rows.into_iter().map(|r| r.into_iter().map(|v| ratio(v, 4)).collect()).collect();
                ExplicitClass::new("random", serde_json::Value::Null, rows, None).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn memo_agrees_with_brute_force(class in small_class(), e in 0i64..=4) {
            let epsilon = ratio(e, 8);
            let res = exact_qc(&class, &epsilon).unwrap();
            let all: Vec<usize> = (0..class.n_functions()).collect();
            prop_assert_eq!(res.qc, brute_qc(&class, &all, &epsilon));
            prop_assert_eq!(res.tree.depth(), res.qc as usize);
            for f in class.functions() {
                let (out, _) = res.tree.replay(f).unwrap();
                prop_assert!(eps_optimal_set(f, &epsilon).contains(&out));
            }
        }

        #[test]
        fn qc_monotone(class in small_class(), e in 0i64..4, drop in 0usize..6) {
            let lo = exact_qc(&class, &ratio(e, 8)).unwrap().qc;
            let hi = exact_qc(&class, &ratio(e + 1, 8)).unwrap().qc;
            prop_assert!(hi <= lo);
            if class.n_functions() > 1 {
                let mut rows = class.rows();
                rows.remove(drop % rows.len());
                let sub = ExplicitClass::new("sub", serde_json::Value::Null, rows, None).unwrap();
                prop_assert!(exact_qc(&sub, &ratio(e, 8)).unwrap().qc <= lo);
            }
        }

        #[test]
        fn class_gap_dominates_returned_tree(class in small_class(), e in 0i64..=4) {
            let epsilon = ratio(e, 8);
            let res = exact_qc(&class, &epsilon).unwrap();
            let g = gap_of_class(&class, &epsilon).unwrap();
            prop_assert!(!g.partial);
            prop_assert!(gap_of_policy(&res.tree, &class).unwrap() <= g.value);
            let all: Vec<usize> = (0..class.n_functions()).collect();
            prop_assert_eq!(g.value, brute_gap(&class, &all, res.qc, &epsilon));
        }
    }
}
