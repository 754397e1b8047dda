//! Maximin volume, Gaussian divergences and concentration sample sizes.

use minilp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{eps_optimal_set, ExplicitClass};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaResult {
    pub value: f64,
    /// Distribution over actions attaining `value`.
    pub witness: Vec<f64>,
    /// Mass the witness puts on each function's epsilon-optimal set.
    pub achieved: Vec<f64>,
}

/// `max_p min_f P_{a~p}(a is epsilon-optimal for f)`, solved as a linear program.
pub fn gamma(class: &ExplicitClass, epsilon: &Rational) -> Result<GammaResult> {
    if epsilon < &crate::rational::zero() {
        return Err(Error::domain("epsilon must be >= 0"));
    }
    let n = class.n_actions();
    let sets: Vec<Vec<usize>> = class
        .functions()
        .iter()
        .map(|f| eps_optimal_set(f, epsilon).into_iter().map(|a| a.0).collect())
        .collect();
    let mut distinct = sets.clone();
    distinct.sort();
    distinct.dedup();

    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let t = lp.add_var(1.0, (0.0, 1.0));
    let p: Vec<_> = (0..n).map(|_| lp.add_var(0.0, (0.0, 1.0))).collect();
    let mut total = LinearExpr::empty();
    for &v in &p {
        total.add(v, 1.0);
    }
    lp.add_constraint(total, ComparisonOp::Eq, 1.0);
    for s in &distinct {
        let mut expr = LinearExpr::empty();
        for &a in s {
            expr.add(p[a], 1.0);
        }
        expr.add(t, -1.0);
        lp.add_constraint(expr, ComparisonOp::Ge, 0.0);
    }
    let solution = lp
        .solve()
        .map_err(|e| Error::domain(format!("maximin program failed: {e}")))?;

    let mut witness: Vec<f64> = p.iter().map(|&v| solution[v].max(0.0)).collect();
    let mass: f64 = witness.iter().sum();
    witness.iter_mut().for_each(|w| *w /= mass);
    let achieved: Vec<f64> = sets.iter().map(|s| s.iter().map(|&a| witness[a]).sum()).collect();
    let value = achieved.iter().copied().fold(f64::INFINITY, f64::min).min(1.0);
    Ok(GammaResult { value, witness, achieved })
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("sigma must be > 0, got {sigma}")))
    }
}

/// `KL(N(mu1, sigma^2) || N(mu2, sigma^2)) = (mu1 - mu2)^2 / (2 sigma^2)`.
pub fn gaussian_kl(mu1: f64, mu2: f64, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    let d = mu1 - mu2;
    Ok(d * d / (2.0 * sigma * sigma))
}

/// `sum_i counts_i * gaps_i^2 / (2 sigma^2)`: KL between the observation laws
/// of two Gaussian bandits given expected pull counts under the first.
pub fn divergence_budget(counts: &[f64], gaps: &[f64], sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    if counts.len() != gaps.len() {
        return Err(Error::domain(format!(
            "{} pull counts but {} mean gaps",
            counts.len(),
            gaps.len()
        )));
    }
    if let Some(c) = counts.iter().find(|c| !(**c >= 0.0)) {
        return Err(Error::domain(format!("pull counts must be >= 0, got {c}")));
    }
    Ok(counts.iter().zip(gaps).map(|(c, g)| c * g * g).sum::<f64>() / (2.0 * sigma * sigma))
}

/// Number of samples after which the empirical mean of `N(mu, sigma^2)` is
/// within `accuracy` of `mu` with probability at least `1 - delta`:
/// `ceil(2 sigma^2 ln(2/delta) / accuracy^2)`, and 1 when `sigma = 0`.
pub fn sample_size(accuracy: f64, delta: f64, sigma: f64) -> Result<u64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain(format!("delta must lie in (0,1), got {delta}")));
    }
    if !(accuracy > 0.0 && accuracy.is_finite()) {
        return Err(Error::domain(format!("accuracy must be > 0, got {accuracy}")));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::domain(format!("sigma must be >= 0, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(1);
    }
    let n = 2.0 * sigma * sigma * (2.0 / delta).ln() / (accuracy * accuracy);
    // Absorb last-ulp error so that exact integers are not bumped up by one.
    let n = (n * (1.0 - 1e-12)).ceil();
    Ok((n as u64).max(1))
}

/// `sqrt(kl / 2)`: upper bound on total variation.
pub fn pinsker_bound(kl: f64) -> f64 {
    (kl / 2.0).sqrt()
}

/// `exp(-kl)`: lower bound on `P(E) + Q(E^c)`.
pub fn huber_bretagnolle_bound(kl: f64) -> f64 {
    (-kl).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::{make_info_lock, make_informative_k, InfoLockParams, InformativeKParams};
    use crate::rational::{from_f64, int, ratio};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};

    fn explicit(rows: Vec<Vec<Rational>>) -> ExplicitClass {
        ExplicitClass::new("t", serde_json::Value::Null, rows, None).unwrap()
    }

    /// Best value over the simplex grid with step `1/steps`.
    fn grid_gamma(class: &ExplicitClass, epsilon: &Rational, steps: usize) -> f64 {
        let sets: Vec<Vec<usize>> = class
            .functions()
            .iter()
            .map(|f| eps_optimal_set(f, epsilon).into_iter().map(|a| a.0).collect())
            .collect();
        let n = class.n_actions();
        let mut best = 0.0f64;
        let mut counts = vec![0usize; n];
        fn rec(
            i: usize,
            left: usize,
            counts: &mut Vec<usize>,
            steps: usize,
            sets: &[Vec<usize>],
            best: &mut f64,
        ) {
            if i + 1 == counts.len() {
                counts[i] = left;
                let v = sets
                    .iter()
                    .map(|s| s.iter().map(|&a| counts[a]).sum::<usize>() as f64 / steps as f64)
                    .fold(f64::INFINITY, f64::min);
                *best = best.max(v);
                return;
            }
            for c in 0..=left {
                counts[i] = c;
                rec(i + 1, left - c, counts, steps, sets, best);
            }
        }
        rec(0, steps, &mut counts, steps, &sets, &mut best);
        best
    }

    #[test]
    fn gamma_informative_k_is_one_over_k() {
        let eps = from_f64(0.4).unwrap();
        for k in 2..=16 {
            let class = make_informative_k(InformativeKParams { k }).unwrap();
            let g = gamma(&class, &eps).unwrap();
            assert!((g.value - 1.0 / k as f64).abs() < 1e-6, "K={k}: {}", g.value);
        }
    }

    #[test]
    fn gamma_singleton_and_overlap() {
        let g = gamma(&explicit(vec![vec![int(0), int(1)]]), &int(0)).unwrap();
        assert!((g.value - 1.0).abs() < 1e-9);
        assert!((g.witness[1] - 1.0).abs() < 1e-9);

        // S_f1 = {a1, a2}, S_f2 = {a2, a3}.
        let class = explicit(vec![vec![int(1), int(1), int(0)], vec![int(0), int(1), int(1)]]);
        let g = gamma(&class, &int(0)).unwrap();
        assert!((g.value - 1.0).abs() < 1e-9);
        assert!((g.witness[1] - 1.0).abs() < 1e-9);
        assert_eq!(grid_gamma(&class, &int(0), 10), 1.0);
    }

    #[test]
    fn gamma_witness_sums_to_one() {
        let class = make_info_lock(InfoLockParams { k: 8, eps1: 0.1, eps2: 0.05 }).unwrap();
        let g = gamma(&class, &from_f64(0.01).unwrap()).unwrap();
        assert!((g.witness.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((g.value - 1.0 / 8.0).abs() < 1e-6);
    }

    #[test]
    fn kl_and_bounds() {
        assert_eq!(gaussian_kl(0.0, 1.0, 1.0).unwrap(), 0.5);
        assert_eq!(gaussian_kl(0.3, 0.3, 2.0).unwrap(), 0.0);
        assert!((gaussian_kl(0.5, 0.6, 1.0).unwrap() - 0.005).abs() < 1e-15);
        assert!(gaussian_kl(0.0, 1.0, 0.0).is_err());

        assert!((divergence_budget(&[100.0], &[0.1], 1.0).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(divergence_budget(&[3.0, 4.0], &[0.0, 0.0], 0.5).unwrap(), 0.0);
        assert!((divergence_budget(&[200.0], &[0.1], 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(divergence_budget(&[1.0], &[0.1, 0.2], 1.0).is_err());

        assert_eq!((pinsker_bound(0.0), huber_bretagnolle_bound(0.0)), (0.0, 1.0));
        assert!((pinsker_bound(9.0 / 32.0) - 0.375).abs() < 1e-12);
        assert!((huber_bretagnolle_bound(9.0 / 32.0) - 0.7548).abs() < 1e-4);
        assert!((pinsker_bound(0.5) - 0.5).abs() < 1e-12);
        assert!((huber_bretagnolle_bound(0.5) - 0.6065).abs() < 1e-4);
    }

    #[test]
    fn sample_sizes() {
        let e2 = std::f64::consts::E * std::f64::consts::E;
        assert_eq!(sample_size(1.0, 2.0 / e2, 1.0).unwrap(), 4);
        assert_eq!(sample_size(0.25, 0.1, 1.0).unwrap(), (32.0 * 20f64.ln()).ceil() as u64);
        assert_eq!(sample_size(0.25, 0.1, 1.0).unwrap(), 96);
        assert_eq!(sample_size(0.5, 0.05, 2.0).unwrap(), 119);
        assert_eq!(sample_size(0.1, 0.5, 0.0).unwrap(), 1);
        assert!(sample_size(0.1, 1.0, 1.0).is_err());
        assert!(sample_size(0.1, 0.0, 1.0).is_err());
    }

    #[test]
    fn concentration_holds_empirically() {
        let (acc, delta, sigma) = (0.5, 0.1, 1.0);
        let n = sample_size(acc, delta, sigma).unwrap() as usize;
        let normal = Normal::new(0.0, sigma).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let reps = 10_000;
        let failures = (0..reps)
            .filter(|_| {
                let mean = (0..n).map(|_| normal.sample(&mut rng)).sum::<f64>() / n as f64;
                mean.abs() >= acc
            })
            .count();
        let se = (delta * (1.0 - delta) / reps as f64).sqrt();
        assert!((failures as f64 / reps as f64) <= delta + 3.0 * se);
    }

    fn small_class() -> impl Strategy<Value = ExplicitClass> {
        (1usize..=5, 2usize..=4).prop_flat_map(|(n_f, n_a)| {
            proptest::collection::btree_set(proptest::collection::vec(0i64..=4, n_a), 1..=n_f).prop_map(|rows| {
                explicit(rows.into_iter().map(|r| r.into_iter().map(|v| ratio(v, 4)).collect()).collect())
            })
        })
    }

    proptest! {
        #[test]
        fn gamma_matches_grid(class in small_class(), e in 0i64..=4) {
            let eps = ratio(e, 8);
            let g = gamma(&class, &eps).unwrap();
            let steps = 60;
            let grid = grid_gamma(&class, &eps, steps);
            // Any distribution is within L1 distance n/steps of a grid point.
            prop_assert!(grid <= g.value + 1e-9);
            prop_assert!(g.value - grid <= class.n_actions() as f64 / steps as f64 + 1e-9);
            prop_assert!(g.value >= 1.0 / class.n_actions() as f64 - 1e-9 && g.value <= 1.0 + 1e-12);
            prop_assert!(g.achieved.iter().all(|m| *m >= g.value - 1e-9));
        }

        #[test]
        fn gamma_monotone_in_eps(class in small_class(), e in 0i64..4) {
            let lo = gamma(&class, &ratio(e, 8)).unwrap().value;
            let hi = gamma(&class, &ratio(e + 1, 8)).unwrap().value;
            prop_assert!(hi >= lo - 1e-9);
        }

        #[test]
        fn single_pull_budget_is_kl(mu1 in 0.0f64..1.0, mu2 in 0.0f64..1.0, sigma in 0.01f64..3.0) {
            let a = divergence_budget(&[1.0], &[mu1 - mu2], sigma).unwrap();
            let b = gaussian_kl(mu1, mu2, sigma).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * b.max(1.0));
        }
    }
}
