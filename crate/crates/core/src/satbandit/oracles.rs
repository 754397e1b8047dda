//! Consistency and online estimation for the SAT-encoding class.

use super::formula::{decode_formula, min_sat_assignment, Formula3CNF};
use super::function::{decode_index_code, eval_sat_function, SatAction, SatFunction};
use crate::error::{Error, Result};
use crate::model::Reward;
use crate::rational::{self, Rational};

/// Returns a member of the class agreeing with every observation in `sample`.
///
/// Three kinds of action can return a non-zero value (`Star`, the smallest
/// satisfying assignment, the hidden index), which gives eight cases
/// according to which of them has been seen non-zero. Only the case "star
/// and index seen, no non-zero assignment" needs `a*` of the decoded formula,
/// found by exhaustive search (`n <= 24`).
pub fn erm_consistent(n: usize, sample: &[(SatAction, Reward)]) -> Result<SatFunction> {
    let mut star: Option<Rational> = None;
    let mut assignment_hit: Option<(u64, Rational)> = None;
    let mut index_hit: Option<u64> = None;
    let mut zero_assignments: Vec<u64> = Vec::new();
    for (a, r) in sample {
        a.check(n)?;
        let r = r.to_exact()?;
        let nonzero = r != rational::zero();
        match *a {
            SatAction::Star => {
                star.get_or_insert(r);
            }
            SatAction::Assignment(b) if nonzero => {
                assignment_hit.get_or_insert((b, r));
            }
            SatAction::Assignment(b) => zero_assignments.push(b),
            SatAction::Index(c) if nonzero => {
                index_hit.get_or_insert(c);
            }
            SatAction::Index(_) => {}
        }
    }

    let decode_star = |v: &Rational| decode_formula(&Reward::Exact(v.clone()), n).map_err(|_| Error::NoConsistentFunction);
    let decode_c = |r: &Rational| decode_index_code(r, n).ok_or(Error::NoConsistentFunction);

    let candidate = match (&star, &assignment_hit, index_hit) {
        (None, None, None) => SatFunction::plain(Formula3CNF::new(n, Vec::new())?),
        (Some(v), None, None) => SatFunction::plain(decode_star(v)?),
        (Some(v), Some((a, r)), _) => SatFunction::indexed_unchecked(decode_star(v)?, decode_c(r)?, *a),
        (Some(v), None, Some(c)) => {
            let phi = decode_star(v)?;
            let a_star = min_sat_assignment(&phi)?.ok_or(Error::NoConsistentFunction)?;
            SatFunction::indexed_unchecked(phi, c, a_star)
        }
        (None, Some((a, r)), _) => {
            SatFunction::indexed_unchecked(Formula3CNF::unique_sat(n, *a)?, decode_c(r)?, *a)
        }
        (None, None, Some(c)) => {
            // Any formula works as long as its a* avoids assignments seen at 0.
            zero_assignments.sort_unstable();
            zero_assignments.dedup();
            let free = (0..1u64 << n)
                .zip(zero_assignments.iter().copied().chain(std::iter::repeat(u64::MAX)))
                .find(|(want, seen)| want != seen)
                .map(|(want, _)| want)
                .ok_or(Error::NoConsistentFunction)?;
            SatFunction::indexed_unchecked(Formula3CNF::unique_sat(n, free)?, c, free)
        }
    };

    for (a, r) in sample {
        if eval_sat_function(&candidate, *a) != r.to_exact()? {
            return Err(Error::NoConsistentFunction);
        }
    }
    Ok(candidate)
}

/// Predicts with a function consistent with all observations so far.
#[derive(Debug, Clone)]
pub struct OnlineEstimator {
    n: usize,
}

impl OnlineEstimator {
    pub fn new(n: usize) -> Self {
        OnlineEstimator { n }
    }

    pub fn step(&mut self, history: &[(SatAction, Reward)]) -> Result<SatFunction> {
        erm_consistent(self.n, history)
    }
}

/// Cumulative squared prediction error of [`OnlineEstimator`] on `actions`
/// answered noise-free by `truth`.
pub fn estimation_error(truth: &SatFunction, actions: &[SatAction]) -> Result<Rational> {
    let n = truth.n();
    let mut est = OnlineEstimator::new(n);
    let mut history = Vec::with_capacity(actions.len());
    let mut total = rational::zero();
    for &a in actions {
        let guess = est.step(&history)?;
        let observed = eval_sat_function(truth, a.check(n)?);
        let d = eval_sat_function(&guess, a) - &observed;
        total += &d * &d;
        history.push((a, Reward::Exact(observed)));
    }
    Ok(total)
}
