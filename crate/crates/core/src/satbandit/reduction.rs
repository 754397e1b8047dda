//! The two-query learner and the simulator that turns a learner into a SAT test.

use serde::Serialize;

use super::formula::{decode_formula, encode_formula, min_sat_assignment, Formula3CNF};
use super::function::{decode_index_code, SatAction};
use crate::error::{Error, Result};
use crate::model::{Decision, History, Learner, Reward};
use crate::rational;

/// Queries `Star`, decodes the formula, then queries its smallest satisfying
/// assignment, whose value reveals the hidden index.
#[derive(Debug, Clone)]
pub struct TwoQueryIdentify {
    n: usize,
}

impl TwoQueryIdentify {
    pub fn new(n: usize) -> Self {
        TwoQueryIdentify { n }
    }
}

impl Learner<SatAction> for TwoQueryIdentify {
    fn decide(&mut self, history: &History<SatAction>) -> Result<Decision<SatAction>> {
        let entries = history.entries();
        match entries {
            [] => Ok(Decision::Query(SatAction::Star)),
            [(SatAction::Star, code)] => {
                let phi = decode_formula(code, self.n)
                    .map_err(|e| Error::protocol(format!("star observation does not decode: {e}")))?;
                Ok(match min_sat_assignment(&phi)? {
                    None => Decision::Stop(SatAction::Star),
                    Some(a) => Decision::Query(SatAction::Assignment(a)),
                })
            }
            [(SatAction::Star, _), (SatAction::Assignment(_), r)] => {
                let r = r.to_exact()?;
                if r == rational::zero() {
                    return Ok(Decision::Stop(SatAction::Star));
                }
                let c = decode_index_code(&r, self.n).ok_or_else(|| {
                    Error::protocol(format!("value {} at a* is not an index code", rational::format(&r)))
                })?;
                Ok(Decision::Stop(SatAction::Index(c)))
            }
            _ => Err(Error::protocol("history does not follow the two-query protocol")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Accept,
    Reject,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionOutcome {
    pub verdict: Verdict,
    pub queries: u64,
    /// Why the simulation ended: `satisfying_assignment`, `learner_stopped`,
    /// `budget_exhausted` or `learner_error`.
    pub reason: &'static str,
}

/// Runs `learner` against the responder of `f_phi` (`Star` answers
/// `encode(phi)`, everything else 0) and accepts as soon as it queries a
/// satisfying assignment.
pub fn sat_reduction<L: Learner<SatAction> + ?Sized>(
    phi: &Formula3CNF,
    learner: &mut L,
    budget: u64,
) -> Result<ReductionOutcome> {
    if budget == 0 {
        return Err(Error::domain("step budget must be positive"));
    }
    let code = encode_formula(phi);
    let mut history = History::new();
    for step in 0..budget {
        let decision = match learner.decide(&history) {
            Ok(d) => d,
            Err(_) => return Ok(ReductionOutcome { verdict: Verdict::Reject, queries: step, reason: "learner_error" }),
        };
        let action = match decision {
            Decision::Stop(_) => {
                return Ok(ReductionOutcome { verdict: Verdict::Reject, queries: step, reason: "learner_stopped" })
            }
            Decision::Query(a) => a,
        };
        if action.check(phi.n()).is_err() {
            return Ok(ReductionOutcome { verdict: Verdict::Reject, queries: step, reason: "learner_error" });
        }
        if let SatAction::Assignment(b) = action {
            if phi.is_satisfied_by(b) {
                return Ok(ReductionOutcome {
                    verdict: Verdict::Accept,
                    queries: step + 1,
                    reason: "satisfying_assignment",
                });
            }
        }
        let r = match action {
            SatAction::Star => code.clone(),
            _ => rational::zero(),
        };
        history.push(action, Reward::Exact(r));
    }
    Ok(ReductionOutcome { verdict: Verdict::Reject, queries: budget, reason: "budget_exhausted" })
}

/// Drives a learner against a noise-free SAT-class function, returning its
/// output and the number of queries.
pub fn run_sat_learner<L: Learner<SatAction> + ?Sized>(
    learner: &mut L,
    truth: &super::function::SatFunction,
    budget: u64,
) -> Result<(SatAction, u64)> {
    let mut history = History::new();
    loop {
        match learner.decide(&history)? {
            Decision::Stop(a) => return Ok((a, history.len() as u64)),
            Decision::Query(a) => {
                if history.len() as u64 >= budget {
                    return Err(Error::protocol(format!("learner exceeded the query budget {budget}")));
                }
                let r = super::function::respond(truth, a)?;
                history.push(a, r);
            }
        }
    }
}
