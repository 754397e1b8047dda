use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::metrics::sample_size;
use crate::model::{ActionId, Decision, History, Learner};
use crate::rational;

/// Which analysis the plan follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TwoPhaseCase {
    /// One exact query of `a_0`.
    NoiseFree,
    /// Estimate `a_0` to `1/(2K)` and output the nearest code.
    Single,
    /// Estimate `a_0` coarsely, then race the surviving candidates.
    Candidates,
}

/// Query schedule for the informative-K class, fixed by `(K, sigma)`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TwoPhasePlan {
    pub k: usize,
    pub sigma: f64,
    pub case: TwoPhaseCase,
    pub alpha: f64,
    /// Pulls of `a_0` in the first phase.
    pub n0: u64,
    /// Pulls of each candidate in the second phase.
    pub per_candidate: u64,
}

impl TwoPhasePlan {
    /// `(ln 16 / (32 K ln(32 K)))^(1/3)`.
    pub fn candidate_alpha(k: usize) -> f64 {
        let k = k as f64;
        (16f64.ln() / (32.0 * k * (32.0 * k).ln())).cbrt()
    }

    /// Noise level at which the candidate-phase query bound
    /// `2 (ln 16)^(1/3) / 32^(1/3) ln^(2/3)(32K) K^(2/3) sigma^2` equals 1.
    pub fn boundary_sigma(k: usize) -> f64 {
        let kf = k as f64;
        let coef = 2.0 * 16f64.ln().cbrt() / 32f64.cbrt() * (32.0 * kf).ln().powf(2.0 / 3.0) * kf.powf(2.0 / 3.0);
        (1.0 / coef).sqrt()
    }

    pub fn new(k: usize, sigma: f64) -> Result<Self> {
        if k < 2 {
            return Err(Error::domain(format!("K must be >= 2, got {k}")));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::domain(format!("sigma must be >= 0, got {sigma}")));
        }
        if sigma == 0.0 {
            return Ok(TwoPhasePlan { k, sigma, case: TwoPhaseCase::NoiseFree, alpha: 0.0, n0: 1, per_candidate: 0 });
        }
        let alpha = Self::candidate_alpha(k);
        if alpha >= 1.0 / k as f64 {
            let delta = 1.0 / (16.0 * alpha * k as f64);
            Ok(TwoPhasePlan {
                k,
                sigma,
                case: TwoPhaseCase::Candidates,
                alpha,
                n0: sample_size(alpha, 1.0 / 8.0, sigma)?,
                per_candidate: sample_size(0.25, delta, sigma)?,
            })
        } else {
            let alpha = 1.0 / (2.0 * k as f64);
            Ok(TwoPhasePlan {
                k,
                sigma,
                case: TwoPhaseCase::Single,
                alpha,
                n0: sample_size(alpha, 0.25, sigma)?,
                per_candidate: 0,
            })
        }
    }

    /// Total queries when `candidates` codes survive the first phase.
    pub fn budget(&self, candidates: usize) -> u64 {
        match self.case {
            TwoPhaseCase::Candidates => self.n0 + candidates as u64 * self.per_candidate,
            _ => self.n0,
        }
    }

    /// Largest number of codes `i/(4K)` a window of half-width `alpha` can hold.
    pub fn max_candidates(&self) -> usize {
        match self.case {
            TwoPhaseCase::Candidates => ((8.0 * self.alpha * self.k as f64).floor() as usize + 1).min(self.k),
            _ => 1,
        }
    }

    pub fn max_budget(&self) -> u64 {
        self.budget(self.max_candidates())
    }

    /// `{i : |mean - i/(4K)| <= alpha}` in increasing order.
    pub fn candidates(&self, mean: f64) -> Vec<usize> {
        let scale = 4.0 * self.k as f64;
        (1..=self.k).filter(|&i| (mean - i as f64 / scale).abs() <= self.alpha).collect()
    }

    /// Code nearest to `mean`; ties go to the smaller index.
    pub fn nearest(&self, mean: f64) -> usize {
        let x = mean * 4.0 * self.k as f64;
        let lo = (x.floor() as i64).clamp(1, self.k as i64) as usize;
        let hi = (x.ceil() as i64).clamp(1, self.k as i64) as usize;
        if (x - hi as f64).abs() < (x - lo as f64).abs() {
            hi
        } else {
            lo
        }
    }
}

/// Learner for the informative-K class following a [`TwoPhasePlan`].
#[derive(Debug, Clone)]
pub struct TwoPhase {
    plan: TwoPhasePlan,
    candidates: Option<Vec<usize>>,
}

impl TwoPhase {
    pub fn new(plan: TwoPhasePlan) -> Self {
        TwoPhase { plan, candidates: None }
    }

    pub fn plan(&self) -> &TwoPhasePlan {
        &self.plan
    }
}

fn mean(entries: &[(ActionId, crate::model::Reward)]) -> f64 {
    entries.iter().map(|(_, r)| r.to_f64()).sum::<f64>() / entries.len() as f64
}

impl Learner for TwoPhase {
    fn decide(&mut self, history: &History) -> Result<Decision> {
        let plan = &self.plan;
        let entries = history.entries();
        let n0 = plan.n0 as usize;

        if plan.case == TwoPhaseCase::NoiseFree {
            let Some((_, r)) = entries.first() else {
                return Ok(Decision::Query(ActionId(0)));
            };
            let v = r.to_exact()?;
            let i = rational::as_multiple_of(&v, &BigInt::from(4 * plan.k))
                .and_then(|i| usize::try_from(i).ok())
                .filter(|i| (1..=plan.k).contains(i))
                .ok_or_else(|| Error::protocol(format!("{} at a_0 is not a code i/(4K)", rational::format(&v))))?;
            return Ok(Decision::Stop(ActionId(i)));
        }

        if entries.len() < n0 {
            return Ok(Decision::Query(ActionId(0)));
        }
        if self.candidates.is_none() {
            let mu0 = mean(&entries[..n0]);
            let chosen = match plan.case {
                TwoPhaseCase::Candidates => plan.candidates(mu0),
                _ => Vec::new(),
            };
            if chosen.is_empty() {
                // Single case, or no code within alpha: answer with the nearest code.
                return Ok(Decision::Stop(ActionId(plan.nearest(mu0))));
            }
            self.candidates = Some(chosen);
        }
        let candidates = self.candidates.as_ref().expect("set above");
        let m = plan.per_candidate as usize;
        let done = entries.len() - n0;
        if done < candidates.len() * m {
            return Ok(Decision::Query(ActionId(candidates[done / m])));
        }
        let mut best = 0;
        let mut best_mean = f64::NEG_INFINITY;
        for (j, _) in candidates.iter().enumerate() {
            let mu = mean(&entries[n0 + j * m..n0 + (j + 1) * m]);
            if mu > best_mean {
                best = j;
                best_mean = mu;
            }
        }
        Ok(Decision::Stop(ActionId(candidates[best])))
    }
}
