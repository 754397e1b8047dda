use crate::error::{Error, Result};
use crate::model::{ActionId, Decision, History, Learner};

/// Floor on the noise level used in the exploration bonus.
pub const SIGMA_FLOOR: f64 = 1e-6;

/// UCB over a set of arms. Pulls every arm once, then the arm maximizing
/// `mean + sqrt(2 sigma^2 ln t / n)`; stops at the empirical best once
/// `horizon` pulls have been made.
#[derive(Debug, Clone)]
pub struct Ucb {
    arms: Vec<ActionId>,
    horizon: u64,
    sigma: f64,
    counts: Vec<u64>,
    sums: Vec<f64>,
    /// Position of each action in `arms`, indexed by action id.
    slot: Vec<Option<usize>>,
    seen: usize,
}

impl Ucb {
    pub fn new(arms: Vec<ActionId>, horizon: u64, sigma: f64) -> Result<Self> {
        if arms.is_empty() {
            return Err(Error::domain("ucb needs at least one arm"));
        }
        if horizon < arms.len() as u64 {
            return Err(Error::domain(format!("horizon {horizon} is below the arm count {}", arms.len())));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::domain(format!("sigma must be >= 0, got {sigma}")));
        }
        let max = arms.iter().map(|a| a.0).max().unwrap_or(0);
        let mut slot = vec![None; max + 1];
        for (i, a) in arms.iter().enumerate() {
            if slot[a.0].replace(i).is_some() {
                return Err(Error::domain(format!("arm {a} listed twice")));
            }
        }
        let k = arms.len();
        Ok(Ucb { arms, horizon, sigma: sigma.max(SIGMA_FLOOR), counts: vec![0; k], sums: vec![0.0; k], slot, seen: 0 })
    }

    fn empirical_best(&self) -> ActionId {
        let mut best = 0;
        for i in 1..self.arms.len() {
            if self.sums[i] / self.counts[i] as f64 > self.sums[best] / self.counts[best] as f64 {
                best = i;
            }
        }
        self.arms[best]
    }
}

impl Learner for Ucb {
    fn decide(&mut self, history: &History) -> Result<Decision> {
        for (a, r) in &history.entries()[self.seen..] {
            let i = self
                .slot
                .get(a.0)
                .copied()
                .flatten()
                .ok_or_else(|| Error::protocol(format!("action {a} is not one of the ucb arms")))?;
            self.counts[i] += 1;
            self.sums[i] += r.to_f64();
        }
        self.seen = history.len();

        if let Some(i) = self.counts.iter().position(|&c| c == 0) {
            return Ok(Decision::Query(self.arms[i]));
        }
        let t = history.len() as u64;
        if t >= self.horizon {
            return Ok(Decision::Stop(self.empirical_best()));
        }
        let log_t = (t as f64).ln();
        let var2 = 2.0 * self.sigma * self.sigma;
        let mut best = 0;
        let mut best_index = f64::NEG_INFINITY;
        for i in 0..self.arms.len() {
            let n = self.counts[i] as f64;
            let index = self.sums[i] / n + (var2 * log_t / n).sqrt();
            if index > best_index {
                best = i;
                best_index = index;
            }
        }
        Ok(Decision::Query(self.arms[best]))
    }
}
