use crate::classes::{info_lock_bits, info_lock_decode};
use crate::error::{Error, Result};
use crate::metrics::sample_size;
use crate::model::{ActionId, Decision, History, Learner};

/// Identification learner for the info-lock class: estimates the sign of
/// every `A_1` action, decodes the index and outputs the matching `A_2` action.
#[derive(Debug, Clone)]
pub struct InfoLockDecode {
    k: usize,
    bits: usize,
    pulls: u64,
}

impl InfoLockDecode {
    /// Each of the `ceil(log2 K)` bits is read with enough pulls to be right
    /// with probability `1 - delta / bits`.
    pub fn new(k: usize, eps1: f64, sigma: f64, delta: f64) -> Result<Self> {
        if k < 2 {
            return Err(Error::domain(format!("K must be >= 2, got {k}")));
        }
        let bits = info_lock_bits(k);
        let pulls = sample_size(eps1, delta / bits as f64, sigma)?;
        Ok(InfoLockDecode { k, bits, pulls })
    }

    /// Queries used on every run.
    pub fn budget(&self) -> u64 {
        self.bits as u64 * self.pulls
    }
}

impl Learner for InfoLockDecode {
    fn decide(&mut self, history: &History) -> Result<Decision> {
        let n = self.pulls as usize;
        let len = history.len();
        if len < self.bits * n {
            return Ok(Decision::Query(ActionId(len / n)));
        }
        let entries = history.entries();
        let signs: Vec<bool> = (0..self.bits)
            .map(|j| entries[j * n..(j + 1) * n].iter().map(|(_, r)| r.to_f64() - 0.5).sum::<f64>() > 0.0)
            .collect();
        let index = info_lock_decode(&signs).min(self.k - 1);
        Ok(Decision::Stop(ActionId(self.bits + index)))
    }
}
