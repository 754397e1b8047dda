use std::sync::Arc;

use fixedbitset::FixedBitSet;
use num_traits::Signed;

use crate::error::Result;
use crate::model::{Decision, ExplicitClass, History, Learner, Reward, VersionSpace};
use crate::rational::Rational;

/// Projects each noisy observation onto the nearest value still achievable
/// in the version space and hands the cleaned history to a noise-free learner.
pub struct DenoiseWrapper {
    class: Arc<ExplicitClass>,
    members: FixedBitSet,
    clean: History,
    inner: Box<dyn Learner + Send>,
}

impl DenoiseWrapper {
    pub fn new(class: Arc<ExplicitClass>, inner: Box<dyn Learner + Send>) -> Self {
        let members = class.full_version_space().bits().clone();
        DenoiseWrapper { class, members, clean: History::new(), inner }
    }

    /// Nearest achievable value; equidistant candidates resolve to the smaller one.
    pub fn project(values: &[Rational], observed: &Rational) -> Rational {
        let mut best = &values[0];
        let mut best_dist = (best - observed).abs();
        for v in &values[1..] {
            let d = (v - observed).abs();
            if d < best_dist {
                best = v;
                best_dist = d;
            }
        }
        best.clone()
    }
}

impl Learner for DenoiseWrapper {
    fn decide(&mut self, history: &History) -> Result<Decision> {
        for (a, r) in &history.entries()[self.clean.len()..] {
            let space = VersionSpace::from_members(&self.class, self.members.clone());
            let values = space.achievable_values(*a)?;
            let r = Self::project(&values, &r.to_exact()?);
            let next = space.restrict(*a, &Reward::Exact(r.clone()))?;
            self.members = next.bits().clone();
            self.clean.push(*a, Reward::Exact(r));
        }
        self.inner.decide(&self.clean)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn projection_prefers_smaller_on_ties() {
        let values = vec![int(0), ratio(1, 2), int(1)];
        assert_eq!(DenoiseWrapper::project(&values, &ratio(1, 4)), int(0));
        assert_eq!(DenoiseWrapper::project(&values, &ratio(3, 4)), ratio(1, 2));
        assert_eq!(DenoiseWrapper::project(&values, &ratio(7, 10)), ratio(1, 2));
        assert_eq!(DenoiseWrapper::project(&values, &int(5)), int(1));
        assert_eq!(DenoiseWrapper::project(&values, &int(-3)), int(0));
    }
}
