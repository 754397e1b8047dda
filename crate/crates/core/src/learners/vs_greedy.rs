use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{ActionId, Decision, History, Learner};
use crate::rational;
use crate::solver::PolicyTree;

/// Replays a noise-free policy tree, following the branch of each exact observation.
#[derive(Debug, Clone)]
pub struct PolicyLearner {
    tree: Arc<PolicyTree>,
}

impl PolicyLearner {
    pub fn new(tree: Arc<PolicyTree>) -> Self {
        PolicyLearner { tree }
    }
}

impl Learner for PolicyLearner {
    fn decide(&mut self, history: &History) -> Result<Decision> {
        let mut node = self.tree.as_ref();
        for (step, (a, r)) in history.iter().enumerate() {
            let PolicyTree::Query { action, branches } = node else {
                return Err(Error::protocol(format!("history continues after the policy stopped (step {step})")));
            };
            if a != action {
                return Err(Error::protocol(format!("policy queried {action} but history shows {a}")));
            }
            let r = r
                .as_exact()
                .ok_or_else(|| Error::protocol("policy replay needs exact observations"))?;
            node = branches.get(r).ok_or_else(|| {
                Error::protocol(format!("value {} at action {a} is not a branch of the policy", rational::format(r)))
            })?;
        }
        Ok(match node {
            PolicyTree::Stop { output } => Decision::Stop(*output),
            PolicyTree::Query { action, .. } => Decision::Query(ActionId(action.0)),
        })
    }
}
