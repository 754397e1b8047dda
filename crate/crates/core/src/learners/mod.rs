//! Learners and the JSON spec that builds them.
//!
//! A [`LearnerFactory`] validates a [`LearnerSpec`] against the class once
//! (solving for policy trees, fixing sample sizes) and then spawns cheap
//! per-trial instances.

mod denoise;
mod info_lock;
mod tree_descent;
mod two_phase;
mod ucb;
mod vs_greedy;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use denoise::DenoiseWrapper;
pub use info_lock::InfoLockDecode;
pub use tree_descent::TreeDescent;
pub use two_phase::{TwoPhase, TwoPhaseCase, TwoPhasePlan};
pub use ucb::{Ucb, SIGMA_FLOOR};
pub use vs_greedy::PolicyLearner;

use crate::error::{Error, Result};
use crate::model::{ActionId, ExplicitClass, Learner};
use crate::rational::{Exact, Rational};
use crate::solver::{exact_qc_with_cap, PolicyTree, DEFAULT_CAP};

/// JSON learner description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LearnerSpec {
    /// Projects noisy observations onto the version space before handing them
    /// to a noise-free `inner` learner. `delta`/`delta_prime` only enter the
    /// noise threshold report.
    Denoise {
        inner: Box<LearnerSpec>,
        #[serde(default = "default_delta")]
        delta: f64,
        #[serde(default)]
        delta_prime: f64,
    },
    TwoPhase {
        #[serde(rename = "K")]
        k: usize,
        #[serde(default)]
        sigma: Option<f64>,
    },
    TreeDescent {
        d: u32,
        delta: f64,
    },
    Ucb {
        #[serde(default)]
        horizon: Option<u64>,
        #[serde(default)]
        sigma: Option<f64>,
        #[serde(default)]
        arms: Option<Vec<usize>>,
    },
    VsGreedy {
        #[serde(default)]
        epsilon: Option<Exact>,
        #[serde(default)]
        cap: Option<usize>,
    },
    InfoLockDecode {
        #[serde(rename = "K")]
        k: usize,
        eps1: f64,
        #[serde(default)]
        sigma: Option<f64>,
        #[serde(default)]
        delta: Option<f64>,
    },
}

fn default_delta() -> f64 {
    0.1
}

impl LearnerSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            LearnerSpec::Denoise { .. } => "denoise",
            LearnerSpec::TwoPhase { .. } => "two_phase",
            LearnerSpec::TreeDescent { .. } => "tree_descent",
            LearnerSpec::Ucb { .. } => "ucb",
            LearnerSpec::VsGreedy { .. } => "vs_greedy",
            LearnerSpec::InfoLockDecode { .. } => "info_lock_decode",
        }
    }
}

/// Experiment-level values a spec falls back on.
#[derive(Debug, Clone)]
pub struct LearnerContext {
    pub sigma: f64,
    pub epsilon: Rational,
    /// Horizon for regret-mode learners.
    pub horizon: Option<u64>,
}

impl LearnerContext {
    pub fn new(sigma: f64, epsilon: Rational) -> Self {
        LearnerContext { sigma, epsilon, horizon: None }
    }
}

enum Built {
    Denoise { class: Arc<ExplicitClass>, inner: Box<Built> },
    TwoPhase(TwoPhasePlan),
    TreeDescent { d: u32, delta: f64 },
    Ucb { arms: Vec<ActionId>, horizon: u64, sigma: f64 },
    Policy(Arc<PolicyTree>),
    InfoLock(InfoLockDecode),
}

impl Built {
    fn spawn(&self) -> Result<Box<dyn Learner + Send>> {
        Ok(match self {
            Built::Denoise { class, inner } => Box::new(DenoiseWrapper::new(class.clone(), inner.spawn()?)),
            Built::TwoPhase(plan) => Box::new(TwoPhase::new(plan.clone())),
            Built::TreeDescent { d, delta } => Box::new(TreeDescent::new(*d, *delta)?),
            Built::Ucb { arms, horizon, sigma } => Box::new(Ucb::new(arms.clone(), *horizon, *sigma)?),
            Built::Policy(tree) => Box::new(PolicyLearner::new(tree.clone())),
            Built::InfoLock(l) => Box::new(l.clone()),
        })
    }

    fn max_queries(&self) -> Option<u64> {
        match self {
            Built::Denoise { inner, .. } => inner.max_queries(),
            Built::TwoPhase(plan) => Some(plan.max_budget()),
            Built::TreeDescent { d, .. } => Some(*d as u64),
            Built::Ucb { horizon, .. } => Some(*horizon),
            Built::Policy(tree) => Some(tree.depth() as u64),
            Built::InfoLock(l) => Some(l.budget()),
        }
    }
}

/// A validated spec bound to a class, ready to spawn per-trial learners.
pub struct LearnerFactory {
    spec: LearnerSpec,
    built: Built,
}

fn class_param<'a>(class: &'a ExplicitClass, key: &str) -> Option<&'a serde_json::Value> {
    class.params().get(key)
}

fn require_kind(class: &ExplicitClass, kind: &str, learner: &str) -> Result<()> {
    match class_param(class, "kind").and_then(|v| v.as_str()) {
        Some(k) if k == kind => Ok(()),
        _ => Err(Error::domain(format!("learner {learner} runs on {kind} classes, not {}", class.name()))),
    }
}

fn require_param(class: &ExplicitClass, key: &str, value: serde_json::Value, learner: &str) -> Result<()> {
    match class_param(class, key) {
        Some(v) if *v == value => Ok(()),
        other => Err(Error::domain(format!(
            "learner {learner} has {key} = {value} but the class has {}",
            other.map_or("none".to_string(), |v| v.to_string())
        ))),
    }
}

fn check_sigma(sigma: f64) -> Result<f64> {
    if sigma >= 0.0 && sigma.is_finite() {
        Ok(sigma)
    } else {
        Err(Error::domain(format!("sigma must be >= 0, got {sigma}")))
    }
}

fn build(spec: &LearnerSpec, class: &Arc<ExplicitClass>, ctx: &LearnerContext) -> Result<Built> {
    Ok(match spec {
        LearnerSpec::Denoise { inner, delta, delta_prime } => {
            if !(*delta_prime >= 0.0 && delta_prime < delta && *delta <= 1.0) {
                return Err(Error::domain(format!("need 0 <= delta' < delta <= 1, got delta={delta}, delta'={delta_prime}")));
            }
            if matches!(**inner, LearnerSpec::Denoise { .. } | LearnerSpec::Ucb { .. }) {
                return Err(Error::domain(format!("denoise needs a noise-free identification learner, not {}", inner.kind())));
            }
            let clean = LearnerContext { sigma: 0.0, ..ctx.clone() };
            Built::Denoise { class: class.clone(), inner: Box::new(build(inner, class, &clean)?) }
        }
        LearnerSpec::TwoPhase { k, sigma } => {
            require_kind(class, "informative_k", "two_phase")?;
            require_param(class, "K", (*k).into(), "two_phase")?;
            Built::TwoPhase(TwoPhasePlan::new(*k, check_sigma(sigma.unwrap_or(ctx.sigma))?)?)
        }
        LearnerSpec::TreeDescent { d, delta } => {
            require_kind(class, "tree", "tree_descent")?;
            require_param(class, "d", (*d).into(), "tree_descent")?;
            require_param(class, "delta", (*delta).into(), "tree_descent")?;
            TreeDescent::new(*d, *delta)?;
            Built::TreeDescent { d: *d, delta: *delta }
        }
        LearnerSpec::Ucb { horizon, sigma, arms } => {
            let horizon = horizon
                .or(ctx.horizon)
                .ok_or_else(|| Error::domain("ucb needs a horizon (spec or experiment budget)"))?;
            let arms: Vec<ActionId> = match arms {
                Some(a) => a.iter().map(|&i| ActionId(i)).collect(),
                None => class.actions().collect(),
            };
            for a in &arms {
                class.check_action(*a)?;
            }
            let sigma = check_sigma(sigma.unwrap_or(ctx.sigma))?;
            Ucb::new(arms.clone(), horizon, sigma)?;
            Built::Ucb { arms, horizon, sigma }
        }
        LearnerSpec::VsGreedy { epsilon, cap } => {
            let eps = match epsilon {
                Some(e) => e.0.clone(),
                None => ctx.epsilon.clone(),
            };
            let qc = exact_qc_with_cap(class, &eps, cap.unwrap_or(DEFAULT_CAP))?;
            Built::Policy(Arc::new(qc.tree))
        }
        LearnerSpec::InfoLockDecode { k, eps1, sigma, delta } => {
            require_kind(class, "info_lock", "info_lock_decode")?;
            require_param(class, "K", (*k).into(), "info_lock_decode")?;
            require_param(class, "eps1", (*eps1).into(), "info_lock_decode")?;
            let sigma = check_sigma(sigma.unwrap_or(ctx.sigma))?;
            Built::InfoLock(InfoLockDecode::new(*k, *eps1, sigma, delta.unwrap_or(0.25))?)
        }
    })
}

impl LearnerFactory {
    pub fn new(spec: LearnerSpec, class: Arc<ExplicitClass>, ctx: &LearnerContext) -> Result<Self> {
        let built = build(&spec, &class, ctx)?;
        Ok(LearnerFactory { spec, built })
    }

    pub fn spec(&self) -> &LearnerSpec {
        &self.spec
    }

    /// Fresh learner for one trial.
    pub fn spawn(&self) -> Result<Box<dyn Learner + Send>> {
        self.built.spawn()
    }

    /// Upper bound on the queries any run makes, when the learner fixes one.
    pub fn max_queries(&self) -> Option<u64> {
        self.built.max_queries()
    }

    /// The two-phase plan, when the spec is (or wraps) a two-phase learner.
    pub fn two_phase_plan(&self) -> Option<&TwoPhasePlan> {
        match &self.built {
            Built::TwoPhase(p) => Some(p),
            _ => None,
        }
    }
}

/// Largest `sigma` with `sigma^2 < gap^2 / (4 ln(2 qc / (delta - delta')))`,
/// the regime in which projecting noisy observations onto the version space
/// keeps a noise-free learner correct with probability `1 - delta`.
pub fn noise_threshold_sigma(gap: f64, qc: u32, delta: f64, delta_prime: f64) -> Result<f64> {
    if !(delta_prime >= 0.0 && delta_prime < delta && delta <= 1.0) {
        return Err(Error::domain(format!("need 0 <= delta' < delta <= 1, got delta={delta}, delta'={delta_prime}")));
    }
    if !(gap > 0.0) || qc == 0 {
        return Err(Error::domain("threshold needs a positive gap and qc >= 1"));
    }
    let log = (2.0 * qc as f64 / (delta - delta_prime)).ln();
    if log <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((gap * gap / (4.0 * log)).sqrt())
}
