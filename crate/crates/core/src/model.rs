//! Actions, rewards, function classes, histories and version spaces.

use std::fmt;

use fixedbitset::FixedBitSet;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActionId(pub usize);

impl ActionId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for ActionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An observed reward: exact on noise-free paths, a float once noise is added.
#[derive(Debug, Clone, PartialEq)]
pub enum Reward {
    Exact(Rational),
    Noisy(f64),
}

impl Reward {
    pub fn to_f64(&self) -> f64 {
        match self {
            Reward::Exact(r) => rational::to_f64(r),
            Reward::Noisy(x) => *x,
        }
    }

    /// Exact value of the observation. Noisy observations convert through
    /// their exact binary value.
    pub fn to_exact(&self) -> Result<Rational> {
        match self {
            Reward::Exact(r) => Ok(r.clone()),
            Reward::Noisy(x) => rational::from_f64(*x),
        }
    }

    pub fn as_exact(&self) -> Option<&Rational> {
        match self {
            Reward::Exact(r) => Some(r),
            Reward::Noisy(_) => None,
        }
    }
}

impl fmt::Display for Reward {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reward::Exact(r) => f.write_str(&rational::format(r)),
            Reward::Noisy(x) => write!(f, "{x}"),
        }
    }
}

/// Additive Gaussian noise with standard deviation `sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    sigma: f64,
}

impl NoiseModel {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::domain(format!("sigma must be finite and >= 0, got {sigma}")));
        }
        Ok(NoiseModel { sigma })
    }

    pub fn noise_free() -> Self {
        NoiseModel { sigma: 0.0 }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn is_noise_free(&self) -> bool {
        self.sigma == 0.0
    }
}

/// Ordered (action, observation) pairs seen so far in one run.
#[derive(Debug, Clone, PartialEq)]
pub struct History<A = ActionId> {
    entries: Vec<(A, Reward)>,
}

impl<A> Default for History<A> {
    fn default() -> Self {
        History { entries: Vec::new() }
    }
}

impl<A> History<A> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, action: A, reward: Reward) {
        self.entries.push((action, reward));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(A, Reward)] {
        &self.entries
    }

    pub fn last(&self) -> Option<&(A, Reward)> {
        self.entries.last()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(A, Reward)> {
        self.entries.iter()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decision<A = ActionId> {
    Query(A),
    /// Final answer. Not counted as a query.
    Stop(A),
}

/// A learner reads the history so far and either queries or stops.
///
/// Learners are single-run state machines: each call sees the history
/// extended by the observation for the previous query.
pub trait Learner<A = ActionId> {
    fn decide(&mut self, history: &History<A>) -> Result<Decision<A>>;
}

impl<A, L: Learner<A> + ?Sized> Learner<A> for Box<L> {
    fn decide(&mut self, history: &History<A>) -> Result<Decision<A>> {
        (**self).decide(history)
    }
}

/// One reward function `f: A -> [0,1]` with a float shadow for noisy sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardFunction {
    values: Vec<Rational>,
    floats: Vec<f64>,
}

impl RewardFunction {
    pub fn new(values: Vec<Rational>) -> Self {
        let floats = values.iter().map(rational::to_f64).collect();
        RewardFunction { values, floats }
    }

    pub fn n_actions(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn floats(&self) -> &[f64] {
        &self.floats
    }

    pub fn value(&self, action: ActionId) -> Result<&Rational> {
        self.values.get(action.0).ok_or(Error::InvalidAction {
            index: action.0,
            n_actions: self.values.len(),
        })
    }

    pub fn max_value(&self) -> &Rational {
        self.values.iter().max().expect("reward function over an empty action set")
    }

    /// Lowest-index maximizer.
    pub fn argmax(&self) -> ActionId {
        let max = self.max_value();
        ActionId(self.values.iter().position(|v| v == max).unwrap_or(0))
    }

    /// Per-action instantaneous regret `max f - f(a)` as floats.
    pub fn regret_gaps(&self) -> Vec<f64> {
        let max = self.max_value();
        self.values.iter().map(|v| rational::to_f64(&(max - v))).collect()
    }
}

/// Observe `f(action)` under `noise`.
///
/// At `sigma = 0` the exact value is returned and `rng` is left untouched.
pub fn sample_reward<R: Rng + ?Sized>(
    f: &RewardFunction,
    action: ActionId,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<Reward> {
    let value = f.value(action)?;
    if noise.is_noise_free() {
        return Ok(Reward::Exact(value.clone()));
    }
    let z: f64 = rng.sample(StandardNormal);
    Ok(Reward::Noisy(f.floats[action.0] + noise.sigma() * z))
}

/// `{a : f(a) >= max f - epsilon}`, in increasing action order. Never empty.
pub fn eps_optimal_set(f: &RewardFunction, epsilon: &Rational) -> Vec<ActionId> {
    let threshold = f.max_value() - epsilon;
    f.values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v >= threshold)
        .map(|(i, _)| ActionId(i))
        .collect()
}

/// A fully materialized finite class `F ⊆ [0,1]^A`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitClass {
    name: String,
    params: serde_json::Value,
    n_actions: usize,
    functions: Vec<RewardFunction>,
    labels: Option<Vec<String>>,
}

impl ExplicitClass {
    /// Validates that every entry lies in `[0,1]`, rows have equal length and
    /// rows are pairwise distinct.
    pub fn new(
        name: impl Into<String>,
        params: serde_json::Value,
        rows: Vec<Vec<Rational>>,
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        let n_actions = rows.first().map(Vec::len).unwrap_or(0);
        if rows.is_empty() || n_actions == 0 {
            return Err(Error::Construction("a class needs at least one function and one action".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_actions {
                return Err(Error::Construction(format!(
                    "function {i} has {} values, expected {n_actions}",
                    row.len()
                )));
            }
            if let Some((a, v)) = row.iter().enumerate().find(|(_, v)| !rational::in_unit_interval(v)) {
                return Err(Error::Construction(format!(
                    "f_{i}(a_{a}) = {} is outside [0,1]",
                    rational::format(v)
                )));
            }
        }
        let mut sorted: Vec<&Vec<Rational>> = rows.iter().collect();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Construction("class rows are not pairwise distinct".into()));
        }
        if let Some(labels) = &labels {
            if labels.len() != n_actions {
                return Err(Error::Construction("one label per action is required".into()));
            }
        }
        Ok(ExplicitClass {
            name: name.into(),
            params,
            n_actions,
            functions: rows.into_iter().map(RewardFunction::new).collect(),
            labels,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &serde_json::Value {
        &self.params
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn n_functions(&self) -> usize {
        self.functions.len()
    }

    pub fn functions(&self) -> &[RewardFunction] {
        &self.functions
    }

    pub fn function(&self, index: usize) -> Result<&RewardFunction> {
        self.functions
            .get(index)
            .ok_or_else(|| Error::domain(format!("function index {index} out of range")))
    }

    pub fn value(&self, function: usize, action: ActionId) -> Result<&Rational> {
        self.function(function)?.value(action)
    }

    pub fn label(&self, action: ActionId) -> Option<&str> {
        self.labels.as_ref().and_then(|l| l.get(action.0)).map(String::as_str)
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn check_action(&self, action: ActionId) -> Result<()> {
        if action.0 < self.n_actions {
            Ok(())
        } else {
            Err(Error::InvalidAction { index: action.0, n_actions: self.n_actions })
        }
    }

    pub fn actions(&self) -> impl Iterator<Item = ActionId> {
        (0..self.n_actions).map(ActionId)
    }

    pub fn rows(&self) -> Vec<Vec<Rational>> {
        self.functions.iter().map(|f| f.values().to_vec()).collect()
    }

    pub fn full_version_space(&self) -> VersionSpace<'_> {
        VersionSpace::full(self)
    }
}

/// Members of an explicit class consistent with a noise-free history.
#[derive(Debug, Clone, PartialEq)]
pub struct VersionSpace<'a> {
    class: &'a ExplicitClass,
    members: FixedBitSet,
}

impl<'a> VersionSpace<'a> {
    pub fn full(class: &'a ExplicitClass) -> Self {
        let mut members = FixedBitSet::with_capacity(class.n_functions());
        members.insert_range(..);
        VersionSpace { class, members }
    }

    pub fn from_members(class: &'a ExplicitClass, members: FixedBitSet) -> Self {
        assert_eq!(members.len(), class.n_functions());
        VersionSpace { class, members }
    }

    pub fn class(&self) -> &'a ExplicitClass {
        self.class
    }

    pub fn bits(&self) -> &FixedBitSet {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_clear()
    }

    pub fn contains(&self, function: usize) -> bool {
        self.members.contains(function)
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.ones()
    }

    /// Sorted distinct values `{f(action) : f in V}`.
    pub fn achievable_values(&self, action: ActionId) -> Result<Vec<Rational>> {
        self.class.check_action(action)?;
        let mut values: Vec<Rational> = self
            .members()
            .map(|f| self.class.functions[f].values[action.0].clone())
            .collect();
        values.sort();
        values.dedup();
        Ok(values)
    }

    /// `{f in V : f(action) = observed}` under exact equality.
    pub fn restrict(&self, action: ActionId, observed: &Reward) -> Result<VersionSpace<'a>> {
        self.class.check_action(action)?;
        let observed = observed.to_exact()?;
        let mut members = self.members.clone();
        for f in self.members.ones() {
            if self.class.functions[f].values[action.0] != observed {
                members.set(f, false);
            }
        }
        if members.is_clear() {
            return Err(Error::InconsistentHistory {
                action: action.0,
                observed: rational::format(&observed),
            });
        }
        Ok(VersionSpace { class: self.class, members })
    }

    pub fn restrict_history(&self, history: &History) -> Result<VersionSpace<'a>> {
        let mut space = self.clone();
        for (a, r) in history.iter() {
            space = space.restrict(*a, r)?;
        }
        Ok(space)
    }
}
