//! Structured-bandit laboratory.
//!
//! Function classes over finite action sets, the learners that query them,
//! an exact noise-free query-complexity solver, information-theoretic helpers
//! and a seeded Monte Carlo harness for checking the bounds these objects obey.
//!
//! Noise-free logic (version spaces, the solver, the SAT encodings) runs on
//! exact rationals; floats only appear once Gaussian noise enters.

pub mod classes;
pub mod error;
pub mod harness;
pub mod learners;
pub mod metrics;
pub mod model;
pub mod rational;
pub mod rng;
pub mod satbandit;
pub mod solver;

pub use error::{Error, Result};
pub use model::{
    eps_optimal_set, sample_reward, ActionId, Decision, ExplicitClass, History, Learner,
    NoiseModel, Reward, RewardFunction, VersionSpace,
};
pub use rational::Rational;
