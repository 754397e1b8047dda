//! A class with two-query noise-free complexity whose learning encodes SAT.
//!
//! Actions are `Star`, the `2^n` assignments and the `2^n` indices. Each
//! function stores a 3CNF formula behind `Star`; functions of the form
//! `f_{phi,c}` also reveal the index `c` at the smallest satisfying
//! assignment of `phi` and pay 1 at `c`.

pub mod formula;
pub mod function;
pub mod oracles;
pub mod reduction;

pub use formula::{
    assignment_string, decode_formula, encode_formula, min_sat_assignment, parse_dimacs, random_formula, Formula3CNF,
    Literal,
    BRUTE_FORCE_MAX_VARS,
};
pub use function::{
    action_count, eval_sat_function, maximize_sat, random_sat_function, respond, SatAction, SatFunction,
};
pub use oracles::{erm_consistent, estimation_error, OnlineEstimator};
pub use reduction::{run_sat_learner, sat_reduction, ReductionOutcome, TwoQueryIdentify, Verdict};
