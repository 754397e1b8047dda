//! Actions and reward functions of the SAT-encoding class.

use std::fmt;

use num_bigint::BigInt;
use rand::Rng;

use super::formula::{assignment_string, encode_formula, min_sat_assignment, random_formula, Formula3CNF, MAX_VARS};
use crate::error::{Error, Result};
use crate::model::{ActionId, Reward};
use crate::rational::{self, Rational};

/// `Star`, an assignment in `{0,1}^n` or an index in `1..=2^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SatAction {
    Star,
    Assignment(u64),
    Index(u64),
}

impl SatAction {
    /// Dense numbering: `Star = 0`, assignments `1..=2^n`, indices `2^n + 1..=2^(n+1)`.
    pub fn to_action_id(self, n: usize) -> ActionId {
        match self {
            SatAction::Star => ActionId(0),
            SatAction::Assignment(b) => ActionId(1 + b as usize),
            SatAction::Index(c) => ActionId((1usize << n) + c as usize),
        }
    }

    pub fn from_action_id(id: ActionId, n: usize) -> Result<Self> {
        let size = 1usize << n;
        match id.0 {
            0 => Ok(SatAction::Star),
            i if i <= size => Ok(SatAction::Assignment((i - 1) as u64)),
            i if i <= 2 * size => Ok(SatAction::Index((i - size) as u64)),
            i => Err(Error::InvalidAction { index: i, n_actions: action_count(n) as usize }),
        }
    }

    pub fn check(self, n: usize) -> Result<Self> {
        let size = 1u64 << n;
        let ok = match self {
            SatAction::Star => true,
            SatAction::Assignment(b) => b < size,
            SatAction::Index(c) => (1..=size).contains(&c),
        };
        if ok {
            Ok(self)
        } else {
            Err(Error::domain(format!("{self} is not an action for n = {n}")))
        }
    }

    pub fn display(self, n: usize) -> String {
        match self {
            SatAction::Assignment(b) => format!("assignment:{}", assignment_string(b, n)),
            other => other.to_string(),
        }
    }
}

impl fmt::Display for SatAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SatAction::Star => f.write_str("star"),
            SatAction::Assignment(b) => write!(f, "assignment:{b}"),
            SatAction::Index(c) => write!(f, "index:{c}"),
        }
    }
}

/// `2^(n+1) + 1`.
pub fn action_count(n: usize) -> u64 {
    (1u64 << (n + 1)) + 1
}

/// A member of the class, in its concise representation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SatFunction {
    /// `f_{phi,c}`; `a_star` is the smallest satisfying assignment of `phi`.
    Indexed { phi: Formula3CNF, c: u64, a_star: u64 },
    /// `f_phi`.
    Plain { phi: Formula3CNF },
}

impl SatFunction {
    /// `f_{phi,c}` with `a*` found by exhaustive search.
    pub fn indexed(phi: Formula3CNF, c: u64) -> Result<Self> {
        let n = phi.n();
        SatAction::Index(c).check(n)?;
        let a_star = min_sat_assignment(&phi)?
            .ok_or_else(|| Error::domain(format!("f_(phi,c) requires a satisfiable formula; {phi} is not")))?;
        Ok(SatFunction::Indexed { phi, c, a_star })
    }

    /// `f_{phi,c}` for a caller that already knows the smallest satisfying assignment.
    pub(crate) fn indexed_unchecked(phi: Formula3CNF, c: u64, a_star: u64) -> Self {
        SatFunction::Indexed { phi, c, a_star }
    }

    pub fn plain(phi: Formula3CNF) -> Self {
        SatFunction::Plain { phi }
    }

    pub fn phi(&self) -> &Formula3CNF {
        match self {
            SatFunction::Indexed { phi, .. } | SatFunction::Plain { phi } => phi,
        }
    }

    pub fn n(&self) -> usize {
        self.phi().n()
    }

    pub fn eval(&self, action: SatAction) -> Rational {
        eval_sat_function(self, action)
    }
}

/// `c / 2^(n+1)`, the value at `a*`.
pub fn index_code(c: u64, n: usize) -> Rational {
    Rational::new(BigInt::from(c), BigInt::from(1) << (n + 1))
}

/// Inverse of [`index_code`]: `Some(c)` when `r = c / 2^(n+1)` with `c` in `1..=2^n`.
pub fn decode_index_code(r: &Rational, n: usize) -> Option<u64> {
    let c = rational::as_multiple_of(r, &(BigInt::from(1) << (n + 1)))?;
    let c: u64 = c.try_into().ok()?;
    (1..=1u64 << n).contains(&c).then_some(c)
}

pub fn eval_sat_function(f: &SatFunction, action: SatAction) -> Rational {
    match (f, action) {
        (_, SatAction::Star) => encode_formula(f.phi()),
        (SatFunction::Indexed { a_star, c, phi }, SatAction::Assignment(b)) if b == *a_star => index_code(*c, phi.n()),
        (SatFunction::Indexed { c, .. }, SatAction::Index(i)) if i == *c => rational::one(),
        _ => rational::zero(),
    }
}

/// Observation of `f` at `action` (the class is noise-free).
pub fn respond(f: &SatFunction, action: SatAction) -> Result<Reward> {
    action.check(f.n())?;
    Ok(Reward::Exact(eval_sat_function(f, action)))
}

/// Reads the maximizer off the representation. Values are `1`, the code in
/// `[1/4, 1/2)`, at most `1/2` or `0`, so every `epsilon < 1/2` gives the
/// same answer.
pub fn maximize_sat(f: &SatFunction, _epsilon: f64) -> SatAction {
    match f {
        SatFunction::Indexed { c, .. } => SatAction::Index(*c),
        SatFunction::Plain { .. } => SatAction::Star,
    }
}

/// Random member of the class: a formula with up to `n^2` clauses, and with
/// probability 1/2 (when satisfiable) a uniformly random index.
pub fn random_sat_function<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<SatFunction> {
    if n > MAX_VARS {
        return Err(Error::domain(format!("n must be <= {MAX_VARS}")));
    }
    let clauses = rng.random_range(0..=(n * n).min(3 * n));
    let phi = random_formula(n, clauses, rng)?;
    if rng.random() {
        if let Some(a_star) = min_sat_assignment(&phi)? {
            let c = rng.random_range(1..=1u64 << n);
            return Ok(SatFunction::indexed_unchecked(phi, c, a_star));
        }
    }
    Ok(SatFunction::plain(phi))
}
