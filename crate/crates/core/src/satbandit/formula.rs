//! 3CNF formulas, their reward encoding, brute-force satisfiability and DIMACS input.

use std::fmt;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::Reward;
use crate::rational::{self, ratio, Rational};

/// Largest `n` for which assignments are enumerated exhaustively.
pub const BRUTE_FORCE_MAX_VARS: usize = 24;
/// Largest `n` for which the action set fits a machine word.
pub const MAX_VARS: usize = 62;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    /// 0-based variable index.
    pub var: usize,
    pub negated: bool,
}

impl Literal {
    pub fn pos(var: usize) -> Self {
        Literal { var, negated: false }
    }

    pub fn neg(var: usize) -> Self {
        Literal { var, negated: true }
    }

    /// Truth value under `assignment` (variable 0 is the most significant of `n` bits).
    pub fn eval(&self, assignment: u64, n: usize) -> bool {
        assignment_bit(assignment, self.var, n) != self.negated
    }
}

/// Value of variable `var` in an `n`-bit assignment read with variable 0 as the top bit.
pub fn assignment_bit(assignment: u64, var: usize, n: usize) -> bool {
    (assignment >> (n - 1 - var)) & 1 == 1
}

/// Renders an assignment as a bitstring, variable 1 first.
pub fn assignment_string(assignment: u64, n: usize) -> String {
    (0..n).map(|v| if assignment_bit(assignment, v, n) { '1' } else { '0' }).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Formula3CNF {
    n: usize,
    clauses: Vec<[Literal; 3]>,
}

impl Formula3CNF {
    pub fn new(n: usize, clauses: Vec<[Literal; 3]>) -> Result<Self> {
        if n == 0 || n > MAX_VARS {
            return Err(Error::domain(format!("variable count must lie in 1..={MAX_VARS}, got {n}")));
        }
        if clauses.len() > n * n {
            return Err(Error::domain(format!(
                "{} clauses exceed the limit n^2 = {}",
                clauses.len(),
                n * n
            )));
        }
        if let Some(l) = clauses.iter().flatten().find(|l| l.var >= n) {
            return Err(Error::domain(format!("literal on variable {} but n = {n}", l.var + 1)));
        }
        Ok(Formula3CNF { n, clauses })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn clauses(&self) -> &[[Literal; 3]] {
        &self.clauses
    }

    pub fn is_satisfied_by(&self, assignment: u64) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|l| l.eval(assignment, self.n)))
    }

    /// Formula whose only satisfying assignment is `assignment`: one clause
    /// per variable repeating the matching literal three times.
    pub fn unique_sat(n: usize, assignment: u64) -> Result<Self> {
        let clauses = (0..n)
            .map(|v| {
                let l = Literal { var: v, negated: !assignment_bit(assignment, v, n) };
                [l; 3]
            })
            .collect();
        Formula3CNF::new(n, clauses)
    }

    /// Renders the formula in DIMACS CNF.
    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.n, self.clauses.len());
        for c in &self.clauses {
            for l in c {
                let v = l.var as i64 + 1;
                out.push_str(&format!("{} ", if l.negated { -v } else { v }));
            }
            out.push_str("0\n");
        }
        out
    }
}

impl fmt::Display for Formula3CNF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.clauses.is_empty() {
            return f.write_str("(true)");
        }
        let clauses: Vec<String> = self
            .clauses
            .iter()
            .map(|c| {
                let lits: Vec<String> =
                    c.iter().map(|l| format!("{}x{}", if l.negated { "!" } else { "" }, l.var + 1)).collect();
                format!("({})", lits.join(" | "))
            })
            .collect();
        f.write_str(&clauses.join(" & "))
    }
}

fn ceil_log2(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        u64::BITS - (x - 1).leading_zeros()
    }
}

/// Bits of the clause-count header.
fn header_bits(n: usize) -> u32 {
    ceil_log2((n * n) as u64 + 1)
}

/// Bits of one literal: variable index then negation flag.
fn literal_bits(n: usize) -> u32 {
    ceil_log2(n as u64) + 1
}

/// Maps the formula's bitstring `b` to `1/4 + 0.b / 5`.
pub fn encode_formula(phi: &Formula3CNF) -> Rational {
    let n = phi.n;
    let lb = literal_bits(n);
    let mut bits = BigInt::from(phi.clauses.len());
    let mut len = header_bits(n) as u64;
    for l in phi.clauses.iter().flatten() {
        bits = (bits << lb) | BigInt::from(((l.var as u64) << 1) | u64::from(l.negated));
        len += lb as u64;
    }
    let frac = Rational::new(bits, BigInt::from(5) << len);
    ratio(1, 4) + frac
}

/// Exact inverse of [`encode_formula`].
pub fn decode_formula(r: &Reward, n: usize) -> Result<Formula3CNF> {
    if n == 0 || n > MAX_VARS {
        return Err(Error::domain(format!("variable count must lie in 1..={MAX_VARS}, got {n}")));
    }
    let v = r.to_exact()?;
    let bad = |why: &str| Error::Decode(format!("{} is not a formula code for n = {n}: {why}", rational::format(&v)));
    let x = (&v - ratio(1, 4)) * rational::int(5);
    if x < rational::zero() || x >= rational::one() {
        return Err(bad("outside [1/4, 1/2)"));
    }
    let h = header_bits(n);
    let count = (&x * Rational::from_integer(BigInt::from(1) << h)).floor().to_integer();
    let count = count.to_usize().filter(|m| *m <= n * n).ok_or_else(|| bad("clause count above n^2"))?;
    let lb = literal_bits(n);
    let len = h as u64 + 3 * count as u64 * lb as u64;
    let scaled = &x * Rational::from_integer(BigInt::from(1) << len);
    if !scaled.is_integer() {
        return Err(bad("trailing bits beyond the declared clauses"));
    }
    let bits = scaled.to_integer();
    let mask = (BigInt::from(1) << lb) - 1;
    let mut literals = Vec::with_capacity(3 * count);
    for i in (0..3 * count as u64).rev() {
        let chunk = ((&bits >> (i * lb as u64)) & &mask).to_u64().expect("literal fits a word");
        let var = (chunk >> 1) as usize;
        if var >= n {
            return Err(bad("variable index out of range"));
        }
        literals.push(Literal { var, negated: chunk & 1 == 1 });
    }
    let clauses = literals.chunks(3).map(|c| [c[0], c[1], c[2]]).collect();
    Formula3CNF::new(n, clauses)
}

/// Smallest satisfying assignment in integer order, by exhaustive search.
pub fn min_sat_assignment(phi: &Formula3CNF) -> Result<Option<u64>> {
    if phi.n > BRUTE_FORCE_MAX_VARS {
        return Err(Error::Refused(format!(
            "exhaustive search over 2^{} assignments exceeds the cap n <= {BRUTE_FORCE_MAX_VARS}",
            phi.n
        )));
    }
    Ok((0..1u64 << phi.n).find(|&a| phi.is_satisfied_by(a)))
}

/// Uniformly random formula with `clauses` clauses.
pub fn random_formula<R: Rng + ?Sized>(n: usize, clauses: usize, rng: &mut R) -> Result<Formula3CNF> {
    let clauses = (0..clauses)
        .map(|_| std::array::from_fn(|_| Literal { var: rng.random_range(0..n), negated: rng.random() }))
        .collect();
    Formula3CNF::new(n, clauses)
}

/// Parses DIMACS CNF with exactly three literals per clause.
///
/// `n` overrides the variable count from the `p cnf` line when given.
pub fn parse_dimacs(text: &str, n: Option<usize>) -> Result<Formula3CNF> {
    let mut declared: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<i64> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('p') {
            let parts: Vec<&str> = rest.split_whitespace().collect();
            if parts.len() != 3 || parts[0] != "cnf" {
                return Err(Error::Parse(format!("line {}: malformed problem line", lineno + 1)));
            }
            let vars = parts[1].parse().map_err(|_| Error::Parse(format!("line {}: bad variable count", lineno + 1)))?;
            let count = parts[2].parse().map_err(|_| Error::Parse(format!("line {}: bad clause count", lineno + 1)))?;
            declared = Some((vars, count));
            continue;
        }
        for tok in line.split_whitespace() {
            let lit: i64 =
                tok.parse().map_err(|_| Error::Parse(format!("line {}: bad literal {tok:?}", lineno + 1)))?;
            if lit != 0 {
                current.push(lit);
                continue;
            }
            if current.len() != 3 {
                return Err(Error::Parse(format!(
                    "line {}: clause has {} literals, expected 3",
                    lineno + 1,
                    current.len()
                )));
            }
            clauses.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        return Err(Error::Parse("last clause is not terminated by 0".into()));
    }
    let (vars, count) = declared.ok_or_else(|| Error::Parse("missing 'p cnf' line".into()))?;
    if count != clauses.len() {
        return Err(Error::Parse(format!("header declares {count} clauses, found {}", clauses.len())));
    }
    let n = n.unwrap_or(vars);
    let clauses = clauses
        .into_iter()
        .map(|c| {
            let mut out = [Literal::pos(0); 3];
            for (slot, lit) in out.iter_mut().zip(c) {
                let var = lit.unsigned_abs() as usize - 1;
                if var >= n {
                    return Err(Error::Parse(format!("literal {lit} exceeds n = {n}")));
                }
                *slot = Literal { var, negated: lit < 0 };
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Formula3CNF::new(n, clauses)
}
