use crate::classes::{tree_action, tree_level_position};
use crate::error::{Error, Result};
use crate::model::{Decision, History, Learner};
use crate::rational::{self, Rational};

/// Walks down the tree class: a 0 at an internal node means the path goes
/// through it, `1 - Delta` means it goes through its sibling.
#[derive(Debug, Clone)]
pub struct TreeDescent {
    d: u32,
    high: Rational,
}

impl TreeDescent {
    pub fn new(d: u32, delta: f64) -> Result<Self> {
        if d < 1 {
            return Err(Error::domain("tree depth must be >= 1"));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::domain(format!("Delta must lie in (0,1), got {delta}")));
        }
        Ok(TreeDescent { d, high: rational::one() - rational::from_f64(delta)? })
    }
}

fn sibling(pos: usize) -> usize {
    if pos % 2 == 1 {
        pos + 1
    } else {
        pos - 1
    }
}

impl Learner for TreeDescent {
    fn decide(&mut self, history: &History) -> Result<Decision> {
        let leaf_level = self.d + 1;
        let (mut level, mut pos) = (2u32, 1usize);
        for (a, r) in history.iter() {
            if *a != tree_action(level, pos) {
                return Err(Error::protocol(format!("expected a query of {}, history shows {a}", tree_action(level, pos))));
            }
            let r = r.as_exact().ok_or_else(|| Error::protocol("tree descent needs exact observations"))?;
            let unexpected = || {
                let (l, i) = tree_level_position(*a);
                Error::protocol(format!("unexpected value {} at a_{{{l},{i}}}", rational::format(r)))
            };
            if level == leaf_level {
                return if *r == rational::one() {
                    Ok(Decision::Stop(tree_action(level, pos)))
                } else if *r == rational::zero() {
                    Ok(Decision::Stop(tree_action(level, sibling(pos))))
                } else {
                    Err(unexpected())
                };
            }
            let through = if *r == rational::zero() {
                pos
            } else if *r == self.high {
                sibling(pos)
            } else {
                return Err(unexpected());
            };
            level += 1;
            pos = 2 * through - 1;
        }
        Ok(Decision::Query(tree_action(level, pos)))
    }
}
