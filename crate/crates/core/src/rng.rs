//! Per-trial random streams derived from a master seed.
//!
//! Trial `i` always draws from `ChaCha8(trial_seed(master, i))`, so results do
//! not depend on execution order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn trial_seed(master: u64, trial: u64) -> u64 {
    splitmix64(splitmix64(master) ^ trial.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

pub fn trial_rng(master: u64, trial: u64) -> TrialRng {
    TrialRng::seed_from_u64(trial_seed(master, trial))
}

pub fn seeded(seed: u64) -> TrialRng {
    TrialRng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = trial_rng(7, 3).random();
        let b: u64 = trial_rng(7, 3).random();
        let c: u64 = trial_rng(7, 4).random();
        let d: u64 = trial_rng(8, 3).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn seeds_do_not_collide_on_small_grid() {
        let mut seen = std::collections::HashSet::new();
        for m in 0..32 {
            for t in 0..256 {
                assert!(seen.insert(trial_seed(m, t)));
            }
        }
    }
}
