//! Deterministic per-stream seed derivation.
//!
//! Every random stream in an experiment is identified by the tuple
//! `(master_seed, realization, restart, role)`. The derivation is a fixed
//! chain of 64-bit finalizer rounds, pinned forever: published results can be
//! regenerated from a master seed alone.

use serde::{Deserialize, Serialize};

/// What a derived stream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StreamRole {
    /// Coupling-matrix generation; one stream per realization (restart 0).
    Disorder,
    /// Initial configuration plus dynamics draws; one stream per restart.
    Trajectory,
}

impl StreamRole {
    fn tag(self) -> u64 {
        match self {
            StreamRole::Disorder => 0x4449_534f_5244_4552,
            StreamRole::Trajectory => 0x5452_414a_4543_544f,
        }
    }
}

/// 64-bit avalanche finalizer (the SplitMix64 output function).
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the stream seed for one `(realization, restart, role)` tuple.
///
/// Each component is absorbed through its own finalizer round, so tuples
/// that differ in any position — including swapped indices — land on
/// unrelated seeds.
pub fn derive_seed(master_seed: u64, realization: u64, restart: u64, role: StreamRole) -> u64 {
    let mut x = mix64(master_seed ^ 0x9E37_79B9_7F4A_7C15);
    x = mix64(x ^ role.tag());
    x = mix64(x ^ realization);
    x = mix64(x ^ restart);
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivation_is_deterministic() {
        for role in [StreamRole::Disorder, StreamRole::Trajectory] {
            assert_eq!(
                derive_seed(42, 7, 3, role),
                derive_seed(42, 7, 3, role)
            );
        }
    }

    #[test]
    fn roles_define_disjoint_streams() {
        for r in 0..100 {
            assert_ne!(
                derive_seed(1, r, 0, StreamRole::Disorder),
                derive_seed(1, r, 0, StreamRole::Trajectory)
            );
        }
    }

    #[test]
    fn swapped_indices_differ() {
        for i in 0..50u64 {
            for j in 0..50u64 {
                if i != j {
                    assert_ne!(
                        derive_seed(9, i, j, StreamRole::Trajectory),
                        derive_seed(9, j, i, StreamRole::Trajectory)
                    );
                }
            }
        }
    }

    #[test]
    fn a_million_tuples_do_not_collide() {
        let mut seeds = Vec::with_capacity(1_000_000);
        for realization in 0..1000u64 {
            for restart in 0..500u64 {
                seeds.push(derive_seed(123, realization, restart, StreamRole::Disorder));
                seeds.push(derive_seed(123, realization, restart, StreamRole::Trajectory));
            }
        }
        seeds.sort_unstable();
        let before = seeds.len();
        seeds.dedup();
        assert_eq!(seeds.len(), before);
    }

    #[test]
    fn known_values_stay_frozen() {
        // Pinned outputs; a change here breaks reproducibility of every
        // published master seed.
        assert_eq!(
            derive_seed(0, 0, 0, StreamRole::Disorder),
            0x7D2F_F802_0774_F7B5
        );
        assert_eq!(
            derive_seed(0, 0, 0, StreamRole::Trajectory),
            0x6E9B_B37F_10CD_4510
        );
        assert_eq!(
            derive_seed(0xDEAD_BEEF, 12, 34, StreamRole::Trajectory),
            0x0492_0D5B_98E3_61D7
        );
    }
}
