//! Exact ground truth for small systems.
//!
//! Everything here is brute force on purpose: a Gray-code walk visits each
//! configuration of a half-space (the first spin is pinned up, since the
//! Hamiltonian is invariant under a global flip) and reuses the `O(N)`
//! incremental flip update, so a full sweep of `2^(N-1)` states costs
//! `O(N * 2^N)` instead of `O(N^2 * 2^N)`.

use crate::dynamics::{Termination, Trajectory};
use crate::error::{Error, Result};
use crate::model::{hamiltonian, CouplingMatrix, EnergyState, SpinConfiguration};

/// Largest system `exact_ground_state` will enumerate.
pub const GROUND_STATE_LIMIT: usize = 24;

/// Largest system `enumerate_local_minima` will enumerate.
pub const CENSUS_LIMIT: usize = 20;

/// Replay tolerance for energies and flip costs.
pub const REPLAY_TOLERANCE: f64 = 1e-9;

fn pack(config: &SpinConfiguration) -> u32 {
    let mut mask = 0u32;
    for (i, &s) in config.spins().iter().enumerate() {
        if s < 0 {
            mask |= 1 << i;
        }
    }
    mask
}

fn unpack(n: usize, mask: u32) -> SpinConfiguration {
    let spins = (0..n)
        .map(|i| if mask & (1 << i) != 0 { -1 } else { 1 })
        .collect();
    SpinConfiguration::from_spins(spins).expect("mask always yields valid spins")
}

/// Visits every configuration with the first spin up, in Gray-code order.
/// The callback receives the packed mask and the live energy state.
fn walk_half_space(j: &CouplingMatrix, mut visit: impl FnMut(u32, &EnergyState)) {
    let n = j.n();
    let mut state =
        EnergyState::new(j, SpinConfiguration::all_up(n).expect("n >= 1")).expect("sizes match");
    let mut mask = 0u32;
    visit(mask, &state);
    let total = 1u64 << (n - 1);
    for idx in 1..total {
        // Consecutive Gray codes differ in the bit at trailing_zeros(idx);
        // shifted by one because site 0 stays pinned.
        let site = idx.trailing_zeros() as usize + 1;
        state.apply_flip(j, site);
        mask ^= 1 << site;
        visit(mask, &state);
    }
}

/// Exhaustive ground-state search; returns a minimizer (with the first spin
/// up) and its energy.
pub fn exact_ground_state(j: &CouplingMatrix) -> Result<(SpinConfiguration, f64)> {
    let n = j.n();
    if n > GROUND_STATE_LIMIT {
        return Err(Error::SizeLimit {
            n,
            limit: GROUND_STATE_LIMIT,
        });
    }
    let mut best_energy = f64::INFINITY;
    let mut best_mask = 0u32;
    walk_half_space(j, |mask, state| {
        if state.energy() < best_energy {
            best_energy = state.energy();
            best_mask = mask;
        }
    });
    Ok((unpack(n, best_mask), best_energy))
}

/// Every one-flip-stable configuration of a small instance.
///
/// Stored packed (one `u32` per configuration, bit set = spin down); the
/// accessors unpack on demand. Minima come in global-flip pairs, both stored.
#[derive(Debug, Clone)]
pub struct Census {
    n: usize,
    ground_energy: f64,
    ground_masks: Vec<u32>,
    minima: Vec<(u32, f64)>,
}

impl Census {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ground_energy(&self) -> f64 {
        self.ground_energy
    }

    /// Number of one-flip-stable configurations (always even).
    pub fn count(&self) -> usize {
        self.minima.len()
    }

    pub fn ground_configs(&self) -> Vec<SpinConfiguration> {
        self.ground_masks.iter().map(|&m| unpack(self.n, m)).collect()
    }

    pub fn minima(&self) -> impl Iterator<Item = (SpinConfiguration, f64)> + '_ {
        self.minima.iter().map(|&(m, e)| (unpack(self.n, m), e))
    }

    pub fn contains(&self, config: &SpinConfiguration) -> bool {
        if config.len() != self.n {
            return false;
        }
        let mask = pack(config);
        self.minima.iter().any(|&(m, _)| m == mask)
    }
}

/// Enumerates the full local-minima census of a small instance.
pub fn enumerate_local_minima(j: &CouplingMatrix) -> Result<Census> {
    let n = j.n();
    if n > CENSUS_LIMIT {
        return Err(Error::SizeLimit {
            n,
            limit: CENSUS_LIMIT,
        });
    }
    let full_mask = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut minima: Vec<(u32, f64)> = Vec::new();
    walk_half_space(j, |mask, state| {
        if state.is_one_flip_stable() {
            let e = state.energy();
            minima.push((mask, e));
            minima.push((mask ^ full_mask, e));
        }
    });
    let ground_energy = minima
        .iter()
        .map(|&(_, e)| e)
        .fold(f64::INFINITY, f64::min);
    let ground_masks = minima
        .iter()
        .filter(|&&(_, e)| e == ground_energy)
        .map(|&(m, _)| m)
        .collect();
    Ok(Census {
        n,
        ground_energy,
        ground_masks,
        minima,
    })
}

/// Outcome of replaying a fully recorded trajectory from scratch.
#[derive(Debug, Clone)]
pub struct ReplayReport {
    pub valid: bool,
    /// Index of the first step whose recomputed cost or energy diverged.
    pub first_divergence: Option<usize>,
    pub detail: Option<String>,
}

impl ReplayReport {
    fn ok() -> Self {
        ReplayReport {
            valid: true,
            first_divergence: None,
            detail: None,
        }
    }

    fn diverged(step: usize, detail: String) -> Self {
        ReplayReport {
            valid: false,
            first_divergence: Some(step),
            detail: Some(detail),
        }
    }

    fn invalid(detail: String) -> Self {
        ReplayReport {
            valid: false,
            first_divergence: None,
            detail: Some(detail),
        }
    }
}

/// Replays a trajectory's flip list with from-scratch evaluation at every
/// step, checking each recorded cost and energy to `1e-9` and the stop rule
/// at termination.
pub fn replay_validate(
    j: &CouplingMatrix,
    tr: &Trajectory,
    sigma0: &SpinConfiguration,
) -> Result<ReplayReport> {
    let n = j.n();
    if sigma0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: sigma0.len(),
        });
    }
    if tr.steps.len() as u64 != tr.flips {
        return Err(Error::InvalidArgument(
            "replay requires a trajectory recorded with record_mode = full".into(),
        ));
    }

    let mut config = sigma0.clone();
    for (q, step) in tr.steps.iter().enumerate() {
        if step.t != q as u64 {
            return Ok(ReplayReport::diverged(
                q,
                format!("step counter {} does not match position {q}", step.t),
            ));
        }
        if step.site >= n {
            return Ok(ReplayReport::diverged(
                q,
                format!("site {} out of range", step.site),
            ));
        }
        let row = j.row(step.site);
        let field: f64 = row
            .iter()
            .zip(config.spins())
            .map(|(&jij, &s)| jij * s as f64)
            .sum();
        let delta = config.get(step.site) as f64 * field;
        if (delta - step.delta).abs() > REPLAY_TOLERANCE {
            return Ok(ReplayReport::diverged(
                q,
                format!("flip cost {delta} differs from recorded {}", step.delta),
            ));
        }
        config.flip(step.site);
        let energy = hamiltonian(j, &config)?;
        if (energy - step.energy).abs() > REPLAY_TOLERANCE {
            return Ok(ReplayReport::diverged(
                q,
                format!("energy {energy} differs from recorded {}", step.energy),
            ));
        }
    }

    let final_energy = hamiltonian(j, &config)?;
    if (final_energy - tr.final_energy).abs() > REPLAY_TOLERANCE {
        return Ok(ReplayReport::invalid(format!(
            "final energy {final_energy} differs from recorded {}",
            tr.final_energy
        )));
    }
    if config != tr.final_config {
        return Ok(ReplayReport::invalid(
            "replayed configuration differs from the recorded final configuration".into(),
        ));
    }
    if matches!(tr.termination, Termination::StableStop | Termination::TailStop) {
        let state = EnergyState::new(j, config)?;
        for i in 0..n {
            if state.delta(i) < -REPLAY_TOLERANCE {
                return Ok(ReplayReport::invalid(format!(
                    "stop rule violated: site {i} still has flip cost {}",
                    state.delta(i)
                )));
            }
        }
    }
    Ok(ReplayReport::ok())
}
