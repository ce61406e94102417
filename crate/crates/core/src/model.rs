//! Sherrington-Kirkpatrick model: couplings, spin configurations, and the
//! incrementally maintained energy state.
//!
//! The Hamiltonian is
//!
//! ```text
//! H(J, s) = -(1/sqrt(N)) * sum_{i<j} J_ij s_i s_j
//! ```
//!
//! with symmetric Gaussian couplings `J_ij ~ N(0,1)` and zero diagonal. The
//! quantity driving the dynamics is the unnormalized flip cost
//!
//! ```text
//! dE_i = s_i * h_i,    h_i = sum_{j != i} J_ij s_j
//! ```
//!
//! so that flipping spin `i` changes the Hamiltonian by exactly
//! `(2/sqrt(N)) * dE_i`.

use crate::error::{Error, Result};
use crate::rng::Stream;

/// Symmetric coupling matrix with zero diagonal, stored dense row-major.
///
/// The fill order (row-major over the upper triangle, one standard normal per
/// pair) is pinned: a seed identifies one disorder sample forever.
#[derive(Debug, Clone)]
pub struct CouplingMatrix {
    n: usize,
    seed: u64,
    values: Vec<f64>,
}

impl CouplingMatrix {
    /// Draws an `n x n` symmetric Gaussian coupling matrix from `seed`.
    pub fn generate(n: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize);
        }
        let mut values = vec![0.0; n * n];
        let mut stream = Stream::from_seed(seed);
        for i in 0..n {
            for j in (i + 1)..n {
                let x = stream.standard_normal();
                values[i * n + j] = x;
                values[j * n + i] = x;
            }
        }
        Ok(CouplingMatrix { n, seed, values })
    }

    /// Builds a matrix from explicit upper-triangle entries, row-major:
    /// `(0,1), (0,2), ..., (0,n-1), (1,2), ...`. The seed is recorded as 0;
    /// it is provenance for generated matrices only.
    pub fn from_upper_triangle(n: usize, entries: &[f64]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize);
        }
        let expected = n * (n - 1) / 2;
        if entries.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: entries.len(),
            });
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(
                "coupling entries must be finite".into(),
            ));
        }
        let mut values = vec![0.0; n * n];
        let mut it = entries.iter();
        for i in 0..n {
            for j in (i + 1)..n {
                let x = *it.next().expect("length checked above");
                values[i * n + j] = x;
                values[j * n + i] = x;
            }
        }
        Ok(CouplingMatrix { n, seed: 0, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    /// Row `i` as a contiguous slice (entry `i` is the zero diagonal).
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }
}

/// A spin configuration with entries restricted to `+1` / `-1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinConfiguration {
    spins: Vec<i8>,
}

impl SpinConfiguration {
    /// Wraps a spin vector, rejecting anything that is not `+1` or `-1`.
    pub fn from_spins(spins: Vec<i8>) -> Result<Self> {
        if spins.is_empty() {
            return Err(Error::InvalidSize);
        }
        if spins.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidArgument(
                "spin values must be +1 or -1".into(),
            ));
        }
        Ok(SpinConfiguration { spins })
    }

    /// All spins up; the natural enumeration origin.
    pub fn all_up(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize);
        }
        Ok(SpinConfiguration { spins: vec![1; n] })
    }

    /// Uniform random configuration, one fair spin per site in index order.
    pub fn random(n: usize, stream: &mut Stream) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize);
        }
        Ok(SpinConfiguration {
            spins: (0..n).map(|_| stream.spin()).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    pub fn get(&self, i: usize) -> i8 {
        self.spins[i]
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    /// Flips site `i` in place.
    pub fn flip(&mut self, i: usize) {
        self.spins[i] = -self.spins[i];
    }

    /// The configuration with every spin negated.
    pub fn negated(&self) -> Self {
        SpinConfiguration {
            spins: self.spins.iter().map(|&s| -s).collect(),
        }
    }
}

/// Full Hamiltonian evaluated from scratch in `O(N^2)`.
pub fn hamiltonian(j: &CouplingMatrix, config: &SpinConfiguration) -> Result<f64> {
    let n = j.n();
    if config.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: config.len(),
        });
    }
    let spins = config.spins();
    let mut sum = 0.0;
    for i in 0..n {
        let row = j.row(i);
        let si = spins[i] as f64;
        for k in (i + 1)..n {
            sum += row[k] * si * spins[k] as f64;
        }
    }
    Ok(-sum / (n as f64).sqrt())
}

/// A spin configuration together with cached local fields and energy.
///
/// All mutators take the coupling matrix as a parameter; a state must only
/// ever be used with the matrix it was constructed from. Maintenance is
/// incremental: a flip costs `O(N)` instead of the `O(N^2)` recomputation.
#[derive(Debug, Clone)]
pub struct EnergyState {
    config: SpinConfiguration,
    fields: Vec<f64>,
    energy: f64,
    flips: u64,
}

impl EnergyState {
    pub fn new(j: &CouplingMatrix, config: SpinConfiguration) -> Result<Self> {
        let n = j.n();
        if config.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: config.len(),
            });
        }
        let spins = config.spins();
        let fields = (0..n)
            .map(|i| {
                let row = j.row(i);
                row.iter()
                    .zip(spins)
                    .map(|(&jij, &s)| jij * s as f64)
                    .sum()
            })
            .collect();
        let energy = hamiltonian(j, &config)?;
        Ok(EnergyState {
            config,
            fields,
            energy,
            flips: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.config.len()
    }

    pub fn config(&self) -> &SpinConfiguration {
        &self.config
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// Number of flips applied since construction.
    pub fn flips(&self) -> u64 {
        self.flips
    }

    /// Unnormalized flip cost `dE_i = s_i * h_i`.
    pub fn delta(&self, i: usize) -> f64 {
        self.config.get(i) as f64 * self.fields[i]
    }

    /// The exact Hamiltonian change a flip of site `i` would cause.
    pub fn exact_delta_h(&self, i: usize) -> f64 {
        2.0 / (self.n() as f64).sqrt() * self.delta(i)
    }

    /// The full flip-cost spectrum as a fresh vector.
    pub fn delta_spectrum(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.delta(i)).collect()
    }

    /// Minimum spectrum entry and its site; ties go to the lowest index.
    pub fn min_delta(&self) -> (usize, f64) {
        let mut best = (0, self.delta(0));
        for i in 1..self.n() {
            let d = self.delta(i);
            if d < best.1 {
                best = (i, d);
            }
        }
        best
    }

    /// One-flip stability: no strictly negative spectrum entry.
    ///
    /// Zero entries count as stable; a flip through one would leave the
    /// energy unchanged.
    pub fn is_one_flip_stable(&self) -> bool {
        (0..self.n()).all(|i| self.delta(i) >= 0.0)
    }

    /// Flips site `i`, updating energy and all fields in `O(N)`.
    ///
    /// The field at the flipped site itself is untouched: it sums over the
    /// other spins only, none of which changed.
    pub fn apply_flip(&mut self, j: &CouplingMatrix, i: usize) {
        let n = self.n();
        assert_eq!(j.n(), n, "coupling matrix does not match this state");
        assert!(i < n, "site index out of range");
        self.energy += self.exact_delta_h(i);
        self.config.flip(i);
        let si_new = self.config.get(i) as f64;
        let row = j.row(i);
        for (k, field) in self.fields.iter_mut().enumerate() {
            if k != i {
                *field += 2.0 * row[k] * si_new;
            }
        }
        self.flips += 1;
    }

    pub fn into_config(self) -> SpinConfiguration {
        self.config
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_spin_system_is_trivially_stable() {
        let j = CouplingMatrix::generate(1, 0).unwrap();
        let state = EnergyState::new(&j, SpinConfiguration::all_up(1).unwrap()).unwrap();
        assert_eq!(state.energy(), 0.0);
        assert_eq!(state.delta(0), 0.0);
        assert_eq!(state.min_delta(), (0, 0.0));
        assert!(state.is_one_flip_stable());
    }

    #[test]
    fn zero_size_is_rejected() {
        assert!(CouplingMatrix::generate(0, 0).is_err());
        assert!(SpinConfiguration::from_spins(vec![]).is_err());
    }

    #[test]
    fn bad_spin_values_are_rejected() {
        assert!(SpinConfiguration::from_spins(vec![1, 0, -1]).is_err());
        assert!(SpinConfiguration::from_spins(vec![2]).is_err());
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let j = CouplingMatrix::generate(4, 1).unwrap();
        let config = SpinConfiguration::all_up(3).unwrap();
        assert!(hamiltonian(&j, &config).is_err());
        assert!(EnergyState::new(&j, config).is_err());
    }

    #[test]
    fn two_spin_energy_and_spectrum() {
        let j = CouplingMatrix::generate(2, 5).unwrap();
        let j01 = j.get(0, 1);
        assert_eq!(j01, j.get(1, 0));
        let sqrt2 = 2.0_f64.sqrt();
        for (a, b) in [(1i8, 1i8), (1, -1), (-1, 1), (-1, -1)] {
            let config = SpinConfiguration::from_spins(vec![a, b]).unwrap();
            let state = EnergyState::new(&j, config).unwrap();
            let prod = j01 * a as f64 * b as f64;
            assert!((state.energy() - (-prod / sqrt2)).abs() < 1e-15);
            // Both sites see the same flip cost: dE_0 = dE_1 = J_01 s_0 s_1.
            assert!((state.delta(0) - prod).abs() < 1e-15);
            assert!((state.delta(1) - prod).abs() < 1e-15);
            assert_eq!(state.is_one_flip_stable(), prod >= 0.0);
        }
    }

    #[test]
    fn explicit_upper_triangle_construction() {
        let j = CouplingMatrix::from_upper_triangle(3, &[1.0, -2.0, 0.5]).unwrap();
        assert_eq!(j.get(0, 1), 1.0);
        assert_eq!(j.get(0, 2), -2.0);
        assert_eq!(j.get(1, 2), 0.5);
        assert_eq!(j.get(2, 1), 0.5);
        assert_eq!(j.get(1, 1), 0.0);
        assert!(CouplingMatrix::from_upper_triangle(3, &[1.0]).is_err());
        assert!(CouplingMatrix::from_upper_triangle(2, &[f64::NAN]).is_err());
    }

    #[test]
    fn min_delta_ties_go_to_lowest_index() {
        // In a two-spin system the spectrum is always degenerate.
        let j = CouplingMatrix::generate(2, 33).unwrap();
        let state = EnergyState::new(&j, SpinConfiguration::all_up(2).unwrap()).unwrap();
        assert_eq!(state.min_delta().0, 0);
    }

    #[test]
    fn couplings_are_symmetric_gaussian_with_zero_diagonal() {
        let n = 1000;
        let j = CouplingMatrix::generate(n, 2024).unwrap();
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        let mut count = 0usize;
        for i in 0..n {
            assert_eq!(j.get(i, i), 0.0);
            for k in (i + 1)..n {
                assert_eq!(j.get(i, k), j.get(k, i));
                sum += j.get(i, k);
                sum_sq += j.get(i, k) * j.get(i, k);
                count += 1;
            }
        }
        let mean = sum / count as f64;
        let var = sum_sq / count as f64 - mean * mean;
        assert!(mean.abs() < 0.01, "mean {mean} too far from 0");
        assert!((var - 1.0).abs() < 0.02, "variance {var} too far from 1");
    }

    #[test]
    fn same_seed_reproduces_couplings() {
        let a = CouplingMatrix::generate(24, 99).unwrap();
        let b = CouplingMatrix::generate(24, 99).unwrap();
        let c = CouplingMatrix::generate(24, 100).unwrap();
        assert_eq!(a.values, b.values);
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn hamiltonian_matches_direct_double_sum() {
        let n = 64;
        let j = CouplingMatrix::generate(n, 17).unwrap();
        let mut stream = Stream::from_seed(18);
        let config = SpinConfiguration::random(n, &mut stream).unwrap();
        // Independent evaluation over ordered pairs, halved.
        let mut sum = 0.0;
        for i in 0..n {
            for k in 0..n {
                if i != k {
                    sum += j.get(i, k) * config.get(i) as f64 * config.get(k) as f64;
                }
            }
        }
        let expected = -sum / (2.0 * (n as f64).sqrt());
        assert!((hamiltonian(&j, &config).unwrap() - expected).abs() < 1e-10);
    }

    #[test]
    fn spectrum_matches_flip_and_recompute() {
        let n = 48;
        let j = CouplingMatrix::generate(n, 21).unwrap();
        let mut stream = Stream::from_seed(22);
        let config = SpinConfiguration::random(n, &mut stream).unwrap();
        let state = EnergyState::new(&j, config.clone()).unwrap();
        let base = hamiltonian(&j, &config).unwrap();
        for i in 0..n {
            let mut flipped = config.clone();
            flipped.flip(i);
            let dh = hamiltonian(&j, &flipped).unwrap() - base;
            assert!(
                (state.exact_delta_h(i) - dh).abs() < 1e-9,
                "site {i}: incremental {} vs recomputed {}",
                state.exact_delta_h(i),
                dh
            );
        }
    }

    #[test]
    fn incremental_updates_track_recomputation() {
        let n = 96;
        let j = CouplingMatrix::generate(n, 31).unwrap();
        let mut stream = Stream::from_seed(32);
        let config = SpinConfiguration::random(n, &mut stream).unwrap();
        let mut state = EnergyState::new(&j, config).unwrap();
        for _ in 0..1000 {
            let i = (stream.uniform() * n as f64) as usize;
            state.apply_flip(&j, i);
        }
        assert_eq!(state.flips(), 1000);
        let fresh = EnergyState::new(&j, state.config().clone()).unwrap();
        assert!((state.energy() - fresh.energy()).abs() < 1e-10);
        for i in 0..n {
            assert!((state.fields()[i] - fresh.fields()[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn double_flip_restores_configuration() {
        let n = 32;
        let j = CouplingMatrix::generate(n, 41).unwrap();
        let mut stream = Stream::from_seed(42);
        let config = SpinConfiguration::random(n, &mut stream).unwrap();
        let mut state = EnergyState::new(&j, config.clone()).unwrap();
        let e0 = state.energy();
        state.apply_flip(&j, 7);
        state.apply_flip(&j, 7);
        assert_eq!(state.config(), &config);
        assert!((state.energy() - e0).abs() < 1e-12);
        assert_eq!(state.flips(), 2);
    }

    #[test]
    fn global_flip_preserves_energy_and_spectrum() {
        let n = 40;
        let j = CouplingMatrix::generate(n, 51).unwrap();
        let mut stream = Stream::from_seed(52);
        let config = SpinConfiguration::random(n, &mut stream).unwrap();
        let a = EnergyState::new(&j, config.clone()).unwrap();
        let b = EnergyState::new(&j, config.negated()).unwrap();
        assert!((a.energy() - b.energy()).abs() < 1e-12);
        for i in 0..n {
            assert!((a.delta(i) - b.delta(i)).abs() < 1e-12);
        }
    }
}
