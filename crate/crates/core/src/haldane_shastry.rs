//! The Haldane-Shastry chain: `L` spins on a ring with inverse-square
//! Heisenberg exchange
//!
//! ```text
//! H = Σ_{i<j} J(i - j) (X_i X_j + Y_i Y_j + Z_i Z_j),
//! J(d) = 1 / (4 (L/π · sin(π d / L))²).
//! ```
//!
//! Its ground state is known in closed form and lives on half filling:
//!
//! ```text
//! ⟨x|ψ⟩ ∝ (-1)^{Σ_k k x_k} Π_{i<j} sin(π (i - j) / L)^{2 x_i x_j}   (k, i, j from 0)
//! ```
//!
//! Amplitudes are kept as sign and log-magnitude because the product of up to
//! `C(L/2, 2)` sine factors underflows long before `L = 56`.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::amplitude::{AmplitudeOracle, SignedLogAmplitude, TableOracle};
use crate::bits::{fixed_weight_states, BitConfiguration};
use crate::error::{Error, Result};
use crate::hamiltonian::{Pauli, PauliTerm, Sector, SparseHamiltonian, DEFAULT_STATE_CAP};

/// Largest ring for which whole-sector tables are built.
pub const MAX_ENUMERATED_SITES: usize = 24;

#[derive(Debug, Clone)]
pub struct HaldaneShastry {
    sites: usize,
    /// `ln|sin(π d / L)|` for `d = 0..L`; entry 0 is `-inf`.
    log_sin: Vec<f64>,
    /// `J(d)` for `d = 0..L`; entry 0 is unused.
    coupling: Vec<f64>,
}

impl HaldaneShastry {
    pub fn new(sites: usize) -> Result<Self> {
        if sites < 2 || !sites.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "ring length must be even and at least 2, got {sites}"
            )));
        }
        let l = sites as f64;
        let pi = std::f64::consts::PI;
        let log_sin = (0..sites).map(|d| (pi * d as f64 / l).sin().abs().ln()).collect();
        let coupling = (0..sites)
            .map(|d| {
                let chord = l / pi * (pi * d as f64 / l).sin();
                1.0 / (4.0 * chord * chord)
            })
            .collect();
        Ok(Self {
            sites,
            log_sin,
            coupling,
        })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    /// `J` for sites `i` and `j`; symmetric and a function of `|i - j|` only.
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.coupling[i.abs_diff(j)]
    }

    pub fn hamiltonian(&self) -> SparseHamiltonian {
        let mut terms = Vec::with_capacity(3 * self.sites * (self.sites - 1) / 2);
        for i in 0..self.sites {
            for j in i + 1..self.sites {
                let c = self.coupling(i, j);
                for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                    terms.push(PauliTerm::new(c, vec![(i, p), (j, p)]));
                }
            }
        }
        SparseHamiltonian::new(self.sites, terms).expect("sites are in range and distinct")
    }

    /// Half filling, the support of the ground state.
    pub fn sector(&self) -> Sector {
        Sector::Weight(self.sites / 2)
    }

    pub fn in_support(&self, x: &BitConfiguration) -> bool {
        x.count_ones() == self.sites / 2
    }

    /// Uniform draw over half filling.
    pub fn random_support_state(&self, rng: &mut impl rand::Rng) -> BitConfiguration {
        let ones = rand::seq::index::sample(rng, self.sites, self.sites / 2);
        BitConfiguration::from_ones(self.sites, ones)
    }

    fn log_magnitude(&self, x: &BitConfiguration) -> f64 {
        let occupied: Vec<usize> = x.ones().collect();
        let mut sum = 0.0;
        for (a, &i) in occupied.iter().enumerate() {
            for &j in &occupied[a + 1..] {
                sum += 2.0 * self.log_sin[j - i];
            }
        }
        sum
    }

    /// `⟨y|ψ⟩/⟨x|ψ⟩` from two full evaluations.
    pub fn ratio_from_scratch(&self, x: &BitConfiguration, y: &BitConfiguration) -> Result<f64> {
        let ax = self.log_amplitude(x);
        if ax.is_zero() {
            return Err(Error::ZeroAmplitude(x.clone()));
        }
        Ok(self.log_amplitude(y).ratio_over(&ax))
    }

    /// Ratio for `y` obtained from `x` by moving the particle at `from` to the
    /// empty site `to`, in `O(L)`.
    fn swap_ratio(&self, x: &BitConfiguration, from: usize, to: usize) -> f64 {
        let mut delta = 0.0;
        for k in x.ones() {
            if k != from {
                delta += self.log_sin[k.abs_diff(to)] - self.log_sin[k.abs_diff(from)];
            }
        }
        let sign = if from.abs_diff(to).is_multiple_of(2) { 1.0 } else { -1.0 };
        sign * (2.0 * delta).exp()
    }

    /// Normalized `π` over the half-filling sector, in increasing integer order.
    pub fn stationary_distribution(&self) -> Result<(Vec<BitConfiguration>, Vec<f64>)> {
        if self.sites > MAX_ENUMERATED_SITES {
            return Err(Error::SectorCapExceeded { cap: DEFAULT_STATE_CAP });
        }
        let states = fixed_weight_states(self.sites, self.sites / 2, usize::MAX)
            .ok_or(Error::SectorCapExceeded { cap: usize::MAX })?;
        let logs: Vec<f64> = states.iter().map(|x| 2.0 * self.log_magnitude(x)).collect();
        let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
        let z: f64 = weights.iter().sum();
        Ok((states, weights.into_iter().map(|w| w / z).collect()))
    }

    /// Normalized ground-state amplitudes over the half-filling sector.
    pub fn normalized_amplitudes(&self) -> Result<(Vec<BitConfiguration>, Vec<f64>)> {
        let (states, probs) = self.stationary_distribution()?;
        let amps = states
            .iter()
            .zip(&probs)
            .map(|(x, p)| f64::from(self.log_amplitude(x).sign) * p.sqrt())
            .collect();
        Ok((states, amps))
    }

    /// `⟨ψ|Z_i Z_j|ψ⟩` by summing over the whole half-filling sector
    /// (sites from 0).
    pub fn brute_zz(&self, i: usize, j: usize) -> Result<f64> {
        if i >= self.sites || j >= self.sites {
            return Err(Error::InvalidArgument(format!(
                "site out of range for L = {}",
                self.sites
            )));
        }
        let (states, probs) = self.stationary_distribution()?;
        Ok(states
            .iter()
            .zip(&probs)
            .map(|(x, p)| if x.get(i) == x.get(j) { *p } else { -*p })
            .sum())
    }

    /// Perturbs the normalized ground state over all `2^L` basis states by
    /// i.i.d. `N(0, κ/2^L)` noise (standard deviation), renormalizes, and
    /// returns a table oracle for the result.
    pub fn corrupt(&self, kappa: f64, seed: u64) -> Result<CorruptedOracle> {
        if kappa.is_nan() || kappa <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "noise strength must be positive, got {kappa}"
            )));
        }
        if self.sites > MAX_ENUMERATED_SITES {
            return Err(Error::SectorCapExceeded {
                cap: 1 << MAX_ENUMERATED_SITES,
            });
        }
        let dim = 1usize << self.sites;
        let (states, amps) = self.normalized_amplitudes()?;
        let mut clean = vec![0.0; dim];
        for (x, a) in states.iter().zip(&amps) {
            clean[x.as_u64() as usize] = *a;
        }
        let noise = Normal::new(0.0, kappa / dim as f64).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut noisy: Vec<f64> = clean
            .iter()
            .map(|&a| loop {
                let v = a + noise.sample(&mut rng);
                // a perturbed amplitude of exactly zero has probability zero;
                // redraw so the support stays total
                if v != 0.0 {
                    break v;
                }
            })
            .collect();
        let norm = noisy.iter().map(|v| v * v).sum::<f64>().sqrt();
        noisy.iter_mut().for_each(|v| *v /= norm);
        let l1_distance = clean.iter().zip(&noisy).map(|(a, b)| (a * a - b * b).abs()).sum();
        Ok(CorruptedOracle {
            table: TableOracle::new(self.sites, noisy)?,
            l1_distance,
        })
    }
}

impl AmplitudeOracle for HaldaneShastry {
    fn n_qubits(&self) -> usize {
        self.sites
    }

    fn log_amplitude(&self, x: &BitConfiguration) -> SignedLogAmplitude {
        if !self.in_support(x) {
            return SignedLogAmplitude::ZERO;
        }
        let parity = x.ones().sum::<usize>() % 2;
        SignedLogAmplitude::new(if parity == 0 { 1 } else { -1 }, self.log_magnitude(x))
    }

    fn ratio(&self, x: &BitConfiguration, y: &BitConfiguration) -> Result<f64> {
        if !self.in_support(x) {
            return Err(Error::ZeroAmplitude(x.clone()));
        }
        if !self.in_support(y) {
            return Ok(0.0);
        }
        let diff = x.xor(y);
        if diff.count_ones() == 2 {
            let mut sites = diff.ones();
            let (a, b) = (sites.next().unwrap(), sites.next().unwrap());
            let (from, to) = if x.get(a) { (a, b) } else { (b, a) };
            return Ok(self.swap_ratio(x, from, to));
        }
        if diff.is_zero() {
            return Ok(1.0);
        }
        self.ratio_from_scratch(x, y)
    }
}

/// A perturbed ground state and its 1-norm distance `Σ|π - π̃|` (twice the
/// total variation distance) from the true one.
#[derive(Debug, Clone)]
pub struct CorruptedOracle {
    pub table: TableOracle,
    pub l1_distance: f64,
}

impl AmplitudeOracle for CorruptedOracle {
    fn n_qubits(&self) -> usize {
        self.table.n_qubits()
    }

    fn log_amplitude(&self, x: &BitConfiguration) -> SignedLogAmplitude {
        self.table.log_amplitude(x)
    }

    fn ratio(&self, x: &BitConfiguration, y: &BitConfiguration) -> Result<f64> {
        self.table.ratio(x, y)
    }
}

/// Closed-form `⟨Z_i Z_j⟩` at separation `d = j - i`:
///
/// ```text
/// (Σ_{k=1}^{L/2} sin((2k-1) π (i-j) / L) / (2k-1)) · (-1)^{i-j} / (2L sin(π (i-j) / L))
/// ```
///
/// Evaluated literally. Against the sector sum of [`HaldaneShastry::brute_zz`]
/// this comes out smaller by exactly a factor of 4 for every `L` and `d`
/// checked, i.e. it is the correlator of `S^z = Z/2`.
pub fn exact_zz(sites: usize, d: usize) -> f64 {
    let l = sites as f64;
    let pi = std::f64::consts::PI;
    let delta = -(d as f64);
    let series: f64 = (1..=sites / 2)
        .map(|k| {
            let m = (2 * k - 1) as f64;
            (m * pi * delta / l).sin() / m
        })
        .sum();
    let sign = if d.is_multiple_of(2) { 1.0 } else { -1.0 };
    series * sign / (2.0 * l * (pi * delta / l).sin())
}

/// `L⁻¹ Σ_i (-1)^{x_i + x_{(i+d) mod L}}`, the diagonal value of the
/// ring-averaged `Z_i Z_{i+d}` at `x`.
pub fn averaged_zz(x: &BitConfiguration, d: usize) -> f64 {
    let l = x.n_qubits();
    let aligned = (0..l).filter(|&i| x.get(i) == x.get((i + d) % l)).count();
    (2.0 * aligned as f64 - l as f64) / l as f64
}
