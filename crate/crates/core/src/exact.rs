//! Dense linear algebra on small sectors, used as ground truth.
//!
//! A [`DenseSector`] fixes an ordered basis and the normalized ground-state
//! amplitudes on it; `H`, `F` and `G` are assembled column by column from the
//! same row access the sampler uses. Time evolution goes through the
//! symmetric matrix `M = D⁻¹ G D = λ₁ I - F` with `D = diag(ψ)`, so
//! `e^{Gt} = D e^{Mt} D⁻¹` needs one symmetric eigendecomposition.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::amplitude::AmplitudeOracle;
use crate::bits::BitConfiguration;
use crate::error::{Error, Result};
use crate::fixed_node::{fixed_node_row, generator_rates};
use crate::hamiltonian::RowAccess;

/// Default largest dimension handed to the dense eigensolver.
pub const DENSE_EIG_CAP: usize = 4096;

/// Smallest gap accepted as a unique ground state.
pub const DEGENERACY_TOLERANCE: f64 = 1e-10;

/// Entries of an evolved distribution below this are set to zero.
pub const PROBABILITY_FLOOR: f64 = 1e-14;

/// Ordered basis with aligned, unit-norm real amplitudes.
#[derive(Debug, Clone)]
pub struct DenseSector {
    basis: Vec<BitConfiguration>,
    index: HashMap<BitConfiguration, usize>,
    amplitudes: DVector<f64>,
}

impl DenseSector {
    /// Evaluates the oracle on every basis state and normalizes in the log
    /// domain.
    pub fn new<O: AmplitudeOracle + ?Sized>(basis: Vec<BitConfiguration>, oracle: &O) -> Result<Self> {
        let logs: Vec<_> = basis.iter().map(|x| oracle.log_amplitude(x)).collect();
        let top = logs
            .iter()
            .filter(|a| !a.is_zero())
            .map(|a| a.log_magnitude)
            .fold(f64::NEG_INFINITY, f64::max);
        if top == f64::NEG_INFINITY {
            return Err(Error::InvalidArgument(
                "ground state vanishes on the whole basis".into(),
            ));
        }
        let raw: Vec<f64> = logs
            .iter()
            .map(|a| {
                if a.is_zero() {
                    0.0
                } else {
                    f64::from(a.sign) * (a.log_magnitude - top).exp()
                }
            })
            .collect();
        Self::from_amplitudes(basis, raw)
    }

    /// Uses the given amplitudes, rescaled to unit norm.
    pub fn from_amplitudes(basis: Vec<BitConfiguration>, amplitudes: Vec<f64>) -> Result<Self> {
        if basis.len() != amplitudes.len() {
            return Err(Error::LengthMismatch(basis.len(), amplitudes.len()));
        }
        let mut amplitudes = DVector::from_vec(amplitudes);
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidArgument("amplitudes cannot be normalized".into()));
        }
        amplitudes /= norm;
        let index = basis.iter().enumerate().map(|(i, x)| (x.clone(), i)).collect();
        Ok(Self {
            basis,
            index,
            amplitudes,
        })
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn basis(&self) -> &[BitConfiguration] {
        &self.basis
    }

    pub fn index_of(&self, x: &BitConfiguration) -> Option<usize> {
        self.index.get(x).copied()
    }

    pub fn amplitudes(&self) -> &DVector<f64> {
        &self.amplitudes
    }

    /// `π = ψ²`.
    pub fn stationary(&self) -> DVector<f64> {
        self.amplitudes.map(|a| a * a)
    }

    /// Matrix with `⟨y|A|x⟩` at `(index(y), index(x))`. Entries whose target
    /// lies outside the basis are dropped, i.e. the operator is projected
    /// onto the sector.
    pub fn assemble(
        &self,
        mut column: impl FnMut(&BitConfiguration) -> Result<Vec<(BitConfiguration, f64)>>,
    ) -> Result<DMatrix<f64>> {
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        for (j, x) in self.basis.iter().enumerate() {
            for (y, v) in column(x)? {
                if let Some(&i) = self.index.get(&y) {
                    m[(i, j)] += v;
                }
            }
        }
        Ok(m)
    }

    pub fn hamiltonian<H: RowAccess + ?Sized>(&self, h: &H) -> Result<DMatrix<f64>> {
        self.assemble(|x| h.row(x))
    }

    pub fn fixed_node<H, O>(&self, h: &H, oracle: &O) -> Result<DMatrix<f64>>
    where
        H: RowAccess + ?Sized,
        O: AmplitudeOracle + ?Sized,
    {
        self.assemble(|x| fixed_node_row(h, oracle, x))
    }

    /// `G` from the generator rates: rates off the diagonal, minus the total
    /// rate on it.
    pub fn generator<H, O>(&self, h: &H, oracle: &O, lambda1: f64) -> Result<DMatrix<f64>>
    where
        H: RowAccess + ?Sized,
        O: AmplitudeOracle + ?Sized,
    {
        self.assemble(|x| {
            let rates = generator_rates(h, oracle, lambda1, x)?;
            let mut col = Vec::with_capacity(rates.outgoing.len() + 1);
            col.push((x.clone(), -rates.total_rate));
            col.extend(rates.outgoing);
            Ok(col)
        })
    }
}

/// `max |A - Aᵀ|`.
pub fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in i + 1..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Eigenvalues in ascending order with matching orthonormal columns.
#[derive(Debug, Clone)]
pub struct SymmetricSpectrum {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

/// Symmetric eigendecomposition. Inputs with `max |A - Aᵀ| > 1e-12` (scaled
/// by the largest entry when that exceeds 1) are rejected.
pub fn eig_sym(m: &DMatrix<f64>) -> Result<SymmetricSpectrum> {
    if !m.is_square() {
        return Err(Error::LengthMismatch(m.nrows(), m.ncols()));
    }
    if m.nrows() > DENSE_EIG_CAP {
        return Err(Error::SectorCapExceeded { cap: DENSE_EIG_CAP });
    }
    let scale = m.amax().max(1.0);
    let asym = max_asymmetry(m);
    if asym > 1e-12 * scale {
        return Err(Error::NonSymmetric(asym));
    }
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(order.len(), order.iter().map(|&k| eig.eigenvalues[k]));
    let vectors = DMatrix::from_columns(&order.iter().map(|&k| eig.eigenvectors.column(k)).collect::<Vec<_>>());
    Ok(SymmetricSpectrum { values, vectors })
}

/// Lowest eigenvalue and its eigenvector.
pub fn ground_state(m: &DMatrix<f64>) -> Result<(f64, DVector<f64>)> {
    let s = eig_sym(m)?;
    Ok((s.values[0], s.vectors.column(0).into_owned()))
}

/// Spectral data of `H` and `F` on one sector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapReport {
    pub lambda1: f64,
    pub lambda1_fixed_node: f64,
    pub gamma: f64,
    pub gamma_fixed_node: f64,
}

/// `γ = λ₂ - λ₁` for both operators; a gap below `1e-10` is an error.
pub fn spectral_gaps(h: &DMatrix<f64>, f: &DMatrix<f64>) -> Result<GapReport> {
    let gap = |m: &DMatrix<f64>| -> Result<(f64, f64)> {
        let s = eig_sym(m)?;
        if s.values.len() < 2 {
            return Err(Error::InvalidArgument("a gap needs at least two states".into()));
        }
        let g = s.values[1] - s.values[0];
        if g <= DEGENERACY_TOLERANCE {
            return Err(Error::DegenerateGroundState(g));
        }
        Ok((s.values[0], g))
    };
    let (lambda1, gamma) = gap(h)?;
    let (lambda1_fixed_node, gamma_fixed_node) = gap(f)?;
    Ok(GapReport {
        lambda1,
        lambda1_fixed_node,
        gamma,
        gamma_fixed_node,
    })
}

/// `e^{Gt}` through the symmetric conjugate `M = D⁻¹ G D`.
#[derive(Debug, Clone)]
pub struct ExactEvolution {
    amplitudes: DVector<f64>,
    spectrum: SymmetricSpectrum,
}

impl ExactEvolution {
    pub fn from_generator(g: &DMatrix<f64>, amplitudes: &DVector<f64>) -> Result<Self> {
        let n = amplitudes.len();
        if g.nrows() != n || g.ncols() != n {
            return Err(Error::LengthMismatch(g.nrows(), n));
        }
        if let Some(i) = amplitudes.iter().position(|a| *a == 0.0) {
            return Err(Error::InvalidArgument(format!("zero amplitude at basis index {i}")));
        }
        let mut m = DMatrix::from_fn(n, n, |i, j| g[(i, j)] * amplitudes[j] / amplitudes[i]);
        let asym = max_asymmetry(&m);
        if asym > 1e-9 * m.amax().max(1.0) {
            return Err(Error::NonSymmetric(asym));
        }
        m = (&m + m.transpose()) * 0.5;
        Ok(Self {
            amplitudes: amplitudes.clone(),
            spectrum: eig_sym(&m)?,
        })
    }

    /// Eigenvalues of `M` in ascending order; the largest is 0.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.spectrum.values
    }

    /// `⟨·|e^{Gt}|x_in⟩` for the basis index `start`.
    pub fn distribution(&self, start: usize, t: f64) -> DVector<f64> {
        let v = &self.spectrum.vectors;
        let decay = self.spectrum.values.map(|l| (l * t).exp());
        let n = self.amplitudes.len();
        DVector::from_fn(n, |i, _| {
            let s: f64 = (0..n).map(|k| v[(i, k)] * decay[k] * v[(start, k)]).sum();
            let p = self.amplitudes[i] / self.amplitudes[start] * s;
            if p < PROBABILITY_FLOOR {
                0.0
            } else {
                p
            }
        })
    }

    /// The full `e^{Gt}`, columns indexed by the start state.
    pub fn propagator(&self, t: f64) -> DMatrix<f64> {
        let v = &self.spectrum.vectors;
        let decay = DMatrix::from_diagonal(&self.spectrum.values.map(|l| (l * t).exp()));
        let e = v * decay * v.transpose();
        let n = self.amplitudes.len();
        DMatrix::from_fn(n, n, |i, j| self.amplitudes[i] * e[(i, j)] / self.amplitudes[j])
    }
}

/// `e^{-γt} / √π(x_in)`.
pub fn mixing_bound(gamma: f64, pi_start: f64, t: f64) -> f64 {
    (-gamma * t).exp() / pi_start.sqrt()
}

/// `-Σ_{x≠y} ψ_x F_xy ψ_y`, the stationary mean number of jumps per unit
/// time.
pub fn expected_flip_rate(f: &DMatrix<f64>, amplitudes: &DVector<f64>) -> f64 {
    let mut sum = 0.0;
    for i in 0..f.nrows() {
        for j in 0..f.ncols() {
            if i != j {
                sum += amplitudes[i] * f[(i, j)] * amplitudes[j];
            }
        }
    }
    -sum
}

/// `Σ|p_i - q_i|`. This is the 1-norm, twice the usual total variation
/// distance; every threshold in this crate is stated in the 1-norm.
pub fn tv_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch(p.len(), q.len()));
    }
    Ok(p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum())
}

/// Four-qubit free-fermion test
///
/// ```text
/// -⟨0000⟩⟨1111⟩ + ⟨1100⟩⟨0011⟩ - ⟨1010⟩⟨0101⟩ + ⟨1001⟩⟨0110⟩
/// ```
///
/// on an even-weight state given as 16 amplitudes indexed by integer value
/// (qubit `k` is bit `k`). It vanishes exactly for Gaussian states.
pub fn wick_check(amplitudes: &[f64]) -> Result<f64> {
    if amplitudes.len() != 16 {
        return Err(Error::LengthMismatch(amplitudes.len(), 16));
    }
    if let Some(i) = (0..16).find(|&i: &usize| i.count_ones() % 2 == 1 && amplitudes[i] != 0.0) {
        return Err(Error::OddWeightSupport(i));
    }
    let a = |s: &str| amplitudes[BitConfiguration::parse(s).expect("literal bit string").as_u64() as usize];
    Ok(-a("0000") * a("1111") + a("1100") * a("0011") - a("1010") * a("0101") + a("1001") * a("0110"))
}
