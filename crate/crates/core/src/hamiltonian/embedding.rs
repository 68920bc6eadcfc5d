//! Reduction of a complex Hermitian Pauli sum to a real symmetric operator
//! on one extra qubit.
//!
//! Writing `H = A + iK` with `A` real symmetric and `K` real antisymmetric,
//! the embedded operator is
//!
//! ```text
//! H_R = A ⊗ I + K ⊗ [[0, -1], [1, 0]] + Σ_x |x⟩⟨x| ⊗ |v_x⟩⟨v_x|,
//! v_x = -sin(θ_x)|0⟩ + cos(θ_x)|1⟩,
//! ```
//!
//! where `θ_x` is the phase of `⟨x|ψ⟩ / ⟨0^n|ψ⟩`. Its ground state is
//! `Re(ψ)|0⟩ + Im(ψ)|1⟩` with the ground energy of `H`, and its gap is at
//! least `min{1, γ}`. The ancilla is qubit `n`. Rows are built lazily; each
//! row costs one oracle call.

use std::sync::Arc;

use num_complex::Complex64;

use crate::amplitude::{AmplitudeOracle, SignedLogAmplitude};
use crate::bits::BitConfiguration;
use crate::error::{Error, Result};

use super::{RowAccess, SparseHamiltonian, ZERO_THRESHOLD};

/// Evaluation access to a complex ground state.
pub trait ComplexAmplitudeOracle {
    fn n_qubits(&self) -> usize;

    /// `⟨y|ψ⟩ / ⟨x|ψ⟩`; fails when `⟨x|ψ⟩ = 0`.
    fn ratio(&self, x: &BitConfiguration, y: &BitConfiguration) -> Result<Complex64>;
}

/// Complex amplitudes indexed by the integer value of the state.
#[derive(Debug, Clone)]
pub struct ComplexTableOracle {
    n: usize,
    values: Vec<Complex64>,
}

impl ComplexTableOracle {
    pub fn new(n: usize, values: Vec<Complex64>) -> Result<Self> {
        if n > 32 {
            return Err(Error::InvalidArgument(format!("table oracle needs n <= 32, got {n}")));
        }
        if values.len() != 1usize << n {
            return Err(Error::LengthMismatch(values.len(), 1usize << n));
        }
        Ok(Self { n, values })
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
}

impl ComplexAmplitudeOracle for ComplexTableOracle {
    fn n_qubits(&self) -> usize {
        self.n
    }

    fn ratio(&self, x: &BitConfiguration, y: &BitConfiguration) -> Result<Complex64> {
        let vx = self.values[x.as_u64() as usize];
        if vx == Complex64::new(0.0, 0.0) {
            return Err(Error::ZeroAmplitude(x.clone()));
        }
        Ok(self.values[y.as_u64() as usize] / vx)
    }
}

/// Row-access form of `H_R`.
#[derive(Debug)]
pub struct EmbeddedHamiltonian<O> {
    n: usize,
    real_part: SparseHamiltonian,
    imaginary_part: SparseHamiltonian,
    oracle: Arc<O>,
    reference: BitConfiguration,
}

impl<O: ComplexAmplitudeOracle> EmbeddedHamiltonian<O> {
    /// Unit phase `⟨x|ψ⟩/|⟨x|ψ⟩|` measured against `⟨0^n|ψ⟩`, as `(cos θ_x, sin θ_x)`.
    fn phase(&self, x: &BitConfiguration) -> Result<(f64, f64)> {
        let r = self.oracle.ratio(&self.reference, x)?;
        if r.re == 0.0 && r.im == 0.0 {
            return Err(Error::ZeroAmplitude(x.clone()));
        }
        let theta = r.im.atan2(r.re);
        Ok((theta.cos(), theta.sin()))
    }
}

impl<O: ComplexAmplitudeOracle> RowAccess for EmbeddedHamiltonian<O> {
    fn n_qubits(&self) -> usize {
        self.n + 1
    }

    fn row(&self, state: &BitConfiguration) -> Result<Vec<(BitConfiguration, f64)>> {
        let (x, ancilla) = state.split_last();
        let (cos, sin) = self.phase(&x)?;
        let v = [-sin, cos];
        let a = usize::from(ancilla);

        let real = self.real_part.complex_row(&x);
        let imag = self.imaginary_part.complex_row(&x);
        let mut out = Vec::with_capacity(real.len() + imag.len() + 1);

        out.push((state.clone(), real[0].1 + v[a] * v[a]));
        let cross = v[1 - a] * v[a];
        if cross.abs() > ZERO_THRESHOLD {
            out.push((x.extended(!ancilla), cross));
        }
        for (y, re, _) in real.into_iter().skip(1) {
            if re.abs() > ZERO_THRESHOLD {
                out.push((y.extended(ancilla), re));
            }
        }
        // K ⊗ J with J|0⟩ = |1⟩ and J|1⟩ = -|0⟩
        let j = if ancilla { -1.0 } else { 1.0 };
        for (y, _, im) in imag.into_iter().skip(1) {
            if im.abs() > ZERO_THRESHOLD {
                out.push((y.extended(!ancilla), j * im));
            }
        }
        Ok(out)
    }

    fn max_row_degree(&self) -> usize {
        self.real_part.max_row_degree() + self.imaginary_part.max_row_degree() + 1
    }

    fn norm_bound(&self) -> f64 {
        self.real_part.norm_bound() + self.imaginary_part.norm_bound() + 1.0
    }
}

/// Amplitudes of `Re(ψ)|0⟩ + Im(ψ)|1⟩`, phase-fixed so `⟨0^n|ψ⟩ > 0`.
#[derive(Debug)]
pub struct EmbeddedOracle<O> {
    n: usize,
    oracle: Arc<O>,
    reference: BitConfiguration,
}

impl<O: ComplexAmplitudeOracle> EmbeddedOracle<O> {
    pub fn amplitude(&self, state: &BitConfiguration) -> f64 {
        let (x, ancilla) = state.split_last();
        let r = self
            .oracle
            .ratio(&self.reference, &x)
            .expect("reference amplitude checked nonzero at construction");
        if ancilla {
            r.im
        } else {
            r.re
        }
    }
}

impl<O: ComplexAmplitudeOracle> AmplitudeOracle for EmbeddedOracle<O> {
    fn n_qubits(&self) -> usize {
        self.n + 1
    }

    fn log_amplitude(&self, x: &BitConfiguration) -> SignedLogAmplitude {
        SignedLogAmplitude::from_value(self.amplitude(x))
    }
}

/// Builds `H_R` and the oracle for its ground state from a complex
/// Hermitian Pauli sum and an oracle for the ground state of `H`.
pub fn real_embedding<O: ComplexAmplitudeOracle>(
    h: &SparseHamiltonian,
    oracle: Arc<O>,
) -> Result<(EmbeddedHamiltonian<O>, EmbeddedOracle<O>)> {
    let n = h.n_qubits();
    if oracle.n_qubits() != n {
        return Err(Error::LengthMismatch(oracle.n_qubits(), n));
    }
    let reference = BitConfiguration::zeros(n);
    // fails if ⟨0^n|ψ⟩ = 0
    oracle.ratio(&reference, &reference)?;
    let hr = EmbeddedHamiltonian {
        n,
        real_part: h.y_parity_part(false)?,
        imaginary_part: h.y_parity_part(true)?,
        oracle: Arc::clone(&oracle),
        reference: reference.clone(),
    };
    let or = EmbeddedOracle { n, oracle, reference };
    Ok((hr, or))
}
