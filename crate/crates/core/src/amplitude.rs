//! Ground-state amplitudes in sign / log-magnitude form and the
//! amplitude-ratio oracle that is the sampler's only access to `ψ`.

use crate::bits::BitConfiguration;
use crate::error::{Error, Result};

/// An unnormalized real amplitude `sign · exp(log_magnitude)`.
///
/// `sign == 0` exactly when the amplitude is zero; `log_magnitude` is then
/// `-inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLogAmplitude {
    pub sign: i8,
    pub log_magnitude: f64,
}

impl SignedLogAmplitude {
    pub const ZERO: Self = Self {
        sign: 0,
        log_magnitude: f64::NEG_INFINITY,
    };

    pub fn new(sign: i8, log_magnitude: f64) -> Self {
        if sign == 0 {
            Self::ZERO
        } else {
            Self {
                sign: sign.signum(),
                log_magnitude,
            }
        }
    }

    pub fn from_value(v: f64) -> Self {
        if v == 0.0 {
            Self::ZERO
        } else {
            Self::new(if v > 0.0 { 1 } else { -1 }, v.abs().ln())
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn value(&self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            f64::from(self.sign) * self.log_magnitude.exp()
        }
    }

    /// `self / denominator` as a plain real number.
    pub fn ratio_over(&self, denominator: &Self) -> f64 {
        debug_assert!(!denominator.is_zero());
        if self.sign == 0 {
            return 0.0;
        }
        f64::from(self.sign * denominator.sign) * (self.log_magnitude - denominator.log_magnitude).exp()
    }
}

/// Evaluation access to a real ground state `ψ` (up to normalization).
pub trait AmplitudeOracle {
    fn n_qubits(&self) -> usize;

    fn log_amplitude(&self, x: &BitConfiguration) -> SignedLogAmplitude;

    /// `⟨y|ψ⟩ / ⟨x|ψ⟩`; fails when `⟨x|ψ⟩ = 0`.
    fn ratio(&self, x: &BitConfiguration, y: &BitConfiguration) -> Result<f64> {
        if x == y {
            return if self.log_amplitude(x).is_zero() {
                Err(Error::ZeroAmplitude(x.clone()))
            } else {
                Ok(1.0)
            };
        }
        let ax = self.log_amplitude(x);
        if ax.is_zero() {
            return Err(Error::ZeroAmplitude(x.clone()));
        }
        Ok(self.log_amplitude(y).ratio_over(&ax))
    }
}

impl<T: AmplitudeOracle + ?Sized> AmplitudeOracle for &T {
    fn n_qubits(&self) -> usize {
        (**self).n_qubits()
    }

    fn log_amplitude(&self, x: &BitConfiguration) -> SignedLogAmplitude {
        (**self).log_amplitude(x)
    }

    fn ratio(&self, x: &BitConfiguration, y: &BitConfiguration) -> Result<f64> {
        (**self).ratio(x, y)
    }
}

/// Amplitudes stored as a dense vector indexed by the integer value of the
/// state (`n <= 32`).
#[derive(Debug, Clone)]
pub struct TableOracle {
    n: usize,
    values: Vec<f64>,
}

impl TableOracle {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if n > 32 {
            return Err(Error::InvalidArgument(format!("table oracle needs n <= 32, got {n}")));
        }
        if values.len() != 1usize << n {
            return Err(Error::LengthMismatch(values.len(), 1usize << n));
        }
        Ok(Self { n, values })
    }

    /// Builds a table from amplitudes on a subset of states; all others are zero.
    pub fn from_sparse(n: usize, entries: impl IntoIterator<Item = (BitConfiguration, f64)>) -> Result<Self> {
        let mut values = vec![0.0; 1usize << n];
        for (x, v) in entries {
            values[x.as_u64() as usize] = v;
        }
        Self::new(n, values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, x: &BitConfiguration) -> f64 {
        self.values[x.as_u64() as usize]
    }
}

impl AmplitudeOracle for TableOracle {
    fn n_qubits(&self) -> usize {
        self.n
    }

    fn log_amplitude(&self, x: &BitConfiguration) -> SignedLogAmplitude {
        SignedLogAmplitude::from_value(self.value(x))
    }

    fn ratio(&self, x: &BitConfiguration, y: &BitConfiguration) -> Result<f64> {
        let vx = self.value(x);
        if vx == 0.0 {
            return Err(Error::ZeroAmplitude(x.clone()));
        }
        if x == y {
            return Ok(1.0);
        }
        Ok(self.value(y) / vx)
    }
}
