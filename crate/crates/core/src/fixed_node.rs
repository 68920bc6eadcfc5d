//! The fixed-node operator `F` and the generator of the associated chain.
//!
//! An off-diagonal pair `(x, y)` is sign-violating when
//! `⟨ψ|x⟩⟨x|H|y⟩⟨y|ψ⟩ > 0`. `F` drops those entries and adds
//! `⟨x|H|y⟩⟨y|ψ⟩/⟨x|ψ⟩` to the diagonal instead, which keeps `ψ` as its ground
//! state with the same energy. The chain jumps `x → y` at rate
//! `max{0, -⟨y|H|x⟩⟨y|ψ⟩/⟨x|ψ⟩}` and has `π` as its stationary law.
//!
//! Everything here is computed row by row from `(H, oracle)`; nothing is
//! materialized globally. States with `⟨x|ψ⟩ = 0` are outside the state
//! space: they are never left from and never jumped into.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::amplitude::AmplitudeOracle;
use crate::bits::BitConfiguration;
use crate::error::{Error, Result};
use crate::hamiltonian::{RowAccess, ZERO_THRESHOLD};

/// Rates below this fraction of the total are dropped from the outgoing list.
pub const RATE_DROP_FRACTION: f64 = 1e-14;

/// Relative tolerance of the two routes to the total outgoing rate.
pub const RATE_CHECK_TOLERANCE: f64 = 1e-9;

/// Agreement demanded of ground-energy estimates taken at different states.
pub const GROUND_ENERGY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignClass {
    /// Sign-violating pair: `⟨ψ|x⟩⟨x|H|y⟩⟨y|ψ⟩ > 0`.
    SPlus,
    /// Nonzero off-diagonal entry with sign product `<= 0`.
    SMinus,
    Diagonal,
    /// `⟨x|H|y⟩` is zero.
    Absent,
}

/// Outgoing jumps of the chain from one state.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorRates {
    pub source: BitConfiguration,
    /// Targets with strictly positive rates.
    pub outgoing: Vec<(BitConfiguration, f64)>,
    /// `Σ` of the outgoing rates, which equals `-⟨x|G|x⟩`.
    pub total_rate: f64,
    pub lambda1: f64,
}

/// Sign class of the pair `(x, y)`.
///
/// A zero amplitude at `x` with a nonzero entry is an error. A zero amplitude
/// at `y` makes the sign product zero, so the pair is `SMinus`.
pub fn classify<H, O>(h: &H, oracle: &O, x: &BitConfiguration, y: &BitConfiguration) -> Result<SignClass>
where
    H: RowAccess + ?Sized,
    O: AmplitudeOracle + ?Sized,
{
    if x == y {
        return Ok(SignClass::Diagonal);
    }
    let entry = h.entry(x, y)?;
    if entry.abs() <= ZERO_THRESHOLD {
        return Ok(SignClass::Absent);
    }
    let r = oracle.ratio(x, y)?;
    Ok(if entry * r > 0.0 {
        SignClass::SPlus
    } else {
        SignClass::SMinus
    })
}

/// `Σ_y ⟨x|H|y⟩⟨y|ψ⟩/⟨x|ψ⟩`, which equals the ground energy at every `x`
/// in the support when `ψ` is an eigenvector.
pub fn ground_energy<H, O>(h: &H, oracle: &O, x: &BitConfiguration) -> Result<f64>
where
    H: RowAccess + ?Sized,
    O: AmplitudeOracle + ?Sized,
{
    let mut row = h.row(x)?.into_iter();
    let (_, diag) = row.next().expect("row holds its diagonal");
    if oracle.log_amplitude(x).is_zero() {
        return Err(Error::ZeroAmplitude(x.clone()));
    }
    let mut sum = diag;
    for (y, v) in row {
        sum += v * oracle.ratio(x, &y)?;
    }
    Ok(sum)
}

/// Column `x` of `F`, diagonal first. Entries on sign-violating pairs are
/// omitted.
pub fn fixed_node_row<H, O>(h: &H, oracle: &O, x: &BitConfiguration) -> Result<Vec<(BitConfiguration, f64)>>
where
    H: RowAccess + ?Sized,
    O: AmplitudeOracle + ?Sized,
{
    let row = h.row(x)?;
    if oracle.log_amplitude(x).is_zero() {
        return Err(Error::ZeroAmplitude(x.clone()));
    }
    let mut out = Vec::with_capacity(row.len());
    let mut iter = row.into_iter();
    out.push(iter.next().expect("row holds its diagonal"));
    for (y, v) in iter {
        let weighted = v * oracle.ratio(x, &y)?;
        if weighted > 0.0 {
            out[0].1 += weighted;
        } else {
            out.push((y, v));
        }
    }
    Ok(out)
}

/// Outgoing rates of the chain at `x`, cross-checked against the diagonal
/// of `F`.
///
/// The sum of the rates and `⟨x|F|x⟩ - λ₁` must agree to a relative
/// `1e-9`; a negative diagonal route or a mismatch means `λ₁` or the oracle
/// is inconsistent with `H`.
pub fn generator_rates<H, O>(h: &H, oracle: &O, lambda1: f64, x: &BitConfiguration) -> Result<GeneratorRates>
where
    H: RowAccess + ?Sized,
    O: AmplitudeOracle + ?Sized,
{
    let row = h.row(x)?;
    if oracle.log_amplitude(x).is_zero() {
        return Err(Error::ZeroAmplitude(x.clone()));
    }
    let mut iter = row.into_iter();
    let (_, h_xx) = iter.next().expect("row holds its diagonal");
    let mut f_xx = h_xx;
    let mut scale = h_xx.abs() + lambda1.abs();
    let mut outgoing = Vec::new();
    let mut summed = 0.0;
    for (y, v) in iter {
        let weighted = v * oracle.ratio(x, &y)?;
        scale += weighted.abs();
        if weighted > 0.0 {
            f_xx += weighted;
        } else if weighted < 0.0 {
            summed += -weighted;
            outgoing.push((y, -weighted));
        }
    }
    let diagonal = f_xx - lambda1;
    let tol = RATE_CHECK_TOLERANCE * scale.max(1.0);
    if diagonal < -tol {
        return Err(Error::NegativeTotalRate {
            state: x.clone(),
            total: diagonal,
        });
    }
    if (summed - diagonal).abs() > tol {
        return Err(Error::RateMismatch {
            state: x.clone(),
            summed,
            diagonal,
        });
    }
    let floor = RATE_DROP_FRACTION * summed;
    outgoing.retain(|&(_, r)| r >= floor);
    let total_rate = outgoing.iter().map(|&(_, r)| r).sum();
    Ok(GeneratorRates {
        source: x.clone(),
        outgoing,
        total_rate,
        lambda1,
    })
}

/// A Hamiltonian, an oracle for its ground state and the cached ground energy.
#[derive(Debug, Clone)]
pub struct FixedNodeChain<H, O> {
    h: H,
    oracle: O,
    lambda1: f64,
    reference: BitConfiguration,
}

impl<H: RowAccess, O: AmplitudeOracle> FixedNodeChain<H, O> {
    /// Computes `λ₁` at `reference` and re-derives it at three further
    /// support states reached by a short seeded walk of the chain.
    pub fn new(h: H, oracle: O, reference: BitConfiguration) -> Result<Self> {
        let lambda1 = ground_energy(&h, &oracle, &reference)?;
        let chain = Self {
            h,
            oracle,
            lambda1,
            reference,
        };
        chain.self_check(3, 0x5eed)?;
        Ok(chain)
    }

    /// Uses a caller-supplied `λ₁` without any consistency check.
    pub fn with_lambda1(h: H, oracle: O, reference: BitConfiguration, lambda1: f64) -> Self {
        Self {
            h,
            oracle,
            lambda1,
            reference,
        }
    }

    /// Re-evaluates the ground energy at `points` states visited by a walk from
    /// the reference state and compares each to the cached value.
    pub fn self_check(&self, points: usize, seed: u64) -> Result<()> {
        const JUMPS_BETWEEN_POINTS: usize = 8;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = self.reference.clone();
        for _ in 0..points {
            for _ in 0..JUMPS_BETWEEN_POINTS {
                let rates = self.rates(&x)?;
                if rates.outgoing.is_empty() {
                    return Err(Error::AbsorbingState(x));
                }
                let pick = rng.random::<f64>() * rates.total_rate;
                let mut acc = 0.0;
                let mut next = &rates.outgoing[rates.outgoing.len() - 1].0;
                for (y, r) in &rates.outgoing {
                    acc += r;
                    if pick < acc {
                        next = y;
                        break;
                    }
                }
                x = next.clone();
            }
            let value = ground_energy(&self.h, &self.oracle, &x)?;
            let tol = GROUND_ENERGY_TOLERANCE * self.lambda1.abs().max(1.0);
            if (value - self.lambda1).abs() > tol {
                return Err(Error::GroundEnergyMismatch {
                    state: x,
                    value,
                    reference: self.lambda1,
                });
            }
        }
        Ok(())
    }

    pub fn hamiltonian(&self) -> &H {
        &self.h
    }

    pub fn oracle(&self) -> &O {
        &self.oracle
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn reference(&self) -> &BitConfiguration {
        &self.reference
    }

    pub fn n_qubits(&self) -> usize {
        self.h.n_qubits()
    }

    pub fn rates(&self, x: &BitConfiguration) -> Result<GeneratorRates> {
        generator_rates(&self.h, &self.oracle, self.lambda1, x)
    }

    pub fn fixed_node_row(&self, x: &BitConfiguration) -> Result<Vec<(BitConfiguration, f64)>> {
        fixed_node_row(&self.h, &self.oracle, x)
    }

    pub fn classify(&self, x: &BitConfiguration, y: &BitConfiguration) -> Result<SignClass> {
        classify(&self.h, &self.oracle, x, y)
    }

    /// `maxdeg(H) · ‖H‖` bound on the stationary mean flip rate.
    pub fn flip_rate_bound(&self) -> f64 {
        self.h.max_row_degree() as f64 * self.h.norm_bound()
    }
}
