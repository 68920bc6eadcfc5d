use std::fmt;
use std::sync::Arc;

use crate::bits::{all_states, fixed_weight_states, BitConfiguration};
use crate::error::{Error, Result};

use super::{RowAccess, ZERO_THRESHOLD};

/// Default cap on the number of basis states any enumeration may visit.
pub const DEFAULT_STATE_CAP: usize = 1 << 20;

/// A subset of the computational basis.
#[derive(Clone)]
pub enum Sector {
    Full,
    /// States of fixed Hamming weight.
    Weight(usize),
    /// Arbitrary filter over the full basis.
    Custom(Arc<dyn Fn(&BitConfiguration) -> bool + Send + Sync>),
}

impl fmt::Debug for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sector::Full => f.write_str("Full"),
            Sector::Weight(k) => write!(f, "Weight({k})"),
            Sector::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl Sector {
    pub fn contains(&self, x: &BitConfiguration) -> bool {
        match self {
            Sector::Full => true,
            Sector::Weight(k) => x.count_ones() == *k,
            Sector::Custom(f) => f(x),
        }
    }

    /// Enumerates the sector in increasing integer order.
    pub fn states(&self, n: usize, cap: usize) -> Result<Vec<BitConfiguration>> {
        let out = match self {
            Sector::Full => all_states(n, cap),
            Sector::Weight(k) => fixed_weight_states(n, *k, cap),
            Sector::Custom(f) => all_states(n, cap).map(|v| v.into_iter().filter(|x| f(x)).collect()),
        };
        out.ok_or(Error::SectorCapExceeded { cap })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StoquasticVerdict {
    Stoquastic,
    /// A positive off-diagonal element `⟨y|H|x⟩ = value`.
    NotStoquastic {
        x: BitConfiguration,
        y: BitConfiguration,
        value: f64,
    },
    UndecidedAtCap {
        cap: usize,
    },
}

impl StoquasticVerdict {
    pub fn is_stoquastic(&self) -> Option<bool> {
        match self {
            StoquasticVerdict::Stoquastic => Some(true),
            StoquasticVerdict::NotStoquastic { .. } => Some(false),
            StoquasticVerdict::UndecidedAtCap { .. } => None,
        }
    }
}

/// Checks `⟨y|H|x⟩ <= 1e-12` for all distinct `x, y` in the sector.
///
/// Returns the first violating pair in enumeration order as a witness.
pub fn is_stoquastic<H: RowAccess + ?Sized>(h: &H, sector: Option<&Sector>, cap: usize) -> Result<StoquasticVerdict> {
    let sector = sector.cloned().unwrap_or(Sector::Full);
    let states = match sector.states(h.n_qubits(), cap) {
        Ok(s) => s,
        Err(Error::SectorCapExceeded { cap }) => return Ok(StoquasticVerdict::UndecidedAtCap { cap }),
        Err(e) => return Err(e),
    };
    for x in &states {
        for (y, v) in h.row(x)?.into_iter().skip(1) {
            if v > ZERO_THRESHOLD && sector.contains(&y) {
                return Ok(StoquasticVerdict::NotStoquastic {
                    x: x.clone(),
                    y,
                    value: v,
                });
            }
        }
    }
    Ok(StoquasticVerdict::Stoquastic)
}
