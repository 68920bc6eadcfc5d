use thiserror::Error;

use crate::bits::BitConfiguration;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Pauli term: {0}")]
    InvalidTerm(String),
    #[error("Hamiltonian has terms with an odd number of Y factors and is not real")]
    NonRealHamiltonian,
    #[error("ground-state amplitude vanishes at {0}")]
    ZeroAmplitude(BitConfiguration),
    #[error("absorbing state {0}: total outgoing rate is zero")]
    AbsorbingState(BitConfiguration),
    #[error("negative total rate {total} at {state} (inconsistent ground energy or oracle)")]
    NegativeTotalRate { state: BitConfiguration, total: f64 },
    #[error("rate totals disagree at {state}: sum of rates {summed}, diagonal route {diagonal}")]
    RateMismatch {
        state: BitConfiguration,
        summed: f64,
        diagonal: f64,
    },
    #[error("ground energy {value} at {state} disagrees with reference value {reference}")]
    GroundEnergyMismatch {
        state: BitConfiguration,
        value: f64,
        reference: f64,
    },
    #[error("state count exceeds the cap of {cap}")]
    SectorCapExceeded { cap: usize },
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NonSymmetric(f64),
    #[error("ground state is degenerate (gap {0:e})")]
    DegenerateGroundState(f64),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("state has support on odd-weight basis vector {0}")]
    OddWeightSupport(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
