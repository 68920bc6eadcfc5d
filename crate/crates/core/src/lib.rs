//! Fixed-node continuous-time Markov chains for sampling the ground-state
//! distribution `π(x) = |⟨x|ψ⟩|²` of a gapped Hamiltonian, given only an
//! oracle for amplitude ratios `⟨y|ψ⟩/⟨x|ψ⟩`.
//!
//! The pieces:
//!
//! * [`hamiltonian`]: Pauli-sum operators with lazy row access, stoquasticity
//!   checks and the reduction of complex Hamiltonians to real ones.
//! * [`fixed_node`]: the sign-compatible operator `F` built from `(H, ψ)` and
//!   the generator rates of the associated chain.
//! * [`gillespie`]: event-driven simulation of that chain, with an optional
//!   flip-count cutoff, and time averages along its path.
//! * [`metropolis`]: discrete-time Metropolis-Hastings baselines.
//! * [`haldane_shastry`]: the inverse-square exchange chain, whose ground state
//!   has a closed form.
//! * [`exact`]: dense linear algebra on small sectors for cross-checking.
//! * [`diagnostics`]: autocorrelation times, error bars and split-R̂.
//! * [`validation`]: a named battery of exact checks used by the CLI.

pub mod amplitude;
pub mod bits;
pub mod diagnostics;
pub mod error;
pub mod exact;
pub mod fixed_node;
pub mod gillespie;
pub mod haldane_shastry;
pub mod hamiltonian;
pub mod metropolis;
pub mod validation;

pub use amplitude::{AmplitudeOracle, SignedLogAmplitude, TableOracle};
pub use bits::BitConfiguration;
pub use error::{Error, Result};
pub use fixed_node::{FixedNodeChain, GeneratorRates, SignClass};
pub use gillespie::{Gillespie, RandomSource, Trajectory, TruncatedOutcome};
pub use haldane_shastry::HaldaneShastry;
pub use hamiltonian::{Pauli, PauliTerm, RowAccess, SparseHamiltonian};
