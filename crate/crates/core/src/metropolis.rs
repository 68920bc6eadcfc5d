//! Discrete-time Metropolis-Hastings baselines on fixed-weight states.
//!
//! The proposal graph joins `x` and `y` when they differ by exchanging one
//! set and one unset bit and the chosen operator has a nonzero entry between
//! them: every nonzero off-diagonal entry of `H`, or only those kept by `F`
//! (the sign-violating entries of `H` dropped). From `x` the chain proposes
//! a uniformly random graph neighbour, `Q(y|x) = 1/deg(x)`, and accepts with
//! `min{1, π(y) deg(x) / (π(x) deg(y))}`. When every swap is an edge, as for
//! `H` on the Haldane-Shastry ring, `Q = 1/(k(n-k))` for weight `k`.

use std::collections::HashMap;
use std::io::Write;

use nalgebra::DMatrix;

use crate::amplitude::AmplitudeOracle;
use crate::bits::BitConfiguration;
use crate::error::{Error, Result};
use crate::gillespie::RandomSource;
use crate::hamiltonian::{RowAccess, ZERO_THRESHOLD};

/// Largest number of degrees remembered before the cache is cleared.
pub const DEGREE_CACHE_CAPACITY: usize = 1 << 20;

/// Which operator supplies the proposal graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GraphMode {
    FromH,
    FromF,
}

impl std::fmt::Display for GraphMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GraphMode::FromH => "mh-h",
            GraphMode::FromF => "mh-f",
        })
    }
}

/// Metropolis-Hastings over the swap graph of `H` or `F`, with `ψ` for the
/// acceptance ratio.
#[derive(Debug)]
pub struct SwapMetropolis<H, O> {
    h: H,
    oracle: O,
    mode: GraphMode,
    degrees: HashMap<BitConfiguration, usize>,
}

/// Result of one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Accepted,
    Rejected,
}

impl<H: RowAccess, O: AmplitudeOracle> SwapMetropolis<H, O> {
    pub fn new(h: H, oracle: O, mode: GraphMode) -> Result<Self> {
        if h.n_qubits() != oracle.n_qubits() {
            return Err(Error::LengthMismatch(h.n_qubits(), oracle.n_qubits()));
        }
        Ok(Self {
            h,
            oracle,
            mode,
            degrees: HashMap::new(),
        })
    }

    pub fn mode(&self) -> GraphMode {
        self.mode
    }

    pub fn oracle(&self) -> &O {
        &self.oracle
    }

    /// Size of the swap universe at `x`, `k(n - k)`.
    pub fn universe_size(x: &BitConfiguration) -> usize {
        let k = x.count_ones();
        k * (x.n_qubits() - k)
    }

    /// `Some(⟨y|ψ⟩/⟨x|ψ⟩)` when `x - y` is an edge of the graph.
    fn edge_ratio(&self, x: &BitConfiguration, y: &BitConfiguration) -> Result<Option<f64>> {
        if x == y {
            return Ok(None);
        }
        let entry = self.h.entry(x, y)?;
        if entry.abs() <= ZERO_THRESHOLD {
            return Ok(None);
        }
        let r = self.oracle.ratio(x, y)?;
        Ok(match self.mode {
            GraphMode::FromH => Some(r),
            GraphMode::FromF => (entry * r <= 0.0).then_some(r),
        })
    }

    /// Whether `x - y` is an edge of the proposal graph.
    pub fn is_edge(&self, x: &BitConfiguration, y: &BitConfiguration) -> Result<bool> {
        Ok(self.edge_ratio(x, y)?.is_some())
    }

    fn swaps(x: &BitConfiguration) -> impl Iterator<Item = BitConfiguration> + '_ {
        x.ones().flat_map(move |i| {
            x.zeros_iter().map(move |j| {
                let mut y = x.clone();
                y.swap(i, j);
                y
            })
        })
    }

    /// Swap-universe states adjacent to `x` in the proposal graph.
    pub fn neighbors(&self, x: &BitConfiguration) -> Result<Vec<BitConfiguration>> {
        let mut out = Vec::new();
        for y in Self::swaps(x) {
            if self.is_edge(x, &y)? {
                out.push(y);
            }
        }
        Ok(out)
    }

    fn count_neighbors(&self, x: &BitConfiguration) -> Result<usize> {
        let mut deg = 0;
        for y in Self::swaps(x) {
            if self.is_edge(x, &y)? {
                deg += 1;
            }
        }
        Ok(deg)
    }

    /// Number of graph neighbours of `x`, memoized.
    pub fn degree(&mut self, x: &BitConfiguration) -> Result<usize> {
        if let Some(&d) = self.degrees.get(x) {
            return Ok(d);
        }
        let d = self.count_neighbors(x)?;
        if self.degrees.len() >= DEGREE_CACHE_CAPACITY {
            self.degrees.clear();
        }
        self.degrees.insert(x.clone(), d);
        Ok(d)
    }

    /// `A(y|x)`, zero off the graph.
    pub fn acceptance(&mut self, x: &BitConfiguration, y: &BitConfiguration) -> Result<f64> {
        let Some(r) = self.edge_ratio(x, y)? else {
            return Ok(0.0);
        };
        let (dx, dy) = (self.degree(x)?, self.degree(y)?);
        Ok((r * r * dx as f64 / dy as f64).min(1.0))
    }

    /// Proposes a uniform graph neighbour and accepts or rejects it in place.
    /// Neighbours are drawn by resampling uniform swaps until one is an edge.
    pub fn step(&mut self, x: &mut BitConfiguration, rng: &mut RandomSource) -> Result<StepOutcome> {
        let k = x.count_ones();
        let n = x.n_qubits();
        if k == 0 || k == n {
            return Err(Error::InvalidArgument(
                "the swap universe of a constant state is empty".into(),
            ));
        }
        let dx = self.degree(x)?;
        if dx == 0 {
            return Err(Error::AbsorbingState(x.clone()));
        }
        let (y, r) = loop {
            let i = x.ones().nth(rng.below(k)).expect("k set bits");
            let j = x.zeros_iter().nth(rng.below(n - k)).expect("n - k unset bits");
            let mut y = x.clone();
            y.swap(i, j);
            if let Some(r) = self.edge_ratio(x, &y)? {
                break (y, r);
            }
        };
        let weight = r * r;
        if weight == 0.0 {
            return Ok(StepOutcome::Rejected);
        }
        let dy = self.degree(&y)?;
        // u < 1 always, so A = 1 never rejects
        if rng.uniform() < weight * dx as f64 / dy as f64 {
            *x = y;
            Ok(StepOutcome::Accepted)
        } else {
            Ok(StepOutcome::Rejected)
        }
    }

    /// Runs `steps` steps and hands the state after each to `observer`.
    /// Returns the number of accepted moves.
    pub fn run_observed(
        &mut self,
        x_in: &BitConfiguration,
        steps: u64,
        rng: &mut RandomSource,
        mut observer: impl FnMut(&BitConfiguration),
    ) -> Result<u64> {
        if steps == 0 {
            return Err(Error::InvalidArgument("at least one step is needed".into()));
        }
        if self.oracle.log_amplitude(x_in).is_zero() {
            return Err(Error::ZeroAmplitude(x_in.clone()));
        }
        let mut x = x_in.clone();
        let mut accepted = 0;
        for _ in 0..steps {
            if self.step(&mut x, rng)? == StepOutcome::Accepted {
                accepted += 1;
            }
            observer(&x);
        }
        Ok(accepted)
    }

    /// States after each of `steps` steps, repeats included.
    pub fn run(
        &mut self,
        x_in: &BitConfiguration,
        steps: u64,
        rng: &mut RandomSource,
    ) -> Result<Vec<BitConfiguration>> {
        let mut out = Vec::with_capacity(steps as usize);
        self.run_observed(x_in, steps, rng, |x| out.push(x.clone()))?;
        Ok(out)
    }

    /// Exact one-step kernel on `basis`, with `P(y|x)` at `(index(y),
    /// index(x))`. The basis must be closed under the graph.
    pub fn transition_matrix(&mut self, basis: &[BitConfiguration]) -> Result<DMatrix<f64>> {
        let index: HashMap<_, _> = basis.iter().enumerate().map(|(i, x)| (x.clone(), i)).collect();
        let mut p = DMatrix::zeros(basis.len(), basis.len());
        for (col, x) in basis.iter().enumerate() {
            let q = 1.0 / self.degree(x)? as f64;
            let mut moved = 0.0;
            for y in self.neighbors(x)? {
                let a = self.acceptance(x, &y)?;
                let row = *index
                    .get(&y)
                    .ok_or_else(|| Error::InvalidArgument(format!("neighbor {} lies outside the basis", y.to_hex())))?;
                p[(row, col)] += q * a;
                moved += q * a;
            }
            p[(col, col)] += 1.0 - moved;
        }
        Ok(p)
    }
}

/// A named scalar function of a configuration.
pub type NamedObservable<'a> = (&'a str, &'a dyn Fn(&BitConfiguration) -> f64);

/// Writes a series as CSV with columns `step`, `state` (hex) and one column
/// per observable. Steps are numbered from 1.
pub fn write_series_csv(
    out: impl Write,
    series: &[BitConfiguration],
    observables: &[NamedObservable<'_>],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["step".to_string(), "state".to_string()];
    header.extend(observables.iter().map(|(name, _)| name.to_string()));
    w.write_record(&header).map_err(csv_error)?;
    for (k, x) in series.iter().enumerate() {
        let mut record = vec![(k + 1).to_string(), x.to_hex()];
        record.extend(observables.iter().map(|(_, f)| f(x).to_string()));
        w.write_record(&record).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}
