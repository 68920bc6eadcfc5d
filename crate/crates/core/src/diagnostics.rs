//! Error analysis for time averages: sampling a path on a regular grid,
//! integrated autocorrelation times, error bars and split-R̂.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::bits::BitConfiguration;
use crate::error::{Error, Result};
use crate::gillespie::Trajectory;

/// Window factor for the automatic truncation of the autocorrelation sum.
pub const DEFAULT_WINDOW_FACTOR: f64 = 5.0;

/// Shortest series accepted by [`tau_integrated`].
pub const MIN_SERIES_LENGTH: usize = 16;

/// `f` evaluated on the grid `τ₀ + jh`, `j = 1..=⌊(T - τ₀)/h⌋`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSeries {
    pub values: Vec<f64>,
    pub h: f64,
    pub source: String,
}

impl DiscreteSeries {
    pub fn new(values: Vec<f64>, h: f64, source: impl Into<String>) -> Self {
        Self {
            values,
            h,
            source: source.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        mean(&self.values)
    }
}

fn grid_length(span: f64, h: f64) -> Result<usize> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "grid spacing must be positive, got {h}"
        )));
    }
    if !(h < span) {
        return Err(Error::InvalidArgument(format!(
            "grid spacing {h} must be below the sampled span {span}"
        )));
    }
    Ok((span / h).floor() as usize)
}

/// Samples a stored path. A segment `(x, Δτ)` starting at `τ` holds `x` on
/// `(τ, τ + Δτ]`, so a grid point landing exactly on a transition time
/// reads the state before the jump.
pub fn discretize(
    traj: &Trajectory,
    f: impl Fn(&BitConfiguration) -> f64,
    h: f64,
    tau0: f64,
) -> Result<DiscreteSeries> {
    if tau0 < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "burn-in must be nonnegative, got {tau0}"
        )));
    }
    let len = grid_length(traj.total_time - tau0, h)?;
    let ends = traj.end_times();
    let last = traj.segments.len() - 1;
    let values = (1..=len)
        .map(|j| {
            let t = tau0 + j as f64 * h;
            let k = ends.partition_point(|&e| e < t).min(last);
            f(&traj.segments[k].0)
        })
        .collect();
    Ok(DiscreteSeries::new(values, h, "trajectory"))
}

/// Streaming form of [`discretize`]; feed `(f(state), holding time)` in path
/// order, then call [`GridSampler::finish`].
#[derive(Debug, Clone)]
pub struct GridSampler {
    h: f64,
    tau0: f64,
    clock: f64,
    next: u64,
    last: f64,
    values: Vec<f64>,
}

impl GridSampler {
    pub fn new(h: f64, tau0: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() || tau0 < 0.0 {
            return Err(Error::InvalidArgument(format!("bad grid: h = {h}, tau0 = {tau0}")));
        }
        Ok(Self {
            h,
            tau0,
            clock: 0.0,
            next: 1,
            last: f64::NAN,
            values: Vec::new(),
        })
    }

    pub fn observe(&mut self, value: f64, dt: f64) {
        self.clock += dt;
        self.last = value;
        loop {
            let t = self.tau0 + self.next as f64 * self.h;
            if t > self.clock {
                break;
            }
            self.values.push(value);
            self.next += 1;
        }
    }

    /// Trims or pads (with the final state) to exactly `⌊(T - τ₀)/h⌋` points.
    pub fn finish(mut self, total_time: f64, source: impl Into<String>) -> Result<DiscreteSeries> {
        let len = grid_length(total_time - self.tau0, self.h)?;
        self.values.resize(len, self.last);
        Ok(DiscreteSeries::new(self.values, self.h, source))
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Unbiased sample variance.
pub fn sample_variance(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64
}

/// Normalized autocorrelation `ρ(s)`, `s = 0..n`, via zero-padded FFT.
pub fn autocorrelation(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let m = mean(v);
    let size = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = v.iter().map(|x| Complex::new(x - m, 0.0)).collect();
    buf.resize(size, Complex::new(0.0, 0.0));
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(size).process(&mut buf);
    for c in buf.iter_mut() {
        *c = Complex::new(c.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(size).process(&mut buf);
    let c0 = buf[0].re;
    if c0 <= 0.0 {
        return vec![f64::NAN; n];
    }
    buf[..n].iter().map(|c| c.re / c0).collect()
}

/// Integrated autocorrelation time with its window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TauEstimate {
    pub tau: f64,
    pub window: usize,
    /// Set when no window satisfied the stopping rule, or the series is
    /// constant (then `tau` is the series length).
    pub flagged: bool,
}

/// `τ̂ = 1 + 2 Σ_{s=1}^{W} ρ(s)` with the smallest `W ≥ c·τ̂(W)`.
pub fn tau_integrated_with(series: &[f64], c: f64) -> Result<TauEstimate> {
    let n = series.len();
    if n < MIN_SERIES_LENGTH {
        return Err(Error::InvalidArgument(format!(
            "series of length {n} is shorter than {MIN_SERIES_LENGTH}"
        )));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("series contains non-finite values".into()));
    }
    let rho = autocorrelation(series);
    if rho[0].is_nan() {
        return Ok(TauEstimate {
            tau: n as f64,
            window: 0,
            flagged: true,
        });
    }
    let mut tau = 1.0;
    for (w, r) in rho.iter().enumerate().skip(1) {
        tau += 2.0 * r;
        if w as f64 >= c * tau {
            return Ok(TauEstimate {
                tau,
                window: w,
                flagged: false,
            });
        }
    }
    Ok(TauEstimate {
        tau,
        window: n - 1,
        flagged: true,
    })
}

pub fn tau_integrated(series: &[f64]) -> Result<TauEstimate> {
    tau_integrated_with(series, DEFAULT_WINDOW_FACTOR)
}

/// `sqrt(σ² τ / N)` with the unbiased sample variance.
pub fn error_bar(series: &[f64], tau_int: f64) -> f64 {
    if series.is_empty() {
        return 0.0;
    }
    (sample_variance(series) * tau_int / series.len() as f64).sqrt()
}

/// Autocorrelation time in transitions: `τ h r / T`.
pub fn tau_normalized(tau_int: f64, h: f64, flips: u64, total_time: f64) -> f64 {
    tau_int * h * flips as f64 / total_time
}

/// Split-chain R̂ without rank normalization. Each chain is cut into two
/// halves (dropping the middle value of odd lengths) and
/// `R̂ = sqrt((N - 1)/N + B/(N W))` with `N` the half length, `W` the mean
/// within-half variance and `B/N` the variance of the half means. Values
/// below 1 are raised to 1; zero within-half variance gives 1 when the
/// halves agree and infinity otherwise.
pub fn split_rhat(chains: &[&[f64]]) -> Result<f64> {
    if chains.len() < 2 {
        return Err(Error::InvalidArgument("split-R̂ needs at least two chains".into()));
    }
    let len = chains[0].len();
    if len < 4 {
        return Err(Error::InvalidArgument(format!("chains of length {len} are too short")));
    }
    if let Some(c) = chains.iter().find(|c| c.len() != len) {
        return Err(Error::LengthMismatch(c.len(), len));
    }
    let half = len / 2;
    let halves: Vec<&[f64]> = chains.iter().flat_map(|c| [&c[..half], &c[len - half..]]).collect();
    let n = half as f64;
    let means: Vec<f64> = halves.iter().map(|h| mean(h)).collect();
    let within = mean(&halves.iter().map(|h| sample_variance(h)).collect::<Vec<_>>());
    let between = n * sample_variance(&means);
    if within == 0.0 {
        return Ok(if between > 0.0 { f64::INFINITY } else { 1.0 });
    }
    Ok(((n - 1.0) / n + between / (n * within)).sqrt().max(1.0))
}

/// One row of the diagnostics report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainDiagnostics {
    pub observable: String,
    pub mu_hat: f64,
    pub sigma_hat: f64,
    pub tau_int: f64,
    pub tau_normalized: f64,
    pub r_hat: f64,
    pub h: f64,
    pub tau0: f64,
    #[serde(rename = "T")]
    pub total_time: f64,
    pub flips: u64,
}

impl ChainDiagnostics {
    /// Pools the chains for `μ̂`, averages `τ̂` over chains and combines the
    /// per-chain error bars as the standard error of the pooled mean.
    /// `flips` and `total_time` are summed over chains; for a discrete-time
    /// chain pass the step count for both so the normalized time is in
    /// steps.
    pub fn from_chains(
        observable: impl Into<String>,
        chains: &[DiscreteSeries],
        tau0: f64,
        total_time: f64,
        flips: u64,
    ) -> Result<Self> {
        if chains.is_empty() {
            return Err(Error::InvalidArgument("no chains to summarize".into()));
        }
        let h = chains[0].h;
        let mut taus = Vec::with_capacity(chains.len());
        let mut var_sum = 0.0;
        for c in chains {
            let tau = tau_integrated(&c.values)?.tau;
            let s = error_bar(&c.values, tau);
            var_sum += s * s;
            taus.push(tau);
        }
        let k = chains.len() as f64;
        let tau_int = mean(&taus);
        let mu_hat = chains.iter().map(DiscreteSeries::mean).sum::<f64>() / k;
        let r_hat = if chains.len() >= 2 {
            let slices: Vec<&[f64]> = chains.iter().map(|c| c.values.as_slice()).collect();
            split_rhat(&slices)?
        } else {
            1.0
        };
        Ok(Self {
            observable: observable.into(),
            mu_hat,
            sigma_hat: var_sum.sqrt() / k,
            tau_int,
            tau_normalized: tau_normalized(tau_int, h, flips, total_time),
            r_hat,
            h,
            tau0,
            total_time,
            flips,
        })
    }
}
