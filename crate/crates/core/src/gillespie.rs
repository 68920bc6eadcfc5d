//! Event-driven simulation of the fixed-node chain.
//!
//! From state `x` the chain waits an exponential time with rate
//! `|⟨x|G|x⟩|`, then jumps to `y` with probability proportional to the
//! rate `x → y`. The path is piecewise constant: a segment `(x, Δτ)` that
//! starts at `τ` holds `x` on `(τ, τ + Δτ]`.
//!
//! The truncated variant gives up once the number of jumps exceeds
//! `⌈4 t · maxdeg(H) · ‖H‖ / ε⌉`; from a typical start this happens with
//! probability at most `ε/4`.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::rc::Rc;

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::amplitude::AmplitudeOracle;
use crate::bits::BitConfiguration;
use crate::error::{Error, Result};
use crate::fixed_node::{FixedNodeChain, GeneratorRates};
use crate::hamiltonian::RowAccess;

/// Seeded random stream: ChaCha with 8 rounds, seeded through
/// `seed_from_u64`, so the output depends only on the seed and the sequence
/// of calls.
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Stream for the `index`-th of several independent chains.
    pub fn for_chain(seed: u64, index: u64) -> Self {
        Self::new(seed.wrapping_add(index))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `(0, 1]`, safe to take the logarithm of.
    pub fn uniform_positive(&mut self) -> f64 {
        1.0 - self.uniform()
    }

    /// Uniform integer in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        (self.uniform() * n as f64) as usize % n
    }
}

impl RngCore for RandomSource {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// `ln(1/u) / total_rate`.
pub fn holding_time(u: f64, total_rate: f64) -> f64 {
    (1.0 / u).ln() / total_rate
}

/// Target whose cumulative-rate interval contains `u · total_rate`.
pub fn select_target(rates: &GeneratorRates, u: f64) -> &BitConfiguration {
    let pick = u * rates.total_rate;
    let mut acc = 0.0;
    for (y, r) in &rates.outgoing {
        acc += r;
        if pick < acc {
            return y;
        }
    }
    &rates.outgoing[rates.outgoing.len() - 1].0
}

/// One holding time and the following jump.
pub fn step(rates: &GeneratorRates, rng: &mut RandomSource) -> Result<(f64, BitConfiguration)> {
    if rates.outgoing.is_empty() || rates.total_rate <= 0.0 {
        return Err(Error::AbsorbingState(rates.source.clone()));
    }
    let dt = holding_time(rng.uniform_positive(), rates.total_rate);
    let next = select_target(rates, rng.uniform()).clone();
    Ok((dt, next))
}

/// A piecewise-constant path.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// `(state, holding time)` in order; consecutive states differ.
    pub segments: Vec<(BitConfiguration, f64)>,
    pub total_time: f64,
    pub flips: u64,
    /// Whether the run was made under a flip cutoff.
    pub truncated: bool,
}

impl Trajectory {
    pub fn final_state(&self) -> &BitConfiguration {
        &self.segments[self.segments.len() - 1].0
    }

    /// Times at which each segment ends.
    pub fn end_times(&self) -> Vec<f64> {
        let mut clock = 0.0;
        self.segments
            .iter()
            .map(|(_, dt)| {
                clock += dt;
                clock
            })
            .collect()
    }

    /// One JSON object per segment, `{"state": hex, "dt": ...}`, followed by a
    /// summary `{"total_time", "flips", "truncated", "seed"}`.
    pub fn write_jsonl(&self, mut out: impl Write, seed: u64) -> Result<()> {
        for (x, dt) in &self.segments {
            serde_json::to_writer(&mut out, &json!({"state": x.to_hex(), "dt": dt}))?;
            out.write_all(b"\n")?;
        }
        let summary = json!({
            "total_time": self.total_time,
            "flips": self.flips,
            "truncated": self.truncated,
            "seed": seed,
        });
        serde_json::to_writer(&mut out, &summary)?;
        out.write_all(b"\n")?;
        Ok(())
    }
}

/// Result of a run under a flip cutoff.
#[derive(Debug, Clone, PartialEq)]
pub enum TruncatedOutcome {
    Completed(Trajectory),
    /// The cutoff was exceeded after `flips` jumps.
    ErrorDeclared {
        flips: u64,
    },
}

/// Totals of a streamed run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub total_time: f64,
    pub flips: u64,
    /// False when a flip cutoff stopped the run early.
    pub completed: bool,
}

/// Acceptance test for a start state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StartVerdict {
    /// Fraction of truncated runs that declared an error.
    pub estimate: f64,
    /// `estimate <= ε/4`.
    pub accepted: bool,
}

/// `⌈16/ε²⌉`.
pub fn default_repetitions(epsilon: f64) -> usize {
    (16.0 / (epsilon * epsilon)).ceil() as usize
}

/// LRU map from state to its rate list.
#[derive(Debug)]
struct RateCache {
    capacity: usize,
    tick: u64,
    entries: HashMap<BitConfiguration, (Rc<GeneratorRates>, u64)>,
    order: BTreeMap<u64, BitConfiguration>,
}

impl RateCache {
    fn new(capacity: usize) -> Self {
        Self {
            capacity,
            tick: 0,
            entries: HashMap::with_capacity(capacity),
            order: BTreeMap::new(),
        }
    }

    fn get(&mut self, x: &BitConfiguration) -> Option<Rc<GeneratorRates>> {
        self.tick += 1;
        let tick = self.tick;
        let (rates, last) = self.entries.get_mut(x)?;
        self.order.remove(last);
        *last = tick;
        self.order.insert(tick, x.clone());
        Some(Rc::clone(rates))
    }

    fn insert(&mut self, x: BitConfiguration, rates: Rc<GeneratorRates>) {
        if self.entries.len() >= self.capacity {
            if let Some((_, oldest)) = self.order.pop_first() {
                self.entries.remove(&oldest);
            }
        }
        self.tick += 1;
        self.order.insert(self.tick, x.clone());
        self.entries.insert(x, (rates, self.tick));
    }
}

/// Simulator bound to one chain. Holds an optional rate cache, so each
/// thread should build its own.
#[derive(Debug)]
pub struct Gillespie<'c, H, O> {
    chain: &'c FixedNodeChain<H, O>,
    cache: Option<RateCache>,
}

impl<'c, H: RowAccess, O: AmplitudeOracle> Gillespie<'c, H, O> {
    /// Recomputes the rates at every visit.
    pub fn new(chain: &'c FixedNodeChain<H, O>) -> Self {
        Self { chain, cache: None }
    }

    /// Keeps the rate lists of the `capacity` most recently visited states.
    pub fn with_cache(chain: &'c FixedNodeChain<H, O>, capacity: usize) -> Self {
        Self {
            chain,
            cache: (capacity > 0).then(|| RateCache::new(capacity)),
        }
    }

    pub fn chain(&self) -> &'c FixedNodeChain<H, O> {
        self.chain
    }

    pub fn rates(&mut self, x: &BitConfiguration) -> Result<Rc<GeneratorRates>> {
        match &mut self.cache {
            None => Ok(Rc::new(self.chain.rates(x)?)),
            Some(cache) => {
                if let Some(r) = cache.get(x) {
                    return Ok(r);
                }
                let r = Rc::new(self.chain.rates(x)?);
                cache.insert(x.clone(), Rc::clone(&r));
                Ok(r)
            }
        }
    }

    /// `⌈4 t · maxdeg(H) · ‖H‖ / ε⌉`, saturating.
    pub fn cutoff(&self, t: f64, epsilon: f64) -> u64 {
        let h = self.chain.hamiltonian();
        let c = (4.0 / epsilon * t * h.max_row_degree() as f64 * h.norm_bound()).ceil();
        if c >= u64::MAX as f64 {
            u64::MAX
        } else {
            c as u64
        }
    }

    /// Runs for time `t`, handing every segment to `observer` instead of
    /// storing the path. With `cutoff = Some(c)` the run stops as soon as the
    /// flip count exceeds `c`.
    pub fn run_observed(
        &mut self,
        x_in: &BitConfiguration,
        t: f64,
        rng: &mut RandomSource,
        cutoff: Option<u64>,
        mut observer: impl FnMut(&BitConfiguration, f64),
    ) -> Result<RunSummary> {
        if !(t >= 0.0) {
            return Err(Error::InvalidArgument(format!("run time must be nonnegative, got {t}")));
        }
        let mut x = x_in.clone();
        let mut clock = 0.0;
        let mut flips = 0u64;
        loop {
            let rates = self.rates(&x)?;
            if t == 0.0 {
                observer(&x, 0.0);
                break;
            }
            let (dt, next) = step(&rates, rng)?;
            if clock + dt >= t {
                observer(&x, t - clock);
                break;
            }
            observer(&x, dt);
            clock += dt;
            flips += 1;
            if cutoff.is_some_and(|c| flips > c) {
                return Ok(RunSummary {
                    total_time: clock,
                    flips,
                    completed: false,
                });
            }
            x = next;
        }
        Ok(RunSummary {
            total_time: t,
            flips,
            completed: true,
        })
    }

    pub fn run(&mut self, x_in: &BitConfiguration, t: f64, rng: &mut RandomSource) -> Result<Trajectory> {
        let mut segments = Vec::new();
        let summary = self.run_observed(x_in, t, rng, None, |x, dt| segments.push((x.clone(), dt)))?;
        Ok(Trajectory {
            segments,
            total_time: summary.total_time,
            flips: summary.flips,
            truncated: false,
        })
    }

    pub fn run_truncated(
        &mut self,
        x_in: &BitConfiguration,
        t: f64,
        epsilon: f64,
        rng: &mut RandomSource,
    ) -> Result<TruncatedOutcome> {
        check_epsilon(epsilon)?;
        let cutoff = self.cutoff(t, epsilon);
        let mut segments = Vec::new();
        let summary = self.run_observed(x_in, t, rng, Some(cutoff), |x, dt| segments.push((x.clone(), dt)))?;
        Ok(if summary.completed {
            TruncatedOutcome::Completed(Trajectory {
                segments,
                total_time: summary.total_time,
                flips: summary.flips,
                truncated: true,
            })
        } else {
            TruncatedOutcome::ErrorDeclared { flips: summary.flips }
        })
    }

    /// Estimates how often the truncated run from `x` declares an error.
    pub fn verify_start_state(
        &mut self,
        x: &BitConfiguration,
        epsilon: f64,
        t: f64,
        repetitions: usize,
        rng: &mut RandomSource,
    ) -> Result<StartVerdict> {
        check_epsilon(epsilon)?;
        if repetitions == 0 {
            return Err(Error::InvalidArgument("at least one repetition is needed".into()));
        }
        let cutoff = self.cutoff(t, epsilon);
        let mut errors = 0usize;
        for _ in 0..repetitions {
            if !self.run_observed(x, t, rng, Some(cutoff), |_, _| {})?.completed {
                errors += 1;
            }
        }
        let estimate = errors as f64 / repetitions as f64;
        Ok(StartVerdict {
            estimate,
            accepted: estimate <= epsilon / 4.0,
        })
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    Ok(())
}

/// `(T - τ₀)⁻¹ ∫_{τ₀}^{T} f(ξ(τ)) dτ` over a stored path.
pub fn time_average(traj: &Trajectory, f: impl Fn(&BitConfiguration) -> f64, tau0: f64) -> Result<f64> {
    if !(tau0 < traj.total_time) || tau0 < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "burn-in {tau0} must lie in [0, {})",
            traj.total_time
        )));
    }
    let mut avg = TimeAverage::new(tau0);
    for (x, dt) in &traj.segments {
        avg.observe(f(x), *dt);
    }
    Ok(avg.mean())
}

/// Streaming form of [`time_average`]: feed `(f(state), holding time)` in
/// path order.
#[derive(Debug, Clone, Copy)]
pub struct TimeAverage {
    tau0: f64,
    clock: f64,
    integral: f64,
}

impl TimeAverage {
    pub fn new(tau0: f64) -> Self {
        Self {
            tau0,
            clock: 0.0,
            integral: 0.0,
        }
    }

    pub fn observe(&mut self, value: f64, dt: f64) {
        let start = self.clock.max(self.tau0);
        self.clock += dt;
        if self.clock > start {
            self.integral += value * (self.clock - start);
        }
    }

    pub fn mean(&self) -> f64 {
        self.integral / (self.clock - self.tau0)
    }
}
