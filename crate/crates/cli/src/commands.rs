use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use fixnode::diagnostics::{ChainDiagnostics, DiscreteSeries, GridSampler};
use fixnode::exact::{self, DenseSector};
use fixnode::gillespie::default_repetitions;
use fixnode::haldane_shastry::averaged_zz;
use fixnode::hamiltonian::DEFAULT_STATE_CAP;
use fixnode::metropolis::{write_series_csv, GraphMode, NamedObservable, SwapMetropolis};
use fixnode::validation::{self, four_site_amplitudes, MAX_VALIDATION_SITES};
use fixnode::{
    AmplitudeOracle, BitConfiguration, FixedNodeChain, Gillespie, HaldaneShastry, RandomSource, SparseHamiltonian,
    Trajectory,
};

use crate::config::{positive, require, RunConfig, MODEL};
use crate::error::CliError;
use crate::{ChainKind, CorruptArgs, GapArgs, SampleArgs, ValidateArgs, VerifyStartArgs, WickArgs};

/// Largest ring for the dense gap study.
pub const MAX_GAP_SITES: usize = 14;
/// Largest ring for the corrupted-state study.
pub const MAX_CORRUPT_SITES: usize = 20;
/// Default number of grid points for CTMC series.
pub const DEFAULT_SERIES_LENGTH: f64 = 1e6;
/// Default correlator run: simulated time and burn-in.
pub const DEFAULT_T: f64 = 1e6;
pub const DEFAULT_TAU0: f64 = 100.0;
pub const DEFAULT_STEPS: u64 = 5_000_000;
const RATE_CACHE_CAPACITY: usize = 1 << 16;

pub struct Context {
    pub cfg: RunConfig,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub pool: rayon::ThreadPool,
}

impl Context {
    fn seed(&self) -> Result<u64, CliError> {
        require(self.seed, self.cfg.seed, "seed")
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(File::create(path)?))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn even_ring(sites: usize) -> Result<HaldaneShastry, CliError> {
    if sites < 4 || sites % 2 == 1 {
        return Err(CliError::Config(format!("L must be even and at least 4, got {sites}")));
    }
    Ok(HaldaneShastry::new(sites)?)
}

fn alternating(sites: usize) -> BitConfiguration {
    BitConfiguration::from_ones(sites, (0..sites).step_by(2))
}

fn check_distances(distances: &[usize], sites: usize) -> Result<(), CliError> {
    if distances.is_empty() || distances.iter().any(|&d| d == 0 || d >= sites) {
        return Err(CliError::Config(format!(
            "distances must lie in 1..{sites}, got {distances:?}"
        )));
    }
    Ok(())
}

fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

pub fn gap(ctx: &Context, args: &GapArgs) -> Result<(), CliError> {
    if args.max_l > MAX_GAP_SITES || args.min_l < 4 || args.min_l > args.max_l {
        return Err(CliError::Config(format!(
            "gap study needs 4 <= min-l <= max-l <= {MAX_GAP_SITES}, got {}..{}",
            args.min_l, args.max_l
        )));
    }
    let sizes: Vec<usize> = (args.min_l..=args.max_l).filter(|l| l % 2 == 0).collect();
    let rows = ctx.pool.install(|| {
        sizes
            .par_iter()
            .map(|&sites| -> Result<_, CliError> {
                let hs = even_ring(sites)?;
                let h = hs.hamiltonian();
                let sector = DenseSector::new(hs.sector().states(sites, DEFAULT_STATE_CAP)?, &hs)?;
                let gaps = exact::spectral_gaps(&sector.hamiltonian(&h)?, &sector.fixed_node(&h, &hs)?)?;
                Ok((sites, gaps))
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    let path = ctx.path("gap.csv");
    let mut w = csv::Writer::from_writer(create(&path)?);
    w.write_record(["L", "gamma", "gamma_F", "lambda1", "inv_gamma", "inv_gamma_F"])?;
    for (sites, g) in &rows {
        w.write_record([
            sites.to_string(),
            g.gamma.to_string(),
            g.gamma_fixed_node.to_string(),
            g.lambda1.to_string(),
            (1.0 / g.gamma).to_string(),
            (1.0 / g.gamma_fixed_node).to_string(),
        ])?;
    }
    w.flush()?;
    if rows.len() >= 2 {
        let x: Vec<f64> = rows.iter().map(|(l, _)| (*l as f64).ln()).collect();
        let y: Vec<f64> = rows.iter().map(|(_, g)| g.gamma_fixed_node.ln()).collect();
        println!("slope of ln(gamma_F) against ln(L): {:.4}", least_squares_slope(&x, &y));
    }
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Serialize)]
struct SampleReport {
    model: &'static str,
    chain: String,
    #[serde(rename = "L")]
    sites: usize,
    seed: u64,
    chains: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    acceptance_rates: Option<Vec<f64>>,
    diagnostics: Vec<ChainDiagnostics>,
}

struct CtmcRun {
    series: Vec<DiscreteSeries>,
    flips: u64,
    total_time: f64,
    path: Option<Trajectory>,
}

pub fn sample(ctx: &Context, args: &SampleArgs) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let seed = ctx.seed()?;
    let sites = require(args.sites, cfg.sites, "L")?;
    let hs = even_ring(sites)?;
    let kind = match (args.chain, cfg.chain.as_deref()) {
        (Some(k), _) => k,
        (None, None | Some("ctmc")) => ChainKind::Ctmc,
        (None, Some("mh-h")) => ChainKind::MhH,
        (None, Some("mh-f")) => ChainKind::MhF,
        (None, Some(other)) => return Err(CliError::Config(format!("unknown chain {other:?}"))),
    };
    let distances = args
        .distances
        .clone()
        .or(cfg.observables.clone())
        .unwrap_or_else(|| vec![1]);
    check_distances(&distances, sites)?;
    let chains = args.chains.or(cfg.chains).unwrap_or(1).max(1);
    match kind {
        ChainKind::Ctmc => sample_ctmc(ctx, args, hs, seed, &distances, chains),
        ChainKind::MhH => sample_mh(ctx, args, hs, GraphMode::FromH, seed, &distances, chains),
        ChainKind::MhF => sample_mh(ctx, args, hs, GraphMode::FromF, seed, &distances, chains),
    }
}

fn print_estimates(diagnostics: &[ChainDiagnostics]) {
    for d in diagnostics {
        println!(
            "{}: {:.6} +- {:.6} (tau_int {:.3}, tau_normalized {:.3}, r_hat {:.4})",
            d.observable, d.mu_hat, d.sigma_hat, d.tau_int, d.tau_normalized, d.r_hat
        );
    }
}

fn sample_ctmc(
    ctx: &Context,
    args: &SampleArgs,
    hs: HaldaneShastry,
    seed: u64,
    distances: &[usize],
    chains: u64,
) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let sites = hs.sites();
    let t = positive(args.t.or(cfg.t).unwrap_or(DEFAULT_T), "t")?;
    let tau0 = args.tau0.or(cfg.tau0).unwrap_or(DEFAULT_TAU0);
    if !(0.0..t).contains(&tau0) {
        return Err(CliError::Config(format!("tau0 must lie in [0, t), got {tau0}")));
    }
    let h = positive(args.h.or(cfg.h).unwrap_or((t - tau0) / DEFAULT_SERIES_LENGTH), "h")?;
    let epsilon = args
        .epsilon
        .or(cfg.epsilon)
        .map(|e| positive(e, "epsilon"))
        .transpose()?;
    let chain = FixedNodeChain::new(hs.hamiltonian(), hs, alternating(sites))?;

    let runs: Vec<CtmcRun> = ctx.pool.install(|| {
        (0..chains)
            .into_par_iter()
            .map(|k| -> Result<CtmcRun, CliError> {
                let mut g = Gillespie::with_cache(&chain, RATE_CACHE_CAPACITY);
                let mut rng = RandomSource::for_chain(seed, k);
                let cutoff = epsilon.map(|e| g.cutoff(t, e));
                let mut samplers = distances
                    .iter()
                    .map(|_| GridSampler::new(h, tau0))
                    .collect::<Result<Vec<_>, _>>()?;
                let keep_path = args.write_path && k == 0;
                let mut segments = Vec::new();
                let start = chain.oracle().random_support_state(&mut rng);
                let summary = g.run_observed(&start, t, &mut rng, cutoff, |x, dt| {
                    for (s, &d) in samplers.iter_mut().zip(distances) {
                        s.observe(averaged_zz(x, d), dt);
                    }
                    if keep_path {
                        segments.push((x.clone(), dt));
                    }
                })?;
                if !summary.completed {
                    return Err(CliError::Truncation {
                        chain: k,
                        flips: summary.flips,
                    });
                }
                let series = samplers
                    .into_iter()
                    .map(|s| s.finish(summary.total_time, format!("ctmc chain {k}")))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(CtmcRun {
                    series,
                    flips: summary.flips,
                    total_time: summary.total_time,
                    path: keep_path.then(|| Trajectory {
                        segments,
                        total_time: summary.total_time,
                        flips: summary.flips,
                        truncated: epsilon.is_some(),
                    }),
                })
            })
            .collect::<Result<Vec<_>, _>>()
    })?;

    let flips: u64 = runs.iter().map(|r| r.flips).sum();
    let total_time: f64 = runs.iter().map(|r| r.total_time).sum();
    let mut diagnostics = Vec::new();
    for (i, &d) in distances.iter().enumerate() {
        let series: Vec<DiscreteSeries> = runs.iter().map(|r| r.series[i].clone()).collect();
        diagnostics.push(ChainDiagnostics::from_chains(
            format!("M{d}"),
            &series,
            tau0,
            total_time,
            flips,
        )?);
    }
    if let Some(path) = runs.first().and_then(|r| r.path.as_ref()) {
        let mut w = create(&ctx.path("path_chain0.jsonl"))?;
        path.write_jsonl(&mut w, seed)?;
        w.flush()?;
    }
    print_estimates(&diagnostics);
    println!("flips {flips}, simulated time {total_time}");
    write_json(
        &ctx.path("sample.json"),
        &SampleReport {
            model: MODEL,
            chain: "ctmc".into(),
            sites,
            seed,
            chains,
            acceptance_rates: None,
            diagnostics,
        },
    )
}

/// Post-burn-in values of `M_d` for each distance, plus the acceptance rate.
fn mh_series<O: AmplitudeOracle>(
    mh: &mut SwapMetropolis<SparseHamiltonian, O>,
    start: &BitConfiguration,
    burn: u64,
    steps: u64,
    distances: &[usize],
    rng: &mut RandomSource,
    mut record: Option<&mut Vec<BitConfiguration>>,
) -> Result<(Vec<Vec<f64>>, f64), CliError> {
    let mut values: Vec<Vec<f64>> = distances.iter().map(|_| Vec::with_capacity(steps as usize)).collect();
    let mut count = 0u64;
    let accepted = mh.run_observed(start, burn + steps, rng, |x| {
        count += 1;
        if count > burn {
            for (v, &d) in values.iter_mut().zip(distances) {
                v.push(averaged_zz(x, d));
            }
            if let Some(r) = record.as_deref_mut() {
                r.push(x.clone());
            }
        }
    })?;
    Ok((values, accepted as f64 / (burn + steps) as f64))
}

fn sample_mh(
    ctx: &Context,
    args: &SampleArgs,
    hs: HaldaneShastry,
    mode: GraphMode,
    seed: u64,
    distances: &[usize],
    chains: u64,
) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let sites = hs.sites();
    let steps = args.steps.or(cfg.steps).unwrap_or(DEFAULT_STEPS);
    let burn = args.tau0.or(cfg.tau0).map_or(steps / 5, |b| b as u64);
    if steps < 16 {
        return Err(CliError::Config(format!("at least 16 steps are needed, got {steps}")));
    }
    let h = hs.hamiltonian();
    let runs = ctx.pool.install(|| {
        (0..chains)
            .into_par_iter()
            .map(|k| -> Result<_, CliError> {
                let mut mh = SwapMetropolis::new(h.clone(), hs.clone(), mode)?;
                let mut rng = RandomSource::for_chain(seed, k);
                let mut states = Vec::new();
                let record = (args.write_path && k == 0).then_some(&mut states);
                let start = hs.random_support_state(&mut rng);
                let (values, rate) = mh_series(&mut mh, &start, burn, steps, distances, &mut rng, record)?;
                Ok((values, rate, states))
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    let total = steps * chains;
    let mut diagnostics = Vec::new();
    for (i, &d) in distances.iter().enumerate() {
        let series: Vec<DiscreteSeries> = runs
            .iter()
            .enumerate()
            .map(|(k, r)| DiscreteSeries::new(r.0[i].clone(), 1.0, format!("{mode} chain {k}")))
            .collect();
        diagnostics.push(ChainDiagnostics::from_chains(
            format!("M{d}"),
            &series,
            burn as f64,
            total as f64,
            total,
        )?);
    }
    if args.write_path {
        let observables: Vec<(String, usize)> = distances.iter().map(|&d| (format!("M{d}"), d)).collect();
        let fns: Vec<_> = observables
            .iter()
            .map(|&(_, d)| move |x: &BitConfiguration| averaged_zz(x, d))
            .collect();
        let named: Vec<NamedObservable<'_>> = observables
            .iter()
            .zip(&fns)
            .map(|((n, _), f)| (n.as_str(), f as &dyn Fn(&BitConfiguration) -> f64))
            .collect();
        write_series_csv(create(&ctx.path("series_chain0.csv"))?, &runs[0].2, &named)?;
    }
    print_estimates(&diagnostics);
    write_json(
        &ctx.path("sample.json"),
        &SampleReport {
            model: MODEL,
            chain: mode.to_string(),
            sites,
            seed,
            chains,
            acceptance_rates: Some(runs.iter().map(|r| r.1).collect()),
            diagnostics,
        },
    )
}

pub fn validate(ctx: &Context, args: &ValidateArgs) -> Result<(), CliError> {
    let sites = args.sites.or(ctx.cfg.sites).unwrap_or(4);
    if sites > MAX_VALIDATION_SITES {
        return Err(CliError::Config(format!(
            "validate needs L <= {MAX_VALIDATION_SITES}, got {sites}"
        )));
    }
    even_ring(sites)?;
    let checks = validation::validate(sites)?;
    for c in &checks {
        println!(
            "{} {} residual {:.3e} tolerance {:.1e}{}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.residual,
            c.tolerance,
            c.note.as_ref().map(|n| format!(" ({n})")).unwrap_or_default()
        );
    }
    write_json(&ctx.path("validate.json"), &json!({ "L": sites, "checks": checks }))?;
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(failed.join(", ")))
    }
}

pub fn corrupt(ctx: &Context, args: &CorruptArgs) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let sites = require(args.sites, cfg.sites, "L")?;
    if sites > MAX_CORRUPT_SITES {
        return Err(CliError::Config(format!(
            "corrupt needs L <= {MAX_CORRUPT_SITES}, got {sites}"
        )));
    }
    let hs = even_ring(sites)?;
    let kappas = args
        .kappa
        .clone()
        .or(cfg.kappa.clone().map(|k| k.into_vec()))
        .ok_or_else(|| CliError::Config("kappa must be given".into()))?;
    if kappas.iter().any(|k| k.is_nan() || *k <= 0.0 || k.is_infinite()) {
        return Err(CliError::Config(format!("kappa must be positive, got {kappas:?}")));
    }
    let seeds = match args.seeds.clone().or(cfg.seeds.clone()) {
        Some(s) => s,
        None => vec![ctx.seed()?],
    };
    let steps = args.steps.or(cfg.steps).unwrap_or(1_000_000);
    if steps < 16 {
        return Err(CliError::Config(format!("at least 16 steps are needed, got {steps}")));
    }
    let distances = args
        .distances
        .clone()
        .or(cfg.observables.clone())
        .unwrap_or_else(|| vec![1]);
    check_distances(&distances, sites)?;
    let burn = steps / 5;
    let h = hs.hamiltonian();
    let jobs: Vec<(f64, u64)> = kappas
        .iter()
        .flat_map(|&k| seeds.iter().map(move |&s| (k, s)))
        .collect();
    let rows = ctx.pool.install(|| {
        jobs.par_iter()
            .map(|&(kappa, seed)| -> Result<_, CliError> {
                let corrupted = hs.corrupt(kappa, seed)?;
                let mut taus = Vec::new();
                for mode in [GraphMode::FromH, GraphMode::FromF] {
                    let mut mh = SwapMetropolis::new(h.clone(), corrupted.table.clone(), mode)?;
                    let mut rng = RandomSource::new(seed);
                    let start = hs.random_support_state(&mut rng);
                    let (values, _) = mh_series(&mut mh, &start, burn, steps, &distances, &mut rng, None)?;
                    let t = values
                        .iter()
                        .map(|v| fixnode::diagnostics::tau_integrated(v).map(|e| e.tau))
                        .collect::<Result<Vec<_>, _>>()?;
                    taus.push(t);
                }
                Ok((kappa, seed, corrupted.l1_distance, taus))
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    let path = ctx.path("corrupt.csv");
    let mut w = csv::Writer::from_writer(create(&path)?);
    let mut header = vec!["kappa".to_string(), "seed".to_string(), "tv".to_string()];
    for d in &distances {
        header.push(format!("tau_mh_h_d{d}"));
        header.push(format!("tau_mh_f_d{d}"));
    }
    w.write_record(&header)?;
    for (kappa, seed, tv, taus) in &rows {
        let mut record = vec![kappa.to_string(), seed.to_string(), tv.to_string()];
        for (h, f) in taus[0].iter().zip(&taus[1]) {
            record.push(h.to_string());
            record.push(f.to_string());
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    println!("wrote {}", path.display());
    Ok(())
}

pub fn wick(ctx: &Context, args: &WickArgs) -> Result<(), CliError> {
    let amplitudes = match &args.amplitudes {
        Some(a) => a.clone(),
        None => four_site_amplitudes()?,
    };
    let residual = exact::wick_check(&amplitudes)?;
    let report = json!({ "residual": residual });
    println!("{report}");
    write_json(&ctx.path("wick.json"), &report)
}

pub fn verify_start(ctx: &Context, args: &VerifyStartArgs) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let seed = ctx.seed()?;
    let sites = require(args.sites, cfg.sites, "L")?;
    let hs = even_ring(sites)?;
    let epsilon = positive(args.epsilon.or(cfg.epsilon).unwrap_or(0.1), "epsilon")?;
    let t = positive(args.t.or(cfg.t).unwrap_or(1.0), "t")?;
    let repetitions = args
        .repetitions
        .or(cfg.repetitions)
        .unwrap_or_else(|| default_repetitions(epsilon));
    let mut rng = RandomSource::new(seed);
    let state = match args.state.as_ref().or(cfg.state.as_ref()) {
        Some(hex) => BitConfiguration::from_hex(sites, hex)?,
        None => hs.random_support_state(&mut rng),
    };
    if !hs.in_support(&state) {
        return Err(CliError::Config(format!(
            "state {} is outside the support",
            state.to_hex()
        )));
    }
    let chain = FixedNodeChain::new(hs.hamiltonian(), hs, alternating(sites))?;
    let mut g = Gillespie::with_cache(&chain, RATE_CACHE_CAPACITY);
    let verdict = g.verify_start_state(&state, epsilon, t, repetitions, &mut rng)?;
    let report = json!({
        "state": state.to_hex(),
        "epsilon": epsilon,
        "t": t,
        "repetitions": repetitions,
        "cutoff": g.cutoff(t, epsilon),
        "estimate": verdict.estimate,
        "accepted": verdict.accepted,
    });
    println!("{report}");
    write_json(&ctx.path("verify_start.json"), &report)?;
    if verdict.accepted {
        Ok(())
    } else {
        Err(CliError::Validation(format!(
            "error estimate {} exceeds epsilon/4 = {}",
            verdict.estimate,
            epsilon / 4.0
        )))
    }
}
