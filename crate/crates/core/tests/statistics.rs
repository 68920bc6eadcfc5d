//! Sampling checks that are statistical rather than exact.

mod common;

use std::collections::HashMap;

use fixnode::diagnostics::{discretize, error_bar, split_rhat, tau_integrated, GridSampler};
use fixnode::exact::tv_distance;
use fixnode::gillespie::time_average;
use fixnode::haldane_shastry::{averaged_zz, exact_zz};
use fixnode::metropolis::{GraphMode, SwapMetropolis};
use fixnode::{BitConfiguration, FixedNodeChain, Gillespie, HaldaneShastry, RandomSource, SparseHamiltonian};

use common::mean_and_se;

fn alternating(sites: usize) -> BitConfiguration {
    BitConfiguration::from_ones(sites, (0..sites).step_by(2))
}

fn chain(sites: usize) -> FixedNodeChain<SparseHamiltonian, HaldaneShastry> {
    let hs = HaldaneShastry::new(sites).unwrap();
    FixedNodeChain::new(hs.hamiltonian(), hs, alternating(sites)).unwrap()
}

fn mh_histogram(mode: GraphMode, steps: u64, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let hs = HaldaneShastry::new(4).unwrap();
    let (basis, pi) = hs.stationary_distribution().unwrap();
    let index: HashMap<BitConfiguration, usize> = basis.iter().cloned().enumerate().map(|(i, x)| (x, i)).collect();
    let mut mh = SwapMetropolis::new(hs.hamiltonian(), hs, mode).unwrap();
    let mut counts = vec![0u64; basis.len()];
    let mut rng = RandomSource::new(seed);
    mh.run_observed(&alternating(4), steps, &mut rng, |x| counts[index[x]] += 1)
        .unwrap();
    (counts.iter().map(|c| *c as f64 / steps as f64).collect(), pi)
}

#[test]
fn metropolis_chains_sample_the_four_site_ground_state() {
    let (h, pi) = mh_histogram(GraphMode::FromH, 1_000_000, 31);
    let (f, _) = mh_histogram(GraphMode::FromF, 1_000_000, 32);
    let dh = tv_distance(&h, &pi).unwrap();
    let df = tv_distance(&f, &pi).unwrap();
    let cross = tv_distance(&h, &f).unwrap();
    assert!(dh <= 0.02, "mh-h distance {dh}");
    assert!(df <= 0.02, "mh-f distance {df}");
    assert!(cross <= 0.03, "mh-h vs mh-f {cross}");
}

#[test]
fn ctmc_error_bars_match_the_spread_of_independent_runs() {
    let c = chain(4);
    let mut g = Gillespie::with_cache(&c, 64);
    let (t, tau0, h) = (2000.0, 10.0, 0.05);
    let mut means = Vec::new();
    let mut bars = Vec::new();
    for k in 0..200 {
        let mut rng = RandomSource::for_chain(77, k);
        let mut grid = GridSampler::new(h, tau0).unwrap();
        g.run_observed(c.reference(), t, &mut rng, None, |x, dt| {
            grid.observe(averaged_zz(x, 1), dt)
        })
        .unwrap();
        let series = grid.finish(t, "run").unwrap();
        let tau = tau_integrated(&series.values).unwrap();
        means.push(series.mean());
        bars.push(error_bar(&series.values, tau.tau));
    }
    let (grand, se) = mean_and_se(&means);
    let spread = se * (means.len() as f64).sqrt();
    let typical = bars.iter().sum::<f64>() / bars.len() as f64;
    let ratio = spread / typical;
    assert!(
        (0.5..=2.0).contains(&ratio),
        "observed spread {spread} vs mean error bar {typical}"
    );
    let exact = 4.0 * exact_zz(4, 1);
    assert!((grand - exact).abs() < 4.0 * se, "{grand} +- {se} vs {exact}");
}

#[test]
fn independent_ctmc_chains_agree_by_split_rhat() {
    let c = chain(8);
    let mut g = Gillespie::with_cache(&c, 1 << 10);
    let series: Vec<Vec<f64>> = (0..4)
        .map(|k| {
            let mut rng = RandomSource::for_chain(5, k);
            let mut grid = GridSampler::new(0.5, 50.0).unwrap();
            g.run_observed(c.reference(), 20_000.0, &mut rng, None, |x, dt| {
                grid.observe(averaged_zz(x, 1), dt)
            })
            .unwrap();
            grid.finish(20_000.0, "chain").unwrap().values
        })
        .collect();
    let refs: Vec<&[f64]> = series.iter().map(Vec::as_slice).collect();
    let rhat = split_rhat(&refs).unwrap();
    assert!(rhat < 1.01, "split R-hat {rhat}");
}

#[test]
fn grid_average_converges_to_time_average() {
    let c = chain(6);
    let mut g = Gillespie::new(&c);
    let traj = g.run(c.reference(), 500.0, &mut RandomSource::new(8)).unwrap();
    let f = |x: &BitConfiguration| averaged_zz(x, 1);
    let exact = time_average(&traj, f, 0.0).unwrap();
    let errors: Vec<f64> = [1.0, 0.1, 0.01, 0.001]
        .iter()
        .map(|&h| (discretize(&traj, f, h, 0.0).unwrap().mean() - exact).abs())
        .collect();
    assert!(errors[3] <= 1e-3, "errors {errors:?}");
    assert!(errors[3] < errors[0], "errors {errors:?}");
}

#[test]
fn streaming_grid_matches_stored_path() {
    let c = chain(6);
    let mut g = Gillespie::new(&c);
    let traj = g.run(c.reference(), 300.0, &mut RandomSource::new(9)).unwrap();
    for (h, tau0) in [(0.7, 0.0), (0.05, 12.5), (3.0, 100.0)] {
        let stored = discretize(&traj, |x| averaged_zz(x, 2), h, tau0).unwrap();
        let mut grid = GridSampler::new(h, tau0).unwrap();
        for (x, dt) in &traj.segments {
            grid.observe(averaged_zz(x, 2), *dt);
        }
        let streamed = grid.finish(traj.total_time, "stream").unwrap();
        assert_eq!(stored.values, streamed.values, "h = {h}, tau0 = {tau0}");
    }
}
