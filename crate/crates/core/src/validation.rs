//! Exact invariant battery on a small Haldane-Shastry ring.
//!
//! Each check reports a residual against a tolerance; nothing here is
//! random.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::amplitude::AmplitudeOracle;
use crate::error::{Error, Result};
use crate::exact::{self, DenseSector, ExactEvolution};
use crate::fixed_node::{generator_rates, ground_energy};
use crate::haldane_shastry::HaldaneShastry;
use crate::hamiltonian::{is_stoquastic, RowAccess, DEFAULT_STATE_CAP};

/// Largest ring accepted by [`validate`].
pub const MAX_VALIDATION_SITES: usize = 10;

/// Times at which the mixing bound is evaluated.
pub const MIXING_TIMES: [f64; 6] = [0.1, 0.5, 1.0, 2.0, 5.0, 10.0];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    fn new(name: &str, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            residual,
            tolerance,
            passed: residual <= tolerance,
            note: None,
        }
    }

    fn with_note(mut self, note: String) -> Self {
        self.note = Some(note);
        self
    }
}

fn sup(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |a, b| a.max(b.abs()))
}

/// Four-qubit ground state amplitudes indexed by integer value.
pub fn four_site_amplitudes() -> Result<Vec<f64>> {
    let hs = HaldaneShastry::new(4)?;
    let (basis, amps) = hs.normalized_amplitudes()?;
    let mut v = vec![0.0; 16];
    for (x, a) in basis.iter().zip(amps) {
        v[x.as_u64() as usize] = a;
    }
    Ok(v)
}

/// Runs every check on the half-filling sector of the ring of length
/// `sites`.
pub fn validate(sites: usize) -> Result<Vec<Check>> {
    if sites > MAX_VALIDATION_SITES {
        return Err(Error::InvalidArgument(format!(
            "validation runs on rings of at most {MAX_VALIDATION_SITES} sites, got {sites}"
        )));
    }
    let hs = HaldaneShastry::new(sites)?;
    let h = hs.hamiltonian();
    let basis = hs.sector().states(sites, DEFAULT_STATE_CAP)?;
    let sector = DenseSector::new(basis, &hs)?;
    let psi = sector.amplitudes().clone();
    let pi = sector.stationary();
    let n = sector.len();

    let hd = sector.hamiltonian(&h)?;
    let fd = sector.fixed_node(&h, &hs)?;
    let gaps = exact::spectral_gaps(&hd, &fd)?;
    let lambda1 = gaps.lambda1;
    let gd = sector.generator(&h, &hs, lambda1)?;

    let mut checks = Vec::new();
    checks.push(Check::new(
        "fixed_node_ground_energy",
        (gaps.lambda1_fixed_node - lambda1).abs(),
        1e-9,
    ));
    checks.push(Check::new(
        "row_sum_ground_energy",
        sup(sector
            .basis()
            .iter()
            .map(|x| ground_energy(&h, &hs, x).map(|e| e - lambda1))
            .collect::<Result<Vec<_>>>()?),
        1e-9,
    ));
    checks.push(Check::new(
        "fixed_node_eigenvector",
        sup((&fd * &psi - &hd * &psi).iter().copied()),
        1e-9,
    ));
    checks.push(Check::new("fixed_node_symmetry", exact::max_asymmetry(&fd), 1e-12));
    checks.push(Check::new(
        "fixed_node_gap_not_smaller",
        (gaps.gamma - gaps.gamma_fixed_node).max(0.0),
        1e-9,
    ));

    let mut rate_gap: f64 = 0.0;
    for (i, x) in sector.basis().iter().enumerate() {
        let r = generator_rates(&h, &hs, lambda1, x)?;
        rate_gap = rate_gap.max((r.total_rate - (fd[(i, i)] - lambda1)).abs());
    }
    checks.push(Check::new("total_rate_matches_diagonal", rate_gap, 1e-9));
    checks.push(Check::new(
        "generator_column_sums",
        sup(gd.row_sum().iter().copied()),
        1e-9,
    ));
    let min_off = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| gd[(i, j)])
        .fold(0.0f64, f64::min);
    checks.push(Check::new("generator_rates_nonnegative", -min_off, 0.0));
    checks.push(Check::new(
        "generator_stationary",
        sup((&gd * &pi).iter().copied()),
        1e-9,
    ));
    let balance = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| gd[(i, j)] * pi[j] - gd[(j, i)] * pi[i]);
    checks.push(Check::new("generator_detailed_balance", sup(balance), 1e-9));
    let similar = DMatrix::from_fn(n, n, |i, j| {
        let m = if i == j { lambda1 - fd[(i, j)] } else { -fd[(i, j)] };
        psi[i] * m / psi[j]
    });
    checks.push(Check::new(
        "generator_similarity",
        sup((&gd - similar).iter().copied()),
        1e-9,
    ));

    let evolution = ExactEvolution::from_generator(&gd, &psi)?;
    let spectrum = evolution.eigenvalues();
    checks.push(Check::new("generator_top_eigenvalue", spectrum[n - 1].abs(), 1e-9));
    checks.push(Check::new(
        "generator_second_eigenvalue",
        (spectrum[n - 2] + gaps.gamma_fixed_node).max(0.0),
        1e-9,
    ));

    let mut excess = f64::NEG_INFINITY;
    let mut mass: f64 = 0.0;
    for &t in &MIXING_TIMES {
        for start in 0..n {
            let pt = evolution.distribution(start, t);
            mass = mass.max((pt.sum() - 1.0).abs());
            let dist = exact::tv_distance(pt.as_slice(), pi.as_slice())?;
            excess = excess.max(dist - exact::mixing_bound(gaps.gamma, pi[start], t));
        }
    }
    checks.push(Check::new("evolution_conserves_mass", mass, 1e-9));
    checks.push(
        Check::new("mixing_bound", excess.max(0.0), 1e-9)
            .with_note(format!("largest distance minus bound {excess:.3e}")),
    );
    let p = evolution.propagator(1.0);
    let balance = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| pi[j] * p[(i, j)] - pi[i] * p[(j, i)]);
    checks.push(Check::new("propagator_detailed_balance", sup(balance), 1e-9));

    let rate = exact::expected_flip_rate(&fd, &psi);
    let bound = h.max_row_degree() as f64 * h.norm_bound();
    checks.push(
        Check::new("flip_rate_bound", (rate - bound).max(0.0), 0.0)
            .with_note(format!("rate {rate:.6} bound {bound:.6}")),
    );

    let stoquastic = is_stoquastic(&h, Some(&hs.sector()), DEFAULT_STATE_CAP)?;
    checks.push(Check::new(
        "not_stoquastic",
        if stoquastic.is_stoquastic() == Some(false) {
            0.0
        } else {
            1.0
        },
        0.0,
    ));

    let residual = exact::wick_check(&four_site_amplitudes()?)?;
    checks.push(
        Check::new("four_site_wick_residual", (residual + 1.0 / 6.0).abs(), 1e-12)
            .with_note(format!("residual {residual:.15}")),
    );

    let mut ratio_gap: f64 = 0.0;
    for x in sector.basis() {
        for y in sector.basis() {
            let gap = hs.ratio(x, y)? - hs.ratio_from_scratch(x, y)?;
            ratio_gap = ratio_gap.max(gap.abs());
        }
    }
    checks.push(Check::new("incremental_ratio", ratio_gap, 1e-12));
    Ok(checks)
}
