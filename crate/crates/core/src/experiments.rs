//! Seeded grid scans and Monte Carlo runs behind the figures.
//!
//! Every sample draws from its own stream, [`sample_rng`]`(seed, index)`,
//! so output is identical for any number of worker threads.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bloch::{bloch_from_density, DensityMatrix};
use crate::bounds::{energy_stats, tau_bd, MIDPOINT_TOL};
use crate::dynamics::{first_hit_time_profile, noisy_reach, AngleProfile, NoiseParams, DEFAULT_DT};
use crate::error::{QslError, Result};
use crate::oat::{oat_oqsl, oat_point, OatParams};
use crate::reachable::{s0_density, sample_s0, S0Descriptor};
use crate::sampling::{random_mixed_state, random_pure_state, random_state_with_norm2, sample_rng};
use crate::spectrum::{oqsl, Spectrum};
use crate::table::Table;
use crate::threelevel::{
    borderline_value, circle_maximizer, classify, h_minima, hit_time_els3, tau_bd_diag, tau_circle_max, Region,
    XYPoint,
};

/// Named scalar results of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub experiment: String,
    pub values: BTreeMap<String, f64>,
}

impl SummaryStats {
    pub fn new(experiment: &str) -> Self {
        SummaryStats { experiment: experiment.to_string(), values: BTreeMap::new() }
    }

    pub fn set(&mut self, key: impl Into<String>, value: f64) {
        self.values.insert(key.into(), value);
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }

    /// Summary as a two-column table.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["key", "value"]);
        for (k, v) in &self.values {
            t.push(vec![k.as_str().into(), (*v).into()]).expect("two columns");
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub summary: SummaryStats,
    pub tables: Vec<(String, Table)>,
}

impl ExperimentOutput {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }
}

fn fraction(count: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        count as f64 / total as f64
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = 0.5 * (i + j) as f64 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation with averaged ties; `NaN` when either input is
/// constant.
pub fn rank_correlation(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// `{1.0, 2.1, 4.5, 8.3, 11.0}`.
pub fn spectrum_h1() -> Spectrum {
    Spectrum::new(vec![1.0, 2.1, 4.5, 8.3, 11.0]).expect("valid spectrum")
}

/// `{1, 2√7, 6√2, 6√3, 6√5}`.
pub fn spectrum_h2() -> Spectrum {
    Spectrum::new(vec![1.0, 2.0 * 7f64.sqrt(), 6.0 * 2f64.sqrt(), 6.0 * 3f64.sqrt(), 6.0 * 5f64.sqrt()])
        .expect("valid spectrum")
}

// ---------------------------------------------------------------------------
// Bound check on random spectra and states

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BdTestConfig {
    pub seed: u64,
    pub samples: usize,
    pub min_dim: usize,
    pub max_dim: usize,
    pub theta: f64,
}

impl Default for BdTestConfig {
    fn default() -> Self {
        BdTestConfig { seed: 1, samples: 10_000, min_dim: 2, max_dim: 6, theta: PI }
    }
}

/// Random spectrum on `[0, 1]` with all gaps at least `min_gap`.
pub fn random_spectrum<R: Rng + ?Sized>(rng: &mut R, dim: usize, min_gap: f64) -> Result<Spectrum> {
    for _ in 0..100_000 {
        let mut e: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
        e.sort_by(f64::total_cmp);
        if e.windows(2).all(|w| w[1] - w[0] >= min_gap) {
            return Spectrum::new(e);
        }
    }
    Err(QslError::Domain(format!("cannot place {dim} levels with gaps >= {min_gap}")))
}

/// Random spectrum symmetric about `1/2` on `[0, 1]`.
pub fn random_symmetric_spectrum<R: Rng + ?Sized>(rng: &mut R, dim: usize, min_gap: f64) -> Result<Spectrum> {
    for _ in 0..100_000 {
        let inner = dim.saturating_sub(2) / 2;
        let mut e = vec![0.0, 1.0];
        for _ in 0..inner {
            let x = 0.5 * rng.random::<f64>();
            e.push(x);
            e.push(1.0 - x);
        }
        if dim % 2 == 1 {
            e.push(0.5);
        }
        e.sort_by(f64::total_cmp);
        if e.windows(2).all(|w| w[1] - w[0] >= min_gap) {
            return Spectrum::new(e);
        }
    }
    Err(QslError::Domain(format!("cannot place {dim} symmetric levels with gaps >= {min_gap}")))
}

struct BdRow {
    dim: usize,
    kind: &'static str,
    mean: f64,
    midpoint: f64,
    tau_bd: f64,
    tau: f64,
    at_midpoint: bool,
}

fn bd_sample(cfg: &BdTestConfig, i: usize) -> Result<BdRow> {
    let mut rng = sample_rng(cfg.seed, i as u64);
    let dim = rng.random_range(cfg.min_dim..=cfg.max_dim);
    let sp = random_spectrum(&mut rng, dim, 1e-3)?;
    let (kind, rho) = match i % 4 {
        0 => ("mixed", random_mixed_state(&mut rng, dim)?),
        1 => ("pure", random_pure_state(&mut rng, dim)?),
        2 => ("s0", s0_density(&S0Descriptor::random(&mut rng, dim)?)?),
        _ => {
            // half the weight on each extreme level: mean at the midpoint
            let mut p = vec![0.0; dim];
            p[0] = 0.5;
            p[dim - 1] = 0.5;
            ("midpoint", DensityMatrix::diagonal(&p)?)
        }
    };
    let stats = energy_stats(&rho, &sp)?;
    Ok(BdRow {
        dim,
        kind,
        mean: stats.mean,
        midpoint: sp.midpoint(),
        tau_bd: tau_bd(&stats, &sp, cfg.theta)?,
        tau: oqsl(&sp, cfg.theta)?,
        at_midpoint: (stats.mean - sp.midpoint()).abs() < MIDPOINT_TOL,
    })
}

/// `τ_BD >= τ` over random spectra and states, with equality exactly at the
/// spectral midpoint.
pub fn run_bd_test(cfg: &BdTestConfig) -> Result<ExperimentOutput> {
    if cfg.min_dim < 2 || cfg.max_dim < cfg.min_dim {
        return Err(QslError::InvalidParameter("need 2 <= min_dim <= max_dim".into()));
    }
    let rows: Vec<BdRow> = (0..cfg.samples).into_par_iter().map(|i| bd_sample(cfg, i)).collect::<Result<_>>()?;
    let mut t = Table::new(["index", "dim", "kind", "mean", "midpoint", "tau_bd", "tau", "at_midpoint", "equal"]);
    let (mut violations, mut mismatches, mut equalities) = (0usize, 0usize, 0usize);
    for (i, r) in rows.iter().enumerate() {
        let equal = (r.tau_bd - r.tau).abs() <= 1e-12 * r.tau;
        violations += usize::from(r.tau_bd < r.tau - 1e-12);
        mismatches += usize::from(equal != r.at_midpoint);
        equalities += usize::from(equal);
        t.push(vec![
            i.into(),
            r.dim.into(),
            r.kind.into(),
            r.mean.into(),
            r.midpoint.into(),
            r.tau_bd.into(),
            r.tau.into(),
            r.at_midpoint.into(),
            equal.into(),
        ])?;
    }
    let mut s = SummaryStats::new("bd-test");
    s.set("samples", cfg.samples as f64);
    s.set("violations", violations as f64);
    s.set("equality_mismatches", mismatches as f64);
    s.set("equalities", equalities as f64);
    Ok(ExperimentOutput { summary: s, tables: vec![("samples".into(), t)] })
}

// ---------------------------------------------------------------------------
// One-axis twisting grid

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig1Config {
    pub n: u32,
    pub chi: f64,
    pub theta: f64,
    pub phi_steps: usize,
    pub delta_min: f64,
    pub delta_max: f64,
    pub delta_steps: usize,
    /// Detunings for the `τ_BD/τ` against `φ` curves.
    pub profile_deltas: Vec<f64>,
    /// Particle numbers for the `τ` against `|δ|` curves.
    pub curve_ns: Vec<u32>,
}

impl Default for Fig1Config {
    fn default() -> Self {
        Fig1Config {
            n: 10,
            chi: 1.0,
            theta: PI,
            phi_steps: 401,
            delta_min: -20.0,
            delta_max: 20.0,
            delta_steps: 401,
            profile_deltas: vec![1.0, 4.0, 8.0],
            curve_ns: vec![2, 4, 6, 8, 10],
        }
    }
}

/// Tables `grid` (`δ/χ`, `φ`, `τ_BD`, `τ`, `R`, `log10(τ_BD − τ)`),
/// `profiles` and `oqsl_curve`; the summary holds the area fractions of
/// `R < 1%`, `R < 10%` and `1% <= R < 10%` over the grid.
pub fn run_fig1(cfg: &Fig1Config) -> Result<ExperimentOutput> {
    OatParams::new(cfg.n, cfg.chi, 0.0)?;
    if cfg.phi_steps < 2 || cfg.delta_steps < 2 || !(cfg.delta_max > cfg.delta_min) {
        return Err(QslError::InvalidParameter("grid needs at least 2 steps per axis and a non-empty δ range".into()));
    }
    let phis = linspace(0.0, PI, cfg.phi_steps);
    let ratios = linspace(cfg.delta_min, cfg.delta_max, cfg.delta_steps);

    let rows: Vec<Vec<(f64, f64, f64, f64)>> = ratios
        .par_iter()
        .map(|&ratio| {
            let p = OatParams::new(cfg.n, cfg.chi, ratio * cfg.chi)?;
            phis.iter()
                .map(|&phi| oat_point(&p, cfg.theta, phi).map(|pt| (ratio, phi, pt.tau_bd, pt.tau)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut grid = Table::new(["delta_over_chi", "phi", "tau_bd", "tau", "r", "log10_diff"]);
    let (mut below1, mut below10, mut cells) = (0usize, 0usize, 0usize);
    let mut min_r = f64::INFINITY;
    for &(ratio, phi, tbd, tau) in rows.iter().flatten() {
        let r = (tbd - tau) / tau;
        cells += 1;
        below1 += usize::from(r < 0.01);
        below10 += usize::from(r < 0.10);
        min_r = min_r.min(r);
        grid.push(vec![ratio.into(), phi.into(), tbd.into(), tau.into(), r.into(), (tbd - tau).log10().into()])?;
    }

    let mut profiles = Table::new(["delta", "phi", "tau_bd", "tau", "r"]);
    for &delta in &cfg.profile_deltas {
        let p = OatParams::new(cfg.n, cfg.chi, delta)?;
        for &phi in &phis {
            let pt = oat_point(&p, cfg.theta, phi)?;
            profiles.push(vec![delta.into(), phi.into(), pt.tau_bd.into(), pt.tau.into(), pt.relative.into()])?;
        }
    }

    let mut curve = Table::new(["n", "abs_delta", "tau"]);
    let top = cfg.delta_min.abs().max(cfg.delta_max.abs()) * cfg.chi;
    for &n in &cfg.curve_ns {
        for d in linspace(0.0, top, cfg.delta_steps) {
            let p = OatParams::new(n, cfg.chi, d)?;
            curve.push(vec![(n as usize).into(), d.into(), oat_oqsl(&p, cfg.theta)?.into()])?;
        }
    }

    let mut s = SummaryStats::new("fig1");
    s.set("cells", cells as f64);
    s.set("frac_r_lt_1pct", fraction(below1, cells));
    s.set("frac_r_lt_10pct", fraction(below10, cells));
    s.set("frac_r_1_to_10pct", fraction(below10 - below1, cells));
    s.set("min_r", min_r);
    s.set("tau0", 4.0 * cfg.theta / (cfg.chi * (cfg.n as f64).powi(2)));
    Ok(ExperimentOutput {
        summary: s,
        tables: vec![("grid".into(), grid), ("profiles".into(), profiles), ("oqsl_curve".into(), curve)],
    })
}

// ---------------------------------------------------------------------------
// Reachability of Θ = π under damping

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedSpectrum {
    pub name: String,
    pub spectrum: Spectrum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig2Config {
    pub seed: u64,
    pub spectra: Vec<NamedSpectrum>,
    pub gammas: Vec<f64>,
    pub nbar: f64,
    pub states: usize,
    pub theta: f64,
    /// Angle slack for declaring the target reached.
    pub tol: f64,
    pub dt: f64,
    /// Horizon in units of `2π / (smallest gap)`.
    pub horizon_periods: f64,
}

impl Default for Fig2Config {
    fn default() -> Self {
        Fig2Config {
            seed: 2,
            spectra: vec![
                NamedSpectrum { name: "H1".into(), spectrum: spectrum_h1() },
                NamedSpectrum { name: "H2".into(), spectrum: spectrum_h2() },
            ],
            gammas: vec![0.0, 0.0025, 0.005, 0.01, 0.02, 0.03, 0.05, 0.1],
            nbar: 1.0,
            states: 300,
            theta: PI,
            tol: 0.05,
            dt: DEFAULT_DT,
            horizon_periods: 1.0,
        }
    }
}

/// For each spectrum and decay rate, how many random single-coherence
/// states still reach `Θ` (the same states are reused across rates).
pub fn run_fig2(cfg: &Fig2Config) -> Result<ExperimentOutput> {
    let mut t = Table::new(["spectrum", "gamma0", "reached", "total", "fraction"]);
    let mut s = SummaryStats::new("fig2");
    for (si, named) in cfg.spectra.iter().enumerate() {
        let sp = &named.spectrum;
        let horizon = cfg.horizon_periods * 2.0 * PI / sp.smallest_positive_gap();
        let states: Vec<DensityMatrix> = (0..cfg.states)
            .map(|i| {
                let mut rng = sample_rng(cfg.seed ^ (si as u64).wrapping_mul(0x9e37_79b9), i as u64);
                s0_density(&S0Descriptor::random(&mut rng, sp.dim())?)
            })
            .collect::<Result<_>>()?;
        let mut counts = Vec::new();
        for &gamma in &cfg.gammas {
            let noise = NoiseParams::new(gamma, cfg.nbar)?;
            let hits: Vec<bool> = states
                .par_iter()
                .map(|rho| noisy_reach(rho, sp, noise, cfg.theta, horizon, cfg.tol, cfg.dt))
                .collect::<Result<_>>()?;
            let reached = hits.iter().filter(|&&h| h).count();
            counts.push(reached as f64);
            t.push(vec![
                named.name.as_str().into(),
                gamma.into(),
                reached.into(),
                cfg.states.into(),
                fraction(reached, cfg.states).into(),
            ])?;
        }
        let name = &named.name;
        s.set(format!("{name}.reached_first"), counts.first().copied().unwrap_or(0.0));
        s.set(format!("{name}.reached_last"), counts.last().copied().unwrap_or(0.0));
        if cfg.gammas.len() >= 2 {
            s.set(format!("{name}.rank_correlation"), rank_correlation(&cfg.gammas, &counts));
        }
    }
    s.set("states", cfg.states as f64);
    Ok(ExperimentOutput { summary: s, tables: vec![("counts".into(), t)] })
}

// ---------------------------------------------------------------------------
// Hit time against τ_BD on random five-level spectra

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig3Config {
    pub seed: u64,
    pub pairs: usize,
    pub dim: usize,
    pub min_gap: f64,
    /// Draw spectra symmetric about their midpoint instead.
    pub symmetric: bool,
    pub theta: f64,
}

impl Default for Fig3Config {
    fn default() -> Self {
        Fig3Config { seed: 3, pairs: 20_000, dim: 5, min_gap: 1e-3, symmetric: false, theta: PI }
    }
}

/// Tolerance for calling `t` and `τ_BD` equal.
pub const EQUALITY_TOL: f64 = 1e-9;

struct Fig3Row {
    pair: (usize, usize),
    gap: f64,
    t: Option<f64>,
    tau_bd: f64,
}

fn fig3_sample(cfg: &Fig3Config, i: usize) -> Result<Fig3Row> {
    let mut rng = sample_rng(cfg.seed, i as u64);
    let sp = if cfg.symmetric {
        random_symmetric_spectrum(&mut rng, cfg.dim, cfg.min_gap)?
    } else {
        random_spectrum(&mut rng, cfg.dim, cfg.min_gap)?
    };
    let desc = S0Descriptor::random(&mut rng, cfg.dim)?;
    let b = sample_s0(&desc)?;
    let profile = AngleProfile::new(&b, &sp)?;
    let horizon = profile.default_horizon().expect("single coherence is not stationary");
    let t = first_hit_time_profile(&profile, cfg.theta, horizon, 1e-12)?;
    let stats = energy_stats(&s0_density(&desc)?, &sp)?;
    Ok(Fig3Row { pair: desc.pair, gap: desc.gap(&sp), t, tau_bd: tau_bd(&stats, &sp, cfg.theta)? })
}

/// Differences `t − τ_BD` for random single-coherence states; unreachable
/// samples are counted, not dropped.
pub fn run_fig3(cfg: &Fig3Config) -> Result<ExperimentOutput> {
    if cfg.dim < 2 {
        return Err(QslError::InvalidDimension(cfg.dim));
    }
    let rows: Vec<Fig3Row> = (0..cfg.pairs).into_par_iter().map(|i| fig3_sample(cfg, i)).collect::<Result<_>>()?;
    let mut t = Table::new(["index", "pair_j", "pair_k", "gap", "t", "tau_bd", "diff"]);
    let (mut positive, mut equal, mut negative, mut unreachable) = (0usize, 0usize, 0usize, 0usize);
    for (i, r) in rows.iter().enumerate() {
        let diff = r.t.map(|t| t - r.tau_bd);
        match diff {
            None => unreachable += 1,
            Some(d) if d.abs() <= EQUALITY_TOL => equal += 1,
            Some(d) if d > 0.0 => positive += 1,
            Some(_) => negative += 1,
        }
        t.push(vec![
            i.into(),
            r.pair.0.into(),
            r.pair.1.into(),
            r.gap.into(),
            r.t.into(),
            r.tau_bd.into(),
            diff.into(),
        ])?;
    }
    let reached = positive + equal + negative;
    let mut s = SummaryStats::new("fig3");
    s.set("samples", cfg.pairs as f64);
    s.set("unreachable", unreachable as f64);
    s.set("positive_fraction", fraction(positive, reached));
    s.set("equal_count", equal as f64);
    s.set("nonnegative_fraction", fraction(positive + equal, reached));
    Ok(ExperimentOutput { summary: s, tables: vec![("samples".into(), t)] })
}

// ---------------------------------------------------------------------------
// Three-level validity scan

/// How the three-level scan draws its samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fig6Sampling {
    /// `(x, y)` uniform over the reachable part of `2x + y >= 2|r|² sin²(Θ/2)`,
    /// each carrying the diagonal that maximizes `τ_BD` on its circle.
    Points,
    /// Random physical states at fixed `|r|²`.
    States,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig6Config {
    pub seed: u64,
    pub norm2: f64,
    pub theta: f64,
    pub gap: f64,
    pub samples: usize,
    pub sampling: Fig6Sampling,
}

impl Default for Fig6Config {
    fn default() -> Self {
        Fig6Config { seed: 6, norm2: 1.0, theta: PI / 3.0, gap: 1.0, samples: 10_000, sampling: Fig6Sampling::Points }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fig6Row {
    pub point: XYPoint,
    pub r2: f64,
    pub r7: f64,
    pub region: Region,
    pub bd_valid: bool,
    pub t: Option<f64>,
    pub tau_bd: f64,
    pub tau_m: f64,
    pub borderline: f64,
}

impl Fig6Row {
    /// Reaches the target strictly before `τ_BD`.
    pub fn violates_bd(&self) -> bool {
        self.t.is_some_and(|t| t < self.tau_bd - EQUALITY_TOL)
    }

    pub fn below_circle_max(&self) -> bool {
        self.t.is_some_and(|t| t < self.tau_m - EQUALITY_TOL)
    }
}

fn fig6_point<R: Rng + ?Sized>(rng: &mut R, cfg: &Fig6Config) -> Result<(XYPoint, f64, f64)> {
    let floor = 2.0 * cfg.norm2 * (0.5 * cfg.theta).sin().powi(2);
    for _ in 0..1_000_000 {
        // uniform on the triangle x, y >= 0, x + y <= |r|²
        let (mut u, mut v) = (rng.random::<f64>(), rng.random::<f64>());
        if u + v > 1.0 {
            (u, v) = (1.0 - u, 1.0 - v);
        }
        let p = XYPoint::new(cfg.norm2 * u, cfg.norm2 * v, cfg.norm2)?;
        if 2.0 * p.x + p.y >= floor && classify(&p, cfg.theta, cfg.gap)?.in_s {
            let (r2, r7) = circle_maximizer(p.diagonal_weight())?;
            return Ok((p, r2, r7));
        }
    }
    Err(QslError::Domain(format!("no reachable points for |r|² = {}, Θ = {}", cfg.norm2, cfg.theta)))
}

fn fig6_sample(cfg: &Fig6Config, i: usize) -> Result<Fig6Row> {
    let mut rng = sample_rng(cfg.seed, i as u64);
    let (point, r2, r7) = match cfg.sampling {
        Fig6Sampling::Points => fig6_point(&mut rng, cfg)?,
        Fig6Sampling::States => {
            let rho = random_state_with_norm2(&mut rng, 3, cfg.norm2)?;
            let b = bloch_from_density(&rho)?;
            (XYPoint::from_bloch(&b)?, b.components()[2], b.components()[7])
        }
    };
    let verdict = classify(&point, cfg.theta, cfg.gap)?;
    Ok(Fig6Row {
        point,
        r2,
        r7,
        region: verdict.region,
        bd_valid: verdict.bd_valid,
        t: hit_time_els3(&point, cfg.theta, cfg.gap)?,
        tau_bd: tau_bd_diag(r2, r7, cfg.theta, cfg.gap),
        tau_m: tau_circle_max(&point, cfg.theta, cfg.gap)?,
        borderline: borderline_value(&point, cfg.theta, cfg.gap)?,
    })
}

pub fn fig6_rows(cfg: &Fig6Config) -> Result<Vec<Fig6Row>> {
    (0..cfg.samples).into_par_iter().map(|i| fig6_sample(cfg, i)).collect()
}

/// Three-level samples labelled by whether they reach `Θ` before `τ_BD` and
/// before the circle maximum `τ_m`, and by the validity region.
pub fn run_fig6_scan(cfg: &Fig6Config) -> Result<ExperimentOutput> {
    let rows = fig6_rows(cfg)?;
    let mut t = Table::new([
        "x", "y", "r2", "r7", "region", "bd_valid", "t", "tau_bd", "tau_m", "borderline", "violates_bd", "below_tau_m",
    ]);
    let (mut reached, mut violations, mut in_valid, mut below_m) = (0usize, 0usize, 0usize, 0usize);
    for r in &rows {
        reached += usize::from(r.t.is_some());
        violations += usize::from(r.violates_bd());
        in_valid += usize::from(r.violates_bd() && r.bd_valid);
        below_m += usize::from(r.below_circle_max());
        let region = match r.region {
            Region::A => "A",
            Region::B => "B",
            Region::None => "none",
        };
        t.push(vec![
            r.point.x.into(),
            r.point.y.into(),
            r.r2.into(),
            r.r7.into(),
            region.into(),
            r.bd_valid.into(),
            r.t.into(),
            r.tau_bd.into(),
            r.tau_m.into(),
            r.borderline.into(),
            r.violates_bd().into(),
            r.below_circle_max().into(),
        ])?;
    }
    let mut s = SummaryStats::new("fig6");
    s.set("samples", cfg.samples as f64);
    s.set("reached", reached as f64);
    s.set("violations", violations as f64);
    s.set("violations_in_valid_region", in_valid as f64);
    s.set("below_circle_max", below_m as f64);
    Ok(ExperimentOutput { summary: s, tables: vec![("samples".into(), t)] })
}

// ---------------------------------------------------------------------------
// Minima of h₁ and h₂

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig7aConfig {
    pub theta_steps: usize,
}

impl Default for Fig7aConfig {
    fn default() -> Self {
        Fig7aConfig { theta_steps: 50 }
    }
}

/// `min_c h₁` and `min_c h₂` for `Θ = kπ/steps`, `k = 1..=steps`.
pub fn run_fig7a(cfg: &Fig7aConfig) -> Result<ExperimentOutput> {
    let mut t = Table::new(["theta", "min_h1", "min_h2"]);
    let (mut lo1, mut lo2) = (f64::INFINITY, f64::INFINITY);
    for k in 1..=cfg.theta_steps {
        let theta = PI * k as f64 / cfg.theta_steps as f64;
        let (m1, m2) = h_minima(theta)?;
        lo1 = lo1.min(m1);
        lo2 = lo2.min(m2);
        t.push(vec![theta.into(), m1.into(), m2.into()])?;
    }
    let mut s = SummaryStats::new("fig7a");
    s.set("min_h1", lo1);
    s.set("min_h2", lo2);
    Ok(ExperimentOutput { summary: s, tables: vec![("minima".into(), t)] })
}
