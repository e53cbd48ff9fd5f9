//! Time evolution in the energy eigenbasis: closed-system phases, the target
//! angle `θ(t)`, first-hit times, and a damped-ladder Lindblad integrator.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::bloch::{bloch_from_density, level_pairs, BlochState, DensityMatrix};
use crate::error::{QslError, Result};
use crate::spectrum::{validate_theta, Spectrum};
use crate::table::{Cell, Table};

/// Default Lindblad step.
pub const DEFAULT_DT: f64 = 1e-3;
/// Scan resolution of [`first_hit_time`], in samples per fastest period.
pub const SCAN_SAMPLES_PER_PERIOD: f64 = 400.0;
/// Default horizon of [`first_hit_time`], in slowest periods.
pub const DEFAULT_HORIZON_PERIODS: f64 = 50.0;
const TRACE_DRIFT_LIMIT: f64 = 1e-6;

fn check_dims(rho: &DensityMatrix, sp: &Spectrum) -> Result<()> {
    if rho.dim() != sp.dim() {
        return Err(QslError::DimensionMismatch { expected: sp.dim(), got: rho.dim() });
    }
    Ok(())
}

/// `ρ_jk(t) = ρ_jk(0) e^{−i(E_j − E_k)t}`.
pub fn unitary_evolve(rho0: &DensityMatrix, sp: &Spectrum, t: f64) -> Result<DensityMatrix> {
    check_dims(rho0, sp)?;
    if !(t >= 0.0) {
        return Err(QslError::InvalidParameter(format!("time {t} must be >= 0")));
    }
    let e = sp.energies();
    let n = sp.dim();
    let mut m = rho0.matrix().clone();
    for j in 0..n {
        for k in 0..j {
            let phase = C64::from_polar(1.0, -(e[j] - e[k]) * t);
            m[(j, k)] *= phase;
            m[(k, j)] *= phase.conj();
        }
    }
    Ok(DensityMatrix::new_unchecked(m))
}

/// `θ(t)` of a closed system as a trigonometric polynomial in the level gaps.
///
/// Uses `1 − cos θ = Σ_p w_p (1 − cos g_p t)` with `w_p` the normalized pair
/// weights, rewritten as a half-angle `atan2` so that `θ` stays accurate near
/// both `0` and `π`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleProfile {
    terms: Vec<(f64, f64)>,
    rest: f64,
}

impl AngleProfile {
    pub fn new(s: &BlochState, sp: &Spectrum) -> Result<Self> {
        if s.dim() != sp.dim() {
            return Err(QslError::DimensionMismatch { expected: sp.dim(), got: s.dim() });
        }
        let norm2 = s.norm_sqr();
        if norm2 == 0.0 {
            return Err(QslError::UndefinedAngle);
        }
        let mut terms = Vec::new();
        let mut total = 0.0;
        for (j, k) in level_pairs(sp.dim()) {
            let w = s.pair_weight(j, k) / norm2;
            if w > 0.0 {
                terms.push((sp.gap(j, k), w));
                total += w;
            }
        }
        Ok(AngleProfile { terms, rest: (1.0 - total).max(0.0) })
    }

    pub fn from_density(rho: &DensityMatrix, sp: &Spectrum) -> Result<Self> {
        check_dims(rho, sp)?;
        Self::new(&bloch_from_density(rho)?, sp)
    }

    /// `(gap, weight)` for every level pair with non-zero coherence.
    pub fn terms(&self) -> &[(f64, f64)] {
        &self.terms
    }

    pub fn is_stationary(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_gap(&self) -> Option<f64> {
        self.terms.iter().map(|t| t.0).reduce(f64::max)
    }

    pub fn min_gap(&self) -> Option<f64> {
        self.terms.iter().map(|t| t.0).reduce(f64::min)
    }

    pub fn theta(&self, t: f64) -> f64 {
        let mut moved = 0.0;
        let mut kept = self.rest;
        for &(g, w) in &self.terms {
            let (s, c) = (0.5 * g * t).sin_cos();
            moved += w * s * s;
            kept += w * c * c;
        }
        2.0 * moved.sqrt().atan2(kept.sqrt())
    }

    /// `50 · 2π / (smallest active gap)`; `None` for a stationary state.
    pub fn default_horizon(&self) -> Option<f64> {
        self.min_gap().map(|g| DEFAULT_HORIZON_PERIODS * 2.0 * PI / g)
    }
}

/// Angle between the Bloch vectors of two states, from overlaps only:
/// `cos θ = (N Tr ρ₀ρ_t − 1) / √((N Tr ρ₀² − 1)(N Tr ρ_t² − 1))`.
pub fn state_angle(rho0: &DensityMatrix, rhot: &DensityMatrix) -> Result<f64> {
    let n = rho0.dim() as f64;
    let a = n * rho0.purity() - 1.0;
    let b = n * rhot.purity() - 1.0;
    if a <= 0.0 || b <= 0.0 {
        return Err(QslError::UndefinedAngle);
    }
    let c = (n * rho0.overlap(rhot) - 1.0) / (a * b).sqrt();
    Ok(c.clamp(-1.0, 1.0).acos())
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Leftmost root of `f` in `[lo, hi]` given `f(lo) < 0 <= f(hi)`.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if f(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Earliest `t ∈ (0, horizon]` with `θ(t) >= Θ − tol` for a precomputed
/// profile, refined to about `1e-12` in time. Tangential touches (as at
/// `Θ = π`) are caught by maximizing over each local peak of the scan.
pub fn first_hit_time_profile(p: &AngleProfile, theta: f64, horizon: f64, tol: f64) -> Result<Option<f64>> {
    validate_theta(theta)?;
    if !(horizon > 0.0) || !(tol > 0.0) {
        return Err(QslError::InvalidParameter("horizon and tol must be positive".into()));
    }
    let target = theta - tol;
    if target <= 0.0 {
        return Ok(Some(0.0));
    }
    let Some(g_max) = p.max_gap() else {
        return Ok(None);
    };
    let f = |t: f64| p.theta(t) - target;
    let step = 2.0 * PI / (SCAN_SAMPLES_PER_PERIOD * g_max);
    let time_tol = 1e-12 * horizon.max(1.0);
    let steps = (horizon / step).ceil() as usize;
    let at = |i: usize| (i as f64 * step).min(horizon);

    let mut f_prev2 = f64::NEG_INFINITY;
    let mut f_prev = f(0.0);
    for i in 1..=steps {
        let t = at(i);
        let ft = f(t);
        if ft >= 0.0 {
            return Ok(Some(bisect(f, at(i - 1), t, time_tol)));
        }
        // Sample i−1 is a local maximum of the scan: look between samples.
        if i >= 2 && f_prev >= f_prev2 && f_prev >= ft {
            let (lo, hi) = (at(i - 2), t);
            let (t_peak, f_peak) = golden_max(f, lo, hi, time_tol);
            if f_peak >= 0.0 {
                return Ok(Some(bisect(f, lo, t_peak, time_tol)));
            }
        }
        f_prev2 = f_prev;
        f_prev = ft;
    }
    Ok(None)
}

/// Earliest time the Bloch vector of `ρ0` has turned by `Θ − tol`, or `None`
/// if that does not happen before `horizon`.
pub fn first_hit_time(rho0: &DensityMatrix, sp: &Spectrum, theta: f64, horizon: f64, tol: f64) -> Result<Option<f64>> {
    let p = AngleProfile::from_density(rho0, sp)?;
    first_hit_time_profile(&p, theta, horizon, tol)
}

/// `θ(t)` sampled on a grid for a closed system.
pub fn unitary_trajectory(rho0: &DensityMatrix, sp: &Spectrum, times: &[f64], keep_states: bool) -> Result<Trajectory> {
    check_times(times)?;
    let p = AngleProfile::from_density(rho0, sp)?;
    let angles = times.iter().map(|&t| p.theta(t)).collect();
    let states = if keep_states {
        Some(times.iter().map(|&t| unitary_evolve(rho0, sp, t)).collect::<Result<Vec<_>>>()?)
    } else {
        None
    };
    Ok(Trajectory { times: times.to_vec(), angles, states })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub gamma0: f64,
    pub nbar: f64,
}

impl NoiseParams {
    pub fn new(gamma0: f64, nbar: f64) -> Result<Self> {
        if !(gamma0 >= 0.0 && gamma0.is_finite()) || !(nbar >= 0.0 && nbar.is_finite()) {
            return Err(QslError::InvalidParameter(format!("need gamma0 >= 0 and nbar >= 0, got {gamma0}, {nbar}")));
        }
        Ok(NoiseParams { gamma0, nbar })
    }

    pub fn noiseless() -> Self {
        NoiseParams { gamma0: 0.0, nbar: 0.0 }
    }

    /// Thermal occupation `1/(e^{ω₀/k_BT} − 1)`.
    pub fn from_temperature(gamma0: f64, omega0: f64, kt: f64) -> Result<Self> {
        Self::new(gamma0, planck_occupation(omega0, kt)?)
    }
}

pub fn planck_occupation(omega0: f64, kt: f64) -> Result<f64> {
    if !(omega0 > 0.0) || !(kt >= 0.0) {
        return Err(QslError::InvalidParameter(format!("need omega0 > 0 and kT >= 0, got {omega0}, {kt}")));
    }
    if kt == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (omega0 / kt).exp_m1())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub angles: Vec<f64>,
    pub states: Option<Vec<DensityMatrix>>,
}

impl Trajectory {
    pub fn max_angle(&self) -> f64 {
        self.angles.iter().copied().fold(0.0, f64::max)
    }

    /// Columns `t, theta` and, when states were kept, `re_jk, im_jk` for
    /// every matrix entry in row-major order.
    pub fn to_table(&self) -> Table {
        let n = self.states.as_ref().and_then(|s| s.first()).map_or(0, DensityMatrix::dim);
        let mut header = vec!["t".to_string(), "theta".to_string()];
        for j in 0..n {
            for k in 0..n {
                header.push(format!("re_{j}{k}"));
                header.push(format!("im_{j}{k}"));
            }
        }
        let mut table = Table::new(header);
        for (i, (&t, &a)) in self.times.iter().zip(&self.angles).enumerate() {
            let mut row: Vec<Cell> = vec![t.into(), a.into()];
            if let Some(states) = &self.states {
                for j in 0..n {
                    for k in 0..n {
                        let z = states[i].get(j, k);
                        row.push(z.re.into());
                        row.push(z.im.into());
                    }
                }
            }
            table.push(row).expect("row matches header");
        }
        table
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        self.to_table().write_csv(w)
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.first() != Some(&0.0) {
        return Err(QslError::InvalidParameter("time grid must start at 0".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) || times.iter().any(|t| !t.is_finite()) {
        return Err(QslError::InvalidParameter("time grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Fixed-step RK4 integrator for
/// `∂ρ = −i[H, ρ] + γ₀(n̄+1)𝒟[a]ρ + γ₀n̄𝒟[a†]ρ` with the truncated ladder
/// `a|k⟩ = √k |k−1⟩`. Works on a flat row-major buffer.
#[derive(Debug, Clone)]
pub struct Lindblad {
    n: usize,
    energies: Vec<f64>,
    down: f64,
    up: f64,
    dt: f64,
    sqrt_k: Vec<f64>,
    // diagonal of a†a and of aa† (the top level has no raised partner)
    num: Vec<f64>,
    num_up: Vec<f64>,
    k1: Vec<C64>,
    k2: Vec<C64>,
    k3: Vec<C64>,
    k4: Vec<C64>,
    tmp: Vec<C64>,
}

impl Lindblad {
    pub fn new(sp: &Spectrum, noise: NoiseParams, dt: f64) -> Result<Self> {
        let noise = NoiseParams::new(noise.gamma0, noise.nbar)?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(QslError::InvalidParameter(format!("step {dt} must be positive")));
        }
        let n = sp.dim();
        let z = vec![C64::new(0.0, 0.0); n * n];
        Ok(Lindblad {
            n,
            energies: sp.energies().to_vec(),
            down: noise.gamma0 * (noise.nbar + 1.0),
            up: noise.gamma0 * noise.nbar,
            dt,
            sqrt_k: (0..n).map(|k| (k as f64).sqrt()).collect(),
            num: (0..n).map(|k| k as f64).collect(),
            num_up: (0..n).map(|k| if k + 1 < n { (k + 1) as f64 } else { 0.0 }).collect(),
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            tmp: z,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn derivative(&self, rho: &[C64], out: &mut [C64]) {
        let n = self.n;
        for j in 0..n {
            for k in 0..n {
                let idx = j * n + k;
                let r = rho[idx];
                let mut d = C64::new(0.0, -(self.energies[j] - self.energies[k])) * r;
                if self.down != 0.0 {
                    let mut g = -0.5 * (self.num[j] + self.num[k]) * r;
                    if j + 1 < n && k + 1 < n {
                        g += self.sqrt_k[j + 1] * self.sqrt_k[k + 1] * rho[idx + n + 1];
                    }
                    d += self.down * g;
                }
                if self.up != 0.0 {
                    let mut g = -0.5 * (self.num_up[j] + self.num_up[k]) * r;
                    if j >= 1 && k >= 1 {
                        g += self.sqrt_k[j] * self.sqrt_k[k] * rho[idx - n - 1];
                    }
                    d += self.up * g;
                }
                out[idx] = d;
            }
        }
    }

    /// One RK4 step of length `h`, followed by Hermitian symmetrization.
    pub fn step(&mut self, rho: &mut [C64], h: f64) {
        let mut k1 = std::mem::take(&mut self.k1);
        let mut k2 = std::mem::take(&mut self.k2);
        let mut k3 = std::mem::take(&mut self.k3);
        let mut k4 = std::mem::take(&mut self.k4);
        let mut tmp = std::mem::take(&mut self.tmp);

        self.derivative(rho, &mut k1);
        for i in 0..rho.len() {
            tmp[i] = rho[i] + 0.5 * h * k1[i];
        }
        self.derivative(&tmp, &mut k2);
        for i in 0..rho.len() {
            tmp[i] = rho[i] + 0.5 * h * k2[i];
        }
        self.derivative(&tmp, &mut k3);
        for i in 0..rho.len() {
            tmp[i] = rho[i] + h * k3[i];
        }
        self.derivative(&tmp, &mut k4);
        for i in 0..rho.len() {
            rho[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        symmetrize(rho, self.n);

        self.k1 = k1;
        self.k2 = k2;
        self.k3 = k3;
        self.k4 = k4;
        self.tmp = tmp;
    }

    /// Advances `rho` from `t0` by `span` using steps no longer than `dt`.
    pub fn advance(&mut self, rho: &mut [C64], t0: f64, span: f64) -> Result<()> {
        if span <= 0.0 {
            return Ok(());
        }
        let steps = (span / self.dt).ceil().max(1.0) as usize;
        let h = span / steps as f64;
        for s in 0..steps {
            self.step(rho, h);
            let tr: f64 = (0..self.n).map(|k| rho[k * self.n + k].re).sum();
            if !tr.is_finite() || (tr - 1.0).abs() > TRACE_DRIFT_LIMIT {
                return Err(QslError::IntegrationFailure {
                    t: t0 + (s + 1) as f64 * h,
                    reason: format!("trace drifted to {tr}"),
                });
            }
        }
        Ok(())
    }
}

fn symmetrize(rho: &mut [C64], n: usize) {
    for j in 0..n {
        rho[j * n + j].im = 0.0;
        for k in 0..j {
            let avg = 0.5 * (rho[j * n + k] + rho[k * n + j].conj());
            rho[j * n + k] = avg;
            rho[k * n + j] = avg.conj();
        }
    }
}

fn flatten(rho: &DensityMatrix) -> Vec<C64> {
    let n = rho.dim();
    let m = rho.matrix();
    (0..n * n).map(|i| m[(i / n, i % n)]).collect()
}

fn unflatten(buf: &[C64], n: usize) -> DensityMatrix {
    DensityMatrix::new_unchecked(DMatrix::from_row_slice(n, n, buf))
}

/// Angle via overlaps against a fixed initial state, on flat buffers.
struct OverlapAngle {
    rho0: Vec<C64>,
    n: f64,
    a: f64,
}

impl OverlapAngle {
    fn new(rho0: &DensityMatrix) -> Result<Self> {
        let n = rho0.dim() as f64;
        let a = n * rho0.purity() - 1.0;
        if a <= 0.0 {
            return Err(QslError::UndefinedAngle);
        }
        Ok(OverlapAngle { rho0: flatten(rho0), n, a })
    }

    fn angle(&self, rho: &[C64]) -> f64 {
        // Tr(ρ₀ρ) = Σ_jk ρ₀_jk ρ_kj = Σ_jk ρ₀_jk conj(ρ_jk) for Hermitian ρ.
        let mut ov = 0.0;
        let mut pur = 0.0;
        for (x, y) in self.rho0.iter().zip(rho) {
            ov += (x * y.conj()).re;
            pur += y.norm_sqr();
        }
        let b = self.n * pur - 1.0;
        if b <= 0.0 {
            return 0.0;
        }
        ((self.n * ov - 1.0) / (self.a * b).sqrt()).clamp(-1.0, 1.0).acos()
    }
}

/// Integrates the damped dynamics and samples `θ(t)` on `times`, which must
/// start at 0 and increase. A state that decays to the maximally mixed point
/// has no Bloch direction; its angle is reported as 0.
pub fn lindblad_evolve(
    rho0: &DensityMatrix,
    sp: &Spectrum,
    noise: NoiseParams,
    times: &[f64],
    dt: f64,
    keep_states: bool,
) -> Result<Trajectory> {
    check_dims(rho0, sp)?;
    check_times(times)?;
    let n = sp.dim();
    let angle = OverlapAngle::new(rho0)?;
    let mut lb = Lindblad::new(sp, noise, dt)?;
    let mut rho = flatten(rho0);
    let mut angles = vec![0.0];
    let mut states = keep_states.then(|| vec![rho0.clone()]);
    for w in times.windows(2) {
        lb.advance(&mut rho, w[0], w[1] - w[0])?;
        angles.push(angle.angle(&rho));
        if let Some(s) = states.as_mut() {
            s.push(unflatten(&rho, n));
        }
    }
    Ok(Trajectory { times: times.to_vec(), angles, states })
}

/// Whether the damped trajectory ever turns by `Θ − tol` within `horizon`,
/// checking the angle after every integration step.
pub fn noisy_reach(
    rho0: &DensityMatrix,
    sp: &Spectrum,
    noise: NoiseParams,
    theta: f64,
    horizon: f64,
    tol: f64,
    dt: f64,
) -> Result<bool> {
    check_dims(rho0, sp)?;
    validate_theta(theta)?;
    let target = theta - tol;
    if target <= 0.0 {
        return Ok(true);
    }
    if !(horizon > 0.0) {
        return Err(QslError::InvalidParameter(format!("horizon {horizon} must be positive")));
    }
    let angle = OverlapAngle::new(rho0)?;
    let mut lb = Lindblad::new(sp, noise, dt)?;
    let mut rho = flatten(rho0);
    let steps = (horizon / dt).ceil() as usize;
    let h = horizon / steps as f64;
    for s in 0..steps {
        lb.advance(&mut rho, s as f64 * h, h)?;
        if angle.angle(&rho) >= target {
            return Ok(true);
        }
    }
    Ok(false)
}
