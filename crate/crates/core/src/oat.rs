//! Generalized one-axis twisting, `H = χJ_z² + δJ_z`, with coherent spin
//! states as initial states.

use serde::{Deserialize, Serialize};

use crate::bounds::tau_bd_from_extremes;
use crate::error::{QslError, Result};
use crate::spectrum::validate_theta;
use crate::table::Table;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OatParams {
    pub n: u32,
    pub chi: f64,
    pub delta: f64,
}

impl OatParams {
    /// Even `n >= 2` and `χ > 0`.
    pub fn new(n: u32, chi: f64, delta: f64) -> Result<Self> {
        let p = Self::any_n(n, chi, delta)?;
        if !n.is_multiple_of(2) || n < 2 {
            return Err(QslError::InvalidParameter(format!("particle number {n} must be even and >= 2")));
        }
        Ok(p)
    }

    /// Any `n >= 1`; only the brute-force extremes apply to odd `n`.
    pub fn any_n(n: u32, chi: f64, delta: f64) -> Result<Self> {
        if n == 0 {
            return Err(QslError::InvalidParameter("particle number must be positive".into()));
        }
        if !(chi > 0.0 && chi.is_finite()) || !delta.is_finite() {
            return Err(QslError::InvalidParameter(format!("need χ > 0 and finite δ, got {chi}, {delta}")));
        }
        Ok(OatParams { n, chi, delta })
    }

    /// `χm² + δm` for the Dicke level `m`.
    pub fn level(&self, m: f64) -> f64 {
        self.chi * m * m + self.delta * m
    }

    /// Dicke labels `−n/2, …, n/2`.
    pub fn dicke_labels(&self) -> impl Iterator<Item = f64> {
        let half = self.n as f64 / 2.0;
        (0..=self.n).map(move |i| i as f64 - half)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CssParams {
    pub phi: f64,
    pub varphi: f64,
}

/// `(E_max, E_min)`: `E_max = (χn² + 2|δ|n)/4`; `E_min = χR² − δR` with `R`
/// the integer nearest `δ/(2χ)` while `|δ|/χ <= n`, and `(χn² − 2|δ|n)/4`
/// beyond that.
pub fn oat_extremes(p: &OatParams) -> Result<(f64, f64)> {
    if !p.n.is_multiple_of(2) {
        return Err(QslError::InvalidParameter(format!("closed form needs even n, got {}", p.n)));
    }
    let n = p.n as f64;
    let d = p.delta.abs();
    let e_max = (p.chi * n * n + 2.0 * d * n) / 4.0;
    let e_min = if d / p.chi <= n {
        // f64::round breaks ties away from zero; both neighbours give the same E_min
        let r = (p.delta / (2.0 * p.chi)).round();
        p.chi * r * r - p.delta * r
    } else {
        (p.chi * n * n - 2.0 * d * n) / 4.0
    };
    Ok((e_max, e_min))
}

/// Extremes by direct enumeration of the Dicke levels; valid for any `n`.
pub fn oat_extremes_brute(p: &OatParams) -> (f64, f64) {
    p.dicke_labels().map(|m| p.level(m)).fold((f64::NEG_INFINITY, f64::INFINITY), |(hi, lo), e| (hi.max(e), lo.min(e)))
}

fn extremes(p: &OatParams) -> (f64, f64) {
    oat_extremes(p).unwrap_or_else(|_| oat_extremes_brute(p))
}

/// `Θ / (E_max − E_min)`.
pub fn oat_oqsl(p: &OatParams, theta: f64) -> Result<f64> {
    validate_theta(theta)?;
    let (hi, lo) = extremes(p);
    Ok(theta / (hi - lo))
}

/// `⟨H⟩ = (2δn cos φ + χn² cos²φ + χn sin²φ)/4`, independent of `ϕ`.
pub fn css_mean_energy(p: &OatParams, c: &CssParams) -> f64 {
    let n = p.n as f64;
    let (s, co) = c.phi.sin_cos();
    (2.0 * p.delta * n * co + p.chi * n * n * co * co + p.chi * n * s * s) / 4.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OatPoint {
    pub phi: f64,
    pub tau_bd: f64,
    pub tau: f64,
    /// `(τ_BD − τ)/τ`.
    pub relative: f64,
}

pub fn oat_point(p: &OatParams, theta: f64, phi: f64) -> Result<OatPoint> {
    let (hi, lo) = extremes(p);
    let mean = css_mean_energy(p, &CssParams { phi, varphi: 0.0 });
    // the CSS mean can round a hair outside the spectrum at the poles
    let mean = mean.clamp(lo, hi);
    let tau_bd = tau_bd_from_extremes(mean, lo, hi, theta)?;
    let tau = theta / (hi - lo);
    Ok(OatPoint { phi, tau_bd, tau, relative: (tau_bd - tau) / tau })
}

/// Table `phi, tau_bd, tau, r` over `phi_grid`.
pub fn oat_profiles(p: &OatParams, theta: f64, phi_grid: &[f64]) -> Result<Table> {
    let mut t = Table::new(["phi", "tau_bd", "tau", "r"]);
    for &phi in phi_grid {
        let pt = oat_point(p, theta, phi)?;
        t.push(vec![pt.phi.into(), pt.tau_bd.into(), pt.tau.into(), pt.relative.into()])?;
    }
    Ok(t)
}
