//! Energy statistics and state-dependent speed-limit bounds.
//!
//! All bounds are times for the Bloch vector to sweep a target angle `Θ`.
//! A bound that can never be met (an eigenstate, a qubit on the pole) is
//! reported as `+∞` rather than as an error.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bloch::{bloch_from_density, DensityMatrix};
use crate::error::{QslError, Result};
use crate::spectrum::{oqsl, validate_theta, Spectrum};

/// Mean energies closer than this to the spectral midpoint count as attaining
/// `τ_BD = τ`.
pub const MIDPOINT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyStats {
    pub mean: f64,
    pub deviation: f64,
}

impl EnergyStats {
    pub fn variance(&self) -> f64 {
        self.deviation * self.deviation
    }
}

/// `⟨H⟩ = Σ ρ_kk E_k` and `ΔH`, with negative rounding in the variance
/// clamped to zero.
pub fn energy_stats(rho: &DensityMatrix, sp: &Spectrum) -> Result<EnergyStats> {
    if rho.dim() != sp.dim() {
        return Err(QslError::DimensionMismatch { expected: sp.dim(), got: rho.dim() });
    }
    Ok(energy_stats_from_populations(&rho.populations(), sp))
}

pub fn energy_stats_from_populations(populations: &[f64], sp: &Spectrum) -> EnergyStats {
    let e = sp.energies();
    let mean: f64 = populations.iter().zip(e).map(|(p, e)| p * e).sum();
    // Central moment avoids cancellation in ⟨H²⟩ − ⟨H⟩².
    let var: f64 = populations.iter().zip(e).map(|(p, e)| p * (e - mean) * (e - mean)).sum();
    EnergyStats { mean, deviation: var.max(0.0).sqrt() }
}

/// `(E_max − ⟨H⟩)(⟨H⟩ − E_min)`, the Bhatia-Davis bound on the variance.
pub fn bhatia_davis_variance(mean: f64, sp: &Spectrum) -> f64 {
    (sp.e_max() - mean) * (mean - sp.e_min())
}

/// `Θ / (2√((E_max − ⟨H⟩)(⟨H⟩ − E_min)))`; `+∞` when the mean sits on an
/// extreme energy.
pub fn tau_bd(stats: &EnergyStats, sp: &Spectrum, theta: f64) -> Result<f64> {
    tau_bd_from_extremes(stats.mean, sp.e_min(), sp.e_max(), theta)
}

/// [`tau_bd`] from the mean energy and the spectral extremes alone.
pub fn tau_bd_from_extremes(mean: f64, e_min: f64, e_max: f64, theta: f64) -> Result<f64> {
    validate_theta(theta)?;
    if !(e_max > e_min) {
        return Err(QslError::DegenerateSpectrum);
    }
    let slack = 1e-12 * (e_max - e_min).max(1.0);
    if !(mean >= e_min - slack && mean <= e_max + slack) {
        return Err(QslError::InconsistentStats { mean, min: e_min, max: e_max });
    }
    let prod = (e_max - mean) * (mean - e_min);
    if prod <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(theta / (2.0 * prod.sqrt()))
}

/// Bures angle reached by a qubit whose Bloch vector of length `norm` turns
/// through `Θ`: `arccos √(1 − ½|r|²(1 − cos Θ))`, evaluated as
/// `arcsin(|r| sin(Θ/2))`.
pub fn bures_target_angle(norm: f64, theta: f64) -> f64 {
    (norm * (0.5 * theta).sin()).clamp(-1.0, 1.0).asin()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub theta: f64,
    pub mean_energy: f64,
    pub deviation: f64,
    #[serde(with = "ext_f64")]
    pub tau_bd: Option<f64>,
    #[serde(with = "ext_f64")]
    pub tau_oqsl: Option<f64>,
    /// Mandelstam-Tamm type term.
    #[serde(with = "ext_f64")]
    pub mt: Option<f64>,
    /// Margolus-Levitin type term; absent when `⟨H⟩ <= 0`.
    #[serde(with = "ext_f64")]
    pub ml: Option<f64>,
    /// Quantum-Fisher-information bound (two-level only).
    #[serde(with = "ext_f64")]
    pub tau_f: Option<f64>,
    /// `max{𝒜/ΔH, 2𝒜²/(π⟨H⟩)}` (two-level only).
    #[serde(with = "ext_f64")]
    pub tau_c: Option<f64>,
    /// `max{τ_BD, τ_F, 2𝒜²/(π⟨H⟩)}` (two-level only).
    #[serde(with = "ext_f64")]
    pub combined_bound: Option<f64>,
    /// `⟨H⟩` at the spectral midpoint, i.e. `τ_BD = τ`.
    pub equality_attained: bool,
}

fn inv_or_inf(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        f64::INFINITY
    }
}

fn max_of(values: &[Option<f64>]) -> Option<f64> {
    values.iter().flatten().copied().reduce(f64::max)
}

/// Bounds for an arbitrary state. Qubits additionally get the Bures-angle
/// family (`τ_F`, `τ_C`, combined bound); for `N > 2` the `mt`/`ml` terms are
/// `Θ/(2ΔH)` and `Θ²/(2π⟨H⟩)`, which coincide with the qubit Bures forms for
/// pure states.
pub fn bound_report(rho: &DensityMatrix, sp: &Spectrum, theta: f64) -> Result<BoundReport> {
    validate_theta(theta)?;
    let stats = energy_stats(rho, sp)?;
    if sp.dim() == 2 {
        let r = bloch_from_density(rho)?;
        let eta = r.norm();
        if eta > 0.0 {
            // α is measured from the |E₁⟩ axis, which is −z in this crate.
            let alpha = (-r.components()[2] / eta).clamp(-1.0, 1.0).acos();
            let mut rep = two_level_bound_suite(alpha, eta.min(1.0), theta, sp.e_min(), sp.e_max())?;
            rep.mean_energy = stats.mean;
            rep.deviation = stats.deviation;
            return Ok(rep);
        }
    }
    let tbd = tau_bd(&stats, sp, theta)?;
    let ml = (stats.mean > 0.0).then(|| theta * theta / (2.0 * PI * stats.mean));
    Ok(BoundReport {
        theta,
        mean_energy: stats.mean,
        deviation: stats.deviation,
        tau_bd: Some(tbd),
        tau_oqsl: Some(oqsl(sp, theta)?),
        mt: Some(inv_or_inf(theta, 2.0 * stats.deviation)),
        ml,
        tau_f: None,
        tau_c: None,
        combined_bound: None,
        equality_attained: (stats.mean - sp.midpoint()).abs() < MIDPOINT_TOL,
    })
}

/// Closed-form qubit bounds for a Bloch vector of length `η` at polar angle
/// `α` from the `|E₁⟩` axis.
pub fn two_level_bound_suite(alpha: f64, eta: f64, theta: f64, e0: f64, e1: f64) -> Result<BoundReport> {
    validate_theta(theta)?;
    if !(eta > 0.0 && eta <= 1.0 + 1e-12) {
        return Err(QslError::InvalidParameter(format!("Bloch length {eta} not in (0, 1]")));
    }
    if !(0.0..=PI + 1e-12).contains(&alpha) {
        return Err(QslError::InvalidParameter(format!("polar angle {alpha} not in [0, π]")));
    }
    if !(e1 > e0) {
        return Err(QslError::DegenerateSpectrum);
    }
    let gap = e1 - e0;
    let (sin_a, cos_a) = alpha.sin_cos();
    let mean = 0.5 * (e1 + e0) + 0.5 * eta * cos_a * gap;
    // sin π is not exactly zero in floating point; treat it as the pole.
    let sin_a = if sin_a.abs() < f64::EPSILON { 0.0 } else { sin_a };
    // 1 − η²cos²α, written to stay accurate near the poles of a pure state.
    let spread2 = ((1.0 - eta * eta) + eta * eta * sin_a * sin_a).max(0.0);
    let deviation = 0.5 * gap * spread2.sqrt();
    let bures = bures_target_angle(eta, theta);

    let tau_bd = inv_or_inf(theta, gap * spread2.sqrt());
    let tau_f = inv_or_inf(2.0 * bures, gap * eta * sin_a.abs());
    let mt = inv_or_inf(bures, deviation);
    let ml = (mean > 0.0).then(|| 2.0 * bures * bures / (PI * mean));
    let tau_c = max_of(&[Some(mt), ml]);
    let combined = max_of(&[Some(tau_bd), Some(tau_f), ml]);
    Ok(BoundReport {
        theta,
        mean_energy: mean,
        deviation,
        tau_bd: Some(tau_bd),
        tau_oqsl: Some(theta / gap),
        mt: Some(mt),
        ml,
        tau_f: Some(tau_f),
        tau_c,
        combined_bound: combined,
        equality_attained: (mean - 0.5 * (e0 + e1)).abs() < MIDPOINT_TOL,
    })
}

/// Serde adapter: finite numbers as JSON numbers, `+∞` as `"inf"`, `None`
/// as `null`.
pub mod ext_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            None => s.serialize_none(),
            Some(x) if x.is_finite() => s.serialize_f64(*x),
            Some(x) if *x > 0.0 => s.serialize_str("inf"),
            Some(_) => s.serialize_str("-inf"),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        match Option::<Repr>::deserialize(d)? {
            None => Ok(None),
            Some(Repr::Num(x)) => Ok(Some(x)),
            Some(Repr::Text(t)) => match t.as_str() {
                "inf" => Ok(Some(f64::INFINITY)),
                "-inf" => Ok(Some(f64::NEG_INFINITY)),
                other => Err(serde::de::Error::custom(format!("unexpected bound value {other:?}"))),
            },
        }
    }
}
