//! Energy spectra of diagonal Hamiltonians and their gap structure.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bloch::level_pairs;
use crate::error::{QslError, Result};
use crate::rational::odd_ratio;

pub const DEFAULT_MAX_DEN: u64 = 999;
pub const DEFAULT_RATIO_TOL: f64 = 1e-9;

/// Sorted energy eigenvalues `E₀ <= E₁ <= … <= E_{N−1}` with at least two
/// distinct values.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Spectrum {
    energies: Vec<f64>,
}

impl Spectrum {
    /// Sorts the input; rejects non-finite or fully degenerate spectra.
    pub fn new(mut energies: Vec<f64>) -> Result<Self> {
        if energies.len() < 2 {
            return Err(QslError::InvalidDimension(energies.len()));
        }
        if energies.iter().any(|e| !e.is_finite()) {
            return Err(QslError::InvalidParameter("non-finite energy".into()));
        }
        energies.sort_by(f64::total_cmp);
        if energies[0] == energies[energies.len() - 1] {
            return Err(QslError::DegenerateSpectrum);
        }
        Ok(Self { energies })
    }

    /// `{E₀, E₀+Δ, …, E₀+(N−1)Δ}`.
    pub fn equally_spaced(n: usize, e0: f64, gap: f64) -> Result<Self> {
        Self::new((0..n).map(|k| e0 + gap * k as f64).collect())
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn e_min(&self) -> f64 {
        self.energies[0]
    }

    pub fn e_max(&self) -> f64 {
        self.energies[self.energies.len() - 1]
    }

    pub fn span(&self) -> f64 {
        self.e_max() - self.e_min()
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.e_max() + self.e_min())
    }

    /// `E_j − E_k` for `j > k`.
    pub fn gap(&self, j: usize, k: usize) -> f64 {
        self.energies[j] - self.energies[k]
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.energies.iter().map(|e| e * c).collect())
    }

    pub fn shifted(&self, c: f64) -> Result<Self> {
        Self::new(self.energies.iter().map(|e| e + c).collect())
    }

    pub fn smallest_positive_gap(&self) -> f64 {
        self.energies.windows(2).map(|w| w[1] - w[0]).filter(|g| *g > 0.0).fold(f64::INFINITY, f64::min)
    }
}

impl<'de> Deserialize<'de> for Spectrum {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        Spectrum::new(v).map_err(serde::de::Error::custom)
    }
}

impl FromStr for Spectrum {
    type Err = QslError;

    /// Accepts `0,1,2` or a JSON array `[0, 1, 2]`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let values: Vec<f64> = if t.starts_with('[') {
            serde_json::from_str(t).map_err(|e| QslError::Parse(format!("spectrum: {e}")))?
        } else {
            t.split(',')
                .map(|p| p.trim().parse::<f64>().map_err(|e| QslError::Parse(format!("spectrum entry {p:?}: {e}"))))
                .collect::<Result<_>>()?
        };
        Spectrum::new(values)
    }
}

/// All gaps `E_j − E_k`, `j > k`, with multiplicity, ascending.
pub fn gap_set(sp: &Spectrum) -> Vec<f64> {
    let mut gaps: Vec<f64> = level_pairs(sp.dim()).into_iter().map(|(j, k)| sp.gap(j, k)).collect();
    gaps.sort_by(f64::total_cmp);
    gaps
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub equally_spaced: bool,
    pub symmetric: bool,
    /// No two distinct level pairs have gaps in an odd/odd ratio.
    pub odd_ratio_condition: bool,
    pub gap_set: Vec<f64>,
}

/// Two level pairs and their gap ratio as odd integers, smaller first.
pub type OddRatioPair = ((usize, usize), (usize, usize), (u64, u64));

/// Level-pair couples whose gaps stand in an odd/odd ratio.
pub fn odd_ratio_pairs(sp: &Spectrum, max_den: u64, tol: f64) -> Vec<OddRatioPair> {
    let pairs = level_pairs(sp.dim());
    let mut out = Vec::new();
    for (ia, &a) in pairs.iter().enumerate() {
        for &b in &pairs[ia + 1..] {
            if let Some(ratio) = odd_ratio(sp.gap(a.0, a.1), sp.gap(b.0, b.1), max_den, tol) {
                out.push((a, b, ratio));
            }
        }
    }
    out
}

/// Equal spacing and symmetry are tested relative to the spectral span.
pub fn classify_structure(sp: &Spectrum, max_den: u64, tol: f64) -> StructureReport {
    let e = sp.energies();
    let n = e.len();
    let scale = sp.span();
    let first = e[1] - e[0];
    let equally_spaced = e.windows(2).all(|w| ((w[1] - w[0]) - first).abs() <= tol * scale);
    let outer = e[n - 1] + e[0];
    let symmetric = (0..n).all(|k| (e[n - 1 - k] + e[k] - outer).abs() <= tol * scale);
    let odd_ratio_condition = odd_ratio_pairs(sp, max_den, tol).is_empty();
    StructureReport { equally_spaced, symmetric, odd_ratio_condition, gap_set: gap_set(sp) }
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta <= std::f64::consts::PI + 1e-12 {
        Ok(())
    } else {
        Err(QslError::InvalidParameter(format!("target angle {theta} not in (0, π]")))
    }
}

pub(crate) fn validate_theta(theta: f64) -> Result<()> {
    check_theta(theta)
}

/// Operational speed limit `Θ / (E_max − E_min)`.
pub fn oqsl(sp: &Spectrum, theta: f64) -> Result<f64> {
    check_theta(theta)?;
    let span = sp.span();
    if span <= 0.0 {
        return Err(QslError::DegenerateSpectrum);
    }
    Ok(theta / span)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn h1() -> Spectrum {
        Spectrum::new(vec![1.0, 2.1, 4.5, 8.3, 11.0]).unwrap()
    }

    fn h2() -> Spectrum {
        Spectrum::new(vec![1.0, 2.0 * 7f64.sqrt(), 6.0 * 2f64.sqrt(), 6.0 * 3f64.sqrt(), 6.0 * 5f64.sqrt()]).unwrap()
    }

    #[test]
    fn construction_rules() {
        assert!(matches!(Spectrum::new(vec![1.0, 1.0]), Err(QslError::DegenerateSpectrum)));
        assert!(Spectrum::new(vec![1.0]).is_err());
        assert_eq!(Spectrum::new(vec![2.0, 0.0, 1.0]).unwrap().energies(), &[0.0, 1.0, 2.0]);
        assert_eq!("0, 1,2".parse::<Spectrum>().unwrap().energies(), &[0.0, 1.0, 2.0]);
        assert_eq!("[0,1.5]".parse::<Spectrum>().unwrap().energies(), &[0.0, 1.5]);
        assert!("0,x".parse::<Spectrum>().is_err());
    }

    #[test]
    fn gap_set_examples() {
        assert_eq!(gap_set(&Spectrum::new(vec![0.0, 1.0, 2.0]).unwrap()), vec![1.0, 1.0, 2.0]);
        let g = gap_set(&h1());
        assert_eq!(g.len(), 10);
        assert!((g[9] - 10.0).abs() < 1e-12);
        assert_eq!(gap_set(&Spectrum::new(vec![0.0, 0.7]).unwrap()), vec![0.7]);
    }

    #[test]
    fn structure_examples() {
        let r = classify_structure(&Spectrum::new(vec![0.0, 1.0, 2.0]).unwrap(), DEFAULT_MAX_DEN, DEFAULT_RATIO_TOL);
        assert!(r.equally_spaced && r.symmetric && !r.odd_ratio_condition);

        let r = classify_structure(&h2(), DEFAULT_MAX_DEN, DEFAULT_RATIO_TOL);
        assert!(r.odd_ratio_condition);
        assert!(!r.symmetric);

        let r = classify_structure(&Spectrum::new(vec![0.0, 1.0, 3.0, 4.0]).unwrap(), DEFAULT_MAX_DEN, DEFAULT_RATIO_TOL);
        assert!(r.symmetric && !r.equally_spaced);

        // 1.1 : 3.5 = 11 : 35
        let r = classify_structure(&h1(), DEFAULT_MAX_DEN, DEFAULT_RATIO_TOL);
        assert!(!r.odd_ratio_condition);
    }

    #[test]
    fn oqsl_examples() {
        assert!((oqsl(&h1(), PI).unwrap() - PI / 10.0).abs() < 1e-15);
        let eq = Spectrum::equally_spaced(3, 0.0, 0.5).unwrap();
        assert!((oqsl(&eq, 1.2).unwrap() - 1.2 / 1.0).abs() < 1e-15);
        assert!(oqsl(&eq, 1e-300).unwrap() < 1e-299);
        assert!(oqsl(&eq, 0.0).is_err());
        assert!(oqsl(&eq, 4.0).is_err());
    }

    fn exact_odd_condition(e: &[i64]) -> bool {
        let pairs = level_pairs(e.len());
        for (ia, a) in pairs.iter().enumerate() {
            for b in &pairs[ia + 1..] {
                let ga = (e[a.0] - e[a.1]) as u64;
                let gb = (e[b.0] - e[b.1]) as u64;
                if ga == 0 || gb == 0 {
                    continue;
                }
                let g = crate::rational::gcd(ga, gb);
                if (ga / g) % 2 == 1 && (gb / g) % 2 == 1 {
                    return false;
                }
            }
        }
        true
    }

    proptest! {
        #[test]
        fn oqsl_degree_minus_one(e in prop::collection::vec(-5.0f64..5.0, 2..6), c in 0.1f64..10.0, theta in 0.01f64..PI) {
            prop_assume!(e.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - e.iter().cloned().fold(f64::INFINITY, f64::min) > 1e-3);
            let sp = Spectrum::new(e).unwrap();
            let scaled = sp.scaled(c).unwrap();
            let lhs = oqsl(&scaled, theta).unwrap();
            let rhs = oqsl(&sp, theta).unwrap() / c;
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs());
        }

        #[test]
        fn classification_shift_invariant(e in prop::collection::vec(0i64..20, 2..6), shift in -50i64..50) {
            prop_assume!(e.iter().max() != e.iter().min());
            let sp = Spectrum::new(e.iter().map(|v| *v as f64).collect()).unwrap();
            let moved = sp.shifted(shift as f64).unwrap();
            let a = classify_structure(&sp, DEFAULT_MAX_DEN, DEFAULT_RATIO_TOL);
            let b = classify_structure(&moved, DEFAULT_MAX_DEN, DEFAULT_RATIO_TOL);
            prop_assert_eq!(a.equally_spaced, b.equally_spaced);
            prop_assert_eq!(a.symmetric, b.symmetric);
            prop_assert_eq!(a.odd_ratio_condition, b.odd_ratio_condition);
        }

        #[test]
        fn odd_condition_matches_exact_integers(e in prop::collection::vec(0i64..60, 2..7)) {
            prop_assume!(e.iter().max() != e.iter().min());
            let mut sorted = e.clone();
            sorted.sort();
            let sp = Spectrum::new(sorted.iter().map(|v| *v as f64).collect()).unwrap();
            let report = classify_structure(&sp, DEFAULT_MAX_DEN, DEFAULT_RATIO_TOL);
            prop_assert_eq!(report.odd_ratio_condition, exact_odd_condition(&sorted));
            prop_assert!(!report.equally_spaced || report.symmetric);
        }
    }
}
