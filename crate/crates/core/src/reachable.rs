//! The set of states that can reach a target angle, its universal subset of
//! single-coherence states, and the structure of `Θ = π` reachability.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bloch::{anti_index, bloch_scale, density_from_bloch, level_pairs, sym_index, BlochState, DensityMatrix};
use crate::error::{QslError, Result};
use crate::rational::{gcd, lcm, odd_ratio};
use crate::spectrum::{classify_structure, odd_ratio_pairs, validate_theta, Spectrum};

/// `(1/|r|²) Σ_{j>k} (1 − cos g_jk t)(r²_sym + r²_anti) − (1 − cos Θ)`; zero
/// exactly when the state has turned by `Θ` at time `t`.
pub fn s_residual(s: &BlochState, sp: &Spectrum, theta: f64, t: f64) -> Result<f64> {
    if s.dim() != sp.dim() {
        return Err(QslError::DimensionMismatch { expected: sp.dim(), got: s.dim() });
    }
    let norm2 = s.norm_sqr();
    if norm2 == 0.0 {
        return Err(QslError::UndefinedAngle);
    }
    let moved: f64 = level_pairs(sp.dim())
        .into_iter()
        .map(|(j, k)| {
            let h = (0.5 * sp.gap(j, k) * t).sin();
            2.0 * h * h * s.pair_weight(j, k)
        })
        .sum();
    Ok(moved / norm2 - (1.0 - theta.cos()))
}

/// A state with all populations `1/N` and a single coherence
/// `ρ_kj = m e^{−i·phase}` on the level pair `(j, k)`, `j > k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct S0Descriptor {
    pub dim: usize,
    pub pair: (usize, usize),
    pub magnitude: f64,
    pub phase: f64,
}

impl S0Descriptor {
    pub fn new(dim: usize, pair: (usize, usize), magnitude: f64, phase: f64) -> Result<Self> {
        let d = S0Descriptor { dim, pair, magnitude, phase };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let (j, k) = self.pair;
        if self.dim < 2 {
            return Err(QslError::InvalidDimension(self.dim));
        }
        if !(j < self.dim && k < j) {
            return Err(QslError::InvalidParameter(format!("pair ({j}, {k}) invalid for N = {}", self.dim)));
        }
        let top = 1.0 / self.dim as f64;
        if !(self.magnitude > 0.0 && self.magnitude <= top * (1.0 + 1e-12)) {
            return Err(QslError::InvalidParameter(format!("coherence {} not in (0, 1/N]", self.magnitude)));
        }
        if !self.phase.is_finite() {
            return Err(QslError::InvalidParameter("phase must be finite".into()));
        }
        Ok(())
    }

    /// Pair uniform over all level pairs, `m` uniform on `(0, 1/N]`, phase
    /// uniform on `[0, 2π)`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(QslError::InvalidDimension(dim));
        }
        let pairs = level_pairs(dim);
        let pair = pairs[rng.random_range(0..pairs.len())];
        let magnitude = (1.0 - rng.random::<f64>()) / dim as f64;
        let phase = 2.0 * PI * rng.random::<f64>();
        Ok(S0Descriptor { dim, pair, magnitude, phase })
    }

    pub fn gap(&self, sp: &Spectrum) -> f64 {
        sp.gap(self.pair.0, self.pair.1)
    }
}

pub fn sample_s0(desc: &S0Descriptor) -> Result<BlochState> {
    desc.validate()?;
    let n = desc.dim;
    let (j, k) = desc.pair;
    let amp = n as f64 / bloch_scale(n) * desc.magnitude;
    let mut r = vec![0.0; n * n - 1];
    r[sym_index(j, k)] = amp * desc.phase.cos();
    r[anti_index(j, k)] = amp * desc.phase.sin();
    BlochState::new(n, r)
}

pub fn s0_density(desc: &S0Descriptor) -> Result<DensityMatrix> {
    Ok(density_from_bloch(&sample_s0(desc)?))
}

/// Level pairs whose gaps are all odd multiples of a common unit, so a
/// multi-coherence state on them reaches `Θ = π` at `joint_time`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapGroup {
    pub pairs: Vec<(usize, usize)>,
    pub gaps: Vec<f64>,
    /// Odd integers `n_i` with `gap_i = n_i · unit`.
    pub multiples: Vec<u64>,
    pub joint_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiReachReport {
    /// No two gaps stand in an odd/odd ratio, so only single-coherence
    /// states can reach `Θ = π`.
    pub s_equals_s0: bool,
    pub symmetric: bool,
    pub equally_spaced: bool,
    pub compatible_gap_groups: Vec<GapGroup>,
    /// Pairs `(j, k)` and `(N−1−k, N−1−j)` with equal gaps in a symmetric
    /// spectrum.
    pub mirrored_pairs: Vec<((usize, usize), (usize, usize))>,
    pub min_reach_time: f64,
}

fn find(parent: &mut [usize], i: usize) -> usize {
    let mut r = i;
    while parent[r] != r {
        r = parent[r];
    }
    let mut i = i;
    while parent[i] != r {
        let next = parent[i];
        parent[i] = r;
        i = next;
    }
    r
}

pub fn pi_reach_report(sp: &Spectrum, max_den: u64, tol: f64) -> PiReachReport {
    let structure = classify_structure(sp, max_den, tol);
    let pairs = level_pairs(sp.dim());
    let index = |p: (usize, usize)| pairs.iter().position(|&q| q == p).expect("level pair");

    // Odd/odd ratios compose, so the relation is an equivalence.
    let mut parent: Vec<usize> = (0..pairs.len()).collect();
    for (a, b, _) in odd_ratio_pairs(sp, max_den, tol) {
        let (ra, rb) = (find(&mut parent, index(a)), find(&mut parent, index(b)));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let roots: Vec<usize> = (0..pairs.len()).map(|i| find(&mut parent, i)).collect();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for i in 0..pairs.len() {
        match classes.iter_mut().find(|c| roots[c[0]] == roots[i]) {
            Some(c) => c.push(i),
            None => classes.push(vec![i]),
        }
    }

    let gap = |i: usize| sp.gap(pairs[i].0, pairs[i].1);
    let mut groups = Vec::new();
    for class in classes.into_iter().filter(|c| c.len() >= 2) {
        let g_ref = class.iter().map(|&i| gap(i)).fold(f64::INFINITY, f64::min);
        // gap_i = g_ref · q_i / p_i with p_i, q_i odd
        let (class, ratios): (Vec<usize>, Vec<(u64, u64)>) = class
            .iter()
            .filter_map(|&i| odd_ratio(g_ref, gap(i), max_den * max_den, tol).map(|r| (i, r)))
            .unzip();
        let den = ratios.iter().fold(1, |acc, &(p, _)| lcm(acc, p));
        let mut multiples: Vec<u64> = ratios.iter().map(|&(p, q)| q * (den / p)).collect();
        let common = multiples.iter().fold(0, |acc, &m| gcd(acc, m));
        multiples.iter_mut().for_each(|m| *m /= common);
        let unit = g_ref * common as f64 / den as f64;
        groups.push(GapGroup {
            pairs: class.iter().map(|&i| pairs[i]).collect(),
            gaps: class.iter().map(|&i| gap(i)).collect(),
            multiples,
            joint_time: PI / unit,
        });
    }

    let n = sp.dim();
    let mirrored_pairs = if structure.symmetric {
        pairs
            .iter()
            .filter_map(|&(j, k)| {
                let m = (n - 1 - k, n - 1 - j);
                ((j, k) < m).then_some(((j, k), m))
            })
            .collect()
    } else {
        Vec::new()
    };

    PiReachReport {
        s_equals_s0: structure.odd_ratio_condition,
        symmetric: structure.symmetric,
        equally_spaced: structure.equally_spaced,
        compatible_gap_groups: groups,
        mirrored_pairs,
        min_reach_time: PI / sp.span(),
    }
}

/// Closed-form time for a qubit at polar angle `α` (from the `|E₁⟩` axis) to
/// turn by `Θ`: `(2/g) arcsin(sin(Θ/2)/sin α)`; `None` outside
/// `α ∈ [Θ/2, π − Θ/2]`. The result does not depend on `η`.
pub fn two_level_hit_time(alpha: f64, eta: f64, theta: f64, e0: f64, e1: f64) -> Option<f64> {
    if validate_theta(theta).is_err() || !(eta > 0.0 && eta <= 1.0 + 1e-12) || !(e1 > e0) {
        return None;
    }
    let half = 0.5 * theta;
    let slack = 1e-12;
    if alpha < half - slack || alpha > PI - half + slack {
        return None;
    }
    let ratio = (half.sin() / alpha.sin()).min(1.0);
    Some(2.0 / (e1 - e0) * ratio.asin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::physicality_check;
    use crate::dynamics::first_hit_time;
    use crate::sampling::sample_rng;
    use crate::spectrum::{DEFAULT_MAX_DEN, DEFAULT_RATIO_TOL};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};

    fn sp(e: &[f64]) -> Spectrum {
        Spectrum::new(e.to_vec()).unwrap()
    }

    #[test]
    fn s0_examples() {
        let d = S0Descriptor::new(3, (2, 1), 1.0 / 3.0, 0.0).unwrap();
        let s = sample_s0(&d).unwrap();
        let mut expect = vec![0.0; 8];
        expect[5] = 1.0 / 3f64.sqrt();
        for (a, b) in s.components().iter().zip(&expect) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
        let ev = density_from_bloch(&s).eigenvalues();
        for (a, b) in ev.iter().zip([0.0, 1.0 / 3.0, 2.0 / 3.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }

        let q = sample_s0(&S0Descriptor::new(2, (1, 0), 0.5, 0.0).unwrap()).unwrap();
        assert_abs_diff_eq!(q.norm(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q.components()[2], 0.0);

        assert!(S0Descriptor::new(3, (2, 1), 0.4, 0.0).is_err());
        assert!(S0Descriptor::new(3, (1, 1), 0.1, 0.0).is_err());
        assert!(S0Descriptor::new(3, (2, 0), 0.0, 0.0).is_err());
    }

    #[test]
    fn s0_coherence_matches_descriptor() {
        let d = S0Descriptor::new(4, (3, 1), 0.2, 1.1).unwrap();
        let rho = s0_density(&d).unwrap();
        let z = rho.get(1, 3);
        assert_abs_diff_eq!(z.re, 0.2 * 1.1f64.cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(z.im, -0.2 * 1.1f64.sin(), epsilon = 1e-15);
        for p in rho.populations() {
            assert_abs_diff_eq!(p, 0.25, epsilon = 1e-15);
        }
    }

    #[test]
    fn random_s0_is_physical_and_reaches_pi() {
        let s = sp(&[1.0, 2.1, 4.5, 8.3, 11.0]);
        for i in 0..50 {
            let d = S0Descriptor::random(&mut sample_rng(11, i), 5).unwrap();
            let b = sample_s0(&d).unwrap();
            assert!(physicality_check(&b, 1e-12));
            let t = first_hit_time(&density_from_bloch(&b), &s, PI, 1e3, 1e-12).unwrap().unwrap();
            assert_abs_diff_eq!(t, PI / d.gap(&s), epsilon = 1e-8);
            assert_abs_diff_eq!(s_residual(&b, &s, PI, t).unwrap(), 0.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn residual_examples() {
        let s = sp(&[0.0, 1.0, 3.0]);
        let b = sample_s0(&S0Descriptor::new(3, (2, 0), 0.2, 0.4).unwrap()).unwrap();
        assert_abs_diff_eq!(s_residual(&b, &s, 1.0, 0.0).unwrap(), -(1.0 - 1f64.cos()), epsilon = 1e-15);
        assert_abs_diff_eq!(s_residual(&b, &s, PI, PI / 3.0).unwrap(), 0.0, epsilon = 1e-14);
        assert!(s_residual(&BlochState::zero(3).unwrap(), &s, 1.0, 1.0).is_err());
    }

    #[test]
    fn commensurate_groups() {
        let rep = pi_reach_report(&sp(&[0.0, 1.0, 3.0]), DEFAULT_MAX_DEN, DEFAULT_RATIO_TOL);
        assert!(!rep.s_equals_s0);
        assert_eq!(rep.compatible_gap_groups.len(), 1);
        let g = &rep.compatible_gap_groups[0];
        assert_eq!(g.pairs, vec![(1, 0), (2, 0)]);
        assert_eq!(g.multiples, vec![1, 3]);
        assert_abs_diff_eq!(g.joint_time, PI, epsilon = 1e-12);
        assert_abs_diff_eq!(rep.min_reach_time, PI / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn incommensurate_and_symmetric_spectra() {
        let h2 = sp(&[1.0, 2.0 * 7f64.sqrt(), 6.0 * 2f64.sqrt(), 6.0 * 3f64.sqrt(), 6.0 * 5f64.sqrt()]);
        let rep = pi_reach_report(&h2, DEFAULT_MAX_DEN, DEFAULT_RATIO_TOL);
        assert!(rep.s_equals_s0);
        assert!(rep.compatible_gap_groups.is_empty());

        let eq = pi_reach_report(&Spectrum::equally_spaced(3, 0.0, 1.0).unwrap(), DEFAULT_MAX_DEN, DEFAULT_RATIO_TOL);
        assert!(eq.symmetric && eq.equally_spaced);
        assert_eq!(eq.mirrored_pairs, vec![((1, 0), (2, 1))]);
        let g = &eq.compatible_gap_groups[0];
        assert_eq!(g.pairs, vec![(1, 0), (2, 1)]);
        assert_abs_diff_eq!(g.joint_time, PI, epsilon = 1e-12);
    }

    #[test]
    fn h1_has_odd_gap_ratio() {
        // 1.1 : 3.5 = 11 : 35
        let rep = pi_reach_report(&sp(&[1.0, 2.1, 4.5, 8.3, 11.0]), DEFAULT_MAX_DEN, DEFAULT_RATIO_TOL);
        assert!(!rep.s_equals_s0);
        assert!(rep.compatible_gap_groups.iter().any(|g| g.pairs.contains(&(1, 0)) && g.pairs.contains(&(2, 0))));
    }

    #[test]
    fn two_level_closed_form() {
        for theta in [0.4, FRAC_PI_2, 2.5, PI] {
            assert_abs_diff_eq!(two_level_hit_time(theta / 2.0, 0.5, theta, 1.0, 3.0).unwrap(), PI / 2.0, epsilon = 1e-12);
            assert_abs_diff_eq!(two_level_hit_time(FRAC_PI_2, 0.5, theta, 1.0, 3.0).unwrap(), theta / 2.0, epsilon = 1e-12);
        }
        let t = two_level_hit_time(FRAC_PI_3, 1.0, FRAC_PI_2, 0.0, 1.0).unwrap();
        assert!((t - 1.9106).abs() < 1e-4);
        assert_eq!(two_level_hit_time(0.3, 1.0, FRAC_PI_2, 0.0, 1.0), None);
        assert_eq!(two_level_hit_time(PI - 0.3, 1.0, FRAC_PI_2, 0.0, 1.0), None);
    }
}
