//! Closed forms for an equally spaced three-level system with gap `Δ`.
//!
//! A state enters only through `x = r₃² + r₄²` (weight on the `2Δ`
//! coherence), `y = r₀² + r₁² + r₅² + r₆²` (weight on the two `Δ`
//! coherences) and `|r|²`; the rest `c = |r|² − x − y = r₂² + r₇²` sits on
//! the diagonal.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bloch::BlochState;
use crate::error::{QslError, Result};
use crate::spectrum::validate_theta;

const EDGE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XYPoint {
    pub x: f64,
    pub y: f64,
    pub norm2: f64,
}

impl XYPoint {
    pub fn new(x: f64, y: f64, norm2: f64) -> Result<Self> {
        if !(x >= 0.0 && y >= 0.0 && norm2 > 0.0 && norm2 <= 1.0 + EDGE_TOL) || x + y > norm2 + EDGE_TOL {
            return Err(QslError::InvalidParameter(format!(
                "need x, y >= 0 and x + y <= |r|² <= 1, got x={x}, y={y}, |r|²={norm2}"
            )));
        }
        Ok(XYPoint { x, y, norm2 })
    }

    pub fn from_bloch(s: &BlochState) -> Result<Self> {
        if s.dim() != 3 {
            return Err(QslError::DimensionMismatch { expected: 3, got: s.dim() });
        }
        let r = s.components();
        let x = r[3] * r[3] + r[4] * r[4];
        let y = r[0] * r[0] + r[1] * r[1] + r[5] * r[5] + r[6] * r[6];
        Self::new(x, y, s.norm_sqr())
    }

    /// `r₂² + r₇²`.
    pub fn diagonal_weight(&self) -> f64 {
        (self.norm2 - self.x - self.y).max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    /// `y <= 4x` block.
    A,
    /// `y >= 4x` block.
    B,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeVerdict {
    pub in_s: bool,
    pub region: Region,
    pub bd_valid: bool,
}

fn half_sin(theta: f64) -> f64 {
    (0.5 * theta).sin()
}

fn lower_curve(p: &XYPoint, theta: f64) -> f64 {
    4.0 * p.norm2.sqrt() * half_sin(theta) * p.x.sqrt() - 4.0 * p.x
}

fn in_region_a(p: &XYPoint, theta: f64) -> bool {
    p.y >= lower_curve(p, theta) - EDGE_TOL && p.y <= 4.0 * p.x + EDGE_TOL && p.y <= p.norm2 - p.x + EDGE_TOL
}

fn in_region_b(p: &XYPoint, theta: f64) -> bool {
    let s = half_sin(theta);
    p.y >= lower_curve(p, theta) - EDGE_TOL
        && p.y >= 4.0 * p.x - EDGE_TOL
        && p.y >= p.norm2 * s * s - EDGE_TOL
        && p.y <= p.norm2 - p.x + EDGE_TOL
}

/// Whether states at `p` can reach `Θ`, and through which block.
/// `x = y = 0` (no coherence) never moves.
pub fn regime_membership(p: &XYPoint, theta: f64) -> Result<(bool, Region)> {
    validate_theta(theta)?;
    if p.x == 0.0 && p.y == 0.0 {
        return Ok((false, Region::None));
    }
    let region = if in_region_a(p, theta) {
        Region::A
    } else if in_region_b(p, theta) {
        Region::B
    } else {
        Region::None
    };
    Ok((region != Region::None, region))
}

pub fn classify(p: &XYPoint, theta: f64, gap: f64) -> Result<RegimeVerdict> {
    let (in_s, region) = regime_membership(p, theta)?;
    Ok(RegimeVerdict { in_s, region, bd_valid: bd_validity(p, theta, gap)? })
}

/// Roots `f±` in `cos(Δt)` of `2x u² + y u + 2|r|² sin²(Θ/2) − y − 2x = 0`.
pub fn f_roots(p: &XYPoint, theta: f64) -> Option<(f64, f64)> {
    let s = half_sin(theta);
    let disc = (4.0 * p.x + p.y).powi(2) - 16.0 * p.x * p.norm2 * s * s;
    if disc < 0.0 || p.x == 0.0 {
        return None;
    }
    let root = disc.sqrt();
    Some(((-p.y + root) / (4.0 * p.x), (-p.y - root) / (4.0 * p.x)))
}

/// First time states at `p` turn by `Θ`, on the principal branch
/// `Δt ∈ [0, π]`; `None` outside the reachable set.
pub fn hit_time_els3(p: &XYPoint, theta: f64, gap: f64) -> Result<Option<f64>> {
    validate_theta(theta)?;
    if !(gap > 0.0) {
        return Err(QslError::InvalidParameter(format!("gap {gap} must be positive")));
    }
    let s = half_sin(theta);
    let in_range = |u: f64| (-1.0 - EDGE_TOL..=1.0 + EDGE_TOL).contains(&u);
    let cos_t = if p.x == 0.0 {
        if p.y == 0.0 {
            return Ok(None);
        }
        Some(1.0 - 2.0 * p.norm2 * s * s / p.y).filter(|&u| in_range(u))
    } else {
        f_roots(p, theta).and_then(|(fp, fm)| {
            if in_range(fp) {
                Some(fp)
            } else if in_range(fm) {
                Some(fm)
            } else {
                None
            }
        })
    };
    Ok(cos_t.map(|u| u.clamp(-1.0, 1.0).acos() / gap))
}

/// `τ_BD` of a state with diagonal components `r₂`, `r₇`:
/// `Θ / (2Δ√(1 − (r₂/√3 + r₇)²))`.
pub fn tau_bd_diag(r2: f64, r7: f64, theta: f64, gap: f64) -> f64 {
    let m = r2 / 3f64.sqrt() + r7;
    let d = 1.0 - m * m;
    if d <= 0.0 {
        f64::INFINITY
    } else {
        theta / (2.0 * gap * d.sqrt())
    }
}

/// Largest `τ_BD` over physical diagonals with `r₂² + r₇² = c`, where `c`
/// is the point's diagonal weight. Populations stay non-negative only for
/// `r₇ <= 1/2`, which caps the circle maximum once `c > 1/3`.
pub fn tau_circle_max(p: &XYPoint, theta: f64, gap: f64) -> Result<f64> {
    validate_theta(theta)?;
    let c = p.norm2 - p.x - p.y;
    let c = if c < 0.0 && c > -EDGE_TOL { 0.0 } else { c };
    let m = if c <= 1.0 / 3.0 {
        (4.0 * c / 3.0).sqrt()
    } else {
        0.5 + ((c - 0.25) / 3.0).sqrt()
    };
    let d = 1.0 - m * m;
    if d < -EDGE_TOL || c < 0.0 {
        return Err(QslError::Domain(format!("no physical diagonal with r₂² + r₇² = {c}")));
    }
    if d <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(theta / (2.0 * gap * d.sqrt()))
}

/// Diagonal `(r₂, r₇)` on the circle `r₂² + r₇² = c` that maximizes `τ_BD`:
/// along `(1, √3)/2` until `r₇` reaches its cap `1/2` at `c = 1/3`, then
/// along the cap.
pub fn circle_maximizer(c: f64) -> Result<(f64, f64)> {
    if !(-EDGE_TOL..=1.0 + EDGE_TOL).contains(&c) {
        return Err(QslError::Domain(format!("diagonal weight {c} outside [0, 1]")));
    }
    let c = c.max(0.0);
    if c <= 1.0 / 3.0 {
        Ok((0.5 * c.sqrt(), 0.5 * (3.0 * c).sqrt()))
    } else {
        Ok(((c - 0.25).sqrt(), 0.5))
    }
}

/// Whether `τ_BD` is guaranteed to lower-bound the hit time for every state
/// at `p`: the `y >= 4x` block, or the `y <= 4x` block inside the borderline
/// `x sin²(Δτ_m) + y sin²(Δτ_m/2) <= |r|² sin²(Θ/2)`.
pub fn bd_validity(p: &XYPoint, theta: f64, gap: f64) -> Result<bool> {
    let (_, region) = regime_membership(p, theta)?;
    match region {
        Region::B => Ok(true),
        Region::A => Ok(borderline_value(p, theta, gap)? <= EDGE_TOL),
        Region::None => Ok(false),
    }
}

/// `x sin²(Δτ_m) + y sin²(Δτ_m/2) − |r|² sin²(Θ/2)`; non-positive on the
/// valid side of the borderline.
pub fn borderline_value(p: &XYPoint, theta: f64, gap: f64) -> Result<f64> {
    let tm = tau_circle_max(p, theta, gap)?;
    let phase = gap * tm;
    let s = half_sin(theta);
    Ok(p.x * phase.sin().powi(2) + p.y * (0.5 * phase).sin().powi(2) - p.norm2 * s * s)
}

/// `Θ_c = 2 arccos(1/√3)`, where the maximum of `Δ·τ_BD` switches form.
pub fn critical_angle() -> f64 {
    2.0 * (1.0 / 3f64.sqrt()).acos()
}

/// Largest `Δ·τ_BD` over all reachable three-level states:
/// `√3Θ / (2√(1 − 2cos Θ))` for `Θ >= Θ_c`, and
/// `Θ / (2√(1 − ¼[√((1 + 2cos Θ)/3) + 1]²))` below it. Equals `π/2` at
/// `Θ = π`.
pub fn max_scaled_tau_bd(theta: f64) -> Result<f64> {
    validate_theta(theta)?;
    let c = theta.cos();
    if theta >= critical_angle() {
        Ok(3f64.sqrt() * theta / (2.0 * (1.0 - 2.0 * c).sqrt()))
    } else {
        let b = ((1.0 + 2.0 * c) / 3.0).sqrt() + 1.0;
        Ok(theta / (2.0 * (1.0 - 0.25 * b * b).sqrt()))
    }
}

/// The reachable region is one piece iff `|r|²(1 − (4/3)sin²(Θ/2)) >= 0`,
/// i.e. `Θ <= 2π/3`.
pub fn regime_connected(norm2: f64, theta: f64) -> bool {
    let s = half_sin(theta);
    norm2 * (1.0 - 4.0 / 3.0 * s * s) >= -EDGE_TOL
}

fn h_tail(c: f64, theta: f64) -> f64 {
    (1.0 - theta.cos()) / (1.0 - c)
}

/// `h₁(c) = cos(Θ/(2√(1 − 4c/3))) + (1 − cos Θ)/(1 − c)` on `[0, 3/4)`.
pub fn h1(c: f64, theta: f64) -> Option<f64> {
    (0.0..0.75).contains(&c).then(|| (theta / (2.0 * (1.0 - 4.0 * c / 3.0).sqrt())).cos() + h_tail(c, theta))
}

/// `h₂(c)`, the capped-circle counterpart of `h₁`, on `[1/3, 3/4)`.
pub fn h2(c: f64, theta: f64) -> Option<f64> {
    if !(1.0 / 3.0 - EDGE_TOL..0.75).contains(&c) {
        return None;
    }
    let m = 0.5 + ((c - 0.25) / 3.0).sqrt();
    Some((theta / (2.0 * (1.0 - m * m).sqrt())).cos() + h_tail(c, theta))
}

pub fn h_pair(c: f64, theta: f64) -> (Option<f64>, Option<f64>) {
    (h1(c, theta), h2(c, theta))
}

/// Golden-section minimum of `f` on `[a, b]`, seeded from the best point of
/// a coarse grid so that a non-unimodal `f` still lands in the right basin.
pub fn minimize_scalar(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    const COARSE: usize = 256;
    let h = (b - a) / COARSE as f64;
    let best = (0..=COARSE).map(|i| a + i as f64 * h).min_by(|u, v| f(*u).total_cmp(&f(*v))).unwrap_or(a);
    let (mut lo, mut hi) = ((best - h).max(a), (best + h).min(b));
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > tol {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    // the interval ends can beat the interior when the minimum is on the edge
    [(0.5 * (lo + hi)), a, b]
        .into_iter()
        .map(|x| (x, f(x)))
        .min_by(|p, q| p.1.total_cmp(&q.1))
        .expect("non-empty")
}

/// `min h₁` over `c ∈ [0, 1/3]` and `min h₂` over `c ∈ [1/3, 3/4)`, each
/// function on the branch where its circle maximum applies.
pub fn h_minima(theta: f64) -> Result<(f64, f64)> {
    validate_theta(theta)?;
    let (_, m1) = minimize_scalar(|c| h1(c, theta).unwrap_or(f64::INFINITY), 0.0, 1.0 / 3.0, 1e-12);
    let (_, m2) = minimize_scalar(|c| h2(c, theta).unwrap_or(f64::INFINITY), 1.0 / 3.0, 0.75 - 1e-9, 1e-12);
    Ok((m1, m2))
}

/// Cap on `Δ·τ_BD` over every reachable state.
pub const SCALED_TAU_CAP: f64 = PI / 2.0;

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};

    fn pt(x: f64, y: f64, n2: f64) -> XYPoint {
        XYPoint::new(x, y, n2).unwrap()
    }

    /// Reachability straight from the residual: some `u = cos(Δt) ∈ [−1, 1]`
    /// with `y(1 − u) + 2x(1 − u²) = 2|r|² sin²(Θ/2)`.
    fn reachable_by_scan(p: &XYPoint, theta: f64) -> Option<f64> {
        let target = 2.0 * p.norm2 * half_sin(theta).powi(2);
        let steps = 200_000;
        (0..=steps)
            .map(|i| 1.0 - 2.0 * i as f64 / steps as f64)
            .find(|&u| p.y * (1.0 - u) + 2.0 * p.x * (1.0 - u * u) >= target)
            .map(f64::acos)
    }

    #[test]
    fn membership_examples() {
        let s2 = half_sin(1.0).powi(2);
        assert!(regime_membership(&pt(0.0, 0.7 * s2, 0.7), 1.0).unwrap().0);
        let (in_s, region) = regime_membership(&pt(1.0, 0.0, 1.0), PI).unwrap();
        assert!(in_s);
        assert_eq!(region, Region::A);
        assert_eq!(regime_membership(&pt(0.0, 0.0, 0.5), 1.0).unwrap(), (false, Region::None));
    }

    #[test]
    fn regions_match_root_existence() {
        for &theta in &[0.5, FRAC_PI_3, 1.7, 2.2, 2.9, PI] {
            for &n2 in &[1.0, 0.6, 0.3] {
                for i in 0..=40 {
                    for j in 0..=40 {
                        let x = n2 * i as f64 / 40.0;
                        let y = n2 * j as f64 / 40.0;
                        if x + y > n2 || (x == 0.0 && y == 0.0) {
                            continue;
                        }
                        let p = pt(x, y, n2);
                        let closed = hit_time_els3(&p, theta, 1.0).unwrap();
                        let (in_s, _) = regime_membership(&p, theta).unwrap();
                        assert_eq!(closed.is_some(), in_s, "x={x} y={y} |r|²={n2} Θ={theta}");
                        if let (Some(t), Some(t_scan)) = (closed, reachable_by_scan(&p, theta)) {
                            assert!((t - t_scan).abs() < 1e-2, "x={x} y={y}: {t} vs {t_scan}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn hit_time_examples() {
        let theta = 1.3;
        let t = hit_time_els3(&pt(0.8, 0.0, 0.8), theta, 2.0).unwrap().unwrap();
        assert_abs_diff_eq!(t, theta / 4.0, epsilon = 1e-12);
        let t = hit_time_els3(&pt(0.0, 0.5, 0.5), PI, 1.0).unwrap().unwrap();
        assert_abs_diff_eq!(t, PI, epsilon = 1e-12);
        assert_eq!(hit_time_els3(&pt(0.0, 0.0, 0.5), PI, 1.0).unwrap(), None);
    }

    #[test]
    fn axis_segments() {
        for &theta in &[0.7, 2.0, PI] {
            for &n2 in &[1.0, 0.5] {
                let lo = n2 * half_sin(theta).powi(2);
                for (x, y) in [(n2.min(lo * 1.001), 0.0), (0.0, n2.min(lo * 1.001)), (n2, 0.0), (0.0, n2)] {
                    assert!(regime_membership(&pt(x, y, n2), theta).unwrap().0);
                }
                for (x, y) in [(lo * 0.99, 0.0), (0.0, lo * 0.99)] {
                    assert!(!regime_membership(&pt(x, y, n2), theta).unwrap().0);
                }
            }
        }
    }

    /// Maximum of `τ_BD` over a fine scan of the `(r₂, r₇)` circle, keeping
    /// only non-negative populations.
    fn circle_scan(c: f64, theta: f64, gap: f64) -> f64 {
        let steps = 200_000;
        let rad = c.sqrt();
        let s3 = 3f64.sqrt();
        (0..steps)
            .map(|i| 2.0 * PI * i as f64 / steps as f64)
            .map(|a| (rad * a.cos(), rad * a.sin()))
            .filter(|&(r2, r7)| {
                let p0 = 1.0 / 3.0 + (r2 + r7 / s3) / s3;
                let p1 = 1.0 / 3.0 + (-r2 + r7 / s3) / s3;
                let p2 = 1.0 / 3.0 - 2.0 * r7 / 3.0;
                p0 >= 0.0 && p1 >= 0.0 && p2 >= 0.0
            })
            .map(|(r2, r7)| tau_bd_diag(r2, r7, theta, gap))
            .fold(0.0, f64::max)
    }

    #[test]
    fn circle_max_matches_scan() {
        for &c in &[0.0, 0.1, 0.25, 1.0 / 3.0, 0.4, 0.6, 0.74, 0.9] {
            let p = pt(0.0, 1.0 - c, 1.0);
            let closed = tau_circle_max(&p, 1.1, 1.0).unwrap();
            assert!((closed - circle_scan(c, 1.1, 1.0)).abs() < 1e-4, "c = {c}");
        }
    }

    #[test]
    fn circle_max_examples() {
        assert_abs_diff_eq!(tau_circle_max(&pt(0.3, 0.2, 0.5), 1.0, 2.0).unwrap(), 0.25, epsilon = 1e-15);
        // both branches at c = 1/3
        let theta = 1.2;
        let b1 = theta / (2.0 * (1.0 - 4.0 / 9.0f64).sqrt());
        let m: f64 = 0.5 + ((1.0 / 3.0 - 0.25) / 3.0f64).sqrt();
        let b2 = theta / (2.0 * (1.0 - m * m).sqrt());
        assert_abs_diff_eq!(b1, b2, epsilon = 1e-12);
        assert_abs_diff_eq!(b1, 3.0 * theta / (2.0 * 5f64.sqrt()), epsilon = 1e-12);
    }

    #[test]
    fn critical_angle_continuity() {
        let tc = critical_angle();
        let c = tc.cos();
        let hi = 3f64.sqrt() * tc / (2.0 * (1.0 - 2.0 * c).sqrt());
        let b = ((1.0 + 2.0 * c) / 3.0).sqrt() + 1.0;
        let lo = tc / (2.0 * (1.0 - 0.25 * b * b).sqrt());
        assert_abs_diff_eq!(hi, lo, epsilon = 1e-10);
        assert_abs_diff_eq!(hi, 3.0 * tc / (2.0 * 5f64.sqrt()), epsilon = 1e-10);
        assert_abs_diff_eq!(max_scaled_tau_bd(PI).unwrap(), FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn closed_max_matches_grid_over_reachable_set() {
        for &theta in &[0.6, 1.5, critical_angle(), 2.4, PI] {
            let mut best: f64 = 0.0;
            let m = 400;
            for i in 0..=m {
                for j in 0..=(m - i) {
                    let (x, y) = (i as f64 / m as f64, j as f64 / m as f64);
                    if x + y > 1.0 {
                        continue;
                    }
                    let p = pt(x, y, 1.0);
                    if regime_membership(&p, theta).unwrap().0 {
                        best = best.max(tau_circle_max(&p, theta, 1.0).unwrap());
                    }
                }
            }
            let closed = max_scaled_tau_bd(theta).unwrap();
            assert!(best <= closed + 1e-9, "Θ={theta}: grid {best} > closed {closed}");
            assert!(closed - best < 5e-3, "Θ={theta}: grid {best} vs closed {closed}");
        }
    }

    #[test]
    fn connectivity_threshold() {
        assert!(regime_connected(1.0, 2.0 * PI / 3.0));
        assert!(!regime_connected(1.0, 2.0 * PI / 3.0 + 1e-6));
        assert!(regime_connected(0.4, 1.0));
    }

    #[test]
    fn bd_validity_examples() {
        // diagonal weight zero: always valid
        for &(x, y) in &[(0.2, 0.8), (0.7, 0.3), (1.0, 0.0)] {
            assert!(bd_validity(&pt(x, y, 1.0), FRAC_PI_3, 1.0).unwrap());
        }
        assert!(!bd_validity(&pt(0.0, 0.0, 1.0), FRAC_PI_3, 1.0).unwrap());
    }

    #[test]
    fn h_examples() {
        assert_abs_diff_eq!(h1(0.0, PI).unwrap(), 2.0, epsilon = 1e-15);
        for &theta in &[0.1, 1.0, 2.0, PI] {
            assert_abs_diff_eq!(h1(1.0 / 3.0, theta).unwrap(), h2(1.0 / 3.0, theta).unwrap(), epsilon = 1e-12);
        }
        assert_eq!(h2(0.2, 1.0), None);
        assert_eq!(h1(0.8, 1.0), None);
    }

    #[test]
    fn h_minima_match_dense_grid() {
        for &theta in &[0.05, 0.7, 1.9, PI] {
            let (m1, m2) = h_minima(theta).unwrap();
            let grid = |f: &dyn Fn(f64) -> Option<f64>, a: f64, b: f64| {
                (0..=10_000).filter_map(|i| f(a + (b - a) * i as f64 / 10_000.0)).fold(f64::INFINITY, f64::min)
            };
            let g1 = grid(&|c| h1(c, theta), 0.0, 1.0 / 3.0);
            let g2 = grid(&|c| h2(c, theta), 1.0 / 3.0, 0.75 - 1e-9);
            assert!((m1 - g1).abs() < 1e-6 && m1 <= g1 + 1e-12);
            assert!((m2 - g2).abs() < 1e-6 && m2 <= g2 + 1e-12);
            assert!(m1 >= 1.0 - 1e-9 && m2 >= 1.0 - 1e-9, "Θ={theta}: {m1}, {m2}");
        }
    }

    #[test]
    fn circle_maximizer_attains_circle_max() {
        for i in 0..=100 {
            let c = i as f64 / 100.0 * 0.7;
            let p = XYPoint::new(0.8 - c, 0.2, 1.0).unwrap();
            let (r2, r7) = circle_maximizer(p.diagonal_weight()).unwrap();
            assert!((r2 * r2 + r7 * r7 - p.diagonal_weight()).abs() < 1e-12);
            let want = tau_circle_max(&p, 1.0, 1.0).unwrap();
            assert!((tau_bd_diag(r2, r7, 1.0, 1.0) - want).abs() <= 1e-12 * want);
        }
    }
}
