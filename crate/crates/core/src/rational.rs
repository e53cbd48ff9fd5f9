//! Continued-fraction approximation of real ratios.

/// Convergents `p/q` of the continued fraction of `x >= 0`, in order, stopping
/// before the first denominator above `max_den` or once the expansion ends.
pub fn convergents(x: f64, max_den: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    if !x.is_finite() || x < 0.0 || max_den == 0 {
        return out;
    }
    let (mut h1, mut h2) = (1u64, 0u64);
    let (mut k1, mut k2) = (0u64, 1u64);
    let mut rest = x;
    for _ in 0..64 {
        let a = rest.floor();
        if a > u64::MAX as f64 / 2.0 {
            break;
        }
        let a = a as u64;
        let (Some(h), Some(k)) = (
            a.checked_mul(h1).and_then(|v| v.checked_add(h2)),
            a.checked_mul(k1).and_then(|v| v.checked_add(k2)),
        ) else {
            break;
        };
        if k > max_den {
            break;
        }
        out.push((h, k));
        let frac = rest - a as f64;
        if frac < 1e-15 {
            break;
        }
        rest = 1.0 / frac;
        (h2, h1) = (h1, h);
        (k2, k1) = (k1, k);
    }
    out
}

/// Smallest-denominator convergent of `x` within `tol` of it, if any has a
/// denominator of at most `max_den`.
pub fn rational_approx(x: f64, max_den: u64, tol: f64) -> Option<(u64, u64)> {
    convergents(x, max_den).into_iter().find(|&(p, q)| (x - p as f64 / q as f64).abs() < tol)
}

/// If `a / b` is (approximately) a ratio of two odd integers, returns it in
/// lowest terms with the smaller value first.
pub fn odd_ratio(a: f64, b: f64, max_den: u64, tol: f64) -> Option<(u64, u64)> {
    if !(a > 0.0 && b > 0.0) {
        return None;
    }
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let (p, q) = rational_approx(lo / hi, max_den, tol)?;
    (p % 2 == 1 && q % 2 == 1).then_some((p, q))
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        0
    } else {
        a / gcd(a, b) * b
    }
}
