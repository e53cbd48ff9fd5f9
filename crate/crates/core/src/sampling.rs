//! Seeded random states, unitaries and per-sample RNG streams.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bloch::DensityMatrix;
use crate::error::{QslError, Result};

const MAX_REJECTIONS: usize = 100_000;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent stream for sample `index` of a run seeded with `seed`, so
/// results do not depend on how samples are spread over workers.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(index)))
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<C64> {
    DMatrix::from_fn(n, n, |_, _| complex_normal(rng))
}

/// Haar-random unitary: QR of a Ginibre matrix with the phases of `R`'s
/// diagonal moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<C64> {
    let qr = ginibre(rng, n).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(QslError::InvalidDimension(n));
    }
    Ok(())
}

/// Hilbert-Schmidt random mixed state `GG†/Tr(GG†)`.
pub fn random_mixed_state<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<DensityMatrix> {
    check_n(n)?;
    let g = ginibre(rng, n);
    let m = &g * g.adjoint();
    let tr = m.trace();
    Ok(DensityMatrix::new_unchecked(m / tr))
}

pub fn random_pure_state<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<DensityMatrix> {
    check_n(n)?;
    let v: Vec<C64> = (0..n).map(|_| complex_normal(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    DensityMatrix::from_pure(&v.iter().map(|z| z / norm).collect::<Vec<_>>())
}

/// Random state with a prescribed Bloch length: eigenvalues drawn uniformly
/// from the sphere `Σλ² = (1 + (N−1)|r|²)/N` inside the simplex (by
/// rejection), rotated by a Haar unitary. `|r|² = 1` gives a Haar pure state.
pub fn random_state_with_norm2<R: Rng + ?Sized>(rng: &mut R, n: usize, norm2: f64) -> Result<DensityMatrix> {
    check_n(n)?;
    if !(0.0..=1.0 + 1e-12).contains(&norm2) {
        return Err(QslError::InvalidParameter(format!("|r|² = {norm2} not in [0, 1]")));
    }
    if norm2 >= 1.0 - 1e-12 {
        return random_pure_state(rng, n);
    }
    let nf = n as f64;
    // |λ − 𝟙/N|² = Σλ² − 1/N
    let radius = ((nf - 1.0) * norm2 / nf).sqrt();
    for _ in 0..MAX_REJECTIONS {
        let mut d: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let mean = d.iter().sum::<f64>() / nf;
        d.iter_mut().for_each(|x| *x -= mean);
        let len = d.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len == 0.0 {
            continue;
        }
        let lambda: Vec<f64> = d.iter().map(|x| 1.0 / nf + radius * x / len).collect();
        if lambda.iter().all(|&l| l >= 0.0) {
            let u = haar_unitary(rng, n);
            let diag = DMatrix::from_diagonal(&DVector::from_iterator(n, lambda.iter().map(|&l| C64::new(l, 0.0))));
            let mut m = &u * diag * u.adjoint();
            // exact Hermiticity for downstream checks
            let mt = m.adjoint();
            m = (m + mt) * C64::new(0.5, 0.0);
            return Ok(DensityMatrix::new_unchecked(m));
        }
    }
    Err(QslError::Domain(format!("no physical spectrum found for |r|² = {norm2} in dimension {n}")))
}
