//! SU(N) generators and the Bloch-vector representation of density matrices.
//!
//! Index convention (0-based): for a level pair `(j, k)` with `1 <= j < N` and
//! `k < j`, index `j² + 2k − 1` is the real symmetric generator and `j² + 2k`
//! the imaginary antisymmetric one. The diagonal generator for `l = 2..=N`
//! sits at index `l² − 2`. At `N = 3` this reproduces the Gell-Mann ordering
//! λ₀…λ₇ with λ₂ = diag(1, −1, 0) and λ₇ = diag(1, 1, −2)/√3.
//!
//! With this convention the Bloch vector `(0, 0, 1)` of a qubit is the ground
//! state `|E₀⟩`, i.e. `+z` points at the lower level.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{QslError, Result};

/// Default eigenvalue tolerance for the positivity test.
pub const DEFAULT_PSD_TOL: f64 = 1e-10;
/// Largest Hermiticity defect accepted when reading a density matrix.
pub const HERMITIAN_TOL: f64 = 1e-9;
/// Largest trace defect accepted when reading a density matrix.
pub const TRACE_TOL: f64 = 1e-9;

/// Bloch index of the symmetric generator for the pair `(j, k)`, `k < j`.
#[inline]
pub fn sym_index(j: usize, k: usize) -> usize {
    debug_assert!(k < j);
    j * j + 2 * k - 1
}

/// Bloch index of the antisymmetric generator for the pair `(j, k)`, `k < j`.
#[inline]
pub fn anti_index(j: usize, k: usize) -> usize {
    debug_assert!(k < j);
    j * j + 2 * k
}

/// Bloch index of the diagonal generator with `l` nonzero entries, `2 <= l <= N`.
#[inline]
pub fn diag_index(l: usize) -> usize {
    debug_assert!(l >= 2);
    l * l - 2
}

/// All level pairs `(j, k)` with `k < j < n`, in Bloch-index order.
pub fn level_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for j in 1..n {
        for k in 0..j {
            out.push((j, k));
        }
    }
    out
}

/// Entry `a` of the `l`-th diagonal generator.
#[inline]
fn diag_entry(l: usize, a: usize) -> f64 {
    let norm = (2.0 / (l * (l - 1)) as f64).sqrt();
    if a + 1 < l {
        norm
    } else if a + 1 == l {
        norm * (1.0 - l as f64)
    } else {
        0.0
    }
}

/// `√(N(N−1)/2)`, the prefactor of `r·λ` in the Bloch expansion.
#[inline]
pub fn bloch_scale(n: usize) -> f64 {
    ((n * (n - 1)) as f64 / 2.0).sqrt()
}

fn check_dim(n: usize) -> Result<()> {
    if n < 2 {
        Err(QslError::InvalidDimension(n))
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GeneratorSet {
    dim: usize,
    matrices: Vec<DMatrix<C64>>,
}

impl GeneratorSet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrices(&self) -> &[DMatrix<C64>] {
        &self.matrices
    }

    pub fn get(&self, index: usize) -> &DMatrix<C64> {
        &self.matrices[index]
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }
}

/// Builds the `N² − 1` generators of SU(N) in the crate's index order.
pub fn su_generators(n: usize) -> Result<GeneratorSet> {
    check_dim(n)?;
    let zero = DMatrix::<C64>::zeros(n, n);
    let mut matrices = vec![zero; n * n - 1];
    for (j, k) in level_pairs(n) {
        let sym = &mut matrices[sym_index(j, k)];
        sym[(k, j)] = C64::new(1.0, 0.0);
        sym[(j, k)] = C64::new(1.0, 0.0);
        let anti = &mut matrices[anti_index(j, k)];
        anti[(k, j)] = C64::new(0.0, -1.0);
        anti[(j, k)] = C64::new(0.0, 1.0);
    }
    for l in 2..=n {
        let m = &mut matrices[diag_index(l)];
        for a in 0..l {
            m[(a, a)] = C64::new(diag_entry(l, a), 0.0);
        }
    }
    Ok(GeneratorSet { dim: n, matrices })
}

/// A real Bloch vector of length `N² − 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochState {
    dim: usize,
    r: Vec<f64>,
}

impl BlochState {
    pub fn new(dim: usize, r: Vec<f64>) -> Result<Self> {
        check_dim(dim)?;
        if r.len() != dim * dim - 1 {
            return Err(QslError::DimensionMismatch { expected: dim * dim - 1, got: r.len() });
        }
        if r.iter().any(|v| !v.is_finite()) {
            return Err(QslError::InvalidState("non-finite Bloch component".into()));
        }
        Ok(Self { dim, r })
    }

    /// Infers `N` from the vector length.
    pub fn from_components(r: Vec<f64>) -> Result<Self> {
        let dim = dim_from_bloch_len(r.len())
            .ok_or_else(|| QslError::Parse(format!("length {} is not N²−1", r.len())))?;
        Self::new(dim, r)
    }

    pub fn zero(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self { dim, r: vec![0.0; dim * dim - 1] })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[f64] {
        &self.r
    }

    pub fn into_components(self) -> Vec<f64> {
        self.r
    }

    pub fn norm_sqr(&self) -> f64 {
        self.r.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `Tr ρ² = 1/N + (N−1)|r|²/N`.
    pub fn purity(&self) -> f64 {
        let n = self.dim as f64;
        1.0 / n + (n - 1.0) * self.norm_sqr() / n
    }

    pub fn dot(&self, other: &BlochState) -> Result<f64> {
        if self.dim != other.dim {
            return Err(QslError::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        Ok(self.r.iter().zip(&other.r).map(|(a, b)| a * b).sum())
    }

    /// `r²_sym + r²_anti` for the pair `(j, k)`.
    pub fn pair_weight(&self, j: usize, k: usize) -> f64 {
        let a = self.r[sym_index(j, k)];
        let b = self.r[anti_index(j, k)];
        a * a + b * b
    }
}

impl Serialize for BlochState {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.r.serialize(s)
    }
}

impl<'de> Deserialize<'de> for BlochState {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = Vec::<f64>::deserialize(d)?;
        BlochState::from_components(r).map_err(D::Error::custom)
    }
}

fn dim_from_bloch_len(len: usize) -> Option<usize> {
    let n = ((len + 1) as f64).sqrt().round() as usize;
    (n >= 2 && n * n == len + 1).then_some(n)
}

/// An `N × N` density matrix in the energy eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    data: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validates Hermiticity and unit trace; positivity is checked separately.
    pub fn new(data: DMatrix<C64>) -> Result<Self> {
        let n = data.nrows();
        if data.ncols() != n {
            return Err(QslError::InvalidState(format!("matrix is {}x{}", n, data.ncols())));
        }
        check_dim(n)?;
        let asym = hermiticity_defect(&data);
        if asym > HERMITIAN_TOL {
            return Err(QslError::InvalidState(format!("not Hermitian (defect {asym:.3e})")));
        }
        let tr = data.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(QslError::InvalidState(format!("trace {tr} differs from 1")));
        }
        Ok(Self { data })
    }

    /// Wraps a matrix without validation. Used by integrators that maintain
    /// the invariants themselves.
    pub fn new_unchecked(data: DMatrix<C64>) -> Self {
        Self { data }
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(Self { data: DMatrix::identity(n, n) / C64::new(n as f64, 0.0) })
    }

    /// `|E_k⟩⟨E_k|`.
    pub fn eigenstate(n: usize, k: usize) -> Result<Self> {
        check_dim(n)?;
        if k >= n {
            return Err(QslError::InvalidParameter(format!("level {k} out of range for N = {n}")));
        }
        let mut data = DMatrix::zeros(n, n);
        data[(k, k)] = C64::new(1.0, 0.0);
        Ok(Self { data })
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalised) amplitude vector.
    pub fn from_pure(amplitudes: &[C64]) -> Result<Self> {
        let n = amplitudes.len();
        check_dim(n)?;
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !(norm > 0.0) {
            return Err(QslError::InvalidState("zero state vector".into()));
        }
        let data = DMatrix::from_fn(n, n, |a, b| amplitudes[a] * amplitudes[b].conj() / norm);
        Ok(Self { data })
    }

    /// Diagonal state with the given populations.
    pub fn diagonal(populations: &[f64]) -> Result<Self> {
        let n = populations.len();
        let mut data = DMatrix::zeros(n, n);
        for (a, p) in populations.iter().enumerate() {
            data[(a, a)] = C64::new(*p, 0.0);
        }
        Self::new(data)
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[(row, col)]
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|a| self.data[(a, a)].re).collect()
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `Re Tr(ρσ)` for two Hermitian matrices.
    pub fn overlap(&self, other: &DensityMatrix) -> f64 {
        self.data.iter().zip(other.data.iter()).map(|(a, b)| (a * b.conj()).re).sum()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.data.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.data)
    }
}

fn hermiticity_defect(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for a in 0..n {
        for b in a..n {
            worst = worst.max((m[(a, b)] - m[(b, a)].conj()).norm());
        }
    }
    worst
}

impl Serialize for DensityMatrix {
    /// Row-major list of `[re, im]` pairs.
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.dim();
        let mut flat = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                let z = self.data[(a, b)];
                flat.push([z.re, z.im]);
            }
        }
        flat.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let flat = Vec::<[f64; 2]>::deserialize(d)?;
        let n = (flat.len() as f64).sqrt().round() as usize;
        if n * n != flat.len() {
            return Err(D::Error::custom(format!("{} entries do not form a square matrix", flat.len())));
        }
        let data = DMatrix::from_fn(n, n, |a, b| {
            let [re, im] = flat[a * n + b];
            C64::new(re, im)
        });
        DensityMatrix::new(data).map_err(D::Error::custom)
    }
}

/// `ρ = (1/N)(𝟙 + √(N(N−1)/2) r·λ)`. The result is Hermitian with unit trace
/// but need not be positive; see [`physicality_check`].
pub fn density_from_bloch(s: &BlochState) -> DensityMatrix {
    let n = s.dim;
    let nf = n as f64;
    let scale = bloch_scale(n) / nf;
    let r = &s.r;
    let mut data = DMatrix::<C64>::zeros(n, n);
    for a in 0..n {
        let mut d = 1.0 / nf;
        for l in (a + 1).max(2)..=n {
            d += scale * r[diag_index(l)] * diag_entry(l, a);
        }
        data[(a, a)] = C64::new(d, 0.0);
    }
    for (j, k) in level_pairs(n) {
        let z = C64::new(r[sym_index(j, k)], -r[anti_index(j, k)]) * scale;
        data[(k, j)] = z;
        data[(j, k)] = z.conj();
    }
    DensityMatrix { data }
}

/// Inverse of [`density_from_bloch`]: `r_i = Tr(ρλ_i)·√(N/(2(N−1)))`.
pub fn bloch_from_density(rho: &DensityMatrix) -> Result<BlochState> {
    let n = rho.dim();
    check_dim(n)?;
    let asym = rho.hermiticity_defect();
    if asym > HERMITIAN_TOL {
        return Err(QslError::InvalidState(format!("not Hermitian (defect {asym:.3e})")));
    }
    let factor = (n as f64 / (2.0 * (n as f64 - 1.0))).sqrt();
    let m = &rho.data;
    let mut r = vec![0.0; n * n - 1];
    for (j, k) in level_pairs(n) {
        // Tr(ρλ_sym) = 2 Re ρ_kj, Tr(ρλ_anti) = −2 Im ρ_kj; average both
        // off-diagonal copies so tiny asymmetries cancel.
        let z = (m[(k, j)] + m[(j, k)].conj()) * 0.5;
        r[sym_index(j, k)] = 2.0 * z.re * factor;
        r[anti_index(j, k)] = -2.0 * z.im * factor;
    }
    for l in 2..=n {
        let tr: f64 = (0..l).map(|a| m[(a, a)].re * diag_entry(l, a)).sum();
        r[diag_index(l)] = tr * factor;
    }
    Ok(BlochState { dim: n, r })
}

/// True iff every eigenvalue of the density matrix is at least `−tol`.
pub fn physicality_check(s: &BlochState, tol: f64) -> bool {
    density_from_bloch(s).eigenvalues().first().is_some_and(|&lo| lo >= -tol)
}

/// Angle between two Bloch vectors, in `[0, π]`.
pub fn target_angle(r0: &BlochState, rt: &BlochState) -> Result<f64> {
    let n0 = r0.norm();
    let nt = rt.norm();
    if n0 == 0.0 || nt == 0.0 {
        return Err(QslError::UndefinedAngle);
    }
    let c = r0.dot(rt)? / (n0 * nt);
    Ok(c.clamp(-1.0, 1.0).acos())
}
