//! Dense symmetric PSD matrices and the Cholesky-based primitives built on them.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPsd { pivot: usize, value: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("matrix has negative eigenvalue {min:e} (largest magnitude {max:e})")]
    Indefinite { min: f64, max: f64 },
}

/// Symmetric `dim × dim` matrix stored row-major.
///
/// Construction averages the input with its transpose, so the stored entries
/// are exactly symmetric. Positive semidefiniteness is checked on demand by
/// [`PsdMatrix::check_psd`] rather than on every construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix", into = "RawMatrix")]
pub struct PsdMatrix {
    dim: usize,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl TryFrom<RawMatrix> for PsdMatrix {
    type Error = KernelError;
    fn try_from(raw: RawMatrix) -> Result<Self, Self::Error> {
        PsdMatrix::new(raw.dim, raw.entries)
    }
}

impl From<PsdMatrix> for RawMatrix {
    fn from(m: PsdMatrix) -> Self {
        RawMatrix { dim: m.dim, entries: m.data }
    }
}

impl PsdMatrix {
    /// Builds a matrix from row-major entries, symmetrizing by averaging with the transpose.
    pub fn new(dim: usize, entries: Vec<f64>) -> Result<Self, KernelError> {
        if entries.len() != dim * dim {
            return Err(KernelError::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(KernelError::NonFinite);
        }
        let mut data = entries;
        for i in 0..dim {
            for j in (i + 1)..dim {
                let avg = 0.5 * (data[i * dim + j] + data[j * dim + i]);
                data[i * dim + j] = avg;
                data[j * dim + i] = avg;
            }
        }
        Ok(PsdMatrix { dim, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, KernelError> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(KernelError::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            entries.extend_from_slice(row);
        }
        Self::new(dim, entries)
    }

    pub fn zeros(dim: usize) -> Self {
        PsdMatrix {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, 1.0)
    }

    pub fn scaled_identity(dim: usize, c: f64) -> Self {
        let mut m = Self::zeros(dim);
        m.add_diagonal(c);
        m
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m.data[i * diag.len() + i] = v;
        }
        m
    }

    /// `x xᵀ`.
    pub fn outer(x: &[f64]) -> Self {
        let mut m = Self::zeros(x.len());
        m.add_outer(x, 1.0);
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn add_diagonal(&mut self, c: f64) {
        for i in 0..self.dim {
            self.data[i * self.dim + i] += c;
        }
    }

    /// `self += w · x xᵀ`, written to both triangles from one product so symmetry is exact.
    pub fn add_outer(&mut self, x: &[f64], w: f64) {
        debug_assert_eq!(x.len(), self.dim);
        let d = self.dim;
        for i in 0..d {
            let wi = w * x[i];
            if wi == 0.0 {
                continue;
            }
            for j in i..d {
                let v = wi * x[j];
                self.data[i * d + j] += v;
                if j != i {
                    self.data[j * d + i] += v;
                }
            }
        }
    }

    /// `self += c · other`.
    pub fn add_scaled(&mut self, other: &PsdMatrix, c: f64) {
        debug_assert_eq!(other.dim, self.dim);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
    }

    pub fn scaled(&self, c: f64) -> PsdMatrix {
        PsdMatrix {
            dim: self.dim,
            data: self.data.iter().map(|v| c * v).collect(),
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim;
        (0..d)
            .map(|i| dot(&self.data[i * d..(i + 1) * d], x))
            .collect()
    }

    /// `xᵀ A x` without any inversion.
    pub fn bilinear(&self, x: &[f64]) -> f64 {
        let d = self.dim;
        let mut acc = 0.0;
        for i in 0..d {
            acc += x[i] * dot(&self.data[i * d..(i + 1) * d], x);
        }
        acc
    }

    /// Fails if some eigenvalue is below `-1e-10` times the largest eigenvalue magnitude.
    pub fn check_psd(&self) -> Result<(), KernelError> {
        let (min, max) = eigen_bounds(self);
        let scale = min.abs().max(max.abs());
        if min < -1e-10 * scale {
            return Err(KernelError::Indefinite { min, max });
        }
        Ok(())
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Lower-triangular Cholesky factor `L` with `L Lᵀ = A + jitter·I`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky {
    dim: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Factors `A + jitter·I`. On failure, retries once with an extra
    /// `1e-12 · trace(A)/d` on the diagonal.
    pub fn factor(a: &PsdMatrix, jitter: f64) -> Result<Self, KernelError> {
        match Self::factor_exact(a, jitter) {
            Ok(c) => Ok(c),
            Err(err) => {
                let extra = 1e-12 * a.trace() / a.dim.max(1) as f64;
                if extra > 0.0 {
                    Self::factor_exact(a, jitter + extra)
                } else {
                    Err(err)
                }
            }
        }
    }

    /// Factors `A + jitter·I` with no retry.
    pub fn factor_exact(a: &PsdMatrix, jitter: f64) -> Result<Self, KernelError> {
        let d = a.dim;
        let mut l = vec![0.0; d * d];
        for j in 0..d {
            let mut s = a.data[j * d + j] + jitter;
            for k in 0..j {
                s -= l[j * d + k] * l[j * d + k];
            }
            if !(s > 0.0) || !s.is_finite() {
                return Err(KernelError::NotPsd { pivot: j, value: s });
            }
            let ljj = s.sqrt();
            l[j * d + j] = ljj;
            for i in (j + 1)..d {
                let mut s = a.data[i * d + j];
                for k in 0..j {
                    s -= l[i * d + k] * l[j * d + k];
                }
                l[i * d + j] = s / ljj;
            }
        }
        Ok(Cholesky { dim: d, l })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row-major lower-triangular factor.
    pub fn lower(&self) -> &[f64] {
        &self.l
    }

    /// Solves `L y = b`.
    pub fn forward(&self, b: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let mut y = b.to_vec();
        for i in 0..d {
            let row = &self.l[i * d..i * d + i];
            let s = y[i] - dot(row, &y[..i]);
            y[i] = s / self.l[i * d + i];
        }
        y
    }

    /// Solves `Lᵀ x = y`.
    pub fn backward(&self, y: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let mut x = y.to_vec();
        for i in (0..d).rev() {
            let mut s = x[i];
            for k in (i + 1)..d {
                s -= self.l[k * d + i] * x[k];
            }
            x[i] = s / self.l[i * d + i];
        }
        x
    }

    /// Solves `(L Lᵀ) x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.backward(&self.forward(b))
    }

    /// `xᵀ (L Lᵀ)⁻¹ x = ‖L⁻¹ x‖²`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        let d = self.dim;
        debug_assert_eq!(x.len(), d);
        let mut acc = 0.0;
        let mut y = [0.0f64; 32];
        if d <= 32 {
            for i in 0..d {
                let row = &self.l[i * d..i * d + i];
                let yi = (x[i] - dot(row, &y[..i])) / self.l[i * d + i];
                y[i] = yi;
                acc += yi * yi;
            }
            return acc;
        }
        let y = self.forward(x);
        dot(&y, &y)
    }

    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.dim)
            .map(|i| self.l[i * self.dim + i].ln())
            .sum::<f64>()
    }

    /// `(L Lᵀ)⁻¹` from column-wise solves.
    pub fn inverse(&self) -> PsdMatrix {
        let d = self.dim;
        let mut entries = vec![0.0; d * d];
        let mut e = vec![0.0; d];
        for j in 0..d {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            let col = self.solve(&e);
            for i in 0..d {
                entries[i * d + j] = col[i];
            }
        }
        PsdMatrix::new(d, entries).expect("finite inverse")
    }

    /// Turns the factor of `A` into the factor of `A + x xᵀ`.
    pub fn rank_one_update(&mut self, x: &[f64]) {
        let d = self.dim;
        let mut w = x.to_vec();
        for k in 0..d {
            let lkk = self.l[k * d + k];
            let r = (lkk * lkk + w[k] * w[k]).sqrt();
            let c = r / lkk;
            let s = w[k] / lkk;
            self.l[k * d + k] = r;
            for i in (k + 1)..d {
                let lik = (self.l[i * d + k] + s * w[i]) / c;
                self.l[i * d + k] = lik;
                w[i] = c * w[i] - s * lik;
            }
        }
    }
}

pub fn chol_factor(a: &PsdMatrix, jitter: f64) -> Result<Cholesky, KernelError> {
    Cholesky::factor(a, jitter)
}

/// `xᵀ (A + jitter·I)⁻¹ x`.
pub fn quad_form(a: &PsdMatrix, jitter: f64, x: &[f64]) -> Result<f64, KernelError> {
    if x.len() != a.dim {
        return Err(KernelError::DimensionMismatch {
            expected: a.dim,
            found: x.len(),
        });
    }
    Ok(Cholesky::factor(a, jitter)?.quad_form(x))
}

/// `ln det(A + jitter·I)`.
pub fn log_det(a: &PsdMatrix, jitter: f64) -> Result<f64, KernelError> {
    Ok(Cholesky::factor(a, jitter)?.log_det())
}

/// Eigenvalues of a symmetric matrix in ascending order (cyclic Jacobi).
pub fn symmetric_eigenvalues(a: &PsdMatrix) -> Vec<f64> {
    let d = a.dim;
    let mut m = a.data.clone();
    let frob: f64 = m.iter().map(|v| v * v).sum::<f64>().sqrt();
    if frob == 0.0 {
        return vec![0.0; d];
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..d {
            for j in (i + 1)..d {
                off += m[i * d + j] * m[i * d + j];
            }
        }
        if off.sqrt() <= 1e-15 * frob {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = m[p * d + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * d + p];
                let aqq = m[q * d + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let akp = m[k * d + p];
                    let akq = m[k * d + q];
                    m[k * d + p] = c * akp - s * akq;
                    m[k * d + q] = s * akp + c * akq;
                }
                for k in 0..d {
                    let apk = m[p * d + k];
                    let aqk = m[q * d + k];
                    m[p * d + k] = c * apk - s * aqk;
                    m[q * d + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..d).map(|i| m[i * d + i]).collect();
    eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
    eig
}

/// Smallest and largest eigenvalue.
pub fn eigen_bounds(a: &PsdMatrix) -> (f64, f64) {
    let eig = symmetric_eigenvalues(a);
    match (eig.first(), eig.last()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => (0.0, 0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_psd(rng: &mut ChaCha8Rng, d: usize) -> PsdMatrix {
        let b: Vec<f64> = (0..d * d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut a = PsdMatrix::zeros(d);
        for r in 0..d {
            a.add_outer(&b[r * d..(r + 1) * d], 1.0);
        }
        a.add_diagonal(0.01);
        a
    }

    fn to_na(a: &PsdMatrix) -> DMatrix<f64> {
        DMatrix::from_row_slice(a.dim(), a.dim(), a.entries())
    }

    #[test]
    fn identity_factor_is_identity() {
        let c = chol_factor(&PsdMatrix::identity(2), 0.0).unwrap();
        assert_eq!(c.lower(), &[1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn diagonal_factor_is_root() {
        let c = chol_factor(&PsdMatrix::diagonal(&[4.0, 9.0]), 0.0).unwrap();
        assert_eq!(c.lower(), &[2.0, 0.0, 0.0, 3.0]);
    }

    #[test]
    fn factor_reconstructs_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_psd(&mut rng, 5);
        let c = chol_factor(&a, 0.0).unwrap();
        let l = DMatrix::from_row_slice(5, 5, c.lower());
        let rec = &l * l.transpose();
        for i in 0..5 {
            for j in 0..5 {
                assert!((rec[(i, j)] - a.get(i, j)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn quad_form_closed_forms() {
        assert_eq!(
            quad_form(&PsdMatrix::identity(2), 0.0, &[1.0, 0.0]).unwrap(),
            1.0
        );
        let q = quad_form(&PsdMatrix::diagonal(&[2.0, 1.0]), 0.0, &[1.0, 1.0]).unwrap();
        assert!((q - 1.5).abs() < 1e-15);
    }

    #[test]
    fn quad_form_matches_explicit_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for d in 1..12 {
            let a = random_psd(&mut rng, d);
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let inv = to_na(&a).try_inverse().unwrap();
            let xv = nalgebra::DVector::from_vec(x.clone());
            let oracle = (xv.transpose() * inv * &xv)[(0, 0)];
            let got = quad_form(&a, 0.0, &x).unwrap();
            assert!((got - oracle).abs() <= 1e-9 * oracle.abs());
        }
    }

    #[test]
    fn log_det_closed_forms() {
        assert_eq!(log_det(&PsdMatrix::identity(3), 0.0).unwrap(), 0.0);
        let e = std::f64::consts::E;
        let v = log_det(&PsdMatrix::diagonal(&[e, e * e]), 0.0).unwrap();
        assert!((v - 3.0).abs() < 1e-14);
    }

    #[test]
    fn log_det_matches_eigen_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_psd(&mut rng, 4);
        let eig = to_na(&a).symmetric_eigen().eigenvalues;
        let oracle: f64 = eig.iter().map(|v| v.ln()).sum();
        let got = log_det(&a, 0.0).unwrap();
        assert!((got - oracle).abs() <= 1e-9 * oracle.abs().max(1.0));
    }

    #[test]
    fn eigen_bounds_closed_forms() {
        assert_eq!(eigen_bounds(&PsdMatrix::diagonal(&[1.0, 2.0, 3.0])), (1.0, 3.0));
        assert_eq!(eigen_bounds(&PsdMatrix::identity(4)), (1.0, 1.0));
    }

    #[test]
    fn eigen_bounds_bracket_rayleigh_quotients() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_psd(&mut rng, 6);
        let (lo, hi) = eigen_bounds(&a);
        for _ in 0..100 {
            let mut v: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
            let n = norm(&v);
            v.iter_mut().for_each(|x| *x /= n);
            let r = a.bilinear(&v);
            assert!(r >= lo - 1e-12 && r <= hi + 1e-12);
        }
    }

    #[test]
    fn singular_without_jitter_fails_after_retry() {
        let z = PsdMatrix::zeros(3);
        assert!(matches!(chol_factor(&z, 0.0), Err(KernelError::NotPsd { .. })));
        assert!(chol_factor(&z, 1e-9).is_ok());
    }

    #[test]
    fn retry_rescues_rank_deficient_input() {
        let a = PsdMatrix::outer(&[1.0, 1.0]);
        assert!(Cholesky::factor_exact(&a, 0.0).is_err());
        assert!(chol_factor(&a, 0.0).is_ok());
    }

    #[test]
    fn construction_symmetrizes() {
        let a = PsdMatrix::new(2, vec![1.0, 0.2, 0.4, 1.0]).unwrap();
        assert_eq!(a.get(0, 1), a.get(1, 0));
        assert!((a.get(0, 1) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn rank_one_update_matches_refactor() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut a = random_psd(&mut rng, 7);
        let mut c = chol_factor(&a, 0.0).unwrap();
        for _ in 0..20 {
            let x: Vec<f64> = (0..7).map(|_| rng.random_range(-1.0..1.0)).collect();
            a.add_outer(&x, 1.0);
            c.rank_one_update(&x);
        }
        let fresh = chol_factor(&a, 0.0).unwrap();
        for (u, v) in c.lower().iter().zip(fresh.lower()) {
            assert!((u - v).abs() < 1e-10);
        }
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = random_psd(&mut rng, 5);
        let inv = chol_factor(&a, 0.0).unwrap().inverse();
        let prod = to_na(&a) * to_na(&inv);
        for i in 0..5 {
            for j in 0..5 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((prod[(i, j)] - want).abs() < 1e-9);
            }
        }
    }

    fn psd_strategy() -> impl Strategy<Value = (PsdMatrix, Vec<f64>, Vec<f64>)> {
        (1usize..8).prop_flat_map(|d| {
            (
                prop::collection::vec(-1.0f64..1.0, d * d),
                prop::collection::vec(-1.0f64..1.0, d * d),
                prop::collection::vec(-1.0f64..1.0, d),
            )
                .prop_map(move |(b, c, x)| {
                    let mut a = PsdMatrix::zeros(d);
                    for r in 0..d {
                        a.add_outer(&b[r * d..(r + 1) * d], 1.0);
                    }
                    a.add_diagonal(1e-3);
                    (a, c, x)
                })
        })
    }

    proptest! {
        #[test]
        fn quad_form_lower_bound((a, _c, x) in psd_strategy(), j in 0.0f64..1.0) {
            let (_, hi) = eigen_bounds(&a);
            let q = quad_form(&a, j, &x).unwrap();
            prop_assert!(q >= 0.0);
            prop_assert!(q >= dot(&x, &x) / (hi + j) * (1.0 - 1e-9));
        }

        #[test]
        fn quad_form_monotone_in_loewner_order((a, c, x) in psd_strategy(), j in 0.0f64..1.0) {
            let d = a.dim();
            let mut b = a.clone();
            for r in 0..d {
                b.add_outer(&c[r * d..(r + 1) * d], 1.0);
            }
            let qa = quad_form(&a, j, &x).unwrap();
            let qb = quad_form(&b, j, &x).unwrap();
            prop_assert!(qa >= qb * (1.0 - 1e-9));
        }
    }
}
