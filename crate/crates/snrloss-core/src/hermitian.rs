//! Complex Hermitian linear-algebra kernel.
//!
//! Everything downstream (scenario builders, filters, loss laws) manipulates
//! complex covariance matrices and steering vectors, so this module carries
//! the shared matrix types plus the handful of factorizations the derivations
//! rely on:
//!
//! ```text
//! eigh(A)              A = U diag(values) U^H, values descending
//! hermitian_sqrt(A)    the unique Hermitian PSD S with S S^H = A
//! partial_cholesky(A)  N x R lower-trapezoidal G with G G^H matching the
//!                      leading blocks of A (R = N gives the full factor)
//! orth_complement(v)   N x (N-1) orthonormal basis of the complement of v
//! projector(A)         P = A (A^H A)^{-1} A^H
//! ```
//!
//! The eigensolver is the classical two-stage reduction: a complex
//! Householder tridiagonalization with a diagonal phase similarity that
//! makes the subdiagonal real (EISPACK HTRIDI lineage), followed by the
//! implicit-shift QL iteration on the real tridiagonal matrix (TQL2) with
//! the rotations accumulated straight into the complex eigenvector matrix.
//! Eigenvalues come out sorted descending and each eigenvector's phase is
//! fixed so its first component of significant magnitude is real positive,
//! which keeps eigenvector-based filters reproducible across runs.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Index;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Absolute tolerance for the Hermitian symmetry check at construction.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Eigenvalues below `-PSD_TOL * lambda_max` disqualify a matrix as PSD.
pub const PSD_TOL: f64 = 1e-10;

// ── Errors ──────────────────────────────────────────────────────────────

/// Errors from the Hermitian kernel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HermitianError {
    /// Entries violate `a[i][j] = conj(a[j][i])` beyond [`HERMITIAN_TOL`].
    NotHermitian,
    /// An entry is NaN or infinite.
    NonFinite,
    /// A dimension or rank argument is outside its valid range.
    BadRank,
    /// An eigenvalue is below `-1e-10 * lambda_max`.
    NotPSD,
    /// A Cholesky pivot underflowed `1e-12 * trace(A) / N`.
    SingularPivot,
    /// Input vector has zero norm.
    ZeroVector,
    /// Smallest singular value is at most `1e-10` times the largest.
    RankDeficient,
    /// The QL iteration exceeded its sweep cap.
    NoConvergence,
}

impl fmt::Display for HermitianError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NotHermitian => write!(f, "matrix is not Hermitian within 1e-12"),
            Self::NonFinite => write!(f, "matrix has a non-finite entry"),
            Self::BadRank => write!(f, "dimension or rank argument out of range"),
            Self::NotPSD => write!(f, "matrix is not positive semidefinite"),
            Self::SingularPivot => write!(f, "Cholesky pivot below threshold"),
            Self::ZeroVector => write!(f, "input vector has zero norm"),
            Self::RankDeficient => write!(f, "matrix is numerically rank deficient"),
            Self::NoConvergence => write!(f, "eigenvalue iteration did not converge"),
        }
    }
}

impl core::error::Error for HermitianError {}

// ── ComplexMatrix ───────────────────────────────────────────────────────

/// Dense complex matrix, row-major.
///
/// Used for everything that is not Hermitian by contract: data matrices,
/// square roots, tall orthonormal bases, transforms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    ///
    /// Fails with [`HermitianError::BadRank`] on a shape mismatch and
    /// [`HermitianError::NonFinite`] if any entry is NaN or infinite.
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self, HermitianError> {
        if rows == 0 || entries.len() != rows * cols {
            return Err(HermitianError::BadRank);
        }
        if !entries.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(HermitianError::NonFinite);
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub(crate) fn from_vec_unchecked(rows: usize, cols: usize, entries: Vec<Complex64>) -> Self {
        debug_assert_eq!(entries.len(), rows * cols);
        Self {
            rows,
            cols,
            entries,
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![Complex64::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = Complex64::ONE;
        }
        m
    }

    /// Column vector wrapping `v`.
    pub fn column_vector(v: &[Complex64]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            entries: v.to_vec(),
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    #[inline]
    pub(crate) fn entries_mut(&mut self) -> &mut [Complex64] {
        &mut self.entries
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.entries[j * self.rows + i] = self.entries[i * self.cols + j].conj();
            }
        }
        out
    }

    /// Matrix product `self * rhs`.
    ///
    /// # Panics
    /// Panics if the inner dimensions disagree.
    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.entries[i * self.cols + k];
                if a == Complex64::ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.entries[i * rhs.cols + j] += a * rhs.entries[k * rhs.cols + j];
                }
            }
        }
        out
    }

    /// Matrix-vector product `self * x`.
    ///
    /// # Panics
    /// Panics if `x.len() != self.cols()`.
    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, x.len(), "matvec dimension mismatch");
        let mut out = vec![Complex64::ZERO; self.rows];
        for i in 0..self.rows {
            let mut acc = Complex64::ZERO;
            for j in 0..self.cols {
                acc += self.entries[i * self.cols + j] * x[j];
            }
            out[i] = acc;
        }
        out
    }

    /// `self^H * x`.
    pub fn adjoint_mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.rows, x.len(), "matvec dimension mismatch");
        let mut out = vec![Complex64::ZERO; self.cols];
        for i in 0..self.rows {
            let xi = x[i];
            for j in 0..self.cols {
                out[j] += self.entries[i * self.cols + j].conj() * xi;
            }
        }
        out
    }

    /// Column `j` as a vector.
    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows)
            .map(|i| self.entries[i * self.cols + j])
            .collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.entries.iter().map(|z| z.norm_sqr()).sum())
    }

    /// Scales every entry by `c`.
    pub fn scale(&self, c: Complex64) -> Self {
        let entries = self.entries.iter().map(|z| z * c).collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            entries,
        }
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.entries[i * self.cols + j]
    }
}

// ── HermitianMatrix ─────────────────────────────────────────────────────

/// Complex Hermitian `N x N` matrix, row-major, with an optional PSD hint.
///
/// The constructor enforces `a[i][j] = conj(a[j][i])` within 1e-12 absolute
/// and then stores the exactly symmetrized entries, so every stored matrix
/// is Hermitian to the last bit. `psd_hint` marks matrices that are PSD by
/// construction (covariances, projectors); it is advisory and operations
/// that require PSD still verify it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermitianMatrix {
    dim: usize,
    entries: Vec<Complex64>,
    psd_hint: bool,
}

impl HermitianMatrix {
    /// Builds from row-major entries, validating Hermitian symmetry.
    pub fn new(
        dim: usize,
        entries: Vec<Complex64>,
        psd_hint: bool,
    ) -> Result<Self, HermitianError> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(HermitianError::BadRank);
        }
        if !entries.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(HermitianError::NonFinite);
        }
        for i in 0..dim {
            for j in 0..=i {
                let d = entries[i * dim + j] - entries[j * dim + i].conj();
                if d.norm() > HERMITIAN_TOL {
                    return Err(HermitianError::NotHermitian);
                }
            }
        }
        Ok(Self::symmetrized(dim, entries, psd_hint))
    }

    /// Symmetrizes entries exactly: `(A + A^H) / 2`, real diagonal.
    pub(crate) fn symmetrized(dim: usize, mut entries: Vec<Complex64>, psd_hint: bool) -> Self {
        for i in 0..dim {
            entries[i * dim + i] = Complex64::new(entries[i * dim + i].re, 0.0);
            for j in 0..i {
                let avg = 0.5 * (entries[i * dim + j] + entries[j * dim + i].conj());
                entries[i * dim + j] = avg;
                entries[j * dim + i] = avg.conj();
            }
        }
        Self {
            dim,
            entries,
            psd_hint,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![Complex64::ZERO; n * n];
        for i in 0..n {
            entries[i * n + i] = Complex64::ONE;
        }
        Self {
            dim: n,
            entries,
            psd_hint: true,
        }
    }

    /// Diagonal matrix from real values.
    pub fn from_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        let mut entries = vec![Complex64::ZERO; n * n];
        for i in 0..n {
            entries[i * n + i] = Complex64::new(d[i], 0.0);
        }
        Self {
            dim: n,
            entries,
            psd_hint: d.iter().all(|&x| x >= 0.0),
        }
    }

    /// `v v^H`, always PSD.
    pub fn outer(v: &[Complex64]) -> Self {
        let n = v.len();
        let mut entries = vec![Complex64::ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[i * n + j] = v[i] * v[j].conj();
            }
        }
        Self::symmetrized(n, entries, true)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn psd_hint(&self) -> bool {
        self.psd_hint
    }

    #[inline]
    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.entries[i * self.dim + i].re)
            .sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.entries.iter().map(|z| z.norm_sqr()).sum())
    }

    /// View as a general [`ComplexMatrix`].
    pub fn to_complex(&self) -> ComplexMatrix {
        ComplexMatrix::from_vec_unchecked(self.dim, self.dim, self.entries.clone())
    }

    /// `self * x`.
    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.dim, x.len(), "matvec dimension mismatch");
        let mut out = vec![Complex64::ZERO; self.dim];
        for i in 0..self.dim {
            let mut acc = Complex64::ZERO;
            for j in 0..self.dim {
                acc += self.entries[i * self.dim + j] * x[j];
            }
            out[i] = acc;
        }
        out
    }

    /// Quadratic form `x^H A y`.
    pub fn quad(&self, x: &[Complex64], y: &[Complex64]) -> Complex64 {
        let ay = self.mul_vec(y);
        dot(x, &ay)
    }

    /// Hermitian form `x^H A x`, which is real.
    pub fn herm_quad(&self, x: &[Complex64]) -> f64 {
        self.quad(x, x).re
    }

    /// `A + c * B`.
    ///
    /// # Panics
    /// Panics if dimensions differ.
    pub fn add_scaled(&self, c: f64, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + c * b)
            .collect();
        Self::symmetrized(self.dim, entries, false)
    }

    /// Scales by a real factor.
    pub fn scale(&self, c: f64) -> Self {
        let entries = self.entries.iter().map(|z| c * z).collect();
        Self {
            dim: self.dim,
            entries,
            psd_hint: self.psd_hint && c >= 0.0,
        }
    }

    /// `B^H A B` as a Hermitian matrix (congruence transform).
    ///
    /// # Panics
    /// Panics if `B.rows() != self.dim()`.
    pub fn congruence(&self, b: &ComplexMatrix) -> HermitianMatrix {
        assert_eq!(b.rows(), self.dim, "congruence dimension mismatch");
        let ab = self.to_complex().mul(b);
        let full = b.adjoint().mul(&ab);
        HermitianMatrix::symmetrized(b.cols(), full.entries, self.psd_hint)
    }
}

impl Index<(usize, usize)> for HermitianMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.entries[i * self.dim + j]
    }
}

/// Inner product `x^H y`.
#[inline]
pub fn dot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

/// Euclidean norm of a complex vector.
#[inline]
pub fn vec_norm(x: &[Complex64]) -> f64 {
    libm::sqrt(x.iter().map(|z| z.norm_sqr()).sum())
}

// ── EigenDecomp ─────────────────────────────────────────────────────────

/// Eigendecomposition `A = U diag(values) U^H`.
///
/// `values` are sorted descending. Columns of `vectors` are orthonormal and
/// phase-normalized: the first component with magnitude above 1e-8 is real
/// nonnegative.
#[derive(Debug, Clone)]
pub struct EigenDecomp {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

// ── eigh ────────────────────────────────────────────────────────────────

/// Full eigendecomposition of a Hermitian matrix.
///
/// Householder tridiagonalization followed by implicit-shift QL sweeps.
/// Fails with [`HermitianError::NoConvergence`] if an eigenvalue takes more
/// than 50 sweeps, which does not happen for finite input in practice.
pub fn eigh(a: &HermitianMatrix) -> Result<EigenDecomp, HermitianError> {
    let n = a.dim();
    let mut w = a.entries().to_vec();
    let mut q = ComplexMatrix::identity(n);

    // Stage 1: reduce to tridiagonal form with complex subdiagonal.
    let mut u = vec![Complex64::ZERO; n];
    let mut p = vec![Complex64::ZERO; n];
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1; // length of the column segment below the diagonal
        let mut alpha_sq = 0.0;
        for i in (k + 1)..n {
            alpha_sq += w[i * n + k].norm_sqr();
        }
        let alpha = libm::sqrt(alpha_sq);
        if alpha == 0.0 {
            continue;
        }
        let x0 = w[(k + 1) * n + k];
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            Complex64::ONE
        };
        // Reflector H = I - tau u u^H with H x = -phase * alpha * e1.
        for i in 0..m {
            u[i] = w[(k + 1 + i) * n + k];
        }
        u[0] += phase * alpha;
        let tau = 1.0 / (alpha * (alpha + x0.norm()));

        // p = tau * A u on the trailing block.
        for i in 0..m {
            let mut acc = Complex64::ZERO;
            for j in 0..m {
                acc += w[(k + 1 + i) * n + (k + 1 + j)] * u[j];
            }
            p[i] = tau * acc;
        }
        let upr = {
            let mut acc = Complex64::ZERO;
            for i in 0..m {
                acc += u[i].conj() * p[i];
            }
            acc
        };
        let kappa = 0.5 * tau * upr.re;
        for i in 0..m {
            p[i] -= kappa * u[i];
        }
        // A <- A - u w^H - w u^H with w = p.
        for i in 0..m {
            for j in 0..m {
                let upd = u[i] * p[j].conj() + p[i] * u[j].conj();
                w[(k + 1 + i) * n + (k + 1 + j)] -= upd;
            }
        }
        // Eliminated column and row.
        w[(k + 1) * n + k] = -phase * alpha;
        w[k * n + (k + 1)] = (-phase * alpha).conj();
        for i in (k + 2)..n {
            w[i * n + k] = Complex64::ZERO;
            w[k * n + i] = Complex64::ZERO;
        }
        // Accumulate Q <- Q H.
        for r in 0..n {
            let mut acc = Complex64::ZERO;
            for j in 0..m {
                acc += q.entries()[r * n + (k + 1 + j)] * u[j];
            }
            let acc = tau * acc;
            for j in 0..m {
                q.entries_mut()[r * n + (k + 1 + j)] -= acc * u[j].conj();
            }
        }
    }

    // Stage 2: diagonal phase similarity making the subdiagonal real.
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    for i in 0..n {
        d[i] = w[i * n + i].re;
    }
    let mut phi = Complex64::ONE;
    for i in 0..n.saturating_sub(1) {
        let sub = w[(i + 1) * n + i];
        let mag = sub.norm();
        e[i] = mag;
        let step = if mag > 0.0 { sub / mag } else { Complex64::ONE };
        let next = phi * step;
        for r in 0..n {
            let z = q.entries()[r * n + (i + 1)] * next;
            q.entries_mut()[r * n + (i + 1)] = z;
        }
        phi = next;
    }

    // Stage 3: implicit-shift QL on (d, e), rotations applied to Q columns.
    tql2(&mut d, &mut e, &mut q)?;

    // Sort descending and fix eigenvector phases.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[j].partial_cmp(&d[i]).expect("finite eigenvalues"));
    let values: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (new_j, &old_j) in order.iter().enumerate() {
        let col = q.column(old_j);
        let mut rot = Complex64::ONE;
        for z in &col {
            if z.norm() > 1e-8 {
                rot = z.conj() / z.norm();
                break;
            }
        }
        for i in 0..n {
            vectors.entries_mut()[i * n + new_j] = col[i] * rot;
        }
    }
    Ok(EigenDecomp { values, vectors })
}

/// Implicit-shift QL for a real symmetric tridiagonal matrix.
///
/// `d` holds the diagonal, `e[i]` the coupling between `i` and `i + 1`
/// (`e[n-1]` is scratch). Rotations are accumulated into the complex
/// columns of `q`.
fn tql2(d: &mut [f64], e: &mut [f64], q: &mut ComplexMatrix) -> Result<(), HermitianError> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            // Find the end of the unreduced block starting at l.
            let mut m = l;
            while m + 1 < n {
                let dd = libm::fabs(d[m]) + libm::fabs(d[m + 1]);
                if libm::fabs(e[m]) <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(HermitianError::NoConvergence);
            }
            // Wilkinson shift.
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = libm::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + libm::copysign(r, g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = libm::hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                // Rotate eigenvector columns i and i + 1.
                let nq = q.rows();
                for k in 0..nq {
                    let qi = q[(k, i)];
                    let qip = q[(k, i + 1)];
                    q.entries_mut()[k * nq + i + 1] = s * qi + c * qip;
                    q.entries_mut()[k * nq + i] = c * qi - s * qip;
                }
            }
            if underflow && i > l {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

// ── hermitian_sqrt ──────────────────────────────────────────────────────

/// The unique Hermitian PSD square root `S` with `S S^H = A`.
///
/// Fails with [`HermitianError::NotPSD`] if any eigenvalue is below
/// `-1e-10 * lambda_max`. Eigenvalues in the PSD tolerance band are clamped
/// to zero.
pub fn hermitian_sqrt(a: &HermitianMatrix) -> Result<ComplexMatrix, HermitianError> {
    let dec = eigh(a)?;
    let lam_max = dec.values.first().copied().unwrap_or(0.0);
    if lam_max < 0.0 || dec.values.iter().any(|&l| l < -PSD_TOL * lam_max) {
        return Err(HermitianError::NotPSD);
    }
    let n = a.dim();
    let mut out = ComplexMatrix::zeros(n, n);
    // S = U diag(sqrt(lam)) U^H, symmetrized on write.
    for i in 0..n {
        for j in 0..=i {
            let mut acc = Complex64::ZERO;
            for k in 0..n {
                let lam = dec.values[k].max(0.0);
                acc += dec.vectors[(i, k)] * libm::sqrt(lam) * dec.vectors[(j, k)].conj();
            }
            out.entries_mut()[i * n + j] = acc;
            out.entries_mut()[j * n + i] = acc.conj();
        }
        let re = out[(i, i)].re;
        out.entries_mut()[i * n + i] = Complex64::new(re, 0.0);
    }
    Ok(out)
}

// ── partial_cholesky ────────────────────────────────────────────────────

/// First `r` columns of the (lower-triangular) Cholesky factor of `A`.
///
/// Returns the `N x r` lower-trapezoidal `G` with real positive diagonal
/// such that `G G^H` reproduces the blocks `A_11` (leading `r x r`) and
/// `A_21` exactly. For positive definite `A` and `r = N` this is the full
/// Cholesky factor. Pivots must stay above `1e-12 * trace(A) / N`.
pub fn partial_cholesky(a: &HermitianMatrix, r: usize) -> Result<ComplexMatrix, HermitianError> {
    let n = a.dim();
    if r == 0 || r > n {
        return Err(HermitianError::BadRank);
    }
    let threshold = 1e-12 * a.trace() / n as f64;
    let mut w = a.entries().to_vec();
    let mut g = ComplexMatrix::zeros(n, r);
    for j in 0..r {
        let pivot = w[j * n + j].re;
        if pivot <= threshold || !pivot.is_finite() {
            return Err(HermitianError::SingularPivot);
        }
        let root = libm::sqrt(pivot);
        for i in j..n {
            g.entries_mut()[i * r + j] = w[i * n + j] / root;
        }
        // Rank-1 downdate of the trailing block.
        for i in j..n {
            let gi = g[(i, j)];
            for l in j..=i {
                let upd = gi * g[(l, j)].conj();
                w[i * n + l] -= upd;
                if l != i {
                    w[l * n + i] = w[i * n + l].conj();
                }
            }
        }
    }
    Ok(g)
}

// ── orth_complement ─────────────────────────────────────────────────────

/// Orthonormal basis of the orthogonal complement of `v`.
///
/// Returns the `N x (N-1)` matrix of the trailing columns of the Householder
/// reflection that maps `v` onto `e_1` (up to phase), so the result is
/// deterministic for a given `v`. Fails with [`HermitianError::ZeroVector`]
/// on zero input.
pub fn orth_complement(v: &[Complex64]) -> Result<ComplexMatrix, HermitianError> {
    let n = v.len();
    let norm = vec_norm(v);
    if n == 0 || norm == 0.0 || !norm.is_finite() {
        return Err(HermitianError::ZeroVector);
    }
    // h = v/||v|| + phase * e1; H = I - 2 h h^H / (h^H h) has first column
    // proportional to v, so its remaining columns span the complement.
    let mut h: Vec<Complex64> = v.iter().map(|z| z / norm).collect();
    let phase = if h[0].norm() > 1e-14 {
        h[0] / h[0].norm()
    } else {
        Complex64::ONE
    };
    h[0] += phase;
    let hh: f64 = h.iter().map(|z| z.norm_sqr()).sum();
    let scale = 2.0 / hh;
    let mut out = ComplexMatrix::zeros(n, n.saturating_sub(1));
    for i in 0..n {
        for j in 1..n {
            let id = if i == j {
                Complex64::ONE
            } else {
                Complex64::ZERO
            };
            out.entries_mut()[i * (n - 1) + (j - 1)] = id - scale * h[i] * h[j].conj();
        }
    }
    Ok(out)
}

// ── projector ───────────────────────────────────────────────────────────

/// Orthogonal projector `P = A (A^H A)^{-1} A^H` onto the range of `A`.
///
/// Fails with [`HermitianError::RankDeficient`] when the smallest singular
/// value of `A` is at most `1e-10` times the largest.
pub fn projector(a: &ComplexMatrix) -> Result<HermitianMatrix, HermitianError> {
    let r = a.cols();
    if r == 0 || r > a.rows() {
        return Err(HermitianError::BadRank);
    }
    let gram = HermitianMatrix::symmetrized(r, a.adjoint().mul(a).entries().to_vec(), true);
    let dec = eigh(&gram)?;
    let lam_max = dec.values[0];
    let lam_min = dec.values[r - 1];
    // Singular values of A are sqrt(eigenvalues of A^H A), so the 1e-10
    // singular-value cutoff is 1e-20 on eigenvalues. Gram eigenvalues of an
    // exactly singular A only reach the eps * lam_max noise floor, so treat
    // anything below that floor as a zero singular value too.
    let floor = lam_max * (64.0 * f64::EPSILON * r as f64).max(1e-20);
    if lam_max <= 0.0 || lam_min <= floor {
        return Err(HermitianError::RankDeficient);
    }
    // P = B B^H with B = A U diag(1/sqrt(lam)).
    let mut b = a.mul(&dec.vectors);
    let n = a.rows();
    for j in 0..r {
        let inv_root = 1.0 / libm::sqrt(dec.values[j]);
        for i in 0..n {
            let z = b[(i, j)] * inv_root;
            b.entries_mut()[i * r + j] = z;
        }
    }
    let p = b.mul(&b.adjoint());
    Ok(HermitianMatrix::symmetrized(n, p.entries().to_vec(), true))
}

// ── solvers (crate plumbing) ────────────────────────────────────────────

/// Solves `A x = b` for Hermitian positive definite `A` via Cholesky.
pub(crate) fn solve_hermitian(
    a: &HermitianMatrix,
    b: &[Complex64],
) -> Result<Vec<Complex64>, HermitianError> {
    let g = partial_cholesky(a, a.dim())?;
    let mut x = b.to_vec();
    forward_substitute(&g, &mut x);
    back_substitute_adjoint(&g, &mut x);
    Ok(x)
}

/// Solves `A X = B` columnwise for Hermitian positive definite `A`.
pub(crate) fn solve_hermitian_mat(
    a: &HermitianMatrix,
    b: &ComplexMatrix,
) -> Result<ComplexMatrix, HermitianError> {
    let g = partial_cholesky(a, a.dim())?;
    let mut out = ComplexMatrix::zeros(b.rows(), b.cols());
    for j in 0..b.cols() {
        let mut x = b.column(j);
        forward_substitute(&g, &mut x);
        back_substitute_adjoint(&g, &mut x);
        for i in 0..b.rows() {
            out.entries_mut()[i * b.cols() + j] = x[i];
        }
    }
    Ok(out)
}

/// In-place solve of `L y = x` for lower-triangular `L` (square, from
/// `partial_cholesky` with full rank).
fn forward_substitute(l: &ComplexMatrix, x: &mut [Complex64]) {
    let n = l.rows();
    for i in 0..n {
        let mut acc = x[i];
        for j in 0..i {
            acc -= l[(i, j)] * x[j];
        }
        x[i] = acc / l[(i, i)];
    }
}

/// In-place solve of `L^H y = x`.
fn back_substitute_adjoint(l: &ComplexMatrix, x: &mut [Complex64]) {
    let n = l.rows();
    for i in (0..n).rev() {
        let mut acc = x[i];
        for j in (i + 1)..n {
            acc -= l[(j, i)].conj() * x[j];
        }
        x[i] = acc / l[(i, i)].conj();
    }
}

/// Condition number estimate of a Hermitian matrix from its spectrum.
///
/// Returns `f64::INFINITY` when the smallest eigenvalue magnitude is zero
/// or negative for a PSD-intended matrix.
pub fn condition_number(a: &HermitianMatrix) -> Result<f64, HermitianError> {
    let dec = eigh(a)?;
    let max = dec
        .values
        .iter()
        .fold(0.0_f64, |m, &l| m.max(libm::fabs(l)));
    let min = dec
        .values
        .iter()
        .fold(f64::INFINITY, |m, &l| m.min(libm::fabs(l)));
    if max == 0.0 {
        return Ok(f64::INFINITY);
    }
    if dec.values[dec.values.len() - 1] <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(max / min)
}

// ── tests ───────────────────────────────────────────────────────────────
