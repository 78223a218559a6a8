//! Complex matrix-variate samplers and scalar special functions.
//!
//! All loss laws in this crate reduce to a handful of building blocks: the
//! complex matrix-variate Gaussian, the complex Wishart, the (noncentral)
//! complex chi-square, the matrix-variate Student and F distributions, the
//! partitioned-Wishart block identities, and on the density side the Beta
//! family plus the Gauss hypergeometric function. This module provides all
//! of them against one fixed convention:
//!
//! ```text
//! standard complex normal   E[|z|^2] = 1   (re and im each variance 1/2)
//! Cchi2_k(delta)            sum of k squared CN magnitudes, noncentrality
//!                           delta = squared norm of the mean vector;
//!                           mean k + delta, variance k + 2 delta
//! Beta(alpha, beta)         density  x^(alpha-1) (1-x)^(beta-1) / B
//! ```
//!
//! Note the Beta parameter order: `alpha` is the exponent of `x`. Loss-law
//! literature often writes the two degree-of-freedom labels in the opposite
//! order, so every conversion happens exactly once, where a law is
//! constructed, and nowhere else.
//!
//! Sampling takes an explicit [`RngStream`]; there is no global generator.
//! A stream is identified by `(seed, stream_id)` and is reproducible:
//! equal pairs give equal sequences, distinct stream ids give independent
//! sequences, which is what lets Monte Carlo runs shard trials across
//! threads and still produce identical results at any thread count.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
use rand::{Rng as _, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::hermitian::{eigh, solve_hermitian_mat, ComplexMatrix, HermitianError, HermitianMatrix};

// ── Errors ──────────────────────────────────────────────────────────────

/// Errors from samplers and special functions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DistError {
    /// A covariance argument is not positive definite.
    NotPD,
    /// Wishart-type degrees of freedom below the matrix dimension.
    InsufficientDoF,
    /// A scalar parameter is outside its domain.
    BadParam,
    /// A partitioned block is singular.
    SingularBlock,
    /// A series or continued fraction exceeded its term cap.
    NoConvergence,
    /// Underlying linear-algebra failure.
    Linalg(HermitianError),
}

impl fmt::Display for DistError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NotPD => write!(f, "covariance is not positive definite"),
            Self::InsufficientDoF => write!(f, "degrees of freedom below dimension"),
            Self::BadParam => write!(f, "parameter out of domain"),
            Self::SingularBlock => write!(f, "partitioned block is singular"),
            Self::NoConvergence => write!(f, "series did not converge within the term cap"),
            Self::Linalg(e) => write!(f, "linear algebra failure: {e}"),
        }
    }
}

impl core::error::Error for DistError {}

impl From<HermitianError> for DistError {
    fn from(e: HermitianError) -> Self {
        Self::Linalg(e)
    }
}

// ── RngStream ───────────────────────────────────────────────────────────

/// Deterministic random stream keyed by `(seed, stream_id)`.
///
/// Thin wrapper over ChaCha8: the seed selects the key, the stream id
/// selects the counter stream, so streams with the same seed but different
/// ids never overlap. Trial `i` of a Monte Carlo run uses stream id `i`,
/// which makes results independent of how trials are sharded over threads.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            inner,
        }
    }

    #[inline]
    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[inline]
    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }
}

impl RngCore for RngStream {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    #[inline]
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }

    #[inline]
    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.inner.try_fill_bytes(dest)
    }
}

// ── Parameter types ─────────────────────────────────────────────────────

/// Beta distribution parameters; `alpha` is the exponent of `x` plus one.
///
/// The loss-law degree labels `(K1, K2)` with density proportional to
/// `B^(K2-1) (1-B)^(K1-1)` map to `BetaParams { alpha: K2, beta: K1 }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaParams {
    pub alpha: f64,
    pub beta: f64,
}

impl BetaParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self, DistError> {
        if !(alpha.is_finite() && beta.is_finite() && alpha > 0.0 && beta > 0.0) {
            return Err(DistError::BadParam);
        }
        Ok(Self { alpha, beta })
    }

    /// Mean `alpha / (alpha + beta)`.
    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }
}

/// Matrix-variate Student parameters: degrees of freedom, mean, row and
/// column covariances.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudentParams {
    pub nu: f64,
    pub mean: ComplexMatrix,
    pub row_cov: HermitianMatrix,
    pub col_cov: HermitianMatrix,
}

impl StudentParams {
    pub fn new(
        nu: f64,
        mean: ComplexMatrix,
        row_cov: HermitianMatrix,
        col_cov: HermitianMatrix,
    ) -> Result<Self, DistError> {
        if !(nu.is_finite() && nu > 0.0) {
            return Err(DistError::BadParam);
        }
        if mean.rows() != row_cov.dim() || mean.cols() != col_cov.dim() {
            return Err(DistError::BadParam);
        }
        Ok(Self {
            nu,
            mean,
            row_cov,
            col_cov,
        })
    }
}

// ── Scalar primitives ───────────────────────────────────────────────────

#[inline]
fn std_normal(rng: &mut RngStream) -> f64 {
    rng.sample::<f64, _>(StandardNormal)
}

/// One standard complex normal draw, `E[|z|^2] = 1`.
#[inline]
pub fn sample_cnormal(rng: &mut RngStream) -> Complex64 {
    const HALF_SQRT2: f64 = core::f64::consts::FRAC_1_SQRT_2;
    Complex64::new(std_normal(rng) * HALF_SQRT2, std_normal(rng) * HALF_SQRT2)
}

/// Gamma(shape, scale 1) draw; shape must be positive.
pub(crate) fn sample_gamma(rng: &mut RngStream, shape: f64) -> Result<f64, DistError> {
    let g = Gamma::new(shape, 1.0).map_err(|_| DistError::BadParam)?;
    Ok(g.sample(rng))
}

/// Noncentral complex chi-square draw with `k` complex degrees of freedom
/// and noncentrality `delta` (mean `k + delta`, variance `k + 2 delta`).
///
/// Built as a central Gamma(k-1) part plus one noncentral component that
/// carries all of `delta`, which is distribution-equivalent to spreading
/// the mean over the components.
pub fn sample_cchisq(rng: &mut RngStream, k: usize, delta: f64) -> Result<f64, DistError> {
    if k == 0 || !delta.is_finite() || delta < 0.0 {
        return Err(DistError::BadParam);
    }
    let central = if k > 1 {
        sample_gamma(rng, (k - 1) as f64)?
    } else {
        0.0
    };
    let s = core::f64::consts::FRAC_1_SQRT_2;
    let re = libm::sqrt(delta) + std_normal(rng) * s;
    let im = std_normal(rng) * s;
    Ok(central + re * re + im * im)
}

// ── Matrix samplers ─────────────────────────────────────────────────────

/// Matrix of i.i.d. standard complex normal entries.
pub fn sample_iid_cgauss(rng: &mut RngStream, rows: usize, cols: usize) -> ComplexMatrix {
    let entries: Vec<Complex64> = (0..rows * cols).map(|_| sample_cnormal(rng)).collect();
    ComplexMatrix::from_vec_unchecked(rows, cols, entries)
}

/// Hermitian PD square root; rejects singular or indefinite input.
pub(crate) fn pd_sqrt(a: &HermitianMatrix) -> Result<ComplexMatrix, DistError> {
    let dec = eigh(a)?;
    let n = a.dim();
    if dec.values[n - 1] <= 0.0 {
        return Err(DistError::NotPD);
    }
    root_from_eigs(&dec.values, &dec.vectors, libm::sqrt)
}

/// Hermitian PD inverse square root.
pub(crate) fn pd_inv_sqrt(a: &HermitianMatrix) -> Result<ComplexMatrix, DistError> {
    let dec = eigh(a)?;
    let n = a.dim();
    if dec.values[n - 1] <= 0.0 {
        return Err(DistError::NotPD);
    }
    root_from_eigs(&dec.values, &dec.vectors, |l| 1.0 / libm::sqrt(l))
}

fn root_from_eigs(
    values: &[f64],
    vectors: &ComplexMatrix,
    f: impl Fn(f64) -> f64,
) -> Result<ComplexMatrix, DistError> {
    let n = values.len();
    let mut out = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut acc = Complex64::ZERO;
            for k in 0..n {
                acc += vectors[(i, k)] * f(values[k]) * vectors[(j, k)].conj();
            }
            out.entries_mut()[i * n + j] = acc;
            out.entries_mut()[j * n + i] = acc.conj();
        }
        let re = out[(i, i)].re;
        out.entries_mut()[i * n + i] = Complex64::new(re, 0.0);
    }
    Ok(out)
}

/// Complex matrix-variate Gaussian draw
/// `X = mean + row_cov^(1/2) Z col_cov^(H/2)` with i.i.d. standard complex
/// normal `Z`. Pass `None` for a zero mean.
pub fn sample_cgauss_matrix(
    rng: &mut RngStream,
    n: usize,
    k: usize,
    mean: Option<&ComplexMatrix>,
    row_cov: &HermitianMatrix,
    col_cov: &HermitianMatrix,
) -> Result<ComplexMatrix, DistError> {
    if n == 0 || k == 0 || row_cov.dim() != n || col_cov.dim() != k {
        return Err(DistError::BadParam);
    }
    if let Some(m) = mean {
        if m.rows() != n || m.cols() != k {
            return Err(DistError::BadParam);
        }
    }
    let root_r = pd_sqrt(row_cov)?;
    let root_c = pd_sqrt(col_cov)?;
    let z = sample_iid_cgauss(rng, n, k);
    // The Hermitian root is its own adjoint, so col_cov^(H/2) = root_c.
    let mut x = root_r.mul(&z).mul(&root_c);
    if let Some(m) = mean {
        for (xe, me) in x.entries_mut().iter_mut().zip(m.entries()) {
            *xe += me;
        }
    }
    Ok(x)
}

/// Complex Wishart draw `S = X X^H` with `X ~ CN(N, K; 0, sigma, I)`.
pub fn sample_wishart(
    rng: &mut RngStream,
    n: usize,
    k: usize,
    sigma: &HermitianMatrix,
) -> Result<HermitianMatrix, DistError> {
    if sigma.dim() != n || n == 0 {
        return Err(DistError::BadParam);
    }
    if k < n {
        return Err(DistError::InsufficientDoF);
    }
    let root = pd_sqrt(sigma)?;
    let x = root.mul(&sample_iid_cgauss(rng, n, k));
    Ok(gram(&x))
}

/// `X X^H` as a PSD Hermitian matrix.
pub fn gram(x: &ComplexMatrix) -> HermitianMatrix {
    let n = x.rows();
    let k = x.cols();
    let mut entries = vec![Complex64::ZERO; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut acc = Complex64::ZERO;
            for l in 0..k {
                acc += x[(i, l)] * x[(j, l)].conj();
            }
            entries[i * n + j] = acc;
            entries[j * n + i] = acc.conj();
        }
    }
    HermitianMatrix::symmetrized(n, entries, true)
}

/// Complex Wishart draw with real-valued degrees of freedom via the
/// Bartlett factorization: `S = (R L)(R L)^H` where `R = sigma^(1/2)`,
/// `L` is lower triangular with `|L_ii|^2 ~ Gamma(dof - i)` and standard
/// complex normal entries below the diagonal. For integer `dof` this
/// matches [`sample_wishart`] in distribution; it exists so Student
/// training with non-integer degrees of freedom stays exact.
pub fn sample_wishart_bartlett(
    rng: &mut RngStream,
    n: usize,
    dof: f64,
    sigma: &HermitianMatrix,
) -> Result<HermitianMatrix, DistError> {
    if sigma.dim() != n || n == 0 || !dof.is_finite() {
        return Err(DistError::BadParam);
    }
    if dof <= (n - 1) as f64 {
        return Err(DistError::InsufficientDoF);
    }
    let mut l = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        let d = libm::sqrt(sample_gamma(rng, dof - i as f64)?);
        l.entries_mut()[i * n + i] = Complex64::new(d, 0.0);
        for j in 0..i {
            l.entries_mut()[i * n + j] = sample_cnormal(rng);
        }
    }
    let root = pd_sqrt(sigma)?;
    Ok(gram(&root.mul(&l)))
}

/// Matrix-variate Student draw via the Gaussian-Wishart mixture
/// `X = mean + Y W^(-1/2)` with `Y ~ CN(0, row_cov, I_K)` and
/// `W ~ CW_K(nu + K - 1, col_cov^(-1))`.
pub fn sample_matrix_t(
    rng: &mut RngStream,
    params: &StudentParams,
    k: usize,
) -> Result<ComplexMatrix, DistError> {
    if params.col_cov.dim() != k || !(params.nu > 0.0) {
        return Err(DistError::BadParam);
    }
    let n = params.row_cov.dim();
    let root_r = pd_sqrt(&params.row_cov)?;
    let inv_root_c = pd_inv_sqrt(&params.col_cov)?;
    // W = (col_cov^(-1/2) L)(col_cov^(-1/2) L)^H has scale col_cov^(-1).
    let dof = params.nu + (k - 1) as f64;
    let mut l = ComplexMatrix::zeros(k, k);
    for i in 0..k {
        let d = libm::sqrt(sample_gamma(rng, dof - i as f64)?);
        l.entries_mut()[i * k + i] = Complex64::new(d, 0.0);
        for j in 0..i {
            l.entries_mut()[i * k + j] = sample_cnormal(rng);
        }
    }
    let w = gram(&inv_root_c.mul(&l));
    let w_inv_root = pd_inv_sqrt(&w)?;
    let y = root_r.mul(&sample_iid_cgauss(rng, n, k));
    let mut x = y.mul(&w_inv_root);
    for (xe, me) in x.entries_mut().iter_mut().zip(params.mean.entries()) {
        *xe += me;
    }
    Ok(x)
}

/// Matrix-variate F draw `F = S1^(1/2) S2^(-1) S1^(1/2)` from independent
/// identity-scale Wisharts with `K1` and `K2` degrees of freedom.
pub fn sample_matrix_f(
    rng: &mut RngStream,
    n: usize,
    k1: usize,
    k2: usize,
) -> Result<HermitianMatrix, DistError> {
    if n == 0 {
        return Err(DistError::BadParam);
    }
    if k1 < n || k2 < n {
        return Err(DistError::InsufficientDoF);
    }
    let eye = HermitianMatrix::identity(n);
    let s1 = sample_wishart(rng, n, k1, &eye)?;
    let s2 = sample_wishart(rng, n, k2, &eye)?;
    let s1_root = crate::hermitian::hermitian_sqrt(&s1)?;
    let m = solve_hermitian_mat(&s2, &s1_root).map_err(|_| DistError::SingularBlock)?;
    let f = s1_root.mul(&m);
    Ok(HermitianMatrix::symmetrized(n, f.entries().to_vec(), true))
}

// ── Partitioned Wishart blocks ──────────────────────────────────────────

/// Blocks of a partitioned Hermitian matrix with split index `P`:
/// the Schur complement `S_1.2`, the trailing block `S_22`, and the
/// regression coefficient `T_21 = S_22^(-1) S_21`.
#[derive(Debug, Clone)]
pub struct WishartBlocks {
    /// `S_1.2 = S_11 - S_12 S_22^(-1) S_21`, size `P x P`.
    pub schur: HermitianMatrix,
    /// Trailing diagonal block, size `(N-P) x (N-P)`.
    pub s22: HermitianMatrix,
    /// `S_22^(-1) S_21`, size `(N-P) x P`.
    pub t21: ComplexMatrix,
}

/// Exact block algebra of a partitioned Hermitian matrix; no sampling.
///
/// For `S ~ CW_N(K, Sigma)` the blocks follow the classical independence
/// and marginal laws, which the tests verify by simulation.
pub fn partitioned_wishart_blocks(
    s: &HermitianMatrix,
    p: usize,
) -> Result<WishartBlocks, DistError> {
    let n = s.dim();
    if p == 0 || p >= n {
        return Err(DistError::BadParam);
    }
    let q = n - p;
    let mut s11 = vec![Complex64::ZERO; p * p];
    let mut s21 = ComplexMatrix::zeros(q, p);
    let mut s22 = vec![Complex64::ZERO; q * q];
    for i in 0..p {
        for j in 0..p {
            s11[i * p + j] = s[(i, j)];
        }
    }
    for i in 0..q {
        for j in 0..p {
            s21.entries_mut()[i * p + j] = s[(p + i, j)];
        }
        for j in 0..q {
            s22[i * q + j] = s[(p + i, p + j)];
        }
    }
    let s22 = HermitianMatrix::symmetrized(q, s22, s.psd_hint());
    let t21 = solve_hermitian_mat(&s22, &s21).map_err(|_| DistError::SingularBlock)?;
    // S_1.2 = S_11 - S_12 T_21 with S_12 = S_21^H.
    let correction = s21.adjoint().mul(&t21);
    for i in 0..p {
        for j in 0..p {
            s11[i * p + j] -= correction[(i, j)];
        }
    }
    Ok(WishartBlocks {
        schur: HermitianMatrix::symmetrized(p, s11, s.psd_hint()),
        s22,
        t21,
    })
}

// ── Gauss hypergeometric ────────────────────────────────────────────────

const F21_TERM_CAP: usize = 1_000_000;
const F21_REL_TOL: f64 = 1e-12;

/// Gauss hypergeometric function `2F1(a, b; c; z)` for `z in [0, 1)`.
///
/// Direct series summation with term recurrence. For `z > 0.5` with
/// `a + b > c` the tail decays too slowly, so the Euler transformation
/// `(1-z)^(c-a-b) 2F1(c-a, c-b; c; z)` is applied first; the transformed
/// series then has net-decaying terms. Errors with
/// [`DistError::NoConvergence`] after the term cap.
pub fn gauss_2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64, DistError> {
    if !(z >= 0.0 && z < 1.0) || !(c > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(DistError::BadParam);
    }
    if z > 0.5 && a + b > c {
        let factor = libm::pow(1.0 - z, c - a - b);
        return Ok(factor * f21_series(c - a, c - b, c, z)?);
    }
    f21_series(a, b, c, z)
}

fn f21_series(a: f64, b: f64, c: f64, z: f64) -> Result<f64, DistError> {
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    // Term ratios approach z, so the tail after a term of size t is about
    // t * z / (1 - z); the stop criterion budgets for that.
    let tail = F21_REL_TOL * (1.0 - z).max(1e-6);
    for n in 0..F21_TERM_CAP {
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((c + nf) * (1.0 + nf)) * z;
        sum += term;
        if libm::fabs(term) <= tail * libm::fabs(sum) {
            return Ok(sum);
        }
    }
    Err(DistError::NoConvergence)
}

// ── Beta family ─────────────────────────────────────────────────────────

/// `ln B(a, b)`.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    libm::lgamma(a) + libm::lgamma(b) - libm::lgamma(a + b)
}

/// Beta density at `x in [0, 1]`.
pub fn beta_pdf(x: f64, p: &BetaParams) -> Result<f64, DistError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(DistError::BadParam);
    }
    let lnb = ln_beta(p.alpha, p.beta);
    if x == 0.0 || x == 1.0 {
        let expo = if x == 0.0 {
            p.alpha - 1.0
        } else {
            p.beta - 1.0
        };
        return Ok(match expo {
            e if e > 0.0 => 0.0,
            e if e == 0.0 => libm::exp(-lnb),
            _ => f64::INFINITY,
        });
    }
    let ln_pdf = (p.alpha - 1.0) * libm::log(x) + (p.beta - 1.0) * libm::log1p(-x) - lnb;
    Ok(libm::exp(ln_pdf))
}

/// Beta cdf (regularized incomplete beta function `I_x(alpha, beta)`).
pub fn beta_cdf(x: f64, p: &BetaParams) -> Result<f64, DistError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(DistError::BadParam);
    }
    betainc(x, p.alpha, p.beta)
}

/// Regularized incomplete beta via the continued fraction, with the
/// symmetry switch that keeps the fraction in its fast-converging region.
fn betainc(x: f64, a: f64, b: f64) -> Result<f64, DistError> {
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x >= 1.0 {
        return Ok(1.0);
    }
    let front = libm::exp(a * libm::log(x) + b * libm::log1p(-x) - ln_beta(a, b));
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok(front * betacf(x, a, b)? / a)
    } else {
        Ok(1.0 - front * betacf(1.0 - x, b, a)? / b)
    }
}

/// Modified Lentz evaluation of the incomplete-beta continued fraction.
fn betacf(x: f64, a: f64, b: f64) -> Result<f64, DistError> {
    const MAX_ITER: usize = 500;
    const EPS: f64 = 1e-15;
    const TINY: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if libm::fabs(d) < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let mf = m as f64;
        let m2 = 2.0 * mf;
        let aa = mf * (b - mf) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if libm::fabs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if libm::fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + mf) * (qab + mf) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if libm::fabs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if libm::fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if libm::fabs(del - 1.0) < EPS {
            return Ok(h);
        }
    }
    Err(DistError::NoConvergence)
}

/// Beta draw via the gamma-ratio construction `G_a / (G_a + G_b)`.
pub fn beta_sample(rng: &mut RngStream, p: &BetaParams) -> Result<f64, DistError> {
    loop {
        let ga = sample_gamma(rng, p.alpha)?;
        let gb = sample_gamma(rng, p.beta)?;
        let denom = ga + gb;
        if denom > 0.0 {
            return Ok(ga / denom);
        }
    }
}

// ── tests ───────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::dot;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rng_streams_reproducible_and_distinct() {
        let a: Vec<u64> = {
            let mut r = RngStream::new(7, 3);
            (0..8).map(|_| r.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut r = RngStream::new(7, 3);
            (0..8).map(|_| r.next_u64()).collect()
        };
        let other: Vec<u64> = {
            let mut r = RngStream::new(7, 4);
            (0..8).map(|_| r.next_u64()).collect()
        };
        assert_eq!(a, b, "same (seed, stream) must replay the same sequence");
        assert_ne!(a, other, "distinct stream ids must differ");
    }

    #[test]
    fn cnormal_unit_second_moment() {
        let mut rng = RngStream::new(1, 0);
        let m = 100_000;
        let mean_sq: f64 = (0..m)
            .map(|_| sample_cnormal(&mut rng).norm_sqr())
            .sum::<f64>()
            / m as f64;
        assert!((mean_sq - 1.0).abs() < 0.02, "E|z|^2 = {mean_sq}");
    }

    #[test]
    fn cgauss_mean_recovery() {
        let mut rng = RngStream::new(2, 0);
        let mean = ComplexMatrix::new(
            2,
            3,
            vec![
                c(1.0, -1.0),
                c(0.0, 2.0),
                c(-3.0, 0.0),
                c(0.5, 0.5),
                c(2.0, 0.0),
                c(0.0, -2.0),
            ],
        )
        .unwrap();
        let eye2 = HermitianMatrix::identity(2);
        let eye3 = HermitianMatrix::identity(3);
        let m = 10_000;
        let mut acc = ComplexMatrix::zeros(2, 3);
        for _ in 0..m {
            let x = sample_cgauss_matrix(&mut rng, 2, 3, Some(&mean), &eye2, &eye3).unwrap();
            for (a, e) in acc.entries_mut().iter_mut().zip(x.entries()) {
                *a += e;
            }
        }
        // each entry's sample mean has std 1/sqrt(m) per complex component pair
        let band = 3.0 / libm::sqrt(m as f64);
        for (a, want) in acc.entries().iter().zip(mean.entries()) {
            let got = a / m as f64;
            assert!((got - want).norm() < 2.0 * band, "entry {got} vs {want}");
        }
    }

    #[test]
    fn cgauss_rejects_non_pd() {
        let mut rng = RngStream::new(3, 0);
        let zero = HermitianMatrix::from_diagonal(&[0.0, 0.0]);
        let eye = HermitianMatrix::identity(2);
        assert_eq!(
            sample_cgauss_matrix(&mut rng, 2, 2, None, &zero, &eye).unwrap_err(),
            DistError::NotPD
        );
    }

    #[test]
    fn wishart_scalar_is_cchisq() {
        let mut rng = RngStream::new(4, 0);
        let sigma = HermitianMatrix::identity(1);
        let m = 20_000;
        let mean: f64 = (0..m)
            .map(|_| sample_wishart(&mut rng, 1, 5, &sigma).unwrap()[(0, 0)].re)
            .sum::<f64>()
            / m as f64;
        assert!((mean - 5.0).abs() < 0.1, "Cchisq_5 mean {mean}");
    }

    #[test]
    fn wishart_mean_is_k_sigma() {
        let mut rng = RngStream::new(5, 0);
        let sigma = HermitianMatrix::new(
            2,
            vec![c(2.0, 0.0), c(0.5, 0.5), c(0.5, -0.5), c(1.0, 0.0)],
            true,
        )
        .unwrap();
        let k = 6;
        let m = 10_000;
        let mut acc = vec![Complex64::ZERO; 4];
        for _ in 0..m {
            let s = sample_wishart(&mut rng, 2, k, &sigma).unwrap();
            for (a, e) in acc.iter_mut().zip(s.entries()) {
                *a += e;
            }
        }
        for (i, (a, want)) in acc.iter().zip(sigma.entries()).enumerate() {
            let got = a / (m as f64 * k as f64);
            // per-draw entry std is O(sqrt(K) |sigma|); 3 sigma band after averaging
            let band = 3.0 * 2.5 / libm::sqrt((m * k) as f64);
            assert!((got - want).norm() < band, "entry {i}: {got} vs {want}");
        }
    }

    #[test]
    fn wishart_insufficient_dof() {
        let mut rng = RngStream::new(6, 0);
        let sigma = HermitianMatrix::identity(3);
        assert_eq!(
            sample_wishart(&mut rng, 3, 2, &sigma).unwrap_err(),
            DistError::InsufficientDoF
        );
    }

    #[test]
    fn bartlett_matches_direct_wishart_moments() {
        let mut rng = RngStream::new(7, 0);
        let sigma = HermitianMatrix::new(
            2,
            vec![c(1.5, 0.0), c(0.3, -0.4), c(0.3, 0.4), c(1.0, 0.0)],
            true,
        )
        .unwrap();
        let k = 6;
        let m = 20_000;
        let mut acc_direct = vec![Complex64::ZERO; 4];
        let mut acc_bart = vec![Complex64::ZERO; 4];
        for _ in 0..m {
            let s = sample_wishart(&mut rng, 2, k, &sigma).unwrap();
            let t = sample_wishart_bartlett(&mut rng, 2, k as f64, &sigma).unwrap();
            for i in 0..4 {
                acc_direct[i] += s.entries()[i];
                acc_bart[i] += t.entries()[i];
            }
        }
        for i in 0..4 {
            let d = (acc_direct[i] - acc_bart[i]).norm() / m as f64;
            assert!(d < 0.1, "entry {i} mean gap {d}");
        }
    }

    #[test]
    fn cchisq_moments() {
        let mut rng = RngStream::new(8, 0);
        let m = 100_000;
        let mean3: f64 = (0..m)
            .map(|_| sample_cchisq(&mut rng, 3, 0.0).unwrap())
            .sum::<f64>()
            / m as f64;
        assert!((mean3 - 3.0).abs() < 0.05, "central mean {mean3}");
        let draws: Vec<f64> = (0..m)
            .map(|_| sample_cchisq(&mut rng, 2, 4.0).unwrap())
            .collect();
        let mean = draws.iter().sum::<f64>() / m as f64;
        let var = draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / m as f64;
        assert!((mean - 6.0).abs() < 0.1, "noncentral mean {mean}");
        assert!((var - 10.0).abs() < 0.5, "noncentral variance {var}");
    }

    #[test]
    fn cchisq_bad_params() {
        let mut rng = RngStream::new(9, 0);
        assert_eq!(
            sample_cchisq(&mut rng, 0, 0.0).unwrap_err(),
            DistError::BadParam
        );
        assert_eq!(
            sample_cchisq(&mut rng, 2, -1.0).unwrap_err(),
            DistError::BadParam
        );
    }

    #[test]
    fn matrix_t_scalar_mixture_covariance() {
        // K=1 reduction: x = mean + CN / sqrt(Cchisq_nu), so the covariance
        // is Sigma * E[1/Cchisq_nu] = Sigma / (nu - 1). The mixing variable
        // is deliberately unnormalized; that is the convention under which
        // scaling the row covariance by nu - N makes Student training
        // covariance-matched to the Gaussian case.
        let nu = 8.0;
        let sigma = HermitianMatrix::new(
            2,
            vec![c(2.0, 0.0), c(0.0, 0.5), c(0.0, -0.5), c(1.0, 0.0)],
            true,
        )
        .unwrap();
        let params = StudentParams::new(
            nu,
            ComplexMatrix::zeros(2, 1),
            sigma.clone(),
            HermitianMatrix::identity(1),
        )
        .unwrap();
        let mut rng = RngStream::new(10, 0);
        let m = 40_000;
        let mut acc = vec![Complex64::ZERO; 4];
        for _ in 0..m {
            let x = sample_matrix_t(&mut rng, &params, 1).unwrap();
            let col = x.column(0);
            for i in 0..2 {
                for j in 0..2 {
                    acc[i * 2 + j] += col[i] * col[j].conj();
                }
            }
        }
        let scale = 1.0 / (nu - 1.0);
        for i in 0..4 {
            let got = acc[i] / m as f64;
            let want = scale * sigma.entries()[i];
            assert!(
                (got - want).norm() < 0.05 * scale * 2.0,
                "cov entry {i}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn matrix_t_rejects_non_pd() {
        let params = StudentParams::new(
            4.0,
            ComplexMatrix::zeros(2, 1),
            HermitianMatrix::from_diagonal(&[1.0, 0.0]),
            HermitianMatrix::identity(1),
        )
        .unwrap();
        let mut rng = RngStream::new(11, 0);
        assert_eq!(
            sample_matrix_t(&mut rng, &params, 1).unwrap_err(),
            DistError::NotPD
        );
    }

    #[test]
    fn matrix_f_scalar_mean() {
        let mut rng = RngStream::new(12, 0);
        let m = 20_000;
        let mean: f64 = (0..m)
            .map(|_| sample_matrix_f(&mut rng, 1, 8, 16).unwrap()[(0, 0)].re)
            .sum::<f64>()
            / m as f64;
        let want = 8.0 / 15.0;
        assert!(
            (mean - want).abs() < 0.02 * want * 2.0,
            "F mean {mean} vs {want}"
        );
    }

    #[test]
    fn matrix_f_insufficient_dof() {
        let mut rng = RngStream::new(13, 0);
        assert_eq!(
            sample_matrix_f(&mut rng, 3, 2, 8).unwrap_err(),
            DistError::InsufficientDoF
        );
    }

    #[test]
    fn partitioned_identity() {
        let s = HermitianMatrix::identity(4);
        let blocks = partitioned_wishart_blocks(&s, 2).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((blocks.schur[(i, j)] - c(want, 0.0)).norm() < 1e-14);
            }
        }
        assert!(blocks.t21.frobenius_norm() < 1e-14, "T_21 must vanish");
    }

    #[test]
    fn partitioned_hand_schur() {
        // S = [[2,1],[1,2]], P=1: S_1.2 = 2 - 1/2 = 1.5, T_21 = 1/2.
        let s = HermitianMatrix::new(
            2,
            vec![c(2.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)],
            true,
        )
        .unwrap();
        let blocks = partitioned_wishart_blocks(&s, 1).unwrap();
        assert!((blocks.schur[(0, 0)] - c(1.5, 0.0)).norm() < 1e-14);
        assert!((blocks.t21[(0, 0)] - c(0.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn partitioned_block_diagonal_decouples() {
        let s = HermitianMatrix::from_diagonal(&[3.0, 2.0, 5.0]);
        let blocks = partitioned_wishart_blocks(&s, 1).unwrap();
        assert!(blocks.t21.frobenius_norm() < 1e-14);
        assert!((blocks.schur[(0, 0)] - c(3.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn f21_at_zero_is_one() {
        assert_eq!(gauss_2f1(2.5, 1.0, 4.0, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn f21_log_identity() {
        // 2F1(1,1;2;z) = -ln(1-z)/z, so at z = 1/2 the value is 2 ln 2.
        let got = gauss_2f1(1.0, 1.0, 2.0, 0.5).unwrap();
        let want = 2.0 * core::f64::consts::LN_2;
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }

    #[test]
    fn f21_matches_series_oracle() {
        // Oracle: mpmath.hyp2f1 at 50-digit precision.
        let cases = [
            (3.0, 2.0, 5.0, 0.3, 1.5109117821595695),
            (33.0, 17.0, 48.0, 0.45, 711.88284879060942),
            // transform branch: z > 0.5 and a + b > c
            (17.0, 9.0, 19.0, 0.95, 5990117993.8562891),
            (33.0, 17.0, 48.0, 0.93, 9486980097.6994103),
        ];
        for (a, b, c, z, want) in cases {
            let got = gauss_2f1(a, b, c, z).unwrap();
            assert!(
                ((got - want) / want).abs() < 1e-11,
                "2F1({a},{b};{c};{z}) = {got} vs oracle {want}"
            );
        }
    }

    #[test]
    fn f21_rejects_bad_domain() {
        assert_eq!(
            gauss_2f1(1.0, 1.0, 2.0, 1.0).unwrap_err(),
            DistError::BadParam
        );
        assert_eq!(
            gauss_2f1(1.0, 1.0, -1.0, 0.5).unwrap_err(),
            DistError::BadParam
        );
    }

    #[test]
    fn beta_uniform_case() {
        let p = BetaParams::new(1.0, 1.0).unwrap();
        assert!((beta_pdf(0.37, &p).unwrap() - 1.0).abs() < 1e-14);
        assert!((beta_cdf(0.37, &p).unwrap() - 0.37).abs() < 1e-14);
    }

    #[test]
    fn beta_pdf_hand_value() {
        // B(2,5) = 1/30, so pdf(0.3) = 30 * 0.3 * 0.7^4 = 2.1609 exactly.
        let p = BetaParams::new(2.0, 5.0).unwrap();
        let got = beta_pdf(0.3, &p).unwrap();
        assert!((got - 2.1609).abs() < 1e-12, "{got}");
    }

    #[test]
    fn beta_cdf_matches_oracle() {
        // Oracle: mpmath.betainc(regularized=True) at 50-digit precision.
        let p = BetaParams::new(10.0, 7.0).unwrap();
        let got = beta_cdf(0.7, &p).unwrap();
        assert!((got - 0.8246866306931245).abs() < 1e-13, "{got}");
        let tail = BetaParams::new(14.0, 7.0).unwrap();
        let got = beta_cdf(0.25, &tail).unwrap();
        let want = 2.9511746106436476e-5;
        assert!(((got - want) / want).abs() < 1e-10, "deep tail {got}");
    }

    #[test]
    fn beta_sample_mean() {
        let mut rng = RngStream::new(14, 0);
        // the loss-law mapping for N=16, K=29 gives alpha=15, beta=15
        let p = BetaParams::new(15.0, 15.0).unwrap();
        assert_eq!(p.mean(), 0.5);
        let m = 100_000;
        let mean: f64 = (0..m)
            .map(|_| beta_sample(&mut rng, &p).unwrap())
            .sum::<f64>()
            / m as f64;
        // std of the mean is sqrt(var/m), var = ab/((a+b)^2(a+b+1)) ~ 0.008
        assert!(
            (mean - 0.5).abs() < 3.0 * 0.09 / libm::sqrt(m as f64),
            "mean {mean}"
        );
    }

    #[test]
    fn beta_params_validation() {
        assert_eq!(BetaParams::new(0.0, 1.0).unwrap_err(), DistError::BadParam);
        assert_eq!(
            BetaParams::new(1.0, f64::NAN).unwrap_err(),
            DistError::BadParam
        );
    }

    #[test]
    fn gram_matches_explicit_product() {
        let x = ComplexMatrix::new(
            2,
            3,
            vec![
                c(1.0, 1.0),
                c(0.0, -1.0),
                c(2.0, 0.0),
                c(0.5, 0.0),
                c(1.0, 1.0),
                c(0.0, 0.0),
            ],
        )
        .unwrap();
        let g = gram(&x);
        let explicit = x.mul(&x.adjoint());
        for i in 0..2 {
            for j in 0..2 {
                assert!((g[(i, j)] - explicit[(i, j)]).norm() < 1e-14);
            }
        }
        let r0 = x.column(0);
        let _ = dot(&r0, &r0);
    }
}
