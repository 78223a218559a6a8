//! The adaptive filter bank and weight-vector representations.
//!
//! Every filter here estimates the optimal weight
//!
//! ```text
//! w_opt = Sigma^{-1} v / (v^H Sigma^{-1} v)
//! ```
//!
//! from limited training data, under the distortionless convention
//! `w^H v = 1` (SNR loss is scale invariant, so normalization is cosmetic,
//! but one canonical form keeps outputs comparable). The bank covers:
//!
//! * [`w_smi`] - sample matrix inversion, the fully adaptive filter;
//! * [`w_partial`] - partially adaptive filter through a transform `T`,
//!   in direct or generalized-sidelobe-canceler form;
//! * [`w_eigencanceler`] - projection onto the noise subspace of the
//!   training covariance;
//! * [`w_pchol`] - projection complement of the rank-R partial Cholesky
//!   factor, a cheaper surrogate for the eigencanceler;
//! * [`w_diagonal_loading`] - ridge-regularized inversion;
//! * [`w_marzetta`] - average of random reduced-rank GSC filters.
//!
//! [`weight_rep`] draws the weight vector directly from its stochastic
//! representation (optimal weight plus a projected Student-like
//! fluctuation) instead of simulating training data, and
//! [`expected_wnorm`] evaluates the closed-form mean squared norm; both
//! serve as independent cross-checks on the simulation path.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Deref;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dist::{sample_cchisq, sample_iid_cgauss, DistError, RngStream};
use crate::hermitian::{
    condition_number, dot, eigh, orth_complement, partial_cholesky, projector, solve_hermitian,
    vec_norm, ComplexMatrix, HermitianError, HermitianMatrix,
};
use crate::scenario::{Scenario, ScenarioKind};

/// Condition-number boundary beyond which a training covariance is
/// treated as singular.
pub const COND_CAP: f64 = 1e14;

// ── Errors ──────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FilterError {
    /// Matrix to invert is singular or past the condition cap.
    Singular,
    /// A reduced block `Psi^H V^H S V Psi` is singular.
    SingularBlock,
    /// Projection left nothing along `v` to normalize against.
    DegenerateProjection,
    /// Argument outside its domain.
    BadParam,
    /// Scenario kind does not match the requested representation.
    KindMismatch,
    /// Underlying linear-algebra failure.
    Linalg(HermitianError),
}

impl fmt::Display for FilterError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Singular => write!(f, "matrix is singular or beyond the condition cap"),
            Self::SingularBlock => write!(f, "reduced training block is singular"),
            Self::DegenerateProjection => write!(f, "projection is orthogonal to v"),
            Self::BadParam => write!(f, "parameter out of domain"),
            Self::KindMismatch => write!(f, "scenario kind does not match"),
            Self::Linalg(e) => write!(f, "linear algebra failure: {e}"),
        }
    }
}

impl core::error::Error for FilterError {}

impl From<HermitianError> for FilterError {
    fn from(e: HermitianError) -> Self {
        match e {
            HermitianError::SingularPivot => Self::Singular,
            other => Self::Linalg(other),
        }
    }
}

impl From<DistError> for FilterError {
    fn from(e: DistError) -> Self {
        match e {
            DistError::BadParam => Self::BadParam,
            DistError::Linalg(h) => Self::from(h),
            _ => Self::BadParam,
        }
    }
}

// ── Weight ──────────────────────────────────────────────────────────────

/// A complex weight (or signature) vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Weight {
    entries: Vec<Complex64>,
}

impl Weight {
    /// Validates finiteness and nonzero dimension.
    pub fn new(entries: Vec<Complex64>) -> Result<Self, FilterError> {
        if entries.is_empty() || !entries.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(FilterError::BadParam);
        }
        Ok(Self { entries })
    }

    pub(crate) fn from_vec_unchecked(entries: Vec<Complex64>) -> Self {
        Self { entries }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    #[inline]
    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        vec_norm(&self.entries)
    }
}

impl Deref for Weight {
    type Target = [Complex64];

    fn deref(&self) -> &[Complex64] {
        &self.entries
    }
}

/// Scales `raw` so that `w^H v = 1`.
fn distortionless(raw: Vec<Complex64>, v: &[Complex64]) -> Result<Weight, FilterError> {
    let d = dot(v, &raw);
    if d.norm() < 1e-12 * vec_norm(v) * vec_norm(&raw) || d.norm() == 0.0 {
        return Err(FilterError::DegenerateProjection);
    }
    let w = raw.iter().map(|z| z / d).collect();
    Ok(Weight::from_vec_unchecked(w))
}

/// White-noise matched filter `v / ||v||^2` (distortionless).
pub fn w_wnmf(v: &[Complex64]) -> Result<Weight, FilterError> {
    let n2 = vec_norm(v);
    if n2 == 0.0 {
        return Err(FilterError::BadParam);
    }
    distortionless(v.to_vec(), v)
}

// ── Transform ───────────────────────────────────────────────────────────

/// Dimension-reducing transform for partially adaptive filtering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformStyle {
    General,
    Gsc,
}

/// `N x (R+1)` full-column-rank transform; `gsc` style has first column
/// `w_wnmf` and the rest inside the orthogonal complement of `v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transform {
    matrix: ComplexMatrix,
    style: TransformStyle,
}

impl Transform {
    /// General transform from an arbitrary full-column-rank matrix.
    pub fn general(matrix: ComplexMatrix) -> Result<Self, FilterError> {
        Self::validated(matrix, TransformStyle::General)
    }

    /// GSC-structured transform `[w_wnmf, V_perp Psi]` for signature `v`
    /// and blocking-space mixer `psi` of shape `(N-1) x R`.
    pub fn gsc(v: &[Complex64], psi: &ComplexMatrix) -> Result<Self, FilterError> {
        let n = v.len();
        if psi.rows() != n - 1 || psi.cols() >= n {
            return Err(FilterError::BadParam);
        }
        let vperp = orth_complement(v)?;
        let wq = w_wnmf(v)?;
        let mixed = vperp.mul(psi);
        let r = psi.cols();
        let mut entries = vec![Complex64::ZERO; n * (r + 1)];
        for i in 0..n {
            entries[i * (r + 1)] = wq[i];
            for j in 0..r {
                entries[i * (r + 1) + j + 1] = mixed[(i, j)];
            }
        }
        Self::validated(
            ComplexMatrix::from_vec_unchecked(n, r + 1, entries),
            TransformStyle::Gsc,
        )
    }

    fn validated(matrix: ComplexMatrix, style: TransformStyle) -> Result<Self, FilterError> {
        if matrix.cols() == 0 || matrix.cols() > matrix.rows() {
            return Err(FilterError::BadParam);
        }
        // Full column rank iff the Gram matrix admits a full Cholesky.
        let g = crate::dist::gram(&matrix.adjoint());
        partial_cholesky(&g, g.dim()).map_err(|_| FilterError::BadParam)?;
        Ok(Self { matrix, style })
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    #[inline]
    pub fn style(&self) -> TransformStyle {
        self.style
    }

    /// Adaptive degrees of freedom `R` (columns minus the constrained one).
    #[inline]
    pub fn rank_r(&self) -> usize {
        self.matrix.cols() - 1
    }
}

// ── Filter constructors ─────────────────────────────────────────────────

/// Clairvoyant optimal filter `Sigma^{-1} v / (v^H Sigma^{-1} v)`.
pub fn w_optimal(sigma: &HermitianMatrix, v: &[Complex64]) -> Result<Weight, FilterError> {
    let raw = solve_hermitian(sigma, v)?;
    distortionless(raw, v)
}

/// Sample matrix inversion filter `S_t^{-1} v / (v^H S_t^{-1} v)`.
///
/// Fails with [`FilterError::Singular`] when the condition number of `S_t`
/// exceeds `1e14`.
pub fn w_smi(s_t: &HermitianMatrix, v: &[Complex64]) -> Result<Weight, FilterError> {
    let cond = condition_number(s_t)?;
    if !(cond < COND_CAP) {
        return Err(FilterError::Singular);
    }
    let raw = solve_hermitian(s_t, v)?;
    distortionless(raw, v)
}

/// Partially adaptive filter through transform `T`:
/// `w = T (T^H S_t T)^{-1} T^H v`, distortionless-normalized.
pub fn w_partial(
    t: &Transform,
    s_t: &HermitianMatrix,
    v: &[Complex64],
) -> Result<Weight, FilterError> {
    let tm = t.matrix();
    if tm.rows() != v.len() || s_t.dim() != v.len() {
        return Err(FilterError::BadParam);
    }
    let reduced = s_t.congruence(tm);
    let rhs = tm.adjoint_mul_vec(v);
    let x = solve_hermitian(&reduced, &rhs).map_err(|_| FilterError::Singular)?;
    let raw = tm.mul_vec(&x);
    distortionless(raw, v).map_err(|_| FilterError::Singular)
}

/// Eigencanceler: removes the projection of `v` onto the `R` dominant
/// eigenvectors of `S_t`, then normalizes. `R = 0` gives the white-noise
/// matched filter.
pub fn w_eigencanceler(
    s_t: &HermitianMatrix,
    v: &[Complex64],
    r: usize,
) -> Result<Weight, FilterError> {
    let n = v.len();
    if s_t.dim() != n || r >= n {
        return Err(FilterError::BadParam);
    }
    let dec = eigh(s_t)?;
    let mut raw = v.to_vec();
    for k in 0..r {
        let u = dec.vectors.column(k);
        let coef = dot(&u, v);
        for i in 0..n {
            raw[i] -= coef * u[i];
        }
    }
    distortionless(raw, v)
}

/// Partial-Cholesky filter: projects `v` onto the orthogonal complement of
/// the range of the rank-R partial Cholesky factor of `S_t`.
pub fn w_pchol(s_t: &HermitianMatrix, v: &[Complex64], r: usize) -> Result<Weight, FilterError> {
    let n = v.len();
    if s_t.dim() != n || r >= n {
        return Err(FilterError::BadParam);
    }
    if r == 0 {
        return w_wnmf(v);
    }
    let g = partial_cholesky(s_t, r)?;
    let p = projector(&g)?;
    let pv = p.mul_vec(v);
    let raw: Vec<Complex64> = v.iter().zip(&pv).map(|(a, b)| a - b).collect();
    if dot(v, &raw).norm() < 1e-12 {
        return Err(FilterError::DegenerateProjection);
    }
    distortionless(raw, v)
}

/// Diagonal loading: `(S_t + K mu I)^{-1} v`, distortionless-normalized.
pub fn w_diagonal_loading(
    s_t: &HermitianMatrix,
    v: &[Complex64],
    mu: f64,
    k: usize,
) -> Result<Weight, FilterError> {
    if !(mu >= 0.0) || s_t.dim() != v.len() {
        return Err(FilterError::BadParam);
    }
    let eye = HermitianMatrix::identity(s_t.dim());
    let loaded = s_t.add_scaled(k as f64 * mu, &eye);
    let raw = solve_hermitian(&loaded, v)?;
    distortionless(raw, v)
}

/// Marzetta's averaged reduced-rank filter: the mean of `L` random-`Psi`
/// GSC filters sharing one training covariance. `w^H v = 1` by structure.
pub fn w_marzetta(
    rng: &mut RngStream,
    s_t: &HermitianMatrix,
    v: &[Complex64],
    r: usize,
    l: usize,
) -> Result<Weight, FilterError> {
    let n = v.len();
    if s_t.dim() != n || r >= n || l == 0 {
        return Err(FilterError::BadParam);
    }
    let wq = w_wnmf(v)?;
    if r == 0 {
        return Ok(wq);
    }
    let vperp = orth_complement(v)?;
    // Shared pieces: M = V^H S_t V and z = V^H S_t w_wnmf.
    let m = s_t.congruence(&vperp);
    let z = vperp.adjoint_mul_vec(&s_t.mul_vec(&wq));
    let mut w: Vec<Complex64> = wq.entries().to_vec();
    let scale = 1.0 / l as f64;
    for _ in 0..l {
        let psi = sample_iid_cgauss(rng, n - 1, r);
        let reduced = m.congruence(&psi);
        let rhs = psi.adjoint_mul_vec(&z);
        let x = solve_hermitian(&reduced, &rhs).map_err(|_| FilterError::SingularBlock)?;
        let term = vperp.mul_vec(&psi.mul_vec(&x));
        for i in 0..n {
            w[i] -= scale * term[i];
        }
    }
    Ok(Weight::from_vec_unchecked(w))
}

// ── Weight-vector stochastic representation ─────────────────────────────

/// Draws the SMI weight vector directly from its stochastic
/// representation instead of simulating a training set:
///
/// ```text
/// w  =  w_opt - f * (v^H Sigma^{-1} v)^{-1/2}
///              * V_perp (V_perp^H Sigma V_perp)^{-H/2} n / sqrt(V21)
/// ```
///
/// with `n` standard complex normal, `V21 ~ Cchi2_{K-N+2}(0)`, `f = 1`
/// for matched (MVDR) training and `f = sqrt(1 + SNR_opt/gamma)` when the
/// signal contaminates the training data (MPDR).
pub fn weight_rep(
    rng: &mut RngStream,
    scenario: &Scenario,
    k: usize,
    kind: ScenarioKind,
) -> Result<Weight, FilterError> {
    if scenario.kind != kind || !matches!(kind, ScenarioKind::Mvdr | ScenarioKind::Mpdr) {
        return Err(FilterError::KindMismatch);
    }
    let n = scenario.v.dim();
    if k + 2 <= n {
        return Err(FilterError::BadParam);
    }
    let v = scenario.v.entries();
    let sigma_inv_v = solve_hermitian(&scenario.sigma, v)?;
    let quad = dot(v, &sigma_inv_v).re;
    let w_opt: Vec<Complex64> = sigma_inv_v.iter().map(|z| z / quad).collect();

    let factor = match kind {
        ScenarioKind::Mpdr => {
            let s = scenario.soi_power * quad / scenario.gamma;
            libm::sqrt(1.0 + s)
        }
        _ => 1.0,
    };

    let vperp = orth_complement(v)?;
    let reduced = scenario.sigma.congruence(&vperp);
    let dec = eigh(&reduced)?;
    if dec.values[n - 2] <= 0.0 {
        return Err(FilterError::Singular);
    }
    let noise: Vec<Complex64> = (0..n - 1)
        .map(|_| crate::dist::sample_cnormal(rng))
        .collect();
    // (V^H Sigma V)^{-H/2} n via the eigendecomposition.
    let coefs = dec.vectors.adjoint_mul_vec(&noise);
    let mut mixed = vec![Complex64::ZERO; n - 1];
    for j in 0..n - 1 {
        let c = coefs[j] / libm::sqrt(dec.values[j]);
        for i in 0..n - 1 {
            mixed[i] += dec.vectors[(i, j)] * c;
        }
    }
    let fluct = vperp.mul_vec(&mixed);
    let v21 = sample_cchisq(rng, k + 2 - n, 0.0)?;
    let amp = factor / (libm::sqrt(quad) * libm::sqrt(v21));
    let w: Vec<Complex64> = w_opt.iter().zip(&fluct).map(|(a, b)| a - amp * b).collect();
    Ok(Weight::from_vec_unchecked(w))
}

/// Closed-form `E[||w||^2]` of the SMI filter trained on `K` snapshots
/// with training covariance `ct`:
///
/// ```text
/// E||w||^2 = ||ct^{-1} v||^2 / (v^H ct^{-1} v)^2
///          + Tr[(V_perp^H ct V_perp)^{-1}] / ((v^H ct^{-1} v)(K - N + 1))
/// ```
pub fn expected_wnorm(ct: &HermitianMatrix, v: &[Complex64], k: usize) -> Result<f64, FilterError> {
    let n = v.len();
    if ct.dim() != n || k < n {
        return Err(FilterError::BadParam);
    }
    let ct_inv_v = solve_hermitian(ct, v)?;
    let quad = dot(v, &ct_inv_v).re;
    let term1 = ct_inv_v.iter().map(|z| z.norm_sqr()).sum::<f64>() / (quad * quad);
    let vperp = orth_complement(v)?;
    let reduced = ct.congruence(&vperp);
    let dec = eigh(&reduced)?;
    if dec.values[n - 2] <= 0.0 {
        return Err(FilterError::Singular);
    }
    let trace_inv: f64 = dec.values.iter().map(|l| 1.0 / l).sum();
    Ok(term1 + trace_inv / (quad * (k + 1 - n) as f64))
}

// ── tests ───────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::gram;
    use crate::law::snr_loss;
    use crate::scenario::{build_sigma, make_mpdr, make_mvdr, ula_steering, Interferer};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn paper_scenario() -> (HermitianMatrix, ComplexMatrix, Weight) {
        let interferers = [
            Interferer {
                angle_deg: -12.0,
                power_db: 35.0,
            },
            Interferer {
                angle_deg: 9.0,
                power_db: 25.0,
            },
            Interferer {
                angle_deg: 25.0,
                power_db: 30.0,
            },
        ];
        let (sigma, g) = build_sigma(16, &interferers, 1.0).unwrap();
        let v = ula_steering(16, 0.0).unwrap();
        (sigma, g, v)
    }

    #[test]
    fn optimal_white_noise_is_wnmf() {
        let v = ula_steering(8, 17.0).unwrap();
        let w = w_optimal(&HermitianMatrix::identity(8), &v).unwrap();
        for (we, ve) in w.entries().iter().zip(v.entries()) {
            assert!((we - ve / c(8.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn optimal_has_unit_loss_and_nulls_interferers() {
        let (sigma, g, v) = paper_scenario();
        let w = w_optimal(&sigma, &v).unwrap();
        let loss = snr_loss(&w, &v, &sigma).unwrap();
        assert!((loss - 1.0).abs() < 1e-10, "optimal loss {loss}");
        for r in 0..g.cols() {
            let col = g.column(r);
            let response = dot(&w, &col).norm();
            let bound = 1e-2 * vec_norm(&col) * w.norm();
            assert!(response < bound, "interferer {r} response {response}");
        }
    }

    #[test]
    fn smi_on_true_covariance_is_optimal_and_scale_invariant() {
        let (sigma, _, v) = paper_scenario();
        let w_ref = w_optimal(&sigma, &v).unwrap();
        let w1 = w_smi(&sigma, &v).unwrap();
        for c_scale in [0.1, 7.3] {
            let w2 = w_smi(&sigma.scale(c_scale), &v).unwrap();
            for ((a, b), r) in w1.entries().iter().zip(w2.entries()).zip(w_ref.entries()) {
                assert!((a - b).norm() < 1e-12, "scale variance at c={c_scale}");
                assert!((a - r).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn smi_rejects_ill_conditioned() {
        let s = HermitianMatrix::from_diagonal(&[1.0, 1e-15]);
        let v = [c(1.0, 0.0), c(1.0, 0.0)];
        assert_eq!(w_smi(&s, &v).unwrap_err(), FilterError::Singular);
    }

    #[test]
    fn partial_with_identity_is_smi() {
        let (sigma, _, v) = paper_scenario();
        let mut rng = RngStream::new(21, 0);
        let x = sample_iid_cgauss(&mut rng, 16, 40);
        let root = crate::hermitian::hermitian_sqrt(&sigma).unwrap();
        let s_t = gram(&root.mul(&x));
        let t = Transform::general(ComplexMatrix::identity(16)).unwrap();
        let wp = w_partial(&t, &s_t, &v).unwrap();
        let ws = w_smi(&s_t, &v).unwrap();
        for (a, b) in wp.entries().iter().zip(ws.entries()) {
            assert!((a - b).norm() < 1e-9, "T=I mismatch {a} vs {b}");
        }
    }

    #[test]
    fn partial_clairvoyant_in_range_is_optimal() {
        // Sigma^{-1} v lies in span{v, G} for Sigma = G G^H + I, so the
        // partially adaptive filter with T = [v, G] achieves the optimum.
        let (sigma, g, v) = paper_scenario();
        let n = 16;
        let r = g.cols();
        let mut entries = vec![Complex64::ZERO; n * (r + 1)];
        for i in 0..n {
            entries[i * (r + 1)] = v[i];
            for j in 0..r {
                entries[i * (r + 1) + j + 1] = g[(i, j)];
            }
        }
        let t = Transform::general(ComplexMatrix::new(n, r + 1, entries).unwrap()).unwrap();
        let wp = w_partial(&t, &sigma, &v).unwrap();
        let wo = w_optimal(&sigma, &v).unwrap();
        for (a, b) in wp.entries().iter().zip(wo.entries()) {
            assert!((a - b).norm() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn gsc_equivalence_two_routes() {
        // Direct-form partial filter with a GSC transform must equal the
        // blocked update w_wnmf - V Psi (Psi^H V^H S V Psi)^{-1} Psi^H V^H S w_wnmf.
        let (sigma, _, v) = paper_scenario();
        let mut rng = RngStream::new(22, 0);
        let root = crate::hermitian::hermitian_sqrt(&sigma).unwrap();
        let s_t = gram(&root.mul(&sample_iid_cgauss(&mut rng, 16, 32)));
        let psi = sample_iid_cgauss(&mut rng, 15, 4);
        let t = Transform::gsc(&v, &psi).unwrap();
        let wp = w_partial(&t, &s_t, &v).unwrap();

        let wq = w_wnmf(&v).unwrap();
        let vperp = orth_complement(&v).unwrap();
        let m = s_t.congruence(&vperp);
        let z = vperp.adjoint_mul_vec(&s_t.mul_vec(&wq));
        let reduced = m.congruence(&psi);
        let rhs = psi.adjoint_mul_vec(&z);
        let x = solve_hermitian(&reduced, &rhs).unwrap();
        let corr = vperp.mul_vec(&psi.mul_vec(&x));
        for i in 0..16 {
            let want = wq[i] - corr[i];
            assert!((wp[i] - want).norm() < 1e-10, "entry {i}");
        }
        assert!(
            (dot(&wp, &v) - Complex64::ONE).norm() < 1e-10,
            "distortionless"
        );
    }

    #[test]
    fn eigencanceler_rank_zero_is_wnmf() {
        let (sigma, _, v) = paper_scenario();
        let w = w_eigencanceler(&sigma, &v, 0).unwrap();
        for (we, ve) in w.entries().iter().zip(v.entries()) {
            assert!((we - ve / c(16.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn eigencanceler_low_rank_limit_is_projection() {
        // S = G G^H + eps I with eps -> 0: the R dominant eigenvectors span
        // range(G), so the eigencanceler tends to the projection of v onto
        // the complement of the interference subspace.
        let (_, g, v) = paper_scenario();
        let eps = 1e-9;
        let gg = gram(&g);
        let s = gg.add_scaled(eps, &HermitianMatrix::identity(16));
        let w = w_eigencanceler(&s, &v, 3).unwrap();
        let p = projector(&g).unwrap();
        let pv = p.mul_vec(&v);
        let raw: Vec<Complex64> = v.iter().zip(&pv).map(|(a, b)| a - b).collect();
        let d = dot(&v, &raw);
        for i in 0..16 {
            let want = raw[i] / d;
            assert!((w[i] - want).norm() < 1e-6, "entry {i}: {} vs {want}", w[i]);
        }
    }

    #[test]
    fn pchol_diagonal_zeroes_leading_coordinates() {
        let s = HermitianMatrix::from_diagonal(&[4.0, 3.0, 2.0, 1.0]);
        let v = ula_steering(4, 21.0).unwrap();
        let w = w_pchol(&s, &v, 2).unwrap();
        assert!(
            w[0].norm() < 1e-12 && w[1].norm() < 1e-12,
            "leading entries must vanish"
        );
        assert!((dot(&w, &v) - Complex64::ONE).norm() < 1e-10);
    }

    #[test]
    fn pchol_rank_zero_is_wnmf() {
        let (sigma, _, v) = paper_scenario();
        let w = w_pchol(&sigma, &v, 0).unwrap();
        for (we, ve) in w.entries().iter().zip(v.entries()) {
            assert!((we - ve / c(16.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn diagonal_loading_limits() {
        let (sigma, _, v) = paper_scenario();
        let mut rng = RngStream::new(23, 0);
        let root = crate::hermitian::hermitian_sqrt(&sigma).unwrap();
        let s_t = gram(&root.mul(&sample_iid_cgauss(&mut rng, 16, 32)));
        // mu = 0 on a PD S_t reduces to SMI
        let w0 = w_diagonal_loading(&s_t, &v, 0.0, 32).unwrap();
        let ws = w_smi(&s_t, &v).unwrap();
        for (a, b) in w0.entries().iter().zip(ws.entries()) {
            assert!((a - b).norm() < 1e-10);
        }
        // huge mu tends to the white-noise matched filter
        let winf = w_diagonal_loading(&s_t, &v, 1e12, 32).unwrap();
        let wq = w_wnmf(&v).unwrap();
        for (a, b) in winf.entries().iter().zip(wq.entries()) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn marzetta_single_draw_equals_gsc_partial() {
        let (sigma, _, v) = paper_scenario();
        let mut rng = RngStream::new(24, 0);
        let root = crate::hermitian::hermitian_sqrt(&sigma).unwrap();
        let s_t = gram(&root.mul(&sample_iid_cgauss(&mut rng, 16, 32)));
        // replay the same Psi by reusing the stream position
        let mut rng_a = RngStream::new(25, 7);
        let wm = w_marzetta(&mut rng_a, &s_t, &v, 4, 1).unwrap();
        let mut rng_b = RngStream::new(25, 7);
        let psi = sample_iid_cgauss(&mut rng_b, 15, 4);
        let t = Transform::gsc(&v, &psi).unwrap();
        let wp = w_partial(&t, &s_t, &v).unwrap();
        for (a, b) in wm.entries().iter().zip(wp.entries()) {
            assert!((a - b).norm() < 1e-9, "{a} vs {b}");
        }
        assert!((dot(&wm, &v) - Complex64::ONE).norm() < 1e-10);
    }

    #[test]
    fn weight_rep_concentrates_at_optimum() {
        let (sigma, _, v) = paper_scenario();
        let sc = make_mvdr(sigma.clone(), v.clone()).unwrap();
        let mut rng = RngStream::new(26, 0);
        let w = weight_rep(&mut rng, &sc, 1_000_000, ScenarioKind::Mvdr).unwrap();
        let wo = w_optimal(&sigma, &v).unwrap();
        let gap: f64 = w
            .entries()
            .iter()
            .zip(wo.entries())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(gap < 1e-2, "K=1e6 weight still {gap} from optimal");
    }

    #[test]
    fn weight_rep_mean_is_optimal_weight() {
        let v = ula_steering(8, 5.0).unwrap();
        let (sigma, _) = build_sigma(
            8,
            &[Interferer {
                angle_deg: -20.0,
                power_db: 20.0,
            }],
            1.0,
        )
        .unwrap();
        let sc = make_mvdr(sigma.clone(), v.clone()).unwrap();
        let wo = w_optimal(&sigma, &v).unwrap();
        let mut rng = RngStream::new(27, 0);
        let m = 20_000;
        let mut acc = vec![Complex64::ZERO; 8];
        for _ in 0..m {
            let w = weight_rep(&mut rng, &sc, 16, ScenarioKind::Mvdr).unwrap();
            for (a, e) in acc.iter_mut().zip(w.entries()) {
                *a += e;
            }
        }
        for (a, want) in acc.iter().zip(wo.entries()) {
            let got = a / m as f64;
            assert!((got - want).norm() < 5e-3, "{got} vs {want}");
        }
    }

    #[test]
    fn weight_rep_rejects_kind_mismatch() {
        let (sigma, _, v) = paper_scenario();
        let sc = make_mvdr(sigma, v).unwrap();
        let mut rng = RngStream::new(28, 0);
        assert_eq!(
            weight_rep(&mut rng, &sc, 32, ScenarioKind::Mpdr).unwrap_err(),
            FilterError::KindMismatch
        );
    }

    #[test]
    fn expected_wnorm_identity_case() {
        let v = ula_steering(8, 0.0).unwrap();
        let got = expected_wnorm(&HermitianMatrix::identity(8), &v, 16).unwrap();
        // ||v||^{-2} (1 + (N-1)/(K-N+1)) with ||v||^2 = 8
        let want = (1.0 + 7.0 / 9.0) / 8.0;
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        assert_eq!(
            expected_wnorm(&HermitianMatrix::identity(8), &v, 7).unwrap_err(),
            FilterError::BadParam
        );
    }

    #[test]
    fn expected_wnorm_matches_mpdr_gap() {
        // E||w_mpdr||^2 - E||w_mvdr||^2 = P Tr[(V^H Sigma V)^{-1}]/(K-N+1),
        // checked through the representation sampler.
        let v = ula_steering(8, 0.0).unwrap();
        let (sigma, _) = build_sigma(
            8,
            &[Interferer {
                angle_deg: 30.0,
                power_db: 15.0,
            }],
            1.0,
        )
        .unwrap();
        let p = 0.5;
        let k = 16;
        let mvdr = make_mvdr(sigma.clone(), v.clone()).unwrap();
        let mpdr = make_mpdr(sigma.clone(), v.clone(), p, 1.0).unwrap();
        let m = 100_000;
        let mut rng = RngStream::new(29, 0);
        let mut acc_mvdr = 0.0;
        let mut acc_mpdr = 0.0;
        for _ in 0..m {
            let a = weight_rep(&mut rng, &mvdr, k, ScenarioKind::Mvdr).unwrap();
            let b = weight_rep(&mut rng, &mpdr, k, ScenarioKind::Mpdr).unwrap();
            acc_mvdr += a.norm() * a.norm();
            acc_mpdr += b.norm() * b.norm();
        }
        let gap = (acc_mpdr - acc_mvdr) / m as f64;
        let vperp = orth_complement(&v).unwrap();
        let reduced = sigma.congruence(&vperp);
        let dec = eigh(&reduced).unwrap();
        let want = p * dec.values.iter().map(|l| 1.0 / l).sum::<f64>() / (k as f64 - 7.0);
        assert!(
            (gap - want).abs() < 0.02 * want.max(0.05),
            "norm gap {gap} vs {want}"
        );
    }
}
