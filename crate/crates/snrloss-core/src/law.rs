//! SNR-loss metrics, distribution laws, and their samplers.
//!
//! The output SNR of a weight vector `w` against the true covariance
//! `Sigma`, its optimum, and the loss relative to that optimum:
//!
//! ```text
//! SNR(w)   = P |w^H v|^2 / (w^H Sigma w)
//! SNR_opt  = P v^H Sigma^{-1} v
//! rho(w)   = SNR(w) / SNR_opt  in [0, 1]
//! ```
//!
//! For adaptively trained filters `rho` is random, and for every training
//! regime in [`crate::scenario`] its distribution is known, either in
//! closed form or as a stochastic representation assembled from complex
//! chi-square blocks. [`LossLaw`] names those distributions, [`sample_rho`]
//! draws from the representation, and [`pdf_rho`] / [`cdf_rho`] evaluate
//! the closed forms where they exist. The representation underlying all
//! Gaussian-training laws, for a unitary `Q` whose first column is the
//! whitened signature `C_t^{-1/2} v` (up to scale):
//!
//! ```text
//! Omega = Q^H C_t^{-1/2} Sigma C_t^{-1/2} Q
//! rho  =  [ 1 + ratio * sum_i lambda_i Cchi2_1(V21 delta_i) / V21 ]^{-1}
//! ratio = (v^H Sigma^{-1} v) / (v^H C_t^{-1} v)
//! V21 ~ Cchi2_{K-N+2}(0),  lambda_i = eig(Omega_22),
//! delta_i = |u_i^H Omega_22^{-1} Omega_21|^2
//! ```
//!
//! Matched training collapses this to a Beta distribution; the other kinds
//! are parameterized deformations of it. Kinds tagged `*_approx` are only
//! approximately Beta (valid under strong low-rank interference) and say
//! so through [`LossLaw::approximate`].

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dist::{
    beta_cdf, beta_pdf, gauss_2f1, ln_beta, sample_cchisq, sample_gamma, BetaParams, DistError,
    RngStream,
};
use crate::filters::Transform;
use crate::hermitian::{
    dot, eigh, orth_complement, solve_hermitian, ComplexMatrix, HermitianError, HermitianMatrix,
};

/// Seed used when [`cdf_rho`] falls back to an empirical distribution.
pub const EMPIRICAL_CDF_SEED: u64 = 0xECDF;

/// Draw count of the empirical-cdf fallback.
pub const EMPIRICAL_CDF_DRAWS: usize = 1_000_000;

// ── Errors ──────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LawError {
    /// Parameter outside its domain or inconsistent with the law kind.
    BadParam,
    /// The kind has no closed-form density.
    NoClosedForm,
    /// Weight or signature vector is numerically zero.
    ZeroVector,
    /// A covariance involved is not invertible.
    Singular,
    /// Quadrature or series evaluation failed to converge.
    NoConvergence,
    /// Sampling failure.
    Dist(DistError),
    /// Linear-algebra failure.
    Linalg(HermitianError),
}

impl fmt::Display for LawError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::BadParam => write!(f, "parameter out of domain"),
            Self::NoClosedForm => write!(f, "no closed-form density for this law kind"),
            Self::ZeroVector => write!(f, "zero vector"),
            Self::Singular => write!(f, "singular covariance"),
            Self::NoConvergence => write!(f, "numerical evaluation did not converge"),
            Self::Dist(e) => write!(f, "sampling failure: {e}"),
            Self::Linalg(e) => write!(f, "linear algebra failure: {e}"),
        }
    }
}

impl core::error::Error for LawError {}

impl From<DistError> for LawError {
    fn from(e: DistError) -> Self {
        match e {
            DistError::NotPD => Self::Singular,
            other => Self::Dist(other),
        }
    }
}

impl From<HermitianError> for LawError {
    fn from(e: HermitianError) -> Self {
        match e {
            HermitianError::SingularPivot | HermitianError::NotPSD => Self::Singular,
            other => Self::Linalg(other),
        }
    }
}

// ── SNR metrics ─────────────────────────────────────────────────────────

/// Output SNR of `w` at signal power `p` against the covariance `sigma`.
pub fn snr(
    w: &[Complex64],
    v: &[Complex64],
    sigma: &HermitianMatrix,
    p: f64,
) -> Result<f64, LawError> {
    if w.len() != v.len() || sigma.dim() != w.len() || !(p >= 0.0) {
        return Err(LawError::BadParam);
    }
    let wnorm: f64 = w.iter().map(|z| z.norm_sqr()).sum();
    if wnorm == 0.0 {
        return Err(LawError::ZeroVector);
    }
    let num = dot(w, v).norm_sqr();
    let den = sigma.herm_quad(w);
    if !(den > 0.0) {
        return Err(LawError::Singular);
    }
    Ok(p * num / den)
}

/// Optimal output SNR `P v^H Sigma^{-1} v`.
pub fn snr_opt(sigma: &HermitianMatrix, v: &[Complex64], p: f64) -> Result<f64, LawError> {
    if sigma.dim() != v.len() || !(p >= 0.0) {
        return Err(LawError::BadParam);
    }
    if v.iter().all(|z| z.norm_sqr() == 0.0) {
        return Err(LawError::ZeroVector);
    }
    let x = solve_hermitian(sigma, v)?;
    Ok(p * dot(v, &x).re)
}

/// SNR loss `rho(w) = |w^H v|^2 / ((v^H Sigma^{-1} v)(w^H Sigma w))`,
/// clamped to `[0, 1]` against roundoff at the endpoints.
pub fn snr_loss(
    w: &[Complex64],
    v: &[Complex64],
    sigma: &HermitianMatrix,
) -> Result<f64, LawError> {
    let num = snr(w, v, sigma, 1.0)?;
    let den = snr_opt(sigma, v, 1.0)?;
    if !(den > 0.0) {
        return Err(LawError::Singular);
    }
    Ok((num / den).clamp(0.0, 1.0))
}

/// Maps a matched-training loss realization to the signal-contaminated
/// one sharing the same underlying randomness:
/// `rho / (1 + (1 - rho) snr_opt)`.
pub fn mpdr_map(rho: f64, snr_opt: f64) -> f64 {
    rho / (1.0 + (1.0 - rho) * snr_opt)
}

// ── General representation parameters ───────────────────────────────────

/// Inputs of the general-covariance loss representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralRepParams {
    /// `(v^H Sigma^{-1} v) / (v^H C_t^{-1} v)`.
    pub ratio: f64,
    /// Eigenvalues of `Omega_22`, descending.
    pub omega_eigs: Vec<f64>,
    /// Noncentrality weights `delta_i = |u_i^H Omega_22^{-1} Omega_21|^2`,
    /// ordered like `omega_eigs`.
    pub deltas: Vec<f64>,
}

/// Extracts the general-representation parameters of a `(Sigma, C_t, v)`
/// triple: whitens by `C_t^{-1/2}`, rotates the whitened signature onto
/// the first coordinate, and reads the trailing block's spectrum.
pub fn derive_general_params(
    sigma: &HermitianMatrix,
    ct: &HermitianMatrix,
    v: &[Complex64],
) -> Result<GeneralRepParams, LawError> {
    let n = v.len();
    if sigma.dim() != n || ct.dim() != n || n < 2 {
        return Err(LawError::BadParam);
    }
    let inv_root = crate::dist::pd_inv_sqrt(ct)?;
    let mut u = inv_root.mul_vec(v);
    let unorm = libm::sqrt(u.iter().map(|z| z.norm_sqr()).sum());
    if unorm < 1e-300 {
        return Err(LawError::ZeroVector);
    }
    for z in &mut u {
        *z /= unorm;
    }
    let tail = orth_complement(&u)?;
    let mut q = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        q.entries_mut()[i * n] = u[i];
        for j in 1..n {
            q.entries_mut()[i * n + j] = tail[(i, j - 1)];
        }
    }
    let whitened = sigma.congruence(&inv_root);
    let omega = whitened.congruence(&q);
    let mut omega21 = Vec::with_capacity(n - 1);
    for i in 1..n {
        omega21.push(omega[(i, 0)]);
    }
    let mut block = vec![Complex64::ZERO; (n - 1) * (n - 1)];
    for i in 1..n {
        for j in 1..n {
            block[(i - 1) * (n - 1) + (j - 1)] = omega[(i, j)];
        }
    }
    let omega22 = HermitianMatrix::new(n - 1, block, true)?;
    let dec = eigh(&omega22)?;
    if dec.values[n - 2] <= 0.0 {
        return Err(LawError::Singular);
    }
    let t21 = solve_hermitian(&omega22, &omega21)?;
    let deltas: Vec<f64> = (0..n - 1)
        .map(|j| {
            let col = dec.vectors.column(j);
            dot(&col, &t21).norm_sqr()
        })
        .collect();
    let s_quad = snr_opt(sigma, v, 1.0)?;
    let ct_quad = snr_opt(ct, v, 1.0)?;
    if !(ct_quad > 0.0) {
        return Err(LawError::Singular);
    }
    Ok(GeneralRepParams {
        ratio: s_quad / ct_quad,
        omega_eigs: dec.values,
        deltas,
    })
}

// ── Loss laws ───────────────────────────────────────────────────────────

/// Distribution-law tag; `*_approx` kinds are approximations valid under
/// strong low-rank interference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossLawKind {
    Mvdr,
    Mpdr,
    Ger,
    Undernulled,
    General,
    Student,
    PaMvdr,
    PaMpdr,
    EcApprox,
    PcholApprox,
    DlApprox,
}

impl fmt::Display for LossLawKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Mvdr => "mvdr",
            Self::Mpdr => "mpdr",
            Self::Ger => "ger",
            Self::Undernulled => "undernulled",
            Self::General => "general",
            Self::Student => "student",
            Self::PaMvdr => "pa_mvdr",
            Self::PaMpdr => "pa_mpdr",
            Self::EcApprox => "ec_approx",
            Self::PcholApprox => "pchol_approx",
            Self::DlApprox => "dl_approx",
        };
        write!(f, "{s}")
    }
}

/// A fully parameterized SNR-loss distribution. Only the fields relevant
/// to `kind` are populated; construct through the kind-named constructors,
/// which validate, and re-run [`LossLaw::validate`] after deserializing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossLaw {
    pub kind: LossLawKind,
    /// Array dimension; irrelevant (None) for reduced-rank kinds.
    #[serde(rename = "N", skip_serializing_if = "Option::is_none", default)]
    pub n: Option<usize>,
    /// Training sample count.
    #[serde(rename = "K")]
    pub k: usize,
    /// Transform rank of the reduced-rank kinds.
    #[serde(rename = "R", skip_serializing_if = "Option::is_none", default)]
    pub r: Option<usize>,
    /// `SNR_opt / gamma` of the contaminating signal.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub snr_opt_over_gamma: Option<f64>,
    /// Proportionality constant of the generalized eigenvalue relation;
    /// for the `general` kind it carries the reciprocal of
    /// [`GeneralRepParams::ratio`], which equals lambda whenever the
    /// relation holds.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda: Option<f64>,
    /// Eigenvalues of the whitened-rotated trailing block.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub omega_eigs: Option<Vec<f64>>,
    /// Noncentrality weights, ordered like `omega_eigs`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub deltas: Option<Vec<f64>>,
    /// Student degrees of freedom.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub nu: Option<f64>,
    /// Reduced-rank energy fraction; the support is `[0, a]`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub a: Option<f64>,
    /// Scale of the partial-Cholesky approximation (caller-estimated).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub a_prime: Option<f64>,
}

fn check_nk(n: usize, k: usize) -> Result<(), LawError> {
    if n < 2 || k < n {
        return Err(LawError::BadParam);
    }
    Ok(())
}

fn check_kr(k: usize, r: usize) -> Result<(), LawError> {
    if r == 0 || k < r {
        return Err(LawError::BadParam);
    }
    Ok(())
}

fn check_unit(x: f64) -> Result<(), LawError> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(LawError::BadParam);
    }
    Ok(())
}

fn empty_law(kind: LossLawKind, k: usize) -> LossLaw {
    LossLaw {
        kind,
        n: None,
        k,
        r: None,
        snr_opt_over_gamma: None,
        lambda: None,
        omega_eigs: None,
        deltas: None,
        nu: None,
        a: None,
        a_prime: None,
    }
}

impl LossLaw {
    /// Matched training: `rho ~ Beta` with degree labels `(N-1, K-N+2)`.
    pub fn mvdr(n: usize, k: usize) -> Result<Self, LawError> {
        check_nk(n, k)?;
        Ok(LossLaw {
            n: Some(n),
            ..empty_law(LossLawKind::Mvdr, k)
        })
    }

    /// Signal-contaminated training at `s = SNR_opt / gamma`.
    pub fn mpdr(n: usize, k: usize, snr_opt_over_gamma: f64) -> Result<Self, LawError> {
        check_nk(n, k)?;
        if !(snr_opt_over_gamma >= 0.0) || !snr_opt_over_gamma.is_finite() {
            return Err(LawError::BadParam);
        }
        Ok(LossLaw {
            n: Some(n),
            snr_opt_over_gamma: Some(snr_opt_over_gamma),
            ..empty_law(LossLawKind::Mpdr, k)
        })
    }

    /// Generalized eigenvalue relation `C_t^{-1} v = lambda Sigma^{-1} v`.
    pub fn ger(n: usize, k: usize, lambda: f64, omega_eigs: Vec<f64>) -> Result<Self, LawError> {
        check_nk(n, k)?;
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(LawError::BadParam);
        }
        if omega_eigs.len() != n - 1 || omega_eigs.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return Err(LawError::BadParam);
        }
        Ok(LossLaw {
            n: Some(n),
            lambda: Some(lambda),
            omega_eigs: Some(omega_eigs),
            ..empty_law(LossLawKind::Ger, k)
        })
    }

    /// Training that never saw one interferer of strength
    /// `q_form = q^H C_t^{-1} q`.
    pub fn undernulled(n: usize, k: usize, q_form: f64) -> Result<Self, LawError> {
        check_nk(n, k)?;
        if !(q_form >= 0.0) || !q_form.is_finite() {
            return Err(LawError::BadParam);
        }
        let mut eigs = vec![1.0; n - 1];
        eigs[0] = 1.0 + q_form;
        Ok(LossLaw {
            n: Some(n),
            omega_eigs: Some(eigs),
            ..empty_law(LossLawKind::Undernulled, k)
        })
    }

    /// Arbitrary `(Sigma, C_t)` pair via its representation parameters.
    pub fn general(n: usize, k: usize, params: GeneralRepParams) -> Result<Self, LawError> {
        check_nk(n, k)?;
        if !(params.ratio > 0.0) || !params.ratio.is_finite() {
            return Err(LawError::BadParam);
        }
        if params.omega_eigs.len() != n - 1 || params.deltas.len() != n - 1 {
            return Err(LawError::BadParam);
        }
        if params
            .omega_eigs
            .iter()
            .any(|&l| !(l > 0.0) || !l.is_finite())
            || params.deltas.iter().any(|&d| !(d >= 0.0) || !d.is_finite())
        {
            return Err(LawError::BadParam);
        }
        Ok(LossLaw {
            n: Some(n),
            lambda: Some(1.0 / params.ratio),
            omega_eigs: Some(params.omega_eigs),
            deltas: Some(params.deltas),
            ..empty_law(LossLawKind::General, k)
        })
    }

    /// Student training with `nu` degrees of freedom.
    pub fn student(n: usize, k: usize, nu: f64) -> Result<Self, LawError> {
        check_nk(n, k)?;
        if !(nu > 0.0) || !nu.is_finite() {
            return Err(LawError::BadParam);
        }
        Ok(LossLaw {
            n: Some(n),
            nu: Some(nu),
            ..empty_law(LossLawKind::Student, k)
        })
    }

    /// Rank-`R` partially adaptive filter, matched training; support `[0, a]`.
    pub fn pa_mvdr(k: usize, r: usize, a: f64) -> Result<Self, LawError> {
        check_kr(k, r)?;
        check_unit(a)?;
        Ok(LossLaw {
            r: Some(r),
            a: Some(a),
            ..empty_law(LossLawKind::PaMvdr, k)
        })
    }

    /// Rank-`R` partially adaptive filter, contaminated training.
    pub fn pa_mpdr(k: usize, r: usize, a: f64, snr_opt_over_gamma: f64) -> Result<Self, LawError> {
        check_kr(k, r)?;
        check_unit(a)?;
        if !(snr_opt_over_gamma >= 0.0) || !snr_opt_over_gamma.is_finite() {
            return Err(LawError::BadParam);
        }
        Ok(LossLaw {
            r: Some(r),
            a: Some(a),
            snr_opt_over_gamma: Some(snr_opt_over_gamma),
            ..empty_law(LossLawKind::PaMpdr, k)
        })
    }

    /// Eigencanceler at rank `R` (approximate law).
    pub fn ec_approx(k: usize, r: usize) -> Result<Self, LawError> {
        check_kr(k, r)?;
        Ok(LossLaw {
            r: Some(r),
            ..empty_law(LossLawKind::EcApprox, k)
        })
    }

    /// Partial Cholesky at rank `R`, scaled by a caller-estimated
    /// `a_prime` (approximate law).
    pub fn pchol_approx(k: usize, r: usize, a_prime: f64) -> Result<Self, LawError> {
        check_kr(k, r)?;
        check_unit(a_prime)?;
        Ok(LossLaw {
            r: Some(r),
            a_prime: Some(a_prime),
            ..empty_law(LossLawKind::PcholApprox, k)
        })
    }

    /// Heavy diagonal loading with interference rank `R` (approximate law).
    pub fn dl_approx(k: usize, r: usize) -> Result<Self, LawError> {
        check_kr(k, r)?;
        Ok(LossLaw {
            r: Some(r),
            ..empty_law(LossLawKind::DlApprox, k)
        })
    }

    /// True for kinds whose law is only an approximation.
    pub fn approximate(&self) -> bool {
        matches!(
            self.kind,
            LossLawKind::EcApprox | LossLawKind::PcholApprox | LossLawKind::DlApprox
        )
    }

    /// Upper endpoint of the support (`a`, `a_prime`, or 1).
    pub fn support_max(&self) -> f64 {
        match self.kind {
            LossLawKind::PaMvdr | LossLawKind::PaMpdr => self.a.unwrap_or(1.0),
            LossLawKind::PcholApprox => self.a_prime.unwrap_or(1.0),
            _ => 1.0,
        }
    }

    /// Closed-form mean where the law is (scaled) Beta.
    pub fn mean_closed_form(&self) -> Option<f64> {
        let k = self.k as f64;
        match self.kind {
            LossLawKind::Mvdr => {
                let n = self.n? as f64;
                Some((k - n + 2.0) / (k + 1.0))
            }
            LossLawKind::PaMvdr => {
                let r = self.r? as f64;
                Some(self.a? * (k - r + 1.0) / (k + 1.0))
            }
            LossLawKind::EcApprox | LossLawKind::DlApprox => {
                let r = self.r? as f64;
                Some((k - r + 1.0) / (k + 1.0))
            }
            LossLawKind::PcholApprox => {
                let r = self.r? as f64;
                Some(self.a_prime? * (k - r + 1.0) / (k + 1.0))
            }
            _ => None,
        }
    }

    /// Re-checks the constructor invariants, for deserialized values.
    pub fn validate(&self) -> Result<(), LawError> {
        let rebuilt = match self.kind {
            LossLawKind::Mvdr => Self::mvdr(self.n.ok_or(LawError::BadParam)?, self.k)?,
            LossLawKind::Mpdr => Self::mpdr(
                self.n.ok_or(LawError::BadParam)?,
                self.k,
                self.snr_opt_over_gamma.ok_or(LawError::BadParam)?,
            )?,
            LossLawKind::Ger => Self::ger(
                self.n.ok_or(LawError::BadParam)?,
                self.k,
                self.lambda.ok_or(LawError::BadParam)?,
                self.omega_eigs.clone().ok_or(LawError::BadParam)?,
            )?,
            LossLawKind::Undernulled => {
                let eigs = self.omega_eigs.as_deref().ok_or(LawError::BadParam)?;
                let q_form = eigs.first().ok_or(LawError::BadParam)? - 1.0;
                if eigs[1..].iter().any(|&l| l != 1.0) {
                    return Err(LawError::BadParam);
                }
                Self::undernulled(self.n.ok_or(LawError::BadParam)?, self.k, q_form)?
            }
            LossLawKind::General => Self::general(
                self.n.ok_or(LawError::BadParam)?,
                self.k,
                GeneralRepParams {
                    ratio: 1.0 / self.lambda.ok_or(LawError::BadParam)?,
                    omega_eigs: self.omega_eigs.clone().ok_or(LawError::BadParam)?,
                    deltas: self.deltas.clone().ok_or(LawError::BadParam)?,
                },
            )?,
            LossLawKind::Student => Self::student(
                self.n.ok_or(LawError::BadParam)?,
                self.k,
                self.nu.ok_or(LawError::BadParam)?,
            )?,
            LossLawKind::PaMvdr => Self::pa_mvdr(
                self.k,
                self.r.ok_or(LawError::BadParam)?,
                self.a.ok_or(LawError::BadParam)?,
            )?,
            LossLawKind::PaMpdr => Self::pa_mpdr(
                self.k,
                self.r.ok_or(LawError::BadParam)?,
                self.a.ok_or(LawError::BadParam)?,
                self.snr_opt_over_gamma.ok_or(LawError::BadParam)?,
            )?,
            LossLawKind::EcApprox => Self::ec_approx(self.k, self.r.ok_or(LawError::BadParam)?)?,
            LossLawKind::PcholApprox => Self::pchol_approx(
                self.k,
                self.r.ok_or(LawError::BadParam)?,
                self.a_prime.ok_or(LawError::BadParam)?,
            )?,
            LossLawKind::DlApprox => Self::dl_approx(self.k, self.r.ok_or(LawError::BadParam)?)?,
        };
        if rebuilt == *self {
            Ok(())
        } else {
            Err(LawError::BadParam)
        }
    }
}

// ── Sampling ────────────────────────────────────────────────────────────

/// One draw of the SNR loss under `law`, assembled from complex
/// chi-square blocks per the law's stochastic representation.
pub fn sample_rho(rng: &mut RngStream, law: &LossLaw) -> Result<f64, LawError> {
    let k = law.k;
    let rho = match law.kind {
        LossLawKind::Mvdr => {
            let n = law.n.ok_or(LawError::BadParam)?;
            let num = sample_cchisq(rng, n - 1, 0.0)?;
            let den = sample_cchisq(rng, k - n + 2, 0.0)?;
            1.0 / (1.0 + num / den)
        }
        LossLawKind::Mpdr => {
            let n = law.n.ok_or(LawError::BadParam)?;
            let s = law.snr_opt_over_gamma.ok_or(LawError::BadParam)?;
            let num = sample_cchisq(rng, n - 1, 0.0)?;
            let den = sample_cchisq(rng, k - n + 2, 0.0)?;
            1.0 / (1.0 + (1.0 + s) * num / den)
        }
        LossLawKind::Ger | LossLawKind::General => {
            let n = law.n.ok_or(LawError::BadParam)?;
            let lambda = law.lambda.ok_or(LawError::BadParam)?;
            let eigs = law.omega_eigs.as_deref().ok_or(LawError::BadParam)?;
            let zero = vec![0.0; n - 1];
            let deltas = law.deltas.as_deref().unwrap_or(&zero);
            if eigs.len() != n - 1 || deltas.len() != n - 1 {
                return Err(LawError::BadParam);
            }
            // V21 first; the chi-square noncentralities are conditioned
            // on it.
            let v21 = sample_cchisq(rng, k - n + 2, 0.0)?;
            let mut acc = 0.0;
            for (l, d) in eigs.iter().zip(deltas) {
                acc += l * sample_cchisq(rng, 1, v21 * d)?;
            }
            1.0 / (1.0 + acc / (lambda * v21))
        }
        LossLawKind::Undernulled => {
            let n = law.n.ok_or(LawError::BadParam)?;
            let eigs = law.omega_eigs.as_deref().ok_or(LawError::BadParam)?;
            let spike = eigs.first().copied().ok_or(LawError::BadParam)?;
            let bulk = if n > 2 {
                sample_cchisq(rng, n - 2, 0.0)?
            } else {
                0.0
            };
            let num = bulk + spike * sample_cchisq(rng, 1, 0.0)?;
            let den = sample_cchisq(rng, k - n + 2, 0.0)?;
            1.0 / (1.0 + num / den)
        }
        LossLawKind::Student => {
            let n = law.n.ok_or(LawError::BadParam)?;
            let nu = law.nu.ok_or(LawError::BadParam)?;
            let texture = sample_cchisq(rng, k - n + 1, 0.0)? / sample_gamma(rng, nu)?;
            let num = sample_cchisq(rng, n - 1, 0.0)?;
            let den = sample_cchisq(rng, k - n + 2, 0.0)?;
            1.0 / (1.0 + (1.0 + texture) * num / den)
        }
        LossLawKind::PaMvdr => {
            let r = law.r.ok_or(LawError::BadParam)?;
            let a = law.a.ok_or(LawError::BadParam)?;
            let num = sample_cchisq(rng, r, 0.0)?;
            let den = sample_cchisq(rng, k - r + 1, 0.0)?;
            a / (1.0 + num / den)
        }
        LossLawKind::PaMpdr => {
            let r = law.r.ok_or(LawError::BadParam)?;
            let a = law.a.ok_or(LawError::BadParam)?;
            let s = law.snr_opt_over_gamma.ok_or(LawError::BadParam)?;
            let c = a * s;
            let num = sample_cchisq(rng, r, 0.0)?;
            let den = sample_cchisq(rng, k - r + 1, 0.0)?;
            a / (1.0 + (1.0 + c) * num / den)
        }
        LossLawKind::EcApprox | LossLawKind::DlApprox => {
            let r = law.r.ok_or(LawError::BadParam)?;
            let num = sample_cchisq(rng, r, 0.0)?;
            let den = sample_cchisq(rng, k - r + 1, 0.0)?;
            1.0 / (1.0 + num / den)
        }
        LossLawKind::PcholApprox => {
            let r = law.r.ok_or(LawError::BadParam)?;
            let a_prime = law.a_prime.ok_or(LawError::BadParam)?;
            let num = sample_cchisq(rng, r, 0.0)?;
            let den = sample_cchisq(rng, k - r + 1, 0.0)?;
            a_prime / (1.0 + num / den)
        }
    };
    Ok(rho)
}

// ── Densities ───────────────────────────────────────────────────────────

fn mvdr_beta(n: usize, k: usize) -> Result<BetaParams, LawError> {
    // degree labels (K1, K2) = (N-1, K-N+2)
    Ok(BetaParams::new((k + 2 - n) as f64, (n - 1) as f64)?)
}

fn reduced_beta(k: usize, r: usize) -> Result<BetaParams, LawError> {
    Ok(BetaParams::new((k - r + 1) as f64, r as f64)?)
}

/// Contamination tilt shared by the mpdr and pa_mpdr densities:
/// `(1 + c)^alpha / (1 + u c)^(alpha + beta)` at `u` in [0, 1].
fn contamination_tilt(u: f64, c: f64, alpha: f64, beta: f64) -> f64 {
    libm::exp(alpha * libm::log1p(c) - (alpha + beta) * libm::log1p(u * c))
}

/// Closed-form density of the loss law at `rho`.
///
/// Errors with `NoClosedForm` for the `general`, `ger`, and `undernulled`
/// kinds, whose distribution this crate only reaches by sampling.
pub fn pdf_rho(rho: f64, law: &LossLaw) -> Result<f64, LawError> {
    let support = law.support_max();
    if !(0.0..=support).contains(&rho) {
        return Err(LawError::BadParam);
    }
    let k = law.k;
    match law.kind {
        LossLawKind::Mvdr => {
            let n = law.n.ok_or(LawError::BadParam)?;
            Ok(beta_pdf(rho, &mvdr_beta(n, k)?)?)
        }
        LossLawKind::Mpdr => {
            let n = law.n.ok_or(LawError::BadParam)?;
            let s = law.snr_opt_over_gamma.ok_or(LawError::BadParam)?;
            let p = mvdr_beta(n, k)?;
            let base = beta_pdf(rho, &p)?;
            Ok(base * contamination_tilt(rho, s, p.alpha, p.beta))
        }
        LossLawKind::Student => {
            let n = law.n.ok_or(LawError::BadParam)?;
            let nu = law.nu.ok_or(LawError::BadParam)?;
            let base = beta_pdf(rho, &mvdr_beta(n, k)?)?;
            // The Beta factor vanishes polynomially at 0 while the
            // hypergeometric part can diverge at most logarithmically, so
            // the product is 0 there; skip the series where it cannot
            // converge or cannot matter.
            if base < 1e-280 {
                return Ok(0.0);
            }
            let kn1 = (k + 1 - n) as f64;
            let prefactor = libm::exp(ln_beta(kn1, nu + (n - 1) as f64) - ln_beta(kn1, nu));
            let f = gauss_2f1((k + 1) as f64, kn1, nu + k as f64, 1.0 - rho)?;
            Ok(base * prefactor * f)
        }
        LossLawKind::PaMvdr => {
            let r = law.r.ok_or(LawError::BadParam)?;
            let a = law.a.ok_or(LawError::BadParam)?;
            Ok(beta_pdf(rho / a, &reduced_beta(k, r)?)? / a)
        }
        LossLawKind::PaMpdr => {
            let r = law.r.ok_or(LawError::BadParam)?;
            let a = law.a.ok_or(LawError::BadParam)?;
            let s = law.snr_opt_over_gamma.ok_or(LawError::BadParam)?;
            let p = reduced_beta(k, r)?;
            let base = beta_pdf(rho / a, &p)? / a;
            // c = a s: the tilt is driven by the contamination as seen
            // inside the reduced subspace.
            Ok(base * contamination_tilt(rho / a, a * s, p.alpha, p.beta))
        }
        LossLawKind::EcApprox | LossLawKind::DlApprox => {
            let r = law.r.ok_or(LawError::BadParam)?;
            Ok(beta_pdf(rho, &reduced_beta(k, r)?)?)
        }
        LossLawKind::PcholApprox => {
            let r = law.r.ok_or(LawError::BadParam)?;
            let a_prime = law.a_prime.ok_or(LawError::BadParam)?;
            Ok(beta_pdf(rho / a_prime, &reduced_beta(k, r)?)? / a_prime)
        }
        LossLawKind::General | LossLawKind::Ger | LossLawKind::Undernulled => {
            Err(LawError::NoClosedForm)
        }
    }
}

/// Distribution function of the loss law at `rho`.
///
/// Beta kinds (`mvdr`, `ec_approx`, `dl_approx`) evaluate the regularized
/// incomplete beta; the other closed-form kinds integrate their density by
/// adaptive quadrature to 1e-8. The `undernulled` kind, which has a
/// representation but no stated density, falls back to a deterministic
/// 10^6-draw empirical distribution; that answer is approximate, and the
/// cost of rebuilding it per call makes [`EmpiricalCdf`] the right tool
/// for anything but one-off evaluations.
pub fn cdf_rho(rho: f64, law: &LossLaw) -> Result<f64, LawError> {
    let support = law.support_max();
    if !(0.0..=support).contains(&rho) {
        return Err(LawError::BadParam);
    }
    let k = law.k;
    match law.kind {
        LossLawKind::Mvdr => {
            let n = law.n.ok_or(LawError::BadParam)?;
            Ok(beta_cdf(rho, &mvdr_beta(n, k)?)?)
        }
        LossLawKind::EcApprox | LossLawKind::DlApprox => {
            let r = law.r.ok_or(LawError::BadParam)?;
            Ok(beta_cdf(rho, &reduced_beta(k, r)?)?)
        }
        LossLawKind::Mpdr
        | LossLawKind::Student
        | LossLawKind::PaMvdr
        | LossLawKind::PaMpdr
        | LossLawKind::PcholApprox => {
            let total = adaptive_simpson(&|x| pdf_rho(x, law), 0.0, rho, 1e-8)?;
            Ok(total.clamp(0.0, 1.0))
        }
        LossLawKind::Undernulled => {
            let cache = EmpiricalCdf::build(law, EMPIRICAL_CDF_DRAWS, EMPIRICAL_CDF_SEED)?;
            Ok(cache.eval(rho))
        }
        LossLawKind::General | LossLawKind::Ger => Err(LawError::NoClosedForm),
    }
}

// ── Empirical cdf fallback ──────────────────────────────────────────────

/// Sorted-sample distribution function for representation-only law kinds.
/// Build once and share; evaluation is a binary search.
#[derive(Debug, Clone)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
    approximate: bool,
}

impl EmpiricalCdf {
    pub fn build(law: &LossLaw, draws: usize, seed: u64) -> Result<Self, LawError> {
        if draws == 0 {
            return Err(LawError::BadParam);
        }
        let mut rng = RngStream::new(seed, 0);
        let mut sorted = Vec::with_capacity(draws);
        for _ in 0..draws {
            sorted.push(sample_rho(&mut rng, law)?);
        }
        sorted.sort_unstable_by(f64::total_cmp);
        Ok(Self {
            sorted,
            approximate: true,
        })
    }

    /// Fraction of draws at or below `x`.
    pub fn eval(&self, x: f64) -> f64 {
        let below = self.sorted.partition_point(|&s| s <= x);
        below as f64 / self.sorted.len() as f64
    }

    /// Always true: an empirical distribution is an approximation.
    pub fn approximate(&self) -> bool {
        self.approximate
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }
}

// ── Partially adaptive energy fraction ──────────────────────────────────

/// Fraction of the optimal SNR reachable inside the range of `T`:
///
/// ```text
/// a = (v^H T (T^H Sigma T)^{-1} T^H v) / (v^H Sigma^{-1} v)
/// ```
///
/// in `(0, 1]`, equal to 1 exactly when `Sigma^{-1} v` lies in the range
/// of `T`.
pub fn coef_a(t: &Transform, sigma: &HermitianMatrix, v: &[Complex64]) -> Result<f64, LawError> {
    let matrix = t.matrix();
    if matrix.rows() != v.len() || sigma.dim() != v.len() {
        return Err(LawError::BadParam);
    }
    let reduced = sigma.congruence(matrix);
    let tv = matrix.adjoint_mul_vec(v);
    let x = solve_hermitian(&reduced, &tv)?;
    let num = dot(&tv, &x).re;
    let den = snr_opt(sigma, v, 1.0)?;
    if !(den > 0.0) {
        return Err(LawError::Singular);
    }
    // The reduced quadratic form can exceed the full one only through
    // roundoff.
    Ok((num / den).min(1.0))
}

// ── Quadrature ──────────────────────────────────────────────────────────

const SIMPSON_MAX_DEPTH: u32 = 48;

/// Adaptive Simpson integration with absolute tolerance `tol`.
fn adaptive_simpson<F>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64, LawError>
where
    F: Fn(f64) -> Result<f64, LawError>,
{
    if a == b {
        return Ok(0.0);
    }
    let m = 0.5 * (a + b);
    let fa = f(a)?;
    let fm = f(m)?;
    let fb = f(b)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, fa, b, fb, m, fm, whole, tol, SIMPSON_MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F>(
    f: &F,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    m: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64, LawError>
where
    F: Fn(f64) -> Result<f64, LawError>,
{
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(LawError::NoConvergence);
    }
    let half = 0.5 * tol;
    Ok(
        simpson_step(f, a, fa, m, fm, lm, flm, left, half, depth - 1)?
            + simpson_step(f, m, fm, b, fb, rm, frm, right, half, depth - 1)?,
    )
}

// ── tests ───────────────────────────────────────────────────────────────
