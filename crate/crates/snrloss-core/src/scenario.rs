//! Covariance-mismatch scenario builders.
//!
//! A scenario is the triple `(Sigma, C_t, v)`: the true interference-plus-
//! noise covariance the filter is judged against, the covariance the
//! training snapshots are actually drawn from, and the signal-of-interest
//! signature. The builders cover every mismatch regime with a known loss
//! law:
//!
//! ```text
//! mvdr              C_t = Sigma            (matched, signal-free)
//! homog             C_t = gamma Sigma      (partially homogeneous)
//! mpdr              C_t = gamma Sigma + P v v^H   (signal-contaminated)
//! ger               C_t^{-1} v = lambda Sigma^{-1} v  (generalized
//!                   eigenvalue relation, lambda = 1 by construction)
//! surprise          Sigma = C_t + q q^H with q^H C_t^{-1} v = 0
//!                   (undernulled interferer)
//! wishart_mismatch  C_t = Sigma^{1/2} W^{-1} Sigma^{H/2}, W Wishart
//! student           training matrix-Student distributed, scale mu Sigma
//! ```
//!
//! The array model is a half-wavelength uniform linear array; interferers
//! are specified by angle and per-element power in dB over the unit white
//! noise floor. [`draw_training_set`] turns any scenario into `N x K`
//! training matrices; [`TrainingSampler`] is the same thing with the
//! covariance roots precomputed for hot Monte Carlo loops.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dist::{
    pd_inv_sqrt, sample_iid_cgauss, sample_wishart, sample_wishart_bartlett, DistError, RngStream,
};
use crate::filters::Weight;
use crate::hermitian::{
    dot, eigh, hermitian_sqrt, solve_hermitian, solve_hermitian_mat, vec_norm, ComplexMatrix,
    HermitianError, HermitianMatrix,
};

// ── Errors ──────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScenarioError {
    /// Angle outside the open interval (-90, 90) degrees.
    BadAngle,
    /// Parameter outside its domain.
    BadParam,
    /// Surprise interferer vanished under the oblique projection.
    DegenerateQ,
    /// Wishart mismatch with fewer degrees of freedom than the dimension.
    InsufficientDoF,
    /// A covariance that must be positive definite is not.
    NotPD,
    /// Sampling failure.
    Dist(DistError),
    /// Linear-algebra failure.
    Linalg(HermitianError),
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::BadAngle => write!(f, "angle must lie strictly inside (-90, 90) degrees"),
            Self::BadParam => write!(f, "parameter out of domain"),
            Self::DegenerateQ => write!(f, "projected interferer is numerically zero"),
            Self::InsufficientDoF => write!(f, "degrees of freedom below dimension"),
            Self::NotPD => write!(f, "covariance is not positive definite"),
            Self::Dist(e) => write!(f, "sampling failure: {e}"),
            Self::Linalg(e) => write!(f, "linear algebra failure: {e}"),
        }
    }
}

impl core::error::Error for ScenarioError {}

impl From<DistError> for ScenarioError {
    fn from(e: DistError) -> Self {
        match e {
            DistError::NotPD => Self::NotPD,
            DistError::InsufficientDoF => Self::InsufficientDoF,
            other => Self::Dist(other),
        }
    }
}

impl From<HermitianError> for ScenarioError {
    fn from(e: HermitianError) -> Self {
        Self::Linalg(e)
    }
}

// ── Types ───────────────────────────────────────────────────────────────

/// One interferer: broadside-referenced angle and per-element power in dB
/// over the unit noise floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interferer {
    pub angle_deg: f64,
    pub power_db: f64,
}

/// Mismatch regime tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Mvdr,
    Homog,
    Mpdr,
    Ger,
    Surprise,
    WishartMismatch,
    Student,
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Mvdr => "mvdr",
            Self::Homog => "homog",
            Self::Mpdr => "mpdr",
            Self::Ger => "ger",
            Self::Surprise => "surprise",
            Self::WishartMismatch => "wishart_mismatch",
            Self::Student => "student",
        };
        write!(f, "{s}")
    }
}

/// Kind-specific parameters; only the fields relevant to the kind are set.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScenarioExtras {
    /// GER proportionality constant.
    pub lambda: Option<f64>,
    /// Eigenvalues of the trailing block of the whitened-rotated covariance.
    pub omega_eigs: Option<Vec<f64>>,
    /// Undernulled interferer signature.
    pub q: Option<Vec<Complex64>>,
    /// `q^H C_t^{-1} q` of the undernulled interferer.
    pub q_form: Option<f64>,
    /// Wishart-mismatch mean scale.
    pub eta: Option<f64>,
    /// Student degrees of freedom.
    pub nu: Option<f64>,
    /// Student row-covariance scale.
    pub mu_scale: Option<f64>,
}

/// A complete mismatch scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub sigma: HermitianMatrix,
    pub ct: HermitianMatrix,
    pub v: Weight,
    pub soi_power: f64,
    pub gamma: f64,
    pub kind: ScenarioKind,
    pub extras: ScenarioExtras,
}

impl Scenario {
    pub fn dim(&self) -> usize {
        self.v.dim()
    }

    /// `v^H Sigma^{-1} v`, the optimal-SNR quadratic form at unit power.
    pub fn opt_quad(&self) -> Result<f64, ScenarioError> {
        let x = solve_hermitian(&self.sigma, self.v.entries())?;
        Ok(dot(self.v.entries(), &x).re)
    }

    /// Re-checks structural invariants; intended for deserialized input.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let n = self.v.dim();
        if self.sigma.dim() != n || self.ct.dim() != n {
            return Err(ScenarioError::BadParam);
        }
        if !(self.gamma > 0.0) || !(self.soi_power >= 0.0) {
            return Err(ScenarioError::BadParam);
        }
        for m in [&self.sigma, &self.ct] {
            let dec = eigh(m)?;
            if dec.values[n - 1] <= 0.0 {
                return Err(ScenarioError::NotPD);
            }
        }
        match self.kind {
            ScenarioKind::Surprise => {
                let q = self.extras.q.as_deref().ok_or(ScenarioError::BadParam)?;
                let ct_inv_v = solve_hermitian(&self.ct, self.v.entries())?;
                let ortho = dot(q, &ct_inv_v).norm();
                if ortho > 1e-9 * vec_norm(q) * vec_norm(&ct_inv_v) {
                    return Err(ScenarioError::BadParam);
                }
            }
            ScenarioKind::Ger => {
                let a = solve_hermitian(&self.ct, self.v.entries())?;
                let b = solve_hermitian(&self.sigma, self.v.entries())?;
                let cosine = dot(&a, &b).norm() / (vec_norm(&a) * vec_norm(&b));
                if (cosine - 1.0).abs() > 1e-9 {
                    return Err(ScenarioError::BadParam);
                }
            }
            ScenarioKind::Student => {
                let nu = self.extras.nu.ok_or(ScenarioError::BadParam)?;
                if !(nu > n as f64) {
                    return Err(ScenarioError::BadParam);
                }
            }
            _ => {}
        }
        Ok(())
    }
}

// ── Array geometry ──────────────────────────────────────────────────────

/// Half-wavelength ULA steering vector `v_n = exp(j pi n sin theta)`.
pub fn ula_steering(n: usize, angle_deg: f64) -> Result<Weight, ScenarioError> {
    if !(angle_deg > -90.0 && angle_deg < 90.0) || n == 0 {
        return Err(ScenarioError::BadAngle);
    }
    let s = libm::sin(angle_deg * core::f64::consts::PI / 180.0);
    let entries = (0..n)
        .map(|i| {
            let phase = core::f64::consts::PI * i as f64 * s;
            Complex64::new(libm::cos(phase), libm::sin(phase))
        })
        .collect();
    Ok(Weight::from_vec_unchecked(entries))
}

/// Interference-plus-noise covariance `Sigma = G G^H + gamma I` and the
/// interferer signature matrix `G` (column `r` is interferer `r` at
/// amplitude `10^(dB/20)` per element).
///
/// The rank-one accumulation runs in a canonical interferer order, so the
/// result is entrywise identical under permutations of the input list.
pub fn build_sigma(
    n: usize,
    interferers: &[Interferer],
    gamma: f64,
) -> Result<(HermitianMatrix, ComplexMatrix), ScenarioError> {
    if n == 0 || !(gamma > 0.0) {
        return Err(ScenarioError::BadParam);
    }
    let r = interferers.len();
    let mut g = ComplexMatrix::zeros(n, r);
    for (j, intf) in interferers.iter().enumerate() {
        let steer = ula_steering(n, intf.angle_deg)?;
        let amp = libm::pow(10.0, intf.power_db / 20.0);
        for i in 0..n {
            g.entries_mut()[i * r + j] = amp * steer[i];
        }
    }
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| {
        let ia = &interferers[a];
        let ib = &interferers[b];
        ia.angle_deg
            .total_cmp(&ib.angle_deg)
            .then(ia.power_db.total_cmp(&ib.power_db))
    });
    let mut entries = vec![Complex64::ZERO; n * n];
    for i in 0..n {
        entries[i * n + i] = Complex64::new(gamma, 0.0);
    }
    for &j in &order {
        for i in 0..n {
            let gi = g[(i, j)];
            for l in 0..n {
                entries[i * n + l] += gi * g[(l, j)].conj();
            }
        }
    }
    Ok((HermitianMatrix::symmetrized(n, entries, true), g))
}

// ── Scenario constructors ───────────────────────────────────────────────

fn check_pair(sigma: &HermitianMatrix, v: &Weight) -> Result<(), ScenarioError> {
    if sigma.dim() != v.dim() || v.dim() < 2 {
        return Err(ScenarioError::BadParam);
    }
    let dec = eigh(sigma)?;
    if dec.values[sigma.dim() - 1] <= 0.0 {
        return Err(ScenarioError::NotPD);
    }
    Ok(())
}

/// Matched training: `C_t = Sigma`.
pub fn make_mvdr(sigma: HermitianMatrix, v: Weight) -> Result<Scenario, ScenarioError> {
    check_pair(&sigma, &v)?;
    Ok(Scenario {
        ct: sigma.clone(),
        sigma,
        v,
        soi_power: 0.0,
        gamma: 1.0,
        kind: ScenarioKind::Mvdr,
        extras: ScenarioExtras::default(),
    })
}

/// Partially homogeneous training: `C_t = gamma Sigma`.
pub fn make_homog(
    sigma: HermitianMatrix,
    v: Weight,
    gamma: f64,
) -> Result<Scenario, ScenarioError> {
    check_pair(&sigma, &v)?;
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(ScenarioError::BadParam);
    }
    Ok(Scenario {
        ct: sigma.scale(gamma),
        sigma,
        v,
        soi_power: 0.0,
        gamma,
        kind: ScenarioKind::Homog,
        extras: ScenarioExtras::default(),
    })
}

/// Signal-contaminated training: `C_t = gamma Sigma + P v v^H`.
pub fn make_mpdr(
    sigma: HermitianMatrix,
    v: Weight,
    soi_power: f64,
    gamma: f64,
) -> Result<Scenario, ScenarioError> {
    check_pair(&sigma, &v)?;
    if !(gamma > 0.0) || !(soi_power >= 0.0) || !soi_power.is_finite() {
        return Err(ScenarioError::BadParam);
    }
    let ct = sigma
        .scale(gamma)
        .add_scaled(soi_power, &HermitianMatrix::outer(v.entries()));
    Ok(Scenario {
        sigma,
        ct,
        v,
        soi_power,
        gamma,
        kind: ScenarioKind::Mpdr,
        extras: ScenarioExtras::default(),
    })
}

/// Undernulled interferer: `Sigma = C_t + q q^H` where `q` comes from a
/// steering vector at `q_angle_deg`, obliquely projected so that
/// `q^H C_t^{-1} v = 0` exactly, then rescaled to per-element power
/// `q_power_db` (same convention as [`build_sigma`]).
pub fn make_surprise(
    ct: HermitianMatrix,
    v: Weight,
    q_angle_deg: f64,
    q_power_db: f64,
) -> Result<Scenario, ScenarioError> {
    check_pair(&ct, &v)?;
    let n = v.dim();
    let raw = ula_steering(n, q_angle_deg)?;
    let ct_inv_v = solve_hermitian(&ct, v.entries())?;
    let v_quad = dot(v.entries(), &ct_inv_v).re;
    // q = q' - (v^H ct^{-1} q' / v^H ct^{-1} v) v makes q^H ct^{-1} v = 0:
    // the coefficient subtracts exactly the component seen through ct^{-1}.
    let coef = dot(&ct_inv_v, raw.entries()) / v_quad;
    let mut q: Vec<Complex64> = raw
        .entries()
        .iter()
        .zip(v.entries())
        .map(|(qe, ve)| qe - coef * ve)
        .collect();
    let norm = vec_norm(&q);
    if norm < 1e-10 {
        return Err(ScenarioError::DegenerateQ);
    }
    let target = libm::sqrt(n as f64) * libm::pow(10.0, q_power_db / 20.0);
    let scale = target / norm;
    for z in &mut q {
        *z *= scale;
    }
    let sigma = ct.add_scaled(1.0, &HermitianMatrix::outer(&q));
    let q_inv = solve_hermitian(&ct, &q)?;
    let q_form = dot(&q, &q_inv).re;
    Ok(Scenario {
        sigma,
        ct,
        v,
        soi_power: 0.0,
        gamma: 1.0,
        kind: ScenarioKind::Surprise,
        extras: ScenarioExtras {
            q: Some(q),
            q_form: Some(q_form),
            ..ScenarioExtras::default()
        },
    })
}

/// Generalized eigenvalue relation: `C_t = Sigma + B B^H` with a random
/// `B` projected so `B^H Sigma^{-1} v = 0`, hence
/// `C_t Sigma^{-1} v = v` and the relation holds with `lambda = 1`.
pub fn make_ger(
    sigma: HermitianMatrix,
    v: Weight,
    rng: &mut RngStream,
    strength: f64,
) -> Result<Scenario, ScenarioError> {
    check_pair(&sigma, &v)?;
    if !(strength >= 0.0) || !strength.is_finite() {
        return Err(ScenarioError::BadParam);
    }
    let n = v.dim();
    let sigma_inv_v = solve_hermitian(&sigma, v.entries())?;
    let s_quad: f64 = sigma_inv_v.iter().map(|z| z.norm_sqr()).sum();
    let mut b = sample_iid_cgauss(rng, n, n.saturating_sub(2).max(1));
    // Project columns onto the Euclidean complement of Sigma^{-1} v.
    let overlaps = b.adjoint_mul_vec(&sigma_inv_v);
    let cols = b.cols();
    for j in 0..cols {
        let coef = overlaps[j].conj() / s_quad;
        for i in 0..n {
            let upd = coef * sigma_inv_v[i];
            b.entries_mut()[i * cols + j] -= upd;
        }
    }
    let b = b.scale(Complex64::new(strength, 0.0));
    let ct = sigma.add_scaled(1.0, &crate::dist::gram(&b));
    let rep = crate::law::derive_general_params(&sigma, &ct, v.entries())
        .map_err(|_| ScenarioError::BadParam)?;
    Ok(Scenario {
        sigma,
        ct,
        v,
        soi_power: 0.0,
        gamma: 1.0,
        kind: ScenarioKind::Ger,
        extras: ScenarioExtras {
            lambda: Some(1.0),
            omega_eigs: Some(rep.omega_eigs),
            ..ScenarioExtras::default()
        },
    })
}

/// Random training-covariance mismatch:
/// `C_t = Sigma^{1/2} W^{-1} Sigma^{H/2}` with `W ~ CW_N(dof, (eta/dof) I)`
/// so that `E[W] = eta I`; `10 log10(eta)` is drawn uniformly on
/// `eta_db_range`.
pub fn make_wishart_mismatch(
    sigma: HermitianMatrix,
    v: Weight,
    rng: &mut RngStream,
    eta_db_range: (f64, f64),
    dof: usize,
) -> Result<Scenario, ScenarioError> {
    check_pair(&sigma, &v)?;
    let n = v.dim();
    if dof < n {
        return Err(ScenarioError::InsufficientDoF);
    }
    let (lo, hi) = eta_db_range;
    if !(lo <= hi) {
        return Err(ScenarioError::BadParam);
    }
    let u: f64 = rand::Rng::gen::<f64>(rng);
    let eta_db = lo + (hi - lo) * u;
    let eta = libm::pow(10.0, eta_db / 10.0);
    let scale = HermitianMatrix::identity(n).scale(eta / dof as f64);
    let w = sample_wishart(rng, n, dof, &scale)?;
    let root = hermitian_sqrt(&sigma)?;
    let w_inv_root = solve_hermitian_mat(&w, &root)?;
    let ct_full = root.mul(&w_inv_root);
    let ct = HermitianMatrix::symmetrized(n, ct_full.entries().to_vec(), true);
    Ok(Scenario {
        sigma,
        ct,
        v,
        soi_power: 0.0,
        gamma: 1.0,
        kind: ScenarioKind::WishartMismatch,
        extras: ScenarioExtras {
            eta: Some(eta),
            ..ScenarioExtras::default()
        },
    })
}

/// Student-distributed training with row covariance `mu Sigma`; the
/// default `mu = nu - N` makes the training second moment match the
/// Gaussian case, `E[X_t X_t^H] = K Sigma`.
pub fn make_student(
    sigma: HermitianMatrix,
    v: Weight,
    nu: f64,
    mu_scale: Option<f64>,
) -> Result<Scenario, ScenarioError> {
    check_pair(&sigma, &v)?;
    let n = v.dim() as f64;
    if !(nu > n) || !nu.is_finite() {
        return Err(ScenarioError::BadParam);
    }
    let mu = mu_scale.unwrap_or(nu - n);
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(ScenarioError::BadParam);
    }
    Ok(Scenario {
        ct: sigma.clone(),
        sigma,
        v,
        soi_power: 0.0,
        gamma: 1.0,
        kind: ScenarioKind::Student,
        extras: ScenarioExtras {
            nu: Some(nu),
            mu_scale: Some(mu),
            ..ScenarioExtras::default()
        },
    })
}

// ── Training-set generation ─────────────────────────────────────────────

/// Training-set sampler with precomputed covariance roots, for hot loops.
#[derive(Debug, Clone)]
pub struct TrainingSampler {
    n: usize,
    root: ComplexMatrix,
    student_nu: Option<f64>,
}

impl TrainingSampler {
    pub fn new(scenario: &Scenario) -> Result<Self, ScenarioError> {
        let n = scenario.dim();
        match scenario.kind {
            ScenarioKind::Student => {
                let nu = scenario.extras.nu.ok_or(ScenarioError::BadParam)?;
                let mu = scenario.extras.mu_scale.ok_or(ScenarioError::BadParam)?;
                let root = hermitian_sqrt(&scenario.sigma.scale(mu))?;
                Ok(Self {
                    n,
                    root,
                    student_nu: Some(nu),
                })
            }
            _ => {
                let root = hermitian_sqrt(&scenario.ct)?;
                Ok(Self {
                    n,
                    root,
                    student_nu: None,
                })
            }
        }
    }

    /// One `N x K` training matrix.
    pub fn draw(&self, rng: &mut RngStream, k: usize) -> Result<ComplexMatrix, ScenarioError> {
        if k == 0 {
            return Err(ScenarioError::BadParam);
        }
        let z = sample_iid_cgauss(rng, self.n, k);
        match self.student_nu {
            None => Ok(self.root.mul(&z)),
            Some(nu) => {
                // X = (mu Sigma)^{1/2} W^{-1/2} Z with W ~ CW_N(nu, I).
                let eye = HermitianMatrix::identity(self.n);
                let w = sample_wishart_bartlett(rng, self.n, nu, &eye)?;
                let w_inv_root = pd_inv_sqrt(&w)?;
                Ok(self.root.mul(&w_inv_root).mul(&z))
            }
        }
    }
}

/// Draws one `N x K` training matrix for the scenario: Gaussian with
/// covariance `C_t` for Gaussian kinds, the Wishart-mixture Student for
/// `student` scenarios.
pub fn draw_training_set(
    rng: &mut RngStream,
    scenario: &Scenario,
    k: usize,
) -> Result<ComplexMatrix, ScenarioError> {
    TrainingSampler::new(scenario)?.draw(rng, k)
}

// ── tests ───────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::gram;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn paper_interferers() -> [Interferer; 3] {
        [
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
        ]
    }

    #[test]
    fn steering_broadside_is_ones() {
        let v = ula_steering(5, 0.0).unwrap();
        for e in v.entries() {
            assert!((e - Complex64::ONE).norm() < 1e-15);
        }
    }

    #[test]
    fn steering_thirty_degrees_hand_value() {
        // sin 30 deg = 1/2, so the second element is exp(j pi/2) = j.
        let v = ula_steering(2, 30.0).unwrap();
        assert!((v[0] - Complex64::ONE).norm() < 1e-15);
        assert!((v[1] - c(0.0, 1.0)).norm() < 1e-12, "{:?}", v[1]);
    }

    #[test]
    fn steering_norm_is_dimension() {
        for angle in [-75.0, -12.0, 0.3, 44.0] {
            let v = ula_steering(16, angle).unwrap();
            let n2: f64 = v.entries().iter().map(|z| z.norm_sqr()).sum();
            assert!((n2 - 16.0).abs() < 1e-12);
        }
        assert_eq!(ula_steering(4, 90.0).unwrap_err(), ScenarioError::BadAngle);
    }

    #[test]
    fn sigma_without_interferers_is_identity() {
        let (sigma, g) = build_sigma(4, &[], 1.0).unwrap();
        assert_eq!(g.cols(), 0);
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((sigma[(i, j)] - c(want, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn sigma_paper_scenario_spectrum() {
        let (sigma, g) = build_sigma(16, &paper_interferers(), 1.0).unwrap();
        assert_eq!(g.cols(), 3);
        let dec = eigh(&sigma).unwrap();
        // three interference eigenvalues, then the noise floor at gamma
        assert!(dec.values[2] > 1e3, "third eigenvalue {}", dec.values[2]);
        for &l in &dec.values[3..] {
            assert!((l - 1.0).abs() < 1e-9, "noise eigenvalue {l}");
        }
    }

    #[test]
    fn sigma_single_interferer_rank_one_norm() {
        let one = [Interferer {
            angle_deg: 14.0,
            power_db: 12.0,
        }];
        let (sigma, _) = build_sigma(8, &one, 1.0).unwrap();
        let dec = eigh(&sigma).unwrap();
        let want = 8.0 * libm::pow(10.0, 1.2) + 1.0;
        assert!(
            ((dec.values[0] - want) / want).abs() < 1e-12,
            "lambda_max {} vs {want}",
            dec.values[0]
        );
    }

    #[test]
    fn sigma_permutation_invariant() {
        let fwd = paper_interferers();
        let mut rev = fwd;
        rev.reverse();
        let (a, _) = build_sigma(16, &fwd, 1.0).unwrap();
        let (b, _) = build_sigma(16, &rev, 1.0).unwrap();
        assert_eq!(
            a.entries(),
            b.entries(),
            "entrywise equality under permutation"
        );
    }

    #[test]
    fn mvdr_ct_is_sigma() {
        let (sigma, _) = build_sigma(8, &paper_interferers()[..1], 1.0).unwrap();
        let v = ula_steering(8, 0.0).unwrap();
        let sc = make_mvdr(sigma.clone(), v).unwrap();
        assert_eq!(sc.ct.entries(), sigma.entries());
        sc.validate().unwrap();
    }

    #[test]
    fn mpdr_zero_power_is_homog() {
        let (sigma, _) = build_sigma(8, &paper_interferers()[..1], 1.0).unwrap();
        let v = ula_steering(8, 0.0).unwrap();
        let a = make_mpdr(sigma.clone(), v.clone(), 0.0, 1.7).unwrap();
        let b = make_homog(sigma, v, 1.7).unwrap();
        assert_eq!(a.ct.entries(), b.ct.entries());
    }

    #[test]
    fn mpdr_sherman_morrison_identity() {
        // v^H ct^{-1} v = (v^H (gamma sigma)^{-1} v) / (1 + P/gamma * v^H sigma^{-1} v)
        let (sigma, _) = build_sigma(16, &paper_interferers(), 1.0).unwrap();
        let v = ula_steering(16, 0.0).unwrap();
        let p = 2.5;
        let gamma = 1.3;
        let sc = make_mpdr(sigma.clone(), v.clone(), p, gamma).unwrap();
        let ct_inv_v = solve_hermitian(&sc.ct, v.entries()).unwrap();
        let got = dot(v.entries(), &ct_inv_v).re;
        let s_inv_v = solve_hermitian(&sigma, v.entries()).unwrap();
        let q = dot(v.entries(), &s_inv_v).re;
        let want = (q / gamma) / (1.0 + p / gamma * q);
        assert!(
            ((got - want) / want).abs() < 1e-9,
            "quadratic form {got} vs {want}"
        );
    }

    #[test]
    fn surprise_oblique_orthogonality() {
        let (ct, _) = build_sigma(16, &paper_interferers(), 1.0).unwrap();
        let v = ula_steering(16, 0.0).unwrap();
        let sc = make_surprise(ct, v.clone(), 17.0, 10.0).unwrap();
        let q = sc.extras.q.as_deref().unwrap();
        let ct_inv_v = solve_hermitian(&sc.ct, v.entries()).unwrap();
        let ortho = dot(q, &ct_inv_v).norm();
        assert!(
            ortho < 1e-10 * vec_norm(q) * vec_norm(&ct_inv_v),
            "oblique orthogonality violated: {ortho}"
        );
        // per-element power convention
        let n2: f64 = q.iter().map(|z| z.norm_sqr()).sum();
        assert!(((n2 - 160.0) / 160.0).abs() < 1e-12, "q norm^2 {n2}");
        sc.validate().unwrap();
        // sigma^{-1} v stays parallel to ct^{-1} v (GER with lambda = 1)
        let s_inv_v = solve_hermitian(&sc.sigma, v.entries()).unwrap();
        let cosine = dot(&s_inv_v, &ct_inv_v).norm() / (vec_norm(&s_inv_v) * vec_norm(&ct_inv_v));
        assert!((cosine - 1.0).abs() < 1e-10, "cosine {cosine}");
    }

    #[test]
    fn surprise_vanishing_power_recovers_matched() {
        let (ct, _) = build_sigma(8, &paper_interferers()[..1], 1.0).unwrap();
        let v = ula_steering(8, 0.0).unwrap();
        let sc = make_surprise(ct.clone(), v, 20.0, -200.0).unwrap();
        let mut gap = 0.0_f64;
        for (a, b) in sc.sigma.entries().iter().zip(ct.entries()) {
            gap = gap.max((a - b).norm());
        }
        assert!(gap < 1e-12, "sigma should collapse to ct, gap {gap}");
    }

    #[test]
    fn ger_construction_properties() {
        let (sigma, _) = build_sigma(8, &paper_interferers()[..2], 1.0).unwrap();
        let v = ula_steering(8, 0.0).unwrap();
        let mut rng = RngStream::new(31, 0);
        let sc = make_ger(sigma.clone(), v.clone(), &mut rng, 2.0).unwrap();
        sc.validate().unwrap();
        // mismatch is real
        let mut dist = 0.0_f64;
        for (a, b) in sc.ct.entries().iter().zip(sigma.entries()) {
            dist += (a - b).norm_sqr();
        }
        assert!(libm::sqrt(dist) > 1.0, "ct must differ from sigma");
        assert_eq!(sc.extras.lambda, Some(1.0));
        let eigs = sc.extras.omega_eigs.as_deref().unwrap();
        assert_eq!(eigs.len(), 7);
        assert!(eigs.iter().all(|&l| l > 0.0));
        // strength 0 collapses to the matched case
        let sc0 = make_ger(sigma.clone(), v, &mut rng, 0.0).unwrap();
        for (a, b) in sc0.ct.entries().iter().zip(sigma.entries()) {
            assert!((a - b).norm() < 1e-12);
        }
        let eigs0 = sc0.extras.omega_eigs.as_deref().unwrap();
        assert!(eigs0.iter().all(|&l| (l - 1.0).abs() < 1e-9));
    }

    #[test]
    fn wishart_mismatch_concentrates_at_high_dof() {
        let (sigma, _) = build_sigma(4, &paper_interferers()[..1], 1.0).unwrap();
        let v = ula_steering(4, 0.0).unwrap();
        let mut rng = RngStream::new(32, 0);
        let sc = make_wishart_mismatch(sigma.clone(), v, &mut rng, (0.0, 0.0), 40_000).unwrap();
        let mut num = 0.0;
        let mut den = 0.0;
        for (a, b) in sc.ct.entries().iter().zip(sigma.entries()) {
            num += (a - b).norm_sqr();
            den += b.norm_sqr();
        }
        let rel = libm::sqrt(num / den);
        assert!(rel < 0.1, "relative Frobenius gap {rel}");
        assert_eq!(sc.extras.eta, Some(1.0));
    }

    #[test]
    fn wishart_mismatch_eta_scaling() {
        let (sigma, _) = build_sigma(4, &[], 1.0).unwrap();
        let v = ula_steering(4, 0.0).unwrap();
        let mut rng = RngStream::new(33, 0);
        let m = 2000;
        let dof = 12;
        let mut tr1 = 0.0;
        let mut tr2 = 0.0;
        for _ in 0..m {
            let a =
                make_wishart_mismatch(sigma.clone(), v.clone(), &mut rng, (0.0, 0.0), dof).unwrap();
            let b = make_wishart_mismatch(
                sigma.clone(),
                v.clone(),
                &mut rng,
                (10.0 * libm::log10(2.0), 10.0 * libm::log10(2.0)),
                dof,
            )
            .unwrap();
            tr1 += a.ct.trace();
            tr2 += b.ct.trace();
        }
        let ratio = tr1 / tr2;
        assert!((ratio - 2.0).abs() < 0.1, "trace ratio {ratio}");
    }

    #[test]
    fn wishart_mismatch_insufficient_dof() {
        let (sigma, _) = build_sigma(4, &[], 1.0).unwrap();
        let v = ula_steering(4, 0.0).unwrap();
        let mut rng = RngStream::new(34, 0);
        assert_eq!(
            make_wishart_mismatch(sigma, v, &mut rng, (-6.0, 6.0), 3).unwrap_err(),
            ScenarioError::InsufficientDoF
        );
    }

    #[test]
    fn student_defaults_and_validation() {
        let (sigma, _) = build_sigma(16, &paper_interferers(), 1.0).unwrap();
        let v = ula_steering(16, 0.0).unwrap();
        let sc = make_student(sigma.clone(), v.clone(), 32.0, None).unwrap();
        assert_eq!(sc.extras.mu_scale, Some(16.0));
        sc.validate().unwrap();
        assert_eq!(
            make_student(sigma, v, 16.0, None).unwrap_err(),
            ScenarioError::BadParam
        );
    }

    #[test]
    fn student_training_is_covariance_matched() {
        let (sigma, _) = build_sigma(4, &paper_interferers()[..1], 1.0).unwrap();
        let v = ula_steering(4, 0.0).unwrap();
        let sc = make_student(sigma.clone(), v, 12.0, None).unwrap();
        let sampler = TrainingSampler::new(&sc).unwrap();
        let mut rng = RngStream::new(35, 0);
        let k = 32;
        let sets = 1000;
        let mut acc = vec![Complex64::ZERO; 16];
        for _ in 0..sets {
            let x = sampler.draw(&mut rng, k).unwrap();
            let s = gram(&x);
            for (a, e) in acc.iter_mut().zip(s.entries()) {
                *a += e;
            }
        }
        let mut num = 0.0;
        let mut den = 0.0;
        for (a, want) in acc.iter().zip(sigma.entries()) {
            let got = a / (sets as f64 * k as f64);
            num += (got - want).norm_sqr();
            den += want.norm_sqr();
        }
        let rel = libm::sqrt(num / den);
        assert!(rel < 0.05, "training second moment off by {rel}");
    }

    #[test]
    fn gaussian_training_covariance_matches_ct() {
        let (sigma, _) = build_sigma(4, &paper_interferers()[..1], 1.0).unwrap();
        let v = ula_steering(4, 0.0).unwrap();
        let sc = make_homog(sigma, v, 2.0).unwrap();
        let mut rng = RngStream::new(36, 0);
        let draws = 5000;
        let k = 8;
        let mut acc = vec![Complex64::ZERO; 16];
        for _ in 0..draws {
            let x = draw_training_set(&mut rng, &sc, k).unwrap();
            let s = gram(&x);
            for (a, e) in acc.iter_mut().zip(s.entries()) {
                *a += e;
            }
        }
        let mut num = 0.0;
        let mut den = 0.0;
        for (a, want) in acc.iter().zip(sc.ct.entries()) {
            let got = a / (draws as f64 * k as f64);
            num += (got - want).norm_sqr();
            den += want.norm_sqr();
        }
        assert!(libm::sqrt(num / den) < 0.05);
    }

    #[test]
    fn mpdr_training_dominated_by_signal() {
        let (sigma, _) = build_sigma(8, &[], 1.0).unwrap();
        let v = ula_steering(8, 0.0).unwrap();
        let sc = make_mpdr(sigma, v.clone(), 1000.0, 1.0).unwrap();
        let mut rng = RngStream::new(37, 0);
        let x = draw_training_set(&mut rng, &sc, 400).unwrap();
        let s = gram(&x);
        let dec = eigh(&s).unwrap();
        let top = dec.vectors.column(0);
        let overlap = dot(&top, v.entries()).norm() / vec_norm(v.entries());
        assert!(overlap > 0.99, "dominant eigenvector overlap {overlap}");
    }

    #[test]
    fn scenario_json_round_trip() {
        let (sigma, _) = build_sigma(4, &paper_interferers()[..1], 1.0).unwrap();
        let v = ula_steering(4, 0.0).unwrap();
        let sc = make_mpdr(sigma, v, 3.0, 1.2).unwrap();
        let text = serde_json::to_string(&sc).unwrap();
        assert!(text.contains("\"kind\":\"mpdr\""), "kind tag: {text}");
        let back: Scenario = serde_json::from_str(&text).unwrap();
        back.validate().unwrap();
        assert_eq!(back.sigma.entries(), sc.sigma.entries());
        assert_eq!(back.soi_power, 3.0);
    }
}
