//! Property checks on scenario construction: positive definiteness, the
//! kind-declared algebraic relations, list-order invariance, and the
//! Student training law reduced to a scalar statistic.

mod common;

use common::{ks_two_sample, paper_interferers};
use num_complex::Complex64;
use proptest::prelude::*;
use snrloss_core::dist::{gram, sample_cchisq, RngStream};
use snrloss_core::filters::w_optimal;
use snrloss_core::hermitian::{dot, eigh, HermitianMatrix};
use snrloss_core::law::snr_opt;
use snrloss_core::scenario::{
    build_sigma, draw_training_set, make_ger, make_mpdr, make_student, make_surprise, ula_steering,
    Interferer,
};

fn interferer_strategy() -> impl Strategy<Value = Interferer> {
    (-75.0f64..75.0, 0.0f64..35.0).prop_map(|(angle_deg, power_db)| Interferer {
        angle_deg,
        power_db,
    })
}

fn assert_pd(m: &HermitianMatrix) -> Result<(), TestCaseError> {
    let dec = eigh(m).unwrap();
    prop_assert!(
        dec.values[m.dim() - 1] > 0.0,
        "smallest eigenvalue {}",
        dec.values[m.dim() - 1]
    );
    Ok(())
}

fn max_entry_gap(a: &HermitianMatrix, b: &HermitianMatrix) -> f64 {
    a.entries()
        .iter()
        .zip(b.entries())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn sigma_is_pd_and_order_invariant(
        mut jammers in proptest::collection::vec(interferer_strategy(), 1..4),
        gamma in 0.3f64..4.0,
        rot in 0usize..6,
    ) {
        let n = 8;
        let (sigma, g) = build_sigma(n, &jammers, gamma).unwrap();
        prop_assert_eq!(g.cols(), jammers.len());
        assert_pd(&sigma)?;
        let shift = rot % jammers.len().max(1);
        jammers.rotate_left(shift);
        jammers.reverse();
        let (permuted, _) = build_sigma(n, &jammers, gamma).unwrap();
        // accumulation happens in a canonical internal order, so any input
        // permutation must reproduce the exact same floating-point matrix
        prop_assert_eq!(sigma.entries(), permuted.entries());
    }

    #[test]
    fn mpdr_contamination_keeps_optimal_direction(
        soi_power in 0.05f64..50.0,
        gamma in 0.3f64..4.0,
        angle in -40.0f64..40.0,
    ) {
        let n = 8;
        let v = ula_steering(n, angle).unwrap();
        let (sigma, _) = build_sigma(n, &paper_interferers()[..2], 1.0).unwrap();
        let sc = make_mpdr(sigma, v, soi_power, gamma).unwrap();
        sc.validate().unwrap();
        assert_pd(&sc.ct)?;
        // rank-one contamination along v leaves Sigma^{-1} v and
        // C_t^{-1} v parallel, so the two distortionless optima coincide
        let wo_sigma = w_optimal(&sc.sigma, &sc.v).unwrap();
        let wo_ct = w_optimal(&sc.ct, &sc.v).unwrap();
        let gap: f64 = wo_sigma
            .iter()
            .zip(wo_ct.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        let scale: f64 = wo_sigma.iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(gap < 1e-9 * scale.max(1.0), "gap {gap}");
    }

    #[test]
    fn surprise_interferer_is_invisible_to_the_filter(
        q_angle in 5.0f64..70.0,
        negate in proptest::bool::ANY,
        q_power_db in -5.0f64..20.0,
    ) {
        let n = 8;
        let v = ula_steering(n, 0.0).unwrap();
        let (ct, _) = build_sigma(n, &paper_interferers()[..2], 1.0).unwrap();
        let angle = if negate { -q_angle } else { q_angle };
        let sc = make_surprise(ct.clone(), v, angle, q_power_db).unwrap();
        sc.validate().unwrap();
        assert_pd(&sc.sigma)?;
        let q = sc.extras.q.as_ref().unwrap();
        // the defining relation: q^H C_t^{-1} v = 0, tested through the
        // normalized optimum of the training covariance
        let w_ct = w_optimal(&sc.ct, &sc.v).unwrap();
        let overlap = dot(q, &w_ct).norm();
        let qn = libm::sqrt(q.iter().map(|z| z.norm_sqr()).sum::<f64>());
        prop_assert!(overlap < 1e-9 * qn, "overlap {overlap} for |q| {qn}");
        // and sigma is exactly the trained matrix plus the rank-one surprise
        let rebuilt = sc.ct.add_scaled(1.0, &HermitianMatrix::outer(q));
        prop_assert!(max_entry_gap(&rebuilt, &sc.sigma) < 1e-9 * sc.sigma.trace());
    }

    #[test]
    fn ger_mismatch_moves_ct_but_keeps_the_optimum(
        strength in 0.2f64..3.0,
        seed in 0u64..200,
    ) {
        let n = 8;
        let v = ula_steering(n, 0.0).unwrap();
        let (sigma, _) = build_sigma(n, &paper_interferers()[..2], 1.0).unwrap();
        let mut rng = RngStream::new(seed, 3);
        let sc = make_ger(sigma, v, &mut rng, strength).unwrap();
        sc.validate().unwrap();
        assert_pd(&sc.ct)?;
        prop_assert!(max_entry_gap(&sc.ct, &sc.sigma) > 1e-6, "ct did not move");
        prop_assert_eq!(sc.extras.lambda, Some(1.0));
        let wo_sigma = w_optimal(&sc.sigma, &sc.v).unwrap();
        let wo_ct = w_optimal(&sc.ct, &sc.v).unwrap();
        let gap: f64 = wo_sigma
            .iter()
            .zip(wo_ct.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        let scale: f64 = wo_sigma.iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(gap < 1e-9 * scale.max(1.0), "gap {gap}");
    }
}

#[test]
fn student_training_reduces_to_chi_square_ratio() {
    // For Student training, S_t = mu Sigma^(1/2) W^(-1/2) G W^(-1/2)
    // Sigma^(1/2) with G ~ CW_N(K, I) independent of W ~ CW_N(nu, I).
    // Projecting on a fixed unit direction u and using the partitioned
    // Wishart marginal 1/(u^H W^(-1) u) ~ Cchi2_{nu-N+1}:
    //
    //   y^H S_t y / mu  =d=  Cchi2_K / Cchi2_{nu-N+1}
    //
    // for any y with y^H Sigma y = 1. We take y along Sigma^{-1} e_1.
    let n = 4;
    let k = 8;
    let nu = 9usize;
    let (sigma, _) = build_sigma(
        n,
        &[Interferer {
            angle_deg: -20.0,
            power_db: 18.0,
        }],
        1.0,
    )
    .unwrap();
    let e1: Vec<Complex64> = (0..n)
        .map(|i| {
            if i == 0 {
                Complex64::ONE
            } else {
                Complex64::ZERO
            }
        })
        .collect();
    let quad = snr_opt(&sigma, &e1, 1.0).unwrap();
    let w = w_optimal(&sigma, &e1).unwrap();
    // y = Sigma^{-1} e1 / sqrt(quad) = w * sqrt(quad), so
    // y^H S_t y = quad * w^H S_t w
    let sc = make_student(sigma, ula_steering(n, 0.0).unwrap(), nu as f64, None).unwrap();
    let mu = sc.extras.mu_scale.unwrap();
    let m = 10_000;
    let mut rng = RngStream::new(70, 0);
    let mut lhs = Vec::with_capacity(m);
    for _ in 0..m {
        let x = draw_training_set(&mut rng, &sc, k).unwrap();
        let s_t = gram(&x);
        lhs.push(quad * s_t.herm_quad(&w) / mu);
    }
    let mut rng2 = RngStream::new(70, 1);
    let mut rhs = Vec::with_capacity(m);
    for _ in 0..m {
        let num = sample_cchisq(&mut rng2, k, 0.0).unwrap();
        let den = sample_cchisq(&mut rng2, nu - n + 1, 0.0).unwrap();
        rhs.push(num / den);
    }
    let d = ks_two_sample(&mut lhs, &mut rhs);
    let threshold = 1.63 * libm::sqrt(2.0 / m as f64);
    assert!(d < threshold, "KS {d} threshold {threshold}");
}
