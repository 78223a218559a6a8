//! Property tests for the Hermitian linear-algebra kernel.

mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use snrloss_core::dist::{sample_iid_cgauss, RngStream};
use snrloss_core::hermitian::{
    dot, eigh, partial_cholesky, projector, ComplexMatrix, HermitianMatrix,
};

/// Random Hermitian PD matrix via a Gram construction with a noise floor,
/// driven by a seed so proptest shrinking stays meaningful.
fn random_pd(seed: u64, n: usize) -> HermitianMatrix {
    let mut rng = RngStream::new(seed, 0);
    let x = sample_iid_cgauss(&mut rng, n, n + 2);
    let g = snrloss_core::dist::gram(&x);
    g.add_scaled(0.1, &HermitianMatrix::identity(n))
}

fn random_unitary(seed: u64, n: usize) -> ComplexMatrix {
    // eigenvectors of a random Hermitian matrix form a unitary basis
    let dec = eigh(&random_pd(seed ^ 0x9e37_79b9, n)).unwrap();
    dec.vectors
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn partial_cholesky_is_nested(seed in 0u64..1_000_000, n in 2usize..7) {
        let a = random_pd(seed, n);
        for r in 1..n {
            let small = partial_cholesky(&a, r).unwrap();
            let big = partial_cholesky(&a, r + 1).unwrap();
            for j in 0..r {
                for i in 0..n {
                    let (s, b) = (small[(i, j)], big[(i, j)]);
                    prop_assert!(
                        (s - b).norm() < 1e-10,
                        "column {j} differs at row {i}: {s} vs {b}"
                    );
                }
            }
        }
    }

    #[test]
    fn projector_trace_counts_columns(seed in 0u64..1_000_000, n in 2usize..7, r in 1usize..4) {
        let r = r.min(n);
        let mut rng = RngStream::new(seed, 1);
        let a = sample_iid_cgauss(&mut rng, n, r);
        let p = projector(&a).unwrap();
        prop_assert!((p.trace() - r as f64).abs() < 1e-9, "trace {} vs {r}", p.trace());
        // idempotence
        let pc = p.to_complex();
        let pp = pc.mul(&pc);
        for i in 0..n {
            for j in 0..n {
                prop_assert!((pp[(i, j)] - pc[(i, j)]).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn eigh_values_invariant_under_unitary_conjugation(seed in 0u64..1_000_000, n in 2usize..7) {
        let a = random_pd(seed, n);
        let q = random_unitary(seed.wrapping_add(17), n);
        let rotated = a.congruence(&q); // q^H a q
        let va = eigh(&a).unwrap().values;
        let vr = eigh(&rotated).unwrap().values;
        let scale = va[0].abs().max(1.0);
        for (x, y) in va.iter().zip(&vr) {
            prop_assert!((x - y).abs() < 1e-9 * scale, "{x} vs {y}");
        }
    }

    #[test]
    fn eigh_reconstructs_and_is_orthonormal(seed in 0u64..1_000_000, n in 2usize..7) {
        let a = random_pd(seed, n);
        let dec = eigh(&a).unwrap();
        // V diag(lambda) V^H == A
        let scale = dec.values[0].abs().max(1.0);
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::ZERO;
                for l in 0..n {
                    acc += dec.vectors[(i, l)] * dec.values[l] * dec.vectors[(j, l)].conj();
                }
                prop_assert!(
                    (acc - a[(i, j)]).norm() < 1e-9 * scale,
                    "entry ({i},{j}): {acc} vs {}",
                    a[(i, j)]
                );
            }
        }
        for l in 0..n {
            for m in 0..n {
                let g = dot(&dec.vectors.column(l), &dec.vectors.column(m));
                let want = if l == m { 1.0 } else { 0.0 };
                prop_assert!((g - Complex64::new(want, 0.0)).norm() < 1e-9);
            }
        }
    }
}
