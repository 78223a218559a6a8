//! Shared helpers for the integration suites.
//!
//! Each test binary pulls in the subset it needs, so some items are unused
//! in any single binary.
#![allow(dead_code)]

use snrloss_core::scenario::Interferer;

/// Two-sample Kolmogorov-Smirnov distance; sorts in place.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty());
    a.sort_unstable_by(f64::total_cmp);
    b.sort_unstable_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// One-sample KS distance against a reference cdf; sorts in place.
pub fn ks_one_sample<F: Fn(f64) -> f64>(xs: &mut [f64], cdf: F) -> f64 {
    assert!(!xs.is_empty());
    xs.sort_unstable_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let c = cdf(x);
        d = d.max((c - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - c).abs());
    }
    d
}

/// The three-interferer scenario used throughout the figure set.
pub fn paper_interferers() -> [Interferer; 3] {
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
