//! Property tests for the structural invariants that hold for every input,
//! not just the pinned examples.

use proptest::prelude::*;

use spectracode_core::codes::{macwilliams_dual, LinearCode};
use spectracode_core::moments::{
    enumerate_compositions, freeconv_moment, mp_moment, set_partitions,
};
use spectracode_core::reference::mp_cdf;
use spectracode_core::spectra::{Cdf, EsdCurve};

proptest! {
    #[test]
    fn compositions_always_satisfy_constraints(l in 1u32..=9, i in 1u32..=9) {
        prop_assume!(i <= l);
        for comp in enumerate_compositions(l, i) {
            let count: u64 = comp.parts.iter().sum();
            let weight: u64 = comp
                .parts
                .iter()
                .enumerate()
                .map(|(j, &k)| (j as u64 + 1) * k)
                .sum();
            prop_assert_eq!(count, (l - i + 1) as u64);
            prop_assert_eq!(weight, l as u64);
            prop_assert_eq!(comp.parts.len(), i as usize);
        }
    }

    #[test]
    fn mp_moments_grow_with_y(l in 1u32..=12, y1 in 0.05f64..4.0, y2 in 0.05f64..4.0) {
        let (lo, hi) = if y1 <= y2 { (y1, y2) } else { (y2, y1) };
        prop_assert!(mp_moment(l, lo).unwrap() <= mp_moment(l, hi).unwrap() + 1e-12);
    }

    #[test]
    fn freeconv_reduces_to_y_a_at_l1(y_a in 0.05f64..4.0, y_b in 0.05f64..4.0) {
        let m = freeconv_moment(1, y_a, y_b).unwrap();
        prop_assert!((m - y_a).abs() < 1e-12 * y_a.max(1.0));
    }

    #[test]
    fn esd_is_monotone_and_normalized(mut eigs in proptest::collection::vec(-5.0f64..5.0, 1..40)) {
        let curve = EsdCurve::new(eigs.clone());
        eigs.sort_by(f64::total_cmp);
        prop_assert_eq!(curve.eval(f64::INFINITY), 1.0);
        prop_assert_eq!(curve.eval(eigs[0] - 1.0), 0.0);
        let mut prev = 0.0;
        for &x in &eigs {
            let f = curve.eval(x);
            prop_assert!(f >= prev);
            prop_assert!(f >= curve.eval_left(x));
            prev = f;
        }
    }

    #[test]
    fn mp_cdf_is_monotone(y in 0.1f64..3.0, x1 in 0.0f64..10.0, x2 in 0.0f64..10.0) {
        let (lo, hi) = if x1 <= x2 { (x1, x2) } else { (x2, x1) };
        prop_assert!(mp_cdf(y, lo).unwrap() <= mp_cdf(y, hi).unwrap() + 1e-12);
    }

    #[test]
    fn macwilliams_is_an_involution_on_random_codes(n in 3usize..8, k in 1usize..4, seed in 0u64..500) {
        prop_assume!(k < n);
        let code = match LinearCode::random(n, k, 2, seed) {
            Ok(c) => c,
            Err(_) => return Ok(()), // rank-deficient draw exhausted retries
        };
        let w = code.weight_enumerator().unwrap();
        let dual = macwilliams_dual(w, n, k as u32, 2).unwrap();
        let back = macwilliams_dual(&dual, n, (n - k) as u32, 2).unwrap();
        prop_assert_eq!(w.counts(), back.counts());
    }

    #[test]
    fn set_partitions_are_valid_rgs(l in 1usize..=7) {
        let parts = set_partitions(l);
        for labels in &parts {
            prop_assert_eq!(labels[0], 0);
            let mut max_seen = 0usize;
            for &lab in labels {
                prop_assert!(lab <= max_seen + 1);
                max_seen = max_seen.max(lab);
            }
        }
        // distinct label strings means distinct partitions
        let mut sorted = parts.clone();
        sorted.sort();
        sorted.dedup();
        prop_assert_eq!(sorted.len(), parts.len());
    }
}
