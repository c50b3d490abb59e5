//! Property tests for algebraic invariants.

use num_complex::Complex64;
use proptest::prelude::*;
use sle_core::bessel::{PathSign, RealPath};
use sle_core::driver::{BrownianPath, TimeGrid};
use sle_core::excursion::{decompose, filter_macroscopic};
use sle_core::loewner::{sqrt_upper, ElementarySlitMap, TracePolyline};
use sle_core::stats::ks_statistic;

fn upper_half_point() -> impl Strategy<Value = Complex64> {
    (-3.0f64..3.0, 0.05f64..3.0).prop_map(|(re, im)| Complex64::new(re, im))
}

proptest! {
    #[test]
    fn sqrt_upper_squares_back(re in -10.0f64..10.0, im in -10.0f64..10.0) {
        let c = Complex64::new(re, im);
        let r = sqrt_upper(c);
        prop_assert!(r.im >= -1e-12);
        prop_assert!((r * r - c).norm() <= 1e-10 * (1.0 + c.norm()));
    }

    #[test]
    fn slit_map_roundtrip(z in upper_half_point(), u in -2.0f64..2.0, dt in 1e-6f64..1e-2) {
        let map = ElementarySlitMap { u, dt };
        let w = map.backward(z);
        let img = map.forward(w).unwrap();
        prop_assert!(!img.swallowed);
        prop_assert!((img.point - z).norm() < 1e-9 * (1.0 + z.norm()));
    }

    #[test]
    fn forward_then_backward_identity(z in upper_half_point(), u in -2.0f64..2.0, dt in 1e-6f64..1e-3) {
        let map = ElementarySlitMap { u, dt };
        // stay clear of the swallow window
        prop_assume!((z - u).norm_sqr() > 16.0 * dt);
        let img = map.forward(z).unwrap();
        prop_assert!(!img.swallowed);
        prop_assert!((map.backward(img.point) - z).norm() < 1e-9 * (1.0 + z.norm()));
    }

    #[test]
    fn reverse_shift_is_involutive(seed in any::<u64>()) {
        let grid = TimeGrid::new(1.0, 64).unwrap();
        let b = BrownianPath::sample(seed, grid);
        let rr = b.reverse_shift(1.0).unwrap().reverse_shift(1.0).unwrap();
        for (x, y) in b.values().iter().zip(rr.values()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
        let nn = b.negate().negate();
        for (x, y) in b.values().iter().zip(nn.values()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn shift_increments_compose(seed in any::<u64>(), a in 1usize..20, c in 1usize..20) {
        let grid = TimeGrid::new(1.0, 64).unwrap();
        let b = BrownianPath::sample(seed, grid);
        let two_step = b.shift_increments_at(a).unwrap().shift_increments_at(c).unwrap();
        let one_step = b.shift_increments_at(a + c).unwrap();
        for (x, y) in two_step.values().iter().zip(one_step.values()) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn macroscopic_filter_is_monotone(seed in any::<u64>(), m1 in 0.01f64..0.1, extra in 0.0f64..0.2) {
        let grid = TimeGrid::new(1.0, 256).unwrap();
        let b = BrownianPath::sample(seed, grid);
        let vals: Vec<f64> = b.values().iter().map(|v| v.abs()).collect();
        let path = RealPath::new(grid, vals, None, PathSign::NonNegative);
        let recs = decompose(&path, 1e-3).unwrap();
        let coarse = filter_macroscopic(&recs, m1 + extra).unwrap();
        let fine = filter_macroscopic(&recs, m1).unwrap();
        prop_assert!(coarse.len() <= fine.len());
        for r in &coarse {
            prop_assert!(fine.iter().any(|f| f.start_idx == r.start_idx && f.end_idx == r.end_idx));
        }
    }

    #[test]
    fn excursions_partition_disjointly(seed in any::<u64>()) {
        let grid = TimeGrid::new(1.0, 256).unwrap();
        let b = BrownianPath::sample(seed, grid);
        let vals: Vec<f64> = b.values().iter().map(|v| v.abs()).collect();
        let path = RealPath::new(grid, vals, None, PathSign::NonNegative);
        let recs = decompose(&path, 1e-3).unwrap();
        for w in recs.windows(2) {
            prop_assert!(w[0].end_idx <= w[1].start_idx);
            prop_assert!(w[0].duration > 0.0);
        }
    }

    #[test]
    fn ks_bounds_and_symmetry(seed in any::<u64>()) {
        let grid = TimeGrid::new(1.0, 128).unwrap();
        let a: Vec<f64> = BrownianPath::sample(seed, grid).values().to_vec();
        let b: Vec<f64> = BrownianPath::sample(seed ^ 0xABCD, grid).values().to_vec();
        let d1 = ks_statistic(&a, &b).unwrap();
        let d2 = ks_statistic(&b, &a).unwrap();
        prop_assert!((0.0..=1.0).contains(&d1));
        prop_assert!((d1 - d2).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn double_point_hash_matches_all_pairs(seed in any::<u64>()) {
        // random smooth closed-ish curve, large enough to force the hash path
        let n = 1_100usize;
        let grid = TimeGrid::new(1.0, 8).unwrap();
        let coeffs: Vec<f64> = BrownianPath::sample(seed, grid).values().to_vec();
        let times: Vec<f64> = (0..=n).map(|k| 6.0 * k as f64 / n as f64).collect();
        let points: Vec<Complex64> = times
            .iter()
            .map(|&s| {
                let re = (s + coeffs[1]).sin() + 0.5 * (2.0 * s + coeffs[2]).cos();
                let im = 1.5 + (1.3 * s + coeffs[3]).cos() + 0.4 * (2.7 * s + coeffs[4]).sin();
                Complex64::new(re, im)
            })
            .collect();
        let poly = TracePolyline { times: times.clone(), points: points.clone(), kappa: 0.0, seed: 0 };
        let small = TracePolyline {
            times: times[..900].to_vec(),
            points: points[..900].to_vec(),
            kappa: 0.0,
            seed: 0,
        };
        // same prefix, one through the hash (n > 1000) truncated logically by
        // comparing against the all-pairs run on the identical prefix
        let hash_recs = sle_core::geometry::detect_double_points(&poly, 0.5, 0.02);
        let pair_recs = sle_core::geometry::detect_double_points(&small, 0.5, 0.02);
        for r in &pair_recs {
            prop_assert!(
                hash_recs.iter().any(|h| (h.t1 - r.t1).abs() < 0.05 && (h.t2 - r.t2).abs() < 0.05),
                "all-pairs contact ({}, {}) missing from hash run", r.t1, r.t2
            );
        }
    }
}
