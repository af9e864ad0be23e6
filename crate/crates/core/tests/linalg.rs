mod common;

use anosov::linalg::{
    confirm_attracting_plane, normalize_to_sl, proximality_report, singular_values, spectrum, Subspace, DEFAULT_EPS_GAP,
};
use anosov::ScaledMatrix;
use common::{conjugated_diagonal, random_matrix, random_scaled};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Singular values from the symmetric eigenproblem of `g gᵀ`.
fn oracle_singular_values(g: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = (g * g.transpose()).symmetric_eigenvalues().iter().map(|x| x.max(0.0).sqrt()).collect();
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    v
}

#[test]
fn singular_values_match_gram_eigenvalues() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for i in 0..200 {
        let d = 2 + i % 9;
        let m = random_matrix(&mut rng, d);
        let g = ScaledMatrix::new(m.clone()).unwrap();
        let got = singular_values(&g).unwrap().values();
        let want = oracle_singular_values(&m);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() <= 1e-9 * want[0], "d={d}: {a} vs {b}");
        }
    }
}

#[test]
fn scaling_is_transparent_to_singular_values() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let g = random_scaled(&mut rng, 5);
    let big = g.pow(40);
    let direct = (0..40).fold(ScaledMatrix::identity(5), |acc, _| acc.mul(&g));
    let a = singular_values(&big).unwrap();
    let b = singular_values(&direct).unwrap();
    assert!((a.log_values()[0] - b.log_values()[0]).abs() < 1e-9 * a.log_values()[0].abs().max(1.0));
}

#[test]
fn report_and_spectrum_agree_on_proximality() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let threshold = DEFAULT_EPS_GAP.ln_1p();
    for i in 0..300 {
        let d = 2 + i % 7;
        // mix generic matrices with ones that have repeated moduli
        let g = if i % 3 == 0 {
            let mut vals: Vec<f64> = (0..d).map(|_| rng.gen_range(0.2..3.0)).collect();
            let j = rng.gen_range(0..d - 1);
            vals[j + 1] = -vals[j];
            conjugated_diagonal(&mut rng, &vals)
        } else {
            random_scaled(&mut rng, d)
        };
        let spec = spectrum(&g).unwrap();
        for k in 1..d {
            let r = proximality_report(&g, k).unwrap();
            assert_eq!(r.is_proximal, spec.log_gap(k) > threshold, "d={d} k={k}");
        }
    }
}

#[test]
fn planes_are_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut checked = 0;
    for i in 0..200 {
        let d = 2 + i % 7;
        let g = random_scaled(&mut rng, d);
        for k in 1..d {
            let r = proximality_report(&g, k).unwrap();
            if !r.is_proximal || r.log_gap_eig < 1e-3 {
                continue;
            }
            for plane in [r.attracting_plane.unwrap(), r.repelling_plane.unwrap()] {
                let moved = plane.transform(&g).unwrap();
                let dist = plane.sin_distance(&moved).unwrap();
                assert!(dist < 1e-8, "d={d} k={k} dist={dist:e}");
            }
            checked += 1;
        }
    }
    assert!(checked > 200);
}

#[test]
fn power_iteration_finds_the_attracting_plane() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g = conjugated_diagonal(&mut rng, &[3.0, -2.0, 0.5, 1.0 / 3.0, 0.25]);
    for k in 1..4 {
        let r = proximality_report(&g, k).unwrap();
        assert!(r.is_proximal);
        let repelling = r.repelling_plane.clone().unwrap();
        let mut tried = 0;
        while tried < 20 {
            let start = Subspace::from_columns(DMatrix::from_fn(5, k, |_, _| rng.gen_range(-1.0..=1.0))).unwrap();
            let mut cat = DMatrix::zeros(5, 5);
            cat.columns_mut(0, k).copy_from(start.basis());
            cat.columns_mut(k, 5 - k).copy_from(repelling.basis());
            if anosov::linalg::condition_number(&cat).unwrap() > 1e6 {
                continue;
            }
            tried += 1;
            let out = confirm_attracting_plane(&g, &r, &start, 200, 1e-6).unwrap();
            assert!(out.converged, "k={k}: {out:?}");
        }
    }
}

#[test]
fn normalization_keeps_verdicts() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for i in 0..100 {
        let d = 2 + i % 7;
        let g = ScaledMatrix::new(random_matrix(&mut rng, d) * rng.gen_range(0.01..100.0)).unwrap();
        let h = normalize_to_sl(&g).unwrap();
        assert!(h.log_abs_det().unwrap().1.abs() < 1e-9);
        let (sg, sh) = (singular_values(&g).unwrap(), singular_values(&h).unwrap());
        let (eg, eh) = (spectrum(&g).unwrap(), spectrum(&h).unwrap());
        for k in 1..d {
            assert!((sg.log_gap(k) - sh.log_gap(k)).abs() < 1e-12);
            assert!((eg.log_gap(k) - eh.log_gap(k)).abs() < 1e-12);
            assert_eq!(proximality_report(&g, k).unwrap().is_proximal, proximality_report(&h, k).unwrap().is_proximal);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn entries_stay_in_range(seed in any::<u64>(), d in 2usize..7, n in 1usize..60) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_scaled(&mut rng, d).pow(n);
        let m = g.entries().amax();
        prop_assert!((0.5..=2.0).contains(&m));
    }

    #[test]
    fn product_log_det_is_additive(seed in any::<u64>(), d in 2usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (g, h) = (random_scaled(&mut rng, d), random_scaled(&mut rng, d));
        let (sg, lg) = g.log_abs_det().unwrap();
        let (sh, lh) = h.log_abs_det().unwrap();
        let (s, l) = g.mul(&h).log_abs_det().unwrap();
        prop_assert_eq!(s, sg * sh);
        prop_assert!((l - lg - lh).abs() < 1e-8 * (1.0 + lg.abs() + lh.abs()));
    }

    #[test]
    fn singular_values_are_sorted_and_multiply_to_det(seed in any::<u64>(), d in 2usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_scaled(&mut rng, d);
        let s = singular_values(&g).unwrap();
        prop_assert!(s.log_values().windows(2).all(|w| w[0] >= w[1]));
        let sum: f64 = s.log_values().iter().sum();
        prop_assert!((sum - g.log_abs_det().unwrap().1).abs() < 1e-8);
    }
}
