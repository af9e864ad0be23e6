mod common;

use anosov::constructions::{
    complex_schottky_generators, direct_sum, interpolate_path, perturb_path, schottky_generators, schottky_rep,
    symmetric_power, tau2_realify, SchottkyParams,
};
use anosov::linalg::{singular_values, spectrum};
use anosov::words::{enumerate_ball, Representation};
use anosov::{Error, ScaledMatrix};
use common::random_sl;
use nalgebra::{Complex, Matrix2};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_sl2c(rng: &mut ChaCha8Rng) -> Matrix2<Complex<f64>> {
    let mut z = || Complex::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
    loop {
        let m = Matrix2::new(z(), z(), z(), z());
        let det = m.determinant();
        if det.norm() < 1e-2 {
            continue;
        }
        return m / det.sqrt();
    }
}

#[test]
fn tau2_is_a_homomorphism() {
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    for _ in 0..100 {
        let (g, h) = (random_sl2c(&mut rng), random_sl2c(&mut rng));
        let lhs = tau2_realify(&(g * h)).unwrap();
        let rhs = tau2_realify(&g).unwrap().mul(&tau2_realify(&h).unwrap());
        assert!(lhs.relative_distance(&rhs) < 1e-9);
    }
}

#[test]
fn tau2_doubles_singular_values() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..50 {
        let g = random_sl2c(&mut rng);
        let s = singular_values(&tau2_realify(&g).unwrap()).unwrap().values();
        assert!((s[0] - s[1]).abs() < 1e-9 * s[0] && (s[2] - s[3]).abs() < 1e-9 * s[0]);
        // singular values of g from its Hermitian Gram matrix
        let gram = g.adjoint() * g;
        let (tr, det) = ((gram[(0, 0)] + gram[(1, 1)]).re, gram.determinant().re);
        let top = ((tr + (tr * tr - 4.0 * det).max(0.0).sqrt()) / 2.0).sqrt();
        assert!((s[0] - top).abs() < 1e-9 * top);
    }
}

#[test]
fn symmetric_power_is_a_homomorphism() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for m in 1..=6 {
        for _ in 0..100 {
            let (g, h) = (random_sl(&mut rng, 2), random_sl(&mut rng, 2));
            let lhs = symmetric_power(&g.mul(&h), m).unwrap();
            let rhs = symmetric_power(&g, m).unwrap().mul(&symmetric_power(&h, m).unwrap());
            assert!(lhs.relative_distance(&rhs) < 1e-9, "m={m}");
        }
    }
}

#[test]
fn symmetric_power_transports_eigenvalues() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for m in 1..=7 {
        for _ in 0..20 {
            let l: f64 = rng.gen_range(1.1..4.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            // moderately conditioned conjugator: rotation times a mild dilation
            let (sn, cs) = rng.gen_range(0.0..std::f64::consts::PI).sin_cos();
            let k = ScaledMatrix::from_row_slice(2, &[cs, -sn, sn, cs]).unwrap();
            let s = rng.gen_range(1.0..1.5);
            let t = k.mul(&ScaledMatrix::from_diagonal(&[s, 1.0 / s]).unwrap());
            let g = t.mul(&ScaledMatrix::from_diagonal(&[l, 1.0 / l]).unwrap()).mul(&t.inverse().unwrap());
            let spec = spectrum(&symmetric_power(&g, m).unwrap()).unwrap();
            for (j, lm) in spec.log_moduli().iter().enumerate() {
                let want = (m as f64 - 2.0 * j as f64) * l.abs().ln();
                assert!((lm - want).abs() < 1e-9, "m={m} j={j}");
            }
            let top = spec.top_signed().unwrap();
            assert_eq!(top.is_positive(), l > 0.0 || m % 2 == 0);
        }
    }
}

#[test]
fn realified_schottky_gap_structure() {
    let rep = schottky_rep(&SchottkyParams::complex(2, 3.0)).unwrap();
    let ball = enumerate_ball(rep.presentation(), 6).unwrap();
    let images = rep.evaluate_ball(&ball).unwrap();
    let mut min_by_len = [f64::INFINITY; 7];
    for (w, g) in ball.words().iter().zip(&images) {
        let s = singular_values(g).unwrap();
        assert!(s.log_gap(1) < 1e-9, "{w}");
        min_by_len[w.len()] = min_by_len[w.len()].min(s.log_gap(2));
    }
    assert!(min_by_len.windows(2).skip(1).all(|p| p[1] > p[0]), "{min_by_len:?}");
}

#[test]
fn direct_sum_commutes_with_evaluation() {
    let a = schottky_rep(&SchottkyParams::standard(2, 3.0)).unwrap();
    let b = schottky_rep(&SchottkyParams::complex(2, 2.5)).unwrap();
    let sum = direct_sum(&[a.clone(), b.clone()]).unwrap();
    assert_eq!(sum.dim(), 6);
    let ball = enumerate_ball(sum.presentation(), 4).unwrap();
    for w in ball.words() {
        let blocks = ScaledMatrix::block_diagonal(&[a.evaluate(w).unwrap(), b.evaluate(w).unwrap()]).unwrap();
        assert!(sum.evaluate(w).unwrap().relative_distance(&blocks) < 1e-12);
        // σ(ρ⊕ρ') is the union of the two spectra
        let mut union: Vec<f64> = singular_values(&a.evaluate(w).unwrap()).unwrap().log_values().to_vec();
        union.extend(singular_values(&b.evaluate(w).unwrap()).unwrap().log_values());
        union.sort_by(|x, y| y.total_cmp(x));
        let got = singular_values(&sum.evaluate(w).unwrap()).unwrap();
        for (x, y) in got.log_values().iter().zip(&union) {
            assert!((x - y).abs() < 1e-9);
        }
    }
}

#[test]
fn schottky_generators_have_requested_axes() {
    let p = SchottkyParams::standard(3, 2.0);
    for (i, g) in schottky_generators(&p).unwrap().iter().enumerate() {
        assert!((g.determinant() - 1.0).abs() < 1e-12);
        // trace 2cosh(log λ)
        assert!((g.trace() - 2.5).abs() < 1e-12);
        // attracting fixed point on the boundary circle sits at angle θ
        let e = g.symmetric_eigen();
        let v = e.eigenvectors.column(e.eigenvalues.imax());
        let t = 2.0 * v[1].atan2(v[0]);
        let want = p.angles[i];
        let diff = (t - want).rem_euclid(2.0 * std::f64::consts::PI);
        assert!(diff < 1e-9 || (2.0 * std::f64::consts::PI - diff) < 1e-9, "i={i} t={t}");
    }
    let c = complex_schottky_generators(&SchottkyParams::complex(2, 3.0)).unwrap();
    for g in &c {
        assert!((g.determinant() - Complex::new(1.0, 0.0)).norm() < 1e-12);
    }
}

#[test]
fn perturbation_path_is_seeded_and_small() {
    let rep = schottky_rep(&SchottkyParams::standard(2, 3.0)).unwrap();
    let a = perturb_path(&rep, 0.01, 7, 50).unwrap();
    let b = perturb_path(&rep, 0.01, 7, 50).unwrap();
    let c = perturb_path(&rep, 0.01, 8, 50).unwrap();
    assert_eq!(a.len(), 51);
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(a[0], rep);
    for r in &a {
        for (g, g0) in r.generators().iter().zip(rep.generators()) {
            assert!(g.relative_distance(g0) < 0.05);
            assert!(g.log_abs_det().unwrap().1.abs() < 1e-9);
        }
    }
    assert_eq!(perturb_path(&rep, 0.5, 7, 5), Err(Error::InvalidMagnitude(0.5)));
}

#[test]
fn interpolation_endpoints() {
    let a = schottky_rep(&SchottkyParams::standard(2, 3.0)).unwrap();
    let b = schottky_rep(&SchottkyParams::standard(2, 5.0)).unwrap();
    let path = interpolate_path(&a, &b, 4).unwrap();
    assert_eq!(path.len(), 5);
    assert_eq!(path[0], a);
    for (g, h) in path[4].generators().iter().zip(b.generators()) {
        assert!(g.relative_distance(h) < 1e-12);
    }
}

#[test]
fn json_round_trip_is_exact() {
    let rep = direct_sum(&[
        schottky_rep(&SchottkyParams::standard(2, 3.0)).unwrap(),
        schottky_rep(&SchottkyParams::complex(2, 3.0)).unwrap(),
    ])
    .unwrap();
    let back = Representation::from_json(&rep.to_json()).unwrap();
    assert_eq!(back, rep);
    assert!(matches!(Representation::from_json("{\"dim\": 2}"), Err(Error::Format(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn schottky_separation_contract(l in 1.01f64..10.0, a0 in 0.0f64..3.1, gap in 0.0f64..3.1) {
        let a1 = (a0 + gap) % std::f64::consts::PI;
        let p = SchottkyParams { angles: vec![a0, a1], ..SchottkyParams::standard(2, l) };
        let d = (a0 - a1).abs();
        let d = d.min(std::f64::consts::PI - d);
        let ok = d >= std::f64::consts::FRAC_PI_4 - 1e-12;
        prop_assert_eq!(schottky_rep(&p).is_ok(), ok);
    }
}
