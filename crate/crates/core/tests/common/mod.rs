#![allow(dead_code)]

use anosov::ScaledMatrix;
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_matrix(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..=1.0))
}

pub fn random_scaled(rng: &mut ChaCha8Rng, d: usize) -> ScaledMatrix {
    loop {
        let m = random_matrix(rng, d);
        if m.determinant().abs() > 1e-3 {
            return ScaledMatrix::new(m).unwrap();
        }
    }
}

/// Random matrix with determinant exactly (up to rounding) one.
pub fn random_sl(rng: &mut ChaCha8Rng, d: usize) -> ScaledMatrix {
    loop {
        let mut m = random_matrix(rng, d);
        let det = m.determinant();
        if det.abs() < 1e-2 {
            continue;
        }
        if det < 0.0 {
            m.row_mut(0).neg_mut();
        }
        let s = det.abs().powf(-1.0 / d as f64);
        return ScaledMatrix::new(m * s).unwrap();
    }
}

/// `P diag(values) P^{-1}` for a random well-conditioned `P`.
pub fn conjugated_diagonal(rng: &mut ChaCha8Rng, values: &[f64]) -> ScaledMatrix {
    let d = values.len();
    loop {
        let p = random_matrix(rng, d) + DMatrix::identity(d, d) * 2.0;
        let Some(pinv) = p.clone().try_inverse() else { continue };
        let svd = p.singular_values();
        if svd.max() / svd.min() > 50.0 {
            continue;
        }
        let m = &p * DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(values)) * pinv;
        return ScaledMatrix::new(m).unwrap();
    }
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, &x| a.max(x.abs()))
}

/// Normwise relative distance of true values.
pub fn rel_dist(a: &ScaledMatrix, b: &ScaledMatrix) -> f64 {
    a.relative_distance(b)
}
