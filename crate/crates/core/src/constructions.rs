//! Builders for explicit representation families: Schottky groups in
//! `SL(2,R)` and `SL(2,C)`, the realification `τ_2`, direct sums, symmetric
//! powers, Fuchsian surface groups and perturbation paths.

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix, Matrix2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{normalize_to_sl, ScaledMatrix};
use crate::words::{Presentation, Representation};

const DET_TOLERANCE: f64 = 1e-9;

/// Largest magnitude accepted by [`perturb_path`].
pub const MAX_PERTURBATION: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

/// Parameters of a Schottky group of rank `n`.
///
/// `angles[i]` is the direction of the axis of generator `i` in the disk
/// model; axes are diameters, so angles live in `[0, π)` and are compared
/// modulo `π`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchottkyParams {
    pub rank: usize,
    pub dilations: Vec<f64>,
    pub angles: Vec<f64>,
    pub field: Field,
    pub trace_signs: Vec<f64>,
    /// Rotation phases of the complex generators; ignored for real groups.
    #[serde(default)]
    pub phases: Vec<f64>,
}

impl SchottkyParams {
    /// Equally spaced axes `θ_i = iπ/n`, common dilation, positive traces.
    pub fn standard(rank: usize, dilation: f64) -> Self {
        SchottkyParams {
            rank,
            dilations: vec![dilation; rank],
            angles: (0..rank).map(|i| i as f64 * PI / rank as f64).collect(),
            field: Field::Real,
            trace_signs: vec![1.0; rank],
            phases: default_phases(rank),
        }
    }

    pub fn complex(rank: usize, dilation: f64) -> Self {
        SchottkyParams { field: Field::Complex, ..Self::standard(rank, dilation) }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.rank;
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if n == 0 {
            return bad("rank must be positive".into());
        }
        if self.dilations.len() != n || self.angles.len() != n || self.trace_signs.len() != n {
            return bad(format!("expected {n} dilations, angles and trace signs"));
        }
        if self.field == Field::Complex && !self.phases.is_empty() && self.phases.len() != n {
            return bad(format!("expected {n} phases"));
        }
        if let Some(l) = self.dilations.iter().find(|&&l| !(l > 1.0 && l.is_finite())) {
            return bad(format!("dilation {l} is not > 1"));
        }
        if let Some(t) = self.angles.iter().find(|&&t| !(0.0..PI).contains(&t)) {
            return bad(format!("angle {t} outside [0, π)"));
        }
        if let Some(s) = self.trace_signs.iter().find(|&&s| s != 1.0 && s != -1.0) {
            return bad(format!("trace sign {s} is not ±1"));
        }
        let min_sep = PI / (2 * n) as f64;
        for i in 0..n {
            for j in i + 1..n {
                let d = (self.angles[i] - self.angles[j]).abs();
                let d = d.min(PI - d);
                if d < min_sep - 1e-12 {
                    return bad(format!("axes {i} and {j} are {d:.4} apart, need at least {min_sep:.4}"));
                }
            }
        }
        Ok(())
    }

    fn phase(&self, i: usize) -> f64 {
        self.phases.get(i).copied().unwrap_or_else(|| default_phases(self.rank)[i])
    }
}

fn default_phases(rank: usize) -> Vec<f64> {
    (0..rank).map(|i| 0.3 + 0.4 * i as f64).collect()
}

fn rotation(t: f64) -> Matrix2<f64> {
    let (s, c) = t.sin_cos();
    Matrix2::new(c, -s, s, c)
}

fn to_scaled(m: &Matrix2<f64>) -> Result<ScaledMatrix> {
    ScaledMatrix::from_row_slice(2, &[m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]])
}

/// Real Schottky generators `K(θ/2) diag(λ, 1/λ) K(-θ/2)` times the trace sign.
pub fn schottky_generators(params: &SchottkyParams) -> Result<Vec<Matrix2<f64>>> {
    params.validate()?;
    Ok((0..params.rank)
        .map(|i| {
            let l = params.dilations[i];
            let half = params.angles[i] / 2.0;
            rotation(half) * Matrix2::new(l, 0.0, 0.0, 1.0 / l) * rotation(-half) * params.trace_signs[i]
        })
        .collect())
}

/// Loxodromic generators `K(θ/2) diag(λe^{iφ}, λ^{-1}e^{-iφ}) K(-θ/2)` in `SL(2,C)`.
pub fn complex_schottky_generators(params: &SchottkyParams) -> Result<Vec<Matrix2<Complex<f64>>>> {
    params.validate()?;
    let lift = |m: Matrix2<f64>| m.map(|x| Complex::new(x, 0.0));
    Ok((0..params.rank)
        .map(|i| {
            let l = params.dilations[i];
            let phi = params.phase(i);
            let half = params.angles[i] / 2.0;
            let d = Matrix2::new(
                Complex::from_polar(l, phi),
                Complex::new(0.0, 0.0),
                Complex::new(0.0, 0.0),
                Complex::from_polar(1.0 / l, -phi),
            );
            lift(rotation(half)) * d * lift(rotation(-half)) * Complex::new(params.trace_signs[i], 0.0)
        })
        .collect())
}

/// Schottky representation of the free group of rank `n`. Real parameters
/// give a representation into `SL(2,R)`; complex ones give `τ_2∘ρ` in
/// `SL(4,R)`, the only form in which complex matrices are carried.
pub fn schottky_rep(params: &SchottkyParams) -> Result<Representation> {
    let p = Presentation::free(params.rank)?;
    let gens = match params.field {
        Field::Real => schottky_generators(params)?.iter().map(to_scaled).collect::<Result<Vec<_>>>()?,
        Field::Complex => complex_schottky_generators(params)?.iter().map(tau2_realify).collect::<Result<Vec<_>>>()?,
    };
    Representation::new(p, gens)
}

/// `τ_2(g) = [[Re g, -Im g], [Im g, Re g]]` for `g ∈ SL(2,C)`.
pub fn tau2_realify(g: &Matrix2<Complex<f64>>) -> Result<ScaledMatrix> {
    let det = g.determinant();
    if (det - Complex::new(1.0, 0.0)).norm() > DET_TOLERANCE {
        return Err(Error::DeterminantNotOne(if det.im.abs() > DET_TOLERANCE { det.norm() } else { det.re }));
    }
    let mut m = DMatrix::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            let z = g[(i, j)];
            m[(i, j)] = z.re;
            m[(i, j + 2)] = -z.im;
            m[(i + 2, j)] = z.im;
            m[(i + 2, j + 2)] = z.re;
        }
    }
    ScaledMatrix::new(m)
}

/// Block-diagonal sum of representations of the same presentation.
pub fn direct_sum(reps: &[Representation]) -> Result<Representation> {
    let first = reps.first().ok_or_else(|| Error::InvalidParams("empty direct sum".into()))?;
    if reps.iter().any(|r| r.presentation() != first.presentation()) {
        return Err(Error::PresentationMismatch);
    }
    let gens = (0..first.generators().len())
        .map(|j| {
            let blocks: Vec<ScaledMatrix> = reps.iter().map(|r| r.generators()[j].clone()).collect();
            ScaledMatrix::block_diagonal(&blocks)
        })
        .collect::<Result<Vec<_>>>()?;
    Representation::new(*first.presentation(), gens)
}

fn check_unit_det(g: &ScaledMatrix) -> Result<()> {
    let (sign, log_abs) = g.log_abs_det()?;
    if sign < 0.0 || log_abs.abs() > DET_TOLERANCE {
        return Err(Error::DeterminantNotOne(sign * log_abs.exp()));
    }
    Ok(())
}

fn binomials(m: usize) -> Vec<f64> {
    let mut row = vec![1.0; m + 1];
    for j in 1..m {
        row[j] = row[j - 1] * (m + 1 - j) as f64 / j as f64;
    }
    row
}

/// Action of `g ∈ SL(2,R)` on degree-`m` binary forms, in the basis
/// `sqrt(C(m,j)) x^{m-j} y^j`. In this basis `Sym^m` of an orthogonal
/// matrix is orthogonal, so singular values transport like eigenvalues.
pub fn symmetric_power(g: &ScaledMatrix, m: usize) -> Result<ScaledMatrix> {
    if g.dim() != 2 {
        return Err(Error::DimensionMismatch(format!("symmetric power of a {0}x{0} matrix", g.dim())));
    }
    if m == 0 {
        return Err(Error::InvalidParams("symmetric power degree must be positive".into()));
    }
    check_unit_det(g)?;
    let e = g.entries();
    let (a, b, c, d) = (e[(0, 0)], e[(0, 1)], e[(1, 0)], e[(1, 1)]);
    let binom: Vec<Vec<f64>> = (0..=m).map(binomials).collect();
    let mut s = DMatrix::zeros(m + 1, m + 1);
    for j in 0..=m {
        // g(x^{m-j} y^j) = (a x + c y)^{m-j} (b x + d y)^j
        for r in 0..=m - j {
            let left = binom[m - j][r] * a.powi((m - j - r) as i32) * c.powi(r as i32);
            for t in 0..=j {
                let right = binom[j][t] * b.powi((j - t) as i32) * d.powi(t as i32);
                s[(r + t, j)] += left * right;
            }
        }
    }
    let weights = &binom[m];
    for i in 0..=m {
        for j in 0..=m {
            s[(i, j)] *= (weights[j] / weights[i]).sqrt();
        }
    }
    ScaledMatrix::from_parts(s, m as f64 * g.log_scale())
}

/// Fuchsian representation of the genus-`g` surface group from the regular
/// hyperbolic `4g`-gon with all vertex angles `2π/4g`, centered at the origin
/// of the disk.
///
/// With `N = 4g`, side `j` faces direction `φ_j = 2πj/N` and the pairing
/// carrying side `j` to side `k` is `K(φ_k/2) diag(e^d, e^{-d}) K((π-φ_j)/2)`
/// where `d = arccosh(cot(π/N))` is the distance between opposite sides'
/// midpoints reflected through the origin. Generators pair `4i+2 → 4i` and
/// `4i+1 → 4i+3`, which yields the relator `[a_1,b_1]…[a_g,b_g]`.
pub fn fuchsian_surface_rep(genus: usize) -> Result<Representation> {
    let p = Presentation::surface(genus).map_err(|_| Error::InvalidParams(format!("genus {genus} < 2")))?;
    let n = (4 * genus) as f64;
    let dist = (1.0 / (PI / n).tan()).acosh();
    let phi = |j: usize| 2.0 * PI * j as f64 / n;
    let translate = Matrix2::new(dist.exp(), 0.0, 0.0, (-dist).exp());
    let pair = |j: usize, k: usize| rotation(phi(k) / 2.0) * translate * rotation((PI - phi(j)) / 2.0);
    let mut gens = Vec::with_capacity(2 * genus);
    for i in 0..genus {
        gens.push(to_scaled(&pair(4 * i + 2, 4 * i))?);
        gens.push(to_scaled(&pair(4 * i + 1, 4 * i + 3))?);
    }
    Representation::new(p, gens).map_err(|e| match e {
        Error::RelatorDefect(d) => Error::ConstructionFailure(format!("relator defect {d:e}")),
        other => other,
    })
}

/// Straight-line path in generator images from `start` to `end`, each step
/// normalized to `|det| = 1`. Step 0 is `start` itself; `steps` intervals
/// give `steps + 1` representations.
pub fn interpolate_path(start: &Representation, end: &Representation, steps: usize) -> Result<Vec<Representation>> {
    if start.presentation() != end.presentation() {
        return Err(Error::PresentationMismatch);
    }
    if start.dim() != end.dim() {
        return Err(Error::DimensionMismatch(format!("path from dimension {} to {}", start.dim(), end.dim())));
    }
    let mut path = vec![start.clone()];
    for s in 1..=steps {
        let t = s as f64 / steps as f64;
        let gens = start
            .generators()
            .iter()
            .zip(end.generators())
            .map(|(g0, g1)| {
                let top = g0.log_scale().max(g1.log_scale());
                let a = g0.entries() * (g0.log_scale() - top).exp();
                let b = g1.entries() * (g1.log_scale() - top).exp();
                let mixed = &a + (&b - &a) * t;
                normalize_to_sl(&ScaledMatrix::from_parts(mixed, top)?)
            })
            .collect::<Result<Vec<_>>>()?;
        path.push(Representation::new(*start.presentation(), gens)?);
    }
    Ok(path)
}

/// Path from `rep0` towards a seeded random perturbation: every normalized
/// generator entry moves by `magnitude · U[-1, 1]`.
pub fn perturb_path(rep0: &Representation, magnitude: f64, seed: u64, steps: usize) -> Result<Vec<Representation>> {
    if !(0.0..=MAX_PERTURBATION).contains(&magnitude) {
        return Err(Error::InvalidMagnitude(magnitude));
    }
    if !matches!(rep0.presentation(), Presentation::Free { .. }) {
        return Err(Error::InvalidParams("perturbation paths need a free presentation".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rep0.dim();
    let target = rep0
        .generators()
        .iter()
        .map(|g| {
            let mut e = g.entries().clone();
            for i in 0..d {
                for j in 0..d {
                    e[(i, j)] += magnitude * rng.gen_range(-1.0..=1.0);
                }
            }
            normalize_to_sl(&ScaledMatrix::from_parts(e, g.log_scale())?)
        })
        .collect::<Result<Vec<_>>>()?;
    let end = Representation::new(*rep0.presentation(), target)?;
    interpolate_path(rep0, &end, steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{singular_values, spectrum};
    use crate::words::{enumerate_ball, Word};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn standard_schottky_pair() {
        let rep = schottky_rep(&SchottkyParams::standard(2, 3.0)).unwrap();
        let a = rep.generators()[0].to_matrix();
        let b = rep.generators()[1].to_matrix();
        assert!(close(a[(0, 0)], 3.0, 1e-15) && close(a[(1, 1)], 1.0 / 3.0, 1e-15));
        assert!(a[(0, 1)].abs() < 1e-15);
        // quarter turn of the axis in the disk: b = K(π/4) a K(-π/4)
        let expect = [5.0 / 3.0, 4.0 / 3.0, 4.0 / 3.0, 5.0 / 3.0];
        for (x, e) in b.transpose().iter().zip(expect) {
            assert!(close(*x, e, 1e-14), "{x} vs {e}");
        }
        let ab = rep.evaluate(&Word::parse("ab", rep.presentation()).unwrap()).unwrap();
        let s = spectrum(&ab).unwrap();
        assert!(s.log_gap(1) > 0.0);
    }

    #[test]
    fn negative_trace_sign() {
        let mut p = SchottkyParams::standard(2, 3.0);
        p.trace_signs[0] = -1.0;
        let rep = schottky_rep(&p).unwrap();
        let a = rep.generators()[0].to_matrix();
        assert!(close(a.trace(), -(3.0 + 1.0 / 3.0), 1e-15));
    }

    #[test]
    fn schottky_separation_is_enforced() {
        let mut p = SchottkyParams::standard(2, 3.0);
        p.angles = vec![0.0, 0.5];
        assert!(matches!(schottky_rep(&p), Err(Error::InvalidParams(_))));
        p.angles = vec![0.1, PI - 0.1];
        assert!(matches!(schottky_rep(&p), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn tau2_examples() {
        let one = Complex::new(1.0, 0.0);
        let zero = Complex::new(0.0, 0.0);
        let id = tau2_realify(&Matrix2::new(one, zero, zero, one)).unwrap();
        assert_eq!(id, ScaledMatrix::identity(4));
        let i = Complex::new(0.0, 1.0);
        let g = tau2_realify(&Matrix2::new(i, zero, zero, -i)).unwrap().to_matrix();
        let expect = DMatrix::from_row_slice(
            4,
            4,
            &[0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0],
        );
        assert_eq!(g, expect);
        let two = Complex::new(2.0, 0.0);
        assert!(matches!(tau2_realify(&Matrix2::new(two, zero, zero, one)), Err(Error::DeterminantNotOne(_))));
    }

    #[test]
    fn complex_schottky_is_realified() {
        let rep = schottky_rep(&SchottkyParams::complex(2, 3.0)).unwrap();
        assert_eq!(rep.dim(), 4);
        let sv = singular_values(&rep.generators()[1]).unwrap();
        assert!(sv.log_gap(1).abs() < 1e-12);
        assert!(sv.log_gap(2) > 1.0);
    }

    #[test]
    fn direct_sum_blocks() {
        let p = Presentation::free(1).unwrap();
        let r1 = Representation::new(p, vec![ScaledMatrix::from_diagonal(&[3.0, 1.0 / 3.0]).unwrap()]).unwrap();
        let r2 = Representation::new(p, vec![ScaledMatrix::from_diagonal(&[2.0, 0.5]).unwrap()]).unwrap();
        let s = direct_sum(&[r1.clone(), r2]).unwrap();
        let m = s.generators()[0].to_matrix();
        for (i, e) in [3.0, 1.0 / 3.0, 2.0, 0.5].iter().enumerate() {
            assert!(close(m[(i, i)], *e, 1e-15));
        }
        let other = schottky_rep(&SchottkyParams::standard(2, 3.0)).unwrap();
        assert_eq!(direct_sum(&[r1, other]), Err(Error::PresentationMismatch));
    }

    #[test]
    fn symmetric_power_of_diagonal() {
        let l: f64 = 1.7;
        let g = ScaledMatrix::from_diagonal(&[l, 1.0 / l]).unwrap();
        let s = symmetric_power(&g, 5).unwrap().to_matrix();
        for j in 0..6 {
            assert!(close(s[(j, j)], l.powi(5 - 2 * j as i32), 1e-13));
        }
        assert!(s.iter().enumerate().all(|(idx, x)| idx % 7 == 0 || *x == 0.0));
    }

    #[test]
    fn symmetric_power_rejects_non_sl() {
        let g = ScaledMatrix::from_diagonal(&[2.0, 1.0]).unwrap();
        assert!(matches!(symmetric_power(&g, 3), Err(Error::DeterminantNotOne(_))));
    }

    #[test]
    fn symmetric_power_of_rotation_is_orthogonal() {
        let k = to_scaled(&rotation(0.7)).unwrap();
        let s = symmetric_power(&k, 4).unwrap().to_matrix();
        assert!((&s * s.transpose() - DMatrix::<f64>::identity(5, 5)).amax() < 1e-14);
    }

    #[test]
    fn fuchsian_genus_two() {
        let rep = fuchsian_surface_rep(2).unwrap();
        assert!(rep.relator_defect() < 1e-6);
        let ball = enumerate_ball(rep.presentation(), 2).unwrap();
        let images = rep.evaluate_ball(&ball).unwrap();
        for m in &images[1..] {
            assert!(spectrum(m).unwrap().log_gap(1) > 1e-6);
        }
        for g in rep.generators() {
            assert!(g.to_matrix().trace().abs() > 2.0);
        }
    }

    #[test]
    fn fuchsian_genus_three() {
        assert!(fuchsian_surface_rep(3).unwrap().relator_defect() < 1e-6);
        assert!(matches!(fuchsian_surface_rep(1), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn perturbation_path_contract() {
        let rep = schottky_rep(&SchottkyParams::standard(2, 3.0)).unwrap();
        let path = perturb_path(&rep, 0.05, 7, 10).unwrap();
        assert_eq!(path.len(), 11);
        assert_eq!(path[0], rep);
        for r in &path {
            for g in r.generators() {
                assert!(g.log_abs_det().unwrap().1.abs() < 1e-12);
            }
        }
        let flat = perturb_path(&rep, 0.0, 7, 5).unwrap();
        for r in &flat {
            for (g, g0) in r.generators().iter().zip(rep.generators()) {
                assert!(g.relative_distance(g0) < 1e-14);
            }
        }
        assert_eq!(perturb_path(&rep, 0.2, 7, 5), Err(Error::InvalidMagnitude(0.2)));
        assert_eq!(perturb_path(&rep, 0.05, 7, 3).unwrap(), perturb_path(&rep, 0.05, 7, 3).unwrap());
    }
}
