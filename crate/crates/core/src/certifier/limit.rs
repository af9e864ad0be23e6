use std::collections::HashSet;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::plucker_point;
use crate::linalg::{
    condition_number, proximality_report_with, singular_values_sorted, Subspace, DEFAULT_COND_THRESHOLD,
    DEFAULT_EPS_GAP,
};
use crate::words::{enumerate_ball, Representation, Word};

/// Relative singular-value cutoff for the span rank of Plücker images.
pub const SPAN_CUTOFF: f64 = 1e-8;

/// One boundary point `γ^±` with the planes `ξ^k` and `ξ^{d-k}` assigned to it.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitPoint {
    /// `w+` or `w-` for a ball word `w`.
    pub label: String,
    pub word: Word,
    /// Attracting `k`-plane of `ρ(γ)` (of `ρ(γ)^{-1}` for `γ^-`).
    pub xi_k: Subspace,
    /// Attracting `(d-k)`-plane of the same element.
    pub xi_dk: Subspace,
    pub dynamics_preserving: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairFailure {
    pub x: String,
    pub y: String,
    pub condition: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitSampleSet {
    pub k: usize,
    pub radius: usize,
    pub points: Vec<LimitPoint>,
    /// Ordered pairs `(x, y)`, `x ≠ y`, audited.
    pub n_pairs: usize,
    pub failures: Vec<PairFailure>,
    /// Largest condition number of `[ξ^k(x) | ξ^{d-k}(y)]` over audited pairs.
    pub max_condition: f64,
    /// Rank of the Plücker images `{ξ^k(x)}` in `∧^k R^d`.
    pub span_rank: usize,
    pub span_ambient: usize,
}

impl LimitSampleSet {
    pub fn all_transverse(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn limit_map_sample(rep: &Representation, k: usize, radius: usize) -> Result<LimitSampleSet> {
    limit_map_sample_with(rep, k, radius, DEFAULT_EPS_GAP, DEFAULT_COND_THRESHOLD)
}

/// Samples the limit maps on the axes of primitive, cyclically reduced ball
/// words (one per cyclic class up to inversion) and audits transversality.
pub fn limit_map_sample_with(
    rep: &Representation,
    k: usize,
    radius: usize,
    eps_gap: f64,
    cond_threshold: f64,
) -> Result<LimitSampleSet> {
    let d = rep.dim();
    if k == 0 || k >= d {
        return Err(Error::InvalidIndex(format!("k = {k} for dimension {d}")));
    }
    if radius < 2 {
        return Err(Error::InvalidParams(format!("limit sampling needs radius >= 2, got {radius}")));
    }
    let ball = enumerate_ball(rep.presentation(), radius)?;
    let mut seen = HashSet::new();
    let candidates: Vec<&Word> = ball
        .words()
        .iter()
        .filter(|w| !w.is_empty() && w.is_cyclically_reduced() && w.is_primitive())
        .filter(|w| seen.insert(w.cyclic_key()))
        .collect();

    let per_word = candidates
        .par_iter()
        .map(|w| -> Result<Vec<LimitPoint>> {
            let g = rep.evaluate(w)?;
            let g_inv = g.inverse()?;
            let plus_k = proximality_report_with(&g, k, eps_gap)?;
            let plus_dk = proximality_report_with(&g, d - k, eps_gap)?;
            let minus_k = proximality_report_with(&g_inv, k, eps_gap)?;
            let minus_dk = proximality_report_with(&g_inv, d - k, eps_gap)?;
            let mut out = Vec::new();
            for (sign, rk, rdk) in [("+", plus_k, plus_dk), ("-", minus_k, minus_dk)] {
                if let (Some(xi_k), Some(xi_dk)) = (rk.attracting_plane, rdk.attracting_plane) {
                    out.push(LimitPoint {
                        label: format!("{w}{sign}"),
                        word: (*w).clone(),
                        xi_k,
                        xi_dk,
                        dynamics_preserving: rk.is_proximal,
                    });
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<LimitPoint> = per_word.into_iter().flatten().collect();
    if points.is_empty() {
        return Err(Error::NoProximalElements(k));
    }

    let audits = (0..points.len())
        .into_par_iter()
        .map(|i| -> Result<Vec<(usize, f64, bool)>> {
            let mut row = Vec::with_capacity(points.len());
            for j in 0..points.len() {
                if i == j {
                    continue;
                }
                let (x, y) = (&points[i], &points[j]);
                let mut cat = DMatrix::zeros(d, d);
                cat.columns_mut(0, k).copy_from(x.xi_k.basis());
                cat.columns_mut(k, d - k).copy_from(y.xi_dk.basis());
                let cond = condition_number(&cat)?;
                row.push((j, cond, cond < cond_threshold));
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut n_pairs = 0;
    let mut max_condition: f64 = 0.0;
    let mut failures = Vec::new();
    for (i, row) in audits.iter().enumerate() {
        for &(j, cond, ok) in row {
            n_pairs += 1;
            max_condition = max_condition.max(cond);
            if !ok {
                failures.push(PairFailure { x: points[i].label.clone(), y: points[j].label.clone(), condition: cond });
            }
        }
    }

    let pl = points.iter().map(|p| plucker_point(p.xi_k.basis())).collect::<Result<Vec<_>>>()?;
    let span_ambient = pl[0].coefficients().len();
    let cols: Vec<_> = pl.iter().map(|v| nalgebra::DVector::from_column_slice(v.coefficients())).collect();
    let sv = singular_values_sorted(DMatrix::from_columns(&cols))?;
    let top = sv[0];
    let span_rank = sv.iter().filter(|&&s| s > SPAN_CUTOFF * top).count();

    Ok(LimitSampleSet { k, radius, points, n_pairs, failures, max_condition, span_rank, span_ambient })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{schottky_rep, SchottkyParams};
    use crate::linalg::ScaledMatrix;
    use crate::words::Presentation;

    #[test]
    fn schottky_limit_points_are_transverse() {
        let rep = schottky_rep(&SchottkyParams::standard(2, 3.0)).unwrap();
        let s = limit_map_sample(&rep, 1, 4).unwrap();
        assert!(s.all_transverse());
        assert_eq!(s.span_rank, 2);
        assert!(s.points.iter().all(|p| p.dynamics_preserving));
    }

    #[test]
    fn single_generator_gives_one_pair() {
        let a = ScaledMatrix::from_diagonal(&[3.0, 1.0 / 3.0]).unwrap();
        let rep = Representation::new(Presentation::free(1).unwrap(), vec![a]).unwrap();
        let s = limit_map_sample(&rep, 1, 3).unwrap();
        assert_eq!(s.points.len(), 2);
        assert_eq!(s.n_pairs, 2);
        assert!(s.all_transverse());
    }

    #[test]
    fn elliptic_generator_has_no_samples() {
        let (sn, c) = 0.3f64.sin_cos();
        let a = ScaledMatrix::from_row_slice(2, &[c, -sn, sn, c]).unwrap();
        let rep = Representation::new(Presentation::free(1).unwrap(), vec![a]).unwrap();
        assert_eq!(limit_map_sample(&rep, 1, 2), Err(Error::NoProximalElements(1)));
    }
}
