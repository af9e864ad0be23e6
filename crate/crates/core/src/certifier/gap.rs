use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::singular_values;
use crate::words::{enumerate_ball, Presentation, Representation};

/// Log gaps below this count as "no gap" for refutation.
pub const REFUTATION_TOL: f64 = 1e-9;

/// Default shortest length entering the lower-envelope fit.
pub const DEFAULT_ELL_MIN: usize = 2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub word: String,
    pub length: usize,
    /// `log(σ_k / σ_{k+1})`.
    pub log_gap: f64,
    /// `log(σ_1 / σ_d)`.
    pub log_total_ratio: f64,
}

/// Singular-value gaps at index `k` for every word of a ball, in shortlex order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapProfile {
    pub presentation: Presentation,
    pub dim: usize,
    pub k: usize,
    pub radius: usize,
    pub rows: Vec<GapRow>,
}

pub fn gap_profile(rep: &Representation, k: usize, radius: usize) -> Result<GapProfile> {
    Ok(gap_profiles(rep, &[k], radius)?.remove(0))
}

/// Profiles for several indices from one ball evaluation and one SVD per word.
pub fn gap_profiles(rep: &Representation, ks: &[usize], radius: usize) -> Result<Vec<GapProfile>> {
    let d = rep.dim();
    if ks.is_empty() {
        return Err(Error::InvalidParams("no gap index requested".into()));
    }
    if let Some(k) = ks.iter().find(|&&k| k == 0 || k >= d) {
        return Err(Error::InvalidIndex(format!("k = {k} for dimension {d}")));
    }
    let ball = enumerate_ball(rep.presentation(), radius)?;
    let images = rep.evaluate_ball(&ball)?;
    let spectra = images.par_iter().map(singular_values).collect::<Result<Vec<_>>>()?;
    Ok(ks
        .iter()
        .map(|&k| GapProfile {
            presentation: *rep.presentation(),
            dim: d,
            k,
            radius,
            rows: ball
                .words()
                .iter()
                .zip(&spectra)
                .map(|(w, s)| GapRow {
                    word: w.to_string(),
                    length: w.len(),
                    log_gap: s.log_gap(k).max(0.0),
                    log_total_ratio: s.log_total_ratio().max(0.0),
                })
                .collect(),
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Certified,
    Refuted,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub word: String,
    pub length: usize,
    pub log_gap: f64,
}

/// Least-squares line through per-length extreme values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthFit {
    pub slope: f64,
    pub intercept: f64,
    /// `(length, value)` pairs used in the fit.
    pub points: Vec<(usize, f64)>,
}

/// Quasi-isometric-embedding check on `log(σ_1/σ_d)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QieEstimate {
    /// Fit of the per-length minima (the `1/C` side).
    pub lower: LengthFit,
    /// Fit of the per-length maxima (the `C` side).
    pub upper: LengthFit,
    pub monotone: bool,
    pub passes: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateEstimate {
    pub k: usize,
    pub radius: usize,
    pub ell_min: usize,
    pub alpha_min: f64,
    pub alpha_hat: f64,
    pub log_c_hat: f64,
    /// Smallest log gap at the maximal length.
    pub min_margin: f64,
    pub per_length_min: Vec<(usize, f64)>,
    pub monotone: bool,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub qie: QieEstimate,
}

/// Slope and intercept of the least-squares line through the points.
pub fn least_squares(points: &[(usize, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    if points.is_empty() {
        return (0.0, 0.0);
    }
    let mx = points.iter().map(|p| p.0 as f64).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 as f64 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return (0.0, my);
    }
    let sxy: f64 = points.iter().map(|p| (p.0 as f64 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

fn per_length<F>(rows: &[GapRow], ell_min: usize, radius: usize, value: F, pick_max: bool) -> Vec<(usize, f64)>
where
    F: Fn(&GapRow) -> f64,
{
    let mut out = Vec::new();
    for l in ell_min..=radius {
        let vals = rows.iter().filter(|r| r.length == l).map(&value);
        let v = if pick_max { vals.fold(f64::NEG_INFINITY, f64::max) } else { vals.fold(f64::INFINITY, f64::min) };
        if v.is_finite() {
            out.push((l, v));
        }
    }
    out
}

/// Nondecreasing over lengths in `[ceil(R/2), R]`.
fn monotone_top_half(points: &[(usize, f64)], radius: usize) -> bool {
    let from = radius.div_ceil(2);
    let top: Vec<f64> = points.iter().filter(|p| p.0 >= from).map(|p| p.1).collect();
    top.windows(2).all(|w| w[1] >= w[0] - 1e-12 * w[0].abs().max(1.0))
}

fn fit(points: Vec<(usize, f64)>) -> LengthFit {
    let (slope, intercept) = least_squares(&points);
    LengthFit { slope, intercept, points }
}

/// Lower-envelope certificate for a gap profile.
pub fn certify_anosov(profile: &GapProfile, alpha_min: f64, ell_min: usize) -> Result<CertificateEstimate> {
    let radius = profile.radius;
    if radius < ell_min + 2 {
        return Err(Error::InsufficientRadius { radius, ell_min });
    }
    let rows = &profile.rows;
    let minima = per_length(rows, ell_min, radius, |r| r.log_gap, false);
    let (slope, log_c_hat) = least_squares(&minima);
    let alpha_hat = slope.max(0.0);
    let min_margin = minima.last().map_or(f64::NEG_INFINITY, |p| p.1);
    let monotone = monotone_top_half(&minima, radius);

    let refuted = rows.iter().any(|r| r.length >= 2 && r.log_gap < REFUTATION_TOL);
    let witness = if refuted {
        rows.iter().find(|r| r.length >= 1 && r.log_gap < REFUTATION_TOL).map(|r| Witness {
            word: r.word.clone(),
            length: r.length,
            log_gap: r.log_gap,
        })
    } else {
        None
    };
    let verdict = if refuted {
        Verdict::Refuted
    } else if alpha_hat >= alpha_min && monotone && min_margin > 0.0 {
        Verdict::Certified
    } else {
        Verdict::Inconclusive
    };

    let lower = fit(per_length(rows, ell_min, radius, |r| r.log_total_ratio, false));
    let upper = fit(per_length(rows, ell_min, radius, |r| r.log_total_ratio, true));
    let qie_monotone = monotone_top_half(&lower.points, radius);
    let qie_margin = lower.points.last().map_or(f64::NEG_INFINITY, |p| p.1);
    let passes = lower.slope >= alpha_min && qie_monotone && qie_margin > 0.0 && upper.slope.is_finite();
    Ok(CertificateEstimate {
        k: profile.k,
        radius,
        ell_min,
        alpha_min,
        alpha_hat,
        log_c_hat,
        min_margin,
        per_length_min: minima,
        monotone,
        verdict,
        witness,
        qie: QieEstimate { lower, upper, monotone: qie_monotone, passes },
    })
}
