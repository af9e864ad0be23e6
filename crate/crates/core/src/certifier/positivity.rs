use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::exterior_power_rep;
use crate::error::Result;
use crate::linalg::{proximality_report_with, spectrum_with, DEFAULT_EPS_GAP};
use crate::words::{enumerate_ball, Representation};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositivityRow {
    pub word: String,
    pub length: usize,
    /// `log(λ_1/λ_2)` of `∧^k ρ(γ)`.
    pub log_gap_eig: f64,
    pub proximal: bool,
    /// Sign of `ℓ_1(∧^k ρ(γ))`, present for proximal words.
    pub ell1_sign: Option<i8>,
    /// Whether `λ_1` itself is an eigenvalue of `∧^k ρ(γ)`.
    pub semiproximal_positive: bool,
}

/// A proximal element with negative top eigenvalue, re-checked in the base
/// dimension: `ρ(γ)` must be `P_k`-proximal and the product of its `k`
/// largest eigenvalues must be negative.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositivityWitness {
    pub word: String,
    pub length: usize,
    /// `log|ℓ_1|` of the compound.
    pub log_abs_ell1: f64,
    pub reverified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum PositivityVerdict {
    PositivelyProximal,
    NotPositivelyProximal { witness: PositivityWitness },
    NoProximalFound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositivityReport {
    pub k: usize,
    pub radius: usize,
    /// Dimension of `∧^k R^d`.
    pub scanned_dim: usize,
    pub rows: Vec<PositivityRow>,
    pub n_proximal: usize,
    pub n_negative: usize,
    pub verdict: PositivityVerdict,
    /// Words whose compound image is not positively semi-proximal; each one
    /// rules out an invariant properly convex cone.
    pub semiproximal_failures: Vec<String>,
}

pub fn scan_positivity(rep: &Representation, k: usize, radius: usize) -> Result<PositivityReport> {
    scan_positivity_with(rep, k, radius, DEFAULT_EPS_GAP)
}

/// Sign of the product of the `k` largest-modulus eigenvalues of a
/// `P_k`-proximal matrix (conjugate pairs contribute `+`), or `None` if the
/// matrix is not `P_k`-proximal.
pub fn signed_top_product(g: &crate::linalg::ScaledMatrix, k: usize, eps_gap: f64) -> Result<Option<f64>> {
    let report = proximality_report_with(g, k, eps_gap)?;
    if !report.is_proximal {
        return Ok(None);
    }
    let spec = spectrum_with(g, eps_gap)?;
    let sign = spec.normalized_eigenvalues()[..k]
        .iter()
        .filter(|z| z.im == 0.0 || z.im.abs() <= eps_gap * z.norm())
        .fold(1.0, |acc, z| acc * z.re.signum());
    Ok(Some(sign))
}

/// Scans `∧^k ρ` over the ball of radius `R`.
pub fn scan_positivity_with(rep: &Representation, k: usize, radius: usize, eps_gap: f64) -> Result<PositivityReport> {
    let lifted = exterior_power_rep(rep, k)?;
    let ball = enumerate_ball(rep.presentation(), radius)?;
    let images = lifted.evaluate_ball(&ball)?;
    let rows = ball
        .words()
        .par_iter()
        .zip(images.par_iter())
        .map(|(w, g)| {
            let spec = spectrum_with(g, eps_gap)?;
            let log_gap_eig = if spec.log_moduli().len() > 1 { spec.log_gap(1) } else { f64::INFINITY };
            let top = spec.top_signed();
            Ok(PositivityRow {
                word: w.to_string(),
                length: w.len(),
                log_gap_eig,
                proximal: top.is_some(),
                ell1_sign: top.map(|t| if t.is_positive() { 1 } else { -1 }),
                semiproximal_positive: spec.is_semiproximal_positive(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let n_proximal = rows.iter().filter(|r| r.proximal).count();
    let n_negative = rows.iter().filter(|r| r.ell1_sign == Some(-1)).count();
    let semiproximal_failures = rows.iter().filter(|r| !r.semiproximal_positive).map(|r| r.word.clone()).collect();
    let verdict = match rows.iter().position(|r| r.ell1_sign == Some(-1)) {
        Some(i) => {
            let w = &ball.words()[i];
            let base = rep.evaluate(w)?;
            let reverified = signed_top_product(&base, k, eps_gap)? == Some(-1.0);
            let log_abs_ell1 = spectrum_with(&images[i], eps_gap)?.log_moduli()[0];
            PositivityVerdict::NotPositivelyProximal {
                witness: PositivityWitness { word: w.to_string(), length: w.len(), log_abs_ell1, reverified },
            }
        }
        None if n_proximal == 0 => PositivityVerdict::NoProximalFound,
        None => PositivityVerdict::PositivelyProximal,
    };
    Ok(PositivityReport {
        k,
        radius,
        scanned_dim: lifted.dim(),
        rows,
        n_proximal,
        n_negative,
        verdict,
        semiproximal_failures,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessSearch {
    /// Radii scanned, in order.
    pub radii: Vec<usize>,
    /// Report at the last radius scanned.
    pub report: PositivityReport,
}

/// Scans radii `1, 2, …, max_radius` and stops at the first negative witness.
pub fn search_positivity_witness(
    rep: &Representation,
    k: usize,
    max_radius: usize,
    eps_gap: f64,
) -> Result<WitnessSearch> {
    let mut radii = Vec::new();
    let mut last = None;
    for r in 1..=max_radius.max(1) {
        radii.push(r);
        let report = scan_positivity_with(rep, k, r, eps_gap)?;
        let found = matches!(report.verdict, PositivityVerdict::NotPositivelyProximal { .. });
        last = Some(report);
        if found {
            break;
        }
    }
    Ok(WitnessSearch { radii, report: last.expect("at least one radius") })
}
