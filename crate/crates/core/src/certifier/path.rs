use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::compound_matrix;
use crate::linalg::{spectrum_with, DEFAULT_EPS_GAP};
use crate::words::{Representation, Word};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ell1Step {
    pub step: usize,
    pub proximal: bool,
    /// `log(λ_1/λ_2)` of `∧^k ρ_t(w)`.
    pub log_gap_eig: f64,
    pub sign: Option<i8>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Ell1Verdict {
    /// Proximal at every step with one sign throughout.
    Constant { sign: i8 },
    /// Proximal at every sample, but the sign differs from the previous step:
    /// by continuity proximality was lost somewhere in between.
    SignChange { step: usize },
    /// Not proximal at the given (first failing) step.
    Inconclusive { step: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ell1Trace {
    pub word: String,
    pub k: usize,
    pub steps: Vec<Ell1Step>,
    pub verdict: Ell1Verdict,
}

/// Follows the sign of `ℓ_1(∧^k ρ_t(w))` along a path of representations.
pub fn track_ell1_along_path(path: &[Representation], w: &Word, k: usize) -> Result<Ell1Trace> {
    if path.is_empty() {
        return Err(Error::InvalidParams("empty path".into()));
    }
    let mut steps = Vec::with_capacity(path.len());
    for (step, rep) in path.iter().enumerate() {
        let g = rep.evaluate(w)?;
        let g = if k == 1 { g } else { compound_matrix(&g, k)? };
        let spec = spectrum_with(&g, DEFAULT_EPS_GAP)?;
        let top = spec.top_signed();
        steps.push(Ell1Step {
            step,
            proximal: top.is_some(),
            log_gap_eig: if g.dim() > 1 { spec.log_gap(1) } else { f64::INFINITY },
            sign: top.map(|t| if t.is_positive() { 1 } else { -1 }),
        });
    }
    let verdict = if let Some(s) = steps.iter().find(|s| !s.proximal) {
        Ell1Verdict::Inconclusive { step: s.step }
    } else if let Some(s) = steps.windows(2).find(|p| p[0].sign != p[1].sign) {
        Ell1Verdict::SignChange { step: s[1].step }
    } else {
        Ell1Verdict::Constant { sign: steps[0].sign.expect("proximal step has a sign") }
    };
    Ok(Ell1Trace { word: w.to_string(), k, steps, verdict })
}
