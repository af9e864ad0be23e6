//! Numerical toolkit for Anosov representations of free and surface groups.
//!
//! The crate builds explicit matrix representations, enumerates group
//! elements by word length and tests singular-value gap, proximality and
//! positivity properties on the resulting balls. Every verdict is empirical
//! at the enumerated radius.

pub mod certifier;
pub mod constructions;
pub mod error;
pub mod exterior;
pub mod linalg;
pub mod words;

pub use error::{Error, Result};
pub use linalg::ScaledMatrix;

use serde::{Deserialize, Serialize};

/// Numerical thresholds shared by the scans.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative slack for declaring a strict eigenvalue gap.
    pub eps_gap: f64,
    /// Minimum fitted slope for an Anosov certificate.
    pub alpha_min: f64,
    /// Condition-number threshold for transversality.
    pub cond_threshold: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eps_gap: linalg::DEFAULT_EPS_GAP,
            alpha_min: certifier::DEFAULT_ALPHA_MIN,
            cond_threshold: linalg::DEFAULT_COND_THRESHOLD,
        }
    }
}
