//! Empirical tests of Anosov-type properties on finite balls.
//!
//! Every verdict produced here is a statement about the enumerated ball of
//! radius `R` only: a certificate is evidence, a refutation is exact up to
//! floating-point tolerance.

mod gap;
mod limit;
mod path;
mod pingpong;
mod positivity;

pub use gap::{
    certify_anosov, gap_profile, gap_profiles, least_squares, CertificateEstimate, GapProfile, GapRow, LengthFit,
    QieEstimate, Verdict, Witness, DEFAULT_ELL_MIN, REFUTATION_TOL,
};
pub use limit::{limit_map_sample, limit_map_sample_with, LimitPoint, LimitSampleSet, PairFailure, SPAN_CUTOFF};
pub use path::{track_ell1_along_path, Ell1Step, Ell1Trace, Ell1Verdict};
pub use pingpong::{pingpong_power, pingpong_subgroup, PingPongCertificate};
pub use positivity::{
    scan_positivity, scan_positivity_with, search_positivity_witness, signed_top_product, PositivityReport,
    PositivityRow, PositivityVerdict, PositivityWitness, WitnessSearch,
};

use crate::error::{Error, Result};
use crate::exterior::compound_matrix;
use crate::words::Representation;

/// Default minimum slope for an Anosov certificate.
pub const DEFAULT_ALPHA_MIN: f64 = 0.05;

/// The representation `∧^k ρ`, or `ρ` itself for `k = 1`.
pub fn exterior_power_rep(rep: &Representation, k: usize) -> Result<Representation> {
    let d = rep.dim();
    if k == 0 || k >= d {
        return Err(Error::InvalidIndex(format!("k = {k} for dimension {d}")));
    }
    if k == 1 {
        return Ok(rep.clone());
    }
    rep.map(|g| compound_matrix(g, k))
}
