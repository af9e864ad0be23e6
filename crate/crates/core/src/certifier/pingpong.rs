use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{proximality_report, singular_values, spectrum, ScaledMatrix, Subspace};
use crate::words::{Presentation, Representation, Word};

/// Attracting points closer than this to a repelling hyperplane count as non-transverse.
const TRANSVERSE_TOL: f64 = 1e-8;
const BISECTION_STEPS: usize = 60;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PingPongCertificate {
    pub power: usize,
    /// Radius (sine metric) of the attracting neighborhoods.
    pub delta: f64,
    /// Smallest distance from an attracting point to a repelling hyperplane
    /// it must avoid.
    pub separation: f64,
}

/// Projective dynamics of one of the four ping-pong players.
struct Player {
    matrix: ScaledMatrix,
    point: nalgebra::DVector<f64>,
    hyperplane: Subspace,
    /// `sin ∠(point, hyperplane)`.
    c: f64,
}

fn player(f: ScaledMatrix) -> Result<Player> {
    let r = proximality_report(&f, 1)?;
    if !r.is_biproximal {
        return Err(Error::NotBiproximal);
    }
    let point = r.attracting_plane.expect("proximal").basis().column(0).into_owned();
    let hyperplane = r.repelling_plane.expect("proximal");
    let c = hyperplane.sin_to_vector(&point);
    Ok(Player { matrix: f, point, hyperplane, c })
}

/// Sine distance from `p` to the hyperplane, computed via its unit normal.
fn sin_to_hyperplane(p: &nalgebra::DVector<f64>, h: &Subspace) -> f64 {
    h.sin_to_vector(p)
}

/// Upper bound for the sine distance from `f^N x` to the attracting point,
/// over unit `x` at sine distance `≥ δ` from the repelling hyperplane.
///
/// Writing `x = αp + h` with `h ∈ H`, one has `|α| = sin∠(x,H)/c` and
/// `|h| ≤ sqrt(1-s²) + |α| sqrt(1-c²)`, so
/// `d(f^N x, p) ≤ (‖f^N|_H‖/|ℓ_1(f^N)|) (c sqrt(1-δ²)/δ + sqrt(1-c²))`.
fn contraction_bound(log_ratio: f64, c: f64, delta: f64) -> f64 {
    log_ratio.exp() * (c * (1.0 - delta * delta).sqrt() / delta + (1.0 - c * c).sqrt())
}

/// `log(‖f^N|_H‖ / |ℓ_1(f^N)|)`.
fn log_restricted_ratio(fp: &Player, n: usize) -> Result<f64> {
    let f_n = fp.matrix.pow(n);
    let b = fp.hyperplane.basis();
    let restricted = b.transpose() * f_n.entries() * b;
    let norm = ScaledMatrix::from_parts(restricted, f_n.log_scale())?;
    let log_norm = singular_values(&norm).map(|s| s.log_values()[0]).unwrap_or(f64::NEG_INFINITY);
    Ok(log_norm - spectrum(&f_n)?.log_moduli()[0])
}

/// Smallest `δ ∈ (0, 1]` with `bound(δ) ≤ δ`, by bisection.
fn minimal_delta(log_ratio: f64, c: f64) -> Option<f64> {
    if contraction_bound(log_ratio, c, 1.0) > 1.0 {
        return None;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if contraction_bound(log_ratio, c, mid) <= mid {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Smallest `N ≤ max_n` for which `g^{±N}` and `(t g t⁻¹)^{±N}` play
/// projective ping-pong: each maps the complement of the `δ`-neighborhood of
/// its repelling hyperplane into the `δ`-neighborhood of its attracting
/// point, and every attracting neighborhood avoids the repelling
/// neighborhoods of all players except its own inverse.
pub fn pingpong_power(rep: &Representation, g: &Word, t: &Word, max_n: usize) -> Result<Option<PingPongCertificate>> {
    let gm = rep.evaluate(g)?;
    let tm = rep.evaluate(t)?;
    let h = tm.mul(&gm).mul(&tm.inverse()?);
    // order: g, g⁻¹, h, h⁻¹; player i has inverse i ^ 1
    let players = [player(gm.clone())?, player(gm.inverse()?)?, player(h.clone())?, player(h.inverse()?)?];

    let mut separation = f64::INFINITY;
    for (i, p) in players.iter().enumerate() {
        for (j, q) in players.iter().enumerate() {
            if j == i ^ 1 {
                continue;
            }
            let s = sin_to_hyperplane(&p.point, &q.hyperplane);
            if s < TRANSVERSE_TOL {
                return Err(Error::TransversalityFailure(format!(
                    "attracting point of player {i} lies on the repelling hyperplane of player {j}"
                )));
            }
            separation = separation.min(s);
        }
    }

    for n in 1..=max_n {
        let mut delta: f64 = 0.0;
        let mut ok = true;
        for p in &players {
            match minimal_delta(log_restricted_ratio(p, n)?, p.c) {
                Some(d) => delta = delta.max(d),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        // a point within sine distance δ of p is within chord 2 sin(asin(δ)/2) of ±p
        if ok && separation > delta + 2.0 * (delta.asin() / 2.0).sin() {
            return Ok(Some(PingPongCertificate { power: n, delta, separation }));
        }
    }
    Ok(None)
}

/// The free subgroup `⟨g^N, t g^N t⁻¹⟩` as a rank-2 representation.
pub fn pingpong_subgroup(rep: &Representation, g: &Word, t: &Word, n: usize) -> Result<Representation> {
    let gn = rep.evaluate(&g.pow(n))?;
    let tm = rep.evaluate(t)?;
    let hn = tm.mul(&gn).mul(&tm.inverse()?);
    Representation::new(Presentation::free(2)?, vec![gn, hn])
}
