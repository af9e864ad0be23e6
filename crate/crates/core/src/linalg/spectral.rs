use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use super::subspace::{singular_values_sorted, Subspace};
use super::{ScaledMatrix, DEFAULT_EPS_GAP};
use crate::error::{Error, Result};

/// Singular values `σ_1 ≥ … ≥ σ_d > 0`, stored as natural logarithms.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularValues {
    log_values: Vec<f64>,
}

impl SingularValues {
    pub fn log_values(&self) -> &[f64] {
        &self.log_values
    }

    pub fn values(&self) -> Vec<f64> {
        self.log_values.iter().map(|l| l.exp()).collect()
    }

    pub fn len(&self) -> usize {
        self.log_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_values.is_empty()
    }

    /// `log(σ_k / σ_{k+1})` for 1-based `k`.
    pub fn log_gap(&self, k: usize) -> f64 {
        self.log_values[k - 1] - self.log_values[k]
    }

    /// `log(σ_1 / σ_d)`.
    pub fn log_total_ratio(&self) -> f64 {
        self.log_values[0] - self.log_values[self.log_values.len() - 1]
    }
}

pub fn singular_values(g: &ScaledMatrix) -> Result<SingularValues> {
    let values = singular_values_sorted(g.entries().clone())?;
    let smallest = *values.last().expect("nonempty matrix");
    if smallest.is_nan() || smallest < f64::MIN_POSITIVE {
        return Err(Error::SingularInput);
    }
    Ok(SingularValues { log_values: values.iter().map(|s| s.ln() + g.log_scale()).collect() })
}

/// A real eigenvalue recorded as a sign and a log-modulus.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignedEigenvalue {
    pub sign: f64,
    pub log_abs: f64,
}

impl SignedEigenvalue {
    pub fn value(&self) -> f64 {
        self.sign * self.log_abs.exp()
    }

    pub fn is_positive(&self) -> bool {
        self.sign > 0.0
    }
}

/// Eigenvalues of a matrix sorted by nonincreasing modulus.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    log_moduli: Vec<f64>,
    // eigenvalues of the normalized entries, same order as `log_moduli`
    eigenvalues: Vec<Complex<f64>>,
    log_scale: f64,
    top_signed: Option<SignedEigenvalue>,
    semiproximal_positive: bool,
}

impl Spectrum {
    pub fn log_moduli(&self) -> &[f64] {
        &self.log_moduli
    }

    pub fn moduli(&self) -> Vec<f64> {
        self.log_moduli.iter().map(|l| l.exp()).collect()
    }

    /// Eigenvalues of the normalized entry array; multiply by `exp(log_scale)` for true values.
    pub fn normalized_eigenvalues(&self) -> &[Complex<f64>] {
        &self.eigenvalues
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    /// The signed top eigenvalue `ℓ_1`, present iff it is real and simple in modulus.
    pub fn top_signed(&self) -> Option<SignedEigenvalue> {
        self.top_signed
    }

    /// Whether the top modulus `λ_1` itself occurs as an eigenvalue.
    pub fn is_semiproximal_positive(&self) -> bool {
        self.semiproximal_positive
    }

    /// `log(λ_k / λ_{k+1})` for 1-based `k`.
    pub fn log_gap(&self, k: usize) -> f64 {
        self.log_moduli[k - 1] - self.log_moduli[k]
    }
}

fn is_effectively_real(z: Complex<f64>, eps_gap: f64) -> bool {
    z.im == 0.0 || z.im.abs() <= eps_gap * z.norm()
}

/// Eigenvalues of a real matrix; complex ones come in exact conjugate pairs.
fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    let d = m.nrows();
    if d == 1 {
        return Ok(vec![Complex::new(m[(0, 0)], 0.0)]);
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::EigensolveFailure);
    }
    // nalgebra's real Schur can stall on spectra with many ±λ pairs (typical
    // of compounds), so the eigensolve goes through faer
    let f = faer::Mat::from_fn(d, d, |i, j| m[(i, j)]);
    let raw = f.eigenvalues().map_err(|_| Error::EigensolveFailure)?;
    if raw.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::EigensolveFailure);
    }
    // rebuild pairs as exact conjugates so that factor polynomials stay real
    let upper: Vec<Complex<f64>> = raw.iter().filter(|z| z.im > 0.0).map(|z| Complex::new(z.re, z.im)).collect();
    if raw.iter().filter(|z| z.im < 0.0).count() != upper.len() {
        return Err(Error::EigensolveFailure);
    }
    let mut out: Vec<Complex<f64>> = raw.iter().filter(|z| z.im == 0.0).map(|z| Complex::new(z.re, 0.0)).collect();
    out.extend(upper.iter().flat_map(|z| [*z, z.conj()]));
    Ok(out)
}

pub fn spectrum(g: &ScaledMatrix) -> Result<Spectrum> {
    spectrum_with(g, DEFAULT_EPS_GAP)
}

pub fn spectrum_with(g: &ScaledMatrix, eps_gap: f64) -> Result<Spectrum> {
    let mut eig = eigenvalues(g.entries())?;
    eig.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(b.re.total_cmp(&a.re)).then(b.im.total_cmp(&a.im)));
    let log_moduli: Vec<f64> = eig.iter().map(|z| z.norm().ln() + g.log_scale()).collect();
    let threshold = eps_gap.ln_1p();

    let simple_top = eig.len() == 1 || log_moduli[0] - log_moduli[1] > threshold;
    let top_signed = (simple_top && is_effectively_real(eig[0], eps_gap))
        .then(|| SignedEigenvalue { sign: eig[0].re.signum(), log_abs: log_moduli[0] });

    let semiproximal_positive = eig
        .iter()
        .zip(&log_moduli)
        .any(|(z, &lm)| is_effectively_real(*z, eps_gap) && z.re > 0.0 && log_moduli[0] - lm <= threshold);

    Ok(Spectrum { log_moduli, eigenvalues: eig, log_scale: g.log_scale(), top_signed, semiproximal_positive })
}

/// Proximality data of a matrix at index `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProximalityReport {
    pub k: usize,
    /// `log(λ_k / λ_{k+1})`.
    pub log_gap_eig: f64,
    pub is_proximal: bool,
    /// Proximal, but with gap inside `(1 + ε, 1 + 10ε)`.
    pub is_marginal: bool,
    pub is_biproximal: bool,
    /// Only reported for `k = 1`.
    pub is_positively_proximal: Option<bool>,
    pub top_signed: Option<SignedEigenvalue>,
    /// Sum of the generalized eigenspaces of the `k` largest-modulus eigenvalues.
    pub attracting_plane: Option<Subspace>,
    /// The complementary invariant `(d-k)`-plane.
    pub repelling_plane: Option<Subspace>,
}

impl ProximalityReport {
    pub fn gap_eig(&self) -> f64 {
        self.log_gap_eig.exp()
    }
}

pub fn proximality_report(g: &ScaledMatrix, k: usize) -> Result<ProximalityReport> {
    proximality_report_with(g, k, DEFAULT_EPS_GAP)
}

pub fn proximality_report_with(g: &ScaledMatrix, k: usize, eps_gap: f64) -> Result<ProximalityReport> {
    let d = g.dim();
    if k == 0 || k >= d {
        return Err(Error::InvalidIndex(format!("k = {k} for dimension {d}")));
    }
    let spec = spectrum_with(g, eps_gap)?;
    let threshold = eps_gap.ln_1p();
    let marginal_threshold = (10.0 * eps_gap).ln_1p();
    let log_gap = spec.log_gap(k);
    let is_proximal = log_gap > threshold;
    let is_biproximal = is_proximal && spec.log_gap(d - k) > threshold;
    let (attracting_plane, repelling_plane) = if is_proximal {
        let eig = spec.normalized_eigenvalues();
        let attracting = Subspace::leading_range(factor_polynomial(g.entries(), &eig[k..]), k)?;
        let repelling = Subspace::leading_range(factor_polynomial(g.entries(), &eig[..k]), d - k)?;
        (Some(attracting), Some(repelling))
    } else {
        (None, None)
    };
    let top_signed = if k == 1 { spec.top_signed() } else { None };
    Ok(ProximalityReport {
        k,
        log_gap_eig: log_gap,
        is_proximal,
        is_marginal: is_proximal && log_gap < marginal_threshold,
        is_biproximal,
        is_positively_proximal: (k == 1).then(|| is_proximal && top_signed.is_some_and(|t| t.is_positive())),
        top_signed,
        attracting_plane,
        repelling_plane,
    })
}

/// `∏ (m - z I)` over the given eigenvalues, with conjugate pairs folded into
/// real quadratic factors. By Cayley-Hamilton its range is the sum of the
/// generalized eigenspaces of the remaining eigenvalues.
fn factor_polynomial(m: &DMatrix<f64>, roots: &[Complex<f64>]) -> DMatrix<f64> {
    let d = m.nrows();
    let id = DMatrix::<f64>::identity(d, d);
    let mut acc = id.clone();
    for z in roots {
        if z.im < 0.0 {
            continue;
        }
        let factor = if z.im > 0.0 { m * m - m * (2.0 * z.re) + &id * z.norm_sqr() } else { m - &id * z.re };
        acc = &acc * factor;
        let scale = acc.amax();
        if scale > 0.0 {
            acc /= scale;
        }
    }
    acc
}

/// Result of iterating `g` on a start plane toward its attracting plane.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationOutcome {
    pub converged: bool,
    pub iterations: usize,
    pub final_sin_distance: f64,
}

/// Iterates `g` on `start` and checks convergence to the attracting plane of
/// `report` (sine distance below `tol` within `max_iter` steps).
pub fn confirm_attracting_plane(
    g: &ScaledMatrix,
    report: &ProximalityReport,
    start: &Subspace,
    max_iter: usize,
    tol: f64,
) -> Result<IterationOutcome> {
    let target = report
        .attracting_plane
        .as_ref()
        .ok_or_else(|| Error::InvalidParams("report has no attracting plane".into()))?;
    let mut v = start.clone();
    let mut dist = target.sin_distance(&v)?;
    for it in 1..=max_iter {
        v = v.transform(g)?;
        dist = target.sin_distance(&v)?;
        if dist < tol {
            return Ok(IterationOutcome { converged: true, iterations: it, final_sin_distance: dist });
        }
    }
    Ok(IterationOutcome { converged: false, iterations: max_iter, final_sin_distance: dist })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(v: &[f64]) -> ScaledMatrix {
        ScaledMatrix::from_diagonal(v).unwrap()
    }

    #[test]
    fn identity_singular_values() {
        for d in 1..6 {
            let s = singular_values(&ScaledMatrix::identity(d)).unwrap();
            assert!(s.log_values().iter().all(|l| l.abs() < 1e-15));
        }
    }

    #[test]
    fn diagonal_singular_values() {
        let s = singular_values(&diag(&[3.0, 1.0 / 3.0])).unwrap().values();
        assert!((s[0] - 3.0).abs() < 1e-14 && (s[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn shear_singular_values() {
        // g g^T = [[2,1],[1,1]] has eigenvalues (3 ± √5)/2
        let g = ScaledMatrix::from_row_slice(2, &[1.0, 1.0, 0.0, 1.0]).unwrap();
        let s = singular_values(&g).unwrap().values();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((s[0] - phi).abs() < 1e-14);
        assert!((s[1] - 1.0 / phi).abs() < 1e-14);
    }

    #[test]
    fn singular_input_is_rejected() {
        let g = ScaledMatrix::from_row_slice(2, &[1.0, 2.0, 2.0, 4.0]).unwrap();
        assert_eq!(singular_values(&g), Err(Error::SingularInput));
    }

    #[test]
    fn positive_diagonal_spectrum() {
        let s = spectrum(&diag(&[2.0, 1.0, 0.5])).unwrap();
        let m = s.moduli();
        assert!((m[0] - 2.0).abs() < 1e-14 && (m[1] - 1.0).abs() < 1e-14 && (m[2] - 0.5).abs() < 1e-14);
        assert!((s.top_signed().unwrap().value() - 2.0).abs() < 1e-14);
        assert!(s.is_semiproximal_positive());
    }

    #[test]
    fn negative_top_is_not_semiproximal() {
        let s = spectrum(&diag(&[-2.0, 1.0, -0.5])).unwrap();
        assert!((s.top_signed().unwrap().value() + 2.0).abs() < 1e-14);
        assert!(!s.is_semiproximal_positive());
    }

    #[test]
    fn rotation_has_no_signed_top() {
        let g = ScaledMatrix::from_row_slice(2, &[0.0, -1.0, 1.0, 0.0]).unwrap();
        let s = spectrum(&g).unwrap();
        assert!(s.moduli().iter().all(|m| (m - 1.0).abs() < 1e-14));
        assert_eq!(s.top_signed(), None);
    }

    #[test]
    fn report_on_positive_diagonal() {
        let r = proximality_report(&diag(&[2.0, 1.0, 0.5]), 1).unwrap();
        assert!(r.is_proximal && r.is_biproximal && !r.is_marginal);
        assert_eq!(r.is_positively_proximal, Some(true));
        let e1 = Subspace::coordinate(3, &[0]).unwrap();
        let e23 = Subspace::coordinate(3, &[1, 2]).unwrap();
        assert!(r.attracting_plane.unwrap().sin_distance(&e1).unwrap() < 1e-12);
        assert!(r.repelling_plane.unwrap().sin_distance(&e23).unwrap() < 1e-12);
    }

    #[test]
    fn report_on_negative_top() {
        let r = proximality_report(&diag(&[-2.0, 1.0, -0.5]), 1).unwrap();
        assert!(r.is_proximal);
        assert!((r.top_signed.unwrap().value() + 2.0).abs() < 1e-14);
        assert_eq!(r.is_positively_proximal, Some(false));
    }

    #[test]
    fn report_at_index_two() {
        let r = proximality_report(&diag(&[3.0, 2.0, 1.0]), 2).unwrap();
        assert!(r.is_proximal);
        assert!((r.gap_eig() - 2.0).abs() < 1e-13);
        let e12 = Subspace::coordinate(3, &[0, 1]).unwrap();
        assert!(r.attracting_plane.unwrap().sin_distance(&e12).unwrap() < 1e-12);
        assert_eq!(r.is_positively_proximal, None);
    }

    #[test]
    fn equal_moduli_are_not_proximal() {
        let r = proximality_report(&diag(&[2.0, -2.0, 0.25]), 1).unwrap();
        assert!(!r.is_proximal);
        assert!(r.attracting_plane.is_none());
    }

    #[test]
    fn marginal_gap_is_flagged() {
        let r = proximality_report(&diag(&[1.0 + 5e-8, 1.0, 0.5]), 1).unwrap();
        assert!(r.is_proximal && r.is_marginal);
        let r = proximality_report(&diag(&[1.0 + 5e-9, 1.0, 0.5]), 1).unwrap();
        assert!(!r.is_proximal);
    }

    #[test]
    fn index_out_of_range() {
        assert!(matches!(proximality_report(&diag(&[2.0, 1.0]), 2), Err(Error::InvalidIndex(_))));
    }

    #[test]
    fn iteration_confirms_attracting_line() {
        let g = ScaledMatrix::from_row_slice(3, &[2.0, 1.0, 0.0, 0.0, 1.0, 1.0, 0.5, 0.0, 0.5]).unwrap();
        let r = proximality_report(&g, 1).unwrap();
        let start = Subspace::from_columns(DMatrix::from_column_slice(3, 1, &[0.3, -0.2, 0.9])).unwrap();
        let out = confirm_attracting_plane(&g, &r, &start, 200, 1e-6).unwrap();
        assert!(out.converged, "{out:?}");
    }
}
