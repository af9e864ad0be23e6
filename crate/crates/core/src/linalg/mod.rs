//! Spectral primitives on moderate-dimension real matrices.
//!
//! Every matrix is carried as a [`ScaledMatrix`]: a unit-normalized entry
//! array together with the natural logarithm of the factor that scales it
//! back to its true value. Products along long words would otherwise
//! overflow doubles (a length-20 word in the fifth exterior power of a
//! 10x10 representation is already far beyond `f64::MAX`).

mod spectral;
mod subspace;

pub use spectral::{
    confirm_attracting_plane, proximality_report, proximality_report_with, singular_values, spectrum, spectrum_with,
    IterationOutcome, ProximalityReport, SignedEigenvalue, SingularValues, Spectrum,
};
pub(crate) use subspace::singular_values_sorted;
pub use subspace::{condition_number, is_transverse, Subspace, DEFAULT_COND_THRESHOLD};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Default relative tolerance for declaring a strict eigenvalue or singular value gap.
pub const DEFAULT_EPS_GAP: f64 = 1e-8;

const LN_2: f64 = std::f64::consts::LN_2;

/// A square real matrix `exp(log_scale) * entries` whose entries have
/// max-norm in `[1/2, 2]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaledMatrix {
    entries: DMatrix<f64>,
    log_scale: f64,
}

impl ScaledMatrix {
    /// Wraps a square matrix of true values.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        Self::from_parts(matrix, 0.0)
    }

    /// Builds `exp(log_scale) * entries`, renormalizing the entries.
    pub fn from_parts(entries: DMatrix<f64>, log_scale: f64) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "expected a square matrix, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.nrows() == 0 {
            return Err(Error::DimensionMismatch("empty matrix".into()));
        }
        if entries.iter().any(|x| !x.is_finite()) || !log_scale.is_finite() {
            return Err(Error::Format("non-finite matrix entry".into()));
        }
        if entries.iter().all(|&x| x == 0.0) {
            return Err(Error::SingularInput);
        }
        let mut m = ScaledMatrix { entries, log_scale };
        m.renormalize();
        Ok(m)
    }

    /// Row-major constructor for true values.
    pub fn from_row_slice(dim: usize, values: &[f64]) -> Result<Self> {
        if values.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!("{} values for a {dim}x{dim} matrix", values.len())));
        }
        Self::new(DMatrix::from_row_slice(dim, dim, values))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(diag)))
    }

    pub fn identity(dim: usize) -> Self {
        ScaledMatrix { entries: DMatrix::identity(dim, dim), log_scale: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Normalized entries (max-norm in `[1/2, 2]`).
    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    /// True matrix values. Overflows to infinity for very long products.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        &self.entries * self.log_scale.exp()
    }

    /// Rescales entries by an exact power of two so that the max-norm lies in `[1/2, 2]`.
    fn renormalize(&mut self) {
        let max = self.entries.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if max == 0.0 || !max.is_finite() {
            return;
        }
        let e = max.log2().round() as i32;
        if e == 0 {
            return;
        }
        // split so that neither factor over- or underflows
        let half = e / 2;
        let rest = e - half;
        self.entries *= 2f64.powi(-half);
        self.entries *= 2f64.powi(-rest);
        self.log_scale += f64::from(e) * LN_2;
    }

    pub fn mul(&self, other: &ScaledMatrix) -> ScaledMatrix {
        assert_eq!(self.dim(), other.dim(), "matrix product of mismatched dimensions");
        let mut m =
            ScaledMatrix { entries: &self.entries * &other.entries, log_scale: self.log_scale + other.log_scale };
        m.renormalize();
        m
    }

    pub fn try_mul(&self, other: &ScaledMatrix) -> Result<ScaledMatrix> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "product of {}x{} and {}x{}",
                self.dim(),
                self.dim(),
                other.dim(),
                other.dim()
            )));
        }
        Ok(self.mul(other))
    }

    pub fn pow(&self, n: usize) -> ScaledMatrix {
        let mut acc = ScaledMatrix::identity(self.dim());
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn transpose(&self) -> ScaledMatrix {
        ScaledMatrix { entries: self.entries.transpose(), log_scale: self.log_scale }
    }

    pub fn inverse(&self) -> Result<ScaledMatrix> {
        let inv = self.entries.clone().try_inverse().ok_or(Error::SingularInput)?;
        if inv.iter().any(|x| !x.is_finite()) {
            return Err(Error::SingularInput);
        }
        ScaledMatrix::from_parts(inv, -self.log_scale)
    }

    /// Sign and natural log of `|det|` of the true matrix.
    pub fn log_abs_det(&self) -> Result<(f64, f64)> {
        let d = self.dim();
        let lu = self.entries.clone().lu();
        let u = lu.u();
        let mut sign: f64 = lu.p().determinant();
        let mut log_abs = 0.0;
        for i in 0..d {
            let p = u[(i, i)];
            if p == 0.0 || !p.is_finite() {
                return Err(Error::SingularInput);
            }
            sign *= p.signum();
            log_abs += p.abs().ln();
        }
        Ok((sign, log_abs + d as f64 * self.log_scale))
    }

    /// Block-diagonal sum of square matrices.
    pub fn block_diagonal(blocks: &[ScaledMatrix]) -> Result<ScaledMatrix> {
        if blocks.is_empty() {
            return Err(Error::DimensionMismatch("empty block list".into()));
        }
        let total: usize = blocks.iter().map(ScaledMatrix::dim).sum();
        let top = blocks.iter().map(|b| b.log_scale).fold(f64::NEG_INFINITY, f64::max);
        let mut entries = DMatrix::zeros(total, total);
        let mut offset = 0;
        for b in blocks {
            let d = b.dim();
            let factor = (b.log_scale - top).exp();
            entries.view_mut((offset, offset), (d, d)).copy_from(&(&b.entries * factor));
            offset += d;
        }
        ScaledMatrix::from_parts(entries, top)
    }

    /// Largest absolute entrywise difference of the true matrices, relative
    /// to the larger of the two max-norms.
    pub fn relative_distance(&self, other: &ScaledMatrix) -> f64 {
        let top = self.log_scale.max(other.log_scale);
        let a = &self.entries * (self.log_scale - top).exp();
        let b = &other.entries * (other.log_scale - top).exp();
        let scale = a.amax().max(b.amax());
        (a - b).amax() / scale
    }
}

impl std::ops::Mul for &ScaledMatrix {
    type Output = ScaledMatrix;

    fn mul(self, rhs: &ScaledMatrix) -> ScaledMatrix {
        ScaledMatrix::mul(self, rhs)
    }
}

/// Returns `|det g|^{-1/d} g`, which has determinant `±1`.
///
/// Only the scale bookkeeping changes, so every eigenvalue-modulus ratio and
/// singular-value ratio of the input is preserved bit for bit.
pub fn normalize_to_sl(g: &ScaledMatrix) -> Result<ScaledMatrix> {
    let (_, log_abs_det) = g.log_abs_det()?;
    if !log_abs_det.is_finite() {
        return Err(Error::SingularInput);
    }
    Ok(ScaledMatrix { entries: g.entries.clone(), log_scale: g.log_scale - log_abs_det / g.dim() as f64 })
}
