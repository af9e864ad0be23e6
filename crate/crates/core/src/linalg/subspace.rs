use nalgebra::DMatrix;

use super::ScaledMatrix;
use crate::error::{Error, Result};

/// Default condition-number threshold below which two complementary planes count as transverse.
pub const DEFAULT_COND_THRESHOLD: f64 = 1e8;

const RANK_CUTOFF: f64 = 1e-12;

/// A linear subspace of `R^d` carried as an orthonormal basis (columns).
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    basis: DMatrix<f64>,
}

// SVDs go through faer: nalgebra's bidiagonal SVD loses orthogonality on
// rank-deficient and strongly graded input, which is exactly what factor
// polynomials and long word products look like.
fn to_faer(m: &DMatrix<f64>) -> faer::Mat<f64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Singular values sorted nonincreasing together with the matching left singular vectors.
pub(crate) fn sorted_svd(m: DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::SvdFailure);
    }
    let svd = to_faer(&m).thin_svd().map_err(|_| Error::SvdFailure)?;
    let (u, s) = (svd.U(), svd.S().column_vector());
    let mut order: Vec<usize> = (0..s.nrows()).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));
    let values = order.iter().map(|&i| s[i]).collect();
    let cols = DMatrix::from_fn(u.nrows(), order.len(), |i, c| u[(i, order[c])]);
    Ok((values, cols))
}

pub(crate) fn singular_values_sorted(m: DMatrix<f64>) -> Result<Vec<f64>> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::SvdFailure);
    }
    let mut v = to_faer(&m).singular_values().map_err(|_| Error::SvdFailure)?;
    v.sort_by(|a, b| b.total_cmp(a));
    Ok(v)
}

impl Subspace {
    /// Span of the given columns. Fails with `RankDeficient` if they are dependent.
    pub fn from_columns(columns: DMatrix<f64>) -> Result<Self> {
        let (d, k) = columns.shape();
        if k == 0 || k > d {
            return Err(Error::DimensionMismatch(format!("{k} columns in R^{d}")));
        }
        if columns.iter().any(|x| !x.is_finite()) {
            return Err(Error::RankDeficient);
        }
        let (values, u) = sorted_svd(columns)?;
        if values[0] == 0.0 || values[k - 1] <= RANK_CUTOFF * values[0] {
            return Err(Error::RankDeficient);
        }
        Ok(Subspace { basis: u.columns(0, k).into_owned() })
    }

    /// Span of the leading `k` left singular vectors of `m`.
    pub(crate) fn leading_range(m: DMatrix<f64>, k: usize) -> Result<Self> {
        let (_, u) = sorted_svd(m)?;
        Ok(Subspace { basis: u.columns(0, k).into_owned() })
    }

    /// Coordinate plane spanned by `e_i` for the given 0-based indices.
    pub fn coordinate(ambient: usize, indices: &[usize]) -> Result<Self> {
        let mut m = DMatrix::zeros(ambient, indices.len());
        for (c, &i) in indices.iter().enumerate() {
            if i >= ambient {
                return Err(Error::InvalidIndex(format!("coordinate {i} in R^{ambient}")));
            }
            m[(i, c)] = 1.0;
        }
        Self::from_columns(m)
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn orthogonal_complement(&self) -> Result<Subspace> {
        let d = self.ambient_dim();
        let k = self.dim();
        if k == d {
            return Err(Error::DimensionMismatch("complement of the whole space".into()));
        }
        let proj = DMatrix::identity(d, d) - &self.basis * self.basis.transpose();
        Self::leading_range(proj, d - k)
    }

    /// Sine of the largest principal angle between two subspaces of equal dimension.
    pub fn sin_distance(&self, other: &Subspace) -> Result<f64> {
        if self.dim() != other.dim() || self.ambient_dim() != other.ambient_dim() {
            return Err(Error::DimensionMismatch(format!("{}-plane vs {}-plane", self.dim(), other.dim())));
        }
        let residual = &other.basis - &self.basis * (self.basis.transpose() * &other.basis);
        Ok(singular_values_sorted(residual)?[0].min(1.0))
    }

    /// Sine of the angle between a nonzero vector and this subspace.
    pub fn sin_to_vector(&self, v: &nalgebra::DVector<f64>) -> f64 {
        let n = v.norm();
        let residual = v - &self.basis * (self.basis.transpose() * v);
        (residual.norm() / n).min(1.0)
    }

    /// Image `g V`, re-orthonormalized.
    pub fn transform(&self, g: &ScaledMatrix) -> Result<Subspace> {
        if g.dim() != self.ambient_dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix acting on R^{}",
                g.dim(),
                g.dim(),
                self.ambient_dim()
            )));
        }
        Self::from_columns(g.entries() * &self.basis)
    }
}

/// Ratio of extreme singular values; infinite for singular input.
pub fn condition_number(m: &DMatrix<f64>) -> Result<f64> {
    let v = singular_values_sorted(m.clone())?;
    let last = *v.last().unwrap_or(&0.0);
    if last == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(v[0] / last)
}

/// Whether a `k`-plane and a `(d-k)`-plane are in direct sum, judged by the
/// condition number of the concatenated orthonormal bases.
pub fn is_transverse(v: &Subspace, w: &Subspace, cond_threshold: f64) -> Result<bool> {
    let d = v.ambient_dim();
    if w.ambient_dim() != d || v.dim() + w.dim() != d {
        return Err(Error::DimensionMismatch(format!("{}-plane and {}-plane in R^{d}", v.dim(), w.dim())));
    }
    let mut cat = DMatrix::zeros(d, d);
    cat.columns_mut(0, v.dim()).copy_from(&v.basis);
    cat.columns_mut(v.dim(), w.dim()).copy_from(&w.basis);
    Ok(condition_number(&cat)? < cond_threshold)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_of_rank_one_matrix() {
        // outer product that once came back with a wrong leading vector
        let col = [1.0, 0.3068529495215398, 0.45139280943714166, 0.5237641887387782, -0.10481889577772259];
        let row = [1.0, 0.19088288480509713, -0.8038697560170777, -0.9703486450367956, 0.5593649308174179];
        let m = DMatrix::from_fn(5, 5, |i, j| col[i] * row[j]);
        let r = Subspace::leading_range(m, 1).unwrap();
        let v = nalgebra::DVector::from_column_slice(&col);
        assert!(r.sin_to_vector(&v) < 1e-12);
    }

    #[test]
    fn coordinate_planes_are_transverse() {
        let v = Subspace::coordinate(3, &[0]).unwrap();
        let w = Subspace::coordinate(3, &[1, 2]).unwrap();
        assert!(is_transverse(&v, &w, DEFAULT_COND_THRESHOLD).unwrap());
    }

    #[test]
    fn containment_is_not_transverse() {
        let v = Subspace::coordinate(3, &[0]).unwrap();
        let w = Subspace::coordinate(3, &[0, 1]).unwrap();
        assert!(!is_transverse(&v, &w, DEFAULT_COND_THRESHOLD).unwrap());
    }

    #[test]
    fn nearly_contained_line_fails_default_threshold() {
        let v = Subspace::from_columns(DMatrix::from_column_slice(3, 1, &[1.0, 1e-12, 0.0])).unwrap();
        let w = Subspace::coordinate(3, &[0, 2]).unwrap();
        // condition number of [v | e1 e3] is about 2e12
        let cat = DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 0.0, 1e-12, 0.0, 0.0, 0.0, 0.0, 1.0]);
        assert!(condition_number(&cat).unwrap() > 1e8);
        assert!(!is_transverse(&v, &w, DEFAULT_COND_THRESHOLD).unwrap());
    }

    #[test]
    fn mismatched_dimensions_are_rejected() {
        let v = Subspace::coordinate(3, &[0]).unwrap();
        let w = Subspace::coordinate(3, &[1]).unwrap();
        assert!(matches!(is_transverse(&v, &w, 1e8), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn dependent_columns_are_rank_deficient() {
        let m = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 1.0, 2.0, 0.0, 0.0]);
        assert_eq!(Subspace::from_columns(m), Err(Error::RankDeficient));
    }

    #[test]
    fn complement_and_distance() {
        let v = Subspace::coordinate(3, &[0]).unwrap();
        let c = v.orthogonal_complement().unwrap();
        assert_eq!(c.dim(), 2);
        assert!(c.sin_distance(&Subspace::coordinate(3, &[1, 2]).unwrap()).unwrap() < 1e-14);
        let tilted = Subspace::from_columns(DMatrix::from_column_slice(3, 1, &[1.0, 1.0, 0.0])).unwrap();
        let s = v.sin_distance(&tilted).unwrap();
        assert!((s - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14);
    }
}
