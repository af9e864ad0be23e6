//! Exterior powers: compound matrices, Plücker coordinates and the wedge
//! pairing on middle-degree forms.
//!
//! The basis of `∧^k R^d` is indexed by sorted `k`-subsets of `{0..d}` in
//! lexicographic order. Signs of `e_I ∧ e_J` follow the parity of the
//! permutation that sorts the concatenation `I ++ J`.

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{ScaledMatrix, Subspace};

/// Largest exterior-power dimension a compound matrix may have.
pub const MAX_COMPOUND_DIM: usize = 10_000;

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// Lexicographically ordered sorted `k`-subsets of `{0, …, d-1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiIndexBasis {
    d: usize,
    k: usize,
    indices: Vec<Vec<usize>>,
    position: HashMap<Vec<usize>, usize>,
}

impl MultiIndexBasis {
    pub fn new(d: usize, k: usize) -> Self {
        let mut indices = Vec::with_capacity(binomial(d, k));
        let mut current: Vec<usize> = (0..k).collect();
        if k <= d {
            loop {
                indices.push(current.clone());
                // advance to the next subset in lex order
                let mut i = k;
                while i > 0 && current[i - 1] == d - k + i - 1 {
                    i -= 1;
                }
                if i == 0 {
                    break;
                }
                current[i - 1] += 1;
                for j in i..k {
                    current[j] = current[j - 1] + 1;
                }
            }
        }
        let position = indices.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        MultiIndexBasis { d, k, indices, position }
    }

    pub fn ambient(&self) -> usize {
        self.d
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[Vec<usize>] {
        &self.indices
    }

    pub fn position(&self, subset: &[usize]) -> Option<usize> {
        self.position.get(subset).copied()
    }

    /// For each basis subset `I`, the position of its complement in the
    /// degree `d-k` basis and the sign of `e_I ∧ e_{I^c}` against `e_0 ∧ … ∧ e_{d-1}`.
    fn complement_pairing(&self) -> Vec<(usize, f64)> {
        let dual = MultiIndexBasis::new(self.d, self.d - self.k);
        self.indices
            .iter()
            .map(|subset| {
                let comp: Vec<usize> = (0..self.d).filter(|i| !subset.contains(i)).collect();
                (dual.position(&comp).expect("complement is a basis subset"), merge_sign(subset, &comp))
            })
            .collect()
    }
}

/// Sign of the permutation sorting the concatenation of two disjoint sorted index lists.
fn merge_sign(left: &[usize], right: &[usize]) -> f64 {
    let inversions: usize = left.iter().map(|&i| right.iter().filter(|&&j| j < i).count()).sum();
    if inversions.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Determinant of a small dense matrix by LU with partial pivoting (row-major, destroyed).
fn small_det(a: &mut [f64], n: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col * n + col].abs();
        for r in col + 1..n {
            let v = a[r * n + col].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if piv != col {
            for c in 0..n {
                a.swap(col * n + c, piv * n + c);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det *= p;
        for r in col + 1..n {
            let f = a[r * n + col] / p;
            if f != 0.0 {
                for c in col + 1..n {
                    a[r * n + c] -= f * a[col * n + c];
                }
            }
        }
    }
    det
}

fn minor(m: &DMatrix<f64>, rows: &[usize], cols: &[usize], scratch: &mut Vec<f64>) -> f64 {
    let k = rows.len();
    scratch.clear();
    for &r in rows {
        for &c in cols {
            scratch.push(m[(r, c)]);
        }
    }
    small_det(scratch, k)
}

/// The induced action `∧^k g` on `∧^k R^d`: entry `(I, J)` is the minor of `g`
/// on rows `I` and columns `J`.
pub fn compound_matrix(g: &ScaledMatrix, k: usize) -> Result<ScaledMatrix> {
    let d = g.dim();
    if k == 0 || k >= d {
        return Err(Error::InvalidIndex(format!("exterior degree {k} for dimension {d}")));
    }
    let n = binomial(d, k);
    if n > MAX_COMPOUND_DIM {
        return Err(Error::ResourceLimit(format!("C({d},{k}) = {n} exceeds {MAX_COMPOUND_DIM}")));
    }
    let basis = MultiIndexBasis::new(d, k);
    let e = g.entries();
    let mut out = DMatrix::zeros(n, n);
    let mut scratch = Vec::with_capacity(k * k);
    for (i, rows) in basis.indices().iter().enumerate() {
        for (j, cols) in basis.indices().iter().enumerate() {
            out[(i, j)] = minor(e, rows, cols, &mut scratch);
        }
    }
    ScaledMatrix::from_parts(out, k as f64 * g.log_scale())
}

/// An element of `∧^k R^d` in the lexicographic multi-index basis.
#[derive(Clone, Debug, PartialEq)]
pub struct ExteriorVector {
    d: usize,
    k: usize,
    coeffs: Vec<f64>,
}

impl ExteriorVector {
    pub fn new(d: usize, k: usize, coeffs: Vec<f64>) -> Result<Self> {
        if k > d || coeffs.len() != binomial(d, k) {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for degree {k} in dimension {d}",
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|x| !x.is_finite()) {
            return Err(Error::Format("non-finite exterior coefficient".into()));
        }
        Ok(ExteriorVector { d, k, coeffs })
    }

    /// `e_{i_1} ∧ … ∧ e_{i_k}` for sorted 0-based indices.
    pub fn basis_vector(d: usize, subset: &[usize]) -> Result<Self> {
        let basis = MultiIndexBasis::new(d, subset.len());
        let pos = basis
            .position(subset)
            .ok_or_else(|| Error::InvalidIndex(format!("{subset:?} is not a sorted subset of 0..{d}")))?;
        let mut coeffs = vec![0.0; basis.len()];
        coeffs[pos] = 1.0;
        Ok(ExteriorVector { d, k: subset.len(), coeffs })
    }

    pub fn ambient(&self) -> usize {
        self.d
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Unit representative of the projective class.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::RankDeficient);
        }
        Ok(ExteriorVector { d: self.d, k: self.k, coeffs: self.coeffs.iter().map(|c| c / n).collect() })
    }

    /// Applies a compound matrix of matching size.
    pub fn apply(&self, compound: &ScaledMatrix) -> Result<Self> {
        if compound.dim() != self.coeffs.len() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} compound on a vector of length {}",
                compound.dim(),
                compound.dim(),
                self.coeffs.len()
            )));
        }
        let v = nalgebra::DVector::from_column_slice(&self.coeffs);
        let out = compound.entries() * v * compound.log_scale().exp();
        ExteriorVector::new(self.d, self.k, out.iter().copied().collect())
    }

    /// Sine of the angle between the projective classes of two vectors.
    pub fn projective_distance(&self, other: &ExteriorVector) -> f64 {
        let (na, nb) = (self.norm(), other.norm());
        let dot: f64 = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).sum::<f64>() / (na * nb);
        // residual of the unit vector a after projecting onto b; avoids the
        // sqrt(1 - c²) cancellation near zero angle
        let r2: f64 = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (a / na - dot * b / nb).powi(2)).sum();
        r2.sqrt().min(1.0)
    }

    /// Wedge product `self ∧ other`.
    pub fn wedge(&self, other: &ExteriorVector) -> Result<ExteriorVector> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch(format!("ambient {} vs {}", self.d, other.d)));
        }
        let degree = self.k + other.k;
        if degree > self.d {
            return Err(Error::DegreeMismatch(format!("degree {degree} exceeds dimension {}", self.d)));
        }
        let left = MultiIndexBasis::new(self.d, self.k);
        let right = MultiIndexBasis::new(self.d, other.k);
        let target = MultiIndexBasis::new(self.d, degree);
        let mut coeffs = vec![0.0; target.len()];
        for (i, a) in left.indices().iter().enumerate() {
            if self.coeffs[i] == 0.0 {
                continue;
            }
            for (j, b) in right.indices().iter().enumerate() {
                if other.coeffs[j] == 0.0 || b.iter().any(|x| a.contains(x)) {
                    continue;
                }
                let mut merged: Vec<usize> = a.iter().chain(b).copied().collect();
                merged.sort_unstable();
                let pos = target.position(&merged).expect("sorted subset");
                coeffs[pos] += merge_sign(a, b) * self.coeffs[i] * other.coeffs[j];
            }
        }
        ExteriorVector::new(self.d, degree, coeffs)
    }
}

/// Plücker coordinates of the plane spanned by the columns of `columns`
/// (`d x k`): all `k x k` minors, in lexicographic row-subset order.
pub fn plucker_point(columns: &DMatrix<f64>) -> Result<ExteriorVector> {
    let (d, k) = columns.shape();
    Subspace::from_columns(columns.clone())?;
    let basis = MultiIndexBasis::new(d, k);
    let cols: Vec<usize> = (0..k).collect();
    let mut scratch = Vec::with_capacity(k * k);
    let coeffs = basis.indices().iter().map(|rows| minor(columns, rows, &cols, &mut scratch)).collect();
    ExteriorVector::new(d, k, coeffs)
}

/// The hyperplane `{α ∈ ∧^k R^d : α ∧ w = 0}` where `w` is the Plücker point of
/// a `(d-k)`-plane, stored as the linear functional `α ↦ α ∧ w`.
#[derive(Clone, Debug, PartialEq)]
pub struct PluckerHyperplane {
    d: usize,
    k: usize,
    functional: Vec<f64>,
}

impl PluckerHyperplane {
    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn functional(&self) -> &[f64] {
        &self.functional
    }

    /// Coefficient of `e_0 ∧ … ∧ e_{d-1}` in `α ∧ w`.
    pub fn pairing(&self, alpha: &ExteriorVector) -> Result<f64> {
        if alpha.d != self.d || alpha.k != self.k {
            return Err(Error::DegreeMismatch(format!(
                "degree {} vector against a degree {} hyperplane",
                alpha.k, self.k
            )));
        }
        Ok(self.functional.iter().zip(&alpha.coeffs).map(|(f, a)| f * a).sum())
    }

    /// Sine of the angle between `α` and the hyperplane.
    pub fn sin_to(&self, alpha: &ExteriorVector) -> Result<f64> {
        let p = self.pairing(alpha)?;
        let nf = self.functional.iter().map(|x| x * x).sum::<f64>().sqrt();
        Ok((p.abs() / (nf * alpha.norm())).min(1.0))
    }

    pub fn contains(&self, alpha: &ExteriorVector, tol: f64) -> Result<bool> {
        Ok(self.sin_to(alpha)? <= tol)
    }

    /// Orthonormal basis of the hyperplane inside `∧^k R^d`.
    pub fn subspace(&self) -> Result<Subspace> {
        let n = self.functional.len();
        let normal = Subspace::from_columns(DMatrix::from_column_slice(n, 1, &self.functional))?;
        normal.orthogonal_complement()
    }
}

pub fn plucker_hyperplane(columns: &DMatrix<f64>) -> Result<PluckerHyperplane> {
    let (d, m) = columns.shape();
    if m == 0 || m >= d {
        return Err(Error::DimensionMismatch(format!("{m}-plane in R^{d}")));
    }
    let k = d - m;
    let w = plucker_point(columns)?;
    let pairing = MultiIndexBasis::new(d, k).complement_pairing();
    let functional = pairing.iter().map(|&(pos, sign)| sign * w.coeffs[pos]).collect();
    Ok(PluckerHyperplane { d, k, functional })
}

/// `ω_q(a, b)`: the coefficient of `e_0 ∧ … ∧ e_{4q+1}` in `a ∧ b` for
/// `a, b ∈ ∧^{2q+1} R^{4q+2}`.
pub fn symplectic_form(a: &ExteriorVector, b: &ExteriorVector, q: usize) -> Result<f64> {
    let d = 4 * q + 2;
    let k = 2 * q + 1;
    for v in [a, b] {
        if v.d != d || v.k != k {
            return Err(Error::DegreeMismatch(format!(
                "expected degree {k} in dimension {d}, got degree {} in dimension {}",
                v.k, v.d
            )));
        }
    }
    let pairing = MultiIndexBasis::new(d, k).complement_pairing();
    Ok(pairing.iter().enumerate().map(|(i, &(j, sign))| sign * a.coeffs[i] * b.coeffs[j]).sum())
}
