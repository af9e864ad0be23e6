use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Ball, Letter, Presentation, Word};
use crate::error::{Error, Result};
use crate::linalg::{singular_values_sorted, ScaledMatrix};

/// Largest operator-norm distance of the relator image from the identity
/// accepted for a surface-group representation.
pub const RELATOR_TOLERANCE: f64 = 1e-6;

/// A homomorphism from a presentation to `GL(d, R)`, given by generator images.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RepresentationDocument", into = "RepresentationDocument")]
pub struct Representation {
    presentation: Presentation,
    dim: usize,
    generators: Vec<ScaledMatrix>,
    inverses: Vec<ScaledMatrix>,
    relator_defect: f64,
}

impl Representation {
    pub fn new(presentation: Presentation, generators: Vec<ScaledMatrix>) -> Result<Self> {
        presentation.validate()?;
        if generators.len() != presentation.num_generators() {
            return Err(Error::DimensionMismatch(format!(
                "{} generator images for a presentation with {} generators",
                generators.len(),
                presentation.num_generators()
            )));
        }
        let dim = generators[0].dim();
        if generators.iter().any(|g| g.dim() != dim) {
            return Err(Error::DimensionMismatch("generator images of different sizes".into()));
        }
        let inverses = generators.iter().map(ScaledMatrix::inverse).collect::<Result<Vec<_>>>()?;
        let mut rep = Representation { presentation, dim, generators, inverses, relator_defect: 0.0 };
        let relator = presentation.relator();
        if !relator.is_empty() {
            let r = rep.evaluate(&relator)?.to_matrix() - DMatrix::identity(dim, dim);
            let defect = singular_values_sorted(r).map_or(f64::INFINITY, |s| s[0]);
            if defect.is_nan() || defect >= RELATOR_TOLERANCE {
                return Err(Error::RelatorDefect(defect));
            }
            rep.relator_defect = defect;
        }
        Ok(rep)
    }

    pub fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[ScaledMatrix] {
        &self.generators
    }

    /// Operator-norm distance of the relator image from the identity (0 for free groups).
    pub fn relator_defect(&self) -> f64 {
        self.relator_defect
    }

    pub fn letter_image(&self, l: Letter) -> &ScaledMatrix {
        let j = l.generator_index();
        if l.is_inverse() {
            &self.inverses[j]
        } else {
            &self.generators[j]
        }
    }

    /// Images of all letters, indexed by letter code.
    pub fn letter_images(&self) -> Vec<ScaledMatrix> {
        self.presentation.alphabet().into_iter().map(|l| self.letter_image(l).clone()).collect()
    }

    /// Product of the letter images along the word.
    pub fn evaluate(&self, w: &Word) -> Result<ScaledMatrix> {
        let alphabet = 2 * self.presentation.num_generators();
        let mut acc = ScaledMatrix::identity(self.dim);
        for &l in w.letters() {
            if l.code() >= alphabet {
                return Err(Error::DimensionMismatch(format!(
                    "letter {} outside the {}",
                    l.to_char(),
                    self.presentation.describe()
                )));
            }
            acc = acc.mul(self.letter_image(l));
        }
        Ok(acc)
    }

    /// Images of every ball word, in ball order, one multiplication per word.
    pub fn evaluate_ball(&self, ball: &Ball) -> Result<Vec<ScaledMatrix>> {
        if ball.presentation() != &self.presentation {
            return Err(Error::PresentationMismatch);
        }
        Ok(evaluate_ball_with(ball, &self.letter_images()))
    }

    /// Applies a homomorphism `GL(d) → GL(d')` to every generator image.
    /// Inverses are recomputed from the new images, exactly as a reload from
    /// JSON would, so saved and in-memory representations scan identically.
    pub fn map<F>(&self, f: F) -> Result<Representation>
    where
        F: Fn(&ScaledMatrix) -> Result<ScaledMatrix>,
    {
        let generators = self.generators.iter().map(&f).collect::<Result<Vec<_>>>()?;
        Self::new(self.presentation, generators)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("representation serializes")
    }

    pub fn from_json(s: &str) -> Result<Representation> {
        serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))
    }
}

/// Prefix-cached evaluation of a ball from explicit letter images (indexed by
/// letter code). Shells are evaluated in parallel; the output order is the
/// ball order regardless of scheduling.
pub(crate) fn evaluate_ball_with(ball: &Ball, images: &[ScaledMatrix]) -> Vec<ScaledMatrix> {
    let dim = images[0].dim();
    let mut out = Vec::with_capacity(ball.len());
    out.push(ScaledMatrix::identity(dim));
    for l in 1..=ball.radius() {
        let shell: Vec<ScaledMatrix> = ball
            .shell_range(l)
            .into_par_iter()
            .map(|i| {
                let last = *ball.words()[i].letters().last().expect("nonempty word");
                out[ball.parent(i).expect("has parent")].mul(&images[last.code()])
            })
            .collect();
        out.extend(shell);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixDocument {
    /// Row-major normalized entries.
    pub entries: Vec<f64>,
    pub log_scale: f64,
}

/// On-disk form of a representation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepresentationDocument {
    pub presentation: Presentation,
    pub dim: usize,
    pub generators: Vec<MatrixDocument>,
}

impl From<Representation> for RepresentationDocument {
    fn from(rep: Representation) -> Self {
        let generators = rep
            .generators
            .iter()
            .map(|g| MatrixDocument {
                entries: g.entries().transpose().iter().copied().collect(),
                log_scale: g.log_scale(),
            })
            .collect();
        RepresentationDocument { presentation: rep.presentation, dim: rep.dim, generators }
    }
}

impl TryFrom<RepresentationDocument> for Representation {
    type Error = Error;

    fn try_from(doc: RepresentationDocument) -> Result<Self> {
        let d = doc.dim;
        let generators = doc
            .generators
            .into_iter()
            .map(|m| {
                if m.entries.len() != d * d {
                    return Err(Error::Format(format!("{} entries for dimension {d}", m.entries.len())));
                }
                ScaledMatrix::from_parts(DMatrix::from_row_slice(d, d, &m.entries), m.log_scale)
            })
            .collect::<Result<Vec<_>>>()?;
        Representation::new(doc.presentation, generators)
    }
}
