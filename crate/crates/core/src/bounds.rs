use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BoundsError {
    #[error("lower and upper bounds have different lengths ({lower} vs {upper})")]
    LengthMismatch { lower: usize, upper: usize },
    #[error("dimension {index}: lower bound {lower} exceeds upper bound {upper}")]
    Inverted { index: usize, lower: f64, upper: f64 },
    #[error("dimension {index}: bound is not finite")]
    NonFinite { index: usize },
    #[error("expected a vector of length {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// Per-dimension box `[lower, upper]`. Degenerate intervals (`lower == upper`) are allowed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, BoundsError> {
        if lower.len() != upper.len() {
            return Err(BoundsError::LengthMismatch {
                lower: lower.len(),
                upper: upper.len(),
            });
        }
        for (index, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(BoundsError::NonFinite { index });
            }
            if lo > hi {
                return Err(BoundsError::Inverted {
                    index,
                    lower: lo,
                    upper: hi,
                });
            }
        }
        Ok(Self { lower, upper })
    }

    /// The same interval repeated `dim` times.
    pub fn uniform(dim: usize, lower: f64, upper: f64) -> Result<Self, BoundsError> {
        Self::new(vec![lower; dim], vec![upper; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&v, (&lo, &hi))| lo <= v && v <= hi)
    }

    /// Projects `x` onto the box in place. NaN components are mapped to the lower bound.
    pub fn clamp_in_place(&self, x: &mut [f64]) {
        for (v, (&lo, &hi)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = if v.is_nan() { lo } else { v.clamp(lo, hi) };
        }
    }

    pub fn clamp(&self, x: &[f64]) -> Result<Vec<f64>, BoundsError> {
        if x.len() != self.dim() {
            return Err(BoundsError::Dimension {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let mut out = x.to_vec();
        self.clamp_in_place(&mut out);
        Ok(out)
    }
}
