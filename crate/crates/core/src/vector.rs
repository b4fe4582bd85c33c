//! Unit vectors on the hypersphere and the cosine metric.

use crate::error::{Error, Result};

/// Norms below this are rejected by [`normalize`].
pub const MIN_NORM: f64 = 1e-12;

/// A finite, unit-norm vector. Construction normalizes, so every
/// consumer may assume `|v| = 1` without re-checking.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVec(Vec<f64>);

impl UnitVec {
    pub fn new(v: Vec<f64>) -> Result<Self> {
        normalize(v).map(UnitVec)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for UnitVec {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

pub fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Scales `v` to unit Euclidean norm.
pub fn normalize(mut v: Vec<f64>) -> Result<Vec<f64>> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let n = norm(&v);
    if n <= MIN_NORM {
        return Err(Error::ZeroNorm(n));
    }
    v.iter_mut().for_each(|x| *x /= n);
    Ok(v)
}

/// `1 - <a, b>` for unit vectors; lies in `[0, 2]`.
pub fn cosine_distance(a: &UnitVec, b: &UnitVec) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(unit_cosine_distance(a.as_slice(), b.as_slice()))
}

/// Unchecked variant for inner loops. Clamped so rounding never leaves `[0, 2]`.
#[inline]
pub(crate) fn unit_cosine_distance(a: &[f64], b: &[f64]) -> f64 {
    (1.0 - dot(a, b)).clamp(0.0, 2.0)
}
