//! Weighted operator families and their cached norm data.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    weights: Vec<Complex64>,
}

impl WeightVector {
    pub fn new(weights: Vec<Complex64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Empty("weight vector"));
        }
        if weights.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("weights"));
        }
        Ok(Self { weights })
    }

    pub fn from_real(weights: &[f64]) -> Result<Self> {
        Self::new(weights.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.weights
    }

    /// `|α_i|`
    pub fn magnitudes(&self) -> Vec<f64> {
        self.weights.iter().map(|z| z.norm()).collect()
    }

    /// `Σ |α_i|²`
    pub fn norm_sq(&self) -> f64 {
        linalg::norm_sq(&self.weights)
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            weights: self.weights.iter().map(|z| z * c).collect(),
        }
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            weights: perm.iter().map(|&i| self.weights[i]).collect(),
        }
    }
}

/// The norm data every bound in the catalog is built from: `‖A_i‖²` and the
/// cross norms `‖A_i A_j*‖` (only `i ≠ j` entries are read).
///
/// Operator families produce it from spectral norms; vector families from
/// their Gram matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct NormProfile {
    pub diag_sq: Vec<f64>,
    /// Row-major `n × n`.
    pub cross: Vec<f64>,
}

impl NormProfile {
    pub fn len(&self) -> usize {
        self.diag_sq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag_sq.is_empty()
    }

    pub fn cross(&self, i: usize, j: usize) -> f64 {
        self.cross[i * self.len() + j]
    }

    /// Cross norms over ordered pairs `i ≠ j`, row-major.
    pub fn off_diagonal(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.len();
        (0..n).flat_map(move |i| (0..n).filter(move |&j| j != i).map(move |j| self.cross(i, j)))
    }

    pub fn max_diag_sq(&self) -> f64 {
        self.diag_sq.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_cross(&self) -> f64 {
        self.off_diagonal().fold(0.0, f64::max)
    }
}

/// `A_1, …, A_n` on `ℂ^d` with `‖A_i‖` and `‖A_i A_j*‖` computed once.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorFamily {
    dim: usize,
    ops: Vec<ComplexMatrix>,
    norms: Vec<f64>,
    cross: Vec<f64>,
}

impl OperatorFamily {
    pub fn new(ops: Vec<ComplexMatrix>) -> Result<Self> {
        let first = ops.first().ok_or(Error::Empty("operator family"))?;
        let dim = first.dim();
        if let Some(bad) = ops.iter().find(|m| m.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        if ops.iter().any(|m| !m.is_finite()) {
            return Err(Error::NonFinite("operator entries"));
        }

        let n = ops.len();
        let norms = ops.iter().map(linalg::operator_norm).collect::<Result<Vec<_>>>()?;
        let mut cross = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                // ‖A_j A_i*‖ = ‖(A_i A_j*)*‖
                let v = linalg::operator_norm(&ops[i].mul_adjoint(&ops[j])?)?;
                cross[i * n + j] = v;
                cross[j * n + i] = v;
            }
        }
        Ok(Self {
            dim,
            ops,
            norms,
            cross,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    /// Cached `‖A_i‖`.
    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    /// Cached `‖A_i A_j*‖`.
    pub fn cross_norm(&self, i: usize, j: usize) -> f64 {
        self.cross[i * self.len() + j]
    }

    pub fn profile(&self) -> NormProfile {
        NormProfile {
            diag_sq: self.norms.iter().map(|x| x * x).collect(),
            cross: self.cross.clone(),
        }
    }

    /// `Σ α_i A_i`
    pub fn weighted_sum(&self, alpha: &WeightVector) -> Result<ComplexMatrix> {
        self.check_len(alpha)?;
        let mut s = ComplexMatrix::zeros(self.dim);
        for (a, m) in alpha.as_slice().iter().zip(&self.ops) {
            s.add_scaled(*a, m)?;
        }
        Ok(s)
    }

    /// Reorders the family; cached values move with their operators.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.len();
        let mut cross = vec![0.0; n * n];
        for (a, &i) in perm.iter().enumerate() {
            for (b, &j) in perm.iter().enumerate() {
                cross[a * n + b] = self.cross[i * n + j];
            }
        }
        Self {
            dim: self.dim,
            ops: perm.iter().map(|&i| self.ops[i].clone()).collect(),
            norms: perm.iter().map(|&i| self.norms[i]).collect(),
            cross,
        }
    }

    pub(crate) fn check_len(&self, alpha: &WeightVector) -> Result<()> {
        if alpha.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: alpha.len(),
            });
        }
        Ok(())
    }
}
