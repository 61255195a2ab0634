//! The operator-order Cauchy-Bunyakovsky-Schwarz inequality
//! `(Σ|z_i|²)(Σ A_i A_i*) ≥ (Σ z_i A_i)(Σ z_i A_i)* ≥ 0` and its norm form.

use crate::error::Result;
use crate::family::{OperatorFamily, WeightVector};
use crate::linalg::{self, ComplexMatrix};

/// Relative slack allowed in norm comparisons.
pub const NORM_CHECK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct PsdGapResult {
    /// `(Σ|z_i|²)(Σ A_i A_i*) − (Σ z_i A_i)(Σ z_i A_i)*`, symmetrized.
    pub gap: ComplexMatrix,
    pub min_eigenvalue: f64,
    /// `‖gap‖`, the largest eigenvalue magnitude.
    pub gap_norm: f64,
    pub holds: bool,
    /// Smallest eigenvalue of `(Σ z_i A_i)(Σ z_i A_i)*`.
    pub product_min_eigenvalue: f64,
    pub product_norm: f64,
    pub product_psd: bool,
}

pub fn cbs_operator_gap(z: &WeightVector, family: &OperatorFamily, tol: f64) -> Result<PsdGapResult> {
    family.check_len(z)?;
    let s = family.weighted_sum(z)?;
    let product = s.mul_adjoint(&s)?;
    let mut frame = ComplexMatrix::zeros(family.dim());
    for a in family.ops() {
        frame = frame.add(&a.mul_adjoint(a)?)?;
    }
    let gap = frame.scale_real(z.norm_sq()).sub(&product)?.hermitian_part();

    let eig = linalg::hermitian_eigenvalues(&gap, tol)?;
    let gap_norm = eig.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let min_eigenvalue = eig[0];
    let holds = min_eigenvalue >= -tol * gap_norm.max(1.0);

    let product_eig = linalg::hermitian_eigenvalues(&product.hermitian_part(), tol)?;
    Ok(PsdGapResult {
        gap,
        min_eigenvalue,
        gap_norm,
        holds,
        product_min_eigenvalue: product_eig[0],
        product_norm: product_eig.iter().map(|x| x.abs()).fold(0.0, f64::max),
        product_psd: linalg::psd_verdict(&product_eig, tol),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl NormCheck {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            holds: lhs <= rhs * (1.0 + NORM_CHECK_TOL),
        }
    }
}

/// `‖Σ z_k A_k‖² ≤ (Σ|z_k|²) ‖Σ A_k A_k*‖`
pub fn cbs_norm_check(z: &WeightVector, family: &OperatorFamily) -> Result<NormCheck> {
    family.check_len(z)?;
    let lhs = linalg::operator_norm(&family.weighted_sum(z)?)?.powi(2);
    let mut frame = ComplexMatrix::zeros(family.dim());
    for a in family.ops() {
        frame = frame.add(&a.mul_adjoint(a)?)?;
    }
    let rhs = z.norm_sq() * linalg::operator_norm(&frame)?;
    Ok(NormCheck::new(lhs, rhs))
}
