//! Rank-one operators `A_i x = (x, y_i) y_i / ‖y_i‖` built from a vector
//! family, and the bound catalog evaluated from the Gram matrix alone.
//!
//! For such operators `‖A_i‖ = ‖y_i‖` and `‖A_i A_j*‖ = |(y_i, y_j)|`, so every
//! bound only needs inner products. The matrix path ([`rank_one_family`])
//! exists to cross-check that claim.

use num_complex::Complex64;

use crate::bounds::{self, BoundConfig, BoundKind, BoundReport, HolderPair};
use crate::error::{Error, Result};
use crate::family::{NormProfile, OperatorFamily, WeightVector};
use crate::linalg::{self, CVector, ComplexMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct VectorFamily {
    dim: usize,
    vectors: Vec<CVector>,
    norms: Vec<f64>,
    gram: ComplexMatrix,
}

impl VectorFamily {
    /// Rejects zero vectors instead of dropping them, since dropping would
    /// change `n` and with it every bound.
    pub fn new(vectors: Vec<CVector>) -> Result<Self> {
        let gram = linalg::gram(&vectors)?;
        let dim = vectors[0].len();
        if dim == 0 {
            return Err(Error::Empty("vector"));
        }
        if vectors.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("vector entries"));
        }
        let norms: Vec<f64> = vectors.iter().map(|v| linalg::norm(v)).collect();
        if let Some(index) = norms.iter().position(|&n| n == 0.0) {
            return Err(Error::ZeroVector { index });
        }
        Ok(Self {
            dim,
            vectors,
            norms,
            gram,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[CVector] {
        &self.vectors
    }

    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    pub fn gram(&self) -> &ComplexMatrix {
        &self.gram
    }

    /// `‖y_i‖²` on the diagonal, `|(y_i, y_j)|` off it.
    pub fn profile(&self) -> NormProfile {
        let n = self.len();
        NormProfile {
            diag_sq: self.norms.iter().map(|x| x * x).collect(),
            cross: (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .map(|(i, j)| self.gram[(i, j)].norm())
                .collect(),
        }
    }

    /// `Σ α_i (x, y_i) / ‖y_i‖ · y_i`
    pub fn apply(&self, alpha: &WeightVector, x: &[Complex64]) -> Result<CVector> {
        self.check_len(alpha)?;
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        for ((a, y), n) in alpha.as_slice().iter().zip(&self.vectors).zip(&self.norms) {
            let coef = a * linalg::inner(x, y)? / n;
            for (o, v) in out.iter_mut().zip(y) {
                *o += coef * v;
            }
        }
        Ok(out)
    }

    /// `‖Σ α_i A_i‖²` from the Gram matrix.
    ///
    /// With `Y = [y_1 … y_n]` and `D = diag(α_i / ‖y_i‖)` the operator is
    /// `Y D Y*`. A pivoted Cholesky factor `Y*Y = R*R` gives `Y = QR` with
    /// orthonormal `Q`, hence `‖Y D Y*‖ = ‖R D R*‖`, a `k × k` problem with
    /// `k = rank(Y)`.
    pub fn weighted_sum_norm_sq(&self, alpha: &WeightVector) -> Result<f64> {
        self.check_len(alpha)?;
        let n = self.len();
        // Y*Y is the conjugate of the Gram matrix under our inner-product convention
        let yy = ComplexMatrix::from_fn(n, |i, j| self.gram[(i, j)].conj());
        let r = pivoted_cholesky(&yy);
        if r.is_empty() {
            return Ok(0.0);
        }
        let k = r.len();
        let d: Vec<Complex64> = alpha.as_slice().iter().zip(&self.norms).map(|(a, n)| a / n).collect();
        let core = ComplexMatrix::from_fn(k, |a, b| {
            (0..n).map(|i| r[a][i] * d[i] * r[b][i].conj()).sum()
        });
        Ok(linalg::operator_norm(&core)?.powi(2))
    }

    fn check_len(&self, alpha: &WeightVector) -> Result<()> {
        if alpha.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: alpha.len(),
            });
        }
        Ok(())
    }
}

/// Rows of `R` with `G ≈ R*R`, stopping once the remaining Schur-complement
/// diagonal is negligible.
fn pivoted_cholesky(g: &ComplexMatrix) -> Vec<CVector> {
    let n = g.dim();
    let mut s = g.clone();
    let mut remaining: Vec<usize> = (0..n).collect();
    let max_diag = (0..n).map(|i| g[(i, i)].re).fold(0.0, f64::max);
    let cutoff = max_diag * n as f64 * f64::EPSILON;
    let mut rows = Vec::new();

    while !remaining.is_empty() {
        let (pos, &j) = remaining
            .iter()
            .enumerate()
            .max_by(|a, b| s[(*a.1, *a.1)].re.total_cmp(&s[(*b.1, *b.1)].re))
            .expect("nonempty");
        let pivot = s[(j, j)].re;
        if pivot <= cutoff {
            break;
        }
        remaining.swap_remove(pos);
        let root = pivot.sqrt();
        let mut row = vec![Complex64::new(0.0, 0.0); n];
        row[j] = Complex64::new(root, 0.0);
        for &m in &remaining {
            row[m] = s[(j, m)] / root;
        }
        for &l in &remaining {
            for &m in &remaining {
                s[(l, m)] -= row[l].conj() * row[m];
            }
        }
        rows.push(row);
    }
    rows
}

/// The explicit matrices `A_i = y_i y_i* / ‖y_i‖`.
pub fn rank_one_family(family: &VectorFamily) -> Result<OperatorFamily> {
    let ops = family
        .vectors
        .iter()
        .zip(&family.norms)
        .map(|(y, &n)| ComplexMatrix::from_fn(family.dim, |r, c| y[r] * y[c].conj() / n))
        .collect();
    OperatorFamily::new(ops)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityDeviation {
    /// Largest relative gap between `‖A_i‖` and `‖y_i‖`.
    pub norm: f64,
    /// Largest relative gap between `‖A_i A_j‖` and `|(y_i, y_j)|`.
    pub cross: f64,
}

fn relative_gap(a: f64, b: f64, floor: f64) -> f64 {
    let diff = (a - b).abs();
    if diff <= floor {
        0.0
    } else {
        diff / a.abs().max(b.abs())
    }
}

/// Measures `‖A_i‖ = ‖y_i‖` and `‖A_i A_j‖ = |(y_i, y_j)|` on the matrix path.
///
/// Differences below `d · ε · ‖y_i‖‖y_j‖` count as exact: both sides are then
/// zero up to rounding and a relative comparison carries no information.
pub fn identity_deviation(family: &VectorFamily) -> Result<IdentityDeviation> {
    let ops = rank_one_family(family)?;
    let n = family.len();
    let mut out = IdentityDeviation { norm: 0.0, cross: 0.0 };
    let eps = family.dim as f64 * f64::EPSILON;
    for i in 0..n {
        out.norm = out
            .norm
            .max(relative_gap(ops.norms()[i], family.norms[i], eps * family.norms[i]));
        for j in 0..n {
            // A_j is self-adjoint, so the cached ‖A_i A_j*‖ is ‖A_i A_j‖
            let floor = eps * family.norms[i] * family.norms[j];
            out.cross = out
                .cross
                .max(relative_gap(ops.cross_norm(i, j), family.gram[(i, j)].norm(), floor));
        }
    }
    Ok(out)
}

pub fn verify_identities(family: &VectorFamily, tol: f64) -> Result<bool> {
    let dev = identity_deviation(family)?;
    Ok(dev.norm <= tol && dev.cross <= tol)
}

/// Bound on `‖Σ α_i (x, y_i)/‖y_i‖ · y_i‖²` for any `x` with `‖x‖² = x_norm_sq`,
/// from Gram data only. `lhs_sq` in the report is the supremum of the left
/// side over such `x`.
pub fn gram_bound(
    alpha: &WeightVector,
    family: &VectorFamily,
    x_norm_sq: f64,
    config: BoundConfig,
) -> Result<BoundReport> {
    gram_report(alpha, family, x_norm_sq, BoundKind::Master(config))
}

fn gram_report(alpha: &WeightVector, family: &VectorFamily, x_norm_sq: f64, kind: BoundKind) -> Result<BoundReport> {
    family.check_len(alpha)?;
    check_x_norm(x_norm_sq)?;
    let bound = kind.evaluate(&alpha.magnitudes(), &family.profile());
    let lhs = family.weighted_sum_norm_sq(alpha)?;
    Ok(BoundReport::new(kind, x_norm_sq * lhs, x_norm_sq * bound))
}

fn check_x_norm(x_norm_sq: f64) -> Result<()> {
    if !(x_norm_sq.is_finite() && x_norm_sq >= 0.0) {
        return Err(Error::InvalidArgument(format!("probe norm must be finite and ≥ 0, got {x_norm_sq}")));
    }
    Ok(())
}

/// The six named bounds in catalog order: all-pairs max weight, uniform
/// Hölder with `hp`, `(n−1)`-scaled max cross, Euclidean cross, absolute
/// cross, power mean with `r`.
pub fn particular_bounds(
    alpha: &WeightVector,
    family: &VectorFamily,
    x_norm_sq: f64,
    hp: HolderPair,
    r: f64,
) -> Result<Vec<BoundReport>> {
    let kinds = [
        BoundKind::MaxWeightAllPairs,
        BoundKind::HolderUniform(HolderPair::from_pair(hp.p(), hp.q())?),
        BoundKind::MaxCrossScaled,
        BoundKind::EuclideanCross,
        BoundKind::AbsoluteCross,
        BoundKind::power_mean(r)?,
    ];
    family.check_len(alpha)?;
    check_x_norm(x_norm_sq)?;
    let mags = alpha.magnitudes();
    let profile = family.profile();
    let lhs = family.weighted_sum_norm_sq(alpha)?;
    Ok(kinds
        .iter()
        .map(|k| BoundReport::new(*k, x_norm_sq * lhs, x_norm_sq * k.evaluate(&mags, &profile)))
        .collect())
}

/// Full catalog on Gram data, scaled by `x_norm_sq`.
pub fn gram_catalog(
    alpha: &WeightVector,
    family: &VectorFamily,
    x_norm_sq: f64,
    grid: &[f64],
) -> Result<Vec<BoundReport>> {
    family.check_len(alpha)?;
    check_x_norm(x_norm_sq)?;
    let grid = bounds::holder_grid(grid)?;
    let lhs = family.weighted_sum_norm_sq(alpha)?;
    Ok(bounds::evaluate_catalog(&alpha.magnitudes(), &family.profile(), &grid)
        .into_iter()
        .map(|(k, b)| BoundReport::new(k, x_norm_sq * lhs, x_norm_sq * b))
        .collect())
}

/// `α_i = ‖y_i‖`, turning the weighted sum into `Σ (x, y_i) y_i`.
pub fn bessel_weighting(family: &VectorFamily) -> WeightVector {
    WeightVector::from_real(&family.norms).expect("norms are finite and the family is nonempty")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{DiagChoice, OffDiagChoice, DEFAULT_GRID};
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn basis(d: usize, i: usize, scale: f64) -> CVector {
        (0..d).map(|k| c(if k == i { scale } else { 0.0 }, 0.0)).collect()
    }

    fn generic(n: usize, d: usize) -> VectorFamily {
        VectorFamily::new(
            (0..n)
                .map(|i| {
                    (0..d)
                        .map(|k| {
                            let t = (i * 17 + k * 5) as f64 + 0.1;
                            c(t.sin(), (2.3 * t).cos())
                        })
                        .collect()
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn rank_one_examples() {
        let fam = VectorFamily::new(vec![basis(2, 0, 1.0)]).unwrap();
        assert_eq!(rank_one_family(&fam).unwrap().ops()[0], ComplexMatrix::from_real_diag(&[1.0, 0.0]));
        let fam = VectorFamily::new(vec![basis(2, 0, 2.0)]).unwrap();
        assert_eq!(rank_one_family(&fam).unwrap().ops()[0], ComplexMatrix::from_real_diag(&[2.0, 0.0]));

        let fam = generic(4, 3);
        for a in rank_one_family(&fam).unwrap().ops() {
            assert!(a.hermitian_deviation() < 1e-15);
            assert!(linalg::is_psd(a, 1e-8).unwrap());
        }
    }

    #[test]
    fn zero_vector_rejected() {
        let err = VectorFamily::new(vec![basis(2, 0, 1.0), vec![c(0.0, 0.0); 2]]).unwrap_err();
        assert_eq!(err, Error::ZeroVector { index: 1 });
    }

    #[test]
    fn identities_on_basis_and_generic() {
        let fam = VectorFamily::new((0..3).map(|i| basis(3, i, 1.0)).collect()).unwrap();
        let ops = rank_one_family(&fam).unwrap();
        for i in 0..3 {
            assert_relative_eq!(ops.norms()[i], 1.0, max_relative = 1e-15);
            for j in 0..3 {
                if i != j {
                    assert_eq!(ops.cross_norm(i, j), 0.0);
                }
            }
        }
        assert!(verify_identities(&fam, 1e-9).unwrap());

        let pair = VectorFamily::new(vec![basis(2, 0, 1.0), vec![c(1.0, 0.0), c(1.0, 0.0)]]).unwrap();
        let ops = rank_one_family(&pair).unwrap();
        let ip = linalg::inner(&pair.vectors()[0], &pair.vectors()[1]).unwrap().norm();
        assert_relative_eq!(ops.cross_norm(0, 1), ip, max_relative = 1e-12);

        assert!(verify_identities(&generic(5, 4), 1e-9).unwrap());
    }

    #[test]
    fn gram_path_matches_matrix_path() {
        let fam = generic(4, 3);
        let ops = rank_one_family(&fam).unwrap();
        let alpha = WeightVector::new(vec![c(1.0, -0.5), c(0.2, 0.9), c(-1.4, 0.0), c(0.3, 0.3)]).unwrap();
        let grid = bounds::holder_grid(&DEFAULT_GRID).unwrap();
        for config in BoundConfig::sweep(&grid) {
            let g = gram_bound(&alpha, &fam, 2.5, config).unwrap();
            let m = bounds::master_bound(&alpha, &ops, config).unwrap();
            assert_relative_eq!(g.bound, 2.5 * m.bound, max_relative = 1e-9);
            assert_relative_eq!(g.lhs_sq, 2.5 * m.lhs_sq, max_relative = 1e-9);
        }
    }

    #[test]
    fn weighted_sum_norm_handles_rank_deficiency() {
        // five vectors in ℂ³: Y*Y has rank 3
        let fam = generic(5, 3);
        let ops = rank_one_family(&fam).unwrap();
        let alpha = WeightVector::new((0..5).map(|k| c(1.0 / (k as f64 + 1.0), k as f64 * 0.3)).collect()).unwrap();
        let direct = bounds::lhs_norm_sq(&alpha, &ops).unwrap();
        assert_relative_eq!(fam.weighted_sum_norm_sq(&alpha).unwrap(), direct, max_relative = 1e-10);
    }

    #[test]
    fn single_vector_bounds() {
        let y = vec![c(1.0, 1.0), c(0.0, -2.0)];
        let fam = VectorFamily::new(vec![y.clone()]).unwrap();
        let alpha = WeightVector::new(vec![c(0.0, 3.0)]).unwrap();
        let expected = 4.0 * 9.0 * linalg::norm_sq(&y);
        let g = gram_bound(&alpha, &fam, 4.0, BoundConfig::new(DiagChoice::MaxWeight, OffDiagChoice::MaxCross))
            .unwrap();
        assert_relative_eq!(g.bound, expected, max_relative = 1e-14);
        for r in particular_bounds(&alpha, &fam, 4.0, HolderPair::new(1.5).unwrap(), 1.5).unwrap() {
            assert_relative_eq!(r.bound, expected, max_relative = 1e-14);
            assert_relative_eq!(r.lhs_sq, expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn orthonormal_family_bounds() {
        let n = 3;
        let fam = VectorFamily::new((0..n).map(|i| basis(4, i, 1.0)).collect()).unwrap();
        let ones = WeightVector::from_real(&[1.0; 3]).unwrap();
        let g = gram_bound(&ones, &fam, 2.0, BoundConfig::new(DiagChoice::MaxWeight, OffDiagChoice::MaxWeightPair))
            .unwrap();
        assert_relative_eq!(g.bound, 2.0 * 3.0);

        let reports = particular_bounds(&ones, &fam, 2.0, HolderPair::new(2.0).unwrap(), 2.0).unwrap();
        assert_relative_eq!(reports[0].bound, 2.0 * n as f64);
        for r in &reports[2..] {
            assert_relative_eq!(r.bound, 2.0 * n as f64, max_relative = 1e-14);
        }
        // the uniform Hölder entry: (Σ1)^{1/2}·(Σ1)^{1/2} = n
        assert_relative_eq!(reports[1].bound, 2.0 * n as f64, max_relative = 1e-14);
    }

    #[test]
    fn particular_bounds_dominate_probes() {
        let fam = generic(4, 5);
        let alpha = WeightVector::new(vec![c(0.5, 0.5), c(-1.0, 0.2), c(0.0, 1.1), c(0.7, -0.3)]).unwrap();
        let reports = particular_bounds(&alpha, &fam, 1.0, HolderPair::new(3.0).unwrap(), 1.25).unwrap();
        for k in 0..20 {
            let mut x: CVector = (0..5).map(|i| c(((k * 3 + i) as f64).sin(), ((k + 7 * i) as f64).cos())).collect();
            let nx = linalg::norm(&x);
            x.iter_mut().for_each(|z| *z /= nx);
            let lhs = linalg::norm_sq(&fam.apply(&alpha, &x).unwrap());
            for r in &reports {
                assert!(lhs <= r.bound * (1.0 + 1e-9), "{}: {lhs} > {}", r.kind, r.bound);
            }
        }
        assert!(particular_bounds(&alpha, &fam, 1.0, HolderPair::new(3.0).unwrap(), 2.5).is_err());
    }

    #[test]
    fn bessel_weights() {
        let fam = VectorFamily::new((0..3).map(|i| basis(3, i, 1.0)).collect()).unwrap();
        assert_eq!(bessel_weighting(&fam).magnitudes(), vec![1.0; 3]);
        let fam = VectorFamily::new(vec![basis(2, 0, 2.0), basis(2, 1, 3.0)]).unwrap();
        assert_eq!(bessel_weighting(&fam).magnitudes(), vec![2.0, 3.0]);

        let fam = generic(3, 4);
        let w = bessel_weighting(&fam);
        let r = &particular_bounds(&w, &fam, 1.0, HolderPair::new(2.0).unwrap(), 2.0).unwrap()[0];
        let max_sq = fam.norms().iter().map(|x| x * x).fold(0.0, f64::max);
        let all: f64 = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|(i, j)| fam.gram()[(i, j)].norm()).sum();
        assert_relative_eq!(r.bound, max_sq * all, max_relative = 1e-13);
        // with these weights the image is Σ (x, y_i) y_i
        let x: CVector = vec![c(1.0, 0.0), c(0.0, 1.0), c(-0.5, 0.5), c(0.2, 0.0)];
        let direct: CVector = (0..4)
            .map(|k| fam.vectors().iter().map(|y| linalg::inner(&x, y).unwrap() * y[k]).sum())
            .collect();
        let via = fam.apply(&w, &x).unwrap();
        for (a, b) in direct.iter().zip(&via) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!(linalg::norm_sq(&direct) <= r.bound * linalg::norm_sq(&x));
    }

    #[test]
    fn invalid_probe_norm() {
        let fam = generic(2, 2);
        let alpha = WeightVector::from_real(&[1.0, 1.0]).unwrap();
        let cfg = BoundConfig::new(DiagChoice::MaxNorm, OffDiagChoice::MaxCross);
        assert!(gram_bound(&alpha, &fam, -1.0, cfg).is_err());
        assert_eq!(gram_bound(&alpha, &fam, 0.0, cfg).unwrap().bound, 0.0);
    }
}
