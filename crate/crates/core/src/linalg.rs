//! Dense complex linear algebra on `ℂ^d`.
//!
//! Everything here is small-dimension, dependency-free numerics: a square
//! row-major matrix type, the operator (spectral) norm by power iteration on
//! `M*M`, Hermitian eigenvalues by cyclic Jacobi rotations, and the PSD test
//! built on them. Inner products are linear in the first argument and
//! conjugate-linear in the second.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A complex column vector.
pub type CVector = Vec<Complex64>;

pub const DEFAULT_NORM_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 10_000;
/// PSD tolerance, relative to `max(1, ‖H‖)`.
pub const DEFAULT_PSD_TOL: f64 = 1e-8;

/// Jacobi sweeps stop once the off-diagonal mass is below this fraction of
/// `‖H‖_F`, even when the caller's tolerance is looser.
const JACOBI_FLOOR: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Power iterations between successive squarings of the iteration operator.
const SQUARING_PERIOD: usize = 24;
const MAX_SQUARINGS: usize = 6;

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for r in 0..self.dim {
            write!(f, "  ")?;
            for c in 0..self.dim {
                let z = self[(r, c)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.dim + c]
    }
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_diag(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &z) in diag.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let diag: Vec<Complex64> = diag.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_diag(&diag)
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for r in 0..dim {
            for c in 0..dim {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    /// Builds a matrix from rows; rejects ragged, non-square or non-finite input.
    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::Empty("matrix"));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend(row);
        }
        let m = Self { dim, data };
        if !m.is_finite() {
            return Err(Error::NonFinite("matrix entries"));
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Complex64]> {
        self.data.chunks(self.dim)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self[(c, r)].conj())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let d = self.dim;
        let mut out = Self::zeros(d);
        for r in 0..d {
            let row = &self.data[r * d..(r + 1) * d];
            let dst = &mut out.data[r * d..(r + 1) * d];
            for (k, &a) in row.iter().enumerate() {
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let src = &other.data[k * d..(k + 1) * d];
                for (o, &b) in dst.iter_mut().zip(src) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `self · other*`, the product shape that appears in every cross term.
    pub fn mul_adjoint(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let d = self.dim;
        Ok(Self::from_fn(d, |r, c| {
            let a = &self.data[r * d..(r + 1) * d];
            let b = &other.data[c * d..(c + 1) * d];
            a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
        }))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    /// `self += c · other`
    pub fn add_scaled(&mut self, c: Complex64, other: &Self) -> Result<()> {
        self.check_dim(other)?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
        Ok(())
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Result<CVector> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(self.rows().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    /// Largest entrywise `|H[i][j] - conj(H[j][i])|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let d = self.dim;
        let mut dev: f64 = 0.0;
        for r in 0..d {
            for c in r..d {
                dev = dev.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        dev
    }

    /// `(H + H*) / 2`
    pub fn hermitian_part(&self) -> Self {
        let mut out = Self::from_fn(self.dim, |r, c| (self[(r, c)] + self[(c, r)].conj()) * 0.5);
        for i in 0..self.dim {
            out[(i, i)].im = 0.0;
        }
        out
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }
}

pub fn adjoint(m: &ComplexMatrix) -> ComplexMatrix {
    m.adjoint()
}

pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.matmul(b)
}

/// `(x, y) = Σ x_k conj(y_k)`.
pub fn inner(x: &[Complex64], y: &[Complex64]) -> Result<Complex64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    Ok(x.iter().zip(y).map(|(a, b)| a * b.conj()).sum())
}

pub fn norm_sq(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

pub fn norm(x: &[Complex64]) -> f64 {
    norm_sq(x).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralNormResult {
    pub value: f64,
    pub iterations: usize,
    /// Relative eigen-residual `‖Hv − ρv‖ / ρ` of the final iterate, `H = M*M`.
    pub residual: f64,
}

/// Largest singular value of `m`.
///
/// Runs power iteration on the Hermitian form `H = M*M` from the normalized
/// all-ones vector, and a second time from a fixed perturbed start so that a
/// start vector orthogonal to the dominant eigenspace cannot go unnoticed;
/// the larger Rayleigh quotient wins. When progress stalls the iteration
/// operator is replaced by its square (`H → H²`, renormalized), which keeps
/// the fixed point but squares the convergence ratio. The residual is always
/// measured against `H` itself.
pub fn spectral_norm(m: &ComplexMatrix, tol: f64, max_iter: usize) -> Result<SpectralNormResult> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    if max_iter == 0 {
        return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
    }
    if !m.is_finite() {
        return Err(Error::NonFinite("matrix entries"));
    }
    let h = m.adjoint().mul_unchecked(m);
    if h.is_zero() {
        return Ok(SpectralNormResult {
            value: 0.0,
            iterations: 0,
            residual: 0.0,
        });
    }

    let d = m.dim();
    let ones = vec![Complex64::new(1.0, 0.0); d];
    let golden = 0.618_033_988_749_894_9_f64;
    let perturbed: CVector = (0..d)
        .map(|k| {
            let t = golden * (k as f64 + 1.0);
            Complex64::new(1.0 + 0.5 * (7.0 * t).cos(), 0.5 * (3.0 * t).sin())
        })
        .collect();

    let a = power_iterate(&h, ones, tol, max_iter);
    let b = power_iterate(&h, perturbed, tol, max_iter);
    let iterations = a.iterations + b.iterations;
    let best = if b.rho > a.rho { b } else { a };
    let value = best.rho.max(0.0).sqrt();
    if best.residual > tol {
        return Err(Error::NoConvergence {
            estimate: value,
            residual: best.residual,
            iterations,
        });
    }
    Ok(SpectralNormResult {
        value,
        iterations,
        residual: best.residual,
    })
}

/// [`spectral_norm`] with the default tolerance and iteration cap.
pub fn operator_norm(m: &ComplexMatrix) -> Result<f64> {
    spectral_norm(m, DEFAULT_NORM_TOL, DEFAULT_MAX_ITER).map(|r| r.value)
}

struct PowerRun {
    rho: f64,
    residual: f64,
    iterations: usize,
}

fn power_iterate(h: &ComplexMatrix, start: CVector, tol: f64, max_iter: usize) -> PowerRun {
    let mut v = start;
    normalize(&mut v);
    let mut op: Option<ComplexMatrix> = None;
    let mut squarings = 0;
    let mut best = PowerRun {
        rho: 0.0,
        residual: f64::INFINITY,
        iterations: 0,
    };

    for it in 1..=max_iter {
        let mut w = match &op {
            Some(p) => p.mul_vec(&v).expect("square operator"),
            None => h.mul_vec(&v).expect("square operator"),
        };
        if normalize(&mut w) == 0.0 {
            // v lies in the null space of the iteration operator
            return PowerRun {
                rho: 0.0,
                residual: 0.0,
                iterations: it,
            };
        }
        v = w;

        let hv = h.mul_vec(&v).expect("square operator");
        let rho = inner(&hv, &v).expect("same length").re;
        let r = hv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b * rho).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let residual = if rho > 0.0 {
            r / rho
        } else if r == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        best = PowerRun {
            rho,
            residual,
            iterations: it,
        };
        if residual <= tol {
            break;
        }
        if it % SQUARING_PERIOD == 0 && squarings < MAX_SQUARINGS {
            let base = op.as_ref().unwrap_or(h);
            let sq = base.mul_unchecked(base);
            let scale = sq.frobenius_norm();
            if scale > 0.0 && scale.is_finite() {
                op = Some(sq.scale_real(1.0 / scale).hermitian_part());
                squarings += 1;
            }
        }
    }
    best
}

fn normalize(v: &mut [Complex64]) -> f64 {
    let n = norm(v);
    if n > 0.0 {
        for z in v.iter_mut() {
            *z /= n;
        }
    }
    n
}

/// All eigenvalues of a Hermitian matrix, ascending, by cyclic Jacobi sweeps.
///
/// `tol` bounds the entrywise Hermitian deviation (relative to `‖H‖_F`); the
/// sweeps run on the symmetrized `(H + H*)/2` until the off-diagonal
/// Frobenius mass drops below `min(tol, 1e-13) · ‖H‖_F`.
pub fn hermitian_eigenvalues(h: &ComplexMatrix, tol: f64) -> Result<Vec<f64>> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    if !h.is_finite() {
        return Err(Error::NonFinite("matrix entries"));
    }
    let scale = h.frobenius_norm();
    let deviation = h.hermitian_deviation();
    if deviation > tol * scale {
        return Err(Error::NotHermitian {
            deviation,
            allowed: tol * scale,
        });
    }

    let n = h.dim();
    let mut a = h.hermitian_part();
    if scale == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let threshold = tol.min(JACOBI_FLOOR) * scale;

    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_mass(&a) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                jacobi_rotate(&mut a, p, q);
            }
        }
    }
    if !converged && off_diagonal_mass(&a) > threshold {
        return Err(Error::NoConvergence {
            estimate: f64::NAN,
            residual: off_diagonal_mass(&a) / scale,
            iterations: JACOBI_MAX_SWEEPS,
        });
    }

    let mut eig: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

fn off_diagonal_mass(a: &ComplexMatrix) -> f64 {
    let n = a.dim();
    let mut s = 0.0;
    for r in 0..n {
        for c in 0..n {
            if r != c {
                s += a[(r, c)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// One complex Jacobi rotation zeroing `a[p][q]` and `a[q][p]`.
///
/// The unitary is a phase on column `q` (making the pivot real) followed by
/// the classical real rotation.
fn jacobi_rotate(a: &mut ComplexMatrix, p: usize, q: usize) {
    let h = a[(p, q)];
    let g = h.norm();
    if g == 0.0 {
        return;
    }
    let phase = h / g;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * g);
    let t = if theta.is_infinite() {
        0.0
    } else {
        let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
        sign / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let n = a.dim();

    for r in 0..n {
        let x = a[(r, p)];
        let y = a[(r, q)] * phase.conj();
        a[(r, p)] = x * c - y * s;
        a[(r, q)] = x * s + y * c;
    }
    for r in 0..n {
        let x = a[(p, r)];
        let y = a[(q, r)] * phase;
        a[(p, r)] = x * c - y * s;
        a[(q, r)] = x * s + y * c;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)].im = 0.0;
    a[(q, q)].im = 0.0;
}

pub fn hermitian_eigen_min(h: &ComplexMatrix, tol: f64) -> Result<f64> {
    Ok(hermitian_eigenvalues(h, tol)?[0])
}

/// `min λ(H) ≥ −tol · max(1, ‖H‖)`, where `‖H‖` is the largest `|λ|`.
pub fn is_psd(h: &ComplexMatrix, tol: f64) -> Result<bool> {
    let eig = hermitian_eigenvalues(h, tol)?;
    Ok(psd_verdict(&eig, tol))
}

pub(crate) fn psd_verdict(eig: &[f64], tol: f64) -> bool {
    let norm = eig.iter().map(|x| x.abs()).fold(0.0, f64::max);
    eig[0] >= -tol * norm.max(1.0)
}

/// Gram matrix `G[i][j] = (y_i, y_j)`.
pub fn gram(vectors: &[CVector]) -> Result<ComplexMatrix> {
    let first = vectors.first().ok_or(Error::Empty("vector list"))?;
    let d = first.len();
    if let Some(bad) = vectors.iter().find(|v| v.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: bad.len(),
        });
    }
    let n = vectors.len();
    let mut g = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let z = inner(&vectors[i], &vectors[j])?;
            g[(i, j)] = z;
            g[(j, i)] = z.conj();
        }
        g[(i, i)].im = 0.0;
    }
    Ok(g)
}
