//! Upper bounds for `‖Σ α_i A_i‖²` built only from `|α_i|`, `‖A_i‖` and the
//! cross norms `‖A_i A_j*‖`.
//!
//! Every bound splits the square into a diagonal part `Σ|α_i|²‖A_i‖²` and an
//! off-diagonal part `Σ_{i≠j} |α_i||α_j| ‖A_i A_j*‖`, then relaxes each part
//! with a max/Hölder/max choice. The nine combinations form the master
//! family; the named bounds are further relaxations of particular
//! combinations, and the orthogonal bounds apply when all cross terms vanish.
//!
//! Sums over `i ≠ j` run over ordered pairs, so each unordered pair is
//! counted twice. All values here are squared-norm bounds, including the
//! orthogonal ones (which bound the norm itself and are reported squared).

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{NormProfile, OperatorFamily, WeightVector};
use crate::inequality::NormCheck;
use crate::linalg::{self, ComplexMatrix};

pub const DEFAULT_GRID: [f64; 5] = [1.25, 1.5, 2.0, 3.0, 4.0];

/// A family counts as orthogonal when `max_{i≠j} ‖A_i A_j*‖ ≤ tol · max ‖A_i‖²`.
pub const ORTHOGONALITY_TOL: f64 = 1e-12;

/// Conjugate exponents `1/p + 1/q = 1`, `p > 1`.
///
/// The limiting pairs `(∞, 1)` and `(1, ∞)` are not represented here; they
/// are the max-based choices of [`DiagChoice`] and [`OffDiagChoice`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderPair {
    p: f64,
    q: f64,
}

impl HolderPair {
    pub fn new(p: f64) -> Result<Self> {
        if !p.is_finite() || p <= 1.0 {
            return Err(Error::InvalidExponent(format!("Hölder exponent must be > 1, got {p}")));
        }
        Ok(Self { p, q: p / (p - 1.0) })
    }

    pub fn from_pair(p: f64, q: f64) -> Result<Self> {
        Self::new(p)?;
        if !q.is_finite() || (1.0 / p + 1.0 / q - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidExponent(format!("{p} and {q} are not conjugate")));
        }
        Ok(Self { p, q })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiagChoice {
    /// `max|α_i|² · Σ‖A_i‖²`
    MaxWeight,
    /// `(Σ|α_i|^{2p})^{1/p} (Σ‖A_i‖^{2q})^{1/q}`
    Holder(HolderPair),
    /// `Σ|α_i|² · max‖A_i‖²`
    MaxNorm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OffDiagChoice {
    /// `max_{i≠j}|α_i||α_j| · Σ_{i≠j}‖A_i A_j*‖`
    MaxWeightPair,
    /// `(Σ_{i≠j}|α_i|^r|α_j|^r)^{1/r} (Σ_{i≠j}‖A_i A_j*‖^s)^{1/s}`
    Holder(HolderPair),
    /// `Σ_{i≠j}|α_i||α_j| · max_{i≠j}‖A_i A_j*‖`
    MaxCross,
}

impl DiagChoice {
    fn label(&self) -> &'static str {
        match self {
            DiagChoice::MaxWeight => "max_weight",
            DiagChoice::Holder(_) => "holder",
            DiagChoice::MaxNorm => "max_norm",
        }
    }

    /// The three choices in order, with the Hölder slot expanded over `grid`.
    pub fn expand(grid: &[HolderPair]) -> Vec<Self> {
        let mut out = vec![DiagChoice::MaxWeight];
        out.extend(grid.iter().map(|&h| DiagChoice::Holder(h)));
        out.push(DiagChoice::MaxNorm);
        out
    }
}

impl OffDiagChoice {
    fn label(&self) -> &'static str {
        match self {
            OffDiagChoice::MaxWeightPair => "max_weight_pair",
            OffDiagChoice::Holder(_) => "holder",
            OffDiagChoice::MaxCross => "max_cross",
        }
    }

    pub fn expand(grid: &[HolderPair]) -> Vec<Self> {
        let mut out = vec![OffDiagChoice::MaxWeightPair];
        out.extend(grid.iter().map(|&h| OffDiagChoice::Holder(h)));
        out.push(OffDiagChoice::MaxCross);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundConfig {
    pub diag: DiagChoice,
    pub offdiag: OffDiagChoice,
}

impl BoundConfig {
    pub fn new(diag: DiagChoice, offdiag: OffDiagChoice) -> Self {
        Self { diag, offdiag }
    }

    /// All configurations in row-major order (diagonal choice outermost).
    pub fn sweep(grid: &[HolderPair]) -> Vec<Self> {
        let offdiag = OffDiagChoice::expand(grid);
        DiagChoice::expand(grid)
            .into_iter()
            .flat_map(|d| offdiag.iter().map(move |&o| Self::new(d, o)))
            .collect()
    }
}

/// One entry of the bound catalog.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundKind {
    Master(BoundConfig),
    /// `max|α_i|² · Σ_{i,j}‖A_i A_j*‖`
    MaxWeightAllPairs,
    /// `(Σ|α_i|^{2p})^{1/p} [(Σ‖A_i‖^{2q})^{1/q} + (n−1)(Σ_{i≠j}‖A_i A_j*‖^q)^{1/q}]`
    HolderUniform(HolderPair),
    /// `Σ|α_i|² [max‖A_i‖² + (n−1) max_{i≠j}‖A_i A_j*‖]`
    MaxCrossScaled,
    /// `Σ|α_i|² [max‖A_i‖² + (Σ_{i≠j}‖A_i A_j*‖²)^{1/2}]`
    EuclideanCross,
    /// `Σ|α_i|² [max‖A_i‖² + Σ_{i≠j}‖A_i A_j*‖]`
    AbsoluteCross,
    /// `Σ|α_i|² [max‖A_i‖² + n^{2/r−1}(Σ_{i≠j}‖A_i A_j*‖^s)^{1/s}]`, `1 < r ≤ 2`
    PowerMean(HolderPair),
    /// Valid only when every `A_i A_j*` (`i ≠ j`) vanishes; equals the
    /// diagonal term for the given choice.
    Orthogonal(DiagChoice),
}

impl BoundKind {
    pub fn power_mean(r: f64) -> Result<Self> {
        if !(r > 1.0 && r <= 2.0) {
            return Err(Error::InvalidExponent(format!("power-mean exponent must lie in (1, 2], got {r}")));
        }
        Ok(BoundKind::PowerMean(HolderPair::new(r)?))
    }

    pub fn name(&self) -> String {
        match self {
            BoundKind::Master(c) => format!("master[{}|{}]", c.diag.label(), c.offdiag.label()),
            BoundKind::MaxWeightAllPairs => "max_weight_all_pairs".into(),
            BoundKind::HolderUniform(_) => "holder_uniform_cross".into(),
            BoundKind::MaxCrossScaled => "max_cross_scaled".into(),
            BoundKind::EuclideanCross => "euclidean_cross".into(),
            BoundKind::AbsoluteCross => "absolute_cross".into(),
            BoundKind::PowerMean(_) => "power_mean_cross".into(),
            BoundKind::Orthogonal(d) => format!("orthogonal[{}]", d.label()),
        }
    }

    /// Exponents in `key=value` form separated by `;`, empty when none apply.
    pub fn exponents(&self) -> String {
        let pq = |h: &HolderPair| format!("p={};q={}", h.p, h.q);
        let rs = |h: &HolderPair| format!("r={};s={}", h.p, h.q);
        match self {
            BoundKind::Master(c) => {
                let mut parts = Vec::new();
                if let DiagChoice::Holder(h) = &c.diag {
                    parts.push(pq(h));
                }
                if let OffDiagChoice::Holder(h) = &c.offdiag {
                    parts.push(rs(h));
                }
                parts.join(";")
            }
            BoundKind::HolderUniform(h) => pq(h),
            BoundKind::PowerMean(h) => rs(h),
            BoundKind::Orthogonal(DiagChoice::Holder(h)) => pq(h),
            _ => String::new(),
        }
    }

    /// Evaluates the bound (squared form) from weight magnitudes and norm data.
    pub fn evaluate(&self, mags: &[f64], profile: &NormProfile) -> f64 {
        debug_assert_eq!(mags.len(), profile.len());
        let n = mags.len();
        let weight_sq: f64 = mags.iter().map(|a| a * a).sum();
        match self {
            BoundKind::Master(c) => diag_value(mags, profile, c.diag) + offdiag_value(mags, profile, c.offdiag),
            BoundKind::MaxWeightAllPairs => {
                let all: f64 = profile.diag_sq.iter().sum::<f64>() + profile.off_diagonal().sum::<f64>();
                max_of(mags.iter().copied()).powi(2) * all
            }
            BoundKind::HolderUniform(h) => {
                let diag_sq: Vec<f64> = mags.iter().map(|a| a * a).collect();
                lp_norm(&diag_sq, h.p)
                    * (lp_norm(&profile.diag_sq, h.q)
                        + (n as f64 - 1.0) * lp_norm(&profile.off_diagonal().collect::<Vec<_>>(), h.q))
            }
            BoundKind::MaxCrossScaled => {
                weight_sq * (profile.max_diag_sq() + (n as f64 - 1.0) * profile.max_cross())
            }
            BoundKind::EuclideanCross => {
                weight_sq * (profile.max_diag_sq() + lp_norm(&profile.off_diagonal().collect::<Vec<_>>(), 2.0))
            }
            BoundKind::AbsoluteCross => weight_sq * (profile.max_diag_sq() + profile.off_diagonal().sum::<f64>()),
            BoundKind::PowerMean(h) => {
                let factor = (n as f64).powf(2.0 / h.p - 1.0);
                weight_sq
                    * (profile.max_diag_sq() + factor * lp_norm(&profile.off_diagonal().collect::<Vec<_>>(), h.q))
            }
            BoundKind::Orthogonal(d) => diag_value(mags, profile, *d),
        }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = self.exponents();
        if e.is_empty() {
            write!(f, "{}", self.name())
        } else {
            write!(f, "{}({})", self.name(), e)
        }
    }
}

fn max_of(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(0.0, f64::max)
}

/// `(Σ x_i^p)^{1/p}` for nonnegative `x`, scaled by the maximum to stay in
/// range. Empty input gives 0.
pub(crate) fn lp_norm(values: &[f64], p: f64) -> f64 {
    let m = max_of(values.iter().copied());
    if m == 0.0 {
        return 0.0;
    }
    m * values.iter().map(|x| (x / m).powf(p)).sum::<f64>().powf(1.0 / p)
}

/// Products `|α_i||α_j|` over ordered pairs `i ≠ j`.
///
/// Summing these directly avoids the cancellation in the equivalent closed
/// form `(Σ|α_i|^r)² − Σ|α_i|^{2r}`.
fn weight_pairs(mags: &[f64]) -> Vec<f64> {
    let n = mags.len();
    let mut out = Vec::with_capacity(n * n.saturating_sub(1));
    for i in 0..n {
        for j in 0..n {
            if i != j {
                out.push(mags[i] * mags[j]);
            }
        }
    }
    out
}

fn diag_value(mags: &[f64], profile: &NormProfile, choice: DiagChoice) -> f64 {
    match choice {
        DiagChoice::MaxWeight => max_of(mags.iter().copied()).powi(2) * profile.diag_sq.iter().sum::<f64>(),
        DiagChoice::Holder(h) => {
            let sq: Vec<f64> = mags.iter().map(|a| a * a).collect();
            lp_norm(&sq, h.p) * lp_norm(&profile.diag_sq, h.q)
        }
        DiagChoice::MaxNorm => mags.iter().map(|a| a * a).sum::<f64>() * profile.max_diag_sq(),
    }
}

fn offdiag_value(mags: &[f64], profile: &NormProfile, choice: OffDiagChoice) -> f64 {
    if mags.len() < 2 {
        return 0.0;
    }
    let pairs = weight_pairs(mags);
    match choice {
        OffDiagChoice::MaxWeightPair => max_of(pairs.iter().copied()) * profile.off_diagonal().sum::<f64>(),
        OffDiagChoice::Holder(h) => {
            lp_norm(&pairs, h.p) * lp_norm(&profile.off_diagonal().collect::<Vec<_>>(), h.q)
        }
        OffDiagChoice::MaxCross => pairs.iter().sum::<f64>() * profile.max_cross(),
    }
}

/// `bound / lhs_sq`, with `0/0 = 1` and `x/0 = ∞`.
pub fn slack_ratio(lhs_sq: f64, bound: f64) -> f64 {
    if lhs_sq == 0.0 {
        if bound == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        bound / lhs_sq
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    /// Exact `‖Σ α_i A_i‖²`.
    pub lhs_sq: f64,
    pub bound: f64,
    pub kind: BoundKind,
    pub slack_ratio: f64,
}

impl BoundReport {
    pub fn new(kind: BoundKind, lhs_sq: f64, bound: f64) -> Self {
        Self {
            lhs_sq,
            bound,
            kind,
            slack_ratio: slack_ratio(lhs_sq, bound),
        }
    }

    pub fn holds(&self) -> bool {
        self.lhs_sq <= self.bound * (1.0 + crate::inequality::NORM_CHECK_TOL)
    }
}

/// Parses and validates an exponent grid (every entry `> 1`).
pub fn holder_grid(grid: &[f64]) -> Result<Vec<HolderPair>> {
    grid.iter().map(|&p| HolderPair::new(p)).collect()
}

/// `max_{i≠j} ‖A_i A_j*‖ ≤ tol · max ‖A_i‖²`
pub fn is_orthogonal(profile: &NormProfile, tol: f64) -> bool {
    profile.max_cross() <= tol * profile.max_diag_sq()
}

/// Catalog entries for a family of size `n`, in tie-break order.
pub fn catalog_kinds(grid: &[HolderPair], orthogonal: bool) -> Vec<BoundKind> {
    let mut kinds: Vec<BoundKind> = BoundConfig::sweep(grid).into_iter().map(BoundKind::Master).collect();
    kinds.push(BoundKind::MaxWeightAllPairs);
    kinds.extend(grid.iter().map(|&h| BoundKind::HolderUniform(h)));
    kinds.push(BoundKind::MaxCrossScaled);
    kinds.push(BoundKind::EuclideanCross);
    kinds.push(BoundKind::AbsoluteCross);
    let mut power: Vec<BoundKind> = grid
        .iter()
        .filter(|h| h.p <= 2.0)
        .map(|&h| BoundKind::PowerMean(h))
        .collect();
    if power.is_empty() {
        power.push(BoundKind::PowerMean(HolderPair::new(2.0).expect("2 is a valid exponent")));
    }
    kinds.extend(power);
    if orthogonal {
        kinds.extend(DiagChoice::expand(grid).into_iter().map(BoundKind::Orthogonal));
    }
    kinds
}

/// Evaluates the full catalog on raw norm data.
pub fn evaluate_catalog(mags: &[f64], profile: &NormProfile, grid: &[HolderPair]) -> Vec<(BoundKind, f64)> {
    let orthogonal = is_orthogonal(profile, ORTHOGONALITY_TOL);
    catalog_kinds(grid, orthogonal)
        .into_iter()
        .map(|k| (k, k.evaluate(mags, profile)))
        .collect()
}

/// First minimum in catalog order.
pub fn select_tightest(reports: &[BoundReport]) -> Option<BoundReport> {
    let mut best: Option<BoundReport> = None;
    for r in reports {
        match &best {
            Some(b) if r.bound >= b.bound => {}
            _ => best = Some(*r),
        }
    }
    best
}

fn validate_kind(kind: &BoundKind) -> Result<()> {
    let check = |h: &HolderPair| HolderPair::from_pair(h.p, h.q).map(|_| ());
    match kind {
        BoundKind::Master(c) => {
            if let DiagChoice::Holder(h) = &c.diag {
                check(h)?;
            }
            if let OffDiagChoice::Holder(h) = &c.offdiag {
                check(h)?;
            }
            Ok(())
        }
        BoundKind::HolderUniform(h) => check(h),
        BoundKind::PowerMean(h) => BoundKind::power_mean(h.p).map(|_| ()),
        BoundKind::Orthogonal(DiagChoice::Holder(h)) => check(h),
        _ => Ok(()),
    }
}

/// `‖Σ α_i A_i‖²`
pub fn lhs_norm_sq(alpha: &WeightVector, family: &OperatorFamily) -> Result<f64> {
    Ok(linalg::operator_norm(&family.weighted_sum(alpha)?)?.powi(2))
}

/// Upper bound for `Σ|α_i|² ‖A_i‖²`.
pub fn diag_term(alpha: &WeightVector, family: &OperatorFamily, choice: DiagChoice) -> Result<f64> {
    family.check_len(alpha)?;
    validate_kind(&BoundKind::Orthogonal(choice))?;
    Ok(diag_value(&alpha.magnitudes(), &family.profile(), choice))
}

/// Upper bound for `Σ_{i≠j} |α_i||α_j| ‖A_i A_j*‖`; zero when `n = 1`.
pub fn offdiag_term(alpha: &WeightVector, family: &OperatorFamily, choice: OffDiagChoice) -> Result<f64> {
    family.check_len(alpha)?;
    validate_kind(&BoundKind::Master(BoundConfig::new(DiagChoice::MaxNorm, choice)))?;
    Ok(offdiag_value(&alpha.magnitudes(), &family.profile(), choice))
}

/// Evaluates one catalog bound against the exact left-hand side.
pub fn bound_report(alpha: &WeightVector, family: &OperatorFamily, kind: BoundKind) -> Result<BoundReport> {
    family.check_len(alpha)?;
    validate_kind(&kind)?;
    let bound = kind.evaluate(&alpha.magnitudes(), &family.profile());
    Ok(BoundReport::new(kind, lhs_norm_sq(alpha, family)?, bound))
}

pub fn master_bound(alpha: &WeightVector, family: &OperatorFamily, config: BoundConfig) -> Result<BoundReport> {
    bound_report(alpha, family, BoundKind::Master(config))
}

pub fn bound_max_weight_all_pairs(alpha: &WeightVector, family: &OperatorFamily) -> Result<BoundReport> {
    bound_report(alpha, family, BoundKind::MaxWeightAllPairs)
}

pub fn bound_holder_uniform(alpha: &WeightVector, family: &OperatorFamily, hp: HolderPair) -> Result<BoundReport> {
    bound_report(alpha, family, BoundKind::HolderUniform(hp))
}

pub fn bound_max_cross_scaled(alpha: &WeightVector, family: &OperatorFamily) -> Result<BoundReport> {
    bound_report(alpha, family, BoundKind::MaxCrossScaled)
}

pub fn bound_euclidean_cross(alpha: &WeightVector, family: &OperatorFamily) -> Result<BoundReport> {
    bound_report(alpha, family, BoundKind::EuclideanCross)
}

pub fn bound_absolute_cross(alpha: &WeightVector, family: &OperatorFamily) -> Result<BoundReport> {
    bound_report(alpha, family, BoundKind::AbsoluteCross)
}

pub fn bound_power_mean(alpha: &WeightVector, family: &OperatorFamily, r: f64) -> Result<BoundReport> {
    bound_report(alpha, family, BoundKind::power_mean(r)?)
}

/// Bound for families with `A_i A_j* = 0` (`i ≠ j`), checked up to `tol`.
pub fn bound_orthogonal(
    alpha: &WeightVector,
    family: &OperatorFamily,
    choice: DiagChoice,
    tol: f64,
) -> Result<BoundReport> {
    family.check_len(alpha)?;
    let profile = family.profile();
    if !is_orthogonal(&profile, tol) {
        return Err(Error::NotOrthogonalFamily {
            max_cross: profile.max_cross(),
            allowed: tol * profile.max_diag_sq(),
        });
    }
    bound_report(alpha, family, BoundKind::Orthogonal(choice))
}

/// The whole catalog against one shared left-hand side.
pub fn catalog(alpha: &WeightVector, family: &OperatorFamily, grid: &[f64]) -> Result<Vec<BoundReport>> {
    family.check_len(alpha)?;
    let grid = holder_grid(grid)?;
    let lhs = lhs_norm_sq(alpha, family)?;
    Ok(evaluate_catalog(&alpha.magnitudes(), &family.profile(), &grid)
        .into_iter()
        .map(|(k, b)| BoundReport::new(k, lhs, b))
        .collect())
}

/// Smallest catalog bound; ties go to the earliest catalog entry.
pub fn tightest_bound(alpha: &WeightVector, family: &OperatorFamily, grid: &[f64]) -> Result<BoundReport> {
    let reports = catalog(alpha, family, grid)?;
    Ok(select_tightest(&reports).expect("catalog is never empty"))
}

fn check_vector(family: &OperatorFamily, x: &[Complex64]) -> Result<()> {
    if x.len() != family.dim() {
        return Err(Error::DimensionMismatch {
            expected: family.dim(),
            found: x.len(),
        });
    }
    Ok(())
}

fn image(alpha: &WeightVector, family: &OperatorFamily, x: &[Complex64]) -> Result<Vec<Complex64>> {
    family.check_len(alpha)?;
    check_vector(family, x)?;
    let mut out = vec![Complex64::new(0.0, 0.0); family.dim()];
    for (a, op) in alpha.as_slice().iter().zip(family.ops()) {
        for (o, v) in out.iter_mut().zip(op.mul_vec(x)?) {
            *o += a * v;
        }
    }
    Ok(out)
}

/// `‖Σ α_i A_i x‖² ≤ ‖x‖² M`
pub fn vector_image_bound(
    alpha: &WeightVector,
    family: &OperatorFamily,
    x: &[Complex64],
    m: f64,
) -> Result<NormCheck> {
    let y = image(alpha, family, x)?;
    Ok(NormCheck::new(linalg::norm_sq(&y), linalg::norm_sq(x) * m))
}

/// `|Σ α_i (A_i x, y)|² ≤ ‖x‖² ‖y‖² M`
pub fn bilinear_bound(
    alpha: &WeightVector,
    family: &OperatorFamily,
    x: &[Complex64],
    y: &[Complex64],
    m: f64,
) -> Result<NormCheck> {
    check_vector(family, y)?;
    let ax = image(alpha, family, x)?;
    let lhs = linalg::inner(&ax, y)?.norm_sqr();
    Ok(NormCheck::new(lhs, linalg::norm_sq(x) * linalg::norm_sq(y) * m))
}

/// Orthogonal rank-one projections `e_i e_i*` in `ℂ^dim`, handy for tests.
pub fn coordinate_projections(dim: usize, count: usize) -> Vec<ComplexMatrix> {
    (0..count)
        .map(|i| {
            let mut m = ComplexMatrix::zeros(dim);
            m[(i, i)] = Complex64::new(1.0, 0.0);
            m
        })
        .collect()
}
