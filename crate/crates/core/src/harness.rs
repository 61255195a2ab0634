//! Seeded instance generation, full-catalog verification and slack sweeps.
//!
//! Randomness comes from ChaCha8 (`rand_chacha`), seeded with
//! `seed_from_u64`. Uniforms take the top 53 bits of `next_u64`; normals use
//! Box-Muller on those uniforms. No library distributions are involved, so a
//! seed pins the instance independent of `rand` version changes.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bounds::{self, BoundReport};
use crate::error::{Error, Result};
use crate::family::{OperatorFamily, WeightVector};
use crate::inequality;
use crate::linalg::{self, CVector, ComplexMatrix, DEFAULT_PSD_TOL};
use crate::vectors::{self, VectorFamily};

pub const DEFAULT_VERIFY_TOL: f64 = 1e-9;
pub const DEFAULT_PROBES: usize = 8;

pub const CSV_HEADER: [&str; 9] = [
    "seed",
    "kind",
    "dim",
    "count",
    "bound",
    "exponents",
    "lhs",
    "bound_value",
    "slack_ratio",
];

pub struct SeededRng(ChaCha8Rng);

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Independent stream for the same seed.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self(rng)
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn below(&mut self, n: usize) -> usize {
        ((self.uniform() * n as f64) as usize).min(n - 1)
    }

    /// Two independent standard normals.
    pub fn normal_pair(&mut self) -> (f64, f64) {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let t = std::f64::consts::TAU * u2;
        (r * t.cos(), r * t.sin())
    }

    /// Standard complex normal, `E|z|² = 1`.
    pub fn complex_normal(&mut self) -> Complex64 {
        let (a, b) = self.normal_pair();
        Complex64::new(a, b) * std::f64::consts::FRAC_1_SQRT_2
    }

    pub fn complex_vector(&mut self, d: usize) -> CVector {
        (0..d).map(|_| self.complex_normal()).collect()
    }

    pub fn complex_matrix(&mut self, d: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(d, |_, _| self.complex_normal())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InstanceKind {
    GaussianDense,
    UnitaryScaled,
    RankOneFromVectors,
    BlockOrthogonal,
    OrthonormalRankOne,
}

impl InstanceKind {
    pub const ALL: [InstanceKind; 5] = [
        InstanceKind::GaussianDense,
        InstanceKind::UnitaryScaled,
        InstanceKind::RankOneFromVectors,
        InstanceKind::BlockOrthogonal,
        InstanceKind::OrthonormalRankOne,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            InstanceKind::GaussianDense => "gaussian-dense",
            InstanceKind::UnitaryScaled => "unitary-scaled",
            InstanceKind::RankOneFromVectors => "rank-one-from-vectors",
            InstanceKind::BlockOrthogonal => "block-orthogonal",
            InstanceKind::OrthonormalRankOne => "orthonormal-rank-one",
        }
    }

    /// Kinds built from a vector family (rank-one operators).
    pub fn has_vectors(&self) -> bool {
        matches!(self, InstanceKind::RankOneFromVectors | InstanceKind::OrthonormalRankOne)
    }

    /// Kinds whose cross products `A_i A_j*` vanish by construction.
    pub fn is_orthogonal(&self) -> bool {
        matches!(self, InstanceKind::BlockOrthogonal | InstanceKind::OrthonormalRankOne)
    }
}

impl fmt::Display for InstanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InstanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_lowercase();
        Self::ALL
            .into_iter()
            .find(|k| k.as_str().replace('-', "") == key)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown instance kind '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct InstanceSpec {
    pub kind: InstanceKind,
    pub dim: usize,
    pub count: usize,
    pub seed: u64,
}

impl InstanceSpec {
    pub fn new(kind: InstanceKind, dim: usize, count: usize, seed: u64) -> Self {
        Self { kind, dim, count, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.count == 0 {
            return Err(Error::InvalidSpec(format!(
                "dim and count must be positive (dim={}, count={})",
                self.dim, self.count
            )));
        }
        if self.kind.is_orthogonal() && self.dim < self.count {
            return Err(Error::InvalidSpec(format!(
                "{} needs dim ≥ count (dim={}, count={})",
                self.kind, self.dim, self.count
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub spec: InstanceSpec,
    pub weights: WeightVector,
    pub family: OperatorFamily,
    /// Present for the rank-one kinds.
    pub vectors: Option<VectorFamily>,
}

/// Builds the instance for `spec`; a pure function of the spec.
pub fn generate(spec: &InstanceSpec) -> Result<Instance> {
    spec.validate()?;
    let InstanceSpec { kind, dim: d, count: n, seed } = *spec;
    let mut rng = SeededRng::new(seed);

    let (ops, vectors) = match kind {
        InstanceKind::GaussianDense => ((0..n).map(|_| rng.complex_matrix(d)).collect(), None),
        InstanceKind::UnitaryScaled => (
            (0..n)
                .map(|_| {
                    let u = random_unitary(&mut rng, d);
                    let c = 0.25 + 1.75 * rng.uniform();
                    u.scale_real(c)
                })
                .collect(),
            None,
        ),
        InstanceKind::RankOneFromVectors => {
            let mut ys = Vec::with_capacity(n);
            while ys.len() < n {
                let y = rng.complex_vector(d);
                if linalg::norm(&y) > 0.0 {
                    ys.push(y);
                }
            }
            let fam = VectorFamily::new(ys)?;
            (Vec::new(), Some(fam))
        }
        InstanceKind::BlockOrthogonal => {
            let ops = block_ranges(d, n)
                .into_iter()
                .map(|(lo, hi)| {
                    let mut m = ComplexMatrix::zeros(d);
                    for r in lo..hi {
                        for c in lo..hi {
                            m[(r, c)] = rng.complex_normal();
                        }
                    }
                    m
                })
                .collect();
            (ops, None)
        }
        InstanceKind::OrthonormalRankOne => {
            // partial Fisher-Yates over the coordinates, then a unit phase
            let mut coords: Vec<usize> = (0..d).collect();
            for i in 0..n {
                let j = i + rng.below(d - i);
                coords.swap(i, j);
            }
            let ys: Vec<CVector> = coords[..n]
                .iter()
                .map(|&k| {
                    let phase = Complex64::from_polar(1.0, std::f64::consts::TAU * rng.uniform());
                    let mut y = vec![Complex64::new(0.0, 0.0); d];
                    y[k] = phase;
                    y
                })
                .collect();
            let fam = VectorFamily::new(ys)?;
            (Vec::new(), Some(fam))
        }
    };

    let family = match &vectors {
        Some(v) => vectors::rank_one_family(v)?,
        None => OperatorFamily::new(ops)?,
    };
    let weights = WeightVector::new((0..n).map(|_| rng.complex_normal()).collect())?;
    Ok(Instance {
        spec: *spec,
        weights,
        family,
        vectors,
    })
}

/// Contiguous, disjoint coordinate blocks covering `0..d`, one per operator.
fn block_ranges(d: usize, n: usize) -> Vec<(usize, usize)> {
    let base = d / n;
    let extra = d % n;
    let mut lo = 0;
    (0..n)
        .map(|i| {
            let len = base + usize::from(i < extra);
            let r = (lo, lo + len);
            lo += len;
            r
        })
        .collect()
}

/// Orthonormalized columns of a Gaussian matrix (Gram-Schmidt, two passes).
fn random_unitary(rng: &mut SeededRng, d: usize) -> ComplexMatrix {
    let mut cols: Vec<CVector> = Vec::with_capacity(d);
    while cols.len() < d {
        let mut v = rng.complex_vector(d);
        for _ in 0..2 {
            for q in &cols {
                let p = linalg::inner(&v, q).expect("same length");
                for (a, b) in v.iter_mut().zip(q) {
                    *a -= p * b;
                }
            }
        }
        let nv = linalg::norm(&v);
        if nv > 1e-8 {
            v.iter_mut().for_each(|z| *z /= nv);
            cols.push(v);
        }
    }
    ComplexMatrix::from_fn(d, |r, c| cols[c][r])
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    /// Relative slack for norm comparisons.
    pub tol: f64,
    /// Tolerance of the operator-order check, relative to `max(1, ‖gap‖)`.
    pub psd_tol: f64,
    pub grid: Vec<f64>,
    /// Random probes for the vector and bilinear forms; the all-ones probe
    /// is always added.
    pub probes: usize,
    pub probe_seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_VERIFY_TOL,
            psd_tol: DEFAULT_PSD_TOL,
            grid: bounds::DEFAULT_GRID.to_vec(),
            probes: DEFAULT_PROBES,
            probe_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub exponents: String,
    pub lhs: f64,
    pub bound: f64,
    pub holds: bool,
    pub slack_ratio: f64,
}

impl Check {
    fn norm(name: impl Into<String>, exponents: String, lhs: f64, bound: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            exponents,
            lhs,
            bound,
            holds: lhs <= bound * (1.0 + tol),
            slack_ratio: bounds::slack_ratio(lhs, bound),
        }
    }

    /// `lhs / bound − 1`, clamped at 0.
    pub fn violation(&self) -> f64 {
        if self.lhs <= 0.0 {
            0.0
        } else if self.bound <= 0.0 {
            f64::INFINITY
        } else {
            (self.lhs / self.bound - 1.0).max(0.0)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationResult {
    pub spec: Option<InstanceSpec>,
    pub checks: Vec<Check>,
    pub tightest: BoundReport,
    pub all_hold: bool,
    /// Largest [`Check::violation`] among failing checks; 0 when all hold.
    pub worst_violation: f64,
}

/// Probe pairs `(x, y)`: `probes` seeded random pairs, then all-ones.
pub fn probe_vectors(dim: usize, probes: usize, seed: u64) -> Vec<(CVector, CVector)> {
    let mut rng = SeededRng::with_stream(seed, 1);
    let mut out: Vec<(CVector, CVector)> = (0..probes)
        .map(|_| (rng.complex_vector(dim), rng.complex_vector(dim)))
        .collect();
    let ones = vec![Complex64::new(1.0, 0.0); dim];
    out.push((ones.clone(), ones));
    out
}

/// Runs every inequality on one weighted family.
///
/// The operator-order check reports `lhs = max(0, −λ_min(gap))` against
/// `bound = psd_tol · max(1, ‖gap‖)`; all other checks compare squared norms.
pub fn verify_instance(alpha: &WeightVector, family: &OperatorFamily, opts: &VerifyOptions) -> Result<VerificationResult> {
    if !(opts.tol.is_finite() && opts.tol > 0.0 && opts.psd_tol.is_finite() && opts.psd_tol > 0.0) {
        return Err(Error::InvalidArgument("tolerances must be positive".into()));
    }
    let mut checks = Vec::new();

    let gap = inequality::cbs_operator_gap(alpha, family, opts.psd_tol)?;
    checks.push(Check {
        name: "operator_order_gap".into(),
        exponents: String::new(),
        lhs: (-gap.min_eigenvalue).max(0.0),
        bound: opts.psd_tol * gap.gap_norm.max(1.0),
        holds: gap.holds,
        slack_ratio: bounds::slack_ratio((-gap.min_eigenvalue).max(0.0), opts.psd_tol * gap.gap_norm.max(1.0)),
    });
    let product_lhs = (-gap.product_min_eigenvalue).max(0.0);
    let product_bound = opts.psd_tol * gap.product_norm.max(1.0);
    checks.push(Check {
        name: "weighted_product_psd".into(),
        exponents: String::new(),
        lhs: product_lhs,
        bound: product_bound,
        holds: gap.product_psd,
        slack_ratio: bounds::slack_ratio(product_lhs, product_bound),
    });

    let norm_form = inequality::cbs_norm_check(alpha, family)?;
    checks.push(Check::norm("operator_order_norm", String::new(), norm_form.lhs, norm_form.rhs, opts.tol));

    let catalog = bounds::catalog(alpha, family, &opts.grid)?;
    for r in &catalog {
        checks.push(Check::norm(r.kind.name(), r.kind.exponents(), r.lhs_sq, r.bound, opts.tol));
    }
    let tightest = bounds::select_tightest(&catalog).expect("catalog is never empty");

    for (k, (x, y)) in probe_vectors(family.dim(), opts.probes, opts.probe_seed).iter().enumerate() {
        let image = bounds::vector_image_bound(alpha, family, x, tightest.bound)?;
        checks.push(Check::norm(format!("vector_image#{k}"), String::new(), image.lhs, image.rhs, opts.tol));
        let bil = bounds::bilinear_bound(alpha, family, x, y, tightest.bound)?;
        checks.push(Check::norm(format!("bilinear#{k}"), String::new(), bil.lhs, bil.rhs, opts.tol));
    }

    let all_hold = checks.iter().all(|c| c.holds);
    let worst_violation = checks.iter().filter(|c| !c.holds).map(Check::violation).fold(0.0, f64::max);
    Ok(VerificationResult {
        spec: None,
        checks,
        tightest,
        all_hold,
        worst_violation,
    })
}

/// Verifies the rank-one family of `vectors`, then adds the Gram-path
/// catalog (prefixed `gram:`) at unit probe norm.
pub fn verify_vectors(alpha: &WeightVector, vectors: &VectorFamily, opts: &VerifyOptions) -> Result<VerificationResult> {
    let family = vectors::rank_one_family(vectors)?;
    let mut result = verify_instance(alpha, &family, opts)?;
    for r in vectors::gram_catalog(alpha, vectors, 1.0, &opts.grid)? {
        result.checks.push(Check::norm(
            format!("gram:{}", r.kind.name()),
            r.kind.exponents(),
            r.lhs_sq,
            r.bound,
            opts.tol,
        ));
    }
    result.all_hold = result.checks.iter().all(|c| c.holds);
    result.worst_violation = result.checks.iter().filter(|c| !c.holds).map(Check::violation).fold(0.0, f64::max);
    Ok(result)
}

/// Generates and verifies one spec. Probes are seeded from the spec seed.
pub fn verify_spec(spec: &InstanceSpec, opts: &VerifyOptions) -> Result<VerificationResult> {
    let inst = generate(spec)?;
    let opts = VerifyOptions {
        probe_seed: spec.seed,
        ..opts.clone()
    };
    let mut result = match &inst.vectors {
        Some(vf) => verify_vectors(&inst.weights, vf, &opts)?,
        None => verify_instance(&inst.weights, &inst.family, &opts)?,
    };
    result.spec = Some(*spec);
    Ok(result)
}

/// Verifies specs in parallel; results come back in spec order.
pub fn verify_specs(specs: &[InstanceSpec], opts: &VerifyOptions) -> Result<Vec<VerificationResult>> {
    specs.par_iter().map(|s| verify_spec(s, opts)).collect()
}

/// Specs cycling through `dims × counts` with seeds `base_seed..`.
///
/// Orthogonal kinds raise the dimension to at least the count.
pub fn ensemble(
    kind: InstanceKind,
    instances: usize,
    dims: std::ops::RangeInclusive<usize>,
    counts: std::ops::RangeInclusive<usize>,
    base_seed: u64,
) -> Vec<InstanceSpec> {
    let dims: Vec<usize> = dims.collect();
    let counts: Vec<usize> = counts.collect();
    (0..instances)
        .map(|i| {
            let n = counts[i % counts.len()];
            let mut d = dims[(i / counts.len()) % dims.len()];
            if kind.is_orthogonal() {
                d = d.max(n);
            }
            InstanceSpec::new(kind, d, n, base_seed + i as u64)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub seed: u64,
    pub kind: InstanceKind,
    pub dim: usize,
    pub count: usize,
    pub bound: String,
    pub exponents: String,
    pub lhs: f64,
    pub bound_value: f64,
    pub slack_ratio: f64,
}

/// One row per (instance, catalog entry), in spec order then catalog order.
pub fn slack_sweep(specs: &[InstanceSpec], grid: &[f64]) -> Result<Vec<SweepRow>> {
    bounds::holder_grid(grid)?;
    let per_spec: Vec<Vec<SweepRow>> = specs
        .par_iter()
        .map(|spec| {
            let inst = generate(spec)?;
            Ok(bounds::catalog(&inst.weights, &inst.family, grid)?
                .into_iter()
                .map(|r| SweepRow {
                    seed: spec.seed,
                    kind: spec.kind,
                    dim: spec.dim,
                    count: spec.count,
                    bound: r.kind.name(),
                    exponents: r.kind.exponents(),
                    lhs: r.lhs_sq,
                    bound_value: r.bound,
                    slack_ratio: r.slack_ratio,
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(per_spec.into_iter().flatten().collect())
}

/// 17 significant digits in scientific notation; `inf`/`-inf`/`NaN` otherwise.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.seed.to_string(),
            r.kind.to_string(),
            r.dim.to_string(),
            r.count.to_string(),
            r.bound.clone(),
            r.exponents.clone(),
            format_float(r.lhs),
            format_float(r.bound_value),
            format_float(r.slack_ratio),
        ])?;
    }
    w.flush()?;
    Ok(())
}
