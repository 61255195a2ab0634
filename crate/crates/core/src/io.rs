//! Problem files, report documents and their fixed float formatting.
//!
//! Complex numbers are `[re, im]` pairs. Every float is written as
//! `{:.16e}` (17 significant digits), which parses back to the same bits.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::bounds::BoundReport;
use crate::error::Error;
use crate::family::{OperatorFamily, WeightVector};
use crate::harness::{Check, InstanceSpec, VerificationResult};
use crate::linalg::{CVector, ComplexMatrix};
use crate::vectors::{self, VectorFamily};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IoError {
    /// Not well-formed JSON.
    Parse(String),
    /// Well-formed, but the wrong shape.
    Schema(String),
    /// Right shape, unusable values.
    Value(String),
    Io(String),
}

impl fmt::Display for IoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IoError::Parse(m) => write!(f, "parse error: {m}"),
            IoError::Schema(m) => write!(f, "schema error: {m}"),
            IoError::Value(m) => write!(f, "value error: {m}"),
            IoError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for IoError {}

impl From<io::Error> for IoError {
    fn from(e: io::Error) -> Self {
        IoError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for IoError {
    fn from(e: serde_json::Error) -> Self {
        use serde_json::error::Category;
        let msg = e.to_string();
        match e.classify() {
            Category::Io => IoError::Io(msg),
            Category::Syntax | Category::Eof if msg.contains("number out of range") => IoError::Value(msg),
            Category::Syntax | Category::Eof => IoError::Parse(msg),
            Category::Data => IoError::Schema(msg),
        }
    }
}

pub type Pair = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub schema_version: String,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<Pair>>,
    /// Each operator is a list of rows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operators: Option<Vec<Vec<Vec<Pair>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vectors: Option<Vec<Vec<Pair>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Operators,
    Vectors,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Operators => "operators",
            Mode::Vectors => "vectors",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightSource {
    Given,
    /// `α_i = ‖y_i‖`, the default in vectors mode.
    Bessel,
}

impl WeightSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            WeightSource::Given => "given",
            WeightSource::Bessel => "bessel",
        }
    }
}

fn complex(p: &Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

fn pair(z: &Complex64) -> Pair {
    [z.re, z.im]
}

fn all_finite<'a>(mut it: impl Iterator<Item = &'a Pair>) -> bool {
    it.all(|p| p[0].is_finite() && p[1].is_finite())
}

impl ProblemFile {
    pub fn mode(&self) -> Option<Mode> {
        match (&self.operators, &self.vectors) {
            (Some(_), None) => Some(Mode::Operators),
            (None, Some(_)) => Some(Mode::Vectors),
            _ => None,
        }
    }

    pub fn count(&self) -> usize {
        match (&self.operators, &self.vectors) {
            (Some(ops), _) => ops.len(),
            (_, Some(vs)) => vs.len(),
            _ => 0,
        }
    }

    pub fn validate(&self) -> Result<(), IoError> {
        let schema = |m: String| Err(IoError::Schema(m));
        if self.schema_version != SCHEMA_VERSION {
            return schema(format!("unsupported schema_version '{}'", self.schema_version));
        }
        if self.dim == 0 {
            return schema("dim must be positive".into());
        }
        let d = self.dim;
        let mode = match self.mode() {
            Some(m) => m,
            None => return schema("exactly one of 'operators' and 'vectors' must be present".into()),
        };
        let n = self.count();
        if n == 0 {
            return schema(format!("'{}' is empty", mode.as_str()));
        }
        match (mode, &self.weights) {
            (Mode::Operators, None) => return schema("operators mode requires 'weights'".into()),
            (_, Some(w)) if w.len() != n => {
                return schema(format!("{} weights for {} {}", w.len(), n, mode.as_str()));
            }
            _ => {}
        }
        if let Some(ops) = &self.operators {
            for (k, op) in ops.iter().enumerate() {
                if op.len() != d || op.iter().any(|row| row.len() != d) {
                    return schema(format!("operator {k} is not {d}×{d}"));
                }
            }
            if !ops.iter().flatten().all(|row| all_finite(row.iter())) {
                return Err(IoError::Value("non-finite operator entry".into()));
            }
        }
        if let Some(vs) = &self.vectors {
            for (k, v) in vs.iter().enumerate() {
                if v.len() != d {
                    return schema(format!("vector {k} has length {}, expected {d}", v.len()));
                }
            }
            if !vs.iter().all(|v| all_finite(v.iter())) {
                return Err(IoError::Value("non-finite vector entry".into()));
            }
            if let Some(k) = vs.iter().position(|v| v.iter().all(|p| p[0] == 0.0 && p[1] == 0.0)) {
                return Err(IoError::Value(format!("vector {k} is zero")));
            }
        }
        if let Some(w) = &self.weights {
            if !all_finite(w.iter()) {
                return Err(IoError::Value("non-finite weight".into()));
            }
        }
        Ok(())
    }

    /// Builds the in-memory problem. Only numerical failures can occur on a
    /// validated file.
    pub fn to_problem(&self) -> crate::Result<Problem> {
        self.validate().map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let given = self
            .weights
            .as_ref()
            .map(|w| WeightVector::new(w.iter().map(complex).collect()))
            .transpose()?;
        if let Some(ops) = &self.operators {
            let mats = ops
                .iter()
                .map(|rows| ComplexMatrix::from_rows(rows.iter().map(|r| r.iter().map(complex).collect()).collect()))
                .collect::<crate::Result<Vec<_>>>()?;
            return Ok(Problem::Operators {
                weights: given.expect("validated"),
                family: OperatorFamily::new(mats)?,
            });
        }
        let vs: Vec<CVector> = self
            .vectors
            .as_ref()
            .expect("validated")
            .iter()
            .map(|v| v.iter().map(complex).collect())
            .collect();
        let family = VectorFamily::new(vs)?;
        let (weights, source) = match given {
            Some(w) => (w, WeightSource::Given),
            None => (vectors::bessel_weighting(&family), WeightSource::Bessel),
        };
        Ok(Problem::Vectors {
            weights,
            source,
            family,
        })
    }

    pub fn from_operators(weights: &WeightVector, family: &OperatorFamily) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.into(),
            dim: family.dim(),
            weights: Some(weights.as_slice().iter().map(pair).collect()),
            operators: Some(
                family
                    .ops()
                    .iter()
                    .map(|m| m.rows().map(|r| r.iter().map(pair).collect()).collect())
                    .collect(),
            ),
            vectors: None,
        }
    }

    /// `weights = None` leaves them to the Bessel default.
    pub fn from_vectors(weights: Option<&WeightVector>, family: &VectorFamily) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.into(),
            dim: family.dim(),
            weights: weights.map(|w| w.as_slice().iter().map(pair).collect()),
            operators: None,
            vectors: Some(family.vectors().iter().map(|v| v.iter().map(pair).collect()).collect()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    Operators {
        weights: WeightVector,
        family: OperatorFamily,
    },
    Vectors {
        weights: WeightVector,
        source: WeightSource,
        family: VectorFamily,
    },
}

impl Problem {
    pub fn mode(&self) -> Mode {
        match self {
            Problem::Operators { .. } => Mode::Operators,
            Problem::Vectors { .. } => Mode::Vectors,
        }
    }

    pub fn weights(&self) -> &WeightVector {
        match self {
            Problem::Operators { weights, .. } | Problem::Vectors { weights, .. } => weights,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Problem::Operators { family, .. } => family.dim(),
            Problem::Vectors { family, .. } => family.dim(),
        }
    }

    pub fn count(&self) -> usize {
        self.weights().len()
    }

    pub fn weight_source(&self) -> WeightSource {
        match self {
            Problem::Operators { .. } => WeightSource::Given,
            Problem::Vectors { source, .. } => *source,
        }
    }
}

pub fn parse_problem(text: &str) -> Result<ProblemFile, IoError> {
    // syntax first, so a truncated document is never reported as a shape error
    let value: serde_json::Value = serde_json::from_str(text)?;
    let file = ProblemFile::deserialize(value).map_err(|e| IoError::Schema(e.to_string()))?;
    file.validate()?;
    Ok(file)
}

pub fn load_problem(path: impl AsRef<Path>) -> Result<ProblemFile, IoError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| IoError::Io(format!("{}: {e}", path.display())))?;
    parse_problem(&text)
}

/// Pretty JSON with every float written as `{:.16e}`.
pub struct FixedFloatFormatter(PrettyFormatter<'static>);

impl Default for FixedFloatFormatter {
    fn default() -> Self {
        Self(PrettyFormatter::with_indent(b"  "))
    }
}

impl Formatter for FixedFloatFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(format!("{value:.16e}").as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serializes `value` with [`FixedFloatFormatter`], newline-terminated.
/// Non-finite floats must be mapped beforehand (see [`Real`]).
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String, IoError> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloatFormatter::default());
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

pub fn write_problem(file: &ProblemFile, path: impl AsRef<Path>) -> Result<(), IoError> {
    fs::write(path, to_json_string(file)?)?;
    Ok(())
}

/// A float that serializes as a string when it is not finite (`"inf"`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real(pub f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str(&self.0.to_string())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputDigest {
    pub mode: &'static str,
    pub dim: usize,
    pub count: usize,
    pub weights: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spec: Option<SpecDigest>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpecDigest {
    pub kind: String,
    pub dim: usize,
    pub count: usize,
    pub seed: u64,
}

impl From<&InstanceSpec> for SpecDigest {
    fn from(s: &InstanceSpec) -> Self {
        Self {
            kind: s.kind.to_string(),
            dim: s.dim,
            count: s.count,
            seed: s.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundEntry {
    pub name: String,
    pub exponents: String,
    pub value: Real,
    pub slack_ratio: Real,
}

impl From<&BoundReport> for BoundEntry {
    fn from(r: &BoundReport) -> Self {
        Self {
            name: r.kind.name(),
            exponents: r.kind.exponents(),
            value: Real(r.bound),
            slack_ratio: Real(r.slack_ratio),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckEntry {
    pub name: String,
    pub exponents: String,
    pub lhs: Real,
    pub bound: Real,
    pub holds: bool,
    /// `lhs / bound − 1` clamped at 0; separates rounding from real failures.
    pub violation: Real,
}

impl From<&Check> for CheckEntry {
    fn from(c: &Check) -> Self {
        Self {
            name: c.name.clone(),
            exponents: c.exponents.clone(),
            lhs: Real(c.lhs),
            bound: Real(c.bound),
            holds: c.holds,
            violation: Real(c.violation()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportDocument {
    pub schema_version: &'static str,
    pub command: &'static str,
    pub input: InputDigest,
    /// Exact `‖Σ α_i A_i‖²`.
    pub lhs: Real,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub bounds: Vec<BoundEntry>,
    pub tightest: BoundEntry,
    pub checks: Vec<CheckEntry>,
    pub all_hold: bool,
    pub worst_violation: Real,
}

impl ReportDocument {
    /// Report for a computed catalog; each bound doubles as a check.
    pub fn for_bounds(input: InputDigest, catalog: &[BoundReport], tol: f64) -> Self {
        let tightest = crate::bounds::select_tightest(catalog).expect("catalog is never empty");
        let checks: Vec<CheckEntry> = catalog
            .iter()
            .map(|r| {
                let c = Check {
                    name: r.kind.name(),
                    exponents: r.kind.exponents(),
                    lhs: r.lhs_sq,
                    bound: r.bound,
                    holds: r.lhs_sq <= r.bound * (1.0 + tol),
                    slack_ratio: r.slack_ratio,
                };
                CheckEntry::from(&c)
            })
            .collect();
        Self::assemble("bound", input, tightest.lhs_sq, catalog.iter().map(BoundEntry::from).collect(), &tightest, checks)
    }

    pub fn for_verification(input: InputDigest, result: &VerificationResult) -> Self {
        let checks = result.checks.iter().map(CheckEntry::from).collect();
        Self::assemble("verify", input, result.tightest.lhs_sq, Vec::new(), &result.tightest, checks)
    }

    fn assemble(
        command: &'static str,
        input: InputDigest,
        lhs: f64,
        bounds: Vec<BoundEntry>,
        tightest: &BoundReport,
        checks: Vec<CheckEntry>,
    ) -> Self {
        let all_hold = checks.iter().all(|c| c.holds);
        let worst_violation = checks.iter().filter(|c| !c.holds).map(|c| c.violation.0).fold(0.0, f64::max);
        Self {
            schema_version: SCHEMA_VERSION,
            command,
            input,
            lhs: Real(lhs),
            bounds,
            tightest: BoundEntry::from(tightest),
            checks,
            all_hold,
            worst_violation: Real(worst_violation),
        }
    }

    pub fn to_json(&self) -> Result<String, IoError> {
        to_json_string(self)
    }
}

impl InputDigest {
    pub fn for_problem(p: &Problem) -> Self {
        Self {
            mode: p.mode().as_str(),
            dim: p.dim(),
            count: p.count(),
            weights: p.weight_source().as_str(),
            spec: None,
        }
    }

    pub fn for_spec(spec: &InstanceSpec) -> Self {
        Self {
            mode: if spec.kind.has_vectors() { "vectors" } else { "operators" },
            dim: spec.dim,
            count: spec.count,
            weights: "given",
            spec: Some(SpecDigest::from(spec)),
        }
    }
}
