//! TOML problem files.
//!
//! ```toml
//! eps0 = 0.2          # optional, parameter range [0, eps0); default 1
//! grid = 1000         # optional, default number of grid subintervals
//! A = [["0", "1"], ["-1", "eps*t"]]   # m x m expressions in t, eps
//! f = ["0", "sin(t)"]                 # m expressions in t, eps
//! q = ["1", "1+2i"]                   # m expressions in eps
//!
//! [interval]
//! a = 0.0
//! b = 1.0
//!
//! [space]
//! n = 0
//! alpha = 0.0
//! m = 2
//!
//! [boundary]
//! betas = [[["1", "0"], ["0", "1"]]]  # n + 1 matrices of expressions in eps
//! density = [["0", "0"], ["0", "1"]]  # optional, expressions in t, eps
//!
//! [[boundary.jumps]]                  # optional, any number
//! location = "0.5 + eps"
//! matrix = [["1", "0"], ["0", "0"]]
//!
//! [limit]                             # optional data used at eps = 0 instead
//! A = [["0", "1"], ["-1", "0"]]       # of substituting eps = 0; any subset of
//! density = [["0", "0"], ["0", "0"]]  # A, f, q, betas, jumps, density
//! ```
//!
//! Expressions use the syntax of [`crate::funcspace::parse_expr`]. The text of
//! every expression is kept verbatim, so writing a parsed file back out and
//! reading it again gives the same family.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspace::{parse_expr, Expr, ExprMatrix, Interval, Var};
use crate::holder::HolderParams;
use crate::param_family::{BoundaryTemplate, JumpTemplate, LimitOverrides, ProblemFamily};

type TextMatrix = Vec<Vec<String>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalBlock {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceBlock {
    pub n: usize,
    pub alpha: f64,
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpBlock {
    pub location: String,
    pub matrix: TextMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryBlock {
    pub betas: Vec<TextMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<TextMatrix>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub jumps: Vec<JumpBlock>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitBlock {
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<TextMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub betas: Option<Vec<TextMatrix>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<TextMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jumps: Option<Vec<JumpBlock>>,
}

/// The document as written, field for field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(rename = "A")]
    pub a: TextMatrix,
    pub f: Vec<String>,
    pub q: Vec<String>,
    pub interval: IntervalBlock,
    pub space: SpaceBlock,
    pub boundary: BoundaryBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<LimitBlock>,
}

/// A parsed and validated problem file.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemFile {
    document: ProblemDocument,
    family: ProblemFamily,
}

impl ProblemFile {
    pub fn document(&self) -> &ProblemDocument {
        &self.document
    }

    pub fn family(&self) -> &ProblemFamily {
        &self.family
    }

    pub fn into_family(self) -> ProblemFamily {
        self.family
    }

    /// Default grid size from the file, if given.
    pub fn grid(&self) -> Option<usize> {
        self.document.grid
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(&self.document).map_err(|e| Error::parse("<document>", e.to_string()))
    }
}

fn expr(block: &str, src: &str) -> Result<Expr> {
    parse_expr(src).map_err(|msg| Error::parse(block, format!("`{src}`: {msg}")))
}

fn matrix(block: &str, rows: &TextMatrix, shape: (usize, usize)) -> Result<ExprMatrix> {
    if rows.len() != shape.0 || rows.iter().any(|r| r.len() != shape.1) {
        let got: Vec<usize> = rows.iter().map(Vec::len).collect();
        return Err(Error::dimension(
            block,
            format!("expected {}x{}, got {} rows with lengths {got:?}", shape.0, shape.1, rows.len()),
        ));
    }
    let entries = rows
        .iter()
        .enumerate()
        .flat_map(|(i, r)| r.iter().enumerate().map(move |(j, s)| (i, j, s)))
        .map(|(i, j, s)| expr(&format!("{block}[{i}][{j}]"), s))
        .collect::<Result<Vec<_>>>()?;
    ExprMatrix::new(shape.0, shape.1, entries)
}

fn vector(block: &str, items: &[String], m: usize) -> Result<ExprMatrix> {
    if items.len() != m {
        return Err(Error::dimension(block, format!("expected {m} entries, got {}", items.len())));
    }
    let entries = items
        .iter()
        .enumerate()
        .map(|(i, s)| expr(&format!("{block}[{i}]"), s))
        .collect::<Result<Vec<_>>>()?;
    ExprMatrix::column(entries)
}

fn eps_only(block: &str, m: &ExprMatrix) -> Result<()> {
    if m.depends_on(Var::T) {
        return Err(Error::parse(block, "must not depend on t"));
    }
    Ok(())
}

fn betas(block: &str, items: &[TextMatrix], n: usize, m: usize) -> Result<Vec<ExprMatrix>> {
    if items.len() != n + 1 {
        return Err(Error::dimension(block, format!("expected n + 1 = {} matrices, got {}", n + 1, items.len())));
    }
    items
        .iter()
        .enumerate()
        .map(|(k, b)| {
            let name = format!("{block}[{k}]");
            let e = matrix(&name, b, (m, m))?;
            eps_only(&name, &e)?;
            Ok(e)
        })
        .collect()
}

fn jumps(block: &str, items: &[JumpBlock], m: usize) -> Result<Vec<JumpTemplate>> {
    items
        .iter()
        .enumerate()
        .map(|(k, j)| {
            let name = format!("{block}[{k}]");
            let location = expr(&format!("{name}.location"), &j.location)?;
            if location.depends_on(Var::T) {
                return Err(Error::parse(format!("{name}.location"), "must not depend on t"));
            }
            let matrix = matrix(&format!("{name}.matrix"), &j.matrix, (m, m))?;
            eps_only(&format!("{name}.matrix"), &matrix)?;
            Ok(JumpTemplate { location, matrix })
        })
        .collect()
}

fn build_family(doc: &ProblemDocument) -> Result<ProblemFamily> {
    let SpaceBlock { n, alpha, m } = doc.space;
    if m == 0 {
        return Err(Error::dimension("space.m", "m must be at least 1"));
    }
    HolderParams::new(n, alpha).map_err(|e| Error::parse("space.alpha", e.to_string()))?;
    let interval = Interval::new(doc.interval.a, doc.interval.b)
        .map_err(|e| Error::parse("interval", e.to_string()))?;
    let eps0 = doc.eps0.unwrap_or(1.0);
    if !(eps0 > 0.0 && eps0.is_finite()) {
        return Err(Error::parse("eps0", "must be a positive number"));
    }
    if doc.grid.is_some_and(|g| g < 2) {
        return Err(Error::parse("grid", "needs at least 2 subintervals"));
    }
    let a = matrix("A", &doc.a, (m, m))?;
    let f = vector("f", &doc.f, m)?;
    let q = vector("q", &doc.q, m)?;
    eps_only("q", &q)?;
    let b = &doc.boundary;
    let boundary = BoundaryTemplate {
        betas: betas("boundary.betas", &b.betas, n, m)?,
        jumps: jumps("boundary.jumps", &b.jumps, m)?,
        density: b.density.as_ref().map(|d| matrix("boundary.density", d, (m, m))).transpose()?,
    };
    let limit = match &doc.limit {
        None => LimitOverrides::default(),
        Some(l) => LimitOverrides {
            a: l.a.as_ref().map(|x| matrix("limit.A", x, (m, m))).transpose()?,
            f: l.f.as_ref().map(|x| vector("limit.f", x, m)).transpose()?,
            q: l
                .q
                .as_ref()
                .map(|x| vector("limit.q", x, m).and_then(|v| eps_only("limit.q", &v).map(|_| v)))
                .transpose()?,
            betas: l.betas.as_ref().map(|x| betas("limit.betas", x, n, m)).transpose()?,
            jumps: l.jumps.as_ref().map(|x| jumps("limit.jumps", x, m)).transpose()?,
            density: l.density.as_ref().map(|d| matrix("limit.density", d, (m, m))).transpose()?,
        },
    };
    let family = ProblemFamily { interval, n, alpha, m, eps0, a, f, boundary, q, limit };
    // Jump locations and shapes are checked once at the limit.
    family.limit_instance()?;
    Ok(family)
}

fn toml_error(e: toml::de::Error) -> Error {
    let msg = e.message().to_string();
    let block = msg
        .strip_prefix("missing field `")
        .and_then(|rest| rest.split('`').next())
        .map(str::to_string)
        .unwrap_or_else(|| "<document>".to_string());
    Error::parse(block, e.to_string().trim_end().to_string())
}

pub fn parse_problem_str(src: &str) -> Result<ProblemFile> {
    let document: ProblemDocument = toml::from_str(src).map_err(toml_error)?;
    let family = build_family(&document)?;
    Ok(ProblemFile { document, family })
}

pub fn parse_problem_file(path: impl AsRef<Path>) -> Result<ProblemFile> {
    let path = path.as_ref();
    let src = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_problem_str(&src)
}

/// Reads and validates a problem file into a family.
pub fn parse_problem(path: impl AsRef<Path>) -> Result<ProblemFamily> {
    parse_problem_file(path).map(ProblemFile::into_family)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CAUCHY: &str = r#"
A = [["1"]]
f = ["0"]
q = ["1"]

[interval]
a = 0.0
b = 1.0

[space]
n = 0
alpha = 0.0
m = 1

[boundary]
betas = [[["1"]]]
"#;

    #[test]
    fn minimal_cauchy_file() {
        let file = parse_problem_str(CAUCHY).unwrap();
        let fam = file.family();
        assert_eq!((fam.n, fam.m), (0, 1));
        assert!(!fam.depends_on_eps());
        assert_eq!(fam.eps0, 1.0);
    }

    #[test]
    fn missing_q_names_block() {
        let src = CAUCHY.replace("q = [\"1\"]\n", "");
        match parse_problem_str(&src) {
            Err(Error::Parse { block, .. }) => assert_eq!(block, "q"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn wrong_shape_is_dimension_error() {
        let src = CAUCHY
            .replace(r#"A = [["1"]]"#, r#"A = [["1", "0", "0"], ["0", "1", "0"]]"#)
            .replace("m = 1", "m = 2")
            .replace(r#"f = ["0"]"#, r#"f = ["0", "0"]"#)
            .replace(r#"q = ["1"]"#, r#"q = ["1", "0"]"#)
            .replace(r#"betas = [[["1"]]]"#, r#"betas = [[["1", "0"], ["0", "1"]]]"#);
        match parse_problem_str(&src) {
            Err(Error::Dimension { block, .. }) => assert_eq!(block, "A"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_expression_is_located() {
        let src = CAUCHY.replace(r#"f = ["0"]"#, r#"f = ["sin t"]"#);
        match parse_problem_str(&src) {
            Err(Error::Parse { block, .. }) => assert_eq!(block, "f[0]"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn boundary_data_must_not_depend_on_t() {
        let src = CAUCHY.replace(r#"betas = [[["1"]]]"#, r#"betas = [[["t"]]]"#);
        assert!(matches!(parse_problem_str(&src), Err(Error::Parse { .. })));
    }

    #[test]
    fn round_trip_preserves_family() {
        let src = format!(
            "eps0 = 0.5\n{}\ndensity = [[\"cos(2*pi*t/eps)\"]]\n\n[[boundary.jumps]]\nlocation = \"0.5 + eps\"\nmatrix = [[\"2i\"]]\n\n[limit]\ndensity = [[\"0\"]]\n",
            CAUCHY.trim_end()
        );
        let file = parse_problem_str(&src).unwrap();
        let text = file.to_toml_string().unwrap();
        let again = parse_problem_str(&text).unwrap();
        assert_eq!(file, again);
    }
}
