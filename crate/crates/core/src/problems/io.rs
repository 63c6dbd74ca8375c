use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::io::{load_coo_from_matrix_market_str, save_to_matrix_market_str, MatrixMarketErrorKind};
use nalgebra_sparse::CooMatrix;

use super::{Problem, QuadraticProblem};
use crate::error::{Error, Result};
use crate::geometry::QuadraticMatrix;
use crate::operators::{BoxSimplexInstance, MinimaxInstance};

pub const MANIFEST_FILE: &str = "manifest.txt";

/// Plain `key=value` lines; `#` starts a comment line.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InstanceManifest {
    entries: BTreeMap<String, String>,
    path: PathBuf,
    lines: usize,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.to_path_buf(), source }
}

fn parse_err(path: &Path, line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse { path: path.to_path_buf(), line, column, message: message.into() }
}

impl InstanceManifest {
    pub fn new(kind: &str) -> Self {
        let mut m = Self::default();
        m.set("kind", kind);
        m
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.entries
    }

    fn missing(&self, key: &str) -> Error {
        parse_err(&self.path, self.lines + 1, 1, format!("missing key `{key}`"))
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| self.missing(key))
    }

    pub fn number<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.require(key)?;
        raw.parse().map_err(|_| parse_err(&self.path, self.lines + 1, 1, format!("key `{key}` has invalid value `{raw}`")))
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut out = Self { path: path.to_path_buf(), ..Default::default() };
        for (k, line) in text.lines().enumerate() {
            out.lines = k + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let Some(eq) = line.find('=') else {
                return Err(parse_err(path, k + 1, 1, "expected `key=value`"));
            };
            let key = line[..eq].trim();
            if key.is_empty() {
                return Err(parse_err(path, k + 1, 1, "empty key"));
            }
            if out.entries.insert(key.to_string(), line[eq + 1..].trim().to_string()).is_some() {
                return Err(parse_err(path, k + 1, 1, format!("duplicate key `{key}`")));
            }
        }
        Ok(out)
    }

    pub fn render(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }
}

fn render_vector(v: &DVector<f64>) -> String {
    v.iter().map(|x| format!("{x}\n")).collect()
}

/// Whitespace-separated reals; exactly `len` of them.
pub fn parse_vector(text: &str, path: &Path, len: usize) -> Result<DVector<f64>> {
    let mut out = Vec::with_capacity(len);
    for (k, line) in text.lines().enumerate() {
        let mut col = 0;
        for tok in line.split_whitespace() {
            col = line[col..].find(tok).map(|p| p + col).unwrap_or(col);
            let v: f64 = tok.parse().map_err(|_| parse_err(path, k + 1, col + 1, format!("invalid number `{tok}`")))?;
            if out.len() == len {
                return Err(parse_err(path, k + 1, col + 1, format!("more than {len} values")));
            }
            out.push(v);
            col += tok.len();
        }
    }
    if out.len() != len {
        return Err(parse_err(path, text.lines().count() + 1, 1, format!("expected {len} values, found {}", out.len())));
    }
    Ok(DVector::from_vec(out))
}

/// Line and column of a Matrix Market failure. Parser failures carry a
/// `--> line:col` marker; count and shape failures are placed at end of file.
fn mm_position(text: &str, message: &str) -> (usize, usize) {
    if let Some(pos) = message.find("--> ") {
        let rest = &message[pos + 4..];
        let mut it = rest.split(|c: char| !c.is_ascii_digit()).filter(|s| !s.is_empty());
        if let (Some(l), Some(c)) = (it.next(), it.next()) {
            if let (Ok(l), Ok(c)) = (l.parse(), c.parse()) {
                return (l, c);
            }
        }
    }
    if let Some(pos) = message.find("but line ") {
        let rest = message[pos + 9..].trim();
        let quoted = rest.strip_suffix('.').unwrap_or(rest).trim_end_matches(" was provided").trim();
        if let Some(k) = text.lines().position(|l| l.trim() == quoted) {
            return (k + 1, 1);
        }
    }
    (text.lines().count() + 1, 1)
}

pub fn parse_matrix_market(text: &str, path: &Path) -> Result<CooMatrix<f64>> {
    load_coo_from_matrix_market_str::<f64>(text).map_err(|e| {
        let (line, column) = mm_position(text, e.message());
        let kind = match e.kind() {
            MatrixMarketErrorKind::EntryMismatch => "entry count mismatch",
            MatrixMarketErrorKind::InvalidHeader => "invalid header",
            _ => "malformed matrix",
        };
        parse_err(path, line, column, format!("{kind}: {}", e.message().trim()))
    })
}

fn dense_to_coo(m: &DMatrix<f64>) -> CooMatrix<f64> {
    let mut coo = CooMatrix::new(m.nrows(), m.ncols());
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if m[(i, j)] != 0.0 {
                coo.push(i, j, m[(i, j)]);
            }
        }
    }
    coo
}

fn write(path: PathBuf, text: String) -> Result<()> {
    fs::write(&path, text).map_err(io_err(&path))
}

/// Writes the problem into `dir` and returns the manifest path.
/// `params` (seed, generator settings) are recorded in the manifest.
pub fn save_instance(problem: &Problem, dir: &Path, params: &BTreeMap<String, String>) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut man = InstanceManifest::new(problem.kind());
    for (k, v) in params {
        man.set(k, v);
    }
    match problem {
        Problem::Quadratic(q) => {
            let diag = matches!(q.matrix(), QuadraticMatrix::Diagonal(_));
            man.set("d", q.dim());
            man.set("diag", diag);
            man.set("mu", q.profile().mu);
            man.set("L", q.profile().l);
            man.set("matrix", "matrix.mtx");
            man.set("b", "b.txt");
            write(dir.join("matrix.mtx"), save_to_matrix_market_str(&dense_to_coo(&q.matrix().to_dense())))?;
            write(dir.join("b.txt"), render_vector(q.linear()))?;
        }
        Problem::BoxSimplex(inst) => {
            man.set("m", inst.m());
            man.set("n", inst.n());
            man.set("matrix", "matrix.mtx");
            man.set("b", "b.txt");
            man.set("c", "c.txt");
            write(dir.join("matrix.mtx"), save_to_matrix_market_str(inst.csr()))?;
            write(dir.join("b.txt"), render_vector(inst.b()))?;
            write(dir.join("c.txt"), render_vector(inst.c()))?;
        }
        Problem::Minimax(mm) => {
            man.set("n", mm.q.len());
            man.set("m", mm.r.len());
            man.set("mu_x", mm.mu_x);
            man.set("mu_y", mm.mu_y);
            man.set("matrix", "matrix.mtx");
            man.set("q", "q.txt");
            man.set("r", "r.txt");
            write(dir.join("matrix.mtx"), save_to_matrix_market_str(&dense_to_coo(&mm.c)))?;
            write(dir.join("q.txt"), render_vector(&mm.q))?;
            write(dir.join("r.txt"), render_vector(&mm.r))?;
        }
    }
    let path = dir.join(MANIFEST_FILE);
    write(path.clone(), man.render())?;
    Ok(path)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(io_err(path))
}

/// Loads a problem from a manifest path, or from a directory containing one.
/// Nothing is returned unless every referenced file parses.
pub fn load_instance(path: &Path) -> Result<(Problem, InstanceManifest)> {
    let manifest_path = if path.is_dir() { path.join(MANIFEST_FILE) } else { path.to_path_buf() };
    let base = manifest_path.parent().map(Path::to_path_buf).unwrap_or_default();
    let man = InstanceManifest::parse(&read(&manifest_path)?, &manifest_path)?;
    let file = |key: &str| -> Result<(PathBuf, String)> {
        let p = base.join(man.require(key)?);
        let text = read(&p)?;
        Ok((p, text))
    };
    let matrix = |rows: usize, cols: usize| -> Result<CooMatrix<f64>> {
        let (p, text) = file("matrix")?;
        let coo = parse_matrix_market(&text, &p)?;
        if coo.nrows() != rows || coo.ncols() != cols {
            return Err(parse_err(&p, 1, 1, format!("matrix is {}x{}, manifest says {rows}x{cols}", coo.nrows(), coo.ncols())));
        }
        Ok(coo)
    };
    let vector = |key: &str, len: usize| -> Result<DVector<f64>> {
        let (p, text) = file(key)?;
        parse_vector(&text, &p, len)
    };
    let problem = match man.require("kind")? {
        "quadratic" => {
            let d: usize = man.number("d")?;
            let diag: bool = man.number("diag")?;
            let dense = DMatrix::from(&matrix(d, d)?);
            let m = if diag { QuadraticMatrix::Diagonal(dense.diagonal()) } else { QuadraticMatrix::Dense(dense) };
            let b = vector("b", d)?;
            Problem::Quadratic(QuadraticProblem::with_profile(m, b, man.number("mu")?, man.number("L")?)?)
        }
        "box-simplex" => {
            let (m, n): (usize, usize) = (man.number("m")?, man.number("n")?);
            let a = matrix(m, n)?;
            Problem::BoxSimplex(BoxSimplexInstance::new(a, vector("b", m)?, vector("c", n)?)?)
        }
        "minimax" => {
            let (n, m): (usize, usize) = (man.number("n")?, man.number("m")?);
            let c = DMatrix::from(&matrix(n, m)?);
            Problem::Minimax(MinimaxInstance::new(man.number("mu_x")?, man.number("mu_y")?, c, vector("q", n)?, vector("r", m)?)?)
        }
        other => return Err(parse_err(&manifest_path, 1, 1, format!("unknown instance kind `{other}`"))),
    };
    Ok((problem, man))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_errors_point_at_line() {
        let err = InstanceManifest::parse("kind=quadratic\n\nno equals here\n", Path::new("m.txt")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, column: 1, .. }));
    }

    #[test]
    fn vector_errors_point_at_token() {
        let err = parse_vector("1.5\n2 x\n", Path::new("v.txt"), 3).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, column: 3, .. }), "{err}");
        let err = parse_vector("1\n2\n", Path::new("v.txt"), 3).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
    }

    #[test]
    fn matrix_market_positions() {
        let head = "%%MatrixMarket matrix coordinate real general\n3 3 2\n1 1 1.0\n";
        let bad = format!("{head}2 x 3\n");
        assert!(matches!(parse_matrix_market(&bad, Path::new("a")), Err(Error::Parse { line: 4, column: 3, .. })));
        let short = format!("{head}2 2\n");
        assert!(matches!(parse_matrix_market(&short, Path::new("a")), Err(Error::Parse { line: 4, column: 1, .. })));
        assert!(matches!(parse_matrix_market(head, Path::new("a")), Err(Error::Parse { line: 4, .. })));
    }

    #[test]
    fn shortest_decimal_round_trip() {
        let v = DVector::from_vec(vec![0.1, 1.0 / 3.0, -2.5e-300, 12345.678]);
        assert_eq!(parse_vector(&render_vector(&v), Path::new("v"), 4).unwrap(), v);
    }
}
