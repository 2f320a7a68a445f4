//! Text formats: matrix files and trace tables.
//!
//! A matrix file holds one or more blocks. Each block is a header line
//!
//! ```text
//! duforge-matrix v1 d=2 rows=4 cols=4 kind=cue
//! ```
//!
//! followed by `rows` lines of `cols` whitespace-separated `re im` pairs,
//! printed with 17 significant digits so doubles round-trip exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::cartan::CartanCoords;
use crate::error::{Error, Result};
use crate::maps::IterationTrace;
use crate::tensor::{BipartiteUnitary, CMatrix, C64};

pub const MATRIX_MAGIC: &str = "duforge-matrix";
pub const MATRIX_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixFile {
    pub version: u32,
    pub d: usize,
    /// Free-form provenance tag without whitespace, e.g. `cue` or `gate:swap`.
    pub kind: String,
    pub matrix: CMatrix,
}

impl MatrixFile {
    pub fn new(d: usize, kind: &str, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != d * d || matrix.ncols() != d * d {
            return Err(Error::Dimension(format!(
                "a d = {d} operator is {0}x{0}, got {1}x{2}",
                d * d,
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if kind.is_empty() || kind.chars().any(char::is_whitespace) {
            return Err(Error::Parameter(format!("kind tag `{kind}` must be one nonempty word")));
        }
        Ok(Self {
            version: MATRIX_VERSION,
            d,
            kind: kind.to_string(),
            matrix,
        })
    }

    pub fn from_unitary(u: &BipartiteUnitary, kind: &str) -> Result<Self> {
        Self::new(u.d(), kind, u.matrix().clone())
    }

    pub fn to_unitary(&self) -> Result<BipartiteUnitary> {
        BipartiteUnitary::new(self.matrix.clone())
    }

    pub fn write_to(&self, out: &mut String) {
        let (rows, cols) = self.matrix.shape();
        let _ = writeln!(
            out,
            "{MATRIX_MAGIC} v{} d={} rows={rows} cols={cols} kind={}",
            self.version, self.d, self.kind
        );
        for i in 0..rows {
            let row: Vec<String> = (0..cols)
                .map(|j| {
                    let z = self.matrix[(i, j)];
                    format!("{:.16e} {:.16e}", z.re, z.im)
                })
                .collect();
            out.push_str(&row.join("  "));
            out.push('\n');
        }
    }
}

fn header_field<'a>(fields: &[&'a str], key: &str) -> Result<&'a str> {
    fields
        .iter()
        .find_map(|f| f.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .ok_or_else(|| Error::Parse(format!("matrix header lacks `{key}=`")))
}

fn parse_usize(s: &str, what: &str) -> Result<usize> {
    s.parse().map_err(|_| Error::Parse(format!("bad {what} `{s}`")))
}

/// Parses every block in `text`.
pub fn parse_matrices(text: &str) -> Result<Vec<MatrixFile>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let mut out = Vec::new();
    while let Some((lineno, header)) = lines.next() {
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.first() != Some(&MATRIX_MAGIC) {
            return Err(Error::Parse(format!("line {}: expected a `{MATRIX_MAGIC}` header", lineno + 1)));
        }
        let version = fields
            .get(1)
            .and_then(|v| v.strip_prefix('v'))
            .and_then(|v| v.parse::<u32>().ok())
            .ok_or_else(|| Error::Parse(format!("line {}: missing format version", lineno + 1)))?;
        if version != MATRIX_VERSION {
            return Err(Error::Parse(format!("unsupported matrix format version {version}")));
        }
        let d = parse_usize(header_field(&fields, "d")?, "d")?;
        let rows = parse_usize(header_field(&fields, "rows")?, "rows")?;
        let cols = parse_usize(header_field(&fields, "cols")?, "cols")?;
        let kind = header_field(&fields, "kind")?.to_string();

        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let (ln, line) = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("matrix ends after {r} of {rows} rows")))?;
            let nums: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| Error::Parse(format!("line {}: bad number `{t}`", ln + 1))))
                .collect::<Result<_>>()?;
            if nums.len() != 2 * cols {
                return Err(Error::Parse(format!(
                    "line {}: expected {} numbers, found {}",
                    ln + 1,
                    2 * cols,
                    nums.len()
                )));
            }
            entries.extend(nums.chunks(2).map(|p| C64::new(p[0], p[1])));
        }
        let matrix = CMatrix::from_row_slice(rows, cols, &entries);
        let mut file = MatrixFile::new(d, &kind, matrix)?;
        file.version = version;
        out.push(file);
    }
    if out.is_empty() {
        return Err(Error::Parse("no matrix found".into()));
    }
    Ok(out)
}

pub fn format_matrices(files: &[MatrixFile]) -> String {
    let mut out = String::new();
    for f in files {
        f.write_to(&mut out);
    }
    out
}

pub fn write_matrices(path: &Path, files: &[MatrixFile]) -> Result<()> {
    fs::write(path, format_matrices(files))?;
    Ok(())
}

pub fn read_matrices(path: &Path) -> Result<Vec<MatrixFile>> {
    parse_matrices(&fs::read_to_string(path)?)
}

/// Reads a file expected to contain exactly one matrix.
pub fn read_unitary(path: &Path) -> Result<BipartiteUnitary> {
    let mut files = read_matrices(path)?;
    if files.len() != 1 {
        return Err(Error::Parse(format!("expected one matrix, found {}", files.len())));
    }
    files.remove(0).to_unitary()
}

/// Columns `n,E_U,E_US,ep,trace_norm,D_n,class`.
pub fn trace_csv(trace: &IterationTrace) -> String {
    let mut out = String::from("n,E_U,E_US,ep,trace_norm,D_n,class\n");
    for s in &trace.steps {
        let _ = writeln!(out, "{},{},{},{},{},{},{}", s.n, s.e_u, s.e_us, s.ep, s.trace_norm, s.d_n, s.class);
    }
    out
}

pub fn trace_json(trace: &IterationTrace) -> Result<String> {
    Ok(serde_json::to_string_pretty(trace)?)
}

/// Columns `n,c1,c2,c3`.
pub fn chamber_csv(points: &[CartanCoords]) -> String {
    let mut out = String::from("n,c1,c2,c3\n");
    for (n, c) in points.iter().enumerate() {
        let _ = writeln!(out, "{n},{},{},{}", c.c1, c.c2, c.c3);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{iterate, IterateOptions, MapKind};
    use crate::sampling::{cue_sample, RngSeed};
    use crate::tensor::swap_gate;

    #[test]
    fn round_trip_is_exact() {
        let u = BipartiteUnitary::new(cue_sample(9, RngSeed::new(3, 1))).unwrap();
        let f = MatrixFile::from_unitary(&u, "cue").unwrap();
        let text = format_matrices(&[f.clone(), f.clone()]);
        let back = parse_matrices(&text).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0], f);
        assert_eq!(back[1].matrix, *u.matrix());
    }

    #[test]
    fn one_row_per_line() {
        let f = MatrixFile::from_unitary(&swap_gate(2).unwrap(), "gate:swap").unwrap();
        let text = format_matrices(&[f]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], "duforge-matrix v1 d=2 rows=4 cols=4 kind=gate:swap");
        assert_eq!(lines[1].split_whitespace().count(), 8);
    }

    #[test]
    fn malformed_inputs() {
        assert!(parse_matrices("").is_err());
        assert!(parse_matrices("hello").is_err());
        assert!(parse_matrices("duforge-matrix v2 d=2 rows=4 cols=4 kind=x").is_err());
        assert!(parse_matrices("duforge-matrix v1 d=2 rows=4 cols=4 kind=x\n1 0 0 0").is_err());
        assert!(parse_matrices("duforge-matrix v1 d=2 rows=1 cols=1 kind=x\n1 0").is_err());
        assert!(MatrixFile::new(2, "two words", CMatrix::identity(4, 4)).is_err());
    }

    #[test]
    fn trace_table_columns() {
        let u = swap_gate(2).unwrap();
        let tr = iterate(&u, MapKind::Realign, &IterateOptions::new(3, 1e-12).run_full(true)).unwrap();
        let csv = trace_csv(&tr);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("n,E_U,E_US,ep,trace_norm,D_n,class"));
        assert_eq!(lines.count(), 4);
    }
}
