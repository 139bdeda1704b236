//! Deterministic CSV and JSON emission.

use crate::error::CliError;
use serde::Serialize;
use std::path::{Path, PathBuf};

/// 17 significant digits in scientific notation.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub enum Cell {
    Int(i64),
    Float(f64),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(v) => fmt_f64(*v),
            Cell::Empty => String::new(),
        }
    }
}

/// Existing output directory; it is never created.
pub fn out_dir(dir: Option<&Path>) -> Result<PathBuf, CliError> {
    let d = dir.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
    if !d.is_dir() {
        return Err(CliError::Io(format!("output directory {} does not exist", d.display())));
    }
    Ok(d)
}

pub fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = Vec<Cell>>,
{
    let io = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path).map_err(io)?;
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row.iter().map(Cell::render)).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Pretty JSON with keys sorted.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let v = serde_json::to_value(value).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut text = serde_json::to_string_pretty(&v).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format() {
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_f64(-0.1), "-1.0000000000000001e-1");
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
    }

    #[test]
    fn json_keys_sorted() {
        #[derive(Serialize)]
        struct S {
            zeta: u8,
            alpha: u8,
        }
        let d = tempfile::tempdir().unwrap();
        let p = d.path().join("s.json");
        write_json(&p, &S { zeta: 1, alpha: 2 }).unwrap();
        let t = std::fs::read_to_string(&p).unwrap();
        assert!(t.find("alpha").unwrap() < t.find("zeta").unwrap());
    }
}
