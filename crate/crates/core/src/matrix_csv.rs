//! Dense matrix CSV: a `rows,cols` header line followed by one comma-separated
//! line per row.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Formats a float with 17 significant digits so that parsing it back is lossless.
pub fn format_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

pub fn parse_matrix(text: &str, path: &Path) -> Result<DMatrix<f64>> {
    let err = |line: usize, reason: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (header_line, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    let dims: Vec<&str> = header.split(',').map(str::trim).collect();
    if dims.len() != 2 {
        return Err(err(header_line, format!("expected `rows,cols`, found `{header}`")));
    }
    let parse_dim = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| err(header_line, format!("invalid dimension `{s}`")))
    };
    let rows = parse_dim(dims[0])?;
    let cols = parse_dim(dims[1])?;
    let mut data = Vec::with_capacity(rows * cols);
    let mut row_count = 0;
    for (line_no, line) in lines {
        row_count += 1;
        if row_count > rows {
            return Err(err(line_no, format!("more than the declared {rows} rows")));
        }
        let before = data.len();
        for field in line.split(',') {
            let field = field.trim();
            let v = field
                .parse::<f64>()
                .map_err(|_| err(line_no, format!("row {row_count}: invalid number `{field}`")))?;
            data.push(v);
        }
        let found = data.len() - before;
        if found != cols {
            return Err(err(
                line_no,
                format!("row {row_count} has {found} entries, expected {cols}"),
            ));
        }
    }
    if row_count != rows {
        return Err(err(
            text.lines().count(),
            format!("found {row_count} rows, expected {rows}"),
        ));
    }
    Ok(DMatrix::from_row_slice(rows, cols, &data))
}

pub fn render_matrix(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{},{}", m.nrows(), m.ncols());
    for row in m.row_iter() {
        let fields: Vec<String> = row.iter().map(|&v| format_f64(v)).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Reads a dense matrix, e.g. an externally supplied surrogate forward operator.
pub fn load_linear_operator(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix(&text, path)
}

pub fn save_linear_operator(m: &DMatrix<f64>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, render_matrix(m)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use rand::Rng;

    use super::*;
    use crate::rng::seeded;

    #[test]
    fn identity_file() {
        let m = parse_matrix("2,2\n1,0\n0,1\n", Path::new("id.csv")).unwrap();
        assert_eq!(m, DMatrix::identity(2, 2));
    }

    #[test]
    fn ragged_rows_name_the_row() {
        let e = parse_matrix("2,2\n1,0\n0\n", Path::new("r.csv")).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("row 2"), "{msg}");
        assert!(msg.contains("r.csv:3"), "{msg}");
    }

    #[test]
    fn bad_header_and_counts() {
        assert!(parse_matrix("", Path::new("e")).is_err());
        assert!(parse_matrix("2\n1,2\n", Path::new("e")).is_err());
        assert!(parse_matrix("2,2\n1,2\n", Path::new("e")).is_err());
        assert!(parse_matrix("1,2\n1,2\n3,4\n", Path::new("e")).is_err());
        assert!(parse_matrix("1,2\n1,x\n", Path::new("e")).is_err());
    }

    #[test]
    fn file_round_trip() {
        let mut rng = seeded(5);
        let m = DMatrix::from_fn(10, 10, |_, _| rng.random_range(-1e3..1e3));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        save_linear_operator(&m, &path).unwrap();
        let back = load_linear_operator(&path).unwrap();
        assert!((back - &m).amax() <= 1e-12 * m.amax());
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            load_linear_operator("/nonexistent/op.csv"),
            Err(Error::Io { .. })
        ));
    }
}
