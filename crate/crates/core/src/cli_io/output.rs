use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::diagnostics::DiagnosticsReport;
use crate::error::{Error, Result};
use crate::matrix_csv::format_f64;
use crate::sampler::ChainRecord;

pub const REPORT_HEADER: &str = "metric,value";

/// Chain rows as read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainTable {
    pub dim: usize,
    pub iterations: Vec<usize>,
    pub stage1: Vec<bool>,
    pub stage2: Vec<bool>,
    pub n_hf_cumulative: Vec<u64>,
    /// Row-major, one row per retained iteration.
    pub samples: Vec<f64>,
}

impl ChainTable {
    pub fn sample(&self, row: usize) -> &[f64] {
        &self.samples[row * self.dim..(row + 1) * self.dim]
    }
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

pub fn render_chain<W: Write>(chain: &ChainRecord, thin: usize, out: &mut W) -> std::io::Result<()> {
    write!(out, "iter,stage1,stage2,n_hf_cum")?;
    for d in 0..chain.dim() {
        write!(out, ",x_{d}")?;
    }
    writeln!(out)?;
    for i in (0..=chain.n_iterations()).step_by(thin) {
        // iteration 0 is the starting state and has no accept flags
        let (s1, s2, n_hf) = if i == 0 {
            (false, false, 1)
        } else {
            (chain.stage1_accepted()[i - 1], chain.stage2_accepted()[i - 1], chain.n_hf_cumulative()[i - 1])
        };
        write!(out, "{i},{},{},{n_hf}", u8::from(s1), u8::from(s2))?;
        for v in chain.sample(i) {
            write!(out, ",{}", format_f64(*v))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Writes every `thin`-th iteration (starting at 0) of `chain` as CSV.
pub fn write_chain(chain: &ChainRecord, path: &Path, thin: usize) -> Result<()> {
    if thin == 0 {
        return Err(Error::config("thin", "must be at least 1"));
    }
    let mut out = create(path)?;
    render_chain(chain, thin, &mut out)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn parse_chain(text: &str, path: &Path) -> Result<ChainTable> {
    let err = |line: usize, reason: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    let columns: Vec<&str> = header.split(',').collect();
    if columns.len() < 5 || columns[..4] != ["iter", "stage1", "stage2", "n_hf_cum"] {
        return Err(err(1, "expected header iter,stage1,stage2,n_hf_cum,x_0,...".into()));
    }
    let dim = columns.len() - 4;
    let mut table = ChainTable {
        dim,
        iterations: Vec::new(),
        stage1: Vec::new(),
        stage2: Vec::new(),
        n_hf_cumulative: Vec::new(),
        samples: Vec::new(),
    };
    for (n, line) in lines.enumerate() {
        let line_no = n + 2;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != dim + 4 {
            return Err(err(line_no, format!("expected {} fields, found {}", dim + 4, fields.len())));
        }
        let bad = |what: &str, v: &str| err(line_no, format!("bad {what} `{v}`"));
        table.iterations.push(fields[0].parse().map_err(|_| bad("iter", fields[0]))?);
        table.stage1.push(fields[1] == "1");
        table.stage2.push(fields[2] == "1");
        table.n_hf_cumulative.push(fields[3].parse().map_err(|_| bad("n_hf_cum", fields[3]))?);
        for f in &fields[4..] {
            table.samples.push(f.parse().map_err(|_| bad("value", f))?);
        }
    }
    Ok(table)
}

pub fn read_chain(path: &Path) -> Result<ChainTable> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_chain(&text, path)
}

/// Exact integers print without an exponent, everything else at 17 significant digits.
fn format_metric(v: f64) -> String {
    if v.is_finite() && v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format_f64(v)
    }
}

pub fn render_report<W: Write>(report: &DiagnosticsReport, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "{REPORT_HEADER}")?;
    for (name, value) in report.rows() {
        writeln!(out, "{name},{}", format_metric(value))?;
    }
    Ok(())
}

pub fn write_report(report: &DiagnosticsReport, path: &Path) -> Result<()> {
    let mut out = create(path)?;
    render_report(report, &mut out)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

/// Writes through `render` into a freshly created file.
pub fn write_with(path: &Path, render: impl FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>) -> Result<()> {
    let mut out = create(path)?;
    render(&mut out).and_then(|_| out.flush()).map_err(|e| Error::io(path, e))
}
