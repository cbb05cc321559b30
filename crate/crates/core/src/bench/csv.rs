//! Results file: a fixed header, one line per checkpoint, then the run
//! summary as `# key=value` comment lines.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::metrics::MetricsRow;
use super::{BenchError, Summary};

pub const CSV_HEADER: &str = "trial,t,estimate,exact,relative_error,elapsed_ns";

/// Checkpoint row tagged with the trial it belongs to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialRow {
    pub trial: usize,
    pub metrics: MetricsRow,
}

pub fn write_csv<W: Write>(
    out: &mut W,
    rows: &[TrialRow],
    summary: Option<&Summary>,
) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        let m = &row.metrics;
        let exact = m.exact.map(|x| x.to_string()).unwrap_or_default();
        let err = m.relative_error.map(|x| x.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{}",
            row.trial, m.t, m.estimate, exact, err, m.elapsed_ns
        )?;
    }
    if let Some(summary) = summary {
        for (key, value) in summary.entries() {
            writeln!(out, "# {key}={value}")?;
        }
    }
    Ok(())
}

pub fn emit_csv(
    rows: &[TrialRow],
    summary: Option<&Summary>,
    path: &Path,
) -> Result<(), BenchError> {
    let io_err = |source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
    write_csv(&mut out, rows, summary).map_err(io_err)?;
    out.flush().map_err(io_err)
}

/// Rows and summary entries read back from a results file.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedCsv {
    pub rows: Vec<TrialRow>,
    pub summary: Vec<(String, String)>,
}

impl ParsedCsv {
    pub fn summary_value(&self, key: &str) -> Option<&str> {
        self.summary
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

pub fn parse_csv<R: BufRead>(input: R) -> Result<ParsedCsv, String> {
    let mut lines = input.lines().enumerate();
    match lines.next() {
        Some((_, Ok(h))) if h == CSV_HEADER => {}
        _ => return Err("missing header".into()),
    }
    let mut parsed = ParsedCsv {
        rows: Vec::new(),
        summary: Vec::new(),
    };
    for (i, line) in lines {
        let line = line.map_err(|e| e.to_string())?;
        let number = i + 1;
        if let Some(comment) = line.strip_prefix("# ") {
            let (k, v) = comment
                .split_once('=')
                .ok_or_else(|| format!("line {number}: summary line without '='"))?;
            parsed.summary.push((k.to_string(), v.to_string()));
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(format!("line {number}: expected 6 fields, got {}", f.len()));
        }
        let bad = |what: &str| format!("line {number}: bad {what}");
        let opt_u64 = |s: &str| -> Result<Option<u64>, String> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| bad("exact"))
            }
        };
        let opt_f64 = |s: &str| -> Result<Option<f64>, String> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| bad("relative_error"))
            }
        };
        parsed.rows.push(TrialRow {
            trial: f[0].parse().map_err(|_| bad("trial"))?,
            metrics: MetricsRow {
                t: f[1].parse().map_err(|_| bad("t"))?,
                estimate: f[2].parse().map_err(|_| bad("estimate"))?,
                exact: opt_u64(f[3])?,
                relative_error: opt_f64(f[4])?,
                elapsed_ns: f[5].parse().map_err(|_| bad("elapsed_ns"))?,
            },
        });
    }
    Ok(parsed)
}

pub fn read_csv(path: &Path) -> Result<ParsedCsv, BenchError> {
    let file = File::open(path).map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv(BufReader::new(file)).map_err(BenchError::Truth)
}
