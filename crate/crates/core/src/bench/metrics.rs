use super::BenchError;

/// Estimator output at one checkpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRow {
    pub t: u64,
    pub estimate: f64,
    pub exact: Option<u64>,
    /// `|exact - estimate| / exact`, present only when `exact > 0`.
    pub relative_error: Option<f64>,
    /// Cumulative estimator processing time up to `t`.
    pub elapsed_ns: u64,
}

impl MetricsRow {
    pub fn new(t: u64, estimate: f64, exact: Option<u64>, elapsed_ns: u64) -> Self {
        let relative_error = exact
            .filter(|&x| x > 0)
            .map(|x| (x as f64 - estimate).abs() / x as f64);
        MetricsRow {
            t,
            estimate,
            exact,
            relative_error,
            elapsed_ns,
        }
    }
}

/// Mean relative error over the rows that have one, in percent.
pub fn mape(rows: &[MetricsRow]) -> Result<f64, BenchError> {
    let errors: Vec<f64> = rows.iter().filter_map(|r| r.relative_error).collect();
    if errors.is_empty() {
        return Err(BenchError::EmptyMetrics);
    }
    Ok(100.0 * errors.iter().sum::<f64>() / errors.len() as f64)
}

/// Residue below which a window estimate is reported as exactly zero.
pub const REPORT_ZERO_SNAP: f64 = 1e-6;

pub(crate) fn snap_for_report(x: f64) -> f64 {
    if x.abs() < REPORT_ZERO_SNAP {
        0.0
    } else {
        x
    }
}

/// `count / |E|^4`.
pub fn butterfly_density(count: u64, edges: usize) -> Option<f64> {
    (edges > 0).then(|| count as f64 / (edges as f64).powi(4))
}
