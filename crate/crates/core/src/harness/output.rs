//! Aggregated result rows and their CSV form.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

pub const CSV_HEADER: &str =
    "scenario,d,m,N,lambda1_sq,lambda2_sq,estimator,trials,mean_nmse_linear,mean_nmse_db,stderr_db";

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub scenario: String,
    pub d: usize,
    pub m: usize,
    pub n: usize,
    pub lambda1_sq: f64,
    pub lambda2_sq: f64,
    pub estimator: String,
    /// Trials that contributed to the mean.
    pub trials: usize,
    pub mean_nmse_linear: f64,
    pub mean_nmse_db: f64,
    pub stderr_db: f64,
}

impl ResultRow {
    /// Canonical row order: scenario, d, m, λ₁², λ₂², estimator, then N.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.scenario
            .cmp(&other.scenario)
            .then(self.d.cmp(&other.d))
            .then(self.m.cmp(&other.m))
            .then(self.lambda1_sq.total_cmp(&other.lambda1_sq))
            .then(self.lambda2_sq.total_cmp(&other.lambda2_sq))
            .then(self.estimator.cmp(&other.estimator))
            .then(self.n.cmp(&other.n))
    }
}

pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Mean, its dB value and the standard error mapped to dB by the local slope
/// `10/ln10 · se/mean`.
pub fn summarize(values: &[f64]) -> (f64, f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let se = if values.len() > 1 {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    let stderr_db = if mean > 0.0 {
        10.0 / std::f64::consts::LN_10 * se / mean
    } else {
        0.0
    };
    (mean, to_db(mean), stderr_db)
}

fn float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn format_results(rows: &[ResultRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.scenario,
            r.d,
            r.m,
            r.n,
            float(r.lambda1_sq),
            float(r.lambda2_sq),
            r.estimator,
            r.trials,
            float(r.mean_nmse_linear),
            float(r.mean_nmse_db),
            float(r.stderr_db)
        );
    }
    out
}

pub fn emit_results(rows: &[ResultRow], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::InvalidScenario("no result rows to write".into()));
    }
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, format_results(rows)).map_err(|e| Error::io(path, e))
}

pub fn parse_results(text: &str, origin: &Path) -> Result<Vec<ResultRow>> {
    let err = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| err(1, e.to_string()))?;
    if header.iter().collect::<Vec<_>>().join(",") != CSV_HEADER {
        return Err(err(1, "unexpected header".into()));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| err(0, e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let int = |i: usize| -> Result<usize> {
            record[i]
                .parse()
                .map_err(|_| err(line, format!("bad integer {:?}", &record[i])))
        };
        let real = |i: usize| -> Result<f64> {
            record[i]
                .parse()
                .map_err(|_| err(line, format!("bad number {:?}", &record[i])))
        };
        rows.push(ResultRow {
            scenario: record[0].to_owned(),
            d: int(1)?,
            m: int(2)?,
            n: int(3)?,
            lambda1_sq: real(4)?,
            lambda2_sq: real(5)?,
            estimator: record[6].to_owned(),
            trials: int(7)?,
            mean_nmse_linear: real(8)?,
            mean_nmse_db: real(9)?,
            stderr_db: real(10)?,
        });
    }
    Ok(rows)
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_results(&text, path)
}
