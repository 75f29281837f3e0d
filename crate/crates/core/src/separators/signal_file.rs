//! Plain-text multichannel signal files.
//!
//! ```text
//! # rate=500
//! lead1,lead2,lead3
//! 0.125,-0.5,0.25
//! ...
//! ```
//!
//! One column per channel; values are real.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::matcore::{CMatrix, C64};
use crate::model::SignalBatch;

#[derive(Clone, Debug, PartialEq)]
pub struct SignalFile {
    pub rate_hz: f64,
    pub names: Vec<String>,
    /// `channels×N`, real-valued.
    pub data: SignalBatch,
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

pub fn read_signal_csv(path: &Path) -> Result<SignalFile> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut first = String::new();
    reader
        .read_line(&mut first)
        .map_err(|e| Error::io(path, e))?;
    let rate_hz = first
        .trim()
        .strip_prefix('#')
        .and_then(|rest| rest.trim().strip_prefix("rate="))
        .and_then(|v| v.trim().parse::<f64>().ok())
        .filter(|r| *r > 0.0)
        .ok_or_else(|| parse_err(path, 1, "expected a `# rate=<Hz>` line"))?;
    let mut body = String::new();
    reader
        .read_to_string(&mut body)
        .map_err(|e| Error::io(path, e))?;

    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());
    let names: Vec<String> = csv
        .headers()
        .map_err(|e| parse_err(path, 2, e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    if names.is_empty() || names.iter().any(String::is_empty) {
        return Err(parse_err(path, 2, "missing channel names"));
    }
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    for record in csv.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize + 1);
            parse_err(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize + 1);
        for (col, field) in columns.iter_mut().zip(record.iter()) {
            let v: f64 = field
                .parse()
                .map_err(|_| parse_err(path, line, format!("not a number: {field:?}")))?;
            if !v.is_finite() {
                return Err(parse_err(path, line, "non-finite sample"));
            }
            col.push(v);
        }
    }
    let n = columns[0].len();
    if n == 0 {
        return Err(parse_err(path, 3, "no samples"));
    }
    let data = CMatrix::from_fn(names.len(), n, |i, k| C64::new(columns[i][k], 0.0));
    Ok(SignalFile {
        rate_hz,
        names,
        data: SignalBatch::new(data)?,
    })
}

/// Writes the real parts of `data`, shortest round-trip formatting.
pub fn write_signal_csv(path: &Path, signal: &SignalFile) -> Result<()> {
    let data = signal.data.data();
    if signal.names.len() != data.rows() {
        return Err(Error::dims("one channel name per row is required"));
    }
    let mut out = Vec::new();
    writeln!(out, "# rate={}", signal.rate_hz).expect("write to memory");
    {
        let mut csv = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(&mut out);
        csv.write_record(&signal.names)
            .map_err(|e| Error::io(path, e.into()))?;
        for k in 0..data.cols() {
            csv.write_record((0..data.rows()).map(|i| data[(i, k)].re.to_string()))
                .map_err(|e| Error::io(path, e.into()))?;
        }
        csv.flush().map_err(|e| Error::io(path, e))?;
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
