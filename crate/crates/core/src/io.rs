//! Path files (CSV) and report files (JSON).
//!
//! A path file is `t,value` per row over a uniform grid starting at t = 0;
//! floats are serialized with the shortest round-trip-exact representation,
//! so write-then-read is the identity on values and double runs are
//! byte-comparable.

use crate::error::{Error, Result};
use crate::grid::{SampledPath, TimeGrid};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

// Tolerance (relative to the horizon) for declaring the t column uniform.
const GRID_RTOL: f64 = 1e-9;

pub fn write_path(path: &SampledPath, out: &mut impl Write) -> Result<()> {
    writeln!(out, "t,value")?;
    for i in 0..=path.grid().n() {
        writeln!(out, "{},{}", path.grid().node(i), path.value(i))?;
    }
    Ok(())
}

pub fn write_path_file(path: &SampledPath, file: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(file)?);
    write_path(path, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn read_path(input: &mut impl BufRead) -> Result<SampledPath> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::InputFormat("empty path file".into()))??;
    if header.trim_end() != "t,value" {
        return Err(Error::InputFormat(format!(
            "expected header 't,value', got '{header}'"
        )));
    }
    let mut ts = Vec::new();
    let mut vs = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let (t, v) = match (fields.next(), fields.next(), fields.next()) {
            (Some(t), Some(v), None) => (t, v),
            _ => {
                return Err(Error::InputFormat(format!(
                    "row {} must have exactly two comma-separated fields, got '{line}'",
                    lineno + 2
                )))
            }
        };
        let t: f64 = t
            .trim()
            .parse()
            .map_err(|_| Error::InputFormat(format!("row {}: unparsable t '{t}'", lineno + 2)))?;
        let v: f64 = v.trim().parse().map_err(|_| {
            Error::InputFormat(format!("row {}: unparsable value '{v}'", lineno + 2))
        })?;
        if !t.is_finite() || !v.is_finite() {
            return Err(Error::InputFormat(format!(
                "row {}: non-finite entry",
                lineno + 2
            )));
        }
        ts.push(t);
        vs.push(v);
    }
    if ts.len() < 2 {
        return Err(Error::InputFormat(format!(
            "path needs at least two rows, got {}",
            ts.len()
        )));
    }
    if ts[0] != 0.0 {
        return Err(Error::InputFormat(format!(
            "first row must have t = 0, got {}",
            ts[0]
        )));
    }
    let n = ts.len() - 1;
    let horizon = ts[n];
    if horizon <= 0.0 {
        return Err(Error::InputFormat(format!(
            "final time must be positive, got {horizon}"
        )));
    }
    let grid = TimeGrid::new(n, horizon).map_err(|e| Error::InputFormat(e.to_string()))?;
    let tol = GRID_RTOL * horizon;
    for i in 0..=n {
        if (ts[i] - grid.node(i)).abs() > tol {
            return Err(Error::InputFormat(format!(
                "t column is not uniformly spaced: row {} has t = {}, expected {}",
                i + 2,
                ts[i],
                grid.node(i)
            )));
        }
        if i > 0 && ts[i] <= ts[i - 1] {
            return Err(Error::InputFormat(format!(
                "t column must be strictly increasing at row {}",
                i + 2
            )));
        }
    }
    SampledPath::new(grid, vs).map_err(|e| Error::InputFormat(e.to_string()))
}

pub fn read_path_file(file: &Path) -> Result<SampledPath> {
    let mut r = BufReader::new(File::open(file)?);
    read_path(&mut r)
}

/// Envelope for every command's JSON output: the command name, a full echo
/// of its parameters (seed included), the command-specific results, any
/// warnings, and the crate version.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportFile {
    pub command: String,
    pub params: serde_json::Value,
    pub results: serde_json::Value,
    pub warnings: Vec<String>,
    pub version: String,
}

impl ReportFile {
    pub fn new(
        command: &str,
        params: serde_json::Value,
        results: serde_json::Value,
        warnings: Vec<String>,
    ) -> Self {
        Self {
            command: command.to_string(),
            params,
            results,
            warnings,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        // Field order is fixed by the struct, so double runs are
        // byte-identical.
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn write_file(&self, file: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(file)?);
        w.write_all(self.to_json().as_bytes())?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbm::{sample_fbm, RngSeed};

    fn grid(n: usize, t: f64) -> TimeGrid {
        TimeGrid::new(n, t).unwrap()
    }

    #[test]
    fn path_round_trip_is_exact() {
        let w = sample_fbm(grid(64, 1.5), 0.3, RngSeed::new(3, 1)).unwrap();
        let mut buf = Vec::new();
        write_path(&w, &mut buf).unwrap();
        let back = read_path(&mut buf.as_slice()).unwrap();
        assert_eq!(back.grid(), w.grid());
        assert_eq!(back.values(), w.values());
    }

    #[test]
    fn writer_emits_the_documented_format() {
        let p = SampledPath::from_fn(grid(4, 1.0), |t| 2.0 * t).unwrap();
        let mut buf = Vec::new();
        write_path(&p, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "t,value\n0,0\n0.25,0.5\n0.5,1\n0.75,1.5\n1,2\n");
    }

    #[test]
    fn reader_rejects_malformed_input() {
        let cases: &[&str] = &[
            "",
            "time,value\n0,0\n1,1\n",
            "t,value\n0,0\n",
            "t,value\n0.5,0\n1,1\n",
            "t,value\n0,0\n0.5,1,9\n1,2\n",
            "t,value\n0,0\n0.5,abc\n1,2\n",
            "t,value\n0,0\n0.6,1\n1,2\n",
            "t,value\n0,0\n0.5,inf\n1,2\n",
        ];
        for c in cases {
            let got = read_path(&mut c.as_bytes());
            assert!(
                matches!(got, Err(Error::InputFormat(_)) | Err(Error::Io(_))),
                "input {c:?} gave {got:?}"
            );
        }
    }

    #[test]
    fn reader_accepts_crlf_and_blank_tail() {
        let text = "t,value\r\n0,0\r\n0.5,1\r\n1,2\r\n\r\n";
        let p = read_path(&mut text.as_bytes()).unwrap();
        assert_eq!(p.values(), &[0.0, 1.0, 2.0]);
    }

    #[test]
    fn report_round_trips_through_json() {
        let r = ReportFile::new(
            "simulate",
            serde_json::json!({"hurst": 0.3, "seed": 7}),
            serde_json::json!({"paths": 2}),
            vec!["something".into()],
        );
        let back: ReportFile = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back.command, "simulate");
        assert_eq!(back.params["hurst"], 0.3);
        assert_eq!(back.warnings, vec!["something".to_string()]);
        assert_eq!(back.version, env!("CARGO_PKG_VERSION"));
    }
}
