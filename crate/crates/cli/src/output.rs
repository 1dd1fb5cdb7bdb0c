//! CSV and JSON emission of sweep results.
//!
//! CSV floats use Rust's shortest round-trip formatting. Complex numbers are
//! written `re:im` and lists of them are joined with `;`. Missing values are
//! empty fields.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;

use epsense_core::Complex64;

use crate::sweep::{Cell, SweepResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

fn push_complex(out: &mut String, z: Complex64) {
    let _ = write!(out, "{:?}:{:?}", z.re, z.im);
}

fn push_cell(out: &mut String, cell: &Cell) {
    match cell {
        Cell::Real(v) => {
            let _ = write!(out, "{v:?}");
        }
        Cell::Complex(z) => push_complex(out, *z),
        Cell::List(zs) => {
            for (i, z) in zs.iter().enumerate() {
                if i > 0 {
                    out.push(';');
                }
                push_complex(out, *z);
            }
        }
    }
}

pub fn to_csv(result: &SweepResult) -> String {
    let mut out = result.metadata.columns.join(",");
    out.push('\n');
    for row in &result.rows {
        let _ = write!(out, "{:?}", row.x);
        for v in &row.values {
            out.push(',');
            if let Some(cell) = v {
                push_cell(&mut out, cell);
            }
        }
        out.push(',');
        out.push_str(&row.status);
        out.push('\n');
    }
    out
}

pub fn to_json(result: &SweepResult) -> serde_json::Result<String> {
    let mut s = serde_json::to_string_pretty(result)?;
    s.push('\n');
    Ok(s)
}

pub fn from_json(text: &str) -> serde_json::Result<SweepResult> {
    serde_json::from_str(text)
}

pub fn render(result: &SweepResult, format: Format) -> String {
    match format {
        Format::Csv => to_csv(result),
        // Serializing plain data with string keys cannot fail.
        Format::Json => to_json(result).expect("sweep result serializes"),
    }
}

/// Write to `path`, or to stdout when `path` is `None`.
pub fn emit(result: &SweepResult, format: Format, path: Option<&Path>) -> io::Result<()> {
    let text = render(result, format);
    match path {
        Some(p) => std::fs::write(p, text),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())?;
            lock.flush()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::{Metadata, Row};

    fn sample() -> SweepResult {
        SweepResult {
            metadata: Metadata {
                version: "0".into(),
                sweep_var: "g".into(),
                columns: vec!["g".into(), "f_eps".into(), "s_nu".into(), "eigenvalues".into(), "status".into()],
                config: serde_json::json!({"k": null}),
                threshold: None,
                wall_time_s: 0.25,
                max_quadrature_error: 1e-12,
                max_quadrature_rel_error: 3e-10,
            },
            rows: vec![
                Row {
                    x: 0.1,
                    values: vec![
                        Some(Cell::Real(1.0 / 3.0)),
                        Some(Cell::Complex(Complex64::new(-0.5, 2e-17))),
                        Some(Cell::List(vec![Complex64::new(1.0, -1.5), Complex64::new(-1.0, -1.5)])),
                    ],
                    status: "ok".into(),
                },
                Row { x: 0.2, values: vec![None, None, None], status: "above_threshold".into() },
            ],
        }
    }

    #[test]
    fn csv_layout() {
        let csv = to_csv(&sample());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "g,f_eps,s_nu,eigenvalues,status");
        assert_eq!(lines[1], "0.1,0.3333333333333333,-0.5:2e-17,1.0:-1.5;-1.0:-1.5,ok");
        assert_eq!(lines[2], "0.2,,,,above_threshold");
        assert!(!csv.contains('\r'));
        for line in &lines {
            assert_eq!(line.split(',').count(), 5);
        }
    }

    #[test]
    fn json_round_trip() {
        let r = sample();
        assert_eq!(from_json(&to_json(&r).unwrap()).unwrap(), r);
    }
}
