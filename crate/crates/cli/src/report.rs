//! Report serialization: versioned CSV and JSON with lossless 17-digit
//! floats. The `--no-timestamps` mode zeroes wall times and omits the
//! generation stamp so report bytes are reproducible.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use sll_core::lab::CheckRow;

pub const REPORT_SCHEMA: &str = "sll-report-v1";

#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub id: String,
    pub inputs: String,
    pub computed: f64,
    pub reference: f64,
    pub margin: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub hard: bool,
    pub wall_time: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub schema: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
    pub rows: Vec<ReportRow>,
    pub verdict: bool,
}

impl ExperimentReport {
    pub fn new(no_timestamps: bool) -> Self {
        ExperimentReport {
            schema: REPORT_SCHEMA,
            generated_at: if no_timestamps {
                None
            } else {
                Some(now_stamp())
            },
            rows: Vec::new(),
            verdict: true,
        }
    }

    pub fn push_check_rows(&mut self, inputs: &str, rows: Vec<CheckRow>, wall_time: f64) {
        let wt = if self.generated_at.is_none() { 0.0 } else { wall_time };
        for r in rows {
            if r.hard && !r.pass {
                self.verdict = false;
            }
            self.rows.push(ReportRow {
                id: r.id,
                inputs: inputs.to_string(),
                computed: r.computed,
                reference: r.reference,
                margin: r.margin,
                tolerance: r.tolerance,
                pass: r.pass,
                hard: r.hard,
                wall_time: wt,
                detail: r.detail,
            });
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{REPORT_SCHEMA}");
        let _ = writeln!(
            s,
            "id,inputs,computed,reference,margin,tolerance,pass,hard,wall_time,detail"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{}",
                csv_quote(&r.id),
                csv_quote(&r.inputs),
                fmt_f64(r.computed),
                fmt_f64(r.reference),
                fmt_f64(r.margin),
                fmt_f64(r.tolerance),
                r.pass,
                r.hard,
                fmt_f64(r.wall_time),
                csv_quote(&r.detail)
            );
        }
        let _ = writeln!(s, "verdict,{}", self.verdict);
        s
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write(&self, dir: &Path, json: bool) -> Result<std::path::PathBuf> {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("cannot create output directory {}", dir.display()))?;
        let path = dir.join(if json { "report.json" } else { "report.csv" });
        let body = if json { self.to_json()? } else { self.to_csv() };
        std::fs::write(&path, body)
            .with_context(|| format!("cannot write report {}", path.display()))?;
        Ok(path)
    }

    pub fn print_summary(&self) {
        let total = self.rows.len();
        let passed = self.rows.iter().filter(|r| r.pass).count();
        let hard_failed: Vec<&ReportRow> =
            self.rows.iter().filter(|r| r.hard && !r.pass).collect();
        println!("{passed}/{total} rows pass; verdict: {}", if self.verdict { "PASS" } else { "FAIL" });
        for r in hard_failed.iter().take(20) {
            println!(
                "  FAIL {}  computed={} reference={} margin={:.3e} tol={:.1e}",
                r.id,
                fmt_f64(r.computed),
                fmt_f64(r.reference),
                r.margin,
                r.tolerance
            );
        }
    }
}

/// 17 significant digits, '.' decimal separator: lossless f64 round trip.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:.16e}")
    }
}

fn csv_quote(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn now_stamp() -> String {
    let d = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .unwrap_or_default();
    format!("unix:{}", d.as_secs())
}

/// One eigenvalue per line.
pub fn write_spectrum(path: &Path, values: &[f64]) -> Result<()> {
    let mut s = String::new();
    for v in values {
        let _ = writeln!(s, "{}", fmt_f64(*v));
    }
    std::fs::write(path, s).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// Plot-ready two-column `t Z(t)` file.
pub fn write_zt(path: &Path, t: &[f64], z: &[f64]) -> Result<()> {
    let mut s = String::from("# t Z(t)\n");
    for (a, b) in t.iter().zip(z) {
        let _ = writeln!(s, "{} {}", fmt_f64(*a), fmt_f64(*b));
    }
    std::fs::write(path, s).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_is_lossless() {
        for v in [std::f64::consts::PI, 1.0 / 3.0, 1e-300, -2.5e17] {
            let s = fmt_f64(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(v, back, "{s}");
        }
    }

    #[test]
    fn csv_has_schema_first_row() {
        let rep = ExperimentReport::new(true);
        let csv = rep.to_csv();
        assert!(csv.starts_with(REPORT_SCHEMA));
    }
}
