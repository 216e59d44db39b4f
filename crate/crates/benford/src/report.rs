//! Report and orbit files.

use std::io::Write;
use std::path::Path;

use anyhow::Context;
use benford_core::SignedLogValue;
use serde::Serialize;

use crate::run::RunReport;

/// Report serialization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

/// Pretty JSON, newline terminated.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// The report as `key,value` rows.
pub fn report_csv(r: &RunReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut row = |k: &str, v: String| w.write_record([k, v.as_str()]).expect("in-memory csv");
    row("key", "value".into());
    row("system", r.system.into());
    row("n", r.n.to_string());
    row("seed", r.seed.to_string());
    if let Some(p) = &r.digit_percent {
        for (d, v) in p.iter().enumerate() {
            row(&format!("percent_d{}", d + 1), v.clone());
        }
    }
    if let Some(c) = &r.conformance {
        row("ks", c.ks.to_string());
        for (h, m) in &c.weyl {
            row(&format!("weyl_h{h}"), m.to_string());
        }
        row("chi2", c.chi2.to_string());
        row("verdict", format!("{:?}", c.verdict));
    }
    if let Some(o) = &r.occupation {
        for (t, f) in o.levels.iter().zip(&o.fractions) {
            row(&format!("occupation_t{t}"), f.to_string());
        }
        row("max_deviation", o.max_deviation.to_string());
    }
    for note in &r.notes {
        row("note", note.clone());
    }
    row("passed", r.passed.to_string());
    drop(row);
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8")
}

pub fn render(r: &RunReport, format: Format) -> String {
    match format {
        Format::Json => to_json(r),
        Format::Csv => report_csv(r),
    }
}

/// Writes the orbit as CSV with columns `n, sign, log_mag, first_digit`,
/// `n` counting from 1. Zeros have sign 0 and an empty `log_mag`.
pub fn write_orbit_csv<W: Write>(out: W, seq: &[SignedLogValue]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "sign", "log_mag", "first_digit"])?;
    for (i, v) in seq.iter().enumerate() {
        let log_mag = if v.is_zero() { String::new() } else { v.log_mag().to_string() };
        w.write_record([(i + 1).to_string(), v.sign().to_string(), log_mag, v.first_digit().to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_file(path: &Path, contents: &[u8]) -> anyhow::Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orbit_csv_columns() {
        let seq = [SignedLogValue::from_f64(-250.0).unwrap(), SignedLogValue::ZERO, SignedLogValue::from_f64(0.01).unwrap()];
        let mut buf = Vec::new();
        write_orbit_csv(&mut buf, &seq).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "n,sign,log_mag,first_digit");
        assert!(lines[1].starts_with("1,-1,2.39794"));
        assert!(lines[1].ends_with(",2"));
        assert_eq!(lines[2], "2,0,,0");
        assert_eq!(lines[3], "3,1,-2,1");
    }
}
