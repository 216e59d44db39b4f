//! Regenerates the reference digit tables and the basin-boundary curve.

use std::f64::consts::FRAC_PI_2;

use benford_core::conformance::{benford_percent_hundredths_truncated, benford_vector};
use benford_core::oracle::{exact_digit_histogram, ExactSequenceKind};
use benford_core::twostep::{boundary_scan, TwoStepParams};
use serde::Serialize;

use crate::run::format_hundredths;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Figure {
    /// First-digit percentages of 2^n, Fibonacci numbers and n! at N = 10^4.
    Fig1,
    /// Fibonacci first-digit counts and Benford vectors at N = 10^2, 10^3, 10^4.
    Fig1a,
    /// Basin boundary of x_n = x_{n-1}^2 + x_{n-2}^2 on 360 rays.
    Fig2Boundary,
}

impl Figure {
    pub fn file_name(self) -> &'static str {
        match self {
            Figure::Fig1 => "fig1.csv",
            Figure::Fig1a => "fig1a.csv",
            Figure::Fig2Boundary => "fig2_boundary.csv",
        }
    }
}

/// A labelled row of nine digit entries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DigitRow {
    pub label: String,
    pub values: Vec<String>,
}

/// Percentages for 2^n, F_n and n! at `n` terms, followed by the exact
/// Benford row. The sequence rows are rounded half-up; the Benford row is
/// truncated, which is how the reference table prints it.
pub fn fig1(n: usize) -> anyhow::Result<Vec<DigitRow>> {
    let mut rows = Vec::new();
    for (label, kind) in [("2^n", ExactSequenceKind::PowerOfTwo), ("F_n", ExactSequenceKind::Fibonacci), ("n!", ExactSequenceKind::Factorial)] {
        let h = exact_digit_histogram(&kind, n)?;
        rows.push(DigitRow { label: label.into(), values: h.percent_hundredths().iter().map(|&x| format_hundredths(x)).collect() });
    }
    rows.push(DigitRow { label: "exact BL".into(), values: benford_percent_hundredths_truncated().iter().map(|&x| format_hundredths(x)).collect() });
    Ok(rows)
}

/// Fibonacci counts and the Benford vector for each `N`.
pub fn fig1a(ns: &[usize]) -> anyhow::Result<Vec<DigitRow>> {
    let mut rows = Vec::new();
    for &n in ns {
        let h = exact_digit_histogram(&ExactSequenceKind::Fibonacci, n)?;
        rows.push(DigitRow { label: format!("counts N={n}"), values: h.counts.iter().map(u64::to_string).collect() });
        rows.push(DigitRow { label: format!("benford N={n}"), values: benford_vector(n as u64).iter().map(u64::to_string).collect() });
    }
    Ok(rows)
}

/// One point of the boundary curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryPoint {
    /// Ray angle in degrees.
    pub angle: f64,
    pub r: f64,
    pub x1: f64,
    pub x2: f64,
}

/// Boundary tolerance used for the curve.
pub const BOUNDARY_TOL: f64 = 1e-10;

/// Boundary of the basin of 0 for `(1, 1, 2, 2)` on `count` rays inside the
/// positive quadrant.
pub fn fig2_boundary(count: usize) -> anyhow::Result<Vec<BoundaryPoint>> {
    let p = TwoStepParams::new(1.0, 1.0, 2.0, 2.0)?;
    Ok(boundary_scan(&p, count, BOUNDARY_TOL)?
        .into_iter()
        .map(|(theta, r)| BoundaryPoint { angle: theta / FRAC_PI_2 * 90.0, r, x1: r * theta.cos(), x2: r * theta.sin() })
        .collect())
}

pub fn rows_csv(rows: &[DigitRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["row", "d1", "d2", "d3", "d4", "d5", "d6", "d7", "d8", "d9"]).expect("in-memory csv");
    for r in rows {
        w.write_record(std::iter::once(r.label.as_str()).chain(r.values.iter().map(String::as_str))).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8")
}

pub fn boundary_csv(points: &[BoundaryPoint]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for p in points {
        w.serialize(p).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8")
}
