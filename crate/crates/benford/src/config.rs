//! Experiment configuration files.
//!
//! A config is JSON. Writing a parsed config back out with [`ExperimentConfig::to_json`]
//! reproduces the canonical text byte for byte: fields are emitted in
//! declaration order and floats in shortest round-trip form.

use std::path::Path;

use anyhow::{bail, Context};
use benford_core::matrixdyn::{Matrix, RecursionSpec, MAX_DIM};
use benford_core::oracle::ExactSequenceKind;
use benford_core::orbits::{FlowSpec, MapSpec, NewtonTarget};
use benford_core::stochasticdyn::DistSpec;
use benford_core::twostep::TwoStepParams;
use benford_core::{Error, Thresholds};
use serde::{Deserialize, Serialize};

/// Which Newton sequence to test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NewtonSeries {
    Diffs,
    Errors,
}

/// Which Markov sequence to test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarkovSeries {
    Diff,
    Gap,
}

/// The system whose orbit is generated.
///
/// Matrix entries `(row, col)` are 1-based. For `flow` the length `n` is
/// unused; for `gbm` the horizon is `n * dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum System {
    Exact { sequence: ExactSequenceKind },
    Map { map: MapSpec, x0: f64 },
    Newton { target: NewtonTarget, x0: f64, series: NewtonSeries },
    Flow { flow: FlowSpec },
    MatrixPower {
        matrix: Vec<Vec<f64>>,
        row: usize,
        col: usize,
        #[serde(default)]
        exact: bool,
    },
    LinearRecursion { recursion: RecursionSpec },
    /// A random stochastic matrix of size `dim` is drawn from the seed
    /// when `matrix` is null.
    Markov { matrix: Option<Vec<Vec<f64>>>, dim: usize, row: usize, col: usize, series: MarkovSeries },
    RvPower { dist: DistSpec },
    IidProduct { dist: DistSpec },
    Gbm { mu: f64, sigma: f64, x0: f64, dt: f64 },
    TwoStep {
        a1: f64,
        a2: f64,
        b1: f64,
        b2: f64,
        #[serde(default)]
        extended: bool,
        x1: f64,
        x2: f64,
    },
}

impl System {
    pub fn kind(&self) -> &'static str {
        match self {
            System::Exact { .. } => "exact",
            System::Map { .. } => "map",
            System::Newton { .. } => "newton",
            System::Flow { .. } => "flow",
            System::MatrixPower { .. } => "matrix_power",
            System::LinearRecursion { .. } => "linear_recursion",
            System::Markov { .. } => "markov",
            System::RvPower { .. } => "rv_power",
            System::IidProduct { .. } => "iid_product",
            System::Gbm { .. } => "gbm",
            System::TwoStep { .. } => "two_step",
        }
    }
}

/// Output file names, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    /// Report file; the extension follows `--format` when omitted.
    pub report: Option<String>,
    /// Orbit dump; `null` skips it.
    pub orbit_csv: Option<String>,
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs { report: None, orbit_csv: Some("orbit.csv".into()) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: System,
    /// Sequence length.
    pub n: usize,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub outputs: Outputs,
}

/// Upper bound on `n`, to keep accidental configs from exhausting memory.
pub const MAX_N: usize = 100_000_000;

impl ExperimentConfig {
    pub fn new(system: System, n: usize) -> Self {
        ExperimentConfig { system, n, thresholds: Thresholds::default(), seed: 0, outputs: Outputs::default() }
    }

    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).context("parsing config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("in {}", path.display()))
    }

    /// Canonical pretty-printed JSON, newline terminated.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    /// Checks every field and names the offending one by its path.
    pub fn validate(&self) -> anyhow::Result<()> {
        if self.n == 0 || self.n > MAX_N {
            bail!("n: must be in 1..={MAX_N}");
        }
        let t = &self.thresholds;
        if !(t.ks > 0.0 && t.weyl > 0.0 && t.harmonics >= 1 && t.reference_n >= 1) {
            bail!("thresholds: ks, weyl, harmonics and reference_n must be positive");
        }
        self.validate_system().map_err(|e| match e {
            Error::InvalidParameter { name, reason } => anyhow::anyhow!("system.{name}: {reason}"),
            other => anyhow::anyhow!("system: {other}"),
        })
    }

    fn validate_system(&self) -> benford_core::Result<()> {
        let param = |name: &'static str, reason: &str| Error::InvalidParameter { name, reason: reason.into() };
        match &self.system {
            System::Exact { .. } => Ok(()),
            System::Map { map, x0 } => {
                map.validate()?;
                if x0.is_finite() {
                    Ok(())
                } else {
                    Err(param("x0", "must be finite"))
                }
            }
            System::Newton { x0, .. } => {
                if x0.is_finite() {
                    Ok(())
                } else {
                    Err(param("x0", "must be finite"))
                }
            }
            System::Flow { flow } => {
                if flow.t_end > 0.0 && flow.t_end.is_finite() && flow.x0.is_finite() {
                    Ok(())
                } else {
                    Err(param("flow", "need finite x0 and positive finite t_end"))
                }
            }
            System::MatrixPower { matrix, row, col, .. } => check_entry(&Matrix::from_rows(matrix)?, *row, *col),
            System::LinearRecursion { recursion } => recursion.validate(),
            System::Markov { matrix, dim, row, col, .. } => match matrix {
                Some(m) => check_entry(&Matrix::from_rows(m)?, *row, *col),
                None if (2..=MAX_DIM).contains(dim) => {
                    if (1..=*dim).contains(row) && (1..=*dim).contains(col) {
                        Ok(())
                    } else {
                        Err(param("row", "entry outside the matrix"))
                    }
                }
                None => Err(param("dim", "must be in 2..=16")),
            },
            System::RvPower { dist } | System::IidProduct { dist } => dist.validate(),
            System::Gbm { mu, sigma, x0, dt } => {
                let spec = benford_core::stochasticdyn::GbmSpec { mu: *mu, sigma: *sigma, x0: *x0, t_end: self.n as f64 * dt, dt: *dt };
                spec.validate()
            }
            System::TwoStep { a1, a2, b1, b2, extended, x1, x2 } => {
                two_step_params(*a1, *a2, *b1, *b2, *extended)?;
                if *x1 > 0.0 && *x2 > 0.0 && x1.is_finite() && x2.is_finite() {
                    Ok(())
                } else {
                    Err(param("x1", "seeds must be positive"))
                }
            }
        }
    }
}

pub(crate) fn two_step_params(a1: f64, a2: f64, b1: f64, b2: f64, extended: bool) -> benford_core::Result<TwoStepParams> {
    if extended {
        TwoStepParams::extended(a1, a2, b1, b2)
    } else {
        TwoStepParams::new(a1, a2, b1, b2)
    }
}

fn check_entry(m: &Matrix, row: usize, col: usize) -> benford_core::Result<()> {
    if (1..=m.dim()).contains(&row) && (1..=m.dim()).contains(&col) {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name: "row", reason: format!("entry ({row}, {col}) outside a {0}x{0} matrix", m.dim()) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use benford_core::orbits::{FlowField, GTag, IndexRule, StepPolicy};

    fn all_systems() -> Vec<System> {
        vec![
            System::Exact { sequence: ExactSequenceKind::Factorial },
            System::Exact { sequence: ExactSequenceKind::LinearRecursion { coeffs: vec![1, 1], seeds: vec![1, 3] } },
            System::Map { map: MapSpec::ContractionFixedPoint { a: 0.1 }, x0: 0.05 },
            System::Map { map: MapSpec::NonAutonomousPower { a: IndexRule::PowerOfTwo, b: IndexRule::Constant(2.0) }, x0: 3.3 },
            System::Map { map: MapSpec::PowerPlus { a: 1.0, b: 2.0, g: GTag::One }, x0: 0.1 + 0.2 },
            System::Newton { target: NewtonTarget::ExpMinus2Cubed, x0: 1.0, series: NewtonSeries::Errors },
            System::Flow { flow: FlowSpec { field: FlowField::SqrtQuad, x0: 0.0, t_end: 300.0, step: StepPolicy::Fixed(20_000) } },
            System::MatrixPower { matrix: vec![vec![1.0, 1.0], vec![1.0, 0.0]], row: 1, col: 2, exact: false },
            System::LinearRecursion { recursion: RecursionSpec { coeffs: vec![1.0, 1.0], seeds: vec![1.0, 1.0] } },
            System::Markov { matrix: None, dim: 3, row: 1, col: 3, series: MarkovSeries::Gap },
            System::RvPower { dist: DistSpec::Normal { mean: -1.5, sd: 1e-7 } },
            System::IidProduct { dist: DistSpec::Cantor10 },
            System::Gbm { mu: 0.0, sigma: 1.0, x0: 1.0, dt: 0.01 },
            System::TwoStep { a1: 1.0, a2: 0.25, b1: 2.0, b2: 0.5, extended: true, x1: 0.3, x2: 0.4 },
        ]
    }

    #[test]
    fn json_round_trip_is_byte_identical() {
        for (i, sys) in all_systems().into_iter().enumerate() {
            let mut cfg = ExperimentConfig::new(sys, 1000);
            cfg.seed = u64::MAX - i as u64;
            cfg.thresholds.ks = 0.1 + 0.2;
            let text = cfg.to_json();
            let back = ExperimentConfig::from_json(&text).unwrap();
            assert_eq!(back, cfg);
            assert_eq!(back.to_json(), text);
        }
    }

    #[test]
    fn defaults_fill_in() {
        let cfg = ExperimentConfig::from_json(r#"{"system": {"kind": "exact", "sequence": {"name": "power_of_two"}}, "n": 10}"#).unwrap();
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.thresholds, Thresholds::default());
        assert_eq!(cfg.outputs.orbit_csv.as_deref(), Some("orbit.csv"));
    }

    #[test]
    fn errors_name_the_field() {
        let bad = |json: &str| format!("{:#}", ExperimentConfig::from_json(json).unwrap_err());
        let e = bad(r#"{"system": {"kind": "rv_power", "dist": {"family": "normal", "mean": 0, "sd": -1}}, "n": 10}"#);
        assert!(e.contains("system.sd"), "{e}");
        let e = bad(r#"{"system": {"kind": "exact", "sequence": {"name": "fibonacci"}}, "n": 0}"#);
        assert!(e.contains("n:"), "{e}");
        let e = bad(r#"{"system": {"kind": "matrix_power", "matrix": [[1, 1], [1, 0]], "row": 3, "col": 1, "exact": false}, "n": 10}"#);
        assert!(e.contains("system.row"), "{e}");
        let e = bad(r#"{"system": {"kind": "two_step", "a1": 1, "a2": 1, "b1": 0.5, "b2": 2, "extended": false, "x1": 1, "x2": 1}, "n": 10}"#);
        assert!(e.contains("system.b1"), "{e}");
        let e = bad(r#"{"system": {"kind": "exact", "sequence": {"name": "fibonacci"}}, "n": 10, "colour": 1}"#);
        assert!(e.contains("colour"), "{e}");
    }
}
