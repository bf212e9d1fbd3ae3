//! Output records and their CSV / JSON encodings.
//!
//! CSV numbers carry 17 significant digits; JSON numbers use the shortest
//! representation that parses back to the same double.

use std::io::Write;
use std::path::Path;

use dipolekit::periodic::sweep::{SweepRatio, SweepRow};
use serde::{Deserialize, Serialize};

use crate::config::Format;
use crate::CliError;

pub const DIVERGENT: &str = "DIV";
pub const NOT_CONVERGED: &str = "NC";

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// A ratio value or one of the sentinels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RatioCell {
    Value(f64),
    Flag(String),
}

impl RatioCell {
    fn csv(&self) -> String {
        match self {
            RatioCell::Value(v) => num(*v),
            RatioCell::Flag(s) => s.clone(),
        }
    }
}

pub trait Record: Serialize {
    const HEADER: &'static [&'static str];
    fn cells(&self) -> Vec<String>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub phi: f64,
    #[serde(rename = "r_over_L")]
    pub r_over_l: f64,
    pub xi_free_reduced: f64,
    pub xi_box_reduced: f64,
    pub ratio: RatioCell,
    pub shells_used: u64,
}

impl From<&SweepRow<f64>> for SweepRecord {
    fn from(row: &SweepRow<f64>) -> Self {
        let ratio = match row.ratio {
            SweepRatio::Value(v) => RatioCell::Value(v),
            SweepRatio::Divergent => RatioCell::Flag(DIVERGENT.into()),
            SweepRatio::NotConverged => RatioCell::Flag(NOT_CONVERGED.into()),
        };
        SweepRecord {
            phi: row.phi,
            r_over_l: row.r_over_l,
            xi_free_reduced: row.xi_free_reduced,
            xi_box_reduced: row.xi_box_reduced,
            ratio,
            shells_used: row.shells_used as u64,
        }
    }
}

impl Record for SweepRecord {
    const HEADER: &'static [&'static str] = &[
        "phi",
        "r_over_L",
        "xi_free_reduced",
        "xi_box_reduced",
        "ratio",
        "shells_used",
    ];
    fn cells(&self) -> Vec<String> {
        vec![
            num(self.phi),
            num(self.r_over_l),
            num(self.xi_free_reduced),
            num(self.xi_box_reduced),
            self.ratio.csv(),
            self.shells_used.to_string(),
        ]
    }
}

/// Free-space couplings; absolute values are in the requested unit system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeRecord {
    pub r: f64,
    pub xi_classical: f64,
    pub xi_classical_reduced: f64,
    pub xi_p: f64,
    pub xi_p_reduced: f64,
    pub x_omega: Option<f64>,
    pub xi_t: Option<f64>,
    pub xi_t_reduced: Option<f64>,
    pub xi_t_over_xi_p: Option<RatioCell>,
}

impl Record for FreeRecord {
    const HEADER: &'static [&'static str] = &[
        "r",
        "xi_classical",
        "xi_classical_reduced",
        "xi_p",
        "xi_p_reduced",
        "x_omega",
        "xi_t",
        "xi_t_reduced",
        "xi_t_over_xi_p",
    ];
    fn cells(&self) -> Vec<String> {
        vec![
            num(self.r),
            num(self.xi_classical),
            num(self.xi_classical_reduced),
            num(self.xi_p),
            num(self.xi_p_reduced),
            opt(self.x_omega),
            opt(self.xi_t),
            opt(self.xi_t_reduced),
            self.xi_t_over_xi_p
                .as_ref()
                .map(RatioCell::csv)
                .unwrap_or_default(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxRecord {
    pub kind: String,
    pub estimator: Option<String>,
    #[serde(rename = "r_over_L")]
    pub r_over_l: f64,
    pub xi_free: f64,
    pub xi_free_reduced: f64,
    pub xi_box: f64,
    pub xi_box_reduced: f64,
    pub ratio: RatioCell,
    pub shells_used: u64,
    pub modes_used: u64,
    pub last_shell_delta: f64,
    pub regulator_sigma: f64,
    pub status: String,
}

impl Record for BoxRecord {
    const HEADER: &'static [&'static str] = &[
        "kind",
        "estimator",
        "r_over_L",
        "xi_free",
        "xi_free_reduced",
        "xi_box",
        "xi_box_reduced",
        "ratio",
        "shells_used",
        "modes_used",
        "last_shell_delta",
        "regulator_sigma",
        "status",
    ];
    fn cells(&self) -> Vec<String> {
        vec![
            self.kind.clone(),
            self.estimator.clone().unwrap_or_default(),
            num(self.r_over_l),
            num(self.xi_free),
            num(self.xi_free_reduced),
            num(self.xi_box),
            num(self.xi_box_reduced),
            self.ratio.csv(),
            self.shells_used.to_string(),
            self.modes_used.to_string(),
            num(self.last_shell_delta),
            num(self.regulator_sigma),
            self.status.clone(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelRecord {
    /// Delay in units of `r / c`.
    pub s_over_r: f64,
    /// `K r^4 / (c (mu0/4pi) |m1| |m2|)`.
    pub kernel_reduced: f64,
}

impl Record for KernelRecord {
    const HEADER: &'static [&'static str] = &["s_over_r", "kernel_reduced"];
    fn cells(&self) -> Vec<String> {
        vec![num(self.s_over_r), num(self.kernel_reduced)]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub suite: String,
    pub cases: u64,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Record for CheckRecord {
    const HEADER: &'static [&'static str] =
        &["suite", "cases", "max_deviation", "tolerance", "pass"];
    fn cells(&self) -> Vec<String> {
        vec![
            self.suite.clone(),
            self.cases.to_string(),
            num(self.max_deviation),
            num(self.tolerance),
            self.pass.to_string(),
        ]
    }
}

pub fn csv_bytes<R: Record>(rows: &[R]) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(R::HEADER).expect("write to memory");
    for row in rows {
        w.write_record(row.cells()).expect("write to memory");
    }
    w.into_inner().expect("flush to memory")
}

/// A single record is written as an object, several as an array.
pub fn json_bytes<R: Record>(rows: &[R]) -> Vec<u8> {
    let mut out = match rows {
        [one] => serde_json::to_vec_pretty(one),
        _ => serde_json::to_vec_pretty(rows),
    }
    .expect("records serialize");
    out.push(b'\n');
    out
}

pub fn encode<R: Record>(rows: &[R], format: Format) -> Vec<u8> {
    match format {
        Format::Csv => csv_bytes(rows),
        Format::Json => json_bytes(rows),
    }
}

pub fn emit(bytes: &[u8], out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(bytes)
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::config(format!("cannot write output: {e}")))
        }
    }
}
