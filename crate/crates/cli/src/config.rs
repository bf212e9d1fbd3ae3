use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use dipolekit::periodic::sweep::SweepSpec;
use dipolekit::periodic::{Estimator, ImageSumOptions};
use dipolekit::{UnitSystem, Vector3};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Free-space couplings for one pair.
    Free,
    /// Box coupling and its ratio to free space for one pair.
    Box,
    /// Orientation sweep of the box-to-free ratio.
    Sweep,
    /// Retarded memory kernel trace.
    Kernel,
    /// Oracle cross-checks on seeded random configurations.
    Check,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    Natural,
    Si,
}

impl Units {
    pub fn system(self) -> UnitSystem {
        match self {
            Units::Natural => UnitSystem::Natural,
            Units::Si => UnitSystem::Si,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorArg {
    Near,
    Full,
}

impl From<EstimatorArg> for Estimator {
    fn from(e: EstimatorArg) -> Self {
        match e {
            EstimatorArg::Near => Estimator::NearResonant,
            EstimatorArg::Full => Estimator::FullSum,
        }
    }
}

/// Command-line flags. Every flag except the command may also come from the
/// config file; flags win.
#[derive(Debug, Parser)]
#[command(
    name = "dipolekit",
    version,
    about = "Magnetic dipole-dipole couplings in free space and periodic boxes"
)]
#[command(allow_negative_numbers = true)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// TOML file with the same keys as the long flags (underscores for dashes).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// First moment, `x,y,z`.
    #[arg(long, allow_hyphen_values = true)]
    pub m1: Option<String>,
    /// Second moment, `x,y,z`.
    #[arg(long, allow_hyphen_values = true)]
    pub m2: Option<String>,
    /// Separation `x2 - x1`, `x,y,z`.
    #[arg(long, allow_hyphen_values = true)]
    pub r: Option<String>,
    /// Box edge.
    #[arg(long = "L")]
    pub l: Option<f64>,
    /// Transition angular frequency.
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long, value_enum)]
    pub units: Option<Units>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Tolerance override (check suites, image-sum convergence).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Random configurations per check suite.
    #[arg(long)]
    pub count: Option<usize>,
    /// Box estimator for transition dipoles.
    #[arg(long, value_enum)]
    pub estimator: Option<EstimatorArg>,
    /// Kernel frequency cutoff (default 50 c / r).
    #[arg(long)]
    pub omega_cut: Option<f64>,
    /// Largest kernel delay in units of r / c.
    #[arg(long)]
    pub s_max: Option<f64>,
    /// Kernel grid points.
    #[arg(long)]
    pub n_s: Option<usize>,
    /// Sweep pair direction, `x,y,z`.
    #[arg(long, allow_hyphen_values = true)]
    pub direction: Option<String>,
    #[arg(long)]
    pub phi_start: Option<f64>,
    /// Exclusive end of the sweep angle grid.
    #[arg(long)]
    pub phi_end: Option<f64>,
    #[arg(long)]
    pub n_phi: Option<usize>,
    /// Comma-separated list of r/L values.
    #[arg(long)]
    pub r_over_l: Option<String>,
    /// Image-sum shell limit.
    #[arg(long)]
    pub shell_max: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub m1: Option<[f64; 3]>,
    pub m2: Option<[f64; 3]>,
    pub r: Option<[f64; 3]>,
    #[serde(rename = "L")]
    pub l: Option<f64>,
    pub omega: Option<f64>,
    pub units: Option<Units>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub count: Option<usize>,
    pub estimator: Option<EstimatorArg>,
    pub omega_cut: Option<f64>,
    pub s_max: Option<f64>,
    pub n_s: Option<usize>,
    pub direction: Option<[f64; 3]>,
    pub phi_start: Option<f64>,
    pub phi_end: Option<f64>,
    pub n_phi: Option<usize>,
    pub r_over_l: Option<Vec<f64>>,
    pub shell_max: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| {
            CliError::config(format!("config {}: {}", path.display(), e.message().trim()))
        })
    }
}

/// Validated configuration with every physical input in natural units.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub units: Units,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub tol: Option<f64>,
    pub count: usize,
    pub m1: Vector3,
    pub m2: Vector3,
    pub r: Vector3,
    pub l: Option<f64>,
    pub omega: Option<f64>,
    pub estimator: EstimatorArg,
    pub omega_cut: Option<f64>,
    pub s_max: f64,
    pub n_s: usize,
    pub sweep: SweepSpec<f64>,
}

pub fn parse_vector(field: &str, s: &str) -> Result<[f64; 3], CliError> {
    let bad = || {
        CliError::config(format!(
            "invalid {field}: expected three comma-separated numbers, got {s:?}"
        ))
    };
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let mut out = [0.0; 3];
    for (o, p) in out.iter_mut().zip(&parts) {
        *o = p.parse::<f64>().map_err(|_| bad())?;
    }
    Ok(out)
}

fn parse_list(field: &str, s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|p| {
            p.trim().parse::<f64>().map_err(|_| {
                CliError::config(format!("invalid {field}: {:?} is not a number", p.trim()))
            })
        })
        .collect()
}

fn finite_vector(field: &str, v: [f64; 3]) -> Result<Vector3, CliError> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(Vector3::new(v[0], v[1], v[2]))
    } else {
        Err(CliError::config(format!(
            "invalid {field}: components must be finite"
        )))
    }
}

fn positive(field: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::config(format!(
            "invalid {field}: must be positive and finite, got {v}"
        )))
    }
}

fn vector_arg(
    field: &str,
    flag: &Option<String>,
    file: Option<[f64; 3]>,
) -> Result<Option<[f64; 3]>, CliError> {
    match flag {
        Some(s) => parse_vector(field, s).map(Some),
        None => Ok(file),
    }
}

impl RunConfig {
    pub fn resolve(cli: &Cli) -> Result<Self, CliError> {
        let file = match &cli.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let units = cli.units.or(file.units).unwrap_or(Units::Natural);
        let sys = units.system();

        let unit_z = [0.0, 0.0, 1.0];
        let m1 = vector_arg("m1", &cli.m1, file.m1)?.unwrap_or(unit_z);
        let m2 = vector_arg("m2", &cli.m2, file.m2)?.unwrap_or(unit_z);
        let r = vector_arg("r", &cli.r, file.r)?.unwrap_or(unit_z);
        let m1 = sys.moment_to_natural(finite_vector("m1", m1)?);
        let m2 = sys.moment_to_natural(finite_vector("m2", m2)?);
        let r = finite_vector("r", r)?;
        if m1.norm() == 0.0 {
            return Err(CliError::config("invalid m1: must be nonzero"));
        }
        if m2.norm() == 0.0 {
            return Err(CliError::config("invalid m2: must be nonzero"));
        }
        if r.norm() == 0.0 {
            return Err(CliError::config("invalid r: dipoles coincide"));
        }

        let l = cli.l.or(file.l).map(|v| positive("L", v)).transpose()?;
        let omega = cli
            .omega
            .or(file.omega)
            .map(|v| positive("omega", v).map(|w| sys.frequency_to_natural(w)))
            .transpose()?;
        let omega_cut = cli
            .omega_cut
            .or(file.omega_cut)
            .map(|v| positive("omega_cut", v).map(|w| sys.frequency_to_natural(w)))
            .transpose()?;
        let tol = cli
            .tol
            .or(file.tol)
            .map(|v| positive("tol", v))
            .transpose()?;
        let s_max = positive("s_max", cli.s_max.or(file.s_max).unwrap_or(3.0))?;
        let n_s = cli.n_s.or(file.n_s).unwrap_or(301);
        if n_s < 2 {
            return Err(CliError::config("invalid n_s: need at least 2 points"));
        }
        let count = cli.count.or(file.count).unwrap_or(20);
        if count == 0 {
            return Err(CliError::config("invalid count: must be at least 1"));
        }

        let mut sweep = SweepSpec::<f64>::default();
        if let Some(d) = vector_arg("direction", &cli.direction, file.direction)? {
            sweep.direction = finite_vector("direction", d)?;
        }
        if let Some(l) = l {
            sweep.box_edge = l;
        }
        if let Some(v) = cli.phi_start.or(file.phi_start) {
            sweep.phi_start = v;
        }
        if let Some(v) = cli.phi_end.or(file.phi_end) {
            sweep.phi_end = v;
        }
        if let Some(v) = cli.n_phi.or(file.n_phi) {
            sweep.n_phi = v;
        }
        sweep.r_over_l = match &cli.r_over_l {
            Some(s) => parse_list("r_over_l", s)?,
            None => file.r_over_l.unwrap_or(sweep.r_over_l),
        };
        let shell_max = cli.shell_max.or(file.shell_max);
        if shell_max == Some(0) {
            return Err(CliError::config("invalid shell_max: must be at least 1"));
        }
        sweep.images = ImageSumOptions {
            shell_max: shell_max.unwrap_or(sweep.images.shell_max),
            tol: tol.unwrap_or(sweep.images.tol),
        };
        sweep.validate().map_err(CliError::from)?;

        Ok(RunConfig {
            command: cli.command,
            units,
            format: cli.format.or(file.format).unwrap_or(Format::Csv),
            out: cli.out.clone().or(file.out),
            seed: cli.seed.or(file.seed).unwrap_or(1),
            tol,
            count,
            m1,
            m2,
            r,
            l,
            omega,
            estimator: cli
                .estimator
                .or(file.estimator)
                .unwrap_or(EstimatorArg::Full),
            omega_cut,
            s_max,
            n_s,
            sweep,
        })
    }

    /// Image-sum options for single-pair box runs.
    pub fn image_options(&self) -> ImageSumOptions<f64> {
        ImageSumOptions {
            shell_max: self.sweep.images.shell_max,
            tol: self.tol.unwrap_or(ImageSumOptions::<f64>::default().tol),
        }
    }
}
