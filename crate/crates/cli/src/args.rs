use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

pub const EXIT_CODES: &str = "\
Exit codes:
  0  success
  1  unexpected failure
  2  I/O error or malformed input/config file
  3  numerical precondition violated (the message names it)

Set NSPYR_LOG=info|debug|trace for progress logging.";

#[derive(Parser, Debug)]
#[command(name = "nspyr", version, about = "Nonstationary subdivision pyramids for sequences and planar curves", after_help = EXIT_CODES)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decompose a sequence or curve CSV into a pyramid.
    Decompose(CommonArgs),
    /// Rebuild the finest level from a pyramid JSON.
    Reconstruct(ReconstructArgs),
    /// Export per-level decimation filters of a family.
    Gamma(CommonArgs),
    /// Circle and wavy-circle circularity experiment.
    CircleDemo(DemoArgs),
    /// Quadrant anomaly localization experiment.
    AnomalyDemo(DemoArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryArg {
    Finite,
    Periodic,
}

impl From<BoundaryArg> for nspyr::Boundary {
    fn from(b: BoundaryArg) -> Self {
        match b {
            BoundaryArg::Finite => nspyr::Boundary::Finite,
            BoundaryArg::Periodic => nspyr::Boundary::Periodic,
        }
    }
}

/// `ns4pt`, `nscubic`, `conic` or `stationary:<mask.csv>`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum FamilySpec {
    Ns4pt,
    NsCubic,
    Conic,
    Stationary(PathBuf),
}

impl FromStr for FamilySpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "ns4pt" => Ok(Self::Ns4pt),
            "nscubic" => Ok(Self::NsCubic),
            "conic" => Ok(Self::Conic),
            _ => match s.strip_prefix("stationary:") {
                Some(path) if !path.is_empty() => Ok(Self::Stationary(PathBuf::from(path))),
                _ => Err(format!(
                    "unknown family {s:?}; expected ns4pt, nscubic, conic or stationary:<file>"
                )),
            },
        }
    }
}

impl TryFrom<String> for FamilySpec {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

impl From<FamilySpec> for String {
    fn from(f: FamilySpec) -> String {
        match f {
            FamilySpec::Ns4pt => "ns4pt".into(),
            FamilySpec::NsCubic => "nscubic".into(),
            FamilySpec::Conic => "conic".into(),
            FamilySpec::Stationary(p) => format!("stationary:{}", p.display()),
        }
    }
}

#[derive(Args, Debug, Default, Clone)]
pub struct CommonArgs {
    #[arg(long)]
    pub family: Option<FamilySpec>,
    /// Angle between consecutive coarsest-level samples; seeds the tension
    /// families with v = cos(theta).
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// Number of pyramid levels J.
    #[arg(long)]
    pub levels: Option<u32>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, value_enum)]
    pub boundary: Option<BoundaryArg>,
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write SVG plots.
    #[arg(long)]
    pub plot: bool,
    /// Coarsest-level sample count used to seed a family when no data is
    /// read (gamma): theta = 2 pi / samples.
    #[arg(long)]
    pub samples: Option<usize>,
    /// JSON file with defaults for any of the flags above.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Default, Clone)]
pub struct ReconstructArgs {
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Output CSV file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Drop all details before synthesis.
    #[arg(long)]
    pub zero_details: bool,
    /// Multiply all details by this factor before synthesis.
    #[arg(long)]
    pub scale_details: Option<f64>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Default, Clone)]
pub struct DemoArgs {
    /// Samples per curve.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub levels: Option<u32>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub radius: Option<f64>,
    /// Perturbation amplitudes; circle-demo accepts a comma separated list.
    #[arg(long, value_delimiter = ',')]
    pub amplitude: Option<Vec<f64>>,
    #[arg(long)]
    pub frequency: Option<u32>,
    #[arg(long)]
    pub threshold_ratio: Option<f64>,
    #[arg(long)]
    pub peak_fraction: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Accepted for symmetry; demos always write their plots.
    #[arg(long)]
    pub plot: bool,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Contents of a `--config` file. Every field is optional.
#[derive(Debug, Default, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub family: Option<FamilySpec>,
    pub theta: Option<f64>,
    pub levels: Option<u32>,
    pub epsilon: Option<f64>,
    pub boundary: Option<BoundaryArg>,
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub plot: Option<bool>,
    pub samples: Option<usize>,
    pub radius: Option<f64>,
    pub amplitude: Option<Vec<f64>>,
    pub frequency: Option<u32>,
    pub threshold_ratio: Option<f64>,
    pub peak_fraction: Option<f64>,
    pub zero_details: Option<bool>,
    pub scale_details: Option<f64>,
}

pub fn load_config(path: Option<&Path>) -> Result<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let cfg = serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
    Ok(cfg)
}

/// Fully resolved settings shared by decompose and gamma.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub family: FamilySpec,
    pub theta: Option<f64>,
    pub levels: u32,
    pub epsilon: f64,
    pub boundary: Option<BoundaryArg>,
    pub input: Option<PathBuf>,
    pub out: PathBuf,
    pub plot: bool,
    pub samples: Option<usize>,
}

pub fn check_numeric(levels: u32, epsilon: f64) -> Result<()> {
    if levels < 1 {
        return Err(nspyr::Error::BadParams("levels J must be at least 1".into()))
            .context("invalid --levels");
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(nspyr::Error::BadParams(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )))
        .context("invalid --epsilon");
    }
    Ok(())
}

impl RunConfig {
    pub fn resolve(args: &CommonArgs) -> Result<Self> {
        let file = load_config(args.config.as_deref())?;
        let cfg = Self {
            family: args.family.clone().or(file.family).unwrap_or(FamilySpec::Conic),
            theta: args.theta.or(file.theta),
            levels: args.levels.or(file.levels).unwrap_or(4),
            epsilon: args
                .epsilon
                .or(file.epsilon)
                .unwrap_or(nspyr::pyramid::DEFAULT_EPSILON),
            boundary: args.boundary.or(file.boundary),
            input: args.input.clone().or(file.input),
            out: args
                .out
                .clone()
                .or(file.out)
                .unwrap_or_else(|| PathBuf::from(".")),
            plot: args.plot || file.plot.unwrap_or(false),
            samples: args.samples.or(file.samples),
        };
        check_numeric(cfg.levels, cfg.epsilon)?;
        Ok(cfg)
    }

    pub fn input(&self) -> Result<&Path> {
        match &self.input {
            Some(p) => Ok(p),
            None => bail!(std::io::Error::new(
                std::io::ErrorKind::NotFound,
                "no input file given (use --in)"
            )),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReconstructConfig {
    pub input: PathBuf,
    pub out: PathBuf,
    pub zero_details: bool,
    pub scale_details: Option<f64>,
}

impl ReconstructConfig {
    pub fn resolve(args: &ReconstructArgs) -> Result<Self> {
        let file = load_config(args.config.as_deref())?;
        let input = args.input.clone().or(file.input).ok_or_else(|| {
            std::io::Error::new(std::io::ErrorKind::NotFound, "no pyramid given (use --in)")
        })?;
        Ok(Self {
            input,
            out: args
                .out
                .clone()
                .or(file.out)
                .unwrap_or_else(|| PathBuf::from("reconstructed.csv")),
            zero_details: args.zero_details || file.zero_details.unwrap_or(false),
            scale_details: args.scale_details.or(file.scale_details),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DemoConfig {
    pub samples: usize,
    pub levels: u32,
    pub epsilon: f64,
    pub radius: f64,
    pub amplitudes: Vec<f64>,
    pub frequency: u32,
    pub threshold_ratio: f64,
    pub peak_fraction: f64,
    pub out: PathBuf,
}

/// Wavy-circle presets for circle-demo.
pub const WAVY_AMPLITUDES: [f64; 3] = [0.01, 0.03, 0.06];
pub const WAVY_FREQUENCY: u32 = 8;
/// Quadrant bump settings for anomaly-demo.
pub const ANOMALY_AMPLITUDE: f64 = 0.05;
pub const ANOMALY_FREQUENCY: u32 = 24;

impl DemoConfig {
    pub fn resolve(args: &DemoArgs, anomaly: bool) -> Result<Self> {
        let file = load_config(args.config.as_deref())?;
        let defaults = nspyr::geometry::AnomalyOptions::default();
        let cfg = Self {
            samples: args.samples.or(file.samples).unwrap_or(256),
            levels: args.levels.or(file.levels).unwrap_or(4),
            epsilon: args
                .epsilon
                .or(file.epsilon)
                .unwrap_or(nspyr::pyramid::DEFAULT_EPSILON),
            radius: args.radius.or(file.radius).unwrap_or(1.0),
            amplitudes: args.amplitude.clone().or(file.amplitude).unwrap_or_else(|| {
                if anomaly {
                    vec![ANOMALY_AMPLITUDE]
                } else {
                    WAVY_AMPLITUDES.to_vec()
                }
            }),
            frequency: args.frequency.or(file.frequency).unwrap_or(if anomaly {
                ANOMALY_FREQUENCY
            } else {
                WAVY_FREQUENCY
            }),
            threshold_ratio: args
                .threshold_ratio
                .or(file.threshold_ratio)
                .unwrap_or(defaults.threshold_ratio),
            peak_fraction: args
                .peak_fraction
                .or(file.peak_fraction)
                .unwrap_or(defaults.peak_fraction),
            out: args
                .out
                .clone()
                .or(file.out)
                .unwrap_or_else(|| PathBuf::from(".")),
        };
        check_numeric(cfg.levels, cfg.epsilon)?;
        if cfg.amplitudes.is_empty() {
            return Err(nspyr::Error::BadParams("at least one amplitude is needed".into()).into());
        }
        Ok(cfg)
    }
}
