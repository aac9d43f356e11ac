use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(
    name = "neighborly",
    version,
    about = "Bounds, class pairings and moment-curve certificates for r-neighborly embeddings"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Table of the best lower bound on the ambient dimension.
    Bounds(BoundsArgs),
    /// Top characteristic-class pairing on flags of r orthogonal lines.
    #[command(name = "verify-theorem2")]
    VerifyTheorem2(PairingArgs),
    /// The two-point model: (1+a)^k in Z2[a]/(a^k).
    #[command(name = "verify-r2-model")]
    VerifyR2Model(R2Args),
    /// Supporting hyperplanes of the moment curve.
    Moment(MomentArgs),
    /// Rank of the tangent-plus-centroid span at r points of the moment curve.
    Rank(RankArgs),
    /// Iterated antipodal point configurations.
    #[command(name = "lr-config")]
    LrConfig(LrArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Bounds(_) => "bounds",
            Command::VerifyTheorem2(_) => "verify-theorem2",
            Command::VerifyR2Model(_) => "verify-r2-model",
            Command::Moment(_) => "moment",
            Command::Rank(_) => "rank",
            Command::LrConfig(_) => "lr-config",
        }
    }

    pub fn output(&self) -> &OutputArgs {
        match self {
            Command::Bounds(a) => &a.output,
            Command::VerifyTheorem2(a) => &a.output,
            Command::VerifyR2Model(a) => &a.output,
            Command::Moment(a) => &a.output,
            Command::Rank(a) => &a.output,
            Command::LrConfig(a) => &a.output,
        }
    }
}

/// Inclusive range written `a`, `a..b` or `a..=b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Span {
    pub start: u64,
    pub end: u64,
}

impl Span {
    pub fn iter(self) -> impl Iterator<Item = u64> + Clone {
        self.start..=self.end
    }
}

impl FromStr for Span {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |t: &str| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| format!("'{t}' is not a non-negative integer"))
        };
        let (start, end) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b.strip_prefix('=').unwrap_or(b))?),
            None => {
                let v = parse(s)?;
                (v, v)
            }
        };
        if start > end {
            return Err(format!("range {s} is empty"));
        }
        Ok(Span { start, end })
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.start == self.end {
            write!(f, "{}", self.start)
        } else {
            write!(f, "{}..{}", self.start, self.end)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
    #[value(alias = "markdown")]
    Md,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ManifoldArg {
    Euclidean,
    Projective,
}

#[derive(Args, Debug, Serialize)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write to this file instead of standard output.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct BoundsArgs {
    #[arg(long)]
    pub k: Span,
    #[arg(long)]
    pub r: Span,
    #[arg(long, value_enum, default_value_t = ManifoldArg::Euclidean)]
    pub manifold: ManifoldArg,
    /// Attach the computed class pairing wherever the projective bound applies.
    #[arg(long)]
    pub with_pairing: bool,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct PairingArgs {
    #[arg(long)]
    pub k: Span,
    #[arg(long)]
    pub r: Span,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct R2Args {
    #[arg(long)]
    pub k: Span,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct ToleranceArgs {
    #[arg(long)]
    pub tol_eq: Option<f64>,
    #[arg(long)]
    pub tol_curv: Option<f64>,
    #[arg(long)]
    pub tol_pos: Option<f64>,
    #[arg(long)]
    pub tol_sep: Option<f64>,
    #[arg(long)]
    pub tol_zero: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
pub struct MomentArgs {
    /// Number of touch points; inferred from --angles when omitted.
    #[arg(long)]
    pub r: Option<usize>,
    /// Touch angles in radians.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub angles: Option<Vec<f64>>,
    #[arg(long, default_value_t = 4096)]
    pub grid: usize,
    /// Run the perturbation sweep.
    #[arg(long)]
    pub sweep: bool,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub delta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Harmonics carried by perturbed coordinates (default r + 1).
    #[arg(long)]
    pub harmonics: Option<usize>,
    #[command(flatten)]
    pub tolerances: ToleranceArgs,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct RankArgs {
    /// Use the moment curve in R^{2r}.
    #[arg(long)]
    pub moment: bool,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub angles: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub rank_tol: Option<f64>,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct LrArgs {
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Depth of the antipodal tree (2^s points).
    #[arg(long, conflicts_with = "r")]
    pub s: Option<u32>,
    /// Point count; split into powers of two placed 3 apart.
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long, default_value_t = 0.4)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}
