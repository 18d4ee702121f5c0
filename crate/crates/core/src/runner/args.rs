use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "nilcircle", version, about = "Experiments on the step-two nilpotent group G0(d)")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, Default, Args)]
pub struct CommonArgs {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// JSON file whose keys override the flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Record the wall-clock time in the report header.
    #[arg(long, global = true)]
    pub timestamp: bool,
    /// Also write a gnuplot script next to a CSV output file.
    #[arg(long, global = true)]
    pub gnuplot: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Exact identities of the group law, words, kernels and variation.
    Selfcheck(SelfcheckArgs),
    /// Maximal complete Gauss sums over reduced a/q for each q.
    GaussScan(GaussScanArgs),
    /// Maximal nilpotent Gauss sums G(a/q) for each q.
    NilgaussScan(NilgaussScanArgs),
    /// Minor-arc Weyl sums |S| / P at growing P.
    WeylScan(WeylScanArgs),
    /// Two-stage major/minor arc decomposition of K_k with its residuals.
    Decompose(DecomposeArgs),
    /// Polynomial ergodic averages, maximal function and variation on a finite nilsystem.
    ErgodicRun(ErgodicRunArgs),
    /// rho-variation and the Rademacher-Menshov bound of a sequence.
    Variation(VariationArgs),
    /// Quasi-ball counts against their predicted volume.
    QuasiGeometry(QuasiGeometryArgs),
}

fn merge<A: Serialize + DeserializeOwned>(args: &A, overrides: Map<String, Value>) -> Result<A> {
    let Value::Object(mut base) = serde_json::to_value(args).map_err(|e| Error::Parse(e.to_string()))? else {
        unreachable!("argument structs serialize to objects")
    };
    for (k, v) in overrides {
        let key = k.replace('-', "_");
        if !base.contains_key(&key) {
            return Err(Error::invalid(format!("unknown config key {k:?}")));
        }
        base.insert(key, v);
    }
    serde_json::from_value(Value::Object(base)).map_err(|e| Error::invalid(format!("config: {e}")))
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Selfcheck(_) => "selfcheck",
            Command::GaussScan(_) => "gauss-scan",
            Command::NilgaussScan(_) => "nilgauss-scan",
            Command::WeylScan(_) => "weyl-scan",
            Command::Decompose(_) => "decompose",
            Command::ErgodicRun(_) => "ergodic-run",
            Command::Variation(_) => "variation",
            Command::QuasiGeometry(_) => "quasi-geometry",
        }
    }

    pub fn default_format(&self) -> Format {
        match self {
            Command::Decompose(_) => Format::Json,
            _ => Format::Csv,
        }
    }

    pub(crate) fn with_overrides(self, params: Map<String, Value>) -> Result<Self> {
        Ok(match self {
            Command::Selfcheck(a) => Command::Selfcheck(merge(&a, params)?),
            Command::GaussScan(a) => Command::GaussScan(merge(&a, params)?),
            Command::NilgaussScan(a) => Command::NilgaussScan(merge(&a, params)?),
            Command::WeylScan(a) => Command::WeylScan(merge(&a, params)?),
            Command::Decompose(a) => Command::Decompose(merge(&a, params)?),
            Command::ErgodicRun(a) => Command::ErgodicRun(merge(&a, params)?),
            Command::Variation(a) => Command::Variation(merge(&a, params)?),
            Command::QuasiGeometry(a) => Command::QuasiGeometry(merge(&a, params)?),
        })
    }
}

/// Inclusive integer range written `lo..hi` (or `lo..=hi`, or a single value).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct IntRange {
    pub lo: i64,
    pub hi: i64,
}

impl IntRange {
    pub fn values(&self) -> impl Iterator<Item = i64> {
        self.lo..=self.hi
    }
}

impl FromStr for IntRange {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parse = |t: &str| t.trim().parse::<i64>().map_err(|e| format!("{t:?}: {e}"));
        let (lo, hi) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b.strip_prefix('=').unwrap_or(b))?),
            None => (parse(s)?, parse(s)?),
        };
        if lo > hi {
            return Err(format!("empty range {s:?}"));
        }
        Ok(IntRange { lo, hi })
    }
}

impl fmt::Display for IntRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.lo, self.hi)
    }
}

impl TryFrom<String> for IntRange {
    type Error = String;
    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

impl From<IntRange> for String {
    fn from(r: IntRange) -> String {
        r.to_string()
    }
}

/// Comma-separated reals; `inf` is allowed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct RealList(pub Vec<f64>);

impl FromStr for RealList {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let v = s
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        if v.iter().any(|x| x.is_nan()) {
            return Err("NaN is not allowed".into());
        }
        Ok(RealList(v))
    }
}

impl fmt::Display for RealList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl TryFrom<String> for RealList {
    type Error = String;
    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

impl From<RealList> for String {
    fn from(r: RealList) -> String {
        r.to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelfcheckArgs {
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Random cases per identity.
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussScanArgs {
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value = "2..30")]
    pub q: IntRange,
    #[arg(long)]
    pub primes_only: bool,
    /// Sample this many reduced a per q instead of all of them (0 = all).
    #[arg(long, default_value_t = 0)]
    pub sample: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariantArg {
    D,
    DTilde,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    Dp,
    Brute,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NilgaussScanArgs {
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value = "2..8")]
    pub q: IntRange,
    #[arg(long, default_value_t = 1)]
    pub r: usize,
    #[arg(long, value_enum, default_value_t = VariantArg::D)]
    pub variant: VariantArg,
    #[arg(long, value_enum, default_value_t = MethodArg::Dp)]
    pub method: MethodArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightArg {
    Sharp,
    Smooth,
    SmoothPrime,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeylScanArgs {
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, value_delimiter = ',', default_value = "64,128,256,512,1024,2048")]
    pub p: Vec<u64>,
    #[arg(long, value_enum, default_value_t = WeightArg::Smooth)]
    pub weight: WeightArg,
    /// tau of the smooth-prime weight.
    #[arg(long, default_value_t = 2.0)]
    pub tau: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Central,
    Noncentral,
    Full,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecomposeArgs {
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value_t = 6)]
    pub k: u32,
    #[arg(long, default_value_t = 2.0)]
    pub tau: f64,
    #[arg(long, default_value_t = 0.4)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.6)]
    pub delta_prime: f64,
    /// The exponent D of the denominators Q_s.
    #[arg(long, default_value_t = 4.0)]
    pub big_d: f64,
    #[arg(long, default_value_t = 6)]
    pub q_cap: u64,
    #[arg(long, default_value_t = 128)]
    pub noncentral_grid: usize,
    #[arg(long, default_value_t = 4096)]
    pub central_grid: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Full)]
    pub mode: ModeArg,
    /// Seeded random probe points on top of the support of L_k.
    #[arg(long, default_value_t = 32)]
    pub extra_probes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemArg {
    Cyclic,
    HeisenbergQuotient,
    Custom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionArg {
    /// Indicator of the first point.
    Delta,
    /// Seeded uniform values in [-1, 1].
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AveragingArg {
    Rough,
    Smoothed,
    Indicator,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErgodicRunArgs {
    #[arg(long, value_enum, default_value_t = SystemArg::Cyclic)]
    pub system: SystemArg,
    /// Size of the cyclic system.
    #[arg(long, default_value_t = 101)]
    pub m: usize,
    /// Degree of the Heisenberg quotient.
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Modulus of the Heisenberg quotient.
    #[arg(long, default_value_t = 3)]
    pub q: i128,
    /// JSON system spec for `--system custom`.
    #[arg(long)]
    pub spec_file: Option<PathBuf>,
    /// Polynomials as `c1,c2,..;c1,..` (coefficients of n, n^2, ..), one per generator;
    /// defaults to P_j(n) = n^j.
    #[arg(long)]
    pub polys: Option<String>,
    #[arg(long, value_enum, default_value_t = FunctionArg::Delta)]
    pub f: FunctionArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Scales N = 1, 2, 4, .., 2^log2_n_max.
    #[arg(long, default_value_t = 14)]
    pub log2_n_max: u32,
    #[arg(long, value_enum, default_value_t = AveragingArg::Rough)]
    pub averaging: AveragingArg,
    /// Variation exponent (`inf` for the jump supremum).
    #[arg(long, default_value = "2")]
    pub rho: RealList,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SequenceArg {
    RandomWalk,
    RandomSigns,
    Spike,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariationArgs {
    /// The sequence is a_0, .., a_{2^m}.
    #[arg(long, default_value_t = 6)]
    pub m: u32,
    #[arg(long, value_enum, default_value_t = SequenceArg::RandomWalk)]
    pub sequence: SequenceArg,
    /// Read the sequence from a file of whitespace- or comma-separated reals instead.
    #[arg(long)]
    pub values_file: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "1,2,4,inf")]
    pub rhos: RealList,
    /// Start index of the Rademacher-Menshov window.
    #[arg(long, default_value_t = 0)]
    pub j0: i64,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuasiGeometryArgs {
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value_t = 1)]
    pub q: i128,
    #[arg(long, default_value_t = 0.4)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.6)]
    pub delta_prime: f64,
    #[arg(long, default_value_t = 0)]
    pub w: u32,
    /// Radii of the sweep.
    #[arg(long, default_value = "0.5,1,2,4,8,16")]
    pub r: RealList,
    /// Ball centre as comma-separated reals (default: the identity).
    #[arg(long)]
    pub center: Option<RealList>,
}
