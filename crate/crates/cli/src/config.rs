//! Run configuration: clap flags, an optional `key = value` file spliced in
//! ahead of them, and the provenance record embedded in every JSON report.

use anyhow::{bail, Context};
use bergman_core::spaces::{Domain, SWeight, WeightForm};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::{Path, PathBuf};

pub const SCHEMA: &str = "1";
pub const THREADS_ENV: &str = "BERGMAN_LAB_THREADS";

/// A malformed invocation; exits with status 64.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Parser, Debug)]
#[command(name = "bergman-lab", version, about = "Experiments on weighted harmonic Bergman spaces")]
#[command(args_override_self = true)]
pub struct Cli {
    /// Plain-text `key = value` file; command-line flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Run lemma and representation-formula suites.
    Verify(VerifyArgs),
    /// Level-set distance experiment for one gallery function.
    Distance(DistanceArgs),
    /// Tabulate norms over the function gallery.
    Norms(NormsArgs),
    /// Whitney decomposition with its property checks.
    Whitney(WhitneyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainArg {
    Ball,
    Halfspace,
}

impl From<DomainArg> for Domain {
    fn from(d: DomainArg) -> Domain {
        match d {
            DomainArg::Ball => Domain::Ball,
            DomainArg::Halfspace => Domain::HalfSpace,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Lemma {
    Rro,
    Qbeta,
    Qm,
    Kernel,
    Sphere,
    Poisson,
    Representation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SuiteSet {
    All,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct OutputArgs {
    /// Directory for report files.
    #[arg(long, default_value = "reports")]
    pub out: PathBuf,
    /// File stem; defaults to the command name.
    #[arg(long)]
    pub tag: Option<String>,
    /// Seed for every sampled quantity.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl OutputArgs {
    pub fn path(&self, command: &str, suffix: &str) -> PathBuf {
        let stem = self.tag.as_deref().unwrap_or(command);
        self.out.join(format!("{stem}{suffix}"))
    }
}

/// Overrides of the verification grid.
#[derive(Args, Debug, Clone, Default, Serialize)]
pub struct GridArgs {
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long)]
    pub extra_levels: Option<usize>,
    #[arg(long)]
    pub sphere_degree: Option<usize>,
    #[arg(long)]
    pub azimuth_degree: Option<usize>,
    #[arg(long)]
    pub half_depth: Option<i32>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum, conflicts_with = "suite", required_unless_present = "suite")]
    pub lemma: Option<Lemma>,
    #[arg(long, value_enum)]
    pub suite: Option<SuiteSet>,
    /// Dimension: ball `n`, or boundary dimension on the half-space.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_enum, default_value = "ball")]
    pub domain: DomainArg,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub m: Option<u32>,
    /// Exponent of the sphere power law.
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub rho: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub r: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub t: Vec<f64>,
    /// Halton samples for pointwise kernel sups.
    #[arg(long, default_value_t = 4096)]
    pub samples: usize,
    /// Gallery function for the representation suite.
    #[arg(long = "f", alias = "function")]
    pub function: Option<String>,
    #[arg(long)]
    pub p: Option<f64>,
    /// S-class weight `power:a` or `logpower:a:b`.
    #[arg(long)]
    pub weight: Option<String>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct DistanceArgs {
    #[arg(long, value_enum, default_value = "ball")]
    pub domain: DomainArg,
    #[arg(long = "f", alias = "function")]
    pub function: String,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    /// Mixed target exponent; requires `--mixed`.
    #[arg(long, requires = "mixed")]
    pub q: Option<f64>,
    #[arg(long, value_enum, requires = "q")]
    pub mixed: Option<MixedArg>,
    /// Ball kernel sweep.
    #[arg(long, value_delimiter = ',')]
    pub beta: Vec<f64>,
    /// Half-space kernel sweep.
    #[arg(long, value_delimiter = ',')]
    pub m: Vec<u32>,
    /// Absolute `ε` grid; defaults to fractions of the weighted sup.
    #[arg(long, value_delimiter = ',')]
    pub eps: Vec<f64>,
    /// Monte-Carlo samples for the inner-integral cross-check.
    #[arg(long, default_value_t = 0)]
    pub mc_samples: usize,
    /// Refine the distance grid this many times.
    #[arg(long, default_value_t = 0)]
    pub refine: usize,
    /// Also write one two-column gnuplot file per profile.
    #[arg(long)]
    pub gnuplot: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum MixedArg {
    #[value(name = "B")]
    B,
    #[value(name = "F")]
    F,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct NormsArgs {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0,1")]
    pub alpha: Vec<f64>,
    /// Add mixed-norm columns `B^{p,q}_α` and `F^{p,q}_α`.
    #[arg(long)]
    pub q: Option<f64>,
    /// Add a weighted column; `power:a` or `logpower:a:b`.
    #[arg(long)]
    pub weight: Option<String>,
    /// Add `A^∞_t` columns, weight `(1−|x|)^t` or `s^t`.
    #[arg(long, value_delimiter = ',')]
    pub ainf: Vec<f64>,
    /// Gallery subset; defaults to the whole gallery.
    #[arg(long = "f", alias = "function", value_delimiter = ',')]
    pub functions: Vec<String>,
    /// Refine the norm grids this many times.
    #[arg(long, default_value_t = 0)]
    pub refine: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    /// `[0, 1)^n × [2^{−L}, 1)`.
    Halfplane,
    /// Box from `--lo`, `--hi`, `--s-lo`, `--s-hi`.
    Box,
    /// Ball annuli `1..=L`.
    Ball,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct WhitneyArgs {
    #[arg(long, value_enum, default_value = "halfplane")]
    pub region: Region,
    /// Lateral dimension (half-space) or ball dimension.
    #[arg(long)]
    pub n: Option<usize>,
    /// Depth `L`.
    #[arg(long, default_value_t = 4)]
    pub levels: u32,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub lo: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub hi: Vec<f64>,
    #[arg(long)]
    pub s_lo: Option<f64>,
    #[arg(long)]
    pub s_hi: Option<f64>,
    /// Sample points for the cover check.
    #[arg(long, default_value_t = 20_000)]
    pub cover_samples: usize,
    /// Gallery function for the discrete-vs-integral comparison.
    #[arg(long = "f", alias = "function")]
    pub function: Option<String>,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Boundary-distance exponent in the comparison.
    #[arg(long, default_value_t = 0.0)]
    pub w: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Provenance block embedded in every JSON report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub schema: &'static str,
    pub version: &'static str,
    pub config_file: Option<PathBuf>,
    pub threads: Option<usize>,
    pub parallel: bool,
    #[serde(flatten)]
    pub command: Command,
}

/// Parse `key = value` lines into `--key=value` tokens. Blank lines and `#`
/// comments are skipped; underscores in keys become dashes.
pub fn file_tokens(text: &str, path: &Path) -> anyhow::Result<Vec<String>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!(UsageError(format!("{}:{}: expected key = value", path.display(), i + 1)));
        };
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key.is_empty() || key == "config" {
            bail!(UsageError(format!("{}:{}: invalid key '{key}'", path.display(), i + 1)));
        }
        match value {
            "true" => out.push(format!("--{key}")),
            "false" => {}
            v => out.push(format!("--{key}={v}")),
        }
    }
    Ok(out)
}

/// Locate `--config` in raw arguments.
fn config_path(args: &[String]) -> Option<PathBuf> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(v) = a.strip_prefix("--config=") {
            return Some(PathBuf::from(v));
        }
    }
    None
}

/// Splice file settings directly after the subcommand so that later flags
/// override them.
pub fn expand_args(args: Vec<String>) -> anyhow::Result<Vec<String>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path)
        .with_context(|| format!("reading config file {}", path.display()))
        .map_err(|e| usage(format!("{e:#}")))?;
    let tokens = file_tokens(&text, &path)?;
    let sub = args
        .iter()
        .skip(1)
        .position(|a| ["verify", "distance", "norms", "whitney"].contains(&a.as_str()))
        .map(|i| i + 2)
        .unwrap_or(args.len());
    let mut out = args[..sub].to_vec();
    out.extend(tokens);
    out.extend_from_slice(&args[sub..]);
    Ok(out)
}

/// `BERGMAN_LAB_THREADS`, if set.
pub fn threads_from_env() -> anyhow::Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(t) if t > 0 => Ok(Some(t)),
            _ => Err(usage(format!("{THREADS_ENV} = '{v}' must be a positive integer"))),
        },
        Err(_) => Ok(None),
    }
}

/// `power:a` or `logpower:a:b`, with `q_v = 1/2`.
pub fn parse_weight(text: &str, domain: Domain) -> anyhow::Result<SWeight> {
    let parts: Vec<&str> = text.split(':').collect();
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| usage(format!("weight '{text}': '{s}' is not a number")))
    };
    let form = match parts.as_slice() {
        ["power", a] => WeightForm::Power { a: num(a)? },
        ["logpower", a, b] => WeightForm::LogPower { a: num(a)?, b: num(b)? },
        _ => return Err(usage(format!("weight '{text}': expected power:a or logpower:a:b"))),
    };
    Ok(SWeight::new(form, domain, 0.5)?)
}
