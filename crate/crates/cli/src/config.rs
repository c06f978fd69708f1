//! Command-line flags, the `--config` JSON file, and their merge into a
//! [`RunConfig`]. Flags win over the file.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

pub const DEFAULT_GRID_N: usize = 4096;
pub const MIN_GRID_N: usize = 16;

#[derive(Debug, Parser)]
#[command(name = "fraccalc", version, about = "Fractional integrals and derivatives on an interval")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Compute,
    Sweep,
    Verify,
    Ipp,
    Report,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply one operator to a function and tabulate it on the grid.
    Compute(Flags),
    /// Run a limit experiment (s → 0, s → 1 or ε → 0).
    Sweep(Flags),
    /// Run the acceptance criteria and print a pass/fail table.
    Verify(Flags),
    /// Both sides of the fractional integration-by-parts identity.
    Ipp(Flags),
    /// Embedding ratios over the corpus and Weierstrass derivative bounds.
    Report(Flags),
}

impl Command {
    pub fn split(self) -> (CommandKind, Flags) {
        match self {
            Command::Compute(f) => (CommandKind::Compute, f),
            Command::Sweep(f) => (CommandKind::Sweep, f),
            Command::Verify(f) => (CommandKind::Verify, f),
            Command::Ipp(f) => (CommandKind::Ipp, f),
            Command::Report(f) => (CommandKind::Report, f),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Operator {
    RlInt,
    RlDer,
    Marchaud,
    Caputo,
    RlIntRight,
    RlDerRight,
    MarchaudRight,
    CaputoRight,
}

impl Operator {
    pub fn name(self) -> &'static str {
        match self {
            Operator::RlInt => "rl-int",
            Operator::RlDer => "rl-der",
            Operator::Marchaud => "marchaud",
            Operator::Caputo => "caputo",
            Operator::RlIntRight => "rl-int-right",
            Operator::RlDerRight => "rl-der-right",
            Operator::MarchaudRight => "marchaud-right",
            Operator::CaputoRight => "caputo-right",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    SToZero,
    SToOne,
    MarchaudEps,
}

impl SweepKind {
    pub fn name(self) -> &'static str {
        match self {
            SweepKind::SToZero => "s-to-zero",
            SweepKind::SToOne => "s-to-one",
            SweepKind::MarchaudEps => "marchaud-eps",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Svg,
    Json,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// JSON file with any of the options below; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Corpus function ("power:1.5", "heaviside:0.25", "cantor:12",
    /// "weierstrass:2:20", "log-reciprocal", ...) or a JSON SBV document.
    #[arg(long = "fn", value_name = "SPEC")]
    pub function: Option<String>,
    /// Second function (ipp: the `v` in ∫ D^s u · v).
    #[arg(long = "with", value_name = "SPEC")]
    pub with: Option<String>,
    #[arg(long = "op", value_enum)]
    pub operator: Option<Operator>,
    /// Order, or a comma-separated list of orders.
    #[arg(long, value_name = "S[,S...]")]
    pub s: Option<String>,
    /// Number of grid cells.
    #[arg(long)]
    pub grid_n: Option<usize>,
    /// Interval as "a,b".
    #[arg(long, value_name = "A,B", allow_hyphen_values = true)]
    pub interval: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    /// Marchaud truncation, or a decreasing list for the ε sweep.
    #[arg(long, value_name = "EPS[,EPS...]")]
    pub eps: Option<String>,
    #[arg(long, value_enum)]
    pub kind: Option<SweepKind>,
    /// Run only the criterion with this key or number.
    #[arg(long)]
    pub only: Option<String>,
    /// Output file (standard output when omitted).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Output format; inferred from the output extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(untagged)]
enum NumberOrList {
    One(f64),
    Many(Vec<f64>),
    Text(String),
    #[default]
    Empty,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(alias = "fn")]
    function_spec: Option<String>,
    with: Option<String>,
    #[serde(alias = "op")]
    operator: Option<Operator>,
    s: Option<NumberOrList>,
    grid_n: Option<usize>,
    interval: Option<[f64; 2]>,
    eps: Option<NumberOrList>,
    kind: Option<SweepKind>,
    only: Option<String>,
    output: Option<PathBuf>,
    format: Option<Format>,
}

/// Fully resolved options for one command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub function_spec: Option<String>,
    pub with: Option<String>,
    pub operator: Option<Operator>,
    pub s: Vec<f64>,
    pub grid_n: usize,
    pub interval: (f64, f64),
    pub eps: Vec<f64>,
    pub kind: Option<SweepKind>,
    pub only: Option<String>,
    pub output: Option<PathBuf>,
    pub format: Format,
}

pub fn parse_list(text: &str, what: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::invalid(format!("bad {what} value '{t}'")))
        })
        .collect()
}

fn list_value(v: NumberOrList, what: &str) -> CliResult<Vec<f64>> {
    match v {
        NumberOrList::One(x) => Ok(vec![x]),
        NumberOrList::Many(xs) => Ok(xs),
        NumberOrList::Text(t) => parse_list(&t, what),
        NumberOrList::Empty => Ok(Vec::new()),
    }
}

fn read_config(path: &Path) -> CliResult<ConfigFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::invalid(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::invalid(format!("config {}: {e}", path.display())))
}

fn infer_format(output: Option<&Path>) -> Format {
    match output.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("svg") => Format::Svg,
        Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
        _ => Format::Csv,
    }
}

impl RunConfig {
    pub fn resolve(command: CommandKind, flags: Flags) -> CliResult<RunConfig> {
        let file = match &flags.config {
            Some(p) => read_config(p)?,
            None => ConfigFile::default(),
        };
        let s = match flags.s {
            Some(t) => parse_list(&t, "s")?,
            None => list_value(file.s.unwrap_or_default(), "s")?,
        };
        let eps = match flags.eps {
            Some(t) => parse_list(&t, "eps")?,
            None => list_value(file.eps.unwrap_or_default(), "eps")?,
        };
        let (mut a, mut b) = match (&flags.interval, file.interval) {
            (Some(t), _) => match parse_list(t, "interval")?.as_slice() {
                [a, b] => (*a, *b),
                _ => return Err(CliError::invalid(format!("interval must be 'a,b', got '{t}'"))),
            },
            (None, Some([a, b])) => (a, b),
            (None, None) => (0.0, 1.0),
        };
        a = flags.a.unwrap_or(a);
        b = flags.b.unwrap_or(b);
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(CliError::invalid(format!("interval needs finite a < b, got [{a}, {b}]")));
        }
        let grid_n = flags.grid_n.or(file.grid_n).unwrap_or(DEFAULT_GRID_N);
        if grid_n < MIN_GRID_N {
            return Err(CliError::invalid(format!("grid-n must be at least {MIN_GRID_N}, got {grid_n}")));
        }
        let output = flags.output.or(file.output);
        let format = flags.format.or(file.format).unwrap_or_else(|| infer_format(output.as_deref()));
        Ok(RunConfig {
            command,
            function_spec: flags.function.or(file.function_spec),
            with: flags.with.or(file.with),
            operator: flags.operator.or(file.operator),
            s,
            grid_n,
            interval: (a, b),
            eps,
            kind: flags.kind.or(file.kind),
            only: flags.only.or(file.only),
            output,
            format,
        })
    }

    pub fn require_function(&self) -> CliResult<&str> {
        self.function_spec.as_deref().ok_or_else(|| CliError::invalid("missing --fn"))
    }

    /// The single order `s`, or `default` when none was given.
    pub fn single_s(&self, default: Option<f64>) -> CliResult<f64> {
        match (self.s.as_slice(), default) {
            ([s], _) => Ok(*s),
            ([], Some(d)) => Ok(d),
            ([], None) => Err(CliError::invalid("missing --s")),
            _ => Err(CliError::invalid("this command takes a single --s value")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn flags(args: &[&str]) -> (CommandKind, Flags) {
        let mut argv = vec!["fraccalc"];
        argv.extend_from_slice(args);
        Cli::try_parse_from(argv).unwrap().command.split()
    }

    #[test]
    fn defaults() {
        let (k, f) = flags(&["compute", "--fn", "power:1", "--s", "0.5", "--op", "rl-der"]);
        let cfg = RunConfig::resolve(k, f).unwrap();
        assert_eq!(cfg.grid_n, DEFAULT_GRID_N);
        assert_eq!(cfg.interval, (0.0, 1.0));
        assert_eq!(cfg.format, Format::Csv);
        assert_eq!(cfg.s, vec![0.5]);
        assert_eq!(cfg.operator, Some(Operator::RlDer));
    }

    #[test]
    fn lists_and_interval() {
        let (k, f) = flags(&["sweep", "--s", "0.5, 0.9,0.99", "--interval", "-1,2", "--b", "3", "-o", "x.svg"]);
        let cfg = RunConfig::resolve(k, f).unwrap();
        assert_eq!(cfg.s, vec![0.5, 0.9, 0.99]);
        assert_eq!(cfg.interval, (-1.0, 3.0));
        assert_eq!(cfg.format, Format::Svg);
    }

    #[test]
    fn rejects_small_grids_and_bad_numbers() {
        let (k, f) = flags(&["compute", "--grid-n", "8"]);
        assert_eq!(RunConfig::resolve(k, f).unwrap_err().exit_code(), 2);
        let (k, f) = flags(&["compute", "--s", "0.5,x"]);
        assert_eq!(RunConfig::resolve(k, f).unwrap_err().exit_code(), 2);
        let (k, f) = flags(&["compute", "--interval", "1,0"]);
        assert!(RunConfig::resolve(k, f).is_err());
    }

    #[test]
    fn flags_override_config_file() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        write!(file, r#"{{"fn": "power:2", "s": [0.3, 0.4], "grid_n": 64, "op": "caputo", "format": "json"}}"#)
            .unwrap();
        let path = file.path().to_str().unwrap();
        let (k, f) = flags(&["compute", "--config", path, "--s", "0.7"]);
        let cfg = RunConfig::resolve(k, f).unwrap();
        assert_eq!(cfg.function_spec.as_deref(), Some("power:2"));
        assert_eq!(cfg.s, vec![0.7]);
        assert_eq!(cfg.grid_n, 64);
        assert_eq!(cfg.operator, Some(Operator::Caputo));
        assert_eq!(cfg.format, Format::Json);
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        write!(file, r#"{{"grid": 64}}"#).unwrap();
        let (k, f) = flags(&["compute", "--config", file.path().to_str().unwrap()]);
        assert_eq!(RunConfig::resolve(k, f).unwrap_err().exit_code(), 2);
    }
}
