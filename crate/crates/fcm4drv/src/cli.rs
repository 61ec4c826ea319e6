//! Command-line interface: flag parsing, the reasoning run, and a hidden
//! subcommand that reproduces the Monte Carlo consistency check.
//!
//! Exit codes: 0 success, 1 configuration or model parse error, 2 runtime
//! error (engine failures, output I/O).

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand};

use crate::activation::{ActivationKind, ActivationSpec};
use crate::aggregate::{AggregatorKind, AggregatorSpec};
use crate::drv::DistanceMetric;
use crate::engine::{self, FcmModel};
use crate::error::FileError;
use crate::format::parse_model;
use crate::oracle::{self, OracleConfig};
use crate::report;

/// A fully validated run request.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model_path: PathBuf,
    pub activation: ActivationSpec,
    pub aggregator: AggregatorSpec,
    pub max_iters: usize,
    pub tol: f64,
    pub metric: DistanceMetric,
    pub output_dir: PathBuf,
    pub percentiles: Vec<f64>,
}

#[derive(Parser)]
#[command(
    name = "fcm4drv",
    about = "Fuzzy cognitive map reasoning over discrete random variables",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct RunArgs {
    /// Model file to load
    #[arg(long)]
    model: Option<PathBuf>,
    /// Activation function: bivalent, trivalent, linear_cutoff, logistic, tanh, s_exp
    #[arg(long, default_value = "s_exp")]
    activation: String,
    /// Slope coefficient for s_exp
    #[arg(long, default_value_t = 1.0)]
    m: f64,
    /// Steepness for logistic
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Aggregator: simple_kmeans, dbscan, unibins, percentile_rank
    #[arg(long, default_value = "percentile_rank")]
    aggregator: String,
    /// Upper bound on support sizes
    #[arg(long, default_value_t = 100)]
    k: usize,
    /// Minimal DBSCAN cluster size
    #[arg(long, default_value_t = 6)]
    minpts: usize,
    /// Iteration limit
    #[arg(long = "max-iters", default_value_t = 25)]
    max_iters: usize,
    /// Convergence tolerance
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    /// Convergence distance: emd or ks
    #[arg(long, default_value = "emd")]
    metric: String,
    /// Comma-separated quantile ranks for the percentile CSV
    #[arg(long, default_value = "0.05,0.25,0.5,0.75,0.95")]
    percentiles: String,
    /// Directory receiving trace.csv, percentiles.csv and summary.txt
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Compare a Monte Carlo trajectory sample against the engine
    #[command(name = "mc-check", hide = true)]
    McCheck(McArgs),
}

#[derive(Args)]
struct McArgs {
    /// Model file to load (weights and clamps must be singletons)
    #[arg(long)]
    model: PathBuf,
    /// Activation function
    #[arg(long, default_value = "s_exp")]
    activation: String,
    #[arg(long, default_value_t = 1.0)]
    m: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Iteration at which distributions are compared
    #[arg(long, default_value_t = 5)]
    iters: usize,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Size bound for the engine's percentile_rank aggregation
    #[arg(long, default_value_t = 200)]
    k: usize,
}

/// Parses a comma-separated rank list; ranks must be strictly increasing
/// and inside the open interval (0, 1).
pub fn parse_percentiles(text: &str) -> Result<Vec<f64>, String> {
    let mut ranks = Vec::new();
    for token in text.split(',') {
        let rank: f64 = token
            .trim()
            .parse()
            .map_err(|_| format!("bad percentile `{}`", token.trim()))?;
        if !(rank > 0.0 && rank < 1.0) {
            return Err(format!("percentile {rank} is outside (0, 1)"));
        }
        if let Some(&last) = ranks.last() {
            if rank <= last {
                return Err(format!("percentiles must be strictly increasing, {rank} after {last}"));
            }
        }
        ranks.push(rank);
    }
    if ranks.is_empty() {
        return Err("at least one percentile is required".into());
    }
    Ok(ranks)
}

fn activation_from(kind: &str, m: f64, lambda: f64) -> Result<ActivationSpec, String> {
    let kind: ActivationKind = kind.parse()?;
    ActivationSpec::with_params(kind, m, lambda).map_err(|e| e.to_string())
}

impl RunArgs {
    fn into_config(self) -> Result<RunConfig, String> {
        let model_path =
            self.model.ok_or_else(|| "the --model argument is required".to_string())?;
        let activation = activation_from(&self.activation, self.m, self.lambda)?;
        let kind: AggregatorKind = self.aggregator.parse()?;
        let aggregator =
            AggregatorSpec::with_params(kind, self.k, self.minpts, 100).map_err(|e| e.to_string())?;
        if self.max_iters == 0 {
            return Err("--max-iters must be at least 1".into());
        }
        if !self.tol.is_finite() || self.tol < 0.0 {
            return Err(format!("--tol must be finite and non-negative, got {}", self.tol));
        }
        let metric: DistanceMetric = self.metric.parse()?;
        let percentiles = parse_percentiles(&self.percentiles)?;
        Ok(RunConfig {
            model_path,
            activation,
            aggregator,
            max_iters: self.max_iters,
            tol: self.tol,
            metric,
            output_dir: self.out,
            percentiles,
        })
    }
}

fn load_model(path: &Path) -> Result<FcmModel, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| FileError { path: path.to_path_buf(), source }.to_string())?;
    parse_model(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn execute_run(config: RunConfig) -> Result<String, (i32, String)> {
    let model = load_model(&config.model_path).map_err(|e| (1, e))?;
    let trace = engine::run(
        &model,
        &config.activation,
        &config.aggregator,
        config.max_iters,
        config.tol,
        config.metric,
    )
    .map_err(|e| (2, e.to_string()))?;

    let dir = &config.output_dir;
    std::fs::create_dir_all(dir)
        .map_err(|source| (2, FileError { path: dir.clone(), source }.to_string()))?;
    report::write_trace_csv(&trace, &model, &dir.join("trace.csv"))
        .map_err(|e| (2, e.to_string()))?;
    report::write_percentile_csv(&trace, &model, &config.percentiles, &dir.join("percentiles.csv"))
        .map_err(|e| (2, e.to_string()))?;
    let summary = report::run_summary(&trace, &model);
    std::fs::write(dir.join("summary.txt"), &summary)
        .map_err(|source| (2, FileError { path: dir.join("summary.txt"), source }.to_string()))?;
    Ok(summary)
}

fn execute_mc_check(args: McArgs) -> Result<String, (i32, String)> {
    let activation =
        activation_from(&args.activation, args.m, args.lambda).map_err(|e| (1, e))?;
    let aggregator = AggregatorSpec::with_params(AggregatorKind::PercentileRank, args.k, 6, 100)
        .map_err(|e| (1, e.to_string()))?;
    if args.iters == 0 {
        return Err((1, "--iters must be at least 1".into()));
    }
    let model = load_model(&args.model).map_err(|e| (1, e))?;

    let trace = engine::run(&model, &activation, &aggregator, args.iters, 0.0, DistanceMetric::Emd)
        .map_err(|e| (2, e.to_string()))?;
    let config = OracleConfig { samples: args.samples, seed: args.seed };
    let sampled = oracle::monte_carlo_run(&model, &activation, args.iters, &config)
        .map_err(|e| (2, e.to_string()))?;

    let mut out = String::new();
    let engine_state = &trace.states[args.iters];
    for (i, name) in model.concepts().iter().enumerate() {
        let empirical = oracle::empirical_drv(&sampled[i]).map_err(|e| (2, e.to_string()))?;
        let emd = empirical.emd_distance(&engine_state[i]);
        out.push_str(&format!("{name} {emd:?}\n"));
    }
    Ok(out)
}

/// Entry point used by the binary; returns the process exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };

    let result = match cli.command {
        Some(Command::McCheck(args)) => execute_mc_check(args),
        None => match cli.run.into_config() {
            Ok(config) => execute_run(config),
            Err(message) => {
                eprintln!("error: {message}");
                eprintln!("{}", Cli::command().render_usage());
                return 1;
            }
        },
    };

    match result {
        Ok(output) => {
            print!("{output}");
            0
        }
        Err((code, message)) => {
            eprintln!("error: {message}");
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentile_lists_are_validated() {
        assert_eq!(parse_percentiles("0.05,0.5,0.95").unwrap(), vec![0.05, 0.5, 0.95]);
        assert!(parse_percentiles("0.5,0.25").is_err());
        assert!(parse_percentiles("0,0.5").is_err());
        assert!(parse_percentiles("0.5,1").is_err());
        assert!(parse_percentiles("0.5,oops").is_err());
        assert!(parse_percentiles("").is_err());
    }

    fn config_from(args: &[&str]) -> Result<RunConfig, String> {
        let mut full = vec!["fcm4drv"];
        full.extend_from_slice(args);
        let cli = Cli::try_parse_from(full).map_err(|e| e.to_string())?;
        cli.run.into_config()
    }

    #[test]
    fn defaults_follow_the_reference_protocol() {
        let config = config_from(&["--model", "m.fcm"]).unwrap();
        assert_eq!(config.activation.kind, ActivationKind::SExp);
        assert_eq!(config.aggregator.kind, AggregatorKind::PercentileRank);
        assert_eq!(config.aggregator.k, 100);
        assert_eq!(config.aggregator.minpts, 6);
        assert_eq!(config.max_iters, 25);
        assert_eq!(config.tol, 1e-4);
        assert_eq!(config.metric, DistanceMetric::Emd);
        assert_eq!(config.percentiles, vec![0.05, 0.25, 0.5, 0.75, 0.95]);
    }

    #[test]
    fn bad_configuration_is_rejected() {
        assert!(config_from(&[]).unwrap_err().contains("--model"));
        assert!(config_from(&["--model", "m.fcm", "--k", "1"]).is_err());
        assert!(config_from(&["--model", "m.fcm", "--activation", "relu"]).is_err());
        assert!(config_from(&["--model", "m.fcm", "--aggregator", "sketch"]).is_err());
        assert!(config_from(&["--model", "m.fcm", "--max-iters", "0"]).is_err());
        assert!(config_from(&["--model", "m.fcm", "--metric", "l2"]).is_err());
        assert!(config_from(&["--model", "m.fcm", "--m", "-1"]).is_err());
        assert!(config_from(&["--model", "m.fcm", "--tol", "-0.5"]).is_err());
    }
}
