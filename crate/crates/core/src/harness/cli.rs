//! `discount-lab run | sweep | baseline`.
//!
//! A `--config PATH` file holds `key=value` lines using the long flag names (without
//! the leading dashes). File entries are applied first and command-line flags override
//! them. Exit status is 0 on success, 2 for configuration errors and 1 for runtime
//! failures.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::discount::{CustomTable, DiscountFamily, ParamAxis};
use crate::env::ChainParams;
use crate::error::{Error, Result};
use crate::harness::config::{AgentKind, ExperimentConfig, PlannerSettings};
use crate::harness::emit::{self, OutputFormat};
use crate::harness::runner::{run_experiment, sweep, ExperimentResult, SweepPoint};

#[derive(Debug, Parser)]
#[command(
    name = "discount-lab",
    version,
    about = "MCTS agent under generalised discounting on a delayed-reward chain"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one seeded episode.
    #[command(args_override_self = true)]
    Run(CommonArgs),
    /// Run episodes across a grid of values for one discount parameter.
    #[command(args_override_self = true)]
    Sweep(SweepArgs),
    /// Run a scripted baseline policy (fixed-myopic or fixed-farsighted).
    #[command(args_override_self = true)]
    Baseline(CommonArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DiscountKind {
    Geometric,
    Hyperbolic,
    Power,
    Custom,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// key=value file of flag defaults.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = DiscountKind::Geometric)]
    pub discount: DiscountKind,
    /// Geometric factor (default 0.9).
    #[arg(long)]
    pub g: Option<f64>,
    /// Hyperbolic kappa (default 1.8).
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Hyperbolic beta (default 1) or power beta (default 1.01).
    #[arg(long)]
    pub beta: Option<f64>,
    /// Weight table for `--discount custom`: lines of `k,w_k,w_k+1,...`.
    #[arg(long, value_name = "PATH")]
    pub custom_table: Option<PathBuf>,

    #[arg(long)]
    pub env_n: Option<usize>,
    #[arg(long)]
    pub reward_instant: Option<f64>,
    #[arg(long)]
    pub reward_step: Option<f64>,
    #[arg(long)]
    pub reward_large: Option<f64>,

    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long)]
    pub ucb_c: Option<f64>,
    #[arg(long)]
    pub samples: Option<u64>,

    #[arg(long, default_value_t = 200)]
    pub cycles: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum)]
    pub agent: Option<AgentKind>,

    /// Output file; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Defaults to the output file extension, else csv.
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    #[arg(long, default_value_t = 1)]
    pub repeats: usize,
    /// Reduced sample budget (10 000) unless --samples is given.
    #[arg(long)]
    pub fast: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Parameter to vary: g, kappa or beta.
    #[arg(long)]
    pub axis: String,
    /// Comma-separated parameter values.
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    pub values: Vec<f64>,
}

impl CommonArgs {
    pub fn discount_family(&self) -> Result<DiscountFamily<f64>> {
        match self.discount {
            DiscountKind::Geometric => DiscountFamily::geometric(self.g.unwrap_or(0.9)),
            DiscountKind::Hyperbolic => DiscountFamily::hyperbolic(self.kappa.unwrap_or(1.8), self.beta.unwrap_or(1.0)),
            DiscountKind::Power => DiscountFamily::power(self.beta.unwrap_or(1.01)),
            DiscountKind::Custom => {
                let path = self
                    .custom_table
                    .as_ref()
                    .ok_or_else(|| Error::Config("--discount custom requires --custom-table".into()))?;
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                Ok(DiscountFamily::custom(CustomTable::parse(&text)?))
            }
        }
    }

    pub fn experiment_config(&self, default_agent: AgentKind) -> Result<ExperimentConfig> {
        let discount = self.discount_family()?;
        let defaults = ChainParams::<f64>::default();
        let env = ChainParams {
            n: self.env_n.unwrap_or(defaults.n),
            instant: self.reward_instant.unwrap_or(defaults.instant),
            step: self.reward_step.unwrap_or(defaults.step),
            large: self.reward_large.unwrap_or(defaults.large),
        };
        let mut planner = PlannerSettings::for_family(&discount);
        if self.fast {
            planner = planner.fast();
        }
        let planner = PlannerSettings {
            horizon: self.horizon.unwrap_or(planner.horizon),
            ucb_c: self.ucb_c.unwrap_or(planner.ucb_c),
            samples: self.samples.unwrap_or(planner.samples),
        };
        let cfg = ExperimentConfig {
            env,
            discount,
            planner,
            agent: self.agent.unwrap_or(default_agent),
            cycles: self.cycles,
            seed: self.seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn output_format(&self) -> OutputFormat {
        self.format
            .or_else(|| self.out.as_deref().map(OutputFormat::from_path))
            .unwrap_or(OutputFormat::Csv)
    }
}

/// Reads a `key=value` config file into `--key value` arguments.
pub fn config_file_args(text: &str) -> Result<Vec<OsString>> {
    let mut args = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("config line {}: expected key=value", lineno + 1)))?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        let value = value.trim();
        if key == "config" {
            return Err(Error::Config("config files cannot include other config files".into()));
        }
        if key == "fast" {
            match value {
                "true" | "1" | "yes" => args.push(OsString::from("--fast")),
                "false" | "0" | "no" => {}
                other => return Err(Error::Config(format!("fast={other}: expected true or false"))),
            }
            continue;
        }
        args.push(OsString::from(format!("--{key}")));
        args.push(OsString::from(value));
    }
    Ok(args)
}

fn find_config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut iter = args.iter();
    while let Some(arg) = iter.next() {
        let s = arg.to_string_lossy();
        if s == "--config" {
            return iter.next().map(PathBuf::from);
        }
        if let Some(path) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(path));
        }
    }
    None
}

/// Splices config-file arguments in right after the subcommand, ahead of the
/// command-line flags, so that later (command-line) occurrences win.
pub fn expand_args(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(path) = find_config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    let extra = config_file_args(&text)?;
    let split = args.len().min(2);
    let mut out = args[..split].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[split..]);
    Ok(out)
}

fn report(result: &ExperimentResult) {
    eprintln!(
        "total_reward={} final_average={} inconsistencies={}/{} elapsed={:.3}s",
        result.summary.total_reward,
        result.final_average(),
        result.summary.inconsistency_count,
        result.summary.evaluated_cycles,
        result.summary.wall_clock.as_secs_f64()
    );
}

fn write_result(result: &ExperimentResult, format: OutputFormat, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => emit::emit_result(result, format, path),
        None => {
            let stdout = std::io::stdout().lock();
            match format {
                OutputFormat::Csv => emit::write_series_csv(result, stdout),
                OutputFormat::Json => emit::write_json(result, stdout),
            }
        }
    }
}

fn write_points(points: &[SweepPoint], format: OutputFormat, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => emit::emit_sweep(points, format, path),
        None => {
            let stdout = std::io::stdout().lock();
            match format {
                OutputFormat::Csv => emit::write_sweep_csv(points, stdout),
                OutputFormat::Json => emit::write_json(points, stdout),
            }
        }
    }
}

fn single_run(args: &CommonArgs, default_agent: AgentKind, fixed_only: bool) -> Result<()> {
    if args.repeats != 1 {
        return Err(Error::Config("--repeats applies to sweep only".into()));
    }
    let cfg = args.experiment_config(default_agent)?;
    if fixed_only && !cfg.agent.is_fixed() {
        return Err(Error::Config(
            "baseline runs a scripted policy: use --agent fixed-myopic or fixed-farsighted".into(),
        ));
    }
    let result = run_experiment(&cfg)?;
    write_result(&result, args.output_format(), args.out.as_deref())?;
    report(&result);
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Run(args) => single_run(args, AgentKind::Mcts, false),
        Command::Baseline(args) => single_run(args, AgentKind::FixedFarsighted, true),
        Command::Sweep(sw) => {
            let axis: ParamAxis = sw.axis.parse()?;
            let base = sw.common.experiment_config(AgentKind::Mcts)?;
            let points = sweep(&base, axis, &sw.values, sw.common.repeats)?;
            write_points(&points, sw.common.output_format(), sw.common.out.as_deref())?;
            for p in &points {
                eprint!("{}={} repeat={} ", p.axis, p.value, p.repeat);
                report(&p.result);
            }
            Ok(())
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns the
/// process exit status.
pub fn run_cli(args: Vec<OsString>) -> i32 {
    let args = match expand_args(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => {
            let _ = std::io::stdout().flush();
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                2
            } else {
                1
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        let args = args.iter().map(OsString::from).collect();
        Cli::try_parse_from(expand_args(args).unwrap()).unwrap()
    }

    #[test]
    fn power_defaults_follow_its_parameter_row() {
        let Command::Run(args) = parse(&["discount-lab", "run", "--discount", "power"]).command else {
            panic!()
        };
        let cfg = args.experiment_config(AgentKind::Mcts).unwrap();
        assert_eq!(cfg.planner, PlannerSettings::POWER);
        assert_eq!(cfg.discount, DiscountFamily::Power { beta: 1.01 });

        let Command::Run(args) = parse(&["discount-lab", "run", "--discount", "power", "--fast"]).command else {
            panic!()
        };
        assert_eq!(args.experiment_config(AgentKind::Mcts).unwrap().planner.samples, 10_000);
    }

    #[test]
    fn config_file_then_flags_override() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.conf");
        std::fs::write(
            &path,
            "# hyperbolic run\ndiscount=hyperbolic\nkappa=2.4\nseed=9\nfast=true\n",
        )
        .unwrap();
        let p = path.to_str().unwrap();
        let Command::Run(args) = parse(&["discount-lab", "run", "--config", p, "--kappa", "1.2"]).command else {
            panic!()
        };
        let cfg = args.experiment_config(AgentKind::Mcts).unwrap();
        assert_eq!(cfg.discount, DiscountFamily::Hyperbolic { kappa: 1.2, beta: 1.0 });
        assert_eq!(cfg.seed, 9);
        assert!(args.fast);
    }

    #[test]
    fn config_file_rejects_garbage() {
        assert!(config_file_args("no equals sign").is_err());
        assert!(config_file_args("fast=maybe").is_err());
        assert!(config_file_args("config=x").is_err());
        assert_eq!(
            config_file_args("env_n=7").unwrap(),
            vec![OsString::from("--env-n"), OsString::from("7")]
        );
    }

    #[test]
    fn invalid_parameters_are_config_errors() {
        let Command::Run(args) = parse(&["discount-lab", "run", "--g", "1.5"]).command else {
            panic!()
        };
        assert!(args.experiment_config(AgentKind::Mcts).unwrap_err().is_config());
        let Command::Run(args) = parse(&["discount-lab", "run", "--discount", "custom"]).command else {
            panic!()
        };
        assert!(args.experiment_config(AgentKind::Mcts).unwrap_err().is_config());
    }

    #[test]
    fn sweep_values_parse() {
        let Command::Sweep(sw) = parse(&["discount-lab", "sweep", "--axis", "g", "--values", "0.1,0.2,0.3"]).command
        else {
            panic!()
        };
        assert_eq!(sw.values, vec![0.1, 0.2, 0.3]);
        assert_eq!(sw.axis.parse::<ParamAxis>().unwrap(), ParamAxis::G);
    }
}
