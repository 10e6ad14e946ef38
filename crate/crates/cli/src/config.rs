//! Command-line flags, the `key = value` config file, and their resolution
//! into a [`RunConfig`].

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{CommandFactory, Parser, ValueEnum};
use sepqr_core::linear_sampler::{BetaPrior, CovarianceUpdate, PriorHyper, SamplerSettings};
use sepqr_core::simulation::CurveNoise;

use crate::error::{usage, CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    FitLinear,
    FitGam,
    Simulate,
    Summarize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    Mixture,
    Sim1,
    Sim2,
    Sim3,
    Wave,
    Doppler,
}

impl Experiment {
    pub fn as_str(&self) -> &'static str {
        match self {
            Experiment::Mixture => "mixture",
            Experiment::Sim1 => "sim1",
            Experiment::Sim2 => "sim2",
            Experiment::Sim3 => "sim3",
            Experiment::Wave => "wave",
            Experiment::Doppler => "doppler",
        }
    }
}

/// One smooth term, written `column:knots[:degree[:delta]]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmoothSpec {
    pub column: String,
    pub knots: usize,
    pub degree: usize,
    pub delta: usize,
}

impl FromStr for SmoothSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let num = |i: usize, default: usize, what: &str| -> Result<usize, String> {
            match parts.get(i) {
                None => Ok(default),
                Some(v) => v
                    .parse()
                    .map_err(|_| format!("smooth term `{s}`: {what} `{v}` is not a nonnegative integer")),
            }
        };
        if parts.len() < 2 || parts.len() > 4 || parts[0].is_empty() {
            return Err(format!("smooth term `{s}` must be column:knots[:degree[:delta]]"));
        }
        Ok(SmoothSpec {
            column: parts[0].to_string(),
            knots: num(1, 0, "knots")?,
            degree: num(2, 3, "degree")?,
            delta: num(3, 2, "delta")?,
        })
    }
}

/// Raw flags. Every field is optional so that a config file can fill gaps.
#[derive(Debug, Clone, Default, Parser)]
#[command(name = "sepqr", version, about = "Bayesian quantile regression with the skew exponential power likelihood")]
pub struct Args {
    /// fit-linear, fit-gam, simulate or summarize.
    #[arg(value_enum)]
    pub command: Option<Command>,

    /// Line-oriented `key = value` file; flags given on the command line win.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Input CSV (fit commands) or draws CSV (summarize).
    #[arg(long)]
    pub input: Option<PathBuf>,

    #[arg(long)]
    pub response: Option<String>,

    /// Comma-separated covariate columns.
    #[arg(long, value_delimiter = ',')]
    pub covariates: Vec<String>,

    /// Add an intercept column (default true).
    #[arg(long)]
    pub intercept: Option<bool>,

    /// Smooth terms `column:knots[:degree[:delta]]`, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub smooth: Vec<SmoothSpec>,

    /// Comma-separated quantile levels.
    #[arg(long, value_delimiter = ',')]
    pub tau: Vec<f64>,

    #[arg(long)]
    pub iterations: Option<usize>,

    #[arg(long)]
    pub burn_in: Option<usize>,

    #[arg(long)]
    pub seed: Option<u64>,

    #[arg(long)]
    pub psi: Option<f64>,
    #[arg(long)]
    pub varpi: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub d: Option<f64>,
    #[arg(long)]
    pub a_h: Option<f64>,
    #[arg(long)]
    pub b_h: Option<f64>,

    /// Gaussian prior variance for the coefficients instead of the lasso prior.
    #[arg(long)]
    pub beta_variance: Option<f64>,

    /// Adaptation constant of the proposal covariances.
    #[arg(long)]
    pub adapt_c: Option<f64>,

    /// accumulate or robbins-monro.
    #[arg(long)]
    pub covariance_update: Option<CovarianceUpdate>,

    /// Fix alpha instead of sampling it (1 gives the asymmetric Laplace fit).
    #[arg(long)]
    pub fixed_alpha: Option<f64>,

    #[arg(long)]
    pub output: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub experiment: Option<Experiment>,

    /// gaussian or student_t; the curves also take linear_het and quad_het.
    #[arg(long)]
    pub noise: Option<CurveNoise>,

    /// Replicates (datasets for the mixture experiment).
    #[arg(long)]
    pub replicates: Option<usize>,
}

impl Args {
    /// Fills every unset field from `base`.
    pub fn or(self, base: Args) -> Args {
        fn list<T>(a: Vec<T>, b: Vec<T>) -> Vec<T> {
            if a.is_empty() {
                b
            } else {
                a
            }
        }
        Args {
            command: self.command.or(base.command),
            config: self.config.or(base.config),
            input: self.input.or(base.input),
            response: self.response.or(base.response),
            covariates: list(self.covariates, base.covariates),
            intercept: self.intercept.or(base.intercept),
            smooth: list(self.smooth, base.smooth),
            tau: list(self.tau, base.tau),
            iterations: self.iterations.or(base.iterations),
            burn_in: self.burn_in.or(base.burn_in),
            seed: self.seed.or(base.seed),
            psi: self.psi.or(base.psi),
            varpi: self.varpi.or(base.varpi),
            a: self.a.or(base.a),
            b: self.b.or(base.b),
            c: self.c.or(base.c),
            d: self.d.or(base.d),
            a_h: self.a_h.or(base.a_h),
            b_h: self.b_h.or(base.b_h),
            beta_variance: self.beta_variance.or(base.beta_variance),
            adapt_c: self.adapt_c.or(base.adapt_c),
            covariance_update: self.covariance_update.or(base.covariance_update),
            fixed_alpha: self.fixed_alpha.or(base.fixed_alpha),
            output: self.output.or(base.output),
            experiment: self.experiment.or(base.experiment),
            noise: self.noise.or(base.noise),
            replicates: self.replicates.or(base.replicates),
        }
    }

    /// Command-line flags merged over the config file they name, if any.
    pub fn with_config_file(self) -> CliResult<Args> {
        match &self.config {
            None => Ok(self),
            Some(path) => {
                let base = parse_config_file(path)?;
                Ok(self.or(base))
            }
        }
    }
}

/// Parses a config file by handing its entries to the flag parser.
pub fn parse_config_file(path: &Path) -> CliResult<Args> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config_str(&text).map_err(|e| match e {
        CliError::Usage(msg) => CliError::Usage(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_config_str(text: &str) -> CliResult<Args> {
    let cmd = Args::command();
    let known: HashSet<String> = cmd
        .get_arguments()
        .filter_map(|a| a.get_long().map(str::to_string))
        .filter(|l| l != "config" && l != "help" && l != "version")
        .collect();

    let mut seen = HashSet::new();
    let mut positional = Vec::new();
    let mut tokens = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return usage(format!("line {}: expected `key = value`, found `{line}`", k + 1));
        };
        let key = key.trim().replace('_', "-");
        let value = value.split(',').map(str::trim).collect::<Vec<_>>().join(",");
        if !seen.insert(key.clone()) {
            return usage(format!("line {}: key `{key}` given twice", k + 1));
        }
        if key == "command" {
            positional.push(value);
        } else if known.contains(&key) {
            tokens.push(format!("--{key}={value}"));
        } else {
            return usage(format!("line {}: unknown key `{key}`", k + 1));
        }
    }
    let argv = std::iter::once("sepqr".to_string()).chain(positional).chain(tokens);
    Args::try_parse_from(argv).map_err(|e| CliError::Usage(e.render().to_string().trim().to_string()))
}

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub input: Option<PathBuf>,
    pub response: Option<String>,
    pub covariates: Vec<String>,
    pub intercept: bool,
    pub smooth: Vec<SmoothSpec>,
    pub taus: Vec<f64>,
    pub prior: PriorHyper,
    pub sampler: SamplerSettings,
    pub output: Option<PathBuf>,
    pub experiment: Option<Experiment>,
    pub noise: Option<CurveNoise>,
    pub replicates: Option<usize>,
}

impl RunConfig {
    pub fn resolve(args: Args) -> CliResult<RunConfig> {
        let Some(command) = args.command else {
            return usage("no command given; expected fit-linear, fit-gam, simulate or summarize");
        };
        let (default_taus, default_n, default_m): (&[f64], usize, usize) = match (command, args.experiment) {
            (Command::Simulate, Some(Experiment::Mixture)) => (&[0.1, 0.5, 0.9], 50_000, 10_000),
            (Command::Simulate, Some(Experiment::Sim1 | Experiment::Sim2 | Experiment::Sim3)) => {
                (&[0.1, 0.5, 0.9], 20_000, 5_000)
            }
            (Command::Simulate, _) => (&[0.5], 10_000, 5_000),
            _ => (&[0.5], 50_000, 10_000),
        };
        let taus = if args.tau.is_empty() { default_taus.to_vec() } else { args.tau };
        if let Some(t) = taus.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
            return usage(format!("tau must lie in (0, 1), got {t}"));
        }

        let defaults = PriorHyper::default();
        let prior = PriorHyper {
            psi: args.psi.unwrap_or(defaults.psi),
            varpi: args.varpi.unwrap_or(defaults.varpi),
            a: args.a.unwrap_or(defaults.a),
            b: args.b.unwrap_or(defaults.b),
            c: args.c.unwrap_or(defaults.c),
            d: args.d.unwrap_or(defaults.d),
            a_h: args.a_h.unwrap_or(defaults.a_h),
            b_h: args.b_h.unwrap_or(defaults.b_h),
            beta: args
                .beta_variance
                .map_or(BetaPrior::Lasso, |variance| BetaPrior::Gaussian { variance }),
        };
        prior.validate().map_err(|e| CliError::Usage(e.to_string()))?;

        let base = SamplerSettings::default();
        let sampler = SamplerSettings {
            iterations: args.iterations.unwrap_or(default_n),
            burn_in: args.burn_in.unwrap_or(default_m),
            seed: args.seed.unwrap_or(base.seed),
            adapt_c: args.adapt_c.unwrap_or(base.adapt_c),
            fixed_alpha: args.fixed_alpha,
            covariance_update: args.covariance_update.unwrap_or(base.covariance_update),
        };
        sampler.validate().map_err(|e| CliError::Usage(e.to_string()))?;

        let cfg = RunConfig {
            command,
            input: args.input,
            response: args.response,
            covariates: args.covariates,
            intercept: args.intercept.unwrap_or(true),
            smooth: args.smooth,
            taus,
            prior,
            sampler,
            output: args.output,
            experiment: args.experiment,
            noise: args.noise,
            replicates: args.replicates,
        };
        cfg.check_required()?;
        Ok(cfg)
    }

    fn check_required(&self) -> CliResult<()> {
        let name = self.command.to_possible_value().expect("no skipped variants");
        let name = name.get_name();
        let need = |ok: bool, what: &str| if ok { Ok(()) } else { usage(format!("{name} needs {what}")) };
        match self.command {
            Command::FitLinear | Command::FitGam => {
                need(self.input.is_some(), "--input")?;
                need(self.response.is_some(), "--response")?;
                need(self.output.is_some(), "--output")?;
                if self.command == Command::FitGam {
                    need(!self.smooth.is_empty(), "at least one --smooth term")?;
                } else {
                    need(self.smooth.is_empty(), "no --smooth terms (use fit-gam)")?;
                    need(self.intercept || !self.covariates.is_empty(), "an intercept or covariates")?;
                }
            }
            Command::Simulate => {
                need(self.experiment.is_some(), "--experiment")?;
                need(self.output.is_some(), "--output")?;
                if self.replicates == Some(0) {
                    return usage("--replicates must be positive");
                }
            }
            Command::Summarize => need(self.input.is_some(), "--input")?,
        }
        Ok(())
    }
}
