//! Execution of a resolved [`RunConfig`].

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rayon::prelude::*;
use sepqr_core::diagnostics::{summarize, summarize_column, ParameterSummary, PosteriorDraws, HPD_LEVEL};
use sepqr_core::gam::{run_gam_sampler, GamModelSpec, SmoothTerm};
use sepqr_core::linear_sampler::{run_linear_sampler, LinearModelSpec};
use sepqr_core::simulation::{
    median_by_method, run_curve_experiment, run_mixture_experiment, run_regression_experiment, Curve, CurveNoise,
    CurveSimSpec, ErrorKind, Method, MixtureSpec, NoiseScale, RegressionSimSpec,
};

use crate::config::{Command, Experiment, RunConfig};
use crate::data::{fmt_f64, load_csv, read_draws, summary_rows, tau_tag, write_draws, write_summary, write_table};
use crate::error::{usage, CliError, CliResult};

/// Files written so far; removed again if the run fails.
#[derive(Debug, Default)]
struct Outputs {
    written: Vec<PathBuf>,
}

impl Outputs {
    fn write(&mut self, path: PathBuf, f: impl FnOnce(&Path) -> CliResult<()>) -> CliResult<()> {
        self.written.push(path.clone());
        f(&path)
    }

    fn discard(self) {
        for p in self.written {
            let _ = fs::remove_file(p);
        }
    }
}

/// Runs one command and returns the files it wrote. On failure nothing it
/// wrote is left behind.
pub fn run(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    if let Some(dir) = &cfg.output {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let mut out = Outputs::default();
    let result = match cfg.command {
        Command::FitLinear | Command::FitGam => fit(cfg, &mut out),
        Command::Simulate => simulate(cfg, &mut out),
        Command::Summarize => summarize_file(cfg, &mut out),
    };
    match result {
        Ok(()) => Ok(out.written),
        Err(e) => {
            out.discard();
            Err(e)
        }
    }
}

fn output_dir(cfg: &RunConfig) -> &Path {
    cfg.output.as_deref().expect("checked when resolving")
}

fn data_err(e: sepqr_core::Error) -> CliError {
    CliError::Data(e.to_string())
}

/// The model for one quantile level; construction problems are data errors.
enum Model {
    Linear(LinearModelSpec),
    Gam(GamModelSpec),
}

impl Model {
    fn run(&self) -> CliResult<PosteriorDraws> {
        Ok(match self {
            Model::Linear(s) => run_linear_sampler(s)?,
            Model::Gam(s) => run_gam_sampler(s)?,
        })
    }
}

fn build_models(cfg: &RunConfig) -> CliResult<Vec<Model>> {
    let smooth_cols: Vec<String> = cfg.smooth.iter().map(|s| s.column.clone()).collect();
    let response = cfg.response.as_deref().expect("checked when resolving");
    let input = cfg.input.as_deref().expect("checked when resolving");
    let ds = load_csv(input, response, &cfg.covariates, &smooth_cols)?;
    let t = ds.y.len();
    let lead = cfg.intercept as usize;
    let x = DMatrix::from_fn(t, lead + ds.x.ncols(), |i, j| if j < lead { 1.0 } else { ds.x[(i, j - lead)] });
    let mut names: Vec<String> = Vec::new();
    if cfg.intercept {
        names.push("intercept".into());
    }
    names.extend(cfg.covariates.iter().cloned());

    let terms: Vec<SmoothTerm> = cfg
        .smooth
        .iter()
        .zip(&ds.smooth)
        .map(|(s, z)| SmoothTerm {
            name: s.column.clone(),
            z: z.clone(),
            knots: s.knots,
            order: s.degree + 1,
            delta: s.delta,
        })
        .collect();

    cfg.taus
        .iter()
        .map(|&tau| {
            let mut lin = LinearModelSpec::new(x.clone(), ds.y.clone(), tau).map_err(data_err)?;
            lin.names = names.clone();
            lin.prior = cfg.prior;
            lin.sampler = cfg.sampler;
            Ok(match cfg.command {
                Command::FitGam => Model::Gam(GamModelSpec::new(lin, &terms).map_err(data_err)?),
                _ => Model::Linear(lin),
            })
        })
        .collect()
}

fn fit(cfg: &RunConfig, out: &mut Outputs) -> CliResult<()> {
    let models = build_models(cfg)?;
    let fits: Vec<(PosteriorDraws, Vec<ParameterSummary>)> = models
        .par_iter()
        .map(|m| {
            let draws = m.run()?;
            let summary = summarize(&draws)?;
            Ok((draws, summary))
        })
        .collect::<CliResult<_>>()?;
    let dir = output_dir(cfg);
    for (tau, (draws, summary)) in cfg.taus.iter().zip(&fits) {
        let tag = tau_tag(*tau);
        out.write(dir.join(format!("draws_{tag}.csv")), |p| write_draws(p, draws))?;
        out.write(dir.join(format!("summary_{tag}.csv")), |p| write_summary(p, summary))?;
        let rates: Vec<String> = draws
            .acceptance
            .iter()
            .map(|(b, a)| format!("{b} {:.3}", a.rate()))
            .collect();
        eprintln!("tau {tau}: acceptance {}", rates.join(", "));
    }
    Ok(())
}

fn summarize_file(cfg: &RunConfig, out: &mut Outputs) -> CliResult<()> {
    let input = cfg.input.as_deref().expect("checked when resolving");
    let table = read_draws(input)?;
    if table.draws.nrows() < 2 {
        return Err(CliError::Data(format!("{}: need at least two draws", input.display())));
    }
    let summary = table
        .names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let col: Vec<f64> = table.draws.column(j).iter().copied().collect();
            summarize_column(name, &col, HPD_LEVEL)
        })
        .collect::<sepqr_core::Result<Vec<_>>>()
        .map_err(data_err)?;
    match &cfg.output {
        Some(dir) => {
            let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("draws");
            let name = match stem.strip_prefix("draws_") {
                Some(rest) => format!("summary_{rest}.csv"),
                None => format!("summary_{stem}.csv"),
            };
            out.write(dir.join(name), |p| write_summary(p, &summary))
        }
        None => {
            println!("{}", crate::data::SUMMARY_HEADER.join(","));
            for row in summary_rows(&summary) {
                println!("{}", row.join(","));
            }
            Ok(())
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, fmt_f64)
}

fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn print_table(header: &[String], rows: &[Vec<String>]) {
    println!("{}", header.join(","));
    for r in rows {
        println!("{}", r.join(","));
    }
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

fn simulate(cfg: &RunConfig, out: &mut Outputs) -> CliResult<()> {
    let experiment = cfg.experiment.expect("checked when resolving");
    let dir = output_dir(cfg).to_path_buf();
    let seed = cfg.sampler.seed;
    let (stem, runs_header, runs, cmp_header, cmp) = match experiment {
        Experiment::Mixture => {
            if cfg.noise.is_some() {
                return usage("the mixture experiment takes no --noise");
            }
            let datasets = cfg.replicates.unwrap_or(5);
            let fits = run_mixture_experiment(&MixtureSpec::default(), &cfg.taus, datasets, seed, cfg.sampler)?;
            let runs: Vec<Vec<String>> = fits
                .iter()
                .map(|f| {
                    vec![
                        f.dataset.to_string(),
                        f.tau.to_string(),
                        f.method.as_str().into(),
                        fmt_f64(f.intercept),
                        fmt_f64(f.slope),
                        fmt_f64(f.sigma),
                        opt(f.alpha),
                    ]
                })
                .collect();
            let cmp: Vec<Vec<String>> = cfg
                .taus
                .iter()
                .map(|&tau| {
                    let of = |m: Method| fits.iter().filter(move |f| f.tau == tau && f.method == m);
                    vec![
                        tau.to_string(),
                        fmt_f64(mean(of(Method::Ald).map(|f| f.intercept))),
                        fmt_f64(mean(of(Method::Sep).map(|f| f.intercept))),
                        fmt_f64(mean(of(Method::Ald).map(|f| f.slope))),
                        fmt_f64(mean(of(Method::Sep).map(|f| f.slope))),
                        fmt_f64(mean(of(Method::Sep).filter_map(|f| f.alpha))),
                    ]
                })
                .collect();
            (
                "mixture".to_string(),
                strings(&["dataset", "tau", "method", "intercept", "slope", "sigma", "alpha"]),
                runs,
                strings(&["tau", "ald_intercept", "sep_intercept", "ald_slope", "sep_slope", "sep_alpha"]),
                cmp,
            )
        }
        Experiment::Sim1 | Experiment::Sim2 | Experiment::Sim3 => {
            let sim_id = match experiment {
                Experiment::Sim1 => 1,
                Experiment::Sim2 => 2,
                _ => 3,
            };
            let noise = cfg.noise.unwrap_or(CurveNoise::GAUSSIAN);
            if noise.scale != NoiseScale::Constant {
                return usage(format!("{} takes gaussian or student_t noise", experiment.as_str()));
            }
            let kind: ErrorKind = noise.innovation;
            let mut runs = Vec::new();
            let mut cmp = Vec::new();
            for &tau in &cfg.taus {
                let mut spec = RegressionSimSpec::new(sim_id, kind, tau);
                spec.replicates = cfg.replicates.unwrap_or(spec.replicates);
                let res = run_regression_experiment(&spec, seed, cfg.sampler, cfg.prior)?;
                for r in &res {
                    let mut row = vec![r.replicate.to_string(), tau.to_string(), r.method.as_str().into()];
                    row.push(fmt_f64(r.mmad));
                    row.push(opt(r.alpha));
                    row.extend(r.beta_hat.iter().map(|&b| fmt_f64(b)));
                    runs.push(row);
                }
                let med = median_by_method(&res, |r| r.method, |r| r.mmad);
                cmp.push(vec![
                    tau.to_string(),
                    fmt_f64(med[0].1),
                    fmt_f64(med[1].1),
                    fmt_f64(mean(res.iter().filter_map(|r| r.alpha))),
                ]);
            }
            let mut header = strings(&["replicate", "tau", "method", "mmad", "alpha"]);
            header.extend((0..8).map(|j| format!("beta_{j}")));
            (
                format!("{}_{}", experiment.as_str(), kind.as_str()),
                header,
                runs,
                strings(&["tau", "ald_mmad", "sep_mmad", "sep_alpha"]),
                cmp,
            )
        }
        Experiment::Wave | Experiment::Doppler => {
            let curve = if experiment == Experiment::Wave { Curve::Wave } else { Curve::Doppler };
            let noise = cfg.noise.unwrap_or(CurveNoise::GAUSSIAN);
            let mut spec = CurveSimSpec::new(curve, noise);
            spec.replicates = cfg.replicates.unwrap_or(spec.replicates);
            let mut runs = Vec::new();
            let mut cmp = Vec::new();
            for &tau in &cfg.taus {
                let res = run_curve_experiment(&spec, tau, seed, cfg.sampler, cfg.prior)?;
                for r in &res {
                    runs.push(vec![
                        r.replicate.to_string(),
                        tau.to_string(),
                        r.method.as_str().into(),
                        fmt_f64(r.mse),
                        opt(r.alpha),
                    ]);
                }
                let med = median_by_method(&res, |r| r.method, |r| r.mse);
                cmp.push(vec![
                    tau.to_string(),
                    fmt_f64(med[0].1),
                    fmt_f64(med[1].1),
                    fmt_f64(mean(res.iter().filter_map(|r| r.alpha))),
                ]);
            }
            (
                format!("{}_{}", curve.as_str(), noise.label()),
                strings(&["replicate", "tau", "method", "mse", "alpha"]),
                runs,
                strings(&["tau", "ald_mse", "sep_mse", "sep_alpha"]),
                cmp,
            )
        }
    };
    out.write(dir.join(format!("{stem}_runs.csv")), |p| write_table(p, &runs_header, &runs))?;
    out.write(dir.join(format!("{stem}_comparison.csv")), |p| write_table(p, &cmp_header, &cmp))?;
    print_table(&cmp_header, &cmp);
    Ok(())
}
