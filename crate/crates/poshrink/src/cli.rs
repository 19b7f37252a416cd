//! Command-line surface. The binary in `src/bin/poshrink.rs` is a thin shim
//! over [`run`].

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::closed_form::{
    bayes_estimator_power, log_predictive_gamma, log_predictive_power, sample_predictive_power,
};
use crate::conditions::check_fineq;
use crate::error::{Error, Result};
use crate::experiments::{
    default_lambda_grid, emit_plot_data, eval_metrics, lambda_grid, run_experiment,
};
use crate::f_integral::{FIntegrator, FSettings};
use crate::grammar::parse_prior;
use crate::ingest::ingest_counts;
use crate::predictive::{bayes_estimator_f, log_predictive_f, predictive_mean_f};
use crate::prior::PriorSpec;
use crate::problem::{CountVector, ProblemSpec};
use crate::risk::{
    brute_force_risk_1d, kl_risk_f, kl_risk_power, lemma_l, minimax_bounds, risk_reduction_f,
    RiskEstimate,
};

#[derive(Parser, Debug)]
#[command(
    name = "poshrink",
    about = "Bayesian prediction of independent Poisson processes under K-L loss",
    version
)]
pub struct Cli {
    /// Cap the worker-thread count (same as POSHRINK_THREADS); results do
    /// not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Emit {
    Mean,
    Loglik,
    Sample,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Predictive mean, log-likelihood, or samples for observed counts.
    Predict {
        /// Inline counts `1,2,3` or a path to a `unit_id,x[,y]` CSV.
        #[arg(long)]
        x: String,
        #[arg(long, value_delimiter = ',')]
        r: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        s: Vec<f64>,
        #[arg(long)]
        prior: String,
        #[arg(long, value_enum, default_value = "mean")]
        emit: Emit,
        /// Sample count for --emit sample.
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// K-L risk of the prior's predictive at a given lambda.
    Risk {
        #[arg(long)]
        prior: String,
        #[arg(long, value_delimiter = ',')]
        lambda: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        r: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        s: Vec<f64>,
        #[arg(long, default_value_t = 200_000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Risk reduction over the power-prior baseline at a given lambda.
    RiskDiff {
        #[arg(long)]
        prior: String,
        #[arg(long, value_delimiter = ',')]
        lambda: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        r: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        s: Vec<f64>,
        #[arg(long, default_value_t = 200_000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Near-minimaxity bounds for the durations.
    Bounds {
        #[arg(long, value_delimiter = ',')]
        r: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        s: Vec<f64>,
    },
    /// Grid check of the dominance inequality.
    Check {
        #[arg(long)]
        prior: String,
        /// Semicolon-separated duration vectors, e.g. `0.5,0.5;1,1;2,2`.
        #[arg(long)]
        r_grid: String,
        #[arg(long)]
        zmax: u64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reproduce one of the built-in risk-reduction experiments.
    Experiment {
        id: u8,
        /// Log-spaced scale grid `lo,hi,count` (default 0.1,10,20).
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
        #[arg(long, default_value_t = 200_000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory for the plot CSV and settings sidecar.
        #[arg(long)]
        out: PathBuf,
    },
    /// Forecast metrics for one or more priors against observed y.
    Evaluate {
        /// CSV with header `unit_id,x,y`.
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_delimiter = ',')]
        r: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        s: Vec<f64>,
        /// Semicolon-separated prior expressions.
        #[arg(long)]
        priors: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Truncated lower-bound function L(lambda).
    LemmaL {
        #[arg(long, value_delimiter = ',')]
        lambda: Vec<f64>,
        #[arg(long, default_value_t = 20)]
        trunc: u64,
    },
}

/// Uniform duration broadcast: a single value stands for all coordinates.
fn durations(mut v: Vec<f64>, d: usize, name: &str) -> Result<Vec<f64>> {
    if v.len() == 1 && d > 1 {
        v = vec![v[0]; d];
    }
    if v.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: v.len(),
            context: name.into(),
        });
    }
    Ok(v)
}

fn write_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match out {
        Some(path) => std::fs::write(path, &text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn integrator_for(
    prior: &PriorSpec,
    spec: &ProblemSpec,
    n_mc: usize,
    seed: u64,
) -> Result<Option<FIntegrator>> {
    match prior {
        PriorSpec::Shrinkage(fp) => {
            let settings = FSettings {
                n_mc,
                seed,
                ..FSettings::default()
            };
            Ok(Some(FIntegrator::new(
                fp.clone(),
                spec.gamma().to_vec(),
                settings,
            )?))
        }
        _ => Ok(None),
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let threads = cli
        .threads
        .or_else(|| {
            std::env::var("POSHRINK_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .filter(|&t| t > 0);
    if let Some(t) = threads {
        // ignore the error if a global pool already exists (e.g. in tests)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global();
    }
    match cli.command {
        Command::Predict {
            x,
            r,
            s,
            prior,
            emit,
            n,
            seed,
            out,
        } => cmd_predict(&x, r, s, &prior, emit, n, seed, &out),
        Command::Risk {
            prior,
            lambda,
            r,
            s,
            n,
            seed,
            out,
        } => cmd_risk(&prior, &lambda, r, s, n, seed, out.as_deref()),
        Command::RiskDiff {
            prior,
            lambda,
            r,
            s,
            n,
            seed,
            out,
        } => cmd_risk_diff(&prior, &lambda, r, s, n, seed, out.as_deref()),
        Command::Bounds { r, s } => {
            let spec = ProblemSpec::new(r, s)?;
            let (lower, upper) = minimax_bounds(&spec);
            println!("lower={lower:.7}");
            println!("upper={upper:.7}");
            println!("ratio={:.7}", upper / lower);
            Ok(())
        }
        Command::Check {
            prior,
            r_grid,
            zmax,
            tol,
            out,
        } => cmd_check(&prior, &r_grid, zmax, tol, out.as_deref()),
        Command::Experiment {
            id,
            grid,
            n,
            seed,
            out,
        } => {
            let grid = match grid {
                Some(g) if g.len() == 3 => lambda_grid(g[0], g[1], g[2] as usize),
                Some(g) => {
                    return Err(Error::InvalidArgument(format!(
                        "--grid wants lo,hi,count; got {} values",
                        g.len()
                    )))
                }
                None => default_lambda_grid(),
            };
            let table = run_experiment(id, &grid, n, seed)?;
            std::fs::create_dir_all(&out)?;
            let path = out.join(format!("exp{id}.csv"));
            emit_plot_data(&table, &path)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Evaluate {
            data,
            r,
            s,
            priors,
            seed,
            out,
        } => cmd_evaluate(&data, r, s, &priors, seed, out.as_deref()),
        Command::LemmaL { lambda, trunc } => {
            for l in lambda {
                println!("L({l}) = {:.7}", lemma_l(l, trunc)?);
            }
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct PredictOutput {
    ids: Option<Vec<String>>,
    prior: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda_hat: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    y_hat: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    loglik: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    loglik_se: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<Vec<Vec<u64>>>,
}

fn parse_x(text: &str) -> Result<(Option<Vec<String>>, CountVector, Option<CountVector>)> {
    let inline: std::result::Result<Vec<u64>, _> =
        text.split(',').map(|t| t.trim().parse::<u64>()).collect();
    if let Ok(v) = inline {
        if !v.is_empty() {
            return Ok((None, CountVector(v), None));
        }
    }
    let data = ingest_counts(Path::new(text))?;
    Ok((Some(data.ids), data.x, data.y))
}

#[allow(clippy::too_many_arguments)]
fn cmd_predict(
    x: &str,
    r: Vec<f64>,
    s: Vec<f64>,
    prior_text: &str,
    emit: Emit,
    n: usize,
    seed: u64,
    out: &Path,
) -> Result<()> {
    let (ids, x, y) = parse_x(x)?;
    let d = x.len();
    let spec = ProblemSpec::new(durations(r, d, "r")?, durations(s, d, "s")?)?;
    let prior = parse_prior(prior_text, d)?;
    let integ = integrator_for(&prior, &spec, 100_000, seed)?;
    let mut output = PredictOutput {
        ids,
        prior: prior_text.to_string(),
        lambda_hat: None,
        y_hat: None,
        loglik: None,
        loglik_se: None,
        samples: None,
    };
    match emit {
        Emit::Mean => match &prior {
            PriorSpec::Power { beta } => {
                let lam = bayes_estimator_power(&x, beta, &spec)?;
                output.y_hat = Some(lam.iter().zip(spec.s()).map(|(l, s)| l * s).collect());
                output.lambda_hat = Some(lam);
            }
            PriorSpec::Gamma { alpha, beta } => {
                let lam: Vec<f64> = x
                    .as_slice()
                    .iter()
                    .zip(beta.iter().zip(alpha))
                    .zip(spec.r())
                    .map(|((&xi, (&bi, &ai)), &ri)| (xi as f64 + bi) / (ri + ai))
                    .collect();
                output.y_hat = Some(lam.iter().zip(spec.s()).map(|(l, s)| l * s).collect());
                output.lambda_hat = Some(lam);
            }
            PriorSpec::Shrinkage(_) => {
                let integ = integ.as_ref().unwrap();
                output.lambda_hat = Some(bayes_estimator_f(integ, &x, &spec)?);
                output.y_hat = Some(predictive_mean_f(integ, &x, &spec)?);
            }
        },
        Emit::Loglik => {
            let y = y.ok_or_else(|| {
                Error::InvalidArgument(
                    "--emit loglik needs observed y (CSV with a y column)".into(),
                )
            })?;
            match &prior {
                PriorSpec::Power { beta } => {
                    output.loglik = Some(log_predictive_power(&x, &y, beta, &spec)?);
                }
                PriorSpec::Gamma { alpha, beta } => {
                    output.loglik = Some(log_predictive_gamma(&x, &y, alpha, beta, &spec)?);
                }
                PriorSpec::Shrinkage(_) => {
                    let (ll, se) = log_predictive_f(integ.as_ref().unwrap(), &x, &y, &spec)?;
                    output.loglik = Some(ll);
                    output.loglik_se = Some(se);
                }
            }
        }
        Emit::Sample => {
            let beta = match &prior {
                PriorSpec::Power { beta } => beta.clone(),
                _ => {
                    return Err(Error::InvalidArgument(
                        "--emit sample supports power priors only".into(),
                    ))
                }
            };
            let samples = sample_predictive_power(&x, &beta, &spec, n, seed)?;
            output.samples = Some(samples.into_iter().map(|c| c.0).collect());
        }
    }
    write_json(&output, Some(out))
}

#[derive(Serialize)]
struct RiskOutput {
    prior: String,
    lambda: Vec<f64>,
    risk: RiskEstimate,
}

fn cmd_risk(
    prior_text: &str,
    lambda: &[f64],
    r: Vec<f64>,
    s: Vec<f64>,
    n: usize,
    seed: u64,
    out: Option<&Path>,
) -> Result<()> {
    let d = lambda.len();
    let spec = ProblemSpec::new(durations(r, d, "r")?, durations(s, d, "s")?)?;
    let prior = parse_prior(prior_text, d)?;
    let risk = match &prior {
        PriorSpec::Power { beta } => kl_risk_power(lambda, beta, &spec)?,
        PriorSpec::Gamma { alpha, beta } => {
            if d != 1 {
                return Err(Error::UnsupportedDimension(
                    "gamma-prior risk is evaluated by direct summation at d = 1 only".into(),
                ));
            }
            let (a, b) = (alpha.clone(), beta.clone());
            let sp = spec.clone();
            let value = brute_force_risk_1d(
                move |xi, yi| {
                    log_predictive_gamma(
                        &CountVector(vec![xi]),
                        &CountVector(vec![yi]),
                        &a,
                        &b,
                        &sp,
                    )
                },
                lambda[0],
                &spec,
            )?;
            RiskEstimate {
                value,
                std_error: 0.0,
                method: crate::risk::RiskMethod::ExactSum,
                n: 0,
                seed: 0,
            }
        }
        PriorSpec::Shrinkage(_) => {
            let integ = integrator_for(&prior, &spec, 100_000, seed)?.unwrap();
            kl_risk_f(&integ, lambda, &spec, n, seed)?
        }
    };
    println!("risk={:.6} se={:.2e}", risk.value, risk.std_error);
    if out.is_some() {
        write_json(
            &RiskOutput {
                prior: prior_text.to_string(),
                lambda: lambda.to_vec(),
                risk,
            },
            out,
        )?;
    }
    Ok(())
}

fn cmd_risk_diff(
    prior_text: &str,
    lambda: &[f64],
    r: Vec<f64>,
    s: Vec<f64>,
    n: usize,
    seed: u64,
    out: Option<&Path>,
) -> Result<()> {
    let d = lambda.len();
    let spec = ProblemSpec::new(durations(r, d, "r")?, durations(s, d, "s")?)?;
    let prior = parse_prior(prior_text, d)?;
    let integ = integrator_for(&prior, &spec, 100_000, seed)?.ok_or_else(|| {
        Error::InvalidArgument(
            "risk-diff compares a shrinkage prior against its power-prior baseline".into(),
        )
    })?;
    let diff = risk_reduction_f(&integ, lambda, &spec, n, seed)?;
    println!("reduction={:.6} se={:.2e}", diff.value, diff.std_error);
    if out.is_some() {
        write_json(
            &RiskOutput {
                prior: prior_text.to_string(),
                lambda: lambda.to_vec(),
                risk: diff,
            },
            out,
        )?;
    }
    Ok(())
}

fn cmd_check(
    prior_text: &str,
    r_grid_text: &str,
    zmax: u64,
    tol: f64,
    out: Option<&Path>,
) -> Result<()> {
    let grid: Vec<Vec<f64>> = r_grid_text
        .split(';')
        .map(|part| {
            part.split(',')
                .map(|t| {
                    t.trim().parse::<f64>().map_err(|_| {
                        Error::InvalidArgument(format!("invalid duration '{t}' in r grid"))
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let d = grid
        .first()
        .map(|v| v.len())
        .ok_or_else(|| Error::InvalidArgument("empty r grid".into()))?;
    let prior = parse_prior(prior_text, d)?;
    let fp = match prior {
        PriorSpec::Shrinkage(fp) => fp,
        _ => {
            return Err(Error::InvalidArgument(
                "check applies to shrinkage priors".into(),
            ))
        }
    };
    // the inequality is checked with s = r (gamma depends on both); use the
    // first grid vector to fix gamma
    let spec = ProblemSpec::new(grid[0].clone(), grid[0].clone())?;
    let integ = FIntegrator::new(fp, spec.gamma().to_vec(), FSettings::default())?;
    let report = check_fineq(&integ, &grid, zmax, tol)?;
    println!(
        "pass={} min_lhs={:.3e} at z={:?}",
        report.pass, report.min_lhs, report.argmin_z
    );
    write_json(&report, out)
}

#[derive(Serialize)]
struct EvaluateRow {
    prior: String,
    kl_dist: f64,
    ws_dist: f64,
    loglik: f64,
}

fn cmd_evaluate(
    data: &Path,
    r: Vec<f64>,
    s: Vec<f64>,
    priors_text: &str,
    seed: u64,
    out: Option<&Path>,
) -> Result<()> {
    let counts = ingest_counts(data)?;
    let y = counts.y.clone().ok_or_else(|| {
        Error::InvalidArgument(format!("{}: evaluate needs a y column", data.display()))
    })?;
    let d = counts.d();
    let spec = ProblemSpec::new(durations(r, d, "r")?, durations(s, d, "s")?)?;
    let settings = FSettings {
        seed,
        ..FSettings::default()
    };
    let mut rows = Vec::new();
    for text in priors_text.split(';').filter(|t| !t.trim().is_empty()) {
        let prior = parse_prior(text, d)?;
        let m = eval_metrics(&counts.x, &y, &prior, &spec, &settings)?;
        println!(
            "{text}: kl={:.4} ws={:.4} loglik={:.4}",
            m.kl_dist, m.ws_dist, m.loglik
        );
        rows.push(EvaluateRow {
            prior: text.trim().to_string(),
            kl_dist: m.kl_dist,
            ws_dist: m.ws_dist,
            loglik: m.loglik,
        });
    }
    if out.is_some() {
        write_json(&rows, out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;

    #[test]
    fn durations_broadcast() {
        assert_eq!(durations(vec![2.0], 3, "r").unwrap(), vec![2.0; 3]);
        assert_eq!(durations(vec![1.0, 2.0], 2, "r").unwrap(), vec![1.0, 2.0]);
        assert!(durations(vec![1.0, 2.0], 3, "r").is_err());
    }

    #[test]
    fn cli_parses_spec_examples() {
        Cli::try_parse_from(["poshrink", "bounds", "--r", "1,1,1", "--s", "1,1,1"]).unwrap();
        Cli::try_parse_from(["poshrink", "lemma-l", "--lambda", "3,4,5"]).unwrap();
        Cli::try_parse_from([
            "poshrink",
            "risk",
            "--prior",
            "jeffreys",
            "--lambda",
            "0.4,0.4,0.4",
            "--r",
            "1,1,1",
            "--s",
            "1,1,1",
        ])
        .unwrap();
        Cli::try_parse_from([
            "poshrink",
            "experiment",
            "2",
            "--grid",
            "0.1,10,20",
            "--out",
            "/tmp/x",
        ])
        .unwrap();
        Cli::try_parse_from([
            "poshrink",
            "check",
            "--prior",
            "shift-point:alpha=0.5",
            "--r-grid",
            "0.5,0.5,0.5;1,1,1",
            "--zmax",
            "5",
        ])
        .unwrap();
    }
}
