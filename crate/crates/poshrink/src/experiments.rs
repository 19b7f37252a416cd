//! Risk-curve experiments and count-forecast evaluation metrics.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::closed_form::{log_predictive_gamma, log_predictive_power};
use crate::error::{Error, Result};
use crate::f_integral::{FIntegrator, FSettings};
use crate::predictive::{log_predictive_f, predictive_mean_f};
use crate::prior::{FPrior, Family, PriorSpec};
use crate::problem::{CountVector, ProblemSpec};
use crate::risk::risk_reduction_f;

/// Settings echoed alongside every experiment output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSettings {
    pub id: u8,
    pub lambda_grid: Vec<f64>,
    pub n: usize,
    pub seed: u64,
}

/// One (scale, prior) point of a risk-reduction curve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentRow {
    /// The common scale Lambda multiplying the experiment's base lambda.
    pub lambda_scale: f64,
    pub prior: String,
    /// `risk(p_J) - risk(p_{f,J})`, positive when the shrinkage prior wins.
    pub reduction: f64,
    pub se: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentTable {
    pub settings: ExperimentSettings,
    pub rows: Vec<ExperimentRow>,
}

/// Default scale grid: 20 log-spaced points in [0.1, 10].
pub fn default_lambda_grid() -> Vec<f64> {
    lambda_grid(0.1, 10.0, 20)
}

pub fn lambda_grid(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..k)
        .map(|i| (llo + (lhi - llo) * i as f64 / (k - 1).max(1) as f64).exp())
        .collect()
}

/// The priors of one experiment, with display names.
fn experiment_priors(id: u8) -> Result<(Vec<f64>, Vec<(String, FPrior)>)> {
    let mk = |family: Family, d: usize, eps: f64| FPrior::new(family, vec![0.5; d], eps, d);
    match id {
        1 => Ok((
            vec![1.0 / 3.0; 3],
            vec![
                (
                    "point".into(),
                    mk(
                        Family::ShiftPoint {
                            alpha: 0.5,
                            eta: 0.0,
                        },
                        3,
                        0.0,
                    )?,
                ),
                (
                    "shift-point".into(),
                    mk(
                        Family::ShiftPoint {
                            alpha: 0.5,
                            eta: 1.0,
                        },
                        3,
                        0.0,
                    )?,
                ),
            ],
        )),
        2 => Ok((
            vec![0.4; 3],
            vec![
                (
                    "point-origin".into(),
                    mk(
                        Family::ShiftPoint {
                            alpha: 0.5,
                            eta: 0.0,
                        },
                        3,
                        0.0,
                    )?,
                ),
                (
                    "sym-point".into(),
                    mk(
                        Family::SymPoint {
                            alpha: 0.5,
                            center: vec![2.0; 3],
                        },
                        3,
                        0.0,
                    )?,
                ),
                (
                    "harmonic".into(),
                    mk(
                        Family::HarmonicPoint {
                            alpha: 0.5,
                            center: vec![2.0; 3],
                        },
                        3,
                        0.0,
                    )?,
                ),
            ],
        )),
        3 => {
            let h = 0.5;
            Ok((
                vec![0.4; 4],
                vec![
                    (
                        "point".into(),
                        mk(
                            Family::ShiftPoint {
                                alpha: 1.0,
                                eta: 0.0,
                            },
                            4,
                            0.0,
                        )?,
                    ),
                    (
                        "sym-subspace".into(),
                        mk(
                            Family::SymSubspace {
                                alpha: 0.5,
                                // orthonormal complement of span((1,1,1,1))
                                vperp: vec![
                                    vec![h, -h, h, -h],
                                    vec![h, h, -h, -h],
                                    vec![h, -h, -h, h],
                                ],
                            },
                            4,
                            1e-6,
                        )?,
                    ),
                ],
            ))
        }
        4 => Ok((
            vec![0.05, 0.05, 0.05, 5.0],
            vec![
                (
                    "point".into(),
                    mk(
                        Family::ShiftPoint {
                            alpha: 1.0,
                            eta: 0.0,
                        },
                        4,
                        0.0,
                    )?,
                ),
                (
                    "subspace-1".into(),
                    mk(
                        Family::CoordSubspace {
                            alpha: 0.5,
                            indices: vec![0, 1, 2],
                        },
                        4,
                        0.0,
                    )?,
                ),
                (
                    "subspace-2".into(),
                    mk(
                        Family::CoordSubspace {
                            alpha: 0.5,
                            indices: vec![0, 1, 3],
                        },
                        4,
                        0.0,
                    )?,
                ),
                (
                    "mix".into(),
                    mk(
                        Family::Sum(
                            (0..4)
                                .map(|leave| Family::CoordSubspace {
                                    alpha: 0.5,
                                    indices: (0..4).filter(|&i| i != leave).collect(),
                                })
                                .collect(),
                        ),
                        4,
                        0.0,
                    )?,
                ),
            ],
        )),
        other => Err(Error::InvalidArgument(format!(
            "experiment id {other} (valid: 1..4)"
        ))),
    }
}

/// Reproduce one of the four risk-reduction experiments over `lambda =
/// Lambda * base` for each `Lambda` in `grid`. All experiments use `r = s = 1`.
pub fn run_experiment(id: u8, grid: &[f64], n: usize, seed: u64) -> Result<ExperimentTable> {
    if grid.is_empty() || grid.iter().any(|l| !(*l > 0.0)) {
        return Err(Error::InvalidArgument(
            "lambda grid must be non-empty and positive".into(),
        ));
    }
    let (base, priors) = experiment_priors(id)?;
    let d = base.len();
    let spec = ProblemSpec::uniform(d, 1.0, 1.0)?;
    let mut rows = Vec::new();
    for (name, prior) in &priors {
        let settings = FSettings {
            seed,
            ..FSettings::default()
        };
        // one integrator per prior: the F cache carries across the grid
        let integ = FIntegrator::new(prior.clone(), spec.gamma().to_vec(), settings)?;
        for &scale in grid {
            let lambda: Vec<f64> = base.iter().map(|b| b * scale).collect();
            let est = risk_reduction_f(&integ, &lambda, &spec, n, seed)?;
            rows.push(ExperimentRow {
                lambda_scale: scale,
                prior: name.clone(),
                reduction: est.value,
                se: est.std_error,
            });
        }
    }
    rows.sort_by(|a, b| {
        a.lambda_scale
            .total_cmp(&b.lambda_scale)
            .then_with(|| a.prior.cmp(&b.prior))
    });
    Ok(ExperimentTable {
        settings: ExperimentSettings {
            id,
            lambda_grid: grid.to_vec(),
            n,
            seed,
        },
        rows,
    })
}

/// Write `table` as plot-ready CSV plus a `.json` sidecar with the settings.
pub fn emit_plot_data(table: &ExperimentTable, path: &Path) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    writeln!(file, "Lambda,prior,reduction,se,log_reduction")?;
    for row in &table.rows {
        let log_red = if row.reduction > 0.0 {
            format!("{:.*e}", 10, row.reduction.ln())
        } else {
            "NaN".to_string()
        };
        writeln!(
            file,
            "{:.10e},{},{:.10e},{:.10e},{}",
            row.lambda_scale, row.prior, row.reduction, row.se, log_red
        )?;
    }
    let sidecar = path.with_extension("json");
    let json = serde_json::to_string_pretty(&table.settings)?;
    std::fs::write(sidecar, json + "\n")?;
    Ok(())
}

/// Forecast-quality metrics against observed `y`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Metrics {
    /// `sum_i (yhat_i - y_i - y_i (ln yhat_i - ln y_i))`, with `0 ln 0 = 0`;
    /// infinite when the forecast puts mass 0 on an observed count.
    pub kl_dist: f64,
    /// `sum_i (yhat_i - y_i)^2 / (y_i + 1)`.
    pub ws_dist: f64,
    /// `log p_pi(y | x)`.
    pub loglik: f64,
}

/// Evaluate a prior's predictive mean and log-likelihood against observed
/// future counts.
pub fn eval_metrics(
    x: &CountVector,
    y: &CountVector,
    prior: &PriorSpec,
    spec: &ProblemSpec,
    settings: &FSettings,
) -> Result<Metrics> {
    spec.check_dim(x.len(), "x")?;
    spec.check_dim(y.len(), "y")?;
    let (y_hat, loglik) = match prior {
        PriorSpec::Power { beta } => {
            let y_hat: Vec<f64> = x
                .as_slice()
                .iter()
                .zip(beta)
                .zip(spec.r().iter().zip(spec.s()))
                .map(|((&xi, &bi), (&ri, &si))| si * (xi as f64 + bi) / ri)
                .collect();
            (y_hat, log_predictive_power(x, y, beta, spec)?)
        }
        PriorSpec::Gamma { alpha, beta } => {
            let y_hat: Vec<f64> = x
                .as_slice()
                .iter()
                .zip(beta.iter().zip(alpha))
                .zip(spec.r().iter().zip(spec.s()))
                .map(|((&xi, (&bi, &ai)), (&ri, &si))| si * (xi as f64 + bi) / (ri + ai))
                .collect();
            (y_hat, log_predictive_gamma(x, y, alpha, beta, spec)?)
        }
        PriorSpec::Shrinkage(fp) => {
            let integ = FIntegrator::new(fp.clone(), spec.gamma().to_vec(), settings.clone())?;
            let y_hat = predictive_mean_f(&integ, x, spec)?;
            let (ll, _se) = log_predictive_f(&integ, x, y, spec)?;
            (y_hat, ll)
        }
    };
    Ok(Metrics {
        kl_dist: kl_distance(&y_hat, y),
        ws_dist: ws_distance(&y_hat, y),
        loglik,
    })
}

/// `sum_i (yhat_i - y_i - y_i (ln yhat_i - ln y_i))` with `0 ln 0 = 0`.
pub fn kl_distance(y_hat: &[f64], y: &CountVector) -> f64 {
    y_hat
        .iter()
        .zip(y.as_slice())
        .map(|(&h, &yi)| {
            if yi == 0 {
                h
            } else if h <= 0.0 {
                f64::INFINITY
            } else {
                let yf = yi as f64;
                h - yf - yf * (h.ln() - yf.ln())
            }
        })
        .sum()
}

/// `sum_i (yhat_i - y_i)^2 / (y_i + 1)`.
pub fn ws_distance(y_hat: &[f64], y: &CountVector) -> f64 {
    y_hat
        .iter()
        .zip(y.as_slice())
        .map(|(&h, &yi)| {
            let diff = h - yi as f64;
            diff * diff / (yi as f64 + 1.0)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_formulas() {
        let y = CountVector(vec![1]);
        let kl = kl_distance(&[2.0], &y);
        assert!((kl - (1.0 - 2.0f64.ln())).abs() < 1e-9);
        assert!((kl - 0.306_852_8).abs() < 1e-7);
        assert_eq!(ws_distance(&[2.0], &y), 0.5);
        // exact forecast
        let y = CountVector(vec![3, 0, 7]);
        assert_eq!(kl_distance(&[3.0, 0.0, 7.0], &y), 0.0);
        assert_eq!(ws_distance(&[3.0, 0.0, 7.0], &y), 0.0);
        // zero forecast against a positive count
        assert!(kl_distance(&[0.0], &CountVector(vec![2])).is_infinite());
    }

    #[test]
    fn eval_metrics_jeffreys() {
        let spec = ProblemSpec::uniform(2, 2.0, 1.0).unwrap();
        let x = CountVector(vec![3, 1]);
        let y = CountVector(vec![2, 0]);
        let prior = PriorSpec::Power { beta: vec![0.5; 2] };
        let m = eval_metrics(&x, &y, &prior, &spec, &FSettings::default()).unwrap();
        // y_hat = s (x + 1/2) / r = (1.75, 0.75)
        let expect_kl = kl_distance(&[1.75, 0.75], &y);
        assert!((m.kl_dist - expect_kl).abs() < 1e-12);
        let expect_ll = log_predictive_power(&x, &y, &[0.5; 2], &spec).unwrap();
        assert!((m.loglik - expect_ll).abs() < 1e-12);
    }

    #[test]
    fn experiment_one_exact_spot() {
        // single grid point, both priors quadrature-backed: fast exact sums
        let table = run_experiment(1, &[1.0], 0, 0).unwrap();
        assert_eq!(table.rows.len(), 2);
        for row in &table.rows {
            assert_eq!(row.se, 0.0);
            // dominance: both certified priors reduce risk
            assert!(row.reduction >= 0.0, "{row:?}");
        }
    }

    #[test]
    fn unknown_experiment_rejected() {
        assert!(run_experiment(5, &[1.0], 0, 0).is_err());
    }

    #[test]
    fn plot_csv_shape() {
        let table = run_experiment(1, &[0.5, 2.0], 0, 0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp1.csv");
        emit_plot_data(&table, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "Lambda,prior,reduction,se,log_reduction"
        );
        assert_eq!(lines.count(), 4);
        assert!(path.with_extension("json").exists());
        // determinism: rerun produces identical bytes
        let path2 = dir.path().join("exp1-again.csv");
        let table2 = run_experiment(1, &[0.5, 2.0], 0, 0).unwrap();
        emit_plot_data(&table2, &path2).unwrap();
        assert_eq!(text, std::fs::read_to_string(&path2).unwrap());
    }
}
