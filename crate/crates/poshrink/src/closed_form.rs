//! Exact predictive distributions and estimators for power and gamma priors.
//!
//! Power priors `pi_beta(lambda) = prod lambda_i^{beta_i - 1}` (Jeffreys at
//! beta = 1/2) and gamma priors admit negative-binomial-type closed forms, so
//! no integration is needed here.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};

use crate::error::{Error, Result};
use crate::problem::{CountVector, ProblemSpec};
use crate::rng::substream;
use crate::special::ln_gamma;

fn check_beta(beta: &[f64], spec: &ProblemSpec) -> Result<()> {
    spec.check_dim(beta.len(), "beta")?;
    for (i, &b) in beta.iter().enumerate() {
        if !(b > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "beta[{i}] = {b} must be positive"
            )));
        }
    }
    Ok(())
}

/// `log p_beta(y | x)` for the power prior: the product over coordinates of
/// negative-binomial densities with size `x_i + beta_i` and success odds
/// `s_i / r_i`.
pub fn log_predictive_power(
    x: &CountVector,
    y: &CountVector,
    beta: &[f64],
    spec: &ProblemSpec,
) -> Result<f64> {
    spec.check_dim(x.len(), "x")?;
    spec.check_dim(y.len(), "y")?;
    check_beta(beta, spec)?;
    let mut total = 0.0;
    for i in 0..spec.d() {
        let (xi, yi) = (x.as_slice()[i] as f64, y.as_slice()[i] as f64);
        let (ri, si, bi) = (spec.r()[i], spec.s()[i], beta[i]);
        total +=
            (xi + bi) * (ri / (ri + si)).ln() + yi * (si / (ri + si)).ln() + ln_gamma(xi + yi + bi)
                - ln_gamma(xi + bi)
                - ln_gamma(yi + 1.0);
    }
    Ok(total)
}

/// `log p(y | x)` under the gamma prior with shape `beta_i` and rate
/// `alpha_i`; `alpha = 0` recovers the power prior.
pub fn log_predictive_gamma(
    x: &CountVector,
    y: &CountVector,
    alpha: &[f64],
    beta: &[f64],
    spec: &ProblemSpec,
) -> Result<f64> {
    spec.check_dim(x.len(), "x")?;
    spec.check_dim(y.len(), "y")?;
    spec.check_dim(alpha.len(), "alpha")?;
    check_beta(beta, spec)?;
    for (i, &a) in alpha.iter().enumerate() {
        if a < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "alpha[{i}] = {a} must be nonnegative"
            )));
        }
    }
    let mut total = 0.0;
    for i in 0..spec.d() {
        let (xi, yi) = (x.as_slice()[i] as f64, y.as_slice()[i] as f64);
        let (ri, si, ai, bi) = (spec.r()[i], spec.s()[i], alpha[i], beta[i]);
        total += (xi + bi) * ((ri + ai) / (ri + si + ai)).ln()
            + yi * (si / (ri + si + ai)).ln()
            + ln_gamma(xi + yi + bi)
            - ln_gamma(xi + bi)
            - ln_gamma(yi + 1.0);
    }
    Ok(total)
}

/// Posterior-mean estimator under the power prior: `(x_i + beta_i) / r_i`.
pub fn bayes_estimator_power(
    x: &CountVector,
    beta: &[f64],
    spec: &ProblemSpec,
) -> Result<Vec<f64>> {
    spec.check_dim(x.len(), "x")?;
    check_beta(beta, spec)?;
    Ok(x.as_slice()
        .iter()
        .zip(beta)
        .zip(spec.r())
        .map(|((&xi, &bi), &ri)| (xi as f64 + bi) / ri)
        .collect())
}

/// Draw `n` samples from the power-prior predictive by the gamma-Poisson
/// mixture: `lambda_i ~ Gamma(x_i + beta_i, r_i)`, `y_i ~ Po(s_i lambda_i)`.
pub fn sample_predictive_power(
    x: &CountVector,
    beta: &[f64],
    spec: &ProblemSpec,
    n: usize,
    seed: u64,
) -> Result<Vec<CountVector>> {
    spec.check_dim(x.len(), "x")?;
    check_beta(beta, spec)?;
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be >= 1".into()));
    }
    let mut rng = substream(seed, 0);
    let gammas: Vec<Gamma<f64>> = x
        .as_slice()
        .iter()
        .zip(beta)
        .zip(spec.r())
        .map(|((&xi, &bi), &ri)| {
            Gamma::new(xi as f64 + bi, 1.0 / ri)
                .map_err(|e| Error::InvalidArgument(format!("gamma sampler: {e}")))
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut y = Vec::with_capacity(spec.d());
        for (g, &si) in gammas.iter().zip(spec.s()) {
            let lam = g.sample(&mut rng);
            y.push(sample_poisson(&mut rng, si * lam));
        }
        out.push(CountVector(y));
    }
    Ok(out)
}

/// Poisson draw tolerating mean 0.
pub fn sample_poisson<R: Rng>(rng: &mut R, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean)
        .expect("positive finite mean")
        .sample(rng) as u64
}
