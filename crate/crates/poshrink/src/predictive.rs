//! Predictive distributions and Bayes estimators for shrinkage priors.
//!
//! Everything here is an `F` ratio on top of the power-prior closed form:
//! `log p_{f,beta}(y|x) = log p_beta(y|x) + log F(x+y, r+s) - log F(x, r)`.

use crate::closed_form::log_predictive_power;
use crate::error::{Error, Result};
use crate::f_integral::FIntegrator;
use crate::problem::{CountVector, ProblemSpec};

fn check_setup(integ: &FIntegrator, spec: &ProblemSpec) -> Result<()> {
    spec.check_dim(integ.prior().d(), "prior dimension")?;
    for (a, b) in integ.gamma().iter().zip(spec.gamma()) {
        if (a - b).abs() > 1e-12 * b.abs().max(1e-300) {
            return Err(Error::InvalidArgument(
                "integrator gamma does not match the problem's durations".into(),
            ));
        }
    }
    Ok(())
}

/// `(log p_{f,beta}(y|x), standard error)`; the error is 0 on the quadrature
/// backend.
pub fn log_predictive_f(
    integ: &FIntegrator,
    x: &CountVector,
    y: &CountVector,
    spec: &ProblemSpec,
) -> Result<(f64, f64)> {
    check_setup(integ, spec)?;
    let base = log_predictive_power(x, y, integ.prior().beta(), spec)?;
    let pooled = spec.r_plus_s();
    let (ratio, se) = integ.log_f_ratio(&x.add(y), &pooled, x, spec.r())?;
    Ok((base + ratio, se))
}

/// Posterior-mean estimator `lambda_hat_i = ((x_i + beta_i) / r_i) *
/// F(x + delta_i, r) / F(x, r)`.
pub fn bayes_estimator_f(
    integ: &FIntegrator,
    x: &CountVector,
    spec: &ProblemSpec,
) -> Result<Vec<f64>> {
    check_setup(integ, spec)?;
    spec.check_dim(x.len(), "x")?;
    let beta = integ.prior().beta();
    let mut out = Vec::with_capacity(spec.d());
    for i in 0..spec.d() {
        let (ratio, _se) = integ.log_f_ratio(&x.plus_unit(i), spec.r(), x, spec.r())?;
        let lam = (x.as_slice()[i] as f64 + beta[i]) / spec.r()[i] * ratio.exp();
        out.push(lam);
    }
    Ok(out)
}

/// Mean of the predictive distribution: `y_hat_i = s_i * lambda_hat_i`.
pub fn predictive_mean_f(
    integ: &FIntegrator,
    x: &CountVector,
    spec: &ProblemSpec,
) -> Result<Vec<f64>> {
    let est = bayes_estimator_f(integ, x, spec)?;
    Ok(est.iter().zip(spec.s()).map(|(l, s)| l * s).collect())
}
