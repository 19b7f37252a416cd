//! Closed-form predictive distributions for independent Poisson processes.
//!
//! Observes counts x over duration r, predicts counts y over duration s.
//! Shows the power-prior (negative-binomial) predictive: log-likelihoods,
//! plug-in means, and seeded sampling.
//!
//! Run with: cargo run --example predictive_basics

use poshrink::closed_form::{bayes_estimator_power, log_predictive_power, sample_predictive_power};
use poshrink::problem::{CountVector, ProblemSpec};

fn main() -> poshrink::Result<()> {
    // three processes watched for one unit of time; predict the next unit
    let spec = ProblemSpec::uniform(3, 1.0, 1.0)?;
    let jeffreys = vec![0.5; 3];
    let x = CountVector(vec![4, 0, 1]);

    println!("observed x = {:?} over r = {:?}", x.as_slice(), spec.r());

    // posterior-mean rates and predictive means
    let lambda_hat = bayes_estimator_power(&x, &jeffreys, &spec)?;
    println!("rate estimates  = {lambda_hat:.3?}");
    let y_hat: Vec<f64> = lambda_hat
        .iter()
        .zip(spec.s())
        .map(|(l, s)| l * s)
        .collect();
    println!("forecast means  = {y_hat:.3?}");

    // log-probability of a candidate future observation
    let y = CountVector(vec![3, 0, 2]);
    let lp = log_predictive_power(&x, &y, &jeffreys, &spec)?;
    println!("log p(y = {:?} | x) = {lp:.4}", y.as_slice());

    // the predictive is a proper distribution: sample from it
    let samples = sample_predictive_power(&x, &jeffreys, &spec, 5, 42)?;
    for (i, s) in samples.iter().enumerate() {
        println!("sample {i}: {:?}", s.as_slice());
    }
    Ok(())
}
