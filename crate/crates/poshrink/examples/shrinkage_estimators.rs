//! Shrinkage predictives: how a superharmonic prior on the rescaled
//! square-root rates pulls estimates toward a point or subspace, and what
//! it costs in predictive log-likelihood.
//!
//! Run with: cargo run --example shrinkage_estimators

use poshrink::f_integral::{FIntegrator, FSettings};
use poshrink::grammar::parse_prior;
use poshrink::predictive::{bayes_estimator_f, log_predictive_f};
use poshrink::prior::PriorSpec;
use poshrink::problem::{CountVector, ProblemSpec};

fn main() -> poshrink::Result<()> {
    let d = 3;
    let spec = ProblemSpec::uniform(d, 1.0, 1.0)?;
    let x = CountVector(vec![0, 1, 2]);

    println!("x = {:?}, r = s = 1", x.as_slice());
    println!("Jeffreys rate estimates: {:?}", vec![0.5, 1.5, 2.5]);

    for text in [
        "shift-point:alpha=0.5",
        "shift-point:alpha=0.5,eta=1",
        "sym-point:alpha=0.5,center=2,2,2",
    ] {
        let prior = match parse_prior(text, d)? {
            PriorSpec::Shrinkage(fp) => fp,
            _ => unreachable!("all grammars above are shrinkage priors"),
        };
        let settings = FSettings {
            n_mc: 50_000,
            seed: 7,
            ..FSettings::default()
        };
        let integ = FIntegrator::new(prior, spec.gamma().to_vec(), settings)?;
        let lam = bayes_estimator_f(&integ, &x, &spec)?;
        let (lp, se) = log_predictive_f(&integ, &x, &CountVector(vec![1, 1, 2]), &spec)?;
        println!("{text}");
        println!("  rate estimates   = {lam:.3?}");
        println!("  log p(1,1,2 | x) = {lp:.4} (se {se:.1e})");
    }
    Ok(())
}
