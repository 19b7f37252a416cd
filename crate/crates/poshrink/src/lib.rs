//! Simultaneous Bayesian prediction of independent Poisson processes under
//! Kullback-Leibler loss.
//!
//! The library covers:
//!
//! - closed-form predictive distributions and estimators for power (incl.
//!   Jeffreys) and gamma priors ([`closed_form`]);
//! - shrinkage prior families on the square-root scale `theta_i =
//!   sqrt(lambda_i / gamma_i)`, their symmetrization over sign vectors, and
//!   numerical superharmonicity checks ([`prior`]);
//! - the gamma-mixture integral `F(z, t)` behind shrinkage predictives, with
//!   an exact one-dimensional quadrature backend and a Monte Carlo backend
//!   ([`f_integral`]);
//! - predictive distributions and Bayes estimators via `F` ratios
//!   ([`predictive`]);
//! - K-L risks, risk differences, and near-minimaxity bounds ([`risk`]);
//! - grid verification of the dominance sufficient conditions
//!   ([`conditions`]);
//! - risk-curve experiments and count-forecast evaluation metrics
//!   ([`experiments`]).
//!
//! See the crate examples for runnable walkthroughs of each capability, and
//! the `poshrink` binary for the command-line surface.

pub mod cli;
pub mod closed_form;
pub mod conditions;
pub mod error;
pub mod experiments;
pub mod f_integral;
pub mod grammar;
pub mod ingest;
pub mod predictive;
pub mod prior;
pub mod problem;
pub mod quad;
pub mod risk;
pub mod rng;
pub mod special;

pub use error::{Error, Result};
pub use f_integral::{FEstimate, FIntegrator, FSettings};
pub use prior::{FPrior, Family, PriorSpec};
pub use problem::{CountVector, ProblemSpec, ThetaPoint};
pub use risk::RiskEstimate;
