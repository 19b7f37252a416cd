//! Problem specification and parameter transforms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Observation/prediction setup for `d` independent Poisson processes:
/// counts `x_i ~ Po(r_i lambda_i)` are observed, counts `y_i ~ Po(s_i
/// lambda_i)` are to be predicted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    d: usize,
    r: Vec<f64>,
    s: Vec<f64>,
    gamma: Vec<f64>,
}

impl ProblemSpec {
    pub fn new(r: Vec<f64>, s: Vec<f64>) -> Result<Self> {
        if r.len() != s.len() {
            return Err(Error::DimensionMismatch {
                expected: r.len(),
                got: s.len(),
                context: "durations r and s".into(),
            });
        }
        if r.is_empty() {
            return Err(Error::InvalidArgument("durations must be non-empty".into()));
        }
        let gamma = derive_gamma(&r, &s)?;
        Ok(ProblemSpec {
            d: r.len(),
            r,
            s,
            gamma,
        })
    }

    /// Equal durations `r` and `s` across all `d` coordinates.
    pub fn uniform(d: usize, r: f64, s: f64) -> Result<Self> {
        ProblemSpec::new(vec![r; d], vec![s; d])
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn s(&self) -> &[f64] {
        &self.s
    }

    /// `gamma_i = 1/r_i - 1/(r_i + s_i)`, the duration rescaling behind the
    /// square-root parametrization.
    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    /// Durations of the pooled process, `r_i + s_i`.
    pub fn r_plus_s(&self) -> Vec<f64> {
        self.r.iter().zip(&self.s).map(|(r, s)| r + s).collect()
    }

    pub fn check_dim(&self, len: usize, context: &str) -> Result<()> {
        if len != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: len,
                context: context.into(),
            });
        }
        Ok(())
    }
}

/// `gamma_i = 1/r_i - 1/(r_i + s_i)` for positive duration vectors.
pub fn derive_gamma(r: &[f64], s: &[f64]) -> Result<Vec<f64>> {
    if r.len() != s.len() {
        return Err(Error::DimensionMismatch {
            expected: r.len(),
            got: s.len(),
            context: "durations r and s".into(),
        });
    }
    r.iter()
        .zip(s.iter())
        .enumerate()
        .map(|(i, (&ri, &si))| {
            if !(ri > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "observation duration r[{i}] = {ri} must be positive"
                )));
            }
            if !(si > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "prediction duration s[{i}] = {si} must be positive"
                )));
            }
            Ok(1.0 / ri - 1.0 / (ri + si))
        })
        .collect()
}

/// Nonnegative integer count vector (observations, targets, lattice points).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CountVector(pub Vec<u64>);

impl CountVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    /// `z + delta_i`.
    pub fn plus_unit(&self, i: usize) -> CountVector {
        let mut v = self.0.clone();
        v[i] += 1;
        CountVector(v)
    }

    /// `z - delta_i`; `None` when `z_i = 0`.
    pub fn minus_unit(&self, i: usize) -> Option<CountVector> {
        if self.0[i] == 0 {
            return None;
        }
        let mut v = self.0.clone();
        v[i] -= 1;
        Some(CountVector(v))
    }

    /// Coordinate-wise sum.
    pub fn add(&self, other: &CountVector) -> CountVector {
        CountVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl From<Vec<u64>> for CountVector {
    fn from(v: Vec<u64>) -> Self {
        CountVector(v)
    }
}

/// A point on the square-root scale, `theta_i = sqrt(lambda_i / gamma_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaPoint(pub Vec<f64>);

impl ThetaPoint {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// `theta_i = sqrt(lambda_i / gamma_i)`.
pub fn theta_from_lambda(lambda: &[f64], gamma: &[f64]) -> Result<ThetaPoint> {
    if lambda.len() != gamma.len() {
        return Err(Error::DimensionMismatch {
            expected: gamma.len(),
            got: lambda.len(),
            context: "lambda vs gamma".into(),
        });
    }
    lambda
        .iter()
        .zip(gamma)
        .enumerate()
        .map(|(i, (&l, &g))| {
            if l < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "lambda[{i}] = {l} must be nonnegative"
                )));
            }
            if !(g > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "gamma[{i}] = {g} must be positive"
                )));
            }
            Ok((l / g).sqrt())
        })
        .collect::<Result<Vec<f64>>>()
        .map(ThetaPoint)
}

/// Inverse of [`theta_from_lambda`]: `lambda_i = gamma_i theta_i^2`.
pub fn lambda_from_theta(theta: &ThetaPoint, gamma: &[f64]) -> Result<Vec<f64>> {
    if theta.0.len() != gamma.len() {
        return Err(Error::DimensionMismatch {
            expected: gamma.len(),
            got: theta.0.len(),
            context: "theta vs gamma".into(),
        });
    }
    Ok(theta
        .0
        .iter()
        .zip(gamma)
        .map(|(&t, &g)| g * t * t)
        .collect())
}
