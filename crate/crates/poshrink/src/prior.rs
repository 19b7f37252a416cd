//! Shrinkage prior families on the square-root scale and their numerical
//! differential checks.
//!
//! A shrinkage prior is `pi_{f,beta}(lambda) = f(theta) prod lambda_i^{beta_i
//! - 1}` with `theta_i = sqrt(lambda_i / gamma_i)`. The families here are the
//! power-law forms whose superharmonicity (after sign symmetrization where
//! needed) yields predictive dominance over the plain power prior.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::ThetaPoint;
use crate::rng;
use crate::special::log_sum_exp;

/// Maximum dimension for explicit 2^d sign-sum families.
pub const SYM_DIM_CAP: usize = 25;

/// Shrinkage factor family `f(theta)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Family {
    /// `f = 1`; reduces everything to the plain power prior.
    Constant,
    /// `f(theta) = (sum_i theta_i^2 + eta)^{-alpha}`: shrink toward the
    /// origin, already sign-symmetric.
    ShiftPoint { alpha: f64, eta: f64 },
    /// `f(theta) = sum_{a in {±1}^d} (sum_i (a_i theta_i - c_i)^2 +
    /// eps)^{-alpha}`: shrink toward an interior point, symmetrized.
    SymPoint { alpha: f64, center: Vec<f64> },
    /// `f(theta) = sum_a (dist(a.theta, V)^2 + eps)^{-alpha}` where `vperp`
    /// is an orthonormal basis of the orthogonal complement of V.
    SymSubspace { alpha: f64, vperp: Vec<Vec<f64>> },
    /// `f(theta) = (sum_{i in S} theta_i^2 + eps)^{-alpha}`: shrink toward
    /// the coordinate subspace `theta_i = 0, i in S`; sign-symmetric as is.
    CoordSubspace { alpha: f64, indices: Vec<usize> },
    /// Unsymmetrized point-shrinkage `(sum_i (theta_i - c_i)^2 +
    /// eps)^{-alpha}`. Not covered by any dominance result; kept as the
    /// counterexample showing symmetrization is essential.
    HarmonicPoint { alpha: f64, center: Vec<f64> },
    /// Mixture by addition: `f = f_1 + f_2 + ...` stays superharmonic.
    Sum(Vec<Family>),
}

/// Prior over `lambda`: either a closed-form family or a shrinkage prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PriorSpec {
    Power { beta: Vec<f64> },
    Gamma { alpha: Vec<f64>, beta: Vec<f64> },
    Shrinkage(FPrior),
}

impl PriorSpec {
    /// The exponent vector `beta` common to all variants.
    pub fn beta(&self) -> &[f64] {
        match self {
            PriorSpec::Power { beta } => beta,
            PriorSpec::Gamma { beta, .. } => beta,
            PriorSpec::Shrinkage(fp) => &fp.beta,
        }
    }
}

/// A validated shrinkage prior: family, exponents, and the smoothing `eps`
/// added inside singular power laws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FPrior {
    family: Family,
    beta: Vec<f64>,
    epsilon: f64,
    d: usize,
}

/// Structural and hypothesis checks for a family. With `strict` the
/// dominance-hypothesis upper bounds on `alpha` are enforced; without it only
/// evaluability (positivity, dimensions, orthonormality, the 2^d cap) is.
pub(crate) fn validate_family(
    family: &Family,
    d: usize,
    beta_sum: f64,
    strict: bool,
) -> Result<()> {
    match family {
        Family::Constant => Ok(()),
        Family::ShiftPoint { alpha, eta } => {
            if !(*alpha > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "shift-point alpha = {alpha} must be positive"
                )));
            }
            if strict && !(*alpha <= beta_sum - 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "shift-point alpha = {alpha} outside (0, sum(beta) - 1 = {}]",
                    beta_sum - 1.0
                )));
            }
            if !(*eta >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "shift-point eta = {eta} must be nonnegative"
                )));
            }
            Ok(())
        }
        Family::SymPoint { alpha, center } => {
            if center.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: center.len(),
                    context: "sym-point center".into(),
                });
            }
            if center.iter().any(|c| *c < 0.0) {
                return Err(Error::InvalidArgument(
                    "sym-point center entries must be nonnegative".into(),
                ));
            }
            let cap = (d as f64 - 2.0) / 2.0;
            if !(*alpha > 0.0) || (strict && !(*alpha <= cap)) {
                return Err(Error::InvalidArgument(format!(
                    "sym-point alpha = {alpha} outside (0, (d-2)/2 = {cap}]"
                )));
            }
            check_sym_dim(d)
        }
        Family::SymSubspace { alpha, vperp } => {
            if vperp.is_empty() {
                return Err(Error::InvalidArgument(
                    "sym-subspace needs at least one vperp vector".into(),
                ));
            }
            for v in vperp {
                if v.len() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        got: v.len(),
                        context: "sym-subspace vperp vector".into(),
                    });
                }
            }
            for (a, va) in vperp.iter().enumerate() {
                for (b, vb) in vperp.iter().enumerate() {
                    let dot: f64 = va.iter().zip(vb).map(|(x, y)| x * y).sum();
                    let want = if a == b { 1.0 } else { 0.0 };
                    if (dot - want).abs() > 1e-10 {
                        return Err(Error::InvalidArgument(format!(
                            "vperp vectors {a},{b} not orthonormal: dot = {dot}"
                        )));
                    }
                }
            }
            let cap = (vperp.len() as f64 - 2.0) / 2.0;
            if !(*alpha > 0.0) || (strict && !(*alpha <= cap)) {
                return Err(Error::InvalidArgument(format!(
                    "sym-subspace alpha = {alpha} outside (0, (d-k-2)/2 = {cap}]"
                )));
            }
            check_sym_dim(d)
        }
        Family::CoordSubspace { alpha, indices } => {
            let mut seen = vec![false; d];
            for &i in indices {
                if i >= d {
                    return Err(Error::InvalidArgument(format!(
                        "coord-subspace index {i} out of range for d = {d}"
                    )));
                }
                if seen[i] {
                    return Err(Error::InvalidArgument(format!(
                        "coord-subspace index {i} repeated"
                    )));
                }
                seen[i] = true;
            }
            let cap = (indices.len() as f64 - 2.0) / 2.0;
            if !(*alpha > 0.0) || (strict && !(*alpha <= cap)) {
                return Err(Error::InvalidArgument(format!(
                    "coord-subspace alpha = {alpha} outside (0, (|S|-2)/2 = {cap}]"
                )));
            }
            Ok(())
        }
        Family::HarmonicPoint { alpha, center } => {
            // deliberately no dominance-range constraint: this family exists
            // to exhibit failure of unsymmetrized shrinkage
            if center.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: center.len(),
                    context: "harmonic-point center".into(),
                });
            }
            if !(*alpha > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "harmonic-point alpha = {alpha} must be positive"
                )));
            }
            Ok(())
        }
        Family::Sum(parts) => {
            if parts.is_empty() {
                return Err(Error::InvalidArgument("empty sum family".into()));
            }
            for p in parts {
                validate_family(p, d, beta_sum, strict)?;
            }
            Ok(())
        }
    }
}

fn check_sym_dim(d: usize) -> Result<()> {
    if d > SYM_DIM_CAP {
        return Err(Error::UnsupportedDimension(format!(
            "symmetrized family enumerates 2^d sign vectors; d = {d} > {SYM_DIM_CAP}. \
             Use the sign-symmetric shift-point or coord-subspace forms instead"
        )));
    }
    Ok(())
}

impl FPrior {
    /// Construct a prior satisfying the dominance hypotheses (the
    /// proposition-specific `alpha` ranges are enforced).
    pub fn new(family: Family, beta: Vec<f64>, epsilon: f64, d: usize) -> Result<Self> {
        Self::build(family, beta, epsilon, d, true)
    }

    /// Construct a prior for F evaluation only: structural checks apply but
    /// the dominance-hypothesis `alpha` upper bounds are not enforced. Risk
    /// and predictive machinery still works; dominance is not guaranteed.
    pub fn for_evaluation(family: Family, beta: Vec<f64>, epsilon: f64, d: usize) -> Result<Self> {
        Self::build(family, beta, epsilon, d, false)
    }

    fn build(family: Family, beta: Vec<f64>, epsilon: f64, d: usize, strict: bool) -> Result<Self> {
        if beta.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: beta.len(),
                context: "beta".into(),
            });
        }
        if beta.iter().any(|b| !(*b > 0.0)) {
            return Err(Error::InvalidArgument(
                "beta entries must be positive".into(),
            ));
        }
        if !(epsilon >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon = {epsilon} must be nonnegative"
            )));
        }
        let beta_sum: f64 = beta.iter().sum();
        validate_family(&family, d, beta_sum, strict)?;
        Ok(FPrior {
            family,
            beta,
            epsilon,
            d,
        })
    }

    pub fn constant(d: usize, beta: Vec<f64>) -> Result<Self> {
        FPrior::new(Family::Constant, beta, 0.0, d)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Same prior with a different smoothing (for sensitivity reruns).
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon = {epsilon} must be nonnegative"
            )));
        }
        let mut p = self.clone();
        p.epsilon = epsilon;
        Ok(p)
    }

    /// `log f(theta)`; `+inf` only when `epsilon = 0` and `theta` sits on the
    /// singular set.
    pub fn eval_log_f(&self, theta: &ThetaPoint) -> Result<f64> {
        if theta.0.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: theta.0.len(),
                context: "theta".into(),
            });
        }
        Ok(eval_family_log(&self.family, &theta.0, self.epsilon))
    }

    /// `f(theta)`, exponentiated; may be `+inf` at singular points.
    pub fn eval_f(&self, theta: &ThetaPoint) -> Result<f64> {
        self.eval_log_f(theta).map(f64::exp)
    }

    /// Stable 64-bit digest of (family, beta, epsilon); keys the F cache and
    /// seeds per-prior Monte Carlo substreams.
    pub fn key_hash(&self) -> u64 {
        let mut h = rng::mix(0x70_72_69_6f_72, self.d as u64);
        h = hash_family(&self.family, h);
        for b in &self.beta {
            h = rng::mix(h, b.to_bits());
        }
        rng::mix(h, self.epsilon.to_bits())
    }
}

fn hash_family(family: &Family, mut h: u64) -> u64 {
    match family {
        Family::Constant => rng::mix(h, 1),
        Family::ShiftPoint { alpha, eta } => {
            h = rng::mix(h, 2);
            h = rng::mix(h, alpha.to_bits());
            rng::mix(h, eta.to_bits())
        }
        Family::SymPoint { alpha, center } => {
            h = rng::mix(h, 3);
            h = rng::mix(h, alpha.to_bits());
            center.iter().fold(h, |acc, c| rng::mix(acc, c.to_bits()))
        }
        Family::SymSubspace { alpha, vperp } => {
            h = rng::mix(h, 4);
            h = rng::mix(h, alpha.to_bits());
            vperp
                .iter()
                .flatten()
                .fold(h, |acc, v| rng::mix(acc, v.to_bits()))
        }
        Family::CoordSubspace { alpha, indices } => {
            h = rng::mix(h, 5);
            h = rng::mix(h, alpha.to_bits());
            indices.iter().fold(h, |acc, &i| rng::mix(acc, i as u64))
        }
        Family::HarmonicPoint { alpha, center } => {
            h = rng::mix(h, 6);
            h = rng::mix(h, alpha.to_bits());
            center.iter().fold(h, |acc, c| rng::mix(acc, c.to_bits()))
        }
        Family::Sum(parts) => {
            h = rng::mix(h, 7);
            parts.iter().fold(h, |acc, p| hash_family(p, acc))
        }
    }
}

fn eval_family_log(family: &Family, theta: &[f64], eps: f64) -> f64 {
    match family {
        Family::Constant => 0.0,
        Family::ShiftPoint { alpha, eta } => {
            let q: f64 = theta.iter().map(|t| t * t).sum::<f64>() + eta;
            power_log(q, *alpha)
        }
        Family::SymPoint { alpha, center } => sign_sum_log(
            theta,
            |signed| {
                signed
                    .iter()
                    .zip(center)
                    .map(|(t, c)| (t - c) * (t - c))
                    .sum::<f64>()
                    + eps
            },
            *alpha,
        ),
        Family::SymSubspace { alpha, vperp } => sign_sum_log(
            theta,
            |signed| {
                vperp
                    .iter()
                    .map(|v| {
                        let dot: f64 = v.iter().zip(signed).map(|(a, b)| a * b).sum();
                        dot * dot
                    })
                    .sum::<f64>()
                    + eps
            },
            *alpha,
        ),
        Family::CoordSubspace { alpha, indices } => {
            let q: f64 = indices.iter().map(|&i| theta[i] * theta[i]).sum::<f64>() + eps;
            power_log(q, *alpha)
        }
        Family::HarmonicPoint { alpha, center } => {
            let q: f64 = theta
                .iter()
                .zip(center)
                .map(|(t, c)| (t - c) * (t - c))
                .sum::<f64>()
                + eps;
            power_log(q, *alpha)
        }
        Family::Sum(parts) => {
            let logs: Vec<f64> = parts
                .iter()
                .map(|p| eval_family_log(p, theta, eps))
                .collect();
            if logs.iter().any(|v| v.is_infinite() && *v > 0.0) {
                f64::INFINITY
            } else {
                log_sum_exp(&logs)
            }
        }
    }
}

/// `log q^{-alpha}`, mapping q = 0 to +inf.
fn power_log(q: f64, alpha: f64) -> f64 {
    if q <= 0.0 {
        f64::INFINITY
    } else {
        -alpha * q.ln()
    }
}

/// `log sum_{a in {±1}^d} (quad(a.theta))^{-alpha}` by explicit enumeration
/// of all 2^d sign vectors (duplicates from zero coordinates included; the
/// definition sums over every sign vector).
fn sign_sum_log<Q: Fn(&[f64]) -> f64>(theta: &[f64], quad: Q, alpha: f64) -> f64 {
    let d = theta.len();
    debug_assert!(d <= SYM_DIM_CAP);
    let mut signed = theta.to_vec();
    let mut logs = Vec::with_capacity(1usize << d);
    for mask in 0u32..(1u32 << d) {
        for i in 0..d {
            let s = if mask >> i & 1 == 1 { -1.0 } else { 1.0 };
            signed[i] = s * theta[i];
        }
        let v = power_log(quad(&signed), alpha);
        if v.is_infinite() && v > 0.0 {
            return f64::INFINITY;
        }
        logs.push(v);
    }
    log_sum_exp(&logs)
}

/// Explicit 2^d symmetrization of the family's base function at `theta`,
/// for families whose base depends only on squared coordinates this equals
/// `2^d * f_base(theta)` — a consistency check on the sign enumeration.
pub fn symmetrize_check(prior: &FPrior, theta: &ThetaPoint) -> Result<f64> {
    if theta.0.len() != prior.d {
        return Err(Error::DimensionMismatch {
            expected: prior.d,
            got: theta.0.len(),
            context: "theta".into(),
        });
    }
    let base =
        |signed: &[f64]| -> f64 { eval_family_log(&prior.family, signed, prior.epsilon).exp() };
    let d = prior.d;
    check_sym_dim(d)?;
    let mut total = 0.0;
    let mut signed = theta.0.clone();
    for mask in 0u32..(1u32 << d) {
        for i in 0..d {
            let s = if mask >> i & 1 == 1 { -1.0 } else { 1.0 };
            signed[i] = s * theta.0[i];
        }
        total += base(&signed);
    }
    Ok(total)
}

/// Central-difference estimate of the Laplacian `sum_i d^2 f / d theta_i^2`
/// with one Richardson extrapolation step.
pub fn laplacian_fd(prior: &FPrior, theta: &ThetaPoint, step: f64) -> Result<f64> {
    if !(step > 0.0) {
        return Err(Error::InvalidArgument("step must be positive".into()));
    }
    let coarse = laplacian_once(prior, theta, step)?;
    let fine = laplacian_once(prior, theta, step / 2.0)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Default relative step for [`laplacian_fd`].
pub fn default_fd_step(theta: &ThetaPoint) -> f64 {
    let norm = theta.0.iter().map(|t| t * t).sum::<f64>().sqrt();
    1e-3 * norm.max(1.0)
}

fn laplacian_once(prior: &FPrior, theta: &ThetaPoint, h: f64) -> Result<f64> {
    let f0 = prior.eval_f(theta)?;
    if !f0.is_finite() {
        return Err(Error::Singularity(
            "Laplacian evaluated at a singular point; use epsilon > 0".into(),
        ));
    }
    let mut sum = 0.0;
    let mut pt = theta.clone();
    for i in 0..prior.d {
        let ti = theta.0[i];
        pt.0[i] = ti + h;
        let fp = prior.eval_f(&pt)?;
        pt.0[i] = ti - h;
        let fm = prior.eval_f(&pt)?;
        pt.0[i] = ti;
        if !fp.is_finite() || !fm.is_finite() {
            return Err(Error::Singularity(
                "finite-difference stencil crosses the singular set".into(),
            ));
        }
        sum += (fp - 2.0 * f0 + fm) / (h * h);
    }
    Ok(sum)
}

/// Sign verdict of the boundary-derivative limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundarySign {
    NonPositive,
    Positive,
    Inconclusive,
}

/// Estimates of `theta_i^{2 beta_i - 1} df/dtheta_i` on a grid of small
/// `theta_i`, plus the extrapolated sign of the boundary limit.
#[derive(Debug, Clone)]
pub struct BoundaryReport {
    pub grid: Vec<f64>,
    pub estimates: Vec<f64>,
    pub verdict: BoundarySign,
}

/// Probe the boundary condition at coordinate `i`: other coordinates fixed at
/// `theta_partial`, `theta_i` swept over `{1e-2, 1e-3, 1e-4}`.
pub fn boundary_derivative_fd(
    prior: &FPrior,
    i: usize,
    theta_partial: &ThetaPoint,
) -> Result<BoundaryReport> {
    if i >= prior.d {
        return Err(Error::InvalidArgument(format!(
            "coordinate {i} out of range for d = {}",
            prior.d
        )));
    }
    if theta_partial.0.len() != prior.d {
        return Err(Error::DimensionMismatch {
            expected: prior.d,
            got: theta_partial.0.len(),
            context: "theta_partial".into(),
        });
    }
    let grid = [1e-2, 1e-3, 1e-4];
    let bi = prior.beta[i];
    let mut estimates = Vec::with_capacity(grid.len());
    let mut pt = theta_partial.clone();
    for &ti in &grid {
        let h = ti / 10.0;
        pt.0[i] = ti + h;
        let fp = prior.eval_f(&pt)?;
        pt.0[i] = ti - h;
        let fm = prior.eval_f(&pt)?;
        if !fp.is_finite() || !fm.is_finite() {
            return Err(Error::Singularity(
                "boundary probe hit the singular set; use epsilon > 0".into(),
            ));
        }
        let deriv = (fp - fm) / (2.0 * h);
        estimates.push(ti.powf(2.0 * bi - 1.0) * deriv);
    }
    // scale-aware tolerance: derivative magnitudes vary over orders here
    let scale = estimates.iter().map(|e| e.abs()).fold(0.0, f64::max);
    let tol = 1e-8 * scale.max(1e-12);
    // the condition concerns the limit theta_i -> 0: estimates whose
    // magnitude collapses along the shrinking grid extrapolate to 0
    let decays_to_zero = estimates.last().unwrap().abs() <= 0.05 * estimates[0].abs().max(1e-300);
    let verdict = if estimates.iter().all(|&e| e <= tol) || decays_to_zero {
        BoundarySign::NonPositive
    } else if estimates.iter().all(|&e| e > tol) {
        BoundarySign::Positive
    } else {
        BoundarySign::Inconclusive
    };
    Ok(BoundaryReport {
        grid: grid.to_vec(),
        estimates,
        verdict,
    })
}
