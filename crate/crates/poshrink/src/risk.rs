//! K-L risks, risk differences, near-minimaxity bounds, and the special
//! functions used by the asymptotic lower-bound argument.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_form::sample_poisson;
use crate::error::{Error, Result};
use crate::f_integral::{Backend, FIntegrator};
use crate::problem::{CountVector, ProblemSpec};
use crate::rng::{mix, substream};
use crate::special::ln_gamma;

/// How a risk value was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RiskMethod {
    ExactSum,
    MonteCarlo,
    /// Exact power-prior term minus a Monte Carlo reduction.
    Hybrid,
}

/// A K-L risk (or risk difference) in nats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskEstimate {
    pub value: f64,
    /// 0 when `method == ExactSum`.
    pub std_error: f64,
    pub method: RiskMethod,
    pub n: usize,
    pub seed: u64,
}

impl RiskEstimate {
    fn exact(value: f64) -> Self {
        RiskEstimate {
            value,
            std_error: 0.0,
            method: RiskMethod::ExactSum,
            n: 0,
            seed: 0,
        }
    }
}

/// Truncation window for a Poisson expectation: tail mass below 1e-14 for
/// means up to ~1e5.
fn window(mean: f64) -> (u64, u64) {
    let lo = (mean - 12.0 * mean.sqrt() - 30.0).floor().max(0.0) as u64;
    let hi = (mean + 12.0 * mean.sqrt() + 30.0).ceil() as u64;
    (lo, hi)
}

fn poisson_log_pmf(k: u64, mean: f64) -> f64 {
    k as f64 * mean.ln() - mean - ln_gamma(k as f64 + 1.0)
}

/// `E[g(X)]` for `X ~ Po(mean)` by truncated summation.
fn poisson_expect<G: Fn(u64) -> f64>(mean: f64, g: G) -> f64 {
    let (lo, hi) = window(mean);
    (lo..=hi)
        .map(|k| poisson_log_pmf(k, mean).exp() * g(k))
        .sum()
}

fn check_lambda(lambda: &[f64], spec: &ProblemSpec) -> Result<()> {
    spec.check_dim(lambda.len(), "lambda")?;
    for (i, &l) in lambda.iter().enumerate() {
        if !(l > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "lambda[{i}] = {l} must be positive"
            )));
        }
    }
    Ok(())
}

/// Exact K-L risk of the power-prior predictive `p_beta` at `lambda`.
///
/// Per coordinate: `-s l + s l ln(s l) - (r l + b) ln(r/(r+s)) - s l
/// ln(s/(r+s)) - (E ln G(w + b) - E ln G(x + b))` with `w ~ Po((r+s) l)`,
/// `x ~ Po(r l)`.
pub fn kl_risk_power(lambda: &[f64], beta: &[f64], spec: &ProblemSpec) -> Result<RiskEstimate> {
    check_lambda(lambda, spec)?;
    spec.check_dim(beta.len(), "beta")?;
    let mut total = 0.0;
    for i in 0..spec.d() {
        let (l, b) = (lambda[i], beta[i]);
        let (r, s) = (spec.r()[i], spec.s()[i]);
        let e_w = poisson_expect((r + s) * l, |w| ln_gamma(w as f64 + b));
        let e_x = poisson_expect(r * l, |x| ln_gamma(x as f64 + b));
        total += -s * l + s * l * (s * l).ln()
            - (r * l + b) * (r / (r + s)).ln()
            - s * l * (s / (r + s)).ln()
            - (e_w - e_x);
    }
    Ok(RiskEstimate::exact(total))
}

/// Lattice budget above which the exact risk-reduction sum falls back to
/// coupled Monte Carlo.
const EXACT_LATTICE_BUDGET: u64 = 1_500_000;

/// `risk(p_beta) - risk(p_{f,beta})` at `lambda`:
/// `E[log F(z, r+s) | z ~ Po((r+s) lambda)] - E[log F(z, r) | z ~ Po(r lambda)]`.
///
/// Nonnegative in expectation whenever the dominance conditions hold. Exact
/// lattice summation when the prior is quadrature-backed and the truncated
/// lattice is affordable; otherwise coupled Monte Carlo (binomial thinning of
/// the pooled counts, which gives both expectations the exact marginals with
/// strongly correlated terms).
pub fn risk_reduction_f(
    integ: &FIntegrator,
    lambda: &[f64],
    spec: &ProblemSpec,
    n: usize,
    seed: u64,
) -> Result<RiskEstimate> {
    check_lambda(lambda, spec)?;
    spec.check_dim(integ.prior().d(), "prior dimension")?;
    if matches!(integ.prior().family(), crate::prior::Family::Constant) {
        return Ok(RiskEstimate::exact(0.0));
    }
    if integ.backend() == Backend::Quadrature {
        let pooled_means: Vec<f64> = lambda
            .iter()
            .zip(spec.r_plus_s())
            .map(|(l, t)| l * t)
            .collect();
        let obs_means: Vec<f64> = lambda.iter().zip(spec.r()).map(|(l, r)| l * r).collect();
        let size = |means: &[f64]| -> u64 {
            means
                .iter()
                .map(|&m| {
                    let (lo, hi) = window(m);
                    hi - lo + 1
                })
                .product()
        };
        if size(&pooled_means) <= EXACT_LATTICE_BUDGET && size(&obs_means) <= EXACT_LATTICE_BUDGET {
            let a = expect_log_f(integ, &pooled_means, &spec.r_plus_s())?;
            let b = expect_log_f(integ, &obs_means, spec.r())?;
            return Ok(RiskEstimate::exact(a - b));
        }
    }
    coupled_mc(integ, lambda, spec, n, seed)
}

/// `E[log F(z, t)]` for independent `z_i ~ Po(means_i)` by truncated lattice
/// summation; points with joint probability below 1e-16 are skipped.
fn expect_log_f(integ: &FIntegrator, means: &[f64], t: &[f64]) -> Result<f64> {
    let d = means.len();
    let windows: Vec<(u64, u64)> = means.iter().map(|&m| window(m)).collect();
    // per-coordinate log pmf tables
    let tables: Vec<Vec<f64>> = means
        .iter()
        .zip(&windows)
        .map(|(&m, &(lo, hi))| (lo..=hi).map(|k| poisson_log_pmf(k, m)).collect())
        .collect();
    let cutoff = (1e-16f64).ln();
    let mut z = CountVector(windows.iter().map(|w| w.0).collect());
    let mut idx = vec![0usize; d];
    let mut total = 0.0;
    'outer: loop {
        let log_p: f64 = idx.iter().zip(&tables).map(|(&i, tab)| tab[i]).sum();
        if log_p >= cutoff {
            let est = integ.log_f(&z, t)?;
            total += log_p.exp() * est.log_value;
        }
        // odometer increment
        for i in 0..d {
            if idx[i] + 1 < tables[i].len() {
                idx[i] += 1;
                z.0[i] = windows[i].0 + idx[i] as u64;
                continue 'outer;
            }
            idx[i] = 0;
            z.0[i] = windows[i].0;
        }
        break;
    }
    Ok(total)
}

/// Samples per Monte Carlo block; block count grows with `n` so results are
/// identical for any worker count.
const MC_BLOCK: usize = 2_000;

fn coupled_mc(
    integ: &FIntegrator,
    lambda: &[f64],
    spec: &ProblemSpec,
    n: usize,
    seed: u64,
) -> Result<RiskEstimate> {
    let n = n.max(1_000);
    let blocks = n.div_ceil(MC_BLOCK);
    let n = blocks * MC_BLOCK;
    let pooled = spec.r_plus_s();
    let thin: Vec<f64> = spec.r().iter().zip(&pooled).map(|(r, t)| r / t).collect();
    let pooled_means: Vec<f64> = lambda.iter().zip(&pooled).map(|(l, t)| l * t).collect();
    let run_seed = mix(seed, integ.prior().key_hash());

    struct BlockOut {
        sum: f64,
        sum_sq: f64,
        /// distinct (z, pooled?) -> (count, F std error)
        visits: BTreeMap<(Vec<u64>, bool), (u64, f64)>,
    }

    let block_results: Vec<Result<BlockOut>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = substream(run_seed, b as u64);
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            let mut visits: BTreeMap<(Vec<u64>, bool), (u64, f64)> = BTreeMap::new();
            let d = lambda.len();
            let mut z_plus = CountVector(vec![0; d]);
            let mut z_minus = CountVector(vec![0; d]);
            for _ in 0..MC_BLOCK {
                for i in 0..d {
                    let zp = sample_poisson(&mut rng, pooled_means[i]);
                    let zm = if zp == 0 {
                        0
                    } else {
                        Binomial::new(zp, thin[i])
                            .expect("valid thinning probability")
                            .sample(&mut rng)
                    };
                    z_plus.0[i] = zp;
                    z_minus.0[i] = zm;
                }
                let fp = integ.log_f(&z_plus, &pooled)?;
                let fm = integ.log_f(&z_minus, spec.r())?;
                let diff = fp.log_value - fm.log_value;
                sum += diff;
                sum_sq += diff * diff;
                visits
                    .entry((z_plus.0.clone(), true))
                    .and_modify(|e| e.0 += 1)
                    .or_insert((1, fp.std_error));
                visits
                    .entry((z_minus.0.clone(), false))
                    .and_modify(|e| e.0 += 1)
                    .or_insert((1, fm.std_error));
            }
            Ok(BlockOut {
                sum,
                sum_sq,
                visits,
            })
        })
        .collect();

    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut visits: BTreeMap<(Vec<u64>, bool), (u64, f64)> = BTreeMap::new();
    for r in block_results {
        let b = r?;
        sum += b.sum;
        sum_sq += b.sum_sq;
        for (k, (c, se)) in b.visits {
            visits.entry(k).and_modify(|e| e.0 += c).or_insert((c, se));
        }
    }
    let nf = n as f64;
    let mean = sum / nf;
    let var = (sum_sq - nf * mean * mean).max(0.0) / (nf - 1.0);
    // F estimates at distinct lattice points carry independent errors; weight
    // each by its visit frequency
    let var_f: f64 = visits
        .values()
        .map(|&(c, se)| {
            let w = c as f64 / nf;
            (w * se) * (w * se)
        })
        .sum();
    Ok(RiskEstimate {
        value: mean,
        std_error: (var / nf + var_f).sqrt(),
        method: RiskMethod::MonteCarlo,
        n,
        seed,
    })
}

/// K-L risk of the shrinkage predictive: `kl_risk_power - risk_reduction_f`.
pub fn kl_risk_f(
    integ: &FIntegrator,
    lambda: &[f64],
    spec: &ProblemSpec,
    n: usize,
    seed: u64,
) -> Result<RiskEstimate> {
    let base = kl_risk_power(lambda, integ.prior().beta(), spec)?;
    let red = risk_reduction_f(integ, lambda, spec, n, seed)?;
    let method = match red.method {
        RiskMethod::ExactSum => RiskMethod::ExactSum,
        _ => RiskMethod::Hybrid,
    };
    Ok(RiskEstimate {
        value: base.value - red.value,
        std_error: red.std_error,
        method,
        n: red.n,
        seed: red.seed,
    })
}

/// Near-minimaxity bounds: `(0.5 sum log((r_i+s_i)/r_i), 0.52 sum
/// log((r_i+s_i)/r_i))`. The Jeffreys predictive's supremum risk sits between
/// them, so its risk is within a factor 1.04 of minimax.
pub fn minimax_bounds(spec: &ProblemSpec) -> (f64, f64) {
    let base: f64 = spec
        .r()
        .iter()
        .zip(spec.s())
        .map(|(r, s)| ((r + s) / r).ln())
        .sum();
    (0.5 * base, 0.52 * base)
}

/// Exact K-L risk of a plug-in estimator rule: `E_x sum_i [r_i lambda_i
/// ln(lambda_i / lhat_i) - r_i lambda_i + r_i lhat_i]`.
///
/// Returns `+inf` (flagged, not an error) when the rule outputs `lhat_i = 0`
/// against `lambda_i > 0` on a lattice point with positive probability.
pub fn estimator_kl_risk<R>(rule: R, lambda: &[f64], spec: &ProblemSpec) -> Result<RiskEstimate>
where
    R: Fn(&CountVector) -> Result<Vec<f64>>,
{
    check_lambda(lambda, spec)?;
    let d = spec.d();
    let means: Vec<f64> = lambda.iter().zip(spec.r()).map(|(l, r)| l * r).collect();
    let windows: Vec<(u64, u64)> = means.iter().map(|&m| window(m)).collect();
    let tables: Vec<Vec<f64>> = means
        .iter()
        .zip(&windows)
        .map(|(&m, &(lo, hi))| (lo..=hi).map(|k| poisson_log_pmf(k, m)).collect())
        .collect();
    let cutoff = (1e-14f64).ln();
    let mut x = CountVector(windows.iter().map(|w| w.0).collect());
    let mut idx = vec![0usize; d];
    let mut total = 0.0;
    'outer: loop {
        let log_p: f64 = idx.iter().zip(&tables).map(|(&i, tab)| tab[i]).sum();
        if log_p >= cutoff {
            let lhat = rule(&x)?;
            spec.check_dim(lhat.len(), "estimator output")?;
            let mut loss = 0.0;
            for i in 0..d {
                let (l, r, h) = (lambda[i], spec.r()[i], lhat[i]);
                if h <= 0.0 {
                    return Ok(RiskEstimate::exact(f64::INFINITY));
                }
                loss += r * l * (l / h).ln() - r * l + r * h;
            }
            total += log_p.exp() * loss;
        }
        for i in 0..d {
            if idx[i] + 1 < tables[i].len() {
                idx[i] += 1;
                x.0[i] = windows[i].0 + idx[i] as u64;
                continue 'outer;
            }
            idx[i] = 0;
            x.0[i] = windows[i].0;
        }
        break;
    }
    Ok(RiskEstimate::exact(total))
}

/// `L(lambda) = lambda sum_{x <= trunc} ln(x + 0.5) Po(x; lambda) - lambda ln
/// lambda`: the hand-truncated lower-bound function from the asymptotic
/// argument.
pub fn lemma_l(lambda: f64, trunc: u64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "lambda = {lambda} must be positive"
        )));
    }
    let s: f64 = (0..=trunc)
        .map(|x| (x as f64 + 0.5).ln() * poisson_log_pmf(x, lambda).exp())
        .sum();
    Ok(lambda * s - lambda * lambda.ln())
}

/// `f(lambda) = lambda E[ln((x + 0.5) / lambda)]` with adaptive truncation
/// (tail below 1e-14); the un-truncated counterpart of [`lemma_l`].
pub fn lemma_f(lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "lambda = {lambda} must be positive"
        )));
    }
    let e = poisson_expect(lambda, |x| (x as f64 + 0.5).ln());
    Ok(lambda * (e - lambda.ln()))
}

/// Direct double-sum K-L risk of an arbitrary predictive log-pmf at `d = 1`;
/// the oracle the closed forms are checked against.
pub fn brute_force_risk_1d<Q>(q: Q, lambda: f64, spec: &ProblemSpec) -> Result<f64>
where
    Q: Fn(u64, u64) -> Result<f64>,
{
    if spec.d() != 1 {
        return Err(Error::UnsupportedDimension(
            "brute_force_risk_1d requires d = 1".into(),
        ));
    }
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument("lambda must be positive".into()));
    }
    let (r, s) = (spec.r()[0], spec.s()[0]);
    let (xlo, xhi) = window(r * lambda);
    let (ylo, yhi) = window(s * lambda);
    let mut total = 0.0;
    for x in xlo..=xhi {
        let px = poisson_log_pmf(x, r * lambda).exp();
        let mut inner = 0.0;
        for y in ylo..=yhi {
            let log_true = poisson_log_pmf(y, s * lambda);
            inner += log_true.exp() * (log_true - q(x, y)?);
        }
        total += px * inner;
    }
    Ok(total)
}

/// Convenience: sample `count` lambda vectors log-uniformly in `[lo, hi]^d`.
pub fn log_uniform_lambdas<RNG: Rng>(
    rng: &mut RNG,
    d: usize,
    lo: f64,
    hi: f64,
    count: usize,
) -> Vec<Vec<f64>> {
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..count)
        .map(|_| (0..d).map(|_| rng.gen_range(llo..lhi).exp()).collect())
        .collect()
}
