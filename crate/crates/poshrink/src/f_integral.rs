//! The gamma-mixture integral `F(z, t) = E[f(theta)]` with `lambda_i ~
//! Gamma(z_i + beta_i, rate t_i)` and `theta_i = sqrt(lambda_i / gamma_i)`.
//!
//! `F` drives everything downstream: predictive densities are `F` ratios,
//! Bayes estimators are `F` ratios, and the dominance conditions are finite
//! differences of `F` over the count lattice.
//!
//! Two backends:
//!
//! - quadrature: families that are sums of `(sum_{i in S} theta_i^2 +
//!   eta)^{-alpha}` reduce to a one-dimensional integral via `u^{-alpha} =
//!   Gamma(alpha)^{-1} int v^{alpha-1} e^{-uv} dv`, evaluated adaptively on a
//!   log axis (exact to ~1e-8 relative);
//! - Monte Carlo: everything else (off-origin symmetrized families), by
//!   inverse-transform gamma sampling so common random numbers can be shared
//!   across shapes.

use std::num::NonZeroUsize;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use lru::LruCache;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prior::{FPrior, Family};
use crate::problem::CountVector;
use crate::quad;
use crate::rng;
use crate::special::{gamma_quantile, ln_gamma, log_sum_exp};

/// Which engine produced an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Backend {
    Quadrature,
    MonteCarlo,
}

/// Value of `F(z, t)` in log scale with evaluation metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FEstimate {
    pub log_value: f64,
    /// Standard error of `log_value`; 0 for quadrature.
    pub std_error: f64,
    pub backend: Backend,
    pub n_samples: usize,
    pub z: CountVector,
    pub t: Vec<f64>,
}

/// Evaluation knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FSettings {
    /// Monte Carlo sample count.
    pub n_mc: usize,
    pub seed: u64,
    pub cache_enabled: bool,
    pub cache_capacity: usize,
}

impl Default for FSettings {
    fn default() -> Self {
        FSettings {
            n_mc: 100_000,
            seed: 0,
            cache_enabled: true,
            cache_capacity: 1_000_000,
        }
    }
}

/// Blocks for median-of-means and for ratio standard errors.
const MC_BLOCKS: usize = 10;

/// One-dimensional reduction of a quadrature-routable family.
#[derive(Debug, Clone)]
enum QuadTerm {
    Constant,
    Power {
        alpha: f64,
        eta: f64,
        indices: Vec<usize>,
    },
}

fn quad_terms(family: &Family, d: usize, epsilon: f64) -> Option<Vec<QuadTerm>> {
    match family {
        Family::Constant => Some(vec![QuadTerm::Constant]),
        Family::ShiftPoint { alpha, eta } => Some(vec![QuadTerm::Power {
            alpha: *alpha,
            eta: *eta,
            indices: (0..d).collect(),
        }]),
        Family::CoordSubspace { alpha, indices } => Some(vec![QuadTerm::Power {
            alpha: *alpha,
            eta: epsilon,
            indices: indices.clone(),
        }]),
        Family::Sum(parts) => {
            let mut terms = Vec::new();
            for p in parts {
                terms.extend(quad_terms(p, d, epsilon)?);
            }
            Some(terms)
        }
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct CacheKey {
    z: Vec<u64>,
    t_bits: Vec<u64>,
}

/// Quantize a duration to 12 significant digits for cache keying.
fn quantize(t: f64) -> u64 {
    let s = format!("{t:.11e}");
    s.parse::<f64>().unwrap_or(t).to_bits()
}

/// Evaluator of `F(z, t)` for one prior; holds the LRU cache.
pub struct FIntegrator {
    prior: FPrior,
    gamma: Vec<f64>,
    settings: FSettings,
    terms: Option<Vec<QuadTerm>>,
    cache: Mutex<LruCache<CacheKey, (f64, f64, usize)>>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl FIntegrator {
    pub fn new(prior: FPrior, gamma: Vec<f64>, settings: FSettings) -> Result<Self> {
        if gamma.len() != prior.d() {
            return Err(Error::DimensionMismatch {
                expected: prior.d(),
                got: gamma.len(),
                context: "gamma".into(),
            });
        }
        if gamma.iter().any(|g| !(*g > 0.0)) {
            return Err(Error::InvalidArgument(
                "gamma entries must be positive".into(),
            ));
        }
        let terms = quad_terms(prior.family(), prior.d(), prior.epsilon());
        let cap = NonZeroUsize::new(settings.cache_capacity.max(1)).unwrap();
        Ok(FIntegrator {
            prior,
            gamma,
            settings,
            terms,
            cache: Mutex::new(LruCache::new(cap)),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        })
    }

    pub fn prior(&self) -> &FPrior {
        &self.prior
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn settings(&self) -> &FSettings {
        &self.settings
    }

    pub fn backend(&self) -> Backend {
        if self.terms.is_some() {
            Backend::Quadrature
        } else {
            Backend::MonteCarlo
        }
    }

    /// (hits, misses) counters since construction.
    pub fn cache_stats(&self) -> (u64, u64) {
        (
            self.hits.load(Ordering::Relaxed),
            self.misses.load(Ordering::Relaxed),
        )
    }

    /// `F(z, t)` in log scale, cached.
    pub fn log_f(&self, z: &CountVector, t: &[f64]) -> Result<FEstimate> {
        if z.len() != self.prior.d() || t.len() != self.prior.d() {
            return Err(Error::DimensionMismatch {
                expected: self.prior.d(),
                got: z.len().max(t.len()),
                context: "F(z, t) arguments".into(),
            });
        }
        for (i, &ti) in t.iter().enumerate() {
            if !(ti > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "t[{i}] = {ti} must be positive"
                )));
            }
        }
        let key = CacheKey {
            z: z.as_slice().to_vec(),
            t_bits: t.iter().map(|&ti| quantize(ti)).collect(),
        };
        if self.settings.cache_enabled {
            if let Some(&(log_value, std_error, n)) = self.cache.lock().unwrap().get(&key) {
                self.hits.fetch_add(1, Ordering::Relaxed);
                return Ok(FEstimate {
                    log_value,
                    std_error,
                    backend: self.backend(),
                    n_samples: n,
                    z: z.clone(),
                    t: t.to_vec(),
                });
            }
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let est = match &self.terms {
            Some(terms) => self.quadrature(terms, z, t)?,
            None => self.monte_carlo(z, t)?,
        };
        if self.settings.cache_enabled {
            // value is deterministic given (prior, z, t, seed): inserts are
            // idempotent regardless of thread interleaving
            self.cache
                .lock()
                .unwrap()
                .put(key, (est.log_value, est.std_error, est.n_samples));
        }
        Ok(FEstimate {
            backend: self.backend(),
            z: z.clone(),
            t: t.to_vec(),
            ..est
        })
    }

    fn quadrature(&self, terms: &[QuadTerm], z: &CountVector, t: &[f64]) -> Result<FEstimate> {
        let beta = self.prior.beta();
        let mut logs = Vec::with_capacity(terms.len());
        for term in terms {
            match term {
                QuadTerm::Constant => logs.push(0.0),
                QuadTerm::Power {
                    alpha,
                    eta,
                    indices,
                } => logs.push(self.quad_power(*alpha, *eta, indices, z, t, beta)?),
            }
        }
        Ok(FEstimate {
            log_value: log_sum_exp(&logs),
            std_error: 0.0,
            backend: Backend::Quadrature,
            n_samples: 0,
            z: z.clone(),
            t: t.to_vec(),
        })
    }

    /// `log` of `Gamma(alpha)^{-1} int_0^inf v^{alpha-1} e^{-eta v}
    /// prod_{i in S} (1 + v / (gamma_i t_i))^{-(z_i + beta_i)} dv`,
    /// integrated over `u = log v` on `[-40, 40]`.
    fn quad_power(
        &self,
        alpha: f64,
        eta: f64,
        indices: &[usize],
        z: &CountVector,
        t: &[f64],
        beta: &[f64],
    ) -> Result<f64> {
        let shape_sum: f64 = indices
            .iter()
            .map(|&i| z.as_slice()[i] as f64 + beta[i])
            .sum();
        if eta == 0.0 && shape_sum <= alpha {
            return Err(Error::Integrability(format!(
                "F(z, t) diverges: alpha = {alpha} >= sum of shapes {shape_sum} \
                 over the shrinkage coordinates (requires alpha < sum(z_i + beta_i))"
            )));
        }
        let rates: Vec<f64> = indices.iter().map(|&i| self.gamma[i] * t[i]).collect();
        let shapes: Vec<f64> = indices
            .iter()
            .map(|&i| z.as_slice()[i] as f64 + beta[i])
            .collect();
        let lg_alpha = ln_gamma(alpha);
        let log_g = |u: f64| -> f64 {
            let v = u.exp();
            let mut lg = alpha * u - eta * v - lg_alpha;
            for (rate, shape) in rates.iter().zip(&shapes) {
                lg -= shape * (v / rate).ln_1p_safe();
            }
            lg
        };
        // scale by the max over a coarse scan so the adaptive pass works on
        // an O(1) integrand
        let (lo, hi) = (-40.0, 40.0);
        let mut m = f64::NEG_INFINITY;
        for k in 0..=160 {
            let u = lo + (hi - lo) * k as f64 / 160.0;
            m = m.max(log_g(u));
        }
        if !m.is_finite() {
            return Err(Error::Domain(
                "quadrature integrand vanished everywhere".into(),
            ));
        }
        let r = quad::integrate(|u| (log_g(u) - m).exp(), lo, hi, 1e-9);
        Ok(m + r.value.ln())
    }

    fn monte_carlo(&self, z: &CountVector, t: &[f64]) -> Result<FEstimate> {
        let n = self.settings.n_mc.max(1_000);
        let seed = self.mc_seed(z, t);
        let shapes: Vec<f64> = z
            .as_slice()
            .iter()
            .zip(self.prior.beta())
            .map(|(&zi, &bi)| zi as f64 + bi)
            .collect();
        let per_block = n / MC_BLOCKS;
        // fast rejection sampling here; the quantile-inversion coupling is
        // reserved for log_f_ratio where common random numbers pay off
        let gammas: Vec<rand_distr::Gamma<f64>> = shapes
            .iter()
            .map(|&shape| {
                rand_distr::Gamma::new(shape, 1.0)
                    .map_err(|e| Error::InvalidArgument(format!("gamma shape {shape}: {e}")))
            })
            .collect::<Result<_>>()?;
        let mut block_logs: Vec<Vec<f64>> = Vec::with_capacity(MC_BLOCKS);
        let mut theta = crate::problem::ThetaPoint(vec![0.0; shapes.len()]);
        for b in 0..MC_BLOCKS {
            let mut rng = rng::substream(seed, b as u64);
            let mut logs = Vec::with_capacity(per_block);
            for _ in 0..per_block {
                for (i, g) in gammas.iter().enumerate() {
                    let lam = rand_distr::Distribution::sample(g, &mut rng) / t[i];
                    theta.0[i] = (lam / self.gamma[i]).sqrt();
                }
                let lf = self.prior.eval_log_f(&theta)?;
                if lf.is_infinite() && lf > 0.0 {
                    return Err(Error::Singularity(
                        "f(theta) infinite at a Monte Carlo sample; rerun with epsilon > 0".into(),
                    ));
                }
                logs.push(lf);
            }
            block_logs.push(logs);
        }
        let est = if self.prior.epsilon() > 0.0 {
            // singular-smoothed family: heavy tails near the singular set,
            // use median-of-means over the blocks
            let mut block_means: Vec<f64> = block_logs
                .iter()
                .map(|logs| log_sum_exp(logs) - (logs.len() as f64).ln())
                .collect();
            block_means.sort_by(f64::total_cmp);
            let mid = block_means.len() / 2;
            let median = if block_means.len() % 2 == 0 {
                0.5 * (block_means[mid - 1] + block_means[mid])
            } else {
                block_means[mid]
            };
            let mean: f64 = block_means.iter().sum::<f64>() / block_means.len() as f64;
            let var: f64 = block_means
                .iter()
                .map(|m| (m - mean) * (m - mean))
                .sum::<f64>()
                / (block_means.len() as f64 - 1.0);
            (median, (var / block_means.len() as f64).sqrt())
        } else {
            let all: Vec<f64> = block_logs.into_iter().flatten().collect();
            log_mean_with_se(&all)
        };
        Ok(FEstimate {
            log_value: est.0,
            std_error: est.1,
            backend: Backend::MonteCarlo,
            n_samples: per_block * MC_BLOCKS,
            z: z.clone(),
            t: t.to_vec(),
        })
    }

    fn mc_seed(&self, z: &CountVector, t: &[f64]) -> u64 {
        let mut keys = vec![self.prior.key_hash()];
        keys.extend(z.as_slice().iter().copied());
        keys.extend(t.iter().map(|&ti| quantize(ti)));
        rng::mix_all(self.settings.seed, &keys)
    }

    /// `log F(z_num, t_num) - log F(z_den, t_den)` with a propagated error
    /// bound. The Monte Carlo path shares one uniform stream through both
    /// gamma inversions (common random numbers), so it bypasses the cache.
    pub fn log_f_ratio(
        &self,
        z_num: &CountVector,
        t_num: &[f64],
        z_den: &CountVector,
        t_den: &[f64],
    ) -> Result<(f64, f64)> {
        if z_num == z_den && t_num == t_den {
            return Ok((0.0, 0.0));
        }
        if self.terms.is_some() {
            let a = self.log_f(z_num, t_num)?;
            let b = self.log_f(z_den, t_den)?;
            return Ok((a.log_value - b.log_value, 0.0));
        }
        let n = self.settings.n_mc.max(1_000);
        let per_block = n / MC_BLOCKS;
        let d = self.prior.d();
        let seed = rng::mix(self.mc_seed(z_num, t_num), self.mc_seed(z_den, t_den));
        let shapes = |z: &CountVector| -> Vec<f64> {
            z.as_slice()
                .iter()
                .zip(self.prior.beta())
                .map(|(&zi, &bi)| zi as f64 + bi)
                .collect()
        };
        let (sh_num, sh_den) = (shapes(z_num), shapes(z_den));
        let mut block_diffs = Vec::with_capacity(MC_BLOCKS);
        let mut all_num = Vec::with_capacity(n);
        let mut all_den = Vec::with_capacity(n);
        for b in 0..MC_BLOCKS {
            let mut rng_b = rng::substream(seed, b as u64);
            let mut logs_num = Vec::with_capacity(per_block);
            let mut logs_den = Vec::with_capacity(per_block);
            let mut th_num = crate::problem::ThetaPoint(vec![0.0; d]);
            let mut th_den = crate::problem::ThetaPoint(vec![0.0; d]);
            for _ in 0..per_block {
                for i in 0..d {
                    let u: f64 = rand::Rng::gen(&mut rng_b);
                    let lam_num = gamma_quantile(sh_num[i], u) / t_num[i];
                    let lam_den = gamma_quantile(sh_den[i], u) / t_den[i];
                    th_num.0[i] = (lam_num / self.gamma[i]).sqrt();
                    th_den.0[i] = (lam_den / self.gamma[i]).sqrt();
                }
                let ln = self.prior.eval_log_f(&th_num)?;
                let ld = self.prior.eval_log_f(&th_den)?;
                if (ln.is_infinite() && ln > 0.0) || (ld.is_infinite() && ld > 0.0) {
                    return Err(Error::Singularity(
                        "f(theta) infinite at a Monte Carlo sample; rerun with epsilon > 0".into(),
                    ));
                }
                logs_num.push(ln);
                logs_den.push(ld);
            }
            let m_num = log_sum_exp(&logs_num) - (logs_num.len() as f64).ln();
            let m_den = log_sum_exp(&logs_den) - (logs_den.len() as f64).ln();
            block_diffs.push(m_num - m_den);
            all_num.extend(logs_num);
            all_den.extend(logs_den);
        }
        let value = (log_sum_exp(&all_num) - (all_num.len() as f64).ln())
            - (log_sum_exp(&all_den) - (all_den.len() as f64).ln());
        let mean: f64 = block_diffs.iter().sum::<f64>() / block_diffs.len() as f64;
        let var: f64 = block_diffs
            .iter()
            .map(|x| (x - mean) * (x - mean))
            .sum::<f64>()
            / (block_diffs.len() as f64 - 1.0);
        Ok((value, (var / block_diffs.len() as f64).sqrt()))
    }
}

/// `(log mean(exp(logs)), delta-method standard error of the log mean)`.
fn log_mean_with_se(logs: &[f64]) -> (f64, f64) {
    let n = logs.len() as f64;
    let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return (m, 0.0);
    }
    let w: Vec<f64> = logs.iter().map(|&l| (l - m).exp()).collect();
    let mean = w.iter().sum::<f64>() / n;
    let var = w.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt() / mean;
    (m + mean.ln(), se)
}

/// `ln(1 + x)` that tolerates enormous `x` without overflow concerns.
trait Ln1pSafe {
    fn ln_1p_safe(self) -> f64;
}

impl Ln1pSafe for f64 {
    fn ln_1p_safe(self) -> f64 {
        if self > 1e15 {
            self.ln()
        } else {
            self.ln_1p()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prior::{FPrior, Family};

    fn cv(v: &[u64]) -> CountVector {
        CountVector(v.to_vec())
    }

    fn shift_point(d: usize, alpha: f64, eta: f64, beta: f64) -> FPrior {
        FPrior::for_evaluation(Family::ShiftPoint { alpha, eta }, vec![beta; d], 0.0, d).unwrap()
    }

    #[test]
    fn constant_is_exactly_one() {
        let prior = FPrior::constant(3, vec![0.5; 3]).unwrap();
        let integ = FIntegrator::new(prior, vec![0.5; 3], FSettings::default()).unwrap();
        let est = integ.log_f(&cv(&[2, 0, 7]), &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(est.log_value, 0.0);
        assert_eq!(est.std_error, 0.0);
        assert_eq!(est.backend, Backend::Quadrature);
    }

    #[test]
    fn moment_closed_form_d1() {
        // eta = 0, d = 1: F(z, t) = (gamma t)^alpha Gamma(z+beta-alpha)/Gamma(z+beta)
        let prior = shift_point(1, 0.5, 0.0, 0.5);
        let integ = FIntegrator::new(prior, vec![1.0], FSettings::default()).unwrap();
        let est = integ.log_f(&cv(&[1]), &[1.0]).unwrap();
        let expect = (ln_gamma(1.0) - ln_gamma(1.5)).exp();
        assert!((est.log_value.exp() - expect).abs() < 1e-7 * expect);
        // Gamma(1)/Gamma(3/2) = 2/sqrt(pi)
        assert!((est.log_value.exp() - std::f64::consts::FRAC_2_SQRT_PI).abs() < 1e-6);
        for z in 1u64..=10 {
            for &t in &[0.5, 1.0, 3.0] {
                let est = integ.log_f(&cv(&[z]), &[t]).unwrap();
                let expect =
                    0.5 * t.ln() + ln_gamma(z as f64 + 0.5 - 0.5) - ln_gamma(z as f64 + 0.5);
                assert!(
                    (est.log_value - expect).abs() < 1e-7,
                    "z={z} t={t}: {} vs {expect}",
                    est.log_value
                );
            }
        }
    }

    #[test]
    fn ratio_closed_form() {
        let prior = shift_point(1, 0.5, 0.0, 0.5);
        let integ = FIntegrator::new(prior, vec![1.0], FSettings::default()).unwrap();
        let (r, se) = integ
            .log_f_ratio(&cv(&[2]), &[1.0], &cv(&[1]), &[1.0])
            .unwrap();
        assert_eq!(se, 0.0);
        assert!((r.exp() - 2.0 / 3.0).abs() < 1e-7);
    }

    #[test]
    fn integrability_guard() {
        // z = 0, beta = 1/2, d = 1: sum of shapes = 0.5 = alpha -> divergent
        let prior = shift_point(1, 0.5, 0.0, 0.5);
        let integ = FIntegrator::new(prior, vec![1.0], FSettings::default()).unwrap();
        assert!(matches!(
            integ.log_f(&cv(&[0]), &[1.0]),
            Err(Error::Integrability(_))
        ));
    }

    #[test]
    fn backend_agreement_shift_point() {
        let prior_q = shift_point(3, 0.5, 1.0, 0.5);
        // force the MC path through an equivalent family the router skips
        let prior_mc = FPrior::new(
            Family::SymPoint {
                alpha: 0.5,
                center: vec![0.0; 3],
            },
            vec![0.5; 3],
            0.0,
            3,
        )
        .unwrap();
        let settings = FSettings {
            n_mc: 100_000,
            seed: 7,
            ..FSettings::default()
        };
        let gq = FIntegrator::new(prior_q, vec![0.5; 3], settings.clone()).unwrap();
        let gm = FIntegrator::new(prior_mc, vec![0.5; 3], settings).unwrap();
        for (z, t) in [
            (vec![0u64, 0, 0], vec![1.0, 1.0, 1.0]),
            (vec![2, 1, 0], vec![2.0, 1.0, 0.5]),
            (vec![5, 5, 5], vec![1.0, 1.0, 1.0]),
        ] {
            let a = gq.log_f(&cv(&z), &t).unwrap();
            // SymPoint at center 0 sums the same term 2^d times
            let b = gm.log_f(&cv(&z), &t).unwrap();
            let b_adj = b.log_value - (8.0f64).ln();
            // SymPoint has eps where ShiftPoint has eta; only comparable with
            // eta = eps: here eta = 1 vs eps = 0, so compare against the
            // eta = 0 quadrature instead
            let gq0 = FIntegrator::new(
                shift_point(3, 0.5, 0.0, 0.5),
                vec![0.5; 3],
                FSettings::default(),
            )
            .unwrap();
            let a0 = gq0.log_f(&cv(&z), &t).unwrap();
            assert!(
                (b_adj - a0.log_value).abs() <= 4.0 * b.std_error.max(1e-4),
                "z={z:?} quad={} mc={} se={}",
                a0.log_value,
                b_adj,
                b.std_error
            );
            let _ = a;
        }
    }

    #[test]
    fn sum_additivity() {
        let f1 = Family::ShiftPoint {
            alpha: 0.5,
            eta: 1.0,
        };
        let f2 = Family::CoordSubspace {
            alpha: 0.5,
            indices: vec![0, 1, 2],
        };
        let beta = vec![0.5; 4];
        let gamma = vec![0.5; 4];
        let sum = FPrior::new(
            Family::Sum(vec![f1.clone(), f2.clone()]),
            beta.clone(),
            1e-4,
            4,
        )
        .unwrap();
        let p1 = FPrior::new(f1, beta.clone(), 1e-4, 4).unwrap();
        let p2 = FPrior::new(f2, beta.clone(), 1e-4, 4).unwrap();
        let gs = FIntegrator::new(sum, gamma.clone(), FSettings::default()).unwrap();
        let g1 = FIntegrator::new(p1, gamma.clone(), FSettings::default()).unwrap();
        let g2 = FIntegrator::new(p2, gamma, FSettings::default()).unwrap();
        let mut rng = crate::rng::substream(3, 0);
        use rand::Rng;
        for _ in 0..50 {
            let z: Vec<u64> = (0..4).map(|_| rng.gen_range(0..8)).collect();
            let t: Vec<f64> = (0..4).map(|_| rng.gen_range(0.5..4.0)).collect();
            let s = gs.log_f(&cv(&z), &t).unwrap().log_value.exp();
            let a = g1.log_f(&cv(&z), &t).unwrap().log_value.exp();
            let b = g2.log_f(&cv(&z), &t).unwrap().log_value.exp();
            assert!(
                (s - (a + b)).abs() < 1e-6 * (a + b),
                "z={z:?} t={t:?}: {s} vs {}",
                a + b
            );
        }
    }

    #[test]
    fn cache_returns_identical_bits_and_counts_hits() {
        let prior = shift_point(2, 0.5, 1.0, 1.0);
        let integ = FIntegrator::new(prior, vec![0.5; 2], FSettings::default()).unwrap();
        let a = integ.log_f(&cv(&[1, 2]), &[1.0, 1.0]).unwrap();
        let b = integ.log_f(&cv(&[1, 2]), &[1.0, 1.0]).unwrap();
        assert_eq!(a.log_value.to_bits(), b.log_value.to_bits());
        let (hits, misses) = integ.cache_stats();
        assert_eq!((hits, misses), (1, 1));
    }

    #[test]
    fn mc_is_seed_deterministic() {
        let prior = FPrior::new(
            Family::SymPoint {
                alpha: 0.5,
                center: vec![2.0; 3],
            },
            vec![0.5; 3],
            0.0,
            3,
        )
        .unwrap();
        let settings = FSettings {
            n_mc: 10_000,
            seed: 42,
            cache_enabled: false,
            ..FSettings::default()
        };
        let g1 = FIntegrator::new(prior.clone(), vec![0.5; 3], settings.clone()).unwrap();
        let g2 = FIntegrator::new(prior, vec![0.5; 3], settings).unwrap();
        let a = g1.log_f(&cv(&[1, 1, 1]), &[1.0; 3]).unwrap();
        let b = g2.log_f(&cv(&[1, 1, 1]), &[1.0; 3]).unwrap();
        assert_eq!(a.log_value.to_bits(), b.log_value.to_bits());
        assert_eq!(a.backend, Backend::MonteCarlo);
        assert!(a.std_error > 0.0);
    }

    #[test]
    fn mc_ratio_common_random_numbers_beats_independent() {
        let prior = FPrior::new(
            Family::SymPoint {
                alpha: 0.5,
                center: vec![2.0; 3],
            },
            vec![0.5; 3],
            0.0,
            3,
        )
        .unwrap();
        let settings = FSettings {
            n_mc: 20_000,
            seed: 5,
            ..FSettings::default()
        };
        let g = FIntegrator::new(prior, vec![0.5; 3], settings).unwrap();
        // neighbouring z at identical t: the estimator-ratio case CRN targets
        let (r, se) = g
            .log_f_ratio(&cv(&[2, 1, 1]), &[1.0; 3], &cv(&[1, 1, 1]), &[1.0; 3])
            .unwrap();
        assert!(r.is_finite());
        let a = g.log_f(&cv(&[2, 1, 1]), &[1.0; 3]).unwrap();
        let b = g.log_f(&cv(&[1, 1, 1]), &[1.0; 3]).unwrap();
        let se_indep = (a.std_error * a.std_error + b.std_error * b.std_error).sqrt();
        assert!(se < se_indep, "crn se {se} vs independent {se_indep}");
        assert!((r - (a.log_value - b.log_value)).abs() < 4.0 * (se + se_indep));
    }

    #[test]
    fn singular_point_evaluates_to_infinity() {
        // hitting the singular set exactly has probability zero under the
        // sampler, so probe the eval guard directly
        let prior = FPrior::new(
            Family::SymPoint {
                alpha: 0.5,
                center: vec![2.0; 3],
            },
            vec![0.5; 3],
            0.0,
            3,
        )
        .unwrap();
        // direct probe of the guard
        let lf = prior
            .eval_log_f(&crate::problem::ThetaPoint(vec![2.0, 2.0, 2.0]))
            .unwrap();
        assert!(lf.is_infinite() && lf > 0.0);
    }
}
