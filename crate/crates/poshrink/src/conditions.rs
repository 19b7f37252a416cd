//! Grid verification of the dominance sufficient conditions.
//!
//! The theorems quantify over every count vector `z` and every duration
//! vector `r`; a finite check can refute but never prove them. Reports
//! therefore always carry the grid they covered.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::f_integral::{Backend, FIntegrator};
use crate::prior::{validate_family, Family};
use crate::problem::CountVector;

/// Grid actually covered by a [`check_fineq`] run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridInfo {
    pub z_max: u64,
    pub r_grid: Vec<Vec<f64>>,
    pub n_points: usize,
    pub tol_rel: f64,
}

/// Verdict of the lattice inequality check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FineqReport {
    pub prior: String,
    pub grid: GridInfo,
    /// Smallest normalized left-hand side seen.
    pub min_lhs: f64,
    pub argmin_z: Vec<u64>,
    pub argmin_r: Vec<f64>,
    pub pass: bool,
}

/// Check the dominance inequality
/// `sum_i gamma_i r_i z_i {F(z,r) - F(z-d_i,r)} + sum_i gamma_i r_i (z_i +
/// beta_i) {F(z,r) - F(z+d_i,r)} >= 0`
/// for every `z` with `sum z <= z_max` and every `r` in `r_grid`, normalizing
/// each left-hand side by `sum_i gamma_i r_i (z_i + beta_i) F(z,r)` so the
/// tolerance is scale-free.
pub fn check_fineq(
    integ: &FIntegrator,
    r_grid: &[Vec<f64>],
    z_max: u64,
    tol_rel: f64,
) -> Result<FineqReport> {
    let d = integ.prior().d();
    if z_max > 30 * d as u64 {
        return Err(Error::InvalidArgument(format!(
            "z_max = {z_max} exceeds the 30*d = {} cost guard",
            30 * d
        )));
    }
    if r_grid.is_empty() {
        return Err(Error::InvalidArgument("empty r grid".into()));
    }
    for r in r_grid {
        if r.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: r.len(),
                context: "r grid entry".into(),
            });
        }
    }
    let beta = integ.prior().beta();
    let gamma = integ.gamma();
    let lattice = enumerate_simplex(d, z_max);
    let mut min_lhs = f64::INFINITY;
    let mut argmin_z = vec![0u64; d];
    let mut argmin_r = r_grid[0].clone();
    let mut n_points = 0usize;
    let mut pass = true;
    for r in r_grid {
        for z in &lattice {
            let ez = integ.log_f(z, r)?;
            let fz = ez.log_value.exp();
            let mut lhs = 0.0;
            let mut scale = 0.0;
            // F appears with several coefficients; accumulate the delta-
            // method variance of the LHS from the per-estimate log-scale se
            let mut coef_z = 0.0;
            let mut var = 0.0;
            for i in 0..d {
                let zi = z.as_slice()[i] as f64;
                let c = gamma[i] * r[i];
                if z.as_slice()[i] > 0 {
                    let em = integ.log_f(&z.minus_unit(i).unwrap(), r)?;
                    let fm = em.log_value.exp();
                    lhs += c * zi * (fz - fm);
                    var += (c * zi * fm * em.std_error).powi(2);
                    coef_z += c * zi;
                }
                let ep = integ.log_f(&z.plus_unit(i), r)?;
                let fp = ep.log_value.exp();
                lhs += c * (zi + beta[i]) * (fz - fp);
                var += (c * (zi + beta[i]) * fp * ep.std_error).powi(2);
                coef_z += c * (zi + beta[i]);
                scale += c * (zi + beta[i]) * fz;
            }
            var += (coef_z * fz * ez.std_error).powi(2);
            let norm = lhs / scale;
            let norm_se = var.sqrt() / scale;
            n_points += 1;
            if norm < min_lhs {
                min_lhs = norm;
                argmin_z = z.as_slice().to_vec();
                argmin_r = r.clone();
            }
            // a point fails only if it is negative beyond both the requested
            // tolerance and its own Monte Carlo noise
            if norm < -(tol_rel + 5.0 * norm_se) {
                pass = false;
            }
        }
    }
    Ok(FineqReport {
        prior: prior_label(integ.prior().family()),
        grid: GridInfo {
            z_max,
            r_grid: r_grid.to_vec(),
            n_points,
            tol_rel,
        },
        min_lhs,
        argmin_z,
        argmin_r,
        pass,
    })
}

/// Default inequality tolerance: tight for the exact backend, proportional
/// to Monte Carlo noise otherwise.
pub fn default_fineq_tol(integ: &FIntegrator, typical_se: f64) -> f64 {
    match integ.backend() {
        Backend::Quadrature => 1e-6,
        Backend::MonteCarlo => 5.0 * typical_se,
    }
}

/// All `z` in `N^d` with `sum z <= z_max`, sorted by `(sum z, lexicographic)`.
fn enumerate_simplex(d: usize, z_max: u64) -> Vec<CountVector> {
    let mut out = Vec::new();
    let mut z = vec![0u64; d];
    fn rec(out: &mut Vec<Vec<u64>>, z: &mut Vec<u64>, i: usize, remaining: u64) {
        if i == z.len() {
            out.push(z.clone());
            return;
        }
        for v in 0..=remaining {
            z[i] = v;
            rec(out, z, i + 1, remaining - v);
        }
        z[i] = 0;
    }
    let mut raw = Vec::new();
    rec(&mut raw, &mut z, 0, z_max);
    raw.sort_by(|a, b| {
        let (sa, sb) = (a.iter().sum::<u64>(), b.iter().sum::<u64>());
        sa.cmp(&sb).then_with(|| a.cmp(b))
    });
    out.extend(raw.into_iter().map(CountVector));
    out
}

/// True iff `F` varies over the axis points `{0, z_max * e_i}` by more than
/// the combined numerical error (the theorems' nonconstancy hypothesis).
pub fn check_nonconstant_f(integ: &FIntegrator, r: &[f64], z_max: u64) -> Result<bool> {
    let d = integ.prior().d();
    let mut probes = vec![CountVector(vec![0; d])];
    for i in 0..d {
        let mut z = vec![0u64; d];
        z[i] = z_max.max(1);
        probes.push(CountVector(z));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut err = 0.0;
    let mut evaluated = 0;
    for z in &probes {
        match integ.log_f(z, r) {
            Ok(est) => {
                lo = lo.min(est.log_value);
                hi = hi.max(est.log_value);
                err += est.std_error;
                evaluated += 1;
            }
            // a divergent corner (small shape sum) says nothing about
            // constancy; skip it
            Err(Error::Integrability(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    if evaluated < 2 {
        return Err(Error::Integrability(
            "too few evaluable lattice points to assess nonconstancy".into(),
        ));
    }
    Ok(hi - lo > 3.0 * err + 1e-9)
}

/// Which dominance proposition, if any, a built-in family satisfies.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertifyVerdict {
    pub certified: bool,
    /// Human-readable hypothesis that applies, e.g. "point shrinkage
    /// (0 < alpha <= sum(beta) - 1)".
    pub hypothesis: Option<String>,
    pub reasons: Vec<String>,
}

/// Arithmetic check of the analytic hypotheses (alpha ranges, orthonormality,
/// nonnegative shifts) — no integration. The unsymmetrized point family is
/// never certified: it is the counterexample.
pub fn certify_builtin(family: &Family, beta: &[f64], d: usize) -> CertifyVerdict {
    let beta_sum: f64 = beta.iter().sum();
    let mut reasons = Vec::new();
    if beta.len() != d || beta.iter().any(|b| !(*b > 0.0)) {
        reasons.push("beta must be a length-d vector of positive reals".into());
        return CertifyVerdict {
            certified: false,
            hypothesis: None,
            reasons,
        };
    }
    if let Err(e) = validate_family(family, d, beta_sum, true) {
        reasons.push(e.to_string());
        return CertifyVerdict {
            certified: false,
            hypothesis: None,
            reasons,
        };
    }
    let hypothesis = hypothesis_for(family, beta_sum, d);
    match hypothesis {
        Some(h) => CertifyVerdict {
            certified: true,
            hypothesis: Some(h),
            reasons,
        },
        None => {
            reasons
                .push("family carries no dominance guarantee (unsymmetrized or constant)".into());
            CertifyVerdict {
                certified: false,
                hypothesis: None,
                reasons,
            }
        }
    }
}

fn hypothesis_for(family: &Family, beta_sum: f64, d: usize) -> Option<String> {
    match family {
        Family::Constant => None,
        Family::HarmonicPoint { .. } => None,
        Family::ShiftPoint { .. } => Some(format!(
            "point shrinkage toward the origin (0 < alpha <= sum(beta) - 1 = {})",
            beta_sum - 1.0
        )),
        Family::SymPoint { .. } => Some(format!(
            "symmetrized point shrinkage (0 < alpha <= (d-2)/2 = {})",
            (d as f64 - 2.0) / 2.0
        )),
        Family::SymSubspace { vperp, .. } => Some(format!(
            "symmetrized subspace shrinkage (0 < alpha <= (d-k-2)/2 = {})",
            (vperp.len() as f64 - 2.0) / 2.0
        )),
        Family::CoordSubspace { indices, .. } => Some(format!(
            "coordinate-subspace shrinkage (0 < alpha <= (|S|-2)/2 = {})",
            (indices.len() as f64 - 2.0) / 2.0
        )),
        Family::Sum(parts) => {
            let subs: Option<Vec<String>> = parts
                .iter()
                .map(|p| hypothesis_for(p, beta_sum, d))
                .collect();
            subs.map(|v| format!("additive mixture of certified parts: [{}]", v.join("; ")))
        }
    }
}

fn prior_label(family: &Family) -> String {
    match family {
        Family::Constant => "constant".into(),
        Family::ShiftPoint { alpha, eta } => format!("shift-point:alpha={alpha},eta={eta}"),
        Family::SymPoint { alpha, center } => {
            format!("sym-point:alpha={alpha},center={center:?}")
        }
        Family::SymSubspace { alpha, vperp } => {
            format!("sym-subspace:alpha={alpha},k_perp={}", vperp.len())
        }
        Family::CoordSubspace { alpha, indices } => {
            format!("coord-subspace:alpha={alpha},indices={indices:?}")
        }
        Family::HarmonicPoint { alpha, center } => {
            format!("harmonic-point:alpha={alpha},center={center:?}")
        }
        Family::Sum(parts) => format!(
            "sum:({})",
            parts
                .iter()
                .map(prior_label)
                .collect::<Vec<_>>()
                .join(")+(")
        ),
    }
}
