//! Anisotropic space-time norms, Sobolev norms, dual norms and the trace
//! inequality.
//!
//! Following the usual convention, `‖u‖_{W^{1,0}_{s,l}} = ‖u‖ + ‖∇u‖` and
//! `‖u‖_{W^{2,1}_{s,l}} = ‖u‖ + ‖∇u‖ + ‖∇²u‖ + ‖∂_t u‖`, each term an
//! `L_{s,l}` norm. Time integrals use the trapezoid rule of the time grid.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::elliptic::{first_eigenpair, solve_dirichlet};
use crate::error::{Error, Result};
use crate::field::{DiscField, Rank, SpaceTimeField};
use crate::grid::{DiscGrid, SpaceTimeGrid};
use crate::ops::{disc_inner, gradient, gradient_norm, hessian_norm, integrate_disc};
use crate::trace::BoundaryTrace;

/// Integrability exponents `(s, l)` in space and time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormOrder {
    s: f64,
    l: f64,
}

impl NormOrder {
    pub fn new(s: f64, l: f64) -> Result<Self> {
        for (name, v) in [("s", s), ("l", l)] {
            if !(v > 1.0) || !v.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "{name} must lie in (1, inf), got {v}"
                )));
            }
        }
        Ok(Self { s, l })
    }

    pub fn hilbert() -> Self {
        Self { s: 2.0, l: 2.0 }
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    /// Conjugate exponent `s / (s − 1)`.
    pub fn s_dual(&self) -> f64 {
        self.s / (self.s - 1.0)
    }
}

impl Default for NormOrder {
    fn default() -> Self {
        Self::hilbert()
    }
}

/// Named norm values and measured constant ratios.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub values: BTreeMap<String, f64>,
    pub ratios: BTreeMap<String, f64>,
}

fn check_entry(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "report entry {name} = {v} is not a finite nonnegative number"
        )))
    }
}

impl NormReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: &str, value: f64) -> Result<()> {
        check_entry(name, value)?;
        self.values.insert(name.to_string(), value);
        Ok(())
    }

    pub fn insert_ratio(&mut self, name: &str, value: f64) -> Result<()> {
        check_entry(name, value)?;
        self.ratios.insert(name.to_string(), value);
        Ok(())
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }

    pub fn ratio(&self, name: &str) -> Option<f64> {
        self.ratios.get(name).copied()
    }

    /// Key/value CSV with columns `kind,name,value`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::InvalidInput(format!("csv: {e}"));
        w.write_record(["kind", "name", "value"]).map_err(io)?;
        for (kind, map) in [("norm", &self.values), ("ratio", &self.ratios)] {
            for (k, v) in map {
                w.write_record([kind, k.as_str(), &v.to_string()])
                    .map_err(io)?;
            }
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// `(∫ φ(t)^l dt)^{1/l}` for per-slice values `φ(t_k)` by the trapezoid rule.
pub fn time_norm(time: &SpaceTimeGrid, per_slice: &[f64], l: f64) -> f64 {
    time.trapezoid_weights()
        .iter()
        .zip(per_slice)
        .map(|(w, v)| w * v.powf(l))
        .sum::<f64>()
        .powf(1.0 / l)
}

fn per_slice<F>(u: &SpaceTimeField, f: F) -> Result<Vec<f64>>
where
    F: Fn(&DiscField) -> Result<f64> + Sync + Send,
{
    use rayon::prelude::*;
    u.slices().par_iter().map(f).collect()
}

/// `‖u‖_{L_{s,l}}`.
pub fn norm_lsl(u: &SpaceTimeField, o: NormOrder) -> Result<f64> {
    let v = per_slice(u, |f| integrate_disc(f, o.s))?;
    Ok(time_norm(u.time(), &v, o.l))
}

/// `‖∇u‖_{L_{s,l}}`.
pub fn norm_gradient_lsl(u: &SpaceTimeField, o: NormOrder) -> Result<f64> {
    let v = per_slice(u, |f| gradient_norm(f, o.s))?;
    Ok(time_norm(u.time(), &v, o.l))
}

/// `‖∇²u‖_{L_{s,l}}`.
pub fn norm_hessian_lsl(u: &SpaceTimeField, o: NormOrder) -> Result<f64> {
    let v = per_slice(u, |f| hessian_norm(f, o.s))?;
    Ok(time_norm(u.time(), &v, o.l))
}

pub fn norm_w10(u: &SpaceTimeField, o: NormOrder) -> Result<f64> {
    Ok(norm_lsl(u, o)? + norm_gradient_lsl(u, o)?)
}

pub fn norm_w21(u: &SpaceTimeField, o: NormOrder) -> Result<f64> {
    let dt = u.time_derivative()?;
    Ok(norm_w10(u, o)? + norm_hessian_lsl(u, o)? + norm_lsl(&dt, o)?)
}

/// `‖f‖_{W^1_s(Ω)} = ‖f‖_{L_s} + ‖∇f‖_{L_s}`.
pub fn norm_w1(f: &DiscField, s: f64) -> Result<f64> {
    Ok(integrate_disc(f, s)? + gradient_norm(f, s)?)
}

/// `‖f‖_{W^2_s(Ω)} = ‖f‖_{L_s} + ‖∇f‖_{L_s} + ‖∇²f‖_{L_s}`.
pub fn norm_w2(f: &DiscField, s: f64) -> Result<f64> {
    Ok(norm_w1(f, s)? + hessian_norm(f, s)?)
}

/// Exact `W^{-1}_2(Ω)` norm: `‖∇φ‖_{L_2}` with `Δφ = g`, `φ|_{∂Ω} = 0`.
pub fn dual_norm(g: &DiscField) -> Result<f64> {
    let phi = solve_dirichlet(g)?.phi;
    integrate_disc(&gradient(&phi)?, 2.0)
}

/// `‖g‖_{L_l(W^{-1}_2)}` of a scalar space-time field.
pub fn norm_l_dual(g: &SpaceTimeField, l: f64) -> Result<f64> {
    let v = per_slice(g, dual_norm)?;
    Ok(time_norm(g.time(), &v, l))
}

/// Test fields of [`dual_norm_estimate`]: first Dirichlet eigenfunctions of
/// each angular mode in both phases.
pub fn eigen_dictionary(grid: &DiscGrid, max_mode: usize) -> Result<Vec<DiscField>> {
    let mut out = Vec::new();
    for m in 0..=max_mode.min(grid.n_theta()) {
        let (_, cos_part) = first_eigenpair(grid, m)?;
        if m > 0 {
            let mut sin_part = cos_part.clone();
            for c in sin_part.mode_mut(0, m) {
                *c *= num_complex::Complex64::new(0.0, -1.0);
            }
            out.push(sin_part);
        }
        out.push(cos_part);
    }
    Ok(out)
}

/// Lower estimate of `‖g‖_{W^{-1}_s(Ω)}`: the largest `|∫ g w| / ‖∇w‖_{L_{s'}}`
/// over the eigenfunction dictionary and the Poisson solution of `g`. Exact
/// for `s = 2`, where the Poisson solution is the maximizer.
pub fn dual_norm_estimate(g: &DiscField, o: NormOrder) -> Result<f64> {
    g.expect_rank(Rank::Scalar)?;
    let mut tests = eigen_dictionary(g.grid(), 8)?;
    tests.push(solve_dirichlet(g)?.phi);
    let mut best: f64 = 0.0;
    for w in &tests {
        let den = gradient_norm(w, o.s_dual())?;
        if den > 0.0 {
            best = best.max(disc_inner(g, w)?.abs() / den);
        }
    }
    Ok(best)
}

/// `1/√λ₁`, the Poincaré constant of the disc, from the computed first
/// Dirichlet eigenvalue.
pub fn poincare_constant(grid: &DiscGrid) -> Result<f64> {
    let (lambda, _) = first_eigenpair(grid, 0)?;
    Ok(1.0 / lambda.sqrt())
}

/// `(∫_0^{2π} |f(1, θ)|^s dθ)^{1/s}` of a scalar field.
pub fn trace_norm(f: &DiscField, s: f64) -> Result<f64> {
    f.expect_rank(Rank::Scalar)?;
    BoundaryTrace::of_field(f, 0).norm(s)
}

/// `‖f‖_{L_s(∂Ω)} / (‖f‖_{L_s(Ω)}^{1/s'} ‖f‖_{W^1_s(Ω)}^{1/s})`; zero for `f = 0`.
pub fn trace_inequality_ratio(f: &DiscField, s: f64) -> Result<f64> {
    let t = trace_norm(f, s)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let s_dual = s / (s - 1.0);
    let den = integrate_disc(f, s)?.powf(1.0 / s_dual) * norm_w1(f, s)?.powf(1.0 / s);
    Ok(t / den)
}
