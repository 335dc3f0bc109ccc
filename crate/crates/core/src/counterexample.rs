//! The explicit weak solution of the Stokes problem on `Ω × (−1, 0)` that is
//! not strong.
//!
//! With `T_n(t) = 1/(n³(1 − n⁷t))`:
//!
//! * `ψ = Σ r^n sin nθ T_n / n`, harmonic in space;
//! * `w = Σ α_n(r) T_n (sin nθ e_r + cos nθ e_θ)`, which in Cartesian
//!   components is `Σ α_n T_n (sin kθ, cos kθ)` with `k = n − 1`;
//! * `v = χ(w − ∇ψ)`, `p = χ ∂_t ψ`, `f = χ(∂_t w − Δw) + χ'(w − ∇ψ)`,
//!   `g = χ div w`.
//!
//! `∇ψ = Σ r^{n−1} T_n (sin kθ, cos kθ)` has the same angular structure as `w`,
//! so every per-mode norm reduces to a radial integral times a time integral.
//! Radial integrals use Gauss rules placed inside the layer `1 − n⁻³ < r < 1`
//! and time integrals are exact on `[−1/3, 0]`, where `χ ≡ 1`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{DiscField, SpaceTimeField};
use crate::grid::{DiscGrid, SpaceTimeGrid};
use crate::norms::NormReport;
use crate::quadrature::{gauss_legendre_on, graded_towards_end, Rule};

/// Truncation and sampling parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CounterexampleSpec {
    /// Number of series terms kept.
    pub modes: usize,
    /// Sampled fields live on `[−1, −ε]`; the norm table integrates up to 0.
    pub eps: f64,
    pub n_r: usize,
    pub n_theta: usize,
    pub n_t: usize,
}

impl CounterexampleSpec {
    pub fn new(modes: usize, eps: f64) -> Result<Self> {
        if modes < 1 {
            return Err(Error::InvalidInput("at least one mode is required".into()));
        }
        if !(eps > 0.0 && eps < 1.0 / 3.0) {
            return Err(Error::InvalidInput(format!(
                "eps must lie in (0, 1/3), got {eps}"
            )));
        }
        Ok(Self {
            modes,
            eps,
            n_r: 64,
            n_theta: modes + 1,
            n_t: 32,
        })
    }

    pub fn with_grid(mut self, n_r: usize, n_theta: usize, n_t: usize) -> Self {
        self.n_r = n_r;
        self.n_theta = n_theta;
        self.n_t = n_t;
        self
    }

    pub fn grid(&self) -> Result<DiscGrid> {
        DiscGrid::new(self.n_r, self.n_theta)
    }

    pub fn time(&self) -> Result<SpaceTimeGrid> {
        SpaceTimeGrid::new(-1.0, -self.eps, self.n_t)
    }
}

/// The boundary-layer profile
/// `α_n(r) = (3n⁶ − n⁴ + n³)(r − 1 + n⁻³)² − (2n⁹ − n⁷ + n⁶)(r − 1 + n⁻³)³`
/// on `(1 − n⁻³, 1]`, zero below.
///
/// Evaluation uses `σ = n³(r − 1 + n⁻³) ∈ [0, 1]`, in which
/// `α = pσ² − qσ³` with `p = 3 − n⁻² + n⁻³`, `q = 2 − n⁻² + n⁻³`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaProfile {
    n: usize,
    p: f64,
    q: f64,
    width: f64,
}

impl AlphaProfile {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "mode index starts at 1");
        let nf = n as f64;
        let (i2, i3) = (nf.powi(-2), nf.powi(-3));
        Self {
            n,
            p: 3.0 - i2 + i3,
            q: 2.0 - i2 + i3,
            width: i3,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Layer width `n⁻³`.
    pub fn width(&self) -> f64 {
        self.width
    }

    /// Coefficients `(3n⁶ − n⁴ + n³, 2n⁹ − n⁷ + n⁶)` of the expanded form.
    pub fn coefficients(&self) -> (f64, f64) {
        let nf = self.n as f64;
        (
            3.0 * nf.powi(6) - nf.powi(4) + nf.powi(3),
            2.0 * nf.powi(9) - nf.powi(7) + nf.powi(6),
        )
    }

    /// `[α, α', α'']` at depth `y = 1 − r`.
    pub fn at_depth(&self, y: f64) -> [f64; 3] {
        if y >= self.width {
            return [0.0; 3];
        }
        let s = 1.0 - y / self.width;
        let n3 = (self.n as f64).powi(3);
        [
            s * s * (self.p - self.q * s),
            n3 * s * (2.0 * self.p - 3.0 * self.q * s),
            n3 * n3 * (2.0 * self.p - 6.0 * self.q * s),
        ]
    }

    pub fn value(&self, r: f64) -> f64 {
        self.at_depth(1.0 - r)[0]
    }

    pub fn derivative(&self, r: f64) -> f64 {
        self.at_depth(1.0 - r)[1]
    }

    pub fn second_derivative(&self, r: f64) -> f64 {
        self.at_depth(1.0 - r)[2]
    }

    /// Gauss rule in depth on `[0, n⁻³]`.
    fn layer_rule(&self, points: usize) -> Rule {
        gauss_legendre_on(points, 0.0, self.width)
    }
}

pub fn alpha(n: usize, r: f64) -> f64 {
    AlphaProfile::new(n).value(r)
}

/// Results of checking the four groups of conditions on `α_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaChecks {
    pub n: usize,
    pub value_at_one: f64,
    pub slope_at_one: f64,
    /// `α` and `α'` at the inner edge `1 − n⁻³`.
    pub inner_value: f64,
    pub inner_slope: f64,
    /// `max |α'| / n³` and `max |α''| / n⁶`.
    pub first_derivative_constant: f64,
    pub second_derivative_constant: f64,
    /// `0 < α < 1` at every sampled point strictly inside the layer.
    pub strictly_between: bool,
    /// The expanded and the scaled forms agree at the sampled points.
    pub expansion_mismatch: f64,
}

impl AlphaChecks {
    /// Round-off allowance for the conditions: evaluating `α'` involves a
    /// cancellation amplified by `n³`.
    pub fn tolerance(&self) -> f64 {
        64.0 * f64::EPSILON * (self.n as f64).powi(3)
    }

    pub fn constant(&self) -> f64 {
        self.first_derivative_constant
            .max(self.second_derivative_constant)
    }

    pub fn passed(&self, max_constant: f64) -> bool {
        let tol = self.tolerance();
        (self.value_at_one - 1.0).abs() <= tol
            && (self.slope_at_one - (self.n as f64 - 1.0)).abs() <= tol
            && self.inner_value.abs() <= tol
            && self.inner_slope.abs() <= tol
            && self.strictly_between
            && self.expansion_mismatch <= 1e-6
            && self.constant() <= max_constant
    }
}

pub fn alpha_checks(n: usize) -> AlphaChecks {
    let a = AlphaProfile::new(n);
    let nf = n as f64;
    let [v1, d1, _] = a.at_depth(0.0);
    let edge = a.at_depth(a.width * (1.0 - f64::EPSILON));
    let samples = 2001;
    let mut c1: f64 = 0.0;
    let mut c2: f64 = 0.0;
    let mut between = true;
    let mut mismatch: f64 = 0.0;
    let (k2, k3) = a.coefficients();
    let mut depths: Vec<f64> = (0..samples)
        .map(|i| a.width * i as f64 / (samples - 1) as f64)
        .collect();
    // Interior maximum of |α'| sits at σ = p/(3q).
    depths.push(a.width * (1.0 - a.p / (3.0 * a.q)));
    for &y in &depths {
        let [v, d, dd] = a.at_depth(y);
        c1 = c1.max(d.abs() / nf.powi(3));
        c2 = c2.max(dd.abs() / nf.powi(6));
        if y > 0.0 && y < a.width && !(v > 0.0 && v < 1.0) {
            between = false;
        }
        let s = a.width - y;
        let expanded = k2 * s * s - k3 * s * s * s;
        mismatch = mismatch.max((expanded - v).abs());
    }
    AlphaChecks {
        n,
        value_at_one: v1,
        slope_at_one: d1,
        inner_value: edge[0],
        inner_slope: edge[1],
        first_derivative_constant: c1,
        second_derivative_constant: c2,
        strictly_between: between,
        expansion_mismatch: mismatch,
    }
}

/// Time cutoff: `0` on `[−1, −2/3]`, `1` on `[−1/3, 0]`, quintic smoothstep
/// in between.
pub fn cutoff(t: f64) -> f64 {
    let x = (3.0 * t + 2.0).clamp(0.0, 1.0);
    x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
}

pub fn cutoff_derivative(t: f64) -> f64 {
    let x = 3.0 * t + 2.0;
    if !(0.0..=1.0).contains(&x) {
        return 0.0;
    }
    90.0 * x * x * (1.0 - x) * (1.0 - x)
}

/// `T_n(t) = 1/(n³(1 − n⁷t))` and its time derivative `n⁴/(1 − n⁷t)²`.
pub fn time_factor(n: usize, t: f64) -> (f64, f64) {
    let nf = n as f64;
    let d = 1.0 - nf.powi(7) * t;
    (1.0 / (nf.powi(3) * d), nf.powi(4) / (d * d))
}

/// Pointwise values of the truncated series, vectors in Cartesian components.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PointValues {
    pub psi: f64,
    pub w: [f64; 2],
    pub grad_psi: [f64; 2],
    pub v: [f64; 2],
    pub p: f64,
    pub f: [f64; 2],
    pub g: f64,
    pub div_w: f64,
}

/// Evaluates the series with `modes` terms at `(r, θ, t)`, `r > 0`.
pub fn evaluate(modes: usize, r: f64, theta: f64, t: f64) -> PointValues {
    evaluate_at_depth(modes, 1.0 - r, theta, t)
}

fn evaluate_at_depth(modes: usize, y: f64, theta: f64, t: f64) -> PointValues {
    let r = 1.0 - y;
    let chi = cutoff(t);
    let dchi = cutoff_derivative(t);
    let mut out = PointValues::default();
    let mut dtw = [0.0; 2];
    let mut lapw = [0.0; 2];
    for n in 1..=modes {
        let nf = n as f64;
        let kf = nf - 1.0;
        let (sk, ck) = (kf * theta).sin_cos();
        let sn = (nf * theta).sin();
        let (tn, dtn) = time_factor(n, t);
        let [a, da, dda] = AlphaProfile::new(n).at_depth(y);
        let rk = r.powi(n as i32 - 1);
        out.psi += rk * r * sn * tn / nf;
        out.p += rk * r * sn * dtn / nf;
        for (i, s) in [sk, ck].into_iter().enumerate() {
            out.w[i] += a * tn * s;
            out.grad_psi[i] += rk * tn * s;
            dtw[i] += a * dtn * s;
            lapw[i] += (dda + da / r - kf * kf * a / (r * r)) * tn * s;
        }
        out.div_w += (da + a / r - nf * a / r) * tn * sn;
    }
    for i in 0..2 {
        let rest = out.w[i] - out.grad_psi[i];
        out.v[i] = chi * rest;
        out.f[i] = chi * (dtw[i] - lapw[i]) + dchi * rest;
    }
    out.p *= chi;
    out.g = chi * out.div_w;
    out
}

/// The sampled fields on the grid of the given parameters over `[−1, −ε]`.
#[derive(Debug, Clone)]
pub struct CounterexampleFields {
    pub psi: SpaceTimeField,
    pub w: SpaceTimeField,
    pub v: SpaceTimeField,
    pub p: SpaceTimeField,
    pub f: SpaceTimeField,
    pub g: SpaceTimeField,
}

pub fn eval_fields(spec: &CounterexampleSpec) -> Result<CounterexampleFields> {
    let grid = spec.grid()?;
    let time = spec.time()?;
    let n = spec.modes;
    let at = |t: f64, pick: fn(&PointValues) -> f64| {
        DiscField::from_fn(&grid, move |r, th| pick(&evaluate(n, r, th, t)))
    };
    let at_vec = |t: f64, pick: fn(&PointValues) -> [f64; 2]| {
        DiscField::from_fn_cartesian(&grid, move |r, th| pick(&evaluate(n, r, th, t)))
    };
    Ok(CounterexampleFields {
        psi: SpaceTimeField::from_fn(time, |t| at(t, |p| p.psi))?,
        w: SpaceTimeField::from_fn(time, |t| at_vec(t, |p| p.w))?,
        v: SpaceTimeField::from_fn(time, |t| at_vec(t, |p| p.v))?,
        p: SpaceTimeField::from_fn(time, |t| at(t, |p| p.p))?,
        f: SpaceTimeField::from_fn(time, |t| at_vec(t, |p| p.f))?,
        g: SpaceTimeField::from_fn(time, |t| at(t, |p| p.g))?,
    })
}

/// Largest relative residuals of `∂_t v − Δv + ∇p = f` and `div v = g`
/// measured with centered differences of the pointwise series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SystemResidual {
    pub momentum: f64,
    pub divergence: f64,
    /// Points used; points too close to a layer edge are skipped.
    pub checked: usize,
}

pub fn system_residual(modes: usize, points: &[(f64, f64, f64)]) -> Result<SystemResidual> {
    let kinks: Vec<f64> = (1..=modes).map(|n| 1.0 - (n as f64).powi(-3)).collect();
    let eval = |x: f64, y: f64, t: f64| {
        let r = x.hypot(y);
        evaluate(modes, r, y.atan2(x), t)
    };
    let mut worst = SystemResidual {
        momentum: 0.0,
        divergence: 0.0,
        checked: 0,
    };
    for &(r, th, t) in points {
        if !(r > 0.0 && r < 1.0 && t > -1.0 && t < 0.0) {
            return Err(Error::InvalidInput(format!(
                "point ({r}, {th}, {t}) is not interior"
            )));
        }
        let gap = kinks
            .iter()
            .map(|k| (r - k).abs())
            .fold(1.0 - r, f64::min)
            .min(r);
        if gap < 1e-3 {
            continue;
        }
        let h = (0.25 * gap).min(1e-3);
        let ht = 1e-4 * t.abs().min(1.0 + t);
        let (x, y) = (r * th.cos(), r * th.sin());
        let c = eval(x, y, t);
        let xp = eval(x + h, y, t);
        let xm = eval(x - h, y, t);
        let yp = eval(x, y + h, t);
        let ym = eval(x, y - h, t);
        let tp = eval(x, y, t + ht);
        let tm = eval(x, y, t - ht);
        let grad_p = [(xp.p - xm.p) / (2.0 * h), (yp.p - ym.p) / (2.0 * h)];
        let mut res: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for i in 0..2 {
            let dt = (tp.v[i] - tm.v[i]) / (2.0 * ht);
            let lap = (xp.v[i] + xm.v[i] + yp.v[i] + ym.v[i] - 4.0 * c.v[i]) / (h * h);
            res = res.max((dt - lap + grad_p[i] - c.f[i]).abs());
            scale = scale
                .max(dt.abs())
                .max(lap.abs())
                .max(grad_p[i].abs())
                .max(c.f[i].abs());
        }
        let div = (xp.v[0] - xm.v[0] + yp.v[1] - ym.v[1]) / (2.0 * h);
        let dscale = div
            .abs()
            .max(c.g.abs())
            .max(c.v[0].hypot(c.v[1]) / h.max(1e-3));
        if scale > 0.0 {
            worst.momentum = worst.momentum.max(res / scale);
        }
        if dscale > 0.0 {
            worst.divergence = worst.divergence.max((div - c.g).abs() / dscale);
        }
        worst.checked += 1;
    }
    Ok(worst)
}

/// `div w` and `g` on the circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryDivergence {
    /// `max_n |α_n'(1) + α_n(1) − n α_n(1)|`, zero by the slope condition.
    pub coefficient: f64,
    /// `max |div w(1, θ, t)|` with `∂_r w_r` from a one-sided radial stencil.
    pub div_w: f64,
    /// `max |g(1, θ, t)|`, same stencil.
    pub g: f64,
}

pub fn boundary_divergence_check(spec: &CounterexampleSpec) -> Result<BoundaryDivergence> {
    let n_modes = spec.modes;
    let coefficient = (1..=n_modes)
        .map(|n| {
            let [a, da, _] = AlphaProfile::new(n).at_depth(0.0);
            (da + a - n as f64 * a).abs()
        })
        .fold(0.0, f64::max);
    // Four points inside the thinnest layer: α is cubic there, so the
    // one-sided stencil is exact up to the smooth 1/r terms.
    let h = (n_modes as f64).powi(-3) / 4.0;
    let polar = |y: f64, th: f64, t: f64| {
        let mut wr = 0.0;
        let mut dwt = 0.0;
        for n in 1..=n_modes {
            let nf = n as f64;
            let (tn, _) = time_factor(n, t);
            let a = AlphaProfile::new(n).at_depth(y)[0];
            wr += a * tn * (nf * th).sin();
            dwt -= nf * a * tn * (nf * th).sin();
        }
        (wr, dwt)
    };
    let time = spec.time()?;
    let n_angle = 4 * (n_modes + 1);
    let mut worst_w: f64 = 0.0;
    let mut worst_g: f64 = 0.0;
    for t in time.times() {
        for j in 0..n_angle {
            let th = 2.0 * PI * j as f64 / n_angle as f64;
            let f: Vec<(f64, f64)> = (0..4).map(|i| polar(i as f64 * h, th, t)).collect();
            let dr = -(-11.0 * f[0].0 + 18.0 * f[1].0 - 9.0 * f[2].0 + 2.0 * f[3].0) / (6.0 * h);
            let div = dr + f[0].0 + f[0].1;
            worst_w = worst_w.max(div.abs());
            worst_g = worst_g.max((cutoff(t) * div).abs());
        }
    }
    Ok(BoundaryDivergence {
        coefficient,
        div_w: worst_w,
        g: worst_g,
    })
}

const LAYER_POINTS: usize = 32;
const CUTOFF_POINTS: usize = 48;

/// `∫_{−1/3}^0 (1 − n⁷t)^{−p} dt`.
fn rational_tail(n: usize, p: i32) -> f64 {
    let a = (n as f64).powi(7);
    (1.0 - (1.0 + a / 3.0).powi(1 - p)) / (a * (p - 1) as f64)
}

/// `∫_{−1}^0 (1 − n⁷t)^{−p} dt`.
fn rational_full(n: usize, p: i32) -> f64 {
    let a = (n as f64).powi(7);
    (1.0 - (1.0 + a).powi(1 - p)) / (a * (p - 1) as f64)
}

/// `∫_{−2/3}^{−1/3} q(t) dt` for the smooth integrands on the cutoff ramp.
fn ramp_integral<F: Fn(f64) -> f64>(q: F) -> f64 {
    gauss_legendre_on(CUTOFF_POINTS, -2.0 / 3.0, -1.0 / 3.0).integrate(q)
}

/// Exact per-mode radial integrals (angular factors included).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeIntegrals {
    pub n: usize,
    /// `∫ |α (sin kθ, cos kθ)|²`, `∫ |∇(·)|²`, `∫ |∇²(·)|²` over the disc.
    pub w_l2: f64,
    pub w_grad: f64,
    pub w_hess: f64,
    /// Same for `(α − r^{n−1})(sin kθ, cos kθ)`, the profile of `v`.
    pub v_l2: f64,
    pub v_grad: f64,
    /// `‖h sin nθ‖²_{L_2}` and `‖h sin nθ‖²_{W^{-1}_2}` for
    /// `h = α' + (1 − n)α/r`.
    pub div_l2: f64,
    pub div_dual: f64,
}

fn log_r(y: f64) -> f64 {
    (-y).ln_1p()
}

pub fn mode_integrals(n: usize) -> ModeIntegrals {
    let a = AlphaProfile::new(n);
    let rule = a.layer_rule(LAYER_POINTS);
    let nf = n as f64;
    let k = nf - 1.0;
    let mut out = ModeIntegrals {
        n,
        w_l2: 0.0,
        w_grad: 0.0,
        w_hess: 0.0,
        v_l2: 0.0,
        v_grad: 0.0,
        div_l2: 0.0,
        div_dual: 0.0,
    };
    let h = |y: f64| {
        let [v, d, _] = a.at_depth(y);
        d + (1.0 - nf) * v / (1.0 - y)
    };
    for (&y, &wt) in rule.nodes.iter().zip(&rule.weights) {
        let r = 1.0 - y;
        let [v, d, dd] = a.at_depth(y);
        out.w_l2 += wt * 2.0 * PI * v * v * r;
        out.w_grad += wt * 2.0 * PI * (d * d + k * k * v * v / (r * r)) * r;
        let mixed = d / r - v / (r * r);
        let angular = d / r - k * k * v / (r * r);
        out.w_hess +=
            wt * 2.0 * PI * (dd * dd + 2.0 * k * k * mixed * mixed + angular * angular) * r;
        let rk = (k * log_r(y)).exp();
        let b = v - rk;
        let db = d - if n > 1 { k * rk / r } else { 0.0 };
        out.v_l2 += wt * 2.0 * PI * b * b * r;
        out.v_grad += wt * 2.0 * PI * (db * db + k * k * b * b / (r * r)) * r;
        let hv = h(y);
        out.div_l2 += wt * PI * hv * hv * r;
        // Green's function of the mode-n Dirichlet problem:
        // u₁ = r^n, u₂ = r^n − r^{−n}, Wronskian r·W = 2n.
        let lr = nf * log_r(y);
        let u2 = 2.0 * lr.sinh();
        let inner = gauss_legendre_on(LAYER_POINTS, y, a.width).integrate(|z| {
            let rho = 1.0 - z;
            (nf * log_r(z)).exp() * h(z) * rho
        });
        out.div_dual -= wt * PI / nf * u2 * hv * r * inner;
    }
    // Below the layer only −r^{n−1} remains in the profile of v.
    let inner_edge = 1.0 - a.width;
    if inner_edge > 0.0 {
        out.v_l2 += 2.0 * PI * inner_edge.powf(2.0 * nf) / (2.0 * nf);
        if n > 1 {
            out.v_grad += 2.0 * PI * k * inner_edge.powf(2.0 * k);
        }
    }
    out
}

/// Per-mode time integrals over `(−1, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeTimeIntegrals {
    /// `∫ T_n²` and `∫ (T_n')²`.
    pub t_sq: f64,
    pub dt_sq: f64,
    /// `∫ χ² T_n²`, `∫ (∂_t(χ T_n))²` and `∫ χ² (T_n'/n)²`.
    pub cut_sq: f64,
    pub cut_dt_sq: f64,
    pub pressure_sq: f64,
}

pub fn mode_time_integrals(n: usize) -> ModeTimeIntegrals {
    let nf = n as f64;
    let n6 = nf.powi(6);
    let n8 = nf.powi(8);
    let cut = |f: &dyn Fn(f64, f64, f64, f64) -> f64| {
        ramp_integral(|t| {
            let (tn, dtn) = time_factor(n, t);
            f(cutoff(t), cutoff_derivative(t), tn, dtn)
        })
    };
    ModeTimeIntegrals {
        t_sq: rational_full(n, 2) / n6,
        dt_sq: n8 * rational_full(n, 4),
        cut_sq: rational_tail(n, 2) / n6 + cut(&|c, _, tn, _| (c * tn).powi(2)),
        cut_dt_sq: n8 * rational_tail(n, 4) + cut(&|c, dc, tn, dtn| (dc * tn + c * dtn).powi(2)),
        pressure_sq: n6 * rational_tail(n, 4) + cut(&|c, _, _, dtn| (c * dtn / nf).powi(2)),
    }
}

/// `I_n = ∫_{−1/3}^0 ∫_0^1 n⁸ r^{2n−1} (1 − n⁷t)^{−4} dr dt` in closed form.
pub fn divergent_term_closed(n: usize) -> f64 {
    let a = (n as f64).powi(7);
    (1.0 - (1.0 + a / 3.0).powi(-3)) / 6.0
}

/// `I_n` by Gauss quadrature in `r` and a rule graded towards `t = 0`.
pub fn divergent_term_quadrature(n: usize) -> f64 {
    let nf = n as f64;
    let a = nf.powi(7);
    let radial = gauss_legendre_on(n + 1, 0.0, 1.0).integrate(|r| r.powi(2 * n as i32 - 1));
    let time = graded_towards_end(-1.0 / 3.0, 0.0, 0.5, 1e-3 / a, 16)
        .integrate(|t| (1.0 - a * t).powi(-4));
    nf.powi(8) * radial * time
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DivergenceRow {
    pub n: usize,
    pub term_closed: f64,
    pub term_quadrature: f64,
    pub partial_sum: f64,
    pub partial_sum_over_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceDemonstration {
    pub rows: Vec<DivergenceRow>,
    /// Least-squares slope of `S_N` against `N` over the second half.
    pub slope: f64,
}

/// Terms and partial sums of the series whose divergence shows
/// `∂_t ∇ψ ∉ L_2(Q)`.
pub fn divergence_demonstration(spec: &CounterexampleSpec) -> DivergenceDemonstration {
    let terms: Vec<(f64, f64)> = (1..=spec.modes)
        .into_par_iter()
        .map(|n| (divergent_term_closed(n), divergent_term_quadrature(n)))
        .collect();
    let mut sum = 0.0;
    let rows: Vec<DivergenceRow> = terms
        .into_iter()
        .enumerate()
        .map(|(i, (c, q))| {
            sum += c;
            let n = i + 1;
            DivergenceRow {
                n,
                term_closed: c,
                term_quadrature: q,
                partial_sum: sum,
                partial_sum_over_n: sum / n as f64,
            }
        })
        .collect();
    let half = &rows[rows.len() / 2..];
    let xs: Vec<f64> = half.iter().map(|r| r.n as f64).collect();
    let ys: Vec<f64> = half.iter().map(|r| r.partial_sum).collect();
    DivergenceDemonstration {
        slope: least_squares_slope(&xs, &ys),
        rows,
    }
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return f64::NAN;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Fitted exponent `β` in `values ≈ c N^β`, over the points with `N ≥ from`.
pub fn growth_exponent(ns: &[usize], values: &[f64], from: usize) -> f64 {
    let (xs, ys): (Vec<f64>, Vec<f64>) = ns
        .iter()
        .zip(values)
        .filter(|(n, v)| **n >= from && **v > 0.0)
        .map(|(n, v)| ((*n as f64).ln(), v.ln()))
        .unzip();
    least_squares_slope(&xs, &ys)
}

/// Column names of the norm table, squared norms over `Q = Ω × (−1, 0)`.
pub const NORM_COLUMNS: [&str; 11] = [
    "w_l2",
    "grad_w_l2",
    "hess_w_l2",
    "dt_w_l2",
    "v_c_l2",
    "v_w10",
    "p_l2",
    "dt_g_l2",
    "dt_g_dual",
    "dt_grad_psi_l2",
    "dt_w_mode_times_n2",
];

/// Partial sums over `n ≤ N` of squared norms, one row per `N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormTable {
    pub rows: Vec<(usize, [f64; 11])>,
    /// Fitted growth exponent of the `‖∂_t g‖²` partial sums.
    pub dt_g_growth: f64,
}

impl NormTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = NORM_COLUMNS.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|(_, r)| r[idx]).collect())
    }

    pub fn last(&self, name: &str) -> Option<f64> {
        self.column(name)?.last().copied()
    }

    pub fn at(&self, n: usize, name: &str) -> Option<f64> {
        let idx = NORM_COLUMNS.iter().position(|c| *c == name)?;
        self.rows.iter().find(|(m, _)| *m == n).map(|(_, r)| r[idx])
    }

    /// Final partial sums as a report, plus the growth exponent as a ratio.
    pub fn report(&self) -> Result<NormReport> {
        let mut rep = NormReport::new();
        if let Some((_, last)) = self.rows.last() {
            for (name, v) in NORM_COLUMNS.iter().zip(last) {
                rep.insert(name, *v)?;
            }
        }
        if self.dt_g_growth.is_finite() {
            rep.insert_ratio("dt_g_growth_exponent", self.dt_g_growth)?;
        }
        Ok(rep)
    }
}

pub fn norm_table(spec: &CounterexampleSpec) -> NormTable {
    let per_mode: Vec<[f64; 11]> = (1..=spec.modes)
        .into_par_iter()
        .map(|n| {
            let m = mode_integrals(n);
            let t = mode_time_integrals(n);
            let v_sup = m.v_l2 * (n as f64).powi(-6);
            let grad_psi = PI / n as f64;
            let p_radial = PI / (2.0 * n as f64 + 2.0);
            [
                m.w_l2 * t.t_sq,
                m.w_grad * t.t_sq,
                m.w_hess * t.t_sq,
                m.w_l2 * t.dt_sq,
                v_sup,
                (m.v_l2 + m.v_grad) * t.cut_sq,
                p_radial * t.pressure_sq,
                m.div_l2 * t.cut_dt_sq,
                m.div_dual * t.cut_dt_sq,
                grad_psi * t.cut_dt_sq,
                m.w_l2 * t.dt_sq * (n * n) as f64,
            ]
        })
        .collect();
    let mut acc = [0.0; 11];
    let mut rows = Vec::with_capacity(per_mode.len());
    for (i, term) in per_mode.iter().enumerate() {
        for (a, t) in acc.iter_mut().zip(term) {
            *a += t;
        }
        // The last column tracks the per-mode value, not a sum.
        acc[10] = term[10];
        rows.push((i + 1, acc));
    }
    let ns: Vec<usize> = rows.iter().map(|(n, _)| *n).collect();
    let dtg: Vec<f64> = rows.iter().map(|(_, r)| r[7]).collect();
    let from = (spec.modes / 2).max(1);
    NormTable {
        dt_g_growth: growth_exponent(&ns, &dtg, from),
        rows,
    }
}
