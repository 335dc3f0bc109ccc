//! Cutoff localization of a local Stokes solution and the iteration lemma
//! used to absorb the `ε Ψ(r)` term of a local estimate.

use serde::Serialize;

use crate::boundary::{smooth_step, smooth_step_derivative};
use crate::error::{Error, Result};
use crate::field::{DiscField, Rank, SpaceTimeField};
use crate::norms::{time_norm, NormOrder};
use crate::ops::{diff_profile, divergence, gradient, integrate_disc, vector_laplacian};
use crate::stokes::ProblemData;

/// Second derivative of [`smooth_step`].
pub fn smooth_step_second_derivative(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    let y = 1.0 - x;
    let a = (-1.0 / x).exp();
    let b = (-1.0 / y).exp();
    let da = a / (x * x);
    let db = -b / (y * y);
    let dda = a * (1.0 / x.powi(4) - 2.0 / x.powi(3));
    let ddb = b * (1.0 / y.powi(4) - 2.0 / y.powi(3));
    let d = a + b;
    let dd = da + db;
    (dda * b - a * ddb) / (d * d) - 2.0 * (da * b - a * db) * dd / (d * d * d)
}

/// `max |S'|` and `max |S''|` of the smooth step, by dense sampling.
fn step_derivative_maxima() -> (f64, f64) {
    static MAXIMA: std::sync::OnceLock<(f64, f64)> = std::sync::OnceLock::new();
    *MAXIMA.get_or_init(|| {
        let n = 20_000;
        (1..n).fold((0.0f64, 0.0f64), |(m1, m2), i| {
            let x = i as f64 / n as f64;
            (
                m1.max(smooth_step_derivative(x).abs()),
                m2.max(smooth_step_second_derivative(x).abs()),
            )
        })
    })
}

/// Space-time cutoff `ζ(x, t) = σ(|x|) τ(t)` equal to 1 on
/// `B_ρ × (−ρ², 0)` and 0 outside `B_r × (−r², 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutoffProfile {
    pub inner: f64,
    pub outer: f64,
}

/// `sup |∇ζ|`, `sup |∇²ζ|` and `sup |∂_t ζ|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivativeBounds {
    pub gradient: f64,
    pub hessian: f64,
    pub time: f64,
}

impl CutoffProfile {
    pub fn new(inner: f64, outer: f64) -> Result<Self> {
        if !(0.5 <= inner && inner < outer && outer <= 0.9) {
            return Err(Error::InvalidInput(format!(
                "cutoff radii must satisfy 1/2 <= rho < r <= 9/10, got rho = {inner}, r = {outer}"
            )));
        }
        Ok(Self { inner, outer })
    }

    fn gap(&self) -> f64 {
        self.outer - self.inner
    }

    /// `[σ, σ', σ'']` at radius `x`.
    pub fn spatial(&self, x: f64) -> [f64; 3] {
        let h = self.gap();
        let s = (x - self.inner) / h;
        [
            1.0 - smooth_step(s),
            -smooth_step_derivative(s) / h,
            -smooth_step_second_derivative(s) / (h * h),
        ]
    }

    /// `[τ, τ']` at time `t`.
    pub fn temporal(&self, t: f64) -> [f64; 2] {
        let span = self.outer * self.outer - self.inner * self.inner;
        let s = (t + self.outer * self.outer) / span;
        [smooth_step(s), smooth_step_derivative(s) / span]
    }

    pub fn value(&self, x: f64, t: f64) -> f64 {
        self.spatial(x)[0] * self.temporal(t)[0]
    }

    /// Bounds `C_k/(r − ρ)^k` with constants from the step profile; they use
    /// `(r − ρ)/ρ ≤ 1` and `r + ρ ≥ 1`.
    pub fn declared_bounds(&self) -> DerivativeBounds {
        let (m1, m2) = step_derivative_maxima();
        let h = self.gap();
        DerivativeBounds {
            gradient: m1 / h,
            hessian: (m2 + m1) / (h * h),
            time: m1 / h,
        }
    }

    /// Sampled suprema; the Hessian of a radial function has eigenvalues
    /// `σ''` and `σ'/|x|`.
    pub fn measured_bounds(&self, samples: usize) -> DerivativeBounds {
        let mut out = DerivativeBounds {
            gradient: 0.0,
            hessian: 0.0,
            time: 0.0,
        };
        for i in 0..=samples {
            let x = self.inner + self.gap() * i as f64 / samples as f64;
            let [_, d, dd] = self.spatial(x);
            out.gradient = out.gradient.max(d.abs());
            out.hessian = out.hessian.max(dd.hypot(d / x));
            let t = -self.outer.powi(2)
                + (self.outer.powi(2) - self.inner.powi(2)) * i as f64 / samples as f64;
            out.time = out.time.max(self.temporal(t)[1].abs());
        }
        out
    }
}

/// Componentwise radial derivative of the polar components.
fn radial_derivative(f: &DiscField) -> DiscField {
    let mut out = DiscField::zeros(f.grid(), f.rank());
    let radial = f.grid().radial();
    for comp in 0..f.n_components() {
        for m in 0..=f.n_theta() {
            let d = diff_profile(radial, f.mode(comp, m));
            out.mode_mut(comp, m).copy_from_slice(&d);
        }
    }
    out
}

/// Relative residuals of the localized system with the time of the worst
/// slice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalizationResidual {
    /// `‖∂_t v − Δv + ∇p − f‖ / ‖f‖` in `L_2(Q)`.
    pub momentum: f64,
    /// `‖div v − g‖ / ‖∇v‖` in `L_2(Q)`, absolute when `v = 0`.
    pub divergence: f64,
    pub worst_time: f64,
}

#[derive(Debug, Clone)]
pub struct Localized {
    pub data: ProblemData,
    pub v: SpaceTimeField,
    pub p: SpaceTimeField,
    pub residual: LocalizationResidual,
}

/// `(v, p) = (ζu, ζq)` with data
/// `f = ζ f̃ + u(∂_t ζ − Δζ) − 2(∇u)∇ζ + q∇ζ` and `g = u·∇ζ`.
pub fn localize_data(
    u: &SpaceTimeField,
    q: &SpaceTimeField,
    f_tilde: &SpaceTimeField,
    c: &CutoffProfile,
) -> Result<(
    SpaceTimeField,
    SpaceTimeField,
    SpaceTimeField,
    SpaceTimeField,
)> {
    u.slice(0).expect_rank(Rank::Vector)?;
    q.slice(0).expect_rank(Rank::Scalar)?;
    f_tilde.slice(0).expect_rank(Rank::Vector)?;
    if u.time() != q.time() || u.time() != f_tilde.time() {
        return Err(Error::GridMismatch);
    }
    let radial = u.grid().radial();
    let nodes = radial.nodes();
    let sigma: Vec<[f64; 3]> = nodes.iter().map(|&x| c.spatial(x)).collect();
    let s0: Vec<f64> = sigma.iter().map(|s| s[0]).collect();
    let s1: Vec<f64> = sigma.iter().map(|s| s[1]).collect();
    let lap: Vec<f64> = nodes
        .iter()
        .zip(&sigma)
        .map(|(&x, s)| s[2] + s[1] / x)
        .collect();
    let times = u.time().times();
    let mut f = Vec::with_capacity(times.len());
    let mut g = Vec::with_capacity(times.len());
    let mut v = Vec::with_capacity(times.len());
    let mut p = Vec::with_capacity(times.len());
    for (k, &t) in times.iter().enumerate() {
        let [tau, dtau] = c.temporal(t);
        let uk = u.slice(k);
        let qk = q.slice(k);
        let u_r = &uk.components()[0];
        // ∂_t ζ − Δζ = σ τ' − τ Δσ
        let weight: Vec<f64> = s0
            .iter()
            .zip(&lap)
            .map(|(a, l)| a * dtau - tau * l)
            .collect();
        let grad_term = radial_derivative(uk).times_radial(&s1).scaled(-2.0 * tau);
        let q_term = DiscField::from_components(
            qk.times_radial(&s1).scaled(tau),
            DiscField::zeros(uk.grid(), Rank::Scalar),
        )?;
        let fk = f_tilde
            .slice(k)
            .times_radial(&s0)
            .scaled(tau)
            .add(&uk.times_radial(&weight))?
            .add(&grad_term)?
            .add(&q_term)?;
        f.push(fk);
        g.push(u_r.times_radial(&s1).scaled(tau));
        v.push(uk.times_radial(&s0).scaled(tau));
        p.push(qk.times_radial(&s0).scaled(tau));
    }
    let time = *u.time();
    Ok((
        SpaceTimeField::new(time, f)?,
        SpaceTimeField::new(time, g)?,
        SpaceTimeField::new(time, v)?,
        SpaceTimeField::new(time, p)?,
    ))
}

/// Residual of `∂_t v − Δv + ∇p = f`, `div v = g` measured with the grid
/// operators and second-order time differences.
pub fn localized_residual(
    v: &SpaceTimeField,
    p: &SpaceTimeField,
    f: &SpaceTimeField,
    g: &SpaceTimeField,
) -> Result<LocalizationResidual> {
    let dtv = v.time_derivative()?;
    let n = v.time().len();
    let mut mom = Vec::with_capacity(n);
    let mut div = Vec::with_capacity(n);
    let mut fs = Vec::with_capacity(n);
    let mut grads = Vec::with_capacity(n);
    for k in 0..n {
        let r = dtv
            .slice(k)
            .sub(&vector_laplacian(v.slice(k))?)?
            .add(&gradient(p.slice(k))?)?
            .sub(f.slice(k))?;
        mom.push(integrate_disc(&r, 2.0)?);
        div.push(integrate_disc(
            &divergence(v.slice(k))?.sub(g.slice(k))?,
            2.0,
        )?);
        fs.push(integrate_disc(f.slice(k), 2.0)?);
        grads.push(crate::ops::gradient_norm(v.slice(k), 2.0)?);
    }
    let worst = mom
        .iter()
        .enumerate()
        .fold(
            (0usize, 0.0f64),
            |acc, (k, &m)| if m > acc.1 { (k, m) } else { acc },
        )
        .0;
    let rel = |num: &[f64], den: &[f64]| {
        let a = time_norm(v.time(), num, 2.0);
        let b = time_norm(v.time(), den, 2.0);
        if b > 0.0 {
            a / b
        } else {
            a
        }
    };
    Ok(LocalizationResidual {
        momentum: rel(&mom, &fs),
        divergence: rel(&div, &grads),
        worst_time: v.time().time(worst),
    })
}

/// Localizes `(u, q)`, which should satisfy `∂_t u − Δu + ∇q = f̃` and
/// `div u = 0`, and checks the localized system against `tol`.
pub fn localize(
    u: &SpaceTimeField,
    q: &SpaceTimeField,
    f_tilde: &SpaceTimeField,
    c: &CutoffProfile,
    order: NormOrder,
    tol: f64,
) -> Result<Localized> {
    let (f, g, v, p) = localize_data(u, q, f_tilde, c)?;
    let residual = localized_residual(&v, &p, &f, &g)?;
    for (value, what) in [
        (residual.momentum, "momentum"),
        (residual.divergence, "divergence"),
    ] {
        if !(value <= tol) {
            return Err(Error::Residual {
                value,
                tol,
                location: format!("{what} equation, worst slice t = {}", residual.worst_time),
            });
        }
    }
    Ok(Localized {
        data: ProblemData::new(f, g, order)?,
        v,
        p,
        residual,
    })
}

/// Samples of a function `Ψ` on `[R₁, R₀]` with the constants of the
/// hypothesis `Ψ(ρ) ≤ εΨ(r) + A/(r − ρ)^α`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationInstance {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub a: f64,
    pub alpha: f64,
    pub eps: f64,
}

impl IterationInstance {
    /// Samples `psi` at `points` equispaced radii from `R₁` to `R₀`.
    pub fn sample<F: Fn(f64) -> f64>(
        psi: F,
        r1: f64,
        r0: f64,
        points: usize,
        a: f64,
        alpha: f64,
        eps: f64,
    ) -> Result<Self> {
        if !(r1 < r0) || points < 2 {
            return Err(Error::InvalidInput(
                "need R1 < R0 and at least two sample points".into(),
            ));
        }
        let radii: Vec<f64> = (0..points)
            .map(|i| r1 + (r0 - r1) * i as f64 / (points - 1) as f64)
            .collect();
        let values = radii.iter().map(|&r| psi(r)).collect();
        let inst = Self {
            radii,
            values,
            a,
            alpha,
            eps,
        };
        inst.validate()?;
        Ok(inst)
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.a >= 0.0) {
            return Err(Error::InvalidInput("need alpha > 0 and A >= 0".into()));
        }
        let limit = 2f64.powf(-self.alpha);
        if !(self.eps > 0.0 && self.eps < limit) {
            return Err(Error::InvalidInput(format!(
                "eps must lie in (0, 2^-alpha) = (0, {limit}), got {}",
                self.eps
            )));
        }
        if self.values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidInput("Psi must be nondecreasing".into()));
        }
        Ok(())
    }

    /// Checks the hypothesis on every sampled pair `ρ < r`.
    pub fn check_hypothesis(&self) -> Result<()> {
        for i in 0..self.radii.len() {
            for j in i + 1..self.radii.len() {
                let (rho, r) = (self.radii[i], self.radii[j]);
                let lhs = self.values[i];
                let rhs = self.eps * self.values[j] + self.a / (r - rho).powf(self.alpha);
                if lhs > rhs * (1.0 + 1e-12) {
                    return Err(Error::HypothesisViolation { rho, r, lhs, rhs });
                }
            }
        }
        Ok(())
    }

    /// Smallest sampled value at a radius `≥ x`, an upper bound for a
    /// nondecreasing `Ψ(x)`.
    fn upper_value(&self, x: f64) -> f64 {
        self.radii
            .iter()
            .position(|&r| r >= x)
            .map(|i| self.values[i])
            .unwrap_or(f64::INFINITY)
    }
}

/// `B = Σ_k ε^k 2^{α(k+1)} = 2^α/(1 − ε 2^α)`.
pub fn iteration_constant(eps: f64, alpha: f64) -> f64 {
    let q = 2f64.powf(alpha);
    q / (1.0 - eps * q)
}

/// The series for [`iteration_constant`], summed until the terms are negligible.
pub fn iteration_constant_series(eps: f64, alpha: f64) -> f64 {
    let q = 2f64.powf(alpha);
    let ratio = eps * q;
    let mut term = q;
    let mut sum = 0.0;
    for _ in 0..10_000 {
        sum += term;
        if term <= 1e-18 * sum {
            break;
        }
        term *= ratio;
    }
    sum
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationOutcome {
    pub b: f64,
    /// `B A / (R₀ − R₁)^α`.
    pub bound: f64,
    pub psi_r1: f64,
    /// `Σ_{k<K} ε^k A/(r_{k+1} − r_k)^α + ε^K Ψ(r_K)` for the last `K`
    /// whose radius is still sampled.
    pub chain_bound: f64,
    pub steps: usize,
    pub holds: bool,
}

/// Runs the iteration `r_k = R₀ − 2^{−k}(R₀ − R₁)` on the sampled `Ψ`.
pub fn iteration_lemma(inst: &IterationInstance) -> Result<IterationOutcome> {
    inst.validate()?;
    inst.check_hypothesis()?;
    let r1 = inst.radii[0];
    let r0 = *inst.radii.last().expect("at least two radii");
    let span = r0 - r1;
    let b = iteration_constant(inst.eps, inst.alpha);
    let bound = b * inst.a / span.powf(inst.alpha);
    let mut acc = 0.0;
    let mut weight = 1.0;
    let mut chain = inst.upper_value(r1);
    let mut steps = 0;
    let spacing = span / (inst.radii.len() - 1) as f64;
    for k in 0..200 {
        let next = r0 - 2f64.powi(-(k + 1)) * span;
        let step = 2f64.powi(-(k + 1)) * span;
        if step < spacing {
            break;
        }
        acc += weight * inst.a / step.powf(inst.alpha);
        weight *= inst.eps;
        let tail = weight * inst.upper_value(next);
        if tail.is_finite() {
            chain = chain.min(acc + tail);
        }
        steps = k as usize + 1;
    }
    let psi_r1 = inst.values[0];
    Ok(IterationOutcome {
        b,
        bound,
        psi_r1,
        chain_bound: chain,
        steps,
        holds: psi_r1 <= bound * (1.0 + 1e-12),
    })
}

/// Young's inequality `ab ≤ ε a^s + C_ε b^{s'}` with
/// `C_ε = (εs)^{−s'/s}/s'`; returns `(ab, ε a^s + C_ε b^{s'})`.
pub fn young_split(a: f64, b: f64, s: f64, eps: f64) -> Result<(f64, f64)> {
    if !(a >= 0.0 && b >= 0.0 && s > 1.0 && eps > 0.0) {
        return Err(Error::InvalidInput(format!(
            "young_split needs a, b >= 0, s > 1, eps > 0 (got a = {a}, b = {b}, s = {s}, eps = {eps})"
        )));
    }
    let sd = s / (s - 1.0);
    let c = young_constant(s, eps);
    let lhs = a * b;
    let rhs = eps * a.powf(s) + c * b.powf(sd);
    debug_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-300);
    Ok((lhs, rhs))
}

pub fn young_constant(s: f64, eps: f64) -> f64 {
    let sd = s / (s - 1.0);
    (eps * s).powf(-sd / s) / sd
}
