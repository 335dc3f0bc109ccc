//! The nonstationary Stokes problem with prescribed divergence.
//!
//! `solve_stokes` writes `v = u + w`: `w = Tg` slice by slice carries the
//! divergence, and `u` solves the divergence-free problem with forcing
//! `f − (∂_t w − Δw)`. The divergence-free problem is solved in stream
//! function form `u = ((1/r) ∂_θ ψ, −∂_r ψ)` with vorticity `ω = −Δψ`:
//! `∂_t ω − Δω = curl F`, `ψ = ∂_r ψ = 0` on the circle. Each Fourier mode
//! is one coupled collocation system for `(ψ, ω)`, stepped in time by the
//! θ-method.

use nalgebra::{DMatrix, DVector, Dyn, LU};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::divsolve::{div_inverse, MEAN_ZERO_TOL};
use crate::elliptic::radial_laplacian;
use crate::error::{Error, Result};
use crate::field::{DiscField, Rank, SpaceTimeField};
use crate::grid::{DiscGrid, RadialGrid};
use crate::norms::{
    dual_norm_estimate, norm_gradient_lsl, norm_l_dual, norm_lsl, norm_w10, norm_w21, time_norm,
    NormOrder, NormReport,
};
use crate::ops::{
    curl, diff_profile, disc_integral, divergence, integrate_disc, max_boundary_magnitude,
    perp_gradient, vector_laplacian,
};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeScheme {
    CrankNicolson,
    ImplicitEuler,
}

impl TimeScheme {
    fn theta(self) -> f64 {
        match self {
            TimeScheme::CrankNicolson => 0.5,
            TimeScheme::ImplicitEuler => 1.0,
        }
    }
}

/// How the pressure is recovered from a computed velocity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PressureRecovery {
    /// `Δp = div F` with `∂_r p = F_r + (Δu)_r` on the circle.
    Poisson,
    /// Integrates `∇p = F − ∂_t u + Δu` directly.
    Momentum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StokesConfig {
    pub scheme: TimeScheme,
    pub pressure: PressureRecovery,
    /// Per-mode kinetic energy above which stepping is declared unstable.
    pub max_energy: f64,
}

impl Default for StokesConfig {
    fn default() -> Self {
        Self {
            scheme: TimeScheme::CrankNicolson,
            pressure: PressureRecovery::Poisson,
            max_energy: 1e30,
        }
    }
}

/// Data `(f, g)` of the problem with exponents for the reported norms.
#[derive(Debug, Clone)]
pub struct ProblemData {
    pub f: SpaceTimeField,
    pub g: SpaceTimeField,
    pub order: NormOrder,
}

impl ProblemData {
    /// Checks `∫_Ω g(·, t) = 0` for all `t` and `g(·, 0) = 0`.
    pub fn new(f: SpaceTimeField, g: SpaceTimeField, order: NormOrder) -> Result<Self> {
        f.slice(0).expect_rank(Rank::Vector)?;
        g.slice(0).expect_rank(Rank::Scalar)?;
        if f.time() != g.time() || f.grid() != g.grid() {
            return Err(Error::GridMismatch);
        }
        for (k, s) in g.slices().iter().enumerate() {
            let mean = disc_integral(s)?;
            if mean.abs() > MEAN_ZERO_TOL {
                return Err(Error::Slice {
                    index: k,
                    source: Box::new(Error::NotMeanZero {
                        value: mean,
                        tol: MEAN_ZERO_TOL,
                    }),
                });
            }
        }
        let initial = integrate_disc(g.slice(0), 2.0)?;
        if initial > MEAN_ZERO_TOL {
            return Err(Error::InvalidInput(format!(
                "g(., 0) must vanish, has L2 norm {initial:e}"
            )));
        }
        Ok(Self { f, g, order })
    }

    pub fn zero(time: crate::grid::SpaceTimeGrid, grid: &DiscGrid, order: NormOrder) -> Self {
        Self {
            f: SpaceTimeField::zeros(time, grid, Rank::Vector),
            g: SpaceTimeField::zeros(time, grid, Rank::Scalar),
            order,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolutionPair {
    pub v: SpaceTimeField,
    /// Pressure with zero disc mean at every time.
    pub p: SpaceTimeField,
    pub report: NormReport,
}

/// Divergence lift `w(·, t) = T g(·, t)` and the norms of its estimate.
#[derive(Debug, Clone)]
pub struct LiftedDivergence {
    pub w: SpaceTimeField,
    pub report: NormReport,
}

fn slice_error(index: usize, e: Error) -> Error {
    Error::Slice {
        index,
        source: Box::new(e),
    }
}

/// `‖∂_t g‖_{L_l(W^{-1}_s)}`: exact for `s = 2`, estimated otherwise.
fn dual_time_norm(dg: &SpaceTimeField, o: NormOrder) -> Result<f64> {
    if o.s() == 2.0 {
        return norm_l_dual(dg, o.l());
    }
    let v: Vec<f64> = dg
        .slices()
        .par_iter()
        .map(|s| dual_norm_estimate(s, o))
        .collect::<Result<_>>()?;
    Ok(time_norm(dg.time(), &v, o.l()))
}

/// Right-hand-side pieces of the estimates: `‖g‖_{W^{1,0}}` and
/// `‖∂_t g‖^{1/s} ‖∂_t g‖_{L_l(W^{-1}_s)}^{1/s'}`.
fn divergence_data_norms(
    g: &SpaceTimeField,
    o: NormOrder,
    report: &mut NormReport,
) -> Result<(f64, f64)> {
    let dg = g.time_derivative()?;
    let g_w10 = norm_w10(g, o)?;
    let dg_lsl = norm_lsl(&dg, o)?;
    let dg_dual = dual_time_norm(&dg, o)?;
    let mixed = dg_lsl.powf(1.0 / o.s()) * dg_dual.powf(1.0 / o.s_dual());
    report.insert("g_w10", g_w10)?;
    report.insert("dtg_lsl", dg_lsl)?;
    report.insert("dtg_dual", dg_dual)?;
    report.insert("dtg_mixed", mixed)?;
    Ok((g_w10, mixed))
}

pub fn lift_divergence(g: &SpaceTimeField, o: NormOrder) -> Result<LiftedDivergence> {
    g.slice(0).expect_rank(Rank::Scalar)?;
    let slices: Vec<DiscField> = g
        .slices()
        .par_iter()
        .enumerate()
        .map(|(k, s)| div_inverse(s).map_err(|e| slice_error(k, e)))
        .collect::<Result<_>>()?;
    let w = SpaceTimeField::new(*g.time(), slices)?;
    let mut report = NormReport::new();
    let w_w21 = norm_w21(&w, o)?;
    report.insert("w_w21", w_w21)?;
    let (g_w10, mixed) = divergence_data_norms(g, o, &mut report)?;
    let den = g_w10 + mixed;
    if den > 0.0 {
        report.insert_ratio("lift", w_w21 / den)?;
    }
    Ok(LiftedDivergence { w, report })
}

/// Per-mode time stepper for the stream-function/vorticity system.
struct ModeStepper {
    lu: LU<f64, Dyn, Dyn>,
    lap: DMatrix<f64>,
    n: usize,
    dt: f64,
    theta: f64,
}

impl ModeStepper {
    fn new(radial: &RadialGrid, m: usize, dt: f64, theta: f64) -> Result<Self> {
        let lap = radial_laplacian(radial, m);
        let n = radial.len();
        let g = n - 1;
        let mut a = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..g {
            for j in 0..n {
                a[(i, n + j)] = -theta * lap[(i, j)];
                a[(g + i, j)] = lap[(i, j)];
            }
            a[(i, n + i)] += 1.0 / dt;
            a[(g + i, n + i)] = 1.0;
        }
        a[(2 * g, n - 1)] = 1.0;
        let d = radial.diff();
        for j in 0..n {
            a[(2 * g + 1, j)] = d[(n - 1, j)];
        }
        let lu = a.lu();
        if !lu.is_invertible() {
            return Err(Error::SolverFailure {
                mode: m,
                reason: "singular stream-function system".into(),
            });
        }
        Ok(Self {
            lu,
            lap,
            n,
            dt,
            theta,
        })
    }

    /// Advances `(ψ, ω)` given the forcing curl at the old and new times.
    fn step(
        &self,
        omega: &[Complex64],
        c_old: &[Complex64],
        c_new: &[Complex64],
        m: usize,
    ) -> Result<Vec<Complex64>> {
        let n = self.n;
        let g = n - 1;
        let mut re = vec![0.0; 2 * n];
        let mut im = vec![0.0; 2 * n];
        for i in 0..g {
            let mut lw = Complex64::new(0.0, 0.0);
            for (j, w) in omega.iter().enumerate() {
                lw += w * self.lap[(i, j)];
            }
            let rhs = omega[i] / self.dt
                + lw * (1.0 - self.theta)
                + c_new[i] * self.theta
                + c_old[i] * (1.0 - self.theta);
            re[i] = rhs.re;
            im[i] = rhs.im;
        }
        let fail = || Error::SolverFailure {
            mode: m,
            reason: "back substitution failed".into(),
        };
        let re = self.lu.solve(&DVector::from_vec(re)).ok_or_else(fail)?;
        let im = self.lu.solve(&DVector::from_vec(im)).ok_or_else(fail)?;
        Ok(re
            .iter()
            .zip(im.iter())
            .map(|(a, b)| Complex64::new(*a, *b))
            .collect())
    }
}

fn mode_energy(radial: &RadialGrid, m: usize, psi: &[Complex64]) -> f64 {
    let dpsi = diff_profile(radial, psi);
    let nodes = radial.nodes();
    let vals: Vec<f64> = (0..radial.n_r())
        .map(|j| (psi[j] * (m as f64) / nodes[j]).norm_sqr() + dpsi[j].norm_sqr())
        .collect();
    radial.integrate_rdr(&vals)
}

/// Stream function history of the divergence-free problem for one mode.
fn evolve_mode(
    radial: &RadialGrid,
    m: usize,
    psi0: &[Complex64],
    forcing_curl: &[Vec<Complex64>],
    dt: f64,
    cfg: &StokesConfig,
) -> Result<Vec<Vec<Complex64>>> {
    let stepper = ModeStepper::new(radial, m, dt, cfg.scheme.theta())?;
    let n = radial.len();
    let mut psi = psi0.to_vec();
    let lap = &stepper.lap;
    // ω = −Δψ at the Gauss nodes; the boundary value is eliminated by the
    // coupled solve, so start from the collocated Laplacian there as well.
    let mut omega: Vec<Complex64> = (0..n)
        .map(|i| -(0..n).map(|j| psi[j] * lap[(i, j)]).sum::<Complex64>())
        .collect();
    let mut history = Vec::with_capacity(forcing_curl.len());
    history.push(psi.clone());
    for k in 1..forcing_curl.len() {
        let sol = stepper.step(&omega, &forcing_curl[k - 1], &forcing_curl[k], m)?;
        psi.copy_from_slice(&sol[..n]);
        omega.copy_from_slice(&sol[n..]);
        let energy = mode_energy(radial, m, &psi);
        if !energy.is_finite() || energy > cfg.max_energy {
            return Err(Error::Instability { step: k, energy });
        }
        history.push(psi.clone());
    }
    Ok(history)
}

/// Zero-mean pressure of one slice from the momentum equation.
fn recover_pressure(
    u: &DiscField,
    dtu: &DiscField,
    forcing: &DiscField,
    how: PressureRecovery,
) -> Result<DiscField> {
    let grid = u.grid();
    let radial = grid.radial();
    let n = radial.len();
    let nodes = radial.nodes();
    let lap_u = vector_laplacian(u)?;
    let mut p = DiscField::zeros(grid, Rank::Scalar);
    match how {
        PressureRecovery::Poisson => {
            let div_f = divergence(forcing)?;
            for m in 0..=grid.n_theta() {
                let mut a = radial_laplacian(radial, m);
                let d = radial.diff();
                for j in 0..n {
                    a[(n - 1, j)] = d[(n - 1, j)];
                }
                let mut rhs: Vec<Complex64> = div_f.mode(0, m).to_vec();
                rhs[n - 1] = forcing.mode(0, m)[n - 1] + lap_u.mode(0, m)[n - 1];
                let prof = if m == 0 {
                    solve_bordered(radial, a, rhs, m)?
                } else {
                    solve_complex(a, rhs, m)?
                };
                p.mode_mut(0, m).copy_from_slice(&prof);
            }
        }
        PressureRecovery::Momentum => {
            let gr = forcing.axpy(-1.0, dtu)?.add(&lap_u)?;
            for m in 1..=grid.n_theta() {
                let im = I * m as f64;
                let gt = gr.mode(1, m).to_vec();
                for (j, slot) in p.mode_mut(0, m).iter_mut().enumerate() {
                    *slot = gt[j] * nodes[j] / im;
                }
            }
            let mut a = radial.diff().clone();
            for (j, (w, r)) in radial.weights().iter().zip(nodes).enumerate() {
                a[(n - 1, j)] = w * r;
            }
            a[(n - 1, n - 1)] = 0.0;
            let mut rhs = gr.mode(0, 0).to_vec();
            rhs[n - 1] = Complex64::new(0.0, 0.0);
            let prof = solve_complex(a, rhs, 0)?;
            p.mode_mut(0, 0).copy_from_slice(&prof);
        }
    }
    let mean = disc_integral(&p)? / std::f64::consts::PI;
    for c in p.mode_mut(0, 0) {
        *c -= mean;
    }
    Ok(p)
}

fn solve_complex(a: DMatrix<f64>, rhs: Vec<Complex64>, m: usize) -> Result<Vec<Complex64>> {
    let lu = a.lu();
    let fail = || Error::SolverFailure {
        mode: m,
        reason: "singular pressure system".into(),
    };
    let re = lu
        .solve(&DVector::from_iterator(rhs.len(), rhs.iter().map(|c| c.re)))
        .ok_or_else(fail)?;
    let im = lu
        .solve(&DVector::from_iterator(rhs.len(), rhs.iter().map(|c| c.im)))
        .ok_or_else(fail)?;
    Ok(re
        .iter()
        .zip(im.iter())
        .map(|(a, b)| Complex64::new(*a, *b))
        .collect())
}

/// Solves `A p + λ 1 = rhs`, `∫ p r dr = 0` for a system whose kernel holds
/// the constants.
fn solve_bordered(
    radial: &RadialGrid,
    a: DMatrix<f64>,
    rhs: Vec<Complex64>,
    m: usize,
) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    let mut b = DMatrix::zeros(n + 1, n + 1);
    b.view_mut((0, 0), (n, n)).copy_from(&a);
    for i in 0..n {
        b[(i, n)] = 1.0;
    }
    for (j, (w, r)) in radial.weights().iter().zip(radial.nodes()).enumerate() {
        b[(n, j)] = w * r;
    }
    let mut full = rhs;
    full.push(Complex64::new(0.0, 0.0));
    let mut sol = solve_complex(b, full, m)?;
    sol.truncate(n);
    Ok(sol)
}

fn assemble_velocity(
    grid: &DiscGrid,
    histories: &[Vec<Vec<Complex64>>],
    k: usize,
) -> Result<DiscField> {
    let mut psi = DiscField::zeros(grid, Rank::Scalar);
    for (m, h) in histories.iter().enumerate() {
        psi.mode_mut(0, m).copy_from_slice(&h[k]);
    }
    perp_gradient(&psi)
}

/// Divergence-free problem `∂_t u − Δu + ∇p = f̃`, `div u = 0`, `u = 0` on the
/// circle and at the initial time.
pub fn solve_stokes_homogeneous(f: &SpaceTimeField, cfg: &StokesConfig) -> Result<SolutionPair> {
    let psi0 = DiscField::zeros(f.grid(), Rank::Scalar);
    solve_stokes_homogeneous_from(&psi0, f, cfg)
}

/// As [`solve_stokes_homogeneous`] with initial velocity `curl ψ₀`; `ψ₀` and
/// `∂_r ψ₀` should vanish on the circle.
pub fn solve_stokes_homogeneous_from(
    psi0: &DiscField,
    f: &SpaceTimeField,
    cfg: &StokesConfig,
) -> Result<SolutionPair> {
    f.slice(0).expect_rank(Rank::Vector)?;
    psi0.expect_rank(Rank::Scalar)?;
    if psi0.grid() != f.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = f.grid().clone();
    let time = *f.time();
    let curls: Vec<DiscField> = f.slices().par_iter().map(curl).collect::<Result<_>>()?;
    let radial = grid.radial();
    let histories: Vec<Vec<Vec<Complex64>>> = (0..=grid.n_theta())
        .into_par_iter()
        .map(|m| {
            let c: Vec<Vec<Complex64>> = curls.iter().map(|s| s.mode(0, m).to_vec()).collect();
            evolve_mode(radial, m, psi0.mode(0, m), &c, time.dt(), cfg)
        })
        .collect::<Result<_>>()?;
    let u_slices: Vec<DiscField> = (0..time.len())
        .map(|k| assemble_velocity(&grid, &histories, k))
        .collect::<Result<_>>()?;
    let u = SpaceTimeField::new(time, u_slices)?;
    let dtu = u.time_derivative()?;
    let p_slices: Vec<DiscField> = (0..time.len())
        .into_par_iter()
        .map(|k| {
            recover_pressure(u.slice(k), dtu.slice(k), f.slice(k), cfg.pressure)
                .map_err(|e| slice_error(k, e))
        })
        .collect::<Result<_>>()?;
    let p = SpaceTimeField::new(time, p_slices)?;
    Ok(SolutionPair {
        v: u,
        p,
        report: NormReport::new(),
    })
}

/// `(1/2) d/dt ‖u‖² + ‖∇u‖²` at every time node, by centered differences of
/// the energy; vanishes for exact unforced solutions.
pub fn energy_balance(u: &SpaceTimeField) -> Result<Vec<f64>> {
    let energy: Vec<f64> = u
        .slices()
        .iter()
        .map(|s| Ok(integrate_disc(s, 2.0)?.powi(2)))
        .collect::<Result<_>>()?;
    let dissipation: Vec<f64> = u
        .slices()
        .iter()
        .map(|s| Ok(crate::ops::gradient_norm(s, 2.0)?.powi(2)))
        .collect::<Result<_>>()?;
    let dt = u.time().dt();
    let n = energy.len();
    if n < 3 {
        return Err(Error::InvalidInput(
            "energy balance needs at least 3 time nodes".into(),
        ));
    }
    Ok((0..n)
        .map(|k| {
            let de = if k == 0 {
                (-3.0 * energy[0] + 4.0 * energy[1] - energy[2]) / (2.0 * dt)
            } else if k == n - 1 {
                (3.0 * energy[n - 1] - 4.0 * energy[n - 2] + energy[n - 3]) / (2.0 * dt)
            } else {
                (energy[k + 1] - energy[k - 1]) / (2.0 * dt)
            };
            0.5 * de + dissipation[k]
        })
        .collect())
}

/// `∇p` as a vector space-time field.
fn pressure_gradient_lsl(p: &SpaceTimeField, o: NormOrder) -> Result<f64> {
    norm_gradient_lsl(p, o)
}

pub fn solve_stokes(data: &ProblemData, cfg: &StokesConfig) -> Result<SolutionPair> {
    let o = data.order;
    let lifted = lift_divergence(&data.g, o)?;
    let w = &lifted.w;
    let dtw = w.time_derivative()?;
    let rhs_slices: Vec<DiscField> = (0..w.time().len())
        .into_par_iter()
        .map(|k| {
            let lap = vector_laplacian(w.slice(k))?;
            data.f.slice(k).sub(dtw.slice(k))?.add(&lap)
        })
        .collect::<Result<_>>()?;
    let reduced = SpaceTimeField::new(*w.time(), rhs_slices)?;
    let homogeneous = solve_stokes_homogeneous(&reduced, cfg)?;
    let v = homogeneous.v.axpy(1.0, w)?;
    let p = homogeneous.p;

    let mut report = lifted.report.clone();
    let v_w21 = norm_w21(&v, o)?;
    let grad_p = pressure_gradient_lsl(&p, o)?;
    let f_lsl = norm_lsl(&data.f, o)?;
    let lhs = v_w21 + grad_p;
    let rhs =
        f_lsl + report.value("g_w10").unwrap_or(0.0) + report.value("dtg_mixed").unwrap_or(0.0);
    report.insert("v_w21", v_w21)?;
    report.insert("grad_p_lsl", grad_p)?;
    report.insert("f_lsl", f_lsl)?;
    report.insert("estimate_lhs", lhs)?;
    report.insert("estimate_rhs", rhs)?;
    if rhs > 0.0 {
        report.insert_ratio("estimate", lhs / rhs)?;
    }
    let mut div_res: f64 = 0.0;
    let mut bd: f64 = 0.0;
    for (vk, gk) in v.slices().iter().zip(data.g.slices()) {
        div_res = div_res.max(integrate_disc(&divergence(vk)?.sub(gk)?, 2.0)?);
        bd = bd.max(max_boundary_magnitude(vk));
    }
    report.insert("div_residual", div_res)?;
    report.insert("boundary_max", bd)?;
    Ok(SolutionPair { v, p, report })
}

/// `max_t ‖v₁(t) − v₂(t)‖_{L_2}` over the time nodes shared by two runs of
/// the same problem, possibly sampled on different time grids.
pub fn energy_uniqueness_check(
    a: (&ProblemData, &StokesConfig),
    b: (&ProblemData, &StokesConfig),
) -> Result<f64> {
    let va = solve_stokes(a.0, a.1)?.v;
    let vb = solve_stokes(b.0, b.1)?.v;
    if va.grid() != vb.grid() {
        return Err(Error::GridMismatch);
    }
    let (coarse, fine) = if va.time().len() <= vb.time().len() {
        (&va, &vb)
    } else {
        (&vb, &va)
    };
    let mut worst: f64 = 0.0;
    let fine_times = fine.time().times();
    let tol = 1e-9 * fine.time().dt();
    for (k, t) in coarse.time().times().into_iter().enumerate() {
        let j = fine_times
            .iter()
            .position(|s| (s - t).abs() <= tol)
            .ok_or_else(|| {
                Error::InvalidInput(format!("time {t} is not a node of the finer grid"))
            })?;
        worst = worst.max(integrate_disc(&coarse.slice(k).sub(fine.slice(j))?, 2.0)?);
    }
    Ok(worst)
}
