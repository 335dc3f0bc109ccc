//! The property suite behind `stokeslab verify`: one quick check per
//! invariant of every module.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use stokeslab::boundary::{solenoidal_lift, ExtensionKernel};
use stokeslab::counterexample::{
    alpha_checks, divergence_demonstration, norm_table, CounterexampleSpec,
};
use stokeslab::divsolve::solve_div;
use stokeslab::elliptic::{first_eigenpair, solve_dirichlet};
use stokeslab::localization::{
    iteration_constant, iteration_constant_series, iteration_lemma, localize_data,
    localized_residual as localized_residual_of, young_split, CutoffProfile, IterationInstance,
};
use stokeslab::manufactured::{ExpPoly, ManufacturedFlow};
use stokeslab::norms::{dual_norm, trace_inequality_ratio};
use stokeslab::ops::{divergence, integrate_disc};
use stokeslab::stokes::{solve_stokes_homogeneous, solve_stokes_homogeneous_from, StokesConfig};
use stokeslab::trace::BoundaryTrace;
use stokeslab::{DiscField, DiscGrid, Rank, Result, SpaceTimeField, SpaceTimeGrid};

use crate::commands::CliError;
use crate::config::RunConfig;
use crate::output::Check;

const DEFAULTS: [(&str, f64); 16] = [
    ("disc_area", 1e-12),
    ("field_roundtrip", 0.0),
    ("dirichlet_exact", 1e-10),
    ("dual_norm_eigen", 1e-8),
    ("trace_spread", 3.0),
    ("lift_divergence", 1e-8),
    ("lift_boundary", 1e-6),
    ("div_residual", 1e-8),
    ("div_boundary", 1e-6),
    ("time_order_ratio", 1.0 / 3.5),
    ("energy_increase", 1e-12),
    ("alpha_constant", 10.0),
    ("divergence_mean", 0.01),
    ("dt_g_growth", 0.3),
    ("iteration_constant", 1e-10),
    ("localized_residual", 1e-4),
];

pub fn default_tolerances() -> BTreeMap<String, f64> {
    DEFAULTS.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

type Probe = fn(&RunConfig) -> Result<f64>;

const PROBES: [(&str, &str, Probe); 16] = [
    ("disc-core", "disc_area", disc_area),
    ("disc-core", "field_roundtrip", field_roundtrip),
    ("elliptic", "dirichlet_exact", dirichlet_exact),
    ("norms", "dual_norm_eigen", dual_norm_eigen),
    ("norms", "trace_spread", trace_spread),
    ("boundary-ops", "lift_divergence", lift_divergence),
    ("boundary-ops", "lift_boundary", lift_boundary),
    ("div-solver", "div_residual", div_residual),
    ("div-solver", "div_boundary", div_boundary),
    ("stokes", "time_order_ratio", time_order_ratio),
    ("stokes", "energy_increase", energy_increase),
    ("counterexample", "alpha_constant", alpha_constant),
    ("counterexample", "divergence_mean", divergence_mean),
    ("counterexample", "dt_g_growth", dt_g_growth),
    ("localization", "iteration_constant", iteration_gap),
    ("localization", "localized_residual", localized_residual),
];

/// Runs every probe and compares it with its tolerance. A probe that errors
/// reports NaN and fails.
pub fn run(cfg: &RunConfig) -> std::result::Result<Vec<Check>, CliError> {
    let mut checks: Vec<Check> = PROBES
        .par_iter()
        .map(|(module, name, probe)| {
            let value = probe(cfg).unwrap_or(f64::NAN);
            Check::at_most(module, name, value, cfg.tol(name))
        })
        .collect();
    checks.push(localization_extras(cfg));
    Ok(checks)
}

fn disc_area(cfg: &RunConfig) -> Result<f64> {
    let g = DiscGrid::new(cfg.n_r, cfg.n_theta)?;
    let one = DiscField::from_fn(&g, |_, _| 1.0);
    Ok((integrate_disc(&one, 1.0)? - PI).abs())
}

fn field_roundtrip(cfg: &RunConfig) -> Result<f64> {
    let g = DiscGrid::new(cfg.n_r.min(32), cfg.n_theta)?;
    let f =
        DiscField::from_fn_cartesian(&g, |r, th| [r * th.cos().powi(3), (r * r - 0.3) * th.sin()]);
    let back = DiscField::from_json(&f.to_json()?, None)?;
    Ok(back.sub(&f)?.max_abs_coeff())
}

/// `Δφ = 4`, `φ = 0` on the circle: `φ = r² − 1`.
fn dirichlet_exact(cfg: &RunConfig) -> Result<f64> {
    let g = DiscGrid::new(cfg.n_r, cfg.n_theta)?;
    let sol = solve_dirichlet(&DiscField::from_fn(&g, |_, _| 4.0))?;
    let exact = DiscField::from_fn(&g, |r, _| r * r - 1.0);
    Ok(sol.phi.sub(&exact)?.max_abs_coeff())
}

/// For `−Δe = λe` the dual norm is `‖e‖/√λ`.
fn dual_norm_eigen(cfg: &RunConfig) -> Result<f64> {
    let g = DiscGrid::new(cfg.n_r.min(64), cfg.n_theta.max(2))?;
    let mut worst: f64 = 0.0;
    for m in [0usize, 2] {
        let (lambda, e) = first_eigenpair(&g, m)?;
        let expected = integrate_disc(&e, 2.0)? / lambda.sqrt();
        worst = worst.max((dual_norm(&e)? / expected - 1.0).abs());
    }
    Ok(worst)
}

/// Largest trace ratio over the family median, random polynomials plus `r^k`.
fn trace_spread(cfg: &RunConfig) -> Result<f64> {
    let g = DiscGrid::new(64, 8)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut ratios = Vec::new();
    for _ in 0..20 {
        let terms: Vec<((u32, u32), f64)> = (0..6)
            .map(|_| {
                (
                    (rng.gen_range(0..5), rng.gen_range(0..5)),
                    rng.gen_range(-1.0..1.0),
                )
            })
            .collect();
        let p = ExpPoly::poly(&terms);
        ratios.push(trace_inequality_ratio(
            &DiscField::from_fn(&g, |r, th| p.eval_polar(r, th)),
            2.0,
        )?);
    }
    for k in 0..=32 {
        ratios.push(trace_inequality_ratio(
            &DiscField::from_fn(&g, |r, _| r.powi(k)),
            2.0,
        )?);
    }
    ratios.retain(|r| *r > 0.0);
    ratios.sort_by(|a, b| a.partial_cmp(b).expect("finite ratios"));
    Ok(ratios[ratios.len() - 1] / ratios[ratios.len() / 2])
}

fn lift(cfg: &RunConfig) -> Result<(DiscField, BoundaryTrace)> {
    let n_theta = cfg.n_theta.max(3);
    let g = DiscGrid::new(cfg.n_r, n_theta)?;
    let kappa = BoundaryTrace::cosine(3, n_theta);
    Ok((
        solenoidal_lift(&ExtensionKernel::new(), &kappa, &g)?.w,
        kappa,
    ))
}

fn lift_divergence(cfg: &RunConfig) -> Result<f64> {
    let (w, _) = lift(cfg)?;
    integrate_disc(&divergence(&w)?, 2.0)
}

/// `max_θ |w(1, θ) + κν|`.
fn lift_boundary(cfg: &RunConfig) -> Result<f64> {
    let (w, kappa) = lift(cfg)?;
    let last = w.grid().radial().len() - 1;
    Ok(w.grid()
        .angles()
        .into_iter()
        .map(|th| (w.value_at(0, last, th) + kappa.value(th)).hypot(w.value_at(1, last, th)))
        .fold(0.0, f64::max))
}

fn div_solution(cfg: &RunConfig) -> Result<stokeslab::divsolve::DivSolution> {
    let g = DiscGrid::new(cfg.n_r, cfg.n_theta.max(2))?;
    solve_div(
        &DiscField::from_fn(&g, |r, th| r * r * (2.0 * th).sin()),
        cfg.order(),
    )
}

fn div_residual(cfg: &RunConfig) -> Result<f64> {
    Ok(div_solution(cfg)?.residual_div)
}

fn div_boundary(cfg: &RunConfig) -> Result<f64> {
    Ok(div_solution(cfg)?.residual_boundary)
}

fn flow() -> ManufacturedFlow {
    ManufacturedFlow::new(
        &ExpPoly::poly(&[((0, 0), 1.0), ((1, 0), 0.5), ((1, 1), -0.7)]),
        ExpPoly::poly(&[((1, 1), 1.0), ((3, 0), 0.5)]),
    )
}

/// `e(dt/2)/e(dt)` for Crank–Nicolson; second order gives about 1/4.
fn time_order_ratio(_: &RunConfig) -> Result<f64> {
    let g = DiscGrid::new(16, 8)?;
    let m = flow();
    let err = |n_t: usize| -> Result<f64> {
        let time = SpaceTimeGrid::new(0.0, 0.5, n_t)?;
        let sol = solve_stokes_homogeneous(&m.forcing_field(time, &g)?, &StokesConfig::default())?;
        let exact = m.velocity_field(time, &g)?;
        integrate_disc(&sol.v.slice(n_t).sub(exact.slice(n_t))?, 2.0)
    };
    Ok(err(40)? / err(20)?)
}

/// Largest relative growth of `‖u(t)‖` between steps of an unforced run.
fn energy_increase(_: &RunConfig) -> Result<f64> {
    let g = DiscGrid::new(20, 6)?;
    let time = SpaceTimeGrid::new(0.0, 0.2, 100)?;
    let m = flow();
    let psi0 = DiscField::from_fn(&g, |r, th| m.stream.eval_polar(r, th));
    let sol = solve_stokes_homogeneous_from(
        &psi0,
        &SpaceTimeField::zeros(time, &g, Rank::Vector),
        &StokesConfig::default(),
    )?;
    let norms = sol
        .v
        .slices()
        .iter()
        .map(|s| integrate_disc(s, 2.0))
        .collect::<Result<Vec<f64>>>()?;
    Ok(norms
        .windows(2)
        .map(|w| (w[1] / w[0] - 1.0).max(0.0))
        .fold(0.0, f64::max))
}

/// Largest certificate constant; any failed condition reports infinity.
fn alpha_constant(_: &RunConfig) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for n in [1usize, 2, 5, 10, 50, 200] {
        let c = alpha_checks(n);
        if !c.passed(f64::INFINITY) {
            return Ok(f64::INFINITY);
        }
        worst = worst.max(c.constant());
    }
    Ok(worst)
}

/// Relative distance of `S_60/60` from `1/6`.
fn divergence_mean(_: &RunConfig) -> Result<f64> {
    let demo = divergence_demonstration(&CounterexampleSpec::new(60, 0.01)?);
    let last = demo.rows.last().expect("60 rows").partial_sum_over_n;
    Ok((6.0 * last - 1.0).abs())
}

fn dt_g_growth(_: &RunConfig) -> Result<f64> {
    Ok((norm_table(&CounterexampleSpec::new(200, 0.01)?).dt_g_growth - 5.0).abs())
}

/// Closed form against the series of the iteration constant, with the
/// conclusion required to hold for `Ψ(ρ) = 1/(1 − ρ)^α`.
fn iteration_gap(_: &RunConfig) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for alpha in [1.0f64, 2.0, 4.0] {
        let eps = 2f64.powf(-alpha - 1.0);
        let inst = IterationInstance::sample(
            |rho| (1.0 - rho).powf(-alpha),
            0.5,
            1.0,
            100,
            1.0,
            alpha,
            eps,
        )?;
        if !iteration_lemma(&inst)?.holds {
            return Ok(f64::INFINITY);
        }
        let closed = iteration_constant(eps, alpha);
        worst = worst.max((iteration_constant_series(eps, alpha) / closed - 1.0).abs());
    }
    Ok(worst)
}

/// Larger of the momentum and divergence residuals of a localized
/// manufactured flow.
fn localized_residual(_: &RunConfig) -> Result<f64> {
    let g = DiscGrid::new(128, 8)?;
    let time = SpaceTimeGrid::new(-0.8, 0.0, 400)?;
    let m = ManufacturedFlow::new(
        &ExpPoly::poly(&[((0, 0), 1.0), ((1, 1), 0.5), ((2, 0), -0.3)]),
        ExpPoly::poly(&[((1, 0), 1.0), ((1, 2), 0.4)]),
    );
    let (u, q, f) = (
        m.velocity_field(time, &g)?,
        m.pressure_field(time, &g)?,
        m.forcing_field(time, &g)?,
    );
    let (lf, lg, v, p) = localize_data(&u, &q, &f, &CutoffProfile::new(0.5, 0.9)?)?;
    let res = localized_residual_of(&v, &p, &lf, &lg)?;
    Ok(res.momentum.max(res.divergence))
}

/// Cutoff derivative bounds and Young's inequality on seeded samples; the
/// value counts violations.
fn localization_extras(cfg: &RunConfig) -> Check {
    let mut violations = 0usize;
    for (inner, outer) in [(0.5, 0.9), (0.6, 0.7)] {
        let c = CutoffProfile::new(inner, outer).expect("valid radii");
        let (d, m) = (c.declared_bounds(), c.measured_bounds(2000));
        if m.gradient > d.gradient || m.hessian > d.hessian || m.time > d.time {
            violations += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    for _ in 0..200 {
        let (a, b) = (rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0));
        let (s, eps) = (rng.gen_range(1.1..4.0), rng.gen_range(0.01..2.0));
        match young_split(a, b, s, eps) {
            Ok((lhs, rhs)) if lhs <= rhs * (1.0 + 1e-12) => {}
            _ => violations += 1,
        }
    }
    Check::at_most("localization", "cutoff_and_young", violations as f64, 0.0)
}
