use std::f64::consts::PI;
use std::fmt;
use std::fs;

use serde::{Deserialize, Serialize};

use stokeslab::counterexample::{
    alpha_checks, boundary_divergence_check, divergence_demonstration, norm_table,
    CounterexampleSpec, NORM_COLUMNS,
};
use stokeslab::divsolve::solve_div;
use stokeslab::manufactured::{ExpPoly, ManufacturedFlow};
use stokeslab::ops::integrate_disc;
use stokeslab::stokes::{solve_stokes, ProblemData, StokesConfig};
use stokeslab::{DiscField, DiscGrid, Error, Rank, SpaceTimeField, SpaceTimeFile, SpaceTimeGrid};

use crate::config::{DataKind, RunConfig};
use crate::output::{num, Check, Outputs};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or unusable input data: exit 2.
    Usage(String),
    /// Named invariant checks failed: exit 1.
    Check(Vec<String>),
    /// The computation itself failed: exit 1.
    Runtime(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Check(_) | CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Check(names) => write!(f, "failed checks: {}", names.join(", ")),
            CliError::Runtime(m) => write!(f, "{m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(_)
            | Error::NotMeanZero { .. }
            | Error::RankMismatch { .. }
            | Error::GridMismatch
            | Error::Serde(_)
            | Error::Slice { .. } => CliError::Usage(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

fn print_checks(checks: &[Check]) {
    for c in checks {
        let verdict = if c.passed { "PASS" } else { "FAIL" };
        println!(
            "{verdict}  {:<16} {:<24} value {:<12.4e} tol {:.4e}",
            c.module, c.name, c.value, c.tolerance
        );
    }
}

/// Prints the checks, writes the metadata and maps failures to exit 1.
fn conclude(out: Outputs, cfg: &RunConfig, checks: Vec<Check>) -> Result<(), CliError> {
    print_checks(&checks);
    out.finish(cfg, &checks)?;
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{}/{}", c.module, c.name))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Check(failed))
    }
}

pub fn counterexample(cfg: &RunConfig) -> Result<(), CliError> {
    let modes = cfg.modes.expect("set by the parser");
    let spec = CounterexampleSpec::new(modes, cfg.eps.expect("set by the parser"))?.with_grid(
        cfg.n_r,
        cfg.n_theta.max(modes + 1),
        cfg.n_t,
    );
    let mut out = Outputs::create(&cfg.out)?;

    let table = norm_table(&spec);
    let mut header = vec!["N"];
    header.extend(NORM_COLUMNS);
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|(n, vals)| {
            std::iter::once(n.to_string())
                .chain(vals.iter().map(|v| num(*v)))
                .collect()
        })
        .collect();
    out.csv("norm_table.csv", &header, &rows)?;
    out.text("report.csv", &table.report()?.to_csv()?)?;

    let demo = divergence_demonstration(&spec);
    let rows: Vec<Vec<String>> = demo
        .rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                num(r.partial_sum),
                num(r.partial_sum_over_n),
            ]
        })
        .collect();
    out.csv("divergence.csv", &["N", "S_N", "S_N/N"], &rows)?;

    let alpha: Vec<_> = (1..=modes).map(alpha_checks).collect();
    let max_constant = cfg.tol("alpha_constant");
    let rows: Vec<Vec<String>> = alpha
        .iter()
        .map(|a| {
            vec![
                a.n.to_string(),
                num(a.value_at_one),
                num(a.slope_at_one),
                num(a.inner_value),
                num(a.inner_slope),
                num(a.first_derivative_constant),
                num(a.second_derivative_constant),
                a.strictly_between.to_string(),
                num(a.expansion_mismatch),
                a.passed(max_constant).to_string(),
            ]
        })
        .collect();
    out.csv(
        "alpha_checks.csv",
        &[
            "n",
            "value_at_one",
            "slope_at_one",
            "inner_value",
            "inner_slope",
            "first_derivative_constant",
            "second_derivative_constant",
            "strictly_between",
            "expansion_mismatch",
            "passed",
        ],
        &rows,
    )?;

    let mut checks = Vec::new();
    let worst_constant = alpha.iter().map(|a| a.constant()).fold(0.0, f64::max);
    checks.push(Check {
        passed: alpha.iter().all(|a| a.passed(max_constant)),
        ..Check::at_most(
            "counterexample",
            "alpha_certificate",
            worst_constant,
            max_constant,
        )
    });
    let quad = demo
        .rows
        .iter()
        .take(20)
        .map(|r| ((r.term_quadrature - r.term_closed) / r.term_closed).abs())
        .fold(0.0, f64::max);
    checks.push(Check::at_most(
        "counterexample",
        "divergence_quadrature",
        quad,
        cfg.tol("divergence_quadrature"),
    ));
    let largest_mean = demo
        .rows
        .iter()
        .map(|r| r.partial_sum_over_n)
        .fold(0.0, f64::max);
    checks.push(Check::at_most(
        "counterexample",
        "partial_sum_mean",
        largest_mean,
        1.0 / 6.0,
    ));
    let non_finite = table
        .rows
        .iter()
        .flat_map(|(_, r)| r.iter())
        .filter(|v| !v.is_finite())
        .count();
    checks.push(Check::at_most(
        "counterexample",
        "finite_norms",
        non_finite as f64,
        0.0,
    ));
    let bd = boundary_divergence_check(&spec)?;
    checks.push(Check::at_most(
        "counterexample",
        "boundary_divergence",
        bd.div_w.max(bd.coefficient),
        cfg.tol("boundary_divergence"),
    ));
    conclude(out, cfg, checks)
}

pub fn divsolve(cfg: &RunConfig) -> Result<(), CliError> {
    let g = match &cfg.input {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            let g = DiscField::from_json(&text, None)?;
            g.expect_rank(Rank::Scalar)?;
            g
        }
        None => {
            let n = cfg.mode.expect("set by the parser");
            let grid = DiscGrid::new(cfg.n_r, cfg.n_theta.max(n))?;
            DiscField::from_fn(&grid, |r, th| r.powi(n as i32) * (n as f64 * th).sin())
        }
    };
    let sol = solve_div(&g, cfg.order())?;
    let mut out = Outputs::create(&cfg.out)?;
    out.text("u.json", &(sol.u.to_json()? + "\n"))?;
    out.text("report.csv", &sol.report.to_csv()?)?;
    let checks = vec![
        Check::at_most(
            "div-solver",
            "div_residual",
            sol.residual_div,
            cfg.tol("div_residual"),
        ),
        Check::at_most(
            "div-solver",
            "boundary",
            sol.residual_boundary,
            cfg.tol("boundary"),
        ),
    ];
    conclude(out, cfg, checks)
}

/// Input of the `stokes` command.
#[derive(Debug, Serialize, Deserialize)]
pub struct ProblemFile {
    pub f: SpaceTimeFile,
    pub g: SpaceTimeFile,
}

fn builtin_data(cfg: &RunConfig) -> Result<(SpaceTimeField, SpaceTimeField), CliError> {
    let grid = DiscGrid::new(cfg.n_r, cfg.n_theta)?;
    let t_end = cfg.t_end.expect("set by the parser");
    let time = SpaceTimeGrid::new(0.0, t_end, cfg.n_t)?;
    let zero_f = SpaceTimeField::zeros(time, &grid, Rank::Vector);
    let zero_g = SpaceTimeField::zeros(time, &grid, Rank::Scalar);
    Ok(match cfg.data.expect("set by the parser") {
        DataKind::Zero => (zero_f, zero_g),
        DataKind::Manufactured => {
            let flow = ManufacturedFlow::new(
                &ExpPoly::poly(&[((0, 0), 1.0), ((1, 0), 0.5), ((1, 1), -0.7)]),
                ExpPoly::poly(&[((1, 1), 1.0), ((3, 0), 0.5)]),
            );
            (flow.forcing_field(time, &grid)?, zero_g)
        }
        DataKind::Divergence => {
            let g = SpaceTimeField::from_fn(time, |t| {
                DiscField::from_fn(&grid, |r, th| (PI * t).sin() * r * r * (2.0 * th).sin())
            })?;
            (zero_f, g)
        }
    })
}

pub fn stokes(cfg: &RunConfig) -> Result<(), CliError> {
    let (f, g) = match &cfg.input {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            let file: ProblemFile =
                serde_json::from_str(&text).map_err(|e| CliError::Usage(e.to_string()))?;
            let f = SpaceTimeField::from_file(&file.f, None)?;
            let g = SpaceTimeField::from_file(&file.g, Some(f.grid()))?;
            (f, g)
        }
        None => builtin_data(cfg)?,
    };
    let data = ProblemData::new(f, g, cfg.order())?;
    let solver = StokesConfig {
        scheme: cfg.scheme.expect("set by the parser").into(),
        pressure: cfg.pressure.expect("set by the parser").into(),
        ..StokesConfig::default()
    };
    let sol = solve_stokes(&data, &solver)?;
    let mut out = Outputs::create(&cfg.out)?;
    out.text("v.json", &(sol.v.to_json()? + "\n"))?;
    out.text("p.json", &(sol.p.to_json()? + "\n"))?;
    out.text("report.csv", &sol.report.to_csv()?)?;
    let rows = sol
        .v
        .time()
        .times()
        .into_iter()
        .zip(sol.v.slices().iter().zip(sol.p.slices()))
        .map(|(t, (v, p))| {
            Ok(vec![
                num(t),
                num(integrate_disc(v, 2.0)?),
                num(integrate_disc(p, 2.0)?),
            ])
        })
        .collect::<Result<Vec<_>, Error>>()?;
    out.csv("energy.csv", &["t", "v_l2", "p_l2"], &rows)?;
    let checks = vec![
        Check::at_most(
            "stokes",
            "div_residual",
            sol.report.value("div_residual").unwrap_or(f64::NAN),
            cfg.tol("div_residual"),
        ),
        Check::at_most(
            "stokes",
            "boundary",
            sol.report.value("boundary_max").unwrap_or(f64::NAN),
            cfg.tol("boundary"),
        ),
    ];
    conclude(out, cfg, checks)
}

pub fn verify(cfg: &RunConfig) -> Result<(), CliError> {
    let checks = crate::verify::run(cfg)?;
    let mut out = Outputs::create(&cfg.out)?;
    let rows: Vec<Vec<String>> = checks
        .iter()
        .map(|c| {
            vec![
                c.module.to_string(),
                c.name.clone(),
                num(c.value),
                num(c.tolerance),
                c.passed.to_string(),
            ]
        })
        .collect();
    out.csv(
        "verify.csv",
        &["module", "check", "value", "tolerance", "passed"],
        &rows,
    )?;
    conclude(out, cfg, checks)
}
