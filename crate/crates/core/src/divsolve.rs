//! Right inverse of the divergence with zero boundary values.
//!
//! For mean-zero `g`, solve `Δφ = g` with `φ|_{∂Ω} = 0`, set `κ = ∂φ/∂ν` and
//! `u = ∇φ + T₃κ`. Then `div u = g` and `u|_{∂Ω} = κν − κν = 0`.

use crate::boundary::{solenoidal_lift, ExtensionKernel};
use crate::elliptic::solve_dirichlet;
use crate::error::{Error, Result};
use crate::field::{DiscField, Rank};
use crate::norms::{dual_norm, dual_norm_estimate, norm_w1, norm_w2, NormOrder, NormReport};
use crate::ops::{disc_integral, divergence, gradient, integrate_disc, max_boundary_magnitude};

/// Tolerance on `|∫_Ω g dx|` for accepted data.
pub const MEAN_ZERO_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct DivSolution {
    pub u: DiscField,
    /// `‖div u − g‖_{L_2} / ‖g‖_{L_2}`, zero for `g = 0`.
    pub residual_div: f64,
    /// `max_θ |u(1, θ)|`.
    pub residual_boundary: f64,
    pub report: NormReport,
}

fn kernel() -> &'static ExtensionKernel {
    static KERNEL: std::sync::OnceLock<ExtensionKernel> = std::sync::OnceLock::new();
    KERNEL.get_or_init(ExtensionKernel::new)
}

/// `u = ∇φ + T₃κ` without diagnostics.
pub fn div_inverse(g: &DiscField) -> Result<DiscField> {
    g.expect_rank(Rank::Scalar)?;
    let mean = disc_integral(g)?;
    if mean.abs() > MEAN_ZERO_TOL {
        return Err(Error::NotMeanZero {
            value: mean,
            tol: MEAN_ZERO_TOL,
        });
    }
    let sol = solve_dirichlet(g)?;
    let flux = sol.flux();
    if (flux - mean).abs() > MEAN_ZERO_TOL {
        return Err(Error::SolverFailure {
            mode: 0,
            reason: format!("boundary flux {flux:e} does not match the source integral {mean:e}"),
        });
    }
    let mut coeffs = sol.kappa.coeffs().to_vec();
    coeffs[0] = num_complex::Complex64::new(0.0, 0.0);
    let kappa = crate::trace::BoundaryTrace::from_coeffs(coeffs);
    let w = solenoidal_lift(kernel(), &kappa, g.grid())?.w;
    gradient(&sol.phi)?.add(&w)
}

/// Solves `div u = g`, `u|_{∂Ω} = 0` and reports the norms of the
/// multiplicative estimate `‖u‖_{L_s} ≤ C ‖g‖_{L_s}^{1/s} ‖g‖_{W^{-1}_s}^{1/s'}`
/// and of `‖u‖_{W^2_s} ≤ C ‖g‖_{W^1_s}`.
pub fn solve_div(g: &DiscField, o: NormOrder) -> Result<DivSolution> {
    let u = div_inverse(g)?;
    let s = o.s();
    let g_l2 = integrate_disc(g, 2.0)?;
    let res = integrate_disc(&divergence(&u)?.sub(g)?, 2.0)?;
    let residual_div = if g_l2 > 0.0 { res / g_l2 } else { res };
    let residual_boundary = max_boundary_magnitude(&u);

    let u_ls = integrate_disc(&u, s)?;
    let g_ls = integrate_disc(g, s)?;
    let g_dual = if s == 2.0 {
        dual_norm(g)?
    } else {
        dual_norm_estimate(g, o)?
    };
    let u_w2 = norm_w2(&u, s)?;
    let g_w1 = norm_w1(g, s)?;
    let mut report = NormReport::new();
    report.insert("u_ls", u_ls)?;
    report.insert("g_ls", g_ls)?;
    report.insert("g_dual", g_dual)?;
    report.insert("u_w2", u_w2)?;
    report.insert("g_w1", g_w1)?;
    report.insert("residual_div", residual_div)?;
    report.insert("residual_boundary", residual_boundary)?;
    let den = g_ls.powf(1.0 / s) * g_dual.powf(1.0 / o.s_dual());
    if den > 0.0 {
        report.insert_ratio("multiplicative", u_ls / den)?;
        report.insert_ratio("naive", u_ls / g_ls)?;
        report.insert_ratio("w2_over_w1", u_w2 / g_w1)?;
    }
    Ok(DivSolution {
        u,
        residual_div,
        residual_boundary,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::DiscGrid;
    use proptest::prelude::*;

    fn single_mode(g: &DiscGrid, n: usize) -> DiscField {
        let nf = n as f64;
        DiscField::from_fn(g, |r, t| r.powi(n as i32) * (nf * t).sin())
    }

    #[test]
    fn zero_data() {
        let g = DiscGrid::new(32, 6).unwrap();
        let sol = solve_div(&DiscField::zeros(&g, Rank::Scalar), NormOrder::hilbert()).unwrap();
        assert_eq!(sol.u.max_abs_coeff(), 0.0);
        assert_eq!(sol.residual_div, 0.0);
        assert_eq!(sol.residual_boundary, 0.0);
    }

    #[test]
    fn rejects_data_with_nonzero_mean() {
        let g = DiscGrid::new(16, 4).unwrap();
        let one = DiscField::from_fn(&g, |_, _| 1.0);
        assert!(matches!(
            solve_div(&one, NormOrder::hilbert()),
            Err(Error::NotMeanZero { .. })
        ));
    }

    #[test]
    fn single_mode_residuals() {
        let g = DiscGrid::new(96, 16).unwrap();
        for n in [2usize, 4, 8, 16] {
            let sol = solve_div(&single_mode(&g, n), NormOrder::hilbert()).unwrap();
            assert!(sol.residual_div < 1e-8, "n = {n}: {}", sol.residual_div);
            assert!(
                sol.residual_boundary < 1e-6,
                "n = {n}: {}",
                sol.residual_boundary
            );
        }
    }

    #[test]
    fn gradient_part_is_removed_exactly() {
        let g = DiscGrid::new(64, 8).unwrap();
        let rhs = DiscField::from_fn(&g, |r, t| {
            r * r * (2.0 * t).sin() + (r.powi(3) - 0.8 * r) * t.cos()
        });
        let u = div_inverse(&rhs).unwrap();
        let grad = gradient(&solve_dirichlet(&rhs).unwrap().phi).unwrap();
        let rest = u.sub(&grad).unwrap();
        assert!(integrate_disc(&divergence(&rest).unwrap(), 2.0).unwrap() < 1e-9);
    }

    #[test]
    fn general_exponent_report() {
        let g = DiscGrid::new(48, 8).unwrap();
        let sol = solve_div(&single_mode(&g, 3), NormOrder::new(3.0, 2.0).unwrap()).unwrap();
        let r = sol.report.ratio("multiplicative").unwrap();
        assert!(r.is_finite() && r > 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn linear_and_scale_invariant(a in -3.0f64..3.0, lambda in 0.1f64..10.0, k in 1usize..5) {
            let g = DiscGrid::new(48, 6).unwrap();
            let g1 = single_mode(&g, k);
            let g2 = DiscField::from_fn(&g, |r, t| (r * r - 0.5) + r * (t + a).cos());
            let u1 = div_inverse(&g1).unwrap();
            let u2 = div_inverse(&g2).unwrap();
            let mix = div_inverse(&g1.axpy(a, &g2).unwrap()).unwrap();
            prop_assert!(mix.sub(&u1.axpy(a, &u2).unwrap()).unwrap().max_abs_coeff() < 1e-10 * (1.0 + a.abs()));
            let o = NormOrder::hilbert();
            let base = solve_div(&g2, o).unwrap();
            let scaled = solve_div(&g2.scaled(lambda), o).unwrap();
            let r0 = base.report.ratio("multiplicative").unwrap();
            let r1 = scaled.report.ratio("multiplicative").unwrap();
            prop_assert!((r0 - r1).abs() <= 1e-10 * r0);
            prop_assert!(scaled.u.sub(&base.u.scaled(lambda)).unwrap().max_abs_coeff() <= 1e-10 * lambda);
        }
    }
}
