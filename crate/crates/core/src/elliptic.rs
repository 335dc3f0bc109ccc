//! Dirichlet problem for the Poisson equation on the disc.
//!
//! Each Fourier mode gives the radial problem
//! `φ'' + φ'/r − m²φ/r² = g` with `φ(1) = 0`, solved by collocating the
//! discrete Laplacian of [`crate::ops::laplacian`] at the Gauss nodes and
//! replacing the boundary row by `φ(1) = 0`. The Gauss nodes exclude `r = 0`,
//! so the polynomial solution is automatically the regular one. Factorizations
//! are cached per `(n_r, m)`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, DVector, Dyn, LU};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{DiscField, Rank};
use crate::grid::{DiscGrid, RadialGrid};
use crate::ops::{diff_profile, integrate_disc, laplacian};
use crate::trace::BoundaryTrace;

type Factor = LU<f64, Dyn, Dyn>;

/// Matrix of `φ ↦ (1/r)(r φ')' − m² φ / r²` on all radial nodes.
pub fn radial_laplacian(radial: &RadialGrid, m: usize) -> DMatrix<f64> {
    let d = radial.diff();
    let nodes = radial.nodes();
    let n = nodes.len();
    let rd = DMatrix::from_fn(n, n, |i, j| nodes[i] * d[(i, j)]);
    let mut l = d * rd;
    let m2 = (m * m) as f64;
    for i in 0..n {
        for j in 0..n {
            l[(i, j)] /= nodes[i];
        }
        l[(i, i)] -= m2 / (nodes[i] * nodes[i]);
    }
    l
}

fn cache() -> &'static Mutex<HashMap<(usize, usize), Arc<Factor>>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Factor>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn factor_for(radial: &RadialGrid, m: usize) -> Result<Arc<Factor>> {
    let key = (radial.n_r(), m);
    if let Some(f) = cache().lock().expect("cache poisoned").get(&key) {
        return Ok(f.clone());
    }
    let mut a = radial_laplacian(radial, m);
    let last = radial.len() - 1;
    a.row_mut(last).fill(0.0);
    a[(last, last)] = 1.0;
    let lu = a.lu();
    if !lu.is_invertible() {
        return Err(Error::SolverFailure {
            mode: m,
            reason: "singular Dirichlet matrix".into(),
        });
    }
    let lu = Arc::new(lu);
    cache()
        .lock()
        .expect("cache poisoned")
        .insert(key, lu.clone());
    Ok(lu)
}

fn solve_real(lu: &Factor, rhs: Vec<f64>, m: usize) -> Result<Vec<f64>> {
    lu.solve(&DVector::from_vec(rhs))
        .map(|v| v.as_slice().to_vec())
        .ok_or_else(|| Error::SolverFailure {
            mode: m,
            reason: "back substitution failed".into(),
        })
}

/// Solves mode `m` of the Dirichlet problem for a complex right-hand side
/// given at all radial nodes (the boundary entry is ignored).
pub fn solve_mode(radial: &RadialGrid, m: usize, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
    let lu = factor_for(radial, m)?;
    let last = radial.len() - 1;
    let mut re: Vec<f64> = rhs.iter().map(|c| c.re).collect();
    let mut im: Vec<f64> = rhs.iter().map(|c| c.im).collect();
    re[last] = 0.0;
    im[last] = 0.0;
    let re = solve_real(&lu, re, m)?;
    let im = solve_real(&lu, im, m)?;
    Ok(re
        .into_iter()
        .zip(im)
        .map(|(a, b)| Complex64::new(a, b))
        .collect())
}

/// Solution of `Δφ = g`, `φ|_{∂Ω} = 0`, with its normal derivative.
#[derive(Debug, Clone)]
pub struct DirichletSolution {
    pub phi: DiscField,
    /// `‖Δφ − g‖_{L_2(Ω)}` of the discrete solution.
    pub residual: f64,
    /// `∂φ/∂ν` on the unit circle.
    pub kappa: BoundaryTrace,
}

impl DirichletSolution {
    /// `∫_{∂Ω} κ ds`, equal to `∫_Ω g dx` by the divergence theorem.
    pub fn flux(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.kappa.mean()
    }
}

pub fn solve_dirichlet(g: &DiscField) -> Result<DirichletSolution> {
    g.expect_rank(Rank::Scalar)?;
    let grid = g.grid();
    let radial = grid.radial();
    let profiles: Vec<Vec<Complex64>> = (0..=grid.n_theta())
        .into_par_iter()
        .map(|m| solve_mode(radial, m, g.mode(0, m)))
        .collect::<Result<_>>()?;
    let mut phi = DiscField::zeros(grid, Rank::Scalar);
    let last = radial.len() - 1;
    let mut kappa = Vec::with_capacity(profiles.len());
    for (m, p) in profiles.into_iter().enumerate() {
        kappa.push(diff_profile(radial, &p)[last]);
        phi.mode_mut(0, m).copy_from_slice(&p);
    }
    let residual = integrate_disc(&laplacian(&phi)?.sub(g)?, 2.0)?;
    Ok(DirichletSolution {
        phi,
        residual,
        kappa: BoundaryTrace::from_coeffs(kappa),
    })
}

/// `‖Δf‖_{L_2(Ω)}`.
pub fn harmonic_check(f: &DiscField) -> Result<f64> {
    integrate_disc(&laplacian(f)?, 2.0)
}

/// Smallest eigenvalue `λ` of `−Δ` with Dirichlet conditions restricted to
/// angular mode `m`, and its eigenfunction `cos(mθ) u(r)` normalized in
/// `L_2(Ω)`, by inverse iteration.
pub fn first_eigenpair(grid: &DiscGrid, m: usize) -> Result<(f64, DiscField)> {
    if m > grid.n_theta() {
        return Err(Error::InvalidInput(format!(
            "mode {m} beyond n_theta {}",
            grid.n_theta()
        )));
    }
    let radial = grid.radial();
    let nodes = radial.nodes();
    let mut u: Vec<Complex64> = nodes
        .iter()
        .map(|r| Complex64::new(r.powi(m as i32) * (1.0 - r), 0.0))
        .collect();
    let norm = |u: &[Complex64]| {
        let sq: Vec<f64> = u.iter().map(|c| c.norm_sqr()).collect();
        radial.integrate_rdr(&sq).sqrt()
    };
    let mut lambda = 0.0;
    for _ in 0..200 {
        let next = solve_mode(radial, m, &u)?;
        let nn = norm(&next);
        let new_lambda = norm(&u) / nn;
        u = next.iter().map(|c| -c / nn).collect();
        if (new_lambda - lambda).abs() <= 1e-15 * new_lambda {
            lambda = new_lambda;
            break;
        }
        lambda = new_lambda;
    }
    let mut field = DiscField::zeros(grid, Rank::Scalar);
    field.mode_mut(0, m).copy_from_slice(&u);
    let l2 = integrate_disc(&field, 2.0)?;
    Ok((lambda, field.scaled(1.0 / l2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::{disc_inner, disc_integral};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn grid() -> DiscGrid {
        DiscGrid::new(40, 12).unwrap()
    }

    #[test]
    fn constant_source() {
        let g = grid();
        let sol = solve_dirichlet(&DiscField::from_fn(&g, |_, _| 4.0)).unwrap();
        let exact = DiscField::from_fn(&g, |r, _| r * r - 1.0);
        assert!(sol.phi.sub(&exact).unwrap().max_abs_coeff() < 1e-11);
        assert_relative_eq!(sol.kappa.mean(), 2.0, epsilon = 1e-10);
        assert!(sol.residual < 1e-9);
    }

    #[test]
    fn single_mode_source() {
        let g = grid();
        for n in [1usize, 3, 7] {
            let nf = n as f64;
            let rhs = DiscField::from_fn(&g, |r, t| r.powi(n as i32) * (nf * t).sin());
            let sol = solve_dirichlet(&rhs).unwrap();
            let exact = DiscField::from_fn(&g, |r, t| {
                (r.powi(n as i32 + 2) - r.powi(n as i32)) * (nf * t).sin() / (4.0 * (nf + 1.0))
            });
            assert!(sol.phi.sub(&exact).unwrap().max_abs_coeff() < 1e-11);
            for th in [0.1, 1.3, 4.0] {
                assert_relative_eq!(
                    sol.kappa.value(th),
                    (nf * th).sin() / (2.0 * (nf + 1.0)),
                    epsilon = 1e-10
                );
            }
            for m in (0..=g.n_theta()).filter(|&m| m != n) {
                assert!(sol.phi.mode(0, m).iter().all(|c| c.norm() < 1e-13));
            }
        }
    }

    #[test]
    fn zero_source() {
        let g = grid();
        let sol = solve_dirichlet(&DiscField::zeros(&g, Rank::Scalar)).unwrap();
        assert_eq!(sol.phi.max_abs_coeff(), 0.0);
        assert_eq!(sol.kappa.max_abs(), 0.0);
    }

    #[test]
    fn boundary_vanishes_and_flux_matches() {
        let g = grid();
        let rhs = DiscField::from_fn(&g, |r, t| {
            (3.0 * r).exp() * (1.0 + t.cos()) - r * (2.0 * t).sin()
        });
        let sol = solve_dirichlet(&rhs).unwrap();
        let last = g.radial().len() - 1;
        for m in 0..=g.n_theta() {
            assert!(sol.phi.mode(0, m)[last].norm() < 1e-12);
        }
        assert_relative_eq!(
            sol.flux(),
            disc_integral(&rhs).unwrap(),
            max_relative = 1e-10
        );
    }

    #[test]
    fn harmonic_check_examples() {
        let g = grid();
        let h = DiscField::from_fn(&g, |r, t| r.powi(3) * (3.0 * t).sin());
        assert!(harmonic_check(&h).unwrap() < 1e-8);
        let q = DiscField::from_fn(&g, |r, _| r * r);
        assert_relative_eq!(
            harmonic_check(&q).unwrap(),
            4.0 * std::f64::consts::PI.sqrt(),
            max_relative = 1e-10
        );
    }

    #[test]
    fn first_eigenvalue_of_mode_zero_is_bessel_zero_squared() {
        // j_{0,1} = 2.404825557695773
        let (lambda, u) = first_eigenpair(&grid(), 0).unwrap();
        assert_relative_eq!(lambda, 2.404825557695773f64.powi(2), max_relative = 1e-10);
        assert_relative_eq!(integrate_disc(&u, 2.0).unwrap(), 1.0, epsilon = 1e-12);
        let lu = laplacian(&u).unwrap().axpy(lambda, &u).unwrap();
        assert!(integrate_disc(&lu, 2.0).unwrap() < 1e-8);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn maximum_principle(a in 0.1f64..3.0, b in -1.0f64..1.0, c in -1.0f64..1.0) {
            let g = DiscGrid::new(24, 6).unwrap();
            // Strictly negative source built from a positive base.
            let rhs = DiscField::from_fn(&g, |r, t| -(a + 0.5 * (b * r * t.cos() + c * r * r * (2.0 * t).sin()).tanh().abs()));
            let sol = solve_dirichlet(&rhs).unwrap();
            let min = sol.phi.sample(0).iter().flatten().fold(f64::INFINITY, |m, v| m.min(*v));
            prop_assert!(min >= -1e-10);
        }

        #[test]
        fn self_adjoint(a in -2.0f64..2.0, b in -2.0f64..2.0, k in 1usize..4) {
            let g = DiscGrid::new(24, 6).unwrap();
            let kf = k as f64;
            let g1 = DiscField::from_fn(&g, |r, t| a + r.powi(k as i32) * (kf * t).cos() + b * r * r);
            let g2 = DiscField::from_fn(&g, |r, t| (b * r).exp() + a * r * (t + 0.3).sin());
            let p1 = solve_dirichlet(&g1).unwrap().phi;
            let p2 = solve_dirichlet(&g2).unwrap().phi;
            let lhs = disc_inner(&g1, &p2).unwrap();
            let rhs = disc_inner(&g2, &p1).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-8 * lhs.abs().max(rhs.abs()).max(1e-12));
        }
    }
}
