//! Differential operators and quadrature on the disc.
//!
//! All operators act mode by mode: `∂_θ` is multiplication by `i m` and `∂_r`
//! is the collocation derivative of the radial grid. The divergence is taken
//! in conservative form `(1/r) ∂_r (r w_r) + (1/r) ∂_θ w_θ`, which makes
//! `divergence ∘ gradient` the same matrix as [`laplacian`] and makes
//! `divergence ∘ perp_gradient` vanish identically.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{DiscField, Rank};
use crate::grid::RadialGrid;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `D · profile` for a complex radial profile.
pub fn diff_profile(radial: &RadialGrid, profile: &[Complex64]) -> Vec<Complex64> {
    let d = radial.diff();
    let n = profile.len();
    (0..n)
        .map(|i| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, p) in profile.iter().enumerate() {
                acc += p * d[(i, j)];
            }
            acc
        })
        .collect()
}

/// `(∂_r f, (1/r) ∂_θ f)` of a scalar field.
pub fn gradient(f: &DiscField) -> Result<DiscField> {
    f.expect_rank(Rank::Scalar)?;
    let grid = f.grid();
    let radial = grid.radial();
    let nodes = radial.nodes();
    let mut out = DiscField::zeros(grid, Rank::Vector);
    for m in 0..=grid.n_theta() {
        let prof = f.mode(0, m);
        let dr = diff_profile(radial, prof);
        out.mode_mut(0, m).copy_from_slice(&dr);
        let im = I * m as f64;
        for (j, slot) in out.mode_mut(1, m).iter_mut().enumerate() {
            *slot = im * prof[j] / nodes[j];
        }
    }
    Ok(out)
}

/// Polar divergence `(1/r) ∂_r (r w_r) + (1/r) ∂_θ w_θ`.
pub fn divergence(v: &DiscField) -> Result<DiscField> {
    v.expect_rank(Rank::Vector)?;
    let grid = v.grid();
    let radial = grid.radial();
    let nodes = radial.nodes();
    let mut out = DiscField::zeros(grid, Rank::Scalar);
    for m in 0..=grid.n_theta() {
        let rw: Vec<Complex64> = v.mode(0, m).iter().zip(nodes).map(|(c, r)| c * r).collect();
        let d = diff_profile(radial, &rw);
        let wt = v.mode(1, m);
        let im = I * m as f64;
        for (j, slot) in out.mode_mut(0, m).iter_mut().enumerate() {
            *slot = (d[j] + im * wt[j]) / nodes[j];
        }
    }
    Ok(out)
}

/// Scalar curl `(1/r) ∂_r (r w_θ) - (1/r) ∂_θ w_r`.
pub fn curl(v: &DiscField) -> Result<DiscField> {
    v.expect_rank(Rank::Vector)?;
    let grid = v.grid();
    let radial = grid.radial();
    let nodes = radial.nodes();
    let mut out = DiscField::zeros(grid, Rank::Scalar);
    for m in 0..=grid.n_theta() {
        let rw: Vec<Complex64> = v.mode(1, m).iter().zip(nodes).map(|(c, r)| c * r).collect();
        let d = diff_profile(radial, &rw);
        let wr = v.mode(0, m);
        let im = I * m as f64;
        for (j, slot) in out.mode_mut(0, m).iter_mut().enumerate() {
            *slot = (d[j] - im * wr[j]) / nodes[j];
        }
    }
    Ok(out)
}

/// Rotated gradient `(∂_2 s, -∂_1 s)`, in polar components `((1/r) ∂_θ s, -∂_r s)`.
pub fn perp_gradient(s: &DiscField) -> Result<DiscField> {
    let g = gradient(s)?;
    let [gr, gt] = <[DiscField; 2]>::try_from(g.components()).expect("two components");
    DiscField::from_components(gt, gr.scaled(-1.0))
}

/// Polar Laplacian of a scalar field, equal to `divergence(gradient(f))`.
pub fn laplacian(f: &DiscField) -> Result<DiscField> {
    divergence(&gradient(f)?)
}

/// Vector Laplacian in polar components.
pub fn vector_laplacian(v: &DiscField) -> Result<DiscField> {
    v.expect_rank(Rank::Vector)?;
    let [vr, vt] = <[DiscField; 2]>::try_from(v.components()).expect("two components");
    let lr = laplacian(&vr)?;
    let lt = laplacian(&vt)?;
    let grid = v.grid();
    let nodes = grid.radial().nodes();
    let mut out = DiscField::from_components(lr, lt)?;
    for m in 0..=grid.n_theta() {
        let im = I * m as f64;
        for j in 0..nodes.len() {
            let r2 = nodes[j] * nodes[j];
            let a = vr.mode(0, m)[j];
            let b = vt.mode(0, m)[j];
            out.mode_mut(0, m)[j] -= (a + 2.0 * im * b) / r2;
            out.mode_mut(1, m)[j] -= (b - 2.0 * im * a) / r2;
        }
    }
    Ok(out)
}

/// Polar Hessian entries `(H_rr, H_rθ, H_θθ)` of a scalar field.
pub fn hessian(f: &DiscField) -> Result<[DiscField; 3]> {
    f.expect_rank(Rank::Scalar)?;
    let grid = f.grid();
    let radial = grid.radial();
    let nodes = radial.nodes();
    let mut hrr = DiscField::zeros(grid, Rank::Scalar);
    let mut hrt = DiscField::zeros(grid, Rank::Scalar);
    let mut htt = DiscField::zeros(grid, Rank::Scalar);
    for m in 0..=grid.n_theta() {
        let prof = f.mode(0, m);
        let d1 = diff_profile(radial, prof);
        let d2 = diff_profile(radial, &d1);
        let im = I * m as f64;
        let ang: Vec<Complex64> = prof.iter().zip(nodes).map(|(c, r)| im * c / r).collect();
        let dang = diff_profile(radial, &ang);
        let m2 = (m * m) as f64;
        for j in 0..nodes.len() {
            hrr.mode_mut(0, m)[j] = d2[j];
            hrt.mode_mut(0, m)[j] = dang[j];
            htt.mode_mut(0, m)[j] = (d1[j] - m2 * prof[j] / nodes[j]) / nodes[j];
        }
    }
    Ok([hrr, hrt, htt])
}

/// `L_s(Ω)` norm of the pointwise magnitude `sqrt(Σ w_c f_c²)` of weighted
/// scalar components, by angular sampling and Gauss quadrature in `r`.
pub fn lp_norm_components(parts: &[(&DiscField, f64)], s: f64) -> Result<f64> {
    if !(s >= 1.0) || !s.is_finite() {
        return Err(Error::InvalidInput(format!(
            "exponent s must be >= 1, got {s}"
        )));
    }
    let grid = parts[0].0.grid();
    for (p, _) in parts {
        p.expect_rank(Rank::Scalar)?;
        if p.grid().radial().len() != grid.radial().len() || p.grid().n_angle() != grid.n_angle() {
            return Err(Error::GridMismatch);
        }
    }
    let radial = grid.radial();
    let samples: Vec<(Vec<Vec<f64>>, f64)> = parts.iter().map(|(p, w)| (p.sample(0), *w)).collect();
    let n_angle = grid.n_angle();
    let dtheta = 2.0 * PI / n_angle as f64;
    let mut total = 0.0;
    for (j, (&wq, &r)) in radial.weights().iter().zip(radial.nodes()).enumerate() {
        let mut ring = 0.0;
        for k in 0..n_angle {
            let sq: f64 = samples.iter().map(|(v, w)| w * v[j][k] * v[j][k]).sum();
            ring += if s == 2.0 { sq } else { sq.sqrt().powf(s) };
        }
        total += wq * r * ring * dtheta;
    }
    Ok(total.powf(1.0 / s))
}

/// `(∫_Ω |f|^s dx)^{1/s}`; for vector fields `|f|` is the Euclidean magnitude.
pub fn integrate_disc(f: &DiscField, s: f64) -> Result<f64> {
    let comps = f.components();
    let parts: Vec<(&DiscField, f64)> = comps.iter().map(|c| (c, 1.0)).collect();
    lp_norm_components(&parts, s)
}

/// `∫_Ω f dx` of a scalar field.
pub fn disc_integral(f: &DiscField) -> Result<f64> {
    f.expect_rank(Rank::Scalar)?;
    let c0: Vec<f64> = f.mode(0, 0).iter().map(|c| c.re).collect();
    Ok(2.0 * PI * f.grid().radial().integrate_rdr(&c0))
}

/// `∫_Ω f g dx` of two scalar fields, exact in θ.
pub fn disc_inner(f: &DiscField, g: &DiscField) -> Result<f64> {
    f.expect_rank(Rank::Scalar)?;
    g.expect_rank(Rank::Scalar)?;
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch);
    }
    let radial = f.grid().radial();
    let n = radial.n_r();
    let mut prof = vec![0.0; n];
    for m in 0..=f.n_theta() {
        let factor = if m == 0 { 1.0 } else { 2.0 };
        for (j, p) in prof.iter_mut().enumerate() {
            *p += factor * (f.mode(0, m)[j] * g.mode(0, m)[j].conj()).re;
        }
    }
    Ok(2.0 * PI * radial.integrate_rdr(&prof))
}

/// `2π Σ_m ∫ |c_m(r)|² r dr`, the Parseval form of the squared `L_2` norm.
pub fn parseval_l2_squared(f: &DiscField) -> f64 {
    let radial = f.grid().radial();
    let mut total = 0.0;
    for c in 0..f.n_components() {
        for m in 0..=f.n_theta() {
            let factor = if m == 0 { 1.0 } else { 2.0 };
            let prof: Vec<f64> = f.mode(c, m).iter().map(|z| z.norm_sqr()).collect();
            total += factor * radial.integrate_rdr(&prof);
        }
    }
    2.0 * PI * total
}

/// `‖∇f‖_{L_s}` with the Frobenius magnitude; vector fields are differentiated
/// through their Cartesian components.
pub fn gradient_norm(f: &DiscField, s: f64) -> Result<f64> {
    match f.rank() {
        Rank::Scalar => integrate_disc(&gradient(f)?, s),
        Rank::Vector => {
            let [x, y] = f.to_cartesian()?;
            let gx = gradient(&x)?.components();
            let gy = gradient(&y)?.components();
            let parts: Vec<(&DiscField, f64)> = gx.iter().chain(&gy).map(|c| (c, 1.0)).collect();
            lp_norm_components(&parts, s)
        }
    }
}

/// `‖∇²f‖_{L_s}` with the Frobenius magnitude.
pub fn hessian_norm(f: &DiscField, s: f64) -> Result<f64> {
    let scalars = match f.rank() {
        Rank::Scalar => vec![f.clone()],
        Rank::Vector => f.to_cartesian()?.to_vec(),
    };
    let hs: Vec<[DiscField; 3]> = scalars.iter().map(hessian).collect::<Result<_>>()?;
    let parts: Vec<(&DiscField, f64)> = hs
        .iter()
        .flat_map(|[a, b, c]| [(a, 1.0), (b, 2.0), (c, 1.0)])
        .collect();
    lp_norm_components(&parts, s)
}

/// Largest pointwise magnitude of the field on the boundary circle.
pub fn max_boundary_magnitude(f: &DiscField) -> f64 {
    let last = f.grid().radial().len() - 1;
    let comps: Vec<Vec<f64>> = (0..f.n_components())
        .map(|c| f.sample(c).swap_remove(last))
        .collect();
    (0..f.grid().n_angle())
        .map(|k| comps.iter().map(|v| v[k] * v[k]).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::DiscGrid;

    fn grid() -> DiscGrid {
        DiscGrid::new(32, 8).unwrap()
    }

    fn max_diff(a: &DiscField, b: &DiscField) -> f64 {
        a.sub(b).unwrap().max_abs_coeff()
    }

    fn l2_diff(a: &DiscField, b: &DiscField) -> f64 {
        integrate_disc(&a.sub(b).unwrap(), 2.0).unwrap()
    }

    #[test]
    fn gradient_of_x1_is_e1() {
        let g = grid();
        let f = DiscField::from_fn(&g, |r, th| r * th.cos());
        let e1 = DiscField::from_fn_polar(&g, |_, th| [th.cos(), -th.sin()]);
        assert!(max_diff(&gradient(&f).unwrap(), &e1) < 1e-10);
        let zero = DiscField::zeros(&g, Rank::Scalar);
        assert_eq!(gradient(&zero).unwrap().max_abs_coeff(), 0.0);
    }

    #[test]
    fn gradient_of_r_squared_matches_finite_differences() {
        let g = grid();
        let f = DiscField::from_fn(&g, |r, _| r * r);
        let grad = gradient(&f).unwrap();
        let h = 1e-5;
        for (j, &r) in g.radial().nodes().iter().enumerate() {
            let fd = ((r + h).powi(2) - (r - h).powi(2)) / (2.0 * h);
            assert!((grad.value_at(0, j, 0.7) - fd).abs() < 1e-8);
            assert!(grad.value_at(1, j, 0.7).abs() < 1e-12);
        }
    }

    #[test]
    fn rank_errors() {
        let g = grid();
        let s = DiscField::zeros(&g, Rank::Scalar);
        let v = DiscField::zeros(&g, Rank::Vector);
        assert!(gradient(&v).is_err());
        assert!(divergence(&s).is_err());
        assert!(curl(&s).is_err());
    }

    #[test]
    fn divergence_examples() {
        let g = grid();
        let x = DiscField::from_fn_polar(&g, |r, _| [r, 0.0]);
        let two = DiscField::from_fn(&g, |_, _| 2.0);
        assert!(max_diff(&divergence(&x).unwrap(), &two) < 1e-8);
        let harmonic = DiscField::from_fn(&g, |r, th| r.powi(3) * (3.0 * th).sin());
        assert!(
            divergence(&gradient(&harmonic).unwrap())
                .unwrap()
                .max_abs_coeff()
                < 1e-6
        );
    }

    #[test]
    fn divergence_matches_symbolic_polynomial_field() {
        // v = (x1² x2, x1 - x2³) in Cartesian; div v = 2 x1 x2 - 3 x2²
        let g = grid();
        let v = DiscField::from_fn_cartesian(&g, |r, th| {
            let (x, y) = (r * th.cos(), r * th.sin());
            [x * x * y, x - y * y * y]
        });
        let exact = DiscField::from_fn(&g, |r, th| {
            let (x, y) = (r * th.cos(), r * th.sin());
            2.0 * x * y - 3.0 * y * y
        });
        assert!(max_diff(&divergence(&v).unwrap(), &exact) < 1e-8);
        assert!(l2_diff(&divergence(&v).unwrap(), &exact) < 1e-11);
    }

    #[test]
    fn perp_gradient_is_divergence_free() {
        let g = grid();
        let s = DiscField::from_fn(&g, |r, th| {
            (1.0 - r * r).powi(2) * r * r * (2.0 * th).cos() + r.powi(5) * (3.0 * th).sin()
        });
        let w = perp_gradient(&s).unwrap();
        assert!(divergence(&w).unwrap().max_abs_coeff() < 1e-10);
        // curl of perp gradient is minus the Laplacian
        let c = curl(&w).unwrap();
        let l = laplacian(&s).unwrap();
        assert!(c.add(&l).unwrap().max_abs_coeff() < 1e-9);
    }

    #[test]
    fn vector_laplacian_matches_cartesian_componentwise() {
        let g = grid();
        let v = DiscField::from_fn_cartesian(&g, |r, th| {
            let (x, y) = (r * th.cos(), r * th.sin());
            [x.powi(3) * y, x * x - y.powi(4)]
        });
        let expect = DiscField::from_fn_cartesian(&g, |r, th| {
            let (x, y) = (r * th.cos(), r * th.sin());
            [6.0 * x * y, 2.0 - 12.0 * y * y]
        });
        assert!(l2_diff(&vector_laplacian(&v).unwrap(), &expect) < 1e-8);
    }

    #[test]
    fn integrate_disc_examples() {
        let g = grid();
        let one = DiscField::from_fn(&g, |_, _| 1.0);
        assert!((integrate_disc(&one, 2.0).unwrap() - PI.sqrt()).abs() < 1e-12);
        let x1 = DiscField::from_fn(&g, |r, th| r * th.cos());
        assert!((integrate_disc(&x1, 2.0).unwrap() - (PI / 4.0).sqrt()).abs() < 1e-12);
        let zero = DiscField::zeros(&g, Rank::Scalar);
        assert_eq!(integrate_disc(&zero, 3.0).unwrap(), 0.0);
        assert!(integrate_disc(&one, 0.5).is_err());
        // ∫ |x1|^4 = ∫ r^5 dr ∫ cos^4 = (1/6)(3π/4)
        let l4 = integrate_disc(&x1, 4.0).unwrap();
        assert!((l4.powi(4) - PI / 8.0).abs() < 1e-12);
    }

    #[test]
    fn parseval_agrees_with_sampled_norm() {
        let g = grid();
        let f = DiscField::from_fn(&g, |r, th| {
            0.3 + r * r * (2.0 * th).sin() - r.powi(5) * (5.0 * th).cos()
        });
        let sampled = integrate_disc(&f, 2.0).unwrap().powi(2);
        let parseval = parseval_l2_squared(&f);
        assert!(((sampled - parseval) / parseval).abs() < 1e-8);
        assert!((disc_inner(&f, &f).unwrap() - parseval).abs() < 1e-12);
    }

    #[test]
    fn hessian_norm_of_quadratic() {
        // f = x1² + x1 x2: Hessian [[2, 1], [1, 0]], Frobenius² = 6
        let g = grid();
        let f = DiscField::from_fn(&g, |r, th| {
            let (x, y) = (r * th.cos(), r * th.sin());
            x * x + x * y
        });
        let h = hessian_norm(&f, 2.0).unwrap();
        assert!((h * h - 6.0 * PI).abs() < 1e-9);
    }
}
