//! Extension operators on the disc: boundary data into the interior, the
//! inverse surface divergence on the circle, and the divergence-free lift of
//! a normal boundary value.
//!
//! Extension mollifies the boundary data at the scale of the distance to the
//! boundary, `δ = 1 − r`, and cuts off with `ζ(1 − r)`:
//! `f(r, θ) = ζ(1 − r) [M_δ b + (r − 1) M_δ a](θ)`, where `M_δ` is circular
//! convolution with `K` scaled to width `δ`. On mode `m` this is the
//! multiplier `K̂(m δ)`, the cosine transform of the kernel.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{DiscField, Rank};
use crate::grid::DiscGrid;
use crate::ops::perp_gradient;
use crate::quadrature::{gauss_legendre_on, Rule};
use crate::trace::BoundaryTrace;

const MEAN_TOL: f64 = 1e-10;

fn flat(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// `C^∞` step: 0 for `x <= 0`, 1 for `x >= 1`.
pub fn smooth_step(x: f64) -> f64 {
    let a = flat(x);
    let b = flat(1.0 - x);
    a / (a + b)
}

/// Derivative of [`smooth_step`].
pub fn smooth_step_derivative(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    let a = flat(x);
    let b = flat(1.0 - x);
    let da = a / (x * x);
    let db = -b / ((1.0 - x) * (1.0 - x));
    (da * (a + b) - a * (da + db)) / ((a + b) * (a + b))
}

/// The normalized bump `K(y) ∝ exp(−1/(1 − y²))` on `(−1, 1)` and the cutoff
/// `ζ` with `ζ = 1` on `[0, 1/2]` and `ζ = 0` on `[1, ∞)`.
#[derive(Debug, Clone)]
pub struct ExtensionKernel {
    rule: Rule,
    values: Vec<f64>,
}

impl Default for ExtensionKernel {
    fn default() -> Self {
        Self::new()
    }
}

impl ExtensionKernel {
    pub fn new() -> Self {
        let rule = gauss_legendre_on(400, -1.0, 1.0);
        let raw: Vec<f64> = rule.nodes.iter().map(|&y| flat(1.0 - y * y)).collect();
        let mass: f64 = raw.iter().zip(&rule.weights).map(|(k, w)| k * w).sum();
        let values = raw.into_iter().map(|k| k / mass).collect();
        Self { rule, values }
    }

    pub fn kernel(&self, y: f64) -> f64 {
        let mass: f64 = self
            .rule
            .nodes
            .iter()
            .zip(&self.rule.weights)
            .map(|(&z, w)| w * flat(1.0 - z * z))
            .sum();
        flat(1.0 - y * y) / mass
    }

    /// `∫ y^k K(y) dy`.
    pub fn moment(&self, k: i32) -> f64 {
        self.rule
            .nodes
            .iter()
            .zip(&self.rule.weights)
            .zip(&self.values)
            .map(|((y, w), v)| w * v * y.powi(k))
            .sum()
    }

    /// `K̂(ξ) = ∫ K(y) cos(ξ y) dy`, the Fourier multiplier of mollification.
    pub fn fourier(&self, xi: f64) -> f64 {
        self.rule
            .nodes
            .iter()
            .zip(&self.rule.weights)
            .zip(&self.values)
            .map(|((y, w), v)| w * v * (xi * y).cos())
            .sum()
    }

    /// `ζ(y)`.
    pub fn cutoff(&self, y: f64) -> f64 {
        1.0 - smooth_step(2.0 * y - 1.0)
    }

    /// Radial profile `ζ(1 − r) K̂(m(1 − r))` of mode `m` at radius `r`.
    pub fn profile(&self, m: usize, r: f64) -> f64 {
        let d = 1.0 - r;
        let z = self.cutoff(d);
        if z == 0.0 {
            0.0
        } else {
            z * self.fourier(m as f64 * d)
        }
    }
}

/// Extends boundary value `b` and normal derivative `a` into the disc.
pub fn extend_t1(
    kernel: &ExtensionKernel,
    b: &BoundaryTrace,
    a: &BoundaryTrace,
    grid: &DiscGrid,
) -> DiscField {
    let nodes = grid.radial().nodes();
    let mut f = DiscField::zeros(grid, Rank::Scalar);
    for m in 0..=grid.n_theta() {
        let (bm, am) = (b.coeff(m), a.coeff(m));
        for (j, slot) in f.mode_mut(0, m).iter_mut().enumerate() {
            let r = nodes[j];
            *slot = (bm + am * (r - 1.0)) * kernel.profile(m, r);
        }
    }
    f
}

/// The tangential component `b̂` of the field `b = b̂ e_θ` with
/// `div_S b = ∂_θ b̂ = κ` on the unit circle. Requires `∫ κ ds = 0`.
pub fn surface_div_inverse(kappa: &BoundaryTrace) -> Result<BoundaryTrace> {
    let mean = kappa.mean();
    if mean.abs() > MEAN_TOL {
        return Err(Error::NotMeanZero {
            value: 2.0 * std::f64::consts::PI * mean,
            tol: MEAN_TOL,
        });
    }
    let coeffs = kappa
        .coeffs()
        .iter()
        .enumerate()
        .map(|(m, c)| {
            if m == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                c / Complex64::new(0.0, m as f64)
            }
        })
        .collect();
    Ok(BoundaryTrace::from_coeffs(coeffs))
}

/// `a = ⟨b, ∇⟩ν̃ − b div ν̃` for the normal extension `ν̃(x) = x` and a
/// tangential `b = b̂ e_θ`, evaluated in Cartesian components on `n` angles.
/// Returns the samples `(a_1, a_2)`.
pub fn normal_derivative_samples(b_hat: &BoundaryTrace, n: usize) -> (Vec<f64>, Vec<f64>) {
    // Jacobian of ν̃ = x is the identity, its trace is 2.
    const JAC: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, 1.0]];
    let trace = JAC[0][0] + JAC[1][1];
    let bh = b_hat.sample(n);
    let mut a1 = Vec::with_capacity(n);
    let mut a2 = Vec::with_capacity(n);
    for (k, v) in bh.iter().enumerate() {
        let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
        let b = [-v * th.sin(), v * th.cos()];
        let jb = [
            JAC[0][0] * b[0] + JAC[0][1] * b[1],
            JAC[1][0] * b[0] + JAC[1][1] * b[1],
        ];
        a1.push(jb[0] - trace * b[0]);
        a2.push(jb[1] - trace * b[1]);
    }
    (a1, a2)
}

/// Output of [`solenoidal_lift`].
#[derive(Debug, Clone)]
pub struct SolenoidalLift {
    /// Divergence-free field with `w|_{∂Ω} = −κν`.
    pub w: DiscField,
    /// The extended tangential field `f = F e_θ` (polar components).
    pub f: DiscField,
    /// Tangential boundary value `b̂` of `f`.
    pub b_hat: BoundaryTrace,
    /// Tangential normal-derivative data `â` of `f`.
    pub a_hat: BoundaryTrace,
    /// `max |⟨a, ν⟩|` over the boundary samples.
    pub tangency: f64,
}

/// Divergence-free lift of the normal boundary value `−κν`.
///
/// With `ν̃ = x`, `b = −T₂κ` and `a = −b`, the field `f = T₁(b, a)` gives
/// `w_j = Σ_i ∂_i(f_i x_j − f_j x_i)`, which in the plane is the rotated
/// gradient of `S = r f_θ`.
pub fn solenoidal_lift(
    kernel: &ExtensionKernel,
    kappa: &BoundaryTrace,
    grid: &DiscGrid,
) -> Result<SolenoidalLift> {
    let b_hat = surface_div_inverse(kappa)?
        .scaled(-1.0)
        .resized(grid.n_theta());
    let n = 4 * (grid.n_theta() + 1);
    let (a1, a2) = normal_derivative_samples(&b_hat, n);
    let mut tangency: f64 = 0.0;
    let mut a_tan = Vec::with_capacity(n);
    for k in 0..n {
        let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
        tangency = tangency.max((a1[k] * th.cos() + a2[k] * th.sin()).abs());
        a_tan.push(-a1[k] * th.sin() + a2[k] * th.cos());
    }
    let a_hat = BoundaryTrace::from_samples(grid.n_theta(), &a_tan);
    let ft = extend_t1(kernel, &b_hat, &a_hat, grid);
    let nodes = grid.radial().nodes().to_vec();
    let s = ft.times_radial(&nodes);
    let w = perp_gradient(&s)?;
    let f = DiscField::from_components(DiscField::zeros(grid, Rank::Scalar), ft)?;
    Ok(SolenoidalLift {
        w,
        f,
        b_hat,
        a_hat,
        tangency,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::norm_w1;
    use crate::ops::{diff_profile, divergence, integrate_disc};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn kernel_moments_and_cutoff() {
        let k = ExtensionKernel::new();
        assert_relative_eq!(k.moment(0), 1.0, epsilon = 1e-12);
        assert!(k.moment(1).abs() < 1e-12);
        assert_relative_eq!(k.fourier(0.0), 1.0, epsilon = 1e-12);
        assert_eq!(k.kernel(1.0), 0.0);
        assert!(k.kernel(0.0) > 0.0);
        for i in 0..=100 {
            let y = 1.2 * i as f64 / 100.0;
            let z = k.cutoff(y);
            assert!((0.0..=1.0).contains(&z));
            if y <= 0.5 {
                assert_eq!(z, 1.0);
            }
            if y >= 1.0 {
                assert_eq!(z, 0.0);
            }
        }
    }

    #[test]
    fn smooth_step_derivative_matches_differences() {
        for x in [0.05, 0.1, 0.2, 0.3, 0.5] {
            let h = 1e-6;
            let fd = (smooth_step(x + h) - smooth_step(x - h)) / (2.0 * h);
            assert_relative_eq!(smooth_step_derivative(x), fd, max_relative = 1e-5);
            assert_relative_eq!(smooth_step(1.0 - x), 1.0 - smooth_step(x), epsilon = 1e-15);
            assert_relative_eq!(
                smooth_step_derivative(1.0 - x),
                smooth_step_derivative(x),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn zero_data_extends_to_zero() {
        let g = DiscGrid::new(32, 6).unwrap();
        let z = BoundaryTrace::zeros(6);
        let f = extend_t1(&ExtensionKernel::new(), &z, &z, &g);
        assert_eq!(f.max_abs_coeff(), 0.0);
    }

    #[test]
    fn extension_matches_boundary_data() {
        let g = DiscGrid::new(128, 6).unwrap();
        let k = ExtensionKernel::new();
        let b = BoundaryTrace::cosine(1, 6);
        let a = BoundaryTrace::sine(3, 6).scaled(0.7);
        let f = extend_t1(&k, &b, &a, &g);
        let last = g.radial().len() - 1;
        for m in 0..=6 {
            let prof = f.mode(0, m);
            assert!((prof[last] - b.coeff(m)).norm() < 1e-12);
            let d = diff_profile(g.radial(), prof)[last];
            assert!((d - a.coeff(m)).norm() < 1e-6, "mode {m}: {d}");
        }
    }

    #[test]
    fn extension_ratio_bounded_in_frequency() {
        let g = DiscGrid::new(160, 64).unwrap();
        let k = ExtensionKernel::new();
        let zero = BoundaryTrace::zeros(64);
        let ratios: Vec<f64> = [1usize, 2, 4, 8, 16, 32, 64]
            .iter()
            .map(|&n| {
                let b = BoundaryTrace::cosine(n, 64);
                let f = extend_t1(&k, &b, &zero, &g);
                norm_w1(&f, 2.0).unwrap() / b.w1_norm(2.0).unwrap()
            })
            .collect();
        let max = ratios.iter().cloned().fold(0.0, f64::max);
        assert!(max < 2.0, "{ratios:?}");
    }

    #[test]
    fn surface_inverse_examples() {
        let k = BoundaryTrace::cosine(3, 5);
        let b = surface_div_inverse(&k).unwrap();
        for th in [0.2, 1.0, 5.5] {
            assert_relative_eq!(b.value(th), (3.0 * th).sin() / 3.0, epsilon = 1e-14);
        }
        assert_eq!(
            surface_div_inverse(&BoundaryTrace::zeros(4))
                .unwrap()
                .max_abs(),
            0.0
        );
        assert!(matches!(
            surface_div_inverse(&BoundaryTrace::cosine(0, 3)),
            Err(Error::NotMeanZero { .. })
        ));
    }

    #[test]
    fn lift_of_zero_is_zero() {
        let g = DiscGrid::new(32, 4).unwrap();
        let l = solenoidal_lift(&ExtensionKernel::new(), &BoundaryTrace::zeros(4), &g).unwrap();
        assert_eq!(l.w.max_abs_coeff(), 0.0);
    }

    #[test]
    fn lift_properties() {
        let g = DiscGrid::new(128, 8).unwrap();
        let k = ExtensionKernel::new();
        for n in [1usize, 2, 5, 8] {
            let kappa = BoundaryTrace::cosine(n, 8);
            let l = solenoidal_lift(&k, &kappa, &g).unwrap();
            assert!(integrate_disc(&divergence(&l.w).unwrap(), 2.0).unwrap() < 1e-8);
            assert!(l.tangency < 1e-14);
            // a = −b on the disc.
            for m in 0..=8 {
                assert!((l.a_hat.coeff(m) + l.b_hat.coeff(m)).norm() < 1e-14);
            }
            // w(1, θ) = −κ(θ) ν(θ).
            let last = g.radial().len() - 1;
            for th in [0.0, 0.9, 2.1, 4.4] {
                let wr = l.w.value_at(0, last, th);
                let wt = l.w.value_at(1, last, th);
                assert!((wr + kappa.value(th)).abs() < 1e-6);
                assert!(wt.abs() < 1e-6);
            }
            // (div f)|_{∂Ω} = ∂_θ b̂.
            let df = divergence(&l.f).unwrap();
            let db = l.b_hat.derivative();
            for th in [0.3, 3.0] {
                assert!((df.value_at(0, last, th) - db.value(th)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn lift_l2_ratio_bounded() {
        let g = DiscGrid::new(160, 64).unwrap();
        let k = ExtensionKernel::new();
        let ratios: Vec<f64> = [1usize, 4, 16, 64]
            .iter()
            .map(|&n| {
                let kappa = BoundaryTrace::cosine(n, 64);
                let l = solenoidal_lift(&k, &kappa, &g).unwrap();
                integrate_disc(&l.w, 2.0).unwrap() / kappa.norm(2.0).unwrap()
            })
            .collect();
        assert!(ratios.iter().all(|r| *r < 2.0), "{ratios:?}");
    }

    #[test]
    fn surface_inverse_multiplier_bound() {
        for n in 1..=40 {
            let kappa = BoundaryTrace::cosine(n, 40);
            let b = surface_div_inverse(&kappa).unwrap();
            assert!(
                b.w1_norm(2.0).unwrap() <= 2.0f64.sqrt() * kappa.norm(2.0).unwrap() * (1.0 + 1e-14)
            );
        }
        assert_relative_eq!(
            surface_div_inverse(&BoundaryTrace::cosine(1, 1))
                .unwrap()
                .w1_norm(2.0)
                .unwrap(),
            2.0f64.sqrt() * PI.sqrt(),
            max_relative = 1e-14
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn operators_are_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, n1 in 1usize..6, n2 in 1usize..6) {
            let g = DiscGrid::new(48, 6).unwrap();
            let k = ExtensionKernel::new();
            let k1 = BoundaryTrace::cosine(n1, 6);
            let k2 = BoundaryTrace::sine(n2, 6).axpy(0.5, &BoundaryTrace::cosine(6, 6));
            let mix = k1.scaled(a).axpy(b, &k2);
            let t2 = surface_div_inverse(&mix).unwrap();
            let t2_sep = surface_div_inverse(&k1).unwrap().scaled(a).axpy(b, &surface_div_inverse(&k2).unwrap());
            prop_assert!(t2.axpy(-1.0, &t2_sep).max_abs() < 1e-12);
            let w = solenoidal_lift(&k, &mix, &g).unwrap().w;
            let w1 = solenoidal_lift(&k, &k1, &g).unwrap().w;
            let w2 = solenoidal_lift(&k, &k2, &g).unwrap().w;
            let sep = w1.scaled(a).axpy(b, &w2).unwrap();
            prop_assert!(w.sub(&sep).unwrap().max_abs_coeff() < 1e-10 * (1.0 + a.abs() + b.abs()));
            let t1 = extend_t1(&k, &k1, &k2, &g);
            let t1_mix = extend_t1(&k, &k1.scaled(a), &k2.scaled(a), &g);
            prop_assert!(t1.scaled(a).sub(&t1_mix).unwrap().max_abs_coeff() < 1e-12 * (1.0 + a.abs()));
        }
    }
}
