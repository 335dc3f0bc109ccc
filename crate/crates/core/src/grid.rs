//! Discretizations of the unit disc and of the space-time cylinder.
//!
//! Radially the disc is sampled at Gauss–Legendre nodes of `(0, 1)` with the
//! boundary node `r = 1` appended. Radial derivatives are taken by polynomial
//! collocation on all `n_r + 1` nodes, so a mode profile is represented by its
//! interpolating polynomial. Angularly, fields are truncated Fourier series
//! resolved for modes `|m| <= n_theta`.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre_on;

/// Radial nodes, quadrature weights and the collocation derivative.
#[derive(Debug)]
pub struct RadialGrid {
    n_r: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    diff: DMatrix<f64>,
}

impl RadialGrid {
    pub fn new(n_r: usize) -> Result<Self> {
        if n_r < 2 {
            return Err(Error::InvalidInput(format!("n_r must be >= 2, got {n_r}")));
        }
        let rule = gauss_legendre_on(n_r, 0.0, 1.0);
        let mut nodes = rule.nodes;
        nodes.push(1.0);
        let diff = collocation_derivative(&nodes);
        Ok(Self {
            n_r,
            nodes,
            weights: rule.weights,
            diff,
        })
    }

    /// Number of interior (Gauss) nodes; the grid holds `n_r + 1` points.
    pub fn n_r(&self) -> usize {
        self.n_r
    }

    /// All radial points, boundary last.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Number of radial points including the boundary.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Gauss weights for `∫_0^1 · dr` at the interior nodes. The boundary node
    /// carries no quadrature weight.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// First-derivative collocation matrix on all radial points.
    pub fn diff(&self) -> &DMatrix<f64> {
        &self.diff
    }

    /// Matrix evaluating the interpolating polynomial of nodal values at
    /// `targets` in `[0, 1]`.
    pub fn interpolation_matrix(&self, targets: &[f64]) -> DMatrix<f64> {
        let x = to_unit_interval(&self.nodes);
        let bary = barycentric_weights(&x);
        let mut out = DMatrix::zeros(targets.len(), x.len());
        for (i, t) in to_unit_interval(targets).into_iter().enumerate() {
            if let Some(j) = x.iter().position(|&xj| xj == t) {
                out[(i, j)] = 1.0;
                continue;
            }
            let terms: Vec<f64> = x.iter().zip(&bary).map(|(xj, w)| w / (t - xj)).collect();
            let total: f64 = terms.iter().sum();
            for (j, term) in terms.into_iter().enumerate() {
                out[(i, j)] = term / total;
            }
        }
        out
    }

    /// `∫_0^1 f(r) r dr` from values at the interior nodes.
    pub fn integrate_rdr(&self, values: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(&self.nodes)
            .zip(values)
            .map(|((w, r), v)| w * r * v)
            .sum()
    }
}

/// Barycentric weights of the nodes mapped to `[-1, 1]`, scaled to unit
/// maximum magnitude.
fn barycentric_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut log_mag = vec![0.0; n];
    let mut sign = vec![1.0; n];
    for j in 0..n {
        for k in 0..n {
            if k != j {
                let d = x[j] - x[k];
                log_mag[j] -= d.abs().ln();
                if d < 0.0 {
                    sign[j] = -sign[j];
                }
            }
        }
    }
    let max_log = log_mag.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (0..n)
        .map(|j| sign[j] * (log_mag[j] - max_log).exp())
        .collect()
}

fn to_unit_interval(nodes: &[f64]) -> Vec<f64> {
    nodes.iter().map(|r| 2.0 * r - 1.0).collect()
}

/// Barycentric collocation derivative on arbitrary distinct nodes.
fn collocation_derivative(nodes: &[f64]) -> DMatrix<f64> {
    let n = nodes.len();
    let x = to_unit_interval(nodes);
    let bary = barycentric_weights(&x);
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = bary[j] / bary[i] / (x[i] - x[j]);
                d[(i, j)] = v;
                diag -= v;
            }
        }
        d[(i, i)] = diag;
    }
    d * 2.0
}

/// The unit disc: a shared radial grid and an angular mode cutoff.
#[derive(Clone)]
pub struct DiscGrid {
    radial: Arc<RadialGrid>,
    n_theta: usize,
    n_angle: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for DiscGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiscGrid")
            .field("n_r", &self.radial.n_r())
            .field("n_theta", &self.n_theta)
            .field("n_angle", &self.n_angle)
            .finish()
    }
}

impl PartialEq for DiscGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n_theta == other.n_theta
            && (Arc::ptr_eq(&self.radial, &other.radial) || self.radial.n_r == other.radial.n_r)
    }
}

impl DiscGrid {
    pub fn new(n_r: usize, n_theta: usize) -> Result<Self> {
        Ok(Self::with_radial(Arc::new(RadialGrid::new(n_r)?), n_theta))
    }

    /// Builds a disc grid around an existing radial grid.
    pub fn with_radial(radial: Arc<RadialGrid>, n_theta: usize) -> Self {
        let n_angle = (4 * (n_theta + 1)).next_power_of_two().max(8);
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n_angle);
        let inverse = planner.plan_fft_inverse(n_angle);
        Self {
            radial,
            n_theta,
            n_angle,
            forward,
            inverse,
        }
    }

    /// Same radial grid, different angular cutoff.
    pub fn with_modes(&self, n_theta: usize) -> Self {
        if n_theta == self.n_theta {
            return self.clone();
        }
        Self::with_radial(self.radial.clone(), n_theta)
    }

    pub fn radial(&self) -> &RadialGrid {
        &self.radial
    }

    pub fn radial_arc(&self) -> &Arc<RadialGrid> {
        &self.radial
    }

    pub fn n_r(&self) -> usize {
        self.radial.n_r()
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    /// Number of equispaced angular samples used for pointwise work.
    pub fn n_angle(&self) -> usize {
        self.n_angle
    }

    pub fn angles(&self) -> Vec<f64> {
        (0..self.n_angle)
            .map(|k| 2.0 * std::f64::consts::PI * k as f64 / self.n_angle as f64)
            .collect()
    }

    pub(crate) fn forward_fft(&self) -> &Arc<dyn Fft<f64>> {
        &self.forward
    }

    pub(crate) fn inverse_fft(&self) -> &Arc<dyn Fft<f64>> {
        &self.inverse
    }
}

/// Uniform time grid on `[t_start, t_end]` with `n_t` steps (`n_t + 1` nodes).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SpaceTimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub n_t: usize,
}

impl SpaceTimeGrid {
    pub fn new(t_start: f64, t_end: f64, n_t: usize) -> Result<Self> {
        if n_t == 0 || !(t_end > t_start) || !t_start.is_finite() || !t_end.is_finite() {
            return Err(Error::InvalidInput(format!(
                "time grid needs t_end > t_start and n_t >= 1 (got [{t_start}, {t_end}], n_t = {n_t})"
            )));
        }
        Ok(Self {
            t_start,
            t_end,
            n_t,
        })
    }

    pub fn dt(&self) -> f64 {
        (self.t_end - self.t_start) / self.n_t as f64
    }

    pub fn len(&self) -> usize {
        self.n_t + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.n_t {
            self.t_end
        } else {
            self.t_start + k as f64 * self.dt()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.time(k)).collect()
    }

    /// Trapezoid weights on the nodes.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let dt = self.dt();
        let mut w = vec![dt; self.len()];
        w[0] = 0.5 * dt;
        w[self.n_t] = 0.5 * dt;
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radial_nodes_increase_and_end_at_boundary() {
        let g = RadialGrid::new(24).unwrap();
        assert!(g.nodes().windows(2).all(|w| w[0] < w[1]));
        assert_eq!(*g.nodes().last().unwrap(), 1.0);
        assert!(g.weights().iter().all(|&w| w > 0.0));
    }

    #[test]
    fn disc_area_is_pi() {
        for n_r in [4, 32, 128, 256] {
            let g = RadialGrid::new(n_r).unwrap();
            let ones = vec![1.0; g.len()];
            let area = 2.0 * std::f64::consts::PI * g.integrate_rdr(&ones);
            assert!(((area - std::f64::consts::PI) / std::f64::consts::PI).abs() < 1e-10);
        }
    }

    #[test]
    fn radial_quadrature_exact_to_degree_2n_minus_1() {
        let n_r = 20;
        let g = RadialGrid::new(n_r).unwrap();
        let deg = 2 * n_r - 1;
        let got: f64 = g
            .weights()
            .iter()
            .zip(g.nodes())
            .map(|(w, r)| w * r.powi(deg as i32))
            .sum();
        let exact = 1.0 / (deg as f64 + 1.0);
        assert!(((got - exact) / exact).abs() < 1e-10);
    }

    #[test]
    fn collocation_derivative_is_exact_on_polynomials() {
        let g = RadialGrid::new(40).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|r| r.powi(17) - 3.0 * r * r).collect();
        let df = g.diff() * nalgebra::DVector::from_vec(f);
        for (i, r) in g.nodes().iter().enumerate() {
            let exact = 17.0 * r.powi(16) - 6.0 * r;
            assert!(
                (df[i] - exact).abs() < 1e-9,
                "r = {r}: {} vs {exact}",
                df[i]
            );
        }
    }

    #[test]
    fn time_grid_rejects_degenerate_input() {
        assert!(SpaceTimeGrid::new(0.0, 0.0, 4).is_err());
        assert!(SpaceTimeGrid::new(0.0, 1.0, 0).is_err());
        let g = SpaceTimeGrid::new(-1.0, -0.01, 99).unwrap();
        assert_eq!(g.time(99), -0.01);
        assert!((g.trapezoid_weights().iter().sum::<f64>() - 0.99).abs() < 1e-14);
    }
}
