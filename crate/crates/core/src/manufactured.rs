//! Closed-form fields for manufactured-solution tests.
//!
//! [`ExpPoly`] is `p(x, y) e^{ax + by}` with a polynomial `p`; the class is
//! closed under differentiation, so forcings of manufactured Stokes flows are
//! exact. [`ManufacturedFlow`] builds `ψ(t, x) = T(t) P(x)` and
//! `q(t, x) = T(t) Q(x)` with `T(t) = sin(πt)` and the forcing
//! `F = ∂_t u − Δu + ∇q` for `u = (∂_2 ψ, −∂_1 ψ)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::Result;
use crate::field::DiscField;
use crate::field::SpaceTimeField;
use crate::grid::{DiscGrid, SpaceTimeGrid};

#[derive(Debug, Clone, PartialEq)]
pub struct ExpPoly {
    /// `(i, j) ↦ c` for the monomial `c x^i y^j`.
    terms: BTreeMap<(u32, u32), f64>,
    a: f64,
    b: f64,
}

impl ExpPoly {
    pub fn poly(terms: &[((u32, u32), f64)]) -> Self {
        Self::with_exp(terms, 0.0, 0.0)
    }

    pub fn with_exp(terms: &[((u32, u32), f64)], a: f64, b: f64) -> Self {
        let mut out = Self {
            terms: BTreeMap::new(),
            a,
            b,
        };
        for &(k, c) in terms {
            *out.terms.entry(k).or_insert(0.0) += c;
        }
        out
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let p: f64 = self
            .terms
            .iter()
            .map(|(&(i, j), c)| c * x.powi(i as i32) * y.powi(j as i32))
            .sum();
        p * (self.a * x + self.b * y).exp()
    }

    pub fn eval_polar(&self, r: f64, theta: f64) -> f64 {
        self.eval(r * theta.cos(), r * theta.sin())
    }

    pub fn dx(&self) -> Self {
        let mut out = Self::with_exp(&[], self.a, self.b);
        for (&(i, j), &c) in &self.terms {
            if i > 0 {
                *out.terms.entry((i - 1, j)).or_insert(0.0) += c * i as f64;
            }
            *out.terms.entry((i, j)).or_insert(0.0) += c * self.a;
        }
        out
    }

    pub fn dy(&self) -> Self {
        let mut out = Self::with_exp(&[], self.a, self.b);
        for (&(i, j), &c) in &self.terms {
            if j > 0 {
                *out.terms.entry((i, j - 1)).or_insert(0.0) += c * j as f64;
            }
            *out.terms.entry((i, j)).or_insert(0.0) += c * self.b;
        }
        out
    }

    pub fn laplacian(&self) -> Self {
        self.dx().dx().add(&self.dy().dy())
    }

    /// Sum of two fields with the same exponential factor.
    pub fn add(&self, other: &Self) -> Self {
        assert!(
            self.a == other.a && self.b == other.b,
            "exponential factors differ"
        );
        let mut out = self.clone();
        for (&k, &c) in &other.terms {
            *out.terms.entry(k).or_insert(0.0) += c;
        }
        out
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.terms.values_mut().for_each(|c| *c *= s);
        out
    }

    /// Product with a pure polynomial.
    pub fn times_poly(&self, other: &Self) -> Self {
        assert!(
            other.a == 0.0 && other.b == 0.0,
            "second factor must be a polynomial"
        );
        let mut out = Self::with_exp(&[], self.a, self.b);
        for (&(i, j), &c) in &self.terms {
            for (&(k, l), &d) in &other.terms {
                *out.terms.entry((i + k, j + l)).or_insert(0.0) += c * d;
            }
        }
        out
    }
}

/// `(1 − x² − y²)²`, the profile vanishing to second order on the circle.
pub fn boundary_bump() -> ExpPoly {
    // 1 − 2x² − 2y² + x⁴ + 2x²y² + y⁴
    ExpPoly::poly(&[
        ((0, 0), 1.0),
        ((2, 0), -2.0),
        ((0, 2), -2.0),
        ((4, 0), 1.0),
        ((2, 2), 2.0),
        ((0, 4), 1.0),
    ])
}

/// Stokes flow `u = curl(T(t) P)`, pressure `T(t) Q`, with `T = sin(πt)`.
#[derive(Debug, Clone)]
pub struct ManufacturedFlow {
    pub stream: ExpPoly,
    pub pressure: ExpPoly,
    // ∂_1ψ, ∂_2ψ, ∂_1Δψ, ∂_2Δψ, ∂_1q, ∂_2q
    derived: [ExpPoly; 6],
}

impl ManufacturedFlow {
    /// `P = (1 − r²)² ρ` so that `u = 0` on the circle.
    pub fn new(rho: &ExpPoly, pressure: ExpPoly) -> Self {
        let stream = rho.times_poly(&boundary_bump());
        let lap = stream.laplacian();
        let derived = [
            stream.dx(),
            stream.dy(),
            lap.dx(),
            lap.dy(),
            pressure.dx(),
            pressure.dy(),
        ];
        Self {
            stream,
            pressure,
            derived,
        }
    }

    fn time_factor(t: f64) -> (f64, f64) {
        ((PI * t).sin(), PI * (PI * t).cos())
    }

    /// Cartesian velocity at `(x, y)`.
    pub fn velocity(&self, t: f64, x: f64, y: f64) -> [f64; 2] {
        let (tt, _) = Self::time_factor(t);
        let [sx, sy, ..] = &self.derived;
        [tt * sy.eval(x, y), -tt * sx.eval(x, y)]
    }

    /// Cartesian forcing `∂_t u − Δu + ∇q`.
    pub fn forcing(&self, t: f64, x: f64, y: f64) -> [f64; 2] {
        let (tt, dtt) = Self::time_factor(t);
        let [sx, sy, lx, ly, px, py] = &self.derived;
        [
            dtt * sy.eval(x, y) - tt * ly.eval(x, y) + tt * px.eval(x, y),
            -dtt * sx.eval(x, y) + tt * lx.eval(x, y) + tt * py.eval(x, y),
        ]
    }

    pub fn pressure_at(&self, t: f64, x: f64, y: f64) -> f64 {
        Self::time_factor(t).0 * self.pressure.eval(x, y)
    }

    /// Time slices are `sin(πt)` and `π cos(πt)` multiples of fields sampled
    /// once.
    fn separable(
        time: SpaceTimeGrid,
        value: DiscField,
        rate: Option<DiscField>,
    ) -> Result<SpaceTimeField> {
        SpaceTimeField::from_fn(time, |t| {
            let (tt, dtt) = Self::time_factor(t);
            match &rate {
                Some(r) => value.scaled(tt).axpy(dtt, r).expect("same grid"),
                None => value.scaled(tt),
            }
        })
    }

    pub fn velocity_field(&self, time: SpaceTimeGrid, grid: &DiscGrid) -> Result<SpaceTimeField> {
        let u = DiscField::from_fn_cartesian(grid, |r, th| {
            self.velocity(0.5, r * th.cos(), r * th.sin())
        });
        Self::separable(time, u, None)
    }

    pub fn forcing_field(&self, time: SpaceTimeGrid, grid: &DiscGrid) -> Result<SpaceTimeField> {
        let [sx, sy, lx, ly, px, py] = &self.derived;
        let steady = DiscField::from_fn_cartesian(grid, |r, th| {
            let (x, y) = (r * th.cos(), r * th.sin());
            [px.eval(x, y) - ly.eval(x, y), py.eval(x, y) + lx.eval(x, y)]
        });
        let u = DiscField::from_fn_cartesian(grid, |r, th| {
            let (x, y) = (r * th.cos(), r * th.sin());
            [sy.eval(x, y), -sx.eval(x, y)]
        });
        Self::separable(time, steady, Some(u))
    }

    pub fn pressure_field(&self, time: SpaceTimeGrid, grid: &DiscGrid) -> Result<SpaceTimeField> {
        let q = DiscField::from_fn(grid, |r, th| self.pressure.eval(r * th.cos(), r * th.sin()));
        Self::separable(time, q, None)
    }
}
