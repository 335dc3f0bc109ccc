//! Functions on the unit circle stored as Fourier coefficients.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::DiscField;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// A real function `b(θ) = Σ_{|m| <= M} b_m e^{imθ}` on the unit circle,
/// stored through `b_0, …, b_M`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace {
    coeffs: Vec<Complex64>,
}

impl BoundaryTrace {
    pub fn zeros(n_theta: usize) -> Self {
        Self {
            coeffs: vec![Complex64::new(0.0, 0.0); n_theta + 1],
        }
    }

    /// Takes `coeffs[m]` as `b_m`; the imaginary part of `b_0` is dropped.
    pub fn from_coeffs(mut coeffs: Vec<Complex64>) -> Self {
        if coeffs.is_empty() {
            coeffs.push(Complex64::new(0.0, 0.0));
        }
        coeffs[0].im = 0.0;
        Self { coeffs }
    }

    /// `cos(nθ)` resolved up to mode `n_theta`.
    pub fn cosine(n: usize, n_theta: usize) -> Self {
        let mut out = Self::zeros(n_theta.max(n));
        out.coeffs[n] = if n == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.5, 0.0)
        };
        out
    }

    /// `sin(nθ)` resolved up to mode `n_theta`.
    pub fn sine(n: usize, n_theta: usize) -> Self {
        let mut out = Self::zeros(n_theta.max(n));
        if n > 0 {
            out.coeffs[n] = Complex64::new(0.0, -0.5);
        }
        out
    }

    /// Projects samples of `f` on `4(n_theta + 1)` equispaced angles.
    pub fn from_fn<F: Fn(f64) -> f64>(n_theta: usize, f: F) -> Self {
        let n = 4 * (n_theta + 1);
        let values: Vec<f64> = (0..n).map(|k| f(2.0 * PI * k as f64 / n as f64)).collect();
        Self::from_samples(n_theta, &values)
    }

    /// Fourier coefficients up to `n_theta` of values on equispaced angles
    /// `2πk/n`, `k = 0..n`.
    pub fn from_samples(n_theta: usize, values: &[f64]) -> Self {
        let n = values.len();
        let coeffs = (0..=n_theta)
            .map(|m| {
                values
                    .iter()
                    .enumerate()
                    .map(|(k, v)| {
                        v * Complex64::from_polar(1.0, -2.0 * PI * ((m * k) % n) as f64 / n as f64)
                    })
                    .sum::<Complex64>()
                    / n as f64
            })
            .collect();
        Self::from_coeffs(coeffs)
    }

    /// Boundary values of component `comp` of a field.
    pub fn of_field(field: &DiscField, comp: usize) -> Self {
        let last = field.grid().radial().len() - 1;
        let coeffs = (0..=field.n_theta())
            .map(|m| field.mode(comp, m)[last])
            .collect();
        Self::from_coeffs(coeffs)
    }

    pub fn n_theta(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `b_m` for `m >= 0`; zero beyond the stored range.
    pub fn coeff(&self, m: usize) -> Complex64 {
        self.coeffs.get(m).copied().unwrap_or_default()
    }

    /// `(1/2π) ∫ b dθ`.
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn value(&self, theta: f64) -> f64 {
        self.coeffs[0].re
            + self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(k, c)| 2.0 * (c * Complex64::from_polar(1.0, (k + 1) as f64 * theta)).re)
                .sum::<f64>()
    }

    /// Values on `n` equispaced angles starting at 0.
    pub fn sample(&self, n: usize) -> Vec<f64> {
        (0..n)
            .map(|k| self.value(2.0 * PI * k as f64 / n as f64))
            .collect()
    }

    /// `∂_θ b`.
    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(m, c)| I * m as f64 * c)
            .collect();
        Self::from_coeffs(coeffs)
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|c| c * a).collect())
    }

    /// `self + a · other`, resolved to the larger mode range.
    pub fn axpy(&self, a: f64, other: &Self) -> Self {
        let n = self.n_theta().max(other.n_theta());
        Self::from_coeffs(
            (0..=n)
                .map(|m| self.coeff(m) + other.coeff(m) * a)
                .collect(),
        )
    }

    /// Copy truncated or zero-padded to `n_theta` modes.
    pub fn resized(&self, n_theta: usize) -> Self {
        Self::from_coeffs((0..=n_theta).map(|m| self.coeff(m)).collect())
    }

    /// `(∫_0^{2π} |b|^s dθ)^{1/s}`; exact by Parseval for `s = 2`, otherwise
    /// by the trapezoid rule on `max(2048, 32(M+1))` angles.
    pub fn norm(&self, s: f64) -> Result<f64> {
        if !(s >= 1.0) || !s.is_finite() {
            return Err(Error::InvalidInput(format!(
                "exponent s must be >= 1, got {s}"
            )));
        }
        if s == 2.0 {
            let sq: f64 = self
                .coeffs
                .iter()
                .enumerate()
                .map(|(m, c)| {
                    if m == 0 {
                        c.norm_sqr()
                    } else {
                        2.0 * c.norm_sqr()
                    }
                })
                .sum();
            return Ok((2.0 * PI * sq).sqrt());
        }
        let n = (32 * (self.n_theta() + 1)).max(2048);
        let sum: f64 = self.sample(n).iter().map(|v| v.abs().powf(s)).sum();
        Ok((sum * 2.0 * PI / n as f64).powf(1.0 / s))
    }

    /// `(‖b‖_{L_s}^s + ‖∂_θ b‖_{L_s}^s)^{1/s}`.
    pub fn w1_norm(&self, s: f64) -> Result<f64> {
        let a = self.norm(s)?;
        let b = self.derivative().norm(s)?;
        Ok((a.powf(s) + b.powf(s)).powf(1.0 / s))
    }

    pub fn max_abs(&self) -> f64 {
        let n = (8 * (self.n_theta() + 1)).max(64);
        self.sample(n).iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Serialize, Deserialize)]
struct TraceFile {
    modes: BTreeMap<usize, (f64, f64)>,
}

impl Serialize for BoundaryTrace {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let modes = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(m, c)| (m, (c.re, c.im)))
            .collect();
        TraceFile { modes }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BoundaryTrace {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let file = TraceFile::deserialize(deserializer)?;
        let n = file.modes.keys().next_back().copied().unwrap_or(0);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
        for (m, (re, im)) in file.modes {
            coeffs[m] = Complex64::new(re, im);
        }
        Ok(Self::from_coeffs(coeffs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cosine_and_sine_values() {
        let c = BoundaryTrace::cosine(3, 5);
        let s = BoundaryTrace::sine(3, 5);
        for th in [0.0, 0.4, 2.0] {
            assert_relative_eq!(c.value(th), (3.0 * th).cos(), epsilon = 1e-14);
            assert_relative_eq!(s.value(th), (3.0 * th).sin(), epsilon = 1e-14);
        }
    }

    #[test]
    fn from_fn_recovers_modes() {
        let b = BoundaryTrace::from_fn(6, |t| 1.0 + (2.0 * t).cos() - 3.0 * (5.0 * t).sin());
        let expect = BoundaryTrace::cosine(0, 6)
            .axpy(1.0, &BoundaryTrace::cosine(2, 6))
            .axpy(-3.0, &BoundaryTrace::sine(5, 6));
        for m in 0..=6 {
            assert!((b.coeff(m) - expect.coeff(m)).norm() < 1e-14);
        }
    }

    #[test]
    fn norms_of_cosine() {
        let c = BoundaryTrace::cosine(4, 4);
        assert_relative_eq!(c.norm(2.0).unwrap(), PI.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(c.norm(3.0).unwrap().powi(3), 8.0 / 3.0, epsilon = 1e-8);
        assert_relative_eq!(c.w1_norm(2.0).unwrap(), (17.0 * PI).sqrt(), epsilon = 1e-13);
    }

    #[test]
    fn json_round_trip() {
        let b = BoundaryTrace::from_coeffs(vec![
            Complex64::new(0.25, 0.0),
            Complex64::new(0.1, -0.3),
            Complex64::new(1.0 / 3.0, 2.0),
        ]);
        let back = BoundaryTrace::from_json(&b.to_json().unwrap()).unwrap();
        assert_eq!(b, back);
    }
}
