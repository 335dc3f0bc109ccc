//! Gauss–Legendre rules and composite variants used across the crate.

use std::f64::consts::PI;

/// Nodes and weights of a quadrature rule on a fixed interval.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Concatenates rules on adjacent panels.
    pub fn concat(rules: impl IntoIterator<Item = Rule>) -> Rule {
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for r in rules {
            nodes.extend(r.nodes);
            weights.extend(r.weights);
        }
        Rule { nodes, weights }
    }
}

/// Gauss–Legendre rule with `n` points on `[-1, 1]`, ascending nodes.
///
/// Newton iteration on the three-term recurrence; accurate to a few ulps for
/// the sizes used here (n up to a few hundred).
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1, "gauss_legendre needs at least one point");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    for i in 0..m {
        // Tricomi initial guess for the i-th largest root.
        let k = (i + 1) as f64;
        let theta = PI * (k - 0.25) / (nf + 0.5);
        let mut x = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
        nodes[i] = -x;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Rule { nodes, weights }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> Rule {
    let base = gauss_legendre(n);
    base.mapped(a, b)
}

impl Rule {
    /// Affinely maps a rule on `[-1, 1]` onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> Rule {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        Rule {
            nodes: self.nodes.iter().map(|&x| mid + half * x).collect(),
            weights: self.weights.iter().map(|&w| half * w).collect(),
        }
    }
}

/// Composite rule on `[a, b]` whose panels shrink geometrically towards `b`.
///
/// Panel `k` (counted from `b`) has width `(b - a) * ratio^k * (1 - ratio)`,
/// down to `min_width`; a final panel covers the remainder. Each panel carries
/// an `n`-point Gauss rule. Suited to integrands with a layer of width
/// `min_width` at `b`.
pub fn graded_towards_end(a: f64, b: f64, ratio: f64, min_width: f64, n: usize) -> Rule {
    assert!(b > a && (0.0..1.0).contains(&ratio));
    let base = gauss_legendre(n);
    let mut panels = Vec::new();
    let mut dist = b - a;
    while dist * ratio > min_width {
        let next = dist * ratio;
        panels.push(base.mapped(b - dist, b - next));
        dist = next;
    }
    panels.push(base.mapped(b - dist, b));
    Rule::concat(panels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        for n in [1usize, 2, 5, 16, 64, 257] {
            let rule = gauss_legendre(n);
            let total: f64 = rule.weights.iter().sum();
            assert!((total - 2.0).abs() < 1e-13, "n = {n}: {total}");
            let deg = 2 * n - 1;
            // ∫ x^deg-1 (even) over [-1, 1]
            let even = if deg % 2 == 1 { deg - 1 } else { deg };
            let exact = 2.0 / (even as f64 + 1.0);
            let got = rule.integrate(|x| x.powi(even as i32));
            assert!((got - exact).abs() < 1e-13 * exact.max(1.0), "n = {n}");
        }
    }

    #[test]
    fn nodes_ascend_and_weights_positive() {
        let rule = gauss_legendre(33);
        assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
        assert!(rule.weights.iter().all(|&w| w > 0.0));
    }

    #[test]
    fn graded_rule_resolves_end_layer() {
        // ∫_{-1}^0 (1 - 1e9 t)^-2 dt = (1 - 1/(1 + 1e9)) / 1e9
        let s = 1e9;
        let rule = graded_towards_end(-1.0, 0.0, 0.5, 1e-3 / s, 16);
        let got = rule.integrate(|t| (1.0 - s * t).powi(-2));
        let exact = (1.0 - 1.0 / (1.0 + s)) / s;
        assert!(((got - exact) / exact).abs() < 1e-12);
    }
}
