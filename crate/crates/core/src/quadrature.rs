//! Gauss–Legendre quadrature on a finite interval.

use std::f64::consts::PI;

/// Nodes and weights of an n-point Gauss–Legendre rule mapped onto `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Rule on the reference interval `[-1, 1]`.
    ///
    /// Roots of `P_n` are located by Newton iteration from the Tricomi
    /// initial guess; the rule is symmetric so only half are computed.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "quadrature needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let dp = legendre_with_derivative(n, x).1;
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Rule mapped onto `[a, b]`.
    pub fn on_interval(n: usize, a: f64, b: f64) -> Self {
        let reference = Self::new(n);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        Self {
            nodes: reference.nodes.iter().map(|x| mid + half * x).collect(),
            weights: reference.weights.iter().map(|w| half * w).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
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
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_interval_length() {
        for n in [1, 2, 5, 8, 33, 96, 192] {
            let rule = GaussLegendre::on_interval(n, 0.0, PI / 2.0);
            let total: f64 = rule.weights.iter().sum();
            assert!((total - PI / 2.0).abs() < 1e-13, "n={n}: {total}");
        }
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        let rule = GaussLegendre::new(6);
        for deg in 0..12 {
            let got = rule.integrate(|x| x.powi(deg));
            let want = if deg % 2 == 1 {
                0.0
            } else {
                2.0 / (deg as f64 + 1.0)
            };
            assert!((got - want).abs() < 1e-14, "degree {deg}");
        }
    }

    #[test]
    fn known_three_point_rule() {
        let rule = GaussLegendre::new(3);
        let r = (0.6f64).sqrt();
        assert!((rule.nodes[0] + r).abs() < 1e-15);
        assert_eq!(rule.nodes[1], 0.0);
        assert!((rule.nodes[2] - r).abs() < 1e-15);
        assert!((rule.weights[0] - 5.0 / 9.0).abs() < 1e-15);
        assert!((rule.weights[1] - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn smooth_trig_integrand() {
        // ∫_0^{π/2} α² cos²α dα = π³/48 − π/8
        let rule = GaussLegendre::on_interval(64, 0.0, PI / 2.0);
        let got = rule.integrate(|a| a * a * a.cos().powi(2));
        let want = PI.powi(3) / 48.0 - PI / 8.0;
        assert!((got - want).abs() < 1e-14);
    }
}
