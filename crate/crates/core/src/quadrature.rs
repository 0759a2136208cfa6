//! Gauss-Hermite nodes and weights for the weight function `exp(-x^2)`.

use std::f64::consts::PI;

/// An `n`-point Gauss-Hermite rule.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    /// Nodes are the roots of the physicists' Hermite polynomial `H_n`, found
    /// by Newton iteration on the orthonormal recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Hermite rule needs at least one node");
        let pim4 = PI.powf(-0.25);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        let mut z = 0.0;
        for i in 0..n.div_ceil(2) {
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * nodes[0],
                3 => 1.91 * z - 0.91 * nodes[1],
                _ => 2.0 * z - nodes[i - 2],
            };
            let mut pp = 0.0;
            for _ in 0..100 {
                let mut p1 = pim4;
                let mut p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
                }
                pp = (2.0 * nf).sqrt() * p2;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            nodes[i] = z;
            nodes[n - 1 - i] = -z;
            weights[i] = 2.0 / (pp * pp);
            weights[n - 1 - i] = weights[i];
        }
        GaussHermite { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫ exp(-x^2) f(x) dx`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    /// Expectation of `f(z)` for `z ~ N(0, 1/2)`, the per-dimension law of
    /// unit-variance complex noise.
    pub fn expect_half_variance<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.integrate(f) / PI.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn moments_are_exact() {
        for n in [1, 2, 5, 10, 16, 20, 40] {
            let gh = GaussHermite::new(n);
            assert_abs_diff_eq!(gh.integrate(|_| 1.0), PI.sqrt(), epsilon = 1e-12);
            if n >= 2 {
                assert_abs_diff_eq!(gh.integrate(|x| x * x), PI.sqrt() / 2.0, epsilon = 1e-12);
            }
            if n >= 3 {
                assert_abs_diff_eq!(gh.integrate(|x| x.powi(4)), 3.0 * PI.sqrt() / 4.0, epsilon = 1e-11);
            }
            assert_abs_diff_eq!(gh.integrate(|x| x.powi(3)), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn known_two_point_rule() {
        let gh = GaussHermite::new(2);
        assert_abs_diff_eq!(gh.nodes()[0].abs(), 0.5f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(gh.weights()[0], PI.sqrt() / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn cosine_integral() {
        let gh = GaussHermite::new(20);
        let exact = PI.sqrt() * (-0.25f64).exp();
        assert_abs_diff_eq!(gh.integrate(f64::cos), exact, epsilon = 1e-14);
    }
}
