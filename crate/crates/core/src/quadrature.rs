//! Gauss–Legendre rules mapped to `[0, 1]`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Largest supported number of nodes.
pub const MAX_NODES: usize = 1 << 16;

/// Nodes and weights of an L-point Gauss–Legendre rule on `[0, 1]`.
///
/// Nodes are strictly increasing and the weights sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Iterate over `(node, weight)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// Approximate ∫₀¹ f(t) dt.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.iter().map(|(t, v)| v * f(t)).sum()
    }
}

/// Build the L-point rule.
///
/// Roots of P_L are found by Newton's method starting from the Chebyshev-angle
/// guess cos(π(i − 1/4)/(L + 1/2)), with the first-order
/// asymptotic correction. Only the positive half is computed; the
/// other half is its mirror image, so the rule is exactly symmetric.
pub fn gauss_legendre(l: usize) -> Result<QuadratureRule> {
    if l == 0 || l > MAX_NODES {
        return Err(Error::argument(format!("number of quadrature nodes must be in 1..={MAX_NODES}, got {l}")));
    }
    let n = l as f64;
    let half = l.div_ceil(2);
    // Recurrence coefficients (2k − 1)/k and (k − 1)/k, shared by all roots.
    let coef: Vec<(f64, f64)> = (2..=l)
        .map(|k| {
            let kf = k as f64;
            ((2.0 * kf - 1.0) / kf, (kf - 1.0) / kf)
        })
        .collect();
    let root = |i: usize| {
        if l % 2 == 1 && i == half - 1 {
            let (_, d) = legendre_with_derivative(&coef, 0.0);
            return (0.0, 2.0 / (d * d));
        }
        let mut x = (1.0 - (1.0 - 1.0 / n) / (8.0 * n * n)) * (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(&coef, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= 1e-10 {
                break;
            }
        }
        // Newton is already quadratic here; one more step reaches full precision.
        let (p, d) = legendre_with_derivative(&coef, x);
        x -= p / d;
        (x, 2.0 / ((1.0 - x * x) * d * d))
    };
    // (x, w) on [-1, 1] for x >= 0, largest first.
    let upper: Vec<(f64, f64)> =
        if l >= 512 { (0..half).into_par_iter().map(root).collect() } else { (0..half).map(root).collect() };

    let mut nodes = vec![0.0; l];
    let mut weights = vec![0.0; l];
    for (i, &(x, w)) in upper.iter().enumerate() {
        // Ascending order on [0, 1]: index l-1-i holds +x, index i holds -x.
        nodes[l - 1 - i] = 0.5 + 0.5 * x;
        nodes[i] = 0.5 - 0.5 * x;
        weights[l - 1 - i] = 0.5 * w;
        weights[i] = 0.5 * w;
    }
    Ok(QuadratureRule { nodes, weights })
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre_with_derivative(coef: &[(f64, f64)], x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for &(a, b) in coef {
        let p2 = a * x * p1 - b * p0;
        p0 = p1;
        p1 = p2;
    }
    let nf = coef.len() as f64 + 1.0;
    let dp = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// A process-wide cache of rules keyed by size.
pub fn cached_rule(l: usize) -> Arc<QuadratureRule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<QuadratureRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().expect("quadrature cache poisoned").get(&l) {
        return Arc::clone(rule);
    }
    let rule = Arc::new(gauss_legendre(l).expect("cached rule size in range"));
    cache.lock().expect("quadrature cache poisoned").entry(l).or_insert(rule).clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn small_rules() {
        let r1 = gauss_legendre(1).unwrap();
        assert_eq!(r1.nodes(), &[0.5]);
        assert_abs_diff_eq!(r1.weights()[0], 1.0, epsilon = 1e-15);

        let r2 = gauss_legendre(2).unwrap();
        let off = 0.5 / 3f64.sqrt();
        assert_abs_diff_eq!(r2.nodes()[0], 0.5 - off, epsilon = 1e-15);
        assert_abs_diff_eq!(r2.nodes()[1], 0.5 + off, epsilon = 1e-15);
        assert_abs_diff_eq!(r2.weights()[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(r2.weights()[1], 0.5, epsilon = 1e-15);

        let r5 = gauss_legendre(5).unwrap();
        assert_abs_diff_eq!(r5.integrate(|t| t.powi(9)), 0.1, epsilon = 1e-14);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(gauss_legendre(0).is_err());
        assert!(gauss_legendre(MAX_NODES + 1).is_err());
    }

    #[test]
    fn polynomial_exactness() {
        let mut l = 1;
        while l <= 1024 {
            let rule = gauss_legendre(l).unwrap();
            for k in 0..2 * l {
                let got = rule.integrate(|t| t.powi(k as i32));
                let exact = 1.0 / (k as f64 + 1.0);
                assert!((got - exact).abs() < 1e-13, "L={l} k={k}: {got} vs {exact}");
            }
            l *= 2;
        }
    }

    #[test]
    fn structure() {
        for l in [1, 2, 3, 7, 64, 513, 1024, 4096] {
            let rule = gauss_legendre(l).unwrap();
            let total: f64 = rule.weights().iter().sum();
            assert!((total - 1.0).abs() < 1e-14, "L={l}: {total}");
            assert!(rule.weights().iter().all(|&w| w > 0.0));
            assert!(rule.nodes().windows(2).all(|p| p[0] < p[1]));
            assert!(rule.nodes().iter().all(|&t| t > 0.0 && t < 1.0));
            for i in 0..l {
                let a = rule.nodes()[i] + rule.nodes()[l - 1 - i];
                assert!((a - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn largest_rule_is_sane() {
        let rule = gauss_legendre(MAX_NODES).unwrap();
        let total: f64 = rule.weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-13);
        assert_abs_diff_eq!(rule.integrate(|t| (PI * t).sin()), 2.0 / PI, epsilon = 1e-13);
    }

    #[test]
    fn cache_returns_same_rule() {
        let a = cached_rule(33);
        let b = cached_rule(33);
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(*a, gauss_legendre(33).unwrap());
    }
}
