//! Derivatives of radial profiles, for the odd-dimension analytic inverse.
//!
//! Catalog kernels are differentiated exactly with truncated Taylor
//! arithmetic ([`Jet`]). Arbitrary closures fall back to central finite
//! differences of order 8 ([`FiniteDifferences`]).

use crate::error::{Error, Result};

/// Evaluates F and its first n derivatives at a point.
pub trait Derivatives {
    /// `[F(s), F'(s), …, F⁽ⁿ⁾(s)]`.
    fn derivatives(&self, s: f64, n: usize) -> Result<Vec<f64>>;
}

/// Truncated Taylor series u(s + h) = Σ_k c_k h^k, k ≤ degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    c: Vec<f64>,
}

impl Jet {
    /// The independent variable at `s`.
    pub fn variable(s: f64, degree: usize) -> Self {
        let mut c = vec![0.0; degree + 1];
        c[0] = s;
        if degree > 0 {
            c[1] = 1.0;
        }
        Jet { c }
    }

    pub fn constant(v: f64, degree: usize) -> Self {
        let mut c = vec![0.0; degree + 1];
        c[0] = v;
        Jet { c }
    }

    pub fn degree(&self) -> usize {
        self.c.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Convert Taylor coefficients to derivatives, k! c_k.
    pub fn derivatives(&self) -> Vec<f64> {
        let mut fact = 1.0;
        self.c
            .iter()
            .enumerate()
            .map(|(k, &ck)| {
                if k > 0 {
                    fact *= k as f64;
                }
                fact * ck
            })
            .collect()
    }

    pub fn add(&self, o: &Jet) -> Jet {
        Jet { c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect() }
    }

    pub fn add_scalar(&self, v: f64) -> Jet {
        let mut c = self.c.clone();
        c[0] += v;
        Jet { c }
    }

    pub fn scale(&self, v: f64) -> Jet {
        Jet { c: self.c.iter().map(|a| a * v).collect() }
    }

    pub fn mul(&self, o: &Jet) -> Jet {
        let n = self.c.len();
        let c = (0..n).map(|k| (0..=k).map(|j| self.c[j] * o.c[k - j]).sum()).collect();
        Jet { c }
    }

    pub fn exp(&self) -> Jet {
        let n = self.c.len();
        let mut w = vec![0.0; n];
        w[0] = self.c[0].exp();
        for k in 1..n {
            let s: f64 = (1..=k).map(|j| j as f64 * self.c[j] * w[k - j]).sum();
            w[k] = s / k as f64;
        }
        Jet { c: w }
    }

    pub fn ln(&self) -> Jet {
        let n = self.c.len();
        let u0 = self.c[0];
        let mut w = vec![0.0; n];
        w[0] = u0.ln();
        for k in 1..n {
            let s: f64 = (1..k).map(|j| j as f64 * w[j] * self.c[k - j]).sum();
            w[k] = (self.c[k] - s / k as f64) / u0;
        }
        Jet { c: w }
    }

    /// u^α for real α (u(s) > 0, or integer α).
    pub fn powf(&self, alpha: f64) -> Jet {
        let n = self.c.len();
        let u0 = self.c[0];
        let mut w = vec![0.0; n];
        w[0] = u0.powf(alpha);
        for k in 1..n {
            let kf = k as f64;
            let s: f64 = (1..=k).map(|j| ((alpha + 1.0) * j as f64 - kf) * self.c[j] * w[k - j]).sum();
            w[k] = s / (kf * u0);
        }
        Jet { c: w }
    }
}

/// Central finite differences of order 8 for any closure.
///
/// The k-th derivative uses step h = ε^{1/(k+8)} scaled by max(1, |s|), which
/// balances the O(h⁸) truncation error against the O(ε/h^k) rounding error.
/// F is sampled on both sides of s.
pub struct FiniteDifferences<F> {
    f: F,
}

impl<F: Fn(f64) -> f64> FiniteDifferences<F> {
    pub fn new(f: F) -> Self {
        FiniteDifferences { f }
    }
}

impl<F: Fn(f64) -> f64> Derivatives for FiniteDifferences<F> {
    fn derivatives(&self, s: f64, n: usize) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(n + 1);
        out.push((self.f)(s));
        for k in 1..=n {
            let p = (k + 7) / 2;
            let h = f64::EPSILON.powf(1.0 / (k as f64 + 8.0)) * s.abs().max(1.0);
            let offsets: Vec<f64> = (-(p as i64)..=p as i64).map(|i| i as f64).collect();
            let w = fornberg_weights(&offsets, k);
            let mut acc = 0.0;
            for (x, wi) in offsets.iter().zip(&w) {
                acc += wi * (self.f)(s + x * h);
            }
            out.push(acc / h.powi(k as i32));
        }
        if let Some(k) = out.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("derivative of order {k} is not finite at {s}")));
        }
        Ok(out)
    }
}

/// Weights of the order-`m` derivative at 0 for the given stencil offsets.
///
/// Fornberg's recursion, "Generation of finite difference formulas on
/// arbitrarily spaced grids" (1988).
pub fn fornberg_weights(x: &[f64], m: usize) -> Vec<f64> {
    let n = x.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    for i in 1..n {
        let mut c2 = 1.0;
        let mn = i.min(m);
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            for k in (0..=mn).rev() {
                let prev = if k > 0 { c[i - 1][k - 1] } else { 0.0 };
                if j == i - 1 {
                    c[i][k] = c1 * (k as f64 * prev - x[i - 1] * c[i - 1][k]) / c2;
                }
            }
            for k in (0..=mn).rev() {
                let prev = if k > 0 { c[j][k - 1] } else { 0.0 };
                c[j][k] = (x[i] * c[j][k] - k as f64 * prev) / c3;
            }
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Polynomial with exact derivatives, Σ p_i s^i.
    pub(crate) struct Polynomial(pub Vec<f64>);

    impl Polynomial {
        pub fn eval(&self, s: f64) -> f64 {
            self.0.iter().rev().fold(0.0, |acc, c| acc * s + c)
        }
    }

    impl Derivatives for Polynomial {
        fn derivatives(&self, s: f64, n: usize) -> Result<Vec<f64>> {
            let mut coeffs = self.0.clone();
            let mut out = Vec::with_capacity(n + 1);
            for _ in 0..=n {
                out.push(Polynomial(coeffs.clone()).eval(s));
                coeffs = coeffs.iter().enumerate().skip(1).map(|(i, c)| i as f64 * c).collect();
                if coeffs.is_empty() {
                    coeffs.push(0.0);
                }
            }
            Ok(out)
        }
    }

    #[test]
    fn fornberg_reproduces_textbook_stencils() {
        let w = fornberg_weights(&[-1.0, 0.0, 1.0], 2);
        for (a, b) in w.iter().zip([1.0, -2.0, 1.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-14);
        }
        let w = fornberg_weights(&[-2.0, -1.0, 0.0, 1.0, 2.0], 1);
        for (a, b) in w.iter().zip([1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn jet_matches_closed_forms() {
        let s = 0.7;
        let x = Jet::variable(s, 4);
        // exp(−s²/2)
        let g = x.mul(&x).scale(-0.5).exp().derivatives();
        let e = (-s * s / 2.0f64).exp();
        assert_abs_diff_eq!(g[0], e, epsilon = 1e-15);
        assert_abs_diff_eq!(g[1], -s * e, epsilon = 1e-15);
        assert_abs_diff_eq!(g[2], (s * s - 1.0) * e, epsilon = 1e-15);
        assert_abs_diff_eq!(g[3], (3.0 * s - s.powi(3)) * e, epsilon = 1e-14);
        // (1 + s²)^{-1/2}
        let q = x.mul(&x).add_scalar(1.0).powf(-0.5).derivatives();
        assert_abs_diff_eq!(q[1], -s * (1.0 + s * s).powf(-1.5), epsilon = 1e-15);
        // s² ln s
        let t = x.mul(&x).mul(&x.ln()).derivatives();
        assert_abs_diff_eq!(t[1], 2.0 * s * s.ln() + s, epsilon = 1e-15);
        assert_abs_diff_eq!(t[3], 2.0 / s, epsilon = 1e-13);
    }

    #[test]
    fn finite_differences_on_smooth_function() {
        let fd = FiniteDifferences::new(|s: f64| (2.0 * s).sin());
        let d = fd.derivatives(0.3, 5).unwrap();
        let exact = [
            (0.6f64).sin(),
            2.0 * (0.6f64).cos(),
            -4.0 * (0.6f64).sin(),
            -8.0 * (0.6f64).cos(),
            16.0 * (0.6f64).sin(),
            32.0 * (0.6f64).cos(),
        ];
        for (k, (a, b)) in d.iter().zip(exact).enumerate() {
            assert!((a - b).abs() < 1e-6 * 2f64.powi(k as i32), "k={k}: {a} vs {b}");
        }
    }

    #[test]
    fn finite_differences_exact_on_low_degree_polynomials() {
        let p = Polynomial(vec![0.3, -1.0, 2.0, 0.5, -0.25]);
        let fd = FiniteDifferences::new(|s| p.eval(s));
        let approx = fd.derivatives(0.4, 4).unwrap();
        let exact = p.derivatives(0.4, 4).unwrap();
        for (a, b) in approx.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }
}
