//! Radial basis functions F and their known slicing preimages f.
//!
//! | kernel  | F(s)                        | f(t)                                    |
//! |---------|-----------------------------|-----------------------------------------|
//! | gauss   | exp(−s²/(2c²))              | ₁F₁(d/2; 1/2; −t²/(2c²))                |
//! | laplace | exp(−c s)                   | Σ (−ct)ⁿ / (n! λ_{n,d})                 |
//! | imq     | (c² + s²)^{−1/2}            | c^{d−1} (c² + t²)^{−d/2}                |
//! | tps     | (cs)² log(cs)               | d (ct)² log(ct) + α_d (ct)²             |
//! | log     | log(cs)                     | β_d + log(ct)                           |
//! | bump    | exp(−c²/(c² − s²)), s < c   | unknown                                 |
//! | mq      | −(c² + s²)^{1/2}            | unknown                                 |
//!
//! with α_d = (d/2)(H_{d/2} − 2 + log 4) and β_d = −∫₀¹ log(r) ρ_d(r) dr.
//!
//! Every kernel carries a dilation factor: a spec with `scale = σ`
//! evaluates F(σs) and f(σt). Dilation commutes with the slicing operator,
//! so the pair stays consistent.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dd::{Dd, DD_EPS, DD_PI};
use crate::derivatives::{Derivatives, Jet};
use crate::error::{Error, Result};
use crate::sliceop::KernelLabel;
use crate::specfun::{self, Dimension};

/// Largest dimension for which the Laplace preimage series is summed.
pub const LAPLACE_MAX_DIM: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelName {
    Gauss,
    Laplace,
    Imq,
    Mq,
    Tps,
    Log,
    Bump,
}

impl KernelName {
    pub const ALL: [KernelName; 7] = [
        KernelName::Gauss,
        KernelName::Laplace,
        KernelName::Imq,
        KernelName::Tps,
        KernelName::Log,
        KernelName::Mq,
        KernelName::Bump,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            KernelName::Gauss => "gauss",
            KernelName::Laplace => "laplace",
            KernelName::Imq => "imq",
            KernelName::Mq => "mq",
            KernelName::Tps => "tps",
            KernelName::Log => "log",
            KernelName::Bump => "bump",
        }
    }

    /// Whether the catalog has a closed-form preimage f.
    pub fn has_known_f(self) -> bool {
        !matches!(self, KernelName::Mq | KernelName::Bump)
    }
}

impl fmt::Display for KernelName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for KernelName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        KernelName::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::argument(format!("unknown kernel '{s}'")))
    }
}

/// A catalog kernel with shape parameter `c` and dilation `scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub name: KernelName,
    pub c: f64,
    pub scale: f64,
}

impl KernelSpec {
    pub fn new(name: KernelName, c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::argument(format!("kernel parameter c must be positive, got {c}")));
        }
        Ok(KernelSpec { name, c, scale: 1.0 })
    }

    /// The same kernel seen through data divided by `factor`: F(factor·s).
    pub fn dilated(mut self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(Error::argument(format!("dilation must be positive, got {factor}")));
        }
        self.scale *= factor;
        Ok(self)
    }

    pub fn has_known_f(&self) -> bool {
        self.name.has_known_f()
    }

    pub fn label(&self) -> KernelLabel {
        KernelLabel { name: self.name.as_str().to_string(), c: self.c }
    }

    /// F(scale·s) on `[0, 1]`. LOG returns −∞ at s = 0.
    pub fn eval_f(&self, s: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::domain(format!("kernel argument must lie in [0, 1], got {s}")));
        }
        Ok(self.profile(self.scale * s))
    }

    /// Undilated radial profile F(r) for any r ≥ 0.
    pub fn profile(&self, r: f64) -> f64 {
        let c = self.c;
        match self.name {
            KernelName::Gauss => (-r * r / (2.0 * c * c)).exp(),
            KernelName::Laplace => (-c * r).exp(),
            KernelName::Imq => 1.0 / c.hypot(r),
            KernelName::Mq => -c.hypot(r),
            KernelName::Tps => {
                let u = c * r;
                if u == 0.0 {
                    0.0
                } else {
                    u * u * u.ln()
                }
            }
            KernelName::Log => (c * r).ln(),
            KernelName::Bump => {
                if r < c {
                    (-c * c / ((c - r) * (c + r))).exp()
                } else {
                    0.0
                }
            }
        }
    }

    /// The closed-form preimage f(scale·t).
    pub fn eval_known_f(&self, d: Dimension, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::domain(format!("preimage argument must lie in [0, 1], got {t}")));
        }
        let u = self.scale * t;
        let c = self.c;
        let df = d.as_f64();
        match self.name {
            KernelName::Gauss => gauss_preimage(d, u, c),
            KernelName::Laplace => laplace_preimage(d, c * u),
            KernelName::Imq => Ok(((df - 1.0) * c.ln() - 0.5 * df * (c * c + u * u).ln()).exp()),
            KernelName::Tps => {
                let v = c * u;
                if v == 0.0 {
                    return Ok(0.0);
                }
                Ok(df * v * v * v.ln() + tps_alpha(d) * v * v)
            }
            KernelName::Log => {
                if t == 0.0 {
                    return Err(Error::domain("LOG preimage is singular at t = 0"));
                }
                Ok(log_beta(d) + (c * u).ln())
            }
            KernelName::Mq | KernelName::Bump => {
                Err(Error::Unsupported(format!("{} kernel has no closed-form preimage", self.name)))
            }
        }
    }
}

/// α_d = (d/2)(H_{d/2} − 2 + log 4).
pub fn tps_alpha(d: Dimension) -> f64 {
    let h = specfun::harmonic(d.as_f64() / 2.0).expect("positive argument");
    d.as_f64() / 2.0 * (h - 2.0 + 4f64.ln())
}

/// β_d = −∫₀¹ log(r) ρ_d(r) dr = (ψ(d/2) − ψ(1/2)) / 2.
///
/// t² under ρ_d is Beta(1/2, (d−1)/2) distributed, whose log-mean is
/// ψ(1/2) − ψ(d/2).
pub fn log_beta(d: Dimension) -> f64 {
    let a = specfun::digamma(d.as_f64() / 2.0).expect("positive argument");
    let b = specfun::digamma(0.5).expect("positive argument");
    0.5 * (a - b)
}

/// Accepted absolute error of the preimage series, relative to max(1, |f|).
const SERIES_TOLERANCE: f64 = 1e-9;

fn check_series(sum: f64, largest: f64, terms: usize, what: &str) -> Result<f64> {
    let err = DD_EPS * largest * (terms as f64 + 4.0);
    if !largest.is_finite() || err > SERIES_TOLERANCE * sum.abs().max(1.0) {
        return Err(Error::Numerical(format!(
            "{what} series lost accuracy (term magnitude {largest:e}, estimated error {err:e})"
        )));
    }
    Ok(sum)
}

/// ₁F₁(d/2; 1/2; −x) with x = u²/(2c²), summed term by term in double-double.
fn gauss_preimage(d: Dimension, u: f64, c: f64) -> Result<f64> {
    let du = Dd::new(u);
    let x = du * du / (2.0 * c * c);
    let a = d.as_f64() / 2.0;
    let mut term = Dd::new(1.0);
    let mut sum = term;
    let mut largest: f64 = 1.0;
    let mut n = 0usize;
    loop {
        n += 1;
        let nf = n as f64;
        let ratio = -(x * (a + nf - 1.0)) / ((nf - 0.5) * nf);
        term = term * ratio;
        sum = sum + term;
        let mag = term.hi.abs();
        largest = largest.max(mag);
        if ratio.hi.abs() < 1.0 && mag <= DD_EPS * sum.hi.abs().max(1e-300) {
            break;
        }
        if n > 100_000 || !mag.is_finite() {
            return Err(Error::Numerical("Gauss preimage series did not converge".into()));
        }
    }
    check_series(sum.to_f64(), largest, n, "Gauss preimage")
}

/// Σ_n (−y)ⁿ / (n! λ_{n,d}) split into its positive even and odd parts.
fn laplace_preimage(d: Dimension, y: f64) -> Result<f64> {
    if d.get() > LAPLACE_MAX_DIM {
        return Err(Error::Unsupported(format!(
            "Laplace preimage series is limited to d <= {LAPLACE_MAX_DIM}; fit the coefficients instead"
        )));
    }
    if y == 0.0 {
        return Ok(1.0);
    }
    let df = d.as_f64();
    let yy = Dd::new(y) * Dd::new(y);
    // term_n / term_{n−2} = y² (n + d − 2) / (n (n − 1)²)
    let series = |first: Dd, start: usize| -> (Dd, f64, usize) {
        let mut term = first;
        let mut sum = first;
        let mut largest = first.hi.abs();
        let mut n = start;
        loop {
            n += 2;
            let nf = n as f64;
            let ratio = yy * (nf + df - 2.0) / (nf * (nf - 1.0) * (nf - 1.0));
            term = term * ratio;
            sum = sum + term;
            largest = largest.max(term.hi.abs());
            if ratio.hi < 1.0 && term.hi <= DD_EPS * sum.hi {
                break;
            }
            if n > 200_000 {
                break;
            }
        }
        (sum, largest, n)
    };
    let (even, le, ne) = series(Dd::new(1.0), 0);
    let (odd, lo, no) = series(Dd::new(y) / laplace_lambda1(d), 1);
    check_series((even - odd).to_f64(), le.max(lo), ne.max(no), "Laplace preimage")
}

/// λ_{1,d} = Γ(d/2) / (√π Γ((d+1)/2)) in double-double, from
/// λ_{1,3} = 1/2, λ_{1,4} = 4/(3π) and λ_{1,d+2} = λ_{1,d} d/(d+1).
fn laplace_lambda1(d: Dimension) -> Dd {
    let n = d.get();
    let (mut lam, mut k) = if n % 2 == 1 { (Dd::new(0.5), 3) } else { (Dd::new(4.0) / (DD_PI * 3.0), 4) };
    while k < n {
        lam = lam * k as f64 / (k as f64 + 1.0);
        k += 2;
    }
    lam
}

impl Derivatives for KernelSpec {
    /// Derivatives of s ↦ F(scale·s), exact up to rounding.
    fn derivatives(&self, s: f64, n: usize) -> Result<Vec<f64>> {
        let c = self.c;
        let u = Jet::variable(s, n).scale(self.scale);
        let jet = match self.name {
            KernelName::Gauss => u.mul(&u).scale(-1.0 / (2.0 * c * c)).exp(),
            KernelName::Laplace => u.scale(-c).exp(),
            KernelName::Imq => u.mul(&u).add_scalar(c * c).powf(-0.5),
            KernelName::Mq => u.mul(&u).add_scalar(c * c).powf(0.5).scale(-1.0),
            KernelName::Tps | KernelName::Log if s <= 0.0 => {
                return Err(Error::domain(format!("{} kernel is not differentiable at {s}", self.name)));
            }
            KernelName::Tps => {
                let v = u.scale(c);
                v.mul(&v).mul(&v.ln())
            }
            KernelName::Log => u.scale(c).ln(),
            KernelName::Bump => {
                if self.scale * s >= c {
                    Jet::constant(0.0, n)
                } else {
                    let w = u.mul(&u).scale(-1.0).add_scalar(c * c);
                    w.powf(-1.0).scale(-c * c).exp()
                }
            }
        };
        Ok(jet.derivatives())
    }
}
