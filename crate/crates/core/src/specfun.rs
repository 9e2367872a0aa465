//! Special functions behind the slicing operator.
//!
//! Everything here is a pure function. Gamma ratios are formed in log space
//! so that dimensions in the thousands do not overflow.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const LN_SQRT_PI: f64 = 0.572_364_942_924_700_1;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Ambient dimension of the samples. Always at least 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dimension(usize);

impl Dimension {
    pub fn new(d: usize) -> Result<Self> {
        if d < 3 {
            return Err(Error::argument(format!("dimension must be at least 3, got {d}")));
        }
        Ok(Dimension(d))
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0
    }

    #[inline]
    pub fn as_f64(self) -> f64 {
        self.0 as f64
    }

    #[inline]
    pub fn is_odd(self) -> bool {
        self.0 % 2 == 1
    }
}

impl std::fmt::Display for Dimension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

impl TryFrom<usize> for Dimension {
    type Error = Error;

    fn try_from(d: usize) -> Result<Self> {
        Dimension::new(d)
    }
}

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural logarithm of the Gamma function for `x > 0`.
///
/// Lanczos below 15, Stirling's series above.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("log_gamma requires a finite x > 0, got {x}")));
    }
    Ok(ln_gamma_pos(x))
}

pub(crate) fn ln_gamma_pos(x: f64) -> f64 {
    if x == 1.0 || x == 2.0 {
        return 0.0;
    }
    if x < 0.5 {
        return ln_gamma_pos(x + 1.0) - x.ln();
    }
    if x >= 15.0 {
        let inv = 1.0 / x;
        let inv2 = inv * inv;
        let series = inv
            * (1.0 / 12.0
                + inv2 * (-1.0 / 360.0 + inv2 * (1.0 / 1260.0 + inv2 * (-1.0 / 1680.0 + inv2 * (1.0 / 1188.0)))));
        return (x - 0.5) * x.ln() - x + LN_SQRT_2PI + series;
    }
    let z = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    LN_SQRT_2PI + (z + 0.5) * t.ln() - t + acc.ln()
}

/// Digamma function ψ(x) for `x > 0`.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("digamma requires a finite x > 0, got {x}")));
    }
    let mut x = x;
    let mut shift = 0.0;
    while x < 10.0 {
        shift -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    let tail = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32760.0))))));
    Ok(shift + x.ln() - 0.5 / x - tail)
}

/// Harmonic number H_x = ψ(x + 1) + γ, valid for real `x > -1`.
pub fn harmonic(x: f64) -> Result<f64> {
    Ok(digamma(x + 1.0)? + EULER_GAMMA)
}

/// c_d = 2Γ(d/2) / (√π Γ((d−1)/2)), the normalisation of the projection density.
pub fn normalization_c(d: Dimension) -> f64 {
    let h = d.as_f64() / 2.0;
    (std::f64::consts::LN_2 + ln_gamma_pos(h) - LN_SQRT_PI - ln_gamma_pos(h - 0.5)).exp()
}

/// The projection density ρ_d(t) = c_d (1 − t²)^{(d−3)/2} on `[0, 1]`.
pub fn density_rho(d: Dimension, t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::domain(format!("density argument must lie in [0, 1], got {t}")));
    }
    Ok(rho_unchecked(d, normalization_c(d), t))
}

#[inline]
pub(crate) fn rho_unchecked(d: Dimension, c_d: f64, t: f64) -> f64 {
    if d.get() == 3 {
        return c_d;
    }
    if t >= 1.0 {
        return 0.0;
    }
    c_d * ((d.as_f64() - 3.0) / 2.0 * (-t * t).ln_1p()).exp()
}

/// λ_{k,d} with S_d[t^k] = λ_{k,d} s^k.
///
/// This is the k-th moment of ρ_d, so it lies in (0, 1] and decreases in k.
/// Its reciprocal is the multiplier that inverts the operator on monomials.
pub fn monomial_eigenvalue(d: Dimension, k: f64) -> Result<f64> {
    if !(k > -1.0) || !k.is_finite() {
        return Err(Error::domain(format!("monomial exponent must exceed -1, got {k}")));
    }
    let h = d.as_f64() / 2.0;
    Ok((ln_gamma_pos(h) + ln_gamma_pos((k + 1.0) / 2.0) - LN_SQRT_PI - ln_gamma_pos((k + h * 2.0) / 2.0)).exp())
}

/// Argument where [`eta`] switches from its power series to quadrature.
pub fn eta_switch(d: Dimension) -> f64 {
    f64::max(8.0, d.as_f64().sqrt())
}

/// The principal function η_d(s) = S_d[cos](s) = ₀F₁(d/2; −s²/4).
pub fn eta(d: Dimension, s: f64) -> Result<f64> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::domain(format!("eta requires a finite s >= 0, got {s}")));
    }
    if s <= eta_switch(d) {
        Ok(eta_series(d, s))
    } else {
        Ok(eta_quadrature(d, s))
    }
}

/// Power series Σ (−1)^k Γ(d/2) / (k! Γ(k + d/2)) (s/2)^{2k}.
pub(crate) fn eta_series(d: Dimension, s: f64) -> f64 {
    let h = d.as_f64() / 2.0;
    let q = 0.25 * s * s;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..200 {
        let kf = k as f64;
        term *= -q / ((kf + 1.0) * (kf + h));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs().max(1e-300) && kf + 1.0 > q.sqrt() {
            break;
        }
    }
    sum
}

/// Quadrature of c_d ∫_0^{π/2} cos(s sin θ) cos^{d−2}θ dθ.
///
/// This is ∫₀¹ cos(st) ρ_d(t) dt after t = sin θ. The substituted integrand
/// is smooth for every d, including even d where ρ_d has a square-root
/// endpoint.
pub(crate) fn eta_quadrature(d: Dimension, s: f64) -> f64 {
    let nodes = if s <= 96.0 { 128 } else { (s.ceil() as usize).next_power_of_two().max(128) };
    let rule = quadrature::cached_rule(nodes);
    let c_d = normalization_c(d);
    let p = d.as_f64() - 2.0;
    let half_pi = PI / 2.0;
    let mut acc = 0.0;
    for (t, v) in rule.iter() {
        let theta = half_pi * t;
        let (sn, cs) = theta.sin_cos();
        acc += v * (s * sn).cos() * cs.powf(p);
    }
    c_d * half_pi * acc
}

/// sin(πx) with exact argument reduction, so integer `x` gives exactly 0.
#[inline]
pub fn sin_pi(x: f64) -> f64 {
    let n = x.round();
    let r = x - n;
    let v = (PI * r).sin();
    if n.rem_euclid(2.0) == 0.0 {
        v
    } else {
        -v
    }
}

/// Normalised sinc: sin(πx)/(πx), with sinc(0) = 1.
#[inline]
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        let p = PI * x;
        return 1.0 - p * p / 6.0;
    }
    sin_pi(x) / (PI * x)
}
