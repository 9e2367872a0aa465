//! Discretisations of the slicing operator
//! S_d[f](s) = ∫₀¹ f(ts) ρ_d(t) dt.
//!
//! Functions on `[0, 1]` are represented in the orthonormal cosine basis
//! g_0 = 1, g_k = √2 cos(πkt). The image of g_k under S_d is written h_k.

use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::QuadratureRule;
use crate::specfun::{self, Dimension};

/// Norm used for the domain regulariser or the range residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Norm {
    L2,
    H1,
}

impl Norm {
    /// Diagonal weight of mode `k`: 1 for L², √(1 + π²k²) for H¹.
    #[inline]
    pub fn weight(self, k: usize) -> f64 {
        match self {
            Norm::L2 => 1.0,
            Norm::H1 => (1.0 + PI * PI * (k * k) as f64).sqrt(),
        }
    }
}

impl std::fmt::Display for Norm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Norm::L2 => "L2",
            Norm::H1 => "H1",
        })
    }
}

/// How a coefficient vector was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FitMethod {
    Spatial,
    Frequency,
    Direct,
    Analytic,
    /// Supplied by the caller.
    Manual,
}

/// Kernel name and shape parameter attached to a fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelLabel {
    pub name: String,
    pub c: f64,
}

/// Provenance of a coefficient vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FitInfo {
    pub method: FitMethod,
    pub tau: f64,
    pub domain_norm: Norm,
    pub range_norm: Norm,
    /// `None` for a custom target function.
    pub kernel: Option<KernelLabel>,
    /// Dilation applied to the data before slicing.
    pub scale: f64,
    pub quadrature_nodes: Option<usize>,
    pub range_modes: Option<usize>,
}

impl Default for FitInfo {
    fn default() -> Self {
        FitInfo {
            method: FitMethod::Manual,
            tau: 0.0,
            domain_norm: Norm::L2,
            range_norm: Norm::L2,
            kernel: None,
            scale: 1.0,
            quadrature_nodes: None,
            range_modes: None,
        }
    }
}

impl FitInfo {
    /// Short method tag such as `S-L2-H1`, `direct` or `analytic`.
    ///
    /// The triple reads algorithm, range norm, domain norm.
    pub fn method_label(&self) -> String {
        match self.method {
            FitMethod::Spatial => format!("S-{}-{}", self.range_norm, self.domain_norm),
            FitMethod::Frequency => format!("F-{}-{}", self.range_norm, self.domain_norm),
            FitMethod::Direct => "direct".into(),
            FitMethod::Analytic => "analytic".into(),
            FitMethod::Manual => "manual".into(),
        }
    }
}

/// Cosine coefficients a of f_a(t) = a_0 + √2 Σ_{k≥1} a_k cos(πkt).
#[derive(Debug, Clone, PartialEq)]
pub struct CosineCoefficients {
    a: Vec<f64>,
    d: Dimension,
    pub info: FitInfo,
}

impl CosineCoefficients {
    pub fn new(a: Vec<f64>, d: Dimension) -> Result<Self> {
        Self::with_info(a, d, FitInfo::default())
    }

    pub fn with_info(a: Vec<f64>, d: Dimension, info: FitInfo) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::argument("at least one cosine coefficient is required"));
        }
        if let Some(k) = a.iter().position(|v| !v.is_finite()) {
            return Err(Error::input(format!("coefficient {k} is not finite")));
        }
        if !(info.scale > 0.0) || !info.scale.is_finite() {
            return Err(Error::argument(format!("scale must be positive, got {}", info.scale)));
        }
        Ok(CosineCoefficients { a, d, info })
    }

    /// Replace the recorded dilation factor.
    pub fn with_scale(mut self, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::argument(format!("scale must be positive, got {scale}")));
        }
        self.info.scale = scale;
        Ok(self)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.a
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn dimension(&self) -> Dimension {
        self.d
    }

    pub fn scale(&self) -> f64 {
        self.info.scale
    }

    /// ‖f_a‖_{L²} = ‖a‖₂.
    pub fn l2_norm(&self) -> f64 {
        self.a.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// ‖f_a‖²_{H¹} = Σ (1 + π²k²) a_k².
    pub fn h1_norm(&self) -> f64 {
        self.a.iter().enumerate().map(|(k, v)| (1.0 + PI * PI * (k * k) as f64) * v * v).sum::<f64>().sqrt()
    }

    /// ‖a‖₁, which bounds sup |f_a| up to the factor √2.
    pub fn l1_norm(&self) -> f64 {
        self.a.iter().map(|v| v.abs()).sum()
    }

    /// f_a(t) for any real t (the series is even and 2-periodic).
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        cos_series(&self.a, PI * t)
    }
}

/// a_0 + √2 Σ_{k≥1} a_k cos(kθ), with e^{ikθ} advanced by complex rotation.
#[inline]
pub(crate) fn cos_series(a: &[f64], theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let step = Complex64::new(c, s);
    let mut z = step;
    let mut acc = 0.0;
    for &ak in &a[1..] {
        acc += ak * z.re;
        z *= step;
    }
    a[0] + SQRT_2 * acc
}

fn check_unit_interval(points: &[f64], what: &str) -> Result<()> {
    if let Some((i, s)) = points.iter().enumerate().find(|(_, s)| !(0.0..=1.0).contains(*s)) {
        return Err(Error::domain(format!("{what} {i} = {s} lies outside [0, 1]")));
    }
    Ok(())
}

/// Quadrature weights premultiplied by the density, v_j ρ_d(t_j), rescaled
/// to sum to one.
///
/// For odd d the rescaling is a no-op up to rounding. For even d the density
/// has a square-root endpoint and the raw sum misses 1 by O(L⁻³); normalising
/// makes the discrete operator preserve constants exactly.
pub fn weighted_density(d: Dimension, rule: &QuadratureRule) -> Vec<f64> {
    let c_d = specfun::normalization_c(d);
    let mut w: Vec<f64> = rule.iter().map(|(t, v)| v * specfun::rho_unchecked(d, c_d, t)).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    w
}

/// Σ_j v_j f(t_j s) ρ_d(t_j) for every s.
pub fn apply_sd<F>(f: F, d: Dimension, s_points: &[f64], rule: &QuadratureRule) -> Result<Vec<f64>>
where
    F: Fn(f64) -> f64 + Sync,
{
    check_unit_interval(s_points, "evaluation point")?;
    let w = weighted_density(d, rule);
    let nodes = rule.nodes();
    Ok(s_points.par_iter().map(|&s| nodes.iter().zip(&w).map(|(&t, &wj)| wj * f(t * s)).sum()).collect())
}

/// S_d[f_a] on the given points, through the basis images.
pub fn apply_sd_coeffs(a: &CosineCoefficients, s_points: &[f64], rule: &QuadratureRule) -> Result<Vec<f64>> {
    check_unit_interval(s_points, "evaluation point")?;
    let h = basis_images(a.dimension(), a.len(), s_points, rule)?;
    Ok((0..s_points.len()).map(|l| h.column(l).iter().zip(a.coefficients()).map(|(hk, ak)| hk * ak).sum()).collect())
}

/// The K × |s| matrix ĥ_{k,l} = Σ_j v_j g_k(s_l t_j) ρ_d(t_j).
pub fn basis_images(d: Dimension, k: usize, s_points: &[f64], rule: &QuadratureRule) -> Result<DMatrix<f64>> {
    if k == 0 {
        return Err(Error::argument("K must be at least 1"));
    }
    let w = weighted_density(d, rule);
    let nodes = rule.nodes();
    let columns: Vec<Vec<f64>> = s_points
        .par_iter()
        .map(|&s| {
            let mut col = vec![0.0; k];
            for (&t, &wj) in nodes.iter().zip(&w) {
                if wj == 0.0 {
                    continue;
                }
                let (sn, cs) = (PI * s * t).sin_cos();
                let step = Complex64::new(cs, sn);
                let mut z = Complex64::new(1.0, 0.0);
                col[0] += wj;
                for entry in col.iter_mut().skip(1) {
                    z *= step;
                    *entry += wj * z.re;
                }
            }
            for entry in col.iter_mut().skip(1) {
                *entry *= SQRT_2;
            }
            col
        })
        .collect();
    Ok(DMatrix::from_fn(k, s_points.len(), |row, l| columns[l][row]))
}

/// The J × K matrix of S_d in the cosine basis, S_{j,k} = ⟨g_j, h_k⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplayMatrix {
    pub matrix: DMatrix<f64>,
    pub d: Dimension,
}

/// Assemble the display matrix with the sinc representation
/// S_{j,k} = ∫₀¹ [sinc(kt + j) + sinc(kt − j)] ρ_d(t) dt for j, k ≥ 1.
///
/// The first column is exactly e_0. The first row is
/// S_{0,k} = √2 ∫₀¹ sinc(kt) ρ_d(t) dt.
pub fn assemble_display_matrix(d: Dimension, j: usize, k: usize, rule: &QuadratureRule) -> Result<DisplayMatrix> {
    if j == 0 || k == 0 {
        return Err(Error::argument("display matrix needs J, K >= 1"));
    }
    let w = weighted_density(d, rule);
    let nodes = rule.nodes();
    let columns: Vec<Vec<f64>> = (0..k)
        .into_par_iter()
        .map(|kk| {
            let mut col = vec![0.0; j];
            if kk == 0 {
                col[0] = 1.0;
                return col;
            }
            let kf = kk as f64;
            for (&t, &wj) in nodes.iter().zip(&w) {
                if wj == 0.0 {
                    continue;
                }
                let u = kf * t;
                let sin_u = specfun::sin_pi(u);
                col[0] += wj * SQRT_2 * specfun::sinc(u);
                // sin(π(u ± j)) = (−1)^j sin(πu)
                let mut signed = -sin_u / PI;
                for (jj, entry) in col.iter_mut().enumerate().skip(1) {
                    let jf = jj as f64;
                    let denom_minus = u - jf;
                    let value = if denom_minus.abs() < 1e-3 {
                        specfun::sinc(u + jf) + specfun::sinc(denom_minus)
                    } else {
                        signed * (1.0 / (u + jf) + 1.0 / denom_minus)
                    };
                    *entry += wj * value;
                    signed = -signed;
                }
            }
            col
        })
        .collect();
    Ok(DisplayMatrix { matrix: DMatrix::from_fn(j, k, |r, c| columns[c][r]), d })
}

/// Cosine coefficients b_k ≈ ∫₀¹ F(t) g_k(t) dt for k < J.
///
/// F is sampled at the midpoints (m + 1/2)/M with M = oversample·J and
/// transformed by a DCT-II. Two grids, M and 2M, are combined by Richardson
/// extrapolation, which cancels the O(M⁻²) endpoint term of the midpoint rule.
/// F is never evaluated at 0 or 1.
pub fn cosine_analysis<F>(f: F, j: usize, oversample: usize) -> Result<Vec<f64>>
where
    F: Fn(f64) -> f64,
{
    cosine_analysis_with(|t| Ok(f(t)), j, oversample)
}

/// [`cosine_analysis`] for a fallible target; the first error is returned.
pub fn cosine_analysis_with<F>(f: F, j: usize, oversample: usize) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<f64>,
{
    if j == 0 {
        return Err(Error::argument("J must be at least 1"));
    }
    if oversample < 2 {
        return Err(Error::argument(format!("oversampling factor must be at least 2, got {oversample}")));
    }
    let m = oversample * j;
    let fine = midpoint_dct(&f, 2 * m, j)?;
    let coarse = midpoint_dct(&f, m, j)?;
    Ok(fine.iter().zip(&coarse).map(|(f2, f1)| (4.0 * f2 - f1) / 3.0).collect())
}

/// Midpoint-rule cosine coefficients on M samples, via a length-2M FFT.
fn midpoint_dct<F>(f: &F, m: usize, j: usize) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut buf = vec![Complex64::new(0.0, 0.0); 2 * m];
    for i in 0..m {
        let t = (i as f64 + 0.5) / m as f64;
        let v = f(t)?;
        if !v.is_finite() {
            return Err(Error::input(format!("target function is not finite at node {i} (t = {t})")));
        }
        buf[i].re = v;
        buf[2 * m - 1 - i].re = v;
    }
    let fft: Arc<dyn rustfft::Fft<f64>> = FftPlanner::new().plan_fft_forward(2 * m);
    fft.process(&mut buf);
    let mf = m as f64;
    Ok((0..j)
        .map(|k| {
            let phase = Complex64::from_polar(1.0, -PI * k as f64 / (2.0 * mf));
            let ck = 0.5 * (phase * buf[k]).re / mf;
            if k == 0 {
                ck
            } else {
                SQRT_2 * ck
            }
        })
        .collect())
}

/// Cosine coefficients by Gauss–Legendre quadrature; the reference path for
/// [`cosine_analysis`].
pub fn cosine_analysis_quadrature<F>(f: F, j: usize, rule: &QuadratureRule) -> Result<Vec<f64>>
where
    F: Fn(f64) -> f64,
{
    if j == 0 {
        return Err(Error::argument("J must be at least 1"));
    }
    let mut b = vec![0.0; j];
    for (i, (t, v)) in rule.iter().enumerate() {
        let value = f(t);
        if !value.is_finite() {
            return Err(Error::input(format!("target function is not finite at node {i} (t = {t})")));
        }
        let (sn, cs) = (PI * t).sin_cos();
        let step = Complex64::new(cs, sn);
        let mut z = Complex64::new(1.0, 0.0);
        b[0] += v * value;
        for bk in b.iter_mut().skip(1) {
            z *= step;
            *bk += v * value * SQRT_2 * z.re;
        }
    }
    Ok(b)
}

/// Evaluate f_a at each point of `[0, 1]`.
pub fn cosine_synthesis(a: &CosineCoefficients, t_points: &[f64]) -> Result<Vec<f64>> {
    check_unit_interval(t_points, "synthesis point")?;
    Ok(t_points.iter().map(|&t| a.eval(t)).collect())
}

/// The slicing variance V_d[f_a](s) = S_d[f_a²](s) − S_d[f_a](s)².
pub fn variance_vd(a: &CosineCoefficients, s_points: &[f64], rule: &QuadratureRule) -> Result<Vec<f64>> {
    check_unit_interval(s_points, "evaluation point")?;
    let w = weighted_density(a.dimension(), rule);
    let nodes = rule.nodes();
    s_points
        .par_iter()
        .map(|&s| {
            let (mut m1, mut m2) = (0.0, 0.0);
            for (&t, &wj) in nodes.iter().zip(&w) {
                let v = a.eval(t * s);
                m1 += wj * v;
                m2 += wj * v * v;
            }
            let var = m2 - m1 * m1;
            if var >= 0.0 {
                Ok(var)
            } else if var > -1e-12 * m2.max(1.0) {
                Ok(0.0)
            } else {
                Err(Error::Numerical(format!("negative variance {var} at s = {s}")))
            }
        })
        .collect()
}
