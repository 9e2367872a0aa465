//! Recovery of the cosine coefficients of f from F = S_d[f].
//!
//! * [`fit_spatial`] matches S_d[f_a] to F at the quadrature nodes.
//! * [`fit_frequency`] matches cosine coefficients through the display matrix.
//! * [`analytic_inverse_odd`] evaluates the closed-form inverse for odd d.
//! * [`direct_coefficients`] expands a catalog preimage directly.
//!
//! Both fits solve a Tikhonov problem with an L² or H¹ penalty on f_a.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::derivatives::Derivatives;
use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::quadrature::cached_rule;
use crate::ridge::{solve_ridge, RidgeProblem};
use crate::sliceop::{
    assemble_display_matrix, basis_images, cosine_analysis_with, CosineCoefficients, FitInfo, FitMethod, Norm,
};
use crate::specfun::Dimension;

/// Largest odd dimension accepted by [`analytic_inverse_odd`].
pub const ANALYTIC_MAX_DIM: usize = 11;

/// Oversampling factor of the cosine analysis in the frequency fit.
pub const DEFAULT_OVERSAMPLE: usize = 4;

/// Discretisation and regularisation parameters of a fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    /// Number of domain coefficients.
    pub k: usize,
    /// Number of range coefficients (frequency fit only).
    pub j: usize,
    /// Number of quadrature nodes.
    pub l: usize,
    pub tau: f64,
    pub range_norm: Norm,
    pub domain_norm: Norm,
    pub oversample: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        Method::SL2H1.config()
    }
}

/// The named fitting methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Spatial fit, L² range, H¹ domain.
    SL2H1,
    /// Frequency fit, L² range, H¹ domain.
    FL2H1,
    /// Frequency fit, H¹ range, H¹ domain.
    FH1H1,
    /// Cosine expansion of the closed-form preimage.
    Direct,
}

impl Method {
    pub const FITTED: [Method; 3] = [Method::SL2H1, Method::FL2H1, Method::FH1H1];

    /// Default configuration, with the method's default τ.
    pub fn config(self) -> FitConfig {
        let (tau, range_norm) = match self {
            Method::SL2H1 => (1e-6, Norm::L2),
            Method::FL2H1 => (1e-7, Norm::L2),
            Method::FH1H1 => (1e-4, Norm::H1),
            Method::Direct => (0.0, Norm::L2),
        };
        FitConfig { k: 256, j: 1024, l: 1024, tau, range_norm, domain_norm: Norm::H1, oversample: DEFAULT_OVERSAMPLE }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Method::SL2H1 => "S-L2-H1",
            Method::FL2H1 => "F-L2-H1",
            Method::FH1H1 => "F-H1-H1",
            Method::Direct => "direct",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Method::SL2H1, Method::FL2H1, Method::FH1H1, Method::Direct]
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::argument(format!("unknown method '{s}' (expected s-l2-h1, f-l2-h1, f-h1-h1 or direct)"))
            })
    }
}

fn validate(cfg: &FitConfig) -> Result<()> {
    if cfg.k == 0 || cfg.j == 0 || cfg.l == 0 {
        return Err(Error::argument("K, J and L must be positive"));
    }
    if !(cfg.tau > 0.0) || !cfg.tau.is_finite() {
        return Err(Error::argument(format!("tau must be positive, got {}", cfg.tau)));
    }
    Ok(())
}

type MatrixCache = Mutex<HashMap<(char, usize, usize, usize, usize), Arc<DMatrix<f64>>>>;

fn memoized(
    key: (char, usize, usize, usize, usize),
    build: impl FnOnce() -> Result<DMatrix<f64>>,
) -> Result<Arc<DMatrix<f64>>> {
    static CACHE: OnceLock<MatrixCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(m) = cache.lock().expect("matrix cache poisoned").get(&key) {
        return Ok(Arc::clone(m));
    }
    let m = Arc::new(build()?);
    Ok(cache.lock().expect("matrix cache poisoned").entry(key).or_insert(m).clone())
}

/// The spatial design matrix Ĥᵀ with rows scaled by √v_l, shape L × K.
/// Depends only on (d, K, L) and is cached.
pub fn spatial_design(d: Dimension, k: usize, l: usize) -> Result<Arc<DMatrix<f64>>> {
    memoized(('S', d.get(), k, l, 0), || {
        let rule = cached_rule(l);
        let h = basis_images(d, k, rule.nodes(), &rule)?;
        let sqrt_v: Vec<f64> = rule.weights().iter().map(|v| v.sqrt()).collect();
        Ok(DMatrix::from_fn(l, k, |row, col| h[(col, row)] * sqrt_v[row]))
    })
}

/// The J × K display matrix for (d, J, K, L), cached.
pub fn display_matrix(d: Dimension, j: usize, k: usize, l: usize) -> Result<Arc<DMatrix<f64>>> {
    memoized(('F', d.get(), j, k, l), || {
        let rule = cached_rule(l);
        Ok(assemble_display_matrix(d, j, k, &rule)?.matrix)
    })
}

/// The least-squares problem of the spatial fit. τ = 0 is allowed here.
pub fn spatial_problem<F>(f: F, d: Dimension, cfg: &FitConfig) -> Result<RidgeProblem>
where
    F: Fn(f64) -> f64,
{
    if cfg.range_norm != Norm::L2 {
        return Err(Error::Unsupported("the spatial fit is defined for an L2 range norm only".into()));
    }
    let rule = cached_rule(cfg.l);
    let a = spatial_design(d, cfg.k, cfg.l)?;
    let mut b = Vec::with_capacity(cfg.l);
    for (i, (t, v)) in rule.iter().enumerate() {
        let value = f(t);
        if !value.is_finite() {
            return Err(Error::input(format!("target function is not finite at node {i} (t = {t})")));
        }
        b.push(v.sqrt() * value);
    }
    RidgeProblem::with_norm((*a).clone(), b, cfg.tau, cfg.domain_norm)
}

/// The least-squares problem of the frequency fit.
pub fn frequency_problem<F>(f: F, d: Dimension, cfg: &FitConfig) -> Result<RidgeProblem>
where
    F: Fn(f64) -> f64,
{
    let s = display_matrix(d, cfg.j, cfg.k, cfg.l)?;
    let mut b = cosine_analysis_with(|t| Ok(f(t)), cfg.j, cfg.oversample)?;
    let mut a = (*s).clone();
    if cfg.range_norm == Norm::H1 {
        for (jj, bj) in b.iter_mut().enumerate() {
            let w = Norm::H1.weight(jj);
            a.row_mut(jj).scale_mut(w);
            *bj *= w;
        }
    }
    RidgeProblem::with_norm(a, b, cfg.tau, cfg.domain_norm)
}

fn finish(problem: &RidgeProblem, d: Dimension, cfg: &FitConfig, method: FitMethod) -> Result<CosineCoefficients> {
    let sol = solve_ridge(problem)?;
    let info = FitInfo {
        method,
        tau: cfg.tau,
        domain_norm: cfg.domain_norm,
        range_norm: cfg.range_norm,
        kernel: None,
        scale: 1.0,
        quadrature_nodes: Some(cfg.l),
        range_modes: (method == FitMethod::Frequency).then_some(cfg.j),
    };
    CosineCoefficients::with_info(sol.coefficients, d, info)
}

/// Spatial-domain fit: minimise Σ_l v_l (S_d[f_a](t_l) − F(t_l))² + τ²‖Da‖².
pub fn fit_spatial<F>(f: F, d: Dimension, cfg: &FitConfig) -> Result<CosineCoefficients>
where
    F: Fn(f64) -> f64,
{
    validate(cfg)?;
    let problem = spatial_problem(f, d, cfg)?;
    finish(&problem, d, cfg, FitMethod::Spatial)
}

/// Frequency-domain fit: minimise ‖W(Sa − b)‖² + τ²‖Da‖² where b holds the
/// first J cosine coefficients of F and W is the range-norm weight.
pub fn fit_frequency<F>(f: F, d: Dimension, cfg: &FitConfig) -> Result<CosineCoefficients>
where
    F: Fn(f64) -> f64,
{
    validate(cfg)?;
    let problem = frequency_problem(f, d, cfg)?;
    finish(&problem, d, cfg, FitMethod::Frequency)
}

/// Fit a catalog kernel with one of the named methods.
///
/// The kernel's dilation is recorded as the coefficient scale.
pub fn fit_kernel(kernel: &KernelSpec, d: Dimension, method: Method, cfg: &FitConfig) -> Result<CosineCoefficients> {
    let target = |s: f64| kernel.eval_f(s).unwrap_or(f64::NAN);
    let mut coeffs = match method {
        Method::SL2H1 => fit_spatial(target, d, cfg)?,
        Method::FL2H1 | Method::FH1H1 => fit_frequency(target, d, cfg)?,
        Method::Direct => direct_coefficients(kernel, d, cfg.k)?,
    };
    coeffs.info.kernel = Some(kernel.label());
    coeffs.info.scale = kernel.scale;
    Ok(coeffs)
}

/// Cosine coefficients of a catalog kernel's closed-form preimage.
pub fn direct_coefficients(kernel: &KernelSpec, d: Dimension, k: usize) -> Result<CosineCoefficients> {
    if !kernel.has_known_f() {
        return Err(Error::Unsupported(format!("{} kernel has no closed-form preimage", kernel.name)));
    }
    let a = cosine_analysis_with(|t| kernel.eval_known_f(d, t), k, DEFAULT_OVERSAMPLE)?;
    let info =
        FitInfo { method: FitMethod::Direct, kernel: Some(kernel.label()), scale: kernel.scale, ..FitInfo::default() };
    CosineCoefficients::with_info(a, d, info)
}

/// The integer table a_{m,k} of the odd-dimension inverse, 0 ≤ k ≤ m ≤ n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecursionTable {
    d: Dimension,
    rows: Vec<Vec<BigUint>>,
}

impl RecursionTable {
    /// a_{0,0} = 1, a_{m,0} = (d−2m) a_{m−1,0}, a_{m,m} = 1 and
    /// a_{m,k} = (d−2m+k) a_{m−1,k} + a_{m−1,k−1}, for m ≤ n = (d−1)/2.
    ///
    /// These are the coefficients of dᵐ/dtᵐ [F(√t) √t^{d−2}]
    /// = 2⁻ᵐ Σ_k a_{m,k} F⁽ᵏ⁾(√t) √t^{d−2−2m+k}.
    pub fn new(d: Dimension) -> Result<Self> {
        if !d.is_odd() {
            return Err(Error::argument(format!("the analytic inverse needs odd d, got {d}")));
        }
        let n = (d.get() - 1) / 2;
        let mut rows: Vec<Vec<BigUint>> = vec![vec![BigUint::one()]];
        for m in 1..=n {
            let prev = &rows[m - 1];
            let mut row = vec![BigUint::zero(); m + 1];
            row[0] = &prev[0] * BigUint::from(d.get() - 2 * m);
            for k in 1..m {
                row[k] = &prev[k] * BigUint::from(d.get() - 2 * m + k) + &prev[k - 1];
            }
            row[m] = BigUint::one();
            rows.push(row);
        }
        Ok(RecursionTable { d, rows })
    }

    pub fn dimension(&self) -> Dimension {
        self.d
    }

    /// n = (d − 1)/2, the order of the highest derivative.
    pub fn order(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn entry(&self, m: usize, k: usize) -> Option<&BigUint> {
        self.rows.get(m).and_then(|r| r.get(k))
    }

    pub fn row(&self, m: usize) -> &[BigUint] {
        &self.rows[m]
    }

    /// 2ⁿ n! / (2n)! = 1 / (2n − 1)!!.
    pub fn prefactor(&self) -> f64 {
        let n = self.order();
        let double_fact: BigUint = (1..=n).map(|i| BigUint::from(2 * i - 1)).product();
        1.0 / double_fact.to_f64().unwrap_or(f64::INFINITY)
    }

    /// Weights prefactor · a_{n,k} of t^k F^{(k)}(t).
    pub fn weights(&self) -> Vec<f64> {
        let pre = self.prefactor();
        self.rows[self.order()].iter().map(|a| pre * a.to_f64().unwrap_or(f64::INFINITY)).collect()
    }

    /// C_d = (prefactor · Σ_k a_{n,k})^{1/2}, the H^n → L² norm bound of S_d⁻¹.
    pub fn bound(&self) -> f64 {
        let sum: BigUint = self.rows[self.order()].iter().sum();
        (self.prefactor() * sum.to_f64().unwrap_or(f64::INFINITY)).sqrt()
    }
}

/// f(t) = (2ⁿ n!/(2n)!) Σ_k a_{n,k} t^k F^{(k)}(t) for odd d ≤ 11.
///
/// High derivatives and large integers make this unstable as d grows, so it
/// serves as a verification route rather than a production fit.
pub fn analytic_inverse_odd<D: Derivatives + ?Sized>(f: &D, d: Dimension, t_points: &[f64]) -> Result<Vec<f64>> {
    if d.get() > ANALYTIC_MAX_DIM {
        return Err(Error::Unsupported(format!("the analytic inverse is limited to d <= {ANALYTIC_MAX_DIM}, got {d}")));
    }
    let table = RecursionTable::new(d)?;
    let n = table.order();
    let weights = table.weights();
    t_points
        .iter()
        .map(|&t| {
            let derivs = f.derivatives(t, n)?;
            if derivs.len() < n + 1 {
                return Err(Error::argument(format!(
                    "need {} derivatives at t = {t}, got {}",
                    n,
                    derivs.len().saturating_sub(1)
                )));
            }
            let mut tk = 1.0;
            let mut acc = 0.0;
            for (w, fk) in weights.iter().zip(&derivs) {
                acc += w * tk * fk;
                tk *= t;
            }
            Ok(acc)
        })
        .collect()
}

/// Cosine coefficients of the analytic inverse, sampled at midpoints.
pub fn analytic_coefficients<D: Derivatives + ?Sized>(f: &D, d: Dimension, k: usize) -> Result<CosineCoefficients> {
    let a = cosine_analysis_with(|t| Ok(analytic_inverse_odd(f, d, &[t])?[0]), k, DEFAULT_OVERSAMPLE)?;
    let info = FitInfo { method: FitMethod::Analytic, ..FitInfo::default() };
    CosineCoefficients::with_info(a, d, info)
}
