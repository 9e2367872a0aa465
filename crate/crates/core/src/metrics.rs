//! Error functionals.
//!
//! The mean square error of the sliced estimator at ‖x‖ splits into a
//! deterministic and a stochastic part,
//!
//! E[((1/P) Σ_p f(|⟨ξ_p, x⟩|) − F(‖x‖))²] = (S_d[f] − F)²(‖x‖) + V_d[f](‖x‖)/P,
//!
//! the squared *forward error* plus the slicing variance over P.
//! [`forward_error`] computes the first part by quadrature and
//! [`empirical_mse`] estimates the left-hand side by Monte Carlo.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::QuadratureRule;
use crate::sliceop::{apply_sd_coeffs, variance_vd, CosineCoefficients};

/// The 1001-point uniform grid s_n = n/1000.
pub fn default_grid() -> Vec<f64> {
    (0..=1000).map(|n| n as f64 / 1000.0).collect()
}

/// Forward error of a fit on a grid, with the slicing variance alongside.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub grid: Vec<f64>,
    /// |S_d[f_a](s) − F(s)| at each grid point.
    pub forward_abs: Vec<f64>,
    pub forward_max: f64,
    /// Root mean square of `forward_abs`, a grid surrogate of the L² norm on [0, 1].
    pub forward_l2: f64,
    /// V_d[f_a](s) at each grid point.
    pub variance: Vec<f64>,
    /// Largest deviation, in standard errors, between an empirical MSE and
    /// forward² + V/P; zero until [`ErrorReport::check_decomposition`] runs.
    pub decomposition_residual: f64,
}

impl ErrorReport {
    /// Predicted mean square error forward² + V/P at each grid point.
    pub fn predicted_mse(&self, p: usize) -> Vec<f64> {
        self.forward_abs.iter().zip(&self.variance).map(|(e, v)| e * e + v / p as f64).collect()
    }

    /// Compare an MSE estimate on the same grid against the prediction and
    /// record the worst deviation in units of the standard error.
    pub fn check_decomposition(&mut self, mse: &MseEstimate, p: usize) -> Result<f64> {
        if mse.mean.len() != self.grid.len() {
            return Err(Error::argument(format!(
                "MSE estimate has {} points, report has {}",
                mse.mean.len(),
                self.grid.len()
            )));
        }
        let predicted = self.predicted_mse(p);
        // Points where the estimator is deterministic (s = 0) have a zero
        // standard error, so rounding is measured against ROUNDING·|prediction|.
        const ROUNDING: f64 = 1e-10;
        let worst = mse
            .mean
            .iter()
            .zip(&mse.stderr)
            .zip(&predicted)
            .map(|((m, se), pred)| {
                let dev = (m - pred).abs();
                if dev == 0.0 {
                    0.0
                } else {
                    dev / (se + ROUNDING * pred.abs()).max(f64::MIN_POSITIVE)
                }
            })
            .fold(0.0, f64::max);
        self.decomposition_residual = worst;
        Ok(worst)
    }
}

fn check_unit(points: &[f64], what: &str) -> Result<()> {
    if let Some((i, s)) = points.iter().enumerate().find(|(_, s)| !(0.0..=1.0).contains(*s)) {
        return Err(Error::domain(format!("{what} {i} = {s} lies outside [0, 1]")));
    }
    Ok(())
}

/// |S_d[f_a] − F| on `grid`.
///
/// Pass a rule with more nodes than the fit used so that the quadrature
/// error of the fit is not hidden.
pub fn forward_error<F>(a: &CosineCoefficients, f: F, grid: &[f64], rule: &QuadratureRule) -> Result<ErrorReport>
where
    F: Fn(f64) -> f64,
{
    check_unit(grid, "grid point")?;
    let image = apply_sd_coeffs(a, grid, rule)?;
    let forward_abs: Vec<f64> = grid.iter().zip(&image).map(|(&s, v)| (v - f(s)).abs()).collect();
    if let Some(i) = forward_abs.iter().position(|v| !v.is_finite()) {
        return Err(Error::input(format!("target function is not finite at grid point {i} (s = {})", grid[i])));
    }
    let forward_max = forward_abs.iter().copied().fold(0.0, f64::max);
    let forward_l2 =
        if grid.is_empty() { 0.0 } else { (forward_abs.iter().map(|e| e * e).sum::<f64>() / grid.len() as f64).sqrt() };
    let variance = variance_vd(a, grid, rule)?;
    Ok(ErrorReport { grid: grid.to_vec(), forward_abs, forward_max, forward_l2, variance, decomposition_residual: 0.0 })
}

/// Per-point Monte Carlo mean and its standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct MseEstimate {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

/// Monte Carlo estimate of E[((1/P) Σ_p f_a(|⟨ξ_p, x⟩|) − F(‖x‖))²].
///
/// Only ‖x‖ matters, so x is placed on the first axis. Trial t draws its
/// directions from stream t of the master seed, which makes the estimate
/// independent of scheduling.
pub fn empirical_mse<F>(
    a: &CosineCoefficients,
    f: F,
    x_norms: &[f64],
    p: usize,
    trials: usize,
    seed: u64,
) -> Result<MseEstimate>
where
    F: Fn(f64) -> f64 + Sync,
{
    check_unit(x_norms, "norm")?;
    if p == 0 || trials < 2 {
        return Err(Error::argument("need P >= 1 and at least two trials"));
    }
    let d = a.dimension().get();
    let targets: Vec<f64> = x_norms.iter().map(|&r| f(r)).collect();
    let squares: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let first: Vec<f64> = (0..p)
                .map(|_| {
                    let g: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
                    g[0] / g.iter().map(|v| v * v).sum::<f64>().sqrt()
                })
                .collect();
            x_norms
                .iter()
                .zip(&targets)
                .map(|(&r, &target)| {
                    let dev = first.iter().map(|xi| a.eval((r * xi).abs()) - target).sum::<f64>() / p as f64;
                    dev * dev
                })
                .collect()
        })
        .collect();
    let n = trials as f64;
    let (mean, stderr) = (0..x_norms.len())
        .map(|i| {
            let m = squares.iter().map(|s| s[i]).sum::<f64>() / n;
            let var = squares.iter().map(|s| (s[i] - m).powi(2)).sum::<f64>() / (n - 1.0);
            (m, (var / n).sqrt())
        })
        .unzip();
    Ok(MseEstimate { mean, stderr })
}

/// ‖s_ref − s_hat‖₂ / ‖s_ref‖₂.
pub fn relative_l2(s_ref: &[f64], s_hat: &[f64]) -> Result<f64> {
    if s_ref.len() != s_hat.len() {
        return Err(Error::argument(format!("lengths differ: {} and {}", s_ref.len(), s_hat.len())));
    }
    let den = s_ref.iter().map(|v| v * v).sum::<f64>().sqrt();
    if den == 0.0 {
        return Err(Error::domain("reference vector is zero, relative error undefined"));
    }
    let num = s_ref.iter().zip(s_hat).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{KernelName, KernelSpec};
    use crate::quadrature::cached_rule;
    use crate::recover::direct_coefficients;
    use crate::specfun::Dimension;
    use rand::Rng;

    fn dim(d: usize) -> Dimension {
        Dimension::new(d).unwrap()
    }

    fn random_coeffs(seed: u64, k: usize, d: usize) -> CosineCoefficients {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = (0..k).map(|i| rng.random_range(-1.0..1.0) / (1.0 + i as f64)).collect();
        CosineCoefficients::new(a, dim(d)).unwrap()
    }

    #[test]
    fn relative_l2_examples() {
        assert_eq!(relative_l2(&[3.0, 4.0], &[3.0, 4.0]).unwrap(), 0.0);
        assert_eq!(relative_l2(&[3.0, 4.0], &[0.0, 0.0]).unwrap(), 1.0);
        assert!((relative_l2(&[3.0, 4.0], &[3.0, 0.0]).unwrap() - 0.8).abs() < 1e-15);
        assert!(matches!(relative_l2(&[0.0, 0.0], &[1.0, 0.0]), Err(Error::Domain(_))));
        assert!(relative_l2(&[1.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn zero_fit_of_zero_target() {
        let a = CosineCoefficients::new(vec![0.0; 8], dim(5)).unwrap();
        let r = forward_error(&a, |_| 0.0, &default_grid(), &cached_rule(256)).unwrap();
        assert!(r.forward_abs.iter().all(|&e| e == 0.0));
        assert_eq!(r.forward_max, 0.0);
        assert_eq!(r.grid.len(), 1001);
    }

    #[test]
    fn direct_truncation_error_shrinks_with_k() {
        let d = dim(5);
        let imq = KernelSpec::new(KernelName::Imq, 1.0).unwrap();
        let rule = cached_rule(2048);
        let grid = default_grid();
        let f = |s: f64| imq.eval_f(s).unwrap();
        let e8 = forward_error(&direct_coefficients(&imq, d, 256).unwrap(), f, &grid, &rule).unwrap();
        let e9 = forward_error(&direct_coefficients(&imq, d, 512).unwrap(), f, &grid, &rule).unwrap();
        assert!(e8.forward_max < 1e-6, "{}", e8.forward_max);
        assert!(e9.forward_max <= e8.forward_max * 1.01 + 1e-15);
    }

    #[test]
    fn constant_has_zero_mse() {
        let a = CosineCoefficients::new(vec![0.4], dim(7)).unwrap();
        let mse = empirical_mse(&a, |_| 0.4, &[0.0, 0.5, 1.0], 3, 10, 1).unwrap();
        assert!(mse.mean.iter().all(|&m| m == 0.0));
    }

    #[test]
    fn decomposition_holds() {
        let p = 20;
        let a = random_coeffs(3, 16, 10);
        let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        // An arbitrary target: the forward error is then sizeable.
        let f = |s: f64| (-s * s).exp();
        let mut report = forward_error(&a, f, &grid, &cached_rule(1024)).unwrap();
        let mse = empirical_mse(&a, f, &grid, p, 2000, 42).unwrap();
        let worst = report.check_decomposition(&mse, p).unwrap();
        assert!(worst < 3.5, "worst deviation {worst} standard errors");
        assert_eq!(report.decomposition_residual, worst);
    }

    #[test]
    fn variance_part_halves_when_p_doubles() {
        let a = random_coeffs(5, 12, 10);
        let rule = cached_rule(1024);
        let x = [0.6, 0.9];
        let image = apply_sd_coeffs(&a, &x, &rule).unwrap();
        let exact = |s: f64| if s == 0.6 { image[0] } else { image[1] };
        let m10 = empirical_mse(&a, exact, &x, 10, 4000, 7).unwrap();
        let m20 = empirical_mse(&a, exact, &x, 20, 4000, 8).unwrap();
        for i in 0..2 {
            let ratio = m10.mean[i] / m20.mean[i];
            let rel_se = (m10.stderr[i] / m10.mean[i]).hypot(m20.stderr[i] / m20.mean[i]);
            assert!((ratio - 2.0).abs() < 3.0 * 2.0 * rel_se, "ratio {ratio}");
        }
    }

    #[test]
    fn mse_is_deterministic() {
        let a = random_coeffs(2, 8, 5);
        let m1 = empirical_mse(&a, |_| 0.0, &[0.3], 4, 50, 9).unwrap();
        let m2 = empirical_mse(&a, |_| 0.0, &[0.3], 4, 50, 9).unwrap();
        assert_eq!(m1, m2);
    }

    #[test]
    fn lemma_bound_on_variance() {
        let rule = cached_rule(1024);
        let grid = default_grid();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let d = rng.random_range(3..60);
            let k = rng.random_range(1..33);
            let a = CosineCoefficients::new((0..k).map(|_| rng.random_range(-1.0..1.0)).collect(), dim(d)).unwrap();
            let bound = 2.0 * a.l1_norm().powi(2) + 1e-9;
            let v = variance_vd(&a, &grid, &rule).unwrap();
            assert!(v.iter().all(|&x| x <= bound));
        }
    }
}
