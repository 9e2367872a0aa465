//! Reproducible experiment drivers shared by the `report` command and the
//! acceptance tests.
//!
//! Data follow one protocol throughout: X and Y have i.i.d. N(0, 1/d)
//! coordinates (standard Gaussian samples divided by √d, so E‖x‖² = 1),
//! weights are uniform on [0, 1], the cloud is normalised, and the kernel is
//! dilated by the normalisation scale before fitting.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::fastsum::{
    brute_force_sum, normalize_data, sample_directions, sliced_sum, DirectionMode, PointCloud, SumOptions,
};
use crate::kernels::{KernelName, KernelSpec};
use crate::metrics::{forward_error, relative_l2, ErrorReport};
use crate::quadrature::cached_rule;
use crate::recover::{fit_kernel, FitConfig, Method};
use crate::sliceop::CosineCoefficients;
use crate::specfun::Dimension;

/// A normalised Gaussian point cloud with uniform weights.
pub fn gaussian_cloud(d: Dimension, n: usize, m: usize, seed: u64) -> Result<PointCloud> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sd = 1.0 / d.as_f64().sqrt();
    let mut normal = |count: usize| -> Vec<f64> {
        (0..count).map(|_| sd * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)).collect()
    };
    let x = normal(n * d.get());
    let y = normal(m * d.get());
    let w = (0..n).map(|_| rng.random::<f64>()).collect();
    normalize_data(PointCloud::new(d.get(), x, y, w)?)
}

/// Coefficients for `kernel` adapted to the scale of `pc`.
pub fn fit_for_cloud(
    kernel: &KernelSpec,
    pc: &PointCloud,
    method: Method,
    cfg: &FitConfig,
) -> Result<CosineCoefficients> {
    let d = Dimension::new(pc.dim())?;
    fit_kernel(&kernel.dilated(pc.scale())?, d, method, cfg)
}

/// Exact kernel sums for the undilated kernel on the original data.
pub fn exact_sums(kernel: &KernelSpec, pc: &PointCloud, workers: Option<usize>) -> Result<Vec<f64>> {
    let dilated = kernel.dilated(pc.scale())?;
    brute_force_sum(pc, |r| dilated.profile(dilated.scale * r), workers)
}

/// Relative L² error of the sliced sum against brute force.
pub fn slicing_error(
    a: &CosineCoefficients,
    pc: &PointCloud,
    exact: &[f64],
    p: usize,
    mode: DirectionMode,
    seed: u64,
    opts: &SumOptions,
) -> Result<f64> {
    let d = Dimension::new(pc.dim())?;
    let dirs = sample_directions(d, p, mode, seed)?;
    let approx = sliced_sum(pc, a, &dirs, opts)?;
    relative_l2(exact, &approx)
}

/// Settings of the method-comparison table.
#[derive(Debug, Clone)]
pub struct TableConfig {
    pub d: Dimension,
    pub p: usize,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub kernels: Vec<KernelSpec>,
    pub fit: FitConfig,
    pub opts: SumOptions,
}

impl TableConfig {
    /// All catalog kernels with c = 1 at the given size.
    pub fn new(d: Dimension, p: usize, n: usize, reps: usize, seed: u64) -> Result<Self> {
        let kernels = KernelName::ALL.iter().map(|&k| KernelSpec::new(k, 1.0)).collect::<Result<_>>()?;
        Ok(TableConfig { d, p, n, reps, seed, kernels, fit: Method::SL2H1.config(), opts: SumOptions::default() })
    }
}

/// One row: mean relative errors for S-L2-H1, F-L2-H1, F-H1-H1 and Direct.
/// Entries are `None` where the method does not apply.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub kernel: KernelSpec,
    pub errors: [Option<f64>; 4],
}

/// Columns of [`TableRow::errors`].
pub const TABLE_METHODS: [Method; 4] = [Method::SL2H1, Method::FL2H1, Method::FH1H1, Method::Direct];

/// Relative slicing errors averaged over repetitions. Each repetition draws
/// a fresh cloud and fresh orthogonal directions.
pub fn method_table(cfg: &TableConfig) -> Result<Vec<TableRow>> {
    let mut sums = vec![[0.0; 4]; cfg.kernels.len()];
    for rep in 0..cfg.reps {
        let seed = cfg.seed.wrapping_add(rep as u64);
        let pc = gaussian_cloud(cfg.d, cfg.n, cfg.n, seed)?;
        for (row, kernel) in cfg.kernels.iter().enumerate() {
            let exact = exact_sums(kernel, &pc, cfg.opts.workers)?;
            for (col, &method) in TABLE_METHODS.iter().enumerate() {
                if method == Method::Direct && !kernel.has_known_f() {
                    continue;
                }
                let fit = FitConfig { tau: method.config().tau, range_norm: method.config().range_norm, ..cfg.fit };
                let a = fit_for_cloud(kernel, &pc, method, &fit)?;
                let dir_seed = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(1);
                sums[row][col] +=
                    slicing_error(&a, &pc, &exact, cfg.p, DirectionMode::OrthogonalBlocks, dir_seed, &cfg.opts)?;
            }
        }
    }
    Ok(cfg
        .kernels
        .iter()
        .zip(sums)
        .map(|(kernel, s)| TableRow {
            kernel: *kernel,
            errors: std::array::from_fn(|col| {
                (TABLE_METHODS[col] != Method::Direct || kernel.has_known_f()).then(|| s[col] / cfg.reps as f64)
            }),
        })
        .collect())
}

/// Forward error of a fit on the 1001-point grid, evaluated with 2L nodes.
/// LOG is singular at 0; its grid starts at the first positive point.
pub fn forward_curve(kernel: &KernelSpec, d: Dimension, method: Method, cfg: &FitConfig) -> Result<ErrorReport> {
    let a = fit_kernel(kernel, d, method, cfg)?;
    let rule = cached_rule(2 * cfg.l);
    let mut grid = crate::metrics::default_grid();
    if kernel.name == KernelName::Log {
        grid.remove(0);
    }
    forward_error(&a, |s| kernel.eval_f(s).unwrap_or(f64::NAN), &grid, &rule)
}

/// One point of a τ sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub tau: f64,
    pub forward_max: f64,
    pub relative_error: f64,
}

/// Relative slicing error as a function of τ on one cloud.
#[allow(clippy::too_many_arguments)]
pub fn tau_sweep(
    kernel: &KernelSpec,
    method: Method,
    taus: &[f64],
    pc: &PointCloud,
    p: usize,
    seed: u64,
    cfg: &FitConfig,
    opts: &SumOptions,
) -> Result<Vec<SweepPoint>> {
    let exact = exact_sums(kernel, pc, opts.workers)?;
    let dilated = kernel.dilated(pc.scale())?;
    let d = Dimension::new(pc.dim())?;
    let rule = cached_rule(2 * cfg.l);
    let mut grid = crate::metrics::default_grid();
    if kernel.name == KernelName::Log {
        grid.remove(0);
    }
    taus.iter()
        .map(|&tau| {
            let fit = FitConfig { tau, ..*cfg };
            let a = fit_kernel(&dilated, d, method, &fit)?;
            let report = forward_error(&a, |s| dilated.eval_f(s).unwrap_or(f64::NAN), &grid, &rule)?;
            let relative_error = slicing_error(&a, pc, &exact, p, DirectionMode::OrthogonalBlocks, seed, opts)?;
            Ok(SweepPoint { tau, forward_max: report.forward_max, relative_error })
        })
        .collect()
}

/// Wall time of one sliced and one brute-force sum at N = M = `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchPoint {
    pub n: usize,
    pub sliced_secs: f64,
    pub brute_secs: f64,
}

/// Time both summation paths for a Gauss kernel (the fit is excluded).
pub fn bench(
    d: Dimension,
    k: usize,
    p: usize,
    sizes: &[usize],
    seed: u64,
    opts: &SumOptions,
) -> Result<Vec<BenchPoint>> {
    let gauss = KernelSpec::new(KernelName::Gauss, 1.0)?;
    sizes
        .iter()
        .map(|&n| {
            let pc = gaussian_cloud(d, n, n, seed)?;
            let dilated = gauss.dilated(pc.scale())?;
            let a = CosineCoefficients::new(alternating(k), d)?.with_scale(pc.scale())?;
            let dirs = sample_directions(d, p, DirectionMode::OrthogonalBlocks, seed)?;
            let start = Instant::now();
            std::hint::black_box(sliced_sum(&pc, &a, &dirs, opts)?);
            let sliced_secs = start.elapsed().as_secs_f64();
            let start = Instant::now();
            std::hint::black_box(brute_force_sum(&pc, |r| dilated.profile(dilated.scale * r), opts.workers)?);
            let brute_secs = start.elapsed().as_secs_f64();
            Ok(BenchPoint { n, sliced_secs, brute_secs })
        })
        .collect()
}

/// Timing does not depend on coefficient values; any dense vector will do.
fn alternating(k: usize) -> Vec<f64> {
    (0..k).map(|i| (-1.0f64).powi(i as i32) / (1.0 + i as f64)).collect()
}

/// Smallest benchmarked N at which the sliced sum is faster.
pub fn crossover(points: &[BenchPoint]) -> Option<usize> {
    points.iter().find(|b| b.sliced_secs < b.brute_secs).map(|b| b.n)
}
