//! Sliced kernel summation.
//!
//! For radial F = S_d[f], the sum s_m = Σ_n F(‖x_n − y_m‖) w_n is replaced by
//! the average over P directions ξ_p of one-dimensional sums
//! Σ_n f(|⟨x_n − y_m, ξ_p⟩|) w_n. With f = f_a a cosine series, each 1D sum
//! factors through the exponential sums ŵ_k = Σ_n e^{iπk x_n} w_n.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::sliceop::CosineCoefficients;
use crate::specfun::Dimension;

/// Sources X (N × d), targets Y (M × d) and weights w, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    d: usize,
    x: Vec<f64>,
    y: Vec<f64>,
    w: Vec<f64>,
    scale: f64,
}

impl PointCloud {
    /// Wrap flat row-major coordinates without rescaling (scale = 1).
    pub fn new(d: usize, x: Vec<f64>, y: Vec<f64>, w: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::argument("points need at least one coordinate"));
        }
        if !x.len().is_multiple_of(d) || !y.len().is_multiple_of(d) {
            return Err(Error::argument(format!("coordinate arrays are not multiples of d = {d}")));
        }
        if x.is_empty() || y.is_empty() {
            return Err(Error::argument("need at least one source and one target"));
        }
        if w.len() != x.len() / d {
            return Err(Error::argument(format!("{} weights for {} sources", w.len(), x.len() / d)));
        }
        for (what, data, stride) in [("source", &x, d), ("target", &y, d), ("weight", &w, 1)] {
            if let Some(i) = data.iter().position(|v| !v.is_finite()) {
                return Err(Error::input(format!("{what} {} has a non-finite entry", i / stride)));
            }
        }
        Ok(PointCloud { d, x, y, w, scale: 1.0 })
    }

    /// Build from rows of equal length.
    pub fn from_rows(x: &[Vec<f64>], y: &[Vec<f64>], w: Vec<f64>) -> Result<Self> {
        let d = x.first().map(Vec::len).unwrap_or(0);
        for (what, rows) in [("source", x), ("target", y)] {
            if let Some(i) = rows.iter().position(|r| r.len() != d) {
                return Err(Error::input(format!("{what} row {i} has {} coordinates, expected {d}", rows[i].len())));
            }
        }
        PointCloud::new(d, x.concat(), y.concat(), w)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn n_sources(&self) -> usize {
        self.w.len()
    }

    pub fn n_targets(&self) -> usize {
        self.y.len() / self.d
    }

    pub fn source(&self, n: usize) -> &[f64] {
        &self.x[n * self.d..(n + 1) * self.d]
    }

    pub fn target(&self, m: usize) -> &[f64] {
        &self.y[m * self.d..(m + 1) * self.d]
    }

    pub fn sources(&self) -> &[f64] {
        &self.x
    }

    pub fn targets(&self) -> &[f64] {
        &self.y
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    /// Factor by which the original coordinates were divided.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    fn max_norm(data: &[f64], d: usize) -> f64 {
        data.chunks_exact(d).map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt()).fold(0.0, f64::max)
    }

    /// Divide all coordinates by `scale`.
    pub fn rescaled(mut self, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::argument(format!("scale must be positive, got {scale}")));
        }
        self.x.iter_mut().chain(self.y.iter_mut()).for_each(|v| *v /= scale);
        self.scale *= scale;
        Ok(self)
    }
}

/// Rescale so that max‖X_n‖ + max‖Y_m‖ ≤ 1.
///
/// Afterwards ‖x_n − y_m‖ ≤ 1, so every projection difference lies in
/// [−1, 1]. Kernel sums are preserved if the kernel is dilated by
/// [`PointCloud::scale`].
pub fn normalize_data(pc: PointCloud) -> Result<PointCloud> {
    let s = PointCloud::max_norm(&pc.x, pc.d) + PointCloud::max_norm(&pc.y, pc.d);
    pc.rescaled(if s > 0.0 { s } else { 1.0 })
}

/// How slicing directions are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DirectionMode {
    /// Independent uniform directions on the sphere.
    Iid,
    /// Blocks of up to d mutually orthogonal directions, each block Haar
    /// distributed and independent of the others.
    OrthogonalBlocks,
}

impl fmt::Display for DirectionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DirectionMode::Iid => "iid",
            DirectionMode::OrthogonalBlocks => "orthogonal",
        })
    }
}

impl FromStr for DirectionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "iid" => Ok(DirectionMode::Iid),
            "orthogonal" | "orthogonal_blocks" | "orthogonal-blocks" => Ok(DirectionMode::OrthogonalBlocks),
            _ => Err(Error::argument(format!("unknown direction mode '{s}' (expected iid or orthogonal)"))),
        }
    }
}

/// P unit vectors in ℝ^d, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    d: usize,
    xi: Vec<f64>,
    pub mode: DirectionMode,
    pub seed: u64,
}

impl DirectionSet {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.xi.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    pub fn direction(&self, p: usize) -> &[f64] {
        &self.xi[p * self.d..(p + 1) * self.d]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.xi.chunks_exact(self.d)
    }
}

/// Draw P directions; the result depends only on (d, P, mode, seed).
pub fn sample_directions(d: Dimension, p: usize, mode: DirectionMode, seed: u64) -> Result<DirectionSet> {
    if p == 0 {
        return Err(Error::argument("need at least one direction"));
    }
    let d = d.get();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xi = Vec::with_capacity(p * d);
    match mode {
        DirectionMode::Iid => {
            for _ in 0..p {
                let mut v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                v.iter_mut().for_each(|x| *x /= norm);
                xi.extend(v);
            }
        }
        DirectionMode::OrthogonalBlocks => {
            let mut remaining = p;
            while remaining > 0 {
                let rows = remaining.min(d);
                let g = DMatrix::<f64>::from_fn(d, d, |_, _| StandardNormal.sample(&mut rng));
                let qr = g.qr();
                let r = qr.r();
                let q = qr.q();
                for col in 0..rows {
                    let sign = if r[(col, col)] < 0.0 { -1.0 } else { 1.0 };
                    xi.extend(q.column(col).iter().map(|v| sign * v));
                }
                remaining -= rows;
            }
        }
    }
    Ok(DirectionSet { d, xi, mode, seed })
}

/// Evaluation strategy for the one-dimensional sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Transform {
    /// Direct non-equispaced sums, O((N + M)K) and exact up to rounding.
    #[default]
    Direct,
    /// Gaussian-gridding NUFFT, O(N + M + K log K).
    Nufft,
}

/// Options of [`sliced_sum`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SumOptions {
    pub transform: Transform,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
}

fn check_projections(values: &[f64], what: &str) -> Result<()> {
    const SLACK: f64 = 1e-12;
    if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(v.abs() <= 1.0 + SLACK)) {
        return Err(Error::domain(format!("{what} {i} = {v} lies outside [-1, 1]; normalise the data first")));
    }
    Ok(())
}

/// t_m = Σ_n f_a(x_n − y_m) w_n for points in [−1, 1].
pub fn fastsum_1d(xp: &[f64], yp: &[f64], w: &[f64], a: &CosineCoefficients) -> Result<Vec<f64>> {
    fastsum_1d_with(xp, yp, w, a, Transform::Direct)
}

/// [`fastsum_1d`] with an explicit transform.
pub fn fastsum_1d_with(
    xp: &[f64],
    yp: &[f64],
    w: &[f64],
    a: &CosineCoefficients,
    transform: Transform,
) -> Result<Vec<f64>> {
    if xp.len() != w.len() {
        return Err(Error::argument(format!("{} source points but {} weights", xp.len(), w.len())));
    }
    check_projections(xp, "source projection")?;
    check_projections(yp, "target projection")?;
    Ok(match transform {
        Transform::Direct => direct_1d(xp, yp, w, a.coefficients()),
        Transform::Nufft => Nufft::new(a.len()).sum(xp, yp, w, a.coefficients()),
    })
}

fn direct_1d(xp: &[f64], yp: &[f64], w: &[f64], a: &[f64]) -> Vec<f64> {
    let k = a.len();
    let mut what = vec![Complex64::new(0.0, 0.0); k];
    for (&x, &wn) in xp.iter().zip(w) {
        let (s, c) = (PI * x).sin_cos();
        let step = Complex64::new(c, s);
        let mut z = Complex64::new(wn, 0.0);
        for wk in what.iter_mut() {
            *wk += z;
            z *= step;
        }
    }
    // c_k ŵ_k e^{−iπky} + c_{−k} ŵ_{−k} e^{iπky} = √2 a_k Re(ŵ_k e^{−iπky}).
    let coef: Vec<Complex64> =
        what.iter().zip(a).enumerate().map(|(i, (wk, ak))| wk * if i == 0 { *ak } else { SQRT_2 * ak }).collect();
    yp.iter()
        .map(|&y| {
            let (s, c) = (PI * y).sin_cos();
            let step = Complex64::new(c, -s);
            let mut z = Complex64::new(1.0, 0.0);
            let mut acc = 0.0;
            for ck in &coef {
                acc += (ck * z).re;
                z *= step;
            }
            acc
        })
        .collect()
}

/// Type-1 and type-2 non-uniform FFTs on the period [−π, π) with a Gaussian
/// window, oversampling R = 2 and 12 grid points on each side.
struct Nufft {
    k: usize,
    grid: usize,
    tau: f64,
    spread: usize,
}

impl Nufft {
    const OVERSAMPLING: usize = 2;
    const SPREAD: usize = 12;

    fn new(k: usize) -> Self {
        let modes = 2 * k.max(8);
        let grid = (Self::OVERSAMPLING * modes).next_power_of_two();
        let r = grid as f64 / modes as f64;
        let tau = PI * Self::SPREAD as f64 / ((modes * modes) as f64 * r * (r - 0.5));
        Nufft { k, grid, tau, spread: Self::SPREAD }
    }

    /// Grid index of the point nearest below θ and the window weights of the
    /// 2·spread neighbours starting at that index minus (spread − 1).
    fn window(&self, theta: f64, weights: &mut [f64]) -> i64 {
        let h = 2.0 * PI / self.grid as f64;
        let base = (theta / h).floor() as i64;
        let first = base - (self.spread as i64 - 1);
        for (i, wi) in weights.iter_mut().enumerate() {
            let dx = (first + i as i64) as f64 * h - theta;
            *wi = (-dx * dx / (4.0 * self.tau)).exp();
        }
        first
    }

    fn sum(&self, xp: &[f64], yp: &[f64], w: &[f64], a: &[f64]) -> Vec<f64> {
        let g = self.grid as i64;
        let mut win = vec![0.0; 2 * self.spread];
        let mut buf = vec![Complex64::new(0.0, 0.0); self.grid];
        for (&x, &wn) in xp.iter().zip(w) {
            let first = self.window(PI * x, &mut win);
            for (i, wi) in win.iter().enumerate() {
                buf[(first + i as i64).rem_euclid(g) as usize].re += wn * wi;
            }
        }
        let mut planner = FftPlanner::new();
        planner.plan_fft_inverse(self.grid).process(&mut buf);
        // ĝ_k = √(τ/π) e^{−k²τ} are the Fourier coefficients of the window.
        let norm = (self.tau / PI).sqrt() * self.grid as f64;
        let mut spec = vec![Complex64::new(0.0, 0.0); self.grid];
        for k in 0..self.k {
            let deconv = (k as f64 * k as f64 * self.tau).exp() / norm;
            let what = buf[k] * deconv;
            let ck = if k == 0 { a[0] } else { a[k] / SQRT_2 };
            // u(x) = Σ_k (C_k / ĝ_k) e^{−ikx} with C_{±k} = c_k ŵ_{±k}.
            spec[k] += what * ck * deconv * self.grid as f64;
            if k > 0 {
                spec[self.grid - k] += what.conj() * ck * deconv * self.grid as f64;
            }
        }
        planner.plan_fft_forward(self.grid).process(&mut spec);
        let inv_grid = 1.0 / self.grid as f64;
        yp.iter()
            .map(|&y| {
                let first = self.window(PI * y, &mut win);
                let acc: f64 =
                    win.iter().enumerate().map(|(i, wi)| spec[(first + i as i64).rem_euclid(g) as usize].re * wi).sum();
                acc * inv_grid
            })
            .collect()
    }
}

fn with_workers<R: Send>(workers: Option<usize>, op: impl FnOnce() -> R + Send) -> Result<R> {
    match workers {
        None => Ok(op()),
        Some(0) => Err(Error::argument("worker count must be positive")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::argument(format!("cannot start {n} workers: {e}")))?;
            Ok(pool.install(op))
        }
    }
}

fn project(data: &[f64], d: usize, xi: &[f64]) -> Vec<f64> {
    data.chunks_exact(d).map(|row| row.iter().zip(xi).map(|(a, b)| a * b).sum()).collect()
}

/// ŝ_m = (1/P) Σ_p Σ_n f_a(⟨x_n − y_m, ξ_p⟩) w_n.
///
/// Slices run in parallel; partial sums are added in slice order so the
/// result does not depend on the number of workers.
pub fn sliced_sum(pc: &PointCloud, a: &CosineCoefficients, dirs: &DirectionSet, opts: &SumOptions) -> Result<Vec<f64>> {
    let d = pc.dim();
    if a.dimension().get() != d || dirs.dim() != d {
        return Err(Error::argument(format!(
            "dimension mismatch: data d = {d}, coefficients d = {}, directions d = {}",
            a.dimension(),
            dirs.dim()
        )));
    }
    if ((a.scale() - pc.scale()) / pc.scale()).abs() > 1e-12 {
        return Err(Error::argument(format!(
            "coefficients were fitted for scale {} but the data has scale {}",
            a.scale(),
            pc.scale()
        )));
    }
    const CHUNK: usize = 64;
    let p = dirs.len();
    let m = pc.n_targets();
    with_workers(opts.workers, || {
        let mut total = vec![0.0; m];
        for start in (0..p).step_by(CHUNK) {
            let end = (start + CHUNK).min(p);
            let partial: Result<Vec<Vec<f64>>> = (start..end)
                .into_par_iter()
                .map(|i| {
                    let xi = dirs.direction(i);
                    let xp = project(&pc.x, d, xi);
                    let yp = project(&pc.y, d, xi);
                    fastsum_1d_with(&xp, &yp, &pc.w, a, opts.transform)
                })
                .collect();
            for slice in partial? {
                total.iter_mut().zip(&slice).for_each(|(t, s)| *t += s);
            }
        }
        let inv = 1.0 / p as f64;
        total.iter_mut().for_each(|t| *t *= inv);
        Ok(total)
    })?
}

/// s_m = Σ_n F(‖x_n − y_m‖) w_n by direct summation.
pub fn brute_force_sum<F>(pc: &PointCloud, f: F, workers: Option<usize>) -> Result<Vec<f64>>
where
    F: Fn(f64) -> f64 + Sync,
{
    let d = pc.dim();
    with_workers(workers, || {
        pc.y.par_chunks_exact(d)
            .map(|y| {
                pc.x.chunks_exact(d)
                    .zip(&pc.w)
                    .map(|(x, wn)| {
                        let r = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                        f(r) * wn
                    })
                    .sum()
            })
            .collect()
    })
}
