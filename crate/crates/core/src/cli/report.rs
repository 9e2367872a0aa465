use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Subcommand};

use super::{io::write_columns, parse_kernel, MethodArg};
use crate::error::{Error, Result};
use crate::experiments::{
    bench, crossover, forward_curve, gaussian_cloud, method_table, tau_sweep, TableConfig, TABLE_METHODS,
};
use crate::fastsum::SumOptions;
use crate::kernels::{KernelName, KernelSpec};
use crate::recover::{FitConfig, Method};
use crate::specfun::Dimension;

#[derive(Debug, Subcommand)]
pub enum ReportCommand {
    /// Relative slicing error of every method on Gaussian data.
    Table(TableArgs),
    /// Forward error |S_d[f_a] − F| on the 1001-point grid.
    Forward(ForwardArgs),
    /// Forward and slicing error as functions of τ.
    TauSweep(SweepArgs),
    /// Wall time of sliced versus brute-force summation.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long, default_value_t = 100)]
    pub dim: usize,
    #[arg(long = "K", default_value_t = 256)]
    pub k: usize,
    #[arg(long = "J", default_value_t = 1024)]
    pub j: usize,
    #[arg(long = "L", default_value_t = 1024)]
    pub l: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: PathBuf,
}

impl Common {
    fn fit(&self, method: Method) -> FitConfig {
        FitConfig { k: self.k, j: self.j, l: self.l, ..method.config() }
    }

    fn dir(&self) -> Result<&Path> {
        fs::create_dir_all(&self.out)?;
        Ok(&self.out)
    }
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long = "P", default_value_t = 100)]
    pub p: usize,
    #[arg(long = "N", default_value_t = 2000)]
    pub n: usize,
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
}

/// A kernel as `name:c`; `c` defaults to 1.
fn parse_kernel_spec(item: &str) -> std::result::Result<KernelSpec, String> {
    let (name, c) = item.split_once(':').unwrap_or((item, "1"));
    let c: f64 = c.trim().parse().map_err(|_| format!("bad kernel parameter in '{item}'"))?;
    KernelSpec::new(parse_kernel(name.trim())?, c).map_err(|e| e.to_string())
}

#[derive(Debug, Args)]
pub struct ForwardArgs {
    #[command(flatten)]
    pub common: Common,
    /// Kernels as `name:c`, e.g. `laplace:1,bump:0.5`.
    #[arg(long, value_parser = parse_kernel_spec, value_delimiter = ',', default_value = "laplace:1,bump:0.5")]
    pub kernels: Vec<KernelSpec>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_parser = parse_kernel, default_value = "tps")]
    pub kernel: KernelName,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::SL2H1)]
    pub method: MethodArg,
    /// τ values, comma separated (default: 10^-14 … 10^0).
    #[arg(long, value_delimiter = ',')]
    pub taus: Vec<f64>,
    #[arg(long = "P", default_value_t = 100)]
    pub p: usize,
    #[arg(long = "N", default_value_t = 1000)]
    pub n: usize,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long = "P", default_value_t = 50)]
    pub p: usize,
    /// Values of N = M, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [1000, 2000, 4000, 8000, 10000])]
    pub sizes: Vec<usize>,
}

pub fn run(cmd: &ReportCommand, opts: SumOptions) -> Result<()> {
    match cmd {
        ReportCommand::Table(a) => table(a, opts),
        ReportCommand::Forward(a) => forward(a),
        ReportCommand::TauSweep(a) => sweep(a, opts),
        ReportCommand::Bench(a) => run_bench(a, opts),
    }
}

fn table(args: &TableArgs, opts: SumOptions) -> Result<()> {
    let c = &args.common;
    let mut cfg = TableConfig::new(Dimension::new(c.dim)?, args.p, args.n, args.reps, c.seed)?;
    cfg.fit = c.fit(Method::SL2H1);
    cfg.opts = opts;
    let rows = method_table(&cfg)?;
    let path = c.dir()?.join("method_table.csv");
    let mut text = format!(
        "# seed={} d={} P={} N=M={} reps={} mode=orthogonal K={}\nkernel,c,{}\n",
        c.seed,
        c.dim,
        args.p,
        args.n,
        args.reps,
        c.k,
        TABLE_METHODS.map(|m| m.as_str()).join(",")
    );
    for row in &rows {
        let cells: Vec<String> =
            row.errors.iter().map(|e| e.map_or_else(|| "NA".into(), |v| format!("{v:e}"))).collect();
        text.push_str(&format!("{},{},{}\n", row.kernel.name, row.kernel.c, cells.join(",")));
    }
    fs::write(&path, &text)?;
    print!("{text}");
    Ok(())
}

fn forward(args: &ForwardArgs) -> Result<()> {
    let c = &args.common;
    let d = Dimension::new(c.dim)?;
    let dir = c.dir()?;
    for kernel in &args.kernels {
        let mut grid = Vec::new();
        let mut columns = Vec::new();
        let mut names = vec!["s"];
        for method in Method::FITTED {
            let report = forward_curve(kernel, d, method, &c.fit(method))?;
            println!("{} c={} {method}: forward_max = {:e}", kernel.name, kernel.c, report.forward_max);
            grid = report.grid;
            columns.push(report.forward_abs);
            names.push(method.as_str());
        }
        let mut cols: Vec<&[f64]> = vec![&grid];
        cols.extend(columns.iter().map(|v| v.as_slice()));
        let path = dir.join(format!("forward_{}.csv", kernel.name));
        let comment = format!("kernel={} c={} d={} K={} L={} J={}", kernel.name, kernel.c, c.dim, c.k, c.l, c.j);
        write_columns(&path, &[comment], Some(&names), &cols)?;
    }
    Ok(())
}

fn sweep(args: &SweepArgs, opts: SumOptions) -> Result<()> {
    let c = &args.common;
    let method = args
        .method
        .method()
        .filter(|m| *m != Method::Direct)
        .ok_or_else(|| Error::argument("a τ sweep needs a regularised method (s-l2-h1, f-l2-h1 or f-h1-h1)"))?;
    let taus = if args.taus.is_empty() { (0..=14).map(|e| 10f64.powi(e - 14)).collect() } else { args.taus.clone() };
    let kernel = KernelSpec::new(args.kernel, args.c)?;
    let pc = gaussian_cloud(Dimension::new(c.dim)?, args.n, args.n, c.seed)?;
    let points = tau_sweep(&kernel, method, &taus, &pc, args.p, c.seed, &c.fit(method), &opts)?;
    let tau: Vec<f64> = points.iter().map(|p| p.tau).collect();
    let fwd: Vec<f64> = points.iter().map(|p| p.forward_max).collect();
    let rel: Vec<f64> = points.iter().map(|p| p.relative_error).collect();
    let comment = format!(
        "seed={} kernel={} c={} d={} method={method} P={} N=M={} mode=orthogonal",
        c.seed, kernel.name, kernel.c, c.dim, args.p, args.n
    );
    let path = c.dir()?.join(format!("tau_sweep_{}.csv", kernel.name));
    write_columns(&path, &[comment], Some(&["tau", "forward_max", "relative_error"]), &[&tau, &fwd, &rel])?;
    for p in &points {
        println!("tau={:e} forward_max={:e} relative_error={:e}", p.tau, p.forward_max, p.relative_error);
    }
    Ok(())
}

fn run_bench(args: &BenchArgs, opts: SumOptions) -> Result<()> {
    let c = &args.common;
    let points = bench(Dimension::new(c.dim)?, c.k, args.p, &args.sizes, c.seed, &opts)?;
    let n: Vec<f64> = points.iter().map(|b| b.n as f64).collect();
    let fast: Vec<f64> = points.iter().map(|b| b.sliced_secs).collect();
    let brute: Vec<f64> = points.iter().map(|b| b.brute_secs).collect();
    let cross = crossover(&points);
    let comments = [
        format!("seed={} d={} K={} P={} mode=orthogonal", c.seed, c.dim, c.k, args.p),
        format!("crossover={}", cross.map_or_else(|| "none".into(), |n| n.to_string())),
    ];
    write_columns(
        &c.dir()?.join("bench.csv"),
        &comments,
        Some(&["N", "sliced_secs", "brute_secs"]),
        &[&n, &fast, &brute],
    )?;
    for b in &points {
        println!("N={} sliced={:.4}s brute={:.4}s", b.n, b.sliced_secs, b.brute_secs);
    }
    match cross {
        Some(n) => println!("crossover: sliced summation is faster from N = {n}"),
        None => println!("crossover: not reached in the benchmarked range"),
    }
    Ok(())
}
