//! The `slicesum` command-line tool.
//!
//! ```text
//! slicesum fit    --kernel gauss --c 1 --dim 100 --method s-l2-h1 --out g.json
//! slicesum sum    --coeff g.json --x x.csv --y y.csv --w w.csv --P 100 --out s.csv [--oracle]
//! slicesum report table|forward|tau-sweep|bench --out DIR
//! ```
//!
//! Exit codes: 0 success, 2 argument error, 3 input-data error, 4 numerical
//! failure.

pub mod io;
mod report;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::fastsum::{
    brute_force_sum, sample_directions, sliced_sum, DirectionMode, PointCloud, SumOptions, Transform,
};
use crate::kernels::{KernelName, KernelSpec};
use crate::metrics::{default_grid, forward_error, relative_l2};
use crate::quadrature::cached_rule;
use crate::recover::{analytic_coefficients, fit_kernel, FitConfig, Method};
use crate::specfun::Dimension;

pub use report::ReportCommand;

#[derive(Debug, Parser)]
#[command(name = "slicesum", version, about = "Fast radial kernel summation by Fourier slicing")]
pub struct Cli {
    /// Worker threads for summation (default: all cores).
    #[arg(long, global = true, env = "SLICESUM_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Recover slicing coefficients for a catalog kernel.
    Fit(FitArgs),
    /// Evaluate kernel sums with a coefficient file.
    Sum(SumArgs),
    /// Reproduce error tables, forward-error curves, τ sweeps and timings.
    #[command(subcommand)]
    Report(ReportCommand),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    #[value(name = "s-l2-h1")]
    SL2H1,
    #[value(name = "f-l2-h1")]
    FL2H1,
    #[value(name = "f-h1-h1")]
    FH1H1,
    Direct,
    /// Closed-form inverse from derivatives of F (odd d ≤ 11).
    Analytic,
}

impl MethodArg {
    fn method(self) -> Option<Method> {
        match self {
            MethodArg::SL2H1 => Some(Method::SL2H1),
            MethodArg::FL2H1 => Some(Method::FL2H1),
            MethodArg::FH1H1 => Some(Method::FH1H1),
            MethodArg::Direct => Some(Method::Direct),
            MethodArg::Analytic => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Iid,
    Orthogonal,
}

impl From<ModeArg> for DirectionMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Iid => DirectionMode::Iid,
            ModeArg::Orthogonal => DirectionMode::OrthogonalBlocks,
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long, value_parser = parse_kernel)]
    pub kernel: KernelName,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long)]
    pub dim: usize,
    #[arg(long, value_enum)]
    pub method: MethodArg,
    /// Regularisation weight (default depends on the method).
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long = "K", default_value_t = 256)]
    pub k: usize,
    #[arg(long = "J", default_value_t = 1024)]
    pub j: usize,
    #[arg(long = "L", default_value_t = 1024)]
    pub l: usize,
    /// Factor by which `sum` divides the data; must be at least
    /// max‖x‖ + max‖y‖ of the data to be summed.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SumArgs {
    #[arg(long)]
    pub coeff: PathBuf,
    #[arg(long)]
    pub x: PathBuf,
    #[arg(long)]
    pub y: PathBuf,
    #[arg(long)]
    pub w: PathBuf,
    #[arg(long = "P")]
    pub p: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Orthogonal)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Use the NUFFT for the one-dimensional sums.
    #[arg(long)]
    pub accelerated: bool,
    /// Also compute the brute-force sums and the relative L² error.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_kernel(s: &str) -> std::result::Result<KernelName, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Argument(_) | Error::Domain(_) | Error::Unsupported(_) => 2,
        Error::Input(_) | Error::Io(_) | Error::Format(_) => 3,
        Error::Numerical(_) => 4,
    }
}

/// Parse `args` and run; prints errors to stderr.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("slicesum: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let opts = SumOptions { transform: Transform::Direct, workers: cli.threads };
    match &cli.command {
        Command::Fit(args) => cmd_fit(args),
        Command::Sum(args) => cmd_sum(args, opts),
        Command::Report(cmd) => report::run(cmd, opts),
    }
}

pub fn cmd_fit(args: &FitArgs) -> Result<()> {
    let d = Dimension::new(args.dim)?;
    let kernel = KernelSpec::new(args.kernel, args.c)?.dilated(args.scale)?;
    let base = args.method.method().unwrap_or(Method::SL2H1).config();
    let cfg = FitConfig { k: args.k, j: args.j, l: args.l, tau: args.tau.unwrap_or(base.tau), ..base };
    let a = match args.method.method() {
        Some(method) => fit_kernel(&kernel, d, method, &cfg)?,
        None => {
            let mut a = analytic_coefficients(&kernel, d, cfg.k)?;
            a.info.kernel = Some(kernel.label());
            a.info.scale = kernel.scale;
            a
        }
    };
    let mut grid = default_grid();
    if kernel.name == KernelName::Log {
        grid.remove(0);
    }
    let report = forward_error(&a, |s| kernel.eval_f(s).unwrap_or(f64::NAN), &grid, &cached_rule(2 * cfg.l))?;
    println!("forward_max = {:e}", report.forward_max);
    if let Some(out) = &args.out {
        io::write_coefficients(out, &a)?;
    }
    Ok(())
}

/// Load data, rescaled to the coefficient file's scale.
fn load_cloud(args: &SumArgs, file: &io::CoefficientFile) -> Result<PointCloud> {
    let (dx, x) = io::read_matrix(&args.x, None)?;
    if dx != file.d {
        return Err(Error::input(format!(
            "{}: points have {dx} coordinates but the coefficients are for d = {}",
            args.x.display(),
            file.d
        )));
    }
    let (_, y) = io::read_matrix(&args.y, Some(file.d))?;
    let (_, w) = io::read_matrix(&args.w, Some(1))?;
    let pc = PointCloud::new(file.d, x, y, w)?;
    let radius =
        |pts: &[f64]| pts.chunks_exact(file.d).map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt()).fold(0.0, f64::max);
    let needed = radius(pc.sources()) + radius(pc.targets());
    if needed > file.scale * (1.0 + 1e-12) {
        return Err(Error::input(format!(
            "data need scale ≥ {needed} (max‖x‖ + max‖y‖) but the coefficients were fitted with scale {}; refit with --scale",
            file.scale
        )));
    }
    pc.rescaled(file.scale)
}

pub fn cmd_sum(args: &SumArgs, mut opts: SumOptions) -> Result<()> {
    let file = io::read_coefficients(&args.coeff)?;
    let a = file.to_coefficients()?;
    let pc = load_cloud(args, &file)?;
    let mode = DirectionMode::from(args.mode);
    let dirs = sample_directions(a.dimension(), args.p, mode, args.seed)?;
    if args.accelerated {
        opts.transform = Transform::Nufft;
    }
    let approx = sliced_sum(&pc, &a, &dirs, &opts)?;
    let mut comments = vec![format!(
        "seed={} P={} mode={mode} method={} K={} transform={}",
        args.seed,
        args.p,
        file.method,
        file.k,
        if args.accelerated { "nufft" } else { "direct" }
    )];
    if !args.oracle {
        return io::write_columns(&args.out, &comments, None, &[&approx]);
    }
    let kernel = file
        .kernel_spec()?
        .ok_or_else(|| {
            Error::Unsupported("--oracle needs a catalog kernel; the coefficient file is for a custom target".into())
        })?
        .dilated(file.scale)?;
    let exact = brute_force_sum(&pc, |r| kernel.profile(kernel.scale * r), opts.workers)?;
    let err = relative_l2(&exact, &approx)?;
    println!("relative_l2 = {err:e}");
    comments.push(format!("relative_l2={err:e}"));
    io::write_columns(&args.out, &comments, None, &[&approx, &exact])
}
