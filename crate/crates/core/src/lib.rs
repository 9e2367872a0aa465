//! Fast summation of radial kernels in high dimension by Fourier slicing.
//!
//! A radial kernel F(‖x − y‖) on ℝ^d is written as the spherical average
//! of a one-dimensional function f applied to projections,
//! F(‖x‖) = E_ξ f(|⟨ξ, x⟩|). With f expanded in K cosines, a kernel sum
//! over N sources and M targets costs O(P(N + M + K log K)) for P
//! directions instead of O(NMd).
//!
//! The crate is organised by stage:
//!
//! - [`specfun`], [`quadrature`]: densities, the principal function η_d,
//!   monomial eigenvalues and Gauss–Legendre rules.
//! - [`sliceop`]: the slicing operator S_d on cosine series, the display
//!   matrix and the slicing variance.
//! - [`ridge`], [`recover`]: regularised fits of f from F in the spatial or
//!   frequency domain, the closed-form odd-d inverse, and catalog preimages.
//! - [`kernels`]: the kernel catalog.
//! - [`fastsum`]: point clouds, slicing directions, one-dimensional fast
//!   sums (direct or NUFFT) and the brute-force oracle.
//! - [`metrics`]: forward error, the mean-square-error decomposition and
//!   relative errors.
//! - [`experiments`], [`cli`]: reproducible experiment drivers and the
//!   `slicesum` command-line tool.
//!
//! ```
//! use slicesum::kernels::{KernelName, KernelSpec};
//! use slicesum::metrics::{default_grid, forward_error};
//! use slicesum::quadrature::cached_rule;
//! use slicesum::recover::{fit_kernel, FitConfig, Method};
//! use slicesum::specfun::Dimension;
//!
//! let gauss = KernelSpec::new(KernelName::Gauss, 1.0)?;
//! let cfg = FitConfig { k: 32, l: 128, ..Method::SL2H1.config() };
//! let a = fit_kernel(&gauss, Dimension::new(10)?, Method::SL2H1, &cfg)?;
//! let report = forward_error(&a, |s| gauss.eval_f(s).unwrap(), &default_grid(), &cached_rule(256))?;
//! assert!(report.forward_max < 1e-6);
//! # Ok::<(), slicesum::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
mod dd;
pub mod derivatives;
pub mod error;
pub mod experiments;
pub mod fastsum;
pub mod kernels;
pub mod metrics;
pub mod quadrature;
pub mod recover;
pub mod ridge;
pub mod sliceop;
pub mod specfun;

pub use error::{Error, Result};
pub use fastsum::{sliced_sum, PointCloud};
pub use kernels::{KernelName, KernelSpec};
pub use recover::{fit_kernel, FitConfig, Method};
pub use sliceop::CosineCoefficients;
pub use specfun::Dimension;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/slicing.md")]
    mod slicing {}
    #[doc = include_str!("../../../book/src/fitting.md")]
    mod fitting {}
    #[doc = include_str!("../../../book/src/summation.md")]
    mod summation {}
    #[doc = include_str!("../../../book/src/errors.md")]
    mod errors {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
