//! Exact finite-size distributions of the spectral radius of the complex
//! Ginibre ensemble, and their distance to the Gumbel law.
//!
//! The squared spectral radius `R_n²` of an `n × n` complex Ginibre matrix has
//! the same law as `Y_(n) = max(Y_1, …, Y_n)` with independent `Y_k ~ Gamma(k, 1)`.
//! That turns every question about `R_n` into a product of regularized
//! incomplete gamma functions, which this crate evaluates in the log domain with
//! certified truncation:
//!
//! * [`special_fn`]: incomplete gamma (both tails, large shapes), normal and
//!   Gumbel functions.
//! * [`scaling`]: the `n`-dependent centring and scaling constants.
//! * [`exact_cdf`]: exact distribution functions of the two standard scalings.
//! * [`asymptotics`]: closed-form tail and rate approximations.
//! * [`metrics`]: Wasserstein-1 and Kolmogorov distances with certified tails.
//! * [`montecarlo`] and [`ginibre`]: sampling, both via the max-of-Gamma
//!   representation and by direct eigenvalue computation.
//! * [`convergence`]: ladders over `n` and CSV/JSON reporting.
//! * [`selftest`]: closed forms checked against quadrature and summation.
//!
//! ```
//! use ginibre_gumbel::{exact_cdf, scaling::{self, Scaling}};
//!
//! let c = scaling::make_constants(10_000)?;
//! let f0 = exact_cdf::cdf(&c, Scaling::Wn, 0.0, 1e-10)?;
//! assert!(f0 > 0.1 && f0 < 0.3);
//! # Ok::<(), ginibre_gumbel::Error>(())
//! ```

pub mod asymptotics;
pub mod convergence;
mod error;
pub mod exact_cdf;
pub mod ginibre;
pub mod metrics;
pub mod montecarlo;
pub mod quadrature;
pub mod scaling;
mod search;
pub mod selftest;
pub mod special_fn;
mod util;

pub use error::{Error, Result};


#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/incomplete-gamma.md")]
    mod incomplete_gamma {}
    #[doc = include_str!("../../../book/src/scalings.md")]
    mod scalings {}
    #[doc = include_str!("../../../book/src/exact-cdf.md")]
    mod exact_cdf {}
    #[doc = include_str!("../../../book/src/asymptotics.md")]
    mod asymptotics {}
    #[doc = include_str!("../../../book/src/distances.md")]
    mod distances {}
    #[doc = include_str!("../../../book/src/sampling.md")]
    mod sampling {}
    #[doc = include_str!("../../../book/src/convergence.md")]
    mod convergence {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
