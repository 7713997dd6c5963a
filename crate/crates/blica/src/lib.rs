//! Independent component analysis for binary data.
//!
//! The generative model: independent Gaussian sources whose means and
//! variances change across observation segments are mixed by a stationary
//! matrix `A`, and each mixed coordinate is binarized through a probit link
//! `P(x_i = 1) = Φ(√(π/8)·y_i)`. Because the link is a Gaussian CDF, the
//! likelihood of any binary assignment is an exact multivariate normal
//! rectangle probability, which makes both exact evaluation and estimation
//! tractable.
//!
//! The crate provides:
//!
//! * [`model`] — the generative model: sampling, exact joint and pairwise
//!   distributions, the scaling/row-order equivalence constructions, and the
//!   statistics-minus-unknowns identifiability count;
//! * [`blica`] — the BLICA estimator: per-segment tetrachoric-style
//!   correlation recovery from pairwise binary marginals followed by
//!   moment matching with a scaled Gaussian likelihood;
//! * [`fullmle`] — a direct maximum-likelihood baseline over all `2^n`
//!   assignments, practical only for small `n`;
//! * [`eval`] — mean cosine similarity between mixing matrices under optimal
//!   column assignment;
//! * [`gauss`] — the self-contained numerical kernel (normal CDF/quantile,
//!   bivariate rectangle probabilities, quasi–Monte Carlo rectangle
//!   probabilities in higher dimensions, dense Cholesky and Jacobi
//!   eigendecomposition);
//! * [`optim`] — limited-memory BFGS with a strong-Wolfe line search and a
//!   bounded scalar minimizer;
//! * [`io`] and [`sweep`] — file formats and the experiment harness behind
//!   the `blica` command-line tool.
//!
//! See the crate `examples/` directory for a runnable tour of each
//! capability.

pub mod blica;
pub mod error;
pub mod eval;
pub mod fullmle;
pub mod gauss;
pub mod io;
pub mod model;
pub mod optim;
pub mod sweep;

pub use error::{Error, Result};
pub use gauss::linalg::Mat;

use std::sync::OnceLock;

/// Shared worker pool for parallel stages (pairwise correlation estimation,
/// per-assignment likelihood terms, sweep cells).
///
/// The pool size is capped by the `BLICA_THREADS` environment variable when
/// set to a positive integer; otherwise rayon's default (one worker per
/// logical CPU) is used. The variable is read once, on first use.
pub fn worker_pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(k) = std::env::var("BLICA_THREADS")
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
            .filter(|&k| k > 0)
        {
            builder = builder.num_threads(k);
        }
        builder.build().expect("failed to build worker pool")
    })
}

/// Splits a seed into a stream of decorrelated sub-seeds (splitmix64 step).
pub(crate) fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(stream.wrapping_mul(0xbf58_476d_1ce4_e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
