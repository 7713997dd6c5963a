//! Self-contained Gaussian numerical kernel.
//!
//! Everything the estimators need from numerical analysis lives here:
//! univariate normal CDF/quantile, bivariate normal rectangle probabilities
//! (the hot loop of pairwise correlation estimation), n-dimensional rectangle
//! probabilities by randomized-lattice quasi–Monte Carlo, and small dense
//! linear algebra (Cholesky, Jacobi eigendecomposition). No external
//! special-function or linear-algebra dependencies.

pub mod bvn;
pub mod linalg;
pub mod mvn;
pub mod normal;

pub use bvn::bvn_rectangle_prob;
pub use linalg::Mat;
pub use mvn::{mvn_rectangle_prob, QmcConfig, Rectangle};
pub use normal::{std_normal_cdf, std_normal_pdf, std_normal_quantile};

use crate::error::{Error, Result};

/// Mean vector and symmetric positive-definite covariance of a multivariate
/// normal.
#[derive(Clone, Debug)]
pub struct GaussianParams {
    pub mean: Vec<f64>,
    pub covariance: Mat,
}

impl GaussianParams {
    /// Validates symmetry (within `1e-12` relative to the largest entry) and
    /// positive definiteness before accepting the parameters.
    pub fn new(mean: Vec<f64>, covariance: Mat) -> Result<Self> {
        if covariance.nrows() != mean.len() || covariance.ncols() != mean.len() {
            return Err(Error::ShapeMismatch(format!(
                "mean has length {} but covariance is {}x{}",
                mean.len(),
                covariance.nrows(),
                covariance.ncols()
            )));
        }
        let scale = covariance.max_abs().max(1.0);
        if !covariance.is_symmetric(1e-12 * scale) {
            return Err(Error::InvalidParameter(
                "covariance is not symmetric".into(),
            ));
        }
        covariance.cholesky()?;
        Ok(Self { mean, covariance })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}
