//! Deterministic numeric kernel used by the diagnostics.

mod eigen;
mod kde;
mod lowess;
mod normal;
mod ols;
mod prng;
pub mod stats;

pub use eigen::{jacobi_eigen, sym_eigen_2pc, EigenPair};
pub use kde::{kde_gaussian, kde_with_bandwidth, linspace, silverman_bandwidth};
pub use lowess::{lowess, DEFAULT_SPAN};
pub use normal::{normal_quantile, normal_sample};
pub use ols::{ols_fit, ols_fit_named, LinearModelFit};
pub use prng::Prng;

/// Dense column-major design matrix.
pub type Matrix = nalgebra::DMatrix<f64>;
pub use stats::{ecdf, Ecdf};
