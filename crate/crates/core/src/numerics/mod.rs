//! Dense complex linear algebra used throughout the crate.
//!
//! Everything here is self-contained apart from the GEMM kernel. All norms
//! are spectral (2-)norms unless a function name says otherwise.

mod eigen;
mod expm;
mod lu;
mod matrix;
mod svd;

pub use eigen::eigenvalues;
pub use expm::mat_exp;
pub use lu::{det, solve, Lu};
pub use matrix::ComplexMatrix;
pub use svd::{min_singular_value, singular_values};
