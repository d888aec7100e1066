//! Fundamental solution matrices and Floquet multipliers of linear
//! time-periodic systems `ẏ = J(t)y` via truncated Hill-matrix exponentials,
//! with explicit truncation-error bounds and certified stability verdicts.

pub mod bounds;
pub mod error;
pub mod floquet;
pub mod fourier;
pub mod hbm;
pub mod hill;
pub mod numerics;
pub mod projection;
pub mod series;

pub use bounds::{ErrorCertificate, Formulation};
pub use error::{HillError, Result};
pub use floquet::{StabilityStatus, StabilityVerdict};
pub use fourier::{DecayEnvelope, FourierMatrixSeries};
pub use hill::{HillOperators, SubharmonicOperators};
pub use num_complex::Complex64;
pub use numerics::ComplexMatrix;
pub use projection::{ApproxKind, FundamentalApprox};
