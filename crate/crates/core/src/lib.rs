//! Upper bounds for `‖Σ α_i A_i‖²`, the squared operator norm of a weighted
//! sum of complex matrices, built from the norms `‖A_i‖` and `‖A_i A_j*‖`.
//!
//! * [`linalg`]: complex matrices, spectral norms, Hermitian eigenvalues.
//! * [`inequality`]: the operator-order inequality and its norm form.
//! * [`bounds`]: the catalog of upper bounds for `‖Σ α_i A_i‖²`.
//! * [`vectors`]: rank-one families built from vectors, evaluated from the
//!   Gram matrix alone.
//! * [`harness`]: seeded instance generation, verification and slack sweeps.
//! * [`io`]: problem files and reports.

pub mod bounds;
pub mod error;
pub mod family;
pub mod harness;
pub mod inequality;
pub mod io;
pub mod linalg;
pub mod vectors;

pub use error::{Error, Result};
pub use family::{NormProfile, OperatorFamily, WeightVector};
pub use linalg::{CVector, ComplexMatrix};
pub use num_complex::Complex64;
