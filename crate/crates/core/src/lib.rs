//! Stability analysis for fractional-order (Caputo, 0 < α < 1) systems
//! D^α x = A x + f(x).

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod bounds;
pub mod error;
pub mod fodeint;
pub mod linalg;
pub mod mittleff;
pub mod models;
pub mod perron;
pub mod quad;
pub mod report;
pub mod simulate;
pub mod special;
pub mod spectra;
pub mod trajectory;

pub use error::{Error, MlRegion, Result};
pub use num_complex::Complex64;
