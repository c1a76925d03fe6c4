//! Dual-band Toeplitz operators on model spaces of finite Blaschke products.

pub mod error;
pub mod expr;
pub mod grid;
pub mod hankel;
pub mod linalg;
pub mod matrix;
pub mod model_space;
pub mod dualband;
pub mod extension;
pub mod factorization;
pub mod matsym;
pub mod poly;
pub mod runner;
pub mod scenario;
pub mod spectra;
pub mod symbol;
pub mod tolerance;

pub use error::{Error, Result};
pub use grid::{Coeffs, C64};
pub use symbol::{InnerFunction, LaurentSymbol};
pub use tolerance::Tolerances;
