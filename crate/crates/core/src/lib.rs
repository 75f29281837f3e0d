pub mod error;
pub mod estimators;
pub mod harness;
pub mod matcore;
pub mod model;
pub mod perturbation;
pub mod rng;
pub mod separators;
pub mod underdetermined;

pub use error::{Error, Result};
pub use matcore::{CMatrix, C64};
