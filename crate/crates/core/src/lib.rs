pub mod diagnose;
pub mod error;
pub mod estimate;
pub mod experiment;
pub mod f2linalg;
pub mod integrands;
pub mod kindex;
pub mod netgen;
pub mod numeric;
pub mod streams;
pub mod walsh;

pub use error::{Error, Result};
