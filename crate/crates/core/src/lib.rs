pub mod error;
pub mod model;
pub mod quad;
pub mod renewal;
pub mod simulate;
pub mod spectral;
pub mod special;
pub mod stats;

pub use error::{Error, Result};
