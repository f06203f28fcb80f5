//! Tail-first Bernoulli symbol laws and their analytic constants.

mod config;
mod derived;
mod law;
mod params;

pub use config::ModelConfig;
pub use derived::{invert_increasing, DerivedConstants};
pub use law::{SeriesValue, Symbol, SymbolLaw, TABLE_N};
pub use params::{EllKind, ModelParams, XiTag};

use crate::Result;

/// A law together with its derived constants; cheap to clone and share.
#[derive(Debug, Clone)]
pub struct Model {
    pub law: SymbolLaw,
    pub constants: DerivedConstants,
}

pub fn build_model(params: ModelParams) -> Result<Model> {
    let law = SymbolLaw::new(params)?;
    let constants = DerivedConstants::from_law(&law)?;
    Ok(Model { law, constants })
}

impl Model {
    pub fn params(&self) -> &ModelParams {
        self.law.params()
    }

    pub fn p(&self) -> f64 {
        self.law.p()
    }
}
