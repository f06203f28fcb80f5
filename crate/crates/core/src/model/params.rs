use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Named roof offsets. Only named constants are accepted so that a roof
/// offset can never be a rational float by accident.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum XiTag {
    #[default]
    Sqrt2Minus1,
    GoldenConjugate,
    /// ξ = 0: integer-valued roof. Violates joint aperiodicity; kept as a
    /// negative control.
    IntegerRoof,
}

impl XiTag {
    pub fn value(self) -> f64 {
        match self {
            XiTag::Sqrt2Minus1 => std::f64::consts::SQRT_2 - 1.0,
            XiTag::GoldenConjugate => (5f64.sqrt() - 1.0) / 2.0,
            XiTag::IntegerRoof => 0.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            XiTag::Sqrt2Minus1 => "sqrt2-minus-1",
            XiTag::GoldenConjugate => "golden-conjugate",
            XiTag::IntegerRoof => "integer-roof",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "sqrt2-minus-1" => Ok(XiTag::Sqrt2Minus1),
            "golden-conjugate" => Ok(XiTag::GoldenConjugate),
            "integer-roof" => Ok(XiTag::IntegerRoof),
            other => Err(Error::Config(format!(
                "unknown xi tag {other:?} (expected sqrt2-minus-1, golden-conjugate or integer-roof)"
            ))),
        }
    }
}

/// Slowly varying factor in `T(n) = ℓ-shape · n^-p`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EllKind {
    #[default]
    Constant,
    /// `T(n) = n^-p (1 + ln n)^kappa`.
    LogPower { kappa: f64 },
}

impl EllKind {
    pub fn kappa(self) -> f64 {
        match self {
            EllKind::Constant => 0.0,
            EllKind::LogPower { kappa } => kappa,
        }
    }

    pub fn is_constant(self) -> bool {
        matches!(self, EllKind::Constant) || self.kappa() == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub p: f64,
    pub xi: XiTag,
    pub ell: EllKind,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            p: 1.5,
            xi: XiTag::default(),
            ell: EllKind::default(),
        }
    }
}

impl ModelParams {
    pub fn new(p: f64) -> Self {
        ModelParams {
            p,
            ..Default::default()
        }
    }

    pub fn with_xi(mut self, xi: XiTag) -> Self {
        self.xi = xi;
        self
    }

    pub fn with_ell(mut self, ell: EllKind) -> Self {
        self.ell = ell;
        self
    }

    pub fn xi_value(&self) -> f64 {
        self.xi.value()
    }

    /// Error exponent of the tail approximation; always `p + 1`.
    pub fn gamma(&self) -> f64 {
        self.p + 1.0
    }

    pub fn beta(&self) -> f64 {
        1.0 - 1.0 / self.p
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0 && self.p <= 2.0) {
            return Err(Error::InvalidParams(format!("p = {} is outside (1, 2]", self.p)));
        }
        let kappa = self.ell.kappa();
        if !kappa.is_finite() {
            return Err(Error::InvalidParams(format!("kappa = {kappa} is not finite")));
        }
        Ok(())
    }
}
