//! The flat JSON form `{p, xi_tag, ell_kind, kappa}` of a model.

use serde::{Deserialize, Serialize};

use super::params::{EllKind, ModelParams, XiTag};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub p: f64,
    #[serde(default = "default_xi")]
    pub xi_tag: String,
    #[serde(default = "default_ell")]
    pub ell_kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
}

fn default_xi() -> String {
    XiTag::default().as_str().to_string()
}

fn default_ell() -> String {
    "constant".to_string()
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig::from(ModelParams::default())
    }
}

impl From<ModelParams> for ModelConfig {
    fn from(p: ModelParams) -> Self {
        let (ell_kind, kappa) = match p.ell {
            EllKind::Constant => ("constant", None),
            EllKind::LogPower { kappa } => ("log-power", Some(kappa)),
        };
        ModelConfig {
            p: p.p,
            xi_tag: p.xi.as_str().to_string(),
            ell_kind: ell_kind.to_string(),
            kappa,
        }
    }
}

impl ModelConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("model config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model config serialises")
    }

    /// Validated parameters.
    pub fn params(&self) -> Result<ModelParams> {
        let xi = XiTag::parse(&self.xi_tag)?;
        let ell = match (self.ell_kind.as_str(), self.kappa) {
            ("constant", None) => EllKind::Constant,
            ("constant", Some(k)) if k == 0.0 => EllKind::Constant,
            ("constant", Some(k)) => {
                return Err(Error::Config(format!("ell_kind constant takes no kappa (got {k})")));
            }
            ("log-power", Some(kappa)) => EllKind::LogPower { kappa },
            ("log-power", None) => return Err(Error::Config("ell_kind log-power needs kappa".into())),
            (other, _) => {
                return Err(Error::Config(format!("unknown ell_kind {other:?} (expected constant or log-power)")));
            }
        };
        let params = ModelParams { p: self.p, xi, ell };
        params.validate()?;
        Ok(params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_defaults() {
        let c = ModelConfig::from_json(r#"{"p": 1.5}"#).unwrap();
        assert_eq!(c.params().unwrap(), ModelParams::new(1.5));
        let c = ModelConfig::from_json(r#"{"p": 2, "xi_tag": "integer-roof", "ell_kind": "log-power", "kappa": 0.5}"#).unwrap();
        let p = c.params().unwrap();
        assert_eq!(p.xi, XiTag::IntegerRoof);
        assert_eq!(p.ell, EllKind::LogPower { kappa: 0.5 });
        assert_eq!(ModelConfig::from_json(&ModelConfig::from(p).to_json()).unwrap(), c);
    }

    #[test]
    fn rejects() {
        for bad in [
            r#"{"p": 0.9}"#,
            r#"{"p": 1.5, "xi_tag": "pi"}"#,
            r#"{"p": 1.5, "ell_kind": "log-power"}"#,
            r#"{"p": 1.5, "kappa": 1.0}"#,
            r#"{"p": 1.5, "extra": 1}"#,
            r#"{"xi_tag": "integer-roof"}"#,
        ] {
            let r = ModelConfig::from_json(bad).and_then(|c| c.params());
            assert!(r.is_err(), "{bad}");
        }
    }
}
