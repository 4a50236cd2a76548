//! Plain `key=value` config files for the CLI.
//!
//! Recognized keys: `lambda`, `kappa`, `photon_flux`, `mu`, `delta`.
//! `#` starts a comment; blank lines are ignored. Unset keys fall back to the
//! nominal experimental values (and `mu = delta = 0`).

use std::path::Path;

use crate::model::{nominal, SystemParams, UncertaintyModel};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub params: SystemParams,
    pub uncertainty: UncertaintyModel,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: nominal::params(),
            uncertainty: UncertaintyModel::NONE,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_str_contents(&text)
    }

    pub fn from_str_contents(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut photon_flux: Option<f64> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::ConfigParse {
                line: line_no,
                message: format!("expected key=value, got {line:?}"),
            })?;
            let value: f64 = value.trim().parse().map_err(|_| Error::ConfigParse {
                line: line_no,
                message: format!("invalid number {:?}", value.trim()),
            })?;
            match key.trim() {
                "lambda" => cfg.params.lambda = value,
                "kappa" => cfg.params.kappa = value,
                "photon_flux" => photon_flux = Some(value),
                "mu" => cfg.uncertainty.mu = value,
                "delta" => cfg.uncertainty.delta = value,
                other => {
                    return Err(Error::ConfigParse {
                        line: line_no,
                        message: format!("unknown key {other:?}"),
                    })
                }
            }
        }
        if let Some(n) = photon_flux {
            if n <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "photon_flux must be positive, got {n}"
                )));
            }
            cfg.params.alpha_mag = n.sqrt();
        }
        cfg.params = cfg.params.validate()?;
        cfg.uncertainty = UncertaintyModel::new(cfg.uncertainty.mu, cfg.uncertainty.delta)?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_nominal() {
        let cfg = RunConfig::from_str_contents("").unwrap();
        assert_eq!(cfg.params, nominal::params());
        assert_eq!(cfg.uncertainty, UncertaintyModel::NONE);
    }

    #[test]
    fn parses_keys_and_comments() {
        let cfg = RunConfig::from_str_contents(
            "# a comment\nlambda = 100.0\nphoton_flux = 4.0  # inline\nmu=0.5\n",
        )
        .unwrap();
        assert_eq!(cfg.params.lambda, 100.0);
        assert_eq!(cfg.params.alpha_mag, 2.0);
        assert_eq!(cfg.uncertainty.mu, 0.5);
    }

    #[test]
    fn reports_line_numbers() {
        let err = RunConfig::from_str_contents("lambda = 1\nbogus line\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let err = RunConfig::from_str_contents("\n\nlambda = xyz\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        let err = RunConfig::from_str_contents("unknown_key = 1\n").unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(RunConfig::from_str_contents("kappa = -1\n").is_err());
        assert!(RunConfig::from_str_contents("mu = 1.0\n").is_err());
        assert!(RunConfig::from_str_contents("delta = 2\n").is_err());
    }
}
