use std::path::Path;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use sigmafrac::{Convention, QuadConfig};

use crate::CliError;

pub const QUAD_TOL_ENV: &str = "SIGMAFRAC_QUAD_TOL";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConventionArg {
    #[value(alias = "full-mass")]
    Full,
    #[value(alias = "paper-half-mass")]
    Paper,
}

impl From<ConventionArg> for Convention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Full => Convention::FullMass,
            ConventionArg::Paper => Convention::PaperHalfMass,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadFile {
    abs_tol: Option<f64>,
    rel_tol: Option<f64>,
    max_subdivisions: Option<usize>,
}

/// Contents of the `--config` TOML file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub convention: Option<ConventionArg>,
    #[serde(default)]
    quad: QuadFile,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}

/// Effective run settings. Precedence: command-line flag, then the
/// environment, then the config file, then built-in defaults.
#[derive(Debug, Clone, Copy)]
pub struct Settings {
    pub quad: QuadConfig,
    pub seed: u64,
    pub convention: ConventionArg,
}

impl Settings {
    pub fn resolve(
        file: &FileConfig,
        env_tol: Option<&str>,
        flag_tol: Option<f64>,
    ) -> Result<Self, CliError> {
        let mut quad = QuadConfig::default();
        if let Some(v) = file.quad.abs_tol {
            quad.abs_tol = v;
        }
        if let Some(v) = file.quad.rel_tol {
            quad.rel_tol = v;
        }
        if let Some(v) = file.quad.max_subdivisions {
            quad.max_subdivisions = v;
        }
        if let Some(raw) = env_tol {
            let tol: f64 = raw.trim().parse().map_err(|_| {
                CliError::Usage(format!("{QUAD_TOL_ENV} must be a number, got {raw:?}"))
            })?;
            quad.abs_tol = tol;
            quad.rel_tol = tol;
        }
        if let Some(tol) = flag_tol {
            quad.abs_tol = tol;
            quad.rel_tol = tol;
        }
        quad.validate()?;
        Ok(Self {
            quad,
            seed: file.seed.unwrap_or(0),
            convention: file.convention.unwrap_or(ConventionArg::Full),
        })
    }

    pub fn convention(&self, flag: Option<ConventionArg>) -> Convention {
        flag.unwrap_or(self.convention).into()
    }
}
