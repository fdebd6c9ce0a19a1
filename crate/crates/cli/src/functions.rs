use std::fs::File;
use std::path::Path;

use sigmafrac::GridFunction;

use crate::CliError;

/// Half-width of the rounded corner in `abs-smooth`.
const ABS_SMOOTH_DELTA: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedFn {
    Constant,
    Linear,
    QuadraticShift,
    Sin,
    Exp,
    AbsSmooth,
}

impl NamedFn {
    pub const NAMES: [&'static str; 6] = [
        "constant",
        "linear",
        "quadratic-shift",
        "sin",
        "exp",
        "abs-smooth",
    ];

    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "constant" => Self::Constant,
            "linear" => Self::Linear,
            "quadratic-shift" => Self::QuadraticShift,
            "sin" => Self::Sin,
            "exp" => Self::Exp,
            "abs-smooth" => Self::AbsSmooth,
            _ => return None,
        })
    }

    pub fn value(self, t: f64) -> f64 {
        match self {
            Self::Constant => 1.0,
            Self::Linear => t,
            Self::QuadraticShift => (t - 2.0) * (t - 2.0),
            Self::Sin => t.sin(),
            Self::Exp => t.exp(),
            Self::AbsSmooth => t.hypot(ABS_SMOOTH_DELTA),
        }
    }

    pub fn derivative(self, t: f64) -> f64 {
        match self {
            Self::Constant => 0.0,
            Self::Linear => 1.0,
            Self::QuadraticShift => 2.0 * (t - 2.0),
            Self::Sin => t.cos(),
            Self::Exp => t.exp(),
            Self::AbsSmooth => t / t.hypot(ABS_SMOOTH_DELTA),
        }
    }
}

/// A `--f` argument: a named function or a CSV grid.
pub enum Input {
    Named(NamedFn),
    Sampled(GridFunction),
}

impl Input {
    pub fn parse(arg: &str) -> Result<Self, CliError> {
        if let Some(f) = NamedFn::parse(arg) {
            return Ok(Self::Named(f));
        }
        let path = Path::new(arg);
        if !path.is_file() {
            return Err(CliError::Usage(format!(
                "--f must be one of {} or a CSV file, got {arg:?}",
                NamedFn::NAMES.join(", ")
            )));
        }
        let file = File::open(path).map_err(|e| CliError::Usage(format!("{arg}: {e}")))?;
        Ok(Self::Sampled(GridFunction::read_csv(file)?))
    }

    pub fn named(arg: &str, flag: &str) -> Result<NamedFn, CliError> {
        NamedFn::parse(arg).ok_or_else(|| {
            CliError::Usage(format!(
                "{flag} must be one of {}, got {arg:?}",
                NamedFn::NAMES.join(", ")
            ))
        })
    }
}
