//! Sigmoidal smoothing of the ℓ1 penalty.
//!
//! Applying the sigmoidal derivative to |s| on (a, x) with a > 0 gives
//! λ·C₁(α)·(1−α)·tanh((x−a)/(1−α)), a smooth ramp in place of λ·sgn(x).

use serde::Serialize;

use crate::error::{FracError, Result};
use crate::kernels::{c1_constant, ln_cosh, Convention, FractionalOrder};

pub const DEFAULT_L1_A: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct L1Config {
    lambda: f64,
    a: f64,
    order: FractionalOrder,
}

impl L1Config {
    pub fn new(lambda: f64, a: f64, order: FractionalOrder) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(FracError::InvalidConfig(format!(
                "lambda must be nonnegative, got {lambda}"
            )));
        }
        if !(a > 0.0 && a.is_finite()) {
            return Err(FracError::InvalidConfig(format!(
                "l1 lower limit a must be positive, got {a}"
            )));
        }
        Ok(Self { lambda, a, order })
    }

    pub fn with_default_a(lambda: f64, order: FractionalOrder) -> Result<Self> {
        Self::new(lambda, DEFAULT_L1_A, order)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn order(&self) -> FractionalOrder {
        self.order
    }

    /// λ·C₁(α)·(1−α), the magnitude the ramp saturates at.
    pub fn saturation(&self) -> f64 {
        let half = match self.order.convention() {
            Convention::FullMass => 1.0,
            Convention::PaperHalfMass => 0.5,
        };
        if self.order.is_classical() {
            return self.lambda * half;
        }
        // C₁(α)(1−α) is 1 or ½ by construction; computed to keep the definition visible.
        let w = 1.0 - self.order.alpha();
        self.lambda * c1_constant(self.order).map(|c| c * w).unwrap_or(half)
    }
}

/// λ·C₁(α)·(1−α)·tanh((x−a)/(1−α)); at α = 1 the saturated sign λ·C₁(1−α)·sgn(x−a).
pub fn smoothed_abs_grad(x: f64, c: &L1Config) -> f64 {
    let sat = c.saturation();
    if c.order.is_classical() {
        return if x > c.a {
            sat
        } else if x < c.a {
            -sat
        } else {
            0.0
        };
    }
    let w = 1.0 - c.order.alpha();
    sat * ((x - c.a) / w).tanh()
}

/// λ·C₁(α)·(1−α)²·ln cosh((x−a)/(1−α)), whose derivative is `smoothed_abs_grad`.
pub fn smoothed_abs(x: f64, c: &L1Config) -> f64 {
    let sat = c.saturation();
    if c.order.is_classical() {
        return sat * (x - c.a).abs();
    }
    let w = 1.0 - c.order.alpha();
    sat * w * ln_cosh((x - c.a) / w)
}

/// base(x) + λ·Σ|x_k|.
pub fn l1_objective(base: impl Fn(&[f64]) -> f64, x: &[f64], lambda: f64) -> f64 {
    base(x) + lambda * x.iter().map(|v| v.abs()).sum::<f64>()
}

/// base_grad_j + smoothed_abs_grad(x_j).
pub fn smoothed_l1_grad(base_grad_j: f64, x_j: f64, c: &L1Config) -> f64 {
    base_grad_j + smoothed_abs_grad(x_j, c)
}
