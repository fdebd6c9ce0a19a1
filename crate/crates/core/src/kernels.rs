//! Fractional orders, normalization conventions, and the kernel family.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::special::gamma_fn;

/// Choice of the sigmoidal normalization constant C₁(α).
///
/// `FullMass` uses 1/(1−α), so the one-sided kernel integral tends to f'(t)
/// as α → 1. `PaperHalfMass` uses 1/(2(1−α)), which carries the factor ½ that
/// shows up in the closed forms derived with the two-sided mass.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    #[default]
    FullMass,
    PaperHalfMass,
}

impl Convention {
    pub const ALL: [Convention; 2] = [Convention::FullMass, Convention::PaperHalfMass];

    pub fn label(self) -> &'static str {
        match self {
            Convention::FullMass => "full-mass",
            Convention::PaperHalfMass => "paper-half-mass",
        }
    }
}

impl std::fmt::Display for Convention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// An order α ∈ (0, 1] together with its normalization convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FractionalOrder {
    alpha: f64,
    convention: Convention,
}

impl FractionalOrder {
    pub fn new(alpha: f64, convention: Convention) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(FracError::InvalidOrder(alpha));
        }
        Ok(Self { alpha, convention })
    }

    /// Shorthand for the default `FullMass` convention.
    pub fn full(alpha: f64) -> Result<Self> {
        Self::new(alpha, Convention::FullMass)
    }

    pub fn paper(alpha: f64) -> Result<Self> {
        Self::new(alpha, Convention::PaperHalfMass)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn with_convention(self, convention: Convention) -> Self {
        Self { convention, ..self }
    }

    /// α = 1 selects the classical derivative.
    pub fn is_classical(&self) -> bool {
        self.alpha == 1.0
    }

    /// Kernel width 1 − α; errors on the classical branch so it is never used as a divisor.
    pub fn width(&self) -> Result<f64> {
        if self.is_classical() {
            Err(FracError::ClassicalOrder("kernel width"))
        } else {
            Ok(1.0 - self.alpha)
        }
    }
}

/// C₁(α) under the order's convention.
pub fn c1_constant(order: FractionalOrder) -> Result<f64> {
    if order.is_classical() {
        return Err(FracError::ClassicalOrder("C1(alpha)"));
    }
    let w = 1.0 - order.alpha;
    Ok(match order.convention {
        Convention::FullMass => 1.0 / w,
        Convention::PaperHalfMass => 1.0 / (2.0 * w),
    })
}

/// sech²(x), without overflow for large |x|.
pub fn sech2(x: f64) -> f64 {
    let e = (-2.0 * x.abs()).exp();
    4.0 * e / ((1.0 + e) * (1.0 + e))
}

/// ln cosh(x), without overflow for large |x|.
pub fn ln_cosh(x: f64) -> f64 {
    let ax = x.abs();
    ax + (-2.0 * ax).exp().ln_1p() - LN_2
}

/// ∫ₐᵗ sech²((s−t)/(1−α)) ds = (1−α)·tanh((t−a)/(1−α)).
pub fn sech2_antiderivative(order: FractionalOrder, a: f64, t: f64) -> Result<f64> {
    let w = order.width()?;
    if a > t {
        return Err(FracError::InvalidConfig(format!(
            "lower limit {a} exceeds upper limit {t}"
        )));
    }
    Ok(w * ((t - a) / w).tanh())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelFamily {
    SigmoidalSech2,
    CaputoPower,
    CaputoFabrizioExp,
    Gaussian,
}

/// Denominator of the Caputo–Fabrizio prefactor M(α)/(·).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CfPrefactor {
    #[default]
    OneMinusAlpha,
    GammaOneMinusAlpha,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub order: FractionalOrder,
    /// Gaussian standard deviation.
    pub sigma: f64,
    /// Caputo–Fabrizio normalization M(α).
    pub m_alpha: f64,
    pub cf_prefactor: CfPrefactor,
}

impl KernelSpec {
    fn base(family: KernelFamily, order: FractionalOrder) -> Self {
        let sigma = (1.0 - order.alpha) / std::f64::consts::SQRT_2;
        Self {
            family,
            order,
            sigma,
            m_alpha: 1.0,
            cf_prefactor: CfPrefactor::OneMinusAlpha,
        }
    }

    pub fn sigmoidal(order: FractionalOrder) -> Self {
        Self::base(KernelFamily::SigmoidalSech2, order)
    }

    pub fn caputo(order: FractionalOrder) -> Self {
        Self::base(KernelFamily::CaputoPower, order)
    }

    pub fn caputo_fabrizio(order: FractionalOrder, m_alpha: f64) -> Result<Self> {
        if !m_alpha.is_finite() {
            return Err(FracError::InvalidConfig(format!(
                "m_alpha must be finite, got {m_alpha}"
            )));
        }
        Ok(Self {
            m_alpha,
            ..Self::base(KernelFamily::CaputoFabrizioExp, order)
        })
    }

    /// Gaussian kernel; `sigma = None` picks (1−α)/√2.
    pub fn gaussian(order: FractionalOrder, sigma: Option<f64>) -> Result<Self> {
        let mut k = Self::base(KernelFamily::Gaussian, order);
        if let Some(s) = sigma {
            k.sigma = s;
        }
        if !(k.sigma > 0.0 && k.sigma.is_finite()) {
            return Err(FracError::InvalidConfig(format!(
                "gaussian sigma must be positive, got {}",
                k.sigma
            )));
        }
        Ok(k)
    }

    pub fn with_cf_prefactor(self, cf_prefactor: CfPrefactor) -> Self {
        Self {
            cf_prefactor,
            ..self
        }
    }

    /// Constant multiplying the exponential in the Caputo–Fabrizio kernel.
    pub(crate) fn cf_scale(&self) -> Result<f64> {
        let w = self.order.width()?;
        Ok(match self.cf_prefactor {
            CfPrefactor::OneMinusAlpha => self.m_alpha / w,
            CfPrefactor::GammaOneMinusAlpha => self.m_alpha / gamma_fn(w)?,
        })
    }
}

/// K(t − s, α) for the chosen family. The sigmoidal kernel is returned
/// without C₁(α), so its value at s = t is 1.
pub fn eval_kernel(k: &KernelSpec, t: f64, s: f64) -> Result<f64> {
    let lag = t - s;
    match k.family {
        KernelFamily::SigmoidalSech2 => {
            if k.order.is_classical() {
                return Ok(if lag == 0.0 { 1.0 } else { 0.0 });
            }
            Ok(sech2(lag / k.order.width()?))
        }
        KernelFamily::CaputoPower => {
            if k.order.is_classical() {
                return Err(FracError::ClassicalOrder("power kernel"));
            }
            if lag == 0.0 {
                return Err(FracError::Singularity);
            }
            if lag < 0.0 {
                return Err(FracError::Domain {
                    what: "power kernel lag",
                    value: lag,
                });
            }
            Ok(lag.powf(-k.order.alpha) / gamma_fn(1.0 - k.order.alpha)?)
        }
        KernelFamily::CaputoFabrizioExp => {
            let w = k.order.width()?;
            Ok(k.cf_scale()? * (-k.order.alpha * lag / w).exp())
        }
        KernelFamily::Gaussian => {
            let z = lag / k.sigma;
            Ok((-0.5 * z * z).exp() / (2.0 * PI * k.sigma * k.sigma).sqrt())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn c1_examples() {
        assert_eq!(
            c1_constant(FractionalOrder::full(0.5).unwrap()).unwrap(),
            2.0
        );
        assert_eq!(
            c1_constant(FractionalOrder::paper(0.5).unwrap()).unwrap(),
            1.0
        );
        assert!((c1_constant(FractionalOrder::full(0.9).unwrap()).unwrap() - 10.0).abs() < 1e-12);
        assert!(c1_constant(FractionalOrder::full(1.0).unwrap()).is_err());
    }

    #[test]
    fn order_validation() {
        assert!(FractionalOrder::full(0.0).is_err());
        assert!(FractionalOrder::full(1.01).is_err());
        assert!(FractionalOrder::full(f64::NAN).is_err());
        assert!(FractionalOrder::full(1.0).unwrap().width().is_err());
    }

    #[test]
    fn kernel_examples() {
        let o = FractionalOrder::full(0.5).unwrap();
        let sig = KernelSpec::sigmoidal(o);
        assert_eq!(eval_kernel(&sig, 1.0, 1.0).unwrap(), 1.0);
        assert!((eval_kernel(&sig, 1.0, 0.0).unwrap() - 0.070_650_824_853_164_47).abs() < 1e-15);
        let cf = KernelSpec::caputo_fabrizio(o, 1.0).unwrap();
        assert!((eval_kernel(&cf, 1.0, 0.0).unwrap() - 2.0 * (-1.0f64).exp()).abs() < 1e-15);
        let cap = KernelSpec::caputo(o);
        assert_eq!(eval_kernel(&cap, 1.0, 1.0), Err(FracError::Singularity));
        assert!(eval_kernel(&cap, 1.0, 2.0).is_err());
        let g = KernelSpec::gaussian(o, None).unwrap();
        assert!((g.sigma - 0.5 / 2f64.sqrt()).abs() < 1e-15);
        // peak height 1/(σ√(2π))
        assert!(
            (eval_kernel(&g, 0.0, 0.0).unwrap() - 1.0 / (g.sigma * (2.0 * PI).sqrt())).abs()
                < 1e-14
        );
    }

    #[test]
    fn cf_gamma_prefactor_switch() {
        let o = FractionalOrder::full(0.5).unwrap();
        let cf = KernelSpec::caputo_fabrizio(o, 1.0)
            .unwrap()
            .with_cf_prefactor(CfPrefactor::GammaOneMinusAlpha);
        let expect = (-1.0f64).exp() / PI.sqrt();
        assert!((eval_kernel(&cf, 1.0, 0.0).unwrap() - expect).abs() < 1e-13);
    }

    #[test]
    fn antiderivative_examples() {
        let o = FractionalOrder::full(0.5).unwrap();
        assert_eq!(sech2_antiderivative(o, 1.0, 1.0).unwrap(), 0.0);
        assert!(
            (sech2_antiderivative(o, 0.0, 1.0).unwrap() - 0.482_013_790_037_908_4).abs() < 1e-15
        );
        assert!((sech2_antiderivative(o, 0.0, 1e3).unwrap() - 0.5).abs() < 1e-15);
        assert!(sech2_antiderivative(o, 2.0, 1.0).is_err());
    }

    #[test]
    fn stable_hyperbolics() {
        assert_eq!(sech2(1e4), 0.0);
        assert!((sech2(0.3) - 1.0 / 0.3f64.cosh().powi(2)).abs() < 1e-15);
        assert!((ln_cosh(800.0) - (800.0 - LN_2)).abs() < 1e-12);
        assert!((ln_cosh(0.7) - 0.7f64.cosh().ln()).abs() < 1e-15);
    }

    #[test]
    fn classical_sigmoidal_kernel_is_indicator() {
        let k = KernelSpec::sigmoidal(FractionalOrder::full(1.0).unwrap());
        assert_eq!(eval_kernel(&k, 1.0, 1.0).unwrap(), 1.0);
        assert_eq!(eval_kernel(&k, 1.0, 0.5).unwrap(), 0.0);
    }

    proptest! {
        #[test]
        fn sech2_kernel_even_and_bounded(lag in -20.0f64..20.0, alpha in 0.01f64..0.99) {
            let k = KernelSpec::sigmoidal(FractionalOrder::full(alpha).unwrap());
            let fwd = eval_kernel(&k, lag, 0.0).unwrap();
            let back = eval_kernel(&k, 0.0, lag).unwrap();
            prop_assert_eq!(fwd, back);
            prop_assert!((0.0..=1.0).contains(&fwd));
        }

        #[test]
        fn full_mass_c1_times_width_is_one(alpha in 0.001f64..0.999) {
            let o = FractionalOrder::full(alpha).unwrap();
            let p = c1_constant(o).unwrap() * (1.0 - alpha);
            prop_assert!((p - 1.0).abs() <= 2.0 * f64::EPSILON);
        }

        #[test]
        fn quadrature_matches_antiderivative(a in -3.0f64..3.0, len in 0.0f64..4.0, alpha in 0.05f64..0.95) {
            use crate::quadrature::{integrate, QuadConfig};
            let o = FractionalOrder::full(alpha).unwrap();
            let t = a + len;
            let k = KernelSpec::sigmoidal(o);
            let q = QuadConfig::default();
            let r = integrate(|s| eval_kernel(&k, t, s).unwrap(), a, t, &q);
            let exact = sech2_antiderivative(o, a, t).unwrap();
            prop_assert!((r.value - exact).abs() <= 1e-9);
        }
    }
}
