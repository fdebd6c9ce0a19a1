//! Laplace and Fourier multipliers of the sech² kernel and quadrature checks
//! of the operator identities they imply.
//!
//! Fourier transforms are unitary with kernel e^{+iωt}:
//! F(f)(ω) = (1/√(2π))∫ f(t)e^{iωt} dt.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{FracError, Result};
use crate::fracderiv::sig_deriv;
use crate::kernels::{c1_constant, sech2, FractionalOrder};
use crate::quadrature::{integrate_to_infinity, QuadConfig, QuadResult};
use crate::special::{alt_series_digamma, digamma_complex};

/// Dyadic window cap for semi-infinite integrals.
pub const MAX_WINDOWS: usize = 40;

/// A Laplace variable with positive real part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplacePoint {
    s: Complex64,
}

impl LaplacePoint {
    pub fn new(s: Complex64) -> Result<Self> {
        if !(s.re > 0.0) || !s.im.is_finite() || !s.re.is_finite() {
            return Err(FracError::Domain {
                what: "Laplace variable (Re s > 0)",
                value: s.re,
            });
        }
        Ok(Self { s })
    }

    pub fn real(s: f64) -> Result<Self> {
        Self::new(Complex64::new(s, 0.0))
    }

    pub fn s(&self) -> Complex64 {
        self.s
    }

    fn scaled(&self, b: f64) -> Self {
        Self { s: self.s * b }
    }
}

/// A nonzero Fourier frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierPoint {
    omega: f64,
}

impl FourierPoint {
    pub fn new(omega: f64) -> Result<Self> {
        if omega == 0.0 || !omega.is_finite() {
            return Err(FracError::Pole {
                what: "T2 multiplier",
                at: omega,
            });
        }
        Ok(Self { omega })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }
}

fn digamma_difference(s: Complex64) -> Complex64 {
    (s * 0.5) * (digamma_complex((s + 2.0) / 4.0) - digamma_complex(s / 4.0))
}

/// ∫₀^∞ e^{−st}sech²(t) dt = (s/2)[Ψ((s+2)/4) − Ψ(s/4)] − 1.
pub fn t1_multiplier(s: LaplacePoint) -> Complex64 {
    digamma_difference(s.s) - 1.0
}

/// The printed variant 1 + (s/2)[Ψ((s+2)/4) − Ψ(s/4)], kept for comparison.
pub fn t1_multiplier_paper(s: Complex64) -> Complex64 {
    digamma_difference(s) + 1.0
}

/// √(π/2)·csch(πω/2); ω·T₂(ω) is the unitary transform of sech².
pub fn t2_multiplier(w: FourierPoint) -> f64 {
    (PI / 2.0).sqrt() / (0.5 * PI * w.omega).sinh()
}

/// s + 2s²·Σ_{k≥1} (−1)^k/(2k+s) = s²·L(tanh)(s), via the digamma form of the alternating sum.
pub fn laplace_tanh_series(s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(FracError::Domain {
            what: "laplace_tanh_series",
            value: s,
        });
    }
    // Σ_{k≥0} (−1)^k/(2k+s) = alt(2/s)/s; the k = 0 term is 1/s.
    let tail = (alt_series_digamma(2.0 / s)? - 1.0) / s;
    Ok(s + 2.0 * s * s * tail)
}

/// ∫₀^∞ e^{−st}f(t) dt on dyadic windows.
pub fn laplace_numeric(
    mut f: impl FnMut(f64) -> f64,
    s: LaplacePoint,
    q: &QuadConfig,
) -> QuadResult<Complex64> {
    let s = s.s;
    integrate_to_infinity(|t: f64| (-s * t).exp() * f(t), 0.0, 1.0, MAX_WINDOWS, q)
}

/// (1/√(2π))∫_ℝ f(t)e^{iωt} dt, folded onto [0, ∞).
pub fn fourier_numeric(
    mut f: impl FnMut(f64) -> f64,
    w: FourierPoint,
    q: &QuadConfig,
) -> QuadResult<Complex64> {
    let om = w.omega;
    let mut r = integrate_to_infinity(
        |t: f64| {
            let e = Complex64::new(0.0, om * t).exp();
            e * f(t) + e.conj() * f(-t)
        },
        0.0,
        1.0,
        MAX_WINDOWS,
        q,
    );
    let norm = 1.0 / (2.0 * PI).sqrt();
    r.value *= norm;
    r.err *= norm;
    r.abs_value *= norm;
    r
}

fn relative_gap(lhs: Complex64, rhs: Complex64) -> f64 {
    let d = (lhs - rhs).norm();
    if d == 0.0 {
        0.0
    } else {
        d / lhs.norm().max(f64::MIN_POSITIVE)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceCheck {
    /// L of t ↦ D^α f(t) by nested quadrature.
    pub lhs: Complex64,
    /// C₁(α)·s·L(f)(s)·(1−α)·T₁((1−α)s) with the corrected T₁.
    pub rhs: Complex64,
    pub residual: f64,
    /// C₁(α)·(s(α−1))²·T₁_printed((α−1)s)·L(f)(s).
    pub rhs_paper: Complex64,
    pub residual_paper: f64,
    pub converged: bool,
}

/// Checks the Laplace identity for the sigmoidal derivative with lower limit 0.
///
/// The identity needs f(0) = 0; otherwise the rhs misses the −f(0) term.
pub fn verify_laplace_identity(
    fprime: impl Fn(f64) -> f64,
    f: impl Fn(f64) -> f64,
    order: FractionalOrder,
    s: LaplacePoint,
    q: &QuadConfig,
) -> Result<LaplaceCheck> {
    let c1 = c1_constant(order)?;
    let w = order.width()?;
    let inner = q.tightened(q.abs_tol.min(1e-12) * 0.1);
    let mut inner_ok = true;
    let mut failure = None;
    let deriv = |t: f64| {
        if t == 0.0 {
            return 0.0;
        }
        match sig_deriv(&fprime, 0.0, t, order, &inner) {
            Ok(r) => {
                inner_ok &= r.converged();
                r.value
            }
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        }
    };
    let lhs = laplace_numeric(deriv, s, q);
    if let Some(e) = failure {
        return Err(e);
    }
    let lf = laplace_numeric(&f, s, q);
    let sv = s.s;
    let rhs = lf.value * sv * (c1 * w) * t1_multiplier(s.scaled(w));
    let sp = sv * (order.alpha() - 1.0);
    let rhs_paper = lf.value * sp * sp * c1 * t1_multiplier_paper(sp);
    Ok(LaplaceCheck {
        lhs: lhs.value,
        rhs,
        residual: relative_gap(lhs.value, rhs),
        rhs_paper,
        residual_paper: relative_gap(lhs.value, rhs_paper),
        converged: lhs.converged && lf.converged && inner_ok,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierCheck {
    /// F of the bilateral operator C₁∫_ℝ f'(s)sech²((s−t)/(1−α)) ds.
    pub lhs: Complex64,
    /// C₁·√(2π)·(−iω)·F(f)(ω)·(1−α)·((1−α)ω)·T₂((1−α)ω).
    pub rhs_pinned: Complex64,
    pub residual_pinned: f64,
    /// Same product with +iω and without √(2π).
    pub residual_unscaled: f64,
    /// −C₁·ω²·|α−1|·(α−1)·T₂((α−1)ω)·F(f)(ω).
    pub residual_paper: f64,
    pub converged: bool,
}

/// Bilateral sigmoidal operator C₁∫_ℝ f'(s)·sech²((s−t)/(1−α)) ds.
pub fn bilateral_sig(
    fprime: impl Fn(f64) -> f64,
    t: f64,
    order: FractionalOrder,
    q: &QuadConfig,
) -> Result<QuadResult<f64>> {
    let c1 = c1_constant(order)?;
    let w = order.width()?;
    let mut r = integrate_to_infinity(
        |u: f64| (fprime(t + u) + fprime(t - u)) * sech2(u / w),
        0.0,
        w,
        MAX_WINDOWS,
        &q.scaled_abs(c1),
    );
    r.value *= c1;
    r.err *= c1;
    r.abs_value *= c1;
    Ok(r)
}

/// Checks the Fourier multiplier identity for the bilateral operator.
pub fn verify_fourier_identity(
    fprime: impl Fn(f64) -> f64,
    f: impl Fn(f64) -> f64,
    order: FractionalOrder,
    w: FourierPoint,
    q: &QuadConfig,
) -> Result<FourierCheck> {
    let c1 = c1_constant(order)?;
    let width = order.width()?;
    let inner = q.tightened(q.abs_tol.min(1e-12) * 0.1);
    let mut inner_ok = true;
    let op = |t: f64| {
        let r = bilateral_sig(&fprime, t, order, &inner).expect("order validated above");
        inner_ok &= r.converged;
        r.value
    };
    let lhs = fourier_numeric(op, w, q);
    let ff = fourier_numeric(&f, w, q);
    let om = w.omega;
    let scaled = FourierPoint::new(width * om)?;
    let kernel_hat = width * (width * om) * t2_multiplier(scaled);
    let rhs_pinned = ff.value * Complex64::new(0.0, -om) * (c1 * (2.0 * PI).sqrt() * kernel_hat);
    let rhs_unscaled = ff.value * Complex64::new(0.0, om) * (c1 * kernel_hat);
    let am1 = order.alpha() - 1.0;
    let rhs_paper =
        ff.value * (-c1 * om * om * am1.abs() * am1 * t2_multiplier(FourierPoint::new(am1 * om)?));
    Ok(FourierCheck {
        lhs: lhs.value,
        rhs_pinned,
        residual_pinned: relative_gap(lhs.value, rhs_pinned),
        residual_unscaled: relative_gap(lhs.value, rhs_unscaled),
        residual_paper: relative_gap(lhs.value, rhs_paper),
        converged: lhs.converged && ff.converged && inner_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> QuadConfig {
        QuadConfig::new(1e-13, 1e-12, 4096).unwrap()
    }

    fn sp(s: f64) -> LaplacePoint {
        LaplacePoint::real(s).unwrap()
    }

    #[test]
    fn t1_examples() {
        let ln2 = std::f64::consts::LN_2;
        assert!((t1_multiplier(sp(2.0)).re - (2.0 * ln2 - 1.0)).abs() < 1e-13);
        assert!((t1_multiplier(sp(1e-7)).re - 1.0).abs() < 1e-6);
        assert!(
            (t1_multiplier_paper(Complex64::new(2.0, 0.0)).re - (1.0 + 2.0 * ln2)).abs() < 1e-13
        );
        assert!((t1_multiplier(sp(1.0)).re - (PI / 2.0 - 1.0)).abs() < 1e-13);
        assert!(LaplacePoint::real(0.0).is_err());
        assert!(LaplacePoint::real(-1.0).is_err());
    }

    #[test]
    fn t2_examples() {
        let one = FourierPoint::new(1.0).unwrap();
        assert!((t2_multiplier(one) - 0.544_611_626_094_689_7).abs() < 1e-14);
        assert!(
            (t2_multiplier(FourierPoint::new(-1.0).unwrap()) + 0.544_611_626_094_689_7).abs()
                < 1e-14
        );
        let small = FourierPoint::new(1e-8).unwrap();
        assert!((1e-8 * t2_multiplier(small) - (2.0 / PI).sqrt()).abs() < 1e-12);
        assert!(FourierPoint::new(0.0).is_err());
    }

    #[test]
    fn laplace_numeric_examples() {
        let one = laplace_numeric(|_| 1.0, sp(2.0), &q());
        assert!(one.converged && (one.value.re - 0.5).abs() < 1e-12);
        let th = laplace_numeric(f64::tanh, sp(2.0), &q());
        assert!((th.value.re - (std::f64::consts::LN_2 - 0.5)).abs() < 1e-12);
        let sc = laplace_numeric(sech2, sp(1.0), &q());
        assert!((sc.value.re - (PI / 2.0 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn corrected_t1_matches_quadrature() {
        for s in [0.5, 1.0, 2.0, 4.0, 8.0] {
            let num = laplace_numeric(sech2, sp(s), &q()).value;
            assert!((num - t1_multiplier(sp(s))).norm() < 1e-8, "s={s}");
        }
        // off the real axis too
        let z = LaplacePoint::new(Complex64::new(1.5, 2.0)).unwrap();
        assert!((laplace_numeric(sech2, z, &q()).value - t1_multiplier(z)).norm() < 1e-8);
    }

    #[test]
    fn laplace_dilation() {
        for b in [0.1, 0.5, 1.0] {
            let s = sp(1.3);
            let num = laplace_numeric(|t| sech2(t / b), s, &q()).value;
            assert!(
                (num - t1_multiplier(s.scaled(b)) * b).norm() < 1e-7,
                "b={b}"
            );
        }
    }

    #[test]
    fn tanh_series_matches_quadrature() {
        for s in [1.0, 2.0] {
            let num = laplace_numeric(f64::tanh, sp(s), &q()).value.re;
            assert!((laplace_tanh_series(s).unwrap() - s * s * num).abs() < 1e-8);
        }
    }

    #[test]
    fn fourier_of_sech2() {
        for om in [0.25, 0.5, 1.0, 2.0] {
            let w = FourierPoint::new(om).unwrap();
            let r = fourier_numeric(sech2, w, &q());
            assert!(
                (r.value.re - om * t2_multiplier(w)).abs() < 1e-6,
                "omega={om}"
            );
            assert!(r.value.im.abs() < 1e-10);
        }
    }

    #[test]
    fn fourier_dilation() {
        let b = 0.5;
        let w = FourierPoint::new(1.0).unwrap();
        let scaled = fourier_numeric(|t| sech2(t / b), w, &q()).value;
        let base = fourier_numeric(sech2, FourierPoint::new(b).unwrap(), &q()).value;
        assert!((scaled - base * b).norm() < 1e-9);
    }

    #[test]
    fn laplace_identity_examples() {
        let o = FractionalOrder::full(0.5).unwrap();
        let c = verify_laplace_identity(|_| 1.0, |t| t, o, sp(2.0), &q()).unwrap();
        assert!((c.lhs.re - 0.285_398_163_397_448_3).abs() < 1e-9);
        assert!(c.residual <= 1e-6, "{}", c.residual);
        assert!(c.residual_paper > 0.1);
        let o = FractionalOrder::full(0.7).unwrap();
        let c = verify_laplace_identity(
            |t: f64| (-t).exp(),
            |t: f64| 1.0 - (-t).exp(),
            o,
            sp(1.0),
            &q(),
        )
        .unwrap();
        assert!(c.residual <= 1e-6, "{}", c.residual);
        let c = verify_laplace_identity(|_| 0.0, |_| 0.0, o, sp(1.0), &q()).unwrap();
        assert_eq!(c.lhs.norm(), 0.0);
        assert_eq!(c.residual, 0.0);
    }

    #[test]
    fn fourier_identity_examples() {
        let o = FractionalOrder::full(0.5).unwrap();
        let gauss = |t: f64| (-t * t).exp();
        let dgauss = |t: f64| -2.0 * t * (-t * t).exp();
        let plus = verify_fourier_identity(dgauss, gauss, o, FourierPoint::new(1.0).unwrap(), &q())
            .unwrap();
        assert!(plus.residual_pinned <= 1e-5, "{}", plus.residual_pinned);
        assert!(plus.residual_unscaled > 0.1);
        let minus =
            verify_fourier_identity(dgauss, gauss, o, FourierPoint::new(-1.0).unwrap(), &q())
                .unwrap();
        assert!((minus.residual_pinned - plus.residual_pinned).abs() < 1e-6);
        assert!((minus.lhs - plus.lhs.conj()).norm() < 1e-9);
        let zero =
            verify_fourier_identity(|_| 0.0, |_| 0.0, o, FourierPoint::new(1.0).unwrap(), &q())
                .unwrap();
        assert_eq!(zero.residual_pinned, 0.0);
    }
}
