//! Derivative operators: the sigmoidal derivative for callables and sampled
//! data, Caputo and Caputo–Fabrizio comparisons, memory truncation, and the
//! inequality checks built on top of them.

use std::cell::RefCell;

use serde::Serialize;

use crate::error::{FracError, Result};
use crate::grid::GridFunction;
use crate::kernels::{c1_constant, sech2, Convention, FractionalOrder, KernelFamily, KernelSpec};
use crate::quadrature::{endpoint_breaks, integrate_pieces, QuadConfig, QuadResult};
use crate::special::{gamma_fn, mittag_leffler, mittag_leffler_derivative, MLParams};
use crate::weights::Sech2Weights;

/// Breakpoints, in kernel widths behind t, where the sech² integrand changes scale.
const SECH2_BREAKS: [f64; 4] = [0.5, 2.0, 8.0, 24.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivFlag {
    /// Subdivision budget exhausted; `value` is the best estimate.
    NotConverged,
    /// α = 1, the supplied derivative was returned.
    Classical,
    /// Fewer than 8 grid intervals.
    CoarseGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivResult {
    pub value: f64,
    /// A-posteriori estimate, not a bound.
    pub err_estimate: f64,
    pub n_evals: usize,
    /// `None` for operators that do not use C₁(α).
    pub convention: Option<Convention>,
    pub flags: Vec<DerivFlag>,
}

impl DerivResult {
    pub fn converged(&self) -> bool {
        !self.flags.contains(&DerivFlag::NotConverged)
    }

    fn from_quad(r: QuadResult<f64>, scale: f64, convention: Option<Convention>) -> Self {
        let mut flags = Vec::new();
        if !r.converged {
            flags.push(DerivFlag::NotConverged);
        }
        Self {
            value: scale * r.value,
            err_estimate: scale.abs() * r.err,
            n_evals: r.n_evals.max(1),
            convention,
            flags,
        }
    }
}

fn check_interval(a: f64, t: f64) -> Result<()> {
    if !(a.is_finite() && t.is_finite()) {
        return Err(FracError::InvalidConfig(format!(
            "limits must be finite, got [{a}, {t}]"
        )));
    }
    if a > t {
        return Err(FracError::InvalidConfig(format!(
            "lower limit {a} exceeds upper limit {t}"
        )));
    }
    Ok(())
}

/// Runs `body` with an integrand wrapper that records the first error raised
/// by a fallible callable and feeds NaN to the integrator in its place.
fn with_fallible<F, R>(f: F, body: impl FnOnce(&dyn Fn(f64) -> f64) -> R) -> Result<R>
where
    F: Fn(f64) -> Result<f64>,
{
    let failure: RefCell<Option<FracError>> = RefCell::new(None);
    let wrapped = |s: f64| match f(s) {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };
    let out = body(&wrapped);
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// ∫ₐᵗ f'(s)·sech²((s−t)/w) ds, without C₁.
pub(crate) fn sech2_integral(
    fprime: impl Fn(f64) -> f64,
    a: f64,
    t: f64,
    w: f64,
    q: &QuadConfig,
) -> QuadResult<f64> {
    let breaks = endpoint_breaks(a, t, w, &SECH2_BREAKS);
    integrate_pieces(|s| fprime(s) * sech2((s - t) / w), &breaks, q)
}

/// The classical derivative, used at α = 1.
pub fn classical_branch(fprime: impl Fn(f64) -> f64, t: f64) -> DerivResult {
    DerivResult {
        value: fprime(t),
        err_estimate: 0.0,
        n_evals: 1,
        convention: None,
        flags: vec![DerivFlag::Classical],
    }
}

/// C₁(α)·∫ₐᵗ f'(s)·sech²((s−t)/(1−α)) ds; α = 1 returns f'(t).
pub fn sig_deriv(
    fprime: impl Fn(f64) -> f64,
    a: f64,
    t: f64,
    order: FractionalOrder,
    q: &QuadConfig,
) -> Result<DerivResult> {
    check_interval(a, t)?;
    q.validate()?;
    if order.is_classical() {
        let mut r = classical_branch(fprime, t);
        r.convention = Some(order.convention());
        return Ok(r);
    }
    let c1 = c1_constant(order)?;
    let r = sech2_integral(fprime, a, t, order.width()?, &q.scaled_abs(c1));
    Ok(DerivResult::from_quad(r, c1, Some(order.convention())))
}

/// Same integral over the memory window [t − L, t].
pub fn sig_deriv_truncated(
    fprime: impl Fn(f64) -> f64,
    t: f64,
    memory: f64,
    order: FractionalOrder,
    q: &QuadConfig,
) -> Result<DerivResult> {
    if !(memory > 0.0) {
        return Err(FracError::InvalidConfig(format!(
            "memory length must be positive, got {memory}"
        )));
    }
    sig_deriv(fprime, t - memory, t, order, q)
}

/// Sigmoidal derivative at node `index` of sampled data.
///
/// f' comes from finite differences of the samples and is integrated against
/// the kernel by the product-trapezoid rule. The error estimate compares
/// against the same rule on every second node.
pub fn sig_deriv_sampled(
    g: &GridFunction,
    index: usize,
    order: FractionalOrder,
) -> Result<DerivResult> {
    let n = g.n();
    if index < 1 || index > n {
        return Err(FracError::Grid(format!(
            "node index must be in 1..={n}, got {index}"
        )));
    }
    let d = g.derivative_samples();
    let mut flags = Vec::new();
    if n < 8 {
        flags.push(DerivFlag::CoarseGrid);
    }
    if order.is_classical() {
        return Ok(DerivResult {
            value: d[index],
            err_estimate: 0.0,
            n_evals: 1,
            convention: Some(order.convention()),
            flags: [flags, vec![DerivFlag::Classical]].concat(),
        });
    }
    let c1 = c1_constant(order)?;
    let w = order.width()?;
    let h = g.h();
    let fine_w = Sech2Weights::new(h, w, index);
    let fine = fine_w.apply_row(&d, index);

    let half = index / 2;
    let err = if half >= 1 {
        let coarse_w = Sech2Weights::new(2.0 * h, w, half);
        // Samples at index, index−2, ..., re-indexed from the lowest one.
        let start = index - 2 * half;
        let sub: Vec<f64> = (0..=half).map(|k| d[start + 2 * k]).collect();
        let mut coarse = coarse_w.apply_row(&sub, half);
        if start == 1 {
            coarse += fine_w.rising()[index - 1] * d[1] + fine_w.falling()[index - 1] * d[0];
        }
        (fine - coarse).abs() / 3.0
    } else {
        0.0
    };
    Ok(DerivResult {
        value: c1 * fine,
        err_estimate: c1 * err,
        n_evals: index + 1,
        convention: Some(order.convention()),
        flags,
    })
}

/// Caputo derivative (1/Γ(1−α))∫ₐᵗ f'(s)(t−s)^(−α) ds.
///
/// Uses u = (t−s)^(1−α), which turns the integral into
/// (1/Γ(2−α))∫₀^((t−a)^(1−α)) f'(t − u^(1/(1−α))) du with a bounded integrand.
pub fn caputo_deriv(
    fprime: impl Fn(f64) -> f64,
    a: f64,
    t: f64,
    alpha: f64,
    q: &QuadConfig,
) -> Result<DerivResult> {
    check_interval(a, t)?;
    q.validate()?;
    let order = FractionalOrder::full(alpha)?;
    if order.is_classical() {
        return Ok(classical_branch(fprime, t));
    }
    let p = 1.0 / (1.0 - alpha);
    let upper = (t - a).powf(1.0 - alpha);
    // u^p climbs steeply near the top end once p is large.
    let mut breaks = vec![0.0];
    for frac in [0.5, 0.9, 0.99, 0.999, 0.9999] {
        let u = upper * frac;
        if u > *breaks.last().unwrap() && u < upper {
            breaks.push(u);
        }
    }
    breaks.push(upper);
    let scale = 1.0 / gamma_fn(2.0 - alpha)?;
    let r = integrate_pieces(
        |u: f64| fprime(t - u.powf(p)),
        &breaks,
        &q.scaled_abs(scale),
    );
    Ok(DerivResult::from_quad(r, scale, None))
}

/// Caputo–Fabrizio derivative with M(α) = `m_alpha` and prefactor M(α)/(1−α).
pub fn caputo_fabrizio_deriv(
    fprime: impl Fn(f64) -> f64,
    a: f64,
    t: f64,
    alpha: f64,
    m_alpha: f64,
    q: &QuadConfig,
) -> Result<DerivResult> {
    let k = KernelSpec::caputo_fabrizio(FractionalOrder::full(alpha)?, m_alpha)?;
    caputo_fabrizio_deriv_with(fprime, a, t, &k, q)
}

/// Caputo–Fabrizio derivative for a prepared kernel (prefactor switch honored).
pub fn caputo_fabrizio_deriv_with(
    fprime: impl Fn(f64) -> f64,
    a: f64,
    t: f64,
    k: &KernelSpec,
    q: &QuadConfig,
) -> Result<DerivResult> {
    check_interval(a, t)?;
    q.validate()?;
    if k.order.is_classical() {
        return Ok(classical_branch(fprime, t));
    }
    let alpha = k.order.alpha();
    let decay = (1.0 - alpha) / alpha;
    let scale = k.cf_scale()?;
    let breaks = endpoint_breaks(a, t, decay, &[1.0, 4.0, 16.0, 40.0]);
    let r = integrate_pieces(
        |s| fprime(s) * (-(t - s) / decay).exp(),
        &breaks,
        &q.scaled_abs(scale),
    );
    Ok(DerivResult::from_quad(r, scale, None))
}

/// ∫ₐᵗ f'(s)·K(t−s, α) ds for any kernel family.
pub fn kernel_deriv(
    k: &KernelSpec,
    fprime: impl Fn(f64) -> f64,
    a: f64,
    t: f64,
    q: &QuadConfig,
) -> Result<DerivResult> {
    match k.family {
        KernelFamily::SigmoidalSech2 => sig_deriv(fprime, a, t, k.order, q),
        KernelFamily::CaputoPower => caputo_deriv(fprime, a, t, k.order.alpha(), q),
        KernelFamily::CaputoFabrizioExp => caputo_fabrizio_deriv_with(fprime, a, t, k, q),
        KernelFamily::Gaussian => {
            check_interval(a, t)?;
            q.validate()?;
            let sigma = k.sigma;
            let scale = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
            let breaks = endpoint_breaks(a, t, sigma, &[1.0, 3.0, 8.0, 40.0]);
            let r = integrate_pieces(
                |s| {
                    let z = (t - s) / sigma;
                    fprime(s) * (-0.5 * z * z).exp()
                },
                &breaks,
                &q.scaled_abs(scale),
            );
            Ok(DerivResult::from_quad(r, scale, None))
        }
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(FracError::InvalidConfig(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

/// Memory length L = (1−α)·√(C₁(α)·C₀/ε) for the sigmoidal derivative.
pub fn sig_memory_length(eps: f64, c0: f64, order: FractionalOrder) -> Result<f64> {
    check_positive("eps", eps)?;
    check_positive("c0", c0)?;
    Ok(order.width()? * (c1_constant(order)? * c0 / eps).sqrt())
}

/// Smallest L with `truncation_error_bound(L) ≤ ε`: (1−α)·√(C₁C₀/ε − 1), or 0 when no memory is needed.
pub fn sig_memory_length_tight(eps: f64, c0: f64, order: FractionalOrder) -> Result<f64> {
    check_positive("eps", eps)?;
    check_positive("c0", c0)?;
    let ratio = c1_constant(order)? * c0 / eps;
    Ok(order.width()? * (ratio - 1.0).max(0.0).sqrt())
}

/// C₁(α)·C₀ / (1 + (L/(1−α))²), the bound on |full − truncated| when |f'| ≤ C₀.
pub fn truncation_error_bound(memory: f64, c0: f64, order: FractionalOrder) -> Result<f64> {
    if !(memory >= 0.0) {
        return Err(FracError::InvalidConfig(format!(
            "memory length must be nonnegative, got {memory}"
        )));
    }
    check_positive("c0", c0)?;
    let x = memory / order.width()?;
    Ok(c1_constant(order)? * c0 / (1.0 + x * x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MemoryLength {
    pub length: f64,
    /// M/(ε|Γ(2−α)|) ≤ 1: the formula no longer describes a useful window.
    pub degenerate: bool,
}

/// Caputo memory length (M/(ε|Γ(2−α)|))^(1/(α−1)).
pub fn caputo_memory_length(eps: f64, m: f64, alpha: f64) -> Result<MemoryLength> {
    check_positive("eps", eps)?;
    check_positive("m", m)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(FracError::InvalidOrder(alpha));
    }
    let ratio = m / (eps * gamma_fn(2.0 - alpha)?.abs());
    Ok(MemoryLength {
        length: ratio.powf(1.0 / (alpha - 1.0)),
        degenerate: ratio <= 1.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sandwich {
    pub lower: f64,
    pub mid: f64,
    pub upper: f64,
    pub cap: f64,
    /// Slack allowed when checking the ordering.
    pub tol: f64,
}

/// Gaussian, sech², Cauchy, and unit kernels integrated against f' ≥ 0.
///
/// Returns an ordering-violation error when lower ≤ mid ≤ upper ≤ cap fails
/// by more than the accumulated quadrature error.
pub fn sandwich_bounds(
    fprime: impl Fn(f64) -> f64,
    a: f64,
    t: f64,
    order: FractionalOrder,
    q: &QuadConfig,
) -> Result<Sandwich> {
    check_interval(a, t)?;
    q.validate()?;
    let w = order.width()?;
    let breaks = endpoint_breaks(a, t, w, &SECH2_BREAKS);
    let lower = integrate_pieces(
        |s| {
            let x = (s - t) / w;
            fprime(s) * (-x * x).exp()
        },
        &breaks,
        q,
    );
    let mid = sech2_integral(&fprime, a, t, w, q);
    let upper = integrate_pieces(
        |s| {
            let x = (s - t) / w;
            fprime(s) / (1.0 + x * x)
        },
        &breaks,
        q,
    );
    let cap = integrate_pieces(&fprime, &breaks, q);
    let out = Sandwich {
        lower: lower.value,
        mid: mid.value,
        upper: upper.value,
        cap: cap.value,
        tol: 10.0 * (lower.err + mid.err + upper.err + cap.err) + 1e-12 * cap.abs_value.max(1.0),
    };
    let chain = [
        ("lower", out.lower),
        ("mid", out.mid),
        ("upper", out.upper),
        ("cap", out.cap),
    ];
    for pair in chain.windows(2) {
        if pair[0].1 > pair[1].1 + out.tol {
            return Err(FracError::OrderingViolation(format!(
                "{} = {} exceeds {} = {}",
                pair[0].0, pair[0].1, pair[1].0, pair[1].1
            )));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Commutation {
    /// |D(f')(t) − d/dt D(f)(t)|.
    pub residual: f64,
    /// C₁(α)·f'(a)·sech²((a−t)/(1−α)), the predicted value of the residual.
    pub boundary_term: f64,
    /// f'(a) = 0 holds.
    pub hypothesis_holds: bool,
    pub h_fd: f64,
}

/// Compares the operator applied to f' with the time derivative of the operator applied to f.
pub fn commutation_residual(
    fprime: impl Fn(f64) -> f64,
    fsecond: impl Fn(f64) -> f64,
    a: f64,
    t: f64,
    order: FractionalOrder,
    q: &QuadConfig,
) -> Result<Commutation> {
    let w = order.width()?;
    if !(t > a) {
        return Err(FracError::InvalidConfig(format!(
            "need a < t, got a = {a}, t = {t}"
        )));
    }
    let h_fd = w * 1e-3;
    let inner = q.tightened(1e-13);
    let left = sig_deriv(&fsecond, a, t, order, &inner)?;
    let up = sig_deriv(&fprime, a, t + h_fd, order, &inner)?;
    let down = sig_deriv(&fprime, a, t - h_fd, order, &inner)?;
    let right = (up.value - down.value) / (2.0 * h_fd);
    let fa = fprime(a);
    Ok(Commutation {
        residual: (left.value - right).abs(),
        boundary_term: (c1_constant(order)? * fa * sech2((a - t) / w)).abs(),
        hypothesis_holds: fa == 0.0,
        h_fd,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MlBound {
    /// Sigmoidal derivative of E_{γ,η} on [a, t].
    pub lhs: f64,
    /// C₁(α)·(E_{γ,η}(t−a) − 1/Γ(η)).
    pub rhs: f64,
    pub holds: bool,
    /// C₁(α)·(E_{γ,η}(t) − E_{γ,η}(a)), which always dominates lhs.
    pub rhs_corrected: f64,
    pub holds_corrected: bool,
}

/// Compares the sigmoidal derivative of E_{γ,η} with C₁(α)·Σ_{k≥1}(t−a)^k/Γ(γk+η).
pub fn ml_bound_check(
    p: MLParams,
    a: f64,
    t: f64,
    order: FractionalOrder,
    q: &QuadConfig,
) -> Result<MlBound> {
    if !(a > 0.0 && t > a) {
        return Err(FracError::InvalidConfig(format!(
            "need 0 < a < t, got a = {a}, t = {t}"
        )));
    }
    let c1 = c1_constant(order)?;
    let d = with_fallible(
        |s| mittag_leffler_derivative(p, s),
        |fp| sig_deriv(fp, a, t, order, q),
    )??;
    let head = 1.0 / gamma_fn(p.eta_param())?;
    let rhs = c1 * (mittag_leffler(p, t - a)? - head);
    let rhs_corrected = c1 * (mittag_leffler(p, t)? - mittag_leffler(p, a)?);
    let slack = 10.0 * d.err_estimate + 1e-12 * rhs_corrected.abs().max(1.0);
    Ok(MlBound {
        lhs: d.value,
        rhs,
        holds: d.value <= rhs + slack,
        rhs_corrected,
        holds_corrected: d.value <= rhs_corrected + slack,
    })
}

/// Number of radii T·2^(−k/4) scanned for the maximal function.
const MAXIMAL_RADII: usize = 81;

/// Compares the derivative over [−t, t] with 2T·C₁(α)·M(|f'|)(0), where M is
/// the centered maximal function over radii in (0, T].
pub fn maximal_bound_check(
    fprime: impl Fn(f64) -> f64,
    big_t: f64,
    t: f64,
    order: FractionalOrder,
    q: &QuadConfig,
) -> Result<BoundCheck> {
    check_positive("T", big_t)?;
    if !(t > 0.0 && t <= big_t) {
        return Err(FracError::InvalidConfig(format!(
            "t must lie in (0, T], got {t}"
        )));
    }
    let c1 = c1_constant(order)?;
    let lhs = sig_deriv(&fprime, -t, t, order, q)?;
    let mut sup = fprime(0.0).abs();
    let mut slack = 0.0f64;
    for k in 0..MAXIMAL_RADII {
        let r = big_t * 2f64.powf(-(k as f64) / 4.0);
        let m = integrate_pieces(|s| fprime(s).abs(), &[-r, 0.0, r], q);
        slack = slack.max(m.err / (2.0 * r));
        sup = sup.max(m.value / (2.0 * r));
    }
    let rhs = 2.0 * big_t * c1 * sup;
    let tol = 10.0 * (lhs.err_estimate + 2.0 * big_t * c1 * slack) + 1e-12 * rhs.abs().max(1.0);
    Ok(BoundCheck {
        lhs: lhs.value,
        rhs,
        holds: lhs.value <= rhs + tol,
    })
}
