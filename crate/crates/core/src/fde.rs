//! Fractional differential problems on a uniform grid: the discretized
//! operator as a lower-triangular system, a residual check for the claimed
//! closed-form solution of D^α f = g, and a Picard solver for
//! D^α f = rhs(t, f, D^α f).

use std::io::Write;

use serde::Serialize;

use crate::error::{FracError, Result};
use crate::grid::GridFunction;
use crate::kernels::{c1_constant, FractionalOrder};
use crate::quadrature::{integrate, QuadConfig};
use crate::special::gamma_fn;
use crate::weights::Sech2Weights;

pub const MIN_NODES: usize = 8;
pub const MAX_NODES: usize = 4096;

/// (W·f')ᵢ ≈ C₁(α)∫ₐ^{tᵢ} f'(s)·sech²((s−tᵢ)/(1−α)) ds with product-trapezoid weights.
#[derive(Debug, Clone, PartialEq)]
pub struct VolterraSystem {
    a: f64,
    b: f64,
    n: usize,
    c1: f64,
    weights: Sech2Weights,
}

pub fn build_volterra(a: f64, b: f64, n: usize, order: FractionalOrder) -> Result<VolterraSystem> {
    if !(MIN_NODES..=MAX_NODES).contains(&n) {
        return Err(FracError::Grid(format!(
            "n must be in {MIN_NODES}..={MAX_NODES}, got {n}"
        )));
    }
    if !(a.is_finite() && b.is_finite() && b > a) {
        return Err(FracError::Grid(format!(
            "interval [{a}, {b}] is empty or not finite"
        )));
    }
    let c1 = c1_constant(order)?;
    let h = (b - a) / n as f64;
    Ok(VolterraSystem {
        a,
        b,
        n,
        c1,
        weights: Sech2Weights::new(h, order.width()?, n),
    })
}

impl VolterraSystem {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        (self.b - self.a) / self.n as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n)
            .map(|i| {
                if i == self.n {
                    self.b
                } else {
                    self.a + i as f64 * self.h()
                }
            })
            .collect()
    }

    /// W_ij including C₁.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else {
            self.c1 * self.weights.entry(i, j)
        }
    }

    /// W·d for samples d of f' at the n+1 nodes.
    pub fn apply(&self, d: &[f64]) -> Vec<f64> {
        assert_eq!(d.len(), self.n + 1, "sample count must match the grid");
        (0..=self.n)
            .map(|i| self.c1 * self.weights.apply_row(d, i))
            .collect()
    }

    /// Solves W·d = u for d₁..dₙ given d₀ (row 0 of W is zero, so d₀ is data).
    pub fn forward_solve(&self, u: &[f64], d0: f64) -> Vec<f64> {
        assert_eq!(u.len(), self.n + 1, "sample count must match the grid");
        let r = self.weights.rising();
        let fl = self.weights.falling();
        let mut d = vec![0.0; self.n + 1];
        d[0] = d0;
        for i in 1..=self.n {
            // Row i without the diagonal term r[0]·d[i].
            let mut acc = fl[i - 1] * d[0];
            for j in 1..i {
                acc += (r[i - j] + fl[i - j - 1]) * d[j];
            }
            d[i] = (u[i] / self.c1 - acc) / r[0];
        }
        d
    }

    fn solve_transpose(&self, y: &[f64]) -> Vec<f64> {
        // Wᵀ restricted to indices 1..=n is upper triangular.
        let n = self.n;
        let mut x = vec![0.0; n + 1];
        for j in (1..=n).rev() {
            let mut acc = 0.0;
            for (i, xi) in x.iter().enumerate().skip(j + 1) {
                acc += self.entry(i, j) * xi;
            }
            x[j] = (y[j] - acc) / self.entry(j, j);
        }
        x
    }

    fn solve_unknowns(&self, y: &[f64]) -> Vec<f64> {
        // W restricted to indices 1..=n, with d₀ = 0.
        let mut u = y.to_vec();
        u[0] = 0.0;
        self.forward_solve(&u, 0.0)
    }

    /// 1-norm condition estimate of W on the unknowns d₁..dₙ (Hager's method for ‖W⁻¹‖₁).
    pub fn condition_estimate(&self) -> f64 {
        let n = self.n;
        let col_sum = |j: usize| (j..=n).map(|i| self.entry(i, j).abs()).sum::<f64>();
        let norm_w = (1..=n).map(col_sum).fold(0.0, f64::max);

        let mut x = vec![0.0; n + 1];
        for v in x.iter_mut().skip(1) {
            *v = 1.0 / n as f64;
        }
        let mut est = 0.0;
        for _ in 0..5 {
            let y = self.solve_unknowns(&x);
            let y_norm: f64 = y[1..].iter().map(|v| v.abs()).sum();
            if y_norm <= est {
                break;
            }
            est = y_norm;
            let xi: Vec<f64> = y
                .iter()
                .map(|v| if *v >= 0.0 { 1.0 } else { -1.0 })
                .collect();
            let z = self.solve_transpose(&xi);
            let (jmax, zmax) = z[1..]
                .iter()
                .enumerate()
                .map(|(k, v)| (k + 1, v.abs()))
                .fold((1, f64::MIN), |acc, p| if p.1 > acc.1 { p } else { acc });
            let ztx: f64 = z[1..].iter().zip(&x[1..]).map(|(a, b)| a * b).sum();
            if zmax <= ztx {
                break;
            }
            x = vec![0.0; n + 1];
            x[jmax] = 1.0;
        }
        norm_w * est
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClaimedResidual {
    /// max over nodes of |D^α f(tᵢ) − G(tᵢ)| for f = g/C₁ + f(a).
    pub max_residual: f64,
    /// Node where the maximum occurs.
    pub at: f64,
}

/// Residual of the claimed solution f = g/C₁(α) + f(a) of D^α f(t) = G(t) = ∫ₐᵗ g.
///
/// f' is taken from finite differences of the grid samples and the operator
/// from the product-trapezoid system.
pub fn thm29_residual(
    g: impl Fn(f64) -> f64,
    f0: f64,
    a: f64,
    b: f64,
    n: usize,
    order: FractionalOrder,
) -> Result<ClaimedResidual> {
    let sys = build_volterra(a, b, n, order)?;
    let c1 = c1_constant(order)?;
    let f = GridFunction::from_fn(a, b, n, |t| g(t) / c1 + f0)?;
    let applied = sys.apply(&f.derivative_samples());
    let q = QuadConfig::new(1e-13, 1e-13, 4096)?;
    let mut best = ClaimedResidual {
        max_residual: 0.0,
        at: a,
    };
    for (i, t) in sys.nodes().into_iter().enumerate() {
        let big_g = integrate(&g, a, t, &q).value;
        let r = (applied[i] - big_g).abs();
        if r > best.max_residual {
            best = ClaimedResidual {
                max_residual: r,
                at: t,
            };
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContractionCheck {
    /// |(α−1)·C₁(α)·c0|.
    pub value: f64,
    pub ok: bool,
    /// |(α−1)·C(α)·c0| with C(α) = C₁(α)·Γ(2−α).
    pub value_c: f64,
}

pub fn contraction_check(c0: f64, order: FractionalOrder) -> Result<ContractionCheck> {
    if !(c0 > 0.0 && c0.is_finite()) {
        return Err(FracError::InvalidConfig(format!(
            "c0 must be positive, got {c0}"
        )));
    }
    let c1 = c1_constant(order)?;
    let am1 = (order.alpha() - 1.0).abs();
    let value = am1 * c1 * c0;
    Ok(ContractionCheck {
        value,
        ok: value < 1.0,
        value_c: am1 * c1 * gamma_fn(2.0 - order.alpha())? * c0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PicardConfig {
    /// Lipschitz constant of rhs in (f, u), used to gate on the contraction condition.
    pub c0: f64,
    pub max_sweeps: usize,
    pub tol: f64,
    /// Relaxation used once the inner fixed-point iteration stops contracting.
    pub damping: f64,
    pub max_inner: usize,
}

impl PicardConfig {
    pub fn new(c0: f64) -> Self {
        Self {
            c0,
            max_sweeps: 100,
            tol: 1e-10,
            damping: 0.5,
            max_inner: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PicardSolution {
    pub t: Vec<f64>,
    pub f: Vec<f64>,
    pub u: Vec<f64>,
    pub sweeps: usize,
    pub converged: bool,
    /// max |f_new − f_old| per sweep.
    pub sweep_diffs: Vec<f64>,
    /// Nodes whose inner iteration hit `max_inner` on the final sweep.
    pub inner_failures: usize,
    pub contraction: ContractionCheck,
}

impl PicardSolution {
    /// CSV with columns t, f, u.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let err = |e: csv::Error| FracError::Grid(e.to_string());
        w.write_record(["t", "f", "u"]).map_err(err)?;
        for i in 0..self.t.len() {
            w.write_record([
                self.t[i].to_string(),
                self.f[i].to_string(),
                self.u[i].to_string(),
            ])
            .map_err(err)?;
        }
        w.flush().map_err(|e| FracError::Grid(e.to_string()))
    }
}

/// Pointwise u = rhs(t, f, u); returns the value and whether it settled.
fn inner_fixed_point(
    rhs: &dyn Fn(f64, f64, f64) -> f64,
    t: f64,
    f: f64,
    start: f64,
    cfg: &PicardConfig,
) -> (f64, bool) {
    let mut u = start;
    let mut last_change = f64::INFINITY;
    let mut damped = false;
    for _ in 0..cfg.max_inner {
        let target = rhs(t, f, u);
        let next = if damped {
            (1.0 - cfg.damping) * u + cfg.damping * target
        } else {
            target
        };
        let change = (next - u).abs();
        u = next;
        if change <= 1e-14 * (1.0 + u.abs()) {
            return (u, true);
        }
        if change >= last_change {
            damped = true;
        }
        last_change = change;
    }
    (u, false)
}

/// Alternating sweeps for D^α f = rhs(t, f, D^α f) with f(a) = f0.
///
/// Each sweep solves u = rhs(t, f, u) pointwise, recovers f' from W·f' = u by
/// forward substitution (f'(a) from the one-sided slope of u, since
/// u'(a) = C₁·f'(a)), and integrates f' by the trapezoid rule from f0.
/// The problem is only consistent when rhs(a, f0, 0) = 0; otherwise the
/// first node is ignored.
#[allow(clippy::too_many_arguments)]
pub fn picard_solve(
    rhs: impl Fn(f64, f64, f64) -> f64,
    a: f64,
    b: f64,
    n: usize,
    f0: f64,
    order: FractionalOrder,
    cfg: &PicardConfig,
) -> Result<PicardSolution> {
    let contraction = contraction_check(cfg.c0, order)?;
    if !contraction.ok {
        return Err(FracError::ContractionViolated(contraction.value));
    }
    if !(cfg.tol > 0.0) || cfg.max_sweeps == 0 || !(cfg.damping > 0.0 && cfg.damping <= 1.0) {
        return Err(FracError::InvalidConfig(
            "picard: tol, max_sweeps, and damping in (0, 1] required".into(),
        ));
    }
    let sys = build_volterra(a, b, n, order)?;
    let c1 = c1_constant(order)?;
    let t = sys.nodes();
    let h = sys.h();
    let mut f = vec![f0; n + 1];
    let mut u = vec![0.0; n + 1];
    let mut diffs = Vec::new();
    let mut converged = false;
    let mut inner_failures = 0;
    for _ in 0..cfg.max_sweeps {
        inner_failures = 0;
        for i in 0..=n {
            let (v, ok) = inner_fixed_point(&rhs, t[i], f[i], u[i], cfg);
            u[i] = v;
            inner_failures += usize::from(!ok);
        }
        let slope0 = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h);
        let d = sys.forward_solve(&u, slope0 / c1);
        let mut next = vec![f0; n + 1];
        for i in 1..=n {
            next[i] = next[i - 1] + 0.5 * h * (d[i - 1] + d[i]);
        }
        let diff = next
            .iter()
            .zip(&f)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        f = next;
        diffs.push(diff);
        if !diff.is_finite() {
            break;
        }
        if diff < cfg.tol {
            converged = true;
            break;
        }
    }
    Ok(PicardSolution {
        t,
        f,
        u,
        sweeps: diffs.len(),
        converged,
        sweep_diffs: diffs,
        inner_failures,
        contraction,
    })
}

/// Operator image of f̂(t) = (t−a)² at the nodes, the forcing for the manufactured problem.
pub fn manufactured_forcing(a: f64, b: f64, n: usize, order: FractionalOrder) -> Result<Vec<f64>> {
    let q = QuadConfig::new(1e-14, 1e-14, 8192)?;
    let h = (b - a) / n as f64;
    (0..=n)
        .map(|i| {
            let t = if i == n { b } else { a + i as f64 * h };
            Ok(crate::fracderiv::sig_deriv(|s| 2.0 * (s - a), a, t, order, &q)?.value)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::Convention;

    fn full(alpha: f64) -> FractionalOrder {
        FractionalOrder::full(alpha).unwrap()
    }

    #[test]
    fn build_validation() {
        assert!(build_volterra(0.0, 1.0, 7, full(0.5)).is_err());
        assert!(build_volterra(0.0, 1.0, 4097, full(0.5)).is_err());
        assert!(build_volterra(1.0, 0.0, 10, full(0.5)).is_err());
        assert!(build_volterra(0.0, 1.0, 10, full(1.0)).is_err());
    }

    #[test]
    fn lower_triangular_positive_diagonal() {
        let s = build_volterra(0.0, 1.0, 20, full(0.6)).unwrap();
        for i in 1..=20 {
            assert!(s.entry(i, i) > 0.0);
            assert_eq!(s.entry(i - 1, i), 0.0);
        }
        assert!(s.apply(&[0.0; 21]).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn linear_input_matches_closed_form() {
        let s = build_volterra(0.0, 1.0, 2000, full(0.5)).unwrap();
        let out = s.apply(&vec![1.0; 2001]);
        for (t, v) in s.nodes().iter().zip(out) {
            assert!((v - (t / 0.5).tanh()).abs() < 1e-5);
        }
    }

    #[test]
    fn cubic_error_is_second_order() {
        let err = |n: usize| {
            let s = build_volterra(0.0, 1.0, n, full(0.5)).unwrap();
            let d: Vec<f64> = s.nodes().iter().map(|t| 3.0 * t * t).collect();
            let out = s.apply(&d);
            let q = QuadConfig::new(1e-14, 1e-14, 4096).unwrap();
            s.nodes()
                .iter()
                .zip(out)
                .map(|(&t, v)| {
                    (v - crate::fracderiv::sig_deriv(|x| 3.0 * x * x, 0.0, t, full(0.5), &q)
                        .unwrap()
                        .value)
                        .abs()
                })
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(200), err(400));
        assert!((e1 / e2).log2() > 1.9, "{e1} {e2}");
    }

    #[test]
    fn forward_solve_inverts_apply() {
        for n in [8, 100, 4096] {
            let s = build_volterra(-1.0, 2.0, n, full(0.7)).unwrap();
            let d: Vec<f64> = s.nodes().iter().map(|t| (3.0 * t).sin() + t).collect();
            let u = s.apply(&d);
            let back = s.forward_solve(&u, d[0]);
            let err = back
                .iter()
                .zip(&d)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-9, "n={n} err={err}");
        }
    }

    #[test]
    fn condition_grows_as_h_shrinks() {
        let c1 = build_volterra(0.0, 1.0, 100, full(0.5))
            .unwrap()
            .condition_estimate();
        let c2 = build_volterra(0.0, 1.0, 400, full(0.5))
            .unwrap()
            .condition_estimate();
        assert!(c1 > 1.0 && c2 > c1, "{c1} {c2}");
    }

    #[test]
    fn claimed_solution_examples() {
        let r = thm29_residual(|_| 0.0, 1.0, 0.0, 1.0, 100, full(0.5)).unwrap();
        assert_eq!(r.max_residual, 0.0);
        let r = thm29_residual(|t| t, 0.0, 0.0, 1.0, 1000, full(0.5)).unwrap();
        // extended-precision maximum over the same nodes
        assert!(
            (r.max_residual - 0.257_184_499_727_792_7).abs() < 1e-9,
            "{}",
            r.max_residual
        );
        // g = c: f is constant, so the residual is |c|·max t
        let r = thm29_residual(|_| 0.3, 0.0, 0.0, 2.0, 100, full(0.5)).unwrap();
        assert!((r.max_residual - 0.6).abs() < 1e-12);
    }

    #[test]
    fn contraction_examples() {
        for alpha in [0.1, 0.5, 0.9] {
            let c = contraction_check(0.5, full(alpha)).unwrap();
            assert!((c.value - 0.5).abs() < 1e-15 && c.ok);
            assert!(!contraction_check(1.0, full(alpha)).unwrap().ok);
            let p = FractionalOrder::new(alpha, Convention::PaperHalfMass).unwrap();
            assert!(contraction_check(1.9, p).unwrap().ok);
            assert!(!contraction_check(2.0, p).unwrap().ok);
        }
        assert!(contraction_check(0.0, full(0.5)).is_err());
    }

    #[test]
    fn picard_zero_rhs() {
        let s = picard_solve(
            |_, _, _| 0.0,
            0.0,
            1.0,
            50,
            1.5,
            full(0.5),
            &PicardConfig::new(0.5),
        )
        .unwrap();
        assert!(s.converged);
        assert!(s.f.iter().all(|v| *v == 1.5));
        assert!(s.u.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn picard_manufactured_solution() {
        let o = full(0.5);
        let n = 2000;
        let w = manufactured_forcing(0.0, 1.0, n, o).unwrap();
        let h = 1.0 / n as f64;
        let s = picard_solve(
            move |t, _, _| w[(t / h).round() as usize],
            0.0,
            1.0,
            n,
            0.0,
            o,
            &PicardConfig::new(0.5),
        )
        .unwrap();
        assert!(s.converged);
        let err =
            s.t.iter()
                .zip(&s.f)
                .map(|(t, f)| (f - t * t).abs())
                .fold(0.0, f64::max);
        assert!(err <= 1e-4, "{err}");
    }

    #[test]
    fn picard_linear_feedback_converges() {
        let s = picard_solve(
            |_, f, _| 0.1 * f,
            0.0,
            1.0,
            200,
            1.0,
            full(0.5),
            &PicardConfig::new(0.1),
        )
        .unwrap();
        assert!(s.converged);
        assert!(s.sweeps <= 50);
        assert!(s.sweep_diffs.windows(2).skip(1).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn picard_gates_on_contraction() {
        let r = picard_solve(
            |_, f, _| f,
            0.0,
            1.0,
            50,
            1.0,
            full(0.5),
            &PicardConfig::new(2.0),
        );
        assert!(matches!(r, Err(FracError::ContractionViolated(_))));
    }
}
