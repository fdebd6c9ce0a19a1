//! Fractional gradient descent with the previous iterate as lower limit,
//! a classical baseline, and a coordinatewise vector version.

use std::io::Write;

use serde::Serialize;

use crate::error::{FracError, Result};
use crate::kernels::{c1_constant, sech2, FractionalOrder};
use crate::l1reg::{l1_objective, smoothed_abs_grad, L1Config};
use crate::quadrature::{integrate_pieces, QuadConfig};

/// Window used when t_{k−1} = t_k.
pub const DEGENERATE_WINDOW: f64 = 1e-8;
/// |t| beyond this counts as divergence.
pub const DIVERGENCE_GUARD: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DescentConfig {
    pub mu: f64,
    pub order: FractionalOrder,
    pub max_iter: usize,
    pub step_tol: f64,
    pub grad_tol: f64,
    pub t_init: f64,
    pub t_prev_init: f64,
}

impl DescentConfig {
    /// Defaults: 10 000 iterations, step_tol 1e−12, grad_tol 1e−10, t₋₁ = t₀ − 0.1·max(1, |t₀|).
    pub fn new(mu: f64, order: FractionalOrder, t_init: f64) -> Result<Self> {
        let cfg = Self {
            mu,
            order,
            max_iter: 10_000,
            step_tol: 1e-12,
            grad_tol: 1e-10,
            t_init,
            t_prev_init: default_prev(t_init),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu < 1.0) {
            return Err(FracError::InvalidConfig(format!(
                "mu must lie in (0, 1), got {}",
                self.mu
            )));
        }
        if self.max_iter == 0 {
            return Err(FracError::InvalidConfig("max_iter must be positive".into()));
        }
        if !(self.step_tol > 0.0) || !(self.grad_tol > 0.0) {
            return Err(FracError::InvalidConfig(format!(
                "step_tol and grad_tol must be positive, got {} and {}",
                self.step_tol, self.grad_tol
            )));
        }
        if !self.t_init.is_finite() || !self.t_prev_init.is_finite() {
            return Err(FracError::InvalidConfig(
                "starting points must be finite".into(),
            ));
        }
        Ok(())
    }
}

/// t₀ − 0.1·max(1, |t₀|).
pub fn default_prev(t0: f64) -> f64 {
    t0 - 0.1 * t0.abs().max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    StepTol,
    GradTol,
    MaxIter,
    Diverged,
}

impl Termination {
    pub fn label(self) -> &'static str {
        match self {
            Termination::StepTol => "step-tol",
            Termination::GradTol => "grad-tol",
            Termination::MaxIter => "max-iter",
            Termination::Diverged => "diverged",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepFlag {
    /// t_{k−1} > t_k; integrated over [t_k, t_{k−1}].
    Swapped,
    /// t_{k−1} = t_k; the floor window was used.
    DegenerateWindow,
    /// Quadrature budget exhausted.
    NotConverged,
    /// Smoothed ℓ1 term included in the integrand.
    SmoothedL1,
}

impl StepFlag {
    pub fn label(self) -> &'static str {
        match self {
            StepFlag::Swapped => "swapped",
            StepFlag::DegenerateWindow => "degenerate-window",
            StepFlag::NotConverged => "quad-not-converged",
            StepFlag::SmoothedL1 => "smoothed-l1",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub next: f64,
    /// The derivative value the step used.
    pub grad_proxy: f64,
    pub flags: Vec<StepFlag>,
}

/// Scalar run history. Entry k of `steps`, `grad_proxy`, and `flags`
/// describes the update from `iterates[k]` to `iterates[k+1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DescentTrace {
    pub t_prev_init: f64,
    pub iterates: Vec<f64>,
    pub steps: Vec<f64>,
    pub objective: Vec<f64>,
    pub grad_proxy: Vec<f64>,
    pub flags: Vec<Vec<StepFlag>>,
    pub termination: Termination,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DescentSummary {
    pub termination: Termination,
    pub iterations: usize,
    pub final_iterate: f64,
    pub final_objective: f64,
    pub swapped_steps: usize,
    pub degenerate_windows: usize,
}

impl DescentTrace {
    fn start(t0: f64, t_prev: f64, f0: f64) -> Self {
        Self {
            t_prev_init: t_prev,
            iterates: vec![t0],
            steps: Vec::new(),
            objective: vec![f0],
            grad_proxy: Vec::new(),
            flags: Vec::new(),
            termination: Termination::MaxIter,
        }
    }

    fn push(&mut self, step: StepOutcome, objective: f64) {
        let last = *self.iterates.last().expect("trace starts with t0");
        self.steps.push((step.next - last).abs());
        self.iterates.push(step.next);
        self.objective.push(objective);
        self.grad_proxy.push(step.grad_proxy);
        self.flags.push(step.flags);
    }

    pub fn iterations(&self) -> usize {
        self.steps.len()
    }

    pub fn final_iterate(&self) -> f64 {
        *self.iterates.last().expect("trace starts with t0")
    }

    /// steps[k+1]/steps[k] for k ≥ `from`, skipping zero steps.
    pub fn step_ratios(&self, from: usize) -> Vec<f64> {
        self.steps
            .windows(2)
            .skip(from)
            .filter(|w| w[0] > 0.0)
            .map(|w| w[1] / w[0])
            .collect()
    }

    pub fn summary(&self) -> DescentSummary {
        let count = |f: StepFlag| self.flags.iter().filter(|fl| fl.contains(&f)).count();
        DescentSummary {
            termination: self.termination,
            iterations: self.iterations(),
            final_iterate: self.final_iterate(),
            final_objective: *self.objective.last().expect("trace starts with f(t0)"),
            swapped_steps: count(StepFlag::Swapped),
            degenerate_windows: count(StepFlag::DegenerateWindow),
        }
    }

    /// CSV with columns k, t_k, step, f_t, grad_proxy, flags; the last row has no step.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let err = |e: csv::Error| FracError::InvalidConfig(format!("trace csv: {e}"));
        w.write_record(["k", "t_k", "step", "f_t", "grad_proxy", "flags"])
            .map_err(err)?;
        for (k, t) in self.iterates.iter().enumerate() {
            let (step, proxy, flags) = match self.steps.get(k) {
                Some(s) => (
                    s.to_string(),
                    self.grad_proxy[k].to_string(),
                    self.flags[k]
                        .iter()
                        .map(|f| f.label())
                        .collect::<Vec<_>>()
                        .join("|"),
                ),
                None => (String::new(), String::new(), String::new()),
            };
            w.write_record([
                k.to_string(),
                t.to_string(),
                step,
                self.objective[k].to_string(),
                proxy,
                flags,
            ])
            .map_err(err)?;
        }
        w.flush()
            .map_err(|e| FracError::InvalidConfig(format!("trace csv: {e}")))
    }
}

/// C₁(α)·∫ over the positively oriented window between t_{k−1} and t_k of g(s)·sech²((s−t_k)/(1−α)).
fn window_derivative(
    g: &mut dyn FnMut(f64) -> f64,
    t_k: f64,
    t_km1: f64,
    order: FractionalOrder,
    q: &QuadConfig,
    flags: &mut Vec<StepFlag>,
) -> Result<f64> {
    if order.is_classical() {
        return Ok(g(t_k));
    }
    let c1 = c1_constant(order)?;
    let w = order.width()?;
    let (lo, hi) = if t_km1 == t_k {
        flags.push(StepFlag::DegenerateWindow);
        (t_k - DEGENERATE_WINDOW, t_k)
    } else if t_km1 > t_k {
        flags.push(StepFlag::Swapped);
        (t_k, t_km1)
    } else {
        (t_km1, t_k)
    };
    let mut breaks = vec![lo];
    for m in [-24.0, -8.0, -2.0, -0.5, 0.5, 2.0, 8.0, 24.0] {
        let p = t_k + m * w;
        if p > lo && p < hi {
            breaks.push(p);
        }
    }
    breaks.push(hi);
    let r = integrate_pieces(|s| g(s) * sech2((s - t_k) / w), &breaks, &q.scaled_abs(c1));
    if !r.converged {
        flags.push(StepFlag::NotConverged);
    }
    Ok(c1 * r.value)
}

/// One update t_{k+1} = t_k − μ·D, with D the sigmoidal derivative over the window [t_{k−1}, t_k].
pub fn fgd_step(
    fprime: impl Fn(f64) -> f64,
    t_k: f64,
    t_km1: f64,
    cfg: &DescentConfig,
    q: &QuadConfig,
) -> Result<StepOutcome> {
    let mut flags = Vec::new();
    let mut g = |s: f64| fprime(s);
    let d = window_derivative(&mut g, t_k, t_km1, cfg.order, q, &mut flags)?;
    Ok(StepOutcome {
        next: t_k - cfg.mu * d,
        grad_proxy: d,
        flags,
    })
}

fn diverged(t: f64) -> bool {
    !t.is_finite() || t.abs() > DIVERGENCE_GUARD
}

fn run_scalar(
    f: &dyn Fn(f64) -> f64,
    fprime: &dyn Fn(f64) -> f64,
    cfg: &DescentConfig,
    mut step: impl FnMut(f64, f64) -> Result<StepOutcome>,
) -> Result<DescentTrace> {
    cfg.validate()?;
    let mut trace = DescentTrace::start(cfg.t_init, cfg.t_prev_init, f(cfg.t_init));
    if fprime(cfg.t_init).abs() < cfg.grad_tol {
        trace.termination = Termination::GradTol;
        return Ok(trace);
    }
    let (mut prev, mut t) = (cfg.t_prev_init, cfg.t_init);
    for _ in 0..cfg.max_iter {
        let out = step(t, prev)?;
        let next = out.next;
        let size = (next - t).abs();
        trace.push(out, if diverged(next) { f64::NAN } else { f(next) });
        if diverged(next) {
            trace.termination = Termination::Diverged;
            return Ok(trace);
        }
        if fprime(next).abs() < cfg.grad_tol {
            trace.termination = Termination::GradTol;
            return Ok(trace);
        }
        if size < cfg.step_tol {
            trace.termination = Termination::StepTol;
            return Ok(trace);
        }
        prev = t;
        t = next;
    }
    trace.termination = Termination::MaxIter;
    Ok(trace)
}

/// Fractional gradient descent until a tolerance, the iteration cap, or the divergence guard.
pub fn fgd_run(
    f: impl Fn(f64) -> f64,
    fprime: impl Fn(f64) -> f64,
    cfg: &DescentConfig,
    q: &QuadConfig,
) -> Result<DescentTrace> {
    q.validate()?;
    run_scalar(&f, &fprime, cfg, |t, prev| {
        fgd_step(&fprime, t, prev, cfg, q)
    })
}

/// Classical gradient descent x_{k+1} = x_k − μ·f'(x_k) with the same trace format.
pub fn gd_run(
    f: impl Fn(f64) -> f64,
    fprime: impl Fn(f64) -> f64,
    cfg: &DescentConfig,
) -> Result<DescentTrace> {
    run_scalar(&f, &fprime, cfg, |t, _| {
        let g = fprime(t);
        Ok(StepOutcome {
            next: t - cfg.mu * g,
            grad_proxy: g,
            flags: Vec::new(),
        })
    })
}

/// Vector run history; `steps` holds the max-norm change per iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VectorTrace {
    pub prev_init: Vec<f64>,
    pub iterates: Vec<Vec<f64>>,
    pub steps: Vec<f64>,
    pub objective: Vec<f64>,
    pub grad_proxy: Vec<Vec<f64>>,
    pub flags: Vec<Vec<Vec<StepFlag>>>,
    pub termination: Termination,
}

impl VectorTrace {
    pub fn dim(&self) -> usize {
        self.iterates[0].len()
    }

    pub fn final_iterate(&self) -> &[f64] {
        self.iterates.last().expect("trace starts with x0")
    }

    /// The scalar trace of coordinate `j`, with the full objective.
    pub fn coordinate(&self, j: usize) -> DescentTrace {
        let iterates: Vec<f64> = self.iterates.iter().map(|x| x[j]).collect();
        DescentTrace {
            t_prev_init: self.prev_init[j],
            steps: iterates.windows(2).map(|w| (w[1] - w[0]).abs()).collect(),
            iterates,
            objective: self.objective.clone(),
            grad_proxy: self.grad_proxy.iter().map(|g| g[j]).collect(),
            flags: self.flags.iter().map(|f| f[j].clone()).collect(),
            termination: self.termination,
        }
    }
}

/// Coordinatewise fractional descent; each coordinate uses its own previous
/// value as the lower limit. With `l1`, the smoothed ℓ1 gradient is added to
/// the integrand and the objective includes λ·‖x‖₁.
pub fn fgd_run_vector(
    f: impl Fn(&[f64]) -> f64,
    grad: impl Fn(&[f64]) -> Vec<f64>,
    x0: &[f64],
    cfg: &DescentConfig,
    l1: Option<&L1Config>,
    q: &QuadConfig,
) -> Result<VectorTrace> {
    cfg.validate()?;
    q.validate()?;
    if x0.is_empty() {
        return Err(FracError::InvalidConfig(
            "dimension must be at least 1".into(),
        ));
    }
    let lambda = l1.map_or(0.0, |c| c.lambda());
    let objective = |x: &[f64]| l1_objective(&f, x, lambda);
    let penalty = |v: f64| l1.map_or(0.0, |c| smoothed_abs_grad(v, c));
    let stationarity = |x: &[f64]| {
        grad(x)
            .iter()
            .zip(x)
            .map(|(g, v)| (g + penalty(*v)).abs())
            .fold(0.0, f64::max)
    };

    let prev_init: Vec<f64> = x0.iter().map(|&v| default_prev(v)).collect();
    let mut trace = VectorTrace {
        prev_init: prev_init.clone(),
        iterates: vec![x0.to_vec()],
        steps: Vec::new(),
        objective: vec![objective(x0)],
        grad_proxy: Vec::new(),
        flags: Vec::new(),
        termination: Termination::MaxIter,
    };
    if stationarity(x0) < cfg.grad_tol {
        trace.termination = Termination::GradTol;
        return Ok(trace);
    }
    let mut prev = prev_init;
    let mut x = x0.to_vec();
    for _ in 0..cfg.max_iter {
        let mut next = x.clone();
        let mut proxies = Vec::with_capacity(x.len());
        let mut all_flags = Vec::with_capacity(x.len());
        for j in 0..x.len() {
            let mut probe = x.clone();
            let mut g = |s: f64| {
                probe[j] = s;
                grad(&probe)[j] + penalty(s)
            };
            let mut flags = Vec::new();
            if lambda > 0.0 {
                flags.push(StepFlag::SmoothedL1);
            }
            let d = window_derivative(&mut g, x[j], prev[j], cfg.order, q, &mut flags)?;
            next[j] = x[j] - cfg.mu * d;
            proxies.push(d);
            all_flags.push(flags);
        }
        let size = next
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let blown = next.iter().any(|v| diverged(*v));
        trace.steps.push(size);
        trace
            .objective
            .push(if blown { f64::NAN } else { objective(&next) });
        trace.iterates.push(next.clone());
        trace.grad_proxy.push(proxies);
        trace.flags.push(all_flags);
        if blown {
            trace.termination = Termination::Diverged;
            return Ok(trace);
        }
        if stationarity(&next) < cfg.grad_tol {
            trace.termination = Termination::GradTol;
            return Ok(trace);
        }
        if size < cfg.step_tol {
            trace.termination = Termination::StepTol;
            return Ok(trace);
        }
        prev = std::mem::replace(&mut x, next);
    }
    Ok(trace)
}
