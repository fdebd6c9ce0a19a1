//! Desk-scale numerical checks of every theorem, collected into a JSON report.
//!
//! Statuses are data: `confirmed` when the statement holds as written,
//! `confirmed-with-correction` when it holds after a documented change to a
//! constant or hypothesis, `refuted-as-printed` when the printed claim fails.

use std::collections::BTreeMap;
use std::f64::consts::LN_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{FracError, Result};
use crate::fde::{
    build_volterra, contraction_check, manufactured_forcing, picard_solve, thm29_residual,
    PicardConfig,
};
use crate::fracderiv::{
    commutation_residual, maximal_bound_check, ml_bound_check, sandwich_bounds, sig_deriv,
    sig_deriv_truncated, sig_memory_length, truncation_error_bound,
};
use crate::kernels::{c1_constant, sech2, Convention, FractionalOrder};
use crate::l1reg::{smoothed_abs, smoothed_abs_grad, L1Config};
use crate::optimizer::{fgd_run, DescentConfig, Termination};
use crate::quadrature::QuadConfig;
use crate::special::MLParams;
use crate::transforms::{
    fourier_numeric, laplace_numeric, t1_multiplier, t1_multiplier_paper, t2_multiplier,
    verify_fourier_identity, verify_laplace_identity, FourierPoint, LaplacePoint,
};

pub const SCHEMA_VERSION: &str = "1";

pub const THEOREM_IDS: [&str; 12] = [
    "2.1", "2.2", "2.3", "2.4", "2.5", "2.6a", "2.7a", "2.7b", "2.8", "2.9", "2.10", "2.11",
];

/// Distance |t − 2| where the extended-precision descent run on (t−2)² stalls
/// (μ = 0.1, α = 0.9, t₀ = 0, t₋₁ = −0.1).
pub const FGD_ORACLE_FULL: f64 = 0.242_221_976_245_715_2;
pub const FGD_ORACLE_HALF: f64 = 0.678_357_386_647_391;
/// Relative band around the oracle distance.
pub const FGD_ORACLE_BAND: f64 = 0.2;
/// Max residual of the claimed solution for g(t) = t on 1000 cells of [0, 1], α = 0.5, full mass.
pub const CLAIMED_RESIDUAL_ORACLE: f64 = 0.257_184_499_727_792_7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Confirmed,
    ConfirmedWithCorrection,
    RefutedAsPrinted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremResult {
    pub theorem: String,
    pub convention: Convention,
    pub status: Status,
    pub metrics: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Finding {
    pub theorem: String,
    pub convention: Convention,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub conventions: Vec<Convention>,
    /// Theorem ids to run; all when `None`.
    pub only: Option<Vec<String>>,
    pub seed: u64,
    pub quad: QuadConfig,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            conventions: vec![Convention::FullMass],
            only: None,
            seed: 0,
            quad: QuadConfig::default(),
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        self.quad.validate()?;
        if self.conventions.is_empty() {
            return Err(FracError::InvalidConfig(
                "at least one convention is required".into(),
            ));
        }
        if let Some(only) = &self.only {
            if let Some(bad) = only.iter().find(|id| !THEOREM_IDS.contains(&id.as_str())) {
                return Err(FracError::InvalidConfig(format!(
                    "unknown theorem id {bad:?}"
                )));
            }
        }
        Ok(())
    }

    fn selected(&self) -> Vec<&'static str> {
        THEOREM_IDS
            .iter()
            .copied()
            .filter(|id| self.only.as_ref().is_none_or(|o| o.iter().any(|x| x == id)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: String,
    pub command: String,
    pub config: SuiteConfig,
    pub results: Vec<TheoremResult>,
    pub findings: Vec<Finding>,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| FracError::InvalidConfig(e.to_string()))
    }

    pub fn result(&self, theorem: &str, convention: Convention) -> Option<&TheoremResult> {
        self.results
            .iter()
            .find(|r| r.theorem == theorem && r.convention == convention)
    }
}

struct Check {
    status: Status,
    metrics: BTreeMap<String, f64>,
    findings: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Self {
            status: Status::Confirmed,
            metrics: BTreeMap::new(),
            findings: Vec::new(),
        }
    }

    fn metric(&mut self, key: &str, v: f64) {
        self.metrics.insert(key.to_string(), v);
    }

    fn flag(&mut self, key: &str, v: bool) {
        self.metric(key, f64::from(u8::from(v)));
    }
}

pub fn run_suite(cfg: &SuiteConfig) -> Result<Report> {
    cfg.validate()?;
    let mut results = Vec::new();
    let mut findings = Vec::new();
    for &conv in &cfg.conventions {
        for id in cfg.selected() {
            let c = run_check(id, conv, cfg)?;
            findings.extend(c.findings.into_iter().map(|message| Finding {
                theorem: id.into(),
                convention: conv,
                message,
            }));
            results.push(TheoremResult {
                theorem: id.into(),
                convention: conv,
                status: c.status,
                metrics: c.metrics,
            });
        }
    }
    Ok(Report {
        schema_version: SCHEMA_VERSION.into(),
        command: "theorem-suite".into(),
        config: cfg.clone(),
        results,
        findings,
    })
}

fn run_check(id: &str, conv: Convention, cfg: &SuiteConfig) -> Result<Check> {
    let q = &cfg.quad;
    match id {
        "2.1" => reduction(conv, q),
        "2.2" => commutation(conv, q),
        "2.3" => memory(conv, cfg.seed, q),
        "2.4" => l1_smoothing(conv),
        "2.5" => mittag_leffler(conv, cfg.seed, q),
        "2.6a" => maximal(conv, q),
        "2.7a" => laplace(conv, q),
        "2.7b" => fourier(conv, q),
        "2.8" => sandwich(conv, q),
        "2.9" => claimed_solution(conv),
        "2.10" => picard(conv),
        "2.11" => descent(conv, q),
        _ => Err(FracError::InvalidConfig(format!(
            "unknown theorem id {id:?}"
        ))),
    }
}

fn order(alpha: f64, conv: Convention) -> Result<FractionalOrder> {
    FractionalOrder::new(alpha, conv)
}

/// Limit of the one-sided operator as α → 1⁻ relative to f'(t).
fn one_sided_mass(conv: Convention) -> f64 {
    match conv {
        Convention::FullMass => 1.0,
        Convention::PaperHalfMass => 0.5,
    }
}

fn reduction(conv: Convention, q: &QuadConfig) -> Result<Check> {
    let mut c = Check::new();
    let target = 1f64.cos();
    let mut errs = Vec::new();
    let mut errs_scaled = Vec::new();
    for alpha in [0.9, 0.99, 0.999] {
        let v = sig_deriv(f64::cos, 0.0, 1.0, order(alpha, conv)?, q)?.value;
        errs.push((v - target).abs());
        errs_scaled.push((v - one_sided_mass(conv) * target).abs());
        c.metric(&format!("abs_err_alpha_{alpha}"), (v - target).abs());
    }
    let decreasing = |e: &[f64]| e.windows(2).all(|w| w[1] < w[0]) && e[2] <= 5e-3;
    c.status = if decreasing(&errs) {
        Status::Confirmed
    } else if decreasing(&errs_scaled) {
        c.findings.push(format!(
            "one-sided limit is {}·f'(t) under this normalization; error against that limit at α = 0.999 is {:.3e}",
            one_sided_mass(conv),
            errs_scaled[2]
        ));
        Status::ConfirmedWithCorrection
    } else {
        Status::RefutedAsPrinted
    };
    Ok(c)
}

fn commutation(conv: Convention, q: &QuadConfig) -> Result<Check> {
    let mut c = Check::new();
    let mut worst = 0.0f64;
    for (a, t, alpha) in [(0.0, 1.0, 0.5), (0.0, 2.0, 0.7), (1.0, 3.0, 0.9)] {
        let r = commutation_residual(
            move |s| 2.0 * (s - a),
            |_| 2.0,
            a,
            t,
            order(alpha, conv)?,
            q,
        )?;
        worst = worst.max(r.residual);
    }
    c.metric("max_residual", worst);
    let b = commutation_residual(|_| 1.0, |_| 0.0, 0.0, 1.0, order(0.5, conv)?, q)?;
    let gap = (b.residual - b.boundary_term).abs();
    c.metric("boundary_term", b.boundary_term);
    c.metric("boundary_gap", gap);
    if !(worst <= 1e-5 && gap <= 1e-5) {
        c.status = Status::RefutedAsPrinted;
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MemoryCase {
    pub t: f64,
    pub memory: f64,
    pub alpha: f64,
}

/// Seeded (t, L, α) with 0 < L < t, for f = sin on [0, t].
pub fn memory_cases(seed: u64, count: usize) -> Vec<MemoryCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let t = rng.gen_range(1.0..10.0);
            let memory = rng.gen_range(0.05..t);
            let alpha = rng.gen_range(0.1..0.95);
            MemoryCase { t, memory, alpha }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MemoryOutcome {
    pub measured: f64,
    pub bound: f64,
}

pub fn memory_outcome(case: MemoryCase, conv: Convention, q: &QuadConfig) -> Result<MemoryOutcome> {
    let o = order(case.alpha, conv)?;
    let full = sig_deriv(f64::cos, 0.0, case.t, o, q)?;
    let trunc = sig_deriv_truncated(f64::cos, case.t, case.memory, o, q)?;
    Ok(MemoryOutcome {
        measured: (full.value - trunc.value).abs(),
        bound: truncation_error_bound(case.memory, 1.0, o)?,
    })
}

fn memory(conv: Convention, seed: u64, q: &QuadConfig) -> Result<Check> {
    let mut c = Check::new();
    let mut violations = 0;
    let mut ratio = 0.0f64;
    for case in memory_cases(seed, 20) {
        let m = memory_outcome(case, conv, q)?;
        violations += usize::from(m.measured > m.bound + 1e-10);
        ratio = ratio.max(m.measured / m.bound);
    }
    c.metric("cases", 20.0);
    c.metric("violations", violations as f64);
    c.metric("max_measured_over_bound", ratio);
    let o = order(0.5, conv)?;
    let eps = 0.01;
    let plug = truncation_error_bound(sig_memory_length(eps, 1.0, o)?, 1.0, o)?;
    c.metric("plug_in_bound_at_eps_0.01", plug);
    if (plug - eps).abs() > 1e-12 {
        c.findings.push(format!(
            "memory length (1-α)·sqrt(C1·C0/ε) plugged into the truncation bound gives {plug:.10} instead of ε = {eps}"
        ));
    }
    if violations > 0 {
        c.status = Status::RefutedAsPrinted;
    }
    Ok(c)
}

fn l1_smoothing(conv: Convention) -> Result<Check> {
    let mut c = Check::new();
    let target = one_sided_mass(conv);
    let cfg = L1Config::with_default_a(1.0, order(0.9999, conv)?)?;
    let dev = (smoothed_abs_grad(cfg.a() + 1.0, &cfg) - target).abs();
    c.metric("limit_target", target);
    c.metric("deviation_alpha_0.9999", dev);
    let fd = L1Config::with_default_a(1.0, order(0.6, conv)?)?;
    let err = |h: f64| {
        ((smoothed_abs(0.3 + h, &fd) - smoothed_abs(0.3 - h, &fd)) / (2.0 * h)
            - smoothed_abs_grad(0.3, &fd))
        .abs()
    };
    let fd_order = (err(1e-2) / err(5e-3)).log2();
    c.metric("antiderivative_fd_order", fd_order);
    if !(dev <= 1e-6 && (fd_order - 2.0).abs() < 0.1) {
        c.status = Status::RefutedAsPrinted;
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MlCase {
    pub gamma: f64,
    pub eta: f64,
    pub a: f64,
    pub t: f64,
    pub alpha: f64,
}

/// Twelve cases from the 64-point grid γ, η ∈ {1, 2}, a ∈ {0.25, 0.5},
/// t ∈ {1, 1.5}, α ∈ {0.3, 0.5, 0.7, 0.9}; (1, 1, 0.5, 1, 0.5) is always first.
pub fn ml_cases(seed: u64) -> Vec<MlCase> {
    let anchor = MlCase {
        gamma: 1.0,
        eta: 1.0,
        a: 0.5,
        t: 1.0,
        alpha: 0.5,
    };
    let mut grid = Vec::new();
    for gamma in [1.0, 2.0] {
        for eta in [1.0, 2.0] {
            for a in [0.25, 0.5] {
                for t in [1.0, 1.5] {
                    for alpha in [0.3, 0.5, 0.7, 0.9] {
                        let case = MlCase {
                            gamma,
                            eta,
                            a,
                            t,
                            alpha,
                        };
                        if case != anchor {
                            grid.push(case);
                        }
                    }
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![anchor];
    for _ in 0..11 {
        out.push(grid.swap_remove(rng.gen_range(0..grid.len())));
    }
    out
}

fn mittag_leffler(conv: Convention, seed: u64, q: &QuadConfig) -> Result<Check> {
    let mut c = Check::new();
    let (mut printed, mut corrected) = (0usize, 0usize);
    let mut excess = f64::NEG_INFINITY;
    for m in ml_cases(seed) {
        let r = ml_bound_check(
            MLParams::new(m.gamma, m.eta)?,
            m.a,
            m.t,
            order(m.alpha, conv)?,
            q,
        )?;
        printed += usize::from(!r.holds);
        corrected += usize::from(!r.holds_corrected);
        excess = excess.max(r.lhs - r.rhs);
    }
    c.metric("cases", 12.0);
    c.metric("printed_violations", printed as f64);
    c.metric("corrected_violations", corrected as f64);
    c.metric("max_lhs_minus_printed_rhs", excess);
    c.status = match (printed, corrected) {
        (0, _) => Status::Confirmed,
        (_, 0) => {
            c.findings.push(format!(
                "printed bound C1·(E(t−a) − 1/Γ(η)) fails on {printed} of 12 cases (max excess {excess:.6}); C1·(E(t) − E(a)) holds on all"
            ));
            Status::RefutedAsPrinted
        }
        _ => Status::RefutedAsPrinted,
    };
    Ok(c)
}

fn maximal(conv: Convention, q: &QuadConfig) -> Result<Check> {
    let mut c = Check::new();
    let fps: [fn(f64) -> f64; 3] = [|s| 2.0 * s, f64::cos, f64::exp];
    let (mut cases, mut violations) = (0, 0);
    let mut ratio = 0.0f64;
    for fp in fps {
        for alpha in [0.3, 0.5, 0.8] {
            for t in [0.5, 1.0] {
                let r = maximal_bound_check(fp, 1.0, t, order(alpha, conv)?, q)?;
                cases += 1;
                violations += usize::from(!r.holds);
                ratio = ratio.max(r.lhs / r.rhs);
            }
        }
    }
    c.metric("cases", cases as f64);
    c.metric("violations", violations as f64);
    c.metric("max_lhs_over_rhs", ratio);
    c.status = if violations == 0 {
        c.findings
            .push("checked with the centered maximal function over radii in (0, T]".into());
        Status::ConfirmedWithCorrection
    } else {
        Status::RefutedAsPrinted
    };
    Ok(c)
}

fn laplace(conv: Convention, q: &QuadConfig) -> Result<Check> {
    let mut c = Check::new();
    let mut worst = 0.0f64;
    for s in [0.5, 1.0, 2.0, 4.0, 8.0] {
        let p = LaplacePoint::real(s)?;
        worst = worst.max((laplace_numeric(sech2, p, q).value - t1_multiplier(p)).norm());
    }
    let at2 = laplace_numeric(sech2, LaplacePoint::real(2.0)?, q).value.re;
    let paper2 = t1_multiplier_paper(2.0.into()).re;
    c.metric("max_err_corrected_t1", worst);
    c.metric("quadrature_at_s_2", at2);
    c.metric("printed_t1_at_s_2", paper2);
    let id = verify_laplace_identity(
        |_| 1.0,
        |t| t,
        order(0.5, conv)?,
        LaplacePoint::real(2.0)?,
        q,
    )?;
    c.metric("identity_residual", id.residual);
    c.metric("identity_residual_printed", id.residual_paper);
    let paper_ok = (paper2 - at2).abs() <= 1e-8;
    c.status = if worst <= 1e-8 && id.residual <= 1e-6 {
        if paper_ok {
            Status::Confirmed
        } else {
            c.findings.push(format!(
                "T1(s) = (s/2)(Ψ((s+2)/4) − Ψ(s/4)) − 1 matches quadrature (T1(2) = 2ln2 − 1 = {:.7}); the printed +1 form gives {paper2:.7}",
                2.0 * LN_2 - 1.0
            ));
            Status::ConfirmedWithCorrection
        }
    } else {
        Status::RefutedAsPrinted
    };
    Ok(c)
}

fn fourier(conv: Convention, q: &QuadConfig) -> Result<Check> {
    let mut c = Check::new();
    let mut worst = 0.0f64;
    for om in [0.25, 0.5, 1.0, 2.0] {
        let p = FourierPoint::new(om)?;
        worst = worst.max((fourier_numeric(sech2, p, q).value - om * t2_multiplier(p)).norm());
    }
    c.metric("max_err_omega_t2", worst);
    let gauss = |t: f64| (-t * t).exp();
    let dgauss = |t: f64| -2.0 * t * (-t * t).exp();
    let id = verify_fourier_identity(dgauss, gauss, order(0.5, conv)?, FourierPoint::new(1.0)?, q)?;
    c.metric("identity_residual", id.residual_pinned);
    c.metric("identity_residual_printed", id.residual_paper);
    c.status = if worst <= 1e-6 && id.residual_pinned <= 1e-5 {
        if id.residual_paper <= 1e-5 {
            Status::Confirmed
        } else {
            c.findings.push(format!(
                "multiplier holds for the bilateral operator as C1·sqrt(2π)·(−iω)·F(f)·(1−α)·((1−α)ω)·T2((1−α)ω); the printed form is off by relative {:.3}",
                id.residual_paper
            ));
            Status::ConfirmedWithCorrection
        }
    } else {
        Status::RefutedAsPrinted
    };
    Ok(c)
}

fn sandwich(conv: Convention, q: &QuadConfig) -> Result<Check> {
    let mut c = Check::new();
    let fps: [fn(f64) -> f64; 3] = [|_| 1.0, |s| 2.0 * s, f64::exp];
    let (mut cases, mut violations) = (0, 0);
    for fp in fps {
        for alpha in [0.3, 0.5, 0.8] {
            cases += 1;
            match sandwich_bounds(fp, 0.0, 1.0, order(alpha, conv)?, q) {
                Ok(_) => {}
                Err(FracError::OrderingViolation(_)) => violations += 1,
                Err(e) => return Err(e),
            }
        }
    }
    c.metric("cases", cases as f64);
    c.metric("violations", violations as f64);
    c.status = if violations == 0 {
        c.findings.push("chain checked for f' ≥ 0; the pointwise kernel bounds do not order the integrals otherwise".into());
        Status::ConfirmedWithCorrection
    } else {
        Status::RefutedAsPrinted
    };
    Ok(c)
}

fn claimed_solution(conv: Convention) -> Result<Check> {
    let mut c = Check::new();
    let r = thm29_residual(|t| t, 0.0, 0.0, 1.0, 1000, order(0.5, conv)?)?;
    c.metric("max_residual", r.max_residual);
    c.metric("at", r.at);
    if conv == Convention::FullMass {
        c.metric("oracle_residual", CLAIMED_RESIDUAL_ORACLE);
    }
    c.status = if r.max_residual >= 0.01 {
        c.findings.push(format!(
            "claimed solution f = g/C1 + f(0) for g(t) = t, α = 0.5 leaves max residual {:.10} at t = {}",
            r.max_residual, r.at
        ));
        Status::RefutedAsPrinted
    } else {
        Status::Confirmed
    };
    Ok(c)
}

fn picard(conv: Convention) -> Result<Check> {
    let mut c = Check::new();
    let o = order(0.5, conv)?;
    let n = 2000;
    let w = manufactured_forcing(0.0, 1.0, n, o)?;
    let h = 1.0 / n as f64;
    let sol = picard_solve(
        move |t, _, _| w[(t / h).round() as usize],
        0.0,
        1.0,
        n,
        0.0,
        o,
        &PicardConfig::new(0.5),
    )?;
    let err = sol
        .t
        .iter()
        .zip(&sol.f)
        .map(|(t, f)| (f - t * t).abs())
        .fold(0.0, f64::max);
    c.metric("recovery_error_n_2000", err);
    c.metric("sweeps", sol.sweeps as f64);
    c.metric(
        "condition_estimate_n_2000",
        build_volterra(0.0, 1.0, n, o)?.condition_estimate(),
    );
    let pass = contraction_check(0.5, o)?;
    let fail = contraction_check(2.0, o)?;
    c.metric("contraction_c0_0.5", pass.value);
    c.metric("contraction_c0_0.5_with_c", pass.value_c);
    c.metric("contraction_c0_2", fail.value);
    c.flag("gate_c0_0.5_ok", pass.ok);
    c.flag("gate_c0_2_ok", fail.ok);
    if (pass.value - pass.value_c).abs() > 1e-12 {
        c.findings.push(format!(
            "contraction factor uses C1: {:.6} at c0 = 0.5; with C = C1·Γ(2−α) it is {:.6}",
            pass.value, pass.value_c
        ));
    }
    if !(sol.converged && err <= 1e-4 && pass.ok && !fail.ok) {
        c.status = Status::RefutedAsPrinted;
    }
    Ok(c)
}

fn descent(conv: Convention, q: &QuadConfig) -> Result<Check> {
    let mut c = Check::new();
    let o = order(0.9, conv)?;
    let cfg = DescentConfig::new(0.1, o, 0.0)?;
    let trace = fgd_run(|t| (t - 2.0) * (t - 2.0), |t| 2.0 * (t - 2.0), &cfg, q)?;
    let dist = (trace.final_iterate() - 2.0).abs();
    let bound = cfg.mu * c1_constant(o)? * 2.0 + 0.05;
    let max_ratio = trace.step_ratios(2).into_iter().fold(0.0, f64::max);
    let oracle = match conv {
        Convention::FullMass => FGD_ORACLE_FULL,
        Convention::PaperHalfMass => FGD_ORACLE_HALF,
    };
    c.metric("final_distance", dist);
    c.metric("iterations", trace.iterations() as f64);
    c.metric("max_step_ratio_k_ge_2", max_ratio);
    c.metric("step_ratio_bound", bound);
    c.metric("oracle_distance", oracle);
    let sound = trace.termination != Termination::Diverged && max_ratio <= bound;
    c.status = if sound && dist <= 1e-2 {
        Status::Confirmed
    } else if sound && (dist - oracle).abs() <= FGD_ORACLE_BAND * oracle {
        c.findings.push(format!(
            "descent on (t−2)² with μ = 0.1, α = 0.9 stalls at |t − 2| = {dist:.6} after {} steps (oracle {oracle:.6})",
            trace.iterations()
        ));
        Status::ConfirmedWithCorrection
    } else {
        Status::RefutedAsPrinted
    };
    Ok(c)
}
