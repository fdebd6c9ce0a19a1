use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use sigmafrac::fde::{build_volterra, manufactured_forcing, PicardSolution};
use sigmafrac::fracderiv::{
    caputo_memory_length, classical_branch, kernel_deriv, sig_deriv_sampled, sig_memory_length,
    sig_memory_length_tight, DerivFlag,
};
use sigmafrac::kernels::{sech2, CfPrefactor};
use sigmafrac::l1reg::L1Config;
use sigmafrac::optimizer::{fgd_run_vector, DescentSummary, Termination};
use sigmafrac::suite::SCHEMA_VERSION;
use sigmafrac::transforms::{
    fourier_numeric, laplace_numeric, t1_multiplier, t1_multiplier_paper, t2_multiplier,
    FourierPoint, LaplacePoint,
};
use sigmafrac::{
    fgd_run, picard_solve, run_suite, thm29_residual, Convention, DerivResult, DescentConfig,
    FractionalOrder, KernelSpec, PicardConfig, SuiteConfig,
};

use crate::functions::{Input, NamedFn};
use crate::settings::Settings;
use crate::{
    CfPrefactorArg, CliError, CompareArgs, DerivArgs, FdeArgs, FdeProblem, KernelArg, KernelOpts,
    MemoryArgs, Objective, OptimizeArgs, RhsArg, SuiteArgs, SuiteConvention, TransformArgs,
};

#[derive(Serialize)]
struct Report<C: Serialize, R: Serialize> {
    schema_version: &'static str,
    command: &'static str,
    config: C,
    results: Vec<R>,
    findings: Vec<String>,
}

impl<C: Serialize, R: Serialize> Report<C, R> {
    fn new(command: &'static str, config: C, results: Vec<R>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command,
            config,
            results,
            findings: Vec::new(),
        }
    }

    fn to_json(&self) -> Result<String, CliError> {
        serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Crash(e.to_string()))
            .map(|s| s + "\n")
    }
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))
        }
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn create(path: &Path) -> Result<File, CliError> {
    File::create(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Crash(e.to_string());
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(r).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Crash(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Crash(e.to_string()))
}

fn kernel_spec(
    kind: KernelArg,
    order: FractionalOrder,
    opts: &KernelOpts,
) -> Result<KernelSpec, CliError> {
    Ok(match kind {
        KernelArg::Sigmoidal => KernelSpec::sigmoidal(order),
        KernelArg::Caputo => KernelSpec::caputo(order),
        KernelArg::CaputoFabrizio => {
            let p = match opts.cf_prefactor {
                CfPrefactorArg::OneMinusAlpha => CfPrefactor::OneMinusAlpha,
                CfPrefactorArg::Gamma => CfPrefactor::GammaOneMinusAlpha,
            };
            KernelSpec::caputo_fabrizio(order, opts.m_alpha)?.with_cf_prefactor(p)
        }
        KernelArg::Gaussian => KernelSpec::gaussian(order, opts.sigma)?,
    })
}

fn kernel_label(kind: KernelArg) -> &'static str {
    match kind {
        KernelArg::Sigmoidal => "sigmoidal",
        KernelArg::Caputo => "caputo",
        KernelArg::CaputoFabrizio => "caputo-fabrizio",
        KernelArg::Gaussian => "gaussian",
    }
}

fn eval_named(
    kind: KernelArg,
    order: FractionalOrder,
    opts: &KernelOpts,
    f: NamedFn,
    a: f64,
    t: f64,
    s: &Settings,
) -> Result<DerivResult, CliError> {
    if order.is_classical() {
        if t < a || t.is_nan() {
            return Err(CliError::Usage(format!(
                "need a <= t, got a = {a}, t = {t}"
            )));
        }
        let mut r = classical_branch(|x| f.derivative(x), t);
        r.convention = (kind == KernelArg::Sigmoidal).then_some(order.convention());
        return Ok(r);
    }
    Ok(kernel_deriv(
        &kernel_spec(kind, order, opts)?,
        |x| f.derivative(x),
        a,
        t,
        &s.quad,
    )?)
}

fn node_index(g: &sigmafrac::GridFunction, t: f64) -> Result<usize, CliError> {
    let i = ((t - g.a()) / g.h()).round();
    if i >= 0.0
        && (i as usize) <= g.n()
        && (g.node(i as usize) - t).abs() <= 1e-9 * g.h().max(t.abs())
    {
        Ok(i as usize)
    } else {
        Err(CliError::Usage(format!(
            "--t {t} is not a node of the CSV grid"
        )))
    }
}

fn flag_label(f: DerivFlag) -> &'static str {
    match f {
        DerivFlag::NotConverged => "not-converged",
        DerivFlag::Classical => "classical",
        DerivFlag::CoarseGrid => "coarse-grid",
    }
}

#[derive(Serialize)]
struct DerivConfig<'a> {
    kernel: &'static str,
    alpha: f64,
    a: f64,
    t: f64,
    f: &'a str,
    convention: Convention,
}

#[derive(Serialize)]
struct DerivRow {
    value: f64,
    err_estimate: f64,
    n_evals: usize,
    converged: bool,
    flags: Vec<DerivFlag>,
}

pub fn deriv(args: &DerivArgs, s: &Settings) -> Result<(), CliError> {
    let conv = s.convention(args.convention);
    let order = FractionalOrder::new(args.alpha, conv)?;
    let (a, r) = match Input::parse(&args.f)? {
        Input::Named(f) => {
            let a = args.a.unwrap_or(0.0);
            (
                a,
                eval_named(args.kernel, order, &args.kernel_opts, f, a, args.t, s)?,
            )
        }
        Input::Sampled(g) => {
            if args.kernel != KernelArg::Sigmoidal {
                return Err(CliError::Usage(
                    "CSV input is supported for the sigmoidal kernel only".into(),
                ));
            }
            if args
                .a
                .is_some_and(|a| (a - g.a()).abs() > 1e-12 * g.a().abs().max(1.0))
            {
                return Err(CliError::Usage(format!(
                    "--a must equal the first grid node {} for CSV input",
                    g.a()
                )));
            }
            let i = node_index(&g, args.t)?;
            let r = if i == 0 {
                DerivResult {
                    value: 0.0,
                    err_estimate: 0.0,
                    n_evals: 0,
                    convention: Some(conv),
                    flags: Vec::new(),
                }
            } else {
                sig_deriv_sampled(&g, i, order)?
            };
            (g.a(), r)
        }
    };
    let row = DerivRow {
        value: r.value,
        err_estimate: r.err_estimate,
        n_evals: r.n_evals,
        converged: r.converged(),
        flags: r.flags.clone(),
    };
    if args.json {
        let cfg = DerivConfig {
            kernel: kernel_label(args.kernel),
            alpha: args.alpha,
            a,
            t: args.t,
            f: &args.f,
            convention: conv,
        };
        emit(None, &Report::new("deriv", cfg, vec![&row]).to_json()?)?;
    } else {
        let text =
            format!(
            "kernel: {}\nconvention: {}\nvalue: {}\nerr_estimate: {:e}\nn_evals: {}\nflags: {}\n",
            kernel_label(args.kernel),
            conv,
            row.value,
            row.err_estimate,
            row.n_evals,
            row.flags.iter().map(|f| flag_label(*f)).collect::<Vec<_>>().join(",")
        );
        emit(None, &text)?;
    }
    if !row.converged {
        return Err(CliError::Numerical(format!(
            "quadrature did not converge (err_estimate {:e})",
            row.err_estimate
        )));
    }
    Ok(())
}

pub fn compare(args: &CompareArgs, s: &Settings) -> Result<(), CliError> {
    let Input::Named(f) = Input::parse(&args.f)? else {
        return Err(CliError::Usage("compare needs a named function".into()));
    };
    let conv = s.convention(args.convention);
    let kinds = [
        KernelArg::Sigmoidal,
        KernelArg::Caputo,
        KernelArg::CaputoFabrizio,
        KernelArg::Gaussian,
    ];
    let mut alphas = args.alpha.clone();
    alphas.sort_by(f64::total_cmp);
    alphas.dedup();
    let mut rows = Vec::new();
    let mut failed = false;
    for &alpha in &alphas {
        let order = FractionalOrder::new(alpha, conv)?;
        for kind in kinds {
            let r = eval_named(kind, order, &args.kernel_opts, f, args.a, args.t, s)?;
            failed |= !r.converged();
            rows.push(vec![
                alpha.to_string(),
                kernel_label(kind).to_string(),
                conv.to_string(),
                r.value.to_string(),
                format!("{:e}", r.err_estimate),
                r.n_evals.to_string(),
                r.converged().to_string(),
            ]);
        }
    }
    let text = csv_text(
        &[
            "alpha",
            "kernel",
            "convention",
            "value",
            "err_estimate",
            "n_evals",
            "converged",
        ],
        &rows,
    )?;
    emit(args.out.as_deref(), &text)?;
    if failed {
        return Err(CliError::Numerical(
            "quadrature did not converge for at least one kernel".into(),
        ));
    }
    Ok(())
}

pub fn memory(args: &MemoryArgs, s: &Settings) -> Result<(), CliError> {
    let conv = s.convention(args.convention);
    let m = args.m.unwrap_or(args.c0);
    let mut alphas = args.alpha.clone();
    alphas.sort_by(f64::total_cmp);
    alphas.dedup();
    let mut rows = Vec::new();
    for &alpha in &alphas {
        let order = FractionalOrder::new(alpha, conv)?;
        let cap = caputo_memory_length(args.eps, m, alpha)?;
        rows.push(vec![
            alpha.to_string(),
            conv.to_string(),
            args.eps.to_string(),
            args.c0.to_string(),
            sig_memory_length(args.eps, args.c0, order)?.to_string(),
            sig_memory_length_tight(args.eps, args.c0, order)?.to_string(),
            cap.length.to_string(),
            cap.degenerate.to_string(),
        ]);
    }
    let header = [
        "alpha",
        "convention",
        "eps",
        "c0",
        "sigmoidal_length",
        "sigmoidal_tight_length",
        "caputo_length",
        "caputo_degenerate",
    ];
    emit(args.out.as_deref(), &csv_text(&header, &rows)?)
}

pub fn transform_verify(args: &TransformArgs, s: &Settings) -> Result<(), CliError> {
    let (mut ss, mut ws) = (args.s.clone(), args.omega.clone());
    if ss.is_empty() && ws.is_empty() {
        ss = vec![0.5, 1.0, 2.0, 4.0, 8.0];
        ws = vec![0.25, 0.5, 1.0, 2.0];
    }
    let mut rows = Vec::new();
    let mut failed = false;
    for &sv in &ss {
        let p = LaplacePoint::real(sv)?;
        let num = laplace_numeric(sech2, p, &s.quad);
        failed |= !num.converged;
        let corrected = t1_multiplier(p).re;
        let paper = t1_multiplier_paper(sv.into()).re;
        rows.push(vec![
            "laplace".into(),
            sv.to_string(),
            paper.to_string(),
            corrected.to_string(),
            num.value.re.to_string(),
            format!("{:e}", (corrected - num.value.re).abs()),
            format!("{:e}", (paper - num.value.re).abs()),
        ]);
    }
    for &om in &ws {
        let p = FourierPoint::new(om)?;
        let num = fourier_numeric(sech2, p, &s.quad);
        failed |= !num.converged;
        let closed = om * t2_multiplier(p);
        rows.push(vec![
            "fourier".into(),
            om.to_string(),
            closed.to_string(),
            closed.to_string(),
            num.value.re.to_string(),
            format!("{:e}", (closed - num.value.re).abs()),
            format!("{:e}", (closed - num.value.re).abs()),
        ]);
    }
    let header = [
        "transform",
        "point",
        "paper_form",
        "corrected_form",
        "oracle",
        "abs_err_corrected",
        "abs_err_paper",
    ];
    emit(args.out.as_deref(), &csv_text(&header, &rows)?)?;
    if failed {
        return Err(CliError::Numerical(
            "transform quadrature did not converge".into(),
        ));
    }
    Ok(())
}

#[derive(Serialize)]
struct OptimizeConfig {
    objective: &'static str,
    mu: f64,
    alpha: f64,
    convention: Convention,
    t0: f64,
    t_prev: f64,
    lambda: f64,
    l1_a: f64,
    max_iter: usize,
    step_tol: f64,
    grad_tol: f64,
}

#[derive(Serialize)]
struct OptimizeResult {
    #[serde(flatten)]
    summary: DescentSummary,
    critical_point: f64,
    distance_to_critical: f64,
}

type Scalar = fn(f64) -> f64;

pub fn optimize(args: &OptimizeArgs, s: &Settings) -> Result<(), CliError> {
    let conv = s.convention(args.convention);
    let order = FractionalOrder::new(args.alpha, conv)?;
    let mut cfg = DescentConfig::new(args.mu, order, args.t0)?;
    cfg.max_iter = args.max_iter;
    if let Some(v) = args.t_prev {
        cfg.t_prev_init = v;
    }
    if let Some(v) = args.step_tol {
        cfg.step_tol = v;
    }
    if let Some(v) = args.grad_tol {
        cfg.grad_tol = v;
    }
    cfg.validate()?;
    let (name, f, fp, mut critical): (&str, Scalar, Scalar, f64) = match args.objective {
        Objective::Quadratic => (
            "quadratic",
            |t| (t - 2.0) * (t - 2.0),
            |t| 2.0 * (t - 2.0),
            2.0,
        ),
        Objective::LassoToy => (
            "lasso-toy",
            |t| 0.5 * (t - 3.0) * (t - 3.0),
            |t| t - 3.0,
            3.0,
        ),
        Objective::Rosenbrock1d => (
            "rosenbrock-1d",
            |t| (1.0 - t) * (1.0 - t) + 100.0 * (t * t - t) * (t * t - t),
            |t| -2.0 * (1.0 - t) + 200.0 * (t * t - t) * (2.0 * t - 1.0),
            1.0,
        ),
    };
    let lambda = args
        .lambda
        .unwrap_or(if args.objective == Objective::LassoToy {
            0.5
        } else {
            0.0
        });
    let trace = if lambda > 0.0 {
        let l1 = L1Config::new(lambda, args.l1_a, order)?;
        if args.objective == Objective::LassoToy {
            critical = (3.0 - lambda).max(0.0);
        }
        let mut vcfg = cfg;
        vcfg.t_prev_init = cfg.t_prev_init;
        let v = fgd_run_vector(
            |x: &[f64]| f(x[0]),
            |x: &[f64]| vec![fp(x[0])],
            &[args.t0],
            &vcfg,
            Some(&l1),
            &s.quad,
        )?;
        let mut t = v.coordinate(0);
        t.t_prev_init = cfg.t_prev_init;
        t
    } else {
        if args.lambda.is_some_and(|l| l < 0.0) {
            return Err(CliError::Usage("--lambda must be nonnegative".into()));
        }
        fgd_run(f, fp, &cfg, &s.quad)?
    };
    if let Some(p) = &args.trace {
        trace.write_csv(create(p)?)?;
    }
    let summary = trace.summary();
    let result = OptimizeResult {
        distance_to_critical: (summary.final_iterate - critical).abs(),
        summary,
        critical_point: critical,
    };
    let config = OptimizeConfig {
        objective: name,
        mu: cfg.mu,
        alpha: args.alpha,
        convention: conv,
        t0: args.t0,
        t_prev: cfg.t_prev_init,
        lambda,
        l1_a: args.l1_a,
        max_iter: cfg.max_iter,
        step_tol: cfg.step_tol,
        grad_tol: cfg.grad_tol,
    };
    emit(
        args.summary.as_deref(),
        &Report::new("optimize", config, vec![result]).to_json()?,
    )?;
    if trace.termination == Termination::Diverged {
        return Err(CliError::Numerical("descent diverged".into()));
    }
    Ok(())
}

#[derive(Serialize)]
struct FdeConfig {
    problem: &'static str,
    a: f64,
    b: f64,
    n: usize,
    alpha: f64,
    convention: Convention,
    f0: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    g: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rhs: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_sweeps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tol: Option<f64>,
}

#[derive(Serialize)]
struct ResidualResult {
    max_residual: f64,
    at: f64,
}

#[derive(Serialize)]
struct PicardResult {
    converged: bool,
    sweeps: usize,
    final_sweep_diff: f64,
    max_error_vs_manufactured: Option<f64>,
    inner_failures: usize,
    contraction_value: f64,
    contraction_value_c: f64,
    condition_estimate: f64,
}

pub fn fde(args: &FdeArgs, s: &Settings) -> Result<(), CliError> {
    let conv = s.convention(args.convention);
    let order = FractionalOrder::new(args.alpha, conv)?;
    let mut cfg = FdeConfig {
        problem: "",
        a: args.a,
        b: args.b,
        n: args.n,
        alpha: args.alpha,
        convention: conv,
        f0: args.f0,
        g: None,
        rhs: None,
        c0: None,
        max_sweeps: None,
        tol: None,
    };
    match args.thm {
        FdeProblem::ClaimedSolution => {
            let g = Input::named(&args.g, "--g")?;
            let r = thm29_residual(|t| g.value(t), args.f0, args.a, args.b, args.n, order)?;
            cfg.problem = "claimed-solution";
            cfg.g = Some(args.g.clone());
            let mut report = Report::new(
                "fde",
                cfg,
                vec![ResidualResult {
                    max_residual: r.max_residual,
                    at: r.at,
                }],
            );
            if r.max_residual > 0.0 {
                report.findings.push(format!(
                    "claimed solution g/C1 + f(a) leaves max residual {} at t = {}",
                    r.max_residual, r.at
                ));
            }
            emit(args.report.as_deref(), &report.to_json()?)
        }
        FdeProblem::Picard => {
            let sys = build_volterra(args.a, args.b, args.n, order)?;
            let h = sys.h();
            let (a, f0, c0) = (args.a, args.f0, args.c0);
            let w = match args.rhs {
                RhsArg::Zero => vec![0.0; args.n + 1],
                _ => manufactured_forcing(args.a, args.b, args.n, order)?,
            };
            let at = move |t: f64| w[((t - a) / h).round() as usize];
            let exact = move |t: f64| (t - a) * (t - a) + f0;
            let pc = PicardConfig {
                max_sweeps: args.max_sweeps,
                tol: args.tol,
                ..PicardConfig::new(c0)
            };
            let sol: PicardSolution = match args.rhs {
                RhsArg::Zero => {
                    picard_solve(|_, _, _| 0.0, args.a, args.b, args.n, f0, order, &pc)?
                }
                RhsArg::Manufactured => {
                    picard_solve(|t, _, _| at(t), args.a, args.b, args.n, f0, order, &pc)?
                }
                RhsArg::LinearF => picard_solve(
                    |t, f, _| c0 * (f - exact(t)) + at(t),
                    args.a,
                    args.b,
                    args.n,
                    f0,
                    order,
                    &pc,
                )?,
            };
            let err = match args.rhs {
                RhsArg::Zero => sol.f.iter().map(|f| (f - f0).abs()).fold(0.0, f64::max),
                _ => sol
                    .t
                    .iter()
                    .zip(&sol.f)
                    .map(|(t, f)| (f - exact(*t)).abs())
                    .fold(0.0, f64::max),
            };
            if let Some(p) = &args.out {
                sol.write_csv(create(p)?)?;
            }
            cfg.problem = "picard";
            cfg.rhs = Some(match args.rhs {
                RhsArg::Zero => "zero",
                RhsArg::Manufactured => "manufactured",
                RhsArg::LinearF => "linear-f",
            });
            cfg.c0 = Some(c0);
            cfg.max_sweeps = Some(args.max_sweeps);
            cfg.tol = Some(args.tol);
            let result = PicardResult {
                converged: sol.converged,
                sweeps: sol.sweeps,
                final_sweep_diff: sol.sweep_diffs.last().copied().unwrap_or(0.0),
                max_error_vs_manufactured: Some(err),
                inner_failures: sol.inner_failures,
                contraction_value: sol.contraction.value,
                contraction_value_c: sol.contraction.value_c,
                condition_estimate: sys.condition_estimate(),
            };
            emit(
                args.report.as_deref(),
                &Report::new("fde", cfg, vec![result]).to_json()?,
            )?;
            if !sol.converged {
                return Err(CliError::Numerical(format!(
                    "picard iteration did not converge in {} sweeps",
                    sol.sweeps
                )));
            }
            Ok(())
        }
    }
}

pub fn theorem_suite(args: &SuiteArgs, s: &Settings) -> Result<(), CliError> {
    let conventions = match args.convention {
        Some(SuiteConvention::Full) => vec![Convention::FullMass],
        Some(SuiteConvention::Paper) => vec![Convention::PaperHalfMass],
        Some(SuiteConvention::Both) => Convention::ALL.to_vec(),
        None => vec![s.convention(None)],
    };
    let cfg = SuiteConfig {
        conventions,
        only: (!args.only.is_empty()).then(|| args.only.clone()),
        seed: args.seed.unwrap_or(s.seed),
        quad: s.quad,
    };
    cfg.validate()?;
    let report = run_suite(&cfg)
        .map_err(|e| CliError::Crash(format!("theorem check failed to run: {e}")))?;
    let json = report
        .to_json()
        .map_err(|e| CliError::Crash(e.to_string()))?
        + "\n";
    emit(args.report.as_deref(), &json)
}
