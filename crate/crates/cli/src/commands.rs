use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use stoqbell::bounds::{gap_with, GapOptions};
use stoqbell::class2body::{stoq_conditions, verify_all_blocks, ClassParams};
use stoqbell::cone::{
    analytic_two_body, cone_description, membership, ConeDescription, ConeOptions, RayMethod,
};
use stoqbell::dicke::{build_block, check_stoquastic, DEFAULT_STOQ_TOL};
use stoqbell::optimizer::{grid_scan, scan_csv, sweep_optimize, trace_csv, SweepConfig, SweepStatus};
use stoqbell::parent::{
    decompose_block, decompose_full, gaussian_state, max_order, parent_hamiltonian,
    parent_hamiltonian_full, DickeState, GaussianProfile, DEFAULT_CLASS_TOL,
};
use stoqbell::{BellCoefficients, BlockSpec};

use crate::output::{document, emit, sidecar, sig};
use crate::{AngleArgs, CmdResult, Ctx, Failure, Verdict};

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn coefficients(alpha: &[f64], order: Option<u8>) -> Result<BellCoefficients, Failure> {
    let c = BellCoefficients::new(alpha.to_vec())?;
    if let Some(k) = order {
        if k != c.order() {
            return Err(usage(format!(
                "--alpha has {} entries, which is order {}, but --K is {k}",
                alpha.len(),
                c.order()
            )));
        }
    }
    Ok(c)
}

fn write_json(ctx: &Ctx, out: Option<&Path>, fields: Vec<(&str, Value)>) -> Result<(), Failure> {
    emit(out, &document(&ctx.manifest, fields)?)?;
    Ok(())
}

#[derive(Debug, Args, Serialize)]
pub struct OperatorArgs {
    #[arg(long)]
    n: usize,
    /// Correlator order; inferred from the length of --alpha when omitted.
    #[arg(long = "K")]
    order: Option<u8>,
    #[command(flatten)]
    angles: AngleArgs,
    /// Comma-separated coefficients, one per setting.
    #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true)]
    alpha: Vec<f64>,
    /// Spin J of the block (default: the symmetric block, J = n/2).
    #[arg(long = "block")]
    j: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_STOQ_TOL)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn block_for(n: usize, j: Option<f64>) -> Result<BlockSpec, Failure> {
    match j {
        None => Ok(BlockSpec::symmetric(n)?),
        Some(j) => {
            let two_j = (2.0 * j).round();
            if two_j < 0.0 || (2.0 * j - two_j).abs() > 1e-9 {
                return Err(usage(format!("--block {j} is not a half-integer spin")));
            }
            Ok(BlockSpec::new(n, two_j as usize)?)
        }
    }
}

pub fn operator(ctx: &Ctx, a: &OperatorArgs) -> CmdResult {
    let coeffs = coefficients(&a.alpha, a.order)?;
    let params = ctx.params(&a.angles)?;
    let block = block_for(a.n, a.j)?;
    let m = build_block(&coeffs, &params, block);
    let report = check_stoquastic(&m, a.tol);
    write_json(
        ctx,
        a.out.as_deref(),
        vec![
            ("block", json!({"n": block.n(), "two_j": block.two_j()})),
            ("matrix", serde_json::to_value(&m)?),
            ("stoquastic", serde_json::to_value(&report)?),
        ],
    )?;
    match report.worst_offender {
        Some(w) if !report.stoquastic => {
            eprintln!("not stoquastic: entry ({}, {}) is {}", w.k, w.k + w.d, sig(w.value));
            Ok(Verdict::Negative)
        }
        _ => {
            eprintln!("stoquastic");
            Ok(Verdict::Ok)
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Dd,
    Combinatorial,
}

#[derive(Debug, Args, Serialize)]
pub struct ConeArgs {
    #[arg(long)]
    n: usize,
    #[arg(long = "K")]
    order: u8,
    #[command(flatten)]
    angles: AngleArgs,
    /// Use the closed-form two-body description (K = 2), falling back to the numeric path.
    #[arg(long)]
    analytic: bool,
    /// Proceed when the lineality space is larger than generic.
    #[arg(long)]
    allow_degenerate: bool,
    #[arg(long, value_enum, default_value_t = Method::Dd)]
    method: Method,
    #[arg(long, default_value_t = stoqbell::cone::DEFAULT_TOL)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn cone(ctx: &Ctx, a: &ConeArgs) -> CmdResult {
    let params = ctx.params(&a.angles)?;
    let opts = ConeOptions {
        tolerance: a.tol,
        allow_degenerate: a.allow_degenerate,
        method: match a.method {
            Method::Dd => RayMethod::DoubleDescription,
            Method::Combinatorial => RayMethod::Combinatorial,
        },
        ..ConeOptions::default()
    };
    let mut source = "numeric";
    let closed = if a.analytic {
        if a.order != 2 {
            return Err(usage("--analytic is only available for --K 2"));
        }
        match analytic_two_body(a.n, &params) {
            Ok(c) => Some(c),
            Err(e @ stoqbell::Error::AnalyticDegenerate(_)) => {
                eprintln!("warning: {e}; using the numeric path");
                None
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };
    let c = match closed {
        Some(c) => {
            source = "analytic";
            c
        }
        None => cone_description(a.n, a.order, &params, &opts)?,
    };
    if c.degenerate {
        eprintln!("warning: degenerate angles, the lineality space is larger than generic");
    }
    write_json(
        ctx,
        a.out.as_deref(),
        vec![
            ("cone", serde_json::to_value(&c)?),
            ("source", json!(source)),
            ("degenerate", json!(c.degenerate)),
        ],
    )?;
    eprintln!("{} rays, {} lines", c.rays.len(), c.lines.len());
    Ok(Verdict::Ok)
}

#[derive(Debug, Args, Serialize)]
pub struct BoundsArgs {
    #[arg(long)]
    n: usize,
    #[arg(long = "K")]
    order: Option<u8>,
    #[command(flatten)]
    angles: AngleArgs,
    #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true)]
    alpha: Vec<f64>,
    /// Minimize the quantum value over every block, not only the symmetric one.
    #[arg(long)]
    all_blocks: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn bounds(ctx: &Ctx, a: &BoundsArgs) -> CmdResult {
    let coeffs = coefficients(&a.alpha, a.order)?;
    let params = ctx.params(&a.angles)?;
    let r = gap_with(&coeffs, &params, a.n, GapOptions { all_blocks: a.all_blocks })?;
    write_json(ctx, a.out.as_deref(), vec![("bounds", serde_json::to_value(&r)?)])?;
    let g = r.gap.map(sig).unwrap_or_else(|| "undefined (beta_C >= 0)".into());
    eprintln!("beta_Q {}, beta_C {}, gap {g}", sig(r.beta_q), sig(r.beta_c));
    Ok(Verdict::Ok)
}

#[derive(Debug, Args, Serialize)]
pub struct OptimizeArgs {
    /// Cone JSON written by `cone`; replaces --n, --K and the angles.
    #[arg(long, conflicts_with_all = ["n", "order", "phi", "theta"])]
    cone_file: Option<PathBuf>,
    #[arg(long, required_unless_present = "cone_file")]
    n: Option<usize>,
    #[arg(long = "K", required_unless_present = "cone_file")]
    order: Option<u8>,
    #[arg(long, allow_hyphen_values = true, required_unless_present = "cone_file")]
    phi: Option<f64>,
    #[arg(long, allow_hyphen_values = true, required_unless_present = "cone_file")]
    theta: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    #[arg(long, default_value_t = 101)]
    grid_points: usize,
    #[arg(long, default_value_t = 10)]
    refine_factor: usize,
    #[arg(long, default_value_t = 50)]
    max_passes: usize,
    #[arg(long, default_value_t = 1e-10)]
    convergence_tol: f64,
    #[arg(long, default_value_t = 1.0)]
    ray_upper: f64,
    #[arg(long, default_value_t = 1.0)]
    line_upper: f64,
    #[arg(long)]
    no_pair_sweeps: bool,
    #[arg(long)]
    no_polish: bool,
    /// Per-sweep trace as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read_cone(path: &Path) -> Result<ConeDescription, Failure> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let body = v.get("cone").cloned().unwrap_or(v);
    serde_json::from_value(body).map_err(|e| usage(format!("{}: {e}", path.display())))
}

pub fn optimize(ctx: &Ctx, a: &OptimizeArgs) -> CmdResult {
    let cone = match &a.cone_file {
        Some(p) => read_cone(p)?,
        None => {
            let (n, order) = (a.n.expect("required"), a.order.expect("required"));
            let angles = AngleArgs { phi: a.phi.expect("required"), theta: a.theta.expect("required") };
            cone_description(n, order, &ctx.params(&angles)?, &ConeOptions::default())?
        }
    };
    let cfg = SweepConfig {
        ray_upper: a.ray_upper,
        line_upper: a.line_upper,
        grid_points: a.grid_points,
        refine_factor: a.refine_factor,
        max_passes: a.max_passes,
        convergence_tol: a.convergence_tol,
        restarts: a.restarts,
        seed: a.seed,
        pair_sweeps: !a.no_pair_sweeps,
        simplex_polish: !a.no_polish,
    };
    let r = sweep_optimize(&cone, &cfg)?;
    let (member, worst) = membership(&r.alpha, &cone.hyperplanes, cone.tolerance)?;
    let block = BlockSpec::symmetric(cone.n)?;
    let stoq = check_stoquastic(&build_block(&r.alpha, &cone.params, block), DEFAULT_STOQ_TOL);
    if let Some(t) = &a.trace {
        fs::write(t, trace_csv(&r.trace))?;
        fs::write(sidecar(t), document(&ctx.manifest, vec![])?)?;
    }
    write_json(
        ctx,
        a.out.as_deref(),
        vec![
            ("result", serde_json::to_value(&r)?),
            ("membership", json!({"member": member, "max_violation": worst})),
            ("stoquastic", serde_json::to_value(&stoq)?),
        ],
    )?;
    let g = r.gap.map(sig).unwrap_or_else(|| "undefined".into());
    let status = match r.status {
        SweepStatus::Converged => "converged",
        SweepStatus::MaxPasses => "pass limit reached",
        SweepStatus::NoViolationFound => "no violation found",
    };
    eprintln!("gap {g}, beta_Q {} ({status}, restart {})", sig(r.beta_q), r.restart);
    Ok(Verdict::Ok)
}

#[derive(Debug, Args, Serialize)]
pub struct ScanArgs {
    #[arg(long)]
    n: usize,
    #[arg(long = "K")]
    order: Option<u8>,
    #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true)]
    alpha: Vec<f64>,
    /// `lo,hi`; defaults to (−π, π).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, num_args = 1)]
    phi_range: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, num_args = 1)]
    theta_range: Option<Vec<f64>>,
    /// Grid points per axis.
    #[arg(long, default_value_t = 50)]
    res: usize,
    #[arg(long)]
    res_phi: Option<usize>,
    #[arg(long)]
    res_theta: Option<usize>,
    /// CSV destination; the manifest goes to `<out>.manifest.json`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn range(ctx: &Ctx, r: &Option<Vec<f64>>, flag: &str) -> Result<(f64, f64), Failure> {
    match r.as_deref() {
        None => Ok((-std::f64::consts::PI, std::f64::consts::PI)),
        Some([lo, hi]) => Ok((ctx.angle(*lo), ctx.angle(*hi))),
        Some(_) => Err(usage(format!("--{flag} takes exactly two values, lo,hi"))),
    }
}

pub fn scan(ctx: &Ctx, a: &ScanArgs) -> CmdResult {
    let coeffs = coefficients(&a.alpha, a.order)?;
    let pr = range(ctx, &a.phi_range, "phi-range")?;
    let tr = range(ctx, &a.theta_range, "theta-range")?;
    let res = (a.res_phi.unwrap_or(a.res), a.res_theta.unwrap_or(a.res));
    let points = grid_scan(&coeffs, a.n, pr, tr, res)?;
    let csv = scan_csv(&points);
    match &a.out {
        Some(p) => {
            fs::write(p, csv)?;
            fs::write(sidecar(p), document(&ctx.manifest, vec![])?)?;
        }
        None => emit(None, &csv)?,
    }
    let hits = points.iter().filter(|p| p.violation).count();
    eprintln!("{} points, {hits} violating", points.len());
    Ok(Verdict::Ok)
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    Ghz,
    Gaussian,
    Custom,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Embedding {
    /// `𝟙 − |φ⟩⟨φ|` on the whole qubit space.
    Full,
    /// The block only, zero off the symmetric subspace.
    Symmetric,
}

#[derive(Debug, Args, Serialize)]
pub struct ParentArgs {
    #[arg(long, value_enum)]
    state: StateKind,
    /// Party count (ghz, gaussian).
    #[arg(long, required_if_eq_any = [("state", "ghz"), ("state", "gaussian")])]
    n: Option<usize>,
    /// Gaussian centre; defaults to n/2.
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<f64>,
    /// Gaussian variance parameter; defaults to n/4.
    #[arg(long)]
    sigma: Option<f64>,
    /// Dicke-basis amplitudes for `--state custom`; normalised on input.
    #[arg(long, value_delimiter = ',', required_if_eq("state", "custom"))]
    amplitudes: Option<Vec<f64>>,
    /// Decompose into permutation-symmetric Pauli weight classes.
    #[arg(long)]
    decompose: bool,
    #[arg(long, value_enum, default_value_t = Embedding::Full)]
    embedding: Embedding,
    #[arg(long, default_value_t = DEFAULT_CLASS_TOL)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn parent(ctx: &Ctx, a: &ParentArgs) -> CmdResult {
    let state = match a.state {
        StateKind::Ghz => {
            let n = a.n.expect("required");
            if n == 0 {
                return Err(usage("--n must be positive"));
            }
            DickeState::ghz(n)
        }
        StateKind::Gaussian => {
            let n = a.n.expect("required") as f64;
            gaussian_state(&GaussianProfile {
                n: n as usize,
                mu: a.mu.unwrap_or(n / 2.0),
                sigma: a.sigma.unwrap_or(n / 4.0),
            })?
        }
        StateKind::Custom => DickeState::normalized(a.amplitudes.clone().expect("required"))?,
    };
    let n = state.n();
    if a.n.is_some_and(|m| m != n) {
        return Err(usage(format!("--n {} does not match {} amplitudes", a.n.unwrap_or(0), n + 1)));
    }
    let h = parent_hamiltonian(&state);
    let stoq = check_stoquastic(&h, DEFAULT_STOQ_TOL);
    let mut fields = vec![
        ("state", serde_json::to_value(&state)?),
        ("hamiltonian", serde_json::to_value(&h)?),
        ("stoquastic", serde_json::to_value(&stoq)?),
    ];
    let mut top = None;
    if a.decompose {
        let terms = match a.embedding {
            Embedding::Full => decompose_full(&parent_hamiltonian_full(&state)?, n, a.tol)?,
            Embedding::Symmetric => decompose_block(&h, n, a.tol)?,
        };
        let k = max_order(&terms, a.tol);
        fields.push(("decomposition", serde_json::to_value(&terms)?));
        fields.push(("max_order", json!(k)));
        top = Some((k, terms.len()));
    }
    write_json(ctx, a.out.as_deref(), fields)?;
    match top {
        Some((k, len)) => eprintln!("{len} weight classes, max K = {k}"),
        None => eprintln!("parent Hamiltonian for n = {n}, stoquastic: {}", stoq.stoquastic),
    }
    Ok(Verdict::Ok)
}

#[derive(Debug, Args, Serialize)]
pub struct ClassArgs {
    #[arg(long)]
    x: u32,
    #[arg(long)]
    y: u32,
    #[arg(long, allow_hyphen_values = true)]
    sigma: i8,
    #[arg(long, allow_hyphen_values = true)]
    tau: i8,
    #[arg(long)]
    mu: u32,
    #[command(flatten)]
    angles: AngleArgs,
    #[arg(long)]
    n: usize,
    /// Build every block and check it, not only the angle conditions.
    #[arg(long)]
    verify: bool,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn class(ctx: &Ctx, a: &ClassArgs) -> CmdResult {
    let p = ClassParams::new(a.x, a.y, a.sigma, a.tau, a.mu)?;
    let params = ctx.params(&a.angles)?;
    if let Some(w) = p.parity_warning(a.n) {
        eprintln!("warning: {w}");
    }
    let report = if a.verify {
        verify_all_blocks(&p, &params, a.n, a.tol)?
    } else {
        stoq_conditions(&p, &params)
    };
    let coeffs = stoqbell::class2body::class_to_coeffs(&p);
    write_json(
        ctx,
        a.out.as_deref(),
        vec![("coefficients", serde_json::to_value(&coeffs)?), ("report", serde_json::to_value(&report)?)],
    )?;
    eprintln!(
        "conditions: C {} (C = {}), A {} (A' = {})",
        if report.condition_c_met { "met" } else { "not met" },
        sig(report.c),
        if report.condition_a_met { "met" } else { "not met" },
        sig(report.a_prime)
    );
    if a.verify {
        let bad: Vec<usize> =
            report.per_block_stoquastic.iter().filter(|b| !b.stoquastic).map(|b| b.two_j).collect();
        if bad.is_empty() {
            eprintln!("all {} blocks stoquastic", report.per_block_stoquastic.len());
            return Ok(Verdict::Ok);
        }
        eprintln!("non-stoquastic blocks (2J): {bad:?}");
        return Ok(Verdict::Negative);
    }
    Ok(if report.conditions_met() { Verdict::Ok } else { Verdict::Negative })
}
