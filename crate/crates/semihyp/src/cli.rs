//! Command-line front end.
//!
//! Every command reads one JSON run configuration, either from `--config
//! <path>` or from a built-in `--preset <name>`, optionally edited with
//! repeatable `--set key.path=value` overrides. Artifacts go to `--out`,
//! then to `output.path` from the config, and to stdout when neither is
//! given. File writes are atomic (temp file plus rename), and every command
//! is deterministic: two runs with the same inputs produce byte-identical
//! outputs.
//!
//! Exit codes: 0 on success, 1 when the run itself fails (a failed check, a
//! stalled iteration, an inconclusive march), 2 for unusable invocations or
//! configs.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::blowup::{
    frontier_scan, run_until_blowup_with, write_scan_csv, BlowupOptions, BlowupStatus,
    GrowthFamily, A_MIN_LOGLOG,
};
use crate::bounds::{
    apriori_bounds, certify_growth, compute_phi_psi, estimate_lipschitz, AprioriReport,
    ExprMajorant, LipschitzEstimate, PhiPsi, DEFAULT_PROBE_RADII,
};
use crate::config::{load_config, preset_json, OutputFormat, ProblemConfig, PRESET_NAMES};
use crate::problem::{check_compat0, check_compat1, validate, CompatPart, HyperbolicProblem};
use crate::solver::{solve, SolveError, SolveReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug)]
enum CliError {
    /// Unusable invocation or configuration (exit 2).
    Usage(String),
    /// The run itself failed (exit 1).
    Failure(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Failure(_) => EXIT_FAILURE,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Failure(m) => m,
        }
    }
}

impl From<crate::config::ConfigError> for CliError {
    fn from(e: crate::config::ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failure(format!("i/o error: {e}"))
    }
}

#[derive(Parser)]
#[command(
    name = "semihyp",
    version,
    about = "Solver suite for semilinear hyperbolic systems with nonlocal boundary conditions",
    subcommand_required = true,
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct CommonArgs {
    /// Path to a JSON run configuration
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Use a built-in configuration instead of a file
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Override one config field, e.g. --set grid.nx=400 (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Time horizon; defaults to blowup.t_max from the config
    #[arg(long)]
    t: Option<f64>,
    /// Write the command's artifact here (overrides output.path)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check speed signs, derivative availability, and corner compatibility
    Validate {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// March the initial-boundary value problem and write the solution grid
    Solve {
        #[command(flatten)]
        common: CommonArgs,
        /// Also march the x-derivative system and report du/dx and du/dt
        #[arg(long)]
        derivatives: bool,
        /// Additionally write a long-format CSV (x,t,component,value) here
        #[arg(long, value_name = "PATH")]
        emit_plot: Option<PathBuf>,
    },
    /// Estimate Lipschitz constants, slab widths, and a priori envelopes
    Bounds {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Classify nonlinearity growth and compute certified solvability radii
    Certify {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// March with dynamic box re-sizing until the cap, the horizon, or collapse
    Blowup {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Sweep growth families over an (a, c) grid and tabulate the verdicts
    Scan {
        #[command(flatten)]
        common: CommonArgs,
        /// Family spec: sin, qll, ll, logpow(P), or power(Q); repeatable
        #[arg(long, value_name = "SPEC")]
        family: Vec<String>,
        /// Offset values a for the family grid; repeatable
        #[arg(long, value_name = "REAL")]
        a: Vec<f64>,
        /// Amplitude values c for the family grid; repeatable
        #[arg(long, value_name = "REAL")]
        c: Vec<f64>,
        /// Spatial intervals for the scan marches
        #[arg(long, value_name = "N")]
        nx: Option<usize>,
        /// Sup-norm cap that declares blow-up
        #[arg(long, value_name = "REAL")]
        u_max: Option<f64>,
    },
    /// Print a built-in configuration as JSON
    Preset {
        /// One of: circulating-wave, constant, manufactured, riccati, sin, qll, ll
        name: String,
        /// Write the config here instead of stdout
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

/// Parse `argv` and run the selected command, writing to the given streams.
/// Returns the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let rendered = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    let _ = out.write_all(rendered.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = err.write_all(rendered.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(cli.cmd, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message());
            e.code()
        }
    }
}

fn dispatch(cmd: Cmd, out: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        Cmd::Validate { common } => cmd_validate(&common, out),
        Cmd::Solve {
            common,
            derivatives,
            emit_plot,
        } => cmd_solve(&common, derivatives, emit_plot.as_deref(), out),
        Cmd::Bounds { common } => cmd_bounds(&common, out),
        Cmd::Certify { common } => cmd_certify(&common, out),
        Cmd::Blowup { common } => cmd_blowup(&common, out),
        Cmd::Scan {
            common,
            family,
            a,
            c,
            nx,
            u_max,
        } => cmd_scan(&common, &family, &a, &c, nx, u_max, out),
        Cmd::Preset { name, out: path } => cmd_preset(&name, path.as_deref(), out),
    }
}

fn load(common: &CommonArgs) -> Result<ProblemConfig, CliError> {
    let text = match (&common.config, &common.preset) {
        (Some(_), Some(_)) => {
            return Err(CliError::Usage(
                "choose either --config or --preset, not both".to_string(),
            ))
        }
        (Some(path), None) => std::fs::read_to_string(path).map_err(|e| {
            CliError::Usage(format!("cannot read config {}: {e}", path.display()))
        })?,
        (None, Some(name)) => preset_json(name).ok_or_else(|| unknown_preset(name))?,
        (None, None) => {
            return Err(CliError::Usage(
                "a run configuration is required: pass --config <path> or --preset <name>"
                    .to_string(),
            ))
        }
    };
    Ok(load_config(&text, &common.set)?)
}

fn unknown_preset(name: &str) -> CliError {
    CliError::Usage(format!(
        "unknown preset `{name}`; available: {}",
        PRESET_NAMES.join(", ")
    ))
}

fn horizon(common: &CommonArgs, cfg: &ProblemConfig) -> Result<f64, CliError> {
    let t = common.t.unwrap_or(cfg.blowup.t_max);
    if !(t > 0.0) || !t.is_finite() {
        return Err(CliError::Usage(format!(
            "the time horizon must be a positive finite number, got {t}"
        )));
    }
    Ok(t)
}

fn build_problem(cfg: &ProblemConfig) -> Result<HyperbolicProblem, CliError> {
    cfg.build_problem().map_err(|e| match e {
        crate::config::ConfigError::Problem(p) => CliError::Usage(p.to_string()),
        other => CliError::Usage(other.to_string()),
    })
}

/// Box radius and Lipschitz estimate for a run. A configured `bounds.m`
/// wins; otherwise bootstrap from a unit box and adopt the a priori
/// suggestion n (3 + 2 n L_h)^slabs Phi, clamped to a sane range.
fn resolve_box(
    cfg: &ProblemConfig,
    p: &HyperbolicProblem,
    t: f64,
) -> Result<(f64, LipschitzEstimate), CliError> {
    let spec = cfg.sampling_spec();
    let m = match cfg.bounds.m {
        Some(m) => m,
        None => {
            let lip0 = estimate_lipschitz(p, t, 1.0, &spec)
                .map_err(|e| CliError::Failure(e.to_string()))?;
            let pp0 = compute_phi_psi(p, t, 1.0, &spec)
                .map_err(|e| CliError::Failure(e.to_string()))?;
            let rep0 = apriori_bounds(p, &lip0, t, &pp0);
            let s = rep0.m_suggested.value;
            let s = if s.is_finite() && s > 0.0 { s } else { 1e12 };
            s.clamp(1.0, 1e12)
        }
    };
    let lip =
        estimate_lipschitz(p, t, m, &spec).map_err(|e| CliError::Failure(e.to_string()))?;
    Ok((m, lip))
}

/// Write `bytes` to the resolved artifact path, or to stdout when no path
/// is configured. Returns the human summary destination: summaries print to
/// stdout only when the artifact went to a file.
fn emit_artifact(
    common: &CommonArgs,
    cfg: &ProblemConfig,
    bytes: &[u8],
    out: &mut dyn Write,
) -> Result<bool, CliError> {
    let path = common
        .out
        .clone()
        .or_else(|| cfg.output.path.as_ref().map(PathBuf::from));
    match path {
        Some(p) => {
            atomic_write(&p, bytes)
                .map_err(|e| CliError::Failure(format!("cannot write {}: {e}", p.display())))?;
            writeln!(out, "wrote {}", p.display())?;
            Ok(true)
        }
        None => {
            out.write_all(bytes)?;
            Ok(false)
        }
    }
}

/// Temp file in the target directory, then rename over the destination, so
/// an interrupted run never leaves a half-written artifact.
fn atomic_write(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let base = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "artifact".to_string());
    let tmp = dir.join(format!(".{base}.{}.tmp", std::process::id()));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path).inspect_err(|_| {
        let _ = std::fs::remove_file(&tmp);
    })
}

fn json_artifact<T: serde::Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| CliError::Failure(format!("cannot serialize report: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn compat_lines(report: &mut String, label: &str, part: Option<&CompatPart>, tol: f64) {
    match part {
        Some(p) => {
            let worst = p
                .residuals
                .iter()
                .fold(0.0_f64, |acc, r| acc.max(r.abs()));
            let verdict = if p.all_pass { "PASS" } else { "FAIL" };
            let _ = writeln!(
                report,
                "{label}: {verdict} (max residual {worst:.3e}, tolerance {tol:.1e})"
            );
        }
        None => {
            let _ = writeln!(report, "{label}: not checked");
        }
    }
}

fn cmd_validate(common: &CommonArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = load(common)?;
    let t = horizon(common, &cfg)?;
    let p = build_problem(&cfg)?;
    let rep = validate(&p, t, cfg.bounds.density);

    let mut text = String::new();
    let _ = writeln!(
        text,
        "problem: n={}, k={}, horizon t={t}",
        cfg.problem.n, cfg.problem.k
    );
    for s in &rep.sign_checks {
        let want = if s.required_negative { "< 0" } else { "> 0" };
        let _ = writeln!(
            text,
            "  lambda[{}] {} over the lattice: {} (min |lambda| = {:.3e})",
            s.component + 1,
            want,
            if s.ok { "PASS" } else { "FAIL" },
            s.min_abs
        );
    }
    let _ = writeln!(
        text,
        "symbolic derivatives: {}",
        if rep.differentiable { "PASS" } else { "FAIL" }
    );

    let mut all_pass = rep.pass;
    match check_compat0(&p, crate::problem::EPS_COMPAT) {
        Ok(c0) => {
            if let Some(part) = &c0.order0 {
                all_pass &= part.all_pass;
            }
            compat_lines(&mut text, "corner compatibility, order 0", c0.order0.as_ref(), c0.tolerance);
        }
        Err(e) => {
            all_pass = false;
            let _ = writeln!(text, "corner compatibility, order 0: FAIL ({e})");
        }
    }
    match check_compat1(&p, crate::problem::EPS_COMPAT) {
        Ok(c1) => {
            if let Some(part) = &c1.order1 {
                all_pass &= part.all_pass;
            }
            compat_lines(&mut text, "corner compatibility, order 1", c1.order1.as_ref(), c1.tolerance);
        }
        Err(e) => {
            all_pass = false;
            let _ = writeln!(text, "corner compatibility, order 1: FAIL ({e})");
        }
    }
    for issue in &rep.issues {
        let _ = writeln!(text, "issue: {issue}");
    }
    let _ = writeln!(text, "result: {}", if all_pass { "PASS" } else { "FAIL" });

    emit_artifact(common, &cfg, text.as_bytes(), out)?;
    if all_pass {
        Ok(())
    } else {
        Err(CliError::Failure(
            "validation failed; see the report above".to_string(),
        ))
    }
}

fn solve_failure(e: SolveError, t: f64) -> CliError {
    match e {
        SolveError::NoConvergence { .. }
        | SolveError::NonFinite { .. }
        | SolveError::PlanTooFine { .. } => CliError::Failure(
            format!(
                "{e}. If the solution blows up before t = {t}, use the `blowup` command \
                 to march it with dynamic range re-sizing and locate the blow-up time."
            ),
        ),
        other => CliError::Failure(other.to_string()),
    }
}

fn plan_summary(report: &SolveReport) -> String {
    let mut s = String::new();
    let plan = &report.plan;
    let binding = match plan.binding {
        crate::solver::ThetaBinding::Formula => "contraction formula",
        crate::solver::ThetaBinding::Separation => "characteristic separation",
        crate::solver::ThetaBinding::UserCap => "user cap",
    };
    let _ = writeln!(
        s,
        "plan: {} slab(s) of width {:.6e} (theta target {:.6e}, bound by {binding}, q = {:.6e})",
        plan.n_slabs(),
        plan.width,
        plan.theta_target,
        plan.q
    );
    for (i, d) in report.slab_diags.iter().enumerate() {
        let ratio = d
            .max_ratio()
            .map(|r| format!("{r:.3e}"))
            .unwrap_or_else(|| "n/a".to_string());
        let _ = writeln!(
            s,
            "  slab {} [{:.6}, {:.6}]: {} sweep(s), {}, max increment ratio {}",
            i + 1,
            d.t_start,
            d.t_end,
            d.iterations,
            if d.converged { "converged" } else { "stalled" },
            ratio
        );
    }
    if let Some(dp) = &report.deriv_plan {
        let _ = writeln!(
            s,
            "derivative plan: {} slab(s) of width {:.6e}",
            dp.n_slabs(),
            dp.width
        );
    }
    s
}

fn cmd_solve(
    common: &CommonArgs,
    derivatives: bool,
    emit_plot: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let cfg = load(common)?;
    let t = horizon(common, &cfg)?;
    let p = build_problem(&cfg)?;
    let (_m, lip) = resolve_box(&cfg, &p, t)?;
    let opts = cfg.solver_options();

    let (field, report) =
        solve(&p, cfg.grid.nx, t, &lip, &opts, derivatives).map_err(|e| solve_failure(e, t))?;

    let bytes = match cfg.output.format {
        OutputFormat::Csv => {
            let mut b = Vec::new();
            field.write_csv(&mut b)?;
            b
        }
        OutputFormat::Json => json_artifact(&field)?,
    };
    let to_file = emit_artifact(common, &cfg, &bytes, out)?;

    if let Some(plot) = emit_plot {
        let mut b = Vec::new();
        field.write_plot_csv(&mut b)?;
        atomic_write(plot, &b)
            .map_err(|e| CliError::Failure(format!("cannot write {}: {e}", plot.display())))?;
        if to_file {
            writeln!(out, "wrote {}", plot.display())?;
        }
    }

    if to_file {
        write!(out, "{}", plan_summary(&report))?;
        writeln!(out, "sup |u| = {:.6e}", field.sup_abs_u())?;
        if let Some(d) = field.sup_abs_dudx() {
            writeln!(out, "sup |du/dx| = {:.6e}", d)?;
        }
        if let Some(d) = field.sup_abs_dudt() {
            writeln!(out, "sup |du/dt| = {:.6e}", d)?;
        }
    }
    Ok(())
}

/// JSON artifact of the `bounds` command.
#[derive(serde::Serialize)]
struct BoundsArtifact {
    box_radius: f64,
    lipschitz: LipschitzEstimate,
    data_bounds: PhiPsi,
    apriori: AprioriReport,
}

fn cmd_bounds(common: &CommonArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = load(common)?;
    let t = horizon(common, &cfg)?;
    let p = build_problem(&cfg)?;
    let (m, lip) = resolve_box(&cfg, &p, t)?;
    let spec = cfg.sampling_spec();
    let pp = compute_phi_psi(&p, t, m, &spec).map_err(|e| CliError::Failure(e.to_string()))?;
    let apriori = apriori_bounds(&p, &lip, t, &pp);

    let artifact = BoundsArtifact {
        box_radius: m,
        lipschitz: lip,
        data_bounds: pp,
        apriori,
    };
    let bytes = json_artifact(&artifact)?;
    let to_file = emit_artifact(common, &cfg, &bytes, out)?;
    if to_file {
        writeln!(
            out,
            "L_f = {:.6e}, L_h = {:.6e}, theta0 = {:.6e}, slabs = {}",
            artifact.lipschitz.l_f,
            artifact.lipschitz.l_h,
            artifact.apriori.theta0,
            artifact.apriori.slabs0
        )?;
    }
    Ok(())
}

fn cmd_certify(common: &CommonArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = load(common)?;
    let t = horizon(common, &cfg)?;
    let p = build_problem(&cfg)?;
    let cert_cfg = cfg.certificate.as_ref().ok_or_else(|| {
        CliError::Usage(
            "certify needs a `certificate` section: majorant {sigma, delta, F, H} plus C_f and C_h"
                .to_string(),
        )
    })?;
    let mj = &cert_cfg.majorant;
    let maj_f = ExprMajorant::for_f(&mj.f, mj.sigma, mj.delta)
        .map_err(|e| CliError::Usage(format!("certificate.majorant.F: {e}")))?;
    let maj_h = ExprMajorant::for_h(&mj.h, mj.sigma, mj.delta)
        .map_err(|e| CliError::Usage(format!("certificate.majorant.H: {e}")))?;

    let cert = certify_growth(
        &p,
        &maj_f,
        &maj_h,
        cert_cfg.c_f,
        cert_cfg.c_h,
        &DEFAULT_PROBE_RADII,
        t,
        &cfg.sampling_spec(),
    )
    .map_err(|e| CliError::Failure(e.to_string()))?;

    let bytes = json_artifact(&cert)?;
    let to_file = emit_artifact(common, &cfg, &bytes, out)?;
    if to_file {
        let r = cert
            .r
            .map(|r| format!("{r:.6e}"))
            .unwrap_or_else(|| "none".to_string());
        writeln!(
            out,
            "class = {}, certified radius r = {r}",
            serde_json::to_value(cert.class)
                .ok()
                .and_then(|v| v.as_str().map(String::from))
                .unwrap_or_default()
        )?;
    }
    Ok(())
}

fn cmd_blowup(common: &CommonArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = load(common)?;
    let t = horizon(common, &cfg)?;
    let p = build_problem(&cfg)?;
    let opts = BlowupOptions {
        theta_min: cfg.blowup.theta_min,
        eps_fix: cfg.solver.eps_fix,
        max_iter: cfg.solver.max_iter,
        ..BlowupOptions::default()
    };
    let verdict = run_until_blowup_with(&p, cfg.blowup.u_max, t, cfg.grid.nx, &opts)
        .map_err(|e| CliError::Failure(e.to_string()))?;

    let bytes = json_artifact(&verdict)?;
    let to_file = emit_artifact(common, &cfg, &bytes, out)?;
    if to_file {
        let tstar = verdict
            .t_star
            .map(|v| format!("{v:.6}"))
            .unwrap_or_else(|| "n/a".to_string());
        writeln!(
            out,
            "verdict: {} (reached t = {:.6}, peak = {:.6e}, T* estimate = {tstar})",
            verdict.status.as_str(),
            verdict.reached_t,
            verdict.peak
        )?;
    }
    match verdict.status {
        BlowupStatus::Inconclusive => Err(CliError::Failure(format!(
            "the march was inconclusive: {}",
            verdict.trigger
        ))),
        _ => Ok(()),
    }
}

fn parse_family(spec: &str) -> Result<GrowthFamily, CliError> {
    let s = spec.trim().to_ascii_lowercase();
    let parse_arg = |inner: &str, what: &str| -> Result<f64, CliError> {
        inner.parse::<f64>().map_err(|_| {
            CliError::Usage(format!("bad {what} in family spec `{spec}`"))
        })
    };
    if let Some(rest) = s.strip_prefix("logpow(").and_then(|r| r.strip_suffix(')')) {
        return Ok(GrowthFamily::LogPow {
            p: parse_arg(rest, "exponent")?,
        });
    }
    if let Some(rest) = s.strip_prefix("power(").and_then(|r| r.strip_suffix(')')) {
        return Ok(GrowthFamily::Power {
            q: parse_arg(rest, "exponent")?,
        });
    }
    match s.as_str() {
        "sin" | "lipschitz-sin" => Ok(GrowthFamily::LipschitzSin),
        "qll" => Ok(GrowthFamily::Qll),
        "ll" => Ok(GrowthFamily::Ll),
        _ => Err(CliError::Usage(format!(
            "unknown family spec `{spec}`; use sin, qll, ll, logpow(P), or power(Q)"
        ))),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_scan(
    common: &CommonArgs,
    family: &[String],
    a: &[f64],
    c: &[f64],
    nx: Option<usize>,
    u_max: Option<f64>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    // the scan has its own problem families, so a config is optional here
    let cfg = if common.config.is_some() || common.preset.is_some() {
        Some(load(common)?)
    } else {
        None
    };
    let t_max = match common.t {
        Some(t) if t > 0.0 && t.is_finite() => t,
        Some(t) => {
            return Err(CliError::Usage(format!(
                "the time horizon must be a positive finite number, got {t}"
            )))
        }
        None => cfg.as_ref().map(|c| c.blowup.t_max).unwrap_or(10.0),
    };
    let nx = nx.or(cfg.as_ref().map(|c| c.grid.nx)).unwrap_or(50);
    let u_max = u_max
        .or(cfg.as_ref().map(|c| c.blowup.u_max))
        .unwrap_or(1e6);

    let families = if family.is_empty() {
        vec![
            GrowthFamily::Power { q: 1.0 },
            GrowthFamily::Power { q: 1.5 },
            GrowthFamily::Power { q: 2.0 },
        ]
    } else {
        family
            .iter()
            .map(|s| parse_family(s))
            .collect::<Result<Vec<_>, _>>()?
    };
    let a_values = if a.is_empty() { vec![A_MIN_LOGLOG] } else { a.to_vec() };
    let c_values = if c.is_empty() { vec![1.0] } else { c.to_vec() };
    let mut grid = Vec::with_capacity(a_values.len() * c_values.len());
    for &av in &a_values {
        for &cv in &c_values {
            grid.push((av, cv));
        }
    }

    let rows = frontier_scan(&families, &grid, u_max, t_max, nx);
    let mut bytes = Vec::new();
    write_scan_csv(&rows, &mut bytes)?;

    match &cfg {
        Some(cfg) => {
            emit_artifact(common, cfg, &bytes, out)?;
        }
        None => match &common.out {
            Some(p) => {
                atomic_write(p, &bytes).map_err(|e| {
                    CliError::Failure(format!("cannot write {}: {e}", p.display()))
                })?;
                writeln!(out, "wrote {}", p.display())?;
            }
            None => out.write_all(&bytes)?,
        },
    }

    if rows.iter().all(|r| r.error.is_some()) {
        return Err(CliError::Failure(
            "every scan row failed; see the error column".to_string(),
        ));
    }
    Ok(())
}

fn cmd_preset(name: &str, path: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    let text = preset_json(name).ok_or_else(|| unknown_preset(name))?;
    match path {
        Some(p) => {
            atomic_write(p, text.as_bytes())
                .map_err(|e| CliError::Failure(format!("cannot write {}: {e}", p.display())))?;
            writeln!(out, "wrote {}", p.display())?;
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}
