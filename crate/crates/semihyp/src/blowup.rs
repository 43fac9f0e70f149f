//! Finite-time blow-up detection and growth-family frontier scans.
//!
//! The marcher advances slab by slab like the solver, but re-sizes the
//! working box before every slab: the Lipschitz constants are re-estimated
//! over |u| <= M with M = 2n * (current peak), and the slab width follows.
//! Blow-up is declared when the peak crosses the caller's threshold or when
//! the slab width collapses; the width is proportional to 1/L_f, so its
//! collapse is the scheme-level image of the contraction argument failing.
//!
//! The blow-up time estimate assumes a first-order pole, for which 1/peak is
//! asymptotically linear in t; the method tag on the verdict records that
//! assumption.

use rayon::prelude::*;
use serde::Serialize;
use std::io::{self, Write};
use thiserror::Error;

use crate::bounds::{
    estimate_lipschitz, q0_value, theta_from_q, BoundsError, SamplingSpec,
};
use crate::characteristics::separation_width;
use crate::expr::EvalError;
use crate::problem::{HyperbolicProblem, ProblemError};
use crate::solver::{solve_slab, SolveError, SolverOptions};

#[derive(Debug, Error)]
pub enum BlowupError {
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("{0}")]
    BadInput(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BlowupStatus {
    #[serde(rename = "COMPLETED")]
    Completed,
    #[serde(rename = "BLOWUP_DETECTED")]
    BlowupDetected,
    #[serde(rename = "INCONCLUSIVE")]
    Inconclusive,
}

impl BlowupStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            BlowupStatus::Completed => "COMPLETED",
            BlowupStatus::BlowupDetected => "BLOWUP_DETECTED",
            BlowupStatus::Inconclusive => "INCONCLUSIVE",
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PeakSample {
    pub t: f64,
    pub peak: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BlowupVerdict {
    pub status: BlowupStatus,
    /// Last time reached by a committed slab (equals t_max when COMPLETED).
    pub reached_t: f64,
    /// Estimated blow-up time, when one was detected and the fit is sane.
    pub t_star: Option<f64>,
    pub t_star_method: Option<&'static str>,
    pub u_max: f64,
    pub t_max: f64,
    pub nx: usize,
    /// Width of every committed slab, in order.
    pub theta_history: Vec<f64>,
    /// Peak sup-norm after every committed slab.
    pub peak_history: Vec<PeakSample>,
    pub peak: f64,
    pub slabs: usize,
    /// Lipschitz-box doublings spent on non-converged slabs.
    pub m_doublings: usize,
    /// Which stop rule fired.
    pub trigger: String,
}

#[derive(Clone, Debug)]
pub struct BlowupOptions {
    /// Slab width below which blow-up is declared.
    pub theta_min: f64,
    pub levels_per_slab: usize,
    /// Hard cap on committed slabs before giving up as INCONCLUSIVE.
    pub max_slabs: usize,
    /// Base seed of the per-slab coarse Lipschitz sampling.
    pub seed: u64,
    pub theta_cap: Option<f64>,
    pub eps_fix: f64,
    pub max_iter: usize,
}

impl Default for BlowupOptions {
    fn default() -> Self {
        BlowupOptions {
            theta_min: 1e-8,
            levels_per_slab: 4,
            max_slabs: 200_000,
            seed: 27_182_818,
            theta_cap: None,
            eps_fix: 1e-10,
            max_iter: 60,
        }
    }
}

/// Least-squares line through (t, 1/peak); its root in t is the pole
/// estimate. None when fewer than two usable samples or the fit does not
/// point at a future pole.
fn fit_pole_time(samples: &[PeakSample]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.peak > 0.0)
        .map(|s| (s.t, 1.0 / s.peak))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let (mut st, mut sy, mut stt, mut sty) = (0.0, 0.0, 0.0, 0.0);
    for &(t, y) in &pts {
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
    }
    let det = n * stt - st * st;
    if det.abs() < 1e-300 {
        return None;
    }
    let slope = (n * sty - st * sy) / det;
    let intercept = (sy * stt - st * sty) / det;
    if slope >= 0.0 {
        return None;
    }
    let t_star = -intercept / slope;
    (t_star.is_finite() && t_star > 0.0).then_some(t_star)
}

const T_STAR_METHOD: &str = "inverse-peak-linear-fit";
/// How many trailing peak samples feed the pole fit.
const T_STAR_WINDOW: usize = 10;

fn sup_abs(levels: &[Vec<Vec<f64>>]) -> f64 {
    let mut s = 0.0_f64;
    for lvl in levels {
        for comp in lvl {
            for &v in comp {
                s = s.max(v.abs());
            }
        }
    }
    s
}

/// March with a dynamically re-sized Lipschitz box until the horizon, the
/// peak threshold, or slab-width collapse. Expects a problem that passes
/// validation and zero-order compatibility; `u_max` may be infinite to
/// disable the threshold stop.
pub fn run_until_blowup(
    p: &HyperbolicProblem,
    u_max: f64,
    t_max: f64,
    nx: usize,
) -> Result<BlowupVerdict, BlowupError> {
    run_until_blowup_with(p, u_max, t_max, nx, &BlowupOptions::default())
}

pub fn run_until_blowup_with(
    p: &HyperbolicProblem,
    u_max: f64,
    t_max: f64,
    nx: usize,
    opts: &BlowupOptions,
) -> Result<BlowupVerdict, BlowupError> {
    if !(u_max > 0.0) {
        return Err(BlowupError::BadInput(format!(
            "u_max must be positive, got {u_max}"
        )));
    }
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(BlowupError::BadInput(format!(
            "t_max must be positive and finite, got {t_max}"
        )));
    }
    if nx < 2 {
        return Err(BlowupError::BadInput(format!("nx must be >= 2, got {nx}")));
    }
    if opts.levels_per_slab < 1 {
        return Err(BlowupError::BadInput(
            "levels_per_slab must be >= 1".to_string(),
        ));
    }
    crate::solver::check_speed_signs(p, t_max)?;

    let n = p.n;
    let xs: Vec<f64> = (0..=nx).map(|j| j as f64 / nx as f64).collect();
    let mut floor: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(xs.len());
        for &x in &xs {
            row.push(p.phi_at(i, x)?);
        }
        floor.push(row);
    }
    let mut peak = floor
        .iter()
        .flatten()
        .fold(0.0_f64, |acc, &v| acc.max(v.abs()));

    // the speeds do not depend on u, so the separation width is fixed
    let theta_sep = separation_width(p, t_max)?;
    let sopts = SolverOptions {
        eps_fix: opts.eps_fix,
        max_iter: opts.max_iter,
        ..Default::default()
    };

    let mut t_cur = 0.0_f64;
    let mut theta_history = Vec::new();
    let mut peak_history = Vec::new();
    let mut m_doublings = 0usize;
    let time_eps = t_max * 1e-12;

    let status;
    let trigger;
    loop {
        if peak >= u_max {
            status = BlowupStatus::BlowupDetected;
            trigger = format!("peak {peak:.6e} reached the threshold {u_max:.6e}");
            break;
        }
        if t_cur >= t_max - time_eps {
            status = BlowupStatus::Completed;
            trigger = format!("reached the horizon t = {t_max}");
            t_cur = t_max;
            break;
        }
        if theta_history.len() >= opts.max_slabs {
            status = BlowupStatus::Inconclusive;
            trigger = format!("slab budget of {} exhausted", opts.max_slabs);
            break;
        }

        let slab_idx = theta_history.len() as u64;
        let mut m_box = 2.0 * n as f64 * peak;
        if m_box == 0.0 {
            m_box = 1.0;
        }

        // one retry with a doubled box when the fixed point stalls
        let mut committed = false;
        let mut stalled_iters = 0;
        for attempt in 0..2 {
            let spec = SamplingSpec::coarse(opts.seed.wrapping_add(slab_idx));
            let lip = estimate_lipschitz(p, t_max, m_box, &spec)?;
            let mut theta = theta_from_q(q0_value(n, lip.l_f, lip.l_h)).min(theta_sep);
            if let Some(cap) = opts.theta_cap {
                theta = theta.min(cap);
            }
            if theta < opts.theta_min {
                status = BlowupStatus::BlowupDetected;
                trigger = format!(
                    "slab width {theta:.3e} collapsed below {:.3e} at t = {t_cur:.6}",
                    opts.theta_min
                );
                return Ok(finish(
                    status,
                    trigger,
                    t_cur,
                    peak,
                    u_max,
                    t_max,
                    nx,
                    theta_history,
                    peak_history,
                    m_doublings,
                ));
            }
            let width = theta.min(t_max - t_cur);
            let levels = opts.levels_per_slab;
            let slab_times: Vec<f64> = (0..=levels)
                .map(|i| {
                    if i == levels {
                        t_cur + width
                    } else {
                        t_cur + width * i as f64 / levels as f64
                    }
                })
                .collect();

            match solve_slab(p, &xs, &slab_times, &floor, &sopts) {
                Err(SolveError::NonFinite { t }) => {
                    status = BlowupStatus::BlowupDetected;
                    trigger = format!("non-finite values while iterating the slab at t = {t:.6}");
                    return Ok(finish(
                        status,
                        trigger,
                        t_cur,
                        peak,
                        u_max,
                        t_max,
                        nx,
                        theta_history,
                        peak_history,
                        m_doublings,
                    ));
                }
                Err(e) => return Err(BlowupError::Solve(e)),
                Ok((levels_u, diag)) => {
                    if diag.converged {
                        floor = levels_u.last().unwrap().clone();
                        peak = peak.max(sup_abs(&levels_u[1..]));
                        t_cur = slab_times[levels];
                        theta_history.push(width);
                        peak_history.push(PeakSample { t: t_cur, peak });
                        committed = true;
                        break;
                    }
                    stalled_iters = diag.iterations;
                    if attempt == 0 {
                        m_box *= 2.0;
                        m_doublings += 1;
                    }
                }
            }
        }
        if !committed {
            status = BlowupStatus::Inconclusive;
            trigger = format!(
                "fixed-point iteration did not converge in {stalled_iters} sweeps \
                 at t = {t_cur:.6}, even after doubling the Lipschitz box"
            );
            break;
        }
    }

    Ok(finish(
        status,
        trigger,
        t_cur,
        peak,
        u_max,
        t_max,
        nx,
        theta_history,
        peak_history,
        m_doublings,
    ))
}

#[allow(clippy::too_many_arguments)]
fn finish(
    status: BlowupStatus,
    trigger: String,
    reached_t: f64,
    peak: f64,
    u_max: f64,
    t_max: f64,
    nx: usize,
    theta_history: Vec<f64>,
    peak_history: Vec<PeakSample>,
    m_doublings: usize,
) -> BlowupVerdict {
    let (t_star, t_star_method) = if status == BlowupStatus::BlowupDetected {
        let tail = &peak_history[peak_history.len().saturating_sub(T_STAR_WINDOW)..];
        match fit_pole_time(tail) {
            Some(ts) => (Some(ts), Some(T_STAR_METHOD)),
            None => (None, None),
        }
    } else {
        (None, None)
    };
    let slabs = theta_history.len();
    BlowupVerdict {
        status,
        reached_t,
        t_star,
        t_star_method,
        u_max,
        t_max,
        nx,
        theta_history,
        peak_history,
        peak,
        slabs,
        m_doublings,
        trigger,
    }
}

/// Nonlinearity growth families for the frontier scan, ordered here from
/// certifiably tame to blow-up grade. Each instantiates a 2-component system
/// with speeds -1/+1, boundary swap h = (v2, v1), and constant initial data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum GrowthFamily {
    /// f_i = sin(u_i): globally Lipschitz.
    LipschitzSin,
    /// f_i = u_i (log log(a + |u|^2))^{1/4}: quarter-power log-log growth.
    Qll,
    /// f_i = u_i log log(a + |u|^2): full log-log growth.
    Ll,
    /// f_i = u_i (log(a + |u|^2))^p.
    LogPow { p: f64 },
    /// f_i = u_i (a + |u|^2)^{(q-1)/2}: power growth of order q.
    Power { q: f64 },
}

/// Smallest shift that keeps log log positive in the log-log families,
/// e^e + 1.
pub const A_MIN_LOGLOG: f64 = 16.154262241479262;

impl GrowthFamily {
    pub fn id(&self) -> String {
        match self {
            GrowthFamily::LipschitzSin => "lipschitz-sin".to_string(),
            GrowthFamily::Qll => "qll".to_string(),
            GrowthFamily::Ll => "ll".to_string(),
            GrowthFamily::LogPow { p } => format!("logpow({p})"),
            GrowthFamily::Power { q } => format!("power({q})"),
        }
    }

    /// Growth factor applied to u_i, as a DSL expression in s = a + |u|^2.
    fn factor(&self, a: f64) -> Option<String> {
        let s = format!("({a} + u1*u1 + u2*u2)");
        match self {
            GrowthFamily::LipschitzSin => None,
            GrowthFamily::Qll => Some(format!("(loglog{s})^0.25")),
            GrowthFamily::Ll => Some(format!("loglog{s}")),
            GrowthFamily::LogPow { p } => Some(format!("(log{s})^{p}")),
            GrowthFamily::Power { q } => Some(format!("{s}^{}", (q - 1.0) / 2.0)),
        }
    }

    /// Instantiate the two-component test problem with shift `a` and
    /// constant initial data `c`.
    pub fn problem(&self, a: f64, c: f64) -> Result<HyperbolicProblem, BlowupError> {
        match self {
            GrowthFamily::Qll | GrowthFamily::Ll | GrowthFamily::LogPow { .. } => {
                if a < A_MIN_LOGLOG {
                    return Err(BlowupError::BadInput(format!(
                        "log-log families need a >= e^e + 1 = {A_MIN_LOGLOG}, got {a}"
                    )));
                }
            }
            GrowthFamily::Power { q } => {
                if !(a > 0.0) {
                    return Err(BlowupError::BadInput(format!(
                        "power family needs a > 0, got {a}"
                    )));
                }
                if !q.is_finite() || *q < 1.0 {
                    return Err(BlowupError::BadInput(format!(
                        "power family needs q >= 1, got {q}"
                    )));
                }
            }
            GrowthFamily::LipschitzSin => {}
        }
        if let GrowthFamily::LogPow { p } = self {
            if !p.is_finite() || *p <= 0.0 {
                return Err(BlowupError::BadInput(format!(
                    "logpow family needs p > 0, got {p}"
                )));
            }
        }
        if !c.is_finite() {
            return Err(BlowupError::BadInput("amplitude must be finite".to_string()));
        }
        let f: Vec<String> = match self.factor(a) {
            None => vec!["sin(u1)".to_string(), "sin(u2)".to_string()],
            Some(g) => vec![format!("u1*{g}"), format!("u2*{g}")],
        };
        let c_str = format!("{c}");
        Ok(HyperbolicProblem::from_strs(
            2,
            1,
            &["-1", "1"],
            &f,
            &[c_str.as_str(), c_str.as_str()],
            &["v2", "v1"],
        )?)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanRow {
    pub family: String,
    /// "a=...,c=..." of the instantiated problem.
    pub params: String,
    /// None when the run errored before producing a verdict.
    pub status: Option<BlowupStatus>,
    pub t_star: Option<f64>,
    pub reached_t: f64,
    pub peak: f64,
    pub nx: usize,
    pub u_max: f64,
    pub error: Option<String>,
}

/// Run every (family, a, c) combination independently and in parallel.
/// Per-row failures are recorded in the row; the scan itself always returns.
pub fn frontier_scan(
    families: &[GrowthFamily],
    grid: &[(f64, f64)],
    u_max: f64,
    t_max: f64,
    nx: usize,
) -> Vec<ScanRow> {
    let jobs: Vec<(GrowthFamily, f64, f64)> = families
        .iter()
        .flat_map(|fam| grid.iter().map(move |&(a, c)| (*fam, a, c)))
        .collect();
    jobs.par_iter()
        .map(|&(fam, a, c)| {
            let family = fam.id();
            let params = format!("a={a},c={c}");
            let run = fam
                .problem(a, c)
                .and_then(|p| run_until_blowup(&p, u_max, t_max, nx));
            match run {
                Ok(v) => ScanRow {
                    family,
                    params,
                    status: Some(v.status),
                    t_star: v.t_star,
                    reached_t: v.reached_t,
                    peak: v.peak,
                    nx,
                    u_max,
                    error: None,
                },
                Err(e) => ScanRow {
                    family,
                    params,
                    status: None,
                    t_star: None,
                    reached_t: 0.0,
                    peak: 0.0,
                    nx,
                    u_max,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}

/// CSV table of scan rows. Errored rows carry the verdict cell "ERROR"; the
/// full message lives on the row struct (and in JSON output).
pub fn write_scan_csv<W: Write>(rows: &[ScanRow], w: &mut W) -> io::Result<()> {
    writeln!(w, "family,params,verdict,T_star,reached_t,peak,nx,u_max")?;
    for r in rows {
        let verdict = r.status.map(|s| s.as_str()).unwrap_or("ERROR");
        let t_star = r.t_star.map(|v| format!("{v:.6e}")).unwrap_or_default();
        writeln!(
            w,
            "{},\"{}\",{},{},{:.6e},{:.6e},{},{:.6e}",
            r.family, r.params, verdict, t_star, r.reached_t, r.peak, r.nx, r.u_max
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn riccati(c: f64) -> HyperbolicProblem {
        let c_str = format!("{c}");
        HyperbolicProblem::from_strs(
            2,
            1,
            &["-1", "1"],
            &["u1*u1", "u2*u2"],
            &[c_str.as_str(), c_str.as_str()],
            &["v2", "v1"],
        )
        .unwrap()
    }

    #[test]
    fn pole_fit_recovers_exact_line() {
        // 1/peak = 2 - t, pole at t = 2
        let samples: Vec<PeakSample> = (0..8)
            .map(|k| {
                let t = 0.1 * k as f64;
                PeakSample {
                    t,
                    peak: 1.0 / (2.0 - t),
                }
            })
            .collect();
        let ts = fit_pole_time(&samples).unwrap();
        assert!((ts - 2.0).abs() <= 1e-12, "t* = {ts}");
        // growing 1/peak means no pole ahead
        let fading: Vec<PeakSample> = (0..5)
            .map(|k| PeakSample {
                t: k as f64,
                peak: 1.0 / (1.0 + k as f64),
            })
            .collect();
        assert!(fit_pole_time(&fading).is_none());
        assert!(fit_pole_time(&samples[..1]).is_none());
    }

    #[test]
    fn riccati_blowup_time_is_recovered() {
        let p = riccati(1.0);
        let v = run_until_blowup(&p, 1e4, 2.0, 50).unwrap();
        assert_eq!(v.status, BlowupStatus::BlowupDetected);
        assert!(v.peak >= 1e4);
        assert!(v.reached_t < 1.0);
        let ts = v.t_star.expect("pole estimate");
        assert!((ts - 1.0).abs() <= 0.05, "t* = {ts}");
        assert_eq!(v.t_star_method, Some("inverse-peak-linear-fit"));
        assert!(!v.theta_history.is_empty());
        // widths shrink as the solution grows
        let first = v.theta_history[1];
        let last = *v.theta_history.last().unwrap();
        assert!(last < first / 100.0, "first {first}, last {last}");
        assert_eq!(v.slabs, v.theta_history.len());
    }

    #[test]
    fn tame_problem_completes() {
        let fam = GrowthFamily::LipschitzSin;
        let p = fam.problem(A_MIN_LOGLOG, 0.5).unwrap();
        let v = run_until_blowup(&p, 1e6, 1.0, 30).unwrap();
        assert_eq!(v.status, BlowupStatus::Completed);
        assert_eq!(v.reached_t, 1.0);
        assert!(v.peak < 3.0, "peak = {}", v.peak);
        assert!(v.t_star.is_none());
    }

    #[test]
    fn stalled_iteration_is_inconclusive() {
        let p = riccati(1.0);
        let opts = BlowupOptions {
            max_iter: 1,
            ..Default::default()
        };
        let v = run_until_blowup_with(&p, 1e6, 1.0, 10, &opts).unwrap();
        assert_eq!(v.status, BlowupStatus::Inconclusive);
        assert_eq!(v.m_doublings, 1);
        assert!(v.trigger.contains("did not converge"));
    }

    #[test]
    fn family_instantiation_and_guards() {
        assert_eq!(GrowthFamily::Qll.id(), "qll");
        assert_eq!(GrowthFamily::LogPow { p: 1.5 }.id(), "logpow(1.5)");
        assert_eq!(GrowthFamily::Power { q: 2.0 }.id(), "power(2)");
        // a below the log-log shift is rejected
        assert!(matches!(
            GrowthFamily::Ll.problem(16.0, 1.0),
            Err(BlowupError::BadInput(_))
        ));
        assert!(matches!(
            GrowthFamily::Power { q: 2.0 }.problem(0.0, 1.0),
            Err(BlowupError::BadInput(_))
        ));
        // power(2): f_1(3,4) = 3 sqrt(17+25)
        let p = GrowthFamily::Power { q: 2.0 }.problem(17.0, 1.0).unwrap();
        let mut buf = Vec::new();
        let got = p.f_at(0, 0.5, 0.0, &[3.0, 4.0], &mut buf).unwrap();
        assert!((got - 3.0 * 42.0_f64.sqrt()).abs() <= 1e-12);
        // power(1) folds to plain u_i
        let p1 = GrowthFamily::Power { q: 1.0 }.problem(17.0, 1.0).unwrap();
        let got1 = p1.f_at(0, 0.5, 0.0, &[3.0, 4.0], &mut buf).unwrap();
        assert!((got1 - 3.0).abs() <= 1e-12);
        // qll factor at u = (1, 0): (loglog(a + 1))^{1/4} with a = e^e + 1
        let pq = GrowthFamily::Qll.problem(A_MIN_LOGLOG, 1.0).unwrap();
        let gq = pq.f_at(0, 0.0, 0.0, &[1.0, 0.0], &mut buf).unwrap();
        let want = ((A_MIN_LOGLOG + 1.0).ln().ln()).powf(0.25);
        assert!((gq - want).abs() <= 1e-12, "got {gq}, want {want}");
    }

    #[test]
    fn scan_detects_the_growth_dichotomy() {
        let rows = frontier_scan(
            &[GrowthFamily::Power { q: 2.0 }, GrowthFamily::Ll],
            &[(17.0, 1.0), (17.0, 2.0)],
            1e3,
            1.0,
            30,
        );
        assert_eq!(rows.len(), 4);
        // rows come back in family-major, grid-minor order
        assert_eq!(rows[0].family, "power(2)");
        assert_eq!(rows[0].params, "a=17,c=1");
        assert_eq!(rows[1].params, "a=17,c=2");
        assert_eq!(rows[2].family, "ll");
        for r in &rows[..2] {
            assert_eq!(r.status, Some(BlowupStatus::BlowupDetected), "{:?}", r);
            assert!(r.t_star.is_some());
        }
        for r in &rows[2..] {
            assert_eq!(r.status, Some(BlowupStatus::Completed), "{:?}", r);
            assert_eq!(r.reached_t, 1.0);
        }
        // larger amplitude cannot blow up later
        assert!(rows[1].t_star.unwrap() <= rows[0].t_star.unwrap());

        let mut csv1 = Vec::new();
        write_scan_csv(&rows, &mut csv1).unwrap();
        let text = String::from_utf8(csv1.clone()).unwrap();
        assert!(text.starts_with("family,params,verdict,T_star,reached_t,peak,nx,u_max\n"));
        assert!(text.contains("BLOWUP_DETECTED"));
        assert!(text.contains("COMPLETED"));

        // identical rerun is byte-identical
        let rows2 = frontier_scan(
            &[GrowthFamily::Power { q: 2.0 }, GrowthFamily::Ll],
            &[(17.0, 1.0), (17.0, 2.0)],
            1e3,
            1.0,
            30,
        );
        let mut csv2 = Vec::new();
        write_scan_csv(&rows2, &mut csv2).unwrap();
        assert_eq!(csv1, csv2);
    }

    #[test]
    fn scan_records_errors_without_stopping() {
        let rows = frontier_scan(
            &[GrowthFamily::Ll],
            &[(1.0, 1.0), (17.0, 0.5)],
            1e3,
            0.5,
            20,
        );
        assert_eq!(rows.len(), 2);
        assert!(rows[0].status.is_none());
        assert!(rows[0].error.as_deref().unwrap().contains("a >= e^e + 1"));
        assert_eq!(rows[1].status, Some(BlowupStatus::Completed));
        let mut csv = Vec::new();
        write_scan_csv(&rows, &mut csv).unwrap();
        assert!(String::from_utf8(csv).unwrap().contains("ERROR"));
    }
}
