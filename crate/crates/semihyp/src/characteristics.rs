//! Backward characteristic tracing.
//!
//! For component i the characteristic through (x,t) solves dxi/dtau =
//! lambda_i(xi, tau). Every speed keeps a fixed sign, so a backward trace
//! moves monotonically toward the component's inflow face; it either reaches
//! the requested floor time or crosses that face, and the crossing time is
//! sharpened by bisection on the last partial step.

use serde::Serialize;

use crate::expr::EvalError;
use crate::problem::{Face, HyperbolicProblem};

/// Default face-crossing bisection tolerance (in time units of step size).
pub const EPS_EVT: f64 = 1e-10;

/// One backward characteristic: anchor, the (tau, xi) path sampled at the
/// supplied time levels, and where it met the parabolic boundary.
#[derive(Clone, Debug, Serialize)]
pub struct CharacteristicTrace {
    pub component: usize,
    /// (x, t) the trace starts from.
    pub anchor: (f64, f64),
    /// (tau, xi) pairs with tau strictly decreasing from the anchor time
    /// down to `t_entry`. The last sample sits on the entry boundary.
    pub samples: Vec<(f64, f64)>,
    pub t_entry: f64,
    pub entry_face: Face,
}

impl CharacteristicTrace {
    /// Abscissa where the trace meets the parabolic boundary.
    pub fn entry_xi(&self) -> f64 {
        self.samples.last().expect("trace has at least the anchor").1
    }
}

/// One classical 4th-order step of size h backward in time from (xi, tau).
fn rk4_back(
    p: &HyperbolicProblem,
    i: usize,
    xi: f64,
    tau: f64,
    h: f64,
) -> Result<f64, EvalError> {
    let k1 = p.lambda_at(i, xi, tau)?;
    let k2 = p.lambda_at(i, xi - 0.5 * h * k1, tau - 0.5 * h)?;
    let k3 = p.lambda_at(i, xi - 0.5 * h * k2, tau - 0.5 * h)?;
    let k4 = p.lambda_at(i, xi - h * k3, tau - h)?;
    Ok(xi - h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
}

/// Trace component i backward from (x, times.last()) through the given time
/// levels. `times` is ascending; `times[0]` is the floor. One integrator step
/// is taken per level interval so the samples land exactly on the levels,
/// except for a final lateral-crossing sample at the bisected crossing time.
pub fn trace_back_times(
    p: &HyperbolicProblem,
    i: usize,
    x: f64,
    times: &[f64],
    eps_evt: f64,
) -> Result<CharacteristicTrace, EvalError> {
    assert!(!times.is_empty(), "need at least one time level");
    let t_anchor = *times.last().unwrap();
    let floor = times[0];
    let conv = p.convention();
    let mut samples = vec![(t_anchor, x)];

    if times.len() == 1 || t_anchor <= floor {
        return Ok(CharacteristicTrace {
            component: i,
            anchor: (x, t_anchor),
            samples,
            t_entry: t_anchor,
            entry_face: Face::Bottom,
        });
    }
    // An anchor sitting on the inflow face exits immediately: backward motion
    // points out of the strip there.
    if x == conv.inflow_x(i) {
        return Ok(CharacteristicTrace {
            component: i,
            anchor: (x, t_anchor),
            samples,
            t_entry: t_anchor,
            entry_face: conv.inflow_face(i),
        });
    }

    let mut xi = x;
    for m in (1..times.len()).rev() {
        let tau_hi = times[m];
        let tau_lo = times[m - 1];
        let h = tau_hi - tau_lo;
        let xi_new = rk4_back(p, i, xi, tau_hi, h)?;
        if xi_new <= 0.0 || xi_new >= 1.0 {
            let (face, face_x) = if xi_new <= 0.0 {
                (Face::Left, 0.0)
            } else {
                (Face::Right, 1.0)
            };
            // Smallest partial step s with the position at or past the face;
            // motion is monotone toward one face, so bisection is safe.
            let mut lo = 0.0_f64;
            let mut hi = h;
            while hi - lo > eps_evt {
                let mid = 0.5 * (lo + hi);
                let pos = rk4_back(p, i, xi, tau_hi, mid)?;
                let out = if face_x == 0.0 { pos <= 0.0 } else { pos >= 1.0 };
                if out {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let t_star = tau_hi - hi;
            samples.push((t_star, face_x));
            return Ok(CharacteristicTrace {
                component: i,
                anchor: (x, t_anchor),
                samples,
                t_entry: t_star,
                entry_face: face,
            });
        }
        samples.push((tau_lo, xi_new));
        xi = xi_new;
    }

    Ok(CharacteristicTrace {
        component: i,
        anchor: (x, t_anchor),
        samples,
        t_entry: floor,
        entry_face: Face::Bottom,
    })
}

/// Trace backward from (x, t) to `floor` at fixed step `dt` (the last step
/// may be shorter so the levels tile `[floor, t]` exactly).
pub fn trace_back(
    p: &HyperbolicProblem,
    i: usize,
    x: f64,
    t: f64,
    floor: f64,
    dt: f64,
    eps_evt: f64,
) -> Result<CharacteristicTrace, EvalError> {
    assert!(floor <= t, "floor must not exceed the anchor time");
    assert!(dt > 0.0, "step must be positive");
    let span = t - floor;
    if span == 0.0 {
        return trace_back_times(p, i, x, &[t], eps_evt);
    }
    let nsteps = (span / dt).ceil().max(1.0) as usize;
    let mut times: Vec<f64> = (0..=nsteps)
        .map(|s| floor + span * s as f64 / nsteps as f64)
        .collect();
    times[nsteps] = t;
    trace_back_times(p, i, x, &times, eps_evt)
}

/// Earliest boundary hit of the backward characteristic through (x, t):
/// returns the entry time and face. Uses floor 0 and an internal step of
/// 1e-3, fine enough for entry times accurate to ~1e-8 on smooth speeds.
pub fn entry_time(
    p: &HyperbolicProblem,
    i: usize,
    x: f64,
    t: f64,
) -> Result<(f64, Face), EvalError> {
    let tr = trace_back(p, i, x, t, 0.0, 1e-3, EPS_EVT)?;
    Ok((tr.t_entry, tr.entry_face))
}

/// (min |lambda_i|, max |lambda_i|) over all components on a
/// `density x density` lattice of [0,1] x [0,t_max].
pub fn lambda_extrema(
    p: &HyperbolicProblem,
    t_max: f64,
    density: usize,
) -> Result<(f64, f64), EvalError> {
    let density = density.max(2);
    let mut min_abs = f64::INFINITY;
    let mut max_abs = 0.0_f64;
    for i in 0..p.n {
        for xi in 0..density {
            for ti in 0..density {
                let x = xi as f64 / (density - 1) as f64;
                let t = t_max * ti as f64 / (density - 1) as f64;
                let v = p.lambda_at(i, x, t)?.abs();
                min_abs = min_abs.min(v);
                max_abs = max_abs.max(v);
            }
        }
    }
    Ok((min_abs, max_abs))
}

/// Slab width below which characteristics started on opposite faces cannot
/// meet: each travels less than half the strip. Computed as 0.5 / max|lambda|
/// on the default 101 x 101 validation lattice.
pub fn separation_width(p: &HyperbolicProblem, t_max: f64) -> Result<f64, EvalError> {
    let (_, max_abs) = lambda_extrema(p, t_max, 101)?;
    if max_abs == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(0.5 / max_abs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_lambda(l1: &str, l2: &str) -> HyperbolicProblem {
        HyperbolicProblem::from_strs(
            2,
            1,
            &[l1, l2],
            &["0", "0"],
            &["0", "0"],
            &["v2", "v1"],
        )
        .unwrap()
    }

    /// xi(tau) for dxi/dtau = xi + 0.5 through (x0, t0).
    fn exp_closed_form(x0: f64, t0: f64, tau: f64) -> f64 {
        (x0 + 0.5) * (tau - t0).exp() - 0.5
    }

    #[test]
    fn straight_line_bottom_entry() {
        let p = with_lambda("-1", "1");
        let tr = trace_back(&p, 1, 0.5, 0.3, 0.0, 0.05, EPS_EVT).unwrap();
        assert_eq!(tr.entry_face, Face::Bottom);
        assert_eq!(tr.t_entry, 0.0);
        assert!((tr.entry_xi() - 0.2).abs() <= 1e-12);
        // samples strictly decreasing in tau, xi within the strip
        for w in tr.samples.windows(2) {
            assert!(w[1].0 < w[0].0);
        }
        assert!(tr.samples.iter().all(|&(_, xi)| (0.0..=1.0).contains(&xi)));
    }

    #[test]
    fn straight_line_lateral_entry() {
        let p = with_lambda("-1", "1");
        // positive speed: backward trace drifts left, hits x=0 at tau=0.2
        let tr = trace_back(&p, 1, 0.1, 0.3, 0.0, 0.05, EPS_EVT).unwrap();
        assert_eq!(tr.entry_face, Face::Left);
        assert!((tr.t_entry - 0.2).abs() <= 1e-9);
        assert_eq!(tr.entry_xi(), 0.0);

        // negative speed: drifts right, hits x=1 at tau=0.2
        let (te, face) = entry_time(&p, 0, 0.9, 0.3).unwrap();
        assert_eq!(face, Face::Right);
        assert!((te - 0.2).abs() <= 1e-9);
    }

    #[test]
    fn inflow_anchor_is_zero_length_lateral() {
        let p = with_lambda("-1", "1");
        let tr = trace_back(&p, 1, 0.0, 0.5, 0.0, 0.05, EPS_EVT).unwrap();
        assert_eq!(tr.entry_face, Face::Left);
        assert_eq!(tr.t_entry, 0.5);
        assert_eq!(tr.samples.len(), 1);
        let tr = trace_back(&p, 0, 1.0, 0.5, 0.0, 0.05, EPS_EVT).unwrap();
        assert_eq!(tr.entry_face, Face::Right);
        assert_eq!(tr.t_entry, 0.5);
    }

    #[test]
    fn anchor_at_floor_is_bottom() {
        let p = with_lambda("-1", "1");
        let (te, face) = entry_time(&p, 1, 0.4, 0.0).unwrap();
        assert_eq!(face, Face::Bottom);
        assert_eq!(te, 0.0);
    }

    #[test]
    fn exponential_field_matches_closed_form() {
        let p = with_lambda("-1", "x+0.5");
        let tr = trace_back(&p, 1, 0.9, 0.5, 0.0, 1e-3, EPS_EVT).unwrap();
        assert_eq!(tr.entry_face, Face::Bottom);
        // 10 interior probes plus the endpoint
        let step = tr.samples.len() / 10;
        for s in (0..tr.samples.len()).step_by(step.max(1)) {
            let (tau, xi) = tr.samples[s];
            assert!(
                (xi - exp_closed_form(0.9, 0.5, tau)).abs() <= 1e-8,
                "mismatch at tau={tau}"
            );
        }
        let (tau_end, xi_end) = *tr.samples.last().unwrap();
        assert_eq!(tau_end, 0.0);
        assert!((xi_end - exp_closed_form(0.9, 0.5, 0.0)).abs() <= 1e-8);
    }

    #[test]
    fn exponential_field_lateral_crossing_time() {
        let p = with_lambda("-1", "x+0.5");
        // (x0+0.5) e^{tau-t} = 0.5 at tau = t + ln(0.5/(x0+0.5))
        let tr = trace_back(&p, 1, 0.2, 1.0, 0.0, 1e-3, EPS_EVT).unwrap();
        assert_eq!(tr.entry_face, Face::Left);
        let expected = 1.0 + (0.5_f64 / 0.7).ln();
        assert!(
            (tr.t_entry - expected).abs() <= 1e-7,
            "t_entry={} expected={}",
            tr.t_entry,
            expected
        );
        assert_eq!(tr.entry_xi(), 0.0);
    }

    #[test]
    fn fourth_order_convergence() {
        let p = with_lambda("-1", "x+0.5");
        let exact = exp_closed_form(0.9, 0.5, 0.0);
        let mut errs = Vec::new();
        for dt in [0.1, 0.05] {
            let tr = trace_back(&p, 1, 0.9, 0.5, 0.0, dt, EPS_EVT).unwrap();
            errs.push((tr.entry_xi() - exact).abs());
        }
        assert!(
            errs[0] / errs[1] >= 8.0,
            "halving the step should cut the error by >= 8x, got {:?}",
            errs
        );
    }

    #[test]
    fn semigroup_on_aligned_levels() {
        let p = with_lambda("-1", "x+0.5");
        let times: Vec<f64> = (0..=80).map(|s| s as f64 * 0.01).collect();
        let direct = trace_back_times(&p, 1, 0.9, &times, EPS_EVT).unwrap();
        let upper = trace_back_times(&p, 1, 0.9, &times[40..], EPS_EVT).unwrap();
        let mid_xi = upper.entry_xi();
        assert_eq!(upper.entry_face, Face::Bottom);
        let lower = trace_back_times(&p, 1, mid_xi, &times[..=40], EPS_EVT).unwrap();
        // identical step grid, so the composition reproduces the direct trace
        assert!((lower.entry_xi() - direct.entry_xi()).abs() <= 1e-14);
    }

    #[test]
    fn sign_coherence_of_lateral_exits() {
        let p = with_lambda("-1", "1");
        // negative speed exits right, positive exits left
        let tr = trace_back(&p, 0, 0.95, 1.0, 0.0, 0.01, EPS_EVT).unwrap();
        assert_eq!(tr.entry_face, Face::Right);
        for w in tr.samples.windows(2) {
            assert!(w[1].1 >= w[0].1, "negative speed must drift right backward");
        }
        let tr = trace_back(&p, 1, 0.05, 1.0, 0.0, 0.01, EPS_EVT).unwrap();
        assert_eq!(tr.entry_face, Face::Left);
    }

    #[test]
    fn separation_width_from_lattice_max() {
        let p = with_lambda("-1", "1");
        assert_eq!(separation_width(&p, 1.0).unwrap(), 0.5);
        let p = with_lambda("-2", "3");
        assert!((separation_width(&p, 1.0).unwrap() - 1.0 / 6.0).abs() <= 1e-15);
        let p = with_lambda("-1", "1+x");
        assert_eq!(separation_width(&p, 1.0).unwrap(), 0.25);
    }
}
