//! Problem instances: n coupled transport equations on the strip 0 < x < 1,
//!
//! ```text
//! du_i/dt + lambda_i(x,t) du_i/dx = f_i(x, t, u1..un)
//! ```
//!
//! with initial data `u_i(x,0) = phi_i(x)` and nonlocal boundary conditions
//! driven by the trace vector v(t) of outflow values: `u_i = h_i(t, v)` on the
//! inflow face of each component. Components 1..k carry negative speeds,
//! components k+1..n positive speeds (indices here are 0-based, so i < k is
//! the negative group).

use serde::Serialize;
use thiserror::Error;

use crate::expr::{parse, Bindings, DiffError, EvalError, ExprAst, ParseError, VarSet};

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("n must be >= 1 and 1 <= k <= n (got n={n}, k={k})")]
    BadShape { n: usize, k: usize },
    #[error("expected {expected} expressions for {what}, got {got}")]
    BadLength {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("{what}[{index}]: {source}")]
    BadExpr {
        what: &'static str,
        index: usize,
        source: ParseError,
    },
    #[error("{what}[{index}] uses variable set {got:?}, expected {expected:?}")]
    WrongVarSet {
        what: &'static str,
        index: usize,
        expected: Vec<String>,
        got: Vec<String>,
    },
}

/// Which face of the strip a characteristic enters through, or the slab
/// bottom when it stays interior.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Face {
    Bottom,
    Left,
    Right,
}

/// Maps component indices to their outflow/inflow abscissae.
///
/// Negative-speed components (i < k) flow out through x=0 and in through x=1;
/// positive-speed components the other way around. The trace vector v(t)
/// collects the outflow values in component order.
#[derive(Clone, Copy, Debug)]
pub struct TraceConvention {
    pub n: usize,
    pub k: usize,
}

impl TraceConvention {
    /// Abscissa where component i's boundary value is *observed* (outflow).
    pub fn outflow_x(&self, i: usize) -> f64 {
        if i < self.k {
            0.0
        } else {
            1.0
        }
    }

    /// Abscissa where component i's boundary value is *imposed* (inflow).
    pub fn inflow_x(&self, i: usize) -> f64 {
        if i < self.k {
            1.0
        } else {
            0.0
        }
    }

    pub fn inflow_face(&self, i: usize) -> Face {
        if i < self.k {
            Face::Right
        } else {
            Face::Left
        }
    }

    /// Build v from per-component boundary values at x=0 and x=1.
    pub fn trace_vector(&self, at_x0: &[f64], at_x1: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| if i < self.k { at_x0[i] } else { at_x1[i] })
            .collect()
    }
}

/// A validated-shape instance. Symbolic derivatives of the data are computed
/// once at construction; consumers that need them get the cached results (or
/// the differentiation error, e.g. for `abs`).
#[derive(Debug, Clone)]
pub struct HyperbolicProblem {
    pub n: usize,
    pub k: usize,
    pub lambda: Vec<ExprAst>,
    pub f: Vec<ExprAst>,
    pub phi: Vec<ExprAst>,
    pub h: Vec<ExprAst>,
    // cached symbolic derivatives
    pub(crate) dlambda_dx: Result<Vec<ExprAst>, DiffError>,
    pub(crate) dphi_dx: Result<Vec<ExprAst>, DiffError>,
    pub(crate) df_dx: Result<Vec<ExprAst>, DiffError>,
    pub(crate) df_du: Result<Vec<Vec<ExprAst>>, DiffError>,
    pub(crate) dh_dt: Result<Vec<ExprAst>, DiffError>,
    pub(crate) dh_dv: Result<Vec<Vec<ExprAst>>, DiffError>,
}

fn check_set(
    what: &'static str,
    exprs: &[ExprAst],
    expected: &VarSet,
    n: usize,
) -> Result<(), ProblemError> {
    if exprs.len() != n {
        return Err(ProblemError::BadLength {
            what,
            expected: n,
            got: exprs.len(),
        });
    }
    for (i, e) in exprs.iter().enumerate() {
        if e.vars() != expected {
            return Err(ProblemError::WrongVarSet {
                what,
                index: i,
                expected: expected.names().to_vec(),
                got: e.vars().names().to_vec(),
            });
        }
    }
    Ok(())
}

impl HyperbolicProblem {
    pub fn new(
        n: usize,
        k: usize,
        lambda: Vec<ExprAst>,
        f: Vec<ExprAst>,
        phi: Vec<ExprAst>,
        h: Vec<ExprAst>,
    ) -> Result<Self, ProblemError> {
        if n == 0 || k == 0 || k > n {
            return Err(ProblemError::BadShape { n, k });
        }
        check_set("lambda", &lambda, &VarSet::for_lambda(), n)?;
        check_set("f", &f, &VarSet::for_f(n), n)?;
        check_set("phi", &phi, &VarSet::for_phi(), n)?;
        check_set("h", &h, &VarSet::for_h(n), n)?;

        let dlambda_dx = lambda.iter().map(|e| e.differentiate("x")).collect();
        let dphi_dx = phi.iter().map(|e| e.differentiate("x")).collect();
        let df_dx = f.iter().map(|e| e.differentiate("x")).collect();
        let df_du = f
            .iter()
            .map(|e| {
                (1..=n)
                    .map(|j| e.differentiate(&format!("u{j}")))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect();
        let dh_dt = h.iter().map(|e| e.differentiate("t")).collect();
        let dh_dv = h
            .iter()
            .map(|e| {
                (1..=n)
                    .map(|j| e.differentiate(&format!("v{j}")))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect();

        Ok(HyperbolicProblem {
            n,
            k,
            lambda,
            f,
            phi,
            h,
            dlambda_dx,
            dphi_dx,
            df_dx,
            df_du,
            dh_dt,
            dh_dv,
        })
    }

    /// Parse all data from source strings.
    pub fn from_strs(
        n: usize,
        k: usize,
        lambda: &[impl AsRef<str>],
        f: &[impl AsRef<str>],
        phi: &[impl AsRef<str>],
        h: &[impl AsRef<str>],
    ) -> Result<Self, ProblemError> {
        fn parse_all(
            what: &'static str,
            srcs: &[impl AsRef<str>],
            vars: &VarSet,
        ) -> Result<Vec<ExprAst>, ProblemError> {
            srcs.iter()
                .enumerate()
                .map(|(index, s)| {
                    parse(s.as_ref(), vars).map_err(|source| ProblemError::BadExpr {
                        what,
                        index,
                        source,
                    })
                })
                .collect()
        }
        let lambda = parse_all("lambda", lambda, &VarSet::for_lambda())?;
        let f = parse_all("f", f, &VarSet::for_f(n))?;
        let phi = parse_all("phi", phi, &VarSet::for_phi())?;
        let h = parse_all("h", h, &VarSet::for_h(n))?;
        Self::new(n, k, lambda, f, phi, h)
    }

    pub fn convention(&self) -> TraceConvention {
        TraceConvention {
            n: self.n,
            k: self.k,
        }
    }

    pub(crate) fn df_du(&self) -> Result<&Vec<Vec<ExprAst>>, DiffError> {
        self.df_du.as_ref().map_err(|e| e.clone())
    }

    pub(crate) fn dh_dv(&self) -> Result<&Vec<Vec<ExprAst>>, DiffError> {
        self.dh_dv.as_ref().map_err(|e| e.clone())
    }

    pub(crate) fn dh_dt(&self) -> Result<&Vec<ExprAst>, DiffError> {
        self.dh_dt.as_ref().map_err(|e| e.clone())
    }

    pub(crate) fn dphi_dx(&self) -> Result<&Vec<ExprAst>, DiffError> {
        self.dphi_dx.as_ref().map_err(|e| e.clone())
    }

    pub(crate) fn dlambda_dx(&self) -> Result<&Vec<ExprAst>, DiffError> {
        self.dlambda_dx.as_ref().map_err(|e| e.clone())
    }

    pub(crate) fn df_dx(&self) -> Result<&Vec<ExprAst>, DiffError> {
        self.df_dx.as_ref().map_err(|e| e.clone())
    }

    /// lambda_i(x, t)
    pub fn lambda_at(&self, i: usize, x: f64, t: f64) -> Result<f64, EvalError> {
        self.lambda[i].eval_values(&[x, t])
    }

    /// f_i(x, t, u); `buf` is scratch of length n+2 to avoid allocation.
    pub(crate) fn f_at(
        &self,
        i: usize,
        x: f64,
        t: f64,
        u: &[f64],
        buf: &mut Vec<f64>,
    ) -> Result<f64, EvalError> {
        buf.clear();
        buf.push(x);
        buf.push(t);
        buf.extend_from_slice(u);
        self.f[i].eval_values(buf)
    }

    /// h_i(t, v)
    pub(crate) fn h_at(
        &self,
        i: usize,
        t: f64,
        v: &[f64],
        buf: &mut Vec<f64>,
    ) -> Result<f64, EvalError> {
        buf.clear();
        buf.push(t);
        buf.extend_from_slice(v);
        self.h[i].eval_values(buf)
    }

    pub fn phi_at(&self, i: usize, x: f64) -> Result<f64, EvalError> {
        self.phi[i].eval_values(&[x])
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SignCheck {
    pub component: usize,
    pub required_negative: bool,
    pub min_abs: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub pass: bool,
    /// Smallest |lambda_i| seen on the lattice (the sign margin).
    pub lambda_min: f64,
    pub sign_checks: Vec<SignCheck>,
    pub differentiable: bool,
    pub issues: Vec<String>,
}

/// Sample every speed on a `density x density` lattice over [0,1]x[0,T] and
/// verify the fixed-sign convention with a positive margin; also verify that
/// every nonlinearity admits the symbolic derivatives the solver needs.
pub fn validate(p: &HyperbolicProblem, t_max: f64, density: usize) -> ValidationReport {
    let density = density.max(2);
    let mut issues = Vec::new();
    let mut sign_checks = Vec::new();
    let mut lambda_min = f64::INFINITY;

    for i in 0..p.n {
        let required_negative = i < p.k;
        let mut min_abs = f64::INFINITY;
        let mut ok = true;
        'grid: for xi in 0..density {
            for ti in 0..density {
                let x = xi as f64 / (density - 1) as f64;
                let t = t_max * ti as f64 / (density - 1) as f64;
                match p.lambda_at(i, x, t) {
                    Ok(v) => {
                        if (required_negative && v >= 0.0) || (!required_negative && v <= 0.0) {
                            ok = false;
                            issues.push(format!(
                                "lambda[{}] has wrong sign {} at (x,t)=({:.3},{:.3})",
                                i + 1,
                                v,
                                x,
                                t
                            ));
                            break 'grid;
                        }
                        min_abs = min_abs.min(v.abs());
                    }
                    Err(e) => {
                        ok = false;
                        issues.push(format!("lambda[{}] evaluation failed: {}", i + 1, e));
                        break 'grid;
                    }
                }
            }
        }
        if ok {
            lambda_min = lambda_min.min(min_abs);
        }
        sign_checks.push(SignCheck {
            component: i,
            required_negative,
            min_abs: if min_abs.is_finite() { min_abs } else { 0.0 },
            ok,
        });
    }

    let mut differentiable = true;
    for (what, res) in [
        ("lambda w.r.t. x", p.dlambda_dx.as_ref().err()),
        ("phi w.r.t. x", p.dphi_dx.as_ref().err()),
        ("f w.r.t. x", p.df_dx.as_ref().err()),
        ("h w.r.t. t", p.dh_dt.as_ref().err()),
    ] {
        if let Some(e) = res {
            differentiable = false;
            issues.push(format!("{what}: {e}"));
        }
    }
    if let Err(e) = &p.df_du {
        differentiable = false;
        issues.push(format!("f w.r.t. u: {e}"));
    }
    if let Err(e) = &p.dh_dv {
        differentiable = false;
        issues.push(format!("h w.r.t. v: {e}"));
    }

    let signs_ok = sign_checks.iter().all(|c| c.ok);
    let pass = signs_ok && lambda_min > 0.0 && differentiable;
    if signs_ok && !(lambda_min > 0.0) {
        issues.push("speed magnitude margin is zero".to_string());
    }
    ValidationReport {
        pass,
        lambda_min: if lambda_min.is_finite() { lambda_min } else { 0.0 },
        sign_checks,
        differentiable,
        issues,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CompatPart {
    pub residuals: Vec<f64>,
    pub pass: Vec<bool>,
    pub all_pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompatibilityReport {
    pub tolerance: f64,
    pub order0: Option<CompatPart>,
    pub order1: Option<CompatPart>,
}

pub const EPS_COMPAT: f64 = 1e-9;

fn part_from_residuals(residuals: Vec<f64>, eps: f64) -> CompatPart {
    let pass: Vec<bool> = residuals.iter().map(|r| r.abs() <= eps).collect();
    let all_pass = pass.iter().all(|&b| b);
    CompatPart {
        residuals,
        pass,
        all_pass,
    }
}

/// v(0): initial outflow trace, phi_i evaluated at each component's outflow
/// abscissa.
pub fn initial_trace(p: &HyperbolicProblem) -> Result<Vec<f64>, EvalError> {
    let conv = p.convention();
    (0..p.n)
        .map(|i| p.phi_at(i, conv.outflow_x(i)))
        .collect()
}

/// Order-0 compatibility: the initial data must satisfy the boundary
/// condition at t = 0, i.e. phi_i(inflow) = h_i(0, v(0)).
pub fn check_compat0(p: &HyperbolicProblem, eps: f64) -> Result<CompatibilityReport, EvalError> {
    let conv = p.convention();
    let v0 = initial_trace(p)?;
    let mut buf = Vec::with_capacity(p.n + 2);
    let mut residuals = Vec::with_capacity(p.n);
    for i in 0..p.n {
        let lhs = p.phi_at(i, conv.inflow_x(i))?;
        let rhs = p.h_at(i, 0.0, &v0, &mut buf)?;
        residuals.push(lhs - rhs);
    }
    Ok(CompatibilityReport {
        tolerance: eps,
        order0: Some(part_from_residuals(residuals, eps)),
        order1: None,
    })
}

#[derive(Debug, Error)]
pub enum CompatError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Diff(#[from] DiffError),
}

/// Order-1 compatibility: differentiating the boundary condition in t at
/// t = 0 and eliminating du/dt through the equation along each face must be
/// consistent with the initial data:
///
/// ```text
/// f_i(y_i,0,phi(y_i)) - lambda_i(y_i,0) phi_i'(y_i)
///     = dh_i/dt(0, v(0)) + grad_v h_i(0, v(0)) . v'(0)
/// ```
///
/// where y_i is the inflow abscissa and v'(0) is assembled from the same
/// elimination at the outflow abscissae.
pub fn check_compat1(p: &HyperbolicProblem, eps: f64) -> Result<CompatibilityReport, CompatError> {
    let conv = p.convention();
    let v0 = initial_trace(p)?;
    let dphi = p.dphi_dx()?;
    let dh_dt = p.dh_dt()?;
    let dh_dv = p.dh_dv()?;
    let mut buf = Vec::with_capacity(p.n + 2);

    let phi_vec_at = |x: f64| -> Result<Vec<f64>, EvalError> {
        (0..p.n).map(|j| p.phi_at(j, x)).collect()
    };

    // v'(0): time derivative of the outflow trace via the equation
    let mut vprime = Vec::with_capacity(p.n);
    for i in 0..p.n {
        let xo = conv.outflow_x(i);
        let phi_vec = phi_vec_at(xo)?;
        let fi = p.f_at(i, xo, 0.0, &phi_vec, &mut buf)?;
        let li = p.lambda_at(i, xo, 0.0)?;
        let dpi = dphi[i].eval_values(&[xo])?;
        vprime.push(fi - li * dpi);
    }

    let mut residuals = Vec::with_capacity(p.n);
    for i in 0..p.n {
        let yi = conv.inflow_x(i);
        let phi_vec = phi_vec_at(yi)?;
        let fi = p.f_at(i, yi, 0.0, &phi_vec, &mut buf)?;
        let li = p.lambda_at(i, yi, 0.0)?;
        let dpi = dphi[i].eval_values(&[yi])?;
        let lhs = fi - li * dpi;

        buf.clear();
        buf.push(0.0);
        buf.extend_from_slice(&v0);
        let mut rhs = dh_dt[i].eval_values(&buf)?;
        for j in 0..p.n {
            rhs += dh_dv[i][j].eval_values(&buf)? * vprime[j];
        }
        residuals.push(lhs - rhs);
    }
    Ok(CompatibilityReport {
        tolerance: eps,
        order0: None,
        order1: Some(part_from_residuals(residuals, eps)),
    })
}

/// Convenience wrapper for a name-keyed phi evaluation (used by reports).
pub fn phi_bindings(p: &HyperbolicProblem, x: f64) -> Result<Vec<f64>, EvalError> {
    let mut b = Bindings::new(p.phi[0].vars());
    b.set("x", x)?;
    (0..p.n).map(|i| p.phi[i].eval(&b)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circulating() -> HyperbolicProblem {
        HyperbolicProblem::from_strs(
            2,
            1,
            &["-1", "1"],
            &["0", "0"],
            &[
                "-sin(3.141592653589793*x)",
                "sin(3.141592653589793*x)",
            ],
            &["v2", "v1"],
        )
        .unwrap()
    }

    #[test]
    fn convention_faces() {
        let conv = TraceConvention { n: 3, k: 2 };
        assert_eq!(conv.outflow_x(0), 0.0);
        assert_eq!(conv.outflow_x(1), 0.0);
        assert_eq!(conv.outflow_x(2), 1.0);
        assert_eq!(conv.inflow_x(0), 1.0);
        assert_eq!(conv.inflow_x(2), 0.0);
        // re-indexing round-trip
        let at0 = [1.0, 2.0, 3.0];
        let at1 = [4.0, 5.0, 6.0];
        assert_eq!(conv.trace_vector(&at0, &at1), vec![1.0, 2.0, 6.0]);
    }

    #[test]
    fn validate_sign_margin() {
        let p = circulating();
        let r = validate(&p, 1.0, 101);
        assert!(r.pass);
        assert_eq!(r.lambda_min, 1.0);

        // lambda_2 dips through zero inside the strip
        let bad = HyperbolicProblem::from_strs(
            2,
            1,
            &["-1", "x-0.5"],
            &["0", "0"],
            &["0", "0"],
            &["v2", "v1"],
        )
        .unwrap();
        let r = validate(&bad, 1.0, 101);
        assert!(!r.pass);
    }

    #[test]
    fn validate_rejects_abs() {
        let p = HyperbolicProblem::from_strs(
            2,
            1,
            &["-1", "1"],
            &["abs(u1)", "0"],
            &["0", "0"],
            &["v2", "v1"],
        )
        .unwrap();
        let r = validate(&p, 1.0, 21);
        assert!(!r.pass);
        assert!(!r.differentiable);
        assert!(r.issues.iter().any(|m| m.contains("abs")));
    }

    #[test]
    fn compat0_worked_cases() {
        // phi == (1,1), h swap: v(0) = (1,1), residuals 0
        let p = HyperbolicProblem::from_strs(
            2,
            1,
            &["-1", "1"],
            &["0", "0"],
            &["1", "1"],
            &["v2", "v1"],
        )
        .unwrap();
        let r = check_compat0(&p, EPS_COMPAT).unwrap();
        let part = r.order0.unwrap();
        assert!(part.all_pass);
        assert!(part.residuals.iter().all(|r| r.abs() <= 1e-15));

        // phi = (x, 1-x), h swap: v(0) = (phi_1(0), phi_2(1)) = (0, 0);
        // component 2 requires phi_2(0) = h_2(0, v(0)) = v_1(0): 1 - 0 = 1
        let p = HyperbolicProblem::from_strs(
            2,
            1,
            &["-1", "1"],
            &["0", "0"],
            &["x", "1-x"],
            &["v2", "v1"],
        )
        .unwrap();
        let r = check_compat0(&p, EPS_COMPAT).unwrap();
        let part = r.order0.unwrap();
        assert!(!part.all_pass);
        assert!((part.residuals[1] - 1.0).abs() <= 1e-15);

        // sine wave with swap boundary: compatible
        let r = check_compat0(&circulating(), EPS_COMPAT).unwrap();
        assert!(r.order0.unwrap().all_pass);
    }

    #[test]
    fn compat1_worked_cases() {
        // all-constant data with f == 0: both sides vanish
        let p = HyperbolicProblem::from_strs(
            2,
            1,
            &["-1", "1"],
            &["0", "0"],
            &["1", "1"],
            &["v2", "v1"],
        )
        .unwrap();
        let r = check_compat1(&p, EPS_COMPAT).unwrap();
        let part = r.order1.unwrap();
        assert!(part.all_pass);

        // circulating wave: for component 2 both sides equal -pi
        let r = check_compat1(&circulating(), EPS_COMPAT).unwrap();
        let part = r.order1.unwrap();
        assert!(part.all_pass, "residuals {:?}", part.residuals);

        // doubling h_2 = 2 v1 breaks order-1 by exactly pi
        let p = HyperbolicProblem::from_strs(
            2,
            1,
            &["-1", "1"],
            &["0", "0"],
            &[
                "-sin(3.141592653589793*x)",
                "sin(3.141592653589793*x)",
            ],
            &["v2", "2*v1"],
        )
        .unwrap();
        let r = check_compat1(&p, EPS_COMPAT).unwrap();
        let part = r.order1.unwrap();
        assert!(
            (part.residuals[1].abs() - std::f64::consts::PI).abs() <= 1e-9,
            "residuals {:?}",
            part.residuals
        );
    }
}
