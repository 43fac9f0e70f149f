//! Data-derived constants and a priori estimates: Lipschitz constants of the
//! nonlinearities, the initial/boundary magnitude constants Phi and Psi, slab
//! widths, sup-norm and derivative bounds, growth certificates, and the
//! radius solvers behind them.
//!
//! All constants here are lattice estimates, not certified suprema; each
//! report records how it sampled so a caller can refine.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::characteristics::lambda_extrema;
use crate::expr::{parse, DiffError, EvalError, ExprAst, ParseError, VarSet};
use crate::problem::HyperbolicProblem;

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Diff(#[from] DiffError),
    #[error("{0}")]
    BadInput(String),
}

/// How u/v space and the (x,t) rectangle are sampled when estimating maxima.
#[derive(Clone, Debug, Serialize)]
pub struct SamplingSpec {
    /// Points per axis of the (x,t) lattice.
    pub density: usize,
    /// Random points drawn uniformly from the [-M, M]^n box.
    pub random_points: usize,
    /// Points per coordinate axis sweep of the box.
    pub axis_points: usize,
    pub seed: u64,
}

impl Default for SamplingSpec {
    fn default() -> Self {
        SamplingSpec {
            density: 21,
            random_points: 200,
            axis_points: 7,
            seed: 987_654_321,
        }
    }
}

impl SamplingSpec {
    /// Cheap variant for per-slab re-estimation in the adaptive march.
    pub fn coarse(seed: u64) -> Self {
        SamplingSpec {
            density: 5,
            random_points: 32,
            axis_points: 5,
            seed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LipMethod {
    Sampled,
    UserSupplied,
}

/// Lipschitz constants of f (in u) and h (in v) over the box ||u||_inf <= M,
/// together with the speed extrema the slab formulas need.
#[derive(Clone, Debug, Serialize)]
pub struct LipschitzEstimate {
    pub l_f: f64,
    pub l_h: f64,
    /// Radius of the u-box the constants were sampled over.
    pub m: f64,
    pub method: LipMethod,
    pub max_abs_lambda: f64,
    pub min_abs_lambda: f64,
    pub max_abs_dlambda_dx: f64,
    /// Lattice density used for the (x,t) sweep.
    pub density: usize,
}

impl LipschitzEstimate {
    pub fn max_inv_lambda(&self) -> f64 {
        if self.min_abs_lambda > 0.0 {
            1.0 / self.min_abs_lambda
        } else {
            f64::INFINITY
        }
    }
}

/// Sample points of the box [-m, m]^dim: corners (when affordable), per-axis
/// sweeps, seeded random points, and the origin.
fn box_samples(dim: usize, m: f64, spec: &SamplingSpec) -> Vec<Vec<f64>> {
    let mut pts = Vec::new();
    pts.push(vec![0.0; dim]);
    if dim <= 10 {
        for mask in 0..(1usize << dim) {
            let p = (0..dim)
                .map(|j| if mask >> j & 1 == 1 { m } else { -m })
                .collect();
            pts.push(p);
        }
    }
    let sweeps = spec.axis_points.max(2);
    for j in 0..dim {
        for s in 0..sweeps {
            let val = -m + 2.0 * m * s as f64 / (sweeps - 1) as f64;
            let mut p = vec![0.0; dim];
            p[j] = val;
            pts.push(p);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for _ in 0..spec.random_points {
        pts.push((0..dim).map(|_| rng.random_range(-m..=m)).collect());
    }
    pts
}

/// Row-sum (sup-norm operator) Lipschitz constants of f in u and h in v over
/// the box ||.||_inf <= m, sampled on a (x,t) lattice of the given density
/// crossed with the box samples. Speed extrema use the 101-point validation
/// lattice regardless of `spec.density`.
pub fn estimate_lipschitz(
    p: &HyperbolicProblem,
    t_max: f64,
    m: f64,
    spec: &SamplingSpec,
) -> Result<LipschitzEstimate, BoundsError> {
    if !(m > 0.0) {
        return Err(BoundsError::BadInput(format!(
            "sampling radius must be positive, got {m}"
        )));
    }
    let n = p.n;
    let df_du = p.df_du()?;
    let dh_dv = p.dh_dv()?;
    let dlambda_dx = p.dlambda_dx()?;

    let density = spec.density.max(2);
    let u_samples = box_samples(n, m, spec);
    let mut buf: Vec<f64> = Vec::with_capacity(n + 2);

    let mut l_f = 0.0_f64;
    for xi in 0..density {
        for ti in 0..density {
            let x = xi as f64 / (density - 1) as f64;
            let t = t_max * ti as f64 / (density - 1) as f64;
            for u in &u_samples {
                buf.clear();
                buf.push(x);
                buf.push(t);
                buf.extend_from_slice(u);
                for row in df_du.iter().take(n) {
                    let mut sum = 0.0;
                    for d in row.iter().take(n) {
                        sum += d.eval_values(&buf)?.abs();
                    }
                    l_f = l_f.max(sum);
                }
            }
        }
    }

    let mut l_h = 0.0_f64;
    for ti in 0..density {
        let t = t_max * ti as f64 / (density - 1) as f64;
        for v in &u_samples {
            buf.clear();
            buf.push(t);
            buf.extend_from_slice(v);
            for row in dh_dv.iter().take(n) {
                let mut sum = 0.0;
                for d in row.iter().take(n) {
                    sum += d.eval_values(&buf)?.abs();
                }
                l_h = l_h.max(sum);
            }
        }
    }

    let (min_abs_lambda, max_abs_lambda) = lambda_extrema(p, t_max, 101)?;
    let mut max_abs_dlambda_dx = 0.0_f64;
    for dl in dlambda_dx.iter().take(n) {
        for xi in 0..101 {
            for ti in 0..101 {
                let x = xi as f64 / 100.0;
                let t = t_max * ti as f64 / 100.0;
                max_abs_dlambda_dx = max_abs_dlambda_dx.max(dl.eval_values(&[x, t])?.abs());
            }
        }
    }

    Ok(LipschitzEstimate {
        l_f,
        l_h,
        m,
        method: LipMethod::Sampled,
        max_abs_lambda,
        min_abs_lambda,
        max_abs_dlambda_dx,
        density,
    })
}

/// The magnitude constants assembled from the data:
///
/// ```text
/// Phi = max|phi| + T*max|f(x,t,0)| + max|h(t,0)|
/// Psi = max|phi'| + T*max|df/dx| + max|lambda|^-1 (max|f| + max|dh/dt|)
/// ```
///
/// with the f and h maxima taken over the sampled box of radius `m`.
#[derive(Clone, Debug, Serialize)]
pub struct PhiPsi {
    pub phi: f64,
    pub psi: f64,
    pub max_abs_phi: f64,
    pub max_abs_dphi: f64,
    pub max_abs_f_at_zero: f64,
    pub max_abs_f: f64,
    pub max_abs_df_dx: f64,
    pub max_abs_h_at_zero: f64,
    pub max_abs_dh_dt: f64,
    pub m: f64,
    pub t_horizon: f64,
}

pub fn compute_phi_psi(
    p: &HyperbolicProblem,
    t_max: f64,
    m: f64,
    spec: &SamplingSpec,
) -> Result<PhiPsi, BoundsError> {
    let n = p.n;
    let dphi = p.dphi_dx()?;
    let df_dx = p.df_dx()?;
    let dh_dt = p.dh_dt()?;
    let density = spec.density.max(2);
    let u_samples = box_samples(n, m, spec);
    let mut buf: Vec<f64> = Vec::with_capacity(n + 2);

    let mut max_abs_phi = 0.0_f64;
    let mut max_abs_dphi = 0.0_f64;
    // x-lattice at validation density for the initial data
    for xi in 0..101 {
        let x = xi as f64 / 100.0;
        for i in 0..n {
            max_abs_phi = max_abs_phi.max(p.phi_at(i, x)?.abs());
            max_abs_dphi = max_abs_dphi.max(dphi[i].eval_values(&[x])?.abs());
        }
    }

    let mut max_abs_f_at_zero = 0.0_f64;
    let mut max_abs_f = 0.0_f64;
    let mut max_abs_df_dx = 0.0_f64;
    let zero_u = vec![0.0; n];
    for xi in 0..density {
        for ti in 0..density {
            let x = xi as f64 / (density - 1) as f64;
            let t = t_max * ti as f64 / (density - 1) as f64;
            for i in 0..n {
                max_abs_f_at_zero = max_abs_f_at_zero.max(p.f_at(i, x, t, &zero_u, &mut buf)?.abs());
            }
            for u in &u_samples {
                buf.clear();
                buf.push(x);
                buf.push(t);
                buf.extend_from_slice(u);
                for i in 0..n {
                    max_abs_f = max_abs_f.max(p.f[i].eval_values(&buf)?.abs());
                    max_abs_df_dx = max_abs_df_dx.max(df_dx[i].eval_values(&buf)?.abs());
                }
            }
        }
    }

    let mut max_abs_h_at_zero = 0.0_f64;
    let mut max_abs_dh_dt = 0.0_f64;
    let zero_v = vec![0.0; n];
    for ti in 0..density {
        let t = t_max * ti as f64 / (density - 1) as f64;
        for i in 0..n {
            max_abs_h_at_zero = max_abs_h_at_zero.max(p.h_at(i, t, &zero_v, &mut buf)?.abs());
        }
        for v in &u_samples {
            buf.clear();
            buf.push(t);
            buf.extend_from_slice(v);
            for i in 0..n {
                max_abs_dh_dt = max_abs_dh_dt.max(dh_dt[i].eval_values(&buf)?.abs());
            }
        }
    }

    let (min_abs_lambda, _) = lambda_extrema(p, t_max, 101)?;
    let inv_lambda = if min_abs_lambda > 0.0 {
        1.0 / min_abs_lambda
    } else {
        f64::INFINITY
    };

    let phi = max_abs_phi + t_max * max_abs_f_at_zero + max_abs_h_at_zero;
    let psi = max_abs_dphi
        + t_max * max_abs_df_dx
        + inv_lambda * max_abs_f
        + inv_lambda * max_abs_dh_dt;

    Ok(PhiPsi {
        phi,
        psi,
        max_abs_phi,
        max_abs_dphi,
        max_abs_f_at_zero,
        max_abs_f,
        max_abs_df_dx,
        max_abs_h_at_zero,
        max_abs_dh_dt,
        m,
        t_horizon: t_max,
    })
}

/// A possibly astronomically large bound, carried both as a plain value
/// (+inf when it overflows f64) and as its natural log.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Magnitude {
    pub value: f64,
    pub ln_value: f64,
}

impl Magnitude {
    pub fn from_ln(ln_value: f64) -> Self {
        Magnitude {
            value: ln_value.exp(),
            ln_value,
        }
    }

    pub fn from_value(value: f64) -> Self {
        Magnitude {
            value,
            ln_value: value.ln(),
        }
    }
}

/// Number of local existence steps needed to tile [0, T] with width-theta
/// slabs; at least one step is always taken (a q = 0 formula gives an
/// unbounded theta, which still means one application of the local result).
pub fn slab_exponent(t_max: f64, theta: f64) -> f64 {
    if !(theta > 0.0) {
        return f64::INFINITY;
    }
    (t_max / theta).ceil().max(1.0)
}

/// Every explicit constant of the local and global estimates.
#[derive(Clone, Debug, Serialize)]
pub struct AprioriReport {
    pub n: usize,
    pub t_horizon: f64,
    pub phi: f64,
    pub psi: f64,
    pub q0: f64,
    pub q1: f64,
    /// Formula widths 1/(2q); +inf when q = 0.
    pub theta0: f64,
    pub theta1: f64,
    /// Slab exponents max(1, ceil(T/theta)).
    pub slabs0: f64,
    pub slabs1: f64,
    /// 2(1+nL_h) Phi, valid on the first slab.
    pub local_sup_bound: f64,
    /// 2(1+nL_h max|lambda| max|lambda|^-1) Psi, first derivative slab.
    pub local_dx_bound: f64,
    /// (3+2nL_h)^slabs0 Phi.
    pub global_sup_bound: Magnitude,
    /// (3+2nL_h max|lambda| max|lambda|^-1)^slabs1 Psi.
    pub global_dx_bound: Magnitude,
    /// max|f| + max|lambda| * global_dx_bound.
    pub dt_bound: Magnitude,
    /// Suggested sampling radius n (3+2nL_h)^slabs0 Phi.
    pub m_suggested: Magnitude,
    pub max_abs_f: f64,
}

pub fn q0_value(n: usize, l_f: f64, l_h: f64) -> f64 {
    n as f64 * l_f * (1.0 + n as f64 * l_h)
}

pub fn q1_value(lip: &LipschitzEstimate, n: usize) -> f64 {
    (n as f64 * lip.l_f + lip.max_abs_dlambda_dx)
        * (1.0 + n as f64 * lip.l_h * lip.max_abs_lambda * lip.max_inv_lambda())
}

pub fn theta_from_q(q: f64) -> f64 {
    if q > 0.0 {
        1.0 / (2.0 * q)
    } else {
        f64::INFINITY
    }
}

pub fn apriori_bounds(
    p: &HyperbolicProblem,
    lip: &LipschitzEstimate,
    t_max: f64,
    pp: &PhiPsi,
) -> AprioriReport {
    let n = p.n as f64;
    let q0 = q0_value(p.n, lip.l_f, lip.l_h);
    let q1 = q1_value(lip, p.n);
    let theta0 = theta_from_q(q0);
    let theta1 = theta_from_q(q1);
    let slabs0 = slab_exponent(t_max, theta0);
    let slabs1 = slab_exponent(t_max, theta1);

    let base0 = 3.0 + 2.0 * n * lip.l_h;
    let base1 = 3.0 + 2.0 * n * lip.l_h * lip.max_abs_lambda * lip.max_inv_lambda();

    let global_sup = Magnitude::from_ln(slabs0 * base0.ln() + pp.phi.ln());
    let global_dx = Magnitude::from_ln(slabs1 * base1.ln() + pp.psi.ln());
    let dt_bound = Magnitude {
        value: pp.max_abs_f + lip.max_abs_lambda * global_dx.value,
        ln_value: (pp.max_abs_f + lip.max_abs_lambda * global_dx.value).ln().max(
            // keep a finite log when the plain value overflows
            lip.max_abs_lambda.ln() + global_dx.ln_value,
        ),
    };
    let m_suggested = Magnitude::from_ln(n.ln() + slabs0 * base0.ln() + pp.phi.ln());

    AprioriReport {
        n: p.n,
        t_horizon: t_max,
        phi: pp.phi,
        psi: pp.psi,
        q0,
        q1,
        theta0,
        theta1,
        slabs0,
        slabs1,
        local_sup_bound: 2.0 * (1.0 + n * lip.l_h) * pp.phi,
        local_dx_bound: 2.0 * (1.0 + n * lip.l_h * lip.max_abs_lambda * lip.max_inv_lambda())
            * pp.psi,
        global_sup_bound: global_sup,
        global_dx_bound: global_dx,
        dt_bound,
        m_suggested,
        max_abs_f: pp.max_abs_f,
    }
}

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Diff(#[from] DiffError),
    #[error(
        "majorant for {which} evaluates to {value:.6} < e at radius {radius:.3e} \
         (log log undefined); supply a larger majorant"
    )]
    MajorantBelowE {
        which: &'static str,
        value: f64,
        radius: f64,
    },
    #[error("{0}")]
    BadInput(String),
}

impl From<BoundsError> for CertifyError {
    fn from(e: BoundsError) -> Self {
        match e {
            BoundsError::Eval(e) => CertifyError::Eval(e),
            BoundsError::Diff(e) => CertifyError::Diff(e),
            BoundsError::BadInput(s) => CertifyError::BadInput(s),
        }
    }
}

/// Polynomial majorant in the norm radius: F(point, r) = sum c_d(point) r^d.
/// Coefficients are expressions in the nonlinearity's lattice variables
/// ((x, t) for f's majorant, (t) for h's).
#[derive(Debug, Clone)]
pub struct PolyMajorant {
    pub coeffs: Vec<ExprAst>,
}

impl PolyMajorant {
    pub fn constants(values: &[f64], vars: &VarSet) -> Self {
        PolyMajorant {
            coeffs: values
                .iter()
                .map(|&v| ExprAst::constant(v, vars.clone()))
                .collect(),
        }
    }

    pub fn from_strs(srcs: &[impl AsRef<str>], vars: &VarSet) -> Result<Self, ParseError> {
        Ok(PolyMajorant {
            coeffs: srcs
                .iter()
                .map(|s| parse(s.as_ref(), vars))
                .collect::<Result<_, _>>()?,
        })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, point: &[f64], r: f64) -> Result<f64, EvalError> {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * r + c.eval_values(point)?;
        }
        Ok(acc)
    }

    /// Largest |coefficient| over the given lattice points.
    fn sigma(&self, lattice: &[Vec<f64>]) -> Result<f64, EvalError> {
        let mut s = 0.0_f64;
        for c in &self.coeffs {
            for pt in lattice {
                s = s.max(c.eval_values(pt)?.abs());
            }
        }
        Ok(s)
    }

    fn sources(&self) -> Vec<String> {
        self.coeffs.iter().map(|c| c.to_string()).collect()
    }
}

/// Growth ceiling fed to the certificate chain. A majorant supplies the
/// pointwise value Maj(point, r) used by the gradient checks together with a
/// scale pair (sigma, delta) so the radius solver can bound it by
/// sigma (1 + e^r)^delta.
pub trait Majorant {
    /// Pointwise value at a lattice point and norm radius r.
    fn value(&self, point: &[f64], r: f64) -> Result<f64, EvalError>;
    /// Scale constant sigma over the given lattice.
    fn sigma_on(&self, lattice: &[Vec<f64>]) -> Result<f64, EvalError>;
    /// Growth exponent delta.
    fn delta(&self) -> usize;
    /// Printable form for reports.
    fn sources(&self) -> Vec<String>;
    /// Confirm the majorant reads exactly the expected lattice variables.
    fn check_prefix(&self, prefix: &VarSet, which: &'static str) -> Result<(), CertifyError>;
}

impl Majorant for PolyMajorant {
    fn value(&self, point: &[f64], r: f64) -> Result<f64, EvalError> {
        self.eval(point, r)
    }

    fn sigma_on(&self, lattice: &[Vec<f64>]) -> Result<f64, EvalError> {
        self.sigma(lattice)
    }

    fn delta(&self) -> usize {
        self.degree()
    }

    fn sources(&self) -> Vec<String> {
        PolyMajorant::sources(self)
    }

    fn check_prefix(&self, prefix: &VarSet, which: &'static str) -> Result<(), CertifyError> {
        for c in &self.coeffs {
            if c.vars() != prefix {
                return Err(CertifyError::BadInput(format!(
                    "{which} majorant coefficients must be expressions in ({})",
                    prefix.names().join(", ")
                )));
            }
        }
        Ok(())
    }
}

/// Majorant given as a single expression in the lattice variables plus the
/// radius variable `r`, with a user-declared (sigma, delta) scale pair. The
/// expression drives the pointwise gradient checks; sigma and delta drive
/// the radius solve, so they should dominate the expression:
/// |Maj(point, r)| <= sigma (1 + e^r)^delta.
#[derive(Debug, Clone)]
pub struct ExprMajorant {
    expr: ExprAst,
    prefix: VarSet,
    pub sigma: f64,
    pub delta: usize,
}

impl ExprMajorant {
    fn new(
        src: &str,
        prefix: VarSet,
        sigma: f64,
        delta: usize,
    ) -> Result<Self, CertifyError> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(CertifyError::BadInput(format!(
                "majorant scale sigma must be a positive finite number, got {sigma}"
            )));
        }
        let mut names: Vec<String> = prefix.names().to_vec();
        names.push("r".to_string());
        let vars = VarSet::new(names);
        let expr = parse(src, &vars)
            .map_err(|e| CertifyError::BadInput(format!("majorant expression: {e}")))?;
        Ok(ExprMajorant {
            expr,
            prefix,
            sigma,
            delta,
        })
    }

    /// Majorant for the interior nonlinearity: expression in (x, t, r).
    pub fn for_f(src: &str, sigma: f64, delta: usize) -> Result<Self, CertifyError> {
        Self::new(src, VarSet::for_lambda(), sigma, delta)
    }

    /// Majorant for the boundary nonlinearity: expression in (t, r).
    pub fn for_h(src: &str, sigma: f64, delta: usize) -> Result<Self, CertifyError> {
        Self::new(src, VarSet::new(["t"]), sigma, delta)
    }
}

impl Majorant for ExprMajorant {
    fn value(&self, point: &[f64], r: f64) -> Result<f64, EvalError> {
        let mut buf = Vec::with_capacity(point.len() + 1);
        buf.extend_from_slice(point);
        buf.push(r);
        self.expr.eval_values(&buf)
    }

    fn sigma_on(&self, _lattice: &[Vec<f64>]) -> Result<f64, EvalError> {
        Ok(self.sigma)
    }

    fn delta(&self) -> usize {
        self.delta
    }

    fn sources(&self) -> Vec<String> {
        vec![self.expr.to_string()]
    }

    fn check_prefix(&self, prefix: &VarSet, which: &'static str) -> Result<(), CertifyError> {
        if self.prefix != *prefix {
            return Err(CertifyError::BadInput(format!(
                "{which} majorant must be an expression in ({}, r)",
                prefix.names().join(", ")
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GrowthClass {
    #[serde(rename = "THM1_LIPSCHITZ")]
    Thm1Lipschitz,
    #[serde(rename = "THM3_QUARTER_LOGLOG")]
    Thm3QuarterLoglog,
    #[serde(rename = "REMARK2_LOGLOG_F_LIPSCHITZ_H")]
    Remark2LoglogFLipschitzH,
    #[serde(rename = "UNCERTIFIED")]
    Uncertified,
}

/// Gradient norms and inequality outcomes at one probe radius.
#[derive(Clone, Debug, Serialize)]
pub struct ProbeSample {
    pub radius: f64,
    /// Largest sampled Frobenius norm of grad_u f over the radius-ball.
    pub grad_f: f64,
    pub grad_h: f64,
    /// ||grad f|| <= C_f (log log F)^{1/4} at every sampled point.
    pub quarter_f_ok: bool,
    pub quarter_h_ok: bool,
    /// ||grad f|| <= C_f log log F at every sampled point.
    pub full_f_ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthCertificate {
    pub class: GrowthClass,
    pub c_f: f64,
    pub c_h: f64,
    /// Largest |coefficient| across both majorants, and the larger degree.
    pub sigma: f64,
    pub delta: usize,
    pub sigma_f: f64,
    pub delta_f: usize,
    pub sigma_h: f64,
    pub delta_h: usize,
    pub majorant_f: Vec<String>,
    pub majorant_h: Vec<String>,
    pub probes: Vec<ProbeSample>,
    /// Gradient-envelope ratio across the two largest radii.
    pub stabilize_ratio_f: f64,
    pub stabilize_ratio_h: f64,
    /// The classification is a falsification check over these samples, not
    /// a proof.
    pub sampling_note: String,
    pub t_horizon: f64,
    pub phi: f64,
    /// Radius of the certified sup bound e^r/sqrt(n); None when uncertified.
    pub r: Option<f64>,
    /// Floor radius from which the closed-form majorization of the growth
    /// chain was observed to hold; None when it never held at sampled radii.
    pub r0: Option<f64>,
    pub q: Option<f64>,
    pub q0: Option<f64>,
    /// Derivative-pass range radius selector (set to r).
    pub p: Option<f64>,
    pub sup_bound: Option<Magnitude>,
    pub dx_bound: Option<Magnitude>,
    /// Why q is absent, when it is.
    pub q_note: Option<String>,
}

/// ln(1 + e^r) without overflow.
fn ln1pexp(r: f64) -> f64 {
    if r > 30.0 {
        r + (-r).exp().ln_1p()
    } else {
        r.exp().ln_1p()
    }
}

/// w = log log S at radius r, with S = sigma (1+e^r)^delta; -inf when log S
/// is not yet positive.
fn loglog_s(sigma: f64, delta: f64, r: f64) -> f64 {
    let ln_s = sigma.ln() + delta * ln1pexp(r);
    if ln_s > 0.0 {
        ln_s.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// Lipschitz surrogates (L_f, L_h) of a certified growth model over the ball
/// of radius e^r, expressed through w = log log S(r).
#[derive(Clone, Copy, Debug)]
enum RadiusModel {
    /// Both gradients below C (log log)^{1/4} (quarter-power growth).
    Quarter { c_f: f64, c_h: f64 },
    /// f below C_f log log, h Lipschitz with the given constant.
    FullFLipschitzH { c_f: f64, l_h: f64 },
    /// Both gradients bounded.
    Lipschitz { l_f: f64, l_h: f64 },
}

impl RadiusModel {
    fn constants_at(&self, w: f64) -> (f64, f64) {
        match *self {
            RadiusModel::Quarter { c_f, c_h } => {
                let g = w.powf(0.25);
                (c_f * g, c_h * g)
            }
            RadiusModel::FullFLipschitzH { c_f, l_h } => (c_f * w, l_h),
            RadiusModel::Lipschitz { l_f, l_h } => (l_f, l_h),
        }
    }
}

/// ln of the global sup-bound chain at candidate radius r: the slab count is
/// evaluated with the model's Lipschitz surrogates over the ball |u| <= e^r,
/// so the radius this is bisected against is a true fixed point of the
/// estimate.
fn chain_lhs_ln(ln_front: f64, n: usize, t: f64, sigma: f64, delta: f64, model: RadiusModel, r: f64) -> f64 {
    let w = loglog_s(sigma, delta, r);
    if !w.is_finite() {
        return f64::INFINITY;
    }
    let (l_f, l_h) = model.constants_at(w);
    if !(l_f >= 0.0) || !(l_h >= 0.0) {
        return f64::INFINITY;
    }
    let theta = theta_from_q(q0_value(n, l_f, l_h));
    let slabs = slab_exponent(t, theta);
    ln_front + slabs * (3.0 + 2.0 * n as f64 * l_h).ln()
}

/// Derivative-pass variant: the slab width picks up the speed terms, and the
/// per-slab base is 3 + 2 n L_h max|lambda| max|lambda|^-1.
#[allow(clippy::too_many_arguments)]
fn chain_dx_lhs_ln(
    ln_front: f64,
    n: usize,
    t: f64,
    sigma: f64,
    delta: f64,
    model: RadiusModel,
    max_dlambda: f64,
    lambda_ratio: f64,
    r: f64,
) -> f64 {
    let w = loglog_s(sigma, delta, r);
    if !w.is_finite() {
        return f64::INFINITY;
    }
    let (l_f, l_h) = model.constants_at(w);
    if !(l_f >= 0.0) || !(l_h >= 0.0) {
        return f64::INFINITY;
    }
    let q = (n as f64 * l_f + max_dlambda) * (1.0 + n as f64 * l_h * lambda_ratio);
    let slabs = slab_exponent(t, theta_from_q(q));
    ln_front + slabs * (3.0 + 2.0 * n as f64 * l_h * lambda_ratio).ln()
}

/// Smallest r (to 1e-6 by doubling then bisection) with pred(r) true, where
/// pred is eventually true and the interesting root is the entry into the
/// tail region. Returns None when no radius up to ~2^80 satisfies it.
fn smallest_radius(pred: impl Fn(f64) -> bool) -> Option<f64> {
    if pred(0.0) {
        return Some(0.0);
    }
    let mut hi = 1.0_f64;
    let mut doublings = 0;
    while !pred(hi) {
        hi *= 2.0;
        doublings += 1;
        if doublings > 80 {
            return None;
        }
    }
    let mut lo = if hi == 1.0 { 0.0 } else { hi / 2.0 };
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

#[derive(Clone, Debug, Serialize)]
pub struct RadiusSolve {
    /// Final radius (the inequality root, raised to the floor when one was
    /// found and larger).
    pub r: f64,
    /// Root of phi[(1+delta) log(2 sigma) + delta r] <= e^r/sqrt(n).
    pub r_star: f64,
    /// Majorization floor, when a floor context was given and the scan found
    /// one.
    pub r0: Option<f64>,
    pub floored: bool,
    /// e^r / sqrt(n).
    pub bound: Magnitude,
}

/// Smallest r with phi[(1+delta) log(2 sigma) + delta r] <= e^r/sqrt(n),
/// to 1e-6 by doubling then bisection. The closed-form route to the global
/// sup bound: its left side majorizes the slab-chain constant once r is past
/// the chain's floor radius.
pub fn solve_r(phi: f64, n: usize, sigma: f64, delta: f64) -> Result<RadiusSolve, BoundsError> {
    if !(phi >= 0.0) || !phi.is_finite() {
        return Err(BoundsError::BadInput(format!("phi must be finite and >= 0, got {phi}")));
    }
    if !(sigma > 0.0) || !(delta >= 1.0) || n == 0 {
        return Err(BoundsError::BadInput(format!(
            "need sigma > 0, delta >= 1, n >= 1; got sigma={sigma}, delta={delta}, n={n}"
        )));
    }
    let sqrt_n = (n as f64).sqrt();
    let holds = |r: f64| phi * ((1.0 + delta) * (2.0 * sigma).ln() + delta * r) <= r.exp() / sqrt_n;
    let r_star = smallest_radius(holds).expect("exponential right side eventually dominates");
    Ok(RadiusSolve {
        r: r_star,
        r_star,
        r0: None,
        floored: false,
        bound: Magnitude::from_ln(r_star - 0.5 * (n as f64).ln()),
    })
}

/// Same routine with the derivative magnitude in place of phi.
pub fn solve_q(psi: f64, n: usize, sigma: f64, delta: f64) -> Result<RadiusSolve, BoundsError> {
    solve_r(psi, n, sigma, delta)
}

/// Does the closed-form majorant (log log S)^{(1/2)(log log S)^{1/2}}
/// dominate the slab-chain factor at radius r? The front constant cancels,
/// leaving ceil(T/theta(r)) log(3+2nC_h w^{1/4}) <= (1/2) sqrt(w) log w.
fn majorization_holds(n: usize, t: f64, sigma: f64, delta: f64, c_f: f64, c_h: f64, r: f64) -> bool {
    let w = loglog_s(sigma, delta, r);
    if !(w > 0.0) {
        return false;
    }
    let lhs = chain_lhs_ln(0.0, n, t, sigma, delta, RadiusModel::Quarter { c_f, c_h }, r);
    lhs <= 0.5 * w.sqrt() * w.ln()
}

/// Smallest radius from which the closed-form majorization holds at all
/// larger sampled radii (checked at r, 2r, 4r); None when it never holds.
/// For many instances it never does: the chain factor carries a
/// C_f C_h n^2 T coefficient the majorant lacks, so the scan reports the
/// floor honestly instead of assuming it.
pub fn majorization_floor(
    n: usize,
    t: f64,
    sigma: f64,
    delta: f64,
    c_f: f64,
    c_h: f64,
) -> Option<f64> {
    let pred = |r: f64| {
        r > 0.0
            && majorization_holds(n, t, sigma, delta, c_f, c_h, r)
            && majorization_holds(n, t, sigma, delta, c_f, c_h, 2.0 * r)
            && majorization_holds(n, t, sigma, delta, c_f, c_h, 4.0 * r)
    };
    smallest_radius(pred).filter(|&r| r > 0.0)
}

/// solve_r raised to the majorization floor of the given chain context.
#[allow(clippy::too_many_arguments)]
pub fn solve_r_floored(
    phi: f64,
    n: usize,
    sigma: f64,
    delta: f64,
    c_f: f64,
    c_h: f64,
    t: f64,
) -> Result<RadiusSolve, BoundsError> {
    let mut rs = solve_r(phi, n, sigma, delta)?;
    rs.r0 = majorization_floor(n, t, sigma, delta, c_f, c_h);
    if let Some(r0) = rs.r0 {
        if r0 > rs.r {
            rs.r = r0;
            rs.floored = true;
            rs.bound = Magnitude::from_ln(rs.r - 0.5 * (n as f64).ln());
        }
    }
    Ok(rs)
}

/// Uniform lattice of (x, t) points with x in [0,1], t in [0, t_max].
fn xt_lattice(t_max: f64, d: usize) -> Vec<Vec<f64>> {
    let d = d.max(2);
    let mut pts = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            pts.push(vec![
                a as f64 / (d - 1) as f64,
                t_max * b as f64 / (d - 1) as f64,
            ]);
        }
    }
    pts
}

fn t_lattice(t_max: f64, d: usize) -> Vec<Vec<f64>> {
    let d = d.max(2);
    (0..d)
        .map(|b| vec![t_max * b as f64 / (d - 1) as f64])
        .collect()
}

/// Unit directions for sphere probes: axes, diagonal corners, seeded random.
fn unit_directions(dim: usize, count_random: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut dirs = Vec::new();
    for c in 0..dim {
        for sign in [1.0, -1.0] {
            let mut d = vec![0.0; dim];
            d[c] = sign;
            dirs.push(d);
        }
    }
    if dim <= 10 {
        let scale = 1.0 / (dim as f64).sqrt();
        for mask in 0..(1usize << dim) {
            dirs.push(
                (0..dim)
                    .map(|j| if mask >> j & 1 == 1 { scale } else { -scale })
                    .collect(),
            );
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..count_random {
        loop {
            let d: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let nrm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
            if nrm > 1e-3 {
                dirs.push(d.iter().map(|v| v / nrm).collect());
                break;
            }
        }
    }
    dirs
}

/// Frobenius norm of an expression matrix at (prefix..., y...).
fn frob_norm(
    rows: &[Vec<ExprAst>],
    prefix: &[f64],
    y: &[f64],
    buf: &mut Vec<f64>,
) -> Result<f64, EvalError> {
    buf.clear();
    buf.extend_from_slice(prefix);
    buf.extend_from_slice(y);
    let mut s = 0.0;
    for row in rows {
        for d in row {
            let v = d.eval_values(buf)?;
            s += v * v;
        }
    }
    Ok(s.sqrt())
}

/// Coordinate ascent of the gradient Frobenius norm inside the radius ball,
/// with offsets spanning every dyadic scale of the radius so periodic peaks
/// are found at any magnitude. Keeps the prefix (lattice point) fixed.
fn ascend_gradient(
    rows: &[Vec<ExprAst>],
    prefix: &[f64],
    start: &[f64],
    rho: f64,
    buf: &mut Vec<f64>,
) -> Result<(Vec<f64>, f64), EvalError> {
    let dim = start.len();
    let mut y = start.to_vec();
    let mut best = frob_norm(rows, prefix, &y, buf)?;
    let scales: Vec<f64> = (1..=55).map(|k| rho * 0.5_f64.powi(k)).collect();
    for _round in 0..3 {
        for c in 0..dim {
            for &s in &scales {
                for sign in [1.0, -1.0] {
                    let mut cand = y.clone();
                    cand[c] += sign * s;
                    let nrm = cand.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if nrm > rho {
                        for v in &mut cand {
                            *v *= rho / nrm;
                        }
                    }
                    let val = frob_norm(rows, prefix, &cand, buf)?;
                    if val > best {
                        best = val;
                        y = cand;
                    }
                }
            }
        }
    }
    Ok((y, best))
}

struct GradProbe {
    envelope: f64,
    quarter_ok: bool,
    full_ok: bool,
}

/// Scan one nonlinearity at one probe radius: max sampled gradient norm and
/// the pointwise growth inequalities against the majorant.
#[allow(clippy::too_many_arguments)]
fn probe_gradient(
    rows: &[Vec<ExprAst>],
    lattice: &[Vec<f64>],
    dirs: &[Vec<f64>],
    maj: &dyn Majorant,
    c: f64,
    rho: f64,
    which: &'static str,
) -> Result<GradProbe, CertifyError> {
    let dim = rows.len();
    let mut buf: Vec<f64> = Vec::with_capacity(dim + 2);
    let mut envelope = 0.0_f64;
    let mut quarter_ok = true;
    let mut full_ok = true;
    let mut arg_best: Option<(usize, Vec<f64>)> = None;

    let check_point =
        |pt_idx: usize, y: &[f64], norm: f64, quarter_ok: &mut bool, full_ok: &mut bool| -> Result<(), CertifyError> {
            let r_actual = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            let fval = maj
                .value(&lattice[pt_idx], r_actual)
                .map_err(CertifyError::Eval)?;
            if fval < std::f64::consts::E {
                return Err(CertifyError::MajorantBelowE {
                    which,
                    value: fval,
                    radius: r_actual,
                });
            }
            let w = fval.ln().ln();
            if norm > c * w.powf(0.25) {
                *quarter_ok = false;
            }
            if norm > c * w {
                *full_ok = false;
            }
            Ok(())
        };

    for (pt_idx, pt) in lattice.iter().enumerate() {
        for d in dirs {
            let y: Vec<f64> = d.iter().map(|v| v * rho).collect();
            let norm = frob_norm(rows, pt, &y, &mut buf).map_err(CertifyError::Eval)?;
            check_point(pt_idx, &y, norm, &mut quarter_ok, &mut full_ok)?;
            if norm > envelope {
                envelope = norm;
                arg_best = Some((pt_idx, y));
            }
        }
    }
    // refine the winner so bounded-but-oscillating gradients report their
    // true plateau instead of sampling noise
    if let Some((pt_idx, y0)) = arg_best {
        let (y, refined) = ascend_gradient(rows, &lattice[pt_idx], &y0, rho, &mut buf)
            .map_err(CertifyError::Eval)?;
        check_point(pt_idx, &y, refined, &mut quarter_ok, &mut full_ok)?;
        envelope = envelope.max(refined);
    }
    Ok(GradProbe {
        envelope,
        quarter_ok,
        full_ok,
    })
}

pub const DEFAULT_PROBE_RADII: [f64; 4] = [1e1, 1e3, 1e6, 1e9];
const STABILIZE_TOL: f64 = 1.0 + 1e-3;

/// Classify the growth of the nonlinearities against the supplied polynomial
/// majorants and compute the certified sup/derivative radii. Sampling is a
/// falsification check, not a proof; the certificate records what was probed.
#[allow(clippy::too_many_arguments)]
pub fn certify_growth(
    p: &HyperbolicProblem,
    maj_f: &dyn Majorant,
    maj_h: &dyn Majorant,
    c_f: f64,
    c_h: f64,
    radii: &[f64],
    t_horizon: f64,
    spec: &SamplingSpec,
) -> Result<GrowthCertificate, CertifyError> {
    if radii.len() < 2 || radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] <= 0.0 {
        return Err(CertifyError::BadInput(
            "need at least two increasing positive probe radii".to_string(),
        ));
    }
    if !(c_f > 0.0) || !(c_h > 0.0) {
        return Err(CertifyError::BadInput(format!(
            "growth constants must be positive, got C_f={c_f}, C_h={c_h}"
        )));
    }
    if !(t_horizon > 0.0) {
        return Err(CertifyError::BadInput(format!(
            "horizon must be positive, got {t_horizon}"
        )));
    }
    maj_f.check_prefix(&VarSet::for_lambda(), "F")?;
    maj_h.check_prefix(&VarSet::new(["t"]), "H")?;

    let n = p.n;
    let df_du = p.df_du()?;
    let dh_dv = p.dh_dv()?;
    let d_f = spec.density.clamp(3, 9);
    let lat_f = xt_lattice(t_horizon, d_f);
    let lat_h = t_lattice(t_horizon, 2 * d_f + 1);
    let n_random = spec.random_points.clamp(16, 64);
    let dirs = unit_directions(n, n_random, spec.seed);

    let mut probes = Vec::with_capacity(radii.len());
    for &rho in radii {
        let pf = probe_gradient(df_du, &lat_f, &dirs, maj_f, c_f, rho, "F")?;
        let ph = probe_gradient(dh_dv, &lat_h, &dirs, maj_h, c_h, rho, "H")?;
        probes.push(ProbeSample {
            radius: rho,
            grad_f: pf.envelope,
            grad_h: ph.envelope,
            quarter_f_ok: pf.quarter_ok,
            quarter_h_ok: ph.quarter_ok,
            full_f_ok: pf.full_ok,
        });
    }

    let last = probes.len() - 1;
    let ratio = |a: f64, b: f64| {
        if b == 0.0 {
            if a == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            a / b
        }
    };
    let stabilize_ratio_f = ratio(probes[last].grad_f, probes[last - 1].grad_f);
    let stabilize_ratio_h = ratio(probes[last].grad_h, probes[last - 1].grad_h);
    let f_stable = stabilize_ratio_f <= STABILIZE_TOL;
    let h_stable = stabilize_ratio_h <= STABILIZE_TOL;
    let quarter_all = probes.iter().all(|s| s.quarter_f_ok && s.quarter_h_ok);
    let full_f_all = probes.iter().all(|s| s.full_f_ok);

    let class = if f_stable && h_stable {
        GrowthClass::Thm1Lipschitz
    } else if quarter_all {
        GrowthClass::Thm3QuarterLoglog
    } else if full_f_all && h_stable {
        GrowthClass::Remark2LoglogFLipschitzH
    } else {
        GrowthClass::Uncertified
    };

    let sigma_f = maj_f.sigma_on(&lat_f)?;
    let sigma_h = maj_h.sigma_on(&lat_h)?;
    let delta_f = maj_f.delta();
    let delta_h = maj_h.delta();
    let sigma = sigma_f.max(sigma_h);
    let delta = delta_f.max(delta_h);
    if !(sigma > 0.0) {
        return Err(CertifyError::BadInput(
            "majorant coefficients vanish identically".to_string(),
        ));
    }

    let pp = compute_phi_psi(p, t_horizon, 1.0, spec)?;
    let model = match class {
        GrowthClass::Thm1Lipschitz => Some(RadiusModel::Lipschitz {
            l_f: probes[last].grad_f,
            l_h: probes[last].grad_h,
        }),
        GrowthClass::Thm3QuarterLoglog => Some(RadiusModel::Quarter { c_f, c_h }),
        GrowthClass::Remark2LoglogFLipschitzH => Some(RadiusModel::FullFLipschitzH {
            c_f,
            l_h: probes[last].grad_h,
        }),
        GrowthClass::Uncertified => None,
    };

    let sqrt_n_ln = 0.5 * (n as f64).ln();
    let mut r = None;
    let mut q = None;
    let mut q0 = None;
    let mut p_sel = None;
    let mut sup_bound = None;
    let mut dx_bound = None;
    let mut q_note = None;
    if let Some(model) = model {
        let ln_phi = pp.phi.ln();
        let dfn = delta as f64;
        let pred = |rr: f64| chain_lhs_ln(ln_phi, n, t_horizon, sigma, dfn, model, rr) <= rr - sqrt_n_ln;
        if let Some(rr) = smallest_radius(pred) {
            r = Some(rr);
            sup_bound = Some(Magnitude::from_ln(rr - sqrt_n_ln));
            p_sel = Some(rr);
            // derivative radius: Psi over the ball |u| <= e^P/sqrt(n)
            let ln_m = rr - sqrt_n_ln;
            if ln_m <= 700.0 {
                let m_big = ln_m.exp();
                match compute_phi_psi(p, t_horizon, m_big, spec) {
                    Ok(pp_m) if pp_m.psi.is_finite() => {
                        let lam = lambda_extrema(p, t_horizon, 101).map_err(CertifyError::Eval)?;
                        let lambda_ratio = if lam.0 > 0.0 { lam.1 / lam.0 } else { f64::INFINITY };
                        let max_dl = max_abs_dlambda(p, t_horizon)?;
                        let ln_psi = pp_m.psi.ln();
                        let qpred = |qq: f64| {
                            chain_dx_lhs_ln(
                                ln_psi, n, t_horizon, sigma, dfn, model, max_dl, lambda_ratio, qq,
                            ) <= qq - sqrt_n_ln
                        };
                        if let Some(qq) = smallest_radius(qpred) {
                            q = Some(qq);
                            dx_bound = Some(Magnitude::from_ln(qq - sqrt_n_ln));
                            let dx_holds = |r: f64| {
                                let w = loglog_s(sigma, dfn, r);
                                w > 0.0
                                    && chain_dx_lhs_ln(
                                        0.0,
                                        n,
                                        t_horizon,
                                        sigma,
                                        dfn,
                                        RadiusModel::Quarter { c_f, c_h },
                                        max_dl,
                                        lambda_ratio,
                                        r,
                                    ) <= 0.5 * w.sqrt() * w.ln()
                            };
                            q0 = smallest_radius(|r| {
                                r > 0.0 && dx_holds(r) && dx_holds(2.0 * r) && dx_holds(4.0 * r)
                            })
                            .filter(|&r| r > 0.0);
                        } else {
                            q_note =
                                Some("derivative chain inequality unsatisfied at sampled radii".to_string());
                        }
                    }
                    Ok(_) => {
                        q_note = Some(
                            "Psi is not finite over the derivative-pass range ball".to_string(),
                        );
                    }
                    Err(e) => {
                        q_note = Some(format!("Psi evaluation failed over the range ball: {e}"));
                    }
                }
            } else {
                q_note = Some(format!(
                    "derivative-pass range radius e^{{{:.1}}} exceeds float range; \
                     the value-pass bound stands, the derivative bound is not computed",
                    ln_m
                ));
            }
        }
    }
    let r0 = majorization_floor(n, t_horizon, sigma, delta as f64, c_f, c_h);

    let sampling_note = format!(
        "sampled at radii {:?}: {} directions per radius, {}x{} (x,t) lattice for f, \
         {} t-points for h, plus coordinate-ascent refinement of the max; \
         falsification only, not a proof",
        radii,
        dirs.len(),
        d_f,
        d_f,
        lat_h.len()
    );

    Ok(GrowthCertificate {
        class,
        c_f,
        c_h,
        sigma,
        delta,
        sigma_f,
        delta_f,
        sigma_h,
        delta_h,
        majorant_f: maj_f.sources(),
        majorant_h: maj_h.sources(),
        probes,
        stabilize_ratio_f,
        stabilize_ratio_h,
        sampling_note,
        t_horizon,
        phi: pp.phi,
        r,
        r0,
        q,
        q0,
        p: p_sel,
        sup_bound,
        dx_bound,
        q_note,
    })
}

/// max |d lambda_i / dx| on the fixed 101-point validation lattice.
fn max_abs_dlambda(p: &HyperbolicProblem, t_max: f64) -> Result<f64, CertifyError> {
    let dl = p.dlambda_dx()?;
    let mut worst = 0.0_f64;
    for e in dl {
        for a in 0..101 {
            for b in 0..101 {
                let x = a as f64 / 100.0;
                let t = t_max * b as f64 / 100.0;
                worst = worst.max(e.eval_values(&[x, t]).map_err(CertifyError::Eval)?.abs());
            }
        }
    }
    Ok(worst)
}

#[derive(Debug, Error)]
pub enum DependenceError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Solve(#[from] crate::solver::SolveError),
    #[error(transparent)]
    Problem(#[from] crate::problem::ProblemError),
    #[error(
        "the dependence estimate needs {what} to vanish; sampled |{what}| = {value:.3e} at {at}"
    )]
    Hypothesis {
        what: &'static str,
        value: f64,
        at: String,
    },
    #[error("{0}")]
    BadInput(String),
}

#[derive(Clone, Debug, Serialize)]
pub struct DependenceReport {
    pub nx: usize,
    pub t_horizon: f64,
    pub sup_dphi: f64,
    pub sup_diff: f64,
    /// sup|u - u_perturbed| / sup|dphi|; 0 when the perturbation vanishes.
    pub ratio: f64,
    /// (3 + 2 n L_h)^slabs, the stability constant of the sup estimate.
    pub bound: f64,
    pub slabs: f64,
    pub pass: bool,
    pub max_f_at_zero: f64,
    pub max_h_at_zero: f64,
}

/// Solve the problem with phi and with phi + dphi and compare the change of
/// the solution to the change of the data. Requires f(x,t,0) = 0 and
/// h(t,0) = 0, the homogeneity under which the difference obeys the same
/// sup estimate as a solution with initial data dphi.
pub fn continuous_dependence_check(
    p: &HyperbolicProblem,
    dphi_srcs: &[impl AsRef<str>],
    nx: usize,
    t_horizon: f64,
    lip: &LipschitzEstimate,
    opts: &crate::solver::SolverOptions,
) -> Result<DependenceReport, DependenceError> {
    if dphi_srcs.len() != p.n {
        return Err(DependenceError::BadInput(format!(
            "need {} perturbation components, got {}",
            p.n,
            dphi_srcs.len()
        )));
    }
    const HYP_TOL: f64 = 1e-12;
    let zeros = vec![0.0; p.n];
    let mut buf = Vec::with_capacity(p.n + 2);
    let mut max_f0 = 0.0_f64;
    let mut max_h0 = 0.0_f64;
    let d = 41;
    for i in 0..p.n {
        for a in 0..d {
            for b in 0..d {
                let x = a as f64 / (d - 1) as f64;
                let t = t_horizon * b as f64 / (d - 1) as f64;
                let v = p.f_at(i, x, t, &zeros, &mut buf)?.abs();
                if v > max_f0 {
                    max_f0 = v;
                    if v > HYP_TOL {
                        return Err(DependenceError::Hypothesis {
                            what: "f(x,t,0)",
                            value: v,
                            at: format!("i={}, x={x:.3}, t={t:.3}", i + 1),
                        });
                    }
                }
            }
        }
        for b in 0..d {
            let t = t_horizon * b as f64 / (d - 1) as f64;
            let v = p.h_at(i, t, &zeros, &mut buf)?.abs();
            if v > max_h0 {
                max_h0 = v;
                if v > HYP_TOL {
                    return Err(DependenceError::Hypothesis {
                        what: "h(t,0)",
                        value: v,
                        at: format!("i={}, t={t:.3}", i + 1),
                    });
                }
            }
        }
    }

    let phi_vars = VarSet::for_phi();
    let dphi: Vec<ExprAst> = dphi_srcs
        .iter()
        .map(|s| {
            parse(s.as_ref(), &phi_vars)
                .map_err(|e| DependenceError::BadInput(format!("bad perturbation: {e}")))
        })
        .collect::<Result<_, _>>()?;
    let phi2: Vec<ExprAst> = p.phi.iter().zip(&dphi).map(|(a, b)| a.add(b)).collect();
    let p2 = HyperbolicProblem::new(p.n, p.k, p.lambda.clone(), p.f.clone(), phi2, p.h.clone())?;

    let (fa, _) = crate::solver::solve(p, nx, t_horizon, lip, opts, false)?;
    let (fb, _) = crate::solver::solve(&p2, nx, t_horizon, lip, opts, false)?;
    let mut sup_diff = 0.0_f64;
    for (la, lb) in fa.u.iter().zip(&fb.u) {
        for (ca, cb) in la.iter().zip(lb) {
            for (&a, &b) in ca.iter().zip(cb) {
                sup_diff = sup_diff.max((a - b).abs());
            }
        }
    }
    let mut sup_dphi = 0.0_f64;
    for e in &dphi {
        for j in 0..=1000 {
            sup_dphi = sup_dphi.max(e.eval_values(&[j as f64 / 1000.0])?.abs());
        }
    }
    let slabs = slab_exponent(t_horizon, theta_from_q(q0_value(p.n, lip.l_f, lip.l_h)));
    let bound = (3.0 + 2.0 * p.n as f64 * lip.l_h).powf(slabs);
    let ratio = if sup_dphi == 0.0 {
        0.0
    } else {
        sup_diff / sup_dphi
    };
    Ok(DependenceReport {
        nx,
        t_horizon,
        sup_dphi,
        sup_diff,
        ratio,
        bound,
        slabs,
        pass: ratio <= bound * (1.0 + 1e-9),
        max_f_at_zero: max_f0,
        max_h_at_zero: max_h0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(f: [&str; 2], h: [&str; 2]) -> HyperbolicProblem {
        HyperbolicProblem::from_strs(2, 1, &["-1", "1"], &f, &["0", "0"], &h).unwrap()
    }

    #[test]
    fn lipschitz_of_sin_is_one() {
        let p = problem(["sin(u1)", "sin(u2)"], ["v2", "v1"]);
        let lip = estimate_lipschitz(&p, 1.0, 4.0, &SamplingSpec::default()).unwrap();
        assert_eq!(lip.l_f, 1.0, "cos hits 1 at the origin sample");
        assert_eq!(lip.l_h, 1.0);
        assert_eq!(lip.max_abs_lambda, 1.0);
        assert_eq!(lip.min_abs_lambda, 1.0);
        assert_eq!(lip.max_abs_dlambda_dx, 0.0);
    }

    #[test]
    fn lipschitz_of_product_peaks_at_corner() {
        let p = problem(["u1*u2", "0"], ["v2", "v1"]);
        let lip = estimate_lipschitz(&p, 1.0, 2.0, &SamplingSpec::default()).unwrap();
        // row sum |u2| + |u1| maximized at a corner of the box
        assert_eq!(lip.l_f, 4.0);
    }

    #[test]
    fn phi_sums_three_lattice_maxima() {
        let p = HyperbolicProblem::from_strs(
            2,
            1,
            &["-1", "1"],
            &["x", "x"],
            &[
                "sin(3.141592653589793*x)",
                "sin(3.141592653589793*x)",
            ],
            &["t", "t"],
        )
        .unwrap();
        let pp = compute_phi_psi(&p, 2.0, 1.0, &SamplingSpec::default()).unwrap();
        assert!((pp.phi - 5.0).abs() <= 1e-12, "phi = {}", pp.phi);
    }

    #[test]
    fn psi_vanishes_for_constant_problem() {
        let p = problem(["0", "0"], ["v2", "v1"]);
        let pp = compute_phi_psi(&p, 1.0, 1.0, &SamplingSpec::default()).unwrap();
        assert_eq!(pp.psi, 0.0);
        assert_eq!(pp.phi, 0.0);
    }

    #[test]
    fn apriori_formula_values() {
        let p = problem(["0", "0"], ["v2", "v1"]);
        // hand-built estimate so the formulas are exercised exactly
        let lip = LipschitzEstimate {
            l_f: 1.0,
            l_h: 1.0,
            m: 1.0,
            method: LipMethod::UserSupplied,
            max_abs_lambda: 1.0,
            min_abs_lambda: 1.0,
            max_abs_dlambda_dx: 0.0,
            density: 0,
        };
        let pp = PhiPsi {
            phi: 1.0,
            psi: 1.0,
            max_abs_phi: 1.0,
            max_abs_dphi: 0.0,
            max_abs_f_at_zero: 0.0,
            max_abs_f: 0.0,
            max_abs_df_dx: 0.0,
            max_abs_h_at_zero: 0.0,
            max_abs_dh_dt: 0.0,
            m: 1.0,
            t_horizon: 1.0,
        };
        let rep = apriori_bounds(&p, &lip, 1.0, &pp);
        assert!((rep.q0 - 6.0).abs() <= 1e-15);
        assert!((rep.theta0 - 1.0 / 12.0).abs() <= 1e-15);
        assert_eq!(rep.slabs0, 12.0);
        let expected = 7.0_f64.powi(12);
        assert!(
            (rep.global_sup_bound.value - expected).abs() / expected <= 1e-12,
            "bound {} vs {}",
            rep.global_sup_bound.value,
            expected
        );
        assert!((rep.local_sup_bound - 6.0).abs() <= 1e-15);
    }

    #[test]
    fn apriori_single_slab_and_unbounded_theta() {
        let p = problem(["0", "0"], ["v2", "v1"]);
        let lip = LipschitzEstimate {
            l_f: 1.0,
            l_h: 0.0,
            m: 1.0,
            method: LipMethod::UserSupplied,
            max_abs_lambda: 1.0,
            min_abs_lambda: 1.0,
            max_abs_dlambda_dx: 0.0,
            density: 0,
        };
        let pp = PhiPsi {
            phi: 2.0,
            psi: 0.0,
            max_abs_phi: 2.0,
            max_abs_dphi: 0.0,
            max_abs_f_at_zero: 0.0,
            max_abs_f: 0.0,
            max_abs_df_dx: 0.0,
            max_abs_h_at_zero: 0.0,
            max_abs_dh_dt: 0.0,
            m: 1.0,
            t_horizon: 0.2,
        };
        // q0 = 2, theta0 = 1/4, T = 0.2 -> one slab: bound 3*Phi, local 2*Phi
        let rep = apriori_bounds(&p, &lip, 0.2, &pp);
        assert_eq!(rep.slabs0, 1.0);
        assert!((rep.global_sup_bound.value - 6.0).abs() <= 1e-12);
        assert!((rep.local_sup_bound - 4.0).abs() <= 1e-15);
        assert_eq!(rep.dt_bound.value, 0.0);

        // L_f = 0 keeps theta unbounded but still one local step
        let lip0 = LipschitzEstimate { l_f: 0.0, ..lip };
        let rep = apriori_bounds(&p, &lip0, 5.0, &pp);
        assert_eq!(rep.theta0, f64::INFINITY);
        assert_eq!(rep.slabs0, 1.0);
        assert!((rep.global_sup_bound.value - 6.0).abs() <= 1e-12);
    }

    #[test]
    fn estimates_monotone_in_radius() {
        let p = problem(["u1*u2", "u2*u2"], ["v2*v2", "v1"]);
        let spec = SamplingSpec::default();
        let small = estimate_lipschitz(&p, 1.0, 1.0, &spec).unwrap();
        let large = estimate_lipschitz(&p, 1.0, 3.0, &spec).unwrap();
        assert!(large.l_f >= small.l_f);
        assert!(large.l_h >= small.l_h);
        let pp_small = compute_phi_psi(&p, 1.0, 1.0, &spec).unwrap();
        let pp_large = compute_phi_psi(&p, 1.0, 3.0, &spec).unwrap();
        assert!(pp_large.psi >= pp_small.psi);
        assert!(pp_large.phi >= pp_small.phi - 1e-15);
    }

    // radius solvers and growth certificates

    const A_QLL: &str = "16.154262241479262"; // e^e + 1

    fn maj_pair() -> (PolyMajorant, PolyMajorant) {
        (
            PolyMajorant::from_strs(&[A_QLL, "0", "1"], &VarSet::for_lambda()).unwrap(),
            PolyMajorant::from_strs(&[A_QLL, "0", "1"], &VarSet::new(["t"])).unwrap(),
        )
    }

    #[test]
    fn majorant_eval_and_sigma() {
        let m = PolyMajorant::from_strs(&["1 + t", "0", "2"], &VarSet::new(["t"])).unwrap();
        assert_eq!(m.degree(), 2);
        assert_eq!(m.eval(&[1.0], 3.0).unwrap(), 20.0);
        assert_eq!(m.sigma(&t_lattice(2.0, 5)).unwrap(), 3.0);
    }

    #[test]
    fn stable_loglog_of_majorant_scale() {
        assert!((ln1pexp(0.0) - 2.0_f64.ln()).abs() < 1e-15);
        assert!((ln1pexp(800.0) - 800.0).abs() < 1e-12);
        let w = loglog_s(16.0, 2.0, 5000.0);
        assert!((w - (2.0 * 5000.0 + 16.0_f64.ln()).ln()).abs() < 1e-9);
        assert_eq!(loglog_s(0.5, 1.0, f64::NEG_INFINITY), f64::NEG_INFINITY);
    }

    #[test]
    fn radius_solver_brackets_scalar_case() {
        let rs = solve_r(1.0, 1, 1.0, 2.0).unwrap();
        assert!(rs.r > 1.6 && rs.r < 1.8, "r = {}", rs.r);
        // the inequality holds at the root and fails just below it
        let g = |r: f64| 3.0 * 2.0_f64.ln() + 2.0 * r - r.exp();
        assert!(g(rs.r) <= 0.0);
        assert!(g(rs.r - 1e-3) > 0.0);
        assert_eq!(rs.r, rs.r_star);
        assert!(rs.r0.is_none() && !rs.floored);
        assert!((rs.bound.value - rs.r.exp()).abs() <= 1e-9 * rs.r.exp());
        let rs2 = solve_r(2.0, 1, 1.0, 2.0).unwrap();
        assert!(rs2.r > rs.r, "larger front constant needs a larger radius");
        assert_eq!(solve_r(1e-15, 1, 1.0, 2.0).unwrap().r, 0.0);
        assert!(solve_r(-1.0, 1, 1.0, 2.0).is_err());
        assert!(solve_q(1.0, 1, 1.0, 2.0).unwrap().r == rs.r);
    }

    #[test]
    fn majorization_floor_depends_on_growth_scale() {
        // strong coupling: the chain factor outgrows the closed form forever
        assert!(majorization_floor(2, 10.0, 16.154262241479262, 2.0, 2.0, 2.0).is_none());
        // weak coupling: a finite floor exists
        let floor = majorization_floor(1, 0.05, 2.0, 1.0, 0.05, 0.05).expect("floor");
        assert!(floor > 5.0 && floor < 200.0, "floor = {floor}");
        assert!(majorization_holds(1, 0.05, 2.0, 1.0, 0.05, 0.05, floor));
        assert!(!majorization_holds(1, 0.05, 2.0, 1.0, 0.05, 0.05, floor - 1e-3));
        let rs = solve_r_floored(1.0, 1, 2.0, 1.0, 0.05, 0.05, 0.05).unwrap();
        assert!(rs.floored && rs.r0 == Some(rs.r));
        assert!(rs.r_star < 2.0 && rs.r > 5.0, "r* = {}, r = {}", rs.r_star, rs.r);
    }

    #[test]
    fn growth_class_bounded_gradients() {
        let p = HyperbolicProblem::from_strs(
            2,
            1,
            &["-1", "1"],
            &["sin(u1)", "sin(u2)"],
            &["1", "1"],
            &["v2", "v1"],
        )
        .unwrap();
        let (mf, mh) = maj_pair();
        let cert = certify_growth(
            &p,
            &mf,
            &mh,
            2.0,
            2.0,
            &DEFAULT_PROBE_RADII,
            1.0,
            &SamplingSpec::default(),
        )
        .unwrap();
        assert_eq!(cert.class, GrowthClass::Thm1Lipschitz);
        assert!(cert.stabilize_ratio_f <= STABILIZE_TOL);
        assert!(cert.stabilize_ratio_h <= STABILIZE_TOL);
        // the refined envelope finds the true plateau of |diag cos|
        let last = cert.probes.last().unwrap();
        assert!(
            (last.grad_f - 2.0_f64.sqrt()).abs() <= 1e-6,
            "grad_f = {}",
            last.grad_f
        );
        assert_eq!(last.grad_h, 2.0_f64.sqrt());
        let r = cert.r.expect("certified radius");
        assert!(r > 30.0 && r < 80.0, "r = {r}");
        assert_eq!(cert.p, cert.r);
        assert!(cert.q.is_some(), "q skipped: {:?}", cert.q_note);
        assert!(cert.sup_bound.is_some() && cert.dx_bound.is_some());
        assert_eq!(cert.sigma, 16.154262241479262);
        assert_eq!(cert.delta, 2);
    }

    #[test]
    fn growth_class_quarter_loglog() {
        let gf = format!("(loglog({A_QLL} + u1*u1 + u2*u2))^0.25");
        let gh = format!("(loglog({A_QLL} + v1*v1 + v2*v2))^0.25");
        let p = HyperbolicProblem::from_strs(
            2,
            1,
            &["-1", "1"],
            &[&format!("u1*{gf}"), &format!("u2*{gf}")],
            &["1", "1"],
            &[&format!("v2*{gh}"), &format!("v1*{gh}")],
        )
        .unwrap();
        let (mf, mh) = maj_pair();
        let cert = certify_growth(
            &p,
            &mf,
            &mh,
            2.0,
            2.0,
            &DEFAULT_PROBE_RADII,
            10.0,
            &SamplingSpec::default(),
        )
        .unwrap();
        assert_eq!(cert.class, GrowthClass::Thm3QuarterLoglog);
        assert!(cert.probes.iter().all(|s| s.quarter_f_ok && s.quarter_h_ok));
        assert!(cert.stabilize_ratio_f > STABILIZE_TOL, "still growing");
        let r = cert.r.expect("certified radius");
        assert!(r > 1000.0 && r < 10000.0, "r = {r}");
        // sharp entry point of the chain inequality
        let model = RadiusModel::Quarter { c_f: 2.0, c_h: 2.0 };
        let ln_phi = cert.phi.ln();
        let gap = |rr: f64| {
            chain_lhs_ln(ln_phi, 2, 10.0, cert.sigma, cert.delta as f64, model, rr)
                - (rr - 0.5 * 2.0_f64.ln())
        };
        assert!(gap(r) <= 0.0);
        assert!(gap(r - 1e-3) > 0.0);
        // the sup bound is far beyond float range, carried in log space
        let sup = cert.sup_bound.unwrap();
        assert!(sup.value.is_infinite() && sup.ln_value > 500.0);
        assert!(cert.q.is_none() && cert.q_note.is_some());
        assert!(cert.r0.is_none(), "majorization should never hold here");
    }

    #[test]
    fn expr_majorant_agrees_with_poly_form() {
        let gf = format!("(loglog({A_QLL} + u1*u1 + u2*u2))^0.25");
        let p = HyperbolicProblem::from_strs(
            2,
            1,
            &["-1", "1"],
            &[&format!("u1*{gf}"), &format!("u2*{gf}")],
            &["1", "1"],
            &["v2", "v1"],
        )
        .unwrap();
        let a: f64 = A_QLL.parse().unwrap();
        let mf = ExprMajorant::for_f(&format!("{A_QLL} + r*r"), a, 2).unwrap();
        let mh = ExprMajorant::for_h(&format!("{A_QLL} + r*r"), a, 2).unwrap();
        let spec = SamplingSpec::default();
        let ce = certify_growth(&p, &mf, &mh, 2.0, 2.0, &DEFAULT_PROBE_RADII, 10.0, &spec)
            .unwrap();
        let (pf, ph) = maj_pair();
        let cp = certify_growth(&p, &pf, &ph, 2.0, 2.0, &DEFAULT_PROBE_RADII, 10.0, &spec)
            .unwrap();
        assert_eq!(ce.class, cp.class);
        assert_eq!(ce.sigma, cp.sigma);
        assert_eq!(ce.delta, cp.delta);
        assert_eq!(ce.r, cp.r, "same scale pair, same chain, same radius");

        // prefix mismatch is caught up front
        let wrong = ExprMajorant::for_h(&format!("{A_QLL} + r"), a, 1).unwrap();
        let err = certify_growth(&p, &wrong, &mh, 2.0, 2.0, &DEFAULT_PROBE_RADII, 10.0, &spec)
            .unwrap_err();
        assert!(matches!(err, CertifyError::BadInput(_)));
        // the radius variable is required to be named r
        assert!(ExprMajorant::for_f("q*q", 1.0, 2).is_err());
    }

    #[test]
    fn growth_class_full_loglog_f() {
        let gf = format!("loglog({A_QLL} + u1*u1 + u2*u2)");
        let p = HyperbolicProblem::from_strs(
            2,
            1,
            &["-1", "1"],
            &[&format!("u1*{gf}"), &format!("u2*{gf}")],
            &["1", "1"],
            &["v2", "v1"],
        )
        .unwrap();
        let (mf, mh) = maj_pair();
        let cert = certify_growth(
            &p,
            &mf,
            &mh,
            2.0,
            2.0,
            &DEFAULT_PROBE_RADII,
            10.0,
            &SamplingSpec::default(),
        )
        .unwrap();
        assert_eq!(cert.class, GrowthClass::Remark2LoglogFLipschitzH);
        assert!(cert.probes.iter().any(|s| !s.quarter_f_ok), "quarter power is exceeded");
        assert!(cert.probes.iter().all(|s| s.full_f_ok));
        assert!(cert.stabilize_ratio_h <= STABILIZE_TOL);
        let r = cert.r.expect("certified radius");
        assert!(r > 1000.0 && r < 20000.0, "r = {r}");
        assert!(cert.q.is_none() && cert.q_note.is_some());
    }

    #[test]
    fn growth_class_uncertified_for_quadratic() {
        let p = HyperbolicProblem::from_strs(
            2,
            1,
            &["-1", "1"],
            &["u1*u1", "u2*u2"],
            &["1", "1"],
            &["v2", "v1"],
        )
        .unwrap();
        let (mf, mh) = maj_pair();
        let cert = certify_growth(
            &p,
            &mf,
            &mh,
            2.0,
            2.0,
            &DEFAULT_PROBE_RADII,
            10.0,
            &SamplingSpec::default(),
        )
        .unwrap();
        assert_eq!(cert.class, GrowthClass::Uncertified);
        assert!(cert.r.is_none() && cert.q.is_none() && cert.sup_bound.is_none());
        let last = cert.probes.last().unwrap();
        assert!((last.grad_f - 2e9).abs() <= 1.0, "grad 2r at the axis");
    }

    #[test]
    fn certify_rejects_unusable_majorants() {
        let p = problem(["sin(u1)", "sin(u2)"], ["v2", "v1"]);
        let (mf, mh) = maj_pair();
        let flat = PolyMajorant::constants(&[1.0], &VarSet::for_lambda());
        let err = certify_growth(
            &p,
            &flat,
            &mh,
            2.0,
            2.0,
            &DEFAULT_PROBE_RADII,
            1.0,
            &SamplingSpec::default(),
        )
        .unwrap_err();
        assert!(matches!(err, CertifyError::MajorantBelowE { which: "F", .. }), "{err}");
        // decreasing radii
        assert!(matches!(
            certify_growth(&p, &mf, &mh, 2.0, 2.0, &[10.0, 1.0], 1.0, &SamplingSpec::default()),
            Err(CertifyError::BadInput(_))
        ));
        // wrong coefficient variables
        let bad_vars = PolyMajorant::constants(&[20.0], &VarSet::new(["t"]));
        assert!(matches!(
            certify_growth(&p, &bad_vars, &mh, 2.0, 2.0, &DEFAULT_PROBE_RADII, 1.0, &SamplingSpec::default()),
            Err(CertifyError::BadInput(_))
        ));
    }

    #[test]
    fn dependence_of_circulating_wave_is_tame() {
        let pi = std::f64::consts::PI;
        let p = HyperbolicProblem::from_strs(
            2,
            1,
            &["-1", "1"],
            &["0", "0"],
            &[&format!("-sin({pi}*x)"), &format!("sin({pi}*x)")],
            &["v2", "v1"],
        )
        .unwrap();
        let lip = estimate_lipschitz(&p, 0.5, 2.0, &SamplingSpec::default()).unwrap();
        let opts = crate::solver::SolverOptions {
            dt_user: Some(0.02),
            ..Default::default()
        };
        let two_pi = 2.0 * pi;
        let dphi = [
            format!("0.001*sin({two_pi}*x)"),
            format!("0.001*sin({two_pi}*x)"),
        ];
        let rep = continuous_dependence_check(&p, &dphi, 50, 0.5, &lip, &opts).unwrap();
        assert!((rep.sup_dphi - 1e-3).abs() <= 1e-12, "sup dphi = {}", rep.sup_dphi);
        assert!(rep.ratio > 0.5 && rep.ratio <= 1.1, "ratio = {}", rep.ratio);
        assert_eq!(rep.bound, 7.0);
        assert_eq!(rep.slabs, 1.0);
        assert!(rep.pass);
        let rep0 = continuous_dependence_check(&p, &["0", "0"], 50, 0.5, &lip, &opts).unwrap();
        assert_eq!(rep0.sup_diff, 0.0);
        assert_eq!(rep0.ratio, 0.0);
    }

    #[test]
    fn dependence_requires_homogeneous_sources() {
        let opts = crate::solver::SolverOptions::default();
        let p = problem(["x", "x"], ["v2", "v1"]);
        let lip = estimate_lipschitz(&p, 0.5, 1.0, &SamplingSpec::default()).unwrap();
        let err = continuous_dependence_check(&p, &["0", "0"], 10, 0.5, &lip, &opts).unwrap_err();
        assert!(
            matches!(err, DependenceError::Hypothesis { what: "f(x,t,0)", .. }),
            "{err}"
        );
        let p2 = problem(["0", "0"], ["v2 + t", "v1"]);
        let lip2 = estimate_lipschitz(&p2, 0.5, 1.0, &SamplingSpec::default()).unwrap();
        let err2 = continuous_dependence_check(&p2, &["0", "0"], 10, 0.5, &lip2, &opts).unwrap_err();
        assert!(
            matches!(err2, DependenceError::Hypothesis { what: "h(t,0)", .. }),
            "{err2}"
        );
    }
}
