//! Run configuration.
//!
//! A run is described by one JSON document with a strict schema: unknown
//! keys are rejected and the error names the offending path, so a typo in a
//! config file surfaces as a usage error instead of a silently ignored
//! setting. `problem` and `grid` are required; the remaining sections have
//! defaults. Built-in presets cover the standard demonstration problems,
//! and `key.path=value` overrides edit any field from the command line.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::SamplingSpec;
use crate::problem::{HyperbolicProblem, ProblemError};
use crate::solver::SolverOptions;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config is not valid JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("config schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("bad override `{spec}`: {reason}")]
    Override { spec: String, reason: String },
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("{0}")]
    Invalid(String),
}

/// Top-level run description. `problem` and `grid` are mandatory.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub problem: ProblemSection,
    pub grid: GridSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub bounds: BoundsSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateSection>,
    #[serde(default)]
    pub blowup: BlowupSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// The system itself: sizes and the four expression families.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub n: usize,
    pub k: usize,
    pub lambda: Vec<String>,
    pub f: Vec<String>,
    pub phi: Vec<String>,
    pub h: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// Spatial intervals; the lattice has nx + 1 nodes.
    pub nx: usize,
    /// Time-level spacing; default is a quarter of the slab width / 4.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_user: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub eps_fix: f64,
    pub max_iter: usize,
    pub eps_evt: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let o = SolverOptions::default();
        SolverSection {
            eps_fix: o.eps_fix,
            max_iter: o.max_iter,
            eps_evt: o.eps_evt,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundsSection {
    /// Sampling box radius for the Lipschitz estimate. When absent the
    /// tools start from the computed suggestion.
    #[serde(alias = "M", skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    /// Lattice density per axis for all sampling sweeps.
    pub density: usize,
}

impl Default for BoundsSection {
    fn default() -> Self {
        BoundsSection {
            m: None,
            density: SamplingSpec::default().density,
        }
    }
}

/// Growth-certificate inputs: the majorant pair and the gradient constants.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateSection {
    pub majorant: MajorantSection,
    #[serde(rename = "C_f")]
    pub c_f: f64,
    #[serde(rename = "C_h")]
    pub c_h: f64,
}

/// Majorant expressions in the lattice variables plus the radius `r`,
/// with the declared scale pair: |F|, |H| <= sigma (1 + e^r)^delta.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MajorantSection {
    pub sigma: f64,
    pub delta: usize,
    /// Expression in (x, t, r).
    #[serde(rename = "F")]
    pub f: String,
    /// Expression in (t, r).
    #[serde(rename = "H")]
    pub h: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BlowupSection {
    pub u_max: f64,
    pub t_max: f64,
    pub theta_min: f64,
}

impl Default for BlowupSection {
    fn default() -> Self {
        BlowupSection {
            u_max: 1e6,
            t_max: 10.0,
            theta_min: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutputFormat {
    #[serde(rename = "csv")]
    Csv,
    #[serde(rename = "json")]
    Json,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub format: OutputFormat,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            format: OutputFormat::Csv,
            path: None,
        }
    }
}

impl ProblemConfig {
    pub fn build_problem(&self) -> Result<HyperbolicProblem, ConfigError> {
        let p = &self.problem;
        Ok(HyperbolicProblem::from_strs(
            p.n, p.k, &p.lambda, &p.f, &p.phi, &p.h,
        )?)
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            eps_fix: self.solver.eps_fix,
            max_iter: self.solver.max_iter,
            eps_evt: self.solver.eps_evt,
            dt_user: self.grid.dt_user,
            ..SolverOptions::default()
        }
    }

    pub fn sampling_spec(&self) -> SamplingSpec {
        SamplingSpec {
            density: self.bounds.density,
            ..SamplingSpec::default()
        }
    }

    /// Cheap structural checks with actionable messages; expression-level
    /// validation happens in `build_problem`.
    pub fn check_shape(&self) -> Result<(), ConfigError> {
        let p = &self.problem;
        for (name, v) in [
            ("problem.lambda", &p.lambda),
            ("problem.f", &p.f),
            ("problem.phi", &p.phi),
            ("problem.h", &p.h),
        ] {
            if v.len() != p.n {
                return Err(ConfigError::Invalid(format!(
                    "`{name}` has {} entries but problem.n = {}",
                    v.len(),
                    p.n
                )));
            }
        }
        if self.grid.nx < 2 {
            return Err(ConfigError::Invalid(format!(
                "`grid.nx` must be at least 2, got {}",
                self.grid.nx
            )));
        }
        if let Some(dt) = self.grid.dt_user {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(ConfigError::Invalid(format!(
                    "`grid.dt_user` must be a positive finite number, got {dt}"
                )));
            }
        }
        for (name, v) in [
            ("solver.eps_fix", self.solver.eps_fix),
            ("solver.eps_evt", self.solver.eps_evt),
            ("blowup.u_max", self.blowup.u_max),
            ("blowup.t_max", self.blowup.t_max),
            ("blowup.theta_min", self.blowup.theta_min),
        ] {
            if !(v > 0.0) {
                return Err(ConfigError::Invalid(format!(
                    "`{name}` must be positive, got {v}"
                )));
            }
        }
        if let Some(m) = self.bounds.m {
            if !(m > 0.0) || !m.is_finite() {
                return Err(ConfigError::Invalid(format!(
                    "`bounds.m` must be a positive finite number, got {m}"
                )));
            }
        }
        Ok(())
    }
}

/// Parse a config document, apply `key.path=value` overrides, and check the
/// strict schema. Schema violations name the offending key path.
pub fn load_config(text: &str, overrides: &[String]) -> Result<ProblemConfig, ConfigError> {
    let mut value: serde_json::Value = serde_json::from_str(text)?;
    for spec in overrides {
        apply_override(&mut value, spec)?;
    }
    let cfg: ProblemConfig =
        serde_path_to_error::deserialize(value).map_err(|e| ConfigError::Schema {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
    cfg.check_shape()?;
    Ok(cfg)
}

/// Apply one `key.path=value` override to a JSON document. Path segments
/// index objects by name and arrays by number; missing object keys are
/// created (the schema pass rejects them if they are not real settings).
/// The value is parsed as JSON when possible and kept as a string otherwise,
/// so `grid.nx=400` is a number and `problem.f.0=sin(u1)` is a string.
pub fn apply_override(root: &mut serde_json::Value, spec: &str) -> Result<(), ConfigError> {
    use serde_json::Value;
    let err = |reason: &str| ConfigError::Override {
        spec: spec.to_string(),
        reason: reason.to_string(),
    };
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| err("expected key.path=value"))?;
    if path.is_empty() {
        return Err(err("empty key path"));
    }
    let new = serde_json::from_str::<Value>(raw).unwrap_or(Value::String(raw.to_string()));
    // an override of a string slot stays a string, so `problem.f.0=1` writes
    // the expression "1" rather than retyping the field
    let place = |slot: &mut Value, new: Value| {
        if slot.is_string() && !new.is_string() {
            *slot = Value::String(raw.to_string());
        } else {
            *slot = new;
        }
    };

    let mut cur = root;
    let segments: Vec<&str> = path.split('.').collect();
    for (idx, seg) in segments.iter().enumerate() {
        let last = idx + 1 == segments.len();
        match cur {
            Value::Object(map) => {
                if last {
                    place(
                        map.entry(seg.to_string()).or_insert(Value::Null),
                        new,
                    );
                    return Ok(());
                }
                cur = map
                    .entry(seg.to_string())
                    .or_insert_with(|| Value::Object(Default::default()));
            }
            Value::Array(items) => {
                let i: usize = seg
                    .parse()
                    .map_err(|_| err(&format!("`{seg}` is not an array index")))?;
                if i >= items.len() {
                    return Err(err(&format!(
                        "index {i} is out of bounds (array has {} entries)",
                        items.len()
                    )));
                }
                if last {
                    place(&mut items[i], new);
                    return Ok(());
                }
                cur = &mut items[i];
            }
            other => {
                return Err(err(&format!(
                    "`{}` is a {} and cannot be indexed by `{seg}`",
                    segments[..idx].join("."),
                    kind_name(other)
                )));
            }
        }
    }
    unreachable!("loop returns on the last segment");
}

fn kind_name(v: &serde_json::Value) -> &'static str {
    use serde_json::Value;
    match v {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

pub const PRESET_NAMES: [&str; 7] = [
    "circulating-wave",
    "constant",
    "manufactured",
    "riccati",
    "sin",
    "qll",
    "ll",
];

/// Smallest offset keeping loglog well defined and positive: e^e + 1.
const A_LOGLOG: &str = "16.154262241479262";
const PI: &str = "3.141592653589793";

fn swap_h() -> Vec<String> {
    vec!["v2".into(), "v1".into()]
}

fn loglog_certificate() -> CertificateSection {
    CertificateSection {
        majorant: MajorantSection {
            sigma: 16.154262241479262,
            delta: 2,
            f: format!("{A_LOGLOG} + r*r"),
            h: format!("{A_LOGLOG} + r*r"),
        },
        c_f: 2.0,
        c_h: 2.0,
    }
}

/// Built-in, fully determined run configurations. Every tool accepts
/// `--preset <name>` in place of a config file.
pub fn preset(name: &str) -> Option<ProblemConfig> {
    let two = |a: &str, b: &str| vec![a.to_string(), b.to_string()];
    let base = |f: Vec<String>, phi: Vec<String>, h: Vec<String>| ProblemSection {
        n: 2,
        k: 1,
        lambda: two("-1", "1"),
        f,
        phi,
        h,
    };
    let cfg = match name {
        // counter-propagating waves exchanged at the walls; the exact
        // solution is u = (-sin(pi (x+t)), sin(pi (x-t)))
        "circulating-wave" => ProblemConfig {
            problem: base(
                two("0", "0"),
                two(&format!("-sin({PI}*x)"), &format!("sin({PI}*x)")),
                swap_h(),
            ),
            grid: GridSection {
                nx: 200,
                dt_user: Some(0.005),
            },
            solver: SolverSection::default(),
            bounds: BoundsSection::default(),
            certificate: None,
            blowup: BlowupSection {
                t_max: 2.0,
                ..Default::default()
            },
            output: OutputSection::default(),
        },
        "constant" => ProblemConfig {
            problem: base(two("0", "0"), two("1", "1"), swap_h()),
            grid: GridSection {
                nx: 50,
                dt_user: None,
            },
            solver: SolverSection::default(),
            bounds: BoundsSection::default(),
            certificate: None,
            blowup: BlowupSection {
                t_max: 1.0,
                ..Default::default()
            },
            output: OutputSection::default(),
        },
        // forced so the exact solution is u = (x e^-t, (1-x) e^-t)
        "manufactured" => ProblemConfig {
            problem: base(
                two("-(x + 1)*exp(-t)", "-(2 - x)*exp(-t)"),
                two("x", "1 - x"),
                two("exp(-t)", "exp(-t)"),
            ),
            grid: GridSection {
                nx: 200,
                dt_user: Some(0.005),
            },
            solver: SolverSection::default(),
            bounds: BoundsSection::default(),
            certificate: None,
            blowup: BlowupSection {
                t_max: 1.0,
                ..Default::default()
            },
            output: OutputSection::default(),
        },
        // quadratic growth: each component solves u' = u^2 along its
        // characteristic, so the run from u = 1 blows up at t = 1
        "riccati" => ProblemConfig {
            problem: base(two("u1*u1", "u2*u2"), two("1", "1"), swap_h()),
            grid: GridSection {
                nx: 200,
                dt_user: None,
            },
            solver: SolverSection::default(),
            // a fixed sampling box keeps plain `solve` usable away from the
            // blow-up time; the `blowup` command re-sizes the box itself
            bounds: BoundsSection {
                m: Some(16.0),
                density: 21,
            },
            certificate: Some(loglog_certificate()),
            blowup: BlowupSection {
                u_max: 1e6,
                t_max: 2.0,
                theta_min: 1e-8,
            },
            output: OutputSection::default(),
        },
        // globally Lipschitz nonlinearity
        "sin" => ProblemConfig {
            problem: base(two("sin(u1)", "sin(u2)"), two("1", "1"), swap_h()),
            grid: GridSection {
                nx: 100,
                dt_user: None,
            },
            solver: SolverSection::default(),
            bounds: BoundsSection::default(),
            certificate: Some(loglog_certificate()),
            blowup: BlowupSection {
                u_max: 1e300,
                t_max: 10.0,
                theta_min: 1e-8,
            },
            output: OutputSection::default(),
        },
        // quarter-power iterated-log growth, certifiable on any horizon
        "qll" => ProblemConfig {
            problem: base(
                two(
                    &format!("u1*(loglog({A_LOGLOG} + u1*u1 + u2*u2))^0.25"),
                    &format!("u2*(loglog({A_LOGLOG} + u1*u1 + u2*u2))^0.25"),
                ),
                two("1", "1"),
                swap_h(),
            ),
            grid: GridSection {
                nx: 100,
                dt_user: None,
            },
            solver: SolverSection::default(),
            bounds: BoundsSection::default(),
            certificate: Some(loglog_certificate()),
            blowup: BlowupSection {
                u_max: 1e300,
                t_max: 10.0,
                theta_min: 1e-8,
            },
            output: OutputSection::default(),
        },
        // full iterated-log growth with Lipschitz boundary coupling
        "ll" => ProblemConfig {
            problem: base(
                two(
                    &format!("u1*loglog({A_LOGLOG} + u1*u1 + u2*u2)"),
                    &format!("u2*loglog({A_LOGLOG} + u1*u1 + u2*u2)"),
                ),
                two("1", "1"),
                swap_h(),
            ),
            grid: GridSection {
                nx: 100,
                dt_user: None,
            },
            solver: SolverSection::default(),
            bounds: BoundsSection::default(),
            certificate: Some(loglog_certificate()),
            blowup: BlowupSection {
                u_max: 1e300,
                t_max: 10.0,
                theta_min: 1e-8,
            },
            output: OutputSection::default(),
        },
        _ => return None,
    };
    Some(cfg)
}

/// Pretty-printed JSON for a preset, as emitted by the `preset` command.
pub fn preset_json(name: &str) -> Option<String> {
    let cfg = preset(name)?;
    let mut s = serde_json::to_string_pretty(&cfg).expect("presets serialize");
    s.push('\n');
    Some(s)
}
