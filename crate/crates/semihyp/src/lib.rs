//! Solver suite for semilinear first-order hyperbolic systems on the unit
//! strip with nonlinear nonlocal boundary conditions.
//!
//! The system couples n transport equations `du_i/dt + lambda_i(x,t) du_i/dx
//! = f_i(x,t,u)` on 0 < x < 1 with initial data `u(x,0) = phi(x)` and
//! boundary values fed back through the trace of u on the opposite face:
//! `u_i(inflow, t) = h_i(t, v(t))` where v collects outflow values. Every
//! speed keeps a fixed sign, so each component has one inflow and one outflow
//! face for all time.
//!
//! Crate layout:
//! - [`expr`]: the expression language used for all problem data.
//! - [`problem`]: validated instances, trace conventions, compatibility
//!   checks on the initial data.
//! - [`characteristics`]: backward characteristic tracing with face-crossing
//!   detection.
//! - [`solver`]: time-slab fixed-point solver, derivative transport, CSV
//!   export, manufactured instances.
//! - [`bounds`]: Lipschitz estimation, a priori sup/derivative bounds,
//!   growth-class certificates and radius solvers.
//! - [`blowup`]: adaptive march toward finite-time blow-up, T* estimation,
//!   growth-family frontier scans.
//! - [`config`]: JSON run configuration, presets, dotted-path overrides.
//! - [`cli`]: command-line interface implementation.

pub mod blowup;
pub mod bounds;
pub mod characteristics;
pub mod cli;
pub mod config;
pub mod expr;
pub mod problem;
pub mod solver;
