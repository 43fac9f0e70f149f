use thiserror::Error;

use super::ast::{node_to_string, BinOp, ExprAst, Func, Node, VarSet};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("log of non-positive value {arg} in `{expr}`")]
    LogDomain { arg: f64, expr: String },
    #[error("loglog requires argument > 1, got {arg} in `{expr}`")]
    LogLogDomain { arg: f64, expr: String },
    #[error("sqrt of negative value {arg} in `{expr}`")]
    SqrtDomain { arg: f64, expr: String },
    #[error("division by zero in `{expr}`")]
    DivisionByZero { expr: String },
    #[error("{base}^{exponent} is undefined in `{expr}`")]
    PowDomain {
        base: f64,
        exponent: f64,
        expr: String,
    },
    #[error("binding does not match the declared variable set: {0}")]
    BadBindings(String),
}

/// Name-keyed values covering a declared variable set.
#[derive(Clone, Debug)]
pub struct Bindings {
    vars: VarSet,
    values: Vec<f64>,
    set: Vec<bool>,
}

impl Bindings {
    pub fn new(vars: &VarSet) -> Self {
        Bindings {
            vars: vars.clone(),
            values: vec![0.0; vars.len()],
            set: vec![false; vars.len()],
        }
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<&mut Self, EvalError> {
        let slot = self
            .vars
            .index_of(name)
            .ok_or_else(|| EvalError::BadBindings(format!("unknown variable '{name}'")))?;
        self.values[slot] = value;
        self.set[slot] = true;
        Ok(self)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn check_complete(&self) -> Result<(), EvalError> {
        for (i, s) in self.set.iter().enumerate() {
            if !s {
                return Err(EvalError::BadBindings(format!(
                    "variable '{}' is unbound",
                    self.vars.name(i)
                )));
            }
        }
        Ok(())
    }
}

impl ExprAst {
    /// Evaluate against name-keyed bindings; the bindings must cover exactly
    /// this expression's declared variable set.
    pub fn eval(&self, bindings: &Bindings) -> Result<f64, EvalError> {
        if bindings.vars != self.vars {
            return Err(EvalError::BadBindings(format!(
                "expected variables {:?}",
                self.vars.names()
            )));
        }
        bindings.check_complete()?;
        self.eval_values(&bindings.values)
    }

    /// Evaluate against a value slice ordered like the declared variable set.
    /// This is the hot path used by the solver.
    pub fn eval_values(&self, values: &[f64]) -> Result<f64, EvalError> {
        debug_assert_eq!(values.len(), self.vars.len());
        eval_node(&self.root, values, &self.vars)
    }
}

fn eval_node(node: &Node, values: &[f64], vars: &VarSet) -> Result<f64, EvalError> {
    Ok(match node {
        Node::Num(c) => *c,
        Node::Var(slot) => values[*slot],
        Node::Neg(a) => -eval_node(a, values, vars)?,
        Node::Bin(op, l, r) => {
            let a = eval_node(l, values, vars)?;
            let b = eval_node(r, values, vars)?;
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b == 0.0 {
                        return Err(EvalError::DivisionByZero {
                            expr: node_to_string(node, vars),
                        });
                    }
                    a / b
                }
                BinOp::Pow => {
                    let v = a.powf(b);
                    if v.is_nan() && !a.is_nan() && !b.is_nan() {
                        return Err(EvalError::PowDomain {
                            base: a,
                            exponent: b,
                            expr: node_to_string(node, vars),
                        });
                    }
                    v
                }
            }
        }
        Node::App(func, a) => {
            let x = eval_node(a, values, vars)?;
            match func {
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Exp => x.exp(),
                Func::Log => {
                    if x <= 0.0 {
                        return Err(EvalError::LogDomain {
                            arg: x,
                            expr: node_to_string(node, vars),
                        });
                    }
                    x.ln()
                }
                Func::LogLog => {
                    if x <= 1.0 {
                        return Err(EvalError::LogLogDomain {
                            arg: x,
                            expr: node_to_string(node, vars),
                        });
                    }
                    x.ln().ln()
                }
                Func::Sqrt => {
                    if x < 0.0 {
                        return Err(EvalError::SqrtDomain {
                            arg: x,
                            expr: node_to_string(node, vars),
                        });
                    }
                    x.sqrt()
                }
                Func::Abs => x.abs(),
                Func::Tanh => x.tanh(),
            }
        }
    })
}
