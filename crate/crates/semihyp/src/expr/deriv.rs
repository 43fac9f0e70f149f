use thiserror::Error;

use super::ast::{node_to_string, BinOp, ExprAst, Func, Node};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiffError {
    #[error("abs is not differentiable: `{expr}`")]
    AbsNotDifferentiable { expr: String },
    #[error("unknown variable '{0}'")]
    UnknownVariable(String),
}

impl ExprAst {
    /// Symbolic partial derivative with respect to `var`, simplified.
    pub fn differentiate(&self, var: &str) -> Result<ExprAst, DiffError> {
        let slot = self
            .vars
            .index_of(var)
            .ok_or_else(|| DiffError::UnknownVariable(var.to_string()))?;
        let d = diff_node(&self.root, slot, self)?;
        Ok(ExprAst::from_parts(self.vars.clone(), simplify_node(d)))
    }

    /// Simplified copy (constant folding and identity elimination only).
    pub fn simplified(&self) -> ExprAst {
        ExprAst::from_parts(self.vars.clone(), simplify_node(self.root.clone()))
    }
}

fn num(c: f64) -> Node {
    Node::Num(c)
}

fn add(a: Node, b: Node) -> Node {
    Node::Bin(BinOp::Add, Box::new(a), Box::new(b))
}

fn sub(a: Node, b: Node) -> Node {
    Node::Bin(BinOp::Sub, Box::new(a), Box::new(b))
}

fn mul(a: Node, b: Node) -> Node {
    Node::Bin(BinOp::Mul, Box::new(a), Box::new(b))
}

fn div(a: Node, b: Node) -> Node {
    Node::Bin(BinOp::Div, Box::new(a), Box::new(b))
}

fn pow(a: Node, b: Node) -> Node {
    Node::Bin(BinOp::Pow, Box::new(a), Box::new(b))
}

fn app(f: Func, a: Node) -> Node {
    Node::App(f, Box::new(a))
}

fn diff_node(node: &Node, slot: usize, ctx: &ExprAst) -> Result<Node, DiffError> {
    Ok(match node {
        Node::Num(_) => num(0.0),
        Node::Var(s) => num(if *s == slot { 1.0 } else { 0.0 }),
        Node::Neg(a) => Node::Neg(Box::new(diff_node(a, slot, ctx)?)),
        Node::Bin(BinOp::Add, l, r) => add(diff_node(l, slot, ctx)?, diff_node(r, slot, ctx)?),
        Node::Bin(BinOp::Sub, l, r) => sub(diff_node(l, slot, ctx)?, diff_node(r, slot, ctx)?),
        Node::Bin(BinOp::Mul, l, r) => {
            let dl = diff_node(l, slot, ctx)?;
            let dr = diff_node(r, slot, ctx)?;
            add(mul(dl, (**r).clone()), mul((**l).clone(), dr))
        }
        Node::Bin(BinOp::Div, l, r) => {
            let dl = diff_node(l, slot, ctx)?;
            let dr = diff_node(r, slot, ctx)?;
            div(
                sub(mul(dl, (**r).clone()), mul((**l).clone(), dr)),
                pow((**r).clone(), num(2.0)),
            )
        }
        Node::Bin(BinOp::Pow, base, exp) => {
            let db = diff_node(base, slot, ctx)?;
            match &**exp {
                // power rule for constant exponents; valid for negative bases
                Node::Num(c) => mul(
                    mul(num(*c), pow((**base).clone(), num(c - 1.0))),
                    db,
                ),
                _ => {
                    // general case: f^g * (g' log f + g f'/f)
                    let de = diff_node(exp, slot, ctx)?;
                    mul(
                        pow((**base).clone(), (**exp).clone()),
                        add(
                            mul(de, app(Func::Log, (**base).clone())),
                            mul((**exp).clone(), div(db, (**base).clone())),
                        ),
                    )
                }
            }
        }
        Node::App(func, a) => {
            let da = diff_node(a, slot, ctx)?;
            let g = (**a).clone();
            match func {
                Func::Sin => mul(app(Func::Cos, g), da),
                Func::Cos => mul(Node::Neg(Box::new(app(Func::Sin, g))), da),
                Func::Exp => mul(app(Func::Exp, g), da),
                Func::Log => div(da, g),
                Func::LogLog => div(da, mul(g.clone(), app(Func::Log, g))),
                Func::Sqrt => div(da, mul(num(2.0), app(Func::Sqrt, g))),
                Func::Tanh => mul(
                    sub(num(1.0), pow(app(Func::Tanh, g), num(2.0))),
                    da,
                ),
                Func::Abs => {
                    return Err(DiffError::AbsNotDifferentiable {
                        expr: node_to_string(node, &ctx.vars),
                    })
                }
            }
        }
    })
}

fn is_zero(n: &Node) -> bool {
    matches!(n, Node::Num(c) if *c == 0.0)
}

fn is_one(n: &Node) -> bool {
    matches!(n, Node::Num(c) if *c == 1.0)
}

fn func_value(f: Func, x: f64) -> Option<f64> {
    let v = match f {
        Func::Sin => x.sin(),
        Func::Cos => x.cos(),
        Func::Exp => x.exp(),
        Func::Log => {
            if x <= 0.0 {
                return None;
            }
            x.ln()
        }
        Func::LogLog => {
            if x <= 1.0 {
                return None;
            }
            x.ln().ln()
        }
        Func::Sqrt => {
            if x < 0.0 {
                return None;
            }
            x.sqrt()
        }
        Func::Abs => x.abs(),
        Func::Tanh => x.tanh(),
    };
    v.is_finite().then_some(v)
}

/// Conservative simplification: fold constants where the fold is exact and
/// in-domain, drop `+0`, `*1`, `*0`, `/1`, `^1` units. Nothing value-changing.
pub(crate) fn simplify_node(node: Node) -> Node {
    match node {
        Node::Num(_) | Node::Var(_) => node,
        Node::Neg(a) => {
            let a = simplify_node(*a);
            match a {
                Node::Num(c) => num(-c),
                other => Node::Neg(Box::new(other)),
            }
        }
        Node::App(f, a) => {
            let a = simplify_node(*a);
            if let Node::Num(c) = a {
                if let Some(v) = func_value(f, c) {
                    return num(v);
                }
            }
            Node::App(f, Box::new(a))
        }
        Node::Bin(op, l, r) => {
            let l = simplify_node(*l);
            let r = simplify_node(*r);
            if let (Node::Num(a), Node::Num(b)) = (&l, &r) {
                let folded = match op {
                    BinOp::Add => Some(a + b),
                    BinOp::Sub => Some(a - b),
                    BinOp::Mul => Some(a * b),
                    BinOp::Div => (*b != 0.0).then(|| a / b),
                    BinOp::Pow => {
                        let v = a.powf(*b);
                        (!v.is_nan()).then_some(v)
                    }
                };
                if let Some(v) = folded {
                    if v.is_finite() {
                        return num(v);
                    }
                }
            }
            match op {
                BinOp::Add => {
                    if is_zero(&l) {
                        return r;
                    }
                    if is_zero(&r) {
                        return l;
                    }
                }
                BinOp::Sub => {
                    if is_zero(&r) {
                        return l;
                    }
                    if is_zero(&l) {
                        return simplify_node(Node::Neg(Box::new(r)));
                    }
                }
                BinOp::Mul => {
                    if is_zero(&l) || is_zero(&r) {
                        return num(0.0);
                    }
                    if is_one(&l) {
                        return r;
                    }
                    if is_one(&r) {
                        return l;
                    }
                }
                BinOp::Div => {
                    if is_one(&r) {
                        return l;
                    }
                }
                BinOp::Pow => {
                    if is_one(&r) {
                        return l;
                    }
                }
            }
            Node::Bin(op, Box::new(l), Box::new(r))
        }
    }
}
