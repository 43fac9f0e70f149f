use std::fmt;
use std::sync::Arc;

/// Ordered set of variable names an expression may reference.
///
/// Expressions are always parsed against a declared set; the slot order here
/// is the order of the value slice passed to [`ExprAst::eval_values`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarSet {
    names: Arc<[String]>,
}

impl VarSet {
    pub fn new<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        VarSet {
            names: names.into_iter().map(Into::into).collect(),
        }
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn name(&self, slot: usize) -> &str {
        &self.names[slot]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// `(x, t)` — speed expressions.
    pub fn for_lambda() -> Self {
        Self::new(["x", "t"])
    }

    /// `(x)` — initial data.
    pub fn for_phi() -> Self {
        Self::new(["x"])
    }

    /// `(x, t, u1, .., un)` — right-hand sides.
    pub fn for_f(n: usize) -> Self {
        let mut names = vec!["x".to_string(), "t".to_string()];
        names.extend((1..=n).map(|j| format!("u{j}")));
        Self::new(names)
    }

    /// `(t, v1, .., vn)` — boundary operators.
    pub fn for_h(n: usize) -> Self {
        let mut names = vec!["t".to_string()];
        names.extend((1..=n).map(|j| format!("v{j}")));
        Self::new(names)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    LogLog,
    Sqrt,
    Abs,
    Tanh,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::LogLog => "loglog",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Tanh => "tanh",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "loglog" => Func::LogLog,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "tanh" => Func::Tanh,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug)]
pub enum Node {
    Num(f64),
    Var(usize),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    App(Func, Box<Node>),
}

// Structural equality; numbers compare by bit pattern so -0.0 != 0.0 and
// print/parse round-trips can be checked exactly.
impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Node::Num(a), Node::Num(b)) => a.to_bits() == b.to_bits(),
            (Node::Var(a), Node::Var(b)) => a == b,
            (Node::Neg(a), Node::Neg(b)) => a == b,
            (Node::Bin(op, al, ar), Node::Bin(oq, bl, br)) => op == oq && al == bl && ar == br,
            (Node::App(f, a), Node::App(g, b)) => f == g && a == b,
            _ => false,
        }
    }
}

/// A parsed expression over a declared variable set.
#[derive(Clone, Debug, PartialEq)]
pub struct ExprAst {
    pub(crate) vars: VarSet,
    pub(crate) root: Node,
}

impl ExprAst {
    pub fn vars(&self) -> &VarSet {
        &self.vars
    }

    pub(crate) fn from_parts(vars: VarSet, root: Node) -> Self {
        ExprAst { vars, root }
    }

    /// Constant expression over the given variable set.
    pub fn constant(value: f64, vars: VarSet) -> Self {
        ExprAst {
            vars,
            root: Node::Num(value),
        }
    }

    /// Structural sum `self + other` (same variable set required).
    pub fn add(&self, other: &ExprAst) -> ExprAst {
        assert_eq!(self.vars, other.vars, "variable sets differ");
        ExprAst {
            vars: self.vars.clone(),
            root: Node::Bin(
                BinOp::Add,
                Box::new(self.root.clone()),
                Box::new(other.root.clone()),
            ),
        }
    }

    pub fn mul(&self, other: &ExprAst) -> ExprAst {
        assert_eq!(self.vars, other.vars, "variable sets differ");
        ExprAst {
            vars: self.vars.clone(),
            root: Node::Bin(
                BinOp::Mul,
                Box::new(self.root.clone()),
                Box::new(other.root.clone()),
            ),
        }
    }

    /// Re-home the expression onto `new_vars`, mapping each old slot through
    /// `slot_map` (old slot -> new slot).
    pub(crate) fn rename_vars(&self, new_vars: VarSet, slot_map: &[usize]) -> ExprAst {
        fn walk(node: &Node, map: &[usize]) -> Node {
            match node {
                Node::Num(c) => Node::Num(*c),
                Node::Var(s) => Node::Var(map[*s]),
                Node::Neg(a) => Node::Neg(Box::new(walk(a, map))),
                Node::Bin(op, l, r) => {
                    Node::Bin(*op, Box::new(walk(l, map)), Box::new(walk(r, map)))
                }
                Node::App(f, a) => Node::App(*f, Box::new(walk(a, map))),
            }
        }
        ExprAst {
            vars: new_vars,
            root: walk(&self.root, slot_map),
        }
    }

    /// Replace every occurrence of a variable with a constant.
    pub(crate) fn substitute(&self, var: &str, value: f64) -> ExprAst {
        let slot = self
            .vars
            .index_of(var)
            .unwrap_or_else(|| panic!("unknown variable {var}"));
        fn walk(node: &Node, slot: usize, value: f64) -> Node {
            match node {
                Node::Num(c) => Node::Num(*c),
                Node::Var(s) if *s == slot => Node::Num(value),
                Node::Var(s) => Node::Var(*s),
                Node::Neg(a) => Node::Neg(Box::new(walk(a, slot, value))),
                Node::Bin(op, l, r) => Node::Bin(
                    *op,
                    Box::new(walk(l, slot, value)),
                    Box::new(walk(r, slot, value)),
                ),
                Node::App(f, a) => Node::App(*f, Box::new(walk(a, slot, value))),
            }
        }
        ExprAst {
            vars: self.vars.clone(),
            root: walk(&self.root, slot, value),
        }
    }
}

// Printing uses the minimal parenthesization that re-parses to the same tree.
//
// Effective precedence: +,- (1) < *,/ (2) < unary - (3) < ^ (4) < atoms (5).
// A negative literal starts with '-', so in any context that would not
// re-absorb the sign it behaves like a unary minus (precedence 3).
fn prec(node: &Node) -> u8 {
    match node {
        Node::Num(c) if c.is_sign_negative() => 3,
        Node::Num(_) | Node::Var(_) | Node::App(..) => 5,
        Node::Neg(_) => 3,
        Node::Bin(BinOp::Pow, ..) => 4,
        Node::Bin(BinOp::Mul, ..) | Node::Bin(BinOp::Div, ..) => 2,
        Node::Bin(BinOp::Add, ..) | Node::Bin(BinOp::Sub, ..) => 1,
    }
}

fn write_node(out: &mut String, node: &Node, vars: &VarSet, min_prec: u8) {
    // A '-' followed directly by a number literal parses as a negative
    // literal, so `Neg(Num(c))` must keep explicit parentheses around c.
    let force_parens = matches!(node, Node::Neg(inner) if matches!(**inner, Node::Num(_)));
    let parens = prec(node) < min_prec;
    if parens {
        out.push('(');
    }
    match node {
        Node::Num(c) => {
            debug_assert!(c.is_finite(), "non-finite literal cannot be printed");
            out.push_str(&format!("{c}"));
        }
        Node::Var(s) => out.push_str(vars.name(*s)),
        Node::Neg(a) => {
            out.push('-');
            if force_parens {
                out.push('(');
                write_node(out, a, vars, 1);
                out.push(')');
            } else {
                write_node(out, a, vars, 4);
            }
        }
        Node::App(f, a) => {
            out.push_str(f.name());
            out.push('(');
            write_node(out, a, vars, 1);
            out.push(')');
        }
        Node::Bin(op, l, r) => {
            let (sym, lp, rp) = match op {
                BinOp::Add => ("+", 1, 2),
                BinOp::Sub => ("-", 1, 2),
                BinOp::Mul => ("*", 2, 3),
                BinOp::Div => ("/", 2, 3),
                BinOp::Pow => ("^", 5, 3),
            };
            write_node(out, l, vars, lp);
            out.push_str(sym);
            write_node(out, r, vars, rp);
        }
    }
    if parens {
        out.push(')');
    }
}

impl fmt::Display for ExprAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_node(&mut s, &self.root, &self.vars, 0);
        f.write_str(&s)
    }
}

pub(crate) fn node_to_string(node: &Node, vars: &VarSet) -> String {
    let mut s = String::new();
    write_node(&mut s, node, vars, 0);
    s
}
