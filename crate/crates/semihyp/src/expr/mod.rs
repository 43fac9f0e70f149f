//! Arithmetic expression language used for problem data.
//!
//! Grammar (infix, `^` right-associative, unary minus at factor level):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-'? power
//! power  := atom ('^' factor)?
//! atom   := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Built-in functions: `sin cos exp log loglog sqrt abs tanh` (`log` is the
//! natural logarithm, `loglog(y) = log(log(y))` for `y > 1`). Number literals
//! are decimal with an optional exponent part. Variables must belong to the
//! declared [`VarSet`] the expression is parsed against.
//!
//! Guarantees: evaluation is deterministic (same tree, same bindings, same
//! bits), printing re-parses to a structurally identical tree, and
//! [`ExprAst::differentiate`] is exact symbolic differentiation (with `abs`
//! rejected).

mod ast;
mod deriv;
mod eval;
mod parse;

pub use ast::{BinOp, ExprAst, Func, Node, VarSet};
pub use deriv::DiffError;
pub use eval::{Bindings, EvalError};
pub use parse::{parse, ParseError};
