use thiserror::Error;

use super::ast::{BinOp, ExprAst, Func, Node, VarSet};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("unexpected character '{ch}' at position {pos}")]
    UnexpectedChar { ch: char, pos: usize },
    #[error("invalid number literal at position {pos}")]
    InvalidNumber { pos: usize },
    #[error("unexpected token '{token}' at position {pos}")]
    UnexpectedToken { token: String, pos: usize },
    #[error("unexpected end of expression at position {pos}")]
    UnexpectedEnd { pos: usize },
    #[error("unknown variable '{name}' at position {pos}")]
    UnknownVariable { name: String, pos: usize },
    #[error("unknown function '{name}' at position {pos}")]
    UnknownFunction { name: String, pos: usize },
    #[error("function '{name}' takes 1 argument, got {got} (position {pos})")]
    WrongArity { name: String, got: usize, pos: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                toks.push((Tok::Plus, i));
                i += 1;
            }
            '-' => {
                toks.push((Tok::Minus, i));
                i += 1;
            }
            '*' => {
                toks.push((Tok::Star, i));
                i += 1;
            }
            '/' => {
                toks.push((Tok::Slash, i));
                i += 1;
            }
            '^' => {
                toks.push((Tok::Caret, i));
                i += 1;
            }
            '(' => {
                toks.push((Tok::LParen, i));
                i += 1;
            }
            ')' => {
                toks.push((Tok::RParen, i));
                i += 1;
            }
            ',' => {
                toks.push((Tok::Comma, i));
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                // exponent part only if followed by digits (so `2*exp(x)` is
                // not eaten as a malformed exponent)
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                if text == "." {
                    return Err(ParseError::InvalidNumber { pos: start });
                }
                let v: f64 = text
                    .parse()
                    .map_err(|_| ParseError::InvalidNumber { pos: start })?;
                if !v.is_finite() {
                    return Err(ParseError::InvalidNumber { pos: start });
                }
                toks.push((Tok::Num(v), start));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                toks.push((Tok::Ident(src[start..i].to_string()), start));
            }
            _ => return Err(ParseError::UnexpectedChar { ch: c, pos: i }),
        }
    }
    Ok(toks)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    vars: &'a VarSet,
    src_len: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&(Tok, usize)> {
        self.toks.get(self.pos)
    }

    fn bump(&mut self) -> Option<(Tok, usize)> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn end_pos(&self) -> usize {
        self.src_len
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        match self.bump() {
            Some((t, _)) if t == want => Ok(()),
            Some((t, p)) => Err(ParseError::UnexpectedToken {
                token: format!("{t:?}").to_lowercase() + &format!(", expected {what}"),
                pos: p,
            }),
            None => Err(ParseError::UnexpectedEnd {
                pos: self.end_pos(),
            }),
        }
    }

    fn parse_expr(&mut self) -> Result<Node, ParseError> {
        let mut node = self.parse_term()?;
        while let Some((tok, _)) = self.peek() {
            let op = match tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.parse_term()?;
            node = Node::Bin(op, Box::new(node), Box::new(rhs));
        }
        Ok(node)
    }

    fn parse_term(&mut self) -> Result<Node, ParseError> {
        let mut node = self.parse_factor()?;
        while let Some((tok, _)) = self.peek() {
            let op = match tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => break,
            };
            self.bump();
            let rhs = self.parse_factor()?;
            node = Node::Bin(op, Box::new(node), Box::new(rhs));
        }
        Ok(node)
    }

    fn parse_factor(&mut self) -> Result<Node, ParseError> {
        if matches!(self.peek(), Some((Tok::Minus, _))) {
            self.bump();
            let (node, bare_literal) = self.parse_power()?;
            // '-' directly on a number literal is a negative literal, not a
            // negation node; keeps print/parse round-trips structural.
            if bare_literal {
                if let Node::Num(c) = node {
                    return Ok(Node::Num(-c));
                }
            }
            Ok(Node::Neg(Box::new(node)))
        } else {
            Ok(self.parse_power()?.0)
        }
    }

    /// Returns the node plus whether it is a bare (unparenthesized,
    /// unexponentiated) number literal.
    fn parse_power(&mut self) -> Result<(Node, bool), ParseError> {
        let (atom, bare_literal) = self.parse_atom()?;
        if matches!(self.peek(), Some((Tok::Caret, _))) {
            self.bump();
            let exp = self.parse_factor()?;
            return Ok((Node::Bin(BinOp::Pow, Box::new(atom), Box::new(exp)), false));
        }
        Ok((atom, bare_literal))
    }

    fn parse_atom(&mut self) -> Result<(Node, bool), ParseError> {
        match self.bump() {
            Some((Tok::Num(v), _)) => Ok((Node::Num(v), true)),
            Some((Tok::Ident(name), pos)) => {
                if matches!(self.peek(), Some((Tok::LParen, _))) {
                    self.bump();
                    let mut args = vec![self.parse_expr()?];
                    while matches!(self.peek(), Some((Tok::Comma, _))) {
                        self.bump();
                        args.push(self.parse_expr()?);
                    }
                    self.expect(Tok::RParen, "')'")?;
                    let func = Func::from_name(&name)
                        .ok_or_else(|| ParseError::UnknownFunction {
                            name: name.clone(),
                            pos,
                        })?;
                    if args.len() != 1 {
                        return Err(ParseError::WrongArity {
                            name,
                            got: args.len(),
                            pos,
                        });
                    }
                    Ok((Node::App(func, Box::new(args.pop().unwrap())), false))
                } else {
                    let slot =
                        self.vars
                            .index_of(&name)
                            .ok_or_else(|| ParseError::UnknownVariable {
                                name: name.clone(),
                                pos,
                            })?;
                    Ok((Node::Var(slot), false))
                }
            }
            Some((Tok::LParen, _)) => {
                let node = self.parse_expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok((node, false))
            }
            Some((t, p)) => Err(ParseError::UnexpectedToken {
                token: format!("{t:?}").to_lowercase(),
                pos: p,
            }),
            None => Err(ParseError::UnexpectedEnd {
                pos: self.end_pos(),
            }),
        }
    }
}

/// Parse `source` against a declared variable set.
pub fn parse(source: &str, vars: &VarSet) -> Result<ExprAst, ParseError> {
    let toks = lex(source)?;
    let mut p = Parser {
        toks,
        pos: 0,
        vars,
        src_len: source.len(),
    };
    if p.peek().is_none() {
        return Err(ParseError::UnexpectedEnd { pos: 0 });
    }
    let root = p.parse_expr()?;
    if let Some((t, pos)) = p.peek() {
        return Err(ParseError::UnexpectedToken {
            token: format!("{t:?}").to_lowercase(),
            pos: *pos,
        });
    }
    Ok(ExprAst::from_parts(vars.clone(), root))
}
