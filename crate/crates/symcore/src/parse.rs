//! Expression micro-grammar.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' exp)?
//! exp     := ['-'] INT | '(' ['-'] INT ')'
//! primary := INT | IDENT | '(' expr ')'
//! ```
//!
//! `^` binds tighter than unary minus, so `-x^2` is `-(x^2)`. Whitespace is
//! insignificant. Identifiers are `[A-Za-z_][A-Za-z0-9_]*`.

use num_bigint::BigInt;

use crate::error::{Result, SymError};
use crate::expr::{normalize, Expr, Mode, Node};
use crate::rat::RatExpr;
use crate::symbol::{atoms, Sym, SymbolTable};
use crate::Q;

const MAX_DEPTH: usize = 256;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Op(u8),
    End,
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    table: &'a SymbolTable,
    depth: usize,
}

fn syntax(offset: usize, message: impl Into<String>) -> SymError {
    SymError::Syntax {
        offset,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let v: BigInt = text[start..i].parse().expect("digits");
            out.push((Tok::Int(v), start));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_string()), start));
        } else if b"+-*/^()".contains(&c) {
            out.push((Tok::Op(c), i));
            i += 1;
        } else {
            let ch = text[i..].chars().next().unwrap_or('?');
            return Err(syntax(i, format!("unexpected character `{ch}`")));
        }
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, op: u8) -> bool {
        if *self.peek() == Tok::Op(op) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn enter(&mut self) -> Result<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(syntax(self.offset(), "expression nested too deeply"));
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Node> {
        self.enter()?;
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = Node::Add(Box::new(acc), Box::new(self.term()?));
            } else if self.eat(b'-') {
                acc = Node::Sub(Box::new(acc), Box::new(self.term()?));
            } else {
                break;
            }
        }
        self.depth -= 1;
        Ok(acc)
    }

    fn term(&mut self) -> Result<Node> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                acc = Node::Mul(Box::new(acc), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                acc = Node::Div(Box::new(acc), Box::new(self.unary()?));
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Node> {
        self.enter()?;
        let n = if self.eat(b'-') {
            Node::Neg(Box::new(self.unary()?))
        } else if self.eat(b'+') {
            self.unary()?
        } else {
            self.power()?
        };
        self.depth -= 1;
        Ok(n)
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.primary()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        let paren = self.eat(b'(');
        let neg = self.eat(b'-');
        let (tok, off) = self.bump();
        let Tok::Int(v) = tok else {
            return Err(syntax(off, "expected an integer exponent"));
        };
        let e: i32 = i32::try_from(&v)
            .ok()
            .filter(|e| *e <= 4096)
            .ok_or_else(|| syntax(off, "exponent out of range"))?;
        if paren && !self.eat(b')') {
            return Err(syntax(self.offset(), "expected `)` after exponent"));
        }
        Ok(Node::Pow(Box::new(base), if neg { -e } else { e }))
    }

    fn primary(&mut self) -> Result<Node> {
        let (tok, off) = self.bump();
        match tok {
            Tok::Int(v) => Ok(Node::Num(Q::from_integer(v))),
            Tok::Ident(name) => self.ident(&name, off),
            Tok::Op(b'(') => {
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(syntax(self.offset(), "expected `)`"));
                }
                Ok(inner)
            }
            Tok::Op(c) => Err(syntax(off, format!("unexpected `{}`", c as char))),
            Tok::End => Err(syntax(off, "unexpected end of input")),
        }
    }

    fn ident(&self, name: &str, off: usize) -> Result<Node> {
        if let Some(s) = self.table.get(name) {
            return Ok(Node::Sym(s));
        }
        if name == "gamma2" && self.table.has_gamma2_macro() {
            return Ok(gamma2_node());
        }
        Err(SymError::UnknownIdentifier {
            name: name.to_string(),
            offset: off,
        })
    }
}

/// `b2*alpha^2 - beta^2`.
pub fn gamma2_node() -> Node {
    let b2a2 = Node::Mul(
        Box::new(Node::Sym(atoms::b2())),
        Box::new(Node::Pow(Box::new(Node::Sym(atoms::alpha())), 2)),
    );
    Node::Sub(Box::new(b2a2), Box::new(Node::Pow(Box::new(Node::Sym(atoms::beta())), 2)))
}

/// Parses `text` into an unnormalized tree.
pub fn parse_node_with(text: &str, table: &SymbolTable) -> Result<Node> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        table,
        depth: 0,
    };
    let node = p.expr()?;
    match p.peek() {
        Tok::End => Ok(node),
        _ => Err(syntax(p.offset(), "unexpected trailing input")),
    }
}

/// Parses and normalizes in the given mode.
pub fn parse_in(text: &str, table: &SymbolTable, mode: &Mode) -> Result<Expr> {
    normalize(&parse_node_with(text, table)?, mode)
}

/// Parses and normalizes with `alpha` as an opaque atom.
pub fn parse_expr(text: &str, table: &SymbolTable) -> Result<RatExpr> {
    match parse_in(text, table, &Mode::Abstract)? {
        Expr::Rat(r) => Ok(r),
        Expr::Root(_) => unreachable!("abstract mode yields rational values"),
    }
}

/// Table of every registered symbol whose name occurs in `text`.
pub fn permissive_table(text: &str) -> SymbolTable {
    let mut t = SymbolTable::empty().with_gamma2_macro(true);
    if let Ok(toks) = lex(text) {
        for (tok, _) in toks {
            if let Tok::Ident(name) = tok {
                if let Some(s) = Sym::lookup(&name) {
                    t.add(s);
                }
            }
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Poly;

    fn full() -> SymbolTable {
        SymbolTable::full(3)
    }

    #[test]
    fn polynomial_literal() {
        let e = parse_expr("x1^2 + 1", &full()).unwrap();
        let x1 = Poly::var(Sym::x(1));
        assert_eq!(e, RatExpr::from_poly(x1.mul(&x1).add(&Poly::one())));
    }

    #[test]
    fn rational_function_keeps_alpha_denominator() {
        let e = parse_expr("(alpha+beta)^2/alpha", &full()).unwrap();
        assert_eq!(e.den(), &Poly::var(atoms::alpha()));
    }

    #[test]
    fn division_by_zero() {
        assert!(matches!(parse_expr("1/0", &full()), Err(SymError::DivisionByZero(_))));
        assert!(matches!(parse_expr("(x1-x1)^-1", &full()), Err(SymError::DivisionByZero(_))));
    }

    #[test]
    fn located_errors() {
        assert_eq!(
            parse_expr("x1 + foo", &full()),
            Err(SymError::UnknownIdentifier {
                name: "foo".into(),
                offset: 5
            })
        );
        assert!(matches!(parse_expr("x1 +", &full()), Err(SymError::Syntax { offset: 4, .. })));
        assert!(matches!(parse_expr("x1 $ 2", &full()), Err(SymError::Syntax { offset: 3, .. })));
        assert!(matches!(parse_expr("(x1", &full()), Err(SymError::Syntax { offset: 3, .. })));
    }

    #[test]
    fn precedence() {
        let t = full();
        assert_eq!(parse_expr("-x1^2", &t).unwrap(), -parse_expr("x1*x1", &t).unwrap());
        assert_eq!(parse_expr("2^-1", &t).unwrap(), RatExpr::frac(1, 2));
        assert_eq!(parse_expr("x1^(-2)*x1^2", &t).unwrap(), RatExpr::one());
        assert_eq!(parse_expr("-5/7", &t).unwrap(), RatExpr::frac(-5, 7));
        assert_eq!(parse_expr("2*3^2", &t).unwrap(), RatExpr::int(18));
    }

    #[test]
    fn gamma2_macro() {
        let t = SymbolTable::abstract_atoms();
        assert_eq!(
            parse_expr("gamma2", &t).unwrap(),
            parse_expr("b2*alpha^2 - beta^2", &t).unwrap()
        );
        let plain = SymbolTable::coordinates(2);
        assert!(parse_expr("gamma2", &plain).is_err());
    }

    #[test]
    fn table_restricts_identifiers() {
        assert!(parse_expr("alpha", &SymbolTable::coordinates(2)).is_err());
        assert!(parse_expr("x3", &SymbolTable::coordinates(2)).is_err());
        assert!(parse_expr("alpha*x3", &permissive_table("alpha*x3")).is_ok());
    }
}
