//! Raw expression trees and their normalization into canonical values.

use std::fmt;
use std::sync::Arc;

use crate::error::Result;
use crate::rat::{Derivation, RatExpr};
use crate::root::RootExpr;
use crate::scalar::Scalar;
use crate::symbol::{atoms, Sym};
use crate::Q;

/// Unnormalized expression tree as produced by the parser.
#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Num(Q),
    Sym(Sym),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, i32),
}

impl Node {
    pub fn num(k: i64) -> Node {
        Node::Num(Q::from_integer(k.into()))
    }

    /// Evaluates the tree bottom-up in `F`.
    pub fn eval<F: Scalar>(&self, env: &dyn Fn(Sym) -> F) -> Result<F> {
        Ok(match self {
            Node::Num(q) => F::from_q(q),
            Node::Sym(s) => env(*s),
            Node::Neg(a) => -a.eval(env)?,
            Node::Add(a, b) => a.eval(env)? + b.eval(env)?,
            Node::Sub(a, b) => a.eval(env)? - b.eval(env)?,
            Node::Mul(a, b) => a.eval(env)? * b.eval(env)?,
            Node::Div(a, b) => {
                let d = b.eval(env)?;
                if d.is_zero() {
                    return Err(crate::SymError::DivisionByZero(format!("{b}")));
                }
                a.eval(env)?.try_div(&d)?
            }
            Node::Pow(a, e) => {
                let base = a.eval(env)?;
                if *e < 0 && base.is_zero() {
                    return Err(crate::SymError::DivisionByZero(format!("({a})^{e}")));
                }
                base.powi(*e)?
            }
        })
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Num(_) | Node::Sym(_) => 1,
            Node::Neg(a) | Node::Pow(a, _) => 1 + a.depth(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => 1 + a.depth().max(b.depth()),
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Num(q) => write!(f, "{}", crate::poly::fmt_q(q)),
            Node::Sym(s) => write!(f, "{s}"),
            Node::Neg(a) => write!(f, "-({a})"),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Sub(a, b) => write!(f, "({a} - {b})"),
            Node::Mul(a, b) => write!(f, "({a})*({b})"),
            Node::Div(a, b) => write!(f, "({a})/({b})"),
            Node::Pow(a, e) => write!(f, "({a})^{e}"),
        }
    }
}

/// How `alpha` is interpreted during normalization.
#[derive(Clone, Debug)]
pub enum Mode {
    /// `alpha` is an opaque grade-1 atom.
    Abstract,
    /// `alpha^2` is rewritten to the given square.
    Concrete { square: Arc<RatExpr> },
}

/// A canonical value in one of the two modes.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Rat(RatExpr),
    Root(RootExpr),
}

impl Expr {
    pub fn is_zero(&self) -> bool {
        match self {
            Expr::Rat(r) => r.is_zero(),
            Expr::Root(r) => Scalar::is_zero(r),
        }
    }

    pub fn as_rat(&self) -> Option<&RatExpr> {
        match self {
            Expr::Rat(r) => Some(r),
            Expr::Root(r) if r.is_rational() => Some(r.even()),
            Expr::Root(_) => None,
        }
    }

    pub fn differentiate(&self, s: Sym, rules: &Derivation) -> Result<Expr> {
        Ok(match self {
            Expr::Rat(r) => Expr::Rat(r.derivative(s, rules)?),
            Expr::Root(r) => Expr::Root(r.derivative(s, rules)?),
        })
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Rat(r) => write!(f, "{r}"),
            Expr::Root(r) => write!(f, "{r}"),
        }
    }
}

/// Canonical form of `node` in the given mode.
pub fn normalize(node: &Node, mode: &Mode) -> Result<Expr> {
    match mode {
        Mode::Abstract => Ok(Expr::Rat(node.eval(&|s| RatExpr::var(s))?)),
        Mode::Concrete { square } => {
            let alpha = atoms::alpha();
            let v = node.eval(&|s| {
                if s == alpha {
                    RootExpr::alpha(square.clone())
                } else {
                    RootExpr::rational(RatExpr::var(s))
                }
            })?;
            Ok(Expr::Root(v))
        }
    }
}

/// Tree form of a canonical rational function (one node per term).
pub fn rat_to_node(r: &RatExpr) -> Node {
    fn poly_node(p: &crate::Poly) -> Node {
        let mut acc: Option<Node> = None;
        for (m, c) in p.terms() {
            let mut t = Node::Num(c.clone());
            for &(s, e) in m.exps() {
                let f = if e == 1 { Node::Sym(s) } else { Node::Pow(Box::new(Node::Sym(s)), e) };
                t = Node::Mul(Box::new(t), Box::new(f));
            }
            acc = Some(match acc {
                None => t,
                Some(a) => Node::Add(Box::new(a), Box::new(t)),
            });
        }
        acc.unwrap_or_else(|| Node::num(0))
    }
    let n = poly_node(r.num());
    if r.den().is_one() {
        n
    } else {
        Node::Div(Box::new(n), Box::new(poly_node(r.den())))
    }
}

/// Tree form of any canonical value.
pub fn to_node(e: &Expr) -> Node {
    match e {
        Expr::Rat(r) => rat_to_node(r),
        Expr::Root(r) => {
            let even = rat_to_node(r.even());
            if r.odd().is_zero() {
                return even;
            }
            let odd = Node::Mul(Box::new(rat_to_node(r.odd())), Box::new(Node::Sym(atoms::alpha())));
            Node::Add(Box::new(even), Box::new(odd))
        }
    }
}
