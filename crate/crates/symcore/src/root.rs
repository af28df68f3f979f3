//! The quadratic extension `K(alpha)` with `alpha^2 = square`.
//!
//! Values are `even + odd * alpha` with both parts canonical rational
//! functions, so no power of `alpha` above one ever survives. For a square
//! that is not a perfect square in `K`, `even + odd * alpha = 0` exactly when
//! both parts vanish.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Result, SymError};
use crate::forward_ops;
use crate::rat::{Derivation, RatExpr};
use crate::scalar::Scalar;
use crate::symbol::Sym;
use crate::Q;

#[derive(Clone)]
pub struct RootExpr {
    even: RatExpr,
    odd: RatExpr,
    /// `None` only for values built without a context (constants); such
    /// values adopt the square of whatever they are combined with.
    square: Option<Arc<RatExpr>>,
}

impl RootExpr {
    /// `alpha` itself.
    pub fn alpha(square: Arc<RatExpr>) -> Self {
        RootExpr {
            even: RatExpr::zero(),
            odd: RatExpr::one(),
            square: Some(square),
        }
    }

    pub fn new(even: RatExpr, odd: RatExpr, square: Arc<RatExpr>) -> Self {
        RootExpr {
            even,
            odd,
            square: Some(square),
        }
    }

    pub fn rational(even: RatExpr) -> Self {
        RootExpr {
            even,
            odd: RatExpr::zero(),
            square: None,
        }
    }

    pub fn even(&self) -> &RatExpr {
        &self.even
    }

    pub fn odd(&self) -> &RatExpr {
        &self.odd
    }

    pub fn square(&self) -> Option<&Arc<RatExpr>> {
        self.square.as_ref()
    }

    pub fn is_rational(&self) -> bool {
        self.odd.is_zero()
    }

    fn join(&self, other: &Self) -> Option<Arc<RatExpr>> {
        match (&self.square, &other.square) {
            (Some(a), Some(b)) => {
                assert!(Arc::ptr_eq(a, b) || a == b, "{}", SymError::ExtensionMismatch);
                Some(a.clone())
            }
            (Some(a), None) | (None, Some(a)) => Some(a.clone()),
            (None, None) => None,
        }
    }

    fn sq(&self) -> RatExpr {
        self.square.as_deref().cloned().unwrap_or_else(RatExpr::zero)
    }

    pub fn add_ref(&self, other: &Self) -> Self {
        RootExpr {
            even: &self.even + &other.even,
            odd: &self.odd + &other.odd,
            square: self.join(other),
        }
    }

    pub fn sub_ref(&self, other: &Self) -> Self {
        RootExpr {
            even: &self.even - &other.even,
            odd: &self.odd - &other.odd,
            square: self.join(other),
        }
    }

    pub fn neg_ref(&self) -> Self {
        RootExpr {
            even: -&self.even,
            odd: -&self.odd,
            square: self.square.clone(),
        }
    }

    pub fn mul_ref(&self, other: &Self) -> Self {
        let square = self.join(other);
        if self.odd.is_zero() && other.odd.is_zero() {
            return RootExpr {
                even: &self.even * &other.even,
                odd: RatExpr::zero(),
                square,
            };
        }
        let q = square.as_deref().cloned().unwrap_or_else(RatExpr::zero);
        let even = &self.even * &other.even + &(&self.odd * &other.odd) * &q;
        let odd = &self.even * &other.odd + &self.odd * &other.even;
        RootExpr { even, odd, square }
    }

    /// `(even - odd*alpha) / (even^2 - odd^2 * square)`.
    pub fn recip(&self) -> Result<Self> {
        if self.odd.is_zero() {
            return Ok(RootExpr {
                even: self.even.recip()?,
                odd: RatExpr::zero(),
                square: self.square.clone(),
            });
        }
        let norm = &self.even * &self.even - &(&self.odd * &self.odd) * &self.sq();
        if norm.is_zero() {
            return Err(SymError::DivisionByZero(format!("norm of ({self}) vanishes")));
        }
        Ok(RootExpr {
            even: self.even.div_ref(&norm)?,
            odd: (-&self.odd).div_ref(&norm)?,
            square: self.square.clone(),
        })
    }

    /// Derivative with `d alpha = (d square / (2 square)) alpha`.
    pub fn derivative(&self, s: Sym, rules: &Derivation) -> Result<Self> {
        let de = self.even.derivative(s, rules)?;
        let mut dodd = self.odd.derivative(s, rules)?;
        if !self.odd.is_zero() {
            let q = self.sq();
            let dq = q.derivative(s, rules)?;
            if !dq.is_zero() {
                dodd = dodd + (&self.odd * &dq).div_ref(&(RatExpr::int(2) * q))?;
            }
        }
        Ok(RootExpr {
            even: de,
            odd: dodd,
            square: self.square.clone(),
        })
    }

    /// Partially evaluates both parts (and the square) at rational values.
    pub fn partial_eval(&self, vals: &HashMap<Sym, Q>) -> Result<Self> {
        let square = match &self.square {
            Some(q) => Some(Arc::new(q.partial_eval(vals)?)),
            None => None,
        };
        Ok(RootExpr {
            even: self.even.partial_eval(vals)?,
            odd: self.odd.partial_eval(vals)?,
            square,
        })
    }

    /// Evaluates with an explicit value for `alpha`.
    pub fn eval<F: Scalar>(&self, env: &dyn Fn(Sym) -> Option<F>, alpha: &F) -> Result<F> {
        let e = self.even.eval(env)?;
        if self.odd.is_zero() {
            return Ok(e);
        }
        Ok(e + self.odd.eval(env)? * alpha.clone())
    }
}

/// Values compare by their parts; the square only matters when both sides
/// carry one and the odd part is nonzero.
impl PartialEq for RootExpr {
    fn eq(&self, other: &Self) -> bool {
        if self.even != other.even || self.odd != other.odd {
            return false;
        }
        match (&self.square, &other.square) {
            (Some(a), Some(b)) if !self.odd.is_zero() => Arc::ptr_eq(a, b) || a == b,
            _ => true,
        }
    }
}

impl Eq for RootExpr {}

forward_ops!(RootExpr);

impl Scalar for RootExpr {
    fn zero() -> Self {
        RootExpr::rational(RatExpr::zero())
    }
    fn one() -> Self {
        RootExpr::rational(RatExpr::one())
    }
    fn from_q(q: &Q) -> Self {
        RootExpr::rational(RatExpr::constant(q.clone()))
    }
    fn is_zero(&self) -> bool {
        self.even.is_zero() && self.odd.is_zero()
    }
    fn inv(&self) -> Result<Self> {
        self.recip()
    }
}

impl fmt::Display for RootExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.even.is_zero(), self.odd.is_zero()) {
            (_, true) => write!(f, "{}", self.even),
            (true, false) => write!(f, "({})*alpha", self.odd),
            (false, false) => write!(f, "{} + ({})*alpha", self.even, self.odd),
        }
    }
}

impl fmt::Debug for RootExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Root({self}; alpha^2 = ")?;
        match &self.square {
            Some(q) => write!(f, "{q})"),
            None => f.write_str("?)"),
        }
    }
}
