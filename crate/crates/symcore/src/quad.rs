//! Exact numbers in `Q(sqrt d)`, used for point evaluation.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{Result, SymError};
use crate::forward_ops;
use crate::poly::fmt_q;
use crate::Q;

/// `a + b * sqrt(d)`; `d` is present only when it is not a rational square.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuadNum {
    a: Q,
    b: Q,
    d: Option<Q>,
}

/// Exact rational square root, if one exists.
pub fn rational_sqrt(q: &Q) -> Option<Q> {
    if q.is_negative() {
        return None;
    }
    let n = int_sqrt(q.numer())?;
    let d = int_sqrt(q.denom())?;
    Some(Q::new(n, d))
}

fn int_sqrt(n: &BigInt) -> Option<BigInt> {
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

impl QuadNum {
    pub fn rational(a: Q) -> Self {
        QuadNum {
            a,
            b: Q::zero(),
            d: None,
        }
    }

    /// `sqrt(d)`, collapsing to a rational when `d` is a perfect square.
    pub fn sqrt(d: &Q) -> Self {
        match rational_sqrt(d) {
            Some(r) => Self::rational(r),
            None => QuadNum {
                a: Q::zero(),
                b: Q::from_integer(1.into()),
                d: Some(d.clone()),
            },
        }
    }

    pub fn parts(&self) -> (&Q, &Q, Option<&Q>) {
        (&self.a, &self.b, self.d.as_ref())
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn as_rational(&self) -> Option<&Q> {
        self.b.is_zero().then_some(&self.a)
    }

    fn join(&self, o: &Self) -> Option<Q> {
        match (&self.d, &o.d) {
            (Some(x), Some(y)) => {
                assert_eq!(x, y, "{}", SymError::ExtensionMismatch);
                Some(x.clone())
            }
            (Some(x), None) | (None, Some(x)) => Some(x.clone()),
            (None, None) => None,
        }
    }

    fn tidy(a: Q, b: Q, d: Option<Q>) -> Self {
        if b.is_zero() {
            QuadNum { a, b, d: None }
        } else {
            QuadNum { a, b, d }
        }
    }

    pub fn add_ref(&self, o: &Self) -> Self {
        Self::tidy(&self.a + &o.a, &self.b + &o.b, self.join(o))
    }

    pub fn sub_ref(&self, o: &Self) -> Self {
        Self::tidy(&self.a - &o.a, &self.b - &o.b, self.join(o))
    }

    pub fn neg_ref(&self) -> Self {
        QuadNum {
            a: -&self.a,
            b: -&self.b,
            d: self.d.clone(),
        }
    }

    pub fn mul_ref(&self, o: &Self) -> Self {
        let d = self.join(o);
        let dd = d.clone().unwrap_or_else(Q::zero);
        let a = &self.a * &o.a + &self.b * &o.b * &dd;
        let b = &self.a * &o.b + &self.b * &o.a;
        Self::tidy(a, b, d)
    }

    pub fn recip(&self) -> Result<Self> {
        if self.b.is_zero() {
            if self.a.is_zero() {
                return Err(SymError::DivisionByZero("0".into()));
            }
            return Ok(Self::rational(self.a.recip()));
        }
        let dd = self.d.clone().unwrap_or_else(Q::zero);
        let norm = &self.a * &self.a - &self.b * &self.b * &dd;
        if norm.is_zero() {
            return Err(SymError::DivisionByZero(format!("norm of {self} vanishes")));
        }
        Ok(Self::tidy(&self.a / &norm, -&self.b / &norm, self.d.clone()))
    }

    /// Floating approximation (principal square root).
    pub fn to_f64(&self) -> f64 {
        use num_traits::ToPrimitive;
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        let d = self.d.as_ref().and_then(|d| d.to_f64()).unwrap_or(0.0);
        a + b * d.sqrt()
    }
}

forward_ops!(QuadNum);

impl crate::scalar::Scalar for QuadNum {
    fn zero() -> Self {
        Self::rational(Zero::zero())
    }
    fn one() -> Self {
        Self::rational(Q::from_integer(1.into()))
    }
    fn from_q(q: &Q) -> Self {
        Self::rational(q.clone())
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(&self.a) && Zero::is_zero(&self.b)
    }
    fn inv(&self) -> Result<Self> {
        self.recip()
    }
}

impl fmt::Display for QuadNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.d {
            None => f.write_str(&fmt_q(&self.a)),
            Some(d) => write!(f, "{} + {}*sqrt({})", fmt_q(&self.a), fmt_q(&self.b), fmt_q(d)),
        }
    }
}

impl fmt::Debug for QuadNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
