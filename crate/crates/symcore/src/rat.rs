//! Canonical rational functions `num / den`.
//!
//! Invariants: `den != 0`, `gcd(num, den) = 1`, `den` is monic in the
//! monomial order and carries no unit-atom factor. Together these make
//! structural equality coincide with equality of rational functions.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Result, SymError};
use crate::forward_ops;
use crate::gcd::gcd;
use crate::poly::{Monomial, Poly};
use crate::scalar::Scalar;
use crate::symbol::{Sym, SymKind};
use crate::Q;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatExpr {
    num: Poly,
    den: Poly,
}

/// Derivation rules `d E_u / d x_j = E_u * g_j` for unit atoms.
#[derive(Clone, Debug, Default)]
pub struct Derivation {
    rules: Vec<(Sym, HashMap<Sym, RatExpr>)>,
}

impl Derivation {
    pub fn new() -> Self {
        Self::default()
    }

    /// Installs `d unit / d x_j = unit * log_grad[x_j]`.
    pub fn with_unit(mut self, unit: Sym, log_grad: HashMap<Sym, RatExpr>) -> Self {
        self.rules.retain(|(u, _)| *u != unit);
        self.rules.push((unit, log_grad));
        self
    }

    fn rule(&self, unit: Sym) -> Option<&HashMap<Sym, RatExpr>> {
        self.rules.iter().find(|(u, _)| *u == unit).map(|(_, g)| g)
    }
}

impl RatExpr {
    pub fn zero() -> Self {
        RatExpr {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }

    pub fn one() -> Self {
        Self::from_poly(Poly::one())
    }

    pub fn from_poly(p: Poly) -> Self {
        RatExpr { num: p, den: Poly::one() }
    }

    pub fn constant(q: Q) -> Self {
        Self::from_poly(Poly::constant(q))
    }

    pub fn int(k: i64) -> Self {
        Self::from_poly(Poly::from_int(k))
    }

    pub fn frac(n: i64, d: i64) -> Self {
        Self::constant(Q::new(n.into(), d.into()))
    }

    pub fn var(s: Sym) -> Self {
        Self::from_poly(Poly::var(s))
    }

    /// `unit^e` for a unit atom (any sign of `e`) or `s^e` with `e >= 0`.
    pub fn var_pow(s: Sym, e: i32) -> Result<Self> {
        if e < 0 && s.kind() != SymKind::Unit {
            return Self::var(s).powi(e);
        }
        Ok(Self::from_poly(Poly::term(Monomial::var(s, e), <Q as One>::one())))
    }

    /// Normalizes `num / den`.
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(SymError::DivisionByZero(format!("({num})/(0)")));
        }
        Ok(Self::reduce(num, den, true))
    }

    fn reduce(num: Poly, den: Poly, with_gcd: bool) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        if let Some(c) = den.as_constant() {
            return RatExpr {
                num: num.scale(&c.recip()),
                den: Poly::one(),
            };
        }
        let (num, den) = if with_gcd {
            let g = gcd(&num, &den);
            if g.is_one() {
                (num, den)
            } else {
                (num.div_exact(&g).expect("gcd divides num"), den.div_exact(&g).expect("gcd divides den"))
            }
        } else {
            (num, den)
        };
        Self::normalize_den(num, den)
    }

    fn normalize_den(num: Poly, den: Poly) -> Self {
        let m = den.monomial_content();
        let units = m.div_unchecked(&m.without_units());
        let (num, den) = if units.is_one() {
            (num, den)
        } else {
            (num.div_monomial_unchecked(&units), den.div_monomial_unchecked(&units))
        };
        if let Some(c) = den.as_constant() {
            return RatExpr {
                num: num.scale(&c.recip()),
                den: Poly::one(),
            };
        }
        let (lc, den) = den.monic();
        let num = if lc.is_one() { num } else { num.scale(&lc.recip()) };
        RatExpr { num, den }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn into_parts(self) -> (Poly, Poly) {
        (self.num, self.den)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num.is_one()
    }

    pub fn is_poly(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_constant(&self) -> Option<Q> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn contains(&self, s: Sym) -> bool {
        self.num.contains(s) || self.den.contains(s)
    }

    pub fn vars(&self) -> std::collections::BTreeSet<Sym> {
        let mut v = self.num.vars();
        v.extend(self.den.vars());
        v
    }

    pub fn add_ref(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.den.is_one() && other.den.is_one() {
            return Self::from_poly(self.num.add(&other.num));
        }
        if self.den == other.den {
            return Self::reduce(self.num.add(&other.num), self.den.clone(), true);
        }
        if self.den.is_one() {
            return Self::normalize_den(self.num.mul(&other.den).add(&other.num), other.den.clone());
        }
        if other.den.is_one() {
            return Self::normalize_den(self.num.add(&other.num.mul(&self.den)), self.den.clone());
        }
        let g = gcd(&self.den, &other.den);
        if g.is_one() {
            let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
            return Self::normalize_den(num, self.den.mul(&other.den));
        }
        let b1 = self.den.div_exact(&g).expect("gcd divides");
        let d1 = other.den.div_exact(&g).expect("gcd divides");
        let num = self.num.mul(&d1).add(&other.num.mul(&b1));
        if num.is_zero() {
            return Self::zero();
        }
        let g2 = gcd(&num, &g);
        let (num, g) = if g2.is_one() {
            (num, g)
        } else {
            (num.div_exact(&g2).expect("gcd divides"), g.div_exact(&g2).expect("gcd divides"))
        };
        Self::normalize_den(num, b1.mul(&d1).mul(&g))
    }

    pub fn neg_ref(&self) -> Self {
        RatExpr {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub_ref(&self, other: &Self) -> Self {
        self.add_ref(&other.neg_ref())
    }

    pub fn mul_ref(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        if self.den.is_one() && other.den.is_one() {
            return Self::from_poly(self.num.mul(&other.num));
        }
        let (a, b) = cancel(&self.num, &other.den);
        let (c, d) = cancel(&other.num, &self.den);
        Self::normalize_den(a.mul(&c), b.mul(&d))
    }

    pub fn scale_q(&self, q: &Q) -> Self {
        if Zero::is_zero(q) {
            return Self::zero();
        }
        RatExpr {
            num: self.num.scale(q),
            den: self.den.clone(),
        }
    }

    pub fn recip(&self) -> Result<Self> {
        if self.num.is_zero() {
            return Err(SymError::DivisionByZero(format!("1/({self})")));
        }
        Ok(Self::normalize_den(self.den.clone(), self.num.clone()))
    }

    pub fn div_ref(&self, other: &Self) -> Result<Self> {
        if other.is_zero() {
            return Err(SymError::DivisionByZero(format!("({self})/({other})")));
        }
        Ok(self.mul_ref(&other.recip()?))
    }

    pub fn pow_i(&self, e: i32) -> Result<Self> {
        if e < 0 {
            return self.recip()?.pow_i(-e);
        }
        let e = e as u32;
        Ok(RatExpr {
            num: self.num.pow(e),
            den: self.den.pow(e),
        })
    }

    /// Formal partial derivative with respect to `s`.
    pub fn derivative(&self, s: Sym, rules: &Derivation) -> Result<Self> {
        if s.kind() == SymKind::Vector {
            return Err(SymError::UnsupportedDerivative(s.name()));
        }
        let dn = poly_derivative(&self.num, s, rules)?;
        if self.den.is_one() {
            return Ok(dn);
        }
        let dd = poly_derivative(&self.den, s, rules)?;
        let den = Self::from_poly(self.den.clone());
        let num = Self::from_poly(self.num.clone());
        // (n' d - n d') / d^2
        (dn * den.clone() - num * dd).div_ref(&(den.clone() * den))
    }

    /// Evaluates in any scalar domain; `env` supplies a value for each symbol.
    pub fn eval<F: Scalar>(&self, env: &dyn Fn(Sym) -> Option<F>) -> Result<F> {
        let n = eval_poly(&self.num, env)?;
        if self.den.is_one() {
            return Ok(n);
        }
        let d = eval_poly(&self.den, env)?;
        if d.is_zero() {
            return Err(SymError::DivisionByZero(format!("denominator {} vanishes", self.den)));
        }
        n.try_div(&d)
    }

    /// Simultaneous substitution; unbound symbols stay symbolic.
    pub fn substitute(&self, bindings: &HashMap<Sym, RatExpr>) -> Result<Self> {
        self.eval(&|s| Some(bindings.get(&s).cloned().unwrap_or_else(|| RatExpr::var(s))))
    }

    /// Substitutes rational constants for some symbols.
    pub fn partial_eval(&self, vals: &HashMap<Sym, Q>) -> Result<Self> {
        let den = self.den.partial_eval(vals);
        if den.is_zero() {
            return Err(SymError::DivisionByZero(format!("denominator {} vanishes", self.den)));
        }
        RatExpr::new(self.num.partial_eval(vals), den)
    }

    /// Numerator split by y-grade, each part over the shared denominator.
    /// Keys are relative to the lowest y-grade present in the denominator.
    pub fn y_grade_split(&self) -> BTreeMap<i64, RatExpr> {
        let base = self.den.y_grades().into_iter().next().unwrap_or(0);
        self.num
            .y_grade_split()
            .into_iter()
            .map(|(g, p)| (g - base, RatExpr::reduce(p, self.den.clone(), true)))
            .collect()
    }

    /// Whether the denominator is itself y-homogeneous.
    pub fn den_is_homogeneous(&self) -> bool {
        self.den.y_grades().len() <= 1
    }
}

/// Removes the common factor of `a` and `b`.
fn cancel(a: &Poly, b: &Poly) -> (Poly, Poly) {
    if b.is_one() || a.is_constant() {
        return (a.clone(), b.clone());
    }
    let g = gcd(a, b);
    if g.is_one() {
        (a.clone(), b.clone())
    } else {
        (a.div_exact(&g).expect("gcd divides"), b.div_exact(&g).expect("gcd divides"))
    }
}

fn poly_derivative(p: &Poly, s: Sym, rules: &Derivation) -> Result<RatExpr> {
    let mut out = RatExpr::from_poly(p.derivative(s));
    let units: Vec<Sym> = p.vars().into_iter().filter(|u| u.kind() == SymKind::Unit && *u != s).collect();
    if units.is_empty() || s.kind() != SymKind::Coordinate {
        return Ok(out);
    }
    for u in units {
        let rule = rules.rule(u).ok_or_else(|| SymError::MissingDerivationRule {
            unit: u.name(),
            var: s.name(),
        })?;
        let Some(g) = rule.get(&s) else { continue };
        // E * dp/dE, then times the log-gradient
        let euler = Poly::from_terms(
            p.terms()
                .iter()
                .filter(|(m, _)| m.exp(u) != 0)
                .map(|(m, c)| (m.clone(), c * Q::from_integer(m.exp(u).into()))),
        );
        out = out + RatExpr::from_poly(euler) * g.clone();
    }
    Ok(out)
}

pub(crate) fn eval_poly<F: Scalar>(p: &Poly, env: &dyn Fn(Sym) -> Option<F>) -> Result<F> {
    let mut cache: HashMap<(Sym, i32), F> = HashMap::new();
    let mut base: HashMap<Sym, F> = HashMap::new();
    let mut acc = F::zero();
    for (m, c) in p.terms() {
        let mut t = F::from_q(c);
        for &(s, e) in m.exps() {
            let v = match cache.get(&(s, e)) {
                Some(v) => v.clone(),
                None => {
                    let b = match base.get(&s) {
                        Some(b) => b.clone(),
                        None => {
                            let b = env(s).ok_or_else(|| SymError::Unbound(s.name()))?;
                            base.insert(s, b.clone());
                            b
                        }
                    };
                    let v = b.powi(e).map_err(|_| SymError::DivisionByZero(format!("{s}^{e} with {s} = 0")))?;
                    cache.insert((s, e), v.clone());
                    v
                }
            };
            t = t * v;
        }
        acc = acc + t;
    }
    Ok(acc)
}

forward_ops!(RatExpr);

impl Scalar for RatExpr {
    fn zero() -> Self {
        RatExpr::zero()
    }
    fn one() -> Self {
        RatExpr::one()
    }
    fn from_q(q: &Q) -> Self {
        RatExpr::constant(q.clone())
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
    fn inv(&self) -> Result<Self> {
        self.recip()
    }
    fn powi(&self, e: i32) -> Result<Self> {
        self.pow_i(e)
    }
    fn scale(&self, q: &Q) -> Self {
        self.scale_q(q)
    }
}

impl From<Poly> for RatExpr {
    fn from(p: Poly) -> Self {
        RatExpr::from_poly(p)
    }
}

fn needs_parens_as_factor(p: &Poly) -> bool {
    match p.terms() {
        [(m, c)] => !(c.is_one() && m.exps().len() <= 1) && !(m.is_one() && c >= &<Q as Zero>::zero() && c.denom().is_one()),
        _ => true,
    }
}

impl fmt::Display for RatExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            return write!(f, "{}", self.num);
        }
        if self.num.len() > 1 {
            write!(f, "({})", self.num)?;
        } else {
            write!(f, "{}", self.num)?;
        }
        if needs_parens_as_factor(&self.den) {
            write!(f, "/({})", self.den)
        } else {
            write!(f, "/{}", self.den)
        }
    }
}

impl fmt::Debug for RatExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Rat({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::atoms;

    fn a() -> RatExpr {
        RatExpr::var(atoms::alpha())
    }
    fn b() -> RatExpr {
        RatExpr::var(atoms::beta())
    }

    #[test]
    fn cancellation() {
        // beta^2/alpha / beta = beta/alpha
        let e = (b() * b()).div_ref(&a()).unwrap().div_ref(&b()).unwrap();
        assert_eq!(e, b().div_ref(&a()).unwrap());
    }

    #[test]
    fn quotient_rule() {
        let e = (b() * b()).div_ref(&a()).unwrap();
        let d = e.derivative(atoms::alpha(), &Derivation::new()).unwrap();
        let expected = -(b() * b()).div_ref(&(a() * a())).unwrap();
        assert_eq!(d, expected);
    }

    #[test]
    fn unit_atom_rule() {
        let x1 = Sym::x(1);
        let e = RatExpr::var(atoms::unit());
        let rules = Derivation::new().with_unit(atoms::unit(), HashMap::from([(x1, RatExpr::int(2))]));
        let d = (e.clone() * e.clone()).derivative(x1, &rules).unwrap();
        assert_eq!(d, RatExpr::int(4) * e.clone() * e.clone());
        assert!(matches!(
            e.derivative(x1, &Derivation::new()),
            Err(SymError::MissingDerivationRule { .. })
        ));
        // no x-dependence through alpha
        assert!(e.derivative(atoms::alpha(), &Derivation::new()).unwrap().is_zero());
    }

    #[test]
    fn vector_derivative_rejected() {
        assert!(matches!(
            a().derivative(atoms::bi(), &Derivation::new()),
            Err(SymError::UnsupportedDerivative(_))
        ));
    }

    #[test]
    fn division_by_zero() {
        assert!(matches!(a().div_ref(&RatExpr::zero()), Err(SymError::DivisionByZero(_))));
    }

    #[test]
    fn unit_denominator_is_moved_up() {
        let e = RatExpr::var(atoms::unit());
        let q = a().div_ref(&e).unwrap();
        assert!(q.den().is_one());
        assert_eq!(q.num().terms()[0].0.exp(atoms::unit()), -1);
    }

    #[test]
    fn grade_split() {
        let e = RatExpr::var(atoms::r00()) + RatExpr::var(atoms::s0());
        let split = e.y_grade_split();
        assert_eq!(split.len(), 2);
        assert_eq!(split[&2], RatExpr::var(atoms::r00()));
        assert_eq!(split[&1], RatExpr::var(atoms::s0()));
    }
}
