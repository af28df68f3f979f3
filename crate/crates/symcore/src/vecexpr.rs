//! Free-index expressions: linear combinations of vector atoms.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Result, SymError};
use crate::poly::{Monomial, Poly};
use crate::rat::RatExpr;
use crate::scalar::Scalar;
use crate::symbol::{Sym, SymKind};

/// `sum_a coeff_a * a^i` over vector atoms `a` (`yi`, `bi`, `sigmai`, `si0`).
#[derive(Clone, Debug, PartialEq)]
pub struct VecExpr<F: Scalar = RatExpr> {
    terms: BTreeMap<Sym, F>,
}

impl<F: Scalar> Default for VecExpr<F> {
    fn default() -> Self {
        VecExpr { terms: BTreeMap::new() }
    }
}

impl<F: Scalar> VecExpr<F> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn atom(a: Sym, coeff: F) -> Self {
        debug_assert_eq!(a.kind(), SymKind::Vector);
        let mut v = Self::zero();
        v.add_term(a, coeff);
        v
    }

    pub fn add_term(&mut self, a: Sym, coeff: F) {
        let c = match self.terms.remove(&a) {
            Some(old) => old + coeff,
            None => coeff,
        };
        if !c.is_zero() {
            self.terms.insert(a, c);
        }
    }

    pub fn coeff(&self, a: Sym) -> F {
        self.terms.get(&a).cloned().unwrap_or_else(F::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Sym, &F)> {
        self.terms.iter()
    }

    pub fn atoms(&self) -> impl Iterator<Item = Sym> + '_ {
        self.terms.keys().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|c| c.is_zero())
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (a, c) in &other.terms {
            out.add_term(*a, c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.map(|c| -c.clone())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, f: &F) -> Self {
        let mut out = Self::zero();
        for (a, c) in &self.terms {
            out.add_term(*a, c.clone() * f.clone());
        }
        out
    }

    pub fn map<G: Scalar>(&self, f: impl Fn(&F) -> G) -> VecExpr<G> {
        let mut out = VecExpr::zero();
        for (a, c) in &self.terms {
            out.add_term(*a, f(c));
        }
        out
    }

    pub fn try_map<G: Scalar>(&self, f: impl Fn(&F) -> Result<G>) -> Result<VecExpr<G>> {
        let mut out = VecExpr::zero();
        for (a, c) in &self.terms {
            out.add_term(*a, f(c)?);
        }
        Ok(out)
    }

    /// Component `i` given the components of each atom.
    pub fn component(&self, i: usize, comp: &dyn Fn(Sym, usize) -> F) -> F {
        self.terms
            .iter()
            .fold(F::zero(), |acc, (a, c)| acc + c.clone() * comp(*a, i))
    }

    pub fn components(&self, n: usize, comp: &dyn Fn(Sym, usize) -> F) -> Vec<F> {
        (0..n).map(|i| self.component(i, comp)).collect()
    }
}

impl VecExpr<RatExpr> {
    /// Strict conversion from a rational expression in which vector atoms
    /// appear linearly.
    pub fn from_rat(e: &RatExpr) -> Result<Self> {
        let form = VectorForm::split(e)?;
        if !form.scalar.is_zero() || !form.nonlinear.is_empty() {
            return Err(SymError::NotLinearInVectors(e.to_string()));
        }
        Ok(form.linear)
    }

    /// The expression `sum_a coeff_a * a` as a single rational function.
    pub fn to_rat(&self) -> RatExpr {
        self.terms
            .iter()
            .fold(RatExpr::zero(), |acc, (a, c)| acc + c.clone() * RatExpr::var(*a))
    }
}

impl fmt::Display for VecExpr<RatExpr> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (a, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({c})*{a}")?;
        }
        Ok(())
    }
}

/// Lenient split of a rational expression by its vector-atom content.
///
/// Anything that is not a single vector atom to the first power lands in
/// `scalar` (no vector atom) or `nonlinear` (products or powers of atoms).
#[derive(Clone, Debug)]
pub struct VectorForm {
    pub linear: VecExpr<RatExpr>,
    pub scalar: RatExpr,
    pub nonlinear: Vec<(Monomial, RatExpr)>,
}

impl VectorForm {
    pub fn split(e: &RatExpr) -> Result<Self> {
        if e.den().vars().iter().any(|s| s.kind() == SymKind::Vector) {
            return Err(SymError::NotLinearInVectors(format!("vector atom in denominator of {e}")));
        }
        let mut groups: BTreeMap<Monomial, Vec<(Monomial, crate::Q)>> = BTreeMap::new();
        for (m, c) in e.num().terms() {
            let (vec_part, rest): (Vec<_>, Vec<_>) =
                m.exps().iter().copied().partition(|(s, _)| s.kind() == SymKind::Vector);
            let vm = vec_part
                .into_iter()
                .fold(Monomial::one(), |acc, (s, k)| acc.mul(&Monomial::var(s, k)));
            let rm = rest
                .into_iter()
                .fold(Monomial::one(), |acc, (s, k)| acc.mul(&Monomial::var(s, k)));
            groups.entry(vm).or_default().push((rm, c.clone()));
        }
        let mut out = VectorForm {
            linear: VecExpr::zero(),
            scalar: RatExpr::zero(),
            nonlinear: Vec::new(),
        };
        for (vm, terms) in groups {
            let coeff = RatExpr::new(Poly::from_terms(terms), e.den().clone())?;
            match vm.exps() {
                [] => out.scalar = coeff,
                [(a, 1)] => out.linear.add_term(*a, coeff),
                _ => out.nonlinear.push((vm, coeff)),
            }
        }
        Ok(out)
    }

    pub fn is_index_consistent(&self) -> bool {
        self.scalar.is_zero() && self.nonlinear.is_empty()
    }
}

/// `sum c_{ab} (a^i b^j - a^j b^i)` over unordered pairs of vector atoms.
#[derive(Clone, Debug, PartialEq)]
pub struct Bivector<F: Scalar = RatExpr> {
    terms: BTreeMap<(Sym, Sym), F>,
}

impl<F: Scalar> Default for Bivector<F> {
    fn default() -> Self {
        Bivector { terms: BTreeMap::new() }
    }
}

impl<F: Scalar> Bivector<F> {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Adds `c (a^i b^j - a^j b^i)`.
    pub fn add_wedge(&mut self, a: Sym, b: Sym, c: F) {
        if a == b {
            return;
        }
        let (key, c) = if a < b { ((a, b), c) } else { ((b, a), -c) };
        let v = match self.terms.remove(&key) {
            Some(old) => old + c,
            None => c,
        };
        if !v.is_zero() {
            self.terms.insert(key, v);
        }
    }

    pub fn wedge(a: Sym, b: Sym, c: F) -> Self {
        let mut w = Self::zero();
        w.add_wedge(a, b, c);
        w
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for ((a, b), c) in &other.terms {
            out.add_wedge(*a, *b, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for ((a, b), c) in &other.terms {
            out.add_wedge(*a, *b, -c.clone());
        }
        out
    }

    pub fn coeff(&self, a: Sym, b: Sym) -> F {
        if a < b {
            self.terms.get(&(a, b)).cloned().unwrap_or_else(F::zero)
        } else {
            -self.terms.get(&(b, a)).cloned().unwrap_or_else(F::zero)
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(Sym, Sym), &F)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|c| c.is_zero())
    }

    /// Component `(i, j)`; antisymmetric by construction.
    pub fn component(&self, i: usize, j: usize, comp: &dyn Fn(Sym, usize) -> F) -> F {
        self.terms.iter().fold(F::zero(), |acc, ((a, b), c)| {
            acc + c.clone() * (comp(*a, i) * comp(*b, j) - comp(*a, j) * comp(*b, i))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::atoms;

    #[test]
    fn linear_split() {
        let a = RatExpr::var(atoms::alpha());
        let e = &a * &RatExpr::var(atoms::bi()) + RatExpr::var(atoms::yi());
        let v = VecExpr::from_rat(&e).unwrap();
        assert_eq!(v.coeff(atoms::bi()), a);
        assert_eq!(v.coeff(atoms::yi()), RatExpr::one());
        assert_eq!(v.to_rat(), e);
    }

    #[test]
    fn nonlinear_product_is_reported() {
        let e = RatExpr::var(atoms::bi()) * RatExpr::var(atoms::yi()) + RatExpr::var(atoms::bi());
        assert!(VecExpr::from_rat(&e).is_err());
        let form = VectorForm::split(&e).unwrap();
        assert_eq!(form.nonlinear.len(), 1);
        assert!(!form.is_index_consistent());
    }

    #[test]
    fn wedge_is_antisymmetric() {
        let w: Bivector<RatExpr> = Bivector::wedge(atoms::bi(), atoms::yi(), RatExpr::int(2));
        let comp = |s: Sym, i: usize| -> RatExpr {
            if s == atoms::bi() {
                RatExpr::int([1, 5][i])
            } else {
                RatExpr::int([3, -2][i])
            }
        };
        assert!(w.component(0, 0, &comp).is_zero());
        assert_eq!(w.component(0, 1, &comp), -w.component(1, 0, &comp));
        assert_eq!(w.coeff(atoms::yi(), atoms::bi()), RatExpr::int(-2));
    }
}
