//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! Terms are kept sorted in descending graded-lexicographic order with no
//! zero coefficients, so structural equality is mathematical equality.
//! Unit atoms (`E`) may carry negative exponents; every other exponent is
//! non-negative.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_traits::{One, Signed, Zero};
use smallvec::SmallVec;

use crate::symbol::{Sym, SymKind};
use crate::Q;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(SmallVec<[(Sym, i32); 4]>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(SmallVec::new())
    }

    pub fn var(s: Sym, e: i32) -> Self {
        if e == 0 {
            Self::one()
        } else {
            Monomial(smallvec::smallvec![(s, e)])
        }
    }

    fn from_sorted(v: SmallVec<[(Sym, i32); 4]>) -> Self {
        Monomial(v)
    }

    pub fn exps(&self) -> &[(Sym, i32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exp(&self, s: Sym) -> i32 {
        match self.0.binary_search_by(|(v, _)| v.cmp(&s)) {
            Ok(i) => self.0[i].1,
            Err(_) => 0,
        }
    }

    pub fn degree(&self) -> i64 {
        self.0.iter().map(|&(_, e)| e as i64).sum()
    }

    /// Weighted degree in y (fiber coordinates and graded atoms).
    pub fn y_grade(&self) -> i64 {
        self.0.iter().map(|&(s, e)| e as i64 * s.grade() as i64).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        self.combine(other, |a, b| a + b)
    }

    /// Exponent-wise `self - other`, without checking signs.
    pub fn div_unchecked(&self, other: &Monomial) -> Monomial {
        self.combine(other, |a, b| a - b)
    }

    /// `self / other` if the quotient has non-negative exponents on every
    /// non-unit symbol.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let q = self.div_unchecked(other);
        if q.0.iter().all(|&(s, e)| e >= 0 || s.kind() == SymKind::Unit) {
            Some(q)
        } else {
            None
        }
    }

    pub fn pow(&self, k: u32) -> Monomial {
        Monomial(self.0.iter().map(|&(s, e)| (s, e * k as i32)).collect())
    }

    /// Exponent-wise minimum, absent symbols counting as exponent 0.
    pub fn gcd_with(&self, other: &Monomial) -> Monomial {
        self.combine(other, |a, b| a.min(b))
    }

    /// Drops unit atoms.
    pub fn without_units(&self) -> Monomial {
        Monomial(self.0.iter().copied().filter(|(s, _)| s.kind() != SymKind::Unit).collect())
    }

    /// Removes `s`, returning its exponent and the rest.
    pub fn split_off(&self, s: Sym) -> (i32, Monomial) {
        let mut rest = self.0.clone();
        match rest.binary_search_by(|(v, _)| v.cmp(&s)) {
            Ok(i) => {
                let (_, e) = rest.remove(i);
                (e, Monomial(rest))
            }
            Err(_) => (0, Monomial(rest)),
        }
    }

    fn combine(&self, other: &Monomial, f: impl Fn(i32, i32) -> i32) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out: SmallVec<[(Sym, i32); 4]> = SmallVec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let (s, e) = if j >= b.len() || (i < a.len() && a[i].0 < b[j].0) {
                let r = (a[i].0, f(a[i].1, 0));
                i += 1;
                r
            } else if i >= a.len() || b[j].0 < a[i].0 {
                let r = (b[j].0, f(0, b[j].1));
                j += 1;
                r
            } else {
                let r = (a[i].0, f(a[i].1, b[j].1));
                i += 1;
                j += 1;
                r
            };
            if e != 0 {
                out.push((s, e));
            }
        }
        Monomial::from_sorted(out)
    }
}

impl Ord for Monomial {
    /// Graded lexicographic; symbols registered earlier rank higher.
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            o => return o,
        }
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        loop {
            match (a.get(i), b.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some(&(_, ea)), None) => return ea.cmp(&0),
                (None, Some(&(_, eb))) => return 0.cmp(&eb),
                (Some(&(sa, ea)), Some(&(sb, eb))) => {
                    if sa == sb {
                        if ea != eb {
                            return ea.cmp(&eb);
                        }
                        i += 1;
                        j += 1;
                    } else if sa < sb {
                        return ea.cmp(&0);
                    } else {
                        return 0.cmp(&eb);
                    }
                }
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (i, &(s, e)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            if e == 1 {
                write!(f, "{s}")?;
            } else {
                write!(f, "{s}^{e}")?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: Vec<(Monomial, Q)>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            Poly {
                terms: vec![(Monomial::one(), c)],
            }
        }
    }

    pub fn from_int(c: i64) -> Self {
        Self::constant(Q::from_integer(c.into()))
    }

    pub fn var(s: Sym) -> Self {
        Self::term(Monomial::var(s, 1), Q::one())
    }

    pub fn term(m: Monomial, c: Q) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            Poly { terms: vec![(m, c)] }
        }
    }

    /// Builds a canonical polynomial from arbitrary (possibly repeated) terms.
    pub fn from_terms(it: impl IntoIterator<Item = (Monomial, Q)>) -> Self {
        let mut acc: HashMap<Monomial, Q> = HashMap::new();
        for (m, c) in it {
            if c.is_zero() {
                continue;
            }
            match acc.get_mut(&m) {
                Some(v) => *v += c,
                None => {
                    acc.insert(m, c);
                }
            }
        }
        Self::from_map(acc)
    }

    fn from_map(acc: HashMap<Monomial, Q>) -> Self {
        let mut terms: Vec<(Monomial, Q)> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        Poly { terms }
    }

    pub fn terms(&self) -> &[(Monomial, Q)] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<(Monomial, Q)> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.is_one() && self.terms[0].1.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms[0].0.is_one())
    }

    pub fn as_constant(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(Q::zero()),
            1 if self.terms[0].0.is_one() => Some(self.terms[0].1.clone()),
            _ => None,
        }
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn leading(&self) -> Option<&(Monomial, Q)> {
        self.terms.first()
    }

    pub fn lc(&self) -> Q {
        self.terms.first().map(|t| t.1.clone()).unwrap_or_else(Q::zero)
    }

    pub fn vars(&self) -> BTreeSet<Sym> {
        let mut out = BTreeSet::new();
        for (m, _) in &self.terms {
            for &(s, _) in m.exps() {
                out.insert(s);
            }
        }
        out
    }

    pub fn contains(&self, s: Sym) -> bool {
        self.terms.iter().any(|(m, _)| m.exp(s) != 0)
    }

    pub fn degree_in(&self, s: Sym) -> i32 {
        self.terms.iter().map(|(m, _)| m.exp(s)).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> i64 {
        self.terms.iter().map(|(m, _)| m.degree()).max().unwrap_or(0)
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, c: &Q) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    /// Multiplication by a monomial preserves the term order.
    pub fn mul_monomial(&self, m: &Monomial) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(t, c)| (t.mul(m), c.clone())).collect(),
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        self.merge(other, false)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.merge(other, true)
    }

    fn merge(&self, other: &Poly, negate: bool) -> Poly {
        let (a, b) = (&self.terms, &other.terms);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Greater => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    let c = if negate { -&b[j].1 } else { b[j].1.clone() };
                    out.push((b[j].0.clone(), c));
                    j += 1;
                }
                Ordering::Equal => {
                    let c = if negate { &a[i].1 - &b[j].1 } else { &a[i].1 + &b[j].1 };
                    if !c.is_zero() {
                        out.push((a[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(a[i..].iter().cloned());
        for t in &b[j..] {
            let c = if negate { -&t.1 } else { t.1.clone() };
            out.push((t.0.clone(), c));
        }
        Poly { terms: out }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        if other.terms.len() == 1 {
            let (m, c) = &other.terms[0];
            return self.mul_monomial(m).scale(c);
        }
        if self.terms.len() == 1 {
            let (m, c) = &self.terms[0];
            return other.mul_monomial(m).scale(c);
        }
        let mut acc: HashMap<Monomial, Q> = HashMap::with_capacity(self.terms.len() * other.terms.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.mul(mb);
                let c = ca * cb;
                match acc.get_mut(&m) {
                    Some(v) => *v += c,
                    None => {
                        acc.insert(m, c);
                    }
                }
            }
        }
        Self::from_map(acc)
    }

    pub fn pow(&self, mut k: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Formal partial derivative treating every symbol as independent.
    pub fn derivative(&self, s: Sym) -> Poly {
        Poly::from_terms(self.terms.iter().filter_map(|(m, c)| {
            let e = m.exp(s);
            if e == 0 {
                None
            } else {
                Some((m.div_unchecked(&Monomial::var(s, 1)), c * Q::from_integer(e.into())))
            }
        }))
    }

    /// Exponent-wise minimum over all terms (absent symbols count as 0).
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.iter();
        let first = match it.next() {
            Some((m, _)) => m.clone(),
            None => return Monomial::one(),
        };
        it.fold(first, |acc, (m, _)| acc.gcd_with(m))
    }

    /// Divides every term by `m` without checking exponents.
    pub fn div_monomial_unchecked(&self, m: &Monomial) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(t, c)| (t.div_unchecked(m), c.clone())).collect(),
        }
    }

    /// Returns `(lc, self / lc)`.
    pub fn monic(&self) -> (Q, Poly) {
        let lc = self.lc();
        if lc.is_zero() || lc.is_one() {
            return (if lc.is_zero() { Q::one() } else { lc }, self.clone());
        }
        let inv = lc.recip();
        (lc, self.scale(&inv))
    }

    /// Coefficients of `self` viewed as a polynomial in `s` (index = exponent).
    /// Requires non-negative exponents of `s`.
    pub fn to_univariate(&self, s: Sym) -> Vec<Poly> {
        let deg = self.degree_in(s).max(0) as usize;
        let mut buckets: Vec<Vec<(Monomial, Q)>> = vec![Vec::new(); deg + 1];
        for (m, c) in &self.terms {
            let (e, rest) = m.split_off(s);
            debug_assert!(e >= 0);
            buckets[e as usize].push((rest, c.clone()));
        }
        buckets
            .into_iter()
            .map(|mut t| {
                // removing one symbol from every term keeps the relative order
                // within a bucket only up to degree shifts, so re-sort.
                t.sort_unstable_by(|a, b| b.0.cmp(&a.0));
                Poly { terms: t }
            })
            .collect()
    }

    pub fn from_univariate(coeffs: &[Poly], s: Sym) -> Poly {
        let mut out = Poly::zero();
        for (e, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                out = out.add(&c.mul_monomial(&Monomial::var(s, e as i32)));
            }
        }
        out
    }

    /// Exact quotient `self / d`, or `None` if `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Poly::zero());
        }
        if let Some(c) = d.as_constant() {
            return Some(self.scale(&c.recip()));
        }
        let ma = self.monomial_content();
        let md = d.monomial_content();
        let shift = ma.div(&md)?;
        let a = self.div_monomial_unchecked(&ma);
        let b = d.div_monomial_unchecked(&md);
        let q = a.div_exact_normalized(&b)?;
        Some(q.mul_monomial(&shift))
    }

    /// Division algorithm on polynomials with non-negative exponents.
    fn div_exact_normalized(&self, d: &Poly) -> Option<Poly> {
        let (lm, lc) = d.leading()?.clone();
        let lc_inv = lc.recip();
        let mut rem = self.clone();
        let mut quot: Vec<(Monomial, Q)> = Vec::new();
        // quick degree sanity checks
        for s in d.vars() {
            if d.degree_in(s) > rem.degree_in(s) {
                return None;
            }
        }
        while let Some((rm, rc)) = rem.leading().cloned() {
            let qm = rm.div(&lm)?;
            if qm.exps().iter().any(|&(_, e)| e < 0) {
                return None;
            }
            let qc = &rc * &lc_inv;
            rem = rem.sub(&d.mul_monomial(&qm).scale(&qc));
            quot.push((qm, qc));
        }
        quot.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        Some(Poly { terms: quot })
    }

    /// Splits terms by y-grade.
    pub fn y_grade_split(&self) -> BTreeMap<i64, Poly> {
        let mut out: BTreeMap<i64, Vec<(Monomial, Q)>> = BTreeMap::new();
        for (m, c) in &self.terms {
            out.entry(m.y_grade()).or_default().push((m.clone(), c.clone()));
        }
        out.into_iter().map(|(g, t)| (g, Poly { terms: t })).collect()
    }

    /// Y-grades present among the terms.
    pub fn y_grades(&self) -> BTreeSet<i64> {
        self.terms.iter().map(|(m, _)| m.y_grade()).collect()
    }

    /// Substitutes rational values for some symbols; others stay symbolic.
    pub fn partial_eval(&self, vals: &HashMap<Sym, Q>) -> Poly {
        Poly::from_terms(self.terms.iter().map(|(m, c)| {
            let mut coeff = c.clone();
            let mut rest: SmallVec<[(Sym, i32); 4]> = SmallVec::new();
            for &(s, e) in m.exps() {
                match vals.get(&s) {
                    Some(v) => coeff *= pow_q(v, e),
                    None => rest.push((s, e)),
                }
            }
            (Monomial::from_sorted(rest), coeff)
        }))
    }

    /// Integer lcm of coefficient denominators times gcd-normalization is not
    /// needed for canonical forms; this is only used when printing.
    pub fn has_negative_lead(&self) -> bool {
        self.lc().is_negative()
    }
}

pub(crate) fn pow_q(v: &Q, e: i32) -> Q {
    if e >= 0 {
        num_traits::pow(v.clone(), e as usize)
    } else {
        num_traits::pow(v.recip(), (-e) as usize)
    }
}

pub(crate) fn fmt_q(q: &Q) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if i == 0 {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            if m.is_one() {
                f.write_str(&fmt_q(&a))?;
            } else if a.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{}*{m}", fmt_q(&a))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({self})")
    }
}
