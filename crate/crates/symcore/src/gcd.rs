//! Multivariate polynomial gcd over the rationals.
//!
//! Recursive primitive PRS in a chosen main variable, with fast paths for
//! monomial contents, exact divisibility, variables present on one side only,
//! and a modular-image coprimality test that settles the common `gcd = 1`
//! case without running a remainder sequence.

use std::collections::HashMap;

use num_traits::{One, Zero};

use crate::poly::Poly;
use crate::symbol::Sym;
use crate::Q;

/// Normalized gcd: leading coefficient 1 and no unit-atom factor.
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return normalize(b);
    }
    if b.is_zero() {
        return normalize(a);
    }
    let ma = a.monomial_content();
    let mb = b.monomial_content();
    let mono = ma.gcd_with(&mb).without_units();
    let pa = a.div_monomial_unchecked(&ma);
    let pb = b.div_monomial_unchecked(&mb);
    let g = gcd_core(&pa, &pb);
    g.mul_monomial(&mono).monic().1
}

/// Monic, with unit-atom exponents shifted so the minimum is zero.
pub fn normalize(p: &Poly) -> Poly {
    if p.is_zero() {
        return Poly::zero();
    }
    let m = p.monomial_content();
    let units = m.div_unchecked(&m.without_units());
    p.div_monomial_unchecked(&units).monic().1
}

/// Both inputs have trivial monomial content and non-negative exponents.
fn gcd_core(a: &Poly, b: &Poly) -> Poly {
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    if a == b {
        return a.monic().1;
    }
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if large.div_exact(small).is_some() {
        return small.monic().1;
    }
    let va = a.vars();
    let vb = b.vars();
    if let Some(&v) = va.difference(&vb).next() {
        let ca = content_in(a, v);
        return gcd(&ca, b);
    }
    if let Some(&v) = vb.difference(&va).next() {
        let cb = content_in(b, v);
        return gcd(a, &cb);
    }
    let common: Vec<Sym> = va.into_iter().collect();
    if common.len() > 1 && images_coprime(a, b, &common) {
        return Poly::one();
    }
    let main = *common
        .iter()
        .min_by_key(|&&v| (a.degree_in(v).max(b.degree_in(v)), a.len() + b.len(), v.id()))
        .unwrap();
    let ua = a.to_univariate(main);
    let ub = b.to_univariate(main);
    let ca = gcd_list(&ua);
    let cb = gcd_list(&ub);
    let c = gcd(&ca, &cb);
    let pa = div_coeffs(&ua, &ca);
    let pb = div_coeffs(&ub, &cb);
    let g = prs(pa, pb);
    Poly::from_univariate(&g, main).mul(&c).monic().1
}

/// Gcd of the coefficients of `p` viewed as a polynomial in `v`.
pub fn content_in(p: &Poly, v: Sym) -> Poly {
    gcd_list(&p.to_univariate(v))
}

fn gcd_list(ps: &[Poly]) -> Poly {
    let mut nonzero: Vec<&Poly> = ps.iter().filter(|p| !p.is_zero()).collect();
    nonzero.sort_by_key(|p| p.len());
    let mut acc = match nonzero.first() {
        Some(p) => normalize(p),
        None => return Poly::zero(),
    };
    for p in nonzero.iter().skip(1) {
        if acc.is_one() {
            break;
        }
        acc = gcd(&acc, p);
    }
    acc
}

fn div_coeffs(ps: &[Poly], c: &Poly) -> Vec<Poly> {
    if c.is_one() {
        return ps.to_vec();
    }
    ps.iter()
        .map(|p| p.div_exact(c).expect("content divides every coefficient"))
        .collect()
}

fn trim(mut p: Vec<Poly>) -> Vec<Poly> {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

/// Primitive polynomial remainder sequence on primitive inputs.
fn prs(a: Vec<Poly>, b: Vec<Poly>) -> Vec<Poly> {
    let (mut a, mut b) = (trim(a), trim(b));
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    loop {
        if b.is_empty() {
            return a;
        }
        if b.len() == 1 {
            return vec![Poly::one()];
        }
        let r = trim(prem(&a, &b));
        if r.is_empty() {
            return b;
        }
        if r.len() == 1 {
            return vec![Poly::one()];
        }
        let c = gcd_list(&r);
        let mut r = div_coeffs(&r, &c);
        let lc = r.last().unwrap().lc();
        if !lc.is_one() {
            let inv = lc.recip();
            r = r.iter().map(|p| p.scale(&inv)).collect();
        }
        a = b;
        b = r;
    }
}

/// Lazy pseudo-remainder: returns `lc(b)^k * a mod b`.
fn prem(a: &[Poly], b: &[Poly]) -> Vec<Poly> {
    let db = b.len() - 1;
    let lb = &b[db];
    let mut r: Vec<Poly> = a.to_vec();
    while r.len() > db && !r.is_empty() {
        let dr = r.len() - 1;
        let lr = r[dr].clone();
        let shift = dr - db;
        let mut next: Vec<Poly> = r.iter().map(|c| c.mul(lb)).collect();
        for (i, bc) in b.iter().enumerate() {
            let t = bc.mul(&lr);
            next[i + shift] = next[i + shift].sub(&t);
        }
        debug_assert!(next[dr].is_zero());
        next.pop();
        r = trim(next);
    }
    r
}

/// Sound coprimality test: if for every variable the univariate images at a
/// point (with leading coefficients preserved) are coprime, the gcd has
/// degree zero in every variable.
fn images_coprime(a: &Poly, b: &Poly, vars: &[Sym]) -> bool {
    const POINTS: [i64; 8] = [3, -2, 5, 7, -4, 11, 13, -6];
    for attempt in 0..2usize {
        let mut ok = true;
        for &v in vars {
            let mut vals: HashMap<Sym, Q> = HashMap::new();
            for (i, &w) in vars.iter().enumerate() {
                if w != v {
                    let k = POINTS[(i + attempt * 3) % POINTS.len()] + attempt as i64;
                    vals.insert(w, Q::from_integer(k.into()));
                }
            }
            let ia = dense_image(a, v, &vals);
            let ib = dense_image(b, v, &vals);
            let (Some(ia), Some(ib)) = (ia, ib) else {
                ok = false;
                break;
            };
            if ia.len() != a.degree_in(v) as usize + 1 || ib.len() != b.degree_in(v) as usize + 1 {
                ok = false;
                break;
            }
            if univariate_gcd_degree(ia, ib) != 0 {
                ok = false;
                break;
            }
        }
        if ok {
            return true;
        }
    }
    false
}

fn dense_image(p: &Poly, v: Sym, vals: &HashMap<Sym, Q>) -> Option<Vec<Q>> {
    let red = p.partial_eval(vals);
    let d = red.degree_in(v);
    if d < 0 {
        return None;
    }
    let mut out = vec![Q::zero(); d as usize + 1];
    for (m, c) in red.terms() {
        let e = m.exp(v);
        if m.exps().len() > usize::from(e != 0) {
            return None;
        }
        out[e as usize] += c;
    }
    while out.last().is_some_and(|c| c.is_zero()) {
        out.pop();
    }
    Some(out)
}

fn univariate_gcd_degree(mut a: Vec<Q>, mut b: Vec<Q>) -> usize {
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    while !b.is_empty() {
        // a mod b
        let lb_inv = b.last().unwrap().recip();
        while a.len() >= b.len() && !a.is_empty() {
            let f = a.last().unwrap() * &lb_inv;
            let shift = a.len() - b.len();
            for (i, c) in b.iter().enumerate() {
                let t = c * &f;
                a[i + shift] -= t;
            }
            a.pop();
            while a.last().is_some_and(|c| c.is_zero()) {
                a.pop();
            }
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len().saturating_sub(1)
}

/// `lcm(a, b)`, normalized.
pub fn lcm(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() || b.is_zero() {
        return Poly::zero();
    }
    let g = gcd(a, b);
    normalize(&a.div_exact(&g).expect("gcd divides").mul(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::atoms;

    fn v(s: Sym) -> Poly {
        Poly::var(s)
    }
    fn c(k: i64) -> Poly {
        Poly::from_int(k)
    }

    #[test]
    fn shared_factor_is_found() {
        let (x, y, z) = (v(Sym::x(1)), v(Sym::x(2)), v(atoms::alpha()));
        let f = x.add(&y).add(&c(1));
        let g = x.mul(&z).sub(&y.pow(2));
        let h = z.add(&c(3));
        let a = f.mul(&g).mul(&h);
        let b = f.mul(&h.pow(2)).mul(&x);
        let expected = normalize(&f.mul(&h));
        assert_eq!(gcd(&a, &b), expected);
    }

    #[test]
    fn coprime_inputs() {
        let (x, y) = (v(Sym::x(1)), v(Sym::y(1)));
        let a = x.pow(2).add(&y.pow(2)).add(&c(1));
        let b = x.mul(&y).sub(&c(2));
        assert!(gcd(&a, &b).is_one());
    }

    #[test]
    fn monomial_and_unit_contents() {
        let (x, y, e) = (v(Sym::x(1)), v(Sym::y(1)), v(atoms::unit()));
        let a = x.pow(2).mul(&y).mul(&e.pow(3));
        let b = x.mul(&y.pow(4)).mul(&e);
        assert_eq!(gcd(&a, &b), x.mul(&y));
    }

    #[test]
    fn univariate_rational() {
        let x = v(Sym::x(1));
        let a = x.pow(2).sub(&c(1)).scale(&Q::new(3.into(), 7.into()));
        let b = x.sub(&c(1)).mul(&x.add(&c(5)));
        assert_eq!(gcd(&a, &b), x.sub(&c(1)));
    }

    #[test]
    fn gcd_with_zero() {
        let x = v(Sym::x(1));
        assert_eq!(gcd(&Poly::zero(), &x.scale(&Q::from_integer(4.into()))), x);
    }
}
