//! Running the generic formulas on a concrete space.
//!
//! A [`Domain`] says how a rational function of `x`, `y` and `E` becomes a
//! scalar: with `y` left symbolic and `alpha` adjoined ([`RootDomain`]), or
//! as an exact number at one point ([`PointDomain`]).

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use symcore::{atoms, QuadNum, RatExpr, RootExpr, Scalar, Sym, SymError, SymKind, VecExpr, Q};

use crate::abmetric::{Field, Inputs};
use crate::conformal::{ConfInputs, ConformalData};
use crate::error::{CoreError, Result};
use crate::riemann::Geometry;

pub trait Domain {
    type F: Field;
    fn lift(&self, e: &RatExpr) -> Result<Self::F>;
    fn alpha(&self) -> &Self::F;
}

/// `K(alpha)` over rational functions, with some symbols pinned or shifted.
#[derive(Clone, Debug)]
pub struct RootDomain {
    pins: HashMap<Sym, Q>,
    shift: HashMap<Sym, RatExpr>,
    square: Arc<RatExpr>,
    alpha: RootExpr,
}

impl RootDomain {
    pub fn new(alpha2: &RatExpr, pins: HashMap<Sym, Q>) -> Result<Self> {
        let square = Arc::new(alpha2.partial_eval(&pins)?);
        let alpha = RootExpr::alpha(square.clone());
        Ok(RootDomain { pins, shift: HashMap::new(), square, alpha })
    }

    /// Symbols replaced by expressions, e.g. `y1 -> 3 + s`.
    pub fn shifted(alpha2: &RatExpr, shift: HashMap<Sym, RatExpr>) -> Result<Self> {
        let square = Arc::new(alpha2.substitute(&shift)?);
        let alpha = RootExpr::alpha(square.clone());
        Ok(RootDomain { pins: HashMap::new(), shift, square, alpha })
    }

    pub fn square(&self) -> &Arc<RatExpr> {
        &self.square
    }

    pub fn pins(&self) -> &HashMap<Sym, Q> {
        &self.pins
    }
}

impl Domain for RootDomain {
    type F = RootExpr;

    fn lift(&self, e: &RatExpr) -> Result<RootExpr> {
        let v = if !self.shift.is_empty() {
            e.substitute(&self.shift)?
        } else if self.pins.is_empty() {
            e.clone()
        } else {
            e.partial_eval(&self.pins)?
        };
        Ok(RootExpr::new(v, RatExpr::zero(), self.square.clone()))
    }

    fn alpha(&self) -> &RootExpr {
        &self.alpha
    }
}

/// Exact values at a point; `alpha` is the positive square root.
#[derive(Clone, Debug)]
pub struct PointDomain {
    vals: HashMap<Sym, Q>,
    alpha: QuadNum,
}

impl PointDomain {
    pub fn new(alpha2: &RatExpr, vals: HashMap<Sym, Q>) -> Result<Self> {
        let a2 = alpha2.partial_eval(&vals)?;
        let q = a2
            .as_constant()
            .ok_or_else(|| CoreError::Validation(format!("alpha^2 not fully evaluated at point: {a2}")))?;
        if q <= Q::from_integer(0.into()) {
            return Err(CoreError::Validation("alpha^2 is not positive at the sample point".into()));
        }
        Ok(PointDomain { alpha: QuadNum::sqrt(&q), vals })
    }

    pub fn vals(&self) -> &HashMap<Sym, Q> {
        &self.vals
    }
}

impl Domain for PointDomain {
    type F = QuadNum;

    fn lift(&self, e: &RatExpr) -> Result<QuadNum> {
        Ok(e.eval(&|s| self.vals.get(&s).map(|q| QuadNum::rational(q.clone())))?)
    }

    fn alpha(&self) -> &QuadNum {
        &self.alpha
    }
}

/// Inputs of a concrete space, with `alpha` supplied by the caller.
pub fn inputs<D: Domain>(dom: &D, geo: &Geometry, alpha: D::F) -> Result<Inputs<D::F>> {
    let t = &geo.beta.t;
    let one = || D::F::one();
    Ok(Inputs {
        alpha,
        beta: dom.lift(&t.beta)?,
        b2: dom.lift(&geo.beta.b2)?,
        r00: dom.lift(&t.r00)?,
        s0: dom.lift(&t.s0)?,
        r0: dom.lift(&t.r0)?,
        n: D::F::from_int(geo.n() as i64),
        y: VecExpr::atom(atoms::yi(), one()),
        b: VecExpr::atom(atoms::bi(), one()),
        si0: VecExpr::atom(atoms::si0(), one()),
    })
}

pub fn conf_inputs<D: Domain>(dom: &D, c: &ConformalData) -> Result<ConfInputs<D::F>> {
    Ok(ConfInputs {
        sigma0: dom.lift(&c.sigma0)?,
        rho: dom.lift(&c.rho)?,
        sigma_up: VecExpr::atom(atoms::sigmai(), D::F::one()),
    })
}

/// Values of abstract atoms and index placeholders on a concrete space.
#[derive(Clone, Copy)]
pub struct Binder<'a> {
    pub geo: &'a Geometry,
    pub conf: Option<&'a ConformalData>,
    pub eps: &'a Q,
    pub k: &'a Q,
}

fn placeholder_parts(name: &str) -> Option<(&str, Vec<usize>)> {
    let (base, idx) = name.rsplit_once('_')?;
    let slots = idx
        .chars()
        .map(|c| match c {
            'i' => Some(0),
            'j' => Some(1),
            'k' => Some(2),
            _ => None,
        })
        .collect::<Option<Vec<_>>>()?;
    Some((base, slots))
}

impl Binder<'_> {
    /// Value of `s` at the free-index assignment `idx` (0-based `i, j, k`).
    /// `alpha` is not bound here.
    pub fn value(&self, s: Sym, idx: &[usize]) -> Option<RatExpr> {
        let (g, b, t) = (self.geo, &self.geo.beta, &self.geo.beta.t);
        let c = self.conf;
        let at = |k: usize| idx.get(k).copied();
        match s.kind() {
            SymKind::Coordinate | SymKind::Fiber | SymKind::Unit => return Some(RatExpr::var(s)),
            SymKind::Vector => {
                let i = at(0)?;
                return match s.name().as_str() {
                    "yi" => Some(RatExpr::var(Sym::y(i + 1))),
                    "bi" => Some(b.b_up[i].clone()),
                    "si0" => Some(t.si0[i].clone()),
                    "sigmai" => c.map(|c| c.sigma_up[i].clone()),
                    "gamma00i" => Some(t.gamma00[i].clone()),
                    _ => None,
                };
            }
            SymKind::Scalar => {}
        }
        let name = s.name();
        let v = match name.as_str() {
            "beta" => t.beta.clone(),
            "b2" => b.b2.clone(),
            "r00" => t.r00.clone(),
            "s0" => t.s0.clone(),
            "r0" => t.r0.clone(),
            "n" => RatExpr::int(g.n() as i64),
            "eps" => RatExpr::constant(self.eps.clone()),
            "k" => RatExpr::constant(self.k.clone()),
            "sigma0" => c?.sigma0.clone(),
            "rho" => c?.rho.clone(),
            "sigma" => c?.sigma.clone(),
            _ => {
                let (base, slots) = placeholder_parts(&name)?;
                let ix: Vec<usize> = slots.iter().map(|&k| at(k)).collect::<Option<_>>()?;
                match (base, ix.as_slice()) {
                    ("a", [i, j]) => g.metric.a[*i][*j].clone(),
                    ("ainv", [i, j]) => g.metric.a_inv[*i][*j].clone(),
                    ("b", [i]) => b.b[*i].clone(),
                    ("bup", [i]) => b.b_up[*i].clone(),
                    ("sigma", [i]) => c?.sigma_low[*i].clone(),
                    ("sigmaup", [i]) => c?.sigma_up[*i].clone(),
                    ("cov", [i, j]) => b.cov_b[*i][*j].clone(),
                    ("r", [i, j]) => b.r[*i][*j].clone(),
                    ("s", [i, j]) => b.s[*i][*j].clone(),
                    ("sup", [i, j]) => b.s_up[*i][*j].clone(),
                    ("s", [j]) => b.s_low[*j].clone(),
                    ("r", [j]) => b.r_low[*j].clone(),
                    ("gamma", [i, j, k]) => g.chr.get(*i, *j, *k).clone(),
                    ("delta", [i, j]) => RatExpr::int((i == j) as i64),
                    ("y", [i]) => RatExpr::var(Sym::y(*i + 1)),
                    _ => return None,
                }
            }
        };
        Some(v)
    }

    /// Evaluates an expression in abstract atoms on this space at `idx`.
    pub fn eval<D: Domain>(&self, dom: &D, e: &RatExpr, idx: &[usize]) -> Result<D::F> {
        let mut env: HashMap<Sym, D::F> = HashMap::new();
        for s in e.vars() {
            if s == atoms::alpha() {
                env.insert(s, dom.alpha().clone());
                continue;
            }
            let v = self.value(s, idx).ok_or_else(|| SymError::Unbound(s.name()))?;
            env.insert(s, dom.lift(&v)?);
        }
        Ok(e.eval(&|s| env.get(&s).cloned())?)
    }

    /// Component `i` of a vector built from the standard atoms.
    pub fn component<D: Domain>(&self, dom: &D, v: &VecExpr<D::F>, i: usize) -> Result<D::F> {
        let mut acc = D::F::zero();
        for (a, coeff) in v.terms() {
            let val = self.value(*a, &[i]).ok_or_else(|| SymError::Unbound(a.name()))?;
            acc = acc + coeff.clone() * dom.lift(&val)?;
        }
        Ok(acc)
    }

    pub fn components<D: Domain>(&self, dom: &D, v: &VecExpr<D::F>) -> Result<Vec<D::F>> {
        (0..self.geo.n()).map(|i| self.component(dom, v, i)).collect()
    }
}

/// Every symbol other than `alpha` appearing in `e`.
pub fn free_symbols(e: &RatExpr) -> BTreeSet<Sym> {
    e.vars().into_iter().filter(|s| *s != atoms::alpha()).collect()
}

/// Coordinate bindings `x_i -> vals[i]` (and `y_i` when given).
pub fn point_bindings(x: &[Q], y: Option<&[Q]>) -> HashMap<Sym, Q> {
    let mut m: HashMap<Sym, Q> = x.iter().enumerate().map(|(i, q)| (Sym::x(i + 1), q.clone())).collect();
    if let Some(y) = y {
        m.extend(y.iter().enumerate().map(|(i, q)| (Sym::y(i + 1), q.clone())));
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abmetric::{bim_m, spray_dev, ABMetric};
    use symcore::{parse_expr, Derivation, SymbolTable};

    fn p(s: &str) -> RatExpr {
        parse_expr(s, &SymbolTable::full(3)).unwrap()
    }

    fn q(n: i64) -> Q {
        Q::from_integer(n.into())
    }

    fn sample() -> Geometry {
        let a = vec![vec![p("1+x2^2"), p("x1")], vec![p("x1"), p("2+x1^2")]];
        Geometry::new(a, &[p("x2"), p("x1*x2+1")], Derivation::new()).unwrap()
    }

    #[test]
    fn placeholders_resolve() {
        let g = sample();
        let (e, k) = (q(1), q(0));
        let bd = Binder { geo: &g, conf: None, eps: &e, k: &k };
        let a12 = Sym::placeholder("a_ij").unwrap();
        assert_eq!(bd.value(a12, &[0, 1]), Some(p("x1")));
        let d = Sym::placeholder("delta_ij").unwrap();
        assert_eq!(bd.value(d, &[1, 1]), Some(RatExpr::one()));
        assert_eq!(bd.value(atoms::rho(), &[]), None);
    }

    #[test]
    fn root_and_point_domains_agree() {
        let g = sample();
        let m = ABMetric::family(Some(&q(1)), Some(&Q::new(1.into(), 2.into())));
        let pins = point_bindings(&[q(1), q(2)], None);
        let rd = RootDomain::new(&g.beta.t.alpha2, pins.clone()).unwrap();
        let ri = inputs(&rd, &g, rd.alpha().clone()).unwrap();
        let pr = m.at(&ri.alpha, &ri.beta).unwrap();
        let sym = bim_m(&pr, &ri).unwrap();

        let vals = point_bindings(&[q(1), q(2)], Some(&[q(3), q(-1)]));
        let pd = PointDomain::new(&g.beta.t.alpha2, vals.clone()).unwrap();
        let pi = inputs(&pd, &g, pd.alpha().clone()).unwrap();
        let pp = m.at(&pi.alpha, &pi.beta).unwrap();
        let num = bim_m(&pp, &pi).unwrap();
        let (e, k) = (q(1), q(0));
        let bd = Binder { geo: &g, conf: None, eps: &e, k: &k };
        for i in 0..2 {
            let s = bd.component(&rd, &sym, i).unwrap();
            let env = |s: Sym| vals.get(&s).map(|q| QuadNum::rational(q.clone()));
            let at = s.eval(&env, pd.alpha()).unwrap();
            assert_eq!(at, bd.component(&pd, &num, i).unwrap());
        }
        assert!(!spray_dev(&pp, &pi).unwrap().is_zero());
    }
}
