//! Independent second routes to the spray-level formulas.
//!
//! * The geodesic spray of `F = L^2 / 2`, solved from the Euler-Lagrange
//!   system at exact points with hyper-dual derivatives, against
//!   `gamma^i_00 + 2 B^i`.
//! * The trace `(n+1) B^i - (d B^m / d y^m) y^i`, differentiated exactly in
//!   `y`, against the closed form of `B^im_m`.

use std::collections::HashMap;
use std::ops::{Add, Mul, Neg, Sub};

use symcore::{Derivation, QuadNum, RatExpr, RootExpr, Scalar, Sym, Q};

use crate::abmetric::{bim_m, spray_dev, ABMetric, Field};
use crate::concrete::{inputs, point_bindings, Binder, Domain, PointDomain, RootDomain};
use crate::error::{CoreError, Result};
use crate::riemann::Geometry;

/// `a + b e1 + c e2 + d e1 e2` over `Q(alpha)` with `e1^2 = e2^2 = 0`:
/// one pass yields a value, two first derivatives and the mixed second
/// derivative, all exact.
#[derive(Clone, Debug, PartialEq)]
pub struct HyperDual {
    pub a: QuadNum,
    pub b: QuadNum,
    pub c: QuadNum,
    pub d: QuadNum,
}

impl HyperDual {
    pub fn new(a: QuadNum, b: QuadNum, c: QuadNum, d: QuadNum) -> Self {
        HyperDual { a, b, c, d }
    }

    fn constant(a: QuadNum) -> Self {
        HyperDual::new(a, QuadNum::zero(), QuadNum::zero(), QuadNum::zero())
    }

    /// Square root, given the root `r` of the real part.
    fn sqrt_with(&self, r: &QuadNum) -> Result<Self> {
        let two_r = QuadNum::from_int(2) * r.clone();
        let inv = two_r.inv()?;
        let b = self.b.clone() * inv.clone();
        let c = self.c.clone() * inv.clone();
        // d/(2r) - bc/(4r^3)
        let d = (self.d.clone() - QuadNum::from_int(2) * b.clone() * c.clone()) * inv;
        Ok(HyperDual::new(r.clone(), b, c, d))
    }
}

impl Add for HyperDual {
    type Output = HyperDual;
    fn add(self, o: HyperDual) -> HyperDual {
        HyperDual::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }
}

impl Sub for HyperDual {
    type Output = HyperDual;
    fn sub(self, o: HyperDual) -> HyperDual {
        HyperDual::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }
}

impl Mul for HyperDual {
    type Output = HyperDual;
    fn mul(self, o: HyperDual) -> HyperDual {
        let d = self.a.clone() * o.d.clone()
            + self.b.clone() * o.c.clone()
            + self.c.clone() * o.b.clone()
            + self.d * o.a.clone();
        HyperDual::new(
            self.a.clone() * o.a.clone(),
            self.a.clone() * o.b + self.b * o.a.clone(),
            self.a * o.c + self.c * o.a,
            d,
        )
    }
}

impl Neg for HyperDual {
    type Output = HyperDual;
    fn neg(self) -> HyperDual {
        HyperDual::new(-self.a, -self.b, -self.c, -self.d)
    }
}

impl Scalar for HyperDual {
    fn zero() -> Self {
        HyperDual::constant(QuadNum::zero())
    }

    fn one() -> Self {
        HyperDual::constant(QuadNum::one())
    }

    fn from_q(q: &Q) -> Self {
        HyperDual::constant(QuadNum::rational(q.clone()))
    }

    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero() && self.c.is_zero() && self.d.is_zero()
    }

    fn inv(&self) -> symcore::Result<Self> {
        let ia = self.a.inv()?;
        let ia2 = ia.clone() * ia.clone();
        let b = -(self.b.clone() * ia2.clone());
        let c = -(self.c.clone() * ia2.clone());
        let d = (QuadNum::from_int(2) * self.b.clone() * self.c.clone() * ia.clone() - self.d.clone()) * ia2;
        Ok(HyperDual::new(ia, b, c, d))
    }
}

impl Field for HyperDual {
    fn symbol(_: Sym) -> Option<Self> {
        None
    }
}

/// Euler-Lagrange data of `F = L^2 / 2` at exact points.
///
/// Derivatives at `(x0, y0)` come from hyper-dual evaluation along
/// `x = x0 + e1 e_r`, `y = y0 + e2 e_l` (or `y = y0 + e1 e_i + e2 e_l`).
/// The space must be free of unit atoms.
pub struct SprayOracle<'a> {
    geo: &'a Geometry,
    metric: &'a ABMetric,
    x: Vec<Q>,
}

impl<'a> SprayOracle<'a> {
    pub fn new(geo: &'a Geometry, metric: &'a ABMetric, x: &[Q]) -> Result<Self> {
        Ok(SprayOracle { geo, metric, x: x.to_vec() })
    }

    /// `F` in hyper-dual form; `dx[s]`, `dy[s]` are the `(e1, e2)` shifts of `x^s`, `y^s`.
    fn energy(&self, y: &[Q], alpha: &QuadNum, dx: &[(i64, i64)], dy: &[(i64, i64)]) -> Result<HyperDual> {
        let n = self.geo.n();
        let coord = |v: &Q, (e1, e2): (i64, i64)| {
            HyperDual::new(QuadNum::rational(v.clone()), QuadNum::from_int(e1), QuadNum::from_int(e2), QuadNum::zero())
        };
        let mut env: HashMap<Sym, HyperDual> = HashMap::new();
        for s in 0..n {
            env.insert(Sym::x(s + 1), coord(&self.x[s], dx[s]));
            env.insert(Sym::y(s + 1), coord(&y[s], dy[s]));
        }
        let lookup = |s: Sym| env.get(&s).cloned();
        let alpha2: HyperDual = self.geo.beta.t.alpha2.eval(&lookup)?;
        let beta: HyperDual = self.geo.beta.t.beta.eval(&lookup)?;
        let a = alpha2.sqrt_with(alpha)?;
        let l = self.metric.at(&a, &beta)?.l;
        Ok((l.clone() * l).scale(&Q::new(1.into(), 2.into())))
    }

    /// `2 G^i` at `(x0, y)`; `alpha` is the root of `a_ij y^i y^j` there.
    pub fn two_g(&self, y: &[Q], alpha: &QuadNum) -> Result<Vec<QuadNum>> {
        let n = self.geo.n();
        let unit = |i: usize, e: (i64, i64)| -> Vec<(i64, i64)> { (0..n).map(|s| if s == i { e } else { (0, 0) }).collect() };
        // fx[r] = dF/dx^r, fxy[r][l] = d^2F/dx^r dy^l, g[i][l] = d^2F/dy^i dy^l
        let mut fx = Vec::with_capacity(n);
        let mut fxy = vec![Vec::with_capacity(n); n];
        for (r, row) in fxy.iter_mut().enumerate() {
            for l in 0..n {
                let f = self.energy(y, alpha, &unit(r, (1, 0)), &unit(l, (0, 1)))?;
                if l == 0 {
                    fx.push(f.b.clone());
                }
                row.push(f.d);
            }
        }
        let none = vec![(0, 0); n];
        let mut g = vec![vec![QuadNum::zero(); n]; n];
        for i in 0..n {
            for l in i..n {
                let mut dy = none.clone();
                dy[i].0 += 1;
                dy[l].1 += 1;
                let v = self.energy(y, alpha, &none, &dy)?.d;
                g[i][l] = v.clone();
                g[l][i] = v;
            }
        }
        let mut m = vec![vec![QuadNum::zero(); n + 1]; n];
        for l in 0..n {
            for i in 0..n {
                m[l][i] = g[i][l].clone();
            }
            let mut rhs = -fx[l].clone();
            for r in 0..n {
                rhs = rhs + QuadNum::rational(y[r].clone()) * fxy[r][l].clone();
            }
            m[l][n] = rhs;
        }
        solve(m)
    }
}

/// Gaussian elimination on an augmented `n x (n+1)` system.
fn solve(mut m: Vec<Vec<QuadNum>>) -> Result<Vec<QuadNum>> {
    let n = m.len();
    for col in 0..n {
        let piv = (col..n)
            .find(|&r| !m[r][col].is_zero())
            .ok_or_else(|| CoreError::Singular("fundamental tensor is singular at the sample point".into()))?;
        m.swap(piv, col);
        let inv = m[col][col].inv()?;
        for j in col..=n {
            m[col][j] = m[col][j].clone() * inv.clone();
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for j in col..=n {
                    m[r][j] = m[r][j].clone() - f.clone() * m[col][j].clone();
                }
            }
        }
    }
    Ok(m.into_iter().map(|row| row[n].clone()).collect())
}

/// `2G^i - gamma^i_00 - 2B^i` at one point; zero when the split holds.
pub fn spray_residual(oracle: &SprayOracle, geo: &Geometry, metric: &ABMetric, y: &[Q]) -> Result<Vec<QuadNum>> {
    let dom = PointDomain::new(&geo.beta.t.alpha2, point_bindings(&oracle.x, Some(y)))?;
    let two_g = oracle.two_g(y, dom.alpha())?;
    let inp = inputs(&dom, geo, dom.alpha().clone())?;
    let p = metric.at(&inp.alpha, &inp.beta)?;
    let b = spray_dev(&p, &inp)?;
    let (eps, k) = (Q::from_integer(0.into()), Q::from_integer(0.into()));
    let bd = Binder { geo, conf: None, eps: &eps, k: &k };
    let two = QuadNum::from_int(2);
    (0..geo.n())
        .map(|i| Ok(two_g[i].clone() - dom.lift(&geo.beta.t.gamma00[i])? - two.clone() * bd.component(&dom, &b, i)?))
        .collect()
}

/// `(n+1)B^i - (dB^m/dy^m) y^i - B^im_m` with `y` symbolic at pinned `x`.
pub fn trace_residual(geo: &Geometry, metric: &ABMetric, x: &[Q]) -> Result<Vec<RootExpr>> {
    let n = geo.n();
    let pinned = geo.pin(&point_bindings(x, None))?;
    let dom = RootDomain::new(&pinned.beta.t.alpha2, Default::default())?;
    let inp = inputs(&dom, &pinned, dom.alpha().clone())?;
    let p = metric.at(&inp.alpha, &inp.beta)?;
    let (eps, k) = (Q::from_integer(0.into()), Q::from_integer(0.into()));
    let bd = Binder { geo: &pinned, conf: None, eps: &eps, k: &k };
    let b = bd.components(&dom, &spray_dev(&p, &inp)?)?;
    let closed = bd.components(&dom, &bim_m(&p, &inp)?)?;
    let rules = &pinned.metric.rules;
    let mut div = RootExpr::zero();
    for (m, bm) in b.iter().enumerate() {
        div = div + bm.derivative(Sym::y(m + 1), rules)?;
    }
    let n1 = RootExpr::from_int(n as i64 + 1);
    (0..n)
        .map(|i| {
            let yi = dom.lift(&symcore::RatExpr::var(Sym::y(i + 1)))?;
            Ok(n1.clone() * b[i].clone() - div.clone() * yi - closed[i].clone())
        })
        .collect()
}

/// The trace formula at an exact `(x, y)`: each `dB^m/dy^m` is taken along
/// the shift `y^m += s`, so only one parameter is symbolic.
pub fn trace_residual_at(geo: &Geometry, metric: &ABMetric, x: &[Q], y: &[Q]) -> Result<Vec<QuadNum>> {
    let n = geo.n();
    let s = Sym::placeholder("s_shift")?;
    let (eps, k) = (Q::from_integer(0.into()), Q::from_integer(0.into()));
    let bd = Binder { geo, conf: None, eps: &eps, k: &k };
    let rules = Derivation::new();
    let pt = PointDomain::new(&geo.beta.t.alpha2, point_bindings(x, Some(y)))?;
    let at0 = |e: &RootExpr| -> Result<QuadNum> { Ok(e.eval(&|v: Sym| (v == s).then(QuadNum::zero), pt.alpha())?) };
    let mut div = QuadNum::zero();
    for m in 0..n {
        let mut shift: HashMap<Sym, RatExpr> = HashMap::new();
        for j in 0..n {
            shift.insert(Sym::x(j + 1), RatExpr::constant(x[j].clone()));
            let yj = RatExpr::constant(y[j].clone());
            shift.insert(Sym::y(j + 1), if j == m { yj + RatExpr::var(s) } else { yj });
        }
        let dom = RootDomain::shifted(&geo.beta.t.alpha2, shift)?;
        let inp = inputs(&dom, geo, dom.alpha().clone())?;
        let p = metric.at(&inp.alpha, &inp.beta)?;
        let bm = bd.component(&dom, &spray_dev(&p, &inp)?, m)?;
        div = div + at0(&bm.derivative(s, &rules)?)?;
    }
    let inp = inputs(&pt, geo, pt.alpha().clone())?;
    let p = metric.at(&inp.alpha, &inp.beta)?;
    let b = bd.components(&pt, &spray_dev(&p, &inp)?)?;
    let closed = bd.components(&pt, &bim_m(&p, &inp)?)?;
    let n1 = QuadNum::from_int(n as i64 + 1);
    Ok((0..n)
        .map(|i| n1.clone() * b[i].clone() - div.clone() * QuadNum::rational(y[i].clone()) - closed[i].clone())
        .collect())
}
