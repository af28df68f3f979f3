//! Conformal change `L -> E L` with `E = e^sigma`.
//!
//! The barred space is built two ways: directly, by recomputing every tensor
//! from `E^2 a` and `E b`, and through closed forms in the unbarred data.
//! Residuals between the two are what the audit reports.

use std::collections::HashMap;

use symcore::{Bivector, Derivation, RatExpr, Scalar, Sym, VecExpr};

use crate::abmetric::{div, omega, scale_biv, wedge, Inputs, Partials};
use crate::error::Result;
use crate::riemann::{contract1, Geometry, Mat};

/// `sigma` and the quantities derived from it on a concrete space.
#[derive(Clone, Debug)]
pub struct ConformalData {
    pub unit: Sym,
    pub sigma: RatExpr,
    /// `sigma_j = d_j sigma`.
    pub sigma_low: Vec<RatExpr>,
    /// `sigma^i = a^ij sigma_j`.
    pub sigma_up: Vec<RatExpr>,
    pub sigma0: RatExpr,
    /// `rho = sigma_r b^r`.
    pub rho: RatExpr,
}

pub fn conformal_data(geo: &Geometry, sigma: &RatExpr, unit: Sym) -> Result<ConformalData> {
    let n = geo.n();
    let rules = &geo.metric.rules;
    let sigma_low = (0..n)
        .map(|j| Ok(sigma.derivative(Sym::x(j + 1), rules)?))
        .collect::<Result<Vec<_>>>()?;
    let sigma_up = (0..n)
        .map(|i| (0..n).fold(RatExpr::zero(), |acc, j| acc + &geo.metric.a_inv[i][j] * &sigma_low[j]))
        .collect();
    let rho = (0..n).fold(RatExpr::zero(), |acc, r| acc + &sigma_low[r] * &geo.beta.b_up[r]);
    Ok(ConformalData {
        unit,
        sigma: sigma.clone(),
        sigma0: contract1(&sigma_low),
        sigma_low,
        sigma_up,
        rho,
    })
}

/// Derivation rules with `d_j E = E sigma_j` added.
pub fn barred_rules(geo: &Geometry, c: &ConformalData) -> Derivation {
    let grad: HashMap<Sym, RatExpr> = c
        .sigma_low
        .iter()
        .enumerate()
        .map(|(j, s)| (Sym::x(j + 1), s.clone()))
        .collect();
    geo.metric.rules.clone().with_unit(c.unit, grad)
}

/// Recomputes everything from `E^2 a_ij` and `E b_i`.
pub fn apply_conformal(geo: &Geometry, c: &ConformalData) -> Result<Geometry> {
    let e = RatExpr::var(c.unit);
    let e2 = &e * &e;
    let a: Mat = geo.metric.a.iter().map(|row| row.iter().map(|v| &e2 * v).collect()).collect();
    let b: Vec<RatExpr> = geo.beta.b.iter().map(|v| &e * v).collect();
    Geometry::new(a, &b, barred_rules(geo, c))
}

/// The closed forms of the barred block in unbarred data.
pub struct ClosedForms<'a> {
    pub geo: &'a Geometry,
    pub c: &'a ConformalData,
}

fn delta(i: usize, j: usize) -> RatExpr {
    if i == j {
        RatExpr::one()
    } else {
        RatExpr::zero()
    }
}

impl ClosedForms<'_> {
    fn e(&self) -> RatExpr {
        RatExpr::var(self.c.unit)
    }

    fn einv(&self) -> RatExpr {
        RatExpr::var_pow(self.c.unit, -1).expect("unit atoms admit negative powers")
    }

    pub fn gamma(&self, i: usize, j: usize, k: usize) -> RatExpr {
        let c = self.c;
        self.geo.chr.get(i, j, k).clone() + &delta(i, j) * &c.sigma_low[k] + &delta(i, k) * &c.sigma_low[j]
            - &c.sigma_up[i] * &self.geo.metric.a[j][k]
    }

    pub fn cov_b(&self, i: usize, j: usize) -> RatExpr {
        let (g, c) = (self.geo, self.c);
        self.e() * (g.beta.cov_b[i][j].clone() + &c.rho * &g.metric.a[i][j] - &c.sigma_low[i] * &g.beta.b[j])
    }

    pub fn r(&self, i: usize, j: usize) -> RatExpr {
        let (g, c) = (self.geo, self.c);
        let sym = &g.beta.b[i] * &c.sigma_low[j] + &g.beta.b[j] * &c.sigma_low[i];
        self.e() * (g.beta.r[i][j].clone() + &c.rho * &g.metric.a[i][j] - RatExpr::frac(1, 2) * sym)
    }

    pub fn s(&self, i: usize, j: usize) -> RatExpr {
        let (g, c) = (self.geo, self.c);
        let alt = &g.beta.b[i] * &c.sigma_low[j] - &g.beta.b[j] * &c.sigma_low[i];
        self.e() * (g.beta.s[i][j].clone() + RatExpr::frac(1, 2) * alt)
    }

    pub fn s_up(&self, i: usize, j: usize) -> RatExpr {
        let (g, c) = (self.geo, self.c);
        let alt = &g.beta.b_up[i] * &c.sigma_low[j] - &g.beta.b[j] * &c.sigma_up[i];
        self.einv() * (g.beta.s_up[i][j].clone() + RatExpr::frac(1, 2) * alt)
    }

    pub fn s_low(&self, j: usize) -> RatExpr {
        let (g, c) = (self.geo, self.c);
        g.beta.s_low[j].clone() + RatExpr::frac(1, 2) * (&g.beta.b2 * &c.sigma_low[j] - &c.rho * &g.beta.b[j])
    }

    pub fn gamma00(&self, i: usize) -> RatExpr {
        let (g, c) = (self.geo, self.c);
        let y = RatExpr::var(Sym::y(i + 1));
        g.beta.t.gamma00[i].clone() + RatExpr::int(2) * (&c.sigma0 * &y) - &g.beta.t.alpha2 * &c.sigma_up[i]
    }

    pub fn r00(&self) -> RatExpr {
        let (t, c) = (&self.geo.beta.t, self.c);
        self.e() * (t.r00.clone() + &c.rho * &t.alpha2 - &c.sigma0 * &t.beta)
    }

    pub fn si0(&self, i: usize) -> RatExpr {
        let (g, c) = (self.geo, self.c);
        let t = &g.beta.t;
        let corr = &g.beta.b_up[i] * &c.sigma0 - &t.beta * &c.sigma_up[i];
        self.einv() * (t.si0[i].clone() + RatExpr::frac(1, 2) * corr)
    }

    pub fn s0(&self) -> RatExpr {
        let (g, c) = (self.geo, self.c);
        let t = &g.beta.t;
        t.s0.clone() + RatExpr::frac(1, 2) * (&g.beta.b2 * &c.sigma0 - &c.rho * &t.beta)
    }

    pub fn r0(&self) -> RatExpr {
        let (g, c) = (self.geo, self.c);
        let t = &g.beta.t;
        t.r0.clone() + RatExpr::frac(1, 2) * (&c.rho * &t.beta - &g.beta.b2 * &c.sigma0)
    }
}

/// One closed-form identity checked against direct recomputation.
#[derive(Clone, Debug)]
pub struct BlockResidual {
    pub id: &'static str,
    /// Index tuples (0-based) with a nonzero residual, and that residual.
    pub nonzero: Vec<(Vec<usize>, RatExpr)>,
    pub entries: usize,
}

impl BlockResidual {
    pub fn is_zero(&self) -> bool {
        self.nonzero.is_empty()
    }
}

fn residuals(
    id: &'static str,
    idx: Vec<Vec<usize>>,
    direct: impl Fn(&[usize]) -> RatExpr,
    closed: impl Fn(&[usize]) -> RatExpr,
) -> BlockResidual {
    let entries = idx.len();
    let nonzero = idx
        .into_iter()
        .filter_map(|ix| {
            let r = direct(&ix) - closed(&ix);
            (!r.is_zero()).then_some((ix, r))
        })
        .collect();
    BlockResidual { id, nonzero, entries }
}

fn tuples(n: usize, arity: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..n).map(move |i| {
                    let mut q = p.clone();
                    q.push(i);
                    q
                })
            })
            .collect();
    }
    out
}

/// Residuals of every closed form of the barred block (derived versions).
pub fn transform_beta_block(geo: &Geometry, c: &ConformalData, barred: &Geometry) -> Vec<BlockResidual> {
    let n = geo.n();
    let cf = ClosedForms { geo, c };
    let (bb, bt) = (&barred.beta, &barred.beta.t);
    vec![
        residuals("gamma_ijk", tuples(n, 3), |x| barred.chr.get(x[0], x[1], x[2]).clone(), |x| {
            cf.gamma(x[0], x[1], x[2])
        }),
        residuals("cov_b", tuples(n, 2), |x| bb.cov_b[x[0]][x[1]].clone(), |x| cf.cov_b(x[0], x[1])),
        residuals("r_ij", tuples(n, 2), |x| bb.r[x[0]][x[1]].clone(), |x| cf.r(x[0], x[1])),
        residuals("s_ij", tuples(n, 2), |x| bb.s[x[0]][x[1]].clone(), |x| cf.s(x[0], x[1])),
        residuals("s^i_j", tuples(n, 2), |x| bb.s_up[x[0]][x[1]].clone(), |x| cf.s_up(x[0], x[1])),
        residuals("s_j", tuples(n, 1), |x| bb.s_low[x[0]].clone(), |x| cf.s_low(x[0])),
        residuals("b2", vec![vec![]], |_| bb.b2.clone(), |_| geo.beta.b2.clone()),
        residuals("gamma^i_00", tuples(n, 1), |x| bt.gamma00[x[0]].clone(), |x| cf.gamma00(x[0])),
        residuals("r00", vec![vec![]], |_| bt.r00.clone(), |_| cf.r00()),
        residuals("s^i_0", tuples(n, 1), |x| bt.si0[x[0]].clone(), |x| cf.si0(x[0])),
        residuals("s0", vec![vec![]], |_| bt.s0.clone(), |_| cf.s0()),
        residuals("r0", vec![vec![]], |_| bt.r0.clone(), |_| cf.r0()),
    ]
}

/// Conformal data entering the generic formulas.
#[derive(Clone, Debug)]
pub struct ConfInputs<F: Scalar> {
    pub sigma0: F,
    pub rho: F,
    pub sigma_up: VecExpr<F>,
}

impl ConfInputs<RatExpr> {
    pub fn abstract_atoms() -> Self {
        ConfInputs {
            sigma0: RatExpr::var(symcore::atoms::sigma0()),
            rho: RatExpr::var(symcore::atoms::rho()),
            sigma_up: VecExpr::atom(symcore::atoms::sigmai(), RatExpr::one()),
        }
    }
}

fn half<F: Scalar>() -> F {
    F::from_q(&symcore::Q::new(1.into(), 2.into()))
}

/// `rho alpha^2 - sigma0 beta`.
fn u_term<F: Scalar>(i: &Inputs<F>, c: &ConfInputs<F>) -> F {
    c.rho.clone() * i.alpha.clone() * i.alpha.clone() - c.sigma0.clone() * i.beta.clone()
}

/// `b^2 sigma0 - rho beta`.
fn w_term<F: Scalar>(i: &Inputs<F>, c: &ConfInputs<F>) -> F {
    i.b2.clone() * c.sigma0.clone() - c.rho.clone() * i.beta.clone()
}

/// The barred inputs through the closed forms; `e` is the value of `E`.
pub fn barred_inputs<F: Scalar>(i: &Inputs<F>, c: &ConfInputs<F>, e: &F) -> Result<Inputs<F>> {
    let einv = e.inv()?;
    let h = half::<F>();
    let si0 = i
        .si0
        .add(&i.b.scale(&(h.clone() * c.sigma0.clone())))
        .sub(&c.sigma_up.scale(&(h.clone() * i.beta.clone())))
        .scale(&einv);
    Ok(Inputs {
        alpha: e.clone() * i.alpha.clone(),
        beta: e.clone() * i.beta.clone(),
        b2: i.b2.clone(),
        r00: e.clone() * (i.r00.clone() + u_term(i, c)),
        s0: i.s0.clone() + h.clone() * w_term(i, c),
        r0: i.r0.clone() - h * w_term(i, c),
        n: i.n.clone(),
        y: i.y.clone(),
        b: i.b.scale(&einv),
        si0,
    })
}

/// `D*` with `C*bar = E (C* + D*)`.
pub fn dstar<F: Scalar>(p: &Partials<F>, i: &Inputs<F>, c: &ConfInputs<F>) -> Result<F> {
    let (a, b) = (i.alpha.clone(), i.beta.clone());
    let num = a.clone() * b * (u_term(i, c) * p.la.clone() - a * w_term(i, c) * p.lb.clone());
    div(num, &(F::from_int(2) * omega(p, i)))
}

/// `C^ij = B^ij bar - B^ij`, coefficients on `b ^ y` and `sigma ^ y`.
pub fn cij<F: Scalar>(p: &Partials<F>, i: &Inputs<F>, c: &ConfInputs<F>) -> Result<Bivector<F>> {
    let a = i.alpha.clone();
    let first = div(a.clone() * c.sigma0.clone() * p.lb.clone(), &(F::from_int(2) * p.la.clone()))?;
    let second = div(a.clone() * a.clone() * p.laa.clone() * dstar(p, i, c)?, &(i.beta.clone() * p.la.clone()))?;
    let third = div(a * i.beta.clone() * p.lb.clone(), &(F::from_int(2) * p.la.clone()))?;
    Ok(scale_biv(&wedge(&i.b, &i.y), &(first + second)).sub(&scale_biv(&wedge(&c.sigma_up, &i.y), &third)))
}

/// `2 K^im_m` split into a leading term and four remainders.
#[derive(Clone, Debug)]
pub struct KTerms<F: Scalar> {
    pub lead: VecExpr<F>,
    pub p1: VecExpr<F>,
    pub p2: VecExpr<F>,
    pub p3: VecExpr<F>,
    pub p4: VecExpr<F>,
}

impl<F: Scalar> KTerms<F> {
    pub fn total(&self) -> VecExpr<F> {
        self.lead.add(&self.p1).add(&self.p2).add(&self.p3).add(&self.p4)
    }

    pub fn parts(&self) -> [(&'static str, &VecExpr<F>); 5] {
        [("lead", &self.lead), ("p1", &self.p1), ("p2", &self.p2), ("p3", &self.p3), ("p4", &self.p4)]
    }
}

pub fn k2_terms<F: Scalar>(p: &Partials<F>, i: &Inputs<F>, c: &ConfInputs<F>) -> Result<KTerms<F>> {
    let (a, b) = (i.alpha.clone(), i.beta.clone());
    let n1 = i.n.clone() + F::one();
    let (u, w) = (u_term(i, c), w_term(i, c));
    let om = omega(p, i);
    let om2 = om.clone() * om.clone();
    let a2 = a.clone() * a.clone();
    let lead_c = div(n1.clone() * a.clone() * p.lb.clone(), &p.la)?;
    let lead = i.b.scale(&c.sigma0).sub(&c.sigma_up.scale(&b)).scale(&lead_c);
    let p1_r = div(n1.clone() * a2.clone() * a.clone() * p.laa.clone() * u.clone(), &om)?;
    let p1_s = div(n1 * a2.clone() * a2.clone() * p.lb.clone() * p.laa.clone() * w.clone(), &(p.la.clone() * om.clone()))?;
    let p1 = i.b.scale(&(p1_r - p1_s));
    let p2 = i
        .y
        .scale(&div(a.clone() * b * i.gamma2() * crate::abmetric::big_a(p, i) * u, &om2)?);
    let p3 = i.y.scale(&div(
        -(a2.clone() * crate::abmetric::big_b(p, i) * w.clone()),
        &(p.la.clone() * om2),
    )?);
    let p4 = i.y.scale(&div(a2 * a * p.laa.clone() * w, &om)?);
    Ok(KTerms { lead, p1, p2, p3, p4 })
}

/// `K^im_m`.
pub fn k_im_m<F: Scalar>(p: &Partials<F>, i: &Inputs<F>, c: &ConfInputs<F>) -> Result<VecExpr<F>> {
    Ok(k2_terms(p, i, c)?.total().scale(&half()))
}
