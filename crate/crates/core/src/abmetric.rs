//! (alpha, beta)-metrics and the spray-level quantities built from them.
//!
//! Every formula is written once, generically over [`Field`], and runs over
//! abstract atoms (`RatExpr`), the concrete extension by `alpha`
//! (`RootExpr`) and exact point values (`QuadNum`).

use symcore::{atoms, Bivector, QuadNum, RatExpr, RootExpr, Scalar, Sym, VecExpr, Q};

use crate::error::Result;

/// Scalars that can stand for a free symbol, if the domain has symbols.
pub trait Field: Scalar {
    fn symbol(s: Sym) -> Option<Self>;
}

impl Field for RatExpr {
    fn symbol(s: Sym) -> Option<Self> {
        Some(RatExpr::var(s))
    }
}

impl Field for RootExpr {
    fn symbol(s: Sym) -> Option<Self> {
        Some(RootExpr::rational(RatExpr::var(s)))
    }
}

impl Field for QuadNum {
    fn symbol(_: Sym) -> Option<Self> {
        None
    }
}

pub(crate) fn div<F: Scalar>(a: F, b: &F) -> Result<F> {
    Ok(a.try_div(b)?)
}

fn c<F: Scalar>(k: i64) -> F {
    F::from_int(k)
}

/// `u ^ v` as a bivector.
pub fn wedge<F: Scalar>(u: &VecExpr<F>, v: &VecExpr<F>) -> Bivector<F> {
    let mut w = Bivector::zero();
    for (a, ca) in u.terms() {
        for (b, cb) in v.terms() {
            w.add_wedge(*a, *b, ca.clone() * cb.clone());
        }
    }
    w
}

pub fn scale_biv<F: Scalar>(w: &Bivector<F>, f: &F) -> Bivector<F> {
    let mut out = Bivector::zero();
    for ((a, b), c) in w.terms() {
        out.add_wedge(*a, *b, c.clone() * f.clone());
    }
    out
}

/// `L(alpha, beta)` with its alpha/beta partials.
#[derive(Clone, Debug)]
pub struct ABMetric {
    pub name: String,
    pub l: RatExpr,
    pub la: RatExpr,
    pub lb: RatExpr,
    pub laa: RatExpr,
    pub laaa: RatExpr,
}

/// Partials evaluated in some domain.
#[derive(Clone, Debug)]
pub struct Partials<F> {
    pub l: F,
    pub la: F,
    pub lb: F,
    pub laa: F,
    pub laaa: F,
}

impl ABMetric {
    pub fn new(name: &str, l: RatExpr) -> Result<Self> {
        let rules = symcore::Derivation::new();
        let (a, b) = (atoms::alpha(), atoms::beta());
        let la = l.derivative(a, &rules)?;
        let lb = l.derivative(b, &rules)?;
        let laa = la.derivative(a, &rules)?;
        let laaa = laa.derivative(a, &rules)?;
        Ok(ABMetric {
            name: name.to_string(),
            l,
            la,
            lb,
            laa,
            laaa,
        })
    }

    /// `alpha + eps*beta + k*beta^2/alpha`; `None` keeps a parameter symbolic.
    pub fn family(eps: Option<&Q>, k: Option<&Q>) -> Self {
        let (a, b) = (RatExpr::var(atoms::alpha()), RatExpr::var(atoms::beta()));
        let eps = eps.map_or_else(|| RatExpr::var(atoms::eps()), |q| RatExpr::constant(q.clone()));
        let k = k.map_or_else(|| RatExpr::var(atoms::k()), |q| RatExpr::constant(q.clone()));
        let l = &a + &(&eps * &b) + (&k * &(&b * &b)).div_ref(&a).expect("alpha is nonzero");
        Self::new("family", l).expect("polynomial partials")
    }

    pub fn kropina() -> Self {
        let (a, b) = (RatExpr::var(atoms::alpha()), RatExpr::var(atoms::beta()));
        Self::new("kropina", (&a * &a).div_ref(&b).expect("beta is nonzero")).expect("rational partials")
    }

    /// `alpha L_alpha + beta L_beta - L`; zero for a degree-one metric.
    pub fn homogeneity_residual(&self) -> RatExpr {
        let (a, b) = (RatExpr::var(atoms::alpha()), RatExpr::var(atoms::beta()));
        &(&(&a * &self.la) + &(&b * &self.lb)) - &self.l
    }

    pub fn at<F: Field>(&self, alpha: &F, beta: &F) -> Result<Partials<F>> {
        let (sa, sb) = (atoms::alpha(), atoms::beta());
        let env = |s: Sym| {
            if s == sa {
                Some(alpha.clone())
            } else if s == sb {
                Some(beta.clone())
            } else {
                F::symbol(s)
            }
        };
        Ok(Partials {
            l: self.l.eval(&env)?,
            la: self.la.eval(&env)?,
            lb: self.lb.eval(&env)?,
            laa: self.laa.eval(&env)?,
            laaa: self.laaa.eval(&env)?,
        })
    }
}

/// The scalar and vector data the formulas consume.
#[derive(Clone, Debug)]
pub struct Inputs<F: Scalar> {
    pub alpha: F,
    pub beta: F,
    pub b2: F,
    pub r00: F,
    pub s0: F,
    pub r0: F,
    pub n: F,
    pub y: VecExpr<F>,
    pub b: VecExpr<F>,
    pub si0: VecExpr<F>,
}

impl Inputs<RatExpr> {
    /// Every input is its own graded atom.
    pub fn abstract_atoms() -> Self {
        let v = |s: Sym| RatExpr::var(s);
        Inputs {
            alpha: v(atoms::alpha()),
            beta: v(atoms::beta()),
            b2: v(atoms::b2()),
            r00: v(atoms::r00()),
            s0: v(atoms::s0()),
            r0: v(atoms::r0()),
            n: v(atoms::n()),
            y: VecExpr::atom(atoms::yi(), RatExpr::one()),
            b: VecExpr::atom(atoms::bi(), RatExpr::one()),
            si0: VecExpr::atom(atoms::si0(), RatExpr::one()),
        }
    }
}

impl<F: Scalar> Inputs<F> {
    pub fn gamma2(&self) -> F {
        self.b2.clone() * self.alpha.clone() * self.alpha.clone() - self.beta.clone() * self.beta.clone()
    }
}

pub fn omega<F: Scalar>(p: &Partials<F>, i: &Inputs<F>) -> F {
    i.beta.clone() * i.beta.clone() * p.la.clone() + i.alpha.clone() * i.gamma2() * p.laa.clone()
}

pub fn big_a<F: Scalar>(p: &Partials<F>, i: &Inputs<F>) -> F {
    i.alpha.clone() * p.la.clone() * p.laaa.clone() + c::<F>(3) * p.la.clone() * p.laa.clone()
        - c::<F>(3) * i.alpha.clone() * p.laa.clone() * p.laa.clone()
}

pub fn big_b<F: Scalar>(p: &Partials<F>, i: &Inputs<F>) -> F {
    let (a, b, g2) = (i.alpha.clone(), i.beta.clone(), i.gamma2());
    let t1 = a.clone() * b.clone() * g2.clone() * p.la.clone() * p.lb.clone() * p.laaa.clone();
    let inner = (c::<F>(3) * g2.clone() - b.clone() * b.clone()) * p.la.clone() - c::<F>(4) * a * g2 * p.laa.clone();
    let t2 = b * inner * p.lb.clone() * p.laa.clone();
    t1 + t2 + omega(p, i) * p.l.clone() * p.laa.clone()
}

pub fn cstar<F: Scalar>(p: &Partials<F>, i: &Inputs<F>) -> Result<F> {
    let (a, b) = (i.alpha.clone(), i.beta.clone());
    let num = a.clone() * b * (i.r00.clone() * p.la.clone() - c::<F>(2) * a * i.s0.clone() * p.lb.clone());
    div(num, &(c::<F>(2) * omega(p, i)))
}

/// `alpha L_beta / L_alpha`.
fn c1<F: Scalar>(p: &Partials<F>, i: &Inputs<F>) -> Result<F> {
    div(i.alpha.clone() * p.lb.clone(), &p.la)
}

/// `alpha^2 L_alpha_alpha / (beta L_alpha)`.
fn c2<F: Scalar>(p: &Partials<F>, i: &Inputs<F>) -> Result<F> {
    div(
        i.alpha.clone() * i.alpha.clone() * p.laa.clone(),
        &(i.beta.clone() * p.la.clone()),
    )
}

/// The spray deviation `B^i`, with the bracket expanded over the vector slots.
pub fn spray_dev<F: Scalar>(p: &Partials<F>, i: &Inputs<F>) -> Result<VecExpr<F>> {
    let cs = cstar(p, i)?;
    let y_coeff = div(i.beta.clone() * p.lb.clone(), &(i.alpha.clone() * p.l.clone()))? - div(p.laa.clone(), &p.la)?;
    Ok(i
        .si0
        .scale(&c1(p, i)?)
        .add(&i.y.scale(&(cs.clone() * y_coeff)))
        .add(&i.b.scale(&(cs * c2(p, i)?))))
}

/// `B^ij = B^i y^j - B^j y^i`.
pub fn bij<F: Scalar>(p: &Partials<F>, i: &Inputs<F>) -> Result<Bivector<F>> {
    let first = scale_biv(&wedge(&i.si0, &i.y), &c1(p, i)?);
    let second = scale_biv(&wedge(&i.b, &i.y), &(c2(p, i)? * cstar(p, i)?));
    Ok(first.add(&second))
}

/// The trace `B^im_m` in closed form.
pub fn bim_m<F: Scalar>(p: &Partials<F>, i: &Inputs<F>) -> Result<VecExpr<F>> {
    let (a, b, n1) = (i.alpha.clone(), i.beta.clone(), i.n.clone() + F::one());
    let om = omega(p, i);
    let om2 = om.clone() * om.clone();
    let a2 = a.clone() * a.clone();
    let first = i.si0.scale(&div(n1.clone() * c1(p, i)?, &F::one())?);
    let second = i
        .b
        .scale(&(n1.clone() * a2.clone() * om.clone() * p.laa.clone()))
        .add(&i.y.scale(&(b * i.gamma2() * big_a(p, i))))
        .scale(&div(a.clone() * i.r00.clone(), &(c::<F>(2) * om2.clone()))?);
    let third = i
        .b
        .scale(&(n1 * a2.clone() * om.clone() * p.lb.clone() * p.laa.clone()))
        .add(&i.y.scale(&big_b(p, i)))
        .scale(&div(a2.clone() * i.s0.clone(), &(p.la.clone() * om2))?);
    let fourth = i.y.scale(&div(a2 * a * p.laa.clone() * i.r0.clone(), &om)?);
    Ok(first.add(&second).sub(&third).sub(&fourth))
}
