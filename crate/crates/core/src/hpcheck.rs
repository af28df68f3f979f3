//! Deciding "homogeneous polynomial of degree d in y".
//!
//! The graded reading treats every atom as carrying its registered y-grade,
//! with `alpha` an opaque grade-1 atom. The concrete reading pins `x` and
//! keeps `alpha = sqrt(a_ij y^i y^j)` as an irrational function of `y`.

use std::fmt;

use serde::Serialize;
use symcore::{Poly, RatExpr, RootExpr, Sym, SymKind, VecExpr, Q};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum Status {
    #[serde(rename = "HP")]
    Hp { degree: u32 },
    NotHomogeneous,
    NotPolynomial,
    Zero,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Hp { degree } => write!(f, "HP({degree})"),
            Status::NotHomogeneous => f.write_str("NotHomogeneous"),
            Status::NotPolynomial => f.write_str("NotPolynomial"),
            Status::Zero => f.write_str("Zero"),
        }
    }
}

/// Evidence attached to a negative verdict.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Witness {
    /// Grades found in the numerator (relative to the denominator).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub grades: Vec<i64>,
    /// Surviving denominator or alpha-odd part.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub obstruction: Option<String>,
    /// The pinned x-point of a concrete check.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_point: Option<Vec<String>>,
    /// A rational y at which the surviving denominator vanishes, if one was found.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_zero: Option<Vec<String>>,
    /// Vector component (1-based) that failed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub component: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl Verdict {
    fn plain(status: Status) -> Self {
        Verdict { status, witness: None }
    }

    fn with(status: Status, w: Witness) -> Self {
        Verdict { status, witness: Some(w) }
    }

    /// HP(d) or Zero.
    pub fn is_hp(&self) -> bool {
        matches!(self.status, Status::Hp { .. } | Status::Zero)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.status)?;
        if let Some(w) = &self.witness {
            if let Some(c) = w.component {
                write!(f, " [component {c}]")?;
            }
            if !w.grades.is_empty() {
                write!(f, " grades {:?}", w.grades)?;
            }
            if let Some(o) = &w.obstruction {
                write!(f, " obstruction {o}")?;
            }
        }
        Ok(())
    }
}

fn grade_verdict(grades: Vec<i64>, d: u32) -> Verdict {
    if grades.len() == 1 && grades[0] == d as i64 {
        Verdict::plain(Status::Hp { degree: d })
    } else {
        Verdict::with(Status::NotHomogeneous, Witness { grades, ..Default::default() })
    }
}

/// Graded check: the denominator must carry grade 0 and every numerator
/// monomial grade `d`. Vector atoms count with their own grade.
pub fn check_abstract(e: &RatExpr, d: u32) -> Verdict {
    if e.is_zero() {
        return Verdict::plain(Status::Zero);
    }
    if e.den().y_grades().iter().any(|g| *g != 0) {
        return Verdict::with(
            Status::NotPolynomial,
            Witness {
                obstruction: Some(format!("{}", RatExpr::from_poly(e.den().clone()))),
                ..Default::default()
            },
        );
    }
    grade_verdict(e.num().y_grades().into_iter().collect(), d)
}

pub fn check_abstract_vec(v: &VecExpr<RatExpr>, d: u32) -> Verdict {
    check_abstract(&v.to_rat(), d)
}

fn fiber_vars(p: &Poly) -> Vec<Sym> {
    p.vars().into_iter().filter(|s| s.kind() == SymKind::Fiber).collect()
}

/// `sum_j y^j dp/dy^j == d p`.
pub fn euler_test(p: &Poly, d: u32) -> bool {
    let mut lhs = Poly::zero();
    for s in fiber_vars(p) {
        lhs = lhs.add(&p.derivative(s).mul(&Poly::var(s)));
    }
    lhs == p.scale(&Q::from_integer(d.into()))
}

/// Fiber-only grades of a polynomial.
fn fiber_grades(p: &Poly) -> Vec<i64> {
    let mut g: Vec<i64> = p
        .terms()
        .iter()
        .map(|(m, _)| {
            m.exps()
                .iter()
                .filter(|(s, _)| s.kind() == SymKind::Fiber)
                .map(|(_, e)| *e as i64)
                .sum()
        })
        .collect();
    g.sort_unstable();
    g.dedup();
    g
}

/// Small integer `y` at which `p` vanishes, other than the origin.
fn search_zero(p: &Poly, n: usize) -> Option<Vec<Q>> {
    if n > 4 {
        return None;
    }
    let vars: Vec<Sym> = (1..=n).map(Sym::y).collect();
    let mut idx = vec![-3i64; n];
    loop {
        if idx.iter().any(|v| *v != 0) {
            let vals = vars
                .iter()
                .zip(&idx)
                .map(|(s, v)| (*s, Q::from_integer((*v).into())))
                .collect();
            if p.partial_eval(&vals).is_zero() {
                return Some(idx.iter().map(|v| Q::from_integer((*v).into())).collect());
            }
        }
        let mut k = 0;
        while k < n {
            idx[k] += 1;
            if idx[k] <= 3 {
                break;
            }
            idx[k] = -3;
            k += 1;
        }
        if k == n {
            return None;
        }
    }
}

fn qs(v: &[Q]) -> Vec<String> {
    v.iter().map(|q| q.to_string()).collect()
}

/// Concrete check at a pinned x-point: no alpha-odd part, no `y` in the
/// denominator, and the Euler test on the numerator.
pub fn check_concrete(e: &RootExpr, d: u32, n: usize, x: &[Q]) -> Verdict {
    let x_point = Some(qs(x));
    if e.even().is_zero() && e.odd().is_zero() {
        return Verdict::plain(Status::Zero);
    }
    if !e.odd().is_zero() {
        return Verdict::with(
            Status::NotPolynomial,
            Witness {
                obstruction: Some(format!("alpha-odd part ({})*alpha", e.odd())),
                x_point,
                ..Default::default()
            },
        );
    }
    let p = e.even();
    if !fiber_vars(p.den()).is_empty() {
        return Verdict::with(
            Status::NotPolynomial,
            Witness {
                obstruction: Some(format!("denominator {}", RatExpr::from_poly(p.den().clone()))),
                x_point,
                y_zero: search_zero(p.den(), n).map(|v| qs(&v)),
                ..Default::default()
            },
        );
    }
    if euler_test(p.num(), d) {
        Verdict::plain(Status::Hp { degree: d })
    } else {
        Verdict::with(
            Status::NotHomogeneous,
            Witness {
                grades: fiber_grades(p.num()),
                x_point,
                ..Default::default()
            },
        )
    }
}

/// Componentwise concrete check; the first failing component is reported.
pub fn check_concrete_vec(comps: &[RootExpr], d: u32, x: &[Q]) -> Verdict {
    let n = comps.len();
    let mut all_zero = true;
    let mut first_bad: Option<Verdict> = None;
    for (i, c) in comps.iter().enumerate() {
        let v = check_concrete(c, d, n, x);
        match v.status {
            Status::Zero => {}
            Status::Hp { .. } => all_zero = false,
            _ => {
                all_zero = false;
                if first_bad.is_none() {
                    let mut w = v.witness.clone().unwrap_or_default();
                    w.component = Some(i + 1);
                    first_bad = Some(Verdict::with(v.status.clone(), w));
                }
            }
        }
    }
    match first_bad {
        Some(v) => v,
        None if all_zero => Verdict::plain(Status::Zero),
        None => Verdict::plain(Status::Hp { degree: d }),
    }
}
