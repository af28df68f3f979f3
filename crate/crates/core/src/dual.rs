//! One expression, both hp(d) readings: graded over the abstract atoms and
//! concrete at each sample point of a scenario.

use std::fmt::Write as _;

use serde::Serialize;
use symcore::{parse_expr, SymKind};

use crate::audit::PointVerdict;
use crate::concrete::{point_bindings, Binder, RootDomain};
use crate::conformal::conformal_data;
use crate::error::{CoreError, Result};
use crate::fixtures::table_for;
use crate::hpcheck::{self, Verdict};
use crate::scenario::Scenario;

#[derive(Clone, Debug, Serialize)]
pub struct DualVerdict {
    pub expression: String,
    pub degree: u32,
    pub graded: Verdict,
    pub concrete: Vec<PointVerdict>,
}

impl DualVerdict {
    /// Both readings HP(d) or Zero everywhere.
    pub fn holds(&self) -> bool {
        self.graded.is_hp() && self.concrete.iter().all(|p| p.verdict.is_hp())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "expression {}\ndegree {}", self.expression, self.degree);
        let _ = writeln!(out, "graded   {}", self.graded);
        for p in &self.concrete {
            let _ = writeln!(out, "concrete {} at x=({})", p.verdict, p.x_point.join(", "));
        }
        out
    }
}

/// Parses `text` over the scenario's dimension and decides hp(`d`) both ways.
/// Vector atoms make the expression a vector; every component is checked.
pub fn dual_check(text: &str, d: u32, sc: &Scenario) -> Result<DualVerdict> {
    let table = table_for(text, sc.n)?;
    let e = parse_expr(text, &table).map_err(|source| CoreError::Expression { key: "expression".into(), source })?;
    let graded = hpcheck::check_abstract(&e, d);
    let geo = sc.geometry()?;
    let conf = conformal_data(&geo, &sc.sigma, symcore::atoms::unit())?;
    let bd = Binder { geo: &geo, conf: Some(&conf), eps: &sc.eps, k: &sc.k };
    let vector = e.vars().iter().any(|s| s.kind() == SymKind::Vector);
    let mut concrete = Vec::new();
    for x in &sc.points {
        let dom = RootDomain::new(&geo.beta.t.alpha2, point_bindings(x, None))?;
        let comps = if vector {
            (0..sc.n).map(|i| bd.eval(&dom, &e, &[i, 0, 0])).collect::<Result<Vec<_>>>()?
        } else {
            vec![bd.eval(&dom, &e, &[0, 0, 0])?]
        };
        let verdict = if vector {
            hpcheck::check_concrete_vec(&comps, d, x)
        } else {
            hpcheck::check_concrete(&comps[0], d, sc.n, x)
        };
        concrete.push(PointVerdict { x_point: x.iter().map(|q| q.to_string()).collect(), verdict });
    }
    Ok(DualVerdict { expression: e.to_string(), degree: d, graded, concrete })
}
