//! The bundled invariant suite: the default audit must reproduce every
//! fixture annotation, and the comparator and hp checks must behave on
//! planted inputs.

use std::fmt::Write as _;

use symcore::{Poly, RatExpr};

use crate::abmetric::{big_a, big_b, omega, ABMetric, Inputs};
use crate::audit::{run_all, AuditOptions, CheckStatus};
use crate::dual::dual_check;
use crate::error::Result;
use crate::fixtures::FixtureSet;
use crate::hpcheck::Status;
use crate::scenario::{parse_with_seed, DEFAULT_SCENARIO};

#[derive(Clone, Debug)]
pub struct Line {
    pub ok: bool,
    pub name: String,
    pub message: String,
}

#[derive(Clone, Debug, Default)]
pub struct SelftestReport {
    pub lines: Vec<Line>,
}

impl SelftestReport {
    fn push(&mut self, ok: bool, name: impl Into<String>, message: impl Into<String>) {
        self.lines.push(Line { ok, name: name.into(), message: message.into() });
    }

    pub fn passed(&self) -> bool {
        self.lines.iter().all(|l| l.ok)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for l in &self.lines {
            let tag = if l.ok { "ok  " } else { "FAIL" };
            let _ = writeln!(out, "{tag} {:<36} {}", l.name, l.message);
        }
        let bad = self.lines.iter().filter(|l| !l.ok).count();
        let _ = writeln!(out, "selftest: {} checks, {} failed", self.lines.len(), bad);
        out
    }
}

/// The printed numerator with the sign of its leading term flipped.
fn flip_one_sign(e: &RatExpr) -> RatExpr {
    let terms = e.num().terms();
    let Some((m, c)) = terms.first() else {
        return RatExpr::one();
    };
    let lead = Poly::term(m.clone(), c.clone());
    let flipped = e.num().sub(&lead.scale(&symcore::Q::from_integer(2.into())));
    RatExpr::new(flipped, e.den().clone()).expect("denominator unchanged")
}

fn derived_scalars() -> Result<Vec<(String, RatExpr)>> {
    let m = ABMetric::family(None, None);
    let i = Inputs::abstract_atoms();
    let p = m.at(&i.alpha, &i.beta)?;
    Ok(vec![
        ("partials.L_alpha".into(), m.la.clone()),
        ("partials.L_beta".into(), m.lb.clone()),
        ("partials.L_alphaalpha".into(), m.laa.clone()),
        ("partials.L_alphaalphaalpha".into(), m.laaa.clone()),
        ("scalars.Omega".into(), omega(&p, &i)),
        ("scalars.A".into(), big_a(&p, &i)),
        ("scalars.B".into(), big_b(&p, &i)),
    ])
}

pub fn run(fx: &FixtureSet, seed: Option<u64>) -> Result<SelftestReport> {
    let mut rep = SelftestReport::default();
    let sc = parse_with_seed(DEFAULT_SCENARIO, seed)?;

    // every fixture must parse
    let mut parsed = Vec::new();
    for f in fx.iter() {
        match fx.expr(&f.key(), sc.n) {
            Ok(e) => parsed.push((f.key(), e)),
            Err(e) => rep.push(false, format!("fixture {}", f.key()), format!("line {}: {e}", f.line)),
        }
    }
    if !rep.passed() {
        return Ok(rep);
    }

    let audit = run_all(&sc, fx, &AuditOptions::default())?;
    for f in fx.iter() {
        let key = f.key();
        let used: Vec<_> = audit.checks.iter().filter(|c| c.fixture.as_deref() == Some(key.as_str())).collect();
        if used.is_empty() {
            rep.push(false, format!("fixture {key}"), "not used by any check");
            continue;
        }
        for c in used {
            let ok = c.matches_annotation();
            let msg = format!("annotated {}, audit {}", f.expect, c.status);
            rep.push(ok, format!("fixture {key}"), if ok { msg } else { format!("{msg} ({})", c.id) });
        }
    }
    for c in audit.checks.iter().filter(|c| c.fixture.is_none() && c.expected.is_none()) {
        rep.push(c.status == CheckStatus::Pass, format!("internal {}", c.id), c.detail.clone());
    }

    // a matching printed formula with one sign flipped must stop matching
    let derived = derived_scalars()?;
    let mut flipped = 0;
    for (key, e) in &parsed {
        let Some(d) = derived.iter().find(|(k, _)| k == key).map(|(_, d)| d) else { continue };
        let agrees = (d - e).is_zero();
        let caught = !(d - &flip_one_sign(e)).is_zero();
        if agrees && caught {
            flipped += 1;
        } else {
            rep.push(false, format!("sign flip {key}"), format!("agrees {agrees}, flip detected {caught}"));
        }
    }
    rep.push(flipped == derived.len(), "comparator sign flip", format!("{flipped} planted sign errors detected"));

    let hp = [("y1*y2", 2, true), ("alpha", 1, false), ("r00 + s0", 2, false), ("alpha^2", 2, true)];
    for (text, d, expect) in hp {
        let v = dual_check(text, d, &sc)?;
        rep.push(v.holds() == expect, format!("hpcheck {text} d={d}"), format!("graded {}", v.graded));
    }
    let v = dual_check("alpha", 1, &sc)?;
    rep.push(
        v.concrete.iter().all(|p| p.verdict.status == Status::NotPolynomial),
        "hpcheck alpha concrete",
        "alpha is irrational in y",
    );
    Ok(rep)
}
