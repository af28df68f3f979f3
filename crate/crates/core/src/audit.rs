//! The audit: each printed formula against an independent recomputation,
//! plus internal consistency checks guarding the recomputation itself.
//!
//! Status: PASS when the comparison vanishes exactly. A nonzero comparison
//! is a FINDING when the fixture is annotated `finding` (printed form
//! inconsistent, recomputation consistent) and a FAIL otherwise. Internal
//! checks have no fixture, so any nonzero residual there is a FAIL.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use symcore::gcd::lcm;
use symcore::{atoms, Bivector, Monomial, QuadNum, RatExpr, Scalar, Sym, SymError, SymKind, VectorForm, Q};

use crate::abmetric::{big_a, big_b, bij, bim_m, cstar, omega, ABMetric, Inputs};
use crate::concrete::{conf_inputs, inputs, point_bindings, Binder, Domain, PointDomain, RootDomain};
use crate::conformal::{
    apply_conformal, barred_inputs, cij, conformal_data, dstar, k2_terms, k_im_m, transform_beta_block, ConfInputs,
    ConformalData,
};
use crate::error::{CoreError, Result};
use crate::fixtures::{expand, Expect, FixtureSet};
use crate::hpcheck::{self, Verdict};
use crate::oracles::{spray_residual, trace_residual, trace_residual_at, SprayOracle};
use crate::riemann::Geometry;
use crate::scenario::{Scenario, ScenarioMode, ScenarioSummary};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL: &str = "finsler-audit";
pub const R0_CONVENTION: &str =
    "r_j := b^i r_ij and r0 := r_j y^j (adopted: r0 enters B^im_m without a definition)";
/// Sample points per metric in the K-consistency check.
pub const K_POINTS: usize = 20;
const CLIP: usize = 400;
const TRACE_ANCHOR: &str = "(n+1)B^i - (dB^m/dy^m) y^i = B^im_m, derivative taken exactly in y";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Case {
    Family,
    Randers,
    Beta2,
    Matsumoto1,
    Square,
    KropinaExt,
}

impl Case {
    pub const ALL: [Case; 6] = [Case::Family, Case::Randers, Case::Beta2, Case::Matsumoto1, Case::Square, Case::KropinaExt];

    pub fn name(self) -> &'static str {
        match self {
            Case::Family => "family",
            Case::Randers => "randers",
            Case::Beta2 => "beta2",
            Case::Matsumoto1 => "matsumoto1",
            Case::Square => "square",
            Case::KropinaExt => "kropina-ext",
        }
    }

    pub fn anchor(self) -> &'static str {
        match self {
            Case::Family => "family alpha + eps beta + k beta^2/alpha",
            Case::Randers => "Randers case alpha + beta (eps=1, k=0)",
            Case::Beta2 => "case alpha + beta^2/alpha (eps=0, k=1)",
            Case::Matsumoto1 => "first approximate Matsumoto case (eps=1, k=1)",
            Case::Square => "square metric case (eps=2, k=1)",
            Case::KropinaExt => "Kropina alpha^2/beta (extension, not among the printed cases)",
        }
    }

    fn params(self) -> Option<(i64, i64)> {
        match self {
            Case::Randers => Some((1, 0)),
            Case::Beta2 => Some((0, 1)),
            Case::Matsumoto1 => Some((1, 1)),
            Case::Square => Some((2, 1)),
            _ => None,
        }
    }

    /// The metric run on a concrete space; the family takes the scenario's parameters.
    pub fn metric(self, eps: &Q, k: &Q) -> ABMetric {
        match (self, self.params()) {
            (Case::KropinaExt, _) => ABMetric::kropina(),
            (_, Some((e, kk))) => ABMetric::family(Some(&Q::from_integer(e.into())), Some(&Q::from_integer(kk.into()))),
            _ => ABMetric::family(Some(eps), Some(k)),
        }
    }

    /// The metric for symbol-level comparisons; the family keeps `eps`, `k` free.
    pub fn abstract_metric(self) -> ABMetric {
        match self {
            Case::Family => ABMetric::family(None, None),
            other => other.metric(&Q::from_integer(0.into()), &Q::from_integer(0.into())),
        }
    }

    /// `k` as an expression, for the `alpha^2 - k beta^2` denominator.
    fn k_expr(self) -> Option<RatExpr> {
        match (self, self.params()) {
            (Case::Family, _) => Some(RatExpr::var(atoms::k())),
            (_, Some((_, k))) => Some(RatExpr::int(k)),
            _ => None,
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Case {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Case::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown case `{s}` (expected one of family, randers, beta2, matsumoto1, square, kropina-ext)"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum CheckStatus {
    Pass,
    Finding,
    Fail,
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckStatus::Pass => "PASS",
            CheckStatus::Finding => "FINDING",
            CheckStatus::Fail => "FAIL",
        })
    }
}

pub fn classify(zero: bool, expect: Option<Expect>) -> CheckStatus {
    match (zero, expect) {
        (true, _) => CheckStatus::Pass,
        (false, Some(Expect::Finding)) => CheckStatus::Finding,
        (false, _) => CheckStatus::Fail,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TermMismatch {
    pub monomial: String,
    pub derived: String,
    pub printed: String,
}

/// Numerators of both sides over a common denominator, listing every
/// monomial whose coefficients differ.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TermDiff {
    pub denominator: String,
    pub mismatched: Vec<TermMismatch>,
}

pub fn term_diff(derived: &RatExpr, printed: &RatExpr) -> TermDiff {
    let den = lcm(derived.den(), printed.den());
    let lift = |e: &RatExpr| e.num().mul(&den.div_exact(e.den()).expect("lcm is a multiple"));
    let mut coeffs: BTreeMap<Monomial, (Q, Q)> = BTreeMap::new();
    let zero = Q::from_integer(0.into());
    for (m, c) in lift(derived).terms() {
        coeffs.entry(m.clone()).or_insert((zero.clone(), zero.clone())).0 = c.clone();
    }
    for (m, c) in lift(printed).terms() {
        coeffs.entry(m.clone()).or_insert((zero.clone(), zero.clone())).1 = c.clone();
    }
    let mismatched = coeffs
        .into_iter()
        .filter(|(_, (d, p))| d != p)
        .map(|(m, (d, p))| TermMismatch {
            monomial: m.to_string(),
            derived: d.to_string(),
            printed: p.to_string(),
        })
        .collect();
    TermDiff { denominator: RatExpr::from_poly(den).to_string(), mismatched }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CheckWitness {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_point: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_point: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_value: Option<String>,
    /// Free-index assignment, 1-based.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub grades: Vec<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub id: String,
    pub anchor: String,
    pub status: CheckStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixture: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<Expect>,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diff: Option<TermDiff>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<CheckWitness>,
}

impl CheckRecord {
    /// Whether the outcome matches the fixture annotation.
    pub fn matches_annotation(&self) -> bool {
        match self.expected {
            Some(Expect::Pass) => self.status == CheckStatus::Pass,
            Some(Expect::Finding) => self.status == CheckStatus::Finding,
            None => self.status == CheckStatus::Pass,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointVerdict {
    pub x_point: Vec<String>,
    pub verdict: Verdict,
}

/// Graded and concrete hp(d) verdicts side by side.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerdictRecord {
    pub case: Case,
    pub subject: String,
    pub degree: u32,
    pub graded: Verdict,
    pub concrete: Vec<PointVerdict>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub pass: usize,
    pub finding: usize,
    pub fail: usize,
    pub exit_code: i32,
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditReport {
    pub schema_version: u32,
    pub tool: &'static str,
    pub scenario: ScenarioSummary,
    pub seed: u64,
    pub cases: Vec<Case>,
    pub conventions: Vec<String>,
    pub checks: Vec<CheckRecord>,
    pub verdicts: Vec<VerdictRecord>,
    pub summary: Summary,
    pub timings_ms: BTreeMap<String, u64>,
}

impl AuditReport {
    pub fn check(&self, id: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn verdict(&self, case: Case, subject: &str) -> Option<&VerdictRecord> {
        self.verdicts.iter().find(|v| v.case == case && v.subject == subject)
    }
}

fn summarize(checks: &[CheckRecord]) -> Summary {
    let count = |s| checks.iter().filter(|c| c.status == s).count();
    let (pass, finding, fail) = (count(CheckStatus::Pass), count(CheckStatus::Finding), count(CheckStatus::Fail));
    let exit_code = if fail > 0 {
        1
    } else if finding > 0 {
        3
    } else {
        0
    };
    Summary { total: checks.len(), pass, finding, fail, exit_code }
}

#[derive(Clone, Debug)]
pub struct AuditOptions {
    pub cases: Vec<Case>,
    pub k_points: usize,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions { cases: Case::ALL.to_vec(), k_points: K_POINTS }
    }
}

fn clip(s: String) -> String {
    if s.len() <= CLIP {
        return s;
    }
    let mut cut = CLIP;
    while !s.is_char_boundary(cut) {
        cut -= 1;
    }
    format!("{} ... ({} chars)", &s[..cut], s.len())
}

fn qs(v: &[Q]) -> Vec<String> {
    v.iter().map(|q| q.to_string()).collect()
}

fn q(n: i64, d: i64) -> Q {
    Q::new(n.into(), d.into())
}

/// The concrete space, its conformal data and the directly recomputed barred space.
pub struct Space {
    pub geo: Geometry,
    pub conf: ConformalData,
    pub barred: Geometry,
}

impl Space {
    pub fn new(sc: &Scenario) -> Result<Self> {
        let geo = sc.geometry()?;
        let conf = conformal_data(&geo, &sc.sigma, atoms::unit())?;
        let barred = apply_conformal(&geo, &conf)?;
        Ok(Space { geo, conf, barred })
    }

    pub fn binder<'a>(&'a self, eps: &'a Q, k: &'a Q) -> Binder<'a> {
        Binder { geo: &self.geo, conf: Some(&self.conf), eps, k }
    }

    pub fn barred_binder<'a>(&'a self, eps: &'a Q, k: &'a Q) -> Binder<'a> {
        Binder { geo: &self.barred, conf: Some(&self.conf), eps, k }
    }
}

/// Metric-level names in fixtures, as abstract formulas of `m`.
fn metric_defs(m: &ABMetric) -> Result<HashMap<&'static str, RatExpr>> {
    let i = Inputs::abstract_atoms();
    let c = ConfInputs::abstract_atoms();
    let p = m.at(&i.alpha, &i.beta)?;
    Ok(HashMap::from([
        ("L", m.l.clone()),
        ("La", m.la.clone()),
        ("Lb", m.lb.clone()),
        ("Laa", m.laa.clone()),
        ("Laaa", m.laaa.clone()),
        ("Omega", omega(&p, &i)),
        ("bigA", big_a(&p, &i)),
        ("bigB", big_b(&p, &i)),
        ("Cstar", cstar(&p, &i)?),
        ("Dstar", dstar(&p, &i, &c)?),
    ]))
}

/// All assignments of the index letters, as `[i, j, k]` slots.
fn assignments(n: usize, letters: &str) -> Vec<[usize; 3]> {
    let mut out = vec![[0usize; 3]];
    for c in letters.chars() {
        let slot = match c {
            'i' => 0,
            'j' => 1,
            _ => 2,
        };
        out = out
            .into_iter()
            .flat_map(|a| {
                (0..n).map(move |v| {
                    let mut b = a;
                    b[slot] = v;
                    b
                })
            })
            .collect();
    }
    out
}

fn index_label(letters: &str, a: &[usize; 3]) -> Option<String> {
    if letters.is_empty() {
        return None;
    }
    let parts: Vec<String> = letters
        .chars()
        .map(|c| {
            let v = match c {
                'i' => a[0],
                'j' => a[1],
                _ => a[2],
            };
            format!("{c}={}", v + 1)
        })
        .collect();
    Some(parts.join(" "))
}

fn has_vector_atoms(e: &RatExpr) -> bool {
    e.vars().iter().any(|s| s.kind() == SymKind::Vector)
}

/// Index-consistency note for a printed vector formula.
fn vector_note(e: &RatExpr, scalar_expected: bool) -> Option<String> {
    if scalar_expected {
        return has_vector_atoms(e).then(|| "free index i in a scalar identity".to_string());
    }
    match VectorForm::split(e) {
        Ok(f) if !f.nonlinear.is_empty() => Some("products of vector atoms (b^i y^i) in a free-index formula".into()),
        Ok(f) if !f.scalar.is_zero() => Some("terms without a free index in a free-index formula".into()),
        Ok(_) => None,
        Err(e) => Some(e.to_string()),
    }
}

/// Running tally of an evaluated comparison.
#[derive(Default)]
struct Tally {
    entries: usize,
    nonzero: usize,
    first: Option<(CheckWitness, String)>,
}

impl Tally {
    fn add(&mut self, zero: bool, witness: impl FnOnce() -> (CheckWitness, String)) {
        self.entries += 1;
        if !zero {
            self.nonzero += 1;
            if self.first.is_none() {
                self.first = Some(witness());
            }
        }
    }

    fn merge(&mut self, other: Tally) {
        self.entries += other.entries;
        self.nonzero += other.nonzero;
        if self.first.is_none() {
            self.first = other.first;
        }
    }

    fn detail(&self, what: &str) -> String {
        if self.nonzero == 0 {
            format!("residual 0 in all {} {what}", self.entries)
        } else {
            format!("nonzero residual in {} of {} {what}", self.nonzero, self.entries)
        }
    }
}

struct Auditor<'a> {
    sc: &'a Scenario,
    fx: &'a FixtureSet,
    opts: &'a AuditOptions,
    checks: Vec<CheckRecord>,
    verdicts: Vec<VerdictRecord>,
    timings: BTreeMap<String, u64>,
}

impl Auditor<'_> {
    fn push(&mut self, r: CheckRecord) {
        self.checks.push(r);
    }

    fn internal(&mut self, id: &str, anchor: &str, zero: bool, detail: String, witness: Option<(CheckWitness, String)>) {
        let (witness, residual) = match witness {
            Some((w, r)) if !zero => (Some(w), Some(r)),
            _ => (None, None),
        };
        self.push(CheckRecord {
            id: id.into(),
            anchor: anchor.into(),
            status: classify(zero, None),
            fixture: None,
            expected: None,
            detail,
            residual,
            diff: None,
            witness,
        });
    }

    fn from_tally(&mut self, id: &str, anchor: &str, key: Option<&str>, t: Tally, what: &str, note: Option<String>) -> Result<()> {
        let expected = key.map(|k| self.fx.get(k).map(|f| f.expect)).transpose()?;
        let zero = t.nonzero == 0;
        let detail = t.detail(what);
        let (witness, residual) = match t.first {
            Some((mut w, r)) => {
                w.note = note.clone();
                (Some(w), Some(clip(r)))
            }
            None => (note.clone().map(|n| CheckWitness { note: Some(n), ..Default::default() }), None),
        };
        self.push(CheckRecord {
            id: id.into(),
            anchor: anchor.into(),
            status: classify(zero, expected),
            fixture: key.map(String::from),
            expected,
            detail,
            residual,
            diff: None,
            witness: if zero { None } else { witness },
        });
        Ok(())
    }

    /// Symbol-level comparison of a derived expression with a fixture.
    fn compare(&mut self, id: &str, anchor: &str, key: &str, derived: &RatExpr, printed: &RatExpr, free_index: bool) -> Result<()> {
        let fx = self.fx.get(key)?;
        let r = derived - printed;
        let zero = r.is_zero();
        let note = vector_note(printed, !free_index);
        let (diff, witness) = if zero {
            (None, None)
        } else {
            let d = term_diff(derived, printed);
            let w = CheckWitness { note, ..Default::default() };
            (Some(d), Some(w))
        };
        let detail = match &diff {
            None => "canonical difference is 0".to_string(),
            Some(d) => format!("{} mismatched monomials over a common denominator", d.mismatched.len()),
        };
        self.push(CheckRecord {
            id: id.into(),
            anchor: anchor.into(),
            status: classify(zero, Some(fx.expect)),
            fixture: Some(key.into()),
            expected: Some(fx.expect),
            detail,
            residual: (!zero).then(|| clip(r.to_string())),
            diff,
            witness,
        });
        Ok(())
    }

    fn timed<T>(&mut self, name: &str, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        let t = Instant::now();
        let out = f(self)?;
        self.timings.insert(name.into(), t.elapsed().as_millis() as u64);
        Ok(out)
    }

    fn partials(&mut self) -> Result<()> {
        let m = ABMetric::family(None, None);
        let derived = [
            ("L_alpha", &m.la),
            ("L_beta", &m.lb),
            ("L_alphaalpha", &m.laa),
            ("L_alphaalphaalpha", &m.laaa),
        ];
        for (name, d) in derived {
            let key = format!("partials.{name}");
            let printed = self.fx.expr(&key, self.sc.n)?;
            self.compare(&key, &format!("family partial {name}"), &key, d, &printed, false)?;
        }
        let h = m.homogeneity_residual();
        self.internal(
            "partials.homogeneity",
            "alpha L_alpha + beta L_beta = L",
            h.is_zero(),
            "Euler relation for the family".into(),
            Some((CheckWitness::default(), h.to_string())),
        );
        let zero_k = ABMetric::family(None, Some(&Q::from_integer(0.into())));
        self.internal(
            "partials.k0_laaa",
            "k = 0 specialization of L_alphaalphaalpha",
            zero_k.laaa.is_zero(),
            "L_alphaalphaalpha vanishes at k = 0".into(),
            Some((CheckWitness::default(), zero_k.laaa.to_string())),
        );
        Ok(())
    }

    fn scalars(&mut self) -> Result<()> {
        let m = ABMetric::family(None, None);
        let i = Inputs::abstract_atoms();
        let p = m.at(&i.alpha, &i.beta)?;
        let derived = [("Omega", omega(&p, &i)), ("A", big_a(&p, &i)), ("B", big_b(&p, &i))];
        for (name, d) in derived {
            let key = format!("scalars.{name}");
            let printed = self.fx.expr(&key, self.sc.n)?;
            self.compare(&key, &format!("family scalar {name}"), &key, &d, &printed, false)?;
        }
        Ok(())
    }

    /// Transformation laws at the symbol level, through the closed forms of the barred inputs.
    fn laws(&mut self) -> Result<()> {
        let m = ABMetric::family(None, None);
        let i = Inputs::abstract_atoms();
        let c = ConfInputs::abstract_atoms();
        let e = RatExpr::var(atoms::unit());
        let bi = barred_inputs(&i, &c, &e)?;
        let (p, pb) = (m.at(&i.alpha, &i.beta)?, m.at(&bi.alpha, &bi.beta)?);
        let e2 = &e * &e;
        let laws = [
            ("laws.omega", "Omega bar = E^2 Omega", omega(&pb, &bi) - &e2 * &omega(&p, &i)),
            ("laws.A", "A bar = A / E", big_a(&pb, &bi) - big_a(&p, &i).div_ref(&e)?),
            ("laws.B", "B bar = E^2 B", big_b(&pb, &bi) - &e2 * &big_b(&p, &i)),
            (
                "laws.cstar",
                "C* bar = E (C* + D*), derived D*",
                cstar(&pb, &bi)? - &e * &(cstar(&p, &i)? + dstar(&p, &i, &c)?),
            ),
            (
                "laws.cij",
                "B^ij bar - B^ij = C^ij, derived C^ij",
                bij(&pb, &bi)?.sub(&bij(&p, &i)?).sub(&cij(&p, &i, &c)?).terms().fold(RatExpr::zero(), |a, (_, v)| {
                    a + v.clone() * v.clone()
                }),
            ),
            (
                "laws.k",
                "B^im_m bar - B^im_m = K^im_m",
                bim_m(&pb, &bi)?.sub(&bim_m(&p, &i)?).sub(&k_im_m(&p, &i, &c)?).to_rat(),
            ),
        ];
        for (id, anchor, r) in laws {
            let zero = r.is_zero();
            self.internal(
                id,
                anchor,
                zero,
                "symbol level, family with eps and k free".into(),
                Some((CheckWitness::default(), clip(r.to_string()))),
            );
        }
        Ok(())
    }

    fn cases_abstract(&mut self) -> Result<()> {
        let i = Inputs::abstract_atoms();
        let c = ConfInputs::abstract_atoms();
        for case in self.opts.cases.clone() {
            let section = match case {
                Case::KropinaExt => continue,
                other => other.name(),
            };
            let m = case.abstract_metric();
            let p = m.at(&i.alpha, &i.beta)?;
            let terms = k2_terms(&p, &i, &c)?;
            if case == Case::Randers {
                let key = "randers.total";
                let printed = self.fx.expr(key, self.sc.n)?;
                self.compare(key, "Randers 2K^im_m", key, &terms.total().to_rat(), &printed, true)?;
                continue;
            }
            let mut printed_total = RatExpr::zero();
            let mut any_finding = false;
            for (part, derived) in terms.parts() {
                let key = format!("{section}.{part}");
                let printed = self.fx.expr(&key, self.sc.n)?;
                any_finding |= self.fx.get(&key)?.expect == Expect::Finding;
                printed_total = printed_total + printed.clone();
                let anchor = format!("{}: 2K^im_m {part}", case.anchor());
                self.compare(&key, &anchor, &key, &derived.to_rat(), &printed, true)?;
            }
            let r = terms.total().to_rat() - printed_total;
            let zero = r.is_zero();
            let expected = if any_finding { Expect::Finding } else { Expect::Pass };
            self.push(CheckRecord {
                id: format!("{section}.total"),
                anchor: format!("{}: 2K^im_m as printed, all terms", case.anchor()),
                status: classify(zero, Some(expected)),
                fixture: None,
                expected: Some(expected),
                detail: if zero { "canonical difference is 0".into() } else { "sum of printed terms differs from derived 2K^im_m".into() },
                residual: (!zero).then(|| clip(r.to_string())),
                diff: None,
                witness: (!zero).then(|| CheckWitness { note: Some("see the per-term records".into()), ..Default::default() }),
            });
        }
        if self.opts.cases.contains(&Case::Family) {
            let m = ABMetric::family(None, None);
            let p = m.at(&i.alpha, &i.beta)?;
            let defs = metric_defs(&m)?;
            let key = "conformal.k_general";
            let printed = expand(&self.fx.expr(key, self.sc.n)?, &defs)?;
            let derived = k2_terms(&p, &i, &c)?.total().to_rat();
            self.compare("conformal.k_general.symbolic", "general 2K^im_m, specialized to the family", key, &derived, &printed, true)?;
        }
        Ok(())
    }

    fn lint(&mut self) -> Result<()> {
        let i = Inputs::abstract_atoms();
        for case in self.opts.cases.clone() {
            let Some(kx) = case.k_expr() else { continue };
            let key = format!("lint.{}", case.name());
            if self.fx.get(&key).is_err() {
                continue;
            }
            let fx_expect = self.fx.get(&key)?.expect;
            let printed = self.fx.expr(&key, self.sc.n)?;
            let grades = |e: &RatExpr| -> Vec<i64> { e.y_grade_split().into_keys().collect() };
            let pg = grades(&printed);
            let ok = pg == [3];
            self.push(CheckRecord {
                id: format!("{key}.printed"),
                anchor: format!("{}: printed leading coefficient", case.anchor()),
                status: classify(ok, Some(fx_expect)),
                fixture: Some(key.clone()),
                expected: Some(fx_expect),
                detail: format!("y-grades {pg:?}, expected [3]"),
                residual: None,
                diff: None,
                witness: (!ok).then(|| CheckWitness {
                    grades: pg.clone(),
                    note: Some(format!("printed coefficient {printed}")),
                    ..Default::default()
                }),
            });
            let m = case.abstract_metric();
            let p = m.at(&i.alpha, &i.beta)?;
            let den = &(&i.alpha * &i.alpha) - &(&kx * &(&i.beta * &i.beta));
            let coeff = (&i.alpha * &p.lb).div_ref(&p.la)? * den;
            let dg = grades(&coeff);
            self.internal(
                &format!("{key}.derived"),
                &format!("{}: derived leading coefficient {coeff}", case.anchor()),
                dg == [3],
                format!("y-grades {dg:?}, expected [3]"),
                Some((CheckWitness { grades: dg.clone(), ..Default::default() }, coeff.to_string())),
            );
        }
        Ok(())
    }

    fn block(&mut self, sp: &Space) -> Result<()> {
        let n = self.sc.n;
        let (eps, k) = (self.sc.eps.clone(), self.sc.k.clone());
        let bd = sp.binder(&eps, &k);
        let dom = RootDomain::new(&sp.geo.beta.t.alpha2, HashMap::new())?;
        let (bb, bt) = (&sp.barred.beta, &sp.barred.beta.t);
        type Direct<'b> = Box<dyn Fn(&[usize; 3]) -> RatExpr + 'b>;
        let items: Vec<(&str, &str, &str, Direct)> = vec![
            ("christoffel", "ijk", "Christoffel symbols under conformal change", Box::new(|a| sp.barred.chr.get(a[0], a[1], a[2]).clone())),
            ("cov_b", "ij", "covariant derivative of b bar", Box::new(|a| bb.cov_b[a[0]][a[1]].clone())),
            ("r_ij", "ij", "r_ij bar", Box::new(|a| bb.r[a[0]][a[1]].clone())),
            ("s_ij", "ij", "s_ij bar", Box::new(|a| bb.s[a[0]][a[1]].clone())),
            ("s_up", "ij", "s^i_j bar", Box::new(|a| bb.s_up[a[0]][a[1]].clone())),
            ("s_j", "j", "s_j bar", Box::new(|a| bb.s_low[a[1]].clone())),
            ("gamma00", "i", "gamma^i_00 bar", Box::new(|a| bt.gamma00[a[0]].clone())),
            ("r00", "", "r00 bar", Box::new(|_| bt.r00.clone())),
            ("si0", "i", "s^i_0 bar as printed", Box::new(|a| bt.si0[a[0]].clone())),
            ("s0", "", "s0 bar as printed", Box::new(|_| bt.s0.clone())),
        ];
        for (name, letters, anchor, direct) in items {
            let key = format!("block.{name}");
            let printed = self.fx.expr(&key, n)?;
            let scalar = !letters.contains('i');
            let note = vector_note(&printed, scalar);
            let letters = if scalar && has_vector_atoms(&printed) { format!("{letters}i") } else { letters.to_string() };
            let mut t = Tally::default();
            for a in assignments(n, &letters) {
                let r = dom.lift(&direct(&a))? - bd.eval(&dom, &printed, &a)?;
                t.add(r.is_zero(), || {
                    (CheckWitness { index: index_label(&letters, &a), ..Default::default() }, r.to_string())
                });
            }
            self.from_tally(&key, anchor, Some(&key), t, "components (x, y, E symbolic)", note)?;
        }
        for r in transform_beta_block(&sp.geo, &sp.conf, &sp.barred) {
            let detail = if r.is_zero() {
                format!("residual 0 in all {} components", r.entries)
            } else {
                format!("nonzero residual in {} of {} components", r.nonzero.len(), r.entries)
            };
            let w = r.nonzero.first().map(|(ix, v)| {
                let label = ix.iter().map(|v| (v + 1).to_string()).collect::<Vec<_>>().join(",");
                (CheckWitness { index: Some(label), ..Default::default() }, clip(v.to_string()))
            });
            self.internal(&format!("block.closed.{}", r.id), &format!("derived closed form of {} bar", r.id), r.is_zero(), detail, w);
        }
        Ok(())
    }

    /// Alpha-dependent conformal identities at each pinned x, `y` and `E` symbolic.
    fn conformal(&mut self, sp: &Space) -> Result<()> {
        let n = self.sc.n;
        let (eps, k) = (self.sc.eps.clone(), self.sc.k.clone());
        let m = self.sc.family();
        let defs = metric_defs(&m)?;
        let printed: BTreeMap<&'static str, RatExpr> = ["dstar", "cstar_bar", "cij", "omega_bar", "a_bar", "b_bar", "k_general"]
            .into_iter()
            .map(|id| Ok((id, expand(&self.fx.expr(&format!("conformal.{id}"), n)?, &defs)?)))
            .collect::<Result<_>>()?;
        let mut tallies: BTreeMap<&'static str, Tally> = BTreeMap::new();
        let (bd, bbd) = (sp.binder(&eps, &k), sp.barred_binder(&eps, &k));
        let cx = ConfCtx { sp, m: &m, printed: &printed, bd: &bd, bbd: &bbd, n };
        let mut rng = ChaCha8Rng::seed_from_u64(self.sc.seed ^ 0xc0f);
        for x in &self.sc.points {
            let base = CheckWitness { x_point: Some(qs(x)), ..Default::default() };
            if n <= SYMBOLIC_Y_MAX_DIM {
                let dom = RootDomain::new(&sp.geo.beta.t.alpha2, point_bindings(x, None))?;
                cx.run(&dom, base, &mut tallies)?;
                continue;
            }
            let mut done = 0;
            for _ in 0..20 * CONF_SAMPLES {
                if done == CONF_SAMPLES {
                    break;
                }
                let y = random_y(&mut rng, n);
                let e = q(rng.gen_range(1..=7), rng.gen_range(1..=4));
                let mut vals = point_bindings(x, Some(&y));
                vals.insert(atoms::unit(), e.clone());
                let dom = PointDomain::new(&sp.geo.beta.t.alpha2, vals)?;
                let w = CheckWitness { y_point: Some(qs(&y)), e_value: Some(e.to_string()), ..base.clone() };
                let mut local = BTreeMap::new();
                match cx.run(&dom, w, &mut local) {
                    Ok(()) => done += 1,
                    Err(CoreError::Sym(SymError::DivisionByZero(_))) => continue,
                    Err(e) => return Err(e),
                }
                for (id, t) in local {
                    tallies.entry(id).or_default().merge(t);
                }
            }
        }
        let what = if n <= SYMBOLIC_Y_MAX_DIM {
            "evaluations (pinned x, y and E symbolic)"
        } else {
            "evaluations (exact x, y and E > 0)"
        };
        let entries: [(&str, &str, bool); 10] = [
            ("dstar", "D* as printed, against C* bar / E - C*", true),
            ("dstar.derived", "derived D*, against C* bar / E - C*", false),
            ("cstar_bar", "C* bar = E (C* + D*)", true),
            ("cij", "C^ij as printed, against B^ij bar - B^ij", true),
            ("cij.derived", "derived C^ij, against B^ij bar - B^ij", false),
            ("omega_bar", "Omega bar = E^2 Omega", true),
            ("a_bar", "A bar = A / E", true),
            ("b_bar", "B bar = E^2 B", true),
            ("k_general", "general 2K^im_m, against 2(B^im_m bar - B^im_m)", true),
            ("k.derived", "derived K^im_m, against B^im_m bar - B^im_m", false),
        ];
        for (id, anchor, fixture) in entries {
            let t = tallies.remove(id).unwrap_or_default();
            let key = format!("conformal.{id}");
            self.from_tally(&key, anchor, fixture.then_some(key.as_str()), t, what, None)?;
        }
        Ok(())
    }

    fn oracles(&mut self, sp: &Space) -> Result<()> {
        let m = self.sc.family();
        let x = self.sc.points[0].clone();
        let mut rng = ChaCha8Rng::seed_from_u64(self.sc.seed ^ 0x5eed);
        let mut t = Tally::default();
        for x in &self.sc.points {
            let oracle = SprayOracle::new(&sp.geo, &m, x)?;
            let (mut done, mut tried) = (0, 0);
            while done < 2 && tried < 40 {
                tried += 1;
                let y = random_y(&mut rng, self.sc.n);
                let res = match spray_residual(&oracle, &sp.geo, &m, &y) {
                    Ok(r) => r,
                    Err(CoreError::Sym(SymError::DivisionByZero(_))) | Err(CoreError::Singular(_)) => continue,
                    Err(e) => return Err(e),
                };
                done += 1;
                let bad = res.iter().position(|r| !r.is_zero());
                t.add(bad.is_none(), || {
                    let i = bad.unwrap_or(0);
                    (
                        CheckWitness { x_point: Some(qs(x)), y_point: Some(qs(&y)), index: Some(format!("i={}", i + 1)), ..Default::default() },
                        res[i].to_string(),
                    )
                });
            }
        }
        self.from_tally("oracle.spray", "2G^i = gamma^i_00 + 2B^i, against the Euler-Lagrange spray of L^2/2", None, t, "sample points", None)?;

        if self.sc.n <= SYMBOLIC_Y_MAX_DIM {
            let res = trace_residual(&sp.geo, &m, &x)?;
            let bad = res.iter().position(|r| !r.is_zero());
            self.internal(
                "oracle.trace",
                TRACE_ANCHOR,
                bad.is_none(),
                format!("{} components at x = ({}), y symbolic", res.len(), qs(&x).join(", ")),
                bad.map(|i| {
                    (
                        CheckWitness { x_point: Some(qs(&x)), index: Some(format!("i={}", i + 1)), ..Default::default() },
                        clip(res[i].to_string()),
                    )
                }),
            );
            return Ok(());
        }
        let mut t = Tally::default();
        let mut tried = 0;
        while t.entries < 2 && tried < 40 {
            tried += 1;
            let y = random_y(&mut rng, self.sc.n);
            let res = match trace_residual_at(&sp.geo, &m, &x, &y) {
                Ok(r) => r,
                Err(CoreError::Sym(SymError::DivisionByZero(_))) => continue,
                Err(e) => return Err(e),
            };
            let bad = res.iter().position(|r| !r.is_zero());
            t.add(bad.is_none(), || {
                let i = bad.unwrap_or(0);
                (
                    CheckWitness { x_point: Some(qs(&x)), y_point: Some(qs(&y)), index: Some(format!("i={}", i + 1)), ..Default::default() },
                    res[i].to_string(),
                )
            });
        }
        self.from_tally("oracle.trace", TRACE_ANCHOR, None, t, "sample points", None)
    }

    fn k_consistency(&mut self, sp: &Space) -> Result<()> {
        for case in self.opts.cases.clone() {
            let m = case.metric(&self.sc.eps, &self.sc.k);
            let seed = self.sc.seed.wrapping_add(case as u64 * 1009);
            let t = k_consistency(sp, &m, &self.sc.points, self.opts.k_points, seed, &self.sc.eps, &self.sc.k)?;
            let id = format!("kcons.{}", case.name());
            let anchor = format!("{}: K^im_m = B^im_m bar - B^im_m at exact points", case.anchor());
            self.from_tally(&id, &anchor, None, t, "exact (x, y, E) points", None)?;
        }
        Ok(())
    }

    fn verdicts(&mut self, sp: Option<&Space>) -> Result<()> {
        let i = Inputs::abstract_atoms();
        let c = ConfInputs::abstract_atoms();
        for case in self.opts.cases.clone() {
            let m = case.metric(&self.sc.eps, &self.sc.k);
            let p = m.at(&i.alpha, &i.beta)?;
            let subjects = [("K^im_m", k_im_m(&p, &i, &c)?), ("B^im_m", bim_m(&p, &i)?)];
            for (subject, v) in subjects {
                let graded = hpcheck::check_abstract_vec(&v, 2);
                let flat = v.to_rat();
                let mut concrete = Vec::new();
                if let Some(sp) = sp {
                    let (eps, k) = (self.sc.eps.clone(), self.sc.k.clone());
                    let bd = sp.binder(&eps, &k);
                    for x in &self.sc.points {
                        // the closed form, evaluated once per component at the pinned x
                        let dom = RootDomain::new(&sp.geo.beta.t.alpha2, point_bindings(x, None))?;
                        let comps = (0..self.sc.n).map(|i| bd.eval(&dom, &flat, &[i, 0, 0])).collect::<Result<Vec<_>>>()?;
                        concrete.push(PointVerdict { x_point: qs(x), verdict: hpcheck::check_concrete_vec(&comps, 2, x) });
                    }
                }
                self.verdicts.push(VerdictRecord { case, subject: subject.into(), degree: 2, graded, concrete });
            }
        }
        Ok(())
    }
}

/// Dimensions up to which the conformal identities keep `y` and `E` symbolic;
/// above it they are checked at exact sample points.
pub const SYMBOLIC_Y_MAX_DIM: usize = 2;
/// Exact `(y, E)` samples per x-point above that dimension.
const CONF_SAMPLES: usize = 4;

struct ConfCtx<'a> {
    sp: &'a Space,
    m: &'a ABMetric,
    printed: &'a BTreeMap<&'static str, RatExpr>,
    bd: &'a Binder<'a>,
    bbd: &'a Binder<'a>,
    n: usize,
}

impl ConfCtx<'_> {
    /// Direct barred quantities against the printed and derived forms, in one domain.
    fn run<D: Domain>(&self, dom: &D, base: CheckWitness, tallies: &mut BTreeMap<&'static str, Tally>) -> Result<()>
    where
        D::F: fmt::Display,
    {
        let (sp, m, bd, bbd) = (self.sp, self.m, self.bd, self.bbd);
        let printed = self.printed;
        let xw = || base.clone();
        let inp = inputs(dom, &sp.geo, dom.alpha().clone())?;
        let ci = conf_inputs(dom, &sp.conf)?;
        let e = dom.lift(&RatExpr::var(atoms::unit()))?;
        let binp = inputs(dom, &sp.barred, e.clone() * dom.alpha().clone())?;
        let (p, pb) = (m.at(&inp.alpha, &inp.beta)?, m.at(&binp.alpha, &binp.beta)?);

        let cs = cstar(&p, &inp)?;
        let cs_bar = cstar(&pb, &binp)?;
        let d_direct = cs_bar.try_div(&e)? - cs;
        let scalars: [(&'static str, D::F); 5] = [
            ("dstar", d_direct.clone()),
            ("cstar_bar", cs_bar),
            ("omega_bar", omega(&pb, &binp)),
            ("a_bar", big_a(&pb, &binp)),
            ("b_bar", big_b(&pb, &binp)),
        ];
        for (id, direct) in scalars {
            let r = direct - bd.eval(dom, &printed[id], &[0, 0, 0])?;
            tallies.entry(id).or_default().add(r.is_zero(), || (xw(), r.to_string()));
        }
        let r = d_direct - dstar(&p, &inp, &ci)?;
        tallies.entry("dstar.derived").or_default().add(r.is_zero(), || (xw(), r.to_string()));

        let bij_u = bij(&p, &inp)?;
        let bij_b = bij(&pb, &binp)?;
        let cij_d = cij(&p, &inp, &ci)?;
        for a in assignments(self.n, "ij") {
            let (i, j) = (a[0], a[1]);
            if i >= j {
                continue;
            }
            let direct = biv_component(bbd, dom, &bij_b, i, j)? - biv_component(bd, dom, &bij_u, i, j)?;
            let w = || CheckWitness { index: index_label("ij", &a), ..xw() };
            let r = direct.clone() - bd.eval(dom, &printed["cij"], &a)?;
            tallies.entry("cij").or_default().add(r.is_zero(), || (w(), r.to_string()));
            let r = direct - biv_component(bd, dom, &cij_d, i, j)?;
            tallies.entry("cij.derived").or_default().add(r.is_zero(), || (w(), r.to_string()));
        }

        let bimm_u = bd.components(dom, &bim_m(&p, &inp)?)?;
        let bimm_b = bbd.components(dom, &bim_m(&pb, &binp)?)?;
        let k_d = bd.components(dom, &k_im_m(&p, &inp, &ci)?)?;
        let two = D::F::from_int(2);
        for a in assignments(self.n, "i") {
            let i = a[0];
            let w = || CheckWitness { index: index_label("i", &a), ..xw() };
            let direct = bimm_b[i].clone() - bimm_u[i].clone();
            let r = two.clone() * direct.clone() - bd.eval(dom, &printed["k_general"], &a)?;
            tallies.entry("k_general").or_default().add(r.is_zero(), || (w(), r.to_string()));
            let r = direct - k_d[i].clone();
            tallies.entry("k.derived").or_default().add(r.is_zero(), || (w(), r.to_string()));
        }
        Ok(())
    }
}

fn biv_component<D: Domain>(bd: &Binder, dom: &D, w: &Bivector<D::F>, i: usize, j: usize) -> Result<D::F> {
    let val = |a: Sym, t: usize| -> Result<D::F> {
        let v = bd.value(a, &[t]).ok_or_else(|| SymError::Unbound(a.name()))?;
        dom.lift(&v)
    };
    let mut acc = D::F::zero();
    for ((a, b), c) in w.terms() {
        acc = acc + c.clone() * (val(*a, i)? * val(*b, j)? - val(*a, j)? * val(*b, i)?);
    }
    Ok(acc)
}

fn random_y(rng: &mut ChaCha8Rng, n: usize) -> Vec<Q> {
    loop {
        let y: Vec<Q> = (0..n).map(|_| q(rng.gen_range(-4..=4), rng.gen_range(1..=3))).collect();
        if y.iter().any(|v| *v != Q::from_integer(0.into())) {
            return y;
        }
    }
}

/// `K^im_m` against the direct difference at `count` exact points; `x` cycles
/// through `points`, `y` and `E > 0` are drawn from the seed.
fn k_consistency(sp: &Space, m: &ABMetric, points: &[Vec<Q>], count: usize, seed: u64, eps: &Q, k: &Q) -> Result<Tally> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (bd, bbd) = (sp.binder(eps, k), sp.barred_binder(eps, k));
    let mut t = Tally::default();
    let mut attempts = 0;
    while t.entries < count {
        attempts += 1;
        if attempts > 50 * count {
            return Err(CoreError::Validation(format!("K-consistency: only {} usable sample points", t.entries)));
        }
        let x = &points[attempts % points.len()];
        let y = random_y(&mut rng, sp.geo.n());
        let e = q(rng.gen_range(1..=7), rng.gen_range(1..=4));
        let mut vals = point_bindings(x, Some(&y));
        vals.insert(atoms::unit(), e.clone());
        match k_at_point(sp, m, &bd, &bbd, vals) {
            Ok(res) => {
                let bad = res.iter().position(|r| !r.is_zero());
                t.add(bad.is_none(), || {
                    let i = bad.unwrap_or(0);
                    (
                        CheckWitness {
                            x_point: Some(qs(x)),
                            y_point: Some(qs(&y)),
                            e_value: Some(e.to_string()),
                            index: Some(format!("i={}", i + 1)),
                            ..Default::default()
                        },
                        res[i].to_string(),
                    )
                });
            }
            Err(CoreError::Sym(SymError::DivisionByZero(_))) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(t)
}

fn k_at_point(sp: &Space, m: &ABMetric, bd: &Binder, bbd: &Binder, vals: HashMap<Sym, Q>) -> Result<Vec<QuadNum>> {
    let dom = PointDomain::new(&sp.geo.beta.t.alpha2, vals)?;
    let e = dom.lift(&RatExpr::var(atoms::unit()))?;
    let inp = inputs(&dom, &sp.geo, dom.alpha().clone())?;
    let binp = inputs(&dom, &sp.barred, e * dom.alpha().clone())?;
    let ci = conf_inputs(&dom, &sp.conf)?;
    let (p, pb) = (m.at(&inp.alpha, &inp.beta)?, m.at(&binp.alpha, &binp.beta)?);
    let u = bd.components(&dom, &bim_m(&p, &inp)?)?;
    let b = bbd.components(&dom, &bim_m(&pb, &binp)?)?;
    let kk = bd.components(&dom, &k_im_m(&p, &inp, &ci)?)?;
    Ok((0..u.len()).map(|i| b[i].clone() - u[i].clone() - kk[i].clone()).collect())
}

fn auditor<'a>(sc: &'a Scenario, fx: &'a FixtureSet, opts: &'a AuditOptions) -> Auditor<'a> {
    Auditor {
        sc,
        fx,
        opts,
        checks: Vec::new(),
        verdicts: Vec::new(),
        timings: BTreeMap::new(),
    }
}

/// Only the K-consistency records, one per case.
pub fn k_consistency_records(sc: &Scenario, opts: &AuditOptions) -> Result<Vec<CheckRecord>> {
    let fx = FixtureSet::bundled();
    let mut a = auditor(sc, &fx, opts);
    a.k_consistency(&Space::new(sc)?)?;
    Ok(a.checks)
}

/// Only the graded and concrete hp(2) verdicts.
pub fn verdict_records(sc: &Scenario, opts: &AuditOptions) -> Result<Vec<VerdictRecord>> {
    let fx = FixtureSet::bundled();
    let mut a = auditor(sc, &fx, opts);
    let sp = if sc.mode == ScenarioMode::Concrete { Some(Space::new(sc)?) } else { None };
    a.verdicts(sp.as_ref())?;
    Ok(a.verdicts)
}

/// Runs every audit on the scenario.
pub fn run_all(sc: &Scenario, fx: &FixtureSet, opts: &AuditOptions) -> Result<AuditReport> {
    let mut a = auditor(sc, fx, opts);
    a.timed("partials", |a| a.partials())?;
    a.timed("scalars", |a| a.scalars())?;
    a.timed("laws", |a| a.laws())?;
    a.timed("cases", |a| a.cases_abstract())?;
    a.timed("lint", |a| a.lint())?;
    let space = if sc.mode == ScenarioMode::Concrete {
        let sp = a.timed("space", |_| Space::new(sc))?;
        a.timed("block", |a| a.block(&sp))?;
        a.timed("conformal", |a| a.conformal(&sp))?;
        a.timed("oracles", |a| a.oracles(&sp))?;
        a.timed("kcons", |a| a.k_consistency(&sp))?;
        Some(sp)
    } else {
        None
    };
    a.timed("verdicts", |a| a.verdicts(space.as_ref()))?;
    let summary = summarize(&a.checks);
    let mut cases: Vec<Case> = opts.cases.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    cases.sort();
    Ok(AuditReport {
        schema_version: SCHEMA_VERSION,
        tool: TOOL,
        scenario: sc.summary(),
        seed: sc.seed,
        cases,
        conventions: vec![R0_CONVENTION.to_string()],
        checks: a.checks,
        verdicts: a.verdicts,
        summary,
        timings_ms: a.timings,
    })
}
