//! Scenario files: a concrete space `a_ij(x)`, `b_i(x)`, `sigma(x)`, the
//! family parameters and the sample x-points.
//!
//! ```text
//! # comment
//! name   = default
//! dim    = 2
//! metric = [["1+x2^2", "x1"],
//!           ["x1", "2+x1^2"]]
//! b      = ["x2", "x1*x2+1"]
//! sigma  = "x1^2+x2"
//! epsilon = "1"
//! k      = "1/2"
//! points = [["1","2"], ["-1","1/2"]]
//! seed   = 2718
//! ```
//!
//! One `key = value` per entry. Values are JSON; a bare word is read as a
//! string. A value continues over following lines while brackets are open.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;
use symcore::{parse_expr, Derivation, RatExpr, Scalar, SymKind, SymbolTable, Q};

use crate::abmetric::{omega, ABMetric};
use crate::concrete::{inputs, point_bindings, Domain, RootDomain};
use crate::error::{CoreError, Result};
use crate::riemann::{Geometry, Mat};

pub const DEFAULT_SEED: u64 = 2718;
/// Sample points drawn when the file lists none.
pub const DEFAULT_POINTS: usize = 3;
pub const MAX_DIM: usize = 4;
/// The scenario used when none is given.
pub const DEFAULT_SCENARIO: &str = include_str!("../scenarios/default.scn");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioMode {
    /// Symbol-level checks only.
    Abstract,
    /// Symbol-level checks plus everything run on the concrete space.
    Concrete,
}

/// The scenario as written, for reports.
#[derive(Clone, Debug, Serialize)]
pub struct ScenarioSummary {
    pub name: String,
    pub dim: usize,
    pub mode: ScenarioMode,
    pub metric: Vec<Vec<String>>,
    pub b: Vec<String>,
    pub sigma: String,
    pub epsilon: String,
    pub k: String,
    pub points: Vec<Vec<String>>,
    pub points_sampled: bool,
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub n: usize,
    pub mode: ScenarioMode,
    pub metric: Mat,
    pub b: Vec<RatExpr>,
    pub sigma: RatExpr,
    pub eps: Q,
    pub k: Q,
    pub points: Vec<Vec<Q>>,
    pub seed: u64,
    pub points_sampled: bool,
    raw: Raw,
}

#[derive(Clone, Debug, Default)]
struct Raw {
    metric: Vec<Vec<String>>,
    b: Vec<String>,
    sigma: String,
}

struct Entry {
    line: usize,
    value: Value,
}

const KEYS: &[&str] = &["name", "dim", "mode", "metric", "b", "sigma", "epsilon", "k", "points", "seed"];

fn structure(line: usize, message: impl Into<String>) -> CoreError {
    CoreError::Structure { line, message: message.into() }
}

/// Drops a `#` comment outside string literals.
fn strip_comment(line: &str) -> &str {
    let mut in_str = false;
    let mut escaped = false;
    for (i, c) in line.char_indices() {
        match c {
            '\\' if in_str => escaped = !escaped,
            '"' if !escaped => in_str = !in_str,
            '#' if !in_str => return &line[..i],
            _ => escaped = false,
        }
        if c != '\\' {
            escaped = false;
        }
    }
    line
}

fn bracket_depth(s: &str) -> i64 {
    let mut depth = 0;
    let mut in_str = false;
    let mut prev = ' ';
    for c in s.chars() {
        match c {
            '"' if prev != '\\' => in_str = !in_str,
            '[' | '{' if !in_str => depth += 1,
            ']' | '}' if !in_str => depth -= 1,
            _ => {}
        }
        prev = c;
    }
    depth
}

fn is_bare_word(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || "_-./".contains(c))
}

fn split_entries(text: &str) -> Result<BTreeMap<String, Entry>> {
    let mut out = BTreeMap::new();
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, strip_comment(l)));
    while let Some((line, raw)) = lines.next() {
        if raw.trim().is_empty() {
            continue;
        }
        let (key, rest) = raw
            .split_once('=')
            .ok_or_else(|| structure(line, "expected `key = value`"))?;
        let key = key.trim().to_string();
        if !KEYS.contains(&key.as_str()) {
            return Err(structure(line, format!("unknown key `{key}`")));
        }
        let mut value = rest.trim().to_string();
        while bracket_depth(&value) > 0 {
            let (_, more) = lines
                .next()
                .ok_or_else(|| structure(line, format!("unterminated value for `{key}`")))?;
            value.push('\n');
            value.push_str(more.trim());
        }
        if value.is_empty() {
            return Err(structure(line, format!("empty value for `{key}`")));
        }
        let parsed = match serde_json::from_str::<Value>(&value) {
            Ok(v) => v,
            Err(_) if is_bare_word(&value) => Value::String(value),
            Err(e) => return Err(structure(line, format!("bad value for `{key}`: {e}"))),
        };
        if out.contains_key(&key) {
            return Err(structure(line, format!("duplicate key `{key}`")));
        }
        out.insert(key, Entry { line, value: parsed });
    }
    Ok(out)
}

fn scalar_text(e: &Entry, key: &str) -> Result<String> {
    match &e.value {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        _ => Err(structure(e.line, format!("`{key}` must be a string or number"))),
    }
}

fn list<'a>(e: &'a Entry, key: &str, len: Option<usize>) -> Result<&'a Vec<Value>> {
    let Value::Array(v) = &e.value else {
        return Err(structure(e.line, format!("`{key}` must be an array")));
    };
    if let Some(n) = len {
        if v.len() != n {
            return Err(structure(e.line, format!("`{key}` has {} entries, expected {n}", v.len())));
        }
    }
    Ok(v)
}

fn item_text(v: &Value, line: usize, key: &str) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        _ => Err(structure(line, format!("`{key}` entries must be strings or numbers"))),
    }
}

pub fn parse_rational(text: &str) -> Option<Q> {
    text.trim().parse::<Q>().ok()
}

fn rational(e: &Entry, key: &str) -> Result<Q> {
    let s = scalar_text(e, key)?;
    parse_rational(&s).ok_or_else(|| structure(e.line, format!("`{key}` is not a rational number: {s}")))
}

fn expression(text: &str, key: &str, table: &SymbolTable) -> Result<RatExpr> {
    let e = parse_expr(text, table).map_err(|source| CoreError::Expression { key: key.into(), source })?;
    if e.vars().iter().any(|s| s.kind() != SymKind::Coordinate) {
        return Err(CoreError::Validation(format!("`{key}` must depend on x only: {text}")));
    }
    Ok(e)
}

fn required<'a>(m: &'a BTreeMap<String, Entry>, key: &str) -> Result<&'a Entry> {
    m.get(key).ok_or_else(|| structure(0, format!("missing key `{key}`")))
}

pub fn parse_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    parse_scenario_str(&text)
}

pub fn parse_scenario_str(text: &str) -> Result<Scenario> {
    parse_with_seed(text, None)
}

/// Parses and validates; `seed` overrides the file's seed.
pub fn parse_with_seed(text: &str, seed: Option<u64>) -> Result<Scenario> {
    let m = split_entries(text)?;
    let dim_e = required(&m, "dim")?;
    let n = match &dim_e.value {
        Value::Number(k) => k.as_u64().map(|k| k as usize),
        Value::String(s) => s.parse().ok(),
        _ => None,
    }
    .ok_or_else(|| structure(dim_e.line, "`dim` must be a positive integer"))?;
    if !(2..=MAX_DIM).contains(&n) {
        return Err(structure(dim_e.line, format!("`dim` must be between 2 and {MAX_DIM}, got {n}")));
    }
    let table = SymbolTable::coordinates(n);

    let me = required(&m, "metric")?;
    let mut raw = Raw::default();
    let mut metric = Vec::with_capacity(n);
    for (i, row) in list(me, "metric", Some(n))?.iter().enumerate() {
        let Value::Array(row) = row else {
            return Err(structure(me.line, "`metric` must be an array of rows"));
        };
        if row.len() != n {
            return Err(structure(me.line, format!("metric row {} has {} entries, expected {n}", i + 1, row.len())));
        }
        let texts = row.iter().map(|v| item_text(v, me.line, "metric")).collect::<Result<Vec<_>>>()?;
        metric.push(
            texts
                .iter()
                .enumerate()
                .map(|(j, t)| expression(t, &format!("metric[{}][{}]", i + 1, j + 1), &table))
                .collect::<Result<Vec<_>>>()?,
        );
        raw.metric.push(texts);
    }
    for i in 0..n {
        for j in i + 1..n {
            if metric[i][j] != metric[j][i] {
                return Err(CoreError::Validation(format!(
                    "asymmetric metric: a_{}{} = {} but a_{}{} = {}",
                    i + 1,
                    j + 1,
                    metric[i][j],
                    j + 1,
                    i + 1,
                    metric[j][i]
                )));
            }
        }
    }

    let be = required(&m, "b")?;
    raw.b = list(be, "b", Some(n))?.iter().map(|v| item_text(v, be.line, "b")).collect::<Result<_>>()?;
    let b = raw
        .b
        .iter()
        .enumerate()
        .map(|(i, t)| expression(t, &format!("b[{}]", i + 1), &table))
        .collect::<Result<Vec<_>>>()?;
    raw.sigma = scalar_text(required(&m, "sigma")?, "sigma")?;
    let sigma = expression(&raw.sigma, "sigma", &table)?;

    let name = m.get("name").map(|e| scalar_text(e, "name")).transpose()?.unwrap_or_else(|| "unnamed".into());
    let mode = match m.get("mode") {
        None => ScenarioMode::Concrete,
        Some(e) => match scalar_text(e, "mode")?.as_str() {
            "abstract" => ScenarioMode::Abstract,
            "concrete" => ScenarioMode::Concrete,
            other => return Err(structure(e.line, format!("`mode` must be abstract or concrete, got `{other}`"))),
        },
    };
    let eps = m.get("epsilon").map(|e| rational(e, "epsilon")).transpose()?.unwrap_or_else(|| Q::from_integer(1.into()));
    let k = m.get("k").map(|e| rational(e, "k")).transpose()?.unwrap_or_else(|| Q::from_integer(1.into()));
    let seed = match (seed, m.get("seed")) {
        (Some(s), _) => s,
        (None, Some(e)) => e
            .value
            .as_u64()
            .or_else(|| e.value.as_str().and_then(|s| s.parse().ok()))
            .ok_or_else(|| structure(e.line, "`seed` must be a non-negative integer"))?,
        (None, None) => DEFAULT_SEED,
    };

    let geo = Geometry::new(metric.clone(), &b, Derivation::new()).map_err(|e| match e {
        CoreError::Singular(m) => CoreError::Validation(format!("metric is degenerate: {m}")),
        other => other,
    })?;
    let family = ABMetric::family(Some(&eps), Some(&k));

    let (points, points_sampled) = match m.get("points") {
        Some(e) => {
            let mut pts = Vec::new();
            for p in list(e, "points", None)? {
                let Value::Array(coords) = p else {
                    return Err(structure(e.line, "`points` must be an array of n-tuples"));
                };
                if coords.len() != n {
                    return Err(structure(e.line, format!("point has {} coordinates, expected {n}", coords.len())));
                }
                let q = coords
                    .iter()
                    .map(|v| {
                        let t = item_text(v, e.line, "points")?;
                        parse_rational(&t).ok_or_else(|| structure(e.line, format!("bad coordinate `{t}`")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                check_point(&geo, &family, &q)?;
                pts.push(q);
            }
            if pts.is_empty() {
                return Err(structure(e.line, "`points` is empty"));
            }
            (pts, false)
        }
        None => (sample_points(&geo, &family, n, seed, DEFAULT_POINTS)?, true),
    };

    Ok(Scenario {
        name,
        n,
        mode,
        metric,
        b,
        sigma,
        eps,
        k,
        points,
        seed,
        points_sampled,
        raw,
    })
}

fn fmt_point(x: &[Q]) -> String {
    let parts: Vec<String> = x.iter().map(|q| q.to_string()).collect();
    format!("({})", parts.join(", "))
}

/// Leading principal minors of a numeric symmetric matrix, by elimination.
fn positive_definite(a: &[Vec<Q>]) -> bool {
    let n = a.len();
    let mut m = a.to_vec();
    let zero = Q::from_integer(0.into());
    for c in 0..n {
        if m[c][c] <= zero {
            return false;
        }
        for r in c + 1..n {
            let f = &m[r][c] / &m[c][c];
            for j in c..n {
                let v = &m[c][j] * &f;
                m[r][j] -= v;
            }
        }
    }
    true
}

/// Validates one sample x-point against the space and the family.
pub fn check_point(geo: &Geometry, family: &ABMetric, x: &[Q]) -> Result<()> {
    let vals = point_bindings(x, None);
    let at = |e: &RatExpr| -> Result<Q> {
        e.partial_eval(&vals)
            .ok()
            .and_then(|v| v.as_constant())
            .ok_or_else(|| CoreError::Validation(format!("scenario is singular at point {}", fmt_point(x))))
    };
    let a = geo.metric.a.iter().map(|row| row.iter().map(at).collect::<Result<Vec<_>>>()).collect::<Result<Vec<_>>>()?;
    if at(&geo.metric.det)? == Q::from_integer(0.into()) {
        return Err(CoreError::Validation(format!("det a vanishes at point {}", fmt_point(x))));
    }
    if !positive_definite(&a) {
        return Err(CoreError::Validation(format!("metric is not positive definite at point {}", fmt_point(x))));
    }
    let b = geo.beta.b.iter().map(at).collect::<Result<Vec<_>>>()?;
    if b.iter().all(|q| *q == Q::from_integer(0.into())) {
        return Err(CoreError::Validation(format!("b vanishes at point {}", fmt_point(x))));
    }
    let pinned = geo
        .pin(&vals)
        .map_err(|_| CoreError::Validation(format!("scenario is singular at point {}", fmt_point(x))))?;
    let dom = RootDomain::new(&pinned.beta.t.alpha2, HashMap::new())?;
    let inp = inputs(&dom, &pinned, dom.alpha().clone())?;
    let p = family.at(&inp.alpha, &inp.beta)?;
    if omega(&p, &inp).is_zero() {
        return Err(CoreError::Validation(format!("Omega vanishes identically at point {}", fmt_point(x))));
    }
    Ok(())
}

fn random_q(rng: &mut ChaCha8Rng) -> Q {
    Q::new(rng.gen_range(-4i64..=4).into(), rng.gen_range(1i64..=3).into())
}

/// Seeded valid x-points; invalid draws are skipped.
pub fn sample_points(geo: &Geometry, family: &ABMetric, n: usize, seed: u64, count: usize) -> Result<Vec<Vec<Q>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..200 * count {
        if out.len() == count {
            return Ok(out);
        }
        let x: Vec<Q> = (0..n).map(|_| random_q(&mut rng)).collect();
        if check_point(geo, family, &x).is_ok() {
            out.push(x);
        }
    }
    Err(CoreError::Validation(format!("could not draw {count} valid sample points (seed {seed})")))
}

impl Scenario {
    pub fn geometry(&self) -> Result<Geometry> {
        Geometry::new(self.metric.clone(), &self.b, Derivation::new())
    }

    pub fn family(&self) -> ABMetric {
        ABMetric::family(Some(&self.eps), Some(&self.k))
    }

    /// `sigma` is constant, so the change is a homothety.
    pub fn sigma_constant(&self) -> bool {
        self.sigma.as_constant().is_some()
    }

    pub fn summary(&self) -> ScenarioSummary {
        ScenarioSummary {
            name: self.name.clone(),
            dim: self.n,
            mode: self.mode,
            metric: self.raw.metric.clone(),
            b: self.raw.b.clone(),
            sigma: self.raw.sigma.clone(),
            epsilon: self.eps.to_string(),
            k: self.k.to_string(),
            points: self.points.iter().map(|p| p.iter().map(|q| q.to_string()).collect()).collect(),
            points_sampled: self.points_sampled,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const OK: &str = r#"
# well formed
dim = 2
metric = [["1", "0"], ["0", "x1^2+1"]]
b = ["x2", "0"]
sigma = "x1+2*x2"
points = [["1", "2"]]
"#;

    #[test]
    fn well_formed_file() {
        let s = parse_scenario_str(OK).unwrap();
        assert_eq!(s.n, 2);
        assert_eq!(s.mode, ScenarioMode::Concrete);
        assert_eq!(s.seed, DEFAULT_SEED);
        assert_eq!(s.points.len(), 1);
        assert!(!s.points_sampled);
    }

    #[test]
    fn multiline_arrays_and_bare_words() {
        let text = "name = split\nmode = abstract\ndim = 2\nmetric = [[\"1\", \"0\"],\n   [\"0\", \"1\"]]  # flat\nb = [\"1\", \"x1\"]\nsigma = \"0\"\nk = \"1/2\"\nepsilon = -1\n";
        let s = parse_scenario_str(text).unwrap();
        assert_eq!(s.name, "split");
        assert_eq!(s.mode, ScenarioMode::Abstract);
        assert_eq!(s.k, Q::new(1.into(), 2.into()));
        assert_eq!(s.eps, Q::from_integer((-1).into()));
        assert_eq!(s.points.len(), DEFAULT_POINTS);
        assert!(s.points_sampled);
    }

    #[test]
    fn asymmetric_metric_rejected() {
        let text = OK.replace(r#"[["1", "0"], ["0", "x1^2+1"]]"#, r#"[["1", "1"], ["0", "1"]]"#);
        let err = parse_scenario_str(&text).unwrap_err();
        assert!(matches!(err, CoreError::Validation(ref m) if m.contains("asymmetric")), "{err}");
    }

    #[test]
    fn singular_point_rejected() {
        let text = OK.replace("x1^2+1", "1/x1").replace(r#"[["1", "2"]]"#, r#"[["0", "0"]]"#);
        let err = parse_scenario_str(&text).unwrap_err();
        assert!(matches!(err, CoreError::Validation(ref m) if m.contains("singular")), "{err}");
    }

    #[test]
    fn structural_errors_carry_lines() {
        let err = parse_scenario_str("dim = 2\nmetric = [[\"1\"]]\n").unwrap_err();
        assert!(matches!(err, CoreError::Structure { line: 2, .. }), "{err}");
        let err = parse_scenario_str("dim = 2\nfoo = 1\n").unwrap_err();
        assert!(matches!(err, CoreError::Structure { line: 2, .. }), "{err}");
        let err = parse_scenario_str("dim = 2\n").unwrap_err();
        assert!(err.to_string().contains("missing key `metric`"));
        let err = parse_scenario_str(&OK.replace("\"x2\", \"0\"", "\"x2\", \"y1\"")).unwrap_err();
        assert!(matches!(err, CoreError::Validation(_)), "{err}");
        let err = parse_scenario_str(&OK.replace("x1+2*x2", "x1+")).unwrap_err();
        assert!(matches!(err, CoreError::Expression { .. }), "{err}");
    }

    #[test]
    fn sampling_is_seeded() {
        let text = OK.replace("points = [[\"1\", \"2\"]]", "");
        let a = parse_with_seed(&text, Some(7)).unwrap();
        let b = parse_with_seed(&text, Some(7)).unwrap();
        assert_eq!(a.points, b.points);
        assert_eq!(a.seed, 7);
    }

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("-5/7"), Some(Q::new((-5).into(), 7.into())));
        assert_eq!(parse_rational("3"), Some(Q::from_integer(3.into())));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
    }
}
