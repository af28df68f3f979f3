//! Text and JSON renderings of an audit. Both carry the same check records;
//! the text form leaves out timings so that it is stable across runs.

use std::fmt::Write as _;

use serde_json::Value;

use crate::audit::{AuditReport, CheckRecord, CheckStatus};

const MAX_TERMS: usize = 6;

pub fn to_json(r: &AuditReport) -> String {
    serde_json::to_string_pretty(r).expect("report serializes")
}

/// The JSON value without `timings_ms`, for run-to-run comparison.
pub fn stable_json(r: &AuditReport) -> Value {
    let mut v = serde_json::to_value(r).expect("report serializes");
    if let Some(o) = v.as_object_mut() {
        o.remove("timings_ms");
    }
    v
}

fn section(id: &str) -> &str {
    id.split('.').next().unwrap_or(id)
}

fn write_check(out: &mut String, c: &CheckRecord) {
    let _ = writeln!(out, "{:<8} {:<30} {}", c.status.to_string(), c.id, c.anchor);
    if c.status == CheckStatus::Pass {
        return;
    }
    let _ = writeln!(out, "         {}", c.detail);
    if let Some(f) = &c.fixture {
        let exp = c.expected.map(|e| e.to_string()).unwrap_or_default();
        let _ = writeln!(out, "         fixture {f} (annotated {exp})");
    }
    if let Some(w) = &c.witness {
        let mut parts = Vec::new();
        if let Some(x) = &w.x_point {
            parts.push(format!("x=({})", x.join(", ")));
        }
        if let Some(y) = &w.y_point {
            parts.push(format!("y=({})", y.join(", ")));
        }
        if let Some(e) = &w.e_value {
            parts.push(format!("E={e}"));
        }
        if let Some(i) = &w.index {
            parts.push(i.clone());
        }
        if !w.grades.is_empty() {
            parts.push(format!("grades {:?}", w.grades));
        }
        if !parts.is_empty() {
            let _ = writeln!(out, "         at {}", parts.join(" "));
        }
        if let Some(n) = &w.note {
            let _ = writeln!(out, "         note: {n}");
        }
    }
    if let Some(d) = &c.diff {
        let _ = writeln!(out, "         over denominator {}:", d.denominator);
        for t in d.mismatched.iter().take(MAX_TERMS) {
            let _ = writeln!(out, "           {:<28} derived {:<10} printed {}", t.monomial, t.derived, t.printed);
        }
        if d.mismatched.len() > MAX_TERMS {
            let _ = writeln!(out, "           ... {} more", d.mismatched.len() - MAX_TERMS);
        }
    } else if let Some(res) = &c.residual {
        let _ = writeln!(out, "         residual {res}");
    }
}

pub fn to_text(r: &AuditReport) -> String {
    let mut out = String::new();
    let s = &r.scenario;
    let _ = writeln!(
        out,
        "{} report (schema {})\nscenario {} (n={}, {} mode, eps={}, k={}, seed {})",
        r.tool,
        r.schema_version,
        s.name,
        s.dim,
        serde_json::to_value(s.mode).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
        s.epsilon,
        s.k,
        r.seed
    );
    let cases: Vec<String> = r.cases.iter().map(|c| c.to_string()).collect();
    let _ = writeln!(out, "cases: {}", cases.join(", "));
    for c in &r.conventions {
        let _ = writeln!(out, "convention: {c}");
    }
    // sections in order of first appearance, each printed once
    let mut order: Vec<&str> = Vec::new();
    for c in &r.checks {
        if !order.contains(&section(&c.id)) {
            order.push(section(&c.id));
        }
    }
    for sec in order {
        let _ = writeln!(out, "\n[{sec}]");
        for c in r.checks.iter().filter(|c| section(&c.id) == sec) {
            write_check(&mut out, c);
        }
    }
    if !r.verdicts.is_empty() {
        let _ = writeln!(out, "\n[verdicts] hp(d), graded (alpha an opaque grade-1 atom) and concrete (alpha irrational in y)");
        for v in &r.verdicts {
            let _ = writeln!(out, "{:<12} {:<7} d={} graded {}", v.case.to_string(), v.subject, v.degree, v.graded);
            for p in &v.concrete {
                let _ = writeln!(out, "{:<22} concrete at x=({}) {}", "", p.x_point.join(", "), p.verdict);
            }
        }
    }
    let m = &r.summary;
    let _ = writeln!(
        out,
        "\nsummary: {} checks, {} PASS, {} FINDING, {} FAIL; exit code {}",
        m.total, m.pass, m.finding, m.fail, m.exit_code
    );
    out
}
