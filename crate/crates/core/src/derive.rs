//! Derived closed forms, printed in the abstract atoms.

use std::fmt::Write as _;

use symcore::{Bivector, RatExpr, VecExpr};

use crate::abmetric::{big_a, big_b, bij, bim_m, cstar, omega, spray_dev, Inputs};
use crate::audit::Case;
use crate::conformal::{cij, dstar, k2_terms, k_im_m, ConfInputs};
use crate::error::{CoreError, Result};

pub const QUANTITIES: &[&str] = &[
    "partials", "omega", "A", "B", "cstar", "dstar", "spray", "bij", "cij", "bimm", "k", "k-terms",
];

fn biv(w: &Bivector) -> String {
    let parts: Vec<String> = w
        .terms()
        .map(|((a, b), c)| format!("({c})*({}^i {}^j - {}^j {}^i)", a.name(), b.name(), a.name(), b.name()))
        .collect();
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join("\n  + ")
    }
}

fn vec(v: &VecExpr<RatExpr>) -> String {
    v.to_string()
}

/// Lines `name = expression` for one quantity of one case.
pub fn derive(quantity: &str, case: Case) -> Result<String> {
    let m = case.abstract_metric();
    let i = Inputs::abstract_atoms();
    let c = ConfInputs::abstract_atoms();
    let p = m.at(&i.alpha, &i.beta)?;
    let mut out = String::new();
    let mut line = |name: &str, v: String| {
        let _ = writeln!(out, "{name} = {v}");
    };
    match quantity {
        "partials" => {
            line("L", m.l.to_string());
            line("L_alpha", m.la.to_string());
            line("L_beta", m.lb.to_string());
            line("L_alphaalpha", m.laa.to_string());
            line("L_alphaalphaalpha", m.laaa.to_string());
        }
        "omega" => line("Omega", omega(&p, &i).to_string()),
        "A" => line("A", big_a(&p, &i).to_string()),
        "B" => line("B", big_b(&p, &i).to_string()),
        "cstar" => line("C*", cstar(&p, &i)?.to_string()),
        "dstar" => line("D*", dstar(&p, &i, &c)?.to_string()),
        "spray" => line("B^i", vec(&spray_dev(&p, &i)?)),
        "bij" => line("B^ij", biv(&bij(&p, &i)?)),
        "cij" => line("C^ij", biv(&cij(&p, &i, &c)?)),
        "bimm" => line("B^im_m", vec(&bim_m(&p, &i)?)),
        "k" => line("K^im_m", vec(&k_im_m(&p, &i, &c)?)),
        "k-terms" => {
            let t = k2_terms(&p, &i, &c)?;
            for (name, v) in t.parts() {
                line(&format!("2K^im_m[{name}]"), vec(v));
            }
        }
        other => {
            return Err(CoreError::Validation(format!(
                "unknown quantity `{other}` (expected one of {})",
                QUANTITIES.join(", ")
            )))
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_quantity_renders() {
        for q in QUANTITIES {
            let s = derive(q, Case::Randers).unwrap();
            assert!(s.contains(" = "), "{q}: {s}");
        }
        assert!(derive("nonsense", Case::Family).is_err());
    }

    #[test]
    fn randers_k_is_the_short_form() {
        let s = derive("k", Case::Randers).unwrap();
        assert_eq!(s.trim(), "K^im_m = (1/2*alpha*sigma0*n + 1/2*alpha*sigma0)*bi + (-1/2*alpha*beta*n - 1/2*alpha*beta)*sigmai");
    }
}
