//! Invariants of the geometry, metric, conformal and hp layers, on random
//! two-dimensional spaces and random sample points.

use std::collections::HashMap;
use std::sync::OnceLock;

use proptest::prelude::*;
use symcore::{atoms, Derivation, QuadNum, RatExpr, Sym, SymKind, Q};

use finsler_core::abmetric::{bim_m, ABMetric, Inputs};
use finsler_core::audit::{classify, term_diff, CheckStatus, Space};
use finsler_core::concrete::{inputs, point_bindings, Binder, Domain, PointDomain, RootDomain};
use finsler_core::conformal::{apply_conformal, conformal_data};
use finsler_core::fixtures::{Expect, FixtureSet};
use finsler_core::hpcheck::{check_abstract, check_concrete};
use finsler_core::riemann::{Geometry, Mat};
use finsler_core::scenario::{parse_scenario_str, Scenario, DEFAULT_SCENARIO};

fn q(n: i64, d: i64) -> Q {
    Q::new(n.into(), d.into())
}

fn x(i: usize) -> RatExpr {
    RatExpr::var(Sym::x(i))
}

fn c(v: i64) -> RatExpr {
    RatExpr::int(v)
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

/// `a = [[c1 + x2^2, u x1 + v x2 + w], [.., c2 + x1^2]]`, `b` polynomial.
fn space(p: &[i64; 9]) -> Geometry {
    let off = c(p[2]) * x(1) + c(p[3]) * x(2) + c(p[4]);
    let a: Mat = vec![
        vec![c(p[0]) + x(2) * x(2), off.clone()],
        vec![off, c(p[1]) + x(1) * x(1)],
    ];
    let b = vec![c(p[5]) * x(2) + c(p[6]), c(p[7]) * x(1) * x(2) + c(p[8])];
    Geometry::new(a, &b, Derivation::new()).unwrap()
}

fn params() -> impl Strategy<Value = [i64; 9]> {
    (1i64..=4, 1i64..=4, -2i64..=2, -2i64..=2, -1i64..=1, -2i64..=2, -2i64..=2, -2i64..=2, 1i64..=3)
        .prop_map(|t| [t.0, t.1, t.2, t.3, t.4, t.5, t.6, t.7, t.8])
}

fn sigma(p: &[i64; 3]) -> RatExpr {
    c(p[0]) * x(1) * x(1) + c(p[1]) * x(2) + c(p[2]) * x(1) * x(2)
}

fn default_space() -> &'static (Scenario, Space) {
    static S: OnceLock<(Scenario, Space)> = OnceLock::new();
    S.get_or_init(|| {
        let sc = parse_scenario_str(DEFAULT_SCENARIO).unwrap();
        let sp = Space::new(&sc).unwrap();
        (sc, sp)
    })
}

fn pin_unit(g: &Geometry, unit: Sym, to: &RatExpr) -> Vec<RatExpr> {
    let sub: HashMap<Sym, RatExpr> = [(unit, to.clone())].into_iter().collect();
    let n = g.n();
    let mut out = Vec::new();
    for i in 0..n {
        out.push(g.beta.b[i].substitute(&sub).unwrap());
        out.push(g.beta.t.gamma00[i].substitute(&sub).unwrap());
        for j in 0..n {
            out.push(g.metric.a[i][j].substitute(&sub).unwrap());
            out.push(g.beta.r[i][j].substitute(&sub).unwrap());
            out.push(g.beta.s[i][j].substitute(&sub).unwrap());
            for k in 0..n {
                out.push(g.chr.get(i, j, k).substitute(&sub).unwrap());
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn metric_compatibility_and_symmetries(p in params()) {
        let g = space(&p);
        let (a, n) = (&g.metric.a, g.n());
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    // a_{ij:k} = d_k a_ij - a_rj gamma^r_ik - a_ir gamma^r_jk
                    let mut e = a[i][j].derivative(Sym::x(k + 1), &g.metric.rules).unwrap();
                    for r in 0..n {
                        e = e - &a[r][j] * g.chr.get(r, i, k) - &a[i][r] * g.chr.get(r, j, k);
                    }
                    prop_assert!(e.is_zero(), "a_{{{i}{j}:{k}}} = {e}");
                }
                prop_assert_eq!(&g.beta.r[i][j], &g.beta.r[j][i]);
                prop_assert!((&g.beta.s[i][j] + &g.beta.s[j][i]).is_zero());
            }
        }
        let t = &g.beta.t;
        prop_assert_eq!(&t.gamma2, &(&g.beta.b2 * &t.alpha2 - &t.beta * &t.beta));
        for (e, d) in [(&t.alpha2, 2), (&t.beta, 1), (&t.r00, 2), (&t.r0, 1), (&t.s0, 1), (&t.gamma2, 2)] {
            prop_assert!(check_abstract(e, d).is_hp(), "{e} not hp({d})");
        }
        for i in 0..n {
            prop_assert!(check_abstract(&t.si0[i], 1).is_hp());
            prop_assert!(check_abstract(&t.gamma00[i], 2).is_hp());
        }
    }

    #[test]
    fn zero_sigma_is_the_identity(p in params()) {
        let g = space(&p);
        let cd = conformal_data(&g, &RatExpr::zero(), atoms::unit()).unwrap();
        let bar = apply_conformal(&g, &cd).unwrap();
        let one = pin_unit(&bar, atoms::unit(), &RatExpr::one());
        let same = pin_unit(&g, atoms::unit(), &RatExpr::one());
        prop_assert_eq!(one, same);
    }

    #[test]
    fn b2_is_conformally_invariant(p in params(), s in (-2i64..=2, -2i64..=2, -1i64..=1)) {
        let g = space(&p);
        let cd = conformal_data(&g, &sigma(&[s.0, s.1, s.2]), atoms::unit()).unwrap();
        let bar = apply_conformal(&g, &cd).unwrap();
        prop_assert_eq!(&bar.beta.b2, &g.beta.b2);
    }
}

proptest! {
    #![proptest_config(config(6))]

    /// sigma1 then sigma2 equals sigma1 + sigma2, with independent formal units.
    #[test]
    fn conformal_changes_compose(s1 in (-2i64..=2, -2i64..=2, -1i64..=1), s2 in (-2i64..=2, -2i64..=2, -1i64..=1)) {
        let e1 = Sym::intern("E1", SymKind::Unit, 0).unwrap();
        let e2 = Sym::intern("E2", SymKind::Unit, 0).unwrap();
        let g = space(&[1, 2, 1, 0, 0, 1, 0, 1, 1]);
        let (sa, sb) = (sigma(&[s1.0, s1.1, s1.2]), sigma(&[s2.0, s2.1, s2.2]));
        let c1 = conformal_data(&g, &sa, e1).unwrap();
        let g1 = apply_conformal(&g, &c1).unwrap();
        let c2 = conformal_data(&g1, &sb, e2).unwrap();
        let g12 = apply_conformal(&g1, &c2).unwrap();
        let c = conformal_data(&g, &(&sa + &sb), atoms::unit()).unwrap();
        let direct = apply_conformal(&g, &c).unwrap();
        let prod = RatExpr::var(e1) * RatExpr::var(e2);
        let lhs = pin_unit(&g12, atoms::unit(), &RatExpr::one());
        prop_assert_eq!(lhs, pin_unit(&direct, atoms::unit(), &prod));
    }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn family_is_one_homogeneous(e in -3i64..=3, kn in -4i64..=4, kd in 1i64..=3) {
        let m = ABMetric::family(Some(&q(e, 1)), Some(&q(kn, kd)));
        prop_assert!(m.homogeneity_residual().is_zero());
    }

    /// Abstract B^im_m with concrete atoms substituted equals the B^im_m
    /// computed from concrete inputs.
    #[test]
    fn abstract_and_concrete_spray_terms_agree(
        xi in 0usize..3,
        y in (-4i64..=4, 1i64..=3, -4i64..=4, 1i64..=3),
        e in -2i64..=2,
        kn in -3i64..=3,
    ) {
        prop_assume!(y.0 != 0 || y.2 != 0);
        let (sc, sp) = default_space();
        let (eps, k) = (q(e, 1), q(kn, 2));
        let bd: Binder = sp.binder(&eps, &k);
        let m = ABMetric::family(Some(&eps), Some(&k));
        let vals = point_bindings(&sc.points[xi], Some(&[q(y.0, y.1), q(y.2, y.3)]));
        let dom = PointDomain::new(&sp.geo.beta.t.alpha2, vals).unwrap();
        let ab = Inputs::abstract_atoms();
        let flat = match m.at(&ab.alpha, &ab.beta).and_then(|p| bim_m(&p, &ab)) {
            Ok(v) => v,
            Err(_) => return Ok(()),
        };
        let inp = inputs(&dom, &sp.geo, dom.alpha().clone()).unwrap();
        let concrete = match m.at(&inp.alpha, &inp.beta).and_then(|p| bim_m(&p, &inp)) {
            Ok(v) => bd.components(&dom, &v).unwrap(),
            Err(_) => return Ok(()),
        };
        for (i, want) in concrete.iter().enumerate() {
            let got: QuadNum = bd.eval(&dom, &flat.to_rat(), &[i, 0, 0]).unwrap();
            prop_assert_eq!(&got, want);
        }
    }

    /// On polynomials in graded atoms with even alpha powers the two readings agree.
    #[test]
    fn graded_and_concrete_readings_agree(
        xi in 0usize..3,
        picks in proptest::collection::vec((0usize..7, 0usize..7, -3i64..=3), 1..4),
        d in 2u32..=3,
    ) {
        let (sc, sp) = default_space();
        let (eps, k) = (sc.eps.clone(), sc.k.clone());
        let bd = sp.binder(&eps, &k);
        // (atom, grade)
        let pool: [(RatExpr, u32); 7] = [
            (RatExpr::var(atoms::beta()), 1),
            (RatExpr::var(atoms::r00()), 2),
            (RatExpr::var(atoms::s0()), 1),
            (RatExpr::var(atoms::alpha()).pow_i(2).unwrap(), 2),
            (RatExpr::var(atoms::sigma0()), 1),
            (RatExpr::var(atoms::r0()), 1),
            (RatExpr::var(atoms::b2()), 0),
        ];
        let mut e = RatExpr::zero();
        for (a, b, coeff) in picks {
            let mut term = &(&RatExpr::int(coeff) * &pool[a].0) * &pool[b].0;
            let mut g = pool[a].1 + pool[b].1;
            while g < d {
                term = term * RatExpr::var(atoms::beta());
                g += 1;
            }
            e = e + term;
        }
        let x = &sc.points[xi];
        let dom = RootDomain::new(&sp.geo.beta.t.alpha2, point_bindings(x, None)).unwrap();
        let conc = bd.eval(&dom, &e, &[]).unwrap();
        let graded = check_abstract(&e, d).is_hp();
        let concrete = check_concrete(&conc, d, sc.n, x).is_hp();
        prop_assert_eq!(graded, concrete, "{}", e);
    }

    /// A nonzero difference never passes, and every mismatch is listed.
    #[test]
    fn comparator_is_exact(a in (-5i64..=5, -5i64..=5, 1i64..=4), b in (-5i64..=5, -5i64..=5, 1i64..=4)) {
        let al = RatExpr::var(atoms::alpha());
        let be = RatExpr::var(atoms::beta());
        let mk = |t: (i64, i64, i64)| (&(&c(t.0) * &al) * &al + &(&c(t.1) * &be) * &be).div_ref(&(&c(t.2) * &al)).unwrap();
        let (d, p) = (mk(a), mk(b));
        let diff = term_diff(&d, &p);
        let zero = (&d - &p).is_zero();
        prop_assert_eq!(zero, diff.mismatched.is_empty());
        for expect in [None, Some(Expect::Pass), Some(Expect::Finding)] {
            prop_assert_eq!(classify(zero, expect) == CheckStatus::Pass, zero);
        }
    }
}

/// Every block identity that passes symbolically also holds at 20 exact
/// points with `x`, `y` and `E` all numeric.
#[test]
fn passing_block_identities_hold_at_points() {
    let (sc, sp) = default_space();
    let fx = FixtureSet::bundled();
    let bd = sp.binder(&sc.eps, &sc.k);
    let bar = &sp.barred;
    let cases: [(&str, Box<dyn Fn(usize, usize) -> RatExpr>); 4] = [
        ("block.r00", Box::new(|_, _| bar.beta.t.r00.clone())),
        ("block.gamma00", Box::new(|i, _| bar.beta.t.gamma00[i].clone())),
        ("block.r_ij", Box::new(|i, j| bar.beta.r[i][j].clone())),
        ("block.s_j", Box::new(|_, j| bar.beta.s_low[j].clone())),
    ];
    let mut checked = 0;
    for s in 0..20i64 {
        let x = &sc.points[s as usize % sc.points.len()];
        let y = [q(s % 5 - 2, 1), q(s % 3 + 1, (s % 2) + 1)];
        let mut vals = point_bindings(x, Some(&y));
        vals.insert(atoms::unit(), q(s % 4 + 1, s % 3 + 1));
        let dom = PointDomain::new(&sp.geo.beta.t.alpha2, vals).unwrap();
        for (key, direct) in &cases {
            let printed = fx.expr(key, 2).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    let lhs = dom.lift(&direct(i, j)).unwrap();
                    assert_eq!(lhs, bd.eval(&dom, &printed, &[i, j, 0]).unwrap(), "{key}");
                    checked += 1;
                }
            }
        }
    }
    assert_eq!(checked, 20 * 4 * 4);
}
