use std::collections::HashMap;
use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use symcore::testing::{random_node, TreeShape};
use symcore::{
    atoms, normalize, parse_expr, Derivation, Expr, Mode, Node, QuadNum, RatExpr, Scalar, Sym, SymError, SymbolTable,
    Q,
};

fn vars() -> Vec<Sym> {
    vec![atoms::alpha(), atoms::beta(), Sym::x(1), Sym::x(2), atoms::unit()]
}

fn tree(seed: u64, depth: usize) -> Node {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_node(&mut rng, &TreeShape::new(vars()).depth(depth))
}

/// Canonical value of a random tree, or `None` when it divides by zero.
fn rat(seed: u64, depth: usize) -> Option<RatExpr> {
    match normalize(&tree(seed, depth), &Mode::Abstract) {
        Ok(Expr::Rat(r)) => Some(r),
        Err(SymError::DivisionByZero(_)) => None,
        other => panic!("unexpected {other:?}"),
    }
}

fn table() -> SymbolTable {
    SymbolTable::full(2)
}

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 1000,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn addition_associates(s in any::<u64>()) {
        let (Some(a), Some(b), Some(c)) = (rat(s, 3), rat(s ^ 1, 3), rat(s ^ 2, 3)) else { return Ok(()) };
        prop_assert_eq!(&a + &(&b + &c), &(&a + &b) + &c);
        prop_assert_eq!(&a + &b, &b + &a);
    }

    #[test]
    fn multiplication_distributes(s in any::<u64>()) {
        let (Some(a), Some(b), Some(c)) = (rat(s, 3), rat(s ^ 1, 3), rat(s ^ 2, 3)) else { return Ok(()) };
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a * &(&b * &c), &(&a * &b) * &c);
    }

    #[test]
    fn normalize_is_idempotent(s in any::<u64>()) {
        let node = tree(s, 4);
        let Ok(once) = normalize(&node, &Mode::Abstract) else { return Ok(()) };
        let twice = normalize(&symcore::expr::to_node(&once), &Mode::Abstract).unwrap();
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn equality_is_decidable(s in any::<u64>()) {
        let (Some(a), Some(b)) = (rat(s, 3), rat(s ^ 7, 3)) else { return Ok(()) };
        prop_assert_eq!((&a - &b).is_zero(), a == b);
        prop_assert!((&a - &a.clone()).is_zero());
    }

    #[test]
    fn multiply_then_divide(s in any::<u64>()) {
        let (Some(e), Some(d)) = (rat(s, 4), rat(s ^ 3, 3)) else { return Ok(()) };
        prop_assume!(!d.is_zero());
        prop_assert_eq!((&e * &d).div_ref(&d).unwrap(), e);
    }

    #[test]
    fn leibniz_rule(s in any::<u64>()) {
        let (Some(a), Some(b)) = (rat(s, 3), rat(s ^ 5, 3)) else { return Ok(()) };
        let mut grad = HashMap::new();
        grad.insert(Sym::x(1), RatExpr::var(Sym::x(2)) + RatExpr::int(1));
        grad.insert(Sym::x(2), RatExpr::var(Sym::x(1)));
        let rules = Derivation::new().with_unit(atoms::unit(), grad);
        for v in [atoms::alpha(), Sym::x(1), Sym::x(2)] {
            let lhs = (&a * &b).derivative(v, &rules).unwrap();
            let rhs = &a.derivative(v, &rules).unwrap() * &b + &a * &b.derivative(v, &rules).unwrap();
            prop_assert_eq!(lhs, rhs, "d/d{}", v);
        }
    }

    #[test]
    fn print_then_parse_is_identity(s in any::<u64>()) {
        let Some(e) = rat(s, 4) else { return Ok(()) };
        prop_assert_eq!(parse_expr(&e.to_string(), &table()).unwrap(), e);
    }

    #[test]
    fn parse_of_printed_tree_matches_tree(s in any::<u64>()) {
        let node = tree(s, 4);
        let direct = normalize(&node, &Mode::Abstract);
        let parsed = parse_expr(&node.to_string(), &table());
        match (direct, parsed) {
            (Ok(Expr::Rat(d)), Ok(p)) => prop_assert_eq!(d, p),
            (Err(a), Err(b)) => prop_assert_eq!(std::mem::discriminant(&a), std::mem::discriminant(&b)),
            (d, p) => prop_assert!(false, "{:?} vs {:?}", d, p),
        }
    }

    #[test]
    fn parser_never_panics(tokens in proptest::collection::vec(
        prop_oneof![
            Just("x1"), Just("alpha"), Just("gamma2"), Just("zz"), Just("3"), Just("0"),
            Just("+"), Just("-"), Just("*"), Just("/"), Just("^"), Just("("), Just(")"),
            Just(" "), Just("$"), Just("é"), Just("99999999999"),
        ],
        0..24,
    )) {
        let text: String = tokens.concat();
        match parse_expr(&text, &table()) {
            Ok(_) | Err(SymError::DivisionByZero(_)) => {}
            Err(SymError::Syntax { offset, .. }) | Err(SymError::UnknownIdentifier { offset, .. }) => {
                prop_assert!(offset <= text.len());
            }
            Err(e) => prop_assert!(false, "unexpected error {e:?}"),
        }
    }
}

fn quad_env(point: &HashMap<Sym, Q>) -> impl Fn(Sym) -> Option<QuadNum> + '_ {
    |s| point.get(&s).map(|q| QuadNum::rational(q.clone()))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 300, ..ProptestConfig::default() })]

    /// Tree evaluation with `alpha = sqrt(Q)` agrees with the normalized
    /// `p + q*alpha`; exact in `Q(sqrt d)`, so both the perfect-square and the
    /// irrational cases are compared exactly (and in floating point as well).
    #[test]
    fn root_expr_soundness(s in any::<u64>(), px in proptest::array::uniform4(-5i64..=5)) {
        let (x1, y1, y2) = (Sym::x(1), Sym::y(1), Sym::y(2));
        let square = Arc::new(
            RatExpr::var(y1) * RatExpr::var(y1)
                + (RatExpr::var(x1) * RatExpr::var(x1) + RatExpr::int(1)) * RatExpr::var(y2) * RatExpr::var(y2),
        );
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let node = random_node(&mut rng, &TreeShape::new(vec![atoms::alpha(), x1, y1, y2]).depth(4));
        let Ok(Expr::Root(v)) = normalize(&node, &Mode::Concrete { square: square.clone() }) else { return Ok(()) };

        let point: HashMap<Sym, Q> = [(x1, px[0]), (y1, px[1]), (y2, px[2] + 6)]
            .into_iter()
            .map(|(s, k)| (s, Q::from_integer(k.into())))
            .collect();
        let qv: Q = square.eval(&|s| point.get(&s).cloned()).unwrap();
        let alpha = QuadNum::sqrt(&qv);
        let env = quad_env(&point);
        let by_tree = node.eval(&|s| if s == atoms::alpha() { alpha.clone() } else { env(s).unwrap() });
        let by_canon = v.eval(&env, &alpha);
        match (by_tree, by_canon) {
            (Ok(t), Ok(c)) => {
                prop_assert_eq!(&t, &c);
                let (tf, cf) = (t.to_f64(), c.to_f64());
                prop_assert!((tf - cf).abs() <= 1e-12 * tf.abs().max(1.0));
            }
            // Removable singularities of the tree, or poles of the value, at this point.
            (Err(SymError::DivisionByZero(_)), _) | (_, Err(SymError::DivisionByZero(_))) => {}
            (t, c) => prop_assert!(false, "{:?} vs {:?}", t, c),
        }
    }
}

#[test]
fn substitution_examples() {
    let t = SymbolTable::abstract_atoms();
    let omega = parse_expr("(-3*k*beta^4 + (1 + 2*k*b2)*alpha^2*beta^2)/alpha^2", &t).unwrap();
    let k0: HashMap<_, _> = [(atoms::k(), RatExpr::zero())].into_iter().collect();
    assert_eq!(omega.substitute(&k0).unwrap(), parse_expr("beta^2", &t).unwrap());
    let ident: HashMap<_, _> = [(atoms::k(), RatExpr::var(atoms::k()))].into_iter().collect();
    assert_eq!(omega.substitute(&ident).unwrap(), omega);
    let a0: HashMap<_, _> = [(atoms::alpha(), RatExpr::zero())].into_iter().collect();
    assert!(matches!(omega.substitute(&a0), Err(SymError::DivisionByZero(_))));
}

#[test]
fn worked_examples() {
    let t = SymbolTable::abstract_atoms();
    let p = |s: &str| parse_expr(s, &t).unwrap();
    assert_eq!(p("(beta^2/alpha)/beta"), p("beta/alpha"));
    let rules = Derivation::new();
    let a = atoms::alpha();
    assert_eq!(p("beta^2/alpha").derivative(a, &rules).unwrap(), p("-beta^2/alpha^2"));
    let l = p("alpha + eps*beta + k*beta^2/alpha");
    assert_eq!(l.derivative(a, &rules).unwrap(), p("1 - k*beta^2/alpha^2"));
    let d3 = p("k*beta^2/alpha")
        .derivative(a, &rules)
        .and_then(|e| e.derivative(a, &rules))
        .and_then(|e| e.derivative(a, &rules))
        .unwrap();
    assert_eq!(d3, p("-6*k*beta^2/alpha^4"));
    assert!(matches!(
        p("alpha").derivative(atoms::bi(), &rules),
        Err(SymError::UnsupportedDerivative(_))
    ));
    let split = p("r00 + s0").y_grade_split();
    assert_eq!(split.get(&2), Some(&p("r00")));
    assert_eq!(split.get(&1), Some(&p("s0")));
    let _ = RatExpr::one().is_one() && Scalar::is_zero(&RatExpr::zero());
}
