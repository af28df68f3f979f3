//! Random expression trees for property tests and the acceptance suite.

use rand::Rng;

use crate::expr::Node;
use crate::symbol::Sym;
use crate::Q;

/// Shape parameters for [`random_node`].
#[derive(Clone, Debug)]
pub struct TreeShape {
    pub depth: usize,
    pub vars: Vec<Sym>,
    /// Allow `/` and negative exponents.
    pub division: bool,
    pub max_exp: i32,
}

impl TreeShape {
    pub fn new(vars: Vec<Sym>) -> Self {
        TreeShape {
            depth: 4,
            vars,
            division: true,
            max_exp: 3,
        }
    }

    pub fn polynomial(mut self) -> Self {
        self.division = false;
        self
    }

    pub fn depth(mut self, d: usize) -> Self {
        self.depth = d;
        self
    }
}

fn leaf<R: Rng>(rng: &mut R, shape: &TreeShape) -> Node {
    if shape.vars.is_empty() || rng.gen_bool(0.3) {
        let n: i64 = rng.gen_range(-4..=4);
        let d: i64 = if shape.division { rng.gen_range(1..=3) } else { 1 };
        Node::Num(Q::new(n.into(), d.into()))
    } else {
        Node::Sym(shape.vars[rng.gen_range(0..shape.vars.len())])
    }
}

/// A random tree of at most `shape.depth` levels.
pub fn random_node<R: Rng>(rng: &mut R, shape: &TreeShape) -> Node {
    if shape.depth <= 1 || rng.gen_bool(0.25) {
        return leaf(rng, shape);
    }
    let sub = TreeShape {
        depth: shape.depth - 1,
        ..shape.clone()
    };
    let kid = |rng: &mut R| Box::new(random_node(rng, &sub));
    let ops = if shape.division { 6 } else { 5 };
    match rng.gen_range(0..ops) {
        0 => Node::Add(kid(rng), kid(rng)),
        1 => Node::Sub(kid(rng), kid(rng)),
        2 | 3 => Node::Mul(kid(rng), kid(rng)),
        4 => {
            let lo = if shape.division { -2 } else { 0 };
            Node::Pow(kid(rng), rng.gen_range(lo..=shape.max_exp))
        }
        _ => Node::Div(kid(rng), kid(rng)),
    }
}
