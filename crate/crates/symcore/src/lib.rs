//! Exact symbolic kernel: rational functions over Q, a quadratic extension
//! for `alpha`, free-index vector expressions and a small expression parser.

pub mod error;
pub mod expr;
pub mod gcd;
pub mod parse;
pub mod poly;
pub mod quad;
pub mod rat;
pub mod root;
pub mod scalar;
pub mod symbol;
#[cfg(feature = "testing")]
pub mod testing;
pub mod vecexpr;

pub type Q = num_rational::BigRational;

pub use error::{Result, SymError};
pub use expr::{normalize, Expr, Mode, Node};
pub use parse::{parse_expr, parse_in, parse_node_with};
pub use poly::{Monomial, Poly};
pub use quad::QuadNum;
pub use rat::{Derivation, RatExpr};
pub use root::RootExpr;
pub use scalar::Scalar;
pub use symbol::{atoms, Sym, SymKind, SymbolTable};
pub use vecexpr::{Bivector, VecExpr, VectorForm};
