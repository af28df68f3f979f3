//! Recomputation and audit of (alpha, beta)-metric formulas: sprays, the
//! second-kind Douglas condition, and their behavior under conformal change.

pub mod error;
pub mod fixtures;
pub mod hpcheck;
pub mod oracles;
pub mod report;
pub mod abmetric;
pub mod audit;
pub mod concrete;
pub mod conformal;
pub mod derive;
pub mod dual;
pub mod riemann;
pub mod scenario;
pub mod selftest;

pub use error::{CoreError, Result};
