use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymError {
    #[error("division by zero: {0}")]
    DivisionByZero(String),
    #[error("cannot differentiate with respect to vector atom `{0}`")]
    UnsupportedDerivative(String),
    #[error("no derivation rule for unit atom `{unit}` with respect to `{var}`")]
    MissingDerivationRule { unit: String, var: String },
    #[error("symbol `{0}` already registered with a different kind or grade")]
    SymbolConflict(String),
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("expression is not linear in the vector atoms: {0}")]
    NotLinearInVectors(String),
    #[error("unbound symbol `{0}` during evaluation")]
    Unbound(String),
    #[error("symbol `{0}` carries no y-grade")]
    UngradedSymbol(String),
    #[error("negative exponent on non-unit symbol `{0}`")]
    NegativeExponent(String),
    #[error("incompatible square-root extensions")]
    ExtensionMismatch,
}

pub type Result<T> = std::result::Result<T, SymError>;
