use thiserror::Error;

/// Errors raised while building or evaluating expressions and symbols.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("no value supplied for opaque symbol `{0}`")]
    MissingSymbol(String),
    #[error("inadmissible transcendental argument `{arg}`: {reason}")]
    InadmissibleArgument { arg: String, reason: String },
    #[error("expression is not a polynomial")]
    NonPolynomial,
    #[error("opaque symbol `{0}` may not depend on z1")]
    SymbolDependsOnZ1(String),
    #[error("opaque symbol `{0}` redeclared with different dependencies")]
    SymbolRedeclared(String),
    #[error("shift rule for `{symbol}` over {shift} adds {declared}, but registered rules give {registered}")]
    InconsistentShiftRule {
        symbol: String,
        shift: String,
        registered: String,
        declared: String,
    },
    #[error("variable index {index} outside 1..={m}")]
    VariableOutOfRange { index: usize, m: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CalculusError {
    #[error("opaque symbol `{symbol}` cannot be differentiated in its own variable z{var}")]
    OpaqueDerivative { symbol: String, var: usize },
    #[error("shift {shift} of opaque symbol `{symbol}` is not derivable from its rules")]
    UnknownSymbolShift { symbol: String, shift: String },
    #[error("shift vector has {got} components, expected {expected}")]
    ShiftDimension { expected: usize, got: usize },
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Why an expression cannot be decided in exact mode.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NfError {
    #[error("exact mode unsupported: opaque symbol `{0}` inside a transcendental argument")]
    SymbolInTranscendental(String),
    #[error("exact mode unsupported: inexact constant {0}")]
    InexactScalar(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SearchError {
    #[error("parameter vector has length {got}, ansatz needs {expected}")]
    ParamShape { expected: usize, got: usize },
    #[error("classifier returned {0}, not a non-existence branch")]
    ClassifierMismatch(String),
    #[error("restarts must be at least 1")]
    NoRestarts,
    #[error("search needs dimension m >= 1 and a shift of matching length")]
    Dimension,
}
