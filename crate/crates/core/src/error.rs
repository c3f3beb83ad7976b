use thiserror::Error;

/// Errors raised by the core constructions.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("composition mismatch: codomain of size {left} does not match domain of size {right}")]
    CompositionMismatch { left: usize, right: usize },
    #[error("pullback mismatch: codomains of size {left} and {right} differ")]
    PullbackMismatch { left: usize, right: usize },
    #[error("enumeration budget exceeded: {needed} candidates requested, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("unbound variable x{var} in a context of size {context}")]
    UnboundVariable { var: usize, context: usize },
    #[error("presentation has no normalizer")]
    NoNormalizer,
    #[error("arity mismatch: {0}")]
    ArityMismatch(String),
    #[error("unknown operation symbol `{0}`")]
    UnknownSymbol(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("semiring mismatch: {left} vs {right}")]
    SemiringMismatch { left: String, right: String },
    #[error("semiring axiom fails: {0}")]
    AxiomFailure(String),
    #[error("not a model: {0}")]
    NotAModel(String),
    #[error("not product preserving: {0}")]
    NotProductPreserving(String),
    #[error("not functorial: {0}")]
    NotFunctorial(String),
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("invalid action: {0}")]
    InvalidAction(String),
    #[error("not equivariant: {0}")]
    NotEquivariant(String),
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("truncation too small: {0}")]
    Truncation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
