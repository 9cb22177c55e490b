use thiserror::Error;

use crate::value::Attr;

/// Errors raised by the engine.
///
/// [`AjarError::Internal`] marks a broken invariant inside the engine; every
/// other variant is a problem with the query, the data, or the configuration.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum AjarError {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("duplicate tuple {tuple} in relation over ({schema})")]
    DuplicateTuple { schema: String, tuple: String },

    #[error("unknown aggregation operator `{op}` for semiring `{semiring}`")]
    UnknownOperator { op: String, semiring: String },

    #[error("product aggregation requires an idempotent multiplication; semiring `{0}` is not")]
    NonIdempotentProduct(String),

    #[error("no domain declared for product-aggregated attribute `{0}`")]
    MissingDomain(Attr),

    #[error("value `{value}` of attribute `{attr}` lies outside its declared domain")]
    DomainViolation { attr: Attr, value: String },

    #[error("invalid aggregation ordering: {0}")]
    Ordering(String),

    #[error("invalid hypergraph: {0}")]
    Hypergraph(String),

    #[error("invalid decomposition: {0}")]
    Decomposition(String),

    #[error("decomposition is not compatible with the ordering: {0}")]
    Incompatible(String),

    #[error("query has {found} attributes in one search problem; the cap is {cap}")]
    AttributeCap { found: usize, cap: usize },

    #[error("no fixed point after {0} rounds")]
    NoFixedPoint(usize),

    #[error("semiring law violated: {0}")]
    LawViolation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl AjarError {
    pub fn is_internal(&self) -> bool {
        matches!(self, AjarError::Internal(_))
    }
}

impl From<std::io::Error> for AjarError {
    fn from(e: std::io::Error) -> Self {
        AjarError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, AjarError>;
