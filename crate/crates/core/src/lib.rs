//! Aggregate-join queries over semiring-annotated relations: equivalence of
//! aggregation orderings, valid GHD planning by decomposition, and
//! worst-case optimal execution.

pub mod error;
pub mod exec;
pub mod ghd;
pub mod hypergraph;
pub mod io;
pub mod oracle;
pub mod ordering;
pub mod planner;
pub mod relation;
pub mod semiring;
pub mod value;

pub use error::{AjarError, Result};
pub use hypergraph::{Edge, Hypergraph};
pub use ordering::AggregationOrdering;
pub use relation::{AnnotatedRelation, DomainRegistry};
pub use semiring::{AggOp, Annotation, ExtInt, SemiringSpec};
pub use value::{Attr, AttrSet, Tuple, Value};

pub type Rational = num_rational::BigRational;
pub type IntRelation = AnnotatedRelation<i64>;
pub type RationalRelation = AnnotatedRelation<Rational>;
pub type MinPlusRelation = AnnotatedRelation<ExtInt>;
pub type BoolRelation = AnnotatedRelation<bool>;
