//! Aggregation orderings, the equivalence test, and the PREC/DNC relation.

mod equivalence;
mod prec;

use std::fmt;

use crate::error::{AjarError, Result};
use crate::hypergraph::Hypergraph;
use crate::semiring::AggOp;
use crate::value::{Attr, AttrSet};

pub use equivalence::{
    explain_equivalence, test_equivalence, test_equivalence_product, EquivalenceVerdict,
};
pub use prec::{
    compute_prec, ExtensionSet, LinearExtensions, PrecRule, PrecedenceRelation,
    DEFAULT_EXTENSION_CAP,
};

/// A sequence of `(attribute, operator)` pairs; the first item is the
/// outermost aggregation.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct AggregationOrdering {
    items: Vec<(Attr, AggOp)>,
}

impl AggregationOrdering {
    pub fn new(items: Vec<(Attr, AggOp)>) -> Result<Self> {
        let distinct: AttrSet = items.iter().map(|(a, _)| a.clone()).collect();
        if distinct.len() != items.len() {
            return Err(AjarError::Ordering("an attribute is aggregated twice".into()));
        }
        Ok(AggregationOrdering { items })
    }

    /// Build from `(attribute, operator name)` pairs; `prod` is the product marker.
    pub fn from_pairs(pairs: &[(&str, &str)]) -> Result<Self> {
        Self::new(pairs.iter().map(|(a, o)| (Attr::new(a), AggOp::named(o))).collect())
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn items(&self) -> &[(Attr, AggOp)] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn attrs(&self) -> AttrSet {
        self.items.iter().map(|(a, _)| a.clone()).collect()
    }

    pub fn attr_list(&self) -> Vec<Attr> {
        self.items.iter().map(|(a, _)| a.clone()).collect()
    }

    pub fn contains(&self, a: &Attr) -> bool {
        self.position(a).is_some()
    }

    pub fn position(&self, a: &Attr) -> Option<usize> {
        self.items.iter().position(|(x, _)| x == a)
    }

    pub fn op(&self, a: &Attr) -> Option<&AggOp> {
        self.items.iter().find(|(x, _)| x == a).map(|(_, o)| o)
    }

    /// Items whose attribute is in `keep`, order preserved.
    pub fn restrict(&self, keep: &AttrSet) -> Self {
        AggregationOrdering {
            items: self.items.iter().filter(|(a, _)| keep.contains(a)).cloned().collect(),
        }
    }

    pub fn without(&self, a: &Attr) -> Self {
        AggregationOrdering { items: self.items.iter().filter(|(x, _)| x != a).cloned().collect() }
    }

    pub fn product_attrs(&self) -> AttrSet {
        self.items.iter().filter(|(_, o)| o.is_product()).map(|(a, _)| a.clone()).collect()
    }

    pub fn has_products(&self) -> bool {
        self.items.iter().any(|(_, o)| o.is_product())
    }

    /// Attributes of `h` not aggregated away.
    pub fn outputs(&self, h: &Hypergraph) -> AttrSet {
        h.vertices().iter().filter(|a| !self.contains(a)).cloned().collect()
    }

    /// Same attributes with the same operator for each.
    pub fn same_signature(&self, other: &Self) -> bool {
        self.len() == other.len()
            && self.items.iter().all(|(a, o)| other.op(a) == Some(o))
    }

    /// Replace each item `(a, op)` by the items `(c, op)` for `c` in `copies[a]`.
    pub fn expand(&self, copies: &std::collections::BTreeMap<Attr, Vec<Attr>>) -> Self {
        let mut items = Vec::new();
        for (a, o) in &self.items {
            match copies.get(a) {
                Some(cs) => items.extend(cs.iter().map(|c| (c.clone(), o.clone()))),
                None => items.push((a.clone(), o.clone())),
            }
        }
        AggregationOrdering { items }
    }
}

impl fmt::Display for AggregationOrdering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (a, o)) in self.items.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{o}[{a}]")?;
        }
        Ok(())
    }
}

impl fmt::Debug for AggregationOrdering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({self})")
    }
}
