use crate::hypergraph::Hypergraph;
use crate::value::{Attr, AttrSet};

use super::AggregationOrdering;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EquivalenceVerdict {
    Equivalent,
    /// The orderings aggregate different attributes or use different operators.
    Mismatch(String),
    /// `earlier` comes before `later` in the candidate ordering, their
    /// operators differ, and a path connects them through attributes that
    /// are still aggregated at that point.
    Conflict { earlier: Attr, later: Attr },
}

impl EquivalenceVerdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, EquivalenceVerdict::Equivalent)
    }
}

/// Whether `alpha` and `beta` define the same query over `h` on every
/// instance. Orderings with product aggregations go through
/// [`test_equivalence_product`].
pub fn test_equivalence(h: &Hypergraph, alpha: &AggregationOrdering, beta: &AggregationOrdering) -> bool {
    explain_equivalence(h, alpha, beta).is_equivalent()
}

/// Product-aware variant: product attributes are set aside when splitting
/// into components and are never path interiors.
pub fn test_equivalence_product(
    h: &Hypergraph,
    alpha: &AggregationOrdering,
    beta: &AggregationOrdering,
) -> bool {
    match precheck(alpha, beta) {
        Some(v) => v.is_equivalent(),
        None => run(h, alpha, beta, true).is_equivalent(),
    }
}

/// Equivalence test with the reason for a negative answer.
pub fn explain_equivalence(
    h: &Hypergraph,
    alpha: &AggregationOrdering,
    beta: &AggregationOrdering,
) -> EquivalenceVerdict {
    if let Some(v) = precheck(alpha, beta) {
        return v;
    }
    let product = alpha.has_products();
    run(h, alpha, beta, product)
}

fn precheck(alpha: &AggregationOrdering, beta: &AggregationOrdering) -> Option<EquivalenceVerdict> {
    if !alpha.same_signature(beta) {
        return Some(EquivalenceVerdict::Mismatch(format!(
            "orderings ({alpha}) and ({beta}) differ in attributes or operators"
        )));
    }
    None
}

fn run(
    h: &Hypergraph,
    alpha: &AggregationOrdering,
    beta: &AggregationOrdering,
    product: bool,
) -> EquivalenceVerdict {
    if alpha.is_empty() {
        return EquivalenceVerdict::Equivalent;
    }
    let outputs = alpha.outputs(h);
    let products = if product { alpha.product_attrs() } else { AttrSet::new() };
    let removed: AttrSet = outputs.union(&products).cloned().collect();
    let comps = h.connected_components(&removed);
    if comps.len() > 1 {
        for c in comps {
            let mut part = c.clone();
            if product {
                part.extend(h.closure_of(&c).intersection(&products).cloned());
            }
            let v = run(h, &alpha.restrict(&part), &beta.restrict(&part), product);
            if !v.is_equivalent() {
                return v;
            }
        }
        // Product attributes outside every component share one operator and
        // commute among themselves.
        return EquivalenceVerdict::Equivalent;
    }

    let (a1, op1) = &alpha.items()[0];
    let j = beta.position(a1).expect("signatures match");
    let b = beta.items();
    for i in 0..j {
        let (bi, opi) = &b[i];
        if opi == op1 {
            continue;
        }
        let mut allowed: AttrSet = b[i..].iter().map(|(x, _)| x.clone()).collect();
        if product {
            allowed.retain(|x| !products.contains(x));
            allowed.insert(bi.clone());
            allowed.insert(a1.clone());
        }
        if h.path_exists(bi, a1, &allowed) {
            return EquivalenceVerdict::Conflict { earlier: bi.clone(), later: a1.clone() };
        }
    }
    run(h, &alpha.without(a1), &beta.without(a1), product)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ord(p: &[(&str, &str)]) -> AggregationOrdering {
        AggregationOrdering::from_pairs(p).unwrap()
    }

    #[test]
    fn chain_with_mixed_operators() {
        let h = Hypergraph::from_sets(&[&["A", "B"], &["B", "C"]]).unwrap();
        let alpha = ord(&[("A", "sum"), ("B", "max"), ("C", "max")]);
        assert!(test_equivalence(&h, &alpha, &ord(&[("A", "sum"), ("C", "max"), ("B", "max")])));
        assert!(!test_equivalence(&h, &alpha, &ord(&[("B", "max"), ("A", "sum"), ("C", "max")])));
        assert!(!test_equivalence(&h, &alpha, &ord(&[("C", "max"), ("A", "sum"), ("B", "max")])));
    }

    #[test]
    fn mismatch_is_reported() {
        let h = Hypergraph::from_sets(&[&["A", "B"]]).unwrap();
        let v = explain_equivalence(&h, &ord(&[("A", "sum")]), &ord(&[("A", "max")]));
        assert!(matches!(v, EquivalenceVerdict::Mismatch(_)));
    }

    #[test]
    fn disconnected_attributes_commute() {
        let h = Hypergraph::from_sets(&[&["A", "X"], &["X", "B"]]).unwrap();
        let alpha = ord(&[("A", "sum"), ("B", "max")]);
        assert!(test_equivalence(&h, &alpha, &ord(&[("B", "max"), ("A", "sum")])));
    }

    #[test]
    fn product_attribute_is_not_a_path_interior() {
        // A - P - B with P a product attribute: A and B commute.
        let h = Hypergraph::from_sets(&[&["A", "P"], &["P", "B"]]).unwrap();
        let alpha = ord(&[("A", "max"), ("B", "sum"), ("P", "prod")]);
        let beta = ord(&[("B", "sum"), ("A", "max"), ("P", "prod")]);
        assert!(test_equivalence_product(&h, &alpha, &beta));
        let gamma = ord(&[("P", "prod"), ("A", "max"), ("B", "sum")]);
        assert!(!test_equivalence_product(&h, &alpha, &gamma));
    }
}
