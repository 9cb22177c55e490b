//! Product partitions and aggregate GHDs (AGHDs).
//!
//! With an idempotent multiplication, a product-aggregated attribute `a` may
//! be split into copies `a#1, a#2, ...`, one per block of the edges that
//! contain it, without changing the query. An AGHD is a tree whose
//! renaming under such a partition is an ordinary GHD.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{AjarError, Result};
use crate::hypergraph::{Edge, Hypergraph};
use crate::ordering::AggregationOrdering;
use crate::value::{Attr, AttrSet};

use super::{check_ghd, tops_of, Ghd, NodeId};

/// For each product attribute, a partition of the indices of the edges containing it.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ProductPartition {
    pub blocks: BTreeMap<Attr, Vec<Vec<usize>>>,
}

/// Name of the `i`-th copy (1-based) of `a`.
pub fn copy_name(a: &Attr, i: usize) -> Attr {
    Attr::from(format!("{a}#{i}"))
}

impl ProductPartition {
    /// One block per product attribute holding every edge that contains it.
    pub fn trivial(h: &Hypergraph, alpha: &AggregationOrdering) -> Self {
        let blocks = alpha
            .product_attrs()
            .into_iter()
            .map(|a| {
                let edges = (0..h.edges().len()).filter(|&i| h.edges()[i].contains(&a)).collect();
                (a, vec![edges])
            })
            .collect();
        ProductPartition { blocks }
    }

    /// Copy names per attribute; a single block keeps the original name.
    pub fn copies(&self) -> BTreeMap<Attr, Vec<Attr>> {
        self.blocks
            .iter()
            .map(|(a, bs)| {
                let names = if bs.len() == 1 {
                    vec![a.clone()]
                } else {
                    (1..=bs.len()).map(|i| copy_name(a, i)).collect()
                };
                (a.clone(), names)
            })
            .collect()
    }

    /// Copy name of `a` inside edge `edge`.
    pub fn copy_for(&self, a: &Attr, edge: usize) -> Option<Attr> {
        let bs = self.blocks.get(a)?;
        let i = bs.iter().position(|b| b.contains(&edge))?;
        Some(if bs.len() == 1 { a.clone() } else { copy_name(a, i + 1) })
    }

    /// Per-edge renaming maps.
    pub fn edge_renamings(&self, h: &Hypergraph) -> Vec<BTreeMap<Attr, Attr>> {
        (0..h.edges().len())
            .map(|e| {
                h.edges()[e]
                    .attrs
                    .iter()
                    .filter_map(|a| self.copy_for(a, e).map(|c| (a.clone(), c)))
                    .filter(|(a, c)| a != c)
                    .collect()
            })
            .collect()
    }
}

/// `H_P`: every product attribute replaced, edge by edge, by the copy of its block.
pub fn product_partition_hypergraph(
    h: &Hypergraph,
    alpha: &AggregationOrdering,
    p: &ProductPartition,
) -> Result<Hypergraph> {
    for a in alpha.product_attrs() {
        let bs = p
            .blocks
            .get(&a)
            .ok_or_else(|| AjarError::Decomposition(format!("no partition for product attribute {a}")))?;
        let mut seen: Vec<usize> = bs.iter().flatten().copied().collect();
        seen.sort_unstable();
        let expect: Vec<usize> = (0..h.edges().len()).filter(|&i| h.edges()[i].contains(&a)).collect();
        if seen != expect || bs.iter().any(|b| b.is_empty()) {
            return Err(AjarError::Decomposition(format!(
                "blocks for {a} do not partition the edges containing it"
            )));
        }
    }
    if let Some(a) = p.blocks.keys().find(|a| !alpha.op(a).is_some_and(|o| o.is_product())) {
        return Err(AjarError::Decomposition(format!("{a} is not product-aggregated")));
    }
    let maps = p.edge_renamings(h);
    let edges = h
        .edges()
        .iter()
        .zip(&maps)
        .map(|(e, m)| {
            Edge::new(&e.name, e.attrs.iter().map(|a| m.get(a).cloned().unwrap_or_else(|| a.clone())).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Hypergraph::new(edges))
}

/// A tree over the original attribute names together with the partition it
/// induces and its renaming into a GHD of `H_P`.
#[derive(Clone, Debug)]
pub struct Aghd {
    pub tree: Ghd,
    pub partition: ProductPartition,
    pub renamed: Ghd,
    pub hypergraph: Hypergraph,
    /// Copies of each product attribute, ordered by the preorder of their TOP nodes.
    pub copies: BTreeMap<Attr, Vec<Attr>>,
}

impl Aghd {
    /// Derive the partition from `tree`: each maximal connected set of nodes
    /// containing a product attribute is one copy, and every edge goes to the
    /// first copy (in preorder) with a bag covering it. Copies that cover no
    /// edge are dropped from their bags.
    pub fn from_tree(h: &Hypergraph, alpha: &AggregationOrdering, tree: &Ghd) -> Result<Aghd> {
        let order: Vec<NodeId> = tree.preorder();
        let rank: BTreeMap<NodeId, usize> = order.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        let mut tree = tree.clone();
        let mut blocks = BTreeMap::new();
        let mut piece_of: BTreeMap<Attr, Vec<Option<usize>>> = BTreeMap::new();
        for a in alpha.product_attrs() {
            let mut tops = tops_of(&tree, &a);
            tops.sort_by_key(|t| rank[t]);
            let piece: Vec<Option<usize>> = (0..tree.len())
                .map(|n| {
                    if !tree.bag(n).contains(&a) {
                        return None;
                    }
                    let mut cur = n;
                    while let Some(p) = tree.parent(cur) {
                        if !tree.bag(p).contains(&a) {
                            break;
                        }
                        cur = p;
                    }
                    tops.iter().position(|&t| t == cur)
                })
                .collect();
            let mut assigned: Vec<Vec<usize>> = vec![Vec::new(); tops.len()];
            for (ei, e) in h.edges().iter().enumerate() {
                if !e.contains(&a) {
                    continue;
                }
                let home = order
                    .iter()
                    .find(|&&n| e.set.is_subset(tree.bag(n)))
                    .and_then(|&n| piece[n])
                    .ok_or_else(|| {
                        AjarError::Decomposition(format!("edge {} is not covered by any bag", e.name))
                    })?;
                assigned[home].push(ei);
            }
            // Drop copies that cover no edge.
            let keep: Vec<usize> = (0..tops.len()).filter(|&i| !assigned[i].is_empty()).collect();
            for n in 0..tree.len() {
                if let Some(pi) = piece[n] {
                    if assigned[pi].is_empty() {
                        let mut bag = tree.bag(n).clone();
                        bag.remove(&a);
                        tree = tree.map_bags(|x, b| if x == n { bag.clone() } else { b.clone() });
                    }
                }
            }
            let remap: Vec<Option<usize>> = piece
                .iter()
                .map(|p| p.and_then(|pi| keep.iter().position(|&k| k == pi)))
                .collect();
            blocks.insert(a.clone(), keep.iter().map(|&i| assigned[i].clone()).collect::<Vec<_>>());
            piece_of.insert(a, remap);
        }
        let partition = ProductPartition { blocks };
        let hypergraph = product_partition_hypergraph(h, alpha, &partition)?;
        let copies = partition.copies();
        let renamed = tree.map_bags(|n, bag| {
            bag.iter()
                .map(|x| match (piece_of.get(x), copies.get(x)) {
                    (Some(pieces), Some(names)) => {
                        let i = pieces[n].expect("node holding a product attribute has a piece");
                        names[i].clone()
                    }
                    _ => x.clone(),
                })
                .collect::<AttrSet>()
        });
        if let Err(e) = check_ghd(&hypergraph, &renamed) {
            return Err(AjarError::Decomposition(format!("renamed tree is not a GHD of H_P: {e}")));
        }
        Ok(Aghd { tree, partition, renamed, hypergraph, copies })
    }

    /// `beta` with each product item replaced by its copies.
    pub fn expand_ordering(&self, beta: &AggregationOrdering) -> AggregationOrdering {
        beta.expand(&self.copies)
    }

    /// Compatibility of the AGHD with `beta`.
    pub fn is_compatible(&self, beta: &AggregationOrdering) -> bool {
        super::is_compatible(&self.hypergraph, &self.renamed, &self.expand_ordering(beta))
    }
}
