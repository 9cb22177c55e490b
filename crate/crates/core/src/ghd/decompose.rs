//! Characteristic hypergraphs of a query and stitching of their GHDs.
//!
//! The query splits into an output part `H_0` over the output attributes and
//! one sub-problem per connected component `C` of the aggregated attributes.
//! Each sub-problem drops its commutable-to-the-front attributes from the
//! ordering and recurses. Optimal GHDs of the resulting hypergraphs are glued
//! along the interface edges `V(-α) ∩ C⁺`.

use crate::error::{AjarError, Result};
use crate::hypergraph::{Edge, Hypergraph};
use crate::ordering::{compute_prec, AggregationOrdering};
use crate::value::AttrSet;

use super::search::{optimal_ghd, SearchConfig};
use super::width::{width, BagMeasure, Width};
use super::Ghd;

#[derive(Clone, Debug)]
pub struct CharacteristicNode {
    /// The output hypergraph of this level, or the whole sub-problem when
    /// its ordering is empty.
    pub hypergraph: Hypergraph,
    /// The ordering of the sub-problem this node stands for.
    pub ordering: AggregationOrdering,
    pub children: Vec<CharacteristicChild>,
    /// Edges holding a product attribute that meets no aggregated
    /// non-product attribute at this level, each with the rest of the edge.
    /// The edge becomes a leaf bag below a node covering the rest.
    pub leaves: Vec<(AttrSet, AttrSet)>,
}

#[derive(Clone, Debug)]
pub struct CharacteristicChild {
    /// Output attributes shared with the parent level.
    pub interface: AttrSet,
    /// The aggregated component this child covers.
    pub component: AttrSet,
    pub node: CharacteristicNode,
}

#[derive(Clone, Debug)]
pub struct CharacteristicDecomposition {
    pub root: CharacteristicNode,
}

impl CharacteristicDecomposition {
    /// All characteristic hypergraphs, parent before children.
    pub fn hypergraphs(&self) -> Vec<&Hypergraph> {
        fn go<'a>(n: &'a CharacteristicNode, out: &mut Vec<&'a Hypergraph>) {
            out.push(&n.hypergraph);
            for c in &n.children {
                go(&c.node, out);
            }
        }
        let mut out = Vec::new();
        go(&self.root, &mut out);
        out
    }

    pub fn len(&self) -> usize {
        self.hypergraphs().len()
    }

    /// Leaf bags over all levels.
    pub fn leaves(&self) -> Vec<&AttrSet> {
        fn go<'a>(n: &'a CharacteristicNode, out: &mut Vec<&'a AttrSet>) {
            out.extend(n.leaves.iter().map(|(bag, _)| bag));
            for c in &n.children {
                go(&c.node, out);
            }
        }
        let mut out = Vec::new();
        go(&self.root, &mut out);
        out
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

fn interface_edge(iface: &AttrSet) -> Result<Edge> {
    let names: Vec<&str> = iface.iter().map(|a| a.as_str()).collect();
    Edge::from_set(&format!("~{}", names.join(",")), iface)
}

/// Split `(h, alpha)` into characteristic hypergraphs. Orderings with product
/// aggregations use the product-aware split.
pub fn characteristic_hypergraphs(
    h: &Hypergraph,
    alpha: &AggregationOrdering,
) -> Result<CharacteristicDecomposition> {
    for (a, _) in alpha.items() {
        if !h.vertices().contains(a) {
            return Err(AjarError::Ordering(format!("attribute {a} is not in the hypergraph")));
        }
    }
    Ok(CharacteristicDecomposition { root: build(h.clone(), alpha.clone())? })
}

fn build(h: Hypergraph, alpha: AggregationOrdering) -> Result<CharacteristicNode> {
    if alpha.is_empty() {
        return Ok(CharacteristicNode { hypergraph: h, ordering: alpha, children: Vec::new(), leaves: Vec::new() });
    }
    let product = alpha.has_products();
    let outputs = alpha.outputs(&h);
    let products = alpha.product_attrs();
    let removed: AttrSet = outputs.union(&products).cloned().collect();
    let comps = h.connected_components(&removed);

    // A product attribute outside every component closure commutes to the
    // innermost position, so it distributes over the join: drop it here and
    // give each of its edges a leaf bag.
    let mut reached = outputs.clone();
    for c in &comps {
        reached.extend(h.closure_of(c));
    }
    let stray: AttrSet = products.difference(&reached).cloned().collect();
    if !stray.is_empty() {
        let leaves: Vec<(AttrSet, AttrSet)> = h
            .edges()
            .iter()
            .filter(|e| e.set.iter().any(|a| stray.contains(a)))
            .map(|e| (e.set.clone(), e.set.difference(&stray).cloned().collect()))
            .collect();
        let edges = h
            .edges()
            .iter()
            .filter_map(|e| Edge::new(&e.name, e.attrs.iter().filter(|a| !stray.contains(*a)).cloned().collect()).ok())
            .collect();
        let mut node = build(Hypergraph::new(edges), alpha.restrict(&alpha.attrs().difference(&stray).cloned().collect()))?;
        node.leaves.extend(leaves);
        return Ok(node);
    }
    let prec = if product { None } else { Some(compute_prec(&h, &alpha)?) };

    let mut h0_edges: Vec<Edge> =
        h.edges().iter().filter(|e| e.set.is_subset(&outputs)).cloned().collect();
    let mut children = Vec::new();
    let mut covered = outputs.clone();
    for c in comps {
        let touching = h.edges_touching(&c);
        let closure: AttrSet = touching.iter().flat_map(|&i| h.edges()[i].set.iter().cloned()).collect();
        let iface: AttrSet = closure.intersection(&outputs).cloned().collect();
        let mut sub_edges: Vec<Edge> = touching.iter().map(|&i| h.edges()[i].clone()).collect();
        if !iface.is_empty() {
            let e = interface_edge(&iface)?;
            h0_edges.push(e.clone());
            sub_edges.push(e);
        }
        let sub_h = Hypergraph::new(sub_edges);
        let sub_alpha = if product {
            let plus: AttrSet = c.union(&closure.intersection(&products).cloned().collect()).cloned().collect();
            let local = alpha.restrict(&plus);
            let front = commutable_front(&h, &local);
            covered.extend(plus.iter().cloned());
            local.restrict(&plus.difference(&front).cloned().collect())
        } else {
            let front = prec.as_ref().expect("product-free").minimal(&c);
            covered.extend(c.iter().cloned());
            alpha.restrict(&c.difference(&front).cloned().collect())
        };
        let node = build(sub_h, sub_alpha)?;
        children.push(CharacteristicChild { interface: iface, component: c, node });
    }
    // Edges of outputs and products only: the product distributes over the
    // rest of the join, so the edge hangs as a leaf below its outputs.
    let mut leaves = Vec::new();
    if product {
        for e in h.edges() {
            if e.set.is_subset(&outputs) || !e.set.is_subset(&removed) {
                continue;
            }
            let anchor: AttrSet = e.set.intersection(&outputs).cloned().collect();
            covered.extend(e.set.iter().cloned());
            if !anchor.is_empty() && !h0_edges.iter().any(|f| anchor.is_subset(&f.set)) {
                h0_edges.push(interface_edge(&anchor)?);
            }
            leaves.push((e.set.clone(), anchor));
        }
    }
    if let Some(a) = h.vertices().iter().find(|a| !covered.contains(*a)) {
        return Err(AjarError::Internal(format!("attribute {a} is in no characteristic hypergraph")));
    }
    Ok(CharacteristicNode { hypergraph: Hypergraph::new(h0_edges), ordering: alpha, children, leaves })
}

/// Attributes of `local` that can be moved to the front: the first item alone
/// when it is a product aggregation, otherwise every attribute with no
/// earlier item of a different operator connected to it through later
/// non-product attributes.
fn commutable_front(h: &Hypergraph, local: &AggregationOrdering) -> AttrSet {
    let items = local.items();
    if items.is_empty() {
        return AttrSet::new();
    }
    if items[0].1.is_product() {
        return [items[0].0.clone()].into_iter().collect();
    }
    let products = local.product_attrs();
    let mut out = AttrSet::new();
    for j in 0..items.len() {
        let (a, op_a) = &items[j];
        let blocked = (0..j).any(|i| {
            let (b, op_b) = &items[i];
            if op_b == op_a {
                return false;
            }
            let mut allowed: AttrSet = items[i..]
                .iter()
                .map(|(x, _)| x.clone())
                .filter(|x| !products.contains(x))
                .collect();
            allowed.insert(a.clone());
            allowed.insert(b.clone());
            h.path_exists(a, b, &allowed)
        });
        if !blocked {
            out.insert(a.clone());
        }
    }
    out
}

/// Glue per-hypergraph GHDs (in [`CharacteristicDecomposition::hypergraphs`]
/// order) into one tree: each child tree is re-rooted at a node covering its
/// interface and hung below a parent node covering the same interface.
pub fn stitch(decomp: &CharacteristicDecomposition, parts: &[Ghd]) -> Result<Ghd> {
    let expected = decomp.len();
    if parts.len() != expected {
        return Err(AjarError::Decomposition(format!(
            "expected {expected} part decompositions, got {}",
            parts.len()
        )));
    }
    let mut idx = 0;
    stitch_node(&decomp.root, parts, &mut idx)
}

fn stitch_node(node: &CharacteristicNode, parts: &[Ghd], idx: &mut usize) -> Result<Ghd> {
    let mut g = parts[*idx].clone();
    *idx += 1;
    for child in &node.children {
        let sub = stitch_node(&child.node, parts, idx)?;
        if child.interface.is_empty() {
            let root = g.root();
            g.graft(root, &sub);
            continue;
        }
        let at = g
            .preorder()
            .into_iter()
            .find(|&n| child.interface.is_subset(g.bag(n)))
            .ok_or_else(|| {
                AjarError::Decomposition(format!("no parent bag covers interface {:?}", child.interface))
            })?;
        let t = sub
            .preorder()
            .into_iter()
            .find(|&n| child.interface.is_subset(sub.bag(n)))
            .ok_or_else(|| {
                AjarError::Decomposition(format!("no child bag covers interface {:?}", child.interface))
            })?;
        g.graft(at, &sub.reroot(t));
    }
    for (leaf, anchor) in &node.leaves {
        let at = g
            .preorder()
            .into_iter()
            .find(|&n| anchor.is_subset(g.bag(n)))
            .ok_or_else(|| AjarError::Decomposition(format!("no bag covers {anchor:?}")))?;
        g.add_child(at, leaf.clone());
    }
    Ok(g)
}

/// Characteristic hypergraphs, an optimal GHD of each, and their stitch.
#[derive(Clone, Debug)]
pub struct StitchedDecomposition {
    pub characteristic: CharacteristicDecomposition,
    pub parts: Vec<Ghd>,
    pub part_widths: Vec<Width>,
    /// Costs of the product leaf bags.
    pub leaf_widths: Vec<Width>,
    pub ghd: Ghd,
    pub width: Width,
}

/// Decompose, optimize each characteristic hypergraph under `measure`, and stitch.
pub fn stitched_decomposition(
    h: &Hypergraph,
    alpha: &AggregationOrdering,
    measure: &dyn BagMeasure,
    cfg: &SearchConfig,
) -> Result<StitchedDecomposition> {
    let characteristic = characteristic_hypergraphs(h, alpha)?;
    let mut parts = Vec::new();
    let mut part_widths = Vec::new();
    for hc in characteristic.hypergraphs() {
        let (g, w) = optimal_ghd(hc, measure, cfg)?;
        parts.push(g);
        part_widths.push(w);
    }
    let ghd = stitch(&characteristic, &parts)?;
    let width = width(&ghd, measure)?.overall;
    let leaf_widths = characteristic.leaves().into_iter().map(|l| measure.measure(l)).collect::<Result<Vec<_>>>()?;
    Ok(StitchedDecomposition { characteristic, parts, part_widths, leaf_widths, ghd, width })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ghd::width::FractionalCover;
    use crate::ghd::{is_ghd, is_valid};
    use crate::value::attrs;

    fn ord(p: &[(&str, &str)]) -> AggregationOrdering {
        AggregationOrdering::from_pairs(p).unwrap()
    }

    #[test]
    fn two_hop_example_gives_a_path() {
        let h = Hypergraph::from_sets(&[&["A", "B"], &["B", "C"]]).unwrap();
        let alpha = ord(&[("B", "sum"), ("C", "sum")]);
        let d = characteristic_hypergraphs(&h, &alpha).unwrap();
        assert_eq!(d.len(), 2);
        let s = stitched_decomposition(&h, &alpha, &FractionalCover::unit(&h), &SearchConfig::default())
            .unwrap();
        let bags: Vec<AttrSet> = s.ghd.preorder().iter().map(|&n| s.ghd.bag(n).clone()).collect();
        assert_eq!(bags, vec![attrs(&["A"]), attrs(&["A", "B"]), attrs(&["B", "C"])]);
        assert_eq!(s.width, Width::exact(1, 1));
    }

    #[test]
    fn star_splits_into_small_pieces() {
        let leaves = ["B1", "B2", "B3", "B4"];
        let edges: Vec<Vec<&str>> = leaves.iter().map(|b| vec!["A", *b]).collect();
        let refs: Vec<&[&str]> = edges.iter().map(|e| e.as_slice()).collect();
        let h = Hypergraph::from_sets(&refs).unwrap();
        let alpha = AggregationOrdering::from_pairs(&leaves.map(|b| (b, "sum"))).unwrap();
        let d = characteristic_hypergraphs(&h, &alpha).unwrap();
        let hs = d.hypergraphs();
        assert_eq!(hs.len(), leaves.len() + 1);
        assert!(hs.iter().all(|x| x.vertices().len() <= 2));
    }

    #[test]
    fn stitched_tree_is_valid() {
        let h = Hypergraph::from_sets(&[&["A", "B"], &["B", "D"], &["C", "D"]]).unwrap();
        let alpha = ord(&[("A", "sum"), ("B", "max"), ("C", "max"), ("D", "sum")]);
        let s = stitched_decomposition(&h, &alpha, &FractionalCover::unit(&h), &SearchConfig::default())
            .unwrap();
        assert!(is_ghd(&h, &s.ghd));
        assert!(is_valid(&s.ghd, &compute_prec(&h, &alpha).unwrap()));
    }
}
