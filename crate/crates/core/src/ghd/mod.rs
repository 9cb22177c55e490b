//! Generalized hypertree decompositions: structure checks, TOP nodes,
//! compatibility with orderings, width, and construction.

pub mod decompose;
pub mod lp;
pub mod normalize;
pub mod product;
pub mod search;
pub mod width;

pub use decompose::{
    characteristic_hypergraphs, stitch, stitched_decomposition, CharacteristicDecomposition, StitchedDecomposition,
};
pub use normalize::{decomposable_violation, is_decomposable, normalize_decomposable};
pub use product::{product_partition_hypergraph, Aghd, ProductPartition};
pub use search::{optimal_ghd, SearchConfig};
pub use width::{ghd_width, width, BagMeasure, FractionalCover, Statistics, Width, WidthMode, WidthReport};

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::{AjarError, Result};
use crate::hypergraph::Hypergraph;
use crate::ordering::{AggregationOrdering, PrecedenceRelation};
use crate::value::{Attr, AttrSet};

pub type NodeId = usize;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GhdNode {
    pub bag: AttrSet,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
}

/// A rooted tree with a bag of attributes at every node.
#[derive(Clone, PartialEq, Eq)]
pub struct Ghd {
    nodes: Vec<GhdNode>,
    root: NodeId,
}

impl fmt::Debug for Ghd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(g: &Ghd, n: NodeId, depth: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            let names: Vec<&str> = g.nodes[n].bag.iter().map(|a| a.as_str()).collect();
            writeln!(f, "{}#{n} {{{}}}", "  ".repeat(depth), names.join(","))?;
            for &c in &g.nodes[n].children {
                go(g, c, depth + 1, f)?;
            }
            Ok(())
        }
        go(self, self.root, 0, f)
    }
}

impl Ghd {
    pub fn single(bag: AttrSet) -> Self {
        Ghd { nodes: vec![GhdNode { bag, parent: None, children: Vec::new() }], root: 0 }
    }

    /// A path; the first bag is the root.
    pub fn chain(bags: Vec<AttrSet>) -> Self {
        let parents = (0..bags.len()).map(|i| i.checked_sub(1)).collect();
        Self::from_parents(bags, parents).expect("a chain is a tree")
    }

    /// Build from bags and parent pointers; exactly one node has no parent.
    pub fn from_parents(bags: Vec<AttrSet>, parents: Vec<Option<NodeId>>) -> Result<Self> {
        if bags.is_empty() || bags.len() != parents.len() {
            return Err(AjarError::Decomposition("bags and parents must be non-empty and aligned".into()));
        }
        let n = bags.len();
        let roots: Vec<NodeId> = (0..n).filter(|&i| parents[i].is_none()).collect();
        if roots.len() != 1 {
            return Err(AjarError::Decomposition(format!("expected one root, found {}", roots.len())));
        }
        for (i, p) in parents.iter().enumerate() {
            if let Some(p) = p {
                if *p >= n || *p == i {
                    return Err(AjarError::Decomposition(format!("bad parent for node {i}")));
                }
            }
        }
        for start in 0..n {
            let mut cur = start;
            let mut steps = 0;
            while let Some(p) = parents[cur] {
                cur = p;
                steps += 1;
                if steps > n {
                    return Err(AjarError::Decomposition("parent pointers contain a cycle".into()));
                }
            }
        }
        let mut nodes: Vec<GhdNode> = bags
            .into_iter()
            .zip(&parents)
            .map(|(bag, p)| GhdNode { bag, parent: *p, children: Vec::new() })
            .collect();
        for i in 0..n {
            if let Some(p) = parents[i] {
                nodes[p].children.push(i);
            }
        }
        Ok(Ghd { nodes, root: roots[0] })
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[GhdNode] {
        &self.nodes
    }

    pub fn bag(&self, n: NodeId) -> &AttrSet {
        &self.nodes[n].bag
    }

    pub fn parent(&self, n: NodeId) -> Option<NodeId> {
        self.nodes[n].parent
    }

    pub fn children(&self, n: NodeId) -> &[NodeId] {
        &self.nodes[n].children
    }

    pub fn parents(&self) -> Vec<Option<NodeId>> {
        self.nodes.iter().map(|n| n.parent).collect()
    }

    pub fn bags(&self) -> Vec<AttrSet> {
        self.nodes.iter().map(|n| n.bag.clone()).collect()
    }

    /// Append a node under `parent`.
    pub fn add_child(&mut self, parent: NodeId, bag: AttrSet) -> NodeId {
        let id = self.nodes.len();
        self.nodes.push(GhdNode { bag, parent: Some(parent), children: Vec::new() });
        self.nodes[parent].children.push(id);
        id
    }

    /// Copy `other` in and hang its root under `at`. Returns the id offset.
    pub fn graft(&mut self, at: NodeId, other: &Ghd) -> NodeId {
        let offset = self.nodes.len();
        for (i, n) in other.nodes.iter().enumerate() {
            let parent = match n.parent {
                Some(p) => Some(p + offset),
                None => Some(at),
            };
            self.nodes.push(GhdNode {
                bag: n.bag.clone(),
                parent,
                children: n.children.iter().map(|c| c + offset).collect(),
            });
            if i == other.root {
                self.nodes[at].children.push(i + offset);
            }
        }
        offset
    }

    pub fn preorder(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root];
        while let Some(n) = stack.pop() {
            out.push(n);
            for &c in self.nodes[n].children.iter().rev() {
                stack.push(c);
            }
        }
        out
    }

    pub fn postorder(&self) -> Vec<NodeId> {
        let mut out = self.preorder();
        out.reverse();
        out
    }

    pub fn depth(&self, n: NodeId) -> usize {
        let mut d = 0;
        let mut cur = n;
        while let Some(p) = self.nodes[cur].parent {
            d += 1;
            cur = p;
        }
        d
    }

    /// Strict ancestry.
    pub fn is_ancestor(&self, a: NodeId, b: NodeId) -> bool {
        let mut cur = b;
        while let Some(p) = self.nodes[cur].parent {
            if p == a {
                return true;
            }
            cur = p;
        }
        false
    }

    /// Nodes of the subtree rooted at `n`, `n` first.
    pub fn subtree(&self, n: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![n];
        while let Some(x) = stack.pop() {
            out.push(x);
            for &c in self.nodes[x].children.iter().rev() {
                stack.push(c);
            }
        }
        out
    }

    pub fn attrs(&self) -> AttrSet {
        self.nodes.iter().flat_map(|n| n.bag.iter().cloned()).collect()
    }

    /// The same tree rooted at `new_root`.
    pub fn reroot(&self, new_root: NodeId) -> Ghd {
        let mut parents = self.parents();
        let mut prev = None;
        let mut cur = Some(new_root);
        while let Some(c) = cur {
            let next = self.nodes[c].parent;
            parents[c] = prev;
            prev = Some(c);
            cur = next;
        }
        Ghd::from_parents(self.bags(), parents).expect("re-rooting preserves the tree")
    }

    /// Structural encoding invariant under sibling order, used for de-duplication.
    pub fn canonical(&self) -> String {
        fn go(g: &Ghd, n: NodeId) -> String {
            let names: Vec<&str> = g.nodes[n].bag.iter().map(|a| a.as_str()).collect();
            let mut kids: Vec<String> = g.nodes[n].children.iter().map(|&c| go(g, c)).collect();
            kids.sort();
            format!("{{{}}}[{}]", names.join(","), kids.join(","))
        }
        go(self, self.root)
    }

    /// Rename bag attributes per node.
    pub fn map_bags(&self, mut f: impl FnMut(NodeId, &AttrSet) -> AttrSet) -> Ghd {
        let mut g = self.clone();
        for (i, n) in g.nodes.iter_mut().enumerate() {
            n.bag = f(i, &self.nodes[i].bag);
        }
        g
    }

    /// Drop the nodes flagged in `remove`; a removed node's children move to
    /// its nearest surviving ancestor. The root must survive.
    pub fn remove_nodes(&self, remove: &[bool]) -> Ghd {
        assert!(!remove[self.root], "cannot remove the root");
        let mut new_id = vec![usize::MAX; self.nodes.len()];
        let mut bags = Vec::new();
        for i in self.preorder() {
            if !remove[i] {
                new_id[i] = bags.len();
                bags.push(self.nodes[i].bag.clone());
            }
        }
        let mut parents = vec![None; bags.len()];
        for i in self.preorder() {
            if remove[i] {
                continue;
            }
            let mut p = self.nodes[i].parent;
            while let Some(x) = p {
                if !remove[x] {
                    break;
                }
                p = self.nodes[x].parent;
            }
            parents[new_id[i]] = p.map(|x| new_id[x]);
        }
        Ghd::from_parents(bags, parents).expect("removal preserves the tree")
    }

    /// Merge neighbours until no bag is contained in an adjacent bag.
    pub fn simplify(&self) -> Ghd {
        let mut g = self.clone();
        loop {
            let mut changed = false;
            for i in g.preorder() {
                let Some(p) = g.nodes[i].parent else { continue };
                if g.nodes[i].bag.is_subset(&g.nodes[p].bag) {
                    let mut rm = vec![false; g.len()];
                    rm[i] = true;
                    g = g.remove_nodes(&rm);
                    changed = true;
                    break;
                }
                if g.nodes[p].bag.is_subset(&g.nodes[i].bag) {
                    let bag = g.nodes[i].bag.clone();
                    g.nodes[p].bag = bag;
                    let mut rm = vec![false; g.len()];
                    rm[i] = true;
                    g = g.remove_nodes(&rm);
                    changed = true;
                    break;
                }
            }
            if !changed {
                return g;
            }
        }
    }
}

/// Why a tree fails to be a GHD of a hypergraph.
pub fn check_ghd(h: &Hypergraph, g: &Ghd) -> std::result::Result<(), String> {
    for e in h.edges() {
        if !g.nodes.iter().any(|n| e.set.is_subset(&n.bag)) {
            return Err(format!("edge {} ({:?}) is not covered by any bag", e.name, e.set));
        }
    }
    for (i, n) in g.nodes.iter().enumerate() {
        if let Some(a) = n.bag.iter().find(|a| !h.vertices().contains(*a)) {
            return Err(format!("bag of node {i} contains {a}, which is not a vertex"));
        }
    }
    for v in h.vertices() {
        let tops = tops_of(g, v);
        if tops.len() != 1 {
            return Err(format!(
                "nodes containing {v} form {} connected pieces; running intersection fails",
                tops.len()
            ));
        }
    }
    Ok(())
}

pub fn is_ghd(h: &Hypergraph, g: &Ghd) -> bool {
    check_ghd(h, g).is_ok()
}

/// Nodes containing `a` whose parent does not contain `a`.
pub fn tops_of(g: &Ghd, a: &Attr) -> Vec<NodeId> {
    (0..g.len())
        .filter(|&i| {
            g.nodes[i].bag.contains(a)
                && g.nodes[i].parent.map_or(true, |p| !g.nodes[p].bag.contains(a))
        })
        .collect()
}

/// TOP(a): the highest node containing `a`, for every attribute in a bag.
pub fn top_map(g: &Ghd) -> Result<BTreeMap<Attr, NodeId>> {
    let mut out = BTreeMap::new();
    for a in g.attrs() {
        let tops = tops_of(g, &a);
        if tops.len() != 1 {
            return Err(AjarError::Decomposition(format!(
                "attribute {a} has {} highest nodes; running intersection fails",
                tops.len()
            )));
        }
        out.insert(a, tops[0]);
    }
    Ok(out)
}

/// Every pair with TOP(a) strictly above TOP(b) has `a` an output or `a`
/// before `b` in `beta`.
pub fn is_compatible(h: &Hypergraph, g: &Ghd, beta: &AggregationOrdering) -> bool {
    compatibility_violation(h, g, beta).is_none()
}

/// The first pair breaking compatibility.
pub fn compatibility_violation(
    h: &Hypergraph,
    g: &Ghd,
    beta: &AggregationOrdering,
) -> Option<(Attr, Attr)> {
    let Ok(tops) = top_map(g) else {
        return Some((Attr::new("?"), Attr::new("?")));
    };
    let outputs = beta.outputs(h);
    for (a, &ta) in &tops {
        for (b, &tb) in &tops {
            if a == b || !g.is_ancestor(ta, tb) {
                continue;
            }
            if outputs.contains(a) {
                continue;
            }
            match (beta.position(a), beta.position(b)) {
                (Some(pa), Some(pb)) if pa < pb => {}
                _ => return Some((a.clone(), b.clone())),
            }
        }
    }
    None
}

/// No pair with TOP(a) strictly above TOP(b) while `b <_{H,α} a`.
pub fn is_valid(g: &Ghd, prec: &PrecedenceRelation) -> bool {
    let Ok(tops) = top_map(g) else { return false };
    for (a, &ta) in &tops {
        for (b, &tb) in &tops {
            if a != b && g.is_ancestor(ta, tb) && prec.lt(b, a) {
                return false;
            }
        }
    }
    true
}
