//! Decomposable GHDs: the recursive structure check and the normalization
//! that turns any valid GHD into a decomposable one of no larger width.

use std::collections::BTreeMap;

use crate::error::{AjarError, Result};
use crate::hypergraph::{Edge, Hypergraph};
use crate::ordering::{compute_prec, AggregationOrdering, PrecedenceRelation};
use crate::value::{Attr, AttrSet};

use super::{check_ghd, is_valid, top_map, Ghd, NodeId};

impl Ghd {
    /// The subtree rooted at `n` as a standalone tree.
    pub fn extract(&self, n: NodeId) -> Ghd {
        let nodes = self.subtree(n);
        let index: BTreeMap<NodeId, usize> = nodes.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let bags = nodes.iter().map(|&x| self.bag(x).clone()).collect();
        let parents = nodes
            .iter()
            .map(|&x| if x == n { None } else { self.parent(x).map(|p| index[&p]) })
            .collect();
        Ghd::from_parents(bags, parents).expect("a subtree is a tree")
    }
}

/// Whether `g` is a decomposable GHD of the product-free query `(h, alpha)`.
pub fn is_decomposable(h: &Hypergraph, alpha: &AggregationOrdering, g: &Ghd) -> bool {
    decomposable_violation(h, alpha, g).is_none()
}

/// Reason `g` is not decomposable, if any.
pub fn decomposable_violation(h: &Hypergraph, alpha: &AggregationOrdering, g: &Ghd) -> Option<String> {
    if let Err(e) = check_ghd(h, g) {
        return Some(e);
    }
    if alpha.is_empty() {
        return None;
    }
    let prec = match compute_prec(h, alpha) {
        Ok(p) => p,
        Err(e) => return Some(e.to_string()),
    };
    let outputs = alpha.outputs(h);
    let comps = h.connected_components(&outputs);

    // T_0: the largest rooted subtree whose bags hold outputs only.
    let mut in_t0 = vec![false; g.len()];
    let mut hanging = Vec::new();
    if g.bag(g.root()).is_subset(&outputs) {
        let mut stack = vec![g.root()];
        while let Some(n) = stack.pop() {
            in_t0[n] = true;
            for &c in g.children(n) {
                if g.bag(c).is_subset(&outputs) {
                    stack.push(c);
                } else {
                    hanging.push(c);
                }
            }
        }
        let covered: AttrSet = (0..g.len())
            .filter(|&n| in_t0[n])
            .flat_map(|n| g.bag(n).iter().cloned())
            .collect();
        if covered != outputs {
            return Some(format!("output part covers {covered:?}, expected {outputs:?}"));
        }
    } else {
        if !outputs.is_empty() {
            return Some("root bag holds an aggregated attribute while outputs exist".into());
        }
        hanging.push(g.root());
    }

    let mut matched = vec![false; comps.len()];
    for s in hanging {
        let attrs: AttrSet = g.subtree(s).iter().flat_map(|&n| g.bag(n).iter().cloned()).collect();
        let inner: AttrSet = attrs.difference(&outputs).cloned().collect();
        let Some(ci) = comps.iter().position(|c| *c == inner) else {
            return Some(format!("subtree at node {s} holds {inner:?}, which is not one component"));
        };
        if matched[ci] {
            return Some(format!("component {inner:?} is split over several subtrees"));
        }
        matched[ci] = true;
        let c = &comps[ci];
        let sub_h = Hypergraph::new(h.edges_touching(c).into_iter().map(|i| h.edges()[i].clone()).collect());
        let front = prec.minimal(c);
        let sub_alpha = alpha.restrict(&c.difference(&front).cloned().collect());
        if let Some(e) = decomposable_violation(&sub_h, &sub_alpha, &g.extract(s)) {
            return Some(format!("in subtree for {c:?}: {e}"));
        }
    }
    if let Some(i) = matched.iter().position(|m| !m) {
        return Some(format!("component {:?} has no subtree", comps[i]));
    }
    None
}

fn tops_at(g: &Ghd) -> Result<Vec<Vec<Attr>>> {
    let tops = top_map(g)?;
    let mut at = vec![Vec::new(); g.len()];
    for (a, n) in tops {
        at[n].push(a);
    }
    Ok(at)
}

/// Rank for the split step: outputs first, then aggregation order.
fn rank(alpha: &AggregationOrdering, a: &Attr) -> (usize, Attr) {
    (alpha.position(a).map_or(0, |p| p + 1), a.clone())
}

/// Make every node the TOP of exactly one attribute (an empty root joining
/// several subtrees is kept), then move subtrees that do not touch their
/// node's attribute up to the grandparent. The result is checked for
/// decomposability; every new bag is a subset of an input bag.
pub fn normalize_decomposable(
    h: &Hypergraph,
    alpha: &AggregationOrdering,
    prec: &PrecedenceRelation,
    g: &Ghd,
) -> Result<Ghd> {
    if let Err(e) = check_ghd(h, g) {
        return Err(AjarError::Decomposition(e));
    }
    if !is_valid(g, prec) {
        return Err(AjarError::Decomposition("input GHD is not valid for the ordering".into()));
    }
    let mut g = top_unique(g, alpha)?;
    g = trim(h, &g)?;
    g = subtree_connected(h, &g)?;
    g = trim(h, &g)?;
    if let Some(e) = decomposable_violation(h, alpha, &g) {
        return Err(AjarError::Internal(format!("normalization did not yield a decomposable GHD: {e}")));
    }
    Ok(g)
}

fn top_unique(g: &Ghd, alpha: &AggregationOrdering) -> Result<Ghd> {
    let mut g = g.clone();
    loop {
        let at = tops_at(&g)?;
        // Nodes that are TOP of nothing.
        let mut remove = vec![false; g.len()];
        let mut any = false;
        for n in 0..g.len() {
            if at[n].is_empty() && n != g.root() {
                remove[n] = true;
                any = true;
            }
        }
        if any {
            g = g.remove_nodes(&remove);
            continue;
        }
        let root = g.root();
        if at[root].is_empty() && g.children(root).len() == 1 {
            let child = g.children(root)[0];
            let mut parents = g.parents();
            parents[child] = None;
            parents[root] = Some(child);
            let rerooted = Ghd::from_parents(g.bags(), parents)?;
            let mut rm = vec![false; g.len()];
            rm[root] = true;
            g = rerooted.remove_nodes(&rm);
            continue;
        }
        // Split a node with several TOPs.
        let Some(n) = (0..g.len()).find(|&n| at[n].len() > 1) else { return Ok(g) };
        let first = at[n]
            .iter()
            .min_by_key(|a| rank(alpha, a))
            .expect("several tops")
            .clone();
        let mut bag: AttrSet = match g.parent(n) {
            Some(p) => g.bag(n).intersection(g.bag(p)).cloned().collect(),
            None => AttrSet::new(),
        };
        bag.insert(first);
        let mut bags = g.bags();
        let mut parents = g.parents();
        let fresh = bags.len();
        bags.push(bag);
        parents.push(g.parent(n));
        parents[n] = Some(fresh);
        g = Ghd::from_parents(bags, parents)?;
    }
}

/// Keep each attribute only on the paths from its TOP down to the nodes
/// that cover an edge containing it, with every edge assigned to its
/// shallowest covering node.
fn trim(h: &Hypergraph, g: &Ghd) -> Result<Ghd> {
    let tops = top_map(g)?;
    let depth: Vec<usize> = (0..g.len())
        .map(|n| std::iter::successors(g.parent(n), |&p| g.parent(p)).count())
        .collect();
    let mut keep: Vec<AttrSet> = vec![AttrSet::new(); g.len()];
    for e in h.edges() {
        let Some(home) = (0..g.len()).filter(|&n| e.set.is_subset(g.bag(n))).min_by_key(|&n| depth[n]) else {
            return Err(AjarError::Decomposition(format!("edge {} is not covered", e.name)));
        };
        for x in &e.set {
            let mut n = home;
            while keep[n].insert(x.clone()) && n != tops[x] {
                n = g.parent(n).expect("TOP is an ancestor");
            }
        }
    }
    for (x, &t) in &tops {
        keep[t].insert(x.clone());
    }
    Ghd::from_parents(keep, g.parents())
}

fn subtree_connected(h: &Hypergraph, g: &Ghd) -> Result<Ghd> {
    let mut g = g.clone();
    'outer: loop {
        let at = tops_at(&g)?;
        let tops = top_map(&g)?;
        for t in g.postorder() {
            let Some(grand) = g.parent(t) else { continue };
            let [a] = at[t].as_slice() else { continue };
            for &c in g.children(t) {
                let below: AttrSet = g
                    .subtree(c)
                    .into_iter()
                    .flat_map(|n| at[n].iter().cloned())
                    .collect();
                let touches = h.edges().iter().any(|e: &Edge| {
                    e.contains(a) && e.set.iter().any(|x| below.contains(x))
                });
                if touches {
                    continue;
                }
                debug_assert!(tops[a] == t);
                let sub: std::collections::BTreeSet<NodeId> = g.subtree(c).into_iter().collect();
                let mut bags = g.bags();
                for &n in &sub {
                    bags[n].remove(a);
                }
                let mut parents = g.parents();
                parents[c] = Some(grand);
                g = Ghd::from_parents(bags, parents)?;
                continue 'outer;
            }
        }
        return Ok(g);
    }
}
