//! Query hypergraphs: one vertex per attribute, one edge per atom.

use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use crate::error::{AjarError, Result};
use crate::value::{Attr, AttrSet};

/// A hyperedge. `attrs` keeps the atom's column order, `set` the same names as a set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub name: String,
    pub attrs: Vec<Attr>,
    #[serde(skip)]
    pub set: AttrSet,
}

impl Edge {
    pub fn new(name: &str, attrs: Vec<Attr>) -> Result<Self> {
        let set: AttrSet = attrs.iter().cloned().collect();
        if set.len() != attrs.len() {
            return Err(AjarError::Hypergraph(format!("edge {name} repeats an attribute")));
        }
        if set.is_empty() {
            return Err(AjarError::Hypergraph(format!("edge {name} is empty")));
        }
        Ok(Edge { name: name.to_string(), attrs, set })
    }

    pub fn from_set(name: &str, set: &AttrSet) -> Result<Self> {
        Self::new(name, set.iter().cloned().collect())
    }

    pub fn contains(&self, a: &Attr) -> bool {
        self.set.contains(a)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hypergraph {
    vertices: AttrSet,
    edges: Vec<Edge>,
}

impl Hypergraph {
    pub fn new(edges: Vec<Edge>) -> Self {
        let vertices = edges.iter().flat_map(|e| e.attrs.iter().cloned()).collect();
        Hypergraph { vertices, edges }
    }

    /// Hypergraph with extra isolated vertices.
    pub fn with_isolated(edges: Vec<Edge>, isolated: impl IntoIterator<Item = Attr>) -> Self {
        let mut h = Self::new(edges);
        h.vertices.extend(isolated);
        h
    }

    /// Build from `(name, attributes)` pairs.
    pub fn build(edges: &[(&str, &[&str])]) -> Result<Self> {
        let edges = edges
            .iter()
            .map(|(n, a)| Edge::new(n, a.iter().map(|x| Attr::new(x)).collect()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(edges))
    }

    /// Build from attribute lists only; edges are named `R0`, `R1`, ...
    pub fn from_sets(edges: &[&[&str]]) -> Result<Self> {
        let named: Vec<(String, &[&str])> =
            edges.iter().enumerate().map(|(i, e)| (format!("R{i}"), *e)).collect();
        let refs: Vec<(&str, &[&str])> = named.iter().map(|(n, e)| (n.as_str(), *e)).collect();
        Self::build(&refs)
    }

    pub fn vertices(&self) -> &AttrSet {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_sets(&self) -> Vec<AttrSet> {
        self.edges.iter().map(|e| e.set.clone()).collect()
    }

    /// Whether two distinct attributes share an edge.
    pub fn adjacent(&self, a: &Attr, b: &Attr) -> bool {
        self.edges.iter().any(|e| e.contains(a) && e.contains(b))
    }

    /// Indices of edges meeting `v`.
    pub fn edges_touching(&self, v: &AttrSet) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&i| self.edges[i].set.iter().any(|a| v.contains(a)))
            .collect()
    }

    /// Union of the edges meeting `v`.
    pub fn closure_of(&self, v: &AttrSet) -> AttrSet {
        self.edges_touching(v)
            .into_iter()
            .flat_map(|i| self.edges[i].set.iter().cloned())
            .collect()
    }

    /// Connected components of the hypergraph after deleting `removed`, in
    /// increasing order of their smallest member.
    pub fn connected_components(&self, removed: &AttrSet) -> Vec<AttrSet> {
        let mut seen: BTreeSet<Attr> = BTreeSet::new();
        let mut comps = Vec::new();
        for start in &self.vertices {
            if removed.contains(start) || seen.contains(start) {
                continue;
            }
            let allowed = |a: &Attr| !removed.contains(a);
            let comp = self.reach(start, allowed);
            seen.extend(comp.iter().cloned());
            comps.push(comp);
        }
        comps
    }

    fn reach(&self, start: &Attr, allowed: impl Fn(&Attr) -> bool) -> AttrSet {
        let mut comp = AttrSet::new();
        let mut queue = VecDeque::new();
        comp.insert(start.clone());
        queue.push_back(start.clone());
        while let Some(a) = queue.pop_front() {
            for e in &self.edges {
                if !e.contains(&a) {
                    continue;
                }
                for b in &e.set {
                    if allowed(b) && comp.insert(b.clone()) {
                        queue.push_back(b.clone());
                    }
                }
            }
        }
        comp
    }

    /// Whether `b` is reachable from `a` by consecutive attributes that share
    /// an edge and all lie in `allowed` (endpoints included).
    pub fn path_exists(&self, a: &Attr, b: &Attr, allowed: &AttrSet) -> bool {
        if !allowed.contains(a) || !allowed.contains(b) {
            return false;
        }
        self.reach(a, |x| allowed.contains(x)).contains(b)
    }

    /// The sub-hypergraph with edges restricted to `keep` (empty edges dropped).
    pub fn induced(&self, keep: &AttrSet) -> Hypergraph {
        let edges = self
            .edges
            .iter()
            .filter_map(|e| {
                let attrs: Vec<Attr> = e.attrs.iter().filter(|a| keep.contains(*a)).cloned().collect();
                Edge::new(&e.name, attrs).ok()
            })
            .collect();
        Hypergraph::with_isolated(edges, keep.iter().filter(|a| self.vertices.contains(*a)).cloned())
    }
}
