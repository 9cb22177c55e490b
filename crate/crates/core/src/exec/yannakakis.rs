//! Semijoin reduction and bottom-up joining over a join tree.

use std::collections::BTreeMap;

use crate::error::{AjarError, Result};
use crate::ghd::{top_map, Ghd, NodeId};
use crate::ordering::AggregationOrdering;
use crate::relation::{apply_aggregation, join_pair, semijoin, AnnotatedRelation, DomainRegistry};
use crate::semiring::{Annotation, SemiringSpec};
use crate::value::Attr;

use super::ExecStats;

/// Relations placed on the nodes of a rooted tree. The shape's bags are the
/// relation schemas.
#[derive(Clone, Debug)]
pub struct JoinTree<K: Annotation> {
    shape: Ghd,
    relations: Vec<AnnotatedRelation<K>>,
}

impl<K: Annotation> JoinTree<K> {
    /// `parents[i]` is the parent of node `i`. Fails unless every attribute
    /// occupies a connected set of nodes.
    pub fn new(relations: Vec<AnnotatedRelation<K>>, parents: Vec<Option<NodeId>>) -> Result<Self> {
        let bags = relations.iter().map(|r| r.attr_set()).collect();
        let shape = Ghd::from_parents(bags, parents)?;
        Self::from_shape(shape, relations)
    }

    pub fn from_shape(shape: Ghd, relations: Vec<AnnotatedRelation<K>>) -> Result<Self> {
        if shape.len() != relations.len() {
            return Err(AjarError::Schema("join tree needs one relation per node".into()));
        }
        for (n, r) in relations.iter().enumerate() {
            if r.attr_set() != *shape.bag(n) {
                return Err(AjarError::Schema(format!("node {n} relation does not match its bag")));
            }
        }
        top_map(&shape).map_err(|e| AjarError::Schema(format!("not a join tree: {e}")))?;
        Ok(JoinTree { shape, relations })
    }

    pub fn shape(&self) -> &Ghd {
        &self.shape
    }

    pub fn relations(&self) -> &[AnnotatedRelation<K>] {
        &self.relations
    }

    /// Full reducer: semijoins leaves-to-root, then root-to-leaves.
    fn reduce(&mut self, stats: &mut ExecStats) {
        let before: usize = self.relations.iter().map(|r| r.len()).sum();
        for n in self.shape.postorder() {
            if let Some(p) = self.shape.parent(n) {
                self.relations[p] = semijoin(&self.relations[p], &self.relations[n]);
            }
        }
        for n in self.shape.preorder() {
            if let Some(p) = self.shape.parent(n) {
                self.relations[n] = semijoin(&self.relations[n], &self.relations[p]);
            }
        }
        let after: usize = self.relations.iter().map(|r| r.len()).sum();
        stats.semijoin_removed += before - after;
    }
}

/// Full join of the node relations.
pub fn yannakakis<K: Annotation>(tree: &JoinTree<K>, semiring: &SemiringSpec<K>) -> AnnotatedRelation<K> {
    aggro_yannakakis_with_stats(tree, &AggregationOrdering::empty(), None, semiring, true, &mut ExecStats::default())
        .expect("no aggregation cannot fail")
}

/// Σ_α of the join of the node relations. Each aggregated attribute is
/// removed at its TOP node, innermost first, before joining into the parent.
pub fn aggro_yannakakis<K: Annotation>(
    tree: &JoinTree<K>,
    alpha: &AggregationOrdering,
    domains: Option<&DomainRegistry>,
    semiring: &SemiringSpec<K>,
) -> Result<AnnotatedRelation<K>> {
    aggro_yannakakis_with_stats(tree, alpha, domains, semiring, true, &mut ExecStats::default())
}

pub(crate) fn aggro_yannakakis_with_stats<K: Annotation>(
    tree: &JoinTree<K>,
    alpha: &AggregationOrdering,
    domains: Option<&DomainRegistry>,
    semiring: &SemiringSpec<K>,
    semijoins: bool,
    stats: &mut ExecStats,
) -> Result<AnnotatedRelation<K>> {
    let mut tree = tree.clone();
    if semijoins {
        tree.reduce(stats);
    }
    let g = &tree.shape;
    let tops = top_map(g)?;
    let mut at: BTreeMap<NodeId, Vec<(usize, Attr)>> = BTreeMap::new();
    for (a, _) in alpha.items() {
        let t = *tops
            .get(a)
            .ok_or_else(|| AjarError::Schema(format!("aggregated attribute {a} is in no node")))?;
        at.entry(t).or_default().push((alpha.position(a).expect("in alpha"), a.clone()));
    }

    let mut done: Vec<Option<AnnotatedRelation<K>>> = vec![None; g.len()];
    for n in g.postorder() {
        let mut acc = tree.relations[n].clone();
        for &c in g.children(n) {
            let child = done[c].take().expect("children finish first");
            acc = join_pair(&acc, &child, semiring);
            stats.join_intermediate += acc.len();
            stats.multiplications += acc.len();
        }
        if let Some(list) = at.get_mut(&n) {
            list.sort();
            for (_, a) in list.iter().rev() {
                let op = alpha.op(a).expect("in alpha");
                acc = apply_aggregation(&acc, a, op, domains, semiring)?;
            }
        }
        done[n] = Some(acc);
    }
    let out = done[g.root()].take().expect("root computed");
    let mut schema: Vec<Attr> = out.schema().to_vec();
    schema.sort();
    out.reorder(&schema)
}
