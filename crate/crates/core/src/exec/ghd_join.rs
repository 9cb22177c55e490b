//! GHD-driven execution: a worst-case optimal join per bag, then a
//! Yannakakis pass over the bag tree.

use std::collections::HashMap;

use crate::error::{AjarError, Result};
use crate::ghd::product::Aghd;
use crate::ghd::{check_ghd, compatibility_violation, top_map, Ghd, NodeId};
use crate::hypergraph::Hypergraph;
use crate::ordering::AggregationOrdering;
use crate::relation::{AnnotatedRelation, DomainRegistry};
use crate::semiring::{Annotation, SemiringSpec};
use crate::value::{Attr, AttrSet, Tuple, Value};

use super::generic_join::{join_relations, JoinCounters};
use super::yannakakis::{aggro_yannakakis_with_stats, JoinTree};
use super::{BagStats, ExecStats};

/// Full join of `relations` (one per edge of `h`) along `g`.
pub fn ghd_join<K: Annotation>(
    h: &Hypergraph,
    g: &Ghd,
    relations: &[AnnotatedRelation<K>],
    semiring: &SemiringSpec<K>,
) -> Result<AnnotatedRelation<K>> {
    aggro_ghd_join(h, g, &AggregationOrdering::empty(), relations, None, semiring)
}

/// Σ_α of the join along a GHD compatible with `alpha`.
pub fn aggro_ghd_join<K: Annotation>(
    h: &Hypergraph,
    g: &Ghd,
    alpha: &AggregationOrdering,
    relations: &[AnnotatedRelation<K>],
    domains: Option<&DomainRegistry>,
    semiring: &SemiringSpec<K>,
) -> Result<AnnotatedRelation<K>> {
    aggro_ghd_join_with_stats(h, g, alpha, relations, domains, semiring, &ExecOptions::default())
        .map(|(r, _)| r)
}

#[derive(Clone, Debug)]
pub struct ExecOptions {
    /// Run the semijoin reduction before the bottom-up pass.
    pub semijoins: bool,
}

impl Default for ExecOptions {
    fn default() -> Self {
        ExecOptions { semijoins: true }
    }
}

/// The node where relation `f` enters with its own annotations: the one
/// whose bag contains `f` and that is TOP of some attribute of `f`.
pub fn home_node(g: &Ghd, tops: &std::collections::BTreeMap<Attr, NodeId>, f: &AttrSet) -> Result<NodeId> {
    let homes: Vec<NodeId> = (0..g.len())
        .filter(|&t| f.is_subset(g.bag(t)) && f.iter().any(|a| tops.get(a) == Some(&t)))
        .collect();
    match homes.as_slice() {
        [t] => Ok(*t),
        _ => Err(AjarError::Internal(format!(
            "relation over {f:?} has {} candidate home bags",
            homes.len()
        ))),
    }
}

pub fn aggro_ghd_join_with_stats<K: Annotation>(
    h: &Hypergraph,
    g: &Ghd,
    alpha: &AggregationOrdering,
    relations: &[AnnotatedRelation<K>],
    domains: Option<&DomainRegistry>,
    semiring: &SemiringSpec<K>,
    options: &ExecOptions,
) -> Result<(AnnotatedRelation<K>, ExecStats)> {
    if relations.len() != h.edges().len() {
        return Err(AjarError::Schema(format!(
            "{} relations for {} edges",
            relations.len(),
            h.edges().len()
        )));
    }
    for (r, e) in relations.iter().zip(h.edges()) {
        if r.attr_set() != e.set {
            return Err(AjarError::Schema(format!(
                "relation for {} has attributes {:?}, expected {:?}",
                e.name,
                r.attr_set(),
                e.set
            )));
        }
    }
    check_ghd(h, g).map_err(AjarError::Decomposition)?;
    if let Some((a, b)) = compatibility_violation(h, g, alpha) {
        return Err(AjarError::Incompatible(format!("TOP({a}) is above TOP({b})")));
    }
    for op in alpha.items().iter().map(|(_, o)| o) {
        semiring.check_op(op)?;
    }
    let tops = top_map(g)?;
    let homes: Vec<NodeId> = h
        .edges()
        .iter()
        .map(|e| home_node(g, &tops, &e.set))
        .collect::<Result<_>>()?;

    let mut stats = ExecStats::default();
    let mut bag_relations = Vec::with_capacity(g.len());
    for t in 0..g.len() {
        let bag = g.bag(t);
        let mut inputs = Vec::new();
        for (i, r) in relations.iter().enumerate() {
            if homes[i] == t {
                inputs.push(r.clone());
            } else {
                let shared: AttrSet = r.attr_set().intersection(bag).cloned().collect();
                if !shared.is_empty() {
                    inputs.push(r.project_ones(&shared, semiring));
                }
            }
        }
        let refs: Vec<&AnnotatedRelation<K>> = inputs.iter().collect();
        let mut counters = JoinCounters::default();
        let joined = join_relations(&refs, semiring, &mut counters);
        stats.multiplications += counters.multiplications;
        stats.bags.push(BagStats {
            node: t,
            bag: bag.iter().cloned().collect(),
            input_tuples: inputs.iter().map(|r| r.len()).sum(),
            partial_bindings: counters.partial_bindings,
            output_tuples: joined.len(),
        });
        bag_relations.push(joined);
    }
    let tree = JoinTree::from_shape(g.clone(), bag_relations)?;
    let out = aggro_yannakakis_with_stats(&tree, alpha, domains, semiring, options.semijoins, &mut stats)?;
    Ok((out, stats))
}

/// Run a product query through its AGHD: rename each relation's product
/// attributes to the copies of its block, evaluate with the expanded
/// ordering, and the result keeps the original output names.
pub fn execute_aghd<K: Annotation>(
    h: &Hypergraph,
    aghd: &Aghd,
    alpha: &AggregationOrdering,
    relations: &[AnnotatedRelation<K>],
    domains: &DomainRegistry,
    semiring: &SemiringSpec<K>,
) -> Result<AnnotatedRelation<K>> {
    execute_aghd_with_stats(h, aghd, alpha, relations, domains, semiring, &ExecOptions::default()).map(|(r, _)| r)
}

pub fn execute_aghd_with_stats<K: Annotation>(
    h: &Hypergraph,
    aghd: &Aghd,
    alpha: &AggregationOrdering,
    relations: &[AnnotatedRelation<K>],
    domains: &DomainRegistry,
    semiring: &SemiringSpec<K>,
    options: &ExecOptions,
) -> Result<(AnnotatedRelation<K>, ExecStats)> {
    if alpha.has_products() && !semiring.is_multiply_idempotent() {
        return Err(AjarError::NonIdempotentProduct(semiring.name().to_string()));
    }
    if relations.len() != h.edges().len() {
        return Err(AjarError::Schema(format!(
            "{} relations for {} edges",
            relations.len(),
            h.edges().len()
        )));
    }
    let renamings = aghd.partition.edge_renamings(h);
    let renamed = relations
        .iter()
        .zip(&renamings)
        .map(|(r, m)| r.rename(m))
        .collect::<Result<Vec<_>>>()?;
    let domains = domains.with_copies(&aghd.copies);
    let beta = aghd.expand_ordering(alpha);
    aggro_ghd_join_with_stats(&aghd.hypergraph, &aghd.renamed, &beta, &renamed, Some(&domains), semiring, options)
}

/// Intermediate result sizes of the left-deep plan `((R_1 ⋈ R_2) ⋈ R_3) ⋈ ...`,
/// one entry per prefix of length at least two. Tuples are enumerated
/// depth-first, so nothing beyond one binding is held in memory.
pub fn left_deep_counts<K: Annotation>(relations: &[AnnotatedRelation<K>]) -> Vec<u64> {
    if relations.len() < 2 {
        return Vec::new();
    }
    // Attribute slots in order of first appearance.
    let mut slots: Vec<Attr> = Vec::new();
    for r in relations {
        for a in r.schema() {
            if !slots.contains(a) {
                slots.push(a.clone());
            }
        }
    }
    struct Step {
        bound: Vec<(usize, usize)>,
        fresh: Vec<(usize, usize)>,
        index: HashMap<Vec<Value>, Vec<Tuple>>,
    }
    let mut seen: Vec<bool> = vec![false; slots.len()];
    let mut steps = Vec::new();
    for r in relations {
        let mut bound = Vec::new();
        let mut fresh = Vec::new();
        for (c, a) in r.schema().iter().enumerate() {
            let s = slots.iter().position(|x| x == a).expect("slot");
            if seen[s] {
                bound.push((c, s));
            } else {
                fresh.push((c, s));
            }
        }
        for &(_, s) in &fresh {
            seen[s] = true;
        }
        let mut index: HashMap<Vec<Value>, Vec<Tuple>> = HashMap::new();
        for (t, _) in r.iter() {
            let key = bound.iter().map(|&(c, _)| t[c].clone()).collect();
            index.entry(key).or_default().push(t.clone());
        }
        steps.push(Step { bound, fresh, index });
    }

    fn go(steps: &[Step], i: usize, binding: &mut Vec<Option<Value>>, counts: &mut [u64]) {
        if i == steps.len() {
            return;
        }
        let step = &steps[i];
        let key: Vec<Value> = step
            .bound
            .iter()
            .map(|&(_, s)| binding[s].clone().expect("bound"))
            .collect();
        let Some(matches) = step.index.get(&key) else { return };
        for t in matches {
            if i > 0 {
                counts[i - 1] += 1;
            }
            for &(c, s) in &step.fresh {
                binding[s] = Some(t[c].clone());
            }
            go(steps, i + 1, binding, counts);
        }
        for &(_, s) in &step.fresh {
            binding[s] = None;
        }
    }

    let mut counts = vec![0u64; relations.len() - 1];
    let mut binding = vec![None; slots.len()];
    go(&steps, 0, &mut binding, &mut counts);
    counts
}
