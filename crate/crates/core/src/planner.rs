//! From a query to a minimum-width valid plan, and plan execution.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{AjarError, Result};
use crate::exec::{aggro_ghd_join_with_stats, execute_aghd_with_stats, ExecOptions, ExecStats};
use crate::ghd::{
    compatibility_violation, stitched_decomposition, top_map, width, Aghd, FractionalCover, Ghd, NodeId,
    SearchConfig, Statistics, Width, WidthMode, WidthReport,
};
use crate::hypergraph::{Edge, Hypergraph};
use crate::ordering::{
    explain_equivalence, test_equivalence, test_equivalence_product, AggregationOrdering, LinearExtensions,
    DEFAULT_EXTENSION_CAP,
};
use crate::relation::{AnnotatedRelation, DomainRegistry};
use crate::semiring::{AggOp, Annotation, SemiringSpec};
use crate::value::{Attr, AttrSet};

#[derive(Clone, Debug)]
pub struct PlanConfig {
    pub mode: WidthMode,
    pub stats: Option<Statistics>,
    pub search: SearchConfig,
    /// Whether the target semiring's multiplication is idempotent. Product
    /// aggregations are rejected otherwise.
    pub multiply_idempotent: bool,
}

impl Default for PlanConfig {
    fn default() -> Self {
        PlanConfig { mode: WidthMode::Unit, stats: None, search: SearchConfig::default(), multiply_idempotent: true }
    }
}

/// One characteristic hypergraph and the width of its optimal GHD.
#[derive(Clone, Debug, Serialize)]
pub struct PlanPart {
    pub edges: Vec<PlanEdge>,
    /// Ordering of the sub-problem this hypergraph heads.
    pub subproblem_ordering: String,
    pub width: Width,
}

#[derive(Clone, Debug, Serialize)]
pub struct PlanEdge {
    pub name: String,
    pub attrs: Vec<Attr>,
}

impl From<&Edge> for PlanEdge {
    fn from(e: &Edge) -> Self {
        PlanEdge { name: e.name.clone(), attrs: e.attrs.clone() }
    }
}

#[derive(Clone, Debug)]
pub struct Plan {
    pub hypergraph: Hypergraph,
    pub alpha: AggregationOrdering,
    /// Equivalent to `alpha` and compatible with the tree.
    pub beta: AggregationOrdering,
    pub ghd: Ghd,
    /// Present when `alpha` has product aggregations.
    pub aghd: Option<Aghd>,
    pub width: WidthReport,
    pub parts: Vec<PlanPart>,
    /// Characteristic hypergraph each node came from; `None` for product leaves.
    pub node_part: Vec<Option<usize>>,
}

/// Decompose, optimize each characteristic hypergraph, stitch, and derive a
/// compatible equivalent ordering.
pub fn plan(h: &Hypergraph, alpha: &AggregationOrdering, config: &PlanConfig) -> Result<Plan> {
    for (a, _) in alpha.items() {
        if !h.vertices().contains(a) {
            return Err(AjarError::Ordering(format!("attribute {a} is not in the query")));
        }
    }
    if alpha.has_products() && !config.multiply_idempotent {
        return Err(AjarError::NonIdempotentProduct("target semiring".into()));
    }
    let measure = FractionalCover::new(h, config.mode, config.stats.as_ref())?;
    let stitched = stitched_decomposition(h, alpha, &measure, &config.search)?;

    let hs = stitched.characteristic.hypergraphs();
    let mut orderings = Vec::new();
    collect_orderings(&stitched.characteristic.root, &mut orderings);
    let parts: Vec<PlanPart> = hs
        .iter()
        .zip(&orderings)
        .zip(&stitched.part_widths)
        .map(|((hc, o), w)| PlanPart {
            edges: hc.edges().iter().map(PlanEdge::from).collect(),
            subproblem_ordering: o.to_string(),
            width: w.clone(),
        })
        .collect();
    let node_part = provenance(&stitched.ghd, &stitched.parts);

    let (ghd, aghd, beta) = if alpha.has_products() {
        let aghd = Aghd::from_tree(h, alpha, &stitched.ghd)?;
        let beta = derive_product_beta(h, alpha, &aghd)?;
        (aghd.tree.clone(), Some(aghd), beta)
    } else {
        let beta = derive_beta(h, alpha, &stitched.ghd)?;
        (stitched.ghd.clone(), None, beta)
    };
    let width = width(&ghd, &measure)?;
    Ok(Plan { hypergraph: h.clone(), alpha: alpha.clone(), beta, ghd, aghd, width, parts, node_part })
}

fn collect_orderings(n: &crate::ghd::decompose::CharacteristicNode, out: &mut Vec<AggregationOrdering>) {
    out.push(n.ordering.clone());
    for c in &n.children {
        collect_orderings(&c.node, out);
    }
}

/// Match stitched nodes to the part trees they were copied from.
fn provenance(g: &Ghd, parts: &[Ghd]) -> Vec<Option<usize>> {
    let mut out = vec![None; g.len()];
    for (pi, part) in parts.iter().enumerate() {
        for bag in part.bags() {
            if let Some(n) = (0..g.len()).find(|&n| out[n].is_none() && *g.bag(n) == bag) {
                out[n] = Some(pi);
            }
        }
    }
    out
}

/// `preds[i]`: items whose TOP is strictly above the TOP of item `i`.
fn top_preds(g: &Ghd, items: &[(Attr, AggOp)], tops_of: impl Fn(&Attr) -> Vec<NodeId>) -> Vec<Vec<usize>> {
    let tops: Vec<Vec<NodeId>> = items.iter().map(|(a, _)| tops_of(a)).collect();
    (0..items.len())
        .map(|i| {
            (0..items.len())
                .filter(|&j| j != i && tops[j].iter().any(|&tj| tops[i].iter().any(|&ti| g.is_ancestor(tj, ti))))
                .collect()
        })
        .collect()
}

/// Topological order of `preds`, smallest index first among the ready items.
fn toposort(items: &[(Attr, AggOp)], preds: &[Vec<usize>]) -> Option<AggregationOrdering> {
    let n = items.len();
    let mut placed = vec![false; n];
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let next = (0..n).find(|&i| !placed[i] && preds[i].iter().all(|&j| placed[j]))?;
        placed[next] = true;
        out.push(items[next].clone());
    }
    AggregationOrdering::new(out).ok()
}

fn pick_beta(
    items: &[(Attr, AggOp)],
    preds: Vec<Vec<usize>>,
    accept: impl Fn(&AggregationOrdering) -> bool,
) -> Result<AggregationOrdering> {
    if let Some(b) = toposort(items, &preds) {
        if accept(&b) {
            return Ok(b);
        }
    }
    let mut found = None;
    for b in LinearExtensions::new(items.to_vec(), preds).take(DEFAULT_EXTENSION_CAP) {
        if accept(&b) {
            found = Some(b);
            break;
        }
    }
    found.ok_or_else(|| AjarError::Internal("no compatible ordering equivalent to the query ordering".into()))
}

/// Ordering listing aggregated attributes by TOP depth (ancestors first),
/// ties broken by position in `alpha`.
pub fn derive_beta(h: &Hypergraph, alpha: &AggregationOrdering, g: &Ghd) -> Result<AggregationOrdering> {
    let tops = top_map(g)?;
    let items = alpha.items();
    let preds = top_preds(g, items, |a| tops.get(a).into_iter().copied().collect());
    pick_beta(items, preds, |b| test_equivalence(h, alpha, b) && compatibility_violation(h, g, b).is_none())
}

fn derive_product_beta(h: &Hypergraph, alpha: &AggregationOrdering, aghd: &Aghd) -> Result<AggregationOrdering> {
    let g = &aghd.renamed;
    let tops = top_map(g)?;
    let items = alpha.items();
    let preds = top_preds(g, items, |a| {
        aghd.copies
            .get(a)
            .cloned()
            .unwrap_or_else(|| vec![a.clone()])
            .iter()
            .filter_map(|c| tops.get(c).copied())
            .collect()
    });
    pick_beta(items, preds, |b| test_equivalence_product(h, alpha, b) && aghd.is_compatible(b))
}

/// Evaluate `plan` on one relation per query edge.
pub fn run<K: Annotation>(
    plan: &Plan,
    relations: &[AnnotatedRelation<K>],
    domains: &DomainRegistry,
    semiring: &SemiringSpec<K>,
) -> Result<AnnotatedRelation<K>> {
    run_with_stats(plan, relations, domains, semiring, &ExecOptions::default()).map(|(r, _)| r)
}

pub fn run_with_stats<K: Annotation>(
    plan: &Plan,
    relations: &[AnnotatedRelation<K>],
    domains: &DomainRegistry,
    semiring: &SemiringSpec<K>,
    options: &ExecOptions,
) -> Result<(AnnotatedRelation<K>, ExecStats)> {
    let h = &plan.hypergraph;
    if relations.len() != h.edges().len() {
        return Err(AjarError::Schema(format!("{} relations for {} atoms", relations.len(), h.edges().len())));
    }
    for (r, e) in relations.iter().zip(h.edges()) {
        if r.attr_set() != e.set {
            return Err(AjarError::Schema(format!(
                "relation {} has attributes {:?}, the query expects {:?}",
                e.name,
                r.attr_set(),
                e.set
            )));
        }
    }
    let refs: Vec<&AnnotatedRelation<K>> = relations.iter().collect();
    domains.validate(&refs)?;
    match &plan.aghd {
        Some(aghd) => execute_aghd_with_stats(h, aghd, &plan.beta, relations, domains, semiring, options),
        None => aggro_ghd_join_with_stats(h, &plan.ghd, &plan.beta, relations, Some(domains), semiring, options),
    }
}

#[derive(Clone, Debug, Serialize)]
struct NodeExport {
    id: NodeId,
    parent: Option<NodeId>,
    bag: Vec<Attr>,
    width: Width,
    part: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    renamed_bag: Option<Vec<Attr>>,
}

#[derive(Clone, Debug, Serialize)]
struct PlanExport<'a> {
    query: Vec<PlanEdge>,
    query_ordering: String,
    ordering: String,
    mode: WidthMode,
    width: &'a Width,
    root: NodeId,
    nodes: Vec<NodeExport>,
    parts: &'a [PlanPart],
    #[serde(skip_serializing_if = "Option::is_none")]
    partition: Option<BTreeMap<Attr, Vec<Vec<String>>>>,
}

impl Plan {
    pub fn to_json(&self) -> serde_json::Value {
        let nodes = (0..self.ghd.len())
            .map(|n| NodeExport {
                id: n,
                parent: self.ghd.parent(n),
                bag: self.ghd.bag(n).iter().cloned().collect(),
                width: self.width.per_bag[n].clone(),
                part: self.node_part.get(n).copied().flatten(),
                renamed_bag: self.aghd.as_ref().map(|a| a.renamed.bag(n).iter().cloned().collect()),
            })
            .collect();
        let partition = self.aghd.as_ref().map(|a| {
            a.partition
                .blocks
                .iter()
                .map(|(attr, blocks)| {
                    let named = blocks
                        .iter()
                        .map(|b| b.iter().map(|&i| self.hypergraph.edges()[i].name.clone()).collect())
                        .collect();
                    (attr.clone(), named)
                })
                .collect()
        });
        let export = PlanExport {
            query: self.hypergraph.edges().iter().map(PlanEdge::from).collect(),
            query_ordering: self.alpha.to_string(),
            ordering: self.beta.to_string(),
            mode: self.width.mode,
            width: &self.width.overall,
            root: self.ghd.root(),
            nodes,
            parts: &self.parts,
            partition,
        };
        serde_json::to_value(export).expect("plan serializes")
    }

    /// Why `beta` is equivalent to the query ordering, for `--explain` output.
    pub fn equivalence_note(&self) -> String {
        format!("{:?}", explain_equivalence(&self.hypergraph, &self.alpha, &self.beta))
    }
}

/// GHD shapes for the doubling queries of the closure.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ClosureShape {
    /// Bag `i` holds the `i`-th and `(i+1)`-th attributes and the last one.
    #[default]
    Chain,
    /// Each bag splits its interval at the midpoint.
    Balanced,
}

/// Tree over `k + 1` path attributes for the `k`-fold composition.
pub fn closure_ghd(names: &[Attr], shape: ClosureShape) -> Ghd {
    let k = names.len() - 1;
    let set = |xs: &[usize]| -> AttrSet { xs.iter().map(|&i| names[i].clone()).collect() };
    match shape {
        ClosureShape::Chain => Ghd::chain((0..k).map(|i| set(&[i, i + 1, k])).collect()),
        ClosureShape::Balanced => {
            fn go(g: &mut Ghd, parent: NodeId, i: usize, j: usize, set: &dyn Fn(&[usize]) -> AttrSet) {
                if j - i < 2 {
                    return;
                }
                let m = (i + j) / 2;
                for (a, b) in [(i, m), (m, j)] {
                    let bag = if b - a < 2 { set(&[a, b]) } else { set(&[a, (a + b) / 2, b]) };
                    let n = g.add_child(parent, bag);
                    go(g, n, a, b, set);
                }
            }
            let root = if k < 2 { set(&[0, k]) } else { set(&[0, k / 2, k]) };
            let mut g = Ghd::single(root);
            let r = g.root();
            go(&mut g, r, 0, k, &set);
            g
        }
    }
}

#[derive(Clone, Debug)]
pub struct Closure<K: Annotation> {
    pub relation: AnnotatedRelation<K>,
    /// Doubling queries evaluated, the confirming one included.
    pub rounds: usize,
}

/// `r` with a `one`-annotated self-loop on every node, combined into any
/// existing loop with the semiring's first operator.
pub fn with_self_loops<K: Annotation>(r: &AnnotatedRelation<K>, semiring: &SemiringSpec<K>) -> Result<AnnotatedRelation<K>> {
    if r.schema().len() != 2 {
        return Err(AjarError::Schema("closure needs a binary relation".into()));
    }
    let op = semiring
        .default_op()
        .ok_or_else(|| AjarError::UnknownOperator { op: "<any>".into(), semiring: semiring.name().into() })?;
    let nodes: std::collections::BTreeSet<_> = r.iter().flat_map(|(t, _)| t.iter().cloned()).collect();
    let mut rows: BTreeMap<_, K> = r.iter().map(|(t, k)| (t.clone(), k.clone())).collect();
    for v in nodes {
        let t = vec![v.clone(), v];
        let k = match rows.get(&t) {
            Some(k) => semiring.combine(&op, k, semiring.one())?,
            None => semiring.one().clone(),
        };
        rows.insert(t, k);
    }
    AnnotatedRelation::from_rows(r.schema().to_vec(), rows, semiring)
}

/// `R*` by evaluating the `2^n`-fold composition for `n = 1, 2, ...` until
/// two consecutive results agree. Each composition is a fresh query over
/// renamed copies of `r`, aggregated with the semiring's first operator.
pub fn transitive_closure<K: Annotation>(
    r: &AnnotatedRelation<K>,
    semiring: &SemiringSpec<K>,
    max_iters: usize,
    shape: ClosureShape,
) -> Result<Closure<K>> {
    let schema = r.schema().to_vec();
    if schema.len() != 2 {
        return Err(AjarError::Schema("closure needs a binary relation".into()));
    }
    let op = semiring
        .default_op()
        .ok_or_else(|| AjarError::UnknownOperator { op: "<any>".into(), semiring: semiring.name().into() })?;
    let mut prev = r.clone();
    for n in 1..=max_iters {
        let k = 1usize << n;
        let names: Vec<Attr> = (0..=k).map(|i| Attr::from(format!("c{i:05}"))).collect();
        let edges = (0..k)
            .map(|i| Edge::new(&format!("R{i}"), vec![names[i].clone(), names[i + 1].clone()]))
            .collect::<Result<Vec<_>>>()?;
        let h = Hypergraph::new(edges);
        let alpha = AggregationOrdering::new(names[1..k].iter().map(|a| (a.clone(), op.clone())).collect())?;
        let relations = (0..k)
            .map(|i| {
                let map = BTreeMap::from([(schema[0].clone(), names[i].clone()), (schema[1].clone(), names[i + 1].clone())]);
                r.rename(&map)
            })
            .collect::<Result<Vec<_>>>()?;
        let g = closure_ghd(&names, shape);
        let beta = derive_beta(&h, &alpha, &g)?;
        let (out, _) = aggro_ghd_join_with_stats(&h, &g, &beta, &relations, None, semiring, &ExecOptions::default())?;
        let back = BTreeMap::from([(names[0].clone(), schema[0].clone()), (names[k].clone(), schema[1].clone())]);
        let next = out.rename(&back)?.reorder(&schema)?;
        if next == prev {
            return Ok(Closure { relation: next, rounds: n });
        }
        prev = next;
    }
    Err(AjarError::NoFixedPoint(max_iters))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::naive_eval;
    use crate::semiring::ExtInt;
    use crate::value::{attrs, Value};

    #[test]
    fn two_hop_plan() {
        let h = Hypergraph::from_sets(&[&["A", "B"], &["B", "C"]]).unwrap();
        let alpha = AggregationOrdering::from_pairs(&[("B", "sum"), ("C", "sum")]).unwrap();
        let p = plan(&h, &alpha, &PlanConfig::default()).unwrap();
        assert_eq!(p.width.overall, Width::exact(1, 1));
        let bags: Vec<AttrSet> = p.ghd.preorder().iter().map(|&n| p.ghd.bag(n).clone()).collect();
        assert_eq!(bags, vec![attrs(&["A"]), attrs(&["A", "B"]), attrs(&["B", "C"])]);
    }

    #[test]
    fn two_path_runs() {
        let s = SemiringSpec::integers();
        let r = AnnotatedRelation::from_int_rows(&["A", "B"], &[(&[1, 3], 3), (&[1, 2], 1), (&[1, 1], 2)], &s).unwrap();
        let t = AnnotatedRelation::from_int_rows(&["B", "C"], &[(&[1, 1], 4), (&[3, 3], 6)], &s).unwrap();
        let h = Hypergraph::from_sets(&[&["A", "B"], &["B", "C"]]).unwrap();
        let alpha = AggregationOrdering::from_pairs(&[("C", "sum"), ("B", "sum")]).unwrap();
        let p = plan(&h, &alpha, &PlanConfig::default()).unwrap();
        let out = run(&p, &[r, t], &DomainRegistry::new(), &s).unwrap();
        assert_eq!(out.get(&[Value::Int(1)]), Some(&26));
    }

    #[test]
    fn product_leaf_plan_matches_naive() {
        let s = SemiringSpec::boolean();
        let h = Hypergraph::from_sets(&[&["A", "B"], &["B", "C"]]).unwrap();
        let alpha = AggregationOrdering::from_pairs(&[("B", "prod")]).unwrap();
        let p = plan(&h, &alpha, &PlanConfig::default()).unwrap();
        let mut d = DomainRegistry::new();
        for a in ["A", "B", "C"] {
            d.declare(Attr::new(a), [Value::Int(0), Value::Int(1)]);
        }
        let r = AnnotatedRelation::from_rows(
            vec![Attr::new("A"), Attr::new("B")],
            vec![(vec![Value::Int(0), Value::Int(0)], true), (vec![Value::Int(0), Value::Int(1)], true)],
            &s,
        )
        .unwrap();
        let t = AnnotatedRelation::from_rows(
            vec![Attr::new("B"), Attr::new("C")],
            vec![(vec![Value::Int(0), Value::Int(1)], true), (vec![Value::Int(1), Value::Int(1)], true)],
            &s,
        )
        .unwrap();
        let rels = vec![r, t];
        let got = run(&p, &rels, &d, &s).unwrap();
        assert_eq!(got, naive_eval(&h, &alpha, &rels, Some(&d), &s).unwrap());
        assert_eq!(got.get(&[Value::Int(0), Value::Int(1)]), Some(&true));
    }

    #[test]
    fn closure_of_a_path() {
        let s = SemiringSpec::min_plus();
        let mut r = AnnotatedRelation::empty(vec![Attr::new("X"), Attr::new("Y")]).unwrap();
        for (a, b, w) in [(1, 2, 1), (2, 3, 2), (1, 1, 0), (2, 2, 0), (3, 3, 0)] {
            r.insert(vec![Value::Int(a), Value::Int(b)], ExtInt::Finite(w), &s).unwrap();
        }
        for shape in [ClosureShape::Chain, ClosureShape::Balanced] {
            let c = transitive_closure(&r, &s, 8, shape).unwrap();
            assert_eq!(c.relation.get(&[Value::Int(1), Value::Int(3)]), Some(&ExtInt::Finite(3)));
            let again = transitive_closure(&c.relation, &s, 8, shape).unwrap();
            assert_eq!(again.rounds, 1);
            assert_eq!(again.relation, c.relation);
        }
    }
}
