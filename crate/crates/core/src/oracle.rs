//! Brute-force reference semantics and exhaustive searches for testing.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{AjarError, Result};
use crate::ghd::{check_ghd, is_valid, Ghd};
use crate::hypergraph::{Edge, Hypergraph};
use crate::ordering::{compute_prec, explain_equivalence, AggregationOrdering, EquivalenceVerdict};
use crate::relation::{apply_aggregation, join, AnnotatedRelation, DomainRegistry};
use crate::semiring::{distinguishing_pair, AggOp, Annotation, ExtInt, SemiringSpec};
use crate::value::{Attr, AttrSet, Tuple, Value};

/// Materialize the join, then aggregate innermost (last) item first.
pub fn naive_eval<K: Annotation>(
    h: &Hypergraph,
    alpha: &AggregationOrdering,
    relations: &[AnnotatedRelation<K>],
    domains: Option<&DomainRegistry>,
    semiring: &SemiringSpec<K>,
) -> Result<AnnotatedRelation<K>> {
    if relations.len() != h.edges().len() {
        return Err(AjarError::Schema(format!(
            "{} relations for {} edges",
            relations.len(),
            h.edges().len()
        )));
    }
    for (r, e) in relations.iter().zip(h.edges()) {
        if r.attr_set() != e.set {
            return Err(AjarError::Schema(format!("relation for {} has the wrong attributes", e.name)));
        }
    }
    let refs: Vec<&AnnotatedRelation<K>> = relations.iter().collect();
    let mut acc = join(&refs, semiring);
    for (a, op) in alpha.items().iter().rev() {
        acc = apply_aggregation(&acc, a, op, domains, semiring)?;
    }
    let mut schema = acc.schema().to_vec();
    schema.sort();
    acc.reorder(&schema)
}

/// Parameters of a random instance: each attribute ranges over
/// `0..domain_size` and each candidate tuple is kept with probability `density`.
#[derive(Clone, Debug)]
pub struct RandomInstanceSpec {
    pub domain_size: i64,
    pub density: f64,
    pub seed: u64,
}

impl Default for RandomInstanceSpec {
    fn default() -> Self {
        RandomInstanceSpec { domain_size: 3, density: 0.6, seed: 0 }
    }
}

/// Relations for every edge of `h` plus the full declared domains.
pub fn random_instance<K: Annotation>(
    h: &Hypergraph,
    spec: &RandomInstanceSpec,
    semiring: &SemiringSpec<K>,
) -> (Vec<AnnotatedRelation<K>>, DomainRegistry) {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    random_instance_with(h, spec.domain_size, spec.density, semiring, &mut rng)
}

pub fn random_instance_with<K: Annotation>(
    h: &Hypergraph,
    domain_size: i64,
    density: f64,
    semiring: &SemiringSpec<K>,
    rng: &mut dyn RngCore,
) -> (Vec<AnnotatedRelation<K>>, DomainRegistry) {
    let mut domains = DomainRegistry::new();
    for a in h.vertices() {
        domains.declare(a.clone(), (0..domain_size).map(Value::Int));
    }
    let relations = h
        .edges()
        .iter()
        .map(|e| {
            let mut r = AnnotatedRelation::empty(e.attrs.clone()).expect("edge attributes are distinct");
            for t in all_tuples(e.attrs.len(), domain_size) {
                if rng.gen_bool(density) {
                    r.insert(t, K::sample_instance(rng), semiring).expect("fresh tuple");
                }
            }
            r
        })
        .collect();
    (relations, domains)
}

fn all_tuples(arity: usize, d: i64) -> Vec<Tuple> {
    let mut out: Vec<Tuple> = vec![Vec::new()];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..d).map(move |v| {
                    let mut t = t.clone();
                    t.push(Value::Int(v));
                    t
                })
            })
            .collect();
    }
    out
}

/// Shape of a random query.
#[derive(Clone, Debug)]
pub struct RandomQuerySpec {
    pub attributes: usize,
    pub max_edges: usize,
    pub max_arity: usize,
    /// Operators drawn for aggregated attributes.
    pub ops: Vec<AggOp>,
    /// Probability that an attribute is aggregated.
    pub aggregate_prob: f64,
}

impl RandomQuerySpec {
    pub fn new(attributes: usize, ops: &[&str]) -> Self {
        RandomQuerySpec {
            attributes,
            max_edges: attributes + 1,
            max_arity: 3,
            ops: ops.iter().map(|o| AggOp::named(o)).collect(),
            aggregate_prob: 0.75,
        }
    }
}

/// A connected random hypergraph over `A, B, C, ...` and a random ordering.
pub fn random_query(spec: &RandomQuerySpec, rng: &mut dyn RngCore) -> (Hypergraph, AggregationOrdering) {
    let names: Vec<Attr> = (0..spec.attributes)
        .map(|i| Attr::from(((b'A' + i as u8) as char).to_string()))
        .collect();
    let mut sets: Vec<AttrSet> = Vec::new();
    // Spanning edges keep the hypergraph connected.
    for i in 1..names.len() {
        let j = rng.gen_range(0..i);
        sets.push([names[i].clone(), names[j].clone()].into_iter().collect());
    }
    if names.len() == 1 {
        sets.push([names[0].clone()].into_iter().collect());
    }
    let extra = rng.gen_range(0..=spec.max_edges.saturating_sub(sets.len()));
    for _ in 0..extra {
        let k = rng.gen_range(1..=spec.max_arity.min(names.len()));
        let mut pool = names.clone();
        pool.shuffle(rng);
        let s: AttrSet = pool.into_iter().take(k).collect();
        if !sets.contains(&s) {
            sets.push(s);
        }
    }
    let edges = sets
        .iter()
        .enumerate()
        .map(|(i, s)| Edge::from_set(&format!("R{i}"), s).expect("non-empty"))
        .collect();
    let h = Hypergraph::new(edges);
    let mut order = names.clone();
    order.shuffle(rng);
    let mut items = Vec::new();
    for a in order {
        if rng.gen_bool(spec.aggregate_prob) {
            items.push((a, spec.ops[rng.gen_range(0..spec.ops.len())].clone()));
        }
    }
    (h, AggregationOrdering::new(items).expect("distinct attributes"))
}

#[derive(Clone, Debug)]
pub enum SemanticVerdict<K: Annotation> {
    /// No disagreement on any tried instance.
    EquivLikely { trials: usize },
    Counterexample {
        relations: Vec<AnnotatedRelation<K>>,
        domains: DomainRegistry,
        left: AnnotatedRelation<K>,
        right: AnnotatedRelation<K>,
    },
}

impl<K: Annotation> SemanticVerdict<K> {
    pub fn is_equiv_likely(&self) -> bool {
        matches!(self, SemanticVerdict::EquivLikely { .. })
    }
}

/// Randomized refutation of `alpha ≡ beta`. When the syntactic test names a
/// conflicting pair, a two-tuple instance along a connecting path is tried
/// first; random instances follow.
pub fn semantic_equiv<K: Annotation>(
    h: &Hypergraph,
    alpha: &AggregationOrdering,
    beta: &AggregationOrdering,
    semiring: &SemiringSpec<K>,
    trials: usize,
    seed: u64,
) -> Result<SemanticVerdict<K>> {
    if !alpha.same_signature(beta) {
        return Err(AjarError::Ordering("orderings differ in attributes or operators".into()));
    }
    let check = |relations: Vec<AnnotatedRelation<K>>, domains: DomainRegistry| -> Result<Option<SemanticVerdict<K>>> {
        let left = naive_eval(h, alpha, &relations, Some(&domains), semiring)?;
        let right = naive_eval(h, beta, &relations, Some(&domains), semiring)?;
        Ok((left != right).then_some(SemanticVerdict::Counterexample { relations, domains, left, right }))
    };
    if let Some((rels, doms)) = path_instance(h, alpha, beta, semiring) {
        if let Some(v) = check(rels, doms)? {
            return Ok(v);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let d = rng.gen_range(2..=3);
        let density = rng.gen_range(0.3..0.9);
        let (rels, doms) = random_instance_with(h, d, density, semiring, &mut rng);
        if let Some(v) = check(rels, doms)? {
            return Ok(v);
        }
    }
    Ok(SemanticVerdict::EquivLikely { trials })
}

/// Instance whose join has exactly two tuples: every attribute on a path
/// between the conflicting pair is 0 in one and 1 in the other, everything
/// else is 0. One path edge carries annotations `x, y` with `x ⊕₁ y ≠ x ⊕₂ y`.
fn path_instance<K: Annotation>(
    h: &Hypergraph,
    alpha: &AggregationOrdering,
    beta: &AggregationOrdering,
    semiring: &SemiringSpec<K>,
) -> Option<(Vec<AnnotatedRelation<K>>, DomainRegistry)> {
    if alpha.has_products() {
        return None;
    }
    let EquivalenceVerdict::Conflict { earlier, later } = explain_equivalence(h, alpha, beta) else {
        return None;
    };
    let (x, y) = distinguishing_pair(semiring, alpha.op(&earlier)?, alpha.op(&later)?)?;
    let (pa, pb) = (alpha.position(&earlier)?, alpha.position(&later)?);
    let inner: AttrSet = alpha.items()[pa.max(pb) + 1..].iter().map(|(a, _)| a.clone()).collect();
    let path = shortest_path(h, &earlier, &later, &inner)?;
    let on_path: AttrSet = path.iter().cloned().collect();

    let mut domains = DomainRegistry::new();
    for a in h.vertices() {
        let vals: Vec<Value> = if on_path.contains(a) { vec![Value::Int(0), Value::Int(1)] } else { vec![Value::Int(0)] };
        domains.declare(a.clone(), vals);
    }
    let carrier = h.edges().iter().position(|e| e.contains(&path[0]) && e.contains(&path[1]))?;
    let relations = h
        .edges()
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let mut r = AnnotatedRelation::empty(e.attrs.clone()).expect("distinct attributes");
            for c in 0..2 {
                let t: Tuple =
                    e.attrs.iter().map(|a| Value::Int(if on_path.contains(a) { c } else { 0 })).collect();
                let k = if i == carrier {
                    if c == 0 { x.clone() } else { y.clone() }
                } else {
                    semiring.one().clone()
                };
                if r.get(&t).is_none() {
                    r.insert(t, k, semiring).expect("fresh tuple");
                }
            }
            r
        })
        .collect();
    Some((relations, domains))
}

/// Attributes from `a` to `b` (inclusive) through `through`, fewest hops.
fn shortest_path(h: &Hypergraph, a: &Attr, b: &Attr, through: &AttrSet) -> Option<Vec<Attr>> {
    let mut prev: BTreeMap<Attr, Attr> = BTreeMap::new();
    let mut queue = VecDeque::from([a.clone()]);
    let mut seen: BTreeSet<Attr> = [a.clone()].into_iter().collect();
    while let Some(x) = queue.pop_front() {
        if &x == b {
            let mut path = vec![x.clone()];
            let mut cur = x;
            while let Some(p) = prev.get(&cur) {
                path.push(p.clone());
                cur = p.clone();
            }
            path.reverse();
            return Some(path);
        }
        for e in h.edges().iter().filter(|e| e.contains(&x)) {
            for y in &e.attrs {
                if !seen.contains(y) && (y == b || through.contains(y)) {
                    seen.insert(y.clone());
                    prev.insert(y.clone(), x.clone());
                    queue.push_back(y.clone());
                }
            }
        }
    }
    None
}

/// Largest attribute count accepted by [`exhaustive_valid_ghds`].
pub const EXHAUSTIVE_ATTRIBUTE_CAP: usize = 5;

/// Every GHD of the product-free query `(h, alpha)` that is valid for the
/// ordering, up to isomorphism, restricted to trees in which each node is
/// the TOP of some attribute (other nodes never lower the width).
pub fn exhaustive_valid_ghds(h: &Hypergraph, alpha: &AggregationOrdering, bag_size_cap: usize) -> Result<Vec<Ghd>> {
    let verts: Vec<Attr> = h.vertices().iter().cloned().collect();
    if verts.len() > EXHAUSTIVE_ATTRIBUTE_CAP {
        return Err(AjarError::AttributeCap { found: verts.len(), cap: EXHAUSTIVE_ATTRIBUTE_CAP });
    }
    let prec = compute_prec(h, alpha)?;
    let n = verts.len();
    let full: u32 = (1u32 << n) - 1;
    let edge_masks: Vec<u32> = h
        .edges()
        .iter()
        .map(|e| e.set.iter().map(|a| 1u32 << verts.iter().position(|v| v == a).expect("vertex")).sum())
        .collect();

    struct State {
        bags: Vec<u32>,
        parents: Vec<Option<usize>>,
    }
    let mut out: Vec<Ghd> = Vec::new();
    let mut seen: BTreeSet<String> = BTreeSet::new();

    // Grow trees in preorder: the next node hangs below some node on the
    // rightmost path. Running intersection is enforced on insertion.
    fn grow(
        st: &mut State,
        seen_mask: u32,
        full: u32,
        cap: usize,
        emit: &mut dyn FnMut(&State),
    ) {
        if seen_mask == full {
            emit(st);
        }
        if st.bags.len() == full.count_ones() as usize {
            return;
        }
        let mut rightmost = Vec::new();
        let mut cur = Some(st.bags.len() - 1);
        while let Some(c) = cur {
            rightmost.push(c);
            cur = st.parents[c];
        }
        for &p in &rightmost {
            let parent_bag = st.bags[p];
            let allowed = parent_bag | (full & !seen_mask);
            // Enumerate non-empty subsets of `allowed` with a new attribute.
            let mut sub = allowed;
            loop {
                if sub & !seen_mask != 0 && (sub.count_ones() as usize) <= cap {
                    st.bags.push(sub);
                    st.parents.push(Some(p));
                    grow(st, seen_mask | sub, full, cap, emit);
                    st.bags.pop();
                    st.parents.pop();
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & allowed;
            }
        }
    }

    let to_set = |m: u32| -> AttrSet { (0..n).filter(|&i| m & (1 << i) != 0).map(|i| verts[i].clone()).collect() };
    let mut emit = |st: &State| {
        if !edge_masks.iter().all(|&e| st.bags.iter().any(|&b| e & b == e)) {
            return;
        }
        let Ok(g) = Ghd::from_parents(st.bags.iter().map(|&b| to_set(b)).collect(), st.parents.clone()) else {
            return;
        };
        if check_ghd(h, &g).is_err() || !is_valid(&g, &prec) {
            return;
        }
        if seen.insert(g.canonical()) {
            out.push(g);
        }
    };
    if n == 0 {
        return Ok(vec![Ghd::single(AttrSet::new())]);
    }
    let mut root = full;
    loop {
        if root != 0 && (root.count_ones() as usize) <= bag_size_cap {
            let mut st = State { bags: vec![root], parents: vec![None] };
            grow(&mut st, root, full, bag_size_cap, &mut emit);
        }
        if root == 0 {
            break;
        }
        root = (root - 1) & full;
    }
    Ok(out)
}

/// All-pairs shortest paths over a binary min-plus relation (paths of one or
/// more edges).
pub fn floyd_warshall(r: &AnnotatedRelation<ExtInt>) -> Result<AnnotatedRelation<ExtInt>> {
    if r.schema().len() != 2 {
        return Err(AjarError::Schema("closure needs a binary relation".into()));
    }
    let nodes: Vec<Value> = r
        .iter()
        .flat_map(|(t, _)| t.iter().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let idx: BTreeMap<&Value, usize> = nodes.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let n = nodes.len();
    let mut d = vec![vec![ExtInt::Infinity; n]; n];
    for (t, k) in r.iter() {
        let (i, j) = (idx[&t[0]], idx[&t[1]]);
        if *k < d[i][j] {
            d[i][j] = k.clone();
        }
    }
    for m in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = ExtInt::plus(&d[i][m], &d[m][j]);
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    let s = SemiringSpec::min_plus();
    let mut out = AnnotatedRelation::empty(r.schema().to_vec())?;
    for i in 0..n {
        for j in 0..n {
            out.insert(vec![nodes[i].clone(), nodes[j].clone()], d[i][j].clone(), &s)?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ghd::width::{width, FractionalCover};
    use crate::ghd::Width;

    #[test]
    fn naive_two_path() {
        let s = SemiringSpec::integers();
        let r = AnnotatedRelation::from_int_rows(&["A", "B"], &[(&[1, 3], 3), (&[1, 2], 1), (&[1, 1], 2)], &s).unwrap();
        let t = AnnotatedRelation::from_int_rows(&["B", "C"], &[(&[1, 1], 4), (&[3, 3], 6)], &s).unwrap();
        let h = Hypergraph::from_sets(&[&["A", "B"], &["B", "C"]]).unwrap();
        let alpha = AggregationOrdering::from_pairs(&[("C", "sum"), ("B", "sum")]).unwrap();
        let out = naive_eval(&h, &alpha, &[r, t], None, &s).unwrap();
        assert_eq!(out.get(&[Value::Int(1)]), Some(&26));
    }

    #[test]
    fn path_counterexample_is_found() {
        let s = SemiringSpec::nonneg_rationals();
        let h = Hypergraph::from_sets(&[&["A", "B"], &["B", "C"]]).unwrap();
        let alpha = AggregationOrdering::from_pairs(&[("A", "sum"), ("C", "max"), ("B", "sum")]).unwrap();
        let beta = AggregationOrdering::from_pairs(&[("C", "max"), ("A", "sum"), ("B", "sum")]).unwrap();
        assert!(!semantic_equiv(&h, &alpha, &beta, &s, 0, 1).unwrap().is_equiv_likely());
        assert!(semantic_equiv(&h, &alpha, &alpha, &s, 5, 1).unwrap().is_equiv_likely());
    }

    #[test]
    fn exhaustive_two_hop_minimum_is_one() {
        let h = Hypergraph::from_sets(&[&["A", "B"], &["B", "C"]]).unwrap();
        let alpha = AggregationOrdering::from_pairs(&[("B", "sum"), ("C", "sum")]).unwrap();
        let all = exhaustive_valid_ghds(&h, &alpha, 5).unwrap();
        let m = FractionalCover::unit(&h);
        let best = all.iter().map(|g| width(g, &m).unwrap().overall).fold(None::<Width>, |acc, w| match acc {
            Some(a) if a.compare(&w).is_le() => Some(a),
            _ => Some(w),
        });
        assert_eq!(best, Some(Width::exact(1, 1)));
        assert!(all.iter().any(|g| g.len() == 2 && g.bag(g.root()) == &crate::value::attrs(&["A", "B"])));
    }

    #[test]
    fn floyd_warshall_two_hops() {
        let s = SemiringSpec::min_plus();
        let mut r = AnnotatedRelation::empty(vec![Attr::new("X"), Attr::new("Y")]).unwrap();
        for (a, b, w) in [(1, 2, 1), (2, 3, 2), (1, 1, 0), (2, 2, 0), (3, 3, 0)] {
            r.insert(vec![Value::Int(a), Value::Int(b)], ExtInt::Finite(w), &s).unwrap();
        }
        let c = floyd_warshall(&r).unwrap();
        assert_eq!(c.get(&[Value::Int(1), Value::Int(3)]), Some(&ExtInt::Finite(3)));
    }
}
