//! Attribute-at-a-time worst-case optimal join over sorted tuple arrays.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{AjarError, Result};
use crate::hypergraph::Hypergraph;
use crate::relation::AnnotatedRelation;
use crate::semiring::{Annotation, SemiringSpec};
use crate::value::{Attr, AttrSet, Tuple, Value};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct JoinCounters {
    /// Partial bindings that survived every intersection, over all depths.
    pub partial_bindings: usize,
    pub output_tuples: usize,
    pub multiplications: usize,
}

/// Join one relation per edge of `h`, in edge order.
pub fn generic_join<K: Annotation>(
    h: &Hypergraph,
    relations: &[AnnotatedRelation<K>],
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
            return Err(AjarError::Schema(format!("relation for edge {} has the wrong attributes", e.name)));
        }
    }
    let refs: Vec<&AnnotatedRelation<K>> = relations.iter().collect();
    Ok(join_relations(&refs, semiring, &mut JoinCounters::default()))
}

struct Sorted<'a, K> {
    rows: Vec<(Tuple, &'a K)>,
}

/// Generic join of arbitrary relations. The output schema lists attributes
/// in sorted order. Variables are bound smallest-candidate-set first.
pub fn join_relations<K: Annotation>(
    relations: &[&AnnotatedRelation<K>],
    semiring: &SemiringSpec<K>,
    counters: &mut JoinCounters,
) -> AnnotatedRelation<K> {
    let all: AttrSet = relations.iter().flat_map(|r| r.schema().iter().cloned()).collect();
    let schema: Vec<Attr> = all.iter().cloned().collect();

    let mut constant = semiring.one().clone();
    let mut active = Vec::new();
    for r in relations {
        if r.schema().is_empty() {
            match r.get(&[]) {
                Some(k) => {
                    constant = semiring.mul(&constant, k);
                    counters.multiplications += 1;
                }
                None => return AnnotatedRelation::from_map(schema, BTreeMap::new()),
            }
        } else {
            active.push(*r);
        }
    }
    if active.iter().any(|r| r.is_empty()) || semiring.is_zero(&constant) {
        return AnnotatedRelation::from_map(schema, BTreeMap::new());
    }

    let mut order: Vec<(usize, Attr)> = schema
        .iter()
        .map(|a| {
            let est = active
                .iter()
                .filter(|r| r.position(a).is_some())
                .map(|r| r.values_of(a).len())
                .min()
                .unwrap_or(0);
            (est, a.clone())
        })
        .collect();
    order.sort();
    let order: Vec<Attr> = order.into_iter().map(|(_, a)| a).collect();
    let rank: BTreeMap<&Attr, usize> = order.iter().enumerate().map(|(i, a)| (a, i)).collect();

    let mut sorted: Vec<Sorted<K>> = Vec::new();
    // For each depth: (relation index, column) pairs binding that attribute.
    let mut at_depth: Vec<Vec<(usize, usize)>> = vec![Vec::new(); order.len()];
    for (ri, r) in active.iter().enumerate() {
        let mut cols: Vec<usize> = (0..r.schema().len()).collect();
        cols.sort_by_key(|&c| rank[&r.schema()[c]]);
        for (j, &c) in cols.iter().enumerate() {
            at_depth[rank[&r.schema()[c]]].push((ri, j));
        }
        let mut rows: Vec<(Tuple, &K)> = r
            .iter()
            .map(|(t, k)| (cols.iter().map(|&c| t[c].clone()).collect(), k))
            .collect();
        rows.sort_by(|a, b| a.0.cmp(&b.0));
        sorted.push(Sorted { rows });
    }
    let out_pos: Vec<usize> = order.iter().map(|a| schema.iter().position(|x| x == a).expect("in schema")).collect();

    let mut ranges: Vec<(usize, usize)> = sorted.iter().map(|s| (0, s.rows.len())).collect();
    let mut binding: Vec<Value> = Vec::with_capacity(order.len());
    let mut out = BTreeMap::new();
    let mut ctx = Ctx { sorted: &sorted, at_depth: &at_depth, out_pos: &out_pos, constant: &constant, semiring, counters };
    ctx.go(0, &mut ranges, &mut binding, &mut out);
    AnnotatedRelation::from_map(schema, out)
}

struct Ctx<'a, 'b, K: Annotation> {
    sorted: &'a [Sorted<'a, K>],
    at_depth: &'a [Vec<(usize, usize)>],
    out_pos: &'a [usize],
    constant: &'a K,
    semiring: &'a SemiringSpec<K>,
    counters: &'b mut JoinCounters,
}

impl<'a, 'b, K: Annotation> Ctx<'a, 'b, K> {
    fn go(
        &mut self,
        depth: usize,
        ranges: &mut Vec<(usize, usize)>,
        binding: &mut Vec<Value>,
        out: &mut BTreeMap<Tuple, K>,
    ) {
        if depth == self.at_depth.len() {
            let mut k = self.constant.clone();
            for (ri, s) in self.sorted.iter().enumerate() {
                k = self.semiring.mul(&k, s.rows[ranges[ri].0].1);
                self.counters.multiplications += 1;
            }
            if self.semiring.is_zero(&k) {
                return;
            }
            let mut t = vec![Value::Int(0); binding.len()];
            for (i, v) in binding.iter().enumerate() {
                t[self.out_pos[i]] = v.clone();
            }
            out.insert(t, k);
            self.counters.output_tuples += 1;
            return;
        }
        let here = &self.at_depth[depth];
        let &(driver, dcol) = here
            .iter()
            .min_by_key(|(ri, _)| ranges[*ri].1 - ranges[*ri].0)
            .expect("every attribute occurs in some relation");
        let (lo, hi) = ranges[driver];
        let rows = &self.sorted[driver].rows;
        let mut i = lo;
        while i < hi {
            let v = rows[i].0[dcol].clone();
            let next = i + rows[i..hi].partition_point(|r| r.0[dcol] <= v);
            let saved: Vec<(usize, (usize, usize))> = here.iter().map(|&(ri, _)| (ri, ranges[ri])).collect();
            let mut ok = true;
            for &(ri, col) in here {
                let (a, b) = if ri == driver { (i, next) } else { narrow(&self.sorted[ri].rows, ranges[ri], col, &v) };
                if a == b {
                    ok = false;
                    break;
                }
                ranges[ri] = (a, b);
            }
            if ok {
                self.counters.partial_bindings += 1;
                binding.push(v);
                self.go(depth + 1, ranges, binding, out);
                binding.pop();
            }
            for (ri, r) in saved {
                ranges[ri] = r;
            }
            i = next;
        }
    }
}

fn narrow<K>(rows: &[(Tuple, &K)], (lo, hi): (usize, usize), col: usize, v: &Value) -> (usize, usize) {
    let slice = &rows[lo..hi];
    let a = slice.partition_point(|r| r.0[col].cmp(v) == Ordering::Less);
    let b = slice.partition_point(|r| r.0[col].cmp(v) != Ordering::Greater);
    (lo + a, lo + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relation::join;

    #[test]
    fn triangle_matches_pairwise_join() {
        let s = SemiringSpec::integers();
        let r = AnnotatedRelation::from_int_rows(&["A", "B"], &[(&[1, 2], 2), (&[1, 3], 3), (&[2, 3], 5)], &s).unwrap();
        let t = AnnotatedRelation::from_int_rows(&["B", "C"], &[(&[2, 3], 7), (&[3, 1], 11), (&[3, 4], 13)], &s).unwrap();
        let u = AnnotatedRelation::from_int_rows(&["A", "C"], &[(&[1, 3], 17), (&[1, 1], 19), (&[2, 4], 23)], &s).unwrap();
        let h = Hypergraph::from_sets(&[&["A", "B"], &["B", "C"], &["A", "C"]]).unwrap();
        let gj = generic_join(&h, &[r.clone(), t.clone(), u.clone()], &s).unwrap();
        assert_eq!(gj, join(&[&r, &t, &u], &s));
        assert_eq!(gj.len(), 3);
    }

    #[test]
    fn scalar_inputs_scale_the_result() {
        let s = SemiringSpec::integers();
        let r = AnnotatedRelation::from_int_rows(&["A"], &[(&[1], 2)], &s).unwrap();
        let c = AnnotatedRelation::scalar(5, &s);
        let out = join_relations(&[&r, &c], &s, &mut JoinCounters::default());
        assert_eq!(out.get(&[Value::Int(1)]), Some(&10));
    }
}
