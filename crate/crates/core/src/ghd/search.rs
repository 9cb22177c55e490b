//! Minimum-width GHD search over vertex elimination orders.
//!
//! A dynamic program over eliminated-vertex sets finds the optimal width.
//! Orders achieving it are then enumerated (up to a cap), turned into tree
//! decompositions, and the best one under the tie-break is returned.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use crate::error::{AjarError, Result};
use crate::hypergraph::Hypergraph;
use crate::value::{Attr, AttrSet};

use super::width::{BagMeasure, Width};
use super::Ghd;

#[derive(Clone, Debug)]
pub struct SearchConfig {
    /// Largest vertex count searched.
    pub attribute_cap: usize,
    /// Number of optimal elimination orders examined for the tie-break.
    pub order_cap: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { attribute_cap: 12, order_cap: 512 }
    }
}

struct Search<'a> {
    verts: Vec<Attr>,
    nb: Vec<u32>,
    full: u32,
    measure: &'a dyn BagMeasure,
    cost: HashMap<u32, Width>,
    best: HashMap<u32, Width>,
}

impl<'a> Search<'a> {
    fn bag_set(&self, mask: u32) -> AttrSet {
        (0..self.verts.len())
            .filter(|&i| mask & (1 << i) != 0)
            .map(|i| self.verts[i].clone())
            .collect()
    }

    /// Bag created by eliminating `v` once `s` is gone: `v` plus every
    /// remaining vertex reachable from `v` through eliminated ones.
    fn bag(&self, s: u32, v: usize) -> u32 {
        let mut bag = 1u32 << v;
        let mut seen = 1u32 << v;
        let mut stack = vec![v];
        while let Some(x) = stack.pop() {
            let mut rest = self.nb[x] & !seen;
            while rest != 0 {
                let u = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                seen |= 1 << u;
                if s & (1 << u) != 0 {
                    stack.push(u);
                } else {
                    bag |= 1 << u;
                }
            }
        }
        bag
    }

    fn cost(&mut self, bag: u32) -> Result<Width> {
        if let Some(w) = self.cost.get(&bag) {
            return Ok(w.clone());
        }
        let w = self.measure.measure(&self.bag_set(bag))?;
        self.cost.insert(bag, w.clone());
        Ok(w)
    }

    /// Smallest achievable maximum bag cost for eliminating the complement of `s`.
    fn best(&mut self, s: u32) -> Result<Width> {
        if s == self.full {
            return Ok(Width::zero(self.measure.mode()));
        }
        if let Some(w) = self.best.get(&s) {
            return Ok(w.clone());
        }
        let mut out: Option<Width> = None;
        for v in 0..self.verts.len() {
            if s & (1 << v) != 0 {
                continue;
            }
            let here = self.cost(self.bag(s, v))?;
            let rest = self.best(s | (1 << v))?;
            let w = here.max(rest);
            if out.as_ref().map_or(true, |o| w.compare(o) == Ordering::Less) {
                out = Some(w);
            }
        }
        let out = out.expect("non-full set has a remaining vertex");
        self.best.insert(s, out.clone());
        Ok(out)
    }

    fn enumerate(
        &mut self,
        s: u32,
        target: &Width,
        order: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        cap: usize,
    ) -> Result<()> {
        if out.len() >= cap {
            return Ok(());
        }
        if s == self.full {
            out.push(order.clone());
            return Ok(());
        }
        for v in 0..self.verts.len() {
            if s & (1 << v) != 0 {
                continue;
            }
            let here = self.cost(self.bag(s, v))?;
            let rest = self.best(s | (1 << v))?;
            if here.max(rest).compare(target) != Ordering::Greater {
                order.push(v);
                self.enumerate(s | (1 << v), target, order, out, cap)?;
                order.pop();
                if out.len() >= cap {
                    break;
                }
            }
        }
        Ok(())
    }

    fn decomposition(&self, order: &[usize]) -> Ghd {
        let n = order.len();
        let mut pos = vec![0; n];
        for (i, &v) in order.iter().enumerate() {
            pos[v] = i;
        }
        let mut bags = Vec::with_capacity(n);
        let mut parents = vec![None; n];
        let mut s = 0u32;
        for (i, &v) in order.iter().enumerate() {
            let bag = self.bag(s, v);
            let rest = bag & !(1 << v);
            if rest != 0 {
                let next = (0..self.verts.len())
                    .filter(|&u| rest & (1 << u) != 0)
                    .min_by_key(|&u| pos[u])
                    .expect("non-empty");
                parents[i] = Some(pos[next]);
            }
            bags.push(self.bag_set(bag));
            s |= 1 << v;
        }
        let root = n - 1;
        for (i, p) in parents.iter_mut().enumerate() {
            if p.is_none() && i != root {
                *p = Some(root);
            }
        }
        Ghd::from_parents(bags, parents).expect("elimination yields a tree").simplify()
    }
}

fn tie_key(g: &Ghd) -> (usize, usize, String) {
    (g.len(), g.nodes().iter().map(|n| n.bag.len()).sum(), g.canonical())
}

/// Minimum-width GHD of `h` under `measure`.
///
/// Ties on width go to fewer nodes, then smaller total bag size, then the
/// lexicographically smallest canonical encoding.
pub fn optimal_ghd(h: &Hypergraph, measure: &dyn BagMeasure, cfg: &SearchConfig) -> Result<(Ghd, Width)> {
    let verts: Vec<Attr> = h.vertices().iter().cloned().collect();
    let n = verts.len();
    if n == 0 {
        let g = Ghd::single(AttrSet::new());
        let w = measure.measure(&AttrSet::new())?;
        return Ok((g, w));
    }
    if n > cfg.attribute_cap || n > 31 {
        return Err(AjarError::AttributeCap { found: n, cap: cfg.attribute_cap.min(31) });
    }
    let index: HashMap<&Attr, usize> = verts.iter().enumerate().map(|(i, a)| (a, i)).collect();
    let mut nb = vec![0u32; n];
    for e in h.edges() {
        let mask: u32 = e.set.iter().map(|a| 1u32 << index[a]).fold(0, |x, y| x | y);
        for a in &e.set {
            nb[index[a]] |= mask & !(1 << index[a]);
        }
    }
    let mut search = Search {
        verts,
        nb,
        full: if n == 32 { u32::MAX } else { (1u32 << n) - 1 },
        measure,
        cost: HashMap::new(),
        best: HashMap::new(),
    };
    let target = search.best(0)?;
    let mut orders = Vec::new();
    search.enumerate(0, &target, &mut Vec::new(), &mut orders, cfg.order_cap.max(1))?;

    let mut seen = HashSet::new();
    let mut chosen: Option<(Ghd, (usize, usize, String))> = None;
    for order in orders {
        let g = search.decomposition(&order);
        let key = tie_key(&g);
        if !seen.insert(key.2.clone()) {
            continue;
        }
        if chosen.as_ref().map_or(true, |(_, k)| key < *k) {
            chosen = Some((g, key));
        }
    }
    let (g, _) = chosen.ok_or_else(|| AjarError::Internal("no elimination order found".into()))?;
    let w = super::width::width(&g, measure)?.overall;
    if !w.same(&target) {
        return Err(AjarError::Internal(format!(
            "decomposition width {w} differs from the optimum {target}"
        )));
    }
    Ok((g, w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ghd::is_ghd;
    use crate::ghd::width::FractionalCover;

    fn run(edges: &[&[&str]]) -> (Ghd, Width) {
        let h = Hypergraph::from_sets(edges).unwrap();
        let r = optimal_ghd(&h, &FractionalCover::unit(&h), &SearchConfig::default()).unwrap();
        assert!(is_ghd(&h, &r.0), "{:?}", r.0);
        r
    }

    #[test]
    fn acyclic_queries_have_width_one() {
        let (g, w) = run(&[&["A", "B"], &["B", "C"], &["C", "D"]]);
        assert_eq!(w, Width::exact(1, 1));
        assert_eq!(g.len(), 3);
    }

    #[test]
    fn triangle_is_one_bag() {
        let (g, w) = run(&[&["A", "B"], &["B", "C"], &["A", "C"]]);
        assert_eq!(w, Width::exact(3, 2));
        assert_eq!(g.len(), 1);
    }

    #[test]
    fn six_cycle_has_width_two() {
        let (_, w) = run(&[
            &["A1", "A2"],
            &["A2", "A3"],
            &["A3", "A4"],
            &["A4", "A5"],
            &["A5", "A6"],
            &["A6", "A1"],
        ]);
        assert_eq!(w, Width::exact(2, 1));
    }

    #[test]
    fn cap_is_enforced() {
        let names: Vec<String> = (0..14).map(|i| format!("X{i}")).collect();
        let edges: Vec<Vec<&str>> = names.windows(2).map(|w| vec![w[0].as_str(), w[1].as_str()]).collect();
        let refs: Vec<&[&str]> = edges.iter().map(|e| e.as_slice()).collect();
        let h = Hypergraph::from_sets(&refs).unwrap();
        let r = optimal_ghd(&h, &FractionalCover::unit(&h), &SearchConfig::default());
        assert!(matches!(r, Err(AjarError::AttributeCap { .. })));
    }
}
