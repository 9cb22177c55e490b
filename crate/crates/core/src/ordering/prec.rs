use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{AjarError, Result};
use crate::hypergraph::Hypergraph;
use crate::semiring::AggOp;
use crate::value::{Attr, AttrSet};

use super::AggregationOrdering;

/// Default cap on enumerated linear extensions.
pub const DEFAULT_EXTENSION_CAP: usize = 10_000;

/// Why a pair entered the DNC relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PrecRule {
    /// Different operators on two attributes of one edge.
    SharedEdge { edge: String },
    /// An output attribute against an aggregated one.
    OutputFirst,
    /// Different operators, and the later attribute shares an edge with
    /// something the earlier one already precedes.
    Extension { via: Attr },
    /// Earlier precedes `via`, which precedes later.
    Transitivity { via: Attr },
}

impl fmt::Display for PrecRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrecRule::SharedEdge { edge } => write!(f, "different operators sharing edge {edge}"),
            PrecRule::OutputFirst => f.write_str("output attribute before aggregated attribute"),
            PrecRule::Extension { via } => {
                write!(f, "different operators, second attribute adjacent to {via} which the first precedes")
            }
            PrecRule::Transitivity { via } => write!(f, "transitivity through {via}"),
        }
    }
}

/// The fixed point of the DNC rules over a hypergraph and ordering.
///
/// Pairs are stored oriented: `(a, b)` with `a` before `b` in the extended
/// ordering (outputs first, then the aggregation ordering).
#[derive(Clone, Debug)]
pub struct PrecedenceRelation {
    order: Vec<(Attr, AggOp)>,
    outputs: AttrSet,
    prec: BTreeSet<(Attr, Attr)>,
    rules: BTreeMap<(Attr, Attr), (PrecRule, usize)>,
    rounds: usize,
}

impl PrecedenceRelation {
    /// Pairs `(a, b)` of aggregated attributes with `a <_{H,α} b`.
    pub fn pairs(&self) -> &BTreeSet<(Attr, Attr)> {
        &self.prec
    }

    pub fn precedes(&self, a: &Attr, b: &Attr) -> bool {
        self.prec.contains(&(a.clone(), b.clone()))
    }

    /// The extended order: outputs come before every aggregated attribute.
    pub fn lt(&self, a: &Attr, b: &Attr) -> bool {
        let out_a = self.outputs.contains(a);
        let out_b = self.outputs.contains(b);
        match (out_a, out_b) {
            (true, false) => true,
            (false, false) => self.precedes(a, b),
            _ => false,
        }
    }

    /// Do-not-commute, symmetric.
    pub fn dnc(&self, a: &Attr, b: &Attr) -> bool {
        self.rules.contains_key(&(a.clone(), b.clone())) || self.rules.contains_key(&(b.clone(), a.clone()))
    }

    /// Rule and round that first added the oriented pair.
    pub fn rule(&self, a: &Attr, b: &Attr) -> Option<&(PrecRule, usize)> {
        self.rules.get(&(a.clone(), b.clone()))
    }

    /// Number of extension rounds that added at least one pair.
    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn outputs(&self) -> &AttrSet {
        &self.outputs
    }

    /// Members of `set` with no predecessor inside `set`.
    pub fn minimal(&self, set: &AttrSet) -> AttrSet {
        set.iter()
            .filter(|b| !set.iter().any(|a| self.lt(a, b)))
            .cloned()
            .collect()
    }

    /// First pair `(a, b)` with `a` required before `b` but `b` before `a` in `beta`.
    pub fn first_violation(&self, beta: &AggregationOrdering) -> Option<(Attr, Attr, PrecRule)> {
        for (a, b) in &self.prec {
            if let (Some(pa), Some(pb)) = (beta.position(a), beta.position(b)) {
                if pb < pa {
                    let rule = self.rules[&(a.clone(), b.clone())].0.clone();
                    return Some((a.clone(), b.clone(), rule));
                }
            }
        }
        None
    }

    /// Orderings of the aggregated attributes consistent with the relation,
    /// each carrying the operators of the original ordering.
    pub fn linear_extensions(&self) -> LinearExtensions {
        let index: BTreeMap<&Attr, usize> =
            self.order.iter().enumerate().map(|(i, (a, _))| (a, i)).collect();
        let mut preds = vec![Vec::new(); self.order.len()];
        for (a, b) in &self.prec {
            preds[index[b]].push(index[a]);
        }
        LinearExtensions::new(self.order.clone(), preds)
    }
}

/// Compute `<_{H,α}` as the fixed point of the base and extension rules.
/// Product aggregations are not supported here.
pub fn compute_prec(h: &Hypergraph, alpha: &AggregationOrdering) -> Result<PrecedenceRelation> {
    if alpha.has_products() {
        return Err(AjarError::Ordering(
            "precedence relation is defined for product-free orderings".into(),
        ));
    }
    for (a, _) in alpha.items() {
        if !h.vertices().contains(a) {
            return Err(AjarError::Ordering(format!("attribute {a} is not in the hypergraph")));
        }
    }
    let outputs = alpha.outputs(h);
    let mut names: Vec<Attr> = outputs.iter().cloned().collect();
    let mut ops: Vec<Option<AggOp>> = vec![None; names.len()];
    for (a, o) in alpha.items() {
        names.push(a.clone());
        ops.push(Some(o.clone()));
    }
    let n = names.len();
    let mut adj = vec![vec![None::<String>; n]; n];
    for e in h.edges() {
        for i in 0..n {
            if !e.contains(&names[i]) {
                continue;
            }
            for j in 0..n {
                if i != j && e.contains(&names[j]) && adj[i][j].is_none() {
                    adj[i][j] = Some(e.name.clone());
                }
            }
        }
    }

    let mut dnc = vec![vec![false; n]; n];
    let mut rules: BTreeMap<(usize, usize), (PrecRule, usize)> = BTreeMap::new();
    let mut add = |dnc: &mut Vec<Vec<bool>>, i: usize, j: usize, rule: PrecRule, round: usize| {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        dnc[a][b] = true;
        dnc[b][a] = true;
        rules.entry((a, b)).or_insert((rule, round));
    };
    for i in 0..n {
        for j in i + 1..n {
            if ops[i] == ops[j] {
                continue;
            }
            if let Some(edge) = &adj[i][j] {
                add(&mut dnc, i, j, PrecRule::SharedEdge { edge: edge.clone() }, 0);
            } else if ops[i].is_none() || ops[j].is_none() {
                add(&mut dnc, i, j, PrecRule::OutputFirst, 0);
            }
        }
    }

    let mut rounds = 0;
    let bound = 2 * alpha.len() * alpha.len() + 1;
    for round in 1..=bound {
        let prev = dnc.clone();
        let lt = |i: usize, j: usize| i < j && prev[i][j];
        let mut fresh = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if a == b || prev[a][b] {
                    continue;
                }
                let mut rule = None;
                if ops[a] != ops[b] {
                    if let Some(c) = (0..n).find(|&c| c != b && lt(a, c) && adj[b][c].is_some()) {
                        rule = Some(PrecRule::Extension { via: names[c].clone() });
                    }
                }
                if rule.is_none() {
                    if let Some(c) = (0..n).find(|&c| lt(a, c) && lt(c, b)) {
                        rule = Some(PrecRule::Transitivity { via: names[c].clone() });
                    }
                }
                if let Some(r) = rule {
                    fresh.push((a, b, r));
                }
            }
        }
        if fresh.is_empty() {
            break;
        }
        rounds = round;
        for (a, b, r) in fresh {
            // The rule is recorded under the orientation it was derived in;
            // extension may be found from either endpoint.
            add(&mut dnc, a, b, r, round);
        }
    }

    let first_alpha = outputs.len();
    let mut prec = BTreeSet::new();
    let mut named_rules = BTreeMap::new();
    for ((i, j), r) in rules {
        let pair = (names[i].clone(), names[j].clone());
        if i >= first_alpha && j >= first_alpha {
            prec.insert(pair.clone());
        }
        named_rules.insert(pair, r);
    }
    Ok(PrecedenceRelation {
        order: alpha.items().to_vec(),
        outputs,
        prec,
        rules: named_rules,
        rounds,
    })
}

/// Lazy backtracking enumeration of the orderings consistent with a set of
/// precedence constraints, smallest original index first at every step.
pub struct LinearExtensions {
    items: Vec<(Attr, AggOp)>,
    preds: Vec<Vec<usize>>,
    chosen: Vec<usize>,
    used: Vec<bool>,
    frames: Vec<usize>,
    empty_pending: bool,
}

/// Result of a capped enumeration.
#[derive(Clone, Debug)]
pub struct ExtensionSet {
    pub orderings: Vec<AggregationOrdering>,
    /// The cap was reached before the enumeration finished.
    pub overflowed: bool,
}

impl LinearExtensions {
    /// `preds[i]` lists indices that must come before item `i`.
    pub fn new(items: Vec<(Attr, AggOp)>, preds: Vec<Vec<usize>>) -> Self {
        let n = items.len();
        LinearExtensions {
            items,
            preds,
            chosen: Vec::with_capacity(n),
            used: vec![false; n],
            frames: if n == 0 { Vec::new() } else { vec![0] },
            empty_pending: n == 0,
        }
    }

    pub fn collect_capped(self, cap: usize) -> ExtensionSet {
        let mut orderings = Vec::new();
        let mut it = self;
        for o in it.by_ref() {
            if orderings.len() == cap {
                return ExtensionSet { orderings, overflowed: true };
            }
            orderings.push(o);
        }
        ExtensionSet { orderings, overflowed: false }
    }

    fn emit(&self, idx: &[usize]) -> AggregationOrdering {
        AggregationOrdering::new(idx.iter().map(|&i| self.items[i].clone()).collect())
            .expect("a permutation of a valid ordering")
    }
}

impl Iterator for LinearExtensions {
    type Item = AggregationOrdering;

    fn next(&mut self) -> Option<AggregationOrdering> {
        if self.empty_pending {
            self.empty_pending = false;
            return Some(AggregationOrdering::empty());
        }
        let n = self.items.len();
        while let Some(&start) = self.frames.last() {
            let found = (start..n)
                .find(|&c| !self.used[c] && self.preds[c].iter().all(|&p| self.used[p]));
            match found {
                Some(c) => {
                    *self.frames.last_mut().expect("non-empty") = c + 1;
                    self.used[c] = true;
                    self.chosen.push(c);
                    if self.chosen.len() == n {
                        let out = self.emit(&self.chosen);
                        self.used[c] = false;
                        self.chosen.pop();
                        return Some(out);
                    }
                    self.frames.push(0);
                }
                None => {
                    self.frames.pop();
                    if let Some(c) = self.chosen.pop() {
                        self.used[c] = false;
                    }
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ord(p: &[(&str, &str)]) -> AggregationOrdering {
        AggregationOrdering::from_pairs(p).unwrap()
    }

    fn pairs(p: &[(&str, &str)]) -> BTreeSet<(Attr, Attr)> {
        p.iter().map(|(a, b)| (Attr::new(a), Attr::new(b))).collect()
    }

    #[test]
    fn chain_vectors() {
        let h = Hypergraph::from_sets(&[&["A", "B"], &["B", "C"]]).unwrap();
        let p = compute_prec(&h, &ord(&[("A", "sum"), ("B", "max"), ("C", "max")])).unwrap();
        assert_eq!(p.pairs(), &pairs(&[("A", "B"), ("A", "C")]));
        let p = compute_prec(&h, &ord(&[("B", "max"), ("A", "sum"), ("C", "max")])).unwrap();
        assert_eq!(p.pairs(), &pairs(&[("B", "A")]));
    }

    #[test]
    fn extension_rule_reaches_two_hops() {
        let h = Hypergraph::from_sets(&[&["A", "B"], &["B", "D"], &["C", "D"]]).unwrap();
        let p = compute_prec(&h, &ord(&[("A", "sum"), ("B", "max"), ("C", "max"), ("D", "sum")]))
            .unwrap();
        assert_eq!(
            p.pairs(),
            &pairs(&[("A", "B"), ("A", "C"), ("A", "D"), ("B", "D"), ("C", "D")])
        );
        assert!(matches!(p.rule(&Attr::new("A"), &Attr::new("C")), Some((PrecRule::Extension { .. }, 2))));
    }

    #[test]
    fn outputs_precede_aggregated() {
        let h = Hypergraph::from_sets(&[&["O", "A"]]).unwrap();
        let p = compute_prec(&h, &ord(&[("A", "sum")])).unwrap();
        assert!(p.lt(&Attr::new("O"), &Attr::new("A")));
        assert!(!p.lt(&Attr::new("A"), &Attr::new("O")));
        assert!(p.pairs().is_empty());
    }

    #[test]
    fn extensions_of_b2() {
        let h = Hypergraph::from_sets(&[&["A", "B"], &["A", "C"]]).unwrap();
        let p = compute_prec(&h, &ord(&[("A", "sum"), ("B", "max"), ("C", "sum")])).unwrap();
        let got: Vec<String> = p
            .linear_extensions()
            .map(|o| o.attr_list().iter().map(|a| a.to_string()).collect())
            .collect();
        assert_eq!(got, vec!["ABC", "ACB", "CAB"]);
    }

    #[test]
    fn extension_cap_signals_overflow() {
        let items: Vec<(Attr, AggOp)> =
            (0..6).map(|i| (Attr::new(&format!("X{i}")), AggOp::named("sum"))).collect();
        let set = LinearExtensions::new(items, vec![Vec::new(); 6]).collect_capped(100);
        assert!(set.overflowed);
        assert_eq!(set.orderings.len(), 100);
    }

    #[test]
    fn empty_ordering_has_one_extension() {
        let set = LinearExtensions::new(Vec::new(), Vec::new()).collect_capped(10);
        assert_eq!(set.orderings.len(), 1);
    }
}
