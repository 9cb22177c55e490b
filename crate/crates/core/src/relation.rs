//! Annotated relations and the operators the engine composes: natural join,
//! aggregation, product aggregation, semijoin, and the annotation-erasing
//! projection π¹.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::error::{AjarError, Result};
use crate::semiring::{AggOp, Annotation, SemiringSpec};
use crate::value::{render_attrs, render_tuple, Attr, AttrSet, Tuple, Value};

/// A finite map from tuples over `schema` to non-zero annotations.
#[derive(Clone)]
pub struct AnnotatedRelation<K> {
    schema: Vec<Attr>,
    tuples: BTreeMap<Tuple, K>,
}

impl<K: Annotation> fmt::Debug for AnnotatedRelation<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) {{", render_attrs(&self.schema))?;
        for (i, (t, k)) in self.tuples.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{} -> {}", render_tuple(t), k.render())?;
        }
        f.write_str("}")
    }
}

fn check_schema(schema: &[Attr]) -> Result<()> {
    let set: BTreeSet<&Attr> = schema.iter().collect();
    if set.len() != schema.len() {
        return Err(AjarError::Schema(format!(
            "repeated attribute in schema ({})",
            render_attrs(schema)
        )));
    }
    Ok(())
}

impl<K: Annotation> AnnotatedRelation<K> {
    pub fn empty(schema: Vec<Attr>) -> Result<Self> {
        check_schema(&schema)?;
        Ok(AnnotatedRelation { schema, tuples: BTreeMap::new() })
    }

    /// The 0-ary relation holding the empty tuple with annotation `k`.
    pub fn scalar(k: K, semiring: &SemiringSpec<K>) -> Self {
        let mut tuples = BTreeMap::new();
        if !semiring.is_zero(&k) {
            tuples.insert(Vec::new(), k);
        }
        AnnotatedRelation { schema: Vec::new(), tuples }
    }

    /// Build from rows; zero annotations are dropped and repeated tuples rejected.
    pub fn from_rows(
        schema: Vec<Attr>,
        rows: impl IntoIterator<Item = (Tuple, K)>,
        semiring: &SemiringSpec<K>,
    ) -> Result<Self> {
        let mut rel = Self::empty(schema)?;
        for (t, k) in rows {
            rel.insert(t, k, semiring)?;
        }
        Ok(rel)
    }

    /// Convenience constructor over integer values.
    pub fn from_int_rows(
        schema: &[&str],
        rows: &[(&[i64], K)],
        semiring: &SemiringSpec<K>,
    ) -> Result<Self> {
        Self::from_rows(
            schema.iter().map(|a| Attr::new(a)).collect(),
            rows.iter()
                .map(|(t, k)| (t.iter().map(|v| Value::Int(*v)).collect(), k.clone())),
            semiring,
        )
    }

    pub fn insert(&mut self, tuple: Tuple, k: K, semiring: &SemiringSpec<K>) -> Result<()> {
        if tuple.len() != self.schema.len() {
            return Err(AjarError::Schema(format!(
                "tuple {} has arity {} but schema ({}) has {}",
                render_tuple(&tuple),
                tuple.len(),
                render_attrs(&self.schema),
                self.schema.len()
            )));
        }
        if self.tuples.contains_key(&tuple) {
            return Err(AjarError::DuplicateTuple {
                schema: render_attrs(&self.schema),
                tuple: render_tuple(&tuple),
            });
        }
        if !semiring.is_zero(&k) {
            self.tuples.insert(tuple, k);
        }
        Ok(())
    }

    pub(crate) fn from_map(schema: Vec<Attr>, tuples: BTreeMap<Tuple, K>) -> Self {
        AnnotatedRelation { schema, tuples }
    }

    pub fn schema(&self) -> &[Attr] {
        &self.schema
    }

    pub fn attr_set(&self) -> AttrSet {
        self.schema.iter().cloned().collect()
    }

    pub fn position(&self, attr: &Attr) -> Option<usize> {
        self.schema.iter().position(|a| a == attr)
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn get(&self, tuple: &[Value]) -> Option<&K> {
        self.tuples.get(tuple)
    }

    /// Tuples in sorted order.
    pub fn iter(&self) -> impl Iterator<Item = (&Tuple, &K)> {
        self.tuples.iter()
    }

    /// Distinct values taken by `attr`.
    pub fn values_of(&self, attr: &Attr) -> BTreeSet<Value> {
        match self.position(attr) {
            Some(i) => self.tuples.keys().map(|t| t[i].clone()).collect(),
            None => BTreeSet::new(),
        }
    }

    /// Same relation with columns permuted into `schema`, which must be a
    /// permutation of the current one.
    pub fn reorder(&self, schema: &[Attr]) -> Result<Self> {
        if schema == self.schema.as_slice() {
            return Ok(self.clone());
        }
        let idx: Vec<usize> = schema
            .iter()
            .map(|a| {
                self.position(a).ok_or_else(|| {
                    AjarError::Schema(format!("attribute {a} not in ({})", render_attrs(&self.schema)))
                })
            })
            .collect::<Result<_>>()?;
        if idx.len() != self.schema.len() {
            return Err(AjarError::Schema("reorder changes the attribute set".into()));
        }
        let tuples = self
            .tuples
            .iter()
            .map(|(t, k)| (idx.iter().map(|&i| t[i].clone()).collect(), k.clone()))
            .collect();
        Ok(AnnotatedRelation { schema: schema.to_vec(), tuples })
    }

    /// Rename attributes; names missing from `map` are kept.
    pub fn rename(&self, map: &BTreeMap<Attr, Attr>) -> Result<Self> {
        let schema: Vec<Attr> = self
            .schema
            .iter()
            .map(|a| map.get(a).cloned().unwrap_or_else(|| a.clone()))
            .collect();
        check_schema(&schema)?;
        Ok(AnnotatedRelation { schema, tuples: self.tuples.clone() })
    }

    /// π¹: project onto `attrs ∩ schema` (kept in schema order) with every
    /// surviving annotation replaced by one.
    pub fn project_ones(&self, attrs: &AttrSet, semiring: &SemiringSpec<K>) -> Self {
        let keep: Vec<usize> = (0..self.schema.len())
            .filter(|&i| attrs.contains(&self.schema[i]))
            .collect();
        let schema = keep.iter().map(|&i| self.schema[i].clone()).collect();
        let tuples = self
            .tuples
            .keys()
            .map(|t| (keep.iter().map(|&i| t[i].clone()).collect(), semiring.one().clone()))
            .collect();
        AnnotatedRelation { schema, tuples }
    }

    /// Every annotation multiplied by `k`.
    pub fn scale(&self, k: &K, semiring: &SemiringSpec<K>) -> Self {
        let tuples = self
            .tuples
            .iter()
            .filter_map(|(t, a)| {
                let v = semiring.mul(a, k);
                (!semiring.is_zero(&v)).then(|| (t.clone(), v))
            })
            .collect();
        AnnotatedRelation { schema: self.schema.clone(), tuples }
    }
}

impl<K: Annotation> PartialEq for AnnotatedRelation<K> {
    /// Equality up to column order.
    fn eq(&self, other: &Self) -> bool {
        if self.schema.len() != other.schema.len() || self.tuples.len() != other.tuples.len() {
            return false;
        }
        match other.reorder(&self.schema) {
            Ok(o) => o.tuples == self.tuples,
            Err(_) => false,
        }
    }
}

impl<K: Annotation> Eq for AnnotatedRelation<K> {}

/// Natural join of two relations, annotations multiplied. The output schema
/// is `left.schema` followed by the new attributes of `right`.
pub fn join_pair<K: Annotation>(
    left: &AnnotatedRelation<K>,
    right: &AnnotatedRelation<K>,
    semiring: &SemiringSpec<K>,
) -> AnnotatedRelation<K> {
    let shared: Vec<(usize, usize)> = left
        .schema
        .iter()
        .enumerate()
        .filter_map(|(i, a)| right.position(a).map(|j| (i, j)))
        .collect();
    let extra: Vec<usize> = (0..right.schema.len())
        .filter(|&j| !shared.iter().any(|&(_, s)| s == j))
        .collect();
    let mut schema = left.schema.clone();
    schema.extend(extra.iter().map(|&j| right.schema[j].clone()));

    let mut index: HashMap<Vec<&Value>, Vec<(&Tuple, &K)>> = HashMap::new();
    for (t, k) in &right.tuples {
        let key = shared.iter().map(|&(_, j)| &t[j]).collect();
        index.entry(key).or_default().push((t, k));
    }
    let mut tuples = BTreeMap::new();
    for (lt, lk) in &left.tuples {
        let key: Vec<&Value> = shared.iter().map(|&(i, _)| &lt[i]).collect();
        if let Some(matches) = index.get(&key) {
            for (rt, rk) in matches {
                let k = semiring.mul(lk, rk);
                if semiring.is_zero(&k) {
                    continue;
                }
                let mut t = lt.clone();
                t.extend(extra.iter().map(|&j| rt[j].clone()));
                tuples.insert(t, k);
            }
        }
    }
    AnnotatedRelation { schema, tuples }
}

/// Left-to-right natural join of all relations; the empty join is the unit scalar.
pub fn join<K: Annotation>(
    relations: &[&AnnotatedRelation<K>],
    semiring: &SemiringSpec<K>,
) -> AnnotatedRelation<K> {
    let mut acc = AnnotatedRelation::scalar(semiring.one().clone(), semiring);
    for r in relations {
        acc = join_pair(&acc, r, semiring);
    }
    acc
}

fn group_by_removing<K: Annotation>(
    rel: &AnnotatedRelation<K>,
    attr: &Attr,
) -> Result<(usize, Vec<Attr>, BTreeMap<Tuple, Vec<(Value, K)>>)> {
    let pos = rel.position(attr).ok_or_else(|| {
        AjarError::Schema(format!("cannot aggregate {attr}: not in ({})", render_attrs(&rel.schema)))
    })?;
    let mut schema = rel.schema.clone();
    schema.remove(pos);
    let mut groups: BTreeMap<Tuple, Vec<(Value, K)>> = BTreeMap::new();
    for (t, k) in &rel.tuples {
        let mut key = t.clone();
        let v = key.remove(pos);
        groups.entry(key).or_default().push((v, k.clone()));
    }
    Ok((pos, schema, groups))
}

/// Σ_(attr, op): group by the remaining attributes and fold with `op`.
pub fn aggregate<K: Annotation>(
    rel: &AnnotatedRelation<K>,
    attr: &Attr,
    op: &str,
    semiring: &SemiringSpec<K>,
) -> Result<AnnotatedRelation<K>> {
    let f = semiring.add_op(op).ok_or_else(|| AjarError::UnknownOperator {
        op: op.to_string(),
        semiring: semiring.name().to_string(),
    })?;
    let (_, schema, groups) = group_by_removing(rel, attr)?;
    let mut tuples = BTreeMap::new();
    for (key, members) in groups {
        let v = members
            .iter()
            .fold(semiring.zero().clone(), |acc, (_, k)| f(&acc, k));
        if !semiring.is_zero(&v) {
            tuples.insert(key, v);
        }
    }
    Ok(AnnotatedRelation { schema, tuples })
}

/// Σ_(attr, ⊗): a group survives only if it carries every value of the
/// attribute's declared domain; its annotation is the product of the group.
pub fn product_aggregate<K: Annotation>(
    rel: &AnnotatedRelation<K>,
    attr: &Attr,
    domains: &DomainRegistry,
    semiring: &SemiringSpec<K>,
) -> Result<AnnotatedRelation<K>> {
    if !semiring.is_multiply_idempotent() {
        return Err(AjarError::NonIdempotentProduct(semiring.name().to_string()));
    }
    let domain = domains.get(attr).ok_or_else(|| AjarError::MissingDomain(attr.clone()))?;
    let (_, schema, groups) = group_by_removing(rel, attr)?;
    let mut tuples = BTreeMap::new();
    for (key, members) in groups {
        for (v, _) in &members {
            if !domain.contains(v) {
                return Err(AjarError::DomainViolation { attr: attr.clone(), value: v.to_string() });
            }
        }
        if members.len() != domain.len() {
            continue;
        }
        let v = semiring.product(members.iter().map(|(_, k)| k));
        if !semiring.is_zero(&v) {
            tuples.insert(key, v);
        }
    }
    Ok(AnnotatedRelation { schema, tuples })
}

/// Dispatch on the operator kind.
pub fn apply_aggregation<K: Annotation>(
    rel: &AnnotatedRelation<K>,
    attr: &Attr,
    op: &AggOp,
    domains: Option<&DomainRegistry>,
    semiring: &SemiringSpec<K>,
) -> Result<AnnotatedRelation<K>> {
    match op {
        AggOp::Add(name) => aggregate(rel, attr, name, semiring),
        AggOp::Product => {
            let empty = DomainRegistry::default();
            product_aggregate(rel, attr, domains.unwrap_or(&empty), semiring)
        }
    }
}

/// Tuples of `left` whose projection onto the shared attributes occurs in `right`.
pub fn semijoin<K: Annotation>(
    left: &AnnotatedRelation<K>,
    right: &AnnotatedRelation<K>,
) -> AnnotatedRelation<K> {
    let shared: Vec<(usize, usize)> = left
        .schema
        .iter()
        .enumerate()
        .filter_map(|(i, a)| right.position(a).map(|j| (i, j)))
        .collect();
    if right.is_empty() {
        return AnnotatedRelation { schema: left.schema.clone(), tuples: BTreeMap::new() };
    }
    let keys: std::collections::HashSet<Vec<&Value>> = right
        .tuples
        .keys()
        .map(|t| shared.iter().map(|&(_, j)| &t[j]).collect())
        .collect();
    let tuples = left
        .tuples
        .iter()
        .filter(|(t, _)| {
            let key: Vec<&Value> = shared.iter().map(|&(i, _)| &t[i]).collect();
            keys.contains(&key)
        })
        .map(|(t, k)| (t.clone(), k.clone()))
        .collect();
    AnnotatedRelation { schema: left.schema.clone(), tuples }
}

/// Attribute domains D^A used by product aggregation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DomainRegistry {
    domains: BTreeMap<Attr, BTreeSet<Value>>,
}

impl DomainRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare(&mut self, attr: Attr, values: impl IntoIterator<Item = Value>) {
        self.domains.insert(attr, values.into_iter().collect());
    }

    pub fn get(&self, attr: &Attr) -> Option<&BTreeSet<Value>> {
        self.domains.get(attr)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Attr, &BTreeSet<Value>)> {
        self.domains.iter()
    }

    /// Declare the active domain (union of occurring values) for every
    /// attribute of `relations` that has no explicit domain yet.
    pub fn add_active<K: Annotation>(&mut self, relations: &[&AnnotatedRelation<K>]) {
        let mut active: BTreeMap<Attr, BTreeSet<Value>> = BTreeMap::new();
        for r in relations {
            for a in r.schema() {
                active.entry(a.clone()).or_default().extend(r.values_of(a));
            }
        }
        for (a, vs) in active {
            self.domains.entry(a).or_insert(vs);
        }
    }

    pub fn active<K: Annotation>(relations: &[&AnnotatedRelation<K>]) -> Self {
        let mut d = Self::new();
        d.add_active(relations);
        d
    }

    /// Every value occurring in a relation lies in its attribute's declared domain.
    pub fn validate<K: Annotation>(&self, relations: &[&AnnotatedRelation<K>]) -> Result<()> {
        for r in relations {
            for a in r.schema() {
                if let Some(d) = self.domains.get(a) {
                    if let Some(v) = r.values_of(a).into_iter().find(|v| !d.contains(v)) {
                        return Err(AjarError::DomainViolation { attr: a.clone(), value: v.to_string() });
                    }
                }
            }
        }
        Ok(())
    }

    /// Copy every domain of a key in `map` to the mapped names as well.
    pub fn with_copies(&self, map: &BTreeMap<Attr, Vec<Attr>>) -> Self {
        let mut out = self.clone();
        for (a, copies) in map {
            if let Some(d) = self.domains.get(a) {
                for c in copies {
                    out.domains.insert(c.clone(), d.clone());
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semiring::SemiringSpec;

    fn a(n: &str) -> Attr {
        Attr::new(n)
    }

    #[test]
    fn zero_annotations_are_dropped() {
        let s = SemiringSpec::integers();
        let r = AnnotatedRelation::from_int_rows(&["A"], &[(&[1], 0), (&[2], 3)], &s).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r.get(&[Value::Int(2)]), Some(&3));
    }

    #[test]
    fn duplicate_tuple_is_rejected() {
        let s = SemiringSpec::integers();
        let err = AnnotatedRelation::from_int_rows(&["A"], &[(&[1], 1), (&[1], 2)], &s);
        assert!(matches!(err, Err(AjarError::DuplicateTuple { .. })));
    }

    #[test]
    fn empty_schema_holds_at_most_one_tuple() {
        let s = SemiringSpec::integers();
        let r = AnnotatedRelation::from_rows(vec![], vec![(vec![], 4)], &s).unwrap();
        assert_eq!(r.len(), 1);
        assert!(AnnotatedRelation::from_rows(vec![], vec![(vec![], 4), (vec![], 5)], &s).is_err());
    }

    #[test]
    fn join_multiplies_and_aggregate_folds() {
        let s = SemiringSpec::integers();
        let r = AnnotatedRelation::from_int_rows(&["A", "B"], &[(&[1, 1], 2), (&[1, 2], 3)], &s)
            .unwrap();
        let t = AnnotatedRelation::from_int_rows(&["B"], &[(&[1], 5), (&[2], 7)], &s).unwrap();
        let j = join_pair(&r, &t, &s);
        assert_eq!(j.get(&[Value::Int(1), Value::Int(1)]), Some(&10));
        assert_eq!(j.get(&[Value::Int(1), Value::Int(2)]), Some(&21));
        let g = aggregate(&j, &a("B"), "sum", &s).unwrap();
        assert_eq!(g.get(&[Value::Int(1)]), Some(&31));
    }

    #[test]
    fn product_aggregate_needs_full_domain() {
        let s = SemiringSpec::boolean();
        let r = AnnotatedRelation::from_int_rows(
            &["A", "B"],
            &[(&[1, 0], true), (&[1, 1], true), (&[2, 0], true)],
            &s,
        )
        .unwrap();
        let mut d = DomainRegistry::new();
        d.declare(a("B"), [Value::Int(0), Value::Int(1)]);
        let p = product_aggregate(&r, &a("B"), &d, &s).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.get(&[Value::Int(1)]), Some(&true));
        assert!(matches!(
            product_aggregate(&r, &a("B"), &DomainRegistry::new(), &s),
            Err(AjarError::MissingDomain(_))
        ));
        let ints = SemiringSpec::integers();
        let ri = AnnotatedRelation::from_int_rows(&["B"], &[(&[0], 2)], &ints).unwrap();
        assert!(matches!(
            product_aggregate(&ri, &a("B"), &d, &ints),
            Err(AjarError::NonIdempotentProduct(_))
        ));
    }

    #[test]
    fn equality_ignores_column_order() {
        let s = SemiringSpec::integers();
        let r = AnnotatedRelation::from_int_rows(&["A", "B"], &[(&[1, 2], 2)], &s).unwrap();
        let q = AnnotatedRelation::from_int_rows(&["B", "A"], &[(&[2, 1], 2)], &s).unwrap();
        assert_eq!(r, q);
    }

    #[test]
    fn semijoin_and_projection() {
        let s = SemiringSpec::integers();
        let r = AnnotatedRelation::from_int_rows(&["A", "B"], &[(&[1, 1], 2), (&[2, 2], 3)], &s)
            .unwrap();
        let t = AnnotatedRelation::from_int_rows(&["B", "C"], &[(&[1, 9], 5)], &s).unwrap();
        let sj = semijoin(&r, &t);
        assert_eq!(sj.len(), 1);
        let p = r.project_ones(&[a("A")].into_iter().collect(), &s);
        assert_eq!(p.get(&[Value::Int(2)]), Some(&1));
    }
}
