//! Bag measures and decomposition width.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{AjarError, Result};
use crate::hypergraph::Hypergraph;
use crate::value::AttrSet;

use super::lp::fractional_edge_cover;
use super::{Ghd, NodeId};

/// Relation name to cardinality.
pub type Statistics = BTreeMap<String, usize>;

/// Absolute tolerance for comparing data-aware widths.
pub const WIDTH_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WidthMode {
    /// Every edge costs one; widths are exact rationals.
    Unit,
    /// Edge `F` costs `log_IN |R_F|`; widths are floats.
    Data,
}

#[derive(Clone, PartialEq)]
pub enum Width {
    Exact(BigRational),
    Approx(f64),
}

impl Width {
    pub fn zero(mode: WidthMode) -> Width {
        match mode {
            WidthMode::Unit => Width::Exact(BigRational::zero()),
            WidthMode::Data => Width::Approx(0.0),
        }
    }

    pub fn exact(p: i64, q: i64) -> Width {
        Width::Exact(BigRational::new(p.into(), q.into()))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Width::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Width::Approx(v) => *v,
        }
    }

    /// Exact comparison for rationals, tolerance-based otherwise.
    pub fn compare(&self, other: &Width) -> Ordering {
        match (self, other) {
            (Width::Exact(a), Width::Exact(b)) => a.cmp(b),
            _ => {
                let (a, b) = (self.to_f64(), other.to_f64());
                if (a - b).abs() <= WIDTH_TOLERANCE {
                    Ordering::Equal
                } else if a < b {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
        }
    }

    pub fn same(&self, other: &Width) -> bool {
        self.compare(other) == Ordering::Equal
    }

    pub fn max(self, other: Width) -> Width {
        if other.compare(&self) == Ordering::Greater {
            other
        } else {
            self
        }
    }
}

impl fmt::Display for Width {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Width::Exact(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Width::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Width::Approx(v) => write!(f, "{v:.6}"),
        }
    }
}

impl fmt::Debug for Width {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Width {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// A node-monotone cost of a bag.
pub trait BagMeasure {
    fn mode(&self) -> WidthMode;
    fn measure(&self, bag: &AttrSet) -> Result<Width>;
}

/// Fractional edge cover number of a bag with respect to a fixed hypergraph.
pub struct FractionalCover {
    edges: Vec<AttrSet>,
    costs: Option<Vec<f64>>,
    cache: RefCell<HashMap<AttrSet, Width>>,
}

impl FractionalCover {
    pub fn unit(h: &Hypergraph) -> Self {
        FractionalCover { edges: h.edge_sets(), costs: None, cache: RefCell::new(HashMap::new()) }
    }

    /// Data-aware costs `log_IN |R_F|` with `IN = Σ_F |R_F|`; a relation missing
    /// from `stats` is an error.
    pub fn data(h: &Hypergraph, stats: &Statistics) -> Result<Self> {
        let sizes: Vec<usize> = h
            .edges()
            .iter()
            .map(|e| {
                stats
                    .get(&e.name)
                    .copied()
                    .ok_or_else(|| AjarError::Schema(format!("no statistics for relation {}", e.name)))
            })
            .collect::<Result<_>>()?;
        let total: usize = sizes.iter().sum();
        let costs = sizes
            .iter()
            .map(|&s| {
                if total <= 1 || s <= 1 {
                    0.0
                } else {
                    (s as f64).ln() / (total as f64).ln()
                }
            })
            .collect();
        Ok(FractionalCover { edges: h.edge_sets(), costs: Some(costs), cache: RefCell::new(HashMap::new()) })
    }

    pub fn new(h: &Hypergraph, mode: WidthMode, stats: Option<&Statistics>) -> Result<Self> {
        match mode {
            WidthMode::Unit => Ok(Self::unit(h)),
            WidthMode::Data => {
                let stats = stats.ok_or_else(|| {
                    AjarError::Schema("data-aware width needs relation statistics".into())
                })?;
                Self::data(h, stats)
            }
        }
    }
}

impl BagMeasure for FractionalCover {
    fn mode(&self) -> WidthMode {
        if self.costs.is_some() {
            WidthMode::Data
        } else {
            WidthMode::Unit
        }
    }

    fn measure(&self, bag: &AttrSet) -> Result<Width> {
        if let Some(w) = self.cache.borrow().get(bag) {
            return Ok(w.clone());
        }
        let w = match &self.costs {
            None => {
                let ones = vec![BigRational::from_integer(1.into()); self.edges.len()];
                Width::Exact(fractional_edge_cover(bag, &self.edges, &ones)?.value)
            }
            Some(c) => Width::Approx(fractional_edge_cover(bag, &self.edges, c)?.value),
        };
        self.cache.borrow_mut().insert(bag.clone(), w.clone());
        Ok(w)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WidthReport {
    pub mode: WidthMode,
    /// Indexed by node id.
    pub per_bag: Vec<Width>,
    pub overall: Width,
}

/// Width of `g` under `measure`: the maximum bag cost.
pub fn width(g: &Ghd, measure: &dyn BagMeasure) -> Result<WidthReport> {
    let per_bag = g
        .nodes()
        .iter()
        .map(|n| measure.measure(&n.bag))
        .collect::<Result<Vec<_>>>()?;
    let overall = per_bag
        .iter()
        .cloned()
        .fold(Width::zero(measure.mode()), Width::max);
    Ok(WidthReport { mode: measure.mode(), per_bag, overall })
}

/// Width of `g` measured by fractional edge covers in `h`.
pub fn ghd_width(
    g: &Ghd,
    h: &Hypergraph,
    stats: Option<&Statistics>,
    mode: WidthMode,
) -> Result<WidthReport> {
    width(g, &FractionalCover::new(h, mode, stats)?)
}

/// Widest node.
pub fn widest(report: &WidthReport) -> Option<NodeId> {
    (0..report.per_bag.len()).max_by(|&a, &b| report.per_bag[a].compare(&report.per_bag[b]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::attrs;

    #[test]
    fn unit_widths() {
        let h = Hypergraph::from_sets(&[&["A", "B"], &["B", "C"], &["A", "C"]]).unwrap();
        let g = Ghd::single(attrs(&["A", "B", "C"]));
        let r = ghd_width(&g, &h, None, WidthMode::Unit).unwrap();
        assert_eq!(r.overall, Width::exact(3, 2));
    }

    #[test]
    fn data_aware_costs_use_log_of_total() {
        let h = Hypergraph::build(&[("R", &["A", "B"]), ("S", &["B", "C"])]).unwrap();
        let stats: Statistics = [("R".to_string(), 10), ("S".to_string(), 90)].into_iter().collect();
        let g = Ghd::single(attrs(&["A", "B", "C"]));
        let r = ghd_width(&g, &h, Some(&stats), WidthMode::Data).unwrap();
        let expect = (10f64.ln() + 90f64.ln()) / 100f64.ln();
        assert!((r.overall.to_f64() - expect).abs() < 1e-9);
    }

    #[test]
    fn missing_statistics_rejected() {
        let h = Hypergraph::build(&[("R", &["A"])]).unwrap();
        assert!(FractionalCover::new(&h, WidthMode::Data, Some(&Statistics::new())).is_err());
    }
}
