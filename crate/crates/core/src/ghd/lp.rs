//! Dense tableau simplex with Bland's rule, generic over the scalar type.
//!
//! Solves `max c·y  s.t.  A y ≤ b, y ≥ 0` with `b ≥ 0`, so the origin is a
//! starting vertex and no phase one is needed. The fractional edge cover
//! program is solved through its dual in this form.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed, Zero};

use crate::error::{AjarError, Result};
use crate::value::AttrSet;

/// Scalars the simplex can run on. Exact types use a zero tolerance.
pub trait LpScalar: Clone + PartialOrd + Debug + Num + Signed {
    fn tolerance() -> Self;
    fn from_count(n: usize) -> Self;
}

impl LpScalar for f64 {
    fn tolerance() -> Self {
        1e-9
    }

    fn from_count(n: usize) -> Self {
        n as f64
    }
}

impl LpScalar for f32 {
    fn tolerance() -> Self {
        1e-5
    }

    fn from_count(n: usize) -> Self {
        n as f32
    }
}

impl LpScalar for BigRational {
    fn tolerance() -> Self {
        BigRational::zero()
    }

    fn from_count(n: usize) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution<T> {
    pub value: T,
    /// Optimal `y`.
    pub primal: Vec<T>,
    /// Optimal multipliers of the `A y ≤ b` rows.
    pub dual: Vec<T>,
}

/// `max c·y` subject to `A y ≤ b`, `y ≥ 0`. Requires `b ≥ 0`.
pub fn maximize<T: LpScalar>(a: &[Vec<T>], b: &[T], c: &[T]) -> Result<LpSolution<T>> {
    let m = a.len();
    let n = c.len();
    let tol = T::tolerance();
    if b.len() != m || a.iter().any(|r| r.len() != n) {
        return Err(AjarError::Internal("simplex input dimensions disagree".into()));
    }
    if b.iter().any(|x| *x < -tol.clone()) {
        return Err(AjarError::Internal("simplex needs a non-negative right-hand side".into()));
    }
    let width = n + m + 1;
    let mut t: Vec<Vec<T>> = Vec::with_capacity(m + 1);
    for i in 0..m {
        let mut row = vec![T::zero(); width];
        row[..n].clone_from_slice(&a[i]);
        row[n + i] = T::one();
        row[width - 1] = b[i].clone();
        t.push(row);
    }
    let mut z = vec![T::zero(); width];
    for j in 0..n {
        z[j] = -c[j].clone();
    }
    t.push(z);
    let mut basis: Vec<usize> = (n..n + m).collect();

    loop {
        let Some(enter) = (0..n + m).find(|&j| t[m][j] < -tol.clone()) else { break };
        let mut leave: Option<(usize, T)> = None;
        for i in 0..m {
            if t[i][enter] > tol {
                let ratio = t[i][width - 1].clone() / t[i][enter].clone();
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => {
                        ratio < lr.clone() - tol.clone()
                            || (!(ratio > lr.clone() + tol.clone()) && basis[i] < basis[*li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((r, _)) = leave else {
            return Err(AjarError::Decomposition("linear program is unbounded".into()));
        };
        let piv = t[r][enter].clone();
        for x in t[r].iter_mut() {
            *x = x.clone() / piv.clone();
        }
        let pivot_row = t[r].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[enter].clone();
            if f.is_zero() {
                continue;
            }
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                *x = x.clone() - f.clone() * p.clone();
            }
        }
        basis[r] = enter;
    }

    let mut primal = vec![T::zero(); n];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < n {
            primal[bv] = t[i][width - 1].clone();
        }
    }
    let dual = (0..m).map(|i| t[m][n + i].clone()).collect();
    Ok(LpSolution { value: t[m][width - 1].clone(), primal, dual })
}

/// Optimal fractional edge cover of `bag`: weights per edge (aligned with
/// `edges`) and the total cost `Σ x_F · costs[F]`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverSolution<T> {
    pub value: T,
    pub weights: Vec<T>,
}

/// `min Σ c_F x_F` s.t. every attribute of `bag` is covered with total
/// weight at least one, `x ≥ 0`. Solved through the packing dual.
pub fn fractional_edge_cover<T: LpScalar>(
    bag: &AttrSet,
    edges: &[AttrSet],
    costs: &[T],
) -> Result<CoverSolution<T>> {
    if bag.is_empty() {
        return Ok(CoverSolution { value: T::zero(), weights: vec![T::zero(); edges.len()] });
    }
    for a in bag {
        if !edges.iter().any(|e| e.contains(a)) {
            return Err(AjarError::Decomposition(format!("attribute {a} lies in no edge")));
        }
    }
    let attrs: Vec<_> = bag.iter().collect();
    let rows: Vec<usize> = (0..edges.len())
        .filter(|&f| attrs.iter().any(|a| edges[f].contains(*a)))
        .collect();
    let a: Vec<Vec<T>> = rows
        .iter()
        .map(|&f| {
            attrs
                .iter()
                .map(|x| if edges[f].contains(*x) { T::one() } else { T::zero() })
                .collect()
        })
        .collect();
    let b: Vec<T> = rows.iter().map(|&f| costs[f].clone()).collect();
    let c = vec![T::one(); attrs.len()];
    let sol = maximize(&a, &b, &c)?;
    let mut weights = vec![T::zero(); edges.len()];
    for (k, &f) in rows.iter().enumerate() {
        weights[f] = sol.dual[k].clone();
    }
    Ok(CoverSolution { value: sol.value, weights })
}
