//! Smith normal form over ℤ.
//!
//! Boundary matrices are first reduced by sparse elimination on unit pivots (checked `i64`,
//! redone in big integers on overflow); the residual block goes through a dense big-integer
//! Smith normal form.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Column-sparse integer matrix: `cols[j]` maps row index to a nonzero entry.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SparseMatrix {
    pub rows: usize,
    pub cols: Vec<BTreeMap<usize, i64>>,
}

impl SparseMatrix {
    pub fn new(rows: usize, ncols: usize) -> Self {
        SparseMatrix {
            rows,
            cols: vec![BTreeMap::new(); ncols],
        }
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(|c| c.len()).sum()
    }

    pub fn to_dense(&self) -> Vec<Vec<BigInt>> {
        let mut out = vec![vec![BigInt::zero(); self.cols.len()]; self.rows];
        for (j, col) in self.cols.iter().enumerate() {
            for (&i, &x) in col {
                out[i][j] = BigInt::from(x);
            }
        }
        out
    }
}

/// Rank and invariant factors (all nonzero diagonal entries, ascending under divisibility).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Invariants {
    pub rank: usize,
    pub factors: Vec<BigInt>,
}

impl Invariants {
    /// Invariant factors greater than one.
    pub fn torsion(&self) -> Vec<u64> {
        self.factors
            .iter()
            .filter(|d| !d.is_one())
            .map(|d| d.to_u64().unwrap_or(u64::MAX))
            .collect()
    }
}

trait Entry: Clone + PartialEq + std::fmt::Debug {
    fn nil() -> Self;
    fn is_nil(&self) -> bool;
    fn is_unit(&self) -> bool;
    fn neg(&self) -> Self;
    fn checked_mul_add(&self, c: &Self, x: &Self) -> Option<Self>;
    fn into_big(self) -> BigInt;
}

impl Entry for i64 {
    fn nil() -> Self {
        0
    }
    fn is_nil(&self) -> bool {
        *self == 0
    }
    fn is_unit(&self) -> bool {
        *self == 1 || *self == -1
    }
    fn neg(&self) -> Self {
        -*self
    }
    /// `self + c·x`
    fn checked_mul_add(&self, c: &Self, x: &Self) -> Option<Self> {
        c.checked_mul(*x).and_then(|p| self.checked_add(p))
    }
    fn into_big(self) -> BigInt {
        BigInt::from(self)
    }
}

impl Entry for BigInt {
    fn nil() -> Self {
        Zero::zero()
    }
    fn is_nil(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_unit(&self) -> bool {
        self.abs().is_one()
    }
    fn neg(&self) -> Self {
        -self.clone()
    }
    fn checked_mul_add(&self, c: &Self, x: &Self) -> Option<Self> {
        Some(self + c * x)
    }
    fn into_big(self) -> BigInt {
        self
    }
}

struct Overflow;

/// Eliminates unit pivots in place. Returns the number of pivots and the residual
/// (nonzero) block.
fn eliminate_units<T: Entry>(
    rows: usize,
    cols: Vec<BTreeMap<usize, T>>,
) -> Result<(usize, Vec<BTreeMap<usize, T>>), Overflow> {
    let mut cols: Vec<BTreeMap<usize, T>> = cols;
    let mut row_index: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); rows];
    for (j, col) in cols.iter().enumerate() {
        for i in col.keys() {
            row_index[*i].insert(j);
        }
    }
    let mut alive: BTreeSet<usize> = (0..cols.len()).filter(|j| !cols[*j].is_empty()).collect();
    let mut pivots = 0;
    loop {
        // cheapest unit pivot by Markowitz count
        let mut best: Option<(usize, usize, usize)> = None;
        for &j in &alive {
            let cl = cols[j].len();
            for (i, x) in &cols[j] {
                if x.is_unit() {
                    let cost = (cl - 1) * (row_index[*i].len() - 1);
                    if best.is_none_or(|b| cost < b.0) {
                        best = Some((cost, *i, j));
                        if cost == 0 {
                            break;
                        }
                    }
                }
            }
            if best.is_some_and(|b| b.0 == 0) {
                break;
            }
        }
        let Some((_, pi, pj)) = best else { break };
        pivots += 1;
        let pivot_col = std::mem::take(&mut cols[pj]);
        alive.remove(&pj);
        for i in pivot_col.keys() {
            row_index[*i].remove(&pj);
        }
        let p = pivot_col[&pi].clone();
        // clear row pi in every other column by column operations: col_j -= (a/p)·pivot_col
        let others: Vec<usize> = row_index[pi].iter().copied().collect();
        for j in others {
            let a = cols[j][&pi].clone();
            // p is ±1, so a/p = a·p
            let factor = mul_unit(&a, &p).neg();
            for (i, x) in &pivot_col {
                let cur = cols[j].get(i).cloned().unwrap_or_else(T::nil);
                let next = cur.checked_mul_add(&factor, x).ok_or(Overflow)?;
                if next.is_nil() {
                    if cols[j].remove(i).is_some() {
                        row_index[*i].remove(&j);
                    }
                } else {
                    if !cols[j].contains_key(i) {
                        row_index[*i].insert(j);
                    }
                    cols[j].insert(*i, next);
                }
            }
            if cols[j].is_empty() {
                alive.remove(&j);
            }
        }
        debug_assert!(row_index[pi].is_empty());
    }
    let residual = alive.into_iter().map(|j| std::mem::take(&mut cols[j])).collect();
    Ok((pivots, residual))
}

fn mul_unit<T: Entry>(a: &T, p: &T) -> T {
    if p.is_unit() && p.clone().into_big().is_negative() {
        a.neg()
    } else {
        a.clone()
    }
}

pub fn invariants(m: &SparseMatrix) -> Invariants {
    let (pivots, residual_big) = match eliminate_units::<i64>(m.rows, m.cols.clone()) {
        Ok((p, res)) => (
            p,
            res.into_iter()
                .map(|c| c.into_iter().map(|(i, x)| (i, BigInt::from(x))).collect())
                .collect::<Vec<BTreeMap<usize, BigInt>>>(),
        ),
        Err(Overflow) => {
            let big: Vec<BTreeMap<usize, BigInt>> = m
                .cols
                .iter()
                .map(|c| c.iter().map(|(i, x)| (*i, BigInt::from(*x))).collect())
                .collect();
            match eliminate_units::<BigInt>(m.rows, big) {
                Ok(r) => r,
                Err(Overflow) => unreachable!("big integers do not overflow"),
            }
        }
    };
    let mut factors: Vec<BigInt> = vec![BigInt::one(); pivots];
    if !residual_big.is_empty() {
        let used_rows: BTreeSet<usize> = residual_big.iter().flat_map(|c| c.keys().copied()).collect();
        let pos: BTreeMap<usize, usize> = used_rows.iter().enumerate().map(|(k, i)| (*i, k)).collect();
        let mut dense = vec![vec![BigInt::zero(); residual_big.len()]; used_rows.len()];
        for (j, col) in residual_big.into_iter().enumerate() {
            for (i, x) in col {
                dense[pos[&i]][j] = x;
            }
        }
        let snf = smith_normal_form(dense, false);
        factors.extend(snf.diagonal.into_iter().filter(|d| !Zero::is_zero(d)));
    }
    factors.sort_by(|a, b| a.abs().cmp(&b.abs()));
    Invariants {
        rank: factors.len(),
        factors,
    }
}

#[derive(Clone, Debug)]
pub struct Snf {
    /// Diagonal entries `d_0 | d_1 | …` (nonnegative), length `min(rows, cols)`.
    pub diagonal: Vec<BigInt>,
    /// Unimodular transforms with `u · a · v = diag`; empty unless requested.
    pub u: Vec<Vec<BigInt>>,
    pub v: Vec<Vec<BigInt>>,
}

fn identity(n: usize) -> Vec<Vec<BigInt>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}

/// Dense Smith normal form with optional transforms.
pub fn smith_normal_form(mut a: Vec<Vec<BigInt>>, track: bool) -> Snf {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut u = if track { identity(rows) } else { Vec::new() };
    let mut v = if track { identity(cols) } else { Vec::new() };
    let row_axpy = |m: &mut Vec<Vec<BigInt>>, dst: usize, c: &BigInt, src: usize| {
        let s = m[src].clone();
        for (x, y) in m[dst].iter_mut().zip(&s) {
            *x += c * y;
        }
    };
    let col_axpy = |m: &mut Vec<Vec<BigInt>>, dst: usize, c: &BigInt, src: usize| {
        for r in m.iter_mut() {
            let y = r[src].clone();
            r[dst] += c * y;
        }
    };
    let col_swap = |m: &mut Vec<Vec<BigInt>>, a: usize, b: usize| {
        for r in m.iter_mut() {
            r.swap(a, b);
        }
    };
    for t in 0..rows.min(cols) {
        loop {
            // smallest nonzero entry in the trailing block
            let mut best: Option<(BigInt, usize, usize)> = None;
            for (i, row) in a.iter().enumerate().skip(t) {
                for (j, x) in row.iter().enumerate().skip(t) {
                    if !Zero::is_zero(x) && best.as_ref().is_none_or(|b| x.abs() < b.0) {
                        best = Some((x.abs(), i, j));
                    }
                }
            }
            let Some((_, pi, pj)) = best else {
                return finish(a, u, v, rows, cols);
            };
            a.swap(t, pi);
            if track {
                u.swap(t, pi);
            }
            col_swap(&mut a, t, pj);
            if track {
                col_swap(&mut v, t, pj);
            }
            let mut dirty = false;
            for i in t + 1..rows {
                if !Zero::is_zero(&a[i][t]) {
                    let q = -a[i][t].div_floor(&a[t][t]);
                    row_axpy(&mut a, i, &q, t);
                    if track {
                        row_axpy(&mut u, i, &q, t);
                    }
                    dirty |= !Zero::is_zero(&a[i][t]);
                }
            }
            for j in t + 1..cols {
                if !Zero::is_zero(&a[t][j]) {
                    let q = -a[t][j].div_floor(&a[t][t]);
                    col_axpy(&mut a, j, &q, t);
                    if track {
                        col_axpy(&mut v, j, &q, t);
                    }
                    dirty |= !Zero::is_zero(&a[t][j]);
                }
            }
            if dirty {
                continue;
            }
            // divisibility of the trailing block by the pivot
            let p = a[t][t].clone();
            let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !Zero::is_zero(&(&a[i][j] % &p))));
            match bad {
                Some(i) => {
                    let one = BigInt::one();
                    row_axpy(&mut a, t, &one, i);
                    if track {
                        row_axpy(&mut u, t, &one, i);
                    }
                }
                None => break,
            }
        }
        if a[t][t].is_negative() {
            for x in a[t].iter_mut() {
                *x = -x.clone();
            }
            if track {
                for x in u[t].iter_mut() {
                    *x = -x.clone();
                }
            }
        }
    }
    finish(a, u, v, rows, cols)
}

fn finish(a: Vec<Vec<BigInt>>, u: Vec<Vec<BigInt>>, v: Vec<Vec<BigInt>>, rows: usize, cols: usize) -> Snf {
    let diagonal = (0..rows.min(cols)).map(|i| a[i][i].abs()).collect();
    Snf { diagonal, u, v }
}

pub fn mat_mul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let inner = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).fold(BigInt::zero(), |acc, k| acc + &row[k] * &b[k][j]))
                .collect()
        })
        .collect()
}
