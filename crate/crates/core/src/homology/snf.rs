use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed};
use serde::Serialize;

use super::int::Int;

/// A sparse integer matrix in coordinate form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: BTreeMap<(usize, usize), i64>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, entries: BTreeMap::new() }
    }

    pub fn from_dense(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = IntMatrix::zeros(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged matrix");
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries.get(&(i, j)).copied().unwrap_or(0)
    }

    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        assert!(i < self.rows && j < self.cols, "index out of range");
        if v == 0 {
            self.entries.remove(&(i, j));
        } else {
            self.entries.insert((i, j), v);
        }
    }

    /// Nonzero entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, i64)> + '_ {
        self.entries.iter().map(|(&(i, j), &v)| (i, j, v))
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn to_dense(&self) -> Vec<Vec<i64>> {
        let mut out = vec![vec![0; self.cols]; self.rows];
        for (i, j, v) in self.entries() {
            out[i][j] = v;
        }
        out
    }

    /// Product `self * other` with arbitrary-precision accumulation; `None`
    /// if some entry of the product does not fit in an `i64`.
    pub fn mul(&self, other: &IntMatrix) -> Option<IntMatrix> {
        assert_eq!(self.cols, other.rows, "shape mismatch");
        let mut by_row: Vec<Vec<(usize, i64)>> = vec![Vec::new(); other.rows];
        for (i, j, v) in other.entries() {
            by_row[i].push((j, v));
        }
        let mut acc: BTreeMap<(usize, usize), i128> = BTreeMap::new();
        for (i, k, a) in self.entries() {
            for &(j, b) in &by_row[k] {
                *acc.entry((i, j)).or_insert(0) += a as i128 * b as i128;
            }
        }
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for ((i, j), v) in acc {
            out.set(i, j, i64::try_from(v).ok()?);
        }
        Some(out)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Invariant factors `d_1 | d_2 | .. | d_r` (all positive) and the rank `r`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SmithForm {
    #[serde(serialize_with = "crate::homology::serialize_bigints")]
    pub invariant_factors: Vec<BigInt>,
    pub rank: usize,
}

impl SmithForm {
    /// Factors greater than one (the torsion they contribute).
    pub fn torsion(&self) -> Vec<BigInt> {
        self.invariant_factors.iter().filter(|d| !d.is_one()).cloned().collect()
    }
}

/// Smith normal form by unimodular elimination.
///
/// Unit pivots are eliminated first on the sparse matrix (columns with the
/// fewest entries preferred); the small remainder is reduced densely with
/// minimal-absolute-value pivots and rounded quotients. Entries are promoted
/// to arbitrary precision on overflow.
pub fn smith_normal_form(m: &IntMatrix) -> SmithForm {
    let mut rows: Vec<BTreeMap<usize, Int>> = vec![BTreeMap::new(); m.rows];
    let mut cols: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); m.cols];
    for (i, j, v) in m.entries() {
        rows[i].insert(j, Int::from(v));
        cols[j].insert(i);
    }
    let mut units = 0usize;
    loop {
        let mut progress = false;
        let mut order: Vec<usize> = (0..m.rows).filter(|&r| !rows[r].is_empty()).collect();
        order.sort_by_key(|&r| (rows[r].len(), r));
        for p in order {
            let pivot_col = rows[p]
                .iter()
                .filter(|(_, v)| v.is_unit())
                .map(|(&c, _)| c)
                .min_by_key(|&c| (cols[c].len(), c));
            let Some(c) = pivot_col else { continue };
            eliminate_unit(&mut rows, &mut cols, p, c);
            units += 1;
            progress = true;
        }
        if !progress {
            break;
        }
    }

    let live_rows: Vec<usize> = (0..m.rows).filter(|&r| !rows[r].is_empty()).collect();
    let live_cols: Vec<usize> = (0..m.cols).filter(|&c| !cols[c].is_empty()).collect();
    let col_pos: BTreeMap<usize, usize> = live_cols.iter().enumerate().map(|(k, &c)| (c, k)).collect();
    let mut dense: Vec<Vec<Int>> = live_rows
        .iter()
        .map(|&r| {
            let mut row = vec![Int::Small(0); live_cols.len()];
            for (c, v) in &rows[r] {
                row[col_pos[c]] = v.clone();
            }
            row
        })
        .collect();
    let diag = dense_diagonalize(&mut dense);

    let mut chain: Vec<BigInt> = diag.into_iter().map(|d| d.to_big().abs()).collect();
    for i in 0..chain.len() {
        for j in i + 1..chain.len() {
            let g = chain[i].gcd(&chain[j]);
            let l = &chain[i] / &g * &chain[j];
            chain[i] = g;
            chain[j] = l;
        }
    }
    let mut invariant_factors = vec![BigInt::one(); units];
    invariant_factors.extend(chain);
    SmithForm { rank: invariant_factors.len(), invariant_factors }
}

fn eliminate_unit(rows: &mut [BTreeMap<usize, Int>], cols: &mut [BTreeSet<usize>], p: usize, c: usize) {
    let pivot = rows[p][&c].clone();
    let pivot_row: Vec<(usize, Int)> = rows[p].iter().map(|(&j, v)| (j, v.clone())).collect();
    let targets: Vec<usize> = cols[c].iter().copied().filter(|&r| r != p).collect();
    for r in targets {
        // row_r -= (a_rc / pivot) * row_p, and 1 / pivot = pivot for units
        let factor = Int::Small(0).sub_mul(&rows[r][&c], &pivot).neg();
        for (j, v) in &pivot_row {
            let cur = rows[r].get(j).cloned().unwrap_or(Int::Small(0));
            let new = cur.sub_mul(&factor, v);
            if new.is_zero() {
                rows[r].remove(j);
                cols[*j].remove(&r);
            } else {
                rows[r].insert(*j, new);
                cols[*j].insert(r);
            }
        }
    }
    for (j, _) in &pivot_row {
        cols[*j].remove(&p);
    }
    rows[p].clear();
}

/// Reduce a dense matrix to diagonal form; returns the nonzero diagonal.
fn dense_diagonalize(a: &mut [Vec<Int>]) -> Vec<Int> {
    let nr = a.len();
    let nc = a.first().map_or(0, |r| r.len());
    let mut diag = Vec::new();
    let mut t = 0;
    while t < nr.min(nc) {
        let Some((pi, pj)) = min_abs_entry(a, t) else { break };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let mut clean = true;
            for i in t + 1..nr {
                if !a[i][t].is_zero() {
                    let q = a[i][t].div_round(&a[t][t]);
                    for j in t..nc {
                        let v = a[i][j].sub_mul(&q, &a[t][j]);
                        a[i][j] = v;
                    }
                    if !a[i][t].is_zero() {
                        clean = false;
                    }
                }
            }
            for j in t + 1..nc {
                if !a[t][j].is_zero() {
                    let q = a[t][j].div_round(&a[t][t]);
                    for row in a.iter_mut().skip(t) {
                        let v = row[j].sub_mul(&q, &row[t]);
                        row[j] = v;
                    }
                    if !a[t][j].is_zero() {
                        clean = false;
                    }
                }
            }
            if clean {
                break;
            }
            // a smaller remainder now sits in row or column t; make it the pivot
            let mut best = (t, t);
            for i in t..nr {
                if !a[i][t].is_zero() && a[i][t].cmp_abs(&a[best.0][best.1]).is_lt() {
                    best = (i, t);
                }
            }
            for j in t..nc {
                if !a[t][j].is_zero() && a[t][j].cmp_abs(&a[best.0][best.1]).is_lt() {
                    best = (t, j);
                }
            }
            a.swap(t, best.0);
            for row in a.iter_mut() {
                row.swap(t, best.1);
            }
        }
        diag.push(a[t][t].clone());
        t += 1;
    }
    diag
}

fn min_abs_entry(a: &[Vec<Int>], t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for (i, row) in a.iter().enumerate().skip(t) {
        for (j, v) in row.iter().enumerate().skip(t) {
            if v.is_zero() {
                continue;
            }
            if best.map_or(true, |(bi, bj)| v.cmp_abs(&a[bi][bj]).is_lt()) {
                best = Some((i, j));
                if v.is_unit() {
                    return best;
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factors(rows: &[Vec<i64>]) -> Vec<i64> {
        let s = smith_normal_form(&IntMatrix::from_dense(rows));
        assert_eq!(s.rank, s.invariant_factors.len());
        s.invariant_factors.iter().map(|d| i64::try_from(d.clone()).unwrap()).collect()
    }

    #[test]
    fn small_examples() {
        assert_eq!(factors(&[vec![2]]), vec![2]);
        assert_eq!(factors(&[vec![1, 0], vec![0, 0]]), vec![1]);
        assert_eq!(factors(&[vec![2, 4], vec![6, 8]]), vec![2, 4]);
        assert_eq!(factors(&[vec![0, 0], vec![0, 0]]), Vec::<i64>::new());
        assert_eq!(factors(&[vec![2, 0], vec![0, 3]]), vec![1, 6]);
        assert_eq!(factors(&[vec![4, 0], vec![0, 6]]), vec![2, 12]);
    }

    #[test]
    fn large_entries_do_not_overflow() {
        let big = i64::MAX / 3;
        let f = smith_normal_form(&IntMatrix::from_dense(&[vec![big, big - 1], vec![big - 1, big - 2]]));
        // det = big*(big-2) - (big-1)^2 = -1
        assert_eq!(f.invariant_factors, vec![BigInt::one(), BigInt::one()]);
        let f = smith_normal_form(&IntMatrix::from_dense(&[vec![big, 0], vec![0, big - 1]]));
        let expect = BigInt::from(big) * BigInt::from(big - 1);
        assert_eq!(f.invariant_factors, vec![BigInt::one(), expect]);
    }
}
