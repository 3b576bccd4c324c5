//! Smith normal form of sparse integer matrices.
//!
//! Unit pivots are eliminated in place on machine integers, picking the pivot
//! with the smallest fill estimate. Whatever is left is copied into a dense
//! arbitrary-precision matrix and finished there.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeSet;

/// Sparse matrix stored by columns; each column is a list of `(row, value)`.
#[derive(Clone, Debug, Default)]
pub struct SparseMatrix {
    pub rows: usize,
    pub cols: Vec<Vec<(u32, i64)>>,
}

impl SparseMatrix {
    pub fn new(rows: usize) -> Self {
        SparseMatrix { rows, cols: Vec::new() }
    }

    pub fn push_col(&mut self, mut col: Vec<(u32, i64)>) {
        col.sort_unstable_by_key(|e| e.0);
        let mut merged: Vec<(u32, i64)> = Vec::with_capacity(col.len());
        for (r, v) in col {
            match merged.last_mut() {
                Some(last) if last.0 == r => last.1 += v,
                _ => merged.push((r, v)),
            }
        }
        merged.retain(|e| e.1 != 0);
        self.cols.push(merged);
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(|c| c.len()).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithForm {
    pub rank: usize,
    /// Invariant factors greater than one, in divisibility order.
    pub torsion: Vec<BigInt>,
}

/// Dense fallback is refused above this many entries.
pub const DENSE_LIMIT: usize = 4_000_000;

#[derive(Debug)]
pub struct TooLarge {
    pub rows: usize,
    pub cols: usize,
}

pub fn smith_form(m: &SparseMatrix) -> Result<SmithForm, TooLarge> {
    // row-major working copy
    let mut rows: Vec<Vec<(u32, i64)>> = vec![Vec::new(); m.rows];
    for (c, col) in m.cols.iter().enumerate() {
        for &(r, v) in col {
            rows[r as usize].push((c as u32, v));
        }
    }
    let mut col_rows: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); m.cols.len()];
    for (r, row) in rows.iter().enumerate() {
        for &(c, _) in row {
            col_rows[c as usize].insert(r as u32);
        }
    }
    let mut row_alive = vec![true; m.rows];
    let mut rank = 0usize;
    let mut overflowed = false;

    loop {
        // unit pivot minimising (row_len - 1) * (col_len - 1)
        let mut best: Option<(u64, u32, u32)> = None;
        for (r, row) in rows.iter().enumerate() {
            if !row_alive[r] || row.is_empty() {
                continue;
            }
            if matches!(best, Some((0, _, _))) {
                break;
            }
            let rl = row.len() as u64 - 1;
            for &(c, v) in row {
                if v.abs() == 1 {
                    let cost = rl * (col_rows[c as usize].len() as u64 - 1);
                    if best.map_or(true, |b| cost < b.0) {
                        best = Some((cost, r as u32, c));
                    }
                }
            }
        }
        let Some((_, pr, pc)) = best else { break };
        let pivot_row = std::mem::take(&mut rows[pr as usize]);
        let pv = pivot_row.iter().find(|e| e.0 == pc).unwrap().1;
        row_alive[pr as usize] = false;
        for &(c, _) in &pivot_row {
            col_rows[c as usize].remove(&pr);
        }
        let targets: Vec<u32> = col_rows[pc as usize].iter().copied().collect();
        for r in targets {
            let row = &mut rows[r as usize];
            let f = row.iter().find(|e| e.0 == pc).unwrap().1 * pv;
            // row -= f * pivot_row  (pv = ±1 so f * pv * pv = f)
            let mut out = Vec::with_capacity(row.len() + pivot_row.len());
            let (mut i, mut j) = (0, 0);
            while i < row.len() || j < pivot_row.len() {
                let take_row = j >= pivot_row.len() || (i < row.len() && row[i].0 < pivot_row[j].0);
                let take_piv = i >= row.len() || (j < pivot_row.len() && pivot_row[j].0 < row[i].0);
                if take_row {
                    out.push(row[i]);
                    i += 1;
                } else if take_piv {
                    let (c, v) = pivot_row[j];
                    match f.checked_mul(v).and_then(|x| x.checked_neg()) {
                        Some(x) => out.push((c, x)),
                        None => overflowed = true,
                    }
                    col_rows[c as usize].insert(r);
                    j += 1;
                } else {
                    let (c, v) = row[i];
                    match f.checked_mul(pivot_row[j].1).and_then(|x| v.checked_sub(x)) {
                        Some(0) => {
                            col_rows[c as usize].remove(&r);
                        }
                        Some(x) => out.push((c, x)),
                        None => overflowed = true,
                    }
                    i += 1;
                    j += 1;
                }
            }
            *row = out;
            if overflowed {
                break;
            }
        }
        if overflowed {
            // restart the whole computation in the dense exact path
            return dense_from(m);
        }
        col_rows[pc as usize].clear();
        rank += 1;
    }

    let rest_rows: Vec<usize> = (0..m.rows).filter(|&r| row_alive[r] && !rows[r].is_empty()).collect();
    if rest_rows.is_empty() {
        return Ok(SmithForm { rank, torsion: Vec::new() });
    }
    let rest_cols: Vec<u32> = {
        let set: BTreeSet<u32> = rest_rows.iter().flat_map(|&r| rows[r].iter().map(|e| e.0)).collect();
        set.into_iter().collect()
    };
    if rest_rows.len() * rest_cols.len() > DENSE_LIMIT {
        return Err(TooLarge { rows: rest_rows.len(), cols: rest_cols.len() });
    }
    let mut dense = vec![vec![BigInt::zero(); rest_cols.len()]; rest_rows.len()];
    for (i, &r) in rest_rows.iter().enumerate() {
        for &(c, v) in &rows[r] {
            let j = rest_cols.binary_search(&c).unwrap();
            dense[i][j] = BigInt::from(v);
        }
    }
    let diag = dense_smith(dense);
    let torsion = diag.iter().filter(|d| !d.is_one()).cloned().collect();
    Ok(SmithForm { rank: rank + diag.len(), torsion })
}

fn dense_from(m: &SparseMatrix) -> Result<SmithForm, TooLarge> {
    let cols = m.cols.len();
    if m.rows * cols > DENSE_LIMIT {
        return Err(TooLarge { rows: m.rows, cols });
    }
    let mut dense = vec![vec![BigInt::zero(); cols]; m.rows];
    for (c, col) in m.cols.iter().enumerate() {
        for &(r, v) in col {
            dense[r as usize][c] = BigInt::from(v);
        }
    }
    let diag = dense_smith(dense);
    Ok(SmithForm { rank: diag.len(), torsion: diag.into_iter().filter(|d| !d.is_one()).collect() })
}

/// Nonzero invariant factors of a dense matrix, all positive.
pub fn dense_smith(mut a: Vec<Vec<BigInt>>) -> Vec<BigInt> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut diag = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // smallest nonzero entry in the trailing block
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !a[i][j].is_zero() && best.map_or(true, |(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        a.swap(t, bi);
        for row in a.iter_mut() {
            row.swap(t, bj);
        }
        loop {
            let mut clean = true;
            for i in t + 1..rows {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = a[i][t].div_floor(&a[t][t]);
                for j in t..cols {
                    let x = &q * &a[t][j];
                    a[i][j] -= x;
                }
                if !a[i][t].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..cols {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = a[t][j].div_floor(&a[t][t]);
                for i in t..rows {
                    let x = &q * &a[i][t];
                    a[i][j] -= x;
                }
                if !a[t][j].is_zero() {
                    clean = false;
                }
            }
            if clean {
                // divisibility of the trailing block
                let mut bad = None;
                'scan: for i in t + 1..rows {
                    for j in t + 1..cols {
                        if !(&a[i][j] % &a[t][t]).is_zero() {
                            bad = Some(i);
                            break 'scan;
                        }
                    }
                }
                match bad {
                    None => break,
                    Some(i) => {
                        for j in t..cols {
                            let x = a[i][j].clone();
                            a[t][j] += x;
                        }
                        continue;
                    }
                }
            }
            // move the smallest nonzero of row t / column t to the pivot
            let mut best = (t, t);
            for i in t..rows {
                if !a[i][t].is_zero() && a[i][t].abs() < a[best.0][best.1].abs() {
                    best = (i, t);
                }
            }
            for j in t..cols {
                if !a[t][j].is_zero() && a[t][j].abs() < a[best.0][best.1].abs() {
                    best = (t, j);
                }
            }
            if best.0 != t {
                a.swap(t, best.0);
            } else if best.1 != t {
                for row in a.iter_mut() {
                    row.swap(t, best.1);
                }
            }
        }
        diag.push(a[t][t].abs());
        t += 1;
    }
    diag
}

const P: u64 = 2_147_483_647;

fn modp(v: i64) -> u64 {
    v.rem_euclid(P as i64) as u64
}

fn inv_mod(a: u64) -> u64 {
    let mut r = 1u64;
    let mut b = a % P;
    let mut e = P - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % P;
        }
        b = b * b % P;
        e >>= 1;
    }
    r
}

/// Column echelon basis over the prime field `F_p`, `p = 2^31 - 1`.
#[derive(Clone, Debug, Default)]
pub struct ModPEchelon {
    /// Pivot row of each basis vector, and the vector normalised to 1 there.
    basis: Vec<(u32, Vec<(u32, u64)>)>,
    pivot_of_row: std::collections::HashMap<u32, usize>,
}

impl ModPEchelon {
    pub fn from_matrix(m: &SparseMatrix) -> Self {
        let mut e = ModPEchelon::default();
        for col in &m.cols {
            e.insert(col.iter().map(|&(r, v)| (r, modp(v))).collect());
        }
        e
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    fn reduce(&self, mut v: Vec<(u32, u64)>) -> Vec<(u32, u64)> {
        v.retain(|e| e.1 != 0);
        v.sort_unstable_by_key(|e| e.0);
        loop {
            let hit = v.iter().find_map(|&(r, x)| self.pivot_of_row.get(&r).map(|&b| (b, x)));
            let Some((b, x)) = hit else { return v };
            let (_, bv) = &self.basis[b];
            let mut acc: std::collections::BTreeMap<u32, u64> = v.into_iter().collect();
            for &(r, y) in bv {
                let cur = acc.entry(r).or_insert(0);
                *cur = (*cur + P - x * y % P) % P;
            }
            v = acc.into_iter().filter(|e| e.1 != 0).collect();
        }
    }

    fn insert(&mut self, v: Vec<(u32, u64)>) {
        let v = self.reduce(v);
        if let Some(&(r, x)) = v.first() {
            let inv = inv_mod(x);
            let v: Vec<(u32, u64)> = v.into_iter().map(|(i, y)| (i, y * inv % P)).collect();
            self.pivot_of_row.insert(r, self.basis.len());
            self.basis.push((r, v));
        }
    }

    pub fn push_integer(&mut self, v: &[(u32, i64)]) {
        self.insert(v.iter().map(|&(r, x)| (r, modp(x))).collect());
    }

    /// Whether the integer vector lies in the `F_p` span.
    pub fn contains(&self, v: &[(u32, i64)]) -> bool {
        self.reduce(v.iter().map(|&(r, x)| (r, modp(x))).collect()).is_empty()
    }
}
