//! Sparse elimination over `F_p` for word-size primes.
//!
//! Each round picks a set of pivots whose rows can be permuted to triangular
//! form: first the leftmost entry of each row (keeping the sparsest row per
//! column), then rows that own a column no pivot row touches. Remaining rows
//! are reduced against the pivots by a sparse triangular solve, giving the
//! Schur complement on the non-pivot columns, and the process repeats. Once
//! the active block is narrow or dense it is finished by an incremental
//! reduced echelon basis.
//!
//! The recorded layers give a normal form for arbitrary vectors modulo the
//! row span, which is what the quotient computations use.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::primes::{is_prime, pow_mod};
use crate::linalg::sparse::SparseMatrix;

/// Sparse row over `F_p`: sorted `(column, value)` with nonzero values.
pub type ModRow = Vec<(u32, u32)>;

const NONE: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EliminationConfig {
    /// Switch to dense elimination once at most this many columns remain.
    pub dense_max_cols: usize,
    /// Switch to dense elimination above this fill ratio.
    pub dense_density: f64,
}

impl Default for EliminationConfig {
    fn default() -> Self {
        EliminationConfig { dense_max_cols: 5000, dense_density: 0.2 }
    }
}

#[inline]
fn mulm(a: u32, b: u32, p: u32) -> u32 {
    ((a as u64 * b as u64) % p as u64) as u32
}

#[inline]
fn addm(a: u32, b: u32, p: u32) -> u32 {
    let s = a as u64 + b as u64;
    (if s >= p as u64 { s - p as u64 } else { s }) as u32
}

pub fn inv_mod(a: u32, p: u32) -> u32 {
    debug_assert!(a % p != 0);
    pow_mod(a as u64, p as u64 - 2, p as u64) as u32
}

/// Reduces an integer row mod `p`, dropping zeros.
pub fn row_mod_p(cols: &[u32], vals: &[i32], p: u32) -> ModRow {
    cols.iter()
        .zip(vals)
        .filter_map(|(&c, &v)| {
            let x = (v as i64).rem_euclid(p as i64) as u32;
            (x != 0).then_some((c, x))
        })
        .collect()
}

/// Reduces an `i64` sparse vector mod `p`.
pub fn vec_mod_p(entries: impl IntoIterator<Item = (usize, i64)>, p: u32) -> ModRow {
    let mut out: ModRow = entries
        .into_iter()
        .filter_map(|(c, v)| {
            let x = v.rem_euclid(p as i64) as u32;
            (x != 0).then_some((c as u32, x))
        })
        .collect();
    out.sort_unstable_by_key(|e| e.0);
    out
}

fn check_prime(p: u32) -> Result<()> {
    if !is_prime(p as u64) {
        return Err(Error::NotPrime(p as u64));
    }
    Ok(())
}

/// One round of triangular pivots, stored in solve order.
#[derive(Clone, Debug)]
struct Layer {
    ncols: usize,
    /// Pivot rows scaled to have 1 at the pivot, in solve order.
    rows: Vec<ModRow>,
    pivcol: Vec<u32>,
    /// Column -> solve position, or NONE.
    priority: Vec<u32>,
    /// Column -> index in the next round's columns, or NONE for pivots.
    next: Vec<u32>,
    next_ncols: usize,
}

struct Workspace {
    acc: Vec<u32>,
    mark: Vec<bool>,
    touched: Vec<u32>,
    heap: BinaryHeap<Reverse<u32>>,
    queued: Vec<bool>,
}

impl Workspace {
    fn new(ncols: usize, npiv: usize) -> Self {
        Workspace { acc: vec![0; ncols], mark: vec![false; ncols], touched: Vec::new(), heap: BinaryHeap::new(), queued: vec![false; npiv] }
    }
}

impl Layer {
    fn build(rows: &[ModRow], ncols: usize, p: u32) -> (Layer, Vec<usize>) {
        // leftmost entries, sparsest row per column
        let mut best = vec![NONE; ncols];
        for (i, r) in rows.iter().enumerate() {
            let c = r[0].0 as usize;
            if best[c] == NONE || rows[best[c] as usize].len() > r.len() {
                best[c] = i as u32;
            }
        }
        let mut is_pivot_row = vec![false; rows.len()];
        let mut has_pivot = vec![false; ncols];
        let mut touched = vec![false; ncols];
        let mut fl: Vec<(u32, usize)> = Vec::new();
        for c in 0..ncols {
            if best[c] != NONE {
                let i = best[c] as usize;
                is_pivot_row[i] = true;
                has_pivot[c] = true;
                fl.push((c as u32, i));
                for &(cc, _) in &rows[i] {
                    touched[cc as usize] = true;
                }
            }
        }
        // rows owning a column untouched by every pivot row so far
        let mut cand: Vec<usize> = (0..rows.len()).filter(|&i| !is_pivot_row[i]).collect();
        cand.sort_by_key(|&i| (rows[i].len(), i));
        let mut greedy: Vec<(u32, usize)> = Vec::new();
        for i in cand {
            if let Some(&(c, _)) = rows[i].iter().find(|&&(c, _)| !has_pivot[c as usize] && !touched[c as usize]) {
                is_pivot_row[i] = true;
                has_pivot[c as usize] = true;
                for &(cc, _) in &rows[i] {
                    touched[cc as usize] = true;
                }
                greedy.push((c, i));
            }
        }
        // newest greedy pivots first, then the leftmost pivots by column
        let order: Vec<(u32, usize)> = greedy.into_iter().rev().chain(fl).collect();
        let mut priority = vec![NONE; ncols];
        let mut prow = Vec::with_capacity(order.len());
        let mut pivcol = Vec::with_capacity(order.len());
        for (q, &(c, i)) in order.iter().enumerate() {
            priority[c as usize] = q as u32;
            let r = &rows[i];
            let pv = r.iter().find(|e| e.0 == c).expect("pivot entry").1;
            let s = inv_mod(pv, p);
            prow.push(r.iter().map(|&(cc, v)| (cc, mulm(v, s, p))).collect::<ModRow>());
            pivcol.push(c);
        }
        let mut next = vec![NONE; ncols];
        let mut k = 0u32;
        for c in 0..ncols {
            if priority[c] == NONE {
                next[c] = k;
                k += 1;
            }
        }
        let rest: Vec<usize> = (0..rows.len()).filter(|&i| !is_pivot_row[i]).collect();
        (Layer { ncols, rows: prow, pivcol, priority, next, next_ncols: k as usize }, rest)
    }

    fn workspace(&self) -> Workspace {
        Workspace::new(self.ncols, self.rows.len())
    }

    /// Reduces `input` by the pivots; returns the residual in next-round
    /// coordinates, sorted.
    fn solve(&self, input: &[(u32, u32)], ws: &mut Workspace, p: u32) -> ModRow {
        for &(c, v) in input {
            self.add(c, v, ws, p);
        }
        while let Some(Reverse(q)) = ws.heap.pop() {
            ws.queued[q as usize] = false;
            let c = self.pivcol[q as usize] as usize;
            let x = ws.acc[c];
            if x == 0 {
                continue;
            }
            let neg = p - x;
            for &(cc, v) in &self.rows[q as usize] {
                self.add(cc, mulm(neg, v, p), ws, p);
            }
        }
        let mut out = ModRow::new();
        for &c in &ws.touched {
            let c = c as usize;
            if self.priority[c] == NONE && ws.acc[c] != 0 {
                out.push((self.next[c], ws.acc[c]));
            }
            ws.acc[c] = 0;
            ws.mark[c] = false;
        }
        ws.touched.clear();
        out.sort_unstable_by_key(|e| e.0);
        out
    }

    #[inline]
    fn add(&self, c: u32, v: u32, ws: &mut Workspace, p: u32) {
        let ci = c as usize;
        if !ws.mark[ci] {
            ws.mark[ci] = true;
            ws.touched.push(c);
            ws.acc[ci] = v;
        } else {
            ws.acc[ci] = addm(ws.acc[ci], v, p);
        }
        let q = self.priority[ci];
        if q != NONE && !ws.queued[q as usize] {
            ws.queued[q as usize] = true;
            ws.heap.push(Reverse(q));
        }
    }
}

/// Incremental basis in reduced row echelon form, for narrow blocks.
#[derive(Clone, Debug)]
pub struct DenseBasis {
    p: u32,
    ncols: usize,
    /// Column -> basis row with that pivot, or NONE.
    piv: Vec<u32>,
    rows: Vec<Vec<u32>>,
    free: Vec<u32>,
}

impl DenseBasis {
    pub fn new(ncols: usize, p: u32) -> Self {
        DenseBasis { p, ncols, piv: vec![NONE; ncols], rows: Vec::new(), free: (0..ncols as u32).collect() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_full(&self) -> bool {
        self.free.is_empty()
    }

    /// Free (non-pivot) columns, ascending.
    pub fn free_columns(&self) -> &[u32] {
        &self.free
    }

    /// Residual of a sparse vector on the free columns.
    pub fn residual(&self, v: &[(u32, u32)]) -> Vec<u32> {
        let p = self.p;
        let mut w = vec![0u32; self.free.len()];
        let mut pos = 0;
        for &(c, x) in v {
            while pos < self.free.len() && self.free[pos] < c {
                pos += 1;
            }
            if pos < self.free.len() && self.free[pos] == c {
                w[pos] = addm(w[pos], x, p);
            }
        }
        for &(c, x) in v {
            let b = self.piv[c as usize];
            if b == NONE {
                continue;
            }
            let row = &self.rows[b as usize];
            let neg = p - x;
            for (k, &f) in self.free.iter().enumerate() {
                let y = row[f as usize];
                if y != 0 {
                    w[k] = addm(w[k], mulm(neg, y, p), p);
                }
            }
        }
        w
    }

    /// Adds a vector; returns whether the rank grew.
    pub fn insert(&mut self, v: &[(u32, u32)]) -> bool {
        let w = self.residual(v);
        self.insert_residual(w)
    }

    fn insert_residual(&mut self, mut w: Vec<u32>) -> bool {
        let p = self.p;
        let Some(k0) = w.iter().position(|&x| x != 0) else { return false };
        let f0 = self.free[k0] as usize;
        let s = inv_mod(w[k0], p);
        for x in w.iter_mut() {
            *x = mulm(*x, s, p);
        }
        for row in self.rows.iter_mut() {
            let y = row[f0];
            if y == 0 {
                continue;
            }
            let neg = p - y;
            for (k, &f) in self.free.iter().enumerate() {
                if w[k] != 0 {
                    row[f as usize] = addm(row[f as usize], mulm(neg, w[k], p), p);
                }
            }
        }
        let mut u = vec![0u32; self.ncols];
        for (k, &f) in self.free.iter().enumerate() {
            u[f as usize] = w[k];
        }
        self.piv[f0] = self.rows.len() as u32;
        self.rows.push(u);
        self.free.remove(k0);
        true
    }
}

/// Complete elimination of a matrix over `F_p`, kept for normal forms.
#[derive(Clone, Debug)]
pub struct Elimination {
    p: u32,
    ncols: usize,
    layers: Vec<Layer>,
    dense: DenseBasis,
    rank: usize,
    free_orig: Vec<u32>,
}

impl Elimination {
    pub fn new(m: &SparseMatrix, p: u32) -> Result<Self> {
        Self::with_config(m, p, &EliminationConfig::default())
    }

    pub fn with_config(m: &SparseMatrix, p: u32, cfg: &EliminationConfig) -> Result<Self> {
        check_prime(p)?;
        let rows: Vec<ModRow> = m.rows().map(|(c, v)| row_mod_p(c, v, p)).filter(|r| !r.is_empty()).collect();
        Ok(Self::from_mod_rows(rows, m.ncols(), p, cfg))
    }

    /// Runs the elimination on rows already reduced mod `p` (sorted, no zeros).
    pub fn from_mod_rows(mut rows: Vec<ModRow>, ncols: usize, p: u32, cfg: &EliminationConfig) -> Self {
        rows.retain(|r| !r.is_empty());
        let mut layers = Vec::new();
        let mut width = ncols;
        let mut rank = 0;
        loop {
            let nnz: usize = rows.iter().map(|r| r.len()).sum();
            let dense_enough = !rows.is_empty() && nnz as f64 > cfg.dense_density * rows.len() as f64 * width as f64;
            if rows.is_empty() || width <= cfg.dense_max_cols || dense_enough {
                break;
            }
            let (layer, rest) = Layer::build(&rows, width, p);
            rank += layer.rows.len();
            let mut schur: Vec<ModRow> = rest
                .par_iter()
                .map_init(|| layer.workspace(), |ws, &i| layer.solve(&rows[i], ws, p))
                .filter(|r| !r.is_empty())
                .map(|mut r| {
                    let s = inv_mod(r[0].1, p);
                    for e in r.iter_mut() {
                        e.1 = mulm(e.1, s, p);
                    }
                    r
                })
                .collect();
            schur.sort_unstable();
            schur.dedup();
            width = layer.next_ncols;
            layers.push(layer);
            rows = schur;
        }
        let mut dense = DenseBasis::new(width, p);
        // shortest rows first keeps the early residuals cheap
        rows.sort_by_key(|r| r.len());
        for r in &rows {
            if dense.is_full() {
                break;
            }
            dense.insert(r);
        }
        rank += dense.rank();
        let mut free_orig: Vec<u32> = dense.free_columns().to_vec();
        for layer in layers.iter().rev() {
            let mut back = vec![NONE; layer.next_ncols];
            for (c, &nx) in layer.next.iter().enumerate() {
                if nx != NONE {
                    back[nx as usize] = c as u32;
                }
            }
            for f in free_orig.iter_mut() {
                *f = back[*f as usize];
            }
        }
        Elimination { p, ncols, layers, dense, rank, free_orig }
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Dimension of the quotient `F_p^ncols / rowspan`.
    pub fn quotient_dim(&self) -> usize {
        self.ncols - self.rank
    }

    /// Columns whose images form a basis of the quotient, ascending.
    pub fn free_columns(&self) -> &[u32] {
        &self.free_orig
    }

    /// Number of sparse rounds before the dense finish.
    pub fn rounds(&self) -> usize {
        self.layers.len()
    }

    /// Coordinates of `v` (sorted sparse, values mod p) in the quotient basis.
    pub fn reduce(&self, v: &[(u32, u32)]) -> Vec<u32> {
        let mut cur: ModRow = v.to_vec();
        for layer in &self.layers {
            let mut ws = layer.workspace();
            cur = layer.solve(&cur, &mut ws, self.p);
        }
        self.dense.residual(&cur)
    }

    /// Batch version of [`Elimination::reduce`].
    pub fn reduce_many(&self, vs: &[ModRow]) -> Vec<Vec<u32>> {
        let mut cur: Vec<ModRow> = vs.to_vec();
        for layer in &self.layers {
            cur = cur.par_iter().map_init(|| layer.workspace(), |ws, v| layer.solve(v, ws, self.p)).collect();
        }
        cur.iter().map(|v| self.dense.residual(v)).collect()
    }

    /// Whether `v` lies in the row span.
    pub fn contains(&self, v: &[(u32, u32)]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }
}

/// Rank of an integer matrix over `F_p`.
pub fn rank_mod_p(m: &SparseMatrix, p: u32) -> Result<usize> {
    Ok(Elimination::new(m, p)?.rank())
}

pub fn rank_mod_p_with(m: &SparseMatrix, p: u32, cfg: &EliminationConfig) -> Result<usize> {
    Ok(Elimination::with_config(m, p, cfg)?.rank())
}

/// Textbook dense Gaussian elimination, kept as a reference.
pub fn dense_rank_mod_p(m: &[Vec<i64>], p: u32) -> usize {
    let mut a: Vec<Vec<u32>> = m.iter().map(|r| r.iter().map(|&x| x.rem_euclid(p as i64) as u32).collect()).collect();
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows).find(|&i| a[i][c] != 0) else { continue };
        a.swap(rank, piv);
        let s = inv_mod(a[rank][c], p);
        for x in a[rank].iter_mut() {
            *x = mulm(*x, s, p);
        }
        for i in 0..rows {
            if i != rank && a[i][c] != 0 {
                let f = p - a[i][c];
                for j in 0..cols {
                    let t = mulm(f, a[rank][j], p);
                    a[i][j] = addm(a[i][j], t, p);
                }
            }
        }
        rank += 1;
    }
    rank
}
