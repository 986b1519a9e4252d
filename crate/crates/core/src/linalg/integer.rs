//! The finitely generated abelian group `Z^n / rowspan(M)`.
//!
//! Rows with a `±1` entry in an otherwise untouched column are used as
//! pivots in rounds, exactly as in the modular elimination: each such step
//! is an isomorphism `Z^n/<r, rest> ≅ Z^(n-1)/<rest reduced>`, so element
//! orders and torsion are preserved. What survives is put into Hermite
//! normal form with arbitrary-precision integers.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::smith::elementary_divisors;
use crate::linalg::sparse::SparseMatrix;
use crate::relations::SymbolVector;

const NONE: u32 = u32::MAX;

type ZRow = Vec<(u32, i64)>;

fn overflow() -> Error {
    Error::Unsupported("integer overflow during unit-pivot elimination".into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegerConfig {
    /// Largest `rows x cols` block allowed in the arbitrary-precision stage.
    pub dense_budget: usize,
}

impl Default for IntegerConfig {
    fn default() -> Self {
        IntegerConfig { dense_budget: 4_000_000 }
    }
}

/// Order of an element of a finitely generated abelian group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Order {
    Finite(BigInt),
    Infinite,
}

impl Order {
    pub fn is_one(&self) -> bool {
        matches!(self, Order::Finite(d) if d.is_one())
    }
}

impl std::fmt::Display for Order {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Order::Finite(d) => write!(f, "{d}"),
            Order::Infinite => f.write_str("infinity"),
        }
    }
}

#[derive(Clone, Debug)]
struct ZLayer {
    ncols: usize,
    /// Pivot rows with `+1` at the pivot, in solve order.
    rows: Vec<ZRow>,
    pivcol: Vec<u32>,
    priority: Vec<u32>,
    next: Vec<u32>,
    next_ncols: usize,
}

struct ZWorkspace {
    acc: Vec<i64>,
    mark: Vec<bool>,
    touched: Vec<u32>,
    heap: BinaryHeap<Reverse<u32>>,
    queued: Vec<bool>,
}

impl ZLayer {
    /// Greedy unit pivots; `None` if no row has a usable `±1` entry.
    fn build(rows: &[ZRow], ncols: usize) -> Option<(ZLayer, Vec<usize>)> {
        let mut order: Vec<usize> = (0..rows.len()).collect();
        order.sort_by_key(|&i| (rows[i].len(), i));
        let mut has_pivot = vec![false; ncols];
        let mut touched = vec![false; ncols];
        let mut is_pivot_row = vec![false; rows.len()];
        let mut picked: Vec<(u32, usize)> = Vec::new();
        for i in order {
            let found = rows[i].iter().find(|&&(c, v)| v.abs() == 1 && !has_pivot[c as usize] && !touched[c as usize]);
            if let Some(&(c, _)) = found {
                is_pivot_row[i] = true;
                has_pivot[c as usize] = true;
                for &(cc, _) in &rows[i] {
                    touched[cc as usize] = true;
                }
                picked.push((c, i));
            }
        }
        if picked.is_empty() {
            return None;
        }
        let mut priority = vec![NONE; ncols];
        let mut prow = Vec::with_capacity(picked.len());
        let mut pivcol = Vec::with_capacity(picked.len());
        for (q, &(c, i)) in picked.iter().rev().enumerate() {
            priority[c as usize] = q as u32;
            let r = &rows[i];
            let sign = r.iter().find(|e| e.0 == c).expect("pivot entry").1;
            prow.push(r.iter().map(|&(cc, v)| (cc, v * sign)).collect::<ZRow>());
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
        let rest = (0..rows.len()).filter(|&i| !is_pivot_row[i]).collect();
        Some((ZLayer { ncols, rows: prow, pivcol, priority, next, next_ncols: k as usize }, rest))
    }

    fn workspace(&self) -> ZWorkspace {
        ZWorkspace {
            acc: vec![0; self.ncols],
            mark: vec![false; self.ncols],
            touched: Vec::new(),
            heap: BinaryHeap::new(),
            queued: vec![false; self.rows.len()],
        }
    }

    fn solve(&self, input: &[(u32, i64)], ws: &mut ZWorkspace) -> Result<ZRow> {
        let mut result = Ok(());
        for &(c, v) in input {
            if let Err(e) = self.add(c, v, ws) {
                result = Err(e);
            }
        }
        while result.is_ok() {
            let Some(Reverse(q)) = ws.heap.pop() else { break };
            ws.queued[q as usize] = false;
            let x = ws.acc[self.pivcol[q as usize] as usize];
            if x == 0 {
                continue;
            }
            for &(cc, v) in &self.rows[q as usize] {
                let d = v.checked_mul(x).and_then(i64::checked_neg).ok_or_else(overflow);
                if let Err(e) = d.and_then(|d| self.add(cc, d, ws)) {
                    result = Err(e);
                    break;
                }
            }
        }
        let mut out = ZRow::new();
        for &c in &ws.touched {
            let c = c as usize;
            if self.priority[c] == NONE && ws.acc[c] != 0 {
                out.push((self.next[c], ws.acc[c]));
            }
            ws.acc[c] = 0;
            ws.mark[c] = false;
        }
        ws.touched.clear();
        ws.heap.clear();
        ws.queued.iter_mut().for_each(|q| *q = false);
        result?;
        out.sort_unstable_by_key(|e| e.0);
        Ok(out)
    }

    #[inline]
    fn add(&self, c: u32, v: i64, ws: &mut ZWorkspace) -> Result<()> {
        let ci = c as usize;
        if !ws.mark[ci] {
            ws.mark[ci] = true;
            ws.touched.push(c);
            ws.acc[ci] = v;
        } else {
            ws.acc[ci] = ws.acc[ci].checked_add(v).ok_or_else(overflow)?;
        }
        let q = self.priority[ci];
        if q != NONE && !ws.queued[q as usize] {
            ws.queued[q as usize] = true;
            ws.heap.push(Reverse(q));
        }
        Ok(())
    }
}

/// Row-style Hermite normal form built incrementally.
#[derive(Clone, Debug, Default)]
pub struct Hnf {
    width: usize,
    rows: Vec<Vec<BigInt>>,
    piv: Vec<usize>,
}

impl Hnf {
    pub fn new(width: usize) -> Self {
        Hnf { width, rows: Vec::new(), piv: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<BigInt>] {
        &self.rows
    }

    /// Adds a vector to the lattice; returns whether the basis changed.
    pub fn insert(&mut self, mut v: Vec<BigInt>) -> bool {
        debug_assert_eq!(v.len(), self.width);
        let mut changed = false;
        let mut from = 0;
        loop {
            let Some(lead) = (from..self.width).find(|&j| !v[j].is_zero()) else { break };
            let pos = self.piv.partition_point(|&c| c < lead);
            if pos < self.piv.len() && self.piv[pos] == lead {
                let a = self.rows[pos][lead].clone();
                let c = v[lead].clone();
                if c.is_multiple_of(&a) {
                    let q = &c / &a;
                    for (x, y) in v.iter_mut().zip(&self.rows[pos]).skip(lead) {
                        if !y.is_zero() {
                            *x -= &q * y;
                        }
                    }
                } else {
                    let eg = a.extended_gcd(&c);
                    let (g, s, t) = (eg.gcd, eg.x, eg.y);
                    let (ag, cg) = (&a / &g, &c / &g);
                    let b = &mut self.rows[pos];
                    for j in lead..self.width {
                        let (bj, vj) = (b[j].clone(), v[j].clone());
                        b[j] = &s * &bj + &t * &vj;
                        v[j] = &ag * &vj - &cg * &bj;
                    }
                    if b[lead].is_negative() {
                        b.iter_mut().for_each(|x| *x = -&*x);
                    }
                    changed = true;
                }
                from = lead + 1;
            } else {
                if v[lead].is_negative() {
                    v.iter_mut().for_each(|x| *x = -&*x);
                }
                self.rows.insert(pos, v);
                self.piv.insert(pos, lead);
                changed = true;
                break;
            }
        }
        if changed {
            self.reduce_above();
        }
        changed
    }

    /// Brings entries above each pivot into `[0, pivot)`.
    fn reduce_above(&mut self) {
        for j in 0..self.rows.len() {
            let pc = self.piv[j];
            let pv = self.rows[j][pc].clone();
            let (above, below) = self.rows.split_at_mut(j);
            let pj = &below[0];
            for r in above.iter_mut() {
                let q = r[pc].div_floor(&pv);
                if !q.is_zero() {
                    for (x, y) in r.iter_mut().zip(pj).skip(pc) {
                        if !y.is_zero() {
                            *x -= &q * y;
                        }
                    }
                }
            }
        }
    }

    /// Rational coordinates of `v` in the basis, or `None` if `v` is not in
    /// the rational span.
    pub fn solve(&self, v: &[BigInt]) -> Option<Vec<BigRational>> {
        let mut rem: Vec<BigRational> = v.iter().map(|x| BigRational::from_integer(x.clone())).collect();
        let mut x = Vec::with_capacity(self.rows.len());
        for (row, &pc) in self.rows.iter().zip(&self.piv) {
            let coef = &rem[pc] / BigRational::from_integer(row[pc].clone());
            if !coef.is_zero() {
                for (r, y) in rem.iter_mut().zip(row).skip(pc) {
                    if !y.is_zero() {
                        *r -= &coef * BigRational::from_integer(y.clone());
                    }
                }
            }
            x.push(coef);
        }
        rem.iter().all(|r| r.is_zero()).then_some(x)
    }
}

/// `Z^ncols / rowspan(M)` with enough structure for orders and torsion.
#[derive(Clone, Debug)]
pub struct IntegerQuotient {
    ncols: usize,
    layers: Vec<ZLayer>,
    unit_rank: usize,
    hnf: Hnf,
}

impl IntegerQuotient {
    pub fn new(m: &SparseMatrix) -> Result<Self> {
        Self::with_config(m, &IntegerConfig::default())
    }

    pub fn with_config(m: &SparseMatrix, cfg: &IntegerConfig) -> Result<Self> {
        let mut rows: Vec<ZRow> =
            m.rows().filter(|(c, _)| !c.is_empty()).map(|(c, v)| c.iter().zip(v).map(|(&c, &v)| (c, v as i64)).collect()).collect();
        let mut width = m.ncols();
        let mut layers = Vec::new();
        let mut unit_rank = 0;
        while let Some((layer, rest)) = ZLayer::build(&rows, width) {
            unit_rank += layer.rows.len();
            let mut schur: Vec<ZRow> = rest
                .par_iter()
                .map_init(|| layer.workspace(), |ws, &i| layer.solve(&rows[i], ws))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .filter(|r| !r.is_empty())
                .map(|mut r| {
                    if r[0].1 < 0 {
                        r.iter_mut().for_each(|e| e.1 = -e.1);
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
        // the Hermite basis has at most `width` rows of length `width`
        if width.saturating_mul(width) > cfg.dense_budget {
            return Err(Error::BudgetExceeded { rows: rows.len(), cols: width, budget: cfg.dense_budget });
        }
        let mut hnf = Hnf::new(width);
        rows.sort_by_key(|r| r.len());
        for r in &rows {
            let mut v = vec![BigInt::zero(); width];
            for &(c, x) in r {
                v[c as usize] = BigInt::from(x);
            }
            hnf.insert(v);
        }
        Ok(IntegerQuotient { ncols: m.ncols(), layers, unit_rank, hnf })
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// Rank of the relation lattice.
    pub fn rank(&self) -> usize {
        self.unit_rank + self.hnf.rank()
    }

    /// Rank of the free part of the quotient.
    pub fn free_rank(&self) -> usize {
        self.ncols - self.rank()
    }

    /// Number of columns left after unit-pivot elimination.
    pub fn residual_width(&self) -> usize {
        self.layers.last().map_or(self.ncols, |l| l.next_ncols)
    }

    /// Nonzero elementary divisors of the relation matrix.
    pub fn elementary_divisors(&self) -> Vec<BigInt> {
        let mut d = vec![BigInt::one(); self.unit_rank];
        d.extend(elementary_divisors(self.hnf.rows().to_vec()));
        d
    }

    /// Invariant factors of the torsion subgroup (divisors greater than 1).
    pub fn torsion(&self) -> Vec<BigInt> {
        elementary_divisors(self.hnf.rows().to_vec()).into_iter().filter(|d| !d.is_one()).collect()
    }

    /// Image of `v` in the coordinates left after unit elimination.
    pub fn reduce(&self, v: &SymbolVector) -> Result<Vec<BigInt>> {
        if let Some(c) = v.max_col().filter(|&c| c >= self.ncols) {
            return Err(Error::IncompatibleIndex(format!("column {c} out of range {}", self.ncols)));
        }
        let mut cur: ZRow = v.iter().map(|(c, x)| (c as u32, x)).collect();
        for layer in &self.layers {
            let mut ws = layer.workspace();
            cur = layer.solve(&cur, &mut ws)?;
        }
        let mut out = vec![BigInt::zero(); self.residual_width()];
        for (c, x) in cur {
            out[c as usize] = BigInt::from(x);
        }
        Ok(out)
    }

    /// Smallest `d >= 1` with `d·v` in the row span, or infinity.
    pub fn element_order(&self, v: &SymbolVector) -> Result<Order> {
        let r = self.reduce(v)?;
        Ok(match self.hnf.solve(&r) {
            None => Order::Infinite,
            Some(x) => Order::Finite(x.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))),
        })
    }

    pub fn in_rowspan_z(&self, v: &SymbolVector) -> Result<bool> {
        Ok(self.element_order(v)?.is_one())
    }

    pub fn in_rowspan_q(&self, v: &SymbolVector) -> Result<bool> {
        Ok(self.element_order(v)? != Order::Infinite)
    }
}

/// Convenience wrapper: order of `v` modulo the rows of `relations`.
pub fn element_order(relations: &SparseMatrix, v: &SymbolVector) -> Result<Order> {
    IntegerQuotient::new(relations)?.element_order(v)
}

/// Nonzero elementary divisors of an integer matrix, with unit-pivot
/// pre-reduction.
pub fn snf(m: &SparseMatrix) -> Result<Vec<BigInt>> {
    Ok(IntegerQuotient::new(m)?.elementary_divisors())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::modp::dense_rank_mod_p;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> SparseMatrix {
        let mut m = SparseMatrix::new(cols);
        for _ in 0..rows {
            let k = rng.gen_range(0..=4);
            let row: Vec<(u32, i32)> = (0..k).map(|_| (rng.gen_range(0..cols) as u32, rng.gen_range(-4..=4))).collect();
            m.push_row(&row).unwrap();
        }
        m
    }

    fn big(m: &SparseMatrix) -> Vec<Vec<BigInt>> {
        m.to_dense().into_iter().map(|r| r.into_iter().map(BigInt::from).collect()).collect()
    }

    /// Order by brute force: smallest d <= limit with d·v in the span, using
    /// the Smith form of the stacked matrix as the membership test.
    fn order_oracle(m: &SparseMatrix, v: &[i64], limit: i64) -> Option<i64> {
        let base = elementary_divisors(big(m));
        for d in 1..=limit {
            let mut rows = big(m);
            rows.push(v.iter().map(|&x| BigInt::from(x * d)).collect());
            if elementary_divisors(rows) == base {
                return Some(d);
            }
        }
        None
    }

    #[test]
    fn divisors_match_dense_snf() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let cols = rng.gen_range(1..12);
            let rows = rng.gen_range(0..15);
            let m = random_matrix(&mut rng, rows, cols);
            let q = IntegerQuotient::new(&m).unwrap();
            assert_eq!(q.elementary_divisors(), elementary_divisors(big(&m)));
            assert_eq!(q.rank(), dense_rank_mod_p(&m.to_dense(), 1_000_003));
        }
    }

    #[test]
    fn orders_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..150 {
            let cols = rng.gen_range(1..7);
            let rows = rng.gen_range(0..8);
            let m = random_matrix(&mut rng, rows, cols);
            let q = IntegerQuotient::new(&m).unwrap();
            let v: Vec<i64> = (0..cols).map(|_| rng.gen_range(-3..=3)).collect();
            let mut sv = SymbolVector::new();
            for (c, &x) in v.iter().enumerate() {
                sv.add_term(c, x);
            }
            let got = q.element_order(&sv).unwrap();
            let divisor_bound: i64 = 5000;
            match order_oracle(&m, &v, 200) {
                Some(d) => assert_eq!(got, Order::Finite(BigInt::from(d))),
                None => match &got {
                    Order::Infinite => {}
                    Order::Finite(d) => assert!(*d > BigInt::from(200) && *d < BigInt::from(divisor_bound)),
                },
            }
            assert_eq!(q.in_rowspan_z(&sv).unwrap(), got.is_one());
        }
    }

    #[test]
    fn small_examples() {
        // Z^2 / <(2,0),(0,6)>: (1,0) has order 2, (1,1) order 6, (0,0) order 1
        let m = SparseMatrix::from_rows(2, [vec![(0, 2)], vec![(1, 6)]]).unwrap();
        let q = IntegerQuotient::new(&m).unwrap();
        assert_eq!(q.torsion(), vec![BigInt::from(2), BigInt::from(6)]);
        let mut v = SymbolVector::unit(0);
        assert_eq!(q.element_order(&v).unwrap(), Order::Finite(BigInt::from(2)));
        v.add_term(1, 1);
        assert_eq!(q.element_order(&v).unwrap(), Order::Finite(BigInt::from(6)));
        assert!(q.in_rowspan_z(&SymbolVector::new()).unwrap());
        // free direction
        let m = SparseMatrix::from_rows(2, [vec![(0, 1), (1, -1)]]).unwrap();
        let q = IntegerQuotient::new(&m).unwrap();
        assert_eq!(q.element_order(&SymbolVector::unit(0)).unwrap(), Order::Infinite);
        assert_eq!(q.free_rank(), 1);
        assert!(matches!(q.element_order(&SymbolVector::unit(5)), Err(Error::IncompatibleIndex(_))));
    }

    #[test]
    fn budget_is_enforced() {
        let m = SparseMatrix::from_rows(3, [vec![(0, 2), (1, 4), (2, 6)], vec![(0, 4), (1, 6), (2, 2)]]).unwrap();
        let cfg = IntegerConfig { dense_budget: 4 };
        assert!(matches!(IntegerQuotient::with_config(&m, &cfg), Err(Error::BudgetExceeded { .. })));
    }
}
