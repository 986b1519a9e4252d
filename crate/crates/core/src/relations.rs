//! Sparse relation matrices presenting `B_n(G)`, `M_n(G)`, `M*_n(G)` and
//! `M⁻_n(G)`, including partial systems restricted to a set of block sizes.
//!
//! An instance of a relation is a canonical symbol together with a size-`k`
//! sub-multiset of its entries (the a-block); the remaining entries form the
//! b-block. Both sides of every relation are symmetric in the a-block, so
//! only the multiset matters.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{AbelianGroup, Code, GroupElement};
use crate::linalg::sparse::{normalize_row, SparseMatrix, SparseRow};
use crate::symbol::{spanning_multisets, Codes, Flavor, SymbolIndex};

/// A presentation: columns are the symbols of `index`, rows are relations.
#[derive(Clone, Debug)]
pub struct RelationSystem {
    index: SymbolIndex,
    matrix: SparseMatrix,
    kset: Vec<usize>,
}

impl RelationSystem {
    pub fn index(&self) -> &SymbolIndex {
        &self.index
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn flavor(&self) -> Flavor {
        self.index.flavor()
    }

    pub fn kset(&self) -> &[usize] {
        &self.kset
    }

    pub fn ncols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn nrows(&self) -> usize {
        self.matrix.nrows()
    }

    /// Assembles a system from parts; rows must be indexed by `index`.
    pub fn from_parts(index: SymbolIndex, matrix: SparseMatrix, kset: Vec<usize>) -> Result<Self> {
        if matrix.ncols() != index.len() {
            return Err(Error::IncompatibleIndex(format!("{} columns for {} symbols", matrix.ncols(), index.len())));
        }
        Ok(RelationSystem { index, matrix, kset })
    }

    pub fn into_parts(self) -> (SymbolIndex, SparseMatrix) {
        (self.index, self.matrix)
    }
}

/// Full range `{2, ..., n}` of block sizes.
pub fn full_kset(n: usize) -> Vec<usize> {
    (2..=n.max(1)).filter(|&k| k >= 2).collect()
}

fn validate_kset(n: usize, kset: &[usize]) -> Result<Vec<usize>> {
    if n < 2 {
        return Ok(Vec::new());
    }
    if kset.is_empty() {
        return Err(Error::InvalidK { k: 0, n });
    }
    let mut ks = kset.to_vec();
    ks.sort_unstable();
    ks.dedup();
    if let Some(&k) = ks.iter().find(|&&k| k < 2 || k > n) {
        return Err(Error::InvalidK { k, n });
    }
    Ok(ks)
}

/// Builds the relation system for `(G, n, flavor)` using block sizes in `kset`.
/// Self-negating `Mminus` symbols are dropped (they vanish away from 2).
pub fn build_relations(group: &AbelianGroup, n: usize, flavor: Flavor, kset: &[usize]) -> Result<RelationSystem> {
    let index = SymbolIndex::enumerate(group, n, flavor)?;
    build_on_index(index, kset)
}

/// Relation system suitable for ranks over `F_2`: for `Mminus`,
/// self-negating symbols stay as columns and each gets the row `2·e_s`.
pub fn build_relations_f2(group: &AbelianGroup, n: usize, flavor: Flavor, kset: &[usize]) -> Result<RelationSystem> {
    let index = SymbolIndex::enumerate_keep_self_negating(group, n, flavor)?;
    build_on_index(index, kset)
}

/// Builds relations for an existing index.
pub fn build_on_index(index: SymbolIndex, kset: &[usize]) -> Result<RelationSystem> {
    let ks = validate_kset(index.n(), kset)?;
    let sources = instance_sources(&index);
    let chunks: Vec<SparseMatrix> = sources
        .par_chunks(512)
        .map(|chunk| {
            let mut m = SparseMatrix::new(index.len());
            let mut scratch = RowScratch::default();
            for t in chunk {
                for_each_instance(&index, t, &ks, &mut scratch, |row| m.push_row_unchecked(row));
            }
            m
        })
        .collect();
    let mut matrix = SparseMatrix::new(index.len());
    for c in &chunks {
        matrix.append(c)?;
    }
    matrix = append_self_negating_rows(&index, matrix);
    let matrix = matrix.dedup_rows();
    Ok(RelationSystem { index, matrix, kset: ks })
}

fn append_self_negating_rows(index: &SymbolIndex, mut matrix: SparseMatrix) -> SparseMatrix {
    if index.flavor() == Flavor::Mminus && index.keeps_self_negating() {
        let g = index.group();
        for col in 0..index.len() {
            if index.codes(col).iter().any(|&c| g.is_two_torsion(c)) {
                matrix.push_row_unchecked(&[(col as u32, 2)]);
            }
        }
    }
    matrix
}

/// Tuples whose sub-multisets generate the relation instances. For
/// `Mminus` these are all sorted spanning tuples (not only sign-canonical
/// ones): instances from sign-flipped tuples give different relations.
fn instance_sources(index: &SymbolIndex) -> Vec<Codes> {
    match index.flavor() {
        Flavor::Mminus => {
            let g = index.group();
            spanning_multisets(g, index.n(), &g.codes().collect::<Vec<_>>())
        }
        _ => index.iter().map(|c| c.iter().copied().collect()).collect(),
    }
}

#[derive(Default)]
struct RowScratch {
    terms: Vec<(u32, i64)>,
    out: SparseRow,
    block: Codes,
    rest: Codes,
    tuple: Codes,
}

/// Calls `emit` with each nonzero normalized row generated from the sorted
/// tuple `t` and every block size in `ks`.
fn for_each_instance(index: &SymbolIndex, t: &[Code], ks: &[usize], s: &mut RowScratch, mut emit: impl FnMut(&[(u32, i32)])) {
    // distinct values with multiplicities
    let mut groups: SmallGroups = SmallGroups::new();
    for &c in t {
        match groups.last_mut() {
            Some((v, m)) if *v == c => *m += 1,
            _ => groups.push((c, 1)),
        }
    }
    let mut take = vec![0usize; groups.len()];
    for &k in ks {
        sub_multisets(&groups, k, 0, &mut take, &mut |take| {
            s.block.clear();
            s.rest.clear();
            for (&(v, m), &c) in groups.iter().zip(take.iter()) {
                s.block.extend(std::iter::repeat(v).take(c));
                s.rest.extend(std::iter::repeat(v).take(m - c));
            }
            instance_row(index, s);
            if !s.out.is_empty() {
                emit(&s.out);
            }
        });
    }
}

type SmallGroups = smallvec::SmallVec<[(Code, usize); 8]>;

fn sub_multisets(groups: &[(Code, usize)], k: usize, pos: usize, take: &mut [usize], f: &mut impl FnMut(&[usize])) {
    if pos == groups.len() {
        if k == 0 {
            f(take);
        }
        return;
    }
    let remaining: usize = groups[pos + 1..].iter().map(|g| g.1).sum();
    let lo = k.saturating_sub(remaining);
    let hi = groups[pos].1.min(k);
    for c in lo..=hi {
        take[pos] = c;
        sub_multisets(groups, k - c, pos + 1, take, f);
    }
    take[pos] = 0;
}

/// Fills `s.out` with LHS − RHS for the block/rest currently in `s`.
fn instance_row(index: &SymbolIndex, s: &mut RowScratch) {
    let g = index.group();
    s.terms.clear();
    s.tuple.clear();
    s.tuple.extend_from_slice(&s.block);
    s.tuple.extend_from_slice(&s.rest);
    if let Some((col, sign)) = index.locate(&mut s.tuple) {
        s.terms.push((col as u32, sign as i64));
    }
    let k = s.block.len();
    match index.flavor() {
        Flavor::B | Flavor::M | Flavor::Mminus => {
            let distinct_only = index.flavor() == Flavor::B;
            for i in 0..k {
                if distinct_only && i > 0 && s.block[i] == s.block[i - 1] {
                    continue;
                }
                let ai = s.block[i];
                s.tuple.clear();
                for (j, &aj) in s.block.iter().enumerate() {
                    s.tuple.push(if j == i { ai } else { g.sub(aj, ai) });
                }
                s.tuple.extend_from_slice(&s.rest);
                if let Some((col, sign)) = index.locate(&mut s.tuple) {
                    s.terms.push((col as u32, -(sign as i64)));
                }
            }
        }
        Flavor::Mstar => {
            let total = s.block.iter().fold(0, |acc, &a| g.add(acc, a));
            for i in 0..k {
                s.tuple.clear();
                for (j, &aj) in s.block.iter().enumerate() {
                    s.tuple.push(if j == i { total } else { aj });
                }
                s.tuple.extend_from_slice(&s.rest);
                if let Some((col, sign)) = index.locate(&mut s.tuple) {
                    s.terms.push((col as u32, -(sign as i64)));
                }
            }
        }
    }
    let merged = normalize_row(std::mem::take(&mut s.terms));
    s.out.clear();
    let flip = merged.first().is_some_and(|&(_, v)| v < 0);
    s.out.extend(merged.iter().map(|&(c, v)| (c, if flip { -v } else { v } as i32)));
    s.terms = merged;
}

/// Streams the relation rows in SMS format without materializing the
/// matrix. Rows are not deduplicated. Returns the number of rows written.
pub fn stream_relations_sms<W: Write>(
    group: &AbelianGroup,
    n: usize,
    flavor: Flavor,
    kset: &[usize],
    keep_self_negating: bool,
    mut w: W,
) -> Result<usize> {
    let index = if keep_self_negating {
        SymbolIndex::enumerate_keep_self_negating(group, n, flavor)?
    } else {
        SymbolIndex::enumerate(group, n, flavor)?
    };
    let ks = validate_kset(n, kset)?;
    let sources = instance_sources(&index);
    let self_neg: Vec<usize> = if flavor == Flavor::Mminus && keep_self_negating {
        (0..index.len()).filter(|&c| index.codes(c).iter().any(|&x| group.is_two_torsion(x))).collect()
    } else {
        Vec::new()
    };
    let mut scratch = RowScratch::default();
    let mut nrows = self_neg.len();
    for t in &sources {
        for_each_instance(&index, t, &ks, &mut scratch, |_| nrows += 1);
    }
    writeln!(w, "{} {} M", nrows, index.len())?;
    let mut i = 0usize;
    let mut io_err = None;
    for t in &sources {
        for_each_instance(&index, t, &ks, &mut scratch, |row| {
            i += 1;
            for &(c, v) in row {
                if let Err(e) = writeln!(w, "{} {} {}", i, c + 1, v) {
                    io_err.get_or_insert(e);
                }
            }
        });
        if let Some(e) = io_err.take() {
            return Err(e.into());
        }
    }
    for c in self_neg {
        i += 1;
        writeln!(w, "{} {} 2", i, c + 1)?;
    }
    writeln!(w, "0 0 0")?;
    Ok(nrows)
}

/// Sparse integer combination of symbols over an index.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolVector {
    coeffs: BTreeMap<usize, i64>,
}

impl SymbolVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn unit(col: usize) -> Self {
        let mut v = Self::new();
        v.add_term(col, 1);
        v
    }

    pub fn add_term(&mut self, col: usize, coef: i64) {
        if coef == 0 {
            return;
        }
        let e = self.coeffs.entry(col).or_insert(0);
        *e += coef;
        if *e == 0 {
            self.coeffs.remove(&col);
        }
    }

    /// Adds `coef` times the symbol of `codes` (canonicalized in place).
    pub fn add_codes(&mut self, index: &SymbolIndex, codes: &mut [Code], coef: i64) {
        if let Some((col, sign)) = index.locate(codes) {
            self.add_term(col, sign as i64 * coef);
        }
    }

    pub fn add_vector(&mut self, other: &SymbolVector, coef: i64) {
        for (&c, &v) in &other.coeffs {
            self.add_term(c, v * coef);
        }
    }

    pub fn scaled(&self, k: i64) -> SymbolVector {
        let mut out = SymbolVector::new();
        out.add_vector(self, k);
        out
    }

    pub fn get(&self, col: usize) -> i64 {
        self.coeffs.get(&col).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, i64)> + '_ {
        self.coeffs.iter().map(|(&c, &v)| (c, v))
    }

    pub fn max_col(&self) -> Option<usize> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn to_dense(&self, ncols: usize) -> Vec<i64> {
        let mut d = vec![0; ncols];
        for (c, v) in self.iter() {
            d[c] = v;
        }
        d
    }

    pub fn from_row(cols: &[u32], vals: &[i32]) -> Self {
        let mut v = SymbolVector::new();
        for (&c, &x) in cols.iter().zip(vals) {
            v.add_term(c as usize, x as i64);
        }
        v
    }
}

/// Canonicalizes each tuple and accumulates the signed coefficients.
pub fn combination(index: &SymbolIndex, terms: &[(Vec<GroupElement>, i64)]) -> Result<SymbolVector> {
    let mut v = SymbolVector::new();
    for (tuple, coef) in terms {
        if let Some((col, sign)) = index.locate_tuple(tuple)? {
            v.add_term(col, sign as i64 * coef);
        }
    }
    Ok(v)
}

/// Convenience for cyclic groups: terms given as integer residues.
pub fn combination_cyclic(index: &SymbolIndex, terms: &[(&[i64], i64)]) -> Result<SymbolVector> {
    let g = index.group();
    let tuples = terms
        .iter()
        .map(|(t, c)| Ok((t.iter().map(|&x| g.element(&[x])).collect::<Result<Vec<_>>>()?, *c)))
        .collect::<Result<Vec<_>>>()?;
    combination(index, &tuples)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cyc(n: u32) -> AbelianGroup {
        AbelianGroup::cyclic(n).unwrap()
    }

    fn has_row(sys: &RelationSystem, v: &SymbolVector) -> bool {
        let target = v.clone();
        sys.matrix().rows().any(|(c, x)| {
            let r = SymbolVector::from_row(c, x);
            r == target || r == target.scaled(-1)
        })
    }

    #[test]
    fn b_instance_n4_k3() {
        let g = cyc(11);
        let (a, a2, b) = (2i64, 5i64, 7i64);
        let sys = build_relations(&g, 4, Flavor::B, &[3]).unwrap();
        let expected = combination_cyclic(
            sys.index(),
            &[(&[a, a, a2, b], 1), (&[a, 0, a2 - a, b], -1), (&[a - a2, a - a2, a2, b], -1)],
        )
        .unwrap();
        assert!(has_row(&sys, &expected));
    }

    #[test]
    fn m_instance_n4_k3() {
        let g = cyc(11);
        let (a, a2, b) = (2i64, 5i64, 7i64);
        let sys = build_relations(&g, 4, Flavor::M, &[3]).unwrap();
        let expected = combination_cyclic(
            sys.index(),
            &[(&[a, a, a2, b], 1), (&[a, 0, a2 - a, b], -2), (&[a - a2, a - a2, a2, b], -1)],
        )
        .unwrap();
        assert!(has_row(&sys, &expected));
    }

    #[test]
    fn mstar_instance() {
        let g = cyc(7);
        let sys = build_relations(&g, 2, Flavor::Mstar, &[2]).unwrap();
        let expected = combination_cyclic(sys.index(), &[(&[1, 2], 1), (&[3, 2], -1), (&[1, 3], -1)]).unwrap();
        assert!(has_row(&sys, &expected));
    }

    #[test]
    fn shape_and_errors() {
        let g = cyc(5);
        let sys = build_relations(&g, 2, Flavor::M, &[2]).unwrap();
        assert_eq!(sys.ncols(), 14);
        assert!(matches!(build_relations(&g, 3, Flavor::M, &[1]), Err(Error::InvalidK { k: 1, n: 3 })));
        assert!(matches!(build_relations(&g, 3, Flavor::M, &[4]), Err(Error::InvalidK { .. })));
        assert!(matches!(build_relations(&g, 3, Flavor::M, &[]), Err(Error::InvalidK { .. })));
        let free = build_relations(&g, 1, Flavor::M, &[]).unwrap();
        assert_eq!(free.nrows(), 0);
        assert_eq!(free.ncols(), 4);
    }

    #[test]
    fn rows_are_unique_up_to_sign() {
        let g = cyc(6);
        for f in [Flavor::B, Flavor::M, Flavor::Mstar, Flavor::Mminus] {
            let sys = build_relations(&g, 3, f, &full_kset(3)).unwrap();
            let mut seen = std::collections::HashSet::new();
            for (c, v) in sys.matrix().rows() {
                assert!(!c.is_empty());
                assert!(v[0] > 0);
                assert!(seen.insert((c.to_vec(), v.to_vec())));
                assert!(v.iter().all(|x| x.abs() <= 4));
            }
        }
    }

    #[test]
    fn combination_examples() {
        let g = cyc(5);
        let m = SymbolIndex::enumerate(&g, 2, Flavor::M).unwrap();
        assert!(combination_cyclic(&m, &[(&[1, 2], 1), (&[2, 1], -1)]).unwrap().is_zero());
        let mm = SymbolIndex::enumerate(&g, 2, Flavor::Mminus).unwrap();
        let v = combination_cyclic(&mm, &[(&[1, 4], 1)]).unwrap();
        let col = mm.column_of_canonical(&[1, 1]).unwrap();
        assert_eq!(v.iter().collect::<Vec<_>>(), vec![(col, -1)]);
        let g7 = cyc(7);
        let b = SymbolIndex::enumerate(&g7, 3, Flavor::B).unwrap();
        let v = combination_cyclic(&b, &[(&[0, 0, 1], 1)]).unwrap();
        assert_eq!(v, SymbolVector::unit(b.column_of_canonical(&[0, 0, 1]).unwrap()));
        assert_eq!(combination_cyclic(&b, &[(&[0, 0, 0], 1)]), Err(Error::SpanFailure));
    }

    #[test]
    fn f2_mminus_has_torsion_rows() {
        let g = cyc(4);
        let sys = build_relations_f2(&g, 2, Flavor::Mminus, &[2]).unwrap();
        let idx = sys.index();
        assert!(idx.self_negating_count() > 0);
        for col in 0..idx.len() {
            if idx.codes(col).iter().any(|&c| g.is_two_torsion(c)) {
                assert!(sys.matrix().rows().any(|(c, v)| c == [col as u32] && v == [2]));
            }
        }
    }

    #[test]
    fn stream_matches_row_count() {
        let g = cyc(5);
        let mut buf = Vec::new();
        let rows = stream_relations_sms(&g, 2, Flavor::M, &[2], false, &mut buf).unwrap();
        let m = SparseMatrix::read_sms(buf.as_slice()).unwrap();
        assert_eq!(m.nrows(), rows);
        assert_eq!(m.ncols(), 14);
        let sys = build_relations(&g, 2, Flavor::M, &[2]).unwrap();
        assert_eq!(m.dedup_rows(), *sys.matrix());
    }
}
