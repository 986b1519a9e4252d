//! Compressed sparse row matrices with small integer entries, and the SMS
//! text format (`nrows ncols M`, 1-based `i j v` triples, `0 0 0`).

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One sparse row as sorted `(column, value)` pairs without zeros.
pub type SparseRow = Vec<(u32, i32)>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparseMatrix {
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    vals: Vec<i32>,
}

impl SparseMatrix {
    pub fn new(ncols: usize) -> Self {
        SparseMatrix { ncols, row_ptr: vec![0], col_idx: Vec::new(), vals: Vec::new() }
    }

    pub fn from_rows<I>(ncols: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator,
        I::Item: AsRef<[(u32, i32)]>,
    {
        let mut m = SparseMatrix::new(ncols);
        for r in rows {
            m.push_row(r.as_ref())?;
        }
        Ok(m)
    }

    /// Builds from triplets, summing duplicates. Row count is taken from `nrows`.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, i64)]) -> Result<Self> {
        let mut rows: Vec<Vec<(u32, i64)>> = vec![Vec::new(); nrows];
        for &(i, j, v) in triplets {
            if i >= nrows || j >= ncols {
                return Err(Error::DimensionMismatch { expected: ncols, got: j + 1 });
            }
            rows[i].push((j as u32, v));
        }
        let mut m = SparseMatrix::new(ncols);
        for r in rows {
            let merged = normalize_row(r);
            let narrow: SparseRow = merged
                .into_iter()
                .map(|(c, v)| i32::try_from(v).map(|v| (c, v)).map_err(|_| Error::Unsupported(format!("entry {v} exceeds i32"))))
                .collect::<Result<_>>()?;
            m.push_row_unchecked(&narrow);
        }
        Ok(m)
    }

    /// Appends a row; entries are sorted and merged, zeros dropped.
    pub fn push_row(&mut self, row: &[(u32, i32)]) -> Result<()> {
        if let Some(&(c, _)) = row.iter().find(|&&(c, _)| c as usize >= self.ncols) {
            return Err(Error::DimensionMismatch { expected: self.ncols, got: c as usize + 1 });
        }
        let merged = normalize_row(row.iter().map(|&(c, v)| (c, v as i64)).collect());
        for (c, v) in merged {
            self.col_idx.push(c);
            self.vals.push(i32::try_from(v).map_err(|_| Error::Unsupported(format!("entry {v} exceeds i32")))?);
        }
        self.row_ptr.push(self.col_idx.len());
        Ok(())
    }

    /// Appends a row that is already sorted, merged and in range.
    pub(crate) fn push_row_unchecked(&mut self, row: &[(u32, i32)]) {
        debug_assert!(row.windows(2).all(|w| w[0].0 < w[1].0));
        for &(c, v) in row {
            self.col_idx.push(c);
            self.vals.push(v);
        }
        self.row_ptr.push(self.col_idx.len());
    }

    pub fn nrows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    #[inline]
    pub fn row(&self, i: usize) -> (&[u32], &[i32]) {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.col_idx[a..b], &self.vals[a..b])
    }

    pub fn row_vec(&self, i: usize) -> SparseRow {
        let (c, v) = self.row(i);
        c.iter().copied().zip(v.iter().copied()).collect()
    }

    pub fn rows(&self) -> impl Iterator<Item = (&[u32], &[i32])> + '_ {
        (0..self.nrows()).map(move |i| self.row(i))
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &SparseMatrix) -> Result<SparseMatrix> {
        let mut m = self.clone();
        m.append(other)?;
        Ok(m)
    }

    /// Appends the rows of `other` in place.
    pub fn append(&mut self, other: &SparseMatrix) -> Result<()> {
        if other.ncols != self.ncols {
            return Err(Error::DimensionMismatch { expected: self.ncols, got: other.ncols });
        }
        let base = self.col_idx.len();
        self.col_idx.extend_from_slice(&other.col_idx);
        self.vals.extend_from_slice(&other.vals);
        self.row_ptr.extend(other.row_ptr[1..].iter().map(|&p| p + base));
        Ok(())
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.col_idx {
            counts[c as usize + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let row_ptr = counts.clone();
        let mut col_idx = vec![0u32; self.nnz()];
        let mut vals = vec![0i32; self.nnz()];
        for i in 0..self.nrows() {
            let (cs, vs) = self.row(i);
            for (&c, &v) in cs.iter().zip(vs) {
                let slot = &mut counts[c as usize];
                col_idx[*slot] = i as u32;
                vals[*slot] = v;
                *slot += 1;
            }
        }
        SparseMatrix { ncols: self.nrows(), row_ptr, col_idx, vals }
    }

    /// Removes zero rows and duplicate rows up to sign; the first nonzero of
    /// each kept row is made positive. Kept rows retain their relative order.
    pub fn dedup_rows(&self) -> SparseMatrix {
        let mut normalized = SparseMatrix::new(self.ncols);
        for (c, v) in self.rows() {
            let flip = v.first().is_some_and(|&x| x < 0);
            for (&c, &v) in c.iter().zip(v) {
                normalized.col_idx.push(c);
                normalized.vals.push(if flip { -v } else { v });
            }
            normalized.row_ptr.push(normalized.col_idx.len());
        }
        let mut order: Vec<usize> = (0..normalized.nrows()).filter(|&i| !normalized.row(i).0.is_empty()).collect();
        order.sort_by(|&a, &b| normalized.row(a).cmp(&normalized.row(b)).then(a.cmp(&b)));
        let mut keep = vec![false; normalized.nrows()];
        for (pos, &i) in order.iter().enumerate() {
            if pos == 0 || normalized.row(order[pos - 1]) != normalized.row(i) {
                keep[i] = true;
            }
        }
        let mut out = SparseMatrix::new(self.ncols);
        for i in 0..normalized.nrows() {
            if keep[i] {
                let (c, v) = normalized.row(i);
                out.col_idx.extend_from_slice(c);
                out.vals.extend_from_slice(v);
                out.row_ptr.push(out.col_idx.len());
            }
        }
        out
    }

    /// Dense copy, for small matrices and tests.
    pub fn to_dense(&self) -> Vec<Vec<i64>> {
        let mut d = vec![vec![0i64; self.ncols]; self.nrows()];
        for (i, row) in d.iter_mut().enumerate() {
            let (c, v) = self.row(i);
            for (&c, &v) in c.iter().zip(v) {
                row[c as usize] = v as i64;
            }
        }
        d
    }

    pub fn write_sms<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {} M", self.nrows(), self.ncols)?;
        for i in 0..self.nrows() {
            let (c, v) = self.row(i);
            for (&c, &v) in c.iter().zip(v) {
                writeln!(w, "{} {} {}", i + 1, c + 1, v)?;
            }
        }
        writeln!(w, "0 0 0")?;
        Ok(())
    }

    pub fn read_sms<R: BufRead>(r: R) -> Result<SparseMatrix> {
        let mut lines = r.lines().enumerate();
        let (nrows, ncols) = loop {
            let Some((i, line)) = lines.next() else {
                return Err(Error::Parse { line: 0, msg: "missing header".into() });
            };
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 3 || parts[2] != "M" {
                return Err(Error::Parse { line: i + 1, msg: format!("bad header {line:?}") });
            }
            let parse = |s: &str| s.parse::<usize>().map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() });
            break (parse(parts[0])?, parse(parts[1])?);
        };
        let mut triplets = Vec::new();
        let mut terminated = false;
        for (i, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<i64> = line
                .split_whitespace()
                .map(|s| s.parse::<i64>().map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() }))
                .collect::<Result<_>>()?;
            if parts.len() != 3 {
                return Err(Error::Parse { line: i + 1, msg: format!("expected 3 fields, got {}", parts.len()) });
            }
            if parts == [0, 0, 0] {
                terminated = true;
                break;
            }
            let (r, c) = (parts[0], parts[1]);
            if r < 1 || c < 1 || r as usize > nrows || c as usize > ncols {
                return Err(Error::Parse { line: i + 1, msg: format!("index ({r},{c}) out of range") });
            }
            triplets.push((r as usize - 1, c as usize - 1, parts[2]));
        }
        if !terminated {
            return Err(Error::Parse { line: 0, msg: "missing 0 0 0 terminator".into() });
        }
        SparseMatrix::from_triplets(nrows, ncols, &triplets)
    }
}

/// Sorts by column, merges duplicates and drops zeros.
pub fn normalize_row(mut row: Vec<(u32, i64)>) -> Vec<(u32, i64)> {
    row.sort_unstable_by_key(|&(c, _)| c);
    let mut out: Vec<(u32, i64)> = Vec::with_capacity(row.len());
    for (c, v) in row {
        match out.last_mut() {
            Some(last) if last.0 == c => last.1 += v,
            _ => out.push((c, v)),
        }
    }
    out.retain(|&(_, v)| v != 0);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn push_merges_and_drops_zeros() {
        let mut m = SparseMatrix::new(4);
        m.push_row(&[(2, 1), (0, 3), (2, -1), (1, 2)]).unwrap();
        assert_eq!(m.row_vec(0), vec![(0, 3), (1, 2)]);
        assert!(m.push_row(&[(4, 1)]).is_err());
    }

    #[test]
    fn sms_round_trip() {
        let m = SparseMatrix::from_rows(3, [vec![(0, 1), (2, -2)], vec![], vec![(1, 5)]]).unwrap();
        let mut buf = Vec::new();
        m.write_sms(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("3 3 M\n1 1 1\n1 3 -2\n3 2 5\n0 0 0"));
        assert_eq!(SparseMatrix::read_sms(buf.as_slice()).unwrap(), m);
        assert!(SparseMatrix::read_sms("2 2 M\n1 1 1\n".as_bytes()).is_err());
        assert!(SparseMatrix::read_sms("2 2 M\n3 1 1\n0 0 0\n".as_bytes()).is_err());
    }

    #[test]
    fn dedup_up_to_sign() {
        let m = SparseMatrix::from_rows(3, [vec![(0, -1), (1, 1)], vec![(0, 1), (1, -1)], vec![], vec![(2, 2)], vec![(0, 1), (1, -1)]]).unwrap();
        let d = m.dedup_rows();
        assert_eq!(d.nrows(), 2);
        assert_eq!(d.row_vec(0), vec![(0, 1), (1, -1)]);
        assert_eq!(d.row_vec(1), vec![(2, 2)]);
    }

    #[test]
    fn transpose_twice() {
        let m = SparseMatrix::from_rows(4, [vec![(0, 1), (3, 2)], vec![(1, -1)], vec![(0, 4), (2, 7)]]).unwrap();
        let t = m.transpose();
        assert_eq!(t.nrows(), 4);
        assert_eq!(t.ncols(), 3);
        assert_eq!(t.transpose(), m);
        let d = m.to_dense();
        let dt = t.to_dense();
        for i in 0..3 {
            for j in 0..4 {
                assert_eq!(d[i][j], dt[j][i]);
            }
        }
    }
}
