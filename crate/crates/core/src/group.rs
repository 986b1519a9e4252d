//! Finite abelian groups as products of cyclic factors, identified with
//! their character groups coordinatewise.
//!
//! Elements are carried around internally as a single `u32` code: the
//! mixed-radix index of the residue vector with the first factor most
//! significant, so that numeric order on codes is lexicographic order on
//! residue vectors.

use std::fmt;

use num_integer::Integer;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::linalg::smith::small_elementary_divisors;

/// Element code; see the module docs.
pub type Code = u32;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    residues: SmallVec<[u32; 4]>,
}

impl GroupElement {
    pub fn new(residues: impl IntoIterator<Item = u32>) -> Self {
        GroupElement { residues: residues.into_iter().collect() }
    }

    pub fn residues(&self) -> &[u32] {
        &self.residues
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, r) in self.residues.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{r}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AbelianGroup {
    moduli: Vec<u32>,
    strides: Vec<u32>,
    order: u32,
}

impl AbelianGroup {
    /// Product of cyclic factors `Z/N_1 x ... x Z/N_m`, kept in the given order.
    pub fn new(moduli: impl Into<Vec<u32>>) -> Result<Self> {
        let moduli = moduli.into();
        if moduli.is_empty() {
            return Err(Error::InvalidGroup("no cyclic factors".into()));
        }
        if moduli.iter().any(|&m| m == 0) {
            return Err(Error::InvalidGroup("moduli must be >= 1".into()));
        }
        let mut order: u64 = 1;
        for &m in &moduli {
            order *= m as u64;
            if order > (1 << 24) {
                return Err(Error::InvalidGroup(format!("order {order} too large")));
            }
        }
        let mut strides = vec![1u32; moduli.len()];
        for i in (0..moduli.len() - 1).rev() {
            strides[i] = strides[i + 1] * moduli[i + 1];
        }
        Ok(AbelianGroup { moduli, strides, order: order as u32 })
    }

    pub fn cyclic(n: u32) -> Result<Self> {
        Self::new(vec![n])
    }

    pub fn moduli(&self) -> &[u32] {
        &self.moduli
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Number of cyclic factors.
    pub fn rank(&self) -> usize {
        self.moduli.len()
    }

    /// `Some(N)` when the group is presented with a single factor `Z/N`.
    pub fn as_cyclic(&self) -> Option<u32> {
        (self.moduli.len() == 1).then(|| self.moduli[0])
    }

    pub fn is_trivial(&self) -> bool {
        self.order == 1
    }

    /// Euler's function of the order; meaningful for cyclic groups.
    pub fn phi(&self) -> u64 {
        euler_phi(self.order as u64)
    }

    pub fn contains(&self, e: &GroupElement) -> Result<()> {
        if e.residues.len() != self.moduli.len() {
            return Err(Error::DimensionMismatch { expected: self.moduli.len(), got: e.residues.len() });
        }
        Ok(())
    }

    /// Builds an element, reducing residues into range.
    pub fn element(&self, residues: &[i64]) -> Result<GroupElement> {
        if residues.len() != self.moduli.len() {
            return Err(Error::DimensionMismatch { expected: self.moduli.len(), got: residues.len() });
        }
        Ok(GroupElement::new(
            residues.iter().zip(&self.moduli).map(|(&r, &m)| r.rem_euclid(m as i64) as u32),
        ))
    }

    pub fn encode(&self, e: &GroupElement) -> Result<Code> {
        self.contains(e)?;
        let mut code = 0u32;
        for ((&r, &m), &s) in e.residues.iter().zip(&self.moduli).zip(&self.strides) {
            code += (r % m) * s;
        }
        Ok(code)
    }

    pub fn decode(&self, code: Code) -> GroupElement {
        GroupElement::new(self.moduli.iter().zip(&self.strides).map(|(&m, &s)| (code / s) % m))
    }

    pub fn zero(&self) -> Code {
        0
    }

    #[inline]
    pub fn add(&self, a: Code, b: Code) -> Code {
        if self.moduli.len() == 1 {
            let s = a + b;
            return if s >= self.order { s - self.order } else { s };
        }
        let mut code = 0;
        for (&m, &s) in self.moduli.iter().zip(&self.strides) {
            let x = (a / s) % m + (b / s) % m;
            code += if x >= m { x - m } else { x } * s;
        }
        code
    }

    #[inline]
    pub fn neg(&self, a: Code) -> Code {
        if self.moduli.len() == 1 {
            return if a == 0 { 0 } else { self.order - a };
        }
        let mut code = 0;
        for (&m, &s) in self.moduli.iter().zip(&self.strides) {
            let x = (a / s) % m;
            code += if x == 0 { 0 } else { m - x } * s;
        }
        code
    }

    #[inline]
    pub fn sub(&self, a: Code, b: Code) -> Code {
        self.add(a, self.neg(b))
    }

    /// Integer multiple `k * a`.
    pub fn scale(&self, k: i64, a: Code) -> Code {
        let mut code = 0;
        for (&m, &s) in self.moduli.iter().zip(&self.strides) {
            let x = (a / s) % m;
            code += ((k.rem_euclid(m as i64) as u64 * x as u64) % m as u64) as u32 * s;
        }
        code
    }

    /// `a == -a`.
    pub fn is_two_torsion(&self, a: Code) -> bool {
        self.neg(a) == a
    }

    pub fn codes(&self) -> std::ops::Range<Code> {
        0..self.order
    }

    /// True iff the codes generate the whole group.
    pub fn spans_codes(&self, elems: &[Code]) -> bool {
        if let Some(n) = self.as_cyclic() {
            let mut g = n;
            for &a in elems {
                g = g.gcd(&a);
                if g == 1 {
                    return true;
                }
            }
            return g == 1;
        }
        let m = self.moduli.len();
        // Columns: the elements, then N_i e_i.
        let mut mat = vec![vec![0i64; elems.len() + m]; m];
        for (j, &a) in elems.iter().enumerate() {
            let e = self.decode(a);
            for i in 0..m {
                mat[i][j] = e.residues[i] as i64;
            }
        }
        for i in 0..m {
            mat[i][elems.len() + i] = self.moduli[i] as i64;
        }
        let d = small_elementary_divisors(&mat);
        d.len() == m && d.iter().all(|&x| x == 1)
    }

    /// True iff the elements generate the character group.
    pub fn spans(&self, elems: &[GroupElement]) -> Result<bool> {
        let codes = elems.iter().map(|e| self.encode(e)).collect::<Result<Vec<_>>>()?;
        Ok(self.spans_codes(&codes))
    }
}

impl fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, m) in self.moduli.iter().enumerate() {
            if i > 0 {
                f.write_str("x")?;
            }
            write!(f, "Z/{m}")?;
        }
        Ok(())
    }
}

pub fn euler_phi(mut n: u64) -> u64 {
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

pub fn divisors(n: u32) -> Vec<u32> {
    (1..=n).filter(|d| n % d == 0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn closure_spans(g: &AbelianGroup, elems: &[Code]) -> bool {
        let mut seen = vec![false; g.order() as usize];
        seen[0] = true;
        let mut frontier = vec![0];
        while let Some(x) = frontier.pop() {
            for &a in elems {
                let y = g.add(x, a);
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    frontier.push(y);
                }
            }
        }
        seen.iter().all(|&b| b)
    }

    #[test]
    fn gcd_examples() {
        let g6 = AbelianGroup::cyclic(6).unwrap();
        assert!(g6.spans_codes(&[2, 3]));
        let g12 = AbelianGroup::cyclic(12).unwrap();
        assert!(!g12.spans_codes(&[4, 6]));
    }

    #[test]
    fn klein_four() {
        let g = AbelianGroup::new(vec![2, 2]).unwrap();
        let a = g.element(&[1, 0]).unwrap();
        let b = g.element(&[0, 1]).unwrap();
        let c = g.element(&[1, 1]).unwrap();
        assert!(g.spans(&[a, b]).unwrap());
        assert!(!g.spans(&[c]).unwrap());
    }

    #[test]
    fn dimension_mismatch() {
        let g = AbelianGroup::new(vec![2, 2]).unwrap();
        let e = GroupElement::new([1]);
        assert!(matches!(g.spans(&[e]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn codes_are_lexicographic() {
        let g = AbelianGroup::new(vec![3, 4]).unwrap();
        let mut prev: Option<GroupElement> = None;
        for c in g.codes() {
            let e = g.decode(c);
            assert_eq!(g.encode(&e).unwrap(), c);
            if let Some(p) = prev {
                assert!(p < e);
            }
            prev = Some(e);
        }
    }

    #[test]
    fn arithmetic_matches_residues() {
        let g = AbelianGroup::new(vec![2, 6]).unwrap();
        for a in g.codes() {
            for b in g.codes() {
                let (ea, eb) = (g.decode(a), g.decode(b));
                let sum = g.element(&[
                    (ea.residues()[0] + eb.residues()[0]) as i64,
                    (ea.residues()[1] + eb.residues()[1]) as i64,
                ]);
                assert_eq!(g.decode(g.add(a, b)), sum.unwrap());
                assert_eq!(g.add(a, g.neg(a)), 0);
            }
            assert_eq!(g.scale(3, a), g.add(a, g.add(a, a)));
            assert_eq!(g.scale(-1, a), g.neg(a));
        }
    }

    #[test]
    fn spans_agrees_with_subgroup_closure() {
        let groups = [vec![64], vec![2, 2], vec![2, 4], vec![4, 4], vec![2, 2, 2], vec![3, 6], vec![2, 8], vec![4, 2, 2]];
        for moduli in groups {
            let g = AbelianGroup::new(moduli).unwrap();
            for a in g.codes() {
                assert_eq!(g.spans_codes(&[a]), closure_spans(&g, &[a]));
                for b in g.codes().step_by(if g.order() > 16 { 5 } else { 1 }) {
                    assert_eq!(g.spans_codes(&[a, b]), closure_spans(&g, &[a, b]), "{g} {a} {b}");
                }
            }
        }
    }

    #[test]
    fn phi_values() {
        let expected = [1, 1, 2, 2, 4, 2, 6, 4, 6, 4, 10, 4];
        for (i, &e) in expected.iter().enumerate() {
            assert_eq!(euler_phi(i as u64 + 1), e);
        }
    }
}
