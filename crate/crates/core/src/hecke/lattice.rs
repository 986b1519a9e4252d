//! Full-rank lattices between `ℓL` and `(1/ℓ)L`, with `L = Z^n` the
//! standard lattice.

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hecke::intmat::{self, IntMat};
use crate::linalg::primes::is_prime;

/// A lattice with basis rows `numer[i] / denom` in ambient coordinates.
///
/// Bases produced by the enumerators are in row Hermite normal form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Lattice {
    numer: IntMat,
    denom: i64,
}

impl Lattice {
    pub fn standard(n: usize) -> Self {
        Lattice { numer: (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect(), denom: 1 }
    }

    pub fn new(numer: Vec<Vec<i64>>, denom: i64) -> Result<Self> {
        let n = numer.len();
        if denom <= 0 || numer.iter().any(|r| r.len() != n) {
            return Err(Error::DegenerateCone(format!("bad lattice basis ({n} rows, denominator {denom})")));
        }
        let l = Lattice { numer, denom };
        if intmat::det(&l.numer) == 0 {
            return Err(Error::DegenerateCone("singular lattice basis".into()));
        }
        Ok(l)
    }

    pub fn rank(&self) -> usize {
        self.numer.len()
    }

    pub fn denom(&self) -> i64 {
        self.denom
    }

    pub fn numerators(&self) -> &[Vec<i64>] {
        &self.numer
    }

    pub fn basis(&self) -> Vec<Vec<Rational64>> {
        self.numer.iter().map(|r| r.iter().map(|&x| Rational64::new(x, self.denom)).collect()).collect()
    }

    /// Volume of a fundamental domain relative to the standard lattice.
    pub fn covolume(&self) -> Rational64 {
        let d = intmat::det(&self.numer).abs();
        Rational64::new(d, self.denom.pow(self.rank() as u32))
    }

    /// Ambient coordinates of the point with integer coordinates `c` in this basis.
    pub fn ambient(&self, c: &[i64]) -> Vec<Rational64> {
        (0..self.rank())
            .map(|j| Rational64::new(c.iter().zip(&self.numer).map(|(&x, r)| x * r[j]).sum(), self.denom))
            .collect()
    }

    /// Coordinates of an ambient point in this basis (rational in general).
    pub fn coordinates(&self, x: &[Rational64]) -> Vec<Rational64> {
        let d = intmat::det(&self.numer);
        let adj = intmat::adjugate(&self.numer);
        let n = self.rank();
        (0..n)
            .map(|j| {
                let s: Rational64 = (0..n).map(|i| x[i] * adj[i][j]).sum();
                s * Rational64::new(self.denom, d)
            })
            .collect()
    }

    pub fn contains(&self, x: &[Rational64]) -> bool {
        self.coordinates(x).iter().all(|c| c.is_integer())
    }
}

fn check_params(n: usize, ell: u64, r: usize, allow_full: bool) -> Result<()> {
    if !is_prime(ell) {
        return Err(Error::NotPrime(ell));
    }
    let hi = if allow_full { n } else { n.saturating_sub(1) };
    if r < 1 || r > hi {
        return Err(Error::InvalidHecke(format!("r={r} outside 1..={hi} for n={n}")));
    }
    Ok(())
}

/// All `d`-dimensional subspaces of `F_ℓ^n` as reduced row echelon bases.
pub fn subspaces_rref(n: usize, ell: u64, d: usize) -> Vec<IntMat> {
    let mut out = Vec::new();
    let mut pivots = Vec::with_capacity(d);
    choose_pivots(n, d, 0, &mut pivots, &mut |piv| {
        // free slots: row k, non-pivot column to the right of its pivot
        let slots: Vec<(usize, usize)> = piv
            .iter()
            .enumerate()
            .flat_map(|(k, &p)| (p + 1..n).filter(|c| !piv.contains(c)).map(move |c| (k, c)))
            .collect();
        let total = (ell as usize).pow(slots.len() as u32);
        for mut code in 0..total {
            let mut m = vec![vec![0i64; n]; d];
            for (k, &p) in piv.iter().enumerate() {
                m[k][p] = 1;
            }
            for &(k, c) in &slots {
                m[k][c] = (code % ell as usize) as i64;
                code /= ell as usize;
            }
            out.push(m);
        }
    });
    out
}

fn choose_pivots(n: usize, d: usize, start: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if cur.len() == d {
        f(cur);
        return;
    }
    for p in start..n {
        if n - p < d - cur.len() {
            break;
        }
        cur.push(p);
        choose_pivots(n, d, p + 1, cur, f);
        cur.pop();
    }
}

/// Lifts a subspace of `F_ℓ^n` to the lattice `lift(W) + ℓZ^n`, basis in
/// row Hermite normal form.
fn lift_with_ell(n: usize, ell: i64, rref: &IntMat) -> IntMat {
    let pivots: Vec<usize> = rref.iter().map(|r| r.iter().position(|&x| x != 0).unwrap_or(n)).collect();
    let mut rows: Vec<(usize, Vec<i64>)> = rref.iter().cloned().zip(pivots.iter().copied()).map(|(r, p)| (p, r)).collect();
    for j in (0..n).filter(|j| !pivots.contains(j)) {
        let mut v = vec![0i64; n];
        v[j] = ell;
        rows.push((j, v));
    }
    rows.sort_by_key(|(p, _)| *p);
    rows.into_iter().map(|(_, r)| r).collect()
}

/// Lattices `L ⊆ L′ ⊆ (1/ℓ)L` with `L′/L ≅ (Z/ℓ)^r`. With `allow_full`,
/// `r = n` is accepted and yields `(1/ℓ)L` alone.
pub fn enumerate_overlattices(n: usize, ell: u64, r: usize, allow_full: bool) -> Result<Vec<Lattice>> {
    check_params(n, ell, r, allow_full)?;
    Ok(subspaces_rref(n, ell, r)
        .iter()
        .map(|w| Lattice { numer: lift_with_ell(n, ell as i64, w), denom: ell as i64 })
        .collect())
}

/// Lattices `ℓL ⊆ L′ ⊆ L` with `L/L′ ≅ (Z/ℓ)^r`.
pub fn enumerate_sublattices(n: usize, ell: u64, r: usize, allow_full: bool) -> Result<Vec<Lattice>> {
    check_params(n, ell, r, allow_full)?;
    Ok(subspaces_rref(n, ell, n - r)
        .iter()
        .map(|u| Lattice { numer: lift_with_ell(n, ell as i64, u), denom: 1 })
        .collect())
}

/// Gaussian binomial coefficient `[n choose r]_q`.
pub fn gaussian_binomial(n: usize, r: usize, q: u64) -> u64 {
    if r > n {
        return 0;
    }
    let mut num = 1u128;
    let mut den = 1u128;
    for i in 0..r {
        num *= (q as u128).pow((n - i) as u32) - 1;
        den *= (q as u128).pow((i + 1) as u32) - 1;
    }
    (num / den) as u64
}
