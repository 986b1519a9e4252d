//! Small dense matrices over `F_p`: products, determinants and
//! characteristic polynomials.

use crate::error::{Error, Result};
use crate::linalg::modp::inv_mod;
use crate::linalg::primes::is_prime;

pub type DenseMatrix = Vec<Vec<u32>>;

#[inline]
fn mulm(a: u32, b: u32, p: u32) -> u32 {
    ((a as u64 * b as u64) % p as u64) as u32
}

#[inline]
fn subm(a: u32, b: u32, p: u32) -> u32 {
    if a >= b {
        a - b
    } else {
        a + (p - b)
    }
}

fn square_dim(a: &DenseMatrix) -> Result<usize> {
    let n = a.len();
    if let Some(r) = a.iter().find(|r| r.len() != n) {
        return Err(Error::NotSquare { rows: n, cols: r.len() });
    }
    Ok(n)
}

pub fn identity(n: usize) -> DenseMatrix {
    (0..n).map(|i| (0..n).map(|j| u32::from(i == j)).collect()).collect()
}

pub fn mat_mul(a: &DenseMatrix, b: &DenseMatrix, p: u32) -> DenseMatrix {
    let n = a.len();
    let m = b.first().map_or(0, |r| r.len());
    let mut c = vec![vec![0u32; m]; n];
    for i in 0..n {
        for (k, &aik) in a[i].iter().enumerate() {
            if aik == 0 {
                continue;
            }
            for j in 0..m {
                c[i][j] = ((c[i][j] as u64 + aik as u64 * b[k][j] as u64) % p as u64) as u32;
            }
        }
    }
    c
}

/// `AB - BA`.
pub fn commutator(a: &DenseMatrix, b: &DenseMatrix, p: u32) -> DenseMatrix {
    let ab = mat_mul(a, b, p);
    let ba = mat_mul(b, a, p);
    ab.iter().zip(&ba).map(|(x, y)| x.iter().zip(y).map(|(&u, &v)| subm(u, v, p)).collect()).collect()
}

pub fn is_zero(a: &DenseMatrix) -> bool {
    a.iter().all(|r| r.iter().all(|&x| x == 0))
}

pub fn det_mod_p(a: &DenseMatrix, p: u32) -> Result<u32> {
    let n = square_dim(a)?;
    let mut m = a.clone();
    let mut det = 1u32;
    for c in 0..n {
        let Some(piv) = (c..n).find(|&i| m[i][c] != 0) else { return Ok(0) };
        if piv != c {
            m.swap(piv, c);
            det = subm(0, det, p);
        }
        det = mulm(det, m[c][c], p);
        let inv = inv_mod(m[c][c], p);
        for i in c + 1..n {
            if m[i][c] != 0 {
                let f = mulm(m[i][c], inv, p);
                for j in c..n {
                    let t = mulm(f, m[c][j], p);
                    m[i][j] = subm(m[i][j], t, p);
                }
            }
        }
    }
    Ok(det)
}

/// Characteristic polynomial `det(xI - A)` as coefficients `[c_0, ..., c_n]`
/// (constant term first, `c_n = 1`), via reduction to Hessenberg form.
pub fn charpoly_mod_p(a: &DenseMatrix, p: u32) -> Result<Vec<u32>> {
    let n = square_dim(a)?;
    if !is_prime(p as u64) {
        return Err(Error::NotPrime(p as u64));
    }
    let mut h: DenseMatrix = a.iter().map(|r| r.iter().map(|&x| x % p).collect()).collect();
    for j in 0..n.saturating_sub(2) {
        let Some(i) = (j + 1..n).find(|&i| h[i][j] != 0) else { continue };
        if i != j + 1 {
            h.swap(i, j + 1);
            for row in h.iter_mut() {
                row.swap(i, j + 1);
            }
        }
        let inv = inv_mod(h[j + 1][j], p);
        for k in j + 2..n {
            if h[k][j] == 0 {
                continue;
            }
            let u = mulm(h[k][j], inv, p);
            for c in 0..n {
                let t = mulm(u, h[j + 1][c], p);
                h[k][c] = subm(h[k][c], t, p);
            }
            for row in h.iter_mut() {
                let t = mulm(u, row[k], p);
                row[j + 1] = ((row[j + 1] as u64 + t as u64) % p as u64) as u32;
            }
        }
    }
    // polys[m] = charpoly of the leading m x m block
    let mut polys: Vec<Vec<u32>> = vec![vec![1]];
    for m in 1..=n {
        let mut next = vec![0u32; m + 1];
        let prev = &polys[m - 1];
        let hmm = h[m - 1][m - 1];
        for (d, &c) in prev.iter().enumerate() {
            next[d + 1] = (next[d + 1] + c) % p;
            next[d] = subm(next[d], mulm(hmm, c, p), p);
        }
        let mut prod = 1u32;
        for i in (1..m).rev() {
            prod = mulm(prod, h[i][i - 1], p);
            let coef = mulm(h[i - 1][m - 1], prod, p);
            if coef == 0 {
                continue;
            }
            for (d, &c) in polys[i - 1].iter().enumerate() {
                next[d] = subm(next[d], mulm(coef, c, p), p);
            }
        }
        polys.push(next);
    }
    Ok(polys.pop().unwrap_or_else(|| vec![1]))
}

/// Evaluates a polynomial given constant term first.
pub fn eval_poly(c: &[u32], x: u32, p: u32) -> u32 {
    c.iter().rev().fold(0u32, |acc, &a| ((mulm(acc, x, p) as u64 + a as u64) % p as u64) as u32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn trivial_polys() {
        let p = 101;
        assert_eq!(charpoly_mod_p(&vec![vec![0, 0], vec![0, 0]], p).unwrap(), vec![0, 0, 1]);
        // (x-1)^3 = x^3 - 3x^2 + 3x - 1
        assert_eq!(charpoly_mod_p(&identity(3), p).unwrap(), vec![p - 1, 3, p - 3, 1]);
        assert_eq!(charpoly_mod_p(&vec![], p).unwrap(), vec![1]);
        assert!(matches!(charpoly_mod_p(&vec![vec![1, 2]], p), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn matches_determinant_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for p in [2u32, 7, 10_007] {
            for _ in 0..50 {
                let n = rng.gen_range(1..8);
                let a: DenseMatrix = (0..n).map(|_| (0..n).map(|_| if rng.gen_bool(0.4) { 0 } else { rng.gen_range(0..p) }).collect()).collect();
                let cp = charpoly_mod_p(&a, p).unwrap();
                assert_eq!(cp.len(), n + 1);
                for _ in 0..5 {
                    let t = rng.gen_range(0..p);
                    let shifted: DenseMatrix =
                        (0..n).map(|i| (0..n).map(|j| subm(if i == j { t } else { 0 }, a[i][j], p)).collect()).collect();
                    assert_eq!(eval_poly(&cp, t, p), det_mod_p(&shifted, p).unwrap());
                }
            }
        }
    }

    #[test]
    fn commutator_of_powers_vanishes() {
        let p = 13;
        let a = vec![vec![1, 2, 0], vec![3, 4, 5], vec![0, 6, 7]];
        let a2 = mat_mul(&a, &a, p);
        assert!(is_zero(&commutator(&a, &a2, p)));
        let b = vec![vec![0, 1, 0], vec![0, 0, 0], vec![0, 0, 0]];
        assert!(!is_zero(&commutator(&a, &b, p)));
    }
}
