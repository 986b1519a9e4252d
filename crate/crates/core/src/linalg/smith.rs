//! Smith normal form: a small `i64` version for span tests on group
//! generators, and an arbitrary-precision version for cokernels.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Nonzero elementary divisors of a small integer matrix, in divisibility
/// order. Entries must stay well inside `i64`; this is only used on
/// matrices of residues.
pub fn small_elementary_divisors(mat: &[Vec<i64>]) -> Vec<i64> {
    if mat.len() <= 4 && mat.iter().all(|r| r.iter().all(|x| x.abs() < 1 << 20)) {
        return small_snf(mat.to_vec());
    }
    let big: Vec<Vec<BigInt>> = mat.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    elementary_divisors(big).into_iter().map(|d| i64::try_from(d).expect("divisor fits i64")).collect()
}

fn small_snf(mut a: Vec<Vec<i64>>) -> Vec<i64> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut diag = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // smallest nonzero entry of the active block as pivot
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if a[i][j] != 0 && best.map_or(true, |(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap(t, pi);
        for r in a.iter_mut() {
            r.swap(t, pj);
        }
        loop {
            let p = a[t][t];
            let mut done = true;
            for i in t + 1..rows {
                let q = a[i][t] / p;
                if q != 0 {
                    for j in t..cols {
                        a[i][j] -= q * a[t][j];
                    }
                }
                if a[i][t] != 0 {
                    done = false;
                }
            }
            for j in t + 1..cols {
                let q = a[t][j] / p;
                if q != 0 {
                    for r in a.iter_mut().skip(t) {
                        r[j] -= q * r[t];
                    }
                }
                if a[t][j] != 0 {
                    done = false;
                }
            }
            if done {
                // divisibility of the rest of the block
                let mut bad = None;
                'outer: for i in t + 1..rows {
                    for j in t + 1..cols {
                        if a[i][j] % p != 0 {
                            bad = Some(i);
                            break 'outer;
                        }
                    }
                }
                match bad {
                    None => break,
                    Some(i) => {
                        for j in t..cols {
                            a[t][j] += a[i][j];
                        }
                        continue;
                    }
                }
            }
            // move the smallest entry of row/column t to the pivot
            let mut bi = (t, t);
            for i in t..rows {
                if a[i][t] != 0 && a[i][t].abs() < a[bi.0][bi.1].abs() {
                    bi = (i, t);
                }
            }
            for j in t..cols {
                if a[t][j] != 0 && a[t][j].abs() < a[bi.0][bi.1].abs() {
                    bi = (t, j);
                }
            }
            a.swap(t, bi.0);
            for r in a.iter_mut() {
                r.swap(t, bi.1);
            }
        }
        diag.push(a[t][t].abs());
        t += 1;
    }
    diag
}

/// Nonzero elementary divisors `d_1 | d_2 | ...` of an integer matrix.
pub fn elementary_divisors(mut a: Vec<Vec<BigInt>>) -> Vec<BigInt> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut diag: Vec<BigInt> = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !a[i][j].is_zero() && best.map_or(true, |(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap(t, pi);
        for r in a.iter_mut() {
            r.swap(t, pj);
        }
        loop {
            let p = a[t][t].clone();
            let mut done = true;
            for i in t + 1..rows {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = a[i][t].div_floor(&p);
                let (head, tail) = a.split_at_mut(i);
                let (pr, r) = (&head[t], &mut tail[0]);
                for j in t..cols {
                    if !pr[j].is_zero() {
                        r[j] -= &q * &pr[j];
                    }
                }
                if !r[t].is_zero() {
                    done = false;
                }
            }
            for j in t + 1..cols {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = a[t][j].div_floor(&p);
                for r in a.iter_mut().skip(t) {
                    if !r[t].is_zero() {
                        let v = &q * &r[t];
                        r[j] -= v;
                    }
                }
                if !a[t][j].is_zero() {
                    done = false;
                }
            }
            if done {
                let mut bad = None;
                'outer: for i in t + 1..rows {
                    for j in t + 1..cols {
                        if !a[i][j].is_multiple_of(&p) {
                            bad = Some(i);
                            break 'outer;
                        }
                    }
                }
                match bad {
                    None => break,
                    Some(i) => {
                        let (head, tail) = a.split_at_mut(i);
                        for j in t..cols {
                            let v = tail[0][j].clone();
                            head[t][j] += v;
                        }
                        continue;
                    }
                }
            }
            let mut bi = (t, t);
            for i in t..rows {
                if !a[i][t].is_zero() && a[i][t].abs() < a[bi.0][bi.1].abs() {
                    bi = (i, t);
                }
            }
            for j in t..cols {
                if !a[t][j].is_zero() && a[t][j].abs() < a[bi.0][bi.1].abs() {
                    bi = (t, j);
                }
            }
            a.swap(t, bi.0);
            for r in a.iter_mut() {
                r.swap(t, bi.1);
            }
        }
        diag.push(a[t][t].abs());
        t += 1;
    }
    debug_assert!(diag.windows(2).all(|w| w[1].is_multiple_of(&w[0])));
    diag
}

/// Product of the elementary divisors, i.e. the gcd of the maximal
/// nonvanishing minors up to sign.
pub fn divisor_product(divs: &[BigInt]) -> BigInt {
    divs.iter().fold(BigInt::one(), |acc, d| acc * d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn det(m: &[Vec<i64>]) -> i64 {
        let n = m.len();
        if n == 1 {
            return m[0][0];
        }
        let mut s = 0;
        for j in 0..n {
            let minor: Vec<Vec<i64>> = m[1..].iter().map(|r| r.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &x)| x).collect()).collect();
            let sign = if j % 2 == 0 { 1 } else { -1 };
            s += sign * m[0][j] * det(&minor);
        }
        s
    }

    fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![vec![]];
        }
        if n < k {
            return vec![];
        }
        let mut out = subsets(n - 1, k);
        for mut s in subsets(n - 1, k - 1) {
            s.push(n - 1);
            out.push(s);
        }
        out
    }

    /// gcd of all k x k minors, for the largest k with a nonzero minor.
    fn minor_gcd_oracle(m: &[Vec<i64>]) -> (usize, i64) {
        let rows = m.len();
        let cols = m[0].len();
        for k in (1..=rows.min(cols)).rev() {
            let mut g = 0i64;
            for rs in subsets(rows, k) {
                for cs in subsets(cols, k) {
                    let sub: Vec<Vec<i64>> = rs.iter().map(|&i| cs.iter().map(|&j| m[i][j]).collect()).collect();
                    g = g.gcd(&det(&sub));
                }
            }
            if g != 0 {
                return (k, g);
            }
        }
        (0, 1)
    }

    #[test]
    fn diag_pattern() {
        let m = vec![vec![2, 0], vec![0, 6]];
        assert_eq!(small_elementary_divisors(&m), vec![2, 6]);
        let m = vec![vec![BigInt::from(6), BigInt::from(0)], vec![BigInt::from(0), BigInt::from(4)]];
        assert_eq!(elementary_divisors(m), vec![BigInt::from(2), BigInt::from(12)]);
    }

    #[test]
    fn product_matches_minor_gcd() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let rows = rng.gen_range(1..=6);
            let cols = rng.gen_range(1..=6);
            let m: Vec<Vec<i64>> =
                (0..rows).map(|_| (0..cols).map(|_| if rng.gen_bool(0.3) { 0 } else { rng.gen_range(-9..=9) }).collect()).collect();
            let (rank, g) = minor_gcd_oracle(&m);
            let big: Vec<Vec<BigInt>> = m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
            let d = elementary_divisors(big);
            assert_eq!(d.len(), rank, "{m:?}");
            assert_eq!(divisor_product(&d), BigInt::from(g.abs()), "{m:?}");
            let small = small_elementary_divisors(&m);
            assert_eq!(small.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>(), d);
        }
    }

    #[test]
    fn eight_by_eight() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let m: Vec<Vec<i64>> = (0..8).map(|_| (0..8).map(|_| rng.gen_range(-3..=3)).collect()).collect();
            let big: Vec<Vec<BigInt>> = m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
            let d = elementary_divisors(big);
            let dt = det(&m);
            if dt != 0 {
                assert_eq!(d.len(), 8);
                assert_eq!(divisor_product(&d), BigInt::from(dt.abs()));
            }
        }
    }
}
