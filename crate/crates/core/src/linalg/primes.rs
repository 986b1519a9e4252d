//! Word-size primality and a reproducible stream of large primes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for all `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// `count` distinct primes in `(2^30, 2^31)` from a seeded generator,
/// skipping divisors of `avoid`.
pub fn random_primes(count: usize, seed: u64, avoid: u64) -> Vec<u32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<u32> = Vec::with_capacity(count);
    while out.len() < count {
        let c = rng.gen_range((1u32 << 30) + 1..(1u32 << 31)) | 1;
        if is_prime(c as u64) && (avoid == 0 || avoid % c as u64 != 0) && !out.contains(&c) {
            out.push(c);
        }
    }
    out
}

/// Default seed for prime selection.
pub const DEFAULT_SEED: u64 = 0x5eed_b1a5;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_primes_match_sieve() {
        let limit = 5000usize;
        let mut sieve = vec![true; limit];
        sieve[0] = false;
        sieve[1] = false;
        for i in 2..limit {
            if sieve[i] {
                for j in (i * i..limit).step_by(i) {
                    sieve[j] = false;
                }
            }
        }
        for (i, &s) in sieve.iter().enumerate() {
            assert_eq!(is_prime(i as u64), s, "{i}");
        }
        assert!(is_prime(2_147_483_647));
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to bases 2,3,5,7
    }

    #[test]
    fn prime_stream_is_reproducible() {
        let a = random_primes(4, 9, 0);
        assert_eq!(a, random_primes(4, 9, 0));
        assert!(a.iter().all(|&p| p > 1 << 30 && is_prime(p as u64)));
        assert_ne!(a, random_primes(4, 10, 0));
    }
}
