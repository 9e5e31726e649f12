//! Prime sieve, primality and trial-division factorization.
//!
//! Every integer this crate factors has small prime support by construction
//! (family denominators are products of chosen primes), so trial division
//! against a cached sieve is all that is needed.

use std::sync::OnceLock;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

const CACHE_LIMIT: u64 = 1 << 20;

fn cached() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| sieve_primes(CACHE_LIMIT))
}

/// All primes `<= limit` in ascending order (sieve of Eratosthenes).
pub fn sieve_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        primes.push(i as u64);
        let mut j = i.saturating_mul(i);
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    primes
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n <= CACHE_LIMIT {
        return cached().binary_search(&n).is_ok();
    }
    for &p in cached() {
        if p * p > n {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let mut f = CACHE_LIMIT + 1;
    while f.saturating_mul(f) <= n {
        if n.is_multiple_of(f) {
            return false;
        }
        f += 2;
    }
    true
}

/// The `n`-th odd prime, 1-based: `nth_odd_prime(1) == 3`.
pub fn nth_odd_prime(n: usize) -> u64 {
    assert!(n >= 1, "odd primes are indexed from 1");
    if let Some(&p) = cached().get(n) {
        return p;
    }
    let mut count = cached().len() - 1;
    let mut candidate = CACHE_LIMIT + 1;
    loop {
        if is_prime(candidate) {
            count += 1;
            if count == n {
                return candidate;
            }
        }
        candidate += 2;
    }
}

/// Prime factorization of a positive integer as ascending `(prime, multiplicity)`.
/// Returns an empty list for 1. Panics on 0.
pub fn factorize(n: &BigUint) -> Vec<(u64, u32)> {
    assert!(!n.is_zero(), "cannot factor zero");
    let mut rest = n.clone();
    let mut out = Vec::new();
    let mut push = |rest: &mut BigUint, p: u64| {
        let pb = BigUint::from(p);
        let mut k = 0;
        loop {
            let (q, r) = rest.div_rem(&pb);
            if !r.is_zero() {
                break;
            }
            *rest = q;
            k += 1;
        }
        if k > 0 {
            out.push((p, k));
        }
    };
    for &p in cached() {
        if rest.is_one() {
            return out;
        }
        if let Some(r) = rest.to_u64() {
            if p.saturating_mul(p) > r {
                out.push((r, 1));
                return out;
            }
        }
        push(&mut rest, p);
    }
    let mut f = CACHE_LIMIT + 1;
    while !rest.is_one() {
        if let Some(r) = rest.to_u64() {
            if f.saturating_mul(f) > r {
                out.push((r, 1));
                break;
            }
        }
        push(&mut rest, f);
        f += 2;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sieve_small_limits() {
        assert_eq!(sieve_primes(10), vec![2, 3, 5, 7]);
        assert_eq!(sieve_primes(2), vec![2]);
        let thirty = sieve_primes(30);
        assert_eq!(thirty.len(), 10);
        assert_eq!(*thirty.last().unwrap(), 29);
        assert!(sieve_primes(1).is_empty());
    }

    #[test]
    fn primality_matches_naive() {
        let naive = |n: u64| {
            n >= 2
                && (2..n)
                    .take_while(|d| d * d <= n)
                    .all(|d| !n.is_multiple_of(d))
        };
        for n in 0..5000 {
            assert_eq!(is_prime(n), naive(n), "n = {n}");
        }
        assert!(is_prime(1_000_003));
        assert!(!is_prime(1_000_001));
    }

    #[test]
    fn odd_prime_indexing() {
        assert_eq!(nth_odd_prime(1), 3);
        assert_eq!(nth_odd_prime(2), 5);
        assert_eq!(nth_odd_prime(10), 31);
        assert_eq!(nth_odd_prime(11), 37);
    }

    #[test]
    fn factorization() {
        assert_eq!(
            factorize(&BigUint::from(900u32)),
            vec![(2, 2), (3, 2), (5, 2)]
        );
        assert_eq!(factorize(&BigUint::from(1u32)), vec![]);
        let n = BigUint::from(176400u32);
        let f = factorize(&n);
        let back = f
            .iter()
            .fold(BigUint::one(), |acc, &(p, k)| acc * BigUint::from(p).pow(k));
        assert_eq!(back, n);
        assert_eq!(f, vec![(2, 4), (3, 2), (5, 2), (7, 2)]);
        // A prime above the cache limit.
        let big = BigUint::from(1_000_003u64) * BigUint::from(9u32);
        assert_eq!(factorize(&big), vec![(3, 2), (1_000_003, 1)]);
    }
}
