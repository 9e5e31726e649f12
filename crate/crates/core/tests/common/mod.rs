//! Independent brute-force oracles. They share no code with the library:
//! rationals are reduced `(i128, i128)` pairs and primality is trial division.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use num_integer::Integer;
use preper::{PrePerGraph, Rational};

/// Orbits whose numerator or denominator exceed this are treated as escaping.
pub const HEIGHT_CUTOFF: i128 = 10_000_000_000_000;
pub const MAX_STEPS: usize = 200;

pub type Q = (i128, i128);

fn reduce(n: i128, d: i128) -> Q {
    let g = n.gcd(&d);
    let (n, d) = (n / g, d / g);
    if d < 0 {
        (-n, -d)
    } else {
        (n, d)
    }
}

/// `x^2 + c`, or `None` past the height cutoff.
fn step(x: Q, c: Q) -> Option<Q> {
    let (a, b) = x;
    let (p, q) = c;
    let num = a
        .checked_mul(a)?
        .checked_mul(q)?
        .checked_add(p.checked_mul(b.checked_mul(b)?)?)?;
    let den = b.checked_mul(b)?.checked_mul(q)?;
    let (n, d) = reduce(num, den);
    (n.abs() <= HEIGHT_CUTOFF && d <= HEIGHT_CUTOFF).then_some((n, d))
}

/// Preperiodic points among `u/e` (lowest terms) for `e` in `denominators`
/// and `|u| <= 10 e`, found by iterating each for up to 200 steps.
/// Returns every preperiodic point met, mapped to its image.
pub fn oracle_preper(c: Q, denominators: &[i128]) -> BTreeMap<Q, Q> {
    let c = reduce(c.0, c.1);
    let mut preper: HashMap<Q, Q> = HashMap::new();
    let mut escaped: HashMap<Q, ()> = HashMap::new();
    for &e in denominators {
        for u in -10 * e..=10 * e {
            if u.gcd(&e) != 1 {
                continue;
            }
            let mut orbit: Vec<Q> = vec![(u, e)];
            let mut seen: HashMap<Q, usize> = HashMap::from([((u, e), 0)]);
            let mut periodic = false;
            for _ in 0..MAX_STEPS {
                let x = *orbit.last().expect("nonempty");
                if preper.contains_key(&x) {
                    periodic = true;
                    break;
                }
                if escaped.contains_key(&x) {
                    break;
                }
                let Some(y) = step(x, c) else { break };
                if seen.contains_key(&y) {
                    periodic = true;
                    orbit.push(y);
                    break;
                }
                seen.insert(y, orbit.len());
                orbit.push(y);
            }
            for &x in &orbit {
                if periodic {
                    let y = step(x, c).expect("preperiodic orbits stay small");
                    preper.insert(x, y);
                } else {
                    escaped.insert(x, ());
                }
            }
        }
    }
    preper.into_iter().collect()
}

pub fn to_q(x: &Rational) -> Q {
    let n: i128 = x.numer().try_into().expect("fits in i128");
    let d: i128 = x.denom().try_into().expect("fits in i128");
    (n, d)
}

pub fn to_rational(x: Q) -> Rational {
    Rational::new(x.0, x.1).expect("nonzero denominator")
}

/// The library graph as an oracle-style successor map.
pub fn graph_map(g: &PrePerGraph) -> BTreeMap<Q, Q> {
    g.edges().map(|(a, b)| (to_q(a), to_q(b))).collect()
}

pub fn oracle_graph(map: &BTreeMap<Q, Q>) -> PrePerGraph {
    PrePerGraph::from_successors(
        map.iter()
            .map(|(&a, &b)| (to_rational(a), to_rational(b)))
            .collect(),
    )
    .expect("oracle orbits are closed")
}

pub fn is_prime_naive(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= n {
        if n.is_multiple_of(k) {
            return false;
        }
        k += 1;
    }
    true
}

/// Least `(p, k)` with `p, p+k, p+2k` prime, `N < p`, `p + 2k < 2N`.
pub fn oracle_ap3(n: u64) -> Option<(u64, u64, u64)> {
    for p in n + 1..2 * n {
        for k in 1.. {
            if p + 2 * k >= 2 * n {
                break;
            }
            if is_prime_naive(p) && is_prime_naive(p + k) && is_prime_naive(p + 2 * k) {
                return Some((p, p + k, p + 2 * k));
            }
        }
    }
    None
}
