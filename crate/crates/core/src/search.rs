//! Exact computation of the rational preperiodic points of `z^2 + c`.
//!
//! The candidate set comes from three local facts about the filled Julia
//! set of `z^2 + c`:
//!
//! * at a prime `p` with `|c|_p <= 1` it is the closed unit disk;
//! * at a prime `p` with `|c|_p > 1` every point has `|x|_p = |c|_p^(1/2)`;
//! * for real `c <= 1/4` its real points satisfy `|x| <= 1/2 + sqrt(1/4 - c)`.
//!
//! So when `c = m/d^2` in lowest terms, every rational preperiodic point is
//! `u/d` in lowest terms with `|u| <= (d + sqrt(d^2 - 4m)) / 2`.
//!
//! Two emptiness rules follow. If the denominator of `c` is not a square, some
//! prime has odd `v_p(c) < 0` and no rational `x` can have `v_p(x) = v_p(c)/2`.
//! If `c > 1/4` then `f(x) - x = (x - 1/2)^2 + (c - 1/4) > c - 1/4 > 0`, so every
//! real orbit increases without bound.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::{floor_isqrt, is_perfect_square, Rational};
use crate::dynamics::{orbit_detect, Orbit, QuadMap};
use crate::graph::PrePerGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EmptyReason {
    /// `c > 1/4`: no real orbit is bounded.
    AboveQuarter,
    /// The denominator of `c` is not a perfect square.
    NonSquareDenominator,
}

/// The finite set `{u/d : |u| <= bound, gcd(u, d) = 1}` that contains every
/// rational preperiodic point, or the reason it is empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateProfile {
    /// Common denominator, `den(c) = d^2`. Zero when empty.
    pub d: BigInt,
    /// Numerator of `c = m/d^2`. Zero when empty.
    pub m: BigInt,
    /// Numerator bound `U`.
    pub bound: BigInt,
    pub empty_reason: Option<EmptyReason>,
}

pub fn candidate_profile(c: &Rational) -> CandidateProfile {
    let empty = |reason| CandidateProfile {
        d: BigInt::zero(),
        m: BigInt::zero(),
        bound: BigInt::zero(),
        empty_reason: Some(reason),
    };
    if c > &Rational::new(1, 4).expect("nonzero denominator") {
        return empty(EmptyReason::AboveQuarter);
    }
    let d = match is_perfect_square(c.denom()).expect("denominators are positive") {
        Some(d) => d,
        None => return empty(EmptyReason::NonSquareDenominator),
    };
    let m = c.numer().clone();
    // c <= 1/4 makes the discriminant nonnegative.
    let disc = &d * &d - &m * 4;
    let s = floor_isqrt(&disc).expect("c <= 1/4");
    let bound = (&d + s).div_floor(&BigInt::from(2));
    CandidateProfile {
        d,
        m,
        bound,
        empty_reason: None,
    }
}

impl CandidateProfile {
    pub fn is_empty(&self) -> bool {
        self.empty_reason.is_some()
    }

    /// Membership in the candidate set: `x = u/d` in lowest terms, `|u| <= U`.
    pub fn contains(&self, x: &Rational) -> bool {
        !self.is_empty() && x.denom() == &self.d && x.numer().abs() <= self.bound
    }

    /// Every candidate, ascending.
    pub fn candidates(&self) -> Vec<Rational> {
        if self.is_empty() {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut u = -self.bound.clone();
        while u <= self.bound {
            if u.gcd(&self.d).is_one() {
                out.push(Rational::new(u.clone(), self.d.clone()).expect("d >= 1"));
            }
            u += 1;
        }
        out
    }

    pub fn len(&self) -> usize {
        self.candidates().len()
    }

    /// Candidates whose image is again of the form `u'/d`, i.e. `d | u^2 + m`.
    ///
    /// Any other candidate leaves the candidate set after one step, which is
    /// exactly what `orbit_detect` would conclude, so the full orbit search
    /// only needs these. Residues `r` with `r^2 = -m (mod d)` are found by a
    /// scan modulo `d`.
    fn first_step_survivors(&self) -> Vec<BigInt> {
        if self.is_empty() {
            return Vec::new();
        }
        let (Some(d), Some(_)) = (self.d.to_u64(), self.bound.to_i64()) else {
            return self
                .candidates()
                .into_iter()
                .map(|x| x.numer().clone())
                .filter(|u| (u * u + &self.m).mod_floor(&self.d).is_zero())
                .collect();
        };
        let target = (-&self.m)
            .mod_floor(&self.d)
            .to_u64()
            .expect("reduced mod d");
        let d128 = u128::from(d);
        let residues: Vec<u64> = (0..d)
            .filter(|&r| (u128::from(r) * u128::from(r)) % d128 == u128::from(target))
            .collect();
        let bound = self.bound.to_i64().expect("checked above");
        let d_i = d as i128;
        let mut out = Vec::new();
        for r in residues {
            // Smallest u >= -bound with u = r (mod d).
            let lo = -(bound as i128);
            let mut u = lo + (r as i128 - lo).rem_euclid(d_i);
            while u <= bound as i128 {
                if u.unsigned_abs().gcd(&(d as u128)) == 1 {
                    out.push(BigInt::from(u));
                }
                u += d_i;
            }
        }
        out.sort();
        out
    }
}

/// `PrePer(f_c, Q)` as a functional graph.
pub fn compute_preper(c: &Rational) -> PrePerGraph {
    let profile = candidate_profile(c);
    let f = QuadMap::new(c.clone());
    let mut succ = BTreeMap::new();
    for u in profile.first_step_survivors() {
        let x = Rational::new(u, profile.d.clone()).expect("d >= 1");
        if succ.contains_key(&x) {
            continue;
        }
        if let Orbit::Preperiodic(info) = orbit_detect(&f, &x, |y| profile.contains(y)) {
            for y in info.tail.iter().chain(info.cycle.iter()) {
                succ.insert(y.clone(), f.evaluate(y));
            }
        }
    }
    PrePerGraph::from_successors(succ).expect("orbits are forward closed")
}
