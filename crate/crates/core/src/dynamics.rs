//! Iteration of `f_c(z) = z^2 + c` and orbit decomposition.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::arith::Rational;

/// The quadratic map `z -> z^2 + c`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuadMap {
    c: Rational,
}

impl QuadMap {
    pub fn new(c: Rational) -> Self {
        QuadMap { c }
    }

    pub fn c(&self) -> &Rational {
        &self.c
    }

    pub fn evaluate(&self, x: &Rational) -> Rational {
        x.square() + &self.c
    }

    /// `f^n(x)`.
    pub fn iterate(&self, x: &Rational, n: usize) -> Rational {
        (0..n).fold(x.clone(), |acc, _| self.evaluate(&acc))
    }

    pub fn as_monic(&self) -> MonicPoly {
        MonicPoly::new(vec![self.c.clone(), Rational::zero()]).expect("degree 2")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("a monic polynomial here needs degree at least 2, got {0}")]
pub struct DegreeError(pub usize);

/// `z^d + coeffs[d-1] z^(d-1) + ... + coeffs[0]`, with `d >= 2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonicPoly {
    coeffs: Vec<Rational>,
}

impl MonicPoly {
    pub fn new(coeffs: Vec<Rational>) -> Result<Self, DegreeError> {
        if coeffs.len() < 2 {
            return Err(DegreeError(coeffs.len()));
        }
        Ok(MonicPoly { coeffs })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn evaluate(&self, x: &Rational) -> Rational {
        // Horner, starting from the implicit leading 1.
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::one(), |acc, a| acc * x + a)
    }
}

/// Tail-then-cycle decomposition of a finite forward orbit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrbitInfo {
    pub tail: Vec<Rational>,
    pub cycle: Vec<Rational>,
}

/// `x` has type `a_b`: `f^b(x)` lies on an `a`-cycle and `f^(b-1)(x)` does not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct OrbitType {
    pub cycle_len: usize,
    pub tail_len: usize,
}

impl OrbitInfo {
    pub fn orbit_type(&self) -> OrbitType {
        OrbitType {
            cycle_len: self.cycle.len(),
            tail_len: self.tail.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Orbit {
    Preperiodic(OrbitInfo),
    /// Some iterate left the candidate set, so `x` is not preperiodic.
    Escaped,
}

impl Orbit {
    pub fn info(&self) -> Option<&OrbitInfo> {
        match self {
            Orbit::Preperiodic(info) => Some(info),
            Orbit::Escaped => None,
        }
    }
}

/// Follows the orbit of `x` while it stays inside the candidate set.
///
/// `in_candidates` must describe a finite set containing every rational
/// preperiodic point. Since that set is forward invariant, an orbit that
/// leaves the candidate set is not preperiodic, and an orbit that stays
/// inside it must repeat within `|S| + 1` steps.
pub fn orbit_detect<F>(f: &QuadMap, x: &Rational, in_candidates: F) -> Orbit
where
    F: Fn(&Rational) -> bool,
{
    let mut seen: HashMap<Rational, usize> = HashMap::new();
    let mut path: Vec<Rational> = Vec::new();
    let mut current = x.clone();
    loop {
        if !in_candidates(&current) {
            return Orbit::Escaped;
        }
        if let Some(&start) = seen.get(&current) {
            let cycle = path.split_off(start);
            return Orbit::Preperiodic(OrbitInfo { tail: path, cycle });
        }
        seen.insert(current.clone(), path.len());
        let next = f.evaluate(&current);
        path.push(current);
        current = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rational {
        rat(n, d).unwrap()
    }

    /// Exact small sets, used as candidate sets in these tests.
    fn within(bound: i64, den: i64) -> impl Fn(&Rational) -> bool {
        move |x: &Rational| {
            let scaled = x * &r(den, 1);
            scaled.is_integer() && scaled.abs() <= r(bound, 1)
        }
    }

    #[test]
    fn evaluation() {
        assert_eq!(QuadMap::new(r(5, 36)).evaluate(&r(-5, 6)), r(5, 6));
        assert_eq!(QuadMap::new(r(0, 1)).evaluate(&r(0, 1)), r(0, 1));
        assert_eq!(QuadMap::new(r(-931, 900)).evaluate(&r(1, 30)), r(-31, 30));
        assert_eq!(QuadMap::new(r(-1, 1)).iterate(&r(1, 1), 3), r(0, 1));
    }

    #[test]
    fn monic_polynomials() {
        assert_eq!(MonicPoly::new(vec![r(1, 1)]), Err(DegreeError(1)));
        let f = QuadMap::new(r(-31, 36));
        let g = f.as_monic();
        assert_eq!(g.degree(), 2);
        for x in [r(1, 6), r(-5, 6), r(7, 3)] {
            assert_eq!(g.evaluate(&x), f.evaluate(&x));
        }
        // z^3 - 2z + 1 at z = 2 is 5.
        let cubic = MonicPoly::new(vec![r(1, 1), r(-2, 1), r(0, 1)]).unwrap();
        assert_eq!(cubic.evaluate(&r(2, 1)), r(5, 1));
    }

    #[test]
    fn orbit_examples() {
        let f = QuadMap::new(r(-1, 1));
        let o = orbit_detect(&f, &r(0, 1), within(1, 1));
        assert_eq!(
            o,
            Orbit::Preperiodic(OrbitInfo {
                tail: vec![],
                cycle: vec![r(0, 1), r(-1, 1)]
            })
        );
        let o = orbit_detect(&f, &r(1, 1), within(1, 1));
        assert_eq!(
            o.info().unwrap().orbit_type(),
            OrbitType {
                cycle_len: 2,
                tail_len: 1
            }
        );

        let g = QuadMap::new(r(0, 1));
        let o = orbit_detect(&g, &r(-1, 1), within(1, 1));
        assert_eq!(
            o,
            Orbit::Preperiodic(OrbitInfo {
                tail: vec![r(-1, 1)],
                cycle: vec![r(1, 1)]
            })
        );
        let o = orbit_detect(&g, &r(0, 1), within(1, 1));
        assert_eq!(
            o.info().unwrap().orbit_type(),
            OrbitType {
                cycle_len: 1,
                tail_len: 0
            }
        );

        let h = QuadMap::new(r(5, 36));
        let o = orbit_detect(&h, &r(-5, 6), within(5, 6));
        assert_eq!(
            o.info().unwrap().orbit_type(),
            OrbitType {
                cycle_len: 1,
                tail_len: 1
            }
        );

        // c = 1/3 admits no candidates at all.
        let k = QuadMap::new(r(1, 3));
        assert_eq!(orbit_detect(&k, &r(1, 2), |_| false), Orbit::Escaped);
        // Escape after leaving a generous box.
        assert_eq!(orbit_detect(&g, &r(2, 1), within(100, 1)), Orbit::Escaped);
    }

    proptest! {
        #[test]
        fn negation_symmetry(n in -10_000i64..10_000, d in 1i64..10_000, cn in -100i64..100, cd in 1i64..100) {
            let f = QuadMap::new(r(cn, cd));
            let x = r(n, d);
            prop_assert_eq!(f.evaluate(&x), f.evaluate(&-&x));
        }

        #[test]
        fn forward_invariance(u in -20i64..=20, m in -60i64..=60, d in 1i64..=6) {
            let f = QuadMap::new(r(m, d * d));
            let cand = within(20, d);
            let x = r(u, d);
            if let Orbit::Preperiodic(info) = orbit_detect(&f, &x, &cand) {
                let next = orbit_detect(&f, &f.evaluate(&x), &cand);
                let t = info.orbit_type();
                prop_assert_eq!(
                    next.info().map(|i| i.orbit_type()),
                    Some(OrbitType { cycle_len: t.cycle_len, tail_len: t.tail_len.saturating_sub(1) })
                );
                // Determinism.
                prop_assert_eq!(orbit_detect(&f, &x, &cand), Orbit::Preperiodic(info));
            }
        }
    }
}
