//! The six infinite parameter families and the empty family.
//!
//! Each family substitutes a ratio of primes into a rational parametrization
//! of `c` whose denominator is controlled by those primes, together with the
//! closed-form preperiodic points that come with the parametrization.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::Serialize;
use thiserror::Error;

use crate::arith::Rational;
use crate::benedetto::{partition, TrickBound};
use crate::dynamics::QuadMap;
use crate::graph::{GraphLabel, PrePerGraph};
use crate::primes::{is_prime, nth_odd_prime};
use crate::search::compute_preper;

pub use crate::primes::sieve_primes;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FamilyTag {
    F4_11,
    F4_2,
    F6_11,
    F6_2,
    F6_3,
    F8_211,
    Empty,
}

impl FamilyTag {
    pub const ALL: [FamilyTag; 7] = [
        FamilyTag::F4_11,
        FamilyTag::F4_2,
        FamilyTag::F6_11,
        FamilyTag::F6_2,
        FamilyTag::F6_3,
        FamilyTag::F8_211,
        FamilyTag::Empty,
    ];

    /// Graph name, also the CLI spelling.
    pub fn name(self) -> &'static str {
        match self {
            FamilyTag::F4_11 => "4(1,1)",
            FamilyTag::F4_2 => "4(2)",
            FamilyTag::F6_11 => "6(1,1)",
            FamilyTag::F6_2 => "6(2)",
            FamilyTag::F6_3 => "6(3)",
            FamilyTag::F8_211 => "8(2,1,1)",
            FamilyTag::Empty => "empty",
        }
    }

    /// Label of the graph the family realizes.
    pub fn expected_label(self) -> &'static str {
        match self {
            FamilyTag::Empty => "0",
            other => other.name(),
        }
    }

    /// Odd primes whose denominators feed the trick bound.
    pub fn bad_prime_count(self) -> usize {
        match self {
            FamilyTag::F4_11 | FamilyTag::F4_2 => 1,
            FamilyTag::F6_11 | FamilyTag::F6_2 | FamilyTag::F8_211 => 2,
            FamilyTag::F6_3 => 3,
            FamilyTag::Empty => 0,
        }
    }
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for FamilyTag {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl FromStr for FamilyTag {
    type Err = FamilyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FamilyTag::ALL
            .into_iter()
            .find(|t| t.name() == s.trim())
            .ok_or_else(|| FamilyError::UnknownFamily(s.to_string()))
    }
}

/// Prime inputs of a family instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum FamilyInputs {
    Prime(u64),
    Pair(u64, u64),
    /// `low < (low + high)/2 < high`, all prime; the middle term is derived.
    Progression {
        low: u64,
        high: u64,
    },
}

impl FamilyInputs {
    pub fn primes(&self) -> Vec<u64> {
        match *self {
            FamilyInputs::Prime(p) => vec![p],
            FamilyInputs::Pair(p, q) => vec![p, q],
            FamilyInputs::Progression { low, high } => vec![low, (low + high) / 2, high],
        }
    }
}

impl fmt::Display for FamilyInputs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ps: Vec<String> = self.primes().iter().map(u64::to_string).collect();
        write!(f, "({})", ps.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error("unknown family {0:?}")]
    UnknownFamily(String),
    #[error("family {tag} takes {expected}, got {got}")]
    Arity {
        tag: FamilyTag,
        expected: &'static str,
        got: FamilyInputs,
    },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("family {0} needs odd primes")]
    EvenPrime(FamilyTag),
    #[error("the two primes must differ, got {0} twice")]
    EqualPrimes(u64),
    #[error("{low}, {mid}, {high} is not an increasing progression of primes")]
    NotProgression { low: u64, mid: u64, high: u64 },
    #[error("closed-form points for {tag} at {inputs} do not form {expected}: {detail}")]
    FormulaMismatch {
        tag: FamilyTag,
        inputs: FamilyInputs,
        expected: &'static str,
        detail: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyInstance {
    pub tag: FamilyTag,
    pub inputs: FamilyInputs,
    pub c: Rational,
    /// Closed-form preperiodic points, ascending.
    pub expected_points: Vec<Rational>,
    pub expected_label: String,
    expected_graph: PrePerGraph,
}

impl FamilyInstance {
    /// The graph `f_c` induces on the closed-form points.
    pub fn expected_graph(&self) -> &PrePerGraph {
        &self.expected_graph
    }
}

fn frac(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Rational {
    Rational::new(num, den).expect("family denominators are nonzero")
}

fn half() -> Rational {
    frac(1, 2)
}

/// `{+-a +- b}`.
fn plus_minus(a: &Rational, b: &Rational) -> [Rational; 4] {
    [a + b, a - b, -a + b, -a - b]
}

fn validate(tag: FamilyTag, inputs: FamilyInputs) -> Result<(), FamilyError> {
    let arity = |expected| FamilyError::Arity {
        tag,
        expected,
        got: inputs,
    };
    let given = match inputs {
        FamilyInputs::Progression { low, high } => vec![low, high],
        other => other.primes(),
    };
    for p in given {
        if !is_prime(p) {
            return Err(FamilyError::NotPrime(p));
        }
    }
    match (tag, inputs) {
        (FamilyTag::Empty, FamilyInputs::Prime(_)) => Ok(()),
        (FamilyTag::F4_11 | FamilyTag::F4_2, FamilyInputs::Prime(p)) => {
            if p == 2 {
                Err(FamilyError::EvenPrime(tag))
            } else {
                Ok(())
            }
        }
        (FamilyTag::F6_11 | FamilyTag::F6_2 | FamilyTag::F8_211, FamilyInputs::Pair(p, q)) => {
            if p == 2 || q == 2 {
                Err(FamilyError::EvenPrime(tag))
            } else if p == q {
                Err(FamilyError::EqualPrimes(p))
            } else {
                Ok(())
            }
        }
        (FamilyTag::F6_3, FamilyInputs::Progression { low, high }) => {
            let mid = (low + high) / 2;
            if low == 2 || high == 2 {
                return Err(FamilyError::EvenPrime(tag));
            }
            if low >= high || (high - low) % 2 != 0 || !is_prime(mid) {
                return Err(FamilyError::NotProgression { low, mid, high });
            }
            Ok(())
        }
        (FamilyTag::Empty | FamilyTag::F4_11 | FamilyTag::F4_2, _) => Err(arity("one prime")),
        (FamilyTag::F6_11 | FamilyTag::F6_2 | FamilyTag::F8_211, _) => Err(arity("two primes")),
        (FamilyTag::F6_3, _) => Err(arity("a progression of three primes")),
    }
}

/// `c` and the closed-form points for a validated input.
fn formulas(tag: FamilyTag, inputs: FamilyInputs) -> (Rational, Vec<Rational>) {
    let primes = inputs.primes();
    let p = BigInt::from(primes[0]);
    match tag {
        FamilyTag::F4_11 | FamilyTag::F4_2 => {
            let inv_p = frac(1, p.clone());
            let base = if tag == FamilyTag::F4_11 {
                frac(1, 4)
            } else {
                frac(-3, 4)
            };
            let c = base - inv_p.square();
            (c, plus_minus(&half(), &inv_p).to_vec())
        }
        FamilyTag::F6_11 | FamilyTag::F6_2 | FamilyTag::F8_211 => {
            let q = BigInt::from(primes[1]);
            let (p2, q2, pq) = (&p * &p, &q * &q, &p * &q);
            let two_pq: BigInt = &pq * 2;
            match tag {
                FamilyTag::F6_11 => {
                    let num = &p2 * &p2 - &p2 * &pq * 2 + &p2 * &q2 * 2 - &pq * &q2 * 2 + &q2 * &q2;
                    let c = -frac(num, &two_pq * &two_pq);
                    let a = frac(&p2 - &pq + &q2, two_pq.clone());
                    let b = frac(&p2 - &q2, two_pq);
                    let mut pts = plus_minus(&half(), &a).to_vec();
                    pts.extend([b.clone(), -b]);
                    (c, pts)
                }
                FamilyTag::F6_2 => {
                    let num = &p2 * &p2 + &p2 * &pq * 2 + &p2 * &q2 * 2 - &pq * &q2 * 2 + &q2 * &q2;
                    let c = -frac(num, &two_pq * &two_pq);
                    let a = frac(&p2 + &q2, two_pq.clone());
                    let b = frac(&p2 + &pq - &q2, two_pq);
                    let mut pts = vec![a.clone(), -a];
                    pts.extend(plus_minus(&half(), &b));
                    (c, pts)
                }
                _ => {
                    let num = &p2 * &p2 + &p2 * &q2 + &q2 * &q2;
                    let c = -frac(num, &p2 * &q2 * 4);
                    let a = frac(&p2 + &q2, two_pq.clone());
                    let b = frac(&p2 - &q2, two_pq);
                    let mut pts = plus_minus(&half(), &a).to_vec();
                    pts.extend(plus_minus(&half(), &b));
                    (c, pts)
                }
            }
        }
        FamilyTag::F6_3 => {
            // tau = p/q with p the low and q the high end of the progression,
            // homogenized to integer polynomials in (p, q).
            let q = BigInt::from(primes[2]);
            let pw = |k: u32| p.pow(k);
            let qw = |k: u32| q.pow(k);
            let num = pw(6)
                + pw(5) * &q * 2
                + pw(4) * qw(2) * 4
                + pw(3) * qw(3) * 8
                + pw(2) * qw(4) * 9
                + &p * qw(5) * 4
                + qw(6);
            let den: BigInt = &p * &q * (&p + &q) * 2;
            let c = -frac(num, &den * &den);
            let a = frac(pw(3) + pw(2) * &q * 2 + &p * qw(2) + qw(3), den.clone());
            let b = frac(pw(3) - &p * qw(2) - qw(3), den.clone());
            let e = frac(pw(3) + pw(2) * &q * 2 + &p * qw(2) * 3 + qw(3), den);
            let pts = vec![a.clone(), -a, b.clone(), -b, e.clone(), -e];
            (c, pts)
        }
        FamilyTag::Empty => (frac(1, p), Vec::new()),
    }
}

/// Builds an instance and checks that the closed-form points are forward
/// closed under `f_c` with the family's graph.
pub fn make_instance(tag: FamilyTag, inputs: FamilyInputs) -> Result<FamilyInstance, FamilyError> {
    validate(tag, inputs)?;
    let (c, mut points) = formulas(tag, inputs);
    points.sort();
    points.dedup();
    let f = QuadMap::new(c.clone());
    let mismatch = |detail: String| FamilyError::FormulaMismatch {
        tag,
        inputs,
        expected: tag.expected_label(),
        detail,
    };
    let expected_graph =
        PrePerGraph::induced(&points, |x| f.evaluate(x)).map_err(|e| mismatch(e.to_string()))?;
    let label = expected_graph.label().to_string();
    if label != tag.expected_label() {
        return Err(mismatch(format!("induced graph is {label}")));
    }
    Ok(FamilyInstance {
        tag,
        inputs,
        c,
        expected_points: points,
        expected_label: label,
        expected_graph,
    })
}

/// The `n`-th and `(n+1)`-th odd primes, `n >= 1`.
pub fn prime_pair(n: usize) -> (u64, u64) {
    (nth_odd_prime(n), nth_odd_prime(n + 1))
}

/// First progression `p, p+k, p+2k` of primes with `N < p` and `p + 2k < 2N`,
/// least `p` first, then least `k`.
pub fn ap3_primes_in_interval(n: u64) -> Option<(u64, u64, u64)> {
    if n < 2 {
        return None;
    }
    let primes: Vec<u64> = sieve_primes(2 * n - 1)
        .into_iter()
        .filter(|&p| p > n)
        .collect();
    for (i, &p) in primes.iter().enumerate() {
        for &r in &primes[i + 1..] {
            let k = r - p;
            let top = r + k;
            if top >= 2 * n {
                break;
            }
            if primes.binary_search(&top).is_ok() {
                return Some((p, r, top));
            }
        }
    }
    None
}

/// Distinct progressions returned by [`ap3_primes_in_interval`] as `N` grows.
pub fn ap3_sequence() -> impl Iterator<Item = (u64, u64, u64)> {
    let mut seen = std::collections::BTreeSet::new();
    (2u64..).filter_map(move |n| {
        let found = ap3_primes_in_interval(n)?;
        seen.insert(found).then_some(found)
    })
}

/// Canonical inputs for the `index`-th instance (1-based) of a family:
/// the `index`-th odd prime, the `index`-th consecutive odd-prime pair, or
/// the `index`-th progression from [`ap3_sequence`]. The empty family walks
/// all primes starting from 2.
pub fn inputs_at(tag: FamilyTag, index: usize) -> FamilyInputs {
    assert!(index >= 1, "instances are indexed from 1");
    match tag {
        FamilyTag::F4_11 | FamilyTag::F4_2 => FamilyInputs::Prime(nth_odd_prime(index)),
        FamilyTag::Empty => FamilyInputs::Prime(if index == 1 {
            2
        } else {
            nth_odd_prime(index - 1)
        }),
        FamilyTag::F6_11 | FamilyTag::F6_2 | FamilyTag::F8_211 => {
            let (p, q) = prime_pair(index);
            FamilyInputs::Pair(p, q)
        }
        FamilyTag::F6_3 => {
            let (low, _, high) = ap3_sequence()
                .nth(index - 1)
                .expect("the sequence is infinite");
            FamilyInputs::Progression { low, high }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub family: FamilyTag,
    pub inputs: FamilyInputs,
    pub c: Rational,
    pub label: String,
    pub computed: GraphLabel,
    pub points: Vec<Rational>,
    /// Closed-form points are all preperiodic (they must be).
    pub containment: bool,
    pub missing: Vec<Rational>,
    /// The computed graph is isomorphic to the family's graph.
    pub exact: bool,
    pub bound: Option<u64>,
    pub n_points: usize,
    pub within_bound: Option<bool>,
}

pub fn verify_instance(inst: &FamilyInstance) -> VerificationReport {
    let graph = compute_preper(&inst.c);
    let missing: Vec<Rational> = inst
        .expected_points
        .iter()
        .filter(|x| !graph.contains(x))
        .cloned()
        .collect();
    let bound = match partition(&inst.c).bound {
        TrickBound::Bound(b) => Some(b),
        TrickBound::NotApplicable => None,
    };
    let computed = graph.label();
    VerificationReport {
        family: inst.tag,
        inputs: inst.inputs,
        c: inst.c.clone(),
        label: computed.to_string(),
        containment: missing.is_empty(),
        missing,
        exact: graph.is_isomorphic(inst.expected_graph()),
        bound,
        n_points: graph.len(),
        within_bound: bound.map(|b| graph.len() as u64 <= b),
        points: graph.vertices().cloned().collect(),
        computed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{rat, vp, Valuation};

    fn r(n: i64, d: i64) -> Rational {
        rat(n, d).unwrap()
    }

    fn sorted(mut v: Vec<Rational>) -> Vec<Rational> {
        v.sort();
        v
    }

    #[test]
    fn tags_parse() {
        for t in FamilyTag::ALL {
            assert_eq!(t.name().parse::<FamilyTag>().unwrap(), t);
        }
        assert!("5(1)".parse::<FamilyTag>().is_err());
    }

    #[test]
    fn prime_pairs() {
        assert_eq!(prime_pair(1), (3, 5));
        assert_eq!(prime_pair(2), (5, 7));
        // Tenth and eleventh odd primes, read off the sieve.
        let odd: Vec<u64> = sieve_primes(100).into_iter().filter(|&p| p != 2).collect();
        assert_eq!(prime_pair(10), (odd[9], odd[10]));
        assert_eq!(prime_pair(10), (31, 37));
    }

    #[test]
    fn family_4_11() {
        let inst = make_instance(FamilyTag::F4_11, FamilyInputs::Prime(3)).unwrap();
        assert_eq!(inst.c, r(5, 36));
        assert_eq!(
            inst.expected_points,
            sorted(vec![r(1, 6), r(-1, 6), r(5, 6), r(-5, 6)])
        );
        assert_eq!(inst.expected_label, "4(1,1)");
    }

    #[test]
    fn family_8_211() {
        let inst = make_instance(FamilyTag::F8_211, FamilyInputs::Pair(3, 5)).unwrap();
        assert_eq!(inst.c, r(-931, 900));
        let want = [49, 31, 19, 1]
            .iter()
            .flat_map(|&n| [r(n, 30), r(-n, 30)])
            .collect();
        assert_eq!(inst.expected_points, sorted(want));
        assert_eq!(inst.expected_label, "8(2,1,1)");
    }

    #[test]
    fn family_6_3() {
        let inst = make_instance(
            FamilyTag::F6_3,
            FamilyInputs::Progression { low: 3, high: 7 },
        )
        .unwrap();
        assert_eq!(inst.c, r(-607909, 176400));
        assert!(inst.expected_points.contains(&r(643, 420)));
        assert_eq!(inst.expected_label, "6(3)");
    }

    #[test]
    fn family_6_11_and_6_2() {
        let inst = make_instance(FamilyTag::F6_11, FamilyInputs::Pair(3, 5)).unwrap();
        assert_eq!(inst.c, r(-34, 225));
        let want = [17, 2, 8]
            .iter()
            .flat_map(|&n| [r(n, 15), r(-n, 15)])
            .collect();
        assert_eq!(inst.expected_points, sorted(want));
        let inst = make_instance(FamilyTag::F6_2, FamilyInputs::Pair(3, 5)).unwrap();
        assert_eq!(inst.expected_label, "6(2)");
    }

    #[test]
    fn empty_family() {
        let inst = make_instance(FamilyTag::Empty, FamilyInputs::Prime(5)).unwrap();
        assert_eq!(inst.c, r(1, 5));
        assert!(inst.expected_points.is_empty());
        let rep =
            verify_instance(&make_instance(FamilyTag::Empty, FamilyInputs::Prime(7)).unwrap());
        assert!(rep.containment && rep.exact);
        assert_eq!(rep.n_points, 0);
    }

    #[test]
    fn validation_errors() {
        assert_eq!(
            make_instance(FamilyTag::F4_11, FamilyInputs::Prime(9)).unwrap_err(),
            FamilyError::NotPrime(9)
        );
        assert_eq!(
            make_instance(FamilyTag::F4_11, FamilyInputs::Prime(2)).unwrap_err(),
            FamilyError::EvenPrime(FamilyTag::F4_11)
        );
        assert_eq!(
            make_instance(FamilyTag::F6_11, FamilyInputs::Pair(5, 5)).unwrap_err(),
            FamilyError::EqualPrimes(5)
        );
        make_instance(
            FamilyTag::F6_3,
            FamilyInputs::Progression { low: 3, high: 11 },
        )
        .unwrap();
        assert!(matches!(
            make_instance(
                FamilyTag::F6_3,
                FamilyInputs::Progression { low: 3, high: 13 }
            ),
            Err(FamilyError::NotProgression { mid: 8, .. })
        ));
        assert!(matches!(
            make_instance(
                FamilyTag::F6_3,
                FamilyInputs::Progression { low: 7, high: 3 }
            ),
            Err(FamilyError::NotProgression { .. })
        ));
        assert!(matches!(
            make_instance(FamilyTag::F6_11, FamilyInputs::Prime(3)),
            Err(FamilyError::Arity { .. })
        ));
    }

    #[test]
    fn denominators_are_squares_of_the_input_primes() {
        for tag in FamilyTag::ALL {
            if tag == FamilyTag::Empty {
                continue;
            }
            for index in 1..=4 {
                let inst = make_instance(tag, inputs_at(tag, index)).unwrap();
                let den = inst.c.denom();
                assert!(crate::arith::is_perfect_square(den).unwrap().is_some());
                let odd_bad: Vec<u64> = crate::arith::support(&inst.c)
                    .into_iter()
                    .filter(|&p| p != 2 && vp(&inst.c, p).unwrap() < Valuation::Finite(0))
                    .collect();
                let mut want = inst.inputs.primes();
                want.sort_unstable();
                assert_eq!(odd_bad, want, "{tag} at {}", inst.inputs);
            }
        }
    }

    #[test]
    fn verification_reports() {
        let rep =
            verify_instance(&make_instance(FamilyTag::F4_11, FamilyInputs::Prime(3)).unwrap());
        assert!(rep.containment && rep.exact);
        assert_eq!(rep.bound, Some(4));
        assert_eq!(rep.n_points, 4);

        let rep =
            verify_instance(&make_instance(FamilyTag::F6_11, FamilyInputs::Pair(3, 5)).unwrap());
        assert!(rep.containment);
        assert_eq!(rep.bound, Some(8));
        assert!(rep.n_points >= 6);
        for x in [
            r(8, 15),
            r(-8, 15),
            r(17, 15),
            r(-17, 15),
            r(2, 15),
            r(-2, 15),
        ] {
            assert!(rep.points.contains(&x));
        }
    }
}
