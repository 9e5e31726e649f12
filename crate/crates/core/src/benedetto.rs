//! Local bounds on the number of rational preperiodic points.
//!
//! The places of `Q` split into three classes for `f_c`:
//!
//! * good places (`|c|_l <= 1`), where the filled Julia set is the unit disk;
//! * bounded places `{inf, 2}`, where it sits inside `D(0, R)`;
//! * uncontrolled odd primes (`v_l(c) < 0`), where it lies on the sphere of
//!   radius `r_l = |c|_l^(1/2)` and is covered by `d` disks of radius 1 around
//!   the preimages of a point, or `d^2` disks of radius `r^(-1/d)` around its
//!   second preimages.
//!
//! Giving each preperiodic point the index of its covering disk at every
//! uncontrolled prime (the finer cover at one of them), two distinct points
//! with the same address would violate the product formula once the finer
//! radius is small enough. That yields `#PrePer <= d^(#C + 1)`.

use std::fmt;

use num_traits::Zero;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::arith::{
    ceil_isqrt, finite_abs_values, prime_power, support, vp, Place, Rational, Valuation,
};
use crate::dynamics::QuadMap;
use crate::padic::{
    Exponent, Membership, PadicDistance, PadicError, PadicNumber, DEFAULT_PRECISION,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BenedettoError {
    #[error("the product formula needs two distinct points, got {0} twice")]
    EqualPoints(Rational),
    #[error("{prime} is not an odd prime with even negative valuation of c = {c}")]
    NotUncontrolled { prime: u64, c: Rational },
    #[error(transparent)]
    Padic(#[from] PadicError),
}

fn exp_str(e: &Exponent) -> String {
    if e.is_integer() {
        e.to_integer().to_string()
    } else {
        format!("{}/{}", e.numer(), e.denom())
    }
}

fn ser_exp<S: Serializer>(e: &Exponent, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(&exp_str(e))
}

/// An exact absolute value: a real number, or `p^exp`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AbsValue {
    Real(Rational),
    Power { prime: u64, exp: Exponent },
}

impl AbsValue {
    fn le(&self, other: &AbsValue) -> bool {
        match (self, other) {
            (AbsValue::Real(a), AbsValue::Real(b)) => a <= b,
            (AbsValue::Power { prime: p, exp: a }, AbsValue::Power { prime: q, exp: b }) => {
                debug_assert_eq!(p, q);
                a <= b
            }
            _ => panic!("comparing absolute values at different places"),
        }
    }
}

impl fmt::Display for AbsValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbsValue::Real(r) => write!(f, "{r}"),
            AbsValue::Power { prime, exp } => write!(f, "{prime}^{}", exp_str(exp)),
        }
    }
}

impl Serialize for AbsValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PlaceClass {
    Good,
    Bounded,
    Uncontrolled,
}

/// A bounded place: the filled Julia set (its rational points at `inf`) lies in `D(0, radius)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundedPlace {
    pub place: Place,
    pub radius: AbsValue,
    /// 1 at the archimedean place, where `|a - b| <= 2R`; 0 elsewhere.
    pub doubling: u32,
}

/// An uncontrolled prime with `r_l = l^radius_exp`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UncontrolledPlace {
    pub prime: u64,
    #[serde(serialize_with = "ser_exp")]
    pub radius_exp: Exponent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrickBound {
    Bound(u64),
    /// No uncontrolled prime, so the trick says nothing.
    NotApplicable,
}

impl TrickBound {
    pub fn value(self) -> Option<u64> {
        match self {
            TrickBound::Bound(b) => Some(b),
            TrickBound::NotApplicable => None,
        }
    }
}

impl Serialize for TrickBound {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.value().serialize(s)
    }
}

/// The good / bounded / uncontrolled split of the places of `Q` for `f_c`.
/// Good places are everything else and are never listed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LocalPartition {
    pub c: Rational,
    pub degree: u32,
    pub bounded: Vec<BoundedPlace>,
    pub uncontrolled: Vec<UncontrolledPlace>,
    pub bound: TrickBound,
}

/// A rational `R >= 1/2 + sqrt(max(0, 1/4 - c))`, equal to it when the root
/// is rational. For `c > 1/4` no real point has a bounded orbit and `1/2`
/// is returned.
pub fn real_radius(c: &Rational) -> Rational {
    let half = Rational::new(1, 2).expect("nonzero");
    let gap = Rational::new(1, 4).expect("nonzero") - c;
    if gap.is_negative() || gap.is_zero() {
        return half;
    }
    // sqrt(a/b) = sqrt(ab)/b, rounded up.
    let ab = gap.numer() * gap.denom();
    let root = ceil_isqrt(&ab).expect("positive");
    half + Rational::new(root, gap.denom().clone()).expect("positive")
}

fn valuation(c: &Rational, p: u64) -> i64 {
    match vp(c, p).expect("support primes are prime") {
        Valuation::Finite(v) => v,
        Valuation::Infinite => i64::MAX,
    }
}

pub fn partition(c: &Rational) -> LocalPartition {
    let degree = 2;
    let v2 = if c.is_zero() { 0 } else { valuation(c, 2) };
    let mut bounded = vec![
        BoundedPlace {
            place: Place::Infinity,
            radius: AbsValue::Real(real_radius(c)),
            doubling: 1,
        },
        BoundedPlace {
            place: Place::Prime(2),
            radius: AbsValue::Power {
                prime: 2,
                exp: Exponent::new((-v2).max(0), 2),
            },
            doubling: 0,
        },
    ];
    bounded.sort_by_key(|b| b.place);
    let uncontrolled: Vec<UncontrolledPlace> = if c.is_zero() {
        Vec::new()
    } else {
        support(&Rational::from_integer(c.denom().clone()))
            .into_iter()
            .filter(|&p| p != 2)
            .map(|p| UncontrolledPlace {
                prime: p,
                radius_exp: Exponent::new(-valuation(c, p), 2),
            })
            .collect()
    };
    let bound = trick_bound_for(degree, uncontrolled.len());
    LocalPartition {
        c: c.clone(),
        degree,
        bounded,
        uncontrolled,
        bound,
    }
}

/// `d^(#C + 1)` when `#C >= 1`.
pub fn trick_bound_for(degree: u32, uncontrolled: usize) -> TrickBound {
    if uncontrolled == 0 {
        return TrickBound::NotApplicable;
    }
    TrickBound::Bound(u64::from(degree).pow(uncontrolled as u32 + 1))
}

pub fn trick_bound(part: &LocalPartition) -> TrickBound {
    trick_bound_for(part.degree, part.uncontrolled.len())
}

impl LocalPartition {
    pub fn classify(&self, place: Place) -> PlaceClass {
        if self.bounded.iter().any(|b| b.place == place) {
            PlaceClass::Bounded
        } else if self
            .uncontrolled
            .iter()
            .any(|u| Place::Prime(u.prime) == place)
        {
            PlaceClass::Uncontrolled
        } else {
            PlaceClass::Good
        }
    }

    pub fn is_good(&self, place: Place) -> bool {
        self.classify(place) == PlaceClass::Good
    }

    pub fn real_radius(&self) -> &Rational {
        match &self
            .bounded
            .iter()
            .find(|b| b.place == Place::Infinity)
            .expect("always bounded")
            .radius
        {
            AbsValue::Real(r) => r,
            AbsValue::Power { .. } => unreachable!("archimedean radius is real"),
        }
    }

    fn two_adic_radius_exp(&self) -> Exponent {
        match &self
            .bounded
            .iter()
            .find(|b| b.place == Place::Prime(2))
            .expect("always bounded")
            .radius
        {
            AbsValue::Power { exp, .. } => *exp,
            AbsValue::Real(_) => unreachable!("2-adic radius is a power of 2"),
        }
    }

    pub fn uncontrolled_radius(&self, prime: u64) -> Option<Exponent> {
        self.uncontrolled
            .iter()
            .find(|u| u.prime == prime)
            .map(|u| u.radius_exp)
    }

    /// Whether `r_l0^(-1/d) * prod_B 2^eps(l) R_l < 1`, i.e. whether the
    /// product formula already forbids two distinct rational points sharing
    /// an address when `l0` carries the fine cover.
    pub fn address_collision_excluded(&self, primary: u64) -> bool {
        let Some(r0) = self.uncontrolled_radius(primary) else {
            return false;
        };
        // Raise both sides to the 2d-th power (d = 2) so all exponents are integral.
        let power = 2 * i64::from(self.degree);
        let two_r = self.real_radius() * &Rational::from_integer(2);
        let e2 = self.two_adic_radius_exp() * power;
        let e0 = r0 * power / i64::from(self.degree);
        debug_assert!(e2.is_integer() && e0.is_integer());
        let lhs = two_r.pow(power).expect("nonnegative power") * prime_power(2, e2.to_integer());
        lhs < prime_power(primary, e0.to_integer())
    }

    /// Uncontrolled prime with the largest radius, the best choice for the fine cover.
    pub fn primary_prime(&self) -> Option<u64> {
        self.uncontrolled
            .iter()
            .max_by_key(|u| (u.radius_exp, u.prime))
            .map(|u| u.prime)
    }
}

/// One place's factor `|alpha - beta|_l` against its local bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LocalBoundCheck {
    pub place: Place,
    pub class: PlaceClass,
    pub factor: AbsValue,
    pub bound: AbsValue,
    pub holds: bool,
}

/// Exact per-place factors of `|alpha - beta|` and their product.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProductFormulaCertificate {
    pub alpha: Rational,
    pub beta: Rational,
    pub archimedean: Rational,
    /// `(p, e)` with `|alpha - beta|_p = p^e`, over the support of the difference.
    pub finite: Vec<(u64, i64)>,
    pub product: Rational,
}

impl ProductFormulaCertificate {
    pub fn holds(&self) -> bool {
        self.product == Rational::one()
    }

    fn factor_at(&self, place: Place) -> AbsValue {
        match place {
            Place::Infinity => AbsValue::Real(self.archimedean.clone()),
            Place::Prime(p) => {
                let e = self
                    .finite
                    .iter()
                    .find(|(q, _)| *q == p)
                    .map_or(0, |(_, e)| *e);
                AbsValue::Power {
                    prime: p,
                    exp: Exponent::from_integer(e),
                }
            }
        }
    }

    /// Checks each factor against the bound that holds for preperiodic points:
    /// 1 at good places, `2^eps R` at bounded places, `r_l` at uncontrolled ones.
    pub fn local_bounds(&self, part: &LocalPartition) -> Vec<LocalBoundCheck> {
        let mut places: Vec<Place> = self.finite.iter().map(|(p, _)| Place::Prime(*p)).collect();
        places.extend(part.bounded.iter().map(|b| b.place));
        places.extend(part.uncontrolled.iter().map(|u| Place::Prime(u.prime)));
        places.sort();
        places.dedup();
        places
            .into_iter()
            .map(|place| {
                let class = part.classify(place);
                let bound = match (class, place) {
                    (PlaceClass::Bounded, Place::Infinity) => {
                        AbsValue::Real(part.real_radius() * &Rational::from_integer(2))
                    }
                    (PlaceClass::Bounded, Place::Prime(p)) => AbsValue::Power {
                        prime: p,
                        exp: part.two_adic_radius_exp(),
                    },
                    (PlaceClass::Uncontrolled, Place::Prime(p)) => AbsValue::Power {
                        prime: p,
                        exp: part.uncontrolled_radius(p).expect("classified"),
                    },
                    (_, Place::Prime(p)) => AbsValue::Power {
                        prime: p,
                        exp: Exponent::zero(),
                    },
                    (_, Place::Infinity) => unreachable!("infinity is always bounded"),
                };
                let factor = self.factor_at(place);
                let holds = factor.le(&bound);
                LocalBoundCheck {
                    place,
                    class,
                    factor,
                    bound,
                    holds,
                }
            })
            .collect()
    }
}

pub fn product_formula_check(
    alpha: &Rational,
    beta: &Rational,
) -> Result<ProductFormulaCertificate, BenedettoError> {
    if alpha == beta {
        return Err(BenedettoError::EqualPoints(alpha.clone()));
    }
    let diff = alpha - beta;
    let archimedean = diff.abs();
    let finite = finite_abs_values(&diff);
    let product = finite
        .iter()
        .fold(archimedean.clone(), |acc, &(p, e)| acc * prime_power(p, e));
    Ok(ProductFormulaCertificate {
        alpha: alpha.clone(),
        beta: beta.clone(),
        archimedean,
        finite,
        product,
    })
}

/// What is known about a distance `|w - x|_l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceBound {
    Zero,
    Exact(Exponent),
    /// Only `|w - x|_l <= l^e` is known.
    AtMost(Exponent),
}

impl DistanceBound {
    fn from_padic(d: PadicDistance) -> Self {
        match d {
            PadicDistance::Exponent(e) => DistanceBound::Exact(Exponent::from_integer(e)),
            PadicDistance::Indistinguishable { abs_prec: None } => DistanceBound::Zero,
            PadicDistance::Indistinguishable { abs_prec: Some(k) } => {
                DistanceBound::AtMost(Exponent::from_integer(-k))
            }
        }
    }

    fn of_rational(x: &Rational, p: u64) -> Self {
        match vp(x, p).expect("prime") {
            Valuation::Infinite => DistanceBound::Zero,
            Valuation::Finite(v) => DistanceBound::Exact(Exponent::from_integer(-v)),
        }
    }

    fn of_padic(x: &PadicNumber) -> Self {
        match (x.valuation(), x.absolute_precision()) {
            (Valuation::Finite(v), _) => DistanceBound::Exact(Exponent::from_integer(-v)),
            (Valuation::Infinite, None) => DistanceBound::Zero,
            (Valuation::Infinite, Some(k)) => DistanceBound::AtMost(Exponent::from_integer(-k)),
        }
    }

    fn scale(self, k: Exponent) -> Self {
        match self {
            DistanceBound::Zero => DistanceBound::Zero,
            DistanceBound::Exact(e) => DistanceBound::Exact(e * k),
            DistanceBound::AtMost(e) => DistanceBound::AtMost(e * k),
        }
    }

    fn membership(self, radius_exp: Exponent) -> Membership {
        match self {
            DistanceBound::Zero => Membership::Inside,
            DistanceBound::Exact(e) if e <= radius_exp => Membership::Inside,
            DistanceBound::Exact(_) => Membership::Outside,
            DistanceBound::AtMost(e) if e <= radius_exp => Membership::Inside,
            DistanceBound::AtMost(_) => Membership::Undetermined,
        }
    }

    fn sort_key(self) -> (u8, Option<Exponent>) {
        match self {
            DistanceBound::Zero => (0, None),
            DistanceBound::Exact(e) => (1, Some(e)),
            DistanceBound::AtMost(e) => (2, Some(e)),
        }
    }
}

impl fmt::Display for DistanceBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistanceBound::Zero => write!(f, "0"),
            DistanceBound::Exact(e) => write!(f, "l^{}", exp_str(e)),
            DistanceBound::AtMost(e) => write!(f, "<= l^{}", exp_str(e)),
        }
    }
}

impl Serialize for DistanceBound {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Distance from `w in Q_l` to the nearer of the two roots `+-t` of `z^2 = a`,
/// from `P = |w^2 - a|` and `T = |t|` alone.
///
/// `|w - t| |w + t| = P` and, for odd `l`, `|(w + t) - (w - t)| = |2t| = T`.
/// If `P < T^2` one factor is below `T`, the other equals `T`, so the nearer
/// root is at `P / T`. Otherwise both factors are at least `T`, hence equal,
/// and both roots are at `P^(1/2)`. When `t` is not in `Q_l` the conjugate
/// distances coincide and only the second case can occur.
fn nearer_root_distance(p: DistanceBound, t: DistanceBound) -> DistanceBound {
    let half = Exponent::new(1, 2);
    match (p, t) {
        (DistanceBound::Zero, _) => DistanceBound::Zero,
        (_, DistanceBound::Zero) => p.scale(half),
        (DistanceBound::Exact(pe), DistanceBound::Exact(te)) => {
            if pe < te * 2 {
                DistanceBound::Exact(pe - te)
            } else {
                DistanceBound::Exact(pe * half)
            }
        }
        (DistanceBound::AtMost(pe), DistanceBound::Exact(te)) => {
            if pe < te * 2 {
                DistanceBound::AtMost(pe - te)
            } else {
                DistanceBound::AtMost(pe * half)
            }
        }
        // With |t| only bounded above, fall back to min <= P^(1/2).
        (DistanceBound::Exact(pe) | DistanceBound::AtMost(pe), DistanceBound::AtMost(_)) => {
            DistanceBound::AtMost(pe * half)
        }
    }
}

/// How one point sits relative to one cover.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Containment {
    #[serde(serialize_with = "ser_membership")]
    pub membership: Membership,
    /// Distance to the nearest root of the cover.
    pub distance: DistanceBound,
    /// Index of that root when it lies in `Q_l`; `None` when the roots are
    /// only known through valuations.
    pub root: Option<usize>,
}

fn ser_membership<S: Serializer>(m: &Membership, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(match m {
        Membership::Inside => "inside",
        Membership::Outside => "outside",
        Membership::Undetermined => "indistinguishable at precision",
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PointAddress {
    pub point: Rational,
    pub first: Containment,
    pub second: Containment,
    /// Index of the radius-1 disk holding the point.
    pub first_disk: usize,
    /// Index of the radius `r^(-1/2)` disk holding the point.
    pub second_disk: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiskCoverReport {
    pub place: u64,
    /// Radius exponent of the fine cover, `r^(-1/2) = l^radius_exp`.
    #[serde(serialize_with = "ser_exp")]
    pub radius_exp: Exponent,
    pub addresses: Vec<PointAddress>,
    pub violations: Vec<String>,
    pub distinct_addresses: bool,
}

impl DiskCoverReport {
    pub fn first_containment_holds(&self) -> bool {
        self.addresses
            .iter()
            .all(|a| a.first.membership == Membership::Inside)
    }

    pub fn second_containment_holds(&self) -> bool {
        self.addresses
            .iter()
            .all(|a| a.second.membership == Membership::Inside)
    }

    /// Largest number of points sharing one radius-1 disk.
    pub fn max_first_disk_load(&self) -> usize {
        let mut counts = std::collections::BTreeMap::new();
        for a in &self.addresses {
            *counts.entry(a.first_disk).or_insert(0usize) += 1;
        }
        counts.values().copied().max().unwrap_or(0)
    }
}

fn nearest(candidates: Vec<(Option<usize>, DistanceBound)>, radius_exp: Exponent) -> Containment {
    let best = candidates
        .iter()
        .find(|(_, d)| d.membership(radius_exp) == Membership::Inside)
        .or_else(|| {
            candidates
                .iter()
                .find(|(_, d)| d.membership(radius_exp) == Membership::Undetermined)
        })
        .or_else(|| candidates.iter().min_by_key(|(_, d)| d.sort_key()))
        .copied()
        .expect("at least one root");
    Containment {
        membership: best.1.membership(radius_exp),
        distance: best.1,
        root: best.0,
    }
}

/// Groups points into the closed disks of radius `l^radius_exp` that hold them:
/// two points share a disk exactly when `|w - w'|_l <= l^radius_exp`.
fn disk_indices(points: &[Rational], prime: u64, radius_exp: Exponent) -> Vec<usize> {
    let mut reps: Vec<&Rational> = Vec::new();
    points
        .iter()
        .map(|w| {
            let found = reps.iter().position(|rep| {
                DistanceBound::of_rational(&(w - *rep), prime).membership(radius_exp)
                    == Membership::Inside
            });
            found.unwrap_or_else(|| {
                reps.push(w);
                reps.len() - 1
            })
        })
        .collect()
}

/// Checks both disk covers of the filled Julia set at an uncontrolled odd
/// prime `l` on the given rational points, for `f_c` and a base point `x0`
/// of the filled Julia set (any rational preperiodic point will do).
///
/// The first cover is by radius-1 disks around the roots of `f(z) = x0`,
/// the second by radius `r^(-1/2)` disks around the roots of `f^2(z) = x0`,
/// where `r = |c|_l^(1/2)`. Roots lying in `Q_l` are Hensel-lifted; roots
/// outside `Q_l` are handled through `|f(w) - x0| = prod |w - x_i|` and the
/// fact that conjugate roots are equidistant from rational points.
pub fn disk_cover_check(
    c: &Rational,
    prime: u64,
    x0: &Rational,
    points: &[Rational],
) -> Result<DiskCoverReport, BenedettoError> {
    let not_uncontrolled = || BenedettoError::NotUncontrolled {
        prime,
        c: c.clone(),
    };
    if prime == 2 || c.is_zero() {
        return Err(not_uncontrolled());
    }
    let v = match vp(c, prime) {
        Ok(Valuation::Finite(v)) if v < 0 && v % 2 == 0 => v,
        _ => return Err(not_uncontrolled()),
    };
    let n = DEFAULT_PRECISION;
    let f = QuadMap::new(c.clone());
    let to_padic = |x: &Rational| PadicNumber::from_rational(x, prime, n);
    let r_exp = Exponent::new(-v, 2);
    let first_radius = Exponent::zero();
    let second_radius = -r_exp / 2;

    let c_p = to_padic(c)?;
    let a0 = x0 - c;
    let first_roots = to_padic(&a0)?.sqrt().ok();

    // Second preimages, grouped by the first root they map to.
    enum Pair {
        Explicit([PadicNumber; 2]),
        /// `x_i - c` as an l-adic number whose square roots are not in `Q_l`.
        Implicit(PadicNumber),
    }
    let second_pairs: Option<Vec<(PadicNumber, Pair)>> = match &first_roots {
        Some((s, minus_s)) => {
            let mut pairs = Vec::new();
            for x_i in [s, minus_s] {
                let a_i = x_i.sub(&c_p)?;
                let pair = match a_i.sqrt() {
                    Ok((t, minus_t)) => Pair::Explicit([t, minus_t]),
                    Err(_) => Pair::Implicit(a_i),
                };
                pairs.push((x_i.clone(), pair));
            }
            Some(pairs)
        }
        None => None,
    };

    let mut addresses = Vec::with_capacity(points.len());
    let mut violations = Vec::new();
    let first_disks = disk_indices(points, prime, first_radius);
    let second_disks = disk_indices(points, prime, second_radius);

    for (k, w) in points.iter().enumerate() {
        let w_p = to_padic(w)?;
        let fw = f.evaluate(w);

        let first = match &first_roots {
            Some((s, minus_s)) => {
                let mut cands = Vec::new();
                for (i, root) in [s, minus_s].into_iter().enumerate() {
                    cands.push((Some(i), DistanceBound::from_padic(w_p.dist_exp(root)?)));
                }
                nearest(cands, first_radius)
            }
            None => {
                // Roots +-sqrt(x0 - c) outside Q_l: P = |f(w) - x0|, T = |x0 - c|^(1/2).
                let p_dist = DistanceBound::of_rational(&(&fw - x0), prime);
                let t_dist = DistanceBound::of_rational(&a0, prime).scale(Exponent::new(1, 2));
                nearest(
                    vec![(None, nearer_root_distance(p_dist, t_dist))],
                    first_radius,
                )
            }
        };

        let second = match &second_pairs {
            Some(pairs) => {
                let fw_p = to_padic(&fw)?;
                let mut cands = Vec::new();
                for (i, (x_i, pair)) in pairs.iter().enumerate() {
                    match pair {
                        Pair::Explicit(ts) => {
                            for (j, t) in ts.iter().enumerate() {
                                let d = DistanceBound::from_padic(w_p.dist_exp(t)?);
                                cands.push((Some(2 * i + j), d));
                            }
                        }
                        Pair::Implicit(a_i) => {
                            let p_dist = DistanceBound::from_padic(fw_p.dist_exp(x_i)?);
                            let t_dist = DistanceBound::of_padic(a_i).scale(Exponent::new(1, 2));
                            cands.push((None, nearer_root_distance(p_dist, t_dist)));
                        }
                    }
                }
                nearest(cands, second_radius)
            }
            None => {
                // x_i = +-sqrt(x0 - c) outside Q_l. For rational w,
                // |f(w) - x_i| = |f^2(w) - x0|^(1/2) and |x_i - c| = |c^2 + c - x0|^(1/2).
                let half = Exponent::new(1, 2);
                let p_dist = DistanceBound::of_rational(&(f.evaluate(&fw) - x0), prime).scale(half);
                let t_dist = DistanceBound::of_rational(&(c.square() + c - x0), prime)
                    .scale(Exponent::new(1, 4));
                nearest(
                    vec![(None, nearer_root_distance(p_dist, t_dist))],
                    second_radius,
                )
            }
        };

        for (name, cont) in [("first", &first), ("second", &second)] {
            match cont.membership {
                Membership::Inside => {}
                Membership::Outside => {
                    violations.push(format!("{w} lies outside every {name}-cover disk"))
                }
                Membership::Undetermined => violations.push(format!(
                    "{w}: {name}-cover membership indistinguishable at precision {n}"
                )),
            }
        }
        addresses.push(PointAddress {
            point: w.clone(),
            first,
            second,
            first_disk: first_disks[k],
            second_disk: second_disks[k],
        });
    }

    let mut seen = second_disks.clone();
    seen.sort_unstable();
    seen.dedup();
    let distinct_addresses = seen.len() == points.len();
    Ok(DiskCoverReport {
        place: prime,
        radius_exp: second_radius,
        addresses,
        violations,
        distinct_addresses,
    })
}

/// Address vectors across every uncontrolled prime: the fine-cover disk at
/// `primary`, the radius-1 disk elsewhere, in partition order.
pub fn address_vectors(
    c: &Rational,
    points: &[Rational],
    x0: &Rational,
    primary: u64,
) -> Result<Vec<Vec<usize>>, BenedettoError> {
    let part = partition(c);
    let mut columns = Vec::new();
    for u in &part.uncontrolled {
        let report = disk_cover_check(c, u.prime, x0, points)?;
        columns.push(
            report
                .addresses
                .iter()
                .map(|a| {
                    if u.prime == primary {
                        a.second_disk
                    } else {
                        a.first_disk
                    }
                })
                .collect::<Vec<_>>(),
        );
    }
    if part.uncontrolled_radius(primary).is_none() {
        return Err(BenedettoError::NotUncontrolled {
            prime: primary,
            c: c.clone(),
        });
    }
    Ok((0..points.len())
        .map(|k| columns.iter().map(|col| col[k]).collect())
        .collect())
}

/// Largest `|a - b|_l` over pairs of points, as an exponent of `l`.
pub fn enclosing_radius_exp(points: &[Rational], prime: u64) -> Option<i64> {
    let mut best: Option<i64> = None;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            if let Valuation::Finite(v) = vp(&(a - b), prime).ok()? {
                best = Some(best.map_or(-v, |e| e.max(-v)));
            }
        }
    }
    best
}
