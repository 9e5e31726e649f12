use std::collections::BTreeSet;

use preper::benedetto::{address_vectors, disk_cover_check, enclosing_radius_exp, partition};
use preper::families::{inputs_at, make_instance, FamilyTag};
use preper::{compute_preper, Rational};

const TAGS: [FamilyTag; 6] = [
    FamilyTag::F4_11,
    FamilyTag::F4_2,
    FamilyTag::F6_11,
    FamilyTag::F6_2,
    FamilyTag::F6_3,
    FamilyTag::F8_211,
];

fn points(c: &Rational) -> Vec<Rational> {
    compute_preper(c).vertices().cloned().collect()
}

#[test]
fn both_containments_hold_on_family_instances() {
    for tag in TAGS {
        for index in 1..=4 {
            let inst = make_instance(tag, inputs_at(tag, index)).unwrap();
            let pts = points(&inst.c);
            for u in &partition(&inst.c).uncontrolled {
                for x0 in &pts {
                    let report = disk_cover_check(&inst.c, u.prime, x0, &pts).unwrap();
                    assert!(
                        report.violations.is_empty(),
                        "{tag} #{index} at {}: {:?}",
                        u.prime,
                        report.violations
                    );
                }
            }
        }
    }
}

#[test]
fn full_addresses_separate_points() {
    // With the fine cover at every uncontrolled prime in turn, some choice
    // must separate all points.
    for tag in TAGS {
        for index in 1..=4 {
            let inst = make_instance(tag, inputs_at(tag, index)).unwrap();
            let pts = points(&inst.c);
            let part = partition(&inst.c);
            let separated = part.uncontrolled.iter().any(|u| {
                let addrs = address_vectors(&inst.c, &pts, &pts[0], u.prime).unwrap();
                addrs.iter().collect::<BTreeSet<_>>().len() == pts.len()
            });
            assert!(separated, "{tag} #{index}");
        }
    }
}

#[test]
fn quarter_family_points_realize_the_radius() {
    // Two of the four points sit at distance p, which is r_p = |c|_p^(1/2).
    for index in 1..=10 {
        let inst = make_instance(FamilyTag::F4_11, inputs_at(FamilyTag::F4_11, index)).unwrap();
        let p = inst.inputs.primes()[0];
        let part = partition(&inst.c);
        let r = part.uncontrolled_radius(p).unwrap();
        assert_eq!(enclosing_radius_exp(&inst.expected_points, p), Some(r.to_integer()));
    }
}
