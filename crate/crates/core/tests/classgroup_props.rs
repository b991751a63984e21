mod common;

use common::irreducible_form;
use cubic_core::classgroup::{
    brute_force_class_group, class_data, ideal_eq, ideal_mul, ideal_pow, primes_above, principal_generator,
    two_torsion_size, unit_group, IdealHNF,
};
use cubic_core::forms::{is_maximal, BinaryCubicForm};
use cubic_core::rings::{big, char_poly, norm, ring_from_form, CubicRing, Signature};
use num_traits::Signed;
use proptest::prelude::*;

fn maximal_form(range: i64) -> impl Strategy<Value = BinaryCubicForm> {
    irreducible_form(range).prop_filter("maximal", |f| is_maximal(f).unwrap())
}

const SMALL_PRIMES: [u64; 15] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47];

/// Regulator from a box search: collect units with coordinates up to `bound`
/// and take the smallest nonzero covolume they span.
fn box_regulator(ring: &CubicRing, bound: i128) -> f64 {
    let emb = ring.embeddings().unwrap();
    let mut logs = Vec::new();
    for a in -bound..=bound {
        for b in -bound..=bound {
            for c in -bound..=bound {
                let x = [a, b, c];
                if ring.norm_int(x).abs() == 1 {
                    logs.push(emb.log_abs(x.map(|v| v as f64)));
                }
            }
        }
    }
    let mut best = f64::INFINITY;
    match ring.signature() {
        Signature::TotallyReal => {
            for u in &logs {
                for v in &logs {
                    let d = (u[0] * v[1] - u[1] * v[0]).abs();
                    if d > 1e-6 {
                        best = best.min(d);
                    }
                }
            }
        }
        _ => {
            for u in &logs {
                if u[0].abs() > 1e-6 {
                    best = best.min(u[0].abs());
                }
            }
        }
    }
    best
}

#[test]
fn regulators_match_box_search() {
    let forms = [
        (1, 1, -2, -1),
        (1, 0, -3, -1),
        (1, 1, -3, -1),
        (1, 1, -4, 1),
        (1, 0, -4, 1),
        (1, 0, -1, -1),
        (1, 0, 0, -2),
        (1, 0, 1, -1),
    ];
    for (a, b, c, d) in forms {
        let ring = ring_from_form(&BinaryCubicForm::new(a, b, c, d));
        let units = unit_group(&ring).unwrap();
        let oracle = box_regulator(&ring, 8);
        assert!(
            (units.regulator - oracle).abs() < 1e-8 * oracle.max(1.0),
            "{:?}: {} vs {}",
            ring.form(),
            units.regulator,
            oracle
        );
    }
    let r = unit_group(&ring_from_form(&BinaryCubicForm::new(1, 1, -2, -1))).unwrap().regulator;
    assert!((r - 0.5254547).abs() < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn primes_multiply_back_to_p(f in maximal_form(6)) {
        let ring = ring_from_form(&f);
        for p in SMALL_PRIMES {
            let primes = primes_above(&ring, p).unwrap();
            prop_assert_eq!(primes.iter().map(|q| q.e * q.f).sum::<u32>(), 3);
            let mut prod = IdealHNF::unit(&ring);
            for q in &primes {
                prod = ideal_mul(&prod, &ideal_pow(&q.ideal, q.e).unwrap()).unwrap();
            }
            prop_assert!(ideal_eq(&prod, &IdealHNF::scalar(&ring, p as i128)).unwrap(), "p = {}", p);
        }
    }

    #[test]
    fn class_group_invariants(f in maximal_form(6)) {
        let ring = ring_from_form(&f);
        let data = class_data(&ring).unwrap();
        let (h, hp) = (data.class_number(), data.narrow_class_number());
        prop_assert_eq!(hp % h, 0);
        prop_assert!([1, 2, 4].contains(&(hp / h)));
        prop_assert!(two_torsion_size(&data.narrow) >= two_torsion_size(&data.class_group));
        if ring.signature() == Signature::Complex {
            prop_assert_eq!(&data.narrow.divisors, &data.class_group.divisors);
        }
    }

    #[test]
    fn fundamental_units_are_units(f in maximal_form(5)) {
        let ring = ring_from_form(&f);
        let units = unit_group(&ring).unwrap();
        let expected_rank = if ring.signature() == Signature::TotallyReal { 2 } else { 1 };
        prop_assert_eq!(units.rank(), expected_rank);
        prop_assert!(units.regulator > 0.1);
        for u in &units.fundamental {
            prop_assert!(u.is_integral());
            prop_assert_eq!(norm(u).abs(), big(1));
            // constant term of the characteristic polynomial is -N(u)
            prop_assert_eq!(char_poly(u)[3].abs(), big(1));
        }
    }

    #[test]
    fn principal_ideals_have_generators(f in maximal_form(5), x in prop::array::uniform3(-6i128..=6)) {
        let ring = ring_from_form(&f);
        prop_assume!(ring.norm_int(x) != 0);
        let units = unit_group(&ring).unwrap();
        let ideal = IdealHNF::principal(&ring, x).unwrap();
        let g = principal_generator(&ring, &units, &ideal).unwrap().expect("principal ideal");
        let back = IdealHNF::principal(&ring, g.to_int().unwrap()).unwrap();
        prop_assert!(ideal_eq(&back, &ideal).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn class_groups_match_brute_force(f in maximal_form(4)) {
        let ring = ring_from_form(&f);
        let data = class_data(&ring).unwrap();
        prop_assert_eq!(&brute_force_class_group(&ring, false).unwrap().divisors, &data.class_group.divisors);
        prop_assert_eq!(&brute_force_class_group(&ring, true).unwrap().divisors, &data.narrow.divisors);
    }
}
