mod common;

use common::{unimodular2, unimodular3};
use cubic_core::forms::{act_form, BinaryCubicForm};
use cubic_core::pairs::{act_pair, disc_pair, orbit_type, resolvent, GroupElement23, TernaryPair};
use proptest::prelude::*;

fn pair(range: i64) -> impl Strategy<Value = TernaryPair> {
    (prop::array::uniform6(-range..=range), prop::array::uniform6(-range..=range))
        .prop_map(|(a, b)| TernaryPair::new(a, b))
}

fn group_element() -> impl Strategy<Value = GroupElement23> {
    (unimodular2(), unimodular3()).prop_map(|(gamma, g)| GroupElement23::new(gamma, g).unwrap())
}

/// Pencils whose common zeros are known by hand, with the number of
/// complex-conjugate pairs among them.
fn known_pencils() -> [(TernaryPair, u8); 3] {
    [
        // x^2 = y^2 and z^2 = x^2: the four points (1, +-1, +-1)
        (TernaryPair::new([1, 0, 0, -1, 0, 0], [-1, 0, 0, 0, 0, 1]), 0),
        // x^2 = y^2 and z^2 = 2xy: real on y = x, conjugate on y = -x
        (TernaryPair::new([1, 0, 0, -1, 0, 0], [0, -1, 0, 0, 0, 1]), 1),
        // y = +-ix and z = +-ix
        (TernaryPair::new([1, 0, 0, 1, 0, 0], [1, 0, 0, 0, 0, 1]), 2),
    ]
}

fn scaled(f: &BinaryCubicForm, k: i64) -> BinaryCubicForm {
    let [a, b, c, d] = f.coeffs();
    BinaryCubicForm::new(k * a, k * b, k * c, k * d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn resolvent_is_equivariant(p in pair(4), e in group_element()) {
        let q = act_pair(&e, &p);
        let expected = scaled(&act_form(&e.gamma, &resolvent(&p)), e.gamma.det());
        prop_assert_eq!(resolvent(&q), expected);
        prop_assert_eq!(disc_pair(&q), disc_pair(&p));
    }

    #[test]
    fn sign_scalars_act_trivially(p in pair(6)) {
        for lambda in [1, -1] {
            prop_assert_eq!(act_pair(&GroupElement23::scalar(lambda), &p), p);
        }
    }

    #[test]
    fn orbit_type_follows_discriminant_sign(p in pair(4), e in group_element()) {
        let disc = disc_pair(&p);
        prop_assume!(disc != 0);
        let t = orbit_type(&p).unwrap();
        prop_assert_eq!(disc < 0, t.i == 1);
        prop_assert_eq!(orbit_type(&act_pair(&e, &p)).unwrap(), t);
    }

    #[test]
    fn orbit_type_matches_counted_zeros(e in group_element()) {
        for (p, i) in known_pencils() {
            prop_assert_eq!(orbit_type(&act_pair(&e, &p)).unwrap().i, i);
        }
    }
}
