mod common;

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use common::*;
use taylor_nets::io::{gen_random, GenParams};
use taylor_nets::iso::{equiv, iso_check, verify_witness, IsoMode};

fn tiny(seed: u64) -> GenParams {
    GenParams { max_depth: 1, max_boxes_per_level: 2, max_boxes: 2, max_cosize: 3, max_ports: 10, allow_cuts: seed.is_multiple_of(3), seed }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn renamed_nets_are_isomorphic_with_a_checked_witness(seed in 0u64..100_000) {
        let a = gen_random(&round_trip_params(seed));
        let b = shuffle_names(&a, &mut rng(seed));
        let map = iso_check(&a, &b, IsoMode::Free);
        prop_assert!(map.is_some());
        prop_assert!(verify_witness(&a, &b, &map.unwrap(), &BTreeMap::new(), &BTreeMap::new()));
        prop_assert!(equiv(&a, &shuffle_inner_names(&a, &mut rng(seed + 1))));
    }

    #[test]
    fn agrees_with_enumeration(seed in 0u64..100_000) {
        let a = gen_random(&tiny(seed));
        prop_assume!(a.ports.len() <= 8);
        let mut g = rng(seed);
        for b in [mutate_net(&a, &mut g), shuffle_names(&a, &mut g), gen_random(&tiny(seed + 1))] {
            prop_assume!(b.ports.len() <= 8);
            prop_assert_eq!(iso_check(&a, &b, IsoMode::Free).is_some(), !brute_isos(&a, &b, &BTreeSet::new()).is_empty());
            let fixed = a.ground_conclusions();
            prop_assert_eq!(iso_check(&a, &b, IsoMode::FixConclusions).is_some(), !brute_isos(&a, &b, &fixed).is_empty());
        }
    }
}

#[test]
fn two_axiom_shapes_differ() {
    let (a, b) = (two_axiom_shapes(false), two_axiom_shapes(true));
    assert!(iso_check(&a, &b, IsoMode::Free).is_none());
    assert!(brute_isos(&a, &b, &BTreeSet::new()).is_empty());
    assert!(equiv(&a, &a) && equiv(&b, &b));
}

#[test]
fn nested_boxes_are_compared_through_their_doors() {
    let a = four_box_shape();
    let b = shuffle_names(&a, &mut rng(3));
    assert!(iso_check(&a, &b, IsoMode::Free).is_some());
    let mut c = a.clone();
    c.boxes.get_mut(&id("o2")).unwrap().content.boxes.remove(&id("o"));
    c.boxes.get_mut(&id("o2")).unwrap().content.ports.remove(&id("o"));
    assert!(iso_check(&a, &c, IsoMode::Free).is_none());
}
