mod common;

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use proptest::prelude::*;

use common::*;
use taylor_nets::id::Path;
use taylor_nets::io::gen_random;
use taylor_nets::taylor::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn kappa_preserves_conclusions(seed in 0u64..5000, i in 0usize..4) {
        let net = gen_random(&small_params(seed));
        let e = random_pseudo(&net, 3, &mut rng(seed));
        let t = expand(&net, &e, i).unwrap();
        let source = net.conclusions();
        let target = t.term.conclusions();
        for (q, image) in &t.kappa {
            prop_assert_eq!(source.contains(image), target.contains(q), "{:?} -> {:?}", q, image);
        }
    }

    #[test]
    fn preimages_count_copies(seed in 0u64..5000, i in 0usize..4) {
        let net = gen_random(&small_params(seed));
        let e = random_pseudo(&net, 3, &mut rng(seed));
        let t = expand(&net, &e, i).unwrap();
        let mut preimages: BTreeMap<&Path, usize> = BTreeMap::new();
        for image in t.kappa.values() {
            *preimages.entry(image).or_default() += 1;
        }
        let totals = e.copy_totals();
        for q in net.all_ports() {
            let b = deepest_expanded_box(&net, &q, i);
            let expected = if b.is_empty() { BigUint::from(1u32) } else { totals.get(&b).cloned().unwrap_or_default() };
            let found = preimages.get(&q).copied().unwrap_or(0);
            prop_assert_eq!(BigUint::from(found), expected, "{:?}", q);
        }
    }

    #[test]
    fn co_contraction_arities_are_the_copy_counts(seed in 0u64..5000) {
        let net = gen_random(&small_params(seed));
        let e = random_pseudo(&net, 3, &mut rng(seed));
        let term = expand(&net, &e, 0).unwrap().term;
        let counts: BTreeSet<BigUint> = e_sharp(&net, &e).unwrap().into_values().flatten().collect();
        let arities: BTreeSet<BigUint> = term.co_contractions().iter().map(|p| BigUint::from(term.arity(p))).collect();
        prop_assert_eq!(counts, arities);
    }

    #[test]
    fn one_term_reveals_the_measures(seed in 0u64..5000) {
        let net = gen_random(&round_trip_params(seed));
        let term = expand(&net, &make_uniform(&net, 1), 0).unwrap().term;
        prop_assert_eq!(measures_from_one_term(&term), Measures::of_net(&net));
    }

    #[test]
    fn heterogeneous_experiments_are_recognized(seed in 0u64..5000, bump in 0usize..3) {
        let net = gen_random(&small_params(seed));
        let k = basis(&net) + bump;
        if let Ok(e) = make_k_heterogeneous(&net, k, seed) {
            prop_assert!(is_k_heterogeneous(&net, &e, k));
            prop_assert!(!net.boxes.is_empty() || e.per_box.is_empty());
        }
    }

    #[test]
    fn predicted_size_is_exact(seed in 0u64..5000, i in 0usize..4) {
        let net = gen_random(&small_params(seed));
        let e = random_pseudo(&net, 3, &mut rng(seed));
        let t = expand(&net, &e, i).unwrap();
        prop_assert_eq!(predicted_size(&net, &e, i), BigUint::from(t.term.size()));
    }
}

#[test]
fn arity_closed_form() {
    let r = arity_example();
    let e = PseudoExperiment::new().with_box(
        "o2",
        vec![Run { count: 10u32.into(), sub: PseudoExperiment::new().with_box("o", vec![Run { count: 1u32.into(), sub: PseudoExperiment::new() }]) }],
    );
    assert_eq!(predicted_arity(&r, &e, 1, &id("p1")), BigUint::from(11u32));
    assert_eq!(expand(&r, &e, 1).unwrap().term.arity(&id("p1")), 11);
    assert_eq!(expand(&r, &e, 2).unwrap().term.arity(&id("p1")), 2);
}

#[test]
fn chain_of_the_four_box_shape() {
    let r = four_box_shape();
    let e = make_k_heterogeneous(&r, 10, 0).unwrap();
    let chain = mn_chain(&e_sharp(&r, &e).unwrap(), 10).unwrap();
    assert_eq!(chain.m_at(0), (1..=224).collect());
    assert_eq!(chain.n_at(0), (3..=224).collect());
    assert_eq!(chain.m_at(1), BTreeSet::from([1, 2]));
    assert_eq!(chain.n_at(1), BTreeSet::from([1, 2]));
    assert!(chain.m_at(2).is_empty());
}

#[test]
fn oversized_expansions_are_refused() {
    let r = four_box_shape();
    let e = make_k_heterogeneous(&r, 10, 0).unwrap();
    assert!(matches!(expand(&r, &e, 0), Err(taylor_nets::error::Error::TooLarge { .. })));
}
