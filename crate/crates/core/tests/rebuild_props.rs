mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use common::*;
use taylor_nets::components::{closed_components, connected_components};
use taylor_nets::error::Error;
use taylor_nets::io::{gen_random, GenParams};
use taylor_nets::iso::equiv;
use taylor_nets::net::{Label, Net};
use taylor_nets::ops::glue;
use taylor_nets::rebuild::{rebuild, rebuild_from_pair, rebuild_step, round_trip, RebuildState};
use taylor_nets::taylor::*;

fn small_round_trip_params(seed: u64) -> GenParams {
    GenParams { max_depth: 2, max_boxes: 3, max_ports: 24, ..round_trip_params(seed) }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn round_trip_recovers_the_net(seed in 0u64..100_000) {
        let net = gen_random(&small_round_trip_params(seed));
        let Ok(e) = make_k_heterogeneous(&net, basis(&net), seed) else { return Ok(()) };
        if predicted_size(&net, &e, 0) > 20_000u32.into() {
            return Ok(());
        }
        match round_trip(&net, seed) {
            Err(Error::TooLarge { .. }) => {}
            Ok(back) => prop_assert!(equiv(&back, &net)),
            Err(e) => prop_assert!(false, "seed {}: {}", seed, e),
        }
    }

    #[test]
    fn each_step_adds_one_level_of_boxes(seed in 0u64..100_000, bump in 0usize..2) {
        let net = gen_random(&small_round_trip_params(seed));
        let k = basis(&net) + bump;
        let Ok(e) = make_k_heterogeneous(&net, k, seed) else { return Ok(()) };
        for i in 0..=net.depth() {
            if predicted_size(&net, &e, i) > 20_000u32.into() {
                continue;
            }
            let here = expand(&net, &e, i).unwrap().term;
            let next = expand(&net, &e, i + 1).unwrap().term;
            let state = rebuild_step(&RebuildState::new(here, k).unwrap()).unwrap();
            prop_assert!(equiv(&state.term, &next), "seed {} i {}", seed, i);
        }
    }

    #[test]
    fn critical_digits_stay_inside_the_chain(seed in 0u64..100_000) {
        let net = gen_random(&small_round_trip_params(seed));
        let k = basis(&net);
        let Ok(e) = make_k_heterogeneous(&net, k, seed) else { return Ok(()) };
        let chain = mn_chain(&e_sharp(&net, &e).unwrap(), k).unwrap();
        for i in 0..=net.depth() {
            if predicted_size(&net, &e, i) > 20_000u32.into() {
                continue;
            }
            let term = expand(&net, &e, i).unwrap().term;
            let m = chain.m_at(i);
            let bangs: BTreeSet<usize> = bang_map(&term, k).unwrap().into_keys().collect();
            prop_assert_eq!(&bangs, &m);
            let top = term.arities().values().map(|a| digits(*a, k).len()).max().unwrap_or(0);
            for j in (1..=top).filter(|j| !m.contains(j)) {
                prop_assert!(critical_ports(&term, k, j).is_empty());
            }
        }
    }

    #[test]
    fn closed_components_share_only_boundary_ports(seed in 0u64..100_000, k in 2usize..6) {
        let net = gen_random(&small_params(seed));
        let quests: BTreeSet<_> = net.ports.iter().filter(|(_, l)| l.is_exponential()).map(|(p, _)| p.clone()).collect();
        let set = closed_components(&net, &quests, k);
        let mut seen = BTreeSet::new();
        for t in &set.members {
            prop_assert!(t.cosize() < k);
            prop_assert!(t.ground_conclusions().is_subset(&quests));
            for p in t.ports.keys().filter(|p| !quests.contains(*p)) {
                prop_assert!(seen.insert(p.clone()), "{} in two components", p);
            }
        }
    }

    #[test]
    fn connected_components_glue_back(seed in 0u64..100_000) {
        let net = gen_random(&small_params(seed));
        let parts = connected_components(&net);
        prop_assert_eq!(glue(parts.iter()).unwrap(), net);
    }
}

fn co_contraction(arity: usize) -> Net {
    let mut s = Net::new();
    add_co_contraction(&mut s, "o", arity);
    s
}

fn add_co_contraction(s: &mut Net, o: &str, arity: usize) {
    s.add_port(o, Label::Bang);
    for n in 0..arity {
        let w = format!("{o}u{n}");
        s.add_port(w.as_str(), Label::One).add_wire(w.as_str(), o);
    }
}

#[test]
fn arities_that_are_no_power_are_rejected() {
    let mut one = co_contraction(1);
    add_co_contraction(&mut one, "p", 1);
    let mut khet = co_contraction(4);
    add_co_contraction(&mut khet, "p", 6);
    assert!(matches!(rebuild_from_pair(&one, &khet), Err(Error::NonPowerArity { .. })));
}

#[test]
fn a_base_below_the_basis_is_rejected() {
    let mut one = co_contraction(1);
    for n in 0..4 {
        let w = format!("x{n}");
        one.add_port(w.as_str(), Label::Bot).add_wire(w.as_str(), "c");
    }
    one.add_port("c", Label::Quest);
    let mut khet = co_contraction(2);
    for n in 0..4 {
        let w = format!("x{n}");
        khet.add_port(w.as_str(), Label::Bot).add_wire(w.as_str(), "c");
    }
    khet.add_port("c", Label::Quest);
    assert!(matches!(rebuild_from_pair(&one, &khet), Err(Error::BasisViolation { k: 2, .. })));
}

#[test]
fn single_co_contraction_becomes_a_box() {
    let net = rebuild(&co_contraction(3), 3).unwrap();
    assert_eq!(net.boxes.len(), 1);
    assert_eq!(net.boxes[&id("o")].content.ports.len(), 1);
}
