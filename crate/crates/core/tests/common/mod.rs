//! Helpers shared by the integration tests and the acceptance target.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use taylor_nets::id::{Path, PortId};
use taylor_nets::io::GenParams;
use taylor_nets::net::{pair, Label, Net};
use taylor_nets::ops::rename;
use taylor_nets::relsem::{Atom, MellType, Payload, Point, Sign, TypedNet, Value};
use taylor_nets::taylor::{PseudoExperiment, Run};

pub fn id(s: &str) -> PortId {
    PortId::atom(s)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The bounds of the round-trip criterion.
pub fn round_trip_params(seed: u64) -> GenParams {
    GenParams {
        max_depth: 3,
        max_boxes_per_level: 3,
        max_boxes: 6,
        max_cosize: 4,
        max_ports: 40,
        allow_cuts: false,
        seed,
    }
}

/// Small nets whose expansions stay tiny even for arbitrary counts.
pub fn small_params(seed: u64) -> GenParams {
    GenParams {
        max_depth: 2,
        max_boxes_per_level: 2,
        max_boxes: 3,
        max_cosize: 3,
        max_ports: 16,
        allow_cuts: false,
        seed,
    }
}

/// A pseudo-experiment with one or two runs per box and counts up to
/// `max_count`, zero included.
pub fn random_pseudo(net: &Net, max_count: u32, rng: &mut ChaCha8Rng) -> PseudoExperiment {
    let mut e = PseudoExperiment::new();
    for (o, data) in &net.boxes {
        let runs = (0..rng.gen_range(1..=2))
            .map(|_| Run { count: BigUint::from(rng.gen_range(0..=max_count)), sub: random_pseudo(&data.content, max_count, rng) })
            .collect();
        e.per_box.insert(o.clone(), runs);
    }
    e
}

/// Number of run lists in `e`, at every level.
pub fn run_lists(e: &PseudoExperiment) -> usize {
    e.per_box.values().map(|runs| 1 + runs.iter().map(|r| run_lists(&r.sub)).sum::<usize>()).sum()
}

/// Applies `f` to the `n`-th run list of `e` in pre-order.
pub fn with_run_list(e: &mut PseudoExperiment, n: &mut usize, f: &mut impl FnMut(&mut Vec<Run>)) -> bool {
    for runs in e.per_box.values_mut() {
        if *n == 0 {
            f(runs);
            return true;
        }
        *n -= 1;
        for run in runs.iter_mut() {
            if with_run_list(&mut run.sub, n, f) {
                return true;
            }
        }
    }
    false
}

/// All label-, wire-, axiom-, cut- and box-preserving bijections from `a`
/// to `b`, as maps on paths, found by plain enumeration.
pub fn brute_isos(a: &Net, b: &Net, fixed: &BTreeSet<PortId>) -> Vec<BTreeMap<Path, Path>> {
    let mut out = Vec::new();
    if a.ports.len() != b.ports.len()
        || a.wires.len() != b.wires.len()
        || a.axioms.len() != b.axioms.len()
        || a.cuts.len() != b.cuts.len()
        || a.boxes.len() != b.boxes.len()
    {
        return out;
    }
    let sources: Vec<&PortId> = a.ports.keys().collect();
    let targets: Vec<&PortId> = b.ports.keys().collect();
    let mut used = vec![false; targets.len()];
    let mut phi: BTreeMap<PortId, PortId> = BTreeMap::new();
    enumerate(a, b, fixed, &sources, &targets, &mut used, &mut phi, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    a: &Net,
    b: &Net,
    fixed: &BTreeSet<PortId>,
    sources: &[&PortId],
    targets: &[&PortId],
    used: &mut Vec<bool>,
    phi: &mut BTreeMap<PortId, PortId>,
    out: &mut Vec<BTreeMap<Path, Path>>,
) {
    let n = phi.len();
    if n == sources.len() {
        out.extend(complete(a, b, phi));
        return;
    }
    let p = sources[n];
    for (m, q) in targets.iter().enumerate() {
        if used[m] || a.ports[p] != b.ports[*q] || (fixed.contains(p) && p != *q) {
            continue;
        }
        used[m] = true;
        phi.insert(p.clone(), (*q).clone());
        enumerate(a, b, fixed, sources, targets, used, phi, out);
        phi.remove(p);
        used[m] = false;
    }
}

/// Extensions of a bijection at depth 0 to whole isomorphisms.
fn complete(a: &Net, b: &Net, phi: &BTreeMap<PortId, PortId>) -> Vec<BTreeMap<Path, Path>> {
    let f = |p: &PortId| phi[p].clone();
    let wires_ok = a.wires.iter().all(|(x, y)| b.wires.get(&f(x)) == Some(&f(y)));
    let left: BTreeSet<PortId> = a.left.iter().map(f).collect();
    let axioms: BTreeSet<_> = a.axioms.iter().map(|(x, y)| pair(f(x), f(y))).collect();
    let cuts: BTreeSet<_> = a.cuts.iter().map(|(x, y)| pair(f(x), f(y))).collect();
    let boxes_ok = a.boxes.keys().all(|o| b.boxes.contains_key(&f(o)));
    if !wires_ok || left != b.left || axioms != b.axioms || cuts != b.cuts || !boxes_ok {
        return vec![];
    }
    let mut partial: Vec<BTreeMap<Path, Path>> = vec![phi.iter().map(|(x, y)| (vec![x.clone()], vec![y.clone()])).collect()];
    for (o, data) in &a.boxes {
        let image = f(o);
        let other = &b.boxes[&image];
        if data.doors.len() != other.doors.len() {
            return vec![];
        }
        let inner: Vec<BTreeMap<Path, Path>> = brute_isos(&data.content, &other.content, &BTreeSet::new())
            .into_iter()
            .filter(|psi| data.doors.iter().all(|(q, t)| other.doors.get(&psi[q]) == Some(&f(t))))
            .collect();
        let mut next = Vec::new();
        for base in &partial {
            for psi in &inner {
                let mut m = base.clone();
                for (x, y) in psi {
                    let mut px = vec![o.clone()];
                    px.extend(x.iter().cloned());
                    let mut py = vec![image.clone()];
                    py.extend(y.iter().cloned());
                    m.insert(px, py);
                }
                next.push(m);
            }
        }
        partial = next;
        if partial.is_empty() {
            return partial;
        }
    }
    partial
}

/// `o`: a `!`-port boxing a single `one`-port `q`.
pub fn leaf_box(net: &mut Net, o: &str, q: &str) {
    let mut content = Net::new();
    content.add_port(q, Label::One);
    net.add_port(o, Label::Bang);
    net.add_box(o, content, BTreeMap::from([(vec![id(q)], id(o))]));
}

/// Four boxes at depth 0; `o2` and `o4` each hold two leaf boxes.
pub fn four_box_shape() -> Net {
    let mut inner = Net::new();
    leaf_box(&mut inner, "o", "a");
    leaf_box(&mut inner, "o'", "b");
    inner.add_port("c", Label::One);
    let mut net = Net::new();
    leaf_box(&mut net, "o1", "q1");
    leaf_box(&mut net, "o3", "q3");
    for o in ["o2", "o4"] {
        net.add_port(o, Label::Bang);
        net.add_box(o, inner.clone(), BTreeMap::from([(vec![id("c")], id(o))]));
    }
    net
}

/// `p1` is a `?`-port with one premise at depth 0 and one auxiliary door of
/// `o2` from depth 1, where `o2` contains a leaf box.
pub fn arity_example() -> Net {
    let mut inner = Net::new();
    leaf_box(&mut inner, "o", "a");
    inner.add_port("c", Label::One);
    inner.add_port("q'", Label::Quest).add_port("x", Label::Bot).add_wire("x", "q'");
    let mut net = Net::new();
    net.add_port("p1", Label::Quest).add_port("w", Label::Bot).add_wire("w", "p1");
    net.add_port("o2", Label::Bang);
    net.add_box("o2", inner, BTreeMap::from([(vec![id("c")], id("o2")), (vec![id("q'")], id("p1"))]));
    net
}

/// Ports `p1 … p9` with conclusions `p1 : (A ⊗ B) ⊗ A` and
/// `p2 : A⊥ ⅋ B⊥`. With `swap` the left premise of `p2` comes from the
/// first axiom instead of the third.
pub fn two_axiom_shapes(swap: bool) -> Net {
    let mut s = Net::new();
    for (p, l) in [("p1", Label::Tensor), ("p2", Label::Par), ("p9", Label::Tensor)] {
        s.add_port(p, l);
    }
    for p in ["p3", "p4", "p5", "p6", "p7", "p8"] {
        s.add_port(p, Label::Ax);
    }
    s.add_axiom("p3", "p4").add_axiom("p5", "p6").add_axiom("p7", "p8");
    s.add_left_wire("p9", "p1").add_wire("p3", "p1");
    s.add_left_wire("p7", "p9").add_wire("p5", "p9");
    s.add_wire("p6", "p2");
    s.add_left_wire(if swap { "p4" } else { "p8" }, "p2");
    s
}

pub fn typed_example() -> TypedNet {
    let (a, b) = (MellType::var("A"), MellType::var("B"));
    let ab = MellType::tensor(a.clone(), b.clone());
    let types = [
        ("p7", a.clone()),
        ("p5", b.clone()),
        ("p3", a.clone()),
        ("p4", a.dual()),
        ("p6", b.dual()),
        ("p8", a.dual()),
        ("p9", ab.clone()),
        ("p1", MellType::tensor(ab, a.clone())),
        ("p2", MellType::par(a.dual(), b.dual())),
    ];
    TypedNet { net: two_axiom_shapes(false), types: types.into_iter().map(|(p, t)| (vec![id(p)], t)).collect() }
}

pub fn random_value(rng: &mut ChaCha8Rng, depth: usize) -> Value {
    let sign = if rng.gen_bool(0.5) { Sign::Plus } else { Sign::Minus };
    let pick = if depth == 0 { rng.gen_range(0..2) } else { rng.gen_range(0..4) };
    match pick {
        0 => Value::atom(sign, rng.gen_range(1..6)),
        1 => Value::star(sign),
        2 => Value::pair(sign, random_value(rng, depth - 1), random_value(rng, depth - 1)),
        _ => {
            let n = rng.gen_range(0..4);
            Value::bag(sign, (0..n).map(|_| random_value(rng, depth - 1)).collect())
        }
    }
}

/// Flips a connective, swaps the left premise of one, or exchanges the
/// targets of two wires.
pub fn mutate_net(net: &Net, g: &mut ChaCha8Rng) -> Net {
    let mut out = net.clone();
    let multiplicative: Vec<PortId> = out.ports.iter().filter(|(_, l)| l.is_multiplicative()).map(|(p, _)| p.clone()).collect();
    match g.gen_range(0..3) {
        0 if !multiplicative.is_empty() => {
            let p = multiplicative.choose(g).unwrap().clone();
            let flipped = if out.ports[&p] == Label::Tensor { Label::Par } else { Label::Tensor };
            out.ports.insert(p, flipped);
        }
        1 if !multiplicative.is_empty() => {
            let p = multiplicative.choose(g).unwrap();
            let prem = out.premise_map().get(p).cloned().unwrap_or_default();
            for w in prem {
                if !out.left.remove(&w) {
                    out.left.insert(w);
                }
            }
        }
        _ => {
            let wires: Vec<(PortId, PortId)> = out.wires.iter().map(|(a, b)| (a.clone(), b.clone())).collect();
            if wires.len() >= 2 {
                let (a, b) = (wires[0].clone(), wires[wires.len() - 1].clone());
                if out.ports[&a.1] == out.ports[&b.1] && !out.left.contains(&a.0) && !out.left.contains(&b.0) {
                    let mut swapped = out.clone();
                    swapped.wires.insert(a.0, b.1);
                    swapped.wires.insert(b.0, a.1);
                    if !has_wire_cycle(&swapped) {
                        out = swapped;
                    }
                }
            }
        }
    }
    out
}

fn has_wire_cycle(net: &Net) -> bool {
    net.wires.keys().any(|start| {
        let mut p = start;
        for _ in 0..net.wires.len() {
            match net.wires.get(p) {
                Some(next) if next == start => return true,
                Some(next) => p = next,
                None => return false,
            }
        }
        false
    })
}

/// `net` with its ports at depth 0 permuted among themselves.
pub fn shuffle_names(net: &Net, g: &mut ChaCha8Rng) -> Net {
    let names: Vec<PortId> = net.ports.keys().cloned().collect();
    let mut images = names.clone();
    images.shuffle(g);
    rename(net, &names.into_iter().zip(images).collect()).unwrap()
}

/// `net` with the names of ports that are not shallow conclusions permuted.
pub fn shuffle_inner_names(net: &Net, g: &mut ChaCha8Rng) -> Net {
    let conclusions = net.ground_conclusions();
    let names: Vec<PortId> = net.ports.keys().filter(|p| !conclusions.contains(*p)).cloned().collect();
    let mut images = names.clone();
    images.shuffle(g);
    rename(net, &names.into_iter().zip(images).collect()).unwrap()
}

type AtomMap = BTreeMap<Atom, (Sign, Atom)>;

/// Whether some renaming sending atoms to signed atoms, injective on atoms,
/// turns `x` into `y`.
pub fn points_match(x: &Point, y: &Point) -> bool {
    if x.keys().ne(y.keys()) {
        return false;
    }
    let goals = x.iter().map(|(p, a)| (a.clone(), y[p].clone())).collect();
    solve(goals, &mut AtomMap::new())
}

/// Depth-first search over pending `(pattern, target)` goals. Bags branch on
/// the image of their first element; everything else is forced.
fn solve(mut goals: Vec<(Value, Value)>, map: &mut AtomMap) -> bool {
    let Some((a, b)) = goals.pop() else {
        return true;
    };
    match (a.payload, b.payload) {
        (Payload::Atom(x), Payload::Atom(y)) => {
            let t = if a.sign == Sign::Plus { b.sign } else { b.sign.flip() };
            match map.get(&x) {
                Some(&image) => image == (t, y) && solve(goals, map),
                None if map.values().any(|(_, z)| *z == y) => false,
                None => {
                    map.insert(x, (t, y));
                    let found = solve(goals, map);
                    if !found {
                        map.remove(&x);
                    }
                    found
                }
            }
        }
        _ if a.sign != b.sign => false,
        (Payload::Star, Payload::Star) => solve(goals, map),
        (Payload::Pair(a1, a2), Payload::Pair(b1, b2)) => {
            goals.push((*a2, *b2));
            goals.push((*a1, *b1));
            solve(goals, map)
        }
        (Payload::Bag(xs), Payload::Bag(ys)) if xs.len() == ys.len() => {
            let Some((first, rest)) = xs.split_first() else {
                return solve(goals, map);
            };
            for n in 0..ys.len() {
                let mut others = ys.clone();
                let chosen = others.remove(n);
                let mut next = goals.clone();
                next.push((Value { sign: a.sign, payload: Payload::Bag(rest.to_vec()) }, Value { sign: b.sign, payload: Payload::Bag(others) }));
                next.push((first.clone(), chosen));
                let saved = map.clone();
                if solve(next, map) {
                    return true;
                }
                *map = saved;
            }
            false
        }
        _ => false,
    }
}
