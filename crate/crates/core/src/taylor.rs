//! Pseudo-experiments, the partial expansion `τᵢᵉ(R)` with its provenance
//! map `κ`, and the base-`k` arithmetic read off co-contraction arities.
//!
//! A pseudo-experiment gives every box at depth 0 an ordered family of
//! copies. Consecutive copies that share the same sub-experiment are stored
//! as one [`Run`] with a big-integer multiplicity, so that experiments taking
//! astronomically many copies of a leaf box stay representable even though
//! they cannot be expanded.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::components::nb_invisible;
use crate::error::{Error, Result};
use crate::id::{path_string, Path, PortId};
use crate::net::{BoxData, Net};
use crate::ops::{restrict_leq, tag};

/// Default cap on the number of ports of an expansion term.
pub const DEFAULT_PORT_BUDGET: usize = 400_000;
/// Default cap on the number of box instances enumerated by
/// [`make_k_heterogeneous`].
pub const DEFAULT_INSTANCE_BUDGET: usize = 4096;

/// `count` consecutive copies of a box, each driven by `sub`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Run {
    pub count: BigUint,
    pub sub: PseudoExperiment,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PseudoExperiment {
    pub per_box: BTreeMap<PortId, Vec<Run>>,
}

/// `e^#`: box path to the set of copy counts of its instances.
pub type ESharp = BTreeMap<Path, BTreeSet<BigUint>>;

impl PseudoExperiment {
    pub fn new() -> PseudoExperiment {
        PseudoExperiment::default()
    }

    pub fn with_box(mut self, o: impl Into<PortId>, runs: Vec<Run>) -> Self {
        self.per_box.insert(o.into(), runs);
        self
    }

    /// Number of copies taken of the box `o` at depth 0.
    pub fn copies(&self, o: &PortId) -> BigUint {
        self.per_box
            .get(o)
            .map(|runs| runs.iter().map(|r| &r.count).sum())
            .unwrap_or_default()
    }

    /// Checks that the domain is the set of boxes at depth 0 of `net`,
    /// recursively.
    pub fn check_shape(&self, net: &Net) -> Result<()> {
        let ours: BTreeSet<&PortId> = self.per_box.keys().collect();
        let theirs: BTreeSet<&PortId> = net.boxes.keys().collect();
        if ours != theirs {
            return Err(Error::ShapeMismatch(format!(
                "experiment covers {{{}}} but the boxes at depth 0 are {{{}}}",
                join(&ours),
                join(&theirs)
            )));
        }
        for (o, runs) in &self.per_box {
            for run in runs {
                run.sub.check_shape(&net.boxes[o].content)?;
            }
        }
        Ok(())
    }

    /// Total number of copies of every box path, summed over all its
    /// instances. For k-heterogeneous experiments this is `Σ e^#`.
    pub fn copy_totals(&self) -> BTreeMap<Path, BigUint> {
        let mut out: BTreeMap<Path, BigUint> = BTreeMap::new();
        for (o, runs) in &self.per_box {
            let entry = out.entry(vec![o.clone()]).or_default();
            for run in runs {
                *entry += &run.count;
            }
            for run in runs {
                if run.count.is_zero() {
                    continue;
                }
                for (path, total) in run.sub.copy_totals() {
                    let mut full = vec![o.clone()];
                    full.extend(path);
                    *out.entry(full).or_default() += &run.count * total;
                }
            }
        }
        out
    }
}

fn join(items: &BTreeSet<&PortId>) -> String {
    items.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", ")
}

/// `e^#` over every box path of `net`, including paths below boxes that
/// took no copies (those map to the empty set).
pub fn e_sharp(net: &Net, e: &PseudoExperiment) -> Result<ESharp> {
    e.check_shape(net)?;
    Ok(e_sharp_unchecked(net, e))
}

fn e_sharp_unchecked(net: &Net, e: &PseudoExperiment) -> ESharp {
    let mut out: ESharp = net.box_paths().into_iter().map(|p| (p, BTreeSet::new())).collect();
    for (o, runs) in &e.per_box {
        out.get_mut(&vec![o.clone()]).unwrap().insert(e.copies(o));
        for run in runs {
            if run.count.is_zero() {
                continue;
            }
            for (path, values) in e_sharp_unchecked(&net.boxes[o].content, &run.sub) {
                let mut full = vec![o.clone()];
                full.extend(path);
                out.entry(full).or_default().extend(values);
            }
        }
    }
    out
}

/// Every box at every level takes exactly `n` identical copies.
pub fn make_uniform(net: &Net, n: usize) -> PseudoExperiment {
    let mut e = PseudoExperiment::new();
    for (o, data) in &net.boxes {
        let sub = make_uniform(&data.content, n);
        e.per_box.insert(o.clone(), vec![Run { count: BigUint::from(n), sub }]);
    }
    e
}

struct Instance<'a> {
    /// Box names of `R` leading to this box.
    names: Path,
    /// Copy ordinals of the enclosing instances.
    ordinals: Vec<u64>,
    content: &'a Net,
    content_depth: usize,
    exponent: usize,
    /// Per copy ordinal, the instances of the content's boxes.
    children: Vec<Vec<usize>>,
}

/// A k-heterogeneous pseudo-experiment where every box instance takes `k^j`
/// copies for a distinct `j ≥ 1`.
///
/// Instances are numbered by decreasing content depth, then decreasing
/// nesting level, then box path and copy ordinals; instance number `n` gets
/// exponent `n + 1`. A nonzero `seed` shuffles instances of equal content
/// depth and nesting level. Fails with [`Error::TooLarge`] when more than
/// `instance_budget` instances would have to be enumerated.
pub fn make_k_heterogeneous_with_budget(
    net: &Net,
    k: usize,
    seed: u64,
    instance_budget: usize,
) -> Result<PseudoExperiment> {
    assert!(k >= 2, "k-heterogeneous experiments need k ≥ 2");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut arena: Vec<Instance> = Vec::new();
    let mut pending: Vec<usize> = Vec::new();
    let mut roots = Vec::new();
    for (o, data) in &net.boxes {
        roots.push(arena.len());
        pending.push(arena.len());
        arena.push(Instance {
            names: vec![o.clone()],
            ordinals: vec![],
            content: &data.content,
            content_depth: data.content.depth(),
            exponent: 0,
            children: vec![],
        });
    }
    let mut next_exponent = 1usize;
    let max_depth = net.depth();
    for d in (0..max_depth).rev() {
        let (mut group, rest): (Vec<usize>, Vec<usize>) =
            pending.into_iter().partition(|&n| arena[n].content_depth == d);
        pending = rest;
        group.sort_by(|&a, &b| {
            let (x, y) = (&arena[a], &arena[b]);
            y.names
                .len()
                .cmp(&x.names.len())
                .then_with(|| x.names.cmp(&y.names))
                .then_with(|| x.ordinals.cmp(&y.ordinals))
        });
        if seed != 0 {
            for chunk in group.chunk_by_mut(|&a, &b| arena[a].names.len() == arena[b].names.len()) {
                chunk.shuffle(&mut rng);
            }
        }
        for n in group {
            let exponent = next_exponent;
            next_exponent += 1;
            arena[n].exponent = exponent;
            if arena[n].content.boxes.is_empty() {
                continue;
            }
            let count = k
                .checked_pow(exponent as u32)
                .filter(|c| arena.len() + c * arena[n].content.boxes.len() <= instance_budget)
                .ok_or_else(|| Error::TooLarge {
                    predicted: format!("{k}^{exponent} copies of {}", path_string(&arena[n].names)),
                    budget: instance_budget,
                })?;
            let content = arena[n].content;
            let mut children = Vec::with_capacity(count);
            for copy in 0..count as u64 {
                let mut here = Vec::new();
                for (o, data) in &content.boxes {
                    let mut names = arena[n].names.clone();
                    names.push(o.clone());
                    let mut ordinals = arena[n].ordinals.clone();
                    ordinals.push(copy);
                    here.push(arena.len());
                    pending.push(arena.len());
                    arena.push(Instance {
                        names,
                        ordinals,
                        content: &data.content,
                        content_depth: data.content.depth(),
                        exponent: 0,
                        children: vec![],
                    });
                }
                children.push(here);
            }
            arena[n].children = children;
        }
    }
    fn build(arena: &[Instance], nodes: &[usize], k: usize) -> PseudoExperiment {
        let mut e = PseudoExperiment::new();
        for &n in nodes {
            let inst = &arena[n];
            let name = inst.names.last().unwrap().clone();
            let runs = if inst.content.boxes.is_empty() {
                vec![Run {
                    count: BigUint::from(k).pow(inst.exponent as u32),
                    sub: PseudoExperiment::new(),
                }]
            } else {
                inst.children
                    .iter()
                    .map(|kids| Run { count: BigUint::one(), sub: build(arena, kids, k) })
                    .collect()
            };
            e.per_box.insert(name, runs);
        }
        e
    }
    Ok(build(&arena, &roots, k))
}

pub fn make_k_heterogeneous(net: &Net, k: usize, seed: u64) -> Result<PseudoExperiment> {
    make_k_heterogeneous_with_budget(net, k, seed, DEFAULT_INSTANCE_BUDGET)
}

/// `log_k(v)` when `v = k^j` with `j ≥ 1`.
pub fn positive_log(v: &BigUint, k: usize) -> Option<usize> {
    let k = BigUint::from(k);
    let mut v = v.clone();
    let mut j = 0;
    while v > BigUint::one() {
        if !(&v % &k).is_zero() {
            return None;
        }
        v /= &k;
        j += 1;
    }
    (v.is_one() && j > 0).then_some(j)
}

/// The three clauses of k-heterogeneity, with the sibling clause applied
/// at every nesting level: every box instance takes `k^j` copies with
/// `j ≥ 1` and no two instances share a count.
pub fn is_k_heterogeneous(net: &Net, e: &PseudoExperiment, k: usize) -> bool {
    if k < 2 || e.check_shape(net).is_err() {
        return false;
    }
    fn walk(net: &Net, e: &PseudoExperiment, k: usize, seen: &mut HashSet<BigUint>) -> bool {
        for (o, runs) in &e.per_box {
            let count = e.copies(o);
            if positive_log(&count, k).is_none() || !seen.insert(count) {
                return false;
            }
            let content = &net.boxes[o].content;
            for run in runs {
                if run.count.is_zero() {
                    continue;
                }
                if !run.count.is_one() && !content.boxes.is_empty() {
                    return false;
                }
                if !walk(content, &run.sub, k, seen) {
                    return false;
                }
            }
        }
        true
    }
    walk(net, e, k, &mut HashSet::new())
}

/// `τᵢᵉ(R)` together with `κ` over all its ports.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpansionTerm {
    pub term: Net,
    pub kappa: BTreeMap<Path, Path>,
    pub source_depth_bound: usize,
}

/// Number of ports (all levels) of `τᵢᵉ(R)`, computed without expanding.
pub fn predicted_size(net: &Net, e: &PseudoExperiment, i: usize) -> BigUint {
    let mut total = BigUint::from(net.ports.len());
    for (o, data) in &net.boxes {
        if data.content.depth() < i {
            total += BigUint::from(data.content.size());
            continue;
        }
        for run in e.per_box.get(o).into_iter().flatten() {
            total += &run.count * predicted_size(&data.content, &run.sub, i);
        }
    }
    total
}

pub fn expand(net: &Net, e: &PseudoExperiment, i: usize) -> Result<ExpansionTerm> {
    expand_with_budget(net, e, i, DEFAULT_PORT_BUDGET)
}

/// Expands the boxes whose content has depth `≥ i` according to `e`.
/// Fails with [`Error::TooLarge`] before doing any work when the term would
/// have more than `budget` ports.
pub fn expand_with_budget(net: &Net, e: &PseudoExperiment, i: usize, budget: usize) -> Result<ExpansionTerm> {
    e.check_shape(net)?;
    let predicted = predicted_size(net, e, i);
    if predicted > BigUint::from(budget) {
        return Err(Error::TooLarge { predicted: predicted.to_string(), budget });
    }
    let (term, kappa) = expand_rec(net, e, i);
    Ok(ExpansionTerm { term, kappa, source_depth_bound: i })
}

fn prefixed(head: &PortId, tail: &[PortId]) -> Path {
    let mut p = Vec::with_capacity(tail.len() + 1);
    p.push(head.clone());
    p.extend_from_slice(tail);
    p
}

fn expand_rec(net: &Net, e: &PseudoExperiment, i: usize) -> (Net, BTreeMap<Path, Path>) {
    let mut out = restrict_leq(net, i);
    let mut kappa: BTreeMap<Path, Path> = out.all_ports().into_iter().map(|p| (p.clone(), p)).collect();
    for (o, data) in &net.boxes {
        if data.content.depth() < i {
            continue;
        }
        let mut ordinal: u32 = 0;
        for run in &e.per_box[o] {
            let count = run.count.to_u32().expect("expansion size was checked against the budget");
            if count == 0 {
                continue;
            }
            let (sub, sub_kappa) = expand_rec(&data.content, &run.sub, i);
            let new_wires: Vec<(PortId, PortId)> = sub
                .ground_conclusions()
                .into_iter()
                .filter_map(|q| data.doors.get(&sub_kappa[&vec![q.clone()]]).map(|t| (q, t.clone())))
                .collect();
            let new_doors: Vec<(PortId, Path, PortId)> = sub
                .non_shallow_conclusions()
                .into_iter()
                .filter_map(|path| {
                    data.doors
                        .get(&sub_kappa[&path])
                        .map(|t| (path[0].clone(), path[1..].to_vec(), t.clone()))
                })
                .collect();
            for _ in 0..count {
                let copy = |p: &PortId| PortId::copy(o.clone(), ordinal, p.clone());
                let tagged = tag(&sub, o, ordinal);
                out.ports.extend(tagged.ports);
                out.wires.extend(tagged.wires);
                out.left.extend(tagged.left);
                out.axioms.extend(tagged.axioms);
                out.cuts.extend(tagged.cuts);
                out.boxes.extend(tagged.boxes);
                for (path, source) in &sub_kappa {
                    kappa.insert(prefixed(&copy(&path[0]), &path[1..]), prefixed(o, source));
                }
                for (q, t) in &new_wires {
                    out.wires.insert(copy(q), t.clone());
                }
                for (inner, key, t) in &new_doors {
                    let b: &mut BoxData = out.boxes.get_mut(&copy(inner)).unwrap();
                    b.doors.insert(key.clone(), t.clone());
                }
                ordinal += 1;
            }
        }
    }
    (out, kappa)
}

/// Closed form of the arity in `τᵢᵉ(R)` of a port `p` at depth 0 of `R`:
/// its arity in `R^{≤i}` plus, for every door of an expanded box into `p`,
/// the number of copies of the deepest expanded box around that door.
pub fn predicted_arity(net: &Net, e: &PseudoExperiment, i: usize, p: &PortId) -> BigUint {
    let mut total = BigUint::from(restrict_leq(net, i).arity(p));
    let totals = e.copy_totals();
    for (o, data) in &net.boxes {
        if data.content.depth() < i {
            continue;
        }
        for (key, t) in &data.doors {
            if t != p {
                continue;
            }
            let source = prefixed(o, key);
            let b = deepest_expanded_box(net, &source, i);
            total += totals.get(&b).cloned().unwrap_or_default();
        }
    }
    total
}

/// `b^{≥i}`: the deepest box on the path of `q` whose content has depth `≥ i`.
pub fn deepest_expanded_box(net: &Net, q: &[PortId], i: usize) -> Path {
    let mut best = Vec::new();
    let mut level = net;
    for (n, name) in q.iter().enumerate().take(q.len().saturating_sub(1)) {
        let Some(data) = level.boxes.get(name) else { break };
        if data.content.depth() >= i {
            best = q[..=n].to_vec();
        }
        level = &data.content;
    }
    best
}

/// The sets `𝓜ᵢ`, `𝓝ᵢ` and the base-`k` digits of `|𝓜ᵢ|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MnChain {
    pub k: usize,
    /// `𝓜₀, 𝓜₁, …` up to and including the first empty set.
    pub m: Vec<BTreeSet<usize>>,
    /// `𝓝ᵢ = 𝓜ᵢ \ 𝓜ᵢ₊₁` for every non-empty `𝓜ᵢ`.
    pub n: Vec<BTreeSet<usize>>,
    /// Digits of `|𝓜ᵢ|`, least significant first.
    pub digits: Vec<Vec<usize>>,
}

impl MnChain {
    pub fn len(&self) -> usize {
        self.n.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n.is_empty()
    }

    /// `𝓝ᵢ`, empty past the end of the chain.
    pub fn n_at(&self, i: usize) -> BTreeSet<usize> {
        self.n.get(i).cloned().unwrap_or_default()
    }

    pub fn m_at(&self, i: usize) -> BTreeSet<usize> {
        self.m.get(i).cloned().unwrap_or_default()
    }
}

/// Base-`k` digits of `n`, least significant first (`[]` for 0).
pub fn digits(mut n: usize, k: usize) -> Vec<usize> {
    let mut out = Vec::new();
    while n > 0 {
        out.push(n % k);
        n /= k;
    }
    out
}

pub fn mn_chain_from_exponents(m0: BTreeSet<usize>, k: usize) -> MnChain {
    assert!(k >= 2);
    let mut chain = MnChain { k, m: vec![m0], n: vec![], digits: vec![] };
    loop {
        let current = chain.m.last().unwrap().clone();
        if current.is_empty() {
            return chain;
        }
        let ds = digits(current.len(), k);
        let next: BTreeSet<usize> = ds.iter().enumerate().skip(1).filter(|(_, d)| **d != 0).map(|(j, _)| j).collect();
        chain.n.push(current.difference(&next).copied().collect());
        chain.digits.push(ds);
        chain.m.push(next);
    }
}

pub fn mn_chain(esharp: &ESharp, k: usize) -> Result<MnChain> {
    let mut m0 = BTreeSet::new();
    for values in esharp.values() {
        for v in values {
            m0.insert(positive_log(v, k).ok_or_else(|| Error::NonPowerValue(v.to_string()))?);
        }
    }
    Ok(mn_chain_from_exponents(m0, k))
}

/// `!_{e,i}`: exponent `j` to the unique co-contraction of arity `k^j`.
pub fn bang_map(term: &Net, k: usize) -> Result<BTreeMap<usize, PortId>> {
    let arities = term.arities();
    let mut out: BTreeMap<usize, PortId> = BTreeMap::new();
    for p in term.co_contractions() {
        let arity = arities[&p];
        let j = positive_log(&BigUint::from(arity), k).ok_or_else(|| Error::NonPowerArity {
            port: p.clone(),
            arity,
            k,
        })?;
        if let Some(other) = out.insert(j, p.clone()) {
            return Err(Error::DuplicateArity(other, p, arity));
        }
    }
    Ok(out)
}

/// `c_k^j(S)`: exponential ports at depth 0 whose arity has a nonzero
/// `j`-th digit in base `k`.
pub fn critical_ports(term: &Net, k: usize, j: usize) -> BTreeSet<PortId> {
    term.arities()
        .into_iter()
        .filter(|(p, a)| term.ports[p].is_exponential() && digits(*a, k).get(j).is_some_and(|d| *d != 0))
        .map(|(p, _)| p)
        .collect()
}

/// `c_k^J(S)` for a set of digit positions.
pub fn critical_ports_over(term: &Net, k: usize, js: &BTreeSet<usize>) -> BTreeSet<PortId> {
    js.iter().flat_map(|&j| critical_ports(term, k, j)).collect()
}

/// Box count, cosize and invisible-component count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Measures {
    pub cosize: usize,
    pub n_boxes: usize,
    pub n_invisible: usize,
}

impl Measures {
    pub fn of_net(net: &Net) -> Measures {
        Measures { cosize: net.cosize(), n_boxes: net.box_count(), n_invisible: nb_invisible(net) }
    }

    pub fn basis(&self) -> usize {
        self.n_boxes.max(self.cosize).max(self.n_invisible).max(1) + 1
    }
}

/// `b(R) = max{|boxes(R)|, cosize(R), invisible(R), 1} + 1`.
pub fn basis(net: &Net) -> usize {
    Measures::of_net(net).basis()
}

/// Reads the measures of `R` off `τ₀` of a 1-pseudo-experiment: every box
/// instance of `R` leaves exactly one co-contraction.
pub fn measures_from_one_term(term: &Net) -> Measures {
    Measures {
        cosize: term.cosize(),
        n_boxes: term.co_contractions().len(),
        n_invisible: nb_invisible(term),
    }
}
