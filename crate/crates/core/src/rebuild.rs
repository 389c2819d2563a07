//! Reconstruction of a proof-structure from expansion terms.
//!
//! One step turns `τᵢ` into `τᵢ₊₁`: the co-contractions whose exponent lies
//! in `𝓝ᵢ` become boxes again. Their borders are the critical ports, their
//! contents are read off the classes of critical components, and the
//! base-`k` digits of each class size say how many members go into the box
//! and how many stay at depth 0.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;

use crate::components::{partition_mod_equiv, ComponentFinder};
use crate::error::{Error, Result};
use crate::id::PortId;
use crate::net::{BoxData, Net};
use crate::ops::{glue, strip_shallow, substructure};
use crate::taylor::{
    bang_map, basis, digits, expand, make_k_heterogeneous, make_uniform, measures_from_one_term, mn_chain_from_exponents,
    positive_log, predicted_size, MnChain, DEFAULT_PORT_BUDGET,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RebuildState {
    pub term: Net,
    /// Chain recomputed from the co-contractions of `term`, so that its
    /// level 0 is `𝓜ᵢ` of the source.
    pub chain: MnChain,
    pub level: usize,
    pub k: usize,
}

impl RebuildState {
    pub fn new(term: Net, k: usize) -> Result<RebuildState> {
        let chain = chain_of(&term, k)?;
        Ok(RebuildState { term, chain, level: 0, k })
    }

    pub fn is_done(&self) -> bool {
        self.chain.is_empty()
    }
}

fn chain_of(term: &Net, k: usize) -> Result<MnChain> {
    let exponents = bang_map(term, k)?.into_keys().collect();
    Ok(mn_chain_from_exponents(exponents, k))
}

/// One class of critical components for a given `j`, with the members that
/// go into the new box and those kept at depth 0.
#[derive(Debug)]
struct ClassPlan {
    members: Vec<usize>,
    keep: usize,
    take: usize,
}

/// `τᵢ ↦ τᵢ₊₁`. A state whose chain is exhausted is returned unchanged.
pub fn rebuild_step(state: &RebuildState) -> Result<RebuildState> {
    if state.is_done() {
        return Ok(state.clone());
    }
    let k = state.k;
    let term = &state.term;
    let bangs = bang_map(term, k)?;
    let n_set = state.chain.n_at(0);

    let mut crit: BTreeMap<usize, BTreeSet<PortId>> = n_set.iter().map(|&j| (j, BTreeSet::new())).collect();
    for (p, a) in term.arities() {
        if term.ports[&p].is_exponential() {
            for (j, d) in digits(a, k).into_iter().enumerate() {
                if let Some(c) = crit.get_mut(&j).filter(|_| d != 0) {
                    c.insert(p.clone());
                }
            }
        }
    }
    let mut families: BTreeMap<usize, Vec<Net>> = BTreeMap::new();
    let mut removed: BTreeSet<PortId> = BTreeSet::new();
    let finder = ComponentFinder::new(term);
    for (&j, c) in &crit {
        let members = finder.closed_components(c, k).members;
        for t in &members {
            removed.extend(t.ports.keys().cloned());
        }
        families.insert(j, members);
    }
    let all_crit: BTreeSet<PortId> = crit.values().flatten().cloned().collect();
    let mut ground_ports: BTreeSet<PortId> = term
        .ports
        .keys()
        .filter(|p| !removed.contains(*p))
        .cloned()
        .collect();
    ground_ports.extend(all_crit.iter().cloned());

    let mut kept_inner: BTreeSet<PortId> = BTreeSet::new();
    let mut contents: BTreeMap<usize, Vec<Net>> = BTreeMap::new();
    let mut plans: BTreeMap<usize, Vec<ClassPlan>> = BTreeMap::new();
    for &j in &n_set {
        let members = &families[&j];
        let q = &crit[&j];
        let inner = |t: &Net| -> BTreeSet<PortId> { t.ports.keys().filter(|p| !q.contains(*p)).cloned().collect() };
        let mut plan_j = Vec::new();
        let mut chosen = Vec::new();
        for class in partition_mod_equiv(members) {
            let ds = digits(class.len(), k);
            let take = ds.get(j).copied().unwrap_or(0);
            let keep: usize = ds
                .iter()
                .enumerate()
                .filter(|(t, _)| !n_set.contains(t))
                .map(|(t, d)| d * k.pow(t as u32))
                .sum();
            let (already, fresh): (Vec<usize>, Vec<usize>) =
                class.iter().partition(|&&m| !inner(&members[m]).is_disjoint(&kept_inner));
            let mut keep_list: Vec<usize> = already.iter().copied().take(keep).collect();
            let mut rest: Vec<usize> = already.iter().copied().skip(keep).collect();
            for m in fresh {
                if keep_list.len() < keep {
                    keep_list.push(m);
                } else {
                    rest.push(m);
                }
            }
            if keep_list.len() < keep || rest.len() < take {
                return Err(Error::DigitMismatch(format!(
                    "class of {} components at j = {j} cannot keep {keep} and box {take}",
                    class.len()
                )));
            }
            for &m in &keep_list {
                kept_inner.extend(inner(&members[m]));
            }
            let mut reps = rest;
            reps.extend(keep_list.iter().copied());
            chosen.extend(reps.into_iter().take(take));
            plan_j.push(ClassPlan { members: class, keep, take });
        }
        contents.insert(j, chosen.iter().map(|&m| members[m].clone()).collect());
        plans.insert(j, plan_j);
    }
    ground_ports.extend(kept_inner.iter().cloned());

    for (&j, plan_j) in &plans {
        let q = &crit[&j];
        for plan in plan_j {
            let inside = plan
                .members
                .iter()
                .filter(|&&m| families[&j][m].ports.keys().filter(|p| !q.contains(*p)).all(|p| ground_ports.contains(p)))
                .count();
            if inside != plan.keep {
                return Err(Error::DigitMismatch(format!(
                    "{inside} components of a class of {} stay at depth 0 for j = {j}, expected {} (boxing {})",
                    plan.members.len(),
                    plan.keep,
                    plan.take
                )));
            }
        }
    }

    let mut next = substructure(term, &ground_ports, &BTreeSet::new()).ok_or_else(|| {
        Error::DigitMismatch("the approximant of the ground structure is not a substructure".into())
    })?;
    for &j in &n_set {
        let o = bangs.get(&j).ok_or_else(|| Error::DigitMismatch(format!("no co-contraction of arity {k}^{j}")))?;
        let glued = glue(contents[&j].iter())?;
        let stripped = strip_shallow(&glued)?;
        let principal: Vec<_> = stripped.targets.values().filter(|t| *t == o).collect();
        if principal.len() != 1 {
            return Err(Error::DigitMismatch(format!(
                "box {o} would get {} principal doors",
                principal.len()
            )));
        }
        if let Some((w, _)) = next.wires.iter().find(|(_, t)| *t == o) {
            return Err(Error::DigitMismatch(format!("wire {w} still enters the new box {o}")));
        }
        for t in stripped.targets.values() {
            if !next.ports.contains_key(t) {
                return Err(Error::DigitMismatch(format!(
                    "door of {o} targets {t}, which is not at depth 0"
                )));
            }
        }
        next.boxes.insert(o.clone(), BoxData { content: stripped.net, doors: stripped.targets });
    }
    Ok(RebuildState { chain: chain_of(&next, k)?, term: next, level: state.level + 1, k })
}

/// Iterates [`rebuild_step`] until no co-contraction is left.
pub fn rebuild(term0: &Net, k: usize) -> Result<Net> {
    let mut state = RebuildState::new(term0.clone(), k)?;
    while !state.is_done() {
        let before = state.term.co_contractions().len();
        state = rebuild_step(&state)?;
        if state.term.co_contractions().len() >= before {
            return Err(Error::DigitMismatch(format!(
                "step {} made no progress on {before} co-contractions",
                state.level
            )));
        }
    }
    Ok(state.term)
}

/// Least `k ≥ lower` such that every arity is `k^j` with `j ≥ 1`.
pub fn recover_base(arities: &[usize], lower: usize) -> Option<usize> {
    let smallest = *arities.iter().min()?;
    let mut candidates = BTreeSet::new();
    let mut j = 1u32;
    while (1usize << j.min(63)) <= smallest {
        let root = (smallest as f64).powf(1.0 / j as f64).round() as usize;
        for k in root.saturating_sub(1)..=root + 1 {
            if k >= 2 && k.checked_pow(j) == Some(smallest) {
                candidates.insert(k);
            }
        }
        j += 1;
    }
    candidates
        .into_iter()
        .filter(|&k| k >= lower)
        .find(|&k| arities.iter().all(|&a| positive_log(&BigUint::from(a), k).is_some()))
}

/// Rebuilds `R` from `τ₀` of a 1-pseudo-experiment and `τ₀` of a
/// k-heterogeneous one with `k ≥ b(R)`.
pub fn rebuild_from_pair(term_one: &Net, term_khet: &Net) -> Result<Net> {
    let basis = measures_from_one_term(term_one).basis();
    let arities: Vec<usize> = term_khet
        .co_contractions()
        .iter()
        .map(|p| term_khet.arity(p))
        .collect();
    if arities.is_empty() {
        return Ok(term_khet.clone());
    }
    let k = match recover_base(&arities, basis.max(2)) {
        Some(k) => k,
        None => {
            return Err(match recover_base(&arities, 2) {
                Some(k) => Error::BasisViolation { k, basis },
                None => {
                    let p = term_khet.co_contractions().into_iter().next().unwrap();
                    Error::NonPowerArity { arity: term_khet.arity(&p), port: p, k: basis }
                }
            })
        }
    };
    rebuild(term_khet, k)
}

/// The full pipeline on a cut-free PS `R`: expand with the 1-pseudo-experiment
/// and with a k-heterogeneous one for `k = b(R)`, then rebuild from the two
/// terms. Fails with [`Error::TooLarge`] when either term is out of budget.
pub fn round_trip(net: &Net, seed: u64) -> Result<Net> {
    let k = basis(net);
    let e = make_k_heterogeneous(net, k, seed)?;
    let size = predicted_size(net, &e, 0);
    if size > BigUint::from(DEFAULT_PORT_BUDGET) {
        return Err(Error::TooLarge { predicted: size.to_string(), budget: DEFAULT_PORT_BUDGET });
    }
    let term_one = expand(net, &make_uniform(net, 1), 0)?.term;
    let term_khet = expand(net, &e, 0)?.term;
    rebuild_from_pair(&term_one, &term_khet)
}

/// Short human-readable account of a state, used by the command line.
pub fn describe(state: &RebuildState) -> String {
    let bangs: Vec<String> = state
        .term
        .co_contractions()
        .iter()
        .map(|p| format!("{p}:{}", state.term.arity(p)))
        .collect();
    format!(
        "level {} k {} boxes {} co-contractions [{}]",
        state.level,
        state.k,
        state.term.box_count(),
        bangs.join(" ")
    )
}
