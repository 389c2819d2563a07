//! Structural operations on nets: restriction to shallow boxes,
//! substructures, gluing, adding wires, stripping shallow conclusions,
//! adding contractions under a box, renaming and copy tagging.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::error::{Error, Result};
use crate::id::{path_string, Path, PortId};
use crate::net::{pair, BoxData, Label, Net};

/// `S^{≤i}`: keeps the boxes whose content has depth `< i`, with their
/// doors. The `!`-ports of dropped boxes stay as co-contractions of arity 0.
pub fn restrict_leq(net: &Net, i: usize) -> Net {
    let mut out = net.clone();
    out.boxes.retain(|_, b| b.content.depth() < i);
    out
}

/// Adjacency lookups for repeated substructure and component queries.
#[derive(Debug, Default)]
pub struct NetIndex {
    pub axiom_partner: HashMap<PortId, PortId>,
    pub cut_partner: HashMap<PortId, PortId>,
    pub premises: HashMap<PortId, Vec<PortId>>,
    /// Boxes having a door that targets the port.
    pub door_sources: HashMap<PortId, Vec<PortId>>,
}

impl NetIndex {
    pub fn new(net: &Net) -> NetIndex {
        let mut idx = NetIndex::default();
        for (a, b) in &net.axioms {
            idx.axiom_partner.insert(a.clone(), b.clone());
            idx.axiom_partner.insert(b.clone(), a.clone());
        }
        for (a, b) in &net.cuts {
            idx.cut_partner.insert(a.clone(), b.clone());
            idx.cut_partner.insert(b.clone(), a.clone());
        }
        for (w, t) in &net.wires {
            idx.premises.entry(t.clone()).or_default().push(w.clone());
        }
        for (o, data) in &net.boxes {
            let targets: BTreeSet<&PortId> = data.doors.values().collect();
            for t in targets {
                idx.door_sources.entry(t.clone()).or_default().push(o.clone());
            }
        }
        idx
    }
}

/// The unique `S'` with `ports₀(S') = ports` and `S' ⊑_Q S`, or `None` when
/// the induced restriction is not a differential in-PS (a dangling axiom, a
/// tensor or par that loses a premise, a box whose door leaves `ports`).
pub fn substructure(net: &Net, ports: &BTreeSet<PortId>, q: &BTreeSet<PortId>) -> Option<Net> {
    substructure_indexed(net, &NetIndex::new(net), ports, q)
}

pub fn substructure_indexed(
    net: &Net,
    idx: &NetIndex,
    ports: &BTreeSet<PortId>,
    q: &BTreeSet<PortId>,
) -> Option<Net> {
    let mut out = Net::new();
    for p in ports {
        out.ports.insert(p.clone(), net.label(p)?);
    }
    let erased = |p: &PortId| q.contains(p) && out.ports[p].is_exponential();
    for w in ports {
        if erased(w) {
            continue;
        }
        if let Some(t) = net.wires.get(w) {
            if ports.contains(t) {
                out.wires.insert(w.clone(), t.clone());
                if net.left.contains(w) && out.ports[t].is_multiplicative() {
                    out.left.insert(w.clone());
                }
            }
        }
    }
    for p in ports {
        if let Some(partner) = idx.axiom_partner.get(p) {
            if !ports.contains(partner) {
                return None;
            }
            out.axioms.insert(pair(p.clone(), partner.clone()));
        }
        if let Some(partner) = idx.cut_partner.get(p) {
            if ports.contains(partner) && !erased(p) && !erased(partner) {
                out.cuts.insert(pair(p.clone(), partner.clone()));
            }
        }
        if let Some(data) = net.boxes.get(p) {
            if data.doors.values().any(|t| !ports.contains(t)) {
                return None;
            }
            out.boxes.insert(p.clone(), data.clone());
        }
    }
    for (p, label) in &out.ports {
        if label.is_multiplicative() {
            let kept: Vec<&PortId> = idx
                .premises
                .get(p)
                .map(|ws| ws.iter().filter(|w| out.wires.contains_key(*w)).collect())
                .unwrap_or_default();
            let lefts = kept.iter().filter(|w| out.left.contains(**w)).count();
            if kept.len() != 2 || lefts != 1 {
                return None;
            }
        }
    }
    Some(out)
}

/// `⊕𝒰`: componentwise union of nets that share only `?`-conclusions.
pub fn glue<'a>(nets: impl IntoIterator<Item = &'a Net>) -> Result<Net> {
    let mut out = Net::new();
    let mut conclusions_of_out: BTreeSet<PortId> = BTreeSet::new();
    for net in nets {
        let concl = net.ground_conclusions();
        for (p, &label) in &net.ports {
            if let Some(&existing) = out.ports.get(p) {
                let shareable = label == Label::Quest
                    && existing == Label::Quest
                    && concl.contains(p)
                    && conclusions_of_out.contains(p);
                if !shareable {
                    return Err(Error::NotGluable(p.clone()));
                }
            }
        }
        for (p, &label) in &net.ports {
            out.ports.insert(p.clone(), label);
        }
        out.wires.extend(net.wires.iter().map(|(a, b)| (a.clone(), b.clone())));
        out.left.extend(net.left.iter().cloned());
        out.axioms.extend(net.axioms.iter().cloned());
        out.cuts.extend(net.cuts.iter().cloned());
        out.boxes.extend(net.boxes.iter().map(|(o, b)| (o.clone(), b.clone())));
        conclusions_of_out.extend(concl);
    }
    Ok(out)
}

/// `S@t`: adds a wire (for a shallow conclusion) or a door (for a deep one)
/// from each key of `t` to its value, which must be an exponential port at
/// depth 0 that is not a box.
pub fn add_wires(net: &Net, t: &BTreeMap<Path, PortId>) -> Result<Net> {
    let mut out = net.clone();
    let shallow = net.ground_conclusions();
    for (key, target) in t {
        match out.label(target) {
            Some(l) if l.is_exponential() && !out.is_box(target) => {}
            Some(_) => return Err(Error::TargetNotQuest(target.clone())),
            None => return Err(Error::UnknownPort(target.to_string())),
        }
        match key.as_slice() {
            [] => return Err(Error::NotAConclusion(String::new())),
            [p] => {
                if !shallow.contains(p) || out.wires.contains_key(p) {
                    return Err(Error::NotAConclusion(p.to_string()));
                }
                let mut cur = Some(target);
                while let Some(c) = cur {
                    if c == p {
                        return Err(Error::CycleIntroduced {
                            from: p.to_string(),
                            to: target.clone(),
                        });
                    }
                    cur = out.wires.get(c);
                }
                out.wires.insert(p.clone(), target.clone());
            }
            [o, rest @ ..] => {
                let data = out
                    .boxes
                    .get_mut(o)
                    .ok_or_else(|| Error::NotAConclusion(path_string(key)))?;
                let rest = rest.to_vec();
                if data.doors.contains_key(&rest) || !data.content.conclusions().contains(&rest) {
                    return Err(Error::NotAConclusion(path_string(key)));
                }
                data.doors.insert(rest, target.clone());
            }
        }
    }
    Ok(out)
}

/// Result of [`strip_shallow`]: `T` is recovered as `(net ⊕ removed)@targets`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stripped {
    pub net: Net,
    /// Former wire or door of `T` (as a path of the stripped net) to the
    /// removed conclusion it entered.
    pub targets: BTreeMap<Path, PortId>,
    pub removed: BTreeMap<PortId, Label>,
}

impl Stripped {
    pub fn restore(&self) -> Result<Net> {
        let mut singles = Vec::new();
        for (p, &label) in &self.removed {
            let mut n = Net::new();
            n.add_port(p.clone(), label);
            singles.push(n);
        }
        let glued = glue(std::iter::once(&self.net).chain(singles.iter()))?;
        add_wires(&glued, &self.targets)
    }
}

/// `T̄`: removes the shallow conclusions of `T`, which must all be
/// exponential ports that are not boxes; their premises become conclusions.
pub fn strip_shallow(net: &Net) -> Result<Stripped> {
    let conclusions = net.ground_conclusions();
    let mut removed = BTreeMap::new();
    for c in &conclusions {
        let label = net.ports[c];
        if !label.is_exponential() || net.is_box(c) {
            return Err(Error::PreconditionViolated(format!(
                "shallow conclusion {c} is a {}{}",
                if net.is_box(c) { "box " } else { "" },
                label
            )));
        }
        removed.insert(c.clone(), label);
    }
    let mut out = net.clone();
    let mut targets = BTreeMap::new();
    for c in &conclusions {
        out.ports.remove(c);
    }
    out.wires.retain(|w, t| {
        if removed.contains_key(t) {
            targets.insert(vec![w.clone()], t.clone());
            false
        } else {
            true
        }
    });
    for (o, data) in out.boxes.iter_mut() {
        data.doors.retain(|key, t| {
            if removed.contains_key(t) {
                let mut path = vec![o.clone()];
                path.extend(key.iter().cloned());
                targets.insert(path, t.clone());
                false
            } else {
                true
            }
        });
    }
    Ok(Stripped {
        net: out,
        targets,
        removed,
    })
}

/// `φ·ₒR`: adds fresh `?`-conclusions `φ(c)` to the content of box `o` for
/// every `c ∈ contractionsUnder(R, o)`, reroutes each auxiliary door of `o`
/// to the fresh port matching its old target, and leaves `o` with only its
/// principal door.
pub fn add_contractions(net: &Net, o: &PortId, phi: &BTreeMap<PortId, PortId>) -> Result<Net> {
    let data = net
        .boxes
        .get(o)
        .ok_or_else(|| Error::UnknownPort(o.to_string()))?;
    let under = net.contractions_under(o);
    let domain: BTreeSet<PortId> = phi.keys().cloned().collect();
    if domain != under {
        return Err(Error::PreconditionViolated(format!(
            "renaming must be defined exactly on the contractions under {o}"
        )));
    }
    let images: BTreeSet<&PortId> = phi.values().collect();
    if images.len() != phi.len() {
        return Err(Error::PreconditionViolated("contraction renaming is not injective".into()));
    }
    for q in &images {
        if data.content.ports.contains_key(*q) {
            return Err(Error::NameClash((*q).clone()));
        }
    }
    let mut content = data.content.clone();
    for q in &images {
        content.add_port((*q).clone(), Label::Quest);
    }
    let reroute: BTreeMap<Path, PortId> = data
        .doors
        .iter()
        .filter(|(_, t)| *t != o)
        .map(|(k, t)| (k.clone(), phi[t].clone()))
        .collect();
    let content = add_wires(&content, &reroute)?;
    let doors = data
        .doors
        .iter()
        .filter(|(_, t)| *t == o)
        .map(|(k, t)| (k.clone(), t.clone()))
        .collect();
    let mut out = net.clone();
    out.boxes.insert(o.clone(), BoxData { content, doors });
    Ok(out)
}

/// Applies `f` to every port name at depth 0 (box contents are untouched).
pub fn map_shallow(net: &Net, f: impl Fn(&PortId) -> PortId) -> Net {
    Net {
        ports: net.ports.iter().map(|(p, l)| (f(p), *l)).collect(),
        wires: net.wires.iter().map(|(w, t)| (f(w), f(t))).collect(),
        left: net.left.iter().map(&f).collect(),
        axioms: net.axioms.iter().map(|(a, b)| pair(f(a), f(b))).collect(),
        cuts: net.cuts.iter().map(|(a, b)| pair(f(a), f(b))).collect(),
        boxes: net
            .boxes
            .iter()
            .map(|(o, data)| {
                (
                    f(o),
                    BoxData {
                        content: data.content.clone(),
                        doors: data.doors.iter().map(|(k, t)| (k.clone(), f(t))).collect(),
                    },
                )
            })
            .collect(),
    }
}

/// `S[φ]` for a partial injection `φ` on the ports at depth 0.
pub fn rename(net: &Net, phi: &BTreeMap<PortId, PortId>) -> Result<Net> {
    let mut seen: HashSet<&PortId> = HashSet::new();
    for (p, image) in phi {
        if !net.ports.contains_key(p) {
            return Err(Error::UnknownPort(p.to_string()));
        }
        if !seen.insert(image) {
            return Err(Error::Capture(image.clone()));
        }
        if net.ports.contains_key(image) && !phi.contains_key(image) {
            return Err(Error::Capture(image.clone()));
        }
    }
    Ok(map_shallow(net, |p| phi.get(p).cloned().unwrap_or_else(|| p.clone())))
}

/// `⟨o, ⟨n, S⟩⟩`: renames every shallow port `p` to `Copy(o, n, p)`.
pub fn tag(net: &Net, boxed: &PortId, ordinal: u32) -> Net {
    map_shallow(net, |p| PortId::copy(boxed.clone(), ordinal, p.clone()))
}

/// Inverse of [`tag`]; fails if some shallow port is not tagged by `(o, n)`.
pub fn untag(net: &Net, boxed: &PortId, ordinal: u32) -> Result<Net> {
    for p in net.ports.keys() {
        match p.as_copy() {
            Some(tag) if &tag.boxed == boxed && tag.ordinal == ordinal => {}
            _ => return Err(Error::PreconditionViolated(format!("{p} is not tagged by {boxed}.{ordinal}"))),
        }
    }
    Ok(map_shallow(net, |p| p.as_copy().map(|t| t.inner.clone()).unwrap_or_else(|| p.clone())))
}
