//! Weak connectedness `⌢`, the component sets `C_k(S, Q)` and `cc(R)`, the
//! count of conclusion-free components, and partitioning modulo `≡`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::id::{Path, PortId};
use crate::iso::{equiv, net_invariant};
use crate::net::Net;
use crate::ops::{map_shallow, substructure_indexed, NetIndex};

/// `p ⌢_S q`.
pub fn coherent(net: &Net, p: &PortId, q: &PortId) -> bool {
    let pair = crate::net::pair(p.clone(), q.clone());
    net.axioms.contains(&pair)
        || net.cuts.contains(&pair)
        || net.wires.get(p) == Some(q)
        || net.wires.get(q) == Some(p)
        || net.boxes.values().any(|b| {
            let targets: BTreeSet<&PortId> = b.doors.values().collect();
            targets.contains(p) && targets.contains(q)
        })
}

/// Neighbourhoods for `⌢` over dense port indices (the position of a port in
/// `net.ports`). Door targets of one box form a clique, kept as a group so
/// that flood fills visit it once.
struct Adjacency<'a> {
    idx: NetIndex,
    ids: Vec<&'a PortId>,
    direct: Vec<Vec<u32>>,
    groups: Vec<Vec<u32>>,
    group_targets: Vec<Vec<u32>>,
    /// Premise of nothing and not cut.
    conclusion: Vec<bool>,
}

impl<'a> Adjacency<'a> {
    fn new(net: &'a Net) -> Adjacency<'a> {
        let ids: Vec<&PortId> = net.ports.keys().collect();
        let index: HashMap<&PortId, u32> = ids.iter().enumerate().map(|(n, p)| (*p, n as u32)).collect();
        let n = ids.len();
        let mut direct = vec![Vec::new(); n];
        let mut conclusion = vec![true; n];
        let link = |a: &PortId, b: &PortId, direct: &mut Vec<Vec<u32>>| {
            if let (Some(&x), Some(&y)) = (index.get(a), index.get(b)) {
                direct[x as usize].push(y);
                direct[y as usize].push(x);
            }
        };
        for (a, b) in net.axioms.iter() {
            link(a, b, &mut direct);
        }
        for (a, b) in net.cuts.iter() {
            link(a, b, &mut direct);
            for p in [a, b] {
                if let Some(&x) = index.get(p) {
                    conclusion[x as usize] = false;
                }
            }
        }
        for (w, t) in &net.wires {
            link(w, t, &mut direct);
            if let Some(&x) = index.get(w) {
                conclusion[x as usize] = false;
            }
        }
        let mut groups = vec![Vec::new(); n];
        let mut group_targets = Vec::new();
        for data in net.boxes.values() {
            let ts: BTreeSet<u32> = data.doors.values().filter_map(|t| index.get(t).copied()).collect();
            for &t in &ts {
                groups[t as usize].push(group_targets.len() as u32);
            }
            group_targets.push(ts.into_iter().collect());
        }
        Adjacency { idx: NetIndex::new(net), ids, direct, groups, group_targets, conclusion }
    }
}

/// Scratch marks reused across flood fills.
struct Marks {
    port: Vec<u32>,
    group: Vec<u32>,
    round: u32,
}

/// Ports reachable from `seed` through ports outside `q`, with the `q`
/// ports met on the way. `seed` must not be in `q`.
fn flood(adj: &Adjacency, marks: &mut Marks, seed: u32, q: &[bool]) -> Vec<u32> {
    marks.round += 1;
    let round = marks.round;
    marks.port[seed as usize] = round;
    let mut seen = vec![seed];
    let mut stack = vec![seed];
    let mut visit = |n: u32, seen: &mut Vec<u32>, stack: &mut Vec<u32>| {
        if marks.port[n as usize] != round {
            marks.port[n as usize] = round;
            seen.push(n);
            if !q[n as usize] {
                stack.push(n);
            }
        }
    };
    while let Some(p) = stack.pop() {
        for &n in &adj.direct[p as usize] {
            visit(n, &mut seen, &mut stack);
        }
        for &g in &adj.groups[p as usize] {
            if marks.group[g as usize] != round {
                marks.group[g as usize] = round;
                for &n in &adj.group_targets[g as usize] {
                    visit(n, &mut seen, &mut stack);
                }
            }
        }
    }
    seen
}

/// The members of `C_k(S, Q)`, ordered by their least port.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentSet {
    pub members: Vec<Net>,
    pub boundary: BTreeSet<PortId>,
    pub k: usize,
}

/// `C_k(S, Q)`: every `T ⊴_Q S` connected through ports not in `Q`, with a
/// port outside `Q`, shallow conclusions inside `Q` and `cosize(T) < k`.
pub fn closed_components(net: &Net, q: &BTreeSet<PortId>, k: usize) -> ComponentSet {
    ComponentFinder::new(net).closed_components(q, k)
}

/// Adjacency of one net, built once for several boundary sets.
pub struct ComponentFinder<'a> {
    net: &'a Net,
    adj: Adjacency<'a>,
}

impl<'a> ComponentFinder<'a> {
    pub fn new(net: &'a Net) -> ComponentFinder<'a> {
        ComponentFinder { net, adj: Adjacency::new(net) }
    }

    /// Same as [`closed_components`] on the indexed net.
    pub fn closed_components(&self, q: &BTreeSet<PortId>, k: usize) -> ComponentSet {
        let members = flood_components(self.net, &self.adj, q, true)
            .into_iter()
            .filter(|t| t.cosize() < k && t.ground_conclusions().is_subset(q))
            .collect();
        ComponentSet { members, boundary: q.clone(), k }
    }
}

/// Every flood-fill class of `S` outside `Q`, materialized as a substructure
/// with `Q` as erasure set; classes whose restriction is not a net are
/// dropped. With `closed`, classes having a conclusion of `S` outside `Q`
/// are dropped before materializing.
fn flood_components(net: &Net, adj: &Adjacency, q: &BTreeSet<PortId>, closed: bool) -> Vec<Net> {
    let n = adj.ids.len();
    let in_q: Vec<bool> = adj.ids.iter().map(|p| q.contains(*p)).collect();
    let mut marks = Marks { port: vec![0; n], group: vec![0; adj.group_targets.len()], round: 0 };
    let mut covered = vec![false; n];
    let mut out = Vec::new();
    for seed in 0..n {
        if in_q[seed] || covered[seed] {
            continue;
        }
        let class = flood(adj, &mut marks, seed as u32, &in_q);
        let mut open = false;
        for &p in &class {
            if !in_q[p as usize] {
                covered[p as usize] = true;
                open |= adj.conclusion[p as usize];
            }
        }
        if closed && open {
            continue;
        }
        let ports: BTreeSet<PortId> = class.iter().map(|&p| adj.ids[p as usize].clone()).collect();
        if let Some(t) = substructure_indexed(net, &adj.idx, &ports, q) {
            out.push(t);
        }
    }
    out
}

/// `cc(R)`: the partition of `R` into components, with `⊕ cc(R) = R`.
pub fn connected_components(net: &Net) -> Vec<Net> {
    flood_components(net, &Adjacency::new(net), &BTreeSet::new(), false)
}

/// The member of `cc(R)` containing the port `p` at depth 0.
pub fn component_of(net: &Net, p: &PortId) -> Option<Net> {
    let seed = net.ports.keys().position(|x| x == p)?;
    let adj = Adjacency::new(net);
    let n = adj.ids.len();
    let mut marks = Marks { port: vec![0; n], group: vec![0; adj.group_targets.len()], round: 0 };
    let class = flood(&adj, &mut marks, seed as u32, &vec![false; n]);
    let ports: BTreeSet<PortId> = class.iter().map(|&x| adj.ids[x as usize].clone()).collect();
    substructure_indexed(net, &adj.idx, &ports, &BTreeSet::new())
}

/// Components without any conclusion at depth 0, plus the same count inside
/// every box, recursively.
pub fn nb_invisible(net: &Net) -> usize {
    let here = connected_components(net)
        .iter()
        .filter(|u| u.conclusions().is_empty())
        .count();
    here + net.boxes.values().map(|b| nb_invisible(&b.content)).sum::<usize>()
}

/// Classes of `nets` under `≡`, as sorted index lists; classes are ordered
/// by their least member.
///
/// Nets that coincide once copy ordinals are erased from the names of their
/// non-conclusion ports are renamings of each other, so they share a class
/// without an isomorphism search.
pub fn partition_mod_equiv(nets: &[Net]) -> Vec<Vec<usize>> {
    let mut shapes: HashMap<Net, usize> = HashMap::new();
    let mut shape_of: Vec<usize> = Vec::with_capacity(nets.len());
    let mut representatives: Vec<usize> = Vec::new();
    for (n, t) in nets.iter().enumerate() {
        let shape = match erase_ordinals(t) {
            Some(s) => s,
            None => t.clone(),
        };
        let next = representatives.len();
        let id = *shapes.entry(shape).or_insert(next);
        if id == next {
            representatives.push(n);
        }
        shape_of.push(id);
    }
    let mut buckets: BTreeMap<(BTreeSet<PortId>, u64), Vec<usize>> = BTreeMap::new();
    for (id, &n) in representatives.iter().enumerate() {
        let t = &nets[n];
        let conclusions = t.ground_conclusions();
        let marks: BTreeMap<Path, u64> = conclusions
            .iter()
            .map(|c| (vec![c.clone()], name_mark(c)))
            .collect();
        buckets
            .entry((conclusions, net_invariant(t, &marks)))
            .or_default()
            .push(id);
    }
    let mut class_of_shape = vec![0usize; representatives.len()];
    let mut class_count = 0;
    for members in buckets.into_values() {
        let mut local: Vec<usize> = Vec::new();
        'member: for id in members {
            for &rep in &local {
                if equiv(&nets[representatives[rep]], &nets[representatives[id]]) {
                    class_of_shape[id] = class_of_shape[rep];
                    continue 'member;
                }
            }
            class_of_shape[id] = class_count;
            class_count += 1;
            local.push(id);
        }
    }
    let mut classes: Vec<Vec<usize>> = vec![Vec::new(); class_count];
    for (n, &id) in shape_of.iter().enumerate() {
        classes[class_of_shape[id]].push(n);
    }
    for class in classes.iter_mut() {
        class.sort_by(|&a, &b| nets[a].cmp(&nets[b]).then(a.cmp(&b)));
    }
    classes.sort_by(|x, y| nets[x[0]].cmp(&nets[y[0]]).then(x[0].cmp(&y[0])));
    classes
}

/// `net` with every copy ordinal set to 0 in the names of ports at depth 0
/// that are not conclusions, or `None` when this merges two ports.
fn erase_ordinals(net: &Net) -> Option<Net> {
    fn zero(p: &PortId) -> PortId {
        match p.as_copy() {
            None => p.clone(),
            Some(tag) => PortId::copy(zero(&tag.boxed), 0, zero(&tag.inner)),
        }
    }
    let keep = net.ground_conclusions();
    let f = |p: &PortId| if keep.contains(p) { p.clone() } else { zero(p) };
    let out = map_shallow(net, f);
    (out.ports.len() == net.ports.len()).then_some(out)
}

fn name_mark(p: &PortId) -> u64 {
    use std::hash::{Hash, Hasher};
    let mut h = std::collections::hash_map::DefaultHasher::new();
    p.hash(&mut h);
    h.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::Label;
    use crate::ops::glue;

    fn id(s: &str) -> PortId {
        PortId::atom(s)
    }

    fn two_bots_into(c: &str) -> Net {
        let mut s = Net::new();
        s.add_port(c, Label::Quest);
        for b in ["b1", "b2"] {
            s.add_port(b, Label::Bot);
            s.add_wire(b, c);
        }
        s
    }

    #[test]
    fn coherence_clauses() {
        let mut s = two_bots_into("c");
        assert!(coherent(&s, &id("b1"), &id("c")));
        assert!(coherent(&s, &id("c"), &id("b1")));
        assert!(!coherent(&s, &id("b1"), &id("b2")));
        let mut content = Net::new();
        content.add_port("x", Label::One);
        content.add_port("y", Label::Bot);
        s.add_port("d", Label::Quest);
        s.add_port("o", Label::Bang);
        s.add_box(
            "o",
            content,
            BTreeMap::from([(vec![id("x")], id("o")), (vec![id("y")], id("d"))]),
        );
        assert!(coherent(&s, &id("o"), &id("d")));
    }

    #[test]
    fn components_split_at_the_boundary() {
        let s = two_bots_into("c");
        let set = closed_components(&s, &BTreeSet::from([id("c")]), 10);
        assert_eq!(set.members.len(), 2);
        for t in &set.members {
            assert_eq!(t.ports.len(), 2);
            assert_eq!(t.ground_conclusions(), BTreeSet::from([id("c")]));
        }
        assert_eq!(connected_components(&s), vec![s.clone()]);
    }

    #[test]
    fn free_conclusions_exclude_a_component() {
        let mut s = Net::new();
        s.add_port("a", Label::Ax).add_port("b", Label::Ax).add_axiom("a", "b");
        assert!(closed_components(&s, &BTreeSet::new(), 2).members.is_empty());
        assert_eq!(connected_components(&s), vec![s]);
    }

    #[test]
    fn components_glue_back() {
        let mut s = two_bots_into("c");
        s.add_port("a", Label::Ax).add_port("b", Label::Ax).add_axiom("a", "b");
        let cc = connected_components(&s);
        assert_eq!(cc.len(), 2);
        assert_eq!(glue(cc.iter()).unwrap(), s);
        assert_eq!(component_of(&s, &id("a")).unwrap().ports.len(), 2);
    }

    #[test]
    fn invisible_components() {
        let mut cut_pair = Net::new();
        cut_pair
            .add_port("a", Label::Ax)
            .add_port("b", Label::Ax)
            .add_axiom("a", "b")
            .add_port("x", Label::Ax)
            .add_port("y", Label::Ax)
            .add_axiom("x", "y")
            .add_cut("a", "x");
        assert_eq!(nb_invisible(&cut_pair), 0, "b and y remain conclusions");
        let mut closed = Net::new();
        closed
            .add_port("a", Label::Ax)
            .add_port("b", Label::Ax)
            .add_axiom("a", "b")
            .add_cut("a", "b");
        assert_eq!(nb_invisible(&closed), 1);
        let mut outer = closed.clone();
        let mut content = closed.clone();
        content.add_port("z", Label::One);
        outer.add_port("o", Label::Bang);
        outer.add_box("o", content, BTreeMap::from([(vec![id("z")], id("o"))]));
        assert_eq!(nb_invisible(&outer), 2);
        assert_eq!(nb_invisible(&two_bots_into("c")), 0);
    }

    #[test]
    fn partition_respects_conclusion_names() {
        let a = two_bots_into("c");
        let b = two_bots_into("d");
        let nets = vec![a.clone(), b, a];
        let classes = partition_mod_equiv(&nets);
        assert_eq!(classes.len(), 2);
        assert!(classes.contains(&vec![0, 2]));
    }
}
