//! Isomorphisms of (differential) in-PS's.
//!
//! The search colours ports by iterated neighbourhood refinement, then
//! extends a partial bijection port by port in breadth-first order, drawing
//! candidates from the image of an already mapped neighbour. A box is checked
//! recursively once the box and every door target have an image: the door
//! map of the content is turned into colours on the content conclusions, so
//! the content isomorphism has to respect `φ ∘ t = t' ∘ φ`.
//!
//! Colours also express the anchors of `≡` (shallow conclusions are fixed
//! pointwise) and of `≡_(S,o)` (conclusions are matched by door target).

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};
use crate::id::{Path, PortId};
use crate::net::Net;
use crate::ops::{strip_shallow, NetIndex};

/// A constraint colour attached to a conclusion path. The first component
/// is a namespace so that colours built at different nesting depths never
/// collide.
pub type Color = (u32, PortId);

/// A witness isomorphism: the bijection on ports at depth 0 plus one
/// witness per box for its content.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct IsoMap {
    pub ground: BTreeMap<PortId, PortId>,
    pub boxes: BTreeMap<PortId, IsoMap>,
}

impl IsoMap {
    /// Image of a port given as a path through boxes.
    pub fn apply(&self, path: &[PortId]) -> Option<Path> {
        match path {
            [] => Some(Vec::new()),
            [p] => Some(vec![self.ground.get(p)?.clone()]),
            [o, rest @ ..] => {
                let mut out = vec![self.ground.get(o)?.clone()];
                out.extend(self.boxes.get(o)?.apply(rest)?);
                Some(out)
            }
        }
    }

    pub fn is_identity(&self) -> bool {
        self.ground.iter().all(|(a, b)| a == b) && self.boxes.values().all(IsoMap::is_identity)
    }
}

/// `≃` ignores every name; `≡` fixes the shallow conclusions pointwise.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum IsoMode {
    Free,
    FixConclusions,
}

pub fn iso_check(a: &Net, b: &Net, mode: IsoMode) -> Option<IsoMap> {
    let (ca, cb) = match mode {
        IsoMode::Free => (BTreeMap::new(), BTreeMap::new()),
        IsoMode::FixConclusions => (anchor_conclusions(a), anchor_conclusions(b)),
    };
    find_iso(a, b, &ca, &cb)
}

pub fn equiv(a: &Net, b: &Net) -> bool {
    iso_check(a, b, IsoMode::FixConclusions).is_some()
}

fn anchor_conclusions(net: &Net) -> BTreeMap<Path, Color> {
    net.ground_conclusions()
        .into_iter()
        .map(|p| (vec![p.clone()], (0, p)))
        .collect()
}

/// `U ≡_(S,o) T`: some `φ: U ≃ T̄` sends each conclusion `p` of `U` to a
/// port whose former target in `T` is `t_S(o, p)`.
pub fn iso_mod_box(u: &Net, s: &Net, o: &PortId, t: &Net) -> Result<bool> {
    let data = s
        .boxes
        .get(o)
        .ok_or_else(|| Error::UnknownPort(o.to_string()))?;
    let mut ca = BTreeMap::new();
    for p in u.conclusions() {
        match data.doors.get(&p) {
            Some(target) => {
                ca.insert(p, (0, target.clone()));
            }
            None => {
                return Err(Error::PreconditionViolated(format!(
                    "conclusion {} of U is not a temporary conclusion of {o}",
                    crate::id::path_string(&p)
                )))
            }
        }
    }
    let stripped = strip_shallow(t)?;
    let cb = stripped
        .targets
        .iter()
        .map(|(k, v)| (k.clone(), (0, v.clone())))
        .collect();
    Ok(find_iso(u, &stripped.net, &ca, &cb).is_some())
}

/// General search: an isomorphism `a ≃ b` sending every coloured conclusion
/// path of `a` to a path of `b` with the same colour (and uncoloured paths
/// to uncoloured ones).
pub fn find_iso(
    a: &Net,
    b: &Net,
    colors_a: &BTreeMap<Path, Color>,
    colors_b: &BTreeMap<Path, Color>,
) -> Option<IsoMap> {
    find_iso_ns(a, b, colors_a, colors_b, 0)
}

fn hash_of<T: Hash>(value: &T) -> u64 {
    let mut h = DefaultHasher::new();
    value.hash(&mut h);
    h.finish()
}

struct Side<'a> {
    net: &'a Net,
    idx: NetIndex,
    shallow: HashMap<PortId, Color>,
    /// Colours on conclusions inside each box, relative to the content.
    deep: HashMap<PortId, BTreeMap<Path, Color>>,
    /// Distinct door targets of each box.
    door_targets: HashMap<PortId, Vec<PortId>>,
}

impl<'a> Side<'a> {
    fn new(net: &'a Net, colors: &BTreeMap<Path, Color>) -> Side<'a> {
        let mut shallow = HashMap::new();
        let mut deep: HashMap<PortId, BTreeMap<Path, Color>> = HashMap::new();
        for (path, c) in colors {
            match path.as_slice() {
                [p] => {
                    shallow.insert(p.clone(), c.clone());
                }
                [o, rest @ ..] => {
                    deep.entry(o.clone()).or_default().insert(rest.to_vec(), c.clone());
                }
                [] => {}
            }
        }
        let door_targets = net
            .boxes
            .iter()
            .map(|(o, d)| {
                let set: BTreeSet<&PortId> = d.doors.values().collect();
                (o.clone(), set.into_iter().cloned().collect())
            })
            .collect();
        Side {
            net,
            idx: NetIndex::new(net),
            shallow,
            deep,
            door_targets,
        }
    }

    fn initial_color(&self, p: &PortId) -> u64 {
        let net = self.net;
        let label = net.ports[p];
        let premises = self.idx.premises.get(p).map_or(0, Vec::len);
        let door_in: usize = self
            .idx
            .door_sources
            .get(p)
            .map(|os| os.iter().map(|o| net.boxes[o].doors.values().filter(|t| *t == p).count()).sum())
            .unwrap_or(0);
        let box_inv = net.boxes.get(p).map(|data| {
            let mut marks: BTreeMap<Path, u64> = BTreeMap::new();
            for (k, t) in &data.doors {
                marks.insert(k.clone(), if t == p { 1 } else { 2 });
            }
            if let Some(deep) = self.deep.get(p) {
                for (k, c) in deep {
                    marks.insert(k.clone(), hash_of(&(3u8, c)));
                }
            }
            net_invariant(&data.content, &marks)
        });
        hash_of(&(
            label,
            net.wires.contains_key(p),
            net.left.contains(p),
            self.idx.axiom_partner.contains_key(p),
            self.idx.cut_partner.contains_key(p),
            premises,
            door_in,
            self.shallow.get(p),
            box_inv,
        ))
    }

    fn refine(&self, colors: &HashMap<PortId, u64>) -> HashMap<PortId, u64> {
        let net = self.net;
        net.ports
            .keys()
            .map(|p| {
                let mut prem: Vec<u64> = self
                    .idx
                    .premises
                    .get(p)
                    .map(|ws| ws.iter().map(|w| colors[w] ^ net.left.contains(w) as u64).collect())
                    .unwrap_or_default();
                prem.sort_unstable();
                let mut doors: Vec<u64> = net
                    .boxes
                    .get(p)
                    .map(|d| d.doors.values().map(|t| colors[t]).collect())
                    .unwrap_or_default();
                doors.sort_unstable();
                let mut sources: Vec<u64> = self
                    .idx
                    .door_sources
                    .get(p)
                    .map(|os| os.iter().map(|o| colors[o]).collect())
                    .unwrap_or_default();
                sources.sort_unstable();
                let c = hash_of(&(
                    colors[p],
                    net.wires.get(p).map(|t| colors[t]),
                    self.idx.axiom_partner.get(p).map(|q| colors[q]),
                    self.idx.cut_partner.get(p).map(|q| colors[q]),
                    prem,
                    doors,
                    sources,
                ));
                (p.clone(), c)
            })
            .collect()
    }
}

fn class_count(colors: &HashMap<PortId, u64>) -> usize {
    colors.values().collect::<HashSet<_>>().len()
}

fn histogram(colors: &HashMap<PortId, u64>) -> BTreeMap<u64, usize> {
    let mut h = BTreeMap::new();
    for c in colors.values() {
        *h.entry(*c).or_insert(0) += 1;
    }
    h
}

/// A name-independent invariant of a net whose conclusion paths carry
/// `marks`; equal for isomorphic nets with matching marks.
pub fn net_invariant(net: &Net, marks: &BTreeMap<Path, u64>) -> u64 {
    let colors: BTreeMap<Path, Color> = marks
        .iter()
        .map(|(k, m)| (k.clone(), (u32::MAX, PortId::atom(&format!("m{m}")))))
        .collect();
    let side = Side::new(net, &colors);
    let final_colors = stable_colors(&side);
    let mut all: Vec<u64> = final_colors.values().copied().collect();
    all.sort_unstable();
    hash_of(&(net.ports.len(), net.depth(), all))
}

fn stable_colors(side: &Side) -> HashMap<PortId, u64> {
    let mut colors: HashMap<PortId, u64> = side
        .net
        .ports
        .keys()
        .map(|p| (p.clone(), side.initial_color(p)))
        .collect();
    let mut classes = class_count(&colors);
    loop {
        let next = side.refine(&colors);
        let n = class_count(&next);
        colors = next;
        if n == classes {
            return colors;
        }
        classes = n;
    }
}

fn quick_reject(a: &Net, b: &Net, sa: &Side, sb: &Side) -> bool {
    if a.ports.len() != b.ports.len()
        || a.wires.len() != b.wires.len()
        || a.left.len() != b.left.len()
        || a.axioms.len() != b.axioms.len()
        || a.cuts.len() != b.cuts.len()
        || a.boxes.len() != b.boxes.len()
        || sa.shallow.len() != sb.shallow.len()
        || sa.deep.len() != sb.deep.len()
    {
        return true;
    }
    let mut la: Vec<_> = sa.shallow.values().collect();
    let mut lb: Vec<_> = sb.shallow.values().collect();
    la.sort();
    lb.sort();
    la != lb
}

fn find_iso_ns(
    a: &Net,
    b: &Net,
    colors_a: &BTreeMap<Path, Color>,
    colors_b: &BTreeMap<Path, Color>,
    ns: u32,
) -> Option<IsoMap> {
    let sa = Side::new(a, colors_a);
    let sb = Side::new(b, colors_b);
    if quick_reject(a, b, &sa, &sb) {
        return None;
    }
    // Joint refinement: both sides use the same colour function, so classes
    // are comparable across sides.
    let mut ca: HashMap<PortId, u64> = a.ports.keys().map(|p| (p.clone(), sa.initial_color(p))).collect();
    let mut cb: HashMap<PortId, u64> = b.ports.keys().map(|p| (p.clone(), sb.initial_color(p))).collect();
    let mut classes = 0;
    loop {
        if histogram(&ca) != histogram(&cb) {
            return None;
        }
        let n = class_count(&ca);
        if n == classes {
            break;
        }
        classes = n;
        ca = sa.refine(&ca);
        cb = sb.refine(&cb);
    }
    Search::new(&sa, &sb, ca, cb, ns).run()
}

struct Frame {
    port: PortId,
    candidates: Vec<PortId>,
    next: usize,
    /// Boxes whose content check succeeded when this frame's port was mapped.
    checked: Vec<PortId>,
    mapped: bool,
}

struct Search<'s, 'a> {
    a: &'s Side<'a>,
    b: &'s Side<'a>,
    ca: HashMap<PortId, u64>,
    cb: HashMap<PortId, u64>,
    ns: u32,
    order: Vec<PortId>,
    fwd: HashMap<PortId, PortId>,
    inv: HashMap<PortId, PortId>,
    /// Ports of `{o} ∪ door targets(o)` still unmapped, per box of `a`.
    pending: HashMap<PortId, usize>,
    /// Boxes of `a` containing each port in `{o} ∪ door targets(o)`.
    box_watch: HashMap<PortId, Vec<PortId>>,
    contents: HashMap<PortId, IsoMap>,
    by_color: HashMap<u64, Vec<PortId>>,
}

impl<'s, 'a> Search<'s, 'a> {
    fn new(a: &'s Side<'a>, b: &'s Side<'a>, ca: HashMap<PortId, u64>, cb: HashMap<PortId, u64>, ns: u32) -> Self {
        let mut pending = HashMap::new();
        let mut box_watch: HashMap<PortId, Vec<PortId>> = HashMap::new();
        for (o, targets) in &a.door_targets {
            let mut set: BTreeSet<&PortId> = targets.iter().collect();
            set.insert(o);
            pending.insert(o.clone(), set.len());
            for p in set {
                box_watch.entry(p.clone()).or_default().push(o.clone());
            }
        }
        for o in a.net.boxes.keys() {
            pending.entry(o.clone()).or_insert(1);
            box_watch.entry(o.clone()).or_default();
        }
        let mut by_color: HashMap<u64, Vec<PortId>> = HashMap::new();
        for p in b.net.ports.keys() {
            by_color.entry(cb[p]).or_default().push(p.clone());
        }
        let order = bfs_order(a, &ca);
        Search {
            a,
            b,
            ca,
            cb,
            ns,
            order,
            fwd: HashMap::new(),
            inv: HashMap::new(),
            pending,
            box_watch,
            contents: HashMap::new(),
            by_color,
        }
    }

    fn candidates(&self, p: &PortId) -> Vec<PortId> {
        let (a, b) = (self.a, self.b);
        let color = self.ca[p];
        let raw: Vec<PortId> = 'found: {
            if let Some(q) = a.idx.axiom_partner.get(p) {
                if let Some(q2) = self.fwd.get(q) {
                    break 'found b.idx.axiom_partner.get(q2).cloned().into_iter().collect();
                }
            }
            if let Some(q) = a.idx.cut_partner.get(p) {
                if let Some(q2) = self.fwd.get(q) {
                    break 'found b.idx.cut_partner.get(q2).cloned().into_iter().collect();
                }
            }
            if let Some(t) = a.net.wires.get(p) {
                if let Some(t2) = self.fwd.get(t) {
                    break 'found b.idx.premises.get(t2).cloned().unwrap_or_default();
                }
            }
            if let Some(ws) = a.idx.premises.get(p) {
                for w in ws {
                    if let Some(w2) = self.fwd.get(w) {
                        break 'found b.net.wires.get(w2).cloned().into_iter().collect();
                    }
                }
            }
            if let Some(targets) = a.door_targets.get(p) {
                for t in targets {
                    if t == p {
                        continue;
                    }
                    if let Some(t2) = self.fwd.get(t) {
                        break 'found b.idx.door_sources.get(t2).cloned().unwrap_or_default();
                    }
                }
            }
            if let Some(os) = a.idx.door_sources.get(p) {
                for o in os {
                    if let Some(o2) = self.fwd.get(o) {
                        break 'found b.door_targets.get(o2).cloned().unwrap_or_default();
                    }
                }
            }
            self.by_color.get(&color).cloned().unwrap_or_default()
        };
        let mut out: Vec<PortId> = raw
            .into_iter()
            .filter(|c| self.cb.get(c) == Some(&color) && !self.inv.contains_key(c))
            .collect();
        out.sort();
        out.dedup();
        out
    }

    fn related(&self, x: Option<&PortId>, y: Option<&PortId>) -> bool {
        match (x, y) {
            (None, None) => true,
            (Some(x), Some(y)) => {
                self.fwd.get(x).is_none_or(|img| img == y) && self.inv.get(y).is_none_or(|pre| pre == x)
            }
            _ => false,
        }
    }

    fn consistent(&self, p: &PortId, c: &PortId) -> bool {
        let (a, b) = (self.a, self.b);
        if a.net.ports[p] != b.net.ports[c]
            || a.shallow.get(p) != b.shallow.get(c)
            || a.net.left.contains(p) != b.net.left.contains(c)
            || a.net.is_box(p) != b.net.is_box(c)
        {
            return false;
        }
        if !self.related(a.net.wires.get(p), b.net.wires.get(c))
            || !self.related(a.idx.axiom_partner.get(p), b.idx.axiom_partner.get(c))
            || !self.related(a.idx.cut_partner.get(p), b.idx.cut_partner.get(c))
        {
            return false;
        }
        for w in a.idx.premises.get(p).into_iter().flatten() {
            if let Some(w2) = self.fwd.get(w) {
                if b.net.wires.get(w2) != Some(c) {
                    return false;
                }
            }
        }
        for w2 in b.idx.premises.get(c).into_iter().flatten() {
            if let Some(w) = self.inv.get(w2) {
                if a.net.wires.get(w) != Some(p) {
                    return false;
                }
            }
        }
        let empty = Vec::new();
        let src_a = a.idx.door_sources.get(p).unwrap_or(&empty);
        let src_b = b.idx.door_sources.get(c).unwrap_or(&empty);
        for o in src_a {
            if let Some(o2) = self.fwd.get(o) {
                if !src_b.contains(o2) {
                    return false;
                }
            }
        }
        for o2 in src_b {
            if let Some(o) = self.inv.get(o2) {
                if !src_a.contains(o) {
                    return false;
                }
            }
        }
        if let (Some(ta), Some(tb)) = (a.door_targets.get(p), b.door_targets.get(c)) {
            for t in ta {
                if let Some(t2) = self.fwd.get(t) {
                    if !tb.contains(t2) {
                        return false;
                    }
                }
            }
            for t2 in tb {
                if let Some(t) = self.inv.get(t2) {
                    if !ta.contains(t) {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn check_box(&self, o: &PortId) -> Option<IsoMap> {
        let o2 = &self.fwd[o];
        let da = &self.a.net.boxes[o];
        let db = &self.b.net.boxes[o2];
        let ns = self.ns + 1;
        let mut ca: BTreeMap<Path, Color> = self.a.deep.get(o).cloned().unwrap_or_default();
        for (k, t) in &da.doors {
            ca.insert(k.clone(), (ns, self.fwd[t].clone()));
        }
        let mut cb: BTreeMap<Path, Color> = self.b.deep.get(o2).cloned().unwrap_or_default();
        for (k, t) in &db.doors {
            cb.insert(k.clone(), (ns, t.clone()));
        }
        if ca.len() != cb.len() {
            return None;
        }
        find_iso_ns(&da.content, &db.content, &ca, &cb, ns)
    }

    /// Maps `p ↦ c` and runs the box checks it completes; undoes everything
    /// and returns `None` if one fails.
    fn assign(&mut self, p: &PortId, c: &PortId) -> Option<Vec<PortId>> {
        self.fwd.insert(p.clone(), c.clone());
        self.inv.insert(c.clone(), p.clone());
        let watchers = self.box_watch.get(p).cloned().unwrap_or_default();
        let mut ready = Vec::new();
        for o in &watchers {
            let n = self.pending.get_mut(o).expect("watched box");
            *n -= 1;
            if *n == 0 {
                ready.push(o.clone());
            }
        }
        let mut checked = Vec::new();
        let mut ok = true;
        for o in &ready {
            match self.check_box(o) {
                Some(m) => {
                    self.contents.insert(o.clone(), m);
                    checked.push(o.clone());
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Some(checked);
        }
        self.unassign(p, &checked);
        None
    }

    fn unassign(&mut self, p: &PortId, checked: &[PortId]) {
        for o in checked {
            self.contents.remove(o);
        }
        for o in self.box_watch.get(p).cloned().unwrap_or_default() {
            *self.pending.get_mut(&o).expect("watched box") += 1;
        }
        if let Some(c) = self.fwd.remove(p) {
            self.inv.remove(&c);
        }
    }

    fn run(mut self) -> Option<IsoMap> {
        let mut stack: Vec<Frame> = Vec::new();
        loop {
            if stack.len() == self.order.len() {
                break;
            }
            let port = self.order[stack.len()].clone();
            let candidates = self.candidates(&port);
            stack.push(Frame {
                port,
                candidates,
                next: 0,
                checked: Vec::new(),
                mapped: false,
            });
            // Advance the top frame, backtracking through exhausted frames.
            loop {
                let top = stack.last_mut()?;
                if top.mapped {
                    let (port, checked) = (top.port.clone(), std::mem::take(&mut top.checked));
                    top.mapped = false;
                    self.unassign(&port, &checked);
                }
                let top = stack.last().expect("non-empty");
                let mut success = None;
                let mut next = top.next;
                let port = top.port.clone();
                while next < top.candidates.len() {
                    let c = top.candidates[next].clone();
                    next += 1;
                    if self.consistent(&port, &c) {
                        if let Some(checked) = self.assign(&port, &c) {
                            success = Some(checked);
                            break;
                        }
                    }
                }
                let top = stack.last_mut().expect("non-empty");
                top.next = next;
                match success {
                    Some(checked) => {
                        top.checked = checked;
                        top.mapped = true;
                        break;
                    }
                    None => {
                        stack.pop();
                        if stack.is_empty() {
                            return None;
                        }
                    }
                }
            }
        }
        let ground = self.fwd.into_iter().collect();
        let boxes = self.contents.into_iter().collect();
        Some(IsoMap { ground, boxes })
    }
}

fn bfs_order(side: &Side, colors: &HashMap<PortId, u64>) -> Vec<PortId> {
    let net = side.net;
    let mut class_size: HashMap<u64, usize> = HashMap::new();
    for c in colors.values() {
        *class_size.entry(*c).or_insert(0) += 1;
    }
    // Seeds: most constrained first (coloured ports, then small classes).
    let mut seeds: Vec<&PortId> = net.ports.keys().collect();
    seeds.sort_by_key(|p| (!side.shallow.contains_key(*p), class_size[&colors[*p]], (*p).clone()));
    let mut seen: HashSet<PortId> = HashSet::new();
    let mut order = Vec::with_capacity(net.ports.len());
    for s in seeds {
        if seen.contains(s) {
            continue;
        }
        let mut queue = VecDeque::from([s.clone()]);
        seen.insert(s.clone());
        while let Some(p) = queue.pop_front() {
            let mut next: Vec<PortId> = Vec::new();
            next.extend(net.wires.get(&p).cloned());
            next.extend(side.idx.premises.get(&p).cloned().unwrap_or_default());
            next.extend(side.idx.axiom_partner.get(&p).cloned());
            next.extend(side.idx.cut_partner.get(&p).cloned());
            next.extend(side.door_targets.get(&p).cloned().unwrap_or_default());
            next.extend(side.idx.door_sources.get(&p).cloned().unwrap_or_default());
            for q in next {
                if seen.insert(q.clone()) {
                    queue.push_back(q);
                }
            }
            order.push(p);
        }
    }
    order
}

/// Checks a witness field by field against the definition (used by tests
/// and by callers that want an independent confirmation).
pub fn verify_witness(
    a: &Net,
    b: &Net,
    map: &IsoMap,
    colors_a: &BTreeMap<Path, Color>,
    colors_b: &BTreeMap<Path, Color>,
) -> bool {
    let f = &map.ground;
    let image: BTreeSet<&PortId> = f.values().collect();
    if f.len() != a.ports.len() || image.len() != b.ports.len() || a.ports.len() != b.ports.len() {
        return false;
    }
    let img = |p: &PortId| f.get(p).cloned();
    for (p, l) in &a.ports {
        match img(p) {
            Some(q) if b.ports.get(&q) == Some(l) => {}
            _ => return false,
        }
    }
    let wires: BTreeMap<PortId, PortId> = a.wires.iter().map(|(w, t)| (f[w].clone(), f[t].clone())).collect();
    let left: BTreeSet<PortId> = a.left.iter().map(|w| f[w].clone()).collect();
    let axioms: BTreeSet<_> = a.axioms.iter().map(|(x, y)| crate::net::pair(f[x].clone(), f[y].clone())).collect();
    let cuts: BTreeSet<_> = a.cuts.iter().map(|(x, y)| crate::net::pair(f[x].clone(), f[y].clone())).collect();
    if wires != b.wires || left != b.left || axioms != b.axioms || cuts != b.cuts {
        return false;
    }
    let boxes: BTreeSet<PortId> = a.boxes.keys().map(|o| f[o].clone()).collect();
    if boxes != b.boxes.keys().cloned().collect() {
        return false;
    }
    // colours on shallow paths
    for (path, c) in colors_a {
        if let [p] = path.as_slice() {
            if colors_b.get(&vec![f[p].clone()]) != Some(c) {
                return false;
            }
        }
    }
    if colors_a.keys().filter(|k| k.len() == 1).count() != colors_b.keys().filter(|k| k.len() == 1).count() {
        return false;
    }
    for (o, da) in &a.boxes {
        let o2 = &f[o];
        let db = &b.boxes[o2];
        let Some(sub) = map.boxes.get(o) else { return false };
        let ns = u32::MAX - 1;
        let mut ca: BTreeMap<Path, Color> = colors_a
            .iter()
            .filter(|(k, _)| k.len() > 1 && &k[0] == o)
            .map(|(k, c)| (k[1..].to_vec(), c.clone()))
            .collect();
        for (k, t) in &da.doors {
            ca.insert(k.clone(), (ns, f[t].clone()));
        }
        let mut cb: BTreeMap<Path, Color> = colors_b
            .iter()
            .filter(|(k, _)| k.len() > 1 && &k[0] == o2)
            .map(|(k, c)| (k[1..].to_vec(), c.clone()))
            .collect();
        for (k, t) in &db.doors {
            cb.insert(k.clone(), (ns, t.clone()));
        }
        if !verify_witness(&da.content, &db.content, sub, &ca, &cb) {
            return false;
        }
        // every coloured (door or inherited) conclusion is hit by its image
        for (k, c) in &ca {
            match sub.apply(k) {
                Some(k2) if cb.get(&k2) == Some(c) => {}
                _ => return false,
            }
        }
        if ca.len() != cb.len() {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::Label;

    fn id(s: &str) -> PortId {
        PortId::atom(s)
    }

    fn axiom_tensor(names: [&str; 3]) -> Net {
        let [a, b, t] = names;
        let mut n = Net::new();
        n.add_port(a, Label::Ax).add_port(b, Label::Ax).add_port(t, Label::Tensor);
        n.add_axiom(a, b).add_left_wire(a, t).add_wire(b, t);
        n
    }

    #[test]
    fn self_iso_under_equiv_is_identity() {
        let n = axiom_tensor(["a", "b", "t"]);
        let m = iso_check(&n, &n, IsoMode::FixConclusions).unwrap();
        assert!(m.is_identity());
    }

    #[test]
    fn renamed_copy_is_free_iso_but_not_equiv_when_conclusion_moves() {
        let n = axiom_tensor(["a", "b", "t"]);
        let m = axiom_tensor(["x", "y", "u"]);
        let w = iso_check(&n, &m, IsoMode::Free).unwrap();
        assert!(verify_witness(&n, &m, &w, &BTreeMap::new(), &BTreeMap::new()));
        assert!(iso_check(&n, &m, IsoMode::FixConclusions).is_none());
        // renaming only internal ports keeps ≡
        let k = axiom_tensor(["x", "y", "t"]);
        assert!(iso_check(&n, &k, IsoMode::FixConclusions).is_some());
    }

    #[test]
    fn left_premise_matters() {
        let n = axiom_tensor(["a", "b", "t"]);
        let mut m = n.clone();
        m.left.clear();
        m.left.insert(id("b"));
        // swapping the left premise is still isomorphic (a and b are symmetric)
        assert!(iso_check(&n, &m, IsoMode::Free).is_some());
    }

    fn door_net(target_of_x: &str) -> Net {
        let mut content = Net::new();
        content.add_port("q", Label::One).add_port("x", Label::Bot);
        let mut net = Net::new();
        net.add_port("o", Label::Bang)
            .add_port("c1", Label::Quest)
            .add_port("c2", Label::Quest)
            .add_port("z", Label::Bot)
            .add_wire("z", "c2");
        net.add_box(
            "o",
            content,
            BTreeMap::from([(vec![id("q")], id("o")), (vec![id("x")], id(target_of_x))]),
        );
        net
    }

    #[test]
    fn door_targets_are_part_of_the_structure() {
        let n1 = door_net("c1");
        let n2 = door_net("c2");
        assert!(iso_check(&n1, &n2, IsoMode::Free).is_none());
        assert!(iso_check(&n1, &n1.clone(), IsoMode::FixConclusions).is_some());
    }

    #[test]
    fn iso_mod_box_matches_targets() {
        // S: box o whose content is q (principal) and x ⊥ going to c.
        let s = door_net("c1");
        let u = s.boxes[&id("o")].content.clone();
        // T: a copy with ports renamed, wired to o and c1.
        let mut t = Net::new();
        t.add_port("q7", Label::One)
            .add_port("x7", Label::Bot)
            .add_port("o", Label::Bang)
            .add_port("c1", Label::Quest);
        t.add_wire("q7", "o").add_wire("x7", "c1");
        assert!(iso_mod_box(&u, &s, &id("o"), &t).unwrap());
        let mut t2 = Net::new();
        t2.add_port("q7", Label::One)
            .add_port("x7", Label::Bot)
            .add_port("o", Label::Bang)
            .add_port("c2", Label::Quest);
        t2.add_wire("q7", "o").add_wire("x7", "c2");
        assert!(!iso_mod_box(&u, &s, &id("o"), &t2).unwrap());
    }
}
