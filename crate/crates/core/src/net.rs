//! The net data model.
//!
//! A single [`Net`] type carries ground-structures, simple differential nets,
//! in-PS's, PS's and their differential variants; which class a value belongs
//! to is decided by [`crate::validate`]. Ports at depth 0 live in `ports`;
//! each box is a `!`-port at depth 0 with a content net and a door map from
//! conclusions of the content (as paths) to ports at depth 0.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::id::{Path, PortId};

/// Port labels.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Label {
    Tensor,
    Par,
    One,
    Bot,
    Bang,
    Quest,
    Ax,
}

impl Label {
    pub const ALL: [Label; 7] = [
        Label::Tensor,
        Label::Par,
        Label::One,
        Label::Bot,
        Label::Bang,
        Label::Quest,
        Label::Ax,
    ];

    pub fn is_multiplicative(self) -> bool {
        matches!(self, Label::Tensor | Label::Par)
    }

    pub fn is_exponential(self) -> bool {
        matches!(self, Label::Bang | Label::Quest)
    }

    /// Whether a wire may end on a port with this label.
    pub fn accepts_premises(self) -> bool {
        !matches!(self, Label::One | Label::Bot | Label::Ax)
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Label::Tensor => "tensor",
            Label::Par => "par",
            Label::One => "one",
            Label::Bot => "bot",
            Label::Bang => "bang",
            Label::Quest => "quest",
            Label::Ax => "ax",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Label> {
        Label::ALL.into_iter().find(|l| l.keyword() == word)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// An unordered pair of ports, stored with the smaller id first.
pub type Pair = (PortId, PortId);

pub fn pair(a: PortId, b: PortId) -> Pair {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Content and door map of one box.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct BoxData {
    pub content: Net,
    /// Door map: conclusion of `content` (as a path) to a port at depth 0.
    pub doors: BTreeMap<Path, PortId>,
}

impl BoxData {
    /// The content conclusion whose door targets the box itself.
    pub fn principal_door(&self, o: &PortId) -> Option<&Path> {
        let mut found = self.doors.iter().filter(|(_, t)| *t == o).map(|(k, _)| k);
        let first = found.next();
        match found.next() {
            None => first,
            Some(_) => None,
        }
    }
}

/// A (differential) in-PS, possibly with boxes.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Net {
    pub ports: BTreeMap<PortId, Label>,
    /// Wire source to wire target; a wire is identified with its source.
    pub wires: BTreeMap<PortId, PortId>,
    /// Left premises of tensor/par ports.
    pub left: BTreeSet<PortId>,
    pub axioms: BTreeSet<Pair>,
    pub cuts: BTreeSet<Pair>,
    pub boxes: BTreeMap<PortId, BoxData>,
}

impl Net {
    pub fn new() -> Net {
        Net::default()
    }

    pub fn is_empty(&self) -> bool {
        self.ports.is_empty()
    }

    pub fn label(&self, p: &PortId) -> Option<Label> {
        self.ports.get(p).copied()
    }

    pub fn add_port(&mut self, p: impl Into<PortId>, label: Label) -> &mut Self {
        self.ports.insert(p.into(), label);
        self
    }

    pub fn add_wire(&mut self, from: impl Into<PortId>, to: impl Into<PortId>) -> &mut Self {
        self.wires.insert(from.into(), to.into());
        self
    }

    pub fn add_left_wire(&mut self, from: impl Into<PortId>, to: impl Into<PortId>) -> &mut Self {
        let from = from.into();
        self.left.insert(from.clone());
        self.wires.insert(from, to.into());
        self
    }

    pub fn add_axiom(&mut self, a: impl Into<PortId>, b: impl Into<PortId>) -> &mut Self {
        self.axioms.insert(pair(a.into(), b.into()));
        self
    }

    pub fn add_cut(&mut self, a: impl Into<PortId>, b: impl Into<PortId>) -> &mut Self {
        self.cuts.insert(pair(a.into(), b.into()));
        self
    }

    /// Adds box `o` (which must already be a `!`-port) with its content and doors.
    pub fn add_box(&mut self, o: impl Into<PortId>, content: Net, doors: BTreeMap<Path, PortId>) -> &mut Self {
        self.boxes.insert(o.into(), BoxData { content, doors });
        self
    }

    pub fn is_box(&self, p: &PortId) -> bool {
        self.boxes.contains_key(p)
    }

    /// Ports that are the premise of nothing and not cut: `P \ (W ∪ ⋃C)`.
    pub fn ground_conclusions(&self) -> BTreeSet<PortId> {
        let cut_ports = self.cut_ports();
        self.ports
            .keys()
            .filter(|p| !self.wires.contains_key(*p) && !cut_ports.contains(*p))
            .cloned()
            .collect()
    }

    pub fn cut_ports(&self) -> BTreeSet<PortId> {
        self.cuts
            .iter()
            .flat_map(|(a, b)| [a.clone(), b.clone()])
            .collect()
    }

    /// All conclusions: shallow ones as one-element paths, plus conclusions
    /// of box contents that have no door.
    pub fn conclusions(&self) -> BTreeSet<Path> {
        let mut out: BTreeSet<Path> = self
            .ground_conclusions()
            .into_iter()
            .map(|p| vec![p])
            .collect();
        out.extend(self.non_shallow_conclusions());
        out
    }

    pub fn non_shallow_conclusions(&self) -> BTreeSet<Path> {
        let mut out = BTreeSet::new();
        for (o, data) in &self.boxes {
            for c in data.content.conclusions() {
                if !data.doors.contains_key(&c) {
                    let mut path = Vec::with_capacity(c.len() + 1);
                    path.push(o.clone());
                    path.extend(c);
                    out.insert(path);
                }
            }
        }
        out
    }

    /// Ground premises of every port.
    pub fn premise_map(&self) -> BTreeMap<PortId, Vec<PortId>> {
        let mut map: BTreeMap<PortId, Vec<PortId>> = BTreeMap::new();
        for (w, t) in &self.wires {
            map.entry(t.clone()).or_default().push(w.clone());
        }
        map
    }

    pub fn ground_premises(&self, p: &PortId) -> Vec<PortId> {
        self.wires
            .iter()
            .filter(|(_, t)| *t == p)
            .map(|(w, _)| w.clone())
            .collect()
    }

    /// Number of ground wires plus doors ending on `p`.
    pub fn arity(&self, p: &PortId) -> usize {
        let wires = self.wires.values().filter(|t| *t == p).count();
        let doors: usize = self
            .boxes
            .values()
            .map(|b| b.doors.values().filter(|t| *t == p).count())
            .sum();
        wires + doors
    }

    /// Arity of every port at depth 0 (ports of arity 0 included).
    pub fn arities(&self) -> BTreeMap<PortId, usize> {
        let mut map: BTreeMap<PortId, usize> = self.ports.keys().map(|p| (p.clone(), 0)).collect();
        for t in self.wires.values() {
            if let Some(n) = map.get_mut(t) {
                *n += 1;
            }
        }
        for data in self.boxes.values() {
            for t in data.doors.values() {
                if let Some(n) = map.get_mut(t) {
                    *n += 1;
                }
            }
        }
        map
    }

    /// Maximum arity over all levels; 0 for the empty net.
    pub fn cosize(&self) -> usize {
        let here = self.arities().into_values().max().unwrap_or(0);
        self.boxes
            .values()
            .map(|b| b.content.cosize())
            .fold(here, usize::max)
    }

    /// Maximum box nesting.
    pub fn depth(&self) -> usize {
        self.boxes
            .values()
            .map(|b| 1 + b.content.depth())
            .max()
            .unwrap_or(0)
    }

    /// Every box at every level, as the path of box names leading to it.
    pub fn box_paths(&self) -> Vec<Path> {
        let mut out = Vec::new();
        for (o, data) in &self.boxes {
            out.push(vec![o.clone()]);
            for mut inner in data.content.box_paths() {
                inner.insert(0, o.clone());
                out.push(inner);
            }
        }
        out
    }

    pub fn box_count(&self) -> usize {
        self.boxes
            .values()
            .map(|b| 1 + b.content.box_count())
            .sum()
    }

    /// `!`-ports at depth 0 that are not boxes.
    pub fn co_contractions(&self) -> BTreeSet<PortId> {
        self.ports
            .iter()
            .filter(|(p, l)| **l == Label::Bang && !self.boxes.contains_key(*p))
            .map(|(p, _)| p.clone())
            .collect()
    }

    /// Content conclusions of `o` that have a door.
    pub fn temporary_conclusions(&self, o: &PortId) -> BTreeSet<Path> {
        self.boxes
            .get(o)
            .map(|b| b.doors.keys().cloned().collect())
            .unwrap_or_default()
    }

    /// Door targets of `o` other than `o` itself.
    pub fn contractions_under(&self, o: &PortId) -> BTreeSet<PortId> {
        self.boxes
            .get(o)
            .map(|b| b.doors.values().filter(|t| *t != o).cloned().collect())
            .unwrap_or_default()
    }

    /// Total port count over all levels.
    pub fn size(&self) -> usize {
        self.ports.len()
            + self
                .boxes
                .values()
                .map(|b| b.content.size())
                .sum::<usize>()
    }

    /// Label of a port given by a path through boxes.
    pub fn label_at(&self, path: &[PortId]) -> Option<Label> {
        match path {
            [] => None,
            [p] => self.label(p),
            [o, rest @ ..] => self.boxes.get(o)?.content.label_at(rest),
        }
    }

    /// Every port at every level as a path.
    pub fn all_ports(&self) -> Vec<Path> {
        let mut out: Vec<Path> = self.ports.keys().map(|p| vec![p.clone()]).collect();
        for (o, data) in &self.boxes {
            for mut inner in data.content.all_ports() {
                inner.insert(0, o.clone());
                out.push(inner);
            }
        }
        out
    }

    pub fn has_cuts(&self) -> bool {
        !self.cuts.is_empty() || self.boxes.values().any(|b| b.content.has_cuts())
    }

    /// Target of a wire or door given by a path: shallow paths use the wire
    /// map, deep paths the door map of the enclosing box.
    pub fn target_any(&self, path: &[PortId]) -> Option<&PortId> {
        match path {
            [] => None,
            [p] => self.wires.get(p),
            [o, rest @ ..] => self.boxes.get(o)?.doors.get(rest),
        }
    }
}
