//! Structural validation in the various net classes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::id::{path_string, PortId};
use crate::net::{Label, Net};

/// Which class of nets to check against.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Mode {
    /// Box-free ground-structure: acyclic, no wire into a `!`-port.
    Ground,
    /// Box-free simple differential net: acyclic.
    SimpleDiff,
    /// In-PS: every `!`-port is a box.
    InPs,
    /// In-PS whose box conclusions all have doors.
    Ps,
    /// Differential in-PS: boxes are some arity-0 `!`-ports.
    DiffInPs,
    /// Differential in-PS whose box conclusions all have doors.
    DiffPs,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "ground" => Mode::Ground,
            "simple-diff" => Mode::SimpleDiff,
            "in-ps" => Mode::InPs,
            "ps" => Mode::Ps,
            "diff-in-ps" => Mode::DiffInPs,
            "diff-ps" => Mode::DiffPs,
            other => return Err(format!("unknown mode {other:?}")),
        })
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ViolationKind {
    WireFromUnknownPort(PortId),
    WireToUnknownPort { wire: PortId, target: PortId },
    TargetLabel { wire: PortId, target: PortId, label: Label },
    PremiseCount { port: PortId, label: Label, count: usize },
    LeftCount { port: PortId, count: usize },
    LeftNotMultiplicative(PortId),
    AxiomUnknownPort(PortId),
    AxiomLabel(PortId),
    AxiomDegenerate(PortId),
    AxiomOverlap(PortId),
    AxiomMissing(PortId),
    CutUnknownPort(PortId),
    CutDegenerate(PortId),
    CutOnWire(PortId),
    CutOverlap(PortId),
    Cycle(PortId),
    WireIntoBang { wire: PortId, target: PortId },
    BoxesNotAllowed,
    BoxNotBang(PortId),
    BangNotBox(PortId),
    BoxWithPremises(PortId),
    DoorNotConclusion { boxed: PortId, key: String },
    DoorTarget { boxed: PortId, key: String, target: PortId },
    PrincipalDoor { boxed: PortId, count: usize },
    PrincipalNotShallow { boxed: PortId, key: String },
    MissingDoor { boxed: PortId, key: String },
    /// A typing clause fails at the given port or pair.
    Type { at: String, message: String },
}

/// One violated invariant, located by the chain of boxes containing it.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Violation {
    pub location: Vec<PortId>,
    pub kind: ViolationKind,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ViolationKind::*;
        match self {
            WireFromUnknownPort(w) => write!(f, "wire {w} starts at an unknown port"),
            WireToUnknownPort { wire, target } => write!(f, "wire {wire} ends at unknown port {target}"),
            TargetLabel { wire, target, label } => {
                write!(f, "wire {wire} ends at {target}, a {label} port, which takes no premises")
            }
            PremiseCount { port, label, count } => {
                write!(f, "{label} needs 2 premises: {port} has {count}")
            }
            LeftCount { port, count } => write!(f, "{port} needs exactly one left premise, has {count}"),
            LeftNotMultiplicative(w) => write!(f, "left marker on {w}, which does not enter a tensor or par"),
            AxiomUnknownPort(p) => write!(f, "axiom mentions unknown port {p}"),
            AxiomLabel(p) => write!(f, "axiom port {p} is not labelled ax"),
            AxiomDegenerate(p) => write!(f, "axiom links {p} to itself"),
            AxiomOverlap(p) => write!(f, "port {p} is in several axioms"),
            AxiomMissing(p) => write!(f, "ax port {p} is in no axiom"),
            CutUnknownPort(p) => write!(f, "cut mentions unknown port {p}"),
            CutDegenerate(p) => write!(f, "cut links {p} to itself"),
            CutOnWire(p) => write!(f, "cut port {p} is the source of a wire"),
            CutOverlap(p) => write!(f, "port {p} is in several cuts"),
            Cycle(p) => write!(f, "wires must be acyclic: cycle through {p}"),
            WireIntoBang { wire, target } => write!(f, "wire {wire} enters the !-port {target}"),
            BoxesNotAllowed => write!(f, "boxes are not allowed in this mode"),
            BoxNotBang(o) => write!(f, "box {o} is not a ! port"),
            BangNotBox(p) => write!(f, "! port {p} is not a box"),
            BoxWithPremises(o) => write!(f, "box {o} has wire premises"),
            DoorNotConclusion { boxed, key } => write!(f, "door {key} of box {boxed} is not a conclusion of its content"),
            DoorTarget { boxed, key, target } => {
                write!(f, "door {key} of box {boxed} targets {target}, which is neither a ? port nor the box")
            }
            PrincipalDoor { boxed, count } => write!(f, "box {boxed} has {count} principal doors"),
            PrincipalNotShallow { boxed, key } => write!(f, "principal door {key} of box {boxed} is not a shallow conclusion"),
            MissingDoor { boxed, key } => write!(f, "content conclusion {key} of box {boxed} has no door"),
            Type { at, message } => write!(f, "type error at {at}: {message}"),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.location.is_empty() {
            write!(f, "{}", self.kind)
        } else {
            write!(f, "in box {}: {}", path_string(&self.location), self.kind)
        }
    }
}

/// Result of [`validate`]: empty when the net is valid.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks `net` against the invariants of `mode`, recursively through box
/// contents (which are always checked as in-PS's).
pub fn validate(net: &Net, mode: Mode) -> ValidationReport {
    let mut out = Vec::new();
    check(net, mode, &mut Vec::new(), &mut out);
    ValidationReport { violations: out }
}

pub fn is_valid(net: &Net, mode: Mode) -> bool {
    validate(net, mode).is_ok()
}

fn check(net: &Net, mode: Mode, location: &mut Vec<PortId>, out: &mut Vec<Violation>) {
    let mut push = |kind| {
        out.push(Violation {
            location: location.clone(),
            kind,
        })
    };
    let ground_structure = matches!(mode, Mode::Ground | Mode::InPs | Mode::Ps);
    for kind in ground_violations(net, ground_structure) {
        push(kind);
    }
    match mode {
        Mode::Ground | Mode::SimpleDiff => {
            if !net.boxes.is_empty() {
                push(ViolationKind::BoxesNotAllowed);
            }
            return;
        }
        _ => {}
    }
    let differential = matches!(mode, Mode::DiffInPs | Mode::DiffPs);
    for kind in box_violations(net, differential) {
        push(kind);
    }
    if matches!(mode, Mode::Ps | Mode::DiffPs) {
        for (o, data) in &net.boxes {
            for c in data.content.conclusions() {
                if !data.doors.contains_key(&c) {
                    push(ViolationKind::MissingDoor {
                        boxed: o.clone(),
                        key: path_string(&c),
                    });
                }
            }
        }
    }
    for (o, data) in &net.boxes {
        location.push(o.clone());
        check(&data.content, Mode::InPs, location, out);
        location.pop();
    }
}

/// Pre-net conditions plus acyclicity; with `ground_structure`, also forbids
/// wires into `!`-ports.
pub fn ground_violations(net: &Net, ground_structure: bool) -> Vec<ViolationKind> {
    use ViolationKind::*;
    let mut out = Vec::new();
    let mut premises: BTreeMap<&PortId, Vec<&PortId>> = BTreeMap::new();
    for (w, t) in &net.wires {
        if !net.ports.contains_key(w) {
            out.push(WireFromUnknownPort(w.clone()));
        }
        match net.ports.get(t) {
            None => out.push(WireToUnknownPort {
                wire: w.clone(),
                target: t.clone(),
            }),
            Some(&label) => {
                if !label.accepts_premises() {
                    out.push(TargetLabel {
                        wire: w.clone(),
                        target: t.clone(),
                        label,
                    });
                }
                if ground_structure && label == Label::Bang {
                    out.push(WireIntoBang {
                        wire: w.clone(),
                        target: t.clone(),
                    });
                }
            }
        }
        premises.entry(t).or_default().push(w);
    }
    for (p, &label) in &net.ports {
        if label.is_multiplicative() {
            let prem = premises.get(p).map(Vec::as_slice).unwrap_or(&[]);
            if prem.len() != 2 {
                out.push(PremiseCount {
                    port: p.clone(),
                    label,
                    count: prem.len(),
                });
            }
            let lefts = prem.iter().filter(|w| net.left.contains(**w)).count();
            if lefts != 1 {
                out.push(LeftCount {
                    port: p.clone(),
                    count: lefts,
                });
            }
        }
    }
    for w in &net.left {
        let ok = net
            .wires
            .get(w)
            .and_then(|t| net.ports.get(t))
            .is_some_and(|l| l.is_multiplicative());
        if !ok {
            out.push(LeftNotMultiplicative(w.clone()));
        }
    }
    let mut in_axiom: BTreeSet<&PortId> = BTreeSet::new();
    for (a, b) in &net.axioms {
        if a == b {
            out.push(AxiomDegenerate(a.clone()));
        }
        for p in [a, b] {
            match net.ports.get(p) {
                None => out.push(AxiomUnknownPort(p.clone())),
                Some(Label::Ax) => {}
                Some(_) => out.push(AxiomLabel(p.clone())),
            }
            if !in_axiom.insert(p) && a != b {
                out.push(AxiomOverlap(p.clone()));
            }
        }
    }
    for (p, &label) in &net.ports {
        if label == Label::Ax && !in_axiom.contains(p) {
            out.push(AxiomMissing(p.clone()));
        }
    }
    let mut in_cut: BTreeSet<&PortId> = BTreeSet::new();
    for (a, b) in &net.cuts {
        if a == b {
            out.push(CutDegenerate(a.clone()));
        }
        for p in [a, b] {
            if !net.ports.contains_key(p) {
                out.push(CutUnknownPort(p.clone()));
            }
            if net.wires.contains_key(p) {
                out.push(CutOnWire(p.clone()));
            }
            if !in_cut.insert(p) && a != b {
                out.push(CutOverlap(p.clone()));
            }
        }
    }
    if let Some(p) = find_cycle(net) {
        out.push(Cycle(p));
    }
    out
}

/// A port lying on a wire cycle, if any. Each port has at most one outgoing
/// wire, so following targets from every port either stops or loops.
pub fn find_cycle(net: &Net) -> Option<PortId> {
    // 0 = unvisited, 1 = on current walk, 2 = done
    let mut state: BTreeMap<&PortId, u8> = BTreeMap::new();
    for start in net.wires.keys() {
        if state.get(start).copied().unwrap_or(0) != 0 {
            continue;
        }
        let mut walk = Vec::new();
        let mut cur = start;
        loop {
            match state.get(cur).copied().unwrap_or(0) {
                1 => return Some(cur.clone()),
                2 => break,
                _ => {}
            }
            state.insert(cur, 1);
            walk.push(cur);
            match net.wires.get(cur) {
                Some(next) => cur = next,
                None => break,
            }
        }
        for p in walk {
            state.insert(p, 2);
        }
    }
    None
}

/// Box-level conditions of a (differential) in-PS at depth 0.
pub fn box_violations(net: &Net, differential: bool) -> Vec<ViolationKind> {
    use ViolationKind::*;
    let mut out = Vec::new();
    let ground_premised: BTreeSet<&PortId> = net.wires.values().collect();
    for o in net.boxes.keys() {
        if net.ports.get(o) != Some(&Label::Bang) {
            out.push(BoxNotBang(o.clone()));
        }
        if ground_premised.contains(o) {
            out.push(BoxWithPremises(o.clone()));
        }
    }
    if !differential {
        for (p, &l) in &net.ports {
            if l == Label::Bang && !net.boxes.contains_key(p) {
                out.push(BangNotBox(p.clone()));
            }
        }
    }
    for (o, data) in &net.boxes {
        let conclusions = data.content.conclusions();
        let mut principal = Vec::new();
        for (key, target) in &data.doors {
            if !conclusions.contains(key) {
                out.push(DoorNotConclusion {
                    boxed: o.clone(),
                    key: path_string(key),
                });
            }
            if target == o {
                principal.push(key);
                continue;
            }
            if net.ports.get(target) != Some(&Label::Quest) {
                out.push(DoorTarget {
                    boxed: o.clone(),
                    key: path_string(key),
                    target: target.clone(),
                });
            }
        }
        if principal.len() != 1 {
            out.push(PrincipalDoor {
                boxed: o.clone(),
                count: principal.len(),
            });
        } else if principal[0].len() != 1 {
            out.push(PrincipalNotShallow {
                boxed: o.clone(),
                key: path_string(principal[0]),
            });
        }
    }
    out
}
