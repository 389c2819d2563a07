//! Multiset relational semantics.
//!
//! Values are signed trees over atoms, `∗`, pairs and bags. Experiments are
//! built from explicit seeds (one value per axiom, one list of sub-seeds per
//! box), and every other label is derived, so well-formedness holds by
//! construction; only cuts can fail.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::id::{path_string, Path, PortId};
use crate::net::{Label, Net};
use crate::taylor::{PseudoExperiment, Run};
use crate::validate::{ValidationReport, Violation, ViolationKind};

/// An element of the atom alphabet. Atoms are opaque, so plain numbers do.
pub type Atom = u32;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    fn of(positive: bool) -> Sign {
        if positive {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Payload {
    Atom(Atom),
    Star,
    Pair(Box<Value>, Box<Value>),
    /// A finite multiset, kept sorted.
    Bag(Vec<Value>),
}

/// An element of `D_𝒜`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Value {
    pub sign: Sign,
    pub payload: Payload,
}

impl Value {
    pub fn atom(sign: Sign, a: Atom) -> Value {
        Value { sign, payload: Payload::Atom(a) }
    }

    pub fn star(sign: Sign) -> Value {
        Value { sign, payload: Payload::Star }
    }

    pub fn pair(sign: Sign, left: Value, right: Value) -> Value {
        Value { sign, payload: Payload::Pair(Box::new(left), Box::new(right)) }
    }

    pub fn bag(sign: Sign, mut items: Vec<Value>) -> Value {
        items.sort();
        Value { sign, payload: Payload::Bag(items) }
    }

    pub fn height(&self) -> usize {
        match &self.payload {
            Payload::Atom(_) | Payload::Star => 0,
            Payload::Pair(a, b) => 1 + a.height().max(b.height()),
            Payload::Bag(items) => 1 + items.iter().map(Value::height).max().unwrap_or(0),
        }
    }

    pub fn size(&self) -> usize {
        match &self.payload {
            Payload::Atom(_) | Payload::Star => 1,
            Payload::Pair(a, b) => 1 + a.size() + b.size(),
            Payload::Bag(items) => 1 + items.iter().map(Value::size).sum::<usize>(),
        }
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.visit(&mut |v| {
            if let Payload::Atom(a) = v.payload {
                out.insert(a);
            }
        });
        out
    }

    /// Calls `f` on this value and every value below it.
    pub fn visit(&self, f: &mut impl FnMut(&Value)) {
        f(self);
        match &self.payload {
            Payload::Atom(_) | Payload::Star => {}
            Payload::Pair(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Payload::Bag(items) => items.iter().for_each(|v| v.visit(f)),
        }
    }

    fn is_uniform(&self) -> bool {
        match &self.payload {
            Payload::Atom(_) | Payload::Star => true,
            Payload::Pair(a, b) => a.is_uniform() && b.is_uniform(),
            Payload::Bag(items) => {
                let heights: BTreeSet<usize> = items.iter().map(Value::height).collect();
                heights.len() <= 1 && items.iter().all(Value::is_uniform)
            }
        }
    }
}

/// `α⊥`.
pub fn dual(v: &Value) -> Value {
    let payload = match &v.payload {
        Payload::Atom(a) => Payload::Atom(*a),
        Payload::Star => Payload::Star,
        Payload::Pair(a, b) => Payload::Pair(Box::new(dual(a)), Box::new(dual(b))),
        Payload::Bag(items) => {
            let mut items: Vec<Value> = items.iter().map(dual).collect();
            items.sort();
            Payload::Bag(items)
        }
    };
    Value { sign: v.sign.flip(), payload }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.sign)?;
        match &self.payload {
            Payload::Atom(a) => write!(f, " g{a}")?,
            Payload::Star => write!(f, " *")?,
            Payload::Pair(a, b) => write!(f, " {a} {b}")?,
            Payload::Bag(items) => {
                write!(f, " [")?;
                for (n, v) in items.iter().enumerate() {
                    write!(f, "{}{v}", if n == 0 { "" } else { " " })?;
                }
                write!(f, "]")?;
            }
        }
        write!(f, ")")
    }
}

/// A function `𝒜 → D_𝒜`; atoms outside the map go to `(+, γ)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Renaming(pub BTreeMap<Atom, Value>);

impl Renaming {
    pub fn image(&self, a: Atom) -> Value {
        self.0.get(&a).cloned().unwrap_or_else(|| Value::atom(Sign::Plus, a))
    }

    /// `σ·σ'`, the map `γ ↦ σ·σ'(γ)`.
    pub fn compose(&self, inner: &Renaming) -> Renaming {
        let mut out: BTreeMap<Atom, Value> = inner.0.iter().map(|(a, v)| (*a, apply_renaming(self, v))).collect();
        for (a, v) in &self.0 {
            out.entry(*a).or_insert_with(|| v.clone());
        }
        Renaming(out)
    }

    /// Whether every atom of `x` is sent to a signed atom.
    pub fn is_renaming_of(&self, x: &Point) -> bool {
        x.values()
            .flat_map(Value::atoms)
            .all(|a| matches!(self.image(a).payload, Payload::Atom(_)))
    }
}

/// `σ·α`.
pub fn apply_renaming(sigma: &Renaming, v: &Value) -> Value {
    match &v.payload {
        Payload::Atom(a) => match v.sign {
            Sign::Plus => sigma.image(*a),
            Sign::Minus => dual(&sigma.image(*a)),
        },
        Payload::Star => v.clone(),
        Payload::Pair(a, b) => Value::pair(v.sign, apply_renaming(sigma, a), apply_renaming(sigma, b)),
        Payload::Bag(items) => Value::bag(v.sign, items.iter().map(|x| apply_renaming(sigma, x)).collect()),
    }
}

/// A result: conclusion to value.
pub type Point = BTreeMap<PortId, Value>;

pub fn rename_point(sigma: &Renaming, x: &Point) -> Point {
    x.iter().map(|(p, v)| (p.clone(), apply_renaming(sigma, v))).collect()
}

pub fn format_point(x: &Point) -> String {
    let mut out = String::from("(point");
    for (p, v) in x {
        out.push_str(&format!(" ({p} {v})"));
    }
    out.push(')');
    out
}

/// Free choices of an experiment: the value of the first port (in id order)
/// of every axiom at depth 0, and one sub-seed per copy of every box.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Seed {
    pub axioms: BTreeMap<PortId, Value>,
    pub boxes: BTreeMap<PortId, Vec<Seed>>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Experiment {
    /// Values of the ports at depth 0.
    pub ports: BTreeMap<PortId, Value>,
    /// Multisets of values of the ports below depth 0, sorted.
    pub deep: BTreeMap<Path, Vec<Value>>,
    /// One sub-experiment per copy, with repetitions for multiplicities.
    pub boxes: BTreeMap<PortId, Vec<Experiment>>,
}

impl Experiment {
    /// `ports(e)(q)` as a multiset: a singleton for ports at depth 0.
    fn multiset_at(&self, q: &[PortId]) -> Vec<Value> {
        match q {
            [p] => self.ports.get(p).cloned().into_iter().collect(),
            _ => self.deep.get(q).cloned().unwrap_or_default(),
        }
    }
}

/// Derives the experiment determined by `seed`, or `None` when a cut
/// relates two ports whose values are not dual.
pub fn build_experiment(net: &Net, seed: &Seed) -> Result<Option<Experiment>> {
    let boxed: BTreeSet<&PortId> = net.boxes.keys().collect();
    let seeded: BTreeSet<&PortId> = seed.boxes.keys().collect();
    if boxed != seeded {
        return Err(Error::ShapeMismatch("seed boxes differ from the boxes at depth 0".into()));
    }
    let mut boxes = BTreeMap::new();
    for (o, subs) in &seed.boxes {
        let mut copies = Vec::with_capacity(subs.len());
        for sub in subs {
            match build_experiment(&net.boxes[o].content, sub)? {
                Some(e) => copies.push(e),
                None => return Ok(None),
            }
        }
        boxes.insert(o.clone(), copies);
    }

    let mut doors_into: BTreeMap<&PortId, Vec<Value>> = BTreeMap::new();
    for (o, data) in &net.boxes {
        for (q, t) in &data.doors {
            let slot = doors_into.entry(t).or_default();
            for copy in &boxes[o] {
                slot.extend(copy.multiset_at(q));
            }
        }
    }
    let mut values: BTreeMap<PortId, Value> = BTreeMap::new();
    for (a, b) in &net.axioms {
        let v = seed
            .axioms
            .get(a)
            .ok_or_else(|| Error::ShapeMismatch(format!("no seed value for the axiom on {a}")))?;
        values.insert(a.clone(), v.clone());
        values.insert(b.clone(), dual(v));
    }
    let premises = net.premise_map();
    let order = evaluation_order(net, &premises)?;
    for p in order {
        if values.contains_key(&p) {
            continue;
        }
        let prem = premises.get(&p).map(Vec::as_slice).unwrap_or(&[]);
        let v = match net.ports[&p] {
            Label::Ax => {
                return Err(Error::ShapeMismatch(format!("ax port {p} is in no axiom")));
            }
            Label::One => Value::star(Sign::Plus),
            Label::Bot => Value::star(Sign::Minus),
            label @ (Label::Tensor | Label::Par) => {
                let (left, right): (Vec<&PortId>, Vec<&PortId>) = prem.iter().partition(|w| net.left.contains(*w));
                match (left.as_slice(), right.as_slice()) {
                    ([l], [r]) => Value::pair(Sign::of(label == Label::Tensor), values[*l].clone(), values[*r].clone()),
                    _ => return Err(Error::Invalid(format!("{label} port {p} needs a left and a right premise"))),
                }
            }
            label @ (Label::Bang | Label::Quest) => {
                let mut items: Vec<Value> = prem.iter().map(|w| values[w].clone()).collect();
                items.extend(doors_into.get(&p).cloned().unwrap_or_default());
                Value::bag(Sign::of(label == Label::Bang), items)
            }
        };
        values.insert(p, v);
    }
    for (a, b) in &net.cuts {
        if values[a] != dual(&values[b]) {
            return Ok(None);
        }
    }

    let mut deep: BTreeMap<Path, Vec<Value>> = BTreeMap::new();
    for (o, copies) in &boxes {
        for copy in copies {
            for (p, v) in &copy.ports {
                deep.entry(vec![o.clone(), p.clone()]).or_default().push(v.clone());
            }
            for (path, vs) in &copy.deep {
                let mut full = vec![o.clone()];
                full.extend(path.iter().cloned());
                deep.entry(full).or_default().extend(vs.iter().cloned());
            }
        }
    }
    for vs in deep.values_mut() {
        vs.sort();
    }
    Ok(Some(Experiment { ports: values, deep, boxes }))
}

/// Ports at depth 0 with every premise before its target. Fails on a cycle
/// of wires, which no valid net has.
fn evaluation_order(net: &Net, premises: &BTreeMap<PortId, Vec<PortId>>) -> Result<Vec<PortId>> {
    let mut order = Vec::with_capacity(net.ports.len());
    let mut done: BTreeSet<&PortId> = BTreeSet::new();
    let mut on_path: BTreeSet<&PortId> = BTreeSet::new();
    for root in net.ports.keys() {
        if done.contains(root) {
            continue;
        }
        let mut stack: Vec<(&PortId, bool)> = vec![(root, false)];
        while let Some((p, expanded)) = stack.pop() {
            if expanded {
                on_path.remove(p);
                if done.insert(p) {
                    order.push(p.clone());
                }
                continue;
            }
            if done.contains(p) {
                continue;
            }
            if !on_path.insert(p) {
                return Err(Error::Invalid(format!("wires form a cycle through {p}")));
            }
            stack.push((p, true));
            for w in premises.get(p).into_iter().flatten() {
                if !done.contains(w) {
                    stack.push((w, false));
                }
            }
        }
    }
    Ok(order)
}

/// The restriction of `ports(e)` to the shallow conclusions of `net`.
pub fn result(e: &Experiment, net: &Net) -> Point {
    net.ground_conclusions()
        .into_iter()
        .filter_map(|p| e.ports.get(&p).map(|v| (p, v.clone())))
        .collect()
}

/// The seed an experiment was built from.
pub fn seed_of(e: &Experiment, net: &Net) -> Seed {
    Seed {
        axioms: net.axioms.iter().filter_map(|(a, _)| e.ports.get(a).map(|v| (a.clone(), v.clone()))).collect(),
        boxes: net
            .boxes
            .iter()
            .map(|(o, data)| {
                let subs = e.boxes.get(o).map(|cs| cs.iter().map(|c| seed_of(c, &data.content)).collect());
                (o.clone(), subs.unwrap_or_default())
            })
            .collect(),
    }
}

/// `ē`: every copy becomes its own run, in the order of `e.boxes`, so that
/// copy `n` of a box in the expansion is driven by the `n`-th sub-experiment.
pub fn induced_pseudo(e: &Experiment) -> PseudoExperiment {
    PseudoExperiment {
        per_box: e
            .boxes
            .iter()
            .map(|(o, copies)| {
                let runs = copies.iter().map(|c| Run { count: 1u32.into(), sub: induced_pseudo(c) }).collect();
                (o.clone(), runs)
            })
            .collect(),
    }
}

/// `p` with every run of `n` copies split into `n` runs of one copy.
pub fn unroll(p: &PseudoExperiment) -> PseudoExperiment {
    PseudoExperiment {
        per_box: p
            .per_box
            .iter()
            .map(|(o, runs)| {
                let mut out = Vec::new();
                for run in runs {
                    let sub = unroll(&run.sub);
                    let n = run.count.to_usize().expect("copy count fits in memory");
                    out.extend((0..n).map(|_| Run { count: 1u32.into(), sub: sub.clone() }));
                }
                (o.clone(), out)
            })
            .collect(),
    }
}

/// Hands out fresh atoms.
#[derive(Clone, Debug, Default)]
pub struct AtomSupply {
    next: Atom,
}

impl AtomSupply {
    pub fn new() -> AtomSupply {
        AtomSupply::default()
    }

    pub fn starting_at(next: Atom) -> AtomSupply {
        AtomSupply { next }
    }

    pub fn fresh(&mut self) -> Atom {
        self.next += 1;
        self.next
    }
}

/// An atomic experiment whose induced pseudo-experiment is `unroll(p)`,
/// with a fresh atom on every axiom of every copy.
pub fn generate_injective_atomic(net: &Net, p: &PseudoExperiment, atoms: &mut AtomSupply) -> Result<Experiment> {
    if has_cuts_anywhere(net) {
        return Err(Error::CutPresent);
    }
    p.check_shape(net)?;
    let seed = atomic_seed(net, p, atoms);
    Ok(build_experiment(net, &seed)?.expect("cut-free nets accept every seed"))
}

fn atomic_seed(net: &Net, p: &PseudoExperiment, atoms: &mut AtomSupply) -> Seed {
    let axioms = net
        .axioms
        .iter()
        .map(|(a, _)| (a.clone(), Value::atom(Sign::Plus, atoms.fresh())))
        .collect();
    let mut boxes = BTreeMap::new();
    for (o, data) in &net.boxes {
        let mut subs = Vec::new();
        for run in p.per_box.get(o).into_iter().flatten() {
            let n = run.count.to_usize().expect("copy count fits in memory");
            for _ in 0..n {
                subs.push(atomic_seed(&data.content, &run.sub, atoms));
            }
        }
        boxes.insert(o.clone(), subs);
    }
    Seed { axioms, boxes }
}

fn has_cuts_anywhere(net: &Net) -> bool {
    net.has_cuts() || net.boxes.values().any(|b| has_cuts_anywhere(&b.content))
}

/// `𝒯_R(e)` on `τ₀(R, ē)`: ports of `R` at depth 0 keep their values and
/// port `p` of copy `n` of box `o` takes the value of `p` in the
/// transferred `n`-th sub-experiment.
pub fn expansion_experiment(net: &Net, e: &Experiment) -> Experiment {
    let mut ports = e.ports.clone();
    for (o, copies) in &e.boxes {
        let content = &net.boxes[o].content;
        for (n, copy) in copies.iter().enumerate() {
            for (p, v) in expansion_experiment(content, copy).ports {
                ports.insert(PortId::copy(o.clone(), n as u32, p), v);
            }
        }
    }
    Experiment { ports, deep: BTreeMap::new(), boxes: BTreeMap::new() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PointPredicates {
    pub injective: bool,
    pub balanced: bool,
    pub k_heterogeneous: bool,
    pub uniform: bool,
    pub height: usize,
    pub size: usize,
}

pub fn point_predicates(x: &Point, k: usize) -> PointPredicates {
    let mut signed: BTreeMap<(Sign, Atom), usize> = BTreeMap::new();
    let mut positive_bags: Vec<&[Value]> = Vec::new();
    for v in x.values() {
        collect(v, &mut signed, &mut positive_bags);
    }
    let injective = signed.values().all(|&n| n <= 1);
    let atoms: BTreeSet<Atom> = signed.keys().map(|(_, a)| *a).collect();
    let count = |s, a| signed.get(&(s, a)).copied().unwrap_or(0);
    let balanced = atoms.iter().all(|&a| count(Sign::Plus, a) == count(Sign::Minus, a));
    let mut by_size: BTreeMap<usize, &[Value]> = BTreeMap::new();
    let mut k_heterogeneous = true;
    let distinct: BTreeSet<&[Value]> = positive_bags.iter().copied().collect();
    if distinct.len() != positive_bags.len() {
        k_heterogeneous = false;
    }
    for bag in &positive_bags {
        if !is_positive_power(bag.len(), k) {
            k_heterogeneous = false;
        }
        if let Some(other) = by_size.insert(bag.len(), bag) {
            if other != *bag {
                k_heterogeneous = false;
            }
        }
    }
    PointPredicates {
        injective,
        balanced,
        k_heterogeneous,
        uniform: x.values().all(Value::is_uniform),
        height: x.values().map(Value::height).max().unwrap_or(0),
        size: x.values().map(Value::size).sum(),
    }
}

fn collect<'a>(v: &'a Value, signed: &mut BTreeMap<(Sign, Atom), usize>, bags: &mut Vec<&'a [Value]>) {
    match &v.payload {
        Payload::Atom(a) => *signed.entry((v.sign, *a)).or_default() += 1,
        Payload::Star => {}
        Payload::Pair(a, b) => {
            collect(a, signed, bags);
            collect(b, signed, bags);
        }
        Payload::Bag(items) => {
            if v.sign == Sign::Plus {
                bags.push(items);
            }
            items.iter().for_each(|i| collect(i, signed, bags));
        }
    }
}

fn is_positive_power(mut n: usize, k: usize) -> bool {
    if k < 2 || n < k {
        return false;
    }
    while n.is_multiple_of(k) {
        n /= k;
    }
    n == 1
}

/// MELL formulas.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum MellType {
    Var(String),
    DualVar(String),
    One,
    Bot,
    Tensor(Box<MellType>, Box<MellType>),
    Par(Box<MellType>, Box<MellType>),
    OfCourse(Box<MellType>),
    WhyNot(Box<MellType>),
}

impl MellType {
    pub fn var(x: &str) -> MellType {
        MellType::Var(x.into())
    }

    pub fn tensor(a: MellType, b: MellType) -> MellType {
        MellType::Tensor(Box::new(a), Box::new(b))
    }

    pub fn par(a: MellType, b: MellType) -> MellType {
        MellType::Par(Box::new(a), Box::new(b))
    }

    pub fn of_course(a: MellType) -> MellType {
        MellType::OfCourse(Box::new(a))
    }

    pub fn why_not(a: MellType) -> MellType {
        MellType::WhyNot(Box::new(a))
    }

    pub fn dual(&self) -> MellType {
        use MellType::*;
        match self {
            Var(x) => DualVar(x.clone()),
            DualVar(x) => Var(x.clone()),
            One => Bot,
            Bot => One,
            Tensor(a, b) => Par(Box::new(a.dual()), Box::new(b.dual())),
            Par(a, b) => Tensor(Box::new(a.dual()), Box::new(b.dual())),
            OfCourse(a) => WhyNot(Box::new(a.dual())),
            WhyNot(a) => OfCourse(Box::new(a.dual())),
        }
    }
}

impl fmt::Display for MellType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use MellType::*;
        match self {
            Var(x) => write!(f, "{x}"),
            DualVar(x) => write!(f, "{x}^"),
            One => write!(f, "1"),
            Bot => write!(f, "bot"),
            Tensor(a, b) => write!(f, "({a} * {b})"),
            Par(a, b) => write!(f, "({a} | {b})"),
            OfCourse(a) => write!(f, "!{a}"),
            WhyNot(a) => write!(f, "?{a}"),
        }
    }
}

/// A net with a type for every port at every depth, keyed by path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypedNet {
    pub net: Net,
    pub types: BTreeMap<Path, MellType>,
}

/// Checks the typing clauses at every depth.
pub fn typecheck(tn: &TypedNet) -> ValidationReport {
    let mut out = Vec::new();
    check_types(&tn.net, &tn.types, &mut Vec::new(), &mut out);
    ValidationReport { violations: out }
}

fn check_types(net: &Net, types: &BTreeMap<Path, MellType>, prefix: &mut Vec<PortId>, out: &mut Vec<Violation>) {
    let location = prefix.clone();
    let full = |p: &[PortId]| -> Path { prefix.iter().chain(p).cloned().collect() };
    let mut fail = |at: &[PortId], message: String| {
        out.push(Violation {
            location: location.clone(),
            kind: ViolationKind::Type { at: path_string(at), message },
        })
    };
    let ty = |p: &[PortId]| types.get(&full(p));
    for p in net.ports.keys() {
        if ty(std::slice::from_ref(p)).is_none() {
            fail(std::slice::from_ref(p), "no type".into());
        }
    }
    for (a, b) in &net.axioms {
        if let (Some(ta), Some(tb)) = (ty(std::slice::from_ref(a)), ty(std::slice::from_ref(b))) {
            let atomic = matches!(ta, MellType::Var(_) | MellType::DualVar(_));
            if !atomic || *tb != ta.dual() {
                fail(&[a.clone(), b.clone()], format!("axiom types {ta} and {tb} are not a variable and its dual"));
            }
        }
    }
    for (a, b) in &net.cuts {
        if let (Some(ta), Some(tb)) = (ty(std::slice::from_ref(a)), ty(std::slice::from_ref(b))) {
            if *tb != ta.dual() {
                fail(&[a.clone(), b.clone()], format!("cut types {ta} and {tb} are not dual"));
            }
        }
    }
    let premises = net.premise_map();
    for (p, &label) in &net.ports {
        let Some(t) = ty(std::slice::from_ref(p)) else { continue };
        let prem = premises.get(p).map(Vec::as_slice).unwrap_or(&[]);
        let prem_ty = |w: &PortId| ty(std::slice::from_ref(w)).cloned();
        match label {
            Label::One | Label::Bot => {
                let want = if label == Label::One { MellType::One } else { MellType::Bot };
                if *t != want {
                    fail(std::slice::from_ref(p), format!("{label} port typed {t}"));
                }
            }
            Label::Tensor | Label::Par => {
                let left = prem.iter().find(|w| net.left.contains(*w)).and_then(prem_ty);
                let right = prem.iter().find(|w| !net.left.contains(*w)).and_then(prem_ty);
                if let (Some(l), Some(r)) = (left, right) {
                    let want = if label == Label::Tensor { MellType::tensor(l, r) } else { MellType::par(l, r) };
                    if *t != want {
                        fail(std::slice::from_ref(p), format!("{label} port typed {t}, premises give {want}"));
                    }
                }
            }
            Label::Bang | Label::Quest => {
                let inner = match (label, t) {
                    (Label::Bang, MellType::OfCourse(c)) | (Label::Quest, MellType::WhyNot(c)) => Some(c.as_ref()),
                    _ => None,
                };
                match inner {
                    None => fail(std::slice::from_ref(p), format!("{label} port typed {t}")),
                    Some(c) => {
                        for w in prem {
                            if prem_ty(w).is_some_and(|tw| tw != *c) {
                                fail(std::slice::from_ref(w), format!("premise of {p} should have type {c}"));
                            }
                        }
                    }
                }
            }
            Label::Ax => {}
        }
    }
    for (o, data) in &net.boxes {
        for (q, target) in &data.doors {
            let mut door = vec![o.clone()];
            door.extend(q.iter().cloned());
            if let (Some(tq), Some(tt)) = (ty(&door), ty(std::slice::from_ref(target))) {
                let ok = *tt == MellType::of_course(tq.clone()) || *tt == MellType::why_not(tq.clone());
                if !ok {
                    fail(&door, format!("door into {target} of type {tt} carries {tq}"));
                }
            }
        }
    }
    for (o, data) in &net.boxes {
        prefix.push(o.clone());
        check_types(&data.content, types, prefix, out);
        prefix.pop();
    }
}

/// Elements of `D̄_𝒜`: values with signs erased.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Unsigned {
    Atom(Atom),
    Star,
    Pair(Box<Unsigned>, Box<Unsigned>),
    Bag(Vec<Unsigned>),
}

/// `U`.
pub fn erase_u(v: &Value) -> Unsigned {
    match &v.payload {
        Payload::Atom(a) => Unsigned::Atom(*a),
        Payload::Star => Unsigned::Star,
        Payload::Pair(a, b) => Unsigned::Pair(Box::new(erase_u(a)), Box::new(erase_u(b))),
        Payload::Bag(items) => {
            let mut items: Vec<Unsigned> = items.iter().map(erase_u).collect();
            items.sort();
            Unsigned::Bag(items)
        }
    }
}

/// Whether `u ∈ ⟦t⟧` when every variable is interpreted by atoms.
pub fn fits_type(u: &Unsigned, t: &MellType) -> bool {
    use MellType::*;
    match (u, t) {
        (Unsigned::Atom(_), Var(_) | DualVar(_)) => true,
        (Unsigned::Star, One | Bot) => true,
        (Unsigned::Pair(a, b), Tensor(x, y) | Par(x, y)) => fits_type(a, x) && fits_type(b, y),
        (Unsigned::Bag(items), OfCourse(x) | WhyNot(x)) => items.iter().all(|i| fits_type(i, x)),
        _ => false,
    }
}
