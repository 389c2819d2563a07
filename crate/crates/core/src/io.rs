//! Text format for nets and a seeded random generator of proof-structures.
//!
//! ```text
//! (net (ports (a ax) (b ax) (t tensor) ...)
//!      (wires (a -> t :left) (b -> t))
//!      (axioms (a b)) (cuts)
//!      (boxes (box o (net ...) (doors (x -> o) (y -> c)))))
//! ```
//!
//! Output is canonical: every section is sorted, so equal nets serialize to
//! equal text.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::id::{parse_path, path_string, Path, PortId};
use crate::net::{BoxData, Label, Net};

pub fn serialize_net(net: &Net) -> String {
    let mut out = String::new();
    write_net(net, 0, &mut out);
    out.push('\n');
    out
}

fn write_net(net: &Net, indent: usize, out: &mut String) {
    let pad = " ".repeat(indent + 2);
    out.push_str("(net\n");
    out.push_str(&pad);
    out.push_str("(ports");
    for (p, l) in &net.ports {
        let _ = write!(out, " ({p} {l})");
    }
    out.push_str(")\n");
    out.push_str(&pad);
    out.push_str("(wires");
    for (w, t) in &net.wires {
        let marker = if net.left.contains(w) { " :left" } else { "" };
        let _ = write!(out, " ({w} -> {t}{marker})");
    }
    out.push_str(")\n");
    for (name, pairs) in [("axioms", &net.axioms), ("cuts", &net.cuts)] {
        out.push_str(&pad);
        let _ = write!(out, "({name}");
        for (a, b) in pairs {
            let _ = write!(out, " ({a} {b})");
        }
        out.push_str(")\n");
    }
    out.push_str(&pad);
    out.push_str("(boxes");
    for (o, data) in &net.boxes {
        let inner = " ".repeat(indent + 4);
        let _ = write!(out, "\n{inner}(box {o} ");
        write_net(&data.content, indent + 4, out);
        let _ = write!(out, "\n{inner}  (doors");
        for (key, t) in &data.doors {
            let _ = write!(out, " ({} -> {t})", path_string(key));
        }
        out.push_str("))");
    }
    out.push_str("))");
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Token {
    Open,
    Close,
    Word(String),
}

#[derive(Clone, Debug)]
struct Spanned {
    token: Token,
    line: usize,
    column: usize,
}

fn tokenize(text: &str) -> Vec<Spanned> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut column = 1;
    let mut word: Option<(String, usize, usize)> = None;
    let flush = |word: &mut Option<(String, usize, usize)>, out: &mut Vec<Spanned>| {
        if let Some((w, l, c)) = word.take() {
            out.push(Spanned { token: Token::Word(w), line: l, column: c });
        }
    };
    for ch in text.chars() {
        match ch {
            '(' | ')' => {
                flush(&mut word, &mut out);
                let token = if ch == '(' { Token::Open } else { Token::Close };
                out.push(Spanned { token, line, column });
            }
            c if c.is_whitespace() => flush(&mut word, &mut out),
            c => match &mut word {
                Some((w, _, _)) => w.push(c),
                None => word = Some((c.to_string(), line, column)),
            },
        }
        if ch == '\n' {
            line += 1;
            column = 1;
        } else {
            column += 1;
        }
    }
    flush(&mut word, &mut out);
    out
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn error(&self, message: impl Into<String>) -> Error {
        let (line, column) = match self.tokens.get(self.pos).or(self.tokens.last()) {
            Some(t) => (t.line, t.column),
            None => (1, 1),
        };
        Error::Parse { line, column, message: message.into() }
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|t| &t.token)
    }

    fn expect(&mut self, token: Token) -> Result<()> {
        if self.peek() == Some(&token) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {}", describe(&token))))
        }
    }

    fn word(&mut self) -> Result<String> {
        match self.peek() {
            Some(Token::Word(w)) => {
                let w = w.clone();
                self.pos += 1;
                Ok(w)
            }
            _ => Err(self.error("expected a word")),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<()> {
        let at = self.pos;
        match self.word() {
            Ok(w) if w == kw => Ok(()),
            _ => {
                self.pos = at;
                Err(self.error(format!("expected '{kw}'")))
            }
        }
    }

    fn id(&mut self) -> Result<PortId> {
        let at = self.pos;
        let w = self.word()?;
        PortId::parse(&w).map_err(|m| {
            self.pos = at;
            self.error(m)
        })
    }

    fn path(&mut self) -> Result<Path> {
        let at = self.pos;
        let w = self.word()?;
        parse_path(&w).map_err(|m| {
            self.pos = at;
            self.error(m)
        })
    }

    fn at_close(&self) -> bool {
        self.peek() == Some(&Token::Close)
    }

    /// `(name item*)`, calling `item` after each opening parenthesis.
    fn section(&mut self, name: &str, mut item: impl FnMut(&mut Parser) -> Result<()>) -> Result<()> {
        self.expect(Token::Open)?;
        self.keyword(name)?;
        while !self.at_close() {
            self.expect(Token::Open)?;
            item(self)?;
            self.expect(Token::Close)?;
        }
        self.expect(Token::Close)
    }

    fn net(&mut self) -> Result<Net> {
        let mut net = Net::new();
        self.expect(Token::Open)?;
        self.keyword("net")?;
        self.section("ports", |p| {
            let id = p.id()?;
            let at = p.pos;
            let word = p.word()?;
            let label = Label::from_keyword(&word).ok_or_else(|| {
                p.pos = at;
                p.error(format!("unknown label '{word}'"))
            })?;
            if net.ports.insert(id.clone(), label).is_some() {
                return Err(p.error(format!("port {id} declared twice")));
            }
            Ok(())
        })?;
        self.section("wires", |p| {
            let from = p.id()?;
            p.keyword("->")?;
            let to = p.id()?;
            if !p.at_close() {
                p.keyword(":left")?;
                if !net.label(&to).is_some_and(Label::is_multiplicative) {
                    p.pos -= 1;
                    return Err(p.error(format!("left marker on a wire into non-multiplicative port {to}")));
                }
                net.left.insert(from.clone());
            }
            if net.wires.insert(from.clone(), to).is_some() {
                return Err(p.error(format!("port {from} has two outgoing wires")));
            }
            Ok(())
        })?;
        self.section("axioms", |p| {
            let (a, b) = (p.id()?, p.id()?);
            net.add_axiom(a, b);
            Ok(())
        })?;
        self.section("cuts", |p| {
            let (a, b) = (p.id()?, p.id()?);
            net.add_cut(a, b);
            Ok(())
        })?;
        self.section("boxes", |p| {
            p.keyword("box")?;
            let o = p.id()?;
            let content = p.net()?;
            let mut doors = BTreeMap::new();
            p.section("doors", |p| {
                let key = p.path()?;
                p.keyword("->")?;
                let target = p.id()?;
                if doors.insert(key.clone(), target).is_some() {
                    return Err(p.error(format!("door {} given twice", path_string(&key))));
                }
                Ok(())
            })?;
            if net.boxes.insert(o.clone(), BoxData { content, doors }).is_some() {
                return Err(p.error(format!("box {o} given twice")));
            }
            Ok(())
        })?;
        self.expect(Token::Close)?;
        Ok(net)
    }
}

fn describe(token: &Token) -> String {
    match token {
        Token::Open => "'('".into(),
        Token::Close => "')'".into(),
        Token::Word(w) => format!("'{w}'"),
    }
}

/// Parses one net. Structural validity is not checked here; see
/// [`crate::validate`].
pub fn parse_net(text: &str) -> Result<Net> {
    let mut parser = Parser { tokens: tokenize(text), pos: 0 };
    let net = parser.net()?;
    if parser.pos != parser.tokens.len() {
        return Err(parser.error("trailing input after the net"));
    }
    Ok(net)
}

/// Bounds for [`gen_random`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenParams {
    pub max_depth: usize,
    pub max_boxes_per_level: usize,
    /// Bound on the number of boxes at all levels together.
    pub max_boxes: usize,
    /// Upper bound on every arity; at least 2 when multiplicative links
    /// may appear.
    pub max_cosize: usize,
    pub max_ports: usize,
    pub allow_cuts: bool,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            max_depth: 2,
            max_boxes_per_level: 2,
            max_boxes: 4,
            max_cosize: 3,
            max_ports: 30,
            allow_cuts: false,
            seed: 0,
        }
    }
}

struct Gen<'a> {
    rng: ChaCha8Rng,
    params: &'a GenParams,
    ports_left: usize,
    boxes_left: usize,
}

/// A random PS within the bounds of `params`, deterministic in the seed.
///
/// Nets are built as forests: leaves are axioms, constants and boxes, and
/// connectives or contractions join pending conclusions. Auxiliary doors go
/// to fresh or shared `?`-ports of the enclosing level.
pub fn gen_random(params: &GenParams) -> Net {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(params.seed),
        params,
        ports_left: params.max_ports,
        boxes_left: params.max_boxes,
    };
    g.level(params.max_depth)
}

impl Gen<'_> {
    fn take_ports(&mut self, n: usize) -> bool {
        if self.ports_left >= n {
            self.ports_left -= n;
            true
        } else {
            false
        }
    }

    fn level(&mut self, depth: usize) -> Net {
        let cosize = self.params.max_cosize;
        let mut net = Net::new();
        let mut fresh = 0usize;
        let mut name = |prefix: &str| {
            fresh += 1;
            PortId::atom(&format!("{prefix}{fresh}"))
        };
        let mut pending: Vec<PortId> = Vec::new();

        let leaves = self.rng.gen_range(1..=3);
        for _ in 0..leaves {
            match self.rng.gen_range(0..4) {
                0 | 1 if self.take_ports(2) => {
                    let (a, b) = (name("a"), name("a"));
                    net.add_port(a.clone(), Label::Ax).add_port(b.clone(), Label::Ax);
                    net.add_axiom(a.clone(), b.clone());
                    pending.extend([a, b]);
                }
                2 if self.take_ports(1) => {
                    let p = name("u");
                    net.add_port(p.clone(), Label::One);
                    pending.push(p);
                }
                3 if self.take_ports(1) => {
                    let p = name("z");
                    net.add_port(p.clone(), Label::Bot);
                    pending.push(p);
                }
                _ => {}
            }
        }

        let mut quests: Vec<PortId> = Vec::new();
        if depth > 0 {
            let n_boxes = self.rng.gen_range(0..=self.params.max_boxes_per_level.min(self.boxes_left));
            for _ in 0..n_boxes {
                if self.boxes_left == 0 || !self.take_ports(1) {
                    break;
                }
                self.boxes_left -= 1;
                let inner_depth = self.rng.gen_range(0..depth);
                let content = self.level(inner_depth);
                let mut content = content;
                if content.ground_conclusions().is_empty() {
                    content.add_port("u0", Label::One);
                }
                let shallow: Vec<PortId> = content.ground_conclusions().into_iter().collect();
                let o = name("o");
                net.add_port(o.clone(), Label::Bang);
                let mut doors = BTreeMap::new();
                let principal = shallow[self.rng.gen_range(0..shallow.len())].clone();
                doors.insert(vec![principal.clone()], o.clone());
                for c in content.conclusions() {
                    if c == [principal.clone()] {
                        continue;
                    }
                    let open: Vec<&PortId> = quests.iter().filter(|q| arity_in(&net, &doors, q) < cosize).collect();
                    let target = if !open.is_empty() && (self.rng.gen_bool(0.5) || !self.take_ports(1)) {
                        open[self.rng.gen_range(0..open.len())].clone()
                    } else {
                        let q = name("c");
                        net.add_port(q.clone(), Label::Quest);
                        // Some door targets also collect a premise at this
                        // level, so that ground structure sits above them.
                        if !pending.is_empty() && cosize >= 2 && self.rng.gen_bool(0.4) {
                            let w = pending.swap_remove(self.rng.gen_range(0..pending.len()));
                            net.add_wire(w, q.clone());
                        }
                        quests.push(q.clone());
                        pending.push(q.clone());
                        q
                    };
                    doors.insert(c, target);
                }
                net.add_box(o.clone(), content, doors);
                pending.push(o);
            }
        }

        loop {
            if pending.len() < 2 || !self.rng.gen_bool(0.7) {
                break;
            }
            pending.sort();
            let choice = self.rng.gen_range(0..5);
            if choice == 4 && self.params.allow_cuts {
                let a = pending.swap_remove(self.rng.gen_range(0..pending.len()));
                let b = pending.swap_remove(self.rng.gen_range(0..pending.len()));
                net.add_cut(a, b);
                continue;
            }
            if !self.take_ports(1) {
                break;
            }
            if choice == 3 {
                let q = name("c");
                net.add_port(q.clone(), Label::Quest);
                let n = self.rng.gen_range(0..=cosize.min(pending.len()));
                for _ in 0..n {
                    let w = pending.swap_remove(self.rng.gen_range(0..pending.len()));
                    net.add_wire(w, q.clone());
                }
                pending.push(q);
            } else if cosize >= 2 {
                let label = if choice < 2 { Label::Tensor } else { Label::Par };
                let m = name(if label == Label::Tensor { "t" } else { "p" });
                net.add_port(m.clone(), label);
                let a = pending.swap_remove(self.rng.gen_range(0..pending.len()));
                let b = pending.swap_remove(self.rng.gen_range(0..pending.len()));
                net.add_left_wire(a, m.clone()).add_wire(b, m.clone());
                pending.push(m);
            }
        }
        net
    }
}

/// Arity of `q` counting the door map of a box under construction.
fn arity_in(net: &Net, doors: &BTreeMap<Path, PortId>, q: &PortId) -> usize {
    net.arity(q) + doors.values().filter(|t| *t == q).count()
}
