//! Port identifiers.
//!
//! A port name is either a plain atom or a copy tag `Copy(o, n, p)` naming the
//! port `p` inside the `n`-th copy of the content of box `o`. Copy tags nest,
//! so a port of an expanded term records the whole chain of boxes it was
//! copied out of.
//!
//! Textual form: atoms are bare identifiers; a copy tag is written
//! `o.n.p`, right-associative, with a box component that is itself a copy tag
//! wrapped in braces (`{o.0.b}.2.q`). A path through nested boxes (used for
//! door keys and deep ports) joins its components with `/`.

use std::fmt;
use std::sync::Arc;

/// A structured port identifier.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PortId {
    Atom(Arc<str>),
    Copy(Arc<CopyTag>),
}

/// Payload of [`PortId::Copy`].
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct CopyTag {
    pub boxed: PortId,
    pub ordinal: u32,
    pub inner: PortId,
}

/// A sequence of port ids descending through boxes; the last component is a
/// port of the innermost content, every earlier one a box.
pub type Path = Vec<PortId>;

impl PortId {
    pub fn atom(name: &str) -> PortId {
        PortId::Atom(Arc::from(name))
    }

    pub fn copy(boxed: PortId, ordinal: u32, inner: PortId) -> PortId {
        PortId::Copy(Arc::new(CopyTag {
            boxed,
            ordinal,
            inner,
        }))
    }

    pub fn as_copy(&self) -> Option<&CopyTag> {
        match self {
            PortId::Copy(tag) => Some(tag),
            PortId::Atom(_) => None,
        }
    }

    pub fn is_atom(&self) -> bool {
        matches!(self, PortId::Atom(_))
    }

    /// Whether `name` can be written as a bare atom.
    pub fn valid_atom_name(name: &str) -> bool {
        let mut chars = name.chars();
        match chars.next() {
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
            _ => return false,
        }
        chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
    }

    /// Parses the dotted textual form produced by `Display`.
    pub fn parse(text: &str) -> Result<PortId, String> {
        let mut parser = IdParser {
            chars: text.as_bytes(),
            pos: 0,
        };
        let id = parser.id()?;
        if parser.pos != parser.chars.len() {
            return Err(format!(
                "unexpected '{}' at offset {} in id {text:?}",
                parser.chars[parser.pos] as char, parser.pos
            ));
        }
        Ok(id)
    }
}

struct IdParser<'a> {
    chars: &'a [u8],
    pos: usize,
}

impl IdParser<'_> {
    fn peek(&self) -> Option<u8> {
        self.chars.get(self.pos).copied()
    }

    fn id(&mut self) -> Result<PortId, String> {
        let head = match self.peek() {
            Some(b'{') => {
                self.pos += 1;
                let inner = self.id()?;
                if self.peek() != Some(b'}') {
                    return Err(format!("expected '}}' at offset {}", self.pos));
                }
                self.pos += 1;
                if inner.is_atom() {
                    return Err("braces are reserved for copy-tagged box names".into());
                }
                inner
            }
            _ => self.atom()?,
        };
        if self.peek() != Some(b'.') {
            if !head.is_atom() {
                return Err(format!("braced box name needs '.n.port' at offset {}", self.pos));
            }
            return Ok(head);
        }
        self.pos += 1;
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        let digits = std::str::from_utf8(&self.chars[start..self.pos]).unwrap_or("");
        let ordinal: u32 = digits
            .parse()
            .map_err(|_| format!("expected a copy ordinal at offset {start}"))?;
        if self.peek() != Some(b'.') {
            return Err(format!("expected '.' after ordinal at offset {}", self.pos));
        }
        self.pos += 1;
        let inner = self.id()?;
        Ok(PortId::copy(head, ordinal, inner))
    }

    fn atom(&mut self) -> Result<PortId, String> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == b'_' || c == b'\'' {
                self.pos += 1;
            } else {
                break;
            }
        }
        let name = std::str::from_utf8(&self.chars[start..self.pos]).unwrap_or("");
        if !PortId::valid_atom_name(name) {
            return Err(format!("bad identifier at offset {start}"));
        }
        Ok(PortId::atom(name))
    }
}

impl fmt::Display for PortId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PortId::Atom(name) => f.write_str(name),
            PortId::Copy(tag) => {
                if tag.boxed.is_atom() {
                    write!(f, "{}.{}.{}", tag.boxed, tag.ordinal, tag.inner)
                } else {
                    write!(f, "{{{}}}.{}.{}", tag.boxed, tag.ordinal, tag.inner)
                }
            }
        }
    }
}

impl fmt::Debug for PortId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl From<&str> for PortId {
    fn from(name: &str) -> Self {
        PortId::atom(name)
    }
}

/// Renders a path as `a/b/c`.
pub fn path_string(path: &[PortId]) -> String {
    path.iter()
        .map(|p| p.to_string())
        .collect::<Vec<_>>()
        .join("/")
}

/// Parses the `/`-separated path form.
pub fn parse_path(text: &str) -> Result<Path, String> {
    text.split('/').map(PortId::parse).collect()
}
