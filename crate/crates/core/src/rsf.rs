//! Rigi Standard Format: one tuple per line, `Name elem1 elem2 ...`.

use std::collections::BTreeSet;

use crate::frontend::lexer::is_identifier;
use crate::relation::Universe;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RsfError {
    #[error("RSF line {line}: unterminated quoted element")]
    UnterminatedQuote { line: usize },
    #[error("RSF line {line}: relation name {name:?} is not an identifier")]
    BadRelationName { line: usize, name: String },
    #[error("RSF line {line}: relation {name} has {found} elements, earlier lines have {expected}")]
    ArityMismatch {
        line: usize,
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("tuple element {0:?} contains a line break")]
    LineBreak(String),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Element {
    pub text: String,
    pub quoted: bool,
}

impl Element {
    pub fn plain(text: impl Into<String>) -> Self {
        Element {
            text: text.into(),
            quoted: false,
        }
    }

    pub fn quoted(text: impl Into<String>) -> Self {
        Element {
            text: text.into(),
            quoted: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RsfTuple {
    pub relation: String,
    pub elements: Vec<Element>,
    /// 1-based source line, for diagnostics.
    pub line: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RsfStream {
    pub tuples: Vec<RsfTuple>,
    pub terminated_by_dot: bool,
}

fn is_blank(c: char) -> bool {
    c == ' ' || c == '\t'
}

fn split_line(line: &str, lineno: usize) -> Result<Vec<Element>, RsfError> {
    let mut out = Vec::new();
    let mut rest = line.trim_start_matches(is_blank);
    while !rest.is_empty() {
        if let Some(body) = rest.strip_prefix('"') {
            let end = body
                .find('"')
                .ok_or(RsfError::UnterminatedQuote { line: lineno })?;
            out.push(Element::quoted(&body[..end]));
            rest = &body[end + 1..];
        } else {
            let end = rest.find(is_blank).unwrap_or(rest.len());
            out.push(Element::plain(&rest[..end]));
            rest = &rest[end..];
        }
        rest = rest.trim_start_matches(is_blank);
    }
    Ok(out)
}

/// Parses an RSF stream. Parsing stops at end of input or at the first
/// line starting with `.`; lines starting with `#` and blank lines are
/// skipped. Repeated lines collapse to one tuple.
pub fn parse_rsf(text: &str) -> Result<RsfStream, RsfError> {
    let mut stream = RsfStream::default();
    let mut seen = BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.starts_with('.') {
            stream.terminated_by_dot = true;
            break;
        }
        if line.starts_with('#') {
            continue;
        }
        let mut elements = split_line(line, lineno)?;
        if elements.is_empty() {
            continue;
        }
        let name = elements.remove(0);
        if name.quoted || !is_identifier(&name.text) {
            return Err(RsfError::BadRelationName {
                line: lineno,
                name: name.text,
            });
        }
        if seen.insert((name.text.clone(), elements.clone())) {
            stream.tuples.push(RsfTuple {
                relation: name.text,
                elements,
                line: lineno,
            });
        }
    }
    Ok(stream)
}

/// Formats one output line. An element is quoted when its flag is set or
/// when it contains whitespace.
pub fn serialize_tuple(prefix: Option<&str>, elements: &[(&str, bool)]) -> Result<String, RsfError> {
    let mut line = String::new();
    if let Some(p) = prefix {
        line.push_str(p);
    }
    for (i, &(text, quoted)) in elements.iter().enumerate() {
        if text.contains(['\n', '\r']) {
            return Err(RsfError::LineBreak(text.to_string()));
        }
        if i > 0 || prefix.is_some() {
            line.push(' ');
        }
        if quoted || text.is_empty() || text.contains(char::is_whitespace) {
            line.push('"');
            line.push_str(text);
            line.push('"');
        } else {
            line.push_str(text);
        }
    }
    line.push('\n');
    Ok(line)
}

/// Builds the universe from every tuple element and the given literals.
/// A string is flagged as quoted iff some RSF occurrence was quoted.
pub fn collect_universe<'a>(
    stream: &RsfStream,
    literals: impl IntoIterator<Item = &'a str>,
) -> Universe {
    let elements = stream
        .tuples
        .iter()
        .flat_map(|t| t.elements.iter())
        .map(|e| (e.text.clone(), e.quoted));
    let literals = literals.into_iter().map(|s| (s.to_string(), false));
    Universe::new(elements.chain(literals))
}
