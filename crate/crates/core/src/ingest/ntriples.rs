//! Line-oriented N-Triples reader and writer.

use std::fmt::Write as _;

use crate::error::{KgError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ObjectKind {
    Iri,
    Literal,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub subject: String,
    pub predicate: String,
    pub object: String,
    pub kind: ObjectKind,
}

impl Triple {
    pub fn iri(s: &str, p: &str, o: &str) -> Self {
        Triple {
            subject: s.into(),
            predicate: p.into(),
            object: o.into(),
            kind: ObjectKind::Iri,
        }
    }

    pub fn literal(s: &str, p: &str, o: &str) -> Self {
        Triple {
            subject: s.into(),
            predicate: p.into(),
            object: o.into(),
            kind: ObjectKind::Literal,
        }
    }

    pub fn is_literal(&self) -> bool {
        self.kind == ObjectKind::Literal
    }
}

/// 1-based source position of a statement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Position {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    #[default]
    Strict,
    /// Malformed statements are logged and skipped.
    Lenient,
}

#[derive(Debug, Default)]
pub struct Parsed {
    pub triples: Vec<Triple>,
    pub positions: Vec<Position>,
    /// Errors for statements skipped in lenient mode.
    pub skipped: Vec<KgError>,
}

pub fn parse_ntriples(input: &str, mode: ParseMode) -> Result<Parsed> {
    let mut out = Parsed::default();
    for (idx, line) in input.lines().enumerate() {
        let lineno = idx + 1;
        match parse_line(line, lineno) {
            Ok(Some((t, col))) => {
                out.triples.push(t);
                out.positions.push(Position { line: lineno, col });
            }
            Ok(None) => {}
            Err(e) => match mode {
                ParseMode::Strict => return Err(e),
                ParseMode::Lenient => {
                    log::warn!("skipping statement: {e}");
                    out.skipped.push(e);
                }
            },
        }
    }
    Ok(out)
}

pub fn parse_ntriples_bytes(input: &[u8], mode: ParseMode) -> Result<Parsed> {
    let text = std::str::from_utf8(input).map_err(|e| {
        let prefix = &input[..e.valid_up_to()];
        let line = prefix.iter().filter(|b| **b == b'\n').count() + 1;
        KgError::parse(line, 1, "invalid UTF-8")
    })?;
    parse_ntriples(text, mode)
}

struct Cursor {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

impl Cursor {
    fn new(src: &str, line: usize) -> Self {
        Cursor {
            chars: src.chars().collect(),
            pos: 0,
            line,
        }
    }

    fn col(&self) -> usize {
        self.pos + 1
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c == ' ' || c == '\t') {
            self.pos += 1;
        }
    }

    fn err(&self, msg: impl std::fmt::Display) -> KgError {
        KgError::parse(self.line, self.col(), msg)
    }

    fn expect(&mut self, want: char) -> Result<()> {
        match self.bump() {
            Some(c) if c == want => Ok(()),
            Some(c) => {
                self.pos -= 1;
                Err(self.err(format!("expected `{want}`, found `{c}`")))
            }
            None => Err(self.err(format!("expected `{want}`, found end of line"))),
        }
    }

    fn iri(&mut self) -> Result<String> {
        match self.peek() {
            Some('<') => {}
            Some('_') => return Err(self.err("blank nodes are not supported")),
            Some(c) => return Err(self.err(format!("expected `<`, found `{c}`"))),
            None => return Err(self.err("expected `<`, found end of line")),
        }
        self.pos += 1;
        let mut s = String::new();
        loop {
            match self.bump() {
                Some('>') => break,
                Some(c) if c.is_whitespace() || c == '<' || c == '"' => {
                    self.pos -= 1;
                    return Err(self.err(format!("illegal character `{c}` in IRI")));
                }
                Some(c) => s.push(c),
                None => return Err(self.err("unterminated IRI")),
            }
        }
        if s.is_empty() {
            return Err(self.err("empty IRI"));
        }
        Ok(s)
    }

    fn literal(&mut self) -> Result<String> {
        self.expect('"')?;
        let value = read_string_body(self)?;
        match self.peek() {
            Some('^') => {
                self.pos += 1;
                self.expect('^')?;
                self.iri()?;
            }
            Some('@') => {
                self.pos += 1;
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '-') {
                    self.pos += 1;
                }
                if self.pos == start {
                    return Err(self.err("empty language tag"));
                }
            }
            _ => {}
        }
        Ok(value)
    }
}

fn read_string_body(cur: &mut Cursor) -> Result<String> {
    let mut s = String::new();
    loop {
        match cur.bump() {
            Some('"') => return Ok(s),
            Some('\\') => {
                let c = cur.bump().ok_or_else(|| cur.err("dangling escape"))?;
                match c {
                    't' => s.push('\t'),
                    'b' => s.push('\u{8}'),
                    'n' => s.push('\n'),
                    'r' => s.push('\r'),
                    'f' => s.push('\u{c}'),
                    '"' => s.push('"'),
                    '\'' => s.push('\''),
                    '\\' => s.push('\\'),
                    'u' | 'U' => {
                        let n = if c == 'u' { 4 } else { 8 };
                        let mut hex = String::new();
                        for _ in 0..n {
                            hex.push(cur.bump().ok_or_else(|| cur.err("short unicode escape"))?);
                        }
                        let code = u32::from_str_radix(&hex, 16).map_err(|_| cur.err("bad unicode escape"))?;
                        s.push(char::from_u32(code).ok_or_else(|| cur.err("invalid code point"))?);
                    }
                    other => return Err(cur.err(format!("unknown escape `\\{other}`"))),
                }
            }
            Some(c) => s.push(c),
            None => return Err(cur.err("unterminated literal")),
        }
    }
}

fn parse_line(line: &str, lineno: usize) -> Result<Option<(Triple, usize)>> {
    let mut cur = Cursor::new(line, lineno);
    cur.skip_ws();
    match cur.peek() {
        None | Some('#') => return Ok(None),
        _ => {}
    }
    let col = cur.col();
    let subject = cur.iri()?;
    cur.skip_ws();
    let predicate = cur.iri()?;
    cur.skip_ws();
    let (object, kind) = match cur.peek() {
        Some('"') => (cur.literal()?, ObjectKind::Literal),
        _ => (cur.iri()?, ObjectKind::Iri),
    };
    cur.skip_ws();
    cur.expect('.')?;
    cur.skip_ws();
    match cur.peek() {
        None | Some('#') => {}
        Some(c) => return Err(cur.err(format!("unexpected `{c}` after statement"))),
    }
    Ok(Some((
        Triple {
            subject,
            predicate,
            object,
            kind,
        },
        col,
    )))
}

fn escape_literal(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out
}

/// Serialize one statement per line.
pub fn emit_ntriples(triples: &[Triple]) -> String {
    let mut out = String::new();
    for t in triples {
        match t.kind {
            ObjectKind::Iri => writeln!(out, "<{}> <{}> <{}> .", t.subject, t.predicate, t.object),
            ObjectKind::Literal => writeln!(
                out,
                "<{}> <{}> \"{}\" .",
                t.subject,
                t.predicate,
                escape_literal(&t.object)
            ),
        }
        .expect("write to String");
    }
    out
}
