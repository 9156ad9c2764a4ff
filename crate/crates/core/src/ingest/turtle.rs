//! A Turtle subset: `@prefix` directives, prefixed names, the `a` keyword,
//! `;` and `,` continuations, and plain or datatyped string literals.

use std::collections::HashMap;

use crate::error::{KgError, Result};
use crate::ingest::ntriples::{ObjectKind, Parsed, Position, Triple};
use crate::ingest::vocab::RDF_TYPE;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Iri(String),
    PName(String, String),
    A,
    Str(String),
    Caret,
    Dot,
    Semi,
    Comma,
    PrefixDirective,
    LangTag,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    pos: Position,
}

struct Lexer {
    chars: Vec<char>,
    i: usize,
    line: usize,
    col: usize,
}

impl Lexer {
    fn new(src: &str) -> Self {
        Lexer {
            chars: src.chars().collect(),
            i: 0,
            line: 1,
            col: 1,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.i).copied()
    }

    fn peek_at(&self, k: usize) -> Option<char> {
        self.chars.get(self.i + k).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.i += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn pos(&self) -> Position {
        Position {
            line: self.line,
            col: self.col,
        }
    }

    fn err(&self, msg: impl std::fmt::Display) -> KgError {
        KgError::parse(self.line, self.col, msg)
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('#') => {
                    while !matches!(self.peek(), None | Some('\n')) {
                        self.bump();
                    }
                }
                _ => return,
            }
        }
    }

    fn tokens(mut self) -> Result<Vec<Spanned>> {
        let mut out = Vec::new();
        loop {
            self.skip_trivia();
            let pos = self.pos();
            let Some(c) = self.peek() else { break };
            let tok = match c {
                '<' => {
                    self.bump();
                    let mut s = String::new();
                    loop {
                        match self.bump() {
                            Some('>') => break,
                            Some(c) if c.is_whitespace() => return Err(self.err("whitespace in IRI")),
                            Some(c) => s.push(c),
                            None => return Err(self.err("unterminated IRI")),
                        }
                    }
                    Tok::Iri(s)
                }
                '"' => {
                    self.bump();
                    Tok::Str(self.string_body()?)
                }
                '^' => {
                    self.bump();
                    if self.bump() != Some('^') {
                        return Err(self.err("expected `^^`"));
                    }
                    Tok::Caret
                }
                '.' => {
                    self.bump();
                    Tok::Dot
                }
                ';' => {
                    self.bump();
                    Tok::Semi
                }
                ',' => {
                    self.bump();
                    Tok::Comma
                }
                '@' => {
                    self.bump();
                    let word = self.word();
                    if word == "prefix" {
                        Tok::PrefixDirective
                    } else if word.is_empty() {
                        return Err(self.err("expected directive or language tag after `@`"));
                    } else {
                        Tok::LangTag
                    }
                }
                '_' if self.peek_at(1) == Some(':') => {
                    return Err(KgError::parse(pos.line, pos.col, "blank nodes are not supported"));
                }
                c if c.is_alphanumeric() || c == ':' || c == '_' => {
                    let word = self.word();
                    if word == "a" && self.peek() != Some(':') {
                        Tok::A
                    } else {
                        let mut local = String::new();
                        if self.peek() != Some(':') {
                            return Err(KgError::parse(pos.line, pos.col, format!("unexpected bare word `{word}`")));
                        }
                        self.bump();
                        while let Some(c) = self.peek() {
                            let continues = c.is_alphanumeric()
                                || matches!(c, '_' | '-' | ':' | '%')
                                || (c == '.' && matches!(self.peek_at(1), Some(n) if n.is_alphanumeric() || n == '_'));
                            if !continues {
                                break;
                            }
                            local.push(c);
                            self.bump();
                        }
                        Tok::PName(word, local)
                    }
                }
                other => return Err(self.err(format!("unexpected character `{other}`"))),
            };
            out.push(Spanned { tok, pos });
        }
        Ok(out)
    }

    fn word(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || c == '_' || c == '-' {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        s
    }

    fn string_body(&mut self) -> Result<String> {
        let mut s = String::new();
        loop {
            match self.bump() {
                Some('"') => return Ok(s),
                Some('\\') => match self.bump() {
                    Some('t') => s.push('\t'),
                    Some('n') => s.push('\n'),
                    Some('r') => s.push('\r'),
                    Some('"') => s.push('"'),
                    Some('\'') => s.push('\''),
                    Some('\\') => s.push('\\'),
                    Some(c) => return Err(self.err(format!("unsupported escape `\\{c}`"))),
                    None => return Err(self.err("dangling escape")),
                },
                Some('\n') | None => return Err(self.err("unterminated literal")),
                Some(c) => s.push(c),
            }
        }
    }
}

struct TurtleParser {
    toks: Vec<Spanned>,
    i: usize,
    prefixes: HashMap<String, String>,
    out: Parsed,
}

impl TurtleParser {
    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.i)
    }

    fn next(&mut self) -> Result<Spanned> {
        let t = self.toks.get(self.i).cloned().ok_or_else(|| {
            let pos = self.toks.last().map(|s| s.pos).unwrap_or(Position { line: 1, col: 1 });
            KgError::parse(pos.line, pos.col, "unexpected end of input")
        })?;
        self.i += 1;
        Ok(t)
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        let t = self.next()?;
        if t.tok == want {
            Ok(())
        } else {
            Err(KgError::parse(t.pos.line, t.pos.col, format!("expected {what}")))
        }
    }

    fn expand(&self, prefix: &str, local: &str, pos: Position) -> Result<String> {
        match self.prefixes.get(prefix) {
            Some(ns) => Ok(format!("{ns}{local}")),
            None => Err(KgError::UnknownPrefix {
                prefix: prefix.to_string(),
                line: pos.line,
                col: pos.col,
            }),
        }
    }

    fn iri(&mut self, allow_a: bool) -> Result<String> {
        let t = self.next()?;
        match t.tok {
            Tok::Iri(s) => Ok(s),
            Tok::PName(p, l) => self.expand(&p, &l, t.pos),
            Tok::A if allow_a => Ok(RDF_TYPE.to_string()),
            _ => Err(KgError::parse(t.pos.line, t.pos.col, "expected IRI or prefixed name")),
        }
    }

    fn object(&mut self) -> Result<(String, ObjectKind)> {
        let is_str = matches!(self.peek(), Some(Spanned { tok: Tok::Str(_), .. }));
        if !is_str {
            return Ok((self.iri(false)?, ObjectKind::Iri));
        }
        let Tok::Str(s) = self.next()?.tok else { unreachable!() };
        match self.peek() {
            Some(Spanned { tok: Tok::Caret, .. }) => {
                self.i += 1;
                self.iri(false)?;
            }
            Some(Spanned { tok: Tok::LangTag, pos }) => {
                return Err(KgError::parse(pos.line, pos.col, "language tags are not supported"));
            }
            _ => {}
        }
        Ok((s, ObjectKind::Literal))
    }

    fn statement(&mut self) -> Result<()> {
        if matches!(self.peek(), Some(Spanned { tok: Tok::PrefixDirective, .. })) {
            self.i += 1;
            let t = self.next()?;
            let Tok::PName(p, l) = t.tok else {
                return Err(KgError::parse(t.pos.line, t.pos.col, "expected prefix name"));
            };
            if !l.is_empty() {
                return Err(KgError::parse(t.pos.line, t.pos.col, "prefix name must end with `:`"));
            }
            let t = self.next()?;
            let Tok::Iri(ns) = t.tok else {
                return Err(KgError::parse(t.pos.line, t.pos.col, "expected namespace IRI"));
            };
            self.expect(Tok::Dot, "`.` after @prefix")?;
            self.prefixes.insert(p, ns);
            return Ok(());
        }
        let pos = self.peek().map(|s| s.pos).expect("caller checked");
        let subject = self.iri(false)?;
        loop {
            let predicate = self.iri(true)?;
            loop {
                let (object, kind) = self.object()?;
                self.out.triples.push(Triple {
                    subject: subject.clone(),
                    predicate: predicate.clone(),
                    object,
                    kind,
                });
                self.out.positions.push(pos);
                if matches!(self.peek(), Some(Spanned { tok: Tok::Comma, .. })) {
                    self.i += 1;
                } else {
                    break;
                }
            }
            if matches!(self.peek(), Some(Spanned { tok: Tok::Semi, .. })) {
                self.i += 1;
                // A trailing `;` before `.` is allowed.
                if matches!(self.peek(), Some(Spanned { tok: Tok::Dot, .. })) {
                    break;
                }
            } else {
                break;
            }
        }
        self.expect(Tok::Dot, "`.` at end of statement")
    }
}

/// Parse the Turtle subset into absolute triples.
pub fn parse_turtle_subset(input: &str) -> Result<Parsed> {
    let toks = Lexer::new(input).tokens()?;
    let mut p = TurtleParser {
        toks,
        i: 0,
        prefixes: HashMap::new(),
        out: Parsed::default(),
    };
    while p.peek().is_some() {
        p.statement()?;
    }
    Ok(p.out)
}
