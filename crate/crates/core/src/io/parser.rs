//! Line-level N-Triples / N-Quads grammar.

use std::fmt;

use thiserror::Error;

use crate::model::{BlankNode, Iri, Literal, Quad, Statement, Term, Triple};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineMode {
    Triples,
    Quads,
}

// Lives for one line only, so the size gap between variants is harmless.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LineKind {
    Statement(Statement),
    Comment,
    Blank,
    FrameDelimiter,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedLine {
    pub line: usize,
    pub kind: LineKind,
}

/// Line and column are 1-based; the column counts characters.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {reason}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub reason: String,
}

pub const FRAME_DELIMITER: &str = "#---";

pub fn parse_statement_line(
    line: &str,
    mode: LineMode,
    line_no: usize,
) -> Result<ParsedLine, ParseError> {
    let kind = if line == FRAME_DELIMITER {
        LineKind::FrameDelimiter
    } else {
        let mut cursor = Cursor::new(line, line_no);
        cursor.skip_ws();
        match cursor.peek() {
            None => LineKind::Blank,
            Some('#') => LineKind::Comment,
            Some(_) => LineKind::Statement(cursor.statement(mode)?),
        }
    };
    Ok(ParsedLine {
        line: line_no,
        kind,
    })
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

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t')) {
            self.pos += 1;
        }
    }

    fn error_at(&self, pos: usize, reason: impl fmt::Display) -> ParseError {
        ParseError {
            line: self.line,
            column: pos + 1,
            reason: reason.to_string(),
        }
    }

    fn error(&self, reason: impl fmt::Display) -> ParseError {
        self.error_at(self.pos, reason)
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        match self.peek() {
            Some(found) if found == c => {
                self.pos += 1;
                Ok(())
            }
            Some(found) => Err(self.error(format!("expected {c:?}, found {found:?}"))),
            None => Err(self.error(format!("expected {c:?}, found end of line"))),
        }
    }

    fn statement(&mut self, mode: LineMode) -> Result<Statement, ParseError> {
        let subject_pos = self.pos;
        let subject = match self.peek() {
            Some('<') => Term::Iri(self.iri()?),
            Some('_') => Term::BlankNode(self.blank()?),
            _ => return Err(self.error("expected IRI or blank node as subject")),
        };
        self.skip_ws();
        if self.peek() != Some('<') {
            return Err(self.error("expected IRI as predicate"));
        }
        let predicate = self.iri()?;
        self.skip_ws();
        let object = match self.peek() {
            Some('<') => Term::Iri(self.iri()?),
            Some('_') => Term::BlankNode(self.blank()?),
            Some('"') => Term::Literal(self.literal()?),
            _ => return Err(self.error("expected IRI, blank node or literal as object")),
        };
        self.skip_ws();
        let graph_pos = self.pos;
        let graph = match self.peek() {
            Some('<') => Some(Term::Iri(self.iri()?)),
            Some('_') => Some(Term::BlankNode(self.blank()?)),
            _ => None,
        };
        self.skip_ws();
        match self.peek() {
            Some('.') => self.pos += 1,
            _ => return Err(self.error("missing final '.'")),
        }
        self.skip_ws();
        match self.peek() {
            None | Some('#') => {}
            Some(c) => return Err(self.error(format!("unexpected {c:?} after '.'"))),
        }

        let triple =
            Triple::new(subject, predicate, object).map_err(|e| self.error_at(subject_pos, e))?;
        match mode {
            LineMode::Triples => match graph {
                None => Ok(Statement::Triple(triple)),
                Some(_) => Err(self.error_at(graph_pos, "graph label not allowed in N-Triples")),
            },
            LineMode::Quads => Quad::from_triple(triple, graph)
                .map(Statement::Quad)
                .map_err(|e| self.error_at(graph_pos, e)),
        }
    }

    fn iri(&mut self) -> Result<Iri, ParseError> {
        let start = self.pos;
        self.expect('<')?;
        let mut value = String::new();
        loop {
            match self.bump() {
                None => return Err(self.error("unterminated IRI")),
                Some('>') => break,
                Some('\\') => {
                    let esc = self.pos - 1;
                    let c = match self.bump() {
                        Some('u') => self.hex_escape(4)?,
                        Some('U') => self.hex_escape(8)?,
                        _ => return Err(self.error_at(esc, "bad escape in IRI")),
                    };
                    value.push(c);
                }
                Some(c) if is_forbidden_in_iri(c) => {
                    return Err(self.error_at(self.pos - 1, format!("invalid character {c:?} in IRI")))
                }
                Some(c) => value.push(c),
            }
        }
        Iri::new(value).map_err(|e| self.error_at(start, e))
    }

    fn hex_escape(&mut self, digits: usize) -> Result<char, ParseError> {
        let start = self.pos;
        let mut code = 0u32;
        for _ in 0..digits {
            let d = self
                .bump()
                .and_then(|c| c.to_digit(16))
                .ok_or_else(|| self.error_at(start, "bad escape: expected hex digits"))?;
            code = code * 16 + d;
        }
        char::from_u32(code).ok_or_else(|| self.error_at(start, "bad escape: not a code point"))
    }

    fn blank(&mut self) -> Result<BlankNode, ParseError> {
        let start = self.pos;
        self.expect('_')?;
        self.expect(':')?;
        let label_start = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_alphanumeric() => self.pos += 1,
            _ => return Err(self.error("malformed blank node label")),
        }
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-'))
        {
            self.pos += 1;
        }
        // A trailing '.' terminates the statement rather than the label.
        while self.chars[self.pos - 1] == '.' {
            self.pos -= 1;
        }
        let label: String = self.chars[label_start..self.pos].iter().collect();
        BlankNode::new(label).map_err(|e| self.error_at(start, e))
    }

    fn literal(&mut self) -> Result<Literal, ParseError> {
        self.expect('"')?;
        let mut lexical = String::new();
        loop {
            match self.bump() {
                None => return Err(self.error("unterminated literal")),
                Some('"') => break,
                Some('\\') => {
                    let esc = self.pos - 1;
                    let c = match self.bump() {
                        Some('t') => '\t',
                        Some('b') => '\u{8}',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('f') => '\u{c}',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        Some('u') => self.hex_escape(4)?,
                        Some('U') => self.hex_escape(8)?,
                        _ => return Err(self.error_at(esc, "bad escape in literal")),
                    };
                    lexical.push(c);
                }
                Some(c) => lexical.push(c),
            }
        }
        match self.peek() {
            Some('@') => {
                let start = self.pos;
                self.pos += 1;
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '-') {
                    self.pos += 1;
                }
                let tag: String = self.chars[start + 1..self.pos].iter().collect();
                Literal::lang_tagged(lexical, tag).map_err(|e| self.error_at(start, e))
            }
            Some('^') => {
                self.pos += 1;
                self.expect('^')?;
                if self.peek() != Some('<') {
                    return Err(self.error("expected datatype IRI"));
                }
                Ok(Literal::typed(lexical, self.iri()?))
            }
            _ => Ok(Literal::string(lexical)),
        }
    }
}

pub(crate) fn is_forbidden_in_iri(c: char) -> bool {
    c <= ' ' || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\')
}
