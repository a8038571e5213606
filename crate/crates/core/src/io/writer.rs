use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::parser::{is_forbidden_in_iri, FRAME_DELIMITER};
use super::{ElementKind, Framing};
use crate::model::{Element, Iri, Literal, Quad, Statement, Term, Triple, XSD_STRING};

#[derive(Debug, Error)]
pub enum WriteError {
    #[error("item {index} does not match framing {framing}")]
    MixedPayload { index: usize, framing: Framing },
    #[error("framing {0} cannot be written this way")]
    WrongFraming(Framing),
    #[error("output directory {} already holds stream files", .0.display())]
    DirectoryNotEmpty(std::path::PathBuf),
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn push_iri(out: &mut String, iri: &Iri) {
    out.push('<');
    for c in iri.as_str().chars() {
        if is_forbidden_in_iri(c) {
            let _ = write!(out, "\\u{:04X}", c as u32);
        } else {
            out.push(c);
        }
    }
    out.push('>');
}

fn push_literal(out: &mut String, lit: &Literal) {
    out.push('"');
    for c in lit.lexical().chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    if let Some(lang) = lit.language() {
        out.push('@');
        out.push_str(lang);
    } else if lit.datatype().as_str() != XSD_STRING {
        out.push_str("^^");
        push_iri(out, lit.datatype());
    }
}

fn push_term(out: &mut String, term: &Term) {
    match term {
        Term::Iri(iri) => push_iri(out, iri),
        Term::BlankNode(b) => {
            out.push_str("_:");
            out.push_str(b.label());
        }
        Term::Literal(l) => push_literal(out, l),
    }
}

/// Canonical N-Triples form of a term.
pub fn format_term(term: &Term) -> String {
    let mut out = String::new();
    push_term(&mut out, term);
    out
}

fn push_triple_terms(out: &mut String, t: &Triple) {
    push_term(out, t.subject());
    out.push(' ');
    push_iri(out, t.predicate());
    out.push(' ');
    push_term(out, t.object());
}

/// One canonical line, without the newline.
pub fn format_triple(t: &Triple) -> String {
    let mut out = String::new();
    push_triple_terms(&mut out, t);
    out.push_str(" .");
    out
}

pub fn format_quad(q: &Quad) -> String {
    let mut out = String::new();
    push_triple_terms(&mut out, q.triple());
    if let Some(g) = q.graph() {
        out.push(' ');
        push_term(&mut out, g);
    }
    out.push_str(" .");
    out
}

fn write_line<W: Write>(out: &mut W, line: &str) -> io::Result<()> {
    out.write_all(line.as_bytes())?;
    out.write_all(b"\n")
}

pub fn write_flat_stream<'a, W: Write>(
    out: &mut W,
    statements: impl IntoIterator<Item = &'a Statement>,
    framing: Framing,
) -> Result<(), WriteError> {
    for (index, s) in statements.into_iter().enumerate() {
        let line = match (framing, s) {
            (Framing::FlatTriples, Statement::Triple(t)) => format_triple(t),
            (Framing::FlatQuads, Statement::Quad(q)) => format_quad(q),
            (Framing::FlatTriples | Framing::FlatQuads, _) => {
                return Err(WriteError::MixedPayload { index, framing })
            }
            _ => return Err(WriteError::WrongFraming(framing)),
        };
        write_line(out, &line)?;
    }
    Ok(())
}

fn element_lines(element: &Element, kind: ElementKind) -> Option<Vec<String>> {
    match (kind, element) {
        (ElementKind::Graph, Element::Graph(g)) => Some(g.iter().map(format_triple).collect()),
        (ElementKind::Dataset, Element::Dataset(d)) => Some(d.quads().map(|q| format_quad(&q)).collect()),
        _ => None,
    }
}

/// Incremental writer for frame-delimited grouped streams. Elements are
/// joined by `#---` lines. A stream holding a single empty element is
/// written as one blank line so it stays distinct from the empty stream.
pub struct FramedWriter<W: Write> {
    out: W,
    framing: Framing,
    count: usize,
    wrote_bytes: bool,
}

impl<W: Write> FramedWriter<W> {
    pub fn new(out: W, framing: Framing) -> Result<Self, WriteError> {
        if framing.is_flat() || framing.is_directory() {
            return Err(WriteError::WrongFraming(framing));
        }
        Ok(FramedWriter {
            out,
            framing,
            count: 0,
            wrote_bytes: false,
        })
    }

    pub fn push(&mut self, element: &Element) -> Result<(), WriteError> {
        let index = self.count;
        let lines = element_lines(element, self.framing.element_kind()).ok_or(
            WriteError::MixedPayload {
                index,
                framing: self.framing,
            },
        )?;
        if index > 0 {
            write_line(&mut self.out, FRAME_DELIMITER)?;
            self.wrote_bytes = true;
        }
        for line in &lines {
            write_line(&mut self.out, line)?;
            self.wrote_bytes = true;
        }
        self.count += 1;
        Ok(())
    }

    /// Returns the number of elements written.
    pub fn finish(mut self) -> Result<usize, WriteError> {
        if self.count == 1 && !self.wrote_bytes {
            self.out.write_all(b"\n")?;
        }
        self.out.flush()?;
        Ok(self.count)
    }
}

pub fn write_framed_stream<'a, W: Write>(
    out: &mut W,
    elements: impl IntoIterator<Item = &'a Element>,
    framing: Framing,
) -> Result<(), WriteError> {
    let mut w = FramedWriter::new(out, framing)?;
    for element in elements {
        w.push(element)?;
    }
    w.finish().map(|_| ())
}

/// Incremental writer producing one zero-padded `NNNNNNNN.nt`/`.nq` file
/// per element.
pub struct DirWriter {
    dir: PathBuf,
    framing: Framing,
    count: usize,
}

impl DirWriter {
    /// Creates `dir` if needed; refuses one that already holds stream files.
    pub fn new(dir: &Path, framing: Framing) -> Result<Self, WriteError> {
        if !framing.is_directory() {
            return Err(WriteError::WrongFraming(framing));
        }
        fs::create_dir_all(dir)?;
        for entry in fs::read_dir(dir)? {
            let path = entry?.path();
            if matches!(path.extension().and_then(|e| e.to_str()), Some("nt" | "nq")) {
                return Err(WriteError::DirectoryNotEmpty(dir.to_path_buf()));
            }
        }
        Ok(DirWriter {
            dir: dir.to_path_buf(),
            framing,
            count: 0,
        })
    }

    pub fn push(&mut self, element: &Element) -> Result<(), WriteError> {
        let index = self.count;
        let lines = element_lines(element, self.framing.element_kind()).ok_or(
            WriteError::MixedPayload {
                index,
                framing: self.framing,
            },
        )?;
        let mut body = String::new();
        for line in lines {
            body.push_str(&line);
            body.push('\n');
        }
        let name = format!("{index:08}.{}", self.framing.extension());
        fs::write(self.dir.join(name), body)?;
        self.count += 1;
        Ok(())
    }

    pub fn finish(self) -> usize {
        self.count
    }
}

/// Writes one file per element into `dir`; returns how many were written.
pub fn write_dir_stream<'a>(
    dir: &Path,
    elements: impl IntoIterator<Item = &'a Element>,
    framing: Framing,
) -> Result<usize, WriteError> {
    let mut w = DirWriter::new(dir, framing)?;
    for element in elements {
        w.push(element)?;
    }
    Ok(w.finish())
}

/// Serializes a framed grouped stream into bytes.
pub fn write_grouped_stream<'a>(
    elements: impl IntoIterator<Item = &'a Element>,
    framing: Framing,
) -> Result<Vec<u8>, WriteError> {
    let mut out = Vec::new();
    write_framed_stream(&mut out, elements, framing)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{graph_from_triples, Dataset, Graph};

    fn t(n: u32) -> Triple {
        Triple::new(
            Term::iri(format!("http://e/{n}")).unwrap(),
            Iri::new("http://e/p").unwrap(),
            Term::Literal(Literal::string(format!("v{n}"))),
        )
        .unwrap()
    }

    #[test]
    fn canonical_terms() {
        let lit = Literal::typed("1", Iri::new("http://www.w3.org/2001/XMLSchema#integer").unwrap());
        assert_eq!(
            format_term(&lit.into()),
            "\"1\"^^<http://www.w3.org/2001/XMLSchema#integer>"
        );
        assert_eq!(format_term(&Literal::string("a\"b\\\n\r\té").into()), r#""a\"b\\\n\r\té""#);
        assert_eq!(format_term(&Literal::lang_tagged("x", "en").unwrap().into()), "\"x\"@en");
        assert_eq!(format_term(&Term::blank("b1").unwrap()), "_:b1");
        assert_eq!(format_term(&Term::iri("urn:a{b}").unwrap()), r"<urn:a\u007Bb\u007D>");
    }

    #[test]
    fn delimiters_between_elements_only() {
        let els = [Element::Graph(graph_from_triples([t(1)])), Element::Graph(graph_from_triples([t(2)]))];
        let bytes = write_grouped_stream(&els, Framing::FramedGraphs).unwrap();
        assert_eq!(
            String::from_utf8(bytes).unwrap(),
            format!("{}\n#---\n{}\n", format_triple(&t(1)), format_triple(&t(2)))
        );
    }

    #[test]
    fn empty_outputs() {
        let mut out = Vec::new();
        write_flat_stream(&mut out, &[], Framing::FlatTriples).unwrap();
        assert!(out.is_empty());
        assert!(write_grouped_stream(&[], Framing::FramedGraphs).unwrap().is_empty());
        let one_empty = [Element::Graph(Graph::new())];
        assert_eq!(write_grouped_stream(&one_empty, Framing::FramedGraphs).unwrap(), b"\n");
        let two_empty = [Element::Graph(Graph::new()), Element::Graph(Graph::new())];
        assert_eq!(write_grouped_stream(&two_empty, Framing::FramedGraphs).unwrap(), b"#---\n");
    }

    #[test]
    fn mismatched_payloads() {
        let els = [Element::Dataset(Dataset::new())];
        assert!(matches!(
            write_grouped_stream(&els, Framing::FramedGraphs),
            Err(WriteError::MixedPayload { index: 0, .. })
        ));
        let stmts = [Statement::Triple(t(1))];
        let mut out = Vec::new();
        assert!(matches!(
            write_flat_stream(&mut out, &stmts, Framing::FlatQuads),
            Err(WriteError::MixedPayload { index: 0, .. })
        ));
    }
}
