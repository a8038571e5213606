use std::fs::{self, File};
use std::io::{self, BufRead, BufReader};
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::parser::{parse_statement_line, LineKind, LineMode};
use super::{ElementKind, Framing};
use crate::model::{Dataset, Element, Graph, Statement};

#[derive(Debug, Error)]
pub enum ReadError {
    #[error(transparent)]
    Parse(#[from] super::ParseError),
    #[error("line {line}: invalid UTF-8")]
    Utf8 { line: usize },
    #[error("line {line}: named-graph quad inside a graph payload")]
    MixedPayload { line: usize },
    #[error("framing {0} cannot be read this way")]
    WrongFraming(Framing),
    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        #[source]
        source: Box<ReadError>,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl ReadError {
    /// Line number of the offending input, when there is one.
    pub fn line(&self) -> Option<usize> {
        match self {
            ReadError::Parse(e) => Some(e.line),
            ReadError::Utf8 { line } | ReadError::MixedPayload { line } => Some(*line),
            ReadError::File { source, .. } => source.line(),
            _ => None,
        }
    }
}

pub type StatementReader<'a> = Box<dyn Iterator<Item = Result<Statement, ReadError>> + 'a>;
pub type ElementReader<'a> = Box<dyn Iterator<Item = Result<Element, ReadError>> + 'a>;

/// Numbered, UTF-8 checked lines with `\n` / `\r\n` stripped.
struct Lines<R> {
    reader: R,
    line_no: usize,
    buf: Vec<u8>,
}

impl<R: BufRead> Lines<R> {
    fn new(reader: R) -> Self {
        Lines {
            reader,
            line_no: 0,
            buf: Vec::new(),
        }
    }

    fn next_line(&mut self) -> Option<Result<(usize, String), ReadError>> {
        self.buf.clear();
        match self.reader.read_until(b'\n', &mut self.buf) {
            Ok(0) => return None,
            Ok(_) => {}
            Err(e) => return Some(Err(e.into())),
        }
        self.line_no += 1;
        if self.buf.last() == Some(&b'\n') {
            self.buf.pop();
            if self.buf.last() == Some(&b'\r') {
                self.buf.pop();
            }
        }
        let line = self.line_no;
        Some(
            String::from_utf8(std::mem::take(&mut self.buf))
                .map(|s| (line, s))
                .map_err(|_| ReadError::Utf8 { line }),
        )
    }
}

/// Statements of a flat N-Triples / N-Quads stream, in file order.
pub struct FlatReader<R> {
    lines: Lines<R>,
    mode: LineMode,
    done: bool,
}

pub fn read_flat_stream<R: BufRead>(reader: R, framing: Framing) -> Result<FlatReader<R>, ReadError> {
    if !framing.is_flat() {
        return Err(ReadError::WrongFraming(framing));
    }
    Ok(FlatReader {
        lines: Lines::new(reader),
        mode: framing.line_mode(),
        done: false,
    })
}

impl<R: BufRead> Iterator for FlatReader<R> {
    type Item = Result<Statement, ReadError>;

    fn next(&mut self) -> Option<Self::Item> {
        while !self.done {
            let parsed = self.lines.next_line().map(|r| {
                r.and_then(|(n, line)| parse_statement_line(&line, self.mode, n).map_err(Into::into))
            });
            match parsed {
                None => self.done = true,
                Some(Err(e)) => {
                    self.done = true;
                    return Some(Err(e));
                }
                Some(Ok(p)) => {
                    if let LineKind::Statement(s) = p.kind {
                        return Some(Ok(s));
                    }
                }
            }
        }
        None
    }
}

/// Accumulates one grouped element from payload lines.
struct ElementBuilder {
    kind: ElementKind,
    graph: Graph,
    dataset: Dataset,
}

impl ElementBuilder {
    fn new(kind: ElementKind) -> Self {
        ElementBuilder {
            kind,
            graph: Graph::new(),
            dataset: Dataset::new(),
        }
    }

    fn push(&mut self, statement: Statement, line: usize) -> Result<(), ReadError> {
        let Statement::Quad(quad) = statement else {
            unreachable!("grouped payloads are parsed in quads mode")
        };
        match self.kind {
            ElementKind::Graph => {
                if quad.graph().is_some() {
                    return Err(ReadError::MixedPayload { line });
                }
                self.graph.insert(quad.into_parts().0);
            }
            _ => {
                self.dataset.insert(quad);
            }
        }
        Ok(())
    }

    fn take(&mut self) -> Element {
        match self.kind {
            ElementKind::Graph => Element::Graph(std::mem::take(&mut self.graph)),
            _ => Element::Dataset(std::mem::take(&mut self.dataset)),
        }
    }
}

/// Elements of a `#---`-delimited file. A source with no lines at all is
/// an empty stream; otherwise there is one more element than delimiters.
pub struct FramedReader<R> {
    lines: Lines<R>,
    builder: ElementBuilder,
    seen_line: bool,
    done: bool,
}

pub fn read_framed_stream<R: BufRead>(
    reader: R,
    framing: Framing,
) -> Result<FramedReader<R>, ReadError> {
    if framing.is_flat() {
        return Err(ReadError::WrongFraming(framing));
    }
    Ok(FramedReader {
        lines: Lines::new(reader),
        builder: ElementBuilder::new(framing.element_kind()),
        seen_line: false,
        done: false,
    })
}

impl<R: BufRead> Iterator for FramedReader<R> {
    type Item = Result<Element, ReadError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        loop {
            let (n, line) = match self.lines.next_line() {
                None => {
                    self.done = true;
                    return self.seen_line.then(|| Ok(self.builder.take()));
                }
                Some(Err(e)) => {
                    self.done = true;
                    return Some(Err(e));
                }
                Some(Ok(l)) => l,
            };
            self.seen_line = true;
            let step = parse_statement_line(&line, LineMode::Quads, n)
                .map_err(ReadError::from)
                .and_then(|p| match p.kind {
                    LineKind::FrameDelimiter => Ok(true),
                    LineKind::Statement(s) => self.builder.push(s, n).map(|_| false),
                    LineKind::Comment | LineKind::Blank => Ok(false),
                });
            match step {
                Ok(true) => return Some(Ok(self.builder.take())),
                Ok(false) => {}
                Err(e) => {
                    self.done = true;
                    return Some(Err(e));
                }
            }
        }
    }
}

/// One element per `.nt`/`.nq` file, in byte-wise filename order.
pub struct DirReader {
    files: std::vec::IntoIter<PathBuf>,
    kind: ElementKind,
    done: bool,
}

pub fn read_dir_stream(dir: &Path, framing: Framing) -> Result<DirReader, ReadError> {
    if framing.is_flat() {
        return Err(ReadError::WrongFraming(framing));
    }
    let mut files = Vec::new();
    for entry in fs::read_dir(dir)? {
        let entry = entry?;
        let path = entry.path();
        let is_payload = matches!(
            path.extension().and_then(|e| e.to_str()),
            Some("nt" | "nq")
        );
        if is_payload && entry.file_type()?.is_file() {
            files.push(path);
        }
    }
    files.sort_by(|a, b| {
        let name = |p: &PathBuf| p.file_name().map(|n| n.as_encoded_bytes().to_vec());
        name(a).cmp(&name(b))
    });
    Ok(DirReader {
        files: files.into_iter(),
        kind: framing.element_kind(),
        done: false,
    })
}

fn read_element_file(path: &Path, kind: ElementKind) -> Result<Element, ReadError> {
    let mut lines = Lines::new(BufReader::new(File::open(path)?));
    let mut builder = ElementBuilder::new(kind);
    while let Some(l) = lines.next_line() {
        let (n, line) = l?;
        if let LineKind::Statement(s) = parse_statement_line(&line, LineMode::Quads, n)?.kind {
            builder.push(s, n)?;
        }
    }
    Ok(builder.take())
}

impl Iterator for DirReader {
    type Item = Result<Element, ReadError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let path = self.files.next()?;
        let result = read_element_file(&path, self.kind).map_err(|e| ReadError::File {
            path,
            source: Box::new(e),
        });
        self.done = result.is_err();
        Some(result)
    }
}

fn open_input(path: &Path) -> Result<Box<dyn BufRead>, ReadError> {
    if path.as_os_str() == "-" {
        Ok(Box::new(BufReader::new(io::stdin())))
    } else {
        Ok(Box::new(BufReader::new(File::open(path)?)))
    }
}

/// Opens a flat stream file; `-` is standard input.
pub fn open_flat(path: &Path, framing: Framing) -> Result<StatementReader<'static>, ReadError> {
    Ok(Box::new(read_flat_stream(open_input(path)?, framing)?))
}

/// Opens a grouped stream: a framed file (`-` for standard input) or a
/// directory of element files.
pub fn open_grouped(path: &Path, framing: Framing) -> Result<ElementReader<'static>, ReadError> {
    if framing.is_directory() {
        Ok(Box::new(read_dir_stream(path, framing)?))
    } else {
        Ok(Box::new(read_framed_stream(open_input(path)?, framing)?))
    }
}
