//! Streaming readers and writers for flat and grouped RDF streams.
//!
//! Flat streams are plain N-Triples / N-Quads. Grouped streams are either
//! a single file whose elements are separated by a line reading exactly
//! `#---`, or a directory with one `.nt`/`.nq` file per element.

mod parser;
mod reader;
mod writer;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

pub(crate) use parser::is_forbidden_in_iri;
pub use parser::{parse_statement_line, LineKind, LineMode, ParseError, ParsedLine, FRAME_DELIMITER};
pub use reader::{
    open_flat, open_grouped, read_dir_stream, read_flat_stream, read_framed_stream, DirReader,
    ElementReader, FlatReader, FramedReader, ReadError, StatementReader,
};
pub use writer::{
    format_quad, DirWriter, FramedWriter, format_term, format_triple, write_dir_stream, write_flat_stream,
    write_framed_stream, write_grouped_stream, WriteError,
};

/// The kind of item a stream carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum ElementKind {
    Triple,
    Quad,
    Graph,
    Dataset,
}

impl ElementKind {
    pub fn is_flat(self) -> bool {
        matches!(self, ElementKind::Triple | ElementKind::Quad)
    }
}

/// On-disk convention that fixes where stream elements begin and end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Framing {
    #[serde(rename = "flat-triples")]
    FlatTriples,
    #[serde(rename = "flat-quads")]
    FlatQuads,
    #[serde(rename = "framed-graphs")]
    FramedGraphs,
    #[serde(rename = "framed-datasets")]
    FramedDatasets,
    #[serde(rename = "dir-graphs")]
    DirGraphs,
    #[serde(rename = "dir-datasets")]
    DirDatasets,
}

impl Framing {
    pub const ALL: [Framing; 6] = [
        Framing::FlatTriples,
        Framing::FlatQuads,
        Framing::FramedGraphs,
        Framing::FramedDatasets,
        Framing::DirGraphs,
        Framing::DirDatasets,
    ];

    pub fn element_kind(self) -> ElementKind {
        match self {
            Framing::FlatTriples => ElementKind::Triple,
            Framing::FlatQuads => ElementKind::Quad,
            Framing::FramedGraphs | Framing::DirGraphs => ElementKind::Graph,
            Framing::FramedDatasets | Framing::DirDatasets => ElementKind::Dataset,
        }
    }

    pub fn is_flat(self) -> bool {
        self.element_kind().is_flat()
    }

    pub fn is_directory(self) -> bool {
        matches!(self, Framing::DirGraphs | Framing::DirDatasets)
    }

    /// Grammar used for the payload lines.
    pub fn line_mode(self) -> LineMode {
        match self {
            Framing::FlatTriples => LineMode::Triples,
            _ => LineMode::Quads,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Framing::FlatTriples => "flat-triples",
            Framing::FlatQuads => "flat-quads",
            Framing::FramedGraphs => "framed-graphs",
            Framing::FramedDatasets => "framed-datasets",
            Framing::DirGraphs => "dir-graphs",
            Framing::DirDatasets => "dir-datasets",
        }
    }

    /// File extension for payload files.
    pub fn extension(self) -> &'static str {
        match self.element_kind() {
            ElementKind::Triple | ElementKind::Graph => "nt",
            ElementKind::Quad | ElementKind::Dataset => "nq",
        }
    }
}

impl fmt::Display for Framing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown framing {0:?} (expected one of flat-triples, flat-quads, framed-graphs, framed-datasets, dir-graphs, dir-datasets)")]
pub struct UnknownFraming(pub String);

impl FromStr for Framing {
    type Err = UnknownFraming;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Framing::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| UnknownFraming(s.to_owned()))
    }
}
