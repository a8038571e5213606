//! RDF 1.1 terms, statements, graphs and datasets.
//!
//! All values are immutable once built. Graphs and datasets keep set
//! semantics but remember first-occurrence order, so flattening and
//! serialization are deterministic.

use std::collections::BTreeSet;
use std::fmt;

use indexmap::{IndexMap, IndexSet};
use thiserror::Error;

pub const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
pub const RDF_LANG_STRING: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("malformed IRI {0:?}")]
    MalformedIri(String),
    #[error("malformed blank node label {0:?}")]
    MalformedBlankNode(String),
    #[error("malformed language tag {0:?}")]
    MalformedLanguageTag(String),
    #[error("literal used as subject")]
    LiteralSubject,
    #[error("graph label must be an IRI or blank node")]
    InvalidGraphLabel,
}

/// An absolute IRI, checked against a conservative syntactic subset.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Iri(String);

impl Iri {
    pub fn new(value: impl Into<String>) -> Result<Self, TermError> {
        let value = value.into();
        let bad = value.is_empty()
            || !value.contains(':')
            || value
                .chars()
                .any(|c| c.is_whitespace() || matches!(c, '<' | '>' | '"'));
        if bad {
            return Err(TermError::MalformedIri(value));
        }
        Ok(Iri(value))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlankNode(String);

impl BlankNode {
    /// Labels match `[A-Za-z0-9][A-Za-z0-9_.-]*` and may not end in `.`.
    pub fn new(label: impl Into<String>) -> Result<Self, TermError> {
        let label = label.into();
        let mut chars = label.chars();
        let ok = match chars.next() {
            Some(c) if c.is_ascii_alphanumeric() => {
                chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-'))
                    && !label.ends_with('.')
            }
            _ => false,
        };
        if !ok {
            return Err(TermError::MalformedBlankNode(label));
        }
        Ok(BlankNode(label))
    }

    pub fn label(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    lexical: String,
    datatype: Iri,
    language: Option<String>,
}

impl Literal {
    /// A plain `xsd:string` literal.
    pub fn string(lexical: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            datatype: Iri(XSD_STRING.to_owned()),
            language: None,
        }
    }

    pub fn typed(lexical: impl Into<String>, datatype: Iri) -> Self {
        Literal {
            lexical: lexical.into(),
            datatype,
            language: None,
        }
    }

    pub fn lang_tagged(
        lexical: impl Into<String>,
        language: impl Into<String>,
    ) -> Result<Self, TermError> {
        let language = language.into();
        if !is_language_tag(&language) {
            return Err(TermError::MalformedLanguageTag(language));
        }
        Ok(Literal {
            lexical: lexical.into(),
            datatype: Iri(RDF_LANG_STRING.to_owned()),
            language: Some(language),
        })
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> &Iri {
        &self.datatype
    }

    pub fn language(&self) -> Option<&str> {
        self.language.as_deref()
    }
}

fn is_language_tag(tag: &str) -> bool {
    let mut parts = tag.split('-');
    let first_ok = parts
        .next()
        .is_some_and(|p| !p.is_empty() && p.chars().all(|c| c.is_ascii_alphabetic()));
    first_ok && parts.all(|p| !p.is_empty() && p.chars().all(|c| c.is_ascii_alphanumeric()))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Iri(Iri),
    BlankNode(BlankNode),
    Literal(Literal),
}

impl Term {
    pub fn iri(value: impl Into<String>) -> Result<Self, TermError> {
        Iri::new(value).map(Term::Iri)
    }

    pub fn blank(label: impl Into<String>) -> Result<Self, TermError> {
        BlankNode::new(label).map(Term::BlankNode)
    }

    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(iri) => Some(iri),
            _ => None,
        }
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal(_))
    }
}

impl From<Iri> for Term {
    fn from(iri: Iri) -> Self {
        Term::Iri(iri)
    }
}

impl From<BlankNode> for Term {
    fn from(b: BlankNode) -> Self {
        Term::BlankNode(b)
    }
}

impl From<Literal> for Term {
    fn from(l: Literal) -> Self {
        Term::Literal(l)
    }
}

/// Builds an IRI term, failing on anything outside the accepted IRI subset.
pub fn make_iri(value: &str) -> Result<Term, TermError> {
    Term::iri(value)
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    subject: Term,
    predicate: Iri,
    object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: Iri, object: Term) -> Result<Self, TermError> {
        if subject.is_literal() {
            return Err(TermError::LiteralSubject);
        }
        Ok(Triple {
            subject,
            predicate,
            object,
        })
    }

    pub fn subject(&self) -> &Term {
        &self.subject
    }

    pub fn predicate(&self) -> &Iri {
        &self.predicate
    }

    pub fn object(&self) -> &Term {
        &self.object
    }

    pub fn in_graph(self, graph: Option<Term>) -> Result<Quad, TermError> {
        Quad::from_triple(self, graph)
    }
}

/// A triple plus an optional graph label; `None` is the default graph.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Quad {
    triple: Triple,
    graph: Option<Term>,
}

impl Quad {
    pub fn new(
        subject: Term,
        predicate: Iri,
        object: Term,
        graph: Option<Term>,
    ) -> Result<Self, TermError> {
        Quad::from_triple(Triple::new(subject, predicate, object)?, graph)
    }

    pub fn from_triple(triple: Triple, graph: Option<Term>) -> Result<Self, TermError> {
        if graph.as_ref().is_some_and(Term::is_literal) {
            return Err(TermError::InvalidGraphLabel);
        }
        Ok(Quad { triple, graph })
    }

    pub fn subject(&self) -> &Term {
        &self.triple.subject
    }

    pub fn predicate(&self) -> &Iri {
        &self.triple.predicate
    }

    pub fn object(&self) -> &Term {
        &self.triple.object
    }

    pub fn graph(&self) -> Option<&Term> {
        self.graph.as_ref()
    }

    pub fn triple(&self) -> &Triple {
        &self.triple
    }

    pub fn into_parts(self) -> (Triple, Option<Term>) {
        (self.triple, self.graph)
    }
}

/// A flat-stream element.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Statement {
    Triple(Triple),
    Quad(Quad),
}

/// A set of triples that keeps first-occurrence order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Graph {
    triples: IndexSet<Triple>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns `false` if the triple was already present.
    pub fn insert(&mut self, triple: Triple) -> bool {
        self.triples.insert(triple)
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.triples.contains(triple)
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &Triple> + '_ {
        self.triples.iter()
    }

    /// Subjects and objects. Predicates only count when they also occur
    /// in one of those positions.
    pub fn nodes(&self) -> BTreeSet<&Term> {
        self.triples
            .iter()
            .flat_map(|t| [&t.subject, &t.object])
            .collect()
    }
}

impl FromIterator<Triple> for Graph {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        Graph {
            triples: iter.into_iter().collect(),
        }
    }
}

impl IntoIterator for Graph {
    type Item = Triple;
    type IntoIter = indexmap::set::IntoIter<Triple>;

    fn into_iter(self) -> Self::IntoIter {
        self.triples.into_iter()
    }
}

impl<'a> IntoIterator for &'a Graph {
    type Item = &'a Triple;
    type IntoIter = indexmap::set::Iter<'a, Triple>;

    fn into_iter(self) -> Self::IntoIter {
        self.triples.iter()
    }
}

pub fn graph_from_triples(triples: impl IntoIterator<Item = Triple>) -> Graph {
    triples.into_iter().collect()
}

pub fn nodes_of(graph: &Graph) -> BTreeSet<&Term> {
    graph.nodes()
}

/// A default graph plus named graphs in first-occurrence order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dataset {
    default_graph: Graph,
    named: IndexMap<Term, Graph>,
}

impl Dataset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_default_graph(graph: Graph) -> Self {
        Dataset {
            default_graph: graph,
            named: IndexMap::new(),
        }
    }

    pub fn insert(&mut self, quad: Quad) -> bool {
        let (triple, graph) = quad.into_parts();
        match graph {
            None => self.default_graph.insert(triple),
            Some(name) => self.named.entry(name).or_default().insert(triple),
        }
    }

    /// Adds an (possibly empty) named graph, merging into an existing one.
    pub fn insert_graph(&mut self, name: Term, graph: Graph) -> Result<(), TermError> {
        if name.is_literal() {
            return Err(TermError::InvalidGraphLabel);
        }
        let target = self.named.entry(name).or_default();
        for t in graph {
            target.insert(t);
        }
        Ok(())
    }

    pub fn default_graph(&self) -> &Graph {
        &self.default_graph
    }

    pub fn named_graphs(&self) -> impl ExactSizeIterator<Item = (&Term, &Graph)> + '_ {
        self.named.iter()
    }

    pub fn named_graph(&self, name: &Term) -> Option<&Graph> {
        self.named.get(name)
    }

    pub fn named_graph_count(&self) -> usize {
        self.named.len()
    }

    pub fn statement_count(&self) -> usize {
        self.default_graph.len() + self.named.values().map(Graph::len).sum::<usize>()
    }

    /// No statements and no named graphs at all.
    pub fn is_empty(&self) -> bool {
        self.default_graph.is_empty() && self.named.is_empty()
    }

    /// Default graph first, then named graphs in first-occurrence order.
    pub fn quads(&self) -> impl Iterator<Item = Quad> + '_ {
        let default = self
            .default_graph
            .iter()
            .map(|t| Quad { triple: t.clone(), graph: None });
        let named = self.named.iter().flat_map(|(name, g)| {
            g.iter().map(move |t| Quad {
                triple: t.clone(),
                graph: Some(name.clone()),
            })
        });
        default.chain(named)
    }

    pub fn into_parts(self) -> (Graph, IndexMap<Term, Graph>) {
        (self.default_graph, self.named)
    }
}

impl FromIterator<Quad> for Dataset {
    fn from_iter<I: IntoIterator<Item = Quad>>(iter: I) -> Self {
        let mut d = Dataset::new();
        for q in iter {
            d.insert(q);
        }
        d
    }
}

pub fn dataset_from_quads(quads: impl IntoIterator<Item = Quad>) -> Dataset {
    quads.into_iter().collect()
}

/// A grouped-stream element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Element {
    Graph(Graph),
    Dataset(Dataset),
}

impl Element {
    pub fn statement_count(&self) -> usize {
        match self {
            Element::Graph(g) => g.len(),
            Element::Dataset(d) => d.statement_count(),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            Element::Graph(g) => g.is_empty(),
            Element::Dataset(d) => d.is_empty(),
        }
    }
}

/// A whole in-memory stream of one element kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RdfStream {
    Triples(Vec<Triple>),
    Quads(Vec<Quad>),
    Graphs(Vec<Graph>),
    Datasets(Vec<Dataset>),
}

impl RdfStream {
    /// Number of stream elements (statements for flat streams).
    pub fn len(&self) -> usize {
        match self {
            RdfStream::Triples(v) => v.len(),
            RdfStream::Quads(v) => v.len(),
            RdfStream::Graphs(v) => v.len(),
            RdfStream::Datasets(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn statement_count(&self) -> usize {
        match self {
            RdfStream::Triples(v) => v.len(),
            RdfStream::Quads(v) => v.len(),
            RdfStream::Graphs(v) => v.iter().map(Graph::len).sum(),
            RdfStream::Datasets(v) => v.iter().map(Dataset::statement_count).sum(),
        }
    }

    pub fn statements(&self) -> Option<Vec<Statement>> {
        match self {
            RdfStream::Triples(v) => Some(v.iter().cloned().map(Statement::Triple).collect()),
            RdfStream::Quads(v) => Some(v.iter().cloned().map(Statement::Quad).collect()),
            _ => None,
        }
    }

    pub fn elements(&self) -> Option<Vec<Element>> {
        match self {
            RdfStream::Graphs(v) => Some(v.iter().cloned().map(Element::Graph).collect()),
            RdfStream::Datasets(v) => Some(v.iter().cloned().map(Element::Dataset).collect()),
            _ => None,
        }
    }
}
