//! Checks streams against the concrete stream type definitions.
//!
//! Grouped streams are classified in a single pass. The only state that
//! grows with the stream is the registry of subject IRIs already used to
//! identify an element; timestamp ordering keeps one value per predicate
//! and value family.

mod subject;
mod timestamp;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use indexmap::IndexMap;
use serde::{Serialize, Serializer};
use thiserror::Error;

pub use subject::candidate_subject_nodes;
pub use timestamp::{Decimal, TimeFamily, TimestampValue};

use crate::io::{open_flat, open_grouped, ElementKind, Framing, ReadError};
use crate::model::{Dataset, Element, Graph, Iri, RdfStream, Statement, Term};
use crate::taxonomy::{
    InferredTaxonomy, DATASET_STREAM, FLAT_QUAD_STREAM, FLAT_TRIPLE_STREAM, GRAPH_STREAM,
    NAMED_GRAPH_STREAM, SUBJECT_GRAPH_STREAM, TIMESTAMPED_NAMED_GRAPH_STREAM,
};

pub const PROV_GENERATED_AT_TIME: &str = "http://www.w3.org/ns/prov#generatedAtTime";

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("timestamp ordering is enabled but no timestamp predicate is configured")]
    NoTimestampPredicates,
    #[error("element {index} is a {found:?}, but the stream framing is {framing}")]
    FramingMismatch {
        index: usize,
        found: ElementKind,
        framing: Framing,
    },
    #[error(transparent)]
    Read(#[from] ReadError),
}

#[derive(Debug, Clone)]
pub struct ClassifierConfig {
    pub timestamp_predicates: BTreeSet<Iri>,
    pub check_timestamp_order: bool,
    /// Cap on evidence entries kept in a report.
    pub max_evidence: usize,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            timestamp_predicates: [Iri::new(PROV_GENERATED_AT_TIME).unwrap()].into(),
            check_timestamp_order: true,
            max_evidence: 10,
        }
    }
}

impl ClassifierConfig {
    fn validate(&self) -> Result<(), ClassifyError> {
        if self.check_timestamp_order && self.timestamp_predicates.is_empty() {
            return Err(ClassifyError::NoTimestampPredicates);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Reason {
    NoSubjectNode,
    SubjectNotUnique,
    NamedGraphCount,
    MissingTimestamp,
    OrderViolation,
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Reason::NoSubjectNode => "no subject node",
            Reason::SubjectNotUnique => "subject not unique in stream",
            Reason::NamedGraphCount => "not exactly one named graph",
            Reason::MissingTimestamp => "missing timestamp triple",
            Reason::OrderViolation => "order violation",
        })
    }
}

impl Serialize for Reason {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub reason: Reason,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail(Violation),
}

impl Verdict {
    fn fail(reason: Reason, detail: impl Into<String>) -> Self {
        Verdict::Fail(Violation {
            reason,
            detail: detail.into(),
        })
    }

    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementVerdict {
    pub element_index: usize,
    pub per_type: IndexMap<&'static str, Verdict>,
    /// Choices the classifier made that another reading could make differently.
    pub ambiguities: Vec<String>,
    pub vacuous: bool,
}

/// Subject IRIs already used, with the element that first used each.
#[derive(Debug, Clone, Default)]
pub struct SubjectRegistry {
    first_use: HashMap<Iri, usize>,
}

impl SubjectRegistry {
    pub fn first_use(&self, iri: &Iri) -> Option<usize> {
        self.first_use.get(iri).copied()
    }

    pub fn len(&self) -> usize {
        self.first_use.len()
    }

    pub fn is_empty(&self) -> bool {
        self.first_use.is_empty()
    }

    fn register(&mut self, iri: Iri, element: usize) {
        self.first_use.entry(iri).or_insert(element);
    }
}

#[derive(Debug, Clone, Default)]
pub struct ClassifierState {
    pub subjects: SubjectRegistry,
    /// Greatest timestamp seen so far per predicate and value family.
    latest: HashMap<(Iri, TimeFamily), (TimestampValue, usize)>,
}

/// `(n, G)` when the dataset has exactly one named graph.
pub fn check_named_graph_shape(d: &Dataset) -> Option<(&Term, &Graph)> {
    if d.named_graph_count() != 1 {
        return None;
    }
    d.named_graphs().next()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimestampMatch<'a> {
    pub name: &'a Term,
    pub predicate: &'a Iri,
    pub timestamp: &'a Term,
    /// More than one timestamp triple was present; the first was used.
    pub ambiguous: bool,
}

pub fn check_timestamped_named_graph<'a>(
    d: &'a Dataset,
    cfg: &ClassifierConfig,
) -> Option<TimestampMatch<'a>> {
    let (name, _) = check_named_graph_shape(d)?;
    let mut hits = d
        .default_graph()
        .iter()
        .filter(|t| t.subject() == name && cfg.timestamp_predicates.contains(t.predicate()));
    let first = hits.next()?;
    Some(TimestampMatch {
        name,
        predicate: first.predicate(),
        timestamp: first.object(),
        ambiguous: hits.next().is_some(),
    })
}

fn graph_types() -> [&'static str; 2] {
    [GRAPH_STREAM, SUBJECT_GRAPH_STREAM]
}

fn dataset_types() -> [&'static str; 3] {
    [DATASET_STREAM, NAMED_GRAPH_STREAM, TIMESTAMPED_NAMED_GRAPH_STREAM]
}

/// Verdicts for one element against every built-in type of its kind,
/// updating the subject registry and timestamp state.
pub fn classify_element(
    element: &Element,
    index: usize,
    state: &mut ClassifierState,
    cfg: &ClassifierConfig,
) -> ElementVerdict {
    let mut verdict = ElementVerdict {
        element_index: index,
        per_type: IndexMap::new(),
        ambiguities: Vec::new(),
        vacuous: element.is_empty(),
    };
    match element {
        Element::Graph(g) => {
            verdict.per_type.insert(GRAPH_STREAM, Verdict::Pass);
            let subject = if g.is_empty() {
                Verdict::Pass
            } else {
                check_subject(g, index, state, &mut verdict.ambiguities)
            };
            verdict.per_type.insert(SUBJECT_GRAPH_STREAM, subject);
        }
        Element::Dataset(d) => {
            verdict.per_type.insert(DATASET_STREAM, Verdict::Pass);
            if d.is_empty() {
                verdict.per_type.insert(NAMED_GRAPH_STREAM, Verdict::Pass);
                verdict.per_type.insert(TIMESTAMPED_NAMED_GRAPH_STREAM, Verdict::Pass);
            } else {
                let shape = match check_named_graph_shape(d) {
                    Some(_) => Verdict::Pass,
                    None => Verdict::fail(
                        Reason::NamedGraphCount,
                        format!("found {} named graphs", d.named_graph_count()),
                    ),
                };
                let timestamped = if shape.passed() {
                    check_timestamp(d, index, state, cfg, &mut verdict.ambiguities)
                } else {
                    shape.clone()
                };
                verdict.per_type.insert(NAMED_GRAPH_STREAM, shape);
                verdict.per_type.insert(TIMESTAMPED_NAMED_GRAPH_STREAM, timestamped);
            }
        }
    }
    verdict
}

fn check_subject(
    g: &Graph,
    index: usize,
    state: &mut ClassifierState,
    ambiguities: &mut Vec<String>,
) -> Verdict {
    let candidates = candidate_subject_nodes(g);
    if candidates.is_empty() {
        return Verdict::fail(
            Reason::NoSubjectNode,
            "no IRI node reaches every other node",
        );
    }
    let chosen = candidates
        .iter()
        .find(|c| state.subjects.first_use(c).is_none());
    if candidates.len() > 1 {
        ambiguities.push(format!(
            "{} candidate subject nodes; chose {}",
            candidates.len(),
            chosen.map_or_else(|| "none".to_owned(), ToString::to_string)
        ));
    }
    match chosen {
        Some(c) => {
            state.subjects.register(c.clone(), index);
            Verdict::Pass
        }
        None => {
            let c = candidates.first().unwrap();
            Verdict::fail(
                Reason::SubjectNotUnique,
                format!(
                    "{c} already identifies element {}",
                    state.subjects.first_use(c).unwrap()
                ),
            )
        }
    }
}

fn check_timestamp(
    d: &Dataset,
    index: usize,
    state: &mut ClassifierState,
    cfg: &ClassifierConfig,
    ambiguities: &mut Vec<String>,
) -> Verdict {
    let Some(m) = check_timestamped_named_graph(d, cfg) else {
        let (name, _) = check_named_graph_shape(d).unwrap();
        return Verdict::fail(
            Reason::MissingTimestamp,
            format!("default graph has no timestamp triple about {}", crate::io::format_term(name)),
        );
    };
    if m.ambiguous {
        ambiguities.push(format!(
            "several timestamp triples about {}; used the first",
            crate::io::format_term(m.name)
        ));
    }
    if !cfg.check_timestamp_order {
        return Verdict::Pass;
    }
    let Some(value) = TimestampValue::from_term(m.timestamp) else {
        return Verdict::Pass;
    };
    let key = (m.predicate.clone(), value.family());
    match state.latest.get(&key) {
        Some((max, at)) if value < *max => Verdict::fail(
            Reason::OrderViolation,
            format!("timestamp {value} is earlier than {max} of element {at}"),
        ),
        Some((max, _)) if value <= *max => Verdict::Pass,
        _ => {
            state.latest.insert(key, (value, index));
            Verdict::Pass
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FirstViolation {
    pub element_index: usize,
    pub reason: Reason,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Evidence {
    pub element_index: usize,
    /// `violation` or `ambiguity`.
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stream_type: Option<String>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ClassificationReport {
    pub framing: Framing,
    pub element_count: usize,
    pub statement_count: usize,
    /// Concrete types checked for this framing.
    pub applicable: Vec<String>,
    pub conforming: Vec<String>,
    pub most_specific: Vec<String>,
    pub first_violation: IndexMap<String, FirstViolation>,
    /// The stream has no elements.
    pub vacuous: bool,
    pub empty_elements: usize,
    pub ambiguous_elements: usize,
    /// Only for flat quad streams: every quad is in the default graph.
    pub projectable_to_flat_triple_stream: Option<bool>,
    pub evidence: Vec<Evidence>,
    pub evidence_truncated: usize,
}

impl ClassificationReport {
    pub fn conforms_to(&self, type_id: &str) -> bool {
        self.conforming.iter().any(|t| t == type_id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render_text(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let _ = writeln!(out, "framing     {}", self.framing);
        let _ = writeln!(out, "elements    {}", self.element_count);
        let _ = writeln!(out, "statements  {}", self.statement_count);
        if self.vacuous {
            let _ = writeln!(out, "vacuous     true (empty stream)");
        }
        let width = self.applicable.iter().map(String::len).max().unwrap_or(0).max(4);
        let _ = writeln!(out);
        let _ = writeln!(out, "{:width$}  verdict", "type");
        for t in &self.applicable {
            let verdict = match self.first_violation.get(t) {
                None => "conforms".to_owned(),
                Some(v) => format!(
                    "fails at element {}: {} ({})",
                    v.element_index, v.reason, v.detail
                ),
            };
            let _ = writeln!(out, "{t:width$}  {verdict}");
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "most specific: {}", self.most_specific.join(", "));
        if let Some(p) = self.projectable_to_flat_triple_stream {
            let _ = writeln!(out, "projectable to flatTripleStream: {p}");
        }
        if self.ambiguous_elements > 0 {
            let _ = writeln!(out, "ambiguous elements: {}", self.ambiguous_elements);
        }
        for e in &self.evidence {
            let _ = writeln!(out, "  [{}] element {}: {}", e.kind, e.element_index, e.message);
        }
        if self.evidence_truncated > 0 {
            let _ = writeln!(out, "  ... {} more", self.evidence_truncated);
        }
        out
    }
}

/// Push-based single-pass classifier.
pub struct StreamClassifier<'a> {
    taxonomy: &'a InferredTaxonomy,
    cfg: ClassifierConfig,
    framing: Framing,
    applicable: Vec<&'static str>,
    state: ClassifierState,
    element_count: usize,
    statement_count: usize,
    first_violation: IndexMap<String, FirstViolation>,
    evidence: Vec<Evidence>,
    evidence_truncated: usize,
    empty_elements: usize,
    ambiguous_elements: usize,
    all_default_graph: bool,
}

impl<'a> StreamClassifier<'a> {
    pub fn new(
        framing: Framing,
        cfg: ClassifierConfig,
        taxonomy: &'a InferredTaxonomy,
    ) -> Result<Self, ClassifyError> {
        cfg.validate()?;
        let candidates: Vec<&'static str> = match framing.element_kind() {
            ElementKind::Triple => vec![FLAT_TRIPLE_STREAM],
            ElementKind::Quad => vec![FLAT_QUAD_STREAM],
            ElementKind::Graph => graph_types().to_vec(),
            ElementKind::Dataset => dataset_types().to_vec(),
        };
        let applicable = candidates
            .into_iter()
            .filter(|id| taxonomy.get(id).is_some())
            .collect();
        Ok(StreamClassifier {
            taxonomy,
            cfg,
            framing,
            applicable,
            state: ClassifierState::default(),
            element_count: 0,
            statement_count: 0,
            first_violation: IndexMap::new(),
            evidence: Vec::new(),
            evidence_truncated: 0,
            empty_elements: 0,
            ambiguous_elements: 0,
            all_default_graph: true,
        })
    }

    fn record(&mut self, evidence: Evidence) {
        if self.evidence.len() < self.cfg.max_evidence {
            self.evidence.push(evidence);
        } else {
            self.evidence_truncated += 1;
        }
    }

    pub fn push_statement(&mut self, statement: &Statement) -> Result<(), ClassifyError> {
        let index = self.element_count;
        let found = match statement {
            Statement::Triple(_) => ElementKind::Triple,
            Statement::Quad(q) => {
                if q.graph().is_some() {
                    self.all_default_graph = false;
                }
                ElementKind::Quad
            }
        };
        if found != self.framing.element_kind() {
            return Err(ClassifyError::FramingMismatch {
                index,
                found,
                framing: self.framing,
            });
        }
        self.element_count += 1;
        self.statement_count += 1;
        Ok(())
    }

    pub fn push_element(&mut self, element: &Element) -> Result<ElementVerdict, ClassifyError> {
        let index = self.element_count;
        let found = match element {
            Element::Graph(_) => ElementKind::Graph,
            Element::Dataset(_) => ElementKind::Dataset,
        };
        if found != self.framing.element_kind() {
            return Err(ClassifyError::FramingMismatch {
                index,
                found,
                framing: self.framing,
            });
        }
        let mut verdict = classify_element(element, index, &mut self.state, &self.cfg);
        verdict.per_type.retain(|t, _| self.applicable.contains(t));

        self.element_count += 1;
        self.statement_count += element.statement_count();
        if verdict.vacuous {
            self.empty_elements += 1;
        }
        if !verdict.ambiguities.is_empty() {
            self.ambiguous_elements += 1;
        }
        for message in verdict.ambiguities.clone() {
            self.record(Evidence {
                element_index: index,
                kind: "ambiguity",
                stream_type: None,
                message,
            });
        }
        for (t, v) in &verdict.per_type {
            if let Verdict::Fail(violation) = v {
                self.first_violation
                    .entry((*t).to_owned())
                    .or_insert_with(|| FirstViolation {
                        element_index: index,
                        reason: violation.reason,
                        detail: violation.detail.clone(),
                    });
                self.record(Evidence {
                    element_index: index,
                    kind: "violation",
                    stream_type: Some((*t).to_owned()),
                    message: format!("{}: {}", violation.reason, violation.detail),
                });
            }
        }
        Ok(verdict)
    }

    pub fn finish(mut self) -> ClassificationReport {
        let mut first_violation = IndexMap::new();
        for t in &self.applicable {
            if let Some(v) = self.first_violation.shift_remove(*t) {
                first_violation.insert((*t).to_owned(), v);
            }
        }
        let conforming: Vec<String> = self
            .applicable
            .iter()
            .filter(|t| !first_violation.contains_key(**t))
            .map(|t| (*t).to_owned())
            .collect();
        let most_specific = self
            .taxonomy
            .most_specific(conforming.iter().map(String::as_str))
            .expect("applicable types are in the taxonomy");
        ClassificationReport {
            framing: self.framing,
            element_count: self.element_count,
            statement_count: self.statement_count,
            applicable: self.applicable.iter().map(|t| (*t).to_owned()).collect(),
            conforming,
            most_specific,
            first_violation,
            vacuous: self.element_count == 0,
            empty_elements: self.empty_elements,
            ambiguous_elements: self.ambiguous_elements,
            projectable_to_flat_triple_stream: (self.framing.element_kind() == ElementKind::Quad)
                .then_some(self.all_default_graph),
            evidence: self.evidence,
            evidence_truncated: self.evidence_truncated,
        }
    }
}

/// Classifies an in-memory stream. Graph and dataset streams are treated
/// as framed.
pub fn classify_stream(
    stream: &RdfStream,
    cfg: &ClassifierConfig,
    taxonomy: &InferredTaxonomy,
) -> Result<ClassificationReport, ClassifyError> {
    let framing = match stream {
        RdfStream::Triples(_) => Framing::FlatTriples,
        RdfStream::Quads(_) => Framing::FlatQuads,
        RdfStream::Graphs(_) => Framing::FramedGraphs,
        RdfStream::Datasets(_) => Framing::FramedDatasets,
    };
    let mut c = StreamClassifier::new(framing, cfg.clone(), taxonomy)?;
    match stream {
        RdfStream::Triples(v) => {
            for t in v {
                c.push_statement(&Statement::Triple(t.clone()))?;
            }
        }
        RdfStream::Quads(v) => {
            for q in v {
                c.push_statement(&Statement::Quad(q.clone()))?;
            }
        }
        RdfStream::Graphs(v) => {
            for g in v {
                c.push_element(&Element::Graph(g.clone()))?;
            }
        }
        RdfStream::Datasets(v) => {
            for d in v {
                c.push_element(&Element::Dataset(d.clone()))?;
            }
        }
    }
    Ok(c.finish())
}

/// Streams a file (or directory, or `-`) through the classifier.
pub fn classify_path(
    path: &Path,
    framing: Framing,
    cfg: &ClassifierConfig,
    taxonomy: &InferredTaxonomy,
) -> Result<ClassificationReport, ClassifyError> {
    let mut c = StreamClassifier::new(framing, cfg.clone(), taxonomy)?;
    if framing.is_flat() {
        for s in open_flat(path, framing)? {
            c.push_statement(&s?)?;
        }
    } else {
        for e in open_grouped(path, framing)? {
            c.push_element(&e?)?;
        }
    }
    Ok(c.finish())
}
