//! Stream type usage annotations: manifest loading, consistency checks,
//! cross-checks against data, and Turtle output.

use std::collections::BTreeSet;
use std::fmt::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::{ClassificationReport, FirstViolation};
use crate::model::{Iri, Literal};
use crate::taxonomy::{
    InferredTaxonomy, Policy, Relation, Taxonomy, FLAT_STREAM, GROUPED_STREAM, STAX_NS,
};

pub const DCAT_NS: &str = "http://www.w3.org/ns/dcat#";
pub const RDFS_NS: &str = "http://www.w3.org/2000/01/rdf-schema#";
pub const DCAT_DATASET: &str = "http://www.w3.org/ns/dcat#Dataset";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ManifestError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("unknown stream type {0:?}")]
    UnknownStreamType(String),
    #[error("manifest declares no usages")]
    EmptyUsages,
    #[error("stream type {0:?} is declared more than once")]
    DuplicateUsage(String),
    #[error("{0:?} is an abstract stream type; usages must name a concrete type")]
    NotConcrete(String),
    #[error("invalid IRI {0:?}")]
    InvalidIri(String),
    #[error("invalid language tag {0:?}")]
    InvalidLanguage(String),
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct RawManifest {
    subject_iri: Option<String>,
    subject_class: Option<String>,
    usages: Vec<RawUsage>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct RawUsage {
    stream_type: String,
    comment: Option<String>,
    comment_language: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamTypeUsage {
    pub stream_type: String,
    pub comment: Option<Literal>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationManifest {
    pub subject_iri: Option<Iri>,
    pub subject_class: Iri,
    pub usages: Vec<StreamTypeUsage>,
}

pub fn load_manifest(document: &str, taxonomy: &Taxonomy) -> Result<AnnotationManifest, ManifestError> {
    let raw: RawManifest =
        serde_json::from_str(document).map_err(|e| ManifestError::Schema(e.to_string()))?;
    let iri = |s: String| Iri::new(s.clone()).map_err(|_| ManifestError::InvalidIri(s));
    let subject_iri = raw.subject_iri.map(iri).transpose()?;
    let subject_class = iri(raw.subject_class.unwrap_or_else(|| DCAT_DATASET.to_owned()))?;
    if raw.usages.is_empty() {
        return Err(ManifestError::EmptyUsages);
    }
    let mut seen = BTreeSet::new();
    let mut usages = Vec::with_capacity(raw.usages.len());
    for u in raw.usages {
        let ty = taxonomy
            .get(&u.stream_type)
            .ok_or_else(|| ManifestError::UnknownStreamType(u.stream_type.clone()))?;
        if !ty.is_concrete() {
            return Err(ManifestError::NotConcrete(u.stream_type));
        }
        if !seen.insert(u.stream_type.clone()) {
            return Err(ManifestError::DuplicateUsage(u.stream_type));
        }
        let lang = u.comment_language.unwrap_or_else(|| "en".to_owned());
        let comment = u
            .comment
            .map(|c| Literal::lang_tagged(c, lang.clone()))
            .transpose()
            .map_err(|_| ManifestError::InvalidLanguage(lang))?;
        usages.push(StreamTypeUsage {
            stream_type: u.stream_type,
            comment,
        });
    }
    Ok(AnnotationManifest {
        subject_iri,
        subject_class,
        usages,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Rule {
    /// A grouped and a flat usage must be convertible into one another.
    GroupedFlatPair,
    /// Usages on the same side must be broader-related.
    SameSide,
    /// A declared usage does not hold for the data.
    CrossCheck,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct UsageViolation {
    pub rule: Rule,
    pub usages: Vec<String>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CrossCheckEntry {
    pub stream_type: String,
    pub pass: bool,
    /// Conforming type the usage was reached from, when not conforming itself.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub via: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evidence: Option<FirstViolation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ValidationReport {
    pub consistent: bool,
    pub violations: Vec<UsageViolation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cross_check: Option<Vec<CrossCheckEntry>>,
}

impl ValidationReport {
    fn from_violations(violations: Vec<UsageViolation>) -> Self {
        ValidationReport {
            consistent: violations.is_empty(),
            violations,
            cross_check: None,
        }
    }

    /// Combines a consistency report with a cross-check report.
    pub fn merge(mut self, other: ValidationReport) -> Self {
        self.violations.extend(other.violations);
        self.consistent = self.violations.is_empty();
        if other.cross_check.is_some() {
            self.cross_check = other.cross_check;
        }
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{}",
            if self.consistent { "consistent" } else { "inconsistent" }
        );
        for v in &self.violations {
            let _ = writeln!(out, "  {:?} [{}]: {}", v.rule, v.usages.join(", "), v.message);
        }
        if let Some(entries) = &self.cross_check {
            let _ = writeln!(out, "cross-check:");
            for e in entries {
                let mut line = format!(
                    "  {} {}",
                    e.stream_type,
                    if e.pass { "pass" } else { "fail" }
                );
                if let Some(via) = &e.via {
                    let _ = write!(line, " (via {via})");
                }
                if let Some(ev) = &e.evidence {
                    let _ = write!(
                        line,
                        " (element {}: {}, {})",
                        ev.element_index, ev.reason, ev.detail
                    );
                }
                let _ = writeln!(out, "{line}");
            }
        }
        out
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Grouped,
    Flat,
}

fn side(it: &InferredTaxonomy, id: &str) -> Option<Side> {
    if it.is_a(id, GROUPED_STREAM) {
        Some(Side::Grouped)
    } else if it.is_a(id, FLAT_STREAM) {
        Some(Side::Flat)
    } else {
        None
    }
}

fn convertible(it: &InferredTaxonomy, grouped: &str, flat: &str, policy: Policy) -> bool {
    match policy {
        Policy::Strict => {
            it.relates(Relation::Flatten, grouped, flat).unwrap_or(false)
                || it.relates(Relation::Group, flat, grouped).unwrap_or(false)
        }
        Policy::Transitive => [(grouped, flat), (flat, grouped)].iter().any(|(a, b)| {
            matches!(it.conversion_path(a, b, Policy::Transitive), Ok(Some(_)))
        }),
    }
}

/// Checks that the declared usages describe one stream consistently.
pub fn validate_usages(
    m: &AnnotationManifest,
    it: &InferredTaxonomy,
    policy: Policy,
) -> ValidationReport {
    let ids: Vec<&str> = m.usages.iter().map(|u| u.stream_type.as_str()).collect();
    let on = |s: Side| -> Vec<&str> {
        ids.iter().copied().filter(|id| side(it, id) == Some(s)).collect()
    };
    let (grouped, flat) = (on(Side::Grouped), on(Side::Flat));
    let mut violations = Vec::new();

    for g in &grouped {
        for f in &flat {
            if !convertible(it, g, f, policy) {
                violations.push(UsageViolation {
                    rule: Rule::GroupedFlatPair,
                    usages: vec![(*g).to_owned(), (*f).to_owned()],
                    message: format!(
                        "{g} cannot be flattened into {f} and {f} cannot be grouped into {g} ({policy})"
                    ),
                });
            }
        }
    }
    for same in [&grouped, &flat] {
        for (i, a) in same.iter().enumerate() {
            for b in &same[i + 1..] {
                if !it.is_narrower(a, b) && !it.is_narrower(b, a) {
                    violations.push(UsageViolation {
                        rule: Rule::SameSide,
                        usages: vec![(*a).to_owned(), (*b).to_owned()],
                        message: format!("{a} and {b} are unrelated views of the same side"),
                    });
                }
            }
        }
    }
    ValidationReport::from_violations(violations)
}

/// Checks each declared usage against a classification of the actual data.
pub fn cross_check(
    m: &AnnotationManifest,
    it: &InferredTaxonomy,
    report: &ClassificationReport,
) -> ValidationReport {
    let mut entries = Vec::new();
    let mut violations = Vec::new();
    for u in &m.usages {
        let declared = u.stream_type.as_str();
        let direct = report.conforms_to(declared);
        let via = if direct {
            None
        } else {
            report
                .conforming
                .iter()
                .find(|c| {
                    [Relation::Flatten, Relation::Group]
                        .iter()
                        .any(|&r| it.relates(r, c, declared).unwrap_or(false))
                })
                .cloned()
        };
        let pass = direct || via.is_some();
        let evidence = if pass {
            None
        } else {
            report.first_violation.get(declared).cloned()
        };
        if !pass {
            let message = match &evidence {
                Some(ev) => format!(
                    "data does not conform: element {}: {} ({})",
                    ev.element_index, ev.reason, ev.detail
                ),
                None => format!(
                    "no conforming type of the {} data converts into {declared}",
                    report.framing
                ),
            };
            violations.push(UsageViolation {
                rule: Rule::CrossCheck,
                usages: vec![declared.to_owned()],
                message,
            });
        }
        entries.push(CrossCheckEntry {
            stream_type: declared.to_owned(),
            pass,
            via,
            evidence,
        });
    }
    let mut out = ValidationReport::from_violations(violations);
    out.cross_check = Some(entries);
    out
}

fn is_simple_local(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

fn iri_ref(iri: &str) -> String {
    for (prefix, ns) in [("dcat", DCAT_NS), ("rdfs", RDFS_NS), ("stax", STAX_NS)] {
        if let Some(local) = iri.strip_prefix(ns) {
            if is_simple_local(local) {
                return format!("{prefix}:{local}");
            }
        }
    }
    format!("<{}>", escape_iri(iri))
}

fn escape_iri(iri: &str) -> String {
    let mut out = String::with_capacity(iri.len());
    for c in iri.chars() {
        if crate::io::is_forbidden_in_iri(c) {
            let _ = write!(out, "\\u{:04X}", c as u32);
        } else {
            out.push(c);
        }
    }
    out
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Renders the manifest as Turtle, one bracketed usage node per usage.
pub fn emit_turtle(m: &AnnotationManifest, taxonomy: &Taxonomy) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "@prefix dcat: <{DCAT_NS}> .");
    let _ = writeln!(out, "@prefix rdfs: <{RDFS_NS}> .");
    let _ = writeln!(out, "@prefix stax: <{STAX_NS}> .");
    let _ = writeln!(out);
    let subject = match &m.subject_iri {
        Some(iri) => format!("<{}>", escape_iri(iri.as_str())),
        None => "_:dataset".to_owned(),
    };
    let _ = writeln!(out, "{subject} a {} ;", iri_ref(m.subject_class.as_str()));
    let _ = write!(out, "  stax:hasStreamTypeUsage [");
    for (i, u) in m.usages.iter().enumerate() {
        if i > 0 {
            let _ = write!(out, " , [");
        }
        let type_iri = taxonomy
            .get(&u.stream_type)
            .map_or_else(|| format!("{STAX_NS}{}", u.stream_type), |t| t.iri.clone());
        let _ = writeln!(out);
        let _ = writeln!(out, "    a stax:RdfStreamTypeUsage ;");
        match &u.comment {
            None => {
                let _ = writeln!(out, "    stax:hasStreamType {}", iri_ref(&type_iri));
            }
            Some(c) => {
                let _ = writeln!(out, "    stax:hasStreamType {} ;", iri_ref(&type_iri));
                let _ = writeln!(
                    out,
                    "    rdfs:comment {}@{}",
                    quote(c.lexical()),
                    c.language().unwrap_or("en")
                );
            }
        }
        let _ = write!(out, "  ]");
    }
    let _ = writeln!(out, " .");
    out
}
