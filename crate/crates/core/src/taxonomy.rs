//! The stream type taxonomy: types, their `broader` hierarchy, the three
//! conversion relations, and the closure that lets a narrower type inherit
//! every conversion of its broader types.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::Iri;

pub const STAX_NS: &str = "https://w3id.org/stax/ontology#";

pub const RDF_STREAM: &str = "rdfStream";
pub const GROUPED_STREAM: &str = "groupedStream";
pub const FLAT_STREAM: &str = "flatStream";
pub const GRAPH_STREAM: &str = "graphStream";
pub const SUBJECT_GRAPH_STREAM: &str = "subjectGraphStream";
pub const DATASET_STREAM: &str = "datasetStream";
pub const NAMED_GRAPH_STREAM: &str = "namedGraphStream";
pub const TIMESTAMPED_NAMED_GRAPH_STREAM: &str = "timestampedNamedGraphStream";
pub const FLAT_TRIPLE_STREAM: &str = "flatTripleStream";
pub const FLAT_QUAD_STREAM: &str = "flatQuadStream";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TaxonomyError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("duplicate stream type id {0:?}")]
    DuplicateType(String),
    #[error("broader cycle: {}", .0.join(" -> "))]
    Cycle(Vec<String>),
    #[error("relation {from} {relation} {to} refers to unknown type {missing:?}")]
    DanglingReference {
        from: String,
        relation: Relation,
        to: String,
        missing: String,
    },
    #[error("invalid {relation} edge {from} -> {to}: {reason}")]
    InvalidRelation {
        from: String,
        relation: Relation,
        to: String,
        reason: String,
    },
    #[error("unknown stream type {0:?}")]
    UnknownType(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TypeKind {
    Abstract,
    Concrete,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StreamType {
    pub id: String,
    pub iri: String,
    pub kind: TypeKind,
    pub label: String,
}

impl StreamType {
    pub fn is_concrete(&self) -> bool {
        self.kind == TypeKind::Concrete
    }
}

/// Relations between stream types. Declaration order is the tie-break
/// order used by path search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    Flatten,
    Group,
    Extend,
    Broader,
}

impl Relation {
    pub const CONVERSIONS: [Relation; 3] = [Relation::Flatten, Relation::Group, Relation::Extend];
    pub const ALL: [Relation; 4] = [
        Relation::Broader,
        Relation::Flatten,
        Relation::Group,
        Relation::Extend,
    ];

    /// Ontology property local name.
    pub fn name(self) -> &'static str {
        match self {
            Relation::Broader => "broader",
            Relation::Flatten => "canBeFlattenedInto",
            Relation::Group => "canBeGroupedInto",
            Relation::Extend => "canBeTriviallyExtendedInto",
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            Relation::Broader => "broader",
            Relation::Flatten => "flatten",
            Relation::Group => "group",
            Relation::Extend => "extend",
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Relation {
    type Err = TaxonomyError;

    /// Accepts ontology names (`canBeFlattenedInto`) and short names (`flatten`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Relation::ALL
            .into_iter()
            .find(|r| r.name() == s || r.short_name() == s)
            .ok_or_else(|| TaxonomyError::Schema(format!("unknown relation {s:?}")))
    }
}

impl Serialize for Relation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    #[default]
    Strict,
    Transitive,
}

impl FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strict" => Ok(Policy::Strict),
            "transitive" => Ok(Policy::Transitive),
            other => Err(format!("unknown policy {other:?} (expected strict or transitive)")),
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Policy::Strict => "strict",
            Policy::Transitive => "transitive",
        })
    }
}

type Edges = BTreeSet<(usize, usize)>;

/// Asserted taxonomy content. Edges are stored by type index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Taxonomy {
    types: Vec<StreamType>,
    index: HashMap<String, usize>,
    edges: BTreeMap<Relation, Edges>,
}

/// Serialized taxonomy document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaxonomyManifest {
    pub types: Vec<StreamType>,
    pub relations: Vec<(String, String, String)>,
}

impl Taxonomy {
    pub fn new(
        types: Vec<StreamType>,
        relations: impl IntoIterator<Item = (String, Relation, String)>,
    ) -> Result<Self, TaxonomyError> {
        let mut index = HashMap::new();
        for (i, t) in types.iter().enumerate() {
            if t.id.is_empty() {
                return Err(TaxonomyError::Schema("empty type id".into()));
            }
            Iri::new(t.iri.as_str())
                .map_err(|e| TaxonomyError::Schema(format!("type {}: {e}", t.id)))?;
            if index.insert(t.id.clone(), i).is_some() {
                return Err(TaxonomyError::DuplicateType(t.id.clone()));
            }
        }
        let mut edges: BTreeMap<Relation, Edges> =
            Relation::ALL.into_iter().map(|r| (r, Edges::new())).collect();
        for (from, relation, to) in relations {
            let lookup = |id: &str| {
                index.get(id).copied().ok_or_else(|| TaxonomyError::DanglingReference {
                    from: from.clone(),
                    relation,
                    to: to.clone(),
                    missing: id.to_owned(),
                })
            };
            let pair = (lookup(&from)?, lookup(&to)?);
            edges.get_mut(&relation).unwrap().insert(pair);
        }
        let taxonomy = Taxonomy { types, index, edges };
        taxonomy.check_acyclic()?;
        taxonomy.check_kinds()?;
        taxonomy.check_relation_sides()?;
        Ok(taxonomy)
    }

    pub fn from_manifest(manifest: TaxonomyManifest) -> Result<Self, TaxonomyError> {
        let relations = manifest
            .relations
            .into_iter()
            .map(|(from, rel, to)| Ok((from, rel.parse::<Relation>()?, to)))
            .collect::<Result<Vec<_>, TaxonomyError>>()?;
        Taxonomy::new(manifest.types, relations)
    }

    pub fn to_manifest(&self) -> TaxonomyManifest {
        let relations = Relation::ALL
            .into_iter()
            .flat_map(|r| {
                self.edges[&r].iter().map(move |&(a, b)| {
                    (self.types[a].id.clone(), r.name().to_owned(), self.types[b].id.clone())
                })
            })
            .collect();
        TaxonomyManifest {
            types: self.types.clone(),
            relations,
        }
    }

    pub fn types(&self) -> &[StreamType] {
        &self.types
    }

    pub fn get(&self, id: &str) -> Option<&StreamType> {
        self.index.get(id).map(|&i| &self.types[i])
    }

    pub fn index_of(&self, id: &str) -> Result<usize, TaxonomyError> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| TaxonomyError::UnknownType(id.to_owned()))
    }

    pub fn asserted(&self, relation: Relation) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.edges[&relation]
            .iter()
            .map(|&(a, b)| (self.types[a].id.as_str(), self.types[b].id.as_str()))
    }

    pub fn edge_count(&self, relation: Relation) -> usize {
        self.edges[&relation].len()
    }

    fn parents(&self, child: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges[&Relation::Broader]
            .range((child, 0)..(child + 1, 0))
            .map(|&(_, p)| p)
    }

    fn check_acyclic(&self) -> Result<(), TaxonomyError> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Active,
            Done,
        }
        fn visit(
            t: &Taxonomy,
            node: usize,
            marks: &mut [Mark],
            stack: &mut Vec<usize>,
        ) -> Result<(), TaxonomyError> {
            marks[node] = Mark::Active;
            stack.push(node);
            for parent in t.parents(node) {
                match marks[parent] {
                    Mark::Active => {
                        let start = stack.iter().position(|&n| n == parent).unwrap();
                        let mut cycle: Vec<String> =
                            stack[start..].iter().map(|&n| t.types[n].id.clone()).collect();
                        cycle.push(t.types[parent].id.clone());
                        return Err(TaxonomyError::Cycle(cycle));
                    }
                    Mark::New => visit(t, parent, marks, stack)?,
                    Mark::Done => {}
                }
            }
            stack.pop();
            marks[node] = Mark::Done;
            Ok(())
        }
        let mut marks = vec![Mark::New; self.types.len()];
        for node in 0..self.types.len() {
            if marks[node] == Mark::New {
                visit(self, node, &mut marks, &mut Vec::new())?;
            }
        }
        Ok(())
    }

    fn ancestors_of(&self, node: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<usize> = self.parents(node).collect();
        while let Some(n) = stack.pop() {
            if seen.insert(n) {
                stack.extend(self.parents(n));
            }
        }
        seen
    }

    fn check_kinds(&self) -> Result<(), TaxonomyError> {
        for (i, t) in self.types.iter().enumerate() {
            if t.is_concrete()
                && !self
                    .ancestors_of(i)
                    .iter()
                    .any(|&a| self.types[a].kind == TypeKind::Abstract)
            {
                return Err(TaxonomyError::Schema(format!(
                    "concrete type {} has no abstract ancestor",
                    t.id
                )));
            }
        }
        Ok(())
    }

    /// Which top-level branch a type sits in, when the taxonomy has the
    /// standard `groupedStream` / `flatStream` roots.
    fn side(&self, node: usize) -> Option<Side> {
        let grouped = self.index.get(GROUPED_STREAM).copied();
        let flat = self.index.get(FLAT_STREAM).copied();
        let mut lineage = self.ancestors_of(node);
        lineage.insert(node);
        match (grouped, flat) {
            (Some(g), _) if lineage.contains(&g) => Some(Side::Grouped),
            (_, Some(f)) if lineage.contains(&f) => Some(Side::Flat),
            _ => None,
        }
    }

    fn check_relation_sides(&self) -> Result<(), TaxonomyError> {
        if !self.index.contains_key(GROUPED_STREAM) || !self.index.contains_key(FLAT_STREAM) {
            return Ok(());
        }
        for relation in Relation::CONVERSIONS {
            for &(a, b) in &self.edges[&relation] {
                let (sa, sb) = (self.side(a), self.side(b));
                let ok = match relation {
                    Relation::Flatten => sa == Some(Side::Grouped) && sb == Some(Side::Flat),
                    Relation::Group => sa == Some(Side::Flat) && sb == Some(Side::Grouped),
                    _ => sa.is_some() && sa == sb,
                };
                if !ok {
                    return Err(TaxonomyError::InvalidRelation {
                        from: self.types[a].id.clone(),
                        relation,
                        to: self.types[b].id.clone(),
                        reason: match relation {
                            Relation::Flatten => "must go from a grouped to a flat type",
                            Relation::Group => "must go from a flat to a grouped type",
                            _ => "must stay within the grouped or the flat branch",
                        }
                        .into(),
                    });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Grouped,
    Flat,
}

/// Parses a taxonomy manifest (JSON) and validates it.
pub fn load_taxonomy(document: &str) -> Result<Taxonomy, TaxonomyError> {
    let manifest: TaxonomyManifest =
        serde_json::from_str(document).map_err(|e| TaxonomyError::Schema(e.to_string()))?;
    Taxonomy::from_manifest(manifest)
}

/// The manifest of the built-in taxonomy.
pub const DEFAULT_TAXONOMY_JSON: &str = include_str!("../data/taxonomy.json");

pub fn default_taxonomy() -> Taxonomy {
    use Relation::*;
    use TypeKind::*;

    let ty = |id: &str, kind, label: &str| StreamType {
        id: id.to_owned(),
        iri: format!("{STAX_NS}{id}"),
        kind,
        label: label.to_owned(),
    };
    let types = vec![
        ty(RDF_STREAM, Abstract, "RDF stream"),
        ty(GROUPED_STREAM, Abstract, "grouped RDF stream"),
        ty(FLAT_STREAM, Abstract, "flat RDF stream"),
        ty(GRAPH_STREAM, Concrete, "RDF graph stream"),
        ty(SUBJECT_GRAPH_STREAM, Concrete, "RDF subject graph stream"),
        ty(DATASET_STREAM, Concrete, "RDF dataset stream"),
        ty(NAMED_GRAPH_STREAM, Concrete, "RDF named graph stream"),
        ty(TIMESTAMPED_NAMED_GRAPH_STREAM, Concrete, "timestamped RDF named graph stream"),
        ty(FLAT_TRIPLE_STREAM, Concrete, "flat RDF triple stream"),
        ty(FLAT_QUAD_STREAM, Concrete, "flat RDF quad stream"),
    ];
    let relations = [
        (GROUPED_STREAM, Broader, RDF_STREAM),
        (FLAT_STREAM, Broader, RDF_STREAM),
        (GRAPH_STREAM, Broader, GROUPED_STREAM),
        (SUBJECT_GRAPH_STREAM, Broader, GRAPH_STREAM),
        (DATASET_STREAM, Broader, GROUPED_STREAM),
        (NAMED_GRAPH_STREAM, Broader, DATASET_STREAM),
        (TIMESTAMPED_NAMED_GRAPH_STREAM, Broader, NAMED_GRAPH_STREAM),
        (FLAT_TRIPLE_STREAM, Broader, FLAT_STREAM),
        (FLAT_QUAD_STREAM, Broader, FLAT_STREAM),
        (GRAPH_STREAM, Flatten, FLAT_TRIPLE_STREAM),
        (DATASET_STREAM, Flatten, FLAT_QUAD_STREAM),
        (FLAT_TRIPLE_STREAM, Group, GRAPH_STREAM),
        (FLAT_QUAD_STREAM, Group, DATASET_STREAM),
        (GRAPH_STREAM, Extend, DATASET_STREAM),
        (FLAT_TRIPLE_STREAM, Extend, FLAT_QUAD_STREAM),
    ]
    .map(|(a, r, b)| (a.to_owned(), r, b.to_owned()));
    Taxonomy::new(types, relations).expect("built-in taxonomy is valid")
}

/// One hop of a conversion. `Broader` hops are free upcasts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConversionStep {
    pub relation: Relation,
    pub from: String,
    pub to: String,
}

/// A taxonomy together with its inferred relations.
#[derive(Debug, Clone)]
pub struct InferredTaxonomy {
    taxonomy: Taxonomy,
    broader: Edges,
    inferred: BTreeMap<Relation, Edges>,
}

/// Transitive `broader`, plus the chain `broader ∘ rel ⊑ rel` for each
/// conversion relation.
pub fn infer_closure(taxonomy: &Taxonomy) -> InferredTaxonomy {
    let n = taxonomy.types.len();
    let ancestors: Vec<BTreeSet<usize>> = (0..n).map(|i| taxonomy.ancestors_of(i)).collect();
    let broader: Edges = ancestors
        .iter()
        .enumerate()
        .flat_map(|(i, anc)| anc.iter().map(move |&a| (i, a)))
        .collect();

    // With broader already transitive, one pass over {x} ∪ ancestors(x)
    // reaches the fixpoint.
    let mut inferred = BTreeMap::new();
    for relation in Relation::CONVERSIONS {
        let asserted = &taxonomy.edges[&relation];
        let mut closed = Edges::new();
        for (x, above) in ancestors.iter().enumerate() {
            for y in std::iter::once(x).chain(above.iter().copied()) {
                closed.extend(asserted.range((y, 0)..(y + 1, 0)).map(|&(_, z)| (x, z)));
            }
        }
        inferred.insert(relation, closed);
    }
    inferred.insert(Relation::Broader, broader.clone());
    InferredTaxonomy {
        taxonomy: taxonomy.clone(),
        broader,
        inferred,
    }
}

impl InferredTaxonomy {
    pub fn taxonomy(&self) -> &Taxonomy {
        &self.taxonomy
    }

    pub fn get(&self, id: &str) -> Option<&StreamType> {
        self.taxonomy.get(id)
    }

    fn id(&self, i: usize) -> &str {
        &self.taxonomy.types[i].id
    }

    /// Membership in the inferred relation. `broader` is strict ancestry.
    pub fn relates(&self, relation: Relation, a: &str, b: &str) -> Result<bool, TaxonomyError> {
        let pair = (self.taxonomy.index_of(a)?, self.taxonomy.index_of(b)?);
        Ok(self.inferred[&relation].contains(&pair))
    }

    /// All inferred pairs of a relation, ordered by type declaration order.
    pub fn pairs(&self, relation: Relation) -> Vec<(&str, &str)> {
        self.inferred[&relation]
            .iter()
            .map(|&(a, b)| (self.id(a), self.id(b)))
            .collect()
    }

    pub fn is_narrower(&self, a: &str, b: &str) -> bool {
        self.relates(Relation::Broader, a, b).unwrap_or(false)
    }

    /// `a` is `b` or strictly narrower than `b`.
    pub fn is_a(&self, a: &str, b: &str) -> bool {
        (a == b && self.get(a).is_some()) || self.is_narrower(a, b)
    }

    pub fn ancestors(&self, id: &str) -> Result<Vec<&str>, TaxonomyError> {
        let i = self.taxonomy.index_of(id)?;
        Ok(self
            .broader
            .range((i, 0)..(i + 1, 0))
            .map(|&(_, a)| self.id(a))
            .collect())
    }

    /// Drops every type that has a strictly narrower type in the set.
    /// Output follows taxonomy declaration order.
    pub fn most_specific<'a, I>(&self, types: I) -> Result<Vec<String>, TaxonomyError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let set = types
            .into_iter()
            .map(|t| self.taxonomy.index_of(t))
            .collect::<Result<BTreeSet<usize>, _>>()?;
        Ok(set
            .iter()
            .filter(|&&t| !set.iter().any(|&u| u != t && self.broader.contains(&(u, t))))
            .map(|&t| self.id(t).to_owned())
            .collect())
    }

    /// Finds how to turn a stream of type `from` into one of type `to`.
    ///
    /// `Strict` allows a single relation step. `Transitive` searches for
    /// the path with the fewest conversion steps, where upcasts along
    /// `broader` are free; ties go to the path whose last step has the
    /// lower relation rank (flatten < group < extend < broader), then the
    /// lower target id, comparing backwards from the end.
    pub fn conversion_path(
        &self,
        from: &str,
        to: &str,
        policy: Policy,
    ) -> Result<Option<Vec<ConversionStep>>, TaxonomyError> {
        let start = self.taxonomy.index_of(from)?;
        let goal = self.taxonomy.index_of(to)?;
        if start == goal {
            return Ok(Some(Vec::new()));
        }
        let step = |relation, a: usize, b: usize| ConversionStep {
            relation,
            from: self.id(a).to_owned(),
            to: self.id(b).to_owned(),
        };
        match policy {
            Policy::Strict => Ok([Relation::Flatten, Relation::Group, Relation::Extend, Relation::Broader]
                .into_iter()
                .find(|r| self.inferred[r].contains(&(start, goal)))
                .map(|r| vec![step(r, start, goal)])),
            Policy::Transitive => Ok(self.shortest_path(start, goal).map(|hops| {
                hops.into_iter().map(|(r, a, b)| step(r, a, b)).collect()
            })),
        }
    }

    fn shortest_path(&self, start: usize, goal: usize) -> Option<Vec<(Relation, usize, usize)>> {
        #[derive(Clone)]
        struct Best {
            cost: usize,
            hops: Vec<(Relation, usize, usize)>,
        }
        impl Best {
            fn key(&self) -> (usize, usize, Vec<(Relation, usize)>) {
                (
                    self.cost,
                    self.hops.len(),
                    self.hops.iter().rev().map(|&(r, _, b)| (r, b)).collect(),
                )
            }
        }

        let n = self.taxonomy.types.len();
        let edges: Vec<(Relation, usize, usize, usize)> = Relation::ALL
            .into_iter()
            .flat_map(|r| {
                let cost = usize::from(r != Relation::Broader);
                self.inferred[&r].iter().map(move |&(a, b)| (r, a, b, cost))
            })
            .collect();
        let mut best: Vec<Option<Best>> = vec![None; n];
        best[start] = Some(Best {
            cost: 0,
            hops: Vec::new(),
        });
        // Bellman-Ford: no negative edges and broader is acyclic, so n
        // rounds suffice.
        for _ in 0..n {
            let mut changed = false;
            for &(r, a, b, cost) in &edges {
                let Some(current) = best[a].clone() else { continue };
                if b == start {
                    continue;
                }
                let mut hops = current.hops;
                hops.push((r, a, b));
                let candidate = Best {
                    cost: current.cost + cost,
                    hops,
                };
                let better = match &best[b] {
                    None => true,
                    Some(existing) => candidate.key() < existing.key(),
                };
                if better {
                    best[b] = Some(candidate);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        best[goal].take().map(|b| b.hops)
    }
}
