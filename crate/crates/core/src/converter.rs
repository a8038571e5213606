//! Stream conversions along the taxonomy relations: flatten, group,
//! trivial extension, and projection as the inverse of extension.
//!
//! Every primitive is a lazy iterator adapter, so file-to-file conversion
//! holds at most one element (or one batch) in memory.

use thiserror::Error;

use crate::io::{ElementKind, ReadError};
use crate::model::{Dataset, Graph, Quad, RdfStream, Triple};
use crate::taxonomy::{
    ConversionStep, InferredTaxonomy, Policy, Relation, TaxonomyError, DATASET_STREAM,
    FLAT_QUAD_STREAM, FLAT_TRIPLE_STREAM, GRAPH_STREAM,
};

#[derive(Debug, Error)]
pub enum ConvertError {
    #[error("batch size must be at least 1")]
    InvalidBatchSize,
    #[error("element {0} has content outside the default graph")]
    NamedGraphPresent(usize),
    #[error("no conversion path from {from} to {to} under the {policy} policy")]
    NoConversionPath {
        from: String,
        to: String,
        policy: Policy,
    },
    #[error("{0} is not a concrete stream type")]
    NotConcrete(String),
    #[error("stream type {0} has no known element kind")]
    NoElementKind(String),
    #[error("input holds {found:?} elements but {type_id} streams hold {expected:?} elements")]
    InputMismatch {
        type_id: String,
        expected: ElementKind,
        found: ElementKind,
    },
    #[error("cannot apply {relation} to a stream of {found:?} elements")]
    UnsupportedStep { relation: Relation, found: ElementKind },
    #[error(transparent)]
    Taxonomy(#[from] TaxonomyError),
    #[error(transparent)]
    Read(#[from] ReadError),
}

pub type Fallible<T> = Result<T, ConvertError>;

/// Concatenates the triples of each graph.
pub fn flatten_graphs<I>(elements: I) -> impl Iterator<Item = Triple>
where
    I: IntoIterator<Item = Graph>,
{
    elements.into_iter().flat_map(Graph::into_iter)
}

/// Default graph first, then named graphs in first-occurrence order.
pub fn flatten_datasets<I>(elements: I) -> impl Iterator<Item = Quad>
where
    I: IntoIterator<Item = Dataset>,
{
    elements.into_iter().flat_map(|d| d.quads().collect::<Vec<_>>())
}

/// Types that can be collected into one grouped-stream element.
pub trait Groupable: Sized {
    type Element;
    fn collect_element(batch: Vec<Self>) -> Self::Element;
}

impl Groupable for Triple {
    type Element = Graph;
    fn collect_element(batch: Vec<Self>) -> Graph {
        batch.into_iter().collect()
    }
}

impl Groupable for Quad {
    type Element = Dataset;
    fn collect_element(batch: Vec<Self>) -> Dataset {
        batch.into_iter().collect()
    }
}

/// Batches consecutive statements into elements of `batch_size`
/// statements; the last one may be smaller.
pub fn group_statements<S, I>(
    statements: I,
    batch_size: usize,
) -> Fallible<impl Iterator<Item = S::Element>>
where
    S: Groupable,
    I: IntoIterator<Item = S>,
{
    if batch_size == 0 {
        return Err(ConvertError::InvalidBatchSize);
    }
    let mut it = statements.into_iter();
    Ok(std::iter::from_fn(move || {
        let batch: Vec<S> = it.by_ref().take(batch_size).collect();
        (!batch.is_empty()).then(|| S::collect_element(batch))
    }))
}

pub fn extend_triples<I>(triples: I) -> impl Iterator<Item = Quad>
where
    I: IntoIterator<Item = Triple>,
{
    triples.into_iter().map(|t| Quad::from_triple(t, None).unwrap())
}

pub fn extend_graphs<I>(graphs: I) -> impl Iterator<Item = Dataset>
where
    I: IntoIterator<Item = Graph>,
{
    graphs.into_iter().map(Dataset::from_default_graph)
}

pub fn project_quads<I>(quads: I) -> impl Iterator<Item = Fallible<Triple>>
where
    I: IntoIterator<Item = Quad>,
{
    quads.into_iter().enumerate().map(|(i, q)| match q.into_parts() {
        (t, None) => Ok(t),
        (_, Some(_)) => Err(ConvertError::NamedGraphPresent(i)),
    })
}

pub fn project_datasets<I>(datasets: I) -> impl Iterator<Item = Fallible<Graph>>
where
    I: IntoIterator<Item = Dataset>,
{
    datasets.into_iter().enumerate().map(|(i, d)| {
        if d.named_graph_count() > 0 {
            return Err(ConvertError::NamedGraphPresent(i));
        }
        Ok(d.into_parts().0)
    })
}

/// Inverse of extension on an in-memory stream. Triple and graph streams
/// are returned unchanged.
pub fn project(stream: RdfStream) -> Fallible<RdfStream> {
    Ok(match stream {
        RdfStream::Quads(v) => RdfStream::Triples(project_quads(v).collect::<Fallible<_>>()?),
        RdfStream::Datasets(v) => {
            RdfStream::Graphs(project_datasets(v).collect::<Fallible<_>>()?)
        }
        other => other,
    })
}

/// Trivial extension of an in-memory stream. Quad and dataset streams are
/// returned unchanged.
pub fn extend(stream: RdfStream) -> RdfStream {
    match stream {
        RdfStream::Triples(v) => RdfStream::Quads(extend_triples(v).collect()),
        RdfStream::Graphs(v) => RdfStream::Datasets(extend_graphs(v).collect()),
        other => other,
    }
}

/// The element kind held by streams of `type_id`: the first of the four
/// base concrete types found among the type itself and its ancestors.
pub fn element_kind_of(it: &InferredTaxonomy, type_id: &str) -> Fallible<ElementKind> {
    let bases = [
        (GRAPH_STREAM, ElementKind::Graph),
        (DATASET_STREAM, ElementKind::Dataset),
        (FLAT_TRIPLE_STREAM, ElementKind::Triple),
        (FLAT_QUAD_STREAM, ElementKind::Quad),
    ];
    let mut lineage = vec![type_id];
    lineage.extend(it.ancestors(type_id)?);
    lineage
        .iter()
        .find_map(|t| bases.iter().find(|(b, _)| b == t).map(|(_, k)| *k))
        .ok_or_else(|| ConvertError::NoElementKind(type_id.to_owned()))
}

type Lazy<'a, T> = Box<dyn Iterator<Item = Fallible<T>> + 'a>;

/// A lazily produced stream whose items may fail.
pub enum StreamIter<'a> {
    Triples(Lazy<'a, Triple>),
    Quads(Lazy<'a, Quad>),
    Graphs(Lazy<'a, Graph>),
    Datasets(Lazy<'a, Dataset>),
}

impl<'a> StreamIter<'a> {
    pub fn kind(&self) -> ElementKind {
        match self {
            StreamIter::Triples(_) => ElementKind::Triple,
            StreamIter::Quads(_) => ElementKind::Quad,
            StreamIter::Graphs(_) => ElementKind::Graph,
            StreamIter::Datasets(_) => ElementKind::Dataset,
        }
    }

    pub fn from_stream(stream: RdfStream) -> StreamIter<'static> {
        match stream {
            RdfStream::Triples(v) => StreamIter::Triples(Box::new(v.into_iter().map(Ok))),
            RdfStream::Quads(v) => StreamIter::Quads(Box::new(v.into_iter().map(Ok))),
            RdfStream::Graphs(v) => StreamIter::Graphs(Box::new(v.into_iter().map(Ok))),
            RdfStream::Datasets(v) => StreamIter::Datasets(Box::new(v.into_iter().map(Ok))),
        }
    }

    pub fn collect_stream(self) -> Fallible<RdfStream> {
        Ok(match self {
            StreamIter::Triples(it) => RdfStream::Triples(it.collect::<Fallible<_>>()?),
            StreamIter::Quads(it) => RdfStream::Quads(it.collect::<Fallible<_>>()?),
            StreamIter::Graphs(it) => RdfStream::Graphs(it.collect::<Fallible<_>>()?),
            StreamIter::Datasets(it) => RdfStream::Datasets(it.collect::<Fallible<_>>()?),
        })
    }

    fn apply(self, relation: Relation, batch_size: usize) -> Fallible<StreamIter<'a>> {
        let found = self.kind();
        let unsupported = || ConvertError::UnsupportedStep { relation, found };
        Ok(match (relation, self) {
            (Relation::Broader, s) => s,
            (Relation::Flatten, StreamIter::Graphs(it)) => {
                StreamIter::Triples(Box::new(flat_map_ok(it, |g: Graph| g.into_iter())))
            }
            (Relation::Flatten, StreamIter::Datasets(it)) => StreamIter::Quads(Box::new(
                flat_map_ok(it, |d: Dataset| d.quads().collect::<Vec<_>>()),
            )),
            (Relation::Group, StreamIter::Triples(it)) => {
                StreamIter::Graphs(Box::new(group_ok(it, batch_size)?))
            }
            (Relation::Group, StreamIter::Quads(it)) => {
                StreamIter::Datasets(Box::new(group_ok(it, batch_size)?))
            }
            (Relation::Extend, StreamIter::Triples(it)) => StreamIter::Quads(Box::new(
                it.map(|t| t.map(|t| Quad::from_triple(t, None).unwrap())),
            )),
            (Relation::Extend, StreamIter::Graphs(it)) => {
                StreamIter::Datasets(Box::new(it.map(|g| g.map(Dataset::from_default_graph))))
            }
            _ => return Err(unsupported()),
        })
    }
}

fn flat_map_ok<'a, T, U, F, J>(it: Lazy<'a, T>, f: F) -> impl Iterator<Item = Fallible<U>> + 'a
where
    T: 'a,
    U: 'a,
    F: Fn(T) -> J + 'a,
    J: IntoIterator<Item = U>,
    J::IntoIter: 'a,
{
    it.flat_map(move |item| -> Box<dyn Iterator<Item = Fallible<U>> + 'a> {
        match item {
            Ok(x) => Box::new(f(x).into_iter().map(Ok)),
            Err(e) => Box::new(std::iter::once(Err(e))),
        }
    })
}

/// Like `group_statements`, but an error ends the current batch and is
/// passed through, after which the adapter stops.
fn group_ok<'a, S>(
    mut it: Lazy<'a, S>,
    batch_size: usize,
) -> Fallible<impl Iterator<Item = Fallible<S::Element>> + 'a>
where
    S: Groupable + 'a,
{
    if batch_size == 0 {
        return Err(ConvertError::InvalidBatchSize);
    }
    let mut pending_error = None;
    let mut done = false;
    Ok(std::iter::from_fn(move || {
        if let Some(e) = pending_error.take() {
            done = true;
            return Some(Err(e));
        }
        if done {
            return None;
        }
        let mut batch = Vec::with_capacity(batch_size.min(1024));
        while batch.len() < batch_size {
            match it.next() {
                Some(Ok(s)) => batch.push(s),
                Some(Err(e)) => {
                    pending_error = Some(e);
                    break;
                }
                None => {
                    done = true;
                    break;
                }
            }
        }
        if batch.is_empty() {
            return pending_error.take().map(|e| {
                done = true;
                Err(e)
            });
        }
        Some(Ok(S::collect_element(batch)))
    }))
}

/// Checks types and looks up the steps for a conversion.
pub fn plan_conversion(
    it: &InferredTaxonomy,
    from: &str,
    to: &str,
    policy: Policy,
) -> Fallible<Vec<ConversionStep>> {
    for id in [from, to] {
        let ty = it
            .get(id)
            .ok_or_else(|| TaxonomyError::UnknownType(id.to_owned()))?;
        if !ty.is_concrete() {
            return Err(ConvertError::NotConcrete(id.to_owned()));
        }
    }
    it.conversion_path(from, to, policy)?
        .ok_or_else(|| ConvertError::NoConversionPath {
            from: from.to_owned(),
            to: to.to_owned(),
            policy,
        })
}

/// Lazily converts `input`, a stream of type `from`, into one of type `to`.
pub fn convert_iter<'a>(
    input: StreamIter<'a>,
    from: &str,
    to: &str,
    it: &InferredTaxonomy,
    policy: Policy,
    batch_size: usize,
) -> Fallible<StreamIter<'a>> {
    let steps = plan_conversion(it, from, to, policy)?;
    let expected = element_kind_of(it, from)?;
    if input.kind() != expected {
        return Err(ConvertError::InputMismatch {
            type_id: from.to_owned(),
            expected,
            found: input.kind(),
        });
    }
    if batch_size == 0 {
        return Err(ConvertError::InvalidBatchSize);
    }
    steps
        .iter()
        .try_fold(input, |s, step| s.apply(step.relation, batch_size))
}

/// Converts an in-memory stream. `batch_size` only matters for grouping.
pub fn convert(
    input: RdfStream,
    from: &str,
    to: &str,
    it: &InferredTaxonomy,
    policy: Policy,
    batch_size: usize,
) -> Fallible<RdfStream> {
    convert_iter(StreamIter::from_stream(input), from, to, it, policy, batch_size)?
        .collect_stream()
}
