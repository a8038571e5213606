//! Shared generators and brute-force oracles for the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::path::PathBuf;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stax_kit::model::{
    BlankNode, Dataset, Graph, Iri, Literal, Quad, RdfStream, Term, Triple,
};
use stax_kit::taxonomy::{
    DATASET_STREAM, FLAT_QUAD_STREAM, FLAT_TRIPLE_STREAM, GRAPH_STREAM, NAMED_GRAPH_STREAM,
    SUBJECT_GRAPH_STREAM, TIMESTAMPED_NAMED_GRAPH_STREAM,
};

pub const EX: &str = "http://example.org/";
pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";
pub const PROV_TIME: &str = "http://www.w3.org/ns/prov#generatedAtTime";

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn iri(local: &str) -> Term {
    Term::iri(format!("{EX}{local}")).unwrap()
}

pub fn pred(local: &str) -> Iri {
    Iri::new(format!("{EX}{local}")).unwrap()
}

pub fn triple(s: Term, p: &str, o: Term) -> Triple {
    Triple::new(s, pred(p), o).unwrap()
}

pub fn typed(lex: &str, dt: &str) -> Term {
    Literal::typed(lex, Iri::new(format!("{XSD}{dt}")).unwrap()).into()
}

// ---------------------------------------------------------------------------
// Generators

fn random_literal(rng: &mut Rng) -> Term {
    match rng.random_range(0..4) {
        0 => Literal::string(format!("v{}", rng.random_range(0..5))).into(),
        1 => Literal::lang_tagged(format!("w{}", rng.random_range(0..3)), "en")
            .unwrap()
            .into(),
        2 => typed(&rng.random_range(-5..50).to_string(), "integer"),
        _ => Literal::string("tab\t\"quote\"\\ é").into(),
    }
}

fn random_node(rng: &mut Rng, pool: usize) -> Term {
    if rng.random_bool(0.15) {
        Term::BlankNode(BlankNode::new(format!("b{}", rng.random_range(0..3))).unwrap())
    } else {
        iri(&format!("n{}", rng.random_range(0..pool)))
    }
}

fn random_predicate(rng: &mut Rng) -> &'static str {
    ["p0", "p1", "p2"][rng.random_range(0..3)]
}

/// A graph with at most `max` triples, shaped to make subject detection
/// interesting: trees from one root, cycles, and unstructured edges.
pub fn random_graph(rng: &mut Rng, max: usize, roots: &mut Vec<Term>) -> Graph {
    let mut g = Graph::new();
    match rng.random_range(0..10) {
        0 => {}
        1..=5 => {
            let root = if !roots.is_empty() && rng.random_bool(0.08) {
                roots[rng.random_range(0..roots.len())].clone()
            } else if rng.random_bool(0.05) {
                Term::BlankNode(BlankNode::new("root").unwrap())
            } else {
                iri(&format!("r{}", rng.random_range(0..1000)))
            };
            roots.push(root.clone());
            let mut inner = vec![root];
            let n = rng.random_range(1..=max);
            for _ in 0..n {
                let from = inner[rng.random_range(0..inner.len())].clone();
                let to = if rng.random_bool(0.3) {
                    random_literal(rng)
                } else {
                    random_node(rng, 20)
                };
                if !to.is_literal() {
                    inner.push(to.clone());
                }
                g.insert(triple(from, random_predicate(rng), to));
            }
            // Occasional edge back to the root creates extra candidates.
            if rng.random_bool(0.04) && inner.len() > 1 {
                let from = inner[rng.random_range(1..inner.len())].clone();
                g.insert(triple(from, "back", inner[0].clone()));
            }
        }
        6 => {
            let k = rng.random_range(1..=3);
            let base = rng.random_range(0..50);
            let cycle: Vec<Term> = (0..k).map(|i| iri(&format!("c{}", base + i))).collect();
            for i in 0..k {
                g.insert(triple(cycle[i].clone(), "next", cycle[(i + 1) % k].clone()));
            }
            let extra = rng.random_range(0..(max - k).min(4));
            for _ in 0..extra {
                let from = cycle[rng.random_range(0..k)].clone();
                g.insert(triple(from, random_predicate(rng), random_literal(rng)));
            }
        }
        _ => {
            let n = rng.random_range(1..=max);
            for _ in 0..n {
                let s = random_node(rng, 8);
                let o = if rng.random_bool(0.3) {
                    random_literal(rng)
                } else {
                    random_node(rng, 8)
                };
                g.insert(triple(s, random_predicate(rng), o));
            }
        }
    }
    g
}

/// Timestamp state shared across the elements of one generated stream.
pub struct Clock {
    seconds: i64,
}

impl Clock {
    pub fn new() -> Self {
        Clock { seconds: 0 }
    }

    fn next(&mut self, rng: &mut Rng) -> Term {
        if rng.random_bool(0.1) {
            self.seconds -= rng.random_range(1..30);
        } else {
            self.seconds += rng.random_range(0..30);
        }
        let base = DateTime::parse_from_rfc3339("2024-03-01T12:00:00Z").unwrap()
            + chrono::Duration::seconds(self.seconds);
        match rng.random_range(0..20) {
            0 => {
                // Same instant written with a +02:00 offset.
                let local = base + chrono::Duration::hours(2);
                typed(&local.format("%Y-%m-%dT%H:%M:%S+02:00").to_string(), "dateTime")
            }
            1 => typed(&base.format("%Y-%m-%dT%H:%M:%S").to_string(), "dateTime"),
            2 => typed(&base.format("%Y-%m-%d").to_string(), "date"),
            3 => typed(&(self.seconds).to_string(), "integer"),
            4 => typed(&format!("{}.5", self.seconds), "decimal"),
            5 if rng.random_bool(0.3) => typed("soon", "dateTime"),
            _ => typed(&base.format("%Y-%m-%dT%H:%M:%SZ").to_string(), "dateTime"),
        }
    }
}

/// A dataset with at most `max` quads. Mostly timestamped named graphs,
/// with every way of failing the stricter definitions mixed in.
pub fn random_dataset(rng: &mut Rng, max: usize, clock: &mut Clock, index: usize) -> Dataset {
    let mut quads = Vec::new();
    let name = if rng.random_bool(0.05) {
        Term::BlankNode(BlankNode::new(format!("w{index}")).unwrap())
    } else {
        iri(&format!("window/{}", rng.random_range(0..10_000)))
    };
    let roll = rng.random_range(0..20);
    if roll == 0 {
        return Dataset::new();
    }
    let named_graphs = match roll {
        1 | 2 => 0,
        3 => 2,
        _ => 1,
    };
    let mut budget = max;
    if named_graphs == 1 && rng.random_bool(0.9) {
        let p = if rng.random_bool(0.93) {
            Iri::new(PROV_TIME).unwrap()
        } else {
            pred("time")
        };
        let subject = if rng.random_bool(0.96) {
            name.clone()
        } else {
            iri("elsewhere")
        };
        quads.push(Quad::new(subject, p.clone(), clock.next(rng), None).unwrap());
        budget -= 1;
        if rng.random_bool(0.05) && budget > 1 {
            quads.push(Quad::new(name.clone(), p, clock.next(rng), None).unwrap());
            budget -= 1;
        }
    }
    let graphs: Vec<Option<Term>> = match named_graphs {
        0 => vec![None],
        1 => vec![Some(name.clone())],
        _ => vec![Some(name.clone()), Some(iri(&format!("other/{index}")))],
    };
    let n = rng.random_range(1..=budget.max(1));
    for i in 0..n {
        let g = if i < graphs.len() {
            graphs[i].clone()
        } else if rng.random_bool(0.15) {
            None
        } else {
            graphs[rng.random_range(0..graphs.len())].clone()
        };
        let o = if rng.random_bool(0.4) {
            random_literal(rng)
        } else {
            random_node(rng, 10)
        };
        quads.push(Quad::new(random_node(rng, 10), pred(random_predicate(rng)), o, g).unwrap());
    }
    quads.truncate(max);
    quads.into_iter().collect()
}

pub fn random_flat_triples(rng: &mut Rng, len: usize) -> Vec<Triple> {
    (0..len)
        .map(|_| {
            let o = if rng.random_bool(0.3) {
                random_literal(rng)
            } else {
                random_node(rng, 10)
            };
            triple(random_node(rng, 10), random_predicate(rng), o)
        })
        .collect()
}

pub fn random_flat_quads(rng: &mut Rng, len: usize) -> Vec<Quad> {
    random_flat_triples(rng, len)
        .into_iter()
        .map(|t| {
            let g = match rng.random_range(0..3) {
                0 => None,
                1 => Some(iri(&format!("g{}", rng.random_range(0..3)))),
                _ => Some(Term::BlankNode(BlankNode::new("g").unwrap())),
            };
            Quad::from_triple(t, g).unwrap()
        })
        .collect()
}

/// `len` distinct triples, in random order.
pub fn distinct_triples(rng: &mut Rng, len: usize) -> Vec<Triple> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(len);
    while out.len() < len {
        let t = triple(
            iri(&format!("s{}", rng.random_range(0..len))),
            random_predicate(rng),
            typed(&rng.random_range(0..1_000_000).to_string(), "integer"),
        );
        if seen.insert(t.clone()) {
            out.push(t);
        }
    }
    out
}

/// A stream of at most 10 elements (or statements) of any kind.
pub fn random_stream(rng: &mut Rng) -> RdfStream {
    let len = rng.random_range(0..=10);
    match rng.random_range(0..20) {
        0 => RdfStream::Triples(random_flat_triples(rng, len)),
        1 => RdfStream::Quads(random_flat_quads(rng, len)),
        2..=10 => {
            let mut roots = Vec::new();
            RdfStream::Graphs((0..len).map(|_| random_graph(rng, 12, &mut roots)).collect())
        }
        _ => {
            let mut clock = Clock::new();
            RdfStream::Datasets(
                (0..len)
                    .map(|i| random_dataset(rng, 12, &mut clock, i))
                    .collect(),
            )
        }
    }
}

// ---------------------------------------------------------------------------
// Definition oracle

/// Nodes of a graph: subjects and objects.
fn oracle_nodes(g: &Graph) -> BTreeSet<Term> {
    g.iter()
        .flat_map(|t| [t.subject().clone(), t.object().clone()])
        .collect()
}

/// Every IRI node from which a breadth-first walk reaches all nodes.
pub fn oracle_subject_candidates(g: &Graph) -> BTreeSet<Term> {
    let nodes = oracle_nodes(g);
    let mut adjacency: HashMap<&Term, Vec<&Term>> = HashMap::new();
    for t in g.iter() {
        adjacency.entry(t.subject()).or_default().push(t.object());
    }
    nodes
        .iter()
        .filter(|n| matches!(n, Term::Iri(_)))
        .filter(|start| {
            let mut seen: HashSet<&Term> = HashSet::from([*start]);
            let mut queue = VecDeque::from([*start]);
            while let Some(v) = queue.pop_front() {
                for w in adjacency.get(v).into_iter().flatten() {
                    if seen.insert(w) {
                        queue.push_back(w);
                    }
                }
            }
            seen.len() == nodes.len()
        })
        .cloned()
        .collect()
}

/// Whether distinct subjects can be picked for all elements, by trying
/// every assignment.
pub fn injective_choice_exists(candidates: &[BTreeSet<Term>]) -> bool {
    fn go(i: usize, candidates: &[BTreeSet<Term>], used: &mut BTreeSet<Term>) -> bool {
        if i == candidates.len() {
            return true;
        }
        for c in &candidates[i] {
            if used.insert(c.clone()) {
                if go(i + 1, candidates, used) {
                    return true;
                }
                used.remove(c);
            }
        }
        false
    }
    go(0, candidates, &mut BTreeSet::new())
}

#[derive(Debug, Clone, PartialEq)]
enum OracleTime {
    Instant(i64, u32),
    Local(NaiveDateTime),
    Date(NaiveDate),
    Number(f64),
}

impl OracleTime {
    fn parse(term: &Term) -> Option<Self> {
        let Term::Literal(l) = term else { return None };
        let dt = l.datatype().as_str().strip_prefix(XSD)?;
        let lex = l.lexical();
        match dt {
            "dateTime" => {
                if let Ok(v) = DateTime::parse_from_rfc3339(lex) {
                    Some(OracleTime::Instant(v.timestamp(), v.timestamp_subsec_nanos()))
                } else {
                    NaiveDateTime::parse_from_str(lex, "%Y-%m-%dT%H:%M:%S")
                        .ok()
                        .map(OracleTime::Local)
                }
            }
            "date" => NaiveDate::parse_from_str(lex, "%Y-%m-%d").ok().map(OracleTime::Date),
            "integer" | "decimal" => lex.parse::<f64>().ok().map(OracleTime::Number),
            _ => None,
        }
    }

    /// `Some(true)` when `self` is strictly earlier than `other`.
    fn earlier(&self, other: &Self) -> Option<bool> {
        use OracleTime::*;
        match (self, other) {
            (Instant(a, an), Instant(b, bn)) => Some((a, an) < (b, bn)),
            (Local(a), Local(b)) => Some(a < b),
            (Date(a), Date(b)) => Some(a < b),
            (Number(a), Number(b)) => Some(a < b),
            _ => None,
        }
    }
}

/// Per-type verdicts computed straight from the definitions. Empty
/// elements satisfy every element-level condition.
pub fn oracle_verdicts(stream: &RdfStream, predicates: &[Iri]) -> BTreeMap<&'static str, bool> {
    let mut out = BTreeMap::new();
    match stream {
        RdfStream::Triples(_) => {
            out.insert(FLAT_TRIPLE_STREAM, true);
        }
        RdfStream::Quads(_) => {
            out.insert(FLAT_QUAD_STREAM, true);
        }
        RdfStream::Graphs(graphs) => {
            out.insert(GRAPH_STREAM, true);
            let candidates: Vec<BTreeSet<Term>> = graphs
                .iter()
                .filter(|g| !g.is_empty())
                .map(oracle_subject_candidates)
                .collect();
            out.insert(SUBJECT_GRAPH_STREAM, injective_choice_exists(&candidates));
        }
        RdfStream::Datasets(datasets) => {
            out.insert(DATASET_STREAM, true);
            let non_empty: Vec<&Dataset> = datasets.iter().filter(|d| !d.is_empty()).collect();
            let mut names = Vec::new();
            for d in &non_empty {
                let labels: BTreeSet<Term> = d.quads().filter_map(|q| q.graph().cloned()).collect();
                names.push((labels.len() == 1).then(|| labels.into_iter().next().unwrap()));
            }
            let named = names.iter().all(Option::is_some);
            out.insert(NAMED_GRAPH_STREAM, named);

            let mut stamps = Vec::new();
            let mut all_stamped = named;
            if named {
                for (d, name) in non_empty.iter().zip(&names) {
                    let name = name.as_ref().unwrap();
                    let hit = d.quads().find(|q| {
                        q.graph().is_none() && q.subject() == name && predicates.contains(q.predicate())
                    });
                    match hit {
                        Some(q) => stamps.push((q.predicate().clone(), OracleTime::parse(q.object()))),
                        None => all_stamped = false,
                    }
                }
            }
            let ordered = stamps.iter().enumerate().all(|(j, (pj, vj))| {
                stamps[..j].iter().all(|(pi, vi)| {
                    pi != pj
                        || match (vi, vj) {
                            (Some(a), Some(b)) => b.earlier(a) != Some(true),
                            _ => true,
                        }
                })
            });
            out.insert(TIMESTAMPED_NAMED_GRAPH_STREAM, all_stamped && ordered);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Turtle comparison

/// A parsed triple with blank nodes kept as labels, for isomorphism checks.
pub type LooseTriple = (String, String, String);

pub fn parse_turtle(text: &str) -> Vec<LooseTriple> {
    oxttl::TurtleParser::new()
        .for_slice(text.as_bytes())
        .map(|t| {
            let t = t.expect("valid Turtle");
            (t.subject.to_string(), t.predicate.to_string(), t.object.to_string())
        })
        .collect()
}

fn blank_labels(triples: &[LooseTriple]) -> Vec<String> {
    let mut labels: Vec<String> = triples
        .iter()
        .flat_map(|(s, _, o)| [s, o])
        .filter(|x| x.starts_with("_:"))
        .cloned()
        .collect();
    labels.sort();
    labels.dedup();
    labels
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Same triple multiset up to a renaming of blank nodes, found by trying
/// every bijection between the blank node labels.
pub fn isomorphic(a: &[LooseTriple], b: &[LooseTriple]) -> bool {
    let (la, lb) = (blank_labels(a), blank_labels(b));
    if a.len() != b.len() || la.len() != lb.len() || la.len() > 8 {
        return false;
    }
    let mut target = b.to_vec();
    target.sort();
    permutations(la.len()).into_iter().any(|perm| {
        let rename: HashMap<&String, &String> =
            la.iter().enumerate().map(|(i, l)| (l, &lb[perm[i]])).collect();
        let map = |x: &String| rename.get(x).map_or_else(|| x.clone(), |y| (*y).clone());
        let mut mapped: Vec<LooseTriple> = a
            .iter()
            .map(|(s, p, o)| (map(s), p.clone(), map(o)))
            .collect();
        mapped.sort();
        mapped == target
    })
}
