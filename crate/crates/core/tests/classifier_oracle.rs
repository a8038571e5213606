mod common;

use common::*;
use proptest::prelude::*;
use stax_kit::classifier::{classify_path, classify_stream, ClassifierConfig, Reason};
use stax_kit::io::{write_flat_stream, write_grouped_stream, Framing};
use stax_kit::model::{Dataset, Graph, Iri, Quad, RdfStream, Term, Triple};
use stax_kit::taxonomy::{
    default_taxonomy, infer_closure, InferredTaxonomy, DATASET_STREAM, GRAPH_STREAM,
    NAMED_GRAPH_STREAM, SUBJECT_GRAPH_STREAM, TIMESTAMPED_NAMED_GRAPH_STREAM,
};

fn taxonomy() -> InferredTaxonomy {
    infer_closure(&default_taxonomy())
}

fn framing_of(stream: &RdfStream) -> Framing {
    match stream {
        RdfStream::Triples(_) => Framing::FlatTriples,
        RdfStream::Quads(_) => Framing::FlatQuads,
        RdfStream::Graphs(_) => Framing::FramedGraphs,
        RdfStream::Datasets(_) => Framing::FramedDatasets,
    }
}

fn stamped(window: &str, time: &str) -> Dataset {
    let name = iri(window);
    let stamp = Triple::new(name.clone(), Iri::new(PROV_TIME).unwrap(), typed(time, "dateTime"));
    [
        Quad::from_triple(stamp.unwrap(), None).unwrap(),
        Quad::new(iri("s"), pred("p"), iri("o"), Some(name)).unwrap(),
    ]
    .into_iter()
    .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn verdicts_follow_the_definitions(seed in any::<u64>()) {
        let it = taxonomy();
        let stream = random_stream(&mut rng(seed));
        let report = classify_stream(&stream, &ClassifierConfig::default(), &it).unwrap();
        let oracle = oracle_verdicts(&stream, &[Iri::new(PROV_TIME).unwrap()]);
        for (ty, want) in oracle {
            let got = report.conforms_to(ty);
            if ty == SUBJECT_GRAPH_STREAM && want && !got {
                prop_assert!(report.ambiguous_elements > 0, "unflagged greedy miss");
            } else {
                prop_assert_eq!(got, want, "{}", ty);
            }
        }
    }

    #[test]
    fn file_and_memory_reports_agree(seed in any::<u64>()) {
        let it = taxonomy();
        let stream = random_stream(&mut rng(seed));
        let framing = framing_of(&stream);
        let bytes = match stream.elements() {
            Some(elements) => write_grouped_stream(&elements, framing).unwrap(),
            None => {
                let mut buf = Vec::new();
                write_flat_stream(&mut buf, &stream.statements().unwrap(), framing).unwrap();
                buf
            }
        };
        let file = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(file.path(), bytes).unwrap();
        let cfg = ClassifierConfig::default();
        let from_file = classify_path(file.path(), framing, &cfg, &it).unwrap();
        let in_memory = classify_stream(&stream, &cfg, &it).unwrap();
        prop_assert_eq!(from_file.to_json(), in_memory.to_json());
    }
}

#[test]
fn greedy_choice_misses_a_valid_assignment_and_says_so() {
    // Element 0 can be identified by a or b, element 1 only by a. The
    // lexicographic pick takes a for element 0 and strands element 1.
    let cycle: Graph = [triple(iri("a"), "p", iri("b")), triple(iri("b"), "p", iri("a"))]
        .into_iter()
        .collect();
    let star: Graph = [triple(iri("a"), "q", iri("c"))].into_iter().collect();
    let stream = RdfStream::Graphs(vec![cycle, star]);

    let oracle = oracle_verdicts(&stream, &[]);
    assert!(oracle[SUBJECT_GRAPH_STREAM]);

    let report = classify_stream(&stream, &ClassifierConfig::default(), &taxonomy()).unwrap();
    assert!(!report.conforms_to(SUBJECT_GRAPH_STREAM));
    assert_eq!(report.ambiguous_elements, 1);
    let first = &report.first_violation[SUBJECT_GRAPH_STREAM];
    assert_eq!((first.element_index, first.reason), (1, Reason::SubjectNotUnique));
    assert!(report
        .evidence
        .iter()
        .any(|e| e.kind == "ambiguity" && e.element_index == 0));
    assert_eq!(report.most_specific, [GRAPH_STREAM]);
}

#[test]
fn blank_nodes_never_identify_an_element() {
    let g: Graph = [triple(Term::blank("r").unwrap(), "p", iri("o"))]
        .into_iter()
        .collect();
    let report =
        classify_stream(&RdfStream::Graphs(vec![g]), &ClassifierConfig::default(), &taxonomy())
            .unwrap();
    assert_eq!(report.first_violation[SUBJECT_GRAPH_STREAM].reason, Reason::NoSubjectNode);
}

#[test]
fn order_check_can_be_disabled() {
    let stream = RdfStream::Datasets(vec![
        stamped("w1", "2024-01-01T00:00:10Z"),
        stamped("w2", "2024-01-01T00:00:05Z"),
    ]);
    let it = taxonomy();
    let strict = classify_stream(&stream, &ClassifierConfig::default(), &it).unwrap();
    assert_eq!(strict.first_violation[TIMESTAMPED_NAMED_GRAPH_STREAM].reason, Reason::OrderViolation);

    let relaxed = ClassifierConfig {
        check_timestamp_order: false,
        ..ClassifierConfig::default()
    };
    let report = classify_stream(&stream, &relaxed, &it).unwrap();
    assert_eq!(report.most_specific, [TIMESTAMPED_NAMED_GRAPH_STREAM]);
}

#[test]
fn equal_timestamps_are_not_a_violation() {
    let stream = RdfStream::Datasets(vec![
        stamped("w1", "2024-01-01T01:00:00+01:00"),
        stamped("w2", "2024-01-01T00:00:00Z"),
    ]);
    let report = classify_stream(&stream, &ClassifierConfig::default(), &taxonomy()).unwrap();
    assert!(report.conforms_to(TIMESTAMPED_NAMED_GRAPH_STREAM));
}

#[test]
fn custom_timestamp_predicate() {
    let stream = RdfStream::Datasets(vec![stamped("w1", "2024-01-01T00:00:00Z")]);
    let it = taxonomy();
    let cfg = ClassifierConfig {
        timestamp_predicates: [pred("observedAt")].into_iter().collect(),
        ..ClassifierConfig::default()
    };
    let report = classify_stream(&stream, &cfg, &it).unwrap();
    assert_eq!(report.most_specific, [NAMED_GRAPH_STREAM]);
    assert_eq!(
        report.first_violation[TIMESTAMPED_NAMED_GRAPH_STREAM].reason,
        Reason::MissingTimestamp
    );
}

#[test]
fn two_named_graphs_break_the_named_graph_shape() {
    let d: Dataset = [
        Quad::new(iri("s"), pred("p"), iri("o"), Some(iri("g1"))).unwrap(),
        Quad::new(iri("s"), pred("p"), iri("o"), Some(iri("g2"))).unwrap(),
    ]
    .into_iter()
    .collect();
    let report =
        classify_stream(&RdfStream::Datasets(vec![d]), &ClassifierConfig::default(), &taxonomy())
            .unwrap();
    assert_eq!(report.most_specific, [DATASET_STREAM]);
    assert_eq!(report.first_violation[NAMED_GRAPH_STREAM].reason, Reason::NamedGraphCount);
}

#[test]
fn evidence_is_capped() {
    let graphs: Vec<Graph> = (0..30)
        .map(|_| [triple(iri("same"), "p", iri("o"))].into_iter().collect())
        .collect();
    let cfg = ClassifierConfig {
        max_evidence: 5,
        ..ClassifierConfig::default()
    };
    let report = classify_stream(&RdfStream::Graphs(graphs), &cfg, &taxonomy()).unwrap();
    assert_eq!(report.evidence.len(), 5);
    assert!(report.evidence_truncated > 0);
}
