mod common;

use common::*;
use proptest::prelude::*;
use stax_kit::annotator::{emit_turtle, load_manifest, validate_usages, ManifestError};
use stax_kit::taxonomy::{default_taxonomy, infer_closure, Policy};

const CONCRETE: [&str; 7] = [
    "graphStream",
    "subjectGraphStream",
    "datasetStream",
    "namedGraphStream",
    "timestampedNamedGraphStream",
    "flatTripleStream",
    "flatQuadStream",
];

fn family(ty: &str) -> &'static str {
    match ty {
        "graphStream" | "subjectGraphStream" => "graph",
        "datasetStream" | "namedGraphStream" | "timestampedNamedGraphStream" => "dataset",
        "flatTripleStream" => "triple",
        _ => "quad",
    }
}

/// Consistency worked out by hand: a grouped and a flat usage must be
/// linked by flattening or grouping, and two usages on the same side must
/// lie on one branch of the hierarchy.
fn consistent_by_hand(types: &[&str]) -> bool {
    let flat = |t: &str| matches!(family(t), "triple" | "quad");
    types.iter().enumerate().all(|(i, a)| {
        types[i + 1..].iter().all(|b| {
            let (fa, fb) = (family(a), family(b));
            match (flat(a), flat(b)) {
                (false, true) | (true, false) => {
                    matches!((fa, fb), ("graph", "triple") | ("triple", "graph") | ("dataset", "quad") | ("quad", "dataset"))
                }
                _ => fa == fb,
            }
        })
    })
}

fn manifest_json(types: &[&str], comments: bool) -> String {
    let usages: Vec<serde_json::Value> = types
        .iter()
        .map(|t| {
            if comments {
                serde_json::json!({"streamType": t, "comment": format!("uses {t} \"quoted\"\n")})
            } else {
                serde_json::json!({"streamType": t})
            }
        })
        .collect();
    serde_json::json!({"subjectIri": "http://example.org/ds", "usages": usages}).to_string()
}

proptest! {
    #[test]
    fn consistency_matches_hand_rules(mask in 1u8..128) {
        let types: Vec<&str> = CONCRETE.iter().enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, t)| *t)
            .collect();
        let t = default_taxonomy();
        let m = load_manifest(&manifest_json(&types, false), &t).unwrap();
        let report = validate_usages(&m, &infer_closure(&t), Policy::Strict);
        prop_assert_eq!(report.consistent, consistent_by_hand(&types), "{:?}", types);
        prop_assert_eq!(report.consistent, report.violations.is_empty());
    }

    #[test]
    fn emitted_turtle_parses_with_a_reference_parser(mask in 1u8..128, comments in any::<bool>()) {
        let types: Vec<&str> = CONCRETE.iter().enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, t)| *t)
            .collect();
        let t = default_taxonomy();
        let m = load_manifest(&manifest_json(&types, comments), &t).unwrap();
        let triples = parse_turtle(&emit_turtle(&m, &t));
        let per_usage = 3 + usize::from(comments);
        prop_assert_eq!(triples.len(), 1 + types.len() * per_usage);
        for ty in &types {
            let target = format!("<https://w3id.org/stax/ontology#{ty}>");
            prop_assert!(triples.iter().any(|(_, _, o)| *o == target));
        }
        prop_assert!(triples.iter().any(|(s, _, _)| s == "<http://example.org/ds>"));
    }
}

#[test]
fn transitive_policy_accepts_more() {
    let t = default_taxonomy();
    let it = infer_closure(&t);
    let m = load_manifest(&manifest_json(&["graphStream", "flatQuadStream"], false), &t).unwrap();
    assert!(!validate_usages(&m, &it, Policy::Strict).consistent);
    assert!(validate_usages(&m, &it, Policy::Transitive).consistent);
}

#[test]
fn bad_manifests_are_rejected() {
    let t = default_taxonomy();
    let cases = [
        (r#"{"usages": []}"#, "empty"),
        (r#"{"usages": [{"streamType": "fooStream"}]}"#, "unknown"),
        (r#"{"usages": [{"streamType": "rdfStream"}]}"#, "abstract"),
        (r#"{"usages": [{"streamType": "graphStream"}, {"streamType": "graphStream"}]}"#, "duplicate"),
        (r#"{"subjectIri": "not an iri", "usages": [{"streamType": "graphStream"}]}"#, "iri"),
        (r#"{"usages": [{"streamType": "graphStream", "comment": "x", "commentLanguage": "e n"}]}"#, "language"),
        (r#"{"usages": [{"streamType": "graphStream"}], "extra": 1}"#, "schema"),
    ];
    for (doc, label) in cases {
        let err = load_manifest(doc, &t).unwrap_err();
        let ok = match label {
            "empty" => matches!(err, ManifestError::EmptyUsages),
            "unknown" => matches!(err, ManifestError::UnknownStreamType(_)),
            "abstract" => matches!(err, ManifestError::NotConcrete(_)),
            "duplicate" => matches!(err, ManifestError::DuplicateUsage(_)),
            "iri" => matches!(err, ManifestError::InvalidIri(..)),
            "language" => matches!(err, ManifestError::InvalidLanguage(_)),
            _ => matches!(err, ManifestError::Schema(_)),
        };
        assert!(ok, "{label}: {err:?}");
    }
}
