use std::collections::{BTreeSet, HashMap};

use crate::model::{Graph, Iri, Term};

/// IRI nodes from which every node of `graph` is reachable by following
/// triples from subject to object.
///
/// Linear time: a DFS over all nodes leaves a "mother vertex" as the root
/// of its last tree. If any node reaches everything, that one does, and
/// then the answer is exactly the nodes that can reach it.
pub fn candidate_subject_nodes(graph: &Graph) -> BTreeSet<Iri> {
    let nodes: Vec<&Term> = graph.nodes().into_iter().collect();
    if nodes.is_empty() {
        return BTreeSet::new();
    }
    let index: HashMap<&Term, usize> = nodes.iter().enumerate().map(|(i, t)| (*t, i)).collect();
    let n = nodes.len();
    let mut forward = vec![Vec::new(); n];
    let mut backward = vec![Vec::new(); n];
    for t in graph.iter() {
        let (s, o) = (index[t.subject()], index[t.object()]);
        forward[s].push(o);
        backward[o].push(s);
    }

    let mut visited = vec![false; n];
    let mut mother = 0;
    for root in 0..n {
        if !visited[root] {
            mother = root;
            mark_reachable(&forward, root, &mut visited);
        }
    }

    let mut from_mother = vec![false; n];
    if mark_reachable(&forward, mother, &mut from_mother) < n {
        return BTreeSet::new();
    }
    let mut to_mother = vec![false; n];
    mark_reachable(&backward, mother, &mut to_mother);
    (0..n)
        .filter(|&i| to_mother[i])
        .filter_map(|i| nodes[i].as_iri().cloned())
        .collect()
}

/// Marks everything reachable from `start`; returns how many new nodes
/// were marked.
fn mark_reachable(adj: &[Vec<usize>], start: usize, seen: &mut [bool]) -> usize {
    if seen[start] {
        return 0;
    }
    seen[start] = true;
    let mut count = 1;
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count
}
