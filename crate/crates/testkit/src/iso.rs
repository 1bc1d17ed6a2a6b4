//! Isomorphism by trying every blank-node bijection.

use std::collections::{BTreeSet, HashSet};

use tkg_core::{Graph, Quad, Term};

/// Exhaustive check; only usable for graphs with a handful of blank nodes.
pub fn isomorphic(a: &Graph, b: &Graph) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let labels_a = blank_labels(a);
    let labels_b = blank_labels(b);
    if labels_a.len() != labels_b.len() {
        return false;
    }
    assert!(
        labels_a.len() <= 8,
        "too many blank nodes for an exhaustive search"
    );
    let target: HashSet<&Quad> = b.iter().collect();
    let mut perm: Vec<usize> = (0..labels_b.len()).collect();
    loop {
        let map = |t: &Term| -> Term {
            match t {
                Term::BlankNode(l) => {
                    let i = labels_a
                        .iter()
                        .position(|x| x == l)
                        .expect("label collected");
                    Term::BlankNode(labels_b[perm[i]].clone())
                }
                other => other.clone(),
            }
        };
        if a.iter().all(|q| {
            let mapped = Quad::new(
                map(&q.subject),
                q.predicate.clone(),
                map(&q.object),
                map(&q.graph),
            );
            target.contains(&mapped)
        }) {
            return true;
        }
        if !next_permutation(&mut perm) {
            return false;
        }
    }
}

fn blank_labels(g: &Graph) -> Vec<String> {
    let mut out = BTreeSet::new();
    for q in g.iter() {
        for t in [&q.subject, &q.object, &q.graph] {
            if let Term::BlankNode(l) = t {
                out.insert(l.clone());
            }
        }
    }
    out.into_iter().collect()
}

fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let Some(i) = (0..p.len() - 1).rev().find(|&i| p[i] < p[i + 1]) else {
        return false;
    };
    let j = (i + 1..p.len())
        .rev()
        .find(|&j| p[j] > p[i])
        .expect("successor exists");
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}
