//! Graph isomorphism up to blank-node relabeling, by backtracking search
//! over blank-node bijections. Exponential in the worst case; meant for the
//! small graphs used in round-trip checks and instance comparisons.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use super::term::{Graph, Quad, Term};

/// True when some bijection between the blank nodes of `a` and `b` maps the
/// quads of `a` exactly onto the quads of `b`.
pub fn is_isomorphic(a: &Graph, b: &Graph) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let (ground_a, blank_a): (Vec<&Quad>, Vec<&Quad>) = a.iter().partition(|q| !has_blank(q));
    let (ground_b, blank_b): (Vec<&Quad>, Vec<&Quad>) = b.iter().partition(|q| !has_blank(q));
    if ground_a != ground_b || blank_a.len() != blank_b.len() {
        return false;
    }
    let nodes_a = blank_nodes(&blank_a);
    let nodes_b = blank_nodes(&blank_b);
    if nodes_a.len() != nodes_b.len() {
        return false;
    }
    let sig_a = signatures(&blank_a);
    let sig_b = signatures(&blank_b);
    let mut multiset_a: Vec<_> = sig_a.values().collect();
    let mut multiset_b: Vec<_> = sig_b.values().collect();
    multiset_a.sort();
    multiset_b.sort();
    if multiset_a != multiset_b {
        return false;
    }

    let target: HashSet<&Quad> = blank_b.iter().copied().collect();
    let order: Vec<&str> = nodes_a.iter().copied().collect();
    let mut search = Search {
        order,
        sig_a: &sig_a,
        sig_b: &sig_b,
        candidates: nodes_b.iter().copied().collect(),
        quads_a: &blank_a,
        target: &target,
        mapping: HashMap::new(),
        used: HashSet::new(),
    };
    search.solve(0)
}

fn has_blank(q: &Quad) -> bool {
    q.subject.is_blank() || q.object.is_blank() || q.graph.is_blank()
}

fn blank_nodes<'a>(quads: &[&'a Quad]) -> BTreeSet<&'a str> {
    let mut out = BTreeSet::new();
    for q in quads {
        for t in [&q.subject, &q.object, &q.graph] {
            if let Term::BlankNode(l) = t {
                out.insert(l.as_str());
            }
        }
    }
    out
}

/// Per blank node: the sorted list of (position, predicate, ground neighbour)
/// facts, with other blank nodes abstracted away.
fn signatures<'a>(quads: &[&'a Quad]) -> BTreeMap<&'a str, Vec<(u8, String, String)>> {
    let mut out: BTreeMap<&str, Vec<(u8, String, String)>> = BTreeMap::new();
    let ground = |t: &Term| {
        if t.is_blank() {
            "_".to_string()
        } else {
            t.to_string()
        }
    };
    for q in quads {
        let p = q.predicate.to_string();
        if let Term::BlankNode(l) = &q.subject {
            out.entry(l)
                .or_default()
                .push((0, p.clone(), ground(&q.object)));
        }
        if let Term::BlankNode(l) = &q.object {
            out.entry(l)
                .or_default()
                .push((1, p.clone(), ground(&q.subject)));
        }
        if let Term::BlankNode(l) = &q.graph {
            out.entry(l)
                .or_default()
                .push((2, p.clone(), String::new()));
        }
    }
    for v in out.values_mut() {
        v.sort();
    }
    out
}

struct Search<'a, 'q> {
    order: Vec<&'a str>,
    sig_a: &'a BTreeMap<&'q str, Vec<(u8, String, String)>>,
    sig_b: &'a BTreeMap<&'q str, Vec<(u8, String, String)>>,
    candidates: Vec<&'a str>,
    quads_a: &'a [&'q Quad],
    target: &'a HashSet<&'q Quad>,
    mapping: HashMap<&'a str, &'a str>,
    used: HashSet<&'a str>,
}

impl<'a> Search<'a, '_> {
    fn solve(&mut self, depth: usize) -> bool {
        if depth == self.order.len() {
            return true;
        }
        let node = self.order[depth];
        for i in 0..self.candidates.len() {
            let candidate = self.candidates[i];
            if self.used.contains(candidate) || self.sig_a.get(node) != self.sig_b.get(candidate) {
                continue;
            }
            self.mapping.insert(node, candidate);
            self.used.insert(candidate);
            if self.consistent(node) && self.solve(depth + 1) {
                return true;
            }
            self.mapping.remove(node);
            self.used.remove(candidate);
        }
        false
    }

    /// Every quad touching `node` whose blank nodes are all mapped must land
    /// in the target set.
    fn consistent(&self, node: &str) -> bool {
        for q in self.quads_a {
            let touches = [&q.subject, &q.object, &q.graph]
                .iter()
                .any(|t| matches!(t, Term::BlankNode(l) if l == node));
            if !touches {
                continue;
            }
            let Some(mapped) = self.map_quad(q) else {
                continue;
            };
            if !self.target.contains(&mapped) {
                return false;
            }
        }
        true
    }

    fn map_quad(&self, q: &Quad) -> Option<Quad> {
        let map = |t: &Term| -> Option<Term> {
            match t {
                Term::BlankNode(l) => self
                    .mapping
                    .get(l.as_str())
                    .map(|m| Term::BlankNode(m.to_string())),
                other => Some(other.clone()),
            }
        };
        Some(Quad {
            subject: map(&q.subject)?,
            predicate: q.predicate.clone(),
            object: map(&q.object)?,
            graph: map(&q.graph)?,
        })
    }
}
