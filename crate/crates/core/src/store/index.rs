use std::collections::{BTreeMap, BTreeSet};
use std::ops::Bound;

use crate::rdf::{Quad, Term};

type Key = (Term, Term, Term, Term);

/// Smallest term under the derived ordering; used as a range lower bound.
fn min_term() -> Term {
    Term::Iri(String::new())
}

/// Three sorted permutations of the same quad set, plus per-graph counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub(crate) struct Indexes {
    gspo: BTreeSet<Key>,
    posg: BTreeSet<Key>,
    ospg: BTreeSet<Key>,
    graphs: BTreeMap<Term, usize>,
}

impl Indexes {
    pub fn len(&self) -> usize {
        self.gspo.len()
    }

    pub fn insert(&mut self, q: Quad) -> bool {
        let Quad {
            subject: s,
            predicate: p,
            object: o,
            graph: g,
        } = q;
        if !self
            .gspo
            .insert((g.clone(), s.clone(), p.clone(), o.clone()))
        {
            return false;
        }
        self.posg
            .insert((p.clone(), o.clone(), s.clone(), g.clone()));
        self.ospg.insert((o, s, p, g.clone()));
        *self.graphs.entry(g).or_default() += 1;
        true
    }

    pub fn remove(&mut self, q: &Quad) -> bool {
        let key = (
            q.graph.clone(),
            q.subject.clone(),
            q.predicate.clone(),
            q.object.clone(),
        );
        if !self.gspo.remove(&key) {
            return false;
        }
        self.posg.remove(&(
            q.predicate.clone(),
            q.object.clone(),
            q.subject.clone(),
            q.graph.clone(),
        ));
        self.ospg.remove(&(
            q.object.clone(),
            q.subject.clone(),
            q.predicate.clone(),
            q.graph.clone(),
        ));
        if let Some(n) = self.graphs.get_mut(&q.graph) {
            *n -= 1;
            if *n == 0 {
                self.graphs.remove(&q.graph);
            }
        }
        true
    }

    pub fn graphs(&self) -> impl Iterator<Item = (&Term, usize)> + '_ {
        self.graphs.iter().map(|(g, n)| (g, *n))
    }

    /// Every quad in GSPO order.
    pub fn scan(&self) -> Box<dyn Iterator<Item = Quad> + '_> {
        Box::new(self.gspo.iter().map(|(g, s, p, o)| quad(s, p, o, g)))
    }

    /// The three permutations agree on their quad sets.
    #[cfg(test)]
    pub fn coherent(&self) -> bool {
        let a: BTreeSet<Key> = self
            .gspo
            .iter()
            .map(|(g, s, p, o)| (s.clone(), p.clone(), o.clone(), g.clone()))
            .collect();
        let b: BTreeSet<Key> = self
            .posg
            .iter()
            .map(|(p, o, s, g)| (s.clone(), p.clone(), o.clone(), g.clone()))
            .collect();
        let c: BTreeSet<Key> = self
            .ospg
            .iter()
            .map(|(o, s, p, g)| (s.clone(), p.clone(), o.clone(), g.clone()))
            .collect();
        let counted: usize = self.graphs.values().sum();
        a == b && b == c && counted == a.len()
    }

    /// Quads matching every bound position, in the order of the index with
    /// the longest bound prefix.
    pub fn matching<'a>(
        &'a self,
        s: Option<&'a Term>,
        p: Option<&'a Term>,
        o: Option<&'a Term>,
        g: Option<&'a Term>,
    ) -> Box<dyn Iterator<Item = Quad> + 'a> {
        let filter = move |q: &Quad| {
            s.is_none_or(|t| *t == q.subject)
                && p.is_none_or(|t| *t == q.predicate)
                && o.is_none_or(|t| *t == q.object)
                && g.is_none_or(|t| *t == q.graph)
        };
        match (s, p, o, g) {
            (_, _, _, Some(g)) => {
                let prefix = bound_prefix(&[Some(g), s, p, o]);
                Box::new(
                    prefix_range(&self.gspo, &prefix)
                        .map(|(g, s, p, o)| quad(s, p, o, g))
                        .filter(filter),
                )
            }
            (Some(_), Some(_), None, None) | (Some(_), None, None, None) => {
                // No permutation starts with S, so walk each graph's GSPO slice.
                Box::new(self.graphs.keys().flat_map(move |graph| {
                    let prefix = bound_prefix(&[Some(graph), s, p]);
                    prefix_range(&self.gspo, &prefix)
                        .map(|(g, s, p, o)| quad(s, p, o, g))
                        .collect::<Vec<_>>()
                }))
            }
            (_, Some(_), _, None) => {
                let prefix = bound_prefix(&[p, o, s]);
                Box::new(
                    prefix_range(&self.posg, &prefix)
                        .map(|(p, o, s, g)| quad(s, p, o, g))
                        .filter(filter),
                )
            }
            (_, None, Some(_), None) => {
                let prefix = bound_prefix(&[o, s]);
                Box::new(
                    prefix_range(&self.ospg, &prefix)
                        .map(|(o, s, p, g)| quad(s, p, o, g))
                        .filter(filter),
                )
            }
            (None, None, None, None) => self.scan(),
        }
    }
}

fn quad(s: &Term, p: &Term, o: &Term, g: &Term) -> Quad {
    Quad::new(s.clone(), p.clone(), o.clone(), g.clone())
}

/// Leading run of bound positions.
fn bound_prefix<'a>(positions: &[Option<&'a Term>]) -> Vec<&'a Term> {
    positions.iter().map_while(|t| *t).collect()
}

fn prefix_range<'a>(
    set: &'a BTreeSet<Key>,
    prefix: &[&Term],
) -> impl Iterator<Item = &'a Key> + 'a {
    let at = |i: usize| prefix.get(i).map(|t| (*t).clone()).unwrap_or_else(min_term);
    let lower = (at(0), at(1), at(2), at(3));
    let owned: Vec<Term> = prefix.iter().map(|t| (*t).clone()).collect();
    set.range((Bound::Included(lower), Bound::Unbounded))
        .take_while(move |(a, b, c, d)| {
            let key = [a, b, c, d];
            owned.iter().zip(key).all(|(want, have)| want == have)
        })
}
