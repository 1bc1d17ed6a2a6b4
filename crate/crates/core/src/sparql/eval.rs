use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};

use super::{
    Binding, CmpOp, Expr, Group, PatternTerm, Query, QueryError, QueryResults, TriplePattern,
};
use crate::rdf::{Literal, Term};
use crate::store::Store;
use crate::vocab;

/// Default cap on intermediate bindings per query.
pub const DEFAULT_BUDGET: usize = 1_000_000;

pub fn evaluate(store: &Store, q: &Query) -> Result<QueryResults, QueryError> {
    evaluate_with_budget(store, q, DEFAULT_BUDGET)
}

pub fn evaluate_with_budget(
    store: &Store,
    q: &Query,
    budget: usize,
) -> Result<QueryResults, QueryError> {
    let mut ctx = Ctx {
        store,
        budget,
        used: 0,
    };
    let mut solutions = ctx.join(&q.required.patterns, vec![Binding::new()])?;
    for opt in &q.optionals {
        solutions = ctx.left_join(solutions, opt)?;
    }
    solutions.retain(|b| q.required.filters.iter().all(|f| filter_passes(f, b)));

    solutions.sort();
    if !q.order_by.is_empty() {
        solutions.sort_by(|a, b| {
            for key in &q.order_by {
                let ord = compare_terms(a.get(&key.var), b.get(&key.var));
                let ord = if key.descending { ord.reverse() } else { ord };
                if ord != Ordering::Equal {
                    return ord;
                }
            }
            Ordering::Equal
        });
    }
    let vars = q.projection();
    let mut rows: Vec<Binding> = solutions
        .into_iter()
        .map(|b| b.into_iter().filter(|(k, _)| vars.contains(k)).collect())
        .collect();
    if q.distinct {
        let mut seen = HashSet::new();
        rows.retain(|r| seen.insert(r.clone()));
    }
    let rows = rows
        .into_iter()
        .skip(q.offset.unwrap_or(0))
        .take(q.limit.unwrap_or(usize::MAX))
        .collect();
    Ok(QueryResults {
        vars,
        bindings: rows,
    })
}

struct Ctx<'a> {
    store: &'a Store,
    budget: usize,
    used: usize,
}

impl Ctx<'_> {
    fn charge(&mut self, n: usize) -> Result<(), QueryError> {
        self.used += n;
        if self.used > self.budget {
            Err(QueryError::QueryTooExpensive {
                budget: self.budget,
            })
        } else {
            Ok(())
        }
    }

    fn left_join(&mut self, left: Vec<Binding>, group: &Group) -> Result<Vec<Binding>, QueryError> {
        let mut out = Vec::with_capacity(left.len());
        for b in left {
            let extended: Vec<Binding> = self
                .join(&group.patterns, vec![b.clone()])?
                .into_iter()
                .filter(|e| group.filters.iter().all(|f| filter_passes(f, e)))
                .collect();
            if extended.is_empty() {
                out.push(b);
            } else {
                self.charge(extended.len())?;
                out.extend(extended);
            }
        }
        Ok(out)
    }

    /// Index nested-loop join of `patterns` onto `seed`.
    fn join(
        &mut self,
        patterns: &[TriplePattern],
        seed: Vec<Binding>,
    ) -> Result<Vec<Binding>, QueryError> {
        let mut bound: BTreeSet<String> = seed
            .first()
            .map(|b| b.keys().cloned().collect())
            .unwrap_or_default();
        let estimates: Vec<usize> = patterns.iter().map(|p| self.estimate(p)).collect();
        let mut remaining: Vec<usize> = (0..patterns.len()).collect();
        let mut current = seed;
        while !remaining.is_empty() {
            // prefer patterns connected to what is already bound, then the
            // smallest estimated cardinality
            let pos = (0..remaining.len())
                .min_by_key(|&k| {
                    let i = remaining[k];
                    let vars: Vec<&str> = pattern_vars(&patterns[i]);
                    let connected = vars.is_empty() || vars.iter().any(|v| bound.contains(*v));
                    (!connected && !bound.is_empty(), estimates[i], i)
                })
                .expect("remaining is non-empty");
            let i = remaining.remove(pos);
            let pattern = &patterns[i];
            let mut next = Vec::new();
            for b in &current {
                next.extend(self.extend(pattern, b));
                if self.used + next.len() > self.budget {
                    return Err(QueryError::QueryTooExpensive {
                        budget: self.budget,
                    });
                }
            }
            self.charge(next.len())?;
            bound.extend(pattern_vars(pattern).into_iter().map(str::to_string));
            current = next;
            if current.is_empty() {
                break;
            }
        }
        Ok(current)
    }

    fn estimate(&self, p: &TriplePattern) -> usize {
        let constant = |t: &PatternTerm| match t {
            PatternTerm::Term(t) => Some(t.clone()),
            PatternTerm::Var(_) => None,
        };
        let (s, pr, o) = (
            constant(&p.subject),
            constant(&p.predicate),
            constant(&p.object),
        );
        if s.is_none() && pr.is_none() && o.is_none() {
            return self.store.len();
        }
        self.store
            .match_quads(s.as_ref(), pr.as_ref(), o.as_ref(), None)
            .count()
    }

    /// Solutions of one pattern compatible with `b`; triples present in
    /// several graphs count once.
    fn extend(&self, pattern: &TriplePattern, b: &Binding) -> Vec<Binding> {
        let resolve = |t: &PatternTerm| match t {
            PatternTerm::Term(t) => Some(t.clone()),
            PatternTerm::Var(v) => b.get(v).cloned(),
        };
        let (s, p, o) = (
            resolve(&pattern.subject),
            resolve(&pattern.predicate),
            resolve(&pattern.object),
        );
        let triples: BTreeSet<(Term, Term, Term)> = self
            .store
            .match_quads(s.as_ref(), p.as_ref(), o.as_ref(), None)
            .map(|q| (q.subject, q.predicate, q.object))
            .collect();
        let mut out = Vec::new();
        'triples: for (ts, tp, to) in triples {
            let mut ext = b.clone();
            for (pt, value) in [
                (&pattern.subject, ts),
                (&pattern.predicate, tp),
                (&pattern.object, to),
            ] {
                if let PatternTerm::Var(v) = pt {
                    match ext.get(v) {
                        Some(existing) if *existing != value => continue 'triples,
                        Some(_) => {}
                        None => {
                            ext.insert(v.clone(), value);
                        }
                    }
                }
            }
            out.push(ext);
        }
        out
    }
}

fn pattern_vars(p: &TriplePattern) -> Vec<&str> {
    p.terms()
        .into_iter()
        .filter_map(|t| match t {
            PatternTerm::Var(v) => Some(v.as_str()),
            PatternTerm::Term(_) => None,
        })
        .collect()
}

// ---- filters -------------------------------------------------------------------

fn filter_passes(expr: &Expr, b: &Binding) -> bool {
    eval(expr, b).and_then(|v| ebv(&v)) == Some(true)
}

/// Evaluates an expression; `None` is an evaluation error.
fn eval(expr: &Expr, b: &Binding) -> Option<Term> {
    match expr {
        Expr::Var(v) => b.get(v).cloned(),
        Expr::Const(t) => Some(t.clone()),
        Expr::Or(x, y) => {
            let (l, r) = (
                eval(x, b).and_then(|v| ebv(&v)),
                eval(y, b).and_then(|v| ebv(&v)),
            );
            match (l, r) {
                (Some(true), _) | (_, Some(true)) => Some(boolean(true)),
                (Some(false), Some(false)) => Some(boolean(false)),
                _ => None,
            }
        }
        Expr::And(x, y) => {
            let (l, r) = (
                eval(x, b).and_then(|v| ebv(&v)),
                eval(y, b).and_then(|v| ebv(&v)),
            );
            match (l, r) {
                (Some(false), _) | (_, Some(false)) => Some(boolean(false)),
                (Some(true), Some(true)) => Some(boolean(true)),
                _ => None,
            }
        }
        Expr::Not(x) => eval(x, b).and_then(|v| ebv(&v)).map(|v| boolean(!v)),
        Expr::Compare(op, x, y) => Some(boolean(compare(*op, &eval(x, b)?, &eval(y, b)?))),
        Expr::Regex(x, re) => {
            let text = eval(x, b)?;
            string_value(&text).map(|s| boolean(re.is_match(s)))
        }
        Expr::Contains(x, y) => {
            let (hay, needle) = (eval(x, b)?, eval(y, b)?);
            Some(boolean(
                string_value(&hay)?.contains(string_value(&needle)?),
            ))
        }
        Expr::Lcase(x) => {
            let Term::Literal(l) = eval(x, b)? else {
                return None;
            };
            string_value_of(&l)?;
            let lower = l.lexical().to_lowercase();
            Some(Term::Literal(match l.language() {
                Some(lang) => Literal::new_lang(lower, lang),
                None => Literal::new_typed(lower, l.datatype()),
            }))
        }
    }
}

fn boolean(v: bool) -> Term {
    Term::typed(if v { "true" } else { "false" }, vocab::XSD_BOOLEAN)
}

/// Lexical form of plain or language-tagged string literals.
fn string_value(t: &Term) -> Option<&str> {
    match t {
        Term::Literal(l) => string_value_of(l),
        _ => None,
    }
}

fn string_value_of(l: &Literal) -> Option<&str> {
    (l.language().is_some() || l.datatype() == vocab::XSD_STRING).then_some(l.lexical())
}

fn numeric(t: &Term) -> Option<f64> {
    t.as_literal().and_then(Literal::as_f64)
}

fn plain_string(t: &Term) -> Option<&str> {
    match t {
        Term::Literal(l) if l.language().is_none() && l.datatype() == vocab::XSD_STRING => {
            Some(l.lexical())
        }
        _ => None,
    }
}

/// Effective boolean value.
fn ebv(t: &Term) -> Option<bool> {
    let Term::Literal(l) = t else { return None };
    if l.datatype() == vocab::XSD_BOOLEAN {
        return match l.lexical() {
            "true" | "1" => Some(true),
            "false" | "0" => Some(false),
            _ => None,
        };
    }
    if let Some(n) = l.as_f64() {
        return Some(n != 0.0 && !n.is_nan());
    }
    string_value_of(l).map(|s| !s.is_empty())
}

/// Numeric pairs compare by value, plain-string pairs by code point; any
/// other pair supports only `=`/`!=` as term (in)equality.
fn compare(op: CmpOp, a: &Term, b: &Term) -> bool {
    if let (Some(x), Some(y)) = (numeric(a), numeric(b)) {
        return match op {
            CmpOp::Eq => x == y,
            CmpOp::Ne => x != y,
            CmpOp::Lt => x < y,
            CmpOp::Le => x <= y,
            CmpOp::Gt => x > y,
            CmpOp::Ge => x >= y,
        };
    }
    if let (Some(x), Some(y)) = (plain_string(a), plain_string(b)) {
        return match op {
            CmpOp::Eq => x == y,
            CmpOp::Ne => x != y,
            CmpOp::Lt => x < y,
            CmpOp::Le => x <= y,
            CmpOp::Gt => x > y,
            CmpOp::Ge => x >= y,
        };
    }
    match op {
        CmpOp::Eq => a == b,
        CmpOp::Ne => a != b,
        _ => false,
    }
}

/// `ORDER BY` ordering: unbound, blank nodes, IRIs, numeric literals by
/// value, then other literals by lexical form, datatype and language.
pub fn compare_terms(a: Option<&Term>, b: Option<&Term>) -> Ordering {
    fn rank(t: Option<&Term>) -> u8 {
        match t {
            None => 0,
            Some(Term::BlankNode(_)) => 1,
            Some(Term::Iri(_)) => 2,
            Some(t) if numeric(t).is_some() => 3,
            Some(_) => 4,
        }
    }
    rank(a).cmp(&rank(b)).then_with(|| match (a, b) {
        (Some(Term::BlankNode(x)), Some(Term::BlankNode(y)))
        | (Some(Term::Iri(x)), Some(Term::Iri(y))) => x.cmp(y),
        (Some(Term::Literal(x)), Some(Term::Literal(y))) => {
            let by_value = match (x.as_f64(), y.as_f64()) {
                (Some(p), Some(q)) => p.total_cmp(&q),
                _ => Ordering::Equal,
            };
            by_value
                .then_with(|| x.lexical().cmp(y.lexical()))
                .then_with(|| x.datatype().cmp(y.datatype()))
                .then_with(|| x.language().cmp(&y.language()))
        }
        _ => Ordering::Equal,
    })
}
