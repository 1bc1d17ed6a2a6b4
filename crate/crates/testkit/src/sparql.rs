//! Random queries in the supported subset and a nested-loop reference
//! evaluator.
//!
//! Queries are generated as [`OracleQuery`] values, rendered to text for the
//! engine, and evaluated here directly from the structure. The reference
//! semantics: required patterns joined by nested loops over every distinct
//! triple, the optional group left-joined with its filters, group filters,
//! then a canonical sort of full solutions, a stable sort by the order keys,
//! projection, `DISTINCT` keeping first occurrences, `OFFSET` and `LIMIT`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;
use tkg_core::store::Store;
use tkg_core::{vocab, Literal, Term};

use crate::graphs::{pool_literal, POOL_CLASSES, POOL_PREDICATES, POOL_WORDS};

pub type Row = BTreeMap<String, Term>;

#[derive(Debug, Clone)]
pub enum Slot {
    Var(String),
    Const(Term),
}

#[derive(Debug, Clone)]
pub struct Pattern {
    pub s: Slot,
    pub p: Slot,
    pub o: Slot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Debug, Clone)]
pub enum Ex {
    Var(String),
    Const(Term),
    Cmp(Op, Box<Ex>, Box<Ex>),
    And(Box<Ex>, Box<Ex>),
    Or(Box<Ex>, Box<Ex>),
    Not(Box<Ex>),
    Regex(Box<Ex>, String, bool),
    Contains(Box<Ex>, Box<Ex>),
    Lcase(Box<Ex>),
}

#[derive(Debug, Clone, Default)]
pub struct OracleQuery {
    pub distinct: bool,
    pub select: Option<Vec<String>>,
    pub required: Vec<Pattern>,
    pub filters: Vec<Ex>,
    pub optional: Option<(Vec<Pattern>, Vec<Ex>)>,
    pub order: Vec<(String, bool)>,
    pub limit: Option<usize>,
    pub offset: Option<usize>,
}

impl OracleQuery {
    /// Pattern variables in order of first appearance.
    pub fn pattern_vars(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let optional = self.optional.iter().flat_map(|(ps, _)| ps.iter());
        for p in self.required.iter().chain(optional) {
            for slot in [&p.s, &p.p, &p.o] {
                if let Slot::Var(v) = slot {
                    if !out.contains(v) {
                        out.push(v.clone());
                    }
                }
            }
        }
        out
    }

    pub fn projection(&self) -> Vec<String> {
        self.select.clone().unwrap_or_else(|| self.pattern_vars())
    }

    pub fn render(&self) -> String {
        let mut text = String::from("SELECT ");
        if self.distinct {
            text.push_str("DISTINCT ");
        }
        match &self.select {
            None => text.push('*'),
            Some(vars) => text.push_str(
                &vars
                    .iter()
                    .map(|v| format!("?{v}"))
                    .collect::<Vec<_>>()
                    .join(" "),
            ),
        }
        text.push_str(" WHERE {\n");
        for p in &self.required {
            text.push_str(&format!("  {} .\n", render_pattern(p)));
        }
        if let Some((patterns, filters)) = &self.optional {
            text.push_str("  OPTIONAL { ");
            let body: Vec<String> = patterns.iter().map(render_pattern).collect();
            text.push_str(&body.join(" . "));
            for f in filters {
                text.push_str(&format!(" FILTER({})", render_ex(f)));
            }
            text.push_str(" }\n");
        }
        for f in &self.filters {
            text.push_str(&format!("  FILTER({})\n", render_ex(f)));
        }
        text.push('}');
        if !self.order.is_empty() {
            text.push_str(" ORDER BY");
            for (v, desc) in &self.order {
                if *desc {
                    text.push_str(&format!(" DESC(?{v})"));
                } else if v.len() % 2 == 0 {
                    text.push_str(&format!(" ASC(?{v})"));
                } else {
                    text.push_str(&format!(" ?{v}"));
                }
            }
        }
        if let Some(n) = self.limit {
            text.push_str(&format!(" LIMIT {n}"));
        }
        if let Some(n) = self.offset {
            text.push_str(&format!(" OFFSET {n}"));
        }
        text
    }
}

fn render_slot(slot: &Slot) -> String {
    match slot {
        Slot::Var(v) => format!("?{v}"),
        Slot::Const(t) => render_term(t),
    }
}

fn render_term(t: &Term) -> String {
    if let Term::Iri(iri) = t {
        if iri == vocab::RDF_TYPE {
            return "a".into();
        }
        if let Some(local) = iri.strip_prefix(vocab::SCHEMA) {
            return format!("schema:{local}");
        }
    }
    if let Term::Literal(l) = t {
        if l.datatype() == vocab::XSD_INTEGER && !l.lexical().starts_with('+') {
            return l.lexical().to_string();
        }
    }
    t.to_string()
}

fn render_pattern(p: &Pattern) -> String {
    format!(
        "{} {} {}",
        render_slot(&p.s),
        render_slot(&p.p),
        render_slot(&p.o)
    )
}

fn render_ex(e: &Ex) -> String {
    match e {
        Ex::Var(v) => format!("?{v}"),
        Ex::Const(t) => match t {
            Term::Iri(iri) => format!("<{iri}>"),
            other => render_term(other),
        },
        Ex::Cmp(op, a, b) => {
            let op = match op {
                Op::Eq => "=",
                Op::Ne => "!=",
                Op::Lt => "<",
                Op::Le => "<=",
                Op::Gt => ">",
                Op::Ge => ">=",
            };
            format!("{} {op} {}", render_ex(a), render_ex(b))
        }
        Ex::And(a, b) => format!("({} && {})", render_ex(a), render_ex(b)),
        Ex::Or(a, b) => format!("({} || {})", render_ex(a), render_ex(b)),
        Ex::Not(a) => format!("!({})", render_ex(a)),
        Ex::Regex(a, pattern, ci) => {
            if *ci {
                format!("REGEX({}, \"{pattern}\", \"i\")", render_ex(a))
            } else {
                format!("REGEX({}, \"{pattern}\")", render_ex(a))
            }
        }
        Ex::Contains(a, b) => format!("CONTAINS({}, {})", render_ex(a), render_ex(b)),
        Ex::Lcase(a) => format!("LCASE({})", render_ex(a)),
    }
}

// ---- generation ----------------------------------------------------------------

const VARS: &[&str] = &["a", "b", "c", "d", "e"];

fn node_const(rng: &mut StdRng) -> Term {
    Term::iri(format!("http://ex/s{}", rng.gen_range(0..12)))
}

fn gen_pattern(rng: &mut StdRng, bound: &[String], must_connect: bool) -> Pattern {
    let mut used: Vec<String> = bound.to_vec();
    let mut fresh = |rng: &mut StdRng| {
        let name = match VARS.iter().find(|v| !used.iter().any(|u| u == *v)) {
            Some(v) if rng.gen_bool(0.9) => v.to_string(),
            _ => VARS.choose(rng).expect("non-empty").to_string(),
        };
        used.push(name.clone());
        name
    };
    let mut s = if rng.gen_bool(0.85) {
        Slot::Var(fresh(rng))
    } else {
        Slot::Const(node_const(rng))
    };
    let p_const = Term::iri(*POOL_PREDICATES.choose(rng).expect("non-empty"));
    let mut p = if rng.gen_bool(0.8) {
        Slot::Const(p_const.clone())
    } else {
        Slot::Var(fresh(rng))
    };
    let mut o = if rng.gen_bool(0.7) {
        Slot::Var(fresh(rng))
    } else if p_const.as_iri() == Some(vocab::RDF_TYPE) {
        Slot::Const(Term::iri(*POOL_CLASSES.choose(rng).expect("non-empty")))
    } else if rng.gen_bool(0.5) {
        Slot::Const(node_const(rng))
    } else {
        Slot::Const(pool_literal(rng))
    };
    if must_connect && !bound.is_empty() {
        let shares = [&s, &p, &o]
            .iter()
            .any(|slot| matches!(slot, Slot::Var(v) if bound.contains(v)));
        if !shares {
            let v = bound.choose(rng).expect("non-empty").clone();
            if rng.gen_bool(0.6) {
                s = Slot::Var(v);
            } else {
                o = Slot::Var(v);
            }
        }
    }
    let all_vars = [&s, &p, &o].iter().all(|slot| matches!(slot, Slot::Var(_)));
    let connected = [&s, &p, &o]
        .iter()
        .any(|slot| matches!(slot, Slot::Var(v) if bound.contains(v)));
    if all_vars && !connected {
        p = Slot::Const(p_const);
    }
    if matches!(&p, Slot::Var(_)) && !connected && !bound.is_empty() {
        p = Slot::Const(Term::iri(*POOL_PREDICATES.choose(rng).expect("non-empty")));
    }
    Pattern { s, p, o }
}

fn vars_of(patterns: &[Pattern]) -> Vec<String> {
    let mut out = Vec::new();
    for p in patterns {
        for slot in [&p.s, &p.p, &p.o] {
            if let Slot::Var(v) = slot {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
        }
    }
    out
}

fn gen_operand(rng: &mut StdRng, vars: &[String]) -> Ex {
    match rng.gen_range(0..5) {
        0 => Ex::Const(pool_literal(rng)),
        1 => Ex::Const(node_const(rng)),
        2 => Ex::Const(Term::string(*POOL_WORDS.choose(rng).expect("non-empty"))),
        _ => Ex::Var(vars.choose(rng).expect("non-empty").clone()),
    }
}

fn gen_atom(rng: &mut StdRng, vars: &[String]) -> Ex {
    let v = Ex::Var(vars.choose(rng).expect("non-empty").clone());
    match rng.gen_range(0..6) {
        0 | 1 => {
            let op = *[Op::Eq, Op::Ne, Op::Lt, Op::Le, Op::Gt, Op::Ge]
                .choose(rng)
                .expect("non-empty");
            let rhs = gen_operand(rng, vars);
            Ex::Cmp(op, Box::new(v), Box::new(rhs))
        }
        2 => {
            let rhs = Ex::Const(Term::integer(rng.gen_range(0..6)));
            let op = *[Op::Lt, Op::Ge, Op::Eq].choose(rng).expect("non-empty");
            Ex::Cmp(op, Box::new(v), Box::new(rhs))
        }
        3 => {
            let pattern = *["^a", "l", "^F", "e$", "ä", "^$", "[sz]"]
                .choose(rng)
                .expect("non-empty");
            Ex::Regex(Box::new(v), pattern.to_string(), rng.gen_bool(0.5))
        }
        4 => {
            let needle = Ex::Const(Term::string(
                *["a", "fe", "st", "", "A"].choose(rng).expect("non-empty"),
            ));
            let hay = if rng.gen_bool(0.5) {
                Ex::Lcase(Box::new(v))
            } else {
                v
            };
            Ex::Contains(Box::new(hay), Box::new(needle))
        }
        _ => {
            let w = Ex::Var(vars.choose(rng).expect("non-empty").clone());
            Ex::Cmp(
                *[Op::Eq, Op::Ne, Op::Lt].choose(rng).expect("non-empty"),
                Box::new(v),
                Box::new(w),
            )
        }
    }
}

fn gen_filter(rng: &mut StdRng, vars: &[String], depth: u32) -> Ex {
    if depth == 0 || rng.gen_bool(0.6) {
        return gen_atom(rng, vars);
    }
    match rng.gen_range(0..3) {
        0 => Ex::And(
            Box::new(gen_filter(rng, vars, depth - 1)),
            Box::new(gen_filter(rng, vars, depth - 1)),
        ),
        1 => Ex::Or(
            Box::new(gen_filter(rng, vars, depth - 1)),
            Box::new(gen_filter(rng, vars, depth - 1)),
        ),
        _ => Ex::Not(Box::new(gen_filter(rng, vars, depth - 1))),
    }
}

/// A random query with 1 to 3 required patterns, at most one optional
/// group and at most one filter per group.
pub fn random_query(rng: &mut StdRng) -> OracleQuery {
    let mut required = Vec::new();
    for i in 0..rng.gen_range(1..=3) {
        let bound = vars_of(&required);
        let connect = i > 0 && rng.gen_bool(0.85);
        required.push(gen_pattern(rng, &bound, connect));
    }
    let mut q = OracleQuery {
        required,
        ..OracleQuery::default()
    };
    if vars_of(&q.required).is_empty() {
        q.required[0].s = Slot::Var("a".into());
    }
    if rng.gen_bool(0.5) {
        let bound = vars_of(&q.required);
        let mut patterns = vec![gen_pattern(rng, &bound, true)];
        if rng.gen_bool(0.3) {
            let mut all = bound.clone();
            all.extend(vars_of(&patterns));
            patterns.push(gen_pattern(rng, &all, true));
        }
        let mut filters = Vec::new();
        if rng.gen_bool(0.4) {
            let mut scope = bound;
            scope.extend(vars_of(&patterns));
            filters.push(gen_filter(rng, &scope, 1));
        }
        q.optional = Some((patterns, filters));
    }
    let vars = q.pattern_vars();
    if rng.gen_bool(0.5) {
        q.filters.push(gen_filter(rng, &vars, 2));
    }
    if rng.gen_bool(0.5) {
        let mut chosen: Vec<String> = vars.iter().filter(|_| rng.gen_bool(0.6)).cloned().collect();
        if chosen.is_empty() {
            chosen.push(vars[0].clone());
        }
        q.select = Some(chosen);
    }
    q.distinct = rng.gen_bool(0.3);
    for _ in 0..rng.gen_range(0..=2) {
        let v = vars.choose(rng).expect("non-empty").clone();
        if !q.order.iter().any(|(o, _)| *o == v) {
            q.order.push((v, rng.gen_bool(0.5)));
        }
    }
    if rng.gen_bool(0.4) {
        q.limit = Some(rng.gen_range(0..15));
    }
    if rng.gen_bool(0.25) {
        q.offset = Some(rng.gen_range(0..10));
    }
    q
}

// ---- evaluation ----------------------------------------------------------------

/// Result rows of `q` over all triples of `store`, per the reference
/// semantics in the module documentation.
pub fn evaluate(store: &Store, q: &OracleQuery) -> Vec<Row> {
    let triples: BTreeSet<(Term, Term, Term)> = store
        .iter()
        .map(|quad| (quad.subject, quad.predicate, quad.object))
        .collect();
    let mut rows = nested_loop(&triples, &q.required, vec![Row::new()]);
    if let Some((patterns, filters)) = &q.optional {
        let mut joined = Vec::new();
        for row in rows {
            let ext: Vec<Row> = nested_loop(&triples, patterns, vec![row.clone()])
                .into_iter()
                .filter(|r| filters.iter().all(|f| holds(f, r)))
                .collect();
            if ext.is_empty() {
                joined.push(row);
            } else {
                joined.extend(ext);
            }
        }
        rows = joined;
    }
    rows.retain(|r| q.filters.iter().all(|f| holds(f, r)));
    rows.sort();
    rows.sort_by(|a, b| {
        q.order
            .iter()
            .map(|(v, desc)| {
                let o = order_cmp(a.get(v), b.get(v));
                if *desc {
                    o.reverse()
                } else {
                    o
                }
            })
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
    });
    let vars = q.projection();
    let mut out: Vec<Row> = rows
        .into_iter()
        .map(|r| r.into_iter().filter(|(k, _)| vars.contains(k)).collect())
        .collect();
    if q.distinct {
        let mut kept: Vec<Row> = Vec::new();
        for r in out {
            if !kept.contains(&r) {
                kept.push(r);
            }
        }
        out = kept;
    }
    out.into_iter()
        .skip(q.offset.unwrap_or(0))
        .take(q.limit.unwrap_or(usize::MAX))
        .collect()
}

fn nested_loop(
    triples: &BTreeSet<(Term, Term, Term)>,
    patterns: &[Pattern],
    seed: Vec<Row>,
) -> Vec<Row> {
    let mut rows = seed;
    for p in patterns {
        let mut next = Vec::new();
        for row in &rows {
            for (s, pr, o) in triples {
                let mut r = row.clone();
                if unify(&p.s, s, &mut r) && unify(&p.p, pr, &mut r) && unify(&p.o, o, &mut r) {
                    next.push(r);
                }
            }
        }
        rows = next;
    }
    rows
}

fn unify(slot: &Slot, value: &Term, row: &mut Row) -> bool {
    match slot {
        Slot::Const(t) => t == value,
        Slot::Var(v) => match row.get(v) {
            Some(existing) => existing == value,
            None => {
                row.insert(v.clone(), value.clone());
                true
            }
        },
    }
}

const NUMERIC_TYPES: &[&str] = &[
    vocab::XSD_INTEGER,
    vocab::XSD_DECIMAL,
    vocab::XSD_DOUBLE,
    vocab::XSD_FLOAT,
    vocab::XSD_NON_NEGATIVE_INTEGER,
];

fn number(t: &Term) -> Option<f64> {
    let Term::Literal(l) = t else { return None };
    if !NUMERIC_TYPES.contains(&l.datatype()) {
        return None;
    }
    l.lexical().trim().parse::<f64>().ok()
}

fn simple_string(t: &Term) -> Option<&str> {
    let Term::Literal(l) = t else { return None };
    (l.language().is_none() && l.datatype() == vocab::XSD_STRING).then(|| l.lexical())
}

fn any_string(t: &Term) -> Option<&str> {
    let Term::Literal(l) = t else { return None };
    (l.language().is_some() || l.datatype() == vocab::XSD_STRING).then(|| l.lexical())
}

fn truth(b: bool) -> Term {
    Term::typed(b.to_string(), vocab::XSD_BOOLEAN)
}

fn ebv(t: &Term) -> Option<bool> {
    let Term::Literal(l) = t else { return None };
    if l.datatype() == vocab::XSD_BOOLEAN {
        return match l.lexical() {
            "true" | "1" => Some(true),
            "false" | "0" => Some(false),
            _ => None,
        };
    }
    if let Some(n) = number(t) {
        return Some(!(n == 0.0 || n.is_nan()));
    }
    any_string(t).map(|s| !s.is_empty())
}

fn holds(e: &Ex, row: &Row) -> bool {
    value(e, row).and_then(|v| ebv(&v)) == Some(true)
}

fn value(e: &Ex, row: &Row) -> Option<Term> {
    match e {
        Ex::Var(v) => row.get(v).cloned(),
        Ex::Const(t) => Some(t.clone()),
        Ex::Cmp(op, a, b) => {
            let (a, b) = (value(a, row)?, value(b, row)?);
            let ord = match (number(&a), number(&b), simple_string(&a), simple_string(&b)) {
                (Some(x), Some(y), _, _) => x.partial_cmp(&y),
                (_, _, Some(x), Some(y)) => Some(x.cmp(y)),
                _ => {
                    return Some(truth(match op {
                        Op::Eq => a == b,
                        Op::Ne => a != b,
                        _ => false,
                    }))
                }
            };
            Some(truth(match (op, ord) {
                (Op::Ne, None) => true,
                (_, None) => false,
                (Op::Eq, Some(o)) => o == Ordering::Equal,
                (Op::Ne, Some(o)) => o != Ordering::Equal,
                (Op::Lt, Some(o)) => o == Ordering::Less,
                (Op::Le, Some(o)) => o != Ordering::Greater,
                (Op::Gt, Some(o)) => o == Ordering::Greater,
                (Op::Ge, Some(o)) => o != Ordering::Less,
            }))
        }
        Ex::And(a, b) => {
            let (x, y) = (
                value(a, row).and_then(|v| ebv(&v)),
                value(b, row).and_then(|v| ebv(&v)),
            );
            match (x, y) {
                (Some(false), _) | (_, Some(false)) => Some(truth(false)),
                (Some(true), Some(true)) => Some(truth(true)),
                _ => None,
            }
        }
        Ex::Or(a, b) => {
            let (x, y) = (
                value(a, row).and_then(|v| ebv(&v)),
                value(b, row).and_then(|v| ebv(&v)),
            );
            match (x, y) {
                (Some(true), _) | (_, Some(true)) => Some(truth(true)),
                (Some(false), Some(false)) => Some(truth(false)),
                _ => None,
            }
        }
        Ex::Not(a) => value(a, row).and_then(|v| ebv(&v)).map(|b| truth(!b)),
        Ex::Regex(a, pattern, ci) => {
            let text = value(a, row)?;
            let source = if *ci {
                format!("(?i){pattern}")
            } else {
                pattern.clone()
            };
            let re = regex::Regex::new(&source).expect("generated patterns are valid");
            Some(truth(re.is_match(any_string(&text)?)))
        }
        Ex::Contains(a, b) => {
            let (hay, needle) = (value(a, row)?, value(b, row)?);
            Some(truth(any_string(&hay)?.contains(any_string(&needle)?)))
        }
        Ex::Lcase(a) => {
            let t = value(a, row)?;
            let lower = any_string(&t)?.to_lowercase();
            let Term::Literal(l) = &t else { return None };
            Some(Term::Literal(match l.language() {
                Some(lang) => Literal::new_lang(lower, lang),
                None => Literal::new_string(lower),
            }))
        }
    }
}

/// Order-key comparison: unbound, blank nodes, IRIs, numeric literals by
/// value, other literals; ties broken by lexical form, datatype, language.
pub fn order_cmp(a: Option<&Term>, b: Option<&Term>) -> Ordering {
    fn class(t: Option<&Term>) -> u8 {
        match t {
            None => 0,
            Some(Term::BlankNode(_)) => 1,
            Some(Term::Iri(_)) => 2,
            Some(t) if number(t).is_some() => 3,
            Some(_) => 4,
        }
    }
    let by_class = class(a).cmp(&class(b));
    if by_class != Ordering::Equal {
        return by_class;
    }
    match (a, b) {
        (Some(Term::BlankNode(x)), Some(Term::BlankNode(y))) => x.cmp(y),
        (Some(Term::Iri(x)), Some(Term::Iri(y))) => x.cmp(y),
        (Some(x @ Term::Literal(l)), Some(y @ Term::Literal(m))) => {
            let by_value = match (number(x), number(y)) {
                (Some(p), Some(q)) => p.total_cmp(&q),
                _ => Ordering::Equal,
            };
            by_value
                .then_with(|| l.lexical().cmp(m.lexical()))
                .then_with(|| l.datatype().cmp(m.datatype()))
                .then_with(|| l.language().cmp(&m.language()))
        }
        _ => Ordering::Equal,
    }
}
