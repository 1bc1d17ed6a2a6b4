//! A SPARQL SELECT subset evaluated over the union of all store graphs.
//!
//! Supported: `PREFIX`, `SELECT [DISTINCT] vars|*`, basic graph patterns
//! with `;`, `,` and `a`, non-nested `OPTIONAL` groups, `FILTER` with
//! comparisons, `&&`, `||`, `!`, `REGEX`, `CONTAINS` and `LCASE`,
//! `ORDER BY`, `LIMIT` and `OFFSET`. Everything else is rejected with
//! [`QueryError::UnsupportedFeature`].
//!
//! Required patterns of a group are joined before its optional groups are
//! left-joined, wherever they appear in the text; filters of a group run
//! after all its optionals. Results are put in a canonical order first and
//! then stably sorted by the `ORDER BY` keys, so equal queries always return
//! equal lists.

mod eval;
mod parser;
mod results;

pub use eval::{compare_terms, evaluate, evaluate_with_budget, DEFAULT_BUDGET};
pub use results::{results_to_csv, results_to_json};

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::rdf::Term;

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "code", rename_all = "camelCase")]
pub enum QueryError {
    #[error("syntax error at offset {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unsupported feature: {name}")]
    UnsupportedFeature { name: String },
    #[error("variable ?{name} does not occur in any pattern")]
    UnboundVariable { name: String },
    #[error("query exceeded the evaluation budget of {budget} intermediate bindings")]
    QueryTooExpensive { budget: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternTerm {
    Var(String),
    Term(Term),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriplePattern {
    pub subject: PatternTerm,
    pub predicate: PatternTerm,
    pub object: PatternTerm,
}

impl TriplePattern {
    pub fn terms(&self) -> [&PatternTerm; 3] {
        [&self.subject, &self.predicate, &self.object]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

/// Compiled `REGEX` pattern.
#[derive(Debug, Clone)]
pub struct Regex {
    pub pattern: String,
    pub case_insensitive: bool,
    compiled: regex::Regex,
}

impl Regex {
    fn new(pattern: String, case_insensitive: bool, compiled: regex::Regex) -> Regex {
        Regex {
            pattern,
            case_insensitive,
            compiled,
        }
    }

    pub fn is_match(&self, text: &str) -> bool {
        self.compiled.is_match(text)
    }
}

impl PartialEq for Regex {
    fn eq(&self, other: &Self) -> bool {
        self.pattern == other.pattern && self.case_insensitive == other.case_insensitive
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Var(String),
    Const(Term),
    Or(Box<Expr>, Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    Compare(CmpOp, Box<Expr>, Box<Expr>),
    Regex(Box<Expr>, Regex),
    Contains(Box<Expr>, Box<Expr>),
    Lcase(Box<Expr>),
}

impl Expr {
    /// Variables mentioned, in order of appearance.
    pub fn variables(&self, out: &mut Vec<String>) {
        match self {
            Expr::Var(v) => out.push(v.clone()),
            Expr::Const(_) => {}
            Expr::Not(e) | Expr::Lcase(e) | Expr::Regex(e, _) => e.variables(out),
            Expr::Or(a, b) | Expr::And(a, b) | Expr::Compare(_, a, b) | Expr::Contains(a, b) => {
                a.variables(out);
                b.variables(out);
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Group {
    pub patterns: Vec<TriplePattern>,
    pub filters: Vec<Expr>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderKey {
    pub var: String,
    pub descending: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    /// Prefixes declared in the query text.
    pub prefixes: BTreeMap<String, String>,
    pub distinct: bool,
    /// `None` for `SELECT *`.
    pub select: Option<Vec<String>>,
    pub required: Group,
    pub optionals: Vec<Group>,
    pub order_by: Vec<OrderKey>,
    pub limit: Option<usize>,
    pub offset: Option<usize>,
}

impl Query {
    /// Variables of all triple patterns in order of first appearance.
    pub fn pattern_variables(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        let groups = std::iter::once(&self.required).chain(self.optionals.iter());
        for g in groups {
            for p in &g.patterns {
                for t in p.terms() {
                    if let PatternTerm::Var(v) = t {
                        if !out.contains(&v.as_str()) {
                            out.push(v);
                        }
                    }
                }
            }
        }
        out
    }

    /// Output columns.
    pub fn projection(&self) -> Vec<String> {
        match &self.select {
            Some(vars) => vars.clone(),
            None => self
                .pattern_variables()
                .into_iter()
                .map(str::to_string)
                .collect(),
        }
    }
}

pub fn parse_query(text: &str) -> Result<Query, QueryError> {
    parser::parse(text)
}

/// One solution: variable name (without `?`) to term.
pub type Binding = BTreeMap<String, Term>;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QueryResults {
    pub vars: Vec<String>,
    pub bindings: Vec<Binding>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocab;

    #[test]
    fn parses_typed_listing() {
        let q = parse_query("SELECT ?s WHERE { ?s a <http://schema.org/Event> } LIMIT 10").unwrap();
        assert_eq!(q.required.patterns.len(), 1);
        assert_eq!(q.limit, Some(10));
        assert_eq!(
            q.required.patterns[0].predicate,
            PatternTerm::Term(Term::iri(vocab::RDF_TYPE))
        );
    }

    #[test]
    fn unsupported_features_are_named() {
        let cases = [
            ("SELECT ?s WHERE { ?s ?p ?o } GROUP BY ?s", "GROUP BY"),
            (
                "SELECT ?s WHERE { { ?s ?p ?o } UNION { ?s ?p ?o } }",
                "nested group patterns",
            ),
            ("SELECT ?s WHERE { ?s ?p ?o UNION }", "UNION"),
            (
                "SELECT (COUNT(?s) AS ?n) WHERE { ?s ?p ?o }",
                "SELECT expressions",
            ),
            (
                "SELECT ?s WHERE { ?s <http://ex/a>/<http://ex/b> ?o }",
                "property paths",
            ),
            (
                "SELECT ?s WHERE { ?s ?p ?o OPTIONAL { ?s ?q ?r OPTIONAL { ?r ?x ?y } } }",
                "nested OPTIONAL",
            ),
            ("SELECT ?s WHERE { GRAPH ?g { ?s ?p ?o } }", "GRAPH"),
            (
                "SELECT ?s WHERE { ?s ?p ?o FILTER(STRLEN(?o) > 2) }",
                "function STRLEN",
            ),
            ("ASK { ?s ?p ?o }", "ASK"),
        ];
        for (text, name) in cases {
            match parse_query(text) {
                Err(QueryError::UnsupportedFeature { name: got }) => {
                    assert_eq!(got, name, "{text}")
                }
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn projection_must_be_bound() {
        assert_eq!(
            parse_query("SELECT ?x WHERE { ?s ?p ?o }"),
            Err(QueryError::UnboundVariable { name: "x".into() })
        );
        assert!(matches!(
            parse_query("SELECT ?s WHERE { ?s ?p ?o FILTER(?z = 1) }"),
            Err(QueryError::UnboundVariable { .. })
        ));
    }

    #[test]
    fn syntax_errors_have_positions() {
        match parse_query("SELECT ?s WHERE { ?s ?p }") {
            Err(QueryError::Syntax { position, .. }) => assert_eq!(position, 24),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_query("SELECT ?s WHERE { ?s nope:x ?o }"),
            Err(QueryError::Syntax { .. })
        ));
        assert!(matches!(
            parse_query("SELECT ?s WHERE { ?s ?p ?o } LIMIT -1"),
            Err(QueryError::Syntax { .. })
        ));
    }

    #[test]
    fn full_grammar() {
        let q = parse_query(
            r#"PREFIX ex: <http://ex/>
               # comment
               SELECT DISTINCT * WHERE {
                 ?s a schema:Event ; ex:name ?n , "x"@DE ; ex:n 5 .
                 OPTIONAL { ?s ex:d ?d . FILTER(?d >= 2.5e0) }
                 FILTER (REGEX(?n, "^Fe", "i") && !CONTAINS(LCASE(?n), "x") || ?s != ex:a)
               } ORDER BY DESC(?n) ?s OFFSET 2 LIMIT 3"#,
        )
        .unwrap();
        assert!(q.distinct);
        assert_eq!(q.required.patterns.len(), 4);
        assert_eq!(q.optionals.len(), 1);
        assert_eq!(q.optionals[0].filters.len(), 1);
        assert_eq!(q.projection(), vec!["s", "n", "d"]);
        assert_eq!(q.order_by.len(), 2);
        assert!(q.order_by[0].descending);
        assert_eq!((q.offset, q.limit), (Some(2), Some(3)));
        assert_eq!(
            q.required.patterns[2].object,
            PatternTerm::Term(Term::lang("x", "de"))
        );
    }
}
