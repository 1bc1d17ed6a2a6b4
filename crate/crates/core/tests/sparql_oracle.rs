//! Query evaluation against the nested-loop reference evaluator.

use std::collections::HashSet;

use proptest::prelude::*;
use tkg_core::sparql::{evaluate, parse_query, QueryError};
use tkg_testkit::sparql::{random_query, OracleQuery};
use tkg_testkit::{graphs, rng, sparql};

#[test]
fn thousand_random_queries_match_reference() {
    let mut mismatches = Vec::new();
    for case in 0..1000 {
        let mut r = rng("sparql-oracle", case);
        let store = graphs::random_store(&mut r, 300);
        let q = random_query(&mut r);
        let text = q.render();
        let parsed = parse_query(&text).unwrap_or_else(|e| panic!("case {case}: {e}\n{text}"));
        let got = evaluate(&store, &parsed).unwrap_or_else(|e| panic!("case {case}: {e}\n{text}"));
        assert_eq!(got.vars, q.projection(), "case {case}\n{text}");
        let want = sparql::evaluate(&store, &q);
        if got.bindings != want {
            mismatches.push(format!(
                "case {case}: got {} rows, want {}\n{text}",
                got.bindings.len(),
                want.len()
            ));
        }
    }
    assert!(
        mismatches.is_empty(),
        "{} mismatches\n{}",
        mismatches.len(),
        mismatches.join("\n")
    );
}

fn permuted(q: &OracleQuery, shift: usize) -> OracleQuery {
    let mut p = q.clone();
    let n = p.required.len();
    p.required.rotate_left(shift % n);
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pattern_order_does_not_change_results(seed in any::<u64>(), shift in 0usize..3) {
        let mut r = rng("join-order", seed);
        let store = graphs::random_store(&mut r, 200);
        let mut q = random_query(&mut r);
        q.limit = None;
        q.offset = None;
        q.select = None;
        let run = |q: &OracleQuery| {
            let mut rows = evaluate(&store, &parse_query(&q.render()).unwrap()).unwrap().bindings;
            rows.sort();
            rows
        };
        prop_assert_eq!(run(&q), run(&permuted(&q, shift)));
    }

    #[test]
    fn limit_results_are_prefixes(seed in any::<u64>(), n in 0usize..10, k in 0usize..10) {
        let mut r = rng("limit-prefix", seed);
        let store = graphs::random_store(&mut r, 200);
        let mut q = random_query(&mut r);
        q.offset = None;
        q.limit = Some(n);
        let short = evaluate(&store, &parse_query(&q.render()).unwrap()).unwrap().bindings;
        q.limit = Some(n + k);
        let long = evaluate(&store, &parse_query(&q.render()).unwrap()).unwrap().bindings;
        prop_assert_eq!(&long[..short.len()], &short[..]);
    }

    #[test]
    fn distinct_rows_are_unique(seed in any::<u64>()) {
        let mut r = rng("distinct", seed);
        let store = graphs::random_store(&mut r, 200);
        let mut q = random_query(&mut r);
        q.distinct = true;
        let rows = evaluate(&store, &parse_query(&q.render()).unwrap()).unwrap().bindings;
        let unique: HashSet<_> = rows.iter().collect();
        prop_assert_eq!(unique.len(), rows.len());
    }
}

#[test]
fn cross_products_hit_the_budget() {
    let store = graphs::random_store(&mut rng("budget", 0), 300);
    let q = parse_query("SELECT * WHERE { ?a ?b ?c . ?d ?e ?f . ?g ?h ?i }").unwrap();
    assert!(matches!(
        evaluate(&store, &q),
        Err(QueryError::QueryTooExpensive { .. })
    ));
}
