use serde_json::{json, Map, Value};

use super::QueryResults;
use crate::rdf::Term;
use crate::vocab;

/// SPARQL 1.1 Query Results JSON.
pub fn results_to_json(results: &QueryResults) -> String {
    let bindings: Vec<Value> = results
        .bindings
        .iter()
        .map(|b| {
            let mut row = Map::new();
            for var in &results.vars {
                if let Some(t) = b.get(var) {
                    row.insert(var.clone(), term_json(t));
                }
            }
            Value::Object(row)
        })
        .collect();
    json!({"head": {"vars": results.vars}, "results": {"bindings": bindings}}).to_string()
}

fn term_json(t: &Term) -> Value {
    match t {
        Term::Iri(iri) => json!({"type": "uri", "value": iri}),
        Term::BlankNode(label) => json!({"type": "bnode", "value": label}),
        Term::Literal(l) => {
            let mut obj = Map::new();
            obj.insert("type".into(), json!("literal"));
            obj.insert("value".into(), json!(l.lexical()));
            if let Some(lang) = l.language() {
                obj.insert("xml:lang".into(), json!(lang));
            } else if l.datatype() != vocab::XSD_STRING {
                obj.insert("datatype".into(), json!(l.datatype()));
            }
            Value::Object(obj)
        }
    }
}

/// SPARQL 1.1 Query Results CSV: header of variable names, one row per
/// solution, unbound cells empty.
pub fn results_to_csv(results: &QueryResults) -> String {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(Vec::new());
    writer
        .write_record(&results.vars)
        .expect("writing to memory");
    for b in &results.bindings {
        let row: Vec<String> = results
            .vars
            .iter()
            .map(|v| match b.get(v) {
                None => String::new(),
                Some(Term::Iri(iri)) => iri.clone(),
                Some(Term::BlankNode(label)) => format!("_:{label}"),
                Some(Term::Literal(l)) => l.lexical().to_string(),
            })
            .collect();
        writer.write_record(&row).expect("writing to memory");
    }
    String::from_utf8(writer.into_inner().expect("flush to memory")).expect("csv output is UTF-8")
}
