use std::collections::{BTreeMap, BTreeSet};

use super::{CmpOp, Expr, Group, OrderKey, PatternTerm, Query, QueryError, TriplePattern};
use crate::rdf::{Literal, Term};
use crate::vocab;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Var(String),
    Iri(String),
    PName(String, String),
    Blank(String),
    Str(String),
    LangTag(String),
    Number(String),
    DoubleCaret,
    Punct(&'static str),
    Other(char),
    Eof,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn syntax(&self, at: usize, message: impl Into<String>) -> QueryError {
        QueryError::Syntax {
            position: at,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        loop {
            let rest = self.rest();
            let trimmed = rest.trim_start();
            self.pos += rest.len() - trimmed.len();
            if trimmed.starts_with('#') {
                let end = trimmed.find('\n').unwrap_or(trimmed.len());
                self.pos += end;
            } else {
                break;
            }
        }
    }

    fn tokens(mut self) -> Result<Vec<(usize, Tok)>, QueryError> {
        let mut out = Vec::new();
        loop {
            self.skip_ws();
            let at = self.pos;
            let rest = self.rest();
            let Some(c) = rest.chars().next() else {
                out.push((at, Tok::Eof));
                return Ok(out);
            };
            let tok = match c {
                '?' | '$' => {
                    let name: String = rest[1..]
                        .chars()
                        .take_while(|c| c.is_alphanumeric() || *c == '_')
                        .collect();
                    if name.is_empty() {
                        return Err(self.syntax(at, "empty variable name"));
                    }
                    self.pos += 1 + name.len();
                    Tok::Var(name)
                }
                '<' => {
                    let body: String = rest[1..]
                        .chars()
                        .take_while(|c| {
                            !matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\')
                                && *c > ' '
                        })
                        .collect();
                    if rest[1 + body.len()..].starts_with('>') {
                        self.pos += body.len() + 2;
                        Tok::Iri(body)
                    } else if rest.starts_with("<=") {
                        self.pos += 2;
                        Tok::Punct("<=")
                    } else {
                        self.pos += 1;
                        Tok::Punct("<")
                    }
                }
                '"' | '\'' => self.string(c)?,
                '@' => {
                    let tag: String = rest[1..]
                        .chars()
                        .take_while(|c| c.is_ascii_alphanumeric() || *c == '-')
                        .collect();
                    if tag.is_empty() {
                        return Err(self.syntax(at, "empty language tag"));
                    }
                    self.pos += 1 + tag.len();
                    Tok::LangTag(tag)
                }
                '^' if rest.starts_with("^^") => {
                    self.pos += 2;
                    Tok::DoubleCaret
                }
                '0'..='9' | '.'
                    if c != '.' || rest[1..].starts_with(|d: char| d.is_ascii_digit()) =>
                {
                    self.number()
                }
                '+' | '-' if rest[1..].starts_with(|d: char| d.is_ascii_digit() || d == '.') => {
                    self.number()
                }
                '_' if rest.starts_with("_:") => {
                    let label: String = rest[2..]
                        .chars()
                        .take_while(|c| c.is_alphanumeric() || *c == '_' || *c == '-')
                        .collect();
                    self.pos += 2 + label.len();
                    Tok::Blank(label)
                }
                c if c.is_alphabetic() || c == ':' || c == '_' => self.word_or_pname(),
                _ => {
                    for p in [
                        "&&", "||", "!=", ">=", "{", "}", "(", ")", ".", ";", ",", "*", "=", ">",
                        "!",
                    ] {
                        if rest.starts_with(p) {
                            self.pos += p.len();
                            out.push((at, Tok::Punct(p)));
                            break;
                        }
                    }
                    if self.pos != at {
                        continue;
                    }
                    self.pos += c.len_utf8();
                    Tok::Other(c)
                }
            };
            out.push((at, tok));
        }
    }

    fn string(&mut self, quote: char) -> Result<Tok, QueryError> {
        let at = self.pos;
        let long: String = std::iter::repeat_n(quote, 3).collect();
        let is_long = self.rest().starts_with(&long);
        self.pos += if is_long { 3 } else { 1 };
        let mut value = String::new();
        loop {
            let rest = self.rest();
            if is_long && rest.starts_with(&long) {
                self.pos += 3;
                return Ok(Tok::Str(value));
            }
            let Some(c) = rest.chars().next() else {
                return Err(self.syntax(at, "unterminated string"));
            };
            self.pos += c.len_utf8();
            match c {
                c if c == quote && !is_long => return Ok(Tok::Str(value)),
                '\n' | '\r' if !is_long => return Err(self.syntax(at, "line break in string")),
                '\\' => {
                    let Some(e) = self.rest().chars().next() else {
                        return Err(self.syntax(at, "unterminated string"));
                    };
                    self.pos += e.len_utf8();
                    match e {
                        't' => value.push('\t'),
                        'n' => value.push('\n'),
                        'r' => value.push('\r'),
                        'b' => value.push('\u{8}'),
                        'f' => value.push('\u{c}'),
                        '"' | '\'' | '\\' => value.push(e),
                        'u' | 'U' => {
                            let len = if e == 'u' { 4 } else { 8 };
                            let hex = self
                                .rest()
                                .get(..len)
                                .ok_or_else(|| self.syntax(at, "short unicode escape"))?;
                            let ch = u32::from_str_radix(hex, 16)
                                .ok()
                                .and_then(char::from_u32)
                                .ok_or_else(|| self.syntax(at, "invalid unicode escape"))?;
                            self.pos += len;
                            value.push(ch);
                        }
                        other => {
                            return Err(
                                self.syntax(self.pos - 1, format!("invalid escape '\\{other}'"))
                            )
                        }
                    }
                }
                c => value.push(c),
            }
        }
    }

    fn number(&mut self) -> Tok {
        let rest = self.rest();
        let mut len = 0;
        let bytes = rest.as_bytes();
        if matches!(bytes.first(), Some(b'+') | Some(b'-')) {
            len += 1;
        }
        while len < bytes.len() && bytes[len].is_ascii_digit() {
            len += 1;
        }
        if len < bytes.len()
            && bytes[len] == b'.'
            && bytes.get(len + 1).is_some_and(u8::is_ascii_digit)
        {
            len += 1;
            while len < bytes.len() && bytes[len].is_ascii_digit() {
                len += 1;
            }
        }
        if len < bytes.len() && (bytes[len] == b'e' || bytes[len] == b'E') {
            let mut exp = len + 1;
            if matches!(bytes.get(exp), Some(b'+') | Some(b'-')) {
                exp += 1;
            }
            if bytes.get(exp).is_some_and(u8::is_ascii_digit) {
                len = exp;
                while len < bytes.len() && bytes[len].is_ascii_digit() {
                    len += 1;
                }
            }
        }
        self.pos += len;
        Tok::Number(rest[..len].to_string())
    }

    fn word_or_pname(&mut self) -> Tok {
        let rest = self.rest();
        let name_char = |c: char| c.is_alphanumeric() || c == '_' || c == '-';
        let prefix: String = rest.chars().take_while(|c| name_char(*c)).collect();
        let after = &rest[prefix.len()..];
        if let Some(local_src) = after.strip_prefix(':') {
            let mut local: String = local_src
                .chars()
                .take_while(|c| name_char(*c) || *c == '.')
                .collect();
            while local.ends_with('.') {
                local.pop();
            }
            self.pos += prefix.len() + 1 + local.len();
            Tok::PName(prefix, local)
        } else {
            self.pos += prefix.len();
            Tok::Word(prefix)
        }
    }
}

const UNSUPPORTED_WORDS: &[(&str, &str)] = &[
    ("UNION", "UNION"),
    ("GROUP", "GROUP BY"),
    ("HAVING", "HAVING"),
    ("MINUS", "MINUS"),
    ("BIND", "BIND"),
    ("VALUES", "VALUES"),
    ("SERVICE", "SERVICE"),
    ("GRAPH", "GRAPH"),
    ("FROM", "FROM"),
    ("EXISTS", "EXISTS"),
    ("NOT", "NOT EXISTS"),
    ("BASE", "BASE"),
    ("REDUCED", "REDUCED"),
    ("CONSTRUCT", "CONSTRUCT"),
    ("ASK", "ASK"),
    ("DESCRIBE", "DESCRIBE"),
    ("INSERT", "UPDATE"),
    ("DELETE", "UPDATE"),
    ("LOAD", "UPDATE"),
    ("CLEAR", "UPDATE"),
    ("COUNT", "aggregates"),
    ("SUM", "aggregates"),
    ("AVG", "aggregates"),
    ("MIN", "aggregates"),
    ("MAX", "aggregates"),
    ("SAMPLE", "aggregates"),
    ("GROUP_CONCAT", "aggregates"),
];

pub(super) fn parse(text: &str) -> Result<Query, QueryError> {
    let tokens = Lexer { src: text, pos: 0 }.tokens()?;
    let mut p = Parser {
        tokens,
        i: 0,
        prefixes: vocab::well_known_prefixes()
            .into_iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect(),
        declared: BTreeMap::new(),
    };
    p.query()
}

struct Parser {
    tokens: Vec<(usize, Tok)>,
    i: usize,
    prefixes: BTreeMap<String, String>,
    declared: BTreeMap<String, String>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.i].1
    }

    fn position(&self) -> usize {
        self.tokens[self.i].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.tokens[self.i].1.clone();
        if self.i + 1 < self.tokens.len() {
            self.i += 1;
        }
        t
    }

    fn error(&self, message: impl Into<String>) -> QueryError {
        QueryError::Syntax {
            position: self.position(),
            message: message.into(),
        }
    }

    fn is_word(&self, word: &str) -> bool {
        matches!(self.peek(), Tok::Word(w) if w.eq_ignore_ascii_case(word))
    }

    fn eat_word(&mut self, word: &str) -> bool {
        if self.is_word(word) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> Result<(), QueryError> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{p}'")))
        }
    }

    /// Raises UnsupportedFeature for keywords outside the subset.
    fn check_unsupported(&self) -> Result<(), QueryError> {
        if let Tok::Word(w) = self.peek() {
            let upper = w.to_ascii_uppercase();
            if let Some((_, name)) = UNSUPPORTED_WORDS.iter().find(|(k, _)| *k == upper) {
                return Err(QueryError::UnsupportedFeature {
                    name: name.to_string(),
                });
            }
        }
        Ok(())
    }

    fn query(&mut self) -> Result<Query, QueryError> {
        loop {
            self.check_unsupported()?;
            if !self.eat_word("PREFIX") {
                break;
            }
            let at = self.position();
            let Tok::PName(prefix, local) = self.bump() else {
                return Err(QueryError::Syntax {
                    position: at,
                    message: "expected prefix name".into(),
                });
            };
            if !local.is_empty() {
                return Err(QueryError::Syntax {
                    position: at,
                    message: "prefix declaration must end with ':'".into(),
                });
            }
            let Tok::Iri(iri) = self.bump() else {
                return Err(QueryError::Syntax {
                    position: at,
                    message: "expected IRI after prefix".into(),
                });
            };
            self.prefixes.insert(prefix.clone(), iri.clone());
            self.declared.insert(prefix, iri);
        }
        self.check_unsupported()?;
        if !self.eat_word("SELECT") {
            return Err(self.error("expected SELECT"));
        }
        let distinct = self.eat_word("DISTINCT");
        self.check_unsupported()?;
        let select = if self.eat_punct("*") {
            None
        } else {
            let mut vars = Vec::new();
            loop {
                match self.peek() {
                    Tok::Var(v) => {
                        let v = v.clone();
                        self.bump();
                        vars.push(v);
                    }
                    Tok::Punct("(") => {
                        return Err(QueryError::UnsupportedFeature {
                            name: "SELECT expressions".into(),
                        })
                    }
                    _ => break,
                }
            }
            if vars.is_empty() {
                return Err(self.error("expected variables or '*' after SELECT"));
            }
            Some(vars)
        };
        self.check_unsupported()?;
        self.eat_word("WHERE");
        self.expect_punct("{")?;
        let (required, optionals) = self.group_body(false)?;

        let mut order_by = Vec::new();
        let mut limit = None;
        let mut offset = None;
        loop {
            self.check_unsupported()?;
            if self.eat_word("ORDER") {
                if !self.eat_word("BY") {
                    return Err(self.error("expected BY after ORDER"));
                }
                loop {
                    let descending = if self.eat_word("DESC") {
                        Some(true)
                    } else if self.eat_word("ASC") {
                        Some(false)
                    } else {
                        None
                    };
                    let key = match (descending, self.peek().clone()) {
                        (Some(d), Tok::Punct("(")) => {
                            self.bump();
                            let Tok::Var(v) = self.bump() else {
                                return Err(QueryError::UnsupportedFeature {
                                    name: "ORDER BY expressions".into(),
                                });
                            };
                            self.expect_punct(")")?;
                            OrderKey {
                                var: v,
                                descending: d,
                            }
                        }
                        (None, Tok::Var(v)) => {
                            self.bump();
                            OrderKey {
                                var: v,
                                descending: false,
                            }
                        }
                        (None, Tok::Punct("(")) => {
                            return Err(QueryError::UnsupportedFeature {
                                name: "ORDER BY expressions".into(),
                            })
                        }
                        (Some(_), _) => return Err(self.error("expected '(' after ASC/DESC")),
                        (None, _) => break,
                    };
                    order_by.push(key);
                }
                if order_by.is_empty() {
                    return Err(self.error("expected ordering condition"));
                }
            } else if self.eat_word("LIMIT") {
                limit = Some(self.integer()?);
            } else if self.eat_word("OFFSET") {
                offset = Some(self.integer()?);
            } else {
                break;
            }
        }
        if *self.peek() != Tok::Eof {
            self.check_unsupported()?;
            return Err(self.error("unexpected trailing input"));
        }
        let query = Query {
            prefixes: self.declared.clone(),
            distinct,
            select,
            required,
            optionals,
            order_by,
            limit,
            offset,
        };
        check_scope(&query)?;
        Ok(query)
    }

    fn integer(&mut self) -> Result<usize, QueryError> {
        match self.bump() {
            Tok::Number(n) if n.chars().all(|c| c.is_ascii_digit()) => {
                n.parse().map_err(|_| self.error("integer out of range"))
            }
            _ => Err(self.error("expected a non-negative integer")),
        }
    }

    /// Body of a `{ ... }` group after the opening brace. Optional groups
    /// are returned separately; nesting is rejected.
    fn group_body(&mut self, nested: bool) -> Result<(Group, Vec<Group>), QueryError> {
        let mut group = Group::default();
        let mut optionals = Vec::new();
        loop {
            self.check_unsupported()?;
            if self.eat_punct("}") {
                return Ok((group, optionals));
            }
            if self.eat_punct(".") {
                continue;
            }
            if self.is_punct("{") {
                return Err(QueryError::UnsupportedFeature {
                    name: "nested group patterns".into(),
                });
            }
            if self.eat_word("OPTIONAL") {
                if nested {
                    return Err(QueryError::UnsupportedFeature {
                        name: "nested OPTIONAL".into(),
                    });
                }
                self.expect_punct("{")?;
                let (inner, _) = self.group_body(true)?;
                optionals.push(inner);
                continue;
            }
            if self.eat_word("FILTER") {
                let expr = if self.is_punct("(") {
                    self.bump();
                    let e = self.expr()?;
                    self.expect_punct(")")?;
                    e
                } else {
                    self.primary()?
                };
                group.filters.push(expr);
                continue;
            }
            if *self.peek() == Tok::Eof {
                return Err(self.error("unterminated group"));
            }
            self.triples_block(&mut group.patterns)?;
        }
    }

    fn triples_block(&mut self, out: &mut Vec<TriplePattern>) -> Result<(), QueryError> {
        let subject = self.node(false)?;
        loop {
            let predicate = self.verb()?;
            loop {
                let object = self.node(true)?;
                out.push(TriplePattern {
                    subject: subject.clone(),
                    predicate: predicate.clone(),
                    object,
                });
                if !self.eat_punct(",") {
                    break;
                }
            }
            if self.eat_punct(";") {
                while self.eat_punct(";") {}
                if self.is_punct(".") || self.is_punct("}") {
                    break;
                }
                continue;
            }
            break;
        }
        if !self.is_punct("}") && !self.eat_punct(".") {
            if let Tok::Other(c) = self.peek() {
                if matches!(c, '/' | '|' | '^' | '+' | '?') {
                    return Err(QueryError::UnsupportedFeature {
                        name: "property paths".into(),
                    });
                }
            }
            self.check_unsupported()?;
            if !self.is_word("OPTIONAL") && !self.is_word("FILTER") {
                return Err(self.error("expected '.', ';', ',' or '}'"));
            }
        }
        Ok(())
    }

    fn verb(&mut self) -> Result<PatternTerm, QueryError> {
        if self.eat_word("a") {
            return Ok(PatternTerm::Term(Term::iri(vocab::RDF_TYPE)));
        }
        if matches!(
            self.peek(),
            Tok::Other('^') | Tok::Punct("!") | Tok::Punct("(")
        ) {
            return Err(QueryError::UnsupportedFeature {
                name: "property paths".into(),
            });
        }
        let t = self.node(false)?;
        if let PatternTerm::Term(term) = &t {
            if !term.is_iri() {
                return Err(self.error("predicate must be an IRI or variable"));
            }
        }
        if matches!(self.peek(), Tok::Other('/' | '|' | '+') | Tok::Punct("*")) {
            return Err(QueryError::UnsupportedFeature {
                name: "property paths".into(),
            });
        }
        Ok(t)
    }

    /// Variable, IRI, prefixed name, or (in object position) literal.
    fn node(&mut self, allow_literal: bool) -> Result<PatternTerm, QueryError> {
        match self.peek().clone() {
            Tok::Var(v) => {
                self.bump();
                Ok(PatternTerm::Var(v))
            }
            Tok::Blank(_) | Tok::Punct("[") => Err(QueryError::UnsupportedFeature {
                name: "blank nodes in patterns".into(),
            }),
            Tok::Other('[') => Err(QueryError::UnsupportedFeature {
                name: "blank nodes in patterns".into(),
            }),
            Tok::Punct("(") => Err(QueryError::UnsupportedFeature {
                name: "collections".into(),
            }),
            _ => {
                let term = self.term()?;
                if term.is_literal() && !allow_literal {
                    return Err(self.error("literal not allowed here"));
                }
                Ok(PatternTerm::Term(term))
            }
        }
    }

    fn term(&mut self) -> Result<Term, QueryError> {
        let at = self.position();
        match self.bump() {
            Tok::Iri(iri) => {
                if crate::rdf::is_absolute_iri(&iri) {
                    Ok(Term::Iri(iri))
                } else {
                    Err(QueryError::Syntax {
                        position: at,
                        message: format!("relative IRI <{iri}>"),
                    })
                }
            }
            Tok::PName(prefix, local) => self.expand(&prefix, &local, at).map(Term::Iri),
            Tok::Str(s) => match self.peek().clone() {
                Tok::LangTag(tag) => {
                    self.bump();
                    Ok(Term::Literal(Literal::new_lang(
                        s,
                        tag.to_ascii_lowercase(),
                    )))
                }
                Tok::DoubleCaret => {
                    self.bump();
                    let at = self.position();
                    let dt = match self.bump() {
                        Tok::Iri(iri) => iri,
                        Tok::PName(p, l) => self.expand(&p, &l, at)?,
                        _ => {
                            return Err(QueryError::Syntax {
                                position: at,
                                message: "expected datatype IRI".into(),
                            })
                        }
                    };
                    Ok(Term::typed(s, dt))
                }
                _ => Ok(Term::string(s)),
            },
            Tok::Number(n) => {
                let dt = if n.contains(['e', 'E']) {
                    vocab::XSD_DOUBLE
                } else if n.contains('.') {
                    vocab::XSD_DECIMAL
                } else {
                    vocab::XSD_INTEGER
                };
                Ok(Term::typed(n, dt))
            }
            Tok::Word(w) if w == "true" || w == "false" => Ok(Term::typed(w, vocab::XSD_BOOLEAN)),
            _ => Err(QueryError::Syntax {
                position: at,
                message: "expected a term".into(),
            }),
        }
    }

    fn expand(&self, prefix: &str, local: &str, at: usize) -> Result<String, QueryError> {
        self.prefixes
            .get(prefix)
            .map(|ns| format!("{ns}{local}"))
            .ok_or_else(|| QueryError::Syntax {
                position: at,
                message: format!("undeclared prefix '{prefix}:'"),
            })
    }

    // expression grammar: or > and > unary > comparison > primary

    fn expr(&mut self) -> Result<Expr, QueryError> {
        let mut left = self.and_expr()?;
        while self.eat_punct("||") {
            let right = self.and_expr()?;
            left = Expr::Or(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn and_expr(&mut self) -> Result<Expr, QueryError> {
        let mut left = self.relational()?;
        while self.eat_punct("&&") {
            let right = self.relational()?;
            left = Expr::And(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn relational(&mut self) -> Result<Expr, QueryError> {
        let left = self.unary()?;
        let op = match self.peek() {
            Tok::Punct("=") => CmpOp::Eq,
            Tok::Punct("!=") => CmpOp::Ne,
            Tok::Punct("<") => CmpOp::Lt,
            Tok::Punct("<=") => CmpOp::Le,
            Tok::Punct(">") => CmpOp::Gt,
            Tok::Punct(">=") => CmpOp::Ge,
            Tok::Word(w) if w.eq_ignore_ascii_case("IN") => {
                return Err(QueryError::UnsupportedFeature { name: "IN".into() })
            }
            Tok::Other('+' | '-' | '/') | Tok::Punct("*") => {
                return Err(QueryError::UnsupportedFeature {
                    name: "arithmetic".into(),
                })
            }
            _ => return Ok(left),
        };
        self.bump();
        let right = self.unary()?;
        Ok(Expr::Compare(op, Box::new(left), Box::new(right)))
    }

    fn unary(&mut self) -> Result<Expr, QueryError> {
        if self.eat_punct("!") {
            return Ok(Expr::Not(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, QueryError> {
        self.check_unsupported()?;
        match self.peek().clone() {
            Tok::Punct("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            Tok::Var(v) => {
                self.bump();
                Ok(Expr::Var(v))
            }
            Tok::Word(w) if !(w == "true" || w == "false") => {
                let upper = w.to_ascii_uppercase();
                self.bump();
                self.expect_punct("(")?;
                let e = match upper.as_str() {
                    "REGEX" => {
                        let text = self.expr()?;
                        self.expect_punct(",")?;
                        let at = self.position();
                        let Tok::Str(pattern) = self.bump() else {
                            return Err(QueryError::Syntax {
                                position: at,
                                message: "REGEX pattern must be a string literal".into(),
                            });
                        };
                        let mut case_insensitive = false;
                        if self.eat_punct(",") {
                            let at = self.position();
                            match self.bump() {
                                Tok::Str(f) if f.is_empty() => {}
                                Tok::Str(f) if f == "i" => case_insensitive = true,
                                _ => {
                                    return Err(QueryError::UnsupportedFeature {
                                        name: format!("REGEX flags at {at}"),
                                    })
                                }
                            }
                        }
                        let compiled = regex::RegexBuilder::new(&pattern)
                            .case_insensitive(case_insensitive)
                            .build()
                            .map_err(|e| QueryError::Syntax {
                                position: at,
                                message: format!("invalid regular expression: {e}"),
                            })?;
                        Expr::Regex(
                            Box::new(text),
                            super::Regex::new(pattern, case_insensitive, compiled),
                        )
                    }
                    "CONTAINS" => {
                        let a = self.expr()?;
                        self.expect_punct(",")?;
                        let b = self.expr()?;
                        Expr::Contains(Box::new(a), Box::new(b))
                    }
                    "LCASE" => Expr::Lcase(Box::new(self.expr()?)),
                    _ => {
                        return Err(QueryError::UnsupportedFeature {
                            name: format!("function {upper}"),
                        })
                    }
                };
                self.expect_punct(")")?;
                Ok(e)
            }
            Tok::PName(..) if matches!(self.tokens.get(self.i + 1), Some((_, Tok::Punct("(")))) => {
                Err(QueryError::UnsupportedFeature {
                    name: "extension functions".into(),
                })
            }
            _ => Ok(Expr::Const(self.term()?)),
        }
    }
}

/// Every projected, filtered or ordering variable must occur in a pattern.
fn check_scope(q: &Query) -> Result<(), QueryError> {
    let in_patterns: BTreeSet<&str> = q.pattern_variables().into_iter().collect();
    let unbound = |v: &str| QueryError::UnboundVariable {
        name: v.to_string(),
    };
    for v in q.select.iter().flatten() {
        if !in_patterns.contains(v.as_str()) {
            return Err(unbound(v));
        }
    }
    for k in &q.order_by {
        if !in_patterns.contains(k.var.as_str()) {
            return Err(unbound(&k.var));
        }
    }
    let groups = std::iter::once(&q.required).chain(q.optionals.iter());
    for g in groups {
        for f in &g.filters {
            let mut vars = Vec::new();
            f.variables(&mut vars);
            if let Some(v) = vars.into_iter().find(|v| !in_patterns.contains(v.as_str())) {
                return Err(unbound(&v));
            }
        }
    }
    Ok(())
}
