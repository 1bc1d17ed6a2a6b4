//! Character cursor with line/column tracking and the lexical productions
//! shared by the N-Triples and Turtle parsers.

use super::term::{is_absolute_iri, is_valid_blank_label};
use super::ParseError;

pub(crate) struct Cursor<'a> {
    rest: &'a str,
    pub line: usize,
    pub column: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(text: &'a str) -> Self {
        Cursor {
            rest: text,
            line: 1,
            column: 1,
        }
    }

    pub fn peek(&self) -> Option<char> {
        self.rest.chars().next()
    }

    /// Character `n` positions ahead (0 = next).
    pub fn peek_nth(&self, n: usize) -> Option<char> {
        self.rest.chars().nth(n)
    }

    pub fn starts_with(&self, s: &str) -> bool {
        self.rest.starts_with(s)
    }

    pub fn next(&mut self) -> Option<char> {
        let c = self.rest.chars().next()?;
        self.rest = &self.rest[c.len_utf8()..];
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    pub fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.next();
            true
        } else {
            false
        }
    }

    pub fn eat_str(&mut self, s: &str) -> bool {
        if self.starts_with(s) {
            for _ in s.chars() {
                self.next();
            }
            true
        } else {
            false
        }
    }

    pub fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::syntax(self.line, self.column, message)
    }

    pub fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(match self.peek() {
                Some(found) => format!("expected '{c}', found '{found}'"),
                None => format!("expected '{c}', found end of input"),
            }))
        }
    }

    /// Skips spaces and tabs only (N-Triples statements are line-bound).
    pub fn skip_inline_ws(&mut self) {
        while matches!(self.peek(), Some(' ') | Some('\t')) {
            self.next();
        }
    }

    /// Skips all whitespace and `#` comments.
    pub fn skip_ws_and_comments(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.next();
                }
                Some('#') => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.next();
                    }
                }
                _ => break,
            }
        }
    }

    /// `<...>` with UCHAR escapes; the result must be absolute.
    pub fn read_iriref(&mut self) -> Result<String, ParseError> {
        let (line, column) = (self.line, self.column);
        self.expect('<')?;
        let mut iri = String::new();
        loop {
            match self.next() {
                None => return Err(ParseError::syntax(line, column, "unterminated IRI")),
                Some('>') => break,
                Some('\\') => iri.push(self.read_uchar()?),
                Some(c)
                    if (c as u32) <= 0x20
                        || matches!(c, '<' | '"' | '{' | '}' | '|' | '^' | '`') =>
                {
                    return Err(self.error(format!("invalid character {c:?} in IRI")));
                }
                Some(c) => iri.push(c),
            }
        }
        if !is_absolute_iri(&iri) {
            return Err(ParseError::syntax(
                line,
                column,
                format!("relative IRI <{iri}> not allowed"),
            ));
        }
        Ok(iri)
    }

    /// After a backslash: `uXXXX` or `UXXXXXXXX`.
    fn read_uchar(&mut self) -> Result<char, ParseError> {
        let len = match self.next() {
            Some('u') => 4,
            Some('U') => 8,
            _ => return Err(self.error("invalid escape in IRI")),
        };
        self.read_hex(len)
    }

    fn read_hex(&mut self, len: usize) -> Result<char, ParseError> {
        let mut value = 0u32;
        for _ in 0..len {
            let digit = self
                .next()
                .and_then(|c| c.to_digit(16))
                .ok_or_else(|| self.error("invalid hex escape"))?;
            value = value * 16 + digit;
        }
        char::from_u32(value).ok_or_else(|| self.error("escape is not a valid code point"))
    }

    /// A quoted string. `long` forms (`"""`/`'''`) are only allowed when
    /// `allow_long_and_single` is set (Turtle).
    pub fn read_string(&mut self, allow_long_and_single: bool) -> Result<String, ParseError> {
        let (line, column) = (self.line, self.column);
        let quote = match self.peek() {
            Some('"') => '"',
            Some('\'') if allow_long_and_single => '\'',
            _ => return Err(self.error("expected string literal")),
        };
        let long = allow_long_and_single && {
            let triple: String = std::iter::repeat_n(quote, 3).collect();
            self.starts_with(&triple)
        };
        if long {
            self.next();
            self.next();
            self.next();
        } else {
            self.next();
        }
        let mut out = String::new();
        loop {
            if !long && matches!(self.peek(), Some('\n' | '\r')) {
                return Err(self.error("line break in single-line string"));
            }
            match self.next() {
                None => return Err(ParseError::syntax(line, column, "unterminated string")),
                Some(c) if c == quote => {
                    if !long {
                        break;
                    }
                    if self.peek() == Some(quote) && self.peek_nth(1) == Some(quote) {
                        // a run of more than three quotes ends with the last three
                        if self.peek_nth(2) == Some(quote) {
                            out.push(c);
                            continue;
                        }
                        self.next();
                        self.next();
                        break;
                    }
                    out.push(c);
                }
                Some('\\') => out.push(self.read_echar()?),
                Some(c) => out.push(c),
            }
        }
        Ok(out)
    }

    fn read_echar(&mut self) -> Result<char, ParseError> {
        match self.next() {
            Some('t') => Ok('\t'),
            Some('b') => Ok('\u{8}'),
            Some('n') => Ok('\n'),
            Some('r') => Ok('\r'),
            Some('f') => Ok('\u{c}'),
            Some('"') => Ok('"'),
            Some('\'') => Ok('\''),
            Some('\\') => Ok('\\'),
            Some('u') => self.read_hex(4),
            Some('U') => self.read_hex(8),
            _ => Err(self.error("invalid string escape")),
        }
    }

    /// After `@`: `[a-zA-Z]+ ('-' [a-zA-Z0-9]+)*`.
    pub fn read_langtag(&mut self) -> Result<String, ParseError> {
        let mut tag = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphabetic() {
                tag.push(c);
                self.next();
            } else {
                break;
            }
        }
        if tag.is_empty() {
            return Err(self.error("empty language tag"));
        }
        while self.peek() == Some('-')
            && self.peek_nth(1).is_some_and(|c| c.is_ascii_alphanumeric())
        {
            self.next();
            tag.push('-');
            while let Some(c) = self.peek() {
                if c.is_ascii_alphanumeric() {
                    tag.push(c);
                    self.next();
                } else {
                    break;
                }
            }
        }
        Ok(tag)
    }

    /// After `_:`: the raw label characters.
    pub fn read_blank_label(&mut self) -> Result<String, ParseError> {
        let mut label = String::new();
        while let Some(c) = self.peek() {
            let continues = c.is_alphanumeric()
                || matches!(c, '_' | '-')
                || (c == '.'
                    && self
                        .peek_nth(1)
                        .is_some_and(|n| n.is_alphanumeric() || matches!(n, '_' | '-')));
            if continues {
                label.push(c);
                self.next();
            } else {
                break;
            }
        }
        if label.is_empty() {
            return Err(self.error("empty blank node label"));
        }
        Ok(label)
    }
}

/// Labels outside `[A-Za-z0-9_]+` are hex-encoded into that alphabet.
pub(crate) fn normalize_blank_label(raw: &str) -> String {
    if is_valid_blank_label(raw) {
        raw.to_string()
    } else {
        let mut out = String::from("h");
        for b in raw.bytes() {
            out.push_str(&format!("{b:02x}"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_iri_with_uchar() {
        let mut c = Cursor::new("<http://ex/a\\u0020b>");
        assert_eq!(c.read_iriref().unwrap(), "http://ex/a b");
    }

    #[test]
    fn rejects_relative_iri() {
        let mut c = Cursor::new("<a/b>");
        assert!(c.read_iriref().is_err());
    }

    #[test]
    fn reads_long_string() {
        let mut c = Cursor::new("\"\"\"a\n\"b\"\"\"\" rest");
        assert_eq!(c.read_string(true).unwrap(), "a\n\"b\"");
        assert!(c.starts_with(" rest"));
    }

    #[test]
    fn tracks_positions() {
        let mut c = Cursor::new("ab\ncd");
        c.next();
        c.next();
        c.next();
        assert_eq!((c.line, c.column), (2, 1));
    }

    #[test]
    fn normalizes_labels() {
        assert_eq!(normalize_blank_label("b0"), "b0");
        assert_eq!(normalize_blank_label("a-b"), "h612d62");
    }
}
