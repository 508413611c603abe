//! The line-oriented `.trs` and `.sig` text formats. Printing produces the
//! canonical form, which parses back to the same structure and prints to
//! the same bytes.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use crate::rational::{parse as parse_rational, Rational};

mod sig;
mod trs;

pub use sig::{parse_annotated_type, parse_sig, print_sig};
pub use trs::{parse_term, parse_trs, print_trs};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Number(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Arrow,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => alloc::format!("`{s}`"),
            Tok::Number(s) => alloc::format!("number `{s}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Arrow => "`->`".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub column: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic()
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

/// Splits one line into tokens, dropping a trailing `#` comment.
pub(crate) fn lex(line: &str, lineno: usize) -> Result<Vec<Token>, SyntaxError> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            ',' => Some(Tok::Comma),
            ':' => Some(Tok::Colon),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Token { tok, column });
            i += 1;
        } else if c == '#' {
            break;
        } else if c.is_whitespace() {
            i += 1;
        } else if c == '-' && chars.get(i + 1) == Some(&'>') {
            out.push(Token { tok: Tok::Arrow, column });
            i += 2;
        } else if is_ident_start(c) {
            let start = i;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                column,
            });
        } else if c.is_ascii_digit() || c == '-' || c == '/' {
            let start = i;
            i += 1;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '/') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Number(chars[start..i].iter().collect()),
                column,
            });
        } else {
            return Err(SyntaxError {
                line: lineno,
                column,
                message: alloc::format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

/// A cursor over the tokens of one line.
pub(crate) struct Cursor {
    toks: Vec<Token>,
    pos: usize,
    pub line: usize,
    end_column: usize,
}

impl Cursor {
    pub fn new(line: &str, lineno: usize) -> Result<Self, SyntaxError> {
        Ok(Cursor {
            toks: lex(line, lineno)?,
            pos: 0,
            line: lineno,
            end_column: line.chars().count() + 1,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.toks.is_empty()
    }

    pub fn column(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_column, |t| t.column)
    }

    pub fn error_at(&self, column: usize, message: impl Into<String>) -> SyntaxError {
        SyntaxError {
            line: self.line,
            column,
            message: message.into(),
        }
    }

    pub fn error(&self, message: impl Into<String>) -> SyntaxError {
        self.error_at(self.column(), message)
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn unexpected(&self, wanted: &str) -> SyntaxError {
        match self.peek() {
            Some(t) => self.error(alloc::format!("expected {wanted}, found {}", t.describe())),
            None => self.error(alloc::format!("expected {wanted}, found end of line")),
        }
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, tok: &Tok) -> Result<(), SyntaxError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    /// An identifier and its column.
    pub fn ident(&mut self) -> Result<(String, usize), SyntaxError> {
        let column = self.column();
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok((s, column))
            }
            _ => Err(self.unexpected("an identifier")),
        }
    }

    pub fn keyword(&mut self, kw: &str) -> Result<(), SyntaxError> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.unexpected(&alloc::format!("`{kw}`"))),
        }
    }

    pub fn rational(&mut self) -> Result<Rational, SyntaxError> {
        let column = self.column();
        match self.peek() {
            Some(Tok::Number(s)) => {
                let q = parse_rational(s).ok_or_else(|| self.error_at(column, alloc::format!("malformed number `{s}`")))?;
                self.pos += 1;
                Ok(q)
            }
            _ => Err(self.unexpected("a number")),
        }
    }

    pub fn natural(&mut self) -> Result<usize, SyntaxError> {
        let column = self.column();
        match self.peek() {
            Some(Tok::Number(s)) => {
                let n = s
                    .parse::<usize>()
                    .map_err(|_| self.error_at(column, alloc::format!("expected a natural number, found `{s}`")))?;
                self.pos += 1;
                Ok(n)
            }
            _ => Err(self.unexpected("a natural number")),
        }
    }

    pub fn finish(&self) -> Result<(), SyntaxError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.unexpected("end of line"))
        }
    }
}

pub(crate) fn lines(src: &str) -> impl Iterator<Item = (usize, &str)> {
    src.lines().enumerate().map(|(i, l)| (i + 1, l))
}

pub(crate) fn generic(line: usize, message: impl ToString) -> SyntaxError {
    SyntaxError {
        line,
        column: 1,
        message: message.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexing() {
        let toks = lex("rule  f(x, s(y)) -> [1 3/2] # note", 1).unwrap();
        let kinds: Vec<_> = toks.iter().map(|t| t.tok.clone()).collect();
        assert_eq!(kinds[0], Tok::Ident("rule".into()));
        assert_eq!(toks[1].column, 7);
        assert!(kinds.contains(&Tok::Arrow));
        assert!(kinds.contains(&Tok::Number("3/2".into())));
        assert_eq!(kinds.last(), Some(&Tok::RBracket));
        let err = lex("rule f(x) => x", 4).unwrap_err();
        assert_eq!((err.line, err.column), (4, 11));
        assert_eq!(lex("rev' x_1", 1).unwrap()[0].tok, Tok::Ident("rev'".into()));
    }
}
