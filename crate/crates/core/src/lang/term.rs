//! Shared tokenizer and call-term reader.

use num::{BigInt, BigRational, Zero};

use super::ParseError;
use crate::point::{Point, PointSeq};

#[derive(Clone, Debug)]
pub(crate) enum TermKind {
    Call(String, Vec<Term>),
    Points(PointSeq),
    Num(BigRational),
    Ident(String),
}

#[derive(Clone, Debug)]
pub(crate) struct Term {
    pub kind: TermKind,
    pub line: usize,
    pub col: usize,
}

pub(crate) struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col0: usize,
    _src: &'a str,
}

impl<'a> Cursor<'a> {
    /// `col0` is the 1-based column of `src`'s first character in its line.
    pub fn new(src: &'a str, line: usize, col0: usize) -> Cursor<'a> {
        Cursor { chars: src.chars().collect(), pos: 0, line, col0, _src: src }
    }

    pub fn col(&self) -> usize {
        self.col0 + self.pos
    }

    pub fn error(&self, msg: impl Into<String>) -> ParseError {
        ParseError::new(self.line, self.col(), msg)
    }

    pub fn error_at(&self, col: usize, msg: impl Into<String>) -> ParseError {
        ParseError::new(self.line, col, msg)
    }

    pub fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    pub fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    pub fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            match self.peek() {
                Some(found) => Err(self.error(format!("expected '{c}', found '{found}'"))),
                None => Err(self.error(format!("expected '{c}', found end of input"))),
            }
        }
    }

    pub fn expect_end(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            Some(c) => Err(self.error(format!("unexpected '{c}'"))),
        }
    }

    fn word(&mut self) -> String {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() && (self.chars[self.pos].is_ascii_alphanumeric() || self.chars[self.pos] == '_') {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    fn number(&mut self) -> Result<BigRational, ParseError> {
        let col = self.col();
        let neg = self.eat('-');
        let int = self.digits();
        if int.is_empty() {
            return Err(self.error_at(col, "malformed number"));
        }
        let mut value = BigRational::from_integer(int.parse::<BigInt>().expect("digits"));
        if self.chars.get(self.pos) == Some(&'.') {
            self.pos += 1;
            let frac = self.digits();
            if frac.is_empty() {
                return Err(self.error_at(col, "malformed decimal"));
            }
            let scale = num::pow(BigInt::from(10), frac.len());
            value += BigRational::new(frac.parse::<BigInt>().expect("digits"), scale);
        }
        if self.chars.get(self.pos) == Some(&'/') {
            self.pos += 1;
            let den = self.digits();
            if den.is_empty() {
                return Err(self.error_at(col, "malformed fraction"));
            }
            let den = den.parse::<BigInt>().expect("digits");
            if den.is_zero() {
                return Err(self.error_at(col, "zero denominator"));
            }
            value /= BigRational::from_integer(den);
        }
        if neg {
            value = -value;
        }
        Ok(value)
    }

    fn digits(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    /// Reads one argument or call: `Name(args)`, `ABC`, `x`, `3/4`.
    pub fn term(&mut self) -> Result<Term, ParseError> {
        self.skip_ws();
        let line = self.line;
        let col = self.col();
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(c) if c.is_ascii_digit() || c == '-' => {
                let n = self.number()?;
                Ok(Term { kind: TermKind::Num(n), line, col })
            }
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                let w = self.word();
                if self.peek() == Some('(') {
                    if !w.chars().all(|c| c.is_ascii_alphabetic() || c == '_') {
                        return Err(self.error_at(col, format!("bad identifier {w:?}")));
                    }
                    self.pos += 1;
                    let mut args = Vec::new();
                    if !self.eat(')') {
                        loop {
                            args.push(self.term()?);
                            if self.eat(',') {
                                continue;
                            }
                            if self.eat(')') {
                                break;
                            }
                            return Err(match self.peek() {
                                Some(found) => self.error(format!("expected ',' or ')', found '{found}'")),
                                None => self.error("unbalanced parentheses"),
                            });
                        }
                    }
                    Ok(Term { kind: TermKind::Call(w, args), line, col })
                } else if w.chars().all(|c| c.is_ascii_uppercase()) {
                    let pts: PointSeq = w.chars().map(|c| Point::new(c).expect("uppercase")).collect();
                    Ok(Term { kind: TermKind::Points(pts), line, col })
                } else if w.starts_with(|c: char| c.is_ascii_lowercase()) && w.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                    Ok(Term { kind: TermKind::Ident(w), line, col })
                } else {
                    Err(self.error_at(col, format!("malformed point sequence {w:?}")))
                }
            }
            Some(c) => Err(self.error(format!("unexpected '{c}'"))),
        }
    }
}
