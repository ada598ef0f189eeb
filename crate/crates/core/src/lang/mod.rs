//! Definition and condition languages.
//!
//! Definition files are line oriented. A block starts with one of the
//! headers `Entity`, `Relation`, `Attribution` or `Theorem` followed by the
//! defined name and its variable pattern; indented `key: value` lines follow.
//! `#` starts a comment.
//!
//! ```text
//! Relation IsMidpointOfLine(M,AB)
//!     ee_check: Point(M)&Line(AB)&Collinear(AMB)
//!     multi: M,BA
//!     extend: Equal(LengthOfLine(AM),LengthOfLine(MB))
//!
//! Theorem midpoint_of_line_judgment(M,AB)
//!     premise: Collinear(AMB)&Equal(LengthOfLine(AM),LengthOfLine(MB))
//!     conclusion: IsMidpointOfLine(M,AB)
//! ```

mod cdl;
mod gdl;
mod term;

use thiserror::Error;

pub use cdl::{
    inverse_parse, parse_cdl, parse_expr, parse_goal, render_equation, render_fact, Category, CdlStatement, RelFact,
    StatementBody,
};
pub use gdl::{parse_gdl, GdlError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, column: usize, message: impl Into<String>) -> ParseError {
        ParseError { line, column, message: message.into() }
    }
}
