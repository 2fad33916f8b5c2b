//! The textual model format.
//!
//! Models are written in constructor-call notation, one term per file:
//!
//! ```text
//! BIGAND([
//!   IMPLIES(
//!     Owner("Robot1_Space"),
//!     IMPLIES(
//!       TimeInterval(TStandardGMTDay(0, 0, 0), TStandardGMTDay(23, 30, 59)),
//!       OccupyBox(0, 0, 10, 10)
//!     )
//!   )
//! ])
//! ```
//!
//! `//` starts a comment running to the end of the line. Clock times are
//! sugar: `TStandardGMTDay(h, m, s)` is converted to ticks while parsing,
//! and the printer can render ticks back in clock form. [`parse_model`]
//! normalizes its result, and printing then reparsing a normalized term
//! reproduces it exactly.

mod lexer;
mod parser;
mod printer;

pub use parser::parse_model;
pub use printer::{print_model, print_model_with, PrintOptions, TimeStyle};

/// A location in the source text; `line` and `column` are 1-based and
/// `length` is measured in characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceSpan {
    pub line: u32,
    pub column: u32,
    pub length: u32,
}

/// A syntax or validation error, pointing at the offending token.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("parse error at line {}, column {}: {message}", span.line, span.column)]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
}

impl ParseError {
    fn new(span: SourceSpan, message: impl Into<String>) -> ParseError {
        ParseError { span, message: message.into() }
    }
}
