//! Recursive-descent parser for the model format.

use super::lexer::{lex, Token, TokenKind};
use super::{ParseError, SourceSpan};
use crate::model::{normalize, AtomValue, EventRelativeTime, Invariant, Probability, Tick};

/// Hard bound on term nesting so parsing terminates cleanly on
/// pathological input instead of exhausting the stack. Kept well under
/// what a 2 MiB thread stack tolerates in unoptimized builds.
const MAX_DEPTH: usize = 200;

/// Parses one model term and normalizes it.
pub fn parse_model(text: &str) -> Result<Invariant, ParseError> {
    let tokens = lex(text)?;
    let mut parser = Parser { tokens, pos: 0 };
    let term = parser.term(0)?;
    parser.expect_eof()?;
    Ok(normalize(term))
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn advance(&mut self) -> Token {
        let tok = self.tokens[self.pos.min(self.tokens.len() - 1)].clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        tok
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        let tok = self.peek();
        ParseError::new(tok.span, format!("expected {expected}, found {}", tok.kind.describe()))
    }

    fn expect_eof(&self) -> Result<(), ParseError> {
        match self.peek().kind {
            TokenKind::Eof => Ok(()),
            _ => Err(self.unexpected("end of input")),
        }
    }

    fn punct(&mut self, kind: TokenKind, what: &str) -> Result<(), ParseError> {
        if self.peek().kind == kind {
            self.advance();
            Ok(())
        } else {
            Err(self.unexpected(what))
        }
    }

    fn term(&mut self, depth: usize) -> Result<Invariant, ParseError> {
        if depth >= MAX_DEPTH {
            return Err(ParseError::new(self.peek().span, "term nesting exceeds the depth limit"));
        }
        let tok = self.advance();
        let name = match tok.kind {
            TokenKind::Ident(name) => name,
            other => {
                return Err(ParseError::new(
                    tok.span,
                    format!("expected a constructor, found {}", other.describe()),
                ));
            }
        };
        match name.as_str() {
            "AND" | "OR" | "IMPLIES" => {
                self.punct(TokenKind::LParen, "`(`")?;
                let left = self.term(depth + 1)?;
                self.punct(TokenKind::Comma, "`,`")?;
                let right = self.term(depth + 1)?;
                self.punct(TokenKind::RParen, "`)`")?;
                Ok(match name.as_str() {
                    "AND" => Invariant::and(left, right),
                    "OR" => Invariant::or(left, right),
                    _ => Invariant::implies(left, right),
                })
            }
            "NOT" => {
                self.punct(TokenKind::LParen, "`(`")?;
                let body = self.term(depth + 1)?;
                self.punct(TokenKind::RParen, "`)`")?;
                Ok(Invariant::not(body))
            }
            "BIGAND" => {
                self.punct(TokenKind::LParen, "`(`")?;
                self.punct(TokenKind::LBracket, "`[`")?;
                let mut items = Vec::new();
                if self.peek().kind != TokenKind::RBracket {
                    loop {
                        items.push(self.term(depth + 1)?);
                        match self.peek().kind {
                            TokenKind::Comma => {
                                self.advance();
                            }
                            _ => break,
                        }
                    }
                }
                self.punct(TokenKind::RBracket, "`]` or `,`")?;
                self.punct(TokenKind::RParen, "`)`")?;
                Ok(Invariant::BigAnd(items))
            }
            _ => self.atom(name, tok.span),
        }
    }

    /// Parses a leaf constructor's arguments. Not recursive, so the
    /// per-constructor locals stay out of [`Parser::term`]'s frame and
    /// deep nesting cannot exhaust the stack before the depth check.
    fn atom(&mut self, name: String, span: SourceSpan) -> Result<Invariant, ParseError> {
        match name.as_str() {
            "TRUE" => Ok(Invariant::Atom(AtomValue::True)),
            "FALSE" => Ok(Invariant::Atom(AtomValue::False)),
            "TimePoint" => {
                self.punct(TokenKind::LParen, "`(`")?;
                let t = self.tick_arg()?;
                self.punct(TokenKind::RParen, "`)`")?;
                Ok(Invariant::Atom(AtomValue::TimePoint(t)))
            }
            "TimeInterval" => {
                self.punct(TokenKind::LParen, "`(`")?;
                let from = self.tick_arg()?;
                self.punct(TokenKind::Comma, "`,`")?;
                let to = self.tick_arg()?;
                self.punct(TokenKind::RParen, "`)`")?;
                Ok(Invariant::Atom(AtomValue::TimeInterval(from, to)))
            }
            "TimeStamp" => {
                self.punct(TokenKind::LParen, "`(`")?;
                let ert = self.tertp_arg()?;
                self.punct(TokenKind::RParen, "`)`")?;
                Ok(Invariant::Atom(AtomValue::TimeStamp(ert)))
            }
            "Event" | "Owner" | "ComponentState" => {
                self.punct(TokenKind::LParen, "`(`")?;
                let (value, _) = self.string_arg()?;
                self.punct(TokenKind::RParen, "`)`")?;
                Ok(Invariant::Atom(match name.as_str() {
                    "Event" => AtomValue::Event(value),
                    "Owner" => AtomValue::Owner(value),
                    _ => AtomValue::ComponentState(value),
                }))
            }
            "Prob" => {
                self.punct(TokenKind::LParen, "`(`")?;
                let (value, span) = self.real_arg()?;
                self.punct(TokenKind::RParen, "`)`")?;
                let p = Probability::new(value).ok_or_else(|| {
                    ParseError::new(span, "probability must lie in [0, 1]")
                })?;
                Ok(Invariant::Atom(AtomValue::Prob(p)))
            }
            "OccupyPoint" => {
                let args = self.int_args(2)?;
                Ok(Invariant::Atom(AtomValue::OccupyPoint(args[0].0, args[1].0)))
            }
            "OccupyBox" => {
                let args = self.int_args(4)?;
                Ok(Invariant::Atom(AtomValue::OccupyBox(
                    args[0].0, args[1].0, args[2].0, args[3].0,
                )))
            }
            "OccupyCircle" => {
                let args = self.int_args(3)?;
                let (r, span) = args[2];
                if r < 0 {
                    return Err(ParseError::new(span, "circle radius must be non-negative"));
                }
                Ok(Invariant::Atom(AtomValue::OccupyCircle(args[0].0, args[1].0, r)))
            }
            "Edge" => {
                self.punct(TokenKind::LParen, "`(`")?;
                let (a, _) = self.string_arg()?;
                self.punct(TokenKind::Comma, "`,`")?;
                let (b, _) = self.string_arg()?;
                self.punct(TokenKind::RParen, "`)`")?;
                Ok(Invariant::Atom(AtomValue::Edge(a, b)))
            }
            "Transition" => {
                self.punct(TokenKind::LParen, "`(`")?;
                let (source, _) = self.string_arg()?;
                self.punct(TokenKind::Comma, "`,`")?;
                let (event, _) = self.string_arg()?;
                self.punct(TokenKind::Comma, "`,`")?;
                let (target, _) = self.string_arg()?;
                self.punct(TokenKind::RParen, "`)`")?;
                Ok(Invariant::Atom(AtomValue::Transition(source, event, target)))
            }
            other => Err(ParseError::new(span, format!("unknown constructor `{other}`"))),
        }
    }

    fn int_args(&mut self, n: usize) -> Result<Vec<(i64, SourceSpan)>, ParseError> {
        self.punct(TokenKind::LParen, "`(`")?;
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            if k > 0 {
                self.punct(TokenKind::Comma, "`,`")?;
            }
            out.push(self.int_arg()?);
        }
        self.punct(TokenKind::RParen, "`)`")?;
        Ok(out)
    }

    fn int_arg(&mut self) -> Result<(i64, SourceSpan), ParseError> {
        match self.peek().kind {
            TokenKind::Int(v) => {
                let span = self.peek().span;
                self.advance();
                Ok((v, span))
            }
            _ => Err(self.unexpected("an integer")),
        }
    }

    fn real_arg(&mut self) -> Result<(f64, SourceSpan), ParseError> {
        match self.peek().kind {
            TokenKind::Real(v) => {
                let span = self.peek().span;
                self.advance();
                Ok((v, span))
            }
            TokenKind::Int(v) => {
                let span = self.peek().span;
                self.advance();
                Ok((v as f64, span))
            }
            _ => Err(self.unexpected("a number")),
        }
    }

    fn string_arg(&mut self) -> Result<(String, SourceSpan), ParseError> {
        match &self.peek().kind {
            TokenKind::Str(value) => {
                let value = value.clone();
                let span = self.peek().span;
                self.advance();
                Ok((value, span))
            }
            _ => Err(self.unexpected("a string")),
        }
    }

    /// A time argument: a plain non-negative tick count or
    /// `TStandardGMTDay(h, m, s)`.
    fn tick_arg(&mut self) -> Result<Tick, ParseError> {
        match &self.peek().kind {
            TokenKind::Int(v) => {
                let (v, span) = (*v, self.peek().span);
                self.advance();
                if v < 0 {
                    return Err(ParseError::new(span, "ticks must be non-negative"));
                }
                Ok(Tick(v as u64))
            }
            TokenKind::Ident(name) if name == "TStandardGMTDay" => {
                self.advance();
                let args = self.int_args(3)?;
                let fields: Vec<u32> = args
                    .iter()
                    .map(|&(v, span)| {
                        u32::try_from(v).map_err(|_| {
                            ParseError::new(span, "clock fields must be non-negative")
                        })
                    })
                    .collect::<Result<_, _>>()?;
                Tick::from_gmt(fields[0], fields[1], fields[2]).ok_or_else(|| {
                    ParseError::new(
                        args[0].1,
                        "clock time out of range; hours 0-23, minutes and seconds 0-59",
                    )
                })
            }
            _ => Err(self.unexpected("a tick count or TStandardGMTDay(h, m, s)")),
        }
    }

    fn tertp_arg(&mut self) -> Result<EventRelativeTime, ParseError> {
        match &self.peek().kind {
            TokenKind::Ident(name) if name == "TERTP" => {
                self.advance();
                self.punct(TokenKind::LParen, "`(`")?;
                let (event, _) = self.string_arg()?;
                self.punct(TokenKind::Comma, "`,`")?;
                let (offset, span) = self.int_arg()?;
                self.punct(TokenKind::RParen, "`)`")?;
                if offset < 0 {
                    return Err(ParseError::new(span, "event offsets must be non-negative"));
                }
                Ok(EventRelativeTime { event, offset: Tick(offset as u64) })
            }
            _ => Err(self.unexpected("TERTP(\"event\", offset)")),
        }
    }
}
