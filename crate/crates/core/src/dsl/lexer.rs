//! Tokenizer for the model format.

use super::{ParseError, SourceSpan};

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Ident(String),
    Int(i64),
    Real(f64),
    Str(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Eof,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(name) => format!("`{name}`"),
            TokenKind::Int(v) => format!("integer `{v}`"),
            TokenKind::Real(v) => format!("number `{v}`"),
            TokenKind::Str(_) => "string".to_string(),
            TokenKind::LParen => "`(`".to_string(),
            TokenKind::RParen => "`)`".to_string(),
            TokenKind::LBracket => "`[`".to_string(),
            TokenKind::RBracket => "`]`".to_string(),
            TokenKind::Comma => "`,`".to_string(),
            TokenKind::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: SourceSpan,
}

pub fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    let mut line: u32 = 1;
    let mut col: u32 = 1;

    while i < chars.len() {
        let c = chars[i];
        let span_here = |len: u32| SourceSpan { line, column: col, length: len };
        match c {
            ' ' | '\t' | '\r' => {
                i += 1;
                col += 1;
            }
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            '/' => {
                if i + 1 < chars.len() && chars[i + 1] == '/' {
                    while i < chars.len() && chars[i] != '\n' {
                        i += 1;
                        col += 1;
                    }
                } else {
                    return Err(ParseError::new(span_here(1), "stray `/`; comments start with `//`"));
                }
            }
            '(' | ')' | '[' | ']' | ',' => {
                let kind = match c {
                    '(' => TokenKind::LParen,
                    ')' => TokenKind::RParen,
                    '[' => TokenKind::LBracket,
                    ']' => TokenKind::RBracket,
                    _ => TokenKind::Comma,
                };
                tokens.push(Token { kind, span: span_here(1) });
                i += 1;
                col += 1;
            }
            '"' => {
                let start_line = line;
                let start_col = col;
                i += 1;
                col += 1;
                let mut value = String::new();
                let mut len: u32 = 1;
                loop {
                    match chars.get(i) {
                        None | Some('\n') => {
                            return Err(ParseError::new(
                                SourceSpan { line: start_line, column: start_col, length: len },
                                "unterminated string",
                            ));
                        }
                        Some('"') => {
                            i += 1;
                            col += 1;
                            len += 1;
                            break;
                        }
                        Some('\\') => {
                            let esc = chars.get(i + 1);
                            match esc {
                                Some('"') => value.push('"'),
                                Some('\\') => value.push('\\'),
                                _ => {
                                    return Err(ParseError::new(
                                        SourceSpan { line, column: col, length: 2 },
                                        "unsupported escape; only \\\" and \\\\ are recognized",
                                    ));
                                }
                            }
                            i += 2;
                            col += 2;
                            len += 2;
                        }
                        Some(&ch) => {
                            value.push(ch);
                            i += 1;
                            col += 1;
                            len += 1;
                        }
                    }
                }
                tokens.push(Token {
                    kind: TokenKind::Str(value),
                    span: SourceSpan { line: start_line, column: start_col, length: len },
                });
            }
            '-' | '0'..='9' => {
                let start_col = col;
                let mut text = String::new();
                if c == '-' {
                    text.push('-');
                    i += 1;
                    col += 1;
                    if !matches!(chars.get(i), Some('0'..='9')) {
                        return Err(ParseError::new(
                            SourceSpan { line, column: start_col, length: 1 },
                            "`-` must begin a number",
                        ));
                    }
                }
                while matches!(chars.get(i), Some('0'..='9')) {
                    text.push(chars[i]);
                    i += 1;
                    col += 1;
                }
                let mut is_real = false;
                if chars.get(i) == Some(&'.') && matches!(chars.get(i + 1), Some('0'..='9')) {
                    is_real = true;
                    text.push('.');
                    i += 1;
                    col += 1;
                    while matches!(chars.get(i), Some('0'..='9')) {
                        text.push(chars[i]);
                        i += 1;
                        col += 1;
                    }
                }
                let span = SourceSpan { line, column: start_col, length: col - start_col };
                let kind = if is_real {
                    TokenKind::Real(text.parse::<f64>().map_err(|_| {
                        ParseError::new(span, "malformed number literal")
                    })?)
                } else {
                    TokenKind::Int(text.parse::<i64>().map_err(|_| {
                        ParseError::new(span, "integer literal out of range")
                    })?)
                };
                tokens.push(Token { kind, span });
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                let start_col = col;
                let mut name = String::new();
                while matches!(chars.get(i), Some(ch) if ch.is_ascii_alphanumeric() || *ch == '_')
                {
                    name.push(chars[i]);
                    i += 1;
                    col += 1;
                }
                tokens.push(Token {
                    kind: TokenKind::Ident(name),
                    span: SourceSpan { line, column: start_col, length: col - start_col },
                });
            }
            other => {
                return Err(ParseError::new(
                    span_here(1),
                    format!("unexpected character `{other}`"),
                ));
            }
        }
    }

    tokens.push(Token { kind: TokenKind::Eof, span: SourceSpan { line, column: col, length: 0 } });
    Ok(tokens)
}
