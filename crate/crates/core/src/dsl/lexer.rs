use crate::diagnostic::{Code, Diagnostic, SourceSpan};

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Ident(String),
    Str(String),
    Number(f64),
    Date(String),
    Percent,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Eof,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("'{s}'"),
            TokenKind::Str(s) => format!("string {s:?}"),
            TokenKind::Number(n) => format!("number {n}"),
            TokenKind::Date(d) => format!("date {d}"),
            TokenKind::Percent => "'%'".into(),
            TokenKind::LBrace => "'{'".into(),
            TokenKind::RBrace => "'}'".into(),
            TokenKind::LBracket => "'['".into(),
            TokenKind::RBracket => "']'".into(),
            TokenKind::Comma => "','".into(),
            TokenKind::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: SourceSpan,
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    col: u32,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn here(&self) -> SourceSpan {
        SourceSpan::point(self.line, self.col, self.pos)
    }

    fn span_from(&self, start: SourceSpan) -> SourceSpan {
        SourceSpan {
            end_line: self.line,
            end_col: self.col,
            end_byte: self.pos,
            ..start
        }
    }
}

fn lex_error(message: impl Into<String>, span: SourceSpan) -> Diagnostic {
    Diagnostic::error(Code::LexicalError, message).with_span(span)
}

/// Splits DSL source into tokens. `#` starts a comment running to end of
/// line; `\r` counts as whitespace so CRLF input lexes like LF input.
pub fn tokenize(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut cur = Cursor {
        src,
        pos: 0,
        line: 1,
        col: 1,
    };
    let mut tokens = Vec::new();
    loop {
        while let Some(c) = cur.peek() {
            if c.is_whitespace() {
                cur.bump();
            } else if c == '#' {
                while cur.peek().is_some_and(|c| c != '\n') {
                    cur.bump();
                }
            } else {
                break;
            }
        }
        let start = cur.here();
        let Some(c) = cur.peek() else {
            tokens.push(Token {
                kind: TokenKind::Eof,
                span: start,
            });
            return Ok(tokens);
        };
        let kind = match c {
            '{' | '}' | '[' | ']' | ',' | '%' => {
                cur.bump();
                match c {
                    '{' => TokenKind::LBrace,
                    '}' => TokenKind::RBrace,
                    '[' => TokenKind::LBracket,
                    ']' => TokenKind::RBracket,
                    ',' => TokenKind::Comma,
                    _ => TokenKind::Percent,
                }
            }
            '"' => TokenKind::Str(lex_string(&mut cur, start)?),
            c if c.is_ascii_digit() => lex_number_or_date(&mut cur, start)?,
            c if c.is_ascii_alphabetic() || c == '_' => {
                let begin = cur.pos;
                while cur
                    .peek()
                    .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_')
                {
                    cur.bump();
                }
                TokenKind::Ident(src[begin..cur.pos].to_string())
            }
            other => {
                cur.bump();
                return Err(lex_error(
                    format!("unexpected character {other:?}"),
                    cur.span_from(start),
                ));
            }
        };
        tokens.push(Token {
            kind,
            span: cur.span_from(start),
        });
    }
}

fn lex_string(cur: &mut Cursor<'_>, start: SourceSpan) -> Result<String, Diagnostic> {
    cur.bump();
    let mut out = String::new();
    loop {
        match cur.bump() {
            None | Some('\n') => {
                return Err(lex_error("unterminated string", cur.span_from(start)));
            }
            Some('"') => return Ok(out),
            Some('\\') => {
                let esc_start = cur.here();
                match cur.bump() {
                    Some('"') => out.push('"'),
                    Some('\\') => out.push('\\'),
                    Some('n') => out.push('\n'),
                    Some('t') => out.push('\t'),
                    Some('r') => out.push('\r'),
                    Some('u') => out.push(lex_unicode_escape(cur, esc_start)?),
                    _ => {
                        return Err(lex_error(
                            "invalid escape (expected \\\", \\\\, \\n, \\t, \\r or \\u{...})",
                            cur.span_from(esc_start),
                        ))
                    }
                }
            }
            Some(c) => out.push(c),
        }
    }
}

fn lex_unicode_escape(cur: &mut Cursor<'_>, esc_start: SourceSpan) -> Result<char, Diagnostic> {
    let bad = |cur: &Cursor<'_>| lex_error("malformed \\u{...} escape", cur.span_from(esc_start));
    if cur.bump() != Some('{') {
        return Err(bad(cur));
    }
    let mut hex = String::new();
    loop {
        match cur.bump() {
            Some('}') => break,
            Some(c) if c.is_ascii_hexdigit() && hex.len() < 6 => hex.push(c),
            _ => return Err(bad(cur)),
        }
    }
    u32::from_str_radix(&hex, 16)
        .ok()
        .and_then(char::from_u32)
        .ok_or_else(|| bad(cur))
}

fn lex_number_or_date(cur: &mut Cursor<'_>, start: SourceSpan) -> Result<TokenKind, Diagnostic> {
    let begin = cur.pos;
    while cur.peek().is_some_and(|c| c.is_ascii_digit()) {
        cur.bump();
    }
    let int_len = cur.pos - begin;
    if cur.peek() == Some('-') {
        if int_len != 4 {
            cur.bump();
            return Err(lex_error(
                "malformed date (expected YYYY-MM-DD)",
                cur.span_from(start),
            ));
        }
        for expect_dash in [true, false, false, true, false, false] {
            let ok = match cur.bump() {
                Some('-') => expect_dash,
                Some(c) => c.is_ascii_digit() && !expect_dash,
                None => false,
            };
            if !ok {
                return Err(lex_error(
                    "malformed date (expected YYYY-MM-DD)",
                    cur.span_from(start),
                ));
            }
        }
        if cur.peek().is_some_and(|c| c.is_ascii_alphanumeric()) {
            return Err(lex_error(
                "malformed date (expected YYYY-MM-DD)",
                cur.span_from(start),
            ));
        }
        return Ok(TokenKind::Date(cur.src[begin..cur.pos].to_string()));
    }
    if cur.peek() == Some('.') {
        if !cur.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            cur.bump();
            return Err(lex_error(
                "digits expected after decimal point",
                cur.span_from(start),
            ));
        }
        cur.bump();
        while cur.peek().is_some_and(|c| c.is_ascii_digit()) {
            cur.bump();
        }
    }
    if cur
        .peek()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
    {
        return Err(lex_error(
            "a number must be separated from the following word",
            cur.span_from(start),
        ));
    }
    let text = &cur.src[begin..cur.pos];
    text.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .map(TokenKind::Number)
        .ok_or_else(|| {
            lex_error(
                format!("number '{text}' out of range"),
                cur.span_from(start),
            )
        })
}
