use std::fmt;

use serde::Serialize;

use super::parser::SyntaxError;

/// 1-based line and column of a token start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Int(i64),
    PointsTo,
    Star,
    DoubleBar,
    Bar,
    AndAnd,
    Bang,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Semi,
    Dot,
    Define,
    Wedge,
    Minus,
    Eof,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Ident(s) => write!(f, "`{s}`"),
            TokenKind::Int(n) => write!(f, "`{n}`"),
            TokenKind::Eof => f.write_str("end of input"),
            other => write!(f, "`{}`", other.symbol()),
        }
    }
}

impl TokenKind {
    pub fn symbol(&self) -> &'static str {
        match self {
            TokenKind::PointsTo => "|->",
            TokenKind::Star => "*",
            TokenKind::DoubleBar => "||",
            TokenKind::Bar => "|",
            TokenKind::AndAnd => "&&",
            TokenKind::Bang => "!",
            TokenKind::LParen => "(",
            TokenKind::RParen => ")",
            TokenKind::LBrace => "{",
            TokenKind::RBrace => "}",
            TokenKind::Comma => ",",
            TokenKind::Colon => ":",
            TokenKind::Semi => ";",
            TokenKind::Dot => ".",
            TokenKind::Define => ":=",
            TokenKind::Wedge => "\\/",
            TokenKind::Minus => "-",
            TokenKind::Ident(_) => "identifier",
            TokenKind::Int(_) => "integer",
            TokenKind::Eof => "end of input",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

fn ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

// `#` and `$` only occur in generated names (fresh existentials, mangled fields).
fn ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '\'' | '#' | '$')
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut tokens = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, column: col };
        let next = chars.get(i + 1).copied();

        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && next == Some('/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }

        let (kind, len) = if ident_start(c) {
            let start = i;
            let mut j = i + 1;
            while j < chars.len() && ident_continue(chars[j]) {
                j += 1;
            }
            let text: String = chars[start..j].iter().collect();
            (TokenKind::Ident(text), j - start)
        } else if c.is_ascii_digit() {
            let start = i;
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let text: String = chars[start..j].iter().collect();
            let n = text.parse::<i64>().map_err(|_| {
                SyntaxError::new(
                    span,
                    vec!["integer within 64-bit range".into()],
                    text.clone(),
                )
            })?;
            (TokenKind::Int(n), j - start)
        } else {
            match (c, next) {
                ('|', Some('-')) if chars.get(i + 2) == Some(&'>') => (TokenKind::PointsTo, 3),
                ('|', Some('|')) => (TokenKind::DoubleBar, 2),
                ('|', _) => (TokenKind::Bar, 1),
                ('&', Some('&')) => (TokenKind::AndAnd, 2),
                (':', Some('=')) => (TokenKind::Define, 2),
                ('\\', Some('/')) => (TokenKind::Wedge, 2),
                ('*', _) => (TokenKind::Star, 1),
                ('!', _) => (TokenKind::Bang, 1),
                ('(', _) => (TokenKind::LParen, 1),
                (')', _) => (TokenKind::RParen, 1),
                ('{', _) => (TokenKind::LBrace, 1),
                ('}', _) => (TokenKind::RBrace, 1),
                (',', _) => (TokenKind::Comma, 1),
                (':', _) => (TokenKind::Colon, 1),
                (';', _) => (TokenKind::Semi, 1),
                ('.', _) => (TokenKind::Dot, 1),
                ('-', _) => (TokenKind::Minus, 1),
                _ => {
                    return Err(SyntaxError::new(
                        span,
                        vec!["token".into()],
                        format!("character `{c}`"),
                    ))
                }
            }
        };
        tokens.push(Token { kind, span });
        i += len;
        col += len;
    }

    tokens.push(Token {
        kind: TokenKind::Eof,
        span: Span { line, column: col },
    });
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn distinguishes_bar_tokens() {
        assert_eq!(
            kinds("a |-> b || c | d"),
            vec![
                TokenKind::Ident("a".into()),
                TokenKind::PointsTo,
                TokenKind::Ident("b".into()),
                TokenKind::DoubleBar,
                TokenKind::Ident("c".into()),
                TokenKind::Bar,
                TokenKind::Ident("d".into()),
                TokenKind::Eof,
            ]
        );
    }

    #[test]
    fn tracks_lines_and_skips_comments() {
        let toks = tokenize("// header\n  x := y").unwrap();
        assert_eq!(toks[0].span, Span { line: 2, column: 3 });
        assert_eq!(toks[1].kind, TokenKind::Define);
    }

    #[test]
    fn generated_names_are_identifiers() {
        assert_eq!(kinds("x#3")[0], TokenKind::Ident("x#3".into()));
        assert_eq!(
            kinds("C$private$f")[0],
            TokenKind::Ident("C$private$f".into())
        );
    }

    #[test]
    fn rejects_stray_characters() {
        let err = tokenize("a @ b").unwrap_err();
        assert_eq!(err.span.column, 3);
    }
}
