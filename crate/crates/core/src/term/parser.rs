use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use super::lexer::{tokenize, Span, Token, TokenKind};
use super::{Arg, ExtTerm, HeapTerm, Heaplet, Location, PredCall, Value};

const KEYWORDS: &[&str] = &["emp", "true", "false", "inv", "nil"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct SyntaxError {
    pub span: Span,
    pub expected: Vec<String>,
    pub found: String,
    pub hint: Option<String>,
}

impl SyntaxError {
    pub fn new(span: Span, expected: Vec<String>, found: String) -> Self {
        SyntaxError {
            span,
            expected,
            found,
            hint: None,
        }
    }

    pub fn with_hint(mut self, hint: impl Into<String>) -> Self {
        self.hint = Some(hint.into());
        self
    }
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: expected ", self.span)?;
        match self.expected.as_slice() {
            [] => f.write_str("something else")?,
            [one] => f.write_str(one)?,
            many => write!(f, "one of {}", many.join(", "))?,
        }
        write!(f, ", found {}", self.found)?;
        if let Some(hint) = &self.hint {
            write!(f, " (hint: {hint})")?;
        }
        Ok(())
    }
}

pub type ParseResult<T> = Result<T, SyntaxError>;

/// Parses an extended heap term; the whole input must be consumed.
pub fn parse_term(text: &str) -> ParseResult<ExtTerm> {
    let mut p = Parser::new(text)?;
    let t = p.parse_ext()?;
    p.expect_eof()?;
    Ok(t)
}

/// Parses a spatial heap term (no logical connectives at the top).
pub fn parse_heap(text: &str) -> ParseResult<HeapTerm> {
    let mut p = Parser::new(text)?;
    let start = p.span();
    let t = p.parse_ext()?;
    p.expect_eof()?;
    t.into_heap()
        .ok_or_else(|| SyntaxError::new(start, vec!["heap term".into()], "logical formula".into()))
}

/// Recursive-descent parser over the token stream. Also drives the
/// declaration-file reader.
pub struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    // Inside a predicate argument list a `,` after a heaplet separates arguments.
    comma_ok: bool,
}

impl Parser {
    pub fn new(src: &str) -> ParseResult<Self> {
        Ok(Parser {
            tokens: tokenize(src)?,
            pos: 0,
            comma_ok: false,
        })
    }

    pub fn peek(&self) -> &TokenKind {
        &self.tokens[self.pos].kind
    }

    pub fn peek_at(&self, offset: usize) -> &TokenKind {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].kind
    }

    pub fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    pub fn advance(&mut self) -> TokenKind {
        let kind = self.tokens[self.pos].kind.clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        kind
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), TokenKind::Eof)
    }

    pub fn error(&self, expected: &[&str]) -> SyntaxError {
        SyntaxError::new(
            self.span(),
            expected.iter().map(|s| s.to_string()).collect(),
            self.peek().to_string(),
        )
    }

    pub fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek() == kind {
            self.advance();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, kind: TokenKind) -> ParseResult<()> {
        if self.eat(&kind) {
            Ok(())
        } else {
            Err(self.error(&[&format!("`{}`", kind.symbol())]))
        }
    }

    pub fn expect_eof(&mut self) -> ParseResult<()> {
        if self.at_eof() {
            Ok(())
        } else {
            Err(self.error(&["end of input"]))
        }
    }

    pub fn is_keyword(&self, word: &str) -> bool {
        matches!(self.peek(), TokenKind::Ident(s) if s == word)
    }

    /// A non-keyword identifier.
    pub fn ident(&mut self) -> ParseResult<String> {
        match self.peek() {
            TokenKind::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.advance();
                Ok(s)
            }
            _ => Err(self.error(&["identifier"])),
        }
    }

    fn loc_path(&mut self) -> ParseResult<Location> {
        let root = self.ident()?;
        let mut path = Vec::new();
        while self.eat(&TokenKind::Dot) {
            path.push(self.ident()?);
        }
        Ok(Location { root, path })
    }

    pub fn parse_ext(&mut self) -> ParseResult<ExtTerm> {
        let mut left = self.parse_and()?;
        while self.eat(&TokenKind::Bar) {
            let right = self.parse_and()?;
            left = ExtTerm::Or(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn parse_and(&mut self) -> ParseResult<ExtTerm> {
        let mut left = self.parse_not()?;
        while self.eat(&TokenKind::AndAnd) {
            let right = self.parse_not()?;
            left = ExtTerm::And(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn parse_not(&mut self) -> ParseResult<ExtTerm> {
        if self.eat(&TokenKind::Bang) {
            let inner = self.parse_not()?;
            return Ok(ExtTerm::Not(Box::new(inner)));
        }
        self.parse_disj()
    }

    fn spatial(&self, t: ExtTerm, span: Span, op: &str) -> ParseResult<HeapTerm> {
        t.into_heap().ok_or_else(|| {
            SyntaxError::new(
                span,
                vec![format!("heap term as operand of `{op}`")],
                "logical formula".into(),
            )
            .with_hint("parenthesize logical formulas only at the top level")
        })
    }

    fn parse_disj(&mut self) -> ParseResult<ExtTerm> {
        let start = self.span();
        let first = self.parse_conj()?;
        if self.peek() != &TokenKind::DoubleBar {
            return Ok(first);
        }
        let mut left = self.spatial(first, start, "||")?;
        while self.eat(&TokenKind::DoubleBar) {
            let span = self.span();
            let right = self.parse_conj()?;
            let right = self.spatial(right, span, "||")?;
            left = HeapTerm::disj(left, right);
        }
        Ok(ExtTerm::Heap(left))
    }

    fn parse_conj(&mut self) -> ParseResult<ExtTerm> {
        let start = self.span();
        let first = self.parse_primary()?;
        if self.peek() != &TokenKind::Star {
            return Ok(first);
        }
        let mut left = self.spatial(first, start, "*")?;
        while self.eat(&TokenKind::Star) {
            let span = self.span();
            let right = self.parse_primary()?;
            let right = self.spatial(right, span, "*")?;
            left = HeapTerm::conj(left, right);
        }
        Ok(ExtTerm::Heap(left))
    }

    fn parse_primary(&mut self) -> ParseResult<ExtTerm> {
        let heap = |t| Ok(ExtTerm::Heap(t));
        match self.peek().clone() {
            TokenKind::LParen => {
                self.advance();
                let saved = std::mem::replace(&mut self.comma_ok, false);
                let inner = self.parse_ext();
                self.comma_ok = saved;
                let inner = inner?;
                self.expect(TokenKind::RParen)?;
                Ok(inner)
            }
            TokenKind::Ident(word) => match word.as_str() {
                "emp" | "true" | "false" => {
                    self.advance();
                    if self.eat(&TokenKind::LParen) {
                        let obj = self.ident()?;
                        self.expect(TokenKind::RParen)?;
                        heap(match word.as_str() {
                            "emp" => HeapTerm::EmpPartial(obj),
                            "true" => HeapTerm::TruePartial(obj),
                            _ => HeapTerm::FalsePartial(obj),
                        })
                    } else {
                        heap(match word.as_str() {
                            "emp" => HeapTerm::Emp,
                            "true" => HeapTerm::TrueTotal,
                            _ => HeapTerm::FalseTotal,
                        })
                    }
                }
                "inv" => {
                    self.advance();
                    self.expect(TokenKind::LParen)?;
                    let span = self.span();
                    let saved = std::mem::replace(&mut self.comma_ok, false);
                    let inner = self.parse_ext();
                    self.comma_ok = saved;
                    let inner = self.spatial(inner?, span, "inv")?;
                    self.expect(TokenKind::RParen)?;
                    heap(HeapTerm::inv(inner))
                }
                "nil" => Err(self.error(&["heap term"]).with_hint("`nil` is a value")),
                _ => self.parse_location_term(),
            },
            _ => Err(self.error(&[
                "heaplet",
                "`emp`",
                "`true`",
                "`false`",
                "`inv`",
                "`(`",
                "`!`",
                "predicate call",
            ])),
        }
    }

    fn parse_location_term(&mut self) -> ParseResult<ExtTerm> {
        let loc = self.loc_path()?;
        if loc.is_var() && self.peek() == &TokenKind::LParen {
            let args = self.parse_args()?;
            return Ok(ExtTerm::Heap(HeapTerm::Call(PredCall {
                name: loc.root,
                args,
            })));
        }
        if !self.eat(&TokenKind::PointsTo) {
            // Bare location: a heaplet whose value is left unconstrained.
            return Ok(ExtTerm::Heap(HeapTerm::pt(loc, Value::placeholder())));
        }
        let val = self.parse_value()?;
        if self.peek() == &TokenKind::Comma && !self.comma_ok {
            return Err(self
                .error(&["`*`", "`||`", "end of heaplet"])
                .with_hint(format!(
                    "write `{loc} |-> (f1: {val}, f2: ...)` for a record value"
                )));
        }
        Ok(ExtTerm::Heap(HeapTerm::PointsTo(Heaplet::new(loc, val))))
    }

    fn parse_args(&mut self) -> ParseResult<Vec<Arg>> {
        self.expect(TokenKind::LParen)?;
        let mut args = Vec::new();
        if self.eat(&TokenKind::RParen) {
            return Ok(args);
        }
        loop {
            args.push(self.parse_arg()?);
            if self.eat(&TokenKind::RParen) {
                return Ok(args);
            }
            if !self.eat(&TokenKind::Comma) {
                return Err(self.error(&["`,`", "`)`"]));
            }
        }
    }

    fn is_record_start(&self) -> bool {
        self.peek() == &TokenKind::LParen
            && matches!(self.peek_at(1), TokenKind::Ident(s) if !KEYWORDS.contains(&s.as_str()))
            && self.peek_at(2) == &TokenKind::Colon
    }

    fn parse_arg(&mut self) -> ParseResult<Arg> {
        let value_start = match self.peek() {
            TokenKind::Int(_) | TokenKind::Minus => true,
            TokenKind::Ident(s) if s == "nil" => true,
            TokenKind::LParen => self.is_record_start(),
            TokenKind::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let mut k = 1;
                while self.peek_at(k) == &TokenKind::Dot
                    && matches!(self.peek_at(k + 1), TokenKind::Ident(_))
                {
                    k += 2;
                }
                matches!(self.peek_at(k), TokenKind::Comma | TokenKind::RParen)
            }
            _ => false,
        };
        if value_start {
            return self.parse_value().map(Arg::Value);
        }
        let span = self.span();
        let saved = std::mem::replace(&mut self.comma_ok, true);
        let t = self.parse_ext();
        self.comma_ok = saved;
        Ok(Arg::Term(self.spatial(t?, span, "argument")?))
    }

    pub fn parse_value(&mut self) -> ParseResult<Value> {
        match self.peek().clone() {
            TokenKind::Int(n) => {
                self.advance();
                Ok(Value::Lit(n))
            }
            TokenKind::Minus => {
                self.advance();
                match self.peek().clone() {
                    TokenKind::Int(n) => {
                        self.advance();
                        Ok(Value::Lit(-n))
                    }
                    _ => Err(self.error(&["integer"])),
                }
            }
            TokenKind::Ident(s) if s == "nil" => {
                self.advance();
                Ok(Value::Nil)
            }
            TokenKind::LParen => self.parse_record(),
            TokenKind::Ident(_) => Ok(Value::Sym(self.loc_path()?)),
            _ => Err(self.error(&["integer", "identifier", "`nil`", "record"])),
        }
    }

    fn parse_record(&mut self) -> ParseResult<Value> {
        self.expect(TokenKind::LParen)?;
        let mut fields = Vec::new();
        let mut seen = BTreeSet::new();
        loop {
            let span = self.span();
            let name = self.ident()?;
            if !seen.insert(name.clone()) {
                return Err(SyntaxError::new(
                    span,
                    vec!["distinct record field".into()],
                    format!("duplicate field `{name}`"),
                ));
            }
            self.expect(TokenKind::Colon)?;
            let saved = std::mem::replace(&mut self.comma_ok, true);
            let v = self.parse_value();
            self.comma_ok = saved;
            fields.push((name, v?));
            if self.eat(&TokenKind::RParen) {
                return Ok(Value::Record(fields));
            }
            if !self.eat(&TokenKind::Comma) {
                return Err(self.error(&["`,`", "`)`"]));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn heap(src: &str) -> HeapTerm {
        parse_heap(src).unwrap_or_else(|e| panic!("{src}: {e}"))
    }

    fn pt(l: &str, v: Value) -> HeapTerm {
        HeapTerm::pt(Location::from_dotted(l), v)
    }

    #[test]
    fn single_heaplet() {
        assert_eq!(heap("a |-> 5"), pt("a", Value::Lit(5)));
    }

    #[test]
    fn alias_example() {
        assert_eq!(
            heap("x |-> z * y |-> z"),
            HeapTerm::conj(pt("x", Value::sym("z")), pt("y", Value::sym("z")))
        );
    }

    #[test]
    fn conjunction_binds_tighter_than_disjunction() {
        let a = |n: &str| pt(n, Value::sym("v"));
        assert_eq!(
            heap("a1 |-> v * a2 |-> v || a3 |-> v"),
            HeapTerm::disj(HeapTerm::conj(a("a1"), a("a2")), a("a3"))
        );
        assert_eq!(
            heap("p |-> v * q |-> v || r |-> v * s |-> v"),
            HeapTerm::disj(
                HeapTerm::conj(a("p"), a("q")),
                HeapTerm::conj(a("r"), a("s"))
            )
        );
    }

    #[test]
    fn field_paths_are_left_associative() {
        match heap("o.f1.f2.f3 |-> x") {
            HeapTerm::PointsTo(h) => {
                assert_eq!(h.loc.root, "o");
                assert_eq!(h.loc.path, vec!["f1", "f2", "f3"]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn partial_constants_and_calls() {
        assert_eq!(
            heap("true(a) * tree(l) * emp(b)"),
            HeapTerm::conj(
                HeapTerm::conj(
                    HeapTerm::TruePartial("a".into()),
                    HeapTerm::Call(PredCall {
                        name: "tree".into(),
                        args: vec![Arg::Value(Value::sym("l"))]
                    })
                ),
                HeapTerm::EmpPartial("b".into())
            )
        );
    }

    #[test]
    fn call_arguments_distinguish_values_and_terms() {
        let t = heap("p(x.f, 3, nil, (g: y), a |-> b, emp, q(z))");
        let HeapTerm::Call(call) = t else { panic!() };
        assert_eq!(
            call.args[0],
            Arg::Value(Value::Sym(Location::from_dotted("x.f")))
        );
        assert_eq!(call.args[1], Arg::Value(Value::Lit(3)));
        assert_eq!(call.args[2], Arg::Value(Value::Nil));
        assert!(matches!(call.args[3], Arg::Value(Value::Record(_))));
        assert_eq!(call.args[4], Arg::Term(pt("a", Value::sym("b"))));
        assert_eq!(call.args[5], Arg::Term(HeapTerm::Emp));
        assert!(matches!(call.args[6], Arg::Term(HeapTerm::Call(_))));
    }

    #[test]
    fn bare_location_has_placeholder_value() {
        assert_eq!(heap("a.f1"), pt("a.f1", Value::placeholder()));
    }

    #[test]
    fn comma_value_is_rejected_with_hint() {
        let err = parse_term("x |-> a, b").unwrap_err();
        assert_eq!(err.span.column, 8);
        assert!(err.hint.unwrap().contains("(f1: a"));
    }

    #[test]
    fn logical_layer() {
        let t = parse_term("!a |-> b && c |-> d | emp").unwrap();
        let ExtTerm::Or(l, r) = t else { panic!() };
        assert_eq!(*r, ExtTerm::Heap(HeapTerm::Emp));
        assert!(matches!(*l, ExtTerm::And(..)));
    }

    #[test]
    fn logical_formula_cannot_be_spatial_operand() {
        let err = parse_term("(a |-> b && c |-> d) * e |-> f").unwrap_err();
        assert!(err.found.contains("logical"));
    }

    #[test]
    fn reports_position_and_expected_tokens() {
        let err = parse_term("a |-> b *\n  * c |-> d").unwrap_err();
        assert_eq!((err.span.line, err.span.column), (2, 3));
        assert!(err.expected.iter().any(|e| e == "heaplet"));
    }

    #[test]
    fn duplicate_record_field_is_rejected() {
        assert!(parse_term("x |-> (f: a, f: b)").is_err());
    }
}
