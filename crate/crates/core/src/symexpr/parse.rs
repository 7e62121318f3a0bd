//! Recursive-descent parser for the expression text grammar:
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := base ('^' signed-integer)?
//! base   := number | 'i' | identifier | fname '(' expr ')' | '(' expr ')' | '-' base
//! fname  := 'exp' | 'ln' | 'sin' | 'cos' | 'conj'
//! ```
//!
//! Identifiers resolve to chart coordinates first, then to whatever the
//! caller's resolver supplies.

use alloc::string::{String, ToString};

use super::chart::Chart;
use super::expr::Expr;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UnknownIdentifier(String),
}

/// A parse failure at byte offset `pos` of the input.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{}", describe(.kind, .pos, .token))]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub pos: usize,
    pub token: String,
}

fn describe(kind: &ParseErrorKind, pos: &usize, token: &str) -> String {
    match kind {
        ParseErrorKind::Syntax(msg) => alloc::format!("syntax error at offset {pos} near `{token}`: {msg}"),
        ParseErrorKind::UnknownIdentifier(name) => {
            alloc::format!("unknown identifier `{name}` at offset {pos}")
        }
    }
}

/// Either a grammar error or an error raised by the resolver.
#[derive(Clone, Debug, PartialEq)]
pub enum ParseFailure<E> {
    Parse(ParseError),
    Resolve(E),
}

impl<E> From<ParseError> for ParseFailure<E> {
    fn from(e: ParseError) -> Self {
        ParseFailure::Parse(e)
    }
}

/// Parse against the chart's coordinates only.
pub fn parse(text: &str, chart: &Chart) -> Result<Expr, ParseError> {
    let mut none = |_: &str, _: usize| Ok::<_, core::convert::Infallible>(None);
    match parse_with(text, chart, &mut none) {
        Ok(e) => Ok(e),
        Err(ParseFailure::Parse(e)) => Err(e),
        Err(ParseFailure::Resolve(never)) => match never {},
    }
}

/// Parse with a resolver for non-coordinate identifiers. The resolver gets
/// the identifier and its byte offset; returning `Ok(None)` reports an
/// unknown identifier.
pub fn parse_with<E, R>(text: &str, chart: &Chart, resolve: &mut R) -> Result<Expr, ParseFailure<E>>
where
    R: FnMut(&str, usize) -> Result<Option<Expr>, E>,
{
    let mut p = Parser { src: text, pos: 0, chart, resolve, depth: 0 };
    p.skip_ws();
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < text.len() {
        return Err(p.syntax("unexpected trailing input").into());
    }
    Ok(e)
}

const MAX_DEPTH: usize = 256;

struct Parser<'a, R> {
    src: &'a str,
    pos: usize,
    chart: &'a Chart,
    resolve: &'a mut R,
    depth: usize,
}

impl<E, R> Parser<'_, R>
where
    R: FnMut(&str, usize) -> Result<Option<Expr>, E>,
{
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn token_here(&self) -> String {
        let rest = &self.src[self.pos..];
        if rest.is_empty() {
            return "<end>".to_string();
        }
        let end = rest
            .char_indices()
            .find(|&(i, c)| i > 0 && (c.is_whitespace() || "+-*/^()".contains(c)))
            .map_or(rest.len(), |(i, _)| i);
        rest[..end].to_string()
    }

    fn syntax(&self, msg: &str) -> ParseError {
        ParseError { kind: ParseErrorKind::Syntax(msg.to_string()), pos: self.pos, token: self.token_here() }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn enter(&mut self) -> Result<(), ParseFailure<E>> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.syntax("expression nested too deeply").into());
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr, ParseFailure<E>> {
        self.enter()?;
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                let t = self.term()?;
                acc = acc + t;
            } else if self.eat('-') {
                let t = self.term()?;
                acc = acc - t;
            } else {
                break;
            }
        }
        self.depth -= 1;
        Ok(acc)
    }

    fn term(&mut self) -> Result<Expr, ParseFailure<E>> {
        let mut acc = self.factor()?;
        loop {
            if self.eat('*') {
                let f = self.factor()?;
                acc = acc * f;
            } else if self.eat('/') {
                let f = self.factor()?;
                acc = acc / f;
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Expr, ParseFailure<E>> {
        let b = self.base()?;
        if self.eat('^') {
            self.skip_ws();
            let start = self.pos;
            if matches!(self.peek(), Some('+') | Some('-')) {
                self.pos += 1;
            }
            let digits_start = self.pos;
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
            if self.pos == digits_start {
                self.pos = start;
                return Err(self.syntax("expected an integer exponent").into());
            }
            let n: i32 = self.src[start..self.pos].parse().map_err(|_| {
                let mut e = self.syntax("exponent out of range");
                e.pos = start;
                e
            })?;
            return Ok(b.powi(n));
        }
        Ok(b)
    }

    fn base(&mut self) -> Result<Expr, ParseFailure<E>> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            None => Err(self.syntax("unexpected end of input").into()),
            Some('-') => {
                self.pos += 1;
                self.enter()?;
                let b = self.base()?;
                self.depth -= 1;
                Ok(-b)
            }
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(self.syntax("expected `)`").into());
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
                    self.pos += 1;
                }
                let ident = &self.src[start..self.pos];
                match ident {
                    "i" => Ok(Expr::i()),
                    "exp" | "ln" | "sin" | "cos" | "conj" => {
                        if !self.eat('(') {
                            return Err(self.syntax("expected `(` after function name").into());
                        }
                        let arg = self.expr()?;
                        if !self.eat(')') {
                            return Err(self.syntax("expected `)`").into());
                        }
                        Ok(match ident {
                            "exp" => arg.exp(),
                            "ln" => arg.ln(),
                            "sin" => arg.sin(),
                            "cos" => arg.cos(),
                            _ => arg.conj(),
                        })
                    }
                    _ => {
                        if let Some(k) = self.chart.index_of(ident) {
                            return Ok(Expr::coord(k));
                        }
                        match (self.resolve)(ident, start) {
                            Ok(Some(e)) => Ok(e),
                            Ok(None) => Err(ParseError {
                                kind: ParseErrorKind::UnknownIdentifier(ident.to_string()),
                                pos: start,
                                token: ident.to_string(),
                            }
                            .into()),
                            Err(e) => Err(ParseFailure::Resolve(e)),
                        }
                    }
                }
            }
            Some(_) => Err(self.syntax("unexpected character").into()),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseFailure<E>> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while matches!(p.peek(), Some(c) if c.is_ascii_digit()) {
                p.pos += 1;
            }
            p.pos > s
        };
        digits(self);
        if self.peek() == Some('.') {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.peek(), Some('e') | Some('E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some('+') | Some('-')) {
                self.pos += 1;
            }
            if !digits(self) {
                self.pos = save;
            }
        }
        let text = &self.src[start..self.pos];
        match text.parse::<f64>() {
            Ok(x) => Ok(Expr::real(x)),
            Err(_) => {
                self.pos = start;
                Err(self.syntax("malformed number").into())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::C64;

    fn chart() -> Chart {
        Chart::new(&["x1", "x2", "t"]).unwrap()
    }

    #[test]
    fn parses_grammar() {
        let c = chart();
        let e = parse("x1^2 + 1", &c).unwrap();
        assert_eq!(e, Expr::coord(0).powi(2) + Expr::one());
        let e = parse("exp(-(x1^2 + t))", &c).unwrap();
        assert_eq!(e, (Expr::coord(0).powi(2) + Expr::coord(2)).neg().exp());
        let e = parse("2.5e-1*i", &c).unwrap();
        assert_eq!(e, Expr::constant(C64::new(0.0, 0.25)));
        let e = parse("x1/x2/t", &c).unwrap();
        assert_eq!(e, (Expr::coord(0) / Expr::coord(1)) / Expr::coord(2));
        let e = parse("x1^-2", &c).unwrap();
        assert_eq!(e, Expr::coord(0).powi(-2));
    }

    #[test]
    fn reports_errors_with_offsets() {
        let c = chart();
        let err = parse("x1 + y", &c).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownIdentifier("y".into()));
        assert_eq!(err.pos, 5);
        let err = parse("x1 + ", &c).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::Syntax(_)));
        assert!(parse("exp x1", &c).is_err());
        assert!(parse("x1^y", &c).is_err());
        assert!(parse("(x1", &c).is_err());
        assert!(parse("x1 x2", &c).is_err());
        assert!(parse("x1^99999999999", &c).is_err());
    }

    #[test]
    fn deep_nesting_is_an_error_not_a_crash() {
        let c = chart();
        let mut s = String::new();
        for _ in 0..5000 {
            s.push('(');
        }
        assert!(parse(&s, &c).is_err());
        let minus: String = std::iter::repeat_n('-', 5000).collect();
        assert!(parse(&minus, &c).is_err());
    }
}
