//! Prefix grammar for arc-field expressions:
//!
//! ```text
//! expr := NAME
//!       | sum(expr, expr)
//!       | scale(NUMBER, expr)
//!       | bracket(expr, expr)
//!       | ibracket(expr, expr, INTEGER)
//! ```
//!
//! Names are resolved through a caller-supplied lookup, so the same parser
//! serves every space.

use crate::algebra::{bracket, iterated_bracket, scale_const, sum, ArcField};
use crate::error::{ArcError, Result};

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    Number(String),
    Open,
    Close,
    Comma,
}

impl Token {
    fn text(&self) -> String {
        match self {
            Token::Ident(s) | Token::Number(s) => s.clone(),
            Token::Open => "(".into(),
            Token::Close => ")".into(),
            Token::Comma => ",".into(),
        }
    }
}

fn parse_err(token: impl Into<String>, message: impl Into<String>) -> ArcError {
    ArcError::Parse {
        token: token.into(),
        message: message.into(),
    }
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '(' => {
                out.push(Token::Open);
                i += 1;
            }
            ')' => {
                out.push(Token::Close);
                i += 1;
            }
            ',' => {
                out.push(Token::Comma);
                i += 1;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Token::Ident(chars[start..i].iter().collect()));
            }
            c if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' => {
                let start = i;
                i += 1;
                while i < chars.len() {
                    let d = chars[i];
                    let exp_sign = (d == '-' || d == '+') && matches!(chars[i - 1], 'e' | 'E');
                    if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || exp_sign {
                        i += 1;
                    } else {
                        break;
                    }
                }
                out.push(Token::Number(chars[start..i].iter().collect()));
            }
            other => return Err(parse_err(other.to_string(), "unexpected character")),
        }
    }
    Ok(out)
}

struct Parser<'a, P, L> {
    tokens: Vec<Token>,
    pos: usize,
    lookup: &'a L,
    _marker: std::marker::PhantomData<P>,
}

impl<P, L> Parser<'_, P, L>
where
    P: Clone + Send + Sync + 'static,
    L: Fn(&str) -> Option<ArcField<P>>,
{
    fn next(&mut self) -> Result<Token> {
        let tok = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| parse_err("<end>", "unexpected end of expression"))?;
        self.pos += 1;
        Ok(tok)
    }

    fn expect(&mut self, want: Token) -> Result<()> {
        let tok = self.next()?;
        if tok == want {
            Ok(())
        } else {
            Err(parse_err(tok.text(), format!("expected `{}`", want.text())))
        }
    }

    fn number(&mut self) -> Result<f64> {
        match self.next()? {
            Token::Number(s) => s
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err(s, "not a finite number")),
            other => Err(parse_err(other.text(), "expected a number")),
        }
    }

    fn expr(&mut self) -> Result<ArcField<P>> {
        let name = match self.next()? {
            Token::Ident(name) => name,
            other => return Err(parse_err(other.text(), "expected a field name or operator")),
        };
        let is_call = self.tokens.get(self.pos) == Some(&Token::Open);
        if !is_call {
            return (self.lookup)(&name).ok_or_else(|| parse_err(name, "unknown field"));
        }
        match name.as_str() {
            "sum" | "bracket" => {
                self.expect(Token::Open)?;
                let a = self.expr()?;
                self.expect(Token::Comma)?;
                let b = self.expr()?;
                self.expect(Token::Close)?;
                if name == "sum" {
                    sum(&a, &b)
                } else {
                    bracket(&a, &b)
                }
            }
            "scale" => {
                self.expect(Token::Open)?;
                let c = self.number()?;
                self.expect(Token::Comma)?;
                let a = self.expr()?;
                self.expect(Token::Close)?;
                Ok(scale_const(c, &a))
            }
            "ibracket" => {
                self.expect(Token::Open)?;
                let a = self.expr()?;
                self.expect(Token::Comma)?;
                let b = self.expr()?;
                self.expect(Token::Comma)?;
                let n = match self.next()? {
                    Token::Number(s) => s
                        .parse::<usize>()
                        .map_err(|_| parse_err(s, "expected a nonnegative integer"))?,
                    other => return Err(parse_err(other.text(), "expected an integer")),
                };
                self.expect(Token::Close)?;
                iterated_bracket(&a, &b, n)
            }
            _ => Err(parse_err(name, "unknown operator")),
        }
    }
}

/// Parses `src`, resolving leaf names through `lookup`.
pub fn parse_expression<P, L>(src: &str, lookup: &L) -> Result<ArcField<P>>
where
    P: Clone + Send + Sync + 'static,
    L: Fn(&str) -> Option<ArcField<P>>,
{
    let mut parser = Parser {
        tokens: tokenize(src)?,
        pos: 0,
        lookup,
        _marker: std::marker::PhantomData,
    };
    let field = parser.expr()?;
    if let Some(extra) = parser.tokens.get(parser.pos) {
        return Err(parse_err(extra.text(), "trailing input"));
    }
    Ok(field)
}
