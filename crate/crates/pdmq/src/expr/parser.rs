//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := base ('^' factor)?          (right-associative)
//! base   := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')' | '-' factor
//! ```
//!
//! `x` is the spatial variable; any other bare IDENT is a parameter.
//! Exponents must be constant (x-free) subexpressions. Precedence is
//! `^` above unary minus above `*` `/` above `+` `-`.

use super::{BinOp, Expr, Func};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    EmptyInput,
    UnexpectedChar(char),
    UnexpectedEnd,
    UnknownFunction(String),
    MalformedNumber,
    NonConstantExponent,
    TrailingInput,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("{}: byte offset {offset}", self.describe())]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub offset: usize,
}

impl ParseError {
    fn describe(&self) -> String {
        match &self.kind {
            ParseErrorKind::EmptyInput => "empty input".into(),
            ParseErrorKind::UnexpectedChar(c) => format!("unexpected character `{c}`"),
            ParseErrorKind::UnexpectedEnd => "unexpected end of input".into(),
            ParseErrorKind::UnknownFunction(n) => format!("unknown function `{n}`"),
            ParseErrorKind::MalformedNumber => "malformed number".into(),
            ParseErrorKind::NonConstantExponent => {
                "exponent must not contain the variable x".into()
            }
            ParseErrorKind::TrailingInput => "trailing input after expression".into(),
        }
    }
}

pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    p.skip_ws();
    if p.pos >= p.src.len() {
        return Err(p.err(ParseErrorKind::EmptyInput));
    }
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.err(ParseErrorKind::TrailingInput));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            kind,
            offset: self.pos,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Expr::Binary(BinOp::Add, Box::new(lhs), Box::new(rhs));
                }
                Some(b'-') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Expr::Binary(BinOp::Sub, Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    lhs = Expr::Binary(BinOp::Mul, Box::new(lhs), Box::new(rhs));
                }
                Some(b'/') => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    lhs = Expr::Binary(BinOp::Div, Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        if self.peek() == Some(b'-') {
            // unary minus sits below ^: -x^2 is -(x^2)
            self.pos += 1;
            let inner = self.factor()?;
            return Ok(inner.neg());
        }
        let base = self.base()?;
        self.skip_ws();
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exp_start = self.pos;
            let exponent = self.factor()?;
            if exponent.contains_var() {
                return Err(ParseError {
                    kind: ParseErrorKind::NonConstantExponent,
                    offset: exp_start,
                });
            }
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        match self.peek() {
            None => Err(self.err(ParseErrorKind::UnexpectedEnd)),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.skip_ws();
                if self.peek() == Some(b')') {
                    self.pos += 1;
                    Ok(e)
                } else if self.peek().is_none() {
                    Err(self.err(ParseErrorKind::UnexpectedEnd))
                } else {
                    Err(self.err(ParseErrorKind::UnexpectedChar(self.peek().unwrap() as char)))
                }
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            Some(c) => Err(self.err(ParseErrorKind::UnexpectedChar(c as char))),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self
            .peek()
            .map_or(false, |c| c.is_ascii_digit() || c == b'.')
        {
            self.pos += 1;
        }
        // optional exponent part
        if matches!(self.peek(), Some(b'e') | Some(b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            if self.peek().map_or(false, |c| c.is_ascii_digit()) {
                while self.peek().map_or(false, |c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
            } else {
                // not an exponent after all (e.g. `2*exp(x)` tokenized wrongly)
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>().map(Expr::Num).map_err(|_| ParseError {
            kind: ParseErrorKind::MalformedNumber,
            offset: start,
        })
    }

    fn ident(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self
            .peek()
            .map_or(false, |c| c.is_ascii_alphanumeric() || c == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .to_string();
        self.skip_ws();
        if self.peek() == Some(b'(') {
            let func = Func::from_name(&name).ok_or(ParseError {
                kind: ParseErrorKind::UnknownFunction(name),
                offset: start,
            })?;
            self.pos += 1;
            let arg = self.expr()?;
            self.skip_ws();
            if self.peek() == Some(b')') {
                self.pos += 1;
                Ok(Expr::Unary(func, Box::new(arg)))
            } else if self.peek().is_none() {
                Err(self.err(ParseErrorKind::UnexpectedEnd))
            } else {
                Err(self.err(ParseErrorKind::UnexpectedChar(self.peek().unwrap() as char)))
            }
        } else if name == "x" {
            Ok(Expr::Var)
        } else {
            Ok(Expr::Param(name))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{bindings, Bindings};

    #[test]
    fn parses_rational_mass_profile() {
        let e = parse_expr("1/(1 - k*x^2)").unwrap();
        let b = bindings(&[("k", 0.5)]);
        assert!((e.eval(1.0, &b).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn parses_bare_variable() {
        assert_eq!(parse_expr("x").unwrap(), Expr::Var);
    }

    #[test]
    fn parses_arcsinh_potential() {
        let e = parse_expr("arcsinh(L*x)^2/(2*L^2)").unwrap();
        let b = bindings(&[("L", 1.0)]);
        let expect = 1.0f64.asinh().powi(2) / 2.0;
        assert!((e.eval(1.0, &b).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn rejects_empty_input() {
        let err = parse_expr("   ").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::EmptyInput);
    }

    #[test]
    fn rejects_unknown_function() {
        let err = parse_expr("frobnicate(x)").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownFunction("frobnicate".into()));
        assert_eq!(err.offset, 0);
    }

    #[test]
    fn syntax_error_reports_offset() {
        let err = parse_expr("1 + @").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnexpectedChar('@'));
        assert_eq!(err.offset, 4);
    }

    #[test]
    fn rejects_variable_exponent() {
        let err = parse_expr("2^x").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::NonConstantExponent);
    }

    #[test]
    fn scientific_notation() {
        let e = parse_expr("1.5e-3 + 2E2").unwrap();
        assert_eq!(e.eval(0.0, &Bindings::new()).unwrap(), 1.5e-3 + 200.0);
    }

    #[test]
    fn rejects_trailing_input() {
        let err = parse_expr("x + 1)").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::TrailingInput);
    }
}
