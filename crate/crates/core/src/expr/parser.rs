//! Recursive-descent parser for the field grammar:
//!
//! ```text
//! field   := expr ("," expr)* ;
//! expr    := term (("+"|"-") term)* ;
//! term    := factor (("*"|"/") factor)* ;
//! factor  := base ("^" unsigned-integer)? ;
//! base    := number | ident | "(" expr ")" | "-" base | func "(" expr ")" ;
//! ident   := "x" digits | "u" digits ;
//! func    := "sin"|"cos"|"exp"|"tanh"|"sqrt"|"abs" ;
//! ```
//!
//! Note that unary minus binds tighter than `^`: `-x1^2` is `(-x1)^2`.

use super::ast::{BinOp, Expr, Func, Var};
use super::ParseError;

pub(crate) struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    n: usize,
    m: usize,
}

impl<'a> Parser<'a> {
    pub(crate) fn new(src: &'a str, n: usize, m: usize) -> Self {
        Parser { src, bytes: src.as_bytes(), pos: 0, n, m }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn syntax<T>(&self, offset: usize, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax { offset, message: message.into() })
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        match self.peek() {
            Some(b) if b == c => {
                self.pos += 1;
                Ok(())
            }
            Some(b) => self.syntax(self.pos, format!("expected '{}', found '{}'", c as char, b as char)),
            None => self.syntax(self.pos, format!("expected '{}', found end of input", c as char)),
        }
    }

    pub(crate) fn field(&mut self) -> Result<Vec<Expr>, ParseError> {
        let mut components = vec![self.expr()?];
        while self.peek() == Some(b',') {
            self.pos += 1;
            components.push(self.expr()?);
        }
        self.finish()?;
        Ok(components)
    }

    pub(crate) fn single(&mut self) -> Result<Expr, ParseError> {
        let e = self.expr()?;
        self.finish()?;
        Ok(e)
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            Some(b) => self.syntax(self.pos, format!("unexpected '{}'", b as char)),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.base()?;
        if self.peek() != Some(b'^') {
            return Ok(base);
        }
        self.pos += 1;
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.syntax(start, "expected unsigned integer exponent");
        }
        match self.src[start..self.pos].parse::<u32>() {
            Ok(k) => Ok(Expr::Pow(Box::new(base), k)),
            Err(_) => self.syntax(start, "exponent out of range"),
        }
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        let start = match self.peek() {
            None => return self.syntax(self.pos, "unexpected end of input"),
            Some(_) => self.pos,
        };
        let c = self.bytes[start];
        if c == b'(' {
            self.pos += 1;
            let e = self.expr()?;
            self.expect(b')')?;
            return Ok(e);
        }
        if c == b'-' {
            self.pos += 1;
            let inner = self.base()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        if c.is_ascii_digit() || c == b'.' {
            return self.number();
        }
        if c.is_ascii_alphabetic() {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_alphanumeric() {
                self.pos += 1;
            }
            let word = &self.src[start..self.pos];
            if let Some(func) = Func::from_name(word) {
                self.expect(b'(')?;
                let arg = self.expr()?;
                self.expect(b')')?;
                return Ok(Expr::Call(func, Box::new(arg)));
            }
            return self.identifier(word, start);
        }
        let ch = self.src[start..].chars().next().unwrap_or('?');
        self.syntax(start, format!("unexpected '{ch}'"))
    }

    fn identifier(&self, word: &str, offset: usize) -> Result<Expr, ParseError> {
        let unknown = || ParseError::UnknownIdentifier { name: word.to_string(), offset };
        let (kind, digits) = word.split_at(1);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(unknown());
        }
        let index: usize = digits.parse().map_err(|_| unknown())?;
        match kind {
            "x" if (1..=self.n).contains(&index) => Ok(Expr::Var(Var::State(index - 1))),
            "u" if (1..=self.m).contains(&index) => Ok(Expr::Var(Var::Control(index - 1))),
            _ => Err(unknown()),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.bytes.len() && p.bytes[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let int_digits = digits(self);
        let mut frac_digits = 0;
        if self.bytes.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            frac_digits = digits(self);
        }
        if int_digits + frac_digits == 0 {
            return self.syntax(start, "malformed number");
        }
        if matches!(self.bytes.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.bytes.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                return self.syntax(save, "malformed exponent");
            }
        }
        match self.src[start..self.pos].parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Expr::Num(v)),
            _ => self.syntax(start, "number out of range"),
        }
    }
}
