//! Expression parser for the exact kernel.
//!
//! Grammar: integers, `i`, identifiers, `+ - * / ^`, parentheses, and
//! `sqrt(...)` whose argument must reduce to a declared root polynomial.
//! Canonical printing (the `Display` impls) emits the same grammar, and
//! parse-print-parse is idempotent.

use crate::error::{Error, Result};
use crate::exact::{RootExtElem, RootSpec, Scalar};
use num_bigint::BigInt;

#[derive(Clone, Debug)]
pub struct ParseContext {
    vars: Vec<String>,
    roots: Vec<RootSpec>,
}

impl ParseContext {
    pub fn new(vars: &[&str], roots: &[RootSpec]) -> Self {
        ParseContext {
            vars: vars.iter().map(|s| s.to_string()).collect(),
            roots: roots.to_vec(),
        }
    }

    pub fn with_owned(vars: Vec<String>, roots: Vec<RootSpec>) -> Self {
        ParseContext { vars, roots }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn roots(&self) -> &[RootSpec] {
        &self.roots
    }
}

pub fn parse_expr(text: &str, ctx: &ParseContext) -> Result<RootExtElem> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        ctx,
    };
    p.skip_ws();
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    ctx: &'a ParseContext,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> Error {
        Error::Syntax {
            offset: self.pos,
            msg: msg.to_string(),
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

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            self.skip_ws();
            true
        } else {
            false
        }
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<RootExtElem> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = acc.add(&self.term()?)?;
            } else if self.eat(b'-') {
                acc = acc.sub(&self.term()?)?;
            } else {
                return Ok(acc);
            }
        }
    }

    // term := unary (('*'|'/') unary)*
    fn term(&mut self) -> Result<RootExtElem> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                acc = acc.mul(&self.unary()?)?;
            } else if self.eat(b'/') {
                let rhs = self.unary()?;
                acc = acc.div(&rhs)?;
            } else {
                return Ok(acc);
            }
        }
    }

    // unary := '-' unary | power
    fn unary(&mut self) -> Result<RootExtElem> {
        if self.eat(b'-') {
            Ok(self.unary()?.neg())
        } else {
            self.power()
        }
    }

    // power := atom ('^' exponent)?   (right-associative)
    fn power(&mut self) -> Result<RootExtElem> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let neg = self.eat(b'-');
            let e = self.integer_literal()? as i32;
            self.skip_ws();
            let e = if neg { -e } else { e };
            // allow nested powers: x^2^3 parses as x^(2^3) is not useful;
            // the grammar keeps exponents as plain integers.
            return base.pow(e);
        }
        Ok(base)
    }

    fn integer_literal(&mut self) -> Result<i64> {
        let start = self.pos;
        while self.peek().map(|c| c.is_ascii_digit()).unwrap_or(false) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected integer"));
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        s.parse::<i64>()
            .map_err(|_| self.err("integer literal out of range"))
    }

    fn atom(&mut self) -> Result<RootExtElem> {
        self.skip_ws();
        match self.peek() {
            None => Err(self.err("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                self.skip_ws();
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.peek().map(|c| c.is_ascii_digit()).unwrap_or(false) {
                    self.pos += 1;
                }
                let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let n: BigInt = s.parse().map_err(|_| self.err("bad integer"))?;
                self.skip_ws();
                Ok(RootExtElem::constant(Scalar::from_bigint(n)))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            _ => Err(self.err("expected a number, identifier, or `(`")),
        }
    }

    fn identifier(&mut self) -> Result<RootExtElem> {
        let start = self.pos;
        while self
            .peek()
            .map(|c| c.is_ascii_alphanumeric() || c == b'_')
            .unwrap_or(false)
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .to_string();
        self.skip_ws();
        if name == "i" {
            return Ok(RootExtElem::constant(Scalar::i()));
        }
        if name == "sqrt" {
            let arg_offset = self.pos;
            if !self.eat(b'(') {
                return Err(self.err("expected `(` after sqrt"));
            }
            let inner = self.expr()?;
            if !self.eat(b')') {
                return Err(self.err("expected `)`"));
            }
            let poly = inner.as_poly().ok_or(Error::NotARootPolynomial {
                offset: arg_offset,
            })?;
            let spec = self
                .ctx
                .roots
                .iter()
                .find(|r| r.defining == poly)
                .ok_or(Error::NotARootPolynomial { offset: arg_offset })?;
            return Ok(RootExtElem::root(spec.clone()));
        }
        if let Some(spec) = self.ctx.roots.iter().find(|r| r.symbol == name) {
            return Ok(RootExtElem::root(spec.clone()));
        }
        if self.ctx.vars.iter().any(|v| v == &name) {
            return Ok(RootExtElem::var(&name));
        }
        Err(Error::UndeclaredIdentifier(name))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::RatFunc;

    fn ctx_zr() -> ParseContext {
        ParseContext::new(&["z", "t0", "t1", "t2"], &[])
    }

    #[test]
    fn rational_literal() {
        let e = parse_expr("(z^2+1)/(z-2)", &ctx_zr()).unwrap();
        let r = e.as_ratfunc().unwrap();
        let num = parse_expr("z^2+1", &ctx_zr()).unwrap().as_poly().unwrap();
        let den = parse_expr("z-2", &ctx_zr()).unwrap().as_poly().unwrap();
        assert_eq!(r, RatFunc::new(num, den).unwrap());
    }

    #[test]
    fn syntax_error_position() {
        let err = parse_expr("z^", &ctx_zr()).unwrap_err();
        match err {
            Error::Syntax { offset, .. } => assert_eq!(offset, 2),
            other => panic!("expected syntax error, got {other}"),
        }
    }

    #[test]
    fn undeclared_identifier() {
        let err = parse_expr("z + q", &ctx_zr()).unwrap_err();
        assert!(matches!(err, Error::UndeclaredIdentifier(name) if name == "q"));
    }

    #[test]
    fn sqrt_resolves_declared_root() {
        let q = parse_expr("t2^2*z^2 + 2*t1*t2*z + 1 + 2*t0*t2 + t1^2", &ctx_zr())
            .unwrap()
            .as_poly()
            .unwrap();
        let spec = RootSpec {
            symbol: "sQ".into(),
            defining: q.clone(),
        };
        let ctx = ParseContext::new(&["z", "t0", "t1", "t2"], &[spec.clone()]);
        let via_sqrt =
            parse_expr("sqrt(t2^2*z^2 + 2*t1*t2*z + 1 + 2*t0*t2 + t1^2)", &ctx).unwrap();
        let via_symbol = parse_expr("sQ", &ctx).unwrap();
        assert_eq!(via_sqrt, via_symbol);

        let err = parse_expr("sqrt(z + 1)", &ctx).unwrap_err();
        assert!(matches!(err, Error::NotARootPolynomial { .. }));
    }

    #[test]
    fn division_by_root_rationalizes() {
        // i*R/sQ  ->  coefficient i*R*sQ/Q on the {sQ} key
        let q = parse_expr("t2^2*z^2 + 2*t1*t2*z + 1 + 2*t0*t2 + t1^2", &ctx_zr())
            .unwrap()
            .as_poly()
            .unwrap();
        let spec = RootSpec {
            symbol: "sQ".into(),
            defining: q.clone(),
        };
        let ctx = ParseContext::new(&["z", "t0", "t1", "t2"], &[spec]);
        let e = parse_expr("i*(t2*z^2+t1*z+t0)/sQ", &ctx).unwrap();
        assert!(!e.is_root_free());
        let r_poly = parse_expr("t2*z^2+t1*z+t0", &ctx).unwrap().as_poly().unwrap();
        let expect = RatFunc::new(r_poly, q)
            .unwrap()
            .mul_scalar(&Scalar::i());
        assert_eq!(e.coeff(1), expect);
        assert!(e.coeff(0).is_zero());
    }

    #[test]
    fn print_parse_roundtrip() {
        let ctx = ctx_zr();
        for src in [
            "(z^2+1)/(z-2)",
            "i*z - 3/2",
            "(t1*z + t0)/(t2*z + 1) - z",
            "z^3 - 2*z + 7",
        ] {
            let once = parse_expr(src, &ctx).unwrap();
            let printed = format!("{once}");
            let twice = parse_expr(&printed, &ctx).unwrap();
            assert_eq!(once, twice, "roundtrip failed for `{src}` -> `{printed}`");
        }
    }

    #[test]
    fn negative_exponent() {
        let e = parse_expr("z^-2", &ctx_zr()).unwrap();
        let r = e.as_ratfunc().unwrap();
        assert_eq!(r, parse_expr("1/z^2", &ctx_zr()).unwrap().as_ratfunc().unwrap());
    }
}
