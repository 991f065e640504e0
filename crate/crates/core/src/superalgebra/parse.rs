//! Text syntax for scalars, e.g. `3/2*z^-2*theta1*theta2 + i*w`.
//!
//! Grammar (`^` binds tighter than unary minus, which binds tighter than `*`
//! and `/`):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' '-'? integer)?
//! atom   := integer | 'i' | identifier | '(' expr ')'
//! ```
//!
//! Division is allowed by any invertible element, so transition maps such as
//! `1/w + psi1*psi2/w^3` can be written directly.

use std::sync::Arc;

use super::field::Gq;
use super::scalar::SuperScalar;
use super::vars::{is_identifier, VarTable};
use crate::error::{Error, Result};

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    table: &'a Arc<VarTable>,
}

/// Parses a scalar over `table`.
pub fn parse_scalar(text: &str, table: &Arc<VarTable>) -> Result<SuperScalar> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, table };
    let value = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(value)
}

impl<'a> Parser<'a> {
    fn error(&self, msg: &str) -> Error {
        Error::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<SuperScalar> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<SuperScalar> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = &acc * &self.unary()?;
                }
                Some(b'/') => {
                    self.pos += 1;
                    let at = self.pos;
                    let d = self.unary()?;
                    let inv = d.invert().map_err(|_| Error::Parse { pos: at, msg: format!("cannot divide by `{d}`") })?;
                    acc = &acc * &inv;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<SuperScalar> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<SuperScalar> {
        let base = self.atom()?;
        if self.peek() != Some(b'^') {
            return Ok(base);
        }
        self.pos += 1;
        let negative = if self.peek() == Some(b'-') {
            self.pos += 1;
            true
        } else {
            false
        };
        self.skip_ws();
        let digits = self.digits().ok_or_else(|| self.error("expected integer exponent"))?;
        let e: i64 = digits.parse().map_err(|_| self.error("exponent out of range"))?;
        let at = self.pos;
        base.pow(if negative { -e } else { e })
            .map_err(|_| Error::Parse { pos: at, msg: format!("`{base}` is not invertible") })
    }

    fn digits(&mut self) -> Option<String> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        (self.pos > start).then(|| String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn atom(&mut self) -> Result<SuperScalar> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let d = self.digits().expect("digit present");
                let n: num_bigint::BigInt = d.parse().map_err(|_| self.error("bad integer"))?;
                Ok(SuperScalar::constant(self.table, Gq::from_rational(num_rational::BigRational::from_integer(n))))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                debug_assert!(is_identifier(name));
                if name == "i" {
                    return Ok(SuperScalar::constant(self.table, Gq::i()));
                }
                SuperScalar::var(self.table, name).map_err(|_| Error::Parse {
                    pos: start,
                    msg: format!("unknown variable `{name}`"),
                })
            }
            _ => Err(self.error("expected a number, variable or `(`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::superalgebra::vars::Parity;

    fn table() -> Arc<VarTable> {
        VarTable::new(&[("z", Parity::Even), ("w", Parity::Even), ("theta1", Parity::Odd), ("theta2", Parity::Odd)])
            .unwrap()
    }

    #[test]
    fn parses_the_documented_example() {
        let t = table();
        let s = parse_scalar("3/2*z^-2*theta1*theta2 + i*w", &t).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.to_string(), "3/2*z^-2*theta1*theta2 + i*w");
    }

    #[test]
    fn division_by_units() {
        let t = table();
        let a = parse_scalar("1/w + theta1*theta2/w^3", &t).unwrap();
        let b = parse_scalar("w^-1 + w^-3*theta1*theta2", &t).unwrap();
        assert_eq!(a, b);
        assert!(parse_scalar("1/(1+w)", &t).is_err());
    }

    #[test]
    fn reports_positions() {
        let t = table();
        match parse_scalar("z + q", &t) {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_scalar("z +", &t).is_err());
        assert!(parse_scalar("(z", &t).is_err());
    }

    #[test]
    fn complex_coefficients_round_trip() {
        let t = table();
        let s = parse_scalar("(1 - 2*i)*z - i*theta1 + (3/2 + i)", &t).unwrap();
        let back = parse_scalar(&s.to_string(), &t).unwrap();
        assert_eq!(s, back);
    }
}
