//! Rational formulas in one variable `n`, such as `1 - 2^-n` or `1/(n+1)`.
//!
//! Grammar:
//! ```text
//! expr  := term (("+" | "-") term)*
//! term  := unary (("*" | "/") unary)*
//! unary := "-" unary | power
//! power := atom ("^" unary)?
//! atom  := integer | "n" | "(" expr ")"
//! ```
//! Exponents must evaluate to integers.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::kernel::Rational;

#[derive(Clone, PartialEq, Eq)]
enum Node {
    Int(i64),
    N,
    Neg(Box<Node>),
    Bin(char, Box<Node>, Box<Node>),
}

/// A parsed formula, evaluated exactly.
#[derive(Clone, PartialEq, Eq)]
pub struct Formula {
    src: String,
    root: Node,
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::InvalidArgument(format!("formula: {msg} at column {}", self.pos + 1))
    }

    fn skip(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip();
        self.s.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            lhs = Node::Bin(c as char, Box::new(lhs), Box::new(self.term()?));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            lhs = Node::Bin(c as char, Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            return Ok(Node::Bin('^', Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        match self.peek() {
            Some(b'n') => {
                self.pos += 1;
                Ok(Node::N)
            }
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let txt = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
                txt.parse()
                    .map(Node::Int)
                    .map_err(|_| self.err("integer too large"))
            }
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end")),
        }
    }
}

impl FromStr for Formula {
    type Err = Error;

    fn from_str(src: &str) -> Result<Formula> {
        let mut p = Parser {
            s: src.as_bytes(),
            pos: 0,
        };
        let root = p.expr()?;
        if p.peek().is_some() {
            return Err(p.err("trailing input"));
        }
        Ok(Formula {
            src: src.trim().to_string(),
            root,
        })
    }
}

fn eval(node: &Node, n: u64) -> Result<Rational> {
    Ok(match node {
        Node::Int(v) => Rational::int(*v),
        Node::N => Rational::from(n),
        Node::Neg(a) => -eval(a, n)?,
        Node::Bin(op, a, b) => {
            let (x, y) = (eval(a, n)?, eval(b, n)?);
            match op {
                '+' => x + y,
                '-' => x - y,
                '*' => x * y,
                '/' => {
                    if y.is_zero() {
                        return Err(Error::InvalidArgument(format!(
                            "formula divides by zero at n = {n}"
                        )));
                    }
                    x / y
                }
                '^' => power(&x, &y)?,
                _ => unreachable!(),
            }
        }
    })
}

/// Largest exponent of a general base.
const MAX_EXPONENT: u64 = 4096;

/// Largest exponent of the base 2.
const MAX_POW2_EXPONENT: u64 = 1 << 24;

fn power(x: &Rational, y: &Rational) -> Result<Rational> {
    if !y.is_integer() {
        return Err(Error::InvalidArgument(format!("non-integer exponent {y}")));
    }
    let e = y.floor_i64();
    if *x == Rational::int(2) && e.unsigned_abs() <= MAX_POW2_EXPONENT {
        return Ok(Rational::pow2(e));
    }
    if e.unsigned_abs() > MAX_EXPONENT {
        return Err(Error::InvalidArgument(format!("exponent {e} too large")));
    }
    if x.is_zero() && e < 0 {
        return Err(Error::InvalidArgument("zero to a negative power".into()));
    }
    let mut acc = Rational::one();
    for _ in 0..e.unsigned_abs() {
        acc *= x;
    }
    Ok(if e < 0 { acc.recip() } else { acc })
}

impl Formula {
    pub fn eval(&self, n: u64) -> Result<Rational> {
        eval(&self.root, n)
    }

    pub fn source(&self) -> &str {
        &self.src
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Formula({})", self.src)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.src)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> Formula {
        s.parse().unwrap()
    }

    #[test]
    fn evaluates() {
        let q = f("1 - 2^-n");
        assert_eq!(q.eval(0).unwrap(), Rational::zero());
        assert_eq!(q.eval(3).unwrap(), Rational::new(7, 8));
        assert_eq!(f("1/(n+1)").eval(4).unwrap(), Rational::new(1, 5));
        assert_eq!(f("-3^2").eval(0).unwrap(), Rational::int(-9));
        assert_eq!(f("2^-2^2").eval(0).unwrap(), Rational::new(1, 16));
        assert_eq!(f("(1/3)^-2 * n").eval(2).unwrap(), Rational::int(18));
        assert_eq!(f("7").eval(9).unwrap(), Rational::int(7));
    }

    #[test]
    fn rejects() {
        for bad in ["", "1 +", "x", "2^(1/2)", "(1", "1 2"] {
            let parsed: Result<Formula> = bad.parse();
            let ok = parsed.and_then(|p| p.eval(1)).is_ok();
            assert!(!ok, "{bad}");
        }
        assert!(f("1/(n-1)").eval(1).is_err());
    }
}
