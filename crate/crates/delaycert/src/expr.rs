//! Recursive-descent parser and evaluator for scalar nonlinearities.
//!
//! Grammar:
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := base ('^' factor)?            // '^' right-associative
//! base   := number | 'sigma' | fn '(' expr ')' | '(' expr ')' | '-' base
//! fn     := 'abs' | 'exp' | 'sin' | 'cos' | 'tanh'
//! ```

use crate::error::{Error, Result};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryFn {
    Neg,
    Abs,
    Exp,
    Sin,
    Cos,
    Tanh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Parsed expression tree over the single variable `sigma`.
#[derive(Debug, Clone, PartialEq)]
pub enum ExprTree {
    Constant(f64),
    Sigma,
    Unary(UnaryFn, Box<ExprTree>),
    Binary(BinOp, Box<ExprTree>, Box<ExprTree>),
}

impl ExprTree {
    /// Evaluate at `sigma`. Division by zero and non-finite intermediate
    /// results are reported as errors rather than silently propagating.
    pub fn eval(&self, sigma: f64) -> Result<f64> {
        let v = match self {
            ExprTree::Constant(c) => *c,
            ExprTree::Sigma => sigma,
            ExprTree::Unary(f, a) => {
                let x = a.eval(sigma)?;
                match f {
                    UnaryFn::Neg => -x,
                    UnaryFn::Abs => x.abs(),
                    UnaryFn::Exp => x.exp(),
                    UnaryFn::Sin => x.sin(),
                    UnaryFn::Cos => x.cos(),
                    UnaryFn::Tanh => x.tanh(),
                }
            }
            ExprTree::Binary(op, a, b) => {
                let x = a.eval(sigma)?;
                let y = b.eval(sigma)?;
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        if y == 0.0 {
                            return Err(Error::Eval(format!("division by zero at sigma = {sigma}")));
                        }
                        x / y
                    }
                    BinOp::Pow => x.powf(y),
                }
            }
        };
        if !v.is_finite() {
            return Err(Error::Eval(format!("non-finite value at sigma = {sigma}")));
        }
        Ok(v)
    }

    fn precedence(&self) -> u8 {
        match self {
            ExprTree::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            ExprTree::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            ExprTree::Binary(BinOp::Pow, ..) => 3,
            ExprTree::Unary(UnaryFn::Neg, _) => 2,
            _ => 4,
        }
    }
}

impl fmt::Display for ExprTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(f: &mut fmt::Formatter<'_>, e: &ExprTree, parent_prec: u8) -> fmt::Result {
            if e.precedence() < parent_prec {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            ExprTree::Constant(c) => write!(f, "{c}"),
            ExprTree::Sigma => write!(f, "sigma"),
            ExprTree::Unary(UnaryFn::Neg, a) => {
                write!(f, "-")?;
                child(f, a, 3)
            }
            ExprTree::Unary(func, a) => {
                let name = match func {
                    UnaryFn::Abs => "abs",
                    UnaryFn::Exp => "exp",
                    UnaryFn::Sin => "sin",
                    UnaryFn::Cos => "cos",
                    UnaryFn::Tanh => "tanh",
                    UnaryFn::Neg => unreachable!(),
                };
                write!(f, "{name}({a})")
            }
            ExprTree::Binary(op, a, b) => {
                let (sym, prec, right_assoc) = match op {
                    BinOp::Add => ("+", 1, false),
                    BinOp::Sub => ("-", 1, false),
                    BinOp::Mul => ("*", 2, false),
                    BinOp::Div => ("/", 2, false),
                    BinOp::Pow => ("^", 3, true),
                };
                if right_assoc {
                    child(f, a, prec + 1)?;
                    write!(f, "{sym}")?;
                    child(f, b, prec)
                } else {
                    child(f, a, prec)?;
                    write!(f, "{sym}")?;
                    child(f, b, prec + 1)
                }
            }
        }
    }
}

struct Parser<'a> {
    text: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Syntax {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.text.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<ExprTree> {
        let mut lhs = self.term()?;
        while let Some(c) = self.peek() {
            let op = match c {
                b'+' => BinOp::Add,
                b'-' => BinOp::Sub,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = ExprTree::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<ExprTree> {
        let mut lhs = self.factor()?;
        while let Some(c) = self.peek() {
            let op = match c {
                b'*' => BinOp::Mul,
                b'/' => BinOp::Div,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = ExprTree::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<ExprTree> {
        let base = self.base()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exponent = self.factor()?;
            return Ok(ExprTree::Binary(
                BinOp::Pow,
                Box::new(base),
                Box::new(exponent),
            ));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<ExprTree> {
        match self.peek() {
            None => Err(self.err("unexpected end of input")),
            Some(b'-') => {
                self.pos += 1;
                let inner = self.base()?;
                Ok(ExprTree::Unary(UnaryFn::Neg, Box::new(inner)))
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            Some(c) => Err(self.err(format!("unexpected character '{}'", c as char))),
        }
    }

    fn number(&mut self) -> Result<ExprTree> {
        let start = self.pos;
        while self.pos < self.text.len() {
            let c = self.text[self.pos];
            if c.is_ascii_digit() || c == b'.' {
                self.pos += 1;
            } else if (c == b'e' || c == b'E')
                && self.pos > start
                && self
                    .text
                    .get(self.pos + 1)
                    .is_some_and(|&d| d.is_ascii_digit() || d == b'+' || d == b'-')
            {
                self.pos += 2;
                while self.pos < self.text.len() && self.text[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                break;
            } else {
                break;
            }
        }
        let s = std::str::from_utf8(&self.text[start..self.pos]).expect("ascii slice");
        s.parse::<f64>()
            .map(ExprTree::Constant)
            .map_err(|_| Error::Syntax {
                offset: start,
                message: format!("invalid number '{s}'"),
            })
    }

    fn ident(&mut self) -> Result<ExprTree> {
        let start = self.pos;
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.text[start..self.pos]).expect("ascii slice");
        if name == "sigma" {
            return Ok(ExprTree::Sigma);
        }
        let func = match name {
            "abs" => UnaryFn::Abs,
            "exp" => UnaryFn::Exp,
            "sin" => UnaryFn::Sin,
            "cos" => UnaryFn::Cos,
            "tanh" => UnaryFn::Tanh,
            _ => {
                return Err(Error::Syntax {
                    offset: start,
                    message: format!("unknown identifier '{name}'"),
                })
            }
        };
        if self.peek() != Some(b'(') {
            return Err(self.err(format!("expected '(' after '{name}'")));
        }
        self.pos += 1;
        let inner = self.expr()?;
        if self.peek() != Some(b')') {
            return Err(self.err("expected ')'"));
        }
        self.pos += 1;
        Ok(ExprTree::Unary(func, Box::new(inner)))
    }
}

/// Parse an expression in the variable `sigma`.
pub fn parse_expression(text: &str) -> Result<ExprTree> {
    if !text.is_ascii() {
        return Err(Error::Syntax {
            offset: 0,
            message: "expression must be ascii".into(),
        });
    }
    let mut p = Parser {
        text: text.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.text.len() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn goodwin_expression() {
        let e = parse_expression("1/(1+abs(sigma)^3)").unwrap();
        assert!((e.eval(1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((e.eval(-2.0).unwrap() - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn identity_expression() {
        let e = parse_expression("sigma").unwrap();
        assert_eq!(e.eval(2.5).unwrap(), 2.5);
    }

    #[test]
    fn syntax_error_offset() {
        let err = parse_expression("1+").unwrap_err();
        match err {
            Error::Syntax { offset, .. } => assert_eq!(offset, 2),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn power_right_associative() {
        // 2^3^2 = 2^(3^2) = 512
        let e = parse_expression("2^3^2").unwrap();
        assert_eq!(e.eval(0.0).unwrap(), 512.0);
    }

    #[test]
    fn unary_minus_binds_tight() {
        let e = parse_expression("-sigma^2+1").unwrap();
        // '-' applies to the base 'sigma', then '^2': (-sigma)^2 + 1
        assert_eq!(e.eval(3.0).unwrap(), 10.0);
    }

    #[test]
    fn division_by_zero_is_error() {
        let e = parse_expression("1/sigma").unwrap();
        assert!(e.eval(0.0).is_err());
        assert!((e.eval(2.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn print_parse_roundtrip() {
        for src in [
            "1/(1+abs(sigma)^3)",
            "sigma",
            "-(sigma+1)*2",
            "2^3^2",
            "sin(sigma)*cos(sigma)-tanh(1-sigma)",
            "1.5e-3*sigma + exp(-sigma/2)",
        ] {
            let a = parse_expression(src).unwrap();
            let printed = a.to_string();
            let b = parse_expression(&printed).unwrap();
            assert_eq!(a, b, "roundtrip of {src} via {printed}");
            assert_eq!(printed, b.to_string());
        }
    }
}
