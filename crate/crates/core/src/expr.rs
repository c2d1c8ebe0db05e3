//! Polynomial expression syntax used by every input file.
//!
//! Grammar: integers, identifiers, `+ - * / ^`, parentheses, function-call
//! forms `name(expr)` and an optional trailing `⊗ name` on a product, used
//! for tensor words. `/` only accepts an integer divisor.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{AlgebraError, Result};
use crate::ring::{Element, Ring};

#[derive(Clone, Debug, PartialEq)]
pub enum Ast {
    Num(BigInt),
    Ident(String),
    Call(String, Box<Ast>),
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Div(Box<Ast>, BigInt),
    Neg(Box<Ast>),
    Pow(Box<Ast>, i64),
    Tensor(Box<Ast>, String),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Op(char),
}

fn ident_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '\'' | '|' | '.')
}

fn tokenize(s: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            out.push((Tok::Num(text.parse().unwrap()), start + 1));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && ident_char(chars[i]) {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), start + 1));
        } else if "+-*/^()⊗".contains(c) {
            out.push((Tok::Op(c), i + 1));
            i += 1;
        } else {
            return Err(AlgebraError::parse_at(
                format!("column {}", i + 1),
                format!("unexpected character {c:?}"),
            ));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn column(&self) -> String {
        match self.toks.get(self.pos) {
            Some((_, c)) => format!("column {c}"),
            None => format!("column {}", self.len + 1),
        }
    }

    fn err(&self, msg: impl Into<String>) -> AlgebraError {
        AlgebraError::parse_at(self.column(), msg)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<Ast> {
        let mut lhs = if self.eat('-') {
            Ast::Neg(Box::new(self.term()?))
        } else {
            self.eat('+');
            self.term()?
        };
        loop {
            if self.eat('+') {
                lhs = Ast::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Ast::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Ast> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Ast::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                match self.peek().cloned() {
                    Some(Tok::Num(n)) => {
                        self.pos += 1;
                        if n.is_zero() {
                            return Err(self.err("division by zero"));
                        }
                        lhs = Ast::Div(Box::new(lhs), n);
                    }
                    _ => return Err(self.err("only integer divisors are allowed")),
                }
            } else if self.eat('⊗') {
                match self.peek().cloned() {
                    Some(Tok::Ident(name)) => {
                        self.pos += 1;
                        return Ok(Ast::Tensor(Box::new(lhs), name));
                    }
                    Some(Tok::Num(n)) => {
                        self.pos += 1;
                        return Ok(Ast::Tensor(Box::new(lhs), n.to_string()));
                    }
                    _ => return Err(self.err("expected a generator name after ⊗")),
                }
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Ast> {
        if self.eat('-') {
            return Ok(Ast::Neg(Box::new(self.unary()?)));
        }
        let base = self.atom()?;
        if self.eat('^') {
            let neg = self.eat('-');
            match self.peek().cloned() {
                Some(Tok::Num(n)) => {
                    self.pos += 1;
                    let e: i64 = n
                        .try_into()
                        .map_err(|_| self.err("exponent too large"))?;
                    Ok(Ast::Pow(Box::new(base), if neg { -e } else { e }))
                }
                _ => Err(self.err("expected an integer exponent")),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Ast> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Ast::Num(n))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if self.eat('(') {
                    let inner = self.sum()?;
                    if !self.eat(')') {
                        return Err(self.err("expected ')'"));
                    }
                    Ok(Ast::Call(name, Box::new(inner)))
                } else {
                    Ok(Ast::Ident(name))
                }
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let inner = self.sum()?;
                if !self.eat(')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(inner)
            }
            Some(t) => Err(self.err(format!("unexpected token {t:?}"))),
            None => Err(self.err("unexpected end of expression")),
        }
    }
}

pub fn parse(text: &str) -> Result<Ast> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        len: text.chars().count(),
    };
    let ast = p.sum()?;
    if p.pos != p.toks.len() {
        return Err(p.err("trailing input"));
    }
    Ok(ast)
}

/// Evaluation context: decides what identifiers, calls and tensor words mean.
pub trait Env {
    type Value: Clone;
    fn constant(&self, q: &BigRational) -> Result<Self::Value>;
    fn ident(&self, name: &str) -> Result<Self::Value>;
    fn call(&self, name: &str, arg: &Ast) -> Result<Self::Value> {
        let _ = arg;
        Err(AlgebraError::parse(format!("unknown function {name}")))
    }
    fn tensor(&self, lhs: &Ast, gen: &str) -> Result<Self::Value> {
        let _ = lhs;
        Err(AlgebraError::parse(format!("tensor word ⊗{gen} not allowed here")))
    }
    fn add(&self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value>;
    fn neg(&self, a: &Self::Value) -> Result<Self::Value>;
    fn mul(&self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value>;
    fn pow(&self, a: &Self::Value, e: i64) -> Result<Self::Value>;
}

pub fn eval<E: Env>(env: &E, ast: &Ast) -> Result<E::Value> {
    match ast {
        Ast::Num(n) => env.constant(&BigRational::from_integer(n.clone())),
        Ast::Ident(name) => env.ident(name),
        Ast::Call(name, arg) => env.call(name, arg),
        Ast::Add(a, b) => env.add(&eval(env, a)?, &eval(env, b)?),
        Ast::Sub(a, b) => env.add(&eval(env, a)?, &env.neg(&eval(env, b)?)?),
        Ast::Mul(a, b) => env.mul(&eval(env, a)?, &eval(env, b)?),
        Ast::Div(a, d) => {
            let inv = env.constant(&BigRational::new(BigInt::one(), d.clone()))?;
            env.mul(&eval(env, a)?, &inv)
        }
        Ast::Neg(a) => env.neg(&eval(env, a)?),
        Ast::Pow(a, e) => env.pow(&eval(env, a)?, *e),
        Ast::Tensor(lhs, gen) => env.tensor(lhs, gen),
    }
}

/// Plain evaluation inside one presentation.
pub struct RingEnv<'a> {
    pub ring: &'a Ring,
}

impl Env for RingEnv<'_> {
    type Value = Element;

    fn constant(&self, q: &BigRational) -> Result<Element> {
        Ok(Element::constant(self.ring, self.ring.base().from_rational(q)?))
    }

    fn ident(&self, name: &str) -> Result<Element> {
        Element::generator(self.ring, name)
            .map_err(|_| AlgebraError::parse(format!("unknown generator {name}")))
    }

    fn add(&self, a: &Element, b: &Element) -> Result<Element> {
        a.add(b)
    }

    fn neg(&self, a: &Element) -> Result<Element> {
        Ok(a.neg())
    }

    fn mul(&self, a: &Element, b: &Element) -> Result<Element> {
        a.mul(b)
    }

    fn pow(&self, a: &Element, e: i64) -> Result<Element> {
        pow_signed(a, e)
    }
}

pub fn pow_signed(a: &Element, e: i64) -> Result<Element> {
    if e >= 0 {
        a.pow(e as u32)
    } else {
        a.inverse()
            .map_err(|_| AlgebraError::IllegalExponent(format!("negative power of {a}")))?
            .pow((-e) as u32)
    }
}

pub fn parse_element(ring: &Ring, text: &str) -> Result<Element> {
    eval(&RingEnv { ring }, &parse(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::BaseRing;
    use crate::ring::PresentationBuilder;

    #[test]
    fn parses_and_evaluates() {
        let mut b = PresentationBuilder::new("r", BaseRing::PLocal(3), 100);
        b.generator("v1", 4).generator("t1", 4);
        let r = b.build().unwrap();
        let e = parse_element(&r, "v1 + 3*t1").unwrap();
        assert_eq!(e.to_string(), "3*t1 + v1");
        let sq = parse_element(&r, "(v1 - t1)^2 - v1^2 + 2*v1*t1").unwrap();
        assert_eq!(sq, parse_element(&r, "t1^2").unwrap());
        let half = parse_element(&r, "v1/2").unwrap();
        assert_eq!(half.add(&half).unwrap(), parse_element(&r, "v1").unwrap());
    }

    #[test]
    fn reports_column() {
        match parse("v1 + * 2") {
            Err(AlgebraError::Parse { location, .. }) => assert_eq!(location.unwrap(), "column 6"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse("v1 $ 2").is_err());
        assert!(parse("(v1").is_err());
    }

    #[test]
    fn tensor_words_parse() {
        let ast = parse("g(t1)⊗m + g(1)⊗n").unwrap();
        match ast {
            Ast::Add(a, _) => assert!(matches!(*a, Ast::Tensor(_, ref g) if g == "m")),
            _ => panic!(),
        }
    }
}
