//! Tiny expression language for real inputs on the command line.
//!
//! Grammar: sums and products of integers, `alpha`, `log(x)`, `sqrt(x)`,
//! `tau(t)` and parentheses. Every value is recomputed at the requested
//! precision, so expressions feed the ball-arithmetic ladder directly.

use fibpow::arbreal::{ArbError, ArbResult, CertifiedReal};
use fibpow::quadfield::{alpha_real, log_alpha, log_sqrt5, log_tau};
use num_bigint::BigInt;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Int(BigInt),
    Alpha,
    Tau(u64),
    Log(Box<Expr>),
    Sqrt(Box<Expr>),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, bits: u32) -> ArbResult<CertifiedReal> {
        let w = bits + 16;
        Ok(match self {
            Expr::Int(n) => CertifiedReal::from_int(n.clone(), w),
            Expr::Alpha => alpha_real(w),
            Expr::Tau(t) => log_tau(*t, w).exp(),
            // exact shortcuts keep the common constants tight
            Expr::Log(x) if **x == Expr::Alpha => log_alpha(w),
            Expr::Log(x) if **x == Expr::Sqrt(Box::new(Expr::Int(5.into()))) => log_sqrt5(w),
            Expr::Log(x) if matches!(**x, Expr::Tau(_)) => match **x {
                Expr::Tau(t) => log_tau(t, w),
                _ => unreachable!(),
            },
            Expr::Log(x) => x.eval(w)?.ln()?,
            Expr::Sqrt(x) => x.eval(w)?.sqrt()?,
            Expr::Neg(x) => x.eval(w)?.neg(),
            Expr::Add(a, b) => a.eval(w)?.add(&b.eval(w)?),
            Expr::Sub(a, b) => a.eval(w)?.sub(&b.eval(w)?),
            Expr::Mul(a, b) => a.eval(w)?.mul(&b.eval(w)?),
            Expr::Div(a, b) => a.eval(w)?.div(&b.eval(w)?)?,
        }
        .with_bits(bits))
    }

    /// Evaluation that panics on a domain error; parse-time checks make
    /// that a programming error.
    pub fn real(&self, bits: u32) -> CertifiedReal {
        match self.eval(bits) {
            Ok(v) => v,
            Err(e) => panic!("cannot evaluate {self:?}: {e}"),
        }
    }
}

pub fn parse(s: &str) -> Result<Expr, String> {
    let toks = lex(s)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.sum()?;
    if p.pos != p.toks.len() {
        return Err(format!("unexpected {:?}", p.toks[p.pos]));
    }
    // surface domain errors now rather than deep inside a reduction
    match e.eval(128) {
        Ok(_) | Err(ArbError::PrecisionExhausted { .. }) => Ok(e),
        Err(err) => Err(format!("cannot evaluate: {err}")),
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Op(char),
}

fn lex(s: &str) -> Result<Vec<Tok>, String> {
    let mut out = Vec::new();
    let cs: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < cs.len() && cs[i].is_ascii_digit() {
                i += 1;
            }
            let t: String = cs[start..i].iter().collect();
            out.push(Tok::Num(t.parse().map_err(|_| "bad number")?));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < cs.len() && cs[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push(Tok::Ident(cs[start..i].iter().collect()));
        } else if "+-*/()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(format!("unexpected character {c:?}"));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), String> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(format!("expected '{c}'"))
        }
    }

    fn sum(&mut self) -> Result<Expr, String> {
        let mut e = self.product()?;
        loop {
            if self.eat('+') {
                e = Expr::Add(Box::new(e), Box::new(self.product()?));
            } else if self.eat('-') {
                e = Expr::Sub(Box::new(e), Box::new(self.product()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn product(&mut self) -> Result<Expr, String> {
        let mut e = self.unary()?;
        loop {
            if self.eat('*') {
                e = Expr::Mul(Box::new(e), Box::new(self.unary()?));
            } else if self.eat('/') {
                e = Expr::Div(Box::new(e), Box::new(self.unary()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, String> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, String> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Expr::Int(n))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.sum()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                match name.as_str() {
                    "alpha" => Ok(Expr::Alpha),
                    "log" | "sqrt" => {
                        self.expect('(')?;
                        let e = self.sum()?;
                        self.expect(')')?;
                        Ok(if name == "log" { Expr::Log(Box::new(e)) } else { Expr::Sqrt(Box::new(e)) })
                    }
                    "tau" => {
                        self.expect('(')?;
                        let t = match self.peek().cloned() {
                            Some(Tok::Num(n)) => n,
                            _ => return Err("tau takes a positive integer".into()),
                        };
                        self.pos += 1;
                        self.expect(')')?;
                        let t: u64 = t.try_into().map_err(|_| "tau index too large")?;
                        if t == 0 {
                            return Err("tau takes a positive integer".into());
                        }
                        Ok(Expr::Tau(t))
                    }
                    other => Err(format!("unknown name {other:?}")),
                }
            }
            other => Err(format!("unexpected {other:?}")),
        }
    }
}
