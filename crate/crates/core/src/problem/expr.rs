//! Complex-valued arithmetic expressions in one real variable `x`.
//!
//! Grammar: `+ - * / ^`, parentheses, numbers (an immediately following `i`
//! makes them imaginary, as in `2.5i`), the constants `pi`, `e`, `i`, the
//! variable `x` and the functions `sqrt exp ln log sin cos tan sinh cosh tanh
//! sech arcsin asin arccos acos arctan atan abs conj re im`.

use std::f64::consts::{E, PI};
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Exp,
    Ln,
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Sech,
    Arcsin,
    Arccos,
    Arctan,
    Abs,
    Conj,
    Re,
    Im,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sqrt" => Self::Sqrt,
            "exp" => Self::Exp,
            "ln" | "log" => Self::Ln,
            "sin" => Self::Sin,
            "cos" => Self::Cos,
            "tan" => Self::Tan,
            "sinh" => Self::Sinh,
            "cosh" => Self::Cosh,
            "tanh" => Self::Tanh,
            "sech" => Self::Sech,
            "arcsin" | "asin" => Self::Arcsin,
            "arccos" | "acos" => Self::Arccos,
            "arctan" | "atan" => Self::Arctan,
            "abs" => Self::Abs,
            "conj" => Self::Conj,
            "re" => Self::Re,
            "im" => Self::Im,
            _ => return None,
        })
    }

    fn apply(self, z: Complex64) -> Complex64 {
        let real = z.im == 0.0;
        let r = z.re;
        let c = |v: f64| Complex64::new(v, 0.0);
        match self {
            Self::Sqrt if real && r >= 0.0 => c(r.sqrt()),
            Self::Sqrt => z.sqrt(),
            Self::Exp if real => c(r.exp()),
            Self::Exp => z.exp(),
            Self::Ln if real && r >= 0.0 => c(r.ln()),
            Self::Ln => z.ln(),
            Self::Sin if real => c(r.sin()),
            Self::Sin => z.sin(),
            Self::Cos if real => c(r.cos()),
            Self::Cos => z.cos(),
            Self::Tan if real => c(r.tan()),
            Self::Tan => z.tan(),
            Self::Sinh if real => c(r.sinh()),
            Self::Sinh => z.sinh(),
            Self::Cosh if real => c(r.cosh()),
            Self::Cosh => z.cosh(),
            Self::Tanh if real => c(r.tanh()),
            Self::Tanh => z.tanh(),
            Self::Sech if real => c(1.0 / r.cosh()),
            Self::Sech => z.cosh().inv(),
            Self::Arcsin if real && r.abs() <= 1.0 => c(r.asin()),
            Self::Arcsin => z.asin(),
            Self::Arccos if real && r.abs() <= 1.0 => c(r.acos()),
            Self::Arccos => z.acos(),
            Self::Arctan if real => c(r.atan()),
            Self::Arctan => z.atan(),
            Self::Abs => c(z.norm()),
            Self::Conj => z.conj(),
            Self::Re => c(z.re),
            Self::Im => c(z.im),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Const(Complex64),
    X,
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// A parsed expression together with its source text.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    source: String,
    root: Node,
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

impl Expr {
    pub fn parse(source: &str) -> Result<Self> {
        let tokens = lex(source)?;
        let mut parser = Parser { tokens, pos: 0, source };
        let root = parser.expr()?;
        if parser.pos != parser.tokens.len() {
            return Err(parser.error("unexpected trailing input"));
        }
        Ok(Self { source: source.to_string(), root })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        eval(&self.root, x)
    }

    pub fn depends_on_x(&self) -> bool {
        uses_x(&self.root)
    }

    /// Value of an expression that does not mention `x`.
    pub fn constant(&self) -> Result<Complex64> {
        if self.depends_on_x() {
            return Err(Error::Parse(format!("`{}` must be a constant", self.source)));
        }
        Ok(self.eval(0.0))
    }
}

/// Parses a constant complex number such as `"1"`, `"-2.5i"` or `"0.5-3i"`.
pub fn parse_complex(text: &str) -> Result<Complex64> {
    Expr::parse(text)?.constant()
}

/// Formats a complex number in the `re+im i` form accepted by [`parse_complex`],
/// exactly round-tripping both parts.
pub fn format_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{:?}{}{:?}i", z.re, sign, z.im.abs())
}

fn uses_x(n: &Node) -> bool {
    match n {
        Node::Const(_) => false,
        Node::X => true,
        Node::Neg(a) | Node::Call(_, a) => uses_x(a),
        Node::Bin(_, a, b) => uses_x(a) || uses_x(b),
    }
}

fn eval(n: &Node, x: f64) -> Complex64 {
    match n {
        Node::Const(c) => *c,
        Node::X => Complex64::new(x, 0.0),
        Node::Neg(a) => -eval(a, x),
        Node::Call(f, a) => f.apply(eval(a, x)),
        Node::Bin(op, a, b) => {
            let (l, r) = (eval(a, x), eval(b, x));
            match op {
                BinOp::Add => l + r,
                BinOp::Sub => l - r,
                BinOp::Mul => l * r,
                BinOp::Div => {
                    if l.im == 0.0 && r.im == 0.0 {
                        Complex64::new(l.re / r.re, 0.0)
                    } else {
                        l / r
                    }
                }
                BinOp::Pow => power(l, r),
            }
        }
    }
}

fn power(base: Complex64, exp: Complex64) -> Complex64 {
    if exp.im == 0.0 {
        let e = exp.re;
        if e.fract() == 0.0 && e.abs() <= i32::MAX as f64 {
            if base.im == 0.0 {
                return Complex64::new(base.re.powi(e as i32), 0.0);
            }
            return base.powi(e as i32);
        }
        if base.im == 0.0 && base.re >= 0.0 {
            return Complex64::new(base.re.powf(e), 0.0);
        }
    }
    if base == Complex64::new(0.0, 0.0) && exp.re > 0.0 {
        return base;
    }
    base.powc(exp)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Complex64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        if ch.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if ch.is_ascii_digit() || (ch == '.' && chars.get(i + 1).is_some_and(|c| c.is_ascii_digit())) {
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let value: f64 = text
                .parse()
                .map_err(|_| Error::Parse(format!("bad number `{text}` in `{src}`")))?;
            let mut j = i;
            while j < chars.len() && chars[j].is_whitespace() {
                j += 1;
            }
            let imaginary = j < chars.len()
                && chars[j] == 'i'
                && !chars.get(j + 1).is_some_and(|c| c.is_alphanumeric() || *c == '_');
            if imaginary {
                out.push((Tok::Num(Complex64::new(0.0, value)), start));
                i = j + 1;
            } else {
                out.push((Tok::Num(Complex64::new(value, 0.0)), start));
            }
            continue;
        }
        if ch.is_alphabetic() || ch == '_' {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), start));
            continue;
        }
        let tok = match ch {
            '+' | '-' | '*' | '/' | '^' => Tok::Op(ch),
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            _ => return Err(Error::Parse(format!("unexpected character `{ch}` in `{src}`"))),
        };
        out.push((tok, start));
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
    source: &'a str,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        let at = self.tokens.get(self.pos).map_or(self.source.len(), |t| t.1);
        Error::Parse(format!("{msg} at offset {at} in `{}`", self.source))
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.0)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).map(|t| t.0.clone());
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek() {
            let op = if *c == '+' { BinOp::Add } else { BinOp::Sub };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(c @ ('*' | '/'))) = self.peek() {
            let op = if *c == '*' { BinOp::Mul } else { BinOp::Div };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node> {
        match self.peek() {
            Some(Tok::Op('-')) => {
                self.pos += 1;
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Some(Tok::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Node::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        match self.next() {
            Some(Tok::Num(v)) => Ok(Node::Const(v)),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                match self.next() {
                    Some(Tok::RParen) => Ok(inner),
                    _ => {
                        self.pos -= 1;
                        Err(self.error("expected `)`"))
                    }
                }
            }
            Some(Tok::Ident(name)) => match name.as_str() {
                "x" => Ok(Node::X),
                "pi" => Ok(Node::Const(Complex64::new(PI, 0.0))),
                "e" => Ok(Node::Const(Complex64::new(E, 0.0))),
                "i" => Ok(Node::Const(Complex64::new(0.0, 1.0))),
                _ => {
                    let func = Func::from_name(&name).ok_or_else(|| {
                        self.pos -= 1;
                        self.error(&format!("unknown identifier `{name}`"))
                    })?;
                    if self.next() != Some(Tok::LParen) {
                        self.pos -= 1;
                        return Err(self.error(&format!("expected `(` after `{name}`")));
                    }
                    let arg = self.expr()?;
                    if self.next() != Some(Tok::RParen) {
                        self.pos -= 1;
                        return Err(self.error("expected `)`"));
                    }
                    Ok(Node::Call(func, Box::new(arg)))
                }
            },
            _ => {
                self.pos -= 1;
                Err(self.error("expected a value"))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, x: f64) -> Complex64 {
        Expr::parse(s).unwrap().eval(x)
    }

    #[test]
    fn arithmetic_and_precedence() {
        assert_eq!(ev("1+2*3", 0.0).re, 7.0);
        assert_eq!(ev("-x^2", 3.0).re, -9.0);
        assert_eq!(ev("2^3^2", 0.0).re, 512.0);
        assert_eq!(ev("(1+x)/2", 3.0).re, 2.0);
        assert_eq!(ev("1e-3*1E3", 0.0).re, 1.0);
    }

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("2i").unwrap(), Complex64::new(0.0, 2.0));
        assert_eq!(parse_complex("0.5-3 i").unwrap(), Complex64::new(0.5, -3.0));
        assert_eq!(parse_complex("-i").unwrap(), Complex64::new(0.0, -1.0));
        assert_eq!(ev("x*i", 2.0), Complex64::new(0.0, 2.0));
    }

    #[test]
    fn functions() {
        assert!((ev("sqrt(1-x^2)", 0.6).re - 0.8).abs() < 1e-15);
        assert!((ev("arcsin(x)", 1.0).re - PI / 2.0).abs() < 1e-15);
        assert!((ev("sech(2*x)", 0.0).re - 1.0).abs() < 1e-15);
        assert_eq!(ev("ln(x)", 0.0).re, f64::NEG_INFINITY);
        assert!((ev("exp(i*pi)", 0.0) + 1.0).norm() < 1e-15);
    }

    #[test]
    fn complex_round_trip() {
        for z in [Complex64::new(0.1, -0.2), Complex64::new(-1e-300, 3e200), Complex64::new(2.0, 0.0)] {
            assert_eq!(parse_complex(&format_complex(z)).unwrap(), z);
        }
    }

    #[test]
    fn errors() {
        assert!(Expr::parse("1+").is_err());
        assert!(Expr::parse("foo(x)").is_err());
        assert!(Expr::parse("(x").is_err());
        assert!(Expr::parse("x $ 2").is_err());
        assert!(parse_complex("x").is_err());
    }
}
