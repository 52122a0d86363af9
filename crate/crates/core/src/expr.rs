//! A small infix arithmetic language for user-supplied potentials and weights.
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = "-" unary | power ;
//! power   = atom [ "^" unary ] ;            (* right associative *)
//! atom    = number | variable | constant
//!         | func "(" expr ")" | "(" expr ")" ;
//! func    = "sqrt" | "abs" | "exp" | "ln" | "sin" | "cos" | "tanh" ;
//! constant= "pi" | "e" ;
//! number  = digit { digit } [ "." { digit } ] [ ("e" | "E") [ "+" | "-" ] digit { digit } ] ;
//! ```
//!
//! Exactly one variable name is accepted per expression (`s` for potentials,
//! `t` for weights). Derivatives are obtained by forward-mode evaluation on
//! dual numbers, so custom potentials get an exact `W'`.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func {
    Sqrt,
    Abs,
    Exp,
    Ln,
    Sin,
    Cos,
    Tanh,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var,
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// A parsed expression in one variable.
#[derive(Clone, PartialEq)]
pub struct Expr {
    source: String,
    var: String,
    root: Node,
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({:?} in {})", self.source, self.var)
    }
}

#[derive(Debug, Clone, Copy)]
struct Dual {
    v: f64,
    d: f64,
}

impl Dual {
    fn constant(v: f64) -> Self {
        Dual { v, d: 0.0 }
    }
}

impl Expr {
    pub fn parse(source: &str, var: &str) -> Result<Expr> {
        let tokens = tokenize(source)?;
        let mut p = Parser { tokens, pos: 0, var };
        let root = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Expression(format!(
                "unexpected trailing input {:?} in {source:?}",
                p.tokens[p.pos]
            )));
        }
        Ok(Expr {
            source: source.to_string(),
            var: var.to_string(),
            root,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, x: f64) -> f64 {
        eval(&self.root, Dual { v: x, d: 0.0 }).v
    }

    /// Value and derivative with respect to the variable.
    pub fn eval_with_derivative(&self, x: f64) -> (f64, f64) {
        let r = eval(&self.root, Dual { v: x, d: 1.0 });
        (r.v, r.d)
    }
}

fn eval(node: &Node, x: Dual) -> Dual {
    match node {
        Node::Num(v) => Dual::constant(*v),
        Node::Var => x,
        Node::Neg(a) => {
            let a = eval(a, x);
            Dual { v: -a.v, d: -a.d }
        }
        Node::Add(a, b) => {
            let (a, b) = (eval(a, x), eval(b, x));
            Dual {
                v: a.v + b.v,
                d: a.d + b.d,
            }
        }
        Node::Sub(a, b) => {
            let (a, b) = (eval(a, x), eval(b, x));
            Dual {
                v: a.v - b.v,
                d: a.d - b.d,
            }
        }
        Node::Mul(a, b) => {
            let (a, b) = (eval(a, x), eval(b, x));
            Dual {
                v: a.v * b.v,
                d: a.d * b.v + a.v * b.d,
            }
        }
        Node::Div(a, b) => {
            let (a, b) = (eval(a, x), eval(b, x));
            Dual {
                v: a.v / b.v,
                d: (a.d * b.v - a.v * b.d) / (b.v * b.v),
            }
        }
        Node::Pow(a, b) => {
            let (a, b) = (eval(a, x), eval(b, x));
            if b.d == 0.0 && b.v.fract() == 0.0 && b.v.abs() < 1e6 {
                let k = b.v as i32;
                let v = a.v.powi(k);
                let d = if k == 0 {
                    0.0
                } else {
                    f64::from(k) * a.v.powi(k - 1) * a.d
                };
                Dual { v, d }
            } else {
                let v = a.v.powf(b.v);
                let mut d = b.v * a.v.powf(b.v - 1.0) * a.d;
                if b.d != 0.0 {
                    d += v * a.v.ln() * b.d;
                }
                Dual { v, d }
            }
        }
        Node::Call(f, a) => {
            let a = eval(a, x);
            let (v, dv) = match f {
                Func::Sqrt => {
                    let r = a.v.sqrt();
                    (r, 0.5 / r)
                }
                Func::Abs => (a.v.abs(), if a.v == 0.0 { 0.0 } else { a.v.signum() }),
                Func::Exp => {
                    let r = a.v.exp();
                    (r, r)
                }
                Func::Ln => (a.v.ln(), 1.0 / a.v),
                Func::Sin => (a.v.sin(), a.v.cos()),
                Func::Cos => (a.v.cos(), -a.v.sin()),
                Func::Tanh => {
                    let r = a.v.tanh();
                    (r, 1.0 - r * r)
                }
            };
            // Avoid 0 * inf when the inner derivative vanishes (e.g. sqrt at 0 of a constant).
            let d = if a.d == 0.0 { 0.0 } else { dv * a.d };
            Dual { v, d }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push(Token::Plus);
                i += 1;
            }
            '-' => {
                out.push(Token::Minus);
                i += 1;
            }
            '*' => {
                out.push(Token::Star);
                i += 1;
            }
            '/' => {
                out.push(Token::Slash);
                i += 1;
            }
            '^' => {
                out.push(Token::Caret);
                i += 1;
            }
            '(' => {
                out.push(Token::LParen);
                i += 1;
            }
            ')' => {
                out.push(Token::RParen);
                i += 1;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        while j < chars.len() && chars[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let v: f64 = text
                    .parse()
                    .map_err(|_| Error::Expression(format!("bad number {text:?}")))?;
                out.push(Token::Num(v));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Token::Ident(chars[start..i].iter().collect()));
            }
            other => {
                return Err(Error::Expression(format!(
                    "unexpected character {other:?} at offset {i}"
                )))
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    var: &'a str,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.pos += 1;
                    lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(Token::Slash) => {
                    self.pos += 1;
                    lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.peek() == Some(&Token::Minus) {
            self.pos += 1;
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if self.peek() == Some(&Token::Caret) {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Node::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        match self.bump() {
            Some(Token::Num(v)) => Ok(Node::Num(v)),
            Some(Token::LParen) => {
                let inner = self.expr()?;
                match self.bump() {
                    Some(Token::RParen) => Ok(inner),
                    _ => Err(Error::Expression("missing ')'".into())),
                }
            }
            Some(Token::Ident(name)) => {
                if name == self.var {
                    return Ok(Node::Var);
                }
                let func = match name.as_str() {
                    "pi" => return Ok(Node::Num(std::f64::consts::PI)),
                    "e" => return Ok(Node::Num(std::f64::consts::E)),
                    "sqrt" => Func::Sqrt,
                    "abs" => Func::Abs,
                    "exp" => Func::Exp,
                    "ln" => Func::Ln,
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    "tanh" => Func::Tanh,
                    _ => {
                        return Err(Error::Expression(format!(
                            "unknown identifier {name:?} (the variable is {:?})",
                            self.var
                        )))
                    }
                };
                if self.bump() != Some(Token::LParen) {
                    return Err(Error::Expression(format!("expected '(' after {name}")));
                }
                let arg = self.expr()?;
                if self.bump() != Some(Token::RParen) {
                    return Err(Error::Expression(format!("missing ')' after {name}(...")));
                }
                Ok(Node::Call(func, Box::new(arg)))
            }
            Some(t) => Err(Error::Expression(format!("unexpected token {t:?}"))),
            None => Err(Error::Expression("unexpected end of input".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn allen_cahn_expression() {
        let e = Expr::parse("0.25*(s^2-1)^2", "s").unwrap();
        assert_eq!(e.eval(0.0), 0.25);
        assert_eq!(e.eval(1.0), 0.0);
        let (v, d) = e.eval_with_derivative(0.5);
        assert!((v - 0.25 * 0.75f64.powi(2)).abs() < 1e-15);
        assert!((d - 0.5 * (0.25 - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn precedence_and_associativity() {
        let e = Expr::parse("2^3^2", "t").unwrap();
        assert_eq!(e.eval(0.0), 512.0);
        let e = Expr::parse("-t^2", "t").unwrap();
        assert_eq!(e.eval(3.0), -9.0);
        let e = Expr::parse("1 - 2 - 3", "t").unwrap();
        assert_eq!(e.eval(0.0), -4.0);
        let e = Expr::parse("8 / 2 / 2", "t").unwrap();
        assert_eq!(e.eval(0.0), 2.0);
        let e = Expr::parse("2 + 3 * t", "t").unwrap();
        assert_eq!(e.eval(2.0), 8.0);
        let e = Expr::parse("1.5e-1 * 2", "t").unwrap();
        assert!((e.eval(0.0) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn functions_and_derivatives() {
        let e = Expr::parse("2 + sin(2*pi*t/5)", "t").unwrap();
        let (v, d) = e.eval_with_derivative(1.0);
        let w = 2.0 * std::f64::consts::PI / 5.0;
        assert!((v - (2.0 + w.sin())).abs() < 1e-15);
        assert!((d - w * w.cos()).abs() < 1e-14);

        let e = Expr::parse("-1 + sqrt(2/(2-(1-s^2)^2))", "s").unwrap();
        assert!((e.eval(0.0) - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        let e = Expr::parse("abs(t) + exp(-abs(t)) + tanh(t) + ln(e) + cos(0)", "t").unwrap();
        assert!((e.eval(-1.0) - (1.0 + (-1f64).exp() + (-1f64).tanh() + 2.0)).abs() < 1e-15);
    }

    #[test]
    fn dual_derivative_matches_finite_difference() {
        let e = Expr::parse("s^4/4 - s^2/2 + sqrt(1+s^2)*exp(-s)", "s").unwrap();
        for i in 0..20 {
            let x = -1.0 + 0.1 * f64::from(i);
            let h = 1e-6;
            let fd = (e.eval(x + h) - e.eval(x - h)) / (2.0 * h);
            let (_, d) = e.eval_with_derivative(x);
            assert!((fd - d).abs() < 1e-8, "x={x}");
        }
    }

    #[test]
    fn rejects_malformed() {
        assert!(Expr::parse("1 +", "s").is_err());
        assert!(Expr::parse("(1 + s", "s").is_err());
        assert!(Expr::parse("u^2", "s").is_err());
        assert!(Expr::parse("sqrt 2", "s").is_err());
        assert!(Expr::parse("1 $ 2", "s").is_err());
        assert!(Expr::parse("s s", "s").is_err());
    }
}
