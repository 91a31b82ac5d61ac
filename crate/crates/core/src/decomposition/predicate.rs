//! Geometric predicates over cell coordinates, e.g.
//! `abs(x-0.5)+abs(y-0.5)<=1/3` or `(x>=1/8 && x<=3/8) || x>=5/8`.
//!
//! Arithmetic is `f64`. `<=` and `>=` accept a relative slack of `1e-12` so
//! that cell centers lying exactly on a region boundary are included
//! regardless of rounding; `<` and `>` are strict.

use std::fmt;

const CMP_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Predicate {
    source: String,
    root: Expr,
}

#[derive(Debug, Clone, PartialEq)]
enum Expr {
    Num(f64),
    X,
    Y,
    Neg(Box<Expr>),
    Not(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Abs,
    Min,
    Max,
    Sqrt,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(&'static str),
    LParen,
    RParen,
    Comma,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredicateError(pub String);

impl fmt::Display for PredicateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Predicate {
    pub fn parse(source: &str) -> Result<Self, PredicateError> {
        let toks = lex(source)?;
        let mut p = Parser { toks, pos: 0 };
        let root = p.or()?;
        if p.pos != p.toks.len() {
            return Err(PredicateError(format!("unexpected token {:?}", p.toks[p.pos])));
        }
        Ok(Self { source: source.to_string(), root })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Evaluates the expression; any nonzero value counts as true.
    pub fn value(&self, x: f64, y: f64) -> f64 {
        eval(&self.root, x, y)
    }

    pub fn holds(&self, x: f64, y: f64) -> bool {
        self.value(x, y) != 0.0
    }
}

fn truth(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn eval(e: &Expr, x: f64, y: f64) -> f64 {
    match e {
        Expr::Num(v) => *v,
        Expr::X => x,
        Expr::Y => y,
        Expr::Neg(a) => -eval(a, x, y),
        Expr::Not(a) => truth(eval(a, x, y) == 0.0),
        Expr::Bin(op, a, b) => {
            let l = eval(a, x, y);
            // short-circuit so that the right operand is not required to be finite
            match op {
                BinOp::And if l == 0.0 => return 0.0,
                BinOp::Or if l != 0.0 => return 1.0,
                _ => {}
            }
            let r = eval(b, x, y);
            let slack = CMP_SLACK * r.abs().max(1.0);
            match op {
                BinOp::Add => l + r,
                BinOp::Sub => l - r,
                BinOp::Mul => l * r,
                BinOp::Div => l / r,
                BinOp::Lt => truth(l < r),
                BinOp::Le => truth(l <= r + slack),
                BinOp::Gt => truth(l > r),
                BinOp::Ge => truth(l >= r - slack),
                BinOp::And | BinOp::Or => truth(r != 0.0),
            }
        }
        Expr::Call(f, args) => {
            let v: Vec<f64> = args.iter().map(|a| eval(a, x, y)).collect();
            match f {
                Func::Abs => v[0].abs(),
                Func::Sqrt => v[0].sqrt(),
                Func::Min => v.iter().copied().fold(f64::INFINITY, f64::min),
                Func::Max => v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            }
        }
    }
}

fn lex(src: &str) -> Result<Vec<Tok>, PredicateError> {
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    while i < chars.len() {
        let ch = chars[i];
        if ch.is_whitespace() {
            i += 1;
            continue;
        }
        if ch.is_ascii_digit() || ch == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                i += 1;
                if i < chars.len() && (chars[i] == '-' || chars[i] == '+') {
                    i += 1;
                }
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v = s
                .parse()
                .map_err(|_| PredicateError(format!("bad number `{s}`")))?;
            out.push(Tok::Num(v));
            continue;
        }
        if ch.is_ascii_alphabetic() || ch == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
            continue;
        }
        let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        let op2 = ["<=", ">=", "&&", "||"].into_iter().find(|op| *op == two);
        if let Some(op) = op2 {
            out.push(Tok::Op(op));
            i += 2;
            continue;
        }
        let tok = match ch {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '+' => Tok::Op("+"),
            '-' => Tok::Op("-"),
            '*' => Tok::Op("*"),
            '/' => Tok::Op("/"),
            '<' => Tok::Op("<"),
            '>' => Tok::Op(">"),
            '!' => Tok::Op("!"),
            _ => return Err(PredicateError(format!("unexpected character `{ch}`"))),
        };
        out.push(tok);
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek_op(&self) -> Option<&'static str> {
        match self.toks.get(self.pos) {
            Some(Tok::Op(op)) => Some(op),
            _ => None,
        }
    }

    fn binary_level(
        &mut self,
        ops: &[(&str, BinOp)],
        next: fn(&mut Self) -> Result<Expr, PredicateError>,
    ) -> Result<Expr, PredicateError> {
        let mut lhs = next(self)?;
        while let Some(op) = self.peek_op() {
            let Some(&(_, bin)) = ops.iter().find(|(s, _)| *s == op) else {
                break;
            };
            self.pos += 1;
            let rhs = next(self)?;
            lhs = Expr::Bin(bin, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Expr, PredicateError> {
        self.binary_level(&[("||", BinOp::Or)], Self::and)
    }

    fn and(&mut self) -> Result<Expr, PredicateError> {
        self.binary_level(&[("&&", BinOp::And)], Self::cmp)
    }

    fn cmp(&mut self) -> Result<Expr, PredicateError> {
        let lhs = self.sum()?;
        let op = match self.peek_op() {
            Some("<") => BinOp::Lt,
            Some("<=") => BinOp::Le,
            Some(">") => BinOp::Gt,
            Some(">=") => BinOp::Ge,
            _ => return Ok(lhs),
        };
        self.pos += 1;
        let rhs = self.sum()?;
        Ok(Expr::Bin(op, Box::new(lhs), Box::new(rhs)))
    }

    fn sum(&mut self) -> Result<Expr, PredicateError> {
        self.binary_level(&[("+", BinOp::Add), ("-", BinOp::Sub)], Self::product)
    }

    fn product(&mut self) -> Result<Expr, PredicateError> {
        self.binary_level(&[("*", BinOp::Mul), ("/", BinOp::Div)], Self::unary)
    }

    fn unary(&mut self) -> Result<Expr, PredicateError> {
        match self.peek_op() {
            Some("-") => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some("!") => {
                self.pos += 1;
                Ok(Expr::Not(Box::new(self.unary()?)))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Expr, PredicateError> {
        let tok = self
            .toks
            .get(self.pos)
            .cloned()
            .ok_or_else(|| PredicateError("unexpected end of expression".into()))?;
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::LParen => {
                let e = self.or()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "x" => Ok(Expr::X),
                "y" => Ok(Expr::Y),
                "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                "abs" | "min" | "max" | "sqrt" => {
                    let f = match name.as_str() {
                        "abs" => Func::Abs,
                        "min" => Func::Min,
                        "max" => Func::Max,
                        _ => Func::Sqrt,
                    };
                    self.expect(Tok::LParen)?;
                    let mut args = vec![self.or()?];
                    while self.toks.get(self.pos) == Some(&Tok::Comma) {
                        self.pos += 1;
                        args.push(self.or()?);
                    }
                    self.expect(Tok::RParen)?;
                    let ok = match f {
                        Func::Abs | Func::Sqrt => args.len() == 1,
                        Func::Min | Func::Max => !args.is_empty(),
                    };
                    if !ok {
                        return Err(PredicateError(format!("wrong argument count for `{name}`")));
                    }
                    Ok(Expr::Call(f, args))
                }
                _ => Err(PredicateError(format!("unknown identifier `{name}`"))),
            },
            other => Err(PredicateError(format!("unexpected token {other:?}"))),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), PredicateError> {
        if self.toks.get(self.pos) == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(PredicateError(format!("expected {tok:?}")))
        }
    }
}
