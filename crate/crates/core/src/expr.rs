//! Text grammar for symbols and inner functions.
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := "-" unary | power
//! power   := atom ("^" integer)?
//! atom    := number | number "i" | name | name "(" args ")" | "(" expr ("," expr)* ")" | "[" list "]"
//! ```
//!
//! Names: `z`, `i`, `pi`. Functions: `mono(k)`, `poly([c...], offset)`,
//! `blaschke([a...], c)`, `rat([num...], [den...], shift)`,
//! `atomic([(xi, mu)...])`, `conj(x)`, `exp(x)`, `sqrt(x)`.
//! Coefficient lists run from low to high degree.

use crate::error::{Error, Result};
use crate::grid::C64;
use crate::symbol::{InnerFunction, LaurentSymbol};
use crate::tolerance::Tolerances;

/// Value of an expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(C64),
    Sym(LaurentSymbol),
    Inner(InnerFunction),
    List(Vec<Value>),
    Tuple(Vec<Value>),
}

impl Value {
    fn kind(&self) -> &'static str {
        match self {
            Value::Num(_) => "number",
            Value::Sym(_) => "symbol",
            Value::Inner(_) => "inner function",
            Value::List(_) => "list",
            Value::Tuple(_) => "tuple",
        }
    }

    pub fn as_num(&self) -> Option<C64> {
        match self {
            Value::Num(c) => Some(*c),
            Value::Sym(s) => {
                let c = s.as_coeffs()?;
                (c.iter().all(|(j, v)| j == 0 || v == C64::new(0.0, 0.0))).then(|| c.get(0))
            }
            _ => None,
        }
    }

    pub fn into_symbol(self) -> Result<LaurentSymbol> {
        match self {
            Value::Num(c) => Ok(LaurentSymbol::constant(c)),
            Value::Sym(s) => Ok(s),
            Value::Inner(f) => f.to_symbol(),
            other => Err(Error::Invalid(format!("expected a symbol, found a {}", other.kind()))),
        }
    }

    pub fn into_inner(self) -> Result<InnerFunction> {
        match self {
            Value::Inner(f) => Ok(f),
            Value::Sym(s) => monic_monomial(&s)
                .map(InnerFunction::monomial)
                .ok_or_else(|| Error::Invalid("expected an inner function, found a symbol".into())),
            other => Err(Error::Invalid(format!("expected an inner function, found a {}", other.kind()))),
        }
    }
}

/// k when s is exactly z^k with k >= 0.
fn monic_monomial(s: &LaurentSymbol) -> Option<usize> {
    let c = s.as_coeffs()?;
    let nz: Vec<(i64, C64)> = c.iter().filter(|(_, v)| *v != C64::new(0.0, 0.0)).collect();
    match nz.as_slice() {
        [(k, v)] if *k >= 0 && *v == C64::new(1.0, 0.0) => Some(*k as usize),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Imag(f64),
    Name(String),
    Punct(char),
    End,
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
}

fn lex(src: &str, line: usize, col0: usize) -> Result<Lexer> {
    let chars: Vec<char> = src.chars().collect();
    let mut toks = Vec::new();
    let mut k = 0;
    let err = |k: usize, m: String| Error::Parse { line, column: col0 + k, message: m };
    while k < chars.len() {
        let ch = chars[k];
        if ch.is_whitespace() {
            k += 1;
        } else if ch.is_ascii_digit() || (ch == '.' && chars.get(k + 1).is_some_and(|c| c.is_ascii_digit())) {
            let start = k;
            while k < chars.len() && (chars[k].is_ascii_digit() || chars[k] == '.') {
                k += 1;
            }
            if k < chars.len() && (chars[k] == 'e' || chars[k] == 'E') {
                let mut j = k + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    k = j;
                    while k < chars.len() && chars[k].is_ascii_digit() {
                        k += 1;
                    }
                }
            }
            let text: String = chars[start..k].iter().collect();
            let v: f64 = text.parse().map_err(|_| err(start, format!("bad number '{text}'")))?;
            let imag = k < chars.len() && chars[k] == 'i' && !chars.get(k + 1).is_some_and(|c| c.is_alphanumeric() || *c == '_');
            if imag {
                k += 1;
                toks.push((Tok::Imag(v), start));
            } else {
                toks.push((Tok::Num(v), start));
            }
        } else if ch.is_alphabetic() || ch == '_' {
            let start = k;
            while k < chars.len() && (chars[k].is_alphanumeric() || chars[k] == '_') {
                k += 1;
            }
            toks.push((Tok::Name(chars[start..k].iter().collect()), start));
        } else if "+-*/^()[],".contains(ch) {
            toks.push((Tok::Punct(ch), k));
            k += 1;
        } else {
            return Err(err(k, format!("unexpected character '{ch}'")));
        }
    }
    toks.push((Tok::End, chars.len()));
    Ok(Lexer { toks })
}

struct Parser<'t> {
    toks: &'t [(Tok, usize)],
    pos: usize,
    line: usize,
    col0: usize,
    tol: &'t Tolerances,
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

impl<'t> Parser<'t> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn column(&self) -> usize {
        self.col0 + self.toks[self.pos].1
    }

    fn err(&self, column: usize, message: impl Into<String>) -> Error {
        Error::Parse { line: self.line, column, message: message.into() }
    }

    fn at(&self, column: usize, e: Error) -> Error {
        match e {
            Error::Parse { .. } => e,
            other => self.err(column, other.to_string()),
        }
    }

    fn expect(&mut self, p: char) -> Result<()> {
        if *self.peek() == Tok::Punct(p) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(self.column(), format!("expected '{p}'")))
        }
    }

    fn expr(&mut self) -> Result<Value> {
        let mut v = self.term()?;
        loop {
            let col = self.column();
            match self.peek() {
                Tok::Punct('+') => {
                    self.pos += 1;
                    let r = self.term()?;
                    v = add(v, r, false).map_err(|e| self.at(col, e))?;
                }
                Tok::Punct('-') => {
                    self.pos += 1;
                    let r = self.term()?;
                    v = add(v, r, true).map_err(|e| self.at(col, e))?;
                }
                _ => return Ok(v),
            }
        }
    }

    fn term(&mut self) -> Result<Value> {
        let mut v = self.unary()?;
        loop {
            let col = self.column();
            match self.peek() {
                Tok::Punct('*') => {
                    self.pos += 1;
                    let r = self.unary()?;
                    v = mul(v, r).map_err(|e| self.at(col, e))?;
                }
                Tok::Punct('/') => {
                    self.pos += 1;
                    let r = self.unary()?;
                    let d = r.as_num().ok_or_else(|| self.err(col, "only division by a number is supported"))?;
                    v = mul(v, Value::Num(1.0 / d)).map_err(|e| self.at(col, e))?;
                }
                _ => return Ok(v),
            }
        }
    }

    fn unary(&mut self) -> Result<Value> {
        if *self.peek() == Tok::Punct('-') {
            let col = self.column();
            self.pos += 1;
            let v = self.unary()?;
            return mul(Value::Num(c(-1.0, 0.0)), v).map_err(|e| self.at(col, e));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Value> {
        let base = self.atom()?;
        if *self.peek() != Tok::Punct('^') {
            return Ok(base);
        }
        let col = self.column();
        self.pos += 1;
        let e = match self.peek().clone() {
            Tok::Num(x) if x >= 0.0 && x.fract() == 0.0 && x <= 64.0 => x as u32,
            _ => return Err(self.err(self.column(), "exponent must be a non-negative integer")),
        };
        self.pos += 1;
        let mut acc = Value::Num(c(1.0, 0.0));
        for _ in 0..e {
            acc = mul(acc, base.clone()).map_err(|er| self.at(col, er))?;
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<Value> {
        let col = self.column();
        match self.peek().clone() {
            Tok::Num(x) => {
                self.pos += 1;
                Ok(Value::Num(c(x, 0.0)))
            }
            Tok::Imag(x) => {
                self.pos += 1;
                Ok(Value::Num(c(0.0, x)))
            }
            Tok::Punct('(') => {
                self.pos += 1;
                let mut items = vec![self.expr()?];
                while *self.peek() == Tok::Punct(',') {
                    self.pos += 1;
                    items.push(self.expr()?);
                }
                self.expect(')')?;
                Ok(if items.len() == 1 { items.pop().unwrap() } else { Value::Tuple(items) })
            }
            Tok::Punct('[') => {
                self.pos += 1;
                let mut items = Vec::new();
                if *self.peek() != Tok::Punct(']') {
                    items.push(self.expr()?);
                    while *self.peek() == Tok::Punct(',') {
                        self.pos += 1;
                        items.push(self.expr()?);
                    }
                }
                self.expect(']')?;
                Ok(Value::List(items))
            }
            Tok::Name(name) => {
                self.pos += 1;
                if *self.peek() == Tok::Punct('(') {
                    self.pos += 1;
                    let mut args = Vec::new();
                    if *self.peek() != Tok::Punct(')') {
                        args.push(self.expr()?);
                        while *self.peek() == Tok::Punct(',') {
                            self.pos += 1;
                            args.push(self.expr()?);
                        }
                    }
                    self.expect(')')?;
                    call(&name, args, self.tol).map_err(|e| self.at(col, e))
                } else {
                    match name.as_str() {
                        "z" => Ok(Value::Sym(LaurentSymbol::mono(1))),
                        "i" => Ok(Value::Num(c(0.0, 1.0))),
                        "pi" => Ok(Value::Num(c(std::f64::consts::PI, 0.0))),
                        _ => Err(self.err(col, format!("unknown name '{name}'"))),
                    }
                }
            }
            Tok::End => Err(self.err(col, "unexpected end of expression")),
            Tok::Punct(p) => Err(self.err(col, format!("unexpected '{p}'"))),
        }
    }
}

fn add(a: Value, b: Value, negate: bool) -> Result<Value> {
    let b = if negate { mul(Value::Num(c(-1.0, 0.0)), b)? } else { b };
    if let (Some(x), Some(y)) = (num_only(&a), num_only(&b)) {
        return Ok(Value::Num(x + y));
    }
    Ok(Value::Sym(a.into_symbol()?.add(&b.into_symbol()?)?))
}

fn num_only(v: &Value) -> Option<C64> {
    match v {
        Value::Num(x) => Some(*x),
        _ => None,
    }
}

fn mul(a: Value, b: Value) -> Result<Value> {
    if let (Some(x), Some(y)) = (num_only(&a), num_only(&b)) {
        return Ok(Value::Num(x * y));
    }
    let as_inner = |v: &Value| -> Option<InnerFunction> {
        match v {
            Value::Inner(f) => Some(f.clone()),
            Value::Sym(s) => monic_monomial(s).map(InnerFunction::monomial),
            _ => None,
        }
    };
    if matches!(a, Value::Inner(_)) || matches!(b, Value::Inner(_)) {
        if let (Some(x), Some(y)) = (as_inner(&a), as_inner(&b)) {
            return Ok(Value::Inner(InnerFunction::product(vec![x, y])));
        }
    }
    if let Some(x) = num_only(&a) {
        return Ok(Value::Sym(b.into_symbol()?.scale(x)));
    }
    if let Some(y) = num_only(&b) {
        return Ok(Value::Sym(a.into_symbol()?.scale(y)));
    }
    Ok(Value::Sym(a.into_symbol()?.mul(&b.into_symbol()?)?))
}

fn arity(name: &str, args: &[Value], lo: usize, hi: usize) -> Result<()> {
    if args.len() < lo || args.len() > hi {
        let want = if lo == hi { lo.to_string() } else { format!("{lo} to {hi}") };
        return Err(Error::Invalid(format!("{name} takes {want} arguments, got {}", args.len())));
    }
    Ok(())
}

fn num_arg(name: &str, v: &Value) -> Result<C64> {
    v.as_num().ok_or_else(|| Error::Invalid(format!("{name}: expected a number, found a {}", v.kind())))
}

fn int_arg(name: &str, v: &Value) -> Result<i64> {
    let x = num_arg(name, v)?;
    if x.im != 0.0 || x.re.fract() != 0.0 || x.re.abs() > 1e9 {
        return Err(Error::Invalid(format!("{name}: expected an integer, found {x}")));
    }
    Ok(x.re as i64)
}

fn num_list(name: &str, v: &Value) -> Result<Vec<C64>> {
    match v {
        Value::List(items) => items.iter().map(|x| num_arg(name, x)).collect(),
        other => Err(Error::Invalid(format!("{name}: expected a list, found a {}", other.kind()))),
    }
}

fn call(name: &str, args: Vec<Value>, tol: &Tolerances) -> Result<Value> {
    match name {
        "mono" => {
            arity(name, &args, 1, 1)?;
            Ok(Value::Sym(LaurentSymbol::mono(int_arg(name, &args[0])?)))
        }
        "poly" => {
            arity(name, &args, 1, 2)?;
            let coeffs = num_list(name, &args[0])?;
            let offset = args.get(1).map(|a| int_arg(name, a)).transpose()?.unwrap_or(0);
            Ok(Value::Sym(LaurentSymbol::poly(coeffs, offset)))
        }
        "blaschke" => {
            arity(name, &args, 1, 2)?;
            let zeros = num_list(name, &args[0])?;
            let k = args.get(1).map(|a| num_arg(name, a)).transpose()?.unwrap_or(c(1.0, 0.0));
            Ok(Value::Inner(InnerFunction::blaschke(zeros, k, tol)?))
        }
        "rat" => {
            arity(name, &args, 2, 3)?;
            let num = num_list(name, &args[0])?;
            let den = num_list(name, &args[1])?;
            let shift = args.get(2).map(|a| int_arg(name, a)).transpose()?.unwrap_or(0);
            Ok(Value::Sym(LaurentSymbol::rational(num, den, shift, tol.root)?))
        }
        "atomic" => {
            arity(name, &args, 1, 1)?;
            let Value::List(items) = &args[0] else {
                return Err(Error::Invalid("atomic: expected a list of (xi, mu) pairs".into()));
            };
            let mut atoms = Vec::new();
            for it in items {
                match it {
                    Value::Tuple(p) if p.len() == 2 => {
                        let mu = num_arg(name, &p[1])?;
                        if mu.im != 0.0 {
                            return Err(Error::Invalid("atomic: weights must be real".into()));
                        }
                        atoms.push((num_arg(name, &p[0])?, mu.re));
                    }
                    _ => return Err(Error::Invalid("atomic: expected a list of (xi, mu) pairs".into())),
                }
            }
            Ok(Value::Inner(InnerFunction::atomic(atoms)?))
        }
        "conj" => {
            arity(name, &args, 1, 1)?;
            let v = args.into_iter().next().unwrap();
            match v {
                Value::Num(x) => Ok(Value::Num(x.conj())),
                other => Ok(Value::Sym(other.into_symbol()?.conj())),
            }
        }
        "exp" | "sqrt" => {
            arity(name, &args, 1, 1)?;
            let x = num_arg(name, &args[0])?;
            Ok(Value::Num(if name == "exp" { x.exp() } else { x.sqrt() }))
        }
        _ => Err(Error::Invalid(format!("unknown function '{name}'"))),
    }
}

/// Evaluate `src`; `line` and `column` locate it in the enclosing file for errors.
pub fn parse_at(src: &str, line: usize, column: usize, tol: &Tolerances) -> Result<Value> {
    let lx = lex(src, line, column)?;
    let mut p = Parser { toks: &lx.toks, pos: 0, line, col0: column, tol };
    let v = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.err(p.column(), "trailing input"));
    }
    Ok(v)
}

pub fn parse(src: &str, tol: &Tolerances) -> Result<Value> {
    parse_at(src, 1, 1, tol)
}

pub fn parse_symbol(src: &str, tol: &Tolerances) -> Result<LaurentSymbol> {
    parse(src, tol)?.into_symbol()
}

pub fn parse_inner(src: &str, tol: &Tolerances) -> Result<InnerFunction> {
    parse(src, tol)?.into_inner()
}
