//! Arithmetic expressions over `r`, `x1`, `x2` and the `--f` presets.
//!
//! Grammar (usual precedence, `^` right-associative and binding tighter
//! than unary minus):
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := ('-' | '+') unary | power
//! power := atom ('^' unary)?
//! atom  := number | 'r' | 'x1' | 'x2' | 'pi' | func '(' expr ')' | '(' expr ')'
//! func  := 'exp' | 'log' | 'sin' | 'cos'
//! ```

use std::fmt;
use std::sync::Arc;

use crate::discretization::{Grid2D, ScalarField};
use crate::error::{Error, Result};
use crate::radial::RadialProfile;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    R,
    X1,
    X2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    /// True when neither `x1` nor `x2` occurs.
    pub fn is_radial(&self) -> bool {
        match self {
            Expr::Num(_) => true,
            Expr::Var(v) => *v == Var::R,
            Expr::Neg(a) | Expr::Call(_, a) => a.is_radial(),
            Expr::Bin(_, a, b) => a.is_radial() && b.is_radial(),
        }
    }

    /// Evaluate at `x`; `r = |x|`.
    pub fn eval(&self, x: [f64; 2]) -> Result<f64> {
        let v = self.eval_inner(x, (x[0] * x[0] + x[1] * x[1]).sqrt())?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Eval(format!("non-finite value at ({}, {})", x[0], x[1])))
        }
    }

    /// Evaluate a radial expression at `r`.
    pub fn eval_r(&self, r: f64) -> Result<f64> {
        self.eval([r, 0.0])
    }

    fn eval_inner(&self, x: [f64; 2], r: f64) -> Result<f64> {
        Ok(match self {
            Expr::Num(c) => *c,
            Expr::Var(Var::R) => r,
            Expr::Var(Var::X1) => x[0],
            Expr::Var(Var::X2) => x[1],
            Expr::Neg(a) => -a.eval_inner(x, r)?,
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval_inner(x, r)?, b.eval_inner(x, r)?);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div if b == 0.0 => return Err(Error::Eval("division by zero".into())),
                    BinOp::Div => a / b,
                    BinOp::Pow => {
                        let p = a.powf(b);
                        if p.is_nan() {
                            return Err(Error::Eval(format!("{a}^{b} is undefined")));
                        }
                        p
                    }
                }
            }
            Expr::Call(f, a) => {
                let a = a.eval_inner(x, r)?;
                match f {
                    Func::Exp => a.exp(),
                    Func::Log if a <= 0.0 => return Err(Error::Eval(format!("log of nonpositive value {a}"))),
                    Func::Log => a.ln(),
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                }
            }
        })
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

fn perr<T>(pos: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { pos, msg: msg.into() })
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            let op = if c == b'+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            let op = if c == b'*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let start = match self.peek() {
            None => return perr(self.pos, "unexpected end of input"),
            Some(_) => self.pos,
        };
        let c = self.src[start];
        if c == b'(' {
            self.pos += 1;
            let e = self.expr()?;
            self.expect_close(start)?;
            return Ok(e);
        }
        if c.is_ascii_digit() || c == b'.' {
            return self.number();
        }
        if c.is_ascii_alphabetic() {
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
                self.pos += 1;
            }
            let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
            let func = match name {
                "r" => return Ok(Expr::Var(Var::R)),
                "x1" => return Ok(Expr::Var(Var::X1)),
                "x2" => return Ok(Expr::Var(Var::X2)),
                "pi" => return Ok(Expr::Num(std::f64::consts::PI)),
                "exp" => Func::Exp,
                "log" => Func::Log,
                "sin" => Func::Sin,
                "cos" => Func::Cos,
                _ => return perr(start, format!("unknown identifier '{name}'")),
            };
            if self.peek() != Some(b'(') {
                return perr(self.pos, format!("expected '(' after '{name}'"));
            }
            let open = self.pos;
            self.pos += 1;
            let arg = self.expr()?;
            self.expect_close(open)?;
            return Ok(Expr::Call(func, Box::new(arg)));
        }
        perr(start, format!("unexpected character '{}'", c as char))
    }

    fn expect_close(&mut self, open: usize) -> Result<()> {
        match self.peek() {
            Some(b')') => {
                self.pos += 1;
                Ok(())
            }
            Some(c) => perr(self.pos, format!("expected ')' to close '(' at {open}, found '{}'", c as char)),
            None => perr(self.pos, format!("unclosed '(' at {open}")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let s = self.src;
        let digits = |p: &mut usize| {
            while *p < s.len() && s[*p].is_ascii_digit() {
                *p += 1;
            }
        };
        digits(&mut self.pos);
        if self.pos < s.len() && s[self.pos] == b'.' {
            self.pos += 1;
            digits(&mut self.pos);
        }
        if self.pos < s.len() && (s[self.pos] == b'e' || s[self.pos] == b'E') {
            let mut p = self.pos + 1;
            if p < s.len() && (s[p] == b'+' || s[p] == b'-') {
                p += 1;
            }
            if p < s.len() && s[p].is_ascii_digit() {
                digits(&mut p);
                self.pos = p;
            }
        }
        let text = std::str::from_utf8(&s[start..self.pos]).unwrap();
        text.parse::<f64>()
            .map(Expr::Num)
            .or_else(|_| perr(start, format!("malformed number '{text}'")))
    }
}

/// Parse an expression; errors carry the byte offset of the problem.
pub fn parse_expr(src: &str) -> Result<Expr> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    if let Some(c) = p.peek() {
        return perr(p.pos, format!("unexpected '{}' after expression", c as char));
    }
    Ok(e)
}

/// The constraint right-hand side `f` selected on the command line.
#[derive(Clone, Debug, PartialEq)]
pub enum FSpec {
    Const(f64),
    /// `f_ε = ε` on `r ≤ ½`, `1` beyond.
    EpsStep(f64),
    Expr { source: String, expr: Expr },
}

impl fmt::Display for FSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FSpec::Const(c) => write!(f, "const:{c}"),
            FSpec::EpsStep(e) => write!(f, "eps_step:{e}"),
            FSpec::Expr { source, .. } => write!(f, "expr:{source}"),
        }
    }
}

/// Accepts `const:c`, `eps_step:ε`, `expr:<expression>` or a bare expression.
pub fn parse_f(spec: &str) -> Result<FSpec> {
    let num = |s: &str, what: &str, off: usize| {
        s.trim().parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| Error::Parse {
            pos: off,
            msg: format!("{what} needs a finite number, got '{s}'"),
        })
    };
    if let Some(rest) = spec.strip_prefix("const:") {
        return Ok(FSpec::Const(num(rest, "const", 6)?));
    }
    if let Some(rest) = spec.strip_prefix("eps_step:") {
        let e = num(rest, "eps_step", 9)?;
        if e <= 0.0 {
            return perr(9, format!("eps_step needs ε > 0, got {e}"));
        }
        return Ok(FSpec::EpsStep(e));
    }
    let (source, off) = match spec.strip_prefix("expr:") {
        Some(rest) => (rest, 5),
        None => (spec, 0),
    };
    let expr = parse_expr(source).map_err(|e| match e {
        Error::Parse { pos, msg } => Error::Parse { pos: pos + off, msg },
        other => other,
    })?;
    if let Expr::Num(c) = expr {
        return Ok(FSpec::Const(c));
    }
    Ok(FSpec::Expr {
        source: source.trim().to_string(),
        expr,
    })
}

impl FSpec {
    pub fn is_radial(&self) -> bool {
        match self {
            FSpec::Const(_) | FSpec::EpsStep(_) => true,
            FSpec::Expr { expr, .. } => expr.is_radial(),
        }
    }

    pub fn eval(&self, x: [f64; 2]) -> Result<f64> {
        match self {
            FSpec::Const(c) => Ok(*c),
            FSpec::EpsStep(e) => Ok(if (x[0] * x[0] + x[1] * x[1]).sqrt() <= 0.5 { *e } else { 1.0 }),
            FSpec::Expr { expr, .. } => expr.eval(x),
        }
    }

    /// Nodal field on the grid's domain nodes (zero outside the mask).
    pub fn field(&self, grid: &Arc<Grid2D>) -> Result<ScalarField> {
        let mut values = vec![0.0; grid.len()];
        for k in grid.domain_nodes() {
            values[k] = self.eval(grid.coords(k)).map_err(|e| Error::Domain {
                node: k,
                msg: e.to_string(),
            })?;
        }
        Ok(ScalarField::new(grid.clone(), values))
    }

    /// Radial profile on `m` nodes; only for radial specs.
    pub fn radial_profile(&self, m: usize) -> Result<RadialProfile> {
        match self {
            FSpec::Const(c) => RadialProfile::constant(*c, m),
            FSpec::EpsStep(e) => RadialProfile::eps_step(*e, m),
            FSpec::Expr { expr, source } => {
                if !expr.is_radial() {
                    return Err(Error::Config(format!("'{source}' depends on x1/x2, not only on r")));
                }
                for i in 0..m.max(2) {
                    let r = i as f64 / (m.max(2) - 1) as f64;
                    expr.eval_r(r).map_err(|e| Error::Eval(format!("at r = {r}: {e}")))?;
                }
                let e = expr.clone();
                RadialProfile::constraint(move |r| e.eval_r(r).unwrap_or(f64::NAN), m, &[])
            }
        }
    }
}
