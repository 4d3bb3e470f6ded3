//! Symbolic expressions in one spatial variable `x` plus named parameters.
//!
//! This is the substrate every other module consumes: masses, potentials,
//! Killing fields and operator coefficients are all values of [`Expr`].
//! The function set is a fixed whitelist chosen so that differentiation is
//! closed; powers carry constant real exponents only.

mod parser;

pub use parser::{parse_expr, ParseError, ParseErrorKind};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Parameter bindings: every free parameter of an expression being
/// evaluated must have exactly one entry here.
pub type Bindings = BTreeMap<String, f64>;

/// Convenience constructor for literal binding tables.
pub fn bindings(pairs: &[(&str, f64)]) -> Bindings {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Whitelisted unary functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Exp,
    Log,
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Arcsin,
    Arctan,
    Arcsinh,
    Arctanh,
    Abs,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Arcsin => "arcsin",
            Func::Arctan => "arctan",
            Func::Arcsinh => "arcsinh",
            Func::Arctanh => "arctanh",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sqrt" => Func::Sqrt,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            "arcsin" => Func::Arcsin,
            "arctan" => Func::Arctan,
            "arcsinh" => Func::Arcsinh,
            "arctanh" => Func::Arctanh,
            "abs" => Func::Abs,
            _ => return None,
        })
    }
}

/// Binary operations. `Pow` exponents are restricted to constant
/// (x-free) subexpressions; the parser enforces this.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Immutable expression tree. All operations on it are pure.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Param(String),
    Neg(Box<Expr>),
    Unary(Func, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

/// Faults raised during numeric evaluation.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum EvalError {
    #[error("domain fault: {what} at x = {x}")]
    DomainFault { what: String, x: f64 },
    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),
    #[error("non-finite result at x = {0}")]
    NonFinite(f64),
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn var() -> Expr {
        Expr::Var
    }

    pub fn param(name: &str) -> Expr {
        Expr::Param(name.to_string())
    }

    pub fn apply(f: Func, e: Expr) -> Expr {
        Expr::Unary(f, Box::new(e))
    }

    pub fn sqrt(self) -> Expr {
        Expr::apply(Func::Sqrt, self)
    }

    /// Power with a constant real exponent.
    pub fn powc(self, r: f64) -> Expr {
        Expr::Binary(BinOp::Pow, Box::new(self), Box::new(Expr::Num(r)))
    }

    pub fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }

    /// True if the spatial variable `x` occurs anywhere in the tree.
    pub fn contains_var(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::Param(_) => false,
            Expr::Var => true,
            Expr::Neg(e) | Expr::Unary(_, e) => e.contains_var(),
            Expr::Binary(_, l, r) => l.contains_var() || r.contains_var(),
        }
    }

    /// Names of all free parameters.
    pub fn free_params(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_params(&mut out);
        out
    }

    fn collect_params(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Num(_) | Expr::Var => {}
            Expr::Param(p) => {
                out.insert(p.clone());
            }
            Expr::Neg(e) | Expr::Unary(_, e) => e.collect_params(out),
            Expr::Binary(_, l, r) => {
                l.collect_params(out);
                r.collect_params(out);
            }
        }
    }

    /// Evaluate at a point. Reports domain faults (log of a non-positive
    /// argument, arctanh outside (-1,1), division by zero, ...) instead of
    /// silently producing NaN.
    pub fn eval(&self, x: f64, b: &Bindings) -> Result<f64, EvalError> {
        let v = self.eval_inner(x, b)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite(x))
        }
    }

    fn eval_inner(&self, x: f64, b: &Bindings) -> Result<f64, EvalError> {
        let fault = |what: &str| EvalError::DomainFault {
            what: what.to_string(),
            x,
        };
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::Var => x,
            Expr::Param(p) => *b
                .get(p)
                .ok_or_else(|| EvalError::UnboundParameter(p.clone()))?,
            Expr::Neg(e) => -e.eval_inner(x, b)?,
            Expr::Unary(f, e) => {
                let u = e.eval_inner(x, b)?;
                match f {
                    Func::Sqrt => {
                        if u < 0.0 {
                            return Err(fault("sqrt of negative value"));
                        }
                        u.sqrt()
                    }
                    Func::Exp => u.exp(),
                    Func::Log => {
                        if u <= 0.0 {
                            return Err(fault("log of non-positive value"));
                        }
                        u.ln()
                    }
                    Func::Sin => u.sin(),
                    Func::Cos => u.cos(),
                    Func::Tan => u.tan(),
                    Func::Sinh => u.sinh(),
                    Func::Cosh => u.cosh(),
                    Func::Tanh => u.tanh(),
                    Func::Arcsin => {
                        if u.abs() > 1.0 {
                            return Err(fault("arcsin argument outside [-1, 1]"));
                        }
                        u.asin()
                    }
                    Func::Arctan => u.atan(),
                    Func::Arcsinh => u.asinh(),
                    Func::Arctanh => {
                        if u.abs() >= 1.0 {
                            return Err(fault("arctanh argument outside (-1, 1)"));
                        }
                        u.atanh()
                    }
                    Func::Abs => u.abs(),
                }
            }
            Expr::Binary(op, l, r) => {
                let a = l.eval_inner(x, b)?;
                let c = r.eval_inner(x, b)?;
                match op {
                    BinOp::Add => a + c,
                    BinOp::Sub => a - c,
                    BinOp::Mul => a * c,
                    BinOp::Div => {
                        if c == 0.0 {
                            return Err(fault("division by zero"));
                        }
                        a / c
                    }
                    BinOp::Pow => {
                        if a == 0.0 && c < 0.0 {
                            return Err(fault("zero raised to a negative power"));
                        }
                        if a < 0.0 && c.fract() != 0.0 {
                            return Err(fault("negative base with non-integer exponent"));
                        }
                        a.powf(c)
                    }
                }
            }
        })
    }

    /// Exact symbolic derivative with respect to `x`; parameters are
    /// treated as constants. `abs` differentiates to u/|u|, which carries
    /// the expected discontinuity at u = 0.
    pub fn diff(&self) -> Expr {
        use BinOp::*;
        match self {
            Expr::Num(_) | Expr::Param(_) => Expr::Num(0.0),
            Expr::Var => Expr::Num(1.0),
            Expr::Neg(e) => e.diff().neg(),
            Expr::Unary(f, e) => {
                let u = (**e).clone();
                let du = e.diff();
                let chain = match f {
                    // d sqrt(u) = u' / (2 sqrt(u))
                    Func::Sqrt => du / (Expr::num(2.0) * u.sqrt()),
                    Func::Exp => du * Expr::apply(Func::Exp, u),
                    Func::Log => du / u,
                    Func::Sin => du * Expr::apply(Func::Cos, u),
                    Func::Cos => (du * Expr::apply(Func::Sin, u)).neg(),
                    // d tan(u) = u' / cos(u)^2
                    Func::Tan => du / Expr::apply(Func::Cos, u).powc(2.0),
                    Func::Sinh => du * Expr::apply(Func::Cosh, u),
                    Func::Cosh => du * Expr::apply(Func::Sinh, u),
                    Func::Tanh => du / Expr::apply(Func::Cosh, u).powc(2.0),
                    Func::Arcsin => {
                        du / (Expr::num(1.0) - u.powc(2.0)).sqrt()
                    }
                    Func::Arctan => du / (Expr::num(1.0) + u.powc(2.0)),
                    Func::Arcsinh => {
                        du / (Expr::num(1.0) + u.powc(2.0)).sqrt()
                    }
                    Func::Arctanh => du / (Expr::num(1.0) - u.powc(2.0)),
                    Func::Abs => du * (u.clone() / Expr::apply(Func::Abs, u)),
                };
                chain
            }
            Expr::Binary(op, l, r) => {
                let (u, v) = ((**l).clone(), (**r).clone());
                let (du, dv) = (l.diff(), r.diff());
                match op {
                    Add => du + dv,
                    Sub => du - dv,
                    Mul => du * v + u * dv,
                    Div => (du * v.clone() - u * dv) / r.clone().powc(2.0),
                    // constant exponent: d u^c = c u^(c-1) u'
                    Pow => {
                        v.clone()
                            * u.clone().pow_expr(v - Expr::num(1.0))
                            * du
                    }
                }
            }
        }
    }

    /// Power with an arbitrary constant (x-free) exponent expression.
    fn pow_expr(self, exponent: Expr) -> Expr {
        Expr::Binary(BinOp::Pow, Box::new(self), Box::new(exponent))
    }

    /// Structural simplification: constant folding plus the identity and
    /// annihilator rules. No trig identities; the result evaluates
    /// identically to the input.
    pub fn simplify(&self) -> Expr {
        use BinOp::*;
        match self {
            Expr::Num(_) | Expr::Var | Expr::Param(_) => self.clone(),
            Expr::Neg(e) => {
                let s = e.simplify();
                match s {
                    Expr::Num(v) => Expr::Num(-v),
                    Expr::Neg(inner) => *inner,
                    _ => s.neg(),
                }
            }
            Expr::Unary(f, e) => {
                let s = e.simplify();
                if let Expr::Num(v) = s {
                    let folded = Expr::Unary(*f, Box::new(Expr::Num(v)));
                    if let Ok(w) = folded.eval(0.0, &Bindings::new()) {
                        return Expr::Num(w);
                    }
                }
                Expr::Unary(*f, Box::new(s))
            }
            Expr::Binary(op, l, r) => {
                let a = l.simplify();
                let b = r.simplify();
                if let (Expr::Num(x), Expr::Num(y)) = (&a, &b) {
                    let folded =
                        Expr::Binary(*op, Box::new(Expr::Num(*x)), Box::new(Expr::Num(*y)));
                    if let Ok(v) = folded.eval(0.0, &Bindings::new()) {
                        return Expr::Num(v);
                    }
                }
                match op {
                    Add => match (&a, &b) {
                        (Expr::Num(z), _) if *z == 0.0 => b,
                        (_, Expr::Num(z)) if *z == 0.0 => a,
                        _ => Expr::Binary(Add, Box::new(a), Box::new(b)),
                    },
                    Sub => match (&a, &b) {
                        (_, Expr::Num(z)) if *z == 0.0 => a,
                        (Expr::Num(z), _) if *z == 0.0 => b.neg(),
                        _ => Expr::Binary(Sub, Box::new(a), Box::new(b)),
                    },
                    Mul => match (&a, &b) {
                        (Expr::Num(z), _) | (_, Expr::Num(z)) if *z == 0.0 => Expr::Num(0.0),
                        (Expr::Num(o), _) if *o == 1.0 => b,
                        (_, Expr::Num(o)) if *o == 1.0 => a,
                        _ => Expr::Binary(Mul, Box::new(a), Box::new(b)),
                    },
                    Div => match (&a, &b) {
                        (Expr::Num(z), _) if *z == 0.0 => Expr::Num(0.0),
                        (_, Expr::Num(o)) if *o == 1.0 => a,
                        _ => Expr::Binary(Div, Box::new(a), Box::new(b)),
                    },
                    Pow => match &b {
                        Expr::Num(o) if *o == 1.0 => a,
                        Expr::Num(z) if *z == 0.0 => Expr::Num(1.0),
                        _ => Expr::Binary(Pow, Box::new(a), Box::new(b)),
                    },
                }
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(BinOp::Add, _, _) | Expr::Binary(BinOp::Sub, _, _) => 1,
            Expr::Binary(BinOp::Mul, _, _) | Expr::Binary(BinOp::Div, _, _) => 2,
            Expr::Neg(_) => 3,
            Expr::Binary(BinOp::Pow, _, _) => 4,
            _ => 5,
        }
    }

    fn fmt_child(&self, child: &Expr, min_prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if child.precedence() < min_prec || matches!(child, Expr::Num(v) if *v < 0.0) {
            write!(f, "({})", child)
        } else {
            write!(f, "{}", child)
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{}", v),
            Expr::Var => write!(f, "x"),
            Expr::Param(p) => write!(f, "{}", p),
            Expr::Neg(e) => {
                write!(f, "-")?;
                self.fmt_child(e, 4, f)
            }
            Expr::Unary(func, e) => write!(f, "{}({})", func.name(), e),
            Expr::Binary(op, l, r) => {
                let (sym, prec) = match op {
                    BinOp::Add => ("+", 1),
                    BinOp::Sub => ("-", 1),
                    BinOp::Mul => ("*", 2),
                    BinOp::Div => ("/", 2),
                    BinOp::Pow => ("^", 4),
                };
                // Sub/Div need a tighter right child; Pow is right-associative.
                let (lmin, rmin) = match op {
                    BinOp::Add => (1, 1),
                    BinOp::Sub => (1, 2),
                    BinOp::Mul => (2, 2),
                    BinOp::Div => (2, 3),
                    BinOp::Pow => (5, 4),
                };
                self.fmt_child(l, lmin, f)?;
                write!(f, " {} ", sym)?;
                let _ = prec;
                self.fmt_child(r, rmin, f)
            }
        }
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Binary(BinOp::Add, Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Binary(BinOp::Sub, Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Binary(BinOp::Mul, Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::Binary(BinOp::Div, Box::new(self), Box::new(rhs))
    }
}
