use std::fmt;

use super::EvalError;

/// A variable reference. Indices are zero-based; they print as `x1`, `u1`, ...
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    State(usize),
    Control(usize),
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::State(i) => write!(f, "x{}", i + 1),
            Var::Control(i) => write!(f, "u{}", i + 1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Tanh,
    Sqrt,
    Abs,
}

impl Func {
    pub const ALL: [Func; 6] = [Func::Sin, Func::Cos, Func::Exp, Func::Tanh, Func::Sqrt, Func::Abs];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Tanh => "tanh",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }
}

/// Expression tree of the field language.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// Integer power; the grammar only admits unsigned integer exponents.
    Pow(Box<Expr>, u32),
    Call(Func, Box<Expr>),
}

/// Where an evaluation failed, without the component index (the caller adds it).
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Domain(pub &'static str);

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn state(i: usize) -> Expr {
        Expr::Var(Var::State(i))
    }

    pub fn control(i: usize) -> Expr {
        Expr::Var(Var::Control(i))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 0.0)
    }

    fn is_one(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 1.0)
    }

    // Smart constructors used by differentiation and substitution. They fold
    // constants but never reorder operands.

    pub fn add(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Num(x), Expr::Num(y)) => Expr::Num(x + y),
            _ if a.is_zero() => b,
            _ if b.is_zero() => a,
            _ => Expr::Binary(BinOp::Add, Box::new(a), Box::new(b)),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Num(x), Expr::Num(y)) => Expr::Num(x - y),
            _ if b.is_zero() => a,
            _ if a.is_zero() => Expr::neg(b),
            _ => Expr::Binary(BinOp::Sub, Box::new(a), Box::new(b)),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Num(x), Expr::Num(y)) => Expr::Num(x * y),
            _ if a.is_zero() || b.is_zero() => Expr::Num(0.0),
            _ if a.is_one() => b,
            _ if b.is_one() => a,
            _ => Expr::Binary(BinOp::Mul, Box::new(a), Box::new(b)),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Num(x), Expr::Num(y)) if *y != 0.0 => Expr::Num(x / y),
            _ if b.is_one() => a,
            _ => Expr::Binary(BinOp::Div, Box::new(a), Box::new(b)),
        }
    }

    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Num(x) => Expr::Num(-x),
            Expr::Neg(inner) => *inner,
            other => Expr::Neg(Box::new(other)),
        }
    }

    pub fn pow(a: Expr, k: u32) -> Expr {
        match (a, k) {
            (_, 0) => Expr::Num(1.0),
            (a, 1) => a,
            (Expr::Num(x), k) => Expr::Num(x.powi(k as i32)),
            (a, k) => Expr::Pow(Box::new(a), k),
        }
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        Expr::Call(f, Box::new(a))
    }

    pub(crate) fn eval_raw(&self, x: &[f64], u: &[f64]) -> Result<f64, Domain> {
        let v = match self {
            Expr::Num(v) => *v,
            Expr::Var(Var::State(i)) => x[*i],
            Expr::Var(Var::Control(i)) => u[*i],
            Expr::Neg(a) => -a.eval_raw(x, u)?,
            Expr::Binary(op, a, b) => {
                let a = a.eval_raw(x, u)?;
                let b = b.eval_raw(x, u)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(Domain("division by zero"));
                        }
                        a / b
                    }
                }
            }
            Expr::Pow(a, k) => a.eval_raw(x, u)?.powi(*k as i32),
            Expr::Call(f, a) => {
                let a = a.eval_raw(x, u)?;
                match f {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                    Func::Tanh => a.tanh(),
                    Func::Abs => a.abs(),
                    Func::Sqrt => {
                        if a < 0.0 {
                            return Err(Domain("square root of a negative number"));
                        }
                        a.sqrt()
                    }
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Domain("non-finite value"))
        }
    }

    /// Evaluate a standalone expression. Variables out of range panic; use
    /// [`FieldSpec`](super::FieldSpec) for checked evaluation.
    pub fn eval(&self, x: &[f64], u: &[f64]) -> Result<f64, EvalError> {
        self.eval_raw(x, u)
            .map_err(|Domain(reason)| EvalError::Domain { component: 0, reason })
    }

    /// Partial derivative with respect to the state variable `x{var+1}`.
    ///
    /// `abs` and `sqrt` differentiate to quotients that divide by zero at
    /// their kinks, so evaluating the derivative there is a domain error.
    pub fn derivative(&self, var: usize) -> Expr {
        match self {
            Expr::Num(_) => Expr::Num(0.0),
            Expr::Var(Var::State(i)) if *i == var => Expr::Num(1.0),
            Expr::Var(_) => Expr::Num(0.0),
            Expr::Neg(a) => Expr::neg(a.derivative(var)),
            Expr::Binary(op, a, b) => {
                let da = a.derivative(var);
                let db = b.derivative(var);
                match op {
                    BinOp::Add => Expr::add(da, db),
                    BinOp::Sub => Expr::sub(da, db),
                    BinOp::Mul => Expr::add(
                        Expr::mul(da, (**b).clone()),
                        Expr::mul((**a).clone(), db),
                    ),
                    BinOp::Div => {
                        if db.is_zero() {
                            Expr::div(da, (**b).clone())
                        } else {
                            Expr::div(
                                Expr::sub(
                                    Expr::mul(da, (**b).clone()),
                                    Expr::mul((**a).clone(), db),
                                ),
                                Expr::pow((**b).clone(), 2),
                            )
                        }
                    }
                }
            }
            Expr::Pow(a, k) => {
                let da = a.derivative(var);
                if da.is_zero() {
                    return Expr::Num(0.0);
                }
                Expr::mul(
                    Expr::mul(Expr::Num(*k as f64), Expr::pow((**a).clone(), k - 1)),
                    da,
                )
            }
            Expr::Call(f, a) => {
                let da = a.derivative(var);
                if da.is_zero() {
                    return Expr::Num(0.0);
                }
                let inner = (**a).clone();
                let outer = match f {
                    Func::Sin => Expr::call(Func::Cos, inner),
                    Func::Cos => Expr::neg(Expr::call(Func::Sin, inner)),
                    Func::Exp => Expr::call(Func::Exp, inner),
                    Func::Tanh => Expr::sub(Expr::Num(1.0), Expr::pow(Expr::call(Func::Tanh, inner), 2)),
                    Func::Sqrt => Expr::div(Expr::Num(1.0), Expr::mul(Expr::Num(2.0), Expr::call(Func::Sqrt, inner))),
                    Func::Abs => Expr::div(inner.clone(), Expr::call(Func::Abs, inner)),
                };
                Expr::mul(outer, da)
            }
        }
    }

    /// Replace every control variable `u{j+1}` with `replacement[j]`.
    pub fn substitute_controls(&self, replacement: &[Expr]) -> Expr {
        match self {
            Expr::Var(Var::Control(j)) => replacement[*j].clone(),
            Expr::Num(_) | Expr::Var(_) => self.clone(),
            Expr::Neg(a) => Expr::Neg(Box::new(a.substitute_controls(replacement))),
            Expr::Binary(op, a, b) => Expr::Binary(
                *op,
                Box::new(a.substitute_controls(replacement)),
                Box::new(b.substitute_controls(replacement)),
            ),
            Expr::Pow(a, k) => Expr::Pow(Box::new(a.substitute_controls(replacement)), *k),
            Expr::Call(f, a) => Expr::Call(*f, Box::new(a.substitute_controls(replacement))),
        }
    }

    /// Visit every variable reference.
    pub fn for_each_var(&self, visit: &mut impl FnMut(Var)) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(v) => visit(*v),
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.for_each_var(visit),
            Expr::Binary(_, a, b) => {
                a.for_each_var(visit);
                b.for_each_var(visit);
            }
        }
    }

    // Precedence levels of the grammar: expr = 1, term = 2, factor = 3, base = 4.
    fn level(&self) -> u8 {
        match self {
            Expr::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Pow(..) => 3,
            Expr::Num(v) if *v < 0.0 || v.is_sign_negative() => 0,
            _ => 4,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min_level: u8) -> fmt::Result {
        if self.level() < min_level {
            write!(f, "(")?;
            self.write_at(f, 0)?;
            return write!(f, ")");
        }
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                a.write_at(f, 4)
            }
            Expr::Binary(op, a, b) => {
                let (left, right) = match op {
                    BinOp::Add | BinOp::Sub => (1, 2),
                    BinOp::Mul | BinOp::Div => (2, 3),
                };
                a.write_at(f, left)?;
                match op {
                    BinOp::Add | BinOp::Sub => write!(f, " {} ", op.symbol())?,
                    _ => write!(f, "{}", op.symbol())?,
                }
                b.write_at(f, right)
            }
            Expr::Pow(a, k) => {
                a.write_at(f, 4)?;
                write!(f, "^{k}")
            }
            Expr::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                a.write_at(f, 0)?;
                write!(f, ")")
            }
        }
    }
}

/// Canonical printer: the output parses back to a structurally equal tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}
