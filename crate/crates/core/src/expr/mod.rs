//! The field language: vector fields `x' = f(x, u)` and scalar functions
//! `V(x)` written as small arithmetic expressions.
//!
//! Jacobians are obtained by symbolic differentiation of the expression
//! trees at construction time; finite differences are only used by tests.

mod ast;
mod parser;

use std::fmt;

use nalgebra::DMatrix;
use thiserror::Error;

pub use ast::{BinOp, Expr, Func, Var};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("expected {expected} components, found {found}")]
    ComponentCount { expected: usize, found: usize },
    #[error("state dimension must be at least 1")]
    ZeroDimension,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("domain error in component {component}: {reason}")]
    Domain { component: usize, reason: &'static str },
    #[error("expected vector of length {expected}, got {found}")]
    Length { expected: usize, found: usize },
}

fn check_len(v: &[f64], expected: usize) -> Result<(), EvalError> {
    if v.len() == expected {
        Ok(())
    } else {
        Err(EvalError::Length { expected, found: v.len() })
    }
}

/// A parsed vector field `f: R^n x R^m -> R^n`. With `m = 0` this is a plain
/// dynamical system; with `m > 0` it is a control system.
#[derive(Clone, Debug)]
pub struct FieldSpec {
    n: usize,
    m: usize,
    components: Vec<Expr>,
    // jacobian[i][j] = d f_i / d x_j
    jacobian: Vec<Vec<Expr>>,
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.m == other.m && self.components == other.components
    }
}

/// Parse `source` as an `n`-component field in states `x1..xn` and
/// controls `u1..um`.
pub fn parse_field(source: &str, n: usize, m: usize) -> Result<FieldSpec, ParseError> {
    FieldSpec::parse(source, n, m)
}

/// A state feedback law `u = k(x)`: `m` expressions in `x1..xn`.
#[derive(Clone, Debug, PartialEq)]
pub struct Feedback {
    n: usize,
    components: Vec<Expr>,
}

impl Feedback {
    pub fn parse(source: &str, n: usize, m: usize) -> Result<Self, ParseError> {
        if n == 0 {
            return Err(ParseError::ZeroDimension);
        }
        let components = parser::Parser::new(source, n, 0).field()?;
        if components.len() != m {
            return Err(ParseError::ComponentCount { expected: m, found: components.len() });
        }
        Ok(Feedback { n, components })
    }

    /// The zero feedback `u = 0` with `m` controls.
    pub fn zero(n: usize, m: usize) -> Self {
        Feedback { n, components: vec![Expr::Num(0.0); m] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.components.len()
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>, EvalError> {
        check_len(x, self.n)?;
        self.components
            .iter()
            .enumerate()
            .map(|(i, c)| c.eval_raw(x, &[]).map_err(|ast::Domain(reason)| EvalError::Domain { component: i, reason }))
            .collect()
    }
}

impl fmt::Display for Feedback {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Parse a scalar function of `x1..xn`.
pub fn parse_scalar(source: &str, n: usize) -> Result<ScalarSpec, ParseError> {
    ScalarSpec::parse(source, n)
}

impl FieldSpec {
    pub fn parse(source: &str, n: usize, m: usize) -> Result<Self, ParseError> {
        if n == 0 {
            return Err(ParseError::ZeroDimension);
        }
        let components = parser::Parser::new(source, n, m).field()?;
        if components.len() != n {
            return Err(ParseError::ComponentCount { expected: n, found: components.len() });
        }
        Ok(Self::build(n, m, components))
    }

    /// Build from expression trees, checking that every variable is declared.
    pub fn from_components(n: usize, m: usize, components: Vec<Expr>) -> Result<Self, ParseError> {
        if n == 0 {
            return Err(ParseError::ZeroDimension);
        }
        if components.len() != n {
            return Err(ParseError::ComponentCount { expected: n, found: components.len() });
        }
        for c in &components {
            let mut bad = None;
            c.for_each_var(&mut |v| {
                let ok = match v {
                    Var::State(i) => i < n,
                    Var::Control(j) => j < m,
                };
                if !ok && bad.is_none() {
                    bad = Some(v);
                }
            });
            if let Some(v) = bad {
                return Err(ParseError::UnknownIdentifier { name: v.to_string(), offset: 0 });
            }
        }
        Ok(Self::build(n, m, components))
    }

    fn build(n: usize, m: usize, components: Vec<Expr>) -> Self {
        let jacobian = components
            .iter()
            .map(|c| (0..n).map(|j| c.derivative(j)).collect())
            .collect();
        FieldSpec { n, m, components, jacobian }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    /// Evaluate `f(x, u)`.
    pub fn evaluate(&self, x: &[f64], u: &[f64]) -> Result<Vec<f64>, EvalError> {
        check_len(x, self.n)?;
        check_len(u, self.m)?;
        self.components
            .iter()
            .enumerate()
            .map(|(i, c)| {
                c.eval_raw(x, u)
                    .map_err(|ast::Domain(reason)| EvalError::Domain { component: i, reason })
            })
            .collect()
    }

    /// Evaluate a closed system (`m = 0`) or a control system at `u = 0`.
    pub fn at(&self, x: &[f64]) -> Result<Vec<f64>, EvalError> {
        let zero = vec![0.0; self.m];
        self.evaluate(x, &zero)
    }

    /// State Jacobian `df/dx` at `(x, u)`.
    pub fn jacobian(&self, x: &[f64], u: &[f64]) -> Result<DMatrix<f64>, EvalError> {
        check_len(x, self.n)?;
        check_len(u, self.m)?;
        let mut out = DMatrix::zeros(self.n, self.n);
        for (i, row) in self.jacobian.iter().enumerate() {
            for (j, d) in row.iter().enumerate() {
                out[(i, j)] = d
                    .eval_raw(x, u)
                    .map_err(|ast::Domain(reason)| EvalError::Domain { component: i, reason })?;
            }
        }
        Ok(out)
    }

    /// Close the loop with a state feedback `u = k(x)`; `feedback` must have
    /// one component per control of `self`.
    pub fn with_feedback(&self, feedback: &Feedback) -> Result<FieldSpec, ParseError> {
        if feedback.n != self.n {
            return Err(ParseError::ComponentCount { expected: self.n, found: feedback.n });
        }
        if feedback.components.len() != self.m {
            return Err(ParseError::ComponentCount {
                expected: self.m,
                found: feedback.components.len(),
            });
        }
        let comps = self
            .components
            .iter()
            .map(|c| c.substitute_controls(&feedback.components))
            .collect();
        FieldSpec::from_components(self.n, 0, comps)
    }

    /// The field multiplied componentwise by a scalar function of the state.
    pub fn scaled_by(&self, factor: &ScalarSpec) -> FieldSpec {
        assert_eq!(factor.n, self.n, "scale factor dimension mismatch");
        let comps = self
            .components
            .iter()
            .map(|c| Expr::Binary(BinOp::Mul, Box::new(factor.expr.clone()), Box::new(c.clone())))
            .collect();
        Self::build(self.n, self.m, comps)
    }

    /// Embed an `n`-dimensional closed field into `n + 1` dimensions with
    /// the extra component `x_{n+1}' = extra`.
    pub fn extended(&self, extra: &str) -> Result<FieldSpec, ParseError> {
        let mut comps = self.components.clone();
        let e = parser::Parser::new(extra, self.n + 1, self.m).single()?;
        comps.push(e);
        FieldSpec::from_components(self.n + 1, self.m, comps)
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// A scalar function `V: R^n -> R`, typically a Lyapunov function.
#[derive(Clone, Debug)]
pub struct ScalarSpec {
    n: usize,
    expr: Expr,
    gradient: Vec<Expr>,
}

impl PartialEq for ScalarSpec {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.expr == other.expr
    }
}

impl ScalarSpec {
    pub fn parse(source: &str, n: usize) -> Result<Self, ParseError> {
        if n == 0 {
            return Err(ParseError::ZeroDimension);
        }
        let expr = parser::Parser::new(source, n, 0).single()?;
        Ok(Self::from_expr(n, expr))
    }

    fn from_expr(n: usize, expr: Expr) -> Self {
        let gradient = (0..n).map(|j| expr.derivative(j)).collect();
        ScalarSpec { n, expr, gradient }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64, EvalError> {
        check_len(x, self.n)?;
        self.expr.eval(x, &[])
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>, EvalError> {
        check_len(x, self.n)?;
        self.gradient
            .iter()
            .enumerate()
            .map(|(i, g)| {
                g.eval_raw(x, &[])
                    .map_err(|ast::Domain(reason)| EvalError::Domain { component: i, reason })
            })
            .collect()
    }

    /// The gradient field `-grad V` as a closed field.
    pub fn negative_gradient_field(&self) -> FieldSpec {
        let comps = self.gradient.iter().cloned().map(Expr::neg).collect();
        FieldSpec::build(self.n, 0, comps)
    }
}

impl fmt::Display for ScalarSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.expr)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_jacobian(f: &FieldSpec, x: &[f64], u: &[f64]) -> DMatrix<f64> {
        let h = 1e-5;
        let n = f.n();
        let mut out = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[j] += h;
            xm[j] -= h;
            let fp = f.evaluate(&xp, u).unwrap();
            let fm = f.evaluate(&xm, u).unwrap();
            for i in 0..n {
                out[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        out
    }

    #[test]
    fn parses_negation() {
        let f = parse_field("-x1", 1, 0).unwrap();
        assert_eq!(f.components(), &[Expr::Neg(Box::new(Expr::state(0)))]);
        assert_eq!(f.evaluate(&[2.0], &[]).unwrap(), vec![-2.0]);
    }

    #[test]
    fn parses_complex_square() {
        let f = parse_field("x1^2 - x2^2, 2*x1*x2", 2, 0).unwrap();
        assert_eq!(f.components().len(), 2);
        // hand evaluation: (1 - 1, 2*1*1)
        assert_eq!(f.evaluate(&[1.0, 1.0], &[]).unwrap(), vec![0.0, 2.0]);
    }

    #[test]
    fn syntax_error_reports_offset() {
        match parse_field("x1 + ", 1, 0) {
            Err(ParseError::Syntax { offset, .. }) => assert_eq!(offset, 5),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_field("x1 + )", 1, 0), Err(ParseError::Syntax { offset: 5, .. })));
        assert!(matches!(parse_field("x1 x2", 2, 0), Err(ParseError::Syntax { offset: 3, .. })));
        assert!(matches!(parse_field("x1^-2", 1, 0), Err(ParseError::Syntax { offset: 3, .. })));
    }

    #[test]
    fn unknown_identifiers() {
        assert!(matches!(
            parse_field("x3", 2, 0),
            Err(ParseError::UnknownIdentifier { ref name, offset: 0 }) if name == "x3"
        ));
        assert!(matches!(parse_field("u1", 1, 0), Err(ParseError::UnknownIdentifier { .. })));
        assert!(matches!(parse_field("y + 1", 1, 0), Err(ParseError::UnknownIdentifier { .. })));
        assert!(matches!(parse_field("x0", 1, 0), Err(ParseError::UnknownIdentifier { .. })));
        assert!(matches!(parse_field("log(x1)", 1, 0), Err(ParseError::UnknownIdentifier { .. })));
    }

    #[test]
    fn component_count_mismatch() {
        assert_eq!(
            parse_field("x1, x2, 1", 2, 0),
            Err(ParseError::ComponentCount { expected: 2, found: 3 })
        );
    }

    #[test]
    fn numbers_with_exponents() {
        let f = parse_field("1.5e-3 + 2E2 + .5", 1, 0).unwrap();
        assert!((f.evaluate(&[0.0], &[]).unwrap()[0] - 200.5015).abs() < 1e-12);
        assert!(parse_field("1e", 1, 0).is_err());
    }

    #[test]
    fn unary_minus_binds_tighter_than_power() {
        let f = parse_field("-x1^2", 1, 0).unwrap();
        assert_eq!(f.evaluate(&[3.0], &[]).unwrap(), vec![9.0]);
    }

    #[test]
    fn brockett_integrator_at_origin() {
        let f = parse_field("u1, u2, x1*u2 - x2*u1", 3, 2).unwrap();
        assert_eq!(f.evaluate(&[0.0, 0.0, 0.0], &[1.0, 0.0]).unwrap(), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn domain_errors_name_the_component() {
        let f = parse_field("x1, sqrt(x1)", 2, 0).unwrap();
        assert!(matches!(
            f.evaluate(&[-1.0, 0.0], &[]),
            Err(EvalError::Domain { component: 1, .. })
        ));
        let g = parse_field("1/x1", 1, 0).unwrap();
        assert!(matches!(g.evaluate(&[0.0], &[]), Err(EvalError::Domain { component: 0, .. })));
        assert!(matches!(f.evaluate(&[1.0], &[]), Err(EvalError::Length { .. })));
    }

    #[test]
    fn jacobian_examples() {
        let f = parse_field("-x1, -x2", 2, 0).unwrap();
        assert_eq!(f.jacobian(&[0.3, -4.0], &[]).unwrap(), -DMatrix::<f64>::identity(2, 2));

        let z2 = parse_field("x1^2 - x2^2, 2*x1*x2", 2, 0).unwrap();
        let j = z2.jacobian(&[1.0, 0.0], &[]).unwrap();
        let fd = fd_jacobian(&z2, &[1.0, 0.0], &[]);
        assert!((&j - &fd).amax() < 1e-8);
        assert_eq!(j, DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 2.0]));

        let s = parse_field("sin(x1)", 1, 0).unwrap();
        assert_eq!(s.jacobian(&[0.0], &[]).unwrap()[(0, 0)], 1.0);
        assert!((fd_jacobian(&s, &[0.0], &[])[(0, 0)] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn jacobian_at_abs_kink_is_domain_error() {
        let f = parse_field("abs(x1)", 1, 0).unwrap();
        assert!(f.evaluate(&[0.0], &[]).is_ok());
        assert!(matches!(f.jacobian(&[0.0], &[]), Err(EvalError::Domain { .. })));
    }

    #[test]
    fn feedback_substitution() {
        let f = parse_field("u1, u2, x1*u2 - x2*u1", 3, 2).unwrap();
        let k = Feedback::parse("-x1, -x2", 3, 2).unwrap();
        assert!(Feedback::parse("-x1, -u1", 3, 2).is_err());
        assert!(matches!(Feedback::parse("-x1", 3, 2), Err(ParseError::ComponentCount { expected: 2, found: 1 })));
        let closed = f.with_feedback(&k).unwrap();
        assert_eq!(closed.m(), 0);
        let v = closed.evaluate(&[0.7, -0.2, 1.0], &[]).unwrap();
        assert_eq!(v[0], -0.7);
        assert_eq!(v[1], 0.2);
        assert!(v[2].abs() < 1e-15);
    }

    #[test]
    fn gradient_field_of_quadratic() {
        let v = parse_scalar("(x1^2 + x2^2)/2", 2).unwrap();
        let g = v.negative_gradient_field();
        assert_eq!(g.evaluate(&[1.0, -2.0], &[]).unwrap(), vec![-1.0, 2.0]);
    }

    #[test]
    fn canonical_print_round_trip() {
        for src in ["x1^2 - x2^2, 2*x1*x2", "-(x1 - x2)/(1 + abs(x1))^3, tanh(-x2)*exp(x1)"] {
            let f = parse_field(src, 2, 0).unwrap();
            let again = parse_field(&f.to_string(), 2, 0).unwrap();
            assert_eq!(f, again);
        }
    }
}
