//! Named fields and functions used by the examples and built-in scenarios.

use crate::expr::{FieldSpec, ScalarSpec};

fn vars(n: usize) -> impl Iterator<Item = String> {
    (1..=n).map(|i| format!("x{i}"))
}

fn parse(src: &str, n: usize, m: usize) -> FieldSpec {
    FieldSpec::parse(src, n, m).unwrap_or_else(|e| panic!("catalog field `{src}`: {e}"))
}

/// `x' = -x` in `R^n`.
pub fn linear_attractor(n: usize) -> FieldSpec {
    parse(&vars(n).map(|v| format!("-{v}")).collect::<Vec<_>>().join(", "), n, 0)
}

/// `x' = x` in `R^n`.
pub fn linear_repeller(n: usize) -> FieldSpec {
    parse(&vars(n).collect::<Vec<_>>().join(", "), n, 0)
}

/// `x' = (-x1, .., -x_{n-1}, x_n)`: one unstable direction.
pub fn linear_saddle(n: usize) -> FieldSpec {
    assert!(n >= 2, "a saddle needs two dimensions");
    let comps: Vec<String> = vars(n).enumerate().map(|(i, v)| if i + 1 == n { v } else { format!("-{v}") }).collect();
    parse(&comps.join(", "), n, 0)
}

fn binomial(k: u32, j: u32) -> u64 {
    (0..j).fold(1u64, |acc, i| acc * (k - i) as u64 / (i + 1) as u64)
}

/// Real form of `z' = z^k` (or `z' = conj(z)^k`, of degree `-k`).
pub fn complex_power(k: u32, conjugate: bool) -> FieldSpec {
    assert!(k >= 1);
    // (x1 + i s x2)^k = sum_j C(k,j) x1^(k-j) (i s x2)^j, s = -1 for conj
    let mut re = Vec::new();
    let mut im = Vec::new();
    for j in 0..=k {
        let c = binomial(k, j) as i64;
        let i_pow = [1i64, 1, -1, -1][(j % 4) as usize];
        let sign = i_pow * if conjugate && j % 2 == 1 { -1 } else { 1 };
        let mut factors = Vec::new();
        if c != 1 {
            factors.push(c.to_string());
        }
        if k - j > 0 {
            factors.push(if k - j == 1 { "x1".into() } else { format!("x1^{}", k - j) });
        }
        if j > 0 {
            factors.push(if j == 1 { "x2".into() } else { format!("x2^{j}") });
        }
        let term = (if sign < 0 { "- " } else { "+ " }).to_string() + &factors.join("*");
        if j % 2 == 0 {
            re.push(term);
        } else {
            im.push(term);
        }
    }
    let join = |t: Vec<String>| t.join(" ").trim_start_matches("+ ").replacen("- ", "-", 1);
    parse(&format!("{}, {}", join(re), join(im)), 2, 0)
}

/// Two attractors at `(+-1, 0)` and a saddle at the origin.
pub fn cubic_two_attractors() -> FieldSpec {
    parse("x1 - x1^3, -x2", 2, 0)
}

pub fn van_der_pol(mu: f64) -> FieldSpec {
    parse(&format!("x2, {mu}*(1 - x1^2)*x2 - x1"), 2, 0)
}

/// Van der Pol in the plane `x3 = 0`, with `x3' = -x3`.
pub fn van_der_pol_3d(mu: f64) -> FieldSpec {
    parse(&format!("x2, {mu}*(1 - x1^2)*x2 - x1, -x3"), 3, 0)
}

/// Hopf normal form with the attracting cycle `r = 1`.
pub fn circle_normal_form() -> FieldSpec {
    parse("x1*(1 - x1^2 - x2^2) - x2, x2*(1 - x1^2 - x2^2) + x1", 2, 0)
}

/// Harmonic oscillator `x' = (x2, -x1)`.
pub fn rotation() -> FieldSpec {
    parse("x2, -x1", 2, 0)
}

/// Spiral sink `x' = (-x1 + x2, -x2 - x1)`.
pub fn rotating_attractor() -> FieldSpec {
    parse("-x1 + x2, -x2 - x1", 2, 0)
}

/// `2 pi`-periodic field on the plane, i.e. a field on the flat torus.
pub fn flat_torus_field() -> FieldSpec {
    parse("sin(x1), sin(x2)", 2, 0)
}

/// `x' = (u1, u2, x1 u2 - x2 u1)`.
pub fn brockett_integrator() -> FieldSpec {
    parse("u1, u2, x1*u2 - x2*u1", 3, 2)
}

/// `x' = u` in `R^n`.
pub fn full_actuation(n: usize) -> FieldSpec {
    parse(&(1..=n).map(|i| format!("u{i}")).collect::<Vec<_>>().join(", "), n, n)
}

/// Double integrator `x1' = x2, x2' = u`.
pub fn linear_chain() -> FieldSpec {
    parse("x2, u1", 2, 1)
}

/// `x' = -x + u` in `R^n`.
pub fn controlled_attractor(n: usize) -> FieldSpec {
    parse(&(1..=n).map(|i| format!("-x{i} + u{i}")).collect::<Vec<_>>().join(", "), n, n)
}

/// `|x|^2 / 2`.
pub fn half_square_norm(n: usize) -> ScalarSpec {
    let s = vars(n).map(|v| format!("{v}^2")).collect::<Vec<_>>().join(" + ");
    ScalarSpec::parse(&format!("({s})/2"), n).expect("catalog scalar")
}

/// Squared distance to the unit circle in the `x1 x2` plane; its level sets
/// below 1 are tori.
pub fn torus_lyapunov() -> ScalarSpec {
    ScalarSpec::parse("(sqrt(x1^2 + x2^2) - 1)^2 + x3^2", 3).expect("catalog scalar")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cpow(x: f64, y: f64, k: u32, conj: bool) -> (f64, f64) {
        let (a, b) = (x, if conj { -y } else { y });
        let (mut re, mut im) = (1.0, 0.0);
        for _ in 0..k {
            (re, im) = (re * a - im * b, re * b + im * a);
        }
        (re, im)
    }

    #[test]
    fn complex_powers_match_complex_arithmetic() {
        for k in 1..=4 {
            for conj in [false, true] {
                let f = complex_power(k, conj);
                for (x, y) in [(0.3, -1.2), (1.5, 0.7), (-0.4, 0.9)] {
                    let v = f.at(&[x, y]).unwrap();
                    let (re, im) = cpow(x, y, k, conj);
                    assert!((v[0] - re).abs() < 1e-12 && (v[1] - im).abs() < 1e-12, "k={k} conj={conj}: {f}");
                }
            }
        }
        assert_eq!(complex_power(2, false).to_string(), "x1^2 - x2^2, 2*x1*x2");
    }
}
