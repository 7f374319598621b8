//! The scenario library shipped with the binary.

use std::f64::consts::PI;

use serde_json::{json, Value};
use topodyn::catalog;

use crate::scenario::{Scenario, SCHEMA_VERSION};

fn sphere(n: usize, r: f64) -> Value {
    json!({ "kind": "sphere", "center": vec![0.0; n], "radius": r })
}

fn cube(n: usize, half: f64) -> Value {
    json!({ "lo": vec![-half; n], "hi": vec![half; n] })
}

fn scenario(name: &str, description: &str, n: usize, m: usize, field: String, extra: Value) -> Scenario {
    let mut v = json!({
        "schema": SCHEMA_VERSION,
        "name": name,
        "description": description,
        "n": n,
        "m": m,
        "field": field,
    });
    if let (Some(obj), Some(more)) = (v.as_object_mut(), extra.as_object()) {
        for (k, x) in more {
            obj.insert(k.clone(), x.clone());
        }
    }
    serde_json::from_value(v).expect("built-in scenario")
}

fn linear(kind: &str, n: usize) -> Scenario {
    let (field, unstable) = match kind {
        "attractor" => (catalog::linear_attractor(n), 0),
        "repeller" => (catalog::linear_repeller(n), n),
        _ => (catalog::linear_saddle(n), 1),
    };
    let mut checks = vec![json!({ "check": "closed-loop-index", "point": vec![0.0; n], "radius": 0.5, "unstable_dim": unstable })];
    if n >= 2 {
        let grid = match n {
            2 => 10,
            3 => 6,
            _ => 4,
        };
        checks.push(json!({ "check": "poincare-hopf", "boundary": [sphere(n, 1.0)], "bounds": cube(n, 1.5), "grid": grid }));
    }
    scenario(
        &format!("linear-{kind}-{n}d"),
        &format!("linear {kind} in R^{n}"),
        n,
        0,
        field.to_string(),
        json!({ "checks": checks }),
    )
}

fn power(k: u32, conj: bool) -> Scenario {
    let d = if conj { -(k as i64) } else { k as i64 };
    let name = if conj { format!("conj-power-{k}") } else { format!("power-{k}") };
    let what = if conj { format!("z' = conj(z)^{k}") } else { format!("z' = z^{k}") };
    scenario(
        &name,
        &format!("{what}, a degree {d} map of the circle"),
        2,
        0,
        catalog::complex_power(k, conj).to_string(),
        json!({ "checks": [
            { "check": "degree", "mesh": sphere(2, 1.0), "expected": d },
            { "check": "poincare-hopf", "boundary": [sphere(2, 1.0)], "bounds": cube(2, 1.5) },
        ]}),
    )
}

/// Every built-in scenario, in listing order.
pub fn all() -> Vec<Scenario> {
    let mut out = Vec::new();
    for kind in ["attractor", "repeller", "saddle"] {
        // a saddle needs a stable and an unstable direction
        let lowest = if kind == "saddle" { 2 } else { 1 };
        for n in lowest..=4 {
            out.push(linear(kind, n));
        }
    }
    for conj in [false, true] {
        for k in 1..=4 {
            out.push(power(k, conj));
        }
    }
    out.push(scenario(
        "cubic-two-attractors",
        "two attractors and a saddle between them",
        2,
        0,
        catalog::cubic_two_attractors().to_string(),
        json!({ "checks": [
            { "check": "poincare-hopf", "boundary": [sphere(2, 3.0)], "bounds": cube(2, 3.5), "grid": 12 },
            { "check": "closed-loop-index", "point": [1.0, 0.0], "radius": 0.3, "unstable_dim": 0 },
            { "check": "closed-loop-index", "point": [-1.0, 0.0], "radius": 0.3, "unstable_dim": 0 },
            { "check": "closed-loop-index", "point": [0.0, 0.0], "radius": 0.3, "unstable_dim": 1 },
        ]}),
    ));
    out.push(scenario(
        "flat-torus",
        "periodic field with four equilibria on the flat torus",
        2,
        0,
        catalog::flat_torus_field().to_string(),
        json!({ "checks": [
            { "check": "poincare-hopf-torus", "bounds": { "lo": [-PI / 2.0, -PI / 2.0], "hi": [1.5 * PI, 1.5 * PI] }, "grid": 12 },
        ]}),
    ));
    out.push(scenario(
        "van-der-pol",
        "van der Pol oscillator (mu = 1)",
        2,
        0,
        catalog::van_der_pol(1.0).to_string(),
        json!({ "checks": [
            { "check": "poincare-hopf", "boundary": [sphere(2, 4.0), sphere(2, 0.5)], "bounds": cube(2, 5.0), "grid": 12 },
            { "check": "hemisphere", "start": [0.5, 0.0] },
            { "check": "cycle-tube", "start": [0.5, 0.0], "radius": 0.2, "expected": 0 },
            { "check": "closed-loop-index", "point": [0.0, 0.0], "radius": 0.3, "unstable_dim": 2 },
        ]}),
    ));
    out.push(scenario(
        "circle-normal-form",
        "Hopf normal form with an attracting unit circle",
        2,
        0,
        catalog::circle_normal_form().to_string(),
        json!({ "checks": [
            { "check": "hemisphere", "start": [0.5, 0.0] },
            { "check": "poincare-hopf", "boundary": [sphere(2, 2.0)], "bounds": cube(2, 2.5) },
            { "check": "closed-loop-index", "point": [0.0, 0.0], "radius": 0.3, "unstable_dim": 2 },
        ]}),
    ));
    out.push(scenario(
        "attracting-circle-3d",
        "attracting circle in R^3 with a torus-shaped Lyapunov level",
        3,
        0,
        catalog::circle_normal_form().extended("-x3").expect("catalog field").to_string(),
        json!({
            "lyapunov": catalog::torus_lyapunov().expr().to_string(),
            "checks": [
                { "check": "preimage-count", "level": 0.0625, "bounds": { "lo": [-1.5, -1.5, -0.5], "hi": [1.5, 1.5, 0.5] }, "resolution": 40 },
                { "check": "isotopy", "level": 0.0625, "bounds": { "lo": [-1.5, -1.5, -0.5], "hi": [1.5, 1.5, 0.5] }, "resolution": 24 },
                { "check": "hemisphere", "start": [0.5, 0.0, 0.3] },
            ],
        }),
    ));
    out.push(scenario(
        "rotating-attractor",
        "spiral sink with the Lyapunov function |x|^2/2",
        2,
        0,
        catalog::rotating_attractor().to_string(),
        json!({
            "lyapunov": catalog::half_square_norm(2).expr().to_string(),
            "checks": [
                { "check": "isotopy", "level": 0.5, "bounds": cube(2, 2.0), "resolution": 32 },
                { "check": "closed-loop-index", "point": [0.0, 0.0], "radius": 0.5, "unstable_dim": 0 },
            ],
        }),
    ));
    out.push(scenario(
        "harmonic-oscillator",
        "pure rotation: |x|^2/2 is not a strict Lyapunov function and no cycle attracts",
        2,
        0,
        catalog::rotation().to_string(),
        json!({
            "lyapunov": catalog::half_square_norm(2).expr().to_string(),
            "checks": [
                { "check": "isotopy", "level": 0.5, "bounds": cube(2, 2.0), "resolution": 32 },
                { "check": "hemisphere", "start": [1.0, 0.0] },
            ],
        }),
    ));
    out.push(scenario(
        "brockett-integrator",
        "nonholonomic integrator: not stabilizable by continuous feedback",
        3,
        2,
        catalog::brockett_integrator().to_string(),
        json!({
            "feedback": "-x1, -x2",
            "checks": [
                { "check": "brockett" },
                { "check": "closed-loop-index", "point": [0.0, 0.0, 0.0], "radius": 0.3, "unstable_dim": 0 },
            ],
        }),
    ));
    out.push(scenario(
        "fully-actuated",
        "x' = u in R^3 with the feedback u = -x",
        3,
        3,
        catalog::full_actuation(3).to_string(),
        json!({
            "feedback": "-x1, -x2, -x3",
            "checks": [
                { "check": "brockett" },
                { "check": "closed-loop-index", "point": [0.0, 0.0, 0.0], "radius": 0.5, "unstable_dim": 0 },
            ],
        }),
    ));
    out.push(scenario(
        "klein-bottle",
        "constant field on an immersed Klein bottle: mod-2 class",
        3,
        0,
        "1, 0.2, 0.1".to_string(),
        json!({ "checks": [
            { "check": "homology", "mesh": { "kind": "builtin", "name": "klein-bottle" }, "expected_betti": [1, 1, 0] },
            { "check": "degree", "mesh": { "kind": "builtin", "name": "klein-bottle" }, "expected": 0 },
        ]}),
    ));
    out
}

pub fn find(name: &str) -> Option<Scenario> {
    all().into_iter().find(|s| s.name == name)
}
