//! WebAssembly entry points for the browser demo in `www/`.
//!
//! Every function takes plain numbers and field text and returns a JSON
//! string; the page draws from that.

use serde_json::{json, Value};
use topodyn::conditions::{hemisphere_test, locate_limit_cycle, CycleConfig};
use topodyn::degree::{degree, find_equilibria, gauss_map, DegreeConfig};
use topodyn::expr::FieldSpec;
use topodyn::mesh::{build_sphere_mesh, AxisBox};
use wasm_bindgen::prelude::*;

const CURVE_SAMPLES: usize = 256;

fn planar(field: &str) -> Result<FieldSpec, String> {
    FieldSpec::parse(field, 2, 0).map_err(|e| e.to_string())
}

/// Degree of the Gauss map on a circle, with the sampled image curve.
pub fn winding(field: &str, cx: f64, cy: f64, radius: f64) -> Result<Value, String> {
    let f = planar(field)?;
    if !(radius > 0.0) {
        return Err(format!("radius must be positive, got {radius}"));
    }
    let mesh = build_sphere_mesh(2, &[cx, cy], radius, 5).map_err(|e| e.to_string())?;
    let d = degree(&f, &mesh, &DegreeConfig::default()).map_err(|e| e.to_string())?;
    let image: Vec<Vec<f64>> = (0..CURVE_SAMPLES)
        .filter_map(|k| {
            let t = std::f64::consts::TAU * k as f64 / CURVE_SAMPLES as f64;
            gauss_map(&f, &[cx + radius * t.cos(), cy + radius * t.sin()]).ok()
        })
        .collect();
    Ok(json!({ "degree": d.degree, "raw": d.raw, "depth": d.depth, "image": image }))
}

/// Equilibria in the square `[lo, hi]^2` with their indices.
pub fn equilibria(field: &str, lo: f64, hi: f64, grid: usize) -> Result<Value, String> {
    let f = planar(field)?;
    let bounds = AxisBox::new(vec![lo, lo], vec![hi, hi]);
    let found = find_equilibria(&f, &bounds, grid.clamp(2, 40), 1e-10).map_err(|e| e.to_string())?;
    let sum: Option<i64> = found.iter().map(|e| e.index).sum();
    Ok(json!({ "equilibria": found, "index_sum": sum }))
}

/// Limit cycle through the orbit of `(x0, y0)` and the hemisphere test on it.
pub fn limit_cycle(field: &str, x0: f64, y0: f64, normals: usize) -> Result<Value, String> {
    let f = planar(field)?;
    let cycle = locate_limit_cycle(&f, &[x0, y0], &CycleConfig::default()).map_err(|e| e.to_string())?;
    let report = hemisphere_test(&f, &cycle, normals.clamp(4, 720)).map_err(|e| e.to_string())?;
    Ok(json!({ "cycle": cycle, "hemisphere": report }))
}

fn to_js(r: Result<Value, String>) -> Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = winding)]
pub fn winding_js(field: &str, cx: f64, cy: f64, radius: f64) -> Result<String, JsError> {
    to_js(winding(field, cx, cy, radius))
}

#[wasm_bindgen(js_name = equilibria)]
pub fn equilibria_js(field: &str, lo: f64, hi: f64, grid: usize) -> Result<String, JsError> {
    to_js(equilibria(field, lo, hi, grid))
}

#[wasm_bindgen(js_name = limitCycle)]
pub fn limit_cycle_js(field: &str, x0: f64, y0: f64, normals: usize) -> Result<String, JsError> {
    to_js(limit_cycle(field, x0, y0, normals))
}
