use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{degree, snap, DegreeConfig, DegreeError, DegreeMethod, DegreeResult, VANISHING_NORM};
use crate::expr::FieldSpec;
use crate::linalg;
use crate::mesh::{build_sphere_mesh, AxisBox};

/// Real parts within this distance of zero make an eigenvalue central.
pub const HYPERBOLIC_MARGIN: f64 = 1e-7;
const NEWTON_ITERATIONS: usize = 40;
const SAME_ROOT: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IndexMethod {
    /// Sign of the Jacobian determinant (hyperbolic equilibria).
    Jacobian,
    /// Degree of the Gauss map on a small sphere.
    Degree,
    /// Neither applied (for example, equilibria that are not isolated).
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub location: Vec<f64>,
    /// Row-major state Jacobian.
    pub jacobian: Vec<Vec<f64>>,
    /// `|X(location)|`.
    pub residual: f64,
    pub hyperbolic: bool,
    /// Eigenvalues with negative, positive and (near) zero real part.
    pub stable: usize,
    pub unstable: usize,
    pub center: usize,
    pub index: Option<i64>,
    pub index_method: IndexMethod,
}

fn eigen_counts(j: &DMatrix<f64>) -> (usize, usize, usize, f64) {
    let mut counts = (0, 0, 0);
    let mut closest = f64::INFINITY;
    for ev in j.complex_eigenvalues().iter() {
        closest = closest.min(ev.re.abs());
        if ev.re < -HYPERBOLIC_MARGIN {
            counts.0 += 1;
        } else if ev.re > HYPERBOLIC_MARGIN {
            counts.1 += 1;
        } else {
            counts.2 += 1;
        }
    }
    (counts.0, counts.1, counts.2, closest)
}

/// Index `sign det J` of a hyperbolic equilibrium. Equals
/// `(-1)^(number of eigenvalues with negative real part)`, that is
/// `(-1)^(n - k)` with `k` the dimension of the unstable eigenspace.
pub fn hyperbolic_index(j: &DMatrix<f64>) -> Result<i64, DegreeError> {
    assert!(j.is_square(), "Jacobian must be square");
    let (stable, _, center, closest) = eigen_counts(j);
    if center > 0 {
        return Err(DegreeError::NonHyperbolic { real: closest });
    }
    let det = j.clone().lu().determinant();
    let by_eigen = if stable % 2 == 0 { 1 } else { -1 };
    // the determinant can lose its sign to round-off when tiny; the
    // eigenvalue count cannot
    if det == 0.0 || (det > 0.0) != (by_eigen > 0) {
        return Ok(by_eigen);
    }
    Ok(if det > 0.0 { 1 } else { -1 })
}

fn pinv_step(j: &DMatrix<f64>, fx: &[f64]) -> Option<Vec<f64>> {
    let svd = j.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if !(smax > 0.0) {
        return None;
    }
    let pinv = svd.pseudo_inverse(1e-12 * smax).ok()?;
    let step = pinv * DVector::from_column_slice(fx);
    Some(step.iter().map(|s| -s).collect())
}

/// Damped Newton iteration with a pseudo-inverse step, so singular
/// Jacobians still make progress. Returns the final point and residual.
fn newton(f: &FieldSpec, seed: &[f64], bounds: &AxisBox) -> Option<(Vec<f64>, f64)> {
    let n = f.n();
    let zero_u = vec![0.0; f.m()];
    let mut x = seed.to_vec();
    let mut fx = f.at(&x).ok()?;
    let mut r = linalg::norm(&fx);
    let span = bounds.lo.iter().zip(&bounds.hi).map(|(l, h)| h - l).fold(0.0, f64::max);
    for _ in 0..NEWTON_ITERATIONS {
        if r == 0.0 {
            break;
        }
        let j = f.jacobian(&x, &zero_u).ok()?;
        let step = pinv_step(&j, &fx)?;
        let step_len = linalg::norm(&step);
        if step_len <= 1e-14 * (1.0 + linalg::norm(&x)) {
            break;
        }
        let mut t = 1.0;
        let mut accepted = None;
        while t > 1e-4 {
            let trial = linalg::add_scaled(&x, t, &step);
            if let Ok(ft) = f.at(&trial) {
                let rt = linalg::norm(&ft);
                if rt < r {
                    accepted = Some((trial, ft, rt));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((nx, nf, nr)) = accepted else { break };
        x = nx;
        fx = nf;
        r = nr;
        if !bounds.contains(&x, span) {
            return None;
        }
    }
    debug_assert_eq!(x.len(), n);
    Some((x, r))
}

/// Converged Newton roots from a `grid^n` lattice of seeds, deduplicated.
pub(crate) fn newton_roots(f: &FieldSpec, bounds: &AxisBox, grid: usize, tol: f64) -> Vec<(Vec<f64>, f64)> {
    let n = f.n();
    let grid = grid.max(1);
    let total = grid.pow(n as u32);
    let diag = linalg::dist(&bounds.lo, &bounds.hi);
    let mut roots: Vec<(Vec<f64>, f64)> = Vec::new();
    for idx in 0..total {
        let mut rem = idx;
        let seed: Vec<f64> = (0..n)
            .map(|k| {
                let i = rem % grid;
                rem /= grid;
                if grid == 1 {
                    0.5 * (bounds.lo[k] + bounds.hi[k])
                } else {
                    bounds.lo[k] + (bounds.hi[k] - bounds.lo[k]) * i as f64 / (grid - 1) as f64
                }
            })
            .collect();
        let Some((x, r)) = newton(f, &seed, bounds) else { continue };
        if r >= tol || !bounds.contains(&x, 10.0 * tol) {
            continue;
        }
        let duplicate = roots.iter().any(|(y, _)| {
            let d = linalg::dist(&x, y);
            // degenerate roots converge slowly; two nearby points joined by
            // a segment on which the field stays tiny are the same root
            d < 10.0 * tol
                || (d < 1e-4 * diag
                    && f.at(&linalg::midpoint(&x, y)).is_ok_and(|m| linalg::norm(&m) < tol))
        });
        if !duplicate {
            roots.push((x, r));
        }
    }
    roots.sort_by(|a, b| {
        a.0.iter().zip(&b.0).map(|(p, q)| p.total_cmp(q)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
    });
    roots
}

/// Equilibria of `f` (controls set to zero) inside `bounds`.
///
/// Newton iteration (at most 40 steps) runs from every point of a
/// `grid^n` lattice; roots with `|X| < tol` are kept and merged within
/// `10 tol`. Hyperbolic equilibria get `sign det J` as index, the rest the
/// degree of the Gauss map on a small sphere.
pub fn find_equilibria(f: &FieldSpec, bounds: &AxisBox, grid: usize, tol: f64) -> Result<Vec<Equilibrium>, DegreeError> {
    if bounds.dim() != f.n() {
        return Err(DegreeError::Dimension(format!("box in R^{} for a field in R^{}", bounds.dim(), f.n())));
    }
    bounds.validate()?;
    let roots = newton_roots(f, bounds, grid, tol);
    let zero_u = vec![0.0; f.m()];
    let mut out = Vec::with_capacity(roots.len());
    for (k, (x, r)) in roots.iter().enumerate() {
        let j = f.jacobian(x, &zero_u)?;
        let (stable, unstable, center, _) = eigen_counts(&j);
        let hyperbolic = center == 0;
        let (index, index_method) = if hyperbolic {
            (Some(hyperbolic_index(&j)?), IndexMethod::Jacobian)
        } else {
            let nearest = roots
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != k)
                .map(|(_, (y, _))| linalg::dist(x, y))
                .fold(f64::INFINITY, f64::min);
            let radius = (0.2 * nearest).min(0.05 * bounds.min_side());
            match topological_index(f, x, radius, &DegreeConfig::default()) {
                Ok(d) => (Some(d.degree), IndexMethod::Degree),
                Err(_) => (None, IndexMethod::Undetermined),
            }
        };
        out.push(Equilibrium {
            location: x.clone(),
            jacobian: (0..j.nrows()).map(|i| j.row(i).iter().copied().collect()).collect(),
            residual: *r,
            hyperbolic,
            stable,
            unstable,
            center,
            index,
            index_method,
        });
    }
    Ok(out)
}

/// Default sphere refinement for index computations in dimension `n`.
pub(crate) fn default_sphere_refinement(n: usize) -> usize {
    match n {
        2 => 4,
        3 => 2,
        _ => 0,
    }
}

fn index_once(f: &FieldSpec, e: &[f64], radius: f64, config: &DegreeConfig) -> Result<DegreeResult, DegreeError> {
    let n = f.n();
    if n == 1 {
        let plus = f.at(&[e[0] + radius])?[0];
        let minus = f.at(&[e[0] - radius])?[0];
        for (x, v) in [(e[0] + radius, plus), (e[0] - radius, minus)] {
            if !(v.abs() > VANISHING_NORM) {
                return Err(DegreeError::Vanishing { point: vec![x], norm: v.abs() });
            }
        }
        let raw = (plus.signum() - minus.signum()) / 2.0;
        let (degree, residual) = snap(raw);
        return Ok(DegreeResult {
            degree,
            raw,
            residual,
            depth: 0,
            method: DegreeMethod::SignChange,
            regular_value: None,
            seed: None,
            simplices: 2,
            max_image_diameter: if plus.signum() == minus.signum() { 0.0 } else { std::f64::consts::PI },
        });
    }
    let sphere = build_sphere_mesh(n, e, radius, default_sphere_refinement(n))?;
    degree(f, &sphere, config)
}

/// Index of the isolated equilibrium `e`: the degree of the Gauss map on
/// the sphere of the given radius about `e` (sign change for `n = 1`),
/// recomputed at half the radius and required to agree.
///
/// Fails if Newton iteration finds another zero within `2 radius` of `e`.
/// Zeros closer than `radius / 20` count as `e` itself: near a multiple
/// root Newton stops wherever the residual drops below tolerance, and both
/// test spheres enclose such points anyway.
pub fn topological_index(f: &FieldSpec, e: &[f64], radius: f64, config: &DegreeConfig) -> Result<DegreeResult, DegreeError> {
    let n = f.n();
    if e.len() != n {
        return Err(DegreeError::Dimension(format!("point has {} coordinates, field {n}", e.len())));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(DegreeError::Dimension(format!("radius must be positive, got {radius}")));
    }
    let grid = if n <= 3 { 5 } else { 3 };
    let bounds = AxisBox::around(e, 2.0 * radius);
    for (x, _) in newton_roots(f, &bounds, grid, 1e-10) {
        let d = linalg::dist(&x, e);
        if d <= 2.0 * radius && d > SAME_ROOT * radius {
            return Err(DegreeError::SecondEquilibrium { location: x });
        }
    }
    let full = index_once(f, e, radius, config)?;
    let half = index_once(f, e, 0.5 * radius, config)?;
    if full.degree != half.degree {
        return Err(DegreeError::RadiusDependence { at_radius: full.degree, at_half: half.degree });
    }
    Ok(full)
}
