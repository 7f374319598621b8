use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{fibonacci_sphere, CheckError, ConditionReport, Evidence, GaussCurve, PlotData, PlotMark, Stopwatch, Verdict};
use crate::degree::gauss_map;
use crate::expr::FieldSpec;
use crate::linalg;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CycleConfig {
    /// RK4 step.
    pub dt: f64,
    /// Integration time discarded before the section is placed.
    pub transient: f64,
    /// Give up when a return takes longer than this.
    pub max_return_time: f64,
    pub max_returns: usize,
    /// Successive returns closer than this end the iteration.
    pub tol: f64,
    /// Largest accepted spectral radius of the return map.
    pub contraction_limit: f64,
    /// Upper bound on the distance between consecutive samples.
    pub sample_spacing: f64,
}

impl Default for CycleConfig {
    fn default() -> Self {
        CycleConfig {
            dt: 0.01,
            transient: 50.0,
            max_return_time: 200.0,
            max_returns: 200,
            tol: 1e-6,
            contraction_limit: 0.99,
            sample_spacing: 0.1,
        }
    }
}

/// A sampled closed orbit (or any closed curve). The last point connects
/// back to the first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedCurve {
    pub points: Vec<Vec<f64>>,
    pub period: Option<f64>,
    /// Distance between the flow's endpoint after one period and the start.
    pub closure_residual: f64,
    /// Spectral radius of the linearized return map.
    pub multiplier: Option<f64>,
}

impl ClosedCurve {
    pub fn from_points(points: Vec<Vec<f64>>) -> Self {
        ClosedCurve { points, period: None, closure_residual: 0.0, multiplier: None }
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    /// The curve with extra zero coordinates appended.
    pub fn embedded(&self, ambient: usize) -> ClosedCurve {
        let mut c = self.clone();
        for p in &mut c.points {
            p.resize(ambient, 0.0);
        }
        c
    }
}

fn rk4(f: &FieldSpec, x: &[f64], h: f64) -> Result<Vec<f64>, CheckError> {
    let k1 = f.at(x)?;
    let k2 = f.at(&linalg::add_scaled(x, 0.5 * h, &k1))?;
    let k3 = f.at(&linalg::add_scaled(x, 0.5 * h, &k2))?;
    let k4 = f.at(&linalg::add_scaled(x, h, &k3))?;
    Ok((0..x.len()).map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect())
}

fn flow(f: &FieldSpec, x: &[f64], time: f64, dt: f64) -> Result<Vec<f64>, CheckError> {
    let steps = (time / dt).ceil().max(1.0) as usize;
    let h = time / steps as f64;
    let mut y = x.to_vec();
    for k in 0..steps {
        y = rk4(f, &y, h)?;
        if !y.iter().all(|v| v.is_finite()) {
            return Err(CheckError::Diverged { time: (k + 1) as f64 * h });
        }
    }
    Ok(y)
}

struct Section {
    origin: Vec<f64>,
    normal: Vec<f64>,
}

impl Section {
    fn height(&self, x: &[f64]) -> f64 {
        linalg::dot(&self.normal, &linalg::sub(x, &self.origin))
    }

    /// First upward crossing of the section by the orbit of `x`, with the
    /// elapsed time.
    fn next_return(&self, f: &FieldSpec, x: &[f64], cfg: &CycleConfig) -> Result<(Vec<f64>, f64), CheckError> {
        let mut t = 0.0;
        let mut y = x.to_vec();
        // the start lies on the section, possibly a rounding error below it
        let mut h = self.height(&y).max(0.0);
        while t < cfg.max_return_time {
            let next = rk4(f, &y, cfg.dt)?;
            if !next.iter().all(|v| v.is_finite()) {
                return Err(CheckError::Diverged { time: t + cfg.dt });
            }
            let hn = self.height(&next);
            if h < 0.0 && hn >= 0.0 {
                let tau = self.crossing_time(f, &y, h, hn, cfg.dt)?;
                return Ok((rk4(f, &y, tau)?, t + tau));
            }
            y = next;
            h = hn;
            t += cfg.dt;
        }
        Err(CheckError::NoReturn { time: cfg.max_return_time })
    }

    /// Root of `tau -> height(rk4(y, tau))` in `[0, dt]` (Illinois method).
    fn crossing_time(&self, f: &FieldSpec, y: &[f64], h0: f64, h1: f64, dt: f64) -> Result<f64, CheckError> {
        let (mut a, mut fa, mut b, mut fb) = (0.0, h0, dt, h1);
        let mut side = 0i8;
        for _ in 0..100 {
            let c = (a * fb - b * fa) / (fb - fa);
            let fc = self.height(&rk4(f, y, c)?);
            if fc.abs() < 1e-15 || (b - a).abs() < 1e-15 {
                return Ok(c);
            }
            if fc * fb > 0.0 {
                b = c;
                fb = fc;
                if side == -1 {
                    fa *= 0.5;
                }
                side = -1;
            } else {
                a = c;
                fa = fc;
                if side == 1 {
                    fb *= 0.5;
                }
                side = 1;
            }
        }
        Ok((a * fb - b * fa) / (fb - fa))
    }
}

/// Orthonormal basis of the hyperplane orthogonal to the unit vector `nu`.
fn complement_basis(nu: &[f64]) -> Vec<Vec<f64>> {
    let n = nu.len();
    let mut basis: Vec<Vec<f64>> = vec![nu.to_vec()];
    for i in 0..n {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        for b in &basis {
            let c = linalg::dot(&v, b);
            v = linalg::add_scaled(&v, -c, b);
        }
        let r = linalg::norm(&v);
        if r > 1e-6 {
            basis.push(linalg::scale(&v, 1.0 / r));
        }
        if basis.len() == n {
            break;
        }
    }
    basis.remove(0);
    basis
}

/// Locate an attracting closed orbit of the autonomous field `f` (n = 2 or
/// 3) by integrating from `seed` past a transient and iterating the first
/// return map of the hyperplane through the current point orthogonal to
/// the flow. Succeeds when successive returns agree within `tol` and the
/// finite-difference return map has spectral radius below the contraction
/// limit.
pub fn locate_limit_cycle(f: &FieldSpec, seed: &[f64], cfg: &CycleConfig) -> Result<ClosedCurve, CheckError> {
    let n = f.n();
    if !(n == 2 || n == 3) {
        return Err(CheckError::Dimension(n));
    }
    if seed.len() != n {
        return Err(CheckError::Precondition(format!("seed has {} coordinates, field has {n}", seed.len())));
    }
    let p0 = flow(f, seed, cfg.transient, cfg.dt)?;
    let v0 = f.at(&p0)?;
    let speed = linalg::norm(&v0);
    if speed < 1e-8 {
        return Err(CheckError::Precondition(format!("trajectory settles at an equilibrium near {p0:?}")));
    }
    let section = Section { normal: linalg::scale(&v0, 1.0 / speed), origin: p0.clone() };

    let mut p = p0;
    let mut period = 0.0;
    let mut settled = false;
    for _ in 0..cfg.max_returns {
        let (q, t) = section.next_return(f, &p, cfg)?;
        let step = linalg::dist(&q, &p);
        p = q;
        period = t;
        if step < cfg.tol {
            settled = true;
            break;
        }
    }

    // linearized return map on the section, by central differences
    let basis = complement_basis(&section.normal);
    let scale = p.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let delta = 1e-5 * scale;
    let k = basis.len();
    let mut jac = DMatrix::zeros(k, k);
    for (j, b) in basis.iter().enumerate() {
        let (plus, _) = section.next_return(f, &linalg::add_scaled(&p, delta, b), cfg)?;
        let (minus, _) = section.next_return(f, &linalg::add_scaled(&p, -delta, b), cfg)?;
        let diff = linalg::sub(&plus, &minus);
        for (i, bi) in basis.iter().enumerate() {
            jac[(i, j)] = linalg::dot(&diff, bi) / (2.0 * delta);
        }
    }
    let radius = jac.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
    if !(radius < cfg.contraction_limit) {
        return Err(CheckError::NonContracting { spectral_radius: radius });
    }
    if !settled {
        return Err(CheckError::NoReturn { time: cfg.max_return_time });
    }

    // samples equally spaced in time, close enough in space
    let mut vmax = 0.0f64;
    let mut y = p.clone();
    let coarse = (period / cfg.dt).ceil() as usize;
    for _ in 0..coarse {
        vmax = vmax.max(linalg::norm(&f.at(&y)?));
        y = rk4(f, &y, period / coarse as f64)?;
    }
    let count = ((period * vmax / (0.5 * cfg.sample_spacing)).ceil() as usize).max(64);
    let h = period / count as f64;
    let sub = (h / cfg.dt).ceil().max(1.0) as usize;
    let mut points = Vec::with_capacity(count);
    let mut y = p.clone();
    for _ in 0..count {
        points.push(y.clone());
        for _ in 0..sub {
            y = rk4(f, &y, h / sub as f64)?;
        }
    }
    let closure = linalg::dist(&y, &p);
    Ok(ClosedCurve { points, period: Some(period), closure_residual: closure, multiplier: Some(radius) })
}

/// Normals of the test hyperplanes: half-turn angles for `n = 2`, a
/// Fibonacci spiral for `n = 3`.
fn hyperplane_normals(n: usize, count: usize) -> Result<Vec<Vec<f64>>, CheckError> {
    match n {
        2 => Ok((0..count)
            .map(|k| {
                let t = std::f64::consts::PI * (k as f64 + 0.5) / count as f64;
                vec![t.cos(), t.sin()]
            })
            .collect()),
        3 => Ok(fibonacci_sphere(count, 0.5)),
        _ => Err(CheckError::Dimension(n)),
    }
}

/// Below this `|a . G|` a sample counts as lying on the hyperplane.
const GENERIC_MARGIN: f64 = 1e-6;

/// Gauss image of a closed orbit: it must meet every hyperplane through the
/// origin (it is in no open hemisphere), and cross a generic one an even
/// number of times.
pub fn hemisphere_test(f: &FieldSpec, cycle: &ClosedCurve, normals: usize) -> Result<ConditionReport, CheckError> {
    let clock = Stopwatch::start();
    let n = f.n();
    if cycle.dim() != n {
        return Err(CheckError::Precondition(format!("curve lives in R^{}, field in R^{n}", cycle.dim())));
    }
    if cycle.points.len() < 3 {
        return Err(CheckError::Precondition("curve needs at least three samples".into()));
    }
    let images: Vec<Vec<f64>> = cycle.points.iter().map(|p| gauss_map(f, p)).collect::<Result<_, _>>()?;
    let normals = hyperplane_normals(n, normals)?;
    let len = images.len();

    let mut marks = Vec::new();
    let mut evidence = Vec::new();
    let (mut min_cross, mut max_cross) = (usize::MAX, 0usize);
    let (mut generic, mut missed, mut odd) = (0usize, 0usize, 0usize);
    for (k, a) in normals.iter().enumerate() {
        let s: Vec<f64> = images.iter().map(|g| linalg::dot(a, g)).collect();
        let touches = s.iter().any(|v| v.abs() <= GENERIC_MARGIN);
        let is_generic = !touches;
        // cyclic sign changes among the nonzero values
        let nonzero: Vec<usize> = (0..len).filter(|&i| s[i] != 0.0).collect();
        let mut crossings = 0usize;
        for (idx, &i) in nonzero.iter().enumerate() {
            let j = nonzero[(idx + 1) % nonzero.len()];
            if (s[i] > 0.0) != (s[j] > 0.0) {
                crossings += 1;
                let t = s[i] / (s[i] - s[j]);
                let q = linalg::add_scaled(&images[i], t, &linalg::sub(&images[j], &images[i]));
                let r = linalg::norm(&q);
                if r > 0.0 {
                    marks.push(PlotMark { label: format!("normal {k}"), point: linalg::scale(&q, 1.0 / r) });
                }
            }
        }
        min_cross = min_cross.min(crossings);
        max_cross = max_cross.max(crossings);
        let meets = crossings > 0 || touches;
        if !meets {
            missed += 1;
            let mut v = a.clone();
            v.push(0.0);
            evidence.push(Evidence::new("hyperplane missed (normal, crossings)", v));
        }
        if is_generic {
            generic += 1;
            if crossings % 2 == 1 {
                odd += 1;
                let mut v = a.clone();
                v.push(crossings as f64);
                evidence.push(Evidence::new("odd generic crossing (normal, crossings)", v));
            }
        }
    }
    let verdict = if missed == 0 && odd == 0 { Verdict::Pass } else { Verdict::Violated };
    let mut report = ConditionReport::new(
        "hemisphere",
        verdict,
        json!({ "missed_hyperplanes": 0, "odd_generic": 0 }),
        json!({
            "missed_hyperplanes": missed,
            "odd_generic": odd,
            "generic_normals": generic,
            "normals": normals.len(),
            "min_crossings": min_cross,
            "max_crossings": max_cross,
        }),
        json!({ "generic_margin": GENERIC_MARGIN }),
    );
    if let (Some(t), Some(m)) = (cycle.period, cycle.multiplier) {
        evidence.insert(0, Evidence::new("cycle (period, multiplier, closure residual)", vec![t, m, cycle.closure_residual]));
    }
    report.evidence = evidence;
    report.plot = Some(PlotData {
        dimension: n,
        curves: vec![GaussCurve { label: "Gauss image".into(), closed: true, points: images }],
        marks,
    });
    report.runtime_ms = clock.ms();
    Ok(report)
}
