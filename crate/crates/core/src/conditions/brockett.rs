use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{fibonacci_sphere, nelder_mead, CheckError, ConditionReport, Evidence, Stopwatch, Verdict};
use crate::degree::{random_unit_vector, topological_index, DegreeConfig, DegreeError};
use crate::expr::{Feedback, FieldSpec};
use crate::linalg;

/// The neighborhoods in the reachability test: states in `B(0, state_radius)`,
/// controls in `B(0, control_radius)`, targets `epsilon * d` for unit `d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ControlNeighborhood {
    pub state_radius: f64,
    pub control_radius: f64,
    pub epsilon: f64,
    /// Number of target directions.
    pub directions: usize,
    /// Optimizer restarts per direction.
    pub starts: usize,
    /// Function evaluations per restart.
    pub budget: usize,
    /// A direction is covered when the best residual is below
    /// `threshold * epsilon`.
    pub threshold: f64,
}

impl Default for ControlNeighborhood {
    fn default() -> Self {
        ControlNeighborhood {
            state_radius: 0.2,
            control_radius: 0.5,
            epsilon: 0.1,
            directions: 32,
            starts: 16,
            budget: 3000,
            threshold: 0.05,
        }
    }
}

/// Target directions on `S^{n-1}`: equally spaced angles for `n = 2`, the
/// two poles plus a Fibonacci spiral for `n = 3`, and the signed axes plus
/// seeded random directions otherwise.
pub fn direction_grid(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    match n {
        0 => Vec::new(),
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        3 => {
            let mut out = vec![vec![0.0, 0.0, 1.0], vec![0.0, 0.0, -1.0]];
            out.extend(fibonacci_sphere(count.saturating_sub(2), 0.5));
            out
        }
        _ => {
            let mut out = Vec::with_capacity(count.max(2 * n));
            for i in 0..n {
                for s in [1.0, -1.0] {
                    let mut e = vec![0.0; n];
                    e[i] = s;
                    out.push(e);
                }
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            while out.len() < count {
                out.push(random_unit_vector(&mut rng, n));
            }
            out
        }
    }
}

fn clamp_ball(v: &[f64], radius: f64) -> Vec<f64> {
    let r = linalg::norm(v);
    if r > radius {
        linalg::scale(v, radius / r)
    } else {
        v.to_vec()
    }
}

fn random_in_ball(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> Vec<f64> {
    if dim == 0 {
        return Vec::new();
    }
    let dir = random_unit_vector(rng, dim);
    let r: f64 = rng.random::<f64>().powf(1.0 / dim as f64);
    linalg::scale(&dir, radius * r)
}

struct DirectionOutcome {
    residual: f64,
    converged: bool,
    state: Vec<f64>,
    control: Vec<f64>,
}

fn search_direction(f: &FieldSpec, nb: &ControlNeighborhood, target: &[f64], rng: &mut ChaCha8Rng) -> DirectionOutcome {
    let (n, m) = (f.n(), f.m());
    let split = |z: &[f64]| (clamp_ball(&z[..n], nb.state_radius), clamp_ball(&z[n..], nb.control_radius));
    let objective = |z: &[f64]| -> f64 {
        let (x, u) = split(z);
        match f.evaluate(&x, &u) {
            Ok(v) => v.iter().zip(target).map(|(a, b)| (a - b) * (a - b)).sum(),
            Err(_) => f64::INFINITY,
        }
    };
    let goal = nb.threshold * nb.epsilon;
    let step = 0.5 * nb.state_radius.min(if m > 0 { nb.control_radius } else { f64::INFINITY });
    let mut best = DirectionOutcome { residual: f64::INFINITY, converged: false, state: vec![0.0; n], control: vec![0.0; m] };
    for s in 0..nb.starts.max(1) {
        let start: Vec<f64> = if s == 0 {
            vec![0.0; n + m]
        } else {
            let mut z = random_in_ball(rng, n, nb.state_radius);
            z.extend(random_in_ball(rng, m, nb.control_radius));
            z
        };
        let r = nelder_mead(objective, &start, step, 1e-9, nb.budget);
        let residual = r.value.sqrt();
        best.converged |= r.converged;
        if residual < best.residual {
            let (x, u) = split(&r.x);
            best = DirectionOutcome { residual, converged: best.converged, state: x, control: u };
        }
        if best.residual < goal {
            break;
        }
    }
    best
}

/// Brockett's condition near the origin: every `epsilon * d` must be a
/// value of `f(x, u)` with `x`, `u` in the given balls. Each direction is
/// searched by Nelder-Mead on `|f(x, u) - epsilon d|^2` from several starts.
/// Directions whose best residual stays at or above the threshold after a
/// converged search certify a violation.
pub fn brockett_surjectivity_check(f: &FieldSpec, nb: &ControlNeighborhood, seed: u64) -> Result<ConditionReport, CheckError> {
    let clock = Stopwatch::start();
    let n = f.n();
    if !(nb.epsilon > 0.0 && nb.state_radius > 0.0 && nb.control_radius >= 0.0) {
        return Err(CheckError::Precondition("neighborhood radii and epsilon must be positive".into()));
    }
    let at_origin = f.evaluate(&vec![0.0; n], &vec![0.0; f.m()])?;
    let r0 = linalg::norm(&at_origin);
    if r0 > 1e-9 {
        return Err(CheckError::Hypothesis {
            point: vec![0.0; n],
            reason: format!("origin is not an equilibrium of the uncontrolled system: |f(0, 0)| = {r0:.3e}"),
        });
    }
    let goal = nb.threshold * nb.epsilon;
    let dirs = direction_grid(n, nb.directions, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut covered = 0usize;
    let mut violated: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut unresolved = 0usize;
    let mut worst = 0.0f64;
    let mut evidence = Vec::new();
    for d in &dirs {
        let target = linalg::scale(d, nb.epsilon);
        let out = search_direction(f, nb, &target, &mut rng);
        worst = worst.max(out.residual);
        if out.residual < goal {
            covered += 1;
        } else if out.converged {
            let mut values = d.clone();
            values.push(out.residual);
            values.extend(&out.state);
            values.extend(&out.control);
            evidence.push(Evidence::new("uncovered direction (d, residual, x, u)", values));
            violated.push((d.clone(), out.residual));
        } else {
            unresolved += 1;
            let mut values = d.clone();
            values.push(out.residual);
            evidence.push(Evidence::new("unresolved direction (d, residual)", values));
        }
    }
    let verdict = if !violated.is_empty() {
        Verdict::Violated
    } else if unresolved > 0 {
        Verdict::Undecided
    } else {
        Verdict::Pass
    };
    let mut report = ConditionReport::new(
        "brockett",
        verdict,
        json!({ "covered": dirs.len() }),
        json!({
            "covered": covered,
            "violated": violated.len(),
            "unresolved": unresolved,
            "worst_residual": worst,
            "certificate": violated.iter().map(|(d, _)| d.clone()).collect::<Vec<_>>(),
        }),
        json!({ "residual": goal, "epsilon": nb.epsilon, "state_radius": nb.state_radius, "control_radius": nb.control_radius }),
    );
    report.seed = Some(seed);
    report.evidence = evidence;
    report.runtime_ms = clock.ms();
    Ok(report)
}

/// Index of `e` under the closed loop `x' = f(x, k(x))` compared with
/// `(-1)^(n - k)`, where `k` is the dimension of the unstable manifold the
/// stabilized equilibrium is meant to have (`k = 0` for asymptotic
/// stability). A second zero near `e` makes the result degenerate.
pub fn closed_loop_index_check(
    f: &FieldSpec,
    feedback: &Feedback,
    e: &[f64],
    radius: f64,
    unstable_dim: usize,
    config: &DegreeConfig,
) -> Result<ConditionReport, CheckError> {
    let clock = Stopwatch::start();
    let n = f.n();
    if unstable_dim > n {
        return Err(CheckError::Precondition(format!("unstable dimension {unstable_dim} exceeds n = {n}")));
    }
    let closed = f.with_feedback(feedback)?;
    let r = linalg::norm(&closed.at(e)?);
    if r > 1e-8 {
        return Err(CheckError::Hypothesis {
            point: e.to_vec(),
            reason: format!("not an equilibrium of the closed loop: |X| = {r:.3e}"),
        });
    }
    let expected = if (n - unstable_dim) % 2 == 0 { 1 } else { -1 };
    let tolerance = json!({ "degree_residual": 0.25, "radius": radius });
    let mut report = match topological_index(&closed, e, radius, config) {
        Ok(d) => {
            let verdict = if d.degree == expected { Verdict::Pass } else { Verdict::Violated };
            let mut r = ConditionReport::new(
                "closed-loop-index",
                verdict,
                json!({ "index": expected, "unstable_dimension": unstable_dim }),
                json!({ "index": d.degree, "raw": d.raw, "method": d.method }),
                tolerance,
            );
            r.evidence.push(Evidence::new("index (degree, raw, radius)", vec![d.degree as f64, d.raw, radius]));
            r
        }
        Err(DegreeError::SecondEquilibrium { location }) => {
            let mut r = ConditionReport::new(
                "closed-loop-index",
                Verdict::Degenerate,
                json!({ "index": expected, "unstable_dimension": unstable_dim }),
                json!({ "index": null, "isolated": false }),
                tolerance,
            );
            r.message = Some("equilibrium is not isolated under this feedback".into());
            r.evidence.push(Evidence::new("second equilibrium", location));
            r
        }
        Err(e) => return Err(e.into()),
    };
    report.seed = Some(config.seed);
    report.runtime_ms = clock.ms();
    Ok(report)
}
