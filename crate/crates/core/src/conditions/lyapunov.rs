use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::{fibonacci_sphere, CheckError, ConditionReport, Evidence, Stopwatch, Verdict};
use crate::degree::{degree, degree_of, preimage_counts, DegreeConfig, DegreeError, GaussSource, VANISHING_NORM};
use crate::expr::{FieldSpec, ScalarSpec};
use crate::homology::euler_characteristic;
use crate::linalg;
use crate::mesh::SimplicialMesh;

/// Parameter values at which the isotopy is sampled.
const ISOTOPY_STEPS: usize = 32;

/// On a level set of a Lyapunov function `V` (`grad V . X < 0` at every
/// vertex) the field `X` is isotopic, through nowhere-zero fields, to its
/// normal part; so `deg G_X` must equal `deg G_{-grad V}`. The isotopy
/// `Y_t = (1 - t) X_n + t X` is sampled at every vertex.
pub fn isotopy_check(
    f: &FieldSpec,
    v: &ScalarSpec,
    mesh: &SimplicialMesh,
    config: &DegreeConfig,
) -> Result<ConditionReport, CheckError> {
    let clock = Stopwatch::start();
    let n = f.n();
    if v.n() != n || mesh.ambient_dim() != n || mesh.dim() + 1 != n {
        return Err(CheckError::Precondition(format!(
            "field in R^{n}, Lyapunov function in R^{}, mesh of dimension {} in R^{}",
            v.n(),
            mesh.dim(),
            mesh.ambient_dim()
        )));
    }
    if !mesh.is_closed() {
        return Err(CheckError::Precondition("level set mesh is not closed".into()));
    }
    let mut min_norm = f64::INFINITY;
    let mut worst_rate = f64::NEG_INFINITY;
    for x in mesh.vertices() {
        let g = v.gradient(x)?;
        let xv = f.at(x)?;
        let rate = linalg::dot(&g, &xv);
        let gg = linalg::dot(&g, &g);
        worst_rate = worst_rate.max(rate / (gg.sqrt() * linalg::norm(&xv)).max(f64::MIN_POSITIVE));
        if !(rate < 0.0) || gg <= VANISHING_NORM * VANISHING_NORM {
            return Err(CheckError::Hypothesis {
                point: x.to_vec(),
                reason: format!("Lyapunov derivative grad V . X = {rate:.3e} is not negative"),
            });
        }
        let normal = linalg::scale(&g, rate / gg);
        for k in 0..=ISOTOPY_STEPS {
            let t = k as f64 / ISOTOPY_STEPS as f64;
            let y: Vec<f64> = normal.iter().zip(&xv).map(|(a, b)| (1.0 - t) * a + t * b).collect();
            min_norm = min_norm.min(linalg::norm(&y));
        }
    }
    let dx = degree(f, mesh, config)?;
    let minus_grad = |x: &[f64]| v.gradient(x).map(|g| linalg::scale(&g, -1.0));
    let dv = degree_of(GaussSource::Map(&minus_grad), mesh, config)?;
    let nonvanishing = min_norm > 1e-9;
    let verdict = if nonvanishing && dx.degree == dv.degree { Verdict::Pass } else { Verdict::Violated };
    let mut report = ConditionReport::new(
        "lyapunov-isotopy",
        verdict,
        json!({ "degree": dv.degree, "isotopy_nonvanishing": true }),
        json!({ "degree": dx.degree, "isotopy_nonvanishing": nonvanishing, "min_isotopy_norm": min_norm }),
        json!({ "degree_residual": 0.25, "isotopy_norm": 1e-9 }),
    );
    report.evidence = vec![
        Evidence::new("degree of X (degree, raw)", vec![dx.degree as f64, dx.raw]),
        Evidence::new("degree of -grad V (degree, raw)", vec![dv.degree as f64, dv.raw]),
        Evidence::new("minimum |Y_t| over vertices and t", vec![min_norm]),
        Evidence::new("largest normalized grad V . X", vec![worst_rate]),
    ];
    report.seed = Some(config.seed);
    report.runtime_ms = clock.ms();
    Ok(report)
}

/// On a torus level set of a Lyapunov function in `R^3`, every direction
/// has at least two preimages under the Gauss map of `-grad V`. Directions
/// come from a Fibonacci spiral with a seeded offset; those within the
/// regularity margin of an image triangle edge are skipped.
pub fn preimage_count_check(
    v: &ScalarSpec,
    mesh: &SimplicialMesh,
    directions: usize,
    seed: u64,
) -> Result<ConditionReport, CheckError> {
    let clock = Stopwatch::start();
    if mesh.ambient_dim() != 3 || mesh.dim() != 2 || v.n() != 3 {
        return Err(CheckError::Dimension(mesh.ambient_dim()));
    }
    if !mesh.is_closed() {
        return Err(CheckError::Precondition("mesh is not closed".into()));
    }
    let chi = euler_characteristic(mesh);
    if chi != 0 {
        return Err(CheckError::Precondition(format!("Euler characteristic is {chi}, a torus needs 0")));
    }
    let images: Vec<Vec<f64>> = mesh
        .vertices()
        .map(|x| {
            let g = v.gradient(x)?;
            let r = linalg::norm(&g);
            if !(r > VANISHING_NORM) {
                return Err(CheckError::Degree(DegreeError::Vanishing { point: x.to_vec(), norm: r }));
            }
            Ok(linalg::scale(&g, -1.0 / r))
        })
        .collect::<Result<_, CheckError>>()?;
    let shift = ChaCha8Rng::seed_from_u64(seed).random::<f64>();
    let mut min_count = usize::MAX;
    let mut generic = 0usize;
    let mut evidence = Vec::new();
    for d in fibonacci_sphere(directions, shift) {
        let Some(c) = preimage_counts(mesh, &images, &d) else { continue };
        generic += 1;
        min_count = min_count.min(c.unsigned);
        if c.unsigned < 2 {
            let mut values = d.clone();
            values.push(c.unsigned as f64);
            evidence.push(Evidence::new("direction with fewer than two preimages (v, count)", values));
        }
    }
    if generic == 0 {
        return Err(CheckError::Precondition("no direction of the grid is a regular value".into()));
    }
    let verdict = if min_count >= 2 { Verdict::Pass } else { Verdict::Violated };
    let mut report = ConditionReport::new(
        "preimage-count",
        verdict,
        json!({ "at_least_two": true }),
        json!({ "at_least_two": min_count >= 2, "min_preimages": min_count, "generic_directions": generic, "directions": directions, "euler_characteristic": chi }),
        json!({ "min_preimages": 2 }),
    );
    report.seed = Some(seed);
    report.evidence = evidence;
    report.runtime_ms = clock.ms();
    Ok(report)
}
