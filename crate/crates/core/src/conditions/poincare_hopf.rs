use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{CheckError, ConditionReport, Evidence, Stopwatch, Verdict};
use crate::degree::{degree, find_equilibria, winding_number, DegreeConfig, DegreeError, Equilibrium};
use crate::expr::FieldSpec;
use crate::homology::{euler_characteristic, mesh_homology};
use crate::linalg;
use crate::mesh::{flat_torus, AxisBox, SimplicialMesh};

/// Where and how finely to look for equilibria.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSearch {
    pub bounds: AxisBox,
    /// Newton starts per axis.
    pub grid: usize,
    /// Residual below which a Newton limit is a root.
    pub tol: f64,
}

impl EquilibriumSearch {
    pub fn new(bounds: AxisBox) -> Self {
        EquilibriumSearch { bounds, grid: 12, tol: 1e-10 }
    }
}

fn equilibrium_evidence(e: &Equilibrium) -> Evidence {
    let mut values = e.location.clone();
    values.push(e.index.map_or(f64::NAN, |i| i as f64));
    Evidence::new("equilibrium (location, index)", values)
}

/// Poincare-Hopf on a region bounded by closed hypersurfaces: the summed
/// degree of the Gauss map over the boundary components (outer ones
/// oriented outward, holes inward) against the index sum of the
/// equilibria enclosed.
pub fn poincare_hopf_check(
    f: &FieldSpec,
    boundary: &[SimplicialMesh],
    search: &EquilibriumSearch,
    config: &DegreeConfig,
) -> Result<ConditionReport, CheckError> {
    let clock = Stopwatch::start();
    let n = f.n();
    if boundary.is_empty() {
        return Err(CheckError::Precondition("no boundary components".into()));
    }
    let mut comps = Vec::with_capacity(boundary.len());
    for (i, b) in boundary.iter().enumerate() {
        if b.ambient_dim() != n || b.dim() + 1 != n {
            return Err(CheckError::Precondition(format!(
                "component {i} is a {}-dimensional mesh in R^{}, need a hypersurface in R^{n}",
                b.dim(),
                b.ambient_dim()
            )));
        }
        b.check_manifold()?;
        if !b.is_closed() {
            return Err(CheckError::Precondition(format!("component {i} is not closed")));
        }
        let vol = b.signed_volume();
        comps.push(if vol < 0.0 { b.reversed() } else { b.clone() });
    }
    // a component nested inside an odd number of others bounds a hole
    let mut orientation = vec![1i64; comps.len()];
    for i in 0..comps.len() {
        let probe = comps[i].vertex(0).to_vec();
        let mut depth = 0;
        for (j, c) in comps.iter().enumerate() {
            if i != j && winding_number(c, &probe)? != 0 {
                depth += 1;
            }
        }
        if depth % 2 == 1 {
            comps[i] = comps[i].reversed();
            orientation[i] = -1;
        }
    }

    let mut evidence = Vec::new();
    let mut boundary_degree = 0i64;
    for (i, c) in comps.iter().enumerate() {
        let d = match degree(f, c, config) {
            Ok(d) => d,
            Err(DegreeError::Vanishing { point, .. }) => return Err(CheckError::EquilibriumOnBoundary { point }),
            Err(e) => return Err(e.into()),
        };
        boundary_degree += d.degree;
        evidence.push(Evidence::new(
            format!("component {i} (degree, raw, orientation)"),
            vec![d.degree as f64, d.raw, orientation[i] as f64],
        ));
    }

    let equilibria = find_equilibria(f, &search.bounds, search.grid, search.tol)?;
    let mut index_sum = 0i64;
    let mut enclosed = 0usize;
    let mut undetermined = 0usize;
    for e in &equilibria {
        let mut w = 0i64;
        for c in &comps {
            w += match winding_number(c, &e.location) {
                Ok(w) => w,
                Err(DegreeError::Vanishing { .. }) => {
                    return Err(CheckError::EquilibriumOnBoundary { point: e.location.clone() })
                }
                Err(err) => return Err(err.into()),
            };
        }
        if w == 0 {
            continue;
        }
        enclosed += 1;
        evidence.push(equilibrium_evidence(e));
        match e.index {
            Some(i) => index_sum += i * w,
            None => undetermined += 1,
        }
    }

    let verdict = if undetermined > 0 {
        Verdict::Degenerate
    } else if index_sum == boundary_degree {
        Verdict::Pass
    } else {
        Verdict::Violated
    };
    let mut report = ConditionReport::new(
        "poincare-hopf",
        verdict,
        json!({ "index_sum": boundary_degree }),
        json!({ "index_sum": index_sum, "boundary_degree": boundary_degree, "equilibria": enclosed, "undetermined": undetermined }),
        json!({ "degree_residual": 0.25, "equilibrium_residual": search.tol }),
    );
    if undetermined > 0 {
        report.message = Some(format!("{undetermined} enclosed equilibria have no determinable index"));
    }
    report.evidence = evidence;
    report.runtime_ms = clock.ms();
    Ok(report)
}

/// Poincare-Hopf on the flat 2-torus: the index sum of a periodic field
/// over the fundamental domain `bounds` against `(-1)^n chi(T^2) = 0`,
/// with the Euler characteristic computed from a triangulated torus.
pub fn poincare_hopf_torus_check(f: &FieldSpec, search: &EquilibriumSearch) -> Result<ConditionReport, CheckError> {
    let clock = Stopwatch::start();
    let n = f.n();
    if n != 2 {
        return Err(CheckError::Dimension(n));
    }
    let b = &search.bounds;
    if b.dim() != 2 {
        return Err(CheckError::Dimension(b.dim()));
    }
    let period = [b.hi[0] - b.lo[0], b.hi[1] - b.lo[1]];
    // periodicity along both edges
    let samples = 64;
    let mut worst = 0.0f64;
    for k in 0..samples {
        let t = k as f64 / samples as f64;
        for axis in 0..2 {
            let mut p = vec![b.lo[0] + t * period[0], b.lo[1] + t * period[1]];
            p[axis] = b.lo[axis];
            let mut q = p.clone();
            q[axis] += period[axis];
            let gap = linalg::dist(&f.at(&p)?, &f.at(&q)?);
            if gap > worst {
                worst = gap;
            }
            if gap >= 1e-9 {
                return Err(CheckError::Hypothesis {
                    point: p,
                    reason: format!("field is not periodic: mismatch {gap:.3e} across axis {}", axis + 1),
                });
            }
        }
    }

    let torus = flat_torus(8);
    let chi = euler_characteristic(&torus);
    let homology = mesh_homology(&torus)?;
    let expected = if n % 2 == 0 { chi } else { -chi };

    // the search box is widened slightly so roots on the edges are found,
    // then everything is reduced modulo the period
    let pad = 1e-3 * period[0].min(period[1]);
    let wide = AxisBox::new(vec![b.lo[0] - pad, b.lo[1] - pad], vec![b.hi[0] + pad, b.hi[1] + pad]);
    let found = find_equilibria(f, &wide, search.grid, search.tol)?;
    let mut kept: Vec<Equilibrium> = Vec::new();
    for mut e in found {
        for a in 0..2 {
            e.location[a] = b.lo[a] + (e.location[a] - b.lo[a]).rem_euclid(period[a]);
        }
        let dup = kept.iter().any(|k| {
            (0..2).all(|a| {
                let d = (k.location[a] - e.location[a]).abs();
                d.min(period[a] - d) < 10.0 * search.tol.max(1e-9)
            })
        });
        if !dup {
            kept.push(e);
        }
    }
    let undetermined = kept.iter().filter(|e| e.index.is_none()).count();
    let index_sum: i64 = kept.iter().filter_map(|e| e.index).sum();
    let verdict = if undetermined > 0 {
        Verdict::Degenerate
    } else if index_sum == expected {
        Verdict::Pass
    } else {
        Verdict::Violated
    };
    let mut report = ConditionReport::new(
        "poincare-hopf-torus",
        verdict,
        json!({ "index_sum": expected, "euler_characteristic": chi }),
        json!({ "index_sum": index_sum, "euler_characteristic": chi, "equilibria": kept.len(), "undetermined": undetermined }),
        json!({ "periodicity": 1e-9, "equilibrium_residual": search.tol }),
    );
    report.evidence.push(Evidence::new("periodicity mismatch", vec![worst]));
    report.evidence.extend(kept.iter().map(equilibrium_evidence));
    report.homology = homology;
    report.runtime_ms = clock.ms();
    Ok(report)
}
