use serde_json::{json, Value};

use super::{CheckError, ConditionReport, Evidence, GaussCurve, PlotData, Stopwatch, Verdict};
use crate::degree::{degree_of, mod2_degree, DegreeConfig, GaussSource};
use crate::homology::{euler_characteristic, mesh_homology};
use crate::mesh::{orient_mesh, SimplicialMesh};

/// Gauss images along each closed curve of an oriented 1-dimensional mesh,
/// in traversal order.
fn curve_images(mesh: &SimplicialMesh, source: &GaussSource<'_>) -> Result<Vec<GaussCurve>, CheckError> {
    let count = mesh.vertex_count();
    let mut next = vec![usize::MAX; count];
    for (s, e) in mesh.simplices().enumerate() {
        let (a, b) = if mesh.sign(s) > 0 { (e[0], e[1]) } else { (e[1], e[0]) };
        next[a] = b;
    }
    let mut seen = vec![false; count];
    let mut curves = Vec::new();
    for start in 0..count {
        if seen[start] || next[start] == usize::MAX {
            continue;
        }
        let mut points = Vec::new();
        let mut v = start;
        while !seen[v] && v != usize::MAX {
            seen[v] = true;
            points.push(source.image(mesh.vertex(v), v, 2)?);
            v = next[v];
        }
        curves.push(GaussCurve { label: format!("Gauss image {}", curves.len() + 1), closed: true, points });
    }
    Ok(curves)
}

/// Homotopy class of the Gauss map on a closed `(n-1)`-manifold mesh: the
/// degree when the mesh is orientable (an input orientation is kept if it
/// is already coherent; otherwise hypersurfaces are oriented outward), and
/// the mod-2 degree when it is not.
///
/// With `expected` given, the check passes iff the class matches it;
/// without, any successful classification passes.
pub fn classify_homotopy_class(
    mesh: &SimplicialMesh,
    source: GaussSource<'_>,
    expected: Option<i64>,
    config: &DegreeConfig,
) -> Result<ConditionReport, CheckError> {
    let clock = Stopwatch::start();
    if !mesh.is_closed() {
        return Err(CheckError::Precondition("mesh has boundary".into()));
    }
    let orientation = orient_mesh(mesh)?;
    let homology = mesh_homology(mesh)?;
    let mut evidence = Vec::new();
    let mut plot = None;
    let (class, invariant, seed) = match &orientation.signs {
        Some(signs) => {
            let coherent = mesh.is_oriented() && signs.as_slice() == mesh.signs();
            let mut oriented = mesh.with_signs(signs.clone());
            if !coherent && mesh.dim() + 1 == mesh.ambient_dim() && oriented.signed_volume() < 0.0 {
                oriented = oriented.reversed();
            }
            let d = degree_of(source, &oriented, config)?;
            if mesh.dim() == 1 && mesh.ambient_dim() == 2 {
                plot = Some(PlotData { dimension: 2, curves: curve_images(&oriented, &source)?, marks: Vec::new() });
            }
            evidence.push(Evidence::new("degree (degree, raw, depth)", vec![d.degree as f64, d.raw, d.depth as f64]));
            (d.degree, "degree", d.seed)
        }
        None => {
            let m = mod2_degree(source, mesh, config)?;
            let mut values = m.regular_value.clone();
            values.push(m.preimages as f64);
            evidence.push(Evidence::new("regular value and preimage count", values));
            if let Some(cycle) = &orientation.odd_cycle {
                evidence.push(Evidence::new("orientation-reversing simplex cycle", cycle.iter().map(|&s| s as f64).collect()));
            }
            (m.parity as i64, "mod-2 degree", Some(m.seed))
        }
    };
    let verdict = match expected {
        Some(e) if e != class => Verdict::Violated,
        _ => Verdict::Pass,
    };
    let mut report = ConditionReport::new(
        "homotopy-class",
        verdict,
        expected.map_or(Value::Null, |e| json!({ "class": e })),
        json!({ "class": class, "invariant": invariant, "orientable": orientation.orientable }),
        json!({ "degree_residual": 0.25 }),
    );
    report.seed = seed;
    report.evidence = evidence;
    report.homology = homology;
    report.plot = plot;
    report.runtime_ms = clock.ms();
    Ok(report)
}

/// Simplicial homology of a mesh, optionally compared against expected
/// Betti numbers.
pub fn homology_check(mesh: &SimplicialMesh, expected_betti: Option<&[usize]>) -> Result<ConditionReport, CheckError> {
    let clock = Stopwatch::start();
    let groups = mesh_homology(mesh)?;
    let betti: Vec<usize> = groups.iter().map(|h| h.betti).collect();
    let chi = euler_characteristic(mesh);
    let verdict = match expected_betti {
        Some(e) if e != betti.as_slice() => Verdict::Violated,
        _ => Verdict::Pass,
    };
    let torsion: Vec<Vec<String>> = groups.iter().map(|h| h.torsion.iter().map(|t| t.to_string()).collect()).collect();
    let mut report = ConditionReport::new(
        "homology",
        verdict,
        expected_betti.map_or(Value::Null, |e| json!({ "betti": e })),
        json!({
            "betti": betti,
            "torsion": torsion,
            "euler_characteristic": chi,
            "groups": groups.iter().map(|h| h.to_string()).collect::<Vec<_>>(),
        }),
        json!({ "exact": true }),
    );
    report.evidence.push(Evidence::new("top simplices", vec![mesh.simplex_count() as f64]));
    report.homology = groups;
    report.runtime_ms = clock.ms();
    Ok(report)
}
