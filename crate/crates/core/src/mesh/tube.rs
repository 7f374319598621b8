use std::f64::consts::PI;

use super::{MeshError, SimplicialMesh};
use crate::linalg;

/// Drop a trailing duplicate of the first sample and check that the
/// remaining list closes up: the closing gap may not exceed twice the
/// largest step between consecutive samples.
fn closed_samples(samples: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, MeshError> {
    if samples.len() < 3 {
        return Err(MeshError::Parameter(format!("need at least 3 curve samples, got {}", samples.len())));
    }
    let mut pts = samples.to_vec();
    let scale = pts.iter().map(|p| linalg::norm(p)).fold(1.0, f64::max);
    while pts.len() > 3 && linalg::dist(&pts[0], pts.last().unwrap()) <= 1e-9 * scale {
        pts.pop();
    }
    let max_step = pts.windows(2).map(|w| linalg::dist(&w[0], &w[1])).fold(0.0, f64::max);
    let gap = linalg::dist(&pts[0], pts.last().unwrap());
    if gap > 2.0 * max_step {
        return Err(MeshError::CurveNotClosed { gap });
    }
    Ok(pts)
}

/// The closed polygon through planar samples, as a 1-dimensional mesh
/// oriented counterclockwise.
pub fn closed_polyline(samples: &[Vec<f64>]) -> Result<SimplicialMesh, MeshError> {
    let pts = closed_samples(samples)?;
    let n = pts[0].len();
    if pts.iter().any(|p| p.len() != n) {
        return Err(MeshError::CoordinateShape { ambient: n });
    }
    let k = pts.len();
    let cells: Vec<usize> = (0..k).flat_map(|i| [i, (i + 1) % k]).collect();
    let coords: Vec<f64> = pts.into_iter().flatten().collect();
    let mesh = SimplicialMesh::new(n, 1, coords, cells, vec![1; k], true)?;
    if n == 2 && mesh.signed_volume() < 0.0 {
        return Ok(mesh.reversed());
    }
    Ok(mesh)
}

/// Boundary of a tube of the given radius around a closed space curve in
/// `R^3`, as an outward oriented torus with `segments` vertices around each
/// cross-section.
///
/// Cross-sections follow a rotation-minimizing frame (double reflection);
/// its holonomy around the loop is spread evenly over arc length so the
/// frame closes up. The radius must stay below the reciprocal of the
/// discrete curvature and below half the distance between any two samples
/// that are more than `pi * radius` apart along the curve.
pub fn tubular_neighborhood_mesh(samples: &[Vec<f64>], radius: f64, segments: usize) -> Result<SimplicialMesh, MeshError> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(MeshError::Parameter(format!("radius must be positive, got {radius}")));
    }
    if segments < 3 {
        return Err(MeshError::Parameter("need at least 3 segments per cross-section".into()));
    }
    if samples.iter().any(|p| p.len() != 3) {
        return Err(MeshError::Dimension(samples.first().map_or(0, |p| p.len())));
    }
    let pts = closed_samples(samples)?;
    let k = pts.len();
    let next = |i: usize| (i + 1) % k;
    let seg: Vec<Vec<f64>> = (0..k).map(|i| linalg::sub(&pts[next(i)], &pts[i])).collect();
    let seg_len: Vec<f64> = seg.iter().map(|s| linalg::norm(s)).collect();
    if seg_len.iter().any(|&l| l <= 0.0) {
        return Err(MeshError::Parameter("consecutive curve samples coincide".into()));
    }

    // discrete curvature at each sample: turning angle over mean step
    let mut kappa_max = 0.0f64;
    for i in 0..k {
        let prev = (i + k - 1) % k;
        let a = linalg::scale(&seg[prev], 1.0 / seg_len[prev]);
        let b = linalg::scale(&seg[i], 1.0 / seg_len[i]);
        let kappa = linalg::angle_between(&a, &b) / (0.5 * (seg_len[prev] + seg_len[i]));
        kappa_max = kappa_max.max(kappa);
    }
    if radius * kappa_max >= 1.0 {
        return Err(MeshError::TubeRadius { radius, reason: format!("curvature reaches {kappa_max:.4}") });
    }

    let mut arc = vec![0.0; k + 1];
    for i in 0..k {
        arc[i + 1] = arc[i] + seg_len[i];
    }
    let total = arc[k];
    let mut min_gap = f64::INFINITY;
    for i in 0..k {
        for j in i + 1..k {
            let along = (arc[j] - arc[i]).min(total - (arc[j] - arc[i]));
            if along > PI * radius {
                min_gap = min_gap.min(linalg::dist(&pts[i], &pts[j]));
            }
        }
    }
    if radius >= 0.5 * min_gap {
        return Err(MeshError::TubeRadius { radius, reason: format!("curve comes within {min_gap:.4} of itself") });
    }

    let tangents: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            let prev = (i + k - 1) % k;
            let t = linalg::add_scaled(&linalg::scale(&seg[i], 1.0 / seg_len[i]), 1.0 / seg_len[prev], &seg[prev]);
            linalg::scale(&t, 1.0 / linalg::norm(&t))
        })
        .collect();
    let mut frames = Vec::with_capacity(k + 1);
    frames.push(initial_normal(&tangents[0]));
    for i in 0..k {
        let v1 = &seg[i];
        let c1 = linalg::dot(v1, v1);
        let r = &frames[i];
        let r_l = linalg::add_scaled(r, -2.0 / c1 * linalg::dot(v1, r), v1);
        let t_l = linalg::add_scaled(&tangents[i], -2.0 / c1 * linalg::dot(v1, &tangents[i]), v1);
        let t_next = &tangents[next(i)];
        let v2 = linalg::sub(t_next, &t_l);
        let c2 = linalg::dot(&v2, &v2);
        let mut r_next = if c2 > 1e-30 { linalg::add_scaled(&r_l, -2.0 / c2 * linalg::dot(&v2, &r_l), &v2) } else { r_l };
        // re-orthonormalize against round-off
        r_next = linalg::add_scaled(&r_next, -linalg::dot(&r_next, t_next), t_next);
        let len = linalg::norm(&r_next);
        frames.push(linalg::scale(&r_next, 1.0 / len));
    }
    let t0 = &tangents[0];
    let closing = linalg::cross3(&frames[0], &frames[k]);
    let holonomy = linalg::dot(&closing, t0).atan2(linalg::dot(&frames[0], &frames[k]));

    let mut coords = Vec::with_capacity(k * segments * 3);
    for i in 0..k {
        let t = &tangents[i];
        let theta = -holonomy * arc[i] / total;
        let r0 = &frames[i];
        let s0 = linalg::cross3(t, r0);
        let r = linalg::add_scaled(&linalg::scale(r0, theta.cos()), theta.sin(), &s0);
        let s = linalg::cross3(t, &r);
        for j in 0..segments {
            let phi = 2.0 * PI * j as f64 / segments as f64;
            for c in 0..3 {
                coords.push(pts[i][c] + radius * (phi.cos() * r[c] + phi.sin() * s[c]));
            }
        }
    }
    let id = |i: usize, j: usize| (i % k) * segments + (j % segments);
    let mut cells = Vec::with_capacity(k * segments * 6);
    for i in 0..k {
        for j in 0..segments {
            cells.extend([id(i, j), id(i, j + 1), id(i + 1, j + 1)]);
            cells.extend([id(i, j), id(i + 1, j + 1), id(i + 1, j)]);
        }
    }
    SimplicialMesh::new(3, 2, coords, cells, vec![1; 2 * k * segments], true)
}

fn initial_normal(t: &[f64]) -> Vec<f64> {
    let axis = (0..3).min_by(|&a, &b| t[a].abs().total_cmp(&t[b].abs())).unwrap();
    let mut e = vec![0.0; 3];
    e[axis] = 1.0;
    let r = linalg::add_scaled(&e, -linalg::dot(&e, t), t);
    linalg::scale(&r, 1.0 / linalg::norm(&r))
}
