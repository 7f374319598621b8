//! Small reference triangulations of closed surfaces.

use std::f64::consts::PI;

use super::SimplicialMesh;

fn grid_triangles(k: usize, id: impl Fn(usize, usize) -> usize) -> Vec<usize> {
    let mut cells = Vec::with_capacity(6 * k * k);
    for a in 0..k {
        for b in 0..k {
            cells.extend([id(a, b), id(a + 1, b), id(a + 1, b + 1)]);
            cells.extend([id(a, b), id(a + 1, b + 1), id(a, b + 1)]);
        }
    }
    cells
}

/// A `k x k` grid triangulation of the torus (`2 k^2` triangles), placed on
/// the standard torus of revolution with radii 2 and 1. Needs `k >= 3`.
pub fn flat_torus(k: usize) -> SimplicialMesh {
    assert!(k >= 3, "torus grid needs k >= 3");
    let mut coords = Vec::with_capacity(3 * k * k);
    for a in 0..k {
        for b in 0..k {
            let (u, v) = (2.0 * PI * a as f64 / k as f64, 2.0 * PI * b as f64 / k as f64);
            let rho = 2.0 + v.cos();
            coords.extend([rho * u.cos(), rho * u.sin(), v.sin()]);
        }
    }
    let cells = grid_triangles(k, |a, b| (a % k) * k + b % k);
    let count = cells.len() / 3;
    SimplicialMesh::from_parts(3, 2, coords, cells, vec![1; count], true)
}

/// A 6 x 6 grid triangulation of the Klein bottle, with vertices on the
/// figure-eight immersion. Signs are arbitrary (it has no orientation).
pub fn klein_bottle() -> SimplicialMesh {
    let k = 6;
    let mut coords = Vec::with_capacity(3 * k * k);
    for a in 0..k {
        for b in 0..k {
            let (u, v) = (2.0 * PI * a as f64 / k as f64, 2.0 * PI * b as f64 / k as f64);
            let w = 2.0 + (u / 2.0).cos() * v.sin() - (u / 2.0).sin() * (2.0 * v).sin();
            coords.extend([w * u.cos(), w * u.sin(), (u / 2.0).sin() * v.sin() + (u / 2.0).cos() * (2.0 * v).sin()]);
        }
    }
    // going once around in `a` reflects `b`
    let cells = grid_triangles(k, |a, b| {
        if a >= k {
            (a - k) * k + (k - b % k) % k
        } else {
            a * k + b % k
        }
    });
    let count = cells.len() / 3;
    SimplicialMesh::from_parts(3, 2, coords, cells, vec![1; count], false)
}

/// The minimal 6-vertex triangulation of the real projective plane (the
/// icosahedron modulo the antipodal map).
pub fn projective_plane() -> SimplicialMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let coords = vec![
        0.0, 1.0, t, //
        0.0, -1.0, t, //
        t, 0.0, 1.0, //
        1.0, t, 0.0, //
        -1.0, t, 0.0, //
        -t, 0.0, 1.0,
    ];
    let cells = vec![0, 1, 2, 0, 2, 3, 0, 3, 4, 0, 4, 5, 0, 5, 1, 1, 2, 4, 2, 3, 5, 3, 4, 1, 4, 5, 2, 5, 1, 3];
    SimplicialMesh::from_parts(3, 2, coords, cells, vec![1; 10], false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn euler(m: &SimplicialMesh) -> i64 {
        let mut edges = std::collections::HashSet::new();
        for c in m.simplices() {
            for (a, b) in [(0, 1), (1, 2), (0, 2)] {
                edges.insert((c[a].min(c[b]), c[a].max(c[b])));
            }
        }
        m.vertex_count() as i64 - edges.len() as i64 + m.simplex_count() as i64
    }

    #[test]
    fn closed_with_expected_euler_characteristic() {
        for (m, chi) in [(flat_torus(5), 0), (klein_bottle(), 0), (projective_plane(), 1)] {
            assert!(m.is_closed());
            m.check_manifold().unwrap();
            assert_eq!(euler(&m), chi);
        }
    }

    #[test]
    fn torus_orientation_is_coherent() {
        let m = flat_torus(4);
        let rep = crate::mesh::orient_mesh(&m).unwrap();
        assert_eq!(rep.signs.unwrap(), m.signs());
    }
}
