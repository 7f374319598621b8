use super::{MeshError, SimplicialMesh};
use crate::linalg;

/// Closed, outward-oriented triangulation of the sphere `S^{n-1}` of the
/// given radius about `center`.
///
/// * `n = 2`: regular polygon with `4 * 2^refinement` edges.
/// * `n = 3`: icosphere, `20 * 4^refinement` triangles.
/// * `n >= 4`: boundary of the cross-polytope, refined edgewise
///   `refinement` times (`2^n * 2^((n-1) * refinement)` simplices).
///
/// All vertices are projected onto the sphere after each refinement.
pub fn build_sphere_mesh(n: usize, center: &[f64], radius: f64, refinement: usize) -> Result<SimplicialMesh, MeshError> {
    if n < 2 {
        return Err(MeshError::Dimension(n));
    }
    if center.len() != n {
        return Err(MeshError::Parameter(format!("center has {} coordinates, expected {n}", center.len())));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(MeshError::Parameter(format!("radius must be positive, got {radius}")));
    }
    let mut mesh = if n == 3 { icosahedron() } else { cross_polytope(n) };
    for _ in 0..refinement {
        mesh = project_unit(&mesh.refine());
    }
    Ok(mesh.map_vertices(|v| v.iter().zip(center).map(|(x, c)| c + radius * x).collect()))
}

fn project_unit(mesh: &SimplicialMesh) -> SimplicialMesh {
    mesh.map_vertices(|v| linalg::scale(v, 1.0 / linalg::norm(v)))
}

/// Boundary of the cross-polytope with vertices `+-e_i`, outward oriented.
fn cross_polytope(n: usize) -> SimplicialMesh {
    let mut coords = Vec::with_capacity(2 * n * n);
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut v = vec![0.0; n];
            v[i] = s;
            coords.extend(v);
        }
    }
    // facet for sign pattern `mask`: vertices s_i e_i; orientation of the
    // tuple (s_0 e_0, .., s_{n-1} e_{n-1}) is det = prod s_i.
    let mut cells = Vec::with_capacity(n << n);
    let mut signs = Vec::with_capacity(1 << n);
    for mask in 0..(1usize << n) {
        let mut sign = 1i8;
        for i in 0..n {
            let neg = (mask >> i) & 1;
            cells.push(2 * i + neg);
            if neg == 1 {
                sign = -sign;
            }
        }
        signs.push(sign);
    }
    SimplicialMesh::from_parts(n, n - 1, coords, cells, signs, true)
}

fn icosahedron() -> SimplicialMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    let coords: Vec<f64> = raw.iter().flat_map(|v| linalg::scale(v, 1.0 / linalg::norm(v))).collect();
    // counter-clockwise seen from outside
    let faces: [[usize; 3]; 20] = [
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    let cells = faces.iter().flatten().copied().collect();
    SimplicialMesh::from_parts(3, 2, coords, cells, vec![1; 20], true)
}
