//! Level-set extraction on a regular grid.
//!
//! Each grid cell is split into simplices by the Kuhn (Freudenthal)
//! triangulation (2 triangles per square, 6 tetrahedra per cube) and the
//! zero set of the piecewise-linear interpolant of `V - level` is extracted
//! simplex by simplex. This is the marching-squares / marching-cubes scheme
//! without the ambiguous cases: the output is always a manifold, closed
//! whenever the level set stays inside the box.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{MeshError, SimplicialMesh};
use crate::expr::ScalarSpec;
use crate::linalg;

/// An axis-aligned box `[lo_1, hi_1] x .. x [lo_n, hi_n]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl AxisBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len());
        AxisBox { lo, hi }
    }

    /// The cube `[-half, half]^n` shifted to `center`.
    pub fn around(center: &[f64], half: f64) -> Self {
        AxisBox {
            lo: center.iter().map(|c| c - half).collect(),
            hi: center.iter().map(|c| c + half).collect(),
        }
    }

    pub fn symmetric(n: usize, half: f64) -> Self {
        Self::around(&vec![0.0; n], half)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64], slack: f64) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (l, h))| *v >= l - slack && *v <= h + slack)
    }

    pub fn min_side(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).fold(f64::INFINITY, f64::min)
    }

    pub fn validate(&self) -> Result<(), MeshError> {
        if self.lo.is_empty() || self.lo.iter().zip(&self.hi).any(|(l, h)| !(l < h) || !l.is_finite() || !h.is_finite()) {
            return Err(MeshError::Parameter("box must satisfy lo < hi in every coordinate".into()));
        }
        Ok(())
    }
}

const GRADIENT_FLOOR: f64 = 1e-8;

/// Triangulate `{V = level}` inside `bounds` for `n` in {2, 3}.
///
/// `resolution` is the number of grid cells per axis (at least 8). Output
/// vertices are projected onto the level set with Newton steps along the
/// gradient, and every simplex is oriented with its normal pointing toward
/// increasing `V` (outward from the sublevel set).
pub fn extract_level_set(v: &ScalarSpec, level: f64, bounds: &AxisBox, resolution: usize) -> Result<SimplicialMesh, MeshError> {
    let n = v.n();
    if n != 2 && n != 3 {
        return Err(MeshError::Dimension(n));
    }
    if bounds.dim() != n {
        return Err(MeshError::Parameter("box dimension does not match V".into()));
    }
    bounds.validate()?;
    if resolution < 8 {
        return Err(MeshError::Parameter(format!("resolution must be at least 8, got {resolution}")));
    }
    let nodes = resolution + 1;
    let total = nodes.pow(n as u32);
    let node_pos = |idx: usize| -> Vec<f64> {
        let mut rem = idx;
        (0..n)
            .map(|k| {
                let i = rem % nodes;
                rem /= nodes;
                bounds.lo[k] + (bounds.hi[k] - bounds.lo[k]) * i as f64 / resolution as f64
            })
            .collect()
    };
    let mut values = Vec::with_capacity(total);
    for idx in 0..total {
        values.push(v.evaluate(&node_pos(idx))? - level);
    }
    let strides: Vec<usize> = (0..n).map(|k| nodes.pow(k as u32)).collect();
    let kuhn = kuhn_simplices(n);

    let mut coords: Vec<f64> = Vec::new();
    let mut edge_vertex: HashMap<(usize, usize), usize> = HashMap::new();
    let mut cells: Vec<usize> = Vec::new();
    let mut touched_nodes: Vec<usize> = Vec::new();

    let cells_per_axis = resolution;
    let cell_total = cells_per_axis.pow(n as u32);
    for cell in 0..cell_total {
        let mut rem = cell;
        let mut base = 0;
        for stride in &strides {
            base += (rem % cells_per_axis) * stride;
            rem /= cells_per_axis;
        }
        let corner = |offsets: &[usize]| -> usize { base + offsets.iter().zip(&strides).map(|(o, s)| o * s).sum::<usize>() };
        // cells that the level set crosses or touches
        let mut any_le = false;
        let mut any_ge = false;
        for mask in 0..(1usize << n) {
            let offs: Vec<usize> = (0..n).map(|k| (mask >> k) & 1).collect();
            let s = values[corner(&offs)];
            any_le |= s <= 0.0;
            any_ge |= s >= 0.0;
        }
        if !(any_le && any_ge) {
            continue;
        }
        for mask in 0..(1usize << n) {
            let offs: Vec<usize> = (0..n).map(|k| (mask >> k) & 1).collect();
            touched_nodes.push(corner(&offs));
        }
        for simplex in &kuhn {
            let ids: Vec<usize> = simplex.iter().map(|offs| corner(offs)).collect();
            let inside: Vec<usize> = ids.iter().copied().filter(|&i| values[i] < 0.0).collect();
            let outside: Vec<usize> = ids.iter().copied().filter(|&i| values[i] >= 0.0).collect();
            if inside.is_empty() || outside.is_empty() {
                continue;
            }
            let mut crossing = |a: usize, b: usize, coords: &mut Vec<f64>| -> usize {
                let key = (a.min(b), a.max(b));
                *edge_vertex.entry(key).or_insert_with(|| {
                    let (sa, sb) = (values[a], values[b]);
                    let t = sa / (sa - sb);
                    let pa = node_pos(a);
                    let pb = node_pos(b);
                    let p: Vec<f64> = pa.iter().zip(&pb).map(|(x, y)| x + t * (y - x)).collect();
                    let id = coords.len() / n;
                    coords.extend(p);
                    id
                })
            };
            let centroid = |set: &[usize]| -> Vec<f64> {
                let mut c = vec![0.0; n];
                for &i in set {
                    for (ck, pk) in c.iter_mut().zip(node_pos(i)) {
                        *ck += pk / set.len() as f64;
                    }
                }
                c
            };
            let up = linalg::sub(&centroid(&outside), &centroid(&inside));
            let mut pieces: Vec<Vec<usize>> = Vec::new();
            if n == 2 {
                let (a, b, c) = if inside.len() == 1 {
                    (inside[0], outside[0], outside[1])
                } else {
                    (outside[0], inside[0], inside[1])
                };
                pieces.push(vec![crossing(a, b, &mut coords), crossing(a, c, &mut coords)]);
            } else if inside.len() == 1 || outside.len() == 1 {
                let (apex, rest) = if inside.len() == 1 { (inside[0], &outside) } else { (outside[0], &inside) };
                pieces.push(rest.iter().map(|&r| crossing(apex, r, &mut coords)).collect());
            } else {
                let (a, b) = (inside[0], inside[1]);
                let (c, d) = (outside[0], outside[1]);
                let ac = crossing(a, c, &mut coords);
                let ad = crossing(a, d, &mut coords);
                let bd = crossing(b, d, &mut coords);
                let bc = crossing(b, c, &mut coords);
                pieces.push(vec![ac, ad, bd]);
                pieces.push(vec![ac, bd, bc]);
            }
            for mut piece in pieces {
                let p: Vec<&[f64]> = piece.iter().map(|&i| &coords[i * n..(i + 1) * n]).collect();
                let normal_dot = if n == 2 {
                    let d = linalg::sub(p[1], p[0]);
                    d[1] * up[0] - d[0] * up[1]
                } else {
                    let nrm = linalg::cross3(&linalg::sub(p[1], p[0]), &linalg::sub(p[2], p[0]));
                    linalg::dot(&nrm, &up)
                };
                if normal_dot < 0.0 {
                    piece.swap(0, 1);
                }
                cells.extend(piece);
            }
        }
    }

    touched_nodes.sort_unstable();
    touched_nodes.dedup();
    for &node in &touched_nodes {
        let p = node_pos(node);
        if linalg::norm(&v.gradient(&p)?) < GRADIENT_FLOOR {
            return Err(MeshError::RegularityFailure { point: p });
        }
    }
    if cells.is_empty() {
        return Err(MeshError::EmptyLevelSet);
    }
    let count = cells.len() / n;
    let mesh = SimplicialMesh::from_parts(n, n - 1, coords, cells, vec![1; count], true);
    project_to_level(&mesh, v, level)
}

/// Move every vertex onto `{V = level}` with Newton steps along `grad V`
/// (at most 8 per vertex), failing if the gradient nearly vanishes.
pub fn project_to_level(mesh: &SimplicialMesh, v: &ScalarSpec, level: f64) -> Result<SimplicialMesh, MeshError> {
    let mut coords = Vec::with_capacity(mesh.vertex_count() * mesh.ambient_dim());
    for p in mesh.vertices() {
        let mut x = p.to_vec();
        for _ in 0..8 {
            let r = v.evaluate(&x)? - level;
            let g = v.gradient(&x)?;
            let g2 = linalg::dot(&g, &g);
            if g2.sqrt() < GRADIENT_FLOOR {
                return Err(MeshError::RegularityFailure { point: x });
            }
            if r.abs() < 1e-13 {
                break;
            }
            x = linalg::add_scaled(&x, -r / g2, &g);
        }
        let g = v.gradient(&x)?;
        if linalg::norm(&g) < GRADIENT_FLOOR {
            return Err(MeshError::RegularityFailure { point: x });
        }
        coords.extend(x);
    }
    Ok(SimplicialMesh::from_parts(
        mesh.ambient,
        mesh.dim,
        coords,
        mesh.cells.clone(),
        mesh.signs.clone(),
        mesh.oriented,
    ))
}

/// Corner offsets of the Kuhn simplices of the unit `n`-cube.
fn kuhn_simplices(n: usize) -> Vec<Vec<Vec<usize>>> {
    let perms: Vec<Vec<usize>> = match n {
        2 => vec![vec![0, 1], vec![1, 0]],
        3 => vec![vec![0, 1, 2], vec![0, 2, 1], vec![1, 0, 2], vec![1, 2, 0], vec![2, 0, 1], vec![2, 1, 0]],
        _ => unreachable!(),
    };
    perms
        .into_iter()
        .map(|perm| {
            let mut cur = vec![0usize; n];
            let mut verts = vec![cur.clone()];
            for &axis in &perm {
                cur[axis] = 1;
                verts.push(cur.clone());
            }
            verts
        })
        .collect()
}
