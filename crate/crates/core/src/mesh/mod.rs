//! Oriented simplicial meshes: the domains on which Gauss maps are evaluated.
//!
//! A mesh stores vertex coordinates in `R^ambient` and top simplices of
//! intrinsic dimension `dim`. Each top simplex carries a sign; its effective
//! orientation is the sign times the orientation of its vertex tuple.
//!
//! For a hypersurface (`dim = ambient - 1`) the convention is that a
//! positively oriented simplex `(v0, .., vd)` satisfies
//! `det[nu, v1 - v0, .., vd - v0] > 0` for its outward normal `nu`.

mod builtin;
mod io;
mod level_set;
mod orient;
mod sphere;
mod tube;

use std::collections::HashMap;

use thiserror::Error;

use crate::expr::EvalError;
use crate::linalg;

pub use builtin::{flat_torus, klein_bottle, projective_plane};
pub use level_set::{extract_level_set, project_to_level, AxisBox};
pub use orient::{orient_mesh, OrientationReport};
pub use sphere::build_sphere_mesh;
pub use tube::{closed_polyline, tubular_neighborhood_mesh};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeshError {
    #[error("vertex index {index} out of range ({count} vertices)")]
    InvalidIndex { index: usize, count: usize },
    #[error("simplex {simplex} repeats a vertex")]
    RepeatedVertex { simplex: usize },
    #[error("simplex {simplex} has orientation sign {sign}, expected +1 or -1")]
    BadSign { simplex: usize, sign: i64 },
    #[error("coordinate array does not match ambient dimension {ambient}")]
    CoordinateShape { ambient: usize },
    #[error("non-finite vertex coordinate at vertex {vertex}")]
    NonFinite { vertex: usize },
    #[error("non-manifold face {face:?} shared by {count} simplices")]
    NonManifold { face: Vec<usize>, count: usize },
    #[error("dimension {0} not supported here")]
    Dimension(usize),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("level set is not regular: |grad V| < 1e-8 at {point:?}")]
    RegularityFailure { point: Vec<f64> },
    #[error("level set does not meet the box")]
    EmptyLevelSet,
    #[error("curve is not closed: first and last samples differ by {gap}")]
    CurveNotClosed { gap: f64 },
    #[error("tube radius {radius} too large: {reason}")]
    TubeRadius { radius: f64, reason: String },
    #[error("mesh format error on line {line}: {message}")]
    Format { line: usize, message: String },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimplicialMesh {
    ambient: usize,
    dim: usize,
    coords: Vec<f64>,
    cells: Vec<usize>,
    signs: Vec<i8>,
    oriented: bool,
}

impl SimplicialMesh {
    /// Validate and build a mesh. `coords` holds `ambient` numbers per vertex
    /// and `cells` holds `dim + 1` indices per top simplex.
    pub fn new(
        ambient: usize,
        dim: usize,
        coords: Vec<f64>,
        cells: Vec<usize>,
        signs: Vec<i8>,
        oriented: bool,
    ) -> Result<Self, MeshError> {
        if ambient == 0 || coords.len() % ambient != 0 {
            return Err(MeshError::CoordinateShape { ambient });
        }
        let k = dim + 1;
        if cells.len() % k != 0 || cells.len() / k != signs.len() {
            return Err(MeshError::Parameter("simplex table does not match dimension".into()));
        }
        let count = coords.len() / ambient;
        if let Some(v) = coords.chunks(ambient).position(|c| c.iter().any(|x| !x.is_finite())) {
            return Err(MeshError::NonFinite { vertex: v });
        }
        for (s, cell) in cells.chunks(k).enumerate() {
            for (a, &i) in cell.iter().enumerate() {
                if i >= count {
                    return Err(MeshError::InvalidIndex { index: i, count });
                }
                if cell[..a].contains(&i) {
                    return Err(MeshError::RepeatedVertex { simplex: s });
                }
            }
            if signs[s] != 1 && signs[s] != -1 {
                return Err(MeshError::BadSign { simplex: s, sign: signs[s] as i64 });
            }
        }
        Ok(SimplicialMesh { ambient, dim, coords, cells, signs, oriented })
    }

    pub(crate) fn from_parts(ambient: usize, dim: usize, coords: Vec<f64>, cells: Vec<usize>, signs: Vec<i8>, oriented: bool) -> Self {
        debug_assert_eq!(cells.len(), signs.len() * (dim + 1));
        SimplicialMesh { ambient, dim, coords, cells, signs, oriented }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    /// Intrinsic dimension of the top simplices.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertex_count(&self) -> usize {
        self.coords.len() / self.ambient
    }

    pub fn simplex_count(&self) -> usize {
        self.signs.len()
    }

    pub fn vertex(&self, i: usize) -> &[f64] {
        &self.coords[i * self.ambient..(i + 1) * self.ambient]
    }

    pub fn vertices(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks(self.ambient)
    }

    pub fn simplex(&self, i: usize) -> &[usize] {
        let k = self.dim + 1;
        &self.cells[i * k..(i + 1) * k]
    }

    pub fn simplices(&self) -> impl Iterator<Item = &[usize]> {
        self.cells.chunks(self.dim + 1)
    }

    pub fn sign(&self, i: usize) -> i8 {
        self.signs[i]
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    /// Whether the signs are claimed to form a coherent orientation.
    pub fn is_oriented(&self) -> bool {
        self.oriented
    }

    /// Replace the orientation signs (e.g. with those from [`orient_mesh`]).
    pub fn with_signs(&self, signs: Vec<i8>) -> SimplicialMesh {
        assert_eq!(signs.len(), self.signs.len());
        SimplicialMesh { signs, oriented: true, ..self.clone() }
    }

    /// The same mesh with every orientation flipped.
    pub fn reversed(&self) -> SimplicialMesh {
        let signs = self.signs.iter().map(|s| -s).collect();
        SimplicialMesh { signs, ..self.clone() }
    }

    /// Apply `f` to every vertex position.
    pub fn map_vertices(&self, mut f: impl FnMut(&[f64]) -> Vec<f64>) -> SimplicialMesh {
        let mut coords = Vec::with_capacity(self.coords.len());
        for v in self.vertices() {
            let w = f(v);
            assert_eq!(w.len(), self.ambient);
            coords.extend(w);
        }
        SimplicialMesh { coords, ..self.clone() }
    }

    /// Embed into a higher-dimensional ambient space by zero padding.
    pub fn embedded(&self, ambient: usize) -> SimplicialMesh {
        assert!(ambient >= self.ambient);
        self.map_vertices_with_dim(ambient, |v| {
            let mut w = v.to_vec();
            w.resize(ambient, 0.0);
            w
        })
    }

    fn map_vertices_with_dim(&self, ambient: usize, f: impl Fn(&[f64]) -> Vec<f64>) -> SimplicialMesh {
        let coords = self.vertices().flat_map(&f).collect();
        SimplicialMesh { ambient, coords, ..self.clone() }
    }

    /// Map from each sorted codimension-one face to the simplices containing
    /// it, together with the position of the omitted vertex.
    pub(crate) fn face_incidence(&self) -> HashMap<Vec<usize>, Vec<(usize, usize)>> {
        let mut map: HashMap<Vec<usize>, Vec<(usize, usize)>> = HashMap::new();
        for (s, cell) in self.simplices().enumerate() {
            for omit in 0..cell.len() {
                let mut face: Vec<usize> = cell
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != omit)
                    .map(|(_, &v)| v)
                    .collect();
                face.sort_unstable();
                map.entry(face).or_default().push((s, omit));
            }
        }
        map
    }

    /// Fails if some codimension-one face lies in more than two simplices.
    pub fn check_manifold(&self) -> Result<(), MeshError> {
        let inc = self.face_incidence();
        let mut worst: Option<(&Vec<usize>, usize)> = None;
        for (face, users) in &inc {
            if users.len() > 2 && worst.map_or(true, |(f, _)| face < f) {
                worst = Some((face, users.len()));
            }
        }
        match worst {
            Some((face, count)) => Err(MeshError::NonManifold { face: face.clone(), count }),
            None => Ok(()),
        }
    }

    /// Every codimension-one face lies in exactly two top simplices.
    pub fn is_closed(&self) -> bool {
        self.simplex_count() > 0 && self.face_incidence().values().all(|u| u.len() == 2)
    }

    /// Signed volume enclosed by a closed hypersurface (positive when the
    /// orientation points outward).
    pub fn signed_volume(&self) -> f64 {
        assert_eq!(self.dim + 1, self.ambient, "signed volume needs a hypersurface");
        let n = self.ambient;
        let nv = self.vertex_count().max(1) as f64;
        let mut centroid = vec![0.0; n];
        for v in self.vertices() {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / nv;
            }
        }
        let fact: f64 = (1..=n).map(|i| i as f64).product();
        let terms: Vec<f64> = self
            .simplices()
            .enumerate()
            .map(|(s, cell)| {
                let rel: Vec<Vec<f64>> = cell.iter().map(|&i| linalg::sub(self.vertex(i), &centroid)).collect();
                let cols: Vec<&[f64]> = rel.iter().map(|c| c.as_slice()).collect();
                self.signs[s] as f64 * linalg::det_columns(&cols) / fact
            })
            .collect();
        linalg::pairwise_sum(&terms)
    }

    /// Maximal edge length over all simplices.
    pub fn max_edge_length(&self) -> f64 {
        let mut best = 0.0f64;
        for cell in self.simplices() {
            for a in 0..cell.len() {
                for b in a + 1..cell.len() {
                    best = best.max(linalg::dist(self.vertex(cell[a]), self.vertex(cell[b])));
                }
            }
        }
        best
    }

    /// One round of uniform edgewise (Freudenthal) subdivision: every
    /// `d`-simplex splits into `2^d` children, new vertices sit at edge
    /// midpoints, and orientation signs are inherited. The subdivision of a
    /// shared face is the same from both sides, so closed meshes stay closed.
    pub fn refine(&self) -> SimplicialMesh {
        let d = self.dim;
        let pattern = freudenthal_pattern(d);
        let mut coords = self.coords.clone();
        let mut mids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut cells = Vec::with_capacity(self.cells.len() << d);
        let mut signs = Vec::with_capacity(self.signs.len() << d);
        let ambient = self.ambient;
        for (s, cell) in self.simplices().enumerate() {
            let mut sorted = cell.to_vec();
            sorted.sort_unstable();
            let parent = self.signs[s] * linalg::sort_parity(cell);
            for child in &pattern {
                for p in &child.points {
                    let id = match *p {
                        LatticePoint::Vertex(i) => sorted[i],
                        LatticePoint::Mid(i, j) => {
                            let key = (sorted[i], sorted[j]);
                            *mids.entry(key).or_insert_with(|| {
                                let id = coords.len() / ambient;
                                let m = linalg::midpoint(
                                    &self.coords[key.0 * ambient..(key.0 + 1) * ambient],
                                    &self.coords[key.1 * ambient..(key.1 + 1) * ambient],
                                );
                                coords.extend(m);
                                id
                            })
                        }
                    };
                    cells.push(id);
                }
                signs.push(parent * child.parity);
            }
        }
        SimplicialMesh { ambient, dim: d, coords, cells, signs, oriented: self.oriented }
    }

    /// Serialize in the plain-text mesh format (see [`SimplicialMesh::from_text`]).
    pub fn to_text(&self) -> String {
        io::write(self)
    }

    /// Parse the plain-text mesh format:
    ///
    /// ```text
    /// simplicial-mesh 1
    /// ambient <n>
    /// dim <d>
    /// oriented <0|1>
    /// vertices <count>
    /// <x_1> ... <x_n>              one line per vertex
    /// simplices <count>
    /// <sign> <i_0> ... <i_d>       one line per top simplex, sign is +1 or -1
    /// ```
    ///
    /// Blank lines and lines starting with `#` are ignored.
    pub fn from_text(text: &str) -> Result<SimplicialMesh, MeshError> {
        io::read(text)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum LatticePoint {
    Vertex(usize),
    Mid(usize, usize),
}

#[derive(Clone, Debug)]
pub(crate) struct ChildSimplex {
    pub points: Vec<LatticePoint>,
    pub parity: i8,
}

/// Children of the 2-fold edgewise subdivision of a `d`-simplex with
/// vertices `0..=d`, with their orientation relative to the parent.
pub(crate) fn freudenthal_pattern(d: usize) -> Vec<ChildSimplex> {
    if d == 0 {
        return vec![ChildSimplex { points: vec![LatticePoint::Vertex(0)], parity: 1 }];
    }
    let mut out = Vec::new();
    let perms = permutations(d);
    for z in 0..(1usize << d) {
        let base: Vec<i32> = (0..d).map(|i| ((z >> i) & 1) as i32).collect();
        'perm: for (perm, parity) in &perms {
            let mut y = base.clone();
            let mut pts = Vec::with_capacity(d + 1);
            for step in 0..=d {
                if step > 0 {
                    y[perm[step - 1]] += 1;
                }
                if y[0] > 2 || y[d - 1] < 0 || y.windows(2).any(|w| w[0] < w[1]) {
                    continue 'perm;
                }
                let mut a = vec![0i32; d + 1];
                a[0] = 2 - y[0];
                for i in 1..d {
                    a[i] = y[i - 1] - y[i];
                }
                a[d] = y[d - 1];
                let ones: Vec<usize> = (0..=d).filter(|&i| a[i] == 1).collect();
                pts.push(match ones.as_slice() {
                    [i, j] => LatticePoint::Mid(*i, *j),
                    _ => LatticePoint::Vertex(a.iter().position(|&c| c == 2).expect("lattice point")),
                });
            }
            out.push(ChildSimplex { points: pts, parity: *parity });
        }
    }
    debug_assert_eq!(out.len(), 1 << d);
    out
}

fn permutations(d: usize) -> Vec<(Vec<usize>, i8)> {
    fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<(Vec<usize>, i8)>) {
        let d = used.len();
        if cur.len() == d {
            out.push((cur.clone(), linalg::sort_parity(cur)));
            return;
        }
        for i in 0..d {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; d], &mut out);
    out
}
