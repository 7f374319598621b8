//! Gauss maps and their degrees; equilibria and their indices.

mod engine;
mod equilibria;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{EvalError, FieldSpec};
use crate::linalg;
use crate::mesh::{MeshError, SimplicialMesh};

pub use engine::{image_diameter, preimage_counts, random_unit_vector, PreimageCount};
pub use equilibria::{find_equilibria, hyperbolic_index, topological_index, Equilibrium, IndexMethod};

/// Below this norm a field value counts as zero.
pub const VANISHING_NORM: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DegreeError {
    #[error("field vanishes at {point:?} (|X| = {norm:.3e})")]
    Vanishing { point: Vec<f64>, norm: f64 },
    #[error("degree undecided: raw value {raw} (residual {residual:.3}) after {depth} refinements, largest image simplex {max_image_diameter:.3} rad")]
    Undecided { raw: f64, residual: f64, depth: usize, max_image_diameter: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("no regular value found after {attempts} samples")]
    NoRegularValue { attempts: usize },
    #[error("Jacobian is not hyperbolic: an eigenvalue has real part {real:.3e}")]
    NonHyperbolic { real: f64 },
    #[error("second equilibrium at {location:?} within twice the test radius")]
    SecondEquilibrium { location: Vec<f64> },
    #[error("index differs between radius ({at_radius}) and half radius ({at_half})")]
    RadiusDependence { at_radius: i64, at_half: i64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DegreeMethod {
    /// Accumulated winding angle (n = 2).
    Winding,
    /// Sum of oriented solid angles (n = 3).
    SolidAngle,
    /// Signed preimage count of a random regular value (n >= 4).
    RegularValue,
    /// Sign change of a scalar field across an interval (n = 1).
    SignChange,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeConfig {
    /// Simplices whose Gauss image is wider than this (radians) are split.
    pub diameter_limit: f64,
    /// Maximal number of refinement rounds.
    pub max_depth: usize,
    /// Refinement stops before the mesh would exceed this many simplices.
    pub max_simplices: usize,
    /// Seed for regular-value sampling.
    pub seed: u64,
}

impl Default for DegreeConfig {
    fn default() -> Self {
        DegreeConfig { diameter_limit: 0.5, max_depth: 14, max_simplices: 400_000, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeResult {
    pub degree: i64,
    /// Value before snapping to the nearest integer.
    pub raw: f64,
    pub residual: f64,
    /// Refinement rounds performed.
    pub depth: usize,
    pub method: DegreeMethod,
    pub regular_value: Option<Vec<f64>>,
    pub seed: Option<u64>,
    /// Simplices in the final mesh.
    pub simplices: usize,
    /// Largest angular diameter of an image simplex in the final mesh.
    pub max_image_diameter: f64,
}

/// What gets normalized onto the sphere.
#[derive(Clone, Copy)]
pub enum GaussSource<'a> {
    /// A vector field, evaluated with zero controls.
    Field(&'a FieldSpec),
    /// An arbitrary vector-valued map of the mesh's ambient coordinates.
    Map(&'a dyn Fn(&[f64]) -> Result<Vec<f64>, EvalError>),
    /// One vector per mesh vertex. The mesh cannot be refined.
    Samples(&'a [Vec<f64>]),
}

impl<'a> GaussSource<'a> {
    pub(crate) fn refinable(&self) -> bool {
        !matches!(self, GaussSource::Samples(_))
    }

    /// Unit image of the point `x` (vertex `index` for samples).
    pub(crate) fn image(&self, x: &[f64], index: usize, n: usize) -> Result<Vec<f64>, DegreeError> {
        let v = match self {
            GaussSource::Field(f) => f.at(x)?,
            GaussSource::Map(m) => m(x)?,
            GaussSource::Samples(s) => s[index].clone(),
        };
        if v.len() != n {
            return Err(DegreeError::Dimension(format!("map has {} components, sphere needs {n}", v.len())));
        }
        normalize(v, x)
    }
}

fn normalize(v: Vec<f64>, at: &[f64]) -> Result<Vec<f64>, DegreeError> {
    let norm = linalg::norm(&v);
    if !(norm > VANISHING_NORM) || !norm.is_finite() {
        return Err(DegreeError::Vanishing { point: at.to_vec(), norm });
    }
    Ok(linalg::scale(&v, 1.0 / norm))
}

/// The Gauss map `X(x) / |X(x)|` (controls set to zero).
pub fn gauss_map(f: &FieldSpec, x: &[f64]) -> Result<Vec<f64>, DegreeError> {
    normalize(f.at(x)?, x)
}

/// Degree of the Gauss map of `f` on a closed oriented hypersurface mesh.
pub fn degree(f: &FieldSpec, mesh: &SimplicialMesh, config: &DegreeConfig) -> Result<DegreeResult, DegreeError> {
    if f.n() != mesh.ambient_dim() {
        return Err(DegreeError::Dimension(format!(
            "field lives in R^{} but the mesh in R^{}",
            f.n(),
            mesh.ambient_dim()
        )));
    }
    degree_of(GaussSource::Field(f), mesh, config)
}

/// Degree of the normalized map `source` from a closed oriented
/// `(n-1)`-dimensional mesh to `S^{n-1}`.
///
/// * `n = 2`: winding angle of the image polygon over `2 pi`;
/// * `n = 3`: signed solid angles of the image triangles over `4 pi`;
/// * `n >= 4`: signed count of image simplices containing a random
///   regular value.
///
/// Simplices whose image is wider than `config.diameter_limit` are
/// subdivided first (locally for `n <= 3`, uniformly otherwise).
pub fn degree_of(source: GaussSource<'_>, mesh: &SimplicialMesh, config: &DegreeConfig) -> Result<DegreeResult, DegreeError> {
    let n = mesh.dim() + 1;
    if n < 2 {
        return Err(DegreeError::Dimension("degree needs a mesh of dimension at least 1".into()));
    }
    if let GaussSource::Samples(s) = source {
        if s.len() != mesh.vertex_count() {
            return Err(DegreeError::Dimension(format!("{} samples for {} vertices", s.len(), mesh.vertex_count())));
        }
    }
    match n {
        2 => engine::winding_degree(source, mesh, config),
        3 => engine::solid_angle_degree(source, mesh, config),
        _ => engine::regular_value_degree(source, mesh, config),
    }
}

/// Parity of the number of preimages of a regular value. Valid on
/// non-orientable meshes, where orientation signs are ignored.
pub fn mod2_degree(source: GaussSource<'_>, mesh: &SimplicialMesh, config: &DegreeConfig) -> Result<Mod2Result, DegreeError> {
    engine::mod2(source, mesh, config)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mod2Result {
    pub parity: u8,
    /// Unsigned preimage count of the regular value.
    pub preimages: usize,
    pub regular_value: Vec<f64>,
    pub seed: u64,
    pub depth: usize,
    pub simplices: usize,
}

/// Winding number of a closed oriented hypersurface mesh around `p`: the
/// degree of `x -> x - p`, computed on the mesh as given.
pub fn winding_number(mesh: &SimplicialMesh, p: &[f64]) -> Result<i64, DegreeError> {
    if p.len() != mesh.ambient_dim() || mesh.dim() + 1 != mesh.ambient_dim() {
        return Err(DegreeError::Dimension("winding number needs a hypersurface and a point of the same ambient space".into()));
    }
    let samples: Vec<Vec<f64>> = mesh.vertices().map(|v| linalg::sub(v, p)).collect();
    let config = DegreeConfig { max_depth: 0, ..DegreeConfig::default() };
    match degree_of(GaussSource::Samples(&samples), mesh, &config) {
        Ok(r) => Ok(r.degree),
        // far from the mesh the images are tiny and never undecided; close
        // to it a wide image simplex still yields a reliable total
        Err(DegreeError::Undecided { raw, residual, .. }) if residual < 0.25 => Ok(raw.round() as i64),
        Err(e) => Err(e),
    }
}

pub(crate) fn snap(raw: f64) -> (i64, f64) {
    let d = raw.round();
    (d as i64, (raw - d).abs())
}

pub(crate) const UNDECIDED_DIAMETER: f64 = PI / 2.0;

#[cfg(test)]
mod tests;
