use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use topodyn::conditions::ControlNeighborhood;
use topodyn::expr::{Feedback, FieldSpec, ScalarSpec};
use topodyn::mesh::AxisBox;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// A system and the checks to run on it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: u32,
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub n: usize,
    #[serde(default)]
    pub m: usize,
    /// Comma-separated components in `x1..xn`, `u1..um`.
    pub field: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feedback: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lyapunov: Option<String>,
    #[serde(default)]
    pub seed: u64,
    pub checks: Vec<CheckSpec>,
}

fn default_grid() -> usize {
    10
}

fn default_normals() -> usize {
    64
}

fn default_segments() -> usize {
    12
}

fn default_directions() -> usize {
    128
}

fn default_zero() -> Option<i64> {
    Some(0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CheckSpec {
    /// Homotopy class of the Gauss map on a closed mesh.
    Degree {
        mesh: MeshSpec,
        #[serde(default)]
        expected: Option<i64>,
    },
    /// Index of an equilibrium of the closed loop (the field itself when
    /// there are no controls).
    ClosedLoopIndex {
        point: Vec<f64>,
        radius: f64,
        #[serde(default)]
        unstable_dim: usize,
    },
    PoincareHopf {
        boundary: Vec<MeshSpec>,
        bounds: AxisBox,
        #[serde(default = "default_grid")]
        grid: usize,
    },
    PoincareHopfTorus {
        bounds: AxisBox,
        #[serde(default = "default_grid")]
        grid: usize,
    },
    Brockett {
        #[serde(default)]
        neighborhood: ControlNeighborhood,
    },
    /// Locate a limit cycle from `start` and test its Gauss image.
    Hemisphere {
        start: Vec<f64>,
        #[serde(default = "default_normals")]
        normals: usize,
    },
    /// Locate a planar limit cycle, embed it in `R^3` with `x3' = -x3`, and
    /// classify the Gauss map on a tube around it.
    CycleTube {
        start: Vec<f64>,
        radius: f64,
        #[serde(default = "default_segments")]
        segments: usize,
        #[serde(default = "default_zero")]
        expected: Option<i64>,
    },
    Isotopy {
        level: f64,
        bounds: AxisBox,
        resolution: usize,
    },
    PreimageCount {
        level: f64,
        bounds: AxisBox,
        resolution: usize,
        #[serde(default = "default_directions")]
        directions: usize,
    },
    Homology {
        mesh: MeshSpec,
        #[serde(default)]
        expected_betti: Option<Vec<usize>>,
    },
}

impl CheckSpec {
    pub fn name(&self) -> &'static str {
        match self {
            CheckSpec::Degree { .. } => "degree",
            CheckSpec::ClosedLoopIndex { .. } => "closed-loop-index",
            CheckSpec::PoincareHopf { .. } => "poincare-hopf",
            CheckSpec::PoincareHopfTorus { .. } => "poincare-hopf-torus",
            CheckSpec::Brockett { .. } => "brockett",
            CheckSpec::Hemisphere { .. } => "hemisphere",
            CheckSpec::CycleTube { .. } => "cycle-tube",
            CheckSpec::Isotopy { .. } => "isotopy",
            CheckSpec::PreimageCount { .. } => "preimage-count",
            CheckSpec::Homology { .. } => "homology",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Surface {
    Torus,
    KleinBottle,
    ProjectivePlane,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MeshSpec {
    Sphere {
        center: Vec<f64>,
        radius: f64,
        #[serde(default)]
        refinement: Option<usize>,
    },
    /// Level set of the scenario's Lyapunov function.
    LevelSet { level: f64, bounds: AxisBox, resolution: usize },
    Builtin { name: Surface },
    /// Mesh in the text format, relative to the scenario file.
    File { path: PathBuf },
}

/// A scenario with its expressions parsed.
pub struct Prepared {
    pub scenario: Scenario,
    pub field: FieldSpec,
    pub feedback: Feedback,
    pub lyapunov: Option<ScalarSpec>,
    /// Directory that relative mesh paths resolve against.
    pub base: PathBuf,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

pub fn parse_scenario(text: &str) -> Result<Scenario, CliError> {
    serde_json::from_str(text).map_err(|e| invalid(format!("scenario does not parse: {e}")))
}

pub fn load_file(path: &Path) -> Result<(Scenario, PathBuf), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let s = parse_scenario(&text)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((s, base))
}

fn check_point(label: &str, p: &[f64], n: usize) -> Result<(), CliError> {
    if p.len() != n {
        return Err(invalid(format!("{label}: point has {} coordinates, expected {n}", p.len())));
    }
    if p.iter().any(|v| !v.is_finite()) {
        return Err(invalid(format!("{label}: point is not finite")));
    }
    Ok(())
}

fn check_positive(label: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{label} must be positive, got {v}")))
    }
}

fn check_range(label: &str, v: usize, lo: usize, hi: usize) -> Result<(), CliError> {
    if (lo..=hi).contains(&v) {
        Ok(())
    } else {
        Err(invalid(format!("{label} must lie in {lo}..={hi}, got {v}")))
    }
}

fn check_box(label: &str, b: &AxisBox, n: usize) -> Result<(), CliError> {
    if b.dim() != n {
        return Err(invalid(format!("{label}: box has dimension {}, expected {n}", b.dim())));
    }
    b.validate().map_err(|e| invalid(format!("{label}: {e}")))
}

impl Prepared {
    pub fn new(scenario: Scenario, base: PathBuf) -> Result<Self, CliError> {
        let s = &scenario;
        if s.schema != SCHEMA_VERSION {
            return Err(invalid(format!("unsupported schema {}, expected {SCHEMA_VERSION}", s.schema)));
        }
        check_range("n", s.n, 1, 8)?;
        let field = FieldSpec::parse(&s.field, s.n, s.m).map_err(|e| invalid(format!("field: {e}")))?;
        let feedback = match &s.feedback {
            Some(src) => Feedback::parse(src, s.n, s.m).map_err(|e| invalid(format!("feedback: {e}")))?,
            None => Feedback::zero(s.n, s.m),
        };
        let lyapunov = match &s.lyapunov {
            Some(src) => Some(ScalarSpec::parse(src, s.n).map_err(|e| invalid(format!("lyapunov: {e}")))?),
            None => None,
        };
        let p = Prepared { scenario, field, feedback, lyapunov, base };
        for (i, c) in p.scenario.checks.iter().enumerate() {
            p.validate_check(c).map_err(|e| match e {
                CliError::Validation(m) => invalid(format!("check {} ({}): {m}", i + 1, c.name())),
                other => other,
            })?;
        }
        if p.scenario.checks.is_empty() {
            return Err(invalid("scenario has no checks"));
        }
        Ok(p)
    }

    fn needs_lyapunov(&self) -> Result<(), CliError> {
        if self.lyapunov.is_none() {
            return Err(invalid("needs a lyapunov function"));
        }
        Ok(())
    }

    fn validate_mesh(&self, m: &MeshSpec) -> Result<(), CliError> {
        let n = self.scenario.n;
        match m {
            MeshSpec::Sphere { center, radius, refinement } => {
                check_point("sphere center", center, n)?;
                check_positive("sphere radius", *radius)?;
                if n < 2 {
                    return Err(invalid("spheres need n >= 2"));
                }
                if let Some(r) = refinement {
                    check_range("sphere refinement", *r, 0, 8)?;
                }
            }
            MeshSpec::LevelSet { bounds, resolution, .. } => {
                self.needs_lyapunov()?;
                if !(n == 2 || n == 3) {
                    return Err(invalid("level sets need n = 2 or 3"));
                }
                check_box("level-set bounds", bounds, n)?;
                check_range("resolution", *resolution, 8, 256)?;
            }
            MeshSpec::Builtin { .. } => {
                if n != 3 {
                    return Err(invalid("built-in surfaces live in R^3"));
                }
            }
            MeshSpec::File { .. } => {}
        }
        Ok(())
    }

    fn validate_check(&self, c: &CheckSpec) -> Result<(), CliError> {
        let n = self.scenario.n;
        match c {
            CheckSpec::Degree { mesh, .. } | CheckSpec::Homology { mesh, .. } => self.validate_mesh(mesh)?,
            CheckSpec::ClosedLoopIndex { point, radius, unstable_dim } => {
                check_point("point", point, n)?;
                check_positive("radius", *radius)?;
                check_range("unstable_dim", *unstable_dim, 0, n)?;
            }
            CheckSpec::PoincareHopf { boundary, bounds, grid } => {
                if boundary.is_empty() {
                    return Err(invalid("boundary needs at least one component"));
                }
                for b in boundary {
                    self.validate_mesh(b)?;
                }
                check_box("bounds", bounds, n)?;
                check_range("grid", *grid, 2, 64)?;
            }
            CheckSpec::PoincareHopfTorus { bounds, grid } => {
                if n != 2 {
                    return Err(invalid("the torus check needs n = 2"));
                }
                check_box("bounds", bounds, n)?;
                check_range("grid", *grid, 2, 64)?;
            }
            CheckSpec::Brockett { neighborhood: nb } => {
                check_positive("epsilon", nb.epsilon)?;
                check_positive("state_radius", nb.state_radius)?;
                check_positive("threshold", nb.threshold)?;
                check_range("directions", nb.directions, 2, 4096)?;
                check_range("starts", nb.starts, 1, 256)?;
            }
            CheckSpec::Hemisphere { start, normals } => {
                if !(n == 2 || n == 3) {
                    return Err(invalid("the hemisphere test needs n = 2 or 3"));
                }
                check_point("start", start, n)?;
                check_range("normals", *normals, 4, 4096)?;
            }
            CheckSpec::CycleTube { start, radius, segments, .. } => {
                if n != 2 {
                    return Err(invalid("cycle tubes need a planar field"));
                }
                check_point("start", start, n)?;
                check_positive("radius", *radius)?;
                check_range("segments", *segments, 3, 256)?;
            }
            CheckSpec::Isotopy { bounds, resolution, .. } => {
                self.validate_mesh(&MeshSpec::LevelSet { level: 0.0, bounds: bounds.clone(), resolution: *resolution })?;
            }
            CheckSpec::PreimageCount { bounds, resolution, directions, .. } => {
                if n != 3 {
                    return Err(invalid("the preimage count needs n = 3"));
                }
                self.validate_mesh(&MeshSpec::LevelSet { level: 0.0, bounds: bounds.clone(), resolution: *resolution })?;
                check_range("directions", *directions, 8, 4096)?;
            }
        }
        Ok(())
    }
}
