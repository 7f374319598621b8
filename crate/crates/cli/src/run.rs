use serde::Serialize;
use topodyn::conditions::{
    brockett_surjectivity_check, classify_homotopy_class, closed_loop_index_check, hemisphere_test, homology_check,
    isotopy_check, locate_limit_cycle, poincare_hopf_check, poincare_hopf_torus_check, preimage_count_check, CheckError,
    ConditionReport, CycleConfig, EquilibriumSearch, Verdict,
};
use topodyn::degree::{DegreeConfig, GaussSource};
use topodyn::mesh::{
    build_sphere_mesh, extract_level_set, flat_torus, klein_bottle, projective_plane, tubular_neighborhood_mesh,
    SimplicialMesh,
};

use crate::scenario::{CheckSpec, MeshSpec, Prepared, Surface};

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Replaces the scenario seed.
    pub seed: Option<u64>,
    /// Replaces every sphere refinement level.
    pub refinement: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub scenario: String,
    pub tool: String,
    pub version: String,
    pub field: String,
    pub seed: u64,
    pub aggregate: Verdict,
    pub checks: Vec<ConditionReport>,
}

/// Pass only if every check passes; otherwise the most severe verdict.
pub fn aggregate(reports: &[ConditionReport]) -> Verdict {
    let has = |v: Verdict| reports.iter().any(|r| r.verdict == v);
    if has(Verdict::Violated) {
        Verdict::Violated
    } else if has(Verdict::Degenerate) {
        Verdict::Degenerate
    } else if has(Verdict::Undecided) {
        Verdict::Undecided
    } else {
        Verdict::Pass
    }
}

fn default_refinement(n: usize) -> usize {
    match n {
        2 => 5,
        3 => 2,
        _ => 1,
    }
}

struct Runner<'a> {
    p: &'a Prepared,
    opts: &'a RunOptions,
    seed: u64,
    config: DegreeConfig,
}

impl Runner<'_> {
    fn mesh(&self, spec: &MeshSpec) -> Result<SimplicialMesh, CheckError> {
        Ok(match spec {
            MeshSpec::Sphere { center, radius, refinement } => {
                let r = self.opts.refinement.or(*refinement).unwrap_or(default_refinement(center.len()));
                build_sphere_mesh(center.len(), center, *radius, r)?
            }
            MeshSpec::LevelSet { level, bounds, resolution } => {
                let v = self.p.lyapunov.as_ref().expect("validated");
                extract_level_set(v, *level, bounds, *resolution)?
            }
            MeshSpec::Builtin { name } => match name {
                Surface::Torus => flat_torus(8),
                Surface::KleinBottle => klein_bottle(),
                Surface::ProjectivePlane => projective_plane(),
            },
            MeshSpec::File { path } => {
                let full = self.p.base.join(path);
                let text = std::fs::read_to_string(&full)
                    .map_err(|e| CheckError::Precondition(format!("{}: {e}", full.display())))?;
                SimplicialMesh::from_text(&text)?
            }
        })
    }

    fn run(&self, check: &CheckSpec) -> Result<ConditionReport, CheckError> {
        let f = &self.p.field;
        let cfg = &self.config;
        match check {
            CheckSpec::Degree { mesh, expected } => {
                let m = self.mesh(mesh)?;
                classify_homotopy_class(&m, GaussSource::Field(f), *expected, cfg)
            }
            CheckSpec::ClosedLoopIndex { point, radius, unstable_dim } => {
                closed_loop_index_check(f, &self.p.feedback, point, *radius, *unstable_dim, cfg)
            }
            CheckSpec::PoincareHopf { boundary, bounds, grid } => {
                let comps = boundary.iter().map(|b| self.mesh(b)).collect::<Result<Vec<_>, _>>()?;
                let search = EquilibriumSearch { grid: *grid, ..EquilibriumSearch::new(bounds.clone()) };
                poincare_hopf_check(f, &comps, &search, cfg)
            }
            CheckSpec::PoincareHopfTorus { bounds, grid } => {
                let search = EquilibriumSearch { grid: *grid, ..EquilibriumSearch::new(bounds.clone()) };
                poincare_hopf_torus_check(f, &search)
            }
            CheckSpec::Brockett { neighborhood } => brockett_surjectivity_check(f, neighborhood, self.seed),
            CheckSpec::Hemisphere { start, normals } => {
                let cycle = locate_limit_cycle(f, start, &CycleConfig::default())?;
                hemisphere_test(f, &cycle, *normals)
            }
            CheckSpec::CycleTube { start, radius, segments, expected } => {
                let cycle = locate_limit_cycle(f, start, &CycleConfig::default())?.embedded(3);
                let f3 = f.extended("-x3")?;
                let tube = tubular_neighborhood_mesh(&cycle.points, *radius, *segments)?;
                classify_homotopy_class(&tube, GaussSource::Field(&f3), *expected, cfg)
            }
            CheckSpec::Isotopy { level, bounds, resolution } => {
                let v = self.p.lyapunov.as_ref().expect("validated");
                let m = extract_level_set(v, *level, bounds, *resolution)?;
                isotopy_check(f, v, &m, cfg)
            }
            CheckSpec::PreimageCount { level, bounds, resolution, directions } => {
                let v = self.p.lyapunov.as_ref().expect("validated");
                let m = extract_level_set(v, *level, bounds, *resolution)?;
                preimage_count_check(v, &m, *directions, self.seed)
            }
            CheckSpec::Homology { mesh, expected_betti } => {
                let m = self.mesh(mesh)?;
                homology_check(&m, expected_betti.as_deref())
            }
        }
    }
}

/// Run every check of the scenario in order. Checks that cannot be carried
/// out are recorded with the verdict their error maps to.
pub fn run_scenario(p: &Prepared, opts: &RunOptions) -> RunReport {
    let seed = opts.seed.unwrap_or(p.scenario.seed);
    let runner = Runner { p, opts, seed, config: DegreeConfig { seed, ..DegreeConfig::default() } };
    let checks: Vec<ConditionReport> = p
        .scenario
        .checks
        .iter()
        .map(|c| match runner.run(c) {
            Ok(mut r) => {
                r.condition = c.name().to_string();
                r
            }
            Err(e) => ConditionReport::from_error(c.name(), &e, Some(seed)),
        })
        .collect();
    RunReport {
        schema: crate::scenario::SCHEMA_VERSION,
        scenario: p.scenario.name.clone(),
        tool: "topodyn".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        field: p.field.to_string(),
        seed,
        aggregate: aggregate(&checks),
        checks,
    }
}
