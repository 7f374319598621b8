//! Checks of necessary conditions for achievable dynamics, each producing a
//! [`ConditionReport`].

mod brockett;
mod classify;
mod cycle;
mod lyapunov;
mod optimize;
mod poincare_hopf;

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::degree::DegreeError;
use crate::expr::{EvalError, ParseError};
use crate::homology::{HomologyError, HomologyGroup};
use crate::mesh::MeshError;

pub use brockett::{brockett_surjectivity_check, closed_loop_index_check, direction_grid, ControlNeighborhood};
pub use classify::{classify_homotopy_class, homology_check};
pub use cycle::{hemisphere_test, locate_limit_cycle, ClosedCurve, CycleConfig};
pub use lyapunov::{isotopy_check, preimage_count_check};
pub use optimize::{nelder_mead, NelderMeadResult};
pub use poincare_hopf::{poincare_hopf_check, poincare_hopf_torus_check, EquilibriumSearch};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Violated,
    Degenerate,
    Undecided,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Violated => "violated",
            Verdict::Degenerate => "degenerate",
            Verdict::Undecided => "undecided",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Evidence {
    pub label: String,
    pub values: Vec<f64>,
}

impl Evidence {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Self {
        Evidence { label: label.into(), values }
    }
}

/// A polyline on the unit sphere, for plotting Gauss images.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GaussCurve {
    pub label: String,
    pub closed: bool,
    pub points: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlotMark {
    pub label: String,
    pub point: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PlotData {
    pub dimension: usize,
    pub curves: Vec<GaussCurve>,
    pub marks: Vec<PlotMark>,
}

/// Outcome of one check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    pub condition: String,
    pub verdict: Verdict,
    pub expected: Value,
    pub observed: Value,
    pub tolerance: Value,
    pub seed: Option<u64>,
    pub evidence: Vec<Evidence>,
    pub runtime_ms: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub homology: Vec<HomologyGroup>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plot: Option<PlotData>,
}

impl ConditionReport {
    pub(crate) fn new(condition: &str, verdict: Verdict, expected: Value, observed: Value, tolerance: Value) -> Self {
        ConditionReport {
            condition: condition.to_string(),
            verdict,
            expected,
            observed,
            tolerance,
            seed: None,
            evidence: Vec::new(),
            runtime_ms: 0,
            message: None,
            homology: Vec::new(),
            plot: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Report for a check that could not be carried out.
    pub fn from_error(condition: &str, error: &CheckError, seed: Option<u64>) -> Self {
        let mut r = ConditionReport::new(condition, error.verdict(), Value::Null, Value::Null, Value::Null);
        r.seed = seed;
        r.message = Some(error.to_string());
        if let Some(p) = error.witness() {
            r.evidence.push(Evidence::new("witness point", p.to_vec()));
        }
        r
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CheckError {
    #[error("hypothesis violated at {point:?}: {reason}")]
    Hypothesis { point: Vec<f64>, reason: String },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("equilibrium on the boundary near {point:?}")]
    EquilibriumOnBoundary { point: Vec<f64> },
    #[error("no return to the section within time {time}")]
    NoReturn { time: f64 },
    #[error("return map does not contract (spectral radius {spectral_radius:.6})")]
    NonContracting { spectral_radius: f64 },
    #[error("trajectory left the finite range at time {time}")]
    Diverged { time: f64 },
    #[error("dimension {0} not supported by this check")]
    Dimension(usize),
    #[error(transparent)]
    Degree(#[from] DegreeError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Homology(#[from] HomologyError),
}

impl CheckError {
    /// Verdict recorded when the error replaces a report.
    pub fn verdict(&self) -> Verdict {
        match self {
            CheckError::Degree(DegreeError::Undecided { .. } | DegreeError::NoRegularValue { .. })
            | CheckError::NoReturn { .. } => Verdict::Undecided,
            _ => Verdict::Degenerate,
        }
    }

    pub fn witness(&self) -> Option<&[f64]> {
        match self {
            CheckError::Hypothesis { point, .. } | CheckError::EquilibriumOnBoundary { point } => Some(point),
            CheckError::Degree(DegreeError::Vanishing { point, .. } | DegreeError::SecondEquilibrium { location: point }) => {
                Some(point)
            }
            _ => None,
        }
    }
}

/// Wall-clock timer; reads zero where no clock is available.
pub(crate) struct Stopwatch {
    #[cfg(not(target_arch = "wasm32"))]
    start: std::time::Instant,
}

impl Stopwatch {
    pub fn start() -> Self {
        Stopwatch {
            #[cfg(not(target_arch = "wasm32"))]
            start: std::time::Instant::now(),
        }
    }

    pub fn ms(&self) -> u64 {
        #[cfg(not(target_arch = "wasm32"))]
        {
            self.start.elapsed().as_millis() as u64
        }
        #[cfg(target_arch = "wasm32")]
        {
            0
        }
    }
}

/// Points spread evenly over `S^2`: a Fibonacci spiral with offset `shift`
/// in `[0, 1)` along the axis.
pub fn fibonacci_sphere(count: usize, shift: f64) -> Vec<Vec<f64>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5 + shift - 0.5) / count as f64;
            let z = z.clamp(-1.0, 1.0);
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            vec![r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}
