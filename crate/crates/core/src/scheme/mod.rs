//! The semi-Lagrangian network scheme.
//!
//! One time step freezes level `n`, advances every arc with the arc operator
//! `S_γ` (nodes of all arcs in parallel), and then sets every vertex to the
//! smaller of the flux-limited value `v(x, t_n) + c_x τ` and the best arc
//! candidate. Vertex values are stored once per vertex, so every arc reads
//! the same number at its endpoints.

mod invariants;
mod operator;
mod problem;
mod solver;
mod trajectory;

use thiserror::Error;

use crate::grid::GridError;
use crate::hamiltonian::{AdmissibilityReport, HamiltonianError};

pub use invariants::{check_invariants, InvariantReport, INVARIANT_RTOL};
pub use operator::{apply_arc_operator, vertex_update, ArcUpdate, Branch, Minimizer};
pub use problem::{InitialDatum, LimiterChoice, Problem, ProblemBuilder};
pub use solver::{solve, solve_on_arc, step, Level, Solution, SolverConfig, StepRecord};
pub use trajectory::{
    reconstruct_from_node, reconstruct_trajectory, DiscreteTrajectory, TerminalReason, TrajectoryCheck,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchemeError {
    #[error("non-finite value on arc {arc} at node {node}, level {level}")]
    NonFiniteValue { arc: String, node: usize, level: usize },
    #[error("empty control interval at s = {s}")]
    EmptyControlInterval { s: f64 },
    #[error("vertex {vertex} at level {level} was set by the flux limiter, not by an arc")]
    NotArcBranch { vertex: String, level: usize },
    #[error("level {level} outside 0..={max}")]
    LevelOutOfRange { level: usize, max: usize },
    #[error("node {node} outside 0..={max}")]
    NodeOutOfRange { node: usize, max: usize },
    #[error("step records were not kept; enable SolverConfig::record_steps")]
    RecordsUnavailable,
    #[error("no cost given for arc {0}")]
    MissingCost(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("unknown arc {0}")]
    UnknownArc(String),
    #[error("horizon must be finite and non-negative, got {0}")]
    InvalidHorizon(f64),
    #[error("flux limiters are not admissible:\n{0}")]
    Inadmissible(Box<AdmissibilityReport>),
    #[error("invariant check failed: {0}")]
    InvariantViolated(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
}
