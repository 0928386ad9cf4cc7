//! Error norms, reference solutions and convergence studies.

mod convergence;
mod norms;
mod reference;

use thiserror::Error;

use crate::scheme::SchemeError;

pub use convergence::{convergence_study, ConvergenceRow, ConvergenceTable, DtRule};
pub use norms::{courant_number, discrete_lipschitz, error_norms, ErrorReport};
pub use reference::{
    exact_solution_test1, reference_from_fine_grid, FineReference, RefPoint, Reference, UniformFluxExact,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("reference undefined on arc {arc} at s = {s}, t = {t}")]
    ReferenceUndefined { arc: String, s: f64, t: f64 },
    #[error("need at least two nodes, got {0}")]
    TooFewNodes(usize),
    #[error("t = {t} is before the validity time {min} of the exact solution")]
    OutsideValidityWindow { t: f64, min: f64 },
    #[error("point ({0}, {1}) is not on the network")]
    PointOffNetwork(f64, f64),
    #[error("fine grid dx = {fine} is not below the ladder rung dx = {rung}")]
    FineGridTooCoarse { fine: f64, rung: f64 },
    #[error("invalid ladder: {0}")]
    Ladder(String),
    #[error("output failed: {0}")]
    Output(String),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
}

/// Round-trip formatting with 17 significant digits.
pub(crate) fn fmt17(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}
