use thiserror::Error;

use crate::analysis::AnalysisError;
use crate::grid::GridError;
use crate::hamiltonian::HamiltonianError;
use crate::network::NetworkError;
use crate::scenario::ScenarioError;
use crate::scheme::SchemeError;

/// Any error produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
