//! Arc Hamiltonians and Lagrangians.
//!
//! Every arc carries a convex pair `H(s, μ)` / `L(s, λ)`. The scheme only
//! ever evaluates `L`, restricted to velocities `|λ| ≤ β₀`; outside that band
//! the cost is the [`Cost::Infinite`] sentinel.
//!
//! Costs may be given in closed form ([`QuadraticCost`], [`PowerCost`]) or
//! derived from a Hamiltonian with [`modify_hamiltonian`], which replaces the
//! Hamiltonian by an affine extension outside a compact momentum window and
//! conjugates the result numerically.

mod conjugate;
mod cost;
mod limiters;
mod model;
mod modify;

use thiserror::Error;

pub use conjugate::{legendre_transform, lower_convex_envelope, PiecewiseLinear};
pub use cost::{ArcCost, Cost, Location, PotentialTerm, PowerCost, QuadraticCost};
pub use limiters::{check_flux_limiters, max_admissible, AdmissibilityReport, FluxLimiters, VertexAdmissibility};
pub use model::{arc_critical_value, ArcModel, Sampling};
pub use modify::{
    modify_hamiltonian, select_momentum_interval, ArcHamiltonian, LemmaCheck, ModifiedPair,
    ModifyParams, MomentumInterval, MomentumSelection,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HamiltonianError {
    #[error("empty sample grid")]
    EmptyGrid,
    #[error("need at least two points, got {0}")]
    TooFewPoints(usize),
    #[error("abscissae must be strictly increasing (index {0})")]
    NonMonotoneAbscissae(usize),
    #[error("no extension threshold μ₀ found below {bound}: Hamiltonian does not look superlinear")]
    SuperlinearityScanFailed { bound: f64 },
    #[error("Hamiltonian slice at s = {s} is not convex near μ = {mu}")]
    NonConvexSlice { s: f64, mu: f64 },
    #[error("momentum interval scan failed below {bound}")]
    ScanFailed { bound: f64 },
    #[error("invalid interval [{0}, {1}]")]
    InvalidInterval(f64, f64),
    #[error("flux limiter vector has {got} entries, network has {expected} vertices")]
    LimiterCount { expected: usize, got: usize },
}
