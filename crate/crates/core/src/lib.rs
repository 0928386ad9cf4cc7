//! Semi-Lagrangian approximation of time-dependent Hamilton–Jacobi equations
//! posed on planar networks.
//!
//! A network is a finite set of vertices joined by oriented arcs. On each arc
//! the unknown solves `u_t + H(s, u') = 0`; at the vertices the arcs are
//! coupled through a flux limiter `c_x`, which caps how fast the solution may
//! decrease there. The scheme implemented here is explicit, monotone and
//! local: every arc is advanced independently with a semi-Lagrangian operator
//! and the vertices are then reconciled with the flux-limited minimum.
//!
//! The crate is organised by stage:
//!
//! * [`network`] – vertices, arcs, incidence and arc-length parametrisation;
//! * [`hamiltonian`] – per-arc cost models, Legendre transforms, convex
//!   envelopes, the compact-domain modification and flux limiters;
//! * [`grid`] – space/time grids and the linear interpolation operator;
//! * [`scheme`] – the arc operator, the network step, full solves and
//!   optimal-trajectory reconstruction;
//! * [`analysis`] – error norms, reference solutions, convergence tables and
//!   runtime diagnostics;
//! * [`scenario`] – JSON scenario files and the driver behind the `hjnet`
//!   command-line tool.
//!
//! ```
//! use hjnet::prelude::*;
//!
//! let net = hjnet::network::triangle();
//! let problem = Problem::builder(net)
//!     .uniform_cost(QuadraticCost::kinetic())
//!     .uniform_limiter(-5.0)
//!     .horizon(1.0)
//!     .build()
//!     .unwrap();
//! let sol = solve(&problem, StepPair::new(0.1, 0.05), &SolverConfig::default()).unwrap();
//! let report = error_norms(&sol, &UniformFluxExact::new(-5.0)).unwrap();
//! assert!(report.e_inf < 0.1);
//! ```

pub mod analysis;
pub mod error;
pub mod grid;
pub mod hamiltonian;
mod minimize;
pub mod network;
pub mod scenario;
pub mod scheme;

pub use error::{Error, Result};

/// The types most programs need.
pub mod prelude {
    pub use crate::analysis::{
        convergence_study, error_norms, reference_from_fine_grid, ConvergenceTable, DtRule,
        ErrorReport, Reference, UniformFluxExact,
    };
    pub use crate::grid::{make_grids, StepPair};
    pub use crate::hamiltonian::{ArcCost, ArcModel, Cost, FluxLimiters, QuadraticCost};
    pub use crate::network::{Network, Point};
    pub use crate::scheme::{solve, InitialDatum, Problem, Solution, SolverConfig};
}

// The guide under `book/` is compiled as doctests so its listings cannot rot.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/networks.md")]
    mod networks {}
    #[doc = include_str!("../../../book/src/hamiltonians.md")]
    mod hamiltonians {}
    #[doc = include_str!("../../../book/src/discretization.md")]
    mod discretization {}
    #[doc = include_str!("../../../book/src/scheme.md")]
    mod scheme {}
    #[doc = include_str!("../../../book/src/trajectories.md")]
    mod trajectories {}
    #[doc = include_str!("../../../book/src/convergence.md")]
    mod convergence {}
    #[doc = include_str!("../../../book/src/scenarios.md")]
    mod scenarios {}
}
