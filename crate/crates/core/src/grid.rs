//! Space and time grids and the piecewise-linear interpolation operator.
//!
//! Every arc gets its own uniform grid with `N = ⌈|γ|/Δx⌉` cells, so the
//! actual spacing `h = |γ|/N` never exceeds `Δx` and the last node sits
//! exactly on `|γ|`. Time is split the same way: `τ = T/⌈T/Δt⌉`.

use serde::Serialize;
use thiserror::Error;

use crate::network::Network;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("steps must be positive and finite (dx = {dx}, dt = {dt})")]
    NonPositiveStep { dx: f64, dt: f64 },
    #[error("dx = {dx} is not below the shortest arc length {min_length}")]
    SpaceStepTooLarge { dx: f64, min_length: f64 },
    #[error("dt = {dt} is not below the horizon T = {horizon}")]
    TimeStepTooLarge { dt: f64, horizon: f64 },
    #[error("horizon must be finite and non-negative, got {0}")]
    InvalidHorizon(f64),
    #[error("s = {s} lies outside [0, {length}]")]
    OutOfRange { s: f64, length: f64 },
    #[error("expected {expected} node values, got {got}")]
    ValueCount { expected: usize, got: usize },
}

/// Nominal space and time steps `(Δx, Δt)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepPair {
    pub dx: f64,
    pub dt: f64,
}

impl StepPair {
    pub fn new(dx: f64, dt: f64) -> Self {
        StepPair { dx, dt }
    }

    /// `Δx ≤ Δt`, the hypothesis of the convergence theory.
    pub fn strictly_admissible(&self) -> bool {
        self.dx <= self.dt
    }
}

/// Uniform grid on one arc.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArcGrid {
    pub arc: usize,
    pub length: f64,
    pub n_cells: usize,
    pub spacing: f64,
}

impl ArcGrid {
    /// `⌈length/dx⌉` cells of equal size.
    pub fn new(arc: usize, length: f64, dx: f64) -> Self {
        let n_cells = ((length / dx).ceil() as usize).max(1);
        ArcGrid {
            arc,
            length,
            n_cells,
            spacing: length / n_cells as f64,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.n_cells + 1
    }

    /// `s_i = i·|γ|/N`, with `s_N = |γ|` exactly.
    pub fn node(&self, i: usize) -> f64 {
        debug_assert!(i <= self.n_cells);
        if i == self.n_cells {
            self.length
        } else {
            self.length * i as f64 / self.n_cells as f64
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n_cells).map(|i| self.node(i)).collect()
    }

    /// Cell `j` (between nodes `j` and `j+1`) holding `s`, and the local
    /// coordinate `θ ∈ [0, 1]`. A point on a node belongs to the cell on its
    /// left, except `s = 0`.
    pub fn locate(&self, s: f64) -> (usize, f64) {
        let n = self.n_cells;
        let x = s / self.length * n as f64;
        let mut j = (x.ceil() as usize).saturating_sub(1).min(n - 1);
        // guard against rounding in the division above
        if s > self.node(j + 1) && j + 1 < n {
            j += 1;
        } else if j > 0 && s <= self.node(j) {
            j -= 1;
        }
        let (a, b) = (self.node(j), self.node(j + 1));
        let theta = ((s - a) / (b - a)).clamp(0.0, 1.0);
        (j, theta)
    }

    /// `I[w](s)` with bounds checks.
    pub fn interpolate(&self, w: &[f64], s: f64) -> Result<f64, GridError> {
        if w.len() != self.n_nodes() {
            return Err(GridError::ValueCount {
                expected: self.n_nodes(),
                got: w.len(),
            });
        }
        if !(0.0..=self.length).contains(&s) {
            return Err(GridError::OutOfRange { s, length: self.length });
        }
        Ok(self.interpolate_unchecked(w, s))
    }

    /// `I[w](s)` for `s ∈ [0, |γ|]` and `w` with one value per node.
    pub fn interpolate_unchecked(&self, w: &[f64], s: f64) -> f64 {
        let (j, theta) = self.locate(s);
        lerp(w[j], w[j + 1], theta)
    }
}

/// `a + θ(b − a)`, returning the node values exactly at `θ ∈ {0, 1}` and
/// the common value exactly when `a = b`.
#[inline]
pub fn lerp(a: f64, b: f64, theta: f64) -> f64 {
    if theta >= 1.0 {
        b
    } else {
        a + theta * (b - a)
    }
}

/// Uniform partition of `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeGrid {
    pub horizon: f64,
    pub n_steps: usize,
    pub tau: f64,
}

impl TimeGrid {
    pub fn new(horizon: f64, dt: f64) -> Self {
        let n_steps = (horizon / dt).ceil() as usize;
        let tau = if n_steps == 0 { dt } else { horizon / n_steps as f64 };
        TimeGrid { horizon, n_steps, tau }
    }

    /// `t_n = n·T/N_T`, with `t_{N_T} = T` exactly.
    pub fn time(&self, n: usize) -> f64 {
        if n == self.n_steps {
            self.horizon
        } else {
            self.horizon * n as f64 / self.n_steps as f64
        }
    }
}

/// All grids of one discretisation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grids {
    pub pair: StepPair,
    pub arcs: Vec<ArcGrid>,
    pub time: TimeGrid,
}

impl Grids {
    pub fn arc(&self, arc: usize) -> &ArcGrid {
        &self.arcs[arc]
    }

    /// Number of distinct grid points: vertices once, plus interior nodes.
    pub fn distinct_nodes(&self, network: &Network) -> usize {
        network.vertices().len() + self.arcs.iter().map(|g| g.n_cells - 1).sum::<usize>()
    }
}

/// Builds one [`ArcGrid`] per arc and the time grid.
///
/// `T = 0` yields a grid with no steps. A pair with `Δx > Δt` is accepted
/// with a warning.
pub fn make_grids(network: &Network, horizon: f64, pair: StepPair) -> Result<Grids, GridError> {
    let StepPair { dx, dt } = pair;
    if !(dx > 0.0 && dt > 0.0 && dx.is_finite() && dt.is_finite()) {
        return Err(GridError::NonPositiveStep { dx, dt });
    }
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(GridError::InvalidHorizon(horizon));
    }
    let min_length = network.min_arc_length();
    if dx >= min_length {
        return Err(GridError::SpaceStepTooLarge { dx, min_length });
    }
    if horizon > 0.0 && dt >= horizon {
        return Err(GridError::TimeStepTooLarge { dt, horizon });
    }
    if !pair.strictly_admissible() {
        log::warn!("step pair (dx = {dx}, dt = {dt}) has dx > dt; outside the convergence hypotheses");
    }
    let arcs = network
        .arcs()
        .iter()
        .enumerate()
        .map(|(k, a)| ArcGrid::new(k, a.length, dx))
        .collect();
    Ok(Grids {
        pair,
        arcs,
        time: TimeGrid::new(horizon, dt),
    })
}
