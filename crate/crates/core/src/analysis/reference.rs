use super::AnalysisError;
use crate::grid::{ArcGrid, StepPair};
use crate::network::{Network, Point};
use crate::scheme::{solve, Problem, Solution, SolverConfig};

/// A point of the space-time grid handed to a [`Reference`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefPoint {
    pub arc: usize,
    pub s: f64,
    pub length: f64,
    pub x: Point,
    pub t: f64,
}

/// Something to measure errors against. `None` means undefined there.
pub trait Reference: Sync {
    fn eval(&self, at: &RefPoint) -> Option<f64>;
}

impl<F> Reference for F
where
    F: Fn(&RefPoint) -> Option<f64> + Sync,
{
    fn eval(&self, at: &RefPoint) -> Option<f64> {
        self(at)
    }
}

/// `√(2|c|)·d + c·t` with `d` the arc-length distance to the nearest
/// vertex: the solution for `L = λ²/2`, `g ≡ 0` and the same limiter `c` at
/// every vertex, valid once `t ≥ d/√(2|c|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformFluxExact {
    pub c: f64,
}

impl UniformFluxExact {
    pub fn new(c: f64) -> Self {
        UniformFluxExact { c }
    }

    /// Value at distance `d` from the nearest vertex.
    pub fn at_distance(&self, d: f64, t: f64) -> Result<f64, AnalysisError> {
        let speed = (2.0 * self.c.abs()).sqrt();
        let min = if d == 0.0 { 0.0 } else { d / speed };
        if t < min {
            return Err(AnalysisError::OutsideValidityWindow { t, min });
        }
        Ok(speed * d + self.c * t)
    }
}

impl Reference for UniformFluxExact {
    fn eval(&self, at: &RefPoint) -> Option<f64> {
        let d = at.s.min(at.length - at.s);
        self.at_distance(d, at.t).ok()
    }
}

/// Distance from `x` to the nearest vertex along the arc that carries it.
fn distance_to_vertex(network: &Network, x: Point) -> Option<f64> {
    let tol = 1e-9;
    let mut best: Option<f64> = None;
    for arc in network.arcs() {
        let pts = arc.geometry.points();
        let mut start = 0.0;
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let seg = [b[0] - a[0], b[1] - a[1]];
            let len = (seg[0] * seg[0] + seg[1] * seg[1]).sqrt();
            let u = (((x[0] - a[0]) * seg[0] + (x[1] - a[1]) * seg[1]) / (len * len)).clamp(0.0, 1.0);
            let p = [a[0] + u * seg[0], a[1] + u * seg[1]];
            if ((p[0] - x[0]).powi(2) + (p[1] - x[1]).powi(2)).sqrt() <= tol {
                let s = start + u * len;
                let d = s.min(arc.length - s);
                best = Some(best.map_or(d, |b: f64| b.min(d)));
            }
            start += len;
        }
    }
    best
}

/// The closed-form solution of the triangle benchmark (`L = λ²/2`,
/// `g ≡ 0`, uniform limiter `c`) at the physical point `x`.
pub fn exact_solution_test1(network: &Network, x: Point, t: f64, c: f64) -> Result<f64, AnalysisError> {
    let d = distance_to_vertex(network, x).ok_or(AnalysisError::PointOffNetwork(x[0], x[1]))?;
    UniformFluxExact::new(c).at_distance(d, t)
}

/// Final-time values of a finer solve, interpolated linearly in `s`.
#[derive(Debug, Clone)]
pub struct FineReference {
    horizon: f64,
    grids: Vec<ArcGrid>,
    values: Vec<Vec<f64>>,
    pair: StepPair,
}

impl FineReference {
    pub fn from_solution(solution: &Solution) -> Self {
        let n = solution.n_steps();
        FineReference {
            horizon: solution.time(n),
            grids: solution.grids.arcs.clone(),
            values: solution.grids.arcs.iter().map(|g| solution.arc_values(g.arc, n)).collect(),
            pair: solution.grids.pair,
        }
    }

    pub fn pair(&self) -> StepPair {
        self.pair
    }
}

impl Reference for FineReference {
    fn eval(&self, at: &RefPoint) -> Option<f64> {
        if (at.t - self.horizon).abs() > 1e-12 * self.horizon.max(1.0) {
            return None;
        }
        let g = self.grids.get(at.arc)?;
        g.interpolate(&self.values[at.arc], at.s).ok()
    }
}

/// Solves once at `fine` and returns the interpolated final level. Every
/// entry of `ladder` must be strictly coarser than `fine.dx`; a ratio under
/// 8 only warns.
pub fn reference_from_fine_grid(
    problem: &Problem,
    fine: StepPair,
    ladder: &[f64],
    config: &SolverConfig,
) -> Result<FineReference, AnalysisError> {
    if let Some(&rung) = ladder.iter().find(|&&dx| dx <= fine.dx) {
        return Err(AnalysisError::FineGridTooCoarse { fine: fine.dx, rung });
    }
    let coarsest_fine = ladder.iter().copied().fold(f64::INFINITY, f64::min);
    if coarsest_fine < 8.0 * fine.dx {
        log::warn!("reference dx = {} is less than 8 times finer than dx = {coarsest_fine}", fine.dx);
    }
    let config = SolverConfig {
        record_steps: false,
        ..*config
    };
    let sol = solve(problem, fine, &config)?;
    Ok(FineReference::from_solution(&sol))
}
