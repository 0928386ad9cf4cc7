use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use super::invariants::check_invariants;
use super::operator::{apply_arc_operator, vertex_update, Branch, Minimizer};
use super::problem::Problem;
use super::SchemeError;
use crate::grid::{make_grids, ArcGrid, Grids, StepPair};
use crate::network::{Endpoint, Network};

/// Solver options.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConfig {
    pub minimizer: Minimizer,
    /// Keep per-step controls and vertex branches (needed for trajectories).
    pub record_steps: bool,
    /// Run the invariant diagnostics after solving and fail on a violation.
    pub check_invariants: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            minimizer: Minimizer::CellGolden,
            record_steps: true,
            check_invariants: false,
        }
    }
}

/// Values at one time level. Vertices are stored once; arc arrays hold the
/// interior nodes `1..N` only.
#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    pub vertex: Vec<f64>,
    pub interior: Vec<Vec<f64>>,
}

/// What happened during one step `n → n + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    /// Minimising control at every node of every arc; at endpoints, the
    /// control of that arc's vertex candidate.
    pub alpha: Vec<Vec<f64>>,
    /// `S_γ` evaluated at `[0, |γ|]`.
    pub endpoint_candidates: Vec<[f64; 2]>,
    pub branches: Vec<Branch>,
}

/// A complete discrete solution.
#[derive(Debug, Clone)]
pub struct Solution {
    pub grids: Grids,
    pub levels: Vec<Level>,
    /// `records[n]` describes the step from level `n` to `n + 1`.
    pub records: Vec<StepRecord>,
    /// Wall-clock time of the time loop.
    pub runtime: Duration,
    network: Network,
    ends: Vec<(usize, usize)>,
}

impl Solution {
    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn n_steps(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn time(&self, n: usize) -> f64 {
        self.grids.time.time(n)
    }

    pub fn final_level(&self) -> &Level {
        self.levels.last().expect("level 0 always exists")
    }

    /// Value at node `i` of `arc` on level `n`.
    pub fn value(&self, arc: usize, i: usize, n: usize) -> f64 {
        node_value(&self.levels[n], self.ends[arc], self.grids.arc(arc), i)
    }

    pub fn vertex_value(&self, vertex: usize, n: usize) -> f64 {
        self.levels[n].vertex[vertex]
    }

    /// Node values of `arc` on level `n`, endpoints included.
    pub fn arc_values(&self, arc: usize, n: usize) -> Vec<f64> {
        full_values(&self.levels[n], self.ends[arc], arc)
    }
}

fn node_value(level: &Level, ends: (usize, usize), grid: &ArcGrid, i: usize) -> f64 {
    if i == 0 {
        level.vertex[ends.0]
    } else if i == grid.n_cells {
        level.vertex[ends.1]
    } else {
        level.interior[grid.arc][i - 1]
    }
}

fn full_values(level: &Level, ends: (usize, usize), arc: usize) -> Vec<f64> {
    let inner = &level.interior[arc];
    let mut w = Vec::with_capacity(inner.len() + 2);
    w.push(level.vertex[ends.0]);
    w.extend_from_slice(inner);
    w.push(level.vertex[ends.1]);
    w
}

fn arc_ends(problem: &Problem) -> Vec<(usize, usize)> {
    problem.network().arcs().iter().map(|a| (a.origin, a.terminus)).collect()
}

fn initial_level(problem: &Problem, grids: &Grids) -> Level {
    let net = problem.network();
    let vertex = net.vertices().iter().map(|v| problem.initial().eval(v.coords)).collect();
    let interior = grids
        .arcs
        .iter()
        .map(|g| (1..g.n_cells).map(|i| problem.initial_on_arc(g.arc, g.node(i))).collect())
        .collect();
    Level { vertex, interior }
}

/// Sweeps every node of every arc from a frozen level.
fn sweep_arcs(
    problem: &Problem,
    grids: &Grids,
    level: &Level,
    ends: &[(usize, usize)],
    n: usize,
    minimizer: Minimizer,
) -> Result<Vec<(Vec<f64>, Vec<f64>)>, SchemeError> {
    let tau = grids.time.tau;
    grids
        .arcs
        .par_iter()
        .map(|g| {
            let w = full_values(level, ends[g.arc], g.arc);
            let model = problem.model(g.arc);
            let updates: Vec<_> = (0..=g.n_cells)
                .into_par_iter()
                .map(|i| apply_arc_operator(model, g, &w, g.node(i), tau, minimizer))
                .collect::<Result<_, _>>()?;
            for (i, u) in updates.iter().enumerate() {
                if !u.value.is_finite() {
                    return Err(SchemeError::NonFiniteValue {
                        arc: problem.network().arc(g.arc).id.clone(),
                        node: i,
                        level: n + 1,
                    });
                }
            }
            Ok(updates.iter().map(|u| (u.value, u.alpha)).unzip())
        })
        .collect()
}

/// Advances `level` (at index `n`) by one step.
pub fn step(
    problem: &Problem,
    grids: &Grids,
    level: &Level,
    n: usize,
    minimizer: Minimizer,
) -> Result<(Level, StepRecord), SchemeError> {
    let ends = arc_ends(problem);
    step_with(problem, grids, level, &ends, n, minimizer)
}

fn step_with(
    problem: &Problem,
    grids: &Grids,
    level: &Level,
    ends: &[(usize, usize)],
    n: usize,
    minimizer: Minimizer,
) -> Result<(Level, StepRecord), SchemeError> {
    let tau = grids.time.tau;
    let swept = sweep_arcs(problem, grids, level, ends, n, minimizer)?;
    let net = problem.network();
    let endpoint_candidates: Vec<[f64; 2]> = swept.iter().map(|(v, _)| [v[0], v[v.len() - 1]]).collect();
    let mut vertex = Vec::with_capacity(net.vertices().len());
    let mut branches = Vec::with_capacity(net.vertices().len());
    let mut candidates = Vec::new();
    for x in 0..net.vertices().len() {
        candidates.clear();
        candidates.extend(net.incidence(x).iter().map(|inc| {
            let k = match inc.end {
                Endpoint::Origin => 0,
                Endpoint::Terminus => 1,
            };
            (inc.arc, endpoint_candidates[inc.arc][k])
        }));
        let c = problem.limiters().get(x);
        let (v, b) = vertex_update(level.vertex[x], c, tau, &candidates);
        vertex.push(v);
        branches.push(b);
    }
    let (interior, alpha): (Vec<Vec<f64>>, Vec<Vec<f64>>) = swept
        .into_iter()
        .map(|(mut v, a)| {
            v.pop();
            v.remove(0);
            (v, a)
        })
        .unzip();
    Ok((
        Level { vertex, interior },
        StepRecord {
            alpha,
            endpoint_candidates,
            branches,
        },
    ))
}

/// Runs the scheme from `g` up to the horizon.
pub fn solve(problem: &Problem, pair: StepPair, config: &SolverConfig) -> Result<Solution, SchemeError> {
    let grids = make_grids(problem.network(), problem.horizon(), pair)?;
    let ends = arc_ends(problem);
    let start = Instant::now();
    let mut levels = Vec::with_capacity(grids.time.n_steps + 1);
    let mut records = Vec::new();
    levels.push(initial_level(problem, &grids));
    for n in 0..grids.time.n_steps {
        let (next, record) = step_with(problem, &grids, &levels[n], &ends, n, config.minimizer)?;
        levels.push(next);
        if config.record_steps {
            records.push(record);
        }
    }
    let runtime = start.elapsed();
    let solution = Solution {
        grids,
        levels,
        records,
        runtime,
        network: problem.network().clone(),
        ends,
    };
    if config.check_invariants {
        let report = check_invariants(problem, &solution);
        if !report.passes() {
            return Err(SchemeError::InvariantViolated(report.summary()));
        }
    }
    Ok(solution)
}

/// Evolves one arc alone with `S_γ`, taking its endpoint values from
/// `solution` at every level. Returns the node values of every level.
pub fn solve_on_arc(
    problem: &Problem,
    solution: &Solution,
    arc: usize,
    minimizer: Minimizer,
) -> Result<Vec<Vec<f64>>, SchemeError> {
    let grid = solution.grids.arc(arc);
    let model = problem.model(arc);
    let tau = solution.grids.time.tau;
    let (o, t) = solution.ends[arc];
    let mut w: Vec<f64> = grid.nodes().iter().map(|&s| problem.initial_on_arc(arc, s)).collect();
    w[0] = solution.vertex_value(o, 0);
    w[grid.n_cells] = solution.vertex_value(t, 0);
    let mut out = Vec::with_capacity(solution.levels.len());
    out.push(w.clone());
    for n in 0..solution.n_steps() {
        let mut next = Vec::with_capacity(w.len());
        next.push(solution.vertex_value(o, n + 1));
        for i in 1..grid.n_cells {
            let u = apply_arc_operator(model, grid, &w, grid.node(i), tau, minimizer)?;
            next.push(u.value);
        }
        next.push(solution.vertex_value(t, n + 1));
        w = next;
        out.push(w.clone());
    }
    Ok(out)
}
