use serde::Serialize;

use super::operator::Branch;
use super::problem::Problem;
use super::solver::Solution;
use super::SchemeError;
use crate::network::Endpoint;

/// Why the backward walk stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalReason {
    /// Reached an arc endpoint whose vertex value came from another arc.
    EndpointReached,
    /// Reached an arc endpoint whose vertex value came from the flux limiter.
    FluxBranch,
    TimeZero,
}

/// Optimal path recovered backwards from the recorded controls.
///
/// All vectors run forward in time: index 0 is the stopping time `t*`, the
/// last index the starting time `t₀`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteTrajectory {
    pub arc: usize,
    pub levels: Vec<usize>,
    pub times: Vec<f64>,
    /// Node indices on the arc grid.
    pub nodes: Vec<usize>,
    /// Arc parameters of the nodes.
    pub positions: Vec<f64>,
    /// Control used on each step; `controls[k]` drives `positions[k] → positions[k + 1]`.
    pub controls: Vec<f64>,
    /// `τ Σ L(ξ(tᵢ), (ξ(tᵢ) − ξ(tᵢ₋₁))/τ)`.
    pub action: f64,
    pub start_value: f64,
    pub end_value: f64,
    pub terminal_reason: TerminalReason,
}

/// Result of [`DiscreteTrajectory::check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryCheck {
    /// `max |(ξ(t) − ξ(t − τ))/τ − α|`, to compare with `h/τ`.
    pub max_control_gap: f64,
    pub control_gap_bound: f64,
    /// `max |ξ(t) − ξ(t − τ)|`, to compare with `β₀τ + h`.
    pub max_jump: f64,
    pub jump_bound: f64,
    pub action: f64,
    /// `v(ξ(t₀), t₀) − v(ξ(t*), t*) + T ℓ₀ (β₀τ + h + h/τ)`.
    pub action_bound: f64,
}

impl TrajectoryCheck {
    pub fn passes(&self) -> bool {
        self.max_control_gap <= self.control_gap_bound
            && self.max_jump <= self.jump_bound
            && self.action <= self.action_bound
    }
}

/// Relative slack for rounding in the distance bounds.
const BOUND_RTOL: f64 = 1e-12;

impl DiscreteTrajectory {
    pub fn steps(&self) -> usize {
        self.controls.len()
    }

    /// Checks the distance bounds and the action estimate.
    pub fn check(&self, problem: &Problem, solution: &Solution) -> TrajectoryCheck {
        let grid = solution.grids.arc(self.arc);
        let tau = solution.grids.time.tau;
        let h = grid.spacing;
        let model = problem.model(self.arc);
        let (beta0, ell0) = (model.beta0(), model.ell0());
        let mut gap: f64 = 0.0;
        let mut jump: f64 = 0.0;
        for k in 0..self.steps() {
            let d = self.positions[k + 1] - self.positions[k];
            jump = jump.max(d.abs());
            gap = gap.max((d / tau - self.controls[k]).abs());
        }
        let horizon = problem.horizon();
        TrajectoryCheck {
            max_control_gap: gap,
            control_gap_bound: h / tau * (1.0 + BOUND_RTOL),
            max_jump: jump,
            jump_bound: (beta0 * tau + h) * (1.0 + BOUND_RTOL),
            action: self.action,
            action_bound: self.start_value - self.end_value + horizon * ell0 * (beta0 * tau + h + h / tau),
        }
    }
}

/// Walks back from vertex `vertex` at level `level` along the arc whose
/// candidate set the vertex value there.
pub fn reconstruct_trajectory(
    problem: &Problem,
    solution: &Solution,
    vertex: usize,
    level: usize,
) -> Result<DiscreteTrajectory, SchemeError> {
    if solution.records.len() != solution.n_steps() {
        return Err(SchemeError::RecordsUnavailable);
    }
    if level == 0 || level > solution.n_steps() {
        return Err(SchemeError::LevelOutOfRange {
            level,
            max: solution.n_steps(),
        });
    }
    let net = problem.network();
    let arc = match solution.records[level - 1].branches[vertex] {
        Branch::Arc(k) => k,
        Branch::FluxLimiter => {
            return Err(SchemeError::NotArcBranch {
                vertex: net.vertex(vertex).id.clone(),
                level,
            })
        }
    };
    let a = net.arc(arc);
    let node = if a.origin == vertex { 0 } else { solution.grids.arc(arc).n_cells };
    walk(problem, solution, arc, node, level)
}

/// Walks back from node `node` of `arc` at level `level`. Endpoint nodes
/// are accepted only when this arc set the vertex value.
pub fn reconstruct_from_node(
    problem: &Problem,
    solution: &Solution,
    arc: usize,
    node: usize,
    level: usize,
) -> Result<DiscreteTrajectory, SchemeError> {
    if solution.records.len() != solution.n_steps() {
        return Err(SchemeError::RecordsUnavailable);
    }
    if level == 0 || level > solution.n_steps() {
        return Err(SchemeError::LevelOutOfRange {
            level,
            max: solution.n_steps(),
        });
    }
    let n_cells = solution.grids.arc(arc).n_cells;
    if node > n_cells {
        return Err(SchemeError::NodeOutOfRange { node, max: n_cells });
    }
    if (node == 0 || node == n_cells) && !arc_sets_vertex(problem, solution, arc, node, level) {
        let x = endpoint_vertex(problem, arc, node, n_cells);
        return Err(SchemeError::NotArcBranch {
            vertex: problem.network().vertex(x).id.clone(),
            level,
        });
    }
    walk(problem, solution, arc, node, level)
}

fn endpoint_vertex(problem: &Problem, arc: usize, node: usize, n_cells: usize) -> usize {
    let a = problem.network().arc(arc);
    a.endpoint_vertex(if node == 0 && n_cells > 0 { Endpoint::Origin } else { Endpoint::Terminus })
}

/// Whether the vertex value at this endpoint equals this arc's candidate.
fn arc_sets_vertex(problem: &Problem, solution: &Solution, arc: usize, node: usize, level: usize) -> bool {
    let n_cells = solution.grids.arc(arc).n_cells;
    let x = endpoint_vertex(problem, arc, node, n_cells);
    let record = &solution.records[level - 1];
    if record.branches[x] == Branch::FluxLimiter {
        return false;
    }
    let k = usize::from(node != 0);
    record.endpoint_candidates[arc][k] == solution.vertex_value(x, level)
}

fn walk(
    problem: &Problem,
    solution: &Solution,
    arc: usize,
    node: usize,
    level: usize,
) -> Result<DiscreteTrajectory, SchemeError> {
    let grid = solution.grids.arc(arc);
    let tau = solution.grids.time.tau;
    let model = problem.model(arc);
    let mut nodes = vec![node];
    let mut levels = vec![level];
    let mut controls = Vec::new();
    let (mut i, mut n) = (node, level);
    let reason = loop {
        if n == 0 {
            break TerminalReason::TimeZero;
        }
        let alpha = solution.records[n - 1].alpha[arc][i];
        let foot = (grid.node(i) - tau * alpha).clamp(0.0, grid.length);
        let (j, theta) = grid.locate(foot);
        let (wa, wb) = (solution.value(arc, j, n - 1), solution.value(arc, j + 1, n - 1));
        let e = if wa < wb || (wa == wb && theta <= 0.5) { j } else { j + 1 };
        controls.push(alpha);
        i = e;
        n -= 1;
        nodes.push(i);
        levels.push(n);
        if n == 0 {
            break TerminalReason::TimeZero;
        }
        if i == 0 || i == grid.n_cells {
            let x = endpoint_vertex(problem, arc, i, grid.n_cells);
            if solution.records[n - 1].branches[x] == Branch::FluxLimiter {
                break TerminalReason::FluxBranch;
            }
            if !arc_sets_vertex(problem, solution, arc, i, n) {
                break TerminalReason::EndpointReached;
            }
        }
    };
    nodes.reverse();
    levels.reverse();
    controls.reverse();
    let positions: Vec<f64> = nodes.iter().map(|&k| grid.node(k)).collect();
    let times: Vec<f64> = levels.iter().map(|&k| solution.time(k)).collect();
    let action = (1..positions.len())
        .map(|k| {
            let q = (positions[k] - positions[k - 1]) / tau;
            tau * model.eval_l(positions[k], q).to_f64()
        })
        .sum();
    let start_value = solution.value(arc, node, level);
    let end_value = solution.value(arc, nodes[0], levels[0]);
    Ok(DiscreteTrajectory {
        arc,
        levels,
        times,
        nodes,
        positions,
        controls,
        action,
        start_value,
        end_value,
        terminal_reason: reason,
    })
}
