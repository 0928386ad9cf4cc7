use serde::Serialize;

use super::problem::Problem;
use super::solver::Solution;

/// Relative slack of the Lipschitz and time-regularity bounds.
pub const INVARIANT_RTOL: f64 = 1e-6;

/// Runtime diagnostics of a solution against the a-priori bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantReport {
    /// `max_k Lip(v∘γ(·, t_k)) / ((1 + t_k) ℓ₀)`.
    pub equi_lipschitz_ratio: f64,
    /// `max |v(s, t_{n+1}) − v(s, t_n)| / ([(1 + T) ℓ₀ β₀ + max|L|] τ)`.
    pub time_regularity_ratio: f64,
    /// Vertex steps with `v(x, t_{n+1}) > v(x, t_n) + c_x τ`.
    pub vertex_slope_violations: usize,
    /// Recorded controls with `|α| > β₀` or a foot point off the arc.
    pub control_violations: usize,
    pub nonfinite_values: usize,
}

impl InvariantReport {
    pub fn passes(&self) -> bool {
        self.equi_lipschitz_ratio <= 1.0 + INVARIANT_RTOL
            && self.time_regularity_ratio <= 1.0 + INVARIANT_RTOL
            && self.vertex_slope_violations == 0
            && self.control_violations == 0
            && self.nonfinite_values == 0
    }

    pub fn summary(&self) -> String {
        format!(
            "equi-Lipschitz ratio {:.6}, time-regularity ratio {:.6}, {} vertex slope violations, {} control violations, {} non-finite values",
            self.equi_lipschitz_ratio,
            self.time_regularity_ratio,
            self.vertex_slope_violations,
            self.control_violations,
            self.nonfinite_values
        )
    }
}

/// Checks every level of `solution`.
pub fn check_invariants(problem: &Problem, solution: &Solution) -> InvariantReport {
    let grids = &solution.grids;
    let tau = grids.time.tau;
    let ell0 = problem.ell0();
    let beta0 = problem.beta0();
    let time_bound = ((1.0 + problem.horizon()) * ell0 * beta0 + problem.max_abs_l()) * tau;

    let mut lip_ratio: f64 = 0.0;
    let mut time_ratio: f64 = 0.0;
    let mut nonfinite = 0;
    for n in 0..solution.levels.len() {
        let bound = (1.0 + solution.time(n)) * ell0;
        for g in &grids.arcs {
            let w = solution.arc_values(g.arc, n);
            nonfinite += w.iter().filter(|v| !v.is_finite()).count();
            let lip = w
                .windows(2)
                .enumerate()
                .map(|(i, p)| (p[1] - p[0]).abs() / (g.node(i + 1) - g.node(i)))
                .fold(0.0, f64::max);
            lip_ratio = lip_ratio.max(lip / bound);
            if n > 0 {
                let prev = solution.arc_values(g.arc, n - 1);
                let jump = w.iter().zip(&prev).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                time_ratio = time_ratio.max(jump / time_bound);
            }
        }
    }

    let mut slope_violations = 0;
    for n in 0..solution.n_steps() {
        for x in 0..problem.network().vertices().len() {
            let prev = solution.vertex_value(x, n);
            if solution.vertex_value(x, n + 1) > prev + problem.limiters().get(x) * tau {
                slope_violations += 1;
            }
        }
    }

    let mut control_violations = 0;
    for record in &solution.records {
        for g in &grids.arcs {
            let b0 = problem.model(g.arc).beta0();
            for (i, &alpha) in record.alpha[g.arc].iter().enumerate() {
                let foot = g.node(i) - tau * alpha;
                let slack = 1e-12 * g.length;
                if alpha.abs() > b0 || foot < -slack || foot > g.length + slack {
                    control_violations += 1;
                }
            }
        }
    }

    InvariantReport {
        equi_lipschitz_ratio: lip_ratio,
        time_regularity_ratio: time_ratio,
        vertex_slope_violations: slope_violations,
        control_violations,
        nonfinite_values: nonfinite,
    }
}
