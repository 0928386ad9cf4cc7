use serde::Serialize;

use super::reference::{RefPoint, Reference};
use super::AnalysisError;
use crate::scheme::Solution;

/// Errors of one solve at the final time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorReport {
    pub e_inf: f64,
    pub e_1: f64,
    pub dx: f64,
    pub dt: f64,
    pub runtime_seconds: f64,
    pub courant: f64,
}

/// `max |w(s_{i+1}) − w(s_i)| / (s_{i+1} − s_i)`.
pub fn discrete_lipschitz(nodes: &[f64], values: &[f64]) -> Result<f64, AnalysisError> {
    if nodes.len() < 2 || nodes.len() != values.len() {
        return Err(AnalysisError::TooFewNodes(nodes.len().min(values.len())));
    }
    Ok(nodes
        .windows(2)
        .zip(values.windows(2))
        .map(|(s, w)| (w[1] - w[0]).abs() / (s[1] - s[0]))
        .fold(0.0, f64::max))
}

/// `ν = max slope · Δt/Δx` at the final level, with the nominal steps.
pub fn courant_number(solution: &Solution) -> f64 {
    let n = solution.n_steps();
    let slope = solution
        .grids
        .arcs
        .iter()
        .map(|g| discrete_lipschitz(&g.nodes(), &solution.arc_values(g.arc, n)).unwrap_or(0.0))
        .fold(0.0, f64::max);
    slope * solution.grids.pair.dt / solution.grids.pair.dx
}

/// `E∞` and `E¹ = Σ|err| Δx` over the final level, each vertex counted once.
pub fn error_norms(solution: &Solution, reference: &dyn Reference) -> Result<ErrorReport, AnalysisError> {
    let net = solution.network();
    let n = solution.n_steps();
    let t = solution.time(n);
    let mut e_inf: f64 = 0.0;
    let mut sum = 0.0;
    let mut add = |arc: usize, s: f64, value: f64| -> Result<(), AnalysisError> {
        let a = net.arc(arc);
        let p = RefPoint {
            arc,
            s,
            length: a.length,
            x: a.geometry.point_at(s),
            t,
        };
        let exact = reference.eval(&p).ok_or_else(|| AnalysisError::ReferenceUndefined {
            arc: a.id.clone(),
            s,
            t,
        })?;
        let err = (value - exact).abs();
        e_inf = e_inf.max(err);
        sum += err;
        Ok(())
    };
    for x in 0..net.vertices().len() {
        let inc = net.incidence(x)[0];
        let s = inc.end.parameter(net.arc(inc.arc).length);
        add(inc.arc, s, solution.vertex_value(x, n))?;
    }
    for g in &solution.grids.arcs {
        for i in 1..g.n_cells {
            add(g.arc, g.node(i), solution.value(g.arc, i, n))?;
        }
    }
    let pair = solution.grids.pair;
    Ok(ErrorReport {
        e_inf,
        e_1: sum * pair.dx,
        dx: pair.dx,
        dt: pair.dt,
        runtime_seconds: solution.runtime.as_secs_f64(),
        courant: courant_number(solution),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lipschitz_examples() {
        let nodes = [0.0, 0.25, 0.5, 0.75, 1.0];
        let lin: Vec<f64> = nodes.iter().map(|s| 2.0 * s).collect();
        assert_eq!(discrete_lipschitz(&nodes, &lin).unwrap(), 2.0);
        assert_eq!(discrete_lipschitz(&nodes, &[3.0; 5]).unwrap(), 0.0);
        assert_eq!(discrete_lipschitz(&[0.0, 0.5, 1.0], &[0.0, 1.0, 0.0]).unwrap(), 2.0);
        assert_eq!(discrete_lipschitz(&[0.0], &[1.0]), Err(AnalysisError::TooFewNodes(1)));
    }
}
