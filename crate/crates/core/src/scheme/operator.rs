use serde::Serialize;

use super::SchemeError;
use crate::grid::{lerp, ArcGrid};
use crate::hamiltonian::ArcModel;
use crate::minimize::golden_section;

/// Control tolerance of the per-cell golden-section search.
const ALPHA_TOL: f64 = 1e-8;

/// How `S_γ` minimises over the control.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Minimizer {
    /// Golden-section search on every grid cell reachable by the foot point;
    /// the objective is convex on each cell.
    #[default]
    CellGolden,
    /// `points` uniform control samples, then a golden-section refinement
    /// between the neighbours of the best sample.
    Sampling { points: usize },
}

/// Value and minimising control of `S_γ` at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcUpdate {
    pub value: f64,
    pub alpha: f64,
}

/// Which rule produced a vertex value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// The candidate of this arc (index into the network's arcs).
    Arc(usize),
    FluxLimiter,
}

/// `S_γ[w](s) = min_α I[w](s − τα) + τ L(s, α)` over
/// `α ∈ [max((s − |γ|)/τ, −β₀), min(s/τ, β₀)]`.
///
/// `w` holds one value per node of `grid`.
pub fn apply_arc_operator(
    model: &ArcModel,
    grid: &ArcGrid,
    w: &[f64],
    s: f64,
    tau: f64,
    minimizer: Minimizer,
) -> Result<ArcUpdate, SchemeError> {
    let beta0 = model.beta0();
    let a_lo = ((s - grid.length) / tau).max(-beta0);
    let a_hi = (s / tau).min(beta0);
    if !(a_lo <= a_hi) {
        return Err(SchemeError::EmptyControlInterval { s });
    }
    let at = model.location(s);
    let cost = |alpha: f64| tau * model.eval_l_at(at, alpha).to_f64();
    let best = match minimizer {
        Minimizer::CellGolden => cell_golden(grid, w, s, tau, a_lo, a_hi, model, &cost),
        Minimizer::Sampling { points } => sampled(grid, w, s, tau, a_lo, a_hi, points, &cost),
    };
    Ok(best)
}

#[allow(clippy::too_many_arguments)]
fn cell_golden(
    grid: &ArcGrid,
    w: &[f64],
    s: f64,
    tau: f64,
    a_lo: f64,
    a_hi: f64,
    model: &ArcModel,
    cost: &dyn Fn(f64) -> f64,
) -> ArcUpdate {
    // foot points y = s − τα, so the largest control gives the leftmost foot
    let y_lo = (s - tau * a_hi).max(0.0);
    let y_hi = (s - tau * a_lo).min(grid.length);
    let (mut j_lo, t_lo) = grid.locate(y_lo);
    if t_lo == 1.0 && j_lo + 1 < grid.n_cells {
        j_lo += 1;
    }
    let j_hi = grid.locate(y_hi).0.max(j_lo);

    let rest = model.cost().rest_velocity(model.location(s), model.beta0());
    let mut cells: Vec<(f64, usize, f64, f64)> = (j_lo..=j_hi)
        .filter_map(|j| {
            let lo = ((s - grid.node(j + 1)) / tau).max(a_lo);
            let hi = ((s - grid.node(j)) / tau).min(a_hi);
            (lo <= hi).then(|| {
                let bound = w[j].min(w[j + 1]) + cost(rest.clamp(lo, hi));
                (bound, j, lo, hi)
            })
        })
        .collect();
    cells.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut best = ArcUpdate {
        value: f64::INFINITY,
        alpha: 0.0,
    };
    for (bound, j, lo, hi) in cells {
        if bound >= best.value {
            break;
        }
        let (a, b) = (grid.node(j), grid.node(j + 1));
        let (wa, wb) = (w[j], w[j + 1]);
        let f = |alpha: f64| {
            let theta = ((s - tau * alpha - a) / (b - a)).clamp(0.0, 1.0);
            lerp(wa, wb, theta) + cost(alpha)
        };
        let (alpha, value) = golden_section(f, lo, hi, ALPHA_TOL);
        if value < best.value {
            best = ArcUpdate { value, alpha };
        }
    }
    best
}

#[allow(clippy::too_many_arguments)]
fn sampled(
    grid: &ArcGrid,
    w: &[f64],
    s: f64,
    tau: f64,
    a_lo: f64,
    a_hi: f64,
    points: usize,
    cost: &dyn Fn(f64) -> f64,
) -> ArcUpdate {
    let f = |alpha: f64| {
        let y = (s - tau * alpha).clamp(0.0, grid.length);
        grid.interpolate_unchecked(w, y) + cost(alpha)
    };
    let n = points.max(2);
    let step = (a_hi - a_lo) / (n - 1) as f64;
    let mut best = (0, f64::INFINITY);
    for k in 0..n {
        let v = f(a_lo + step * k as f64);
        if v < best.1 {
            best = (k, v);
        }
    }
    let centre = a_lo + step * best.0 as f64;
    let lo = (centre - step).max(a_lo);
    let hi = (centre + step).min(a_hi);
    let (alpha, value) = golden_section(f, lo, hi, ALPHA_TOL);
    if value < best.1 {
        ArcUpdate { value, alpha }
    } else {
        ArcUpdate {
            value: best.1,
            alpha: centre,
        }
    }
}

/// `min(prev + c_x τ, min_k candidates)`.
///
/// The flux limiter wins only when strictly smaller; among equal arc
/// candidates the lowest arc index wins. `candidates` pairs an arc index
/// with its endpoint value and must be nonempty.
pub fn vertex_update(prev: f64, c: f64, tau: f64, candidates: &[(usize, f64)]) -> (f64, Branch) {
    assert!(!candidates.is_empty(), "vertex without incident arcs");
    let (arc, a) = candidates
        .iter()
        .copied()
        .reduce(|best, cand| {
            if cand.1 < best.1 || (cand.1 == best.1 && cand.0 < best.0) {
                cand
            } else {
                best
            }
        })
        .expect("nonempty");
    let flux = prev + c * tau;
    if flux < a {
        (flux, Branch::FluxLimiter)
    } else {
        (a, Branch::Arc(arc))
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::hamiltonian::{QuadraticCost, Sampling};
    use crate::network::triangle;

    fn unit_arc(beta0: f64) -> (ArcModel, ArcGrid) {
        let net = triangle();
        let arc = net.arc(0);
        let model = ArcModel::new(0, arc, Arc::new(QuadraticCost::kinetic()), beta0, Sampling::for_spacing(1.0, 0.1));
        (model, ArcGrid::new(0, 1.0, 0.1))
    }

    #[test]
    fn constant_data_is_fixed() {
        let (m, g) = unit_arc(12.0);
        let w = vec![0.7; g.n_nodes()];
        for i in 0..g.n_nodes() {
            let u = apply_arc_operator(&m, &g, &w, g.node(i), 0.05, Minimizer::CellGolden).unwrap();
            assert_eq!(u.value, 0.7);
            assert_eq!(u.alpha, 0.0);
        }
    }

    #[test]
    fn linear_data_moves_with_unit_speed() {
        let (m, g) = unit_arc(12.0);
        let w = g.nodes();
        let u = apply_arc_operator(&m, &g, &w, 0.5, 0.1, Minimizer::CellGolden).unwrap();
        assert!((u.value - 0.45).abs() < 1e-14);
        assert!((u.alpha - 1.0).abs() < 1e-7);
    }

    #[test]
    fn strategies_agree() {
        let (m, g) = unit_arc(12.0);
        let w: Vec<f64> = g.nodes().iter().map(|s| (3.0 * s).sin()).collect();
        for i in 0..g.n_nodes() {
            let s = g.node(i);
            let a = apply_arc_operator(&m, &g, &w, s, 0.05, Minimizer::CellGolden).unwrap();
            let b = apply_arc_operator(&m, &g, &w, s, 0.05, Minimizer::Sampling { points: 2001 }).unwrap();
            assert!(a.value <= b.value + 1e-14);
            assert!((a.value - b.value).abs() < 1e-6);
        }
    }

    #[test]
    fn foot_point_stays_on_arc() {
        let (m, g) = unit_arc(12.0);
        let w: Vec<f64> = g.nodes().iter().map(|s| -s).collect();
        let u = apply_arc_operator(&m, &g, &w, 1.0, 0.2, Minimizer::CellGolden).unwrap();
        let foot = 1.0 - 0.2 * u.alpha;
        assert!((0.0..=1.0).contains(&foot));
        assert!(u.alpha.abs() <= 12.0);
    }

    #[test]
    fn vertex_update_examples() {
        assert_eq!(vertex_update(1.0, -5.0, 0.1, &[(0, 1.2), (1, 0.9)]), (0.5, Branch::FluxLimiter));
        assert_eq!(vertex_update(1.0, 0.0, 0.1, &[(2, 0.3)]), (0.3, Branch::Arc(2)));
        // ties: arc wins over the limiter, lowest index among arcs
        assert_eq!(vertex_update(1.0, -1.0, 0.5, &[(3, 0.5), (1, 0.5)]), (0.5, Branch::Arc(1)));
    }
}
