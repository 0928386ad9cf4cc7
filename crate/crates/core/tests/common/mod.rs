//! Fixtures and checks shared by the integration tests and the acceptance
//! binary.
#![allow(dead_code)]

use std::sync::Arc;
use std::time::{Duration, Instant};

use hjnet::analysis::discrete_lipschitz;
use hjnet::grid::ArcGrid;
use hjnet::hamiltonian::{ArcModel, PotentialTerm, QuadraticCost, Sampling};
use hjnet::network::{build_network, ArcSpec, Network, Point, VertexSpec};
use hjnet::prelude::*;
use hjnet::scheme::{apply_arc_operator, LimiterChoice, Minimizer};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

/// Published errors on the triangle: `Δx`, `E∞`, `E¹` with `Δt = Δx/2`.
pub const HALF_DX_TABLE: [(f64, f64, f64); 5] = [
    (0.1, 3.37e-2, 1.38e-2),
    (0.05, 1.68e-2, 6.58e-3),
    (0.025, 8.44e-3, 3.25e-3),
    (0.0125, 4.22e-3, 1.61e-3),
    (0.00625, 2.11e-3, 8.15e-4),
];

/// Published errors on the triangle with `Δt = Δx^{4/5}/2`.
pub const POWER_RULE_TABLE: [(f64, f64, f64); 5] = [
    (0.1, 1.62e-1, 3.99e-2),
    (0.05, 1.18e-1, 2.14e-2),
    (0.025, 6.52e-2, 7.86e-3),
    (0.0125, 4.16e-2, 3.65e-3),
    (0.00625, 2.67e-2, 1.58e-3),
];

/// Published maximal admissible limiters of the traffic circle.
pub const TRAFFIC_LIMITERS: [f64; 8] = [2.0, 1.0, 0.0, 0.5, 0.0, 0.5, 2.0, 1.0];

/// Same list for the two-target variant.
pub const TWO_TARGET_LIMITERS: [f64; 8] = [0.5, 0.0, 0.0, 0.5, 0.0, 0.5, 0.5, 0.0];

pub fn triangle_benchmark() -> Problem {
    hjnet::scenario::load_scenario("triangle_quadratic").unwrap().problem().unwrap()
}

/// The traffic circle with target (1, 1), at horizon `t`.
pub fn traffic_benchmark(t: f64) -> Problem {
    traffic_named("traffic_circle", t)
}

pub fn traffic_named(name: &str, t: f64) -> Problem {
    hjnet::scenario::load_scenario(name)
        .unwrap()
        .problem()
        .unwrap()
        .with_horizon(t)
        .unwrap()
}

pub fn ladder(dx0: f64, rungs: usize) -> Vec<f64> {
    (0..rungs).map(|k| dx0 / 2f64.powi(k as i32)).collect()
}

/// `E_ours / E_published`.
pub fn ratio(ours: f64, published: f64) -> f64 {
    ours / published
}

pub fn within_factor(ours: f64, published: f64, factor: f64) -> bool {
    let r = ratio(ours, published);
    r <= factor && r >= 1.0 / factor
}

// ---------------------------------------------------------------------------
// closed-form oracles

/// Squared distance from `p` to the segment `[a, b]`.
pub fn segment_distance2(a: Point, b: Point, p: Point) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let u = (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / (d[0] * d[0] + d[1] * d[1])).clamp(0.0, 1.0);
    let q = [a[0] + u * d[0] - p[0], a[1] + u * d[1] - p[1]];
    q[0] * q[0] + q[1] * q[1]
}

/// `c_x = min` over incident straight arcs of `min_s |γ(s) − target(γ)|²`,
/// the largest admissible limiter for `H = μ²/2 − |x − target|²`.
pub fn segment_limiters(net: &Network, target: impl Fn(&str) -> Point) -> Vec<f64> {
    let critical: Vec<f64> = net
        .arcs()
        .iter()
        .map(|a| {
            let (o, t) = (net.vertex(a.origin).coords, net.vertex(a.terminus).coords);
            segment_distance2(o, t, target(&a.id))
        })
        .collect();
    (0..net.vertices().len())
        .map(|x| {
            net.incidence(x)
                .iter()
                .map(|inc| critical[inc.arc])
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// Arcs of the traffic circle that use the second target.
pub const SECOND_TARGET_ARCS: [&str; 8] = ["g1", "g4", "g5", "g6", "g8", "g9", "g11", "g12"];

/// Worked modification example: `H̃ = μ²/2` extended with slope 3 beyond
/// `|μ| = 2`.
pub fn worked_h(m: f64) -> f64 {
    if m.abs() <= 2.0 {
        0.5 * m * m
    } else {
        2.0 + 3.0 * (m.abs() - 2.0)
    }
}

/// Conjugate of [`worked_h`].
pub fn worked_l(l: f64) -> f64 {
    if l.abs() <= 2.0 {
        0.5 * l * l
    } else if l.abs() <= 3.0 {
        2.0 * l.abs() - 2.0
    } else {
        f64::INFINITY
    }
}

// ---------------------------------------------------------------------------
// randomized cases

/// One straight arc of the given length along the first axis.
pub fn single_arc(length: f64) -> Network {
    build_network(
        vec![VertexSpec::new("a", 0.0, 0.0), VertexSpec::new("b", length, 0.0)],
        vec![ArcSpec::segment("e", "a", "b")],
    )
    .unwrap()
}

#[derive(Debug, Clone)]
pub struct OperatorCase {
    pub length: f64,
    pub n_cells: usize,
    pub tau: f64,
    pub beta0: f64,
    pub weight: f64,
    pub center: Point,
    pub values: Vec<f64>,
    pub bump: Vec<f64>,
    pub shift: f64,
    pub node: usize,
}

pub fn operator_case() -> impl Strategy<Value = OperatorCase> {
    (0.5f64..2.0, 2usize..30, 0.005f64..0.5, 1.0f64..10.0, 0.0f64..5.0, -1.0f64..2.0, -1.0f64..1.0)
        .prop_flat_map(|(length, n_cells, tau, beta0, weight, cx, cy)| {
            let n = n_cells + 1;
            (
                Just((length, n_cells, tau, beta0, weight, [cx, cy])),
                prop::collection::vec(-5.0f64..5.0, n),
                prop::collection::vec(0.0f64..2.0, n),
                -10.0f64..10.0,
                0..n,
            )
        })
        .prop_map(
            |((length, n_cells, tau, beta0, weight, center), values, bump, shift, node)| OperatorCase {
                length,
                n_cells,
                tau,
                beta0,
                weight,
                center,
                values,
                bump,
                shift,
                node,
            },
        )
}

impl OperatorCase {
    fn setup(&self) -> (ArcModel, ArcGrid) {
        let net = single_arc(self.length);
        let cost = QuadraticCost::with_potential(vec![PotentialTerm::Distance {
            weight: self.weight,
            center: self.center,
        }]);
        let grid = ArcGrid::new(0, self.length, self.length / self.n_cells as f64 * (1.0 + 1e-12));
        let model = ArcModel::new(
            0,
            net.arc(0),
            Arc::new(cost),
            self.beta0,
            Sampling::for_spacing(self.length, grid.spacing),
        );
        (model, grid)
    }

    fn apply(&self, model: &ArcModel, grid: &ArcGrid, w: &[f64]) -> f64 {
        let s = grid.node(self.node);
        apply_arc_operator(model, grid, w, s, self.tau, Minimizer::CellGolden)
            .unwrap()
            .value
    }
}

/// `w ≤ w'` implies `S[w] ≤ S[w']`, up to `1e-12`.
pub fn check_monotone(c: &OperatorCase) -> Result<(), TestCaseError> {
    let (model, grid) = c.setup();
    let upper: Vec<f64> = c.values.iter().zip(&c.bump).map(|(v, b)| v + b).collect();
    let lo = c.apply(&model, &grid, &c.values);
    let hi = c.apply(&model, &grid, &upper);
    prop_assert!(lo <= hi + 1e-12, "S[w] = {lo} > S[w'] = {hi}");
    Ok(())
}

/// `S[w + k] = S[w] + k`, up to `1e-12`.
pub fn check_constant_shift(c: &OperatorCase) -> Result<(), TestCaseError> {
    let (model, grid) = c.setup();
    let shifted: Vec<f64> = c.values.iter().map(|v| v + c.shift).collect();
    let base = c.apply(&model, &grid, &c.values);
    let moved = c.apply(&model, &grid, &shifted);
    prop_assert!((moved - base - c.shift).abs() <= 1e-12, "shift error {}", moved - base - c.shift);
    Ok(())
}

#[derive(Debug, Clone)]
pub struct InterpCase {
    pub length: f64,
    pub n_cells: usize,
    pub values: Vec<f64>,
    pub points: Vec<(f64, f64)>,
}

pub fn interp_case() -> impl Strategy<Value = InterpCase> {
    (0.1f64..5.0, 1usize..40).prop_flat_map(|(length, n_cells)| {
        (
            Just((length, n_cells)),
            prop::collection::vec(-10.0f64..10.0, n_cells + 1),
            prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 1..20),
        )
            .prop_map(|((length, n_cells), values, points)| InterpCase {
                length,
                n_cells,
                values,
                points,
            })
    })
}

/// The interpolant is Lipschitz with the discrete constant of its nodes.
pub fn check_interpolation_lipschitz(c: &InterpCase) -> Result<(), TestCaseError> {
    let grid = ArcGrid::new(0, c.length, c.length / c.n_cells as f64 * (1.0 + 1e-12));
    let values = &c.values[..grid.n_nodes()];
    let lip = discrete_lipschitz(&grid.nodes(), values).unwrap();
    for &(a, b) in &c.points {
        let (s1, s2) = (a * c.length, b * c.length);
        let gap = (grid.interpolate(values, s1).unwrap() - grid.interpolate(values, s2).unwrap()).abs();
        prop_assert!(gap <= lip * (s1 - s2).abs() * (1.0 + 1e-12) + 1e-14, "gap {gap}, bound {}", lip * (s1 - s2).abs());
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct SolveCase {
    pub weight: f64,
    pub center: Point,
    pub slack: [f64; 3],
    pub gradient: [f64; 2],
    pub horizon: f64,
    pub dx: f64,
    pub half_dx: bool,
}

pub fn solve_case() -> impl Strategy<Value = SolveCase> {
    (
        0.0f64..3.0,
        (-0.5f64..1.5, -0.5f64..1.0),
        (0.0f64..3.0, 0.0f64..3.0, 0.0f64..3.0),
        (-1.0f64..1.0, -1.0f64..1.0),
        0.2f64..1.0,
        0.1f64..0.25,
        any::<bool>(),
    )
        .prop_map(|(weight, (cx, cy), (a, b, c), (gx, gy), horizon, dx, half_dx)| SolveCase {
            weight,
            center: [cx, cy],
            slack: [a, b, c],
            gradient: [gx, gy],
            horizon,
            dx,
            half_dx,
        })
}

impl SolveCase {
    /// Triangle with limiters `c_x = max admissible − slack_x`.
    pub fn problem(&self) -> Problem {
        let cost = QuadraticCost::with_potential(vec![PotentialTerm::Distance {
            weight: self.weight,
            center: self.center,
        }]);
        let [gx, gy] = self.gradient;
        let g = InitialDatum::from_fn(move |x| gx * x[0] + gy * x[1]);
        let base = Problem::builder(hjnet::network::triangle())
            .uniform_cost(cost.clone())
            .initial(g.clone())
            .horizon(self.horizon)
            .build()
            .unwrap();
        let values = base
            .limiters()
            .values()
            .iter()
            .zip(self.slack)
            .map(|(c, d)| c - d)
            .collect();
        Problem::builder(hjnet::network::triangle())
            .uniform_cost(cost)
            .initial(g)
            .horizon(self.horizon)
            .limiters(LimiterChoice::Values(values))
            .build()
            .unwrap()
    }

    pub fn pair(&self) -> StepPair {
        let rule = if self.half_dx {
            DtRule::HalfDx
        } else {
            DtRule::power_default()
        };
        rule.pair(self.dx)
    }
}

/// `v(x, t_{n+1}) − v(x, t_n) ≤ c_x τ` as evaluated in floating point, and
/// every arc reads the stored vertex value at its endpoints.
pub fn check_vertex_rules(c: &SolveCase) -> Result<(), TestCaseError> {
    let p = c.problem();
    let config = SolverConfig {
        record_steps: false,
        ..SolverConfig::default()
    };
    let sol = solve(&p, c.pair(), &config).unwrap();
    let tau = sol.grids.time.tau;
    let net = p.network();
    for n in 0..sol.n_steps() {
        for x in 0..net.vertices().len() {
            let (prev, next) = (sol.vertex_value(x, n), sol.vertex_value(x, n + 1));
            let cx = p.limiters().get(x);
            prop_assert!(next <= prev + cx * tau, "vertex {x}, step {n}: {next} > {prev} + {cx}·{tau}");
        }
    }
    for n in 0..=sol.n_steps() {
        for (k, a) in net.arcs().iter().enumerate() {
            let w = sol.arc_values(k, n);
            prop_assert_eq!(w[0].to_bits(), sol.vertex_value(a.origin, n).to_bits());
            prop_assert_eq!(w[w.len() - 1].to_bits(), sol.vertex_value(a.terminus, n).to_bits());
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// timing

/// Mean wall time of `f`, repeated until at least 50 ms have elapsed.
pub fn time_repeated(mut f: impl FnMut()) -> Duration {
    let start = Instant::now();
    let mut runs = 0u32;
    while runs == 0 || start.elapsed() < Duration::from_millis(50) {
        f();
        runs += 1;
    }
    start.elapsed() / runs
}
