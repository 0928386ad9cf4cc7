mod common;

use common::*;
use hjnet::network::{build_network, ArcSpec, VertexSpec};
use hjnet::prelude::*;
use hjnet::scheme::{solve_on_arc, Minimizer};

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn assert_arcs_decouple(p: &Problem, pair: StepPair) {
    let sol = solve(p, pair, &SolverConfig::default()).unwrap();
    for arc in 0..p.network().arcs().len() {
        let alone = solve_on_arc(p, &sol, arc, Minimizer::CellGolden).unwrap();
        for (n, w) in alone.iter().enumerate() {
            let gap = max_gap(w, &sol.arc_values(arc, n));
            assert!(gap <= 1e-12, "arc {arc}, level {n}: {gap}");
        }
    }
}

#[test]
fn triangle_arcs_decouple() {
    assert_arcs_decouple(&triangle_benchmark(), StepPair::new(0.05, 0.025));
}

#[test]
fn traffic_circle_arcs_decouple() {
    assert_arcs_decouple(&traffic_benchmark(1.0), DtRule::power_default().pair(0.05));
}

#[test]
fn potential_arcs_decouple() {
    let p = hjnet::scenario::load_scenario("triangle_potential").unwrap().problem().unwrap();
    assert_arcs_decouple(&p, DtRule::power_default().pair(0.05));
}

fn potential_triangle(flip: bool) -> Problem {
    let g2 = if flip {
        ArcSpec::segment("g2", "v3", "v1")
    } else {
        ArcSpec::segment("g2", "v1", "v3")
    };
    let net = build_network(
        vec![
            VertexSpec::new("v1", 0.0, 0.0),
            VertexSpec::new("v2", 1.0, 0.0),
            VertexSpec::new("v3", 0.5, 0.5),
        ],
        vec![ArcSpec::segment("g1", "v1", "v2"), g2, ArcSpec::segment("g3", "v2", "v3")],
    )
    .unwrap();
    Problem::builder(net)
        .uniform_cost(QuadraticCost::target([0.8, 0.1]))
        .initial(InitialDatum::from_fn(|x| x[0] - 0.5 * x[1]))
        .uniform_limiter(0.0)
        .beta0(6.0)
        .horizon(0.7)
        .build()
        .unwrap()
}

#[test]
fn reversing_an_arc_gives_the_same_solution() {
    let pair = StepPair::new(0.05, 0.05);
    let (p, q) = (potential_triangle(false), potential_triangle(true));
    let (a, b) = (solve(&p, pair, &SolverConfig::default()).unwrap(), solve(&q, pair, &SolverConfig::default()).unwrap());
    assert_eq!(a.n_steps(), b.n_steps());
    for n in 0..=a.n_steps() {
        for arc in [0, 2] {
            assert!(max_gap(&a.arc_values(arc, n), &b.arc_values(arc, n)) <= 1e-10);
        }
        let mut flipped = b.arc_values(1, n);
        flipped.reverse();
        let gap = max_gap(&a.arc_values(1, n), &flipped);
        assert!(gap <= 1e-10, "level {n}: {gap}");
    }
}

#[test]
fn polyline_arc_matches_arc_length_solution() {
    // a bent arc of length 2 between two vertices joined by a straight arc
    let net = build_network(
        vec![VertexSpec::new("a", 0.0, 0.0), VertexSpec::new("b", 1.0, 0.0)],
        vec![
            ArcSpec::segment("straight", "a", "b"),
            ArcSpec {
                points: Some(vec![[0.0, 0.0], [0.0, 0.5], [1.0, 0.5], [1.0, 0.0]]),
                ..ArcSpec::segment("bent", "a", "b")
            },
        ],
    )
    .unwrap();
    assert!((net.arc(1).length - 2.0).abs() < 1e-15);
    let p = Problem::builder(net)
        .uniform_cost(QuadraticCost::kinetic())
        .uniform_limiter(-2.0)
        .horizon(1.0)
        .build()
        .unwrap();
    let sol = solve(&p, StepPair::new(0.02, 0.01), &SolverConfig::default()).unwrap();
    let r = error_norms(&sol, &UniformFluxExact::new(-2.0)).unwrap();
    assert!(r.e_inf < 0.02, "{r:?}");
}

#[test]
fn zero_horizon_returns_initial_datum() {
    let p = traffic_named("traffic_circle", 0.0);
    let sol = solve(&p, StepPair::new(0.1, 0.1), &SolverConfig::default()).unwrap();
    assert_eq!(sol.n_steps(), 0);
    for v in &sol.levels[0].vertex {
        assert_eq!(*v, 0.0);
    }
}
