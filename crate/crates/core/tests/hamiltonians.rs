mod common;

use common::*;
use hjnet::hamiltonian::{
    legendre_transform, lower_convex_envelope, modify_hamiltonian, select_momentum_interval, ArcHamiltonian,
    Location, ModifyParams, MomentumInterval, PowerCost,
};
use hjnet::network::Point;
use hjnet::prelude::*;

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
}

fn at(x: Point) -> Location {
    Location { s: 0.0, x }
}

#[test]
fn biconjugate_of_convex_samples_is_exact() {
    let mus = grid(-3.0, 3.0, 600);
    let f: Vec<f64> = mus.iter().map(|m| m.abs().powf(1.5) + 0.2 * m).collect();
    let lambdas = grid(-6.0, 6.0, 4000);
    let fstar = legendre_transform(&mus, &f, &lambdas).unwrap();
    let back = legendre_transform(&lambdas, &fstar, &mus).unwrap();
    for (k, (a, b)) in f.iter().zip(&back).enumerate().skip(50).take(500) {
        assert!((a - b).abs() < 1e-3, "at {}: {a} vs {b}", mus[k]);
    }
}

#[test]
fn biconjugate_of_nonconvex_samples_is_the_envelope() {
    let mus = grid(-2.0, 2.0, 400);
    let f: Vec<f64> = mus.iter().map(|m| 0.25 * m.powi(4) - m * m).collect();
    let pts: Vec<(f64, f64)> = mus.iter().copied().zip(f.iter().copied()).collect();
    let env = lower_convex_envelope(&pts).unwrap();
    // the slopes of the sampled envelope lie in [-4, 4]
    let lambdas = grid(-4.5, 4.5, 9000);
    let fstar = legendre_transform(&mus, &f, &lambdas).unwrap();
    let back = legendre_transform(&lambdas, &fstar, &mus).unwrap();
    for (k, m) in mus.iter().enumerate() {
        assert!((back[k] - env.eval(*m)).abs() < 1e-3, "at {m}");
        assert!(back[k] <= f[k] + 1e-12);
    }
    // flat bottom between the two wells at -1
    assert!((env.eval(0.0) + 1.0).abs() < 1e-3);
    assert!((env.eval(0.5) - env.eval(-0.5)).abs() < 1e-12);
}

#[test]
fn power_cost_pair_is_conjugate() {
    let cost = PowerCost::new(3.0, vec![]);
    let lambdas = grid(-4.0, 4.0, 8000);
    let l: Vec<f64> = lambdas.iter().map(|&v| cost.lagrangian(at([0.0, 0.0]), v)).collect();
    let mus = grid(-1.5, 1.5, 30);
    let h = legendre_transform(&lambdas, &l, &mus).unwrap();
    for (m, hm) in mus.iter().zip(&h) {
        assert!((hm - cost.hamiltonian(at([0.0, 0.0]), *m)).abs() < 1e-4, "at {m}");
    }
}

/// `M₀` of the modified Hamiltonians equals `M̃₀` of the originals.
fn assert_m0_preserved(p: &Problem) {
    let net = p.network();
    let hams: Vec<Box<dyn Fn(f64, f64) -> f64>> = (0..net.arcs().len())
        .map(|k| {
            let model = p.model(k).clone();
            Box::new(move |s: f64, m: f64| model.cost().hamiltonian(model.location(s), m)) as Box<dyn Fn(f64, f64) -> f64>
        })
        .collect();
    let zero = |_s: f64| 0.0;
    let arcs: Vec<ArcHamiltonian<'_>> = net
        .arcs()
        .iter()
        .zip(&hams)
        .map(|(a, h)| ArcHamiltonian {
            length: a.length,
            hamiltonian: h.as_ref(),
            initial: &zero,
        })
        .collect();
    let sel = select_momentum_interval(&arcs, p.limiters().values(), 64).unwrap();
    let mut m0_tilde = f64::NEG_INFINITY;
    let mut m0_mod = f64::NEG_INFINITY;
    for arc in &arcs {
        let pair = modify_hamiltonian(arc.hamiltonian, arc.length, sel.interval, &ModifyParams::default()).unwrap();
        assert!(pair.check_lemma(arc.hamiltonian).passes());
        for &s in pair.s_grid() {
            m0_tilde = m0_tilde.max((arc.hamiltonian)(s, 0.0));
            m0_mod = m0_mod.max(pair.h(s, 0.0));
        }
    }
    assert!((m0_tilde - m0_mod).abs() <= 1e-9, "{m0_tilde} vs {m0_mod}");
    assert!(sel.interval.contains(sel.lip_g));
}

#[test]
fn modification_keeps_m0_on_traffic_circle() {
    assert_m0_preserved(&traffic_benchmark(1.0));
}

#[test]
fn modification_keeps_m0_with_arc_potentials() {
    let p = hjnet::scenario::load_scenario("triangle_potential").unwrap().problem().unwrap();
    assert_m0_preserved(&p);
}

#[test]
fn worked_modification_against_closed_form() {
    let params = ModifyParams {
        beta0: Some(3.0),
        mu0: Some(2.0),
        mu_step: Some(1e-2),
        lambda_step: Some(1e-2),
        s_samples: 3,
        ..ModifyParams::default()
    };
    let h = |_s: f64, m: f64| 0.5 * m * m;
    let pair = modify_hamiltonian(&h, 1.0, MomentumInterval::symmetric(1.0).unwrap(), &params).unwrap();
    for k in 0..=800 {
        let m = -4.0 + 0.01 * k as f64;
        assert!((pair.h(0.5, m) - worked_h(m)).abs() <= 1e-3);
    }
    for k in 0..=600 {
        let l = -3.0 + 0.01 * k as f64;
        assert!((pair.l(0.5, l) - worked_l(l)).abs() <= 1e-3);
    }
    assert!(pair.l(0.5, 3.5).is_infinite());
}
