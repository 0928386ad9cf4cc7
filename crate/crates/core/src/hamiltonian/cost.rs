use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use serde::{Deserialize, Serialize};

use crate::minimize::{golden_max, golden_section};
use crate::network::Point;

/// Extended-real running cost: finite or `+∞`.
///
/// `+∞` absorbs addition and loses every comparison against a finite value,
/// so it can flow through the `min`/`+` arithmetic of the scheme without
/// producing floating overflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cost {
    Finite(f64),
    Infinite,
}

impl Cost {
    pub fn finite(self) -> Option<f64> {
        match self {
            Cost::Finite(v) => Some(v),
            Cost::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Cost::Finite(_))
    }

    /// `f64` view with `+∞` mapped to `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        match self {
            Cost::Finite(v) => v,
            Cost::Infinite => f64::INFINITY,
        }
    }

    pub fn min(self, other: Cost) -> Cost {
        if other < self {
            other
        } else {
            self
        }
    }

    /// Multiplication by a non-negative step.
    pub fn scale(self, k: f64) -> Cost {
        debug_assert!(k >= 0.0);
        match self {
            Cost::Finite(v) => Cost::Finite(k * v),
            Cost::Infinite => Cost::Infinite,
        }
    }
}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Cost::Finite(a), Cost::Finite(b)) => a.partial_cmp(b),
            (Cost::Finite(_), Cost::Infinite) => Some(Ordering::Less),
            (Cost::Infinite, Cost::Finite(_)) => Some(Ordering::Greater),
            (Cost::Infinite, Cost::Infinite) => Some(Ordering::Equal),
        }
    }
}

impl Add for Cost {
    type Output = Cost;
    fn add(self, rhs: Cost) -> Cost {
        match (self, rhs) {
            (Cost::Finite(a), Cost::Finite(b)) => Cost::Finite(a + b),
            _ => Cost::Infinite,
        }
    }
}

impl Add<f64> for Cost {
    type Output = Cost;
    fn add(self, rhs: f64) -> Cost {
        match self {
            Cost::Finite(a) => Cost::Finite(a + rhs),
            Cost::Infinite => Cost::Infinite,
        }
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cost::Finite(v) => write!(f, "{v}"),
            Cost::Infinite => f.write_str("+inf"),
        }
    }
}

/// Position on an arc: the parameter and the physical point γ(s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Location {
    pub s: f64,
    pub x: Point,
}

/// A convex Hamiltonian/Lagrangian pair on one arc.
///
/// Implementations must be pure; they are called concurrently.
pub trait ArcCost: Send + Sync + fmt::Debug {
    /// Running cost `L(s, λ)`. May return `f64::INFINITY` outside its
    /// effective domain.
    fn lagrangian(&self, at: Location, velocity: f64) -> f64;

    /// The Hamiltonian `H(s, μ)` this cost was built from.
    fn hamiltonian(&self, at: Location, momentum: f64) -> f64;

    /// `max_{|λ| ≤ bound} μλ − L(s, λ)`: the Hamiltonian of the cost once
    /// velocities are restricted to `[-bound, bound]`.
    fn bounded_hamiltonian(&self, at: Location, momentum: f64, bound: f64) -> f64 {
        let tol = 1e-12 * bound.max(1.0);
        golden_max(|l| momentum * l - self.lagrangian(at, l), -bound, bound, tol).1
    }

    /// Minimiser of `L(s, ·)` on `[-bound, bound]`.
    fn rest_velocity(&self, at: Location, bound: f64) -> f64 {
        let tol = 1e-12 * bound.max(1.0);
        golden_section(|l| self.lagrangian(at, l), -bound, bound, tol).0
    }
}

/// One term of a potential `V(x)` evaluated at the physical point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PotentialTerm {
    /// `weight · |x − center|²`
    Distance { weight: f64, center: Point },
    /// `weight · x[axis]²`
    Coordinate { weight: f64, axis: usize },
}

impl PotentialTerm {
    pub fn eval(&self, x: Point) -> f64 {
        match *self {
            PotentialTerm::Distance { weight, center } => {
                let (dx, dy) = (x[0] - center[0], x[1] - center[1]);
                weight * (dx * dx + dy * dy)
            }
            PotentialTerm::Coordinate { weight, axis } => weight * x[axis] * x[axis],
        }
    }
}

fn potential(terms: &[PotentialTerm], x: Point) -> f64 {
    terms.iter().map(|t| t.eval(x)).sum()
}

/// `L(s, λ) = λ²/2 + V(γ(s))`, `H(s, μ) = μ²/2 − V(γ(s))`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QuadraticCost {
    pub potential: Vec<PotentialTerm>,
}

impl QuadraticCost {
    /// Pure kinetic energy `λ²/2`.
    pub fn kinetic() -> Self {
        QuadraticCost::default()
    }

    pub fn with_potential(potential: Vec<PotentialTerm>) -> Self {
        QuadraticCost { potential }
    }

    /// `λ²/2 + |x − target|²`.
    pub fn target(target: Point) -> Self {
        QuadraticCost::with_potential(vec![PotentialTerm::Distance {
            weight: 1.0,
            center: target,
        }])
    }
}

impl ArcCost for QuadraticCost {
    fn lagrangian(&self, at: Location, velocity: f64) -> f64 {
        0.5 * velocity * velocity + potential(&self.potential, at.x)
    }

    fn hamiltonian(&self, at: Location, momentum: f64) -> f64 {
        0.5 * momentum * momentum - potential(&self.potential, at.x)
    }

    fn bounded_hamiltonian(&self, at: Location, momentum: f64, bound: f64) -> f64 {
        let m = momentum.abs();
        let kinetic = if m <= bound {
            0.5 * m * m
        } else {
            bound * m - 0.5 * bound * bound
        };
        kinetic - potential(&self.potential, at.x)
    }

    fn rest_velocity(&self, _at: Location, _bound: f64) -> f64 {
        0.0
    }
}

/// `H(s, μ) = |μ|ᵖ/p − V(γ(s))` with conjugate `L(s, λ) = |λ|^q/q + V(γ(s))`,
/// `1/p + 1/q = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerCost {
    pub exponent: f64,
    pub potential: Vec<PotentialTerm>,
}

impl PowerCost {
    /// Panics unless `exponent > 1`.
    pub fn new(exponent: f64, potential: Vec<PotentialTerm>) -> Self {
        assert!(exponent > 1.0, "power Hamiltonian needs exponent > 1");
        PowerCost { exponent, potential }
    }

    fn dual_exponent(&self) -> f64 {
        self.exponent / (self.exponent - 1.0)
    }
}

impl ArcCost for PowerCost {
    fn lagrangian(&self, at: Location, velocity: f64) -> f64 {
        let q = self.dual_exponent();
        velocity.abs().powf(q) / q + potential(&self.potential, at.x)
    }

    fn hamiltonian(&self, at: Location, momentum: f64) -> f64 {
        let p = self.exponent;
        momentum.abs().powf(p) / p - potential(&self.potential, at.x)
    }

    fn rest_velocity(&self, _at: Location, _bound: f64) -> f64 {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(x: Point) -> Location {
        Location { s: 0.0, x }
    }

    #[test]
    fn cost_arithmetic() {
        assert_eq!(Cost::Finite(1.0) + Cost::Infinite, Cost::Infinite);
        assert_eq!(Cost::Finite(1.0) + 2.0, Cost::Finite(3.0));
        assert_eq!(Cost::Infinite.min(Cost::Finite(-4.0)), Cost::Finite(-4.0));
        assert!(Cost::Finite(1e300) < Cost::Infinite);
        assert_eq!(Cost::Infinite.scale(0.5), Cost::Infinite);
    }

    #[test]
    fn quadratic_bounded_hamiltonian_matches_golden() {
        let c = QuadraticCost::target([1.0, 1.0]);
        let loc = at([0.0, 0.5]);
        for mu in [-5.0, -1.0, 0.0, 0.7, 3.5] {
            let closed = c.bounded_hamiltonian(loc, mu, 2.0);
            let tol = 1e-12;
            let numeric = golden_max(|l| mu * l - c.lagrangian(loc, l), -2.0, 2.0, tol).1;
            assert!((closed - numeric).abs() < 1e-9, "{mu}: {closed} vs {numeric}");
        }
    }

    #[test]
    fn power_cost_is_conjugate_pair() {
        let c = PowerCost::new(3.0, vec![]);
        let loc = at([0.0, 0.0]);
        // L(λ) = max_μ μλ − H(μ)
        for l in [-1.5, -0.2, 0.0, 0.9] {
            let (_, sup) = golden_max(|m| m * l - c.hamiltonian(loc, m), -10.0, 10.0, 1e-12);
            assert!((sup - c.lagrangian(loc, l)).abs() < 1e-9);
        }
    }

    #[test]
    fn potential_terms() {
        let d = PotentialTerm::Distance { weight: 5.0, center: [0.5, 0.5] };
        assert!((d.eval([0.0, 0.0]) - 2.5).abs() < 1e-15);
        let c = PotentialTerm::Coordinate { weight: 10.0, axis: 0 };
        assert_eq!(c.eval([0.5, 3.0]), 2.5);
    }
}
