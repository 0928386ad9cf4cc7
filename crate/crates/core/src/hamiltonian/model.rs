use std::fmt;
use std::sync::Arc;

use super::cost::{ArcCost, Cost, Location};
use crate::minimize::{golden_max, golden_section};
use crate::network::{self, Polyline};

/// Sampling resolution for the per-arc constants ℓ₀ and c_γ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sampling {
    pub s_samples: usize,
    pub lambda_samples: usize,
}

impl Sampling {
    /// One sample per grid node of spacing `dx` plus the cell midpoints.
    pub fn for_spacing(length: f64, dx: f64) -> Self {
        let cells = (length / dx).ceil().max(1.0) as usize;
        Sampling {
            s_samples: 2 * cells + 1,
            lambda_samples: 201,
        }
    }
}

/// Inflation applied to the sampled Lipschitz constant of `L`.
const ELL0_INFLATION: f64 = 1.05;

/// The cost of one arc, bounded to velocities in `[-β₀, β₀]`, together with
/// the derived constants the scheme and its diagnostics use.
#[derive(Clone)]
pub struct ArcModel {
    arc: usize,
    length: f64,
    geometry: Polyline,
    cost: Arc<dyn ArcCost>,
    beta0: f64,
    ell0: f64,
    max_abs_l: f64,
    critical: f64,
}

impl fmt::Debug for ArcModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ArcModel")
            .field("arc", &self.arc)
            .field("length", &self.length)
            .field("cost", &self.cost)
            .field("beta0", &self.beta0)
            .field("ell0", &self.ell0)
            .field("critical", &self.critical)
            .finish()
    }
}

impl ArcModel {
    /// Binds `cost` to arc `index` of a network and samples ℓ₀, max|L| and
    /// the critical value c_γ.
    pub fn new(index: usize, arc: &network::Arc, cost: Arc<dyn ArcCost>, beta0: f64, sampling: Sampling) -> Self {
        assert!(beta0 > 0.0, "β₀ must be positive");
        let mut model = ArcModel {
            arc: index,
            length: arc.length,
            geometry: arc.geometry.clone(),
            cost,
            beta0,
            ell0: 0.0,
            max_abs_l: 0.0,
            critical: 0.0,
        };
        let (ell0, max_abs_l) = model.sample_lipschitz(sampling);
        model.ell0 = ell0;
        model.max_abs_l = max_abs_l;
        model.critical = arc_critical_value(&model, sampling.s_samples);
        model
    }

    pub fn arc(&self) -> usize {
        self.arc
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn beta0(&self) -> f64 {
        self.beta0
    }

    /// Sampled Lipschitz constant of `L` on `[0,|γ|] × [-β₀, β₀]`, inflated by 5%.
    pub fn ell0(&self) -> f64 {
        self.ell0
    }

    /// Sampled `max |L|` on `[0,|γ|] × [-β₀, β₀]`.
    pub fn max_abs_l(&self) -> f64 {
        self.max_abs_l
    }

    /// Critical value `c_γ = −max_s min_μ H(s, μ)`.
    pub fn critical_value(&self) -> f64 {
        self.critical
    }

    pub fn cost(&self) -> &Arc<dyn ArcCost> {
        &self.cost
    }

    pub fn location(&self, s: f64) -> Location {
        Location {
            s,
            x: self.geometry.point_at(s),
        }
    }

    /// `L(s, λ)`, `+∞` for `|λ| > β₀`.
    pub fn eval_l(&self, s: f64, velocity: f64) -> Cost {
        self.eval_l_at(self.location(s), velocity)
    }

    pub fn eval_l_at(&self, at: Location, velocity: f64) -> Cost {
        if velocity.abs() > self.beta0 {
            return Cost::Infinite;
        }
        let v = self.cost.lagrangian(at, velocity);
        if v.is_finite() {
            Cost::Finite(v)
        } else {
            Cost::Infinite
        }
    }

    /// Hamiltonian of the bounded cost: `max_{|λ| ≤ β₀} μλ − L(s, λ)`.
    pub fn eval_h(&self, s: f64, momentum: f64) -> f64 {
        self.cost.bounded_hamiltonian(self.location(s), momentum, self.beta0)
    }

    fn sample_lipschitz(&self, sampling: Sampling) -> (f64, f64) {
        let ns = sampling.s_samples.max(2);
        let nl = sampling.lambda_samples.max(2);
        let ss: Vec<f64> = (0..ns).map(|i| self.length * i as f64 / (ns - 1) as f64).collect();
        let ls: Vec<f64> = (0..nl)
            .map(|j| -self.beta0 + 2.0 * self.beta0 * j as f64 / (nl - 1) as f64)
            .collect();
        let table: Vec<Vec<f64>> = ss
            .iter()
            .map(|&s| {
                let at = self.location(s);
                ls.iter().map(|&l| self.cost.lagrangian(at, l)).collect()
            })
            .collect();
        let mut lip: f64 = 0.0;
        let mut max_abs: f64 = 0.0;
        for i in 0..ns {
            for j in 0..nl {
                max_abs = max_abs.max(table[i][j].abs());
                if j + 1 < nl {
                    lip = lip.max((table[i][j + 1] - table[i][j]).abs() / (ls[j + 1] - ls[j]));
                }
                if i + 1 < ns {
                    lip = lip.max((table[i + 1][j] - table[i][j]).abs() / (ss[i + 1] - ss[i]));
                }
            }
        }
        (lip * ELL0_INFLATION, max_abs)
    }
}

/// Samples `c_γ = −max_s min_μ H(s, μ)`.
///
/// The inner minimum uses golden-section search (H is convex in μ); the outer
/// maximum is taken over `s_samples` uniform points and then refined around
/// the best sample.
pub fn arc_critical_value(model: &ArcModel, s_samples: usize) -> f64 {
    let ns = s_samples.max(2);
    let bracket = model.ell0().max(model.beta0()) + 1.0;
    let tol = 1e-12 * bracket;
    let inner = |s: f64| golden_section(|m| model.eval_h(s, m), -bracket, bracket, tol).1;
    let ss: Vec<f64> = (0..ns).map(|i| model.length() * i as f64 / (ns - 1) as f64).collect();
    let vals: Vec<f64> = ss.iter().map(|&s| inner(s)).collect();
    let (k, &best) = vals
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("at least two samples");
    let lo = ss[k.saturating_sub(1)];
    let hi = ss[(k + 1).min(ns - 1)];
    let (_, refined) = golden_max(inner, lo, hi, 1e-12 * model.length());
    -best.max(refined)
}
