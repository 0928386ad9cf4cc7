use std::fmt;

use super::conjugate::{legendre_transform, lower_convex_envelope, PiecewiseLinear};
use super::cost::{ArcCost, Location};
use super::HamiltonianError;

/// Largest momentum the outward scans will try.
const SCAN_BOUND: f64 = 1e6;
const BISECTION_STEPS: usize = 60;

/// A compact momentum interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumInterval {
    pub lo: f64,
    pub hi: f64,
}

impl MomentumInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self, HamiltonianError> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(HamiltonianError::InvalidInterval(lo, hi));
        }
        Ok(MomentumInterval { lo, hi })
    }

    /// `[-r, r]`.
    pub fn symmetric(r: f64) -> Result<Self, HamiltonianError> {
        MomentumInterval::new(-r, r)
    }

    pub fn contains(&self, mu: f64) -> bool {
        self.lo <= mu && mu <= self.hi
    }

    /// Largest `|μ|` in the interval.
    pub fn radius(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Widens each side by `margin` times the half-width.
    pub fn widen(&self, margin: f64) -> Self {
        let pad = margin * 0.5 * (self.hi - self.lo);
        MomentumInterval {
            lo: self.lo - pad,
            hi: self.hi + pad,
        }
    }
}

/// Knobs for [`modify_hamiltonian`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModifyParams {
    /// Widening of `I` into the neighbourhood `Ĩ`, and the relative gap
    /// between `β` and `β₀`.
    pub margin: f64,
    /// Fixes `β₀` instead of deriving it from the Lipschitz constant on `Ĩ`.
    pub beta0: Option<f64>,
    /// Fixes `μ₀` instead of scanning for it.
    pub mu0: Option<f64>,
    /// Momentum sampling step; default `10⁻²·2μ₀`.
    pub mu_step: Option<f64>,
    /// Velocity sampling step of the `L` table; default `10⁻²·2β₀`.
    pub lambda_step: Option<f64>,
    /// Number of `s` samples along the arc (at least 2).
    pub s_samples: usize,
    /// Relative slack of the midpoint convexity check.
    pub convexity_tol: f64,
}

impl Default for ModifyParams {
    fn default() -> Self {
        ModifyParams {
            margin: 0.25,
            beta0: None,
            mu0: None,
            mu_step: None,
            lambda_step: None,
            s_samples: 33,
            convexity_tol: 1e-9,
        }
    }
}

/// Hamiltonian made affine outside `[-μ₀, μ₀]`, convexified, and its
/// conjugate Lagrangian, which is finite only on `[-β₀, β₀]`.
///
/// Both are tabulated at `s` samples and interpolated linearly in `s`; `L` is
/// also interpolated linearly in `λ`.
#[derive(Clone)]
pub struct ModifiedPair {
    length: f64,
    interval: MomentumInterval,
    beta: f64,
    beta0: f64,
    mu0: f64,
    s_nodes: Vec<f64>,
    mus: Vec<f64>,
    envelopes: Vec<PiecewiseLinear>,
    lambdas: Vec<f64>,
    l_table: Vec<Vec<f64>>,
    ell0: f64,
}

impl fmt::Debug for ModifiedPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModifiedPair")
            .field("interval", &self.interval)
            .field("beta0", &self.beta0)
            .field("mu0", &self.mu0)
            .field("s_samples", &self.s_nodes.len())
            .field("mu_samples", &self.mus.len())
            .finish()
    }
}

/// Result of [`ModifiedPair::check_lemma`].
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaCheck {
    /// `max |H − H̃|` over μ-grid points inside `I`.
    pub agreement_on_interval: f64,
    /// `L` finite at every sampled `|λ| ≤ β₀` and infinite beyond.
    pub effective_domain_ok: bool,
    /// Sampled Lipschitz constant of `L` divided by ℓ₀.
    pub lipschitz_ratio: f64,
    /// `max (H − H̃)` over the μ-grid (non-positive when `H ≤ H̃`).
    pub dominance_excess: f64,
}

impl LemmaCheck {
    pub fn passes(&self) -> bool {
        self.agreement_on_interval <= 1e-9
            && self.effective_domain_ok
            && self.lipschitz_ratio <= 1.0 + 1e-6
            && self.dominance_excess <= 1e-9
    }
}

fn uniform(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round().max(1.0) as usize;
    (0..=n)
        .map(|i| if i == n { hi } else { lo + (hi - lo) * i as f64 / n as f64 })
        .collect()
}

fn check_convex(h: &dyn Fn(f64, f64) -> f64, s: f64, mus: &[f64], tol: f64) -> Result<(), HamiltonianError> {
    let vals: Vec<f64> = mus.iter().map(|&m| h(s, m)).collect();
    for i in 1..mus.len().saturating_sub(1) {
        let scale = vals[i - 1].abs().max(vals[i + 1].abs()).max(1.0);
        // uniform grid: midpoint convexity
        if vals[i - 1] + vals[i + 1] - 2.0 * vals[i] < -tol * scale {
            return Err(HamiltonianError::NonConvexSlice { s, mu: mus[i] });
        }
    }
    Ok(())
}

fn outward_slopes_at_least(h: &dyn Fn(f64, f64) -> f64, s_nodes: &[f64], m: f64, beta0: f64) -> bool {
    let d = 1e-7 * m.max(1.0);
    s_nodes.iter().all(|&s| {
        (h(s, m + d) - h(s, m)) / d >= beta0 && (h(s, -m - d) - h(s, -m)) / d >= beta0
    })
}

/// Replaces `H̃` by a Hamiltonian that agrees with it on `I`, grows with
/// slope `β₀` far out, and has a Lagrangian finite exactly on `[-β₀, β₀]`.
///
/// `h(s, μ)` must be convex and superlinear in `μ`.
pub fn modify_hamiltonian(
    h: &dyn Fn(f64, f64) -> f64,
    length: f64,
    interval: MomentumInterval,
    params: &ModifyParams,
) -> Result<ModifiedPair, HamiltonianError> {
    let ns = params.s_samples.max(2);
    let s_nodes: Vec<f64> = (0..ns).map(|i| length * i as f64 / (ns - 1) as f64).collect();

    let wide = interval.widen(params.margin);
    let wide_mus = uniform(wide.lo, wide.hi, (wide.hi - wide.lo) * 5e-3);
    let mut beta: f64 = 0.0;
    for &s in &s_nodes {
        check_convex(h, s, &wide_mus, params.convexity_tol)?;
        for w in wide_mus.windows(2) {
            beta = beta.max((h(s, w[1]) - h(s, w[0])).abs() / (w[1] - w[0]));
        }
    }
    let beta0 = match params.beta0 {
        Some(b) => b,
        None if beta > 0.0 => (1.0 + params.margin) * beta,
        None => params.margin,
    };
    if beta0 <= beta {
        log::warn!("β₀ = {beta0} does not exceed the Lipschitz constant {beta} of H̃ on Ĩ");
    }

    let mu0 = match params.mu0 {
        Some(m) => m,
        None => {
            let mut lo = interval.radius();
            let mut hi = lo.max(1e-3);
            while !outward_slopes_at_least(h, &s_nodes, hi, beta0) {
                lo = hi;
                hi *= 2.0;
                if hi > SCAN_BOUND {
                    return Err(HamiltonianError::SuperlinearityScanFailed { bound: SCAN_BOUND });
                }
            }
            if lo < hi {
                for _ in 0..BISECTION_STEPS {
                    let mid = 0.5 * (lo + hi);
                    if outward_slopes_at_least(h, &s_nodes, mid, beta0) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
            }
            hi
        }
    };
    if mu0 <= interval.radius() {
        return Err(HamiltonianError::InvalidInterval(-mu0, mu0));
    }

    let mu_step = params.mu_step.unwrap_or(2e-2 * mu0);
    let mus = uniform(-mu0, mu0, mu_step);
    let lambda_step = params.lambda_step.unwrap_or(2e-2 * beta0);
    let lambdas = uniform(-beta0, beta0, lambda_step);

    let mut envelopes = Vec::with_capacity(ns);
    let mut l_table = Vec::with_capacity(ns);
    for &s in &s_nodes {
        check_convex(h, s, &mus, params.convexity_tol)?;
        let pts: Vec<(f64, f64)> = mus.iter().map(|&m| (m, h(s, m))).collect();
        let env = lower_convex_envelope(&pts)?.clip_slopes(beta0);
        let env_vals: Vec<f64> = mus.iter().map(|&m| env.eval(m)).collect();
        l_table.push(legendre_transform(&mus, &env_vals, &lambdas)?);
        envelopes.push(env);
    }

    let mut pair = ModifiedPair {
        length,
        interval,
        beta,
        beta0,
        mu0,
        s_nodes,
        mus,
        envelopes,
        lambdas,
        l_table,
        ell0: 0.0,
    };
    pair.ell0 = 1.05 * pair.table_lipschitz();
    Ok(pair)
}

impl ModifiedPair {
    pub fn interval(&self) -> MomentumInterval {
        self.interval
    }

    /// Lipschitz constant of `H̃` estimated on the widened interval.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn beta0(&self) -> f64 {
        self.beta0
    }

    pub fn mu0(&self) -> f64 {
        self.mu0
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Lipschitz constant of the tabulated `L`, inflated by 5%.
    pub fn ell0(&self) -> f64 {
        self.ell0
    }

    pub fn mu_grid(&self) -> &[f64] {
        &self.mus
    }

    pub fn lambda_grid(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn s_grid(&self) -> &[f64] {
        &self.s_nodes
    }

    fn s_weights(&self, s: f64) -> (usize, f64) {
        let n = self.s_nodes.len() - 1;
        let x = (s / self.length).clamp(0.0, 1.0) * n as f64;
        let k = (x.floor() as usize).min(n - 1);
        (k, x - k as f64)
    }

    /// Modified Hamiltonian `H(s, μ)`.
    pub fn h(&self, s: f64, mu: f64) -> f64 {
        let (k, t) = self.s_weights(s);
        (1.0 - t) * self.envelopes[k].eval(mu) + t * self.envelopes[k + 1].eval(mu)
    }

    /// Modified Lagrangian `L(s, λ)`; `+∞` for `|λ| > β₀`.
    pub fn l(&self, s: f64, lambda: f64) -> f64 {
        if !(lambda.abs() <= self.beta0) {
            return f64::INFINITY;
        }
        let (k, t) = self.s_weights(s);
        let m = self.lambdas.len() - 1;
        let x = (lambda + self.beta0) / (2.0 * self.beta0) * m as f64;
        let j = (x.floor() as usize).min(m - 1);
        let u = x - j as f64;
        let row = |r: &Vec<f64>| (1.0 - u) * r[j] + u * r[j + 1];
        (1.0 - t) * row(&self.l_table[k]) + t * row(&self.l_table[k + 1])
    }

    fn table_lipschitz(&self) -> f64 {
        let mut lip: f64 = 0.0;
        for (i, row) in self.l_table.iter().enumerate() {
            for j in 0..row.len() {
                if j + 1 < row.len() {
                    lip = lip.max((row[j + 1] - row[j]).abs() / (self.lambdas[j + 1] - self.lambdas[j]));
                }
                if i + 1 < self.l_table.len() {
                    let ds = self.s_nodes[i + 1] - self.s_nodes[i];
                    lip = lip.max((self.l_table[i + 1][j] - row[j]).abs() / ds);
                }
            }
        }
        lip
    }

    /// Samples the clauses of the modification lemma against the input `h`.
    ///
    /// Agreement and dominance are checked on the μ-grid at every `s`
    /// sample; the Lipschitz ratio over pairs drawn from a coarsened
    /// `(s, λ)` table, including off-grid midpoints.
    pub fn check_lemma(&self, h: &dyn Fn(f64, f64) -> f64) -> LemmaCheck {
        let mut agreement: f64 = 0.0;
        let mut excess = f64::NEG_INFINITY;
        for &s in &self.s_nodes {
            for &m in &self.mus {
                let d = self.h(s, m) - h(s, m);
                if self.interval.contains(m) {
                    agreement = agreement.max(d.abs());
                }
                excess = excess.max(d);
            }
        }

        let mut domain_ok = true;
        for &s in &self.s_nodes {
            for &l in &self.lambdas {
                domain_ok &= self.l(s, l).is_finite();
            }
            for l in [self.beta0 * (1.0 + 1e-12), -self.beta0 * (1.0 + 1e-12), 2.0 * self.beta0] {
                domain_ok &= self.l(s, l) == f64::INFINITY;
            }
        }

        let ss = coarse(&self.s_nodes, 12);
        let ls = coarse(&self.lambdas, 40);
        let pts: Vec<(f64, f64, f64)> = ss
            .iter()
            .flat_map(|&s| ls.iter().map(move |&l| (s, l)))
            .map(|(s, l)| (s, l, self.l(s, l)))
            .collect();
        let mut lip: f64 = 0.0;
        for (a, p) in pts.iter().enumerate() {
            for q in &pts[a + 1..] {
                let dist = (p.0 - q.0).abs() + (p.1 - q.1).abs();
                lip = lip.max((p.2 - q.2).abs() / dist);
            }
        }
        LemmaCheck {
            agreement_on_interval: agreement,
            effective_domain_ok: domain_ok,
            lipschitz_ratio: lip / self.ell0,
            dominance_excess: excess,
        }
    }
}

/// About `n` points from `grid` plus the midpoints between them.
fn coarse(grid: &[f64], n: usize) -> Vec<f64> {
    let stride = (grid.len() / n).max(1);
    let picked: Vec<f64> = grid.iter().step_by(stride).copied().collect();
    let mut out = Vec::with_capacity(2 * picked.len());
    for w in picked.windows(2) {
        out.push(w[0]);
        out.push(0.5 * (w[0] + w[1]));
    }
    out.extend(picked.last());
    out
}

impl ArcCost for ModifiedPair {
    fn lagrangian(&self, at: Location, velocity: f64) -> f64 {
        self.l(at.s, velocity)
    }

    fn hamiltonian(&self, at: Location, momentum: f64) -> f64 {
        self.h(at.s, momentum)
    }

    fn bounded_hamiltonian(&self, at: Location, momentum: f64, bound: f64) -> f64 {
        if bound >= self.beta0 {
            return self.h(at.s, momentum);
        }
        let tol = 1e-12 * bound.max(1.0);
        crate::minimize::golden_max(|l| momentum * l - self.l(at.s, l), -bound, bound, tol).1
    }
}

/// One arc's input Hamiltonian and initial datum, both in the arc parameter.
pub struct ArcHamiltonian<'a> {
    pub length: f64,
    pub hamiltonian: &'a dyn Fn(f64, f64) -> f64,
    pub initial: &'a dyn Fn(f64) -> f64,
}

/// Output of [`select_momentum_interval`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumSelection {
    /// `[-1.1μ*, 1.1μ*]`.
    pub interval: MomentumInterval,
    /// `max_γ Lip(g∘γ)`.
    pub lip_g: f64,
    /// `M̃₀ = max H̃(s, (g∘γ)′)`.
    pub m0: f64,
    /// `A = max(M̃₀ + 1, max |c_x|)`.
    pub threshold: f64,
    /// Smallest admissible half-width before widening.
    pub mu_star: f64,
}

/// Widening applied to the scanned half-width.
const INTERVAL_SLACK: f64 = 1.1;

/// Picks a symmetric momentum interval outside of which every arc
/// Hamiltonian exceeds `A` and keeps growing, and which contains every slope
/// of the initial datum.
///
/// `samples` cells per arc are used for the divided differences of `g` and
/// for the growth test.
pub fn select_momentum_interval(
    arcs: &[ArcHamiltonian<'_>],
    limiters: &[f64],
    samples: usize,
) -> Result<MomentumSelection, HamiltonianError> {
    if arcs.is_empty() {
        return Err(HamiltonianError::EmptyGrid);
    }
    let n = samples.max(1);
    let mut lip_g: f64 = 0.0;
    let mut m0 = f64::NEG_INFINITY;
    let mut s_sets = Vec::with_capacity(arcs.len());
    for arc in arcs {
        let ss: Vec<f64> = (0..=n).map(|i| arc.length * i as f64 / n as f64).collect();
        for w in ss.windows(2) {
            let slope = ((arc.initial)(w[1]) - (arc.initial)(w[0])) / (w[1] - w[0]);
            lip_g = lip_g.max(slope.abs());
            m0 = m0.max((arc.hamiltonian)(0.5 * (w[0] + w[1]), slope));
        }
        s_sets.push(ss);
    }
    let c_max = limiters.iter().fold(0.0_f64, |a, c| a.max(c.abs()));
    let threshold = (m0 + 1.0).max(c_max);

    let holds = |m: f64| {
        let d = 1e-9 * m.max(1.0);
        arcs.iter().zip(&s_sets).all(|(arc, ss)| {
            ss.iter().all(|&s| {
                let h = |mu| (arc.hamiltonian)(s, mu);
                h(m) >= threshold && h(-m) >= threshold && h(m + d) >= h(m) && h(-m - d) >= h(-m)
            })
        })
    };

    let mut lo = lip_g;
    let mu_star = if holds(lo) {
        lo
    } else {
        let mut hi = (2.0 * lo).max(1.0);
        while !holds(hi) {
            lo = hi;
            hi *= 2.0;
            if hi > SCAN_BOUND {
                return Err(HamiltonianError::ScanFailed { bound: SCAN_BOUND });
            }
        }
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            if holds(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };
    Ok(MomentumSelection {
        interval: MomentumInterval::symmetric(INTERVAL_SLACK * mu_star.max(f64::MIN_POSITIVE))?,
        lip_g,
        m0,
        threshold,
        mu_star,
    })
}
