use std::fmt;
use std::sync::Arc;

use super::SchemeError;
use crate::hamiltonian::{
    check_flux_limiters, max_admissible, AdmissibilityReport, ArcCost, ArcModel, FluxLimiters, Location, Sampling,
};
use crate::network::{Network, Point};

/// Initial datum `g`, evaluated at physical points so that it is
/// automatically single-valued at vertices.
#[derive(Clone, Default)]
pub enum InitialDatum {
    #[default]
    Zero,
    Constant(f64),
    Function(Arc<dyn Fn(Point) -> f64 + Send + Sync>),
}

impl InitialDatum {
    pub fn from_fn(f: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Self {
        InitialDatum::Function(Arc::new(f))
    }

    pub fn eval(&self, x: Point) -> f64 {
        match self {
            InitialDatum::Zero => 0.0,
            InitialDatum::Constant(c) => *c,
            InitialDatum::Function(f) => f(x),
        }
    }
}

impl fmt::Debug for InitialDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialDatum::Zero => f.write_str("Zero"),
            InitialDatum::Constant(c) => write!(f, "Constant({c})"),
            InitialDatum::Function(_) => f.write_str("Function(..)"),
        }
    }
}

/// How the builder obtains flux limiters.
#[derive(Debug, Clone, PartialEq)]
pub enum LimiterChoice {
    Uniform(f64),
    /// One value per vertex, in network order.
    Values(Vec<f64>),
    /// `c_x = min` of the incident critical values.
    MaxAdmissible,
}

/// A fully specified evolution problem on a network.
#[derive(Debug, Clone)]
pub struct Problem {
    network: Network,
    models: Vec<ArcModel>,
    limiters: FluxLimiters,
    admissibility: AdmissibilityReport,
    initial: InitialDatum,
    horizon: f64,
    lip_g: f64,
    m0: f64,
}

impl Problem {
    pub fn builder(network: Network) -> ProblemBuilder {
        ProblemBuilder::new(network)
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn models(&self) -> &[ArcModel] {
        &self.models
    }

    pub fn model(&self, arc: usize) -> &ArcModel {
        &self.models[arc]
    }

    pub fn limiters(&self) -> &FluxLimiters {
        &self.limiters
    }

    pub fn admissibility(&self) -> &AdmissibilityReport {
        &self.admissibility
    }

    pub fn initial(&self) -> &InitialDatum {
        &self.initial
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Same problem with another horizon.
    pub fn with_horizon(&self, horizon: f64) -> Result<Problem, SchemeError> {
        if !(horizon >= 0.0 && horizon.is_finite()) {
            return Err(SchemeError::InvalidHorizon(horizon));
        }
        Ok(Problem {
            horizon,
            ..self.clone()
        })
    }

    /// Largest β₀ over the arcs.
    pub fn beta0(&self) -> f64 {
        self.models.iter().map(ArcModel::beta0).fold(0.0, f64::max)
    }

    /// ℓ₀ for the whole network: the largest arc ℓ₀, and at least the
    /// Lipschitz constant of the initial datum.
    pub fn ell0(&self) -> f64 {
        self.models.iter().map(ArcModel::ell0).fold(self.lip_g, f64::max)
    }

    pub fn max_abs_l(&self) -> f64 {
        self.models.iter().map(ArcModel::max_abs_l).fold(0.0, f64::max)
    }

    /// Sampled `max_γ Lip(g∘γ)`.
    pub fn lip_g(&self) -> f64 {
        self.lip_g
    }

    /// Sampled `M̃₀ = max H(s, (g∘γ)′)`.
    pub fn m0(&self) -> f64 {
        self.m0
    }

    /// `g(γ(s))` on arc `arc`.
    pub fn initial_on_arc(&self, arc: usize, s: f64) -> f64 {
        self.initial.eval(self.network.arc(arc).geometry.point_at(s))
    }
}

/// Builder for [`Problem`].
#[derive(Debug, Clone)]
pub struct ProblemBuilder {
    network: Network,
    costs: Vec<Option<Arc<dyn ArcCost>>>,
    named_costs: Vec<(String, Arc<dyn ArcCost>)>,
    limiters: LimiterChoice,
    overrides: Vec<(String, f64)>,
    initial: InitialDatum,
    horizon: f64,
    beta0: Option<f64>,
    sampling_dx: Option<f64>,
}

/// Cells per arc used to sample the initial datum.
const DATUM_SAMPLES: usize = 200;

impl ProblemBuilder {
    pub fn new(network: Network) -> Self {
        let n = network.arcs().len();
        ProblemBuilder {
            network,
            costs: vec![None; n],
            named_costs: Vec::new(),
            limiters: LimiterChoice::MaxAdmissible,
            overrides: Vec::new(),
            initial: InitialDatum::Zero,
            horizon: 1.0,
            beta0: None,
            sampling_dx: None,
        }
    }

    pub fn uniform_cost(mut self, cost: impl ArcCost + 'static) -> Self {
        let cost: Arc<dyn ArcCost> = Arc::new(cost);
        self.costs.iter_mut().for_each(|c| *c = Some(cost.clone()));
        self
    }

    /// Cost of the arc with the given id; checked in [`build`](Self::build).
    pub fn arc_cost(mut self, arc: &str, cost: Arc<dyn ArcCost>) -> Self {
        self.named_costs.push((arc.to_string(), cost));
        self
    }

    pub fn uniform_limiter(mut self, c: f64) -> Self {
        self.limiters = LimiterChoice::Uniform(c);
        self
    }

    pub fn limiters(mut self, choice: LimiterChoice) -> Self {
        self.limiters = choice;
        self
    }

    /// Replaces the limiter at one vertex after `limiters` is resolved.
    pub fn limiter_override(mut self, vertex: &str, c: f64) -> Self {
        self.overrides.push((vertex.to_string(), c));
        self
    }

    pub fn initial(mut self, g: InitialDatum) -> Self {
        self.initial = g;
        self
    }

    pub fn horizon(mut self, t: f64) -> Self {
        self.horizon = t;
        self
    }

    /// Fixes β₀ on every arc. Default: `4·√(2A)` with
    /// `A = max(M̃₀ + 1, max_x |c_x|, 1)`.
    pub fn beta0(mut self, beta0: f64) -> Self {
        self.beta0 = Some(beta0);
        self
    }

    /// Spacing used to sample ℓ₀ and the critical values; defaults to a
    /// fiftieth of the shortest arc.
    pub fn sampling_dx(mut self, dx: f64) -> Self {
        self.sampling_dx = Some(dx);
        self
    }

    pub fn build(self) -> Result<Problem, SchemeError> {
        let ProblemBuilder {
            network,
            mut costs,
            named_costs,
            limiters,
            overrides,
            initial,
            horizon,
            beta0,
            sampling_dx,
        } = self;
        if !(horizon >= 0.0 && horizon.is_finite()) {
            return Err(SchemeError::InvalidHorizon(horizon));
        }
        for (id, cost) in named_costs {
            let k = network.arc_index(&id).ok_or(SchemeError::UnknownArc(id))?;
            costs[k] = Some(cost);
        }
        let costs: Vec<Arc<dyn ArcCost>> = costs
            .into_iter()
            .enumerate()
            .map(|(k, c)| c.ok_or_else(|| SchemeError::MissingCost(network.arc(k).id.clone())))
            .collect::<Result<_, _>>()?;

        let (lip_g, m0) = datum_constants(&network, &costs, &initial);
        let dx = sampling_dx.unwrap_or(network.min_arc_length() / 50.0);
        let make_models = |beta0: f64| -> Vec<ArcModel> {
            network
                .arcs()
                .iter()
                .enumerate()
                .map(|(k, a)| ArcModel::new(k, a, costs[k].clone(), beta0, Sampling::for_spacing(a.length, dx)))
                .collect()
        };
        let auto_beta0 = |limiters: &[f64]| {
            let c_max = limiters.iter().fold(0.0_f64, |a, c| a.max(c.abs()));
            // M₀ is negative when the potential dominates g; keep A ≥ 1
            4.0 * (2.0 * (m0 + 1.0).max(c_max).max(1.0)).sqrt()
        };

        let explicit = match &limiters {
            LimiterChoice::Uniform(c) => Some(FluxLimiters::uniform(&network, *c)),
            LimiterChoice::Values(v) => Some(FluxLimiters::new(&network, v.clone())?),
            LimiterChoice::MaxAdmissible => None,
        };
        let (models, mut values) = match explicit {
            Some(l) => {
                let b = beta0.unwrap_or_else(|| auto_beta0(l.values()));
                (make_models(b), l.values().to_vec())
            }
            None => {
                // critical values do not depend on β₀ as long as 0 ∈ [-β₀, β₀]
                let provisional = beta0.unwrap_or_else(|| auto_beta0(&[]));
                let mut models = make_models(provisional);
                let values = max_admissible(&network, &models).values().to_vec();
                if beta0.is_none() {
                    let b = auto_beta0(&values);
                    if b != provisional {
                        models = make_models(b);
                    }
                }
                (models, values)
            }
        };
        for (id, c) in overrides {
            let x = network.vertex_index(&id).ok_or(SchemeError::UnknownVertex(id))?;
            values[x] = c;
        }
        let limiters = FluxLimiters::new(&network, values)?;
        let admissibility = check_flux_limiters(&network, &models, &limiters);
        if !admissibility.all_admissible() {
            return Err(SchemeError::Inadmissible(Box::new(admissibility)));
        }
        Ok(Problem {
            network,
            models,
            limiters,
            admissibility,
            initial,
            horizon,
            lip_g,
            m0,
        })
    }
}

/// `max Lip(g∘γ)` and `max H(s, (g∘γ)′)` by divided differences.
fn datum_constants(network: &Network, costs: &[Arc<dyn ArcCost>], g: &InitialDatum) -> (f64, f64) {
    let mut lip: f64 = 0.0;
    let mut m0 = f64::NEG_INFINITY;
    for (arc, cost) in network.arcs().iter().zip(costs) {
        let n = DATUM_SAMPLES;
        let ss: Vec<f64> = (0..=n).map(|i| arc.length * i as f64 / n as f64).collect();
        let vals: Vec<f64> = ss.iter().map(|&s| g.eval(arc.geometry.point_at(s))).collect();
        for i in 0..n {
            let slope = (vals[i + 1] - vals[i]) / (ss[i + 1] - ss[i]);
            lip = lip.max(slope.abs());
            let mid = 0.5 * (ss[i] + ss[i + 1]);
            let at = Location {
                s: mid,
                x: arc.geometry.point_at(mid),
            };
            m0 = m0.max(cost.hamiltonian(at, slope));
        }
    }
    (lip, m0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::QuadraticCost;
    use crate::network::{traffic_circle, triangle};

    #[test]
    fn test_one_constants() {
        let p = Problem::builder(triangle())
            .uniform_cost(QuadraticCost::kinetic())
            .uniform_limiter(-5.0)
            .build()
            .unwrap();
        assert_eq!(p.lip_g(), 0.0);
        assert_eq!(p.m0(), 0.0);
        assert!((p.beta0() - 4.0 * 10f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn traffic_circle_beta0() {
        let p = Problem::builder(traffic_circle())
            .uniform_cost(QuadraticCost::target([1.0, 1.0]))
            .horizon(5.0)
            .build()
            .unwrap();
        assert!((p.beta0() - 8.0).abs() < 1e-9);
        assert!((p.limiters().get(0) - 2.0).abs() < 1e-6);
    }

    #[test]
    fn inadmissible_limiter_rejected() {
        let err = Problem::builder(traffic_circle())
            .uniform_cost(QuadraticCost::target([1.0, 1.0]))
            .limiter_override("v1", 2.1)
            .build()
            .unwrap_err();
        match err {
            SchemeError::Inadmissible(report) => {
                assert!(!report.vertices[0].admissible);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_cost_reported() {
        let err = Problem::builder(triangle())
            .arc_cost("g1", Arc::new(QuadraticCost::kinetic()))
            .build()
            .unwrap_err();
        assert_eq!(err, SchemeError::MissingCost("g2".into()));
    }

    #[test]
    fn negative_horizon_rejected() {
        let err = Problem::builder(triangle())
            .uniform_cost(QuadraticCost::kinetic())
            .horizon(-1.0)
            .build()
            .unwrap_err();
        assert_eq!(err, SchemeError::InvalidHorizon(-1.0));
    }
}
