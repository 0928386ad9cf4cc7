//! JSON scenario files and the driver behind `hjnet run`.
//!
//! A scenario names a network, the arc costs, the flux limiters, the initial
//! datum, the horizon and what to run. [`parse_scenario`] validates it and
//! resolves every id; [`Scenario::run`] solves and writes the artifacts.
//!
//! ```
//! let sc = hjnet::scenario::load_scenario("triangle_quadratic").unwrap();
//! assert_eq!(sc.network().arcs().len(), 3);
//! assert_eq!(sc.spec().horizon, 1.0);
//! ```

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::analysis::{
    convergence_study, courant_number, error_norms, fmt17, reference_from_fine_grid, AnalysisError,
    ConvergenceTable, DtRule, ErrorReport, Reference, UniformFluxExact,
};
use crate::hamiltonian::{AdmissibilityReport, ArcCost, PotentialTerm, PowerCost, QuadraticCost};
use crate::network::{build_network, traffic_circle, triangle, ArcSpec, Network, VertexSpec};
use crate::scheme::{
    check_invariants, reconstruct_trajectory, solve, Branch, InitialDatum, InvariantReport, LimiterChoice, Problem,
    SchemeError, Solution, SolverConfig,
};

/// Version written in the `schema` field of every scenario.
pub const SCHEMA_VERSION: u32 = 1;

const BUNDLED: &[(&str, &str)] = &[
    ("triangle_quadratic", include_str!("../scenarios/triangle_quadratic.json")),
    ("triangle_potential", include_str!("../scenarios/triangle_potential.json")),
    ("traffic_circle", include_str!("../scenarios/traffic_circle.json")),
    ("traffic_circle_two_targets", include_str!("../scenarios/traffic_circle_two_targets.json")),
];

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid field `{field}`: {reason}")]
    Validation { field: String, reason: String },
    #[error("cannot write {path}: {message}")]
    Output { path: String, message: String },
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> ScenarioError {
    ScenarioError::Validation {
        field: field.into(),
        reason: reason.into(),
    }
}

/// Names of the scenarios compiled into the binary.
pub fn bundled_names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(name, _)| *name)
}

/// Source text of a bundled scenario.
pub fn bundled(name: &str) -> Option<&'static str> {
    let name = name.strip_suffix(".json").unwrap_or(name);
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

// ---------------------------------------------------------------------------
// file format

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NetworkSpec {
    /// `{"builtin": "triangle" | "traffic_circle"}`
    Builtin { builtin: String },
    Explicit {
        vertices: Vec<VertexSpec>,
        arcs: Vec<ArcSpec>,
    },
}

/// Arc cost family. `potential` is added to the Lagrangian and subtracted
/// from the Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum CostSpec {
    /// `H = μ²/2 − V`, `L = λ²/2 + V`.
    Quadratic {
        #[serde(default)]
        potential: Vec<PotentialTerm>,
    },
    /// `H = |μ|ᵖ/p − V`.
    Power {
        exponent: f64,
        #[serde(default)]
        potential: Vec<PotentialTerm>,
    },
}

impl CostSpec {
    fn build(&self) -> Arc<dyn ArcCost> {
        match self {
            CostSpec::Quadratic { potential } => Arc::new(QuadraticCost::with_potential(potential.clone())),
            CostSpec::Power { exponent, potential } => Arc::new(PowerCost::new(*exponent, potential.clone())),
        }
    }

    fn is_kinetic(&self) -> bool {
        match self {
            CostSpec::Quadratic { potential } => potential.is_empty(),
            CostSpec::Power { exponent, potential } => *exponent == 2.0 && potential.is_empty(),
        }
    }
}

/// A number, or the string `"auto"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Beta0Spec {
    Value(f64),
    Keyword(String),
}

impl Default for Beta0Spec {
    fn default() -> Self {
        Beta0Spec::Keyword("auto".into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostsSpec {
    #[serde(default)]
    pub beta0: Beta0Spec,
    /// Cost of every arc not listed in `arcs`.
    #[serde(default)]
    pub default: Option<CostSpec>,
    #[serde(default)]
    pub arcs: BTreeMap<String, CostSpec>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimiterOverrides {
    #[serde(default)]
    pub overrides: BTreeMap<String, f64>,
}

/// `"max_admissible"`, `{"uniform": c}`, `{"values": {vertex: c}}` or
/// `{"max_admissible": {"overrides": {vertex: c}}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LimiterSpec {
    Keyword(String),
    Uniform { uniform: f64 },
    Values { values: BTreeMap<String, f64> },
    MaxAdmissible { max_admissible: LimiterOverrides },
}

impl Default for LimiterSpec {
    fn default() -> Self {
        LimiterSpec::Keyword("max_admissible".into())
    }
}

fn one() -> f64 {
    1.0
}

/// Initial datum family, evaluated at the physical point.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialSpec {
    #[default]
    Zero,
    Constant(f64),
    /// `weight·|x − center| + offset`
    Distance {
        center: [f64; 2],
        #[serde(default = "one")]
        weight: f64,
        #[serde(default)]
        offset: f64,
    },
    /// `weight·|x − center|² + offset`
    SquaredDistance {
        center: [f64; 2],
        #[serde(default = "one")]
        weight: f64,
        #[serde(default)]
        offset: f64,
    },
    /// `gradient·x + offset`
    Affine {
        gradient: [f64; 2],
        #[serde(default)]
        offset: f64,
    },
}

impl InitialSpec {
    pub fn datum(&self) -> InitialDatum {
        match *self {
            InitialSpec::Zero => InitialDatum::Zero,
            InitialSpec::Constant(c) => InitialDatum::Constant(c),
            InitialSpec::Distance { center, weight, offset } => InitialDatum::from_fn(move |x| {
                weight * (x[0] - center[0]).hypot(x[1] - center[1]) + offset
            }),
            InitialSpec::SquaredDistance { center, weight, offset } => InitialDatum::from_fn(move |x| {
                let (a, b) = (x[0] - center[0], x[1] - center[1]);
                weight * (a * a + b * b) + offset
            }),
            InitialSpec::Affine { gradient, offset } => {
                InitialDatum::from_fn(move |x| gradient[0] * x[0] + gradient[1] * x[1] + offset)
            }
        }
    }

    fn parameters(&self) -> Vec<f64> {
        match *self {
            InitialSpec::Zero => vec![],
            InitialSpec::Constant(c) => vec![c],
            InitialSpec::Distance { center, weight, offset } | InitialSpec::SquaredDistance { center, weight, offset } => {
                vec![center[0], center[1], weight, offset]
            }
            InitialSpec::Affine { gradient, offset } => vec![gradient[0], gradient[1], offset],
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    #[default]
    Single,
    Ladder,
}

/// What errors are measured against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceSpec {
    /// Closed form for kinetic costs, `g ≡ 0` and one negative limiter.
    Exact,
    /// A solve with this `Δx` and the run's `Δt` rule.
    Fine(f64),
}

/// Accepts `exact` and `fine:<dx>`.
impl FromStr for ReferenceSpec {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        if text == "exact" {
            return Ok(ReferenceSpec::Exact);
        }
        let dx = text
            .strip_prefix("fine:")
            .and_then(|d| d.parse::<f64>().ok())
            .ok_or_else(|| format!("unknown reference `{text}`; expected exact or fine:<dx>"))?;
        Ok(ReferenceSpec::Fine(dx))
    }
}

fn default_rungs() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    #[serde(default)]
    pub mode: RunMode,
    /// Single runs use this `Δx`; ladders start from it and halve.
    pub dx: f64,
    #[serde(default = "DtRule::power_default")]
    pub dt_rule: DtRule,
    #[serde(default = "default_rungs")]
    pub rungs: usize,
    #[serde(default)]
    pub reference: Option<ReferenceSpec>,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    /// Times written to the solution CSV; empty means the final time only.
    #[serde(default)]
    pub times: Vec<f64>,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: default_dir(),
            times: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Diagnostics {
    /// Run the invariant checks (equi-Lipschitz bound and friends) and
    /// record them in the metadata. Ladders only check when
    /// `fail_on_violation` is also set.
    #[serde(default)]
    pub lipschitz_check: bool,
    /// Fail the run when an invariant check fails.
    #[serde(default)]
    pub fail_on_violation: bool,
    /// Reconstruct the optimal trajectory ending at every vertex.
    #[serde(default)]
    pub trajectory_dump: bool,
    /// Write every level, with controls and vertex branches.
    #[serde(default)]
    pub step_dump: bool,
}

/// The on-disk form of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub schema: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub network: NetworkSpec,
    pub costs: CostsSpec,
    #[serde(default)]
    pub limiters: LimiterSpec,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub run: RunSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub diagnostics: Diagnostics,
}

// ---------------------------------------------------------------------------
// validation

/// A validated scenario with its network built.
#[derive(Debug, Clone)]
pub struct Scenario {
    spec: ScenarioSpec,
    network: Network,
    costs: Vec<CostSpec>,
    limiters: LimiterChoice,
    overrides: Vec<(String, f64)>,
}

/// Reads and validates a scenario file.
pub fn parse_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| ScenarioError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_scenario_str(&text, &path.display().to_string())
}

/// Validates scenario text; `origin` only labels error messages.
pub fn parse_scenario_str(text: &str, origin: &str) -> Result<Scenario, ScenarioError> {
    let spec: ScenarioSpec = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
        path: origin.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Scenario::from_spec(spec)
}

/// A file path, or the name of a bundled scenario when no such file exists.
pub fn load_scenario(name_or_path: &str) -> Result<Scenario, ScenarioError> {
    let path = Path::new(name_or_path);
    if path.exists() {
        return parse_scenario(path);
    }
    match bundled(name_or_path) {
        Some(text) => parse_scenario_str(text, &format!("<bundled {name_or_path}>")),
        None => Err(ScenarioError::Io {
            path: name_or_path.to_string(),
            message: format!(
                "no such file, and not a bundled scenario ({})",
                bundled_names().collect::<Vec<_>>().join(", ")
            ),
        }),
    }
}

fn check_finite(field: &str, values: &[f64]) -> Result<(), ScenarioError> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(invalid(field, "values must be finite"))
    }
}

fn check_cost(field: &str, cost: &CostSpec) -> Result<(), ScenarioError> {
    let potential = match cost {
        CostSpec::Quadratic { potential } => potential,
        CostSpec::Power { exponent, potential } => {
            if !(*exponent > 1.0 && exponent.is_finite()) {
                return Err(invalid(field, format!("exponent must exceed 1, got {exponent}")));
            }
            potential
        }
    };
    for term in potential {
        match *term {
            PotentialTerm::Distance { weight, center } => check_finite(field, &[weight, center[0], center[1]])?,
            PotentialTerm::Coordinate { weight, axis } => {
                check_finite(field, &[weight])?;
                if axis > 1 {
                    return Err(invalid(field, format!("axis must be 0 or 1, got {axis}")));
                }
            }
        }
    }
    Ok(())
}

fn build_spec_network(spec: &NetworkSpec) -> Result<Network, ScenarioError> {
    match spec {
        NetworkSpec::Builtin { builtin } => match builtin.as_str() {
            "triangle" => Ok(triangle()),
            "traffic_circle" => Ok(traffic_circle()),
            other => Err(invalid(
                "network.builtin",
                format!("unknown network `{other}`; expected triangle or traffic_circle"),
            )),
        },
        NetworkSpec::Explicit { vertices, arcs } => {
            build_network(vertices.clone(), arcs.clone()).map_err(|e| invalid("network", e.to_string()))
        }
    }
}

impl Scenario {
    /// Validates `spec` and resolves vertex and arc ids.
    pub fn from_spec(spec: ScenarioSpec) -> Result<Scenario, ScenarioError> {
        if spec.schema != SCHEMA_VERSION {
            return Err(invalid(
                "schema",
                format!("unsupported version {}; this build reads {SCHEMA_VERSION}", spec.schema),
            ));
        }
        if spec.name.trim().is_empty() {
            return Err(invalid("name", "must not be empty"));
        }
        let network = build_spec_network(&spec.network)?;

        // costs
        if let Beta0Spec::Value(b) = spec.costs.beta0 {
            if !(b > 0.0 && b.is_finite()) {
                return Err(invalid("costs.beta0", format!("must be positive, got {b}")));
            }
        } else if spec.costs.beta0 != Beta0Spec::default() {
            return Err(invalid("costs.beta0", "must be a number or \"auto\""));
        }
        if let Some(c) = &spec.costs.default {
            check_cost("costs.default", c)?;
        }
        for (id, c) in &spec.costs.arcs {
            if network.arc_index(id).is_none() {
                return Err(invalid(format!("costs.arcs.{id}"), "no arc with this id"));
            }
            check_cost(&format!("costs.arcs.{id}"), c)?;
        }
        let costs = network
            .arcs()
            .iter()
            .map(|a| {
                spec.costs
                    .arcs
                    .get(&a.id)
                    .or(spec.costs.default.as_ref())
                    .cloned()
                    .ok_or_else(|| invalid("costs", format!("arc {} has no cost and there is no default", a.id)))
            })
            .collect::<Result<Vec<_>, _>>()?;

        // limiters
        let vertex_known = |field: &str, id: &str| {
            network
                .vertex_index(id)
                .map(|_| ())
                .ok_or_else(|| invalid(format!("{field}.{id}"), "no vertex with this id"))
        };
        let (limiters, overrides) = match &spec.limiters {
            LimiterSpec::Keyword(k) if k == "max_admissible" => (LimiterChoice::MaxAdmissible, Vec::new()),
            LimiterSpec::Keyword(k) => {
                return Err(invalid("limiters", format!("unknown keyword `{k}`; expected \"max_admissible\"")))
            }
            LimiterSpec::Uniform { uniform } => {
                check_finite("limiters.uniform", &[*uniform])?;
                (LimiterChoice::Uniform(*uniform), Vec::new())
            }
            LimiterSpec::Values { values } => {
                for id in values.keys() {
                    vertex_known("limiters.values", id)?;
                }
                let v = network
                    .vertices()
                    .iter()
                    .map(|x| {
                        values
                            .get(&x.id)
                            .copied()
                            .ok_or_else(|| invalid("limiters.values", format!("no value for vertex {}", x.id)))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                check_finite("limiters.values", &v)?;
                (LimiterChoice::Values(v), Vec::new())
            }
            LimiterSpec::MaxAdmissible { max_admissible } => {
                for (id, c) in &max_admissible.overrides {
                    vertex_known("limiters.max_admissible.overrides", id)?;
                    check_finite("limiters.max_admissible.overrides", &[*c])?;
                }
                let o = max_admissible.overrides.iter().map(|(k, v)| (k.clone(), *v)).collect();
                (LimiterChoice::MaxAdmissible, o)
            }
        };

        check_finite("initial", &spec.initial.parameters())?;
        if !(spec.horizon > 0.0 && spec.horizon.is_finite()) {
            return Err(invalid("T", format!("must be positive, got {}", spec.horizon)));
        }

        // run
        let run = &spec.run;
        let min_len = network.min_arc_length();
        if !(run.dx > 0.0 && run.dx < min_len) {
            return Err(invalid(
                "run.dx",
                format!("must lie in (0, {min_len}), the shortest arc length; got {}", run.dx),
            ));
        }
        if let DtRule::PowerRule { c, p } = run.dt_rule {
            if !(c > 0.0 && p > 0.0 && c.is_finite() && p.is_finite()) {
                return Err(invalid("run.dt_rule", format!("needs C > 0 and p > 0, got C = {c}, p = {p}")));
            }
        }
        if run.dt_rule.dt(run.dx) >= spec.horizon {
            return Err(invalid("run.dt_rule", "first time step is not below T"));
        }
        if run.mode == RunMode::Ladder {
            if run.rungs < 3 {
                return Err(invalid("run.rungs", format!("a ladder needs at least 3 rungs, got {}", run.rungs)));
            }
            if run.reference.is_none() {
                return Err(invalid("run.reference", "ladder mode needs a reference"));
            }
        }
        match run.reference {
            Some(ReferenceSpec::Exact) => {
                let uniform_c = match &limiters {
                    LimiterChoice::Uniform(c) => Some(*c),
                    LimiterChoice::Values(v) if v.iter().all(|c| *c == v[0]) => Some(v[0]),
                    _ => None,
                };
                let ok = costs.iter().all(CostSpec::is_kinetic)
                    && spec.initial == InitialSpec::Zero
                    && uniform_c.is_some_and(|c| c < 0.0);
                if !ok {
                    return Err(invalid(
                        "run.reference",
                        "the exact reference needs kinetic costs, a zero initial datum and one negative limiter",
                    ));
                }
            }
            Some(ReferenceSpec::Fine(fine)) => {
                let finest = run.dx / 2f64.powi(run.rungs.saturating_sub(1) as i32);
                let coarsest_needed = if run.mode == RunMode::Ladder { finest } else { run.dx };
                if !(fine > 0.0 && fine < coarsest_needed) {
                    return Err(invalid(
                        "run.reference",
                        format!("fine dx = {fine} must be positive and below {coarsest_needed}"),
                    ));
                }
            }
            None => {}
        }
        for &t in &spec.output.times {
            if !(0.0..=spec.horizon).contains(&t) {
                return Err(invalid("output.times", format!("{t} lies outside [0, {}]", spec.horizon)));
            }
        }

        Ok(Scenario {
            spec,
            network,
            costs,
            limiters,
            overrides,
        })
    }

    pub fn spec(&self) -> &ScenarioSpec {
        &self.spec
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    /// Applies command-line overrides and validates again.
    pub fn with_overrides(&self, o: &RunOverrides) -> Result<Scenario, ScenarioError> {
        let mut spec = self.spec.clone();
        if let Some(dx) = o.dx {
            spec.run.dx = dx;
        }
        if let Some(rule) = o.dt_rule {
            spec.run.dt_rule = rule;
        }
        if let Some(t) = o.horizon {
            spec.horizon = t;
            spec.output.times.retain(|&s| s <= t);
        }
        if let Some(dir) = &o.out_dir {
            spec.output.dir = dir.clone();
        }
        if let Some(n) = o.ladder {
            spec.run.mode = RunMode::Ladder;
            spec.run.rungs = n;
        }
        if let Some(r) = o.reference {
            spec.run.reference = Some(r);
        }
        spec.diagnostics.step_dump |= o.emit_steps;
        spec.diagnostics.lipschitz_check |= o.check_invariants;
        spec.diagnostics.fail_on_violation |= o.check_invariants;
        Scenario::from_spec(spec)
    }

    /// Builds the [`Problem`]; inadmissible limiters fail here.
    pub fn problem(&self) -> Result<Problem, ScenarioError> {
        let mut b = Problem::builder(self.network.clone())
            .limiters(self.limiters.clone())
            .initial(self.spec.initial.datum())
            .horizon(self.spec.horizon)
            .sampling_dx(self.spec.run.dx.min(self.network.min_arc_length() / 50.0));
        for (arc, cost) in self.network.arcs().iter().zip(&self.costs) {
            b = b.arc_cost(&arc.id, cost.build());
        }
        for (v, c) in &self.overrides {
            b = b.limiter_override(v, *c);
        }
        if let Beta0Spec::Value(beta0) = self.spec.costs.beta0 {
            b = b.beta0(beta0);
        }
        Ok(b.build()?)
    }

    /// Solves and writes every requested artifact into the output directory.
    pub fn run(&self) -> Result<RunOutcome, ScenarioError> {
        let problem = self.problem()?;
        let dir = &self.spec.output.dir;
        fs::create_dir_all(dir).map_err(|e| output_error(dir, e))?;
        match self.spec.run.mode {
            RunMode::Single => self.run_single(&problem, dir),
            RunMode::Ladder => self.run_ladder(&problem, dir),
        }
    }

    fn ladder(&self) -> Vec<f64> {
        (0..self.spec.run.rungs)
            .map(|k| self.spec.run.dx / 2f64.powi(k as i32))
            .collect()
    }

    fn reference(
        &self,
        problem: &Problem,
        ladder: &[f64],
        config: &SolverConfig,
    ) -> Result<Option<Box<dyn Reference>>, ScenarioError> {
        Ok(match self.spec.run.reference {
            None => None,
            Some(ReferenceSpec::Exact) => Some(Box::new(UniformFluxExact::new(problem.limiters().get(0)))),
            Some(ReferenceSpec::Fine(dx)) => {
                let pair = self.spec.run.dt_rule.pair(dx);
                Some(Box::new(reference_from_fine_grid(problem, pair, ladder, config)?))
            }
        })
    }

    fn run_single(&self, problem: &Problem, dir: &Path) -> Result<RunOutcome, ScenarioError> {
        let diag = self.spec.diagnostics;
        let run = &self.spec.run;
        let config = SolverConfig {
            record_steps: diag.step_dump || diag.trajectory_dump || diag.lipschitz_check,
            ..SolverConfig::default()
        };
        let pair = run.dt_rule.pair(run.dx);
        let sol = solve(problem, pair, &config)?;
        let mut artifacts = Vec::new();

        let path = dir.join("solution.csv");
        write_solution_csv(&path, &sol, &self.output_levels(&sol))?;
        artifacts.push(path);
        if diag.step_dump {
            let path = dir.join("steps.csv");
            write_steps_csv(&path, &sol)?;
            artifacts.push(path);
            let path = dir.join("branches.jsonl");
            write_branches(&path, &sol)?;
            artifacts.push(path);
        }
        if diag.trajectory_dump {
            let path = dir.join("trajectories.jsonl");
            write_trajectories(&path, problem, &sol)?;
            artifacts.push(path);
        }
        let errors = match self.reference(problem, &[run.dx], &config)? {
            Some(r) => Some(error_norms(&sol, r.as_ref())?),
            None => None,
        };
        let invariants = diag.lipschitz_check.then(|| check_invariants(problem, &sol));

        let mut meta = self.metadata(problem);
        meta.single = Some(SingleRun {
            dx: pair.dx,
            dt: pair.dt,
            tau: sol.grids.time.tau,
            n_steps: sol.n_steps(),
            distinct_nodes: sol.grids.distinct_nodes(problem.network()),
            courant: courant_number(&sol),
            runtime_seconds: sol.runtime.as_secs_f64(),
            grids: sol
                .grids
                .arcs
                .iter()
                .map(|g| ArcGridInfo {
                    arc: problem.network().arc(g.arc).id.clone(),
                    n_cells: g.n_cells,
                    spacing: g.spacing,
                })
                .collect(),
            errors,
            invariants: invariants.clone(),
        });
        let path = dir.join("metadata.json");
        artifacts.push(path.clone());
        meta.artifacts = artifact_names(&artifacts);
        write_json(&path, &meta)?;

        if let Some(report) = invariants.filter(|r| !r.passes()) {
            if diag.fail_on_violation {
                return Err(SchemeError::InvariantViolated(report.summary()).into());
            }
            log::warn!("invariant check failed: {}", report.summary());
        }
        Ok(RunOutcome { metadata: meta, artifacts })
    }

    fn run_ladder(&self, problem: &Problem, dir: &Path) -> Result<RunOutcome, ScenarioError> {
        let strict = self.spec.diagnostics.lipschitz_check && self.spec.diagnostics.fail_on_violation;
        let config = SolverConfig {
            record_steps: strict,
            check_invariants: strict,
            ..SolverConfig::default()
        };
        let ladder = self.ladder();
        let reference = self
            .reference(problem, &ladder, &config)?
            .expect("validated: ladder mode has a reference");
        let table = convergence_study(problem, reference.as_ref(), &ladder, self.spec.run.dt_rule, &config)?;
        let mut artifacts = Vec::new();
        let path = dir.join("convergence.csv");
        let file = File::create(&path).map_err(|e| output_error(&path, e))?;
        table.write_csv(BufWriter::new(file))?;
        artifacts.push(path);

        let mut meta = self.metadata(problem);
        meta.ladder = Some(table);
        let path = dir.join("metadata.json");
        artifacts.push(path.clone());
        meta.artifacts = artifact_names(&artifacts);
        write_json(&path, &meta)?;
        Ok(RunOutcome { metadata: meta, artifacts })
    }

    /// Level indices for `output.times`, snapped to the nearest level.
    fn output_levels(&self, sol: &Solution) -> Vec<usize> {
        let n = sol.n_steps();
        if self.spec.output.times.is_empty() {
            return vec![n];
        }
        let tau = sol.grids.time.tau;
        let mut levels: Vec<usize> = self
            .spec
            .output
            .times
            .iter()
            .map(|&t| {
                let k = ((t / tau).round() as usize).min(n);
                if (sol.time(k) - t).abs() > 1e-9 * t.max(1.0) {
                    log::warn!("output time {t} is not a grid time; writing t = {}", sol.time(k));
                }
                k
            })
            .collect();
        levels.sort_unstable();
        levels.dedup();
        levels
    }

    fn metadata(&self, problem: &Problem) -> RunMetadata {
        let net = problem.network();
        RunMetadata {
            scenario: self.spec.name.clone(),
            schema: self.spec.schema,
            version: env!("CARGO_PKG_VERSION"),
            mode: self.spec.run.mode,
            horizon: problem.horizon(),
            dt_rule: self.spec.run.dt_rule,
            beta0: problem.beta0(),
            ell0: problem.ell0(),
            lip_g: problem.lip_g(),
            arcs: problem
                .models()
                .iter()
                .map(|m| ArcInfo {
                    arc: net.arc(m.arc()).id.clone(),
                    length: m.length(),
                    critical_value: m.critical_value(),
                })
                .collect(),
            limiters: problem.admissibility().clone(),
            single: None,
            ladder: None,
            artifacts: Vec::new(),
        }
    }
}

/// Command-line overrides of a scenario.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOverrides {
    pub dx: Option<f64>,
    pub dt_rule: Option<DtRule>,
    pub horizon: Option<f64>,
    pub out_dir: Option<PathBuf>,
    pub emit_steps: bool,
    /// Switch to ladder mode with this many rungs.
    pub ladder: Option<usize>,
    pub reference: Option<ReferenceSpec>,
    pub check_invariants: bool,
}

// ---------------------------------------------------------------------------
// artifacts

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArcInfo {
    pub arc: String,
    pub length: f64,
    /// `c_γ`, the largest limiter this arc admits at its endpoints.
    pub critical_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArcGridInfo {
    pub arc: String,
    pub n_cells: usize,
    pub spacing: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingleRun {
    pub dx: f64,
    pub dt: f64,
    pub tau: f64,
    pub n_steps: usize,
    pub distinct_nodes: usize,
    pub courant: f64,
    pub runtime_seconds: f64,
    pub grids: Vec<ArcGridInfo>,
    pub errors: Option<ErrorReport>,
    pub invariants: Option<InvariantReport>,
}

/// Contents of `metadata.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetadata {
    pub scenario: String,
    pub schema: u32,
    pub version: &'static str,
    pub mode: RunMode,
    pub horizon: f64,
    pub dt_rule: DtRule,
    pub beta0: f64,
    pub ell0: f64,
    pub lip_g: f64,
    pub arcs: Vec<ArcInfo>,
    pub limiters: AdmissibilityReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub single: Option<SingleRun>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ladder: Option<ConvergenceTable>,
    pub artifacts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub metadata: RunMetadata,
    pub artifacts: Vec<PathBuf>,
}

fn output_error(path: &Path, e: impl ToString) -> ScenarioError {
    ScenarioError::Output {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn artifact_names(paths: &[PathBuf]) -> Vec<String> {
    paths
        .iter()
        .filter_map(|p| p.file_name())
        .map(|n| n.to_string_lossy().into_owned())
        .collect()
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ScenarioError> {
    let file = File::create(path).map_err(|e| output_error(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| output_error(path, e))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| output_error(path, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>, ScenarioError> {
    let file = File::create(path).map_err(|e| output_error(path, e))?;
    Ok(csv::Writer::from_writer(BufWriter::new(file)))
}

/// Columns `arc_id, i, s, x1, x2, t, value`; endpoints repeat on every
/// incident arc.
pub fn write_solution_csv(path: &Path, sol: &Solution, levels: &[usize]) -> Result<(), ScenarioError> {
    let mut w = csv_writer(path)?;
    let err = |e: csv::Error| output_error(path, e);
    w.write_record(["arc_id", "i", "s", "x1", "x2", "t", "value"]).map_err(err)?;
    let net = sol.network();
    for &n in levels {
        let t = fmt17(sol.time(n));
        for g in &sol.grids.arcs {
            let arc = net.arc(g.arc);
            let values = sol.arc_values(g.arc, n);
            for (i, v) in values.iter().enumerate() {
                let s = g.node(i);
                let x = arc.geometry.point_at(s);
                w.write_record([
                    arc.id.clone(),
                    i.to_string(),
                    fmt17(s),
                    fmt17(x[0]),
                    fmt17(x[1]),
                    t.clone(),
                    fmt17(*v),
                ])
                .map_err(err)?;
            }
        }
    }
    w.flush().map_err(|e| output_error(path, e))
}

/// Every level with the minimising control; `alpha` is `NaN` on level 0.
fn write_steps_csv(path: &Path, sol: &Solution) -> Result<(), ScenarioError> {
    let mut w = csv_writer(path)?;
    let err = |e: csv::Error| output_error(path, e);
    w.write_record(["arc_id", "i", "s", "level", "t", "value", "alpha"]).map_err(err)?;
    let net = sol.network();
    for n in 0..=sol.n_steps() {
        let t = fmt17(sol.time(n));
        for g in &sol.grids.arcs {
            let id = &net.arc(g.arc).id;
            let values = sol.arc_values(g.arc, n);
            for (i, v) in values.iter().enumerate() {
                let alpha = if n == 0 {
                    f64::NAN
                } else {
                    sol.records[n - 1].alpha[g.arc][i]
                };
                w.write_record([
                    id.clone(),
                    i.to_string(),
                    fmt17(g.node(i)),
                    n.to_string(),
                    t.clone(),
                    fmt17(*v),
                    fmt17(alpha),
                ])
                .map_err(err)?;
            }
        }
    }
    w.flush().map_err(|e| output_error(path, e))
}

/// One JSON object per vertex and step: which rule set the vertex value.
fn write_branches(path: &Path, sol: &Solution) -> Result<(), ScenarioError> {
    let file = File::create(path).map_err(|e| output_error(path, e))?;
    let mut w = BufWriter::new(file);
    let net = sol.network();
    for (k, rec) in sol.records.iter().enumerate() {
        let n = k + 1;
        for (x, branch) in rec.branches.iter().enumerate() {
            let (kind, arc) = match branch {
                Branch::Arc(a) => ("arc", Some(net.arc(*a).id.as_str())),
                Branch::FluxLimiter => ("flux_limiter", None),
            };
            let line = json!({
                "level": n,
                "t": sol.time(n),
                "vertex": net.vertex(x).id,
                "value": sol.vertex_value(x, n),
                "branch": kind,
                "arc": arc,
            });
            writeln!(w, "{line}").map_err(|e| output_error(path, e))?;
        }
    }
    w.flush().map_err(|e| output_error(path, e))
}

/// Trajectories ending at every vertex whose final value came from an arc.
fn write_trajectories(path: &Path, problem: &Problem, sol: &Solution) -> Result<(), ScenarioError> {
    let file = File::create(path).map_err(|e| output_error(path, e))?;
    let mut w = BufWriter::new(file);
    let net = problem.network();
    let n = sol.n_steps();
    for x in 0..net.vertices().len() {
        let traj = match reconstruct_trajectory(problem, sol, x, n) {
            Ok(t) => t,
            Err(SchemeError::NotArcBranch { .. }) => continue,
            Err(e) => return Err(e.into()),
        };
        let check = traj.check(problem, sol);
        let line = json!({
            "vertex": net.vertex(x).id,
            "arc": net.arc(traj.arc).id,
            "trajectory": traj,
            "check": check,
            "passes": check.passes(),
        });
        writeln!(w, "{line}").map_err(|e| output_error(path, e))?;
    }
    w.flush().map_err(|e| output_error(path, e))
}
