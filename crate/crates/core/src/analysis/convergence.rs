use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::norms::{error_norms, ErrorReport};
use super::reference::Reference;
use super::{fmt17, AnalysisError};
use crate::grid::StepPair;
use crate::scheme::{solve, Problem, SolverConfig};

/// How `Δt` follows `Δx` along a ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DtRule {
    /// `Δt = Δx/2`.
    HalfDx,
    /// `Δt = C·Δx^p`.
    PowerRule {
        #[serde(default = "default_c")]
        c: f64,
        #[serde(default = "default_p")]
        p: f64,
    },
}

fn default_c() -> f64 {
    0.5
}

fn default_p() -> f64 {
    0.8
}

impl DtRule {
    /// `Δt = Δx^{4/5}/2`.
    pub fn power_default() -> Self {
        DtRule::PowerRule {
            c: default_c(),
            p: default_p(),
        }
    }

    pub fn dt(&self, dx: f64) -> f64 {
        match *self {
            DtRule::HalfDx => 0.5 * dx,
            DtRule::PowerRule { c, p } => c * dx.powf(p),
        }
    }

    pub fn pair(&self, dx: f64) -> StepPair {
        StepPair::new(dx, self.dt(dx))
    }
}

/// Accepts `half_dx`, `power` and `power:C:p`.
impl FromStr for DtRule {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let bad = || format!("unknown dt rule `{text}`; expected half_dx, power or power:C:p");
        match text {
            "half_dx" => Ok(DtRule::HalfDx),
            "power" | "power_rule" => Ok(DtRule::power_default()),
            _ => {
                let rest = text.strip_prefix("power:").ok_or_else(bad)?;
                let (c, p) = rest.split_once(':').ok_or_else(bad)?;
                let c: f64 = c.parse().map_err(|_| bad())?;
                let p: f64 = p.parse().map_err(|_| bad())?;
                if !(c > 0.0 && p > 0.0) {
                    return Err(format!("dt rule needs C > 0 and p > 0, got C = {c}, p = {p}"));
                }
                Ok(DtRule::PowerRule { c, p })
            }
        }
    }
}

/// One rung with the rates against the previous rung (`NaN` on the first).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub report: ErrorReport,
    pub rate_inf: f64,
    pub rate_1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    /// Builds rates `log₂(E(Δx)/E(Δx/2))` for consecutive rows.
    pub fn from_reports(reports: Vec<ErrorReport>) -> Self {
        let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(reports.len());
        for (k, r) in reports.iter().enumerate() {
            let (rate_inf, rate_1) = if k == 0 {
                (f64::NAN, f64::NAN)
            } else {
                let p = &reports[k - 1];
                ((p.e_inf / r.e_inf).log2(), (p.e_1 / r.e_1).log2())
            };
            rows.push(ConvergenceRow {
                report: *r,
                rate_inf,
                rate_1,
            });
        }
        ConvergenceTable { rows }
    }

    pub fn rates_inf(&self) -> Vec<f64> {
        self.rows.iter().skip(1).map(|r| r.rate_inf).collect()
    }

    pub fn rates_1(&self) -> Vec<f64> {
        self.rows.iter().skip(1).map(|r| r.rate_1).collect()
    }

    /// CSV with columns `dx, dt, E_inf, rate_inf, E_1, rate_1, time_s, courant`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), AnalysisError> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| AnalysisError::Output(e.to_string());
        w.write_record(["dx", "dt", "E_inf", "rate_inf", "E_1", "rate_1", "time_s", "courant"])
            .map_err(io)?;
        for row in &self.rows {
            let r = &row.report;
            w.write_record([
                fmt17(r.dx),
                fmt17(r.dt),
                fmt17(r.e_inf),
                fmt17(row.rate_inf),
                fmt17(r.e_1),
                fmt17(row.rate_1),
                fmt17(r.runtime_seconds),
                fmt17(r.courant),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| AnalysisError::Output(e.to_string()))
    }
}

/// Solves at every `Δx` of `ladder` (each half the previous) and tabulates
/// the errors against `reference`.
pub fn convergence_study(
    problem: &Problem,
    reference: &dyn Reference,
    ladder: &[f64],
    rule: DtRule,
    config: &SolverConfig,
) -> Result<ConvergenceTable, AnalysisError> {
    if ladder.len() < 3 {
        return Err(AnalysisError::Ladder(format!("need at least 3 rungs, got {}", ladder.len())));
    }
    for w in ladder.windows(2) {
        if ((w[0] / w[1]) - 2.0).abs() > 1e-9 {
            return Err(AnalysisError::Ladder(format!("{} is not half of {}", w[1], w[0])));
        }
    }
    let config = SolverConfig {
        record_steps: config.record_steps && config.check_invariants,
        ..*config
    };
    let mut reports = Vec::with_capacity(ladder.len());
    for &dx in ladder {
        let sol = solve(problem, rule.pair(dx), &config)?;
        let report = error_norms(&sol, reference)?;
        log::info!("dx = {dx}: E_inf = {:.3e}, E_1 = {:.3e}", report.e_inf, report.e_1);
        reports.push(report);
    }
    Ok(ConvergenceTable::from_reports(reports))
}
