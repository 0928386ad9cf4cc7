use serde::Serialize;

use super::model::ArcModel;
use super::HamiltonianError;
use crate::network::Network;

/// Slack of the admissibility test, absorbing the sampling error in c_γ.
pub const ADMISSIBILITY_TOL: f64 = 1e-8;

/// Flux limiter `c_x` per vertex, indexed like [`Network::vertices`].
#[derive(Debug, Clone, PartialEq)]
pub struct FluxLimiters {
    values: Vec<f64>,
}

impl FluxLimiters {
    pub fn new(network: &Network, values: Vec<f64>) -> Result<Self, HamiltonianError> {
        if values.len() != network.vertices().len() {
            return Err(HamiltonianError::LimiterCount {
                expected: network.vertices().len(),
                got: values.len(),
            });
        }
        Ok(FluxLimiters { values })
    }

    pub fn uniform(network: &Network, c: f64) -> Self {
        FluxLimiters {
            values: vec![c; network.vertices().len()],
        }
    }

    pub fn get(&self, vertex: usize) -> f64 {
        self.values[vertex]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VertexAdmissibility {
    pub vertex: String,
    pub limiter: f64,
    /// `min` of c_γ over incident arcs.
    pub bound: f64,
    pub admissible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub vertices: Vec<VertexAdmissibility>,
}

impl AdmissibilityReport {
    pub fn all_admissible(&self) -> bool {
        self.vertices.iter().all(|v| v.admissible)
    }
}

impl std::fmt::Display for AdmissibilityReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "{:<10} {:>14} {:>14}  status", "vertex", "c_x", "bound")?;
        for v in &self.vertices {
            let status = if v.admissible { "ok" } else { "INADMISSIBLE" };
            writeln!(f, "{:<10} {:>14.8} {:>14.8}  {status}", v.vertex, v.limiter, v.bound)?;
        }
        Ok(())
    }
}

fn vertex_bounds(network: &Network, models: &[ArcModel]) -> Vec<f64> {
    (0..network.vertices().len())
        .map(|x| {
            network
                .incidence(x)
                .iter()
                .map(|inc| models[inc.arc].critical_value())
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// Compares every `c_x` with `min_{γ ∈ E⁺_x} c_γ`.
pub fn check_flux_limiters(network: &Network, models: &[ArcModel], limiters: &FluxLimiters) -> AdmissibilityReport {
    let vertices = vertex_bounds(network, models)
        .into_iter()
        .enumerate()
        .map(|(x, bound)| {
            let limiter = limiters.get(x);
            VertexAdmissibility {
                vertex: network.vertex(x).id.clone(),
                limiter,
                bound,
                admissible: limiter <= bound + ADMISSIBILITY_TOL,
            }
        })
        .collect();
    AdmissibilityReport { vertices }
}

/// Largest admissible limiters: `c_x = min_{γ ∈ E⁺_x} c_γ`.
pub fn max_admissible(network: &Network, models: &[ArcModel]) -> FluxLimiters {
    FluxLimiters {
        values: vertex_bounds(network, models),
    }
}
