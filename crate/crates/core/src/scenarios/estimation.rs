//! Static parameter estimation: stationary agents agree on a scalar over
//! the extended triangulation graph of their positions.

use crate::consensus::{
    run_consensus, safe_interval, AgentBehavior, ConsensusRun, ConsensusState, SafeInterval,
    WmsrConfig,
};
use crate::geometry::{delaunay, Point2};
use crate::graph::CommGraph;
use crate::scenarios::ScenarioError;

#[derive(Debug, Clone)]
pub struct EstimationRun {
    pub run: ConsensusRun,
    pub safe: SafeInterval,
    /// Per trajectory step: whether every cooperative value sat inside the
    /// safe interval.
    pub containment: Vec<bool>,
    pub graph: CommGraph,
}

impl EstimationRun {
    pub fn always_contained(&self) -> bool {
        self.containment.iter().all(|&c| c)
    }
}

/// Build the level-`k` communication graph of the (static) positions once,
/// then run consensus on the scalar estimates.
pub fn run_parameter_estimation(
    positions: &[Point2],
    initial_values: &[f64],
    behaviors: &[AgentBehavior],
    k: u32,
    cfg: &WmsrConfig,
) -> Result<EstimationRun, ScenarioError> {
    if positions.len() != initial_values.len() {
        return Err(ScenarioError::Config(format!(
            "{} positions but {} initial values",
            positions.len(),
            initial_values.len()
        )));
    }
    let graph = CommGraph::from_triangulation(&delaunay(positions)?).k_hop_extend(k)?;
    let initial = ConsensusState::scalar(initial_values);
    let safe = safe_interval(&initial, behaviors)?;
    let run = run_consensus(&initial, &graph, cfg, behaviors)?;
    let containment = run
        .trajectory
        .iter()
        .map(|state| {
            state
                .values
                .iter()
                .enumerate()
                .filter(|(i, _)| behaviors[*i].is_cooperative())
                .all(|(_, v)| safe.contains(v))
        })
        .collect();
    Ok(EstimationRun {
        run,
        safe,
        containment,
        graph,
    })
}
