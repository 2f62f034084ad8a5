//! Synchronous consensus engine: plain linear consensus (F = 0) and W-MSR
//! filtering with adversary behaviors, on scalar or small-vector values.
//!
//! Each round every cooperative agent sorts its neighbors' values, discards
//! up to F values strictly above its own and up to F strictly below, and
//! moves to the equal-weight average of itself and the survivors. Values in
//! a vector are filtered and averaged per component, independently.

use std::collections::BTreeSet;
use std::io::Write;

use crate::graph::{CommGraph, GraphError};

#[derive(Debug, thiserror::Error)]
pub enum ConsensusError {
    #[error("agent {agent} carries {found} components, expected {expected}")]
    DimensionMismatch {
        agent: usize,
        expected: usize,
        found: usize,
    },
    #[error("{agents} agents but {behaviors} behavior entries")]
    BehaviorCountMismatch { agents: usize, behaviors: usize },
    #[error("{agents} agents but the graph has {graph} vertices")]
    GraphSizeMismatch { agents: usize, graph: usize },
    #[error("no cooperative agents")]
    NoCooperativeAgents,
    #[error("agent {0}: map adversaries only make sense in the map scenario")]
    UnsupportedBehavior(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// W-MSR parameters.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct WmsrConfig {
    /// Filter parameter F: how many extreme values to discard on each side.
    pub f: usize,
    /// Cooperative spread below which the run counts as converged.
    pub convergence_eps: f64,
    pub max_steps: usize,
}

impl Default for WmsrConfig {
    fn default() -> Self {
        WmsrConfig {
            f: 0,
            convergence_eps: 1e-6,
            max_steps: 10_000,
        }
    }
}

/// What an agent does each round. Adversaries broadcast one value to all
/// their neighbors instead of running the update rule.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum AgentBehavior {
    Cooperative,
    /// Broadcasts the same vector forever.
    ConstantAdversary(Vec<f64>),
    /// Broadcasts `start + step * drift`.
    DriftingAdversary {
        start: Vec<f64>,
        drift: Vec<f64>,
    },
    /// Claims the given grid cells are occupied (map scenario only).
    MapAdversary(BTreeSet<(usize, usize)>),
}

impl AgentBehavior {
    pub fn is_cooperative(&self) -> bool {
        matches!(self, AgentBehavior::Cooperative)
    }

    /// The vector an adversary shares at `step`; None for cooperative agents
    /// and for map adversaries, whose broadcasts are grid-valued.
    pub fn broadcast(&self, step: usize) -> Option<Vec<f64>> {
        match self {
            AgentBehavior::Cooperative | AgentBehavior::MapAdversary(_) => None,
            AgentBehavior::ConstantAdversary(v) => Some(v.clone()),
            AgentBehavior::DriftingAdversary { start, drift } => Some(
                start
                    .iter()
                    .zip(drift)
                    .map(|(s, d)| s + step as f64 * d)
                    .collect(),
            ),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            AgentBehavior::Cooperative => "coop",
            AgentBehavior::ConstantAdversary(_) => "adv-const",
            AgentBehavior::DriftingAdversary { .. } => "adv-drift",
            AgentBehavior::MapAdversary(_) => "adv-map",
        }
    }
}

/// Per-agent vector values at one synchronous step.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ConsensusState {
    pub values: Vec<Vec<f64>>,
    pub step: usize,
}

impl ConsensusState {
    pub fn new(values: Vec<Vec<f64>>) -> Self {
        ConsensusState { values, step: 0 }
    }

    pub fn scalar(values: &[f64]) -> Self {
        Self::new(values.iter().map(|&v| vec![v]).collect())
    }

    pub fn dim(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }
}

/// Componentwise min/max of the cooperative agents' initial values: the box
/// a safe consensus value must land in.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SafeInterval {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl SafeInterval {
    /// Containment with a few ulps of slack, since equal-weight averaging
    /// can overshoot the exact hull by rounding.
    pub fn contains(&self, value: &[f64]) -> bool {
        value.iter().enumerate().all(|(c, &v)| {
            let slack = 16.0 * f64::EPSILON * (self.lo[c].abs() + self.hi[c].abs() + 1.0);
            self.lo[c] - slack <= v && v <= self.hi[c] + slack
        })
    }
}

/// Safe interval over cooperative agents only.
pub fn safe_interval(
    initial: &ConsensusState,
    behaviors: &[AgentBehavior],
) -> Result<SafeInterval, ConsensusError> {
    let dim = initial.dim();
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    let mut seen = false;
    for (agent, value) in initial.values.iter().enumerate() {
        if !behaviors[agent].is_cooperative() {
            continue;
        }
        seen = true;
        for c in 0..dim {
            lo[c] = lo[c].min(value[c]);
            hi[c] = hi[c].max(value[c]);
        }
    }
    if !seen {
        return Err(ConsensusError::NoCooperativeAgents);
    }
    Ok(SafeInterval { lo, hi })
}

/// The W-MSR reduction: drop the agents holding the (up to) `f` largest
/// values strictly above `own` and the (up to) `f` smallest strictly below.
/// Values equal to `own` are never dropped. Ties between equal values drop
/// the larger agent id first, so the retained set is deterministic.
pub fn wmsr_filter(own: f64, neighbor_values: &[(usize, f64)], f: usize) -> BTreeSet<usize> {
    let mut above: Vec<(usize, f64)> = neighbor_values
        .iter()
        .copied()
        .filter(|&(_, v)| v > own)
        .collect();
    let mut below: Vec<(usize, f64)> = neighbor_values
        .iter()
        .copied()
        .filter(|&(_, v)| v < own)
        .collect();
    above.sort_by(|a, b| b.1.total_cmp(&a.1).then(b.0.cmp(&a.0)));
    below.sort_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
    let dropped: BTreeSet<usize> = above
        .iter()
        .take(f)
        .chain(below.iter().take(f))
        .map(|&(id, _)| id)
        .collect();
    neighbor_values
        .iter()
        .map(|&(id, _)| id)
        .filter(|id| !dropped.contains(id))
        .collect()
}

fn validate(
    state: &ConsensusState,
    g: &CommGraph,
    behaviors: &[AgentBehavior],
) -> Result<usize, ConsensusError> {
    let agents = state.values.len();
    if g.vertex_count() != agents {
        return Err(ConsensusError::GraphSizeMismatch {
            agents,
            graph: g.vertex_count(),
        });
    }
    if behaviors.len() != agents {
        return Err(ConsensusError::BehaviorCountMismatch {
            agents,
            behaviors: behaviors.len(),
        });
    }
    let dim = state.dim();
    for (agent, value) in state.values.iter().enumerate() {
        if value.len() != dim {
            return Err(ConsensusError::DimensionMismatch {
                agent,
                expected: dim,
                found: value.len(),
            });
        }
    }
    for (agent, behavior) in behaviors.iter().enumerate() {
        if matches!(behavior, AgentBehavior::MapAdversary(_)) {
            return Err(ConsensusError::UnsupportedBehavior(agent));
        }
        if let AgentBehavior::DriftingAdversary { start, drift } = behavior {
            if start.len() != drift.len() {
                return Err(ConsensusError::DimensionMismatch {
                    agent,
                    expected: start.len(),
                    found: drift.len(),
                });
            }
        }
        if let Some(b) = behavior.broadcast(0) {
            if b.len() != dim {
                return Err(ConsensusError::DimensionMismatch {
                    agent,
                    expected: dim,
                    found: b.len(),
                });
            }
        }
    }
    Ok(dim)
}

/// One synchronous round plus per-agent starvation flags: `starved[i]` is
/// true when cooperative agent i retained no neighbor in any component.
pub struct StepDiagnostics {
    pub state: ConsensusState,
    pub starved: Vec<bool>,
}

pub fn consensus_step_diag(
    state: &ConsensusState,
    g: &CommGraph,
    cfg: &WmsrConfig,
    behaviors: &[AgentBehavior],
) -> Result<StepDiagnostics, ConsensusError> {
    let dim = validate(state, g, behaviors)?;
    let agents = state.values.len();
    let step = state.step;

    // What each agent shares this round.
    let shared: Vec<Vec<f64>> = (0..agents)
        .map(|i| {
            behaviors[i]
                .broadcast(step)
                .unwrap_or_else(|| state.values[i].clone())
        })
        .collect();

    let mut next = Vec::with_capacity(agents);
    let mut starved = vec![false; agents];
    for i in 0..agents {
        if !behaviors[i].is_cooperative() {
            // The state entry for an adversary is always what it will share.
            next.push(
                behaviors[i]
                    .broadcast(step + 1)
                    .expect("adversary broadcast"),
            );
            continue;
        }
        let neighbor_ids = g.neighbors(i)?;
        let mut value = Vec::with_capacity(dim);
        let mut all_empty = true;
        for (c, &own) in shared[i].iter().enumerate() {
            let neighbor_values: Vec<(usize, f64)> =
                neighbor_ids.iter().map(|&j| (j, shared[j][c])).collect();
            let retained = wmsr_filter(own, &neighbor_values, cfg.f);
            all_empty &= retained.is_empty();
            // Accumulate own value first, then retained neighbors in
            // ascending id order, so trajectories are bit-reproducible.
            let mut sum = own;
            for &j in &retained {
                sum += shared[j][c];
            }
            value.push(sum / (retained.len() + 1) as f64);
        }
        starved[i] = all_empty;
        next.push(value);
    }
    Ok(StepDiagnostics {
        state: ConsensusState {
            values: next,
            step: step + 1,
        },
        starved,
    })
}

/// One synchronous round. With F = 0 this is exactly the equal-weight
/// linear consensus update.
pub fn consensus_step(
    state: &ConsensusState,
    g: &CommGraph,
    cfg: &WmsrConfig,
    behaviors: &[AgentBehavior],
) -> Result<ConsensusState, ConsensusError> {
    Ok(consensus_step_diag(state, g, cfg, behaviors)?.state)
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub enum Verdict {
    /// Cooperative spread dropped below the threshold; carries the
    /// componentwise mean of the cooperative values at that point.
    Converged(Vec<f64>),
    MaxStepsReached,
    /// The run hit the step limit and these agents retained no neighbor at
    /// any step, so they never moved.
    Stalled(BTreeSet<usize>),
}

impl Verdict {
    pub fn is_converged(&self) -> bool {
        matches!(self, Verdict::Converged(_))
    }
}

#[derive(Debug, Clone)]
pub struct ConsensusRun {
    pub trajectory: Vec<ConsensusState>,
    pub verdict: Verdict,
}

/// Max minus min of the cooperative values, per component.
pub fn cooperative_spread(state: &ConsensusState, behaviors: &[AgentBehavior]) -> Vec<f64> {
    let dim = state.dim();
    let mut spread = vec![0.0; dim];
    for c in 0..dim {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (i, v) in state.values.iter().enumerate() {
            if behaviors[i].is_cooperative() {
                lo = lo.min(v[c]);
                hi = hi.max(v[c]);
            }
        }
        spread[c] = hi - lo;
    }
    spread
}

fn cooperative_mean(state: &ConsensusState, behaviors: &[AgentBehavior]) -> Vec<f64> {
    let dim = state.dim();
    let mut mean = vec![0.0; dim];
    let mut count = 0usize;
    for (i, v) in state.values.iter().enumerate() {
        if behaviors[i].is_cooperative() {
            count += 1;
            for c in 0..dim {
                mean[c] += v[c];
            }
        }
    }
    for m in &mut mean {
        *m /= count as f64;
    }
    mean
}

/// Run consensus on a static graph until the cooperative spread falls below
/// `cfg.convergence_eps` in every component or `cfg.max_steps` rounds pass.
///
/// Adversary entries in the returned trajectory always hold the value the
/// adversary shared at that step.
pub fn run_consensus(
    initial: &ConsensusState,
    g: &CommGraph,
    cfg: &WmsrConfig,
    behaviors: &[AgentBehavior],
) -> Result<ConsensusRun, ConsensusError> {
    validate(initial, g, behaviors)?;
    if behaviors.iter().all(|b| !b.is_cooperative()) {
        return Err(ConsensusError::NoCooperativeAgents);
    }
    let mut state = initial.clone();
    state.step = 0;
    for (i, b) in behaviors.iter().enumerate() {
        if let Some(v) = b.broadcast(0) {
            state.values[i] = v;
        }
    }

    let mut starved_always: Vec<bool> = behaviors
        .iter()
        .map(AgentBehavior::is_cooperative)
        .collect();
    let mut trajectory = vec![state.clone()];
    for step in 0..=cfg.max_steps {
        let spread = cooperative_spread(&state, behaviors);
        if spread.iter().all(|&s| s < cfg.convergence_eps) {
            return Ok(ConsensusRun {
                verdict: Verdict::Converged(cooperative_mean(&state, behaviors)),
                trajectory,
            });
        }
        if step == cfg.max_steps {
            break;
        }
        let diag = consensus_step_diag(&state, g, cfg, behaviors)?;
        for (flag, starved) in starved_always.iter_mut().zip(&diag.starved) {
            *flag &= starved;
        }
        state = diag.state;
        trajectory.push(state.clone());
    }
    let stalled: BTreeSet<usize> = starved_always
        .iter()
        .enumerate()
        .filter(|(_, &s)| s)
        .map(|(i, _)| i)
        .collect();
    Ok(ConsensusRun {
        verdict: if stalled.is_empty() {
            Verdict::MaxStepsReached
        } else {
            Verdict::Stalled(stalled)
        },
        trajectory,
    })
}

/// Write a trajectory as `step,agent,component,value,behavior` records.
pub fn write_trajectory<W: Write>(
    mut w: W,
    trajectory: &[ConsensusState],
    behaviors: &[AgentBehavior],
) -> std::io::Result<()> {
    writeln!(w, "step,agent,component,value,behavior")?;
    for state in trajectory {
        for (agent, value) in state.values.iter().enumerate() {
            for (component, v) in value.iter().enumerate() {
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    state.step,
                    agent,
                    component,
                    v,
                    behaviors[agent].tag()
                )?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::delaunay;
    use crate::study::two_lines_points;

    fn ids(set: &BTreeSet<usize>) -> Vec<usize> {
        set.iter().copied().collect()
    }

    #[test]
    fn filter_drops_extremes() {
        let neighbors = [(0, 1.0), (1, 2.0), (2, 6.0), (3, 7.0), (4, 9.0)];
        assert_eq!(ids(&wmsr_filter(5.0, &neighbors, 1)), vec![1, 2, 3]);
    }

    #[test]
    fn filter_one_sided() {
        let neighbors = [(0, 1.0), (1, 2.0), (2, 3.0)];
        assert_eq!(ids(&wmsr_filter(5.0, &neighbors, 2)), vec![2]);
    }

    #[test]
    fn filter_keeps_equal_values() {
        let neighbors = [(0, 5.0), (1, 5.0)];
        assert_eq!(ids(&wmsr_filter(5.0, &neighbors, 1)), vec![0, 1]);
    }

    #[test]
    fn filter_tie_break_drops_larger_id() {
        let neighbors = [(0, 9.0), (1, 9.0), (2, 9.0)];
        assert_eq!(ids(&wmsr_filter(5.0, &neighbors, 2)), vec![0]);
        let below = [(4, 1.0), (7, 1.0)];
        assert_eq!(ids(&wmsr_filter(5.0, &below, 1)), vec![4]);
    }

    #[test]
    fn filter_drops_at_most_two_f() {
        let neighbors: Vec<(usize, f64)> = (0..9).map(|i| (i, i as f64)).collect();
        for f in 0..5 {
            let retained = wmsr_filter(4.0, &neighbors, f);
            assert!(neighbors.len() - retained.len() <= 2 * f);
        }
    }

    fn pair_graph() -> CommGraph {
        CommGraph::from_edges(2, 1, [(0, 1)], []).unwrap()
    }

    #[test]
    fn two_agents_average() {
        let state = ConsensusState::scalar(&[0.0, 10.0]);
        let cfg = WmsrConfig::default();
        let behaviors = vec![AgentBehavior::Cooperative; 2];
        let next = consensus_step(&state, &pair_graph(), &cfg, &behaviors).unwrap();
        assert_eq!(next.values, vec![vec![5.0], vec![5.0]]);
        assert_eq!(next.step, 1);
    }

    #[test]
    fn f_zero_matches_plain_linear_update() {
        // The F = 0 step must equal the equal-weight linear update bit for bit.
        let points = two_lines_points(7, 1.0);
        let g = CommGraph::from_triangulation(&delaunay(&points).unwrap());
        let values: Vec<f64> = (0..7).map(|i| (i * i) as f64 * 0.37 - 3.0).collect();
        let state = ConsensusState::scalar(&values);
        let behaviors = vec![AgentBehavior::Cooperative; 7];
        let next = consensus_step(&state, &g, &WmsrConfig::default(), &behaviors).unwrap();
        for i in 0..7 {
            let nbrs = g.neighbors(i).unwrap();
            let mut sum = values[i];
            for &j in nbrs {
                sum += values[j];
            }
            assert_eq!(
                next.values[i][0],
                sum / (nbrs.len() + 1) as f64,
                "agent {i}"
            );
        }
    }

    #[test]
    fn plain_consensus_follows_constant_adversary() {
        let points = two_lines_points(8, 1.0);
        let g = CommGraph::from_triangulation(&delaunay(&points).unwrap());
        let mut behaviors = vec![AgentBehavior::Cooperative; 8];
        behaviors[3] = AgentBehavior::ConstantAdversary(vec![42.0]);
        let initial = ConsensusState::scalar(&[1.0, 2.0, 3.0, 0.0, 5.0, 6.0, 7.0, 8.0]);
        let cfg = WmsrConfig {
            f: 0,
            convergence_eps: 1e-9,
            max_steps: 10_000,
        };
        let run = run_consensus(&initial, &g, &cfg, &behaviors).unwrap();
        let final_state = run.trajectory.last().unwrap();
        for (i, v) in final_state.values.iter().enumerate() {
            if behaviors[i].is_cooperative() {
                assert!((v[0] - 42.0).abs() < 1e-3, "agent {i} at {}", v[0]);
            }
        }
    }

    #[test]
    fn star_center_rejects_outlier_forever() {
        let g = CommGraph::from_edges(5, 1, [(0, 1), (0, 2), (0, 3), (0, 4)], []).unwrap();
        let mut behaviors = vec![AgentBehavior::Cooperative; 5];
        behaviors[4] = AgentBehavior::ConstantAdversary(vec![100.0]);
        let initial = ConsensusState::scalar(&[0.5, 0.1, 0.9, 0.3, 100.0]);
        let safe = safe_interval(&initial, &behaviors).unwrap();
        assert_eq!((safe.lo[0], safe.hi[0]), (0.1, 0.9));
        let cfg = WmsrConfig {
            f: 1,
            convergence_eps: 1e-12,
            max_steps: 200,
        };
        let run = run_consensus(&initial, &g, &cfg, &behaviors).unwrap();
        for state in &run.trajectory {
            for (i, v) in state.values.iter().enumerate() {
                if behaviors[i].is_cooperative() {
                    assert!(safe.contains(v), "step {} agent {i}", state.step);
                }
            }
        }
    }

    #[test]
    fn identical_initials_converge_immediately() {
        let behaviors = vec![AgentBehavior::Cooperative; 2];
        let initial = ConsensusState::scalar(&[7.0, 7.0]);
        let run =
            run_consensus(&initial, &pair_graph(), &WmsrConfig::default(), &behaviors).unwrap();
        assert_eq!(run.verdict, Verdict::Converged(vec![7.0]));
        assert_eq!(run.trajectory.len(), 1);
    }

    #[test]
    fn strip_endpoints_stall_under_f_two() {
        let points = two_lines_points(11, 1.0);
        let g = CommGraph::from_triangulation(&delaunay(&points).unwrap());
        let behaviors = vec![AgentBehavior::Cooperative; 11];
        let values: Vec<f64> = (0..11).map(|i| i as f64 * 1.7 + 0.3).collect();
        let cfg = WmsrConfig {
            f: 2,
            convergence_eps: 1e-9,
            max_steps: 300,
        };
        let run = run_consensus(&ConsensusState::scalar(&values), &g, &cfg, &behaviors).unwrap();
        let endpoints: BTreeSet<usize> = (0..11)
            .filter(|&v| g.neighbors(v).unwrap().len() == 2)
            .collect();
        assert_eq!(endpoints.len(), 2);
        match run.verdict {
            Verdict::Stalled(stalled) => assert!(stalled.is_superset(&endpoints)),
            other => panic!("expected a stall, got {other:?}"),
        }
    }

    #[test]
    fn safe_interval_excludes_adversaries() {
        let behaviors = vec![
            AgentBehavior::Cooperative,
            AgentBehavior::Cooperative,
            AgentBehavior::Cooperative,
            AgentBehavior::ConstantAdversary(vec![100.0]),
        ];
        let initial = ConsensusState::scalar(&[3.0, 7.0, 5.0, 100.0]);
        let safe = safe_interval(&initial, &behaviors).unwrap();
        assert_eq!((safe.lo[0], safe.hi[0]), (3.0, 7.0));

        let single = safe_interval(
            &ConsensusState::scalar(&[4.0]),
            &[AgentBehavior::Cooperative],
        )
        .unwrap();
        assert_eq!((single.lo[0], single.hi[0]), (4.0, 4.0));

        let planar = safe_interval(
            &ConsensusState::new(vec![vec![0.0, 1.0], vec![2.0, 0.0]]),
            &[AgentBehavior::Cooperative, AgentBehavior::Cooperative],
        )
        .unwrap();
        assert_eq!(planar.lo, vec![0.0, 0.0]);
        assert_eq!(planar.hi, vec![2.0, 1.0]);

        assert!(matches!(
            safe_interval(
                &ConsensusState::scalar(&[1.0]),
                &[AgentBehavior::ConstantAdversary(vec![1.0])]
            ),
            Err(ConsensusError::NoCooperativeAgents)
        ));
    }

    #[test]
    fn dimension_mismatch_is_caught() {
        let state = ConsensusState::new(vec![vec![1.0, 2.0], vec![3.0]]);
        let behaviors = vec![AgentBehavior::Cooperative; 2];
        assert!(matches!(
            consensus_step(&state, &pair_graph(), &WmsrConfig::default(), &behaviors),
            Err(ConsensusError::DimensionMismatch { agent: 1, .. })
        ));
    }

    #[test]
    fn map_adversary_rejected_in_vector_consensus() {
        let state = ConsensusState::scalar(&[0.0, 1.0]);
        let behaviors = vec![
            AgentBehavior::Cooperative,
            AgentBehavior::MapAdversary(BTreeSet::new()),
        ];
        assert!(matches!(
            consensus_step(&state, &pair_graph(), &WmsrConfig::default(), &behaviors),
            Err(ConsensusError::UnsupportedBehavior(1))
        ));
    }

    #[test]
    fn drifting_adversary_moves_linearly() {
        let b = AgentBehavior::DriftingAdversary {
            start: vec![1.0, 2.0],
            drift: vec![0.5, -1.0],
        };
        assert_eq!(b.broadcast(0).unwrap(), vec![1.0, 2.0]);
        assert_eq!(b.broadcast(4).unwrap(), vec![3.0, -2.0]);
    }
}
