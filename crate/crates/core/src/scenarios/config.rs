//! Declarative scenario configuration.
//!
//! One structured document describes a run: the formation (by name or
//! explicit positions), the consensus parameters, the adversaries, and the
//! per-kind sections. Every random quantity (initial estimates, drift
//! directions, drift start points) is drawn from named substreams of the
//! single master seed, so a config plus a seed pins the run exactly.

use std::path::PathBuf;

use rand::Rng;

use crate::consensus::AgentBehavior;
use crate::geometry::Point2;
use crate::scenarios::estimation::{run_parameter_estimation, EstimationRun};
use crate::scenarios::mapping::{run_map_consensus, MapConfig, MapRun, OccupancyGrid};
use crate::scenarios::rendezvous::{run_rendezvous, RendezvousConfig, RendezvousRun};
use crate::scenarios::ScenarioError;
use crate::seeds;
use crate::study::{generate_formation, FormationSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    ParameterEstimation,
    Rendezvous,
    MapConsensus,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    #[serde(default)]
    pub seed: u64,
    /// Formation generator, or explicit positions below.
    #[serde(default)]
    pub formation: Option<FormationSpec>,
    #[serde(default)]
    pub positions: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub consensus: ConsensusSection,
    #[serde(default)]
    pub adversaries: Vec<AdversarySpec>,
    #[serde(default)]
    pub estimation: EstimationSection,
    #[serde(default)]
    pub rendezvous: RendezvousSection,
    #[serde(default)]
    pub map: Option<MapSection>,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ConsensusSection {
    #[serde(default)]
    pub f: usize,
    #[serde(default = "one")]
    pub k: u32,
    #[serde(default = "default_eps")]
    pub convergence_eps: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
}

fn one() -> u32 {
    1
}
fn default_eps() -> f64 {
    1e-6
}
fn default_max_steps() -> usize {
    10_000
}

impl Default for ConsensusSection {
    fn default() -> Self {
        ConsensusSection {
            f: 0,
            k: 1,
            convergence_eps: default_eps(),
            max_steps: default_max_steps(),
        }
    }
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", deny_unknown_fields)]
pub enum AdversarySpec {
    /// Broadcasts a fixed vector.
    Constant { agent: usize, value: Vec<f64> },
    /// Starts at a seeded point inside the cooperative initial box and
    /// drifts `magnitude` per step in a seeded direction, unless `start`
    /// or `direction` pin them explicitly.
    Drifting {
        agent: usize,
        magnitude: f64,
        #[serde(default)]
        start: Option<Vec<f64>>,
        #[serde(default)]
        direction: Option<Vec<f64>>,
    },
    /// Claims grid cells are occupied (map consensus only).
    Map {
        agent: usize,
        claimed: Vec<[usize; 2]>,
    },
}

impl AdversarySpec {
    pub fn agent(&self) -> usize {
        match *self {
            AdversarySpec::Constant { agent, .. }
            | AdversarySpec::Drifting { agent, .. }
            | AdversarySpec::Map { agent, .. } => agent,
        }
    }
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct EstimationSection {
    /// Explicit initial estimates; otherwise seeded uniform draws from
    /// `initial-range`.
    #[serde(default)]
    pub initial: Option<Vec<f64>>,
    #[serde(default = "default_range")]
    pub initial_range: (f64, f64),
}

fn default_range() -> (f64, f64) {
    (0.0, 10.0)
}

impl Default for EstimationSection {
    fn default() -> Self {
        EstimationSection {
            initial: None,
            initial_range: default_range(),
        }
    }
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RendezvousSection {
    #[serde(default = "one_f64")]
    pub radius: f64,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default = "one_f64")]
    pub v_max: f64,
    #[serde(default = "default_position_eps")]
    pub position_eps: f64,
    /// Explicit initial center estimates; defaults to each agent's own
    /// position.
    #[serde(default)]
    pub centers: Option<Vec<[f64; 2]>>,
}

fn one_f64() -> f64 {
    1.0
}
fn default_tau() -> f64 {
    0.2
}
fn default_position_eps() -> f64 {
    1e-6
}

impl Default for RendezvousSection {
    fn default() -> Self {
        RendezvousSection {
            radius: 1.0,
            tau: default_tau(),
            v_max: 1.0,
            position_eps: default_position_eps(),
            centers: None,
        }
    }
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct MapSection {
    /// Path to the grid bitmap, resolved relative to the config file.
    pub grid: PathBuf,
    #[serde(default = "one_usize")]
    pub sensor_half_width: usize,
    pub starts: Vec<[usize; 2]>,
    #[serde(default = "default_settle_eps")]
    pub settle_eps: f64,
    #[serde(default = "default_settle_cap")]
    pub settle_cap: usize,
}

fn one_usize() -> usize {
    1
}
fn default_settle_eps() -> f64 {
    1e-9
}
fn default_settle_cap() -> usize {
    2_000
}

#[derive(Debug)]
pub enum ScenarioOutcome {
    Estimation {
        run: EstimationRun,
        behaviors: Vec<AgentBehavior>,
    },
    Rendezvous {
        run: RendezvousRun,
        behaviors: Vec<AgentBehavior>,
    },
    Map {
        run: MapRun,
        behaviors: Vec<AgentBehavior>,
    },
}

impl ScenarioOutcome {
    /// Did the run reach its goal: consensus for the value scenarios,
    /// complete exploration for the map scenario.
    pub fn succeeded(&self) -> bool {
        match self {
            ScenarioOutcome::Estimation { run, .. } => run.run.verdict.is_converged(),
            ScenarioOutcome::Rendezvous { run, .. } => run.verdict.is_converged(),
            ScenarioOutcome::Map { run, .. } => run.summary.steps_to_explore.is_some(),
        }
    }
}

fn agent_positions(config: &ScenarioConfig) -> Result<Vec<Point2>, ScenarioError> {
    match (&config.formation, &config.positions) {
        (Some(spec), None) => Ok(generate_formation(spec)?),
        (None, Some(list)) => Ok(list.iter().map(|&[x, y]| Point2::new(x, y)).collect()),
        (Some(_), Some(_)) => Err(ScenarioError::Config(
            "give either a formation or explicit positions, not both".into(),
        )),
        (None, None) => Err(ScenarioError::Config(
            "a formation or explicit positions are required".into(),
        )),
    }
}

/// Seeded unit direction: a sign for scalars, a circle point for vectors.
fn seeded_direction(seed: u64, agent: usize, dim: usize) -> Vec<f64> {
    let mut rng = seeds::substream(seed, "drift-direction", agent as u64);
    match dim {
        1 => vec![if rng.gen::<bool>() { 1.0 } else { -1.0 }],
        _ => {
            let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let mut dir = vec![0.0; dim];
            dir[0] = theta.cos();
            dir[1] = theta.sin();
            dir
        }
    }
}

/// Per-agent behaviors for the value scenarios. Drifting adversaries start
/// inside the box spanned by the cooperative initials.
fn build_behaviors(
    config: &ScenarioConfig,
    initials: &[Vec<f64>],
    dim: usize,
) -> Result<Vec<AgentBehavior>, ScenarioError> {
    let n = initials.len();
    let mut behaviors = vec![AgentBehavior::Cooperative; n];
    let adversary_ids: Vec<usize> = config
        .adversaries
        .iter()
        .map(AdversarySpec::agent)
        .collect();
    for spec in &config.adversaries {
        let agent = spec.agent();
        if agent >= n {
            return Err(ScenarioError::Config(format!(
                "adversary agent {agent} out of range for {n} agents"
            )));
        }
        if !behaviors[agent].is_cooperative() {
            return Err(ScenarioError::Config(format!(
                "agent {agent} has two adversary entries"
            )));
        }
        behaviors[agent] = match spec {
            AdversarySpec::Constant { value, .. } => {
                if value.len() != dim {
                    return Err(ScenarioError::Config(format!(
                        "adversary {agent}: value has {} components, expected {dim}",
                        value.len()
                    )));
                }
                AgentBehavior::ConstantAdversary(value.clone())
            }
            AdversarySpec::Drifting {
                magnitude,
                start,
                direction,
                ..
            } => {
                let direction = match direction {
                    Some(d) if d.len() == dim => d.clone(),
                    Some(d) => {
                        return Err(ScenarioError::Config(format!(
                            "adversary {agent}: direction has {} components, expected {dim}",
                            d.len()
                        )))
                    }
                    None => seeded_direction(config.seed, agent, dim),
                };
                let start = match start {
                    Some(s) if s.len() == dim => s.clone(),
                    Some(s) => {
                        return Err(ScenarioError::Config(format!(
                            "adversary {agent}: start has {} components, expected {dim}",
                            s.len()
                        )))
                    }
                    None => {
                        // Seeded draw inside the cooperative initial box.
                        let mut rng = seeds::substream(config.seed, "drift-start", agent as u64);
                        (0..dim)
                            .map(|c| {
                                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                                for (i, v) in initials.iter().enumerate() {
                                    if !adversary_ids.contains(&i) {
                                        lo = lo.min(v[c]);
                                        hi = hi.max(v[c]);
                                    }
                                }
                                if lo < hi {
                                    rng.gen_range(lo..hi)
                                } else {
                                    lo
                                }
                            })
                            .collect()
                    }
                };
                let drift = direction.iter().map(|d| d * magnitude).collect();
                AgentBehavior::DriftingAdversary { start, drift }
            }
            AdversarySpec::Map { .. } => {
                return Err(ScenarioError::Config(format!(
                    "adversary {agent}: map adversaries need the map-consensus scenario"
                )))
            }
        };
    }
    Ok(behaviors)
}

/// Run the scenario a config describes. The map grid, when needed, arrives
/// pre-parsed so this stays a pure function of its arguments.
pub fn run_scenario(
    config: &ScenarioConfig,
    grid: Option<OccupancyGrid>,
) -> Result<ScenarioOutcome, ScenarioError> {
    match config.kind {
        ScenarioKind::ParameterEstimation => {
            let positions = agent_positions(config)?;
            let n = positions.len();
            let initials: Vec<f64> = match &config.estimation.initial {
                Some(values) => {
                    if values.len() != n {
                        return Err(ScenarioError::Config(format!(
                            "{} initial values for {n} agents",
                            values.len()
                        )));
                    }
                    values.clone()
                }
                None => {
                    let (lo, hi) = config.estimation.initial_range;
                    if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
                        return Err(ScenarioError::Config(format!(
                            "initial-range ({lo}, {hi}) is empty"
                        )));
                    }
                    (0..n)
                        .map(|i| {
                            seeds::substream(config.seed, "initial-values", i as u64)
                                .gen_range(lo..hi)
                        })
                        .collect()
                }
            };
            let vectors: Vec<Vec<f64>> = initials.iter().map(|&v| vec![v]).collect();
            let behaviors = build_behaviors(config, &vectors, 1)?;
            let cfg = crate::consensus::WmsrConfig {
                f: config.consensus.f,
                convergence_eps: config.consensus.convergence_eps,
                max_steps: config.consensus.max_steps,
            };
            let run = run_parameter_estimation(
                &positions,
                &initials,
                &behaviors,
                config.consensus.k,
                &cfg,
            )?;
            Ok(ScenarioOutcome::Estimation { run, behaviors })
        }
        ScenarioKind::Rendezvous => {
            let positions = agent_positions(config)?;
            let n = positions.len();
            let centers: Vec<[f64; 2]> = match &config.rendezvous.centers {
                Some(centers) => {
                    if centers.len() != n {
                        return Err(ScenarioError::Config(format!(
                            "{} center estimates for {n} agents",
                            centers.len()
                        )));
                    }
                    centers.clone()
                }
                None => positions.iter().map(|p| [p.x, p.y]).collect(),
            };
            let vectors: Vec<Vec<f64>> = centers.iter().map(|c| c.to_vec()).collect();
            let behaviors = build_behaviors(config, &vectors, 2)?;
            let cfg = RendezvousConfig {
                radius: config.rendezvous.radius,
                tau: config.rendezvous.tau,
                v_max: config.rendezvous.v_max,
                k: config.consensus.k,
                f: config.consensus.f,
                convergence_eps: config.consensus.convergence_eps,
                max_steps: config.consensus.max_steps,
                position_eps: config.rendezvous.position_eps,
            };
            let run = run_rendezvous(&positions, &centers, &behaviors, &cfg)?;
            Ok(ScenarioOutcome::Rendezvous { run, behaviors })
        }
        ScenarioKind::MapConsensus => {
            let section = config.map.as_ref().ok_or_else(|| {
                ScenarioError::Config("map-consensus needs a [map] section".into())
            })?;
            let grid = grid.ok_or_else(|| {
                ScenarioError::Config("map-consensus needs the grid to be loaded".into())
            })?;
            let starts: Vec<(usize, usize)> = section.starts.iter().map(|&[r, c]| (r, c)).collect();
            let n = starts.len();
            let mut behaviors = vec![AgentBehavior::Cooperative; n];
            for spec in &config.adversaries {
                let AdversarySpec::Map { agent, claimed } = spec else {
                    return Err(ScenarioError::Config(
                        "map-consensus only takes map adversaries".into(),
                    ));
                };
                if *agent >= n {
                    return Err(ScenarioError::Config(format!(
                        "adversary agent {agent} out of range for {n} agents"
                    )));
                }
                behaviors[*agent] =
                    AgentBehavior::MapAdversary(claimed.iter().map(|&[r, c]| (r, c)).collect());
            }
            let cfg = MapConfig {
                f: config.consensus.f,
                sensor_half_width: section.sensor_half_width,
                max_steps: config.consensus.max_steps,
                settle_eps: section.settle_eps,
                settle_cap: section.settle_cap,
            };
            let run = run_map_consensus(&grid, &starts, &behaviors, &cfg)?;
            Ok(ScenarioOutcome::Map { run, behaviors })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::study::FormationKind;

    fn base_config(kind: ScenarioKind) -> ScenarioConfig {
        ScenarioConfig {
            kind,
            seed: 7,
            formation: Some(FormationSpec {
                kind: FormationKind::TwoLines { n: 8 },
                scale: 1.0,
            }),
            positions: None,
            consensus: ConsensusSection::default(),
            adversaries: Vec::new(),
            estimation: EstimationSection::default(),
            rendezvous: RendezvousSection::default(),
            map: None,
        }
    }

    #[test]
    fn estimation_scenario_runs_from_config() {
        let config = base_config(ScenarioKind::ParameterEstimation);
        let outcome = run_scenario(&config, None).unwrap();
        assert!(outcome.succeeded());
        let again = run_scenario(&config, None).unwrap();
        let (
            ScenarioOutcome::Estimation { run: a, .. },
            ScenarioOutcome::Estimation { run: b, .. },
        ) = (&outcome, &again)
        else {
            panic!("wrong outcome kind");
        };
        assert_eq!(
            a.run.trajectory.last().unwrap(),
            b.run.trajectory.last().unwrap()
        );
    }

    #[test]
    fn drifting_adversary_is_seeded_inside_the_box() {
        let mut config = base_config(ScenarioKind::ParameterEstimation);
        config.adversaries.push(AdversarySpec::Drifting {
            agent: 3,
            magnitude: 0.5,
            start: None,
            direction: None,
        });
        config.estimation.initial = Some((0..8).map(|i| i as f64).collect());
        let ScenarioOutcome::Estimation { behaviors, .. } = run_scenario(&config, None).unwrap()
        else {
            panic!("wrong outcome kind");
        };
        let AgentBehavior::DriftingAdversary { start, drift } = &behaviors[3] else {
            panic!("agent 3 should drift");
        };
        // Cooperative initials are 0..7 minus agent 3: box [0, 7].
        assert!(start[0] >= 0.0 && start[0] <= 7.0);
        assert!((drift[0].abs() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bad_configs_are_rejected() {
        let mut config = base_config(ScenarioKind::ParameterEstimation);
        config.positions = Some(vec![[0.0, 0.0]]);
        assert!(matches!(
            run_scenario(&config, None),
            Err(ScenarioError::Config(_))
        ));

        let mut config = base_config(ScenarioKind::ParameterEstimation);
        config.adversaries.push(AdversarySpec::Constant {
            agent: 99,
            value: vec![1.0],
        });
        assert!(matches!(
            run_scenario(&config, None),
            Err(ScenarioError::Config(_))
        ));

        let config = base_config(ScenarioKind::MapConsensus);
        assert!(matches!(
            run_scenario(&config, None),
            Err(ScenarioError::Config(_))
        ));
    }
}
