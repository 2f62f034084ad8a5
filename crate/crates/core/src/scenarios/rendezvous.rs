//! Polygon rendezvous: agents agree on a center point while moving, with
//! the communication graph rebuilt from the current positions every step.
//!
//! Each round: re-triangulate, extend to level K, one W-MSR consensus step
//! on the (x, y) center estimates, derive per-agent polygon-corner goals,
//! and move every agent one proportional-controller step. Adversaries move
//! toward the corner derived from their own broadcast center, so the
//! formation stays plausible.

use std::collections::BTreeSet;
use std::io::Write;

use crate::consensus::{
    consensus_step_diag, safe_interval, AgentBehavior, ConsensusState, SafeInterval, Verdict,
};
use crate::geometry::{delaunay, Point2};
use crate::graph::CommGraph;
use crate::scenarios::ScenarioError;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RendezvousConfig {
    /// Polygon radius: each agent's goal sits on a circle of this radius
    /// around its center estimate.
    pub radius: f64,
    /// Controller time step.
    pub tau: f64,
    pub v_max: f64,
    /// Graph extension level.
    pub k: u32,
    /// W-MSR filter parameter.
    pub f: usize,
    pub convergence_eps: f64,
    pub max_steps: usize,
    /// How close every agent must be to its goal for the run to count as
    /// converged.
    pub position_eps: f64,
}

impl Default for RendezvousConfig {
    fn default() -> Self {
        RendezvousConfig {
            radius: 1.0,
            tau: 0.2,
            v_max: 1.0,
            k: 1,
            f: 0,
            convergence_eps: 1e-6,
            max_steps: 10_000,
            position_eps: 1e-6,
        }
    }
}

/// Corner `i` of a regular `n`-gon around the center estimate.
pub fn rendezvous_goal(center: [f64; 2], i: usize, n: usize, radius: f64) -> Point2 {
    let theta = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
    Point2::new(
        center[0] + radius * theta.cos(),
        center[1] + radius * theta.sin(),
    )
}

/// Proportional controller with a speed cap: move from `p` toward `g` by
/// `tau * min(|g - p|, v_max)` along the goal direction.
pub fn motion_step(p: Point2, g: Point2, tau: f64, v_max: f64) -> Point2 {
    let (dx, dy) = (g.x - p.x, g.y - p.y);
    let dist = dx.hypot(dy);
    if dist == 0.0 {
        return p;
    }
    let speed = dist.min(v_max);
    Point2::new(p.x + tau * speed * dx / dist, p.y + tau * speed * dy / dist)
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct RendezvousSnapshot {
    pub step: usize,
    pub positions: Vec<Point2>,
    pub centers: Vec<[f64; 2]>,
}

#[derive(Debug, Clone)]
pub struct RendezvousRun {
    pub steps: Vec<RendezvousSnapshot>,
    pub verdict: Verdict,
    /// Safe box spanned by the cooperative agents' initial center estimates.
    pub safe: SafeInterval,
}

impl RendezvousRun {
    /// True when every cooperative center estimate stayed inside the safe
    /// box for the whole run.
    pub fn centers_always_safe(&self, behaviors: &[AgentBehavior]) -> bool {
        self.steps.iter().all(|snap| {
            snap.centers
                .iter()
                .enumerate()
                .filter(|(i, _)| behaviors[*i].is_cooperative())
                .all(|(_, c)| self.safe.contains(c))
        })
    }

    /// Steps at which some cooperative center estimate sat outside the box.
    pub fn escape_steps(&self, behaviors: &[AgentBehavior]) -> Vec<usize> {
        self.steps
            .iter()
            .filter(|snap| {
                snap.centers
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| behaviors[*i].is_cooperative())
                    .any(|(_, c)| !self.safe.contains(c))
            })
            .map(|snap| snap.step)
            .collect()
    }
}

fn centers_of(state: &ConsensusState) -> Vec<[f64; 2]> {
    state.values.iter().map(|v| [v[0], v[1]]).collect()
}

/// Run the rendezvous loop until the cooperative center estimates agree and
/// every cooperative agent reaches its polygon corner, or `max_steps` pass.
pub fn run_rendezvous(
    initial_positions: &[Point2],
    center_initials: &[[f64; 2]],
    behaviors: &[AgentBehavior],
    cfg: &RendezvousConfig,
) -> Result<RendezvousRun, ScenarioError> {
    let n = initial_positions.len();
    if center_initials.len() != n || behaviors.len() != n {
        return Err(ScenarioError::Config(format!(
            "{} positions, {} center estimates, {} behaviors",
            n,
            center_initials.len(),
            behaviors.len()
        )));
    }
    let wmsr = crate::consensus::WmsrConfig {
        f: cfg.f,
        convergence_eps: cfg.convergence_eps,
        max_steps: cfg.max_steps,
    };
    let mut state = ConsensusState::new(center_initials.iter().map(|c| c.to_vec()).collect());
    let safe = safe_interval(&state, behaviors)?;
    for (i, b) in behaviors.iter().enumerate() {
        if let Some(v) = b.broadcast(0) {
            state.values[i] = v;
        }
    }
    let mut positions = initial_positions.to_vec();
    let mut starved_always: Vec<bool> = behaviors
        .iter()
        .map(AgentBehavior::is_cooperative)
        .collect();
    let mut steps = vec![RendezvousSnapshot {
        step: 0,
        positions: positions.clone(),
        centers: centers_of(&state),
    }];

    for step in 0..=cfg.max_steps {
        let spread = crate::consensus::cooperative_spread(&state, behaviors);
        let agreed = spread.iter().all(|&s| s < cfg.convergence_eps);
        let settled = positions.iter().enumerate().all(|(i, &p)| {
            if !behaviors[i].is_cooperative() {
                return true;
            }
            let goal = rendezvous_goal([state.values[i][0], state.values[i][1]], i, n, cfg.radius);
            p.dist(&goal) <= cfg.position_eps
        });
        if agreed && settled {
            let mean = {
                let coop: Vec<&Vec<f64>> = state
                    .values
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| behaviors[*i].is_cooperative())
                    .map(|(_, v)| v)
                    .collect();
                vec![
                    coop.iter().map(|v| v[0]).sum::<f64>() / coop.len() as f64,
                    coop.iter().map(|v| v[1]).sum::<f64>() / coop.len() as f64,
                ]
            };
            return Ok(RendezvousRun {
                steps,
                verdict: Verdict::Converged(mean),
                safe,
            });
        }
        if step == cfg.max_steps {
            break;
        }

        let tri = delaunay(&positions)
            .map_err(|source| ScenarioError::DegenerateFormation { step, source })?;
        let graph = CommGraph::from_triangulation(&tri).k_hop_extend(cfg.k)?;
        let diag = consensus_step_diag(&state, &graph, &wmsr, behaviors)?;
        for (flag, starved) in starved_always.iter_mut().zip(&diag.starved) {
            *flag &= starved;
        }
        state = diag.state;

        positions = positions
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let goal =
                    rendezvous_goal([state.values[i][0], state.values[i][1]], i, n, cfg.radius);
                motion_step(p, goal, cfg.tau, cfg.v_max)
            })
            .collect();
        steps.push(RendezvousSnapshot {
            step: step + 1,
            positions: positions.clone(),
            centers: centers_of(&state),
        });
    }

    let stalled: BTreeSet<usize> = starved_always
        .iter()
        .enumerate()
        .filter(|(_, &s)| s)
        .map(|(i, _)| i)
        .collect();
    Ok(RendezvousRun {
        steps,
        verdict: if stalled.is_empty() {
            Verdict::MaxStepsReached
        } else {
            Verdict::Stalled(stalled)
        },
        safe,
    })
}

/// Write `step,agent,x,y,cx,cy,behavior` records.
pub fn write_rendezvous_trajectory<W: Write>(
    mut w: W,
    run: &RendezvousRun,
    behaviors: &[AgentBehavior],
) -> std::io::Result<()> {
    writeln!(w, "step,agent,x,y,cx,cy,behavior")?;
    for snap in &run.steps {
        for (agent, (p, c)) in snap.positions.iter().zip(&snap.centers).enumerate() {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                snap.step,
                agent,
                p.x,
                p.y,
                c[0],
                c[1],
                behaviors[agent].tag()
            )?;
        }
    }
    Ok(())
}
