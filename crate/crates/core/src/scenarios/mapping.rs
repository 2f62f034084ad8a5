//! Occupancy-grid map consensus with frontier exploration.
//!
//! Cooperative agents sense the true grid in a square window, exchange
//! per-cell occupancy beliefs over the triangulation graph of their current
//! positions, and walk through cells they believe free toward the nearest
//! unknown cell that can still be reached, i.e. brought into the sensor
//! window from some believed-free cell. A map adversary never moves and
//! broadcasts 1.0 (occupied) for its claimed cells and the truth for the
//! cells its own stationary sensor window covers; it stays silent about
//! cells it cannot know.
//!
//! Per round: sense, rebuild graph, one W-MSR round per cell, then move.
//! A cell's belief changes only when the agent sensed it or the retained
//! neighbor set for that cell is non-empty; agents with no belief about a
//! cell use the neutral value 0.5 while filtering.

use std::collections::{BTreeSet, VecDeque};
use std::io::{BufRead, Write};

use crate::consensus::{wmsr_filter, AgentBehavior};
use crate::geometry::{delaunay, GeometryError, Point2};
use crate::graph::CommGraph;
use crate::scenarios::ScenarioError;

/// Dense occupancy grid, row-major. `None` marks an unknown cell; known
/// values live in [0, 1] with 0 free and 1 occupied.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct OccupancyGrid {
    width: usize,
    height: usize,
    cells: Vec<Option<f64>>,
}

pub type Cell = (usize, usize); // (row, col)

impl OccupancyGrid {
    pub fn unknown(width: usize, height: usize) -> Self {
        OccupancyGrid {
            width,
            height,
            cells: vec![None; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn in_bounds(&self, cell: Cell) -> bool {
        cell.0 < self.height && cell.1 < self.width
    }

    pub fn get(&self, cell: Cell) -> Option<f64> {
        self.cells[cell.0 * self.width + cell.1]
    }

    pub fn set(&mut self, cell: Cell, value: f64) {
        self.cells[cell.0 * self.width + cell.1] = Some(value);
    }

    /// Known and below the 0.5 occupancy threshold.
    pub fn believed_free(&self, cell: Cell) -> bool {
        matches!(self.get(cell), Some(v) if v < 0.5)
    }

    pub fn cells(&self) -> impl Iterator<Item = (Cell, Option<f64>)> + '_ {
        (0..self.height).flat_map(move |r| (0..self.width).map(move |c| ((r, c), self.get((r, c)))))
    }
}

/// Parse a grid bitmap: one row per line, `#` or `1` occupied, `.` or `0`
/// free.
pub fn read_grid<R: BufRead>(reader: R) -> Result<OccupancyGrid, ScenarioError> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(ScenarioError::Io)?;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for ch in line.chars() {
            row.push(match ch {
                '#' | '1' => 1.0,
                '.' | '0' => 0.0,
                other => {
                    return Err(ScenarioError::GridParse {
                        line: lineno + 1,
                        msg: format!("unexpected cell character {other:?}"),
                    })
                }
            });
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(ScenarioError::GridParse {
                    line: lineno + 1,
                    msg: format!("row has {} cells, expected {}", row.len(), first.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(ScenarioError::GridParse {
            line: 0,
            msg: "empty grid".into(),
        });
    }
    let width = rows[0].len();
    let height = rows.len();
    let mut grid = OccupancyGrid::unknown(width, height);
    for (r, row) in rows.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            grid.set((r, c), v);
        }
    }
    Ok(grid)
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MapConfig {
    /// W-MSR filter parameter.
    pub f: usize,
    /// Sensor covers a (2w+1) x (2w+1) square; must be at least 1 so agents
    /// always know the cell they are about to step on.
    pub sensor_half_width: usize,
    /// Hard cap on rounds.
    pub max_steps: usize,
    /// After exploration completes, keep running consensus rounds until the
    /// largest per-round belief change drops below this.
    pub settle_eps: f64,
    /// Cap on the settle phase.
    pub settle_cap: usize,
}

impl Default for MapConfig {
    fn default() -> Self {
        MapConfig {
            f: 0,
            sensor_half_width: 1,
            max_steps: 2_000,
            settle_eps: 1e-9,
            settle_cap: 2_000,
        }
    }
}

/// One cooperative explorer.
#[derive(Debug, Clone)]
pub struct MapAgentState {
    pub position: Cell,
    pub belief: OccupancyGrid,
    pub sensor_half_width: usize,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ExplorationSummary {
    /// Round at which no cooperative agent saw a reachable unknown cell,
    /// None when the run hit the step cap while still exploring.
    pub steps_to_explore: Option<usize>,
    pub total_rounds: usize,
    /// Free cells reachable from the cooperative starts in the true grid.
    pub reachable_free: usize,
    /// Of those, how many some cooperative agent actually sensed.
    pub sensed_reachable: usize,
    pub coverage: f64,
    /// Every cooperative agent classifies every cell like the truth.
    pub beliefs_match_truth: bool,
    pub max_belief_error: f64,
}

#[derive(Debug, Clone)]
pub struct MapRun {
    pub summary: ExplorationSummary,
    /// Final state per agent; the adversary slot holds its broadcast grid
    /// as its belief.
    pub agents: Vec<MapAgentState>,
    /// Agent positions per round.
    pub positions_log: Vec<Vec<Cell>>,
}

fn adversary_broadcast(
    environment: &OccupancyGrid,
    claimed: &BTreeSet<Cell>,
    position: Cell,
    hw: usize,
) -> OccupancyGrid {
    let mut grid = OccupancyGrid::unknown(environment.width(), environment.height());
    let (r, c) = position;
    for rr in r.saturating_sub(hw)..=(r + hw).min(environment.height() - 1) {
        for cc in c.saturating_sub(hw)..=(c + hw).min(environment.width() - 1) {
            grid.set((rr, cc), environment.get((rr, cc)).unwrap());
        }
    }
    for &cell in claimed {
        grid.set(cell, 1.0);
    }
    grid
}

/// Communication graph of the current grid positions: the triangulation
/// graph, degrading to the 1D Voronoi adjacency (a path along the line)
/// when the positions are collinear, and to the trivial graphs below three
/// agents.
fn comm_graph(positions: &[Cell]) -> Result<CommGraph, ScenarioError> {
    let n = positions.len();
    let points: Vec<Point2> = positions
        .iter()
        .map(|&(r, c)| Point2::new(c as f64, r as f64))
        .collect();
    if n >= 3 {
        match delaunay(&points) {
            Ok(tri) => return Ok(CommGraph::from_triangulation(&tri)),
            Err(GeometryError::CollinearInput) => {}
            Err(other) => return Err(other.into()),
        }
    }
    // Collinear or tiny: neighbors are the adjacent agents along the line.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        (points[a].x, points[a].y)
            .partial_cmp(&(points[b].x, points[b].y))
            .expect("finite coordinates")
    });
    let edges = order.windows(2).map(|w| (w[0], w[1])).collect::<Vec<_>>();
    Ok(CommGraph::from_edges(n, 1, edges, [])?)
}

/// The row-major smallest unknown cell inside the sensor window around `at`.
fn nearest_window_unknown(belief: &OccupancyGrid, at: Cell, hw: usize) -> Option<Cell> {
    let (r, c) = at;
    for rr in r.saturating_sub(hw)..=(r + hw).min(belief.height() - 1) {
        for cc in c.saturating_sub(hw)..=(c + hw).min(belief.width() - 1) {
            if belief.get((rr, cc)).is_none() {
                return Some((rr, cc));
            }
        }
    }
    None
}

/// BFS over believed-free cells toward the nearest spot whose sensor window
/// still contains an unknown cell: a cell is reachable-unknown when some
/// believed-free cell observes it. Cells under other agents are transient
/// obstacles and are not entered. Returns the first step of the path, or
/// None when nothing unknown can be observed anymore. Distance ties pick
/// the row-major smallest unknown, then the row-major smallest viewpoint;
/// the fixed neighbor order (up, left, right, down) fixes the path.
fn plan_step(
    belief: &OccupancyGrid,
    from: Cell,
    hw: usize,
    occupied: &BTreeSet<Cell>,
) -> Option<Cell> {
    let mut parent: Vec<Vec<Option<Cell>>> = vec![vec![None; belief.width()]; belief.height()];
    let mut seen = vec![vec![false; belief.width()]; belief.height()];
    let mut dist = vec![vec![0usize; belief.width()]; belief.height()];
    let mut queue = VecDeque::from([from]);
    seen[from.0][from.1] = true;
    let mut best: Option<(usize, Cell, Cell)> = None; // (dist, unknown, viewpoint)
    while let Some(cell) = queue.pop_front() {
        let d = dist[cell.0][cell.1];
        if best.is_some_and(|(bd, _, _)| d > bd) {
            break; // past the nearest-viewpoint layer
        }
        if let Some(unknown) = nearest_window_unknown(belief, cell, hw) {
            if best.is_none_or(|(_, bu, bv)| (unknown, cell) < (bu, bv)) {
                best = Some((d, unknown, cell));
            }
        }
        let (r, c) = cell;
        let neighbors = [
            (r.wrapping_sub(1), c),
            (r, c.wrapping_sub(1)),
            (r, c + 1),
            (r + 1, c),
        ];
        for next in neighbors {
            if belief.in_bounds(next)
                && !seen[next.0][next.1]
                && belief.believed_free(next)
                && !occupied.contains(&next)
            {
                seen[next.0][next.1] = true;
                parent[next.0][next.1] = Some(cell);
                dist[next.0][next.1] = d + 1;
                queue.push_back(next);
            }
        }
    }
    let (_, _, viewpoint) = best?;
    if viewpoint == from {
        return None; // everything observable from here is already sensed
    }
    let mut cur = viewpoint;
    while let Some(prev) = parent[cur.0][cur.1] {
        if prev == from {
            return Some(cur);
        }
        cur = prev;
    }
    Some(cur)
}

/// Free cells reachable from the given starts in the true grid.
fn reachable_free_cells(environment: &OccupancyGrid, starts: &[Cell]) -> BTreeSet<Cell> {
    let mut seen = BTreeSet::new();
    let mut queue: VecDeque<Cell> = starts
        .iter()
        .copied()
        .filter(|&cell| environment.believed_free(cell))
        .collect();
    seen.extend(queue.iter().copied());
    while let Some((r, c)) = queue.pop_front() {
        for next in [
            (r.wrapping_sub(1), c),
            (r, c.wrapping_sub(1)),
            (r, c + 1),
            (r + 1, c),
        ] {
            if environment.in_bounds(next) && environment.believed_free(next) && seen.insert(next) {
                queue.push_back(next);
            }
        }
    }
    seen
}

/// Run the map-consensus scenario. `starts[i]` is agent i's cell;
/// `behaviors[i]` must be `Cooperative` or `MapAdversary`.
pub fn run_map_consensus(
    environment: &OccupancyGrid,
    starts: &[Cell],
    behaviors: &[AgentBehavior],
    cfg: &MapConfig,
) -> Result<MapRun, ScenarioError> {
    let n = starts.len();
    if behaviors.len() != n {
        return Err(ScenarioError::Config(format!(
            "{n} starts but {} behaviors",
            behaviors.len()
        )));
    }
    if cfg.sensor_half_width == 0 {
        return Err(ScenarioError::Config(
            "sensor half-width must be >= 1".into(),
        ));
    }
    for (cell, value) in environment.cells() {
        match value {
            Some(v) if v == 0.0 || v == 1.0 => {}
            _ => {
                return Err(ScenarioError::Config(format!(
                    "environment cell {cell:?} must be exactly 0 or 1"
                )))
            }
        }
    }
    for (i, &cell) in starts.iter().enumerate() {
        if !environment.in_bounds(cell) {
            return Err(ScenarioError::Config(format!(
                "agent {i} starts out of bounds at {cell:?}"
            )));
        }
        if environment.get(cell) == Some(1.0) {
            return Err(ScenarioError::StartOnOccupiedCell(i));
        }
        if starts[..i].contains(&cell) {
            return Err(ScenarioError::Config(format!(
                "agents share the start cell {cell:?}"
            )));
        }
    }
    let mut broadcasts: Vec<Option<OccupancyGrid>> = vec![None; n];
    for (i, b) in behaviors.iter().enumerate() {
        match b {
            AgentBehavior::Cooperative => {}
            AgentBehavior::MapAdversary(claimed) => {
                if let Some(&bad) = claimed.iter().find(|&&cell| !environment.in_bounds(cell)) {
                    return Err(ScenarioError::Config(format!(
                        "claimed cell {bad:?} out of bounds"
                    )));
                }
                broadcasts[i] = Some(adversary_broadcast(
                    environment,
                    claimed,
                    starts[i],
                    cfg.sensor_half_width,
                ));
            }
            _ => {
                return Err(ScenarioError::Config(format!(
                    "agent {i}: map consensus supports cooperative agents and map adversaries"
                )))
            }
        }
    }

    let coop: Vec<usize> = (0..n).filter(|&i| behaviors[i].is_cooperative()).collect();
    if coop.is_empty() {
        return Err(ScenarioError::Config("no cooperative agents".into()));
    }
    let mut positions: Vec<Cell> = starts.to_vec();
    let mut beliefs: Vec<OccupancyGrid> = (0..n)
        .map(|i| match &broadcasts[i] {
            Some(grid) => grid.clone(),
            None => OccupancyGrid::unknown(environment.width(), environment.height()),
        })
        .collect();
    let mut sensed: BTreeSet<Cell> = BTreeSet::new();
    let mut positions_log = Vec::new();
    let mut steps_to_explore: Option<usize> = None;
    let mut total_rounds = 0;

    for round in 0..=cfg.max_steps {
        total_rounds = round;
        positions_log.push(positions.clone());
        let round_start = beliefs.clone();

        // Sense: noise-free truth in the sensor square.
        for &i in &coop {
            let (r, c) = positions[i];
            let w = cfg.sensor_half_width;
            for rr in r.saturating_sub(w)..=(r + w).min(environment.height() - 1) {
                for cc in c.saturating_sub(w)..=(c + w).min(environment.width() - 1) {
                    beliefs[i].set((rr, cc), environment.get((rr, cc)).unwrap());
                    sensed.insert((rr, cc));
                }
            }
        }

        // Per-cell W-MSR over the graph of the current positions, from a
        // synchronous snapshot of the post-sense beliefs.
        let graph = comm_graph(&positions)?;
        let snapshot = beliefs.clone();
        for &i in &coop {
            let neighbor_ids = graph.neighbors(i)?;
            for ((r, c), own_belief) in snapshot[i].cells() {
                let shared: Vec<(usize, f64)> = neighbor_ids
                    .iter()
                    .filter_map(|&j| snapshot[j].get((r, c)).map(|v| (j, v)))
                    .collect();
                if shared.is_empty() {
                    continue;
                }
                let own = own_belief.unwrap_or(0.5);
                let retained = wmsr_filter(own, &shared, cfg.f);
                if retained.is_empty() {
                    continue;
                }
                let sum: f64 = own
                    + retained
                        .iter()
                        .map(|&j| snapshot[j].get((r, c)).unwrap())
                        .sum::<f64>();
                beliefs[i].set((r, c), sum / (retained.len() + 1) as f64);
            }
        }

        let mut round_change = 0.0f64;
        for &i in &coop {
            for (cell, now) in beliefs[i].cells() {
                let delta = match (round_start[i].get(cell), now) {
                    (Some(a), Some(b)) => (a - b).abs(),
                    (None, None) => 0.0,
                    _ => 1.0,
                };
                round_change = round_change.max(delta);
            }
        }

        // Plan moves on the updated beliefs, treating the other agents'
        // cells as obstacles.
        let plans: Vec<Option<Cell>> = (0..n)
            .map(|i| {
                if behaviors[i].is_cooperative() {
                    let occupied: BTreeSet<Cell> =
                        (0..n).filter(|&j| j != i).map(|j| positions[j]).collect();
                    plan_step(&beliefs[i], positions[i], cfg.sensor_half_width, &occupied)
                } else {
                    None
                }
            })
            .collect();
        let all_done = coop.iter().all(|&i| plans[i].is_none());

        if all_done {
            if steps_to_explore.is_none() {
                steps_to_explore = Some(round);
            }
            let settled = round_change < cfg.settle_eps;
            let capped = round - steps_to_explore.unwrap() >= cfg.settle_cap;
            if settled || capped {
                break;
            }
        } else {
            steps_to_explore = None;
            // Move, lower agent index first; a move is dropped when the
            // target cell is currently claimed by any other agent.
            for i in 0..n {
                if let Some(next) = plans[i] {
                    let taken = (0..n).any(|j| j != i && positions[j] == next);
                    if !taken {
                        positions[i] = next;
                    }
                }
            }
        }
    }

    let reachable = reachable_free_cells(
        environment,
        &coop.iter().map(|&i| starts[i]).collect::<Vec<_>>(),
    );
    let sensed_reachable = reachable.intersection(&sensed).count();
    let mut beliefs_match = true;
    let mut max_error: f64 = 0.0;
    for &i in &coop {
        for (cell, value) in beliefs[i].cells() {
            let truth = environment.get(cell).unwrap();
            match value {
                Some(v) => {
                    beliefs_match &= (v >= 0.5) == (truth == 1.0);
                    max_error = max_error.max((v - truth).abs());
                }
                None => {
                    beliefs_match = false;
                    max_error = 1.0;
                }
            }
        }
    }
    Ok(MapRun {
        summary: ExplorationSummary {
            steps_to_explore,
            total_rounds,
            reachable_free: reachable.len(),
            sensed_reachable,
            coverage: sensed_reachable as f64 / reachable.len().max(1) as f64,
            beliefs_match_truth: beliefs_match,
            max_belief_error: max_error,
        },
        agents: positions
            .iter()
            .zip(beliefs)
            .map(|(&position, belief)| MapAgentState {
                position,
                belief,
                sensor_half_width: cfg.sensor_half_width,
            })
            .collect(),
        positions_log,
    })
}

/// Write a belief grid as `row,col,belief` records, `unknown` for cells
/// without a value.
pub fn write_belief_csv<W: Write>(mut w: W, grid: &OccupancyGrid) -> std::io::Result<()> {
    writeln!(w, "row,col,belief")?;
    for ((r, c), value) in grid.cells() {
        match value {
            Some(v) => writeln!(w, "{r},{c},{v}")?,
            None => writeln!(w, "{r},{c},unknown")?,
        }
    }
    Ok(())
}

/// Write the per-round agent positions as `round,agent,row,col,behavior`.
pub fn write_map_positions_csv<W: Write>(
    mut w: W,
    positions_log: &[Vec<Cell>],
    behaviors: &[AgentBehavior],
) -> std::io::Result<()> {
    writeln!(w, "round,agent,row,col,behavior")?;
    for (round, positions) in positions_log.iter().enumerate() {
        for (agent, (r, c)) in positions.iter().enumerate() {
            writeln!(w, "{round},{agent},{r},{c},{}", behaviors[agent].tag())?;
        }
    }
    Ok(())
}
