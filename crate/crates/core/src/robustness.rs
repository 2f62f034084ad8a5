//! Exact (r,s)-robustness verification.
//!
//! A graph is (r,s)-robust when for every pair of non-empty disjoint vertex
//! subsets S1, S2 at least one of the following holds: every vertex of S1
//! has r or more neighbors outside S1; the same for S2; or the two subsets
//! together contain at least s vertices with r or more outside neighbors.
//! Verification enumerates every ternary labeling of the vertices
//! (out / S1 / S2), which scales as 3^n, so a size cap refuses graphs that
//! would run for hours.

use std::collections::BTreeSet;

use crate::graph::CommGraph;

/// Default vertex-count cap for the exhaustive check.
pub const DEFAULT_VERTEX_CAP: usize = 16;

/// Hard limit imposed by the u32 bitmask representation.
pub const MAX_VERTICES: usize = 32;

#[derive(Debug, thiserror::Error)]
pub enum RobustnessError {
    #[error("graph has {n} vertices, above the cap of {cap}; the exhaustive check scales as 3^n")]
    GraphTooLarge { n: usize, cap: usize },
    #[error("subset contains vertex {0}, out of range for {1} vertices")]
    InvalidSubset(usize, usize),
    #[error("robustness query needs r >= 1 and s >= 1, got r = {r}, s = {s}")]
    InvalidQuery { r: u32, s: u32 },
    #[error("graph has no vertices")]
    EmptyGraph,
}

/// Options for the exhaustive checker.
#[derive(Debug, Clone, Copy)]
pub struct CheckerConfig {
    /// Refuse graphs with more vertices than this.
    pub cap: usize,
    /// When true, keep enumerating after the first violation so that
    /// `pairs_checked` counts the full space; the reported witness is still
    /// the first one in enumeration order.
    pub audit: bool,
}

impl Default for CheckerConfig {
    fn default() -> Self {
        CheckerConfig {
            cap: DEFAULT_VERTEX_CAP,
            audit: false,
        }
    }
}

/// A pair of non-empty disjoint vertex subsets.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct SubsetPair {
    pub s1: BTreeSet<usize>,
    pub s2: BTreeSet<usize>,
}

/// Verdict for one (r, s) query. `witness` is present exactly when the graph
/// is not robust, and then violates all three conditions.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct RobustnessReport {
    pub r: u32,
    pub s: u32,
    pub robust: bool,
    pub witness: Option<SubsetPair>,
    pub pairs_checked: u64,
}

/// Vertices of `subset` having at least `r` neighbors outside `subset`.
pub fn external_degree_set(
    g: &CommGraph,
    subset: &BTreeSet<usize>,
    r: u32,
) -> Result<BTreeSet<usize>, RobustnessError> {
    let n = g.vertex_count();
    if let Some(&v) = subset.iter().find(|&&v| v >= n) {
        return Err(RobustnessError::InvalidSubset(v, n));
    }
    Ok(subset
        .iter()
        .copied()
        .filter(|&v| {
            let outside = g
                .neighbors(v)
                .expect("validated index")
                .iter()
                .filter(|u| !subset.contains(u))
                .count();
            outside as u32 >= r
        })
        .collect())
}

/// Bitmask adjacency rows for the exhaustive enumeration.
fn adjacency_masks(g: &CommGraph) -> Vec<u32> {
    (0..g.vertex_count())
        .map(|v| {
            g.neighbors(v)
                .expect("index in range")
                .iter()
                .fold(0u32, |m, &u| m | (1 << u))
        })
        .collect()
}

/// Number of vertices in `subset` (as a mask) with at least `r` neighbors
/// outside it.
fn external_degree_count(adj: &[u32], subset: u32, r: u32) -> u32 {
    let mut count = 0;
    let mut rest = subset;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        if (adj[v] & !subset).count_ones() >= r {
            count += 1;
        }
    }
    count
}

struct Enumeration<'g> {
    adj: &'g [u32],
    n: usize,
    r: u32,
    s: u32,
    audit: bool,
    pairs_checked: u64,
    witness: Option<(u32, u32)>,
}

impl Enumeration<'_> {
    /// Depth-first walk over ternary labelings in lexicographic order of
    /// (label of vertex 0, label of vertex 1, ...) with out < S1 < S2.
    /// Unordered pairs are deduplicated by forcing the smallest labeled
    /// vertex into S1; the first violating labeling is the witness.
    fn run(&mut self, depth: usize, s1: u32, s2: u32) -> bool {
        if depth == self.n {
            if s1 == 0 || s2 == 0 {
                return true;
            }
            self.pairs_checked += 1;
            let x1 = external_degree_count(self.adj, s1, self.r);
            let x2 = external_degree_count(self.adj, s2, self.r);
            let holds = x1 == s1.count_ones() || x2 == s2.count_ones() || x1 + x2 >= self.s;
            if !holds && self.witness.is_none() {
                self.witness = Some((s1, s2));
            }
            return holds || self.audit || self.witness.is_none();
        }
        let bit = 1u32 << depth;
        if !self.run(depth + 1, s1, s2) {
            return false;
        }
        if !self.run(depth + 1, s1 | bit, s2) {
            return false;
        }
        // Vertex `depth` may open S2 only if S1 already has a smaller vertex.
        if s1 != 0 && !self.run(depth + 1, s1, s2 | bit) {
            return false;
        }
        true
    }
}

fn mask_to_set(mask: u32) -> BTreeSet<usize> {
    (0..32).filter(|&v| mask & (1 << v) != 0).collect()
}

/// Exhaustively decide (r, s)-robustness.
pub fn is_rs_robust(
    g: &CommGraph,
    r: u32,
    s: u32,
    cfg: &CheckerConfig,
) -> Result<RobustnessReport, RobustnessError> {
    if r < 1 || s < 1 {
        return Err(RobustnessError::InvalidQuery { r, s });
    }
    let n = g.vertex_count();
    if n == 0 {
        return Err(RobustnessError::EmptyGraph);
    }
    if n > cfg.cap.min(MAX_VERTICES) {
        return Err(RobustnessError::GraphTooLarge {
            n,
            cap: cfg.cap.min(MAX_VERTICES),
        });
    }
    let adj = adjacency_masks(g);
    let mut walk = Enumeration {
        adj: &adj,
        n,
        r,
        s,
        audit: cfg.audit,
        pairs_checked: 0,
        witness: None,
    };
    walk.run(0, 0, 0);
    Ok(RobustnessReport {
        r,
        s,
        robust: walk.witness.is_none(),
        witness: walk.witness.map(|(s1, s2)| SubsetPair {
            s1: mask_to_set(s1),
            s2: mask_to_set(s2),
        }),
        pairs_checked: walk.pairs_checked,
    })
}

/// (r, 1)-robustness, the classical notion of r-robustness.
pub fn is_r_robust(g: &CommGraph, r: u32, cfg: &CheckerConfig) -> Result<bool, RobustnessError> {
    Ok(is_rs_robust(g, r, 1, cfg)?.robust)
}

/// Largest r with the graph (r, r)-robust, found by starting from
/// ceil(n / 2) and decrementing until the conditions hold. Returns 0 when
/// the graph is not even (1, 1)-robust.
pub fn max_equal_rs(g: &CommGraph, cfg: &CheckerConfig) -> Result<u32, RobustnessError> {
    let n = g.vertex_count() as u32;
    let mut level = n.div_ceil(2);
    while level >= 1 {
        if is_rs_robust(g, level, level, cfg)?.robust {
            return Ok(level);
        }
        level -= 1;
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::delaunay;
    use crate::graph::CommGraph;
    use crate::study::two_lines_points;

    fn complete(n: usize) -> CommGraph {
        let edges = (0..n).flat_map(|u| ((u + 1)..n).map(move |v| (u, v)));
        CommGraph::from_edges(n, 1, edges, []).unwrap()
    }

    fn path(n: usize) -> CommGraph {
        CommGraph::from_edges(n, 1, (0..n - 1).map(|v| (v, v + 1)), []).unwrap()
    }

    fn set(vs: &[usize]) -> BTreeSet<usize> {
        vs.iter().copied().collect()
    }

    #[test]
    fn external_degree_basics() {
        let g = complete(5);
        assert_eq!(
            external_degree_set(&g, &set(&[0, 1]), 0).unwrap(),
            set(&[0, 1])
        );
        assert_eq!(
            external_degree_set(&g, &set(&[0, 1]), 3).unwrap(),
            set(&[0, 1])
        );
        assert_eq!(external_degree_set(&g, &set(&[0, 1]), 4).unwrap(), set(&[]));
        assert!(matches!(
            external_degree_set(&g, &set(&[9]), 1),
            Err(RobustnessError::InvalidSubset(9, 5))
        ));
    }

    #[test]
    fn strip_endpoint_has_low_external_degree() {
        let g = CommGraph::from_triangulation(&delaunay(&two_lines_points(11, 1.0)).unwrap());
        let endpoint = (0..11)
            .find(|&v| g.neighbors(v).unwrap().len() == 2)
            .unwrap();
        assert_eq!(
            external_degree_set(&g, &set(&[endpoint]), 3).unwrap(),
            set(&[])
        );
    }

    #[test]
    fn complete_four_fails_three_three() {
        let report = is_rs_robust(&complete(4), 3, 3, &CheckerConfig::default()).unwrap();
        assert!(!report.robust);
        let w = report.witness.unwrap();
        assert_eq!(w.s1.len() + w.s2.len(), 4);
        assert_eq!(w.s1.len(), 2);
    }

    #[test]
    fn connected_graphs_are_one_one_robust() {
        for g in [complete(4), path(5), complete(6)] {
            assert!(
                is_rs_robust(&g, 1, 1, &CheckerConfig::default())
                    .unwrap()
                    .robust
            );
        }
    }

    #[test]
    fn strip_eleven_fails_three_three() {
        let g = CommGraph::from_triangulation(&delaunay(&two_lines_points(11, 1.0)).unwrap());
        assert!(
            !is_rs_robust(&g, 3, 3, &CheckerConfig::default())
                .unwrap()
                .robust
        );
        assert_eq!(max_equal_rs(&g, &CheckerConfig::default()).unwrap(), 2);
    }

    #[test]
    fn complete_eleven_reaches_six() {
        assert_eq!(
            max_equal_rs(&complete(11), &CheckerConfig::default()).unwrap(),
            6
        );
    }

    #[test]
    fn r_robustness_examples() {
        let cfg = CheckerConfig::default();
        assert!(is_r_robust(&complete(3), 2, &cfg).unwrap());
        assert!(!is_r_robust(&path(4), 2, &cfg).unwrap());
    }

    #[test]
    fn witness_violates_all_three_conditions() {
        let g = path(5);
        let report = is_rs_robust(&g, 2, 2, &CheckerConfig::default()).unwrap();
        assert!(!report.robust);
        let w = report.witness.unwrap();
        let x1 = external_degree_set(&g, &w.s1, 2).unwrap();
        let x2 = external_degree_set(&g, &w.s2, 2).unwrap();
        assert_ne!(x1.len(), w.s1.len());
        assert_ne!(x2.len(), w.s2.len());
        assert!(x1.len() + x2.len() < 2);
    }

    #[test]
    fn audit_counts_the_full_space() {
        // Unordered non-empty disjoint pairs over n vertices: (3^n + 1) / 2
        // minus the labelings with an empty side.
        let g = complete(4);
        let cfg = CheckerConfig {
            audit: true,
            ..CheckerConfig::default()
        };
        let report = is_rs_robust(&g, 1, 1, &cfg).unwrap();
        let total = 3u64.pow(4).div_ceil(2) - 2u64.pow(4);
        assert_eq!(report.pairs_checked, total);

        let early = is_rs_robust(&g, 4, 4, &CheckerConfig::default()).unwrap();
        assert!(!early.robust);
        assert!(early.pairs_checked < total);
        let audited = is_rs_robust(&g, 4, 4, &cfg).unwrap();
        assert_eq!(audited.pairs_checked, total);
        assert_eq!(audited.witness, early.witness);
    }

    #[test]
    fn cap_refuses_large_graphs() {
        assert!(matches!(
            is_rs_robust(&complete(17), 2, 2, &CheckerConfig::default()),
            Err(RobustnessError::GraphTooLarge { n: 17, cap: 16 })
        ));
        let lowered = CheckerConfig {
            cap: 5,
            ..CheckerConfig::default()
        };
        assert!(matches!(
            is_rs_robust(&complete(6), 2, 2, &lowered),
            Err(RobustnessError::GraphTooLarge { n: 6, cap: 5 })
        ));
        assert!(
            is_rs_robust(&complete(6), 2, 2, &CheckerConfig::default())
                .unwrap()
                .robust
        );
    }

    #[test]
    fn invalid_query_is_rejected() {
        assert!(matches!(
            is_rs_robust(&complete(3), 0, 1, &CheckerConfig::default()),
            Err(RobustnessError::InvalidQuery { .. })
        ));
    }
}
