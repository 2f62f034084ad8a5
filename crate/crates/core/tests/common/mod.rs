//! Shared test oracles, kept independent of the library's implementation
//! paths: the robustness oracle enumerates subset pairs instead of ternary
//! labelings, and the Delaunay check works from circumcenters instead of
//! the incircle determinant.
#![allow(dead_code)] // each test target uses a different subset

use std::collections::BTreeSet;

use rand::Rng;
use vorobust::geometry::{Point2, Triangulation};
use vorobust::graph::CommGraph;

/// Adjacency lists of the full edge set.
pub fn adjacency(g: &CommGraph) -> Vec<Vec<usize>> {
    (0..g.vertex_count())
        .map(|v| g.neighbors(v).unwrap().to_vec())
        .collect()
}

fn subset_from_mask(mask: u32) -> Vec<usize> {
    (0..32).filter(|&v| mask & (1 << v) != 0).collect()
}

fn external_count(adj: &[Vec<usize>], members: &[usize], mask: u32, r: u32) -> usize {
    members
        .iter()
        .filter(|&&v| adj[v].iter().filter(|&&u| mask & (1 << u) == 0).count() as u32 >= r)
        .count()
}

/// Textbook (r, s)-robustness decision: walk every ordered pair of
/// non-empty disjoint subsets and test the three conditions directly.
pub fn naive_is_rs_robust(adj: &[Vec<usize>], r: u32, s: u32) -> bool {
    let n = adj.len();
    for s1_mask in 1u32..(1 << n) {
        let complement = !s1_mask & ((1u32 << n) - 1);
        // Enumerate the non-empty subsets of the complement.
        let mut s2_mask = complement;
        while s2_mask != 0 {
            let s1 = subset_from_mask(s1_mask);
            let s2 = subset_from_mask(s2_mask);
            let x1 = external_count(adj, &s1, s1_mask, r);
            let x2 = external_count(adj, &s2, s2_mask, r);
            if x1 != s1.len() && x2 != s2.len() && x1 + x2 < s as usize {
                return false;
            }
            s2_mask = (s2_mask - 1) & complement;
        }
    }
    true
}

/// Largest r with (r, r)-robustness, by upward scan from zero.
pub fn naive_max_equal_rs(adj: &[Vec<usize>]) -> u32 {
    let mut level = 0;
    while naive_is_rs_robust(adj, level + 1, level + 1) {
        level += 1;
    }
    level
}

fn circumcircle(a: Point2, b: Point2, c: Point2) -> (f64, f64, f64) {
    let d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
    let ux = ((a.x * a.x + a.y * a.y) * (b.y - c.y)
        + (b.x * b.x + b.y * b.y) * (c.y - a.y)
        + (c.x * c.x + c.y * c.y) * (a.y - b.y))
        / d;
    let uy = ((a.x * a.x + a.y * a.y) * (c.x - b.x)
        + (b.x * b.x + b.y * b.y) * (a.x - c.x)
        + (c.x * c.x + c.y * c.y) * (b.x - a.x))
        / d;
    let r = (a.x - ux).hypot(a.y - uy);
    (ux, uy, r)
}

/// Verify every triangulation invariant by independent means: CCW faces
/// (shoelace), empty circumcircles (circumcenter distances), Euler's edge
/// count, minimum degree, and the path-or-cycle shape of neighbor rings.
pub fn check_triangulation(tri: &Triangulation) {
    let points = tri.points();
    for t in tri.triangles() {
        let (a, b, c) = (points[t[0]], points[t[1]], points[t[2]]);
        let area2 = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
        assert!(area2 > 0.0, "face {t:?} is not counter-clockwise");
        let (ux, uy, radius) = circumcircle(a, b, c);
        for (i, p) in points.iter().enumerate() {
            if !t.contains(&i) {
                let dist = (p.x - ux).hypot(p.y - uy);
                assert!(
                    dist >= radius * (1.0 - 1e-7),
                    "point {i} inside circumcircle of {t:?}: {dist} < {radius}"
                );
            }
        }
    }

    let v = tri.vertex_count();
    let h = tri.hull().len();
    let edges = tri.edges();
    assert_eq!(
        edges.len(),
        3 * v - 3 - h,
        "edge count breaks Euler's formula"
    );

    let mut degree = vec![0usize; v];
    let mut adj = vec![BTreeSet::new(); v];
    for &(a, b) in edges.iter() {
        degree[a] += 1;
        degree[b] += 1;
        adj[a].insert(b);
        adj[b].insert(a);
    }
    assert!(
        v < 3 || degree.iter().all(|&d| d >= 2),
        "vertex of degree < 2"
    );

    for vertex in 0..v {
        let ring = tri.vertex_neighbor_ring(vertex).unwrap();
        assert_eq!(
            ring.closed,
            !tri.hull().contains(&vertex),
            "ring closure disagrees with hull membership for {vertex}"
        );
        assert_eq!(
            ring.neighbors.iter().copied().collect::<BTreeSet<_>>(),
            adj[vertex],
            "ring misses neighbors of {vertex}"
        );
        // Consecutive ring entries must be adjacent in the triangulation:
        // the ring is a path, closing into a cycle for interior vertices.
        for pair in ring.neighbors.windows(2) {
            assert!(adj[pair[0]].contains(&pair[1]), "ring gap at {pair:?}");
        }
        if ring.closed {
            let first = ring.neighbors[0];
            let last = *ring.neighbors.last().unwrap();
            assert!(ring.neighbors.len() == 2 || adj[last].contains(&first));
        }
    }
}

/// Uniform points in a w x h box.
pub fn random_points<R: Rng>(rng: &mut R, n: usize, w: f64, h: f64) -> Vec<Point2> {
    (0..n)
        .map(|_| Point2::new(rng.gen_range(0.0..w), rng.gen_range(0.0..h)))
        .collect()
}

/// Random connected-ish graph on n vertices: a random spanning tree plus
/// each remaining edge with the given probability.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, extra_p: f64) -> CommGraph {
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.gen_range(0..v), v));
    }
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen_bool(extra_p) {
                edges.push((u, v));
            }
        }
    }
    CommGraph::from_edges(n, 1, edges, []).unwrap()
}
