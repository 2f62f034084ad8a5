//! Communication graphs: the triangulation edge set, its k-hop extensions,
//! and the adjacency queries used by the robustness checker and the
//! consensus engine.

use std::collections::{BTreeSet, VecDeque};
use std::io::{BufRead, Write};

use crate::geometry::Triangulation;

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("vertex index {0} out of range for {1} vertices")]
    InvalidVertex(usize, usize),
    #[error("graph is already extended (k = {0}); extension starts from the base graph")]
    NotBaseGraph(u32),
    #[error("base edge set is disconnected")]
    DisconnectedDeltaGraph,
    #[error("extension level must be at least 1")]
    ZeroExtension,
    #[error("edge-list file, line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Undirected communication graph over dense vertex indices 0..n.
///
/// `delta_edges` are the triangulation edges; `ext_edges` are the extra
/// pairs added by k-hop extension. The two sets stay disjoint, and `k` is
/// the extension level (1 for the bare triangulation graph).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommGraph {
    n: usize,
    k: u32,
    delta_edges: BTreeSet<(usize, usize)>,
    ext_edges: BTreeSet<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl CommGraph {
    fn assemble(
        n: usize,
        k: u32,
        delta_edges: BTreeSet<(usize, usize)>,
        ext_edges: BTreeSet<(usize, usize)>,
    ) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in delta_edges.iter().chain(ext_edges.iter()) {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        CommGraph {
            n,
            k,
            delta_edges,
            ext_edges,
            adjacency,
        }
    }

    /// Base graph from a triangulation: every triangulation edge, k = 1.
    pub fn from_triangulation(tri: &Triangulation) -> Self {
        Self::assemble(tri.vertex_count(), 1, tri.edges(), BTreeSet::new())
    }

    /// Build a graph directly from an edge list (testing and file import).
    pub fn from_edges(
        n: usize,
        k: u32,
        delta: impl IntoIterator<Item = (usize, usize)>,
        ext: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, GraphError> {
        let mut delta_edges = BTreeSet::new();
        let mut ext_edges = BTreeSet::new();
        for (set, iter) in [
            (&mut delta_edges, delta.into_iter().collect::<Vec<_>>()),
            (&mut ext_edges, ext.into_iter().collect::<Vec<_>>()),
        ] {
            for (u, v) in iter {
                if u >= n || v >= n {
                    return Err(GraphError::InvalidVertex(u.max(v), n));
                }
                if u != v {
                    set.insert((u.min(v), u.max(v)));
                }
            }
        }
        ext_edges = &ext_edges - &delta_edges;
        Ok(Self::assemble(n, k, delta_edges, ext_edges))
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn extension_level(&self) -> u32 {
        self.k
    }

    pub fn delta_edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.delta_edges
    }

    pub fn ext_edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.ext_edges
    }

    pub fn edge_count(&self) -> usize {
        self.delta_edges.len() + self.ext_edges.len()
    }

    pub fn is_complete(&self) -> bool {
        self.edge_count() == self.n * (self.n.saturating_sub(1)) / 2
    }

    /// All vertices adjacent to `v` through either edge set.
    pub fn neighbors(&self, v: usize) -> Result<&[usize], GraphError> {
        self.adjacency
            .get(v)
            .map(Vec::as_slice)
            .ok_or(GraphError::InvalidVertex(v, self.n))
    }

    /// Extend the base graph so that an edge joins every pair at base-edge
    /// distance between 1 and `levels`. Level 1 returns the graph unchanged.
    ///
    /// The edge set grows one hop at a time: joining each frontier to the
    /// base adjacency adds exactly the pairs one hop farther out, so after
    /// `levels` rounds the edge set is the distance <= `levels` graph.
    pub fn k_hop_extend(&self, levels: u32) -> Result<CommGraph, GraphError> {
        if self.k != 1 {
            return Err(GraphError::NotBaseGraph(self.k));
        }
        if levels == 0 {
            return Err(GraphError::ZeroExtension);
        }
        let base: Vec<BTreeSet<usize>> = (0..self.n)
            .map(|v| self.adjacency[v].iter().copied().collect())
            .collect();
        let mut reach = base.clone();
        for _ in 1..levels {
            let mut next = reach.clone();
            for (v, reached) in reach.iter().enumerate() {
                for &u in reached {
                    next[v].extend(base[u].iter().copied());
                }
                next[v].remove(&v);
            }
            reach = next;
        }
        let mut ext_edges = BTreeSet::new();
        for (v, reached) in reach.iter().enumerate() {
            for &u in reached {
                let e = (v.min(u), v.max(u));
                if !self.delta_edges.contains(&e) {
                    ext_edges.insert(e);
                }
            }
        }
        Ok(Self::assemble(
            self.n,
            levels,
            self.delta_edges.clone(),
            ext_edges,
        ))
    }

    /// Hop counts over the base edges only, BFS-exact. Fails if the base
    /// graph is disconnected. This is the independent oracle for
    /// [`CommGraph::k_hop_extend`].
    pub fn delta_distance_matrix(&self) -> Result<Vec<Vec<usize>>, GraphError> {
        let mut base_adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.delta_edges {
            base_adj[u].push(v);
            base_adj[v].push(u);
        }
        let mut matrix = Vec::with_capacity(self.n);
        for start in 0..self.n {
            let mut dist = vec![usize::MAX; self.n];
            dist[start] = 0;
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for &u in &base_adj[v] {
                    if dist[u] == usize::MAX {
                        dist[u] = dist[v] + 1;
                        queue.push_back(u);
                    }
                }
            }
            if dist.contains(&usize::MAX) {
                return Err(GraphError::DisconnectedDeltaGraph);
            }
            matrix.push(dist);
        }
        Ok(matrix)
    }
}

/// Write the edge-list format: a header `n k`, then one `u v delta|ext`
/// record per edge.
pub fn write_edge_list<W: Write>(mut w: W, g: &CommGraph) -> std::io::Result<()> {
    writeln!(w, "{} {}", g.vertex_count(), g.extension_level())?;
    for &(u, v) in g.delta_edges() {
        writeln!(w, "{u} {v} delta")?;
    }
    for &(u, v) in g.ext_edges() {
        writeln!(w, "{u} {v} ext")?;
    }
    Ok(())
}

/// Parse the edge-list format produced by [`write_edge_list`].
pub fn read_edge_list<R: BufRead>(reader: R) -> Result<CommGraph, GraphError> {
    let mut header: Option<(usize, u32)> = None;
    let mut delta = Vec::new();
    let mut ext = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let text = line.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let fields: Vec<&str> = text.split_whitespace().collect();
        let bad = |msg: String| GraphError::Parse {
            line: lineno + 1,
            msg,
        };
        match header {
            None => {
                if fields.len() != 2 {
                    return Err(bad("expected header `n k`".into()));
                }
                let n = fields[0]
                    .parse()
                    .map_err(|_| bad("bad vertex count".into()))?;
                let k = fields[1]
                    .parse()
                    .map_err(|_| bad("bad extension level".into()))?;
                header = Some((n, k));
            }
            Some((n, _)) => {
                if fields.len() != 3 {
                    return Err(bad("expected `u v delta|ext`".into()));
                }
                let u: usize = fields[0].parse().map_err(|_| bad("bad vertex".into()))?;
                let v: usize = fields[1].parse().map_err(|_| bad("bad vertex".into()))?;
                if u >= n || v >= n || u == v {
                    return Err(bad(format!("invalid edge {u} {v}")));
                }
                match fields[2] {
                    "delta" => delta.push((u, v)),
                    "ext" => ext.push((u, v)),
                    other => return Err(bad(format!("unknown edge flag {other:?}"))),
                }
            }
        }
    }
    let (n, k) = header.ok_or(GraphError::Parse {
        line: 0,
        msg: "missing header".into(),
    })?;
    CommGraph::from_edges(n, k, delta, ext)
}
