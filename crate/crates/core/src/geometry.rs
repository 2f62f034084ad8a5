//! Delaunay triangulation of 2D agent positions.
//!
//! The triangulation is built by incremental insertion with point location
//! and edge flipping. Degenerate (cocircular) quads are resolved with a
//! deterministic tie-break so that grid-like formations always triangulate
//! the same way: within the incircle tolerance band, the diagonal connecting
//! the lexicographically smallest vertex pair is kept.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, Write};

/// Relative tolerance band on the incircle determinant. Quads whose incircle
/// determinant falls inside the band are treated as cocircular and resolved
/// by the lexicographic diagonal rule.
pub const INCIRCLE_REL_EPS: f64 = 1e-9;

/// Relative tolerance on the orientation determinant.
pub const ORIENT_REL_EPS: f64 = 1e-12;

/// Points closer than this are rejected as duplicates rather than merged.
pub const DUPLICATE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum GeometryError {
    #[error("triangulation needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("point {0} has a non-finite coordinate")]
    NonFinite(usize),
    #[error("points {0} and {1} are closer than the duplicate tolerance")]
    DuplicatePoints(usize, usize),
    #[error("all input points are collinear")]
    CollinearInput,
    #[error("vertex index {0} out of range for {1} points")]
    InvalidVertex(usize, usize),
    #[error("positions file, line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("triangulation internal failure: {0}")]
    Internal(&'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A planar position in meters.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dist(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Ccw,
    Cw,
    Collinear,
}

/// Sign of the signed area of triangle (a, b, c), with a relative tolerance.
pub fn orient(a: Point2, b: Point2, c: Point2) -> Orientation {
    let det = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    let mag = (b.x - a.x).abs() * (c.y - a.y).abs() + (b.y - a.y).abs() * (c.x - a.x).abs();
    if det.abs() <= ORIENT_REL_EPS * mag {
        Orientation::Collinear
    } else if det > 0.0 {
        Orientation::Ccw
    } else {
        Orientation::Cw
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InCircle {
    Inside,
    Outside,
    Cocircular,
}

/// Position of `d` relative to the circumcircle of the CCW triangle (a, b, c).
///
/// The determinant is compared against `INCIRCLE_REL_EPS` times the sum of
/// the magnitudes of its expansion terms, so the band scales with the data.
pub fn incircle(a: Point2, b: Point2, c: Point2, d: Point2) -> InCircle {
    let adx = a.x - d.x;
    let ady = a.y - d.y;
    let bdx = b.x - d.x;
    let bdy = b.y - d.y;
    let cdx = c.x - d.x;
    let cdy = c.y - d.y;
    let alift = adx * adx + ady * ady;
    let blift = bdx * bdx + bdy * bdy;
    let clift = cdx * cdx + cdy * cdy;

    let det = adx * (bdy * clift - blift * cdy) - ady * (bdx * clift - blift * cdx)
        + alift * (bdx * cdy - bdy * cdx);
    let mag = adx.abs() * (bdy.abs() * clift + blift * cdy.abs())
        + ady.abs() * (bdx.abs() * clift + blift * cdx.abs())
        + alift * (bdx.abs() * cdy.abs() + bdy.abs() * cdx.abs());

    if det.abs() <= INCIRCLE_REL_EPS * mag {
        InCircle::Cocircular
    } else if det > 0.0 {
        InCircle::Inside
    } else {
        InCircle::Outside
    }
}

/// Ordered neighbors of a vertex. `closed` is true for interior vertices,
/// whose neighbors wrap around in a cycle; hull vertices get an open path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborRing {
    pub neighbors: Vec<usize>,
    pub closed: bool,
}

/// A Delaunay triangulation: the input points, CCW triangle faces, and the
/// convex hull as a CCW vertex cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct Triangulation {
    points: Vec<Point2>,
    triangles: Vec<[usize; 3]>,
    hull: Vec<usize>,
}

impl Triangulation {
    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn hull(&self) -> &[usize] {
        &self.hull
    }

    pub fn vertex_count(&self) -> usize {
        self.points.len()
    }

    /// Undirected edge set, each edge as (low, high).
    pub fn edges(&self) -> BTreeSet<(usize, usize)> {
        let mut edges = BTreeSet::new();
        for t in &self.triangles {
            for (u, v) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                edges.insert((u.min(v), u.max(v)));
            }
        }
        edges
    }

    pub fn is_hull_vertex(&self, v: usize) -> bool {
        self.hull.contains(&v)
    }

    /// Neighbors of `v` in angular order around `v`, built by walking the
    /// triangle fan. Interior vertices yield a closed cycle, hull vertices an
    /// open path; both start at a deterministic neighbor.
    pub fn vertex_neighbor_ring(&self, v: usize) -> Result<NeighborRing, GeometryError> {
        if v >= self.points.len() {
            return Err(GeometryError::InvalidVertex(v, self.points.len()));
        }
        // In each CCW triangle (v, a, b) the step a -> b walks counter-
        // clockwise around v.
        let mut succ: BTreeMap<usize, usize> = BTreeMap::new();
        for t in &self.triangles {
            if let Some(pos) = t.iter().position(|&u| u == v) {
                let a = t[(pos + 1) % 3];
                let b = t[(pos + 2) % 3];
                succ.insert(a, b);
            }
        }
        if succ.is_empty() {
            return Err(GeometryError::Internal("vertex belongs to no triangle"));
        }
        let targets: BTreeSet<usize> = succ.values().copied().collect();
        let chain_start = succ.keys().copied().find(|a| !targets.contains(a));
        let closed = chain_start.is_none();
        let start = chain_start.unwrap_or_else(|| *succ.keys().next().unwrap());

        let mut neighbors = vec![start];
        let mut cur = start;
        while let Some(&next) = succ.get(&cur) {
            if next == start {
                break;
            }
            neighbors.push(next);
            cur = next;
        }
        if neighbors.len() != succ.len() + usize::from(!closed) {
            return Err(GeometryError::Internal("broken neighbor fan"));
        }
        Ok(NeighborRing { neighbors, closed })
    }
}

/// Triangulate `points`. Deterministic for a given input order; fails on
/// fewer than 3 points, duplicate points, or fully collinear input.
pub fn delaunay(points: &[Point2]) -> Result<Triangulation, GeometryError> {
    if points.len() < 3 {
        return Err(GeometryError::TooFewPoints(points.len()));
    }
    for (i, p) in points.iter().enumerate() {
        if !p.is_finite() {
            return Err(GeometryError::NonFinite(i));
        }
    }
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            if points[i].dist(&points[j]) < DUPLICATE_TOLERANCE {
                return Err(GeometryError::DuplicatePoints(i, j));
            }
        }
    }
    let apex = (2..points.len())
        .find(|&j| orient(points[0], points[1], points[j]) != Orientation::Collinear)
        .ok_or(GeometryError::CollinearInput)?;

    let mut mesh = Mesh::new(points);
    match orient(points[0], points[1], points[apex]) {
        Orientation::Ccw => mesh.add_triangle([0, 1, apex]),
        _ => mesh.add_triangle([0, apex, 1]),
    };
    for v in 2..points.len() {
        if v != apex {
            mesh.insert(v)?;
        }
    }
    mesh.finish()
}

/// Incremental triangulation state: a triangle soup plus a directed-edge
/// lookup. Directed edge (a, b) maps to the triangle listing a -> b in CCW
/// order, so boundary edges are exactly those with no reverse entry.
struct Mesh<'a> {
    points: &'a [Point2],
    tris: Vec<[usize; 3]>,
    alive: Vec<bool>,
    edge: HashMap<(usize, usize), usize>,
}

enum Location {
    Inside(usize),
    OnEdge(usize, (usize, usize)),
    Outside,
}

impl<'a> Mesh<'a> {
    fn new(points: &'a [Point2]) -> Self {
        Mesh {
            points,
            tris: Vec::new(),
            alive: Vec::new(),
            edge: HashMap::new(),
        }
    }

    fn add_triangle(&mut self, t: [usize; 3]) -> usize {
        let id = self.tris.len();
        self.tris.push(t);
        self.alive.push(true);
        for (u, v) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            self.edge.insert((u, v), id);
        }
        id
    }

    fn remove_triangle(&mut self, id: usize) {
        let t = self.tris[id];
        self.alive[id] = false;
        for (u, v) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            self.edge.remove(&(u, v));
        }
    }

    /// Rotate triangle `id` so its vertex list starts with `lead`.
    fn rotated(&self, id: usize, lead: usize) -> [usize; 3] {
        let t = self.tris[id];
        let pos = t
            .iter()
            .position(|&u| u == lead)
            .expect("vertex in triangle");
        [t[pos], t[(pos + 1) % 3], t[(pos + 2) % 3]]
    }

    fn locate(&self, p: Point2) -> Result<Location, GeometryError> {
        for id in 0..self.tris.len() {
            if !self.alive[id] {
                continue;
            }
            let [a, b, c] = self.tris[id];
            let mut on_edge = None;
            let mut inside = true;
            for (u, v) in [(a, b), (b, c), (c, a)] {
                match orient(self.points[u], self.points[v], p) {
                    Orientation::Ccw => {}
                    Orientation::Cw => {
                        inside = false;
                        break;
                    }
                    Orientation::Collinear => {
                        if on_edge.is_some() {
                            return Err(GeometryError::Internal(
                                "point coincides with an existing vertex",
                            ));
                        }
                        on_edge = Some((u, v));
                    }
                }
            }
            if inside {
                return Ok(match on_edge {
                    Some(e) => Location::OnEdge(id, e),
                    None => Location::Inside(id),
                });
            }
        }
        Ok(Location::Outside)
    }

    fn insert(&mut self, v: usize) -> Result<(), GeometryError> {
        let p = self.points[v];
        match self.locate(p)? {
            Location::Inside(t) => {
                let [a, b, c] = self.tris[t];
                self.remove_triangle(t);
                self.add_triangle([a, b, v]);
                self.add_triangle([b, c, v]);
                self.add_triangle([c, a, v]);
                self.legalize(v, &[(a, b), (b, c), (c, a)]);
            }
            Location::OnEdge(t, (a, b)) => {
                let [_, _, c] = self.rotated(t, a);
                self.remove_triangle(t);
                self.add_triangle([a, v, c]);
                self.add_triangle([v, b, c]);
                let mut pending = vec![(c, a), (b, c)];
                if let Some(&t2) = self.edge.get(&(b, a)) {
                    let [_, _, d] = self.rotated(t2, b);
                    self.remove_triangle(t2);
                    self.add_triangle([b, v, d]);
                    self.add_triangle([v, a, d]);
                    pending.push((a, d));
                    pending.push((d, b));
                }
                self.legalize(v, &pending);
            }
            Location::Outside => {
                // Connect v to every hull edge it strictly sees.
                let visible: Vec<(usize, usize)> = self
                    .edge
                    .keys()
                    .copied()
                    .filter(|&(a, b)| !self.edge.contains_key(&(b, a)))
                    .filter(|&(a, b)| orient(self.points[a], self.points[b], p) == Orientation::Cw)
                    .collect();
                if visible.is_empty() {
                    return Err(GeometryError::Internal("no hull edge visible"));
                }
                let mut pending = Vec::with_capacity(visible.len());
                for (a, b) in visible {
                    self.add_triangle([b, a, v]);
                    pending.push((b, a));
                }
                self.legalize(v, &pending);
            }
        }
        Ok(())
    }

    /// Lawson legalization around freshly inserted vertex `v`. Each queued
    /// edge (a, b) is the base of a triangle (a, b, v); the edge flips when
    /// the opposite vertex lands strictly inside the circumcircle, or, in the
    /// cocircular band, when the other diagonal is lexicographically smaller.
    fn legalize(&mut self, v: usize, seed: &[(usize, usize)]) {
        let mut stack: Vec<(usize, usize)> = seed.to_vec();
        while let Some((a, b)) = stack.pop() {
            let Some(&t1) = self.edge.get(&(a, b)) else {
                continue;
            };
            if self.rotated(t1, a) != [a, b, v] {
                continue; // stale entry from an earlier flip
            }
            let Some(&t2) = self.edge.get(&(b, a)) else {
                continue; // hull edge
            };
            let [_, _, d] = self.rotated(t2, b);
            let flip = match incircle(
                self.points[a],
                self.points[b],
                self.points[v],
                self.points[d],
            ) {
                InCircle::Inside => true,
                InCircle::Outside => false,
                InCircle::Cocircular => {
                    sorted_pair(v, d) < sorted_pair(a, b) && self.flip_is_convex(v, d, a, b)
                }
            };
            if flip {
                self.remove_triangle(t1);
                self.remove_triangle(t2);
                self.add_triangle([a, d, v]);
                self.add_triangle([d, b, v]);
                stack.push((a, d));
                stack.push((d, b));
            }
        }
    }

    /// The diagonal swap (a, b) -> (p, q) is valid only when the segments
    /// properly cross.
    fn flip_is_convex(&self, p: usize, q: usize, a: usize, b: usize) -> bool {
        let o1 = orient(self.points[p], self.points[q], self.points[a]);
        let o2 = orient(self.points[p], self.points[q], self.points[b]);
        matches!(
            (o1, o2),
            (Orientation::Ccw, Orientation::Cw) | (Orientation::Cw, Orientation::Ccw)
        )
    }

    fn finish(self) -> Result<Triangulation, GeometryError> {
        let mut triangles: Vec<[usize; 3]> = self
            .tris
            .iter()
            .zip(&self.alive)
            .filter(|(_, &alive)| alive)
            .map(|(t, _)| {
                let lead = (0..3).min_by_key(|&i| t[i]).unwrap();
                [t[lead], t[(lead + 1) % 3], t[(lead + 2) % 3]]
            })
            .collect();
        triangles.sort_unstable();

        // Boundary edges (those without a reverse) chain into the CCW hull.
        let mut hull_next: BTreeMap<usize, usize> = BTreeMap::new();
        for t in &triangles {
            for (u, v) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                let reversed = triangles
                    .iter()
                    .any(|s| [(s[0], s[1]), (s[1], s[2]), (s[2], s[0])].contains(&(v, u)));
                if !reversed && hull_next.insert(u, v).is_some() {
                    return Err(GeometryError::Internal("non-manifold hull"));
                }
            }
        }
        let start = *hull_next
            .keys()
            .next()
            .ok_or(GeometryError::Internal("empty hull"))?;
        let mut hull = vec![start];
        let mut cur = start;
        loop {
            let next = *hull_next
                .get(&cur)
                .ok_or(GeometryError::Internal("open hull chain"))?;
            if next == start {
                break;
            }
            hull.push(next);
            cur = next;
            if hull.len() > hull_next.len() {
                return Err(GeometryError::Internal("hull walk does not close"));
            }
        }
        Ok(Triangulation {
            points: self.points.to_vec(),
            triangles,
            hull,
        })
    }
}

fn sorted_pair(u: usize, v: usize) -> (usize, usize) {
    (u.min(v), u.max(v))
}

/// Parse a positions file: one `id x y` record per line, whitespace or
/// comma separated, `#` starting a comment.
pub fn read_positions<R: BufRead>(reader: R) -> Result<(Vec<u64>, Vec<Point2>), GeometryError> {
    let mut ids = Vec::new();
    let mut points = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let text = line.split('#').next().unwrap_or("");
        let fields: Vec<&str> = text
            .split([',', ' ', '\t'])
            .filter(|s| !s.is_empty())
            .collect();
        if fields.is_empty() {
            continue;
        }
        let parse = |what: &str, s: &str| -> Result<f64, GeometryError> {
            s.parse().map_err(|_| GeometryError::Parse {
                line: lineno + 1,
                msg: format!("bad {what}: {s:?}"),
            })
        };
        if fields.len() != 3 {
            return Err(GeometryError::Parse {
                line: lineno + 1,
                msg: format!("expected `id x y`, got {} fields", fields.len()),
            });
        }
        let id: u64 = fields[0].parse().map_err(|_| GeometryError::Parse {
            line: lineno + 1,
            msg: format!("bad agent id: {:?}", fields[0]),
        })?;
        if ids.contains(&id) {
            return Err(GeometryError::Parse {
                line: lineno + 1,
                msg: format!("agent id {id} repeated"),
            });
        }
        ids.push(id);
        points.push(Point2::new(parse("x", fields[1])?, parse("y", fields[2])?));
    }
    Ok((ids, points))
}

/// Write triangles as `index,v0,v1,v2` records for external plotting.
pub fn write_triangles<W: Write>(mut w: W, tri: &Triangulation) -> std::io::Result<()> {
    writeln!(w, "triangle,v0,v1,v2")?;
    for (i, t) in tri.triangles().iter().enumerate() {
        writeln!(w, "{},{},{},{}", i, t[0], t[1], t[2])?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(coords: &[(f64, f64)]) -> Vec<Point2> {
        coords.iter().map(|&(x, y)| Point2::new(x, y)).collect()
    }

    /// Independent check of the empty-circumcircle property, Euler's edge
    /// count, CCW orientation, and minimum degree.
    pub(crate) fn assert_valid_delaunay(tri: &Triangulation) {
        let points = tri.points();
        for t in tri.triangles() {
            assert_eq!(
                orient(points[t[0]], points[t[1]], points[t[2]]),
                Orientation::Ccw,
                "triangle {t:?} not CCW"
            );
            for (i, p) in points.iter().enumerate() {
                if t.contains(&i) {
                    continue;
                }
                assert_ne!(
                    incircle(points[t[0]], points[t[1]], points[t[2]], *p),
                    InCircle::Inside,
                    "point {i} strictly inside circumcircle of {t:?}"
                );
            }
        }
        let v = tri.vertex_count();
        let h = tri.hull().len();
        assert_eq!(tri.edges().len(), 3 * v - 3 - h, "Euler edge count");

        let mut degree = vec![0usize; v];
        for &(u, w) in tri.edges().iter() {
            degree[u] += 1;
            degree[w] += 1;
        }
        assert!(degree.iter().all(|&d| d >= 2), "degree < 2: {degree:?}");

        for (i, &deg) in degree.iter().enumerate() {
            let ring = tri.vertex_neighbor_ring(i).unwrap();
            assert_eq!(ring.closed, !tri.is_hull_vertex(i));
            assert_eq!(ring.neighbors.len(), deg);
        }
    }

    #[test]
    fn minimal_triangle() {
        let tri = delaunay(&pts(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)])).unwrap();
        assert_eq!(tri.triangles().len(), 1);
        assert_eq!(tri.edges().len(), 3);
        assert_eq!(tri.hull().len(), 3);
        assert_valid_delaunay(&tri);
        for v in 0..3 {
            let ring = tri.vertex_neighbor_ring(v).unwrap();
            assert_eq!(ring.neighbors.len(), 2);
            assert!(!ring.closed);
        }
    }

    #[test]
    fn unit_square_tie_break() {
        // All four corners are cocircular, so both diagonals give a valid
        // Delaunay triangulation; the tie-break must keep {0, 2}.
        let square = pts(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        let tri = delaunay(&square).unwrap();
        assert_eq!(tri.triangles().len(), 2);
        assert_eq!(tri.edges().len(), 5);
        assert!(tri.edges().contains(&(0, 2)));
        assert!(!tri.edges().contains(&(1, 3)));
        assert_valid_delaunay(&tri);

        // Both diagonals really are cocircular: the alternate triangulation
        // also satisfies the empty-circumcircle check within tolerance.
        let alt = Triangulation {
            points: square.clone(),
            triangles: vec![[0, 1, 3], [1, 2, 3]],
            hull: vec![0, 1, 2, 3],
        };
        assert_valid_delaunay(&alt);

        // Hull corners keep a path ring; corner 1 sits off the diagonal.
        let ring = tri.vertex_neighbor_ring(1).unwrap();
        assert_eq!(ring.neighbors.len(), 2);
        assert!(!ring.closed);
        let ring = tri.vertex_neighbor_ring(0).unwrap();
        assert_eq!(ring.neighbors.len(), 3);
        assert!(!ring.closed);
    }

    #[test]
    fn plus_configuration_center_ring() {
        let tri = delaunay(&pts(&[
            (0.0, 0.0),
            (1.0, 0.0),
            (0.0, 1.0),
            (-1.0, 0.0),
            (0.0, -1.0),
        ]))
        .unwrap();
        assert_valid_delaunay(&tri);
        let ring = tri.vertex_neighbor_ring(0).unwrap();
        assert!(ring.closed);
        assert_eq!(ring.neighbors.len(), 4);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            delaunay(&pts(&[(0.0, 0.0), (1.0, 0.0)])),
            Err(GeometryError::TooFewPoints(2))
        ));
        assert!(matches!(
            delaunay(&pts(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (5.0, 0.0)])),
            Err(GeometryError::CollinearInput)
        ));
        assert!(matches!(
            delaunay(&pts(&[
                (0.0, 0.0),
                (1.0, 0.0),
                (1.0 + 1e-14, 1e-14),
                (0.0, 1.0)
            ])),
            Err(GeometryError::DuplicatePoints(1, 2))
        ));
        assert!(matches!(
            delaunay(&pts(&[(0.0, 0.0), (f64::NAN, 0.0), (0.0, 1.0)])),
            Err(GeometryError::NonFinite(1))
        ));
    }

    #[test]
    fn two_lines_eleven_has_nineteen_edges() {
        let points = crate::study::two_lines_points(11, 1.0);
        let tri = delaunay(&points).unwrap();
        assert_eq!(tri.edges().len(), 19);
        assert_valid_delaunay(&tri);
    }

    #[test]
    fn grid_formation_is_deterministic_despite_ties() {
        let mut points = Vec::new();
        for r in 0..4 {
            for c in 0..4 {
                points.push(Point2::new(c as f64, r as f64));
            }
        }
        let tri = delaunay(&points).unwrap();
        assert_valid_delaunay(&tri);
        let again = delaunay(&points).unwrap();
        assert_eq!(tri.triangles(), again.triangles());
        // Every unit cell keeps the lexicographically smaller diagonal.
        for r in 0..3usize {
            for c in 0..3usize {
                let corner = r * 4 + c;
                assert!(tri.edges().contains(&(corner, corner + 5)));
            }
        }
    }

    #[test]
    fn collinear_prefix_is_handled() {
        // First three inputs sit on a line; the triangulation must still
        // cover all of them once an off-line point arrives.
        let tri = delaunay(&pts(&[
            (0.0, 0.0),
            (2.0, 0.0),
            (4.0, 0.0),
            (6.0, 0.0),
            (3.0, 1.0),
        ]))
        .unwrap();
        assert_valid_delaunay(&tri);
        assert_eq!(tri.vertex_count(), 5);
    }

    #[test]
    fn position_file_round_trip() {
        let text = "# agents\n0 0.0 0.0\n1, 2.5, 0.0\n2\t1.0\t3.0\n";
        let (ids, points) = read_positions(text.as_bytes()).unwrap();
        assert_eq!(ids, vec![0, 1, 2]);
        assert_eq!(points[1], Point2::new(2.5, 0.0));

        let err = read_positions("0 1.0\n".as_bytes()).unwrap_err();
        assert!(matches!(err, GeometryError::Parse { line: 1, .. }));
        let err = read_positions("0 0 0\n0 1 1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, GeometryError::Parse { line: 2, .. }));
    }
}
