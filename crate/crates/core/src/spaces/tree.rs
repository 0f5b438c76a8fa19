//! Finite metric trees.
//!
//! A point is `[edge index, offset from the edge's first endpoint]`. Vertex
//! points are stored on their lowest-indexed incident edge so that each
//! vertex has exactly one representation.

use std::collections::HashMap;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::metric::{
    GeodesicPath, MetricSpace, PathShape, Point, SpaceDescriptor, SpaceTag, TreeEdge,
    MEMBERSHIP_TOL,
};

#[derive(Clone, Copy, Debug)]
pub(crate) struct TreeLeg {
    edge: usize,
    from: f64,
    to: f64,
}

impl TreeLeg {
    fn length(&self) -> f64 {
        (self.to - self.from).abs()
    }
}

#[derive(Debug)]
pub(crate) struct TreeTopology {
    ids: Vec<String>,
    /// `(u, v, length)`, offsets measured from `u`.
    edges: Vec<(usize, usize, f64)>,
    /// Incident edge indices per vertex, ascending.
    incident: Vec<Vec<usize>>,
    dist: Vec<Vec<f64>>,
    /// `toward[root][x]`: first hop `(edge, vertex)` from `x` in the direction of `root`.
    toward: Vec<Vec<Option<(usize, usize)>>>,
    cumulative: Vec<f64>,
    total: f64,
}

impl TreeTopology {
    fn build(edge_list: &[TreeEdge]) -> Result<Self> {
        if edge_list.is_empty() {
            return Err(Error::InvalidSpace("tree needs at least one edge".into()));
        }
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut ids = Vec::new();
        let mut edges = Vec::with_capacity(edge_list.len());
        for (i, TreeEdge(u, v, len)) in edge_list.iter().enumerate() {
            if !(len.is_finite() && *len > 0.0) {
                return Err(Error::InvalidSpace(format!(
                    "edge {i} ({u} {v}) has nonpositive length {len}"
                )));
            }
            if u == v {
                return Err(Error::InvalidSpace(format!("edge {i} is a self-loop at {u}")));
            }
            let mut id_of = |name: &str| {
                *index.entry(name.to_owned()).or_insert_with(|| {
                    ids.push(name.to_owned());
                    ids.len() - 1
                })
            };
            let (a, b) = (id_of(u.as_str()), id_of(v.as_str()));
            edges.push((a, b, *len));
        }

        let n = ids.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (i, &(a, b, _)) in edges.iter().enumerate() {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra == rb {
                let TreeEdge(u, v, _) = &edge_list[i];
                return Err(Error::InvalidSpace(format!(
                    "edge list contains a cycle (closed by edge {i}: {u} {v})"
                )));
            }
            parent[ra] = rb;
        }
        if edges.len() + 1 != n {
            return Err(Error::InvalidSpace("edge list is disconnected".into()));
        }

        let mut incident = vec![Vec::new(); n];
        for (i, &(a, b, _)) in edges.iter().enumerate() {
            incident[a].push(i);
            incident[b].push(i);
        }

        let mut dist = vec![vec![0.0; n]; n];
        let mut toward = vec![vec![None; n]; n];
        for root in 0..n {
            let mut stack = vec![root];
            let mut seen = vec![false; n];
            seen[root] = true;
            while let Some(x) = stack.pop() {
                for &e in &incident[x] {
                    let (a, b, len) = edges[e];
                    let y = if a == x { b } else { a };
                    if !seen[y] {
                        seen[y] = true;
                        dist[root][y] = dist[root][x] + len;
                        toward[root][y] = Some((e, x));
                        stack.push(y);
                    }
                }
            }
        }
        // Path sums accumulate in different orders from each end; mirror the
        // upper triangle so the metric is exactly symmetric.
        for i in 1..n {
            let (upper, lower) = dist.split_at_mut(i);
            for (j, row) in upper.iter().enumerate() {
                lower[0][j] = row[i];
            }
        }

        let mut cumulative = Vec::with_capacity(edges.len());
        let mut total = 0.0;
        for &(_, _, len) in &edges {
            cumulative.push(total);
            total += len;
        }

        Ok(TreeTopology { ids, edges, incident, dist, toward, cumulative, total })
    }

    fn vertex_coords(&self, w: usize) -> Vec<f64> {
        let e = self.incident[w][0];
        let (a, _, len) = self.edges[e];
        vec![e as f64, if a == w { 0.0 } else { len }]
    }

    fn canonical(&self, edge: usize, offset: f64) -> Vec<f64> {
        let (a, b, len) = self.edges[edge];
        if offset <= 0.0 {
            self.vertex_coords(a)
        } else if offset >= len {
            self.vertex_coords(b)
        } else {
            vec![edge as f64, offset]
        }
    }

    fn split(coords: &[f64]) -> (usize, f64) {
        (coords[0] as usize, coords[1])
    }

    /// Vertices through which a point reaches the rest of the tree, with the
    /// distance to each.
    fn anchors(&self, coords: &[f64]) -> ([(usize, f64); 2], usize) {
        let (e, o) = Self::split(coords);
        let (a, b, len) = self.edges[e];
        if o == 0.0 {
            ([(a, 0.0), (a, 0.0)], 1)
        } else if o == len {
            ([(b, 0.0), (b, 0.0)], 1)
        } else {
            ([(a, o), (b, len - o)], 2)
        }
    }

    fn offset_of(&self, edge: usize, vertex: usize) -> f64 {
        let (a, _, len) = self.edges[edge];
        if a == vertex {
            0.0
        } else {
            len
        }
    }

    fn distance(&self, p: &[f64], q: &[f64]) -> f64 {
        let (ep, op) = Self::split(p);
        let (eq, oq) = Self::split(q);
        if ep == eq {
            return (op - oq).abs();
        }
        let (ap, np) = self.anchors(p);
        let (aq, nq) = self.anchors(q);
        let mut best = f64::INFINITY;
        for &(x, dx) in &ap[..np] {
            for &(y, dy) in &aq[..nq] {
                best = best.min(self.dist[x][y] + (dx + dy));
            }
        }
        best
    }

    fn legs(&self, p: &[f64], q: &[f64]) -> Vec<TreeLeg> {
        let (ep, op) = Self::split(p);
        let (eq, oq) = Self::split(q);
        if ep == eq {
            return vec![TreeLeg { edge: ep, from: op, to: oq }];
        }
        let (ap, np) = self.anchors(p);
        let (aq, nq) = self.anchors(q);
        let mut best = (f64::INFINITY, 0, 0);
        for &(x, dx) in &ap[..np] {
            for &(y, dy) in &aq[..nq] {
                let total = self.dist[x][y] + (dx + dy);
                if total < best.0 {
                    best = (total, x, y);
                }
            }
        }
        let (_, x, y) = best;
        let mut legs = vec![TreeLeg { edge: ep, from: op, to: self.offset_of(ep, x) }];
        let mut cur = x;
        while cur != y {
            let (e, next) = self.toward[y][cur].expect("tree is connected");
            legs.push(TreeLeg { edge: e, from: self.offset_of(e, cur), to: self.offset_of(e, next) });
            cur = next;
        }
        legs.push(TreeLeg { edge: eq, from: self.offset_of(eq, y), to: oq });
        legs.retain(|l| l.length() > 0.0);
        legs
    }

    pub(crate) fn walk_legs(&self, legs: &[TreeLeg], mut s: f64) -> Vec<f64> {
        for leg in legs {
            let len = leg.length();
            if s <= len {
                let (lo, hi) = if leg.from <= leg.to { (leg.from, leg.to) } else { (leg.to, leg.from) };
                let off = (leg.from + (leg.to - leg.from).signum() * s).clamp(lo, hi);
                return self.canonical(leg.edge, off);
            }
            s -= len;
        }
        let last = legs.last().expect("nondegenerate path has legs");
        self.canonical(last.edge, last.to)
    }

    /// All points at distance exactly `r` from the point, plus leaves that
    /// are closer than `r` in directions that end early.
    fn sphere(&self, coords: &[f64], r: f64) -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        let (e, o) = Self::split(coords);
        let (a, b, len) = self.edges[e];
        let (anchors, n) = self.anchors(coords);
        if n == 1 {
            self.explore(anchors[0].0, None, r, &mut out);
        } else {
            if o >= r {
                out.push(self.canonical(e, o - r));
            } else {
                self.explore(a, Some(e), r - o, &mut out);
            }
            if len - o >= r {
                out.push(self.canonical(e, o + r));
            } else {
                self.explore(b, Some(e), r - (len - o), &mut out);
            }
        }
        let mut unique: Vec<Vec<f64>> = Vec::with_capacity(out.len());
        for c in out {
            if !unique.contains(&c) {
                unique.push(c);
            }
        }
        unique
    }

    fn explore(&self, w: usize, came_by: Option<usize>, rem: f64, out: &mut Vec<Vec<f64>>) {
        let onward: Vec<usize> = self.incident[w].iter().copied().filter(|&f| Some(f) != came_by).collect();
        if onward.is_empty() || rem <= 0.0 {
            out.push(self.vertex_coords(w));
            return;
        }
        for f in onward {
            let (a, b, len) = self.edges[f];
            let other = if a == w { b } else { a };
            if len >= rem {
                let off = if a == w { rem } else { len - rem };
                out.push(self.canonical(f, off));
            } else {
                self.explore(other, Some(f), rem - len, out);
            }
        }
    }
}

/// A finite metric tree backend.
#[derive(Clone, Debug)]
pub struct MetricTree {
    topology: Arc<TreeTopology>,
    descriptor: SpaceDescriptor,
    tag: SpaceTag,
}

impl MetricTree {
    pub fn new(edges: Vec<TreeEdge>) -> Result<Self> {
        let topology = Arc::new(TreeTopology::build(&edges)?);
        let descriptor = SpaceDescriptor::Tree { edges };
        let tag = descriptor.tag();
        Ok(MetricTree { topology, descriptor, tag })
    }

    pub fn vertex_ids(&self) -> &[String] {
        &self.topology.ids
    }

    pub fn edge_count(&self) -> usize {
        self.topology.edges.len()
    }

    /// The vertex with the given id.
    pub fn vertex(&self, id: &str) -> Option<Point> {
        let w = self.topology.ids.iter().position(|x| x == id)?;
        Some(Point::new_unchecked(self.tag, self.topology.vertex_coords(w)))
    }

    /// The point at `offset` along edge `edge` measured from its first endpoint.
    pub fn on_edge(&self, edge: usize, offset: f64) -> Result<Point> {
        self.point(vec![edge as f64, offset])
    }

    /// The unique tree path between two points.
    pub fn tree_geodesic(&self, a: &Point, b: &Point) -> Result<GeodesicPath> {
        self.geodesic(a, b)
    }
}

impl MetricSpace for MetricTree {
    fn descriptor(&self) -> &SpaceDescriptor {
        &self.descriptor
    }

    fn tag(&self) -> SpaceTag {
        self.tag
    }

    fn admits(&self, coords: &[f64]) -> bool {
        if coords.len() != 2 || !coords.iter().all(|c| c.is_finite()) {
            return false;
        }
        let e = coords[0];
        if e < 0.0 || e.fract() != 0.0 || e as usize >= self.topology.edges.len() {
            return false;
        }
        let len = self.topology.edges[e as usize].2;
        (-MEMBERSHIP_TOL..=len + MEMBERSHIP_TOL).contains(&coords[1])
    }

    fn canonicalize(&self, coords: Vec<f64>) -> Vec<f64> {
        self.topology.canonical(coords[0] as usize, coords[1])
    }

    fn raw_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        self.topology.distance(a, b)
    }

    fn raw_geodesic(&self, a: &Point, b: &Point) -> GeodesicPath {
        let length = self.topology.distance(a.coords(), b.coords());
        let legs = if length == 0.0 { Vec::new() } else { self.topology.legs(a.coords(), b.coords()) };
        GeodesicPath::new(
            a.clone(),
            b.clone(),
            length,
            PathShape::Tree { legs, topology: Arc::clone(&self.topology) },
        )
    }

    fn diameter_bound(&self) -> Option<f64> {
        Some(self.topology.dist.iter().flatten().copied().fold(0.0, f64::max))
    }

    fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let t = &self.topology;
        let u = rng.gen_range(0.0..t.total);
        let e = t.cumulative.partition_point(|&c| c <= u).saturating_sub(1);
        let offset = (u - t.cumulative[e]).clamp(0.0, t.edges[e].2);
        Point::new_unchecked(self.tag, t.canonical(e, offset))
    }

    fn step_candidates<R: Rng + ?Sized>(
        &self,
        from: &Point,
        step: f64,
        _k: usize,
        _rng: &mut R,
    ) -> Vec<Point> {
        self.topology
            .sphere(from.coords(), step)
            .into_iter()
            .map(|c| Point::new_unchecked(self.tag, c))
            .collect()
    }

    fn flee_target(&self, lion: &Point, man: &Point, step: f64) -> Point {
        let mut best = man.clone();
        let mut best_d = self.raw_distance(lion.coords(), man.coords());
        for c in self.topology.sphere(man.coords(), step) {
            let d = self.raw_distance(lion.coords(), &c);
            if d > best_d {
                best_d = d;
                best = Point::new_unchecked(self.tag, c);
            }
        }
        best
    }

    fn grid(&self, resolution: usize) -> Vec<Point> {
        let t = &self.topology;
        let n = resolution.max(1);
        let mut out: Vec<Point> =
            (0..t.ids.len()).map(|w| Point::new_unchecked(self.tag, t.vertex_coords(w))).collect();
        for (e, &(_, _, len)) in t.edges.iter().enumerate() {
            for k in 1..n {
                out.push(Point::new_unchecked(self.tag, vec![e as f64, len * k as f64 / n as f64]));
            }
        }
        out
    }

    fn runner_route(&self) -> Vec<Point> {
        // Depth-first tour from the first vertex, returning along each branch.
        let t = &self.topology;
        let mut tour = Vec::new();
        fn visit(t: &TreeTopology, w: usize, from: Option<usize>, tour: &mut Vec<usize>) {
            tour.push(w);
            for &e in &t.incident[w] {
                let (a, b, _) = t.edges[e];
                let y = if a == w { b } else { a };
                if Some(y) != from {
                    visit(t, y, Some(w), tour);
                    tour.push(w);
                }
            }
        }
        visit(t, 0, None, &mut tour);
        tour.into_iter().map(|w| Point::new_unchecked(self.tag, t.vertex_coords(w))).collect()
    }
}

/// Parse a plain-text edge list: one `u v length` triple per line. Blank
/// lines and lines starting with `#` are skipped.
pub fn parse_edge_list(text: &str) -> Result<Vec<TreeEdge>> {
    let mut edges = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [u, v, len] = fields[..] else {
            return Err(Error::InvalidSpace(format!(
                "line {}: expected `u v length`, got {} fields",
                lineno + 1,
                fields.len()
            )));
        };
        let len: f64 = len.parse().map_err(|_| {
            Error::InvalidSpace(format!("line {}: length {len:?} is not a number", lineno + 1))
        })?;
        edges.push(TreeEdge(u.to_owned(), v.to_owned(), len));
    }
    Ok(edges)
}
