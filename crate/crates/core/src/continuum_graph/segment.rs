//! Metric graphs built from line segments of positive real length.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use rand::Rng;

use crate::error::{Error, Result};

pub type NodeId = usize;
pub type SegmentId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    /// A labelled leaf (label 0 is the root leaf of a line-breaking tree).
    Leaf(u32),
    /// A kernel vertex of a continuum graph.
    Kernel,
    /// A point created by splitting a segment (attachment or branch point).
    Branch,
    /// A vertex of a discretized excursion tree.
    Grid,
}

impl NodeKind {
    fn tag(&self) -> String {
        match self {
            NodeKind::Leaf(l) => format!("leaf:{l}"),
            NodeKind::Kernel => "kernel".into(),
            NodeKind::Branch => "branch".into(),
            NodeKind::Grid => "grid".into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub a: NodeId,
    pub b: NodeId,
    pub len: f64,
}

/// A point of the metric graph: `offset` along segment `segment`, measured
/// from its `a` end.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointRef {
    pub segment: SegmentId,
    pub offset: f64,
}

#[derive(Clone, Debug, Default)]
pub struct SegmentGraph {
    kinds: Vec<NodeKind>,
    /// Nodes absorbed by an identification point at their representative.
    merged_into: Vec<Option<NodeId>>,
    segments: Vec<Segment>,
    adj: Vec<Vec<SegmentId>>,
}

#[derive(Clone, Copy, PartialEq)]
struct HeapItem(f64, NodeId);

impl Eq for HeapItem {}
impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl SegmentGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, kind: NodeKind) -> NodeId {
        self.kinds.push(kind);
        self.merged_into.push(None);
        self.adj.push(Vec::new());
        self.kinds.len() - 1
    }

    /// Adds a segment; lengths must be positive and finite. Loops (a == b)
    /// are allowed.
    pub fn add_segment(&mut self, a: NodeId, b: NodeId, len: f64) -> Result<SegmentId> {
        if !(len > 0.0) || !len.is_finite() {
            return Err(Error::invalid(format!("segment length {len} must be positive")));
        }
        let (a, b) = (self.find(a), self.find(b));
        let id = self.segments.len();
        self.segments.push(Segment { a, b, len });
        self.adj[a].push(id);
        if a != b {
            self.adj[b].push(id);
        }
        Ok(id)
    }

    fn find(&self, mut v: NodeId) -> NodeId {
        while let Some(r) = self.merged_into[v] {
            v = r;
        }
        v
    }

    pub fn kind(&self, v: NodeId) -> NodeKind {
        self.kinds[v]
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn segment(&self, id: SegmentId) -> Segment {
        self.segments[id]
    }

    /// Number of live nodes (after identifications).
    pub fn node_count(&self) -> usize {
        self.merged_into.iter().filter(|m| m.is_none()).count()
    }

    pub fn node_capacity(&self) -> usize {
        self.kinds.len()
    }

    pub fn segment_count(&self) -> usize {
        self.segments.len()
    }

    pub fn total_length(&self) -> f64 {
        self.segments.iter().map(|s| s.len).sum()
    }

    /// Degree of a node, loops counting twice.
    pub fn degree(&self, v: NodeId) -> usize {
        let v = self.find(v);
        self.adj[v]
            .iter()
            .map(|&s| if self.segments[s].a == self.segments[s].b { 2 } else { 1 })
            .sum()
    }

    /// Inserts a node at `offset` along `seg`, splitting it in two. Returns
    /// an existing endpoint when the offset is at (or numerically beyond)
    /// an end.
    pub fn split_segment(&mut self, seg: SegmentId, offset: f64, kind: NodeKind) -> NodeId {
        let s = self.segments[seg];
        if offset <= 0.0 {
            return s.a;
        }
        if offset >= s.len {
            return s.b;
        }
        let m = self.add_node(kind);
        self.segments[seg] = Segment { a: s.a, b: m, len: offset };
        self.adj[m].push(seg);
        let id = self.segments.len();
        self.segments.push(Segment { a: m, b: s.b, len: s.len - offset });
        self.adj[m].push(id);
        let list = &mut self.adj[s.b];
        if s.a == s.b {
            // loop: `a` keeps seg, and gains the new half
            list.push(id);
        } else if let Some(slot) = list.iter_mut().find(|x| **x == seg) {
            *slot = id;
        }
        m
    }

    /// Point at `node` expressed as a [`PointRef`].
    pub fn node_point(&self, node: NodeId) -> PointRef {
        let node = self.find(node);
        let &seg = self.adj[node].first().expect("node has an incident segment");
        let s = self.segments[seg];
        PointRef {
            segment: seg,
            offset: if s.a == node { 0.0 } else { s.len },
        }
    }

    /// Materializes a point as a node (splitting its segment if needed).
    pub fn node_at(&mut self, p: PointRef, kind: NodeKind) -> NodeId {
        self.split_segment(p.segment, p.offset, kind)
    }

    /// Glues node `b` onto node `a` (a zero-length identification).
    pub fn identify(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return a;
        }
        let moved = std::mem::take(&mut self.adj[b]);
        for &s in &moved {
            let seg = &mut self.segments[s];
            let touches_a = seg.a == a || seg.b == a;
            if seg.a == b {
                seg.a = a;
            }
            if seg.b == b {
                seg.b = a;
            }
            if !touches_a {
                self.adj[a].push(s);
            }
        }
        self.merged_into[b] = Some(a);
        a
    }

    /// Uniform point with respect to the length measure.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> PointRef {
        LengthSampler::new(self).sample(rng)
    }

    /// Connected components among live nodes.
    pub fn component_count(&self) -> usize {
        let n = self.kinds.len();
        let mut seen = vec![false; n];
        let mut count = 0;
        for v in 0..n {
            if self.merged_into[v].is_some() || seen[v] {
                continue;
            }
            count += 1;
            let mut stack = vec![v];
            seen[v] = true;
            while let Some(u) = stack.pop() {
                for &s in &self.adj[u] {
                    let seg = self.segments[s];
                    for w in [seg.a, seg.b] {
                        if !seen[w] {
                            seen[w] = true;
                            stack.push(w);
                        }
                    }
                }
            }
        }
        count
    }

    /// First Betti number E − V + C.
    pub fn betti_number(&self) -> usize {
        self.segments.len() + self.component_count() - self.node_count()
    }

    /// Shortest-path distances from `source` to every node (merged nodes
    /// report the distance of their representative).
    pub fn distances_from(&self, source: NodeId) -> Vec<f64> {
        let n = self.kinds.len();
        let mut dist = vec![f64::INFINITY; n];
        let source = self.find(source);
        dist[source] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push(HeapItem(0.0, source));
        while let Some(HeapItem(d, u)) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &s in &self.adj[u] {
                let seg = self.segments[s];
                let w = if seg.a == u { seg.b } else { seg.a };
                let nd = d + seg.len;
                if nd < dist[w] {
                    dist[w] = nd;
                    heap.push(HeapItem(nd, w));
                }
            }
        }
        for v in 0..n {
            let r = self.find(v);
            if r != v {
                dist[v] = dist[r];
            }
        }
        dist
    }

    /// Exact distance between two points.
    pub fn distance(&self, p: PointRef, q: PointRef) -> f64 {
        let sp = self.segments[p.segment];
        let from_a = self.distances_from(sp.a);
        let from_b = self.distances_from(sp.b);
        self.distance_with(p, &from_a, &from_b, q)
    }

    /// Distance from `p` to `q` given the distance tables from the two
    /// endpoints of `p`'s segment.
    fn distance_with(&self, p: PointRef, from_a: &[f64], from_b: &[f64], q: PointRef) -> f64 {
        let sp = self.segments[p.segment];
        let sq = self.segments[q.segment];
        let p_to = |node: NodeId| -> f64 {
            (p.offset + from_a[node]).min(sp.len - p.offset + from_b[node])
        };
        let mut best = (p_to(sq.a) + q.offset).min(p_to(sq.b) + sq.len - q.offset);
        if p.segment == q.segment {
            best = best.min((p.offset - q.offset).abs());
        }
        best
    }

    /// Pairwise distances between `points`.
    pub fn distance_matrix(&self, points: &[PointRef]) -> Vec<Vec<f64>> {
        let k = points.len();
        let mut m = vec![vec![0.0; k]; k];
        for i in 0..k {
            let sp = self.segments[points[i].segment];
            let from_a = self.distances_from(sp.a);
            let from_b = self.distances_from(sp.b);
            for j in i + 1..k {
                let d = self.distance_with(points[i], &from_a, &from_b, points[j]);
                m[i][j] = d;
                m[j][i] = d;
            }
        }
        m
    }

    /// Weighted edge list `u v length` followed by `node id kind` rows.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for seg in &self.segments {
            writeln!(s, "{} {} {}", seg.a, seg.b, seg.len).unwrap();
        }
        for (v, k) in self.kinds.iter().enumerate() {
            if self.merged_into[v].is_none() {
                writeln!(s, "node {v} {}", k.tag()).unwrap();
            }
        }
        s
    }
}

/// Prefix sums of segment lengths for repeated length-uniform sampling.
pub struct LengthSampler {
    cumulative: Vec<f64>,
}

impl LengthSampler {
    pub fn new(g: &SegmentGraph) -> Self {
        let mut acc = 0.0;
        let cumulative = g
            .segments
            .iter()
            .map(|s| {
                acc += s.len;
                acc
            })
            .collect();
        LengthSampler { cumulative }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> PointRef {
        let total = *self.cumulative.last().expect("graph has segments");
        let u = rng.random::<f64>() * total;
        let seg = self.cumulative.partition_point(|&c| c <= u).min(self.cumulative.len() - 1);
        let start = if seg == 0 { 0.0 } else { self.cumulative[seg - 1] };
        let len = self.cumulative[seg] - start;
        PointRef {
            segment: seg,
            offset: (u - start).clamp(0.0, len),
        }
    }
}

/// Exact distance between two points of `g`.
pub fn segment_distance(g: &SegmentGraph, a: PointRef, b: PointRef) -> f64 {
    g.distance(a, b)
}

/// Length-uniform random point of `g`.
pub fn sample_point<R: Rng + ?Sized>(g: &SegmentGraph, rng: &mut R) -> PointRef {
    g.sample_point(rng)
}
