//! Multigraphs, surplus, core/kernel decomposition, the depth-first tree
//! with its marked queue code, and small-n enumeration oracles.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::path_codes::{dfq_of, tree_from_dfq, DiscreteExcursion, Flavor};
use crate::tree_core::{parse_u32s, LabelledRootedTree};

/// Largest vertex count accepted by the exhaustive enumerators.
pub const ENUMERATION_LIMIT: usize = 8;

/// A labelled multigraph. Vertices are indices `0..n`, vertex `i` carries
/// `labels[i]`; edges are keyed `(u, v)` with `u <= v` and map to their
/// multiplicity. Loops contribute 2 to the degree.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct MultiGraph {
    labels: Vec<u32>,
    edges: BTreeMap<(u32, u32), u32>,
}

impl MultiGraph {
    /// `n` vertices labelled `1..=n`, no edges.
    pub fn new(n: usize) -> Self {
        MultiGraph {
            labels: (1..=n as u32).collect(),
            edges: BTreeMap::new(),
        }
    }

    pub fn with_labels(labels: Vec<u32>) -> Result<Self> {
        let distinct: HashSet<_> = labels.iter().collect();
        if distinct.len() != labels.len() {
            return Err(Error::invalid("vertex labels must be distinct"));
        }
        Ok(MultiGraph {
            labels,
            edges: BTreeMap::new(),
        })
    }

    /// The empty graph (no vertices).
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn index_of(&self, label: u32) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    /// Adds `m` copies of the edge between vertex indices `u` and `v`.
    pub fn add_edge(&mut self, u: usize, v: usize, m: u32) -> Result<()> {
        if u >= self.n() || v >= self.n() {
            return Err(Error::invalid(format!("edge ({u}, {v}) outside 0..{}", self.n())));
        }
        if m == 0 {
            return Err(Error::invalid("multiplicity must be at least 1"));
        }
        let key = (u.min(v) as u32, u.max(v) as u32);
        *self.edges.entry(key).or_insert(0) += m;
        Ok(())
    }

    /// Distinct edges with multiplicities, as vertex indices.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        self.edges.iter().map(|(&(u, v), &m)| (u as usize, v as usize, m))
    }

    pub fn mult(&self, u: usize, v: usize) -> u32 {
        let key = (u.min(v) as u32, u.max(v) as u32);
        self.edges.get(&key).copied().unwrap_or(0)
    }

    /// Number of edges counted with multiplicity.
    pub fn edge_count(&self) -> usize {
        self.edges.values().map(|&m| m as usize).sum()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0usize; self.n()];
        for (u, v, m) in self.edges() {
            d[u] += m as usize;
            d[v] += m as usize;
        }
        d
    }

    pub fn loop_count(&self) -> usize {
        self.edges().filter(|e| e.0 == e.1).map(|e| e.2 as usize).sum()
    }

    pub fn is_simple(&self) -> bool {
        self.edges().all(|(u, v, m)| u != v && m == 1)
    }

    pub fn is_connected(&self) -> bool {
        if self.n() == 0 {
            return true;
        }
        let mut dsu = Dsu::new(self.n());
        for (u, v, _) in self.edges() {
            dsu.union(u, v);
        }
        dsu.components == 1
    }

    /// s(G) = 1 + |E| − |V|; the empty graph has surplus 0.
    pub fn surplus(&self) -> Result<i64> {
        if self.n() == 0 {
            return Ok(0);
        }
        if !self.is_connected() {
            return Err(Error::invalid("surplus is defined for connected graphs only"));
        }
        Ok(1 + self.edge_count() as i64 - self.n() as i64)
    }

    /// Text form: a first line with `n` followed by the labels, then one
    /// `u v m` row per distinct edge (labels, loops as `u u m`).
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        write!(s, "{}", self.n()).unwrap();
        for l in &self.labels {
            write!(s, " {l}").unwrap();
        }
        s.push('\n');
        for (u, v, m) in self.edges() {
            writeln!(s, "{} {} {m}", self.labels[u], self.labels[v]).unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let head = parse_u32s(lines.next().ok_or_else(|| Error::invalid("empty multigraph text"))?)?;
        let n = head[0] as usize;
        let labels = if head.len() == 1 {
            (1..=n as u32).collect()
        } else if head.len() == n + 1 {
            head[1..].to_vec()
        } else {
            return Err(Error::invalid("header must be `n` or `n l_1 … l_n`"));
        };
        let mut g = MultiGraph::with_labels(labels)?;
        for line in lines {
            let row = parse_u32s(line)?;
            let &[a, b, m] = row.as_slice() else {
                return Err(Error::invalid(format!("expected `u v m`, got `{line}`")));
            };
            let u = g.index_of(a).ok_or_else(|| Error::invalid(format!("unknown label {a}")))?;
            let v = g.index_of(b).ok_or_else(|| Error::invalid(format!("unknown label {b}")))?;
            g.add_edge(u, v, m)?;
        }
        Ok(g)
    }
}

struct Dsu {
    parent: Vec<usize>,
    components: usize,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu {
            parent: (0..n).collect(),
            components: n,
        }
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        self.parent[a.max(b)] = a.min(b);
        self.components -= 1;
        true
    }
}

/// A connected simple graph on labels `1..=n`, stored as sorted adjacency
/// lists of 0-based vertices (vertex `v` has label `v + 1`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ConnectedGraph {
    adj: Vec<Vec<u32>>,
}

impl ConnectedGraph {
    /// Edges given as label pairs in `1..=n`.
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("graph needs at least one vertex"));
        }
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a == 0 || b == 0 || a as usize > n || b as usize > n {
                return Err(Error::invalid(format!("edge {a}-{b} outside 1..={n}")));
            }
            if a == b {
                return Err(Error::invalid(format!("loop at {a}")));
            }
            adj[a as usize - 1].push(b - 1);
            adj[b as usize - 1].push(a - 1);
        }
        for list in adj.iter_mut() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::invalid("multiple edge in a simple graph"));
            }
        }
        let g = ConnectedGraph { adj };
        if !g.check_connected() {
            return Err(Error::invalid("graph is not connected"));
        }
        Ok(g)
    }

    pub fn from_multigraph(g: &MultiGraph) -> Result<Self> {
        if !g.is_simple() {
            return Err(Error::invalid("graph is not simple"));
        }
        let mut sorted = g.labels().to_vec();
        sorted.sort_unstable();
        if sorted.iter().enumerate().any(|(i, &l)| l as usize != i + 1) {
            return Err(Error::invalid("labels must be exactly 1..=n"));
        }
        let edges: Vec<(u32, u32)> = g.edges().map(|(u, v, _)| (g.labels()[u], g.labels()[v])).collect();
        Self::from_edges(g.n(), &edges)
    }

    fn check_connected(&self) -> bool {
        let mut seen = vec![false; self.n()];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in &self.adj[v] {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    count += 1;
                    stack.push(w as usize);
                }
            }
        }
        count == self.n()
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    /// Neighbours of 0-based vertex `v`, increasing.
    pub fn neighbours(&self, v: usize) -> &[u32] {
        &self.adj[v]
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn surplus(&self) -> usize {
        1 + self.edge_count() - self.n()
    }

    /// Label pairs `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (v, list) in self.adj.iter().enumerate() {
            for &w in list {
                if (v as u32) < w {
                    out.push((v as u32 + 1, w + 1));
                }
            }
        }
        out
    }

    pub fn to_multigraph(&self) -> MultiGraph {
        let mut g = MultiGraph::new(self.n());
        for (a, b) in self.edges() {
            g.add_edge(a as usize - 1, b as usize - 1, 1).expect("in range");
        }
        g
    }

    /// Breadth-first graph distances from 0-based `source`.
    pub fn bfs_distances(&self, source: usize) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.n()];
        let mut queue = std::collections::VecDeque::new();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(v) = queue.pop_front() {
            for &w in &self.adj[v] {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = dist[v] + 1;
                    queue.push_back(w as usize);
                }
            }
        }
        dist
    }
}

/// Labels of the vertices surviving repeated deletion of degree-≤1
/// vertices, increasing.
fn core_vertices(g: &ConnectedGraph) -> Vec<u32> {
    let n = g.n();
    let mut deg: Vec<usize> = (0..n).map(|v| g.adj[v].len()).collect();
    let mut alive = vec![true; n];
    let mut queue: Vec<usize> = (0..n).filter(|&v| deg[v] <= 1).collect();
    while let Some(v) = queue.pop() {
        if !alive[v] {
            continue;
        }
        alive[v] = false;
        for &w in &g.adj[v] {
            let w = w as usize;
            if alive[w] {
                deg[w] -= 1;
                if deg[w] == 1 {
                    queue.push(w);
                }
            }
        }
    }
    (0..n).filter(|&v| alive[v]).map(|v| v as u32 + 1).collect()
}

/// The maximal induced subgraph of minimum degree 2 (empty for trees).
pub fn core(g: &ConnectedGraph) -> MultiGraph {
    let verts = core_vertices(g);
    induced(g, &verts)
}

fn induced(g: &ConnectedGraph, labels: &[u32]) -> MultiGraph {
    let mut index = vec![u32::MAX; g.n()];
    for (i, &l) in labels.iter().enumerate() {
        index[l as usize - 1] = i as u32;
    }
    let mut h = MultiGraph::with_labels(labels.to_vec()).expect("distinct");
    for &l in labels {
        let v = l as usize - 1;
        for &w in &g.adj[v] {
            if (v as u32) < w && index[w as usize] != u32::MAX {
                h.add_edge(index[v] as usize, index[w as usize] as usize, 1).expect("in range");
            }
        }
    }
    h
}

/// Kernel of a connected graph together with the contracted core paths.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Kernel {
    /// Multigraph on the core vertices of degree ≥ 3 (empty when s ≤ 1).
    pub graph: MultiGraph,
    /// One label path per kernel edge, endpoints included.
    pub paths: Vec<Vec<u32>>,
    /// The core cycle (first vertex repeated at the end) when s = 1.
    pub cycle: Option<Vec<u32>>,
}

impl Kernel {
    /// Kernel edge lengths: number of core edges on each contracted path.
    pub fn path_lengths(&self) -> Vec<usize> {
        self.paths.iter().map(|p| p.len() - 1).collect()
    }

    /// Sidecar rows `u v len`, one per kernel edge.
    pub fn sidecar_text(&self) -> String {
        let mut s = String::new();
        for p in &self.paths {
            writeln!(s, "{} {} {}", p[0], p[p.len() - 1], p.len() - 1).unwrap();
        }
        if let Some(c) = &self.cycle {
            writeln!(s, "{} {} {}", c[0], c[0], c.len() - 1).unwrap();
        }
        s
    }

    /// Subdivides every kernel edge back into its recorded path.
    pub fn reconstruct_core(&self) -> MultiGraph {
        let all: Vec<&Vec<u32>> = self.paths.iter().chain(self.cycle.iter()).collect();
        let labels: BTreeSet<u32> = all.iter().flat_map(|p| p.iter().copied()).collect();
        let labels: Vec<u32> = labels.into_iter().collect();
        let mut g = MultiGraph::with_labels(labels.clone()).expect("distinct");
        let idx = |l: u32| labels.binary_search(&l).expect("present");
        for p in all {
            for w in p.windows(2) {
                g.add_edge(idx(w[0]), idx(w[1]), 1).expect("in range");
            }
        }
        g
    }
}

/// Contracts maximal paths of degree-2 core vertices into single edges.
pub fn kernel(g: &ConnectedGraph) -> Kernel {
    let verts = core_vertices(g);
    if verts.is_empty() {
        return Kernel {
            graph: MultiGraph::empty(),
            paths: Vec::new(),
            cycle: None,
        };
    }
    let n = g.n();
    let mut in_core = vec![false; n];
    for &l in &verts {
        in_core[l as usize - 1] = true;
    }
    let core_nbrs = |v: usize| g.adj[v].iter().map(|&w| w as usize).filter(|&w| in_core[w]);
    let core_deg: Vec<usize> = (0..n).map(|v| if in_core[v] { core_nbrs(v).count() } else { 0 }).collect();
    let branch: Vec<u32> = verts.iter().copied().filter(|&l| core_deg[l as usize - 1] >= 3).collect();

    if branch.is_empty() {
        // the core is a single cycle
        let start = verts[0] as usize - 1;
        let mut cycle = vec![start as u32 + 1];
        let (mut prev, mut cur) = (start, core_nbrs(start).next().expect("cycle vertex"));
        while cur != start {
            cycle.push(cur as u32 + 1);
            let next = core_nbrs(cur).find(|&w| w != prev).expect("degree 2");
            prev = cur;
            cur = next;
        }
        cycle.push(start as u32 + 1);
        return Kernel {
            graph: MultiGraph::empty(),
            paths: Vec::new(),
            cycle: Some(cycle),
        };
    }

    let mut used: HashSet<(u32, u32)> = HashSet::new();
    let key = |a: usize, b: usize| (a.min(b) as u32, a.max(b) as u32);
    let mut paths = Vec::new();
    for &l in &branch {
        let v = l as usize - 1;
        for first in core_nbrs(v) {
            if used.contains(&key(v, first)) {
                continue;
            }
            used.insert(key(v, first));
            let mut path = vec![v as u32 + 1];
            let (mut prev, mut cur) = (v, first);
            while core_deg[cur] == 2 {
                path.push(cur as u32 + 1);
                let next = core_nbrs(cur).find(|&w| w != prev).expect("degree 2");
                used.insert(key(cur, next));
                prev = cur;
                cur = next;
            }
            path.push(cur as u32 + 1);
            paths.push(path);
        }
    }
    let mut kg = MultiGraph::with_labels(branch.clone()).expect("distinct");
    let idx = |l: u32| branch.binary_search(&l).expect("branch vertex");
    for p in &paths {
        kg.add_edge(idx(p[0]), idx(p[p.len() - 1]), 1).expect("in range");
    }
    Kernel {
        graph: kg,
        paths,
        cycle: None,
    }
}

/// Depth-first tree rooted at label 1, with children ordered by increasing
/// label, plus the surplus edges `(explored, on-stack)` it ignores.
pub fn depth_first_tree(g: &ConnectedGraph) -> (LabelledRootedTree, Vec<(u32, u32)>) {
    let (tree, marks, order) = explore(g);
    let mut surplus = Vec::with_capacity(marks.len());
    let dfq = dfq_of(tree.tree());
    // replay the stack to translate marks into label pairs
    let _ = replay(&tree, &dfq, &order, &marks, |a, b| surplus.push((a, b)));
    (tree, surplus)
}

fn explore(g: &ConnectedGraph) -> (LabelledRootedTree, BTreeSet<(u32, u32)>, Vec<u32>) {
    let n = g.n();
    let mut parent: Vec<Option<u32>> = vec![None; n];
    // 0 = untouched, 1 = on stack, 2 = explored
    let mut state = vec![0u8; n];
    let mut pos_in_stack = vec![0u32; n];
    let mut stack: Vec<usize> = vec![0];
    state[0] = 1;
    let mut marks = BTreeSet::new();
    let mut order = Vec::with_capacity(n);
    let mut step = 0u32;
    while let Some(&v) = stack.last() {
        for &w in &g.adj[v] {
            if state[w as usize] == 1 && w as usize != v {
                marks.insert((step, pos_in_stack[w as usize] + 1));
            }
        }
        stack.pop();
        state[v] = 2;
        order.push(v as u32 + 1);
        for &w in g.adj[v].iter().rev() {
            let w = w as usize;
            if state[w] == 0 {
                state[w] = 1;
                parent[w] = Some(v as u32 + 1);
                pos_in_stack[w] = stack.len() as u32;
                stack.push(w);
            }
        }
        step += 1;
    }
    let tree = LabelledRootedTree::from_parent_labels(&parent).expect("spanning tree");
    (tree, marks, order)
}

/// Replays the stack of `tree` (whose depth-first order is `order`) and
/// reports each mark as a label pair.
fn replay(
    tree: &LabelledRootedTree,
    q: &DiscreteExcursion,
    order: &[u32],
    marks: &BTreeSet<(u32, u32)>,
    mut emit: impl FnMut(u32, u32),
) -> Result<()> {
    let t = tree.tree();
    let mut stack = vec![t.root()];
    let mut step = 0u32;
    let mut it = marks.iter().peekable();
    while let Some(&v) = stack.last() {
        let qi = q.values()[step as usize];
        debug_assert_eq!(qi as usize, stack.len());
        debug_assert_eq!(order[step as usize] as usize, v + 1);
        while let Some(&&(i, j)) = it.peek() {
            if i != step {
                break;
            }
            if j == 0 || j as i64 >= qi {
                return Err(Error::invalid(format!("mark ({i}, {j}) outside the slot set")));
            }
            emit(v as u32 + 1, stack[j as usize - 1] as u32 + 1);
            it.next();
        }
        stack.pop();
        let kids: Vec<usize> = t.children(v).collect();
        stack.extend(kids.into_iter().rev());
        step += 1;
    }
    if let Some(&(i, j)) = it.next() {
        return Err(Error::invalid(format!("mark ({i}, {j}) beyond the last step")));
    }
    Ok(())
}

/// A depth-first queue path, its vertex labels in exploration order, and
/// a set of surplus marks `(i, j)`: the vertex explored at step `i`
/// (0-based) is joined to stack position `j` counted from the bottom,
/// `1 ≤ j < q_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MarkedDfq {
    q: DiscreteExcursion,
    order: Vec<u32>,
    marks: BTreeSet<(u32, u32)>,
}

impl MarkedDfq {
    pub fn new(q: DiscreteExcursion, order: Vec<u32>, marks: BTreeSet<(u32, u32)>) -> Result<Self> {
        if q.flavor() != Flavor::Dfq {
            return Err(Error::invalid("expected a dfq path"));
        }
        let n = q.len();
        if order.len() != n {
            return Err(Error::invalid(format!("{} labels for a path of length {n}", order.len())));
        }
        let mut seen = vec![false; n];
        for &l in &order {
            if l == 0 || l as usize > n || std::mem::replace(&mut seen[l as usize - 1], true) {
                return Err(Error::invalid("labels must be a permutation of 1..=n"));
            }
        }
        if order[0] != 1 {
            return Err(Error::invalid("exploration must start at label 1"));
        }
        for &(i, j) in &marks {
            if i as usize >= n || j == 0 || j as i64 >= q.values()[i as usize] {
                return Err(Error::invalid(format!("mark ({i}, {j}) outside the slot set")));
            }
        }
        // children must appear in increasing label order for the tree to
        // be a depth-first tree
        let t = tree_from_dfq(&q)?;
        for v in 0..n {
            let kids: Vec<u32> = t.children(v).map(|c| order[c]).collect();
            if kids.windows(2).any(|w| w[0] > w[1]) {
                return Err(Error::invalid("children out of label order"));
            }
        }
        Ok(MarkedDfq { q, order, marks })
    }

    pub fn q(&self) -> &DiscreteExcursion {
        &self.q
    }

    pub fn order(&self) -> &[u32] {
        &self.order
    }

    pub fn marks(&self) -> &BTreeSet<(u32, u32)> {
        &self.marks
    }

    fn labelled_tree(&self) -> LabelledRootedTree {
        let t = tree_from_dfq(&self.q).expect("validated");
        let n = t.n();
        let mut parent: Vec<Option<u32>> = vec![None; n];
        for v in 0..n {
            if let Some(p) = t.parent(v) {
                parent[self.order[v] as usize - 1] = Some(self.order[p]);
            }
        }
        LabelledRootedTree::from_parent_labels(&parent).expect("valid tree")
    }

    /// Lines: path values, labels in exploration order, then `i j` marks.
    pub fn to_text(&self) -> String {
        let mut s = self.q.to_text();
        s.push('\n');
        let labels: Vec<String> = self.order.iter().map(u32::to_string).collect();
        s.push_str(&labels.join(" "));
        s.push('\n');
        for (i, j) in &self.marks {
            writeln!(s, "{i} {j}").unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let q = DiscreteExcursion::from_text(lines.next().unwrap_or(""), Flavor::Dfq)?;
        let order = parse_u32s(lines.next().ok_or_else(|| Error::invalid("missing label line"))?)?;
        let mut marks = BTreeSet::new();
        for line in lines {
            let row = parse_u32s(line)?;
            let &[i, j] = row.as_slice() else {
                return Err(Error::invalid(format!("expected `i j`, got `{line}`")));
            };
            marks.insert((i, j));
        }
        Self::new(q, order, marks)
    }
}

pub fn graph_to_marked_dfq(g: &ConnectedGraph) -> MarkedDfq {
    let (tree, marks, order) = explore(g);
    MarkedDfq {
        q: dfq_of(tree.tree()),
        order,
        marks,
    }
}

pub fn marked_dfq_to_graph(m: &MarkedDfq) -> Result<ConnectedGraph> {
    let tree = m.labelled_tree();
    let mut edges = tree.edges();
    replay(&tree, &m.q, &m.order, &m.marks, |a, b| edges.push((a, b)))?;
    ConnectedGraph::from_edges(m.q.len(), &edges)
}

/// a(T) = Σ_{i=1}^{n−1} (q_i − 1).
pub fn area(q: &DiscreteExcursion) -> u64 {
    let v = q.values();
    let n = q.len();
    (1..n).map(|i| (v[i] - 1) as u64).sum()
}

pub fn tree_area(t: &LabelledRootedTree) -> u64 {
    area(&dfq_of(t.tree()))
}

fn guard(n: usize) -> Result<()> {
    if n > ENUMERATION_LIMIT {
        return Err(Error::SizeGuard(format!(
            "exhaustive enumeration is limited to n ≤ {ENUMERATION_LIMIT} (got {n})"
        )));
    }
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    Ok(())
}

/// All connected simple graphs on `[n]` with surplus `s`, in
/// lexicographic order of their sorted edge lists.
pub fn enumerate_gns(n: usize, s: usize) -> Result<Vec<ConnectedGraph>> {
    guard(n)?;
    let pairs: Vec<(u32, u32)> = (1..=n as u32)
        .flat_map(|a| (a + 1..=n as u32).map(move |b| (a, b)))
        .collect();
    let m = n - 1 + s;
    if m > pairs.len() {
        return Ok(Vec::new());
    }
    let total = pairs.len();
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        let mut dsu = Dsu::new(n);
        for &k in &idx {
            let (a, b) = pairs[k];
            dsu.union(a as usize - 1, b as usize - 1);
        }
        if dsu.components == 1 {
            let edges: Vec<(u32, u32)> = idx.iter().map(|&k| pairs[k]).collect();
            out.push(ConnectedGraph::from_edges(n, &edges).expect("connected"));
        }
        // advance to the next m-combination
        let Some(i) = (0..m).rev().find(|&i| idx[i] < total - m + i) else {
            return Ok(out);
        };
        idx[i] += 1;
        for k in i + 1..m {
            idx[k] = idx[k - 1] + 1;
        }
    }
}

/// All connected simple graphs on `[n]`, any surplus.
pub fn enumerate_connected(n: usize) -> Result<Vec<ConnectedGraph>> {
    guard(n)?;
    let max_s = (n * (n - 1) / 2 + 1).saturating_sub(n);
    let mut out = Vec::new();
    for s in 0..=max_s {
        out.extend(enumerate_gns(n, s)?);
    }
    Ok(out)
}

/// Number of connected graphs on `[n]` whose core is a fixed graph on
/// `k` vertices: k·n^{n−k−1} (1 when k = n).
pub fn graphs_with_core_count(n: u64, k: u64) -> Result<u128> {
    if k == 0 || k > n {
        return Err(Error::invalid(format!("need 1 ≤ k ≤ n, got k={k}, n={n}")));
    }
    if k == n {
        return Ok(1);
    }
    (n as u128)
        .checked_pow((n - k - 1) as u32)
        .and_then(|p| p.checked_mul(k as u128))
        .ok_or_else(|| Error::SizeGuard("count overflows u128".into()))
}

fn factorial(m: u32) -> i128 {
    (1..=m as i128).product()
}

/// ∏ over distinct edges of 2^{−mult·[loop]} / mult!. Every vertex of a
/// nonempty kernel must have degree ≥ 3; the empty kernel weighs 1.
pub fn kernel_weight(k: &MultiGraph) -> Result<Ratio<i128>> {
    if let Some((v, d)) = k.degrees().into_iter().enumerate().find(|&(_, d)| d < 3) {
        return Err(Error::invalid(format!("kernel vertex {} has degree {d} < 3", k.labels()[v])));
    }
    let mut w = Ratio::from_integer(1i128);
    for (u, v, m) in k.edges() {
        let mut den = factorial(m);
        if u == v {
            den <<= m;
        }
        w /= Ratio::from_integer(den);
    }
    Ok(w)
}

/// All connected 3-regular multigraphs on vertex labels `1..=k` (k even).
pub fn cubic_kernels(k: usize) -> Result<Vec<MultiGraph>> {
    cubic_multigraphs(k, true)
}

fn cubic_multigraphs(k: usize, connected_only: bool) -> Result<Vec<MultiGraph>> {
    if k % 2 != 0 || k == 0 {
        return Err(Error::invalid("a 3-regular multigraph needs an even, positive vertex count"));
    }
    guard(k)?;
    let mut out = Vec::new();
    let mut rem = vec![3u8; k];
    let mut edges: Vec<(usize, usize)> = Vec::new();
    fn rec(rem: &mut [u8], edges: &mut Vec<(usize, usize)>, out: &mut Vec<MultiGraph>, conn: bool) {
        let Some(v) = rem.iter().position(|&r| r > 0) else {
            let mut g = MultiGraph::new(rem.len());
            for &(a, b) in edges.iter() {
                g.add_edge(a, b, 1).expect("in range");
            }
            if !conn || g.is_connected() {
                out.push(g);
            }
            return;
        };
        let lo = match edges.last() {
            Some(&(a, b)) if a == v => b,
            _ => v,
        };
        for w in lo..rem.len() {
            let ok = if w == v { rem[v] >= 2 } else { rem[w] >= 1 };
            if !ok {
                continue;
            }
            rem[v] -= 1;
            rem[w] -= 1;
            edges.push((v, w));
            rec(rem, edges, out, conn);
            edges.pop();
            rem[v] += 1;
            rem[w] += 1;
        }
    }
    rec(&mut rem, &mut edges, &mut out, connected_only);
    Ok(out)
}

/// Normalized kernel law for surplus `s`: each labelled cubic kernel on
/// `[2(s − 1)]` with its probability.
pub fn kernel_law(s: usize) -> Result<Vec<(MultiGraph, Ratio<i128>)>> {
    if s < 2 {
        return Err(Error::invalid("kernel law needs s ≥ 2"));
    }
    let ks = cubic_kernels(2 * (s - 1))?;
    let weights: Vec<Ratio<i128>> = ks.iter().map(|k| kernel_weight(k).expect("cubic")).collect();
    let total: Ratio<i128> = weights.iter().cloned().sum();
    Ok(ks.into_iter().zip(weights).map(|(k, w)| (k, w / total)).collect())
}

/// κ(s) by enumerating labelled cubic kernels; κ(1) = 1.
pub fn kappa(s: usize) -> Result<Ratio<i128>> {
    match s {
        0 => Err(Error::invalid("κ is defined for s ≥ 1")),
        1 => Ok(Ratio::from_integer(1)),
        2..=4 => {
            let ks = cubic_kernels(2 * (s - 1))?;
            let total: Ratio<i128> = ks.iter().map(|k| kernel_weight(k).expect("cubic")).sum();
            let norm = factorial(2 * s as u32 - 2) * factorial(3 * s as u32 - 4);
            Ok(total / Ratio::from_integer(norm))
        }
        _ => Err(Error::SizeGuard("κ enumeration is limited to s ≤ 4".into())),
    }
}

/// ∫_0^∞ x^{3s−3} e^{−x²/2} dx = 2^{(3s−4)/2} Γ((3s−2)/2).
pub fn gaussian_moment(s: usize) -> f64 {
    let a = (3.0 * s as f64 - 2.0) / 2.0;
    (2f64).powf((3.0 * s as f64 - 4.0) / 2.0) * statrs::function::gamma::gamma(a)
}

/// κ(s)·n^{n−2+3s/2}·∫_0^∞ x^{3s−3}e^{−x²/2}dx.
pub fn wright_asymptotic(n: u64, s: usize) -> Result<f64> {
    Ok(ln_wright_asymptotic(n, s)?.exp())
}

pub fn ln_wright_asymptotic(n: u64, s: usize) -> Result<f64> {
    let k = kappa(s)?;
    let kf = *k.numer() as f64 / *k.denom() as f64;
    let nf = n as f64;
    Ok(kf.ln() + (nf - 2.0 + 1.5 * s as f64) * nf.ln() + gaussian_moment(s).ln())
}

/// Exact number of connected unicyclic graphs on `[n]`:
/// Σ_{k=3}^{n} (n)_k / (2k) · k·n^{n−k−1}.
pub fn unicyclic_count(n: u64) -> f64 {
    ln_unicyclic_count(n).exp()
}

pub fn ln_unicyclic_count(n: u64) -> f64 {
    // cycles on a chosen ordered k-set: (n)_k/(2k); trees hanging off: k·n^{n−k−1}
    let nf = n as f64;
    let mut terms = Vec::with_capacity(n as usize);
    let mut log_falling = 0.0; // ln (n)_k
    for k in 1..=n {
        log_falling += (nf - (k - 1) as f64).ln();
        if k < 3 {
            continue;
        }
        let hang = if k == n { 0.0 } else { (k as f64).ln() + (nf - k as f64 - 1.0) * nf.ln() };
        terms.push(log_falling - (2.0 * k as f64).ln() + hang);
    }
    let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// Exact probability that a uniform graph in 𝒢_n^2 has the theta
/// ("triple") kernel, against the dumbbell and the one-vertex figure-eight
/// (absent in the limit).
///
/// A core on k vertices spreads its degree-2 vertices over the kernel
/// edges; simplicity forbids two empty parallel edges and loops with fewer
/// than two interior vertices. Labelled cores are k!·(compositions)/|Aut|
/// with |Aut| = 12, 8, 8, and each core on k chosen vertices extends to
/// k·n^{n−k−1} connected graphs.
pub fn kernel_triple_probability(n: u64) -> Result<f64> {
    if n < 4 {
        return Err(Error::invalid("𝒢_n^2 is empty for n < 4"));
    }
    let nf = n as f64;
    let (mut triple, mut other) = (0.0, 0.0);
    let mut log_falling = 0.0; // ln (n)_k − k ln n
    for k in 1..=n {
        log_falling += (1.0 - (k - 1) as f64 / nf).ln();
        if k < 3 {
            continue;
        }
        let w = (log_falling + (k as f64).ln()).exp();
        let m = k - 2;
        let choose2 = |x: u64| (x * x.saturating_sub(1) / 2) as f64;
        triple += w * (choose2(m + 2) - 3.0) / 12.0;
        if m >= 4 {
            other += w * choose2(m - 2) / 8.0;
        }
        // figure-eight: k − 1 interior vertices on two loops
        if k >= 5 {
            other += w * (k - 4) as f64 / 8.0;
        }
    }
    Ok(triple / (triple + other))
}
