//! The line-breaking bijection between rooted labelled trees on `[n]` and
//! words in `[n]^{n-1}`, its distance laws, the rate-t arrival process, the
//! continuum line-breaking construction, and Rémy's and Marchal's
//! sequential tree growth.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::continuum_graph::{LengthSampler, NodeId, NodeKind, SegmentGraph};
use crate::error::{Error, Result};
use crate::tree_core::{ChildSequence, LabelledRootedTree};

/// A word v_1 … v_{n−1} over `[n]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CodingWord {
    n: usize,
    word: Vec<u32>,
}

impl CodingWord {
    /// Validates that every symbol lies in `1..=len + 1`.
    pub fn new(word: Vec<u32>) -> Result<Self> {
        let n = word.len() + 1;
        if let Some(&bad) = word.iter().find(|&&v| v == 0 || v as usize > n) {
            return Err(Error::invalid(format!("symbol {bad} outside 1..={n}")));
        }
        Ok(CodingWord { n, word })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.word
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (i, v) in self.word.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            write!(s, "{v}").unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Self::new(crate::tree_core::parse_u32s(text)?)
    }
}

/// Runs the subtree growth S_0 ⊂ S_1 ⊂ … of the bijection, handing each
/// path P_i (attachment vertex first, y_i last, as 0-based vertices) to
/// `visit`.
fn grow_paths(t: &LabelledRootedTree, mut visit: impl FnMut(&[usize])) {
    let tree = t.tree();
    let n = tree.n();
    let mut in_s = vec![false; n];
    in_s[tree.root()] = true;
    let mut lowest = 0usize;
    let mut path = Vec::new();
    loop {
        while lowest < n && in_s[lowest] {
            lowest += 1;
        }
        if lowest == n {
            break;
        }
        path.clear();
        let mut v = lowest;
        while !in_s[v] {
            path.push(v);
            in_s[v] = true;
            v = tree.parent(v).expect("root is in S");
        }
        path.push(v);
        path.reverse();
        visit(&path);
    }
}

/// The coding word P_1^- P_2^- … P_I^-.
pub fn encode(t: &LabelledRootedTree) -> CodingWord {
    let mut word = Vec::with_capacity(t.n().saturating_sub(1));
    grow_paths(t, |path| {
        word.extend(path[..path.len() - 1].iter().map(|&v| v as u32 + 1));
    });
    CodingWord { n: t.n(), word }
}

/// |S_1|, …, |S_k| of the subtree growth (sizes stay at n once S_I = T).
pub fn subtree_sizes(t: &LabelledRootedTree, k: usize) -> Vec<usize> {
    let mut sizes = Vec::with_capacity(k);
    let mut size = 1usize;
    grow_paths(t, |path| {
        size += path.len() - 1;
        if sizes.len() < k {
            sizes.push(size);
        }
    });
    sizes.resize(k, t.n());
    sizes
}

/// Inverse of [`encode`]. A new path starts at a symbol that has been seen
/// before (a repetition, or an earlier endpoint) or that equals the
/// endpoint the current path would receive; the endpoint of a path is the
/// smallest label not yet seen.
pub fn decode(w: &CodingWord) -> LabelledRootedTree {
    let n = w.n;
    if n == 1 {
        return LabelledRootedTree::from_parent_labels(&[None]).expect("singleton");
    }
    let word: Vec<usize> = w.word.iter().map(|&v| v as usize - 1).collect();
    let mut parent: Vec<Option<u32>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut lowest = 0usize;
    let next_absent = |seen: &[bool], lowest: &mut usize| {
        while *lowest < n && seen[*lowest] {
            *lowest += 1;
        }
        *lowest
    };
    seen[word[0]] = true;
    let mut last = word[0];
    for &v in &word[1..] {
        let y = next_absent(&seen, &mut lowest);
        if seen[v] || v == y {
            // close the current path at y and start a new one at v
            parent[y] = Some(last as u32 + 1);
            seen[y] = true;
        } else {
            parent[v] = Some(last as u32 + 1);
        }
        seen[v] = true;
        last = v;
    }
    let y = next_absent(&seen, &mut lowest);
    parent[y] = Some(last as u32 + 1);
    LabelledRootedTree::from_parent_labels(&parent).expect("every word decodes to a tree")
}

/// Uniform rooted labelled tree with child sequence `c`: decode a uniform
/// arrangement of the multiset in which label i appears c_i times.
pub fn sample_with_child_sequence<R: Rng + ?Sized>(c: &ChildSequence, rng: &mut R) -> LabelledRootedTree {
    let mut word: Vec<u32> = Vec::with_capacity(c.n() - 1);
    for (i, &ci) in c.as_slice().iter().enumerate() {
        word.extend(std::iter::repeat_n(i as u32 + 1, ci as usize));
    }
    word.shuffle(rng);
    decode(&CodingWord { n: c.n(), word })
}

/// Uniform rooted labelled tree on `[n]` (uniform word).
pub fn uniform_rooted_tree<R: Rng + ?Sized>(n: usize, rng: &mut R) -> LabelledRootedTree {
    let word = (1..n).map(|_| rng.random_range(1..=n as u32)).collect();
    decode(&CodingWord { n, word })
}

/// I.i.d. Poisson(1) child counts conditioned to sum to n − 1, by
/// rejection on the sum.
pub fn conditioned_poisson_child_sequence<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ChildSequence {
    let poisson = Poisson::new(1.0).expect("valid rate");
    loop {
        let c: Vec<u32> = (0..n).map(|_| poisson.sample(rng) as u32).collect();
        if c.iter().map(|&x| x as usize).sum::<usize>() == n - 1 {
            return ChildSequence::new(c).expect("sum checked");
        }
    }
}

/// P(dist(ρ, 1) = d) for a uniform rooted labelled tree on `[n]`.
pub fn root_distance_pmf(n: usize, d: usize) -> f64 {
    let nf = n as f64;
    let mut p = (d as f64 + 1.0) / nf;
    for j in 1..=d {
        p *= 1.0 - j as f64 / nf;
    }
    p.max(0.0)
}

/// P(dist(i + 1, S_i) = d | S_i) given |S_i| = `size` and i + 1 ∉ S_i.
pub fn subtree_growth_law(n: usize, size: usize, d: usize) -> f64 {
    if d == 0 {
        return 0.0;
    }
    let nf = n as f64;
    let mut p = (size + d) as f64 / nf;
    for j in 1..d {
        p *= 1.0 - (size + j) as f64 / nf;
    }
    p.clamp(0.0, 1.0)
}

/// Arrival times s_1 < s_2 < … of the Poisson process of rate t, started
/// from `offset`.
#[derive(Clone, Debug, PartialEq)]
pub struct LineBreakSchedule {
    pub offset: f64,
    pub arrivals: Vec<f64>,
}

impl LineBreakSchedule {
    /// Successive segment lengths s_i − s_{i−1}, with s_0 = offset.
    pub fn segment_lengths(&self) -> Vec<f64> {
        let mut prev = self.offset;
        self.arrivals
            .iter()
            .map(|&s| {
                let l = s - prev;
                prev = s;
                l
            })
            .collect()
    }
}

/// `k` arrivals by inversion: s_i = √(s_{i−1}² − 2 ln U).
pub fn poisson_rate_t_arrivals<R: Rng + ?Sized>(k: usize, offset: f64, rng: &mut R) -> Result<LineBreakSchedule> {
    if !(offset >= 0.0) || !offset.is_finite() {
        return Err(Error::invalid("offset must be finite and nonnegative"));
    }
    let mut s = offset;
    let mut arrivals = Vec::with_capacity(k);
    for _ in 0..k {
        let u: f64 = 1.0 - rng.random::<f64>();
        let next = (s * s - 2.0 * u.ln()).sqrt();
        // guard against a zero-length step from u == 1
        s = if next > s { next } else { s + f64::EPSILON * s.max(1.0) };
        arrivals.push(s);
    }
    Ok(LineBreakSchedule { offset, arrivals })
}

/// A finite binary metric tree: root leaf 0 and leaves 1..=k.
#[derive(Clone, Debug)]
pub struct MetricTreeApprox {
    pub graph: SegmentGraph,
    /// `leaves[label]` is the node carrying `label`.
    pub leaves: Vec<NodeId>,
    pub schedule: LineBreakSchedule,
}

impl MetricTreeApprox {
    /// Leaf-labelled shape, rooted at leaf 0, in canonical form.
    pub fn shape(&self) -> String {
        segment_tree_shape(&self.graph, self.leaves[0])
    }

    pub fn leaf_distance(&self, a: u32, b: u32) -> f64 {
        let g = &self.graph;
        g.distances_from(self.leaves[a as usize])[self.leaves[b as usize]]
    }

    /// Label map rows `label node`.
    pub fn label_map_text(&self) -> String {
        let mut s = String::new();
        for (l, n) in self.leaves.iter().enumerate() {
            writeln!(s, "{l} {n}").unwrap();
        }
        s
    }
}

/// Attaches a new segment of length `len` at a length-uniform point of `g`
/// and returns the new endpoint.
pub(crate) fn attach_line<R: Rng + ?Sized>(g: &mut SegmentGraph, len: f64, kind: NodeKind, rng: &mut R) -> NodeId {
    let p = LengthSampler::new(g).sample(rng);
    let base = g.node_at(p, NodeKind::Branch);
    let leaf = g.add_node(kind);
    g.add_segment(base, leaf, len).expect("arrival gaps are positive");
    leaf
}

/// 𝒯_k of the continuum line-breaking construction.
pub fn crt_linebreak<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Result<MetricTreeApprox> {
    if k == 0 {
        return Err(Error::invalid("need at least one branch"));
    }
    let schedule = poisson_rate_t_arrivals(k, 0.0, rng)?;
    let lengths = schedule.segment_lengths();
    let mut g = SegmentGraph::new();
    let root = g.add_node(NodeKind::Leaf(0));
    let first = g.add_node(NodeKind::Leaf(1));
    g.add_segment(root, first, lengths[0])?;
    let mut leaves = vec![root, first];
    for (i, &len) in lengths.iter().enumerate().skip(1) {
        leaves.push(attach_line(&mut g, len, NodeKind::Leaf(i as u32 + 1), rng));
    }
    Ok(MetricTreeApprox {
        graph: g,
        leaves,
        schedule,
    })
}

/// Canonical leaf-labelled shape of a tree-shaped segment graph rooted at
/// `root`: leaves print their label, internal nodes the sorted list of
/// their subtrees.
pub fn segment_tree_shape(g: &SegmentGraph, root: NodeId) -> String {
    let mut adj: Vec<Vec<NodeId>> = vec![Vec::new(); g.node_capacity()];
    for s in g.segments() {
        adj[s.a].push(s.b);
        adj[s.b].push(s.a);
    }
    fn rec(g: &SegmentGraph, adj: &[Vec<NodeId>], v: NodeId, from: Option<NodeId>) -> (u32, String) {
        let kids: Vec<(u32, String)> = adj[v]
            .iter()
            .filter(|&&w| Some(w) != from)
            .map(|&w| rec(g, adj, w, Some(v)))
            .collect();
        canonical(g.kind(v), kids)
    }
    fn canonical(kind: NodeKind, mut kids: Vec<(u32, String)>) -> (u32, String) {
        if kids.is_empty() {
            let NodeKind::Leaf(l) = kind else {
                return (u32::MAX, "?".into());
            };
            return (l, l.to_string());
        }
        kids.sort();
        let min = kids[0].0;
        let body: Vec<String> = kids.into_iter().map(|k| k.1).collect();
        (min, format!("({})", body.join(",")))
    }
    // the root leaf has a single neighbour; the shape is that subtree
    let (_, s) = rec(g, &adj, root, None);
    s
}

/// A rooted tree grown one leaf at a time, for Rémy's and Marchal's
/// algorithms. Node 0 is the root leaf (label 0).
#[derive(Clone, Debug)]
pub struct GrowingTree {
    parent: Vec<u32>,
    children: Vec<Vec<u32>>,
    label: Vec<Option<u32>>,
    leaf_count: u32,
}

impl GrowingTree {
    /// T_1: two adjacent vertices labelled 0 and 1, rooted at 0.
    pub fn initial() -> Self {
        GrowingTree {
            parent: vec![u32::MAX, 0],
            children: vec![vec![1], vec![]],
            label: vec![Some(0), Some(1)],
            leaf_count: 1,
        }
    }

    /// Number of non-root leaves i of T_i.
    pub fn size(&self) -> usize {
        self.leaf_count as usize
    }

    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    pub fn edge_count(&self) -> usize {
        self.parent.len() - 1
    }

    pub fn child_count(&self, v: usize) -> usize {
        self.children[v].len()
    }

    /// Leaves including the root leaf.
    pub fn leaf_total(&self) -> usize {
        (0..self.node_count()).filter(|&v| self.children[v].is_empty()).count() + 1
    }

    fn new_leaf(&mut self, parent: usize) {
        self.leaf_count += 1;
        let leaf = self.parent.len();
        self.parent.push(parent as u32);
        self.children.push(Vec::new());
        self.label.push(Some(self.leaf_count));
        self.children[parent].push(leaf as u32);
    }

    /// Subdivides the edge above `child` and hangs the next leaf from the
    /// new vertex.
    pub fn subdivide_and_attach(&mut self, child: usize) {
        assert!(child != 0, "the root has no parent edge");
        let p = self.parent[child] as usize;
        let m = self.parent.len();
        self.parent.push(p as u32);
        self.children.push(vec![child as u32]);
        self.label.push(None);
        let slot = self.children[p].iter_mut().find(|c| **c as usize == child).unwrap();
        *slot = m as u32;
        self.parent[child] = m as u32;
        self.new_leaf(m);
    }

    /// Hangs the next leaf directly from `v`.
    pub fn attach_at_vertex(&mut self, v: usize) {
        self.new_leaf(v);
    }

    /// Canonical leaf-labelled shape.
    pub fn shape(&self) -> String {
        fn rec(t: &GrowingTree, v: usize) -> (u32, String) {
            if t.children[v].is_empty() {
                let l = t.label[v].unwrap();
                return (l, l.to_string());
            }
            let mut kids: Vec<(u32, String)> = t.children[v].iter().map(|&c| rec(t, c as usize)).collect();
            kids.sort();
            let body: Vec<String> = kids.iter().map(|k| k.1.clone()).collect();
            (kids[0].0, format!("({})", body.join(",")))
        }
        rec(self, self.children[0][0] as usize).1
    }

    fn leaf_node(&self, label: u32) -> usize {
        self.label.iter().position(|&l| l == Some(label)).expect("label present")
    }

    /// Graph distance between the leaves labelled `a` and `b`.
    pub fn leaf_distance(&self, a: u32, b: u32) -> usize {
        let ancestors = |mut v: usize| {
            let mut out = vec![v];
            while self.parent[v] != u32::MAX {
                v = self.parent[v] as usize;
                out.push(v);
            }
            out
        };
        let pa = ancestors(self.leaf_node(a));
        let pb = ancestors(self.leaf_node(b));
        let mut i = pa.len();
        let mut j = pb.len();
        while i > 0 && j > 0 && pa[i - 1] == pb[j - 1] {
            i -= 1;
            j -= 1;
        }
        i + j
    }
}

/// One step of Rémy's algorithm: subdivide a uniform edge and attach a leaf.
pub fn remy_step<R: Rng + ?Sized>(t: &mut GrowingTree, rng: &mut R) {
    let child = rng.random_range(1..t.node_count());
    t.subdivide_and_attach(child);
}

/// One step of Marchal's algorithm: edges weigh α − 1, vertices with
/// c ≥ 2 children weigh c − α.
pub fn marchal_step<R: Rng + ?Sized>(t: &mut GrowingTree, alpha: f64, rng: &mut R) -> Result<()> {
    check_alpha(alpha)?;
    let edge_weight = (alpha - 1.0) * t.edge_count() as f64;
    let vertex_weights: Vec<f64> = (0..t.node_count())
        .map(|v| {
            let c = t.child_count(v);
            if c >= 2 {
                c as f64 - alpha
            } else {
                0.0
            }
        })
        .collect();
    let total = edge_weight + vertex_weights.iter().sum::<f64>();
    let mut u = rng.random::<f64>() * total;
    if u < edge_weight {
        t.subdivide_and_attach(1 + ((u / (alpha - 1.0)) as usize).min(t.edge_count() - 1));
        return Ok(());
    }
    u -= edge_weight;
    for (v, &w) in vertex_weights.iter().enumerate() {
        if u < w {
            t.attach_at_vertex(v);
            return Ok(());
        }
        u -= w;
    }
    // rounding fell off the end: last weighted vertex
    let v = vertex_weights.iter().rposition(|&w| w > 0.0).unwrap_or(0);
    if vertex_weights[v] > 0.0 {
        t.attach_at_vertex(v);
    } else {
        t.subdivide_and_attach(t.edge_count());
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(Error::invalid(format!("alpha = {alpha} outside (1, 2]")));
    }
    Ok(())
}

/// i^{−(α−1)/α} · dist(leaf 0, leaf 1) for each tree T_i^α of a sequence.
pub fn marchal_rescaled_distance(trees: &[GrowingTree], alpha: f64) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    Ok(trees
        .iter()
        .map(|t| (t.size() as f64).powf(-(alpha - 1.0) / alpha) * t.leaf_distance(0, 1) as f64)
        .collect())
}

/// Marchal's algorithm run for many steps with O(log n) weighted choices,
/// tracking only the distance between leaves 0 and 1.
pub struct MarchalProcess {
    alpha: f64,
    parent: Vec<u32>,
    child_count: Vec<u32>,
    on_leaf_one_path: Vec<bool>,
    vertex_weights: Fenwick,
    leaves: usize,
    depth_of_one: usize,
}

impl MarchalProcess {
    pub fn new(alpha: f64, max_steps: usize) -> Result<Self> {
        check_alpha(alpha)?;
        let cap = 2 + 2 * max_steps;
        let mut parent = Vec::with_capacity(cap);
        parent.extend([u32::MAX, 0]);
        Ok(MarchalProcess {
            alpha,
            parent,
            child_count: vec![1, 0],
            on_leaf_one_path: vec![false, true],
            vertex_weights: Fenwick::new(cap),
            leaves: 1,
            depth_of_one: 1,
        })
    }

    fn weight(&self, c: u32) -> f64 {
        if c >= 2 {
            c as f64 - self.alpha
        } else {
            0.0
        }
    }

    fn set_children(&mut self, v: usize, c: u32) {
        let delta = self.weight(c) - self.weight(self.child_count[v]);
        self.child_count[v] = c;
        if delta != 0.0 {
            self.vertex_weights.add(v, delta);
        }
    }

    fn push_node(&mut self, parent: u32, on_path: bool) -> usize {
        self.parent.push(parent);
        self.child_count.push(0);
        self.on_leaf_one_path.push(on_path);
        self.parent.len() - 1
    }

    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let edges = self.parent.len() - 1;
        let edge_weight = (self.alpha - 1.0) * edges as f64;
        let total = edge_weight + self.vertex_weights.total();
        let u = rng.random::<f64>() * total;
        if u < edge_weight || self.vertex_weights.total() <= 0.0 {
            let child = rng.random_range(1..self.parent.len());
            let p = self.parent[child];
            let on_path = self.on_leaf_one_path[child];
            let m = self.push_node(p, on_path);
            self.parent[child] = m as u32;
            if on_path {
                self.depth_of_one += 1;
            }
            self.push_node(m as u32, false);
            self.set_children(m, 2);
        } else {
            let v = self.vertex_weights.find(u - edge_weight);
            self.push_node(v as u32, false);
            let c = self.child_count[v] + 1;
            self.set_children(v, c);
        }
        self.leaves += 1;
    }

    pub fn size(&self) -> usize {
        self.leaves
    }

    pub fn leaf_one_distance(&self) -> usize {
        self.depth_of_one
    }

    /// Runs until size i for each i in `checkpoints` (ascending) and emits
    /// i^{−(α−1)/α} · dist(0, 1) at each.
    pub fn rescaled_distance_series<R: Rng + ?Sized>(&mut self, checkpoints: &[usize], rng: &mut R) -> Vec<f64> {
        let exponent = -(self.alpha - 1.0) / self.alpha;
        checkpoints
            .iter()
            .map(|&i| {
                while self.leaves < i {
                    self.step(rng);
                }
                (i as f64).powf(exponent) * self.depth_of_one as f64
            })
            .collect()
    }
}

/// Fenwick tree over nonnegative weights with prefix search.
struct Fenwick {
    tree: Vec<f64>,
    total: f64,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Fenwick {
            tree: vec![0.0; n + 1],
            total: 0.0,
        }
    }

    fn add(&mut self, i: usize, delta: f64) {
        self.total += delta;
        let mut i = i + 1;
        while i < self.tree.len() {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    fn total(&self) -> f64 {
        self.total
    }

    /// Smallest index whose prefix sum exceeds `u`.
    fn find(&self, mut u: f64) -> usize {
        let mut pos = 0;
        let mut step = self.tree.len().next_power_of_two() / 2;
        while step > 0 {
            let next = pos + step;
            if next < self.tree.len() && self.tree[next] <= u {
                u -= self.tree[next];
                pos = next;
            }
            step /= 2;
        }
        pos.min(self.tree.len() - 2)
    }
}

/// Prüfer code with the largest-labelled-leaf rule for a tree rooted at 1:
/// repeatedly delete the largest non-root leaf and record its neighbour,
/// until only the root remains.
pub fn prufer_largest_leaf(t: &LabelledRootedTree) -> Result<Vec<u32>> {
    if t.root_label() != 1 {
        return Err(Error::invalid("Prüfer comparison needs root 1"));
    }
    let n = t.n();
    let mut degree = vec![0usize; n + 1];
    let mut nbr: Vec<Vec<u32>> = vec![Vec::new(); n + 1];
    for (p, c) in t.edges() {
        degree[p as usize] += 1;
        degree[c as usize] += 1;
        nbr[p as usize].push(c);
        nbr[c as usize].push(p);
    }
    let mut leaves: BTreeMap<u32, ()> = (2..=n as u32).filter(|&v| degree[v as usize] == 1).map(|v| (v, ())).collect();
    let mut removed = vec![false; n + 1];
    let mut code = Vec::with_capacity(n - 1);
    while let Some((&leaf, _)) = leaves.iter().next_back() {
        leaves.remove(&leaf);
        removed[leaf as usize] = true;
        let &other = nbr[leaf as usize].iter().find(|&&w| !removed[w as usize]).unwrap();
        code.push(other);
        degree[other as usize] -= 1;
        if other != 1 && degree[other as usize] == 1 {
            leaves.insert(other, ());
        }
    }
    Ok(code)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree_core::example_tree;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::{HashMap, HashSet};

    fn word(v: &[u32]) -> CodingWord {
        CodingWord::new(v.to_vec()).unwrap()
    }

    fn all_words(n: usize) -> Vec<Vec<u32>> {
        let mut out = vec![vec![]];
        for _ in 0..n - 1 {
            out = out
                .into_iter()
                .flat_map(|w| {
                    (1..=n as u32).map(move |v| {
                        let mut x = w.clone();
                        x.push(v);
                        x
                    })
                })
                .collect();
        }
        out
    }

    #[test]
    fn example_tree_word() {
        assert_eq!(encode(&example_tree()).as_slice(), &[4, 8, 3, 8, 9, 3, 5, 8, 10]);
        assert_eq!(decode(&word(&[4, 8, 3, 8, 9, 3, 5, 8, 10])), example_tree());
    }

    #[test]
    fn path_and_star_words() {
        let path = LabelledRootedTree::from_parent_labels(&[None, Some(1), Some(2)]).unwrap();
        assert_eq!(encode(&path).as_slice(), &[1, 2]);
        let n = 7u32;
        let star: Vec<Option<u32>> = (1..=n).map(|l| if l == n { None } else { Some(n) }).collect();
        let star = LabelledRootedTree::from_parent_labels(&star).unwrap();
        assert_eq!(encode(&star).as_slice(), &[n; 6]);
    }

    #[test]
    fn bijection_small_n() {
        for n in 1..=5usize {
            let mut images = HashSet::new();
            for w in all_words(n) {
                let t = decode(&word(&w));
                assert_eq!(encode(&t).as_slice(), &w[..]);
                // symbol counts are child counts
                let c = t.child_counts();
                for l in 1..=n {
                    assert_eq!(w.iter().filter(|&&v| v as usize == l).count() as u32, c.get(l));
                }
                images.insert(t);
            }
            assert_eq!(images.len(), n.pow(n as u32 - 1));
        }
    }

    #[test]
    fn reversed_word_is_prufer_code_for_root_one() {
        for w in all_words(5) {
            let t = decode(&word(&w));
            if t.root_label() != 1 {
                continue;
            }
            let mut rev = w.clone();
            rev.reverse();
            assert_eq!(prufer_largest_leaf(&t).unwrap(), rev);
        }
    }

    #[test]
    fn rejects_bad_symbols() {
        assert!(CodingWord::new(vec![0, 1]).is_err());
        assert!(CodingWord::new(vec![4, 1]).is_err());
    }

    #[test]
    fn root_distance_pmf_values() {
        assert!((root_distance_pmf(2, 0) - 0.5).abs() < 1e-15);
        assert!((root_distance_pmf(2, 1) - 0.5).abs() < 1e-15);
        assert!((root_distance_pmf(5, 0) - 0.2).abs() < 1e-15);
        for n in [1usize, 3, 10, 100] {
            let s: f64 = (0..=n).map(|d| root_distance_pmf(n, d)).sum();
            assert!((s - 1.0).abs() < 1e-12, "n = {n}: {s}");
        }
        // the 2-vertex enumeration oracle: trees are 1→2 and 2→1
        let mut counts = [0usize; 2];
        for w in all_words(2) {
            let t = decode(&word(&w));
            let d = if t.root_label() == 1 { 0 } else { 1 };
            counts[d] += 1;
        }
        assert_eq!(counts, [1, 1]);
    }

    #[test]
    fn root_distance_pmf_matches_enumeration() {
        // exact law over all 5^4 trees
        let n = 5;
        let mut counts = vec![0usize; n];
        for w in all_words(n) {
            let t = decode(&word(&w));
            let depth = t.tree().depths();
            counts[depth[0] as usize] += 1;
        }
        let total = n.pow(n as u32 - 1) as f64;
        for d in 0..n {
            assert!((counts[d] as f64 / total - root_distance_pmf(n, d)).abs() < 1e-12);
        }
    }

    #[test]
    fn subtree_growth_law_values() {
        assert!((subtree_growth_law(50, 7, 1) - 8.0 / 50.0).abs() < 1e-15);
        for (n, k) in [(50usize, 7usize), (200, 1), (10, 9)] {
            let s: f64 = (1..=n).map(|d| subtree_growth_law(n, k, d)).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn subtree_growth_law_matches_enumeration() {
        // dist(2, S_1) given |S_1| over all trees on [5] with 2 ∉ S_1
        let n = 5;
        let mut observed: HashMap<(usize, usize), usize> = HashMap::new();
        let mut by_size: HashMap<usize, usize> = HashMap::new();
        for w in all_words(n) {
            let t = decode(&word(&w));
            let mut paths = Vec::new();
            grow_paths(&t, |p| paths.push(p.to_vec()));
            let s1: HashSet<usize> = paths[0].iter().copied().collect();
            if s1.contains(&1) {
                continue;
            }
            let d = paths[1].len() - 1;
            assert_eq!(*paths[1].last().unwrap(), 1);
            *observed.entry((s1.len(), d)).or_default() += 1;
            *by_size.entry(s1.len()).or_default() += 1;
        }
        for (&(k, d), &c) in &observed {
            let p = c as f64 / by_size[&k] as f64;
            assert!((p - subtree_growth_law(n, k, d)).abs() < 1e-12, "k={k} d={d}");
        }
    }

    #[test]
    fn child_sequence_sampler_is_uniform_and_size_biased() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let star = ChildSequence::new(vec![0, 0, 3, 0]).unwrap();
        let t = sample_with_child_sequence(&star, &mut rng);
        assert_eq!(t.root_label(), 3);
        // c = (2, 1, 0, 0): P(root = 1) = 2/3, P(root = 2) = 1/3
        let c = ChildSequence::new(vec![2, 1, 0, 0]).unwrap();
        let draws = 60_000;
        let mut root1 = 0;
        let mut shapes: HashMap<LabelledRootedTree, usize> = HashMap::new();
        for _ in 0..draws {
            let t = sample_with_child_sequence(&c, &mut rng);
            assert_eq!(t.child_counts(), c);
            root1 += (t.root_label() == 1) as usize;
            *shapes.entry(t).or_default() += 1;
        }
        assert!((root1 as f64 / draws as f64 - 2.0 / 3.0).abs() < 0.01);
        // the 3 distinct words give 3 distinct trees, equally likely
        assert_eq!(shapes.len(), 3);
        for &v in shapes.values() {
            assert!((v as f64 / draws as f64 - 1.0 / 3.0).abs() < 0.01);
        }
    }

    #[test]
    fn arrivals_increase_and_start_after_offset() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = poisson_rate_t_arrivals(50, 1.5, &mut rng).unwrap();
        assert!(s.arrivals[0] > 1.5);
        assert!(s.arrivals.windows(2).all(|w| w[1] > w[0]));
        assert!(s.segment_lengths().iter().all(|&l| l > 0.0));
        assert!(poisson_rate_t_arrivals(1, -1.0, &mut rng).is_err());
    }

    #[test]
    fn crt_linebreak_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let t1 = crt_linebreak(1, &mut rng).unwrap();
        assert_eq!(t1.graph.segment_count(), 1);
        assert!((t1.leaf_distance(0, 1) - t1.schedule.arrivals[0]).abs() < 1e-12);
        for _ in 0..20 {
            let t = crt_linebreak(6, &mut rng).unwrap();
            assert_eq!(t.graph.segment_count(), 11);
            assert_eq!(t.graph.betti_number(), 0);
            assert!((t.graph.total_length() - t.schedule.arrivals[5]).abs() < 1e-9);
            assert!((t.leaf_distance(0, 1) - t.schedule.arrivals[0]).abs() < 1e-9);
            for v in 0..t.graph.node_capacity() {
                let d = t.graph.degree(v);
                assert!(d == 1 || d == 3, "degree {d}");
            }
        }
    }

    #[test]
    fn remy_first_steps() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut t = GrowingTree::initial();
        remy_step(&mut t, &mut rng);
        assert_eq!(t.shape(), "(1,2)");
        let mut counts: HashMap<String, usize> = HashMap::new();
        for _ in 0..30_000 {
            let mut u = t.clone();
            remy_step(&mut u, &mut rng);
            assert_eq!(u.leaf_total(), 4);
            *counts.entry(u.shape()).or_default() += 1;
        }
        assert_eq!(counts.len(), 3);
        for &c in counts.values() {
            assert!((c as f64 / 30_000.0 - 1.0 / 3.0).abs() < 0.015);
        }
        let mut u = GrowingTree::initial();
        for k in 1..=6 {
            remy_step(&mut u, &mut rng);
            assert_eq!(u.leaf_total(), k + 2);
        }
    }

    #[test]
    fn marchal_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        assert!(marchal_step(&mut GrowingTree::initial(), 1.0, &mut rng).is_err());
        assert!(marchal_step(&mut GrowingTree::initial(), 2.5, &mut rng).is_err());
        // T_1 -> T_2 is forced
        for _ in 0..50 {
            let mut t = GrowingTree::initial();
            marchal_step(&mut t, 1.5, &mut rng).unwrap();
            assert_eq!(t.shape(), "(1,2)");
        }
        // from T_2 at α = 1.5: the branch vertex weighs 0.5, three edges
        // weigh 0.5 each, so P(vertex) = 0.5 / 2.0 = 1/4
        let mut t2 = GrowingTree::initial();
        marchal_step(&mut t2, 1.5, &mut rng).unwrap();
        let draws = 40_000;
        let mut at_vertex = 0;
        for _ in 0..draws {
            let mut u = t2.clone();
            marchal_step(&mut u, 1.5, &mut rng).unwrap();
            at_vertex += (u.shape() == "(1,2,3)") as usize;
        }
        assert!((at_vertex as f64 / draws as f64 - 0.25).abs() < 0.01);
    }

    #[test]
    fn marchal_process_matches_direct_tree() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        // same α = 2 law for leaf-one depth through both implementations
        let draws = 4000;
        let steps = 30;
        let mut a = 0.0;
        let mut b = 0.0;
        for _ in 0..draws {
            let mut t = GrowingTree::initial();
            for _ in 0..steps {
                marchal_step(&mut t, 1.7, &mut rng).unwrap();
            }
            a += t.leaf_distance(0, 1) as f64;
            let mut p = MarchalProcess::new(1.7, steps).unwrap();
            for _ in 0..steps {
                p.step(&mut rng);
            }
            b += p.leaf_one_distance() as f64;
        }
        assert!(((a - b) / draws as f64).abs() < 0.15, "{} vs {}", a / draws as f64, b / draws as f64);
    }

    #[test]
    fn rescaled_distance_series() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut trees = vec![GrowingTree::initial()];
        for _ in 0..15 {
            let mut t = trees.last().unwrap().clone();
            remy_step(&mut t, &mut rng);
            trees.push(t);
        }
        let series = marchal_rescaled_distance(&trees, 2.0).unwrap();
        for (t, s) in trees.iter().zip(&series) {
            assert!(*s > 0.0);
            let expected = t.leaf_distance(0, 1) as f64 / (t.size() as f64).sqrt();
            assert!((s - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn fenwick_search() {
        let mut f = Fenwick::new(10);
        f.add(2, 1.0);
        f.add(5, 2.0);
        f.add(9, 0.5);
        assert_eq!(f.find(0.5), 2);
        assert_eq!(f.find(1.5), 5);
        assert_eq!(f.find(3.2), 9);
        assert!((f.total() - 3.5).abs() < 1e-15);
    }
}
