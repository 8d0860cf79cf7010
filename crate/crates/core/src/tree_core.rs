//! Rooted ordered trees, labelled rooted trees and child sequences.
//!
//! Vertices are indexed `0..n` internally and labelled `1..=n` in all text
//! formats. A [`LabelledRootedTree`] is stored canonically: vertex `v`
//! carries label `v + 1` and every child list is sorted by increasing label,
//! which fixes the left-to-right order needed by the depth-first encodings.

use std::fmt::Write as _;

use crate::error::{Error, Result};

const NO_PARENT: u32 = u32::MAX;

/// A finite rooted tree whose children are ordered.
///
/// Storage is flat: a parent array plus CSR child lists, so trees with
/// ~10^8 vertices fit in a few hundred megabytes.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RootedOrderedTree {
    root: u32,
    parent: Vec<u32>,
    child_start: Vec<u32>,
    children: Vec<u32>,
}

impl RootedOrderedTree {
    /// The one-vertex tree.
    pub fn singleton() -> Self {
        RootedOrderedTree {
            root: 0,
            parent: vec![NO_PARENT],
            child_start: vec![0, 0],
            children: Vec::new(),
        }
    }

    /// Builds a tree from ordered child lists, validating that the lists
    /// describe a single tree rooted at `root`.
    pub fn from_child_lists(root: usize, lists: &[Vec<usize>]) -> Result<Self> {
        let n = lists.len();
        if n == 0 {
            return Err(Error::invalid("tree must have at least one vertex"));
        }
        if root >= n {
            return Err(Error::invalid(format!("root {root} out of range")));
        }
        if n > u32::MAX as usize - 1 {
            return Err(Error::invalid("tree too large"));
        }
        let mut parent = vec![NO_PARENT; n];
        let mut child_start = Vec::with_capacity(n + 1);
        let mut children = Vec::with_capacity(n.saturating_sub(1));
        for (v, list) in lists.iter().enumerate() {
            child_start.push(children.len() as u32);
            for &c in list {
                if c >= n {
                    return Err(Error::invalid(format!("child {c} out of range")));
                }
                if c == root || parent[c] != NO_PARENT {
                    return Err(Error::invalid(format!("vertex {c} has two parents")));
                }
                parent[c] = v as u32;
                children.push(c as u32);
            }
        }
        child_start.push(children.len() as u32);
        if children.len() != n - 1 {
            return Err(Error::invalid(format!(
                "expected {} parent links, found {}",
                n - 1,
                children.len()
            )));
        }
        let t = RootedOrderedTree {
            root: root as u32,
            parent,
            child_start,
            children,
        };
        t.check_connected()?;
        Ok(t)
    }

    /// Builds a tree from a parent array; children are ordered by
    /// increasing vertex index.
    pub fn from_parents(parent: &[Option<usize>]) -> Result<Self> {
        let n = parent.len();
        if n == 0 {
            return Err(Error::invalid("tree must have at least one vertex"));
        }
        let mut root = None;
        let mut counts = vec![0u32; n + 1];
        for (v, p) in parent.iter().enumerate() {
            match *p {
                None => {
                    if root.replace(v).is_some() {
                        return Err(Error::invalid("more than one root"));
                    }
                }
                Some(p) if p >= n => {
                    return Err(Error::invalid(format!("parent {p} out of range")))
                }
                Some(p) if p == v => return Err(Error::invalid("self-parent")),
                Some(p) => counts[p + 1] += 1,
            }
        }
        let root = root.ok_or_else(|| Error::invalid("no root"))?;
        for v in 0..n {
            counts[v + 1] += counts[v];
        }
        let child_start = counts.clone();
        let mut fill = counts;
        let mut children = vec![0u32; n - 1];
        let mut parent_arr = vec![NO_PARENT; n];
        for (v, p) in parent.iter().enumerate() {
            if let Some(p) = *p {
                children[fill[p] as usize] = v as u32;
                fill[p] += 1;
                parent_arr[v] = p as u32;
            }
        }
        let t = RootedOrderedTree {
            root: root as u32,
            parent: parent_arr,
            child_start,
            children,
        };
        t.check_connected()?;
        Ok(t)
    }

    /// Assembles a tree from trusted CSR parts produced inside the crate.
    pub(crate) fn from_raw(root: u32, parent: Vec<u32>, child_start: Vec<u32>, children: Vec<u32>) -> Self {
        debug_assert_eq!(child_start.len(), parent.len() + 1);
        RootedOrderedTree {
            root,
            parent,
            child_start,
            children,
        }
    }

    fn check_connected(&self) -> Result<()> {
        let n = self.n();
        let mut seen = 0usize;
        let mut stack = vec![self.root];
        let mut visited = vec![false; n];
        while let Some(v) = stack.pop() {
            if visited[v as usize] {
                return Err(Error::invalid("cycle in parent structure"));
            }
            visited[v as usize] = true;
            seen += 1;
            stack.extend_from_slice(self.children_raw(v as usize));
        }
        if seen != n {
            return Err(Error::invalid("parent structure is not connected"));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.parent.len()
    }

    pub fn root(&self) -> usize {
        self.root as usize
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        match self.parent[v] {
            NO_PARENT => None,
            p => Some(p as usize),
        }
    }

    fn children_raw(&self, v: usize) -> &[u32] {
        &self.children[self.child_start[v] as usize..self.child_start[v + 1] as usize]
    }

    /// Ordered children of `v`.
    pub fn children(&self, v: usize) -> impl ExactSizeIterator<Item = usize> + '_ {
        self.children_raw(v).iter().map(|&c| c as usize)
    }

    /// c(v): the number of children of `v`.
    pub fn child_count(&self, v: usize) -> usize {
        (self.child_start[v + 1] - self.child_start[v]) as usize
    }

    /// Vertices in the order they are first visited by the contour
    /// exploration (pre-order).
    pub fn dfs_order(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.n());
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            order.push(v as usize);
            stack.extend(self.children_raw(v as usize).iter().rev());
        }
        order
    }

    /// Distance from the root for every vertex.
    pub fn depths(&self) -> Vec<u32> {
        let mut depth = vec![0u32; self.n()];
        for v in self.dfs_order() {
            if let Some(p) = self.parent(v) {
                depth[v] = depth[p] + 1;
            }
        }
        depth
    }

    /// Height of the tree (maximum depth).
    pub fn height(&self) -> u32 {
        self.depths().into_iter().max().unwrap_or(0)
    }

    /// Graph distance between `u` and `v` given precomputed depths.
    pub fn distance_with_depths(&self, depths: &[u32], mut u: usize, mut v: usize) -> u32 {
        let mut d = 0;
        while depths[u] > depths[v] {
            u = self.parent[u] as usize;
            d += 1;
        }
        while depths[v] > depths[u] {
            v = self.parent[v] as usize;
            d += 1;
        }
        while u != v {
            u = self.parent[u] as usize;
            v = self.parent[v] as usize;
            d += 2;
        }
        d
    }

    /// Unordered edge list (parent, child).
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n()).filter_map(move |v| self.parent(v).map(|p| (p, v)))
    }
}

/// Child sequence (c_1, ..., c_n) of a labelled tree, indexed by label.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ChildSequence(Vec<u32>);

impl ChildSequence {
    /// Validates that the counts sum to `n - 1`.
    pub fn new(counts: Vec<u32>) -> Result<Self> {
        let n = counts.len();
        if n == 0 {
            return Err(Error::invalid("empty child sequence"));
        }
        let sum: u64 = counts.iter().map(|&c| c as u64).sum();
        if sum != n as u64 - 1 {
            return Err(Error::invalid(format!(
                "child counts sum to {sum}, expected {}",
                n - 1
            )));
        }
        Ok(ChildSequence(counts))
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    /// c_label for `label` in `1..=n`.
    pub fn get(&self, label: usize) -> u32 {
        self.0[label - 1]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    /// Σ c_i (c_i - 1).
    pub fn falling_square_sum(&self) -> u64 {
        self.0
            .iter()
            .map(|&c| c as u64 * (c as u64).saturating_sub(1))
            .sum()
    }
}

/// A rooted tree on labels `1..=n`, children sorted by increasing label.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LabelledRootedTree {
    tree: RootedOrderedTree,
}

impl LabelledRootedTree {
    /// `parent_of[label - 1]` is the parent label, `None` for the root.
    pub fn from_parent_labels(parent_of: &[Option<u32>]) -> Result<Self> {
        let parents: Vec<Option<usize>> = parent_of
            .iter()
            .map(|p| p.map(|l| (l as usize).wrapping_sub(1)))
            .collect();
        if parents.iter().flatten().any(|&p| p >= parent_of.len()) {
            return Err(Error::invalid("parent label out of range"));
        }
        Ok(LabelledRootedTree {
            tree: RootedOrderedTree::from_parents(&parents)?,
        })
    }

    /// Builds from unordered edges and a root label; edges may be given in
    /// either orientation.
    pub fn from_edges(n: usize, root_label: u32, edges: &[(u32, u32)]) -> Result<Self> {
        if root_label == 0 || root_label as usize > n {
            return Err(Error::invalid("root label out of range"));
        }
        if edges.len() + 1 != n {
            return Err(Error::invalid(format!(
                "a tree on {n} vertices has {} edges, got {}",
                n - 1,
                edges.len()
            )));
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u == 0 || v == 0 || u as usize > n || v as usize > n || u == v {
                return Err(Error::invalid(format!("bad edge {u} {v}")));
            }
            adj[u as usize - 1].push(v as usize - 1);
            adj[v as usize - 1].push(u as usize - 1);
        }
        let mut parent: Vec<Option<usize>> = vec![None; n];
        let mut seen = vec![false; n];
        let r = root_label as usize - 1;
        seen[r] = true;
        let mut stack = vec![r];
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(v);
                    count += 1;
                    stack.push(w);
                }
            }
        }
        if count != n {
            return Err(Error::invalid("edges do not form a tree"));
        }
        Ok(LabelledRootedTree {
            tree: RootedOrderedTree::from_parents(&parent)?,
        })
    }

    /// Wraps a tree whose vertex `v` is label `v + 1`, re-sorting children.
    pub fn from_indexed(tree: &RootedOrderedTree) -> Self {
        let parents: Vec<Option<usize>> = (0..tree.n()).map(|v| tree.parent(v)).collect();
        LabelledRootedTree {
            tree: RootedOrderedTree::from_parents(&parents).expect("valid tree"),
        }
    }

    pub fn n(&self) -> usize {
        self.tree.n()
    }

    /// The canonical ordered tree (vertex `v` = label `v + 1`).
    pub fn tree(&self) -> &RootedOrderedTree {
        &self.tree
    }

    pub fn root_label(&self) -> u32 {
        self.tree.root() as u32 + 1
    }

    pub fn parent_label(&self, label: u32) -> Option<u32> {
        self.tree.parent(label as usize - 1).map(|p| p as u32 + 1)
    }

    /// (parent label, child label) pairs ordered by child label.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        self.tree
            .edges()
            .map(|(p, c)| (p as u32 + 1, c as u32 + 1))
            .collect()
    }

    /// Same underlying unrooted tree, rooted at `label`.
    pub fn rerooted(&self, label: u32) -> Self {
        let new_root = label as usize - 1;
        let mut parent: Vec<Option<usize>> = (0..self.n()).map(|v| self.tree.parent(v)).collect();
        // reverse the path from the new root up to the old root
        let mut prev = None;
        let mut cur = Some(new_root);
        while let Some(v) = cur {
            let next = parent[v];
            parent[v] = prev;
            prev = Some(v);
            cur = next;
        }
        LabelledRootedTree {
            tree: RootedOrderedTree::from_parents(&parent).expect("rerooting preserves tree"),
        }
    }

    /// Child sequence indexed by label.
    pub fn child_counts(&self) -> ChildSequence {
        ChildSequence((0..self.n()).map(|v| self.tree.child_count(v) as u32).collect())
    }

    /// Parent-array text: `n root` then one `label parent` row per vertex,
    /// the root naming itself as parent.
    pub fn to_parent_text(&self) -> String {
        let mut out = String::with_capacity(self.n() * 12);
        writeln!(out, "{} {}", self.n(), self.root_label()).unwrap();
        for v in 0..self.n() {
            let p = self.tree.parent(v).unwrap_or(v);
            writeln!(out, "{} {}", v + 1, p + 1).unwrap();
        }
        out
    }

    pub fn from_parent_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::invalid("empty input"))?;
        let nums = parse_u32s(header)?;
        let [n, root] = nums[..] else {
            return Err(Error::invalid("header must be `n root_label`"));
        };
        let n = n as usize;
        let mut parent_of: Vec<Option<Option<u32>>> = vec![None; n];
        for line in lines {
            let nums = parse_u32s(line)?;
            let [label, p] = nums[..] else {
                return Err(Error::invalid(format!("bad row `{line}`")));
            };
            if label == 0 || label as usize > n {
                return Err(Error::invalid(format!("label {label} out of range")));
            }
            let slot = &mut parent_of[label as usize - 1];
            if slot.is_some() {
                return Err(Error::invalid(format!("label {label} listed twice")));
            }
            *slot = Some(if label == p { None } else { Some(p) });
        }
        let parents: Vec<Option<u32>> = parent_of
            .into_iter()
            .enumerate()
            .map(|(i, p)| p.ok_or_else(|| Error::invalid(format!("label {} missing", i + 1))))
            .collect::<Result<_>>()?;
        let t = Self::from_parent_labels(&parents)?;
        if t.root_label() != root {
            return Err(Error::invalid("header root disagrees with rows"));
        }
        Ok(t)
    }

    /// `parent child` rows, 1-based.
    pub fn to_edge_text(&self) -> String {
        let mut out = String::new();
        for (p, c) in self.edges() {
            writeln!(out, "{p} {c}").unwrap();
        }
        out
    }
}

pub(crate) fn parse_u32s(line: &str) -> Result<Vec<u32>> {
    line.split_whitespace()
        .map(|t| {
            t.parse::<u32>()
                .map_err(|_| Error::invalid(format!("not a nonnegative integer: `{t}`")))
        })
        .collect()
}

/// c(v) for every labelled vertex.
pub fn child_counts(t: &LabelledRootedTree) -> ChildSequence {
    t.child_counts()
}

/// Pre-order of the contour exploration.
pub fn dfs_order(t: &RootedOrderedTree) -> Vec<usize> {
    t.dfs_order()
}

/// Attaches `labels` (a permutation of `1..=n`, `labels[v]` for vertex `v`)
/// and discards the child order, re-sorting children by label.
pub fn forget_order(t: &RootedOrderedTree, labels: &[u32]) -> Result<LabelledRootedTree> {
    let n = t.n();
    if labels.len() != n {
        return Err(Error::invalid("label count differs from vertex count"));
    }
    let mut seen = vec![false; n];
    for &l in labels {
        if l == 0 || l as usize > n || std::mem::replace(&mut seen[l as usize - 1], true) {
            return Err(Error::invalid("labels are not a permutation of 1..=n"));
        }
    }
    let mut parent = vec![None; n];
    for v in 0..n {
        parent[labels[v] as usize - 1] = t.parent(v).map(|p| labels[p] as usize - 1);
    }
    Ok(LabelledRootedTree {
        tree: RootedOrderedTree::from_parents(&parent)?,
    })
}

#[cfg(test)]
pub(crate) use tests::example_tree;

#[cfg(test)]
mod tests {
    use super::*;

    /// The tree of the worked line-breaking example: root 4, edges
    /// 4–8, 8–3, 3–1, 8–9, 9–2, 3–5, 5–6, 8–10, 10–7.
    pub(crate) fn example_tree() -> LabelledRootedTree {
        let edges = [(4, 8), (8, 3), (3, 1), (8, 9), (9, 2), (3, 5), (5, 6), (8, 10), (10, 7)];
        LabelledRootedTree::from_edges(10, 4, &edges).unwrap()
    }

    #[test]
    fn child_counts_of_small_trees() {
        let single = LabelledRootedTree::from_parent_labels(&[None]).unwrap();
        assert_eq!(child_counts(&single).as_slice(), &[0]);
        let path = LabelledRootedTree::from_parent_labels(&[None, Some(1), Some(2)]).unwrap();
        assert_eq!(child_counts(&path).as_slice(), &[1, 1, 0]);
    }

    #[test]
    fn child_counts_of_example_tree() {
        let c = child_counts(&example_tree());
        assert_eq!(c.as_slice(), &[0, 0, 2, 1, 1, 0, 0, 3, 1, 1]);
        assert_eq!(c.as_slice().iter().sum::<u32>(), 9);
    }

    #[test]
    fn dfs_order_lists_subtrees_contiguously() {
        assert_eq!(dfs_order(&RootedOrderedTree::singleton()), vec![0]);
        let cherry = RootedOrderedTree::from_child_lists(0, &[vec![1, 2], vec![], vec![]]).unwrap();
        assert_eq!(dfs_order(&cherry), vec![0, 1, 2]);
        // 0 -> L=1, R=2; L -> LL=3, LR=4; R -> RL=5, RR=6
        let t = RootedOrderedTree::from_child_lists(
            0,
            &[vec![1, 2], vec![3, 4], vec![5, 6], vec![], vec![], vec![], vec![]],
        )
        .unwrap();
        assert_eq!(dfs_order(&t), vec![0, 1, 3, 4, 2, 5, 6]);
    }

    #[test]
    fn forget_order_sorts_children_by_label() {
        // root 0 with ordered children (b=1, a=2); labels a=1, b=2, root=3
        let t = RootedOrderedTree::from_child_lists(0, &[vec![1, 2], vec![], vec![]]).unwrap();
        let lt = forget_order(&t, &[3, 2, 1]).unwrap();
        assert_eq!(lt.root_label(), 3);
        let kids: Vec<usize> = lt.tree().children(2).collect();
        assert_eq!(kids, vec![0, 1]);
        // idempotent under the canonical convention
        let again = forget_order(lt.tree(), &[1, 2, 3]).unwrap();
        assert_eq!(again, lt);
    }

    #[test]
    fn forget_order_identity_on_path() {
        let t = RootedOrderedTree::from_child_lists(0, &[vec![1], vec![2], vec![]]).unwrap();
        let lt = forget_order(&t, &[1, 2, 3]).unwrap();
        assert_eq!(lt.edges(), vec![(1, 2), (2, 3)]);
    }

    #[test]
    fn rejects_malformed_structures() {
        assert!(RootedOrderedTree::from_child_lists(0, &[vec![1], vec![0]]).is_err());
        assert!(RootedOrderedTree::from_parents(&[None, None]).is_err());
        assert!(RootedOrderedTree::from_parents(&[Some(1), Some(0)]).is_err());
        assert!(RootedOrderedTree::from_parents(&[None, Some(2), Some(1)]).is_err());
        assert!(forget_order(&RootedOrderedTree::singleton(), &[2]).is_err());
        assert!(ChildSequence::new(vec![1, 1]).is_err());
    }

    #[test]
    fn parent_text_round_trip() {
        let t = example_tree();
        let text = t.to_parent_text();
        assert!(text.starts_with("10 4\n"));
        assert!(text.contains("\n4 4\n"));
        assert_eq!(LabelledRootedTree::from_parent_text(&text).unwrap(), t);
        assert!(LabelledRootedTree::from_parent_text("2 1\n1 1\n").is_err());
    }

    #[test]
    fn rerooting_keeps_edges() {
        let t = example_tree();
        let r = t.rerooted(1);
        assert_eq!(r.root_label(), 1);
        let mut a: Vec<(u32, u32)> = t.edges().into_iter().map(|(u, v)| (u.min(v), u.max(v))).collect();
        let mut b: Vec<(u32, u32)> = r.edges().into_iter().map(|(u, v)| (u.min(v), u.max(v))).collect();
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }

    #[test]
    fn distances_from_depths() {
        let t = example_tree();
        let d = t.tree().depths();
        // 1 and 2: 1-3-8-9-2
        assert_eq!(t.tree().distance_with_depths(&d, 0, 1), 4);
        assert_eq!(t.tree().distance_with_depths(&d, 3, 6), 3);
    }
}
