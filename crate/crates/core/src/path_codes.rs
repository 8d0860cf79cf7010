//! Lattice-path and continuous encodings of trees: the contour process, the
//! depth-first queue (Łukasiewicz) path, and the excursion pseudometric.

use std::fmt::Write as _;

use rand::Rng;

use crate::error::{Error, Result};
use crate::tree_core::RootedOrderedTree;

/// Which lattice-path encoding a [`DiscreteExcursion`] holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Flavor {
    /// ±1 steps, starts and ends at 0, length 2n − 2.
    Contour,
    /// Stack sizes: starts at 1, ends at 0, positive before the end,
    /// increments ≥ −1, length n.
    Dfq,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DiscreteExcursion {
    values: Vec<i64>,
    flavor: Flavor,
}

impl DiscreteExcursion {
    pub fn new(values: Vec<i64>, flavor: Flavor) -> Result<Self> {
        match flavor {
            Flavor::Dfq => validate_dfq(&values)?,
            Flavor::Contour => validate_contour(&values)?,
        }
        Ok(DiscreteExcursion { values, flavor })
    }

    pub(crate) fn new_unchecked(values: Vec<i64>, flavor: Flavor) -> Self {
        DiscreteExcursion { values, flavor }
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    /// Number of steps m (the path has m + 1 values).
    pub fn len(&self) -> usize {
        self.values.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Whitespace-separated integers on one line.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.values.len() * 3);
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            write!(s, "{v}").unwrap();
        }
        s
    }

    pub fn from_text(text: &str, flavor: Flavor) -> Result<Self> {
        let values = text
            .split_whitespace()
            .map(|t| t.parse::<i64>().map_err(|_| Error::invalid(format!("bad integer `{t}`"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(values, flavor)
    }
}

fn validate_dfq(q: &[i64]) -> Result<()> {
    let m = q.len().checked_sub(1).ok_or_else(|| Error::invalid("empty path"))?;
    if m == 0 || q[0] != 1 || q[m] != 0 {
        return Err(Error::invalid("dfq path must start at 1 and end at 0"));
    }
    for i in 0..m {
        if q[i] <= 0 {
            return Err(Error::invalid(format!("dfq path hits {} at step {i} before the end", q[i])));
        }
        if q[i + 1] < q[i] - 1 {
            return Err(Error::invalid(format!("dfq increment below -1 at step {i}")));
        }
    }
    Ok(())
}

fn validate_contour(e: &[i64]) -> Result<()> {
    let m = e.len().checked_sub(1).ok_or_else(|| Error::invalid("empty path"))?;
    if e[0] != 0 || e[m] != 0 {
        return Err(Error::invalid("contour must start and end at 0"));
    }
    if m % 2 != 0 {
        return Err(Error::invalid("contour length must be even"));
    }
    for i in 0..m {
        if (e[i + 1] - e[i]).abs() != 1 {
            return Err(Error::invalid(format!("contour step {i} is not ±1")));
        }
        if e[i + 1] < 0 {
            return Err(Error::invalid("contour goes negative"));
        }
    }
    Ok(())
}

/// Distance-to-root along the clockwise unit-speed contour walk.
pub fn contour_of(t: &RootedOrderedTree) -> DiscreteExcursion {
    let n = t.n();
    let mut e = Vec::with_capacity(2 * n - 1);
    e.push(0i64);
    // (vertex, index of next child to visit)
    let mut stack: Vec<(usize, usize)> = vec![(t.root(), 0)];
    let mut depth = 0i64;
    while let Some(top) = stack.last_mut() {
        let (v, next) = *top;
        if next < t.child_count(v) {
            top.1 += 1;
            let c = t.children(v).nth(next).unwrap();
            depth += 1;
            e.push(depth);
            stack.push((c, 0));
        } else {
            stack.pop();
            if !stack.is_empty() {
                depth -= 1;
                e.push(depth);
            }
        }
    }
    DiscreteExcursion::new_unchecked(e, Flavor::Contour)
}

/// q_i = 1 + Σ_{j ≤ i} (c(v_j) − 1) over the depth-first order.
pub fn dfq_of(t: &RootedOrderedTree) -> DiscreteExcursion {
    let mut q = Vec::with_capacity(t.n() + 1);
    let mut acc = 1i64;
    q.push(acc);
    for v in t.dfs_order() {
        acc += t.child_count(v) as i64 - 1;
        q.push(acc);
    }
    DiscreteExcursion::new_unchecked(q, Flavor::Dfq)
}

/// The unique ordered tree whose depth-first queue path is `q`.
pub fn tree_from_dfq(q: &DiscreteExcursion) -> Result<RootedOrderedTree> {
    if q.flavor != Flavor::Dfq {
        return Err(Error::invalid("expected a dfq-flavored path"));
    }
    validate_dfq(&q.values)?;
    let n = q.len();
    // Vertex i (in depth-first order) has c_i = q_{i+1} - q_i + 1 children,
    // and its parent is the most recent vertex with an unfilled slot.
    let mut parent = vec![u32::MAX; n];
    let mut child_start = vec![0u32; n + 1];
    let mut children = vec![0u32; n - 1];
    let mut open: Vec<(u32, u32)> = Vec::new(); // (vertex, remaining slots)
    let mut filled = vec![0u32; n];
    for i in 0..n {
        let c = (q.values[i + 1] - q.values[i] + 1) as u32;
        child_start[i + 1] = child_start[i] + c;
        if i > 0 {
            let top = open.last_mut().expect("valid excursion keeps a parent open");
            let p = top.0;
            top.1 -= 1;
            if top.1 == 0 {
                open.pop();
            }
            parent[i] = p;
            children[(child_start[p as usize] + filled[p as usize]) as usize] = i as u32;
            filled[p as usize] += 1;
        }
        if c > 0 {
            open.push((i as u32, c));
        }
    }
    Ok(RootedOrderedTree::from_raw(0, parent, child_start, children))
}

/// The unique ordered tree whose contour process is `e`. Vertices are
/// numbered in depth-first order.
pub fn tree_from_contour(e: &DiscreteExcursion) -> Result<RootedOrderedTree> {
    if e.flavor != Flavor::Contour {
        return Err(Error::invalid("expected a contour-flavored path"));
    }
    validate_contour(&e.values)?;
    let n = e.len() / 2 + 1;
    let mut lists: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut path = vec![0usize];
    let mut next = 1usize;
    for w in e.values.windows(2) {
        if w[1] > w[0] {
            let v = next;
            next += 1;
            lists[*path.last().unwrap()].push(v);
            path.push(v);
        } else {
            path.pop();
        }
    }
    RootedOrderedTree::from_child_lists(0, &lists)
}

/// Stack-simulation values of the depth-first queue: the size of the stack
/// of discovered-but-unexplored vertices after each exploration step.
pub fn dfq_by_stack(t: &RootedOrderedTree) -> Vec<i64> {
    let mut out = vec![1i64];
    let mut stack = vec![t.root()];
    while let Some(v) = stack.pop() {
        let kids: Vec<usize> = t.children(v).collect();
        stack.extend(kids.into_iter().rev());
        out.push(stack.len() as i64);
    }
    out
}

/// A nonnegative piecewise-linear function on `[0, zeta]` vanishing at both
/// ends.
#[derive(Clone, Debug, PartialEq)]
pub struct RealExcursion {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl RealExcursion {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() || grid.len() < 2 {
            return Err(Error::invalid("grid and values must have equal length ≥ 2"));
        }
        if grid[0] != 0.0 {
            return Err(Error::invalid("grid must start at 0"));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("grid must be strictly increasing"));
        }
        if values[0] != 0.0 || *values.last().unwrap() != 0.0 {
            return Err(Error::invalid("excursion must vanish at both endpoints"));
        }
        if values.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::invalid("excursion values must be nonnegative"));
        }
        Ok(RealExcursion { grid, values })
    }

    /// Equally spaced grid on `[0, zeta]`.
    pub fn uniform(zeta: f64, values: Vec<f64>) -> Result<Self> {
        let m = values.len().saturating_sub(1).max(1);
        let grid = (0..values.len()).map(|j| zeta * j as f64 / m as f64).collect();
        Self::new(grid, values)
    }

    /// The contour process of a tree, read as a function on `[0, 2n − 2]`.
    /// The one-vertex tree has no nondegenerate excursion and is rejected.
    pub fn from_contour(e: &DiscreteExcursion) -> Result<Self> {
        if e.flavor != Flavor::Contour || e.is_empty() {
            return Err(Error::invalid("need a nonempty contour path"));
        }
        let grid = (0..e.values.len()).map(|j| j as f64).collect();
        let values = e.values.iter().map(|&v| v as f64).collect();
        Self::new(grid, values)
    }

    pub fn zeta(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Index of the last grid point ≤ t.
    fn locate(&self, t: f64) -> usize {
        match self.grid.binary_search_by(|g| g.partial_cmp(&t).unwrap()) {
            Ok(i) => i,
            Err(i) => i - 1,
        }
    }

    /// Linear interpolation at `t`.
    pub fn eval(&self, t: f64) -> f64 {
        let i = self.locate(t);
        if i + 1 >= self.grid.len() {
            return self.values[self.grid.len() - 1];
        }
        let (t0, t1) = (self.grid[i], self.grid[i + 1]);
        let w = (t - t0) / (t1 - t0);
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }

    /// ∫ f over `[0, zeta]` (exact for the piecewise-linear interpolant).
    pub fn area(&self) -> f64 {
        self.grid
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(g, v)| 0.5 * (g[1] - g[0]) * (v[0] + v[1]))
            .sum()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Brownian-scaling transform: time stretched by `x`, space by √x.
    pub fn rescale(&self, x: f64) -> Result<Self> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::invalid("rescale factor must be positive"));
        }
        let s = x.sqrt();
        Ok(RealExcursion {
            grid: self.grid.iter().map(|g| g * x).collect(),
            values: self.values.iter().map(|v| v * s).collect(),
        })
    }

    /// Multiplies all values by `c` (e.g. the factor 2 in 2e).
    pub fn scale_values(&self, c: f64) -> Self {
        RealExcursion {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(0.0..=self.zeta()).contains(&t) {
            return Err(Error::invalid(format!("time {t} outside [0, {}]", self.zeta())));
        }
        Ok(())
    }

    /// `t,value` CSV with header.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,value\n");
        for (t, v) in self.grid.iter().zip(&self.values) {
            writeln!(s, "{t},{v}").unwrap();
        }
        s
    }
}

/// d_e^0(x, y) = e(x) + e(y) − 2 min_{[x∧y, x∨y]} e.
pub fn excursion_distance(e: &RealExcursion, x: f64, y: f64) -> Result<f64> {
    e.check_time(x)?;
    e.check_time(y)?;
    let (a, b) = if x <= y { (x, y) } else { (y, x) };
    let (ea, eb) = (e.eval(a), e.eval(b));
    let mut m = ea.min(eb);
    let (ia, ib) = (e.locate(a), e.locate(b));
    for j in ia + 1..=ib {
        m = m.min(e.values[j]);
    }
    Ok((ea + eb - 2.0 * m).max(0.0))
}

/// Sparse-table range-minimum over the grid values, for repeated distance
/// queries on one excursion.
pub struct ExcursionMetric<'a> {
    e: &'a RealExcursion,
    table: Vec<Vec<f64>>,
}

impl<'a> ExcursionMetric<'a> {
    pub fn new(e: &'a RealExcursion) -> Self {
        let n = e.values.len();
        let mut table = vec![e.values.clone()];
        let mut span = 1;
        while 2 * span <= n {
            let prev = table.last().unwrap();
            let next: Vec<f64> = (0..=n - 2 * span)
                .map(|i| prev[i].min(prev[i + span]))
                .collect();
            table.push(next);
            span *= 2;
        }
        ExcursionMetric { e, table }
    }

    fn range_min(&self, lo: usize, hi: usize) -> f64 {
        let len = hi - lo + 1;
        let k = usize::BITS as usize - 1 - len.leading_zeros() as usize;
        self.table[k][lo].min(self.table[k][hi + 1 - (1 << k)])
    }

    pub fn distance(&self, x: f64, y: f64) -> f64 {
        let (a, b) = if x <= y { (x, y) } else { (y, x) };
        let (ea, eb) = (self.e.eval(a), self.e.eval(b));
        let mut m = ea.min(eb);
        let (ia, ib) = (self.e.locate(a), self.e.locate(b));
        if ia < ib {
            m = m.min(self.range_min(ia + 1, ib));
        }
        (ea + eb - 2.0 * m).max(0.0)
    }

    /// Pairwise distances between the given times.
    pub fn matrix(&self, times: &[f64]) -> Vec<Vec<f64>> {
        times
            .iter()
            .map(|&x| times.iter().map(|&y| self.distance(x, y)).collect())
            .collect()
    }
}

/// Pairwise d_e^0 between `k` i.i.d. uniform times on `[0, zeta]`.
pub fn distance_matrix_from_excursion<R: Rng + ?Sized>(
    e: &RealExcursion,
    k: usize,
    rng: &mut R,
) -> Vec<Vec<f64>> {
    let times: Vec<f64> = (0..k).map(|_| rng.random::<f64>() * e.zeta()).collect();
    ExcursionMetric::new(e).matrix(&times)
}

/// Paired series (q_i, dist(root, v_i)) along the depth-first order, with
/// the predicted factor ½ Σ c(c − 1) / (n − 1) relating them.
#[derive(Clone, Debug)]
pub struct DfqContourPairs {
    pub pairs: Vec<(i64, u32)>,
    pub predicted_factor: f64,
    /// Least-squares slope through the origin of q against depth.
    pub fitted_slope: f64,
    /// True when Σ c(c − 1) = 0 (every vertex has at most one child), where
    /// no constant factor relates the two paths.
    pub degenerate: bool,
}

pub fn dfq_contour_ratio(t: &RootedOrderedTree) -> Result<DfqContourPairs> {
    let n = t.n();
    if n < 2 {
        return Err(Error::invalid("need at least two vertices"));
    }
    let order = t.dfs_order();
    let depth = t.depths();
    let q = dfq_of(t);
    let pairs: Vec<(i64, u32)> = order
        .iter()
        .enumerate()
        .map(|(i, &v)| (q.values[i + 1], depth[v]))
        .collect();
    let fss: u64 = (0..n)
        .map(|v| {
            let c = t.child_count(v) as u64;
            c * c.saturating_sub(1)
        })
        .sum();
    let predicted_factor = 0.5 * fss as f64 / (n - 1) as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for &(qi, d) in &pairs {
        num += qi as f64 * d as f64;
        den += d as f64 * d as f64;
    }
    Ok(DfqContourPairs {
        pairs,
        predicted_factor,
        fitted_slope: if den > 0.0 { num / den } else { f64::NAN },
        degenerate: fss == 0,
    })
}

#[cfg(test)]
pub(crate) use tests::all_ordered_trees;
