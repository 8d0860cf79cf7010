//! Random generators: conditioned Bienaymé trees, simple-random-walk
//! excursions, area-biased trees and uniform fixed-surplus graphs, critical
//! Erdős–Rényi graphs (direct and via the exploration chain), the reflected
//! Brownian limit process, and the i.i.d.-degree configuration model.

use std::collections::BTreeSet;

use rand::distr::weighted::WeightedIndex;
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_distr::{Binomial, Distribution, StandardNormal};
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::graph_core::{marked_dfq_to_graph, ConnectedGraph, MarkedDfq, ENUMERATION_LIMIT};
use crate::linebreak::{decode, CodingWord};
use crate::path_codes::{dfq_of, tree_from_dfq, DiscreteExcursion, Flavor};
use crate::rng::StreamRng;
use crate::tree_core::{LabelledRootedTree, RootedOrderedTree};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OffspringPreset {
    /// p_k = 2^{−(k+1)}.
    Geometric,
    /// p_0 = p_2 = ½.
    Binary,
    /// p_k = e^{−1}/k!.
    Poisson1,
}

/// An offspring distribution (p_k)_{k ≥ 0}.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OffspringSpec {
    preset: Option<OffspringPreset>,
    /// Tabulated pmf; presets with infinite support are truncated where the
    /// tail drops below 1e-17.
    pmf: Vec<f64>,
}

impl OffspringSpec {
    pub fn preset(p: OffspringPreset) -> Self {
        let pmf = match p {
            OffspringPreset::Binary => vec![0.5, 0.0, 0.5],
            OffspringPreset::Geometric => (0..60).map(|k| 0.5f64.powi(k + 1)).collect(),
            OffspringPreset::Poisson1 => {
                let mut v = Vec::new();
                let mut term = (-1.0f64).exp();
                for k in 0..25 {
                    v.push(term);
                    term /= (k + 1) as f64;
                }
                v
            }
        };
        OffspringSpec { preset: Some(p), pmf }
    }

    pub fn custom(pmf: Vec<f64>) -> Result<Self> {
        if pmf.is_empty() || pmf.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::invalid("pmf entries must be finite and nonnegative"));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("pmf sums to {total}, not 1")));
        }
        Ok(OffspringSpec { preset: None, pmf })
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "geometric" => Ok(Self::preset(OffspringPreset::Geometric)),
            "binary" => Ok(Self::preset(OffspringPreset::Binary)),
            "poisson1" | "poisson" => Ok(Self::preset(OffspringPreset::Poisson1)),
            other => Err(Error::invalid(format!(
                "unknown offspring preset `{other}` (expected geometric, binary or poisson1)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self.preset {
            Some(OffspringPreset::Geometric) => "geometric",
            Some(OffspringPreset::Binary) => "binary",
            Some(OffspringPreset::Poisson1) => "poisson1",
            None => "custom",
        }
    }

    pub fn preset_kind(&self) -> Option<OffspringPreset> {
        self.preset
    }

    pub fn p(&self, k: usize) -> f64 {
        self.pmf.get(k).copied().unwrap_or(0.0)
    }

    pub fn mean(&self) -> f64 {
        match self.preset {
            Some(_) => 1.0,
            None => self.pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum(),
        }
    }

    pub fn variance(&self) -> f64 {
        match self.preset {
            Some(OffspringPreset::Geometric) => 2.0,
            Some(_) => 1.0,
            None => {
                let m = self.mean();
                self.pmf.iter().enumerate().map(|(k, p)| (k as f64 - m).powi(2) * p).sum()
            }
        }
    }

    pub fn is_critical(&self) -> bool {
        (self.mean() - 1.0).abs() < 1e-9
    }
}

/// Child counts c_1..c_n i.i.d. from `spec` conditioned on Σc = n − 1.
fn conditioned_child_counts<R: Rng + ?Sized>(spec: &OffspringSpec, n: usize, rng: &mut R) -> Result<Vec<u32>> {
    let mut c = vec![0u32; n];
    match spec.preset {
        // i.i.d. Poisson given the sum is multinomial with equal cells
        Some(OffspringPreset::Poisson1) => {
            for _ in 0..n - 1 {
                c[rng.random_range(0..n)] += 1;
            }
        }
        // i.i.d. geometric given the sum is a uniform weak composition
        Some(OffspringPreset::Geometric) => {
            let slots = 2 * n - 2;
            let mut bar = vec![false; slots];
            for i in index::sample(rng, slots, n - 1) {
                bar[i] = true;
            }
            let mut part = 0;
            for b in bar {
                if b {
                    part += 1;
                } else {
                    c[part] += 1;
                }
            }
        }
        Some(OffspringPreset::Binary) => {
            if n % 2 == 0 {
                return Err(Error::Inadmissible(format!(
                    "binary trees have an odd number of vertices; n = {n} has probability 0"
                )));
            }
            for i in index::sample(rng, n, (n - 1) / 2) {
                c[i] = 2;
            }
        }
        None => {
            let dist = WeightedIndex::new(&spec.pmf).map_err(|e| Error::invalid(e.to_string()))?;
            let tries = 1000 + 20_000_000 / n;
            let mut ok = false;
            for _ in 0..tries {
                let mut sum = 0usize;
                for x in c.iter_mut() {
                    *x = dist.sample(rng) as u32;
                    sum += *x as usize;
                }
                if sum == n - 1 {
                    ok = true;
                    break;
                }
            }
            if !ok {
                return Err(Error::Inadmissible(format!(
                    "no child sequence summing to {} found in {tries} attempts; n = {n} looks inadmissible",
                    n - 1
                )));
            }
        }
    }
    Ok(c)
}

/// Rotates a sequence with Σ(c_i − 1) = −1 to start just after the first
/// minimum of its partial sums, giving the unique rotation whose walk stays
/// ≥ 0 until its last step.
pub fn cycle_lemma_rotate(c: &[u32]) -> Vec<u32> {
    let mut s = 0i64;
    let (mut min, mut arg) = (i64::MAX, 0);
    for (i, &x) in c.iter().enumerate() {
        s += x as i64 - 1;
        if s < min {
            min = s;
            arg = i + 1;
        }
    }
    let k = arg % c.len();
    c[k..].iter().chain(&c[..k]).copied().collect()
}

/// A Bienaymé tree with offspring law `spec` conditioned to have `n`
/// vertices.
pub fn bienayme_conditioned<R: Rng + ?Sized>(spec: &OffspringSpec, n: usize, rng: &mut R) -> Result<RootedOrderedTree> {
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    let c = conditioned_child_counts(spec, n, rng)?;
    let c = cycle_lemma_rotate(&c);
    let mut q = Vec::with_capacity(n + 1);
    q.push(1i64);
    for &x in &c {
        q.push(q[q.len() - 1] + x as i64 - 1);
    }
    tree_from_dfq(&DiscreteExcursion::new_unchecked(q, Flavor::Dfq))
}

/// Uniform Dyck path with `m` up-steps (contour flavor, length 2m).
pub fn srw_excursion<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Result<DiscreteExcursion> {
    if m == 0 {
        return Err(Error::invalid("need at least one half-step"));
    }
    Ok(DiscreteExcursion::new_unchecked(dyck_values(m, rng), Flavor::Contour))
}

fn dyck_values<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<i64> {
    // m ups and m + 1 downs in uniform order; rotate after the first
    // minimum and drop the final down-step
    let len = 2 * m + 1;
    let mut up = vec![false; len];
    for i in index::sample(rng, len, m) {
        up[i] = true;
    }
    let steps: Vec<u32> = up.iter().map(|&u| if u { 2 } else { 0 }).collect();
    let rotated = cycle_lemma_rotate(&steps);
    let mut e = Vec::with_capacity(2 * m + 1);
    let mut h = 0i64;
    e.push(0);
    for &x in &rotated[..2 * m] {
        h += x as i64 - 1;
        e.push(h);
    }
    e
}

/// Area of a Dyck path with `m` up-steps drawn from `rng`, without storing
/// the path.
pub(crate) fn dyck_area<R: Rng + ?Sized>(m: usize, rng: &mut R) -> f64 {
    dyck_values(m, rng).iter().map(|&v| v as f64).sum()
}

/// Uniform labelled tree on `[n]` rooted at label 1: a coding word whose
/// first letter is the root.
pub fn uniform_tree_rooted_at_one<R: Rng + ?Sized>(n: usize, rng: &mut R) -> LabelledRootedTree {
    if n == 1 {
        return LabelledRootedTree::from_parent_labels(&[None]).expect("singleton");
    }
    let mut word = Vec::with_capacity(n - 1);
    word.push(1u32);
    word.extend((2..n).map(|_| rng.random_range(1..=n as u32)));
    decode(&CodingWord::new(word).expect("letters in range"))
}

/// a(T) for a tree rooted at label 1 explored with children in label order.
pub fn depth_first_area(t: &LabelledRootedTree) -> u64 {
    crate::graph_core::area(&dfq_of(t.tree()))
}

fn ln_binom(a: u64, s: usize) -> f64 {
    if (a as usize) < s {
        return f64::NEG_INFINITY;
    }
    ln_gamma(a as f64 + 1.0) - ln_gamma(s as f64 + 1.0) - ln_gamma((a - s as u64) as f64 + 1.0)
}

/// Effective-sample-size diagnostics of a weighted pool.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PoolDiagnostics {
    pub exact: bool,
    pub pool_size: usize,
    pub effective_sample_size: f64,
    pub max_weight_share: f64,
    /// Set when the effective sample size is below the requested number of
    /// draws, i.e. resampled draws are likely to repeat.
    pub exhausted: bool,
}

/// Default pool size as a multiple of the requested draws.
pub const POOL_FACTOR: usize = 64;

/// Draws trees T on `[n]` (rooted at 1) with probability ∝ C(a(T), s).
/// For n ≤ 8 the law is tabulated exactly; otherwise a pool of uniform
/// trees is resampled by weight, each pool tree regenerated from its own
/// seed when drawn.
pub struct AreaBiasedSampler {
    n: usize,
    s: usize,
    /// Coding words (exact mode) or seeds (pool mode) behind each weight.
    keys: Vec<u64>,
    cumulative: Vec<f64>,
    exact: bool,
    diagnostics: PoolDiagnostics,
}

impl AreaBiasedSampler {
    pub fn new<R: Rng + ?Sized>(n: usize, s: usize, draws: usize, rng: &mut R) -> Result<Self> {
        Self::with_pool_factor(n, s, draws, POOL_FACTOR, rng)
    }

    pub fn with_pool_factor<R: Rng + ?Sized>(
        n: usize,
        s: usize,
        draws: usize,
        factor: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n must be positive"));
        }
        let max_area = (n as u64 - 1) * (n as u64).saturating_sub(2) / 2;
        if s as u64 > max_area {
            return Err(Error::invalid(format!(
                "no connected graph on {n} vertices has surplus {s} (max {max_area})"
            )));
        }
        let exact = n <= ENUMERATION_LIMIT;
        let (keys, areas): (Vec<u64>, Vec<u64>) = if exact {
            // words 1 w_2 … w_{n−1}, indexed in base n
            let count = (n as u64).pow(n.saturating_sub(2) as u32);
            (0..count).map(|k| (k, depth_first_area(&word_tree(n, k)))).unzip()
        } else {
            let size = factor.max(1) * draws.max(1);
            let seeds: Vec<u64> = (0..size).map(|_| rng.random()).collect();
            let areas = seeds
                .iter()
                .map(|&seed| depth_first_area(&seeded_tree(n, seed)))
                .collect();
            (seeds, areas)
        };
        let lw: Vec<f64> = areas.iter().map(|&a| ln_binom(a, s)).collect();
        let max = lw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return Err(Error::Pool(format!(
                "every pool tree has area below s = {s}; increase the pool size"
            )));
        }
        let w: Vec<f64> = lw.iter().map(|&l| (l - max).exp()).collect();
        let total: f64 = w.iter().sum();
        let sq: f64 = w.iter().map(|x| x * x).sum();
        let ess = total * total / sq;
        let mut cumulative = Vec::with_capacity(w.len());
        let mut acc = 0.0;
        for x in &w {
            acc += x;
            cumulative.push(acc);
        }
        let diagnostics = PoolDiagnostics {
            exact,
            pool_size: w.len(),
            effective_sample_size: ess,
            max_weight_share: 1.0 / total,
            exhausted: !exact && ess < draws as f64,
        };
        Ok(AreaBiasedSampler {
            n,
            s,
            keys,
            cumulative,
            exact,
            diagnostics,
        })
    }

    pub fn diagnostics(&self) -> &PoolDiagnostics {
        &self.diagnostics
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn sample_tree<R: Rng + ?Sized>(&self, rng: &mut R) -> LabelledRootedTree {
        let total = *self.cumulative.last().expect("nonempty pool");
        let u = rng.random::<f64>() * total;
        let i = self.cumulative.partition_point(|&c| c <= u).min(self.keys.len() - 1);
        if self.exact {
            word_tree(self.n, self.keys[i])
        } else {
            seeded_tree(self.n, self.keys[i])
        }
    }

    /// Uniform graph in 𝒢_n^s: an area-biased depth-first tree plus a
    /// uniform s-subset of its mark slots.
    pub fn sample_graph<R: Rng + ?Sized>(&self, rng: &mut R) -> ConnectedGraph {
        let t = self.sample_tree(rng);
        decorate(&t, self.s, rng).expect("tree area is at least s")
    }
}

fn word_tree(n: usize, mut k: u64) -> LabelledRootedTree {
    if n == 1 {
        return LabelledRootedTree::from_parent_labels(&[None]).expect("singleton");
    }
    let mut word = vec![1u32];
    for _ in 2..n {
        word.push((k % n as u64) as u32 + 1);
        k /= n as u64;
    }
    decode(&CodingWord::new(word).expect("in range"))
}

fn seeded_tree(n: usize, seed: u64) -> LabelledRootedTree {
    let mut rng = StreamRng::seed_from_u64(seed);
    uniform_tree_rooted_at_one(n, &mut rng)
}

/// Adds `s` surplus edges at uniformly chosen mark slots of `t` (which must
/// be rooted at label 1).
pub fn decorate<R: Rng + ?Sized>(t: &LabelledRootedTree, s: usize, rng: &mut R) -> Result<ConnectedGraph> {
    if t.root_label() != 1 {
        return Err(Error::invalid("the depth-first tree must be rooted at label 1"));
    }
    let q = dfq_of(t.tree());
    let a = crate::graph_core::area(&q) as usize;
    if a < s {
        return Err(Error::invalid(format!("tree area {a} is below s = {s}")));
    }
    let mut picks: Vec<usize> = index::sample(rng, a, s).into_vec();
    picks.sort_unstable();
    let qs = q.values();
    let mut marks = BTreeSet::new();
    let (mut step, mut before) = (0usize, 0usize);
    for p in picks {
        while before + (qs[step] - 1) as usize <= p {
            before += (qs[step] - 1) as usize;
            step += 1;
        }
        marks.insert((step as u32, (p - before + 1) as u32));
    }
    let order: Vec<u32> = t.tree().dfs_order().iter().map(|&v| v as u32 + 1).collect();
    marked_dfq_to_graph(&MarkedDfq::new(q, order, marks)?)
}

pub fn area_biased_tree<R: Rng + ?Sized>(n: usize, s: usize, rng: &mut R) -> Result<LabelledRootedTree> {
    Ok(AreaBiasedSampler::new(n, s, 1, rng)?.sample_tree(rng))
}

pub fn uniform_graph_fixed_surplus<R: Rng + ?Sized>(n: usize, s: usize, rng: &mut R) -> Result<ConnectedGraph> {
    Ok(AreaBiasedSampler::new(n, s, 1, rng)?.sample_graph(rng))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ComponentStat {
    pub size: usize,
    pub surplus: usize,
}

/// Components sorted by decreasing (size, surplus).
pub fn sort_components(c: &mut [ComponentStat]) {
    c.sort_unstable_by(|a, b| b.cmp(a));
}

/// A simple graph on `[n]` split into components.
#[derive(Clone, Debug)]
pub struct GraphSample {
    pub n: usize,
    pub edges: Vec<(u32, u32)>,
    /// Sorted by decreasing (size, surplus).
    pub components: Vec<ComponentStat>,
    /// Member labels of each component, increasing, aligned with `components`.
    pub members: Vec<Vec<u32>>,
}

impl GraphSample {
    pub fn from_edges(n: usize, edges: Vec<(u32, u32)>) -> Self {
        let mut parent: Vec<u32> = (0..n as u32).collect();
        fn find(p: &mut [u32], mut v: u32) -> u32 {
            while p[v as usize] != v {
                p[v as usize] = p[p[v as usize] as usize];
                v = p[v as usize];
            }
            v
        }
        for &(a, b) in &edges {
            let (x, y) = (find(&mut parent, a - 1), find(&mut parent, b - 1));
            if x != y {
                parent[x.max(y) as usize] = x.min(y);
            }
        }
        let mut root_index = vec![u32::MAX; n];
        let mut members: Vec<Vec<u32>> = Vec::new();
        for v in 0..n as u32 {
            let r = find(&mut parent, v) as usize;
            if root_index[r] == u32::MAX {
                root_index[r] = members.len() as u32;
                members.push(Vec::new());
            }
            members[root_index[r] as usize].push(v + 1);
        }
        let mut edge_count = vec![0usize; members.len()];
        for &(a, _) in &edges {
            edge_count[root_index[find(&mut parent, a - 1) as usize] as usize] += 1;
        }
        let mut order: Vec<usize> = (0..members.len()).collect();
        let stat = |i: usize| ComponentStat {
            size: members[i].len(),
            surplus: edge_count[i] + 1 - members[i].len(),
        };
        order.sort_by(|&a, &b| stat(b).cmp(&stat(a)).then(members[a][0].cmp(&members[b][0])));
        let components = order.iter().map(|&i| stat(i)).collect();
        let members = order.into_iter().map(|i| std::mem::take(&mut members[i])).collect();
        GraphSample {
            n,
            edges,
            components,
            members,
        }
    }

    /// Component `k` relabelled by rank of its member labels.
    pub fn component_graph(&self, k: usize) -> ConnectedGraph {
        let m = &self.members[k];
        let rank = |l: u32| m.binary_search(&l).ok().map(|r| r as u32 + 1);
        let edges: Vec<(u32, u32)> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| Some((rank(a)?, rank(b)?)))
            .collect();
        ConnectedGraph::from_edges(m.len(), &edges).expect("component is connected")
    }
}

/// G(n, p) parameters; the critical window is p = 1/n + λ n^{−4/3}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErParams {
    pub n: usize,
    pub p: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

impl ErParams {
    pub fn critical(n: usize, lambda: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n must be positive"));
        }
        let nf = n as f64;
        let p = 1.0 / nf + lambda * nf.powf(-4.0 / 3.0);
        Self::check(n, p)?;
        Ok(ErParams { n, p, lambda: Some(lambda) })
    }

    pub fn with_p(n: usize, p: f64) -> Result<Self> {
        Self::check(n, p)?;
        Ok(ErParams { n, p, lambda: None })
    }

    fn check(n: usize, p: f64) -> Result<()> {
        if n == 0 {
            return Err(Error::invalid("n must be positive"));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!("edge probability {p} outside [0, 1]")));
        }
        Ok(())
    }
}

/// Erdős–Rényi graph with i.i.d. Bernoulli(p) edges, generated by
/// geometric skipping over the pairs in lexicographic order.
pub fn er_graph<R: Rng + ?Sized>(params: &ErParams, rng: &mut R) -> GraphSample {
    let (n, p) = (params.n, params.p);
    let mut edges = Vec::new();
    if p > 0.0 && n >= 2 {
        let total = (n as f64) * (n as f64 - 1.0) / 2.0;
        let lq = (1.0 - p).ln();
        let (mut u, mut v) = (0usize, 0usize);
        loop {
            let r: f64 = 1.0 - rng.random::<f64>();
            let skip = if p >= 1.0 { 0.0 } else { (r.ln() / lq).floor().min(total) };
            v += 1 + skip as usize;
            while u + 1 < n && v >= n {
                v = v - n + u + 2;
                u += 1;
            }
            if u + 1 >= n {
                break;
            }
            edges.push((u as u32 + 1, v as u32 + 1));
        }
    }
    GraphSample::from_edges(n, edges)
}

/// Component sizes and surpluses from the depth-first exploration chain:
/// with stack size q at step i, Bin(n − i − q, p) new vertices are found
/// and Bin(q − 1, p) surplus edges close onto the stack.
pub fn er_explore_markov<R: Rng + ?Sized>(params: &ErParams, rng: &mut R) -> Vec<ComponentStat> {
    let (n, p) = (params.n, params.p);
    let mut out = Vec::new();
    let mut q = 0usize;
    let (mut size, mut surplus) = (0usize, 0usize);
    for i in 0..n {
        if q == 0 {
            q = 1;
        }
        let fresh = binomial((n - i - q) as u64, p, rng) as usize;
        surplus += binomial(q as u64 - 1, p, rng) as usize;
        size += 1;
        q = q - 1 + fresh;
        if q == 0 {
            out.push(ComponentStat { size, surplus });
            size = 0;
            surplus = 0;
        }
    }
    sort_components(&mut out);
    out
}

fn binomial<R: Rng + ?Sized>(trials: u64, p: f64, rng: &mut R) -> u64 {
    if trials == 0 || p == 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return trials;
    }
    Binomial::new(trials, p).expect("valid binomial").sample(rng)
}

/// X_t = σ B_t + λ t − c t², reflected at its running minimum, with marks
/// at rate `mark_rate`·R_t.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LimitParams {
    pub sigma: f64,
    pub lambda: f64,
    pub curvature: f64,
    pub mark_rate: f64,
}

impl LimitParams {
    /// B^λ_t = B_t + λt − t²/2.
    pub fn erdos_renyi(lambda: f64) -> Self {
        LimitParams {
            sigma: 1.0,
            lambda,
            curvature: 0.5,
            mark_rate: 1.0,
        }
    }

    /// B̃_t = √(β/μ) B_t − (β/2μ²) t². B̃ tracks unpaired half-edges, each
    /// closing onto the stack with probability ≈ 1/(μn) per pairing, so
    /// marks arrive at rate R_t/μ.
    pub fn degree_model(d: &DegreeModelParams) -> Self {
        let (mu, beta) = (d.mu(), d.beta());
        LimitParams {
            sigma: (beta / mu).sqrt(),
            lambda: 0.0,
            curvature: beta / (2.0 * mu * mu),
            mark_rate: 1.0 / mu,
        }
    }

    pub fn drift(&self, t: f64) -> f64 {
        self.lambda * t - self.curvature * t * t
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Excursion {
    pub start: f64,
    pub length: f64,
    pub marks: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReflectedPath {
    pub dt: f64,
    /// The unreflected process on the grid t_k = k·dt.
    pub x: Vec<f64>,
    /// R = X − running minimum of X.
    pub r: Vec<f64>,
    pub marks: Vec<f64>,
    /// Completed excursions of R above 0 no shorter than 2·dt, by
    /// decreasing length.
    pub excursions: Vec<Excursion>,
}

pub fn reflected_limit_process<R: Rng + ?Sized>(
    params: &LimitParams,
    horizon: f64,
    dt: f64,
    rng: &mut R,
) -> Result<ReflectedPath> {
    let steps = grid_steps(horizon, dt)?;
    let noise: Vec<f64> = (0..steps).map(|_| StandardNormal.sample(rng)).collect();
    reflected_with_noise(params, horizon, dt, &noise, rng)
}

fn grid_steps(horizon: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !(horizon > 0.0) || !dt.is_finite() || !horizon.is_finite() {
        return Err(Error::invalid("horizon and dt must be positive"));
    }
    let steps = (horizon / dt).round() as usize;
    if steps == 0 || steps > 500_000_000 {
        return Err(Error::invalid("horizon/dt gives an unusable grid"));
    }
    Ok(steps)
}

/// As [`reflected_limit_process`] but with the standard-normal increments
/// supplied by the caller (one per step); `rng` only drives the marks.
pub fn reflected_with_noise<R: Rng + ?Sized>(
    params: &LimitParams,
    horizon: f64,
    dt: f64,
    noise: &[f64],
    rng: &mut R,
) -> Result<ReflectedPath> {
    let steps = grid_steps(horizon, dt)?;
    if noise.len() < steps {
        return Err(Error::invalid(format!("need {steps} noise values, got {}", noise.len())));
    }
    let sd = params.sigma * dt.sqrt();
    let mut x = Vec::with_capacity(steps + 1);
    let mut r = Vec::with_capacity(steps + 1);
    x.push(0.0);
    r.push(0.0);
    let (mut b, mut min) = (0.0f64, 0.0f64);
    for k in 1..=steps {
        b += sd * noise[k - 1];
        let v = b + params.drift(k as f64 * dt);
        min = min.min(v);
        x.push(v);
        r.push(v - min);
    }
    let mut marks = Vec::new();
    for k in 0..steps {
        let rate = params.mark_rate * r[k] * dt;
        if rate > 0.0 {
            let count = rand_distr::Poisson::new(rate).expect("positive rate").sample(rng) as usize;
            for _ in 0..count {
                marks.push((k as f64 + rng.random::<f64>()) * dt);
            }
        }
    }
    marks.sort_by(f64::total_cmp);
    let mut excursions = Vec::new();
    let mut start = 0usize;
    for k in 1..=steps {
        if r[k] <= 0.0 {
            if k - start >= 2 {
                let (t0, t1) = (start as f64 * dt, k as f64 * dt);
                let lo = marks.partition_point(|&m| m < t0);
                let hi = marks.partition_point(|&m| m < t1);
                excursions.push(Excursion {
                    start: t0,
                    length: t1 - t0,
                    marks: hi - lo,
                });
            }
            start = k;
        }
    }
    excursions.sort_by(|a, b| b.length.total_cmp(&a.length).then(a.start.total_cmp(&b.start)));
    Ok(ReflectedPath {
        dt,
        x,
        r,
        marks,
        excursions,
    })
}

/// Law of a strictly positive integer degree D.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeModelParams {
    /// (degree, probability) atoms.
    pub law: Vec<(u32, f64)>,
}

impl DegreeModelParams {
    pub fn new(law: Vec<(u32, f64)>) -> Result<Self> {
        if law.is_empty() {
            return Err(Error::invalid("empty degree law"));
        }
        if law.iter().any(|&(d, p)| d == 0 || !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::invalid("degrees must be ≥ 1 with nonnegative probabilities"));
        }
        let total: f64 = law.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("degree law sums to {total}")));
        }
        let p2: f64 = law.iter().filter(|a| a.0 == 2).map(|a| a.1).sum();
        if p2 >= 1.0 - 1e-12 {
            return Err(Error::invalid("P(D = 2) must be below 1"));
        }
        Ok(DegreeModelParams { law })
    }

    /// D ∈ {1, 3} with P(D = 3) = 1/4, which solves θ = 1.
    pub fn two_atom_critical() -> Self {
        DegreeModelParams {
            law: vec![(1, 0.75), (3, 0.25)],
        }
    }

    fn moment(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.law.iter().map(|&(d, p)| f(d as f64) * p).sum()
    }

    pub fn mu(&self) -> f64 {
        self.moment(|d| d)
    }

    pub fn theta(&self) -> f64 {
        self.moment(|d| d * (d - 1.0)) / self.mu()
    }

    pub fn beta(&self) -> f64 {
        self.moment(|d| d * (d - 1.0) * (d - 2.0))
    }

    pub fn is_critical(&self) -> bool {
        (self.theta() - 1.0).abs() < 1e-9
    }
}

/// Maximum configuration-model attempts before giving up on simplicity.
pub const MAX_PAIRING_ATTEMPTS: usize = 1000;

#[derive(Clone, Debug)]
pub struct DegreeModelSample {
    /// Realized (parity-fixed) degrees, vertex `v` at index `v − 1`.
    pub degrees: Vec<u32>,
    pub graph: GraphSample,
    /// Pairings rejected before a simple graph was found.
    pub rejections: usize,
}

/// I.i.d. degrees (vertex n loses one if the sum is odd), then a uniform
/// simple graph with those degrees by rejection on the configuration model.
pub fn degree_model_graph<R: Rng + ?Sized>(
    params: &DegreeModelParams,
    n: usize,
    rng: &mut R,
) -> Result<DegreeModelSample> {
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    let dist = WeightedIndex::new(params.law.iter().map(|a| a.1)).map_err(|e| Error::invalid(e.to_string()))?;
    let mut degrees: Vec<u32> = (0..n).map(|_| params.law[dist.sample(rng)].0).collect();
    if degrees.iter().map(|&d| d as u64).sum::<u64>() % 2 == 1 {
        degrees[n - 1] -= 1;
    }
    let edges = simple_pairing(&degrees, rng)?;
    let rejections = edges.1;
    Ok(DegreeModelSample {
        degrees,
        graph: GraphSample::from_edges(n, edges.0),
        rejections,
    })
}

/// Uniform simple graph with the given degrees (rejection on uniform
/// pairings of half-edges).
pub fn simple_pairing<R: Rng + ?Sized>(degrees: &[u32], rng: &mut R) -> Result<(Vec<(u32, u32)>, usize)> {
    let mut half: Vec<u32> = Vec::new();
    for (v, &d) in degrees.iter().enumerate() {
        half.extend(std::iter::repeat_n(v as u32 + 1, d as usize));
    }
    if half.len() % 2 == 1 {
        return Err(Error::invalid("degree sum must be even"));
    }
    for attempt in 0..MAX_PAIRING_ATTEMPTS {
        half.shuffle(rng);
        let mut edges: Vec<(u32, u32)> = half.chunks_exact(2).map(|c| (c[0].min(c[1]), c[0].max(c[1]))).collect();
        if edges.iter().any(|e| e.0 == e.1) {
            continue;
        }
        edges.sort_unstable();
        if edges.windows(2).any(|w| w[0] == w[1]) {
            continue;
        }
        return Ok((edges, attempt));
    }
    Err(Error::invalid(format!(
        "no simple graph realized these degrees in {MAX_PAIRING_ATTEMPTS} pairings"
    )))
}
