//! The two finite constructions of fixed-surplus continuum graphs: a cubic
//! kernel with Dirichlet edge lengths plus line-breaking, and a tree coded
//! by an area-tilted excursion with surplus points glued to ancestors.

use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Exp1, Gamma};

use super::segment::{NodeId, NodeKind, SegmentGraph, SegmentId};
use crate::error::{Error, Result};
use crate::graph_core::{kernel_law, MultiGraph};
use crate::linebreak::{attach_line, poisson_rate_t_arrivals, LineBreakSchedule};
use crate::path_codes::RealExcursion;
use crate::rng::StreamRng;
use crate::samplers::{dyck_area, srw_excursion, PoolDiagnostics, POOL_FACTOR};

#[derive(Clone, Debug)]
pub struct ContinuumGraph {
    pub graph: SegmentGraph,
    pub kernel: MultiGraph,
    /// Total core length.
    pub x: f64,
    /// Lengths X·Y_i of the 3s − 3 core segments, in kernel edge order.
    pub core_lengths: Vec<f64>,
    pub schedule: LineBreakSchedule,
    /// Endpoints of the attached segments.
    pub attached: Vec<NodeId>,
}

impl ContinuumGraph {
    /// Kernel shape at s = 2: "triple" (theta graph) or "dumbbell".
    pub fn kernel_name(&self) -> String {
        kernel_name(&self.kernel)
    }
}

pub fn kernel_name(k: &MultiGraph) -> String {
    if k.n() == 2 && k.loop_count() == 0 {
        "triple".into()
    } else if k.n() == 2 {
        "dumbbell".into()
    } else {
        let mut rows: Vec<String> = k.edges().map(|(u, v, m)| format!("{u}-{v}x{m}")).collect();
        rows.sort();
        rows.join(",")
    }
}

/// Kernel from the normalized kernel law, core length X with
/// X² ~ Gamma((3s − 2)/2, scale 2), Dirichlet(1, …, 1) edge proportions,
/// then `k` line-breaking attachments with arrivals started from X.
pub fn continuum_graph_construct<R: Rng + ?Sized>(s: usize, k: usize, rng: &mut R) -> Result<ContinuumGraph> {
    if s < 2 {
        return Err(Error::invalid("the kernel construction needs s ≥ 2"));
    }
    let law = kernel_law(s)?;
    let weights: Vec<f64> = law.iter().map(|(_, w)| *w.numer() as f64 / *w.denom() as f64).collect();
    let pick = WeightedIndex::new(&weights).map_err(|e| Error::invalid(e.to_string()))?;
    let kernel = law[pick.sample(rng)].0.clone();

    let shape = (3 * s - 2) as f64 / 2.0;
    let x = Gamma::new(shape, 2.0).expect("positive shape").sample(rng).sqrt();
    let m = 3 * s - 3;
    let e: Vec<f64> = (0..m).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = e.iter().sum();
    let core_lengths: Vec<f64> = e.iter().map(|v| x * v / total).collect();

    let mut graph = SegmentGraph::new();
    let nodes: Vec<NodeId> = (0..kernel.n()).map(|_| graph.add_node(NodeKind::Kernel)).collect();
    let mut i = 0;
    for (u, v, mult) in kernel.edges() {
        for _ in 0..mult {
            graph.add_segment(nodes[u], nodes[v], core_lengths[i])?;
            i += 1;
        }
    }
    debug_assert_eq!(i, m);
    let schedule = poisson_rate_t_arrivals(k, x, rng)?;
    let attached = schedule
        .segment_lengths()
        .into_iter()
        .enumerate()
        .map(|(j, len)| attach_line(&mut graph, len, NodeKind::Leaf(j as u32 + 1), rng))
        .collect();
    Ok(ContinuumGraph {
        graph,
        kernel,
        x,
        core_lengths,
        schedule,
        attached,
    })
}

/// ẽ^s on [0, 1] together with the pool diagnostics of its draw.
#[derive(Clone, Debug)]
pub struct TiltedExcursionSample {
    pub excursion: RealExcursion,
    pub s: usize,
    pub diagnostics: PoolDiagnostics,
}

/// Draws ẽ^s approximants: Dyck paths with `m` up-steps rescaled to
/// [0, 1] by C(2m·t)/√(2m), resampled from a seeded pool with weight
/// (area)^s.
pub struct TiltedExcursionSampler {
    m: usize,
    s: usize,
    seeds: Vec<u64>,
    cumulative: Vec<f64>,
    diagnostics: PoolDiagnostics,
}

impl TiltedExcursionSampler {
    pub fn new<R: Rng + ?Sized>(s: usize, m: usize, draws: usize, rng: &mut R) -> Result<Self> {
        Self::with_pool_factor(s, m, draws, POOL_FACTOR, rng)
    }

    pub fn with_pool_factor<R: Rng + ?Sized>(
        s: usize,
        m: usize,
        draws: usize,
        factor: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("grid size must be positive"));
        }
        // s = 0 needs no pool: every draw is a fresh excursion
        let size = if s == 0 { 1 } else { factor.max(1) * draws.max(1) };
        let seeds: Vec<u64> = (0..size).map(|_| rng.random()).collect();
        let norm = (2.0 * m as f64).powf(1.5);
        let lw: Vec<f64> = if s == 0 {
            vec![0.0]
        } else {
            seeds
                .iter()
                .map(|&seed| {
                    let a = dyck_area(m, &mut StreamRng::seed_from_u64(seed)) / norm;
                    s as f64 * a.ln()
                })
                .collect()
        };
        let max = lw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = lw.iter().map(|l| (l - max).exp()).collect();
        let total: f64 = w.iter().sum();
        if !(total > 0.0) {
            return Err(Error::Pool("pool has zero total weight".into()));
        }
        let ess = total * total / w.iter().map(|x| x * x).sum::<f64>();
        let mut acc = 0.0;
        let cumulative = w
            .iter()
            .map(|x| {
                acc += x;
                acc
            })
            .collect();
        Ok(TiltedExcursionSampler {
            m,
            s,
            seeds,
            cumulative,
            diagnostics: PoolDiagnostics {
                exact: s == 0,
                pool_size: size,
                effective_sample_size: ess,
                max_weight_share: 1.0 / total,
                exhausted: s > 0 && ess < draws as f64,
            },
        })
    }

    pub fn diagnostics(&self) -> &PoolDiagnostics {
        &self.diagnostics
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> TiltedExcursionSample {
        let path = if self.s == 0 {
            srw_excursion(self.m, rng).expect("m > 0")
        } else {
            let total = *self.cumulative.last().unwrap();
            let u = rng.random::<f64>() * total;
            let i = self.cumulative.partition_point(|&c| c <= u).min(self.seeds.len() - 1);
            srw_excursion(self.m, &mut StreamRng::seed_from_u64(self.seeds[i])).expect("m > 0")
        };
        let scale = 1.0 / (2.0 * self.m as f64).sqrt();
        let values = path.values().iter().map(|&v| v as f64 * scale).collect();
        TiltedExcursionSample {
            excursion: RealExcursion::uniform(1.0, values).expect("Dyck path is an excursion"),
            s: self.s,
            diagnostics: self.diagnostics.clone(),
        }
    }
}

pub fn tilted_excursion<R: Rng + ?Sized>(s: usize, m: usize, rng: &mut R) -> Result<TiltedExcursionSample> {
    Ok(TiltedExcursionSampler::new(s, m, 1, rng)?.sample(rng))
}

/// e_x(t) = √x · e(t/x).
pub fn rescale_excursion(e: &RealExcursion, x: f64) -> Result<RealExcursion> {
    e.rescale(x)
}

/// The excursion tree of 2ẽ^s discretized at the grid, with s surplus
/// points glued to their ancestors.
#[derive(Clone, Debug)]
pub struct GluedGraph {
    pub graph: SegmentGraph,
    /// Node at each grid time.
    pub grid_nodes: Vec<NodeId>,
    /// (point at time x, ancestor at height y) pairs that were identified.
    pub identifications: Vec<(NodeId, NodeId)>,
    /// Largest height change between consecutive grid values: a bound on
    /// how far a glued point may sit from its ideal position.
    pub resolution: f64,
}

impl GluedGraph {
    /// A node at a uniform time (the mass measure, up to the grid).
    pub fn sample_mass_point<R: Rng + ?Sized>(&self, rng: &mut R) -> NodeId {
        self.grid_nodes[rng.random_range(0..self.grid_nodes.len())]
    }

    pub fn distance(&self, a: NodeId, b: NodeId) -> f64 {
        self.graph.distances_from(a)[b]
    }
}

struct TreeBuilder {
    g: SegmentGraph,
    height: Vec<f64>,
    /// Parent node and the segment (parent, node) in orientation a = parent.
    up: Vec<Option<(NodeId, SegmentId)>>,
}

impl TreeBuilder {
    fn node(&mut self, kind: NodeKind, h: f64, up: Option<(NodeId, SegmentId)>) -> NodeId {
        let v = self.g.add_node(kind);
        if self.height.len() <= v {
            self.height.resize(v + 1, 0.0);
            self.up.resize(v + 1, None);
        }
        self.height[v] = h;
        self.up[v] = up;
        v
    }

    /// Creates a node at height `h` on the segment above `child`.
    fn split_above(&mut self, child: NodeId, h: f64) -> NodeId {
        let (parent, seg) = self.up[child].expect("child has a parent");
        let offset = h - self.height[parent];
        if offset <= 0.0 {
            return parent;
        }
        if h >= self.height[child] {
            return child;
        }
        let m = self.g.split_segment(seg, offset, NodeKind::Branch);
        let lower = self.g.segments().len() - 1;
        if self.height.len() <= m {
            self.height.resize(m + 1, 0.0);
            self.up.resize(m + 1, None);
        }
        self.height[m] = h;
        self.up[m] = Some((parent, seg));
        self.up[child] = Some((m, lower));
        m
    }
}

/// Tree coded by the function `f` on its grid: one node per distinct
/// local value, branch points created where the path turns.
fn excursion_tree(f: &[f64]) -> (TreeBuilder, Vec<NodeId>) {
    let mut b = TreeBuilder {
        g: SegmentGraph::new(),
        height: Vec::new(),
        up: Vec::new(),
    };
    let root = b.node(NodeKind::Grid, 0.0, None);
    let mut stack = vec![root];
    let mut grid_nodes = Vec::with_capacity(f.len());
    grid_nodes.push(root);
    for k in 1..f.len() {
        let top = *stack.last().unwrap();
        let (prev, cur) = (b.height[top], f[k]);
        if cur > prev {
            let v = b.g.add_node(NodeKind::Grid);
            let seg = b.g.add_segment(top, v, cur - prev).expect("positive length");
            if b.height.len() <= v {
                b.height.resize(v + 1, 0.0);
                b.up.resize(v + 1, None);
            }
            b.height[v] = cur;
            b.up[v] = Some((top, seg));
            stack.push(v);
        } else if cur < prev {
            let mut child = stack.pop().unwrap();
            while b.height[*stack.last().unwrap()] > cur {
                child = stack.pop().unwrap();
            }
            let top = *stack.last().unwrap();
            if b.height[top] < cur {
                let m = b.split_above(child, cur);
                stack.push(m);
            }
        }
        grid_nodes.push(*stack.last().unwrap());
    }
    (b, grid_nodes)
}

/// Finite approximant of the fixed-surplus limit graph: the tree coded by
/// 2ẽ^s with `s` uniform points under 2ẽ^s glued to their ancestors.
/// Points are placed by choosing a grid time with probability ∝ 2ẽ^s and
/// a uniform height below it.
pub fn glue_surplus_points<R: Rng + ?Sized>(e: &TiltedExcursionSample, s: usize, rng: &mut R) -> Result<GluedGraph> {
    let f: Vec<f64> = e.excursion.values().iter().map(|v| 2.0 * v).collect();
    if s > 0 && f.iter().all(|&v| v == 0.0) {
        return Err(Error::invalid("cannot place points under a zero excursion"));
    }
    let resolution = f.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
    let (mut b, grid_nodes) = excursion_tree(&f);
    let mut pairs = Vec::with_capacity(s);
    if s > 0 {
        let pick = WeightedIndex::new(&f).map_err(|e| Error::invalid(e.to_string()))?;
        for _ in 0..s {
            let j = pick.sample(rng);
            let y = rng.random::<f64>() * f[j];
            let x_node = grid_nodes[j];
            let mut child = x_node;
            while let Some((parent, _)) = b.up[child] {
                if b.height[parent] <= y {
                    break;
                }
                child = parent;
            }
            let anc = if b.height[child] <= y { child } else { b.split_above(child, y) };
            pairs.push((x_node, anc));
        }
    }
    for &(a, c) in &pairs {
        b.g.identify(c, a);
    }
    Ok(GluedGraph {
        graph: b.g,
        grid_nodes,
        identifications: pairs,
        resolution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path_codes::ExcursionMetric;
    use crate::rng::{fan_out, stream};
    use crate::stats::{chi_square, ks_test, ReferenceDensity};

    #[test]
    fn kernel_construction_invariants() {
        let mut rng = stream(1, 0);
        for s in 2..=4 {
            for k in [0, 3] {
                let c = continuum_graph_construct(s, k, &mut rng).unwrap();
                assert_eq!(c.core_lengths.len(), 3 * s - 3);
                let sum: f64 = c.core_lengths.iter().sum();
                assert!((sum - c.x).abs() < 1e-9 * c.x.max(1.0));
                assert_eq!(c.graph.betti_number(), s);
                assert_eq!(c.graph.component_count(), 1);
                assert_eq!(c.attached.len(), k);
                let attached_len: f64 = c.schedule.segment_lengths().iter().sum();
                assert!((c.graph.total_length() - c.x - attached_len).abs() < 1e-9);
            }
        }
        assert!(continuum_graph_construct(1, 0, &mut rng).is_err());
    }

    #[test]
    fn s2_kernel_frequencies_and_core_length_law() {
        let draws = fan_out(2, 6000, |_, rng| {
            let c = continuum_graph_construct(2, 0, rng).unwrap();
            (c.kernel_name(), c.x)
        });
        let triple = draws.iter().filter(|d| d.0 == "triple").count() as u64;
        assert!(chi_square(&[triple, 6000 - triple], &[0.4, 0.6]).unwrap().p_value > 0.01);
        let xs: Vec<f64> = draws.iter().map(|d| d.1).collect();
        assert!(ks_test(&xs, |x| ReferenceDensity::CoreSize { s: 2 }.cdf(x)).unwrap().p_value > 0.01);
    }

    #[test]
    fn core_lengths_are_exchangeable() {
        // the first proportion Y_1 of Dirichlet(1,1,1) is Beta(1, 2):
        // P(Y_1 ≤ y) = 1 − (1 − y)², and likewise for the last one
        let ys = fan_out(3, 3000, |_, rng| {
            let c = continuum_graph_construct(2, 0, rng).unwrap();
            (c.core_lengths[0] / c.x, c.core_lengths[2] / c.x)
        });
        for pick in [0, 1] {
            let y: Vec<f64> = ys.iter().map(|p| if pick == 0 { p.0 } else { p.1 }).collect();
            let r = ks_test(&y, |v| 1.0 - (1.0 - v.clamp(0.0, 1.0)).powi(2)).unwrap();
            assert!(r.p_value > 0.01, "{pick}: {}", r.p_value);
        }
    }

    #[test]
    fn excursion_tree_distances_match_excursion_metric() {
        let mut rng = stream(4, 0);
        for _ in 0..10 {
            let e = tilted_excursion(0, 60, &mut rng).unwrap();
            let g = glue_surplus_points(&e, 0, &mut rng).unwrap();
            assert_eq!(g.graph.betti_number(), 0);
            assert_eq!(g.graph.component_count(), 1);
            let two = e.excursion.scale_values(2.0);
            let metric = ExcursionMetric::new(&two);
            let grid = two.grid().to_vec();
            for _ in 0..20 {
                let (i, j) = (rng.random_range(0..grid.len()), rng.random_range(0..grid.len()));
                let d = g.distance(g.grid_nodes[i], g.grid_nodes[j]);
                assert!((d - metric.distance(grid[i], grid[j])).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn glued_graph_has_surplus_s() {
        let mut rng = stream(5, 0);
        for s in 0..=3 {
            let sampler = TiltedExcursionSampler::new(s, 200, 5, &mut rng).unwrap();
            for _ in 0..5 {
                let e = sampler.sample(&mut rng);
                assert_eq!(e.excursion.zeta(), 1.0);
                let g = glue_surplus_points(&e, s, &mut rng).unwrap();
                assert_eq!(g.identifications.len(), s);
                // an identification of two distinct points adds a cycle;
                // a point glued to itself (y at its own height) adds none
                let distinct = g.identifications.iter().filter(|p| p.0 != p.1).count();
                assert_eq!(g.graph.betti_number(), distinct);
                assert_eq!(g.graph.component_count(), 1);
            }
        }
    }

    #[test]
    fn tilting_raises_mean_area() {
        let mean_area = |s: usize, seed: u64| {
            let mut rng = stream(seed, 0);
            let sampler = TiltedExcursionSampler::new(s, 300, 1500, &mut rng).unwrap();
            (0..1500).map(|_| sampler.sample(&mut rng).excursion.area()).sum::<f64>() / 1500.0
        };
        let (a0, a1, a2) = (mean_area(0, 6), mean_area(1, 7), mean_area(2, 8));
        assert!(a0 < a1 && a1 < a2, "{a0} {a1} {a2}");
        // E A = √(π/8) for the untilted excursion and E A² = 5/12; a Dyck
        // path with m up-steps falls short of the limit by about 1/√(2m)
        let bias = 1.0 / 600f64.sqrt();
        let ea = (std::f64::consts::PI / 8.0).sqrt();
        assert!((a0 + bias - ea).abs() < 0.02, "{a0}");
        assert!((a1 + bias - 5.0 / 12.0 / ea).abs() < 0.03, "{a1}");
    }

    #[test]
    fn rescale_identities() {
        let e = RealExcursion::uniform(1.0, vec![0.0, 1.0, 0.5, 2.0, 0.0]).unwrap();
        assert_eq!(rescale_excursion(&e, 1.0).unwrap(), e);
        let four = rescale_excursion(&e, 4.0).unwrap();
        let (m1, m4) = (ExcursionMetric::new(&e), ExcursionMetric::new(&four));
        assert!((m4.distance(0.25 * 4.0, 0.75 * 4.0) - 2.0 * m1.distance(0.25, 0.75)).abs() < 1e-12);
        let back = rescale_excursion(&four, 0.25).unwrap();
        for (a, b) in back.values().iter().zip(e.values()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(rescale_excursion(&e, 0.0).is_err());
    }
}
