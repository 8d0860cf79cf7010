//! Acceptance suite: one line per criterion, fixed seeds, stated scales.
//! Runs without the libtest harness so the lines always appear.

use std::collections::{BTreeMap, HashSet};
use std::time::Instant;

use scalelab::continuum_graph::{glue_surplus_points, sample_point, tilted_excursion};
use scalelab::error::Result;
use scalelab::graph_core::{
    core, depth_first_tree, enumerate_connected, enumerate_gns, graph_to_marked_dfq, kernel, marked_dfq_to_graph,
    tree_area, ConnectedGraph,
};
use scalelab::linebreak::{
    crt_linebreak, decode, encode, marchal_step, remy_step, root_distance_pmf, uniform_rooted_tree, CodingWord,
    GrowingTree,
};
use scalelab::path_codes::{ExcursionMetric, RealExcursion};
use scalelab::rng::{fan_out, stream};
use scalelab::samplers::{
    bienayme_conditioned, degree_model_graph, er_explore_markov, er_graph, reflected_limit_process, srw_excursion,
    AreaBiasedSampler, ComponentStat, DegreeModelParams, ErParams, LimitParams, OffspringPreset, OffspringSpec,
};
use scalelab::stats::{
    aligned_counts, chi_square, chi_square_two_sample, experiment_core_size, experiment_critical_er,
    experiment_degree_model, experiment_subtree_sizes, experiment_surplus_metric, CriticalErParams,
    DegreeExperimentParams, Report, Verdict, P_PASS,
};

/// Criteria that fail at the stated scale for a documented reason (see
/// the README). They are still run and reported.
const KNOWN_FAILURES: &[u32] = &[6];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// `name p=… PASS/FAIL` for a p-value check of a report.
fn p_check(r: &Report, name: &str) -> (bool, String) {
    let c = r.check(name).unwrap_or_else(|| panic!("report lacks check {name}"));
    let p = c.p_value.unwrap_or(f64::NAN);
    (c.verdict == Verdict::Pass, format!("{name} p={p:.4}"))
}

/// `name stat=… (threshold)` for a bounded-statistic check of a report.
fn stat_check(r: &Report, name: &str) -> (bool, String) {
    let c = r.check(name).unwrap_or_else(|| panic!("report lacks check {name}"));
    (c.verdict == Verdict::Pass, format!("{name} {:.4} ({})", c.statistic, c.threshold))
}

fn combine(parts: &[(bool, String)]) -> Outcome {
    outcome(
        parts.iter().all(|p| p.0),
        parts.iter().map(|p| p.1.as_str()).collect::<Vec<_>>().join(", "),
    )
}

fn all_words(n: usize) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 1..n {
        out = out
            .into_iter()
            .flat_map(|w: Vec<u32>| {
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

fn bijection() -> Result<Outcome> {
    let start = Instant::now();
    let mut ok = true;
    let mut sizes = Vec::new();
    for n in 1..=5usize {
        let mut images = HashSet::new();
        for w in all_words(n) {
            let t = decode(&CodingWord::new(w.clone())?);
            ok &= encode(&t).as_slice() == &w[..];
            images.insert(t);
        }
        ok &= images.len() == n.pow(n as u32 - 1);
        sizes.push(images.len());
    }
    let secs = start.elapsed().as_secs_f64();
    Ok(outcome(
        ok && secs < 10.0,
        format!("round trips exact, distinct images {sizes:?} = n^(n-1), {secs:.2}s (< 10s)"),
    ))
}

fn marked_dfq() -> Result<Outcome> {
    let start = Instant::now();
    let mut ok = true;
    let mut counts = Vec::new();
    for n in 1..=5usize {
        let all = enumerate_connected(n)?;
        for h in &all {
            let m = graph_to_marked_dfq(h);
            ok &= m.marks().len() == h.surplus();
            ok &= marked_dfq_to_graph(&m)? == *h;
        }
        let weighted: u64 = enumerate_gns(n, 0)?
            .iter()
            .map(|t| 1u64 << tree_area(&depth_first_tree(t).0))
            .sum();
        ok &= weighted as usize == all.len();
        counts.push(all.len());
    }
    let secs = start.elapsed().as_secs_f64();
    Ok(outcome(
        ok && secs < 60.0,
        format!("round trips exact, sum 2^a(T) = connected counts {counts:?}, {secs:.2}s (< 60s)"),
    ))
}

fn uniform_gns() -> Result<Outcome> {
    let all = enumerate_gns(4, 1)?;
    let mut rng = stream(3, 0);
    let sampler = AreaBiasedSampler::new(4, 1, 1, &mut rng)?;
    let mut counts = vec![0u64; all.len()];
    for _ in 0..100_000 {
        let g = sampler.sample_graph(&mut rng);
        counts[all.iter().position(|h| *h == g).expect("sample lies in the class")] += 1;
    }
    let r = chi_square(&counts, &vec![1.0; all.len()])?;
    Ok(outcome(
        all.len() == 15 && r.p_value > P_PASS,
        format!("{} graphs, chi-square p={:.4} at 1e5 draws", all.len(), r.p_value),
    ))
}

fn root_distance() -> Result<Outcome> {
    let n = 100;
    let depths = fan_out(4, 100_000, |_, rng| uniform_rooted_tree(n, rng).tree().depths()[0] as usize);
    let mut counts = vec![0u64; n];
    for d in depths {
        counts[d] += 1;
    }
    let probs: Vec<f64> = (0..n).map(|d| root_distance_pmf(n, d)).collect();
    let r = chi_square(&counts, &probs)?;
    Ok(outcome(r.p_value > P_PASS, format!("n=100, 1e5 trees, chi-square p={:.4}", r.p_value)))
}

fn rayleigh() -> Result<Outcome> {
    let r = experiment_subtree_sizes(10_000, 1, 10_000, 5)?;
    Ok(combine(&[p_check(&r, "s1_marginal")]))
}

fn core_size() -> Result<Outcome> {
    let one = experiment_core_size(2000, 1, 2000, 6)?;
    let two = experiment_core_size(2000, 2, 2000, 6)?;
    let mut o = combine(&[
        p_check(&one, "core_size").map_label("s=1 "),
        p_check(&two, "core_size").map_label("s=2 "),
        stat_check(&two, "kernel_triple_frequency").map_label("s=2 "),
    ]);
    // informational: the same samples against the exact finite-n laws
    let exact = [p_check(&one, "cycle_length_exact").1, p_check(&two, "kernel_triple_exact").1];
    o.detail += &format!(" | finite-n sampler checks: {}", exact.join(", "));
    Ok(o)
}

trait Label {
    fn map_label(self, prefix: &str) -> Self;
}

impl Label for (bool, String) {
    fn map_label(self, prefix: &str) -> Self {
        (self.0, format!("{prefix}{}", self.1))
    }
}

fn growth_shapes() -> Result<Outcome> {
    let draws = 60_000;
    let shapes = |marchal: bool, seed: u64| -> Vec<String> {
        fan_out(seed, draws, |_, rng| {
            let mut t = GrowingTree::initial();
            for _ in 0..3 {
                if marchal {
                    marchal_step(&mut t, 2.0, rng).expect("alpha in range");
                } else {
                    remy_step(&mut t, rng);
                }
            }
            t.shape()
        })
    };
    let remy = shapes(false, 7);
    let marchal = shapes(true, 17);
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for s in &remy {
        *counts.entry(s).or_default() += 1;
    }
    let c: Vec<u64> = counts.values().copied().collect();
    let uniform = chi_square(&c, &vec![1.0; c.len()])?;
    let (_, a, b) = aligned_counts(&remy, &marchal);
    let two = chi_square_two_sample(&a, &b)?;
    Ok(outcome(
        c.len() == 15 && uniform.p_value > P_PASS && two.p_value > P_PASS,
        format!(
            "{} shapes after 3 steps, uniform p={:.4}, Marchal(2) vs Remy p={:.4}",
            c.len(),
            uniform.p_value,
            two.p_value
        ),
    ))
}

fn exploration_chain() -> Result<Outcome> {
    let params = ErParams::critical(6, 0.0)?;
    let a: Vec<Vec<ComponentStat>> = fan_out(8, 100_000, |_, rng| er_graph(&params, rng).components);
    let b: Vec<Vec<ComponentStat>> = fan_out(18, 100_000, |_, rng| er_explore_markov(&params, rng));
    let (keys, ca, cb) = aligned_counts(&a, &b);
    let r = chi_square_two_sample(&ca, &cb)?;
    Ok(outcome(
        r.p_value > P_PASS,
        format!("n=6, {} joint (size, surplus) profiles, two-sample chi-square p={:.4}", keys.len(), r.p_value),
    ))
}

fn critical_er() -> Result<Report> {
    let p = CriticalErParams::new(25_000, 0.0, 2000);
    experiment_critical_er(&p, 9)
}

fn erdos_renyi_sizes(r: &Report) -> Outcome {
    combine(&[
        p_check(r, "size_scale_invariance"),
        stat_check(r, "size_vs_limit"),
        stat_check(r, "surplus_tv"),
    ])
}

fn metric_scaling(er: &Report) -> Result<Outcome> {
    let glued = experiment_surplus_metric(2000, 1, 2000, 2000, 10)?;
    Ok(combine(&[p_check(er, "distance_doubling"), p_check(&glued, "distance_vs_glued")]))
}

fn degree_model() -> Result<Outcome> {
    let p = DegreeExperimentParams::new(DegreeModelParams::two_atom_critical(), 25_000, 2000);
    let r = experiment_degree_model(&p, 11)?;
    Ok(combine(&[stat_check(&r, "size_vs_limit")]))
}

const EPS: f64 = 1e-9;

/// Symmetry, zero diagonal, triangle inequality; with `tree`, also the
/// four-point condition. Returns the number of quadruples checked.
fn check_metric(d: &[Vec<f64>], tree: bool) -> std::result::Result<usize, String> {
    let k = d.len();
    for i in 0..k {
        if d[i][i].abs() > EPS {
            return Err(format!("d(x,x) = {}", d[i][i]));
        }
        for j in 0..k {
            if (d[i][j] - d[j][i]).abs() > EPS || d[i][j] < 0.0 {
                return Err("asymmetric or negative".into());
            }
            for l in 0..k {
                if d[i][l] > d[i][j] + d[j][l] + EPS {
                    return Err("triangle inequality".into());
                }
            }
        }
    }
    let mut quads = 0;
    if tree {
        for a in 0..k {
            for b in a + 1..k {
                for c in b + 1..k {
                    for e in c + 1..k {
                        let mut s = [d[a][b] + d[c][e], d[a][c] + d[b][e], d[a][e] + d[b][c]];
                        s.sort_by(f64::total_cmp);
                        // the two largest pair sums agree in a tree metric
                        if s[2] - s[1] > EPS * (1.0 + s[2]) {
                            return Err("four-point condition".into());
                        }
                        quads += 1;
                    }
                }
            }
        }
    }
    Ok(quads)
}

fn metric_invariants() -> std::result::Result<String, String> {
    let mut quads = 0;
    let mut rng = stream(12, 0);
    for _ in 0..200 {
        let t = crt_linebreak(20, &mut rng).map_err(|e| e.to_string())?;
        let pts: Vec<_> = (0..10).map(|_| sample_point(&t.graph, &mut rng)).collect();
        quads += check_metric(&t.graph.distance_matrix(&pts), true)?;

        let e = srw_excursion(200, &mut rng).map_err(|e| e.to_string())?;
        let e = RealExcursion::from_contour(&e).map_err(|e| e.to_string())?;
        let times: Vec<f64> = (0..10).map(|_| rand::Rng::random::<f64>(&mut rng) * e.zeta()).collect();
        quads += check_metric(&ExcursionMetric::new(&e).matrix(&times), true)?;

        let tree = uniform_rooted_tree(200, &mut rng);
        let g = ConnectedGraph::from_edges(200, &tree.edges()).map_err(|e| e.to_string())?;
        let v: Vec<usize> = (0..10).map(|_| rand::Rng::random_range(&mut rng, 0..200)).collect();
        let d: Vec<Vec<f64>> = v
            .iter()
            .map(|&a| {
                let row = g.bfs_distances(a);
                v.iter().map(|&b| row[b] as f64).collect()
            })
            .collect();
        quads += check_metric(&d, true)?;
    }
    // glued graphs are metric spaces but not trees
    for _ in 0..30 {
        let e = tilted_excursion(2, 200, &mut rng).map_err(|e| e.to_string())?;
        let g = glue_surplus_points(&e, 2, &mut rng).map_err(|e| e.to_string())?;
        let pts: Vec<_> = (0..10).map(|_| g.sample_mass_point(&mut rng)).collect();
        let d: Vec<Vec<f64>> = pts
            .iter()
            .map(|&a| {
                let row = g.graph.distances_from(a);
                pts.iter().map(|&b| row[b]).collect()
            })
            .collect();
        check_metric(&d, false)?;
    }
    Ok(format!("{quads} quadruples"))
}

fn surplus_invariants() -> std::result::Result<String, String> {
    let graphs = fan_out(13, 10_000, |i, rng| -> std::result::Result<usize, String> {
        let params = ErParams::critical(300, (i % 4) as f64).map_err(|e| e.to_string())?;
        let g = er_graph(&params, rng).component_graph(0);
        let s = g.surplus();
        let c = core(&g);
        let k = kernel(&g);
        if c.surplus().map_err(|e| e.to_string())? as usize != s || c.is_empty() != (s == 0) {
            return Err(format!("core surplus differs from {s}"));
        }
        if s >= 2 && k.graph.surplus().map_err(|e| e.to_string())? as usize != s {
            return Err(format!("kernel surplus differs from {s}"));
        }
        if s >= 1 && k.reconstruct_core() != c {
            return Err("kernel does not expand back to the core".into());
        }
        Ok(s)
    });
    let surpluses = graphs.into_iter().collect::<std::result::Result<Vec<_>, _>>()?;
    let max = surpluses.iter().max().copied().unwrap_or(0);
    let with_kernel = surpluses.iter().filter(|&&s| s >= 2).count();
    Ok(format!("1e4 graphs (surplus up to {max}, {with_kernel} with kernels)"))
}

fn determinism() -> std::result::Result<String, String> {
    let runs: Vec<String> = (0..2)
        .map(|_| -> Result<String> {
            let mut rng = stream(14, 0);
            let mut out = String::new();
            let tree = bienayme_conditioned(&OffspringSpec::preset(OffspringPreset::Geometric), 500, &mut rng)?;
            out += &format!("{:?}", tree.edges().collect::<Vec<_>>());
            out += &format!("{:?}", er_graph(&ErParams::critical(2000, 0.5)?, &mut rng).edges);
            out += &format!("{:?}", er_explore_markov(&ErParams::critical(2000, 0.5)?, &mut rng));
            out += &format!("{:?}", degree_model_graph(&DegreeModelParams::two_atom_critical(), 500, &mut rng)?.graph.edges);
            out += &format!("{:?}", reflected_limit_process(&LimitParams::erdos_renyi(0.0), 2.0, 1e-3, &mut rng)?);
            out += &crt_linebreak(30, &mut rng)?.graph.to_text();
            let r = experiment_core_size(300, 2, 100, 15)?;
            out += &r.to_json();
            out += &r.to_csv();
            Ok(out)
        })
        .collect::<Result<_>>()
        .map_err(|e| e.to_string())?;
    if runs[0] == runs[1] {
        Ok(format!("{} bytes identical across runs", runs[0].len()))
    } else {
        Err("repeated seeded runs differ".into())
    }
}

fn invariants() -> Outcome {
    let parts = [
        ("metric axioms + four-point", metric_invariants()),
        ("core/kernel surplus", surplus_invariants()),
        ("determinism", determinism()),
    ];
    let pass = parts.iter().all(|p| p.1.is_ok());
    let detail = parts
        .iter()
        .map(|(name, r)| match r {
            Ok(m) => format!("{name}: {m}"),
            Err(m) => format!("{name}: FAILED {m}"),
        })
        .collect::<Vec<_>>()
        .join("; ");
    outcome(pass, detail)
}

fn main() {
    let suite = Instant::now();
    let mut results: Vec<(u32, &str, Outcome, f64)> = Vec::new();
    let mut run = |id: u32, title: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        let secs = start.elapsed().as_secs_f64();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {verdict}  {title}: {} [{secs:.1}s]", o.detail);
        results.push((id, title, o, secs));
    };
    let lift = |r: Result<Outcome>| r.unwrap_or_else(|e| outcome(false, format!("error: {e}")));

    run(1, "coding-word bijection", &mut || lift(bijection()));
    run(2, "marked DFQ exactness", &mut || lift(marked_dfq()));
    run(3, "uniform G(4,1) sampler", &mut || lift(uniform_gns()));
    run(4, "root-to-vertex-1 distance law", &mut || lift(root_distance()));
    run(5, "Rayleigh marginal of |S_1|/sqrt(n)", &mut || lift(rayleigh()));
    run(6, "core-size law and s=2 kernel frequencies", &mut || lift(core_size()));
    run(7, "Remy/Marchal shapes", &mut || lift(growth_shapes()));
    run(8, "exploration chain vs direct graph", &mut || lift(exploration_chain()));
    // one critical ER run feeds both criteria 9 and 10
    let mut er = None;
    run(9, "critical ER largest component vs limit", &mut || match critical_er() {
        Ok(r) => {
            let o = erdos_renyi_sizes(&r);
            er = Some(r);
            o
        }
        Err(e) => outcome(false, format!("error: {e}")),
    });
    run(10, "metric scaling", &mut || match &er {
        Some(r) => lift(metric_scaling(r)),
        None => outcome(false, "critical ER run failed"),
    });
    run(11, "degree model vs its limit process", &mut || lift(degree_model()));
    run(12, "invariant suites", &mut || invariants());

    let passed = results.iter().filter(|r| r.2.pass).count();
    let unexpected: Vec<u32> = results
        .iter()
        .filter(|r| !r.2.pass && !KNOWN_FAILURES.contains(&r.0))
        .map(|r| r.0)
        .collect();
    let known: Vec<u32> = results
        .iter()
        .filter(|r| !r.2.pass && KNOWN_FAILURES.contains(&r.0))
        .map(|r| r.0)
        .collect();
    println!(
        "acceptance: {passed}/{} criteria pass in {:.0}s; known failures {known:?}; unexpected failures {unexpected:?}",
        results.len(),
        suite.elapsed().as_secs_f64()
    );
    if !unexpected.is_empty() {
        std::process::exit(1);
    }
}
