//! Desk-scale experiments. Each runner samples on seeded streams derived
//! from one master seed and returns a [`Report`] with its raw series and
//! pass/flag/fail checks.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;
use serde::Serialize;
use serde_json::json;
use statrs::function::erf::erfc;

use super::density::ReferenceDensity;
use super::gof::{aligned_counts, chi_square_two_sample, ks_distance, ks_test, ks_two_sample, tv_distance, TestResult};
use crate::continuum_graph::{glue_surplus_points, kernel_name, TiltedExcursionSampler};
use crate::error::{Error, Result};
use crate::graph_core::{core, kernel, kernel_triple_probability, ConnectedGraph};
use crate::linebreak::{subtree_sizes, uniform_rooted_tree};
use crate::rng::{fan_out, stream, subseed};
use crate::samplers::{
    bienayme_conditioned, degree_model_graph, er_explore_markov, er_graph, reflected_limit_process,
    AreaBiasedSampler, DegreeModelParams, ErParams, LimitParams, OffspringPreset, OffspringSpec, POOL_FACTOR,
};

/// p-values above this pass.
pub const P_PASS: f64 = 0.01;
/// p-values in (P_FLAG, P_PASS] are flagged rather than failed.
pub const P_FLAG: f64 = 0.001;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Flag,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub method: String,
    pub statistic: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    pub threshold: String,
    pub verdict: Verdict,
    pub sample_sizes: Vec<usize>,
}

impl Check {
    fn p(name: &str, method: &str, r: TestResult, sizes: Vec<usize>) -> Check {
        let verdict = if r.p_value > P_PASS {
            Verdict::Pass
        } else if r.p_value > P_FLAG {
            Verdict::Flag
        } else {
            Verdict::Fail
        };
        Check {
            name: name.into(),
            method: method.into(),
            statistic: r.statistic,
            p_value: Some(r.p_value),
            threshold: format!("p > {P_PASS}"),
            verdict,
            sample_sizes: sizes,
        }
    }

    /// Passes when `statistic < max`.
    fn below(name: &str, method: &str, statistic: f64, max: f64, sizes: Vec<usize>) -> Check {
        Check {
            name: name.into(),
            method: method.into(),
            statistic,
            p_value: None,
            threshold: format!("< {max}"),
            verdict: if statistic < max { Verdict::Pass } else { Verdict::Fail },
            sample_sizes: sizes,
        }
    }

    fn with_p(mut self, p: f64) -> Check {
        self.p_value = Some(p);
        self
    }
}

/// A named vector of raw observations.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Series {
    pub name: String,
    pub values: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceDensity>,
}

impl Series {
    fn new(name: &str, values: Vec<f64>, reference: Option<ReferenceDensity>) -> Self {
        Series {
            name: name.into(),
            values,
            reference,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub experiment: String,
    pub seed: u64,
    pub params: serde_json::Value,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub diagnostics: serde_json::Value,
    pub notes: Vec<String>,
    /// Raw observations; written to CSV rather than the JSON report.
    #[serde(skip)]
    pub series: Vec<Series>,
}

impl Report {
    fn new(experiment: &str, seed: u64, params: serde_json::Value) -> Self {
        Report {
            experiment: experiment.into(),
            seed,
            params,
            checks: Vec::new(),
            diagnostics: serde_json::Value::Null,
            notes: Vec::new(),
            series: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.verdict == Verdict::Pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn series(&self, name: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Long-format CSV `series,index,value`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("series,index,value\n");
        for series in &self.series {
            for (i, v) in series.values.iter().enumerate() {
                writeln!(s, "{},{i},{v}", series.name).unwrap();
            }
        }
        s
    }
}

fn sizes(xs: &[&[f64]]) -> Vec<usize> {
    xs.iter().map(|x| x.len()).collect()
}

fn ks_against(name: &str, sample: &[f64], reference: ReferenceDensity) -> Result<Check> {
    let r = ks_test(sample, |x| reference.cdf(x))?;
    Ok(Check::p(name, &format!("ks vs {}", reference.name()), r, vec![sample.len()]))
}

fn ks_pair(name: &str, a: &[f64], b: &[f64]) -> Result<Check> {
    Ok(Check::p(name, "ks two-sample", ks_two_sample(a, b)?, sizes(&[a, b])))
}

/// Two-sample KS reported as a distance bound, with its p-value attached.
fn ks_close(name: &str, a: &[f64], b: &[f64], max: f64) -> Result<Check> {
    let d = ks_distance(a, b)?;
    let p = ks_two_sample(a, b)?.p_value;
    Ok(Check::below(name, "ks distance", d, max, sizes(&[a, b])).with_p(p))
}

/// Spearman rank correlation and its two-sided normal-approximation p.
pub fn spearman(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.len() != b.len() || a.len() < 3 {
        return Err(Error::invalid("spearman needs two equal samples of size ≥ 3"));
    }
    let rank = |x: &[f64]| {
        let mut idx: Vec<usize> = (0..x.len()).collect();
        idx.sort_by(|&i, &j| x[i].total_cmp(&x[j]));
        let mut r = vec![0.0; x.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
                j += 1;
            }
            for &k in &idx[i..=j] {
                r[k] = (i + j) as f64 / 2.0;
            }
            i = j + 1;
        }
        r
    };
    let (ra, rb) = (rank(a), rank(b));
    let n = a.len() as f64;
    let mean = (n - 1.0) / 2.0;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in ra.iter().zip(&rb) {
        sab += (x - mean) * (y - mean);
        saa += (x - mean) * (x - mean);
        sbb += (y - mean) * (y - mean);
    }
    let rho = if saa == 0.0 || sbb == 0.0 { 0.0 } else { sab / (saa * sbb).sqrt() };
    let z = rho * (n - 1.0).sqrt();
    Ok(TestResult {
        statistic: rho,
        p_value: erfc(z.abs() / std::f64::consts::SQRT_2),
        dof: None,
    })
}

/// Rescaled subtree sizes n^{−1/2}|S_i| against the arrivals of the rate-t
/// Poisson process: per-coordinate KS, plus a joint check through the
/// spacings s_i²/2 − s_{i−1}²/2, which are i.i.d. Exp(1) under the joint
/// law (uniformity of 1 − e^{−spacing} and rank independence of
/// consecutive spacings).
pub fn experiment_subtree_sizes(n: usize, k: usize, draws: usize, seed: u64) -> Result<Report> {
    if n < 1000 {
        return Err(Error::invalid("subtree-size experiment needs n ≥ 1000"));
    }
    if k == 0 || draws < super::gof::KS_MIN_SAMPLE {
        return Err(Error::invalid("need k ≥ 1 and at least 20 draws"));
    }
    let mut report = Report::new("subtree_sizes", seed, json!({"n": n, "k": k, "draws": draws}));
    let scale = 1.0 / (n as f64).sqrt();
    let rows = fan_out(seed, draws, |_, rng| {
        let t = uniform_rooted_tree(n, rng);
        let s = subtree_sizes(&t, k);
        // one jitter per draw keeps the coordinates ordered
        let u: f64 = rng.random();
        let raw: Vec<usize> = s.clone();
        let v: Vec<f64> = s.iter().map(|&x| (x as f64 + u - 0.5) * scale).collect();
        (raw, v)
    });
    let violations = rows.iter().filter(|(raw, _)| raw.windows(2).any(|w| w[0] > w[1])).count();
    report.checks.push(Check::below(
        "ordering",
        "count of draws with |S_i| > |S_{i+1}|",
        violations as f64,
        0.5,
        vec![draws],
    ));
    let mut spacings: Vec<Vec<f64>> = vec![Vec::with_capacity(draws); k];
    for (_, v) in &rows {
        let mut prev = 0.0;
        for (i, &x) in v.iter().enumerate() {
            let e = (x * x / 2.0 - prev).max(0.0);
            prev = x * x / 2.0;
            spacings[i].push(1.0 - (-e).exp());
        }
    }
    for i in 0..k {
        let col: Vec<f64> = rows.iter().map(|(_, v)| v[i]).collect();
        let r = ReferenceDensity::Arrival { k: i as u32 + 1 };
        report.checks.push(ks_against(&format!("s{}_marginal", i + 1), &col, r)?);
        report.series.push(Series::new(&format!("s{}", i + 1), col, Some(r)));
    }
    if k >= 2 {
        let pooled: Vec<f64> = spacings.iter().flatten().copied().collect();
        let r = ks_test(&pooled, |x| x.clamp(0.0, 1.0))?;
        report.checks.push(Check::p("joint_spacings_uniform", "ks vs uniform(0,1)", r, vec![pooled.len()]));
        for i in 0..k - 1 {
            let r = spearman(&spacings[i], &spacings[i + 1])?;
            report.checks.push(Check::p(
                &format!("joint_spacings_independent_{}_{}", i + 1, i + 2),
                "spearman",
                r,
                vec![draws],
            ));
        }
    }
    Ok(report)
}

fn admissible(preset: OffspringPreset, n: usize) -> usize {
    if preset == OffspringPreset::Binary && n % 2 == 0 {
        n + 1
    } else {
        n
    }
}

/// σ·n^{−1/2}·(distance between two uniform vertices) of conditioned
/// Bienaymé trees, one value per draw.
pub fn bienayme_two_point(preset: OffspringPreset, n: usize, draws: usize, seed: u64) -> Result<Vec<f64>> {
    let spec = OffspringSpec::preset(preset);
    let scale = spec.variance().sqrt() / (n as f64).sqrt();
    let out = fan_out(seed, draws, |_, rng| -> Result<f64> {
        let t = bienayme_conditioned(&spec, n, rng)?;
        let depths = t.depths();
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        let d = t.distance_with_depths(&depths, a, b) as f64;
        Ok((d + rng.random::<f64>() - 0.5) * scale)
    });
    out.into_iter().collect()
}

/// Two-point distances of conditioned trees against the two-point CRT
/// law, across presets and under doubling of n.
pub fn experiment_crt_distance(presets: &[OffspringPreset], n: usize, draws: usize, seed: u64) -> Result<Report> {
    if presets.is_empty() {
        return Err(Error::invalid("need at least one preset"));
    }
    if n < 2 || draws < super::gof::KS_MIN_SAMPLE {
        return Err(Error::invalid("need n ≥ 2 and at least 20 draws"));
    }
    let names: Vec<&str> = presets.iter().map(|&p| OffspringSpec::preset(p).name()).collect();
    let mut report = Report::new(
        "crt_distance",
        seed,
        json!({"presets": names, "n": n, "draws": draws, "rescaling": "sigma * n^(-1/2) * d"}),
    );
    let mut samples = Vec::new();
    for (i, &p) in presets.iter().enumerate() {
        let m = admissible(p, n);
        if m != n {
            report.notes.push(format!("{}: n = {n} is inadmissible, used {m}", names[i]));
        }
        let v = bienayme_two_point(p, m, draws, subseed(seed, i as u64))?;
        report
            .checks
            .push(ks_against(&format!("{}_rayleigh", names[i]), &v, ReferenceDensity::Rayleigh)?);
        report.series.push(Series::new(names[i], v.clone(), Some(ReferenceDensity::Rayleigh)));
        samples.push(v);
    }
    for i in 1..samples.len() {
        report
            .checks
            .push(ks_pair(&format!("{}_vs_{}", names[0], names[i]), &samples[0], &samples[i])?);
    }
    let m2 = admissible(presets[0], 2 * n);
    let doubled = bienayme_two_point(presets[0], m2, draws, subseed(seed, 100))?;
    report.checks.push(ks_pair("doubling", &samples[0], &doubled)?);
    report.series.push(Series::new(&format!("{}_2n", names[0]), doubled, None));
    Ok(report)
}

/// Core sizes of uniform graphs in 𝒢_n^s against the limit density, and
/// kernel frequencies at s = 2.
pub fn experiment_core_size(n: usize, s: usize, draws: usize, seed: u64) -> Result<Report> {
    experiment_core_size_with_pool(n, s, draws, POOL_FACTOR, seed)
}

pub fn experiment_core_size_with_pool(n: usize, s: usize, draws: usize, pool_factor: usize, seed: u64) -> Result<Report> {
    if s == 0 {
        return Err(Error::invalid("core-size experiment needs s ≥ 1"));
    }
    if draws < super::gof::KS_MIN_SAMPLE {
        return Err(Error::invalid("need at least 20 draws"));
    }
    let mut report = Report::new(
        "core_size",
        seed,
        json!({"n": n, "s": s, "draws": draws, "pool_factor": pool_factor}),
    );
    let sampler = AreaBiasedSampler::with_pool_factor(n, s, draws, pool_factor, &mut stream(seed, u64::MAX))?;
    report.diagnostics = json!({ "pool": sampler.diagnostics() });
    if sampler.diagnostics().exhausted {
        report.notes.push("pool effective sample size is below the number of draws".into());
    }
    let rows = fan_out(subseed(seed, 1), draws, |_, rng| {
        let g = sampler.sample_graph(rng);
        let c = core(&g);
        let name = if s == 2 { kernel_name(&kernel(&g).graph) } else { String::new() };
        (c.n(), rng.random::<f64>(), name)
    });
    let scale = 1.0 / (n as f64).sqrt();
    let x: Vec<f64> = rows.iter().map(|r| (r.0 as f64 + r.1 - 0.5) * scale).collect();
    let reference = ReferenceDensity::CoreSize { s: s as u32 };
    report.checks.push(ks_against("core_size", &x, reference)?);
    let shape = (3.0 * s as f64 - 2.0) / 2.0;
    let x2: Vec<f64> = x.iter().map(|v| v * v).collect();
    report.checks.push(ks_against(
        "core_size_squared_gamma",
        &x2,
        ReferenceDensity::Gamma { shape, scale: 2.0 },
    )?);
    let too_big = rows.iter().filter(|r| r.0 >= n).count();
    report.checks.push(Check::below("core_below_n", "count of cores with |C| ≥ n", too_big as f64, 0.5, vec![draws]));
    if s == 2 {
        let triple = rows.iter().filter(|r| r.2 == "triple").count() as f64 / draws as f64;
        report.checks.push(Check::below(
            "kernel_triple_frequency",
            "|freq − 2/5|",
            (triple - 0.4).abs(),
            0.03,
            vec![draws],
        ));
        report.diagnostics["triple_frequency"] = json!(triple);
        // the finite-n kernel law sits O(n^{−1/2}) off the limit; this
        // checks the sampler against it
        if let Ok(exact) = kernel_triple_probability(n as u64) {
            let hits = rows.iter().filter(|r| r.2 == "triple").count() as u64;
            let r = super::gof::chi_square(&[hits, draws as u64 - hits], &[exact, 1.0 - exact])?;
            report.checks.push(Check::p("kernel_triple_exact", "chi-square vs finite-n law", r, vec![draws]));
            report.diagnostics["triple_probability_finite_n"] = json!(exact);
        }
    }
    if s == 1 {
        // at s = 1 the core is the cycle, and P(cycle length = k) ∝ (n)_k / n^k
        // for 3 ≤ k ≤ n exactly; this checks the sampler at finite n
        let mut probs = vec![0.0; n + 1];
        let mut ln = 0.0;
        for k in 1..=n {
            ln += (1.0 - (k - 1) as f64 / n as f64).ln();
            if k >= 3 {
                probs[k] = ln.exp();
            }
        }
        let mut counts = vec![0u64; n + 1];
        for r in &rows {
            counts[r.0] += 1;
        }
        let r = super::gof::chi_square(&counts[3..], &probs[3..])?;
        report.checks.push(Check::p("cycle_length_exact", "chi-square vs finite-n law", r, vec![draws]));
    }
    report.series.push(Series::new("core_size", x, Some(reference)));
    Ok(report)
}

/// Two-point distances of uniform graphs in 𝒢_n^s, divided by √n, against
/// the glued tilted-excursion construction at the same surplus.
pub fn experiment_surplus_metric(n: usize, s: usize, draws: usize, grid: usize, seed: u64) -> Result<Report> {
    if draws < super::gof::KS_MIN_SAMPLE || grid == 0 {
        return Err(Error::invalid("need at least 20 draws and a positive grid"));
    }
    let mut report = Report::new(
        "surplus_metric",
        seed,
        json!({"n": n, "s": s, "draws": draws, "grid": grid}),
    );
    let sampler = AreaBiasedSampler::new(n, s, draws, &mut stream(seed, u64::MAX))?;
    report.diagnostics = json!({ "pool": sampler.diagnostics() });
    let scale = 1.0 / (n as f64).sqrt();
    let graph_side = fan_out(subseed(seed, 1), draws, |_, rng| {
        let g = sampler.sample_graph(rng);
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        (g.bfs_distances(a)[b] as f64 + rng.random::<f64>() - 0.5) * scale
    });
    let glued = glued_two_point(s, grid, draws, subseed(seed, 2))?;
    report.checks.push(ks_pair("distance_vs_glued", &graph_side, &glued)?);
    report.series.push(Series::new("graph_distance", graph_side, None));
    report.series.push(Series::new("glued_distance", glued, None));
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitSettings {
    pub dt: f64,
    pub horizon: f64,
}

impl Default for LimitSettings {
    fn default() -> Self {
        LimitSettings { dt: 1e-3, horizon: 10.0 }
    }
}

/// Largest excursion length and its mark count, per draw.
pub fn limit_largest(params: &LimitParams, draws: usize, limit: &LimitSettings, seed: u64) -> Result<Vec<(f64, usize)>> {
    let out = fan_out(seed, draws, |_, rng| -> Result<(f64, usize)> {
        let p = reflected_limit_process(params, limit.horizon, limit.dt, rng)?;
        Ok(p.excursions.first().map_or((0.0, 0), |e| (e.length, e.marks)))
    });
    out.into_iter().collect()
}

fn surplus_law_checks(report: &mut Report, graph_side: &[usize], limit_side: &[usize], prefix: &str) -> Result<()> {
    let (_, a, b) = aligned_counts(graph_side, limit_side);
    let pa: Vec<f64> = a.iter().map(|&c| c as f64).collect();
    let pb: Vec<f64> = b.iter().map(|&c| c as f64).collect();
    let tv = tv_distance(&pa, &pb)?;
    let p = chi_square_two_sample(&a, &b)?.p_value;
    report.checks.push(
        Check::below(&format!("{prefix}surplus_tv"), "total variation", tv, 0.1, vec![graph_side.len(), limit_side.len()])
            .with_p(p),
    );
    let z = |v: &[usize]| v.iter().filter(|&&x| x == 0).count() as f64 / v.len() as f64;
    report.checks.push(Check::below(
        &format!("{prefix}p_surplus_zero"),
        "|P(σ1=0) graph − limit|",
        (z(graph_side) - z(limit_side)).abs(),
        0.03,
        vec![graph_side.len(), limit_side.len()],
    ));
    Ok(())
}

/// Largest component of a graph sample and the distance between two
/// uniform vertices in it, jittered and divided by `n^{1/3}`.
fn largest_two_point<R: Rng + ?Sized>(g: &crate::samplers::GraphSample, rng: &mut R) -> (f64, usize, usize) {
    let c = g.component_graph(0);
    let m = c.n();
    let (a, b) = (rng.random_range(0..m), rng.random_range(0..m));
    let d = bfs_distance(&c, a, b);
    let rescaled = (d as f64 + rng.random::<f64>() - 0.5) / (g.n as f64).cbrt();
    (rescaled, m, g.components[0].surplus)
}

fn bfs_distance(g: &ConnectedGraph, a: usize, b: usize) -> usize {
    g.bfs_distances(a)[b] as usize
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalErParams {
    pub n: usize,
    pub lambda: f64,
    pub draws: usize,
    /// Size ratio for the scale-invariance check of component sizes.
    pub size_factor: usize,
    /// Draws for the two-point distance checks (0 skips them).
    pub metric_draws: usize,
    /// Grid size of the tilted excursions in the surplus-1 comparison
    /// (0 skips it).
    pub glue_grid: usize,
    pub limit: LimitSettings,
}

impl CriticalErParams {
    pub fn new(n: usize, lambda: f64, draws: usize) -> Self {
        CriticalErParams {
            n,
            lambda,
            draws,
            size_factor: 4,
            metric_draws: draws,
            glue_grid: 1000,
            limit: LimitSettings::default(),
        }
    }
}

/// Critical Erdős–Rényi graphs against the reflected-process limit:
/// largest-component sizes and surpluses (exploration chain), scale
/// invariance in n, two-point distances under n-doubling, and surplus-1
/// components against glued tilted excursions.
pub fn experiment_critical_er(p: &CriticalErParams, seed: u64) -> Result<Report> {
    if p.n < 2 || p.draws < super::gof::KS_MIN_SAMPLE || p.size_factor < 2 {
        return Err(Error::invalid("need n ≥ 2, at least 20 draws and size_factor ≥ 2"));
    }
    let mut report = Report::new("critical_er", seed, serde_json::to_value(p).expect("params serialize"));
    let rescale = |n: usize| (n as f64).powf(-2.0 / 3.0);
    let big = p.n * p.size_factor;
    let run_chain = |n: usize, phase: u64| -> Result<Vec<(f64, usize)>> {
        let params = ErParams::critical(n, p.lambda)?;
        Ok(fan_out(subseed(seed, phase), p.draws, |_, rng| {
            let c = er_explore_markov(&params, rng);
            (c[0].size as f64 * rescale(n), c[0].surplus)
        }))
    };
    let small = run_chain(p.n, 1)?;
    let large = run_chain(big, 2)?;
    let limit = limit_largest(&LimitParams::erdos_renyi(p.lambda), p.draws, &p.limit, subseed(seed, 3))?;
    let col = |v: &[(f64, usize)]| -> (Vec<f64>, Vec<usize>) { v.iter().cloned().unzip() };
    let (gs, ss) = col(&small);
    let (gl, sl) = col(&large);
    let (lx, lm) = col(&limit);
    report.checks.push(ks_pair("size_scale_invariance", &gs, &gl)?);
    report.checks.push(ks_close("size_vs_limit", &gs, &lx, 0.1)?);
    report.checks.push(ks_close("size_vs_limit_large_n", &gl, &lx, 0.1)?);
    surplus_law_checks(&mut report, &ss, &lm, "")?;
    report.series.push(Series::new("largest_size", gs, None));
    report.series.push(Series::new("largest_size_large_n", gl, None));
    report.series.push(Series::new("limit_largest_excursion", lx, None));
    report.series.push(Series::new("largest_surplus", ss.iter().map(|&x| x as f64).collect(), None));
    report.series.push(Series::new("limit_marks", lm.iter().map(|&x| x as f64).collect(), None));
    report.series.push(Series::new("largest_surplus_large_n", sl.iter().map(|&x| x as f64).collect(), None));

    if p.metric_draws >= super::gof::KS_MIN_SAMPLE {
        let two_point = |n: usize, phase: u64| -> Result<Vec<(f64, usize, usize)>> {
            let params = ErParams::critical(n, p.lambda)?;
            Ok(fan_out(subseed(seed, phase), p.metric_draws, |_, rng| {
                largest_two_point(&er_graph(&params, rng), rng)
            }))
        };
        let a = two_point(p.n, 4)?;
        let b = two_point(2 * p.n, 5)?;
        let da: Vec<f64> = a.iter().map(|r| r.0).collect();
        let db: Vec<f64> = b.iter().map(|r| r.0).collect();
        report.checks.push(ks_pair("distance_doubling", &da, &db)?);
        report.series.push(Series::new("distance", da, None));
        report.series.push(Series::new("distance_2n", db, None));
        if p.glue_grid > 0 {
            glue_comparison(&mut report, &[&a, &b], &[p.n, 2 * p.n], p.glue_grid, subseed(seed, 6))?;
        }
    }
    Ok(report)
}

/// Components with surplus 1: d/√|C| against distances in the glued
/// surplus-1 construction (conditioned on size and surplus the component
/// is uniform in 𝒢_m^1).
fn glue_comparison(
    report: &mut Report,
    runs: &[&[(f64, usize, usize)]],
    ns: &[usize],
    grid: usize,
    seed: u64,
) -> Result<()> {
    let mut graph_side = Vec::new();
    for (run, &n) in runs.iter().zip(ns) {
        for &(d, m, s) in run.iter() {
            if s == 1 {
                graph_side.push(d * (n as f64).cbrt() / (m as f64).sqrt());
            }
        }
    }
    if graph_side.len() < super::gof::KS_MIN_SAMPLE {
        report.notes.push("too few surplus-1 largest components for the glued comparison".into());
        return Ok(());
    }
    let glued = glued_two_point(1, grid, graph_side.len(), seed)?;
    report.checks.push(ks_pair("surplus1_distance_vs_glued", &graph_side, &glued)?);
    report.series.push(Series::new("surplus1_rescaled_distance", graph_side, None));
    report.series.push(Series::new("glued_distance", glued, None));
    Ok(())
}

/// Distances between two mass-uniform points of glued tilted excursions.
pub fn glued_two_point(s: usize, grid: usize, draws: usize, seed: u64) -> Result<Vec<f64>> {
    let sampler = TiltedExcursionSampler::new(s, grid, draws, &mut stream(seed, u64::MAX))?;
    let out = fan_out(seed, draws, |_, rng| -> Result<f64> {
        let e = sampler.sample(rng);
        let g = glue_surplus_points(&e, s, rng)?;
        let (a, b) = (g.sample_mass_point(rng), g.sample_mass_point(rng));
        Ok(g.distance(a, b))
    });
    out.into_iter().collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeExperimentParams {
    pub law: DegreeModelParams,
    pub n: usize,
    pub draws: usize,
    pub metric_draws: usize,
    pub limit: LimitSettings,
}

impl DegreeExperimentParams {
    pub fn new(law: DegreeModelParams, n: usize, draws: usize) -> Self {
        DegreeExperimentParams {
            law,
            n,
            draws,
            metric_draws: 0,
            limit: LimitSettings::default(),
        }
    }
}

/// The i.i.d.-degree configuration model against the reflected process
/// with the substituted drift and diffusivity.
pub fn experiment_degree_model(p: &DegreeExperimentParams, seed: u64) -> Result<Report> {
    if p.n < 2 || p.draws < super::gof::KS_MIN_SAMPLE {
        return Err(Error::invalid("need n ≥ 2 and at least 20 draws"));
    }
    let mut report = Report::new("degree_model", seed, serde_json::to_value(p).expect("params serialize"));
    let (mu, beta, theta) = (p.law.mu(), p.law.beta(), p.law.theta());
    let limit_params = LimitParams::degree_model(&p.law);
    report.diagnostics = json!({"mu": mu, "beta": beta, "theta": theta, "limit": limit_params});
    report.checks.push(Check {
        name: "critical".into(),
        method: "|θ − 1|".into(),
        statistic: (theta - 1.0).abs(),
        p_value: None,
        threshold: "< 1e-9".into(),
        verdict: if p.law.is_critical() { Verdict::Pass } else { Verdict::Flag },
        sample_sizes: vec![],
    });
    let run = |n: usize, phase: u64| -> Result<Vec<(f64, usize, Option<f64>)>> {
        let metric = p.metric_draws;
        let out = fan_out(subseed(seed, phase), p.draws, |i, rng| -> Result<(f64, usize, Option<f64>)> {
            let s = degree_model_graph(&p.law, n, rng)?;
            let size = s.graph.components[0].size as f64 * (n as f64).powf(-2.0 / 3.0);
            let d = if i < metric { Some(largest_two_point(&s.graph, rng).0) } else { None };
            Ok((size, s.graph.components[0].surplus, d))
        });
        out.into_iter().collect()
    };
    let a = run(p.n, 1)?;
    let b = run(2 * p.n, 2)?;
    let limit = limit_largest(&limit_params, p.draws, &p.limit, subseed(seed, 3))?;
    let sa: Vec<f64> = a.iter().map(|r| r.0).collect();
    let sb: Vec<f64> = b.iter().map(|r| r.0).collect();
    let (lx, lm): (Vec<f64>, Vec<usize>) = limit.into_iter().unzip();
    report.checks.push(ks_pair("size_doubling", &sa, &sb)?);
    report.checks.push(ks_close("size_vs_limit", &sa, &lx, 0.1)?);
    report.checks.push(ks_close("size_vs_limit_2n", &sb, &lx, 0.1)?);
    let surplus: Vec<usize> = a.iter().map(|r| r.1).collect();
    surplus_law_checks(&mut report, &surplus, &lm, "")?;
    let da: Vec<f64> = a.iter().filter_map(|r| r.2).collect();
    let db: Vec<f64> = b.iter().filter_map(|r| r.2).collect();
    if da.len() >= super::gof::KS_MIN_SAMPLE {
        report.checks.push(ks_pair("distance_doubling", &da, &db)?);
        report.series.push(Series::new("distance", da, None));
        report.series.push(Series::new("distance_2n", db, None));
    }
    report.series.push(Series::new("largest_size", sa, None));
    report.series.push(Series::new("largest_size_2n", sb, None));
    report.series.push(Series::new("limit_largest_excursion", lx, None));
    report.series.push(Series::new("largest_surplus", surplus.iter().map(|&x| x as f64).collect(), None));
    report.series.push(Series::new("limit_marks", lm.iter().map(|&x| x as f64).collect(), None));
    Ok(report)
}

/// Experiment names accepted by [`run_named`].
pub const EXPERIMENTS: [&str; 6] =
    ["subtree-sizes", "crt-distance", "core-size", "surplus-metric", "critical-er", "degree-model"];

/// Loose key=value options for running an experiment by name.
pub fn run_named(name: &str, opts: &BTreeMap<String, String>, seed: u64) -> Result<Report> {
    let get = |k: &str, default: f64| -> Result<f64> {
        match opts.get(k) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| Error::invalid(format!("--{k}: cannot parse `{v}`"))),
        }
    };
    let int = |k: &str, default: usize| -> Result<usize> {
        let v = get(k, default as f64)?;
        if v < 0.0 || v.fract() != 0.0 {
            return Err(Error::invalid(format!("--{k} must be a nonnegative integer")));
        }
        Ok(v as usize)
    };
    match name {
        "subtree-sizes" => experiment_subtree_sizes(int("n", 10_000)?, int("k", 1)?, int("draws", 10_000)?, seed),
        "crt-distance" => {
            let presets = match opts.get("preset").map(String::as_str) {
                None | Some("all") => vec![OffspringPreset::Poisson1, OffspringPreset::Geometric, OffspringPreset::Binary],
                Some(list) => list
                    .split(',')
                    .map(|s| OffspringSpec::from_name(s.trim()).map(|x| x.preset_kind().expect("preset")))
                    .collect::<Result<_>>()?,
            };
            experiment_crt_distance(&presets, int("n", 10_000)?, int("draws", 2000)?, seed)
        }
        "core-size" => experiment_core_size_with_pool(
            int("n", 2000)?,
            int("s", 1)?,
            int("draws", 2000)?,
            int("pool-factor", POOL_FACTOR)?,
            seed,
        ),
        "surplus-metric" => {
            experiment_surplus_metric(int("n", 2000)?, int("s", 1)?, int("draws", 2000)?, int("grid", 2000)?, seed)
        }
        "critical-er" => {
            let mut p = CriticalErParams::new(int("n", 25_000)?, get("lambda", 0.0)?, int("draws", 2000)?);
            p.size_factor = int("size-factor", 4)?;
            p.metric_draws = int("metric-draws", p.draws)?;
            p.glue_grid = int("glue-grid", 1000)?;
            p.limit = LimitSettings {
                dt: get("dt", 1e-3)?,
                horizon: get("horizon", 10.0)?,
            };
            experiment_critical_er(&p, seed)
        }
        "degree-model" => {
            let law = match opts.get("law") {
                None => DegreeModelParams::two_atom_critical(),
                Some(text) => parse_degree_law(text)?,
            };
            let mut p = DegreeExperimentParams::new(law, int("n", 25_000)?, int("draws", 2000)?);
            p.metric_draws = int("metric-draws", 0)?;
            p.limit = LimitSettings {
                dt: get("dt", 1e-3)?,
                horizon: get("horizon", 10.0)?,
            };
            experiment_degree_model(&p, seed)
        }
        other => Err(Error::invalid(format!(
            "unknown experiment `{other}` (expected one of {})",
            EXPERIMENTS.join(", ")
        ))),
    }
}

/// Parses `d:p,d:p,…` into a degree law.
pub fn parse_degree_law(text: &str) -> Result<DegreeModelParams> {
    let atoms = text
        .split(',')
        .map(|atom| {
            let (d, p) = atom
                .split_once(':')
                .ok_or_else(|| Error::invalid(format!("degree atom `{atom}` is not d:p")))?;
            let d: u32 = d.trim().parse().map_err(|_| Error::invalid(format!("bad degree `{d}`")))?;
            let p: f64 = p.trim().parse().map_err(|_| Error::invalid(format!("bad probability `{p}`")))?;
            Ok((d, p))
        })
        .collect::<Result<Vec<_>>>()?;
    DegreeModelParams::new(atoms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spearman_detects_dependence() {
        let a: Vec<f64> = (0..200).map(|i| i as f64).collect();
        let b: Vec<f64> = a.iter().map(|x| x * x).collect();
        let r = spearman(&a, &b).unwrap();
        assert!((r.statistic - 1.0).abs() < 1e-12 && r.p_value < 1e-6);
        let c: Vec<f64> = fan_out(1, 500, |_, rng| rng.random::<f64>());
        let d: Vec<f64> = fan_out(2, 500, |_, rng| rng.random::<f64>());
        assert!(spearman(&c, &d).unwrap().p_value > 0.01);
    }

    #[test]
    fn subtree_experiment_small() {
        let r = experiment_subtree_sizes(2000, 3, 1500, 7).unwrap();
        assert!(r.passed(), "{}", r.to_json());
        assert_eq!(r.series("s1").unwrap().values.len(), 1500);
        assert!(experiment_subtree_sizes(10, 1, 100, 1).is_err());
    }

    #[test]
    fn crt_distance_small() {
        let r = experiment_crt_distance(&[OffspringPreset::Poisson1, OffspringPreset::Binary], 2000, 800, 3).unwrap();
        assert!(r.passed(), "{}", r.to_json());
        assert!(r.notes.iter().any(|n| n.contains("2001")));
    }

    #[test]
    fn core_size_small() {
        let r = experiment_core_size_with_pool(400, 2, 400, 16, 5).unwrap();
        assert!(r.check("core_below_n").unwrap().verdict == Verdict::Pass);
        assert!(r.check("kernel_triple_frequency").is_some());
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(json["params"]["s"], 2);
        assert_eq!(r.to_csv().lines().count(), 401);
    }

    #[test]
    fn reports_are_deterministic() {
        let a = experiment_subtree_sizes(1000, 2, 100, 11).unwrap();
        let b = experiment_subtree_sizes(1000, 2, 100, 11).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn named_runner_validates() {
        let mut o = BTreeMap::new();
        o.insert("n".to_string(), "abc".to_string());
        assert!(run_named("core-size", &o, 1).unwrap_err().is_validation());
        assert!(run_named("nope", &BTreeMap::new(), 1).unwrap_err().is_validation());
        assert_eq!(parse_degree_law("1:0.75,3:0.25").unwrap(), DegreeModelParams::two_atom_critical());
        assert!(parse_degree_law("1-0.5").is_err());
    }
}
