//! One- and two-sample Kolmogorov–Smirnov tests, chi-square tests with
//! small-cell merging, and total-variation distance.

use serde::Serialize;
use statrs::function::gamma::gamma_ur;

use crate::error::{Error, Result};

/// Smallest sample for which the asymptotic KS p-value is reported.
pub const KS_MIN_SAMPLE: usize = 20;
/// Cells whose expected count falls below this are merged.
pub const MIN_EXPECTED: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    /// Degrees of freedom (chi-square only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dof: Option<usize>,
}

/// P(K > x) for the Kolmogorov distribution.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 1.0 {
        // theta-function form converges fast for small x
        let c = std::f64::consts::PI * std::f64::consts::PI / (8.0 * x * x);
        let mut cdf = 0.0;
        for k in 1..=20 {
            let m = (2 * k - 1) as f64;
            cdf += (-m * m * c).exp();
        }
        cdf *= (2.0 * std::f64::consts::PI).sqrt() / x;
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let mut sf = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        sf += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sf).clamp(0.0, 1.0)
}

/// Stephens' finite-sample scaling of the KS statistic.
fn scaled(en: f64, d: f64) -> f64 {
    (en + 0.12 + 0.11 / en) * d
}

fn sorted_finite(sample: &[f64]) -> Result<Vec<f64>> {
    if sample.iter().any(|x| x.is_nan()) {
        return Err(Error::invalid("sample contains NaN"));
    }
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    Ok(s)
}

/// KS distance sup |F_n − F| against a continuous cdf.
pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::invalid("empty sample"));
    }
    let s = sorted_finite(sample)?;
    let n = s.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in s.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

pub fn ks_test(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<TestResult> {
    if sample.len() < KS_MIN_SAMPLE {
        return Err(Error::invalid(format!(
            "KS needs at least {KS_MIN_SAMPLE} observations, got {}",
            sample.len()
        )));
    }
    let d = ks_statistic(sample, cdf)?;
    let en = (sample.len() as f64).sqrt();
    Ok(TestResult {
        statistic: d,
        p_value: kolmogorov_sf(scaled(en, d)),
        dof: None,
    })
}

/// sup |F_a − F_b| between two empirical distributions.
pub fn ks_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("empty sample"));
    }
    let (a, b) = (sorted_finite(a)?, sorted_finite(b)?);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.len() < KS_MIN_SAMPLE || b.len() < KS_MIN_SAMPLE {
        return Err(Error::invalid(format!("two-sample KS needs {KS_MIN_SAMPLE}+ observations per side")));
    }
    let d = ks_distance(a, b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let en = (na * nb / (na + nb)).sqrt();
    Ok(TestResult {
        statistic: d,
        p_value: kolmogorov_sf(scaled(en, d)),
        dof: None,
    })
}

fn chi_tail(stat: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    if stat.is_infinite() {
        return 0.0;
    }
    if stat <= 0.0 {
        return 1.0;
    }
    gamma_ur(dof as f64 / 2.0, stat / 2.0)
}

/// Groups cell indices so that every group's `size` is at least
/// [`MIN_EXPECTED`]: all small cells are pooled, and a pool that is still
/// too small is folded into the smallest large cell.
fn merge_cells(size: &[f64]) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut pool = Vec::new();
    for (i, &e) in size.iter().enumerate() {
        if e >= MIN_EXPECTED {
            groups.push(vec![i]);
        } else {
            pool.push(i);
        }
    }
    if pool.is_empty() {
        return groups;
    }
    let pooled: f64 = pool.iter().map(|&i| size[i]).sum();
    if pooled >= MIN_EXPECTED || groups.is_empty() {
        groups.push(pool);
    } else {
        let smallest = (0..groups.len())
            .min_by(|&a, &b| size[groups[a][0]].total_cmp(&size[groups[b][0]]))
            .expect("nonempty");
        groups[smallest].extend(pool);
    }
    groups
}

/// Pearson goodness of fit of `observed` counts to cell probabilities
/// `probs` (renormalized). Counts in zero-probability cells give p = 0.
pub fn chi_square(observed: &[u64], probs: &[f64]) -> Result<TestResult> {
    if observed.len() != probs.len() || observed.is_empty() {
        return Err(Error::invalid("observed and probability vectors must match and be nonempty"));
    }
    if probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
        return Err(Error::invalid("probabilities must be finite and nonnegative"));
    }
    let total: u64 = observed.iter().sum();
    if total == 0 {
        return Err(Error::invalid("empty sample"));
    }
    let mass: f64 = probs.iter().sum();
    if mass <= 0.0 {
        return Err(Error::invalid("probabilities sum to zero"));
    }
    if observed.iter().zip(probs).any(|(&o, &p)| p == 0.0 && o > 0) {
        return Ok(TestResult {
            statistic: f64::INFINITY,
            p_value: 0.0,
            dof: Some(observed.len().saturating_sub(1)),
        });
    }
    let expected: Vec<f64> = probs.iter().map(|p| p / mass * total as f64).collect();
    let groups = merge_cells(&expected);
    let mut stat = 0.0;
    for g in &groups {
        let o: f64 = g.iter().map(|&i| observed[i] as f64).sum();
        let e: f64 = g.iter().map(|&i| expected[i]).sum();
        if e > 0.0 {
            stat += (o - e) * (o - e) / e;
        }
    }
    let dof = groups.len().saturating_sub(1);
    Ok(TestResult {
        statistic: stat,
        p_value: chi_tail(stat, dof),
        dof: Some(dof),
    })
}

/// Chi-square test of homogeneity for two count vectors over the same
/// categories.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> Result<TestResult> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::invalid("count vectors must match and be nonempty"));
    }
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    if na == 0.0 || nb == 0.0 {
        return Err(Error::invalid("empty sample"));
    }
    let n = na + nb;
    // merge on the smaller row's expected counts
    let smaller: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| (x + y) as f64 * na.min(nb) / n)
        .collect();
    let groups = merge_cells(&smaller);
    let mut stat = 0.0;
    for g in &groups {
        let x: f64 = g.iter().map(|&i| a[i] as f64).sum();
        let y: f64 = g.iter().map(|&i| b[i] as f64).sum();
        let col = x + y;
        if col == 0.0 {
            continue;
        }
        let (ea, eb) = (col * na / n, col * nb / n);
        stat += (x - ea) * (x - ea) / ea + (y - eb) * (y - eb) / eb;
    }
    let dof = groups.iter().filter(|g| g.iter().any(|&i| a[i] + b[i] > 0)).count().saturating_sub(1);
    Ok(TestResult {
        statistic: stat,
        p_value: chi_tail(stat, dof),
        dof: Some(dof),
    })
}

/// ½ Σ |p_i − q_i| after normalizing each vector.
pub fn tv_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::invalid("distributions must have the same support"));
    }
    let (sp, sq): (f64, f64) = (p.iter().sum(), q.iter().sum());
    if sp <= 0.0 || sq <= 0.0 {
        return Err(Error::invalid("distributions must have positive mass"));
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a / sp - b / sq).abs()).sum::<f64>())
}

/// Counts of each key over a shared sorted support.
pub fn aligned_counts<K: Ord + Clone>(a: &[K], b: &[K]) -> (Vec<K>, Vec<u64>, Vec<u64>) {
    use std::collections::BTreeMap;
    let mut m: BTreeMap<K, (u64, u64)> = BTreeMap::new();
    for k in a {
        m.entry(k.clone()).or_default().0 += 1;
    }
    for k in b {
        m.entry(k.clone()).or_default().1 += 1;
    }
    let keys = m.keys().cloned().collect();
    let (ca, cb) = m.values().map(|&(x, y)| (x, y)).unzip();
    (keys, ca, cb)
}

/// Replaces each integer observation k by k + U − ½ so that a
/// continuous-law KS test does not see ties. Uniforms come from `u`.
pub fn jitter(values: &[f64], u: &[f64]) -> Vec<f64> {
    values.iter().zip(u).map(|(v, w)| v + w - 0.5).collect()
}
