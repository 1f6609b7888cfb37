//! Finite-support pmfs on integer lattices, exact Y_n and multinomial
//! difference laws, entropy evaluation.

use std::collections::HashMap;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::compensated_sum;

/// Probability weights. Exact tables keep integer counts over one shared
/// denominator so that sums and equality tests involve no rounding.
#[derive(Debug, Clone, PartialEq)]
enum Weights {
    Exact { counts: Vec<u128>, denom: u128 },
    Float(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PmfTable {
    dim: usize,
    points: Vec<Vec<i64>>,
    weights: Weights,
}

impl PmfTable {
    /// Exact table; zero counts are dropped and points sorted.
    pub fn from_counts(dim: usize, counts: HashMap<Vec<i64>, u128>, denom: u128) -> Result<Self> {
        let mut entries: Vec<(Vec<i64>, u128)> = counts.into_iter().filter(|(_, c)| *c > 0).collect();
        if entries.iter().any(|(p, _)| p.len() != dim) {
            return Err(Error::Domain("point dimension mismatch".into()));
        }
        let total: u128 = entries.iter().map(|(_, c)| *c).sum();
        if denom == 0 || total != denom {
            return Err(Error::InvalidDistribution(format!(
                "counts sum to {total}, denominator {denom}"
            )));
        }
        entries.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        let (points, counts) = entries.into_iter().unzip();
        Ok(Self {
            dim,
            points,
            weights: Weights::Exact { counts, denom },
        })
    }

    pub fn from_probs(dim: usize, probs: HashMap<Vec<i64>, f64>) -> Result<Self> {
        let mut entries: Vec<(Vec<i64>, f64)> = probs.into_iter().filter(|(_, p)| *p != 0.0).collect();
        if entries.iter().any(|(p, _)| p.len() != dim) {
            return Err(Error::Domain("point dimension mismatch".into()));
        }
        if entries.iter().any(|(_, p)| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::InvalidDistribution("negative or non-finite mass".into()));
        }
        let total = compensated_sum(entries.iter().map(|(_, p)| *p));
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution(format!("mass {total}")));
        }
        entries.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        let (points, probs) = entries.into_iter().unzip();
        Ok(Self {
            dim,
            points,
            weights: Weights::Float(probs),
        })
    }

    pub fn point_mass(point: Vec<i64>) -> Self {
        Self {
            dim: point.len(),
            points: vec![point],
            weights: Weights::Exact {
                counts: vec![1],
                denom: 1,
            },
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.weights, Weights::Exact { .. })
    }

    /// Support points in lexicographic order.
    pub fn points(&self) -> &[Vec<i64>] {
        &self.points
    }

    pub fn index_of(&self, point: &[i64]) -> Option<usize> {
        self.points.binary_search_by(|p| p.as_slice().cmp(point)).ok()
    }

    pub fn prob_at(&self, i: usize) -> f64 {
        match &self.weights {
            Weights::Exact { counts, denom } => counts[i] as f64 / *denom as f64,
            Weights::Float(p) => p[i],
        }
    }

    /// Reduced fraction at support index `i` (exact tables only).
    pub fn ratio_at(&self, i: usize) -> Option<(u128, u128)> {
        match &self.weights {
            Weights::Exact { counts, denom } => {
                let g = counts[i].gcd(denom);
                Some((counts[i] / g, denom / g))
            }
            Weights::Float(_) => None,
        }
    }

    pub fn prob(&self, point: &[i64]) -> f64 {
        self.index_of(point).map_or(0.0, |i| self.prob_at(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[i64], f64)> + '_ {
        (0..self.len()).map(move |i| (self.points[i].as_slice(), self.prob_at(i)))
    }

    /// Σ p, exact tables check their integer counts.
    pub fn total_mass(&self) -> f64 {
        match &self.weights {
            Weights::Exact { counts, denom } => {
                if counts.iter().sum::<u128>() == *denom {
                    1.0
                } else {
                    counts.iter().sum::<u128>() as f64 / *denom as f64
                }
            }
            Weights::Float(p) => compensated_sum(p.iter().copied()),
        }
    }

    /// True when both tables are exact and assign identical rationals.
    pub fn exact_eq(&self, other: &Self) -> bool {
        if self.points != other.points {
            return false;
        }
        match (&self.weights, &other.weights) {
            (Weights::Exact { counts: a, denom: da }, Weights::Exact { counts: b, denom: db }) => a
                .iter()
                .zip(b)
                .all(|(x, y)| x.checked_mul(*db) == y.checked_mul(*da) && x.checked_mul(*db).is_some()),
            _ => false,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<PmfJsonRow> = (0..self.len())
            .map(|i| PmfJsonRow {
                point: self.points[i].clone(),
                p: match self.ratio_at(i) {
                    Some((a, b)) => PmfJsonMass::Ratio(format!("{a}/{b}")),
                    None => PmfJsonMass::Float(self.prob_at(i)),
                },
            })
            .collect();
        serde_json::to_value(rows).expect("pmf rows serialize")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let rows: Vec<PmfJsonRow> = serde_json::from_value(v.clone())?;
        let dim = rows.first().map_or(0, |r| r.point.len());
        if rows.iter().all(|r| matches!(r.p, PmfJsonMass::Ratio(_))) && !rows.is_empty() {
            let mut parsed = Vec::with_capacity(rows.len());
            let mut lcm: u128 = 1;
            for r in &rows {
                let PmfJsonMass::Ratio(s) = &r.p else { unreachable!() };
                let (a, b) = s
                    .split_once('/')
                    .and_then(|(a, b)| Some((a.trim().parse::<u128>().ok()?, b.trim().parse::<u128>().ok()?)))
                    .ok_or_else(|| Error::Parse(format!("bad ratio {s:?}")))?;
                if b == 0 {
                    return Err(Error::Parse(format!("zero denominator in {s:?}")));
                }
                lcm = lcm.lcm(&b);
                parsed.push((r.point.clone(), a, b));
            }
            let mut counts = HashMap::new();
            for (p, a, b) in parsed {
                *counts.entry(p).or_insert(0) += a * (lcm / b);
            }
            Self::from_counts(dim, counts, lcm)
        } else {
            let mut probs = HashMap::new();
            for r in rows {
                let p = match r.p {
                    PmfJsonMass::Float(x) => x,
                    PmfJsonMass::Ratio(s) => {
                        let (a, b) = s
                            .split_once('/')
                            .and_then(|(a, b)| Some((a.trim().parse::<f64>().ok()?, b.trim().parse::<f64>().ok()?)))
                            .ok_or_else(|| Error::Parse(format!("bad ratio {s:?}")))?;
                        a / b
                    }
                };
                *probs.entry(r.point).or_insert(0.0) += p;
            }
            Self::from_probs(dim, probs)
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PmfJsonRow {
    point: Vec<i64>,
    p: PmfJsonMass,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PmfJsonMass {
    Ratio(String),
    Float(f64),
}

pub const Y_PMF_MAX_KS: usize = 6;
pub const Y_PMF_MAX_STEPS: usize = 24;
pub const MULTIDIFF_MAX_D: usize = 5;
pub const MULTIDIFF_MAX_N: usize = 12;

/// Exact law of `Y_n = Σ_i (-1)^{n-i} δ_i` with δ_i iid uniform unit vectors
/// in ℤ^{k_S}, via `Y_m = -Y_{m-1} + δ_m`.
pub fn y_pmf_exact(k_s: usize, n_steps: usize) -> Result<PmfTable> {
    if k_s == 0 {
        return Err(Error::Domain("k_S must be >= 1".into()));
    }
    if k_s > Y_PMF_MAX_KS || n_steps > Y_PMF_MAX_STEPS {
        return Err(Error::ScaleGuard {
            what: format!("y_pmf_exact(k_S={k_s}, n={n_steps})"),
            limit: format!("k_S <= {Y_PMF_MAX_KS}, n <= {Y_PMF_MAX_STEPS}"),
        });
    }
    let mut cur: HashMap<Vec<i64>, u128> = HashMap::from([(vec![0i64; k_s], 1u128)]);
    for _ in 0..n_steps {
        let mut next: HashMap<Vec<i64>, u128> = HashMap::with_capacity(cur.len() * 2);
        for (v, c) in &cur {
            let neg: Vec<i64> = v.iter().map(|x| -x).collect();
            for i in 0..k_s {
                let mut w = neg.clone();
                w[i] += 1;
                *next.entry(w).or_insert(0) += c;
            }
        }
        cur = next;
    }
    PmfTable::from_counts(k_s, cur, (k_s as u128).pow(n_steps as u32))
}

/// Multinomial(N; uniform on d cells) as exact counts over `d^N`.
fn multinomial_counts(d: usize, n: usize) -> Vec<(Vec<i64>, u128)> {
    let mut fact = vec![1u128; n + 1];
    for i in 1..=n {
        fact[i] = fact[i - 1] * i as u128;
    }
    let mut out = Vec::new();
    let mut cur = vec![0i64; d];
    fn rec(i: usize, left: usize, cur: &mut Vec<i64>, fact: &[u128], n: usize, out: &mut Vec<(Vec<i64>, u128)>) {
        let d = cur.len();
        if i == d - 1 {
            cur[i] = left as i64;
            let denom: u128 = cur.iter().map(|&x| fact[x as usize]).product();
            out.push((cur.clone(), fact[n] / denom));
            return;
        }
        for x in 0..=left {
            cur[i] = x as i64;
            rec(i + 1, left - x, cur, fact, n, out);
        }
    }
    rec(0, n, &mut cur, &fact, n, &mut out);
    out
}

/// Exact law of `X - Y` for X, Y iid Multinomial(N, uniform on d cells).
pub fn multinomial_diff_pmf(d: usize, n: usize) -> Result<PmfTable> {
    if d == 0 {
        return Err(Error::Domain("d must be >= 1".into()));
    }
    if d > MULTIDIFF_MAX_D || n > MULTIDIFF_MAX_N {
        return Err(Error::ScaleGuard {
            what: format!("multinomial_diff_pmf(d={d}, N={n})"),
            limit: format!("d <= {MULTIDIFF_MAX_D}, N <= {MULTIDIFF_MAX_N}"),
        });
    }
    let m = multinomial_counts(d, n);
    let mut counts: HashMap<Vec<i64>, u128> = HashMap::new();
    for (x, cx) in &m {
        for (y, cy) in &m {
            let diff: Vec<i64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
            *counts.entry(diff).or_insert(0) += cx * cy;
        }
    }
    let denom = (d as u128).pow(2 * n as u32);
    PmfTable::from_counts(d, counts, denom)
}

/// `-Σ p log p` in nats. Exact tables use `log D - (1/D) Σ c log c`.
pub fn entropy_of(pmf: &PmfTable) -> f64 {
    match &pmf.weights {
        Weights::Exact { counts, denom } => {
            let d = *denom as f64;
            let ln_d = d.ln();
            let h = compensated_sum(counts.iter().map(|&c| {
                let cf = c as f64;
                (cf / d) * (ln_d - cf.ln())
            }));
            h.max(0.0)
        }
        Weights::Float(p) => compensated_sum(p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln())).max(0.0),
    }
}

/// `Var(-log P(X))` under the table's own law.
pub fn varentropy_of(pmf: &PmfTable) -> f64 {
    let h = entropy_of(pmf);
    compensated_sum(pmf.iter().map(|(_, p)| p * (-p.ln() - h).powi(2)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PluginEntropy {
    /// Maximum-likelihood plug-in value.
    pub plugin: f64,
    /// Plug-in plus `(support - 1) / (2 · samples)`.
    pub estimate: f64,
    pub stderr: f64,
    pub support: usize,
    pub samples: usize,
}

/// Plug-in entropy with Miller–Madow correction and a jackknife standard
/// error. Leave-one-out values depend only on the removed sample's cell, so
/// the jackknife runs over distinct cells.
pub fn entropy_plugin<T: std::hash::Hash + Eq>(samples: &[T]) -> Result<PluginEntropy> {
    if samples.is_empty() {
        return Err(Error::Domain("entropy_plugin needs at least one sample".into()));
    }
    let mut counts: HashMap<&T, u64> = HashMap::new();
    for s in samples {
        *counts.entry(s).or_insert(0) += 1;
    }
    let n = samples.len() as f64;
    let c_ln_c = |c: f64| if c > 0.0 { c * c.ln() } else { 0.0 };
    let s_sum = compensated_sum(counts.values().map(|&c| c_ln_c(c as f64)));
    let plugin = (n.ln() - s_sum / n).max(0.0);
    let support = counts.len();
    let stderr = if samples.len() < 2 {
        0.0
    } else {
        let m = n - 1.0;
        let loo: Vec<(f64, f64)> = counts
            .values()
            .map(|&c| {
                let c = c as f64;
                let s = s_sum - c_ln_c(c) + c_ln_c(c - 1.0);
                (c, m.ln() - s / m)
            })
            .collect();
        let mean = compensated_sum(loo.iter().map(|(c, h)| c * h)) / n;
        let ss = compensated_sum(loo.iter().map(|(c, h)| c * (h - mean).powi(2)));
        ((n - 1.0) / n * ss).sqrt()
    };
    Ok(PluginEntropy {
        plugin,
        estimate: plugin + (support as f64 - 1.0) / (2.0 * n),
        stderr,
        support,
        samples: samples.len(),
    })
}
