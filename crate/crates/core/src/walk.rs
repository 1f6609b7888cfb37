//! Monte Carlo simulation of the rate-1 continuous-time walk on Cay(G, S),
//! with exact tracking of the auxiliary coordinates C(t).
//!
//! The horizon is Poissonized: N ~ Poisson(t) steps are drawn, each a
//! uniform generator index σ ∈ [k] with a uniform sign η = ±1, applied on the
//! right.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::Serialize;

use crate::entropy::pmf::{y_pmf_exact, PmfTable};
use crate::error::{Error, Result};
use crate::group::{multiply, DihedralElement, GeneratorSet, GroupParams};
use crate::rng::stream;
use crate::stats::{binomial_ln_pmf, chi_square_gof, moments, GofResult, Moments};

/// Step lists longer than this are not stored; only statistics are kept.
pub const STORE_STEPS_LIMIT: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    pub index: u32,
    pub positive: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub t: f64,
    /// `None` when the walk took more than [`STORE_STEPS_LIMIT`] steps.
    pub steps: Option<Vec<Step>>,
    pub n_total: u64,
    pub n_refl: u64,
    /// Arrivals of `Z_a^{±1}` per generator index.
    pub usage: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkSnapshot {
    pub x: DihedralElement,
    pub c: Vec<i64>,
    pub n_total: u64,
    pub n_refl: u64,
}

impl WalkSnapshot {
    pub fn c_s<'a>(&'a self, gs: &GeneratorSet) -> &'a [i64] {
        &self.c[..gs.k_s()]
    }

    pub fn c_r<'a>(&'a self, gs: &GeneratorSet) -> &'a [i64] {
        &self.c[gs.k_s()..]
    }
}

fn poisson_count<R: Rng + ?Sized>(t: f64, rng: &mut R) -> u64 {
    if t == 0.0 {
        0
    } else {
        Poisson::new(t).expect("positive finite rate").sample(rng) as u64
    }
}

fn check_horizon(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("time horizon must be finite and >= 0, got {t}")))
    }
}

/// Simulates X(t) together with its auxiliary vector C(t).
///
/// C is accumulated in one forward pass: with `R_i` the number of reflection
/// steps among the first i, a rotation step contributes `η_i (-1)^{R_i}` and
/// the j-th reflection contributes `(-1)^j`; the final factor `(-1)^{N_S}`
/// turns these into the later-reflection parities of the closed form.
pub fn simulate<R: Rng + ?Sized>(
    gs: &GeneratorSet,
    p: &GroupParams,
    t: f64,
    rng: &mut R,
) -> Result<(Trajectory, WalkSnapshot)> {
    check_horizon(t)?;
    let k = gs.k();
    let n_total = poisson_count(t, rng);
    let store = n_total <= STORE_STEPS_LIMIT;
    let mut steps = store.then(|| Vec::with_capacity(n_total as usize));
    let mut usage = vec![0u64; k];
    let mut acc = vec![0i64; k];
    let mut x = DihedralElement::IDENTITY;
    let mut n_refl = 0u64;
    for _ in 0..n_total {
        let a = rng.random_range(0..k);
        let positive: bool = rng.random();
        let g = gs.gens()[a];
        x = multiply(x, g.signed(positive, p), p);
        usage[a] += 1;
        if g.is_reflection {
            n_refl += 1;
            acc[a] += if n_refl % 2 == 0 { 1 } else { -1 };
        } else {
            let sign = if positive { 1 } else { -1 };
            acc[a] += if n_refl % 2 == 0 { sign } else { -sign };
        }
        if let Some(s) = steps.as_mut() {
            s.push(Step {
                index: a as u32,
                positive,
            });
        }
    }
    if n_refl % 2 == 1 {
        acc.iter_mut().for_each(|c| *c = -*c);
    }
    let traj = Trajectory {
        t,
        steps,
        n_total,
        n_refl,
        usage,
    };
    let snap = WalkSnapshot {
        x,
        c: acc,
        n_total,
        n_refl,
    };
    Ok((traj, snap))
}

/// Only the position X(t); no auxiliary bookkeeping.
pub fn walk_position<R: Rng + ?Sized>(
    gs: &GeneratorSet,
    p: &GroupParams,
    t: f64,
    rng: &mut R,
) -> DihedralElement {
    let k = gs.k();
    let mut x = DihedralElement::IDENTITY;
    for _ in 0..poisson_count(t, rng) {
        let g = gs.gens()[rng.random_range(0..k)];
        x = multiply(x, g.signed(rng.random(), p), p);
    }
    x
}

/// Per-generator arrival counts only.
pub fn usage_counts<R: Rng + ?Sized>(k: usize, t: f64, rng: &mut R) -> Vec<u64> {
    let mut usage = vec![0u64; k];
    for _ in 0..poisson_count(t, rng) {
        usage[rng.random_range(0..k)] += 1;
    }
    usage
}

/// `X = s^{N_S mod 2} r^{Σ_a C_a U_a}`, checked with exact integer arithmetic.
pub fn aux_identity_check(snap: &WalkSnapshot, gs: &GeneratorSet, p: &GroupParams) -> bool {
    if snap.c.len() != gs.k() {
        return false;
    }
    let n = p.n() as i128;
    let exponent = snap
        .c
        .iter()
        .zip(gs.exponents())
        .fold(0i128, |acc, (&c, u)| (acc + (c as i128 % n) * u as i128).rem_euclid(n));
    let predicted = DihedralElement {
        refl: snap.n_refl % 2 == 1,
        rot: p.reduce(exponent),
    };
    predicted == snap.x
}

/// Draws `C⁺ − C⁻ + C_err` with `C^± ~ Multi(⌊N_S/2⌋, uniform)` and
/// `C_err ~ Multi(N_S mod 2, uniform)`, all independent.
pub fn sample_cs_direct<R: Rng + ?Sized>(k_s: usize, n_s: u64, rng: &mut R) -> Result<Vec<i64>> {
    if k_s == 0 {
        return Err(Error::Domain("k_S must be >= 1".into()));
    }
    let mut v = vec![0i64; k_s];
    let half = n_s / 2;
    for _ in 0..half {
        v[rng.random_range(0..k_s)] += 1;
    }
    for _ in 0..half {
        v[rng.random_range(0..k_s)] -= 1;
    }
    if n_s % 2 == 1 {
        v[rng.random_range(0..k_s)] += 1;
    }
    Ok(v)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionalGof {
    pub n_s: u64,
    pub samples: u64,
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub cells: usize,
    pub impossible: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CsLawReport {
    pub per_n_s: Vec<ConditionalGof>,
    /// N_S values seen fewer than `min_group` times; not tested.
    pub skipped: Vec<(u64, u64)>,
    pub rotation_moments: Vec<RotationMoments>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RotationMoments {
    pub index: usize,
    pub mean: f64,
    pub mean_stderr: f64,
    pub variance: f64,
    pub variance_stderr: f64,
}

impl CsLawReport {
    pub fn min_p_value(&self) -> f64 {
        self.per_n_s.iter().map(|g| g.p_value).fold(1.0, f64::min)
    }
}

/// Cross-checks simulated `C_S | N_S` against the exact law of `Y_{N_S}`.
pub fn cs_law_crosscheck(
    gs: &GeneratorSet,
    p: &GroupParams,
    t: f64,
    samples: u64,
    seed: u64,
) -> Result<CsLawReport> {
    cs_law_crosscheck_with(gs, p, t, samples, seed, |k_s, n| y_pmf_exact(k_s, n as usize))
}

/// Same as [`cs_law_crosscheck`] with a caller-supplied conditional law.
pub fn cs_law_crosscheck_with<F>(
    gs: &GeneratorSet,
    p: &GroupParams,
    t: f64,
    samples: u64,
    seed: u64,
    oracle: F,
) -> Result<CsLawReport>
where
    F: Fn(usize, u64) -> Result<PmfTable>,
{
    const MIN_GROUP: u64 = 50;
    if gs.k_s() == 0 || gs.k_s() > 4 || t > 16.0 {
        return Err(Error::ScaleGuard {
            what: format!("conditional law check at k_S = {}, t = {t}", gs.k_s()),
            limit: "1 <= k_S <= 4, t <= 16".into(),
        });
    }
    let snaps: Vec<WalkSnapshot> = (0..samples)
        .into_par_iter()
        .map(|i| simulate(gs, p, t, &mut stream(seed, i)).map(|(_, s)| s))
        .collect::<Result<_>>()?;

    let mut by_ns: std::collections::BTreeMap<u64, Vec<&[i64]>> = Default::default();
    for s in &snaps {
        by_ns.entry(s.n_refl).or_default().push(s.c_s(gs));
    }
    let mut per_n_s = Vec::new();
    let mut skipped = Vec::new();
    for (&n_s, group) in &by_ns {
        let count = group.len() as u64;
        if count < MIN_GROUP || n_s > 24 {
            skipped.push((n_s, count));
            continue;
        }
        let law = oracle(gs.k_s(), n_s)?;
        let mut points: Vec<Vec<i64>> = law.points().to_vec();
        let mut observed = vec![0u64; points.len()];
        let mut outside: std::collections::BTreeMap<Vec<i64>, u64> = Default::default();
        for c in group {
            match law.index_of(c) {
                Some(i) => observed[i] += 1,
                None => *outside.entry(c.to_vec()).or_default() += 1,
            }
        }
        let mut probs: Vec<f64> = points.iter().map(|pt| law.prob(pt)).collect();
        for (pt, o) in outside {
            points.push(pt);
            observed.push(o);
            probs.push(0.0);
        }
        let GofResult {
            statistic,
            dof,
            p_value,
            cells,
            impossible,
        } = chi_square_gof(&observed, &probs, 5.0);
        per_n_s.push(ConditionalGof {
            n_s,
            samples: count,
            statistic,
            dof,
            p_value,
            cells,
            impossible,
        });
    }

    let rotation_moments = (gs.k_s()..gs.k())
        .map(|a| {
            let xs: Vec<f64> = snaps.iter().map(|s| s.c[a] as f64).collect();
            let Moments {
                mean,
                variance,
                stderr,
                var_stderr,
                ..
            } = moments(&xs);
            RotationMoments {
                index: a,
                mean,
                mean_stderr: stderr,
                variance,
                variance_stderr: var_stderr,
            }
        })
        .collect();

    Ok(CsLawReport {
        per_n_s,
        skipped,
        rotation_moments,
    })
}

/// `|J_i|` = number of generators used exactly i times.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JiCounts {
    counts: Vec<u64>,
}

impl JiCounts {
    pub fn get(&self, i: usize) -> u64 {
        self.counts.get(i).copied().unwrap_or(0)
    }

    pub fn at_least(&self, i: usize) -> u64 {
        self.counts.iter().skip(i).sum()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.counts
    }

    pub fn total_generators(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn total_steps(&self) -> u64 {
        self.counts
            .iter()
            .enumerate()
            .map(|(i, &c)| i as u64 * c)
            .sum()
    }
}

pub fn ji_counts_from_usage(usage: &[u64]) -> JiCounts {
    let max = usage.iter().copied().max().unwrap_or(0) as usize;
    let mut counts = vec![0u64; max + 1];
    for &u in usage {
        counts[u as usize] += 1;
    }
    JiCounts { counts }
}

pub fn ji_counts(traj: &Trajectory, gs: &GeneratorSet) -> JiCounts {
    debug_assert_eq!(traj.usage.len(), gs.k());
    ji_counts_from_usage(&traj.usage)
}

/// Usage probability of a single generator: `(t/k)^i e^{-t/k} / i!`.
pub fn ji_cell_probability(k: usize, t: f64, i: u64) -> f64 {
    crate::stats::poisson_ln_pmf(t / k as f64, i).exp()
}

#[derive(Debug, Clone, Serialize)]
pub struct JiLawCheck {
    pub i: u64,
    pub probability: f64,
    pub mean_observed: f64,
    pub mean_expected: f64,
    pub p_value: f64,
    pub dof: usize,
}

/// GOF of `|J_i|` across trajectories against `Binomial(k, p_i)`.
pub fn ji_law_check(
    k: usize,
    t: f64,
    trajectories: u64,
    max_i: u64,
    seed: u64,
) -> Result<Vec<JiLawCheck>> {
    check_horizon(t)?;
    let all: Vec<JiCounts> = (0..trajectories)
        .into_par_iter()
        .map(|r| ji_counts_from_usage(&usage_counts(k, t, &mut stream(seed, r))))
        .collect();
    Ok((0..=max_i)
        .map(|i| {
            let prob = ji_cell_probability(k, t, i);
            let values: Vec<u64> = all.iter().map(|j| j.get(i as usize)).collect();
            let gof = binomial_gof(&values, k as u64, prob);
            JiLawCheck {
                i,
                probability: prob,
                mean_observed: values.iter().sum::<u64>() as f64 / values.len().max(1) as f64,
                mean_expected: k as f64 * prob,
                p_value: gof.p_value,
                dof: gof.dof,
            }
        })
        .collect())
}

fn binomial_gof(values: &[u64], trials: u64, prob: f64) -> GofResult {
    let mean = trials as f64 * prob;
    let sd = (mean * (1.0 - prob)).sqrt().max(1.0);
    let lo = (mean - 10.0 * sd).floor().max(0.0) as u64;
    let hi = ((mean + 10.0 * sd).ceil() as u64).min(trials);
    let lo = lo.min(values.iter().copied().min().unwrap_or(lo));
    let hi = hi.max(values.iter().copied().max().unwrap_or(hi));
    let width = (hi - lo + 1) as usize;
    let mut observed = vec![0u64; width + 2];
    let mut probs: Vec<f64> = Vec::with_capacity(width + 2);
    let mut inner = 0.0;
    for v in lo..=hi {
        let q = binomial_ln_pmf(trials, v, prob).exp();
        inner += q;
        probs.push(q);
    }
    let below: f64 = (0..lo).map(|v| binomial_ln_pmf(trials, v, prob).exp()).sum();
    probs.push(below);
    probs.push((1.0 - inner - below).max(0.0));
    for &v in values {
        observed[(v - lo) as usize] += 1;
    }
    chi_square_gof(&observed, &probs, 5.0)
}

/// The typical event for one walk: `|J_1 − t e^{−t/k}| ≤ δ t e^{−t/k}` and
/// `|J_{≥2}| ≤ L`, `L = min(δt, δ²k/2)`.
pub fn once_typical(ji: &JiCounts, k: usize, t: f64, delta: f64) -> bool {
    let centre = t * (-t / k as f64).exp();
    let l = (delta * t).min(delta * delta * k as f64 / 2.0);
    (ji.get(1) as f64 - centre).abs() <= delta * centre && ji.at_least(2) as f64 <= l
}

/// Some generator appears exactly once across the pair and not in the other walk.
pub fn event_b(usage: &[u64], usage_other: &[u64]) -> bool {
    usage
        .iter()
        .zip(usage_other)
        .any(|(&a, &b)| (a == 1 && b == 0) || (a == 0 && b == 1))
}

#[derive(Debug, Clone, Serialize)]
pub struct EventBReport {
    pub replicates: u64,
    pub frequency: f64,
    pub stderr: f64,
    pub typical_pairs: u64,
    /// P(B | typ), NaN when no pair is typical.
    pub frequency_given_typical: f64,
    pub stderr_given_typical: f64,
}

pub fn event_b_frequency(
    gs: &GeneratorSet,
    t: f64,
    replicates: u64,
    delta: f64,
    seed: u64,
) -> Result<EventBReport> {
    check_horizon(t)?;
    let k = gs.k();
    let outcomes: Vec<(bool, bool)> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(seed, r);
            let a = usage_counts(k, t, &mut rng);
            let b = usage_counts(k, t, &mut rng);
            let typ = once_typical(&ji_counts_from_usage(&a), k, t, delta)
                && once_typical(&ji_counts_from_usage(&b), k, t, delta);
            (event_b(&a, &b), typ)
        })
        .collect();
    let (freq, se) = proportion(outcomes.iter().filter(|o| o.0).count() as u64, replicates);
    let typical: Vec<bool> = outcomes.iter().filter(|o| o.1).map(|o| o.0).collect();
    let (freq_t, se_t) = if typical.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        proportion(typical.iter().filter(|&&b| b).count() as u64, typical.len() as u64)
    };
    Ok(EventBReport {
        replicates,
        frequency: freq,
        stderr: se,
        typical_pairs: typical.len() as u64,
        frequency_given_typical: freq_t,
        stderr_given_typical: se_t,
    })
}

fn proportion(hits: u64, total: u64) -> (f64, f64) {
    if total == 0 {
        return (f64::NAN, f64::NAN);
    }
    let p = hits as f64 / total as f64;
    (p, (p * (1.0 - p) / total as f64).sqrt())
}

#[derive(Debug, Clone, Serialize)]
pub struct CollisionEstimate {
    pub pairs: u64,
    pub hits: u64,
    /// Estimate of `|G|·P(X(t) = X'(t)) − 1`.
    pub estimate: f64,
    pub stderr: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Monte Carlo over independent pairs driven by the same S.
pub fn collision_statistic(
    gs: &GeneratorSet,
    p: &GroupParams,
    t: f64,
    pairs: u64,
    seed: u64,
) -> Result<CollisionEstimate> {
    check_horizon(t)?;
    let hits: u64 = (0..pairs)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i);
            let a = walk_position(gs, p, t, &mut rng);
            let b = walk_position(gs, p, t, &mut rng);
            (a == b) as u64
        })
        .sum();
    let size = p.size() as f64;
    let (q, q_se) = proportion(hits, pairs);
    let estimate = size * q - 1.0;
    let stderr = size * q_se;
    Ok(CollisionEstimate {
        pairs,
        hits,
        estimate,
        stderr,
        ci_low: estimate - 1.96 * stderr,
        ci_high: estimate + 1.96 * stderr,
    })
}

/// One CSV row of per-replicate trajectory statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRow {
    pub replicate: u64,
    pub n: u64,
    pub n_s: u64,
    /// Flat index of X(t), the cell it falls in for empirical TV.
    pub tv_bucket: u64,
    /// Event B for this walk and an independent companion walk.
    pub b_flag: bool,
    pub j0: u64,
    pub j1: u64,
    pub j2plus: u64,
    pub identity_ok: bool,
}

pub const TRAJECTORY_CSV_HEADER: &str = "replicate,N,N_S,tv_bucket,B_flag,J0,J1,J2plus";

impl TrajectoryRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.replicate,
            self.n,
            self.n_s,
            self.tv_bucket,
            self.b_flag as u8,
            self.j0,
            self.j1,
            self.j2plus
        )
    }
}

pub fn trajectory_rows(
    gs: &GeneratorSet,
    p: &GroupParams,
    t: f64,
    replicates: u64,
    seed: u64,
) -> Result<Vec<TrajectoryRow>> {
    check_horizon(t)?;
    (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(seed, r);
            let (traj, snap) = simulate(gs, p, t, &mut rng)?;
            let companion = usage_counts(gs.k(), t, &mut rng);
            let ji = ji_counts(&traj, gs);
            Ok(TrajectoryRow {
                replicate: r,
                n: traj.n_total,
                n_s: traj.n_refl,
                tv_bucket: snap.x.index(p),
                b_flag: event_b(&traj.usage, &companion),
                j0: ji.get(0),
                j1: ji.get(1),
                j2plus: ji.at_least(2),
                identity_ok: aux_identity_check(&snap, gs, p),
            })
        })
        .collect()
}
