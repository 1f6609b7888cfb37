//! Cutoff scans over (n, k, replicate) cells.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Method};
use crate::entropy::times::cutoff_time;
use crate::error::{Error, Result};
use crate::exact::spectral::{tv_curve, EvolveOptions};
use crate::group::{sample_balanced_generator_set, GeneratorSet, GroupParams};
use crate::rng::{derive_seed, stream};
use crate::walk::walk_position;

const TAG_GENERATORS: u64 = 0x6765_6e73;
const TAG_WALKS: u64 = 0x7761_6c6b;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub n: u64,
    pub k: u64,
    pub replicate: usize,
    pub regime: String,
    pub alpha: f64,
    pub t0: f64,
    pub t: f64,
    pub tv: f64,
    /// 0 for exact rows.
    pub stderr: f64,
    /// Upward bias of the Monte Carlo plug-in, `sqrt(|G| / (2π N))`; 0 for exact rows.
    pub bias: f64,
    pub gens_hash: String,
    /// Seed the generator set was drawn from.
    pub seed: u64,
    pub rejections: usize,
    pub status: String,
}

impl ProfileRow {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutoffProfile {
    pub config_hash: String,
    pub rows: Vec<ProfileRow>,
    pub failed_cells: usize,
    pub rejections: usize,
}

/// Key that seeds a cell's streams; independent of scheduling.
fn cell_key(n: u64, k: u64) -> u64 {
    n.wrapping_mul(0x0000_0100_0000_01B3) ^ k
}

fn sample_cell_generators(cfg: &ExperimentConfig, p: &GroupParams, k: u64, rep: usize) -> Result<(GeneratorSet, usize, u64)> {
    let seed = derive_seed(cfg.seed, TAG_GENERATORS ^ cell_key(p.n(), k), rep as u64);
    let mut rng = stream(seed, 0);
    let (gs, rejected) = sample_balanced_generator_set(p, k as usize, &mut rng, cfg.max_balance_tries)?;
    Ok((gs.with_seed(seed), rejected, seed))
}

/// Empirical-distribution TV of `samples` walk endpoints against uniform.
pub fn tv_monte_carlo(gs: &GeneratorSet, p: &GroupParams, t: f64, samples: usize, seed: u64) -> (f64, f64, f64) {
    let counts = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i as u64);
            walk_position(gs, p, t, &mut rng).index(p) as usize
        })
        .fold(
            || vec![0u64; p.size() as usize],
            |mut acc, i| {
                acc[i] += 1;
                acc
            },
        )
        .reduce(
            || vec![0u64; p.size() as usize],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    let nf = samples as f64;
    let u = 1.0 / p.size() as f64;
    let tv = 0.5 * counts.iter().map(|&c| (c as f64 / nf - u).abs()).sum::<f64>();
    // one sample moves the plug-in by at most 1/N, so Var <= 1/(2N)
    let stderr = (0.5 / nf).sqrt();
    let bias = (p.size() as f64 / (2.0 * std::f64::consts::PI * nf)).sqrt();
    (tv, stderr, bias)
}

fn run_cell(cfg: &ExperimentConfig, n: u64, k: u64, rep: usize) -> (Vec<ProfileRow>, bool, usize) {
    let alphas = cfg.alpha_grid();
    let p = GroupParams::new(n).expect("validated prime");
    let failed_rows = |regime: String, t0: f64, hash: String, seed: u64, rejections: usize, why: String| {
        alphas
            .iter()
            .map(|&alpha| ProfileRow {
                n,
                k,
                replicate: rep,
                regime: regime.clone(),
                alpha,
                t0,
                t: alpha * t0,
                tv: f64::NAN,
                stderr: f64::NAN,
                bias: f64::NAN,
                gens_hash: hash.clone(),
                seed,
                rejections,
                status: format!("failed: {why}"),
            })
            .collect::<Vec<_>>()
    };
    let ct = match cutoff_time(k, p.size()) {
        Ok(ct) => ct,
        Err(e) => return (failed_rows(String::new(), f64::NAN, String::new(), 0, 0, e.to_string()), false, 0),
    };
    let regime = ct.label.to_string();
    let (gs, rejections, seed) = match sample_cell_generators(cfg, &p, k, rep) {
        Ok(x) => x,
        Err(e) => return (failed_rows(regime, ct.t0, String::new(), 0, 0, e.to_string()), false, 0),
    };
    let hash = gs.content_hash();
    let times: Vec<f64> = alphas.iter().map(|a| a * ct.t0).collect();
    let values: Result<Vec<(f64, f64, f64)>> = match cfg.method {
        Method::Exact => {
            let opts = EvolveOptions {
                tol: cfg.tolerances.evolve_tol,
                step_budget: cfg.tolerances.step_budget,
            };
            tv_curve(&gs, &p, &times, opts).map(|c| c.into_iter().map(|pt| (pt.tv, 0.0, 0.0)).collect())
        }
        Method::Mc => Ok(times
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let walk_seed = derive_seed(seed, TAG_WALKS, i as u64);
                tv_monte_carlo(&gs, &p, t, cfg.mc_samples, walk_seed)
            })
            .collect()),
    };
    match values {
        Ok(v) => {
            let rows = alphas
                .iter()
                .zip(&times)
                .zip(v)
                .map(|((&alpha, &t), (tv, stderr, bias))| ProfileRow {
                    n,
                    k,
                    replicate: rep,
                    regime: regime.clone(),
                    alpha,
                    t0: ct.t0,
                    t,
                    tv,
                    stderr,
                    bias,
                    gens_hash: hash.clone(),
                    seed,
                    rejections,
                    status: "ok".into(),
                })
                .collect();
            (rows, true, rejections)
        }
        Err(e) => (failed_rows(regime, ct.t0, hash, seed, rejections, e.to_string()), false, rejections),
    }
}

/// Every (n, k, replicate) cell, run on a pool of `threads` workers (all
/// cores when `None`). Rows come back sorted by (n, k, replicate, α), so the
/// output does not depend on the thread count.
pub fn run_cutoff_scan(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<CutoffProfile> {
    cfg.validate()?;
    let mut cells = Vec::new();
    for &n in &cfg.primes {
        for k in cfg.k_rule.ks(2 * n) {
            for rep in 0..cfg.replicates {
                cells.push((n, k, rep));
            }
        }
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Domain(format!("thread pool: {e}")))?;
    let results: Vec<(Vec<ProfileRow>, bool, usize)> =
        pool.install(|| cells.par_iter().map(|&(n, k, rep)| run_cell(cfg, n, k, rep)).collect());
    let failed_cells = results.iter().filter(|r| !r.1).count();
    let rejections = results.iter().map(|r| r.2).sum();
    let mut rows: Vec<ProfileRow> = results.into_iter().flat_map(|r| r.0).collect();
    rows.sort_by(|a, b| {
        (a.n, a.k, a.replicate)
            .cmp(&(b.n, b.k, b.replicate))
            .then(a.alpha.total_cmp(&b.alpha))
    });
    Ok(CutoffProfile {
        config_hash: cfg.hash(),
        rows,
        failed_cells,
        rejections,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::KRule;

    #[test]
    fn zero_grid_gives_max_distance() {
        let mut cfg = ExperimentConfig::new(vec![13], KRule::Fixed { k: vec![4] }, 5);
        cfg.alphas = vec![0.0];
        cfg.replicates = 2;
        let prof = run_cutoff_scan(&cfg, Some(1)).unwrap();
        assert_eq!(prof.rows.len(), 2);
        for r in &prof.rows {
            assert!((r.tv - (1.0 - 1.0 / 26.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn rows_monotone_and_sorted() {
        let mut cfg = ExperimentConfig::new(vec![101], KRule::Fixed { k: vec![6] }, 11);
        cfg.replicates = 3;
        let prof = run_cutoff_scan(&cfg, None).unwrap();
        assert_eq!(prof.failed_cells, 0);
        for w in prof.rows.windows(2) {
            if (w[0].n, w[0].k, w[0].replicate) == (w[1].n, w[1].k, w[1].replicate) {
                assert!(w[0].alpha < w[1].alpha);
                assert!(w[1].tv <= w[0].tv + 1e-9);
            }
        }
    }

    #[test]
    fn budget_failure_marks_cell() {
        let mut cfg = ExperimentConfig::new(vec![101], KRule::Fixed { k: vec![6] }, 1);
        cfg.replicates = 1;
        cfg.tolerances.step_budget = 3;
        let prof = run_cutoff_scan(&cfg, Some(2)).unwrap();
        assert_eq!(prof.failed_cells, 1);
        assert!(prof.rows.iter().all(|r| r.status.starts_with("failed")));
    }
}
