//! Concentration of the rotation-coordinate information content
//! `Q_R(t) = -Σ_a log P(W_{t/k} = C_a)`.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::srw::{h_exact, SrwPmf};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream};
use crate::stats::{compensated_sum, moments, Moments};

/// `E[Q_R(t)] = k_R h(t/k)`.
pub fn qr_entropy_mean(t: f64, k: usize, k_r: usize) -> f64 {
    k_r as f64 * h_exact(t / k as f64)
}

/// k_R independent SRW coordinates run for time t/k.
pub fn sample_cr<R: Rng + ?Sized>(t: f64, k: usize, k_r: usize, rng: &mut R) -> Vec<i64> {
    let lam = t / (2.0 * k as f64);
    if lam <= 0.0 {
        return vec![0; k_r];
    }
    let pois = Poisson::new(lam).expect("positive finite rate");
    (0..k_r)
        .map(|_| pois.sample(rng) as i64 - pois.sample(rng) as i64)
        .collect()
}

pub fn q_r(c: &[i64], table: &SrwPmf) -> f64 {
    compensated_sum(c.iter().map(|&x| -table.ln_pmf(x)))
}

/// Draws of Q_R(t), one stream per replicate.
pub fn sample_qr(t: f64, k: usize, k_r: usize, replicates: usize, seed: u64) -> Vec<f64> {
    let table = SrwPmf::new(t / k as f64);
    (0..replicates)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i as u64);
            q_r(&sample_cr(t, k, k_r, &mut rng), &table)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QrConfig {
    pub k: usize,
    pub k_r: usize,
    pub t0: f64,
    pub eps: f64,
    pub omega: f64,
    pub replicates: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QrReport {
    pub config: QrConfig,
    /// `E[Q_R(t₀)]`
    pub mean_t0: f64,
    /// Fraction with `Q_R((1-ε)t₀) <= E[Q_R(t₀)] - ω`.
    pub frac_below_before: f64,
    /// Fraction with `Q_R((1+ε)t₀) >= E[Q_R(t₀)] + ω`.
    pub frac_above_after: f64,
    pub at_t0: Moments,
    /// Sample `Var(Q_R(t₀)) / k_R`.
    pub beta_hat: f64,
    /// Sup of the exact SRW varentropy over a log grid of times.
    pub beta_grid_sup: f64,
}

pub fn qr_concentration_experiment(cfg: &QrConfig) -> Result<QrReport> {
    if cfg.k == 0 || cfg.k_r > cfg.k {
        return Err(Error::Domain(format!("need 0 <= k_R <= k, k >= 1 (k={}, k_R={})", cfg.k, cfg.k_r)));
    }
    if !(cfg.t0 >= 0.0 && cfg.eps > 0.0 && cfg.eps < 1.0 && cfg.replicates > 1) {
        return Err(Error::Domain("need t0 >= 0, eps in (0,1), replicates >= 2".into()));
    }
    let mean_t0 = qr_entropy_mean(cfg.t0, cfg.k, cfg.k_r);
    let before = sample_qr((1.0 - cfg.eps) * cfg.t0, cfg.k, cfg.k_r, cfg.replicates, derive_seed(cfg.seed, 1, 0));
    let after = sample_qr((1.0 + cfg.eps) * cfg.t0, cfg.k, cfg.k_r, cfg.replicates, derive_seed(cfg.seed, 2, 0));
    let at = sample_qr(cfg.t0, cfg.k, cfg.k_r, cfg.replicates, derive_seed(cfg.seed, 3, 0));
    let n = cfg.replicates as f64;
    let frac_below_before = before.iter().filter(|&&q| q <= mean_t0 - cfg.omega).count() as f64 / n;
    let frac_above_after = after.iter().filter(|&&q| q >= mean_t0 + cfg.omega).count() as f64 / n;
    let at_t0 = moments(&at);
    let beta_hat = if cfg.k_r > 0 { at_t0.variance / cfg.k_r as f64 } else { 0.0 };
    Ok(QrReport {
        config: *cfg,
        mean_t0,
        frac_below_before,
        frac_above_after,
        at_t0,
        beta_hat,
        beta_grid_sup: srw_varentropy_sup(),
    })
}

/// `sup_s Var(-log P(W_s))` over 200 log-spaced s in [1e-3, 1e4].
pub fn srw_varentropy_sup() -> f64 {
    (0..200)
        .map(|i| 10f64.powf(-3.0 + 7.0 * i as f64 / 199.0))
        .map(|s| SrwPmf::new(s).varentropy())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_time_is_zero() {
        let qs = sample_qr(0.0, 8, 4, 10, 1);
        assert!(qs.iter().all(|&q| q == 0.0));
        assert_eq!(qr_entropy_mean(0.0, 8, 4), 0.0);
    }

    #[test]
    fn sample_mean_near_exact() {
        let (t, k, k_r) = (40.0, 8, 5);
        let qs = sample_qr(t, k, k_r, 20_000, 9);
        let m = moments(&qs);
        let want = qr_entropy_mean(t, k, k_r);
        assert!((m.mean - want).abs() < 4.0 * m.stderr, "{} vs {want} (se {})", m.mean, m.stderr);
    }
}
