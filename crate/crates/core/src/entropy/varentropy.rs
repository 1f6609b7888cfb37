//! Entropy and varentropy of Y_n against their leading-order terms.

use rayon::prelude::*;
use serde::Serialize;

use super::pmf::{entropy_of, varentropy_of, y_pmf_exact};
use super::srw::h_exact;
use crate::error::Result;
use crate::rng::stream;
use crate::stats::moments;
use crate::walk::sample_cs_direct;

/// `k_S · h(m / k_S)`.
pub fn y_entropy_asymptotic(k_s: usize, m: u64) -> f64 {
    assert!(k_s >= 1, "k_S must be >= 1");
    k_s as f64 * h_exact(m as f64 / k_s as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct YEntropyGap {
    pub k_s: usize,
    pub m: usize,
    pub exact: f64,
    pub asymptotic: f64,
    /// `|exact - asymptotic| / asymptotic`
    pub relative_gap: f64,
}

pub fn y_entropy_gap(k_s: usize, m: usize) -> Result<YEntropyGap> {
    let exact = entropy_of(&y_pmf_exact(k_s, m)?);
    let asymptotic = y_entropy_asymptotic(k_s, m as u64);
    let relative_gap = if asymptotic > 0.0 {
        (exact - asymptotic).abs() / asymptotic
    } else {
        0.0
    };
    Ok(YEntropyGap {
        k_s,
        m,
        exact,
        asymptotic,
        relative_gap,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarloVar {
    pub samples: usize,
    pub variance: f64,
    pub stderr: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarentropyReport {
    pub k_s: usize,
    pub n_steps: usize,
    pub exact_variance: f64,
    /// `n ((log k_S)² + 2) / 2`
    pub bound: f64,
    pub within_bound: bool,
    pub monte_carlo: Option<MonteCarloVar>,
}

pub fn varentropy_bound(k_s: usize, n_steps: usize) -> f64 {
    n_steps as f64 * ((k_s as f64).ln().powi(2) + 2.0) / 2.0
}

/// Exact `Var(Q_n)` from the pmf; with `samples > 0` also a Monte Carlo
/// estimate drawing Y_n from its step sequence and scoring with the pmf.
pub fn varentropy_bound_check(k_s: usize, n_steps: usize, samples: usize, seed: u64) -> Result<VarentropyReport> {
    let pmf = y_pmf_exact(k_s, n_steps)?;
    let exact_variance = varentropy_of(&pmf);
    let bound = varentropy_bound(k_s, n_steps);
    let monte_carlo = if samples > 0 {
        let qs: Vec<f64> = (0..samples)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream(seed, i as u64);
                let y = sample_cs_direct(k_s, n_steps as u64, &mut rng).expect("k_S >= 1 checked by pmf");
                -pmf.prob(&y).ln()
            })
            .collect();
        let m = moments(&qs);
        Some(MonteCarloVar {
            samples,
            variance: m.variance,
            stderr: m.var_stderr,
            mean: m.mean,
        })
    } else {
        None
    };
    Ok(VarentropyReport {
        k_s,
        n_steps,
        exact_variance,
        bound,
        within_bound: exact_variance <= bound,
        monte_carlo,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_when_one_coordinate() {
        let r = varentropy_bound_check(1, 10, 0, 0).unwrap();
        assert!(r.exact_variance.abs() < 1e-12);
        assert!(r.within_bound);
    }

    #[test]
    fn bound_value() {
        assert!((varentropy_bound(4, 12) - 23.53).abs() < 0.01);
    }

    #[test]
    fn asymptotic_at_zero() {
        assert_eq!(y_entropy_asymptotic(3, 0), 0.0);
    }
}
