//! Scan configuration and its content hash.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exact::spectral::{DEFAULT_STEP_BUDGET, DEFAULT_TOL};
use crate::group::GroupParams;

pub const DEFAULT_ALPHAS: [f64; 7] = [0.25, 0.5, 0.8, 1.0, 1.2, 2.0, 4.0];
pub const DEFAULT_PRIMES: [u64; 3] = [101, 1009, 10007];
/// Exact evolution is the default whenever |G| is at most this.
pub const EXACT_PREFERRED_MAX_G: u64 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Exact,
    Mc,
}

/// How k is chosen for each n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum KRule {
    Fixed { k: Vec<u64> },
    /// `k = round(c · log|G|)` for each factor c.
    LogRatio { factors: Vec<f64> },
    /// `k = round(|G|^e)` for each exponent e.
    Power { exponents: Vec<f64> },
}

impl KRule {
    pub fn ks(&self, group_size: u64) -> Vec<u64> {
        let g = group_size as f64;
        let mut ks: Vec<u64> = match self {
            KRule::Fixed { k } => k.clone(),
            KRule::LogRatio { factors } => factors.iter().map(|c| (c * g.ln()).round() as u64).collect(),
            KRule::Power { exponents } => exponents.iter().map(|e| g.powf(*e).round() as u64).collect(),
        };
        ks.sort_unstable();
        ks.dedup();
        ks
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_tol")]
    pub evolve_tol: f64,
    #[serde(default = "default_budget")]
    pub step_budget: u64,
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_budget() -> u64 {
    DEFAULT_STEP_BUDGET
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            evolve_tol: DEFAULT_TOL,
            step_budget: DEFAULT_STEP_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_primes")]
    pub primes: Vec<u64>,
    pub k_rule: KRule,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<f64>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub method: Method,
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_max_tries")]
    pub max_balance_tries: usize,
    #[serde(default)]
    pub output: Option<String>,
}

fn default_primes() -> Vec<u64> {
    DEFAULT_PRIMES.to_vec()
}

fn default_alphas() -> Vec<f64> {
    DEFAULT_ALPHAS.to_vec()
}

fn default_epsilons() -> Vec<f64> {
    vec![1.0]
}

fn default_replicates() -> usize {
    10
}

fn default_mc_samples() -> usize {
    100_000
}

fn default_max_tries() -> usize {
    10_000
}

impl ExperimentConfig {
    pub fn new(primes: Vec<u64>, k_rule: KRule, seed: u64) -> Self {
        Self {
            primes,
            k_rule,
            alphas: default_alphas(),
            epsilons: default_epsilons(),
            replicates: default_replicates(),
            method: Method::Exact,
            mc_samples: default_mc_samples(),
            seed,
            tolerances: Tolerances::default(),
            max_balance_tries: default_max_tries(),
            output: None,
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.primes.is_empty() {
            return Err(Error::Domain("config lists no primes".into()));
        }
        for &n in &self.primes {
            let p = GroupParams::new(n)?;
            p.require_prime()?;
            if self.method == Method::Exact {
                p.require_exact_size()?;
            }
        }
        if self.alphas.is_empty() || self.alphas.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return Err(Error::Domain("alphas must be finite and >= 0".into()));
        }
        let mut sorted = self.alphas.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Domain("alphas must be distinct".into()));
        }
        if self.replicates == 0 {
            return Err(Error::Domain("replicates must be >= 1".into()));
        }
        if self.method == Method::Mc && self.mc_samples == 0 {
            return Err(Error::Domain("mc_samples must be >= 1".into()));
        }
        if self.epsilons.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(Error::Domain("epsilons must be > 0".into()));
        }
        for &n in &self.primes {
            if self.k_rule.ks(2 * n).iter().any(|&k| k < 2) {
                return Err(Error::Domain(format!("k rule yields k < 2 at n={n}")));
            }
        }
        Ok(())
    }

    /// Sorted, deduplicated α grid.
    pub fn alpha_grid(&self) -> Vec<f64> {
        let mut a = self.alphas.clone();
        a.sort_by(f64::total_cmp);
        a.dedup();
        a
    }

    /// SHA-256 of the canonical JSON form, first 16 hex digits.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_json().as_bytes());
        hex::encode(&digest[..8])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_in() {
        let cfg = ExperimentConfig::from_json(r#"{"k_rule":{"rule":"fixed","k":[5]},"seed":3}"#).unwrap();
        assert_eq!(cfg.primes, vec![101, 1009, 10007]);
        assert_eq!(cfg.alphas, DEFAULT_ALPHAS.to_vec());
        assert_eq!(cfg.method, Method::Exact);
    }

    #[test]
    fn rejects_unknown_fields_and_composites() {
        assert!(ExperimentConfig::from_json(r#"{"k_rule":{"rule":"fixed","k":[5]},"bogus":1}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"primes":[100],"k_rule":{"rule":"fixed","k":[5]}}"#).is_err());
    }

    #[test]
    fn k_rules() {
        assert_eq!(KRule::LogRatio { factors: vec![1.0, 2.0] }.ks(202), vec![5, 11]);
        assert_eq!(KRule::Power { exponents: vec![0.5] }.ks(202), vec![14]);
    }

    #[test]
    fn hash_tracks_content() {
        let a = ExperimentConfig::new(vec![101], KRule::Fixed { k: vec![6] }, 1);
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.seed = 2;
        assert_ne!(a.hash(), b.hash());
    }
}
