//! Law of `v · U mod n` for U uniform on ℤ_n^k: uniform on the subgroup γℤ_n
//! with `γ = gcd(v_1, …, v_k, n)`.

use num_integer::Integer;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::GroupParams;
use crate::rng::stream;
use crate::stats::chi_square_gof;

/// Exhaustive mode enumerates at most this many vectors U.
pub const EXACT_MAX_ENUM: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GcdReport {
    pub n: u64,
    pub v: Vec<u64>,
    pub gamma: u64,
    pub exact: bool,
    /// Exact mode: counts over ℤ_n. Monte Carlo mode: observed counts.
    pub counts: Vec<u64>,
    /// Exact: every multiple of γ has the same count and nothing else is hit.
    /// Monte Carlo: no mass off γℤ_n and the chi-square p-value exceeds 0.001.
    pub uniform: bool,
    pub p_value: Option<f64>,
}

pub fn gcd_of(v: &[u64], n: u64) -> u64 {
    v.iter().fold(n, |g, &x| g.gcd(&(x % n)))
}

fn verdict(counts: &[u64], gamma: u64) -> bool {
    let on: Vec<u64> = counts.iter().step_by(gamma as usize).copied().collect();
    let off_zero = counts
        .iter()
        .enumerate()
        .all(|(i, &c)| i as u64 % gamma == 0 || c == 0);
    off_zero && on.windows(2).all(|w| w[0] == w[1]) && on.first().is_some_and(|&c| c > 0)
}

/// `samples = None` enumerates ℤ_n^k; otherwise draws that many U.
pub fn gcd_uniformity_check(p: &GroupParams, v: &[u64], samples: Option<usize>, seed: u64) -> Result<GcdReport> {
    if v.is_empty() {
        return Err(Error::Domain("v must be nonempty".into()));
    }
    let n = p.n();
    let gamma = gcd_of(v, n);
    let mut counts = vec![0u64; n as usize];
    match samples {
        None => {
            let total = (n as u128).checked_pow(v.len() as u32).unwrap_or(u128::MAX);
            if total > EXACT_MAX_ENUM as u128 {
                return Err(Error::ScaleGuard {
                    what: format!("enumerating n^k = {n}^{}", v.len()),
                    limit: format!("{EXACT_MAX_ENUM} vectors"),
                });
            }
            let mut u = vec![0u64; v.len()];
            loop {
                let dot = v.iter().zip(&u).fold(0u64, |acc, (a, b)| (acc + (a % n) * b) % n);
                counts[dot as usize] += 1;
                let mut i = 0;
                loop {
                    if i == u.len() {
                        let uniform = verdict(&counts, gamma);
                        return Ok(GcdReport {
                            n,
                            v: v.to_vec(),
                            gamma,
                            exact: true,
                            counts,
                            uniform,
                            p_value: None,
                        });
                    }
                    u[i] += 1;
                    if u[i] < n {
                        break;
                    }
                    u[i] = 0;
                    i += 1;
                }
            }
        }
        Some(s) => {
            let mut rng = stream(seed, 0);
            for _ in 0..s {
                let dot = v
                    .iter()
                    .fold(0u64, |acc, a| (acc + (a % n) * rng.random_range(0..n)) % n);
                counts[dot as usize] += 1;
            }
            let cells = (n / gamma) as usize;
            let off: u64 = counts
                .iter()
                .enumerate()
                .filter(|(i, _)| *i as u64 % gamma != 0)
                .map(|(_, c)| c)
                .sum();
            let on: Vec<u64> = counts.iter().step_by(gamma as usize).copied().collect();
            let gof = chi_square_gof(&on, &vec![1.0 / cells as f64; cells], 5.0);
            let p_value = if off > 0 { 0.0 } else { gof.p_value };
            Ok(GcdReport {
                n,
                v: v.to_vec(),
                gamma,
                exact: false,
                counts,
                uniform: p_value > 1e-3,
                p_value: Some(p_value),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_cases() {
        let p = GroupParams::new(13).unwrap();
        let r = gcd_uniformity_check(&p, &[1, 0], None, 0).unwrap();
        assert!(r.uniform && r.gamma == 1);
        let r = gcd_uniformity_check(&p, &[2, 3], None, 0).unwrap();
        assert!(r.uniform);
        assert!(r.counts.iter().all(|&c| c == 13));
    }

    #[test]
    fn composite_subgroup() {
        let p = GroupParams::new(12).unwrap();
        let r = gcd_uniformity_check(&p, &[4, 8], None, 0).unwrap();
        assert_eq!(r.gamma, 4);
        assert!(r.uniform);
        assert_eq!(r.counts, vec![48, 0, 0, 0, 48, 0, 0, 0, 48, 0, 0, 0]);
    }

    #[test]
    fn monte_carlo_mode() {
        let p = GroupParams::new(12).unwrap();
        let r = gcd_uniformity_check(&p, &[3, 9, 6], Some(20_000), 7).unwrap();
        assert_eq!(r.gamma, 3);
        assert!(r.uniform, "{r:?}");
    }
}
