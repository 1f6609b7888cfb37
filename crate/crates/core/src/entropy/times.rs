//! Entropic time and the three-branch cutoff time.

use serde::{Deserialize, Serialize};

use super::srw::h_exact;
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-9;
const MAX_ITERS: usize = 200;

/// Solve `k · h(t/k) = log_n` for t by doubling then bisection.
pub fn entropic_time(k: u64, log_n: f64, tol: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("k must be >= 1".into()));
    }
    if !(log_n.is_finite() && log_n > 0.0) {
        return Err(Error::Domain(format!("log N must be finite and > 0, got {log_n}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain("tol must be > 0".into()));
    }
    let kf = k as f64;
    let f = |t: f64| kf * h_exact(t / kf) - log_n;
    let mut lo = 0.0;
    let mut hi = kf;
    let mut iters = 0;
    while f(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        iters += 1;
        if iters > MAX_ITERS || !hi.is_finite() {
            return Err(Error::NonConvergence(format!("no bracket for k={k}, log N={log_n}")));
        }
    }
    for _ in 0..MAX_ITERS {
        let mid = 0.5 * (lo + hi);
        let v = f(mid);
        if v.abs() <= tol {
            return Ok(mid);
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            // no representable t gets closer
            return Ok(mid);
        }
    }
    Err(Error::NonConvergence(format!(
        "bisection for k={k}, log N={log_n} did not reach tol {tol}"
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// k ≪ log|G|
    Small,
    /// k ≍ log|G|
    Comparable,
    /// k ≫ log|G|
    Large,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::Small => "k<<log|G|",
            Regime::Comparable => "k~log|G|",
            Regime::Large => "k>>log|G|",
        }
    }
}

/// Ratio k/log|G| splits the branches at `small_below` and `large_above`.
/// Within a factor `seam` of either split both adjacent branches are reported.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeThresholds {
    pub small_below: f64,
    pub large_above: f64,
    pub seam: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        Self {
            small_below: 1.0,
            large_above: 10.0,
            seam: 1.25,
        }
    }
}

impl RegimeThresholds {
    pub fn classify(&self, ratio: f64) -> Regime {
        if ratio < self.small_below {
            Regime::Small
        } else if ratio > self.large_above {
            Regime::Large
        } else {
            Regime::Comparable
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchValue {
    pub regime: Regime,
    pub t0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutoffTime {
    pub t0: f64,
    pub regime: Regime,
    pub label: &'static str,
    pub k: u64,
    pub group_size: u64,
    /// k / log|G|
    pub ratio: f64,
    /// Adjacent-branch values when the ratio sits near a split.
    pub near_threshold: Vec<BranchValue>,
}

pub fn branch_small(k: u64, group_size: u64) -> f64 {
    let kf = k as f64;
    kf / (2.0 * std::f64::consts::PI * std::f64::consts::E) * (group_size as f64).powf(2.0 / (kf - 1.0))
}

pub fn branch_comparable(k: u64, group_size: u64) -> Result<f64> {
    entropic_time(k, (group_size as f64).ln(), DEFAULT_TOL)
}

pub fn branch_large(k: u64, group_size: u64) -> Result<f64> {
    let lg = (group_size as f64).ln();
    let ratio = k as f64 / lg;
    if ratio <= std::f64::consts::E {
        return Err(Error::Domain(format!(
            "large-k branch needs k/log|G| > e, got {ratio}"
        )));
    }
    Ok(lg / ratio.ln())
}

fn branch_value(regime: Regime, k: u64, group_size: u64) -> Result<f64> {
    match regime {
        Regime::Small => Ok(branch_small(k, group_size)),
        Regime::Comparable => branch_comparable(k, group_size),
        Regime::Large => branch_large(k, group_size),
    }
}

pub fn cutoff_time(k: u64, group_size: u64) -> Result<CutoffTime> {
    cutoff_time_with(k, group_size, &RegimeThresholds::default())
}

pub fn cutoff_time_with(k: u64, group_size: u64, th: &RegimeThresholds) -> Result<CutoffTime> {
    if k < 2 {
        return Err(Error::Domain("cutoff_time needs k >= 2".into()));
    }
    if group_size < 6 {
        return Err(Error::Domain("cutoff_time needs |G| >= 6".into()));
    }
    let ratio = k as f64 / (group_size as f64).ln();
    let regime = th.classify(ratio);
    let t0 = branch_value(regime, k, group_size)?;
    let mut near_threshold = Vec::new();
    let near = |split: f64| ratio >= split / th.seam && ratio <= split * th.seam;
    let mut candidates = Vec::new();
    if near(th.small_below) {
        candidates.extend([Regime::Small, Regime::Comparable]);
    }
    if near(th.large_above) {
        candidates.extend([Regime::Comparable, Regime::Large]);
    }
    for r in candidates {
        if near_threshold.iter().any(|b: &BranchValue| b.regime == r) {
            continue;
        }
        if let Ok(t) = branch_value(r, k, group_size) {
            near_threshold.push(BranchValue { regime: r, t0: t });
        }
    }
    Ok(CutoffTime {
        t0,
        regime,
        label: regime.label(),
        k,
        group_size,
        ratio,
        near_threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inversion_identity() {
        let t = entropic_time(1, h_exact(5.0), DEFAULT_TOL).unwrap();
        assert!((t - 5.0).abs() < 1e-6, "{t}");
    }

    #[test]
    fn residual_within_tol() {
        let (k, ln) = (7u64, 30.0);
        let t = entropic_time(k, ln, DEFAULT_TOL).unwrap();
        assert!((k as f64 * h_exact(t / k as f64) - ln).abs() <= DEFAULT_TOL);
    }

    #[test]
    fn monotone_in_n() {
        let a = entropic_time(5, 10.0, DEFAULT_TOL).unwrap();
        let b = entropic_time(5, 12.0, DEFAULT_TOL).unwrap();
        assert!(a < b);
    }

    #[test]
    fn small_k_branch_ratio() {
        let ln = 1e6f64.ln();
        let t = entropic_time(4, ln, DEFAULT_TOL).unwrap();
        let approx = 4.0 / (2.0 * std::f64::consts::PI * std::f64::consts::E) * 1e6f64.powf(0.5);
        let r = t / approx;
        assert!((0.8..=1.25).contains(&r), "ratio {r}");
    }

    #[test]
    fn branch_examples() {
        let c = cutoff_time(4, 202).unwrap();
        assert_eq!(c.regime, Regime::Small);
        let want = 4.0 / (2.0 * std::f64::consts::PI * std::f64::consts::E) * 202f64.powf(2.0 / 3.0);
        assert!((c.t0 - want).abs() < 1e-12 * want);

        let c = cutoff_time(10_000, 202).unwrap();
        assert_eq!(c.regime, Regime::Large);
        let lg = 202f64.ln();
        assert!((c.t0 - lg / (1e4 / lg).ln()).abs() < 1e-12);
        assert!((c.t0 - 0.7039).abs() < 5e-4);
    }

    #[test]
    fn seam_reports_both_sides() {
        // k/log|G| ≈ 1.0002 sits on the small/comparable split
        let g = 403u64;
        let k = (g as f64).ln().round() as u64;
        let c = cutoff_time(k, g).unwrap();
        assert_eq!(c.near_threshold.len(), 2);
    }

    #[test]
    fn large_branch_guard() {
        let th = RegimeThresholds {
            small_below: 0.5,
            large_above: 1.5,
            seam: 1.0,
        };
        assert!(cutoff_time_with(10, 202, &th).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(cutoff_time(1, 202).is_err());
        assert!(cutoff_time(3, 5).is_err());
        assert!(entropic_time(0, 3.0, 1e-9).is_err());
    }
}
