//! Which cutoff branch and which sufficient condition applies to (k, n).

use serde::{Deserialize, Serialize};

use crate::entropy::times::{branch_comparable, branch_large, branch_small, RegimeThresholds};
use crate::error::{Error, Result};

/// `≪` / `≫` rendered as ratio thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlagThresholds {
    pub much_less: f64,
    pub much_greater: f64,
}

impl Default for FlagThresholds {
    fn default() -> Self {
        Self {
            much_less: 0.1,
            much_greater: 10.0,
        }
    }
}

/// One side of an inequality `lhs ≪ rhs` (or `≫`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Condition {
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`
    pub ratio: f64,
    /// The plain inequality `lhs < rhs` (or `>`).
    pub holds: bool,
    /// Ratio beyond the ≪/≫ threshold. Advisory only.
    pub flag: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeReport {
    pub k: u64,
    pub n: u64,
    pub group_size: u64,
    pub log_g: f64,
    /// `k / log|G|`
    pub ratio: f64,
    pub label: &'static str,
    pub branch_small: f64,
    pub branch_comparable: Option<f64>,
    pub branch_large: Option<f64>,
    /// `k² ≪ |G|^{2/k}`
    pub condition_i: Condition,
    /// `k ≫ |G|^{2/k} (log k)²`
    pub condition_ii: Condition,
    pub large_k_flag: bool,
    /// `log|G| / log log|G|`
    pub simplified_bound: f64,
    /// `k <= log|G|/log log|G|`
    pub simplified_small: bool,
    /// `k >= 2 log|G|/log log|G|`
    pub simplified_large: bool,
}

pub fn regime_report(k: u64, n: u64) -> Result<RegimeReport> {
    regime_report_with(k, n, &FlagThresholds::default(), &RegimeThresholds::default())
}

pub fn regime_report_with(k: u64, n: u64, flags: &FlagThresholds, th: &RegimeThresholds) -> Result<RegimeReport> {
    if k < 2 || n < 3 {
        return Err(Error::Domain(format!("need k >= 2 and n >= 3, got k={k}, n={n}")));
    }
    let group_size = 2 * n;
    let g = group_size as f64;
    let kf = k as f64;
    let log_g = g.ln();
    let ratio = kf / log_g;
    let g_pow = g.powf(2.0 / kf);

    let lhs_i = kf * kf;
    let r_i = lhs_i / g_pow;
    let condition_i = Condition {
        lhs: lhs_i,
        rhs: g_pow,
        ratio: r_i,
        holds: lhs_i < g_pow,
        flag: r_i <= flags.much_less,
    };
    let rhs_ii = g_pow * kf.ln().powi(2);
    let r_ii = kf / rhs_ii;
    let condition_ii = Condition {
        lhs: kf,
        rhs: rhs_ii,
        ratio: r_ii,
        holds: kf > rhs_ii,
        flag: r_ii >= flags.much_greater,
    };
    let simplified_bound = log_g / log_g.ln();
    Ok(RegimeReport {
        k,
        n,
        group_size,
        log_g,
        ratio,
        label: th.classify(ratio).label(),
        branch_small: branch_small(k, group_size),
        branch_comparable: branch_comparable(k, group_size).ok(),
        branch_large: branch_large(k, group_size).ok(),
        condition_i,
        condition_ii,
        large_k_flag: ratio >= flags.much_greater,
        simplified_bound,
        simplified_small: kf <= simplified_bound,
        simplified_large: kf >= 2.0 * simplified_bound,
    })
}
