//! Pass/fail reading of a cutoff profile.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::scan::ProfileRow;
use crate::error::{Error, Result};

pub const DEFAULT_QUOTA: f64 = 0.8;
/// A grid α within this relative distance of a target may stand in for it.
pub const NEAREST_WINDOW: f64 = 0.25;
const EXACT_MATCH: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyParams {
    pub eps: f64,
    pub eta_lo: f64,
    pub eta_hi: f64,
    pub quota: f64,
}

impl VerifyParams {
    /// Times checked are `t₀/(1+ε)` and `(1+ε)t₀`, so ε = 1 reads α ∈ {0.5, 2}.
    pub fn alphas(&self) -> (f64, f64) {
        (1.0 / (1.0 + self.eps), 1.0 + self.eps)
    }
}

impl Default for VerifyParams {
    fn default() -> Self {
        Self {
            eps: 1.0,
            eta_lo: 0.2,
            eta_hi: 0.2,
            quota: DEFAULT_QUOTA,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellVerdict {
    pub n: u64,
    pub k: u64,
    pub replicates: usize,
    pub passed: usize,
    pub pass: bool,
    pub alpha_lo: f64,
    pub alpha_hi: f64,
    /// True when a nearby grid point stood in for a target α.
    pub nearest_used: bool,
    pub median_tv_lo: f64,
    pub median_tv_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub params: VerifyParams,
    pub cells: Vec<CellVerdict>,
    pub pass: bool,
}

fn pick_alpha(available: &[f64], target: f64) -> Option<(f64, bool)> {
    available
        .iter()
        .copied()
        .filter(|a| (a / target - 1.0).abs() <= NEAREST_WINDOW)
        .min_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs()))
        .map(|a| (a, (a - target).abs() > EXACT_MATCH * target))
}

pub fn median(xs: &mut [f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        0.5 * (xs[m - 1] + xs[m])
    }
}

/// A replicate passes when `d_TV(α_lo t₀) >= 1 - η_lo` and
/// `d_TV(α_hi t₀) <= η_hi`; a cell passes when the passing fraction reaches
/// the quota. Failed rows count as failing replicates.
pub fn verify_cutoff(rows: &[ProfileRow], params: VerifyParams) -> Result<VerifyReport> {
    if !(params.eps > 0.0 && params.quota > 0.0 && params.quota <= 1.0) {
        return Err(Error::Domain("need eps > 0 and quota in (0, 1]".into()));
    }
    let (target_lo, target_hi) = params.alphas();
    let mut by_cell: BTreeMap<(u64, u64), BTreeMap<usize, Vec<&ProfileRow>>> = BTreeMap::new();
    for r in rows {
        by_cell.entry((r.n, r.k)).or_default().entry(r.replicate).or_default().push(r);
    }
    if by_cell.is_empty() {
        return Err(Error::MissingGrid("profile has no rows".into()));
    }
    let mut cells = Vec::new();
    let mut missing = Vec::new();
    for ((n, k), reps) in &by_cell {
        let mut alphas: Vec<f64> = reps.values().flatten().map(|r| r.alpha).collect();
        alphas.sort_by(f64::total_cmp);
        alphas.dedup();
        let lo = pick_alpha(&alphas, target_lo);
        let hi = pick_alpha(&alphas, target_hi);
        if lo.is_none() {
            missing.push(format!("n={n} k={k} alpha={target_lo}"));
        }
        if hi.is_none() {
            missing.push(format!("n={n} k={k} alpha={target_hi}"));
        }
        let (Some((a_lo, near_lo)), Some((a_hi, near_hi))) = (lo, hi) else {
            continue;
        };
        let mut passed = 0;
        let mut tv_lo = Vec::new();
        let mut tv_hi = Vec::new();
        for rep_rows in reps.values() {
            let find = |a: f64| rep_rows.iter().find(|r| r.alpha == a && r.ok()).map(|r| r.tv);
            let (l, h) = (find(a_lo), find(a_hi));
            if let Some(l) = l {
                tv_lo.push(l);
            }
            if let Some(h) = h {
                tv_hi.push(h);
            }
            if let (Some(l), Some(h)) = (l, h) {
                if l >= 1.0 - params.eta_lo && h <= params.eta_hi {
                    passed += 1;
                }
            }
        }
        let replicates = reps.len();
        cells.push(CellVerdict {
            n: *n,
            k: *k,
            replicates,
            passed,
            pass: passed as f64 >= params.quota * replicates as f64,
            alpha_lo: a_lo,
            alpha_hi: a_hi,
            nearest_used: near_lo || near_hi,
            median_tv_lo: median(&mut tv_lo),
            median_tv_hi: median(&mut tv_hi),
        });
    }
    if !missing.is_empty() {
        return Err(Error::MissingGrid(missing.join("; ")));
    }
    let pass = cells.iter().all(|c| c.pass);
    Ok(VerifyReport { params, cells, pass })
}
