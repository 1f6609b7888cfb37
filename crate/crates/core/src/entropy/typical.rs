//! Typical sets for the reflection coordinates C_S.

use serde::{Deserialize, Serialize};

use super::normal::{normal_set_member, NormalSetParams};
use super::pmf::{y_pmf_exact, PmfTable};
use super::srw::h_exact;
use crate::error::{Error, Result};

pub const DEFAULT_DELTA: f64 = 0.2;
pub const DEFAULT_TAU: f64 = 3.0;
pub const DEFAULT_OMEGA: f64 = 3.0;

pub const MID_REGIME_MAX_KS: usize = 4;
pub const MID_REGIME_MAX_STEPS: i64 = 20;

/// Small-k regime: `Σw ∈ {0,1}` and the first `k_S - 1` coordinates lie in
/// W^Normal with `m = ρ_S t`, `d = k_S - 1`.
pub fn ws_member_small_regime(w: &[i64], k_s: usize, t: f64, delta: f64, rho_s: f64) -> Result<bool> {
    if w.len() != k_s {
        return Err(Error::Domain(format!("w has {} coordinates, k_S = {k_s}", w.len())));
    }
    let s: i64 = w.iter().sum();
    if s != 0 && s != 1 {
        return Ok(false);
    }
    if k_s == 1 {
        return Ok(true);
    }
    let params = NormalSetParams::new(k_s - 1, rho_s * t, delta)?;
    let hat: Vec<f64> = w[..k_s - 1].iter().map(|&v| v as f64).collect();
    Ok(normal_set_member(&params, &hat))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetVariant {
    Minus,
    Plus,
}

/// Middle-regime sets built from exact Y_ℓ laws for ℓ in `[n₋, n₊]`, with
/// `n₋ = ⌈ρ_S t - τ t^{7/12}⌉` and `n₊ = ⌊ρ_S t + τ t^{1/2}⌋`.
#[derive(Debug, Clone)]
pub struct MidRegimeSets {
    k_s: usize,
    n_minus: i64,
    n_plus: i64,
    ln_threshold_minus: f64,
    ln_threshold_plus: f64,
    laws: Vec<PmfTable>,
}

impl MidRegimeSets {
    pub fn new(k_s: usize, k: usize, t: f64, delta: f64, tau: f64) -> Result<Self> {
        if k_s == 0 || k_s > k {
            return Err(Error::Domain(format!("need 1 <= k_S <= k, got k_S={k_s}, k={k}")));
        }
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::Domain(format!("t must be >= 0, got {t}")));
        }
        let rho_s = k_s as f64 / k as f64;
        let n_minus = ((rho_s * t - tau * t.powf(7.0 / 12.0)).ceil() as i64).max(0);
        let n_plus = (rho_s * t + tau * t.sqrt()).floor() as i64;
        if k_s > MID_REGIME_MAX_KS || n_plus > MID_REGIME_MAX_STEPS {
            return Err(Error::ScaleGuard {
                what: format!("middle-regime sets with k_S={k_s}, n+={n_plus}"),
                limit: format!("k_S <= {MID_REGIME_MAX_KS}, n+ <= {MID_REGIME_MAX_STEPS}"),
            });
        }
        let laws = (0..=n_plus.max(0))
            .map(|l| y_pmf_exact(k_s, l as usize))
            .collect::<Result<Vec<_>>>()?;
        let base = -(k_s as f64) * h_exact(t / k as f64);
        Ok(Self {
            k_s,
            n_minus,
            n_plus,
            ln_threshold_minus: base - delta * k as f64,
            ln_threshold_plus: base + delta * k as f64,
            laws,
        })
    }

    pub fn n_minus(&self) -> i64 {
        self.n_minus
    }

    pub fn n_plus(&self) -> i64 {
        self.n_plus
    }

    pub fn law(&self, l: i64) -> Option<&PmfTable> {
        usize::try_from(l).ok().and_then(|l| self.laws.get(l))
    }

    pub fn member(&self, w: &[i64], variant: SetVariant) -> bool {
        if w.len() != self.k_s {
            return false;
        }
        match variant {
            SetVariant::Minus => (self.n_minus..=self.n_plus).any(|l| {
                let p = self.law(l).map_or(0.0, |law| law.prob(w));
                p > 0.0 && p.ln() >= self.ln_threshold_minus
            }),
            SetVariant::Plus => [self.n_plus, self.n_plus - 1].iter().any(|&l| {
                let p = self.law(l).map_or(0.0, |law| law.prob(w));
                p > 0.0 && p.ln() <= self.ln_threshold_plus
            }),
        }
    }
}

pub fn ws_member_mid_regime(
    w: &[i64],
    k_s: usize,
    k: usize,
    t: f64,
    delta: f64,
    tau: f64,
    variant: SetVariant,
) -> Result<bool> {
    Ok(MidRegimeSets::new(k_s, k, t, delta, tau)?.member(w, variant))
}
