//! The degenerate-multinomial covariance `Σ = diag(p̂) - p̂p̂ᵀ` with
//! `p̂ = 1/(d+1)`, its scaled normal density and typical sets.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};

/// Closed-form identities are checked against explicit matrices up to here.
pub const IDENTITY_CHECK_MAX_D: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalSetParams {
    d: usize,
    m: f64,
    delta: f64,
}

impl NormalSetParams {
    pub fn new(d: usize, m: f64, delta: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::Domain("dimension d must be >= 1".into()));
        }
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::Domain(format!("scale m must be > 0, got {m}")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Domain(format!("delta must lie in (0,1), got {delta}")));
        }
        if d <= IDENTITY_CHECK_MAX_D {
            let (inv_err, det_err) = sigma_identity_residuals(d);
            if inv_err > 1e-10 || det_err > 1e-10 {
                return Err(Error::Domain(format!(
                    "covariance identities fail at d={d}: inverse {inv_err:.2e}, det {det_err:.2e}"
                )));
            }
        }
        Ok(Self { d, m, delta })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `log|mΣ| = d log m - (d+1) log(d+1)`.
    pub fn log_det(&self) -> f64 {
        let d = self.d as f64;
        d * self.m.ln() - (d + 1.0) * (d + 1.0).ln()
    }

    /// `xᵀ(mΣ)⁻¹x = (d+1)(‖x‖² + (Σx)²)/m`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.d, "vector dimension");
        let sq: f64 = x.iter().map(|v| v * v).sum();
        let s: f64 = x.iter().sum();
        (self.d as f64 + 1.0) * (sq + s * s) / self.m
    }

    /// Log-density bounds `[lower, upper]` defining W^Normal.
    pub fn log_density_bounds(&self) -> (f64, f64) {
        let d = self.d as f64;
        let base = 2.0 * std::f64::consts::PI * std::f64::consts::E * self.m / (d + 1.0);
        let lower = -d / 2.0 * (base / (1.0 - self.delta)).ln();
        let upper = -d / 2.0 * (base / (1.0 + self.delta)).ln();
        (lower, upper)
    }

    /// `d^{-1/2} m^{2/3}`.
    pub fn bulk_radius(&self) -> f64 {
        (self.d as f64).powf(-0.5) * self.m.powf(2.0 / 3.0)
    }
}

/// Max-entry error of `(d+1)(I + 11ᵀ)Σ - I` and `| |Σ|(d+1)^{d+1} - 1 |`.
pub fn sigma_identity_residuals(d: usize) -> (f64, f64) {
    let p = 1.0 / (d as f64 + 1.0);
    let sigma = |i: usize, j: usize| if i == j { p - p * p } else { -p * p };
    let inv = |i: usize, j: usize| (d as f64 + 1.0) * (if i == j { 2.0 } else { 1.0 });
    let mut inv_err = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            let v: f64 = (0..d).map(|l| inv(i, l) * sigma(l, j)).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            inv_err = inv_err.max((v - want).abs());
        }
    }
    let mut a: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| sigma(i, j)).collect()).collect();
    let log_det = lu_log_det(&mut a);
    let det_err = (log_det + (d as f64 + 1.0) * (d as f64 + 1.0).ln()).exp_m1().abs();
    (inv_err, det_err)
}

/// log|det A| by Gaussian elimination with partial pivoting.
fn lu_log_det(a: &mut [Vec<f64>]) -> f64 {
    let n = a.len();
    let mut acc = 0.0;
    for c in 0..n {
        let piv = (c..n)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .unwrap();
        a.swap(c, piv);
        let pv = a[c][c];
        if pv == 0.0 {
            return f64::NEG_INFINITY;
        }
        acc += pv.abs().ln();
        for r in c + 1..n {
            let f = a[r][c] / pv;
            let (top, bottom) = a.split_at_mut(r);
            for (x, y) in bottom[0][c..n].iter_mut().zip(&top[c][c..n]) {
                *x -= f * y;
            }
        }
    }
    acc
}

/// `log φ_{Σ,m}(x)`.
pub fn normal_log_density(params: &NormalSetParams, x: &[f64]) -> f64 {
    let d = params.d as f64;
    -0.5 * d * (2.0 * std::f64::consts::PI).ln() - 0.5 * params.log_det() - 0.5 * params.quad_form(x)
}

pub fn normal_density(params: &NormalSetParams, x: &[f64]) -> f64 {
    normal_log_density(params, x).exp()
}

pub fn normal_set_member(params: &NormalSetParams, x: &[f64]) -> bool {
    let (lo, hi) = params.log_density_bounds();
    let l = normal_log_density(params, x);
    lo <= l && l <= hi
}

pub fn bulk_set_member(params: &NormalSetParams, x: &[f64]) -> bool {
    let r = params.bulk_radius();
    x.iter().map(|v| v * v).sum::<f64>() <= r * r
}

/// One draw of ξ ~ Normal(0, mΣ): centre a standard normal in d+1
/// coordinates, keep the first d, scale by `sqrt(m/(d+1))`.
pub fn sample_normal<R: Rng + ?Sized>(params: &NormalSetParams, rng: &mut R) -> Vec<f64> {
    let d1 = params.d + 1;
    let z: Vec<f64> = (0..d1).map(|_| rng.sample(StandardNormal)).collect();
    let mean = z.iter().sum::<f64>() / d1 as f64;
    let scale = (params.m / d1 as f64).sqrt();
    z[..params.d].iter().map(|v| (v - mean) * scale).collect()
}
