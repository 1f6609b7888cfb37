//! Convolution by μ in the Fourier domain of ℤ_n and continuous-time
//! evolution by uniformization.
//!
//! With `f = (f₀, f₁)` split by coset and hats denoting the DFT over ℤ_n,
//! one step is, per frequency j,
//!
//! ```text
//! ν̂₀(j) = â(j) f̂₀(j) + b̂(j) f̂₁(-j)
//! ν̂₁(j) = â(j) f̂₁(j) + b̂(j) f̂₀(-j)
//! ```
//!
//! so the pair `(f̂₀(j), f̂₁(-j))` evolves by a 2×2 block and repeated steps
//! never leave the frequency domain.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use super::dist::{clip_negatives, tv_exact, DistVector};
use super::measure::{step_measure, StepMeasure};
use crate::error::{Error, Result};
use crate::group::{GeneratorSet, GroupParams};
use crate::stats::{compensated_sum, poisson_ln_pmf};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_STEP_BUDGET: u64 = 1_000_000;
pub const MONOTONE_SLACK: f64 = 1e-9;

pub struct SpectralKernel {
    n: usize,
    a_hat: Vec<Complex64>,
    b_hat: Vec<Complex64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

/// A distribution held as the DFTs of its two coset parts.
#[derive(Clone)]
pub struct Spectrum {
    f0: Vec<Complex64>,
    f1: Vec<Complex64>,
}

impl SpectralKernel {
    pub fn new(mu: &StepMeasure) -> Self {
        let n = mu.n();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n);
        let ifft = planner.plan_fft_inverse(n);
        let mut a_hat: Vec<Complex64> = mu.a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let mut b_hat: Vec<Complex64> = mu.b.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        fft.process(&mut a_hat);
        fft.process(&mut b_hat);
        // zero frequency carries total mass: pin â(0) + b̂(0) = 1
        let sa = compensated_sum(mu.a.iter().copied());
        let sb = compensated_sum(mu.b.iter().copied());
        let total = sa + sb;
        if n > 0 && (total - 1.0).abs() < 1e-12 {
            let (a0, b0) = if sa >= sb {
                let a0 = sa / total;
                (a0, 1.0 - a0)
            } else {
                let b0 = sb / total;
                (1.0 - b0, b0)
            };
            a_hat[0] = Complex64::new(a0, 0.0);
            b_hat[0] = Complex64::new(b0, 0.0);
        }
        Self {
            n,
            a_hat,
            b_hat,
            fft,
            ifft,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn forward(&self, f: &DistVector) -> Spectrum {
        let mut f0: Vec<Complex64> = f.rotations().iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let mut f1: Vec<Complex64> = f.reflections().iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.fft.process(&mut f0);
        self.fft.process(&mut f1);
        Spectrum { f0, f1 }
    }

    /// Back to a probability vector; tiny negative rounding is clipped.
    pub fn inverse(&self, spec: &Spectrum) -> Result<Vec<f64>> {
        let mut f0 = spec.f0.clone();
        let mut f1 = spec.f1.clone();
        self.ifft.process(&mut f0);
        self.ifft.process(&mut f1);
        let scale = 1.0 / self.n as f64;
        let mut out: Vec<f64> = f0.iter().chain(&f1).map(|c| c.re * scale).collect();
        clip_negatives(&mut out)?;
        Ok(out)
    }

    /// One application of μ.
    pub fn step(&self, spec: &Spectrum) -> Spectrum {
        let n = self.n;
        let mut g0 = vec![Complex64::new(0.0, 0.0); n];
        let mut g1 = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            let jm = (n - j) % n;
            let (a, b) = (self.a_hat[j], self.b_hat[j]);
            g0[j] = a * spec.f0[j] + b * spec.f1[jm];
            g1[j] = a * spec.f1[j] + b * spec.f0[jm];
        }
        Spectrum { f0: g0, f1: g1 }
    }
}

impl Spectrum {
    fn zeros(n: usize) -> Self {
        Self {
            f0: vec![Complex64::new(0.0, 0.0); n],
            f1: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    fn add_scaled(&mut self, w: f64, other: &Spectrum) {
        for (x, y) in self.f0.iter_mut().zip(&other.f0) {
            *x += y * w;
        }
        for (x, y) in self.f1.iter_mut().zip(&other.f1) {
            *x += y * w;
        }
    }
}

pub fn convolve_fast(f: &DistVector, mu: &StepMeasure, p: &GroupParams) -> Result<DistVector> {
    let k = SpectralKernel::new(mu);
    let out = k.inverse(&k.step(&k.forward(f)))?;
    Ok(DistVector::from_raw(p.n(), out))
}

/// Truncation point for the Poisson(t) weights.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonWeights {
    pub weights: Vec<f64>,
    /// Certified bound on `Σ_{m > M} Pois(t; m)`.
    pub tail_bound: f64,
}

/// Weights `e^{-t} t^m / m!` for `m = 0..=M`, M the first index with
/// `Pois(t; M+1) / (1 - t/(M+2)) < tol` (a geometric bound on the tail).
pub fn poisson_weights(t: f64, tol: f64, budget: u64) -> Result<PoissonWeights> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Domain(format!("t must be finite and >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(PoissonWeights {
            weights: vec![1.0],
            tail_bound: 0.0,
        });
    }
    let mut weights = vec![(-t).exp()];
    let mut m: u64 = 0;
    loop {
        let lw_next = poisson_ln_pmf(t, m + 1);
        let ratio = t / (m + 2) as f64;
        if ratio < 1.0 {
            let bound = lw_next.exp() / (1.0 - ratio);
            if bound < tol {
                return Ok(PoissonWeights {
                    weights,
                    tail_bound: bound,
                });
            }
        }
        m += 1;
        if m > budget {
            let needed = (t + 10.0 * t.sqrt() + 40.0).ceil() as u64;
            return Err(Error::StepBudget {
                needed: needed.max(budget + 1),
                budget,
            });
        }
        weights.push(lw_next.exp());
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvolveOptions {
    pub tol: f64,
    pub step_budget: u64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            step_budget: DEFAULT_STEP_BUDGET,
        }
    }
}

impl EvolveOptions {
    pub fn check(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol <= 1e-6) {
            return Err(Error::Domain(format!("tol must lie in (0, 1e-6], got {}", self.tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evolved {
    pub t: f64,
    pub dist: DistVector,
    pub tail_mass: f64,
    pub steps_used: u64,
    /// `1 - Σ probs` before renormalization.
    pub mass_deficit: f64,
}

fn finish(p: &GroupParams, t: f64, raw: Vec<f64>, pw: &PoissonWeights, tol: f64) -> Result<Evolved> {
    let mass = compensated_sum(raw.iter().copied());
    let mass_deficit = 1.0 - mass;
    if mass_deficit.abs() > tol + 1e-12 {
        return Err(Error::InvalidDistribution(format!(
            "mass deficit {mass_deficit:.3e} at t={t} exceeds tolerance {tol:.1e}"
        )));
    }
    let probs = raw.into_iter().map(|x| x / mass).collect();
    Ok(Evolved {
        t,
        dist: DistVector::new(p, probs)?,
        tail_mass: pw.tail_bound,
        steps_used: pw.weights.len() as u64 - 1,
        mass_deficit,
    })
}

/// Evolution from a fixed start under a fixed μ; the kernel and the start's
/// spectrum are computed once and reused across times.
pub struct Evolver {
    p: GroupParams,
    kernel: SpectralKernel,
    start: Spectrum,
    start_probs: Vec<f64>,
}

impl Evolver {
    pub fn new(f0: &DistVector, mu: &StepMeasure, p: &GroupParams) -> Self {
        let kernel = SpectralKernel::new(mu);
        let start = kernel.forward(f0);
        Self {
            p: *p,
            kernel,
            start,
            start_probs: f0.probs().to_vec(),
        }
    }

    /// `Σ_m Pois(t; m) f0 μ^{*m}`.
    pub fn evolve(&self, t: f64, opts: EvolveOptions) -> Result<Evolved> {
        opts.check()?;
        let pw = poisson_weights(t, opts.tol, opts.step_budget)?;
        if t == 0.0 {
            return finish(&self.p, t, self.start_probs.clone(), &pw, opts.tol);
        }
        let mut cur = self.start.clone();
        let mut acc = Spectrum::zeros(self.kernel.n());
        for (m, &w) in pw.weights.iter().enumerate() {
            if m > 0 {
                cur = self.kernel.step(&cur);
            }
            acc.add_scaled(w, &cur);
        }
        finish(&self.p, t, self.kernel.inverse(&acc)?, &pw, opts.tol)
    }

    pub fn tv(&self, t: f64, opts: EvolveOptions) -> Result<f64> {
        Ok(tv_exact(&self.evolve(t, opts)?.dist))
    }
}

pub fn evolve_measure(
    f0: &DistVector,
    mu: &StepMeasure,
    p: &GroupParams,
    t: f64,
    opts: EvolveOptions,
) -> Result<Evolved> {
    Evolver::new(f0, mu, p).evolve(t, opts)
}

pub fn evolve_continuous(
    f0: &DistVector,
    gs: &GeneratorSet,
    p: &GroupParams,
    t: f64,
    opts: EvolveOptions,
) -> Result<Evolved> {
    evolve_measure(f0, &step_measure(gs, p), p, t, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub t: f64,
    pub tv: f64,
    pub tail_mass: f64,
    pub steps_used: u64,
}

/// d_TV from the identity at every grid time, sharing one sweep of powers.
pub fn tv_curve(gs: &GeneratorSet, p: &GroupParams, t_grid: &[f64], opts: EvolveOptions) -> Result<Vec<CurvePoint>> {
    tv_curve_measure(&step_measure(gs, p), p, t_grid, opts)
}

pub fn tv_curve_measure(
    mu: &StepMeasure,
    p: &GroupParams,
    t_grid: &[f64],
    opts: EvolveOptions,
) -> Result<Vec<CurvePoint>> {
    opts.check()?;
    if t_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Domain("time grid must be strictly ascending".into()));
    }
    let weights = t_grid
        .iter()
        .map(|&t| poisson_weights(t, opts.tol, opts.step_budget))
        .collect::<Result<Vec<_>>>()?;
    let max_m = weights.iter().map(|w| w.weights.len()).max().unwrap_or(0);
    let kernel = SpectralKernel::new(mu);
    let mut cur = kernel.forward(&DistVector::identity(p));
    let mut accs: Vec<Spectrum> = t_grid.iter().map(|_| Spectrum::zeros(kernel.n())).collect();
    for m in 0..max_m {
        if m > 0 {
            cur = kernel.step(&cur);
        }
        for (acc, pw) in accs.iter_mut().zip(&weights) {
            if let Some(&w) = pw.weights.get(m) {
                acc.add_scaled(w, &cur);
            }
        }
    }
    let points = accs
        .par_iter()
        .zip(weights.par_iter())
        .zip(t_grid.par_iter())
        .map(|((acc, pw), &t)| {
            let ev = finish(p, t, kernel.inverse(acc)?, pw, opts.tol)?;
            Ok(CurvePoint {
                t,
                tv: tv_exact(&ev.dist),
                tail_mass: ev.tail_mass,
                steps_used: ev.steps_used,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    for w in points.windows(2) {
        let increase = w[1].tv - w[0].tv;
        if increase > MONOTONE_SLACK {
            return Err(Error::NonMonotone {
                t_prev: w[0].t,
                t: w[1].t,
                increase,
            });
        }
    }
    Ok(points)
}
