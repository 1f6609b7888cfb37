//! The one-step law μ of the walk, split by coset, and direct convolution.

use crate::group::{GeneratorSet, GroupParams};
use crate::error::Result;

use super::dist::{clip_negatives, DistVector};

/// `a[u] = μ(r^u)`, `b[u] = μ(s r^u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepMeasure {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl StepMeasure {
    pub fn identity(p: &GroupParams) -> Self {
        let mut a = vec![0.0; p.n() as usize];
        a[0] = 1.0;
        Self {
            a,
            b: vec![0.0; p.n() as usize],
        }
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }
}

/// Each of the 2k atoms `Z_a^{±1}` carries weight `1/(2k)`; a reflection is its
/// own inverse and so carries `2/(2k)` at its exponent.
pub fn step_measure(gs: &GeneratorSet, p: &GroupParams) -> StepMeasure {
    let n = p.n() as usize;
    let w = 1.0 / (2 * gs.k()) as f64;
    let mut a = vec![0.0; n];
    let mut b = vec![0.0; n];
    for g in gs.gens() {
        let u = g.u as usize;
        if g.is_reflection {
            b[u] += 2.0 * w;
        } else {
            a[u] += w;
            a[(n - u) % n] += w;
        }
    }
    StepMeasure { a, b }
}

/// `ν(g) = Σ_z f(g z⁻¹) μ(z)`: mass at `s^ε r^x` moves to `s^ε r^{x+u}` under
/// `r^u` and to `s^{1-ε} r^{u-x}` under `s r^u`.
pub fn convolve_naive(f: &DistVector, mu: &StepMeasure, p: &GroupParams) -> Result<DistVector> {
    let n = p.n() as usize;
    let (f0, f1) = (f.rotations(), f.reflections());
    let mut out = vec![0.0; 2 * n];
    for (u, &w) in mu.a.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for x in 0..n {
            let y = (x + u) % n;
            out[y] += w * f0[x];
            out[n + y] += w * f1[x];
        }
    }
    for (u, &w) in mu.b.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for x in 0..n {
            let y = (u + n - x) % n;
            out[n + y] += w * f0[x];
            out[y] += w * f1[x];
        }
    }
    clip_negatives(&mut out)?;
    Ok(DistVector::from_raw(p.n(), out))
}
