//! Oracles shared by the integration tests. They are built from the group
//! law alone and never call the evolution code under test.

#![allow(dead_code)]

use dihedral_cutoff::group::{multiply, DihedralElement};
use dihedral_cutoff::{GeneratorSet, GroupParams};
use nalgebra::{DMatrix, DVector};

/// Transition matrix of one step: from h to h·z for each of the 2k atoms
/// `Z_a`, `Z_a⁻¹`, each with weight 1/(2k).
pub fn dense_step_matrix(gs: &GeneratorSet, p: &GroupParams) -> DMatrix<f64> {
    let size = p.size() as usize;
    let w = 1.0 / (2 * gs.k()) as f64;
    let mut m = DMatrix::zeros(size, size);
    for h in p.elements() {
        for g in gs.gens() {
            let z = g.element();
            let z_inv = dihedral_cutoff::group::inverse(z, p);
            for atom in [z, z_inv] {
                let to = multiply(h, atom, p);
                m[(h.index(p) as usize, to.index(p) as usize)] += w;
            }
        }
    }
    m
}

/// Law at time t from `start` by the dense matrix exponential of `t(P - I)`.
pub fn dense_law(gs: &GeneratorSet, p: &GroupParams, start: DihedralElement, t: f64) -> Vec<f64> {
    let size = p.size() as usize;
    let q = (dense_step_matrix(gs, p) - DMatrix::identity(size, size)) * t;
    let e = q.exp();
    let mut f0 = DVector::zeros(size);
    f0[start.index(p) as usize] = 1.0;
    (e.transpose() * f0).iter().copied().collect()
}

/// `ν(g) = Σ_h f(h) μ(h⁻¹g)` by a double loop over the group.
pub fn brute_convolve(f: &[f64], mu: &[f64], p: &GroupParams) -> Vec<f64> {
    let mut out = vec![0.0; f.len()];
    for h in p.elements() {
        let fh = f[h.index(p) as usize];
        if fh == 0.0 {
            continue;
        }
        for z in p.elements() {
            let w = mu[z.index(p) as usize];
            if w != 0.0 {
                out[multiply(h, z, p).index(p) as usize] += fh * w;
            }
        }
    }
    out
}

pub fn tv_to_uniform(f: &[f64]) -> f64 {
    let u = 1.0 / f.len() as f64;
    0.5 * f.iter().map(|x| (x - u).abs()).sum::<f64>()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
