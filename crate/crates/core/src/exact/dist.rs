//! Probability vectors on D_n in flat-index order.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::group::{DihedralElement, GroupParams};
use crate::stats::compensated_sum;

pub const MASS_TOL: f64 = 1e-12;
/// Entries in `[-NEG_CLIP, 0)` are treated as rounding noise and zeroed.
pub const NEG_CLIP: f64 = 1e-15;
pub const DUMP_MAGIC: [u8; 8] = *b"DIHDIST1";

#[derive(Debug, Clone, PartialEq)]
pub struct DistVector {
    n: u64,
    probs: Vec<f64>,
}

impl DistVector {
    /// Validates length, sign (clipping tiny negatives) and total mass.
    pub fn new(p: &GroupParams, mut probs: Vec<f64>) -> Result<Self> {
        if probs.len() as u64 != p.size() {
            return Err(Error::InvalidDistribution(format!(
                "length {} for a group of order {}",
                probs.len(),
                p.size()
            )));
        }
        clip_negatives(&mut probs)?;
        let mass = compensated_sum(probs.iter().copied());
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidDistribution(format!("total mass {mass}")));
        }
        Ok(Self { n: p.n(), probs })
    }

    /// Skips the mass check; used for intermediate sums.
    pub(crate) fn from_raw(n: u64, probs: Vec<f64>) -> Self {
        Self { n, probs }
    }

    pub fn delta(p: &GroupParams, g: DihedralElement) -> Self {
        let mut probs = vec![0.0; p.size() as usize];
        probs[g.index(p) as usize] = 1.0;
        Self { n: p.n(), probs }
    }

    pub fn identity(p: &GroupParams) -> Self {
        Self::delta(p, DihedralElement::IDENTITY)
    }

    pub fn uniform(p: &GroupParams) -> Self {
        Self {
            n: p.n(),
            probs: vec![1.0 / p.size() as f64; p.size() as usize],
        }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }

    /// Rotation-coset part `f₀(x) = f(r^x)`.
    pub fn rotations(&self) -> &[f64] {
        &self.probs[..self.n as usize]
    }

    /// Reflection-coset part `f₁(x) = f(s r^x)`.
    pub fn reflections(&self) -> &[f64] {
        &self.probs[self.n as usize..]
    }

    pub fn mass(&self) -> f64 {
        compensated_sum(self.probs.iter().copied())
    }

    pub fn write_dump<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(&DUMP_MAGIC)?;
        w.write_all(&self.n.to_le_bytes())?;
        for p in &self.probs {
            w.write_all(&p.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_dump<R: Read>(mut r: R) -> Result<Self> {
        let mut head = [0u8; 16];
        r.read_exact(&mut head)
            .map_err(|e| Error::Parse(format!("dump header: {e}")))?;
        if head[..8] != DUMP_MAGIC {
            return Err(Error::Parse("bad dump magic".into()));
        }
        let n = u64::from_le_bytes(head[8..].try_into().expect("8 bytes"));
        let p = GroupParams::new(n)?;
        let mut body = Vec::new();
        r.read_to_end(&mut body)
            .map_err(|e| Error::Parse(format!("dump body: {e}")))?;
        if body.len() as u64 != p.size() * 8 {
            return Err(Error::Parse(format!(
                "dump body has {} bytes, expected {}",
                body.len(),
                p.size() * 8
            )));
        }
        let probs = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        Self::new(&p, probs)
    }
}

pub(crate) fn clip_negatives(probs: &mut [f64]) -> Result<()> {
    for (i, v) in probs.iter_mut().enumerate() {
        if !v.is_finite() {
            return Err(Error::InvalidDistribution(format!("entry {i} is {v}")));
        }
        if *v < 0.0 {
            if *v < -NEG_CLIP {
                return Err(Error::InvalidDistribution(format!("entry {i} is {v}")));
            }
            *v = 0.0;
        }
    }
    Ok(())
}

/// `½ Σ_g |f(g) - 1/|G||`. The Cayley graph is vertex-transitive, so this
/// from the identity start is the worst-case distance.
pub fn tv_exact(f: &DistVector) -> f64 {
    let u = 1.0 / f.len() as f64;
    0.5 * compensated_sum(f.probs.iter().map(|p| (p - u).abs()))
}

/// `|G| Σ_g f(g)² - 1`.
pub fn collision_exact(f: &DistVector) -> f64 {
    let g = f.len() as f64;
    g * compensated_sum(f.probs.iter().map(|p| p * p)) - 1.0
}
