//! Dihedral group arithmetic and random generator sets.
//!
//! Elements are kept in the normal form `s^ε r^x` (reflection bit on the
//! left, rotation residue in `0..n`). Every product rule follows from the
//! single relation `r s = s r⁻¹`.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest rotation order accepted by the dense exact-evolution code paths
/// (the group then has at most 2^26 elements).
pub const EXACT_MAX_N: u64 = 1 << 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroupParams {
    n: u64,
    n_is_prime: bool,
}

impl GroupParams {
    pub fn new(n: u64) -> Result<Self> {
        if n < 3 {
            return Err(Error::Domain(format!("rotation order n must be >= 3, got {n}")));
        }
        Ok(Self {
            n,
            n_is_prime: is_prime(n),
        })
    }

    #[inline]
    pub fn n(&self) -> u64 {
        self.n
    }

    /// |G| = 2n.
    #[inline]
    pub fn size(&self) -> u64 {
        2 * self.n
    }

    #[inline]
    pub fn n_is_prime(&self) -> bool {
        self.n_is_prime
    }

    pub fn require_prime(&self) -> Result<()> {
        if self.n_is_prime {
            Ok(())
        } else {
            Err(Error::Domain(format!("n = {} is not prime", self.n)))
        }
    }

    /// Fails unless the dense distribution over G fits the exact-evolution bound.
    pub fn require_exact_size(&self) -> Result<()> {
        if self.n <= EXACT_MAX_N {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "2n = {} exceeds the exact-evolution bound 2^26",
                self.size()
            )))
        }
    }

    pub fn identity(&self) -> DihedralElement {
        DihedralElement::IDENTITY
    }

    pub fn elements(&self) -> impl Iterator<Item = DihedralElement> + '_ {
        (0..self.size()).map(move |i| DihedralElement::from_index(i, self))
    }

    #[inline]
    pub fn multiply(&self, a: DihedralElement, b: DihedralElement) -> DihedralElement {
        multiply(a, b, self)
    }

    #[inline]
    pub fn inverse(&self, a: DihedralElement) -> DihedralElement {
        inverse(a, self)
    }

    #[inline]
    pub(crate) fn reduce(&self, x: i128) -> u64 {
        x.rem_euclid(self.n as i128) as u64
    }
}

/// A group element `s^refl r^rot`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DihedralElement {
    pub refl: bool,
    pub rot: u64,
}

impl DihedralElement {
    pub const IDENTITY: Self = Self { refl: false, rot: 0 };

    pub fn rotation(x: u64, p: &GroupParams) -> Self {
        Self {
            refl: false,
            rot: x % p.n,
        }
    }

    pub fn reflection(x: u64, p: &GroupParams) -> Self {
        Self {
            refl: true,
            rot: x % p.n,
        }
    }

    /// Flat index `ε·n + x`, the wire order used for distribution vectors.
    #[inline]
    pub fn index(&self, p: &GroupParams) -> u64 {
        (self.refl as u64) * p.n + self.rot
    }

    #[inline]
    pub fn from_index(i: u64, p: &GroupParams) -> Self {
        debug_assert!(i < p.size());
        Self {
            refl: i >= p.n,
            rot: i % p.n,
        }
    }
}

impl fmt::Display for DihedralElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.refl, self.rot) {
            (false, 0) => write!(f, "id"),
            (false, x) => write!(f, "r^{x}"),
            (true, 0) => write!(f, "s"),
            (true, x) => write!(f, "s r^{x}"),
        }
    }
}

/// `(s^εa r^xa)(s^εb r^xb) = s^(εa⊕εb) r^(xb + (-1)^εb xa)`, obtained by
/// pushing `s^εb` left through `r^xa` with `r s = s r⁻¹`.
#[inline]
pub fn multiply(a: DihedralElement, b: DihedralElement, p: &GroupParams) -> DihedralElement {
    let n = p.n;
    let twisted = if b.refl { (n - a.rot) % n } else { a.rot };
    DihedralElement {
        refl: a.refl ^ b.refl,
        rot: add_mod(b.rot, twisted, n),
    }
}

#[inline]
pub fn inverse(a: DihedralElement, p: &GroupParams) -> DihedralElement {
    if a.refl {
        a
    } else {
        DihedralElement {
            refl: false,
            rot: (p.n - a.rot) % p.n,
        }
    }
}

/// Multiplication on flat indices.
#[inline]
pub fn multiply_index(a: u64, b: u64, p: &GroupParams) -> u64 {
    multiply(
        DihedralElement::from_index(a, p),
        DihedralElement::from_index(b, p),
        p,
    )
    .index(p)
}

#[inline]
fn add_mod(a: u64, b: u64, n: u64) -> u64 {
    let s = a as u128 + b as u128;
    (s % n as u128) as u64
}

/// `g^e` for any integer exponent.
pub fn pow(g: DihedralElement, e: i64, p: &GroupParams) -> DihedralElement {
    if g.refl {
        if e.rem_euclid(2) == 0 {
            DihedralElement::IDENTITY
        } else {
            g
        }
    } else {
        let rot = (g.rot as i128 * e as i128).rem_euclid(p.n as i128) as u64;
        DihedralElement { refl: false, rot }
    }
}

/// One sampled generator `Z = s^refl r^u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Generator {
    #[serde(rename = "s", with = "bit")]
    pub is_reflection: bool,
    pub u: u64,
}

impl Generator {
    pub fn element(&self) -> DihedralElement {
        DihedralElement {
            refl: self.is_reflection,
            rot: self.u,
        }
    }

    /// `Z^η` for a sign η = ±1. Reflections are involutions.
    pub fn signed(&self, positive: bool, p: &GroupParams) -> DihedralElement {
        if positive || self.is_reflection {
            self.element()
        } else {
            inverse(self.element(), p)
        }
    }

    /// The inverse as another generator (always expressible).
    pub fn inverse(&self, p: &GroupParams) -> Generator {
        let e = inverse(self.element(), p);
        Generator {
            is_reflection: e.refl,
            u: e.rot,
        }
    }
}

mod bit {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &bool, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(*v as u8)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
        match u8::deserialize(d)? {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(serde::de::Error::custom(format!("reflection bit must be 0 or 1, got {other}"))),
        }
    }
}

/// The k sampled generators, reflections first.
///
/// The symmetric multiset `S = {Z_a^{±1}}` has 2k atoms; a reflection
/// contributes two coinciding atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSet {
    n: u64,
    gens: Vec<Generator>,
    k_s: usize,
    /// `permutation[a]` is the draw order of the generator now at index `a`.
    permutation: Vec<usize>,
    seed: Option<u64>,
}

#[derive(Serialize, Deserialize)]
struct GeneratorSetWire {
    n: u64,
    k: usize,
    gens: Vec<Generator>,
    #[serde(default)]
    seed: Option<u64>,
}

impl GeneratorSet {
    /// Builds a set from explicit generators, moving reflections to the front
    /// (stable within each class).
    pub fn new(p: &GroupParams, gens: Vec<Generator>) -> Result<Self> {
        if gens.is_empty() {
            return Err(Error::Domain("a generator set needs at least one generator".into()));
        }
        for g in &gens {
            if g.u >= p.n() {
                return Err(Error::Domain(format!(
                    "generator exponent {} is not reduced mod n = {}",
                    g.u,
                    p.n()
                )));
            }
        }
        let mut order: Vec<usize> = (0..gens.len()).collect();
        order.sort_by_key(|&i| !gens[i].is_reflection);
        let sorted: Vec<Generator> = order.iter().map(|&i| gens[i]).collect();
        let k_s = sorted.iter().filter(|g| g.is_reflection).count();
        Ok(Self {
            n: p.n(),
            gens: sorted,
            k_s,
            permutation: order,
            seed: None,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn k(&self) -> usize {
        self.gens.len()
    }

    pub fn k_s(&self) -> usize {
        self.k_s
    }

    pub fn k_r(&self) -> usize {
        self.gens.len() - self.k_s
    }

    pub fn rho_s(&self) -> f64 {
        self.k_s as f64 / self.k() as f64
    }

    pub fn rho_r(&self) -> f64 {
        self.k_r() as f64 / self.k() as f64
    }

    pub fn gens(&self) -> &[Generator] {
        &self.gens
    }

    pub fn exponents(&self) -> impl Iterator<Item = u64> + '_ {
        self.gens.iter().map(|g| g.u)
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    #[inline]
    pub fn is_reflection_index(&self, a: usize) -> bool {
        a < self.k_s
    }

    /// The 2k atoms of the symmetric multiset S.
    pub fn atoms(&self, p: &GroupParams) -> Vec<DihedralElement> {
        self.gens
            .iter()
            .flat_map(|g| [g.element(), g.signed(false, p)])
            .collect()
    }

    pub fn to_json(&self) -> String {
        let wire = GeneratorSetWire {
            n: self.n,
            k: self.k(),
            gens: self.gens.clone(),
            seed: self.seed,
        };
        serde_json::to_string(&wire).expect("generator set serializes")
    }

    pub fn from_json(s: &str) -> Result<(GroupParams, Self)> {
        let wire: GeneratorSetWire = serde_json::from_str(s)?;
        if wire.k != wire.gens.len() {
            return Err(Error::Domain(format!(
                "generator file declares k = {} but lists {} generators",
                wire.k,
                wire.gens.len()
            )));
        }
        let p = GroupParams::new(wire.n)?;
        let mut gs = Self::new(&p, wire.gens)?;
        gs.seed = wire.seed;
        Ok((p, gs))
    }

    /// Short content hash for provenance columns.
    pub fn content_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update(self.n.to_le_bytes());
        for g in &self.gens {
            h.update([g.is_reflection as u8]);
            h.update(g.u.to_le_bytes());
        }
        hex::encode(&h.finalize()[..8])
    }
}

/// Draws k i.i.d. uniform elements of G and normalizes the order so that
/// reflections come first. The permutation is kept on the set.
pub fn sample_generator_set<R: Rng + ?Sized>(
    p: &GroupParams,
    k: usize,
    rng: &mut R,
) -> Result<GeneratorSet> {
    if k < 1 {
        return Err(Error::Domain("k must be positive".into()));
    }
    let gens = (0..k)
        .map(|_| {
            let idx = rng.random_range(0..p.size());
            let e = DihedralElement::from_index(idx, p);
            Generator {
                is_reflection: e.refl,
                u: e.rot,
            }
        })
        .collect();
    GeneratorSet::new(p, gens)
}

/// Resamples until [`check_balance`] passes. Returns the set and the number
/// of rejected draws.
pub fn sample_balanced_generator_set<R: Rng + ?Sized>(
    p: &GroupParams,
    k: usize,
    rng: &mut R,
    max_tries: usize,
) -> Result<(GeneratorSet, usize)> {
    for rejected in 0..max_tries {
        let gs = sample_generator_set(p, k, rng)?;
        if check_balance(&gs) {
            return Ok((gs, rejected));
        }
    }
    Err(Error::Domain(format!(
        "no balanced generator set after {max_tries} draws (k = {k})"
    )))
}

/// ρ_S ∈ [1/4, 3/4] and at least one reflection and one rotation.
pub fn check_balance(gs: &GeneratorSet) -> bool {
    let k = gs.k();
    let k_s = gs.k_s();
    // 4·k_S ∈ [k, 3k] avoids rounding at the endpoints.
    k_s >= 1 && gs.k_r() >= 1 && 4 * k_s >= k && 4 * k_s <= 3 * k
}

/// Goodness: the rotation components `V_a = r^{u_a}` lie in pairwise distinct
/// conjugacy classes `{u, -u}` of ℤ_n.
pub fn is_good(gs: &GeneratorSet, p: &GroupParams) -> bool {
    let n = p.n();
    let mut seen = std::collections::HashSet::with_capacity(gs.k());
    gs.exponents().all(|u| {
        let neg = (n - u) % n;
        seen.insert(u.min(neg))
    })
}

/// Deterministic Miller–Rabin, exact for every 64-bit input.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &q in &SMALL {
        if n % q == 0 {
            return n == q;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}
