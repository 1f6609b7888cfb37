//! The rate-1 simple random walk W_s on ℤ: its pmf `e^{-s} I_|x|(s)`, entropy
//! h(s) and varentropy.

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::stats::compensated_sum;

/// Table extent is chosen so the two-sided mass beyond it is below this.
const TABLE_TAIL: f64 = 1e-30;
/// Certified truncation error for the entropy and pmf sums.
pub const TRUNCATION_TOL: f64 = 1e-14;

/// `P(W_s = x)` for `|x| <= extent`, computed by Miller's backward recurrence
/// on `I_ν(s)` and normalized with `I_0 + 2 Σ_{ν≥1} I_ν = e^s`.
#[derive(Debug, Clone)]
pub struct SrwPmf {
    s: f64,
    probs: Vec<f64>,
    tail_bound: f64,
}

impl SrwPmf {
    pub fn new(s: f64) -> Self {
        assert!(s.is_finite() && s >= 0.0, "SRW time must be finite and >= 0");
        if s == 0.0 {
            return Self {
                s,
                probs: vec![1.0],
                tail_bound: 0.0,
            };
        }
        let extent = tail_extent(s, TABLE_TAIL);
        let top = extent + 30 + (extent as f64).sqrt().ceil() as usize * 4;
        let mut vals = vec![0.0f64; top + 2];
        vals[top] = 1e-300;
        let two_over_s = 2.0 / s;
        for nu in (1..=top).rev() {
            let v = (nu as f64) * two_over_s * vals[nu] + vals[nu + 1];
            vals[nu - 1] = v;
            if v > 1e250 {
                for x in &mut vals[nu - 1..] {
                    *x *= 1e-250;
                }
            }
        }
        let total = vals[0] + 2.0 * compensated_sum(vals[1..=top].iter().copied());
        vals.truncate(extent + 1);
        for v in &mut vals {
            *v /= total;
        }
        Self {
            s,
            probs: vals,
            tail_bound: two_sided_tail_bound(s, extent + 1),
        }
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// Largest |x| held in the table.
    pub fn extent(&self) -> i64 {
        self.probs.len() as i64 - 1
    }

    /// Upper bound on `P(|W_s| > extent)`.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn pmf(&self, x: i64) -> f64 {
        let ax = x.unsigned_abs() as usize;
        match self.probs.get(ax) {
            Some(&p) => p,
            None => srw_ln_pmf_series(self.s, x).exp(),
        }
    }

    pub fn ln_pmf(&self, x: i64) -> f64 {
        let ax = x.unsigned_abs() as usize;
        match self.probs.get(ax) {
            Some(&p) if p > 1e-280 => p.ln(),
            _ => srw_ln_pmf_series(self.s, x),
        }
    }

    /// `(x, P(W_s = x))` for x in `-extent..=extent`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        let e = self.extent();
        (-e..=e).map(move |x| (x, self.probs[x.unsigned_abs() as usize]))
    }

    pub fn entropy(&self) -> f64 {
        compensated_sum(self.iter().filter(|(_, p)| *p > 0.0).map(|(_, p)| -p * p.ln()))
    }

    /// `Var(-log P(W_s))`.
    pub fn varentropy(&self) -> f64 {
        let h = self.entropy();
        compensated_sum(
            self.iter()
                .filter(|(_, p)| *p > 0.0)
                .map(|(_, p)| p * (-p.ln() - h).powi(2)),
        )
    }
}

/// Chernoff bound `P(W_s >= x) <= exp(-(x asinh(x/s) - (sqrt(s²+x²) - s)))`
/// for the difference of two Poisson(s/2) counts, doubled for both sides.
fn two_sided_tail_bound(s: f64, x: usize) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    let xf = x as f64;
    let rate = xf * (xf / s).asinh() - ((s * s + xf * xf).sqrt() - s);
    (2.0 * (-rate).exp()).min(1.0)
}

fn tail_extent(s: f64, tol: f64) -> usize {
    let mut x = s.sqrt().ceil() as usize + 1;
    while two_sided_tail_bound(s, x + 1) > tol {
        x += 1 + x / 16;
    }
    x
}

/// `ln P(W_s = x)` by the Bessel series
/// `e^{-s} Σ_m (s/2)^{2m+|x|} / (m! (m+|x|)!)`, summed in log space.
pub fn srw_ln_pmf_series(s: f64, x: i64) -> f64 {
    if s == 0.0 {
        return if x == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    let ax = x.unsigned_abs() as f64;
    let ln_half = (s / 2.0).ln();
    let term = |m: f64| (2.0 * m + ax) * ln_half - ln_gamma(m + 1.0) - ln_gamma(m + ax + 1.0);
    // terms are unimodal in m; peak near the positive root of m(m+|x|) = s²/4
    let peak = ((-ax + (ax * ax + s * s).sqrt()) / 2.0).floor().max(0.0);
    let top = term(peak);
    let mut acc = 1.0f64;
    let mut m = peak + 1.0;
    loop {
        let r = (term(m) - top).exp();
        acc += r;
        if r < 1e-18 {
            break;
        }
        m += 1.0;
    }
    let mut m = peak - 1.0;
    while m >= 0.0 {
        let r = (term(m) - top).exp();
        acc += r;
        if r < 1e-18 {
            break;
        }
        m -= 1.0;
    }
    -s + top + acc.ln()
}

pub fn srw_pmf(s: f64, x: i64) -> f64 {
    SrwPmf::new(s).pmf(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyMode {
    Exact,
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SrwEntropy {
    pub s: f64,
    pub value: f64,
    pub mode: EntropyMode,
    /// For exact mode, a bound on the neglected tail contribution.
    pub truncation_error: f64,
}

/// `h(s) = -Σ_x P(W_s = x) log P(W_s = x)` in nats.
pub fn h_exact(s: f64) -> f64 {
    srw_entropy(s).value
}

pub fn srw_entropy(s: f64) -> SrwEntropy {
    let table = SrwPmf::new(s);
    // beyond the table each term -p log p <= p (|ln p|) and the tail mass is
    // below 1e-30, so the neglected entropy is far under the tolerance
    let tail = table.tail_bound();
    let truncation_error = if tail > 0.0 { tail * (1.0 - tail.ln()) } else { 0.0 };
    debug_assert!(truncation_error < TRUNCATION_TOL);
    SrwEntropy {
        s,
        value: table.entropy(),
        mode: EntropyMode::Exact,
        truncation_error,
    }
}

/// Leading-order `½ log(2πe s)`.
pub fn h_asymptotic(s: f64) -> SrwEntropy {
    SrwEntropy {
        s,
        value: 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * s).ln(),
        mode: EntropyMode::Asymptotic,
        truncation_error: f64::NAN,
    }
}
