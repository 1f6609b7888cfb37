//! Small statistical helpers shared by the Monte Carlo checks.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

#[derive(Debug, Clone, Copy, Default, PartialEq, serde::Serialize)]
pub struct Moments {
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
    /// Standard error of the mean.
    pub stderr: f64,
    /// Standard error of the sample variance (from the fourth central moment).
    pub var_stderr: f64,
}

pub fn moments(xs: &[f64]) -> Moments {
    let count = xs.len();
    if count < 2 {
        return Moments {
            count,
            mean: xs.first().copied().unwrap_or(0.0),
            ..Default::default()
        };
    }
    let nf = count as f64;
    let mean = xs.iter().sum::<f64>() / nf;
    let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / nf;
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / nf;
    let variance = m2 * nf / (nf - 1.0);
    Moments {
        count,
        mean,
        variance,
        stderr: (variance / nf).sqrt(),
        var_stderr: ((m4 - m2 * m2).max(0.0) / nf).sqrt(),
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct GofResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Cells after merging.
    pub cells: usize,
    /// Observations falling where the reference has zero mass.
    pub impossible: u64,
}

/// Pearson chi-square goodness of fit. Cells whose expected count is below
/// `min_expected` are pooled (smallest first) until every cell reaches it.
/// Any observation in a zero-probability cell forces `p_value = 0`.
pub fn chi_square_gof(observed: &[u64], probs: &[f64], min_expected: f64) -> GofResult {
    assert_eq!(observed.len(), probs.len());
    let total: u64 = observed.iter().sum();
    let tf = total as f64;
    let mut impossible = 0;
    let mut cells: Vec<(f64, f64)> = Vec::with_capacity(observed.len());
    for (&o, &p) in observed.iter().zip(probs) {
        if p <= 0.0 {
            impossible += o;
        } else {
            cells.push((tf * p, o as f64));
        }
    }
    cells.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for (e, o) in cells {
        acc.0 += e;
        acc.1 += o;
        if acc.0 >= min_expected {
            merged.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if acc.0 > 0.0 {
        match merged.last_mut() {
            Some(last) => {
                last.0 += acc.0;
                last.1 += acc.1;
            }
            None => merged.push(acc),
        }
    }
    let statistic: f64 = merged.iter().map(|(e, o)| (o - e).powi(2) / e).sum();
    let dof = merged.len().saturating_sub(1);
    let p_value = if impossible > 0 {
        0.0
    } else if dof == 0 {
        1.0
    } else {
        let chi = ChiSquared::new(dof as f64).expect("positive dof");
        1.0 - chi.cdf(statistic)
    };
    GofResult {
        statistic,
        dof,
        p_value,
        cells: merged.len(),
        impossible,
    }
}

/// `ln C(n, k) + k ln p + (n-k) ln(1-p)`.
pub fn binomial_ln_pmf(n: u64, k: u64, p: f64) -> f64 {
    use statrs::function::factorial::ln_binomial;
    if k > n {
        return f64::NEG_INFINITY;
    }
    let kf = k as f64;
    let rest = (n - k) as f64;
    let term_k = if k == 0 { 0.0 } else { kf * p.ln() };
    let term_rest = if n == k { 0.0 } else { rest * (-p).ln_1p() };
    ln_binomial(n, k) + term_k + term_rest
}

/// `ln Pois(λ; k)` in saddle-point form (Loader 2000), accurate to a few
/// ulps relative even when both terms of the naive form are large.
pub fn poisson_ln_pmf(lambda: f64, k: u64) -> f64 {
    if lambda == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if k == 0 {
        return -lambda;
    }
    let x = k as f64;
    -stirling_error(x) - bd0(x, lambda) - 0.5 * (2.0 * std::f64::consts::PI * x).ln()
}

/// `ln k! - [(k + ½) ln k - k + ½ ln 2π]`.
fn stirling_error(n: f64) -> f64 {
    use statrs::function::gamma::ln_gamma;
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n <= 15.0 {
        return ln_gamma(n + 1.0) - (n + 0.5) * n.ln() + n - 0.5 * (2.0 * std::f64::consts::PI).ln();
    }
    let nn = n * n;
    if n > 500.0 {
        return (S0 - S1 / nn) / n;
    }
    if n > 80.0 {
        return (S0 - (S1 - S2 / nn) / nn) / n;
    }
    if n > 35.0 {
        return (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / n;
    }
    (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n
}

/// `x ln(x/λ) + λ - x`, by series when x is close to λ.
fn bd0(x: f64, lambda: f64) -> f64 {
    if (x - lambda).abs() < 0.1 * (x + lambda) {
        let v = (x - lambda) / (x + lambda);
        let mut s = (x - lambda) * v;
        let mut ej = 2.0 * x * v;
        let v2 = v * v;
        for j in 1..1000 {
            ej *= v2;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        return s;
    }
    x * (x / lambda).ln() + lambda - x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_beats_naive() {
        let xs = vec![1.0, 1e-16, 1e-16, 1e-16, 1e-16, -1.0];
        assert!((compensated_sum(xs) - 4e-16).abs() < 1e-30);
    }

    #[test]
    fn gof_perfect_fit_and_impossible_cells() {
        let r = chi_square_gof(&[25, 25, 25, 25], &[0.25; 4], 5.0);
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 1.0).abs() < 1e-12);
        let r = chi_square_gof(&[50, 49, 1], &[0.5, 0.5, 0.0], 5.0);
        assert_eq!(r.impossible, 1);
        assert_eq!(r.p_value, 0.0);
    }

    #[test]
    fn gof_merges_sparse_cells() {
        let r = chi_square_gof(&[90, 5, 3, 2], &[0.9, 0.05, 0.03, 0.02], 5.0);
        assert_eq!(r.cells, 3);
    }

    #[test]
    fn binomial_pmf_sums_to_one() {
        let s: f64 = (0..=30).map(|k| binomial_ln_pmf(30, k, 0.3).exp()).sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert_eq!(binomial_ln_pmf(5, 0, 0.0), 0.0);
    }

    #[test]
    fn moments_of_constant() {
        let m = moments(&[2.0; 10]);
        assert_eq!(m.mean, 2.0);
        assert_eq!(m.variance, 0.0);
    }

    #[test]
    fn poisson_pmf_matches_direct_forms() {
        for &(lambda, k) in &[(0.5, 0u64), (0.5, 3), (4.0, 4), (30.0, 17), (1000.0, 1000), (2000.0, 2300)] {
            let direct: f64 = -lambda + k as f64 * f64::ln(lambda) - (1..=k).map(|i| (i as f64).ln()).sum::<f64>();
            let got = poisson_ln_pmf(lambda, k);
            assert!((got - direct).abs() < 1e-9 * direct.abs().max(1.0), "{lambda} {k}: {got} vs {direct}");
        }
        let total: f64 = (0..4000).map(|k| poisson_ln_pmf(2000.0, k).exp()).sum();
        assert!((total - 1.0).abs() < 1e-13, "{total}");
    }
}
