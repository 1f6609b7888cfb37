use std::collections::HashMap;

use dihedral_cutoff::entropy::normal::sigma_identity_residuals;
use dihedral_cutoff::entropy::qr::sample_qr;
use dihedral_cutoff::entropy::{
    cutoff_time, entropic_time, entropy_of, entropy_plugin, h_exact, multinomial_diff_pmf, normal_density,
    normal_log_density, qr_entropy_mean, sample_normal, varentropy_of, y_pmf_exact, NormalSetParams, PmfTable,
    SrwPmf,
};
use dihedral_cutoff::rng::stream;
use dihedral_cutoff::stats::moments;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;

/// Law of `Σ_i (-1)^{n-i} e_{δ_i}` by listing all `k^n` step sequences.
fn y_by_enumeration(k: usize, n: usize) -> HashMap<Vec<i64>, u128> {
    let mut out = HashMap::new();
    let total = k.pow(n as u32);
    for code in 0..total {
        let mut c = code;
        let mut v = vec![0i64; k];
        for i in 1..=n {
            let sign = if (n - i) % 2 == 0 { 1 } else { -1 };
            v[c % k] += sign;
            c /= k;
        }
        *out.entry(v).or_insert(0u128) += 1;
    }
    out
}

/// Law of `X - Y`, X and Y counts of N uniform draws from d cells, by
/// listing all `d^{2N}` draw sequences.
fn multidiff_by_enumeration(d: usize, n: usize) -> HashMap<Vec<i64>, u128> {
    let mut out = HashMap::new();
    for code in 0..d.pow(2 * n as u32) {
        let mut c = code;
        let mut v = vec![0i64; d];
        for j in 0..2 * n {
            v[c % d] += if j < n { 1 } else { -1 };
            c /= d;
        }
        *out.entry(v).or_insert(0u128) += 1;
    }
    out
}

fn assert_table_matches(table: &PmfTable, counts: &HashMap<Vec<i64>, u128>, denom: u128) {
    assert_eq!(table.len(), counts.len());
    for (point, &c) in counts {
        let i = table.index_of(point).expect("point in support");
        let (num, den) = table.ratio_at(i).unwrap();
        // num/den == c/denom as reduced fractions
        assert_eq!(num * denom, c * den, "{point:?}");
    }
}

#[test]
fn y_law_matches_enumeration() {
    for (k, n) in [(1, 5), (2, 1), (2, 6), (3, 5), (4, 4), (2, 9)] {
        let table = y_pmf_exact(k, n).unwrap();
        assert_table_matches(&table, &y_by_enumeration(k, n), (k as u128).pow(n as u32));
    }
}

#[test]
fn multidiff_matches_enumeration() {
    for (d, n) in [(1, 3), (2, 1), (2, 3), (3, 2), (4, 2)] {
        let table = multinomial_diff_pmf(d, n).unwrap();
        assert_table_matches(&table, &multidiff_by_enumeration(d, n), (d as u128).pow(2 * n as u32));
    }
}

/// `Y_{2m}` is a difference of two independent Multinomial(m) vectors.
#[test]
fn even_y_is_multinomial_difference() {
    for (k, m) in [(2, 3), (3, 2), (4, 3), (2, 6)] {
        let y = y_pmf_exact(k, 2 * m).unwrap();
        let d = multinomial_diff_pmf(k, m).unwrap();
        assert!(y.exact_eq(&d), "k={k} m={m}");
    }
}

fn multinomial_entropy(d: usize, n: usize) -> f64 {
    let mut counts: HashMap<Vec<i64>, u128> = HashMap::new();
    for code in 0..d.pow(n as u32) {
        let mut c = code;
        let mut v = vec![0i64; d];
        for _ in 0..n {
            v[c % d] += 1;
            c /= d;
        }
        *counts.entry(v).or_insert(0) += 1;
    }
    let total = d.pow(n as u32) as f64;
    counts.values().map(|&c| -(c as f64 / total) * (c as f64 / total).ln()).sum()
}

#[test]
fn entropy_bounds() {
    for (d, n) in [(2, 2), (3, 3), (4, 2), (2, 5)] {
        let table = multinomial_diff_pmf(d, n).unwrap();
        let h = entropy_of(&table);
        // H(X - Y) >= H(X - Y | Y) = H(X)
        assert!(h >= multinomial_entropy(d, n) - 1e-12, "d={d} n={n}");
        assert!(h <= (table.len() as f64).ln() + 1e-12);
        let float = PmfTable::from_probs(d, table.iter().map(|(x, p)| (x.to_vec(), p)).collect()).unwrap();
        assert!((entropy_of(&float) - h).abs() < 1e-13);
    }
}

#[test]
fn y_varentropy_within_bound() {
    for (k, n) in [(2, 10), (3, 8), (4, 12), (5, 8), (6, 10)] {
        let v = varentropy_of(&y_pmf_exact(k, n).unwrap());
        let bound = n as f64 * ((k as f64).ln().powi(2) + 2.0) / 2.0;
        assert!(v <= bound, "k={k} n={n}: {v} > {bound}");
    }
}

#[test]
fn plugin_estimate_tracks_exact_entropy() {
    let table = y_pmf_exact(3, 6).unwrap();
    let cdf: Vec<(Vec<i64>, f64)> = table
        .iter()
        .scan(0.0, |acc, (x, p)| {
            *acc += p;
            Some((x.to_vec(), *acc))
        })
        .collect();
    let mut rng = stream(17, 0);
    let draws: Vec<Vec<i64>> = (0..200_000)
        .map(|_| {
            let u: f64 = rng.random();
            cdf.iter().find(|(_, c)| u <= *c).unwrap_or(cdf.last().unwrap()).0.clone()
        })
        .collect();
    let est = entropy_plugin(&draws).unwrap();
    let h = entropy_of(&table);
    assert!((est.estimate - h).abs() <= 4.0 * est.stderr + 1e-3, "{est:?} vs {h}");
    assert!(est.plugin <= est.estimate);
}

#[test]
fn entropic_time_round_trips() {
    for k in [1u64, 2, 5, 40] {
        for t in [0.1, 1.0, 7.5, 300.0] {
            let log_n = k as f64 * h_exact(t / k as f64);
            let back = entropic_time(k, log_n, 1e-12).unwrap();
            assert!((back - t).abs() <= 1e-8 * t.max(1.0), "k={k} t={t} got {back}");
        }
    }
}

#[test]
fn cutoff_branches_agree_with_entropic_time() {
    let g = 2 * 100_003u64;
    let lg = (g as f64).ln();
    // comparable branch is the entropic time itself
    let ct = cutoff_time(15, g).unwrap();
    assert!((ct.t0 - entropic_time(15, lg, 1e-12).unwrap()).abs() < 1e-6);
    // small k: h(s) ~ log(2πes)/2 over k-1 free coordinates
    let ct = cutoff_time(4, g).unwrap();
    let te = 4.0 / 3.0 * entropic_time(3, lg, 1e-12).unwrap();
    assert!((ct.t0 / te - 1.0).abs() < 0.05, "{} vs {te}", ct.t0);
    // large k: t log(k/t) ~ log|G|, approached at a log-log rate
    let gap = |k: u64| cutoff_time(k, g).unwrap().t0 / entropic_time(k, lg, 1e-12).unwrap() - 1.0;
    let gaps: Vec<f64> = [200u64, 2_000, 20_000, 2_000_000].map(gap).to_vec();
    assert!(gaps.windows(2).all(|w| w[1].abs() < w[0].abs()), "{gaps:?}");
}

#[test]
fn qr_mean_matches_samples() {
    let (t, k, k_r) = (40.0, 20, 9);
    let qs = sample_qr(t, k, k_r, 20_000, 5);
    let m = moments(&qs);
    let want = qr_entropy_mean(t, k, k_r);
    assert!((m.mean - want).abs() < 4.0 * m.stderr, "{} vs {want}", m.mean);
}

#[test]
fn srw_pmf_sums_and_is_symmetric() {
    for s in [0.01, 0.7, 3.0, 55.0, 2000.0] {
        let t = SrwPmf::new(s);
        let total: f64 = t.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12, "s={s}");
        for x in [1i64, 2, 7] {
            assert!((t.pmf(x) - t.pmf(-x)).abs() <= 1e-15 * t.pmf(x).max(1e-300));
        }
    }
}

/// Σ = diag(p̂) - p̂p̂ᵀ with p̂ = 1/(d+1); log density by Cholesky.
fn dense_log_density(d: usize, m: f64, x: &[f64]) -> f64 {
    let p = 1.0 / (d as f64 + 1.0);
    let cov = DMatrix::from_fn(d, d, |i, j| m * (if i == j { p - p * p } else { -p * p }));
    let chol = cov.clone().cholesky().expect("positive definite");
    let xv = DVector::from_column_slice(x);
    let sol = chol.solve(&xv);
    let log_det = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    -0.5 * d as f64 * (2.0 * std::f64::consts::PI).ln() - 0.5 * log_det - 0.5 * xv.dot(&sol)
}

proptest! {
    #[test]
    fn normal_density_matches_dense(d in 1usize..=8, m in 1.0f64..1e4, seed in any::<u64>()) {
        let params = NormalSetParams::new(d, m, 0.2).unwrap();
        let mut rng = stream(seed, 0);
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0) * m.sqrt()).collect();
        let got = normal_log_density(&params, &x);
        let want = dense_log_density(d, m, &x);
        prop_assert!((got - want).abs() < 1e-9 * want.abs().max(1.0), "{} vs {}", got, want);
    }
}

#[test]
fn sigma_identities_through_d_50() {
    for d in 1..=50 {
        let (inv, det) = sigma_identity_residuals(d);
        assert!(inv < 1e-10 && det < 1e-10, "d={d}");
    }
}

#[test]
fn normal_density_integrates_to_one() {
    // d = 1: Riemann sum over ±8 sd
    let p1 = NormalSetParams::new(1, 50.0, 0.2).unwrap();
    let sd = (50.0f64 * 0.25).sqrt();
    let h = sd / 200.0;
    let total: f64 = (-1600..=1600).map(|i| normal_density(&p1, &[i as f64 * h]) * h).sum();
    assert!((total - 1.0).abs() < 1e-9, "{total}");
    // d = 2
    let p2 = NormalSetParams::new(2, 30.0, 0.2).unwrap();
    let sd = (30.0f64 * 2.0 / 9.0).sqrt();
    let h = sd / 40.0;
    let mut total = 0.0;
    for i in -400..=400 {
        for j in -400..=400 {
            total += normal_density(&p2, &[i as f64 * h, j as f64 * h]) * h * h;
        }
    }
    assert!((total - 1.0).abs() < 1e-8, "{total}");
}

#[test]
fn sampler_covariance_small_d() {
    let (d, m) = (4usize, 100.0);
    let params = NormalSetParams::new(d, m, 0.2).unwrap();
    let draws: Vec<Vec<f64>> = (0..100_000).map(|i| sample_normal(&params, &mut stream(3, i))).collect();
    let p = 1.0 / (d as f64 + 1.0);
    for i in 0..d {
        for j in 0..d {
            let prods: Vec<f64> = draws.iter().map(|x| x[i] * x[j]).collect();
            let mo = moments(&prods);
            let want = m * if i == j { p - p * p } else { -p * p };
            assert!((mo.mean - want).abs() < 5.0 * mo.stderr, "({i},{j}) {} vs {want}", mo.mean);
        }
    }
}
