mod common;

use common::dense_law;
use dihedral_cutoff::entropy::cutoff_time;
use dihedral_cutoff::exact::{evolve_continuous, tv_exact, DistVector, EvolveOptions};
use dihedral_cutoff::group::{sample_balanced_generator_set, sample_generator_set, Generator};
use dihedral_cutoff::harness::{
    gcd_uniformity_check, parse_profile_csv, profile_csv, regime_report, run_cutoff_scan, tv_monte_carlo,
    verify_cutoff, window_locate, ExperimentConfig, KRule, Method, VerifyParams,
};
use dihedral_cutoff::rng::stream;
use dihedral_cutoff::walk::{cs_law_crosscheck, event_b_frequency};
use dihedral_cutoff::{GeneratorSet, GroupParams};
use proptest::prelude::*;

/// Usage counts are independent Poisson(t/k); a generator qualifies with
/// probability 2·P(0)·P(1).
fn p_event_b(t: f64, k: usize) -> f64 {
    let lam = t / k as f64;
    let q0 = (-lam).exp();
    let q1 = lam * q0;
    1.0 - (1.0 - 2.0 * q0 * q1).powi(k as i32)
}

#[test]
fn event_b_frequency_matches_closed_form() {
    let p = GroupParams::new(101).unwrap();
    for (k, t) in [(8usize, 4.0), (20, 10.0), (30, 60.0)] {
        let gs = sample_generator_set(&p, k, &mut stream(k as u64, 0)).unwrap();
        let rep = event_b_frequency(&gs, t, 100_000, 0.5, 9).unwrap();
        let want = p_event_b(t, k);
        assert!((rep.frequency - want).abs() < 4.0 * rep.stderr + 1e-4, "k={k} t={t}: {} vs {want}", rep.frequency);
    }
}

fn config_strategy() -> impl Strategy<Value = ExperimentConfig> {
    (
        prop::sample::subsequence(vec![5u64, 7, 11, 13, 101, 1009], 1..4),
        prop::collection::vec(2u64..40, 1..4),
        any::<u64>(),
        1usize..20,
        any::<bool>(),
    )
        .prop_map(|(primes, k, seed, replicates, mc)| {
            let mut c = ExperimentConfig::new(primes, KRule::Fixed { k }, seed);
            c.replicates = replicates;
            c.method = if mc { Method::Mc } else { Method::Exact };
            c
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn config_hash_is_content_addressed(cfg in config_strategy()) {
        let back = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.hash(), cfg.hash());
        prop_assert_eq!(cfg.clone().hash(), cfg.hash());
        let mut other = cfg.clone();
        other.seed = cfg.seed.wrapping_add(1);
        prop_assert_ne!(other.hash(), cfg.hash());
        let mut other = cfg.clone();
        other.replicates += 1;
        prop_assert_ne!(other.hash(), cfg.hash());
    }
}

#[test]
fn scan_csv_is_independent_of_threads() {
    let mut cfg = ExperimentConfig::new(vec![101, 1009], KRule::Fixed { k: vec![4, 9] }, 77);
    cfg.replicates = 3;
    let one = run_cutoff_scan(&cfg, Some(1)).unwrap();
    let many = run_cutoff_scan(&cfg, Some(4)).unwrap();
    let a = profile_csv(&one, &cfg);
    assert_eq!(a, profile_csv(&many, &cfg));
    let rows = parse_profile_csv(&a).unwrap();
    assert_eq!(rows.len(), one.rows.len());
    for (x, y) in rows.iter().zip(&one.rows) {
        assert_eq!((x.n, x.k, x.replicate, &x.gens_hash), (y.n, y.k, y.replicate, &y.gens_hash));
        assert!((x.tv - y.tv).abs() <= 1e-15 * y.tv.abs().max(1.0));
    }
}

#[test]
fn scan_labels_and_times_match_standalone_calls() {
    let mut cfg = ExperimentConfig::new(vec![101, 10007], KRule::Fixed { k: vec![3, 12, 300] }, 5);
    cfg.replicates = 1;
    cfg.alphas = vec![1.0];
    let prof = run_cutoff_scan(&cfg, None).unwrap();
    let bad: Vec<_> = prof.rows.iter().filter(|r| !r.ok()).map(|r| (r.n, r.k, &r.status)).collect();
    assert!(bad.is_empty(), "{bad:?}");
    for r in &prof.rows {
        assert_eq!(r.regime, regime_report(r.k, r.n).unwrap().label);
        assert_eq!(r.t0, cutoff_time(r.k, 2 * r.n).unwrap().t0);
        // the row's tv is the exact distance for the recorded generator set
        let p = GroupParams::new(r.n).unwrap();
        let gs = sample_balanced_generator_set(&p, r.k as usize, &mut stream(r.seed, 0), 10_000).unwrap().0;
        assert_eq!(gs.content_hash(), r.gens_hash);
        let f = evolve_continuous(&DistVector::identity(&p), &gs, &p, r.t, EvolveOptions::default()).unwrap();
        assert!((tv_exact(&f.dist) - r.tv).abs() < 1e-12);
    }
}

#[test]
fn monte_carlo_tracks_exact_distance() {
    let p = GroupParams::new(13).unwrap();
    let (gs, _) = sample_balanced_generator_set(&p, 4, &mut stream(3, 0), 1000).unwrap();
    for t in [0.5, 2.0, 6.0] {
        let exact = tv_to_uniform_dense(&gs, &p, t);
        let (mc, se, bias) = tv_monte_carlo(&gs, &p, t, 200_000, 21);
        assert!(mc - exact <= 4.0 * se + bias && exact - mc <= 4.0 * se, "t={t}: {mc} vs {exact}");
    }
}

fn tv_to_uniform_dense(gs: &GeneratorSet, p: &GroupParams, t: f64) -> f64 {
    common::tv_to_uniform(&dense_law(gs, p, p.identity(), t))
}

#[test]
fn reflection_coordinates_follow_alternating_sum_law() {
    let p = GroupParams::new(101).unwrap();
    let gs = GeneratorSet::new(
        &p,
        vec![
            Generator { is_reflection: true, u: 3 },
            Generator { is_reflection: true, u: 40 },
            Generator { is_reflection: false, u: 7 },
            Generator { is_reflection: false, u: 11 },
        ],
    )
    .unwrap();
    let rep = cs_law_crosscheck(&gs, &p, 6.0, 60_000, 4).unwrap();
    assert!(!rep.per_n_s.is_empty());
    assert!(rep.min_p_value() > 1e-4 / rep.per_n_s.len() as f64, "{:?}", rep.per_n_s);
    assert!(rep.per_n_s.iter().all(|g| g.impossible == 0));
}

#[test]
fn gcd_law_is_uniform_on_subgroup() {
    for (n, v) in [(12u64, vec![4u64, 6]), (12, vec![3, 9]), (30, vec![10, 15]), (13, vec![2, 5, 0])] {
        let p = GroupParams::new(n).unwrap();
        let rep = gcd_uniformity_check(&p, &v, None, 0).unwrap();
        let mut gamma = n;
        for &x in &v {
            let (mut a, mut b) = (gamma, x % n);
            while b != 0 {
                (a, b) = (b, a % b);
            }
            gamma = a;
        }
        assert_eq!(rep.gamma, gamma);
        let each = n.pow(v.len() as u32) / (n / gamma);
        for (i, &c) in rep.counts.iter().enumerate() {
            assert_eq!(c, if i as u64 % gamma == 0 { each } else { 0 }, "n={n} v={v:?} i={i}");
        }
        assert!(rep.uniform);
    }
}

#[test]
fn window_crossings_hit_quartiles() {
    let p = GroupParams::new(1009).unwrap();
    let (gs, _) = sample_balanced_generator_set(&p, 8, &mut stream(12, 0), 1000).unwrap();
    let t0 = cutoff_time(8, p.size()).unwrap().t0;
    let w = window_locate(&gs, &p, t0, 1e-6, EvolveOptions::default()).unwrap();
    assert!(w.t_lo < w.t_hi);
    let tv = |t: f64| {
        tv_exact(&evolve_continuous(&DistVector::identity(&p), &gs, &p, t, EvolveOptions::default()).unwrap().dist)
    };
    assert!(tv(w.t_lo * (1.0 - 1e-4)) > 0.75 && tv(w.t_lo * (1.0 + 1e-4)) < 0.75);
    assert!(tv(w.t_hi * (1.0 - 1e-4)) > 0.25 && tv(w.t_hi * (1.0 + 1e-4)) < 0.25);
    assert!((w.ratio - (w.t_hi - w.t_lo) / t0).abs() < 1e-12);
}

#[test]
fn verify_reads_targets_from_grid() {
    let mut cfg = ExperimentConfig::new(vec![1009], KRule::Fixed { k: vec![8] }, 2);
    cfg.replicates = 4;
    let prof = run_cutoff_scan(&cfg, None).unwrap();
    let rep = verify_cutoff(&prof.rows, VerifyParams::default()).unwrap();
    let cell = &rep.cells[0];
    assert_eq!((cell.alpha_lo, cell.alpha_hi), (0.5, 2.0));
    assert!(!cell.nearest_used);
    let lo: Vec<&_> = prof.rows.iter().filter(|r| r.alpha == 0.5).collect();
    let hi: Vec<&_> = prof.rows.iter().filter(|r| r.alpha == 2.0).collect();
    let passed = lo.iter().zip(&hi).filter(|(a, b)| a.tv >= 0.8 && b.tv <= 0.2).count();
    assert_eq!(cell.passed, passed);
    assert_eq!(cell.pass, passed as f64 >= 0.8 * 4.0);
    // dropping the upper target leaves the grid incomplete
    let partial: Vec<_> = prof.rows.iter().filter(|r| r.alpha < 1.5).cloned().collect();
    assert!(matches!(
        verify_cutoff(&partial, VerifyParams::default()),
        Err(dihedral_cutoff::Error::MissingGrid(_))
    ));
}
