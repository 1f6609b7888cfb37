use dihedral_cutoff::group::{
    check_balance, inverse, multiply, multiply_index, pow, sample_balanced_generator_set, sample_generator_set,
    DihedralElement, Generator,
};
use dihedral_cutoff::rng::stream;
use dihedral_cutoff::stats::chi_square_gof;
use dihedral_cutoff::{GeneratorSet, GroupParams};
use proptest::prelude::*;

/// Permutation of the regular n-gon's vertices: r^x rotates by x, s reflects
/// through vertex 0.
fn as_permutation(e: DihedralElement, n: u64) -> Vec<u64> {
    (0..n)
        .map(|v| {
            let rotated = (v + e.rot) % n;
            if e.refl {
                (n - rotated) % n
            } else {
                rotated
            }
        })
        .collect()
}

fn compose(first: &[u64], then: &[u64]) -> Vec<u64> {
    first.iter().map(|&v| then[v as usize]).collect()
}

fn element(n: u64) -> impl Strategy<Value = DihedralElement> {
    (any::<bool>(), 0..n).prop_map(|(refl, rot)| DihedralElement { refl, rot })
}

fn group_and_elements() -> impl Strategy<Value = (u64, DihedralElement, DihedralElement, DihedralElement)> {
    (2u64..1_000_000).prop_flat_map(|n| (Just(n), element(n), element(n), element(n)))
}

proptest! {
    #[test]
    fn associativity_and_inverse((n, a, b, c) in group_and_elements()) {
        let p = GroupParams::new(n).unwrap();
        prop_assert_eq!(multiply(multiply(a, b, &p), c, &p), multiply(a, multiply(b, c, &p), &p));
        prop_assert_eq!(multiply(a, inverse(a, &p), &p), p.identity());
        prop_assert_eq!(multiply(inverse(a, &p), a, &p), p.identity());
        prop_assert_eq!(multiply(a, p.identity(), &p), a);
    }

    #[test]
    fn index_round_trip_and_index_product((n, a, b, _c) in group_and_elements()) {
        let p = GroupParams::new(n).unwrap();
        prop_assert_eq!(DihedralElement::from_index(a.index(&p), &p), a);
        prop_assert_eq!(multiply_index(a.index(&p), b.index(&p), &p), multiply(a, b, &p).index(&p));
        prop_assert!(a.index(&p) < p.size());
    }

    #[test]
    fn relations_hold((n, a, _b, _c) in group_and_elements(), e in -40i64..40) {
        let p = GroupParams::new(n).unwrap();
        let r = DihedralElement::rotation(1, &p);
        let s = DihedralElement::reflection(0, &p);
        prop_assert_eq!(pow(r, n as i64, &p), p.identity());
        prop_assert_eq!(multiply(s, s, &p), p.identity());
        // s r s = r^{-1}
        prop_assert_eq!(multiply(multiply(s, r, &p), s, &p), inverse(r, &p));
        // reflections are involutions
        if a.refl {
            prop_assert_eq!(multiply(a, a, &p), p.identity());
        }
        prop_assert_eq!(multiply(pow(a, e, &p), pow(a, -e, &p), &p), p.identity());
    }

    #[test]
    fn generator_json_round_trip(n in 3u64..500, seed in any::<u64>(), k in 1usize..20) {
        let p = GroupParams::new(n).unwrap();
        let gs = sample_generator_set(&p, k, &mut stream(seed, 0)).unwrap();
        let (p2, gs2) = GeneratorSet::from_json(&gs.to_json()).unwrap();
        prop_assert_eq!(p2.n(), n);
        prop_assert_eq!(gs2.gens(), gs.gens());
        prop_assert_eq!(gs2.content_hash(), gs.content_hash());
    }

    #[test]
    fn signed_generators_invert(n in 3u64..500, refl in any::<bool>(), u in 0u64..500) {
        let p = GroupParams::new(n).unwrap();
        let g = Generator { is_reflection: refl, u: u % n };
        let plus = g.signed(true, &p);
        let minus = g.signed(false, &p);
        prop_assert_eq!(multiply(plus, minus, &p), p.identity());
    }
}

/// The product agrees with composition of symmetries of the n-gon.
#[test]
fn matches_polygon_symmetries() {
    for n in [3u64, 4, 5, 6, 7, 12] {
        let p = GroupParams::new(n).unwrap();
        // the representation is faithful and a homomorphism in one fixed order
        let order_ab = p
            .elements()
            .flat_map(|a| p.elements().map(move |b| (a, b)))
            .all(|(a, b)| compose(&as_permutation(a, n), &as_permutation(b, n)) == as_permutation(multiply(a, b, &p), n));
        let order_ba = p
            .elements()
            .flat_map(|a| p.elements().map(move |b| (a, b)))
            .all(|(a, b)| compose(&as_permutation(b, n), &as_permutation(a, n)) == as_permutation(multiply(a, b, &p), n));
        assert!(order_ab || order_ba, "n={n}");
    }
}

#[test]
fn sampled_generators_are_uniform_on_g() {
    let p = GroupParams::new(13).unwrap();
    let mut counts = vec![0u64; 26];
    for seed in 0..4000 {
        let gs = sample_generator_set(&p, 5, &mut stream(seed, 0)).unwrap();
        for g in gs.gens() {
            counts[g.element().index(&p) as usize] += 1;
        }
    }
    let gof = chi_square_gof(&counts, &[1.0 / 26.0; 26], 5.0);
    assert!(gof.p_value > 1e-3, "{gof:?}");
}

#[test]
fn balanced_sets_are_balanced() {
    let p = GroupParams::new(101).unwrap();
    for seed in 0..200 {
        let (gs, _) = sample_balanced_generator_set(&p, 8, &mut stream(seed, 0), 1000).unwrap();
        assert!(check_balance(&gs));
        assert!(gs.k_s() >= 1 && gs.k_r() >= 1);
        let rho = gs.rho_s();
        assert!((0.25..=0.75).contains(&rho));
        assert_eq!(gs.k_s() + gs.k_r(), 8);
    }
}
