use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;
use seqlab::certify::{self, admissible_tuples, build_coefficient_table};
use seqlab::checkpoint;
use seqlab::growth;
use seqlab::{exact_prefix, parity_predict, residue_stream, Modulus, Parity};

fn exact(n: u64) -> Vec<BigUint> {
    // a[0] unused
    let mut a = vec![BigUint::zero(), BigUint::from(1u32)];
    for k in 2..=n as usize {
        let next = &a[k - 1] + &a[k / 2];
        a.push(next);
    }
    a
}

/// Moduli whose odd part exceeds 1, as the certify module requires.
fn certifiable_modulus() -> impl Strategy<Value = u32> {
    (3u32..=20).prop_filter("odd part > 1", |m| m >> m.trailing_zeros() > 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn residues_match_exact_values(m in 2u32..=65_536, n in 1u64..=1500) {
        let a = exact(n);
        let t = residue_stream(Modulus::new(m).unwrap(), n).unwrap();
        let mb = BigUint::from(m);
        for k in 1..=n {
            prop_assert_eq!(t.get(k), (&a[k as usize] % &mb).to_u32().unwrap());
        }
    }

    #[test]
    fn exact_prefix_matches_reference(n in 1u64..=800) {
        let a = exact(n);
        let p = exact_prefix(n).unwrap();
        for k in 1..=n {
            prop_assert_eq!(p.get(k), &a[k as usize]);
        }
    }

    #[test]
    fn parity_prediction(n in 1u64..=3000) {
        let a = exact(n);
        let even = (&a[n as usize] % 2u32).is_zero();
        prop_assert_eq!(parity_predict(n) == Parity::Even, even);
    }

    #[test]
    fn window_coefficients_are_exact(k in 1u64..=1000, j in 1u32..=6) {
        let c = build_coefficient_table(j).unwrap();
        let top = (k << j) + (1u64 << j);
        let a = exact(top);
        let base: Vec<&BigUint> = (1..=j).map(|s| &a[((k << s) + 1) as usize]).collect();
        for i in 1..=j {
            for t in 1..(1usize << i) {
                let row = c.get(i, t);
                let sum: BigUint = row.iter().zip(&base).map(|(c, b)| c * *b).sum();
                prop_assert_eq!(&sum, &a[((k << i) + t as u64) as usize], "i={} t={}", i, t);
            }
        }
    }

    #[test]
    fn search_agrees_with_naive(m in certifiable_modulus(), j in 1u32..=3, x_seed in 0u32..1000) {
        let m = Modulus::new(m).unwrap();
        let x = x_seed % m.get();
        let s = certify::search_min_hits(x, m, j).unwrap();
        let n = certify::naive_min_hits(x, m, j).unwrap();
        prop_assert_eq!(s.e, n.e);
        prop_assert_eq!(s.witness_tuple, n.witness_tuple);
    }

    #[test]
    fn minimum_bounds_every_tuple(
        m in certifiable_modulus(),
        j in 1u32..=5,
        x_seed in 0u32..1000,
        picks in proptest::collection::vec(0usize..1000, 5),
    ) {
        let m = Modulus::new(m).unwrap();
        let x = x_seed % m.get();
        let spec = admissible_tuples(m, j).unwrap();
        let first = spec.first_values();
        let b1 = first[picks[0] % first.len()];
        let follow = spec.follow_values(b1);
        let tuple: Vec<u32> = std::iter::once(b1)
            .chain((1..j as usize).map(|s| follow[picks[s] % follow.len()]))
            .collect();
        prop_assert!(spec.contains(&tuple));
        let table = build_coefficient_table(j).unwrap().reduce(m);
        let c = certify::search_min_hits(x, m, j).unwrap();
        prop_assert!(table.hits(&tuple, x) >= c.e);
    }

    #[test]
    fn negation_symmetry(m in certifiable_modulus(), j in 1u32..=4, x_seed in 0u32..1000) {
        // b -> -b maps admissible tuples onto admissible tuples and negates
        // every window element
        let m = Modulus::new(m).unwrap();
        let x = x_seed % m.get();
        let neg = (m.get() - x) % m.get();
        let a = certify::search_min_hits(x, m, j).unwrap();
        let b = certify::search_min_hits(neg, m, j).unwrap();
        prop_assert_eq!(a.e, b.e);
    }

    #[test]
    fn checkpoint_round_trip(m in 2u32..=1000, n in 1u64..=5000) {
        let t = residue_stream(Modulus::new(m).unwrap(), n).unwrap();
        prop_assert_eq!(checkpoint::decode(&checkpoint::encode(&t)).unwrap(), t);
    }

    #[test]
    fn probe_is_monotone_in_epsilon(e1 in 0.01f64..2.0, e2 in 0.01f64..2.0, n in 2u64..=3000) {
        let prefix = exact_prefix(n).unwrap();
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let a = growth::upper_probe_on(&prefix, lo, n).unwrap();
        let b = growth::upper_probe_on(&prefix, hi, n).unwrap();
        prop_assert!(b.c_observed <= a.c_observed);
        // a(2) = 2 is always a candidate
        let p = growth::GrowthParams::default();
        prop_assert!(a.c_observed >= 2f64.ln() - (p.f(2.0) + lo) * 2f64.ln());
    }

    #[test]
    fn growth_margin_is_consistent(n in 2u64..=20_000) {
        let prefix = exact_prefix(n).unwrap();
        let r = &growth::growth_lower_check_on(&prefix, n, n).unwrap()[0];
        prop_assert!((r.margin - (r.log_a_n - r.threshold)).abs() <= 1e-9 * r.log_a_n.abs().max(1.0));
        prop_assert_eq!(r.verdict == growth::Verdict::Pass, n >= 141);
    }
}

#[test]
fn f_is_increasing_beyond_eight() {
    let p = growth::GrowthParams::default();
    let mut prev = p.f(8.0 + 1e-6);
    let mut x = 8.0f64 + 1e-6;
    while x < 1e6 {
        x *= 1.01;
        let v = p.f(x);
        assert!(v > prev, "x = {x}");
        prev = v;
    }
}

#[test]
fn search_is_thread_count_independent() {
    let run = |threads: usize, x: u32, m: u32, j: u32| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| certify::search_min_hits(x, Modulus::new(m).unwrap(), j).unwrap())
    };
    for (x, m, j) in [(0, 7, 6), (3, 12, 6), (0, 9, 5), (5, 10, 5)] {
        let one = run(1, x, m, j);
        let many = run(4, x, m, j);
        assert_eq!(
            (one.e, &one.witness_tuple),
            (many.e, &many.witness_tuple),
            "({x},{m},{j})"
        );
    }
}

#[test]
fn oversized_modulus_is_rejected() {
    assert!(residue_stream(Modulus::new(65_537).unwrap(), 10).is_err());
}
