mod common;

use common::{random_slope, BoundedFarey};
use proptest::prelude::*;
use qmlab::braid::IntMatrix2;
use qmlab::farey::{act, distance, intersection, paths_within, translation_length, Slope, INFINITY};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_sl2(rng: &mut ChaCha8Rng, len: usize) -> IntMatrix2 {
    qmlab::quasimorphism::random_psl2_word(rng, len)
}

#[test]
fn recursive_distance_matches_bfs() {
    let g = BoundedFarey::new(50);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    let mut sources = Vec::new();
    for _ in 0..20 {
        sources.push(random_slope(&mut rng, 50));
    }
    for s1 in &sources {
        let d = g.bfs(s1);
        for _ in 0..50 {
            let s2 = random_slope(&mut rng, 50);
            assert_eq!(distance(s1, &s2), d[g.index[&s2]], "{s1} -> {s2}");
            checked += 1;
        }
    }
    assert_eq!(checked, 1000);
}

#[test]
fn spec_examples() {
    let g = BoundedFarey::new(50);
    let s = |x: &str| x.parse::<Slope>().unwrap();
    assert_eq!(g.bfs(&s("0/1"))[g.index[&s("2/5")]], 2);
    assert_eq!(distance(&s("0/1"), &s("2/5")), 2);
    assert_eq!(act(&IntMatrix2::new(2, 1, 1, 1), &INFINITY), s("2/1"));
    let n = paths_within(&s("0/1"), &s("2/5"), 2, 1, 1000).unwrap().count() as u64;
    assert_eq!(n, g.count_walks(&s("0/1"), &s("2/5"), 2));
}

#[test]
fn path_counts_match_bounded_oracle_on_geodesic_lengths() {
    // Walks of length = distance are geodesics, all of which lie in the ladder.
    let g = BoundedFarey::new(30);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let a = random_slope(&mut rng, 12);
        let b = random_slope(&mut rng, 12);
        let d = distance(&a, &b) as usize;
        let n = paths_within(&a, &b, d, 0, 100_000).unwrap().filter(|p| p.as_ref().unwrap().len() == d).count();
        assert_eq!(n as u64, g.count_walks(&a, &b, d) - if d > 0 { g.count_walks(&a, &b, d - 1) } else { 0 });
    }
}

#[test]
fn distance_bounded_by_log_intersection() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut violations = 0;
    for _ in 0..10_000 {
        let a = random_slope(&mut rng, 1_000_000);
        let b = random_slope(&mut rng, 1_000_000);
        let i = qmlab::int::to_f64(&intersection(&a, &b));
        if i == 0.0 {
            continue;
        }
        if distance(&a, &b) as f64 > 2.0 * i.log2() + 2.0 {
            violations += 1;
        }
    }
    assert_eq!(violations, 0);
}

#[test]
fn translation_length_is_conjugacy_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let m = IntMatrix2::new(2, 1, 1, 1);
    let (e, _) = translation_length(&m, &INFINITY, 30).unwrap();
    for _ in 0..100 {
        let g = random_sl2(&mut rng, 4);
        let c = m.conjugate_by(&g);
        let (ec, uc) = translation_length(&c, &INFINITY, 30).unwrap();
        // d(α, c^p α) and d(α, m^p α) differ by at most 2 d(α, gα)
        let slack = 2.0 * distance(&INFINITY, &act(&g, &INFINITY)) as f64 / 30.0;
        assert!((ec - e).abs() <= slack + 1e-12, "{ec} vs {e}");
        assert!(uc <= ec + 1e-12);
    }
    let (e3, u3) = translation_length(&m.pow(3), &INFINITY, 10).unwrap();
    assert!((e3 - 3.0 * e).abs() <= 0.5 && u3 <= e3);
}

fn slope_strategy() -> impl Strategy<Value = Slope> {
    (-200i64..=200, 0i64..=200).prop_filter_map("0/0", |(p, q)| Slope::from_i64(p, q).ok())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn metric_axioms(a in slope_strategy(), b in slope_strategy(), c in slope_strategy()) {
        let (ab, bc, ac) = (distance(&a, &b), distance(&b, &c), distance(&a, &c));
        prop_assert_eq!(ab, distance(&b, &a));
        prop_assert!(ac <= ab + bc);
        prop_assert_eq!(ab == 0, a == b);
        let i = qmlab::int::to_f64(&intersection(&a, &b));
        prop_assert_eq!(ab <= 1, i <= 1.0);
        prop_assert_eq!(ab == 1, i == 1.0);
    }

    #[test]
    fn action_is_isometric(a in slope_strategy(), b in slope_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_sl2(&mut rng, 8);
        prop_assert_eq!(distance(&act(&m, &a), &act(&m, &b)), distance(&a, &b));
        prop_assert_eq!(intersection(&act(&m, &a), &act(&m, &b)), intersection(&a, &b));
    }
}
