use proptest::prelude::*;
use qmlab::braid::BraidWord;
use qmlab::cocycle::{extract_powers, TraceOptions};
use qmlab::dynamics::*;
use qmlab::entropy::*;
use qmlab::farey::{distance, INFINITY};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn golden() -> f64 {
    ((3.0 + 5f64.sqrt()) / 2.0).ln()
}

fn random_b3(rng: &mut ChaCha8Rng, max_len: usize) -> BraidWord {
    let len = rng.gen_range(0..=max_len);
    let letters = (0..len).map(|_| [1, -1, 2, -2][rng.gen_range(0..4)]).collect();
    BraidWord::new(3, letters).unwrap()
}

#[test]
fn dynnikov_matches_sl2_on_random_words() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..50 {
        let w = random_b3(&mut rng, 12);
        let d = braid_entropy(&w, 40).unwrap().value;
        let s = braid_entropy_sl2(&w).unwrap().value;
        assert!((d - s).abs() <= 1e-2, "{:?}: dynnikov {d} sl2 {s}", w.letters);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn braid_entropy_power_law(letters in prop::collection::vec(prop::sample::select(vec![1, -1, 2, -2]), 1..10)) {
        let w = BraidWord::new(3, letters).unwrap();
        let h = braid_entropy_sl2(&w).unwrap().value;
        let h2 = braid_entropy_sl2(&w.power(2)).unwrap().value;
        prop_assert!((h2 - 2.0 * h).abs() < 1e-9);
        let d2 = braid_entropy(&w.power(2), 40).unwrap().value;
        prop_assert!((d2 - h2).abs() < 1e-2);
    }

    #[test]
    fn conjugation_invariance(
        letters in prop::collection::vec(prop::sample::select(vec![1, -1, 2, -2]), 1..8),
        conj in prop::collection::vec(prop::sample::select(vec![1, -1, 2, -2]), 0..5),
    ) {
        let w = BraidWord::new(3, letters).unwrap();
        let c = BraidWord::new(3, conj).unwrap();
        let v = c.concat(&w).unwrap().concat(&c.inverse()).unwrap();
        let a = braid_entropy(&w, 40).unwrap().value;
        let b = braid_entropy(&v, 40).unwrap().value;
        prop_assert!((a - b).abs() < 1e-2);
    }
}

#[test]
fn four_strand_reducible_and_pseudo_anosov() {
    // σ1σ2⁻¹ on the first three strands fixes the curve around them; the
    // seed lamination still sees the growth.
    let w = BraidWord::new(4, vec![1, -2]).unwrap();
    let e = braid_entropy(&w, 40).unwrap();
    assert!((e.value - golden()).abs() < 1e-2, "{}", e.value);
    assert_eq!(braid_entropy(&BraidWord::new(4, vec![1, 3, 3]).unwrap(), 40).unwrap().value, 0.0);
}

#[test]
fn curve_growth_power_law_on_egg4() {
    let f = egg_beater(4.0, &EggBeaterGeometry::default()).unwrap();
    let c = PolyCurve::circle(Point::new(0.0, 0.0), 0.5, 64).unwrap();
    let h1 = curve_growth(&f, &c, 10, 1e-3, 400_000).unwrap();
    let h2 = curve_growth(&f.power(2), &c, 10, 1e-3, 400_000).unwrap();
    assert!(!h1.complete && h1.value > 1.0);
    let r = h2.value / h1.value;
    assert!((r - 2.0).abs() <= 0.2, "ratio {r}");
}

#[test]
fn egg8_estimators_against_braid_bounds() {
    let f = egg_beater(8.0, &EggBeaterGeometry::default()).unwrap();
    let c = PolyCurve::circle(Point::new(0.0, 0.0), 0.5, 64).unwrap();
    let h_curve = curve_growth(&f, &c, 6, 1e-3, 200_000).unwrap().value;
    let opts = BowenOptions { eps_list: vec![0.2, 0.1], p_max: 4, grid_density: 25, seed: 3 };
    let h_bowen = bowen_entropy(&f, &opts).unwrap();
    assert!(h_bowen.value > 0.0);
    assert!(matches!(h_bowen.error, ErrorBar::BiasedLow { .. }));

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let z = Configuration::base(3);
    let mut best = 0.0f64;
    for _ in 0..100 {
        let (x, _) = Configuration::sample(&mut rng, 3, 1e-3, 0.05, 1000).unwrap();
        let Ok(t) = extract_powers(&f, &x, &z, &[1, 4], &TraceOptions::default()) else { continue };
        // Per-iterate braid entropy of the sampled orbit segment.
        let h4 = braid_entropy(&t[1].word, 40).unwrap().value / 4.0;
        best = best.max(h4);
    }
    assert!(best > 0.0);
    assert!(h_curve >= best - 0.1, "curve {h_curve} braid {best}");
}

#[test]
fn farey_distance_bounded_by_length_growth() {
    let f = egg_beater(2.0, &EggBeaterGeometry::default()).unwrap();
    let c = PolyCurve::circle(Point::new(0.0, 0.0), 0.5, 64).unwrap();
    let h = curve_growth(&f, &c, 8, 1e-3, 200_000).unwrap().value;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let z = Configuration::base(3);
    let ps = [8u32, 16, 32];
    let mut excess = vec![Vec::new(); ps.len()];
    for _ in 0..200 {
        let (x, _) = Configuration::sample(&mut rng, 3, 1e-3, 0.05, 1000).unwrap();
        let Ok(ts) = extract_powers(&f, &x, &z, &ps, &TraceOptions::default()) else { continue };
        for (k, t) in ts.iter().enumerate() {
            let m = t.word.sl2_image().unwrap();
            let d = distance(&INFINITY, &qmlab::farey::act(&m, &INFINITY)) as f64;
            excess[k].push(d - 2.0 * h * ps[k] as f64);
        }
    }
    // B̂ fitted at the smallest power must cover the larger ones.
    let b_hat = excess[0].iter().cloned().fold(f64::MIN, f64::max).max(0.0);
    for (k, e) in excess.iter().enumerate() {
        let worst = e.iter().cloned().fold(f64::MIN, f64::max);
        assert!(worst <= b_hat, "p = {}: {worst} > {b_hat}", ps[k]);
    }
}

#[test]
fn bowen_counts_grow_as_eps_shrinks() {
    let f = egg_beater(2.0, &EggBeaterGeometry::default()).unwrap();
    let opts = BowenOptions { eps_list: vec![0.3, 0.2, 0.1], p_max: 4, grid_density: 20, seed: 9 };
    let e = bowen_entropy(&f, &opts).unwrap();
    for p in 0..=4 {
        let counts: Vec<f64> = e.series.iter().filter(|r| r.p == p).map(|r| r.count).collect();
        assert!(counts.windows(2).all(|w| w[1] >= 0.95 * w[0]), "p = {p}: {counts:?}");
    }
    let denser = bowen_entropy(&f, &BowenOptions { grid_density: 30, ..opts.clone() }).unwrap();
    let c_coarse: f64 = e.series.iter().map(|r| r.count).sum();
    let c_dense: f64 = denser.series.iter().map(|r| r.count).sum();
    assert!(c_dense >= c_coarse);
}
