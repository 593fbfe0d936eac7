mod common;

use common::random_slope;
use qmlab::braid::IntMatrix2;
use qmlab::farey::{act, distance, paths_within, translation_length, Slope, INFINITY};
use qmlab::quasimorphism::{
    c_omega, copies_count, defect_estimate, psi_omega, random_psl2_word, OmegaSpec, QmSpec,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Exhaustive minimum of |σ| − W·|σ|_ω over corridor walks.
fn brute_c_omega(a: &Slope, b: &Slope, spec: &OmegaSpec, r: u32) -> f64 {
    let d = distance(a, b) as f64;
    let l = spec.len() as f64;
    let w = spec.window() as f64;
    let l_max = (d / (1.0 - w / l)).ceil() as usize;
    let mut best = f64::INFINITY;
    for p in paths_within(a, b, l_max, r, 5_000_000).unwrap() {
        let p = p.unwrap();
        let cost = p.len() as f64 - w * copies_count(&p, spec.path()) as f64;
        best = best.min(cost);
    }
    d - best
}

fn chiral() -> OmegaSpec {
    OmegaSpec::axis_segment(&IntMatrix2::new(3, 2, 1, 1), &INFINITY, 2, 1).unwrap()
}

#[test]
fn dp_matches_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let specs = [
        chiral(),
        chiral().inverse(),
        OmegaSpec::axis_segment(&IntMatrix2::new(2, 1, 1, 1), &INFINITY, 2, 1).unwrap(),
        OmegaSpec::from_slopes(&["1/0", "0/1", "1/2", "1/3"], 1).unwrap(),
        OmegaSpec::from_slopes(&["1/0", "0/1", "1/2", "1/3"], 2).unwrap(),
    ];
    let mut nonzero = 0;
    let mut checked = 0;
    for trial in 0..120 {
        let m = random_psl2_word(&mut rng, 6);
        let a = if trial % 3 == 0 { INFINITY } else { random_slope(&mut rng, 4) };
        let b = act(&m, &a);
        if distance(&a, &b) > 3 {
            continue;
        }
        checked += 1;
        for spec in &specs {
            for r in 0..=2 {
                let dp = c_omega(&a, &b, spec, r).unwrap();
                let bf = brute_c_omega(&a, &b, spec, r);
                assert_eq!(dp, bf, "{a} -> {b} R={r}");
                if dp > 0.0 {
                    nonzero += 1;
                }
            }
        }
    }
    assert!(nonzero > 0 && checked >= 40, "nonzero={nonzero} checked={checked}");
}

#[test]
fn bounds_and_monotonicity() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let spec = chiral();
    for _ in 0..200 {
        let m = random_psl2_word(&mut rng, 10);
        let b = act(&m, &INFINITY);
        let d = distance(&INFINITY, &b) as f64;
        let mut prev = -1.0;
        for r in 0..=3 {
            let c = c_omega(&INFINITY, &b, &spec, r).unwrap();
            assert!((0.0..=d).contains(&c));
            assert!(c >= prev);
            prev = c;
        }
    }
}

#[test]
fn spec_example_axis_segment_positive() {
    let m = IntMatrix2::new(2, 1, 1, 1);
    let spec = OmegaSpec::axis_segment(&m, &INFINITY, 2, 1).unwrap();
    assert_eq!(spec.path().vertices.iter().map(|s| s.to_string()).collect::<Vec<_>>(), ["1/0", "2/1", "5/3"]);
    let beta = act(&m.pow(4), &INFINITY);
    assert!(brute_c_omega(&INFINITY, &beta, &spec, 2) > 0.0);
    // adjacent endpoints, |ω| = 3
    let s3 = OmegaSpec::from_slopes(&["1/0", "0/1", "1/2", "1/3"], 1).unwrap();
    assert_eq!(c_omega(&INFINITY, &"5/1".parse().unwrap(), &s3, 2).unwrap(), 0.0);
}

#[test]
fn parabolic_values_stay_bounded() {
    let spec = chiral();
    let p = IntMatrix2::new(1, 1, 0, 1);
    let q = IntMatrix2::new(1, 0, 1, 1);
    for k in 1..=64 {
        for g in [&p, &q] {
            let v = psi_omega(&g.pow(k), &spec, &INFINITY, 2).unwrap();
            assert!(v.abs() <= 2.0, "k={k} psi={v}");
        }
    }
}

#[test]
fn homogenized_laws() {
    let qm = QmSpec::single(chiral());
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let defect = defect_estimate(|m: &IntMatrix2| qm.eval(m), |r| random_psl2_word(r, 8), 400, 1).unwrap();
    assert!(defect.is_finite() && defect > 0.0);
    let m = IntMatrix2::new(3, 2, 1, 1);
    let h = qm.eval_homogenized(&m, 16, defect).unwrap();
    assert!(h.value.abs() > 0.1);
    let hinv = qm.eval_homogenized(&m.inverse(), 16, defect).unwrap();
    assert!((h.value + hinv.value).abs() <= h.error + hinv.error);
    for k in 2..=4u32 {
        let hk = qm.eval_homogenized(&m.pow(k as i64), 16, defect).unwrap();
        assert!((hk.value - k as f64 * h.value).abs() <= hk.error + k as f64 * h.error + 1e-9);
    }
    // conjugacy invariance
    for _ in 0..20 {
        let g = random_psl2_word(&mut rng, 6);
        let c = m.conjugate_by(&g);
        let hc = qm.eval_homogenized(&c, 16, defect).unwrap();
        assert!((hc.value - h.value).abs() <= 2.0 * h.error + 1e-9);
    }
    let golden = IntMatrix2::new(2, 1, 1, 1);
    let (_, up) = translation_length(&m, &INFINITY, 20).unwrap();
    assert!(h.value.abs() <= qm.coefficient_norm() * up + h.error);
    // [[2,1],[1,1]] is conjugate to its inverse, so every homogeneous qm vanishes on it
    assert!(qm.eval_homogenized(&golden, 16, defect).unwrap().value.abs() <= h.error);
}
