use qmlab::braid::BraidWord;
use qmlab::cocycle::{braid_support_histogram, cocycle_check, connector_braid, extract_braid, TraceOptions};
use qmlab::dynamics::{random_map, Configuration, DiskMap, Primitive};
use qmlab::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sample(rng: &mut ChaCha8Rng, n: usize) -> Configuration {
    Configuration::sample(rng, n, 0.02, 0.05, 1000).unwrap().0
}

#[test]
fn cocycle_identity_on_random_triples() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let opts = TraceOptions::default();
    let mut checked = 0;
    let mut nontrivial = 0;
    while checked < 200 {
        let n = rng.gen_range(2..=3);
        let f = random_map(&mut rng, 3);
        let g = random_map(&mut rng, 3);
        let x = sample(&mut rng, n);
        let z = Configuration::base(n);
        match cocycle_check(&f, &g, &x, &z, &opts) {
            Ok(ok) => {
                assert!(ok, "cocycle failed for f={f:?} g={g:?} x={x:?}");
                let w = extract_braid(&DiskMap::compose(&g, &f), &x, &z, &opts).unwrap().word;
                if !w.equal(&BraidWord::identity(n)) {
                    nontrivial += 1;
                }
                checked += 1;
            }
            Err(Error::Degeneracy(_)) | Err(Error::Collision(..)) => {}
            Err(e) => panic!("{e}"),
        }
    }
    assert!(nontrivial > 50, "only {nontrivial} nontrivial braids");
}

#[test]
fn inverse_map_gives_trivial_braid() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let opts = TraceOptions::default();
    for _ in 0..50 {
        let g = random_map(&mut rng, 3);
        let x = sample(&mut rng, 3);
        let z = Configuration::base(3);
        let w = extract_braid(&DiskMap::compose(&g, &g.inverse()), &x, &z, &opts).unwrap().word;
        assert!(w.equal(&BraidWord::identity(3)), "{w}");
        assert!(cocycle_check(&DiskMap::identity(), &DiskMap::identity(), &x, &z, &opts).unwrap());
    }
}

#[test]
fn connectors_reverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let opts = TraceOptions::default();
    for _ in 0..100 {
        let a = sample(&mut rng, 3);
        let b = sample(&mut rng, 3);
        let ab = connector_braid(&a, &b, &opts).unwrap();
        let back = ab.concat(&ab.inverse()).unwrap();
        assert!(back.equal(&BraidWord::identity(3)));
        assert!(connector_braid(&a, &a, &opts).unwrap().is_empty());
    }
}

#[test]
fn stable_under_halving() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let coarse = TraceOptions::default();
    let fine = TraceOptions { dt_init: coarse.dt_init / 2.0, ..coarse };
    for _ in 0..100 {
        let f = random_map(&mut rng, 3);
        let x = sample(&mut rng, 3);
        let z = Configuration::base(3);
        let a = extract_braid(&f, &x, &z, &coarse).unwrap().word;
        let b = extract_braid(&f, &x, &z, &fine).unwrap().word;
        assert_eq!(a.writhe(), b.writhe());
        assert!(a.equal(&b));
    }
}

#[test]
fn fixed_base_point_gives_pure_braid() {
    let f = DiskMap::single(Primitive::RigidRotation { angle: std::f64::consts::TAU }).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..20 {
        let x = sample(&mut rng, 3);
        let w = extract_braid(&f, &x, &x, &TraceOptions::default()).unwrap().word;
        assert!(w.is_pure());
        // a full turn of all strands is the full twist, writhe n(n-1)
        assert_eq!(w.writhe(), 6);
    }
}

#[test]
fn histograms_have_small_stable_support() {
    let opts = TraceOptions::default();
    let id = braid_support_histogram(&DiskMap::identity(), 3, 200, 1, &opts).unwrap();
    assert_eq!(id.classes.len(), 1);
    assert_eq!(id.classes[0].count, 200);
    let twist = DiskMap::single(Primitive::AnnulusTwist { center: [0.1, 0.0], r_in: 0.2, r_out: 0.6, turns: 1.0 })
        .unwrap();
    let rot = DiskMap::single(Primitive::RigidRotation { angle: std::f64::consts::PI }).unwrap();
    for f in [twist, rot] {
        let small = braid_support_histogram(&f, 2, 1000, 2, &opts).unwrap();
        let large = braid_support_histogram(&f, 2, 2000, 3, &opts).unwrap();
        assert!(small.classes.len() <= 8, "{}", small.classes.len());
        assert!(large.classes.len() <= small.classes.len() + 2);
    }
}
