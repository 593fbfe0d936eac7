use proptest::prelude::*;
use qmlab::dynamics::{
    egg_beater, DiskMap, EggBeaterGeometry, Point, Primitive, RadialProfile, RigidMotion, ShearProfile, Step,
};

fn center_and_radius() -> impl Strategy<Value = ([f64; 2], f64, f64)> {
    (0.0..0.5f64, 0.0..std::f64::consts::TAU, 0.0..0.2f64, 0.1..0.3f64).prop_map(|(r, a, r_in, w)| {
        let r_out = (r_in + w).min(0.94 - r).max(r_in + 0.01);
        ([r * a.cos(), r * a.sin()], r_in, r_out)
    })
}

fn primitive() -> impl Strategy<Value = Primitive> {
    prop_oneof![
        (center_and_radius(), -2.0..2.0f64)
            .prop_map(|((center, r_in, r_out), turns)| Primitive::AnnulusTwist { center, r_in, r_out, turns }),
        (center_and_radius(), -2.0..2.0f64)
            .prop_map(|((center, r_in, r_out), time)| Primitive::HamiltonianPush { center, r_in, r_out, time }),
        (prop::bool::ANY, -1.5..1.5f64, 0.5..0.95f64).prop_map(|(b, time, radius)| Primitive::RadialFlow {
            profile: if b { RadialProfile::Bump } else { RadialProfile::Smoothstep },
            time,
            radius
        }),
        (0.0..3.2f64, -0.2..0.2f64, 0.4..0.7f64, 0.2..0.4f64, 0.0..0.5f64, -4.0..4.0f64, prop::bool::ANY).prop_map(
            |(axis, offset, half_length, half_width, inner, strength, twist)| Primitive::StripShear {
                axis,
                offset,
                half_length,
                half_width,
                inner,
                strength,
                profile: if twist { ShearProfile::Twist } else { ShearProfile::Push },
            }
        ),
        (-7.0..7.0f64).prop_map(|angle| Primitive::RigidRotation { angle }),
    ]
}

fn interior_point(r: f64) -> impl Strategy<Value = Point> {
    (0.0..1.0f64, 0.0..std::f64::consts::TAU).prop_map(move |(u, a)| {
        let rho = r * u.sqrt();
        Point::new(rho * a.cos(), rho * a.sin())
    })
}

fn disk_map(max: usize) -> impl Strategy<Value = DiskMap> {
    prop::collection::vec(primitive(), 0..=max)
        .prop_map(|ps| DiskMap::new(ps.into_iter().map(Step::new).collect()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn area_preserved(prim in primitive(), p in interior_point(0.9)) {
        let m = DiskMap::single(prim).unwrap();
        let j = m.jacobian_det(&p, 1e-5).unwrap();
        prop_assert!((j - 1.0).abs() < 1e-5, "{j}");
    }

    #[test]
    fn isotopy_endpoints(m in disk_map(3), p in interior_point(1.0)) {
        prop_assert_eq!(m.eval_isotopy(&p, 0.0).unwrap(), p);
        prop_assert_eq!(m.eval_isotopy(&p, 1.0).unwrap(), m.eval(&p).unwrap());
    }

    #[test]
    fn identity_near_boundary(prim in primitive(), a in 0.0..std::f64::consts::TAU, u in 0.0..1.0f64) {
        prop_assume!(!matches!(prim, Primitive::RigidRotation { .. }));
        let m = DiskMap::single(prim).unwrap();
        let r = 1.0 - m.margin + u * m.margin;
        let p = Point::new(r * a.cos(), r * a.sin());
        prop_assert_eq!(m.eval(&p).unwrap(), p);
    }

    #[test]
    fn group_laws(m in disk_map(2), j in -2i64..3, k in -2i64..3, p in interior_point(1.0)) {
        let lhs = m.power(j + k).eval(&p).unwrap();
        let rhs = DiskMap::compose(&m.power(j), &m.power(k)).eval(&p).unwrap();
        prop_assert!(lhs.dist(&rhs) < 1e-12);
    }

    #[test]
    fn flows_are_autonomous(prim in primitive(), s in -1.0..1.0f64, t in -1.0..1.0f64, p in interior_point(1.0)) {
        let a = DiskMap::new(vec![Step::new(prim.scaled(s)), Step::new(prim.scaled(t))]).unwrap();
        let b = DiskMap::new(vec![Step::new(prim.scaled(t)), Step::new(prim.scaled(s))]).unwrap();
        let c = DiskMap::single(prim.scaled(s + t)).unwrap();
        let (pa, pb, pc) = (a.eval(&p).unwrap(), b.eval(&p).unwrap(), c.eval(&p).unwrap());
        prop_assert!(pa.dist(&pb) < 1e-12 && pa.dist(&pc) < 1e-12);
    }

    #[test]
    fn rigid_conjugation_is_conjugation(m in disk_map(2), a in -3.0..3.0f64, p in interior_point(0.6)) {
        let h = RigidMotion { angle: a, shift: [0.0, 0.0] };
        let g = m.conjugated(&h);
        let expect = h.apply(&m.eval(&h.apply_inverse(&p)).unwrap());
        prop_assert!(g.eval(&p).unwrap().dist(&expect) < 1e-12);
    }
}

#[test]
fn egg_beater_examples() {
    let g = EggBeaterGeometry::default();
    let zero = egg_beater(0.0, &g).unwrap();
    let f = egg_beater(8.0, &g).unwrap();
    let back = DiskMap::compose(&f, &f.inverse());
    for i in 0..100 {
        let a = i as f64 * 0.7;
        let r = 0.93 * ((i * 37 % 100) as f64 / 100.0).sqrt();
        let p = Point::new(r * a.cos(), r * a.sin());
        assert_eq!(zero.eval(&p).unwrap(), p);
        assert!(back.eval(&p).unwrap().dist(&p) < 1e-12);
        let j = f.jacobian_det(&p, 1e-5).unwrap();
        assert!((j - 1.0).abs() < 1e-5, "{j} at {p:?}");
    }
    assert_eq!(DiskMap::identity().jacobian_det(&Point::new(0.2, 0.1), 1e-5).unwrap(), 1.0);
}
