use flatc3::algebra::{conj, inner_c, inner_r, mul};
use flatc3::geometry::{self, Element, Geometry, Kind};
use flatc3::morphism::{self, act, AutoPair};
use flatc3::par::Execution;
use flatc3::suite::{run_suite_with, SuiteConfig, SuiteName};
use flatc3::{homotopy, io, rng, AlgElement, Scalar, Variant};
use proptest::prelude::*;

fn octonion() -> impl Strategy<Value = AlgElement> {
    prop::array::uniform8(-3.0f64..3.0).prop_map(AlgElement::from_coords)
}

fn variant() -> impl Strategy<Value = Variant> {
    prop_oneof![Just(Variant::RH), Just(Variant::CO)]
}

fn close(a: &AlgElement, b: &AlgElement, scale: f64) -> bool {
    a.dist(b) <= 1e-12 * (1.0 + scale)
}

proptest! {
    #[test]
    fn norm_is_multiplicative(x in octonion(), y in octonion()) {
        let n = x.norm() * y.norm();
        prop_assert!((mul(&x, &y).norm() - n).abs() <= 1e-12 * (1.0 + n));
    }

    #[test]
    fn conjugation_reverses_products(x in octonion(), y in octonion()) {
        let s = x.norm() * y.norm();
        prop_assert!(close(&conj(&mul(&x, &y)), &mul(&conj(&y), &conj(&x)), s));
    }

    #[test]
    fn alternative_and_moufang_laws(x in octonion(), y in octonion(), z in octonion()) {
        let s = x.norm() * x.norm() * y.norm();
        prop_assert!(close(&mul(&x, &mul(&x, &y)), &mul(&mul(&x, &x), &y), s));
        prop_assert!(close(&mul(&mul(&y, &x), &x), &mul(&y, &mul(&x, &x)), s));
        let t = z.norm() * z.norm() * x.norm() * y.norm();
        prop_assert!(close(&mul(&mul(&z, &mul(&x, &z)), &y), &mul(&z, &mul(&x, &mul(&z, &y))), t));
    }

    #[test]
    fn complex_inner_product_is_hermitian(x in octonion(), y in octonion(), re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let lam = Scalar::new(re, im);
        let s = x.norm() * y.norm();
        prop_assert!((inner_c(&x, &y) - inner_c(&y, &x).conj()).norm() <= 1e-12 * (1.0 + s));
        prop_assert!((inner_c(&x, &y.mul_complex_right(lam)) - inner_c(&x, &y) * lam).norm() <= 1e-12 * (1.0 + s * lam.norm()));
        prop_assert!((inner_c(&x, &y).re - inner_r(&x, &y)).abs() <= 1e-12 * (1.0 + s));
        prop_assert!((inner_r(&x, &x) - x.norm_sqr()).abs() <= 1e-12 * (1.0 + x.norm_sqr()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn automorphisms_preserve_incidence(v in variant(), seed in any::<u64>()) {
        let geo = Geometry::new(v);
        let mut r = rng::seeded(seed);
        let g = AutoPair::sample(v, &mut r);
        let p = geometry::sample_point(v, &mut r);
        let l = geometry::sample_line_through(&p, &mut r);
        let xi = geometry::sample_plane_on(&l, &mut r);
        let other = geometry::sample_line(v, &mut r);
        let elems: Vec<Element> = vec![p.into(), l.clone().into(), xi.into(), other.clone().into()];
        let images: Vec<Element> = elems.iter().map(|e| act(&g, e).unwrap()).collect();
        for (i, j) in [(0, 1), (1, 2), (0, 2), (0, 3), (2, 3)] {
            prop_assert_eq!(geo.incident(&elems[i], &elems[j]).unwrap(), geo.incident(&images[i], &images[j]).unwrap());
        }
        prop_assert!(geo.incident(&images[0], &images[1]).unwrap());
        prop_assert!(geo.incident(&images[1], &images[2]).unwrap());
        let (gl, go) = (images[1].as_line().unwrap(), images[3].as_line().unwrap());
        prop_assert_eq!(geo.coplanar(&l, &other), geo.coplanar(gl, go));
    }

    #[test]
    fn line_invariant_symmetries(v in variant(), seed in any::<u64>(), phase in 0.0f64..std::f64::consts::TAU) {
        let geo = Geometry::new(v);
        let mut r = rng::seeded(seed);
        let alpha = homotopy::sample_primitive(v, &mut r);
        let ell = homotopy::line_invariant(&geo, &alpha.l, &alpha.m).unwrap();
        prop_assert!(ell.norm() <= 1.0 + 1e-12);
        let back = homotopy::line_invariant(&geo, &alpha.m, &alpha.l).unwrap();
        prop_assert!((back - ell.conj()).norm() < 1e-12);
        let t = match v {
            Variant::RH => Scalar::new(if phase < std::f64::consts::PI { 1.0 } else { -1.0 }, 0.0),
            Variant::CO => Scalar::new(phase.cos(), phase.sin()),
        };
        let (a, u) = geo.rescale_line(&alpha.l, t);
        let l2 = geometry::Line::new(v, &a, &u).unwrap();
        prop_assert!((homotopy::line_invariant(&geo, &l2, &alpha.m).unwrap() - ell).norm() < 1e-12);
        let g = AutoPair::sample(v, &mut r);
        let gl = act(&g, &alpha.l.clone().into()).unwrap();
        let gm = act(&g, &alpha.m.clone().into()).unwrap();
        let moved = homotopy::line_invariant(&geo, gl.as_line().unwrap(), gm.as_line().unwrap()).unwrap();
        prop_assert!((moved - ell).norm() < 1e-9);
    }

    #[test]
    fn constructed_morphisms_are_sharp(v in variant(), seed in any::<u64>()) {
        let mut r = rng::seeded(seed);
        let tag = v.algebra();
        let (a1, a2) = morphism::random_orthonormal_pair(v, tag, &mut r);
        let (b1, b2) = morphism::random_orthonormal_pair(v, flatc3::AlgebraTag::O, &mut r);
        let phi = morphism::construct_from_pairs(v, &a1, &a2, &b1, &b2).unwrap();
        prop_assert!(morphism::is_sharp(&phi, 4, 1e-9, &mut r).passed);
        prop_assert!(phi.apply(&a1).unwrap().dist(&b1) < 1e-12);
        let g = AutoPair::sample(v, &mut r);
        let id = g.compose(&AutoPair::identity(v)).unwrap();
        prop_assert!(id.alpha.approx_eq(&g.alpha, 1e-12) && id.omega.approx_eq(&g.omega, 1e-12));
    }

    #[test]
    fn elements_survive_json(v in variant(), seed in any::<u64>()) {
        let geo = Geometry::new(v);
        let mut r = rng::seeded(seed);
        for kind in [Kind::Point, Kind::Line, Kind::Plane] {
            let e = geometry::sample(kind, v, &mut r);
            let text = io::to_string(&io::element_to_json(&e));
            let back = io::element_from_json(&serde_json::from_str(&text).unwrap()).unwrap();
            prop_assert!(geo.elements_eq(&e, &back));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn moves_are_undone_by_their_inverses(v in variant(), seed in any::<u64>()) {
        let geo = Geometry::new(v);
        let mut r = rng::seeded(seed);
        let walk = homotopy::sample_closed_walk(v, 3, &mut r);
        let red = homotopy::reduce_to_primitive(&geo, &walk).unwrap();
        let mut path = red.trace.start.clone();
        for m in &red.trace.moves {
            let before = path.clone();
            m.apply(&geo, &mut path).unwrap();
            let mut undone = path.clone();
            m.inverse().apply(&geo, &mut undone).unwrap();
            prop_assert!(homotopy::paths_eq(&geo, &undone, &before));
        }
        prop_assert!(homotopy::paths_eq(&geo, &path, &red.primitive.to_path()));
    }

    #[test]
    fn shifting_back_and_forth_is_the_identity(v in variant(), seed in any::<u64>()) {
        let geo = Geometry::new(v);
        let mut r = rng::seeded(seed);
        let alpha = homotopy::sample_primitive(v, &mut r);
        let n = homotopy::admissible_line_sample(&geo, &alpha, &mut r).unwrap();
        let target = homotopy::shift_target(&geo, &alpha, &n, &mut r).unwrap();
        let (beta, _, _) = homotopy::shift(&geo, &alpha, &n, &target).unwrap();
        let (back, _, _) = homotopy::shift(&geo, &beta, &n, &alpha.q).unwrap();
        prop_assert!(homotopy::paths_eq(&geo, &back.to_path(), &alpha.to_path()));
    }

    #[test]
    fn reports_do_not_depend_on_execution(seed in any::<u64>(), suite in 0usize..7) {
        let name = SuiteName::ALL[suite];
        for v in [Variant::RH, Variant::CO] {
            let cfg = SuiteConfig::new(name, v, 8, seed, 1e-8);
            let a = run_suite_with(&cfg, Execution::Sequential).unwrap();
            let b = run_suite_with(&cfg, Execution::Parallel).unwrap();
            prop_assert_eq!(a.to_json_string(), b.to_json_string());
        }
    }
}
