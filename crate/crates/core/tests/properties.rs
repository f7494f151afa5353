use bergman_core::atoms::cr_synthesize;
use bergman_core::geometry::{bergman_metric, pseudo_hyperbolic_defect, pseudo_metric_rho};
use bergman_core::holo::{bergman_norm, invariant_gradient};
use bergman_core::{Automorphism, BallPoint, CVec, Complex64, HoloFun, QuadSpec};
use proptest::prelude::*;

fn point(n: usize, max_radius: f64) -> impl Strategy<Value = BallPoint> {
    (prop::collection::vec(-1.0f64..1.0, 2 * n), 0.0f64..max_radius).prop_map(move |(raw, r)| {
        let v: Vec<Complex64> = raw.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
        let cv = CVec::from_slice(&v).unwrap();
        let norm = cv.norm();
        let cv = if norm > 0.0 { cv.scale(r / norm) } else { cv };
        BallPoint::from_cvec(cv).unwrap()
    })
}

fn pair(max_radius: f64) -> impl Strategy<Value = (BallPoint, BallPoint)> {
    (1usize..=3).prop_flat_map(move |n| (point(n, max_radius), point(n, max_radius)))
}

fn triple(max_radius: f64) -> impl Strategy<Value = (BallPoint, BallPoint, BallPoint)> {
    (1usize..=3).prop_flat_map(move |n| (point(n, max_radius), point(n, max_radius), point(n, max_radius)))
}

fn coeff() -> impl Strategy<Value = Complex64> {
    (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b)| Complex64::new(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn automorphism_is_an_involution((z, w) in pair(0.99)) {
        let phi = Automorphism::new(z);
        let back = phi.apply(&phi.apply(&w));
        prop_assert!((*back.coords() - *w.coords()).norm() <= 1e-10);
    }

    #[test]
    fn fundamental_identity((z, w) in pair(0.99)) {
        let phi = Automorphism::new(z);
        let lhs = 1.0 - phi.apply_vec(w.coords()).norm_sqr();
        let rhs = z.defect() * w.defect() / (Complex64::new(1.0, 0.0) - z.inner(w.coords())).norm_sqr();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1e-300) + 1e-15);
    }

    #[test]
    fn bergman_metric_is_symmetric((z, w) in pair(0.99)) {
        prop_assert_eq!(bergman_metric(&z, &w), bergman_metric(&w, &z));
        prop_assert_eq!(pseudo_hyperbolic_defect(&z, &w), pseudo_hyperbolic_defect(&w, &z));
    }

    #[test]
    fn bergman_metric_triangle((x, y, z) in triple(0.99)) {
        let lhs = bergman_metric(&x, &z);
        let rhs = bergman_metric(&x, &y) + bergman_metric(&y, &z);
        prop_assert!(lhs <= rhs + 1e-12);
    }

    #[test]
    fn bergman_metric_is_automorphism_invariant((a, z, w) in triple(0.9)) {
        let phi = Automorphism::new(a);
        let before = bergman_metric(&z, &w);
        let after = bergman_metric(&phi.apply(&z), &phi.apply(&w));
        prop_assert!((before - after).abs() <= 1e-9 * (1.0 + before));
    }

    #[test]
    fn rho_is_symmetric((z, w) in pair(0.99)) {
        prop_assert_eq!(pseudo_metric_rho(z.coords(), w.coords()), pseudo_metric_rho(w.coords(), z.coords()));
    }

    #[test]
    fn symbolic_partials_match_differences((a, z) in pair(0.7), b in 0.5f64..4.0, c in coeff()) {
        let f = HoloFun::product(&a, b, 1, c).unwrap();
        let h = 1e-5;
        for k in 0..z.dim() {
            let dk = f.partial(k).unwrap().evaluate(&z);
            let step = CVec::basis(z.dim(), k, Complex64::new(h, 0.0));
            let fd = (f.eval_vec(&(*z.coords() + step)) - f.eval_vec(&(*z.coords() - step))) / (2.0 * h);
            prop_assert!((dk - fd).norm() <= 1e-6 * (1.0 + dk.norm()), "{dk} vs {fd}");
        }
    }

    #[test]
    fn radial_derivative_closure((a, z) in pair(0.7), b in 0.5f64..4.0, c in coeff()) {
        let f = HoloFun::kernel_power(&a, b, c).unwrap();
        let rf = f.radial_derivative(1).unwrap();
        let mut direct = Complex64::new(0.0, 0.0);
        for k in 0..z.dim() {
            direct += z.coords()[k] * f.partial(k).unwrap().evaluate(&z);
        }
        prop_assert!((rf.evaluate(&z) - direct).norm() <= 1e-10 * (1.0 + direct.norm()));
        let r2 = f.radial_derivative(2).unwrap();
        prop_assert_eq!(r2, rf.radial_derivative(1).unwrap());
    }

    #[test]
    fn invariant_gradient_exact_vs_numeric((a, z) in pair(0.6), b in 0.5f64..3.0) {
        let f = HoloFun::kernel_power(&a, b, Complex64::new(1.0, 0.0)).unwrap();
        let exact = f.invariant_gradient_norm(&z);
        let numeric = invariant_gradient(&f, &z, 1e-3).unwrap().norm();
        prop_assert!((exact - numeric).abs() <= 1e-6 * (1.0 + exact), "{exact} vs {numeric}");
    }

    #[test]
    fn synthesis_is_linear(
        (a1, a2) in pair(0.9),
        c1 in coeff(), c2 in coeff(), d1 in coeff(), d2 in coeff(),
        s in coeff(),
        z in Just(()).prop_flat_map(|_| 0.0f64..0.9),
    ) {
        let n = a1.dim();
        let pts = [a1, a2];
        let b = n as f64 + 2.5;
        let f = cr_synthesize(&pts, &[c1, c2], b, 2.0, 0.0).unwrap();
        let g = cr_synthesize(&pts, &[d1, d2], b, 2.0, 0.0).unwrap();
        let h = cr_synthesize(&pts, &[c1 * s + d1, c2 * s + d2], b, 2.0, 0.0).unwrap();
        let x = BallPoint::from_cvec(CVec::basis(n, 0, Complex64::new(z, 0.0))).unwrap();
        let expect = f.evaluate(&x) * s + g.evaluate(&x);
        prop_assert!((h.evaluate(&x) - expect).norm() <= 1e-9 * (1.0 + expect.norm()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn norm_homogeneity(a in point(2, 0.95), b in 1.0f64..3.0, c in coeff(), p in 1.0f64..4.0) {
        let f = HoloFun::kernel_power(&a, b, Complex64::new(1.0, 0.0)).unwrap();
        let spec = QuadSpec::new(2000, 17);
        let base = bergman_norm(&f, p, 0.0, &spec).unwrap().value;
        let scaled = bergman_norm(&f.scale(c), p, 0.0, &spec).unwrap().value;
        prop_assert!((scaled - c.norm() * base).abs() <= 1e-10 * (1.0 + scaled));
    }
}
