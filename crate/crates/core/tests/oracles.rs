use bergman_core::atoms::{
    atom_project, build_lattice, make_atom_with_profile, projection_l1_norm, synthesis_ratio, synthesis_threshold,
    Atom, AtomBatch, AtomKind,
};
use bergman_core::holo::{generalized_norm, membership_check};
use bergman_core::{BallPoint, CVec, Complex64, HoloFun, QuadSpec};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[test]
fn membership_flags_on_six_case_grid() {
    let cases: [(usize, f64, f64, f64); 6] = [
        (1, 0.5, 2.0, 0.0),
        (1, 1.0, 2.0, 0.0),
        (1, 2.0, 2.0, 0.0),
        (1, 3.0, 1.5, 1.0),
        (2, 1.5, 2.0, 0.0),
        (2, 3.0, 2.0, 0.5),
    ];
    for (n, b, p, alpha) in cases {
        let dir = CVec::basis(n, 0, ONE);
        let r = membership_check(&dir, b, p, alpha, &QuadSpec::new(100_000, 21)).unwrap();
        assert_eq!(r.divergent, r.predicted_divergent, "n={n} b={b} p={p} alpha={alpha}: {:?}", r.growth);
    }
}

/// `int (1-|z|^2)^2 |z|^2 dv_{-2}` over the disc by a midpoint rule in polar coordinates.
fn disc_grid(f: impl Fn(f64) -> f64) -> f64 {
    let m = 4000;
    (0..m)
        .map(|i| {
            let r = (i as f64 + 0.5) / m as f64;
            2.0 * r * f(r) / m as f64
        })
        .sum()
}

#[test]
fn generalized_norm_matches_grid_oracle() {
    let f = HoloFun::monomial(1, ONE, &[1]).unwrap();
    let g = generalized_norm(&f, 2.0, -2.0, &QuadSpec::new(200_000, 5)).unwrap();
    let oracle = disc_grid(|r| (1.0 - r * r).powi(2) * r * r * (1.0 - r * r).powi(-2)).sqrt();
    assert!((oracle - 0.5f64.sqrt()).abs() < 1e-6);
    assert!((g.value - oracle).abs() <= 3.0 * g.stderr, "{g:?} vs {oracle}");
}

#[test]
fn atom_batch_axioms_and_projection_spread() {
    let batch = AtomBatch {
        count: 40,
        q: 2.0,
        alpha: 0.0,
        r_range: [0.3, 0.9],
        seed: 3,
    };
    let atoms = batch.generate(2, 1000).unwrap();
    let mut norms = Vec::new();
    for a in atoms.iter().filter(|a| a.is_atom()) {
        let report = a.check_axioms();
        assert!(report.holds(), "{report:?}");
        assert!(report.l1_norm <= 1.0 + 1e-12);
        norms.push(projection_l1_norm(a, &QuadSpec::new(1500, 8)).unwrap().value);
    }
    norms.sort_by(f64::total_cmp);
    let median = norms[norms.len() / 2];
    assert!(norms[norms.len() - 1] <= 5.0 * median);
}

#[test]
fn projection_of_constant_profile_and_exceptional_atom() {
    let zeta = CVec::basis(1, 0, ONE);
    let flat = make_atom_with_profile(zeta, 0.5, 2.0, 0.0, |_| 1.0, &QuadSpec::new(500, 1)).unwrap();
    assert_eq!(flat.kind, AtomKind::Degenerate);
    assert_eq!(projection_l1_norm(&flat, &QuadSpec::new(10, 1)).unwrap().value, 0.0);
    let one = Atom::exceptional(1, 2.0, 0.0).unwrap();
    for x in [0.0, 0.5, 0.99] {
        let z = BallPoint::from_real(&[x]).unwrap();
        assert_eq!(atom_project(&one, &z).unwrap(), ONE);
    }
}

#[test]
fn synthesis_scaling_is_exact() {
    let lattice = build_lattice(1, 1.0, 3, 8, 2).unwrap();
    let b = synthesis_threshold(1, 2.0, 0.0) + 1.0;
    let c: Vec<Complex64> = (0..lattice.len()).map(|k| Complex64::new(1.0, k as f64 * 0.3)).collect();
    let c2: Vec<Complex64> = c.iter().map(|x| x * 2.0).collect();
    let spec = QuadSpec::new(5000, 6);
    let f = bergman_core::atoms::cr_synthesize(&lattice.points, &c, b, 2.0, 0.0).unwrap();
    let g = bergman_core::atoms::cr_synthesize(&lattice.points, &c2, b, 2.0, 0.0).unwrap();
    let nf = bergman_core::holo::bergman_norm(&f, 2.0, 0.0, &spec).unwrap().value;
    let ng = bergman_core::holo::bergman_norm(&g, 2.0, 0.0, &spec).unwrap().value;
    assert!((ng - 2.0 * nf).abs() <= 1e-12 * ng);
    let r1 = synthesis_ratio(&lattice.points, &c, b, 2.0, 0.0, &spec).unwrap().value;
    let r2 = synthesis_ratio(&lattice.points, &c2, b, 2.0, 0.0, &spec).unwrap().value;
    assert!((r1 - r2).abs() <= 1e-12 * r1);
}
