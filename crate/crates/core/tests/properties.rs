mod common;

use dipolekit::periodic::{
    image_shell_increments, xi_permanent_images, xi_permanent_modesum, ImageSumOptions,
    ModeSumOptions,
};
use dipolekit::quadrature::j12_angular_quadrature;
use dipolekit::{
    angular_factor, classical_coupling, polarization_pair, spectral_density, transverse_factor,
    xi_permanent, xi_transition, Box3, Dipole, DipoleKind, Geometry, Quadrature, Transition,
    Vector3,
};
use proptest::prelude::*;

fn vec3(range: f64) -> impl Strategy<Value = Vector3> {
    (-range..range, -range..range, -range..range).prop_map(|(x, y, z)| Vector3::new(x, y, z))
}

fn unit3() -> impl Strategy<Value = Vector3> {
    vec3(1.0)
        .prop_filter("not too short", |v| v.norm() > 1e-3)
        .prop_map(|v| v.normalized().unwrap())
}

/// Rodrigues rotation about `axis` by `angle`.
fn rotate(v: Vector3, axis: Vector3, angle: f64) -> Vector3 {
    let (s, c) = angle.sin_cos();
    v * c + axis.cross(v) * s + axis * (axis.dot(v) * (1.0 - c))
}

fn dip(m: Vector3, kind: DipoleKind) -> Dipole {
    Dipole::new(m, kind).unwrap()
}

proptest! {
    #[test]
    fn contractions_are_bilinear(m1 in vec3(2.0), m2 in vec3(2.0), e in unit3(), a in -5.0..5.0_f64) {
        let base = angular_factor(m1, m2, e).unwrap();
        let scaled = angular_factor(m1 * a, m2, e).unwrap();
        prop_assert!((scaled - a * base).abs() <= 1e-13 * (1.0 + base.abs() * a.abs()));
        let tb = transverse_factor(m1, m2, e).unwrap();
        let ts = transverse_factor(m1, m2 * a, e).unwrap();
        prop_assert!((ts - a * tb).abs() <= 1e-13 * (1.0 + tb.abs() * a.abs()));
    }

    #[test]
    fn angular_factor_is_rotation_invariant(
        m1 in vec3(2.0), m2 in vec3(2.0), e in unit3(), axis in unit3(), angle in 0.0..std::f64::consts::TAU,
    ) {
        let before = angular_factor(m1, m2, e).unwrap();
        let er = rotate(e, axis, angle).normalized().unwrap();
        let after = angular_factor(rotate(m1, axis, angle), rotate(m2, axis, angle), er).unwrap();
        prop_assert!((before - after).abs() <= 1e-12 * (1.0 + m1.norm() * m2.norm()));
    }

    #[test]
    fn transverse_identity(m1 in vec3(2.0), m2 in vec3(2.0), e in unit3()) {
        let lhs = transverse_factor(m1, m2, e).unwrap();
        let rhs = angular_factor(m1, m2, e).unwrap() + 2.0 * m1.dot(e) * m2.dot(e);
        prop_assert!((lhs - rhs).abs() <= 1e-14 * (1.0 + 4.0 * m1.norm() * m2.norm()));
    }

    #[test]
    fn transverse_equals_polarisation_sum(m1 in vec3(1.0), m2 in vec3(1.0), e in unit3()) {
        let [p1, p2] = polarization_pair(e).unwrap();
        let explicit: f64 = [p1, p2]
            .iter()
            .map(|&p| {
                let u = e.cross(p);
                m1.dot(u) * m2.dot(u)
            })
            .sum();
        prop_assert!((transverse_factor(m1, m2, e).unwrap() - explicit).abs() <= 1e-14);
    }

    #[test]
    fn permanent_coupling_is_classical(m1 in vec3(3.0), m2 in vec3(3.0), r in vec3(5.0)) {
        prop_assume!(r.norm() > 1e-3);
        let g = Geometry::from_separation(r).unwrap();
        let a = dip(m1, DipoleKind::PermanentE);
        let b = dip(m2, DipoleKind::PermanentG);
        prop_assert_eq!(xi_permanent(&a, &b, &g).unwrap(), classical_coupling(&a, &b, &g));
    }

    #[test]
    fn spectral_density_odd_and_symmetric(
        m1 in vec3(2.0), m2 in vec3(2.0), r in vec3(3.0), w in 0.0..30.0_f64,
    ) {
        prop_assume!(r.norm() > 1e-2);
        let g = Geometry::from_separation(r).unwrap();
        let a = dip(m1, DipoleKind::Transition);
        let b = dip(m2, DipoleKind::Transition);
        let j = spectral_density(w, &a, &b, &g).value;
        prop_assert_eq!(spectral_density(-w, &a, &b, &g).value, -j);
        let swapped = spectral_density(w, &b, &a, &g.swapped()).value;
        prop_assert!((swapped - j).abs() <= 1e-14 * j.abs().max(1e-300));
    }

    #[test]
    fn couplings_are_exchange_symmetric(
        m1 in vec3(2.0), m2 in vec3(2.0), x1 in vec3(3.0), x2 in vec3(3.0), x in 0.01..10.0_f64,
    ) {
        prop_assume!((x2 - x1).norm() > 1e-2);
        let g = Geometry::new(x1, x2).unwrap();
        let h = Geometry::new(x2, x1).unwrap();
        let (a, b) = (dip(m1, DipoleKind::Transition), dip(m2, DipoleKind::Transition));
        let ts = Transition::from_retardation(x, g.distance()).unwrap();
        let t12 = xi_transition(&a, &b, &g, &ts).unwrap().xi;
        let t21 = xi_transition(&b, &a, &h, &ts).unwrap().xi;
        prop_assert!((t12 - t21).abs() <= 1e-13 * (1.0 + t12.abs()));
        let (p, q) = (a.with_kind(DipoleKind::PermanentE), b.with_kind(DipoleKind::PermanentE));
        let p12 = xi_permanent(&p, &q, &g).unwrap().xi;
        let p21 = xi_permanent(&q, &p, &h).unwrap().xi;
        prop_assert!((p12 - p21).abs() <= 1e-13 * (1.0 + p12.abs()));
    }

    #[test]
    fn reduced_couplings_are_rotation_covariant(
        m1 in vec3(2.0), m2 in vec3(2.0), r in vec3(3.0), axis in unit3(),
        angle in 0.0..std::f64::consts::TAU, x in 0.01..8.0_f64,
    ) {
        prop_assume!(r.norm() > 1e-2);
        let rot = |v| rotate(v, axis, angle);
        let g = Geometry::from_separation(r).unwrap();
        let gr = Geometry::from_separation(rot(r)).unwrap();
        let (a, b) = (dip(m1, DipoleKind::Transition), dip(m2, DipoleKind::Transition));
        let (ar, br) = (dip(rot(m1), DipoleKind::Transition), dip(rot(m2), DipoleKind::Transition));
        let ts = Transition::from_retardation(x, g.distance()).unwrap();
        let scale = 1.0 + m1.norm() * m2.norm() * (1.0 + x * x);
        let t0 = xi_transition(&a, &b, &g, &ts).unwrap().reduced;
        let t1 = xi_transition(&ar, &br, &gr, &ts).unwrap().reduced;
        prop_assert!((t0 - t1).abs() <= 1e-12 * scale);
        let c0 = classical_coupling(&a, &b, &g).reduced;
        let c1 = classical_coupling(&ar, &br, &gr).reduced;
        prop_assert!((c0 - c1).abs() <= 1e-12 * scale);
    }

    #[test]
    fn transition_remainder_is_quadratic(m1 in vec3(2.0), m2 in vec3(2.0), r in unit3()) {
        let g = Geometry::from_separation(r).unwrap();
        let (a, b) = (dip(m1, DipoleKind::Transition), dip(m2, DipoleKind::Transition));
        let p = classical_coupling(&a, &b, &g).xi;
        let scale = m1.norm() * m2.norm();
        for x in [1e-2, 1e-3, 1e-4] {
            let t = xi_transition(&a, &b, &g, &Transition::new(x).unwrap()).unwrap().xi;
            // |xiT - xiP| r^3 <= (|static|/2 + |transverse|) x^2 + O(x^4)
            prop_assert!((t - p).abs() <= 2.0 * scale * x * x);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn angular_quadrature_refinement_within_estimate(
        m1 in vec3(1.0), m2 in vec3(1.0), r in unit3(), kr in 0.05..6.0_f64,
    ) {
        let g = Geometry::from_separation(r).unwrap();
        let (a, b) = (dip(m1, DipoleKind::Transition), dip(m2, DipoleKind::Transition));
        let spec = Quadrature { n_theta: 40, n_phi: 40, ..Quadrature::default() };
        let fine = Quadrature { n_theta: 80, n_phi: 80, ..Quadrature::default() };
        let q = j12_angular_quadrature(kr, &a, &b, &g, &spec).unwrap();
        let d = j12_angular_quadrature(kr, &a, &b, &g, &fine).unwrap();
        prop_assert!((q.value - d.value).abs() <= q.error);
    }

    #[test]
    fn box_coupling_is_translation_invariant(
        m in unit3(), r in vec3(0.3), shift in vec3(5.0),
    ) {
        prop_assume!(r.norm() > 0.05);
        let bx = Box3::new(1.0).unwrap();
        let p = dip(m, DipoleKind::PermanentE);
        let opts = ImageSumOptions::default();
        let g0 = Geometry::from_separation(r).unwrap();
        let g1 = Geometry::new(shift, shift + r).unwrap();
        let (v0, _) = xi_permanent_images(&p, &p, &g0, &bx, &opts).unwrap();
        let (v1, _) = xi_permanent_images(&p, &p, &g1, &bx, &opts).unwrap();
        prop_assert!((v0.xi - v1.xi).abs() <= 1e-12 * v0.xi.abs().max(1.0 / r.norm().powi(3)));
    }

    #[test]
    fn box_coupling_is_lattice_periodic(
        m in unit3(), r in vec3(0.3), n in (-3i32..=3, -3i32..=3, -3i32..=3),
    ) {
        prop_assume!(r.norm() > 0.05);
        let bx = Box3::new(1.0).unwrap();
        let p = dip(m, DipoleKind::PermanentG);
        let opts = ImageSumOptions::default();
        let shifted = r + Vector3::new(n.0 as f64, n.1 as f64, n.2 as f64);
        let (v0, _) = xi_permanent_images(&p, &p, &Geometry::from_separation(r).unwrap(), &bx, &opts).unwrap();
        let (v1, _) = xi_permanent_images(&p, &p, &Geometry::from_separation(shifted).unwrap(), &bx, &opts).unwrap();
        prop_assert!((v0.xi - v1.xi).abs() <= 1e-12 * v0.xi.abs().max(1.0 / r.norm().powi(3)));
    }

    #[test]
    fn shell_increments_decay(m1 in unit3(), m2 in unit3(), e in unit3(), rl in 0.05..0.4_f64) {
        let bx = Box3::new(1.0).unwrap();
        let (a, b) = (dip(m1, DipoleKind::PermanentE), dip(m2, DipoleKind::PermanentE));
        let g = Geometry::from_separation(e * rl).unwrap();
        let g = bx.reduce(&g).unwrap();
        let incs = image_shell_increments(&a, &b, &g, &bx, 16).unwrap();
        // compare shell blocks so accidental near-cancellation in one shell does not matter
        let block = |lo: usize| incs[lo..lo + 4].iter().map(|v| v.abs()).fold(0.0, f64::max);
        prop_assert!(block(3) > block(7));
        prop_assert!(block(7) > block(11));
    }
}

#[test]
fn image_and_mode_sums_agree_within_residuals() {
    let mut rng = common::rng(20);
    let bx = Box3::new(1.0).unwrap();
    let img = ImageSumOptions {
        shell_max: 400,
        tol: 1e-7,
    };
    for _ in 0..20 {
        let m1 = common::moment(&mut rng, DipoleKind::PermanentE);
        let m2 = common::moment(&mut rng, DipoleKind::PermanentE);
        let rl = rand::Rng::random_range(&mut rng, 0.05..0.4);
        let g = common::separation(&mut rng, rl);
        let (a, _) = xi_permanent_images(&m1, &m2, &g, &bx, &img).unwrap();
        let (b, _) = xi_permanent_modesum(&m1, &m2, &g, &bx, &ModeSumOptions::default()).unwrap();
        let budget = a.meta.unwrap().residual + b.meta.unwrap().residual;
        assert!(
            (a.xi - b.xi).abs() <= budget,
            "{} vs {} (budget {budget:e})",
            a.xi,
            b.xi
        );
    }
}

#[test]
fn oracles_are_deterministic() {
    let m = Dipole::transition(Vector3::new(0.3, 0.4, -0.2)).unwrap();
    let g = Geometry::from_separation(Vector3::new(0.1, -0.2, 0.25)).unwrap();
    let spec = Quadrature::default();
    let ts = Transition::new(3.0).unwrap();
    let a = dipolekit::quadrature::xi_transition_pv(&m, &m, &g, &ts, &spec).unwrap();
    let b = dipolekit::quadrature::xi_transition_pv(&m, &m, &g, &ts, &spec).unwrap();
    assert_eq!(a, b);
    let p = m.with_kind(DipoleKind::PermanentE);
    let bx = Box3::new(1.0).unwrap();
    let x = xi_permanent_modesum(&p, &p, &g, &bx, &ModeSumOptions::default()).unwrap();
    let y = xi_permanent_modesum(&p, &p, &g, &bx, &ModeSumOptions::default()).unwrap();
    assert_eq!(x, y);
}
