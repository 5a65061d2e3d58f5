use std::sync::OnceLock;

use moebius_energy::curve::make_family;
use moebius_energy::densities::{c_bundle, density_bundle, pair_geometry, x_bundle, x_value};
use moebius_energy::moebius::random_map;
use moebius_energy::{
    suite, ArcLengthCurve, ClosedCurve, Curve, CurveMeta, Family, MappedCurve, Vector,
};
use proptest::prelude::*;

fn normalized() -> &'static [(&'static str, ArcLengthCurve)] {
    static CURVES: OnceLock<Vec<(&'static str, ArcLengthCurve)>> = OnceLock::new();
    CURVES.get_or_init(|| suite::normalized().unwrap())
}

/// Unit circle in the xy-plane plus small modes 1 to 4 in every coordinate.
fn wobbly(noise: &[f64]) -> ClosedCurve {
    let modes = 4;
    let stride = 2 * modes + 1;
    let mut coeffs = vec![0.0; 3 * stride];
    coeffs[1] = 1.0;
    coeffs[stride + 2] = 1.0;
    for (k, c) in coeffs.iter_mut().enumerate() {
        let mode = (k % stride).div_ceil(2).max(1) as f64;
        *c += 0.03 * noise[k] / (mode * mode);
    }
    ClosedCurve::new(3, modes, coeffs, CurveMeta::new("wobbly")).unwrap()
}

fn noise() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0..1.0f64, 27)
}

fn arc_pair() -> impl Strategy<Value = (usize, f64, f64)> {
    (0..5usize, 0.0..1.0f64, 0.01..0.49f64, prop::bool::ANY)
        .prop_map(|(c, u, d, sign)| (c, u, if sign { d } else { -d }))
        .prop_map(|(c, u, d)| (c, u, u + d))
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fourier_curves_are_one_periodic(noise in noise(), theta in -2.0..2.0f64) {
        let c = wobbly(&noise);
        let (a, b) = (c.jet(theta), c.jet(theta + 1.0));
        for (u, v) in [(a.position, b.position), (a.velocity, b.velocity), (a.acceleration, b.acceleration)] {
            prop_assert!((u - v).norm() <= 1e-10 * (1.0 + u.norm()));
        }
    }

    #[test]
    fn arc_length_curves_are_length_periodic((c, u, _) in arc_pair()) {
        let arc = &normalized()[c].1;
        let s = u * arc.length();
        prop_assert!((arc.position(s) - arc.position(s + arc.length())).norm() <= 1e-11);
    }

    #[test]
    fn densities_are_swap_symmetric((c, u, v) in arc_pair()) {
        let arc = &normalized()[c].1;
        let l = arc.length();
        let a = pair_geometry(arc, u * l, v * l).unwrap();
        let b = pair_geometry(arc, v * l, u * l).unwrap();
        let (da, db) = (density_bundle(&a), density_bundle(&b));
        prop_assert!(close(da.m, db.m, 1e-10));
        prop_assert!(close(da.m0, db.m0, 1e-10));
        prop_assert!(close(da.m1, db.m1, 1e-10));
        prop_assert!(close(da.m2, db.m2, 1e-10));
        let (xa, xb) = (x_bundle(&a).unwrap(), x_bundle(&b).unwrap());
        prop_assert!(close(xa.x, xb.x, 1e-10));
        prop_assert!(close(xa.dx_ds1, xb.dx_ds2, 1e-9));
        prop_assert!(close(xa.d2x, xb.d2x, 1e-9));
    }

    #[test]
    fn log_distortion_bounds((c, u, v) in arc_pair()) {
        let arc = &normalized()[c].1;
        let l = arc.length();
        let pg = pair_geometry(arc, u * l, v * l).unwrap();
        let d = density_bundle(&pg);
        let x = x_value(&pg);
        prop_assert!(x >= -1e-12);
        prop_assert!(x / (pg.delta_s * pg.delta_s) <= d.m + 1e-9 * (1.0 + d.m.abs()));
        let scaled = d.m0 * pg.chord_sq;
        prop_assert!((-1e-12..=2.0 + 1e-12).contains(&scaled));
        prop_assert!((-1.0..=1.0).contains(&d.cos_phi));
        prop_assert!((d.m0 - d.m1 - d.m2).abs() <= 1e-10 * (1.0 + d.m0));
    }

    #[test]
    fn x_partial_matches_central_difference((c, u, v) in arc_pair()) {
        let arc = &normalized()[c].1;
        let l = arc.length();
        let (s1, s2) = (u * l, v * l);
        let h = 1e-5;
        let analytic = x_bundle(&pair_geometry(arc, s1, s2).unwrap()).unwrap();
        let x = |a: f64, b: f64| x_value(&pair_geometry(arc, a, b).unwrap());
        let fd1 = (x(s1 + h, s2) - x(s1 - h, s2)) / (2.0 * h);
        let fd2 = (x(s1, s2 + h) - x(s1, s2 - h)) / (2.0 * h);
        prop_assert!((fd1 - analytic.dx_ds1).abs() <= 1e-5 * (1.0 + analytic.dx_ds1.abs()));
        prop_assert!((fd2 - analytic.dx_ds2).abs() <= 1e-5 * (1.0 + analytic.dx_ds2.abs()));
    }

    #[test]
    fn composition_is_sequential_application(seed_a in 0..1000u64, seed_b in 0..1000u64, p in prop::array::uniform3(-3.0..3.0f64)) {
        let circle = make_family(&Family::Circle, 3).unwrap();
        let a = random_map(seed_a, &circle, 0.3).unwrap();
        let b = random_map(seed_b, &circle, 0.3).unwrap();
        let x = Vector::from_slice(&p);
        if let (Ok(direct), Ok(inner)) = (a.compose(&b).apply_point(&x), b.apply_point(&x)) {
            let step = a.apply_point(&inner).unwrap();
            prop_assert!((direct - step).norm() <= 1e-12 * (1.0 + step.norm()));
        }
    }

    #[test]
    fn inverse_undoes_the_map(seed in 0..1000u64, p in prop::array::uniform3(-2.0..2.0f64)) {
        let circle = make_family(&Family::Circle, 3).unwrap();
        let map = random_map(seed, &circle, 0.5).unwrap();
        let x = Vector::from_slice(&p);
        if let Ok(y) = map.apply_point(&x) {
            if let Ok(back) = map.inverse().apply_point(&y) {
                prop_assert!((back - x).norm() <= 1e-8 * (1.0 + x.norm()));
            }
        }
    }

    #[test]
    fn cross_ratio_density_is_moebius_invariant(noise in noise(), seed in 0..1000u64, t1 in 0.0..1.0f64, gap in 0.01..0.99f64) {
        let curve = wobbly(&noise);
        let map = random_map(seed, &curve, 0.3).unwrap();
        let image = MappedCurve::new(curve.clone(), map).unwrap();
        let t2 = t1 + gap;
        let a = c_bundle(&curve, t1, t2).unwrap();
        let b = c_bundle(&image, t1, t2).unwrap();
        prop_assert!(close(a.c, b.c, 1e-8));
        prop_assert!(close(a.cos_phi_via_c, b.cos_phi_via_c, 1e-7));
    }
}
