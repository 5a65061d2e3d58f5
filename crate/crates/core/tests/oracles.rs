use std::f64::consts::PI;

use moebius_energy::bounds::{
    circle_comparison_check, continuity_check, diff_via_c, difference_identity, sup_x,
};
use moebius_energy::curve::make_family;
use moebius_energy::densities::{density_bundle, ArcNodes};
use moebius_energy::energy::{e0_via_c, energy_report, identity_suite, normalize};
use moebius_energy::moebius::{apply_curve, random_map};
use moebius_energy::quad::{convergence_study, pv_pair, Orientation};
use moebius_energy::{
    suite, ClosedCurve, Curve, CurveMeta, Family, MoebiusMap, PairComparison, PairGrid, Primitive,
    QuadError, Vector,
};

fn circle() -> ClosedCurve {
    make_family(&Family::Circle, 3).unwrap()
}

fn ellipse() -> ClosedCurve {
    make_family(&Family::Ellipse { a: 2.0, b: 1.0 }, 3).unwrap()
}

#[test]
fn circle_energies_match_closed_forms() {
    let r = energy_report(&normalize(&circle()).unwrap(), 512).unwrap();
    let two_pi_sq = 2.0 * PI * PI;
    assert!(r.e0 >= -1e-10 && r.e0 <= 1e-8, "E0 = {}", r.e0);
    assert!((r.e - 4.0).abs() <= 1e-3);
    assert!((r.e1 - two_pi_sq).abs() <= 1e-10 * two_pi_sq);
    assert!((r.e2 + two_pi_sq).abs() <= 1e-10 * two_pi_sq);
    assert!(e0_via_c(&circle(), 256).unwrap().abs() <= 1e-6);
}

#[test]
fn circle_error_shrinks_under_refinement() {
    let arc = normalize(&circle()).unwrap();
    let errors: Vec<f64> = [64, 128, 256]
        .iter()
        .map(|&n| (energy_report(&arc, n).unwrap().e - 4.0).abs())
        .collect();
    assert!(errors[0] > errors[1] && errors[1] > errors[2]);
}

#[test]
fn circle_sup_of_log_distortion_sits_at_antipodes() {
    let x = sup_x(&normalize(&circle()).unwrap(), 128).unwrap();
    assert!((x - (PI * PI / 4.0).ln()).abs() <= 1e-12);
}

#[test]
fn ellipse_regression_values() {
    let arc = normalize(&ellipse()).unwrap();
    assert!((sup_x(&arc, 1024).unwrap() - 1.769279819201).abs() <= 1e-9);
    let r = energy_report(&arc, 512).unwrap();
    assert!((r.e0 - 2.6418991433).abs() <= 1e-8);
    assert!((r.e1 - 27.3159101460).abs() <= 1e-8);
    assert!((r.e2 + 24.6740110027).abs() <= 1e-8);
    assert!((r.x_route.e1 - r.e1).abs() <= 1e-2 * (1.0 + r.e1));
    assert!((r.e0_via_c - r.e0).abs() <= 1e-2 * (1.0 + r.e0));
}

#[test]
fn trefoil_regression_values() {
    let trefoil = make_family(&Family::trefoil(), 3).unwrap();
    let r = energy_report(&normalize(&trefoil).unwrap(), 512).unwrap();
    assert!((r.e - 97.6043466807).abs() <= 1e-7);
    assert!(r.residual_cosine <= 1e-3 * (1.0 + r.e));
    assert!(r.residual_decomp <= 1e-10 * (1.0 + r.e0));
}

#[test]
fn perturbed_circle_passes_every_proof_consistent_residual() {
    let (_, arc) = suite::normalized().unwrap().remove(4);
    let residuals = identity_suite(&arc, 512).unwrap();
    assert_eq!(residuals.len(), 8);
    for r in &residuals {
        assert!(r.residual >= 0.0);
        if !r.informational {
            assert!(r.residual <= 1e-2, "{} = {}", r.name, r.residual);
        }
    }
}

#[test]
fn reports_are_deterministic() {
    let arc = normalize(&ellipse()).unwrap();
    assert_eq!(
        energy_report(&arc, 128).unwrap(),
        energy_report(&arc, 128).unwrap()
    );
}

#[test]
fn integrable_field_has_principal_value_equal_to_its_integral() {
    let arc = normalize(&circle()).unwrap();
    let grid = PairGrid::new(256, arc.length()).unwrap();
    let nodes = ArcNodes::new(&arc, grid);
    let field = |_: Orientation, i: usize, j: usize| density_bundle(&nodes.pair(i, j)).m;
    let pv = pv_pair(&grid, &[1, 2, 4, 8], field).unwrap();
    assert!((pv.extrapolated - pv.unexcluded).abs() <= 1e-6 * pv.unexcluded.abs());
}

#[test]
fn grids_must_double() {
    let err = convergence_study::<_, QuadError>(&[128, 200, 512], |_| Ok(1.0)).unwrap_err();
    assert_eq!(err, QuadError::InvalidStudy);
}

#[test]
fn isometries_and_scalings_preserve_energies() {
    let trefoil = make_family(&Family::trefoil(), 3).unwrap();
    let base = energy_report(&normalize(&trefoil).unwrap(), 256).unwrap();
    let maps = [
        MoebiusMap::new(
            3,
            vec![Primitive::Translation(Vector::from_slice(&[
                0.3, -1.0, 2.0,
            ]))],
        )
        .unwrap(),
        MoebiusMap::new(3, vec![Primitive::Scaling(2.0)]).unwrap(),
    ];
    for map in &maps {
        let image = apply_curve(map, &trefoil, trefoil.modes()).unwrap();
        let r = energy_report(&normalize(&image).unwrap(), 256).unwrap();
        for (a, b) in [
            (r.e, base.e),
            (r.e0, base.e0),
            (r.e1, base.e1),
            (r.e2, base.e2),
        ] {
            assert!((a - b).abs() <= 1e-6 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }
}

#[test]
fn inversion_maps_circle_to_circle() {
    let map = MoebiusMap::new(
        3,
        vec![Primitive::Inversion {
            center: Vector::from_slice(&[3.0, 0.0, 0.0]),
            radius: 1.0,
        }],
    )
    .unwrap();
    let image: Vec<Vector> = (0..64)
        .map(|k| {
            map.apply_point(&circle().position(k as f64 / 64.0))
                .unwrap()
        })
        .collect();
    // The image lies in the xy-plane and is symmetric about the x-axis, so
    // its center is the midpoint of the two points on that axis.
    let center = (image[0] + image[32]) * 0.5;
    let radius = image[0].distance(&center);
    let worst = image
        .iter()
        .map(|p| (p.distance(&center) - radius).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-8, "best-fit residual {worst}");
}

#[test]
fn random_map_is_reproducible_and_keeps_clear_of_the_curve() {
    let trefoil = make_family(&Family::trefoil(), 3).unwrap();
    let a = random_map(1, &trefoil, 0.5).unwrap();
    assert_eq!(a, random_map(1, &trefoil, 0.5).unwrap());
    let samples: Vec<Vector> = (0..2048)
        .map(|k| trefoil.position(k as f64 / 2048.0))
        .collect();
    assert!(a.center_clearance(&samples) >= 0.5 - 1e-9);
    assert!(random_map(1, &trefoil, 1e3).is_err());
}

#[test]
fn comparisons_of_a_curve_with_itself_vanish() {
    let arc = normalize(&ellipse()).unwrap();
    let fc = PairComparison::new(arc.clone(), arc).unwrap();
    let d = difference_identity(&fc, 64).unwrap();
    assert_eq!((d.lhs_e1, d.lhs_e2, d.rhs_e2), (0.0, 0.0, 0.0));
    let t = continuity_check(&fc, 64, 8, 0.0, false).unwrap();
    assert_eq!(t.infimum, 0.0);
    assert!(t.reports.iter().all(|r| r.pass && r.lhs == 0.0));
    let v = diff_via_c(&ellipse(), &ellipse(), 64, &[1, 2, 4]).unwrap();
    assert_eq!(v.pv.extrapolated, 0.0);
}

#[test]
fn rotated_circle_has_the_same_log_distortion() {
    let rotated = ClosedCurve::new(
        3,
        1,
        vec![0.0, 0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0],
        CurveMeta::new("rotated_circle"),
    )
    .unwrap();
    let fc =
        PairComparison::new(normalize(&circle()).unwrap(), normalize(&rotated).unwrap()).unwrap();
    let d = difference_identity(&fc, 128).unwrap();
    assert!(d.lhs_e2.abs() <= 1e-10 && d.rhs_e2.abs() <= 1e-10);
}

#[test]
fn ellipse_against_circle_difference_identity_closes() {
    let fc = PairComparison::new(
        normalize(&ellipse()).unwrap(),
        normalize(&circle()).unwrap(),
    )
    .unwrap();
    let d = difference_identity(&fc, 256).unwrap();
    assert!(d.residual_e2 <= 1e-2 * (1.0 + d.lhs_e2.abs()));
    assert!(d.residual_e1 <= 1e-2 * (1.0 + d.lhs_e1.abs()));
}

#[test]
fn circle_comparison_is_tight_on_the_circle() {
    let reports = circle_comparison_check(&normalize(&circle()).unwrap(), 128).unwrap();
    assert_eq!(reports.len(), 3);
    assert!(reports.iter().all(|r| r.pass && r.is_consistent()));
    assert!(reports[0].lhs.abs() <= 1e-10 && reports[0].rhs.abs() <= 1e-8);
}
