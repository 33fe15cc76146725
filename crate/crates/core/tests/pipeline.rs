use umbilic::config::Config;
use umbilic::pipeline::{analyze, AnalysisSummary};
use umbilic::report::{load_report, render, save_report, to_json, ReportFormat};
use umbilic::rigidity::{RigidityReport, SphereFields};
use umbilic::surfgen::{generate, FamilySpec};

#[test]
fn round_sphere_satisfies_the_hypothesis() {
    let m = generate(&FamilySpec::icosphere(4)).unwrap();
    let a = analyze(&m, &Config::default(), false).unwrap();
    let r = &a.report;
    assert!(r.hypothesis_ok);
    assert_eq!(r.sphere_fields, SphereFields::Computed);
    assert!(r.w22_deficit.unwrap() < 5e-2, "{r:?}");
    assert!(r.half_area_dev.unwrap() < 5e-2, "{r:?}");
    assert!(a.sphere.is_some());
    assert_eq!(a.summary().vertices, 2562);
}

#[test]
fn reports_round_trip_and_are_deterministic() {
    let m = generate(&FamilySpec::harmonic(3, 0.05, 2, 1)).unwrap();
    let first = analyze(&m, &Config::default(), false).unwrap().summary();
    let second = analyze(&m, &Config::default(), false).unwrap().summary();
    assert_eq!(to_json(&first).unwrap(), to_json(&second).unwrap());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    save_report(&first.report, &path, ReportFormat::Json).unwrap();
    let back: RigidityReport = load_report(&path).unwrap();
    assert_eq!(back, first.report);
    let whole: AnalysisSummary = serde_json::from_str(&to_json(&first).unwrap()).unwrap();
    assert_eq!(whole, first);

    let csv = render(&first.report, ReportFormat::Csv).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.starts_with("ambient_dim,chi,a0_l2"));
}

#[test]
fn skipping_the_conformal_stage() {
    let m = generate(&FamilySpec::icosphere(2)).unwrap();
    let r = analyze(&m, &Config::default(), true).unwrap().report;
    assert_eq!(r.sphere_fields, SphereFields::Skipped);
    assert!(r.w22_deficit.is_none() && r.u_inf.is_none() && r.half_area_dev.is_none());
    assert!(r.empirical_constants.w22.is_none());
}

#[test]
fn torus_is_not_sphere_type() {
    let m = generate(&FamilySpec::torus(2.0, 0.7, 24)).unwrap();
    let r = analyze(&m, &Config::default(), false).unwrap().report;
    assert_eq!(r.chi, 0);
    assert_eq!(r.sphere_fields, SphereFields::NotSphereType);
    assert!(r.u_inf.is_none());
}

#[test]
fn large_deficit_branch_checks_the_energy_bound() {
    let m = generate(&FamilySpec::harmonic(3, 0.3, 2, 2)).unwrap();
    let cfg = Config {
        delta0_sq: Some(0.5),
        ..Config::default()
    };
    let r = analyze(&m, &cfg, false).unwrap().report;
    assert!(r.a0_l2 * r.a0_l2 >= 0.5);
    assert_eq!(r.sphere_fields, SphereFields::LargeDeficit);
    assert_eq!(r.large_branch_ok, Some(true));
    let c = r.large_branch_constant.unwrap();
    assert!((c - (2.0 + 8.0 * std::f64::consts::PI / 0.5).sqrt()).abs() < 1e-12);
    assert!(r.a_l2 <= c * r.a0_l2);
}

#[test]
fn analysis_is_scale_and_translation_invariant() {
    let m = generate(&FamilySpec::ellipsoid(3, [1.0, 1.0, 1.2])).unwrap();
    let moved = m.map_positions(|p| p.iter().map(|x| 3.0 * x - 0.5).collect()).unwrap();
    let cfg = Config::default();
    let (a, b) = (analyze(&m, &cfg, false).unwrap().report, analyze(&moved, &cfg, false).unwrap().report);
    for ((k, x), (_, y)) in a.deficits().into_iter().zip(b.deficits()) {
        assert!((x - y).abs() < 1e-6 * (1.0 + x.abs()), "{k}: {x} vs {y}");
    }
}
