mod common;

use std::f64::consts::PI;

use proptest::prelude::*;
use umbilic::mesh::io::{load_mesh, save_mesh, MeshFormat};
use umbilic::mesh::normalize_area;
use umbilic::surfgen::{generate, unit_icosphere, FamilySpec, Jitter};
use umbilic::{EmbeddedMesh, Error};

#[test]
fn lifted_icosphere_keeps_its_areas() {
    let m3 = unit_icosphere(3).unwrap();
    let m4 = m3.embedded_in(4).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ico.noff");
    save_mesh(&m4, &path, None).unwrap();
    let back = load_mesh(&path, None).unwrap();
    assert_eq!(back.ambient_dim(), 4);
    for (a, b) in m3.face_areas().iter().zip(back.face_areas()) {
        assert!((a - b).abs() < 1e-15);
    }
    assert_eq!(back.positions(), m4.positions());
}

#[test]
fn off_and_obj_round_trip() {
    let m = generate(&FamilySpec::ellipsoid(2, [1.0, 1.0, 1.2])).unwrap();
    let dir = tempfile::tempdir().unwrap();
    for (name, fmt) in [("m.off", MeshFormat::Off), ("m.obj", MeshFormat::Obj)] {
        let path = dir.path().join(name);
        save_mesh(&m, &path, Some(fmt)).unwrap();
        let back = load_mesh(&path, None).unwrap();
        assert_eq!(back.positions(), m.positions());
        assert_eq!(back.faces(), m.faces());
    }
}

#[test]
fn radius_two_sphere_scales_by_half() {
    let m = unit_icosphere(4).unwrap();
    let big = m.map_positions(|p| p.iter().map(|x| 2.0 * x).collect()).unwrap();
    let n = normalize_area(&big).unwrap();
    let r = n.position(0).iter().map(|x| x * x).sum::<f64>().sqrt();
    // the level-4 polyhedron has a little less area than its sphere
    assert!((r - 1.0).abs() < 5e-3, "{r}");
    assert!((n.total_area() - 4.0 * PI).abs() < 1e-12 * 4.0 * PI);
}

#[test]
fn metadata_of_torus_and_sphere() {
    let t = generate(&FamilySpec::torus(2.0, 0.7, 24)).unwrap().metadata();
    assert_eq!((t.euler_characteristic, t.genus), (0, 1));
    let s = unit_icosphere(2).unwrap().metadata();
    assert_eq!((s.euler_characteristic, s.genus), (2, 0));
    assert!((s.diameter - 2.0).abs() < 1e-12);
    let faces: f64 = unit_icosphere(2).unwrap().face_areas().iter().sum();
    assert!((s.total_area - faces).abs() < 1e-12);
}

#[test]
fn mixed_areas_tile_the_surface() {
    for m in [
        unit_icosphere(3).unwrap(),
        generate(&FamilySpec::catenoid_neck(0.1, 24)).unwrap(),
        generate(&FamilySpec::torus(2.0, 0.5, 30)).unwrap(),
    ] {
        let mixed: f64 = m.mixed_areas().iter().sum();
        let dual: f64 = m.dual_areas().iter().sum();
        assert!((mixed - m.total_area()).abs() < 1e-10 * m.total_area());
        assert!((dual - m.total_area()).abs() < 1e-10 * m.total_area());
        assert!(m.mixed_areas().iter().all(|&a| a > 0.0));
    }
}

#[test]
fn bad_files_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.off");
    // three triangles sharing edge (0, 1)
    std::fs::write(&path, "OFF\n5 3 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n0 -1 0\n3 0 1 2\n3 1 0 3\n3 0 1 4\n").unwrap();
    assert!(matches!(load_mesh(&path, None), Err(Error::NonManifold(..))));
    assert!(matches!(load_mesh(dir.path().join("missing.off"), None), Err(Error::Io(_))));
}

fn jittered(level: u32, seed: u64, amplitude: f64) -> EmbeddedMesh {
    let mut spec = FamilySpec::icosphere(level);
    spec.jitter = Some(Jitter { seed, amplitude });
    generate(&spec).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gauss_bonnet_on_jittered_spheres(seed in 0u64..1000, amp in 0.0..0.2f64, level in 1u32..4) {
        let m = jittered(level, seed, amp);
        let total: f64 = m.angle_defects().iter().sum();
        prop_assert!((total - 4.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn normalization_is_idempotent(seed in 0u64..1000, scale in 0.1..10.0f64) {
        let m = jittered(2, seed, 0.1).map_positions(|p| p.iter().map(|x| scale * x).collect()).unwrap();
        let once = normalize_area(&m).unwrap();
        let twice = normalize_area(&once).unwrap();
        prop_assert!((once.total_area() / (4.0 * PI) - 1.0).abs() < 1e-12);
        for (a, b) in once.positions().iter().zip(twice.positions()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn areas_are_rotation_invariant(seed in 0u64..1000, n in 3usize..6) {
        let m = jittered(2, seed, 0.1).embedded_in(n).unwrap();
        let r = common::random_rotation(n, seed);
        let rm = m.transformed(&r).unwrap();
        prop_assert!((rm.total_area() - m.total_area()).abs() < 1e-12);
        for (a, b) in m.angle_defects().iter().zip(rm.angle_defects()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
