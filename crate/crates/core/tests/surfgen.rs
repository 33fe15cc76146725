use std::f64::consts::PI;

use umbilic::geometry::{curvature, willmore_energy};
use umbilic::harmonics::real_sh;
use umbilic::surfgen::{generate, sweep, FamilySpec, Jitter, NeckProfile, SweepParam};
use umbilic::EmbeddedMesh;

/// Cotangent Laplacian with barycentric dual areas, assembled here from
/// scratch so the generator is checked against an independent operator.
fn cotan_laplacian(m: &EmbeddedMesh, f: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; m.num_vertices()];
    let mut area = vec![0.0; m.num_vertices()];
    let d = m.ambient_dim();
    for &[a, b, c] in m.faces() {
        let idx = [a, b, c];
        let p: Vec<&[f64]> = idx.iter().map(|&v| m.position(v)).collect();
        let e = |i: usize, j: usize| -> Vec<f64> { (0..d).map(|k| p[j][k] - p[i][k]).collect() };
        let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
        let (u, v) = (e(0, 1), e(0, 2));
        let twice = (dot(&u, &u) * dot(&v, &v) - dot(&u, &v).powi(2)).sqrt();
        for k in 0..3 {
            area[idx[k]] += twice / 6.0;
            let (i, j) = (idx[(k + 1) % 3], idx[(k + 2) % 3]);
            let (x, y) = (e(k, (k + 1) % 3), e(k, (k + 2) % 3));
            let cot = dot(&x, &y) / twice;
            out[i] += 0.5 * cot * (f[j] - f[i]);
            out[j] += 0.5 * cot * (f[i] - f[j]);
        }
    }
    out.iter().zip(&area).map(|(l, a)| l / a).collect()
}

#[test]
fn spherical_harmonics_are_laplace_eigenfunctions() {
    let m = generate(&FamilySpec::icosphere(5)).unwrap();
    let scale = (m.total_area() / (4.0 * PI)).sqrt();
    for (l, mm) in [(1, 0), (2, 2), (3, -1), (4, 3)] {
        let y: Vec<f64> = (0..m.num_vertices())
            .map(|v| {
                let p: Vec<f64> = m.position(v).iter().map(|x| x / scale).collect();
                real_sh(l, mm, &p)
            })
            .collect();
        let lap = cotan_laplacian(&m, &y);
        let lam = (l * (l + 1)) as f64;
        let err: f64 = lap.iter().zip(&y).map(|(a, b)| (a + lam * b).powi(2)).sum::<f64>().sqrt();
        let size: f64 = y.iter().map(|b| (lam * b).powi(2)).sum::<f64>().sqrt();
        assert!(err / size < 2e-2, "l={l} m={mm}: {}", err / size);
    }
}

#[test]
fn catenoid_neck_solves_the_minimal_surface_equation() {
    for a in [0.45, 0.2, 0.05, 0.01] {
        let p = NeckProfile::new(a).unwrap();
        for k in 0..=20 {
            let z = p.z_junction * (k as f64 / 10.0 - 1.0);
            assert!(p.catenoid_ode_residual(z).abs() <= 1e-10, "a={a} z={z}");
        }
        // the junction circle lies on the unit cap
        let (r, zj) = (a * (p.z_junction / a).cosh(), p.z_junction);
        assert!((r * r + (zj - p.center).powi(2) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn perturbation_sweep_increases_the_tracefree_energy() {
    let grid = [0.0, 0.02, 0.05, 0.1, 0.2];
    for template in [FamilySpec::harmonic(3, 0.0, 2, 2), FamilySpec::codim_lift(3, 0.0, 3, 1, 5)] {
        let out = sweep(&template, SweepParam::Eps, &grid).unwrap();
        let a0: Vec<f64> = out
            .iter()
            .map(|(_, m)| willmore_energy(m, &curvature(m).unwrap()).a0_l2sq)
            .collect();
        assert!(a0.windows(2).all(|w| w[0] < w[1]), "{a0:?}");
    }
}

#[test]
fn neck_sweep_drives_the_energy_toward_two_spheres() {
    let out = sweep(&FamilySpec::catenoid_neck(0.3, 32), SweepParam::Neck, &[0.3, 0.1, 0.03]).unwrap();
    let w: Vec<f64> = out.iter().map(|(_, m)| willmore_energy(m, &curvature(m).unwrap()).willmore).collect();
    assert!(w.windows(2).all(|p| p[0] < p[1]), "{w:?}");
    assert!(w[2] > 7.0 * PI && w[2] < 9.0 * PI, "{w:?}");
}

#[test]
fn refinement_converges_to_the_round_sphere() {
    let out = sweep(&FamilySpec::icosphere(0), SweepParam::Level, &[1.0, 2.0, 3.0, 4.0]).unwrap();
    let mut prev = f64::INFINITY;
    for (spec, m) in &out {
        let e = willmore_energy(m, &curvature(m).unwrap());
        let err = (e.willmore / (4.0 * PI) - 1.0).abs();
        assert!(err < prev, "{spec:?}: {err}");
        prev = err;
    }
    assert!(prev < 1e-2);
    assert!(sweep(&FamilySpec::icosphere(0), SweepParam::Level, &[1.5]).is_err());
    assert!(sweep(&FamilySpec::icosphere(0), SweepParam::Eps, &[0.1]).is_err());
}

#[test]
fn jitter_is_seeded() {
    let spec = FamilySpec {
        jitter: Some(Jitter { seed: 9, amplitude: 0.1 }),
        ..FamilySpec::icosphere(2)
    };
    let a = generate(&spec).unwrap();
    let b = generate(&spec).unwrap();
    assert_eq!(a.positions(), b.positions());
    let other = generate(&FamilySpec {
        jitter: Some(Jitter { seed: 10, amplitude: 0.1 }),
        ..FamilySpec::icosphere(2)
    })
    .unwrap();
    assert_ne!(a.positions(), other.positions());
    assert!((a.total_area() - 4.0 * PI).abs() < 1e-10);
}

#[test]
fn specs_round_trip_through_json() {
    for spec in [
        FamilySpec::codim_lift(2, 0.1, 2, -1, 6),
        FamilySpec::catenoid_neck(0.1, 48),
        FamilySpec::torus(2.0, 0.5, 16),
    ] {
        let text = serde_json::to_string(&spec).unwrap();
        let back: FamilySpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
    }
    let parsed: FamilySpec = serde_json::from_str(r#"{"kind":"ellipsoid","level":1,"axes":[1,2,3]}"#).unwrap();
    assert_eq!(parsed, FamilySpec::ellipsoid(1, [1.0, 2.0, 3.0]));
}

#[test]
fn invalid_specs_are_rejected() {
    for spec in [
        FamilySpec::icosphere(8),
        FamilySpec::harmonic(2, 0.6, 2, 0),
        FamilySpec::harmonic(2, 0.1, 2, 3),
        FamilySpec::codim_lift(2, 0.1, 2, 0, 3),
        FamilySpec::ellipsoid(2, [1.0, 0.0, 1.0]),
        FamilySpec::torus(0.5, 1.0, 16),
        FamilySpec::catenoid_neck(0.1, 4),
    ] {
        assert!(generate(&spec).is_err(), "{spec:?}");
    }
}
