mod common;

use proptest::prelude::*;
use umbilic::geometry::{curvature, willmore_energy};
use umbilic::spherefit::{chain_inequality, l2_dist_sq, lsq_sphere_oracle, recenter_unit, tangent_sphere};
use umbilic::surfgen::{generate, FamilySpec};

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / lx.len() as f64;
    let my = ly.iter().sum::<f64>() / ly.len() as f64;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn tangent_sphere_of_the_unit_sphere() {
    let m = generate(&FamilySpec::icosphere(4)).unwrap();
    let c = curvature(&m).unwrap();
    for xi in [0, 17, 500] {
        let fit = tangent_sphere(&m, &c, xi).unwrap();
        assert!((fit.radius - 1.0).abs() < 2e-2, "{}", fit.radius);
        assert!(norm(&fit.center) < 2e-2, "{:?}", fit.center);
        assert!(fit.hausdorff < 3e-2);
        assert_eq!(fit.xi, Some(xi));
    }
}

#[test]
fn tangent_sphere_scales_with_the_surface() {
    let m = generate(&FamilySpec::icosphere(4)).unwrap();
    let big = m.map_positions(|p| p.iter().map(|x| 2.5 * x + 1.0).collect()).unwrap();
    let c = curvature(&big).unwrap();
    let fit = tangent_sphere(&big, &c, 3).unwrap();
    assert!((fit.radius / 2.5 - 1.0).abs() < 2e-2, "{}", fit.radius);
    for x in &fit.center {
        assert!((x - 1.0).abs() < 5e-2, "{:?}", fit.center);
    }
}

#[test]
fn chain_inequality_holds_pointwise() {
    for spec in [
        FamilySpec::harmonic(4, 0.1, 2, 1),
        FamilySpec::ellipsoid(4, [1.0, 1.1, 1.3]),
        FamilySpec::codim_lift(3, 0.1, 3, -2, 5),
    ] {
        let m = generate(&spec).unwrap();
        let c = curvature(&m).unwrap();
        let fit = tangent_sphere(&m, &c, 0).unwrap();
        let chain = chain_inequality(&m, &c, &fit).unwrap();
        assert!(chain.max_violation <= 1e-8, "{spec:?}: {}", chain.max_violation);
        assert_eq!(chain.points, 3 * m.num_faces());
        // the left side integrates to 4 ∫ d²
        assert!((chain.lhs_sq_integral - 4.0 * l2_dist_sq(&m, &fit)).abs() < 1e-10 * (1.0 + chain.lhs_sq_integral));
        assert!(chain.lhs_sq_integral <= chain.rhs_sq_integral);
    }
}

#[test]
fn oracle_never_does_worse_than_the_tangent_sphere() {
    for spec in [FamilySpec::harmonic(3, 0.1, 3, 1), FamilySpec::ellipsoid(3, [1.0, 1.0, 1.2])] {
        let m = generate(&spec).unwrap();
        let c = curvature(&m).unwrap();
        let init = tangent_sphere(&m, &c, 5).unwrap();
        let fit = lsq_sphere_oracle(&m, &c, &init).unwrap();
        assert!(fit.vertex_residual <= init.vertex_residual);
    }
}

#[test]
fn oracle_radius_on_the_ellipsoid() {
    let m = generate(&FamilySpec::ellipsoid(4, [1.0, 1.0, 1.2])).unwrap();
    let c = curvature(&m).unwrap();
    let p = m.position(0);
    let lambda = (p[0] * p[0] + p[1] * p[1] + (p[2] / 1.2).powi(2)).sqrt();
    let fit = lsq_sphere_oracle(&m, &c, &tangent_sphere(&m, &c, 0).unwrap()).unwrap();
    // the best sphere sits between the inscribed and circumscribed ones
    assert!(fit.radius > lambda && fit.radius < 1.2 * lambda, "{} vs {lambda}", fit.radius);
    assert!(norm(&fit.center) < 1e-6 * lambda, "{:?}", fit.center);
}

#[test]
fn recentred_round_sphere_is_close_to_unit() {
    let m = generate(&FamilySpec::icosphere(5)).unwrap();
    let c = curvature(&m).unwrap();
    let fit = lsq_sphere_oracle(&m, &c, &tangent_sphere(&m, &c, 0).unwrap()).unwrap();
    let (moved, d) = recenter_unit(&m, &c, &fit).unwrap();
    assert_eq!(moved.num_vertices(), m.num_vertices());
    assert!(d.mean_l2 < 3e-2, "{d:?}");
    assert!(d.radial_l2 < 3e-2, "{d:?}");
    assert!(d.radius_dev < 3e-2, "{d:?}");
    assert!((d.max_norm - 1.0).abs() < 3e-2, "{d:?}");
}

#[test]
fn mean_deficit_is_linear_in_the_tracefree_norm() {
    let eps = [0.02, 0.04, 0.08, 0.16];
    for lift in [false, true] {
        let (mut a0, mut mean) = (vec![], vec![]);
        for e in eps {
            let spec = if lift { FamilySpec::codim_lift(4, e, 2, 2, 4) } else { FamilySpec::harmonic(4, e, 2, 2) };
            let m = generate(&spec).unwrap();
            let c = curvature(&m).unwrap();
            let fit = lsq_sphere_oracle(&m, &c, &tangent_sphere(&m, &c, 0).unwrap()).unwrap();
            let (_, d) = recenter_unit(&m, &c, &fit).unwrap();
            a0.push(willmore_energy(&m, &c).a0_l2sq.sqrt());
            mean.push(d.mean_l2);
        }
        let s = loglog_slope(&a0, &mean);
        assert!((s - 1.0).abs() < 0.1, "lift={lift}: slope {s}, {a0:?} {mean:?}");
    }
}

#[test]
fn fundamental_form_splits_into_tracefree_and_trace() {
    let m = generate(&FamilySpec::codim_lift(3, 0.2, 2, 1, 4)).unwrap();
    let c = curvature(&m).unwrap();
    let sq = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
    for v in 0..m.num_vertices() {
        // A - νg = A⁰ + (H/2 - ν) g with A⁰ ⟂ g
        let h: Vec<f64> = c.a11[v].iter().zip(&c.a22[v]).map(|(a, b)| a + b).collect();
        let a0_sq = 0.5 * sq(&c.a11[v].iter().zip(&c.a22[v]).map(|(a, b)| a - b).collect::<Vec<_>>()) + 2.0 * sq(&c.a12[v]);
        let shift: Vec<f64> = h.iter().zip(&c.nu[v]).map(|(h, n)| 0.5 * h - n).collect();
        let want = a0_sq + 2.0 * sq(&shift);
        assert!((c.funda_deficit_sq(v) - want).abs() < 1e-10 * (1.0 + want));
        assert!((c.a0_norm_sq(v) - a0_sq).abs() < 1e-12 * (1.0 + a0_sq));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn fits_are_rigid_motion_equivariant(seed in 0u64..1000, shift in -2.0..2.0f64) {
        let m = generate(&FamilySpec::codim_lift(2, 0.15, 2, 0, 4)).unwrap();
        let r = common::random_rotation(4, seed);
        let moved = m.map_positions(|p| common::apply(&r, p).iter().map(|x| x + shift).collect()).unwrap();
        let (c0, c1) = (curvature(&m).unwrap(), curvature(&moved).unwrap());
        let f0 = tangent_sphere(&m, &c0, 7).unwrap();
        let f1 = tangent_sphere(&moved, &c1, 7).unwrap();
        let want: Vec<f64> = common::apply(&r, &f0.center).iter().map(|x| x + shift).collect();
        prop_assert!((f0.radius - f1.radius).abs() < 1e-9);
        prop_assert!(common::dist(&want, &f1.center) < 1e-9);
        prop_assert!((f0.l2_dist_sq - f1.l2_dist_sq).abs() < 1e-9);
        prop_assert!((f0.mean_deficit - f1.mean_deficit).abs() < 1e-9);
    }
}
