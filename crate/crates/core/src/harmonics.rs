//! Real spherical harmonics with unit L²(S²) normalization.
//!
//! Degrees up to 3 use closed Cartesian forms; higher degrees go through the
//! associated Legendre recurrence. `m > 0` selects the cosine branch and
//! `m < 0` the sine branch. No Condon-Shortley phase.

use std::f64::consts::PI;

/// Evaluates `Y_lm` at the direction of `x` (first three coordinates).
pub fn real_sh(l: u32, m: i32, x: &[f64]) -> f64 {
    assert!(m.unsigned_abs() <= l, "|m| must not exceed l");
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    let (x, y, z) = (x[0] / r, x[1] / r, x[2] / r);
    if l <= 3 {
        closed_form(l, m, x, y, z)
    } else {
        by_recurrence(l, m, x, y, z)
    }
}

fn closed_form(l: u32, m: i32, x: f64, y: f64, z: f64) -> f64 {
    match (l, m) {
        (0, 0) => 0.5 * (1.0 / PI).sqrt(),
        (1, -1) => (3.0 / (4.0 * PI)).sqrt() * y,
        (1, 0) => (3.0 / (4.0 * PI)).sqrt() * z,
        (1, 1) => (3.0 / (4.0 * PI)).sqrt() * x,
        (2, -2) => 0.5 * (15.0 / PI).sqrt() * x * y,
        (2, -1) => 0.5 * (15.0 / PI).sqrt() * y * z,
        (2, 0) => 0.25 * (5.0 / PI).sqrt() * (3.0 * z * z - 1.0),
        (2, 1) => 0.5 * (15.0 / PI).sqrt() * x * z,
        (2, 2) => 0.25 * (15.0 / PI).sqrt() * (x * x - y * y),
        (3, -3) => 0.25 * (35.0 / (2.0 * PI)).sqrt() * y * (3.0 * x * x - y * y),
        (3, -2) => 0.5 * (105.0 / PI).sqrt() * x * y * z,
        (3, -1) => 0.25 * (21.0 / (2.0 * PI)).sqrt() * y * (5.0 * z * z - 1.0),
        (3, 0) => 0.25 * (7.0 / PI).sqrt() * (5.0 * z * z * z - 3.0 * z),
        (3, 1) => 0.25 * (21.0 / (2.0 * PI)).sqrt() * x * (5.0 * z * z - 1.0),
        (3, 2) => 0.25 * (105.0 / PI).sqrt() * z * (x * x - y * y),
        (3, 3) => 0.25 * (35.0 / (2.0 * PI)).sqrt() * x * (x * x - 3.0 * y * y),
        _ => unreachable!(),
    }
}

/// Associated Legendre `P_l^m(t)` without the Condon-Shortley phase.
fn assoc_legendre(l: u32, m: u32, t: f64) -> f64 {
    let s = (1.0 - t * t).max(0.0).sqrt();
    let mut pmm = 1.0;
    for k in 1..=m {
        pmm *= (2 * k - 1) as f64 * s;
    }
    if l == m {
        return pmm;
    }
    let mut pm1 = t * (2 * m + 1) as f64 * pmm;
    if l == m + 1 {
        return pm1;
    }
    let mut pm2 = pmm;
    for ll in m + 2..=l {
        let p = ((2 * ll - 1) as f64 * t * pm1 - (ll + m - 1) as f64 * pm2) / (ll - m) as f64;
        pm2 = pm1;
        pm1 = p;
    }
    pm1
}

fn by_recurrence(l: u32, m: i32, x: f64, y: f64, z: f64) -> f64 {
    let am = m.unsigned_abs();
    // (l - m)! / (l + m)!
    let mut ratio = 1.0;
    for k in (l - am + 1)..=(l + am) {
        ratio /= k as f64;
    }
    let norm = ((2 * l + 1) as f64 / (4.0 * PI) * ratio).sqrt();
    let p = assoc_legendre(l, am, z);
    let phi = y.atan2(x);
    match m.signum() {
        0 => norm * p,
        1 => std::f64::consts::SQRT_2 * norm * p * (am as f64 * phi).cos(),
        _ => std::f64::consts::SQRT_2 * norm * p * (am as f64 * phi).sin(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_matches_recurrence() {
        let dirs: [[f64; 3]; 4] = [
            [0.3, -0.5, 0.81],
            [-0.7, 0.1, -0.2],
            [0.0, 0.0, 1.0],
            [1.0, 2.0, -3.0],
        ];
        for d in dirs {
            let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            let (x, y, z) = (d[0] / r, d[1] / r, d[2] / r);
            for l in 0..=3u32 {
                for m in -(l as i32)..=(l as i32) {
                    let a = closed_form(l, m, x, y, z);
                    let b = by_recurrence(l, m, x, y, z);
                    assert!((a - b).abs() < 1e-12, "l={l} m={m}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn unit_norm_by_quadrature() {
        // midpoint rule in (cos theta, phi)
        let (nt, np) = (800, 400);
        for (l, m) in [(2u32, 2i32), (3, -1), (4, 3), (5, 0)] {
            let mut s = 0.0;
            for i in 0..nt {
                let t = -1.0 + (i as f64 + 0.5) * 2.0 / nt as f64;
                let st = (1.0 - t * t).sqrt();
                for j in 0..np {
                    let phi = (j as f64 + 0.5) * 2.0 * PI / np as f64;
                    let v = real_sh(l, m, &[st * phi.cos(), st * phi.sin(), t]);
                    s += v * v;
                }
            }
            s *= (2.0 / nt as f64) * (2.0 * PI / np as f64);
            assert!((s - 1.0).abs() < 1e-3, "l={l} m={m}: {s}");
        }
    }
}
