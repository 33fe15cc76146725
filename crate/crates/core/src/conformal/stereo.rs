//! Stereographic charts, the inversion `Φ(x) = e₃ + 2(x − e₃)/|x − e₃|²`,
//! and Möbius transformations of S² as Lorentz matrices acting on the null
//! cone `{(x, 1) : |x| = 1}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const POLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pole {
    /// 0-based coordinate axis
    pub axis: usize,
    pub sign: f64,
}

impl Pole {
    pub const NORTH: Pole = Pole { axis: 2, sign: 1.0 };
    pub const SOUTH: Pole = Pole { axis: 2, sign: -1.0 };

    /// The two remaining axes, in cyclic order.
    pub fn plane_axes(&self) -> (usize, usize) {
        ((self.axis + 1) % 3, (self.axis + 2) % 3)
    }
}

/// Projection from `pole` onto the plane through the origin orthogonal to it.
pub fn stereographic(x: &[f64; 3], pole: Pole) -> Result<[f64; 2]> {
    let d = 1.0 - pole.sign * x[pole.axis];
    if d <= POLE_TOL {
        return Err(Error::PoleSingularity);
    }
    let (i, j) = pole.plane_axes();
    Ok([x[i] / d, x[j] / d])
}

pub fn inverse_stereographic(z: [f64; 2], pole: Pole) -> [f64; 3] {
    let s = z[0] * z[0] + z[1] * z[1];
    let (i, j) = pole.plane_axes();
    let mut x = [0.0; 3];
    x[i] = 2.0 * z[0] / (s + 1.0);
    x[j] = 2.0 * z[1] / (s + 1.0);
    x[pole.axis] = pole.sign * (s - 1.0) / (s + 1.0);
    x
}

fn e3_offset(x: &[f64]) -> Result<(Vec<f64>, f64)> {
    if x.len() < 3 {
        return Err(Error::InvalidSpec("inversion needs at least three coordinates".into()));
    }
    let mut d = x.to_vec();
    d[2] -= 1.0;
    let r2: f64 = d.iter().map(|t| t * t).sum();
    if r2 <= POLE_TOL * POLE_TOL {
        return Err(Error::PoleSingularity);
    }
    Ok((d, r2))
}

/// `Φ(x) = e₃ + 2(x − e₃)/|x − e₃|²` in R^n. An involution; maps S² onto
/// the plane `x₃ = 0` with `Φ(−e₃) = 0`.
pub fn inversion(x: &[f64]) -> Result<Vec<f64>> {
    let (d, r2) = e3_offset(x)?;
    let mut out: Vec<f64> = d.iter().map(|t| 2.0 * t / r2).collect();
    out[2] += 1.0;
    Ok(out)
}

/// Log of the conformal scale of `Φ` at `x`: `½ log 4 − 2 log |x − e₃|`.
pub fn conformal_factor_of_inversion(x: &[f64]) -> Result<f64> {
    let (_, r2) = e3_offset(x)?;
    Ok(0.5 * 4f64.ln() - r2.ln())
}

pub type Lorentz = [[f64; 4]; 4];

pub fn lorentz_identity() -> Lorentz {
    let mut m = [[0.0; 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

pub fn lorentz_mul(a: &Lorentz, b: &Lorentz) -> Lorentz {
    let mut m = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    m
}

/// Boost of rapidity `t` in the `(x_axis, x₄)` plane. In the stereographic
/// chart from `+e_axis` it is the dilation `z ↦ e^t z`.
pub fn boost(axis: usize, t: f64) -> Lorentz {
    let mut m = lorentz_identity();
    let (c, s) = (t.cosh(), t.sinh());
    m[axis][axis] = c;
    m[axis][3] = s;
    m[3][axis] = s;
    m[3][3] = c;
    m
}

/// Applies the Möbius map of `l` to `x ∈ S²`. Returns the image and the
/// scale `s` with `l·(x, 1) = s·(φ(x), 1)`; the conformal factor of `φ` at
/// `x` is `1/s`.
pub fn moebius_apply(l: &Lorentz, x: &[f64; 3]) -> ([f64; 3], f64) {
    let h = [x[0], x[1], x[2], 1.0];
    let y: [f64; 4] = std::array::from_fn(|i| (0..4).map(|k| l[i][k] * h[k]).sum());
    let s = y[3];
    let mut p = [y[0] / s, y[1] / s, y[2] / s];
    let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    p.iter_mut().for_each(|t| *t /= n);
    (p, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_unit(rng: &mut ChaCha8Rng) -> [f64; 3] {
        loop {
            let v: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if n > 0.1 && n <= 1.0 {
                return v.map(|t| t / n);
            }
        }
    }

    #[test]
    fn stereographic_round_trip_on_all_poles() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for axis in 0..3 {
            for sign in [1.0, -1.0] {
                let pole = Pole { axis, sign };
                for _ in 0..200 {
                    let x = random_unit(&mut rng);
                    let back = inverse_stereographic(stereographic(&x, pole).unwrap(), pole);
                    for k in 0..3 {
                        assert!((back[k] - x[k]).abs() < 1e-12);
                    }
                }
                let mut p = [0.0; 3];
                p[axis] = sign;
                assert!(matches!(stereographic(&p, pole), Err(Error::PoleSingularity)));
            }
        }
    }

    #[test]
    fn inversion_basics() {
        let z = inversion(&[0.0, 0.0, -1.0]).unwrap();
        assert!(z.iter().all(|t| t.abs() < 1e-15));
        let e1 = inversion(&[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(e1, vec![1.0, 0.0, 0.0]);
        assert!(matches!(inversion(&[0.0, 0.0, 1.0, 0.0]), Err(Error::PoleSingularity)));
        assert!((conformal_factor_of_inversion(&[0.0, 0.0, -1.0]).unwrap() + 2f64.ln()).abs() < 1e-15);
        assert!(conformal_factor_of_inversion(&[1.0, 0.0, 0.0]).unwrap().abs() < 1e-15);
    }

    #[test]
    fn inversion_is_an_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let x: Vec<f64> = (0..4).map(|_| rng.random_range(-3.0..3.0)).collect();
            let back = inversion(&inversion(&x).unwrap()).unwrap();
            for k in 0..4 {
                assert!((back[k] - x[k]).abs() < 1e-12 * (1.0 + x[k].abs()));
            }
        }
    }

    #[test]
    fn inversion_factor_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = 1e-6;
        for _ in 0..100 {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            if ((x[0]).powi(2) + x[1].powi(2) + (x[2] - 1.0).powi(2)).sqrt() < 0.3 {
                continue;
            }
            // columns of the Jacobian by central differences
            let mut cols = Vec::new();
            for k in 0..3 {
                let mut a = x.clone();
                let mut b = x.clone();
                a[k] += h;
                b[k] -= h;
                let fa = inversion(&a).unwrap();
                let fb = inversion(&b).unwrap();
                cols.push((0..3).map(|i| (fa[i] - fb[i]) / (2.0 * h)).collect::<Vec<f64>>());
            }
            let lambda = conformal_factor_of_inversion(&x).unwrap().exp();
            for i in 0..3 {
                for j in 0..3 {
                    let g: f64 = (0..3).map(|k| cols[i][k] * cols[j][k]).sum();
                    let want = if i == j { lambda * lambda } else { 0.0 };
                    assert!((g - want).abs() < 1e-6 * lambda * lambda, "{g} vs {want}");
                }
            }
        }
    }

    #[test]
    fn boost_is_a_stereographic_dilation() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for axis in 0..3 {
            let pole = Pole { axis, sign: 1.0 };
            let t = 0.7;
            let b = boost(axis, t);
            for _ in 0..50 {
                let x = random_unit(&mut rng);
                let (y, s) = moebius_apply(&b, &x);
                let zx = stereographic(&x, pole).unwrap();
                let zy = stereographic(&y, pole).unwrap();
                for k in 0..2 {
                    assert!((zy[k] - t.exp() * zx[k]).abs() < 1e-10 * (1.0 + zy[k].abs()));
                }
                // conformal scale of z -> e^t z read through the chart metric 4/(1+|z|²)²
                let nx = zx[0] * zx[0] + zx[1] * zx[1];
                let ny = zy[0] * zy[0] + zy[1] * zy[1];
                let lambda = t.exp() * (1.0 + nx) / (1.0 + ny);
                assert!((lambda * s - 1.0).abs() < 1e-10);
            }
        }
    }
}
