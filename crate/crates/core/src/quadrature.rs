//! Exact integration over a triangle intersected with a disk (or the
//! region `{α|z|² + 2β·z − γ < 0}`), and face-local frames for lifting
//! triangles of R^n into the plane.

use std::f64::consts::PI;

use crate::linalg::{dot, norm, sub};

pub type P2 = [f64; 2];

/// Monomial moments `∫ 1, x, y, x², xy, y²` over a planar region.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub m0: f64,
    pub mx: f64,
    pub my: f64,
    pub mxx: f64,
    pub mxy: f64,
    pub myy: f64,
}

impl std::ops::Add for Moments {
    type Output = Moments;
    fn add(self, o: Moments) -> Moments {
        Moments {
            m0: self.m0 + o.m0,
            mx: self.mx + o.mx,
            my: self.my + o.my,
            mxx: self.mxx + o.mxx,
            mxy: self.mxy + o.mxy,
            myy: self.myy + o.myy,
        }
    }
}

impl std::ops::Sub for Moments {
    type Output = Moments;
    fn sub(self, o: Moments) -> Moments {
        Moments {
            m0: self.m0 - o.m0,
            mx: self.mx - o.mx,
            my: self.my - o.my,
            mxx: self.mxx - o.mxx,
            mxy: self.mxy - o.mxy,
            myy: self.myy - o.myy,
        }
    }
}

impl Moments {
    /// Signed moments of a triangle (positive when counterclockwise). The
    /// edge-midpoint rule is exact for quadratics.
    pub fn triangle(a: P2, b: P2, c: P2) -> Moments {
        let area = 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
        let mids = [
            [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0],
            [(b[0] + c[0]) / 2.0, (b[1] + c[1]) / 2.0],
            [(c[0] + a[0]) / 2.0, (c[1] + a[1]) / 2.0],
        ];
        let w = area / 3.0;
        let mut m = Moments {
            m0: area,
            ..Default::default()
        };
        for p in mids {
            m.mx += w * p[0];
            m.my += w * p[1];
            m.mxx += w * p[0] * p[0];
            m.mxy += w * p[0] * p[1];
            m.myy += w * p[1] * p[1];
        }
        m
    }

    /// Circular sector of radius `r` about `c` from angle `t0`, sweeping
    /// `dt` counterclockwise.
    pub fn sector(c: P2, r: f64, t0: f64, dt: f64) -> Moments {
        let t1 = t0 + dt;
        let (s0, c0) = t0.sin_cos();
        let (s1, c1) = t1.sin_cos();
        let r2 = r * r;
        let r3 = r2 * r;
        let r4 = r2 * r2;
        // moments about the center
        let m0 = 0.5 * r2 * dt;
        let mx = r3 / 3.0 * (s1 - s0);
        let my = r3 / 3.0 * (c0 - c1);
        let s2 = (2.0 * t1).sin() - (2.0 * t0).sin();
        let mxx = r4 / 4.0 * (dt / 2.0 + s2 / 4.0);
        let myy = r4 / 4.0 * (dt / 2.0 - s2 / 4.0);
        let mxy = r4 / 8.0 * (s1 * s1 - s0 * s0);
        Moments {
            m0,
            mx: mx + c[0] * m0,
            my: my + c[1] * m0,
            mxx: mxx + 2.0 * c[0] * mx + c[0] * c[0] * m0,
            mxy: mxy + c[0] * my + c[1] * mx + c[0] * c[1] * m0,
            myy: myy + 2.0 * c[1] * my + c[1] * c[1] * m0,
        }
    }

    pub fn disk(c: P2, r: f64) -> Moments {
        Moments::sector(c, r, 0.0, 2.0 * PI)
    }

    /// `∫ q0 + q1 x + q2 y + q3 x² + q4 xy + q5 y²`.
    pub fn integrate(&self, q: &[f64; 6]) -> f64 {
        q[0] * self.m0 + q[1] * self.mx + q[2] * self.my + q[3] * self.mxx + q[4] * self.mxy + q[5] * self.myy
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Mark {
    Vertex,
    Entry,
    Exit,
}

/// Boundary points of `tri ∩ {|z - c| < r}` in counterclockwise order,
/// tagged by how the boundary passes through them.
fn disk_walk(tri: &[P2; 3], c: P2, r: f64) -> Vec<(P2, Mark)> {
    let r2 = r * r;
    let mut out = Vec::with_capacity(6);
    for k in 0..3 {
        let p = tri[k];
        let q = tri[(k + 1) % 3];
        let w = [p[0] - c[0], p[1] - c[1]];
        let d = [q[0] - p[0], q[1] - p[1]];
        let a = d[0] * d[0] + d[1] * d[1];
        let b = w[0] * d[0] + w[1] * d[1];
        let c0 = w[0] * w[0] + w[1] * w[1] - r2;
        if c0 < 0.0 {
            out.push((p, Mark::Vertex));
        }
        let disc = b * b - a * c0;
        if disc <= 0.0 {
            continue;
        }
        let sq = disc.sqrt();
        let t_in = (-b - sq) / a;
        let t_out = (-b + sq) / a;
        let at = |t: f64| [p[0] + t * d[0], p[1] + t * d[1]];
        if t_in > 0.0 && t_in < 1.0 {
            out.push((at(t_in), Mark::Entry));
        }
        if t_out > 0.0 && t_out < 1.0 {
            out.push((at(t_out), Mark::Exit));
        }
    }
    out
}

fn point_in_triangle(tri: &[P2; 3], z: P2) -> bool {
    let orient = |a: P2, b: P2| (b[0] - a[0]) * (z[1] - a[1]) - (b[1] - a[1]) * (z[0] - a[0]);
    let s0 = orient(tri[0], tri[1]);
    let s1 = orient(tri[1], tri[2]);
    let s2 = orient(tri[2], tri[0]);
    (s0 >= 0.0 && s1 >= 0.0 && s2 >= 0.0) || (s0 <= 0.0 && s1 <= 0.0 && s2 <= 0.0)
}

/// Exact moments of a counterclockwise triangle intersected with a disk.
pub fn triangle_disk_moments(tri: &[P2; 3], c: P2, r: f64) -> Moments {
    if !(r > 0.0) {
        return Moments::default();
    }
    let walk = disk_walk(tri, c, r);
    let crossings = walk.iter().any(|(_, m)| *m != Mark::Vertex);
    if !crossings {
        return if walk.len() == 3 {
            Moments::triangle(tri[0], tri[1], tri[2])
        } else if point_in_triangle(tri, c) {
            Moments::disk(c, r)
        } else {
            Moments::default()
        };
    }
    let mut m = Moments::default();
    let p0 = walk[0].0;
    for i in 1..walk.len().saturating_sub(1) {
        m = m + Moments::triangle(p0, walk[i].0, walk[i + 1].0);
    }
    for i in 0..walk.len() {
        let (a, mark) = walk[i];
        if mark != Mark::Exit {
            continue;
        }
        let (b, _) = walk[(i + 1) % walk.len()];
        let ta = (a[1] - c[1]).atan2(a[0] - c[0]);
        let tb = (b[1] - c[1]).atan2(b[0] - c[0]);
        let dt = (tb - ta).rem_euclid(2.0 * PI);
        m = m + Moments::sector(c, r, ta, dt) - Moments::triangle(c, a, b);
    }
    m
}

/// Area of a circular segment cut by a chord of length `chord` from a
/// circle of curvature `kappa`, `arc` selecting the major side.
fn segment_area(chord: f64, kappa: f64, major: bool) -> f64 {
    if kappa <= 0.0 {
        return 0.0;
    }
    let half = (0.5 * chord * kappa).min(1.0);
    let theta = 2.0 * half.asin();
    if major {
        let big = 2.0 * PI - theta;
        return (big - big.sin()) / (2.0 * kappa * kappa);
    }
    let tms = if theta < 1e-3 {
        let t3 = theta * theta * theta;
        t3 / 6.0 - t3 * theta * theta / 120.0
    } else {
        theta - theta.sin()
    };
    tms / (2.0 * kappa * kappa)
}

/// The planar region `{α|z|² + 2β·z − γ < 0}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadric {
    pub alpha: f64,
    pub beta: P2,
    pub gamma: f64,
}

impl Quadric {
    pub fn eval(&self, z: P2) -> f64 {
        self.alpha * (z[0] * z[0] + z[1] * z[1]) + 2.0 * (self.beta[0] * z[0] + self.beta[1] * z[1]) - self.gamma
    }

    fn negated(&self) -> Quadric {
        Quadric {
            alpha: -self.alpha,
            beta: [-self.beta[0], -self.beta[1]],
            gamma: -self.gamma,
        }
    }
}

/// Area of a counterclockwise triangle intersected with a [`Quadric`]
/// region. Stable when the boundary circle degenerates to a line.
pub fn triangle_quadric_area(tri: &[P2; 3], g: &Quadric) -> f64 {
    let full = 0.5 * ((tri[1][0] - tri[0][0]) * (tri[2][1] - tri[0][1]) - (tri[2][0] - tri[0][0]) * (tri[1][1] - tri[0][1]));
    if g.alpha < 0.0 {
        // complement of a disk
        return full - convex_quadric_area(tri, &g.negated());
    }
    convex_quadric_area(tri, g)
}

/// `g.alpha >= 0`: a disk or half-plane.
fn convex_quadric_area(tri: &[P2; 3], g: &Quadric) -> f64 {
    let mut pts: Vec<(P2, Mark)> = Vec::with_capacity(6);
    for k in 0..3 {
        let p = tri[k];
        let q = tri[(k + 1) % 3];
        let d = [q[0] - p[0], q[1] - p[1]];
        // G(p + t d) = a t² + 2 b t + c0
        let a = g.alpha * (d[0] * d[0] + d[1] * d[1]);
        let b = g.alpha * (p[0] * d[0] + p[1] * d[1]) + g.beta[0] * d[0] + g.beta[1] * d[1];
        let c0 = g.eval(p);
        if c0 < 0.0 {
            pts.push((p, Mark::Vertex));
        }
        let at = |t: f64| [p[0] + t * d[0], p[1] + t * d[1]];
        let disc = b * b - a * c0;
        if disc <= 0.0 {
            continue;
        }
        let sq = disc.sqrt();
        // numerically stable pair of roots; t_in <= t_out when a > 0
        let (t_in, t_out) = if a == 0.0 {
            if b == 0.0 {
                continue;
            }
            let t = -c0 / (2.0 * b);
            if b < 0.0 {
                (t, f64::INFINITY)
            } else {
                (f64::NEG_INFINITY, t)
            }
        } else {
            let qv = -(b + b.signum() * sq);
            let (r1, r2) = (qv / a, c0 / qv);
            (r1.min(r2), r1.max(r2))
        };
        if t_in > 0.0 && t_in < 1.0 {
            pts.push((at(t_in), Mark::Entry));
        }
        if t_out > 0.0 && t_out < 1.0 {
            pts.push((at(t_out), Mark::Exit));
        }
    }
    let crossings = pts.iter().any(|(_, m)| *m != Mark::Vertex);
    if !crossings {
        if pts.len() == 3 {
            return 0.5 * ((tri[1][0] - tri[0][0]) * (tri[2][1] - tri[0][1]) - (tri[2][0] - tri[0][0]) * (tri[1][1] - tri[0][1]));
        }
        if g.alpha > 0.0 {
            let c = [-g.beta[0] / g.alpha, -g.beta[1] / g.alpha];
            if point_in_triangle(tri, c) {
                let r2 = (g.beta[0] * g.beta[0] + g.beta[1] * g.beta[1] + g.alpha * g.gamma) / (g.alpha * g.alpha);
                return PI * r2.max(0.0);
            }
        }
        return 0.0;
    }
    let mut area = 0.0;
    for i in 0..pts.len() {
        let a = pts[i].0;
        let b = pts[(i + 1) % pts.len()].0;
        area += 0.5 * (a[0] * b[1] - a[1] * b[0]);
    }
    if g.alpha > 0.0 {
        let rad2 = g.beta[0] * g.beta[0] + g.beta[1] * g.beta[1] + g.alpha * g.gamma;
        let kappa = g.alpha / rad2.max(0.0).sqrt();
        let c = [-g.beta[0] / g.alpha, -g.beta[1] / g.alpha];
        for i in 0..pts.len() {
            if pts[i].1 != Mark::Exit {
                continue;
            }
            let a = pts[i].0;
            let b = pts[(i + 1) % pts.len()].0;
            let chord = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
            // the arc runs counterclockwise from a to b; it is the major
            // arc when the center lies to the right of the chord a -> b
            let side = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
            area += segment_area(chord, kappa, side < 0.0);
        }
    }
    area
}

/// Orthonormal in-plane frame of a triangle in R^n, with `p0` at the origin
/// and `p1` on the positive first axis.
#[derive(Debug, Clone)]
pub struct FaceFrame {
    pub origin: Vec<f64>,
    pub e1: Vec<f64>,
    pub e2: Vec<f64>,
    /// local coordinates of the three corners
    pub local: [P2; 3],
}

impl FaceFrame {
    pub fn new(p0: &[f64], p1: &[f64], p2: &[f64]) -> FaceFrame {
        let u = sub(p1, p0);
        let l1 = norm(&u);
        let e1: Vec<f64> = u.iter().map(|x| x / l1).collect();
        let w = sub(p2, p0);
        let a = dot(&w, &e1);
        let mut e2: Vec<f64> = w.iter().zip(&e1).map(|(wi, ei)| wi - a * ei).collect();
        let b = norm(&e2);
        e2.iter_mut().for_each(|x| *x /= b);
        FaceFrame {
            origin: p0.to_vec(),
            e1,
            e2,
            local: [[0.0, 0.0], [l1, 0.0], [a, b]],
        }
    }

    /// Local coordinates of the projection of `x` and its squared distance
    /// to the face plane.
    pub fn project(&self, x: &[f64]) -> (P2, f64) {
        let d = sub(x, &self.origin);
        let s = dot(&d, &self.e1);
        let t = dot(&d, &self.e2);
        let off = (dot(&d, &d) - s * s - t * t).max(0.0);
        ([s, t], off)
    }

    pub fn area(&self) -> f64 {
        0.5 * self.local[1][0] * self.local[2][1]
    }

    /// The component of `w` orthogonal to the face plane.
    pub fn normal_part(&self, w: &[f64]) -> Vec<f64> {
        let a = dot(w, &self.e1);
        let b = dot(w, &self.e2);
        w.iter()
            .zip(self.e1.iter().zip(&self.e2))
            .map(|(wi, (x, y))| wi - a * x - b * y)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TRI: [P2; 3] = [[0.0, 0.0], [2.0, 0.0], [0.5, 1.5]];

    /// Monte-Carlo-free oracle: fine midpoint grid over the bounding box.
    fn grid_moments(tri: &[P2; 3], inside: impl Fn(P2) -> bool) -> Moments {
        let n = 1500;
        let (x0, x1, y0, y1) = (-0.1, 2.1, -0.1, 1.6);
        let (hx, hy) = ((x1 - x0) / n as f64, (y1 - y0) / n as f64);
        let mut m = Moments::default();
        for i in 0..n {
            for j in 0..n {
                let z = [x0 + (i as f64 + 0.5) * hx, y0 + (j as f64 + 0.5) * hy];
                if point_in_triangle(tri, z) && inside(z) {
                    let w = hx * hy;
                    m.m0 += w;
                    m.mx += w * z[0];
                    m.my += w * z[1];
                    m.mxx += w * z[0] * z[0];
                    m.mxy += w * z[0] * z[1];
                    m.myy += w * z[1] * z[1];
                }
            }
        }
        m
    }

    fn close(a: &Moments, b: &Moments, tol: f64) -> bool {
        [
            (a.m0, b.m0),
            (a.mx, b.mx),
            (a.my, b.my),
            (a.mxx, b.mxx),
            (a.mxy, b.mxy),
            (a.myy, b.myy),
        ]
        .iter()
        .all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn disk_clip_matches_grid_oracle() {
        let cases = [
            ([0.8, 0.4], 0.6),  // crosses two edges
            ([0.8, 0.5], 0.3),  // fully inside
            ([1.0, -0.3], 0.6), // chord through one edge
            ([0.0, 0.0], 1.0),  // centered on a corner
            ([0.7, 0.5], 5.0),  // covers the triangle
            ([3.0, 3.0], 0.5),  // disjoint
        ];
        for (c, r) in cases {
            let exact = triangle_disk_moments(&TRI, c, r);
            let grid = grid_moments(&TRI, |z| (z[0] - c[0]).powi(2) + (z[1] - c[1]).powi(2) < r * r);
            assert!(close(&exact, &grid, 3e-3), "{c:?} {r}: {exact:?} vs {grid:?}");
        }
    }

    #[test]
    fn quadric_area_matches_disk_moments() {
        for (c, r) in [([0.8, 0.4], 0.6), ([0.8, 0.5], 0.3), ([1.0, -0.3], 0.6), ([0.2, 1.4], 0.9)] {
            // G = |z - c|² - r²
            let g = Quadric {
                alpha: 1.0,
                beta: [-c[0], -c[1]],
                gamma: r * r - c[0] * c[0] - c[1] * c[1],
            };
            let a = triangle_quadric_area(&TRI, &g);
            let b = triangle_disk_moments(&TRI, c, r).m0;
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            // complement
            let out = triangle_quadric_area(&TRI, &g.negated());
            assert!((a + out - 1.5).abs() < 1e-12);
        }
    }

    #[test]
    fn huge_circle_tends_to_half_plane() {
        // circle through (1, 0) and (1, 1) with huge radius on the right
        let big = 1e9;
        let c = [1.0 + big, 0.5];
        let g = Quadric {
            alpha: 1.0 / big,
            beta: [-c[0] / big, -c[1] / big],
            // r² - |c|² expanded by hand to avoid cancellation
            gamma: (-2.0 * big - 1.25) / big,
        };
        let half = Quadric {
            alpha: 0.0,
            beta: [-0.5, 0.0],
            gamma: -1.0,
        };
        let a = triangle_quadric_area(&TRI, &g);
        let b = triangle_quadric_area(&TRI, &half);
        assert!((a - b).abs() < 1e-7, "{a} vs {b}");
        let grid = grid_moments(&TRI, |z| z[0] > 1.0).m0;
        assert!((b - grid).abs() < 3e-3, "{b} vs {grid}");
    }

    #[test]
    fn face_frame_lifts_isometrically() {
        let p = [vec![1.0, 0.0, 2.0, -1.0], vec![2.0, 1.0, 2.0, 0.0], vec![0.0, 1.5, 3.0, 1.0]];
        let f = FaceFrame::new(&p[0], &p[1], &p[2]);
        let area = crate::linalg::triangle_area(&p[0], &p[1], &p[2]);
        assert!((f.area() - area).abs() < 1e-12);
        for (k, q) in p.iter().enumerate() {
            let (z, off) = f.project(q);
            assert!(off < 1e-12);
            assert!((z[0] - f.local[k][0]).abs() < 1e-12 && (z[1] - f.local[k][1]).abs() < 1e-12);
        }
    }
}
