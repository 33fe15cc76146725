//! Deterministic test-surface families. Every generated mesh is oriented
//! outward and area-normalized to 4π.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonics::real_sh;
use crate::mesh::{normalize_area, EmbeddedMesh};

/// Neck radii at or above this are rejected.
pub const NECK_MAX: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyKind {
    Icosphere {
        level: u32,
    },
    /// `x -> (1 + eps * Y_lm(x)) x` in R^3.
    HarmonicPerturbed {
        level: u32,
        eps: f64,
        l: u32,
        m: i32,
    },
    /// `x -> (x, eps * Y_lm(x), 0, ...)` in R^ambient_dim.
    CodimLift {
        level: u32,
        eps: f64,
        l: u32,
        m: i32,
        ambient_dim: usize,
    },
    Ellipsoid {
        level: u32,
        axes: [f64; 3],
    },
    /// Two unit-sphere caps joined by a catenoid of neck radius `neck`.
    CatenoidNeck {
        neck: f64,
        segments: usize,
    },
    Torus {
        major: f64,
        minor: f64,
        segments: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jitter {
    pub seed: u64,
    /// displacement amplitude relative to the mean edge length
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    #[serde(flatten)]
    pub kind: FamilyKind,
    #[serde(default)]
    pub jitter: Option<Jitter>,
}

impl From<FamilyKind> for FamilySpec {
    fn from(kind: FamilyKind) -> Self {
        FamilySpec { kind, jitter: None }
    }
}

impl FamilySpec {
    pub fn icosphere(level: u32) -> Self {
        FamilyKind::Icosphere { level }.into()
    }

    pub fn harmonic(level: u32, eps: f64, l: u32, m: i32) -> Self {
        FamilyKind::HarmonicPerturbed { level, eps, l, m }.into()
    }

    pub fn codim_lift(level: u32, eps: f64, l: u32, m: i32, ambient_dim: usize) -> Self {
        FamilyKind::CodimLift {
            level,
            eps,
            l,
            m,
            ambient_dim,
        }
        .into()
    }

    pub fn ellipsoid(level: u32, axes: [f64; 3]) -> Self {
        FamilyKind::Ellipsoid { level, axes }.into()
    }

    pub fn catenoid_neck(neck: f64, segments: usize) -> Self {
        FamilyKind::CatenoidNeck { neck, segments }.into()
    }

    pub fn torus(major: f64, minor: f64, segments: usize) -> Self {
        FamilyKind::Torus {
            major,
            minor,
            segments,
        }
        .into()
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidSpec(msg.to_string()));
        let level_ok = |level: u32| level <= 7;
        match &self.kind {
            FamilyKind::Icosphere { level } if !level_ok(*level) => bad("level > 7"),
            FamilyKind::HarmonicPerturbed { level, eps, l, m }
            | FamilyKind::CodimLift {
                level, eps, l, m, ..
            } => {
                if !level_ok(*level) {
                    return bad("level > 7");
                }
                if m.unsigned_abs() > *l {
                    return bad("|m| > l");
                }
                if !eps.is_finite() || eps.abs() >= 0.5 {
                    return bad("|eps| must be < 0.5");
                }
                if let FamilyKind::CodimLift { ambient_dim, .. } = &self.kind {
                    if *ambient_dim < 4 {
                        return bad("codim lift needs ambient_dim >= 4");
                    }
                }
                Ok(())
            }
            FamilyKind::Ellipsoid { level, axes } => {
                if !level_ok(*level) {
                    return bad("level > 7");
                }
                if axes.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
                    return bad("semi-axes must be positive");
                }
                Ok(())
            }
            FamilyKind::CatenoidNeck { neck, segments } => {
                if !(*neck > 0.0) {
                    return bad("neck radius must be positive");
                }
                if *segments < 12 {
                    return bad("need at least 12 segments");
                }
                Ok(())
            }
            FamilyKind::Torus {
                major,
                minor,
                segments,
            } => {
                if !(*minor > 0.0) || !(*major > *minor) {
                    return bad("torus needs major > minor > 0");
                }
                if *segments < 6 {
                    return bad("need at least 6 segments");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Builds the mesh described by `spec`.
pub fn generate(spec: &FamilySpec) -> Result<EmbeddedMesh> {
    spec.validate()?;
    let raw = match &spec.kind {
        FamilyKind::Icosphere { level } => unit_icosphere(*level)?,
        FamilyKind::HarmonicPerturbed { level, eps, l, m } => {
            let base = unit_icosphere(*level)?;
            if *eps == 0.0 {
                base
            } else {
                base.map_positions(|p| {
                    let s = 1.0 + eps * real_sh(*l, *m, p);
                    p.iter().map(|x| s * x).collect()
                })?
            }
        }
        FamilyKind::CodimLift {
            level,
            eps,
            l,
            m,
            ambient_dim,
        } => unit_icosphere(*level)?.map_positions(|p| {
            let mut q = p.to_vec();
            q.resize(*ambient_dim, 0.0);
            q[3] = eps * real_sh(*l, *m, p);
            q
        })?,
        FamilyKind::Ellipsoid { level, axes } => unit_icosphere(*level)?
            .map_positions(|p| vec![axes[0] * p[0], axes[1] * p[1], axes[2] * p[2]])?,
        FamilyKind::CatenoidNeck { neck, segments } => catenoid_neck(*neck, *segments)?,
        FamilyKind::Torus {
            major,
            minor,
            segments,
        } => torus(*major, *minor, *segments)?,
    };
    let jittered = match spec.jitter {
        Some(j) if j.amplitude > 0.0 => jitter(&raw, j)?,
        _ => raw,
    };
    normalize_area(&jittered)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Eps,
    Level,
    Neck,
}

/// Generates one mesh per grid value, in grid order.
pub fn sweep(
    template: &FamilySpec,
    param: SweepParam,
    grid: &[f64],
) -> Result<Vec<(FamilySpec, EmbeddedMesh)>> {
    if grid.is_empty() {
        return Err(Error::InvalidSpec("empty parameter grid".into()));
    }
    grid.iter()
        .map(|&value| {
            let spec = with_param(template, param, value)?;
            let mesh = generate(&spec)?;
            Ok((spec, mesh))
        })
        .collect()
}

fn with_param(template: &FamilySpec, param: SweepParam, value: f64) -> Result<FamilySpec> {
    let mut spec = template.clone();
    let mismatch = || {
        Error::InvalidSpec(format!(
            "parameter {param:?} does not apply to {:?}",
            template.kind
        ))
    };
    match (&mut spec.kind, param) {
        (FamilyKind::HarmonicPerturbed { eps, .. }, SweepParam::Eps)
        | (FamilyKind::CodimLift { eps, .. }, SweepParam::Eps) => *eps = value,
        (FamilyKind::Icosphere { level }, SweepParam::Level)
        | (FamilyKind::HarmonicPerturbed { level, .. }, SweepParam::Level)
        | (FamilyKind::CodimLift { level, .. }, SweepParam::Level)
        | (FamilyKind::Ellipsoid { level, .. }, SweepParam::Level) => {
            if value < 0.0 || value.fract() != 0.0 {
                return Err(Error::InvalidSpec(format!("level {value} is not an integer")));
            }
            *level = value as u32;
        }
        (FamilyKind::CatenoidNeck { neck, .. }, SweepParam::Neck) => *neck = value,
        _ => return Err(mismatch()),
    }
    Ok(spec)
}

/// Subdivided icosahedron projected to the unit sphere (not area-normalized).
pub fn unit_icosphere(level: u32) -> Result<EmbeddedMesh> {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<[f64; 3]> = vec![
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    for v in verts.iter_mut() {
        *v = unit3(*v);
    }
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<[f64; 3]>| -> usize {
            let key = (a.min(b), a.max(b));
            *cache.entry(key).or_insert_with(|| {
                let (p, q) = (verts[a], verts[b]);
                verts.push(unit3([p[0] + q[0], p[1] + q[1], p[2] + q[2]]));
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for &[a, b, c] in &faces {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    let positions = verts.iter().flatten().copied().collect();
    orient_outward(EmbeddedMesh::new(3, positions, faces)?)
}

fn unit3(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Flips all faces if the enclosed signed volume (first three coordinates)
/// is negative.
fn orient_outward(mesh: EmbeddedMesh) -> Result<EmbeddedMesh> {
    let mut vol = 0.0;
    for &[a, b, c] in mesh.faces() {
        let (p, q, r) = (mesh.position(a), mesh.position(b), mesh.position(c));
        vol += p[0] * (q[1] * r[2] - q[2] * r[1]) - p[1] * (q[0] * r[2] - q[2] * r[0])
            + p[2] * (q[0] * r[1] - q[1] * r[0]);
    }
    if vol >= 0.0 {
        return Ok(mesh);
    }
    let faces = mesh.faces().iter().map(|&[a, b, c]| [a, c, b]).collect();
    EmbeddedMesh::new(mesh.ambient_dim(), mesh.positions().to_vec(), faces)
}

fn jitter(mesh: &EmbeddedMesh, j: Jitter) -> Result<EmbeddedMesh> {
    let mut rng = ChaCha8Rng::seed_from_u64(j.seed);
    let h = mesh.mean_edge_length() * j.amplitude;
    let positions = mesh
        .positions()
        .iter()
        .map(|x| x + h * (rng.random::<f64>() * 2.0 - 1.0))
        .collect();
    mesh.with_positions(mesh.ambient_dim(), positions)
}

fn torus(major: f64, minor: f64, segments: usize) -> Result<EmbeddedMesh> {
    let nu = segments;
    let nv = ((segments as f64 * minor / major).round() as usize).max(6);
    let mut positions = Vec::with_capacity(nu * nv * 3);
    for i in 0..nu {
        let u = 2.0 * PI * i as f64 / nu as f64;
        for j in 0..nv {
            let v = 2.0 * PI * j as f64 / nv as f64;
            let r = major + minor * v.cos();
            positions.extend([r * u.cos(), r * u.sin(), minor * v.sin()]);
        }
    }
    let idx = |i: usize, j: usize| (i % nu) * nv + (j % nv);
    let mut faces = Vec::with_capacity(2 * nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    orient_outward(EmbeddedMesh::new(3, positions, faces)?)
}

/// Meridian profile of the neck surface: two unit-sphere caps joined by the
/// catenoid `r = a cosh(z / a)` with matching position and tangent.
#[derive(Debug, Clone, Copy)]
pub struct NeckProfile {
    pub a: f64,
    /// height of the junction circles `z = ±z_j`
    pub z_junction: f64,
    /// the caps are centered at `z = ±center`
    pub center: f64,
    /// polar angle of the junction measured from the cap's own pole
    pub psi_junction: f64,
}

impl NeckProfile {
    pub fn new(a: f64) -> Result<Self> {
        if !(a > 0.0) || a >= NECK_MAX {
            return Err(Error::TangencyFailure(a));
        }
        // tangency: a cosh^2(z_j / a) = 1
        let s = (1.0 / a.sqrt()).acosh();
        let z_junction = a * s;
        let center = z_junction + (1.0 - a).sqrt();
        let psi_junction = (-(1.0 - a).sqrt()).acos();
        Ok(NeckProfile {
            a,
            z_junction,
            center,
            psi_junction,
        })
    }

    /// Catenoid arclength from the waist to the junction.
    pub fn catenoid_half_length(&self) -> f64 {
        self.a * (self.z_junction / self.a).sinh()
    }

    /// `(r, z)` at arclength `s` measured from the bottom pole.
    pub fn point(&self, s: f64) -> (f64, f64) {
        let half_cat = self.catenoid_half_length();
        let total = self.total_length();
        if s <= self.psi_junction {
            (s.sin(), -self.center - s.cos())
        } else if s >= total - self.psi_junction {
            let psi = total - s;
            (psi.sin(), self.center + psi.cos())
        } else {
            let t = s - self.psi_junction - half_cat;
            let z = self.a * (t / self.a).asinh();
            (self.a * (z / self.a).cosh(), z)
        }
    }

    pub fn total_length(&self) -> f64 {
        2.0 * self.psi_junction + 2.0 * self.catenoid_half_length()
    }

    /// Conformal coordinate `∫ ds / r` relative to the bottom cap's widest
    /// circle; valid on the stretch between the two widest circles.
    fn sigma(&self, s: f64) -> f64 {
        let half_cat = self.catenoid_half_length();
        let total = self.total_length();
        let cap = |psi: f64| (psi / 2.0).tan().ln();
        let sig_junction = cap(self.psi_junction);
        let cat_sigma = 2.0 * self.z_junction / self.a;
        if s <= self.psi_junction {
            cap(s)
        } else if s >= total - self.psi_junction {
            2.0 * sig_junction + cat_sigma - cap(total - s)
        } else {
            let t = s - self.psi_junction - half_cat;
            let z = self.a * (t / self.a).asinh();
            sig_junction + (z + self.z_junction) / self.a
        }
    }

    /// Residual of the minimal-surface ODE `r r'' = 1 + r'^2` for the
    /// catenoid graph `r(z)` at height `z`.
    pub fn catenoid_ode_residual(&self, z: f64) -> f64 {
        let r = self.a * (z / self.a).cosh();
        let r1 = (z / self.a).sinh();
        let r2 = (z / self.a).cosh() / self.a;
        r * r2 - (1.0 + r1 * r1)
    }
}

struct Ring {
    s: f64,
    count: usize,
    offset: f64,
}

fn catenoid_neck(a: f64, segments: usize) -> Result<EmbeddedMesh> {
    let prof = NeckProfile::new(a)?;
    let n_max = segments.next_power_of_two().max(12);
    // ring counts are 6 * 2^k; choose the largest not exceeding n_max
    let mut n_neck = 6;
    while n_neck * 2 <= n_max {
        n_neck *= 2;
    }
    let h = 2.0 * PI / n_neck as f64;
    let total = prof.total_length();
    let widest_lo = PI / 2.0;
    let widest_hi = total - PI / 2.0;

    let mut rings: Vec<Ring> = Vec::new();
    // pole regions: uniform arclength spacing, ring counts decimated by radius
    let m = ((widest_lo / (h * 3f64.sqrt() / 2.0)).round() as usize).max(2);
    let count_for = |r: f64| {
        let mut c = 6;
        while c * 2 <= n_neck && (c * 2) as f64 <= 2.0 * PI * r / h * 1.5 {
            c *= 2;
        }
        c
    };
    for k in 1..=m {
        let s = widest_lo * k as f64 / m as f64;
        let (r, _) = prof.point(s);
        rings.push(Ring {
            s,
            count: if k == m { n_neck } else { count_for(r) },
            offset: 0.0,
        });
    }
    // conformal stretch between the widest circles: uniform in sigma
    let sig_lo = prof.sigma(widest_lo);
    let sig_hi = prof.sigma(widest_hi);
    let d_sigma = h * 3f64.sqrt() / 2.0;
    let steps = (((sig_hi - sig_lo) / d_sigma).round() as usize).max(2);
    for k in 1..steps {
        let target = sig_lo + (sig_hi - sig_lo) * k as f64 / steps as f64;
        // sigma is increasing in s
        let (mut lo, mut hi) = (widest_lo, widest_hi);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if prof.sigma(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        rings.push(Ring {
            s: 0.5 * (lo + hi),
            count: n_neck,
            offset: 0.0,
        });
    }
    for k in (1..=m).rev() {
        let s = total - widest_lo * k as f64 / m as f64;
        let (r, _) = prof.point(s);
        rings.push(Ring {
            s,
            count: if k == m { n_neck } else { count_for(r) },
            offset: 0.0,
        });
    }
    // stagger consecutive rings by half a step
    for i in 1..rings.len() {
        rings[i].offset = rings[i - 1].offset + PI / rings[i].count as f64;
    }

    let mut positions = vec![0.0, 0.0, prof.point(0.0).1];
    let mut starts = Vec::with_capacity(rings.len());
    for ring in &rings {
        starts.push(positions.len() / 3);
        let (r, z) = prof.point(ring.s);
        for j in 0..ring.count {
            let phi = ring.offset + 2.0 * PI * j as f64 / ring.count as f64;
            positions.extend([r * phi.cos(), r * phi.sin(), z]);
        }
    }
    let top = positions.len() / 3;
    positions.extend([0.0, 0.0, prof.point(total).1]);

    let mut faces = Vec::new();
    let first = &rings[0];
    for j in 0..first.count {
        faces.push([0, starts[0] + (j + 1) % first.count, starts[0] + j]);
    }
    for i in 0..rings.len() - 1 {
        zipper(&rings[i], starts[i], &rings[i + 1], starts[i + 1], &mut faces);
    }
    let last = rings.len() - 1;
    let lr = &rings[last];
    for j in 0..lr.count {
        faces.push([starts[last] + j, starts[last] + (j + 1) % lr.count, top]);
    }
    orient_outward(EmbeddedMesh::new(3, positions, faces)?)
}

/// Triangulates the strip between two rings by merging their angles.
fn zipper(lower: &Ring, lower_start: usize, upper: &Ring, upper_start: usize, faces: &mut Vec<[usize; 3]>) {
    let na = lower.count;
    let nb = upper.count;
    let ang_a = |i: usize| lower.offset + 2.0 * PI * i as f64 / na as f64;
    // upper index whose angle is nearest above-or-equal to the lower start
    let mut j0 = 0usize;
    let mut best = f64::INFINITY;
    for j in 0..nb {
        let mut d = upper.offset + 2.0 * PI * j as f64 / nb as f64 - ang_a(0);
        d = d.rem_euclid(2.0 * PI);
        if d > PI {
            d -= 2.0 * PI;
        }
        if d.abs() < best {
            best = d.abs();
            j0 = j;
        }
    }
    let base_b = {
        let mut b = upper.offset + 2.0 * PI * j0 as f64 / nb as f64;
        while b - ang_a(0) > PI {
            b -= 2.0 * PI;
        }
        while ang_a(0) - b > PI {
            b += 2.0 * PI;
        }
        b
    };
    let ang_b = |k: usize| base_b + 2.0 * PI * k as f64 / nb as f64;
    let (mut i, mut k) = (0usize, 0usize);
    while i < na || k < nb {
        let ia = lower_start + i % na;
        let ib = upper_start + (j0 + k) % nb;
        let advance_a = if i == na {
            false
        } else if k == nb {
            true
        } else {
            ang_a(i + 1) < ang_b(k + 1)
        };
        if advance_a {
            faces.push([ia, lower_start + (i + 1) % na, ib]);
            i += 1;
        } else {
            faces.push([ia, upper_start + (j0 + k + 1) % nb, ib]);
            k += 1;
        }
    }
}
