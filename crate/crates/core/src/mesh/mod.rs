//! Closed oriented triangle meshes embedded in R^n.
//!
//! Positions are stored flat with stride `ambient_dim`. Connectivity lives in
//! a shared [`Topology`] so that rigid motions and rescalings reuse it.

pub mod io;

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{corner_angle, dist, triangle_area};

pub use io::{load_mesh, save_mesh, MeshFormat};

/// Faces below this fraction of the mean face area are rejected.
pub const DEGENERACY_RATIO: f64 = 1e-14;

/// Halfedge tables. Halfedge `3f + k` runs from `faces[f][k]` to
/// `faces[f][(k + 1) % 3]`.
#[derive(Debug, Clone)]
pub struct Topology {
    pub twin: Vec<usize>,
    pub next: Vec<usize>,
    /// origin vertex of each halfedge
    pub vertex: Vec<usize>,
    pub face: Vec<usize>,
    /// one outgoing halfedge per vertex
    pub vertex_out: Vec<usize>,
    pub edge_count: usize,
    pub components: usize,
}

impl Topology {
    pub fn build(num_vertices: usize, faces: &[[usize; 3]]) -> Result<Self> {
        let nh = faces.len() * 3;
        let mut undirected: HashMap<(usize, usize), Vec<usize>> = HashMap::with_capacity(nh);
        let mut vertex = vec![0; nh];
        let mut next = vec![0; nh];
        let mut face = vec![0; nh];
        for (f, tri) in faces.iter().enumerate() {
            for k in 0..3 {
                let a = tri[k];
                let b = tri[(k + 1) % 3];
                if a >= num_vertices || b >= num_vertices {
                    return Err(Error::Parse {
                        line: 0,
                        msg: format!("face {f} references missing vertex"),
                    });
                }
                if a == b {
                    return Err(Error::DegenerateFace(f));
                }
                let h = 3 * f + k;
                vertex[h] = a;
                next[h] = 3 * f + (k + 1) % 3;
                face[h] = f;
                undirected.entry((a.min(b), a.max(b))).or_default().push(h);
            }
        }
        let mut twin = vec![usize::MAX; nh];
        let mut keys: Vec<_> = undirected.keys().copied().collect();
        keys.sort_unstable();
        for key in &keys {
            let hs = &undirected[key];
            if hs.len() != 2 {
                return Err(Error::NonManifold(key.0, key.1));
            }
            let (h0, h1) = (hs[0], hs[1]);
            if vertex[h0] == vertex[h1] {
                return Err(Error::InconsistentOrientation(key.0, key.1));
            }
            twin[h0] = h1;
            twin[h1] = h0;
        }
        let mut vertex_out = vec![usize::MAX; num_vertices];
        let mut valence = vec![0usize; num_vertices];
        for h in 0..nh {
            valence[vertex[h]] += 1;
            if vertex_out[vertex[h]] == usize::MAX {
                vertex_out[vertex[h]] = h;
            }
        }
        for v in 0..num_vertices {
            let start = vertex_out[v];
            if start == usize::MAX {
                return Err(Error::NonManifoldVertex(v));
            }
            // walk the fan: outgoing -> previous in face -> twin is next outgoing
            let mut h = start;
            let mut count = 0;
            loop {
                count += 1;
                h = twin[next[next[h]]];
                if h == start || count > valence[v] {
                    break;
                }
            }
            if count != valence[v] {
                return Err(Error::NonManifoldVertex(v));
            }
        }
        let components = count_components(num_vertices, faces);
        Ok(Topology {
            twin,
            next,
            vertex,
            face,
            vertex_out,
            edge_count: keys.len(),
            components,
        })
    }

    /// Target vertex of a halfedge.
    #[inline]
    pub fn head(&self, h: usize) -> usize {
        self.vertex[self.next[h]]
    }

    /// Outgoing halfedges of `v` in fan order.
    pub fn outgoing(&self, v: usize) -> Vec<usize> {
        let start = self.vertex_out[v];
        let mut out = vec![start];
        let mut h = self.twin[self.next[self.next[start]]];
        while h != start {
            out.push(h);
            h = self.twin[self.next[self.next[h]]];
        }
        out
    }

    /// One-ring neighbors of `v` in fan order.
    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        self.outgoing(v).into_iter().map(|h| self.head(h)).collect()
    }

    /// Faces incident to `v`.
    pub fn vertex_faces(&self, v: usize) -> Vec<usize> {
        self.outgoing(v).into_iter().map(|h| self.face[h]).collect()
    }

    /// Vertices within `rings` edge hops of `v`, excluding `v`, sorted.
    pub fn k_ring(&self, v: usize, rings: usize) -> Vec<usize> {
        let mut seen = vec![v];
        let mut frontier = vec![v];
        for _ in 0..rings {
            let mut next_frontier = Vec::new();
            for &u in &frontier {
                for w in self.neighbors(u) {
                    if !seen.contains(&w) {
                        seen.push(w);
                        next_frontier.push(w);
                    }
                }
            }
            frontier = next_frontier;
        }
        seen.remove(0);
        seen.sort_unstable();
        seen
    }
}

fn count_components(nv: usize, faces: &[[usize; 3]]) -> usize {
    let mut parent: Vec<usize> = (0..nv).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for f in faces {
        for k in 1..3 {
            let a = find(&mut parent, f[0]);
            let b = find(&mut parent, f[k]);
            if a != b {
                parent[a] = b;
            }
        }
    }
    (0..nv).filter(|&v| find(&mut parent, v) == v).count()
}

/// A validated closed oriented triangle mesh in R^n. Immutable once built.
#[derive(Debug, Clone)]
pub struct EmbeddedMesh {
    dim: usize,
    positions: Vec<f64>,
    faces: Arc<Vec<[usize; 3]>>,
    topology: Arc<Topology>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshMetadata {
    pub total_area: f64,
    pub euler_characteristic: i64,
    pub genus: i64,
    pub diameter: f64,
}

impl EmbeddedMesh {
    /// Builds connectivity and checks every invariant.
    pub fn new(ambient_dim: usize, positions: Vec<f64>, faces: Vec<[usize; 3]>) -> Result<Self> {
        if ambient_dim < 3 {
            return Err(Error::InvalidSpec(format!(
                "ambient dimension {ambient_dim} < 3"
            )));
        }
        if positions.len() % ambient_dim != 0 {
            return Err(Error::Parse {
                line: 0,
                msg: "coordinate count not divisible by dimension".into(),
            });
        }
        if positions.iter().any(|x| !x.is_finite()) {
            return Err(Error::Parse {
                line: 0,
                msg: "non-finite coordinate".into(),
            });
        }
        let nv = positions.len() / ambient_dim;
        let topology = Topology::build(nv, &faces)?;
        let mesh = EmbeddedMesh {
            dim: ambient_dim,
            positions,
            faces: Arc::new(faces),
            topology: Arc::new(topology),
        };
        mesh.check_degeneracy()?;
        Ok(mesh)
    }

    fn check_degeneracy(&self) -> Result<()> {
        let areas = self.face_areas();
        let mean = areas.iter().sum::<f64>() / areas.len().max(1) as f64;
        if mean <= 0.0 {
            return Err(Error::ZeroArea);
        }
        if let Some(f) = areas.iter().position(|&a| a <= DEGENERACY_RATIO * mean) {
            return Err(Error::DegenerateFace(f));
        }
        Ok(())
    }

    /// Same connectivity, new coordinates (possibly in another dimension).
    pub fn with_positions(&self, dim: usize, positions: Vec<f64>) -> Result<Self> {
        assert_eq!(positions.len(), dim * self.num_vertices());
        let mesh = EmbeddedMesh {
            dim,
            positions,
            faces: self.faces.clone(),
            topology: self.topology.clone(),
        };
        mesh.check_degeneracy()?;
        Ok(mesh)
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn num_vertices(&self) -> usize {
        self.positions.len() / self.dim
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn num_edges(&self) -> usize {
        self.topology.edge_count
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    #[inline]
    pub fn position(&self, v: usize) -> &[f64] {
        &self.positions[v * self.dim..(v + 1) * self.dim]
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices() as i64 - self.num_edges() as i64 + self.num_faces() as i64
    }

    pub fn is_connected(&self) -> bool {
        self.topology.components == 1
    }

    pub fn face_area(&self, f: usize) -> f64 {
        let [a, b, c] = self.faces[f];
        triangle_area(self.position(a), self.position(b), self.position(c))
    }

    pub fn face_areas(&self) -> Vec<f64> {
        (0..self.num_faces()).map(|f| self.face_area(f)).collect()
    }

    pub fn total_area(&self) -> f64 {
        crate::linalg::tree_sum(&self.face_areas())
    }

    /// Barycentric dual areas: a third of every incident face.
    pub fn dual_areas(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.num_vertices()];
        for (f, tri) in self.faces.iter().enumerate() {
            let a = self.face_area(f) / 3.0;
            for &v in tri {
                out[v] += a;
            }
        }
        out
    }

    /// Mixed Voronoi areas: circumcentric cells, with obtuse faces split
    /// half to the obtuse corner and a quarter to each other corner.
    pub fn mixed_areas(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.num_vertices()];
        for (f, tri) in self.faces.iter().enumerate() {
            let p = tri.map(|v| self.position(v));
            let area = self.face_area(f);
            let angles: [f64; 3] = std::array::from_fn(|k| corner_angle(p[k], p[(k + 1) % 3], p[(k + 2) % 3]));
            if let Some(obtuse) = angles.iter().position(|&a| a > 0.5 * PI) {
                for k in 0..3 {
                    out[tri[k]] += if k == obtuse { 0.5 * area } else { 0.25 * area };
                }
                continue;
            }
            for k in 0..3 {
                let (b, c) = ((k + 1) % 3, (k + 2) % 3);
                // |ab|² cot(c) + |ac|² cot(b)
                let ab = crate::linalg::norm_sq(&crate::linalg::sub(p[b], p[k]));
                let ac = crate::linalg::norm_sq(&crate::linalg::sub(p[c], p[k]));
                out[tri[k]] += (ab / angles[c].tan() + ac / angles[b].tan()) / 8.0;
            }
        }
        out
    }

    /// 2π minus the sum of incident corner angles.
    pub fn angle_defects(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.num_vertices()];
        for tri in self.faces.iter() {
            for k in 0..3 {
                let a = tri[k];
                let b = tri[(k + 1) % 3];
                let c = tri[(k + 2) % 3];
                sums[a] += corner_angle(self.position(a), self.position(b), self.position(c));
            }
        }
        sums.into_iter().map(|s| 2.0 * PI - s).collect()
    }

    pub fn face_centroid(&self, f: usize) -> Vec<f64> {
        let [a, b, c] = self.faces[f];
        (0..self.dim)
            .map(|i| (self.position(a)[i] + self.position(b)[i] + self.position(c)[i]) / 3.0)
            .collect()
    }

    /// Area-weighted centroid of the surface.
    pub fn centroid(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.dim];
        let mut total = 0.0;
        for f in 0..self.num_faces() {
            let a = self.face_area(f);
            let fc = self.face_centroid(f);
            for i in 0..self.dim {
                c[i] += a * fc[i];
            }
            total += a;
        }
        c.iter_mut().for_each(|x| *x /= total);
        c
    }

    /// Mean edge length.
    pub fn mean_edge_length(&self) -> f64 {
        let t = &self.topology;
        let mut sum = 0.0;
        let mut count = 0;
        for h in 0..t.twin.len() {
            if h < t.twin[h] {
                sum += dist(self.position(t.vertex[h]), self.position(t.head(h)));
                count += 1;
            }
        }
        sum / count.max(1) as f64
    }

    /// Maximum pairwise vertex distance.
    pub fn diameter(&self) -> f64 {
        let n = self.num_vertices();
        (0..n)
            .into_par_iter()
            .map(|i| {
                let p = self.position(i);
                (i + 1..n)
                    .map(|j| dist(p, self.position(j)))
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }

    pub fn metadata(&self) -> MeshMetadata {
        let chi = self.euler_characteristic();
        MeshMetadata {
            total_area: self.total_area(),
            euler_characteristic: chi,
            genus: (2 - chi) / 2,
            diameter: self.diameter(),
        }
    }

    pub fn map_positions(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self> {
        let mut out = Vec::with_capacity(self.positions.len());
        let mut dim = self.dim;
        for v in 0..self.num_vertices() {
            let p = f(self.position(v));
            dim = p.len();
            out.extend(p);
        }
        self.with_positions(dim, out)
    }

    pub fn translated(&self, offset: &[f64]) -> Result<Self> {
        self.map_positions(|p| p.iter().zip(offset).map(|(a, b)| a + b).collect())
    }

    /// Applies `x -> R x` for a row-major `dim x dim` matrix.
    pub fn transformed(&self, matrix: &[f64]) -> Result<Self> {
        let d = self.dim;
        self.map_positions(|p| {
            (0..d)
                .map(|i| (0..d).map(|j| matrix[i * d + j] * p[j]).sum())
                .collect()
        })
    }

    /// Zero-pads coordinates up to `dim`.
    pub fn embedded_in(&self, dim: usize) -> Result<Self> {
        assert!(dim >= self.dim);
        self.map_positions(|p| {
            let mut q = p.to_vec();
            q.resize(dim, 0.0);
            q
        })
    }
}

/// Scales about the area centroid so the total area becomes 4π.
pub fn normalize_area(mesh: &EmbeddedMesh) -> Result<EmbeddedMesh> {
    let area = mesh.total_area();
    if !(area > 0.0) || !area.is_finite() {
        return Err(Error::ZeroArea);
    }
    let lambda = (4.0 * PI / area).sqrt();
    let c = mesh.centroid();
    mesh.map_positions(|p| {
        p.iter()
            .zip(&c)
            .map(|(x, c)| c + lambda * (x - c))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn tetrahedron() -> EmbeddedMesh {
        let s = 1.0 / 3f64.sqrt();
        let pos = vec![s, s, s, s, -s, -s, -s, s, -s, -s, -s, s];
        let faces = vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]];
        EmbeddedMesh::new(3, pos, faces).unwrap()
    }

    #[test]
    fn tetrahedron_is_sphere_type() {
        let m = tetrahedron();
        assert_eq!(m.euler_characteristic(), 2);
        assert_eq!(m.metadata().genus, 0);
        let total: f64 = m.angle_defects().iter().sum();
        assert!((total - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn three_faces_on_an_edge_is_non_manifold() {
        let s = 1.0 / 3f64.sqrt();
        let mut pos = vec![s, s, s, s, -s, -s, -s, s, -s, -s, -s, s];
        pos.extend([1.0, 1.0, -1.0]);
        let faces = vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2], [0, 1, 4]];
        assert!(matches!(
            EmbeddedMesh::new(3, pos, faces),
            Err(Error::NonManifold(0, 1))
        ));
    }

    #[test]
    fn flipped_face_is_rejected() {
        let s = 1.0 / 3f64.sqrt();
        let pos = vec![s, s, s, s, -s, -s, -s, s, -s, -s, -s, s];
        let faces = vec![[0, 2, 1], [0, 3, 1], [0, 2, 3], [1, 3, 2]];
        assert!(matches!(
            EmbeddedMesh::new(3, pos, faces),
            Err(Error::InconsistentOrientation(..))
        ));
    }

    #[test]
    fn sliver_is_degenerate() {
        let pos = vec![
            0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.5, 1.0, 0.0,
        ];
        let faces = vec![[0, 1, 3], [1, 2, 3], [0, 3, 2], [0, 2, 1]];
        assert!(matches!(
            EmbeddedMesh::new(3, pos, faces),
            Err(Error::DegenerateFace(_))
        ));
    }

    #[test]
    fn flat_input_has_zero_area() {
        let pos = vec![0.0; 12];
        let faces = vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]];
        assert!(matches!(
            EmbeddedMesh::new(3, pos, faces),
            Err(Error::ZeroArea)
        ));
    }

    #[test]
    fn normalize_area_is_idempotent() {
        let m = normalize_area(&tetrahedron()).unwrap();
        assert!((m.total_area() - 4.0 * PI).abs() < 1e-12 * 4.0 * PI);
        let m2 = normalize_area(&m).unwrap();
        for (a, b) in m.positions().iter().zip(m2.positions()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn fan_order_neighbors() {
        let m = tetrahedron();
        let mut n = m.topology().neighbors(0);
        n.sort();
        assert_eq!(n, vec![1, 2, 3]);
        assert_eq!(m.topology().k_ring(0, 2), vec![1, 2, 3]);
    }
}
