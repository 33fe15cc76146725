//! Small dense helpers on `&[f64]` points plus a CSR matrix, conjugate
//! gradients and a shifted subspace iteration for the lowest generalized
//! eigenpairs of a symmetric pencil.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

#[inline]
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[inline]
pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

#[inline]
pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// `y += s * x`
#[inline]
pub fn axpy(s: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += s * xi;
    }
}

/// Area of the triangle spanned by three points of any dimension.
pub fn triangle_area(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    let u = sub(b, a);
    let v = sub(c, a);
    let uu = dot(&u, &u);
    let vv = dot(&v, &v);
    let uv = dot(&u, &v);
    0.5 * (uu * vv - uv * uv).max(0.0).sqrt()
}

/// Interior angle at `a` of the triangle `abc`.
pub fn corner_angle(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    let u = sub(b, a);
    let v = sub(c, a);
    let uu = dot(&u, &u);
    let vv = dot(&v, &v);
    let uv = dot(&u, &v);
    let cross = (uu * vv - uv * uv).max(0.0).sqrt();
    cross.atan2(uv)
}

/// Cotangent of the corner angle at `a` of triangle `abc`.
pub fn corner_cot(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    let u = sub(b, a);
    let v = sub(c, a);
    let uu = dot(&u, &u);
    let vv = dot(&v, &v);
    let uv = dot(&u, &v);
    let cross = (uu * vv - uv * uv).max(1e-300).sqrt();
    uv / cross
}

/// Orthonormalizes `v` against the (orthonormal) `basis`; returns `None`
/// when the remainder is numerically zero.
pub fn gram_schmidt_step(v: &[f64], basis: &[Vec<f64>]) -> Option<Vec<f64>> {
    let mut w = v.to_vec();
    // two passes keep orthogonality at machine precision
    for _ in 0..2 {
        for b in basis {
            let c = dot(&w, b);
            axpy(-c, b, &mut w);
        }
    }
    let n = norm(&w);
    if n <= 1e-12 * norm(v).max(1e-300) {
        return None;
    }
    Some(scale(&w, 1.0 / n))
}

/// Extends an orthonormal set to a full orthonormal basis of R^dim using
/// the standard basis vectors as candidates.
pub fn complete_basis(basis: &[Vec<f64>], dim: usize) -> Vec<Vec<f64>> {
    let mut all: Vec<Vec<f64>> = basis.to_vec();
    let mut extra = Vec::new();
    // pick candidates in order of smallest overlap with the existing span
    let mut candidates: Vec<(f64, usize)> = (0..dim)
        .map(|k| {
            let overlap: f64 = basis.iter().map(|b| b[k] * b[k]).sum();
            (overlap, k)
        })
        .collect();
    candidates.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for (_, k) in candidates {
        if all.len() == dim {
            break;
        }
        let mut e = vec![0.0; dim];
        e[k] = 1.0;
        if let Some(w) = gram_schmidt_step(&e, &all) {
            all.push(w.clone());
            extra.push(w);
        }
    }
    extra
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from unsorted triplets, summing duplicates.
    pub fn from_triplets(nrows: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            nrows,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for (r, yr) in y.iter_mut().enumerate().take(self.nrows) {
            let mut s = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *yr = s;
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.mul_vec(x, &mut y);
        y
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (self.col_idx[k], self.values[k]))
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows)
            .map(|r| self.row(r).find(|(c, _)| *c == r).map_or(0.0, |(_, v)| v))
            .collect()
    }
}

/// Jacobi-preconditioned conjugate gradients for a symmetric positive
/// definite operator. Returns the solution and the final relative residual.
pub fn conjugate_gradient(
    a: &CsrMatrix,
    b: &[f64],
    x0: Option<&[f64]>,
    rel_tol: f64,
    max_iter: usize,
) -> (Vec<f64>, f64) {
    let n = a.nrows;
    let diag: Vec<f64> = a
        .diagonal()
        .into_iter()
        .map(|d| if d.abs() > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let mut x = x0.map_or_else(|| vec![0.0; n], |x| x.to_vec());
    let mut r = a.apply(&x);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let bnorm = norm(b).max(1e-300);
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut res = norm(&r) / bnorm;
    for _ in 0..max_iter {
        if res <= rel_tol {
            break;
        }
        a.mul_vec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        res = norm(&r) / bnorm;
        for i in 0..n {
            z[i] = r[i] * diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    (x, res)
}

/// Lowest `count` eigenpairs of `stiffness v = lambda * diag(mass) v`, where
/// `stiffness` is symmetric positive semidefinite. Uses subspace iteration on
/// `(stiffness + shift * M)^{-1} M` with Rayleigh-Ritz projection.
pub fn lowest_generalized_eigenpairs(
    stiffness: &CsrMatrix,
    mass: &[f64],
    count: usize,
    iterations: usize,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = stiffness.nrows;
    let block = (count + 8).min(n);
    let shift = 1.0;
    let mut trip = Vec::new();
    for r in 0..n {
        for (c, v) in stiffness.row(r) {
            trip.push((r, c, v));
        }
        trip.push((r, r, shift * mass[r]));
    }
    let shifted = CsrMatrix::from_triplets(n, trip);

    // deterministic start block
    let mut x: Vec<Vec<f64>> = (0..block)
        .map(|j| {
            (0..n)
                .map(|i| {
                    let t = (i as f64 + 1.0) * (j as f64 + 1.0) * 0.618_033_988_75;
                    (t.fract() - 0.5) + if j == 0 { 1.0 } else { 0.0 }
                })
                .collect()
        })
        .collect();
    let mut eigvals = vec![0.0; block];
    for _ in 0..iterations {
        // solve shifted system for each column
        let mut y = Vec::with_capacity(block);
        for col in &x {
            let rhs: Vec<f64> = col.iter().zip(mass).map(|(a, m)| a * m).collect();
            let (sol, res) = conjugate_gradient(&shifted, &rhs, Some(col), 1e-12, 20 * n);
            if res > 1e-8 {
                return Err(Error::SolverFailure(res));
            }
            y.push(sol);
        }
        // Rayleigh-Ritz on span(y)
        let (vals, vecs) = rayleigh_ritz(stiffness, mass, &y)?;
        eigvals = vals;
        x = vecs;
    }
    eigvals.truncate(count);
    x.truncate(count);
    Ok((eigvals, x))
}

fn rayleigh_ritz(
    stiffness: &CsrMatrix,
    mass: &[f64],
    basis: &[Vec<f64>],
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let k = basis.len();
    let n = mass.len();
    // M-orthonormalize the basis first (modified Gram-Schmidt, two passes)
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(k);
    for v in basis {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &q {
                let c: f64 = (0..n).map(|i| w[i] * b[i] * mass[i]).sum();
                axpy(-c, b, &mut w);
            }
        }
        let nn: f64 = (0..n).map(|i| w[i] * w[i] * mass[i]).sum::<f64>().sqrt();
        if nn > 1e-12 {
            q.push(scale(&w, 1.0 / nn));
        }
    }
    let m = q.len();
    let kq: Vec<Vec<f64>> = q.iter().map(|v| stiffness.apply(v)).collect();
    let mut small = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            small[(i, j)] = dot(&q[i], &kq[j]);
        }
    }
    let small = (&small + small.transpose()) * 0.5;
    let eig = SymmetricEigen::new(small);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let mut vals = Vec::with_capacity(m);
    let mut vecs = Vec::with_capacity(m);
    for &j in &order {
        vals.push(eig.eigenvalues[j]);
        let mut v = vec![0.0; n];
        for (i, qi) in q.iter().enumerate() {
            axpy(eig.eigenvectors[(i, j)], qi, &mut v);
        }
        vecs.push(v);
    }
    Ok((vals, vecs))
}

/// Sum with fixed pairwise order; identical inputs give identical bits
/// regardless of how the terms were produced.
pub fn tree_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n if n <= 16 => values.iter().sum(),
        n => {
            let (a, b) = values.split_at(n / 2);
            tree_sum(a) + tree_sum(b)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cg_solves_tridiagonal() {
        let n = 50;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.5));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let a = CsrMatrix::from_triplets(n, t);
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = a.apply(&x_true);
        let (x, res) = conjugate_gradient(&a, &b, None, 1e-14, 500);
        assert!(res < 1e-13);
        for i in 0..n {
            assert!((x[i] - x_true[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn path_graph_eigenvalues() {
        // Neumann path Laplacian: eigenvalues 2 - 2 cos(k pi / n)
        let n = 40;
        let mut t = Vec::new();
        for i in 0..n - 1 {
            t.push((i, i, 1.0));
            t.push((i + 1, i + 1, 1.0));
            t.push((i, i + 1, -1.0));
            t.push((i + 1, i, -1.0));
        }
        let a = CsrMatrix::from_triplets(n, t);
        let mass = vec![1.0; n];
        let (vals, _) = lowest_generalized_eigenpairs(&a, &mass, 4, 60).unwrap();
        for (k, v) in vals.iter().enumerate() {
            let exact = 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / n as f64).cos();
            assert!((v - exact).abs() < 1e-8, "{k}: {v} vs {exact}");
        }
    }

    #[test]
    fn complete_basis_is_orthonormal() {
        let b = vec![vec![0.6, 0.8, 0.0, 0.0]];
        let extra = complete_basis(&b, 4);
        assert_eq!(extra.len(), 3);
        let mut all = b.clone();
        all.extend(extra);
        for i in 0..4 {
            for j in 0..4 {
                let d = dot(&all[i], &all[j]);
                assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
    }
}

/// Cotangent stiffness `L_ij = -½(cot α_ij + cot β_ij)`, `L_ii = -Σ_j L_ij`.
/// Positive semidefinite; depends only on edge lengths.
pub fn cotan_stiffness<'a>(
    num_vertices: usize,
    faces: &[[usize; 3]],
    point: impl Fn(usize) -> &'a [f64],
) -> CsrMatrix {
    let mut trip = Vec::with_capacity(faces.len() * 9);
    for tri in faces {
        for k in 0..3 {
            let (a, b, c) = (tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]);
            // the corner at a weights the opposite edge bc
            let w = 0.5 * corner_cot(point(a), point(b), point(c));
            trip.push((b, c, -w));
            trip.push((c, b, -w));
            trip.push((b, b, w));
            trip.push((c, c, w));
        }
    }
    CsrMatrix::from_triplets(num_vertices, trip)
}
