//! Dense 2×2 and 3×3 matrix kernels.
//!
//! Every matrix in this crate is at most 3×3, so eigenvalues come from closed
//! forms (quadratic / trigonometric cubic) instead of an iterative solver.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{QestError, Result};

/// Eigenvalues in `[-PSD_CLAMP, 0)` are treated as exact zeros.
pub const PSD_CLAMP: f64 = 1e-12;
/// Eigenvalues below `-PSD_REJECT` are a hard not-PSD error.
pub const PSD_REJECT: f64 = 1e-9;

pub type Vec3 = [f64; 3];

pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn scale3(a: &Vec3, c: f64) -> Vec3 {
    [a[0] * c, a[1] * c, a[2] * c]
}

pub fn add3(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 2 || dim == 3 {
        Ok(())
    } else {
        Err(QestError::DimensionMismatch { expected: 3, got: dim })
    }
}

/// General real matrix of dimension 2 or 3.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenMat {
    dim: usize,
    a: [[f64; 3]; 3],
}

impl GenMat {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim == 2 || dim == 3, "dimension must be 2 or 3");
        GenMat { dim, a: [[0.0; 3]; 3] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.a[i][i] = 1.0;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.a[i][j] = f(i, j);
            }
        }
        m
    }

    /// Builds from row-major slices; every row must have `rows.len()` entries.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let dim = rows.len();
        check_dim(dim)?;
        for r in rows {
            if r.len() != dim {
                return Err(QestError::DimensionMismatch { expected: dim, got: r.len() });
            }
        }
        let m = Self::from_fn(dim, |i, j| rows[i][j]);
        if !m.is_finite() {
            return Err(QestError::NonFinite);
        }
        Ok(m)
    }

    /// Columns given as 3-vectors (only the first `dim` components are used).
    pub fn from_columns(dim: usize, cols: &[Vec3]) -> Self {
        Self::from_fn(dim, |i, j| cols[j][i])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.dim && j < self.dim);
        self.a[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.dim && j < self.dim);
        self.a[i][j] = v;
    }

    pub fn column(&self, j: usize) -> Vec3 {
        let mut c = [0.0; 3];
        for (i, ci) in c.iter_mut().enumerate().take(self.dim) {
            *ci = self.a[i][j];
        }
        c
    }

    pub fn is_finite(&self) -> bool {
        self.iter().all(|(_, _, v)| v.is_finite())
    }

    fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |i| (0..self.dim).map(move |j| (i, j, self.a[i][j])))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.a[j][i])
    }

    pub fn mul(&self, o: &GenMat) -> GenMat {
        assert_eq!(self.dim, o.dim, "dimension mismatch");
        Self::from_fn(self.dim, |i, j| (0..self.dim).map(|l| self.a[i][l] * o.a[l][j]).sum())
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim).map(|i| (0..self.dim).map(|j| self.a[i][j] * v[j]).sum()).collect()
    }

    pub fn add(&self, o: &GenMat) -> GenMat {
        Self::from_fn(self.dim, |i, j| self.a[i][j] + o.a[i][j])
    }

    pub fn sub(&self, o: &GenMat) -> GenMat {
        Self::from_fn(self.dim, |i, j| self.a[i][j] - o.a[i][j])
    }

    pub fn scale(&self, c: f64) -> GenMat {
        Self::from_fn(self.dim, |i, j| self.a[i][j] * c)
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.a[i][i]).sum()
    }

    pub fn det(&self) -> f64 {
        let a = &self.a;
        match self.dim {
            2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
            _ => {
                a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                    + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
            }
        }
    }

    /// Sum of principal 2×2 minors (second invariant of the characteristic polynomial).
    fn principal_minor_sum(&self) -> f64 {
        let a = &self.a;
        match self.dim {
            2 => self.det(),
            _ => {
                (a[0][0] * a[1][1] - a[0][1] * a[1][0]) + (a[0][0] * a[2][2] - a[0][2] * a[2][0]) + (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.iter().fold(0.0, |m, (_, _, v)| m.max(v.abs()))
    }

    /// Inverse via the adjugate.
    pub fn inverse(&self) -> Result<GenMat> {
        let d = self.det();
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        if d.abs() <= 1e-14 * scale.powi(self.dim as i32) {
            return Err(QestError::Singular("matrix inverse"));
        }
        let a = &self.a;
        let inv = match self.dim {
            2 => GenMat::from_fn(2, |i, j| {
                let adj = [[a[1][1], -a[0][1]], [-a[1][0], a[0][0]]];
                adj[i][j] / d
            }),
            _ => GenMat::from_fn(3, |i, j| {
                // cofactor of (j, i)
                let r: Vec<usize> = (0..3).filter(|&x| x != j).collect();
                let c: Vec<usize> = (0..3).filter(|&x| x != i).collect();
                let minor = a[r[0]][c[0]] * a[r[1]][c[1]] - a[r[0]][c[1]] * a[r[1]][c[0]];
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                sign * minor / d
            }),
        };
        Ok(inv)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.asymmetry() <= tol
    }

    fn asymmetry(&self) -> f64 {
        self.iter().fold(0.0, |m, (i, j, v)| m.max((v - self.a[j][i]).abs()))
    }

    /// Symmetric part, `(M + Mᵀ)/2`.
    pub fn symmetrize(&self) -> SymMat {
        SymMat::from_fn(self.dim, |i, j| 0.5 * (self.a[i][j] + self.a[j][i]))
    }

    pub fn max_abs_diff(&self, o: &GenMat) -> f64 {
        self.sub(o).max_abs()
    }
}

/// Real symmetric matrix of dimension 2 or 3.
///
/// Only the upper triangle is ever written; the lower triangle mirrors it, so
/// `get(i, j) == get(j, i)` holds bit-for-bit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymMat {
    dim: usize,
    a: [[f64; 3]; 3],
}

impl SymMat {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim == 2 || dim == 3, "dimension must be 2 or 3");
        SymMat { dim, a: [[0.0; 3]; 3] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diag(&vec![1.0; dim])
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, v) in d.iter().enumerate() {
            m.a[i][i] = *v;
        }
        m
    }

    /// `f` is only evaluated on the upper triangle `i <= j`.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Row-major construction; rejects asymmetry larger than `1e-12` relative to the entries.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let g = GenMat::from_rows(rows)?;
        Self::from_gen(&g)
    }

    pub fn from_row_major(dim: usize, v: &[f64]) -> Result<Self> {
        check_dim(dim)?;
        if v.len() != dim * dim {
            return Err(QestError::DimensionMismatch { expected: dim * dim, got: v.len() });
        }
        let rows: Vec<&[f64]> = v.chunks(dim).collect();
        Self::from_rows(&rows)
    }

    pub fn from_gen(g: &GenMat) -> Result<Self> {
        if !g.is_finite() {
            return Err(QestError::NonFinite);
        }
        let asym = g.asymmetry();
        if asym > 1e-12 * g.max_abs().max(1.0) {
            return Err(QestError::NotSymmetric(asym));
        }
        Ok(g.symmetrize())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.dim && j < self.dim);
        self.a[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.dim && j < self.dim);
        self.a[i][j] = v;
        self.a[j][i] = v;
    }

    pub fn to_gen(&self) -> GenMat {
        GenMat { dim: self.dim, a: self.a }
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim).map(|i| self.a[i][..self.dim].to_vec()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.to_gen().is_finite()
    }

    pub fn add(&self, o: &SymMat) -> SymMat {
        Self::from_fn(self.dim, |i, j| self.a[i][j] + o.a[i][j])
    }

    pub fn sub(&self, o: &SymMat) -> SymMat {
        Self::from_fn(self.dim, |i, j| self.a[i][j] - o.a[i][j])
    }

    pub fn scale(&self, c: f64) -> SymMat {
        Self::from_fn(self.dim, |i, j| self.a[i][j] * c)
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.a[i][i]).sum()
    }

    pub fn det(&self) -> f64 {
        self.to_gen().det()
    }

    pub fn max_abs(&self) -> f64 {
        self.to_gen().max_abs()
    }

    pub fn max_abs_diff(&self, o: &SymMat) -> f64 {
        self.sub(o).max_abs()
    }

    /// `Tr(self · o)`.
    pub fn trace_product(&self, o: &SymMat) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += self.a[i][j] * o.a[j][i];
            }
        }
        s
    }

    pub fn mul(&self, o: &SymMat) -> GenMat {
        self.to_gen().mul(&o.to_gen())
    }

    /// `a · self · aᵀ`, returned symmetric.
    pub fn congruence(&self, a: &GenMat) -> SymMat {
        a.mul(&self.to_gen()).mul(&a.transpose()).symmetrize()
    }

    /// `self · b · self`, returned symmetric.
    pub fn sandwich(&self, b: &SymMat) -> SymMat {
        b.congruence(&self.to_gen())
    }

    pub fn inverse(&self) -> Result<SymMat> {
        Ok(self.to_gen().inverse()?.symmetrize())
    }

    pub fn quad_form(&self, v: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += v[i] * self.a[i][j] * v[j];
            }
        }
        s
    }

    pub fn min_eigenvalue(&self) -> f64 {
        sym_eig(self).map(|e| e.values[self.dim - 1]).unwrap_or(f64::NAN)
    }

    pub fn is_pd(&self) -> bool {
        self.min_eigenvalue() > 0.0
    }

    /// Top-left 2×2 block of a 3×3 matrix.
    pub fn leading_block(&self) -> SymMat {
        SymMat::from_fn(2, |i, j| self.a[i][j])
    }

    /// 3×3 block-diagonal `diag(block, corner)`.
    pub fn block_diag(block: &SymMat, corner: f64) -> SymMat {
        assert_eq!(block.dim, 2);
        let mut m = SymMat::zeros(3);
        for i in 0..2 {
            for j in i..2 {
                m.set(i, j, block.a[i][j]);
            }
        }
        m.set(2, 2, corner);
        m
    }
}

/// Eigendecomposition `m = U diag(values) Uᵀ` with values sorted descending.
#[derive(Clone, Debug)]
pub struct SymEigen {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: GenMat,
}

impl SymEigen {
    pub fn reconstruct(&self) -> SymMat {
        let d = self.values.len();
        let u = &self.vectors;
        SymMat::from_fn(d, |i, j| (0..d).map(|l| u.get(i, l) * self.values[l] * u.get(j, l)).sum())
    }
}

/// Symmetric eigendecomposition by closed form.
pub fn sym_eig(m: &SymMat) -> Result<SymEigen> {
    if !m.is_finite() {
        return Err(QestError::NonFinite);
    }
    Ok(match m.dim {
        2 => {
            let (values, vectors) = eig2(m.a[0][0], m.a[0][1], m.a[1][1]);
            SymEigen {
                values: values.to_vec(),
                vectors: GenMat::from_columns(2, &[[vectors[0][0], vectors[0][1], 0.0], [vectors[1][0], vectors[1][1], 0.0]]),
            }
        }
        _ => eig3(m),
    })
}

/// 2×2 symmetric `[[a, b], [b, d]]`: descending values and unit vectors.
fn eig2(a: f64, b: f64, d: f64) -> ([f64; 2], [[f64; 2]; 2]) {
    let mean = 0.5 * (a + d);
    let h = (0.5 * (a - d)).hypot(b);
    let angle = 0.5 * (2.0 * b).atan2(a - d);
    let (s, c) = angle.sin_cos();
    ([mean + h, mean - h], [[c, s], [-s, c]])
}

/// Roots of `det(m - λ I)` for a 3×3 symmetric matrix, unsorted.
fn cubic_eigenvalues(m: &SymMat) -> [f64; 3] {
    let a = &m.a;
    let q = m.trace() / 3.0;
    let p1 = a[0][1].powi(2) + a[0][2].powi(2) + a[1][2].powi(2);
    let p2 = (a[0][0] - q).powi(2) + (a[1][1] - q).powi(2) + (a[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    if p == 0.0 {
        return [q, q, q];
    }
    let b = SymMat::from_fn(3, |i, j| (a[i][j] - if i == j { q } else { 0.0 }) / p);
    let r = (0.5 * b.det()).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let e1 = q + 2.0 * p * phi.cos();
    let e3 = q + 2.0 * p * (phi + 2.0 * PI / 3.0).cos();
    let e2 = 3.0 * q - e1 - e3;
    let mut roots = [e1, e2, e3];
    // one Newton step on the characteristic polynomial
    let c2 = m.trace();
    let c1 = m.to_gen().principal_minor_sum();
    let c0 = m.det();
    for x in roots.iter_mut() {
        let f = ((*x - c2) * *x + c1) * *x - c0;
        let df = (3.0 * *x - 2.0 * c2) * *x + c1;
        if df.abs() > 1e-8 * (c2.abs() + 1.0).powi(2) {
            let step = f / df;
            if step.abs() < p {
                *x -= step;
            }
        }
    }
    roots
}

fn eig3(m: &SymMat) -> SymEigen {
    let roots = cubic_eigenvalues(m);
    // eigenvector of the best separated root from the rows of (m - λI)
    let gap = |i: usize| (0..3).filter(|&j| j != i).map(|j| (roots[i] - roots[j]).abs()).fold(f64::INFINITY, f64::min);
    let iso = (0..3).max_by(|&x, &y| gap(x).total_cmp(&gap(y))).unwrap_or(0);
    let lam = roots[iso];
    let rows: Vec<Vec3> = (0..3)
        .map(|i| {
            [
                m.a[i][0] - if i == 0 { lam } else { 0.0 },
                m.a[i][1] - if i == 1 { lam } else { 0.0 },
                m.a[i][2] - if i == 2 { lam } else { 0.0 },
            ]
        })
        .collect();
    let candidates = [cross(&rows[0], &rows[1]), cross(&rows[0], &rows[2]), cross(&rows[1], &rows[2])];
    let best = candidates.iter().max_by(|x, y| norm(x).total_cmp(&norm(y))).copied().unwrap_or([1.0, 0.0, 0.0]);
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    let v = if norm(&best) > 1e-30 * scale * scale { scale3(&best, 1.0 / norm(&best)) } else { [1.0, 0.0, 0.0] };
    // orthonormal basis of the complement, deflate to 2×2
    let helper = if v[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let b1 = {
        let c = cross(&v, &helper);
        scale3(&c, 1.0 / norm(&c))
    };
    let b2 = cross(&v, &b1);
    let mv = |x: &Vec3| -> Vec3 {
        [dot(&[m.a[0][0], m.a[0][1], m.a[0][2]], x), dot(&[m.a[1][0], m.a[1][1], m.a[1][2]], x), dot(&[m.a[2][0], m.a[2][1], m.a[2][2]], x)]
    };
    let lam_v = dot(&v, &mv(&v));
    let (mu, w) = eig2(dot(&b1, &mv(&b1)), dot(&b1, &mv(&b2)), dot(&b2, &mv(&b2)));
    let u1 = add3(&scale3(&b1, w[0][0]), &scale3(&b2, w[0][1]));
    let u2 = add3(&scale3(&b1, w[1][0]), &scale3(&b2, w[1][1]));
    let mut pairs = [(lam_v, v), (mu[0], u1), (mu[1], u2)];
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
    SymEigen { values: pairs.iter().map(|p| p.0).collect(), vectors: GenMat::from_columns(3, &[pairs[0].1, pairs[1].1, pairs[2].1]) }
}

fn clamp_psd(values: &[f64]) -> Result<Vec<f64>> {
    values.iter().map(|&v| if v < -PSD_REJECT { Err(QestError::NotPsd { min_eigenvalue: v }) } else { Ok(v.max(0.0)) }).collect()
}

/// Principal square root of a PSD matrix.
pub fn psd_sqrt(m: &SymMat) -> Result<SymMat> {
    let e = sym_eig(m)?;
    let roots: Vec<f64> = clamp_psd(&e.values)?.into_iter().map(f64::sqrt).collect();
    Ok(SymEigen { values: roots, vectors: e.vectors }.reconstruct())
}

/// Fidelity `Tr √(√a · b · √a)` between two PSD matrices.
pub fn fidelity(a: &SymMat, b: &SymMat) -> Result<f64> {
    if a.dim != b.dim {
        return Err(QestError::DimensionMismatch { expected: a.dim, got: b.dim });
    }
    // validates b as well
    clamp_psd(&sym_eig(b)?.values)?;
    let ra = psd_sqrt(a)?;
    let inner = ra.sandwich(b);
    let vals = sym_eig(&inner)?.values;
    Ok(vals.iter().map(|v| v.max(0.0).sqrt()).sum())
}

/// Sum of moduli of eigenvalues.
///
/// Supported inputs: symmetric matrices (via [`sym_eig`]), and traceless
/// singular matrices such as `W · A` with `A` antisymmetric, whose spectrum is
/// `{0, +z, -z}` so that `TrAbs = √(2 |Tr m²|)`. A traceless 2×2 matrix has
/// spectrum `±√(-det)`, giving `2 √|det|`.
pub fn trabs(m: &GenMat) -> Result<f64> {
    if !m.is_finite() {
        return Err(QestError::NonFinite);
    }
    let scale = m.max_abs().max(1.0);
    if m.is_symmetric(1e-12 * scale) {
        let e = sym_eig(&m.symmetrize())?;
        return Ok(e.values.iter().map(|v| v.abs()).sum());
    }
    let traceless = m.trace().abs() <= 1e-9 * scale;
    match m.dim {
        2 if traceless => Ok(2.0 * m.det().abs().sqrt()),
        3 if traceless && m.det().abs() <= 1e-9 * scale.powi(3) => {
            let tr_sq = m.mul(m).trace();
            Ok((2.0 * tr_sq.abs()).sqrt())
        }
        _ => Err(QestError::UnsupportedStructure),
    }
}

/// Complex eigenvalues of a general real 2×2 or 3×3 matrix from its characteristic polynomial.
pub fn general_eigenvalues(m: &GenMat) -> Result<Vec<Complex64>> {
    if !m.is_finite() {
        return Err(QestError::NonFinite);
    }
    let tr = m.trace();
    if m.dim == 2 {
        let disc = Complex64::new(0.25 * tr * tr - m.det(), 0.0).sqrt();
        return Ok(vec![0.5 * tr + disc, 0.5 * tr - disc]);
    }
    let (c2, c1, c0) = (tr, m.principal_minor_sum(), m.det());
    // λ³ - c2 λ² + c1 λ - c0 = 0, shift λ = t + c2/3
    let shift = c2 / 3.0;
    let p = c1 - c2 * c2 / 3.0;
    let q = -2.0 * c2.powi(3) / 27.0 + c2 * c1 / 3.0 - c0;
    let pc = Complex64::new(p, 0.0);
    let qc = Complex64::new(q, 0.0);
    let disc = (qc * qc / 4.0 + pc * pc * pc / 27.0).sqrt();
    let mut u = (-qc / 2.0 + disc).powf(1.0 / 3.0);
    if u.norm() < 1e-300 {
        u = (-qc / 2.0 - disc).powf(1.0 / 3.0);
    }
    let omega = Complex64::new(-0.5, 3f64.sqrt() / 2.0);
    let mut roots = Vec::with_capacity(3);
    let mut w = Complex64::new(1.0, 0.0);
    for _ in 0..3 {
        let uk = u * w;
        let vk = if uk.norm() < 1e-300 { Complex64::new(0.0, 0.0) } else { -pc / (3.0 * uk) };
        roots.push(uk + vk + shift);
        w *= omega;
    }
    for r in roots.iter_mut() {
        for _ in 0..2 {
            let f = ((*r - c2) * *r + c1) * *r - c0;
            let df = (3.0 * *r - 2.0 * c2) * *r + c1;
            if df.norm() > 1e-10 * (1.0 + c2.abs()).powi(2) {
                *r -= f / df;
            }
        }
    }
    Ok(roots)
}

/// TrAbs through explicit complex eigenvalues; valid for any real 2×2 or 3×3 matrix
/// with a diagonalizable spectrum.
pub fn trabs_eigen(m: &GenMat) -> Result<f64> {
    Ok(general_eigenvalues(m)?.iter().map(|z| z.norm()).sum())
}

/// Schur complement of the trailing 1×1 block of a 3×3 matrix:
/// `J_II - J_IN J_NN⁻¹ J_NI` with `I = {1, 2}`, `N = {3}`.
pub fn schur_complement(j: &SymMat) -> Result<SymMat> {
    if j.dim != 3 {
        return Err(QestError::DimensionMismatch { expected: 3, got: j.dim });
    }
    if !j.is_finite() {
        return Err(QestError::NonFinite);
    }
    let jnn = j.a[2][2];
    if jnn.abs() <= 1e-14 * j.max_abs().max(f64::MIN_POSITIVE) {
        return Err(QestError::Singular("nuisance block of Schur complement"));
    }
    Ok(SymMat::from_fn(2, |a, b| j.a[a][b] - j.a[a][2] * j.a[b][2] / jnn))
}

/// Complex matrix of dimension 2 or 3 with no structure imposed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CMat {
    dim: usize,
    a: [[Complex64; 3]; 3],
}

impl CMat {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim == 2 || dim == 3, "dimension must be 2 or 3");
        CMat { dim, a: [[Complex64::new(0.0, 0.0); 3]; 3] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.a[i][j] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.a[i][j]
    }

    pub fn mul(&self, o: &CMat) -> CMat {
        Self::from_fn(self.dim, |i, j| (0..self.dim).map(|l| self.a[i][l] * o.a[l][j]).sum())
    }

    pub fn add(&self, o: &CMat) -> CMat {
        Self::from_fn(self.dim, |i, j| self.a[i][j] + o.a[i][j])
    }

    pub fn sub(&self, o: &CMat) -> CMat {
        Self::from_fn(self.dim, |i, j| self.a[i][j] - o.a[i][j])
    }

    pub fn scale(&self, c: Complex64) -> CMat {
        Self::from_fn(self.dim, |i, j| self.a[i][j] * c)
    }

    pub fn adjoint(&self) -> CMat {
        Self::from_fn(self.dim, |i, j| self.a[j][i].conj())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.a[i][i]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                m = m.max(self.a[i][j].norm());
            }
        }
        m
    }

    pub fn max_abs_diff(&self, o: &CMat) -> f64 {
        self.sub(o).max_abs()
    }

    /// Gauss-Jordan inverse with partial pivoting.
    pub fn inverse(&self) -> Result<CMat> {
        let n = self.dim;
        let mut a = self.a;
        let mut inv = CMat::identity(n).a;
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for col in 0..n {
            let piv = (col..n).max_by(|&x, &y| a[x][col].norm().total_cmp(&a[y][col].norm())).unwrap_or(col);
            if a[piv][col].norm() <= 1e-14 * scale {
                return Err(QestError::Singular("complex matrix inverse"));
            }
            a.swap(col, piv);
            inv.swap(col, piv);
            let d = a[col][col];
            for j in 0..n {
                a[col][j] /= d;
                inv[col][j] /= d;
            }
            for r in 0..n {
                if r != col {
                    let f = a[r][col];
                    for j in 0..n {
                        let (ac, ic) = (a[col][j], inv[col][j]);
                        a[r][j] -= f * ac;
                        inv[r][j] -= f * ic;
                    }
                }
            }
        }
        Ok(CMat { dim: n, a: inv })
    }
}

/// Complex Hermitian matrix of dimension 2 or 3 with exactly real diagonal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HermMat {
    m: CMat,
}

impl HermMat {
    /// `f` is evaluated on the upper triangle only; the diagonal keeps its real part.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = CMat::zeros(dim);
        for i in 0..dim {
            m.a[i][i] = Complex64::new(f(i, i).re, 0.0);
            for j in (i + 1)..dim {
                let v = f(i, j);
                m.a[i][j] = v;
                m.a[j][i] = v.conj();
            }
        }
        HermMat { m }
    }

    /// Accepts `c` if it is Hermitian within `1e-12` relative to its entries.
    pub fn from_cmat(c: &CMat) -> Result<Self> {
        let dev = c.max_abs_diff(&c.adjoint());
        if dev > 1e-12 * c.max_abs().max(1.0) {
            return Err(QestError::NotSymmetric(dev));
        }
        Ok(Self::hermitian_part(c))
    }

    /// `(c + c†)/2`.
    pub fn hermitian_part(c: &CMat) -> Self {
        let h = c.add(&c.adjoint()).scale(Complex64::new(0.5, 0.0));
        Self::from_fn(c.dim, |i, j| h.a[i][j])
    }

    pub fn from_real(s: &SymMat) -> Self {
        Self::from_fn(s.dim, |i, j| Complex64::new(s.get(i, j), 0.0))
    }

    pub fn dim(&self) -> usize {
        self.m.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.m.a[i][j]
    }

    pub fn as_cmat(&self) -> &CMat {
        &self.m
    }

    pub fn re(&self) -> SymMat {
        SymMat::from_fn(self.m.dim, |i, j| self.m.a[i][j].re)
    }

    /// Imaginary part; antisymmetric.
    pub fn im(&self) -> GenMat {
        GenMat::from_fn(self.m.dim, |i, j| self.m.a[i][j].im)
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    /// `Tr(self · o)` for any complex `o`.
    pub fn trace_product(&self, o: &CMat) -> Complex64 {
        self.m.mul(o).trace()
    }

    pub fn inverse(&self) -> Result<HermMat> {
        Ok(Self::hermitian_part(&self.m.inverse()?))
    }

    pub fn max_abs_diff(&self, o: &HermMat) -> f64 {
        self.m.max_abs_diff(&o.m)
    }

    /// Eigenvalues of a 2×2 Hermitian matrix, descending.
    pub fn eigenvalues2(&self) -> [f64; 2] {
        debug_assert_eq!(self.m.dim, 2);
        let a = self.m.a[0][0].re;
        let d = self.m.a[1][1].re;
        let b = self.m.a[0][1].norm();
        let mean = 0.5 * (a + d);
        let h = (0.5 * (a - d)).hypot(b);
        [mean + h, mean - h]
    }
}
