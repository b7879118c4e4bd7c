//! Dense complex linear algebra.
//!
//! Everything here works on a small row-major [`ComplexMatrix`]; the
//! dimensions in this crate never exceed a few hundred, so the kernels are
//! straightforward O(n³) loops written with cache-friendly (i, k, j)
//! ordering rather than anything blocked.
//!
//! * [`Lu`] — partial-pivoting LU with solves against `M` and `M*`.
//! * [`eigenvalues`] — Householder Hessenberg reduction followed by
//!   single-shift complex QR with Wilkinson shifts.
//! * [`smallest_singular_value`] — Lanczos on `(M*M)^{-1}` using the LU
//!   factors, with an optional full one-sided Jacobi SVD cross-check.
//! * [`expm`] / [`expm_norm`] — scaling and squaring with the degree-13
//!   Padé approximant; norms measured in a Gram metric.

use crate::error::{Error, Result};
use num_complex::Complex64 as C64;
use std::ops::{Index, IndexMut};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major data, rejecting NaN/Inf entries.
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_diag(d: &[C64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn from_real_diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    /// Row-major real data promoted to complex.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self {
            rows,
            cols,
            data: data.iter().map(|&x| C64::new(x, 0.0)).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [C64] {
        let c = self.cols;
        &mut self.data[i * c..(i + 1) * c]
    }

    pub fn set_row(&mut self, i: usize, values: &[C64]) {
        self.row_mut(i).copy_from_slice(values);
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// `self + s * other`, in place.
    pub fn axpy(&mut self, s: C64, other: &Self) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn add_to_diag(&mut self, s: C64) {
        for i in 0..self.rows.min(self.cols) {
            self[(i, i)] += s;
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let (n, m, p) = (self.rows, self.cols, other.cols);
        let mut out = vec![ZERO; n * p];
        for i in 0..n {
            let orow = &mut out[i * p..(i + 1) * p];
            for k in 0..m {
                let a = self.data[i * m + k];
                if a == ZERO {
                    continue;
                }
                let brow = &other.data[k * p..(k + 1) * p];
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Self {
            rows: n,
            cols: p,
            data: out,
        }
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, x.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `M* x` without forming the adjoint.
    pub fn adjoint_mul_vec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(self.rows, x.len());
        let mut out = vec![ZERO; self.cols];
        for (i, xi) in x.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a.conj() * xi;
            }
        }
        out
    }

    /// Left multiplication by a real diagonal.
    pub fn scale_rows(&self, d: &[f64]) -> Self {
        assert_eq!(d.len(), self.rows);
        let mut out = self.clone();
        for (i, &s) in d.iter().enumerate() {
            for z in out.row_mut(i) {
                *z *= s;
            }
        }
        out
    }

    /// Right multiplication by a real diagonal.
    pub fn scale_cols(&self, d: &[f64]) -> Self {
        assert_eq!(d.len(), self.cols);
        let mut out = self.clone();
        for i in 0..self.rows {
            for (z, &s) in out.row_mut(i).iter_mut().zip(d) {
                *z *= s;
            }
        }
        out
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Self {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn select_cols(&self, idx: &[usize]) -> Self {
        Self::from_fn(self.rows, idx.len(), |i, j| self[(i, idx[j])])
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_max(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn vec_norm(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn dot(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

// ---------------------------------------------------------------------------
// LU
// ---------------------------------------------------------------------------

/// LU factorisation `P M = L U` with partial (row) pivoting.
#[derive(Clone, Debug)]
pub struct Lu {
    lu: ComplexMatrix,
    perm: Vec<usize>,
    min_pivot: f64,
}

impl Lu {
    pub fn factor(m: &ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.rows(),
                got: m.cols(),
            });
        }
        let n = m.rows();
        let mut a = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut min_pivot = f64::INFINITY;
        for k in 0..n {
            let (mut p, mut best) = (k, a[(k, k)].norm());
            for i in k + 1..n {
                let v = a[(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                return Err(Error::Singular { pivot: k });
            }
            min_pivot = min_pivot.min(best);
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    let t = a[(k, j)];
                    a[(k, j)] = a[(p, j)];
                    a[(p, j)] = t;
                }
            }
            let inv = ONE / a[(k, k)];
            let (head, tail) = a.data.split_at_mut((k + 1) * n);
            let prow = &head[k * n..(k + 1) * n];
            for i in 0..(n - k - 1) {
                let row = &mut tail[i * n..(i + 1) * n];
                let l = row[k] * inv;
                row[k] = l;
                if l == ZERO {
                    continue;
                }
                for j in k + 1..n {
                    row[j] -= l * prow[j];
                }
            }
        }
        Ok(Self {
            lu: a,
            perm,
            min_pivot,
        })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows()
    }

    /// Smallest pivot modulus encountered (a cheap singularity indicator).
    pub fn min_pivot(&self) -> f64 {
        self.min_pivot
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let mut s = x[i];
            for j in 0..i {
                s -= row[j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let mut s = x[i];
            for j in i + 1..n {
                s -= row[j] * x[j];
            }
            x[i] = s / row[i];
        }
        x
    }

    /// Solves `M* x = b`.
    pub fn solve_adjoint(&self, b: &[C64]) -> Vec<C64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        // M = P^T L U  =>  M* = U* L* P, solve U* y = b, L* z = y, x = P^T z.
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for j in 0..i {
                s -= self.lu[(j, i)].conj() * y[j];
            }
            y[i] = s / self.lu[(i, i)].conj();
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..n {
                s -= self.lu[(j, i)].conj() * y[j];
            }
            y[i] = s;
        }
        let mut x = vec![ZERO; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i];
        }
        x
    }

    /// Solves `M X = B` column by column.
    pub fn solve_matrix(&self, b: &ComplexMatrix) -> ComplexMatrix {
        let n = self.dim();
        assert_eq!(b.rows(), n);
        let p = b.cols();
        // Work on the permuted copy in place, row-major, all columns at once.
        let mut x = ComplexMatrix::zeros(n, p);
        for (i, &pi) in self.perm.iter().enumerate() {
            x.row_mut(i).copy_from_slice(b.row(pi));
        }
        for i in 0..n {
            for j in 0..i {
                let l = self.lu[(i, j)];
                if l == ZERO {
                    continue;
                }
                let (head, tail) = x.data.split_at_mut(i * p);
                let src = &head[j * p..(j + 1) * p];
                for (t, s) in tail[..p].iter_mut().zip(src) {
                    *t -= l * s;
                }
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let u = self.lu[(i, j)];
                if u == ZERO {
                    continue;
                }
                let (head, tail) = x.data.split_at_mut(j * p);
                let dst = &mut head[i * p..(i + 1) * p];
                for (t, s) in dst.iter_mut().zip(&tail[..p]) {
                    *t -= u * s;
                }
            }
            let inv = ONE / self.lu[(i, i)];
            for t in x.row_mut(i) {
                *t *= inv;
            }
        }
        x
    }

    pub fn inverse(&self) -> ComplexMatrix {
        self.solve_matrix(&ComplexMatrix::identity(self.dim()))
    }
}

/// Solves `M x = b` by LU with partial pivoting.
pub fn solve_linear(m: &ComplexMatrix, b: &[C64]) -> Result<Vec<C64>> {
    if b.len() != m.rows() {
        return Err(Error::DimensionMismatch {
            expected: m.rows(),
            got: b.len(),
        });
    }
    Ok(Lu::factor(m)?.solve(b))
}

// ---------------------------------------------------------------------------
// Eigenvalues
// ---------------------------------------------------------------------------

/// Reduces a square matrix to upper Hessenberg form by Householder
/// reflections (similarity transform, eigenvalues preserved).
pub fn hessenberg(m: &ComplexMatrix) -> ComplexMatrix {
    let n = m.rows();
    let mut h = m.clone();
    if n < 3 {
        return h;
    }
    let mut v = vec![ZERO; n];
    for k in 0..n - 2 {
        let alpha: f64 = (k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if alpha == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() == 0.0 { ONE } else { x0 / x0.norm() };
        // v = x + phase * alpha * e1
        for i in 0..n {
            v[i] = ZERO;
        }
        v[k + 1] = x0 + phase * alpha;
        for i in k + 2..n {
            v[i] = h[(i, k)];
        }
        let vnorm2: f64 = (k + 1..n).map(|i| v[i].norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let tau = 2.0 / vnorm2;
        // H <- (I - tau v v*) H
        for j in k..n {
            let mut s = ZERO;
            for i in k + 1..n {
                s += v[i].conj() * h[(i, j)];
            }
            s *= tau;
            for i in k + 1..n {
                let vi = v[i];
                h[(i, j)] -= vi * s;
            }
        }
        // H <- H (I - tau v v*)
        for i in 0..n {
            let mut s = ZERO;
            for j in k + 1..n {
                s += h[(i, j)] * v[j];
            }
            s *= tau;
            for j in k + 1..n {
                let vj = v[j].conj();
                h[(i, j)] -= s * vj;
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    h
}

fn givens(a: C64, b: C64) -> (f64, C64, C64) {
    // Returns (c, s, r) with [c s; -conj(s) c] [a; b] = [r; 0], c real.
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, ZERO, a);
    }
    if an == 0.0 {
        return (0.0, b.conj() / bn, C64::new(bn, 0.0));
    }
    let nrm = an.hypot(bn);
    let c = an / nrm;
    let ph = a / an;
    let s = ph * b.conj() / nrm;
    (c, s, ph * nrm)
}

/// Eigenvalues of a square complex matrix.
///
/// Hessenberg reduction, then single-shift QR sweeps restricted to the
/// active unreduced block. Deflation uses the local criterion
/// `|h[k,k-1]| <= eps (|h[k,k]| + |h[k-1,k-1]|)`, which is never looser than
/// `1e-13 ||H||`. Returns [`Error::NoConvergence`] carrying the eigenvalues
/// found so far if the iteration cap (30 sweeps per eigenvalue) is hit.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<C64>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.rows(),
            got: m.cols(),
        });
    }
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let n = m.rows();
    if n == 0 {
        return Ok(vec![]);
    }
    let mut h = hessenberg(m);
    let hnorm = h.norm_fro().max(f64::MIN_POSITIVE);
    let eps = f64::EPSILON;
    let mut eig = vec![ZERO; n];
    let mut found = vec![false; n];
    let mut hi = n - 1;
    let mut iter_block = 0usize;
    let mut total_iter = 0usize;
    let cap = 30 * n.max(10);
    let mut rot: Vec<(f64, C64)> = Vec::with_capacity(n);
    loop {
        if hi == 0 {
            eig[0] = h[(0, 0)];
            found[0] = true;
            break;
        }
        // Find the start of the active unreduced block.
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let local = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            let thresh = if local > 0.0 { eps * local } else { eps * hnorm };
            if sub <= thresh {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eig[hi] = h[(hi, hi)];
            found[hi] = true;
            hi -= 1;
            iter_block = 0;
            continue;
        }
        if lo + 1 == hi {
            // 2x2 block: closed form.
            let (a, b, c, d) = (h[(lo, lo)], h[(lo, hi)], h[(hi, lo)], h[(hi, hi)]);
            let tr = a + d;
            let det = a * d - b * c;
            let disc = (tr * tr * 0.25 - det).sqrt();
            let l1 = tr * 0.5 + disc;
            let l2 = tr * 0.5 - disc;
            // Recompute the smaller-magnitude root from det for accuracy.
            let (big, small) = if l1.norm() >= l2.norm() { (l1, l2) } else { (l2, l1) };
            let small = if big.norm() > 0.0 { det / big } else { small };
            eig[lo] = big;
            eig[hi] = small;
            found[lo] = true;
            found[hi] = true;
            if lo == 0 {
                break;
            }
            hi = lo - 1;
            iter_block = 0;
            continue;
        }
        total_iter += 1;
        iter_block += 1;
        if total_iter > cap {
            let partial: Vec<C64> = (0..n).filter(|&i| found[i]).map(|i| eig[i]).collect();
            return Err(Error::NoConvergence {
                found: partial.len(),
                total: n,
                partial,
            });
        }
        // Wilkinson shift from the trailing 2x2 block, with occasional
        // exceptional shifts to break cycles.
        let shift = if iter_block % 11 == 10 {
            h[(hi, hi)] + C64::new(0.75 * h[(hi, hi - 1)].norm(), 0.0)
        } else {
            let (a, b, c, d) = (h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)]);
            let tr = a + d;
            let det = a * d - b * c;
            let disc = (tr * tr * 0.25 - det).sqrt();
            let l1 = tr * 0.5 + disc;
            let l2 = tr * 0.5 - disc;
            if (l1 - d).norm() < (l2 - d).norm() {
                l1
            } else {
                l2
            }
        };
        // One explicit shifted QR sweep on rows/cols lo..=hi.
        for k in lo..=hi {
            h[(k, k)] -= shift;
        }
        rot.clear();
        for k in lo..hi {
            let (c, s, r) = givens(h[(k, k)], h[(k + 1, k)]);
            h[(k, k)] = r;
            h[(k + 1, k)] = ZERO;
            for j in k + 1..=hi {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = x * c + s * y;
                h[(k + 1, j)] = -s.conj() * x + y * c;
            }
            rot.push((c, s));
        }
        for (idx, &(c, s)) in rot.iter().enumerate() {
            let k = lo + idx;
            let top = (k + 2).min(hi);
            for i in lo..=top {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * c + y * s.conj();
                h[(i, k + 1)] = -x * s + y * c;
            }
        }
        for k in lo..=hi {
            h[(k, k)] += shift;
        }
    }
    Ok(eig)
}

// ---------------------------------------------------------------------------
// Hermitian extremal eigenvalue (Lanczos) and singular values
// ---------------------------------------------------------------------------

fn start_vector(n: usize, seed: u64) -> Vec<C64> {
    // Small deterministic LCG; the start vector only has to be generic.
    let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = || {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((s >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
    };
    let v: Vec<C64> = (0..n).map(|_| C64::new(1.0 + next(), next())).collect();
    let nrm = vec_norm(&v);
    v.into_iter().map(|z| z / nrm).collect()
}

fn largest_tridiag_eig(alpha: &[f64], beta: &[f64]) -> f64 {
    // Largest eigenvalue of a small symmetric tridiagonal matrix by
    // Sturm-sequence bisection.
    let k = alpha.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..k {
        let r = if i > 0 { beta[i - 1].abs() } else { 0.0 } + if i + 1 < k { beta[i].abs() } else { 0.0 };
        lo = lo.min(alpha[i] - r);
        hi = hi.max(alpha[i] + r);
    }
    let count_below = |x: f64| -> usize {
        let mut cnt = 0;
        let mut d = 1.0;
        for i in 0..k {
            let b2 = if i > 0 { beta[i - 1] * beta[i - 1] } else { 0.0 };
            d = alpha[i] - x - if i > 0 { b2 / d } else { 0.0 };
            if d == 0.0 {
                d = -1e-300;
            }
            if d < 0.0 {
                cnt += 1;
            }
        }
        cnt
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(mid) >= k {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * hi.abs().max(lo.abs()) {
            break;
        }
    }
    hi
}

/// Largest eigenvalue of a Hermitian positive semi-definite operator given
/// by its action, by Lanczos with full reorthogonalisation.
pub fn hermitian_top_eigenvalue(n: usize, apply: impl Fn(&[C64]) -> Vec<C64>) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let mut q: Vec<Vec<C64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut v = start_vector(n, 0x5eed);
    let mut prev = f64::NAN;
    let mut stable = 0;
    let mut theta = 0.0;
    for step in 0..n {
        q.push(v.clone());
        let mut w = apply(&v);
        let a = dot(&v, &w).re;
        alpha.push(a);
        // Full reorthogonalisation (twice is enough).
        for _ in 0..2 {
            for qi in &q {
                let c = dot(qi, &w);
                for (wj, qj) in w.iter_mut().zip(qi) {
                    *wj -= c * qj;
                }
            }
        }
        theta = largest_tridiag_eig(&alpha, &beta);
        let b = vec_norm(&w);
        if step > 0 && ((theta - prev).abs() <= 1e-14 * theta.abs()) {
            stable += 1;
            if stable >= 3 {
                break;
            }
        } else {
            stable = 0;
        }
        prev = theta;
        if b <= 1e-14 * theta.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        beta.push(b);
        v = w.into_iter().map(|z| z / b).collect();
    }
    theta
}

/// Spectral norm (largest singular value).
pub fn norm2(m: &ComplexMatrix) -> f64 {
    let s2 = hermitian_top_eigenvalue(m.cols(), |x| m.adjoint_mul_vec(&m.mul_vec(x)));
    s2.max(0.0).sqrt()
}

/// All singular values by one-sided Jacobi (descending order).
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    // Work on columns of A (or A* when wide).
    let a = if m.rows() >= m.cols() { m.clone() } else { m.adjoint() };
    let (rows, cols) = (a.rows(), a.cols());
    let mut colv: Vec<Vec<C64>> = (0..cols).map(|j| a.column(j)).collect();
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha: f64 = colv[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = colv[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma = dot(&colv[p], &colv[q]);
                let g = gamma.norm();
                if g == 0.0 || g <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                off = off.max(g / (alpha * beta).sqrt());
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (cp, cq) = {
                    let (l, r) = colv.split_at_mut(q);
                    (&mut l[p], &mut r[0])
                };
                for i in 0..rows {
                    let x = cp[i];
                    let y = cq[i] * phase.conj();
                    cp[i] = x * c - y * s;
                    cq[i] = x * s + y * c;
                }
            }
        }
        if off <= 1e-15 {
            break;
        }
    }
    let mut sv: Vec<f64> = colv.iter().map(|c| vec_norm(c)).collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

/// Cholesky factor `L` of a Hermitian positive-definite Gram matrix,
/// `G = L L*`, defining the norm `||x||_G = ||L* x||`.
#[derive(Clone, Debug)]
pub struct GramMetric {
    l: ComplexMatrix,
}

impl GramMetric {
    pub fn from_gram(g: &ComplexMatrix) -> Result<Self> {
        let n = g.rows();
        if !g.is_square() {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: g.cols(),
            });
        }
        let herm_err = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (g[(i, j)] - g[(j, i)].conj()).norm())
            .fold(0.0, f64::max);
        if herm_err > 1e-10 * g.norm_max().max(1.0) {
            return Err(Error::Precondition("Gram matrix is not Hermitian".into()));
        }
        let mut l = ComplexMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = g[(j, j)].re;
            for k in 0..j {
                d -= l[(j, k)].norm_sqr();
            }
            if d <= 0.0 || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { column: j });
            }
            let djj = d.sqrt();
            l[(j, j)] = C64::new(djj, 0.0);
            for i in j + 1..n {
                let mut s = g[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = s / djj;
            }
        }
        Ok(Self { l })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            l: ComplexMatrix::identity(n),
        }
    }

    /// Diagonal metric `G = diag(w)`.
    pub fn diagonal(w: &[f64]) -> Result<Self> {
        if let Some(j) = w.iter().position(|&x| x <= 0.0 || !x.is_finite()) {
            return Err(Error::NotPositiveDefinite { column: j });
        }
        let d: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
        Ok(Self {
            l: ComplexMatrix::from_real_diag(&d),
        })
    }

    pub fn factor(&self) -> &ComplexMatrix {
        &self.l
    }

    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    pub fn norm(&self, x: &[C64]) -> f64 {
        vec_norm(&self.l.adjoint_mul_vec(x))
    }

    /// `L* A` computed densely.
    pub fn lstar_mul(&self, a: &ComplexMatrix) -> ComplexMatrix {
        self.l.adjoint().matmul(a)
    }

    /// `A L^{-*}`: solves `X L* = A` row by row (forward substitution on
    /// the transpose structure).
    pub fn mul_lstar_inv(&self, a: &ComplexMatrix) -> ComplexMatrix {
        // X L* = A  <=>  L X* = A*. Solve lower-triangular for each column of A*.
        let n = self.dim();
        assert_eq!(a.cols(), n);
        let mut x = ComplexMatrix::zeros(a.rows(), n);
        for r in 0..a.rows() {
            // row r of X: x_r L* = a_r  <=> L conj(x_r) = conj(a_r)
            let mut y = vec![ZERO; n];
            for i in 0..n {
                let mut s = a[(r, i)].conj();
                for k in 0..i {
                    s -= self.l[(i, k)] * y[k];
                }
                y[i] = s / self.l[(i, i)];
            }
            for i in 0..n {
                x[(r, i)] = y[i].conj();
            }
        }
        x
    }

    /// Operator matrix of `A` in the orthonormal coordinates of the metric:
    /// `L* A L^{-*}`, whose spectral norm is the `G`-induced norm of `A`.
    pub fn conjugate(&self, a: &ComplexMatrix) -> ComplexMatrix {
        self.mul_lstar_inv(&self.lstar_mul(a))
    }
}

/// Smallest singular value, Euclidean or between Gram-weighted spaces.
///
/// With `metrics = Some((g_in, g_out))` the value returned is
/// `sigma_min(L_out* M L_in^{-*})`, i.e. `1 / ||M^{-1}||` for
/// `M: (C^n, G_in) -> (C^n, G_out)`.
///
/// The primary method is Lanczos on `(M*M)^{-1}` applied through the LU
/// factors. When `cross_check` is set and the dimension is at most 256, a
/// full Jacobi SVD is also run and the two values must agree to 1e-7
/// relative; disagreement is reported as an under-resolution error.
pub fn smallest_singular_value(
    m: &ComplexMatrix,
    metrics: Option<(&GramMetric, &GramMetric)>,
    cross_check: bool,
) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.rows(),
            got: m.cols(),
        });
    }
    let a = match metrics {
        Some((gin, gout)) => gout.lstar_mul(&gin.mul_lstar_inv(m)),
        None => m.clone(),
    };
    let scale = norm2(&a);
    let lu = match Lu::factor(&a) {
        Ok(lu) => lu,
        Err(Error::Singular { .. }) => {
            return Err(Error::NumericallySingular {
                sigma: 0.0,
                threshold: 1e-14 * scale,
            })
        }
        Err(e) => return Err(e),
    };
    let n = a.rows();
    let top = hermitian_top_eigenvalue(n, |x| lu.solve(&lu.solve_adjoint(x)));
    let sigma = if top > 0.0 { 1.0 / top.sqrt() } else { 0.0 };
    if !(sigma.is_finite()) || sigma < 1e-14 * scale {
        return Err(Error::NumericallySingular {
            sigma,
            threshold: 1e-14 * scale,
        });
    }
    if cross_check && n <= 256 {
        let svd_min = *singular_values(&a).last().unwrap_or(&0.0);
        if (svd_min - sigma).abs() > 1e-7 * sigma.max(svd_min) {
            return Err(Error::UnderResolved(format!(
                "sigma_min disagreement: lanczos {sigma:e} vs jacobi {svd_min:e}"
            )));
        }
    }
    Ok(sigma)
}

// ---------------------------------------------------------------------------
// Matrix exponential
// ---------------------------------------------------------------------------

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// `e^{A}` by scaling and squaring with the [13/13] Padé approximant.
pub fn expm(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            got: a.cols(),
        });
    }
    let n = a.rows();
    let nrm = a.norm1();
    if !nrm.is_finite() {
        return Err(Error::NonFinite);
    }
    let s = if nrm > THETA13 {
        (nrm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a.scale(C64::new(2f64.powi(-s), 0.0));
    let b = |k: usize| C64::new(PADE13[k], 0.0);
    let id = ComplexMatrix::identity(n);
    let a2 = a.matmul(&a);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);
    let mut u_in = a6.scale(b(13));
    u_in.axpy(b(11), &a4);
    u_in.axpy(b(9), &a2);
    let mut u = a6.matmul(&u_in);
    u.axpy(b(7), &a6);
    u.axpy(b(5), &a4);
    u.axpy(b(3), &a2);
    u.axpy(b(1), &id);
    let u = a.matmul(&u);
    let mut v_in = a6.scale(b(12));
    v_in.axpy(b(10), &a4);
    v_in.axpy(b(8), &a2);
    let mut v = a6.matmul(&v_in);
    v.axpy(b(6), &a6);
    v.axpy(b(4), &a4);
    v.axpy(b(2), &a2);
    v.axpy(b(0), &id);
    let p = v.add(&u);
    let q = v.sub(&u);
    let mut r = Lu::factor(&q)?.solve_matrix(&p);
    for _ in 0..s {
        r = r.matmul(&r);
        if !r.is_finite() {
            return Err(Error::Overflow { growth_bound: nrm });
        }
    }
    if !r.is_finite() {
        return Err(Error::Overflow { growth_bound: nrm });
    }
    Ok(r)
}

/// `||e^{tM}||` in the norm induced by `metric`.
pub fn expm_norm(m: &ComplexMatrix, t: f64, metric: &GramMetric) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::Precondition("t must be non-negative".into()));
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    let e = expm(&m.scale(C64::new(t, 0.0))).map_err(|err| match err {
        Error::Overflow { .. } => Error::Overflow {
            growth_bound: t * m.norm1(),
        },
        other => other,
    })?;
    Ok(norm2(&metric.conjugate(&e)))
}
