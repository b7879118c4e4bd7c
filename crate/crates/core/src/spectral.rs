//! Chebyshev–Gauss–Lobatto collocation on [-1, 1].
//!
//! Nodes are `x_j = cos(j π / n)`, so index 0 is the right wall `x = 1` and
//! index `n` the left wall `x = -1`. Differentiation matrices of orders 1–4
//! follow the Weideman–Reddy recursion with the trigonometric form of
//! `x_i - x_j`, the flipping trick, and diagonals fixed by the negative-sum
//! rule. Boundary conditions are imposed by replacing the rows nearest to the
//! walls ("bordering"), which keeps generalized pencils `B0 - s B1` explicit.

use crate::dense::{ComplexMatrix, Lu};
use crate::error::{Error, Result};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

/// Dense real matrix used for the differentiation operators.
#[derive(Clone, Debug, PartialEq)]
pub struct RealMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl RealMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn apply_c(&self, x: &[C64]) -> Vec<C64> {
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| b * *a).sum())
            .collect()
    }

    pub fn to_complex(&self) -> ComplexMatrix {
        ComplexMatrix::from_real(self.rows, self.cols, &self.data)
    }

    pub fn row_sum_max(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().sum::<f64>().abs())
            .fold(0.0, f64::max)
    }
}

/// Chebyshev–Gauss–Lobatto grid with differentiation and quadrature.
#[derive(Clone, Debug)]
pub struct SpectralGrid {
    pub n: usize,
    pub nodes: Vec<f64>,
    /// `diff[k-1]` is the order-`k` differentiation matrix, k = 1..4.
    pub diff: [RealMatrix; 4],
    /// Clenshaw–Curtis weights on [-1, 1].
    pub weights: Vec<f64>,
}

/// Builds the grid with `n + 1` nodes. `n` must be even and at least 8.
pub fn build_grid(n: usize) -> Result<SpectralGrid> {
    if n < 8 {
        return Err(Error::Precondition(format!(
            "grid parameter n = {n} too small (need n >= 8)"
        )));
    }
    if !n.is_multiple_of(2) {
        return Err(Error::Precondition(format!(
            "grid parameter n = {n} must be even (Clenshaw-Curtis positivity)"
        )));
    }
    let nodes = cheb_nodes(n);
    let diff = cheb_diff(n, 4);
    let weights = clenshaw_curtis(n);
    Ok(SpectralGrid {
        n,
        nodes,
        diff: diff.try_into().expect("four orders"),
        weights,
    })
}

fn cheb_nodes(n: usize) -> Vec<f64> {
    // sin form is exactly antisymmetric.
    (0..=n)
        .map(|j| (PI * (n as f64 - 2.0 * j as f64) / (2.0 * n as f64)).sin())
        .collect()
}

fn cheb_diff(n: usize, orders: usize) -> Vec<RealMatrix> {
    let np = n + 1;
    let th: Vec<f64> = (0..np).map(|k| k as f64 * PI / n as f64).collect();
    let n1 = np / 2;
    let mut dx = RealMatrix::zeros(np, np);
    for i in 0..np {
        for j in 0..np {
            let v = 2.0 * ((th[j] + th[i]) / 2.0).sin() * ((th[j] - th[i]) / 2.0).sin();
            dx.set(i, j, v);
        }
    }
    // Flipping trick: lower half from the antisymmetric image of the upper.
    for i in n1..np {
        for j in 0..np {
            let v = -dx.get(np - 1 - i, np - 1 - j);
            dx.set(i, j, v);
        }
    }
    let sign = |k: usize| if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    let cw = |k: usize| if k == 0 || k == n { 2.0 } else { 1.0 };
    let mut cmat = RealMatrix::zeros(np, np);
    let mut z = RealMatrix::zeros(np, np);
    for i in 0..np {
        for j in 0..np {
            cmat.set(i, j, sign(i + j) * cw(i) / cw(j));
            if i != j {
                z.set(i, j, 1.0 / dx.get(i, j));
            }
        }
    }
    let mut d = RealMatrix::zeros(np, np);
    for i in 0..np {
        d.set(i, i, 1.0);
    }
    let mut out = Vec::with_capacity(orders);
    for ell in 1..=orders {
        let diag: Vec<f64> = (0..np).map(|i| d.get(i, i)).collect();
        let mut next = RealMatrix::zeros(np, np);
        for i in 0..np {
            let mut s = 0.0;
            for j in 0..np {
                if i == j {
                    continue;
                }
                let v = ell as f64 * z.get(i, j) * (cmat.get(i, j) * diag[i] - d.get(i, j));
                next.set(i, j, v);
                s += v;
            }
            next.set(i, i, -s);
        }
        d = next;
        out.push(d.clone());
    }
    out
}

fn clenshaw_curtis(n: usize) -> Vec<f64> {
    let th: Vec<f64> = (0..=n).map(|k| k as f64 * PI / n as f64).collect();
    let nf = n as f64;
    let mut w = vec![0.0; n + 1];
    let mut v = vec![1.0; n.saturating_sub(1)];
    if n.is_multiple_of(2) {
        w[0] = 1.0 / (nf * nf - 1.0);
        w[n] = w[0];
        for k in 1..n / 2 {
            for (i, vi) in v.iter_mut().enumerate() {
                *vi -= 2.0 * (2.0 * k as f64 * th[i + 1]).cos() / (4.0 * (k * k) as f64 - 1.0);
            }
        }
        for (i, vi) in v.iter_mut().enumerate() {
            *vi -= (nf * th[i + 1]).cos() / (nf * nf - 1.0);
        }
    } else {
        w[0] = 1.0 / (nf * nf);
        w[n] = w[0];
        for k in 1..=(n - 1) / 2 {
            for (i, vi) in v.iter_mut().enumerate() {
                *vi -= 2.0 * (2.0 * k as f64 * th[i + 1]).cos() / (4.0 * (k * k) as f64 - 1.0);
            }
        }
    }
    for i in 1..n {
        w[i] = 2.0 * v[i - 1] / nf;
    }
    w
}

impl SpectralGrid {
    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn d(&self, order: usize) -> &RealMatrix {
        &self.diff[order - 1]
    }

    /// Differentiation matrix promoted to complex.
    pub fn dc(&self, order: usize) -> ComplexMatrix {
        self.diff[order - 1].to_complex()
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&x| f(x)).collect()
    }

    pub fn sample_c(&self, f: impl Fn(f64) -> C64) -> Vec<C64> {
        self.nodes.iter().map(|&x| f(x)).collect()
    }

    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.weights.iter().zip(f).map(|(w, v)| w * v).sum()
    }

    pub fn integrate_c(&self, f: &[C64]) -> C64 {
        self.weights.iter().zip(f).map(|(w, v)| v * *w).sum()
    }

    /// Weighted L² norm.
    pub fn l2_norm(&self, f: &[C64]) -> f64 {
        self.weights
            .iter()
            .zip(f)
            .map(|(w, v)| w * v.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `(||f||² + ||f'||²)^{1/2}` with spectral differentiation.
    pub fn h1_norm(&self, f: &[C64]) -> f64 {
        let df = self.d(1).apply_c(f);
        (self.l2_norm(f).powi(2) + self.l2_norm(&df).powi(2)).sqrt()
    }

    /// Barycentric interpolation of nodal values at an arbitrary point.
    pub fn interpolate(&self, values: &[C64], x: f64) -> C64 {
        barycentric(&self.nodes, values, x)
    }

    /// Chebyshev coefficients `c_k` with `f(x) = Σ c_k T_k(x)`.
    pub fn cheb_coefficients(&self, values: &[f64]) -> Vec<f64> {
        let n = self.n;
        let nf = n as f64;
        (0..=n)
            .map(|k| {
                let mut s = 0.0;
                for (j, v) in values.iter().enumerate() {
                    let h = if j == 0 || j == n { 0.5 } else { 1.0 };
                    s += h * v * (PI * (k * j) as f64 / nf).cos();
                }
                let scale = if k == 0 || k == n { 1.0 / nf } else { 2.0 / nf };
                s * scale
            })
            .collect()
    }
}

/// Barycentric interpolation on Chebyshev–Gauss–Lobatto nodes.
pub fn barycentric(nodes: &[f64], values: &[C64], x: f64) -> C64 {
    let n = nodes.len() - 1;
    let mut num = C64::new(0.0, 0.0);
    let mut den = 0.0;
    for (j, (&xj, &fj)) in nodes.iter().zip(values).enumerate() {
        let dx = x - xj;
        if dx == 0.0 {
            return fj;
        }
        let mut w = if j % 2 == 0 { 1.0 } else { -1.0 };
        if j == 0 || j == n {
            w *= 0.5;
        }
        let c = w / dx;
        num += fj * c;
        den += c;
    }
    num / den
}

/// Discrete L² pairing `Σ w_j conj(f_j) g_j`.
pub fn inner_product(grid: &SpectralGrid, f: &[C64], g: &[C64]) -> Result<C64> {
    let m = grid.len();
    for v in [f, g] {
        if v.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: v.len(),
            });
        }
    }
    Ok(grid
        .weights
        .iter()
        .zip(f.iter().zip(g))
        .map(|(w, (a, b))| a.conj() * b * *w)
        .sum())
}

/// Boundary-condition families.
#[derive(Clone, Debug, PartialEq)]
pub enum BcSpec {
    /// `u(±1) = 0`.
    Dirichlet,
    /// `u'(±1) = 0`.
    Neumann,
    /// `u(±1) = 0` and `u''(±1) = 0` (traction / stress-free).
    Dirichlet2,
    /// `u(±1) = 0` and `u'(±1) = 0` (no-slip).
    Dirichlet4,
    /// Two integral constraints `<ζ_+, u> = 0`, `<ζ_-, u> = 0`, given by nodal
    /// samples of the profiles; they replace the rows at `x = 1` and `x = -1`.
    Constrained { plus: Vec<f64>, minus: Vec<f64> },
}

impl BcSpec {
    /// Indices of the rows replaced by boundary data.
    pub fn rows(&self, n: usize) -> Vec<usize> {
        match self {
            BcSpec::Dirichlet2 | BcSpec::Dirichlet4 => vec![0, 1, n - 1, n],
            _ => vec![0, n],
        }
    }

    /// Interior (equation) rows, complementary to [`BcSpec::rows`].
    pub fn interior_rows(&self, n: usize) -> Vec<usize> {
        let b = self.rows(n);
        (0..=n).filter(|i| !b.contains(i)).collect()
    }

    /// Boundary functionals as rows of length `n + 1`, ordered like
    /// [`BcSpec::rows`].
    pub fn functionals(&self, grid: &SpectralGrid) -> Result<Vec<Vec<f64>>> {
        let n = grid.n;
        let unit = |k: usize| {
            let mut r = vec![0.0; n + 1];
            r[k] = 1.0;
            r
        };
        Ok(match self {
            BcSpec::Dirichlet => vec![unit(0), unit(n)],
            BcSpec::Neumann => vec![grid.d(1).row(0).to_vec(), grid.d(1).row(n).to_vec()],
            BcSpec::Dirichlet2 => vec![
                unit(0),
                grid.d(2).row(0).to_vec(),
                grid.d(2).row(n).to_vec(),
                unit(n),
            ],
            BcSpec::Dirichlet4 => vec![
                unit(0),
                grid.d(1).row(0).to_vec(),
                grid.d(1).row(n).to_vec(),
                unit(n),
            ],
            BcSpec::Constrained { plus, minus } => {
                for p in [plus, minus] {
                    if p.len() != n + 1 {
                        return Err(Error::DimensionMismatch {
                            expected: n + 1,
                            got: p.len(),
                        });
                    }
                }
                check_constraint_gram(grid, plus, minus)?;
                let wrow = |p: &Vec<f64>| -> Vec<f64> {
                    p.iter().zip(&grid.weights).map(|(a, w)| a * w).collect()
                };
                vec![wrow(plus), wrow(minus)]
            }
        })
    }
}

fn check_constraint_gram(grid: &SpectralGrid, a: &[f64], b: &[f64]) -> Result<()> {
    let ip = |f: &[f64], g: &[f64]| -> f64 {
        grid.weights
            .iter()
            .zip(f.iter().zip(g))
            .map(|(w, (x, y))| w * x * y)
            .sum()
    };
    let (aa, bb, ab) = (ip(a, a), ip(b, b), ip(a, b));
    if aa <= 0.0 || bb <= 0.0 {
        return Err(Error::Precondition("constraint profile vanishes".into()));
    }
    let det = 1.0 - ab * ab / (aa * bb);
    if det <= 1e-14 {
        return Err(Error::Precondition(format!(
            "constraint profiles nearly dependent (normalised Gram determinant {det:e})"
        )));
    }
    Ok(())
}

/// Replaces the boundary rows of `matrix` by the boundary functionals of
/// `bc`. Interior rows are left untouched bit-for-bit.
pub fn impose_bc(matrix: &ComplexMatrix, bc: &BcSpec, grid: &SpectralGrid) -> Result<ComplexMatrix> {
    let n = grid.n;
    if matrix.rows() != n + 1 || matrix.cols() != n + 1 {
        return Err(Error::DimensionMismatch {
            expected: n + 1,
            got: matrix.rows(),
        });
    }
    let mut out = matrix.clone();
    let rows = bc.rows(n);
    let funcs = bc.functionals(grid)?;
    for (&r, f) in rows.iter().zip(&funcs) {
        let row: Vec<C64> = f.iter().map(|&v| C64::new(v, 0.0)).collect();
        out.set_row(r, &row);
    }
    if let BcSpec::Constrained { .. } = bc {
        // The constraint block must determine the boundary unknowns.
        let c = ComplexMatrix::from_fn(2, 2, |i, j| out[(rows[i], rows[j])]);
        if Lu::factor(&c).is_err() {
            return Err(Error::Precondition("singular constraint block".into()));
        }
    }
    Ok(out)
}

/// A pencil `A - s B` with `k` boundary rows eliminated.
///
/// The boundary functionals `C` (k × (n+1)) are solved for `k` pivot
/// unknowns in terms of the remaining free unknowns, `u = P v`. The reduced
/// pencil acts on `v`: `A_r = A[int, :] P`, `B_r = B[int, :] P`.
#[derive(Clone, Debug)]
pub struct ReducedPencil {
    pub a: ComplexMatrix,
    pub b: ComplexMatrix,
    /// Prolongation from free unknowns to full nodal vectors.
    pub prolong: ComplexMatrix,
    pub free: Vec<usize>,
    pub interior_rows: Vec<usize>,
}

/// Eliminates boundary unknowns using complete pivoting on the functional
/// block.
pub fn reduce_pencil(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    functionals: &[Vec<C64>],
    interior_rows: &[usize],
) -> Result<ReducedPencil> {
    let np = a.cols();
    let k = functionals.len();
    // Gaussian elimination with complete pivoting on C to pick pivot columns.
    let mut c: Vec<Vec<C64>> = functionals.to_vec();
    let mut pivots = Vec::with_capacity(k);
    for r in 0..k {
        let (mut bi, mut bj, mut bv) = (r, 0, -1.0);
        for (i, row) in c.iter().enumerate().skip(r) {
            for (j, v) in row.iter().enumerate() {
                if pivots.contains(&j) {
                    continue;
                }
                if v.norm() > bv {
                    bv = v.norm();
                    bi = i;
                    bj = j;
                }
            }
        }
        if bv <= 0.0 {
            return Err(Error::Precondition("boundary functionals are dependent".into()));
        }
        c.swap(r, bi);
        let piv = c[r][bj];
        for i in 0..k {
            if i != r {
                let f = c[i][bj] / piv;
                if f != C64::new(0.0, 0.0) {
                    let rowr = c[r].clone();
                    for (x, y) in c[i].iter_mut().zip(&rowr) {
                        *x -= f * y;
                    }
                }
            }
        }
        let inv = C64::new(1.0, 0.0) / piv;
        for x in c[r].iter_mut() {
            *x *= inv;
        }
        pivots.push(bj);
    }
    // Now row r reads u[pivots[r]] + Σ_{free j} c[r][j] u_j = 0.
    let free: Vec<usize> = (0..np).filter(|j| !pivots.contains(j)).collect();
    let mut p = ComplexMatrix::zeros(np, free.len());
    for (col, &j) in free.iter().enumerate() {
        p[(j, col)] = C64::new(1.0, 0.0);
        for r in 0..k {
            p[(pivots[r], col)] = -c[r][j];
        }
    }
    let a_r = a.select_rows(interior_rows).matmul(&p);
    let b_r = b.select_rows(interior_rows).matmul(&p);
    Ok(ReducedPencil {
        a: a_r,
        b: b_r,
        prolong: p,
        free,
        interior_rows: interior_rows.to_vec(),
    })
}

impl ReducedPencil {
    /// Finite generalized eigenvalues `s` of `A v = s B v` (B_r inverted).
    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        let lu = Lu::factor(&self.b)?;
        crate::dense::eigenvalues(&lu.solve_matrix(&self.a))
    }

    /// Standard-form matrix `B_r^{-1} A_r`.
    pub fn standard_form(&self) -> Result<ComplexMatrix> {
        Ok(Lu::factor(&self.b)?.solve_matrix(&self.a))
    }
}

/// Reduced pencil for a pair of square operators and a boundary spec.
pub fn reduce_with_bc(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    bc: &BcSpec,
    grid: &SpectralGrid,
) -> Result<ReducedPencil> {
    let funcs: Vec<Vec<C64>> = bc
        .functionals(grid)?
        .into_iter()
        .map(|r| r.into_iter().map(|v| C64::new(v, 0.0)).collect())
        .collect();
    reduce_pencil(a, b, &funcs, &bc.interior_rows(grid.n))
}
