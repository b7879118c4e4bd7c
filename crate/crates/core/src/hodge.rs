//! Periodic-channel fields on `[0, L) × (−1, 1)`, the projections `Π`
//! (streamwise mean) and `P` (onto divergence-free, no-penetration,
//! zero-flux fields), the Hodge decomposition, pressure recovery, and
//! per-mode semigroup checks for the linearized evolution.
//!
//! Fields are stored per Fourier mode `n` (wavenumber `α_n = 2πn/L`) as
//! nodal values on the Chebyshev grid. The inner product is
//! `⟨u, v⟩ = L Σ_n ∫ (û₁ v̂₁* + û₂ v̂₂*) dx₂` with the integral of the
//! polynomial interpolants evaluated exactly (the nodal Clenshaw–Curtis
//! rule is exact only to degree `N`, products need `2N`).

use crate::dense::{eigenvalues, expm_norm, smallest_singular_value, ComplexMatrix, GramMetric, Lu};
use crate::error::{Error, Result};
use crate::flow::{BaseFlow, FlowKind, WallBc};
use crate::spectral::{barycentric, build_grid, reduce_with_bc, BcSpec, RealMatrix, SpectralGrid};
use num_complex::Complex64 as C64;
use std::collections::BTreeMap;
use std::f64::consts::PI;

const ZERO: C64 = C64::new(0.0, 0.0);

fn cr(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// A two-component field, Fourier in `x₁` and nodal in `x₂`.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicField {
    pub length: f64,
    /// Mode `n` ↦ `(û₁(n, ·), û₂(n, ·))` at the grid nodes.
    pub modes: BTreeMap<i64, (Vec<C64>, Vec<C64>)>,
}

impl PeriodicField {
    pub fn zero(length: f64) -> Self {
        Self {
            length,
            modes: BTreeMap::new(),
        }
    }

    pub fn alpha(&self, n: i64) -> f64 {
        2.0 * PI * n as f64 / self.length
    }

    pub fn with_mode(mut self, n: i64, u1: Vec<C64>, u2: Vec<C64>) -> Self {
        self.modes.insert(n, (u1, u2));
        self
    }

    pub fn inner(&self, other: &Self, grid: &SpectralGrid) -> C64 {
        let mass = exact_mass(grid);
        let mut s = ZERO;
        for (n, (a1, a2)) in &self.modes {
            if let Some((b1, b2)) = other.modes.get(n) {
                s += mass_inner(&mass, a1, b1) + mass_inner(&mass, a2, b2);
            }
        }
        s * self.length
    }

    pub fn norm(&self, grid: &SpectralGrid) -> f64 {
        self.inner(self, grid).re.max(0.0).sqrt()
    }

    fn combine(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        let mut out = Self::zero(self.length);
        let keys: std::collections::BTreeSet<i64> = self.modes.keys().chain(other.modes.keys()).copied().collect();
        for n in keys {
            let len = self
                .modes
                .get(&n)
                .or_else(|| other.modes.get(&n))
                .map(|m| m.0.len())
                .unwrap_or(0);
            let zeros = (vec![ZERO; len], vec![ZERO; len]);
            let a = self.modes.get(&n).unwrap_or(&zeros);
            let b = other.modes.get(&n).unwrap_or(&zeros);
            let c1 = a.0.iter().zip(&b.0).map(|(x, y)| f(*x, *y)).collect();
            let c2 = a.1.iter().zip(&b.1).map(|(x, y)| f(*x, *y)).collect();
            out.modes.insert(n, (c1, c2));
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a - b)
    }

    /// Largest mismatch between the coefficients at `−n` and the conjugates
    /// of those at `n` (zero for a real field).
    pub fn reality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (n, (a1, a2)) in &self.modes {
            let (b1, b2) = match self.modes.get(&-n) {
                Some(m) => (&m.0, &m.1),
                None => {
                    let m = a1.iter().chain(a2).map(|z| z.norm()).fold(0.0, f64::max);
                    worst = worst.max(m);
                    continue;
                }
            };
            for (x, y) in a1.iter().zip(b1).chain(a2.iter().zip(b2)) {
                worst = worst.max((x - y.conj()).norm());
            }
        }
        worst
    }

    /// `max_n max_j |iα_n û₁ + Dû₂|` together with `max_n |û₂(n, ±1)|`.
    pub fn divergence_defect(&self, grid: &SpectralGrid) -> (f64, f64) {
        let d = grid.d(1);
        let (mut div, mut wall) = (0.0f64, 0.0f64);
        for (n, (u1, u2)) in &self.modes {
            let a = self.alpha(*n);
            let du2 = d.apply_c(u2);
            for j in 0..u1.len() {
                div = div.max((C64::new(0.0, a) * u1[j] + du2[j]).norm());
            }
            wall = wall.max(u2[0].norm()).max(u2[u2.len() - 1].norm());
        }
        (div, wall)
    }

    /// `∫ û₁(0, x₂) dx₂` (the streamwise flux per unit length).
    pub fn flux(&self, grid: &SpectralGrid) -> C64 {
        self.modes.get(&0).map(|m| grid.integrate_c(&m.0)).unwrap_or(ZERO)
    }
}

/// Interpolation matrix from the nodes of `grid` to those of `fine`.
fn interpolation(grid: &SpectralGrid, fine: &SpectralGrid) -> ComplexMatrix {
    let np = grid.len();
    ComplexMatrix::from_fn(fine.len(), np, |i, j| {
        let mut e = vec![ZERO; np];
        e[j] = cr(1.0);
        barycentric(&grid.nodes, &e, fine.nodes[i])
    })
}

/// Exact `L²(−1, 1)` Gram matrix of the nodal Lagrange basis.
pub fn exact_mass(grid: &SpectralGrid) -> RealMatrix {
    let fine = build_grid(2 * grid.n + 2).expect("grid size is valid");
    let interp = interpolation(grid, &fine);
    let m = interp.adjoint().matmul(&interp.scale_rows(&fine.weights));
    let np = grid.len();
    let mut out = RealMatrix::zeros(np, np);
    for i in 0..np {
        for j in 0..np {
            out.set(i, j, m[(i, j)].re);
        }
    }
    out
}

fn mass_inner(mass: &RealMatrix, a: &[C64], b: &[C64]) -> C64 {
    let mb = mass.apply_c(&b.iter().map(|z| z.conj()).collect::<Vec<_>>());
    a.iter().zip(&mb).map(|(x, y)| x * y).sum()
}

/// `DᵀMD` as a dense real matrix.
fn stiffness(grid: &SpectralGrid, mass: &RealMatrix) -> RealMatrix {
    let np = grid.len();
    let d = grid.d(1);
    let mut md = RealMatrix::zeros(np, np);
    for i in 0..np {
        for j in 0..np {
            md.set(i, j, (0..np).map(|k| mass.get(i, k) * d.get(k, j)).sum());
        }
    }
    let mut out = RealMatrix::zeros(np, np);
    for i in 0..np {
        for j in 0..np {
            out.set(i, j, (0..np).map(|k| d.get(k, i) * md.get(k, j)).sum());
        }
    }
    out
}

/// `Π`: keeps the streamwise mean (mode `n = 0`).
pub fn project_pi(field: &PeriodicField) -> PeriodicField {
    let mut out = PeriodicField::zero(field.length);
    if let Some(m) = field.modes.get(&0) {
        out.modes.insert(0, m.clone());
    }
    out
}

/// Stream function `φ` (zero at the walls) of the orthogonal projection of
/// one mode onto `{(Dφ, −iαφ)}`, from the normal equations
/// `(DᵀMD + α²M)φ = DᵀMû₁ + iαMû₂` on the interior nodes.
fn project_mode(
    u1: &[C64],
    u2: &[C64],
    alpha: f64,
    grid: &SpectralGrid,
    mass: &RealMatrix,
    stiff: &RealMatrix,
) -> Result<Vec<C64>> {
    let np = grid.len();
    let d = grid.d(1);
    let inner: Vec<usize> = (1..np - 1).collect();
    let m = inner.len();
    let mu1 = mass.apply_c(u1);
    let mu2 = mass.apply_c(u2);
    let mut a = ComplexMatrix::zeros(m, m);
    let mut rhs = vec![ZERO; m];
    for (r, &i) in inner.iter().enumerate() {
        for (c, &j) in inner.iter().enumerate() {
            a[(r, c)] = cr(stiff.get(i, j) + alpha * alpha * mass.get(i, j));
        }
        let s: C64 = (0..np).map(|k| mu1[k] * d.get(k, i)).sum();
        rhs[r] = s + C64::new(0.0, alpha) * mu2[i];
    }
    let phi_in = Lu::factor(&a)?.solve(&rhs);
    let mut phi = vec![ZERO; np];
    for (r, &i) in inner.iter().enumerate() {
        phi[i] = phi_in[r];
    }
    Ok(phi)
}

/// `P`: weighted least-squares projection onto `∇⊥φ = (∂₂φ, −∂₁φ)` with
/// `φ = 0` on both walls. For `n = 0` this removes the mean flux.
pub fn project_p(field: &PeriodicField, grid: &SpectralGrid) -> Result<PeriodicField> {
    let d = grid.d(1);
    let mass = exact_mass(grid);
    let stiff = stiffness(grid, &mass);
    let mut out = PeriodicField::zero(field.length);
    for (n, (u1, u2)) in &field.modes {
        check_len(u1, grid)?;
        check_len(u2, grid)?;
        let a = field.alpha(*n);
        let phi = project_mode(u1, u2, a, grid, &mass, &stiff)?;
        let p1 = d.apply_c(&phi);
        let p2 = phi.iter().map(|z| C64::new(0.0, -a) * z).collect();
        out.modes.insert(*n, (p1, p2));
    }
    Ok(out)
}

fn check_len(v: &[C64], grid: &SpectralGrid) -> Result<()> {
    if v.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            got: v.len(),
        });
    }
    Ok(())
}

/// `u = ∇φ_c + ∇⊥φ_d + A(1, 0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HodgeParts {
    pub curl_part: PeriodicField,
    pub div_part: PeriodicField,
    /// `A = ⟨u, (1, 0)⟩ / (2L)`.
    pub constant: C64,
}

impl HodgeParts {
    pub fn constant_field(&self, grid: &SpectralGrid) -> PeriodicField {
        PeriodicField::zero(self.div_part.length).with_mode(0, vec![self.constant; grid.len()], vec![ZERO; grid.len()])
    }

    pub fn reconstruct(&self, grid: &SpectralGrid) -> PeriodicField {
        self.curl_part.add(&self.div_part).add(&self.constant_field(grid))
    }
}

pub fn hodge_decompose(field: &PeriodicField, grid: &SpectralGrid) -> Result<HodgeParts> {
    let div_part = project_p(field, grid)?;
    let constant = field.flux(grid) * 0.5;
    let mut curl_part = field.sub(&div_part);
    if let Some(m) = curl_part.modes.get_mut(&0) {
        for z in m.0.iter_mut() {
            *z -= constant;
        }
    }
    Ok(HodgeParts {
        curl_part,
        div_part,
        constant,
    })
}

/// Pressure `q = c·x₁ + q̃` with `q̃` periodic and of zero mean.
#[derive(Clone, Debug, PartialEq)]
pub struct PressureField {
    pub length: f64,
    /// Coefficient `c` of the affine part.
    pub affine: C64,
    pub modes: BTreeMap<i64, Vec<C64>>,
}

impl PressureField {
    /// `∇q` as a field.
    pub fn gradient(&self, grid: &SpectralGrid) -> PeriodicField {
        let d = grid.d(1);
        let mut out = PeriodicField::zero(self.length);
        for (n, q) in &self.modes {
            let a = 2.0 * PI * *n as f64 / self.length;
            let mut g1: Vec<C64> = q.iter().map(|z| C64::new(0.0, a) * z).collect();
            if *n == 0 {
                g1.iter_mut().for_each(|z| *z += self.affine);
            }
            out.modes.insert(*n, (g1, d.apply_c(q)));
        }
        out
    }
}

/// Relative size of the divergence-free part above which a field is not
/// accepted as a gradient.
pub const CURL_FREE_TOL: f64 = 1e-8;

/// Recovers `q` with `∇q = G` for a curl-free `G`.
pub fn recover_pressure(g: &PeriodicField, grid: &SpectralGrid) -> Result<PressureField> {
    let div = project_p(g, grid)?.norm(grid);
    let scale = g.norm(grid).max(f64::MIN_POSITIVE);
    if div > CURL_FREE_TOL * scale {
        return Err(Error::Precondition(format!(
            "field is not curl-free: divergence-free part {:.3e} of {:.3e}",
            div, scale
        )));
    }
    let np = grid.len();
    let mut modes = BTreeMap::new();
    let mut affine = ZERO;
    for (n, (g1, g2)) in &g.modes {
        if *n != 0 {
            let a = g.alpha(*n);
            modes.insert(*n, g1.iter().map(|z| z / C64::new(0.0, a)).collect());
            continue;
        }
        affine = grid.integrate_c(g1) * 0.5;
        // Least squares Dq ≈ ĝ₂ bordered by ∫q = 0.
        let d = grid.d(1);
        let w = &grid.weights;
        let mass = exact_mass(grid);
        let stiff = stiffness(grid, &mass);
        let mg2 = mass.apply_c(g2);
        let mut a = ComplexMatrix::zeros(np + 1, np + 1);
        let mut rhs = vec![ZERO; np + 1];
        for i in 0..np {
            for j in 0..np {
                a[(i, j)] = cr(stiff.get(i, j));
            }
            a[(i, np)] = cr(w[i]);
            a[(np, i)] = cr(w[i]);
            rhs[i] = (0..np).map(|k| mg2[k] * d.get(k, i)).sum();
        }
        let sol = Lu::factor(&a)?.solve(&rhs);
        modes.insert(0, sol[..np].to_vec());
    }
    Ok(PressureField {
        length: g.length,
        affine,
        modes,
    })
}

/// Linearized evolution of one streamwise mode on stream functions.
#[derive(Clone, Debug)]
pub struct ModeGenerator {
    pub n: i64,
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub length: f64,
    /// Generator on the free coordinates: `dv/dt = G v`.
    pub g: ComplexMatrix,
    /// Energy metric `‖ψ′‖² + α²‖ψ‖²` on the free coordinates.
    pub q: GramMetric,
    /// Free coordinates ↦ nodal stream function.
    pub prolong: ComplexMatrix,
}

impl ModeGenerator {
    /// Eigenvalues of `G` (decaying modes have negative real part).
    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        eigenvalues(&self.g)
    }

    /// `‖e^{tG}‖` in the energy norm.
    pub fn norm_at(&self, t: f64) -> Result<f64> {
        expm_norm(&self.g, t, &self.q)
    }

    /// `‖(−G − z)⁻¹‖` in the energy norm.
    pub fn resolvent_norm(&self, z: C64) -> Result<f64> {
        let mut m = self.g.scale(cr(-1.0));
        m.add_to_diag(-z);
        let s = smallest_singular_value(&m, Some((&self.q, &self.q)), false)?;
        Ok(if s > 0.0 { 1.0 / s } else { f64::INFINITY })
    }
}

/// Assembles `Ł ψ_t = εŁ²ψ − iαUŁψ + iαU″ψ`, `Ł = D² − α²`, with the wall
/// conditions of `bc`.
///
/// The equation is taken in its weak form against test functions from the
/// same constrained polynomial space, with all integrals evaluated exactly
/// on a grid of twice the resolution:
/// `Q v_t = [−ε⟨Łψ, Łψ̃⟩ + iα⟨UŁψ, ψ̃⟩ − iα⟨U″ψ, ψ̃⟩] v`, `Q` the energy Gram.
/// This keeps the discrete generator dissipative in the energy norm up to
/// the advective bound `‖U′‖∞/2`, which strong-form collocation does not.
pub fn mode_generator(
    n: i64,
    epsilon: f64,
    length: f64,
    flow: &BaseFlow,
    bc: WallBc,
    grid: &SpectralGrid,
) -> Result<ModeGenerator> {
    if n == 0 {
        return Err(Error::Precondition("mode index must be nonzero".into()));
    }
    if !(epsilon > 0.0) || !(length > 0.0) {
        return Err(Error::Precondition("epsilon and L must be positive".into()));
    }
    if flow.nodes.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            got: flow.nodes.len(),
        });
    }
    let alpha = 2.0 * PI * n as f64 / length;
    let a2 = alpha * alpha;
    let np = grid.len();
    let eye = ComplexMatrix::identity(np);
    let prolong = reduce_with_bc(&eye, &eye, &bc.spec(), grid)?.prolong;

    let fine = build_grid(2 * grid.n + 4)?;
    let interp = interpolation(grid, &fine);
    let mut lap = grid.dc(2);
    lap.add_to_diag(cr(-a2));
    let psi = interp.matmul(&prolong);
    let dpsi = interp.matmul(&grid.dc(1).matmul(&prolong));
    let lpsi = interp.matmul(&lap.matmul(&prolong));
    let w = &fine.weights;
    let (mut wu, mut wd2u) = (Vec::with_capacity(w.len()), Vec::with_capacity(w.len()));
    for (x, wk) in fine.nodes.iter().zip(w) {
        let p = flow.profile(*x);
        wu.push(wk * p[0]);
        wd2u.push(wk * p[2]);
    }
    let mut gram = dpsi.adjoint().matmul(&dpsi.scale_rows(w));
    gram.axpy(cr(a2), &psi.adjoint().matmul(&psi.scale_rows(w)));
    let ia = C64::new(0.0, alpha);
    let mut k = lpsi.adjoint().matmul(&lpsi.scale_rows(w)).scale(cr(-epsilon));
    k.axpy(ia, &psi.adjoint().matmul(&lpsi.scale_rows(&wu)));
    k.axpy(-ia, &psi.adjoint().matmul(&psi.scale_rows(&wd2u)));
    let g = Lu::factor(&gram)?.solve_matrix(&k);
    let q = GramMetric::from_gram(&gram)?;
    Ok(ModeGenerator {
        n,
        alpha,
        beta: alpha.abs() / epsilon,
        epsilon,
        length,
        g,
        q,
        prolong,
    })
}

/// `‖e^{tG}‖_Q` at each `t`.
pub fn semigroup_norm_curve(gen: &ModeGenerator, ts: &[f64]) -> Result<Vec<f64>> {
    if ts.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::Precondition("times must be non-negative".into()));
    }
    ts.iter().map(|&t| gen.norm_at(t)).collect()
}

/// Decay rate of the streamwise-mean heat problem `∂_t u₁ = ε∂²u₁`:
/// `ε` times the first Dirichlet eigenvalue (no-slip) or the second
/// Neumann eigenvalue (stress-free; the first is the constant, removed by
/// the zero-flux condition).
pub fn pi_decay_rate(epsilon: f64, bc: WallBc) -> Result<f64> {
    let grid = build_grid(40)?;
    let minus_d2 = grid.dc(2).scale(cr(-1.0));
    let (spec, skip) = match bc {
        WallBc::D => (BcSpec::Dirichlet, 0),
        WallBc::S => (BcSpec::Neumann, 1),
    };
    let red = reduce_with_bc(&minus_d2, &ComplexMatrix::identity(grid.len()), &spec, &grid)?;
    let mut ev: Vec<f64> = red.eigenvalues()?.iter().map(|z| z.re).collect();
    ev.sort_by(f64::total_cmp);
    ev.get(skip)
        .map(|l| epsilon * l)
        .ok_or_else(|| Error::UnderResolved("too few heat eigenvalues".into()))
}

/// `M̂(1 + 2M̂(ω − ω̂)/r(ω)) e^{−ωt}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GearhartPruss {
    pub coefficient: f64,
    pub omega: f64,
}

impl GearhartPruss {
    pub fn eval(&self, t: f64) -> f64 {
        self.coefficient * (-self.omega * t).exp()
    }
}

/// Envelope for a semigroup with `‖e^{−tA}‖ ≤ M̂e^{−ω̂t}` and
/// `r(ω) = 1/sup_{Re z = ω}‖(A − z)⁻¹‖`; `r_omega = ∞` is allowed.
pub fn gearhart_pruss_bound(m_hat: f64, omega_hat: f64, omega: f64, r_omega: f64) -> Result<GearhartPruss> {
    if !(m_hat >= 1.0) {
        return Err(Error::Precondition(format!("M_hat must be >= 1, got {m_hat}")));
    }
    if !(omega > omega_hat) {
        return Err(Error::Precondition(format!(
            "omega = {omega} must exceed omega_hat = {omega_hat}"
        )));
    }
    if !(r_omega > 0.0) {
        return Err(Error::Precondition(format!("r(omega) must be positive, got {r_omega}")));
    }
    Ok(GearhartPruss {
        coefficient: m_hat * (1.0 + 2.0 * m_hat * (omega - omega_hat) / r_omega),
        omega,
    })
}

/// `sup_{Re z = ω} ‖(−G − z)⁻¹‖_Q`, by sampling `Im z` over the range of the
/// spectrum and golden-section refinement around the largest sample.
pub fn line_resolvent_sup(gen: &ModeGenerator, omega: f64) -> Result<f64> {
    let ev = gen.eigenvalues()?;
    let (lo, hi) = ev
        .iter()
        .map(|z| -z.im)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
    let pad = 0.25 * (hi - lo).max(gen.alpha.abs());
    let (lo, hi) = (lo - pad, hi + pad);
    let f = |y: f64| gen.resolvent_norm(C64::new(omega, y));
    let samples = 161;
    let h = (hi - lo) / (samples - 1) as f64;
    let mut best = (lo, f(lo)?);
    for k in 1..samples {
        let y = lo + h * k as f64;
        let v = f(y)?;
        if v > best.1 {
            best = (y, v);
        }
    }
    // Golden-section maximisation on the bracketing interval.
    let (mut a, mut b) = (best.0 - h, best.0 + h);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..40 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    Ok(best.1.max(fc).max(fd))
}

/// Geometric grid of `count` times between `t0` and `t1`.
pub fn geometric_times(t0: f64, t1: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![t0];
    }
    let r = (t1 / t0).ln() / (count - 1) as f64;
    (0..count).map(|k| t0 * (r * k as f64).exp()).collect()
}

/// Largest `δ₂(U) = ‖U″‖∞ + ‖U‴‖∞` accepted as nearly Couette.
pub const NEARLY_COUETTE_DELTA2: f64 = 0.5;

/// Per-mode semigroup curves and the weighted supremum.
#[derive(Clone, Debug, PartialEq)]
pub struct RateReport {
    pub upsilon: f64,
    pub epsilon: f64,
    pub length: f64,
    pub beta1: f64,
    pub times: Vec<f64>,
    /// `(n, ‖e^{tG_n}‖_Q)` for `n = 1..=modes`.
    pub curves: Vec<(i64, Vec<f64>)>,
    /// `e^{εΥβ₁^{2/3}t} max_n ‖e^{tG_n}‖_Q` on the time grid.
    pub weighted: Vec<f64>,
    pub sup_weighted: f64,
    /// Log-slope of the weighted curve over its last quarter.
    pub tail_slope: f64,
    /// Bounded: the weighted curve is not growing at the end of the grid.
    pub pass: bool,
    /// Which theorem hypothesis admitted the flow.
    pub hypothesis: &'static str,
}

/// Settings of [`theorem_rate_check`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateCheckConfig {
    pub modes: i64,
    pub time_points: usize,
}

impl Default for RateCheckConfig {
    fn default() -> Self {
        Self {
            modes: 4,
            time_points: 25,
        }
    }
}

fn admit_semigroup_flow(flow: &BaseFlow) -> Result<&'static str> {
    if flow.s_r_radius.is_none() {
        return Err(Error::HypothesisMismatch(format!(
            "flow {} has a critical point (inf|U'| = 0)",
            flow.kind
        )));
    }
    if matches!(flow.kind, FlowKind::Convex(_)) || flow.inf_d2u > 0.0 {
        return Ok("convex");
    }
    if flow.delta2 <= NEARLY_COUETTE_DELTA2 {
        return Ok("nearly-couette");
    }
    Err(Error::HypothesisMismatch(format!(
        "flow {} is neither convex nor nearly Couette (delta_2 = {:.3})",
        flow.kind, flow.delta2
    )))
}

/// Checks that `e^{εΥβ₁^{2/3}t} sup_n ‖e^{tG_n}‖_Q` stays bounded for
/// `n = 1..=modes` on a geometric time grid spanning
/// `[10⁻², 20]/(εβ₁^{2/3})`. Modes are computed on separate threads.
pub fn theorem_rate_check(
    flow: &BaseFlow,
    epsilon: f64,
    length: f64,
    bc: WallBc,
    upsilon: f64,
    grid: &SpectralGrid,
    cfg: RateCheckConfig,
) -> Result<RateReport> {
    let hypothesis = admit_semigroup_flow(flow)?;
    if !(upsilon > 0.0) || cfg.modes < 1 || cfg.time_points < 4 {
        return Err(Error::Precondition(
            "need upsilon > 0, at least one mode and four time points".into(),
        ));
    }
    let beta1 = 2.0 * PI / (length * epsilon);
    let scale = epsilon * beta1.powf(2.0 / 3.0);
    let times = geometric_times(1e-2 / scale, 20.0 / scale, cfg.time_points);
    let results: Vec<Result<Vec<f64>>> = std::thread::scope(|s| {
        let handles: Vec<_> = (1..=cfg.modes)
            .map(|n| {
                let times = &times;
                s.spawn(move || {
                    let gen = mode_generator(n, epsilon, length, flow, bc, grid)?;
                    semigroup_norm_curve(&gen, times)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or(Err(Error::NonFinite)))
            .collect()
    });
    let mut curves = Vec::with_capacity(results.len());
    for (n, r) in (1..=cfg.modes).zip(results) {
        curves.push((n, r?));
    }
    let rate = upsilon * scale;
    let weighted: Vec<f64> = times
        .iter()
        .enumerate()
        .map(|(k, t)| (rate * t).exp() * curves.iter().map(|c| c.1[k]).fold(0.0, f64::max))
        .collect();
    let sup_weighted = weighted.iter().cloned().fold(0.0, f64::max);
    let tail = (times.len() * 3) / 4;
    let (t0, t1) = (times[tail], times[times.len() - 1]);
    let tail_slope = (weighted[times.len() - 1].ln() - weighted[tail].ln()) / (t1 - t0);
    Ok(RateReport {
        upsilon,
        epsilon,
        length,
        beta1,
        times,
        curves,
        weighted,
        sup_weighted,
        tail_slope,
        pass: sup_weighted.is_finite() && tail_slope <= 0.0,
        hypothesis,
    })
}
