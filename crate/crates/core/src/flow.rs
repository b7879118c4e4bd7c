//! Base-flow profiles and assembly of the Schrödinger, Rayleigh and
//! Orr–Sommerfeld operators on the Chebyshev grid.
//!
//! Conventions: nodal vectors are ordered like [`SpectralGrid::nodes`]
//! (node 0 is `x = 1`); pencils are `B(λ) = b0 − βλ·b1` with boundary rows
//! carried by `b0` and zeroed in `b1`.

use crate::dense::{eigenvalues, ComplexMatrix, Lu};
use crate::error::{Error, Result};
use crate::ode::{Dopri, OdeConfig};
use crate::spectral::{barycentric, impose_bc, reduce_with_bc, BcSpec, ReducedPencil, SpectralGrid};
use num_complex::Complex64 as C64;
use std::cell::Cell;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

const I: C64 = C64 { re: 0.0, im: 1.0 };

fn cr(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Flow families the theorems distinguish, plus user-supplied samples.
#[derive(Clone, Debug, PartialEq)]
pub enum FlowKind {
    Couette,
    Poiseuille,
    /// `U = x + δ sin(πx)/π²`.
    NearlyCouette(f64),
    /// `U = x + c x²/2`.
    Convex(f64),
    Custom,
}

impl FromStr for FlowKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let param = |rest: &str| -> Result<f64> {
            rest.parse::<f64>()
                .map_err(|_| Error::Precondition(format!("bad flow parameter in {s:?}")))
        };
        match s {
            "couette" => Ok(FlowKind::Couette),
            "poiseuille" => Ok(FlowKind::Poiseuille),
            _ => {
                if let Some(rest) = s.strip_prefix("nearly:") {
                    Ok(FlowKind::NearlyCouette(param(rest)?))
                } else if let Some(rest) = s.strip_prefix("convex:") {
                    Ok(FlowKind::Convex(param(rest)?))
                } else {
                    Err(Error::Precondition(format!(
                        "unknown flow {s:?} (expected couette, poiseuille, nearly:<δ>, convex:<c>)"
                    )))
                }
            }
        }
    }
}

impl fmt::Display for FlowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlowKind::Couette => write!(f, "couette"),
            FlowKind::Poiseuille => write!(f, "poiseuille"),
            FlowKind::NearlyCouette(d) => write!(f, "nearly:{d}"),
            FlowKind::Convex(c) => write!(f, "convex:{c}"),
            FlowKind::Custom => write!(f, "custom"),
        }
    }
}

impl FlowKind {
    /// `(U, U′, U″, U‴, U⁗)` at `x` for the analytic families.
    fn derivatives(&self, x: f64) -> Option<[f64; 5]> {
        Some(match *self {
            FlowKind::Couette => [x, 1.0, 0.0, 0.0, 0.0],
            FlowKind::Poiseuille => [1.0 - x * x, -2.0 * x, -2.0, 0.0, 0.0],
            FlowKind::NearlyCouette(d) => {
                let (s, c) = (PI * x).sin_cos();
                [
                    x + d * s / (PI * PI),
                    1.0 + d * c / PI,
                    -d * s,
                    -d * PI * c,
                    d * PI * PI * s,
                ]
            }
            FlowKind::Convex(c) => [x + 0.5 * c * x * x, 1.0 + c * x, c, 0.0, 0.0],
            FlowKind::Custom => return None,
        })
    }
}

/// Wall boundary conditions of the channel problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WallBc {
    /// Traction (stress-free): `u = u″ = 0` at `±1`.
    S,
    /// No-slip: `u = u′ = 0` at `±1`.
    D,
}

impl WallBc {
    pub fn spec(self) -> BcSpec {
        match self {
            WallBc::S => BcSpec::Dirichlet2,
            WallBc::D => BcSpec::Dirichlet4,
        }
    }
}

impl FromStr for WallBc {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "S" | "s" => Ok(WallBc::S),
            "D" | "d" => Ok(WallBc::D),
            _ => Err(Error::Precondition(format!("unknown boundary condition {s:?} (expected S or D)"))),
        }
    }
}

impl fmt::Display for WallBc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WallBc::S => "S",
            WallBc::D => "D",
        })
    }
}

/// A shear profile sampled on a grid together with its scalar descriptors.
#[derive(Clone, Debug)]
pub struct BaseFlow {
    pub kind: FlowKind,
    pub nodes: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    pub d2u: Vec<f64>,
    pub d3u: Vec<f64>,
    /// `inf |U′|`; zero when `U′` vanishes somewhere.
    pub m: f64,
    /// Signed wall slopes `U′(−1)` and `U′(1)`.
    pub j_minus: f64,
    pub j_plus: f64,
    /// `min(|U′(−1)|, |U′(1)|)`.
    pub j_m: f64,
    /// `‖U″‖_∞ + ‖U‴‖_∞`.
    pub delta2: f64,
    /// Smallest `r` with the profile in the class `𝒮_r`; `None` when `m = 0`.
    pub s_r_radius: Option<f64>,
    /// `‖U′‖_∞`, the growth exponent of the a-priori semigroup bound.
    pub sup_du: f64,
    /// `inf |U″|`.
    pub inf_d2u: f64,
}

const FINE_SAMPLES: usize = 4001;

/// Builds one of the analytic families on `grid`.
pub fn make_flow(kind: &FlowKind, grid: &SpectralGrid) -> Result<BaseFlow> {
    match *kind {
        FlowKind::NearlyCouette(d) if !(d >= 0.0 && d.is_finite()) => {
            return Err(Error::Precondition(format!("nearly-Couette amplitude must be >= 0, got {d}")))
        }
        FlowKind::Convex(c) if !(c.abs() < 1.0) => {
            return Err(Error::Precondition(format!(
                "convex(c) needs U' = 1 + c x > 0 on [-1, 1], i.e. |c| < 1; got {c}"
            )))
        }
        FlowKind::Custom => {
            return Err(Error::Precondition("custom flows are built with custom_flow".into()))
        }
        _ => {}
    }
    let ev = |x: f64| kind.derivatives(x).expect("analytic family");
    let col = |k: usize| grid.nodes.iter().map(|&x| ev(x)[k]).collect::<Vec<f64>>();
    // Sup/inf norms on a fine uniform sample including the walls.
    let mut sup = [0.0f64; 5];
    let mut inf_du = f64::INFINITY;
    let mut inf_d2u = f64::INFINITY;
    let mut du_sign_change = false;
    let mut prev_sign = 0.0;
    for i in 0..FINE_SAMPLES {
        let x = -1.0 + 2.0 * i as f64 / (FINE_SAMPLES - 1) as f64;
        let d = ev(x);
        for k in 0..5 {
            sup[k] = sup[k].max(d[k].abs());
        }
        inf_du = inf_du.min(d[1].abs());
        inf_d2u = inf_d2u.min(d[2].abs());
        let s = d[1].signum();
        if prev_sign != 0.0 && s != prev_sign {
            du_sign_change = true;
        }
        prev_sign = s;
    }
    // Closed forms where available (the sample only brackets them).
    let m = match *kind {
        FlowKind::Couette => 1.0,
        FlowKind::Poiseuille => 0.0,
        FlowKind::NearlyCouette(d) => (1.0 - d / PI).max(0.0),
        FlowKind::Convex(c) => 1.0 - c.abs(),
        FlowKind::Custom => unreachable!(),
    };
    let m = if du_sign_change { 0.0 } else { m.min(inf_du) };
    let (jm, jp) = (ev(-1.0)[1], ev(1.0)[1]);
    let delta2 = sup[2] + sup[3];
    let norm4: f64 = sup.iter().sum();
    Ok(BaseFlow {
        kind: kind.clone(),
        nodes: grid.nodes.clone(),
        u: col(0),
        du: col(1),
        d2u: col(2),
        d3u: col(3),
        m,
        j_minus: jm,
        j_plus: jp,
        j_m: jm.abs().min(jp.abs()),
        delta2,
        s_r_radius: class_radius(m, norm4),
        sup_du: sup[1],
        inf_d2u,
    })
}

fn class_radius(m: f64, norm4: f64) -> Option<f64> {
    if m <= 1e-12 {
        None
    } else {
        Some((1.0 / m).max(norm4).max(1.0))
    }
}

/// Builds a flow from nodal samples of `U`; derivatives come from spectral
/// differentiation.
pub fn custom_flow(samples: &[f64], grid: &SpectralGrid) -> Result<BaseFlow> {
    if samples.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            got: samples.len(),
        });
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let d: Vec<Vec<f64>> = (1..=4).map(|k| grid.d(k).apply(samples)).collect();
    let sup = |v: &[f64]| v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let mut m = d[0].iter().fold(f64::INFINITY, |a, b| a.min(b.abs()));
    if d[0].windows(2).any(|w| w[0] * w[1] <= 0.0) || m < 1e-12 {
        m = 0.0;
    }
    let n = grid.n;
    let (jp, jm) = (d[0][0], d[0][n]);
    let norm4 = sup(samples) + d.iter().map(|v| sup(v)).sum::<f64>();
    Ok(BaseFlow {
        kind: FlowKind::Custom,
        nodes: grid.nodes.clone(),
        u: samples.to_vec(),
        du: d[0].clone(),
        d2u: d[1].clone(),
        d3u: d[2].clone(),
        m,
        j_minus: jm,
        j_plus: jp,
        j_m: jm.abs().min(jp.abs()),
        delta2: sup(&d[1]) + sup(&d[2]),
        s_r_radius: class_radius(m, norm4),
        sup_du: sup(&d[0]),
        inf_d2u: d[1].iter().fold(f64::INFINITY, |a, b| a.min(b.abs())),
    })
}

impl BaseFlow {
    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// Whether the profile satisfies `inf |U′| > 0`.
    pub fn satisfies_monotonicity(&self) -> bool {
        self.m > 0.0
    }

    /// `(U, U′, U″)` at an arbitrary point of `[-1, 1]`.
    pub fn profile(&self, x: f64) -> [f64; 3] {
        if let Some(d) = self.kind.derivatives(x) {
            return [d[0], d[1], d[2]];
        }
        let interp = |v: &[f64]| {
            let c: Vec<C64> = v.iter().map(|&a| cr(a)).collect();
            barycentric(&self.nodes, &c, x).re
        };
        [interp(&self.u), interp(&self.du), interp(&self.d2u)]
    }

    /// `U(−1)`.
    pub fn u_minus(&self) -> f64 {
        self.profile(-1.0)[0]
    }

    /// `U(1)`.
    pub fn u_plus(&self) -> f64 {
        self.profile(1.0)[0]
    }

    /// All `x ∈ [-1, 1]` with `U(x) = ν`, located by sign changes on a
    /// fine sample and bisection.
    pub fn critical_points(&self, nu: f64) -> Vec<f64> {
        let g = |x: f64| self.profile(x)[0] - nu;
        let samples = 801;
        let mut out = Vec::new();
        let mut xa = -1.0;
        let mut ga = g(xa);
        if ga == 0.0 {
            out.push(xa);
        }
        for i in 1..samples {
            let xb = -1.0 + 2.0 * i as f64 / (samples - 1) as f64;
            let gb = g(xb);
            if gb == 0.0 {
                out.push(xb);
            } else if ga * gb < 0.0 {
                let (mut lo, mut hi) = (xa, xb);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if g(lo) * g(mid) <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                    if hi - lo < 1e-16 {
                        break;
                    }
                }
                out.push(0.5 * (lo + hi));
            }
            xa = xb;
            ga = gb;
        }
        out
    }

    fn check_grid(&self, grid: &SpectralGrid) -> Result<()> {
        if self.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: self.len(),
            });
        }
        Ok(())
    }
}

/// A pencil `B(λ) = b0 − βλ·b1` on the full nodal space with bordered
/// boundary rows.
#[derive(Clone, Debug)]
pub struct OperatorPencil {
    pub b0: ComplexMatrix,
    pub b1: ComplexMatrix,
    pub bc: BcSpec,
    pub alpha: f64,
    pub beta: f64,
    pub flow: FlowKind,
}

impl OperatorPencil {
    /// `ε = α/β`.
    pub fn epsilon(&self) -> f64 {
        self.alpha / self.beta
    }

    /// Bordered matrix `B(λ)`.
    pub fn matrix(&self, lambda: C64) -> ComplexMatrix {
        let mut m = self.b0.clone();
        m.axpy(-lambda * self.beta, &self.b1);
        m
    }

    /// Pencil with the boundary unknowns eliminated.
    pub fn reduce(&self, grid: &SpectralGrid) -> Result<ReducedPencil> {
        reduce_with_bc(&self.b0, &self.b1, &self.bc, grid)
    }
}

fn finish_pencil(
    b0: ComplexMatrix,
    b1: ComplexMatrix,
    bc: BcSpec,
    alpha: f64,
    beta: f64,
    flow: &BaseFlow,
    grid: &SpectralGrid,
) -> Result<OperatorPencil> {
    let b0 = impose_bc(&b0, &bc, grid)?;
    let mut b1 = b1;
    let zero = vec![C64::new(0.0, 0.0); grid.len()];
    for r in bc.rows(grid.n) {
        b1.set_row(r, &zero);
    }
    Ok(OperatorPencil {
        b0,
        b1,
        bc,
        alpha,
        beta,
        flow: flow.kind.clone(),
    })
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Precondition(format!("beta must be positive, got {beta}")));
    }
    Ok(())
}

/// Orr–Sommerfeld pencil:
/// `b0 = (−D² + iβU)(D² − α²) − iβU″`, `b1 = D² − α²`.
pub fn orr_sommerfeld_pencil(
    alpha: f64,
    beta: f64,
    flow: &BaseFlow,
    bc: WallBc,
    grid: &SpectralGrid,
) -> Result<OperatorPencil> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::Precondition(format!("alpha must be >= 0, got {alpha}")));
    }
    check_beta(beta)?;
    flow.check_grid(grid)?;
    let np = grid.len();
    let d2 = grid.d(2);
    let d4 = grid.d(4);
    let a2 = alpha * alpha;
    // (−D² + iβU)(D² − α²) = −D⁴ + α²D² + iβU D² − iβα² U.
    let b0 = ComplexMatrix::from_fn(np, np, |i, j| {
        let mut v = C64::new(-d4.get(i, j) + a2 * d2.get(i, j), beta * flow.u[i] * d2.get(i, j));
        if i == j {
            v += I * (-beta * a2 * flow.u[i] - beta * flow.d2u[i]);
        }
        v
    });
    let b1 = ComplexMatrix::from_fn(np, np, |i, j| {
        cr(d2.get(i, j) - if i == j { a2 } else { 0.0 })
    });
    finish_pencil(b0, b1, bc.spec(), alpha, beta, flow, grid)
}

/// One eigenvalue reported in the three scalings `λ`, `Λ̂ = βλ + α²` and
/// `Λ = εΛ̂`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OsEigen {
    pub lambda: C64,
    pub lambda_hat: C64,
    pub big_lambda: C64,
}

/// Finite spectrum of an Orr–Sommerfeld pencil, least stable first
/// (ascending `Re Λ̂`).
pub fn os_spectrum(pencil: &OperatorPencil, grid: &SpectralGrid) -> Result<Vec<OsEigen>> {
    let red = pencil.reduce(grid)?;
    let s = red.eigenvalues()?;
    let a2 = pencil.alpha * pencil.alpha;
    let eps = pencil.epsilon();
    let mut out: Vec<OsEigen> = s
        .into_iter()
        .map(|s| {
            let hat = s + a2;
            OsEigen {
                lambda: s / pencil.beta,
                lambda_hat: hat,
                big_lambda: hat * eps,
            }
        })
        .collect();
    out.sort_by(|a, b| a.lambda_hat.re.total_cmp(&b.lambda_hat.re));
    Ok(out)
}

/// Result of the neutral-stability search.
#[derive(Clone, Copy, Debug)]
pub struct CriticalReynolds {
    pub reynolds: f64,
    pub alpha: f64,
    pub leading: OsEigen,
    pub iterations: usize,
}

/// Finds `ε⁻¹` at which the least-stable mode of the no-slip pencil is
/// neutral (`Re Λ̂ = 0`), by a bracketed Illinois iteration in `ε⁻¹`.
pub fn critical_reynolds(
    flow: &BaseFlow,
    grid: &SpectralGrid,
    alpha: f64,
    bracket: (f64, f64),
    rel_tol: f64,
) -> Result<CriticalReynolds> {
    if !(alpha > 0.0) {
        return Err(Error::Precondition("alpha must be positive".into()));
    }
    let (mut a, mut b) = bracket;
    if !(a > 0.0 && b > a) {
        return Err(Error::Precondition(format!("invalid bracket ({a}, {b})")));
    }
    let leading = |re: f64| -> Result<OsEigen> {
        let p = orr_sommerfeld_pencil(alpha, alpha * re, flow, WallBc::D, grid)?;
        os_spectrum(&p, grid)?
            .into_iter()
            .next()
            .ok_or_else(|| Error::UnderResolved("empty spectrum".into()))
    };
    let mut fa = leading(a)?.lambda_hat.re;
    let mut fb = leading(b)?.lambda_hat.re;
    if fa * fb > 0.0 {
        return Err(Error::Precondition(format!(
            "bracket ({a}, {b}) does not straddle neutral stability (Re Λ̂ = {fa:e}, {fb:e})"
        )));
    }
    let mut side = 0i32;
    let mut iterations = 0;
    while (b - a) > rel_tol * b && iterations < 100 {
        iterations += 1;
        let c = (a * fb - b * fa) / (fb - fa);
        let c = if c > a && c < b { c } else { 0.5 * (a + b) };
        let fc = leading(c)?.lambda_hat.re;
        if fc == 0.0 {
            a = c;
            b = c;
            break;
        }
        if fc * fb < 0.0 {
            a = b;
            fa = fb;
            b = c;
            fb = fc;
            side = 0;
        } else {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        }
        if a > b {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut fa, &mut fb);
            side = -side;
        }
    }
    let re = if fa.abs() < fb.abs() { a } else { b };
    Ok(CriticalReynolds {
        reynolds: re,
        alpha,
        leading: leading(re)?,
        iterations,
    })
}

/// `(−D² + iβU)` with its `b1 = I` companion and the given boundary rows.
pub fn schrodinger_pencil(
    beta: f64,
    flow: &BaseFlow,
    grid: &SpectralGrid,
    bc: BcSpec,
    alpha: f64,
) -> Result<OperatorPencil> {
    check_beta(beta)?;
    flow.check_grid(grid)?;
    let np = grid.len();
    let d2 = grid.d(2);
    let b0 = ComplexMatrix::from_fn(np, np, |i, j| {
        let mut v = cr(-d2.get(i, j));
        if i == j {
            v += I * (beta * flow.u[i]);
        }
        v
    });
    finish_pencil(b0, ComplexMatrix::identity(np), bc, alpha, beta, flow, grid)
}

/// Bordered Dirichlet realization of `𝓛_β = −d²/dx² + iβU`.
pub fn schrodinger_dirichlet(beta: f64, flow: &BaseFlow, grid: &SpectralGrid) -> Result<ComplexMatrix> {
    Ok(schrodinger_pencil(beta, flow, grid, BcSpec::Dirichlet, 0.0)?.b0)
}

/// `𝔷₊(x) = sinh α(1+x) / sinh 2α` in a form that cannot overflow:
/// `e^{−α(1−x)} (1 − e^{−2α(1+x)}) / (1 − e^{−4α})`.
pub fn zeta_plus(alpha: f64, x: f64) -> f64 {
    (-alpha * (1.0 - x)).exp() * (-(-2.0 * alpha * (1.0 + x)).exp_m1()) / (-(-4.0 * alpha).exp_m1())
}

/// `𝔷₋(x) = 𝔷₊(−x)`.
pub fn zeta_minus(alpha: f64, x: f64) -> f64 {
    zeta_plus(alpha, -x)
}

/// Boundary spec with the two integral constraints `⟨𝔷±, u⟩ = 0`.
pub fn zeta_constraints(alpha: f64, grid: &SpectralGrid) -> Result<BcSpec> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Precondition(format!("alpha must be positive, got {alpha}")));
    }
    Ok(BcSpec::Constrained {
        plus: grid.sample(|x| zeta_plus(alpha, x)),
        minus: grid.sample(|x| zeta_minus(alpha, x)),
    })
}

/// `−D² + iβU` with the constraint rows `⟨𝔷±, u⟩ = 0` in place of the
/// wall rows.
pub fn schrodinger_constrained(
    beta: f64,
    flow: &BaseFlow,
    grid: &SpectralGrid,
    alpha: f64,
) -> Result<ComplexMatrix> {
    let bc = zeta_constraints(alpha, grid)?;
    Ok(schrodinger_pencil(beta, flow, grid, bc, alpha)?.b0)
}

/// Constrained pencil companion of [`schrodinger_constrained`].
pub fn schrodinger_constrained_pencil(
    beta: f64,
    flow: &BaseFlow,
    grid: &SpectralGrid,
    alpha: f64,
) -> Result<OperatorPencil> {
    let bc = zeta_constraints(alpha, grid)?;
    schrodinger_pencil(beta, flow, grid, bc, alpha)
}

/// Bordered Dirichlet Rayleigh matrix `(U + iλ)(−D² + α²) + U″`.
pub fn rayleigh_matrix(lambda: C64, alpha: f64, flow: &BaseFlow, grid: &SpectralGrid) -> Result<ComplexMatrix> {
    flow.check_grid(grid)?;
    let np = grid.len();
    let d2 = grid.d(2);
    let a2 = alpha * alpha;
    let m = ComplexMatrix::from_fn(np, np, |i, j| {
        let s = flow.u[i] + I * lambda;
        let mut v = -s * d2.get(i, j);
        if i == j {
            v += s * a2 + flow.d2u[i];
        }
        v
    });
    impose_bc(&m, &BcSpec::Dirichlet, grid)
}

/// Collocation solve of `A_{λ,α} φ = v` with `φ(±1) = 0`. Suitable when
/// `U + iλ` stays away from zero on the grid scale.
pub fn rayleigh_collocation_solve(
    lambda: C64,
    alpha: f64,
    flow: &BaseFlow,
    grid: &SpectralGrid,
    v: &[C64],
) -> Result<Vec<C64>> {
    if v.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            got: v.len(),
        });
    }
    let m = rayleigh_matrix(lambda, alpha, flow, grid)?;
    let mut rhs = v.to_vec();
    rhs[0] = C64::new(0.0, 0.0);
    rhs[grid.n] = C64::new(0.0, 0.0);
    Ok(Lu::factor(&m)?.solve(&rhs))
}

/// Right-hand side of a Rayleigh problem as a function of `x`, with the
/// points where it fails to be smooth.
pub struct Forcing<'a> {
    f: Box<dyn Fn(f64) -> C64 + Sync + 'a>,
    breaks: Vec<f64>,
}

impl<'a> Forcing<'a> {
    pub fn new(f: impl Fn(f64) -> C64 + Sync + 'a, breaks: Vec<f64>) -> Self {
        Self {
            f: Box::new(f),
            breaks,
        }
    }

    pub fn constant(c: C64) -> Self {
        Self::new(move |_| c, Vec::new())
    }

    /// `height · 1_{[a, b]}`.
    pub fn indicator(a: f64, b: f64, height: f64) -> Self {
        Self::new(
            move |x| if x >= a && x <= b { cr(height) } else { cr(0.0) },
            vec![a, b],
        )
    }

    /// Polynomial interpolant of nodal values.
    pub fn nodal(grid: &'a SpectralGrid, values: Vec<C64>) -> Self {
        Self::new(move |x| barycentric(&grid.nodes, &values, x), Vec::new())
    }

    pub fn eval(&self, x: f64) -> C64 {
        (self.f)(x)
    }

    /// `‖v‖_{L^p(−1,1)}` by composite quadrature respecting breakpoints.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let mut pts = vec![-1.0, 1.0];
        pts.extend(self.breaks.iter().copied().filter(|x| *x > -1.0 && *x < 1.0));
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let mut s = 0.0;
        for w in pts.windows(2) {
            let h = ((w[1] - w[0]) / 64.0).max(1e-300);
            s += crate::quad::composite_real(w[0], w[1], h, |x| cr(self.eval(x).norm().powf(p))).re;
        }
        s.powf(1.0 / p)
    }
}

/// Settings for the adaptive Rayleigh solves.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayleighConfig {
    pub ode: OdeConfig,
}

impl Default for RayleighConfig {
    fn default() -> Self {
        Self {
            ode: OdeConfig {
                rtol: 1e-11,
                atol: 1e-14,
                min_step: 1e-13,
                max_steps: 4_000_000,
            },
        }
    }
}

/// Solution of a Rayleigh two-point problem.
#[derive(Clone, Debug)]
pub struct RayleighSolution {
    /// `φ` at the grid nodes (the regularized `φ_κ` in the embedded case).
    pub phi: Vec<C64>,
    /// `(U − ν)·w_κ` at the nodes: the limit extraction, equal to `phi`
    /// for a direct solve. Its distance to the `κ → 0` limit is `O(κ²)`
    /// away from the critical point, against `O(κ |log|x − x_ν||)` for
    /// `phi`.
    pub phi_limit: Vec<C64>,
    pub l2_norm: f64,
    /// `‖φ‖_{1,2} = (‖φ‖² + ‖φ′‖²)^{1/2}` of `phi`.
    pub h1_norm: f64,
    pub kappa: f64,
}

/// Coefficients of one divergence-form system `−(a w′)′ + α² a w = v`,
/// `φ = s·w`.
#[derive(Clone, Copy)]
struct DivForm {
    lambda: C64,
    kappa: f64,
    regularized: bool,
}

impl DivForm {
    /// `(a, s, s_limit)` given `U` at the point.
    fn coeffs(&self, u: f64) -> (C64, C64, C64) {
        if self.regularized {
            let d = u - self.lambda.im;
            let a = cr(d * d + self.kappa * self.kappa);
            (a, C64::new(d, self.kappa), cr(d))
        } else {
            let s = u + I * self.lambda;
            (s * s, s, s)
        }
    }
}

fn needs_regularization(lambda: C64, flow: &BaseFlow) -> bool {
    // U + iλ = (U − Im λ) + i Re λ vanishes somewhere only in this case.
    lambda.re == 0.0 && !flow.critical_points(lambda.im).is_empty()
}

struct SolveOutput {
    phi: Vec<Vec<C64>>,
    phi_limit: Vec<Vec<C64>>,
    l2: Vec<f64>,
    h1: Vec<f64>,
    increments: Vec<f64>,
}

/// Shooting with superposition for several systems sharing `α`, `v` and
/// breakpoints; a second pass integrates the true solutions and
/// accumulates the norms and pairwise `H¹` distances.
fn solve_div_forms(
    systems: &[DivForm],
    alpha: f64,
    flow: &BaseFlow,
    grid: &SpectralGrid,
    forcing: &Forcing<'_>,
    cfg: &RayleighConfig,
) -> Result<SolveOutput> {
    flow.check_grid(grid)?;
    let k = systems.len();
    let a2 = alpha * alpha;
    // Stops ranked grid node > forcing break > critical point; stops
    // closer than MERGE_TOL collapse onto the highest-ranked one (nodes
    // must stay exact so that values can be recorded there).
    const MERGE_TOL: f64 = 1e-10;
    let mut ranked: Vec<(f64, u8)> = grid.nodes.iter().map(|x| (*x, 2)).collect();
    ranked.extend(forcing.breaks.iter().map(|x| (*x, 1)));
    for sys in systems {
        let nu = sys.lambda.im;
        if sys.regularized || sys.lambda.re.abs() < 0.5 {
            ranked.extend(flow.critical_points(nu).into_iter().map(|x| (x, 0)));
        }
    }
    ranked.retain(|(x, _)| *x >= -1.0 && *x <= 1.0);
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, u8)> = Vec::with_capacity(ranked.len());
    for (x, r) in ranked {
        match merged.last_mut() {
            Some(last) if x - last.0 < MERGE_TOL => {
                if r > last.1 {
                    *last = (x, r);
                }
            }
            _ => merged.push((x, r)),
        }
    }
    let stops: Vec<f64> = merged.into_iter().map(|(x, _)| x).collect();
    // Forcing is sampled from inside the current segment so that a jump at
    // (or within MERGE_TOL of) a stop is seen one-sidedly.
    let segment = Cell::new((stops[0], stops[0]));
    let force = |x: f64| {
        let (lo, hi) = segment.get();
        if hi - lo < 1e-6 {
            forcing.eval(0.5 * (lo + hi))
        } else {
            forcing.eval(x.clamp(lo + 2.0 * MERGE_TOL, hi - 2.0 * MERGE_TOL))
        }
    };

    // Pass 1: homogeneous (w, q) = (0, 1) and particular (0, 0) per system.
    let rhs1 = |x: f64, y: &[C64], dy: &mut [C64]| {
        let u = flow.profile(x)[0];
        let v = force(x);
        for (i, sys) in systems.iter().enumerate() {
            let (a, _, _) = sys.coeffs(u);
            let o = 4 * i;
            dy[o] = y[o + 1] / a;
            dy[o + 1] = a2 * a * y[o];
            dy[o + 2] = y[o + 3] / a;
            dy[o + 3] = a2 * a * y[o + 2] - v;
        }
    };
    let mut y = vec![C64::new(0.0, 0.0); 4 * k];
    for i in 0..k {
        y[4 * i + 1] = cr(1.0);
    }
    let mut ode = Dopri::new(rhs1, cfg.ode);
    for w in stops.windows(2) {
        segment.set((w[0], w[1]));
        ode.integrate(w[0], w[1], &mut y)?;
    }
    let mut c = Vec::with_capacity(k);
    for i in 0..k {
        let (wh, wp) = (y[4 * i], y[4 * i + 2]);
        if !(wh.norm() > 1e-14 * (wp.norm() + 1e-300)) || wh.norm() == 0.0 {
            return Err(Error::NumericallySingular {
                sigma: wh.norm(),
                threshold: 1e-14,
            });
        }
        c.push(-wp / wh);
    }

    // Pass 2: state (w_i, q_i) and accumulators
    // [∫|φ_i|², ∫|φ_i′|²]_i, [∫|Δφ|² + |Δφ′|²]_{pairs}.
    let acc0 = 2 * k;
    let inc0 = acc0 + 2 * k;
    let dim = inc0 + k.saturating_sub(1);
    let phis = |x: f64, y: &[C64]| -> (Vec<C64>, Vec<C64>) {
        let p = flow.profile(x);
        let mut f = Vec::with_capacity(k);
        let mut df = Vec::with_capacity(k);
        for (i, sys) in systems.iter().enumerate() {
            let (a, s, _) = sys.coeffs(p[0]);
            let (w, q) = (y[2 * i], y[2 * i + 1]);
            f.push(s * w);
            df.push(p[1] * w + s * q / a);
        }
        (f, df)
    };
    let rhs2 = |x: f64, y: &[C64], dy: &mut [C64]| {
        let u = flow.profile(x)[0];
        let v = force(x);
        for (i, sys) in systems.iter().enumerate() {
            let (a, _, _) = sys.coeffs(u);
            dy[2 * i] = y[2 * i + 1] / a;
            dy[2 * i + 1] = a2 * a * y[2 * i] - v;
        }
        let (f, df) = phis(x, y);
        for i in 0..k {
            dy[acc0 + 2 * i] = cr(f[i].norm_sqr());
            dy[acc0 + 2 * i + 1] = cr(df[i].norm_sqr());
        }
        for i in 0..k.saturating_sub(1) {
            dy[inc0 + i] = cr((f[i] - f[i + 1]).norm_sqr() + (df[i] - df[i + 1]).norm_sqr());
        }
    };
    let mut y = vec![C64::new(0.0, 0.0); dim];
    for i in 0..k {
        y[2 * i + 1] = c[i];
    }
    let at = |x: f64, y: &[C64], phi: &mut Vec<Vec<C64>>, lim: &mut Vec<Vec<C64>>| {
        let u = flow.profile(x)[0];
        for (i, sys) in systems.iter().enumerate() {
            let (_, s, sl) = sys.coeffs(u);
            phi[i].push(s * y[2 * i]);
            lim[i].push(sl * y[2 * i]);
        }
    };
    let mut phi_asc = vec![Vec::new(); k];
    let mut lim_asc = vec![Vec::new(); k];
    let node_set: Vec<f64> = grid.nodes.iter().rev().copied().collect();
    let mut next_node = 0;
    let mut record = |x: f64, y: &[C64], phi: &mut Vec<Vec<C64>>, lim: &mut Vec<Vec<C64>>| {
        while next_node < node_set.len() && node_set[next_node] == x {
            at(x, y, phi, lim);
            next_node += 1;
        }
    };
    record(stops[0], &y, &mut phi_asc, &mut lim_asc);
    let mut ode = Dopri::new(rhs2, cfg.ode);
    for w in stops.windows(2) {
        segment.set((w[0], w[1]));
        ode.integrate(w[0], w[1], &mut y)?;
        record(w[1], &y, &mut phi_asc, &mut lim_asc);
    }
    // Nodes are stored descending in x.
    let mut phi = Vec::with_capacity(k);
    let mut phi_limit = Vec::with_capacity(k);
    for i in 0..k {
        let mut p = std::mem::take(&mut phi_asc[i]);
        let mut l = std::mem::take(&mut lim_asc[i]);
        // Enforce the exact boundary values.
        if let Some(last) = p.last_mut() {
            *last = C64::new(0.0, 0.0);
        }
        if let Some(last) = l.last_mut() {
            *last = C64::new(0.0, 0.0);
        }
        p.reverse();
        l.reverse();
        phi.push(p);
        phi_limit.push(l);
    }
    let l2 = (0..k).map(|i| y[acc0 + 2 * i].re.max(0.0).sqrt()).collect();
    let h1 = (0..k)
        .map(|i| (y[acc0 + 2 * i].re + y[acc0 + 2 * i + 1].re).max(0.0).sqrt())
        .collect();
    let increments = (0..k.saturating_sub(1)).map(|i| y[inc0 + i].re.max(0.0).sqrt()).collect();
    Ok(SolveOutput {
        phi,
        phi_limit,
        l2,
        h1,
        increments,
    })
}

/// Solves `A_{λ,α} φ = v`, `φ(±1) = 0`.
///
/// Away from the embedded case the equation is integrated in the
/// divergence form `−(s²w′)′ + α²s²w = v`, `φ = s w`, `s = U + iλ`. When
/// `Re λ = 0` and `ν = Im λ` lies in the range of `U`, the κ-regularized
/// problem `−([(U−ν)² + κ²] w′)′ + α²[(U−ν)² + κ²] w = v`,
/// `φ_κ = (U − ν + iκ) w` is solved instead; `kappa` is ignored otherwise.
pub fn rayleigh_solve(
    lambda: C64,
    alpha: f64,
    flow: &BaseFlow,
    grid: &SpectralGrid,
    forcing: &Forcing<'_>,
    kappa: f64,
    cfg: &RayleighConfig,
) -> Result<RayleighSolution> {
    let regularized = needs_regularization(lambda, flow);
    if regularized && !(kappa > 0.0) {
        return Err(Error::Precondition(
            "embedded spectral parameter: kappa must be positive".into(),
        ));
    }
    let sys = DivForm {
        lambda,
        kappa: if regularized { kappa } else { 0.0 },
        regularized,
    };
    let out = solve_div_forms(&[sys], alpha, flow, grid, forcing, cfg)?;
    Ok(RayleighSolution {
        phi: out.phi.into_iter().next().expect("one system"),
        phi_limit: out.phi_limit.into_iter().next().expect("one system"),
        l2_norm: out.l2[0],
        h1_norm: out.h1[0],
        kappa: sys.kappa,
    })
}

/// Default regularization schedule for embedded solves.
pub const KAPPA_SCHEDULE: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// Embedded solve over a decreasing κ schedule.
#[derive(Clone, Debug)]
pub struct EmbeddedSolve {
    pub kappas: Vec<f64>,
    pub h1_norms: Vec<f64>,
    /// `‖φ_{κ_i} − φ_{κ_{i+1}}‖_{1,2}`.
    pub increments: Vec<f64>,
    /// Every increment ratio below 1/2.
    pub stabilized: bool,
    /// Solution at the smallest κ.
    pub solution: RayleighSolution,
}

/// Drives [`rayleigh_solve`] at `λ = iν` over `kappas` and reports the
/// Cauchy increments.
pub fn rayleigh_embedded(
    nu: f64,
    alpha: f64,
    flow: &BaseFlow,
    grid: &SpectralGrid,
    forcing: &Forcing<'_>,
    kappas: &[f64],
    cfg: &RayleighConfig,
) -> Result<EmbeddedSolve> {
    if kappas.len() < 2 || kappas.windows(2).any(|w| !(w[1] < w[0])) || kappas.iter().any(|k| !(*k > 0.0)) {
        return Err(Error::Precondition("kappa schedule must be positive and decreasing".into()));
    }
    let lambda = C64::new(0.0, nu);
    if !needs_regularization(lambda, flow) {
        return Err(Error::Precondition(format!("nu = {nu} is outside the range of U")));
    }
    let systems: Vec<DivForm> = kappas
        .iter()
        .map(|&kappa| DivForm {
            lambda,
            kappa,
            regularized: true,
        })
        .collect();
    let out = solve_div_forms(&systems, alpha, flow, grid, forcing, cfg)?;
    let stabilized = out.increments.windows(2).all(|w| w[1] < 0.5 * w[0]);
    let last = kappas.len() - 1;
    Ok(EmbeddedSolve {
        kappas: kappas.to_vec(),
        h1_norms: out.h1.clone(),
        increments: out.increments,
        stabilized,
        solution: RayleighSolution {
            phi: out.phi[last].clone(),
            phi_limit: out.phi_limit[last].clone(),
            l2_norm: out.l2[last],
            h1_norm: out.h1[last],
            kappa: kappas[last],
        },
    })
}

/// Closed-form solution of `(x − ν)(−u″) = 1`, `u(±1) = 0`, for Couette
/// flow with `α = 0`, `ν ∈ (−1, 1)`:
/// `u = A₁(x − ν) + A₂ − (x − ν) log|x − ν|` with
/// `A₁ = ½[(1−ν) log(1−ν) + (1+ν) log(1+ν)]`,
/// `A₂ = ½(1 − ν²) log((1−ν)/(1+ν))`.
pub fn couette_embedded_closed_form(nu: f64, x: f64) -> f64 {
    let (l1, l2) = ((1.0 - nu).ln(), (1.0 + nu).ln());
    let a1 = 0.5 * ((1.0 - nu) * l1 + (1.0 + nu) * l2);
    let a2 = 0.5 * (1.0 - nu * nu) * (l1 - l2);
    let d = x - nu;
    let log_term = if d == 0.0 { 0.0 } else { d * d.abs().ln() };
    a1 * d + a2 - log_term
}

/// Smallest eigenvalue of the quadratic form
/// `I(φ) = ½‖φ′‖² + ⟨U″(U−ν)/((U−ν)² + μ²) φ, φ⟩` on `H¹₀`, relative to
/// `‖φ‖²`, with `λ = μ + iν`.
pub fn gamma_m(lambda: C64, flow: &BaseFlow, grid: &SpectralGrid) -> Result<f64> {
    flow.check_grid(grid)?;
    let mu = lambda.re;
    if mu == 0.0 {
        return Err(Error::Precondition("gamma_m needs Re λ != 0".into()));
    }
    let nu = lambda.im;
    let n = grid.n;
    let int: Vec<usize> = (1..n).collect();
    let d1 = grid.d(1);
    let w = &grid.weights;
    let m = int.len();
    // Stiffness ½ Dᵀ W D on interior columns, then symmetric scaling by W^{-1/2}.
    let mut k = ComplexMatrix::zeros(m, m);
    for (a, &i) in int.iter().enumerate() {
        for (b, &j) in int.iter().enumerate() {
            let mut s = 0.0;
            for r in 0..=n {
                s += d1.get(r, i) * w[r] * d1.get(r, j);
            }
            k[(a, b)] = cr(0.5 * s / (w[i] * w[j]).sqrt());
        }
        let d = flow.u[i] - nu;
        k[(a, a)] += flow.d2u[i] * d / (d * d + mu * mu);
    }
    let ev = eigenvalues(&k)?;
    Ok(ev.iter().map(|z| z.re).fold(f64::INFINITY, f64::min))
}
