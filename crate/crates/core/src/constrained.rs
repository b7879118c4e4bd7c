//! Spectrum of the constrained half-line complex Airy operator
//! `𝓛^θ = -d²/dx² + ix` on `ℝ₊` with domain condition `⟨e^{-θx}, u⟩ = 0`.
//!
//! Eigenvalues are the zeros of `λ ↦ F(λ, θ)`; the eigenfunction is
//! `v(x) = Ai(e^{iπ/6}(x + iλ))`. The module tracks the leftmost zero
//! `μ₀(θ)`, continues branches in `θ`, evaluates the infimum `μ̂_m`, and
//! cross-checks against a collocation matrix of `𝓛^θ`.

use crate::airy::{
    airy_ai, airy_ai_prime, airy_real_zeros, f_laplace, f_laplace_dlambda, zeros_in_region, Analytic,
    LaplaceF, Rect, ZeroSearch, ZeroSet,
};
use crate::dense::{eigenvalues, ComplexMatrix};
use crate::error::{Error, Result};
use crate::quad::composite_real;
use crate::spectral::{build_grid, reduce_pencil};
use num_complex::Complex64 as C64;
use std::f64::consts::{FRAC_PI_3, FRAC_PI_6};
use std::fmt::Write as _;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// A point on a branch of `σ(𝓛^θ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchPoint {
    pub theta: f64,
    pub lambda: C64,
    /// `Re λ`.
    pub mu: f64,
}

impl BranchPoint {
    fn new(theta: f64, lambda: C64) -> Self {
        BranchPoint {
            theta,
            lambda,
            mu: lambda.re,
        }
    }

    /// `|F(λ, θ)|`.
    pub fn residual(&self) -> f64 {
        f_laplace(self.lambda, self.theta).map(|v| v.norm()).unwrap_or(f64::INFINITY)
    }

    /// The lower bound `-min(θ², θ^{-2})/2` that `μ` must respect.
    pub fn lower_bound(&self) -> f64 {
        let t2 = self.theta * self.theta;
        if t2 == 0.0 {
            0.0
        } else {
            -0.5 * t2.min(1.0 / t2)
        }
    }
}

/// Window searched for the leftmost zero of `F(·, θ)`.
#[derive(Clone, Copy, Debug)]
pub struct Mu0Window {
    pub re_min: f64,
    /// Distance above `Re ν₁` of the right edge.
    pub re_margin: f64,
    pub im_half: f64,
}

impl Default for Mu0Window {
    fn default() -> Self {
        Mu0Window {
            re_min: -1.0,
            re_margin: 3.0,
            im_half: 8.0,
        }
    }
}

impl Mu0Window {
    pub fn rect(&self) -> Rect {
        let re_nu1 = 0.5 * airy_real_zeros(1)[0].abs();
        Rect::new(self.re_min, re_nu1 + self.re_margin, -self.im_half, self.im_half)
    }
}

/// All zeros of `F(·, θ)` in the window.
pub fn f_zeros(theta: f64, window: Mu0Window) -> Result<ZeroSet> {
    if !(theta >= 0.0) {
        return Err(Error::Precondition(format!("theta = {theta} must be >= 0")));
    }
    let set = zeros_in_region(&LaplaceF { theta }, window.rect(), ZeroSearch::default())?;
    if !set.is_complete() {
        return Err(Error::UnderResolved(format!(
            "zero count of F(., {theta}) not certified ({} flagged cells)",
            set.flagged.len()
        )));
    }
    Ok(set)
}

/// Leftmost zero of `F(·, θ)` in the default window.
pub fn mu0(theta: f64) -> Result<BranchPoint> {
    mu0_in(theta, Mu0Window::default())
}

/// Leftmost zero of `F(·, θ)` in the given window.
pub fn mu0_in(theta: f64, window: Mu0Window) -> Result<BranchPoint> {
    let set = f_zeros(theta, window)?;
    set.zeros
        .iter()
        .min_by(|a, b| a.re.total_cmp(&b.re))
        .map(|z| BranchPoint::new(theta, *z))
        .ok_or_else(|| Error::NoZeroInWindow(format!("{:?}", window.rect())))
}

/// Newton refinement of a zero of `F(·, θ)` from `guess`.
pub fn refine_zero(theta: f64, guess: C64) -> Result<BranchPoint> {
    let f = LaplaceF { theta };
    let mut z = guess;
    for _ in 0..40 {
        let v = f.value(z);
        let d = f_laplace_dlambda(z, theta, v);
        if d.norm() == 0.0 {
            break;
        }
        let step = v / d;
        z -= step;
        if step.norm() < 1e-14 * (1.0 + z.norm()) {
            break;
        }
    }
    let p = BranchPoint::new(theta, z);
    let r = f.value(z).norm();
    if r < 1e-11 && z.is_finite() {
        Ok(p)
    } else {
        Err(Error::UnderResolved(format!(
            "Newton on F(., {theta}) did not converge from {guess} (|F| = {r:e})"
        )))
    }
}

/// `v(0) = Ai(e^{2πi/3}λ)` and `v'(0) = e^{iπ/6} Ai'(e^{2πi/3}λ)`.
fn v_boundary(lambda: C64) -> (C64, C64) {
    let s = C64::from_polar(1.0, 2.0 * FRAC_PI_3) * lambda;
    (airy_ai(s), C64::from_polar(1.0, FRAC_PI_6) * airy_ai_prime(s))
}

/// Right-hand side `dλ/dθ = -v'(0)/v(0) - θ`.
pub fn branch_velocity(theta: f64, lambda: C64) -> Result<C64> {
    let (v0, vp0) = v_boundary(lambda);
    if v0.norm() < 1e-12 {
        return Err(Error::BranchSingularity {
            theta,
            modulus: v0.norm(),
        });
    }
    Ok(-vp0 / v0 - theta)
}

/// `‖v‖²_{L²(ℝ₊)} / |v(0)|²` for the eigenfunction at `λ`.
pub fn eigenfunction_ratio(lambda: C64) -> f64 {
    let e = C64::from_polar(1.0, FRAC_PI_6);
    let il = c(0.0, 1.0) * lambda;
    let xmax = 40.0 + 2.0 * lambda.norm();
    let norm2 = composite_real(0.0, xmax, 0.5, |x| c(airy_ai(e * (c(x, 0.0) + il)).norm_sqr(), 0.0)).re;
    norm2 / v_boundary(lambda).0.norm_sqr()
}

/// Traced branch with the running integral used by the monotonicity
/// certificate.
#[derive(Clone, Debug)]
pub struct BranchTrace {
    pub points: Vec<BranchPoint>,
    /// `∫_{θ_0}^{θ_k} ‖v‖²/|v(0)|² dθ` at each point.
    pub weight_integral: Vec<f64>,
}

impl BranchTrace {
    /// Largest violation of the lower envelope
    /// `μ+θ²/2 ≥ (μ_0+θ_0²/2)·exp(-∫‖v‖²/|v(0)|²)`, as a relative shortfall
    /// (zero when the envelope holds).
    pub fn certificate_shortfall(&self) -> f64 {
        let p0 = self.points[0];
        let start = p0.mu + 0.5 * p0.theta * p0.theta;
        self.points
            .iter()
            .zip(&self.weight_integral)
            .map(|(p, w)| {
                let val = p.mu + 0.5 * p.theta * p.theta;
                let env = start * (-w).exp();
                ((env - val) / env.abs().max(1e-300)).max(0.0)
            })
            .fold(0.0, f64::max)
    }
}

/// RK4 continuation of a zero of `F(·, θ)` in `θ`, with Newton projection
/// back onto `F = 0` after each step.
pub fn branch_trace(start: BranchPoint, theta_end: f64, steps: usize) -> Result<BranchTrace> {
    if steps == 0 {
        return Err(Error::Precondition("steps must be positive".into()));
    }
    if start.residual() > 1e-9 {
        return Err(Error::Precondition(format!(
            "start point is not on the branch (|F| = {:e})",
            start.residual()
        )));
    }
    let h = (theta_end - start.theta) / steps as f64;
    let mut points = vec![start];
    let mut weights = vec![0.0];
    let mut p = start;
    let mut wprev = eigenfunction_ratio(p.lambda);
    for _ in 0..steps {
        let (t, l) = (p.theta, p.lambda);
        let k1 = branch_velocity(t, l)?;
        let k2 = branch_velocity(t + 0.5 * h, l + k1 * (0.5 * h))?;
        let k3 = branch_velocity(t + 0.5 * h, l + k2 * (0.5 * h))?;
        let k4 = branch_velocity(t + h, l + k3 * h)?;
        let guess = l + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        let next = refine_zero(t + h, guess)?;
        let wnext = eigenfunction_ratio(next.lambda);
        let acc = weights.last().copied().unwrap_or(0.0) + 0.5 * h.abs() * (wprev + wnext);
        weights.push(acc);
        points.push(next);
        wprev = wnext;
        p = next;
    }
    Ok(BranchTrace {
        points,
        weight_integral: weights,
    })
}

/// Result of the `μ̂_m` computation.
#[derive(Clone, Debug)]
pub struct HatMu {
    /// `inf_θ (μ₀(θ) + θ²/2)`.
    pub value: f64,
    /// Minimising `θ`.
    pub theta: f64,
    /// `(θ, μ₀(θ), Im λ)` on the grid.
    pub grid: Vec<BranchPoint>,
}

/// Grid spacing and extent of the `θ` grid for `μ̂_m`.
pub const HAT_MU_STEP: f64 = 0.05;
pub const HAT_MU_THETA_MAX: f64 = 12.0;
/// Spacing of the full zero searches that seed the continuation.
const HAT_MU_SEARCH_EVERY: usize = 20;

/// `μ̂_m = inf_θ (μ₀(θ) + θ²/2)` on the grid `{0, 0.05, …, 12}` with
/// golden-section refinement around the grid minimum.
///
/// Full argument-principle searches are run every unit of `θ`; in between
/// the zeros found there are continued by Newton's method and the leftmost
/// is kept.
///
/// The result is deterministic and cached for the lifetime of the process.
pub fn hat_mu_m() -> Result<HatMu> {
    static CACHE: std::sync::OnceLock<Result<HatMu>> = std::sync::OnceLock::new();
    CACHE.get_or_init(compute_hat_mu_m).clone()
}

fn compute_hat_mu_m() -> Result<HatMu> {
    let n = (HAT_MU_THETA_MAX / HAT_MU_STEP).round() as usize;
    let mut grid = Vec::with_capacity(n + 1);
    let mut tracked: Vec<C64> = Vec::new();
    for k in 0..=n {
        let theta = k as f64 * HAT_MU_STEP;
        if k % HAT_MU_SEARCH_EVERY == 0 {
            let set = f_zeros(theta, Mu0Window::default())?;
            let leftmost = set.zeros.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
            tracked = set
                .zeros
                .iter()
                .copied()
                .filter(|z| z.re < leftmost + 1.5)
                .collect();
        } else {
            tracked = tracked
                .iter()
                .filter_map(|z| refine_zero(theta, *z).ok().map(|p| p.lambda))
                .collect();
        }
        let best = tracked
            .iter()
            .min_by(|a, b| a.re.total_cmp(&b.re))
            .ok_or_else(|| Error::NoZeroInWindow(format!("theta = {theta}")))?;
        grid.push(BranchPoint::new(theta, *best));
    }
    let objective = |p: &BranchPoint| p.mu + 0.5 * p.theta * p.theta;
    let (imin, pmin) = grid
        .iter()
        .enumerate()
        .min_by(|a, b| objective(a.1).total_cmp(&objective(b.1)))
        .map(|(i, p)| (i, *p))
        .expect("non-empty grid");
    // Golden-section refinement on the bracketing grid cells, following
    // the minimising zero by Newton continuation.
    let lo = grid[imin.saturating_sub(1)].theta;
    let hi = grid[(imin + 1).min(grid.len() - 1)].theta;
    let mut value = objective(&pmin);
    let mut theta = pmin.theta;
    if hi > lo {
        let f = |t: f64| -> f64 {
            refine_zero(t, pmin.lambda)
                .map(|p| objective(&p))
                .unwrap_or(f64::INFINITY)
        };
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (lo, hi);
        let mut x1 = b - g * (b - a);
        let mut x2 = a + g * (b - a);
        let (mut f1, mut f2) = (f(x1), f(x2));
        for _ in 0..40 {
            if f1 < f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - g * (b - a);
                f1 = f(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + g * (b - a);
                f2 = f(x2);
            }
        }
        for (t, v) in [(x1, f1), (x2, f2), (lo, f(lo))] {
            if v < value {
                value = v;
                theta = t;
            }
        }
    }
    Ok(HatMu { value, theta, grid })
}

/// `μ̂₀(θ) = min(J₋^{2/3} μ₀(J₋^{-1/3}θ), J₊^{2/3} μ₀(J₊^{-1/3}θ))`.
pub fn hat_mu_0(theta: f64, j_minus: f64, j_plus: f64) -> Result<f64> {
    if !(j_minus > 0.0 && j_plus > 0.0) {
        return Err(Error::Precondition("J+ and J- must be positive".into()));
    }
    let side = |j: f64| -> Result<f64> { Ok(j.powf(2.0 / 3.0) * mu0(j.powf(-1.0 / 3.0) * theta)?.mu) };
    let a = side(j_minus)?;
    let b = if j_plus == j_minus { a } else { side(j_plus)? };
    Ok(a.min(b))
}

/// `δ(α) = -Ai'(α)/Ai(α) + Ai'(-α)/Ai(-α)`.
pub fn delta_alpha(alpha: f64) -> Result<f64> {
    let (a, ap) = crate::airy::airy_pair(c(alpha, 0.0));
    let (b, bp) = crate::airy::airy_pair(c(-alpha, 0.0));
    for (v, d) in [(a, ap), (b, bp)] {
        if v.re.abs() < 1e-10 * d.re.abs().max(1.0) {
            return Err(Error::PoleProximity { modulus: v.re.abs() });
        }
    }
    Ok(-ap.re / a.re + bp.re / b.re)
}

/// For `k = 1..n`, the root of `δ` in `(-ω_k, -ω_{k+1})` by bisection.
pub fn interlaced_roots(n: usize) -> Result<Vec<f64>> {
    let omegas = airy_real_zeros(n + 1);
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let (l, r) = (-omegas[k], -omegas[k + 1]);
        let pad = 1e-6 * (r - l);
        let (mut lo, mut hi) = (l + pad, r - pad);
        let mut flo = delta_alpha(lo)?;
        let fhi = delta_alpha(hi)?;
        if flo.signum() == fhi.signum() {
            return Err(Error::NoZeroInWindow(format!("delta has no sign change on ({l}, {r})")));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            let fm = delta_alpha(mid)?;
            if fm == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if fm.signum() == flo.signum() {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        out.push(0.5 * (lo + hi));
    }
    Ok(out)
}

/// Number of sign changes of `δ` on a uniform mesh of `(a, b)` with the
/// given spacing (endpoints excluded by half a step).
pub fn delta_sign_changes(a: f64, b: f64, step: f64) -> Result<usize> {
    let m = ((b - a) / step).floor() as usize;
    let mut prev: Option<f64> = None;
    let mut count = 0;
    for i in 0..m {
        let x = a + (i as f64 + 0.5) * step;
        let v = delta_alpha(x)?;
        if let Some(p) = prev {
            if p.signum() != v.signum() {
                count += 1;
            }
        }
        prev = Some(v);
    }
    Ok(count)
}

/// Closure of the half-line problem at `x = 0` for the matrix realisation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HalfLineClosure {
    /// `⟨e^{-θx}, u⟩ = 0`.
    Constraint { theta: f64 },
    /// `u(0) = 0`.
    Dirichlet,
}

/// Eigenvalues of `-d²/dx² + ix` on `[0, X]` (Chebyshev collocation with
/// `n` intervals), Dirichlet at `X`, closed at `0` as requested, filtered to
/// `|Im λ| ≤ X/2` and sorted by real part.
pub fn half_line_spectrum(closure: HalfLineClosure, x_max: f64, n: usize) -> Result<Vec<C64>> {
    let grid = build_grid(n)?;
    let np = n + 1;
    let x: Vec<f64> = grid.nodes.iter().map(|&xi| 0.5 * x_max * (1.0 - xi)).collect();
    let s = 4.0 / (x_max * x_max);
    let d2 = grid.d(2);
    let a = ComplexMatrix::from_fn(np, np, |i, j| {
        let mut v = c(-s * d2.get(i, j), 0.0);
        if i == j {
            v += c(0.0, x[i]);
        }
        v
    });
    let b = ComplexMatrix::identity(np);
    // nodes[0] = 1 ↔ x = 0, nodes[n] = -1 ↔ x = X.
    let mut at_zero = vec![c(0.0, 0.0); np];
    match closure {
        HalfLineClosure::Constraint { theta } => {
            for j in 0..np {
                at_zero[j] = c(0.5 * x_max * grid.weights[j] * (-theta * x[j]).exp(), 0.0);
            }
        }
        HalfLineClosure::Dirichlet => at_zero[0] = c(1.0, 0.0),
    }
    let mut at_end = vec![c(0.0, 0.0); np];
    at_end[n] = c(1.0, 0.0);
    let interior: Vec<usize> = (1..n).collect();
    let red = reduce_pencil(&a, &b, &[at_zero, at_end], &interior)?;
    let mut ev = eigenvalues(&red.standard_form()?)?;
    ev.retain(|z| z.im.abs() <= 0.5 * x_max);
    ev.sort_by(|p, q| p.re.total_cmp(&q.re));
    Ok(ev)
}

/// Matrix spectrum of `𝓛^θ` with an under-resolution check: the leading
/// eigenvalue must move less than `1e-4` between `n` and `3n/2`.
pub fn l_theta_spectrum(theta: f64, x_max: f64, n: usize) -> Result<Vec<C64>> {
    if !(theta >= 0.0) {
        return Err(Error::Precondition(format!("theta = {theta} must be >= 0")));
    }
    if x_max < 30.0 || n < 96 {
        return Err(Error::Precondition(format!(
            "need X_max >= 30 and n >= 96 (got {x_max}, {n})"
        )));
    }
    let closure = HalfLineClosure::Constraint { theta };
    let ev = half_line_spectrum(closure, x_max, n)?;
    let fine_n = (3 * n / 2 + 1) & !1;
    let fine = half_line_spectrum(closure, x_max, fine_n)?;
    match (ev.first(), fine.first()) {
        (Some(a), Some(b)) if (a - b).norm() <= 1e-4 => Ok(ev),
        (Some(a), Some(b)) => Err(Error::UnderResolved(format!(
            "leading eigenvalue moved {:e} between n = {n} and n = {fine_n}",
            (a - b).norm()
        ))),
        _ => Err(Error::UnderResolved("no eigenvalue in the trusted window".into())),
    }
}

/// CSV with header `theta,mu0,im_lambda,mu0_plus_half_theta_sq`.
pub fn mu0_csv(points: &[BranchPoint]) -> String {
    let mut s = String::from("theta,mu0,im_lambda,mu0_plus_half_theta_sq\n");
    for p in points {
        let _ = writeln!(
            s,
            "{:.16e},{:.16e},{:.16e},{:.16e}",
            p.theta,
            p.mu,
            p.lambda.im,
            p.mu + 0.5 * p.theta * p.theta
        );
    }
    s
}
