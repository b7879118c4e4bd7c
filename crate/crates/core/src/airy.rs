//! Complex Airy function and the derived special functions used by the
//! boundary-layer analysis: the rotated integral `A₀`, the normalised
//! profile `Ψ_λ`, the Laplace-type transform `F(λ, θ)`, the wall profiles
//! `ψ±`, and an argument-principle zero finder.
//!
//! `Ai` is evaluated by its Maclaurin series for `|z| < 9` and by the
//! Poincaré expansions for `|z| ≥ 9`. Where the series suffers from
//! cancellation (the decaying sector at moderate `|z|`), the value is
//! obtained by Taylor-stepping the Airy equation inward from the asymptotic
//! regime instead.

use crate::error::{Error, Result};
use crate::quad::{gl20, gl8, segment};
use num_complex::Complex64 as C64;
use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, PI};

/// `Ai(0) = 1 / (3^{2/3} Γ(2/3))`.
pub const AI0: f64 = 0.355_028_053_887_817_239_260_063_186_004_183_176_397_979_174_199_177;
/// `Ai'(0) = -1 / (3^{1/3} Γ(1/3))`.
pub const AIP0: f64 = -0.258_819_403_792_806_798_405_183_560_189_203_963_479_091_138_354_934_6;

/// Radius at which evaluation switches from series to asymptotics.
pub const SWITCH_RADIUS: f64 = 9.0;
/// Radius from which inward Taylor continuation starts.
const CONTINUATION_RADIUS: f64 = 11.0;
/// Largest tolerated cancellation factor of the Maclaurin series.
const MAX_SERIES_CANCELLATION: f64 = 1e4;

/// Cached value of `θ₁ʳ = inf Re{λ : A₀(iλ) = 0}`, recomputed and checked by
/// [`constants`] and the test suite. Used only for cheap precondition
/// checks.
pub const THETA1R: f64 = 1.062_625_795_975_665_2;

#[inline]
fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
fn cis(t: f64) -> C64 {
    C64::from_polar(1.0, t)
}

// ---------------------------------------------------------------------------
// Ai and Ai'
// ---------------------------------------------------------------------------

/// `Ai(z)`.
pub fn airy_ai(z: C64) -> C64 {
    airy_pair(z).0
}

/// `Ai'(z)`.
pub fn airy_ai_prime(z: C64) -> C64 {
    airy_pair(z).1
}

/// `(Ai(z), Ai'(z))`.
pub fn airy_pair(z: C64) -> (C64, C64) {
    if z.norm() >= SWITCH_RADIUS {
        airy_asymptotic(z)
    } else {
        airy_inner(z)
    }
}

/// Inner-region evaluation (`|z| < 9` in normal use): the Maclaurin series
/// when it is well conditioned, inward Taylor continuation otherwise.
/// Exposed so that the two regimes can be compared on an overlap annulus.
pub fn airy_inner(z: C64) -> (C64, C64) {
    let (ai, aip, cond) = airy_series(z);
    if cond <= MAX_SERIES_CANCELLATION {
        return (ai, aip);
    }
    let r = z.norm();
    let start_r = CONTINUATION_RADIUS.max(r);
    let z0 = z * (start_r / r);
    let (w, wp) = airy_asymptotic(z0);
    taylor_continue(z0, w, wp, z)
}

/// Maclaurin series for `Ai` and `Ai'` together with the cancellation
/// factor `max(Σ|terms| / |sum|)` of the two sums.
pub fn airy_series(z: C64) -> (C64, C64, f64) {
    // Ai(z) = Σ a_m z^m, a_0 = Ai(0), a_1 = Ai'(0), a_2 = 0,
    // a_{m+3} = a_m / ((m+2)(m+3)).
    let mut a = [AI0, AIP0, 0.0];
    let mut s = c(0.0, 0.0);
    let mut ds = c(0.0, 0.0);
    let (mut abs_s, mut abs_ds) = (0.0, 0.0);
    let mut zpow_prev = c(0.0, 0.0); // z^{m-1}
    let mut zpow = c(1.0, 0.0); // z^m
    let mut small_run = 0;
    for m in 0..600usize {
        let am = a[m % 3];
        let term = zpow * am;
        let dterm = zpow_prev * (m as f64 * am);
        s += term;
        ds += dterm;
        abs_s += term.norm();
        abs_ds += dterm.norm();
        if m > 3 && term.norm() <= 1e-18 * abs_s && dterm.norm() <= 1e-18 * abs_ds {
            small_run += 1;
            if small_run >= 3 {
                break;
            }
        } else {
            small_run = 0;
        }
        // advance coefficient a_{m+3}
        a[m % 3] = am / (((m + 2) * (m + 3)) as f64);
        zpow_prev = zpow;
        zpow *= z;
    }
    let cond_s = if s.norm() > 0.0 { abs_s / s.norm() } else { f64::INFINITY };
    let cond_d = if ds.norm() > 0.0 { abs_ds / ds.norm() } else { f64::INFINITY };
    (s, ds, cond_s.max(cond_d))
}

/// Coefficients `u_k` of the Airy asymptotic expansions.
fn u_coeffs() -> &'static [f64; 40] {
    static U: std::sync::OnceLock<[f64; 40]> = std::sync::OnceLock::new();
    U.get_or_init(|| {
        let mut u = [0.0; 40];
        u[0] = 1.0;
        for k in 1..40 {
            let kf = k as f64;
            u[k] = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
                / ((2.0 * kf - 1.0) * 216.0 * kf);
        }
        u
    })
}

fn v_coeff(k: usize) -> f64 {
    let u = u_coeffs();
    if k == 0 {
        1.0
    } else {
        let kf = k as f64;
        -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u[k]
    }
}

/// Sums `Σ_k sign_k c_k x^{-k}` for the index set `first, first+step, ...`
/// with `c_k` from `coef`, alternating signs every `step`; stops at the
/// smallest term.
fn asym_sum(coef: impl Fn(usize) -> f64, first: usize, step: usize, inv: C64) -> C64 {
    let mut s = c(0.0, 0.0);
    let mut sign = 1.0;
    let mut last = f64::INFINITY;
    let mut k = first;
    while k < 40 {
        let t = inv.powu(k as u32) * (sign * coef(k));
        let tn = t.norm();
        if tn > last {
            break;
        }
        s += t;
        if tn < 1e-17 * s.norm() {
            break;
        }
        last = tn;
        sign = -sign;
        k += step;
    }
    s
}

/// Poincaré asymptotic expansions (exponential form for `|arg z| ≤ 2π/3`,
/// oscillatory form about the negative real axis otherwise).
pub fn airy_asymptotic(z: C64) -> (C64, C64) {
    let sqrt_pi = PI.sqrt();
    let u = u_coeffs();
    if z.arg().abs() <= 2.0 * FRAC_PI_3 {
        let zeta = z.sqrt() * z * (2.0 / 3.0);
        let inv = zeta.inv();
        let su = asym_sum(|k| u[k], 0, 1, inv);
        let sv = asym_sum(v_coeff, 0, 1, inv);
        let q = z.sqrt().sqrt();
        let e = (-zeta).exp();
        let ai = e / (q * (2.0 * sqrt_pi)) * su;
        let aip = -(e * q / (2.0 * sqrt_pi)) * sv;
        (ai, aip)
    } else {
        let w = -z;
        let xi = w.sqrt() * w * (2.0 / 3.0);
        let inv = xi.inv();
        let p = asym_sum(|k| u[k], 0, 2, inv);
        let q = asym_sum(|k| u[k], 1, 2, inv);
        let r = asym_sum(v_coeff, 0, 2, inv);
        let s = asym_sum(v_coeff, 1, 2, inv);
        let ph = xi - FRAC_PI_4;
        let (cs, sn) = (ph.cos(), ph.sin());
        let w4 = w.sqrt().sqrt();
        let ai = (cs * p + sn * q) / (w4 * sqrt_pi);
        let aip = w4 / sqrt_pi * (sn * r - cs * s);
        (ai, aip)
    }
}

/// Taylor-steps `w'' = t w` from `(z0, w, w')` to `z1` along a straight
/// line.
fn taylor_continue(z0: C64, w0: C64, wp0: C64, z1: C64) -> (C64, C64) {
    let dist = (z1 - z0).norm();
    let steps = (dist / 0.75).ceil().max(1.0) as usize;
    let h = (z1 - z0) / steps as f64;
    let (mut zc, mut w, mut wp) = (z0, w0, wp0);
    for _ in 0..steps {
        let (nw, nwp) = taylor_step(zc, w, wp, h);
        zc += h;
        w = nw;
        wp = nwp;
    }
    (w, wp)
}

fn taylor_step(z0: C64, w: C64, wp: C64, h: C64) -> (C64, C64) {
    // (m+2)(m+1) a_{m+2} = z0 a_m + a_{m-1}
    let mut am1 = c(0.0, 0.0); // a_{m-1}
    let mut a0 = w; // a_m
    let mut a1 = wp; // a_{m+1}
    let mut hp = c(1.0, 0.0); // h^m
    let mut hpm1 = c(0.0, 0.0); // h^{m-1}
    let mut s = c(0.0, 0.0);
    let mut ds = c(0.0, 0.0);
    let mut small = 0;
    for m in 0..120usize {
        let t = a0 * hp;
        let dt = a0 * hpm1 * m as f64;
        s += t;
        ds += dt;
        if m > 4 && t.norm() <= 1e-18 * s.norm() && dt.norm() <= 1e-18 * ds.norm() {
            small += 1;
            if small >= 3 {
                break;
            }
        } else {
            small = 0;
        }
        let a2 = (z0 * a0 + am1) / (((m + 2) * (m + 1)) as f64);
        am1 = a0;
        a0 = a1;
        a1 = a2;
        hpm1 = hp;
        hp *= h;
    }
    (s, ds)
}

// ---------------------------------------------------------------------------
// A₀, Ψ_λ, F(λ, θ)
// ---------------------------------------------------------------------------

/// `∫_s^∞ Ai(t) dt` along the horizontal ray `t = s + x`, `x ≥ 0`.
///
/// `Re ζ(t)` increases monotonically along rightward horizontal rays, so
/// the integrand never exceeds its starting scale by much. Integration
/// stops once the leading-order tail `e^{-ζ}/(2√π t^{3/4})` drops below
/// `1e-17` of the largest integrand seen; that leading term is added as
/// the tail correction.
pub fn airy_tail_integral(s: C64) -> C64 {
    let rule = gl20();
    let mut total = c(0.0, 0.0);
    let mut scale: f64 = airy_ai(s).norm();
    let mut a = s;
    for _ in 0..400 {
        let b = a + 1.0;
        let mut f = |t: C64| {
            let v = airy_ai(t);
            scale = scale.max(v.norm());
            v
        };
        total += segment(rule, a, b, &mut f);
        a = b;
        if a.re > 2.0 && a.norm() > 6.0 {
            let zeta = a.sqrt() * a * (2.0 / 3.0);
            let tail = (-zeta).exp() / (a.powf(0.75) * (2.0 * PI.sqrt()));
            if tail.norm() <= 1e-17 * scale.max(total.norm()) {
                return total + tail;
            }
        }
    }
    total
}

/// `A₀(z) = e^{iπ/6} ∫_z^∞ Ai(e^{iπ/6} t) dt = ∫_{e^{iπ/6} z}^∞ Ai(s) ds`.
pub fn a0(z: C64) -> C64 {
    airy_tail_integral(cis(FRAC_PI_6) * z)
}

/// `A₀'(z) = -e^{iπ/6} Ai(e^{iπ/6} z)`.
pub fn a0_prime(z: C64) -> C64 {
    -cis(FRAC_PI_6) * airy_ai(cis(FRAC_PI_6) * z)
}

/// Normalised Airy profile `Ψ_λ(x) = Ai(e^{iπ/6}(x + iλ)) / A₀(iλ)`.
#[derive(Clone, Copy, Debug)]
pub struct PsiProfile {
    pub lambda: C64,
    denominator: C64,
}

/// Smallest tolerated `|A₀(iλ)|` before reporting pole proximity.
pub const POLE_TOLERANCE: f64 = 1e-13;

impl PsiProfile {
    pub fn new(lambda: C64) -> Result<Self> {
        let d = a0(c(0.0, 1.0) * lambda);
        if d.norm() < POLE_TOLERANCE {
            return Err(Error::PoleProximity { modulus: d.norm() });
        }
        Ok(PsiProfile { lambda, denominator: d })
    }

    pub fn denominator(&self) -> C64 {
        self.denominator
    }

    pub fn eval(&self, x: f64) -> C64 {
        airy_ai(cis(FRAC_PI_6) * (c(x, 0.0) + c(0.0, 1.0) * self.lambda)) / self.denominator
    }

    /// `d/dx Ψ_λ(x)`.
    pub fn eval_prime(&self, x: f64) -> C64 {
        let e = cis(FRAC_PI_6);
        e * airy_ai_prime(e * (c(x, 0.0) + c(0.0, 1.0) * self.lambda)) / self.denominator
    }

    /// Truncation point `40 + 2|λ|` for moments on the half line.
    pub fn x_max(&self) -> f64 {
        40.0 + 2.0 * self.lambda.norm()
    }

    /// `‖x^k Ψ_λ‖_{L²(ℝ₊)}`.
    pub fn moment_l2(&self, k: i32) -> f64 {
        crate::quad::composite_real(0.0, self.x_max(), 0.5, |x| {
            c(x.powi(2 * k) * self.eval(x).norm_sqr(), 0.0)
        })
        .re
        .sqrt()
    }

    /// `‖x^s Ψ_λ‖_{L¹(ℝ₊)}`.
    pub fn moment_l1(&self, s: i32) -> f64 {
        crate::quad::composite_real(0.0, self.x_max(), 0.5, |x| c(x.powi(s) * self.eval(x).norm(), 0.0)).re
    }

    /// `sup_{x ≥ 0} |x^s Ψ_λ(x)|`, by dense sampling plus golden-section
    /// refinement around the best sample.
    pub fn moment_sup(&self, s: i32) -> f64 {
        let xm = self.x_max();
        let f = |x: f64| x.powi(s) * self.eval(x).norm();
        let m = 2000;
        let (mut bi, mut bv) = (0, f(0.0));
        for i in 1..=m {
            let v = f(xm * i as f64 / m as f64);
            if v > bv {
                bv = v;
                bi = i;
            }
        }
        let h = xm / m as f64;
        let (lo, hi) = (((bi as f64) - 1.0).max(0.0) * h, ((bi as f64) + 1.0).min(m as f64) * h);
        bv.max(golden_max(f, lo, hi))
    }
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..60 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        }
    }
    f1.max(f2)
}

/// `Ψ_λ(x)`; fails with pole proximity when `|A₀(iλ)| < 1e-13`.
pub fn psi_cap(lambda: C64, x: f64) -> Result<C64> {
    Ok(PsiProfile::new(lambda)?.eval(x))
}

/// `F(λ, θ) = ∫_0^∞ e^{-θx} Ai(e^{iπ/6}(x + iλ)) dx`.
pub fn f_laplace(lambda: C64, theta: f64) -> Result<C64> {
    if !(theta >= 0.0) || !theta.is_finite() {
        return Err(Error::Precondition(format!("theta = {theta} must be >= 0")));
    }
    Ok(f_laplace_unchecked(lambda, theta))
}

fn f_laplace_unchecked(lambda: C64, theta: f64) -> C64 {
    let e = cis(FRAC_PI_6);
    let il = c(0.0, 1.0) * lambda;
    let h = if theta > 4.0 { 4.0 / theta } else { 1.0 };
    let x_cap = 40.0 + 2.0 * lambda.norm();
    let rule = gl20();
    let mut total = c(0.0, 0.0);
    let mut scale: f64 = 0.0;
    let mut a = 0.0;
    while a < x_cap {
        let b = (a + h).min(x_cap);
        let mut f = |t: C64| {
            let v = (-theta * t.re).exp() * airy_ai(e * (t + il));
            scale = scale.max(v.norm());
            v
        };
        total += segment(rule, c(a, 0.0), c(b, 0.0), &mut f);
        a = b;
        let end = (-theta * a).exp() * airy_ai(e * (c(a, 0.0) + il)).norm();
        // Past the turning region the integrand decays faster than
        // exponentially; once it is negligible the tail is as well.
        if a > 1.0 + lambda.im.max(0.0) && end <= 1e-18 * scale.max(total.norm()) {
            break;
        }
    }
    total
}

/// `∂F/∂λ = iθF − i·Ai(e^{2πi/3}λ)`.
pub fn f_laplace_dlambda(lambda: C64, theta: f64, f_value: C64) -> C64 {
    c(0.0, theta) * f_value - c(0.0, 1.0) * airy_ai(cis(2.0 * FRAC_PI_3) * lambda)
}

// ---------------------------------------------------------------------------
// Wall profiles ψ±
// ---------------------------------------------------------------------------

/// Which wall a boundary-layer profile is attached to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `x = +1`.
    Plus,
    /// `x = -1`.
    Minus,
}

/// Airy boundary-layer profile attached to a wall of the channel,
/// normalised so that its integral over the half line into the channel
/// equals `(Jβ)^{-1/3}`.
#[derive(Clone, Copy, Debug)]
pub struct WallProfile {
    pub side: Side,
    pub beta: f64,
    pub lambda: C64,
    /// `U` at the wall.
    pub u_wall: f64,
    /// `|U'|` at the wall.
    pub j: f64,
    /// Rescaled spectral parameter of the underlying `Ψ`.
    pub lambda_tilde: C64,
    psi: PsiProfile,
}

impl WallProfile {
    pub fn new(side: Side, beta: f64, lambda: C64, u_wall: f64, j: f64) -> Result<Self> {
        if !(beta > 0.0) || !(j > 0.0) {
            return Err(Error::Precondition("beta and J must be positive".into()));
        }
        let bound = THETA1R * j.powf(2.0 / 3.0) * beta.powf(-1.0 / 3.0);
        if !(lambda.re < bound) {
            return Err(Error::Precondition(format!(
                "Re lambda = {} must be below theta1r J^(2/3) beta^(-1/3) = {bound}",
                lambda.re
            )));
        }
        let scale = beta.powf(1.0 / 3.0) * j.powf(-2.0 / 3.0);
        let lambda_tilde = match side {
            Side::Minus => (lambda - c(0.0, u_wall)) * scale,
            Side::Plus => (lambda.conj() + c(0.0, u_wall)) * scale,
        };
        let psi = PsiProfile::new(lambda_tilde)?;
        Ok(WallProfile {
            side,
            beta,
            lambda,
            u_wall,
            j,
            lambda_tilde,
            psi,
        })
    }

    /// Stretched distance to the wall, `(Jβ)^{1/3}(1 ∓ x)`.
    pub fn stretched(&self, x: f64) -> f64 {
        let d = match self.side {
            Side::Minus => 1.0 + x,
            Side::Plus => 1.0 - x,
        };
        (self.j * self.beta).powf(1.0 / 3.0) * d
    }

    pub fn eval(&self, x: f64) -> C64 {
        let v = self.psi.eval(self.stretched(x));
        match self.side {
            Side::Minus => cis(FRAC_PI_6) * v,
            Side::Plus => cis(-FRAC_PI_6) * v.conj(),
        }
    }

    pub fn profile(&self) -> &PsiProfile {
        &self.psi
    }
}

/// `ψ±(x)` for the given wall data.
pub fn psi_pm(side: Side, x: f64, beta: f64, lambda: C64, u_wall: f64, j: f64) -> Result<C64> {
    Ok(WallProfile::new(side, beta, lambda, u_wall, j)?.eval(x))
}

// ---------------------------------------------------------------------------
// Argument-principle zero finder
// ---------------------------------------------------------------------------

/// An analytic function with its derivative.
pub trait Analytic {
    fn value(&self, z: C64) -> C64;
    fn derivative(&self, z: C64) -> C64;

    /// Values and derivatives at `m + 1` equispaced points from `a` to `b`.
    fn edge(&self, a: C64, b: C64, m: usize) -> Vec<(C64, C64)> {
        (0..=m)
            .map(|k| {
                let z = a + (b - a) * (k as f64 / m as f64);
                (self.value(z), self.derivative(z))
            })
            .collect()
    }
}

/// Adapter turning a pair of closures into an [`Analytic`] function.
pub struct FnAnalytic<F, G> {
    pub f: F,
    pub df: G,
}

impl<F: Fn(C64) -> C64, G: Fn(C64) -> C64> Analytic for FnAnalytic<F, G> {
    fn value(&self, z: C64) -> C64 {
        (self.f)(z)
    }
    fn derivative(&self, z: C64) -> C64 {
        (self.df)(z)
    }
}

/// `Ai` itself.
pub struct AiryFn;

impl Analytic for AiryFn {
    fn value(&self, z: C64) -> C64 {
        airy_ai(z)
    }
    fn derivative(&self, z: C64) -> C64 {
        airy_ai_prime(z)
    }
}

/// Samples between direct re-evaluations when marching along an edge.
const REANCHOR: usize = 64;

/// `z ↦ A₀(iz)`, whose derivative is `-i e^{iπ/6} Ai(e^{2πi/3} z)`.
pub struct RotatedA0;

impl Analytic for RotatedA0 {
    fn value(&self, z: C64) -> C64 {
        a0(c(0.0, 1.0) * z)
    }
    fn derivative(&self, z: C64) -> C64 {
        -c(0.0, 1.0) * cis(FRAC_PI_6) * airy_ai(cis(2.0 * FRAC_PI_3) * z)
    }
    fn edge(&self, a: C64, b: C64, m: usize) -> Vec<(C64, C64)> {
        let h = (b - a) / m as f64;
        let rule = gl8();
        let mut out = Vec::with_capacity(m + 1);
        let mut z = a;
        let mut v = self.value(a);
        out.push((v, self.derivative(a)));
        for k in 1..=m {
            let zn = a + h * k as f64;
            if k % REANCHOR == 0 {
                v = self.value(zn);
            } else {
                let mut g = |t: C64| self.derivative(t);
                v += segment(rule, z, zn, &mut g);
            }
            z = zn;
            out.push((v, self.derivative(z)));
        }
        out
    }
}

/// `λ ↦ F(λ, θ)` for fixed `θ ≥ 0`.
pub struct LaplaceF {
    pub theta: f64,
}

impl Analytic for LaplaceF {
    fn value(&self, z: C64) -> C64 {
        f_laplace_unchecked(z, self.theta)
    }
    fn derivative(&self, z: C64) -> C64 {
        f_laplace_dlambda(z, self.theta, self.value(z))
    }
    fn edge(&self, a: C64, b: C64, m: usize) -> Vec<(C64, C64)> {
        // ∂_λF = iθF − iA(λ) integrates to
        // F(λ+h) = e^{iθh}F(λ) − i∫_0^h e^{iθ(h−s)}A(λ+s) ds,
        // which is contractive for Im h ≥ 0: march upward and reverse.
        if b.im < a.im {
            let mut v = self.edge(b, a, m);
            v.reverse();
            return v;
        }
        let th = self.theta;
        let rot = cis(2.0 * FRAC_PI_3);
        let h = (b - a) / m as f64;
        let rule = gl8();
        let decay = (c(0.0, th) * h).exp();
        let mut out = Vec::with_capacity(m + 1);
        let mut v = self.value(a);
        let deriv = |z: C64, f: C64| c(0.0, th) * f - c(0.0, 1.0) * airy_ai(rot * z);
        out.push((v, deriv(a, v)));
        let mut z = a;
        for k in 1..=m {
            let zn = a + h * k as f64;
            if k % REANCHOR == 0 {
                v = self.value(zn);
            } else {
                let mut g = |t: C64| (c(0.0, th) * (zn - t)).exp() * airy_ai(rot * t);
                v = decay * v - c(0.0, 1.0) * segment(rule, z, zn, &mut g);
            }
            z = zn;
            out.push((v, deriv(z, v)));
        }
        out
    }
}

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]` in the complex plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Rect { x0, x1, y0, y1 }
    }

    pub fn center(&self) -> C64 {
        c(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    pub fn contains(&self, z: C64, slack: f64) -> bool {
        z.re >= self.x0 - slack && z.re <= self.x1 + slack && z.im >= self.y0 - slack && z.im <= self.y1 + slack
    }

    fn diameter(&self) -> f64 {
        (self.x1 - self.x0).hypot(self.y1 - self.y0)
    }

    fn corners(&self) -> [C64; 4] {
        [c(self.x0, self.y0), c(self.x1, self.y0), c(self.x1, self.y1), c(self.x0, self.y1)]
    }
}

/// A leaf cell of the subdivision with its winding number.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub rect: Rect,
    pub winding: i64,
}

/// Zeros of an analytic function in a rectangle, with completeness data.
#[derive(Clone, Debug, Default)]
pub struct ZeroSet {
    /// Refined zeros sorted by `(Re, Im)`.
    pub zeros: Vec<C64>,
    /// Leaf cells carrying nonzero winding numbers.
    pub cells: Vec<Cell>,
    /// `max |f|` over the reported zeros.
    pub residual: f64,
    /// Cells where subdivision hit the depth limit without isolating
    /// simple zeros.
    pub flagged: Vec<Cell>,
    /// Winding number of the outer rectangle.
    pub total_winding: i64,
}

impl ZeroSet {
    /// Sum of the leaf winding numbers.
    pub fn winding_total(&self) -> i64 {
        self.cells.iter().map(|c| c.winding).sum()
    }

    /// Completeness certificate: the winding count of the search
    /// rectangle equals the number of refined zeros and no cell is flagged.
    pub fn is_complete(&self) -> bool {
        self.flagged.is_empty()
            && self.winding_total() == self.zeros.len() as i64
            && self.total_winding == self.zeros.len() as i64
    }
}

struct Winding {
    count: i64,
    max_abs: f64,
}

/// Winding number of `f` around the rectangle via trapezoid integration of
/// `f'/f`, cross-checked against the accumulated argument increment.
/// Returns `None` when `f` nearly vanishes on the boundary.
fn winding(f: &dyn Analytic, rect: &Rect, base_samples: usize) -> Option<Winding> {
    let cs = rect.corners();
    let mut m = base_samples;
    loop {
        let mut integral = c(0.0, 0.0);
        let mut arg_sum = 0.0;
        let mut near_zero = false;
        let mut max_abs: f64 = 0.0;
        for e in 0..4 {
            let (a, b) = (cs[e], cs[(e + 1) % 4]);
            let vals = f.edge(a, b, m);
            let dz = (b - a) / m as f64;
            for (k, (v, d)) in vals.iter().enumerate() {
                let wgt = if k == 0 || k == m { 0.5 } else { 1.0 };
                integral += d / v * dz * wgt;
                max_abs = max_abs.max(v.norm());
                // Newton distance estimate: a zero within about one sample
                // spacing of the edge makes the count unreliable.
                if v.norm() < 2.0 * d.norm() * dz.norm() {
                    near_zero = true;
                }
            }
            for w in vals.windows(2) {
                arg_sum += (w[1].0 / w[0].0).arg();
            }
        }
        if near_zero || !integral.is_finite() {
            return None;
        }
        let trap = integral.im / (2.0 * PI);
        let by_arg = (arg_sum / (2.0 * PI)).round();
        if (trap - trap.round()).abs() < 0.05 && trap.round() == by_arg {
            return Some(Winding {
                count: by_arg as i64,
                max_abs,
            });
        }
        if m >= 16 * base_samples {
            // Trust the argument count, which is exact when consecutive
            // phase increments stay below π.
            return Some(Winding {
                count: by_arg as i64,
                max_abs,
            });
        }
        m *= 2;
    }
}

fn newton(f: &dyn Analytic, mut z: C64, rect: &Rect, scale: f64) -> Option<(C64, f64)> {
    let slack = 1e-9 * rect.diameter();
    for _ in 0..60 {
        let v = f.value(z);
        let d = f.derivative(z);
        if d.norm() == 0.0 || !d.is_finite() {
            return None;
        }
        let step = v / d;
        z -= step;
        if !rect.contains(z, 2.0 * rect.diameter()) {
            return None;
        }
        if step.norm() <= 1e-15 * (1.0 + z.norm()) {
            break;
        }
    }
    let r = f.value(z).norm();
    (rect.contains(z, slack) && (r <= 1e-10 * scale || r <= 1e-12)).then_some((z, r))
}

/// Configuration of [`zeros_in_region`].
#[derive(Clone, Copy, Debug)]
pub struct ZeroSearch {
    pub max_depth: usize,
    /// Boundary samples per edge (doubled on non-integer winding).
    pub samples: usize,
}

impl Default for ZeroSearch {
    fn default() -> Self {
        ZeroSearch {
            max_depth: 12,
            samples: 512,
        }
    }
}

/// All zeros of `f` inside `rect`, located by recursive subdivision with
/// argument-principle counts and refined by Newton's method.
pub fn zeros_in_region(f: &dyn Analytic, rect: Rect, cfg: ZeroSearch) -> Result<ZeroSet> {
    if !(rect.x1 > rect.x0 && rect.y1 > rect.y0) {
        return Err(Error::Precondition("degenerate search rectangle".into()));
    }
    // Jitter the outer rectangle until f stays clear of its boundary.
    let mut outer = rect;
    let mut w = None;
    for attempt in 0..8 {
        if let Some(wi) = winding(f, &outer, cfg.samples) {
            w = Some(wi);
            break;
        }
        let d = 1e-3 * (attempt + 1) as f64 * rect.diameter();
        outer = Rect::new(rect.x0 - d, rect.x1 + d * 0.7, rect.y0 - d * 0.3, rect.y1 + d * 0.9);
    }
    let w = w.ok_or_else(|| Error::UnderResolved("function vanishes on the search boundary".into()))?;
    let mut set = ZeroSet {
        total_winding: w.count,
        ..Default::default()
    };
    search(f, outer, w, 0, &cfg, &mut set);
    set.zeros.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    set.residual = set.zeros.iter().map(|z| f.value(*z).norm()).fold(0.0, f64::max);
    Ok(set)
}

fn search(f: &dyn Analytic, rect: Rect, w: Winding, depth: usize, cfg: &ZeroSearch, set: &mut ZeroSet) {
    if w.count == 0 {
        return;
    }
    if w.count == 1 {
        let starts = [rect.center(), rect.corners()[0] * 0.25 + rect.center() * 0.75, rect.corners()[2] * 0.25 + rect.center() * 0.75];
        for s in starts {
            if let Some((z, _)) = newton(f, s, &rect, w.max_abs) {
                set.zeros.push(z);
                set.cells.push(Cell { rect, winding: 1 });
                return;
            }
        }
    }
    if depth >= cfg.max_depth || w.count < 0 {
        set.flagged.push(Cell { rect, winding: w.count });
        return;
    }
    // Split into quadrants, nudging the split lines off near-zeros.
    for frac in [0.5123, 0.4731, 0.5389, 0.4427, 0.5617, 0.4129] {
        let xm = rect.x0 + frac * (rect.x1 - rect.x0);
        let ym = rect.y0 + (1.0 - frac) * (rect.y1 - rect.y0);
        let kids = [
            Rect::new(rect.x0, xm, rect.y0, ym),
            Rect::new(xm, rect.x1, rect.y0, ym),
            Rect::new(xm, rect.x1, ym, rect.y1),
            Rect::new(rect.x0, xm, ym, rect.y1),
        ];
        let samples = (cfg.samples / 2).max(64);
        let ws: Vec<Option<Winding>> = kids.iter().map(|k| winding(f, k, samples)).collect();
        if ws.iter().all(|x| x.is_some()) {
            for (k, wk) in kids.into_iter().zip(ws) {
                search(f, k, wk.unwrap(), depth + 1, cfg, set);
            }
            return;
        }
    }
    set.flagged.push(Cell { rect, winding: w.count });
}

// ---------------------------------------------------------------------------
// Real zeros and constants
// ---------------------------------------------------------------------------

/// The first `k` zeros `0 > ω₁ > ω₂ > …` of `Ai` on the real axis, by
/// bisection on the real series.
pub fn airy_real_zeros(k: usize) -> Vec<f64> {
    let ai = |x: f64| airy_ai(c(x, 0.0)).re;
    (1..=k)
        .map(|n| {
            let t = (3.0 * PI * (4.0 * n as f64 - 1.0) / 8.0).powf(2.0 / 3.0);
            let half = 0.4 * PI / t.sqrt();
            let (mut lo, mut hi) = (-t - half, -t + half);
            let (mut flo, fhi) = (ai(lo), ai(hi));
            assert!(flo * fhi < 0.0, "zero bracket failed for n = {n}");
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid == lo || mid == hi {
                    break;
                }
                let fm = ai(mid);
                if fm == 0.0 {
                    return mid;
                }
                if fm * flo < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

/// The constants `ν₁`, `θ₁ʳ` and the first real Airy zeros.
#[derive(Clone, Debug)]
pub struct SpecialConstants {
    /// Leftmost eigenvalue of the half-line Dirichlet operator
    /// `-d²/dx² + ix`, `e^{iπ/3}|ω₁|`.
    pub nu1: C64,
    /// `inf Re{λ : A₀(iλ) = 0}`.
    pub theta1r: f64,
    pub airy_zeros: Vec<f64>,
    /// Zeros of `A₀(i·)` found in the certification window.
    pub a0_zeros: ZeroSet,
}

/// Window searched for zeros of `A₀(i·)`. Zeros lie in the sector
/// `π/6 < arg λ < π/2` and approach the ray `arg λ = π/3`, so any zero
/// outside the window has real part above 5.
pub const A0_WINDOW: Rect = Rect {
    x0: 0.0,
    x1: 12.0,
    y0: 0.0,
    y1: 12.0,
};

/// Computes [`SpecialConstants`] from scratch.
pub fn constants() -> Result<SpecialConstants> {
    let airy_zeros = airy_real_zeros(10);
    let nu1 = cis(FRAC_PI_3) * airy_zeros[0].abs();
    let a0_zeros = zeros_in_region(&RotatedA0, A0_WINDOW, ZeroSearch::default())?;
    if !a0_zeros.is_complete() {
        return Err(Error::UnderResolved("incomplete zero count for A0(i.)".into()));
    }
    let theta1r = a0_zeros
        .zeros
        .iter()
        .map(|z| z.re)
        .fold(f64::INFINITY, f64::min);
    if !theta1r.is_finite() {
        return Err(Error::NoZeroInWindow(format!("{A0_WINDOW:?}")));
    }
    Ok(SpecialConstants {
        nu1,
        theta1r,
        airy_zeros,
        a0_zeros,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_values() {
        let (ai, aip) = airy_pair(c(0.0, 0.0));
        assert!((ai.re - AI0).abs() < 1e-16 && ai.im == 0.0);
        assert!((aip.re - AIP0).abs() < 1e-16);
    }

    #[test]
    fn series_and_continuation_agree_where_both_are_fine() {
        let z = c(4.0, 1.0);
        let (s, _, _) = airy_series(z);
        let (w, wp) = airy_asymptotic(z * (11.0 / z.norm()));
        let (t, _) = taylor_continue(z * (11.0 / z.norm()), w, wp, z);
        assert!(((s - t) / s).norm() < 1e-10);
    }
}
