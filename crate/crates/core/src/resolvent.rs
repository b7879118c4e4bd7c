//! Resolvent norms of the Orr–Sommerfeld pencil along the spectral
//! contours, exponent fits, the `B★` aggregate, and the Rayleigh
//! estimate/optimality probes.
//!
//! All operator norms are taken in the quadrature-weighted `L²(−1, 1)`:
//! the input (right-hand side) space carries the weights of the equation
//! rows, the output space the full nodal weights of `φ = P v`.

use crate::dense::{hermitian_top_eigenvalue, norm2, ComplexMatrix, GramMetric, Lu};
use crate::error::{precondition, Error, Result};
use crate::flow::{gamma_m, orr_sommerfeld_pencil, rayleigh_solve, BaseFlow, Forcing, OperatorPencil, RayleighConfig, WallBc};
use crate::spectral::SpectralGrid;
use num_complex::Complex64 as C64;
use std::fmt::Write as _;

/// Condition number above which `B(λ)` is reported as singular.
pub const SINGULAR_CONDITION: f64 = 1e14;

/// Precomputed metric-conjugated pencil for repeated resolvent evaluation.
///
/// With `G_in = P*WP = L L*` and `W_r` the row weights, the resolvent
/// `B(λ)⁻¹` has norm `1/σ_min(Ã − sB̃)` where `Ã = W_r^{1/2} A_r L^{-*}`,
/// `B̃` likewise and `s = βλ`.
pub struct ResolventOperator {
    a: ComplexMatrix,
    b: ComplexMatrix,
    /// `W^{1/2} D P L^{-*}`: derivative of the solution in output units.
    dx: ComplexMatrix,
    beta: f64,
}

impl ResolventOperator {
    pub fn new(pencil: &OperatorPencil, grid: &SpectralGrid) -> Result<Self> {
        let red = pencil.reduce(grid)?;
        let p = &red.prolong;
        let w = &grid.weights;
        // G_in = P* W P.
        let wp = p.scale_rows(w);
        let gin = GramMetric::from_gram(&p.adjoint().matmul(&wp))?;
        let row_w: Vec<f64> = red.interior_rows.iter().map(|&i| w[i]).collect();
        let sq: Vec<f64> = row_w.iter().map(|x| x.sqrt()).collect();
        let a = gin.mul_lstar_inv(&red.a).scale_rows(&sq);
        let b = gin.mul_lstar_inv(&red.b).scale_rows(&sq);
        let sqw: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
        let dp = grid.d(1).to_complex().matmul(p);
        let dx = gin.mul_lstar_inv(&dp).scale_rows(&sqw);
        Ok(Self {
            a,
            b,
            dx,
            beta: pencil.beta,
        })
    }

    /// `(‖B(λ)⁻¹‖, ‖(d/dx) B(λ)⁻¹‖)`; both are `∞` when `B(λ)` is
    /// numerically singular. The derivative norm is `NaN` unless requested.
    pub fn norms(&self, lambda: C64, with_derivative: bool) -> (f64, f64) {
        let s = lambda * self.beta;
        let mut m = self.a.clone();
        m.axpy(-s, &self.b);
        let scale = m.norm_fro();
        let lu = match Lu::factor(&m) {
            Ok(lu) => lu,
            Err(_) => return (f64::INFINITY, f64::INFINITY),
        };
        let n = m.rows();
        let top = hermitian_top_eigenvalue(n, |x| lu.solve_adjoint(&lu.solve(x)));
        let res = top.max(0.0).sqrt();
        if !res.is_finite() || res * scale > SINGULAR_CONDITION {
            return (f64::INFINITY, f64::INFINITY);
        }
        let dres = if with_derivative {
            let d = &self.dx;
            hermitian_top_eigenvalue(n, |x| {
                let y = d.mul_vec(&lu.solve(x));
                lu.solve_adjoint(&d.adjoint_mul_vec(&y))
            })
            .max(0.0)
            .sqrt()
        } else {
            f64::NAN
        };
        (res, dres)
    }

    /// `‖(T − βλ)⁻¹‖` for the standard-form operator `T = B⁻¹A` in the
    /// energy metric of the unknowns; this is the resolvent for which
    /// `‖(T − z)⁻¹‖ ≥ 1/dist(z, σ(T))` holds. `∞` when singular.
    pub fn standard_norm(&self, lambda: C64) -> f64 {
        let s = lambda * self.beta;
        let mut m = self.a.clone();
        m.axpy(-s, &self.b);
        let lu = match Lu::factor(&m) {
            Ok(lu) => lu,
            Err(_) => return f64::INFINITY,
        };
        let b = &self.b;
        hermitian_top_eigenvalue(m.rows(), |x| b.adjoint_mul_vec(&lu.solve_adjoint(&lu.solve(&b.mul_vec(x)))))
            .max(0.0)
            .sqrt()
    }

    /// Spectral norm of the metric-conjugated `B`-part of the pencil.
    pub fn mass_norm(&self) -> f64 {
        norm2(&self.b)
    }
}

/// One-shot resolvent norm of a pencil at `λ`.
pub fn resolvent_norm(
    pencil: &OperatorPencil,
    grid: &SpectralGrid,
    lambda: C64,
    with_derivative: bool,
) -> Result<(f64, f64)> {
    Ok(ResolventOperator::new(pencil, grid)?.norms(lambda, with_derivative))
}

/// One evaluation on a scan contour.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanRecord {
    pub beta: f64,
    pub alpha: f64,
    pub lambda: C64,
    pub resnorm: f64,
    pub dxresnorm: f64,
}

/// How the `α` values of a scan are chosen for each `β`.
#[derive(Clone, Debug, PartialEq)]
pub enum AlphaRule {
    /// `α = c β^{1/3}` for each listed `c`.
    CubeRoot(Vec<f64>),
    /// The listed values, independent of `β`.
    Fixed(Vec<f64>),
}

impl AlphaRule {
    pub fn default_cube_root() -> Self {
        AlphaRule::CubeRoot(vec![0.0, 0.25, 0.5, 1.0])
    }

    pub fn alphas(&self, beta: f64) -> Vec<f64> {
        match self {
            AlphaRule::CubeRoot(cs) => cs.iter().map(|c| c * beta.cbrt()).collect(),
            AlphaRule::Fixed(v) => v.clone(),
        }
    }
}

/// Imaginary-part sampling: uniform over `[U(−1) − 2, U(1) + 2]` plus
/// refinement windows of half-width `layer_halfwidth·β^{−1/3}` around
/// `U(±1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImGrid {
    pub uniform: usize,
    pub layer: usize,
    pub layer_halfwidth: f64,
}

impl Default for ImGrid {
    fn default() -> Self {
        Self {
            uniform: 41,
            layer: 21,
            layer_halfwidth: 2.5,
        }
    }
}

impl ImGrid {
    /// Twice as many points in every part.
    pub fn refined(self) -> Self {
        Self {
            uniform: 2 * self.uniform - 1,
            layer: 2 * self.layer - 1,
            layer_halfwidth: self.layer_halfwidth,
        }
    }

    pub fn points(&self, flow: &BaseFlow, beta: f64) -> Vec<f64> {
        let (um, up) = (flow.u_minus(), flow.u_plus());
        let (lo, hi) = (um.min(up) - 2.0, um.max(up) + 2.0);
        let lin = |a: f64, b: f64, k: usize| -> Vec<f64> {
            if k == 1 {
                return vec![0.5 * (a + b)];
            }
            (0..k).map(|i| a + (b - a) * i as f64 / (k - 1) as f64).collect()
        };
        let mut pts = lin(lo, hi, self.uniform);
        let hw = self.layer_halfwidth * beta.powf(-1.0 / 3.0);
        for wall in [um, up] {
            pts.extend(lin(wall - hw, wall + hw, self.layer));
        }
        pts.sort_by(f64::total_cmp);
        pts
    }

    pub fn len(&self) -> usize {
        self.uniform + 2 * self.layer
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `Re λ` on the contour `β⁻¹(Υβ^{2/3} − α²)`.
pub fn contour_re(beta: f64, alpha: f64, upsilon: f64) -> f64 {
    (upsilon * beta.powf(2.0 / 3.0) - alpha * alpha) / beta
}

/// Parameters of a contour scan.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanConfig {
    pub upsilon: f64,
    pub alphas: AlphaRule,
    pub im_grid: ImGrid,
    pub with_derivative: bool,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            upsilon: 0.5,
            alphas: AlphaRule::default_cube_root(),
            im_grid: ImGrid::default(),
            with_derivative: false,
        }
    }
}

/// Resolvent norms over `β × α × Im λ`, sorted by `(β, α, Im λ)`.
pub fn scan(
    flow: &BaseFlow,
    bc: WallBc,
    betas: &[f64],
    cfg: &ScanConfig,
    grid: &SpectralGrid,
) -> Result<Vec<ScanRecord>> {
    if !(cfg.upsilon > 0.0) {
        return precondition("upsilon must be positive");
    }
    let mut out = Vec::new();
    for &beta in betas {
        let ims = cfg.im_grid.points(flow, beta);
        for alpha in cfg.alphas.alphas(beta) {
            let pencil = orr_sommerfeld_pencil(alpha, beta, flow, bc, grid)?;
            let op = ResolventOperator::new(&pencil, grid)?;
            let re = contour_re(beta, alpha, cfg.upsilon);
            for &im in &ims {
                let lambda = C64::new(re, im);
                let (resnorm, dxresnorm) = op.norms(lambda, cfg.with_derivative);
                out.push(ScanRecord {
                    beta,
                    alpha,
                    lambda,
                    resnorm,
                    dxresnorm,
                });
            }
        }
    }
    out.sort_by(|a, b| {
        a.beta
            .total_cmp(&b.beta)
            .then(a.alpha.total_cmp(&b.alpha))
            .then(a.lambda.im.total_cmp(&b.lambda.im))
    });
    Ok(out)
}

/// CSV with header `beta,alpha,re_lambda,im_lambda,resnorm,dxresnorm`.
pub fn scan_csv(records: &[ScanRecord]) -> String {
    let mut s = String::from("beta,alpha,re_lambda,im_lambda,resnorm,dxresnorm\n");
    for r in records {
        let _ = writeln!(
            s,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.beta, r.alpha, r.lambda.re, r.lambda.im, r.resnorm, r.dxresnorm
        );
    }
    s
}

/// Per-`β` supremum of the resolvent norm (ascending `β`).
pub fn sup_by_beta(records: &[ScanRecord]) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    for r in records {
        match out.iter_mut().find(|(b, _)| *b == r.beta) {
            Some(e) => e.1 = e.1.max(r.resnorm),
            None => out.push((r.beta, r.resnorm)),
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Least-squares line through `(log β, log sup resnorm)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
}

pub fn fit_exponent(records: &[ScanRecord]) -> Result<ExponentFit> {
    let sups = sup_by_beta(records);
    if sups.len() < 3 {
        return Err(Error::Precondition(format!(
            "exponent fit needs at least 3 distinct beta values, got {}",
            sups.len()
        )));
    }
    let span = (sups[sups.len() - 1].0 / sups[0].0).log10();
    if span < 1.5 - 1e-12 {
        return Err(Error::Precondition(format!(
            "beta values span {span:.2} decades; at least 1.5 required"
        )));
    }
    if sups.iter().any(|(_, s)| !s.is_finite()) {
        return Err(Error::NumericallySingular {
            sigma: 0.0,
            threshold: 1.0 / SINGULAR_CONDITION,
        });
    }
    let pts: Vec<(f64, f64)> = sups.iter().map(|(b, s)| (b.ln(), s.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    Ok(ExponentFit {
        slope,
        intercept,
        residual,
    })
}

/// `β₁(ε, L) = 2π/(Lε)`.
pub fn beta_one(epsilon: f64, length: f64) -> f64 {
    2.0 * std::f64::consts::PI / (length * epsilon)
}

/// Truncated evaluation of `B★(Υ, ε, L)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BStar {
    pub value: f64,
    pub beta1: f64,
    /// The `β` grid actually used (the sup is truncated there).
    pub betas: Vec<f64>,
    /// Per-`β` maxima of `(1 + α)‖B⁻¹‖ + ‖(d/dx)B⁻¹‖`.
    pub per_beta: Vec<f64>,
    pub records: usize,
}

/// Discrete sup over `β ∈ {β₁, 2β₁, 4β₁, 8β₁}` and the scan's `(α, λ)`
/// grid of `(1 + α)·resnorm + dxresnorm`.
pub fn b_star(
    upsilon: f64,
    epsilon: f64,
    length: f64,
    flow: &BaseFlow,
    bc: WallBc,
    grid: &SpectralGrid,
    alphas: &AlphaRule,
    im_grid: ImGrid,
) -> Result<BStar> {
    let beta1 = beta_one(epsilon, length);
    if beta1 < 500.0 {
        return Err(Error::Precondition(format!(
            "L·ε too large: beta_1 = {beta1:.1} < 500"
        )));
    }
    let betas: Vec<f64> = [1.0, 2.0, 4.0, 8.0].iter().map(|k| k * beta1).collect();
    let cfg = ScanConfig {
        upsilon,
        alphas: alphas.clone(),
        im_grid,
        with_derivative: true,
    };
    let recs = scan(flow, bc, &betas, &cfg, grid)?;
    let per_beta: Vec<f64> = betas
        .iter()
        .map(|b| {
            recs.iter()
                .filter(|r| r.beta == *b)
                .map(|r| (1.0 + r.alpha) * r.resnorm + r.dxresnorm)
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(BStar {
        value: per_beta.iter().cloned().fold(0.0, f64::max),
        beta1,
        betas,
        per_beta,
        records: recs.len(),
    })
}

/// One solve of the Rayleigh probe.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeRow {
    pub nu: f64,
    pub alpha: f64,
    pub mu: f64,
    /// `‖A⁻¹1‖_{1,2} / log(1/μ)`.
    pub log_ratio: f64,
    /// `‖A⁻¹v‖_{1,2} / ‖v‖_{1,p}` for a fixed smooth `v`.
    pub sobolev_ratio: f64,
    /// `μ^{1/p}‖A⁻¹v_μ‖_{1,2}` for box data with `‖v_μ‖_p = 1`.
    pub lp_ratio: f64,
}

/// Max/min spreads over the `μ` sweep for the three estimate families.
#[derive(Clone, Debug, PartialEq)]
pub struct RayleighProbeReport {
    pub p: f64,
    /// Which hypothesis admitted the flow: `"gamma_m"` or `"convex"`.
    pub hypothesis: &'static str,
    pub rows: Vec<ProbeRow>,
    /// Worst max/min ratio across `(ν, α)` for the log, Sobolev and box
    /// families, in that order.
    pub spreads: [f64; 3],
}

impl RayleighProbeReport {
    pub fn max_spread(&self) -> f64 {
        self.spreads.iter().cloned().fold(0.0, f64::max)
    }
}

/// Critical levels probed: `ν = U(x)` for `x ∈ {−0.5, 0, 0.5}`.
pub const PROBE_POINTS: [f64; 3] = [-0.5, 0.0, 0.5];

fn admit_rayleigh_flow(flow: &BaseFlow, grid: &SpectralGrid) -> Result<&'static str> {
    if flow.s_r_radius.is_none() {
        return Err(Error::HypothesisMismatch(format!(
            "flow {} has inf|U'| = 0",
            flow.kind
        )));
    }
    if flow.inf_d2u > 0.0 {
        return Ok("convex");
    }
    let mut inf = f64::INFINITY;
    for mu in [0.5, 0.1, 0.05] {
        for x in PROBE_POINTS {
            let nu = flow.profile(x)[0];
            inf = inf.min(gamma_m(C64::new(mu, nu), flow, grid)?);
        }
    }
    if inf > 0.0 {
        Ok("gamma_m")
    } else {
        Err(Error::HypothesisMismatch(format!(
            "flow {} is neither convex nor has gamma_m > 0 (inf = {inf:e})",
            flow.kind
        )))
    }
}

fn spread(v: &[f64]) -> f64 {
    let (lo, hi) = v
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), x| (a.min(*x), b.max(*x)));
    hi / lo
}

/// Checks the `μ`-scaling of the Rayleigh resolvent at `λ = μ + iν`.
pub fn rayleigh_probe(
    flow: &BaseFlow,
    grid: &SpectralGrid,
    p: f64,
    mus: &[f64],
    alphas: &[f64],
    cfg: &RayleighConfig,
) -> Result<RayleighProbeReport> {
    if !(p >= 1.0) {
        return Err(Error::Precondition(format!("p must be >= 1, got {p}")));
    }
    if mus.is_empty() || mus.iter().any(|m| !(*m > 0.0 && *m < 1.0)) {
        return precondition("mu values must lie in (0, 1)");
    }
    let hypothesis = admit_rayleigh_flow(flow, grid)?;
    let one = Forcing::constant(C64::new(1.0, 0.0));
    let smooth = Forcing::new(|x: f64| C64::new((0.5 * std::f64::consts::PI * x).cos() + x, 0.0), Vec::new());
    let smooth_norm = {
        let d = Forcing::new(
            |x: f64| C64::new(-0.5 * std::f64::consts::PI * (0.5 * std::f64::consts::PI * x).sin() + 1.0, 0.0),
            Vec::new(),
        );
        smooth.lp_norm(p) + d.lp_norm(p)
    };
    let mut rows = Vec::new();
    let mut spreads = [0.0f64; 3];
    for x in PROBE_POINTS {
        let nu = flow.profile(x)[0];
        for &alpha in alphas {
            let mut fam = [Vec::new(), Vec::new(), Vec::new()];
            for &mu in mus {
                let lam = C64::new(mu, nu);
                let a = rayleigh_solve(lam, alpha, flow, grid, &one, 0.0, cfg)?;
                let b = rayleigh_solve(lam, alpha, flow, grid, &smooth, 0.0, cfg)?;
                let (lo, hi) = if x + mu <= 1.0 { (x, x + mu) } else { (x - mu, x) };
                let bx = Forcing::indicator(lo, hi, mu.powf(-1.0 / p));
                let c = rayleigh_solve(lam, alpha, flow, grid, &bx, 0.0, cfg)?;
                let row = ProbeRow {
                    nu,
                    alpha,
                    mu,
                    log_ratio: a.h1_norm / (1.0 / mu).ln(),
                    sobolev_ratio: b.h1_norm / smooth_norm,
                    lp_ratio: mu.powf(1.0 / p) * c.h1_norm,
                };
                fam[0].push(row.log_ratio);
                fam[1].push(row.sobolev_ratio);
                fam[2].push(row.lp_ratio);
                rows.push(row);
            }
            for k in 0..3 {
                spreads[k] = spreads[k].max(spread(&fam[k]));
            }
        }
    }
    Ok(RayleighProbeReport {
        p,
        hypothesis,
        rows,
        spreads,
    })
}

/// Report of the optimality probe: `μ^{1/2}‖φ_μ‖_{1,2}` for unit box data
/// of width `μ` at the critical point.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimalityReport {
    pub nu: f64,
    pub x_nu: f64,
    /// `(μ, value)`; `None` marks a box below the resolution limit.
    pub values: Vec<(f64, Option<f64>)>,
    /// Minimum over resolved values is at least a tenth of the maximum.
    pub bounded_below: bool,
}

/// Smallest box width (in units of `x`) the optimality probe accepts is
/// three times this.
pub const MIN_FEATURE: f64 = 1e-8;

pub fn optimality_probe(
    flow: &BaseFlow,
    grid: &SpectralGrid,
    nu: f64,
    alpha: f64,
    mus: &[f64],
    cfg: &RayleighConfig,
) -> Result<OptimalityReport> {
    let (um, up) = (flow.u_minus(), flow.u_plus());
    if !(nu > um.min(up) && nu < um.max(up)) {
        return Err(Error::Precondition(format!(
            "nu = {nu} must lie strictly inside ({}, {})",
            um.min(up),
            um.max(up)
        )));
    }
    if mus.windows(2).any(|w| !(w[1] < w[0])) || mus.iter().any(|m| !(*m > 0.0)) {
        return precondition("mu list must be positive and decreasing");
    }
    let x_nu = *flow
        .critical_points(nu)
        .first()
        .ok_or_else(|| Error::Precondition(format!("U never takes the value {nu}")))?;
    let mut values = Vec::new();
    for &mu in mus {
        if mu < 3.0 * MIN_FEATURE {
            values.push((mu, None));
            continue;
        }
        let (lo, hi) = if x_nu + mu <= 1.0 { (x_nu, x_nu + mu) } else { (x_nu - mu, x_nu) };
        let v = Forcing::indicator(lo, hi, mu.powf(-0.5));
        let sol = rayleigh_solve(C64::new(mu, nu), alpha, flow, grid, &v, 0.0, cfg)?;
        values.push((mu, Some(mu.sqrt() * sol.h1_norm)));
    }
    let resolved: Vec<f64> = values.iter().filter_map(|v| v.1).collect();
    let bounded_below = !resolved.is_empty() && {
        let (lo, hi) = resolved
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(a, b), x| (a.min(*x), b.max(*x)));
        lo >= 0.1 * hi && lo > 0.0
    };
    Ok(OptimalityReport {
        nu,
        x_nu,
        values,
        bounded_below,
    })
}
