//! `shearlab` command-line front end.
//!
//! Every lab of the library is a subcommand. Results go to `--out` (or
//! stdout) as JSON or CSV with 17 significant digits; nothing depends on
//! the wall clock, so identical arguments give byte-identical output.
//!
//! Exit codes: 0 success (also `--help`/`--version`), 2 violated
//! precondition, 3 numerical failure, 64 unusable command line.

mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use shearlab::airy::{self, AiryFn, Rect, RotatedA0, ZeroSearch};
use shearlab::constrained::{hat_mu_m, mu0, mu0_csv};
use shearlab::flow::{self, make_flow, BaseFlow, FlowKind, RayleighConfig, WallBc};
use shearlab::hodge::{self, PeriodicField, PressureField, RateCheckConfig};
use shearlab::resolvent::{self, AlphaRule, ImGrid, ScanConfig, ScanRecord};
use shearlab::{build_grid, Error, SpectralGrid};
use std::path::PathBuf;
use std::process::ExitCode;

/// Environment variable limiting the worker threads of `resolvent-scan`.
const THREADS_VAR: &str = "SHEARLAB_THREADS";

/// Slope band accepted for the Couette-class exponent fit.
const SLOPE_BAND: [f64; 2] = [-0.95, -0.70];

#[derive(Parser, Debug)]
#[command(name = "shearlab", version, about = "Spectral labs for linearized shear-flow stability")]
struct RunConfig {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct Out {
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Debug)]
struct FlowArgs {
    /// couette | poiseuille | nearly:<δ> | convex:<c>
    #[arg(long, default_value = "couette", value_parser = parse_flow)]
    flow: FlowKind,
    /// Wall condition: S (traction) or D (no-slip).
    #[arg(long, default_value = "S", value_parser = parse_bc)]
    bc: WallBc,
    /// Chebyshev grid size.
    #[arg(long, default_value_t = 128)]
    n: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Orr–Sommerfeld spectrum Λ of one (α, β) pencil.
    Spectrum {
        #[command(flatten)]
        flow: FlowArgs,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[command(flatten)]
        out: Out,
    },
    /// Resolvent norms along the spectral contour, with an exponent fit.
    ResolventScan {
        #[command(flatten)]
        flow: FlowArgs,
        /// Comma-separated β values.
        #[arg(long, value_delimiter = ',', default_value = "1e3,3162.2776601683795,1e4,31622.776601683792,1e5")]
        betas: Vec<f64>,
        /// cube-root:<c,…> (α = cβ^{1/3}) or fixed:<α,…>
        #[arg(long, default_value = "cube-root:0,0.25,0.5,1", value_parser = parse_alpha_rule)]
        alpha_rule: AlphaRule,
        #[arg(long, default_value_t = 0.5)]
        upsilon: f64,
        /// Also compute the derivative resolvent norm.
        #[arg(long)]
        with_derivative: bool,
        #[command(flatten)]
        out: Out,
    },
    /// Truncated B★(Υ, ε, L) aggregate.
    Bstar {
        #[command(flatten)]
        flow: FlowArgs,
        #[arg(long, default_value_t = 0.5)]
        upsilon: f64,
        #[arg(long, default_value_t = 1e-3)]
        epsilon: f64,
        #[arg(long, default_value_t = 6.0)]
        length: f64,
        #[arg(long, default_value = "cube-root:0,0.25,0.5,1", value_parser = parse_alpha_rule)]
        alpha_rule: AlphaRule,
        #[command(flatten)]
        out: Out,
    },
    /// Certified zeros of Ai or of A₀(i·) in a square window.
    AiryZeros {
        #[arg(long, value_enum, default_value_t = ZeroFunction::A0)]
        function: ZeroFunction,
        /// Half-width of the square search window centred at 0.
        #[arg(long, default_value_t = 12.0)]
        half_width: f64,
        #[command(flatten)]
        out: Out,
    },
    /// ν₁, θ₁ʳ, μ̂_m and the first real Airy zeros.
    Constants {
        #[command(flatten)]
        out: Out,
    },
    /// Leftmost zero μ₀(θ) of the constrained half-line problem.
    Mu0 {
        #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,1,2,4,8")]
        theta: Vec<f64>,
        #[command(flatten)]
        out: Out,
    },
    /// Weighted semigroup decay check over the first Fourier modes.
    Semigroup {
        #[command(flatten)]
        flow: FlowArgs,
        #[arg(long)]
        upsilon: f64,
        #[arg(long, default_value_t = 1e-3)]
        epsilon: f64,
        #[arg(long, default_value_t = 6.0)]
        length: f64,
        #[arg(long, default_value_t = 4)]
        modes: i64,
        #[arg(long, default_value_t = 25)]
        time_points: usize,
        /// Mode whose `t,norm` curve is written in CSV format.
        #[arg(long, default_value_t = 1)]
        mode: i64,
        #[command(flatten)]
        out: Out,
    },
    /// Projection and decomposition residuals on seeded random fields.
    HodgeDemo {
        #[arg(long, default_value_t = 32)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        fields: usize,
        #[arg(long, default_value_t = 6.0)]
        length: f64,
        #[command(flatten)]
        out: Out,
    },
    /// μ-uniformity of the Rayleigh resolvent estimates.
    ProbeRayleigh {
        #[command(flatten)]
        flow: FlowArgs,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, value_delimiter = ',', default_value = "1e-1,1e-2,1e-3")]
        mus: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0,1")]
        alphas: Vec<f64>,
        #[command(flatten)]
        out: Out,
    },
    /// μ^{1/2}‖φ_μ‖ for box data concentrated at the critical point.
    ProbeOptimality {
        #[command(flatten)]
        flow: FlowArgs,
        #[arg(long, default_value_t = 0.0)]
        nu: f64,
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        #[arg(long, value_delimiter = ',', default_value = "1e-2,1e-3")]
        mus: Vec<f64>,
        #[command(flatten)]
        out: Out,
    },
    /// Neutral Reynolds number of the no-slip pencil at fixed α.
    CriticalReynolds {
        #[arg(long, default_value = "poiseuille", value_parser = parse_flow)]
        flow: FlowKind,
        #[arg(long, default_value_t = 128)]
        n: usize,
        #[arg(long, default_value_t = 1.02)]
        alpha: f64,
        #[arg(long, default_value_t = 4000.0)]
        re_lo: f64,
        #[arg(long, default_value_t = 8000.0)]
        re_hi: f64,
        #[arg(long, default_value_t = 1e-9)]
        rel_tol: f64,
        #[command(flatten)]
        out: Out,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ZeroFunction {
    /// Ai(z).
    Ai,
    /// A₀(iz).
    A0,
}

fn parse_flow(s: &str) -> Result<FlowKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_bc(s: &str) -> Result<WallBc, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_alpha_rule(s: &str) -> Result<AlphaRule, String> {
    let (kind, list) = s
        .split_once(':')
        .ok_or_else(|| format!("expected cube-root:<list> or fixed:<list>, got {s:?}"))?;
    let values = list
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    match kind {
        "cube-root" => Ok(AlphaRule::CubeRoot(values)),
        "fixed" => Ok(AlphaRule::Fixed(values)),
        _ => Err(format!("unknown alpha rule {kind:?}")),
    }
}

/// A finished run: text to write plus an optional numerical-failure note
/// that turns the exit code into 3 after the output is written.
struct Outcome {
    text: String,
    numerical_warning: Option<String>,
}

impl From<String> for Outcome {
    fn from(text: String) -> Self {
        Self {
            text,
            numerical_warning: None,
        }
    }
}

fn setup(args: &FlowArgs) -> shearlab::Result<(SpectralGrid, BaseFlow)> {
    let grid = build_grid(args.n)?;
    let flow = make_flow(&args.flow, &grid)?;
    Ok((grid, flow))
}

fn json_only(out: &Out, what: &str) -> shearlab::Result<()> {
    if out.format == Format::Csv {
        return Err(Error::Precondition(format!("{what} has no CSV form; use --format json")));
    }
    Ok(())
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn thread_count() -> usize {
    std::env::var(THREADS_VAR)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&t| t > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Splits the β list over worker threads; the merge restores the
/// `(β, α, Im λ)` order so the result does not depend on the split.
fn parallel_scan(
    flow: &BaseFlow,
    bc: WallBc,
    betas: &[f64],
    cfg: &ScanConfig,
    grid: &SpectralGrid,
) -> shearlab::Result<Vec<ScanRecord>> {
    let chunk = betas.len().div_ceil(thread_count().min(betas.len()).max(1)).max(1);
    let parts: Vec<shearlab::Result<Vec<ScanRecord>>> = std::thread::scope(|s| {
        let handles: Vec<_> = betas
            .chunks(chunk)
            .map(|part| s.spawn(move || resolvent::scan(flow, bc, part, cfg, grid)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("scan worker panicked")).collect()
    });
    let mut recs = Vec::new();
    for p in parts {
        recs.extend(p?);
    }
    recs.sort_by(|a, b| {
        a.beta
            .total_cmp(&b.beta)
            .then(a.alpha.total_cmp(&b.alpha))
            .then(a.lambda.im.total_cmp(&b.lambda.im))
    });
    Ok(recs)
}

fn random_poly(grid: &SpectralGrid, rng: &mut ChaCha8Rng, degree: usize) -> Vec<C64> {
    let coef: Vec<C64> = (0..=degree)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    grid.nodes
        .iter()
        .map(|x| coef.iter().rev().fold(C64::new(0.0, 0.0), |acc, a| acc * x + a))
        .collect()
}

fn conj(v: &[C64]) -> Vec<C64> {
    v.iter().map(|z| z.conj()).collect()
}

/// Real random field with Fourier modes `−3..=3` and degree-8 profiles.
fn random_field(grid: &SpectralGrid, rng: &mut ChaCha8Rng, length: f64) -> PeriodicField {
    let mut f = PeriodicField::zero(length);
    for n in 0..=3i64 {
        let mut u1 = random_poly(grid, rng, 8);
        let mut u2 = random_poly(grid, rng, 8);
        if n == 0 {
            u1.iter_mut().for_each(|z| z.im = 0.0);
            u2.iter_mut().for_each(|z| z.im = 0.0);
        } else {
            f = f.with_mode(-n, conj(&u1), conj(&u2));
        }
        f = f.with_mode(n, u1, u2);
    }
    f
}

fn random_pressure(grid: &SpectralGrid, rng: &mut ChaCha8Rng, length: f64) -> PressureField {
    let mut p = PressureField {
        length,
        affine: C64::new(rng.gen_range(-1.0..1.0), 0.0),
        modes: Default::default(),
    };
    for m in 0..=3i64 {
        let mut v = random_poly(grid, rng, 8);
        if m == 0 {
            v.iter_mut().for_each(|z| z.im = 0.0);
            let mean = grid.integrate_c(&v) * 0.5;
            v.iter_mut().for_each(|z| *z -= mean);
        } else {
            p.modes.insert(-m, conj(&v));
        }
        p.modes.insert(m, v);
    }
    p
}

fn hodge_demo(n: usize, seed: u64, fields: usize, length: f64) -> shearlab::Result<Value> {
    if fields == 0 {
        return Err(Error::Precondition("need at least one field".into()));
    }
    let grid = build_grid(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = [0.0f64; 6];
    for _ in 0..fields {
        let u = random_field(&grid, &mut rng, length);
        let scale = u.norm(&grid);
        let pi = hodge::project_pi(&u);
        let pu = hodge::project_p(&u, &grid)?;
        worst[0] = worst[0].max(hodge::project_pi(&pi).sub(&pi).norm(&grid) / scale);
        worst[1] = worst[1].max(hodge::project_p(&pu, &grid)?.sub(&pu).norm(&grid) / scale);
        let commutator = hodge::project_pi(&pu).sub(&hodge::project_p(&pi, &grid)?);
        worst[2] = worst[2].max(commutator.norm(&grid) / scale);
        let h = hodge::hodge_decompose(&u, &grid)?;
        worst[3] = worst[3].max(h.reconstruct(&grid).sub(&u).norm(&grid) / scale);
        let k = h.constant_field(&grid);
        let parts = [&h.curl_part, &h.div_part, &k];
        for i in 0..3 {
            for j in i + 1..3 {
                worst[4] = worst[4].max(parts[i].inner(parts[j], &grid).norm() / (scale * scale));
            }
        }
        let g = random_pressure(&grid, &mut rng, length).gradient(&grid);
        let q = hodge::recover_pressure(&g, &grid)?;
        worst[5] = worst[5].max(q.gradient(&grid).sub(&g).norm(&grid) / g.norm(&grid));
    }
    Ok(json!({
        "n": n,
        "seed": seed,
        "fields": fields,
        "length": length,
        "pi_idempotence": worst[0],
        "p_idempotence": worst[1],
        "commutator": worst[2],
        "reconstruction": worst[3],
        "orthogonality": worst[4],
        "pressure_residual": worst[5],
    }))
}

fn run(cmd: Command) -> shearlab::Result<(Outcome, Option<PathBuf>)> {
    let (outcome, out): (Outcome, Out) = match cmd {
        Command::Spectrum { flow, alpha, beta, out } => {
            let (grid, f) = setup(&flow)?;
            let pencil = flow::orr_sommerfeld_pencil(alpha, beta, &f, flow.bc, &grid)?;
            let spec = flow::os_spectrum(&pencil, &grid)?;
            let text = match out.format {
                Format::Json => output::to_json(&json!({
                    "flow": flow.flow.to_string(),
                    "bc": flow.bc.to_string(),
                    "alpha": alpha,
                    "beta": beta,
                    "eigenvalues_Lambda": spec.iter().map(|e| pair(e.big_lambda)).collect::<Vec<_>>(),
                })),
                Format::Csv => output::csv(
                    "re_Lambda,im_Lambda",
                    spec.iter().map(|e| vec![e.big_lambda.re, e.big_lambda.im]),
                ),
            };
            (text.into(), out)
        }
        Command::ResolventScan {
            flow,
            betas,
            alpha_rule,
            upsilon,
            with_derivative,
            out,
        } => {
            let (grid, f) = setup(&flow)?;
            let cfg = ScanConfig {
                upsilon,
                alphas: alpha_rule,
                im_grid: ImGrid::default(),
                with_derivative,
            };
            let recs = parallel_scan(&f, flow.bc, &betas, &cfg, &grid)?;
            let singular = recs.iter().filter(|r| !r.resnorm.is_finite()).count();
            let text = match out.format {
                Format::Csv => resolvent::scan_csv(&recs),
                Format::Json => {
                    let fit = match resolvent::fit_exponent(&recs) {
                        Ok(fit) => json!({
                            "slope": fit.slope,
                            "intercept": fit.intercept,
                            "residual": fit.residual,
                            "band": SLOPE_BAND,
                            "pass": fit.slope >= SLOPE_BAND[0] && fit.slope <= SLOPE_BAND[1],
                        }),
                        Err(e) => json!({ "error": e.to_string() }),
                    };
                    let rows: Vec<Value> = recs
                        .iter()
                        .map(|r| {
                            json!({
                                "beta": r.beta,
                                "alpha": r.alpha,
                                "re_lambda": r.lambda.re,
                                "im_lambda": r.lambda.im,
                                "resnorm": r.resnorm,
                                "dxresnorm": r.dxresnorm,
                            })
                        })
                        .collect();
                    output::to_json(&json!({
                        "flow": flow.flow.to_string(),
                        "bc": flow.bc.to_string(),
                        "upsilon": upsilon,
                        "records": rows,
                        "fit": fit,
                    }))
                }
            };
            let outcome = Outcome {
                text,
                numerical_warning: (singular > 0).then(|| format!("{singular} records hit the singular marker")),
            };
            (outcome, out)
        }
        Command::Bstar {
            flow,
            upsilon,
            epsilon,
            length,
            alpha_rule,
            out,
        } => {
            json_only(&out, "bstar")?;
            let (grid, f) = setup(&flow)?;
            let b = resolvent::b_star(upsilon, epsilon, length, &f, flow.bc, &grid, &alpha_rule, ImGrid::default())?;
            let text = output::to_json(&json!({
                "flow": flow.flow.to_string(),
                "bc": flow.bc.to_string(),
                "upsilon": upsilon,
                "epsilon": epsilon,
                "length": length,
                "value": b.value,
                "beta1": b.beta1,
                "betas": b.betas,
                "per_beta": b.per_beta,
                "records": b.records,
                "truncated_at_beta": b.betas.last(),
            }));
            let outcome = Outcome {
                text,
                numerical_warning: (!b.value.is_finite()).then(|| "B★ hit the singular marker".to_string()),
            };
            (outcome, out)
        }
        Command::AiryZeros { function, half_width, out } => {
            if !(half_width > 0.0) {
                return Err(Error::Precondition("half-width must be positive".into()));
            }
            let rect = Rect::new(-half_width, half_width, -half_width, half_width);
            let set = match function {
                ZeroFunction::Ai => airy::zeros_in_region(&AiryFn, rect, ZeroSearch::default())?,
                ZeroFunction::A0 => airy::zeros_in_region(&RotatedA0, rect, ZeroSearch::default())?,
            };
            let text = match out.format {
                Format::Json => output::to_json(&json!({
                    "zeros": set.zeros.iter().map(|z| pair(*z)).collect::<Vec<_>>(),
                    "winding_total": set.winding_total(),
                    "residual": set.residual,
                    "complete": set.is_complete(),
                })),
                Format::Csv => output::csv("re,im", set.zeros.iter().map(|z| vec![z.re, z.im])),
            };
            let outcome = Outcome {
                text,
                numerical_warning: (!set.is_complete()).then(|| "zero count not certified".to_string()),
            };
            (outcome, out)
        }
        Command::Constants { out } => {
            json_only(&out, "constants")?;
            let k = airy::constants()?;
            let h = hat_mu_m()?;
            let text = output::to_json(&json!({
                "nu1": pair(k.nu1),
                "re_nu1": k.nu1.re,
                "theta1r": k.theta1r,
                "hat_mu_m": h.value,
                "hat_mu_theta": h.theta,
                "airy_zeros": k.airy_zeros,
            }));
            (text.into(), out)
        }
        Command::Mu0 { theta, out } => {
            let points = theta.iter().map(|&t| mu0(t)).collect::<shearlab::Result<Vec<_>>>()?;
            let text = match out.format {
                Format::Csv => mu0_csv(&points),
                Format::Json => output::to_json(
                    &points
                        .iter()
                        .map(|p| json!({ "theta": p.theta, "mu0": p.mu, "lambda": pair(p.lambda) }))
                        .collect::<Vec<_>>(),
                ),
            };
            (text.into(), out)
        }
        Command::Semigroup {
            flow,
            upsilon,
            epsilon,
            length,
            modes,
            time_points,
            mode,
            out,
        } => {
            let (grid, f) = setup(&flow)?;
            let cfg = RateCheckConfig { modes, time_points };
            let rep = hodge::theorem_rate_check(&f, epsilon, length, flow.bc, upsilon, &grid, cfg)?;
            let text = match out.format {
                Format::Csv => {
                    let curve = rep
                        .curves
                        .iter()
                        .find(|c| c.0 == mode)
                        .ok_or_else(|| Error::Precondition(format!("mode {mode} not in 1..={modes}")))?;
                    output::csv("t,norm", rep.times.iter().zip(&curve.1).map(|(t, v)| vec![*t, *v]))
                }
                Format::Json => output::to_json(&json!({
                    "upsilon": rep.upsilon,
                    "sup_weighted": rep.sup_weighted,
                    "pass": rep.pass,
                    "epsilon": rep.epsilon,
                    "length": rep.length,
                    "beta1": rep.beta1,
                    "hypothesis": rep.hypothesis,
                    "tail_slope": rep.tail_slope,
                    "times": rep.times,
                    "weighted": rep.weighted,
                    "curves": rep.curves.iter().map(|(n, c)| json!({ "mode": n, "norm": c })).collect::<Vec<_>>(),
                })),
            };
            (text.into(), out)
        }
        Command::HodgeDemo {
            n,
            seed,
            fields,
            length,
            out,
        } => {
            json_only(&out, "hodge-demo")?;
            (output::to_json(&hodge_demo(n, seed, fields, length)?).into(), out)
        }
        Command::ProbeRayleigh { flow, p, mus, alphas, out } => {
            let (grid, f) = setup(&flow)?;
            let rep = resolvent::rayleigh_probe(&f, &grid, p, &mus, &alphas, &RayleighConfig::default())?;
            let text = match out.format {
                Format::Csv => output::csv(
                    "nu,alpha,mu,log_ratio,sobolev_ratio,lp_ratio",
                    rep.rows
                        .iter()
                        .map(|r| vec![r.nu, r.alpha, r.mu, r.log_ratio, r.sobolev_ratio, r.lp_ratio]),
                ),
                Format::Json => output::to_json(&json!({
                    "flow": flow.flow.to_string(),
                    "p": rep.p,
                    "hypothesis": rep.hypothesis,
                    "spreads": { "log": rep.spreads[0], "sobolev": rep.spreads[1], "box": rep.spreads[2] },
                    "rows": rep.rows.iter().map(|r| json!({
                        "nu": r.nu,
                        "alpha": r.alpha,
                        "mu": r.mu,
                        "log_ratio": r.log_ratio,
                        "sobolev_ratio": r.sobolev_ratio,
                        "lp_ratio": r.lp_ratio,
                    })).collect::<Vec<_>>(),
                })),
            };
            (text.into(), out)
        }
        Command::ProbeOptimality {
            flow,
            nu,
            alpha,
            mus,
            out,
        } => {
            let (grid, f) = setup(&flow)?;
            let rep = resolvent::optimality_probe(&f, &grid, nu, alpha, &mus, &RayleighConfig::default())?;
            let text = match out.format {
                Format::Csv => output::csv(
                    "mu,value",
                    rep.values.iter().map(|(m, v)| vec![*m, v.unwrap_or(f64::NAN)]),
                ),
                Format::Json => output::to_json(&json!({
                    "flow": flow.flow.to_string(),
                    "nu": rep.nu,
                    "x_nu": rep.x_nu,
                    "values": rep.values.iter().map(|(m, v)| json!([m, v])).collect::<Vec<_>>(),
                    "bounded_below": rep.bounded_below,
                })),
            };
            (text.into(), out)
        }
        Command::CriticalReynolds {
            flow,
            n,
            alpha,
            re_lo,
            re_hi,
            rel_tol,
            out,
        } => {
            json_only(&out, "critical-reynolds")?;
            let grid = build_grid(n)?;
            let f = make_flow(&flow, &grid)?;
            let rc = flow::critical_reynolds(&f, &grid, alpha, (re_lo, re_hi), rel_tol)?;
            let text = output::to_json(&json!({
                "flow": flow.to_string(),
                "alpha": rc.alpha,
                "reynolds": rc.reynolds,
                "iterations": rc.iterations,
                "leading_Lambda": pair(rc.leading.big_lambda),
            }));
            (text.into(), out)
        }
    };
    Ok((outcome, out.out))
}

fn main() -> ExitCode {
    let cli = match RunConfig::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(64) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok((outcome, path)) => {
            if let Err(e) = output::emit(path.as_deref(), &outcome.text) {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(2);
            }
            match outcome.numerical_warning {
                Some(msg) => {
                    eprintln!("numerical failure: {msg}");
                    ExitCode::from(3)
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_precondition() { 2 } else { 3 })
        }
    }
}
