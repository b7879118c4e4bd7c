use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shearlab::dense::{eigenvalues, singular_values, smallest_singular_value, ComplexMatrix, GramMetric};
use shearlab::flow::*;
use shearlab::quad::gauss_legendre;
use shearlab::spectral::build_grid;
use shearlab::Error;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[test]
fn flow_descriptors_of_the_standard_families() {
    let g = build_grid(64).unwrap();
    let couette = make_flow(&FlowKind::Couette, &g).unwrap();
    assert_eq!(couette.m, 1.0);
    assert_eq!((couette.j_minus, couette.j_plus, couette.j_m), (1.0, 1.0, 1.0));
    assert_eq!(couette.delta2, 0.0);
    assert!(couette.satisfies_monotonicity());

    let pois = make_flow(&FlowKind::Poiseuille, &g).unwrap();
    assert_eq!(pois.m, 0.0);
    assert!(pois.s_r_radius.is_none());
    assert_eq!((pois.j_minus, pois.j_plus), (2.0, -2.0));

    let convex = make_flow(&FlowKind::Convex(0.5), &g).unwrap();
    assert_eq!(convex.inf_d2u, 0.5);
    assert_eq!(convex.m, 0.5);
    assert_eq!(convex.j_m, 0.5);

    let nearly = make_flow(&FlowKind::NearlyCouette(0.05), &g).unwrap();
    assert!((nearly.delta2 - 0.05 * (1.0 + PI)).abs() < 1e-6);
    assert!((nearly.m - (1.0 - 0.05 / PI)).abs() < 1e-15);
    let wider = make_flow(&FlowKind::NearlyCouette(0.1), &g).unwrap();
    assert!((wider.delta2 / nearly.delta2 - 2.0).abs() < 1e-6);

    assert!(matches!(
        make_flow(&FlowKind::NearlyCouette(-0.1), &g),
        Err(Error::Precondition(_))
    ));
    assert!(make_flow(&FlowKind::Convex(1.5), &g).is_err());
}

#[test]
fn derivative_samples_agree_with_spectral_differentiation() {
    // Small n: the third-derivative matrix has entries ~n⁶, so rounding
    // would dominate the comparison on fine grids.
    let g = build_grid(24).unwrap();
    for kind in [
        FlowKind::Couette,
        FlowKind::Poiseuille,
        FlowKind::NearlyCouette(0.3),
        FlowKind::Convex(-0.4),
    ] {
        let f = make_flow(&kind, &g).unwrap();
        for (k, exact) in [(1, &f.du), (2, &f.d2u), (3, &f.d3u)] {
            let num = g.d(k).apply(&f.u);
            let err = num.iter().zip(exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-8, "{kind} order {k}: {err:e}");
        }
    }
}

#[test]
fn class_radius_bounds_hold() {
    let g = build_grid(32).unwrap();
    for kind in [FlowKind::Couette, FlowKind::NearlyCouette(0.2), FlowKind::Convex(0.5)] {
        let f = make_flow(&kind, &g).unwrap();
        let r = f.s_r_radius.unwrap();
        assert!(f.m >= 1.0 / r - 1e-15);
        let d4: f64 = g.d(4).apply(&f.u).iter().fold(0.0, |a, b| a.max(b.abs()));
        let sup = |v: &[f64]| v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let norm4 = sup(&f.u) + sup(&f.du) + sup(&f.d2u) + sup(&f.d3u) + d4;
        assert!(norm4 <= r * (1.0 + 1e-6), "{kind}: {norm4} > {r}");
    }
}

#[test]
fn custom_zero_flow_gives_the_dirichlet_laplacian() {
    let g = build_grid(64).unwrap();
    let zero = custom_flow(&vec![0.0; g.len()], &g).unwrap();
    assert_eq!(zero.m, 0.0);
    assert!(zero.s_r_radius.is_none());
    let p = shearlab::flow::schrodinger_pencil(1.0, &zero, &g, shearlab::BcSpec::Dirichlet, 0.0).unwrap();
    let mut ev: Vec<f64> = p.reduce(&g).unwrap().eigenvalues().unwrap().iter().map(|z| z.re).collect();
    ev.sort_by(f64::total_cmp);
    for k in 1..=6 {
        let exact = (k as f64 * PI / 2.0).powi(2);
        assert!((ev[k - 1] - exact).abs() < 1e-8, "k={k}: {} vs {exact}", ev[k - 1]);
    }
    // Bordered matrix keeps the Dirichlet rows.
    let m = schrodinger_dirichlet(1.0, &zero, &g).unwrap();
    assert_eq!(m[(0, 0)], c(1.0, 0.0));
    assert_eq!(m[(0, 1)], c(0.0, 0.0));
}

#[test]
fn constraint_profiles_match_their_exponential_limits() {
    let g = build_grid(64).unwrap();
    let bc = zeta_constraints(3.0, &g).unwrap();
    if let shearlab::BcSpec::Constrained { plus, minus } = &bc {
        assert!((plus[0] - 1.0).abs() < 1e-15 && plus[g.n].abs() < 1e-15);
        assert!((minus[g.n] - 1.0).abs() < 1e-15 && minus[0].abs() < 1e-15);
    } else {
        panic!("expected constraint spec");
    }
    let alpha = 20.0;
    let err = g
        .nodes
        .iter()
        .map(|&x| (zeta_plus(alpha, x) - (-alpha * (1.0 - x)).exp()).abs())
        .fold(0.0, f64::max);
    assert!(err <= 2.0 * (-2.0 * alpha).exp(), "{err:e}");
    // Assembly keeps interior rows and installs weighted constraint rows.
    let flow = make_flow(&FlowKind::Couette, &g).unwrap();
    let m = schrodinger_constrained(100.0, &flow, &g, 2.0).unwrap();
    let dirichlet = schrodinger_dirichlet(100.0, &flow, &g).unwrap();
    assert_eq!(m.row(5), dirichlet.row(5));
    let row0: f64 = m.row(0).iter().map(|z| z.re).sum();
    let integral: f64 = g.integrate(&g.sample(|x| zeta_plus(2.0, x)));
    assert!((row0 - integral).abs() < 1e-14);
}

#[test]
fn hardy_inequality_on_random_polynomials() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (xs, ws) = gauss_legendre(40);
    for _ in 0..200 {
        let deg = rng.gen_range(0..10);
        let coef: Vec<f64> = (0..=deg).map(|_| rng.gen_range(-1.0..1.0)).collect();
        // v = (1 − x) p(x) on (0, 1), extended by zero beyond x = 1.
        let p = |x: f64| coef.iter().rev().fold(0.0, |a, c| a * x + c);
        let dp = |x: f64| {
            coef.iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| k as f64 * c * x.powi(k as i32 - 1))
                .sum::<f64>()
        };
        let (mut lhs, mut rhs) = (0.0, 0.0);
        for (t, w) in xs.iter().zip(&ws) {
            let x = 0.5 * (t + 1.0);
            let v = (1.0 - x) * p(x);
            let dv = -p(x) + (1.0 - x) * dp(x);
            lhs += 0.5 * w * v * v;
            rhs += 0.5 * w * x * x * dv * dv;
        }
        assert!(lhs.sqrt() <= (2.0 + 1e-6) * rhs.sqrt(), "{} > 2 {}", lhs.sqrt(), rhs.sqrt());
    }
}

#[test]
fn self_adjoint_limit_has_real_positive_spectrum() {
    let g = build_grid(48).unwrap();
    let zero = custom_flow(&vec![0.0; g.len()], &g).unwrap();
    for bc in [WallBc::S, WallBc::D] {
        let p = orr_sommerfeld_pencil(1.0, 1.0, &zero, bc, &g).unwrap();
        let sp = os_spectrum(&p, &g).unwrap();
        for e in &sp[..20] {
            assert!(e.lambda.im.abs() < 1e-6 * e.lambda.norm(), "{bc}: {:?}", e.lambda);
            assert!(e.lambda.re > 0.0);
        }
    }
}

#[test]
fn couette_spectrum_is_stable_and_converged() {
    let g = build_grid(128).unwrap();
    let flow = make_flow(&FlowKind::Couette, &g).unwrap();
    for bc in [WallBc::S, WallBc::D] {
        let p = orr_sommerfeld_pencil(1.0, 1e3, &flow, bc, &g).unwrap();
        let sp = os_spectrum(&p, &g).unwrap();
        assert!(sp.iter().all(|e| e.big_lambda.re > 0.0));
        let e = sp[0];
        assert!((e.lambda_hat - (e.lambda * 1e3 + 1.0)).norm() < 1e-9 * e.lambda_hat.norm());
        assert!((e.big_lambda - e.lambda_hat * 1e-3).norm() < 1e-15 * e.lambda_hat.norm());
    }
    let g2 = build_grid(192).unwrap();
    let flow2 = make_flow(&FlowKind::Couette, &g2).unwrap();
    let lead = |g: &shearlab::SpectralGrid, f: &BaseFlow| {
        os_spectrum(&orr_sommerfeld_pencil(1.0, 1e3, f, WallBc::S, g).unwrap(), g).unwrap()[0].big_lambda
    };
    let d = (lead(&g, &flow) - lead(&g2, &flow2)).norm();
    assert!(d < 1e-6, "leading eigenvalue moved by {d:e}");
}

#[test]
fn poiseuille_is_near_neutral_at_the_critical_reynolds_number() {
    let g = build_grid(128).unwrap();
    let flow = make_flow(&FlowKind::Poiseuille, &g).unwrap();
    let alpha = 1.02;
    let p = orr_sommerfeld_pencil(alpha, alpha * 5772.0, &flow, WallBc::D, &g).unwrap();
    let lead = os_spectrum(&p, &g).unwrap()[0].big_lambda;
    assert!(lead.re.abs() < 5e-3 * lead.norm());
    let rc = critical_reynolds(&flow, &g, alpha, (4000.0, 8000.0), 1e-9).unwrap();
    assert!((rc.reynolds / 5772.0 - 1.0).abs() < 0.01, "{}", rc.reynolds);
    assert!(rc.leading.lambda_hat.re.abs() < 1e-6 * rc.leading.lambda_hat.norm());
    assert!(matches!(
        critical_reynolds(&flow, &g, alpha, (1000.0, 2000.0), 1e-9),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn pencil_depends_on_alpha_squared_only() {
    let g = build_grid(32).unwrap();
    let flow = make_flow(&FlowKind::NearlyCouette(0.1), &g).unwrap();
    let p = orr_sommerfeld_pencil(1.3, 500.0, &flow, WallBc::D, &g).unwrap();
    // The assembly takes α ≥ 0; build the −α operator by hand.
    let a = -1.3f64;
    let d2 = g.d(2);
    let d4 = g.d(4);
    let np = g.len();
    let b0 = ComplexMatrix::from_fn(np, np, |i, j| {
        let mut v = c(-d4.get(i, j) + a * a * d2.get(i, j), 500.0 * flow.u[i] * d2.get(i, j));
        if i == j {
            v += c(0.0, -500.0 * a * a * flow.u[i] - 500.0 * flow.d2u[i]);
        }
        v
    });
    let b0 = shearlab::spectral::impose_bc(&b0, &WallBc::D.spec(), &g).unwrap();
    let lam = c(0.01, 0.3);
    let b1m = ComplexMatrix::from_fn(np, np, |i, j| c(d2.get(i, j) - if i == j { a * a } else { 0.0 }, 0.0));
    let mut bm = b0;
    for i in WallBc::D.spec().interior_rows(g.n) {
        for j in 0..np {
            bm[(i, j)] -= lam * 500.0 * b1m[(i, j)];
        }
    }
    assert_eq!(bm, p.matrix(lam));
}

#[test]
fn rayleigh_conjugation_symmetry() {
    let g = build_grid(32).unwrap();
    let flow = make_flow(&FlowKind::Convex(0.5), &g).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let lam = c(rng.gen_range(-1.0..1.0), rng.gen_range(-2.0..2.0));
        let alpha = rng.gen_range(0.0..3.0);
        let phi: Vec<C64> = (0..g.len()).map(|_| c(rng.gen(), rng.gen())).collect();
        let a = rayleigh_matrix(lam, alpha, &flow, &g).unwrap();
        let b = rayleigh_matrix(-lam.conj(), alpha, &flow, &g).unwrap();
        let lhs: Vec<C64> = a.mul_vec(&phi).iter().map(|z| z.conj()).collect();
        let phic: Vec<C64> = phi.iter().map(|z| z.conj()).collect();
        let rhs = b.mul_vec(&phic);
        let err = lhs.iter().zip(&rhs).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(err < 1e-9 * a.norm_max(), "{err:e}");
    }
}

#[test]
fn rayleigh_matrix_detects_the_embedded_kernel() {
    let g = build_grid(64).unwrap();
    let flow = make_flow(&FlowKind::Couette, &g).unwrap();
    let smin = |lam: C64| {
        let m = rayleigh_matrix(lam, 1.0, &flow, &g).unwrap();
        *singular_values(&m).last().unwrap()
    };
    let at = smin(c(0.0, 0.0));
    let off = smin(c(0.1, 0.0));
    assert!(at < 1e-3 * off, "{at:e} vs {off:e}");
}

#[test]
fn rayleigh_inverse_obeys_the_convex_bound() {
    let g = build_grid(96).unwrap();
    let flow = make_flow(&FlowKind::Convex(0.5), &g).unwrap();
    let w = GramMetric::diagonal(&g.weights[1..g.n]).unwrap();
    let mut vals = Vec::new();
    for mu in [0.5, 0.1] {
        let mut sup: f64 = 0.0;
        for k in 0..21 {
            let nu = -0.6 + 1.2 * k as f64 / 20.0;
            let m = rayleigh_matrix(c(mu, nu), 1.0, &flow, &g).unwrap();
            let int: Vec<usize> = (1..g.n).collect();
            // Dirichlet-reduced operator on interior nodes.
            let mr = m.select_rows(&int).select_cols(&int);
            let s = smallest_singular_value(&mr, Some((&w, &w)), false).unwrap();
            sup = sup.max(1.0 / s);
        }
        vals.push(sup * mu / (1.0 + mu.sqrt()));
    }
    let ratio = vals[0].max(vals[1]) / vals[0].min(vals[1]);
    assert!(ratio < 10.0, "{vals:?}");
}

#[test]
fn embedded_couette_solve_matches_the_closed_form() {
    let g = build_grid(128).unwrap();
    let flow = make_flow(&FlowKind::Couette, &g).unwrap();
    let cfg = RayleighConfig::default();
    let one = Forcing::constant(c(1.0, 0.0));
    let sol = rayleigh_solve(c(0.0, 0.0), 0.0, &flow, &g, &one, 1e-5, &cfg).unwrap();
    for (i, &x) in g.nodes.iter().enumerate() {
        if x.abs() > 0.05 {
            let exact = couette_embedded_closed_form(0.0, x);
            assert!((sol.phi_limit[i] - exact).norm() < 1e-5, "x={x}");
        }
    }
    let sched = rayleigh_embedded(0.0, 0.0, &flow, &g, &one, &KAPPA_SCHEDULE, &cfg).unwrap();
    assert!(sched.stabilized, "{:?}", sched.increments);
}

#[test]
fn embedded_limit_differs_from_the_closed_form_by_a_kernel_element() {
    // For ν ≠ 0 the kernel φ_ν (piecewise linear, kink at ν) makes the
    // solution non-unique; the regularization selects one representative.
    let g = build_grid(64).unwrap();
    let flow = make_flow(&FlowKind::Couette, &g).unwrap();
    let nu = 0.3;
    let one = Forcing::constant(c(1.0, 0.0));
    let sol = rayleigh_embedded(nu, 0.0, &flow, &g, &one, &[1e-3, 1e-4, 1e-5], &RayleighConfig::default()).unwrap();
    let kernel = |x: f64| if x >= nu { (x - nu) / (1.0 - nu) - 1.0 } else { -(x - nu) / (1.0 + nu) - 1.0 };
    let ratios: Vec<f64> = g
        .nodes
        .iter()
        .enumerate()
        .filter(|(_, &x)| (x - nu).abs() > 0.05 && x.abs() < 0.95)
        .map(|(i, &x)| (sol.solution.phi_limit[i].re - couette_embedded_closed_form(nu, x)) / kernel(x))
        .collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(*r), b.max(*r)));
    assert!(hi - lo < 1e-5, "{lo} {hi}");
}

#[test]
fn regularization_is_inactive_off_the_imaginary_axis() {
    let g = build_grid(48).unwrap();
    let cfg = RayleighConfig::default();
    for kind in [FlowKind::Couette, FlowKind::Convex(0.5), FlowKind::NearlyCouette(0.05)] {
        let flow = make_flow(&kind, &g).unwrap();
        let v: Vec<C64> = g.nodes.iter().map(|&x| c(x.exp(), 1.0 - x)).collect();
        let f = Forcing::nodal(&g, v.clone());
        let lam = c(1.0, 0.2);
        let a = rayleigh_solve(lam, 1.5, &flow, &g, &f, 0.0, &cfg).unwrap();
        let b = rayleigh_solve(lam, 1.5, &flow, &g, &f, 1e-3, &cfg).unwrap();
        assert_eq!(a.phi, b.phi);
        // Independent path: dense collocation solve.
        let col = rayleigh_collocation_solve(lam, 1.5, &flow, &g, &v).unwrap();
        let err = a.phi.iter().zip(&col).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(err < 1e-9, "{kind}: {err:e}");
    }
}

#[test]
fn embedded_solutions_are_uniformly_bounded_in_h1() {
    let g = build_grid(48).unwrap();
    let flow = make_flow(&FlowKind::Couette, &g).unwrap();
    let f = Forcing::new(|x: f64| c(1.0 + x * x, (3.0 * x).sin()), Vec::new());
    let vnorm = f.lp_norm(2.0);
    let mut norms = Vec::new();
    for nu in [-0.5, 0.0, 0.5] {
        for alpha in [0.0, 1.0, 4.0] {
            let s = rayleigh_embedded(nu, alpha, &flow, &g, &f, &KAPPA_SCHEDULE, &RayleighConfig::default()).unwrap();
            norms.push(s.solution.h1_norm / vnorm);
        }
    }
    let max = norms.iter().cloned().fold(0.0, f64::max);
    assert!(max.is_finite() && max < 10.0, "{norms:?}");
    assert!(norms.iter().all(|n| *n > 0.0));
}

#[test]
fn gamma_m_values() {
    let g = build_grid(96).unwrap();
    let couette = make_flow(&FlowKind::Couette, &g).unwrap();
    let v = gamma_m(c(0.1, 0.3), &couette, &g).unwrap();
    assert!((v - PI * PI / 8.0).abs() < 1e-6, "{v}");
    assert!(gamma_m(c(0.0, 0.3), &couette, &g).is_err());

    let nearly = make_flow(&FlowKind::NearlyCouette(0.05), &g).unwrap();
    let convex = make_flow(&FlowKind::Convex(0.5), &g).unwrap();
    let mut inf_nearly = f64::INFINITY;
    let mut inf_convex = f64::INFINITY;
    for mu in [0.5, 0.1, 0.05] {
        for k in 0..9 {
            let nu = -0.8 + 0.2 * k as f64;
            inf_nearly = inf_nearly.min(gamma_m(c(mu, nu), &nearly, &g).unwrap());
            inf_convex = inf_convex.min(gamma_m(c(mu, nu), &convex, &g).unwrap());
        }
    }
    assert!(inf_nearly > 0.5, "{inf_nearly}");
    assert!(inf_convex.is_finite());
}

#[test]
fn spectrum_of_constrained_schrodinger_is_finite() {
    let g = build_grid(64).unwrap();
    let flow = make_flow(&FlowKind::Couette, &g).unwrap();
    let p = schrodinger_constrained_pencil(1e3, &flow, &g, 1e3f64.cbrt()).unwrap();
    let ev = eigenvalues(&p.reduce(&g).unwrap().standard_form().unwrap()).unwrap();
    assert!(ev.iter().all(|z| z.re.is_finite() && z.re > 0.0));
}
