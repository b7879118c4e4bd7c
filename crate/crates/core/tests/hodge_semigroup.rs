use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shearlab::flow::{custom_flow, make_flow, orr_sommerfeld_pencil, os_spectrum, WallBc};
use shearlab::hodge::*;
use shearlab::{build_grid, Error, SpectralGrid};
use std::f64::consts::PI;

const L: f64 = 6.0;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Random low-degree polynomial in `x₂`, sampled at the nodes.
fn random_poly(grid: &SpectralGrid, rng: &mut ChaCha8Rng, degree: usize) -> Vec<C64> {
    let coef: Vec<C64> = (0..=degree)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    grid.nodes
        .iter()
        .map(|x| coef.iter().rev().fold(C64::new(0.0, 0.0), |acc, a| acc * x + a))
        .collect()
}

/// Real random field with modes `−3..=3`.
fn random_field(grid: &SpectralGrid, rng: &mut ChaCha8Rng) -> PeriodicField {
    let mut f = PeriodicField::zero(L);
    for n in 0..=3i64 {
        let mut u1 = random_poly(grid, rng, 8);
        let mut u2 = random_poly(grid, rng, 8);
        if n == 0 {
            u1.iter_mut().for_each(|z| z.im = 0.0);
            u2.iter_mut().for_each(|z| z.im = 0.0);
        } else {
            let conj = |v: &[C64]| v.iter().map(|z| z.conj()).collect::<Vec<_>>();
            f = f.with_mode(-n, conj(&u1), conj(&u2));
        }
        f = f.with_mode(n, u1, u2);
    }
    f
}

/// `∇⊥ψ` for a stream function given per mode (vanishing at the walls).
fn perp_grad(grid: &SpectralGrid, psi: &[(i64, Vec<C64>)]) -> PeriodicField {
    let d = grid.d(1);
    let mut f = PeriodicField::zero(L);
    for (n, p) in psi {
        let a = f.alpha(*n);
        let u2 = p.iter().map(|z| C64::new(0.0, -a) * z).collect();
        f = f.with_mode(*n, d.apply_c(p), u2);
    }
    f
}

fn bubble(grid: &SpectralGrid, rng: &mut ChaCha8Rng) -> Vec<C64> {
    let p = random_poly(grid, rng, 8);
    grid.nodes.iter().zip(p).map(|(x, z)| z * (1.0 - x * x)).collect()
}

#[test]
fn pi_keeps_only_the_mean_mode() {
    let grid = build_grid(32).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let u = random_field(&grid, &mut rng);
    let only_one = PeriodicField::zero(L)
        .with_mode(1, u.modes[&1].0.clone(), u.modes[&1].1.clone())
        .with_mode(-1, u.modes[&-1].0.clone(), u.modes[&-1].1.clone());
    assert_eq!(project_pi(&only_one).norm(&grid), 0.0);
    let once = project_pi(&u);
    assert!(project_pi(&once).sub(&once).norm(&grid) < 1e-14);

    // Divergence-free input: Πu = (𝔭u₁, 0).
    let psi: Vec<(i64, Vec<C64>)> = (-2..=2).map(|n| (n, bubble(&grid, &mut rng))).collect();
    let v = perp_grad(&grid, &psi);
    let pv = project_pi(&v);
    assert!(pv.modes[&0].1.iter().all(|z| z.norm() < 1e-14));
}

#[test]
fn p_annihilates_gradients_and_fixes_solenoidal_fields() {
    let grid = build_grid(32).unwrap();
    let n = grid.len();
    // ∇(x₂²) = (0, 2x₂) in mode 0.
    let grad = PeriodicField::zero(L).with_mode(0, vec![c(0.0); n], grid.nodes.iter().map(|x| c(2.0 * x)).collect());
    assert!(project_p(&grad, &grid).unwrap().norm(&grid) < 1e-12);

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let psi: Vec<(i64, Vec<C64>)> = (-3..=3).map(|n| (n, bubble(&grid, &mut rng))).collect();
    let v = perp_grad(&grid, &psi);
    let (div, wall) = v.divergence_defect(&grid);
    assert!(div < 1e-10 && wall < 1e-14);
    assert!(v.flux(&grid).norm() < 1e-12);
    let pv = project_p(&v, &grid).unwrap();
    assert!(pv.sub(&v).norm(&grid) < 1e-10 * v.norm(&grid));
}

#[test]
fn p_is_an_orthogonal_projection_on_random_fields() {
    let grid = build_grid(32).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let u = random_field(&grid, &mut rng);
        assert!(u.reality_defect() == 0.0);
        let pu = project_p(&u, &grid).unwrap();
        let rest = u.sub(&pu);
        let scale = u.norm(&grid).powi(2);
        assert!(pu.inner(&rest, &grid).norm() < 1e-10 * scale);
        let ppu = project_p(&pu, &grid).unwrap();
        assert!(ppu.sub(&pu).norm(&grid) < 1e-10 * u.norm(&grid));
        assert!(pu.reality_defect() < 1e-12);
    }
}

#[test]
fn projections_commute_on_random_fields() {
    let grid = build_grid(32).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..100 {
        let u = random_field(&grid, &mut rng);
        let a = project_pi(&project_p(&u, &grid).unwrap());
        let b = project_p(&project_pi(&u), &grid).unwrap();
        assert!(a.sub(&b).norm(&grid) < 1e-10);
    }
}

#[test]
fn stream_function_matches_dirichlet_poisson_solve() {
    // Independent path: collocate −φ″ + α²φ = iαû₂ − Dû₁ with φ(±1) = 0.
    let grid = build_grid(32).unwrap();
    let n = grid.len();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let u = random_field(&grid, &mut rng);
    let pu = project_p(&u, &grid).unwrap();
    let d1 = grid.dc(1);
    let d2 = grid.dc(2);
    for (m, (u1, u2)) in &u.modes {
        let a = u.alpha(*m);
        let du1 = d1.mul_vec(u1);
        let mut mat = d2.scale(c(-1.0));
        mat.add_to_diag(c(a * a));
        let mut rhs: Vec<C64> = (0..n).map(|j| C64::new(0.0, a) * u2[j] - du1[j]).collect();
        for row in [0, n - 1] {
            for k in 0..n {
                mat[(row, k)] = c(if k == row { 1.0 } else { 0.0 });
            }
            rhs[row] = c(0.0);
        }
        let phi = shearlab::dense::solve_linear(&mat, &rhs).unwrap();
        let oracle = d1.mul_vec(&phi);
        for (x, y) in oracle.iter().zip(&pu.modes[m].0) {
            assert!((x - y).norm() < 1e-9, "mode {m}");
        }
    }
}

#[test]
fn hodge_decomposition_examples() {
    let grid = build_grid(32).unwrap();
    let n = grid.len();
    let unit = PeriodicField::zero(L).with_mode(0, vec![c(1.0); n], vec![c(0.0); n]);
    let h = hodge_decompose(&unit, &grid).unwrap();
    assert!((h.constant - c(1.0)).norm() < 1e-14);
    assert!(h.curl_part.norm(&grid) < 1e-12 && h.div_part.norm(&grid) < 1e-12);

    // ∇⊥(sin(2πx₁/L)(1 − x₂²)).
    let bump: Vec<C64> = grid.nodes.iter().map(|x| c(1.0 - x * x)).collect();
    let half_i = C64::new(0.0, -0.5);
    let psi = vec![
        (1, bump.iter().map(|z| z * half_i).collect()),
        (-1, bump.iter().map(|z| z * half_i.conj()).collect()),
    ];
    let v = perp_grad(&grid, &psi);
    let h = hodge_decompose(&v, &grid).unwrap();
    assert!(h.curl_part.norm(&grid) < 1e-10);
    assert!(h.constant.norm() < 1e-14);

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..10 {
        let u = random_field(&grid, &mut rng);
        let h = hodge_decompose(&u, &grid).unwrap();
        let scale = u.norm(&grid);
        assert!(h.reconstruct(&grid).sub(&u).norm(&grid) < 1e-10 * scale);
        let k = h.constant_field(&grid);
        let parts = [&h.curl_part, &h.div_part, &k];
        for i in 0..3 {
            for j in i + 1..3 {
                assert!(parts[i].inner(parts[j], &grid).norm() < 1e-10 * scale * scale);
            }
        }
        assert!((h.constant * 2.0 * L - u.inner(&unit, &grid)).norm() < 1e-12 * scale);
    }
}

#[test]
fn pressure_recovery() {
    let grid = build_grid(32).unwrap();
    let n = grid.len();
    // ∇(x₂³) → x₂³ (already mean free).
    let g = PeriodicField::zero(L).with_mode(0, vec![c(0.0); n], grid.nodes.iter().map(|x| c(3.0 * x * x)).collect());
    let q = recover_pressure(&g, &grid).unwrap();
    for (x, z) in grid.nodes.iter().zip(&q.modes[&0]) {
        assert!((z - c(x.powi(3))).norm() < 1e-12);
    }
    // Constant (c, 0): purely affine.
    let k = C64::new(0.7, -0.2);
    let g = PeriodicField::zero(L).with_mode(0, vec![k; n], vec![c(0.0); n]);
    let q = recover_pressure(&g, &grid).unwrap();
    assert!((q.affine - k).norm() < 1e-14);
    assert!(q.modes[&0].iter().all(|z| z.norm() < 1e-12));

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let mut p = PressureField {
            length: L,
            affine: c(rng.gen_range(-1.0..1.0)),
            modes: Default::default(),
        };
        for m in -3..=3i64 {
            let mut v = random_poly(&grid, &mut rng, 8);
            if m == 0 {
                let mean = grid.integrate_c(&v) * 0.5;
                v.iter_mut().for_each(|z| *z -= mean);
            }
            p.modes.insert(m, v);
        }
        let g = p.gradient(&grid);
        let q = recover_pressure(&g, &grid).unwrap();
        assert!(q.gradient(&grid).sub(&g).norm(&grid) < 1e-9 * g.norm(&grid));
    }

    let psi = vec![(1, grid.nodes.iter().map(|x| c(1.0 - x * x)).collect())];
    let solenoidal = perp_grad(&grid, &psi);
    assert!(matches!(recover_pressure(&solenoidal, &grid), Err(Error::Precondition(_))));
}

#[test]
fn mode_generator_matches_pencil_spectrum() {
    let grid = build_grid(64).unwrap();
    let flow = make_flow(&"couette".parse().unwrap(), &grid).unwrap();
    for bc in [WallBc::S, WallBc::D] {
        let gen = mode_generator(1, 1e-2, L, &flow, bc, &grid).unwrap();
        assert!((gen.alpha - 2.0 * PI / L).abs() < 1e-15);
        assert!((gen.beta - gen.alpha / 1e-2).abs() < 1e-9);
        let p = orr_sommerfeld_pencil(gen.alpha, gen.beta, &flow, bc, &grid).unwrap();
        let os = os_spectrum(&p, &grid).unwrap();
        let mine: Vec<C64> = gen.eigenvalues().unwrap().iter().map(|z| -z / gen.epsilon).collect();
        for e in &os[..12] {
            let d = mine
                .iter()
                .map(|m| (m - e.lambda_hat).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(d < 1e-8 * e.lambda_hat.norm(), "{bc}: {:?}", e.lambda_hat);
        }
    }
}

#[test]
fn stokes_modes_and_alpha_scaling() {
    let grid = build_grid(32).unwrap();
    let zero = custom_flow(&vec![0.0; grid.len()], &grid).unwrap();
    let gen = mode_generator(2, 1e-2, L, &zero, WallBc::D, &grid).unwrap();
    for z in gen.eigenvalues().unwrap() {
        assert!(-z.re > 0.0 && z.im.abs() < 1e-8 * z.norm());
    }
    let flow = make_flow(&"nearly:0.05".parse().unwrap(), &grid).unwrap();
    let a = mode_generator(1, 1e-2, L, &flow, WallBc::S, &grid).unwrap();
    let b = mode_generator(2, 1e-2, 2.0 * L, &flow, WallBc::S, &grid).unwrap();
    assert_eq!(a.g, b.g);
    assert!(mode_generator(0, 1e-2, L, &flow, WallBc::S, &grid).is_err());
    assert!(mode_generator(1, 0.0, L, &flow, WallBc::S, &grid).is_err());
}

#[test]
fn semigroup_respects_energy_bound_and_decays() {
    let grid = build_grid(64).unwrap();
    let times = geometric_times(1e-2, 400.0, 30);
    for flow in ["couette", "nearly:0.05", "convex:0.5"] {
        let f = make_flow(&flow.parse().unwrap(), &grid).unwrap();
        for bc in [WallBc::S, WallBc::D] {
            let gen = mode_generator(1, 1e-3, L, &f, bc, &grid).unwrap();
            assert_eq!(semigroup_norm_curve(&gen, &[0.0]).unwrap(), vec![1.0]);
            let curve = semigroup_norm_curve(&gen, &times).unwrap();
            for (t, v) in times.iter().zip(&curve) {
                assert!(*v <= (0.5 * f.sup_du * t).exp() + 1e-8, "{flow} {bc} t={t}");
            }
        }
    }
    // Asymptotic decay follows the slowest eigenvalue.
    let f = make_flow(&"couette".parse().unwrap(), &grid).unwrap();
    let gen = mode_generator(1, 1e-3, L, &f, WallBc::D, &grid).unwrap();
    let abscissa = gen.eigenvalues().unwrap().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    assert!(abscissa < 0.0);
    let (t0, t1) = (150.0, 250.0);
    let v = semigroup_norm_curve(&gen, &[t0, t1]).unwrap();
    let slope = (v[1].ln() - v[0].ln()) / (t1 - t0);
    assert!((slope / abscissa - 1.0).abs() < 0.05, "{slope} vs {abscissa}");
    let beta1 = 2.0 * PI / (L * 1e-3);
    assert!(-slope > 0.1 * 1e-3 * beta1.powf(2.0 / 3.0));
}

#[test]
fn mean_mode_heat_rate() {
    let q = PI * PI / 4.0;
    for bc in [WallBc::S, WallBc::D] {
        let r = pi_decay_rate(1e-3, bc).unwrap();
        assert!((r / (1e-3 * q) - 1.0).abs() < 1e-8);
        let r2 = pi_decay_rate(2e-3, bc).unwrap();
        assert!((r2 - 2.0 * r).abs() < 1e-14);
    }
}

#[test]
fn gearhart_pruss_formula() {
    let inf = gearhart_pruss_bound(1.0, -0.5, 0.2, f64::INFINITY).unwrap();
    assert_eq!(inf.coefficient, 1.0);
    assert!((inf.eval(3.0) - (-0.6f64).exp()).abs() < 1e-15);
    let (om_hat, om, r) = (-0.5, 0.2, 0.01);
    let c1 = gearhart_pruss_bound(1.5, om_hat, om, r).unwrap().coefficient;
    let c2 = gearhart_pruss_bound(3.0, om_hat, om, r).unwrap().coefficient;
    // coefficient = M̂ + 2M̂²(ω − ω̂)/r: the quadratic part scales by 4.
    let quad = |m: f64, cm: f64| cm - m;
    assert!((quad(3.0, c2) / quad(1.5, c1) - 4.0).abs() < 1e-12);
    assert!(gearhart_pruss_bound(0.5, om_hat, om, r).is_err());
    assert!(gearhart_pruss_bound(1.0, 0.3, 0.2, r).is_err());
    assert!(gearhart_pruss_bound(1.0, om_hat, om, 0.0).is_err());
}

#[test]
fn gearhart_pruss_envelope_dominates() {
    let grid = build_grid(64).unwrap();
    let f = make_flow(&"couette".parse().unwrap(), &grid).unwrap();
    let eps = 1e-3;
    let beta1 = 2.0 * PI / (L * eps);
    let omega = eps * 0.3 * beta1.powf(2.0 / 3.0);
    let gen = mode_generator(1, eps, L, &f, WallBc::D, &grid).unwrap();
    let sup = line_resolvent_sup(&gen, omega).unwrap();
    let env = gearhart_pruss_bound(1.0, -0.5 * f.sup_du, omega, 1.0 / sup).unwrap();
    let scale = eps * beta1.powf(2.0 / 3.0);
    let times = geometric_times(1e-2 / scale, 20.0 / scale, 25);
    for (t, v) in times.iter().zip(semigroup_norm_curve(&gen, &times).unwrap()) {
        assert!(v <= env.eval(*t), "t={t}");
    }
}

#[test]
fn theorem_rates_for_couette() {
    let grid = build_grid(64).unwrap();
    let f = make_flow(&"couette".parse().unwrap(), &grid).unwrap();
    let nu1 = shearlab::airy::constants().unwrap().nu1.re;
    let mu = shearlab::constrained::hat_mu_m().unwrap().value;
    let cfg = RateCheckConfig::default();
    let s = theorem_rate_check(&f, 1e-3, L, WallBc::S, 0.5 * nu1, &grid, cfg).unwrap();
    assert!(s.pass, "{s:?}");
    assert_eq!(s.curves.len(), 4);
    let d = theorem_rate_check(&f, 1e-3, L, WallBc::D, 0.5 * mu, &grid, cfg).unwrap();
    assert!(d.pass, "{d:?}");
    let too_fast = theorem_rate_check(&f, 1e-3, L, WallBc::S, 5.0 * nu1, &grid, cfg).unwrap();
    assert!(!too_fast.pass);

    let p = make_flow(&"poiseuille".parse().unwrap(), &grid).unwrap();
    let err = theorem_rate_check(&p, 1e-3, L, WallBc::S, 0.5, &grid, cfg).unwrap_err();
    assert!(matches!(err, Error::HypothesisMismatch(_)));
}
