//! Reference values computed independently at 25 significant digits with an
//! arbitrary-precision library and frozen here.
use num_complex::Complex64 as C64;
use shearlab::airy::*;
use std::f64::consts::{FRAC_PI_3, FRAC_PI_6, PI};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm()
}

const AI_TABLE: [(C64, C64, C64); 8] = [
    (
        C64::new(1.0, 2.0),
        C64::new(-0.2193862549814275574, -0.1753859114081094179),
        C64::new(0.1704449781789148226, 0.3876224394132950903),
    ),
    (
        C64::new(-3.0, 1.0),
        C64::new(-1.066127653802196629, 0.6039936031973191734),
        C64::new(1.336508232347138885, 1.617107065474097305),
    ),
    (
        C64::new(5.0, -4.0),
        C64::new(-0.0005732717859355428438, 0.00005859252194509030949),
        C64::new(0.001338638661974176598, -0.0006087023318882433012),
    ),
    (
        C64::new(8.5, 0.5),
        C64::new(1.10452347118685858849e-9, -1.117623158380527407e-8),
        C64::new(-4.192989460435299813e-9, 3.282509553732995118e-8),
    ),
    (
        C64::new(-9.5, 2.0),
        C64::new(71.17601027072356985, -29.20010009112946243),
        C64::new(-111.5086169624745828, -211.5535097234701888),
    ),
    (
        C64::new(0.0, 9.5),
        C64::new(-8921.779561522506111, -158860.5587545762992),
        C64::new(-322536.8353448155370, 365502.7364168077917),
    ),
    (
        C64::new(6.0, 6.0),
        C64::new(-0.0002884948080981229470, -0.00008659374575500713238),
        C64::new(0.0006876971589113435510, 0.0005506507600563054799),
    ),
    (
        C64::new(-12.0, 0.3),
        C64::new(-0.1050798421334732934, 0.3656099228191352590),
        C64::new(1.631290361176864484, 0.2743313142742773756),
    ),
];

#[test]
fn ai_matches_reference_table() {
    for (z, ai, aip) in AI_TABLE {
        let (v, d) = airy_pair(z);
        assert!(rel(v, ai) < 1e-10, "Ai({z}) = {v}, want {ai}, rel {}", rel(v, ai));
        assert!(rel(d, aip) < 1e-10, "Ai'({z}) = {d}, want {aip}, rel {}", rel(d, aip));
    }
}

#[test]
fn ai_at_origin() {
    let want = 1.0 / (3f64.powf(2.0 / 3.0) * 1.354_117_939_426_400_4); // Γ(2/3)
    assert!((airy_ai(c(0.0, 0.0)).re - want).abs() < 1e-15);
    assert!((airy_ai(c(0.0, 0.0)).re - 0.3550280538878172392600632).abs() < 1e-16);
}

#[test]
fn overlap_annulus_agreement() {
    let mut worst: f64 = 0.0;
    for ir in 0..=8 {
        let r = 8.0 + 0.25 * ir as f64;
        for ia in 0..72 {
            let z = C64::from_polar(r, -PI + 2.0 * PI * (ia as f64 + 0.5) / 72.0);
            let (a, ap) = airy_inner(z);
            let (b, bp) = airy_asymptotic(z);
            worst = worst.max(rel(a, b)).max(rel(ap, bp));
        }
    }
    assert!(worst < 1e-9, "worst overlap mismatch {worst:e}");
}

#[test]
fn airy_equation_residual() {
    // Ai'' from a centred difference of Ai' must equal z Ai.
    let mut state: u64 = 12345;
    let mut next = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    for _ in 0..200 {
        let z = c(-14.0 + 28.0 * next(), -14.0 + 28.0 * next());
        let h = 1e-3;
        let f = |t: C64| airy_ai_prime(t);
        let d2 = (-f(z + 2.0 * h) + f(z + h) * 8.0 - f(z - h) * 8.0 + f(z - 2.0 * h)) / (12.0 * h);
        let ai = airy_ai(z);
        let scale = (1.0 + z.norm()) * ai.norm() + airy_ai_prime(z).norm() * 1e-7;
        assert!((d2 - z * ai).norm() < 1e-8 * scale + 1e-12, "z = {z}");
    }
}

#[test]
fn real_zeros_match_reference() {
    let want = [
        -2.338107410459767038,
        -4.087949444130970617,
        -5.520559828095551059,
        -6.786708090071758999,
        -7.944133587120853123,
        -9.022650853340980380,
        -10.04017434155808593,
    ];
    let got = airy_real_zeros(7);
    for (g, w) in got.iter().zip(want) {
        assert!((g - w).abs() < 1e-12, "{g} vs {w}");
        assert!(airy_ai(c(*g, 0.0)).norm() < 1e-9);
    }
    assert!(got.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn a0_reference_values() {
    let table = [
        (c(0.0, 0.0), c(1.0 / 3.0, 0.0)),
        (c(1.0, 0.0), c(0.09444654189944953189, -0.07600868053653168439)),
        (c(0.0, 1.0), c(0.4514920042918882231, -0.4363845583690040610)),
        (c(2.0, -1.0), c(0.01364204700549919658, -0.003239320029539117192)),
        (c(-3.0, 2.0), c(0.88458335541495279549, 0.08043972408915258257)),
    ];
    for (z, want) in table {
        let v = a0(z);
        assert!(rel(v, want) < 1e-10, "A0({z}) = {v}, want {want}");
    }
    let z0 = c(1.062625795975665170175572, 4.128843002903202242444197);
    assert!(a0(c(0.0, 1.0) * z0).norm() < 1e-12);
}

#[test]
fn a0_large_argument_leading_term() {
    for z in [c(12.0, 0.0), c(15.0, 3.0), c(20.0, -2.0)] {
        let s = C64::from_polar(1.0, FRAC_PI_6) * z;
        let zeta = s.sqrt() * s * (2.0 / 3.0);
        let lead = (-zeta).exp() / (2.0 * PI.sqrt() * s.powf(0.75));
        let v = a0(z);
        assert!((v.norm() - lead.norm()).abs() <= 5.0 / z.norm() * lead.norm());
    }
}

#[test]
fn a0_derivative_matches_difference_quotient() {
    let z = c(0.7, 1.3);
    let h = 1e-5;
    let fd = (a0(z + h) - a0(z - h)) / (2.0 * h);
    assert!(rel(fd, a0_prime(z)) < 1e-8);
}

#[test]
fn laplace_transform_at_zero_theta() {
    let f = f_laplace(c(1.0, 0.0), 0.0).unwrap();
    let want = C64::from_polar(1.0, -FRAC_PI_6) * a0(c(0.0, 1.0));
    assert!(rel(f, want) < 1e-9);
    for k in 0..20 {
        let lam = C64::from_polar(0.3 + 0.35 * k as f64, -1.2 + 0.17 * k as f64);
        let f = f_laplace(lam, 0.0).unwrap();
        let want = C64::from_polar(1.0, -FRAC_PI_6) * a0(c(0.0, 1.0) * lam);
        assert!((f - want).norm() < 1e-8 * (1.0 + want.norm()), "lambda = {lam}");
    }
    assert!(f_laplace(c(1.0, 0.0), -1.0).is_err());
}

#[test]
fn laplace_transform_large_theta_limit() {
    let lam = c(1.0, 0.5);
    let target = airy_ai(C64::from_polar(1.0, 2.0 * FRAC_PI_3) * lam);
    let mut errs = Vec::new();
    for th in [10.0, 40.0, 160.0] {
        let v = f_laplace(lam, th).unwrap() * th;
        errs.push(((v - target).norm(), th));
    }
    for (e, th) in &errs {
        assert!(e * th.sqrt() < 2.0, "theta {th}: error {e}");
    }
    assert!(errs[2].0 < errs[0].0);
}

#[test]
fn psi_cap_substitution_and_pole_guard() {
    let lam = c(0.4, -0.3);
    let v = psi_cap(lam, 0.0).unwrap();
    let want = airy_ai(C64::from_polar(1.0, 2.0 * FRAC_PI_3) * lam) / a0(c(0.0, 1.0) * lam);
    assert!(rel(v, want) < 1e-12);
    let z0 = c(1.062625795975665170175572, 4.128843002903202242444197);
    assert!(matches!(psi_cap(z0, 0.0), Err(shearlab::Error::PoleProximity { .. })));
}

#[test]
fn psi_moment_scaling_between_samples() {
    let p0 = PsiProfile::new(c(0.0, 0.0)).unwrap();
    let n0 = p0.moment_l2(0);
    assert!(n0.is_finite() && n0 > 0.0);
    assert!(p0.moment_l2(4) < 1e3 * n0);
    let r = |l: C64| {
        let p = PsiProfile::new(l).unwrap();
        p.moment_l2(2) * (1.0 + l.norm_sqr()).sqrt().powf(0.75)
    };
    // Quadrature oracle values. The point 5e^{iπ/6} lies to the right of
    // θ₁ʳ, close to a zero of A₀(i·), so the two values differ by ~63x.
    let a = r(C64::from_polar(5.0, FRAC_PI_6));
    let b = r(c(2.0, 0.0));
    assert!((a / 359.53244050851788145 - 1.0).abs() < 1e-6, "{a}");
    assert!((b / 5.6937213242051414496 - 1.0).abs() < 1e-6, "{b}");
    assert!((r(c(0.0, 0.0)) / 1.0364824484140064378 - 1.0).abs() < 1e-6);
}
