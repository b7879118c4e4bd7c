//! Gauss–Legendre rules and composite panel quadrature for complex-valued
//! integrands.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Nodes and weights of the `m`-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if m == 1 {
                p1 = z;
                p0 = 1.0;
            }
            dp = m as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[m - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[m - 1 - i] = wi;
    }
    (x, w)
}

/// Cached 20-point rule used by the panel integrators.
pub fn gl20() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(20))
}

/// Cached 8-point rule used for short marching steps.
pub fn gl8() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(8))
}

/// Integrates `f(t)` along the straight segment `a -> b` with a fixed rule.
pub fn segment(rule: &(Vec<f64>, Vec<f64>), a: C64, b: C64, f: &mut impl FnMut(C64) -> C64) -> C64 {
    let half = (b - a) * 0.5;
    let mid = (a + b) * 0.5;
    let mut s = C64::new(0.0, 0.0);
    for (x, w) in rule.0.iter().zip(&rule.1) {
        s += f(mid + half * *x) * *w;
    }
    s * half
}

/// Composite Gauss–Legendre on the real interval `[a, b]` with panels of
/// width at most `h`.
pub fn composite_real(a: f64, b: f64, h: f64, mut f: impl FnMut(f64) -> C64) -> C64 {
    if b <= a {
        return C64::new(0.0, 0.0);
    }
    let panels = ((b - a) / h).ceil().max(1.0) as usize;
    let step = (b - a) / panels as f64;
    let rule = gl20();
    let mut s = C64::new(0.0, 0.0);
    for p in 0..panels {
        let lo = a + p as f64 * step;
        let mid = lo + 0.5 * step;
        for (x, w) in rule.0.iter().zip(&rule.1) {
            s += f(mid + 0.5 * step * x) * (0.5 * step * w);
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn composite_handles_oscillation() {
        let v = composite_real(0.0, 10.0, 1.0, |t| C64::new(0.0, 3.0 * t).exp());
        let exact = (C64::new(0.0, 30.0).exp() - 1.0) / C64::new(0.0, 3.0);
        assert!((v - exact).norm() < 1e-13);
    }
}
