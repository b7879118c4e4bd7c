//! Adaptive Dormand–Prince 5(4) integration of complex linear systems.
//!
//! Used for the Rayleigh two-point problems, whose coefficients develop
//! layers of width `|Re λ|` or `κ` around the critical point; a fixed
//! collocation grid cannot follow those, an adaptive integrator can.

use crate::error::{Error, Result};
use num_complex::Complex64 as C64;

/// Tolerances and step limits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeConfig {
    pub rtol: f64,
    pub atol: f64,
    /// Steps below this length abort the integration.
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for OdeConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-13,
            min_step: 1e-12,
            max_steps: 2_000_000,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Differences between the 5th- and 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrator state carried across consecutive segments so that the step
/// size adapted on one segment seeds the next.
pub struct Dopri<F> {
    rhs: F,
    cfg: OdeConfig,
    h: f64,
    pub steps: usize,
    pub rejected: usize,
}

impl<F> Dopri<F>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    pub fn new(rhs: F, cfg: OdeConfig) -> Self {
        Self {
            rhs,
            cfg,
            h: 0.0,
            steps: 0,
            rejected: 0,
        }
    }

    /// Advances `y` from `a` to `b` (either direction).
    pub fn integrate(&mut self, a: f64, b: f64, y: &mut [C64]) -> Result<()> {
        if a == b {
            return Ok(());
        }
        let dir = (b - a).signum();
        let len = (b - a).abs();
        let n = y.len();
        let mut k = vec![vec![C64::new(0.0, 0.0); n]; 7];
        let mut tmp = vec![C64::new(0.0, 0.0); n];
        let mut ynew = vec![C64::new(0.0, 0.0); n];
        let mut h = if self.h > 0.0 { self.h.min(len) } else { (len * 1e-2).max(self.cfg.min_step) };
        let mut t = a;
        (self.rhs)(t, y, &mut k[0]);
        loop {
            let remaining = (b - t) * dir;
            if remaining <= 0.0 {
                break;
            }
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            let hs = h * dir;
            let stage = |tmp: &mut [C64], y: &[C64], k: &[Vec<C64>], coeffs: &[f64]| {
                for i in 0..n {
                    let mut s = y[i];
                    for (j, c) in coeffs.iter().enumerate() {
                        if *c != 0.0 {
                            s += k[j][i] * (hs * c);
                        }
                    }
                    tmp[i] = s;
                }
            };
            stage(&mut tmp, y, &k, &[A21]);
            (self.rhs)(t + C2 * hs, &tmp, &mut k[1]);
            stage(&mut tmp, y, &k, &[A31, A32]);
            (self.rhs)(t + C3 * hs, &tmp, &mut k[2]);
            stage(&mut tmp, y, &k, &[A41, A42, A43]);
            (self.rhs)(t + C4 * hs, &tmp, &mut k[3]);
            stage(&mut tmp, y, &k, &[A51, A52, A53, A54]);
            (self.rhs)(t + C5 * hs, &tmp, &mut k[4]);
            stage(&mut tmp, y, &k, &[A61, A62, A63, A64, A65]);
            (self.rhs)(t + hs, &tmp, &mut k[5]);
            stage(&mut ynew, y, &k, &[B1, 0.0, B3, B4, B5, B6]);
            (self.rhs)(t + hs, &ynew, &mut k[6]);
            let mut err = 0.0f64;
            for i in 0..n {
                let e = (k[0][i] * E1 + k[2][i] * E3 + k[3][i] * E4 + k[4][i] * E5 + k[5][i] * E6
                    + k[6][i] * E7)
                    * hs;
                let sc = self.cfg.atol + self.cfg.rtol * y[i].norm().max(ynew[i].norm());
                err = err.max(e.norm() / sc);
            }
            if !err.is_finite() {
                return Err(Error::NonFinite);
            }
            self.steps += 1;
            if self.steps > self.cfg.max_steps {
                return Err(Error::UnderResolved(format!(
                    "integrator exceeded {} steps",
                    self.cfg.max_steps
                )));
            }
            if err <= 1.0 {
                t = if last { b } else { t + hs };
                y.copy_from_slice(&ynew);
                let (first, rest) = k.split_at_mut(6);
                first[0].copy_from_slice(&rest[0]);
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                let hnext = h * fac;
                if !last {
                    h = hnext;
                }
                self.h = hnext.max(h);
                if last {
                    break;
                }
            } else {
                self.rejected += 1;
                h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                if h < self.cfg.min_step {
                    return Err(Error::UnderResolved(format!(
                        "step size {h:e} below minimum near t = {t}"
                    )));
                }
            }
        }
        Ok(())
    }
}
