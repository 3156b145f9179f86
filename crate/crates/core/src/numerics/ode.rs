//! Adaptive explicit Runge-Kutta integration (Dormand-Prince 5(4)).
//!
//! One embedded solver serves every ODE in the crate: the mean-field
//! pendulum, the classical amplitude equations and the per-sector
//! Schrödinger systems (complex states flattened to real component pairs).

use crate::error::{Error, Result};
use crate::scalar::Real;

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
// 5th-order weights equal the last row of A (FSAL); error weights are the
// difference between the 5th- and 4th-order solutions.
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

const MAX_STEPS_PER_CALL: usize = 50_000_000;

/// Embedded Dormand-Prince stepper with PI-free step control.
///
/// The state vector is owned by the stepper; callers advance it to
/// successive target times and read `y` between calls.
pub struct AdaptiveOde<T, F> {
    rhs: F,
    pub t: T,
    pub y: Vec<T>,
    h: T,
    rtol: T,
    atol: T,
    k: Vec<Vec<T>>,
    ytmp: Vec<T>,
    ynew: Vec<T>,
    first: bool,
    pub steps: usize,
    pub rejected: usize,
}

impl<T, F> AdaptiveOde<T, F>
where
    T: Real,
    F: FnMut(T, &[T], &mut [T]),
{
    pub fn new(rhs: F, t0: T, y0: Vec<T>, rtol: T, atol: T) -> Self {
        let n = y0.len();
        Self {
            rhs,
            t: t0,
            y: y0,
            h: T::zero(),
            rtol,
            atol,
            k: (0..7).map(|_| vec![T::zero(); n]).collect(),
            ytmp: vec![T::zero(); n],
            ynew: vec![T::zero(); n],
            first: true,
            steps: 0,
            rejected: 0,
        }
    }

    fn initial_step(&mut self, span: T) -> T {
        // Conservative guess from the first derivative magnitude.
        let d0 = norm_scaled(&self.y, &self.y, self.atol, self.rtol);
        let d1 = norm_scaled(&self.k[0], &self.y, self.atol, self.rtol);
        let h0 = if d1 > T::of(1e-10) {
            T::of(0.01) * d0.max(T::of(1e-4)) / d1
        } else {
            T::of(1e-6)
        };
        h0.min(span).max(span * T::of(1e-12))
    }

    /// Advance the state to `t_end` (monotonically away from `t`).
    pub fn advance_to(&mut self, t_end: T) -> Result<()> {
        let span = t_end - self.t;
        if span == T::zero() {
            return Ok(());
        }
        let dir = if span > T::zero() { T::one() } else { -T::one() };
        let n = self.y.len();

        if self.first {
            let (t, y) = (self.t, &self.y);
            (self.rhs)(t, y, &mut self.k[0]);
            self.h = self.initial_step(span.abs()) * dir;
            self.first = false;
        } else if self.h * dir <= T::zero() {
            self.h = -self.h;
        }

        let mut guard = 0usize;
        while (t_end - self.t) * dir > T::zero() {
            guard += 1;
            if guard > MAX_STEPS_PER_CALL {
                return Err(Error::Integration(format!(
                    "step limit exceeded at t={}",
                    self.t.as_f64()
                )));
            }
            let remaining = t_end - self.t;
            if self.h.abs() > remaining.abs() {
                self.h = remaining;
            }
            let h = self.h;
            if h.abs() < self.t.abs().max(T::one()) * T::epsilon() * T::of(4.0) {
                return Err(Error::Integration(format!(
                    "step size underflow at t={}",
                    self.t.as_f64()
                )));
            }

            // Stages 2..7; stage 1 (k[0]) carries over via FSAL.
            for s in 0..6 {
                for i in 0..n {
                    let mut acc = T::zero();
                    for (j, kj) in self.k.iter().enumerate().take(s + 1) {
                        let a = T::of(A[s][j]);
                        if a != T::zero() {
                            acc = acc + a * kj[i];
                        }
                    }
                    self.ytmp[i] = self.y[i] + h * acc;
                }
                let ts = self.t + T::of(C[s]) * h;
                if s < 5 {
                    let (rhs, k) = (&mut self.rhs, &mut self.k[s + 1]);
                    rhs(ts, &self.ytmp, k);
                } else {
                    // 6th combination is the 5th-order solution itself.
                    self.ynew.copy_from_slice(&self.ytmp);
                    let (rhs, k) = (&mut self.rhs, &mut self.k[6]);
                    rhs(ts, &self.ynew, k);
                }
            }

            // Error estimate.
            let mut err_sq = T::zero();
            for i in 0..n {
                let mut e = T::zero();
                for (j, kj) in self.k.iter().enumerate() {
                    let w = T::of(E[j]);
                    if w != T::zero() {
                        e = e + w * kj[i];
                    }
                }
                e = e * h;
                let scale = self.atol + self.rtol * self.y[i].abs().max(self.ynew[i].abs());
                let r = e / scale;
                err_sq = err_sq + r * r;
            }
            let err = (err_sq / T::of(n as f64)).sqrt();

            if err <= T::one() {
                self.t = self.t + h;
                std::mem::swap(&mut self.y, &mut self.ynew);
                // FSAL: derivative at the accepted point is k7.
                self.k.swap(0, 6);
                self.steps += 1;
            } else {
                self.rejected += 1;
            }

            let fac = if err > T::zero() {
                T::of(0.9) * err.powf(T::of(-0.2))
            } else {
                T::of(5.0)
            };
            self.h = h * fac.max(T::of(0.2)).min(T::of(5.0));
        }
        Ok(())
    }
}

fn norm_scaled<T: Real>(v: &[T], yref: &[T], atol: T, rtol: T) -> T {
    let mut s = T::zero();
    for (x, y) in v.iter().zip(yref) {
        let scale = atol + rtol * y.abs();
        let r = *x / scale;
        s = s + r * r;
    }
    (s / T::of(v.len().max(1) as f64)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponential_decay() {
        let mut ode = AdaptiveOde::new(
            |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = -y[0],
            0.0,
            vec![1.0],
            1e-10,
            1e-12,
        );
        ode.advance_to(3.0).unwrap();
        assert_relative_eq!(ode.y[0], (-3.0f64).exp(), max_relative = 1e-8);
    }

    #[test]
    fn harmonic_oscillator_energy() {
        let mut ode = AdaptiveOde::new(
            |_t: f64, y: &[f64], dy: &mut [f64]| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            0.0,
            vec![1.0, 0.0],
            1e-11,
            1e-13,
        );
        for i in 1..=100 {
            ode.advance_to(0.5 * i as f64).unwrap();
            let e = ode.y[0] * ode.y[0] + ode.y[1] * ode.y[1];
            assert_relative_eq!(e, 1.0, max_relative = 1e-8);
        }
        assert_relative_eq!(ode.y[0], (50.0f64).cos(), max_relative = 1e-6);
    }

    #[test]
    fn backwards_integration() {
        let mut ode = AdaptiveOde::new(
            |t: f64, _y: &[f64], dy: &mut [f64]| dy[0] = 2.0 * t,
            1.0,
            vec![1.0],
            1e-10,
            1e-12,
        );
        ode.advance_to(-1.0).unwrap();
        assert_relative_eq!(ode.y[0], 1.0, max_relative = 1e-8);
    }
}
