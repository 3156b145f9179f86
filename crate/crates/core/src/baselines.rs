//! Comparison layers: classical amplitude dynamics and the linearized
//! (undepleted-pump) squeeze solution.
//!
//! The classical equations alpha1' = K alpha2 alpha1*, alpha2' = -(K/2)
//! alpha1^2 keep both amplitudes constant for a vacuum sub-harmonic input;
//! that solution is linearly unstable, which is why a seed parameter is
//! exposed. The linearized solution squeezes the sub-harmonic mode with
//! eta(t) = K alpha2 t and violates the Manley-Rowe relation at large times.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::fockspace::Observables;
use crate::numerics::AdaptiveOde;
use crate::scalar::{cre, Real};

/// c-number amplitudes of both modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalState<T: Real> {
    pub alpha1: Complex<T>,
    pub alpha2: Complex<T>,
    pub time: T,
}

impl<T: Real> ClassicalState<T> {
    /// Classical Manley-Rowe charge |alpha1|^2 + 2 |alpha2|^2.
    pub fn charge(&self) -> T {
        self.alpha1.norm_sqr() + T::of(2.0) * self.alpha2.norm_sqr()
    }
}

/// Integrate the classical amplitude equations over `t_grid`.
pub fn classical_evolve<T: Real>(
    alpha1_0: Complex<T>,
    alpha2_0: Complex<T>,
    k: T,
    t_grid: &[T],
) -> Result<Vec<ClassicalState<T>>> {
    for z in [alpha1_0, alpha2_0] {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::NonFinite("classical amplitude"));
        }
    }
    if t_grid.is_empty() {
        return Ok(Vec::new());
    }

    let half_k = T::of(0.5) * k;
    let rhs = move |_t: T, y: &[T], dy: &mut [T]| {
        let a1 = Complex::new(y[0], y[1]);
        let a2 = Complex::new(y[2], y[3]);
        let d1 = a2 * a1.conj() * k;
        let d2 = -(a1 * a1) * half_k;
        dy[0] = d1.re;
        dy[1] = d1.im;
        dy[2] = d2.re;
        dy[3] = d2.im;
    };
    let y0 = vec![alpha1_0.re, alpha1_0.im, alpha2_0.re, alpha2_0.im];
    let mut ode = AdaptiveOde::new(rhs, t_grid[0], y0, T::of(1e-12), T::of(1e-14));

    let charge0 = alpha1_0.norm_sqr() + T::of(2.0) * alpha2_0.norm_sqr();
    let scale = charge0.max(T::one());
    let mut out = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        ode.advance_to(t)?;
        let state = ClassicalState {
            alpha1: Complex::new(ode.y[0], ode.y[1]),
            alpha2: Complex::new(ode.y[2], ode.y[3]),
            time: t,
        };
        if !state.alpha1.norm_sqr().is_finite() || !state.alpha2.norm_sqr().is_finite() {
            return Err(Error::Integration(format!(
                "classical amplitudes diverged at t = {}",
                t.as_f64()
            )));
        }
        let drift = (state.charge() - charge0).abs() / scale;
        if drift > T::of(1e-9) {
            return Err(Error::Integration(format!(
                "classical Manley-Rowe drift {:.3e} at t = {}",
                drift.as_f64(),
                t.as_f64()
            )));
        }
        out.push(state);
    }
    Ok(out)
}

/// Observables record for a classical state; quadrature variances are set to
/// the vacuum value since the layer carries no fluctuations.
pub fn classical_observables<T: Real>(state: &ClassicalState<T>) -> Observables<T> {
    let quarter = T::of(0.25);
    let n1 = state.alpha1.norm_sqr();
    let n2 = state.alpha2.norm_sqr();
    Observables {
        n1,
        n2,
        a1: state.alpha1,
        a2: state.alpha2,
        a1_sq: state.alpha1 * state.alpha1,
        var_x1: quarter,
        var_p1: quarter,
        var_x2: quarter,
        var_p2: quarter,
        norm_sqr: T::one(),
        manley_rowe: n1 + T::of(2.0) * n2,
    }
}

/// Closed-form observables of the linearized solution at time `t`:
/// a pure squeezed vacuum with eta = K alpha2 t over an undepleted pump.
pub fn linearized_observables<T: Real>(t: T, alpha2_0: T, k: T) -> Observables<T> {
    let quarter = T::of(0.25);
    let eta = k * alpha2_0 * t;
    let sh = eta.sinh();
    let n1 = sh * sh;
    let n2 = alpha2_0 * alpha2_0;
    Observables {
        n1,
        n2,
        a1: Complex::new(T::zero(), T::zero()),
        a2: cre(alpha2_0),
        a1_sq: cre(T::of(0.5) * (T::of(2.0) * eta).sinh()),
        var_x1: quarter * (T::of(2.0) * eta).exp(),
        var_p1: quarter * (-T::of(2.0) * eta).exp(),
        var_x2: quarter,
        var_p2: quarter,
        norm_sqr: T::one(),
        manley_rowe: n1 + T::of(2.0) * n2,
    }
}
