//! Mean-field layer: the pump amplitude is replaced by its expectation
//! value, turning the dynamics into an anharmonic pendulum for the squeeze
//! parameter,
//!
//!     eta'' = -(K^2/4) sinh(2 eta),   eta(0) = 0,  eta'(0) = K sqrt(n2_0),
//!
//! with the energy integral (2/K^2) eta'^2 + sinh^2(eta) = 2 n2_0. Photon
//! numbers and correlations follow in closed form: <n1> = sinh^2(eta),
//! <a1^2> = sinh(2 eta)/2, <a2> = eta'/K.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fockspace::Observables;
use crate::numerics::{adaptive_simpson, AdaptiveOde};
use crate::scalar::{cre, Real};

/// Pendulum coordinate and velocity at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldState<T: Real> {
    pub eta: T,
    pub eta_dot: T,
    pub time: T,
}

/// Mean-field trajectory with derived observables.
///
/// `times` are raw; the scaled grid is `K sqrt(n2_0) * times`.
#[derive(Debug, Clone)]
pub struct MeanFieldTrajectory<T: Real> {
    pub k: T,
    pub n2_0: T,
    pub times: Vec<T>,
    pub eta: Vec<T>,
    pub eta_dot: Vec<T>,
    pub beta: Vec<T>,
    pub points: Vec<Observables<T>>,
    /// Largest observed violation of the energy integral.
    pub energy_drift: T,
}

/// Observables implied by a pendulum state (Eqs. for <n1>, <a1^2> and the
/// pump amplitude; the pump stays coherent in this approximation).
fn derived_observables<T: Real>(n2_0: T, k: T, eta: T, eta_dot: T) -> Observables<T> {
    let half = T::of(0.5);
    let quarter = T::of(0.25);
    let sh = eta.sinh();
    let n1 = sh * sh;
    let n2 = n2_0 - half * n1;
    let a2 = eta_dot / k;
    Observables {
        n1,
        n2,
        a1: Complex::new(T::zero(), T::zero()),
        a2: cre(a2),
        a1_sq: cre(half * (T::of(2.0) * eta).sinh()),
        var_x1: quarter * (T::of(2.0) * eta).exp(),
        var_p1: quarter * (-T::of(2.0) * eta).exp(),
        var_x2: quarter,
        var_p2: quarter,
        norm_sqr: T::one(),
        manley_rowe: n1 + T::of(2.0) * n2,
    }
}

/// Integrate the anharmonic pendulum on a uniform raw-time grid.
pub fn integrate_meanfield<T: Real>(
    n2_0: T,
    k: T,
    t_max: T,
    n_points: usize,
    tol: T,
) -> Result<MeanFieldTrajectory<T>> {
    if !n2_0.is_finite() || n2_0 < T::zero() {
        return Err(Error::Argument("n2_0 must be non-negative and finite".into()));
    }
    if !(k > T::zero()) || !(t_max > T::zero()) || n_points < 2 || !(tol > T::zero()) {
        return Err(Error::Argument(
            "integrate_meanfield needs k > 0, t_max > 0, n_points >= 2, tol > 0".into(),
        ));
    }

    let a2_0 = n2_0.sqrt();
    let eta_dot0 = k * a2_0;
    let quarter_k2 = T::of(0.25) * k * k;
    let rhs = move |_t: T, y: &[T], dy: &mut [T]| {
        dy[0] = y[1];
        dy[1] = -quarter_k2 * (T::of(2.0) * y[0]).sinh();
    };
    let mut ode = AdaptiveOde::new(rhs, T::zero(), vec![T::zero(), eta_dot0], tol, tol * T::of(1e-2));

    let energy0 = T::of(2.0) * n2_0;
    let mut times = Vec::with_capacity(n_points);
    let mut eta = Vec::with_capacity(n_points);
    let mut eta_dot = Vec::with_capacity(n_points);
    let mut beta = Vec::with_capacity(n_points);
    let mut points = Vec::with_capacity(n_points);
    let mut drift_max = T::zero();

    for i in 0..n_points {
        let t = t_max * T::of(i as f64) / T::of((n_points - 1) as f64);
        ode.advance_to(t)?;
        let (e, ed) = (ode.y[0], ode.y[1]);
        let energy = T::of(2.0) / (k * k) * ed * ed + e.sinh() * e.sinh();
        let drift = (energy - energy0).abs();
        drift_max = drift_max.max(drift);
        if n2_0 > T::zero() && drift > T::of(100.0) * tol * energy0 {
            return Err(Error::Integration(format!(
                "energy-integral drift {:.3e} exceeds 100 * tol * 2 n2_0 at t = {}",
                drift.as_f64(),
                t.as_f64()
            )));
        }
        times.push(t);
        eta.push(e);
        eta_dot.push(ed);
        // K beta = eta_dot - eta_dot(0) identically
        beta.push(ed / k - a2_0);
        points.push(derived_observables(n2_0, k, e, ed));
    }

    Ok(MeanFieldTrajectory {
        k,
        n2_0,
        times,
        eta,
        eta_dot,
        beta,
        points,
        energy_drift: drift_max,
    })
}

/// Turning point of the pendulum: sinh^2(eta_max) = 2 n2_0.
pub fn eta_max<T: Real>(n2_0: T) -> T {
    (T::of(2.0) * n2_0).sqrt().asinh()
}

/// Optimum conversion time in scaled units,
/// tau_conv = sqrt(n2_0) * Int_0^{y_max} dy / sqrt(n2_0 - sinh^2(y)/2).
///
/// The substitution sinh(y) = sqrt(2 n2_0) sin(phi) removes the
/// inverse-square-root endpoint singularity, leaving the smooth integrand
/// S / sqrt(1 + S^2 sin^2(phi)) on [0, pi/2] with S = sqrt(2 n2_0).
pub fn t_conv<T: Real>(n2_0: T) -> Result<T> {
    if !(n2_0 > T::zero()) || !n2_0.is_finite() {
        return Err(Error::Domain(format!(
            "t_conv requires n2_0 > 0, got {}",
            n2_0.as_f64()
        )));
    }
    let s = (T::of(2.0) * n2_0).sqrt();
    let s2 = s * s;
    let f = move |phi: T| {
        let sin = phi.sin();
        s / (T::one() + s2 * sin * sin).sqrt()
    };
    let half_pi = T::PI() * T::of(0.5);
    Ok(adaptive_simpson(f, T::zero(), half_pi, T::of(1e-12)))
}

/// Optimum squeezing time, half the conversion time.
pub fn t_squeeze<T: Real>(n2_0: T) -> Result<T> {
    Ok(t_conv(n2_0)? * T::of(0.5))
}

/// Mean-field floor of the squeezed-quadrature variance, 1/(32 n2_0).
///
/// Asymptotically consistent with e^{-2 eta_max}/4; the beyond-mean-field
/// (Crouch-Braunstein) floor 1/(8 sqrt(n2_0)) is much larger because pump
/// phase noise is neglected here.
pub fn mf_min_p_variance<T: Real>(n2_0: T) -> T {
    T::one() / (T::of(32.0) * n2_0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    /// Complete elliptic integral route: tau_conv = S K(k) / sqrt(1 + S^2)
    /// with k' = 1/sqrt(1+S^2), K(k) = pi / (2 AGM(1, k')).
    fn tau_conv_agm(n2_0: f64) -> f64 {
        let s2 = 2.0 * n2_0;
        let kp = 1.0 / (1.0 + s2).sqrt();
        let (mut a, mut b) = (1.0f64, kp);
        for _ in 0..40 {
            let (an, bn) = ((a + b) / 2.0, (a * b).sqrt());
            a = an;
            b = bn;
            if (a - b).abs() < 1e-16 {
                break;
            }
        }
        let big_k = std::f64::consts::PI / (2.0 * a);
        s2.sqrt() * big_k / (1.0 + s2).sqrt()
    }

    #[test]
    fn quadrature_matches_elliptic_integral() {
        for &n in &[0.5, 20.0, 200.0, 1e3, 1e4, 1e5] {
            let q = t_conv(n).unwrap();
            assert_abs_diff_eq!(q, tau_conv_agm(n), epsilon = 1e-9);
        }
    }

    #[test]
    fn t_conv_rejects_non_positive() {
        assert!(t_conv(0.0f64).is_err());
        assert!(t_conv(-3.0f64).is_err());
    }

    #[test]
    fn eta_max_values() {
        assert_eq!(eta_max(0.0f64), 0.0);
        // arcsinh(sqrt(400)) = ln(20 + sqrt(401)) = 3.68950...
        assert_relative_eq!(
            eta_max(200.0f64),
            (20.0 + 401.0f64.sqrt()).ln(),
            max_relative = 1e-14
        );
        assert_abs_diff_eq!(eta_max(200.0f64), 3.6895, epsilon = 1e-4);
        assert_relative_eq!(eta_max(0.5f64), (1.0 + 2.0f64.sqrt()).ln(), max_relative = 1e-14);
    }

    #[test]
    fn squeeze_time_is_half_conversion_time() {
        for &n in &[0.7, 20.0, 1e4] {
            assert_eq!(t_squeeze(n).unwrap(), t_conv(n).unwrap() * 0.5);
        }
    }

    #[test]
    fn asymptotic_offset_is_stable_across_decades() {
        // tau_conv - ln(n)/2 approaches ln(4 sqrt(2)); < 0.05 drift per decade
        let c3 = t_conv(1e3f64).unwrap() - 0.5 * 1e3f64.ln();
        let c4 = t_conv(1e4f64).unwrap() - 0.5 * 1e4f64.ln();
        let c5 = t_conv(1e5f64).unwrap() - 0.5 * 1e5f64.ln();
        assert!((c4 - c3).abs() < 0.05);
        assert!((c5 - c4).abs() < 0.05);
        assert_abs_diff_eq!(c5, (4.0 * 2.0f64.sqrt()).ln(), epsilon = 1e-2);
    }

    #[test]
    fn vacuum_input_is_stationary() {
        let tr = integrate_meanfield(0.0f64, 1.0, 5.0, 11, 1e-10).unwrap();
        for (e, ed) in tr.eta.iter().zip(&tr.eta_dot) {
            assert_eq!(*e, 0.0);
            assert_eq!(*ed, 0.0);
        }
        assert_eq!(tr.points[5].n1, 0.0);
    }

    #[test]
    fn pendulum_turning_point_matches_energy_integral() {
        let n2_0 = 200.0f64;
        let tau_c = t_conv(n2_0).unwrap();
        let t_max = 1.5 * tau_c / n2_0.sqrt();
        let tr = integrate_meanfield(n2_0, 1.0, t_max, 4001, 1e-11).unwrap();
        let max_eta = tr.eta.iter().cloned().fold(f64::MIN, f64::max);
        assert_abs_diff_eq!(max_eta, eta_max(n2_0), epsilon = 1e-6);
        // <n2> vanishes at the turning point
        let min_n2 = tr.points.iter().map(|p| p.n2).fold(f64::MAX, f64::min);
        assert_abs_diff_eq!(min_n2, 0.0, epsilon = 1e-4);
        assert!(tr.energy_drift <= 10.0 * 1e-11 * 2.0 * n2_0);
    }

    #[test]
    fn quadrature_agrees_with_pendulum_turning_time() {
        // independent oracle: locate the eta_dot zero crossing by bisection
        // on re-integrated trajectories
        let n2_0 = 20.0f64;
        let eta_dot_at = |t: f64| -> f64 {
            let tr = integrate_meanfield(n2_0, 1.0, t, 2, 1e-12).unwrap();
            tr.eta_dot[1]
        };
        let (mut lo, mut hi) = (0.5, 2.0);
        assert!(eta_dot_at(lo) > 0.0 && eta_dot_at(hi) < 0.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if eta_dot_at(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t_turn_scaled = 0.5 * (lo + hi) * n2_0.sqrt();
        assert_abs_diff_eq!(t_turn_scaled, t_conv(n2_0).unwrap(), epsilon = 1e-6);
    }

    #[test]
    fn mf_min_p_variance_values() {
        assert_relative_eq!(mf_min_p_variance(200.0f64), 1.5625e-4, max_relative = 1e-12);
        // asymptotic consistency with e^{-2 eta_max}/4
        for &n in &[100.0f64, 500.0, 5e3] {
            let direct = (-2.0 * eta_max(n)).exp() / 4.0;
            assert_relative_eq!(direct, mf_min_p_variance(n), max_relative = 0.03);
        }
        // Crouch-Braunstein cross-check magnitude at n2_0 = 200
        let cb = 1.0 / (8.0 * 200.0f64.sqrt());
        assert_abs_diff_eq!(cb, 8.84e-3, epsilon = 5e-5);
        assert!(cb > mf_min_p_variance(200.0f64));
    }

    #[test]
    fn beta_identity_and_manley_rowe() {
        let n2_0 = 50.0f64;
        let k = 0.7;
        let tr = integrate_meanfield(n2_0, k, 1.0, 101, 1e-11).unwrap();
        for i in 0..tr.times.len() {
            // K beta - eta_dot + eta_dot(0) = 0
            let res = k * tr.beta[i] - tr.eta_dot[i] + k * n2_0.sqrt();
            assert_abs_diff_eq!(res, 0.0, epsilon = 1e-12);
            // derived fields satisfy the Manley-Rowe bookkeeping identically
            assert_abs_diff_eq!(tr.points[i].manley_rowe, 2.0 * n2_0, epsilon = 1e-9);
        }
    }

    #[test]
    fn short_time_matches_linearized_growth() {
        let n2_0 = 100.0f64;
        let t_max = 0.3 / n2_0.sqrt();
        let tr = integrate_meanfield(n2_0, 1.0, t_max, 31, 1e-12).unwrap();
        for i in 1..tr.times.len() {
            let tau = tr.times[i] * n2_0.sqrt();
            let lin = tau.sinh().powi(2);
            assert_relative_eq!(tr.points[i].n1, lin, max_relative = 0.01);
        }
    }
}
