//! Chebyshev expansion of the unitary propagator exp(-i H dt).
//!
//! For Hermitian H with spectrum inside [lambda_min, lambda_max] the
//! expansion in Chebyshev polynomials of (H - c)/rho converges faster than
//! exponentially once the order exceeds rho*dt, with coefficients
//! (2 - delta_n0) (-i)^n J_n(rho dt). Norm is preserved to the truncation
//! tolerance, which makes this the reference stepper for sector evolution
//! and the adaptive-frame residual.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::numerics::bessel::bessel_j_seq;
use crate::scalar::Real;

/// Reusable buffers for [`expm_apply`].
#[derive(Debug, Default)]
pub struct ChebWorkspace<T> {
    t0: Vec<Complex<T>>,
    t1: Vec<Complex<T>>,
    t2: Vec<Complex<T>>,
}

impl<T: Real> ChebWorkspace<T> {
    pub fn new() -> Self {
        Self {
            t0: Vec::new(),
            t1: Vec::new(),
            t2: Vec::new(),
        }
    }

    fn resize(&mut self, n: usize) {
        let zero = Complex::new(T::zero(), T::zero());
        self.t0.resize(n, zero);
        self.t1.resize(n, zero);
        self.t2.resize(n, zero);
    }
}

/// Overwrite `psi` with `exp(-i H dt) psi`.
///
/// `apply` must implement `out = H v`; the spectrum of H must lie inside
/// `[lambda_min, lambda_max]` (a Gershgorin bound is fine — overestimating
/// the interval only costs a few extra terms).
pub fn expm_apply<T, F>(
    mut apply: F,
    lambda_min: T,
    lambda_max: T,
    dt: T,
    psi: &mut [Complex<T>],
    tol: T,
    ws: &mut ChebWorkspace<T>,
) -> Result<()>
where
    T: Real,
    F: FnMut(&[Complex<T>], &mut [Complex<T>]),
{
    let n = psi.len();
    let center = (lambda_min + lambda_max) * T::of(0.5);
    let rho = (lambda_max - lambda_min) * T::of(0.5);
    if rho < T::zero() || !rho.is_finite() {
        return Err(Error::Integration(
            "invalid spectral bounds for Chebyshev propagation".into(),
        ));
    }

    let global_phase = Complex::from_polar(T::one(), -center * dt);
    let x = (rho * dt).abs();
    if x < T::of(1e-14) {
        // H is (numerically) a multiple of the identity.
        for v in psi.iter_mut() {
            *v *= global_phase;
        }
        return Ok(());
    }

    // Coefficient sequence, truncated where the Bessel tail is negligible.
    let nmax = (x.as_f64().ceil() as usize) + 60 + (4.0 * x.as_f64().sqrt()) as usize;
    let j = bessel_j_seq(x, nmax);
    let cut_tol = (tol * T::of(0.01)).max(T::of(1e-18));
    let mut deg = nmax;
    let floor = x.as_f64().ceil() as usize;
    for k in floor..nmax {
        if j[k].abs() < cut_tol && j[k + 1].abs() < cut_tol {
            deg = k;
            break;
        }
    }
    if deg == nmax && j[nmax].abs() > tol {
        return Err(Error::Integration(format!(
            "Chebyshev series did not reach tolerance (x = {:.3e})",
            x.as_f64()
        )));
    }

    let sign = if dt >= T::zero() { T::one() } else { -T::one() };
    ws.resize(n);
    // Scaled-and-shifted application: w = (H v - c v)/rho, folding the sign
    // of dt into the polynomial variable.
    let mut apply_scaled = |v: &[Complex<T>], out: &mut [Complex<T>]| {
        apply(v, out);
        let inv = sign / rho;
        for (o, vi) in out.iter_mut().zip(v) {
            *o = (*o - vi * center) * inv;
        }
    };

    ws.t0.copy_from_slice(psi);
    apply_scaled(&ws.t0, &mut ws.t1);

    // acc = J_0 T_0 psi + 2 sum_n (-i)^n J_n T_n psi, accumulated in psi.
    let mi = Complex::new(T::zero(), -T::one());
    let mut coeff = mi; // (-i)^n at n = 1
    for (v, t0) in psi.iter_mut().zip(&ws.t0) {
        *v = t0 * j[0];
    }
    for (v, t1) in psi.iter_mut().zip(&ws.t1) {
        *v += t1 * coeff * T::of(2.0) * j[1];
    }
    for jn in j.iter().take(deg + 1).skip(2) {
        apply_scaled(&ws.t1, &mut ws.t2);
        let two = T::of(2.0);
        for i in 0..n {
            ws.t2[i] = ws.t2[i] * two - ws.t0[i];
        }
        coeff *= mi;
        let w = coeff * (two * *jn);
        for (v, t2) in psi.iter_mut().zip(&ws.t2) {
            *v += t2 * w;
        }
        std::mem::swap(&mut ws.t0, &mut ws.t1);
        std::mem::swap(&mut ws.t1, &mut ws.t2);
    }
    for v in psi.iter_mut() {
        *v *= global_phase;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// 2x2 Hermitian H = [[0, b], [b, 0]]: exp(-iHt) = cos(bt) I - i sin(bt) X.
    #[test]
    fn two_level_rotation() {
        let b = 1.7f64;
        let apply = |v: &[Complex<f64>], out: &mut [Complex<f64>]| {
            out[0] = b * v[1];
            out[1] = b * v[0];
        };
        let mut psi = vec![Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)];
        let mut ws = ChebWorkspace::new();
        let dt = 2.3;
        expm_apply(apply, -b, b, dt, &mut psi, 1e-14, &mut ws).unwrap();
        assert_abs_diff_eq!(psi[0].re, (b * dt).cos(), epsilon = 1e-13);
        assert_abs_diff_eq!(psi[1].im, -(b * dt).sin(), epsilon = 1e-13);
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-14);
    }

    /// Diagonal H with a shifted spectrum exercises the center phase.
    #[test]
    fn shifted_diagonal() {
        let d = [3.0f64, 5.0, 9.0];
        let apply = |v: &[Complex<f64>], out: &mut [Complex<f64>]| {
            for i in 0..3 {
                out[i] = d[i] * v[i];
            }
        };
        let mut psi = vec![
            Complex::new(0.5, 0.0),
            Complex::new(0.5, 0.5),
            Complex::new(-0.5, 0.0),
        ];
        let expect: Vec<Complex<f64>> = psi
            .iter()
            .zip(&d)
            .map(|(z, &e)| z * Complex::from_polar(1.0, -e * 0.7))
            .collect();
        let mut ws = ChebWorkspace::new();
        expm_apply(apply, 3.0, 9.0, 0.7, &mut psi, 1e-14, &mut ws).unwrap();
        for (a, b) in psi.iter().zip(&expect) {
            assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-13);
            assert_abs_diff_eq!(a.im, b.im, epsilon = 1e-13);
        }
    }

    #[test]
    fn negative_time_reverses() {
        let b = 0.9f64;
        let apply = |v: &[Complex<f64>], out: &mut [Complex<f64>]| {
            out[0] = b * v[1];
            out[1] = b * v[0];
        };
        let mut psi = vec![Complex::new(0.6, 0.2), Complex::new(0.1, -0.7)];
        let orig = psi.clone();
        let mut ws = ChebWorkspace::new();
        expm_apply(&apply, -b, b, 1.1, &mut psi, 1e-14, &mut ws).unwrap();
        expm_apply(&apply, -b, b, -1.1, &mut psi, 1e-14, &mut ws).unwrap();
        for (a, b) in psi.iter().zip(&orig) {
            assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-12);
            assert_abs_diff_eq!(a.im, b.im, epsilon = 1e-12);
        }
    }
}
