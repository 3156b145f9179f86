//! Truncated displacement and squeeze unitaries in the number basis.
//!
//! D(alpha) = exp(alpha a^dag - alpha* a) and
//! S(eta) = exp(eta/2 a^dag^2 - eta*/2 a^2) are built by exponentiating the
//! truncated generator at a padded dimension and cropping, so truncation
//! artifacts are pushed into the discarded rows and columns.

use num_complex::Complex;

use crate::linalg::CMat;
use crate::scalar::{sqrt_usize, Real};

fn padded(dim: usize) -> usize {
    dim + (dim / 4).max(20)
}

/// Generator of D(alpha) at dimension `dim`.
pub(crate) fn displacement_generator<T: Real>(alpha: Complex<T>, dim: usize) -> CMat<T> {
    let mut gen = CMat::zeros(dim);
    for n in 0..dim.saturating_sub(1) {
        let w = sqrt_usize::<T>(n + 1);
        gen[(n + 1, n)] += alpha * w;
        gen[(n, n + 1)] -= alpha.conj() * w;
    }
    gen
}

/// Generator of S(eta) at dimension `dim`.
pub(crate) fn squeeze_generator<T: Real>(eta: Complex<T>, dim: usize) -> CMat<T> {
    let mut gen = CMat::zeros(dim);
    let half = Complex::new(T::of(0.5), T::zero());
    for n in 0..dim.saturating_sub(2) {
        let w = sqrt_usize::<T>(n + 1) * sqrt_usize::<T>(n + 2);
        gen[(n + 2, n)] += eta * half * w;
        gen[(n, n + 2)] -= eta.conj() * half * w;
    }
    gen
}

/// Truncated matrix of the coherent displacement operator D(alpha).
pub fn displacement_matrix<T: Real>(alpha: Complex<T>, dim: usize) -> CMat<T> {
    assert!(dim >= 1, "displacement matrix needs dim >= 1");
    displacement_generator(alpha, padded(dim)).expm().crop(dim)
}

/// Truncated matrix of the squeeze operator S(eta).
///
/// Couples only number states of equal parity; the forbidden entries are
/// zeroed exactly after the exponential.
pub fn squeeze_matrix<T: Real>(eta: Complex<T>, dim: usize) -> CMat<T> {
    assert!(dim >= 1, "squeeze matrix needs dim >= 1");
    let mut m = squeeze_generator(eta, padded(dim)).expm().crop(dim);
    let zero = Complex::new(T::zero(), T::zero());
    for i in 0..dim {
        for j in 0..dim {
            if (i + j) % 2 == 1 {
                m[(i, j)] = zero;
            }
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn identity_deviation(m: &CMat<f64>, block: usize) -> f64 {
        // max column-norm deviation from the identity on the leading block;
        // rows outside the block belong to intentionally truncated columns
        let mut worst = 0.0f64;
        for j in 0..block {
            let mut s = 0.0;
            for i in 0..block {
                let expect = if i == j { 1.0 } else { 0.0 };
                s += (m[(i, j)] - Complex::new(expect, 0.0)).norm_sqr();
            }
            worst = worst.max(s.sqrt());
        }
        worst
    }

    #[test]
    fn displacement_zero_is_identity() {
        let d = displacement_matrix(Complex::new(0.0f64, 0.0), 8);
        assert!(identity_deviation(&d, 8) < 1e-14);
    }

    #[test]
    fn displacement_vacuum_overlap() {
        // <0|D(1)|0> = e^{-1/2}
        let d = displacement_matrix(Complex::new(1.0f64, 0.0), 40);
        assert_abs_diff_eq!(d[(0, 0)].re, (-0.5f64).exp(), epsilon = 1e-8);
        assert_abs_diff_eq!(d[(0, 0)].im, 0.0, epsilon = 1e-12);
        // first column is the coherent state itself
        let c = crate::fockspace::coherent_amplitudes(Complex::new(1.0f64, 0.0), 10).unwrap();
        for n in 0..=10 {
            assert_abs_diff_eq!(d[(n, 0)].re, c[n].re, epsilon = 1e-9);
        }
    }

    #[test]
    fn displacement_group_inverse() {
        let a = Complex::new(0.7f64, -0.3);
        let dim = 48;
        let d1 = displacement_matrix(a, dim);
        let d2 = displacement_matrix(-a, dim);
        let prod = d1.matmul(&d2);
        assert!(identity_deviation(&prod, dim / 2) < 1e-8);
    }

    #[test]
    fn squeeze_zero_is_identity() {
        let s = squeeze_matrix(Complex::new(0.0f64, 0.0), 8);
        assert!(identity_deviation(&s, 8) < 1e-14);
    }

    #[test]
    fn squeeze_vacuum_overlap() {
        // <0|S(0.5)|0> = 1/sqrt(cosh 0.5)
        let s = squeeze_matrix(Complex::new(0.5f64, 0.0), 60);
        assert_abs_diff_eq!(s[(0, 0)].re, 1.0 / 0.5f64.cosh().sqrt(), epsilon = 1e-8);
    }

    #[test]
    fn squeeze_parity_exact() {
        let s = squeeze_matrix(Complex::new(0.37f64, 0.21), 20);
        for i in 0..20 {
            for j in 0..20 {
                if (i + j) % 2 == 1 {
                    assert_eq!(s[(i, j)], Complex::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn squeezed_vacuum_p_variance() {
        // column 0 of S(eta) is the squeezed vacuum; Var(p) = e^{-2 eta}/4
        let eta = 0.5f64;
        let s = squeeze_matrix(Complex::new(eta, 0.0), 60);
        let col: Vec<Complex<f64>> = (0..60).map(|i| s[(i, 0)]).collect();
        let m = crate::fockspace::mode_moments(&col);
        let var_p = (2.0 * m.n - 2.0 * m.a_sq.re + 1.0) / 4.0 - m.a.im * m.a.im;
        assert_abs_diff_eq!(var_p, (-2.0 * eta).exp() / 4.0, epsilon = 1e-6);
        // and the antisqueezed quadrature grows accordingly
        let var_x = (2.0 * m.n + 2.0 * m.a_sq.re + 1.0) / 4.0 - m.a.re * m.a.re;
        assert_abs_diff_eq!(var_x, (2.0 * eta).exp() / 4.0, epsilon = 1e-6);
    }

    #[test]
    fn unitary_on_lower_half_at_recommended_dim() {
        // dim >= 4 |alpha|^2 + 40 keeps the leading columns unitary to 1e-8;
        // column j of D(alpha) spreads over ~ j + |alpha|^2 + 2 |alpha| sqrt(j)
        // levels, which caps how far up the unitary block can reach
        for &(re, im) in &[(1.0f64, 0.0), (1.5, 1.0), (0.0, 2.0)] {
            let a = Complex::new(re, im);
            let dim = (4.0 * a.norm_sqr()).ceil() as usize + 40;
            let d = displacement_matrix(a, dim);
            let prod = d.adjoint().matmul(&d);
            let mut cols = dim / 2;
            while cols > 4 {
                let spread =
                    cols as f64 + a.norm_sqr() + 2.0 * a.norm() * (cols as f64).sqrt() + 25.0;
                if spread <= dim as f64 {
                    break;
                }
                cols -= 1;
            }
            assert!(
                identity_deviation(&prod, cols) < 1e-8,
                "alpha = {a}, dim = {dim}, cols = {cols}"
            );
        }
        // squeezed number-state amplitudes decay like tanh^n(eta), so the
        // dimension must scale with e^{2 eta} col + 16 / ln(1/tanh eta);
        // test the leading block at dimensions sized accordingly
        for &(eta, dim, cols) in &[(0.4f64, 60usize, 14usize), (0.9, 150, 12)] {
            let s = squeeze_matrix(Complex::new(eta, 0.0), dim);
            let prod = s.adjoint().matmul(&s);
            assert!(identity_deviation(&prod, cols) < 1e-8, "eta = {eta}");
        }
    }
}
