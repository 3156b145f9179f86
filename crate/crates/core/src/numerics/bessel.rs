//! Bessel functions of the first kind, J_n(x), for the Chebyshev propagator.
//!
//! Miller's downward recurrence with the normalization
//! J_0 + 2 J_2 + 2 J_4 + ... = 1. Accurate for the moderate arguments
//! (x up to a few hundred) produced by spectral-radius * time-step products.

use crate::scalar::Real;

/// Return `[J_0(x), J_1(x), ..., J_nmax(x)]` for `x >= 0`.
pub fn bessel_j_seq<T: Real>(x: T, nmax: usize) -> Vec<T> {
    if x < T::of(1e-12) {
        let mut out = vec![T::zero(); nmax + 1];
        out[0] = T::one();
        if nmax >= 1 {
            out[1] = x * T::of(0.5);
        }
        return out;
    }
    // Start the recurrence well above both nmax and x.
    let xf = x.as_f64();
    let start = nmax + 16 + (2.0 * xf.sqrt()) as usize + (xf as usize);
    let mut jp = T::zero(); // J_{k+1}
    let mut j = T::of(1e-300); // J_k (arbitrary seed)
    let mut out = vec![T::zero(); nmax + 1];
    let mut norm = T::zero(); // accumulates J_0 + 2 sum J_{2m}
    let rescale_limit = T::of(1e250);
    for k in (0..=start).rev() {
        let jm = T::of(2.0 * (k as f64 + 1.0)) / x * j - jp;
        jp = j;
        j = jm;
        if k <= nmax {
            out[k] = j;
        }
        if k % 2 == 0 {
            norm = norm + if k == 0 { j } else { T::of(2.0) * j };
        }
        if j.abs() > rescale_limit {
            let s = T::one() / j;
            j = j * s;
            jp = jp * s;
            norm = norm * s;
            for v in out.iter_mut() {
                *v = *v * s;
            }
        }
    }
    for v in out.iter_mut() {
        *v = *v / norm;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn known_values() {
        // Reference values from Abramowitz & Stegun tables.
        let j = bessel_j_seq::<f64>(1.0, 5);
        assert_abs_diff_eq!(j[0], 0.7651976865579666, epsilon = 1e-13);
        assert_abs_diff_eq!(j[1], 0.4400505857449335, epsilon = 1e-13);
        assert_abs_diff_eq!(j[2], 0.1149034849319005, epsilon = 1e-13);

        let j = bessel_j_seq::<f64>(10.0, 12);
        assert_abs_diff_eq!(j[0], -0.2459357644513483, epsilon = 1e-12);
        assert_abs_diff_eq!(j[5], -0.2340615281867936, epsilon = 1e-12);
        assert_abs_diff_eq!(j[10], 0.2074861066333589, epsilon = 1e-12);
    }

    #[test]
    fn sum_rule() {
        for &x in &[0.3f64, 2.0, 25.0, 140.0] {
            let j = bessel_j_seq::<f64>(x, (x as usize) + 40);
            let mut s = j[0];
            for (n, v) in j.iter().enumerate().skip(1) {
                if n % 2 == 0 {
                    s += 2.0 * v;
                }
            }
            // long recurrences accumulate a little rounding at large x
            let tol = if x > 50.0 { 5e-10 } else { 1e-12 };
            assert_abs_diff_eq!(s, 1.0, epsilon = tol);
        }
    }

    #[test]
    fn tiny_argument() {
        let j = bessel_j_seq::<f64>(0.0, 3);
        assert_eq!(j[0], 1.0);
        assert_eq!(j[2], 0.0);
    }
}
