//! Adaptive Simpson quadrature for smooth integrands.
//!
//! The optimum-time integrals are reduced to smooth integrands by a change
//! of variable before they reach this routine, so plain Simpson refinement
//! converges quickly.

use crate::scalar::Real;

/// Integrate `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<T: Real>(f: impl Fn(T) -> T, a: T, b: T, tol: T) -> T {
    let m = (a + b) * T::of(0.5);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(a, b, fa, fm, fb);
    recurse(&f, a, b, fa, fm, fb, whole, tol, 60)
}

fn simpson<T: Real>(a: T, b: T, fa: T, fm: T, fb: T) -> T {
    (b - a) / T::of(6.0) * (fa + T::of(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<T: Real>(
    f: &impl Fn(T) -> T,
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: T,
    depth: usize,
) -> T {
    let m = (a + b) * T::of(0.5);
    let lm = (a + m) * T::of(0.5);
    let rm = (m + b) * T::of(0.5);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= T::of(15.0) * tol {
        return left + right + delta / T::of(15.0);
    }
    let half = tol * T::of(0.5);
    recurse(f, a, m, fa, flm, fm, left, half, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, half, depth - 1)
}
