//! Physical observables of a sector-decomposed two-mode state.
//!
//! Quadratures follow a = x + i p, so the vacuum variance is 1/4.
//! Photon numbers and the conserved charge are diagonal in the sector basis;
//! <a2> and <a1^2> couple sectors N and N-2, <a1> couples N and N-1 and
//! <a2^2> couples N and N-4. All reductions run in ascending sector order
//! with compensated summation so results do not depend on thread scheduling.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::TwoModeState;
use crate::error::{Error, Result};
use crate::numerics::{CKahan, Kahan};
use crate::scalar::{sqrt_usize, Real};

/// Per-time-point record of the quantities tracked by every model layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observables<T: Real> {
    pub n1: T,
    pub n2: T,
    pub a1: Complex<T>,
    pub a2: Complex<T>,
    pub a1_sq: Complex<T>,
    pub var_x1: T,
    pub var_p1: T,
    pub var_x2: T,
    pub var_p2: T,
    pub norm_sqr: T,
    /// Expectation of the conserved charge n1 + 2 n2.
    pub manley_rowe: T,
}

impl<T: Real> Observables<T> {
    /// Two-mode vacuum values.
    pub fn vacuum() -> Self {
        let zero = Complex::new(T::zero(), T::zero());
        Self {
            n1: T::zero(),
            n2: T::zero(),
            a1: zero,
            a2: zero,
            a1_sq: zero,
            var_x1: T::of(0.25),
            var_p1: T::of(0.25),
            var_x2: T::of(0.25),
            var_p2: T::of(0.25),
            norm_sqr: T::one(),
            manley_rowe: T::zero(),
        }
    }
}

/// Quadrature variances from raw moments of a single mode.
pub(crate) fn variances_from_moments<T: Real>(
    n: T,
    a: Complex<T>,
    a_sq: Complex<T>,
) -> (T, T) {
    let quarter = T::of(0.25);
    let two = T::of(2.0);
    let var_x = quarter * (two * a_sq.re + two * n + T::one()) - a.re * a.re;
    let var_p = quarter * (-(two * a_sq.re) + two * n + T::one()) - a.im * a.im;
    (var_x, var_p)
}

/// First and second moments of a single-mode amplitude vector.
#[derive(Debug, Clone, Copy)]
pub struct ModeMoments<T: Real> {
    pub norm_sqr: T,
    pub n: T,
    pub a: Complex<T>,
    pub a_sq: Complex<T>,
}

/// Compute `<n>`, `<a>` and `<a^2>` of a number-basis amplitude vector.
pub fn mode_moments<T: Real>(amps: &[Complex<T>]) -> ModeMoments<T> {
    let mut norm = Kahan::new();
    let mut n_acc = Kahan::new();
    let mut a_acc = CKahan::new();
    let mut a2_acc = CKahan::new();
    for (m, c) in amps.iter().enumerate() {
        let w = c.norm_sqr();
        norm.add(w);
        n_acc.add(w * T::of(m as f64));
        if m + 1 < amps.len() {
            a_acc.add(c.conj() * amps[m + 1] * sqrt_usize::<T>(m + 1));
        }
        if m + 2 < amps.len() {
            a2_acc.add(c.conj() * amps[m + 2] * sqrt_usize::<T>(m + 1) * sqrt_usize::<T>(m + 2));
        }
    }
    ModeMoments {
        norm_sqr: norm.total(),
        n: n_acc.total(),
        a: a_acc.total(),
        a_sq: a2_acc.total(),
    }
}

/// Assemble all observables of a sector-decomposed state.
pub fn observables<T: Real>(state: &TwoModeState<T>) -> Observables<T> {
    let mut norm = Kahan::new();
    let mut n1 = Kahan::new();
    let mut n2 = Kahan::new();
    let mut mr = Kahan::new();
    let mut a1 = CKahan::new();
    let mut a2 = CKahan::new();
    let mut a1_sq = CKahan::new();
    let mut a2_sq = CKahan::new();

    for (idx, s) in &state.sectors {
        let n = idx.0;
        for (k, c) in s.amplitudes.iter().enumerate() {
            let w = c.norm_sqr();
            let n1_label = (n - 2 * k) as f64;
            norm.add(w);
            n1.add(w * T::of(n1_label));
            n2.add(w * T::of(k as f64));
            mr.add(w * T::of(n as f64));
        }

        // <lower sector| op |this sector> couplings
        if n >= 1 {
            if let Some(lo) = state.sectors.get(&super::SectorIndex(n - 1)) {
                // a1: (n1, n2) -> (n1 - 1, n2), same k in sector N-1
                for (k, c) in s.amplitudes.iter().enumerate() {
                    let n1_label = n - 2 * k;
                    if n1_label >= 1 && k < lo.amplitudes.len() {
                        a1.add(lo.amplitudes[k].conj() * c * sqrt_usize::<T>(n1_label));
                    }
                }
            }
        }
        if n >= 2 {
            if let Some(lo) = state.sectors.get(&super::SectorIndex(n - 2)) {
                for (k, c) in s.amplitudes.iter().enumerate() {
                    // a2: (n1, n2) -> (n1, n2 - 1), index k-1 in sector N-2
                    if k >= 1 {
                        a2.add(lo.amplitudes[k - 1].conj() * c * sqrt_usize::<T>(k));
                    }
                    // a1^2: (n1, n2) -> (n1 - 2, n2), same k in sector N-2
                    let n1_label = n - 2 * k;
                    if n1_label >= 2 && k < lo.amplitudes.len() {
                        a1_sq.add(
                            lo.amplitudes[k].conj()
                                * c
                                * sqrt_usize::<T>(n1_label)
                                * sqrt_usize::<T>(n1_label - 1),
                        );
                    }
                }
            }
        }
        if n >= 4 {
            if let Some(lo) = state.sectors.get(&super::SectorIndex(n - 4)) {
                // a2^2: (n1, n2) -> (n1, n2 - 2), index k-2 in sector N-4
                for (k, c) in s.amplitudes.iter().enumerate() {
                    if k >= 2 && k - 2 < lo.amplitudes.len() {
                        a2_sq.add(
                            lo.amplitudes[k - 2].conj()
                                * c
                                * sqrt_usize::<T>(k)
                                * sqrt_usize::<T>(k - 1),
                        );
                    }
                }
            }
        }
    }

    // expectations of the normalized state; norm_sqr itself stays raw
    let norm_sqr = norm.total();
    let inv = if norm_sqr > T::zero() {
        T::one() / norm_sqr
    } else {
        T::zero()
    };
    let n1 = n1.total() * inv;
    let n2 = n2.total() * inv;
    let a1 = a1.total() * inv;
    let a2 = a2.total() * inv;
    let a1_sq = a1_sq.total() * inv;
    let (var_x1, var_p1) = variances_from_moments(n1, a1, a1_sq);
    let (var_x2, var_p2) = variances_from_moments(n2, a2, a2_sq.total() * inv);

    Observables {
        n1,
        n2,
        a1,
        a2,
        a1_sq,
        var_x1,
        var_p1,
        var_x2,
        var_p2,
        norm_sqr,
        manley_rowe: mr.total() * inv,
    }
}

/// Like [`observables`], but fails if the squared norm left `1 +/- tol`.
pub fn observables_checked<T: Real>(state: &TwoModeState<T>, tol: T) -> Result<Observables<T>> {
    let obs = observables(state);
    if (obs.norm_sqr - T::one()).abs() > tol {
        return Err(Error::NormIntegrity {
            norm_sq: obs.norm_sqr.as_f64(),
            tol: tol.as_f64(),
        });
    }
    Ok(obs)
}
