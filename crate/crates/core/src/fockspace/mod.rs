//! Truncated two-mode Fock space organized by the conserved charge
//! N = n1 + 2 n2.
//!
//! The interaction H = i(K/2)(a1^dag^2 a2 - a1^2 a2^dag) commutes with
//! n1 + 2 n2, so the joint Hilbert space splits into sectors labelled by N.
//! Within sector N the basis is indexed by k = n2 (so n1 = N - 2k) and H is
//! tridiagonal, which is what makes the exact dynamics tractable.

mod matrices;
mod observables;

use std::collections::BTreeMap;

use num_complex::Complex;

use crate::config::{SimConfig, TruncationSpec};
use crate::error::{Error, Result};
use crate::scalar::{cre, sqrt_usize, Real};

pub use matrices::{displacement_matrix, squeeze_matrix};
pub(crate) use observables::variances_from_moments;
pub use observables::{mode_moments, observables, observables_checked, ModeMoments, Observables};

/// Parameters of the adaptive displaced/squeezed reference frame:
/// pump displacement alpha and sub-harmonic squeeze eta. For a coherent
/// pump input the frame starts at alpha = alpha2(0), eta = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameParams<T: Real> {
    pub alpha: Complex<T>,
    pub eta: Complex<T>,
}

/// Label of one eigenspace of the conserved charge n1 + 2 n2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SectorIndex(pub usize);

impl SectorIndex {
    /// Number of basis states (n1, n2) with n1 + 2 n2 = N.
    pub fn dimension(&self) -> usize {
        sector_dimension(self.0)
    }
}

/// Dimension of sector N: one state per n2 = 0..floor(N/2).
pub fn sector_dimension(n: usize) -> usize {
    n / 2 + 1
}

/// Amplitudes of the state restricted to one sector.
///
/// Index k corresponds to the basis label (n1 = N - 2k, n2 = k).
#[derive(Debug, Clone, PartialEq)]
pub struct SectorState<T: Real> {
    pub sector: SectorIndex,
    pub amplitudes: Vec<Complex<T>>,
    pub time: T,
}

impl<T: Real> SectorState<T> {
    pub fn new(sector: SectorIndex, amplitudes: Vec<Complex<T>>, time: T) -> Result<Self> {
        if amplitudes.len() != sector.dimension() {
            return Err(Error::Argument(format!(
                "sector N={} needs {} amplitudes, got {}",
                sector.0,
                sector.dimension(),
                amplitudes.len()
            )));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("sector amplitudes"));
        }
        Ok(Self {
            sector,
            amplitudes,
            time,
        })
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Off-diagonal Hamiltonian weight between k-1 and k in sector N,
/// w_k = sqrt(k (N - 2k + 1)(N - 2k + 2)), without the coupling prefactor.
pub fn coupling_weight<T: Real>(n: usize, k: usize) -> T {
    debug_assert!(k >= 1 && 2 * k <= n);
    T::of((k as f64) * ((n - 2 * k + 1) as f64) * ((n - 2 * k + 2) as f64)).sqrt()
}

/// Apply H = i(K/2)(a1^dag^2 a2 - a1^2 a2^dag) within a sector.
pub fn apply_hamiltonian<T: Real>(state: &SectorState<T>, k_coupling: T) -> SectorState<T> {
    apply_hamiltonian_complex(state, cre(k_coupling))
}

/// Sector Hamiltonian for a complex coupling, H = (i/2)(K a1^dag^2 a2 - K* a1^2 a2^dag).
///
/// The matrix element <k-1|H|k> equals (i K / 2) w_k; hermiticity fixes the
/// reverse element.
pub fn apply_hamiltonian_complex<T: Real>(
    state: &SectorState<T>,
    k_coupling: Complex<T>,
) -> SectorState<T> {
    let n = state.sector.0;
    let dim = state.amplitudes.len();
    let half_i_k = Complex::new(T::zero(), T::of(0.5)) * k_coupling;
    let mut out = vec![Complex::new(T::zero(), T::zero()); dim];
    for k in 1..dim {
        let w = coupling_weight::<T>(n, k);
        // raising n1 by two, lowering n2 by one
        out[k - 1] += half_i_k * state.amplitudes[k] * w;
        // hermitian counterpart <k|H|k-1> = conj(<k-1|H|k>)
        out[k] += half_i_k.conj() * state.amplitudes[k - 1] * w;
    }
    SectorState {
        sector: state.sector,
        amplitudes: out,
        time: state.time,
    }
}

/// Coherent-state amplitudes c_n = e^{-|alpha|^2/2} alpha^n / sqrt(n!) up to
/// `cutoff`, evaluated by the stable recurrence c_{n+1} = c_n alpha / sqrt(n+1).
pub fn coherent_amplitudes<T: Real>(alpha: Complex<T>, cutoff: usize) -> Result<Vec<Complex<T>>> {
    if !alpha.re.is_finite() || !alpha.im.is_finite() {
        return Err(Error::NonFinite("coherent amplitude"));
    }
    let mut out = Vec::with_capacity(cutoff + 1);
    let c0 = (-alpha.norm_sqr() * T::of(0.5)).exp();
    out.push(cre(c0));
    for n in 1..=cutoff {
        let prev = out[n - 1];
        out.push(prev * alpha / sqrt_usize::<T>(n));
    }
    Ok(out)
}

/// Joint state of the sub-harmonic and pump modes, stored sector by sector.
#[derive(Debug, Clone)]
pub struct TwoModeState<T: Real> {
    pub sectors: BTreeMap<SectorIndex, SectorState<T>>,
    pub truncation: TruncationSpec<T>,
}

impl<T: Real> TwoModeState<T> {
    pub fn norm_sqr(&self) -> T {
        let mut acc = crate::numerics::Kahan::new();
        for s in self.sectors.values() {
            acc.add(s.norm_sqr());
        }
        acc.total()
    }

    /// Largest populated sector label.
    pub fn max_sector(&self) -> usize {
        self.sectors.keys().next_back().map_or(0, |s| s.0)
    }
}

/// Build the initial product state (coherent or vacuum sub-harmonic seed,
/// coherent pump) decomposed into charge sectors.
pub fn initial_state<T: Real>(config: &SimConfig<T>) -> Result<TwoModeState<T>> {
    config.validate()?;
    initial_state_general(config.seed_alpha1, config.pump_alpha(), &config.truncation)
}

/// Sector decomposition of |alpha1> (x) |alpha2> under a truncation policy.
pub fn initial_state_general<T: Real>(
    alpha1: Complex<T>,
    alpha2: Complex<T>,
    truncation: &TruncationSpec<T>,
) -> Result<TwoModeState<T>> {
    let n2_cut = truncation.cutoff_for(alpha2);
    let pump = coherent_amplitudes(alpha2, n2_cut)?;
    let seed_vacuum = alpha1.norm_sqr() == T::zero();
    let n1_cut = if seed_vacuum {
        0
    } else {
        truncation.cutoff_for(alpha1)
    };
    let seed = coherent_amplitudes(alpha1, n1_cut)?;

    let retained =
        seed.iter().map(|z| z.norm_sqr()).sum::<T>() * pump.iter().map(|z| z.norm_sqr()).sum::<T>();
    let required = T::one() - truncation.leak_tol;
    if retained < required {
        return Err(Error::Truncation {
            retained: retained.as_f64(),
            required: required.as_f64(),
        });
    }

    let mut sectors = BTreeMap::new();
    let n_max = n1_cut + 2 * n2_cut;
    for n in 0..=n_max {
        let dim = sector_dimension(n);
        let mut amplitudes = vec![Complex::new(T::zero(), T::zero()); dim];
        let mut populated = false;
        for (k, amp) in amplitudes.iter_mut().enumerate() {
            let n1 = n - 2 * k;
            if n1 <= n1_cut && k <= n2_cut {
                let val = seed[n1] * pump[k];
                if val.norm_sqr() > T::zero() {
                    populated = true;
                }
                *amp = val;
            }
        }
        if populated {
            sectors.insert(
                SectorIndex(n),
                SectorState {
                    sector: SectorIndex(n),
                    amplitudes,
                    time: T::zero(),
                },
            );
        }
    }

    Ok(TwoModeState {
        sectors,
        truncation: truncation.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn sector_dimensions() {
        assert_eq!(sector_dimension(0), 1);
        assert_eq!(sector_dimension(2), 2);
        assert_eq!(sector_dimension(5), 3);
        // combinatorial check over the full required range
        for n in 0..=10_000usize {
            let count = (0..=n / 2).filter(|k| n >= 2 * k).count();
            assert_eq!(sector_dimension(n), count, "N={n}");
        }
    }

    #[test]
    fn coherent_vacuum_and_single_term() {
        let c = coherent_amplitudes(Complex::new(0.0f64, 0.0), 3).unwrap();
        assert_eq!(c, vec![
            Complex::new(1.0, 0.0),
            Complex::new(0.0, 0.0),
            Complex::new(0.0, 0.0),
            Complex::new(0.0, 0.0)
        ]);

        let c = coherent_amplitudes(Complex::new(1.0f64, 0.0), 0).unwrap();
        assert_abs_diff_eq!(c[0].re, (-0.5f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn coherent_weight_retained_at_large_amplitude() {
        // direct-summation oracle: cutoff ceil(|a|^2 + 8|a|) retains 1 - 1e-10
        let alpha = Complex::new(200.0f64.sqrt(), 0.0);
        let cutoff = (200.0 + 8.0 * 200.0f64.sqrt()).ceil() as usize;
        let c = coherent_amplitudes(alpha, cutoff).unwrap();
        let weight: f64 = c.iter().map(|z| z.norm_sqr()).sum();
        assert!(weight >= 1.0 - 1e-10, "weight {weight}");
    }

    #[test]
    fn coherent_rejects_non_finite() {
        assert!(coherent_amplitudes(Complex::new(f64::NAN, 0.0), 2).is_err());
    }

    #[test]
    fn hamiltonian_vacuum_annihilated() {
        let s = SectorState::new(SectorIndex(0), vec![Complex::new(1.0f64, 0.0)], 0.0).unwrap();
        let h = apply_hamiltonian(&s, 1.0);
        assert_eq!(h.amplitudes[0], Complex::new(0.0, 0.0));
    }

    #[test]
    fn hamiltonian_single_pump_photon() {
        // H |n1=0, n2=1> = i (K/2) sqrt(2) |n1=2, n2=0>
        let k_coupling = 0.8f64;
        let s = SectorState::new(
            SectorIndex(2),
            vec![Complex::new(0.0, 0.0), Complex::new(1.0, 0.0)],
            0.0,
        )
        .unwrap();
        let h = apply_hamiltonian(&s, k_coupling);
        assert_abs_diff_eq!(h.amplitudes[0].im, k_coupling / 2.0 * 2.0f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(h.amplitudes[0].re, 0.0, epsilon = 1e-15);
        assert_eq!(h.amplitudes[1], Complex::new(0.0, 0.0));
    }

    #[test]
    fn hamiltonian_is_hermitian() {
        // <phi|H psi> == <H phi|psi> for deterministic pseudo-random states in N=6
        let n = SectorIndex(6);
        let dim = n.dimension();
        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut rng = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        for _ in 0..20 {
            let phi: Vec<Complex<f64>> = (0..dim).map(|_| Complex::new(rng(), rng())).collect();
            let psi: Vec<Complex<f64>> = (0..dim).map(|_| Complex::new(rng(), rng())).collect();
            let sp = SectorState::new(n, psi.clone(), 0.0).unwrap();
            let sf = SectorState::new(n, phi.clone(), 0.0).unwrap();
            let h_psi = apply_hamiltonian(&sp, 1.3);
            let h_phi = apply_hamiltonian(&sf, 1.3);
            let lhs: Complex<f64> = phi
                .iter()
                .zip(&h_psi.amplitudes)
                .map(|(a, b)| a.conj() * b)
                .sum();
            let rhs: Complex<f64> = h_phi
                .amplitudes
                .iter()
                .zip(&psi)
                .map(|(a, b)| a.conj() * b)
                .sum();
            let nf: f64 = phi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let nh: f64 = h_psi.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let scale = (nf * nh).max(1e-30);
            assert!((lhs - rhs).norm() / scale < 1e-12);
        }
    }

    #[test]
    fn initial_state_vacuum_pump() {
        let mut cfg = SimConfig::<f64>::default();
        cfg.n2_0 = 0.0;
        let st = initial_state(&cfg).unwrap();
        assert_eq!(st.sectors.len(), 1);
        let s0 = &st.sectors[&SectorIndex(0)];
        assert_eq!(s0.amplitudes[0], Complex::new(1.0, 0.0));
    }

    #[test]
    fn initial_state_large_pump() {
        let mut cfg = SimConfig::<f64>::default();
        cfg.n2_0 = 200.0;
        let st = initial_state(&cfg).unwrap();
        // only even sectors, up to 2 * 324
        assert_eq!(st.max_sector(), 648);
        assert!(st.sectors.keys().all(|s| s.0 % 2 == 0));
        assert!(st.norm_sqr() >= 1.0 - 1e-10);
        // each populated sector holds its single amplitude at n1 = 0
        let s = &st.sectors[&SectorIndex(400)];
        for (k, amp) in s.amplitudes.iter().enumerate() {
            if k != 200 {
                assert_eq!(*amp, Complex::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn initial_state_with_seed_populates_odd_sectors() {
        let tr = TruncationSpec::<f64>::default();
        let st = initial_state_general(Complex::new(0.5, 0.0), Complex::new(2.0, 0.0), &tr).unwrap();
        assert!(st.sectors.keys().any(|s| s.0 % 2 == 1));
        assert_relative_eq!(st.norm_sqr(), 1.0, max_relative = 1e-9);
    }

    #[test]
    fn truncation_error_when_cap_too_small() {
        let tr = TruncationSpec::<f64> {
            n2_max: Some(3),
            ..Default::default()
        };
        let err = initial_state_general(
            Complex::new(0.0, 0.0),
            Complex::new(200.0f64.sqrt(), 0.0),
            &tr,
        );
        assert!(matches!(err, Err(Error::Truncation { .. })));
    }
}
