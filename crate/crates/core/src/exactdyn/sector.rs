//! Per-sector propagation of the two-mode Schrödinger equation.
//!
//! A diagonal gauge u_k = e^{-i k gamma} with gamma = arg(K) + pi/2 maps the
//! sector Hamiltonian onto a *real symmetric* tridiagonal matrix with
//! positive off-diagonal b_k = |K| w_k / 2, which both steppers exploit:
//! the Chebyshev stepper propagates the gauged state with real tridiagonal
//! matrix-vector products, the Runge-Kutta stepper integrates the same
//! system as coupled real components.

use num_complex::Complex;

use crate::config::{PropagationMethod, PropagatorSpec};
use crate::error::{Error, Result};
use crate::fockspace::{coupling_weight, SectorIndex, SectorState};
use crate::numerics::{expm_apply, AdaptiveOde, ChebWorkspace};
use crate::scalar::Real;

/// Uniform interface over the two sector propagation algorithms.
pub(crate) trait SectorStepper<T: Real>: Send {
    fn advance_to(&mut self, t: T) -> Result<()>;
    fn state(&self) -> &SectorState<T>;
}

/// Off-diagonal couplings b_k = |K| w_k / 2 and the gauge phases.
fn gauged_couplings<T: Real>(n: usize, k: Complex<T>) -> (Vec<T>, Vec<Complex<T>>) {
    let dim = SectorIndex(n).dimension();
    let half_abs_k = T::of(0.5) * k.norm();
    let b: Vec<T> = (1..dim).map(|j| half_abs_k * coupling_weight::<T>(n, j)).collect();
    let gamma = k.im.atan2(k.re) + T::FRAC_PI_2();
    let gauge: Vec<Complex<T>> = (0..dim)
        .map(|j| Complex::from_polar(T::one(), -gamma * T::of(j as f64)))
        .collect();
    (b, gauge)
}

/// Gershgorin bound on the spectral radius of the gauged tridiagonal block.
fn spectral_radius<T: Real>(b: &[T]) -> T {
    let dim = b.len() + 1;
    let mut rho = T::zero();
    for i in 0..dim {
        let left = if i >= 1 { b[i - 1] } else { T::zero() };
        let right = if i < b.len() { b[i] } else { T::zero() };
        rho = rho.max(left + right);
    }
    rho
}

/// Chebyshev evaluation of the tridiagonal-block matrix exponential.
pub(crate) struct ChebStepper<T: Real> {
    state: SectorState<T>,
    b: Vec<T>,
    gauge: Vec<Complex<T>>,
    rho: T,
    tol: T,
    phi: Vec<Complex<T>>,
    ws: ChebWorkspace<T>,
}

impl<T: Real> ChebStepper<T> {
    pub fn new(state: SectorState<T>, k: Complex<T>, tol: T) -> Self {
        let (b, gauge) = gauged_couplings(state.sector.0, k);
        let rho = spectral_radius(&b);
        let dim = state.amplitudes.len();
        Self {
            state,
            b,
            gauge,
            rho,
            tol,
            phi: vec![Complex::new(T::zero(), T::zero()); dim],
            ws: ChebWorkspace::new(),
        }
    }
}

fn tridiag_apply<T: Real>(b: &[T], v: &[Complex<T>], out: &mut [Complex<T>]) {
    let dim = v.len();
    for i in 0..dim {
        let mut acc = Complex::new(T::zero(), T::zero());
        if i >= 1 {
            acc += v[i - 1] * b[i - 1];
        }
        if i < b.len() {
            acc += v[i + 1] * b[i];
        }
        out[i] = acc;
    }
}

impl<T: Real> SectorStepper<T> for ChebStepper<T> {
    fn advance_to(&mut self, t: T) -> Result<()> {
        let dt = t - self.state.time;
        if dt == T::zero() {
            return Ok(());
        }
        if self.b.is_empty() {
            // one-dimensional sector: H = 0
            self.state.time = t;
            return Ok(());
        }
        for (p, (a, u)) in self
            .phi
            .iter_mut()
            .zip(self.state.amplitudes.iter().zip(&self.gauge))
        {
            *p = a * u.conj();
        }
        let b = &self.b;
        expm_apply(
            |v, out| tridiag_apply(b, v, out),
            -self.rho,
            self.rho,
            dt,
            &mut self.phi,
            self.tol,
            &mut self.ws,
        )
        .map_err(|e| e.in_sector(self.state.sector.0))?;
        for (a, (p, u)) in self
            .state
            .amplitudes
            .iter_mut()
            .zip(self.phi.iter().zip(&self.gauge))
        {
            *a = p * u;
        }
        self.state.time = t;
        Ok(())
    }

    fn state(&self) -> &SectorState<T> {
        &self.state
    }
}

/// Adaptive Runge-Kutta on the coupled real components of the sector state.
pub(crate) struct OdeStepper<T: Real> {
    state: SectorState<T>,
    ode: AdaptiveOde<T, Box<dyn FnMut(T, &[T], &mut [T]) + Send>>,
}

impl<T: Real> OdeStepper<T> {
    pub fn new(state: SectorState<T>, k: Complex<T>, tol: T) -> Self {
        let n = state.sector.0;
        let dim = state.amplitudes.len();
        let half_k = k * T::of(0.5);
        // d psi / dt = -i H psi in components:
        // row k-1 gains (K/2) w_k psi_k, row k gains -(K*/2) w_k psi_{k-1}
        let weights: Vec<T> = (1..dim).map(|j| coupling_weight::<T>(n, j)).collect();
        let rhs: Box<dyn FnMut(T, &[T], &mut [T]) + Send> = Box::new(move |_t, y, dy| {
            for v in dy.iter_mut() {
                *v = T::zero();
            }
            for (j, w) in weights.iter().enumerate() {
                let kk = j + 1;
                let psi_k = Complex::new(y[kk], y[dim + kk]);
                let psi_km1 = Complex::new(y[kk - 1], y[dim + kk - 1]);
                let up = half_k * psi_k * *w;
                let dn = -(half_k.conj()) * psi_km1 * *w;
                dy[kk - 1] = dy[kk - 1] + up.re;
                dy[dim + kk - 1] = dy[dim + kk - 1] + up.im;
                dy[kk] = dy[kk] + dn.re;
                dy[dim + kk] = dy[dim + kk] + dn.im;
            }
        });
        let mut y0 = vec![T::zero(); 2 * dim];
        for (j, a) in state.amplitudes.iter().enumerate() {
            y0[j] = a.re;
            y0[dim + j] = a.im;
        }
        let t0 = state.time;
        Self {
            state,
            ode: AdaptiveOde::new(rhs, t0, y0, tol, tol * T::of(1e-2)),
        }
    }
}

impl<T: Real> SectorStepper<T> for OdeStepper<T> {
    fn advance_to(&mut self, t: T) -> Result<()> {
        self.ode
            .advance_to(t)
            .map_err(|e| e.in_sector(self.state.sector.0))?;
        let dim = self.state.amplitudes.len();
        for j in 0..dim {
            self.state.amplitudes[j] = Complex::new(self.ode.y[j], self.ode.y[dim + j]);
        }
        self.state.time = t;
        Ok(())
    }

    fn state(&self) -> &SectorState<T> {
        &self.state
    }
}

pub(crate) fn make_stepper<T: Real>(
    state: SectorState<T>,
    k: Complex<T>,
    spec: &PropagatorSpec<T>,
) -> Result<Box<dyn SectorStepper<T>>> {
    match spec.method {
        PropagationMethod::SectorExpm => Ok(Box::new(ChebStepper::new(state, k, spec.step_tol))),
        PropagationMethod::SectorOde => Ok(Box::new(OdeStepper::new(state, k, spec.step_tol))),
        PropagationMethod::AdaptiveFrame => Err(Error::Argument(
            "sector propagation cannot use the adaptive-frame method".into(),
        )),
    }
}

/// Propagate one sector over `t_grid`, returning a snapshot per grid time.
pub fn propagate_sector<T: Real>(
    state: &SectorState<T>,
    k: T,
    t_grid: &[T],
    spec: &PropagatorSpec<T>,
) -> Result<Vec<SectorState<T>>> {
    if t_grid.is_empty() {
        return Ok(Vec::new());
    }
    if (t_grid[0] - state.time).abs() > T::epsilon() * T::of(16.0) {
        return Err(Error::Argument(format!(
            "t_grid must start at the state time {}, got {}",
            state.time.as_f64(),
            t_grid[0].as_f64()
        )));
    }
    let norm0 = state.norm_sqr();
    let mut stepper = make_stepper(state.clone(), Complex::new(k, T::zero()), spec)?;
    let mut out = Vec::with_capacity(t_grid.len());
    out.push(state.clone());
    for &t in &t_grid[1..] {
        stepper.advance_to(t)?;
        out.push(stepper.state().clone());
    }
    let drift = (stepper.state().norm_sqr() - norm0).abs();
    if drift > T::of(100.0) * spec.step_tol {
        return Err(Error::SectorIntegration {
            sector: state.sector.0,
            detail: format!(
                "norm drift {:.3e} exceeds 100 * step_tol = {:.3e}",
                drift.as_f64(),
                (T::of(100.0) * spec.step_tol).as_f64()
            ),
        });
    }
    Ok(out)
}
