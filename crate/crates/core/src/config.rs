//! Simulation configuration shared by every model layer.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Model layer selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Classical,
    Linearized,
    Meanfield,
    Exact,
    Adaptive,
}

impl Method {
    pub fn tag(&self) -> &'static str {
        match self {
            Method::Classical => "classical",
            Method::Linearized => "linearized",
            Method::Meanfield => "meanfield",
            Method::Exact => "exact",
            Method::Adaptive => "adaptive",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classical" => Ok(Method::Classical),
            "linearized" => Ok(Method::Linearized),
            "meanfield" => Ok(Method::Meanfield),
            "exact" => Ok(Method::Exact),
            "adaptive" => Ok(Method::Adaptive),
            other => Err(Error::Config(format!("unknown method `{other}`"))),
        }
    }
}

/// Algorithm used for the exact layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropagationMethod {
    /// Adaptive Runge-Kutta on each sector block.
    SectorOde,
    /// Chebyshev evaluation of the tridiagonal-block matrix exponential per
    /// output interval.
    SectorExpm,
    /// Displaced/squeezed product basis with dynamically adapted parameters.
    AdaptiveFrame,
}

/// Fock-space truncation policy for the exact layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TruncationSpec<T: Real> {
    /// Explicit cap on the initial pump photon number; derived from the pump
    /// amplitude when absent.
    pub n2_max: Option<usize>,
    /// Width multiplier for the derived cap: ceil(|alpha|^2 + sigma_mult |alpha|).
    pub sigma_mult: T,
    /// Maximum tolerated probability outside the retained sectors.
    pub leak_tol: T,
}

impl<T: Real> Default for TruncationSpec<T> {
    fn default() -> Self {
        Self {
            n2_max: None,
            sigma_mult: T::of(8.0),
            leak_tol: T::of(1e-10),
        }
    }
}

impl<T: Real> TruncationSpec<T> {
    /// Photon-number cutoff for a coherent amplitude:
    /// ceil(|alpha|^2 + sigma_mult |alpha|) plus a small floor that keeps the
    /// Poisson tail below leak_tol for small amplitudes too.
    pub fn cutoff_for(&self, alpha: Complex<T>) -> usize {
        if let Some(cap) = self.n2_max {
            return cap;
        }
        let a = alpha.norm();
        let raw = (a * a + self.sigma_mult * a).ceil();
        raw.to_usize().unwrap_or(0) + 10
    }
}

/// Integrator controls for the exact layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropagatorSpec<T: Real> {
    pub method: PropagationMethod,
    /// Frame step in scaled time (adaptive-frame method).
    pub dt: T,
    /// Local error / series-truncation tolerance per step.
    pub step_tol: T,
    /// Frame-parameter drift |d alpha| + |d eta| that triggers re-expansion.
    pub rebase_threshold: T,
    /// Sub-harmonic residual basis size for the adaptive frame.
    pub frame_dim_sub: usize,
    /// Pump residual basis size for the adaptive frame.
    pub frame_dim_pump: usize,
}

impl<T: Real> Default for PropagatorSpec<T> {
    fn default() -> Self {
        Self {
            method: PropagationMethod::SectorExpm,
            dt: T::of(1e-3),
            step_tol: T::of(1e-12),
            rebase_threshold: T::of(0.02),
            frame_dim_sub: 32,
            frame_dim_pump: 32,
        }
    }
}

impl<T: Real> PropagatorSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > T::zero()) {
            return Err(Error::Config("propagator.dt must be positive".into()));
        }
        if !(self.step_tol > T::zero()) {
            return Err(Error::Config("propagator.step_tol must be positive".into()));
        }
        if !(self.rebase_threshold > T::zero()) {
            return Err(Error::Config(
                "propagator.rebase_threshold must be positive".into(),
            ));
        }
        if self.frame_dim_sub < 4 || self.frame_dim_pump < 4 {
            return Err(Error::Config("frame dimensions must be at least 4".into()));
        }
        Ok(())
    }
}

/// Complete description of one simulation run.
///
/// All user-facing times are scaled, tau = K sqrt(n2_0) t; `t_max_scaled`
/// defaults to twice the mean-field optimum conversion time when absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig<T: Real> {
    /// Coupling strength of the nonlinear process.
    pub k: T,
    /// Mean photon number of the coherent pump input.
    pub n2_0: T,
    /// Optional coherent seed of the sub-harmonic mode.
    pub seed_alpha1: Complex<T>,
    /// End of the output grid in scaled time; `None` selects 2 tau_conv.
    pub t_max_scaled: Option<T>,
    /// Number of output grid points.
    pub n_points: usize,
    pub truncation: TruncationSpec<T>,
    pub propagator: PropagatorSpec<T>,
    pub method: Method,
}

impl<T: Real> Default for SimConfig<T> {
    fn default() -> Self {
        Self {
            k: T::one(),
            n2_0: T::zero(),
            seed_alpha1: Complex::new(T::zero(), T::zero()),
            t_max_scaled: None,
            n_points: 400,
            truncation: TruncationSpec::default(),
            propagator: PropagatorSpec::default(),
            method: Method::Exact,
        }
    }
}

impl<T: Real> SimConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !self.k.is_finite() || !(self.k > T::zero()) {
            return Err(Error::Config("k must be positive and finite".into()));
        }
        if !self.n2_0.is_finite() || self.n2_0 < T::zero() {
            return Err(Error::Config("n2_0 must be non-negative and finite".into()));
        }
        if !self.seed_alpha1.re.is_finite() || !self.seed_alpha1.im.is_finite() {
            return Err(Error::Config("seed_alpha1 must be finite".into()));
        }
        if let Some(tm) = self.t_max_scaled {
            if !(tm > T::zero()) {
                return Err(Error::Config("t_max_scaled must be positive".into()));
            }
        }
        if self.n_points < 2 {
            return Err(Error::Config("n_points must be at least 2".into()));
        }
        if !(self.truncation.sigma_mult > T::zero()) {
            return Err(Error::Config("truncation.sigma_mult must be positive".into()));
        }
        if !(self.truncation.leak_tol > T::zero()) {
            return Err(Error::Config("truncation.leak_tol must be positive".into()));
        }
        self.propagator.validate()
    }

    /// Initial pump amplitude in the default (real) gauge.
    pub fn pump_alpha(&self) -> Complex<T> {
        Complex::new(self.n2_0.sqrt(), T::zero())
    }

    /// Conversion factor between raw time and the scaled time
    /// tau = K sqrt(n2_0) t (falling back to K t for a vacuum pump).
    pub fn time_scale(&self) -> T {
        if self.n2_0 > T::zero() {
            self.k * self.n2_0.sqrt()
        } else {
            self.k
        }
    }

    /// Output grid end in scaled time.
    pub fn resolved_t_max(&self) -> T {
        match self.t_max_scaled {
            Some(tm) => tm,
            None => {
                if self.n2_0 > T::zero() {
                    T::of(2.0) * crate::meanfield::t_conv(self.n2_0).unwrap_or(T::one())
                } else {
                    T::one()
                }
            }
        }
    }

    /// Uniform output grid in scaled time.
    pub fn tau_grid(&self) -> Vec<T> {
        let tmax = self.resolved_t_max();
        let n = self.n_points;
        (0..n)
            .map(|i| tmax * T::of(i as f64) / T::of((n - 1) as f64))
            .collect()
    }
}
