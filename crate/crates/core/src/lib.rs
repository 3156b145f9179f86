//! Two-mode quantum dynamics of degenerate parametric down-conversion from
//! a sub-harmonic vacuum.
//!
//! Four model layers over one configuration:
//!
//! * [`baselines`] — classical amplitude equations and the linearized
//!   (undepleted-pump) squeeze solution;
//! * [`meanfield`] — anharmonic-pendulum reduction with closed-form
//!   observables and the optimum-time quadratures;
//! * [`exactdyn`] — exact Schrödinger evolution, either sector-by-sector in
//!   the conserved-charge decomposition or in a dynamically adapted
//!   displaced/squeezed product basis;
//! * [`analysis`] — conversion efficiency, optimum times and squeezing
//!   extrema extracted from any trajectory.
//!
//! All core math is generic over the scalar type via [`scalar::Real`]
//! (`f32` or `f64`); concrete `f64` aliases are exported below.

pub mod analysis;
pub mod baselines;
pub mod config;
pub mod driver;
pub mod error;
pub mod exactdyn;
pub mod fockspace;
pub mod linalg;
pub mod meanfield;
pub mod numerics;
pub mod scalar;
pub mod selftest;

pub use config::{Method, PropagationMethod, PropagatorSpec, SimConfig, TruncationSpec};
pub use error::{Error, Result};
pub use scalar::Real;

/// Crate version string, embedded in serialized feature documents.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Complex double-precision scalar.
pub type C64 = num_complex::Complex<f64>;

// Concrete `f64` aliases for the main types.
pub type SimConfig64 = config::SimConfig<f64>;
pub type TruncationSpec64 = config::TruncationSpec<f64>;
pub type PropagatorSpec64 = config::PropagatorSpec<f64>;
pub type Observables64 = fockspace::Observables<f64>;
pub type TwoModeState64 = fockspace::TwoModeState<f64>;
pub type SectorState64 = fockspace::SectorState<f64>;
pub type FrameParams64 = fockspace::FrameParams<f64>;
pub type Trajectory64 = exactdyn::Trajectory<f64>;
pub type MeanFieldTrajectory64 = meanfield::MeanFieldTrajectory<f64>;
pub type TrajectoryFeatures64 = analysis::TrajectoryFeatures<f64>;
pub type GaugeReport64 = exactdyn::GaugeReport<f64>;
