//! Shared numerical machinery: compensated summation, an embedded
//! Runge-Kutta integrator, adaptive quadrature, Bessel coefficients and the
//! Chebyshev propagator.

pub mod bessel;
pub mod chebyshev;
pub mod ode;
pub mod quadrature;
pub mod summation;

pub use chebyshev::{expm_apply, ChebWorkspace};
pub use ode::AdaptiveOde;
pub use quadrature::adaptive_simpson;
pub use summation::{CKahan, Kahan};
