//! Model-layer dispatch: produce a trajectory for any configured method on
//! the shared scaled-time grid.

use crate::baselines::{classical_evolve, classical_observables, linearized_observables};
use crate::config::{Method, SimConfig};
use crate::error::Result;
use crate::exactdyn::{evolve_adaptive_frame, evolve_exact, Trajectory, TrajectoryMeta};
use crate::meanfield::integrate_meanfield;
use crate::scalar::Real;

/// Run the configured model layer.
pub fn run_method<T: Real>(config: &SimConfig<T>) -> Result<Trajectory<T>> {
    config.validate()?;
    let taus = config.tau_grid();
    let scale = config.time_scale();
    match config.method {
        Method::Classical => {
            let ts: Vec<T> = taus.iter().map(|&tau| tau / scale).collect();
            let states = classical_evolve(config.seed_alpha1, config.pump_alpha(), config.k, &ts)?;
            let points = states.iter().map(classical_observables).collect();
            Trajectory::new(
                taus,
                points,
                TrajectoryMeta {
                    config: config.clone(),
                    method: Method::Classical,
                },
            )
        }
        Method::Linearized => {
            let alpha2 = config.n2_0.sqrt();
            let points = taus
                .iter()
                .map(|&tau| linearized_observables(tau / scale, alpha2, config.k))
                .collect();
            Trajectory::new(
                taus,
                points,
                TrajectoryMeta {
                    config: config.clone(),
                    method: Method::Linearized,
                },
            )
        }
        Method::Meanfield => {
            let t_max = config.resolved_t_max() / scale;
            let mf = integrate_meanfield(
                config.n2_0,
                config.k,
                t_max,
                config.n_points,
                config.propagator.step_tol.max(T::of(1e-13)),
            )?;
            let mut traj = Trajectory::new(
                taus,
                mf.points.clone(),
                TrajectoryMeta {
                    config: config.clone(),
                    method: Method::Meanfield,
                },
            )?;
            traj.mf_params = Some(mf.eta.iter().cloned().zip(mf.beta.iter().cloned()).collect());
            Ok(traj)
        }
        Method::Exact => evolve_exact(config),
        Method::Adaptive => evolve_adaptive_frame(config, &config.propagator),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn all_methods_share_the_grid() {
        for method in [
            Method::Classical,
            Method::Linearized,
            Method::Meanfield,
            Method::Exact,
            Method::Adaptive,
        ] {
            let cfg = SimConfig::<f64> {
                n2_0: 4.0,
                t_max_scaled: Some(1.0),
                n_points: 9,
                method,
                ..Default::default()
            };
            let traj = run_method(&cfg).unwrap();
            assert_eq!(traj.len(), 9, "{method:?}");
            assert_eq!(traj.times[0], 0.0);
            assert_relative_eq!(traj.times[8], 1.0, max_relative = 1e-14);
            assert_eq!(traj.meta.method, method);
        }
    }

    #[test]
    fn meanfield_trajectory_carries_frame_columns() {
        let cfg = SimConfig::<f64> {
            n2_0: 20.0,
            t_max_scaled: Some(2.0),
            n_points: 11,
            method: Method::Meanfield,
            ..Default::default()
        };
        let traj = run_method(&cfg).unwrap();
        let mf = traj.mf_params.as_ref().unwrap();
        assert_eq!(mf.len(), 11);
        assert_eq!(mf[0].0, 0.0); // eta(0) = 0
        assert_eq!(mf[0].1, 0.0); // beta(0) = 0
        // eta grows at unit rate in scaled time initially
        assert_relative_eq!(mf[1].0, traj.times[1], max_relative = 0.02);
    }

    #[test]
    fn linearized_matches_meanfield_at_short_times() {
        let base = SimConfig::<f64> {
            n2_0: 100.0,
            t_max_scaled: Some(0.2),
            n_points: 11,
            ..Default::default()
        };
        let lin = run_method(&SimConfig {
            method: Method::Linearized,
            ..base.clone()
        })
        .unwrap();
        let mf = run_method(&SimConfig {
            method: Method::Meanfield,
            ..base
        })
        .unwrap();
        for i in 1..11 {
            assert_relative_eq!(lin.points[i].n1, mf.points[i].n1, max_relative = 0.01);
        }
    }
}
