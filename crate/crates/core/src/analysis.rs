//! Trajectory feature extraction: conversion efficiency, optimum times and
//! squeezing/fluctuation extrema.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::exactdyn::{evolve_exact, Trajectory};
use crate::fockspace::Observables;
use crate::scalar::Real;

/// Observable selector for extremum searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservableField {
    N1,
    N2,
    ReA2,
    ImA2,
    AbsA2,
    VarX1,
    VarP1,
    VarX2,
    VarP2,
    NormSqr,
    ManleyRowe,
}

impl ObservableField {
    pub fn extract<T: Real>(&self, o: &Observables<T>) -> T {
        match self {
            ObservableField::N1 => o.n1,
            ObservableField::N2 => o.n2,
            ObservableField::ReA2 => o.a2.re,
            ObservableField::ImA2 => o.a2.im,
            ObservableField::AbsA2 => o.a2.norm(),
            ObservableField::VarX1 => o.var_x1,
            ObservableField::VarP1 => o.var_p1,
            ObservableField::VarX2 => o.var_x2,
            ObservableField::VarP2 => o.var_p2,
            ObservableField::NormSqr => o.norm_sqr,
            ObservableField::ManleyRowe => o.manley_rowe,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumKind {
    Min,
    Max,
}

/// Refined extremum location.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum<T: Real> {
    pub time: T,
    pub value: T,
    /// Set when the discrete extremum sits on the grid boundary; the
    /// reported time/value are then the boundary sample, unrefined.
    pub on_boundary: bool,
}

/// Headline numbers of one trajectory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryFeatures<T: Real> {
    pub max_conversion_efficiency: T,
    pub t_of_max_conversion: T,
    pub min_var_p1: T,
    pub t_of_min_var_p1: T,
    pub max_var_x2: T,
    pub pump_amplitude_min: T,
    pub t_of_pump_amplitude_min: T,
    pub method: String,
}

/// Pointwise conversion efficiency <n1>/(2 n2_0), clipped to [0, 1].
///
/// Values above 1 + 1e-6 indicate a bookkeeping violation and are reported
/// as an error rather than clipped away.
pub fn conversion_efficiency<T: Real>(traj: &Trajectory<T>, n2_0: T) -> Result<Vec<T>> {
    if !(n2_0 > T::zero()) {
        return Err(Error::Argument("conversion efficiency needs n2_0 > 0".into()));
    }
    if (traj.meta.config.n2_0 - n2_0).abs() > T::of(1e-12) * n2_0 {
        return Err(Error::Argument(format!(
            "trajectory was produced for n2_0 = {}, not {}",
            traj.meta.config.n2_0.as_f64(),
            n2_0.as_f64()
        )));
    }
    let denom = T::of(2.0) * n2_0;
    let limit = T::one() + T::of(1e-6);
    let mut out = Vec::with_capacity(traj.points.len());
    for (i, p) in traj.points.iter().enumerate() {
        let e = p.n1 / denom;
        if e > limit {
            return Err(Error::Argument(format!(
                "efficiency {} exceeds 1 + 1e-6 at grid index {i}",
                e.as_f64()
            )));
        }
        out.push(e.max(T::zero()).min(T::one()));
    }
    Ok(out)
}

/// Locate an extremum of a sampled signal with parabolic refinement through
/// the discrete extremum and its neighbors.
pub fn find_extremum_series<T: Real>(times: &[T], values: &[T], kind: ExtremumKind) -> Result<Extremum<T>> {
    if times.len() < 5 || times.len() != values.len() {
        return Err(Error::Argument(
            "extremum search needs at least 5 samples".into(),
        ));
    }
    let mut idx = 0usize;
    for (i, v) in values.iter().enumerate() {
        let better = match kind {
            ExtremumKind::Min => *v < values[idx],
            ExtremumKind::Max => *v > values[idx],
        };
        if better {
            idx = i;
        }
    }
    if idx == 0 || idx == values.len() - 1 {
        return Ok(Extremum {
            time: times[idx],
            value: values[idx],
            on_boundary: true,
        });
    }
    let (tm, t0, tp) = (times[idx - 1], times[idx], times[idx + 1]);
    let (fm, f0, fp) = (values[idx - 1], values[idx], values[idx + 1]);
    let denom = fm - T::of(2.0) * f0 + fp;
    if denom.abs() < T::epsilon() * (fm.abs() + f0.abs() + fp.abs() + T::epsilon()) {
        return Ok(Extremum {
            time: t0,
            value: f0,
            on_boundary: false,
        });
    }
    // uniform-grid vertex formula with the local spacing
    let h = (tp - tm) * T::of(0.5);
    let shift = (fm - fp) / denom * T::of(0.5);
    let time = t0 + shift * h;
    let value = f0 - T::of(0.125) * (fm - fp) * (fm - fp) / denom;
    Ok(Extremum {
        time,
        value,
        on_boundary: false,
    })
}

/// Locate an extremum of one observable along a trajectory.
pub fn find_extremum_time<T: Real>(
    traj: &Trajectory<T>,
    field: ObservableField,
    kind: ExtremumKind,
) -> Result<Extremum<T>> {
    let values: Vec<T> = traj.points.iter().map(|p| field.extract(p)).collect();
    find_extremum_series(&traj.times, &values, kind)
}

/// Time and value of the minimum pump coherent-amplitude magnitude.
///
/// When Re<a2> changes sign (the generic case in the real gauge), |<a2>|
/// dips to a cusp at the zero crossing; the crossing time from linear
/// interpolation is then far more accurate than a parabolic fit.
pub fn pump_amplitude_minimum<T: Real>(traj: &Trajectory<T>) -> Result<(T, T)> {
    if traj.points.len() < 2 {
        return Err(Error::Argument("pump minimum needs at least 2 samples".into()));
    }
    let abs: Vec<T> = traj.points.iter().map(|p| p.a2.norm()).collect();
    let mut idx = 0usize;
    for (i, v) in abs.iter().enumerate() {
        if *v < abs[idx] {
            idx = i;
        }
    }
    // look for a sign change of Re<a2> adjacent to the discrete minimum
    let re: Vec<T> = traj.points.iter().map(|p| p.a2.re).collect();
    let lo = idx.saturating_sub(1);
    let hi = (idx + 1).min(re.len() - 1);
    for i in lo..hi {
        if re[i] * re[i + 1] < T::zero() {
            let f = re[i] / (re[i] - re[i + 1]);
            let time = traj.times[i] + (traj.times[i + 1] - traj.times[i]) * f;
            let value = abs[i].min(abs[i + 1]).min(
                (traj.points[i].a2.im + (traj.points[i + 1].a2.im - traj.points[i].a2.im) * f)
                    .abs(),
            );
            return Ok((time, value));
        }
    }
    Ok((traj.times[idx], abs[idx]))
}

/// Extract the headline features of one trajectory.
pub fn extract_features<T: Real>(traj: &Trajectory<T>) -> Result<TrajectoryFeatures<T>> {
    let n2_0 = traj.meta.config.n2_0;
    let denom = T::of(2.0) * n2_0;
    let eff: Vec<T> = if n2_0 > T::zero() {
        traj.points
            .iter()
            .map(|p| (p.n1 / denom).max(T::zero()).min(T::one()))
            .collect()
    } else {
        vec![T::zero(); traj.points.len()]
    };
    let eff_max = find_extremum_series(&traj.times, &eff, ExtremumKind::Max)?;
    let vp1 = find_extremum_time(traj, ObservableField::VarP1, ExtremumKind::Min)?;
    let vx2 = find_extremum_time(traj, ObservableField::VarX2, ExtremumKind::Max)?;
    let (t_pump, pump_min) = pump_amplitude_minimum(traj)?;
    Ok(TrajectoryFeatures {
        max_conversion_efficiency: eff_max.value.max(T::zero()).min(T::one()),
        t_of_max_conversion: eff_max.time,
        min_var_p1: vp1.value,
        t_of_min_var_p1: vp1.time,
        max_var_x2: vx2.value,
        pump_amplitude_min: pump_min,
        t_of_pump_amplitude_min: t_pump,
        method: traj.meta.method.tag().to_string(),
    })
}

/// One row of an efficiency sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow<T: Real> {
    pub n2_0: T,
    pub max_efficiency: Option<T>,
    pub t_of_max: Option<T>,
    pub runtime_s: f64,
    pub error: Option<String>,
}

/// Run the exact evolution for each pump photon number and extract the
/// maximum conversion efficiency. Rows run concurrently; failures are
/// recorded per row and do not abort the sweep.
pub fn efficiency_sweep<T: Real>(n2_list: &[T], template: &SimConfig<T>) -> Result<Vec<SweepRow<T>>> {
    if n2_list.is_empty() {
        return Err(Error::Argument("sweep needs a non-empty n2_0 list".into()));
    }
    template.validate()?;
    let rows: Vec<SweepRow<T>> = n2_list
        .par_iter()
        .map(|&n2_0| {
            let start = std::time::Instant::now();
            let mut cfg = template.clone();
            cfg.n2_0 = n2_0;
            let outcome = cfg
                .validate()
                .and_then(|_| evolve_exact(&cfg))
                .and_then(|traj| extract_features(&traj));
            let runtime_s = start.elapsed().as_secs_f64();
            match outcome {
                Ok(f) => SweepRow {
                    n2_0,
                    max_efficiency: Some(f.max_conversion_efficiency),
                    t_of_max: Some(f.t_of_max_conversion),
                    runtime_s,
                    error: None,
                },
                Err(e) => SweepRow {
                    n2_0,
                    max_efficiency: None,
                    t_of_max: None,
                    runtime_s,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(rows)
}
