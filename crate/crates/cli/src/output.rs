//! CSV and JSON serialization with fixed column layouts.
//!
//! Numbers are written with 17 significant digits so regression fixtures
//! round-trip losslessly. Column order and header names are versioned: the
//! trajectory layout below is format version 1.

use anyhow::Result;
use serde::Serialize;

use pdc_core::analysis::{SweepRow, TrajectoryFeatures};
use pdc_core::{Method, SimConfig64, Trajectory64};

pub const TRAJECTORY_COLUMNS: &str = "t_scaled,n1_mean,n2_mean,re_a2,im_a2,re_a1sq,im_a1sq,\
var_x1,var_p1,var_x2,var_p2,norm2,manley_rowe,eta,beta";

/// 17 significant digits, lossless for f64.
pub fn fmt_g(x: f64) -> String {
    format!("{x:.16e}")
}

/// Fixed-layout trajectory CSV; eta/beta are empty for non-mean-field
/// methods, and `--raw-time` appends a t_raw column.
pub fn trajectory_csv(traj: &Trajectory64, raw_time: bool) -> String {
    let mut out = String::new();
    out.push_str(TRAJECTORY_COLUMNS);
    if raw_time {
        out.push_str(",t_raw");
    }
    out.push('\n');
    let scale = traj.meta.config.time_scale();
    for (i, p) in traj.points.iter().enumerate() {
        let (eta, beta) = match (&traj.mf_params, traj.meta.method) {
            (Some(fp), Method::Meanfield) => (fmt_g(fp[i].0), fmt_g(fp[i].1)),
            _ => (String::new(), String::new()),
        };
        let cols = [
            fmt_g(traj.times[i]),
            fmt_g(p.n1),
            fmt_g(p.n2),
            fmt_g(p.a2.re),
            fmt_g(p.a2.im),
            fmt_g(p.a1_sq.re),
            fmt_g(p.a1_sq.im),
            fmt_g(p.var_x1),
            fmt_g(p.var_p1),
            fmt_g(p.var_x2),
            fmt_g(p.var_p2),
            fmt_g(p.norm_sqr),
            fmt_g(p.manley_rowe),
            eta,
            beta,
        ];
        out.push_str(&cols.join(","));
        if raw_time {
            out.push(',');
            out.push_str(&fmt_g(traj.times[i] / scale));
        }
        out.push('\n');
    }
    out
}

/// Aligned multi-method CSV: shared scaled-time column, then one column
/// group per surviving method.
pub fn compare_csv(survivors: &[(Method, Trajectory64)], raw_time: bool, scale: f64) -> String {
    const GROUP: [&str; 12] = [
        "n1_mean",
        "n2_mean",
        "re_a2",
        "im_a2",
        "re_a1sq",
        "im_a1sq",
        "var_x1",
        "var_p1",
        "var_x2",
        "var_p2",
        "norm2",
        "manley_rowe",
    ];
    let mut out = String::from("t_scaled");
    for (m, _) in survivors {
        for col in GROUP {
            out.push(',');
            out.push_str(m.tag());
            out.push('_');
            out.push_str(col);
        }
    }
    if raw_time {
        out.push_str(",t_raw");
    }
    out.push('\n');
    let times = &survivors[0].1.times;
    for (i, &t) in times.iter().enumerate() {
        out.push_str(&fmt_g(t));
        for (_, traj) in survivors {
            let p = &traj.points[i];
            for v in [
                p.n1,
                p.n2,
                p.a2.re,
                p.a2.im,
                p.a1_sq.re,
                p.a1_sq.im,
                p.var_x1,
                p.var_p1,
                p.var_x2,
                p.var_p2,
                p.norm_sqr,
                p.manley_rowe,
            ] {
                out.push(',');
                out.push_str(&fmt_g(v));
            }
        }
        if raw_time {
            out.push(',');
            out.push_str(&fmt_g(t / scale));
        }
        out.push('\n');
    }
    out
}

pub fn sweep_csv(rows: &[SweepRow<f64>]) -> String {
    let mut out = String::from("n2_0,max_efficiency,t_of_max_scaled,runtime_s,error\n");
    for r in rows {
        let eff = r.max_efficiency.map(fmt_g).unwrap_or_default();
        let tom = r.t_of_max.map(fmt_g).unwrap_or_default();
        let err = r.error.clone().unwrap_or_default().replace(',', ";");
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_g(r.n2_0),
            eff,
            tom,
            fmt_g(r.runtime_s),
            err
        ));
    }
    out
}

#[derive(Serialize)]
struct FeaturesDoc<'a> {
    tool_version: &'static str,
    config: &'a SimConfig64,
    features: &'a TrajectoryFeatures<f64>,
}

/// Features JSON with the configuration echo and tool version.
pub fn features_json(cfg: &SimConfig64, features: &TrajectoryFeatures<f64>) -> Result<String> {
    let doc = FeaturesDoc {
        tool_version: pdc_core::VERSION,
        config: cfg,
        features,
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}
