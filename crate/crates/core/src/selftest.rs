//! Fast invariant suite on small instances, exposed to the CLI `selftest`
//! subcommand. Each check is independent and reports a one-line result.

use num_complex::Complex;

use crate::baselines::{classical_evolve, linearized_observables};
use crate::config::{PropagationMethod, SimConfig};
use crate::exactdyn::{gauge_check, propagate_sector};
use crate::fockspace::{
    apply_hamiltonian, coherent_amplitudes, displacement_matrix, sector_dimension,
    squeeze_matrix, SectorIndex, SectorState,
};
use crate::meanfield::{eta_max, integrate_meanfield, t_conv, t_squeeze};

/// Result of one invariant check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &'static str, pass: bool, detail: String) -> CheckResult {
    CheckResult { name, pass, detail }
}

/// Run every check; all are sized to finish in well under a second each.
pub fn run_selftest() -> Vec<CheckResult> {
    let mut out = Vec::new();

    // sector dimension formula, spot range
    {
        let ok = (0..=2000usize).all(|n| sector_dimension(n) == n / 2 + 1);
        out.push(check("sector_dimension_formula", ok, "floor(N/2)+1".into()));
    }

    // hermiticity of the sector Hamiltonian on N = 6
    {
        let dim = sector_dimension(6);
        let mut seed = 42u64;
        let mut rng = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        let mut worst = 0.0f64;
        for _ in 0..8 {
            let phi: Vec<Complex<f64>> = (0..dim).map(|_| Complex::new(rng(), rng())).collect();
            let psi: Vec<Complex<f64>> = (0..dim).map(|_| Complex::new(rng(), rng())).collect();
            let hp = apply_hamiltonian(
                &SectorState::new(SectorIndex(6), psi.clone(), 0.0).unwrap(),
                1.0,
            );
            let hf = apply_hamiltonian(
                &SectorState::new(SectorIndex(6), phi.clone(), 0.0).unwrap(),
                1.0,
            );
            let lhs: Complex<f64> = phi.iter().zip(&hp.amplitudes).map(|(a, b)| a.conj() * b).sum();
            let rhs: Complex<f64> = hf.amplitudes.iter().zip(&psi).map(|(a, b)| a.conj() * b).sum();
            let nf: f64 = phi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let nh: f64 = hp.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            worst = worst.max((lhs - rhs).norm() / (nf * nh).max(1e-30));
        }
        out.push(check(
            "hamiltonian_hermitian",
            worst < 1e-12,
            format!("max relative asymmetry {worst:.2e}"),
        ));
    }

    // coherent-state weight retention
    {
        let alpha = Complex::new(20.0f64.sqrt(), 0.0);
        let cutoff = (20.0 + 8.0 * 20.0f64.sqrt()).ceil() as usize;
        let c = coherent_amplitudes(alpha, cutoff).unwrap();
        let w: f64 = c.iter().map(|z| z.norm_sqr()).sum();
        out.push(check(
            "coherent_weight_retention",
            w >= 1.0 - 1e-10,
            format!("retained {w:.12}"),
        ));
    }

    // displacement/squeeze unitarity and parity
    {
        let d = displacement_matrix(Complex::new(0.8f64, 0.3), 44);
        let p = d.adjoint().matmul(&d);
        let mut dev = 0.0f64;
        for j in 0..22 {
            let mut s = 0.0;
            for i in 0..22 {
                let expect = if i == j { 1.0 } else { 0.0 };
                s += (p[(i, j)] - Complex::new(expect, 0.0)).norm_sqr();
            }
            dev = dev.max(s.sqrt());
        }
        out.push(check(
            "displacement_unitary",
            dev < 1e-8,
            format!("lower-half deviation {dev:.2e}"),
        ));

        let s = squeeze_matrix(Complex::new(0.4f64, 0.0), 30);
        let parity_ok = (0..30).all(|i| (0..30).all(|j| (i + j) % 2 == 0 || s[(i, j)].norm() == 0.0));
        out.push(check("squeeze_parity", parity_ok, "odd entries exactly zero".into()));
    }

    // N = 2 sector analytic solution
    {
        let s = SectorState::new(
            SectorIndex(2),
            vec![Complex::new(0.0, 0.0), Complex::new(1.0, 0.0)],
            0.0,
        )
        .unwrap();
        let spec = crate::config::PropagatorSpec {
            method: PropagationMethod::SectorExpm,
            ..Default::default()
        };
        let grid = [0.0, 0.9];
        let out2 = propagate_sector(&s, 1.0, &grid, &spec).unwrap();
        let got = out2[1].amplitudes[0].norm_sqr();
        let expect = (0.9 / 2.0f64.sqrt()).sin().powi(2);
        out.push(check(
            "two_photon_rabi",
            (got - expect).abs() < 1e-10,
            format!("P(n1=2) {got:.10} vs {expect:.10}"),
        ));
    }

    // ODE vs Chebyshev cross-validation on N = 8
    {
        let dim = sector_dimension(8);
        let amps: Vec<Complex<f64>> = (0..dim)
            .map(|j| Complex::new((j as f64).cos(), (j as f64 * 0.7).sin()))
            .collect();
        let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let amps: Vec<Complex<f64>> = amps.iter().map(|z| z / norm).collect();
        let s = SectorState::new(SectorIndex(8), amps, 0.0).unwrap();
        let mk = |m| crate::config::PropagatorSpec {
            method: m,
            step_tol: 1e-11,
            ..Default::default()
        };
        let a = propagate_sector(&s, 1.0, &[0.0, 3.0], &mk(PropagationMethod::SectorExpm)).unwrap();
        let b = propagate_sector(&s, 1.0, &[0.0, 3.0], &mk(PropagationMethod::SectorOde)).unwrap();
        let dev = a[1]
            .amplitudes
            .iter()
            .zip(&b[1].amplitudes)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0f64, f64::max);
        out.push(check(
            "sector_ode_vs_expm",
            dev < 1e-8,
            format!("max amplitude deviation {dev:.2e}"),
        ));
    }

    // mean-field energy integral and optimum-time identities
    {
        let n2_0 = 20.0f64;
        let tr = integrate_meanfield(n2_0, 1.0, 2.0, 201, 1e-11).unwrap();
        let ok = tr.energy_drift <= 1e-9 * 2.0 * n2_0;
        out.push(check(
            "meanfield_energy_integral",
            ok,
            format!("max drift {:.2e}", tr.energy_drift),
        ));

        let tc = t_conv(n2_0).unwrap();
        let ts = t_squeeze(n2_0).unwrap();
        out.push(check(
            "t_conv_twice_t_squeeze",
            tc == 2.0 * ts,
            format!("tau_conv {tc:.6}"),
        ));
        let em = eta_max(n2_0);
        out.push(check(
            "eta_max_closed_form",
            (em.sinh().powi(2) - 2.0 * n2_0).abs() < 1e-9,
            format!("sinh^2(eta_max) = {:.9}", em.sinh().powi(2)),
        ));
    }

    // classical conservation and linearized uncertainty product
    {
        let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 0.05).collect();
        let states = classical_evolve(
            Complex::new(0.2f64, 0.1),
            Complex::new(2.0, 0.0),
            1.0,
            &grid,
        );
        let ok = match states {
            Ok(ss) => {
                let c0 = ss[0].charge();
                ss.iter().all(|s| (s.charge() - c0).abs() / c0 < 1e-9)
            }
            Err(_) => false,
        };
        out.push(check("classical_manley_rowe", ok, "relative drift < 1e-9".into()));

        let o = linearized_observables(0.7f64, 3.0, 1.0);
        let prod = o.var_x1 * o.var_p1;
        out.push(check(
            "linearized_min_uncertainty",
            (prod - 1.0 / 16.0).abs() < 1e-12,
            format!("Var(x1) Var(p1) = {prod:.14}"),
        ));
    }

    // gauge invariance on a small instance
    {
        let cfg = SimConfig::<f64> {
            n2_0: 4.0,
            t_max_scaled: Some(1.5),
            n_points: 9,
            ..Default::default()
        };
        let report = gauge_check(&cfg, std::f64::consts::PI);
        let (pass, detail) = match report {
            Ok(r) => (r.pass, format!("max dev n1 {:.2e}", r.max_dev_n1)),
            Err(e) => (false, e.to_string()),
        };
        out.push(check("gauge_invariance", pass, detail));
    }

    out
}
