//! Built-in verification suites: named checks with one printed line each.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::f64::consts::PI;

use eit_core::dynamics::{evolve_master, EvolveOptions};
use eit_core::hamiltonian::{build_hamiltonian, rabi_from_experiment};
use eit_core::lindblad::{channels_from_spec, lindblad_superoperator, rule_based_gamma};
use eit_core::model::{
    build_basis, derived_gammas, DecoherenceSpec, DensityMatrix, FieldDrive, Mode, PhotonOccupancy,
    Scheme, SystemSpec,
};
use eit_core::optics::{susceptibility_three_level, transparency_fwhm};
use eit_core::qip::{coherent_overlap, dual_rail_metrics_two_level, fidelity_pure};
use eit_core::steadystate::{
    dressed_states_three_level, dual_rail_w10, qss_for_spec, qss_two_level,
};

use crate::error::{CliError, Result};

struct Report {
    failures: u32,
    checks: u32,
}

impl Report {
    fn new() -> Self {
        Report {
            failures: 0,
            checks: 0,
        }
    }

    fn check(&mut self, name: &str, measured: f64, expected: f64, tol: f64) {
        self.checks += 1;
        let ok = (measured - expected).abs() <= tol;
        let verdict = if ok { "PASS" } else { "FAIL" };
        println!("{verdict} {name}: measured={measured:.9} expected={expected:.9} tol={tol:.3e}");
        if !ok {
            self.failures += 1;
        }
    }

    fn bound(&mut self, name: &str, measured: f64, limit: f64) {
        self.checks += 1;
        let ok = measured <= limit;
        let verdict = if ok { "PASS" } else { "FAIL" };
        println!("{verdict} {name}: measured={measured:.3e} limit={limit:.3e}");
        if !ok {
            self.failures += 1;
        }
    }

    fn finish(self, suite: &str) -> bool {
        println!(
            "{suite}: {}/{} checks passed",
            self.checks - self.failures,
            self.checks
        );
        self.failures == 0
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn drive(mode: Mode, rabi: f64, detuning: f64) -> FieldDrive {
    FieldDrive::new(mode, c(rabi, 0.0), detuning, PhotonOccupancy::FockCount(1))
}

/// Closed-form anchors against the published values.
fn paper_anchors() -> bool {
    let mut report = Report::new();

    let qss = qss_two_level(c(0.3, 0.0), 3.0, 1.0, 2.0, 1).unwrap();
    report.check(
        "two_level_lifetime_gamma_tau",
        qss.tau_a,
        55.6,
        0.005 * 55.6,
    );

    let curve = susceptibility_three_level(&[0.0], 0.0, c(0.1, 0.0), 1.0, 0.01).unwrap();
    report.check("residual_absorption_ratio", curve.chi[0].im, 0.5, 1e-12);

    let transparent = susceptibility_three_level(&[0.4], 0.4, c(0.3, 0.0), 1.0, 0.0).unwrap();
    report.check("transparency_exact_zero", transparent.chi[0].im, 0.0, 1e-12);

    let diag = eit_core::optics::resonant_diagnostics(0.1, 1.0, 0.01).unwrap();
    report.check("optimal_control_rabi", diag.optimal_omega_b, 0.10100, 1e-5);
    let ideal = eit_core::optics::resonant_diagnostics(0.1, 1.0, 0.0).unwrap();
    let optimum = eit_core::optics::resonant_diagnostics(diag.optimal_omega_b, 1.0, 0.01).unwrap();
    report.check(
        "dispersion_reduction_quarter",
        optimum.dispersion_shape / ideal.dispersion_shape,
        0.25,
        0.25 * 0.02,
    );

    report.check(
        "transparency_fwhm_unit",
        transparency_fwhm(1.0, 1.0),
        5.0_f64.sqrt() - 1.0,
        1e-12,
    );

    let m30 = dual_rail_metrics_two_level(30.0, 1.0, 0.0, 0.2, 1, -PI).unwrap();
    report.check("gate_fidelity_nu30", m30.fidelity, 0.9503, 1e-4);
    report.check("gate_entropy_nu30", m30.entropy, 0.492, 1e-3);
    report.check("gate_t_pi_nu30", m30.t_for_pi, 750.0 * PI, 1e-9);
    let m4000 = dual_rail_metrics_two_level(4000.0, 1.0, 0.0, 0.2, 1, -PI).unwrap();
    report.check("gate_fidelity_nu4000", m4000.fidelity, 0.99961, 1e-5);
    report.check("gate_entropy_nu4000", m4000.entropy, 0.00923, 1e-4);

    let overlap_at = |alpha_sq: f64| coherent_overlap(1, 5, PI, alpha_sq).unwrap();
    let (mut lo, mut hi) = (1000.0_f64, 1e5_f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if overlap_at(mid) > 0.99 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    report.check(
        "kerr_overlap_threshold",
        0.5 * (lo + hi),
        2.5e4,
        0.1 * 2.5e4,
    );
    report.bound("kerr_overlap_at_1000", overlap_at(1000.0), 0.99);

    let omega_a_sq = rabi_from_experiment(0.2, 1.0, 1.0, 1).unwrap();
    report.check(
        "control_rabi_free_space_ratio",
        (1.0 / omega_a_sq).sqrt(),
        (40.0 * PI).sqrt(),
        1e-9,
    );

    let dressed = dressed_states_three_level(c(3.0, 0.0), c(4.0, 0.0));
    report.check("dressed_splitting_3_4", dressed.splitting, 5.0, 0.0);

    report.finish("paper-anchors")
}

/// Randomized state-invariant checks.
fn invariants(seed: u64) -> bool {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut report = Report::new();

    let deco = DecoherenceSpec::none()
        .with_depop(2, 1.6)
        .unwrap()
        .with_depop(4, 0.7)
        .unwrap()
        .with_dephase(1, 0.1)
        .unwrap()
        .with_dephase(3, 0.2)
        .unwrap();

    // Gamma(rho): trace-free and adjoint-covariant on random complex input.
    let mut worst_trace: f64 = 0.0;
    let mut worst_adjoint: f64 = 0.0;
    let mut worst_equiv: f64 = 0.0;
    for scheme in [Scheme::TwoLevel, Scheme::ThreeLevel, Scheme::FourLevel] {
        let drives = match scheme {
            Scheme::TwoLevel => vec![drive(Mode::A, 0.2, 0.7)],
            Scheme::ThreeLevel => vec![drive(Mode::A, 0.2, 0.7), drive(Mode::B, 0.5, 0.1)],
            Scheme::FourLevel => vec![
                drive(Mode::A, 0.2, 0.7),
                drive(Mode::B, 0.5, 0.1),
                drive(Mode::C, 0.2, 0.4),
            ],
        };
        let spec = SystemSpec::new(scheme, drives, deco.clone())
            .with_dual_rail(scheme == Scheme::TwoLevel);
        let basis = build_basis(&spec).unwrap();
        let gamma = rule_based_gamma(&deco, &basis).unwrap();
        let operator = lindblad_superoperator(&channels_from_spec(&deco, &basis).unwrap()).unwrap();
        for _ in 0..20 {
            let dim = basis.dim();
            let raw = DMatrix::from_fn(dim, dim, |_, _| {
                c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let out = gamma.apply_matrix(&raw).unwrap();
            worst_trace = worst_trace.max(out.diagonal().iter().sum::<Complex64>().norm());
            let lhs = out.adjoint();
            let rhs = gamma.apply_matrix(&raw.adjoint()).unwrap();
            worst_adjoint =
                worst_adjoint.max((lhs - rhs).iter().map(|z| z.norm()).fold(0.0, f64::max));
            let hermitian = (&raw + raw.adjoint()) * c(0.5, 0.0);
            let a = gamma.apply_matrix(&hermitian).unwrap();
            let b = operator.apply_matrix(&hermitian).unwrap();
            worst_equiv = worst_equiv.max((a - b).iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
    }
    report.bound("gamma_trace_free", worst_trace, 1e-12);
    report.bound("gamma_adjoint_covariant", worst_adjoint, 1e-12);
    report.bound("gamma_rule_vs_operator", worst_equiv, 1e-12);

    // Randomized short evolutions keep the state physical.
    let mut worst_drift: f64 = 0.0;
    let mut worst_eig: f64 = 0.0;
    let mut worst_purity: f64 = 0.0;
    let mut worst_herm: f64 = 0.0;
    for _ in 0..6 {
        let scheme = [Scheme::TwoLevel, Scheme::ThreeLevel, Scheme::FourLevel][rng.gen_range(0..3)];
        let drives = match scheme {
            Scheme::TwoLevel => vec![drive(
                Mode::A,
                rng.gen_range(0.05..0.3),
                rng.gen_range(-1.5..1.5),
            )],
            Scheme::ThreeLevel => vec![
                drive(Mode::A, rng.gen_range(0.05..0.3), rng.gen_range(-1.5..1.5)),
                drive(Mode::B, rng.gen_range(0.1..0.6), rng.gen_range(-0.5..0.5)),
            ],
            Scheme::FourLevel => vec![
                drive(Mode::A, rng.gen_range(0.05..0.3), rng.gen_range(-1.5..1.5)),
                drive(Mode::B, rng.gen_range(0.1..0.6), rng.gen_range(-0.5..0.5)),
                drive(Mode::C, rng.gen_range(0.1..0.4), rng.gen_range(-0.8..0.8)),
            ],
        };
        let spec = SystemSpec::new(scheme, drives, deco.clone());
        let h = build_hamiltonian(&spec).unwrap();
        let gamma = rule_based_gamma(&deco, h.basis()).unwrap();
        let rho0 = DensityMatrix::ground_state(h.basis().clone());
        let t_end = 15.0;
        let traj = evolve_master(
            &h,
            &gamma,
            &rho0,
            t_end,
            &EvolveOptions::default().with_stride(100),
        )
        .unwrap();
        worst_drift = worst_drift.max(traj.max_trace_deviation() / t_end);
        worst_eig = worst_eig.max(-traj.min_eigenvalue());
        worst_purity = worst_purity.max(traj.max_purity() - 1.0);
        for state in &traj.states {
            worst_herm = worst_herm.max(state.hermiticity_deviation());
        }
    }
    report.bound("trace_drift_per_unit_time", worst_drift, 1e-9);
    report.bound("negative_eigenvalue_excess", worst_eig, 1e-8);
    report.bound("purity_excess", worst_purity, 1e-9);
    report.bound("hermiticity_deviation", worst_herm, 1e-12);

    report.finish("invariants")
}

/// Analytic-versus-numeric comparisons.
fn oracle() -> bool {
    let mut report = Report::new();

    // Two-level envelope decay at 1/tau_a.
    let spec = SystemSpec::new(
        Scheme::TwoLevel,
        vec![drive(Mode::A, 0.3, 3.0)],
        DecoherenceSpec::none().with_depop(2, 2.0).unwrap(),
    );
    let qss = qss_for_spec(&spec).unwrap();
    let h = build_hamiltonian(&spec).unwrap();
    let gamma = rule_based_gamma(&spec.decoherence, h.basis()).unwrap();
    let rho0 = DensityMatrix::ground_state(h.basis().clone());
    let traj = evolve_master(
        &h,
        &gamma,
        &rho0,
        130.0,
        &EvolveOptions::default().with_stride(100),
    )
    .unwrap();
    let at = |t_want: f64| {
        let idx = traj.times.iter().position(|t| *t >= t_want).unwrap();
        traj.states[idx].element(1, 0).norm()
    };
    let rate = (at(25.0) / at(125.0)).ln() / 100.0;
    report.check("two_level_envelope_decay_rate", rate * qss.tau_a, 1.0, 0.05);

    // Three-level QSS element against the integrated ratio.
    let spec = SystemSpec::new(
        Scheme::ThreeLevel,
        vec![drive(Mode::A, 0.02, 2.0), drive(Mode::B, 0.5, 0.0)],
        DecoherenceSpec::none()
            .with_depop(2, 2.0)
            .unwrap()
            .with_dephase(3, 0.1)
            .unwrap(),
    );
    let qss = qss_for_spec(&spec).unwrap();
    let h = build_hamiltonian(&spec).unwrap();
    let gamma = rule_based_gamma(&spec.decoherence, h.basis()).unwrap();
    let rho0 = DensityMatrix::ground_state(h.basis().clone());
    let t_probe = 300.0;
    let traj = evolve_master(
        &h,
        &gamma,
        &rho0,
        t_probe,
        &EvolveOptions::default().with_stride(100_000),
    )
    .unwrap();
    let end = traj.final_state();
    let measured = end.element(1, 0) / end.element(0, 0).re;
    report.check(
        "three_level_qss_element_ratio",
        (measured - qss.rho21_tilde()).norm() / qss.rho21_tilde().norm(),
        0.0,
        0.01,
    );

    // Damped dual-rail phase against the analytic shift.
    let spec = SystemSpec::new(
        Scheme::TwoLevel,
        vec![drive(Mode::A, 0.1, 12.0)],
        DecoherenceSpec::none().with_depop(2, 2.0).unwrap(),
    )
    .with_dual_rail(true);
    let h = build_hamiltonian(&spec).unwrap();
    let gamma = rule_based_gamma(&spec.decoherence, h.basis()).unwrap();
    let basis = build_basis(&spec).unwrap();
    let amp = c(0.5_f64.sqrt(), 0.0);
    let rho0 = DensityMatrix::pure(basis, &[amp, c(0.0, 0.0), c(0.0, 0.0), amp]).unwrap();
    let gammas = derived_gammas(&spec.decoherence, spec.scheme);
    let rail = dual_rail_w10(spec.scheme, &spec.drives, &gammas, 1, None).unwrap();
    let t_end = 60.0;
    let traj = evolve_master(
        &h,
        &gamma,
        &rho0,
        t_end,
        &EvolveOptions::default().with_stride(100_000),
    )
    .unwrap();
    let measured = traj.final_state().element(0, 3).arg();
    let analytic = rail.rho10_at(t_end).arg();
    report.check(
        "dual_rail_phase",
        (measured - analytic).abs() / analytic.abs(),
        0.0,
        0.01,
    );

    // Gate fidelity at nu / gamma_20 = 30 against the closed form.
    let spec = SystemSpec::new(
        Scheme::TwoLevel,
        vec![drive(Mode::A, 0.05, 30.0)],
        DecoherenceSpec::none().with_depop(2, 2.0).unwrap(),
    )
    .with_dual_rail(true);
    let h = build_hamiltonian(&spec).unwrap();
    let gamma = rule_based_gamma(&spec.decoherence, h.basis()).unwrap();
    let basis = build_basis(&spec).unwrap();
    let rho0 = DensityMatrix::pure(basis, &[amp, c(0.0, 0.0), c(0.0, 0.0), amp]).unwrap();
    let t_q = PI * 30.0 / 0.0025;
    let traj = evolve_master(
        &h,
        &gamma,
        &rho0,
        t_q,
        &EvolveOptions::default()
            .with_step(0.02)
            .with_stride(1_000_000),
    )
    .unwrap();
    let s = 0.5_f64.sqrt();
    let target = [c(-s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)];
    let f_numeric = fidelity_pure(&target, traj.final_state()).unwrap();
    let analytic = dual_rail_metrics_two_level(30.0, 1.0, 0.0, 0.05, 1, -PI).unwrap();
    report.check(
        "dual_rail_gate_fidelity_nu30",
        f_numeric,
        analytic.fidelity,
        5e-3,
    );

    report.finish("oracle")
}

/// Run one suite by name; `Ok(true)` when every check passed.
pub fn run_suite(name: &str, seed: u64) -> Result<bool> {
    match name {
        "paper-anchors" => Ok(paper_anchors()),
        "invariants" => Ok(invariants(seed)),
        "oracle" => Ok(oracle()),
        other => Err(CliError::validation(format!(
            "unknown suite `{other}`; expected one of invariants, paper-anchors, oracle"
        ))),
    }
}
