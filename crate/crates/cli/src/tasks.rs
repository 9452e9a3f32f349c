//! Task execution: map one scenario (or one sweep point) onto the library
//! operations and tabulate the observables.

use num_complex::Complex64;

use eit_core::dynamics::{evolve_master, EvolveOptions};
use eit_core::hamiltonian::build_hamiltonian;
use eit_core::lindblad::rule_based_gamma;
use eit_core::model::{build_basis, derived_gammas, DensityMatrix, Mode, Scheme, SystemSpec};
use eit_core::optics::{
    eta_kappa, kerr_susceptibility_shape, susceptibility_three_level, susceptibility_two_level,
};
use eit_core::qip::{
    coherent_overlap, conditional_gate_error, dual_rail_metrics_four_level,
    dual_rail_metrics_two_level, phase_milestones,
};
use eit_core::steadystate::{dressed_states_three_level, qss_for_spec};

use crate::error::{CliError, Result};
use crate::scenario::{InitialStateIn, ScenarioDoc, TaskIn};
use crate::table::ResultTable;

fn flag(value: Option<bool>) -> f64 {
    match value {
        None => -1.0,
        Some(false) => 0.0,
        Some(true) => 1.0,
    }
}

fn bool_col(value: bool) -> f64 {
    if value {
        1.0
    } else {
        0.0
    }
}

/// Execute the scenario's task for one fully resolved document.
pub fn run_task(doc: &ScenarioDoc) -> Result<ResultTable> {
    let spec = doc.system.to_spec()?;
    match &doc.task {
        TaskIn::Evolve {
            t_end,
            step,
            stride,
            initial_state,
            elements,
        } => evolve_task(
            &spec,
            *t_end,
            *step,
            *stride,
            initial_state,
            elements.as_deref(),
        ),
        TaskIn::Steady => steady_task(&spec),
        TaskIn::Spectrum { axis } => spectrum_task(&spec, &axis.points()?),
        TaskIn::GateMetrics { target_phase } => gate_metrics_task(&spec, *target_phase),
        TaskIn::KerrOverlap {
            n_a,
            n_c,
            phi,
            alpha_sq,
        } => {
            let mut table =
                ResultTable::new(vec!["alpha_sq".into(), "overlap".into(), "error".into()]);
            for mu in alpha_sq.points()? {
                let overlap = coherent_overlap(*n_a, *n_c, *phi, mu)?;
                let error = conditional_gate_error(*n_a, *n_c, *phi, mu)?;
                table.push_row(vec![mu, overlap, error]);
            }
            Ok(table)
        }
        TaskIn::Dressed => dressed_task(&spec),
        TaskIn::Milestones { q_max } => milestones_task(&spec, *q_max),
    }
}

fn evolve_task(
    spec: &SystemSpec,
    t_end: f64,
    step: Option<f64>,
    stride: usize,
    initial_state: &InitialStateIn,
    elements: Option<&[[usize; 2]]>,
) -> Result<ResultTable> {
    let hamiltonian = build_hamiltonian(spec)?;
    let gamma = rule_based_gamma(&spec.decoherence, hamiltonian.basis())?;
    let basis = build_basis(spec)?;
    let dim = basis.dim();
    let rho0 = match initial_state {
        InitialStateIn::Ground => DensityMatrix::ground_state(basis),
        InitialStateIn::DualRail => {
            let rail = basis.rail_index().ok_or_else(|| {
                CliError::validation("task.initial_state: dual-rail needs system.dual_rail = true")
            })?;
            let mut amps = vec![Complex64::default(); dim];
            amps[0] = Complex64::new(0.5_f64.sqrt(), 0.0);
            amps[rail] = Complex64::new(0.5_f64.sqrt(), 0.0);
            DensityMatrix::pure(basis, &amps)?
        }
        InitialStateIn::Amplitudes(list) => {
            let amps: Vec<Complex64> = list.iter().map(|c| Complex64::from(*c)).collect();
            DensityMatrix::pure(basis, &amps)?
        }
    };
    let selected: Vec<[usize; 2]> = match elements {
        Some(list) => {
            for e in list {
                if e[0] >= dim || e[1] >= dim {
                    return Err(CliError::validation(format!(
                        "task.elements: [{}, {}] out of range for dimension {dim}",
                        e[0], e[1]
                    )));
                }
            }
            list.to_vec()
        }
        None => {
            let mut list: Vec<[usize; 2]> = (0..dim).map(|i| [i, 0]).collect();
            list.extend((1..dim).map(|i| [i, i]));
            list
        }
    };
    let mut columns = vec!["t".to_string()];
    for e in &selected {
        columns.push(format!("rho_{}_{}_re", e[0], e[1]));
        columns.push(format!("rho_{}_{}_im", e[0], e[1]));
    }
    columns.extend(["trace_dev".into(), "min_eig".into(), "purity".into()]);
    let options = EvolveOptions {
        step,
        snapshot_stride: stride,
        ..EvolveOptions::default()
    };
    let trajectory = evolve_master(&hamiltonian, &gamma, &rho0, t_end, &options)?;
    let mut table = ResultTable::new(columns);
    for ((t, state), diag) in trajectory
        .times
        .iter()
        .zip(&trajectory.states)
        .zip(&trajectory.diagnostics)
    {
        let mut row = Vec::with_capacity(2 * selected.len() + 4);
        row.push(*t);
        for e in &selected {
            let z = state.element(e[0], e[1]);
            row.push(z.re);
            row.push(z.im);
        }
        row.push(diag.trace_deviation);
        row.push(diag.min_eigenvalue);
        row.push(diag.purity);
        table.push_row(row);
    }
    Ok(table)
}

fn steady_task(spec: &SystemSpec) -> Result<ResultTable> {
    let qss = qss_for_spec(spec)?;
    let columns = vec![
        "rho21_re".into(),
        "rho21_im".into(),
        "rho31_re".into(),
        "rho31_im".into(),
        "rho41_re".into(),
        "rho41_im".into(),
        "tau_a".into(),
        "validity_lower".into(),
        "validity_upper".into(),
        "satisfiable".into(),
        "saturation_warning".into(),
        "w10_re".into(),
        "w10_im".into(),
    ];
    let opt = |z: Option<Complex64>| z.map(|z| (z.re, z.im)).unwrap_or((f64::NAN, f64::NAN));
    let (r21re, r21im) = (qss.rho21_tilde().re, qss.rho21_tilde().im);
    let (r31re, r31im) = opt(qss.rho31_tilde());
    let (r41re, r41im) = opt(qss.rho41_tilde());
    let (w10re, w10im) = opt(qss.w10);
    let mut table = ResultTable::new(columns);
    table.push_row(vec![
        r21re,
        r21im,
        r31re,
        r31im,
        r41re,
        r41im,
        qss.tau_a,
        qss.validity.lower,
        qss.validity.upper,
        bool_col(qss.validity.satisfiable),
        bool_col(qss.saturation_warning),
        w10re,
        w10im,
    ]);
    Ok(table)
}

fn spectrum_task(spec: &SystemSpec, axis: &[f64]) -> Result<ResultTable> {
    let g = derived_gammas(&spec.decoherence, spec.scheme);
    let curve = match spec.scheme {
        Scheme::TwoLevel => susceptibility_two_level(axis, g.gamma21)?,
        Scheme::ThreeLevel => {
            let b = spec.drive(Mode::B).expect("validated");
            susceptibility_three_level(axis, b.detuning, b.rabi, g.gamma21, g.gamma31)?
        }
        Scheme::FourLevel => {
            let b = spec.drive(Mode::B).expect("validated");
            let c = spec.drive(Mode::C).expect("validated");
            kerr_susceptibility_shape(
                axis, b.detuning, c.detuning, b.rabi, c.rabi, g.gamma21, g.gamma31, g.gamma41,
            )?
        }
    };
    let ek = eta_kappa(&curve)?;
    let mut table = ResultTable::new(vec![
        "nu_a".into(),
        "chi_re".into(),
        "chi_im".into(),
        "eta".into(),
        "kappa".into(),
        "deta_dnu".into(),
    ]);
    for i in 0..curve.axis.len() {
        table.push_row(vec![
            curve.axis[i],
            curve.chi[i].re,
            curve.chi[i].im,
            ek.eta[i],
            ek.kappa[i],
            ek.deta_dnu[i],
        ]);
    }
    Ok(table)
}

fn gate_metrics_task(spec: &SystemSpec, target_phase: f64) -> Result<ResultTable> {
    let g = derived_gammas(&spec.decoherence, spec.scheme);
    let a = spec.drive(Mode::A).expect("validated");
    let metrics = match spec.scheme {
        Scheme::TwoLevel => dual_rail_metrics_two_level(
            a.detuning,
            g.gamma20,
            g.gamma10,
            a.rabi.norm(),
            spec.atom_count,
            target_phase,
        )?,
        Scheme::FourLevel => {
            let b = spec.drive(Mode::B).expect("validated");
            let c = spec.drive(Mode::C).expect("validated");
            dual_rail_metrics_four_level(
                a.rabi.norm(),
                b.rabi.norm(),
                c.rabi.norm(),
                c.detuning,
                g.gamma20,
                g.gamma40,
                spec.atom_count,
                target_phase,
            )?
        }
        Scheme::ThreeLevel => return Err(CliError::validation(
            "task gate-metrics: the dual-rail gate is defined for two-level and four-level schemes",
        )),
    };
    let mut table = ResultTable::new(vec![
        "phase".into(),
        "t_for_target".into(),
        "t_for_pi".into(),
        "fidelity".into(),
        "entropy".into(),
        "deco2".into(),
        "schmlim".into(),
        "suppress".into(),
        "nondem".into(),
    ]);
    table.push_row(vec![
        metrics.phase,
        metrics.t_for_target,
        metrics.t_for_pi,
        metrics.fidelity,
        metrics.entropy,
        flag(metrics.regime_flags.deco2),
        flag(metrics.regime_flags.schmlim),
        flag(metrics.regime_flags.suppress),
        flag(metrics.regime_flags.nondem),
    ]);
    Ok(table)
}

fn dressed_task(spec: &SystemSpec) -> Result<ResultTable> {
    if spec.scheme != Scheme::ThreeLevel {
        return Err(CliError::validation(
            "task dressed: dressed states are defined for the three-level scheme",
        ));
    }
    let a = spec.drive(Mode::A).expect("validated");
    let b = spec.drive(Mode::B).expect("validated");
    let d = dressed_states_three_level(a.rabi, b.rabi);
    let mut columns: Vec<String> = vec![
        "splitting".into(),
        "ev_dark".into(),
        "ev_lower".into(),
        "ev_upper".into(),
        "degenerate".into(),
    ];
    for i in 0..4 {
        columns.push(format!("dark_{i}_re"));
        columns.push(format!("dark_{i}_im"));
    }
    let mut row = vec![
        d.splitting,
        d.eigenvalues[0],
        d.eigenvalues[1],
        d.eigenvalues[2],
        bool_col(d.degenerate),
    ];
    for z in d.dark {
        row.push(z.re);
        row.push(z.im);
    }
    let mut table = ResultTable::new(columns);
    table.push_row(row);
    Ok(table)
}

fn milestones_task(spec: &SystemSpec, q_max: u32) -> Result<ResultTable> {
    if q_max == 0 {
        return Err(CliError::validation("task.q_max: must be >= 1"));
    }
    let a = spec.drive(Mode::A).expect("validated");
    if a.rabi.im != 0.0 || a.rabi.re <= 0.0 {
        return Err(CliError::validation(
            "task milestones: drive a must have a real positive Rabi frequency",
        ));
    }
    let mut table = ResultTable::new(vec![
        "q".into(),
        "nu_a".into(),
        "t_q".into(),
        "phi_q".into(),
    ]);
    for q in 1..=q_max {
        let m = phase_milestones(a.rabi.re, q)?;
        table.push_row(vec![q as f64, m.nu_a, m.t_q, m.phi_q]);
    }
    Ok(table)
}
