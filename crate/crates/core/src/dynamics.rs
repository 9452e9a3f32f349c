//! Direct integration of the density-matrix equation of motion,
//! d(rho)/dt = i [M, rho] - Gamma(rho), with M the sign-factored Hamiltonian
//! matrix, plus closed-form undamped evolutions for cross-validation.
//!
//! The integrator is classical fixed-step RK4. Trace is never renormalized;
//! drift is reported as a diagnostic so integrator bugs stay visible.

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::lindblad::GammaCoefficients;
use crate::model::{hermitian_eigenvalues, DensityMatrix};

/// Per-snapshot integration health numbers.
#[derive(Clone, Copy, Debug)]
pub struct StepDiagnostics {
    pub time: f64,
    /// |trace(rho) - 1|
    pub trace_deviation: f64,
    pub min_eigenvalue: f64,
    /// tr(rho^2)
    pub purity: f64,
}

/// Snapshots of one integration run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub diagnostics: Vec<StepDiagnostics>,
}

impl Trajectory {
    pub fn final_state(&self) -> &DensityMatrix {
        self.states
            .last()
            .expect("trajectory holds at least the initial state")
    }

    pub fn max_trace_deviation(&self) -> f64 {
        self.diagnostics
            .iter()
            .map(|d| d.trace_deviation)
            .fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.diagnostics
            .iter()
            .map(|d| d.min_eigenvalue)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_purity(&self) -> f64 {
        self.diagnostics
            .iter()
            .map(|d| d.purity)
            .fold(0.0, f64::max)
    }

    /// Time series of one density-matrix element.
    pub fn element_series(&self, i: usize, j: usize) -> Vec<Complex64> {
        self.states.iter().map(|s| s.element(i, j)).collect()
    }
}

/// Integration controls.
#[derive(Clone, Copy, Debug)]
pub struct EvolveOptions {
    /// Step size; `None` selects `1e-3 / max(max |M|, max gamma, 1)`.
    pub step: Option<f64>,
    /// Snapshots (and divergence checks) every this many steps.
    pub snapshot_stride: usize,
    /// Step-halving adaptivity.
    pub adaptive: bool,
    /// Per-step tolerance for the adaptive mode.
    pub adaptive_tol: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            step: None,
            snapshot_stride: 100,
            adaptive: false,
            adaptive_tol: 1e-10,
        }
    }
}

impl EvolveOptions {
    pub fn with_step(mut self, step: f64) -> Self {
        self.step = Some(step);
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.snapshot_stride = stride.max(1);
        self
    }
}

/// The default step `1e-3 / max(max |M_ij|, max gamma_ij, 1)`.
pub fn default_step(hamiltonian: &Hamiltonian, gamma: &GammaCoefficients) -> f64 {
    let h_scale = hamiltonian
        .matrix()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let g_scale = gamma.matrix().iter().copied().fold(0.0, f64::max);
    1e-3 / h_scale.max(g_scale).max(1.0)
}

/// Integrate d(rho)/dt = i [M, rho] - Gamma(rho) from `rho0` to `t_end`.
pub fn evolve_master(
    hamiltonian: &Hamiltonian,
    gamma: &GammaCoefficients,
    rho0: &DensityMatrix,
    t_end: f64,
    options: &EvolveOptions,
) -> Result<Trajectory> {
    let dim = hamiltonian.dim();
    if gamma.dim() != dim {
        return Err(Error::DimensionMismatch {
            left: dim,
            right: gamma.dim(),
        });
    }
    if rho0.dim() != dim {
        return Err(Error::DimensionMismatch {
            left: dim,
            right: rho0.dim(),
        });
    }
    if t_end <= 0.0 || !t_end.is_finite() {
        return Err(Error::invalid(
            "evolve",
            format!("t_end must be finite and > 0, got {t_end}"),
        ));
    }
    let h = options
        .step
        .unwrap_or_else(|| default_step(hamiltonian, gamma));
    if h <= 0.0 || !h.is_finite() {
        return Err(Error::invalid(
            "evolve",
            format!("step must be finite and > 0, got {h}"),
        ));
    }

    let m: Vec<Complex64> = hamiltonian.matrix().as_slice().to_vec();
    let g: Vec<f64> = gamma.matrix().as_slice().to_vec();
    let env = gamma.env_index();
    let basis = hamiltonian.basis().clone();
    let mut ws = Workspace::new(dim, rho0.data().as_slice().to_vec());

    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut diagnostics = Vec::new();
    let mut record = |t: f64, rho: &[Complex64]| -> Result<()> {
        if rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::IntegrationDiverged { time: t });
        }
        let data = DMatrix::from_column_slice(dim, dim, rho);
        let trace: Complex64 = data.diagonal().iter().sum();
        let min_eig = hermitian_eigenvalues(&data)?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        let state = DensityMatrix::from_integrator(basis.clone(), data);
        diagnostics.push(StepDiagnostics {
            time: t,
            trace_deviation: (trace - Complex64::new(1.0, 0.0)).norm(),
            min_eigenvalue: min_eig,
            purity: state.purity(),
        });
        times.push(t);
        states.push(state);
        Ok(())
    };

    record(0.0, &ws.rho)?;
    let stride = options.snapshot_stride.max(1);
    let mut t = 0.0;
    let mut steps_since_snapshot = 0usize;

    if options.adaptive {
        let mut step = h.min(t_end);
        while t < t_end {
            let dt = step.min(t_end - t);
            let full = ws.try_step(&m, &g, env, dt);
            let halved = ws.try_two_half_steps(&m, &g, env, dt);
            let err = full
                .iter()
                .zip(&halved)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            if err > options.adaptive_tol && dt > 1e-12 * t_end {
                step = dt / 2.0;
                continue;
            }
            ws.rho.copy_from_slice(&halved);
            t += dt;
            if err < options.adaptive_tol / 64.0 {
                step = (step * 2.0).min(h.max(step * 2.0));
            }
            steps_since_snapshot += 1;
            if steps_since_snapshot >= stride || t >= t_end {
                record(t, &ws.rho)?;
                steps_since_snapshot = 0;
            }
        }
    } else {
        let n_full = (t_end / h).floor() as u64;
        let remainder = t_end - n_full as f64 * h;
        for i in 1..=n_full {
            ws.step_in_place(&m, &g, env, h);
            t = i as f64 * h;
            steps_since_snapshot += 1;
            if steps_since_snapshot >= stride {
                record(t, &ws.rho)?;
                steps_since_snapshot = 0;
            }
        }
        if remainder > f64::EPSILON * t_end {
            ws.step_in_place(&m, &g, env, remainder);
            steps_since_snapshot += 1;
        }
        t = t_end;
        if steps_since_snapshot > 0 {
            record(t, &ws.rho)?;
        }
    }

    Ok(Trajectory {
        times,
        states,
        diagnostics,
    })
}

struct Workspace {
    dim: usize,
    rho: Vec<Complex64>,
    k1: Vec<Complex64>,
    k2: Vec<Complex64>,
    k3: Vec<Complex64>,
    k4: Vec<Complex64>,
    tmp: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl Workspace {
    fn new(dim: usize, rho: Vec<Complex64>) -> Self {
        let z = vec![Complex64::default(); dim * dim];
        Workspace {
            dim,
            rho,
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            tmp: z.clone(),
            scratch: z,
        }
    }

    fn step_in_place(&mut self, m: &[Complex64], g: &[f64], env: usize, h: f64) {
        let d = self.dim;
        deriv(d, m, g, env, &self.rho, &mut self.k1);
        combine(&mut self.tmp, &self.rho, &self.k1, 0.5 * h);
        deriv(d, m, g, env, &self.tmp, &mut self.k2);
        combine(&mut self.tmp, &self.rho, &self.k2, 0.5 * h);
        deriv(d, m, g, env, &self.tmp, &mut self.k3);
        combine(&mut self.tmp, &self.rho, &self.k3, h);
        deriv(d, m, g, env, &self.tmp, &mut self.k4);
        let w = h / 6.0;
        for i in 0..d * d {
            self.rho[i] += (self.k1[i] + (self.k2[i] + self.k3[i]) * 2.0 + self.k4[i]) * w;
        }
    }

    /// One trial step of size `h` without advancing the state.
    fn try_step(&mut self, m: &[Complex64], g: &[f64], env: usize, h: f64) -> Vec<Complex64> {
        let saved = self.rho.clone();
        self.step_in_place(m, g, env, h);
        std::mem::replace(&mut self.rho, saved)
    }

    fn try_two_half_steps(
        &mut self,
        m: &[Complex64],
        g: &[f64],
        env: usize,
        h: f64,
    ) -> Vec<Complex64> {
        let saved = self.rho.clone();
        self.step_in_place(m, g, env, 0.5 * h);
        self.step_in_place(m, g, env, 0.5 * h);
        self.scratch.copy_from_slice(&self.rho);
        self.rho = saved;
        self.scratch.clone()
    }
}

fn combine(out: &mut [Complex64], base: &[Complex64], k: &[Complex64], w: f64) {
    for ((o, b), kv) in out.iter_mut().zip(base).zip(k) {
        *o = b + kv * w;
    }
}

/// out = i (M rho - rho M) - gamma o rho, with the environment diagonal
/// balancing the decaying populations.
fn deriv(
    d: usize,
    m: &[Complex64],
    g: &[f64],
    env: usize,
    rho: &[Complex64],
    out: &mut [Complex64],
) {
    match d {
        2 => deriv_fixed::<2>(m, g, env, rho, out),
        3 => deriv_fixed::<3>(m, g, env, rho, out),
        4 => deriv_fixed::<4>(m, g, env, rho, out),
        5 => deriv_fixed::<5>(m, g, env, rho, out),
        6 => deriv_fixed::<6>(m, g, env, rho, out),
        7 => deriv_fixed::<7>(m, g, env, rho, out),
        8 => deriv_fixed::<8>(m, g, env, rho, out),
        _ => deriv_dyn(d, m, g, env, rho, out),
    }
}

fn deriv_fixed<const D: usize>(
    m: &[Complex64],
    g: &[f64],
    env: usize,
    rho: &[Complex64],
    out: &mut [Complex64],
) {
    assert!(
        m.len() == D * D && g.len() == D * D && rho.len() == D * D && out.len() == D * D && env < D
    );
    for j in 0..D {
        for i in 0..D {
            let mut acc = Complex64::default();
            for k in 0..D {
                acc += m[i + k * D] * rho[k + j * D] - rho[i + k * D] * m[k + j * D];
            }
            let idx = i + j * D;
            out[idx] = Complex64::new(-acc.im, acc.re) - rho[idx] * g[idx];
        }
    }
    let mut balance = Complex64::default();
    for j in 0..D {
        if j != env {
            balance += rho[j + j * D] * g[j + j * D];
        }
    }
    out[env + env * D] += balance;
}

fn deriv_dyn(
    d: usize,
    m: &[Complex64],
    g: &[f64],
    env: usize,
    rho: &[Complex64],
    out: &mut [Complex64],
) {
    assert!(
        m.len() == d * d && g.len() == d * d && rho.len() == d * d && out.len() == d * d && env < d
    );
    for j in 0..d {
        for i in 0..d {
            let mut acc = Complex64::default();
            for k in 0..d {
                acc += m[i + k * d] * rho[k + j * d] - rho[i + k * d] * m[k + j * d];
            }
            let idx = i + j * d;
            out[idx] = Complex64::new(-acc.im, acc.re) - rho[idx] * g[idx];
        }
    }
    let mut balance = Complex64::default();
    for j in 0..d {
        if j != env {
            balance += rho[j + j * d] * g[j + j * d];
        }
    }
    out[env + env * d] += balance;
}

/// Generalized Rabi frequency of the driven two-level manifold,
/// `sqrt(nu_a^2 + 4 |Omega_a|^2) / 2`.
pub fn generalized_rabi(omega_a: Complex64, nu_a: f64) -> f64 {
    0.5 * (nu_a * nu_a + 4.0 * omega_a.norm_sqr()).sqrt()
}

/// Closed-form evolution operator of the bare two-level manifold.
///
/// `U(0) = I`; unitary for all finite inputs.
pub fn evolve_unitary_two_level(omega_a: Complex64, nu_a: f64, t: f64) -> Matrix2<Complex64> {
    let rabi = generalized_rabi(omega_a, nu_a);
    if rabi == 0.0 {
        return Matrix2::identity();
    }
    let phase = Complex64::new(0.0, 0.5 * nu_a * t).exp();
    let (s, c) = (rabi * t).sin_cos();
    let beta = Complex64::new(0.0, 0.5 * nu_a / rabi * s);
    let diag = Complex64::new(c, 0.0);
    let off = Complex64::new(0.0, s / rabi);
    Matrix2::new(
        phase * (diag - beta),
        phase * off * omega_a.conj(),
        phase * off * omega_a,
        phase * (diag + beta),
    )
}

/// The five nonzero density-matrix elements of the undamped dual-rail system
/// prepared in `(|1,0,0,n_a> + |1,n_a,0,0>) / sqrt(2)`.
#[derive(Clone, Copy, Debug)]
pub struct DualRailElements {
    pub rho11: f64,
    pub rho22: f64,
    pub rho21: Complex64,
    pub rho10: Complex64,
    pub rho20: Complex64,
}

pub fn undamped_dual_rail_elements(omega_a: Complex64, nu_a: f64, t: f64) -> DualRailElements {
    let rabi = generalized_rabi(omega_a, nu_a);
    if rabi == 0.0 {
        return DualRailElements {
            rho11: 0.5,
            rho22: 0.0,
            rho21: Complex64::default(),
            rho10: Complex64::new(0.5, 0.0),
            rho20: Complex64::default(),
        };
    }
    let (s, c) = (rabi * t).sin_cos();
    let phase = Complex64::new(0.0, 0.5 * nu_a * t).exp();
    let frac = omega_a.norm_sqr() / (rabi * rabi);
    let beta = 0.5 * nu_a / rabi;
    let rho11 = 0.5 * (1.0 - frac * s * s);
    let rho22 = 0.5 * frac * s * s;
    let i_half = Complex64::new(0.0, 0.5);
    let rho21 = i_half * (omega_a / rabi) * s * Complex64::new(c, beta * s);
    let rho10 = 0.5 * phase * Complex64::new(c, -beta * s);
    let rho20 = i_half * (omega_a / rabi) * phase * s;
    DualRailElements {
        rho11,
        rho22,
        rho21,
        rho10,
        rho20,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::build_hamiltonian;
    use crate::lindblad::rule_based_gamma;
    use crate::model::{
        build_basis, DecoherenceSpec, FieldDrive, Mode, PhotonOccupancy, Scheme, SystemSpec,
    };

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn two_level(omega: Complex64, nu: f64, deco: DecoherenceSpec, dual_rail: bool) -> SystemSpec {
        SystemSpec::new(
            Scheme::TwoLevel,
            vec![FieldDrive::new(
                Mode::A,
                omega,
                nu,
                PhotonOccupancy::FockCount(1),
            )],
            deco,
        )
        .with_dual_rail(dual_rail)
    }

    #[test]
    fn free_evolution_is_constant() {
        let spec = two_level(c(0.0, 0.0), 0.0, DecoherenceSpec::none(), false);
        let h = build_hamiltonian(&spec).unwrap();
        let g = rule_based_gamma(&spec.decoherence, h.basis()).unwrap();
        let rho0 = DensityMatrix::ground_state(h.basis().clone());
        let traj = evolve_master(
            &h,
            &g,
            &rho0,
            5.0,
            &EvolveOptions::default().with_step(1e-2),
        )
        .unwrap();
        let end = traj.final_state();
        assert!((end.element(0, 0).re - 1.0).abs() < 1e-14);
        assert!(end.element(1, 1).norm() < 1e-14);
    }

    #[test]
    fn undamped_rabi_oscillation_matches_closed_form() {
        let omega = c(0.3, 0.0);
        let nu = 0.8;
        let spec = two_level(omega, nu, DecoherenceSpec::none(), false);
        let h = build_hamiltonian(&spec).unwrap();
        let g = rule_based_gamma(&spec.decoherence, h.basis()).unwrap();
        let rho0 = DensityMatrix::ground_state(h.basis().clone());
        let rabi = generalized_rabi(omega, nu);
        let t_end = 20.0 / rabi;
        let traj = evolve_master(
            &h,
            &g,
            &rho0,
            t_end,
            &EvolveOptions::default().with_stride(10),
        )
        .unwrap();
        let mut max_err: f64 = 0.0;
        for (t, state) in traj.times.iter().zip(&traj.states) {
            let s = (rabi * t).sin();
            let expected = omega.norm_sqr() / (rabi * rabi) * s * s;
            max_err = max_err.max((state.element(1, 1).re - expected).abs());
        }
        assert!(max_err < 1e-8, "max error {max_err}");
    }

    #[test]
    fn numeric_matches_unitary_for_complex_rabi() {
        let omega = c(0.2, 0.15);
        let nu = 0.6;
        let spec = two_level(omega, nu, DecoherenceSpec::none(), false);
        let h = build_hamiltonian(&spec).unwrap();
        let g = rule_based_gamma(&spec.decoherence, h.basis()).unwrap();
        let rho0 = DensityMatrix::ground_state(h.basis().clone());
        let t_end = 7.0;
        let traj = evolve_master(&h, &g, &rho0, t_end, &EvolveOptions::default()).unwrap();
        let u = evolve_unitary_two_level(omega, nu, t_end);
        let end = traj.final_state();
        // rho(t) = U rho U^+ on the 2x2 block for a ground start.
        let expect_11 = u[(0, 0)] * u[(0, 0)].conj();
        let expect_21 = u[(1, 0)] * u[(0, 0)].conj();
        let expect_22 = u[(1, 0)] * u[(1, 0)].conj();
        assert!((end.element(0, 0) - expect_11).norm() < 1e-8);
        assert!((end.element(1, 0) - expect_21).norm() < 1e-8);
        assert!((end.element(1, 1) - expect_22).norm() < 1e-8);
    }

    #[test]
    fn unitary_closed_form_properties() {
        let u0 = evolve_unitary_two_level(c(0.3, 0.1), 1.3, 0.0);
        assert!((u0 - Matrix2::identity()).iter().all(|z| z.norm() < 1e-15));

        // nu = 0, real drive, t = pi / (2 Omega): off-diagonal flip times i.
        let omega = 0.4;
        let u = evolve_unitary_two_level(c(omega, 0.0), 0.0, std::f64::consts::FRAC_PI_2 / omega);
        assert!(u[(0, 0)].norm() < 1e-12);
        assert!((u[(0, 1)] - c(0.0, 1.0)).norm() < 1e-12);
        assert!((u[(1, 0)] - c(0.0, 1.0)).norm() < 1e-12);

        for (omega, nu, t) in [
            (c(0.3, 0.7), 2.0, 3.3),
            (c(0.0, 0.0), 1.5, 2.0),
            (c(1.0, -0.4), -0.9, 11.0),
        ] {
            let u = evolve_unitary_two_level(omega, nu, t);
            let prod = u.adjoint() * u;
            assert!((prod - Matrix2::identity())
                .iter()
                .all(|z| z.norm() < 1e-12));
            assert!((u.determinant().norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dual_rail_undamped_elements_match_integrator() {
        let omega = c(0.25, 0.1);
        let nu = 0.7;
        let spec = two_level(omega, nu, DecoherenceSpec::none(), true);
        let h = build_hamiltonian(&spec).unwrap();
        let g = rule_based_gamma(&spec.decoherence, h.basis()).unwrap();
        let basis = build_basis(&spec).unwrap();
        let amp = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let rho0 = DensityMatrix::pure(basis, &[amp, c(0.0, 0.0), c(0.0, 0.0), amp]).unwrap();
        let t_end = 15.0;
        let traj = evolve_master(
            &h,
            &g,
            &rho0,
            t_end,
            &EvolveOptions::default().with_stride(25),
        )
        .unwrap();
        for (t, state) in traj.times.iter().zip(&traj.states) {
            let a = undamped_dual_rail_elements(omega, nu, *t);
            assert!((state.element(0, 0).re - a.rho11).abs() < 1e-8);
            assert!((state.element(1, 1).re - a.rho22).abs() < 1e-8);
            assert!((state.element(1, 0) - a.rho21).norm() < 1e-8);
            assert!((state.element(0, 3) - a.rho10).norm() < 1e-8);
            assert!((state.element(1, 3) - a.rho20).norm() < 1e-8);
            assert!((a.rho11 + a.rho22 - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn dual_rail_initial_condition() {
        let a = undamped_dual_rail_elements(c(0.3, 0.0), 1.0, 0.0);
        assert_eq!(a.rho10, c(0.5, 0.0));
        assert_eq!(a.rho22, 0.0);
    }

    #[test]
    fn dual_rail_milestone_phase() {
        // t = q pi / Omega_R: rho22 = 0, |rho10| = 1/2,
        // arg rho10 = -(1 - nu / 2 Omega_R) q pi.
        let omega = c(0.3, 0.0);
        let nu = 0.9;
        let rabi = generalized_rabi(omega, nu);
        for q in 1..=4 {
            let t = q as f64 * std::f64::consts::PI / rabi;
            let a = undamped_dual_rail_elements(omega, nu, t);
            assert!(a.rho22.abs() < 1e-12);
            assert!((a.rho10.norm() - 0.5).abs() < 1e-12);
            let expected = -(1.0 - 0.5 * nu / rabi) * q as f64 * std::f64::consts::PI;
            let diff = (a.rho10.arg() - expected).rem_euclid(2.0 * std::f64::consts::PI);
            let wrapped = diff.min(2.0 * std::f64::consts::PI - diff);
            assert!(wrapped < 1e-10, "q = {q}: phase off by {wrapped}");
        }
    }

    #[test]
    fn resonant_q1_phase_is_minus_pi() {
        let omega = 0.25;
        let t = std::f64::consts::PI / omega;
        let a = undamped_dual_rail_elements(c(omega, 0.0), 0.0, t);
        let diff = (a.rho10.arg() + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI);
        let wrapped = diff.min(2.0 * std::f64::consts::PI - diff);
        assert!(wrapped < 1e-12);
    }

    #[test]
    fn damped_two_level_trace_drift_at_default_step() {
        let deco = DecoherenceSpec::none().with_depop(2, 2.0).unwrap();
        let spec = two_level(c(0.3, 0.0), 3.0, deco, false);
        let h = build_hamiltonian(&spec).unwrap();
        let g = rule_based_gamma(&spec.decoherence, h.basis()).unwrap();
        let rho0 = DensityMatrix::ground_state(h.basis().clone());
        let t_end = 20.0;
        let traj = evolve_master(&h, &g, &rho0, t_end, &EvolveOptions::default()).unwrap();
        assert!(
            traj.max_trace_deviation() / t_end <= 1e-9,
            "drift {:.3e}",
            traj.max_trace_deviation()
        );
        assert!(traj.min_eigenvalue() >= -1e-8);
        assert!(traj.max_purity() <= 1.0 + 1e-9);
    }

    #[test]
    fn adaptive_matches_fixed_step() {
        let deco = DecoherenceSpec::none().with_depop(2, 1.0).unwrap();
        let spec = two_level(c(0.2, 0.0), 1.0, deco, false);
        let h = build_hamiltonian(&spec).unwrap();
        let g = rule_based_gamma(&spec.decoherence, h.basis()).unwrap();
        let rho0 = DensityMatrix::ground_state(h.basis().clone());
        let fixed = evolve_master(
            &h,
            &g,
            &rho0,
            8.0,
            &EvolveOptions::default().with_step(1e-3),
        )
        .unwrap();
        let mut opts = EvolveOptions::default().with_step(5e-2);
        opts.adaptive = true;
        let adaptive = evolve_master(&h, &g, &rho0, 8.0, &opts).unwrap();
        let a = fixed.final_state();
        let b = adaptive.final_state();
        for i in 0..3 {
            for j in 0..3 {
                assert!((a.element(i, j) - b.element(i, j)).norm() < 1e-7);
            }
        }
    }

    #[test]
    fn divergent_step_is_reported() {
        let deco = DecoherenceSpec::none().with_depop(2, 1.0).unwrap();
        let spec = two_level(c(0.2, 0.0), 400.0, deco, false);
        let h = build_hamiltonian(&spec).unwrap();
        let g = rule_based_gamma(&spec.decoherence, h.basis()).unwrap();
        let rho0 = DensityMatrix::ground_state(h.basis().clone());
        // Step far beyond the stability limit for |M| = 400.
        let result = evolve_master(
            &h,
            &g,
            &rho0,
            2000.0,
            &EvolveOptions::default().with_step(0.8).with_stride(5),
        );
        assert!(matches!(result, Err(Error::IntegrationDiverged { .. })));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let spec2 = two_level(c(0.1, 0.0), 0.0, DecoherenceSpec::none(), false);
        let spec3 = SystemSpec::new(
            Scheme::ThreeLevel,
            vec![
                FieldDrive::classical(Mode::A, 0.1, 0.0),
                FieldDrive::classical(Mode::B, 0.4, 0.0),
            ],
            DecoherenceSpec::none(),
        );
        let h2 = build_hamiltonian(&spec2).unwrap();
        let g3 = rule_based_gamma(&spec3.decoherence, &build_basis(&spec3).unwrap()).unwrap();
        let rho0 = DensityMatrix::ground_state(h2.basis().clone());
        assert!(matches!(
            evolve_master(&h2, &g3, &rho0, 1.0, &EvolveOptions::default()),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
