//! Quantum optics of coherent population transfer in 2-, 3-, and 4-level
//! atoms coupled to quantized fields with Lindblad decoherence.
//!
//! The crate covers the full chain from model construction to gate-level
//! observables:
//!
//! - [`model`]: system specifications, labeled manifold bases, density
//!   matrices, and the pairwise decoherence coefficients.
//! - [`lindblad`]: decoherence superoperators, built from coefficient rules
//!   (the production path) and from explicit Lindblad operators (the
//!   verification path).
//! - [`hamiltonian`]: manifold Hamiltonians and experimental Rabi estimates.
//! - [`dynamics`]: RK4 master-equation integration plus closed-form
//!   undamped evolutions.
//! - [`steadystate`]: quasi-steady-state elements, complex frequency
//!   shifts, time constants, validity windows, and dressed states.
//! - [`optics`]: normalized susceptibilities, transparency metrics, and
//!   refractive-index/absorption curves.
//! - [`qip`]: dual-rail gate metrics, fidelity/entropy, cross-Kerr
//!   coefficients, and coherent-state overlap sums.
//!
//! All quantities are expressed in units of a single reference rate
//! (conventionally `gamma_21 = 1`); time is the dimensionless rate-time
//! product.
//!
//! ```
//! use eit_core::qss_three_level;
//! use num_complex::Complex64;
//!
//! // Ideal three-level medium at two-photon resonance: the probe coherence
//! // vanishes exactly and the population hides in the dark superposition.
//! let probe = Complex64::new(0.01, 0.0);
//! let control = Complex64::new(0.3, 0.0);
//! let qss = qss_three_level(probe, control, 0.0, 0.0, 1.0, 0.0).unwrap();
//! assert_eq!(qss.rho21_tilde(), Complex64::new(0.0, 0.0));
//! assert!((qss.rho31_tilde().unwrap() + probe / control).norm() < 1e-15);
//! ```

pub mod dynamics;
pub mod error;
pub mod hamiltonian;
pub mod lindblad;
pub mod model;
pub mod optics;
pub mod qip;
pub mod steadystate;

pub use dynamics::{
    default_step, evolve_master, evolve_unitary_two_level, generalized_rabi,
    undamped_dual_rail_elements, DualRailElements, EvolveOptions, StepDiagnostics, Trajectory,
};
pub use error::{Error, Result};
pub use hamiltonian::{build_hamiltonian, rabi_from_experiment, spontaneous_rate, Hamiltonian};
pub use lindblad::{
    apply_gamma, channels_from_spec, lindblad_superoperator, rule_based_gamma, ChannelKind,
    GammaCoefficients, LindbladChannel, LindbladSuperoperator,
};
pub use model::{
    build_basis, build_basis_with_max, derived_gammas, AtomState, Basis, BasisLabel,
    DecoherenceSpec, DensityMatrix, DerivedGammas, FieldDrive, Mode, PhotonOccupancy, Scheme,
    SystemSpec, DEFAULT_MAX_DIM,
};
pub use optics::{
    eta_kappa, kerr_series_coefficient, kerr_susceptibility_shape, linspace, resonant_diagnostics,
    susceptibility_three_level, susceptibility_two_level, transparency_fwhm, EtaKappa,
    ResonantDiagnostics, SpectralCurve,
};
pub use qip::{
    coherent_overlap, conditional_gate_error, dual_rail_metrics_four_level,
    dual_rail_metrics_two_level, entropy, fidelity, fidelity_pure, kerr_fock_evolution,
    kerr_phase_factor, kerr_w, phase_milestones, GateMetrics, KerrResult, PhaseMilestone,
    RegimeFlags,
};
pub use steadystate::{
    dressed_states_three_level, dual_rail_w10, gamma20_tilde, nu_tilde_c, qss_for_spec,
    qss_four_level, qss_three_level, qss_two_level, semiclassical_shift, w10_four_level_reduced,
    w10_four_level_resonant, DressedStates, DualRailSolution, QssSolution, ValidityWindow,
};
