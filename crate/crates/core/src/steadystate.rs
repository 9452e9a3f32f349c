//! Quasi-steady-state (QSS) solutions: off-diagonal elements, complex
//! frequency shifts, time constants, validity windows, and dressed states.
//!
//! Every scheme shares one continued-fraction ladder. With
//! `p = nu_a + i gamma_21`, `q_3 = nu_a - nu_b + i gamma_31`,
//! `q_4 = nu_a - nu_b + nu_c + i gamma_41`:
//!
//! ```text
//! z_4 = q_4
//! z_3 = q_3 - |Omega_c|^2 / z_4
//! z_2 = p   - |Omega_b|^2 / z_3
//! rho_21 = -Omega_a / z_2
//! rho_31 = -rho_21 conj(Omega_b) / z_3
//! rho_41 = -rho_31 Omega_c / z_4
//! ```
//!
//! A zero coupling truncates the ladder, so the four-level solution with
//! `Omega_c = 0` is the three-level solution (and so on down to two levels)
//! not just analytically but bit for bit.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{derived_gammas, DerivedGammas, FieldDrive, Mode, Scheme, SystemSpec};

/// Margin used for the strict `<<` inequalities of the validity windows.
pub const VALIDITY_MARGIN: f64 = 10.0;

/// Relative threshold below which a ladder denominator counts as an exact pole.
const SINGULAR_TOL: f64 = 1e-12;

/// Probe strength above which the unsaturated approximation is suspect.
const SATURATION_RATIO: f64 = 0.3;

/// Time window in which the QSS elements approximate the true evolution.
#[derive(Clone, Copy, Debug)]
pub struct ValidityWindow {
    /// Slowest transient time, `max_k 1 / gamma_k1`.
    pub lower: f64,
    /// The ground-population decay time `tau_a`.
    pub upper: f64,
    /// Whether `upper / lower` exceeds the margin [`VALIDITY_MARGIN`].
    pub satisfiable: bool,
}

impl ValidityWindow {
    fn new(lower: f64, upper: f64) -> Self {
        let satisfiable = upper / lower > VALIDITY_MARGIN;
        ValidityWindow {
            lower,
            upper,
            satisfiable,
        }
    }

    /// Re-evaluate the window against a caller-chosen margin instead of the
    /// default [`VALIDITY_MARGIN`].
    pub fn satisfiable_with_margin(&self, margin: f64) -> bool {
        self.upper / self.lower > margin
    }
}

#[derive(Clone, Copy, Debug)]
enum Evaluator {
    /// Oscillatory transient of the two-level element, plus the rho_22 form.
    TwoLevel {
        nu_a: f64,
        gamma21: f64,
        gamma22: f64,
    },
    /// Real `(1 - e^{-gamma_k1 t})` envelopes.
    Multi,
}

/// Closed-form quasi-steady-state solution for one scheme.
#[derive(Clone, Debug)]
pub struct QssSolution {
    pub scheme: Scheme,
    pub n_atoms: u32,
    /// Per-atom elements keyed by level pair: (2,1), (3,1), (4,1).
    pub elements: BTreeMap<(u8, u8), Complex64>,
    /// Ground-population decay time for the full `n_atoms` system.
    pub tau_a: f64,
    /// Dual-rail complex frequency shift, when one was requested.
    pub w10: Option<Complex64>,
    pub validity: ValidityWindow,
    /// Rates of the `(1 - e^{-gamma_k1 t})` transient envelopes.
    pub transient_rates: BTreeMap<(u8, u8), f64>,
    /// Set when `|Omega_a| / gamma_21` exceeds 0.3 and the unsaturated
    /// approximation becomes questionable.
    pub saturation_warning: bool,
    omega_a: Complex64,
    evaluator: Evaluator,
}

impl QssSolution {
    pub fn rho21_tilde(&self) -> Complex64 {
        self.elements[&(2, 1)]
    }

    pub fn rho31_tilde(&self) -> Option<Complex64> {
        self.elements.get(&(3, 1)).copied()
    }

    pub fn rho41_tilde(&self) -> Option<Complex64> {
        self.elements.get(&(4, 1)).copied()
    }

    /// Aggregate coherence of the ensemble, `N rho_21`.
    pub fn aggregate_rho21(&self) -> Complex64 {
        self.rho21_tilde() * self.n_atoms as f64
    }

    /// Ground population `e^{-t / tau_a}`.
    pub fn rho11_at(&self, t: f64) -> f64 {
        (-t / self.tau_a).exp()
    }

    /// Excited population of the two-level scheme,
    /// `(1 - e^{-gamma_22 t}) / (gamma_22 tau_a) e^{-t / tau_a}`.
    pub fn rho22_at(&self, t: f64) -> Option<f64> {
        match self.evaluator {
            Evaluator::TwoLevel { gamma22, .. } => {
                let envelope = if gamma22 == 0.0 {
                    t
                } else {
                    (1.0 - (-gamma22 * t).exp()) / gamma22
                };
                Some(envelope / self.tau_a * self.rho11_at(t))
            }
            Evaluator::Multi => None,
        }
    }

    /// Time-dependent off-diagonal element `rho_k1(t)`.
    pub fn element_at(&self, pair: (u8, u8), t: f64) -> Option<Complex64> {
        let tilde = self.elements.get(&pair)?;
        let envelope = match self.evaluator {
            Evaluator::TwoLevel { nu_a, gamma21, .. } if pair == (2, 1) => {
                Complex64::new(1.0, 0.0)
                    - (Complex64::new(0.0, 1.0) * Complex64::new(nu_a, gamma21) * t).exp()
            }
            _ => {
                let rate = self
                    .transient_rates
                    .get(&pair)
                    .copied()
                    .unwrap_or(f64::INFINITY);
                Complex64::new(1.0 - (-rate * t).exp(), 0.0)
            }
        };
        Some(tilde * envelope * self.rho11_at(t))
    }

    pub fn omega_a(&self) -> Complex64 {
        self.omega_a
    }
}

/// Shared ladder state. `minors[i]` is the determinant of the ladder below
/// rung `i`, so every element is a
/// ratio of polynomials in the `q`s rather than a nested quotient; exact
/// poles like the transparency point stay finite.
struct Ladder {
    /// `minors[0]` is the full response denominator.
    minors: Vec<Complex64>,
    elements: Vec<Complex64>,
}

/// `rungs[k] = (coupling, q, conjugate_in_recursion)`; `rungs[0]` holds
/// `(Omega_a, p, _)`. A zero coupling truncates the ladder, which is what
/// makes the limit-reduction chain exact.
fn qss_ladder(rungs: &[(Complex64, Complex64, bool)]) -> Result<Ladder> {
    let m = rungs.len();
    // Deepest rung still coupled in.
    let mut active = m - 1;
    for (i, rung) in rungs.iter().enumerate().skip(1) {
        if rung.0 == Complex64::default() {
            active = i - 1;
            break;
        }
    }
    // minors[i] = q_i minors[i+1] - |coupling_{i+1}|^2 minors[i+2],
    // with the identity padding minors[active+1] = 1, minors[active+2] = 0.
    let mut minors = vec![Complex64::default(); active + 3];
    minors[active + 1] = Complex64::new(1.0, 0.0);
    let mut scale = vec![0.0f64; active + 1];
    #[allow(clippy::needless_range_loop)]
    for i in (0..=active).rev() {
        let q = rungs[i].1;
        let head = q * minors[i + 1];
        let tail = if i < active {
            minors[i + 2] * rungs[i + 1].0.norm_sqr()
        } else {
            Complex64::default()
        };
        minors[i] = head - tail;
        scale[i] = head.norm() + tail.norm();
    }
    let omega_a = rungs[0].0;
    let mut elements = vec![Complex64::default(); m];
    if omega_a != Complex64::default() {
        if minors[0] == Complex64::default() && scale[0] == 0.0 {
            return Err(Error::NoSteadyState(
                "all detunings and decoherence rates vanish while the probe drive is nonzero"
                    .into(),
            ));
        }
        if minors[0].norm() < SINGULAR_TOL * scale[0] {
            return Err(Error::SingularParameters(
                "response denominator vanishes relative to its terms".into(),
            ));
        }
        let mut prefix = omega_a;
        let mut sign = -1.0;
        for k in 0..m {
            if k > 0 {
                let (coupling, _, conj) = rungs[k];
                if coupling == Complex64::default() {
                    break;
                }
                prefix *= if conj { coupling.conj() } else { coupling };
                sign = -sign;
            }
            elements[k] = prefix * minors[k + 1] / minors[0] * sign;
        }
    }
    Ok(Ladder { minors, elements })
}

fn tau_from(rho21: Complex64, omega_a: Complex64, n_atoms: u32) -> f64 {
    let rate = 2.0 * n_atoms as f64 * (rho21 * omega_a.conj()).im;
    if rate > 0.0 {
        1.0 / rate
    } else {
        f64::INFINITY
    }
}

fn check_rates(rates: &[(&'static str, f64)]) -> Result<()> {
    for (name, v) in rates {
        if !v.is_finite() || *v < 0.0 {
            return Err(Error::invalid(
                "qss",
                format!("{name} must be finite and >= 0, got {v}"),
            ));
        }
    }
    Ok(())
}

fn saturated(omega_a: Complex64, gamma21: f64) -> bool {
    omega_a.norm() > SATURATION_RATIO * gamma21
}

/// Two-level QSS: `rho_21 = -Omega_a / (nu_a + i gamma_21)` with
/// `1 / tau_a(N) = 2 N gamma_21 |Omega_a|^2 / (nu_a^2 + gamma_21^2)`.
///
/// ```
/// let qss = eit_core::qss_two_level(num_complex::Complex64::new(0.3, 0.0), 3.0, 1.0, 2.0, 1).unwrap();
/// assert!((qss.tau_a - 55.56).abs() < 0.01);
/// ```
pub fn qss_two_level(
    omega_a: Complex64,
    nu_a: f64,
    gamma21: f64,
    gamma22: f64,
    n_atoms: u32,
) -> Result<QssSolution> {
    check_rates(&[("gamma21", gamma21), ("gamma22", gamma22)])?;
    if n_atoms == 0 {
        return Err(Error::invalid("qss", "n_atoms must be >= 1"));
    }
    let p = Complex64::new(nu_a, gamma21);
    let ladder = qss_ladder(&[(omega_a, p, false)])?;
    let rho21 = ladder.elements[0];
    let tau_a = tau_from(rho21, omega_a, n_atoms);
    Ok(QssSolution {
        scheme: Scheme::TwoLevel,
        n_atoms,
        elements: BTreeMap::from([((2, 1), rho21)]),
        tau_a,
        w10: None,
        validity: ValidityWindow::new(1.0 / gamma21, tau_a),
        transient_rates: BTreeMap::from([((2, 1), gamma21)]),
        saturation_warning: saturated(omega_a, gamma21),
        omega_a,
        evaluator: Evaluator::TwoLevel {
            nu_a,
            gamma21,
            gamma22,
        },
    })
}

/// Three-level QSS in the unsaturated weak-field limit.
pub fn qss_three_level(
    omega_a: Complex64,
    omega_b: Complex64,
    nu_a: f64,
    nu_b: f64,
    gamma21: f64,
    gamma31: f64,
) -> Result<QssSolution> {
    check_rates(&[("gamma21", gamma21), ("gamma31", gamma31)])?;
    let p = Complex64::new(nu_a, gamma21);
    let q3 = Complex64::new(nu_a - nu_b, gamma31);
    let ladder = qss_ladder(&[(omega_a, p, false), (omega_b, q3, true)])?;
    let rho21 = ladder.elements[0];
    let tau_a = tau_from(rho21, omega_a, 1);
    Ok(QssSolution {
        scheme: Scheme::ThreeLevel,
        n_atoms: 1,
        elements: BTreeMap::from([((2, 1), rho21), ((3, 1), ladder.elements[1])]),
        tau_a,
        w10: None,
        validity: ValidityWindow::new((1.0 / gamma21).max(1.0 / gamma31), tau_a),
        transient_rates: BTreeMap::from([((2, 1), gamma21), ((3, 1), gamma31)]),
        saturation_warning: saturated(omega_a, gamma21),
        omega_a,
        evaluator: Evaluator::Multi,
    })
}

/// Four-level QSS in the unsaturated weak-field limit; `Omega_c = 0`
/// reproduces [`qss_three_level`] exactly.
#[allow(clippy::too_many_arguments)]
pub fn qss_four_level(
    omega_a: Complex64,
    omega_b: Complex64,
    omega_c: Complex64,
    nu_a: f64,
    nu_b: f64,
    nu_c: f64,
    gamma21: f64,
    gamma31: f64,
    gamma41: f64,
) -> Result<QssSolution> {
    check_rates(&[
        ("gamma21", gamma21),
        ("gamma31", gamma31),
        ("gamma41", gamma41),
    ])?;
    let p = Complex64::new(nu_a, gamma21);
    let q3 = Complex64::new(nu_a - nu_b, gamma31);
    let q4 = Complex64::new(nu_a - nu_b + nu_c, gamma41);
    let ladder = qss_ladder(&[
        (omega_a, p, false),
        (omega_b, q3, true),
        (omega_c, q4, false),
    ])?;
    let rho21 = ladder.elements[0];
    let tau_a = tau_from(rho21, omega_a, 1);
    Ok(QssSolution {
        scheme: Scheme::FourLevel,
        n_atoms: 1,
        elements: BTreeMap::from([
            ((2, 1), rho21),
            ((3, 1), ladder.elements[1]),
            ((4, 1), ladder.elements[2]),
        ]),
        tau_a,
        w10: None,
        validity: ValidityWindow::new((1.0 / gamma21).max(1.0 / gamma31).max(1.0 / gamma41), tau_a),
        transient_rates: BTreeMap::from([((2, 1), gamma21), ((3, 1), gamma31), ((4, 1), gamma41)]),
        saturation_warning: saturated(omega_a, gamma21),
        omega_a,
        evaluator: Evaluator::Multi,
    })
}

/// Effective detuning of the simplified four-level dual-rail shift,
/// `nu~_c = (|Omega_b|^2 / |Omega_c|^2) nu_c`.
pub fn nu_tilde_c(omega_b_sq: f64, omega_c_sq: f64, nu_c: f64) -> f64 {
    omega_b_sq / omega_c_sq * nu_c
}

/// Effective width `gamma~_20 = gamma_20 + (|Omega_b|^2 / |Omega_c|^2) gamma_40`.
pub fn gamma20_tilde(omega_b_sq: f64, omega_c_sq: f64, gamma20: f64, gamma40: f64) -> f64 {
    gamma20 + omega_b_sq / omega_c_sq * gamma40
}

/// Resonant four-level shift in its raw form,
/// `W_10 = -N A C / (nu_c B + i (gamma_40 B + gamma_20 C))`
/// with `A = |Omega_a|^2`, `B = |Omega_b|^2`, `C = |Omega_c|^2`.
pub fn w10_four_level_resonant(
    n_atoms: u32,
    omega_a_sq: f64,
    omega_b_sq: f64,
    omega_c_sq: f64,
    nu_c: f64,
    gamma20: f64,
    gamma40: f64,
) -> Complex64 {
    let denom = Complex64::new(
        nu_c * omega_b_sq,
        gamma40 * omega_b_sq + gamma20 * omega_c_sq,
    );
    -Complex64::new(n_atoms as f64 * omega_a_sq * omega_c_sq, 0.0) / denom
}

/// The same shift written through the effective two-level parameters,
/// `W_10 = -(nu~_c - i gamma~_20) / (nu~_c^2 + gamma~_20^2) N |Omega_a|^2`.
pub fn w10_four_level_reduced(
    n_atoms: u32,
    omega_a_sq: f64,
    omega_b_sq: f64,
    omega_c_sq: f64,
    nu_c: f64,
    gamma20: f64,
    gamma40: f64,
) -> Complex64 {
    let nu = nu_tilde_c(omega_b_sq, omega_c_sq, nu_c);
    let gamma = gamma20_tilde(omega_b_sq, omega_c_sq, gamma20, gamma40);
    Complex64::new(-nu, gamma) * (n_atoms as f64 * omega_a_sq / (nu * nu + gamma * gamma))
}

/// Dual-rail coherence solution: the complex shift `W_10` plus an evaluator
/// for `rho_10(t) = 1/2 exp[(-gamma_10 + i W_10) t - transient(t)]`.
#[derive(Clone, Copy, Debug)]
pub struct DualRailSolution {
    pub w10: Complex64,
    /// Effective dephasing of the rail coherence. For `n_atoms > 1` this is
    /// the substituted value `N gamma'_21 / 4` (see [`dual_rail_w10`]).
    pub gamma10: f64,
    /// Transient parameters; present for the two-level scheme only.
    transient: Option<(f64, f64, f64)>,
}

impl DualRailSolution {
    pub fn rho10_at(&self, t: f64) -> Complex64 {
        let mut exponent = (Complex64::new(0.0, 1.0) * self.w10 - self.gamma10) * t;
        if let Some((nu_a, gamma20, n_omega_sq)) = self.transient {
            let pole = Complex64::new(nu_a, gamma20);
            let osc = (Complex64::new(0.0, 1.0) * pole * t).exp();
            exponent -= (Complex64::new(1.0, 0.0) - osc) / (pole * pole) * n_omega_sq;
        }
        0.5 * exponent.exp()
    }

    /// Linear phase accumulated by time `t`, `Re(W_10) t`.
    pub fn phase_at(&self, t: f64) -> f64 {
        self.w10.re * t
    }
}

/// Complex frequency shift of the dual-rail coherence for any scheme, via the
/// same ladder as the QSS elements but over the rail coefficients
/// `gamma_k0`. The `n_atoms` substitution scales `|Omega_a|^2` by N and
/// replaces `gamma_10` by `N gamma'_21 / 4`; the rate `gamma'_21` is not
/// pinned down by the derivation, so it defaults to `gamma'_2` (= `gamma_22`)
/// and can be overridden.
pub fn dual_rail_w10(
    scheme: Scheme,
    drives: &[FieldDrive],
    gammas: &DerivedGammas,
    n_atoms: u32,
    gamma_prime_21_override: Option<f64>,
) -> Result<DualRailSolution> {
    if drives.len() != scheme.mode_count() {
        return Err(Error::invalid(
            "dual_rail",
            format!(
                "{scheme} scheme needs {} drives, got {}",
                scheme.mode_count(),
                drives.len()
            ),
        ));
    }
    if n_atoms == 0 {
        return Err(Error::invalid("dual_rail", "n_atoms must be >= 1"));
    }
    let omega_a = drives[0].rabi;
    let nu_a = drives[0].detuning;
    let mut rungs = vec![(omega_a, Complex64::new(nu_a, gammas.gamma20), false)];
    if let Some(b) = drives.get(Mode::B.index()) {
        rungs.push((
            b.rabi,
            Complex64::new(nu_a - b.detuning, gammas.gamma30),
            true,
        ));
        if let Some(c) = drives.get(Mode::C.index()) {
            rungs.push((
                c.rabi,
                Complex64::new(nu_a - b.detuning + c.detuning, gammas.gamma40),
                false,
            ));
        }
    }
    let ladder = qss_ladder(&rungs)?;
    let w10 = if omega_a == Complex64::default() {
        Complex64::default()
    } else {
        -Complex64::new(n_atoms as f64 * omega_a.norm_sqr(), 0.0) * ladder.minors[1]
            / ladder.minors[0]
    };
    let gamma10 = if n_atoms == 1 {
        gammas.gamma10
    } else {
        n_atoms as f64 * gamma_prime_21_override.unwrap_or(gammas.gamma22) / 4.0
    };
    let transient = (scheme == Scheme::TwoLevel)
        .then(|| (nu_a, gammas.gamma20, n_atoms as f64 * omega_a.norm_sqr()));
    Ok(DualRailSolution {
        w10,
        gamma10,
        transient,
    })
}

/// Convenience shift for semiclassical bookkeeping:
/// `W_a = rho_21^{N} conj(Omega_a) / n_a`.
pub fn semiclassical_shift(aggregate_rho21: Complex64, omega_a: Complex64, n_a: f64) -> Complex64 {
    aggregate_rho21 * omega_a.conj() / n_a
}

/// Dressed states of the resonantly driven three-level manifold.
#[derive(Clone, Debug)]
pub struct DressedStates {
    /// `Omega_R = sqrt(|Omega_a|^2 + |Omega_b|^2)`.
    pub splitting: f64,
    /// Hamiltonian eigenvalues in rate units: `[0, -Omega_R, +Omega_R]`.
    pub eigenvalues: [f64; 3],
    /// Dark state: no amplitude on the excited label.
    pub dark: [Complex64; 4],
    /// Eigenvector for `-Omega_R`.
    pub lower: [Complex64; 4],
    /// Eigenvector for `+Omega_R`.
    pub upper: [Complex64; 4],
    /// Both drives vanish; eigenvalues degenerate to `{0, 0, 0}`.
    pub degenerate: bool,
    excited_fraction: f64,
}

impl DressedStates {
    /// Population of the excited label from a ground start,
    /// `|Omega_a / Omega_R|^2 sin^2(Omega_R t)`.
    pub fn excited_population(&self, t: f64) -> f64 {
        if self.degenerate {
            return 0.0;
        }
        let s = (self.splitting * t).sin();
        self.excited_fraction * s * s
    }
}

/// Diagonalize the resonant (`nu_a = nu_b = 0`) three-level manifold.
pub fn dressed_states_three_level(omega_a: Complex64, omega_b: Complex64) -> DressedStates {
    let rabi_sq = omega_a.norm_sqr() + omega_b.norm_sqr();
    let zero = Complex64::default();
    if rabi_sq == 0.0 {
        return DressedStates {
            splitting: 0.0,
            eigenvalues: [0.0; 3],
            dark: [Complex64::new(1.0, 0.0), zero, zero, zero],
            lower: [zero, Complex64::new(1.0, 0.0), zero, zero],
            upper: [zero, zero, Complex64::new(1.0, 0.0), zero],
            degenerate: true,
            excited_fraction: 0.0,
        };
    }
    let rabi = rabi_sq.sqrt();
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let dark = [-omega_b / rabi, zero, omega_a / rabi, zero];
    let lower = [
        omega_a.conj() / rabi * inv_sqrt2,
        Complex64::new(inv_sqrt2, 0.0),
        omega_b.conj() / rabi * inv_sqrt2,
        zero,
    ];
    let upper = [
        omega_a.conj() / rabi * inv_sqrt2,
        Complex64::new(-inv_sqrt2, 0.0),
        omega_b.conj() / rabi * inv_sqrt2,
        zero,
    ];
    DressedStates {
        splitting: rabi,
        eigenvalues: [0.0, -rabi, rabi],
        dark,
        lower,
        upper,
        degenerate: false,
        excited_fraction: omega_a.norm_sqr() / rabi_sq,
    }
}

/// Scheme-dispatching convenience: QSS elements for a full [`SystemSpec`],
/// with the dual-rail shift filled in when the system is dual-rail.
pub fn qss_for_spec(spec: &SystemSpec) -> Result<QssSolution> {
    spec.validate()?;
    let g = derived_gammas(&spec.decoherence, spec.scheme);
    let a = spec.drive(Mode::A).expect("validated");
    let mut solution = match spec.scheme {
        Scheme::TwoLevel => {
            qss_two_level(a.rabi, a.detuning, g.gamma21, g.gamma22, spec.atom_count)?
        }
        Scheme::ThreeLevel => {
            let b = spec.drive(Mode::B).expect("validated");
            qss_three_level(a.rabi, b.rabi, a.detuning, b.detuning, g.gamma21, g.gamma31)?
        }
        Scheme::FourLevel => {
            let b = spec.drive(Mode::B).expect("validated");
            let c = spec.drive(Mode::C).expect("validated");
            qss_four_level(
                a.rabi, b.rabi, c.rabi, a.detuning, b.detuning, c.detuning, g.gamma21, g.gamma31,
                g.gamma41,
            )?
        }
    };
    if spec.dual_rail {
        let rail = dual_rail_w10(spec.scheme, &spec.drives, &g, spec.atom_count, None)?;
        solution.w10 = Some(rail.w10);
    }
    Ok(solution)
}
