//! Gate-level results: dual-rail phase accumulation, fidelity and entropy
//! metrics, cross-Kerr coefficients, and coherent-state overlap sums.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{hermitian_eigen, hermitian_eigenvalues, DensityMatrix, FieldDrive, Mode};

/// Margin used for the strict `<<` comparisons behind the regime flags.
const REGIME_MARGIN: f64 = 10.0;

/// Eigenvalues no more negative than this are clipped to zero; anything
/// worse is a positivity error.
const EIGEN_CLIP: f64 = 1e-9;

/// Uhlmann fidelity `F(rho1, rho2) = tr sqrt(sqrt(rho1) rho2 sqrt(rho1))`,
/// via Hermitian eigendecomposition with negative eigenvalues clipped at
/// -1e-9 (an error beyond that).
pub fn fidelity(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimensionMismatch {
            left: rho1.dim(),
            right: rho2.dim(),
        });
    }
    let sqrt1 = matrix_sqrt(rho1.data())?;
    let inner = &sqrt1 * rho2.data() * &sqrt1;
    // Hermitian up to roundoff; symmetrize before decomposing.
    let inner = (&inner + inner.adjoint()) * Complex64::new(0.5, 0.0);
    let eigs = hermitian_eigenvalues(&inner)?;
    // Roundoff noise near zero would be amplified by the square root, so
    // eigenvalues below 1e-13 of the largest are dropped.
    let cutoff = 1e-13 * eigs.iter().copied().fold(0.0, f64::max).max(0.0);
    let mut f = 0.0;
    for lambda in eigs {
        if lambda < -EIGEN_CLIP {
            return Err(Error::NotPositive {
                min_eigenvalue: lambda,
            });
        }
        if lambda > cutoff {
            f += lambda.sqrt();
        }
    }
    Ok(f.min(1.0))
}

/// Pure-state fidelity `F(psi, rho) = sqrt(<psi|rho|psi>)`.
pub fn fidelity_pure(psi: &[Complex64], rho: &DensityMatrix) -> Result<f64> {
    if psi.len() != rho.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: psi.len(),
        });
    }
    let norm_sq: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    if (norm_sq - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(
            "state",
            format!("psi has norm^2 = {norm_sq}, expected 1"),
        ));
    }
    let mut expect = Complex64::default();
    for (i, a) in psi.iter().enumerate() {
        for (j, b) in psi.iter().enumerate() {
            expect += a.conj() * rho.element(i, j) * b;
        }
    }
    if expect.re < -EIGEN_CLIP {
        return Err(Error::NotPositive {
            min_eigenvalue: expect.re,
        });
    }
    Ok(expect.re.max(0.0).sqrt().min(1.0))
}

fn matrix_sqrt(m: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let (eigs, vecs) = hermitian_eigen(m)?;
    let dim = m.nrows();
    let mut out = DMatrix::<Complex64>::zeros(dim, dim);
    for (k, lambda) in eigs.iter().enumerate() {
        if *lambda < -EIGEN_CLIP {
            return Err(Error::NotPositive {
                min_eigenvalue: *lambda,
            });
        }
        let root = lambda.max(0.0).sqrt();
        let col = vecs.column(k);
        for i in 0..dim {
            for j in 0..dim {
                out[(i, j)] += col[i] * col[j].conj() * root;
            }
        }
    }
    Ok(out)
}

/// Von Neumann entropy in bits, `S = -sum_j lambda_j log2(lambda_j)` over the
/// nonzero eigenvalues. Small negative eigenvalues from roundoff are clipped
/// to zero and skipped.
pub fn entropy(rho: &DensityMatrix) -> Result<f64> {
    let eigs = hermitian_eigenvalues(rho.data())?;
    Ok(eigs
        .into_iter()
        .filter(|&l| l > 0.0)
        .map(|l| -l * l.log2())
        .sum())
}

/// The asymptotic dual-rail entropy `S = x (1 - ln x) log2(e)` with
/// `x = |phase| gamma / nu`.
fn entropy_asymptotic(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * (1.0 - x.ln()) * std::f64::consts::LOG2_E
    }
}

/// Which of the operating-regime inequalities hold (margin 10 per strict
/// inequality); `None` when a flag does not apply to the scheme at hand.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RegimeFlags {
    /// `|Omega_a| << gamma_20 << nu_a < sqrt(N gamma_20 / gamma_10) |Omega_a|`.
    pub deco2: Option<bool>,
    /// `(B/gamma_20)(nu_c/gamma_40) >> B/gamma_20 >> C/gamma_40`.
    pub schmlim: Option<bool>,
    /// `(B/gamma_20)(nu_c/gamma_40) >> C/gamma_40 >> B/gamma_20`.
    pub suppress: Option<bool>,
    /// `(B/gamma_21)(nu_c/gamma_41) >> B/gamma_21 + C/gamma_41`.
    pub nondem: Option<bool>,
}

/// Phase, timing, fidelity, and entropy of one dual-rail gate operation.
#[derive(Clone, Copy, Debug)]
pub struct GateMetrics {
    /// The requested relative phase (negative for red-detuned accumulation).
    pub phase: f64,
    /// Earliest time reaching `phase` at the linear rate.
    pub t_for_target: f64,
    /// Earliest time reaching a -pi shift at the linear rate.
    pub t_for_pi: f64,
    pub fidelity: f64,
    /// Base-2 entropy estimate at `t_for_target`.
    pub entropy: f64,
    pub regime_flags: RegimeFlags,
}

/// Dual-rail metrics of the detuned two-level system: the target is reached
/// at `t = |phase| nu_a / (N |Omega_a|^2)`, with
/// `F = [1 + exp(-x)] / 2` and `S = x (1 - ln x) log2 e`,
/// `x = |phase| gamma_20 / nu_a`. A nonzero `gamma_10` adds `exp(-gamma_10 t)`
/// damping to the coherence inside the fidelity.
pub fn dual_rail_metrics_two_level(
    nu_a: f64,
    gamma20: f64,
    gamma10: f64,
    omega_a_abs: f64,
    n_atoms: u32,
    target_phase: f64,
) -> Result<GateMetrics> {
    for (name, v) in [
        ("gamma20", gamma20),
        ("gamma10", gamma10),
        ("omega_a_abs", omega_a_abs),
    ] {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::invalid(
                "gate",
                format!("{name} must be finite and >= 0, got {v}"),
            ));
        }
    }
    if n_atoms == 0 {
        return Err(Error::invalid("gate", "n_atoms must be >= 1"));
    }
    if nu_a == 0.0 && target_phase != 0.0 {
        return Err(Error::NoDispersivePhase);
    }
    let nu = nu_a.abs();
    let rate = n_atoms as f64 * omega_a_abs * omega_a_abs;
    let t_for_target = target_phase.abs() * nu / rate;
    let t_for_pi = std::f64::consts::PI * nu / rate;
    let x = target_phase.abs() * gamma20 / nu;
    let fidelity = if gamma10 == 0.0 {
        0.5 * (1.0 + (-x).exp())
    } else {
        let coh = (-x - gamma10 * t_for_target).exp();
        (0.25 + 0.25 * (-2.0 * x).exp() + 0.5 * coh).sqrt()
    };
    let deco2 = REGIME_MARGIN * omega_a_abs <= gamma20
        && REGIME_MARGIN * gamma20 <= nu
        && nu < (n_atoms as f64 * gamma20 / gamma10).sqrt() * omega_a_abs;
    Ok(GateMetrics {
        phase: target_phase,
        t_for_target,
        t_for_pi,
        fidelity,
        entropy: entropy_asymptotic(x),
        regime_flags: RegimeFlags {
            deco2: Some(deco2),
            ..RegimeFlags::default()
        },
    })
}

/// Undamped phase milestone: the detuning and time at which the dual-rail
/// state acquires exactly -pi.
#[derive(Clone, Copy, Debug)]
pub struct PhaseMilestone {
    pub q: u32,
    pub nu_a: f64,
    pub t_q: f64,
    pub phi_q: f64,
}

/// For milestone index `q >= 1`: `nu_a = 2 (q - 1) Omega_a / sqrt(2q - 1)`
/// and `t_q = sqrt(2q - 1) pi / Omega_a`, giving `phi_q = -pi` exactly.
pub fn phase_milestones(omega_a: f64, q: u32) -> Result<PhaseMilestone> {
    if q < 1 {
        return Err(Error::invalid("milestone", "q must be >= 1"));
    }
    if omega_a <= 0.0 || !omega_a.is_finite() {
        return Err(Error::invalid(
            "milestone",
            format!("omega_a must be finite and > 0, got {omega_a}"),
        ));
    }
    let root = (2.0 * q as f64 - 1.0).sqrt();
    Ok(PhaseMilestone {
        q,
        nu_a: 2.0 * (q as f64 - 1.0) * omega_a / root,
        t_q: root * std::f64::consts::PI / omega_a,
        phi_q: -std::f64::consts::PI,
    })
}

/// Dual-rail metrics of the four-level system at `nu_a = nu_b = 0`, through
/// the effective parameters `nu~_c = (B/C) nu_c` and
/// `gamma~_20 = gamma_20 + (B/C) gamma_40`.
#[allow(clippy::too_many_arguments)]
pub fn dual_rail_metrics_four_level(
    omega_a_abs: f64,
    omega_b_abs: f64,
    omega_c_abs: f64,
    nu_c: f64,
    gamma20: f64,
    gamma40: f64,
    n_atoms: u32,
    target_phase: f64,
) -> Result<GateMetrics> {
    for (name, v) in [
        ("omega_a_abs", omega_a_abs),
        ("omega_b_abs", omega_b_abs),
        ("omega_c_abs", omega_c_abs),
        ("gamma20", gamma20),
        ("gamma40", gamma40),
    ] {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::invalid(
                "gate",
                format!("{name} must be finite and >= 0, got {v}"),
            ));
        }
    }
    if n_atoms == 0 {
        return Err(Error::invalid("gate", "n_atoms must be >= 1"));
    }
    if omega_c_abs == 0.0 {
        return Err(Error::invalid(
            "gate",
            "Omega_c must be nonzero for a defined effective detuning",
        ));
    }
    let b_sq = omega_b_abs * omega_b_abs;
    let c_sq = omega_c_abs * omega_c_abs;
    let nu_tilde = crate::steadystate::nu_tilde_c(b_sq, c_sq, nu_c);
    if nu_tilde == 0.0 && target_phase != 0.0 {
        return Err(Error::NoDispersivePhase);
    }
    let gamma_tilde = crate::steadystate::gamma20_tilde(b_sq, c_sq, gamma20, gamma40);
    let nu = nu_tilde.abs();
    let rate = n_atoms as f64 * omega_a_abs * omega_a_abs;
    let x = target_phase.abs() * gamma_tilde / nu;
    // Inequality chains with the rates cleared from the denominators:
    // schmlim: nu_c >= 10 gamma_40 and B gamma_40 >= 10 C gamma_20;
    // suppress: B nu_c >= 10 C gamma_20 and C gamma_20 >= 10 B gamma_40.
    let schmlim =
        nu_c.abs() >= REGIME_MARGIN * gamma40 && b_sq * gamma40 >= REGIME_MARGIN * c_sq * gamma20;
    let suppress = b_sq * nu_c.abs() >= REGIME_MARGIN * c_sq * gamma20
        && c_sq * gamma20 >= REGIME_MARGIN * b_sq * gamma40;
    Ok(GateMetrics {
        phase: target_phase,
        t_for_target: target_phase.abs() * nu / rate,
        t_for_pi: std::f64::consts::PI * nu / rate,
        fidelity: 0.5 * (1.0 + (-x).exp()),
        entropy: entropy_asymptotic(x),
        regime_flags: RegimeFlags {
            schmlim: Some(schmlim),
            suppress: Some(suppress),
            ..RegimeFlags::default()
        },
    })
}

/// Cross-Kerr coefficients of the four-level system.
#[derive(Clone, Copy, Debug)]
pub struct KerrResult {
    /// Complex evolution rate of the ground manifold state,
    /// `W = N A C / (nu_c B + i (gamma_41 B + gamma_21 C))`.
    pub w: Complex64,
    /// Kerr coefficient per photon pair when mode b holds a Fock state.
    pub w_tilde_fock: f64,
    /// Same coefficient with the coherent-state mean `|alpha_b|^2` as the
    /// mode-b measure; numerically equal because that measure cancels.
    pub w_tilde_coherent: f64,
    /// Photon scattering rate `-2 Im W >= 0`.
    pub scatter_rate: f64,
    /// Whether the dispersive (negligible-scattering) inequality holds.
    pub nondem: bool,
}

/// Evaluate the cross-Kerr rate for resonant probe and coupling
/// (`nu_a = nu_b = 0`) with dephasing neglected (`gamma_k1 = gamma'_k / 2`).
pub fn kerr_w(
    n_atoms: u32,
    drive_a: &FieldDrive,
    drive_b: &FieldDrive,
    drive_c: &FieldDrive,
    gamma21: f64,
    gamma41: f64,
) -> Result<KerrResult> {
    if n_atoms == 0 {
        return Err(Error::invalid("kerr", "n_atoms must be >= 1"));
    }
    for (drive, mode) in [(drive_a, Mode::A), (drive_b, Mode::B), (drive_c, Mode::C)] {
        if drive.label != mode {
            return Err(Error::invalid(
                "kerr",
                format!("expected mode {} drive", mode.symbol()),
            ));
        }
        drive.validate()?;
    }
    if drive_a.detuning != 0.0 || drive_b.detuning != 0.0 {
        return Err(Error::invalid(
            "kerr",
            "the Kerr rate is derived for nu_a = nu_b = 0",
        ));
    }
    for (name, v) in [("gamma21", gamma21), ("gamma41", gamma41)] {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::invalid(
                "kerr",
                format!("{name} must be finite and >= 0, got {v}"),
            ));
        }
    }
    let a_sq = drive_a.rabi.norm_sqr();
    let b_sq = drive_b.rabi.norm_sqr();
    let c_sq = drive_c.rabi.norm_sqr();
    if b_sq == 0.0 {
        return Err(Error::invalid("kerr", "Omega_b must be nonzero"));
    }
    let nu_c = drive_c.detuning;
    let n = n_atoms as f64;
    let numerator = n * a_sq * c_sq;
    let w = if numerator == 0.0 {
        Complex64::default()
    } else {
        let denom = Complex64::new(nu_c * b_sq, gamma41 * b_sq + gamma21 * c_sq);
        if denom == Complex64::default() {
            return Err(Error::SingularParameters(
                "Kerr denominator vanishes".into(),
            ));
        }
        Complex64::new(numerator, 0.0) / denom
    };
    // Per photon pair: the mode-b measure cancels between the vacuum Rabi
    // normalization and the explicit occupancy factor.
    let n_a = drive_a.photon_occupancy.measure();
    let n_c = drive_c.photon_occupancy.measure();
    let w_tilde = if numerator == 0.0 || n_a == 0.0 || n_c == 0.0 {
        0.0
    } else {
        if nu_c == 0.0 {
            return Err(Error::invalid(
                "kerr",
                "nu_c must be nonzero for a finite Kerr coefficient",
            ));
        }
        numerator / (nu_c * b_sq * n_a * n_c)
    };
    // (B/g21)(nu_c/g41) >> B/g21 + C/g41, cleared of the rates:
    // B nu_c >= 10 (B gamma_41 + C gamma_21).
    let nondem = b_sq * nu_c.abs() >= REGIME_MARGIN * (b_sq * gamma41 + c_sq * gamma21);
    Ok(KerrResult {
        w,
        w_tilde_fock: w_tilde,
        w_tilde_coherent: w_tilde,
        scatter_rate: -2.0 * w.im,
        nondem,
    })
}

/// Phase factor `e^{-i w t}` applied to the ground-manifold amplitude by the
/// cross-Kerr evolution; its modulus is `e^{Im(w) t}`, so the complex rates
/// produced by [`kerr_w`] (with `Im w <= 0`) damp the amplitude at half the
/// scattering rate.
pub fn kerr_phase_factor(w: Complex64, t: f64) -> Complex64 {
    (Complex64::new(0.0, -1.0) * w * t).exp()
}

/// Evolve one ground-manifold amplitude under the Kerr rate `w` for time `t`.
pub fn kerr_fock_evolution(amplitude: Complex64, w: Complex64, t: f64) -> Complex64 {
    amplitude * kerr_phase_factor(w, t)
}

/// Natural log of n!, exact below 128 and Stirling beyond.
fn ln_factorial(n: u64) -> f64 {
    use std::sync::OnceLock;
    static TABLE: OnceLock<[f64; 128]> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = [0.0; 128];
        let mut acc = 0.0;
        for (k, slot) in t.iter_mut().enumerate() {
            if k > 1 {
                acc += (k as f64).ln();
            }
            *slot = acc;
        }
        t
    });
    if n < 128 {
        return table[n as usize];
    }
    let x = n as f64;
    let x2 = x * x;
    (x + 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * x)
        - 1.0 / (360.0 * x * x2)
        + 1.0 / (1260.0 * x2 * x2 * x)
}

/// Poisson log-weights and phases over the summation window
/// `n_b in [mu - 10 sqrt(mu), mu + 10 sqrt(mu)]` (plus the `n_b = 0` term).
/// The `n_b = 0` phase divisor follows the `n_b + 1` photon-creation
/// convention; its Poisson weight is below `e^{-20}` in every regime of
/// interest. The tail outside the window carries less than 1e-12 of the
/// probability mass.
fn poisson_phase_sum(n_a: u64, n_c: u64, phi: f64, alpha_sq: f64, extra_phase: f64) -> Result<f64> {
    if alpha_sq < 0.0 || alpha_sq.is_nan() || !alpha_sq.is_finite() {
        return Err(Error::invalid(
            "overlap",
            format!("alpha_sq must be finite and >= 0, got {alpha_sq}"),
        ));
    }
    if !phi.is_finite() {
        return Err(Error::invalid("overlap", "phi must be finite"));
    }
    let mu = alpha_sq;
    let scale = n_a as f64 * n_c as f64 * phi;
    if mu == 0.0 {
        // Only the vacuum term: a pure phase.
        return Ok(1.0);
    }
    let sigma = mu.sqrt();
    let lo = ((mu - 10.0 * sigma).floor().max(0.0)) as u64;
    let hi = (mu + 10.0 * sigma).ceil() as u64;
    let ln_mu = mu.ln();
    let mode = (mu as u64).clamp(lo, hi);
    let ln_peak = -mu + mode as f64 * ln_mu - ln_factorial(mode);
    let mut sum = Complex64::default();
    let mut weight_total = 0.0;
    let mut add_term = |n: u64| {
        let ln_w = -mu + n as f64 * ln_mu - ln_factorial(n) - ln_peak;
        let w = ln_w.exp();
        let divisor = if n == 0 { 1.0 } else { n as f64 };
        let theta = -scale * mu / divisor + extra_phase;
        sum += Complex64::new(0.0, theta).exp() * w;
        weight_total += w;
    };
    if lo > 0 {
        add_term(0);
    }
    for n in lo..=hi {
        add_term(n);
    }
    Ok((sum / weight_total).norm_sqr())
}

/// `|<psi(t)|psi(0)>|^2` for the coherent-drive Kerr evolution: the
/// Poisson-weighted sum of per-Fock phases `e^{-i n_a n_c phi mu / n_b}`,
/// renormalized over the truncation window so `phi = 0` gives exactly 1.
///
/// ```
/// // A pi cross phase on a 5-photon signal stays coherent only for a
/// // strongly classical drive.
/// let weak = eit_core::coherent_overlap(1, 5, std::f64::consts::PI, 1e3).unwrap();
/// let strong = eit_core::coherent_overlap(1, 5, std::f64::consts::PI, 1e6).unwrap();
/// assert!(weak < 0.99 && strong > 0.999);
/// ```
pub fn coherent_overlap(n_a: u64, n_c: u64, phi: f64, alpha_sq: f64) -> Result<f64> {
    poisson_phase_sum(n_a, n_c, phi, alpha_sq, 0.0)
}

/// Error probability `1 - F^2` of the conditional phase gate, with `F` the
/// overlap between the ideally phase-shifted state `e^{-i n_a n_c phi}|psi(0)>`
/// and the actual final state. Equals `1 - coherent_overlap(..)` for pure
/// states; computed through the ideal-phase route so the identity is a real
/// check rather than a tautology.
pub fn conditional_gate_error(n_a: u64, n_c: u64, phi: f64, alpha_sq: f64) -> Result<f64> {
    let f_sq = poisson_phase_sum(n_a, n_c, phi, alpha_sq, n_a as f64 * n_c as f64 * phi)?;
    Ok(1.0 - f_sq)
}
