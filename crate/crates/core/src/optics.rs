//! Spectral observables: normalized susceptibilities, refractive index and
//! absorption curves, transparency-window metrics, and resonant diagnostics.
//!
//! All susceptibilities are normalized so the two-level absorption peaks at
//! one: `chi(nu_a) = gamma_21 rho~_21(nu_a) / Omega_a`, which makes
//! `Im chi(0) = 1` for the bare two-level atom. Absolute susceptibilities
//! would need the prefactor `2 |Omega_a|^2 / (omega_a n_a)` in absolute
//! frequency units; every quantitative claim handled here is a ratio.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A normalized susceptibility sampled over a probe-detuning grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralCurve {
    /// Probe detunings in units of `gamma_21`.
    pub axis: Vec<f64>,
    pub chi: Vec<Complex64>,
    /// Human-readable statement of the normalization convention.
    pub normalization: String,
}

const NORMALIZATION: &str = "two-level kappa(nu_a = 0) = 1";

/// Normalized ladder susceptibility shared by every scheme. Zero couplings
/// truncate the ladder, so lower schemes fall out bit for bit.
#[allow(clippy::too_many_arguments)]
fn chi_point(
    nu_a: f64,
    nu_b: f64,
    nu_c: f64,
    b_sq: f64,
    c_sq: f64,
    gamma21: f64,
    gamma31: f64,
    gamma41: f64,
) -> Result<Complex64> {
    let p = Complex64::new(nu_a, gamma21);
    let one = Complex64::new(1.0, 0.0);
    // chi = -gamma_21 numer / denom, with the same minor structure as the
    // steady-state elements; a zero coupling truncates the ladder exactly.
    let (numer, denom, scale) = if b_sq == 0.0 {
        (one, p, p.norm())
    } else {
        let q3 = Complex64::new(nu_a - nu_b, gamma31);
        let inner = if c_sq == 0.0 {
            q3
        } else {
            q3 * Complex64::new(nu_a - nu_b + nu_c, gamma41) - c_sq
        };
        let head = p * inner;
        let tail = if c_sq == 0.0 {
            Complex64::new(b_sq, 0.0)
        } else {
            Complex64::new(nu_a - nu_b + nu_c, gamma41) * b_sq
        };
        (inner, head - tail, head.norm() + tail.norm())
    };
    if denom.norm() < 1e-12 * scale {
        return Err(Error::SingularParameters(format!(
            "response pole at nu_a = {nu_a}"
        )));
    }
    Ok(-gamma21 * numer / denom)
}

fn check_gamma21(gamma21: f64) -> Result<()> {
    if gamma21 <= 0.0 || !gamma21.is_finite() {
        return Err(Error::invalid(
            "susceptibility",
            format!("gamma21 must be finite and > 0, got {gamma21}"),
        ));
    }
    Ok(())
}

/// Two-level Lorentzian, `chi(nu) = -gamma_21 (nu - i gamma_21) / (nu^2 + gamma_21^2)`.
pub fn susceptibility_two_level(axis: &[f64], gamma21: f64) -> Result<SpectralCurve> {
    check_gamma21(gamma21)?;
    let chi = axis
        .iter()
        .map(|&nu| chi_point(nu, 0.0, 0.0, 0.0, 0.0, gamma21, 0.0, 0.0))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralCurve {
        axis: axis.to_vec(),
        chi,
        normalization: NORMALIZATION.into(),
    })
}

/// Three-level susceptibility with the transparency dip at `nu_a = nu_b`.
pub fn susceptibility_three_level(
    axis: &[f64],
    nu_b: f64,
    omega_b: Complex64,
    gamma21: f64,
    gamma31: f64,
) -> Result<SpectralCurve> {
    check_gamma21(gamma21)?;
    let b_sq = omega_b.norm_sqr();
    let chi = axis
        .iter()
        .map(|&nu| chi_point(nu, nu_b, 0.0, b_sq, 0.0, gamma21, gamma31, 0.0))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralCurve {
        axis: axis.to_vec(),
        chi,
        normalization: NORMALIZATION.into(),
    })
}

/// Total four-level susceptibility (the linear term plus the full Kerr
/// modification, reconstructed from the exact steady-state element rather
/// than the small-`|Omega_c|^2` series).
#[allow(clippy::too_many_arguments)]
pub fn kerr_susceptibility_shape(
    axis: &[f64],
    nu_b: f64,
    nu_c: f64,
    omega_b: Complex64,
    omega_c: Complex64,
    gamma21: f64,
    gamma31: f64,
    gamma41: f64,
) -> Result<SpectralCurve> {
    check_gamma21(gamma21)?;
    let b_sq = omega_b.norm_sqr();
    let c_sq = omega_c.norm_sqr();
    let chi = axis
        .iter()
        .map(|&nu| chi_point(nu, nu_b, nu_c, b_sq, c_sq, gamma21, gamma31, gamma41))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralCurve {
        axis: axis.to_vec(),
        chi,
        normalization: NORMALIZATION.into(),
    })
}

/// Coefficient of `|Omega_c|^2` in the expansion of the normalized four-level
/// susceptibility about `|Omega_c|^2 = 0`:
/// `-gamma_21 |Omega_b|^2 / (q_4 [(p q_3) - |Omega_b|^2]^2)`.
/// The overall constant is fixed by the curve normalization.
#[allow(clippy::too_many_arguments)]
pub fn kerr_series_coefficient(
    nu_a: f64,
    nu_b: f64,
    nu_c: f64,
    omega_b: Complex64,
    gamma21: f64,
    gamma31: f64,
    gamma41: f64,
) -> Complex64 {
    let p = Complex64::new(nu_a, gamma21);
    let q3 = Complex64::new(nu_a - nu_b, gamma31);
    let q4 = Complex64::new(nu_a - nu_b + nu_c, gamma41);
    let b_sq = omega_b.norm_sqr();
    let denom = p * q3 - b_sq;
    -gamma21 * b_sq / (q4 * denom * denom)
}

/// Full width at half maximum of the transparency window,
/// `sqrt(4 |Omega_b|^2 + gamma_21^2) - gamma_21`.
pub fn transparency_fwhm(omega_b_abs: f64, gamma21: f64) -> f64 {
    (4.0 * omega_b_abs * omega_b_abs + gamma21 * gamma21).sqrt() - gamma21
}

/// Resonant diagnostics of the general three-level system.
#[derive(Clone, Copy, Debug)]
pub struct ResonantDiagnostics {
    /// Residual absorption at line center relative to the two-level value:
    /// `gamma_21 gamma_31 / (|Omega_b|^2 + gamma_21 gamma_31)`.
    pub kappa_ratio: f64,
    /// Slope of `Re chi` at line center for the normalized curve:
    /// `gamma_21 (|Omega_b|^2 - gamma_31^2) / (|Omega_b|^2 + gamma_21 gamma_31)^2`.
    pub dispersion_shape: f64,
    /// Control amplitude maximizing the dispersion,
    /// `sqrt(gamma_21 gamma_31 + 2 gamma_31^2)`.
    pub optimal_omega_b: f64,
}

pub fn resonant_diagnostics(
    omega_b_abs: f64,
    gamma21: f64,
    gamma31: f64,
) -> Result<ResonantDiagnostics> {
    check_gamma21(gamma21)?;
    if gamma31 < 0.0 || !gamma31.is_finite() || omega_b_abs < 0.0 || !omega_b_abs.is_finite() {
        return Err(Error::invalid(
            "diagnostics",
            "rates and |Omega_b| must be finite and >= 0",
        ));
    }
    let b_sq = omega_b_abs * omega_b_abs;
    let gg = gamma21 * gamma31;
    let denom = b_sq + gg;
    let kappa_ratio = if denom == 0.0 { 1.0 } else { gg / denom };
    let dispersion_shape = gamma21 * (b_sq - gamma31 * gamma31) / (denom * denom);
    let optimal_omega_b = (gg + 2.0 * gamma31 * gamma31).sqrt();
    Ok(ResonantDiagnostics {
        kappa_ratio,
        dispersion_shape,
        optimal_omega_b,
    })
}

/// Refractive index, absorption coefficient, and dispersion proxy derived
/// from a susceptibility curve (reduced units, `omega_a / c = 1`).
#[derive(Clone, Debug)]
pub struct EtaKappa {
    pub eta: Vec<f64>,
    pub kappa: Vec<f64>,
    /// `d eta / d nu_a` by three-point central differences (one-sided at the
    /// grid ends).
    pub deta_dnu: Vec<f64>,
    /// Largest Richardson-style derivative error estimate,
    /// `max |D_h - D_2h| / 3` over interior points; `None` when the grid is
    /// too short to compare spacings.
    pub derivative_error: Option<f64>,
}

pub fn eta_kappa(curve: &SpectralCurve) -> Result<EtaKappa> {
    let n = curve.axis.len();
    let mut eta = Vec::with_capacity(n);
    let mut kappa = Vec::with_capacity(n);
    for (&nu, chi) in curve.axis.iter().zip(&curve.chi) {
        if chi.re <= -1.0 {
            return Err(Error::UnphysicalSusceptibility { re_chi: chi.re, nu });
        }
        let e = (1.0 + chi.re).sqrt();
        eta.push(e);
        kappa.push(chi.im / e);
    }
    let slope = |i: usize, j: usize| (eta[j] - eta[i]) / (curve.axis[j] - curve.axis[i]);
    let mut deta_dnu = vec![0.0; n];
    match n {
        0 => {}
        1 => deta_dnu[0] = f64::NAN,
        _ => {
            deta_dnu[0] = slope(0, 1);
            deta_dnu[n - 1] = slope(n - 2, n - 1);
            #[allow(clippy::needless_range_loop)]
            for i in 1..n - 1 {
                deta_dnu[i] = slope(i - 1, i + 1);
            }
        }
    }
    let derivative_error = (n >= 5).then(|| {
        (2..n - 2)
            .map(|i| (slope(i - 1, i + 1) - slope(i - 2, i + 2)).abs() / 3.0)
            .fold(0.0, f64::max)
    });
    Ok(EtaKappa {
        eta,
        kappa,
        deta_dnu,
        derivative_error,
    })
}

/// Uniform grid helper: `count` points from `start` through `stop` inclusive.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (count - 1) as f64;
            (0..count)
                .map(|i| {
                    if i == count - 1 {
                        stop
                    } else {
                        start + i as f64 * step
                    }
                })
                .collect()
        }
    }
}
