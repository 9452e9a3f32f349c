//! Decoherence superoperators, built two ways.
//!
//! The production path applies pairwise coefficients `gamma_ij` to the
//! density-matrix elements (an O(d^2) elementwise product with a
//! trace-balancing environment entry). The operator path assembles
//!
//! ```text
//! Gamma(rho) = 1/2 sum_m gamma_m ([rho L_m^+, L_m] + [L_m^+, L_m rho])
//! ```
//!
//! from explicit lowering and dephasing operators. The two agree entrywise;
//! the operator form exists to verify the rules and is used by the test
//! suites as the independent route.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{Basis, DecoherenceSpec, DensityMatrix};

/// Kind of dissipative process attached to one basis label.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChannelKind {
    /// Depopulation of label `from` into the environment label.
    Lowering { from: usize },
    /// Pure dephasing of label `target`.
    Dephasing { target: usize },
}

/// One Lindblad operator `L_m` with its rate.
#[derive(Clone, Debug, PartialEq)]
pub struct LindbladChannel {
    pub kind: ChannelKind,
    pub rate: f64,
    matrix: DMatrix<Complex64>,
}

impl LindbladChannel {
    /// The lowering operator `|e><j|` at rate `gamma'_j`.
    pub fn lowering(basis: &Basis, from: usize, rate: f64) -> Result<Self> {
        let dim = basis.dim();
        let env = basis.env_index();
        if from >= dim {
            return Err(Error::invalid(
                "channel",
                format!("label index {from} out of range for dimension {dim}"),
            ));
        }
        check_channel_rate(rate)?;
        let mut matrix = DMatrix::zeros(dim, dim);
        matrix[(env, from)] = Complex64::new(1.0, 0.0);
        Ok(LindbladChannel {
            kind: ChannelKind::Lowering { from },
            rate,
            matrix,
        })
    }

    /// The dephasing operator `(I - 2 sigma_jj) / sqrt(2)` at rate `gamma''_j`.
    /// The identity spans the whole extended basis, environment row included.
    pub fn dephasing(basis: &Basis, target: usize, rate: f64) -> Result<Self> {
        let dim = basis.dim();
        if target >= dim {
            return Err(Error::invalid(
                "channel",
                format!("label index {target} out of range for dimension {dim}"),
            ));
        }
        check_channel_rate(rate)?;
        let inv_sqrt2 = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let mut matrix = DMatrix::from_diagonal_element(dim, dim, inv_sqrt2);
        matrix[(target, target)] = -inv_sqrt2;
        Ok(LindbladChannel {
            kind: ChannelKind::Dephasing { target },
            rate,
            matrix,
        })
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

fn check_channel_rate(rate: f64) -> Result<()> {
    if !rate.is_finite() || rate < 0.0 {
        return Err(Error::invalid(
            "channel",
            format!("rate {rate} must be finite and >= 0"),
        ));
    }
    Ok(())
}

/// The full channel set implied by a [`DecoherenceSpec`]: one lowering and one
/// dephasing operator per non-environment, non-rail label, each at the rate of
/// the label's atomic level. Zero-rate channels are dropped.
pub fn channels_from_spec(spec: &DecoherenceSpec, basis: &Basis) -> Result<Vec<LindbladChannel>> {
    let env = basis.env_index();
    let rail = basis.rail_index();
    let mut channels = Vec::new();
    for (idx, label) in basis.labels().iter().enumerate() {
        if idx == env || Some(idx) == rail {
            continue;
        }
        let level = label.level();
        let depop = spec.depop(level);
        if depop > 0.0 {
            channels.push(LindbladChannel::lowering(basis, idx, depop)?);
        }
        let dephase = spec.dephase(level);
        if dephase > 0.0 {
            channels.push(LindbladChannel::dephasing(basis, idx, dephase)?);
        }
    }
    Ok(channels)
}

/// Decoherence superoperator in explicit operator form.
pub struct LindbladSuperoperator {
    dim: usize,
    /// `1/2 sum_m gamma_m L_m^+ L_m`, the anticommutator half.
    half_rate_sum: DMatrix<Complex64>,
    /// `sqrt(gamma_m) L_m` for the sandwich terms.
    scaled_ops: Vec<DMatrix<Complex64>>,
}

/// Assemble the operator-form superoperator from a channel list.
///
/// For any Hermitian `rho` the result is Hermitian with zero trace; an empty
/// channel list yields the zero map.
pub fn lindblad_superoperator(channels: &[LindbladChannel]) -> Result<LindbladSuperoperator> {
    let dim = match channels.first() {
        Some(c) => c.dim(),
        None => 0,
    };
    for c in channels {
        if c.dim() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: c.dim(),
            });
        }
    }
    let mut half_rate_sum = DMatrix::<Complex64>::zeros(dim, dim);
    let mut scaled_ops = Vec::with_capacity(channels.len());
    for c in channels {
        let l = c.matrix();
        half_rate_sum += l.adjoint() * l * Complex64::new(0.5 * c.rate, 0.0);
        scaled_ops.push(l * Complex64::new(c.rate.sqrt(), 0.0));
    }
    Ok(LindbladSuperoperator {
        dim,
        half_rate_sum,
        scaled_ops,
    })
}

impl LindbladSuperoperator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Gamma(rho) for an arbitrary complex matrix.
    pub fn apply_matrix(&self, rho: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
        if self.dim == 0 {
            // Empty channel list: the zero map on any dimension.
            return Ok(DMatrix::zeros(rho.nrows(), rho.ncols()));
        }
        if rho.nrows() != self.dim || rho.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: rho.nrows().max(rho.ncols()),
            });
        }
        let mut out = rho * &self.half_rate_sum + &self.half_rate_sum * rho;
        for l in &self.scaled_ops {
            out -= l * rho * l.adjoint();
        }
        Ok(out)
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DMatrix<Complex64>> {
        self.apply_matrix(rho.data())
    }
}

/// Pairwise decoherence coefficients over a basis, produced by the rules.
///
/// The stored matrix is symmetric with non-negative entries; the environment
/// diagonal is not a fixed coefficient and is balanced at application time so
/// that `trace(Gamma(rho)) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaCoefficients {
    coeffs: DMatrix<f64>,
    env_index: usize,
}

impl GammaCoefficients {
    pub fn dim(&self) -> usize {
        self.coeffs.nrows()
    }

    pub fn env_index(&self) -> usize {
        self.env_index
    }

    pub fn coefficient(&self, i: usize, j: usize) -> f64 {
        self.coeffs[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.coeffs
    }

    /// Gamma(rho) on a raw matrix: elementwise product, with the environment
    /// diagonal balancing the decaying populations.
    pub fn apply_matrix(&self, rho: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
        let dim = self.dim();
        if rho.nrows() != dim || rho.ncols() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: rho.nrows().max(rho.ncols()),
            });
        }
        let mut out = DMatrix::<Complex64>::zeros(dim, dim);
        let env = self.env_index;
        let mut balance = Complex64::default();
        for j in 0..dim {
            for i in 0..dim {
                out[(i, j)] = rho[(i, j)] * self.coeffs[(i, j)];
            }
            if j != env {
                balance += rho[(j, j)] * self.coeffs[(j, j)];
            }
        }
        out[(env, env)] = -balance;
        Ok(out)
    }
}

/// Write down the coefficient matrix for a basis using the rules:
/// `gamma_ij = gamma_ji`; `gamma_ej = gamma'_j/2 + gamma''_j`;
/// `gamma_jj = gamma'_j`; and for distinct non-environment labels
/// `gamma_ij = (gamma'_i + gamma'_j)/2 + gamma''_i + gamma''_j`.
/// The empty-rail label carries no rates of its own, so it participates only
/// through the other index of each pair.
pub fn rule_based_gamma(spec: &DecoherenceSpec, basis: &Basis) -> Result<GammaCoefficients> {
    let dim = basis.dim();
    let env = basis.env_index();
    if env >= dim || !basis.labels()[env].env_flag {
        return Err(Error::MissingEnvironment);
    }
    let rail = basis.rail_index();
    // Per-label rates; environment and rail labels are inert.
    let rates: Vec<(f64, f64)> = basis
        .labels()
        .iter()
        .enumerate()
        .map(|(idx, label)| {
            if idx == env || Some(idx) == rail {
                (0.0, 0.0)
            } else {
                (spec.depop(label.level()), spec.dephase(label.level()))
            }
        })
        .collect();
    let mut coeffs = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            if i == env && j == env {
                continue; // balanced at application time
            }
            let (dpi, dfi) = rates[i];
            let (dpj, dfj) = rates[j];
            coeffs[(i, j)] = if i == j {
                dpj
            } else {
                0.5 * (dpi + dpj) + dfi + dfj
            };
        }
    }
    Ok(GammaCoefficients {
        coeffs,
        env_index: env,
    })
}

/// Gamma(rho) through the coefficient path; output is Hermitian with zero
/// trace for Hermitian input.
pub fn apply_gamma(coeffs: &GammaCoefficients, rho: &DensityMatrix) -> Result<DMatrix<Complex64>> {
    coeffs.apply_matrix(rho.data())
}
