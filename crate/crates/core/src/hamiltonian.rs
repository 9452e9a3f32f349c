//! Hamiltonians of the resonant manifolds.
//!
//! The stored matrix is the bracketed matrix of the total Hamiltonian with the
//! overall factor of -hbar pulled out, so its entries are Rabi frequencies and
//! detunings directly. Dynamics reinserts the sign: d(rho)/dt = i [M, rho] - Gamma(rho).

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{build_basis, hermiticity_deviation, Basis, Mode, SystemSpec};

/// A manifold Hamiltonian over a labeled basis, stored as H / (-hbar).
#[derive(Clone, Debug, PartialEq)]
pub struct Hamiltonian {
    basis: Basis,
    data: DMatrix<Complex64>,
}

impl Hamiltonian {
    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    /// The bracketed matrix H / (-hbar).
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        hermiticity_deviation(&self.data)
    }
}

/// Build the total Hamiltonian for any scheme, atom count, and rail layout.
///
/// Ground-row couplings are `conj(Omega_a)` toward every atom's first excited
/// label; each atom's excited block carries the detuning ladder
/// (`nu_a`, `nu_a - nu_b`, `nu_a - nu_b + nu_c`) on the diagonal and the
/// control couplings `Omega_b` / `Omega_c` on the ladder off-diagonals.
/// Environment and empty-rail rows stay identically zero.
pub fn build_hamiltonian(spec: &SystemSpec) -> Result<Hamiltonian> {
    let basis = build_basis(spec)?;
    let dim = basis.dim();
    let mut data = DMatrix::<Complex64>::zeros(dim, dim);

    let drive_a = spec.drive(Mode::A).expect("validated spec has mode a");
    let nu_a = drive_a.detuning;
    for atom in 1..=spec.atom_count {
        let i2 = basis.excited_index(2, atom).expect("level 2 exists");
        data[(0, i2)] = drive_a.rabi.conj();
        data[(i2, 0)] = drive_a.rabi;
        data[(i2, i2)] = Complex64::new(nu_a, 0.0);
        if let Some(drive_b) = spec.drive(Mode::B) {
            let i3 = basis.excited_index(3, atom).expect("level 3 exists");
            data[(i2, i3)] = drive_b.rabi;
            data[(i3, i2)] = drive_b.rabi.conj();
            data[(i3, i3)] = Complex64::new(nu_a - drive_b.detuning, 0.0);
            if let Some(drive_c) = spec.drive(Mode::C) {
                let i4 = basis.excited_index(4, atom).expect("level 4 exists");
                data[(i3, i4)] = drive_c.rabi.conj();
                data[(i4, i3)] = drive_c.rabi;
                data[(i4, i4)] = Complex64::new(nu_a - drive_b.detuning + drive_c.detuning, 0.0);
            }
        }
    }
    Ok(Hamiltonian { basis, data })
}

/// Squared Rabi frequency from experimental parameters:
/// `|Omega_a|^2 = (sigma_a / A) A_21 dw_r n_a / (8 pi)`,
/// with `sigma_a / A` the ratio of the resonant absorption cross section to
/// the mode area and `dw_r` the resonator free spectral range (or, for pulsed
/// work, the pulse bandwidth).
pub fn rabi_from_experiment(
    sigma_over_area: f64,
    a21: f64,
    bandwidth: f64,
    n_a: u64,
) -> Result<f64> {
    for (name, v) in [
        ("sigma_over_area", sigma_over_area),
        ("a21", a21),
        ("bandwidth", bandwidth),
    ] {
        if v <= 0.0 || !v.is_finite() {
            return Err(Error::invalid(
                "rabi_from_experiment",
                format!("{name} must be finite and > 0, got {v}"),
            ));
        }
    }
    Ok(sigma_over_area * a21 * bandwidth * n_a as f64 / (8.0 * std::f64::consts::PI))
}

/// SI prefactor of the free-space spontaneous emission rate,
/// `1 / (3 pi epsilon_0 hbar c^3)` in units of s^-1 per (rad/s)^3 (C m)^2.
pub const EINSTEIN_A_SI_PREFACTOR: f64 = 4.217744e18;

/// Free-space spontaneous emission rate `A_21 = prefactor * omega_21^3 |d_21|^2`.
///
/// The default reduced-unit prefactor is 1; pass
/// [`EINSTEIN_A_SI_PREFACTOR`] for SI inputs.
pub fn spontaneous_rate(omega21: f64, dipole_sq: f64, prefactor: Option<f64>) -> Result<f64> {
    let prefactor = prefactor.unwrap_or(1.0);
    for (name, v) in [
        ("omega21", omega21),
        ("dipole_sq", dipole_sq),
        ("prefactor", prefactor),
    ] {
        if v <= 0.0 || !v.is_finite() {
            return Err(Error::invalid(
                "spontaneous_rate",
                format!("{name} must be finite and > 0, got {v}"),
            ));
        }
    }
    Ok(prefactor * omega21.powi(3) * dipole_sq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DecoherenceSpec, FieldDrive, PhotonOccupancy, Scheme};

    fn spec(scheme: Scheme, drives: Vec<FieldDrive>) -> SystemSpec {
        SystemSpec::new(scheme, drives, DecoherenceSpec::none())
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn two_level_matrix_entries() {
        let s = spec(
            Scheme::TwoLevel,
            vec![FieldDrive::classical(Mode::A, 0.1, 3.0)],
        );
        let h = build_hamiltonian(&s).unwrap();
        let m = h.matrix();
        assert_eq!(h.dim(), 3);
        assert_eq!(m[(0, 1)], c(0.1, 0.0));
        assert_eq!(m[(1, 0)], c(0.1, 0.0));
        assert_eq!(m[(1, 1)], c(3.0, 0.0));
        for j in 0..3 {
            assert_eq!(m[(2, j)], c(0.0, 0.0));
            assert_eq!(m[(j, 2)], c(0.0, 0.0));
        }
    }

    #[test]
    fn complex_rabi_conjugation_pattern() {
        let omega_a = c(0.1, 0.05);
        let omega_b = c(0.4, -0.3);
        let omega_c = c(0.0, 0.2);
        let s = spec(
            Scheme::FourLevel,
            vec![
                FieldDrive::new(Mode::A, omega_a, 1.0, PhotonOccupancy::FockCount(1)),
                FieldDrive::new(Mode::B, omega_b, 0.25, PhotonOccupancy::FockCount(1)),
                FieldDrive::new(Mode::C, omega_c, -0.5, PhotonOccupancy::FockCount(1)),
            ],
        );
        let h = build_hamiltonian(&s).unwrap();
        let m = h.matrix();
        assert_eq!(m[(1, 0)], omega_a);
        assert_eq!(m[(0, 1)], omega_a.conj());
        assert_eq!(m[(1, 2)], omega_b);
        assert_eq!(m[(2, 1)], omega_b.conj());
        assert_eq!(m[(3, 2)], omega_c);
        assert_eq!(m[(2, 3)], omega_c.conj());
        assert_eq!(m[(1, 1)], c(1.0, 0.0));
        assert_eq!(m[(2, 2)], c(0.75, 0.0));
        assert_eq!(m[(3, 3)], c(0.25, 0.0));
        assert!(h.hermiticity_deviation() < 1e-14);
    }

    #[test]
    fn zero_drives_give_detuning_diagonal() {
        let s = spec(
            Scheme::ThreeLevel,
            vec![
                FieldDrive::classical(Mode::A, 0.0, 2.0),
                FieldDrive::classical(Mode::B, 0.0, 0.5),
            ],
        );
        let m = build_hamiltonian(&s).unwrap().data;
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert_eq!(m[(i, j)], c(0.0, 0.0));
                }
            }
        }
        assert_eq!(m[(1, 1)], c(2.0, 0.0));
        assert_eq!(m[(2, 2)], c(1.5, 0.0));
    }

    #[test]
    fn n_atom_blocks_repeat() {
        let s = spec(
            Scheme::FourLevel,
            vec![
                FieldDrive::classical(Mode::A, 0.1, 1.0),
                FieldDrive::classical(Mode::B, 0.5, 0.2),
                FieldDrive::classical(Mode::C, 0.3, -0.4),
            ],
        )
        .with_atom_count(2);
        let h = build_hamiltonian(&s).unwrap();
        let m = h.matrix();
        // 1 ground + 2 atoms x 3 excited levels + environment.
        assert_eq!(h.dim(), 8);
        // Both excited blocks couple to the ground row by Omega_a.
        assert_eq!(m[(1, 0)], c(0.1, 0.0));
        assert_eq!(m[(4, 0)], c(0.1, 0.0));
        // The two 3x3 excited blocks are identical.
        for r in 0..3 {
            for cidx in 0..3 {
                assert_eq!(m[(1 + r, 1 + cidx)], m[(4 + r, 4 + cidx)]);
            }
        }
        // No cross-atom coupling.
        for r in 1..4 {
            for cidx in 4..7 {
                assert_eq!(m[(r, cidx)], c(0.0, 0.0));
            }
        }
    }

    #[test]
    fn atom_permutation_symmetry() {
        let s = spec(
            Scheme::ThreeLevel,
            vec![
                FieldDrive::classical(Mode::A, 0.17, 0.8),
                FieldDrive::classical(Mode::B, 0.45, 0.3),
            ],
        )
        .with_atom_count(3);
        let h = build_hamiltonian(&s).unwrap();
        let m = h.matrix();
        let dim = h.dim();
        // Swap atoms 1 and 3 by permuting their block rows/columns.
        let mut perm: Vec<usize> = (0..dim).collect();
        let b1 = h.basis().excited_index(2, 1).unwrap();
        let b3 = h.basis().excited_index(2, 3).unwrap();
        perm.swap(b1, b3);
        perm.swap(b1 + 1, b3 + 1);
        let permuted = DMatrix::from_fn(dim, dim, |i, j| m[(perm[i], perm[j])]);
        assert_eq!(&permuted, m);
    }

    #[test]
    fn four_level_with_zero_omega_c_contains_three_level() {
        let s3 = spec(
            Scheme::ThreeLevel,
            vec![
                FieldDrive::classical(Mode::A, 0.1, 1.2),
                FieldDrive::classical(Mode::B, 0.5, 0.4),
            ],
        );
        let s4 = spec(
            Scheme::FourLevel,
            vec![
                FieldDrive::classical(Mode::A, 0.1, 1.2),
                FieldDrive::classical(Mode::B, 0.5, 0.4),
                FieldDrive::classical(Mode::C, 0.0, 0.9),
            ],
        );
        let m3 = build_hamiltonian(&s3).unwrap().data;
        let m4 = build_hamiltonian(&s4).unwrap().data;
        // Rows {ground, 2, 3, env} of the four-level matrix against the
        // three-level one; the level-4 row only holds its detuning.
        let keep = [0usize, 1, 2, 4];
        for (r3, r4) in keep.iter().enumerate() {
            for (c3, c4) in keep.iter().enumerate() {
                assert_eq!(m4[(*r4, *c4)], m3[(r3, c3)]);
            }
        }
    }

    #[test]
    fn rabi_rule_free_space_ratio() {
        // Window condition dw_r = |Omega_b|^2 / gamma_21 with unit gamma_21 and
        // A_21: |Omega_b| / |Omega_a| = sqrt(40 pi) ~ 11.2 per probe photon.
        let omega_a_sq = rabi_from_experiment(0.2, 1.0, 1.0, 1).unwrap();
        let ratio = (1.0 / omega_a_sq).sqrt();
        assert!((ratio - (40.0 * std::f64::consts::PI).sqrt()).abs() < 1e-12);
        assert!((ratio - 11.21).abs() < 0.01);
    }

    #[test]
    fn rabi_rule_waveguide_ratio() {
        // sigma/A -> 1 shrinks the required control field by sqrt(5).
        let free = rabi_from_experiment(0.2, 1.0, 1.0, 1).unwrap();
        let guided = rabi_from_experiment(1.0, 1.0, 1.0, 1).unwrap();
        assert!(((guided / free).sqrt() - 5.0_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rabi_rule_zero_photons() {
        assert_eq!(rabi_from_experiment(0.2, 1.0, 1.0, 0).unwrap(), 0.0);
        assert!(rabi_from_experiment(-0.2, 1.0, 1.0, 1).is_err());
        assert!(rabi_from_experiment(0.2, 0.0, 1.0, 1).is_err());
    }

    #[test]
    fn spontaneous_rate_scaling() {
        let base = spontaneous_rate(1.0, 1.0, None).unwrap();
        assert_eq!(base, 1.0);
        assert!((spontaneous_rate(2.0, 1.0, None).unwrap() / base - 8.0).abs() < 1e-12);
        assert!((spontaneous_rate(1.0, 2.0, None).unwrap() / base - 2.0).abs() < 1e-12);
        assert!(spontaneous_rate(0.0, 1.0, None).is_err());
    }
}
