//! Domain types and labeled basis construction for the resonant manifolds.
//!
//! All rates, Rabi frequencies, and detunings are expressed in units of a
//! single reference rate (conventionally `gamma_21 = 1`); time is the
//! dimensionless product rate * t. Photon numbers enter only through the
//! dressed Rabi frequencies, so basis labels store occupancy *offsets*
//! relative to the ground manifold state rather than absolute counts.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default cap on the extended-basis dimension accepted by [`build_basis`].
pub const DEFAULT_MAX_DIM: usize = 4096;

/// Which level scheme the atom follows.
#[allow(clippy::enum_variant_names)]
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    TwoLevel,
    ThreeLevel,
    FourLevel,
}

impl Scheme {
    /// Number of atomic levels.
    pub fn levels(self) -> u8 {
        match self {
            Scheme::TwoLevel => 2,
            Scheme::ThreeLevel => 3,
            Scheme::FourLevel => 4,
        }
    }

    /// Number of driving fields (modes a, b, c as applicable).
    pub fn mode_count(self) -> usize {
        self.levels() as usize - 1
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Scheme::TwoLevel => "two-level",
            Scheme::ThreeLevel => "three-level",
            Scheme::FourLevel => "four-level",
        };
        write!(f, "{name}")
    }
}

/// Field mode identifier. Mode `a` drives 1-2, `b` drives 3-2, `c` drives 3-4.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    A,
    B,
    C,
}

impl Mode {
    pub fn index(self) -> usize {
        match self {
            Mode::A => 0,
            Mode::B => 1,
            Mode::C => 2,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Mode::A => "a",
            Mode::B => "b",
            Mode::C => "c",
        }
    }
}

/// Photon content of a mode: a definite Fock count or a coherent state with
/// mean occupation `|alpha|^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PhotonOccupancy {
    FockCount(u64),
    Coherent(f64),
}

impl PhotonOccupancy {
    /// Mean photon number: `n` for a Fock state, `|alpha|^2` for a coherent one.
    pub fn measure(self) -> f64 {
        match self {
            PhotonOccupancy::FockCount(n) => n as f64,
            PhotonOccupancy::Coherent(alpha_sq) => alpha_sq,
        }
    }
}

/// One driving field: dressed Rabi frequency, detuning, and photon content.
///
/// The optional per-photon coupling (vacuum Rabi frequency) ties the dressed
/// Rabi frequency to the occupancy: `|rabi|^2 = n |vacuum|^2` for modes a and
/// c, and `|rabi|^2 = (n + 1) |vacuum|^2` for mode b, which couples to the
/// transition by photon creation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldDrive {
    pub label: Mode,
    pub rabi: Complex64,
    pub detuning: f64,
    pub photon_occupancy: PhotonOccupancy,
    pub vacuum_rabi: Option<Complex64>,
}

impl FieldDrive {
    pub fn new(
        label: Mode,
        rabi: Complex64,
        detuning: f64,
        photon_occupancy: PhotonOccupancy,
    ) -> Self {
        FieldDrive {
            label,
            rabi,
            detuning,
            photon_occupancy,
            vacuum_rabi: None,
        }
    }

    /// Classical shorthand: real Rabi frequency, unit Fock occupancy.
    pub fn classical(label: Mode, rabi: f64, detuning: f64) -> Self {
        Self::new(
            label,
            Complex64::new(rabi, 0.0),
            detuning,
            PhotonOccupancy::FockCount(1),
        )
    }

    pub fn with_vacuum_rabi(mut self, vacuum_rabi: Complex64) -> Self {
        self.vacuum_rabi = Some(vacuum_rabi);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.rabi.re.is_finite() || !self.rabi.im.is_finite() {
            return Err(Error::invalid(
                "drive",
                format!("mode {}: non-finite Rabi frequency", self.label.symbol()),
            ));
        }
        if !self.detuning.is_finite() {
            return Err(Error::invalid(
                "drive",
                format!("mode {}: non-finite detuning", self.label.symbol()),
            ));
        }
        if let PhotonOccupancy::Coherent(alpha_sq) = self.photon_occupancy {
            if alpha_sq < 0.0 || !alpha_sq.is_finite() {
                return Err(Error::invalid(
                    "drive",
                    format!(
                        "mode {}: |alpha|^2 must be finite and >= 0",
                        self.label.symbol()
                    ),
                ));
            }
        }
        if let (Some(vac), PhotonOccupancy::FockCount(n)) =
            (self.vacuum_rabi, self.photon_occupancy)
        {
            // Mode b couples by creating a photon, hence the n + 1.
            let scale = match self.label {
                Mode::B => n as f64 + 1.0,
                _ => n as f64,
            };
            let expected = scale * vac.norm_sqr();
            let got = self.rabi.norm_sqr();
            let tol = 1e-9 * expected.max(got).max(f64::MIN_POSITIVE);
            if (expected - got).abs() > tol {
                return Err(Error::invalid(
                    "drive",
                    format!(
                        "mode {}: |rabi|^2 = {got} inconsistent with occupancy {n} and vacuum Rabi (expected {expected})",
                        self.label.symbol()
                    ),
                ));
            }
        }
        Ok(())
    }
}

/// Per-level depopulation rates `gamma'_j` and pure-dephasing rates `gamma''_j`.
///
/// Levels are indexed 1..=4; absent levels have zero rates. Metastable levels
/// simply carry `gamma' = 0`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DecoherenceSpec {
    depop: BTreeMap<u8, f64>,
    dephase: BTreeMap<u8, f64>,
}

impl DecoherenceSpec {
    /// No decoherence at all.
    pub fn none() -> Self {
        Self::default()
    }

    pub fn with_depop(mut self, level: u8, rate: f64) -> Result<Self> {
        check_rate(level, rate)?;
        self.depop.insert(level, rate);
        Ok(self)
    }

    pub fn with_dephase(mut self, level: u8, rate: f64) -> Result<Self> {
        check_rate(level, rate)?;
        self.dephase.insert(level, rate);
        Ok(self)
    }

    /// Depopulation rate `gamma'_j` of the product state with the atom in `level`.
    pub fn depop(&self, level: u8) -> f64 {
        self.depop.get(&level).copied().unwrap_or(0.0)
    }

    /// Pure dephasing rate `gamma''_j`.
    pub fn dephase(&self, level: u8) -> f64 {
        self.dephase.get(&level).copied().unwrap_or(0.0)
    }
}

fn check_rate(level: u8, rate: f64) -> Result<()> {
    if !(1..=4).contains(&level) {
        return Err(Error::invalid(
            "decoherence",
            format!("level {level} out of range 1..=4"),
        ));
    }
    if !rate.is_finite() || rate < 0.0 {
        return Err(Error::invalid(
            "decoherence",
            format!("rate {rate} for level {level} must be finite and >= 0"),
        ));
    }
    Ok(())
}

/// Atomic part of a product-state label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AtomState {
    /// All atoms in the ground level (the `{1}` string).
    Ground,
    /// Atom `atom` (1-based) promoted to `level` (2..=4), all others ground.
    Excited { level: u8, atom: u32 },
}

/// One basis state of the extended resonant manifold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BasisLabel {
    pub atom_state: AtomState,
    /// Per-mode occupancy offsets (a, b, c) relative to the ground label.
    pub photon_offsets: [i32; 3],
    /// Set for the aggregated scattered-photon label.
    pub env_flag: bool,
    /// Set for the empty-rail label of dual-rail bases.
    pub rail_flag: bool,
}

impl BasisLabel {
    fn ground() -> Self {
        BasisLabel {
            atom_state: AtomState::Ground,
            photon_offsets: [0; 3],
            env_flag: false,
            rail_flag: false,
        }
    }

    fn excited(level: u8, atom: u32) -> Self {
        let photon_offsets = match level {
            2 => [-1, 0, 0],
            3 => [-1, 1, 0],
            4 => [-1, 1, -1],
            _ => unreachable!("excited levels are 2..=4"),
        };
        BasisLabel {
            atom_state: AtomState::Excited { level, atom },
            photon_offsets,
            env_flag: false,
            rail_flag: false,
        }
    }

    fn environment(mode_count: usize) -> Self {
        // With a single mode the scattered state is unique; with more modes the
        // label aggregates the nonresonant submanifold and offsets stay 0.
        let photon_offsets = if mode_count == 1 { [-1, 0, 0] } else { [0; 3] };
        BasisLabel {
            atom_state: AtomState::Ground,
            photon_offsets,
            env_flag: true,
            rail_flag: false,
        }
    }

    fn empty_rail() -> Self {
        BasisLabel {
            atom_state: AtomState::Ground,
            photon_offsets: [0; 3],
            env_flag: false,
            rail_flag: true,
        }
    }

    /// Level of the atomic excitation, or 1 for ground-manifold labels.
    pub fn level(&self) -> u8 {
        match self.atom_state {
            AtomState::Ground => 1,
            AtomState::Excited { level, .. } => level,
        }
    }
}

/// Ordered basis of the extended manifold, together with the construction
/// parameters it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct Basis {
    scheme: Scheme,
    atom_count: u32,
    dual_rail: bool,
    labels: Vec<BasisLabel>,
}

impl Basis {
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn atom_count(&self) -> u32 {
        self.atom_count
    }

    pub fn dual_rail(&self) -> bool {
        self.dual_rail
    }

    pub fn labels(&self) -> &[BasisLabel] {
        &self.labels
    }

    /// The ground manifold state is always listed first.
    pub fn ground_index(&self) -> usize {
        0
    }

    /// Row of the excited label for `level` on atom `atom` (1-based).
    pub fn excited_index(&self, level: u8, atom: u32) -> Option<usize> {
        let levels = self.scheme.levels();
        if !(2..=levels).contains(&level) || atom == 0 || atom > self.atom_count {
            return None;
        }
        Some(1 + (atom as usize - 1) * (levels as usize - 1) + (level as usize - 2))
    }

    pub fn env_index(&self) -> usize {
        1 + self.atom_count as usize * (self.scheme.levels() as usize - 1)
    }

    pub fn rail_index(&self) -> Option<usize> {
        self.dual_rail.then(|| self.env_index() + 1)
    }

    pub fn label_string(&self, index: usize) -> String {
        let label = &self.labels[index];
        let mode_count = self.scheme.mode_count();
        let n = self.atom_count;
        let atom = match label.atom_state {
            AtomState::Ground => {
                if n == 1 {
                    "1".to_string()
                } else {
                    "{1}".to_string()
                }
            }
            AtomState::Excited { level, atom } => {
                if n == 1 {
                    format!("{level}")
                } else {
                    format!("{{{level}^({atom})}}")
                }
            }
        };
        let modes = ["n_a", "n_b", "n_c"];
        let mut parts = vec![atom];
        if label.env_flag && mode_count > 1 {
            parts.push("*".to_string());
        } else if label.rail_flag {
            for (m, sym) in modes.iter().enumerate().take(mode_count) {
                parts.push(if m == 0 {
                    "0".to_string()
                } else {
                    sym.to_string()
                });
            }
        } else {
            for (m, sym) in modes.iter().enumerate().take(mode_count) {
                let off = label.photon_offsets[m];
                parts.push(match off.cmp(&0) {
                    std::cmp::Ordering::Equal => sym.to_string(),
                    std::cmp::Ordering::Greater => format!("{sym}+{off}"),
                    std::cmp::Ordering::Less => format!("{sym}{off}"),
                });
            }
        }
        parts.push(if label.env_flag { "1" } else { "0" }.to_string());
        if self.dual_rail {
            parts.push(if label.rail_flag { "n_a" } else { "0" }.to_string());
        }
        format!("({})", parts.join(", "))
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.dim() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{}", self.label_string(i))?;
        }
        Ok(())
    }
}

/// Full description of one simulated system.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemSpec {
    pub scheme: Scheme,
    pub drives: Vec<FieldDrive>,
    pub decoherence: DecoherenceSpec,
    pub atom_count: u32,
    pub dual_rail: bool,
    /// The rate unit; dimensionless 1 by convention.
    pub reference_rate: f64,
}

impl SystemSpec {
    pub fn new(scheme: Scheme, drives: Vec<FieldDrive>, decoherence: DecoherenceSpec) -> Self {
        SystemSpec {
            scheme,
            drives,
            decoherence,
            atom_count: 1,
            dual_rail: false,
            reference_rate: 1.0,
        }
    }

    pub fn with_atom_count(mut self, n: u32) -> Self {
        self.atom_count = n;
        self
    }

    pub fn with_dual_rail(mut self, dual_rail: bool) -> Self {
        self.dual_rail = dual_rail;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let expected = self.scheme.mode_count();
        if self.drives.len() != expected {
            return Err(Error::invalid(
                "system",
                format!(
                    "{} scheme needs {expected} drives, got {}",
                    self.scheme,
                    self.drives.len()
                ),
            ));
        }
        let order = [Mode::A, Mode::B, Mode::C];
        for (drive, want) in self.drives.iter().zip(order) {
            if drive.label != want {
                return Err(Error::invalid(
                    "system",
                    format!(
                        "drives must be listed in mode order a, b, c; found {} where {} expected",
                        drive.label.symbol(),
                        want.symbol()
                    ),
                ));
            }
            drive.validate()?;
        }
        if self.atom_count == 0 {
            return Err(Error::invalid("system", "atom_count must be >= 1"));
        }
        if self.reference_rate <= 0.0 || !self.reference_rate.is_finite() {
            return Err(Error::invalid(
                "system",
                "reference_rate must be finite and > 0",
            ));
        }
        Ok(())
    }

    pub fn drive(&self, mode: Mode) -> Option<&FieldDrive> {
        self.drives.get(mode.index())
    }
}

/// Build the extended basis in the canonical order: ground manifold state
/// first, then the excited block of each atom in turn, the environment label,
/// and finally (for dual-rail systems) the empty-rail label.
pub fn build_basis(spec: &SystemSpec) -> Result<Basis> {
    build_basis_with_max(spec, DEFAULT_MAX_DIM)
}

/// Same as [`build_basis`] with an explicit cap on the basis dimension.
pub fn build_basis_with_max(spec: &SystemSpec, max_dim: usize) -> Result<Basis> {
    spec.validate()?;
    let levels = spec.scheme.levels() as usize;
    let dim = 1 + spec.atom_count as usize * (levels - 1) + 1 + usize::from(spec.dual_rail);
    if dim > max_dim {
        return Err(Error::BasisTooLarge { dim, max: max_dim });
    }
    let mut labels = Vec::with_capacity(dim);
    labels.push(BasisLabel::ground());
    for atom in 1..=spec.atom_count {
        for level in 2..=spec.scheme.levels() {
            labels.push(BasisLabel::excited(level, atom));
        }
    }
    labels.push(BasisLabel::environment(spec.scheme.mode_count()));
    if spec.dual_rail {
        labels.push(BasisLabel::empty_rail());
    }
    Ok(Basis {
        scheme: spec.scheme,
        atom_count: spec.atom_count,
        dual_rail: spec.dual_rail,
        labels,
    })
}

/// Pairwise decoherence coefficients derived from the per-level rates.
///
/// `gamma_kj` entries follow the coefficient rules: `gamma_jj = gamma'_j`,
/// `gamma_ej = gamma'_j / 2 + gamma''_j`, and for distinct non-environment
/// labels `gamma_ij = (gamma'_i + gamma'_j) / 2 + gamma''_i + gamma''_j`.
/// The empty-rail label carries no decoherence of its own, so the `gamma_k0`
/// coefficients coincide with the environment-row forms.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DerivedGammas {
    pub gamma21: f64,
    pub gamma31: f64,
    pub gamma41: f64,
    pub gamma32: f64,
    pub gamma42: f64,
    pub gamma43: f64,
    pub gamma11: f64,
    pub gamma22: f64,
    pub gamma33: f64,
    pub gamma44: f64,
    /// Coherence decay against the empty rail: `gamma_k0 = gamma'_k / 2 + gamma''_k`.
    pub gamma10: f64,
    pub gamma20: f64,
    pub gamma30: f64,
    pub gamma40: f64,
    /// Environment-row coefficients `gamma_ek`, identical in form to `gamma_k0`.
    pub gamma_e: [f64; 4],
}

impl DerivedGammas {
    /// Coefficient for the (i, j) label pair, with 0 standing for the empty
    /// rail. Symmetric in its arguments.
    pub fn pair(&self, i: u8, j: u8) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        match (i, j) {
            (1, 0) => self.gamma10,
            (2, 0) => self.gamma20,
            (3, 0) => self.gamma30,
            (4, 0) => self.gamma40,
            (1, 1) => self.gamma11,
            (2, 1) => self.gamma21,
            (2, 2) => self.gamma22,
            (3, 1) => self.gamma31,
            (3, 2) => self.gamma32,
            (3, 3) => self.gamma33,
            (4, 1) => self.gamma41,
            (4, 2) => self.gamma42,
            (4, 3) => self.gamma43,
            (4, 4) => self.gamma44,
            _ => 0.0,
        }
    }
}

/// Derive every pairwise coefficient used by the analytic formulas from the
/// per-level rates of `spec`. Total on valid input; rates configured for
/// levels beyond `scheme` are ignored.
pub fn derived_gammas(spec: &DecoherenceSpec, scheme: Scheme) -> DerivedGammas {
    let levels = scheme.levels();
    let dp = |j: u8| if j <= levels { spec.depop(j) } else { 0.0 };
    let df = |j: u8| if j <= levels { spec.dephase(j) } else { 0.0 };
    let cross = |i: u8, j: u8| 0.5 * (dp(i) + dp(j)) + df(i) + df(j);
    let env_row = |j: u8| 0.5 * dp(j) + df(j);
    DerivedGammas {
        gamma21: cross(2, 1),
        gamma31: cross(3, 1),
        gamma41: cross(4, 1),
        gamma32: cross(3, 2),
        gamma42: cross(4, 2),
        gamma43: cross(4, 3),
        gamma11: dp(1),
        gamma22: dp(2),
        gamma33: dp(3),
        gamma44: dp(4),
        gamma10: env_row(1),
        gamma20: env_row(2),
        gamma30: env_row(3),
        gamma40: env_row(4),
        gamma_e: [env_row(1), env_row(2), env_row(3), env_row(4)],
    }
}

/// Square complex Hermitian matrix over a labeled basis; the central
/// dynamical object.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    basis: Basis,
    data: DMatrix<Complex64>,
}

/// Hermiticity tolerance accepted at construction.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Trace tolerance accepted at construction.
pub const TRACE_TOL: f64 = 1e-9;
/// Most negative eigenvalue accepted at construction.
pub const POSITIVITY_TOL: f64 = 1e-9;

impl DensityMatrix {
    /// Validate and wrap a density matrix: Hermitian to 1e-12, unit trace to
    /// 1e-9, eigenvalues >= -1e-9.
    pub fn new(basis: Basis, data: DMatrix<Complex64>) -> Result<Self> {
        if data.nrows() != basis.dim() || data.ncols() != basis.dim() {
            return Err(Error::DimensionMismatch {
                left: basis.dim(),
                right: data.nrows().max(data.ncols()),
            });
        }
        let dev = hermiticity_deviation(&data);
        if dev > HERMITICITY_TOL || dev.is_nan() {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let trace = data.diagonal().iter().map(|z| z.re).sum::<f64>();
        let trace_dev = (trace - 1.0).abs();
        if trace_dev > TRACE_TOL || trace_dev.is_nan() {
            return Err(Error::InvalidTrace { trace });
        }
        let min_eig = hermitian_eigenvalues(&data)?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -POSITIVITY_TOL || min_eig.is_nan() {
            return Err(Error::NotPositive {
                min_eigenvalue: min_eig,
            });
        }
        Ok(DensityMatrix { basis, data })
    }

    /// Pure state `|psi><psi|` from normalized amplitudes over the basis.
    pub fn pure(basis: Basis, amplitudes: &[Complex64]) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                left: basis.dim(),
                right: amplitudes.len(),
            });
        }
        let norm_sq: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > TRACE_TOL {
            return Err(Error::invalid(
                "state",
                format!("amplitudes have norm^2 = {norm_sq}, expected 1"),
            ));
        }
        let dim = basis.dim();
        let data = DMatrix::from_fn(dim, dim, |i, j| amplitudes[i] * amplitudes[j].conj());
        Ok(DensityMatrix { basis, data })
    }

    /// The system entirely in the ground manifold state.
    pub fn ground_state(basis: Basis) -> Self {
        let dim = basis.dim();
        let mut data = DMatrix::zeros(dim, dim);
        data[(0, 0)] = Complex64::new(1.0, 0.0);
        DensityMatrix { basis, data }
    }

    /// Wrap integrator output without the eigenvalue check; positivity is
    /// tracked separately in trajectory diagnostics.
    pub(crate) fn from_integrator(basis: Basis, data: DMatrix<Complex64>) -> Self {
        DensityMatrix { basis, data }
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn data(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn element(&self, i: usize, j: usize) -> Complex64 {
        self.data[(i, j)]
    }

    pub fn trace(&self) -> Complex64 {
        self.data.diagonal().iter().sum()
    }

    /// tr(rho^2); 1 for pure states.
    pub fn purity(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                acc += (self.data[(i, j)] * self.data[(j, i)]).re;
            }
        }
        acc
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        hermiticity_deviation(&self.data)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(hermitian_eigenvalues(&self.data)?
            .into_iter()
            .fold(f64::INFINITY, f64::min))
    }
}

pub(crate) fn hermiticity_deviation(m: &DMatrix<Complex64>) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Real eigenvalues of a Hermitian matrix.
pub(crate) fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    if m.nrows() == 1 {
        return Ok(vec![m[(0, 0)].re]);
    }
    let eig = nalgebra::SymmetricEigen::try_new(m.clone(), f64::EPSILON, 10_000)
        .ok_or(Error::EigenFailed)?;
    Ok(eig.eigenvalues.iter().copied().collect())
}

/// Hermitian eigendecomposition returning (eigenvalues, unitary of columns).
pub(crate) fn hermitian_eigen(m: &DMatrix<Complex64>) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    if m.nrows() == 1 {
        return Ok((vec![m[(0, 0)].re], DMatrix::identity(1, 1)));
    }
    let eig = nalgebra::SymmetricEigen::try_new(m.clone(), f64::EPSILON, 10_000)
        .ok_or(Error::EigenFailed)?;
    Ok((eig.eigenvalues.iter().copied().collect(), eig.eigenvectors))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn drive(mode: Mode, rabi: f64, detuning: f64) -> FieldDrive {
        FieldDrive::classical(mode, rabi, detuning)
    }

    fn two_level_spec(dual_rail: bool) -> SystemSpec {
        SystemSpec::new(
            Scheme::TwoLevel,
            vec![drive(Mode::A, 0.1, 3.0)],
            DecoherenceSpec::none(),
        )
        .with_dual_rail(dual_rail)
    }

    #[test]
    fn two_level_dual_rail_basis_order() {
        let basis = build_basis(&two_level_spec(true)).unwrap();
        assert_eq!(basis.dim(), 4);
        assert_eq!(basis.label_string(0), "(1, n_a, 0, 0)");
        assert_eq!(basis.label_string(1), "(2, n_a-1, 0, 0)");
        assert_eq!(basis.label_string(2), "(1, n_a-1, 1, 0)");
        assert_eq!(basis.label_string(3), "(1, 0, 0, n_a)");
        assert_eq!(basis.env_index(), 2);
        assert_eq!(basis.rail_index(), Some(3));
    }

    #[test]
    fn three_level_basis_has_four_labels() {
        let spec = SystemSpec::new(
            Scheme::ThreeLevel,
            vec![drive(Mode::A, 0.1, 0.0), drive(Mode::B, 0.5, 0.0)],
            DecoherenceSpec::none(),
        );
        let basis = build_basis(&spec).unwrap();
        assert_eq!(basis.dim(), 4);
        assert_eq!(
            basis.labels()[1].atom_state,
            AtomState::Excited { level: 2, atom: 1 }
        );
        assert_eq!(
            basis.labels()[2].atom_state,
            AtomState::Excited { level: 3, atom: 1 }
        );
        assert!(basis.labels()[3].env_flag);
    }

    #[test]
    fn four_level_three_atom_basis_counts() {
        let spec = SystemSpec::new(
            Scheme::FourLevel,
            vec![
                drive(Mode::A, 0.1, 0.0),
                drive(Mode::B, 0.5, 0.0),
                drive(Mode::C, 0.2, 0.0),
            ],
            DecoherenceSpec::none(),
        )
        .with_atom_count(3);
        let basis = build_basis(&spec).unwrap();
        // 1 ground + 3 atoms x 3 excited levels + environment
        assert_eq!(basis.dim(), 11);
        assert_eq!(basis.excited_index(2, 1), Some(1));
        assert_eq!(basis.excited_index(4, 1), Some(3));
        assert_eq!(basis.excited_index(2, 2), Some(4));
        assert_eq!(basis.env_index(), 10);
    }

    #[test]
    fn basis_too_large_is_rejected() {
        let spec = two_level_spec(false).with_atom_count(10_000);
        match build_basis(&spec) {
            Err(Error::BasisTooLarge { dim, max }) => {
                assert_eq!(dim, 10_002);
                assert_eq!(max, DEFAULT_MAX_DIM);
            }
            other => panic!("expected BasisTooLarge, got {other:?}"),
        }
    }

    #[test]
    fn basis_construction_is_deterministic() {
        let a = build_basis(&two_level_spec(true)).unwrap();
        let b = build_basis(&two_level_spec(true)).unwrap();
        assert_eq!(a.to_string(), b.to_string());
        assert_eq!(a, b);
    }

    #[test]
    fn drive_count_must_match_scheme() {
        let spec = SystemSpec::new(
            Scheme::ThreeLevel,
            vec![drive(Mode::A, 0.1, 0.0)],
            DecoherenceSpec::none(),
        );
        assert!(build_basis(&spec).is_err());
    }

    #[test]
    fn vacuum_rabi_consistency_mode_b() {
        // |rabi|^2 = (n + 1) |vacuum|^2 for mode b.
        let good = FieldDrive::new(
            Mode::B,
            Complex64::new(2.0, 0.0),
            0.0,
            PhotonOccupancy::FockCount(3),
        )
        .with_vacuum_rabi(Complex64::new(1.0, 0.0));
        assert!(good.validate().is_ok());
        let bad = FieldDrive::new(
            Mode::B,
            Complex64::new(2.0, 0.0),
            0.0,
            PhotonOccupancy::FockCount(4),
        )
        .with_vacuum_rabi(Complex64::new(1.0, 0.0));
        assert!(bad.validate().is_err());
        let good_a = FieldDrive::new(
            Mode::A,
            Complex64::new(2.0, 0.0),
            0.0,
            PhotonOccupancy::FockCount(4),
        )
        .with_vacuum_rabi(Complex64::new(1.0, 0.0));
        assert!(good_a.validate().is_ok());
    }

    #[test]
    fn derived_gammas_pure_depop() {
        let spec = DecoherenceSpec::none().with_depop(2, 1.0).unwrap();
        let g = derived_gammas(&spec, Scheme::TwoLevel);
        assert_eq!(g.gamma21, 0.5);
        assert_eq!(g.gamma20, 0.5);
        assert_eq!(g.gamma10, 0.0);
        assert_eq!(g.gamma22, 1.0);
    }

    #[test]
    fn derived_gammas_dephasing_sum() {
        let spec = DecoherenceSpec::none()
            .with_dephase(1, 0.1)
            .unwrap()
            .with_dephase(3, 0.2)
            .unwrap();
        let g = derived_gammas(&spec, Scheme::ThreeLevel);
        assert!((g.gamma31 - 0.3).abs() < 1e-15);
    }

    #[test]
    fn derived_gammas_level_four() {
        let spec = DecoherenceSpec::none()
            .with_depop(4, 2.0)
            .unwrap()
            .with_dephase(4, 0.5)
            .unwrap();
        let g = derived_gammas(&spec, Scheme::FourLevel);
        assert!((g.gamma40 - 1.5).abs() < 1e-15);
        assert!((g.gamma41 - 1.5).abs() < 1e-15);
    }

    #[test]
    fn derived_gammas_symmetry() {
        let spec = DecoherenceSpec::none()
            .with_depop(2, 1.3)
            .unwrap()
            .with_depop(4, 0.4)
            .unwrap()
            .with_dephase(1, 0.2)
            .unwrap()
            .with_dephase(3, 0.7)
            .unwrap();
        let g = derived_gammas(&spec, Scheme::FourLevel);
        for i in 0..=4u8 {
            for j in 0..=4u8 {
                assert_eq!(g.pair(i, j), g.pair(j, i));
            }
        }
    }

    #[test]
    fn density_matrix_validation() {
        let basis = build_basis(&two_level_spec(false)).unwrap();
        let dim = basis.dim();
        let mut data = DMatrix::<Complex64>::zeros(dim, dim);
        data[(0, 0)] = Complex64::new(1.0, 0.0);
        assert!(DensityMatrix::new(basis.clone(), data.clone()).is_ok());

        // Non-Hermitian
        let mut bad = data.clone();
        bad[(0, 1)] = Complex64::new(0.1, 0.0);
        assert!(matches!(
            DensityMatrix::new(basis.clone(), bad),
            Err(Error::NotHermitian { .. })
        ));

        // Wrong trace
        let mut bad = data.clone();
        bad[(0, 0)] = Complex64::new(0.5, 0.0);
        assert!(matches!(
            DensityMatrix::new(basis.clone(), bad),
            Err(Error::InvalidTrace { .. })
        ));

        // Negative eigenvalue
        let mut bad = data;
        bad[(0, 0)] = Complex64::new(1.5, 0.0);
        bad[(1, 1)] = Complex64::new(-0.5, 0.0);
        assert!(matches!(
            DensityMatrix::new(basis, bad),
            Err(Error::NotPositive { .. })
        ));
    }

    #[test]
    fn derived_gammas_ignores_levels_beyond_scheme() {
        let spec = DecoherenceSpec::none()
            .with_depop(2, 1.0)
            .unwrap()
            .with_depop(4, 3.0)
            .unwrap();
        let two = derived_gammas(&spec, Scheme::TwoLevel);
        assert_eq!(two.gamma41, 0.0);
        assert_eq!(two.gamma40, 0.0);
        let four = derived_gammas(&spec, Scheme::FourLevel);
        assert_eq!(four.gamma41, 1.5);
    }

    #[test]
    fn core_types_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<SystemSpec>();
        assert_send_sync::<FieldDrive>();
        assert_send_sync::<DecoherenceSpec>();
        assert_send_sync::<Basis>();
        assert_send_sync::<BasisLabel>();
        assert_send_sync::<DensityMatrix>();
        assert_send_sync::<DerivedGammas>();
    }

    #[test]
    fn pure_state_purity() {
        let basis = build_basis(&two_level_spec(true)).unwrap();
        let s = 0.5_f64.sqrt();
        let rho = DensityMatrix::pure(
            basis,
            &[
                Complex64::new(s, 0.0),
                Complex64::default(),
                Complex64::default(),
                Complex64::new(s, 0.0),
            ],
        )
        .unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-12);
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
    }
}
