//! Hamiltonian construction and coefficient rewriting.
//!
//! A [`HamiltonianModel`] is a structured coefficient object: canonical
//! variable pairs, a quadratic form (inverse-capacitance and inverse-inductance
//! matrices), Josephson cosine terms, plus the list of affine expressions
//! through which an unspecified matter box is entered. Unitary transformations
//! act as exact coefficient rewrites; numbers appear only when a model is
//! evaluated for the numeric modules.

use nalgebra::{DMatrix, DVector};
use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::circuit::{Topology, Units, ValidatedSpec};
use crate::coeff::{ratio_to_f64, Atom, AtomValues, Coeff, RatMat};
use crate::consts;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VarKind {
    Flux,
    Charge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sector {
    Photon,
    Matter,
}

/// Which standard quantization procedure produced the model. The convention
/// fixes how a coherent amplitude maps onto the flux/charge c-numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Procedure {
    /// Node fluxes are coordinates: φ ∝ (a + a†), q ∝ -i(a - a†).
    FluxBased,
    /// Charges are coordinates: q ∝ (a + a†), φ ∝ -i(a - a†).
    ChargeBased,
}

/// Transmission-line boundary condition. The choice does not affect the
/// no-go analysis; periodic is the default for matrix simplicity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Boundary {
    #[default]
    Periodic,
    Open,
}

/// Abstract models keep the matter box unspecified; concrete models
/// instantiate each cell as a flux-biased Josephson junction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BuildMode {
    Abstract,
    Concrete,
}

/// One conjugate (flux, charge) pair. Both members share a sector and,
/// for matter pairs, a cell index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CanonicalPair {
    pub flux_name: String,
    pub charge_name: String,
    pub sector: Sector,
    pub cell: Option<usize>,
}

/// Symmetric matrix of exact coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SymCoeffMat {
    pub n: usize,
    data: Vec<Coeff>,
}

impl SymCoeffMat {
    pub fn zeros(n: usize) -> Self {
        SymCoeffMat {
            n,
            data: vec![Coeff::zero(); n * n],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> &Coeff {
        &self.data[i * self.n + j]
    }

    /// Add `c` to both (i, j) and (j, i); to the diagonal once.
    pub fn add_sym(&mut self, i: usize, j: usize, c: &Coeff) {
        self.data[i * self.n + j].add_assign(c);
        if i != j {
            self.data[j * self.n + i].add_assign(c);
        }
    }

    pub fn set(&mut self, i: usize, j: usize, c: Coeff) {
        self.data[i * self.n + j] = c.clone();
        self.data[j * self.n + i] = c;
    }

    /// Congruence transform Sᵀ·M·S with a rational substitution matrix.
    pub fn congruence(&self, s: &RatMat) -> SymCoeffMat {
        assert_eq!(s.rows, self.n);
        let n = s.cols;
        let mut out = SymCoeffMat::zeros(n);
        for i in 0..n {
            for j in i..n {
                let mut acc = Coeff::zero();
                for k in 0..self.n {
                    let ski = s[(k, i)];
                    if ski.is_zero() {
                        continue;
                    }
                    for l in 0..self.n {
                        let slj = s[(l, j)];
                        if slj.is_zero() {
                            continue;
                        }
                        acc.add_assign(&self.get(k, l).scale(ski * slj));
                    }
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn eval(&self, values: &AtomValues) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j).eval(values))
    }
}

/// Quadratic part ½ xᵀFx + ½ yᵀGy + λ_f·x + λ_q·y + const, with x the flux
/// coordinates and y the charges. Linear terms and the constant are plain
/// numbers in internal units; they arise only from c-number displacements.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    pub flux: SymCoeffMat,
    pub charge: SymCoeffMat,
    pub linear_flux: Vec<f64>,
    pub linear_charge: Vec<f64>,
    pub constant: f64,
}

impl QuadraticForm {
    fn zeros(n: usize) -> Self {
        QuadraticForm {
            flux: SymCoeffMat::zeros(n),
            charge: SymCoeffMat::zeros(n),
            linear_flux: vec![0.0; n],
            linear_charge: vec![0.0; n],
            constant: 0.0,
        }
    }
}

/// One Josephson term: amplitude·cos(Σ aᵢ·xᵢ + offset). Argument coefficients
/// are exact rationals over the internal flux coordinates (x = φ·2π/Φ_q), so a
/// junction spanning its own node carries coefficient 1.
#[derive(Debug, Clone, PartialEq)]
pub struct CosineTerm {
    pub amplitude: Coeff,
    pub arg_flux: Vec<Rational64>,
    pub phase_offset: f64,
    pub cell: usize,
}

/// One affine expression through which the abstract matter box is entered.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxArg {
    pub kind: VarKind,
    pub cell: usize,
    /// Rational coefficients over the coordinates of `kind`.
    pub coeffs: Vec<Rational64>,
    /// c-number offset, internal units.
    pub offset: f64,
}

impl BoxArg {
    fn single(kind: VarKind, cell: usize, n: usize, idx: usize) -> Self {
        let mut coeffs = vec![Rational64::zero(); n];
        coeffs[idx] = Rational64::one();
        BoxArg {
            kind,
            cell,
            coeffs,
            offset: 0.0,
        }
    }
}

/// A quantized circuit Hamiltonian as a structured coefficient object.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianModel {
    pub topology: Topology,
    pub mode: BuildMode,
    pub procedure: Procedure,
    pub boundary: Boundary,
    pub pairs: Vec<CanonicalPair>,
    pub quad: QuadraticForm,
    pub cosines: Vec<CosineTerm>,
    pub blackbox: Vec<BoxArg>,
    pub units: Units,
    pub atoms_internal: AtomValues,
    pub atoms_si: AtomValues,
    /// Cell count of the underlying spec (atoms for the thermodynamic limit).
    pub n_cells: usize,
}

impl HamiltonianModel {
    pub fn n_pairs(&self) -> usize {
        self.pairs.len()
    }

    pub fn photon_pairs(&self) -> Vec<usize> {
        (0..self.pairs.len())
            .filter(|&i| self.pairs[i].sector == Sector::Photon)
            .collect()
    }

    pub fn matter_pairs(&self) -> Vec<usize> {
        (0..self.pairs.len())
            .filter(|&i| self.pairs[i].sector == Sector::Matter)
            .collect()
    }

    pub fn is_abstract(&self) -> bool {
        !self.blackbox.is_empty()
    }

    /// Evaluate every coefficient to internal units.
    pub fn evaluate_internal(&self) -> EvaluatedModel {
        let vals = &self.atoms_internal;
        EvaluatedModel {
            pairs: self.pairs.clone(),
            flux: self.quad.flux.eval(vals),
            charge: self.quad.charge.eval(vals),
            linear_flux: DVector::from_vec(self.quad.linear_flux.clone()),
            linear_charge: DVector::from_vec(self.quad.linear_charge.clone()),
            constant: self.quad.constant,
            cosines: self
                .cosines
                .iter()
                .map(|c| EvalCosine {
                    amplitude: c.amplitude.eval(vals),
                    arg_flux: c.arg_flux.iter().map(|r| ratio_to_f64(*r)).collect(),
                    phase_offset: c.phase_offset,
                    cell: c.cell,
                })
                .collect(),
            blackbox: self
                .blackbox
                .iter()
                .map(|b| EvalBoxArg {
                    kind: b.kind,
                    cell: b.cell,
                    coeffs: b.coeffs.iter().map(|r| ratio_to_f64(*r)).collect(),
                    offset: b.offset,
                })
                .collect(),
            units: self.units,
        }
    }

    /// Positive-semidefiniteness check of both quadratic blocks
    /// (internal units, eigenvalues ≥ -tol).
    pub fn quad_psd_defect(&self) -> f64 {
        let ev = self.evaluate_internal();
        let min_f = ev
            .flux
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        let min_g = ev
            .charge
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        min_f.min(min_g)
    }
}

/// Fully numeric view of a model, internal units.
#[derive(Debug, Clone)]
pub struct EvaluatedModel {
    pub pairs: Vec<CanonicalPair>,
    pub flux: DMatrix<f64>,
    pub charge: DMatrix<f64>,
    pub linear_flux: DVector<f64>,
    pub linear_charge: DVector<f64>,
    pub constant: f64,
    pub cosines: Vec<EvalCosine>,
    pub blackbox: Vec<EvalBoxArg>,
    pub units: Units,
}

#[derive(Debug, Clone)]
pub struct EvalCosine {
    pub amplitude: f64,
    pub arg_flux: Vec<f64>,
    pub phase_offset: f64,
    pub cell: usize,
}

#[derive(Debug, Clone)]
pub struct EvalBoxArg {
    pub kind: VarKind,
    pub cell: usize,
    pub coeffs: Vec<f64>,
    pub offset: f64,
}

/// Resonator mode parameters and the flux/charge ↔ ladder conversions.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ModeParams {
    /// Impedance √(L_R/C_R), Ω.
    pub z_r: f64,
    /// Frequency 1/√(L_R·C_R), rad/s.
    pub omega_c: f64,
    /// Zero-point flux √(ħ·Z_R/2), Wb.
    pub flux_zpf: f64,
    /// Zero-point charge √(ħ/(2·Z_R)), C.
    pub charge_zpf: f64,
    /// Dimensionless impedance of the mode in internal units.
    pub z_internal: f64,
}

/// Mode parameters of the resonator of a validated spec.
pub fn resonator_mode(spec: &ValidatedSpec) -> Result<ModeParams> {
    let (z_r, omega_c) = match (spec.z_r, spec.omega_c) {
        (Some(z), Some(w)) => (z, w),
        _ => return Err(Error::TopologyMismatch(spec.topology.as_str().into())),
    };
    Ok(ModeParams {
        z_r,
        omega_c,
        flux_zpf: (consts::HBAR * z_r / 2.0).sqrt(),
        charge_zpf: (consts::HBAR / (2.0 * z_r)).sqrt(),
        z_internal: consts::HBAR * z_r / (spec.units.flux_si * spec.units.flux_si),
    })
}

fn junction_cosine(spec: &ValidatedSpec, pair_count: usize, cell: usize, pair_idx: usize) -> Option<CosineTerm> {
    let e_j = spec.e_j()?;
    if e_j == 0.0 {
        return None;
    }
    let mut arg = vec![Rational64::zero(); pair_count];
    arg[pair_idx] = Rational64::one();
    // Junction potential -E_J·cos((ψ - Φ_ext)·2π/Φ_q). A half-quantum bias
    // folds into a sign flip of the amplitude.
    let phase = -spec.phi_ext_weber / spec.units.flux_si;
    let (amplitude, phase_offset) = if (spec.phi_ext_weber - consts::PHI_Q / 2.0).abs() < 1e-12 * consts::PHI_Q {
        (Coeff::atom(Atom::Ej), 0.0)
    } else if spec.phi_ext_weber.abs() < 1e-12 * consts::PHI_Q {
        (Coeff::atom(Atom::Ej).neg(), 0.0)
    } else {
        (Coeff::atom(Atom::Ej).neg(), phase)
    };
    Some(CosineTerm {
        amplitude,
        arg_flux: arg,
        phase_offset,
        cell,
    })
}

/// Build the Hamiltonian of a flux-based topology (inductive couplings).
pub fn build_flux_hamiltonian(spec: &ValidatedSpec, mode: BuildMode) -> Result<HamiltonianModel> {
    match spec.topology {
        Topology::Fig2InductiveLc => build_fig2(spec, mode),
        Topology::Fig5bInductivePerCell
        | Topology::Fig5cBambaCircuit
        | Topology::Fig5dNoResonatorInductor => build_fig5(spec, mode),
        Topology::Fig6InductiveTline => build_fig6(spec),
        _ => Err(Error::TopologyMismatch(spec.topology.as_str().into())),
    }
}

/// Build the Hamiltonian of a charge-based topology (capacitive couplings).
pub fn build_charge_hamiltonian(spec: &ValidatedSpec, boundary: Boundary) -> Result<HamiltonianModel> {
    match spec.topology {
        Topology::Fig3CapacitiveLc => build_fig3(spec),
        Topology::Fig4CapacitiveTline => build_fig4(spec, boundary),
        _ => Err(Error::TopologyMismatch(spec.topology.as_str().into())),
    }
}

/// Build whichever Hamiltonian the topology calls for, concrete when the
/// cell block carries junction values.
pub fn build_hamiltonian(spec: &ValidatedSpec, boundary: Boundary) -> Result<HamiltonianModel> {
    match spec.topology {
        Topology::Fig3CapacitiveLc | Topology::Fig4CapacitiveTline => {
            build_charge_hamiltonian(spec, boundary)
        }
        _ => {
            let mode = if spec.has_concrete_cells() {
                BuildMode::Concrete
            } else {
                BuildMode::Abstract
            };
            build_flux_hamiltonian(spec, mode)
        }
    }
}

fn model_shell(spec: &ValidatedSpec, mode: BuildMode, procedure: Procedure, boundary: Boundary, pairs: Vec<CanonicalPair>) -> HamiltonianModel {
    let n = pairs.len();
    HamiltonianModel {
        topology: spec.topology,
        mode,
        procedure,
        boundary,
        pairs,
        quad: QuadraticForm::zeros(n),
        cosines: Vec::new(),
        blackbox: Vec::new(),
        units: spec.units,
        atoms_internal: AtomValues::internal(spec, &spec.units),
        atoms_si: AtomValues::si(spec),
        n_cells: spec.n_cells,
    }
}

fn photon_pair(name: &str) -> CanonicalPair {
    CanonicalPair {
        flux_name: format!("phi{name}"),
        charge_name: format!("q{name}"),
        sector: Sector::Photon,
        cell: None,
    }
}

fn matter_pair(suffix: &str, cell: usize) -> CanonicalPair {
    CanonicalPair {
        flux_name: format!("psi{suffix}"),
        charge_name: format!("rho{suffix}"),
        sector: Sector::Matter,
        cell: Some(cell),
    }
}

/// LC resonator whose own inductor couples it to a single black box:
/// H = q²/2C_R + (φ-ψ)²/2L_R + box(ψ, ρ).
fn build_fig2(spec: &ValidatedSpec, mode: BuildMode) -> Result<HamiltonianModel> {
    if mode == BuildMode::Concrete && !spec.has_concrete_cells() {
        return Err(Error::TopologyMismatch(
            "concrete build needs cell junction values".into(),
        ));
    }
    let pairs = vec![photon_pair(""), matter_pair("", 0)];
    let mut m = model_shell(spec, mode, Procedure::FluxBased, Boundary::Periodic, pairs);
    let inv_lr = Coeff::atom(Atom::InvLr);
    m.quad.flux.add_sym(0, 0, &inv_lr);
    m.quad.flux.add_sym(1, 1, &inv_lr);
    m.quad.flux.add_sym(0, 1, &inv_lr.neg());
    m.quad.charge.add_sym(0, 0, &Coeff::atom(Atom::InvCr));
    match mode {
        BuildMode::Abstract => {
            m.blackbox.push(BoxArg::single(VarKind::Flux, 0, 2, 1));
            m.blackbox.push(BoxArg::single(VarKind::Charge, 0, 2, 1));
        }
        BuildMode::Concrete => {
            m.quad.charge.add_sym(1, 1, &Coeff::atom(Atom::InvCj));
            if let Some(cos) = junction_cosine(spec, 2, 0, 1) {
                m.cosines.push(cos);
            }
        }
    }
    Ok(m)
}

/// Resonator with one coupling inductor per cell:
/// H = q²/2C_R + φ²/2L_R + Σ(φ-ψ_j)²/2L_c + cells. The no-resonator-inductor
/// variant drops the φ²/2L_R entry and nothing else.
fn build_fig5(spec: &ValidatedSpec, mode: BuildMode) -> Result<HamiltonianModel> {
    let concrete_demanded = matches!(
        spec.topology,
        Topology::Fig5cBambaCircuit | Topology::Fig5dNoResonatorInductor
    );
    let mode = if concrete_demanded { BuildMode::Concrete } else { mode };
    if mode == BuildMode::Concrete && !spec.has_concrete_cells() {
        return Err(Error::TopologyMismatch(
            "concrete build needs cell junction values".into(),
        ));
    }
    let n = spec.n_cells;
    let mut pairs = vec![photon_pair("")];
    for j in 1..=n {
        pairs.push(matter_pair(&format!("_{j}"), j - 1));
    }
    let mut m = model_shell(spec, mode, Procedure::FluxBased, Boundary::Periodic, pairs);

    if spec.topology != Topology::Fig5dNoResonatorInductor {
        m.quad.flux.add_sym(0, 0, &Coeff::atom(Atom::InvLr));
    }
    let inv_lc = Coeff::atom(Atom::InvLc);
    for j in 1..=n {
        m.quad.flux.add_sym(0, 0, &inv_lc);
        m.quad.flux.add_sym(j, j, &inv_lc);
        m.quad.flux.add_sym(0, j, &inv_lc.neg());
    }
    m.quad.charge.add_sym(0, 0, &Coeff::atom(Atom::InvCr));
    let total = n + 1;
    for j in 1..=n {
        match mode {
            BuildMode::Abstract => {
                m.blackbox.push(BoxArg::single(VarKind::Flux, j - 1, total, j));
                m.blackbox.push(BoxArg::single(VarKind::Charge, j - 1, total, j));
            }
            BuildMode::Concrete => {
                m.quad.charge.add_sym(j, j, &Coeff::atom(Atom::InvCj));
                if let Some(cos) = junction_cosine(spec, total, j - 1, j) {
                    m.cosines.push(cos);
                }
            }
        }
    }
    Ok(m)
}

/// Resonator coupled capacitively to per-cell ports inside the box:
/// H = φ²/2L_R + q²/2C_R + box({ρ_j}, {ψ_j - φ}).
fn build_fig3(spec: &ValidatedSpec) -> Result<HamiltonianModel> {
    let n = spec.n_cells;
    let mut pairs = vec![photon_pair("")];
    for j in 1..=n {
        pairs.push(matter_pair(&format!("_{j}"), j - 1));
    }
    let mut m = model_shell(
        spec,
        BuildMode::Abstract,
        Procedure::ChargeBased,
        Boundary::Periodic,
        pairs,
    );
    m.quad.flux.add_sym(0, 0, &Coeff::atom(Atom::InvLr));
    m.quad.charge.add_sym(0, 0, &Coeff::atom(Atom::InvCr));
    let total = n + 1;
    for j in 1..=n {
        let mut flux_arg = BoxArg::single(VarKind::Flux, j - 1, total, j);
        flux_arg.coeffs[0] = -Rational64::one();
        m.blackbox.push(flux_arg);
        m.blackbox.push(BoxArg::single(VarKind::Charge, j - 1, total, j));
    }
    Ok(m)
}

/// Discretized transmission line coupled capacitively to a long box:
/// H = Σ_j [φ_j²/(2L_TΔx) + (q_{j+1}-q_j)²/(2C_TΔx)] + box({ρ_j}, {ψ_j - φ_j}).
fn build_fig4(spec: &ValidatedSpec, boundary: Boundary) -> Result<HamiltonianModel> {
    let segs = spec
        .segments
        .ok_or_else(|| Error::TopologyMismatch(spec.topology.as_str().into()))?;
    let mut pairs = Vec::with_capacity(2 * segs);
    for j in 1..=segs {
        pairs.push(photon_pair(&format!("_{j}")));
    }
    for j in 1..=segs {
        pairs.push(matter_pair(&format!("_{j}"), j - 1));
    }
    let mut m = model_shell(spec, BuildMode::Abstract, Procedure::ChargeBased, boundary, pairs);
    let inv_lt = Coeff::atom(Atom::InvLtDx);
    let inv_ct = Coeff::atom(Atom::InvCtDx);
    for j in 0..segs {
        m.quad.flux.add_sym(j, j, &inv_lt);
    }
    let links: Vec<(usize, usize)> = match boundary {
        Boundary::Periodic => (0..segs).map(|j| (j, (j + 1) % segs)).collect(),
        Boundary::Open => (0..segs - 1).map(|j| (j, j + 1)).collect(),
    };
    for (a, b) in links {
        if a == b {
            continue; // single periodic segment degenerates to no link
        }
        m.quad.charge.add_sym(a, a, &inv_ct);
        m.quad.charge.add_sym(b, b, &inv_ct);
        m.quad.charge.add_sym(a, b, &inv_ct.neg());
    }
    let total = 2 * segs;
    for j in 0..segs {
        let mut flux_arg = BoxArg::single(VarKind::Flux, j, total, segs + j);
        flux_arg.coeffs[j] = -Rational64::one();
        m.blackbox.push(flux_arg);
        m.blackbox.push(BoxArg::single(VarKind::Charge, j, total, segs + j));
    }
    Ok(m)
}

/// Transmission line whose series inductors run through a long box, two
/// ports per segment:
/// H = Σ_j [q_j²/(2C_TΔx) + (φ_j-ψ_j)²/(2L_TΔx) + (φ_j-ψ'_{j-1})²/(2L_T'Δx)] + box.
fn build_fig6(spec: &ValidatedSpec) -> Result<HamiltonianModel> {
    let segs = spec
        .segments
        .ok_or_else(|| Error::TopologyMismatch(spec.topology.as_str().into()))?;
    let mut pairs = Vec::with_capacity(3 * segs);
    for j in 1..=segs {
        pairs.push(photon_pair(&format!("_{j}")));
    }
    for j in 1..=segs {
        pairs.push(matter_pair(&format!("_{j}"), j - 1));
        pairs.push(matter_pair(&format!("p_{j}"), j - 1));
    }
    let mut m = model_shell(
        spec,
        BuildMode::Abstract,
        Procedure::FluxBased,
        Boundary::Periodic,
        pairs,
    );
    let inv_lt = Coeff::atom(Atom::InvLtDx);
    let inv_ltp = Coeff::atom(Atom::InvLtpDx);
    let inv_ct = Coeff::atom(Atom::InvCtDx);
    let psi = |j: usize| segs + 2 * j; // ψ_{j+1}
    let psip = |j: usize| segs + 2 * j + 1; // ψ'_{j+1}
    for j in 0..segs {
        m.quad.charge.add_sym(j, j, &inv_ct);
        // (φ_j - ψ_j)²/2L_TΔx
        m.quad.flux.add_sym(j, j, &inv_lt);
        m.quad.flux.add_sym(psi(j), psi(j), &inv_lt);
        m.quad.flux.add_sym(j, psi(j), &inv_lt.neg());
        // (φ_j - ψ'_{j-1})²/2L_T'Δx, periodic wrap
        let prev = (j + segs - 1) % segs;
        m.quad.flux.add_sym(j, j, &inv_ltp);
        m.quad.flux.add_sym(psip(prev), psip(prev), &inv_ltp);
        m.quad.flux.add_sym(j, psip(prev), &inv_ltp.neg());
    }
    let total = 3 * segs;
    for j in 0..segs {
        m.blackbox.push(BoxArg::single(VarKind::Flux, j, total, psi(j)));
        m.blackbox.push(BoxArg::single(VarKind::Charge, j, total, psi(j)));
        m.blackbox.push(BoxArg::single(VarKind::Flux, j, total, psip(j)));
        m.blackbox.push(BoxArg::single(VarKind::Charge, j, total, psip(j)));
    }
    Ok(m)
}

/// An affine canonical substitution, exact over the rationals.
///
/// Old coordinates in terms of new: x_old = S·x_new + d_f, and on the charge
/// side y_old = (Sᵀ)⁻¹·y_new + d_q. The charge map is the unique symplectic
/// completion of the flux map, so commutation structure is preserved by
/// construction; a singular flux map has no completion and is rejected.
#[derive(Debug, Clone)]
pub struct ShiftSpec {
    pub flux_map: RatMat,
    pub flux_offset: Vec<f64>,
    pub charge_offset: Vec<f64>,
}

impl ShiftSpec {
    pub fn identity(n: usize) -> Self {
        ShiftSpec {
            flux_map: RatMat::identity(n),
            flux_offset: vec![0.0; n],
            charge_offset: vec![0.0; n],
        }
    }

    /// Photon-coordinate redefinition φ_p → φ_p + Σ c_j·ψ_j (with the
    /// symplectic counterpart ρ_j → ρ_j - c_j·q_p).
    pub fn flux_mix(n: usize, photon: usize, terms: &[(usize, Rational64)]) -> Self {
        let mut s = RatMat::identity(n);
        for (j, c) in terms {
            s[(photon, *j)] = *c;
        }
        ShiftSpec {
            flux_map: s,
            flux_offset: vec![0.0; n],
            charge_offset: vec![0.0; n],
        }
    }

    /// Pure c-number displacement of fluxes and charges (internal units).
    pub fn displacement(flux_offset: Vec<f64>, charge_offset: Vec<f64>) -> Self {
        let n = flux_offset.len();
        assert_eq!(n, charge_offset.len());
        ShiftSpec {
            flux_map: RatMat::identity(n),
            flux_offset,
            charge_offset,
        }
    }

    /// The inverse substitution, when it exists.
    pub fn inverse(&self) -> Result<ShiftSpec> {
        let inv = self
            .flux_map
            .inverse()
            .ok_or_else(|| Error::NonSymplecticGenerator("flux map is singular".into()))?;
        let n = self.flux_offset.len();
        let mut flux_offset = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                flux_offset[i] -= ratio_to_f64(inv[(i, j)]) * self.flux_offset[j];
            }
        }
        let tinv = self.flux_map.transpose(); // ((Sᵀ)⁻¹)⁻¹
        let mut charge_offset = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                charge_offset[i] -= ratio_to_f64(tinv[(i, j)]) * self.charge_offset[j];
            }
        }
        Ok(ShiftSpec {
            flux_map: inv,
            flux_offset,
            charge_offset,
        })
    }
}

fn rat_vec_dot_f64(m: &RatMat, row_major: bool, idx: usize, v: &[f64]) -> f64 {
    let n = v.len();
    (0..n)
        .map(|k| {
            let r = if row_major { m[(idx, k)] } else { m[(k, idx)] };
            ratio_to_f64(r) * v[k]
        })
        .sum()
}

/// Rewrite every coefficient of the model under an affine canonical
/// substitution. The rational parts stay exact; displacement-induced linear
/// and constant terms are accumulated as internal-unit numbers.
pub fn apply_unitary_shift(model: &HamiltonianModel, shift: &ShiftSpec) -> Result<HamiltonianModel> {
    let n = model.n_pairs();
    if shift.flux_map.rows != n || shift.flux_map.cols != n {
        return Err(Error::NonSymplecticGenerator(format!(
            "shift dimension {} does not match model dimension {n}",
            shift.flux_map.rows
        )));
    }
    let s = &shift.flux_map;
    let t = s
        .transpose()
        .inverse()
        .ok_or_else(|| Error::NonSymplecticGenerator("flux map is singular".into()))?;

    let vals = &model.atoms_internal;
    let f_int = model.quad.flux.eval(vals);
    let g_int = model.quad.charge.eval(vals);

    let mut out = model.clone();
    out.quad.flux = model.quad.flux.congruence(s);
    out.quad.charge = model.quad.charge.congruence(&t);

    // Linear and constant bookkeeping: ½(Sx+d)ᵀF(Sx+d) + λᵀ(Sx+d).
    let d = &shift.flux_offset;
    let e = &shift.charge_offset;
    let fd: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| f_int[(i, j)] * d[j]).sum())
        .collect();
    let ge: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| g_int[(i, j)] * e[j]).sum())
        .collect();
    let mut lf = vec![0.0; n];
    let mut lq = vec![0.0; n];
    for j in 0..n {
        // (SᵀFd)_j + (Sᵀλ_f)_j
        lf[j] = rat_vec_dot_f64(s, false, j, &fd) + rat_vec_dot_f64(s, false, j, &model.quad.linear_flux);
        lq[j] = rat_vec_dot_f64(&t, false, j, &ge) + rat_vec_dot_f64(&t, false, j, &model.quad.linear_charge);
    }
    let mut constant = model.quad.constant;
    constant += 0.5 * d.iter().zip(&fd).map(|(a, b)| a * b).sum::<f64>();
    constant += 0.5 * e.iter().zip(&ge).map(|(a, b)| a * b).sum::<f64>();
    constant += model
        .quad
        .linear_flux
        .iter()
        .zip(d)
        .map(|(a, b)| a * b)
        .sum::<f64>();
    constant += model
        .quad
        .linear_charge
        .iter()
        .zip(e)
        .map(|(a, b)| a * b)
        .sum::<f64>();
    out.quad.linear_flux = lf;
    out.quad.linear_charge = lq;
    out.quad.constant = constant;

    // Cosine arguments: aᵀ(Sx + d) = (Sᵀa)ᵀx + aᵀd.
    for cos in &mut out.cosines {
        let old = cos.arg_flux.clone();
        for j in 0..n {
            cos.arg_flux[j] = (0..n).map(|k| s[(k, j)] * old[k]).sum();
        }
        cos.phase_offset += old
            .iter()
            .zip(d)
            .map(|(a, b)| ratio_to_f64(*a) * b)
            .sum::<f64>();
    }

    // Black-box arguments, per kind.
    for arg in &mut out.blackbox {
        let (map, off) = match arg.kind {
            VarKind::Flux => (s, d),
            VarKind::Charge => (&t, e),
        };
        let old = arg.coeffs.clone();
        for j in 0..n {
            arg.coeffs[j] = (0..n).map(|k| map[(k, j)] * old[k]).sum();
        }
        arg.offset += old
            .iter()
            .zip(off)
            .map(|(a, b)| ratio_to_f64(*a) * b)
            .sum::<f64>();
    }

    Ok(out)
}

/// A model after the coherent-amplitude substitution: matter variables only,
/// with the photon pair replaced by c-numbers.
#[derive(Debug, Clone)]
pub struct CNumberModel {
    /// Matter pairs, in the order of the parent model.
    pub pairs: Vec<CanonicalPair>,
    pub flux: DMatrix<f64>,
    pub charge: DMatrix<f64>,
    pub linear_flux: DVector<f64>,
    pub linear_charge: DVector<f64>,
    /// Matter-sector constant (coupling-origin c-number energy), internal units.
    pub constant: f64,
    pub cosines: Vec<EvalCosine>,
    pub blackbox: Vec<EvalBoxArg>,
    /// ħω(|α|²+½) of the substituted mode, internal units.
    pub photon_constant: f64,
    /// Flux c-number of the substituted mode, internal units.
    pub phi_c: f64,
    /// Charge c-number of the substituted mode, internal units.
    pub q_c: f64,
    /// Mode frequency in internal units.
    pub omega_internal: f64,
    pub units: Units,
}

/// Replace the photon pair by the c-numbers implied by a coherent amplitude.
///
/// The remaining model acts on the matter variables only; the bare-mode
/// constant ħω(|α|²+½) is recorded separately from coupling-origin constants.
pub fn c_number_substitute(model: &HamiltonianModel, alpha_re: f64, alpha_im: f64) -> Result<CNumberModel> {
    let photons = model.photon_pairs();
    match photons.len() {
        0 => return Err(Error::NoPhotonSector),
        1 => {}
        k => return Err(Error::MultiplePhotonPairs(k)),
    }
    let p = photons[0];
    let ev = model.evaluate_internal();

    // Mode parameters: bare resonator entries when they exist, diagonal
    // entries of the quadratic form otherwise.
    let (k_flux, m_inv) = bare_mode_entries(model, &ev, p);
    if k_flux <= 0.0 || m_inv <= 0.0 {
        return Err(Error::NoPhotonSector);
    }
    let omega = (k_flux * m_inv).sqrt();
    let z = (m_inv / k_flux).sqrt();

    let (phi_c, q_c) = match model.procedure {
        Procedure::FluxBased => ((2.0 * z).sqrt() * alpha_re, (2.0 / z).sqrt() * alpha_im),
        Procedure::ChargeBased => ((2.0 * z).sqrt() * alpha_im, (2.0 / z).sqrt() * alpha_re),
    };
    let alpha_sq = alpha_re * alpha_re + alpha_im * alpha_im;

    substitute_pair_values(model, &ev, p, phi_c, q_c, omega, alpha_sq)
}

/// Internal (ω, z) of the single photon mode, referred to the bare resonator.
pub fn photon_mode_internal(model: &HamiltonianModel) -> Result<(f64, f64)> {
    let photons = model.photon_pairs();
    match photons.len() {
        0 => return Err(Error::NoPhotonSector),
        1 => {}
        k => return Err(Error::MultiplePhotonPairs(k)),
    }
    let p = photons[0];
    let ev = model.evaluate_internal();
    let (k_flux, m_inv) = bare_mode_entries(model, &ev, p);
    if k_flux <= 0.0 || m_inv <= 0.0 {
        return Err(Error::NoPhotonSector);
    }
    Ok(((k_flux * m_inv).sqrt(), (m_inv / k_flux).sqrt()))
}

fn bare_mode_entries(model: &HamiltonianModel, ev: &EvaluatedModel, p: usize) -> (f64, f64) {
    // The substitution refers to the bare resonator mode: for the
    // inductively-coupled family the photon flux stiffness is 1/L_R alone,
    // not the coupling-dressed diagonal entry.
    let bare_flux = model
        .quad
        .flux
        .get(p, p)
        .terms()
        .filter(|(a, _)| *a != Atom::InvLc)
        .fold(Coeff::zero(), |acc, (a, r)| acc.add(&Coeff::scaled(a, r)));
    let k = bare_flux.eval(&model.atoms_internal);
    let k = if k > 0.0 { k } else { ev.flux[(p, p)] };
    (k, ev.charge[(p, p)])
}

#[allow(clippy::too_many_arguments)]
fn substitute_pair_values(
    model: &HamiltonianModel,
    ev: &EvaluatedModel,
    p: usize,
    phi_c: f64,
    q_c: f64,
    omega: f64,
    alpha_sq: f64,
) -> Result<CNumberModel> {
    let n = model.n_pairs();
    let keep: Vec<usize> = (0..n).filter(|&i| i != p).collect();
    let m = keep.len();

    let mut flux = DMatrix::zeros(m, m);
    let mut charge = DMatrix::zeros(m, m);
    let mut linear_flux = DVector::zeros(m);
    let mut linear_charge = DVector::zeros(m);
    for (a, &i) in keep.iter().enumerate() {
        for (b, &j) in keep.iter().enumerate() {
            flux[(a, b)] = ev.flux[(i, j)];
            charge[(a, b)] = ev.charge[(i, j)];
        }
        linear_flux[a] = ev.linear_flux[i] + ev.flux[(i, p)] * phi_c;
        linear_charge[a] = ev.linear_charge[i] + ev.charge[(i, p)] * q_c;
    }
    let photon_quad = 0.5 * ev.flux[(p, p)] * phi_c * phi_c
        + 0.5 * ev.charge[(p, p)] * q_c * q_c
        + ev.linear_flux[p] * phi_c
        + ev.linear_charge[p] * q_c;
    let photon_constant = omega * (alpha_sq + 0.5);
    // Whatever the photon-sector terms contribute beyond the bare mode energy
    // ħω|α|² (coupling-origin φ_c², for instance) stays with the matter side.
    let residual = photon_quad - omega * alpha_sq;

    let mut cosines = Vec::with_capacity(ev.cosines.len());
    for c in &ev.cosines {
        let mut arg = Vec::with_capacity(m);
        for &i in &keep {
            arg.push(c.arg_flux[i]);
        }
        cosines.push(EvalCosine {
            amplitude: c.amplitude,
            arg_flux: arg,
            phase_offset: c.phase_offset + c.arg_flux[p] * phi_c,
            cell: c.cell,
        });
    }
    let mut blackbox = Vec::with_capacity(ev.blackbox.len());
    for b in &ev.blackbox {
        let mut coeffs = Vec::with_capacity(m);
        for &i in &keep {
            coeffs.push(b.coeffs[i]);
        }
        let photon_part = match b.kind {
            VarKind::Flux => b.coeffs[p] * phi_c,
            VarKind::Charge => b.coeffs[p] * q_c,
        };
        blackbox.push(EvalBoxArg {
            kind: b.kind,
            cell: b.cell,
            coeffs,
            offset: b.offset + photon_part,
        });
    }

    let pairs = keep.iter().map(|&i| model.pairs[i].clone()).collect();
    Ok(CNumberModel {
        pairs,
        flux,
        charge,
        linear_flux,
        linear_charge,
        constant: ev.constant + residual,
        cosines,
        blackbox,
        photon_constant,
        phi_c,
        q_c,
        omega_internal: omega,
        units: model.units,
    })
}

/// One matter cell extracted from a decoupled c-number model: the
/// single-cell Hamiltonian ρ²·m⁻¹/2 + ½k(ψ - center)² + Σ amp·cos(aψ + θ).
#[derive(Debug, Clone)]
pub struct CellProblem {
    pub flux_stiffness: f64,
    pub charge_stiffness: f64,
    pub linear_flux: f64,
    pub linear_charge: f64,
    pub cosines: Vec<(f64, f64, f64)>, // (amplitude, arg coefficient, phase)
    pub constant: f64,
}

impl CNumberModel {
    /// When the matter sector splits into identical independent cells, return
    /// the per-cell problem (the whole point of the symmetric-cell analysis).
    pub fn single_cell(&self) -> Option<CellProblem> {
        let m = self.pairs.len();
        if m == 0 || !self.blackbox.is_empty() {
            return None;
        }
        // Off-diagonal couplings between distinct cells must vanish.
        for i in 0..m {
            for j in 0..m {
                if i != j && (self.flux[(i, j)] != 0.0 || self.charge[(i, j)] != 0.0) {
                    return None;
                }
            }
        }
        let mut per_cell_cos: Vec<Vec<(f64, f64, f64)>> = vec![Vec::new(); m];
        for c in &self.cosines {
            let nz: Vec<usize> = (0..m).filter(|&i| c.arg_flux[i] != 0.0).collect();
            if nz.len() != 1 {
                return None;
            }
            per_cell_cos[nz[0]].push((c.amplitude, c.arg_flux[nz[0]], c.phase_offset));
        }
        let first = CellProblem {
            flux_stiffness: self.flux[(0, 0)],
            charge_stiffness: self.charge[(0, 0)],
            linear_flux: self.linear_flux[0],
            linear_charge: self.linear_charge[0],
            cosines: per_cell_cos[0].clone(),
            constant: self.constant / m as f64,
        };
        for i in 1..m {
            if (self.flux[(i, i)] - first.flux_stiffness).abs() > 1e-12 * first.flux_stiffness.abs()
                || (self.charge[(i, i)] - first.charge_stiffness).abs()
                    > 1e-12 * first.charge_stiffness.abs()
                || (self.linear_flux[i] - first.linear_flux).abs()
                    > 1e-12 * (1.0 + first.linear_flux.abs())
                || per_cell_cos[i] != per_cell_cos[0]
            {
                return None;
            }
        }
        Some(first)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{validate, CellParams, CircuitSpec, ResonatorParams};
    use num_rational::Rational64 as R;

    pub(crate) fn fig5c(n: usize) -> ValidatedSpec {
        validate(&CircuitSpec {
            topology: Topology::Fig5cBambaCircuit,
            n_cells: n,
            resonator: Some(ResonatorParams {
                l_r: Some(1e-9),
                c_r: 1e-12,
            }),
            cells: Some(CellParams {
                l_c: Some(1e-10),
                e_j: Some(1e-22),
                c_j: Some(1e-15),
                phi_ext_over_phi_q: 0.5,
                l_t_prime: None,
            }),
            tline: None,
        })
        .unwrap()
    }

    fn fig2(concrete: bool) -> ValidatedSpec {
        validate(&CircuitSpec {
            topology: Topology::Fig2InductiveLc,
            n_cells: 1,
            resonator: Some(ResonatorParams {
                l_r: Some(1e-9),
                c_r: 1e-12,
            }),
            cells: concrete.then_some(CellParams {
                l_c: None,
                e_j: Some(5e-23),
                c_j: Some(2e-14),
                phi_ext_over_phi_q: 0.0,
                l_t_prime: None,
            }),
            tline: None,
        })
        .unwrap()
    }

    #[test]
    fn fig5c_two_cell_flux_matrix() {
        let m = build_flux_hamiltonian(&fig5c(2), BuildMode::Concrete).unwrap();
        let lr = Coeff::atom(Atom::InvLr);
        let lc = Coeff::atom(Atom::InvLc);
        assert_eq!(
            *m.quad.flux.get(0, 0),
            lr.add(&lc.scale(R::new(2, 1)))
        );
        assert_eq!(*m.quad.flux.get(1, 1), lc);
        assert_eq!(*m.quad.flux.get(2, 2), lc);
        assert_eq!(*m.quad.flux.get(0, 1), lc.neg());
        assert_eq!(*m.quad.flux.get(0, 2), lc.neg());
        assert_eq!(*m.quad.flux.get(1, 2), Coeff::zero());
        assert_eq!(m.cosines.len(), 2);
        assert!(m.blackbox.is_empty());
        // Half-quantum bias flips the junction term positive.
        assert_eq!(m.cosines[0].amplitude, Coeff::atom(Atom::Ej));
        assert_eq!(m.cosines[0].phase_offset, 0.0);
    }

    #[test]
    fn zero_josephson_energy_gives_pure_quadratic() {
        let mut spec = fig5c(2);
        spec.cells.as_mut().unwrap().e_j = Some(0.0);
        let m = build_flux_hamiltonian(&spec, BuildMode::Concrete).unwrap();
        assert!(m.cosines.is_empty());
        assert!(m.blackbox.is_empty());
    }

    #[test]
    fn fig2_abstract_box_entered_through_psi() {
        let m = build_flux_hamiltonian(&fig2(false), BuildMode::Abstract).unwrap();
        let flux_args: Vec<&BoxArg> = m.blackbox.iter().filter(|a| a.kind == VarKind::Flux).collect();
        assert_eq!(flux_args.len(), 1);
        assert_eq!(flux_args[0].coeffs, vec![R::zero(), R::one()]);
        // Coupling term (φ-ψ)²/2L_R present.
        assert_eq!(*m.quad.flux.get(0, 1), Coeff::atom(Atom::InvLr).neg());
    }

    #[test]
    fn fig3_box_arguments_are_psi_minus_phi() {
        let spec = validate(&CircuitSpec {
            topology: Topology::Fig3CapacitiveLc,
            n_cells: 3,
            resonator: Some(ResonatorParams {
                l_r: Some(1e-9),
                c_r: 1e-12,
            }),
            cells: None,
            tline: None,
        })
        .unwrap();
        let m = build_charge_hamiltonian(&spec, Boundary::Periodic).unwrap();
        let flux_args: Vec<&BoxArg> = m.blackbox.iter().filter(|a| a.kind == VarKind::Flux).collect();
        assert_eq!(flux_args.len(), 3);
        for (j, arg) in flux_args.iter().enumerate() {
            let mut expected = vec![R::zero(); 4];
            expected[0] = -R::one();
            expected[j + 1] = R::one();
            assert_eq!(arg.coeffs, expected);
        }
        // No quadratic photon–matter coupling in the charge-based form.
        assert_eq!(*m.quad.flux.get(0, 1), Coeff::zero());
    }

    #[test]
    fn fig4_periodic_charge_matrix_is_circulant_second_difference() {
        let spec = validate(&CircuitSpec {
            topology: Topology::Fig4CapacitiveTline,
            n_cells: 8,
            resonator: None,
            cells: None,
            tline: Some(crate::circuit::TlineParams {
                l_t: 1e-6,
                c_t: 1e-10,
                dx: 2.5e-3,
                length: 1e-2,
                lambda_min: Some(2e-3),
                omega_a: Some(5e10),
            }),
        })
        .unwrap();
        let m = build_charge_hamiltonian(&spec, Boundary::Periodic).unwrap();
        let ct = Coeff::atom(Atom::InvCtDx);
        for j in 0..4 {
            assert_eq!(*m.quad.charge.get(j, j), ct.scale(R::new(2, 1)));
            assert_eq!(*m.quad.charge.get(j, (j + 1) % 4), ct.neg());
        }
        assert_eq!(*m.quad.charge.get(0, 2), Coeff::zero());
    }

    #[test]
    fn fig5d_is_fig5c_without_resonator_inductance() {
        let spec5c = fig5c(3);
        let spec5d = validate(&CircuitSpec {
            topology: Topology::Fig5dNoResonatorInductor,
            n_cells: 3,
            resonator: Some(ResonatorParams {
                l_r: None,
                c_r: 1e-12,
            }),
            cells: spec5c.cells,
            tline: None,
        })
        .unwrap();
        let m5c = build_flux_hamiltonian(&spec5c, BuildMode::Concrete).unwrap();
        let m5d = build_flux_hamiltonian(&spec5d, BuildMode::Concrete).unwrap();
        let expected = m5c.quad.flux.get(0, 0).sub(&Coeff::atom(Atom::InvLr));
        assert_eq!(*m5d.quad.flux.get(0, 0), expected);
        for i in 0..4 {
            for j in 0..4 {
                if i == 0 && j == 0 {
                    continue;
                }
                assert_eq!(m5d.quad.flux.get(i, j), m5c.quad.flux.get(i, j));
                assert_eq!(m5d.quad.charge.get(i, j), m5c.quad.charge.get(i, j));
            }
        }
    }

    #[test]
    fn resonator_mode_reference_values() {
        let mode = resonator_mode(&fig5c(1)).unwrap();
        assert!((mode.omega_c - 3.1623e10).abs() / 3.1623e10 < 1e-4);
        assert!((mode.z_r - 31.623).abs() / 31.623 < 1e-4);
        assert!((mode.flux_zpf - (consts::HBAR * mode.z_r / 2.0).sqrt()).abs() < 1e-30);
        // Symmetric normalization: both conversion factors reduce to
        // √(ħ/2) when Z_R = 1 internally.
        let sym = mode.flux_zpf * mode.charge_zpf;
        assert!((sym - consts::HBAR / 2.0).abs() < 1e-40);
    }

    #[test]
    fn resonator_mode_absent_for_tline() {
        let spec = validate(&CircuitSpec {
            topology: Topology::Fig4CapacitiveTline,
            n_cells: 4,
            resonator: None,
            cells: None,
            tline: Some(crate::circuit::TlineParams {
                l_t: 1e-6,
                c_t: 1e-10,
                dx: 5e-3,
                length: 1e-2,
                lambda_min: None,
                omega_a: None,
            }),
        })
        .unwrap();
        assert!(resonator_mode(&spec).is_err());
    }

    #[test]
    fn u1_shift_moves_coupling_into_box_arguments() {
        // φ → φ+ψ, ρ → ρ-q on the inductive single-box model.
        let m = build_flux_hamiltonian(&fig2(false), BuildMode::Abstract).unwrap();
        let shift = ShiftSpec::flux_mix(2, 0, &[(1, R::one())]);
        let shifted = apply_unitary_shift(&m, &shift).unwrap();
        // Photon sector becomes the bare oscillator...
        assert_eq!(*shifted.quad.flux.get(0, 0), Coeff::atom(Atom::InvLr));
        assert_eq!(*shifted.quad.flux.get(0, 1), Coeff::zero());
        assert_eq!(*shifted.quad.flux.get(1, 1), Coeff::zero());
        // ...and the box charge argument picks up -q.
        let charge_arg = shifted
            .blackbox
            .iter()
            .find(|a| a.kind == VarKind::Charge)
            .unwrap();
        assert_eq!(charge_arg.coeffs, vec![-R::one(), R::one()]);
        // Flux argument stays ψ.
        let flux_arg = shifted
            .blackbox
            .iter()
            .find(|a| a.kind == VarKind::Flux)
            .unwrap();
        assert_eq!(flux_arg.coeffs, vec![R::zero(), R::one()]);
    }

    #[test]
    fn identity_shift_is_identity() {
        let m = build_flux_hamiltonian(&fig5c(2), BuildMode::Concrete).unwrap();
        let shifted = apply_unitary_shift(&m, &ShiftSpec::identity(3)).unwrap();
        assert_eq!(m, shifted);
    }

    #[test]
    fn shift_then_inverse_restores_coefficients() {
        let m = build_flux_hamiltonian(&fig5c(2), BuildMode::Concrete).unwrap();
        let shift = ShiftSpec {
            flux_map: {
                let mut s = RatMat::identity(3);
                s[(0, 1)] = R::new(2, 3);
                s[(0, 2)] = R::new(-1, 2);
                s
            },
            flux_offset: vec![0.25, -0.5, 0.125],
            charge_offset: vec![0.0, 0.75, -0.25],
        };
        let there = apply_unitary_shift(&m, &shift).unwrap();
        let back = apply_unitary_shift(&there, &shift.inverse().unwrap()).unwrap();
        assert_eq!(back.quad.flux, m.quad.flux);
        assert_eq!(back.quad.charge, m.quad.charge);
        for (a, b) in back.quad.linear_flux.iter().zip(&m.quad.linear_flux) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((back.quad.constant - m.quad.constant).abs() < 1e-12);
        for (ca, cb) in back.cosines.iter().zip(&m.cosines) {
            assert_eq!(ca.arg_flux, cb.arg_flux);
            assert!((ca.phase_offset - cb.phase_offset).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_generator_rejected() {
        let m = build_flux_hamiltonian(&fig2(false), BuildMode::Abstract).unwrap();
        let shift = ShiftSpec {
            flux_map: RatMat::zeros(2, 2),
            flux_offset: vec![0.0; 2],
            charge_offset: vec![0.0; 2],
        };
        assert!(matches!(
            apply_unitary_shift(&m, &shift),
            Err(Error::NonSymplecticGenerator(_))
        ));
    }

    #[test]
    fn vacuum_substitution_records_zero_point_energy() {
        let m = build_flux_hamiltonian(&fig5c(1), BuildMode::Concrete).unwrap();
        let c = c_number_substitute(&m, 0.0, 0.0).unwrap();
        assert_eq!(c.phi_c, 0.0);
        assert_eq!(c.q_c, 0.0);
        // Internal units put the resonator at ω = 1, so ħω/2 = ½.
        assert!((c.photon_constant - 0.5).abs() < 1e-12);
        assert_eq!(c.pairs.len(), 1);
    }

    #[test]
    fn real_amplitude_decouples_identical_cells() {
        let m = build_flux_hamiltonian(&fig5c(4), BuildMode::Concrete).unwrap();
        let c = c_number_substitute(&m, 0.8, 0.0).unwrap();
        let cell = c.single_cell().expect("cells decouple");
        assert!(cell.flux_stiffness > 0.0);
        assert!(cell.charge_stiffness > 0.0);
        // The linear term is -φ_c/L_c per cell.
        let inv_lc = m.atoms_internal.inv_lc;
        assert!((cell.linear_flux - (-c.phi_c * inv_lc)).abs() < 1e-12 * inv_lc);
    }

    #[test]
    fn charge_based_substitution_displaces_momentum_only() {
        // After the U₁-style shift the box sees (ψ, ρ-q); a c-number
        // substitution then leaves the charge offset -q_c in the argument.
        let m = build_flux_hamiltonian(&fig2(false), BuildMode::Abstract).unwrap();
        let shifted = apply_unitary_shift(&m, &ShiftSpec::flux_mix(2, 0, &[(1, R::one())])).unwrap();
        let c = c_number_substitute(&shifted, 0.3, 0.7).unwrap();
        let charge_arg = c.blackbox.iter().find(|a| a.kind == VarKind::Charge).unwrap();
        assert!((charge_arg.offset - (-c.q_c)).abs() < 1e-12);
        let flux_arg = c.blackbox.iter().find(|a| a.kind == VarKind::Flux).unwrap();
        assert_eq!(flux_arg.offset, 0.0);
    }

    #[test]
    fn no_photon_sector_is_an_error() {
        let m = build_flux_hamiltonian(&fig5c(1), BuildMode::Concrete).unwrap();
        let c = c_number_substitute(&m, 0.0, 0.0).unwrap();
        // Re-substituting a matter-only model has no photon pair to replace.
        let matter_only = HamiltonianModel {
            pairs: c.pairs.clone(),
            ..m.clone()
        };
        let mut matter_only = matter_only;
        matter_only.quad = QuadraticForm::zeros(1);
        assert!(matches!(
            c_number_substitute(&matter_only, 0.0, 0.0),
            Err(Error::NoPhotonSector)
        ));
    }

    #[test]
    fn psd_preserved_by_builders() {
        for n in [1, 2, 5] {
            let m = build_flux_hamiltonian(&fig5c(n), BuildMode::Concrete).unwrap();
            assert!(m.quad_psd_defect() > -1e-12);
        }
    }
}
