//! Exact numerics on truncated Hilbert spaces: matrix assembly in per-mode
//! harmonic bases, dense and iterative spectra, observables, partition
//! functions and the consistency checks built on them.

pub mod lanczos;
pub mod ops;
pub mod sparse;
pub mod thermal;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::{EvaluatedModel, HamiltonianModel, Sector};
use lanczos::{lowest_eigenpairs, LanczosOptions};
use sparse::Csr;

/// Truncation prescription: Fock states per photon pair, harmonic-eigenbasis
/// states per matter cell pair.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TruncatedBasis {
    pub photon_cutoff: usize,
    pub cell_cutoff: usize,
    /// Hard cap on the total dimension.
    pub budget: usize,
    /// Dense diagonalization below this dimension, Lanczos above.
    pub dense_threshold: usize,
    pub seed: u64,
}

impl TruncatedBasis {
    pub fn new(photon_cutoff: usize, cell_cutoff: usize) -> Self {
        TruncatedBasis {
            photon_cutoff,
            cell_cutoff,
            budget: 400_000,
            dense_threshold: 4096,
            seed: 7,
        }
    }
}

/// A model assembled into a real symmetric matrix on the product basis.
pub struct AssembledMatrix {
    pub dim: usize,
    pub mode_dims: Vec<usize>,
    /// Per-mode basis impedance (internal units).
    pub mode_z: Vec<f64>,
    /// Per-mode basis frequency (internal units).
    pub mode_omega: Vec<f64>,
    pub sectors: Vec<Sector>,
    pub csr: Csr,
    pub dense: Option<DMatrix<f64>>,
    pub hermiticity_defect: f64,
    pub dense_threshold: usize,
    pub seed: u64,
}

/// Eigensolver path taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveMethod {
    Dense,
    Iterative,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumResult {
    /// Ascending eigenvalues, internal units.
    pub eigenvalues: Vec<f64>,
    /// E₁ - E₀ when two eigenvalues were computed.
    pub gap: Option<f64>,
    /// Ground-state ⟨φ⟩ of the first photon mode, internal units.
    pub exp_phi: f64,
    /// Ground-state ⟨φ²⟩ of the first photon mode.
    pub exp_phi2: f64,
    /// Ground-state occupation of the photon basis mode.
    pub exp_n_photon: f64,
    pub dim: usize,
    pub method: SolveMethod,
    pub hermiticity_defect: f64,
}

fn mode_basis_params(ev: &EvaluatedModel, i: usize) -> Result<(f64, f64)> {
    let mut k = ev.flux[(i, i)];
    if k <= 1e-12 {
        // Cosine curvature stands in when a substitution removed the
        // quadratic confinement of this coordinate.
        let curvature: f64 = ev
            .cosines
            .iter()
            .map(|c| c.amplitude.abs() * c.arg_flux[i] * c.arg_flux[i])
            .sum();
        k += curvature;
    }
    let m_inv = ev.charge[(i, i)];
    if k <= 0.0 || m_inv <= 0.0 {
        return Err(Error::InvalidSpec(format!(
            "pair {} ({}) has no harmonic basis: flux stiffness {k}, charge stiffness {m_inv}",
            i, ev.pairs[i].flux_name
        )));
    }
    Ok(((k * m_inv).sqrt(), (m_inv / k).sqrt()))
}

/// Assemble the Hamiltonian matrix of a concrete model on the product basis.
///
/// Quadratic terms go through ladder algebra (operators built at cutoff+4 and
/// projected); cosine terms use exact displacement-operator matrix elements.
/// Linear charge terms are removed by an exact momentum displacement, which
/// shifts the energy by -½λᵀG⁻¹λ and leaves every other term alone.
pub fn assemble_matrix(model: &HamiltonianModel, basis: &TruncatedBasis) -> Result<AssembledMatrix> {
    assemble_evaluated(&model.evaluate_internal(), basis)
}

/// Assembly from an already-evaluated (numeric) model.
pub fn assemble_evaluated(ev: &EvaluatedModel, basis: &TruncatedBasis) -> Result<AssembledMatrix> {
    if !ev.blackbox.is_empty() {
        return Err(Error::AbstractBlackBoxPresent);
    }
    if basis.photon_cutoff < 2 || basis.cell_cutoff < 2 {
        return Err(Error::InvalidSpec("basis cutoffs must be at least 2".into()));
    }
    let n = ev.pairs.len();

    let mode_dims: Vec<usize> = ev
        .pairs
        .iter()
        .map(|p| match p.sector {
            Sector::Photon => basis.photon_cutoff,
            Sector::Matter => basis.cell_cutoff,
        })
        .collect();
    let dim: usize = mode_dims.iter().product();
    if dim > basis.budget {
        return Err(Error::DimensionBudgetExceeded {
            dim,
            budget: basis.budget,
        });
    }

    let mut mode_z = Vec::with_capacity(n);
    let mut mode_omega = Vec::with_capacity(n);
    for i in 0..n {
        let (w, z) = mode_basis_params(ev, i)?;
        mode_omega.push(w);
        mode_z.push(z);
    }

    // Strides, last mode fastest.
    let mut strides = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * mode_dims[i + 1];
    }

    // Fold linear charge terms: constant -½λᵀG⁻¹λ, λ off the table.
    let mut constant = ev.constant;
    let lam = &ev.linear_charge;
    if lam.iter().any(|v| *v != 0.0) {
        let eig = ev.charge.clone().symmetric_eigen();
        let mut shift = 0.0;
        for (i, &w) in eig.eigenvalues.iter().enumerate() {
            let comp = eig.eigenvectors.column(i).dot(&DVector::from_column_slice(lam.as_slice()));
            if w.abs() < 1e-12 {
                if comp.abs() > 1e-10 * (1.0 + lam.norm()) {
                    return Err(Error::InvalidSpec(
                        "linear charge term along a massless direction".into(),
                    ));
                }
            } else {
                shift -= 0.5 * comp * comp / w;
            }
        }
        constant += shift;
    }

    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();

    // Per-pair quadratic and linear-flux pieces.
    for i in 0..n {
        let d = mode_dims[i];
        let z = mode_z[i];
        let mut local = ops::xx_matrix(d, z) * (0.5 * ev.flux[(i, i)]);
        local += ops::pp_matrix(d, z) * (0.5 * ev.charge[(i, i)]);
        if ev.linear_flux[i] != 0.0 {
            local += ops::x_matrix(d, z) * ev.linear_flux[i];
        }
        add_product_term(&mut triplets, &mode_dims, &strides, &[(i, &local)], 1.0);
    }

    // Cross quadratic couplings.
    for i in 0..n {
        for j in (i + 1)..n {
            let fij = ev.flux[(i, j)];
            if fij != 0.0 {
                let xi = ops::x_matrix(mode_dims[i], mode_z[i]);
                let xj = ops::x_matrix(mode_dims[j], mode_z[j]);
                add_product_term(&mut triplets, &mode_dims, &strides, &[(i, &xi), (j, &xj)], fij);
            }
            let gij = ev.charge[(i, j)];
            if gij != 0.0 {
                // P_i·P_j = -(1/(2√(z_i z_j)))·d_i⊗d_j with d = (b - b†).
                let di = ops::ladder_diff_matrix(mode_dims[i] + ops::CUTOFF_PAD)
                    .view((0, 0), (mode_dims[i], mode_dims[i]))
                    .into_owned();
                let dj = ops::ladder_diff_matrix(mode_dims[j] + ops::CUTOFF_PAD)
                    .view((0, 0), (mode_dims[j], mode_dims[j]))
                    .into_owned();
                let coeff = -gij / (2.0 * (mode_z[i] * mode_z[j]).sqrt());
                add_product_term(&mut triplets, &mode_dims, &strides, &[(i, &di), (j, &dj)], coeff);
            }
        }
    }

    // Cosine terms: single-mode directly, multi-mode via the displacement
    // product expansion Re[e^{iθ}·⊗(C_k + i·S_k)].
    for cos in &ev.cosines {
        let support: Vec<usize> = (0..n).filter(|&i| cos.arg_flux[i] != 0.0).collect();
        match support.len() {
            0 => {
                let v = cos.amplitude * cos.phase_offset.cos();
                for r in 0..dim {
                    triplets.push((r, r, v));
                }
            }
            1 => {
                let i = support[0];
                let m = ops::cos_matrix(
                    mode_dims[i],
                    mode_z[i],
                    cos.arg_flux[i],
                    cos.phase_offset,
                    cos.amplitude,
                );
                add_product_term(&mut triplets, &mode_dims, &strides, &[(i, &m)], 1.0);
            }
            _ => {
                let parts: Vec<(usize, DMatrix<f64>, DMatrix<f64>)> = support
                    .iter()
                    .map(|&i| {
                        let c = ops::cos_matrix(mode_dims[i], mode_z[i], cos.arg_flux[i], 0.0, 1.0);
                        let s = ops::cos_matrix(
                            mode_dims[i],
                            mode_z[i],
                            cos.arg_flux[i],
                            -std::f64::consts::FRAC_PI_2,
                            1.0,
                        );
                        (i, c, s)
                    })
                    .collect();
                let m = parts.len();
                for mask in 0..(1usize << m) {
                    let t = mask.count_ones() as usize;
                    let phase = match t % 4 {
                        0 => cos.phase_offset.cos(),
                        1 => -cos.phase_offset.sin(),
                        2 => -cos.phase_offset.cos(),
                        _ => cos.phase_offset.sin(),
                    };
                    if phase == 0.0 {
                        continue;
                    }
                    let factors: Vec<(usize, &DMatrix<f64>)> = parts
                        .iter()
                        .enumerate()
                        .map(|(b, (i, c, s))| {
                            if mask >> b & 1 == 1 {
                                (*i, s)
                            } else {
                                (*i, c)
                            }
                        })
                        .collect();
                    add_product_term(
                        &mut triplets,
                        &mode_dims,
                        &strides,
                        &factors,
                        cos.amplitude * phase,
                    );
                }
            }
        }
    }

    if constant != 0.0 {
        for r in 0..dim {
            triplets.push((r, r, constant));
        }
    }

    let csr = Csr::from_triplets(dim, &mut triplets);
    let hermiticity_defect = csr.asymmetry();
    let dense = if dim <= basis.dense_threshold {
        let mut m = DMatrix::zeros(dim, dim);
        for r in 0..dim {
            for k in csr.row_ptr[r]..csr.row_ptr[r + 1] {
                m[(r, csr.col_idx[k])] = csr.values[k];
            }
        }
        // Exact symmetrization.
        let mt = m.transpose();
        Some((m + mt) * 0.5)
    } else {
        None
    };

    Ok(AssembledMatrix {
        dim,
        mode_dims,
        mode_z,
        mode_omega,
        sectors: ev.pairs.iter().map(|p| p.sector).collect(),
        csr,
        dense,
        hermiticity_defect,
        dense_threshold: basis.dense_threshold,
        seed: basis.seed,
    })
}

/// Add coeff·(⊗ factors, identity elsewhere) to the triplet list.
fn add_product_term(
    triplets: &mut Vec<(usize, usize, f64)>,
    mode_dims: &[usize],
    strides: &[usize],
    factors: &[(usize, &DMatrix<f64>)],
    coeff: f64,
) {
    let dim: usize = mode_dims.iter().product();
    let fpairs: Vec<usize> = factors.iter().map(|(i, _)| *i).collect();
    for row in 0..dim {
        // Per-factor row sub-indices.
        let subs: Vec<usize> = fpairs
            .iter()
            .map(|&i| row / strides[i] % mode_dims[i])
            .collect();
        // Enumerate all column choices on the factor modes.
        let mut col_choices = vec![0usize; factors.len()];
        loop {
            let mut v = coeff;
            for (k, (_, m)) in factors.iter().enumerate() {
                v *= m[(subs[k], col_choices[k])];
                if v == 0.0 {
                    break;
                }
            }
            if v != 0.0 {
                let mut col = row;
                for (k, &i) in fpairs.iter().enumerate() {
                    col = col - subs[k] * strides[i] + col_choices[k] * strides[i];
                }
                triplets.push((row, col, v));
            }
            // Odometer increment.
            let mut k = 0;
            loop {
                if k == factors.len() {
                    break;
                }
                col_choices[k] += 1;
                if col_choices[k] < mode_dims[fpairs[k]] {
                    break;
                }
                col_choices[k] = 0;
                k += 1;
            }
            if k == factors.len() {
                break;
            }
        }
    }
}

impl AssembledMatrix {
    /// Apply a single-mode operator to a state vector.
    pub fn apply_single_mode(&self, mode: usize, op: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
        let dim = self.dim;
        let d = self.mode_dims[mode];
        let mut strides = vec![1usize; self.mode_dims.len()];
        for i in (0..self.mode_dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.mode_dims[i + 1];
        }
        let s = strides[mode];
        let mut out = vec![0.0; dim];
        for idx in 0..dim {
            let a = idx / s % d;
            let base = idx - a * s;
            let mut acc = 0.0;
            for b in 0..d {
                let w = op[(a, b)];
                if w != 0.0 {
                    acc += w * v[base + b * s];
                }
            }
            out[idx] = acc;
        }
        out
    }

    fn first_photon_mode(&self) -> Option<usize> {
        self.sectors.iter().position(|s| *s == Sector::Photon)
    }
}

/// Lowest-k eigenpairs with ground-state observables.
///
/// Dense below the threshold dimension, seeded Lanczos above; deterministic
/// for a fixed seed and iteration cap.
pub fn ground_state(assembled: &AssembledMatrix, k: usize) -> Result<SpectrumResult> {
    if k < 1 {
        return Err(Error::InvalidSpec("ground_state needs k >= 1".into()));
    }
    let (eigenvalues, ground, method) = if let Some(dense) = &assembled.dense {
        let eig = dense.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..assembled.dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
        let evals: Vec<f64> = order.iter().take(k).map(|&i| eig.eigenvalues[i]).collect();
        let g: Vec<f64> = eig.eigenvectors.column(order[0]).iter().cloned().collect();
        (evals, g, SolveMethod::Dense)
    } else {
        let r = lowest_eigenpairs(
            &assembled.csr,
            &LanczosOptions {
                k,
                max_iterations: 400.max(4 * k),
                residual_tol: 1e-10,
                seed: assembled.seed,
            },
        )?;
        let g: Vec<f64> = r.eigenvectors.column(0).iter().cloned().collect();
        (r.eigenvalues, g, SolveMethod::Iterative)
    };

    let (exp_phi, exp_phi2, exp_n) = match assembled.first_photon_mode() {
        Some(p) => {
            let d = assembled.mode_dims[p];
            let z = assembled.mode_z[p];
            let x = ops::x_matrix(d, z);
            let xx = ops::xx_matrix(d, z);
            let xv = assembled.apply_single_mode(p, &x, &ground);
            let xxv = assembled.apply_single_mode(p, &xx, &ground);
            let nmat = DMatrix::from_fn(d, d, |i, j| if i == j { i as f64 } else { 0.0 });
            let nv = assembled.apply_single_mode(p, &nmat, &ground);
            let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
            (dot(&ground, &xv), dot(&ground, &xxv), dot(&ground, &nv))
        }
        None => (0.0, 0.0, 0.0),
    };

    let gap = if eigenvalues.len() >= 2 {
        Some(eigenvalues[1] - eigenvalues[0])
    } else {
        None
    };
    Ok(SpectrumResult {
        eigenvalues,
        gap,
        exp_phi,
        exp_phi2,
        exp_n_photon: exp_n,
        dim: assembled.dim,
        method,
        hermiticity_defect: assembled.hermiticity_defect,
    })
}

/// Convergence report of the unitary-equivalence check.
#[derive(Debug, Clone, Serialize)]
pub struct UnitaryEquivalenceReport {
    pub rungs: Vec<UnitaryRung>,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct UnitaryRung {
    pub photon_cutoff: usize,
    pub cell_cutoff: usize,
    pub eigenvalues_a: Vec<f64>,
    pub eigenvalues_b: Vec<f64>,
    pub max_delta: f64,
}

/// Compare the lowest eigenvalues of two models over a ladder of cutoffs.
/// Unitarily equivalent models must converge to each other; the report
/// passes when the tightest rung agrees within `tol`.
pub fn verify_unitary_equivalence(
    model_a: &HamiltonianModel,
    model_b: &HamiltonianModel,
    ladder: &[(usize, usize)],
    k: usize,
    tol: f64,
) -> Result<UnitaryEquivalenceReport> {
    let mut rungs = Vec::with_capacity(ladder.len());
    for &(np, nc) in ladder {
        let basis = TruncatedBasis::new(np, nc);
        let a = ground_state(&assemble_matrix(model_a, &basis)?, k)?;
        let b = ground_state(&assemble_matrix(model_b, &basis)?, k)?;
        let max_delta = a
            .eigenvalues
            .iter()
            .zip(&b.eigenvalues)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0f64, f64::max);
        rungs.push(UnitaryRung {
            photon_cutoff: np,
            cell_cutoff: nc,
            eigenvalues_a: a.eigenvalues,
            eigenvalues_b: b.eigenvalues,
            max_delta,
        });
    }
    let pass = rungs.last().map(|r| r.max_delta < tol).unwrap_or(false);
    Ok(UnitaryEquivalenceReport {
        rungs,
        tolerance: tol,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{validate, CellParams, CircuitSpec, ResonatorParams, Topology};
    use crate::hamiltonian::{build_flux_hamiltonian, BuildMode};
    use approx::assert_relative_eq;

    fn fig5c(n: usize, e_j: f64) -> crate::circuit::ValidatedSpec {
        validate(&CircuitSpec {
            topology: Topology::Fig5cBambaCircuit,
            n_cells: n,
            resonator: Some(ResonatorParams {
                l_r: Some(1e-9),
                c_r: 1e-12,
            }),
            cells: Some(CellParams {
                l_c: Some(1e-10),
                e_j: Some(e_j),
                c_j: Some(1e-15),
                phi_ext_over_phi_q: 0.5,
                l_t_prime: None,
            }),
            tline: None,
        })
        .unwrap()
    }

    #[test]
    fn coupled_oscillators_match_normal_mode_frequencies() {
        // E_J = 0, N = 1: classical normal modes of the 2x2 quadratic problem.
        let spec = fig5c(1, 0.0);
        let model = build_flux_hamiltonian(&spec, BuildMode::Concrete).unwrap();
        let ev = model.evaluate_internal();
        // Generalized eigenproblem: ω² from eigenvalues of G^{1/2} F G^{1/2}.
        let g_sqrt = DMatrix::from_fn(2, 2, |i, j| {
            if i == j {
                ev.charge[(i, i)].sqrt()
            } else {
                0.0
            }
        });
        let dynamical = &g_sqrt * &ev.flux * &g_sqrt;
        let mut w2: Vec<f64> = dynamical.symmetric_eigen().eigenvalues.iter().cloned().collect();
        w2.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let (w_minus, w_plus) = (w2[0].sqrt(), w2[1].sqrt());

        let basis = TruncatedBasis::new(28, 28);
        let asm = assemble_matrix(&model, &basis).unwrap();
        let spectrum = ground_state(&asm, 4).unwrap();
        let e0 = 0.5 * (w_minus + w_plus);
        assert_relative_eq!(spectrum.eigenvalues[0], e0, max_relative = 1e-8);
        assert_relative_eq!(
            spectrum.eigenvalues[1],
            e0 + w_minus,
            max_relative = 1e-7
        );
    }

    #[test]
    fn photon_only_model_has_harmonic_spectrum() {
        // A bare photon pair at ω = 1: eigenvalues k + ½ exactly.
        let spec = fig5c(1, 0.0);
        let model = build_flux_hamiltonian(&spec, BuildMode::Concrete).unwrap();
        let mut ev = model.evaluate_internal();
        ev.pairs.truncate(1);
        ev.flux = DMatrix::from_element(1, 1, 1.0);
        ev.charge = DMatrix::from_element(1, 1, 1.0);
        ev.linear_flux = nalgebra::DVector::zeros(1);
        ev.linear_charge = nalgebra::DVector::zeros(1);
        ev.cosines.clear();
        ev.constant = 0.0;
        let asm = assemble_evaluated(&ev, &TruncatedBasis::new(12, 4)).unwrap();
        let s = ground_state(&asm, 6).unwrap();
        for (k, e) in s.eigenvalues.iter().enumerate() {
            assert_relative_eq!(*e, k as f64 + 0.5, max_relative = 1e-12);
        }
    }

    #[test]
    fn hermiticity_defect_is_tiny() {
        let spec = fig5c(2, 1e-22);
        let model = build_flux_hamiltonian(&spec, BuildMode::Concrete).unwrap();
        let asm = assemble_matrix(&model, &TruncatedBasis::new(8, 8)).unwrap();
        assert!(asm.hermiticity_defect < 1e-13);
    }

    #[test]
    fn dense_and_iterative_paths_agree() {
        let spec = fig5c(2, 1e-22);
        let model = build_flux_hamiltonian(&spec, BuildMode::Concrete).unwrap();
        let mut basis = TruncatedBasis::new(10, 10);
        let asm = assemble_matrix(&model, &basis).unwrap();
        let dense = ground_state(&asm, 3).unwrap();
        assert_eq!(dense.method, SolveMethod::Dense);
        basis.dense_threshold = 8; // force the iterative path
        let asm2 = assemble_matrix(&model, &basis).unwrap();
        let iter = ground_state(&asm2, 3).unwrap();
        assert_eq!(iter.method, SolveMethod::Iterative);
        for i in 0..3 {
            assert_relative_eq!(
                dense.eigenvalues[i],
                iter.eigenvalues[i],
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn budget_is_enforced() {
        let spec = fig5c(3, 1e-22);
        let model = build_flux_hamiltonian(&spec, BuildMode::Concrete).unwrap();
        let mut basis = TruncatedBasis::new(32, 32);
        basis.budget = 10_000;
        assert!(matches!(
            assemble_matrix(&model, &basis),
            Err(Error::DimensionBudgetExceeded { .. })
        ));
    }

    #[test]
    fn abstract_model_cannot_assemble() {
        let spec = validate(&CircuitSpec {
            topology: Topology::Fig2InductiveLc,
            n_cells: 1,
            resonator: Some(ResonatorParams {
                l_r: Some(1e-9),
                c_r: 1e-12,
            }),
            cells: None,
            tline: None,
        })
        .unwrap();
        let model = build_flux_hamiltonian(&spec, BuildMode::Abstract).unwrap();
        assert!(matches!(
            assemble_matrix(&model, &TruncatedBasis::new(8, 8)),
            Err(Error::AbstractBlackBoxPresent)
        ));
    }

    #[test]
    fn variational_monotonicity_of_ground_energy() {
        let spec = fig5c(1, 2e-22);
        let model = build_flux_hamiltonian(&spec, BuildMode::Concrete).unwrap();
        let mut prev = f64::INFINITY;
        for c in [6, 10, 14, 18] {
            let asm = assemble_matrix(&model, &TruncatedBasis::new(c, c)).unwrap();
            let e0 = ground_state(&asm, 1).unwrap().eigenvalues[0];
            assert!(e0 <= prev + 1e-12, "E0 grew from {prev} to {e0} at cutoff {c}");
            prev = e0;
        }
    }

    #[test]
    fn parity_symmetric_ground_state_has_zero_flux_expectation() {
        let spec = fig5c(1, 2e-22);
        let model = build_flux_hamiltonian(&spec, BuildMode::Concrete).unwrap();
        let asm = assemble_matrix(&model, &TruncatedBasis::new(16, 16)).unwrap();
        let s = ground_state(&asm, 2).unwrap();
        assert!(s.exp_phi.abs() < 1e-10, "<phi> = {}", s.exp_phi);
        assert!(s.exp_phi2 >= s.exp_phi * s.exp_phi);
    }
}
