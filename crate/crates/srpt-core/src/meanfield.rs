//! Semi-classical analysis of the per-cell inductive-coupling family:
//! minimization of the inductive-energy landscape, the critical condition,
//! order parameters, finite-temperature free energy and phase diagrams.
//!
//! Everything here works on internal units (ħ = 1, energy in ħω_ref, flux in
//! Φ_q/2π). SI values are carried alongside in the result types.

use rayon::prelude::*;
use serde::Serialize;

use crate::circuit::{Topology, Units, ValidatedSpec};
use crate::consts;
use crate::error::{Error, Result};
use crate::hamiltonian::{c_number_substitute, photon_mode_internal, HamiltonianModel};
use crate::spectrum::ops::SingleModeProblem;

/// Flux tolerance for phase labeling: far above numeric noise, far below
/// physical minima.
pub const TOL_FLUX_INTERNAL: f64 = 1e-9 * std::f64::consts::TAU;

/// The symmetric-ansatz inductive-energy landscape
/// U(φ, ψ) = φ²/(2L_R) + N[(φ-ψ)²/(2L_c) + amp·cos(ψ·2π/Φ_q)],
/// in internal units. The resonator term is absent for the
/// no-resonator-inductor variant (`inv_lr = 0`).
#[derive(Debug, Clone, Copy)]
pub struct EffectivePotential {
    /// Internal 1/L_R (zero when the resonator inductor is absent).
    pub inv_lr: f64,
    /// Internal 1/L_c.
    pub inv_lc: f64,
    /// Signed cosine amplitude in internal units; +E_J at half-quantum bias.
    pub cos_amp: f64,
    /// Cell count N.
    pub n_cells: f64,
    pub units: Units,
}

/// Phase label of a mean-field minimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Phase {
    Normal,
    Superradiant,
    /// Nonzero matter amplitude without resonator inductive energy competing;
    /// reported distinctly because it is not called a superradiant transition.
    MatterPolarized,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MeanFieldResult {
    /// Photon flux at the minimum, internal units (≥ 0 by convention).
    pub phi0: f64,
    /// Cell flux at the minimum, internal units.
    pub psi0: f64,
    pub phi0_weber: f64,
    pub psi0_weber: f64,
    /// Minimum energy, internal units.
    pub u_min: f64,
    pub u_min_joule: f64,
    pub phase: Phase,
    /// ∂²U_eff/∂ψ² at the origin after eliminating φ, internal units.
    pub curvature_at_origin: f64,
    /// Max residual of the two stationarity conditions, internal units.
    pub stationarity_residual: f64,
}

impl EffectivePotential {
    /// Build the landscape from a validated spec of the per-cell inductive
    /// family (with junction values present).
    pub fn from_spec(spec: &ValidatedSpec) -> Result<Self> {
        match spec.topology {
            Topology::Fig5bInductivePerCell
            | Topology::Fig5cBambaCircuit
            | Topology::Fig5dNoResonatorInductor => {}
            t => return Err(Error::TopologyMismatch(t.as_str().into())),
        }
        let e_j = spec
            .e_j()
            .ok_or_else(|| Error::TopologyMismatch("mean-field analysis needs cell junction values".into()))?;
        let units = spec.units;
        let inv_lr = spec.l_r().map(|l| units.inv_inductance(l)).unwrap_or(0.0);
        let inv_lc = units.inv_inductance(spec.l_c());
        // Junction potential -E_J·cos(ψ - φ_ext); the half-quantum bias flips
        // the sign. Even symmetry of the landscape needs the bias at 0 or ½.
        let frac = spec.cells.unwrap().phi_ext_over_phi_q;
        let cos_amp = if (frac - 0.5).abs() < 1e-12 {
            units.energy(e_j)
        } else if frac.abs() < 1e-12 {
            -units.energy(e_j)
        } else {
            return Err(Error::TopologyMismatch(
                "mean-field landscape assumes a bias of 0 or half a flux quantum".into(),
            ));
        };
        Ok(EffectivePotential {
            inv_lr,
            inv_lc,
            cos_amp,
            n_cells: spec.n_cells as f64,
            units,
        })
    }

    /// Same landscape extracted from a built model (concrete cells).
    pub fn from_model(model: &HamiltonianModel) -> Result<Self> {
        let n = model.matter_pairs().len();
        if n == 0 || model.is_abstract() {
            return Err(Error::AbstractBlackBoxPresent);
        }
        let cos_amp = model
            .cosines
            .first()
            .map(|c| c.amplitude.eval(&model.atoms_internal))
            .unwrap_or(0.0);
        Ok(EffectivePotential {
            inv_lr: model.atoms_internal.inv_lr,
            inv_lc: model.atoms_internal.inv_lc,
            cos_amp,
            n_cells: n as f64,
            units: model.units,
        })
    }

    /// Exact evaluation of U(φ, ψ), internal units.
    pub fn value(&self, phi: f64, psi: f64) -> f64 {
        0.5 * self.inv_lr * phi * phi
            + self.n_cells
                * (0.5 * self.inv_lc * (phi - psi) * (phi - psi) + self.cos_amp * psi.cos())
    }

    /// U in joule for fluxes given in weber.
    pub fn value_si(&self, phi_weber: f64, psi_weber: f64) -> f64 {
        let u = self.value(self.units.flux(phi_weber), self.units.flux(psi_weber));
        self.units.energy_to_si(u)
    }

    /// φ that minimizes U at fixed ψ (the quadratic elimination).
    pub fn phi_star(&self, psi: f64) -> f64 {
        let a = self.n_cells * self.inv_lc;
        a * psi / (self.inv_lr + a)
    }

    /// Reduced stiffness of the 1-D landscape after eliminating φ.
    pub fn reduced_stiffness(&self) -> f64 {
        let a = self.n_cells * self.inv_lc;
        if self.inv_lr == 0.0 {
            0.0
        } else {
            self.inv_lr * a / (self.inv_lr + a)
        }
    }

    /// 1-D landscape U_eff(ψ) = ½·k_red·ψ² + N·amp·cos ψ.
    pub fn reduced(&self, psi: f64) -> f64 {
        0.5 * self.reduced_stiffness() * psi * psi + self.n_cells * self.cos_amp * psi.cos()
    }

    fn reduced_grad(&self, psi: f64) -> f64 {
        self.reduced_stiffness() * psi - self.n_cells * self.cos_amp * psi.sin()
    }

    fn reduced_hess(&self, psi: f64) -> f64 {
        self.reduced_stiffness() - self.n_cells * self.cos_amp * psi.cos()
    }

    /// Barrier height U_eff(0) - U_eff(ψ₀) of the double well, zero in the
    /// single-well regime.
    pub fn barrier_height(&self) -> Result<f64> {
        let r = minimize_potential(self)?;
        Ok((self.reduced(0.0) - self.reduced(r.psi0)).max(0.0))
    }
}

/// Critical-condition evaluation N·L_R vs. (Φ_q/2π)²/E_J - L_c.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CriticalCondition {
    /// Threshold inductance (Φ_q/2π)²/E_J - L_c, H.
    pub threshold_henry: f64,
    /// N·L_R, H.
    pub n_lr_henry: f64,
    pub superradiant: bool,
}

/// Evaluate the critical condition for the per-cell inductive family.
pub fn critical_inductance(spec: &ValidatedSpec) -> Result<CriticalCondition> {
    match spec.topology {
        Topology::Fig5bInductivePerCell | Topology::Fig5cBambaCircuit => {}
        t => return Err(Error::TopologyMismatch(t.as_str().into())),
    }
    let e_j = spec
        .e_j()
        .ok_or_else(|| Error::TopologyMismatch("critical condition needs cell junction values".into()))?;
    if e_j == 0.0 {
        return Err(Error::ZeroJosephsonEnergy);
    }
    let l_c = spec.l_c();
    let threshold = consts::PHI_Q_REDUCED * consts::PHI_Q_REDUCED / e_j - l_c;
    let n_lr = spec.n_cells as f64 * spec.l_r().expect("resonator inductor present");
    // The double well needs the positive cosine sign (half-quantum bias).
    let biased = spec
        .cells
        .map(|c| (c.phi_ext_over_phi_q - 0.5).abs() < 1e-12)
        .unwrap_or(false);
    Ok(CriticalCondition {
        threshold_henry: threshold,
        n_lr_henry: n_lr,
        superradiant: biased && n_lr > threshold,
    })
}

/// Global minimum of the landscape under the symmetric ansatz ψ_j = ψ.
///
/// φ is eliminated analytically (quadratic), the remaining 1-D landscape is
/// densely sampled over ψ ∈ [-Φ_q, Φ_q] and polished by safeguarded Newton.
/// The sign convention picks the φ₀ ≥ 0 member of the degenerate pair.
pub fn minimize_potential(p: &EffectivePotential) -> Result<MeanFieldResult> {
    const SAMPLES: usize = 4001;
    let range = std::f64::consts::TAU; // ±Φ_q in internal units

    let mut best_psi = 0.0;
    let mut best_val = p.reduced(0.0);
    for i in 0..SAMPLES {
        let psi = -range + 2.0 * range * i as f64 / (SAMPLES - 1) as f64;
        let v = p.reduced(psi);
        if v < best_val {
            best_val = v;
            best_psi = psi;
        }
    }
    // Degenerate samples (periodic landscape without stiffness): prefer the
    // smallest |ψ| among ties.
    let tie_tol = 1e-12 * (1.0 + best_val.abs());
    for i in 0..SAMPLES {
        let psi = -range + 2.0 * range * i as f64 / (SAMPLES - 1) as f64;
        if (p.reduced(psi) - best_val).abs() <= tie_tol && psi.abs() < best_psi.abs() {
            best_psi = psi;
        }
    }

    let psi0 = newton_polish(p, best_psi)?;
    // Degenerate pair ±ψ₀; report the non-negative branch.
    let psi0 = if psi0 < 0.0 { -psi0 } else { psi0 };
    let psi0 = if psi0.abs() < TOL_FLUX_INTERNAL { 0.0 } else { psi0 };
    // Exactly at the critical point the landscape bottom is flat to rounding;
    // a minimum whose depth is numerically indistinguishable from U(0) is the
    // origin.
    let scale = 1.0 + p.reduced_stiffness() + p.n_cells * p.cos_amp.abs();
    let psi0 = if p.reduced(0.0) - p.reduced(psi0) < 1e-14 * scale {
        0.0
    } else {
        psi0
    };
    let phi0 = p.phi_star(psi0);

    // Cross-check of the symmetric ansatz: one representative cell sees the
    // same 1-D problem at fixed φ₀.
    let cell_res = single_cell_residual(p, phi0, psi0);

    let r1 = (phi0 * (p.inv_lr + p.n_cells * p.inv_lc) - p.n_cells * p.inv_lc * psi0).abs();
    let r2 = (p.inv_lc * (psi0 - phi0) - p.cos_amp * psi0.sin()).abs();
    let residual = r1.max(r2).max(cell_res);
    if residual > 1e-10 {
        return Err(Error::NonConvergence {
            phi: phi0,
            psi: psi0,
            residual,
        });
    }

    // Without the resonator inductor any amplitude originates from the
    // matter alone, whatever flux it induces; that is not a superradiant
    // transition.
    let phase = if p.inv_lr == 0.0 {
        if psi0.abs() > TOL_FLUX_INTERNAL {
            Phase::MatterPolarized
        } else {
            Phase::Normal
        }
    } else if phi0.abs() > TOL_FLUX_INTERNAL {
        Phase::Superradiant
    } else {
        Phase::Normal
    };

    let u_min = p.value(phi0, psi0);
    Ok(MeanFieldResult {
        phi0,
        psi0,
        phi0_weber: p.units.flux_to_si(phi0),
        psi0_weber: p.units.flux_to_si(psi0),
        u_min,
        u_min_joule: p.units.energy_to_si(u_min),
        phase,
        curvature_at_origin: p.reduced_hess(0.0),
        stationarity_residual: residual,
    })
}

fn newton_polish(p: &EffectivePotential, start: f64) -> Result<f64> {
    let mut psi = start;
    for _ in 0..200 {
        let g = p.reduced_grad(psi);
        let h = p.reduced_hess(psi);
        let step = if h.abs() > 1e-300 { g / h } else { g.signum() * 0.1 };
        let step = step.clamp(-0.5, 0.5);
        psi -= step;
        if step.abs() < 1e-16 * (1.0 + psi.abs()) {
            break;
        }
    }
    let g = p.reduced_grad(psi).abs();
    if g <= 1e-10 {
        Ok(psi)
    } else {
        Err(Error::NonConvergence {
            phi: p.phi_star(psi),
            psi,
            residual: g,
        })
    }
}

fn single_cell_residual(p: &EffectivePotential, phi0: f64, psi0: f64) -> f64 {
    // Minimize ½·k_c(φ₀-ψ)² + amp·cos ψ for one cell and compare to ψ₀.
    let grad = |psi: f64| p.inv_lc * (psi - phi0) - p.cos_amp * psi.sin();
    let mut best = psi0;
    let mut best_v = f64::INFINITY;
    const SAMPLES: usize = 2001;
    let range = std::f64::consts::TAU;
    for i in 0..SAMPLES {
        let psi = -range + 2.0 * range * i as f64 / (SAMPLES - 1) as f64;
        let v = 0.5 * p.inv_lc * (phi0 - psi) * (phi0 - psi) + p.cos_amp * psi.cos();
        if v < best_v {
            best_v = v;
            best = psi;
        }
    }
    let mut psi = best;
    for _ in 0..60 {
        let g = grad(psi);
        let h = p.inv_lc - p.cos_amp * psi.cos();
        if h.abs() < 1e-300 {
            break;
        }
        let step = (g / h).clamp(-0.5, 0.5);
        psi -= step;
        if step.abs() < 1e-15 {
            break;
        }
    }
    // Both ±ψ₀ are acceptable matches of the degenerate pair.
    (psi.abs() - psi0.abs()).abs() * p.inv_lc.min(1.0)
}

/// Order-parameter branch selected by a symmetry-breaking tilt -ε·φ.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BiasBranch {
    pub epsilon: f64,
    /// Signed photon flux of the selected minimum, internal units.
    pub phi0: f64,
    pub psi0: f64,
}

/// Minimize U(φ, ψ) - ε·φ. A positive tilt selects the +φ₀ branch; the ε = 0
/// convention reports +φ₀.
pub fn order_parameter_vs_bias(p: &EffectivePotential, epsilon: f64) -> Result<BiasBranch> {
    if epsilon == 0.0 {
        let r = minimize_potential(p)?;
        return Ok(BiasBranch {
            epsilon,
            phi0: r.phi0,
            psi0: r.psi0,
        });
    }
    let denom = p.inv_lr + p.n_cells * p.inv_lc;
    let phi_star = |psi: f64| (p.n_cells * p.inv_lc * psi + epsilon) / denom;
    let g_val = |psi: f64| {
        let phi = phi_star(psi);
        p.value(phi, psi) - epsilon * phi
    };
    const SAMPLES: usize = 4001;
    let range = std::f64::consts::TAU * 1.25;
    let mut best_psi = 0.0;
    let mut best = f64::INFINITY;
    for i in 0..SAMPLES {
        let psi = -range + 2.0 * range * i as f64 / (SAMPLES - 1) as f64;
        let v = g_val(psi);
        if v < best {
            best = v;
            best_psi = psi;
        }
    }
    // Envelope theorem: dg/dψ = ∂U/∂ψ at φ*(ψ).
    let grad = |psi: f64| p.n_cells * (p.inv_lc * (psi - phi_star(psi)) - p.cos_amp * psi.sin());
    let mut psi = best_psi;
    for _ in 0..100 {
        let g = grad(psi);
        let h = p.n_cells * (p.inv_lc * (1.0 - p.n_cells * p.inv_lc / denom) - p.cos_amp * psi.cos());
        if h.abs() < 1e-300 {
            break;
        }
        let step = (g / h).clamp(-0.5, 0.5);
        psi -= step;
        if step.abs() < 1e-16 {
            break;
        }
    }
    Ok(BiasBranch {
        epsilon,
        phi0: phi_star(psi),
        psi0: psi,
    })
}

/// Free energy of the c-number analysis at one coherent flux amplitude:
/// F(φ_c) = ħω(|α|²+½) - N·k_B·T·ln z_cell(φ_c), internal units.
///
/// `z_cell` is computed by dense diagonalization of the single-cell
/// Hamiltonian in the harmonic eigenbasis of its quadratic part, with the
/// cutoff doubled until |ΔF| < 1e-8·N·ħω_ref.
pub fn free_energy(
    model: &HamiltonianModel,
    phi_c: f64,
    beta: f64,
    start_cutoff: usize,
) -> Result<(f64, usize)> {
    let n = model.matter_pairs().len() as f64;
    let (_, z_mode) = photon_mode_internal(model)?;
    let alpha_re = phi_c / (2.0 * z_mode).sqrt();
    let cnum = c_number_substitute(model, alpha_re, 0.0)?;
    let cell = cnum
        .single_cell()
        .ok_or_else(|| Error::TopologyMismatch("matter cells do not decouple".into()))?;
    let problem = SingleModeProblem {
        flux_stiffness: cell.flux_stiffness,
        charge_stiffness: cell.charge_stiffness,
        linear_flux: cell.linear_flux,
        linear_charge: cell.linear_charge,
        cosines: cell.cosines.clone(),
        constant: cell.constant,
    };
    // |ΔF| < 1e-8·N ⇔ |Δln z| < 1e-8·β.
    let (ln_z, cutoff) = problem.ln_partition(beta, start_cutoff, 1e-8 * beta, 2048)?;
    Ok((cnum.photon_constant - n / beta * ln_z, cutoff))
}

/// One point of a thermal scan.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ThermalPoint {
    pub t_kelvin: f64,
    /// Thermal order parameter argmin_{φ_c} F, internal units.
    pub phi0_t: f64,
    pub phi0_t_weber: f64,
    pub free_energy_min: f64,
    pub cutoff_used: usize,
}

/// Thermal order parameter at one temperature: minimize F over φ_c ≥ 0.
pub fn thermal_order_parameter(
    model: &HamiltonianModel,
    t_kelvin: f64,
    start_cutoff: usize,
) -> Result<ThermalPoint> {
    let beta = model.units.beta(t_kelvin);
    let range = std::f64::consts::PI * 1.05;
    const COARSE: usize = 48;
    let mut best_phi = 0.0;
    let mut best_f = f64::INFINITY;
    let mut cutoff_used = start_cutoff;
    let mut cache: Vec<(f64, f64)> = Vec::with_capacity(COARSE + 1);
    for i in 0..=COARSE {
        let phi = range * i as f64 / COARSE as f64;
        let (f, c) = free_energy(model, phi, beta, start_cutoff)?;
        cache.push((phi, f));
        cutoff_used = cutoff_used.max(c);
        if f < best_f {
            best_f = f;
            best_phi = phi;
        }
    }
    // Golden-section refinement around the best coarse sample.
    let lo = (best_phi - range / COARSE as f64).max(0.0);
    let hi = (best_phi + range / COARSE as f64).min(range);
    let (phi0, fmin) = golden_min(
        |phi| free_energy(model, phi, beta, start_cutoff).map(|(f, _)| f),
        lo,
        hi,
        1e-7,
    )?;
    let (phi0, fmin) = if fmin <= best_f { (phi0, fmin) } else { (best_phi, best_f) };
    let phi0 = if phi0 < TOL_FLUX_INTERNAL { 0.0 } else { phi0 };
    Ok(ThermalPoint {
        t_kelvin,
        phi0_t: phi0,
        phi0_t_weber: model.units.flux_to_si(phi0),
        free_energy_min: fmin,
        cutoff_used,
    })
}

fn golden_min<F>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, f(x)?))
}

/// Critical temperature via bisection on the sign of ∂²F/∂φ_c² at φ_c = 0.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CriticalTemperature {
    pub t_c_kelvin: f64,
    pub bracket_kelvin: (f64, f64),
    pub relative_width: f64,
}

/// Curvature of F at the origin.
///
/// Exact second derivative from the thermal flux susceptibility of one cell:
/// ∂²F/∂φ_c² = 1/L_R + N·[1/L_c - (1/L_c)²·χ], with χ the Duhamel correlator
/// ∫₀^β dτ ⟨ψ(τ)ψ(0)⟩ - β⟨ψ⟩², evaluated from the cell eigenpairs. One dense
/// diagonalization per cutoff; no finite differences.
pub fn free_energy_curvature(model: &HamiltonianModel, beta: f64, start_cutoff: usize) -> Result<f64> {
    let n = model.matter_pairs().len() as f64;
    let inv_lr = model.atoms_internal.inv_lr;
    let inv_lc = model.atoms_internal.inv_lc;
    let cnum = c_number_substitute(model, 0.0, 0.0)?;
    let cell = cnum
        .single_cell()
        .ok_or_else(|| Error::TopologyMismatch("matter cells do not decouple".into()))?;
    let problem = SingleModeProblem {
        flux_stiffness: cell.flux_stiffness,
        charge_stiffness: cell.charge_stiffness,
        linear_flux: cell.linear_flux,
        linear_charge: cell.linear_charge,
        cosines: cell.cosines.clone(),
        constant: cell.constant,
    };
    let chi = converged_susceptibility(&problem, beta, start_cutoff)?;
    Ok(inv_lr + n * (inv_lc - inv_lc * inv_lc * chi))
}

/// χ = ∫₀^β dτ ⟨ψ(τ)ψ(0)⟩ - β·⟨ψ⟩². The two orderings of an (n, m) pair
/// contribute equally (p_m·(e^{βΔ}-1)/Δ = p_n·(1-e^{-βΔ})/Δ for Δ = E_m-E_n),
/// so the sum runs over unordered pairs anchored at the lower state, which
/// stays finite at any β.
fn flux_susceptibility(problem: &SingleModeProblem, beta: f64, cutoff: usize) -> Result<f64> {
    let h = problem.hamiltonian(cutoff)?;
    let eig = h.symmetric_eigen();
    let (_, z_basis) = problem.basis_params()?;
    let x = crate::spectrum::ops::x_matrix(cutoff, z_basis);
    let psi = eig.eigenvectors.transpose() * x * &eig.eigenvectors;
    let evals = &eig.eigenvalues;
    let e0 = evals.iter().cloned().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = evals.iter().map(|e| (-beta * (e - e0)).exp()).collect();
    let z: f64 = weights.iter().sum();
    let mut chi = 0.0;
    let mut mean_psi = 0.0;
    for nn in 0..cutoff {
        let p_n = weights[nn] / z;
        mean_psi += p_n * psi[(nn, nn)];
        chi += p_n * beta * psi[(nn, nn)] * psi[(nn, nn)];
        for mm in (nn + 1)..cutoff {
            let v2 = psi[(mm, nn)] * psi[(mm, nn)];
            if v2 == 0.0 {
                continue;
            }
            let (lo, hi) = if evals[mm] >= evals[nn] { (nn, mm) } else { (mm, nn) };
            let delta = evals[hi] - evals[lo];
            let p_lo = weights[lo] / z;
            let g = if beta * delta < 1e-8 {
                beta * (1.0 - 0.5 * beta * delta)
            } else {
                (1.0 - (-beta * delta).exp()) / delta
            };
            chi += 2.0 * v2 * p_lo * g;
        }
    }
    Ok(chi - beta * mean_psi * mean_psi)
}

fn converged_susceptibility(problem: &SingleModeProblem, beta: f64, start_cutoff: usize) -> Result<f64> {
    let mut cutoff = start_cutoff.max(8);
    let mut prev = flux_susceptibility(problem, beta, cutoff)?;
    loop {
        cutoff *= 2;
        let cur = flux_susceptibility(problem, beta, cutoff)?;
        let delta = (cur - prev).abs();
        if delta <= 1e-8 * cur.abs().max(1e-12) {
            return Ok(cur);
        }
        if cutoff >= 1024 {
            return Err(Error::BasisNotConverged {
                delta,
                tol: 1e-8 * cur.abs(),
                cutoff,
            });
        }
        prev = cur;
    }
}

/// Bisect T_c to a bracket of relative width < 1e-4.
///
/// Preconditions: the mean-field landscape is superradiant at T = 0.
pub fn critical_temperature(model: &HamiltonianModel, start_cutoff: usize) -> Result<CriticalTemperature> {
    let p = EffectivePotential::from_model(model)?;
    if p.reduced_hess(0.0) >= 0.0 || p.inv_lr == 0.0 {
        return Err(Error::NotSuperradiantAtZeroT);
    }
    let units = model.units;
    // Hunt for a bracket: β large (cold, curvature negative) to β small.
    let mut beta_cold = 30.0;
    let mut curv_cold = free_energy_curvature(model, beta_cold, start_cutoff)?;
    while curv_cold >= 0.0 {
        beta_cold *= 2.0;
        if beta_cold > 2000.0 {
            return Err(Error::NotSuperradiantAtZeroT);
        }
        curv_cold = free_energy_curvature(model, beta_cold, start_cutoff)?;
    }
    let mut beta_hot = beta_cold;
    let mut curv_hot = curv_cold;
    while curv_hot < 0.0 {
        beta_hot /= 2.0;
        if beta_hot < 1e-4 {
            return Err(Error::NonConvergence {
                phi: 0.0,
                psi: 0.0,
                residual: curv_hot,
            });
        }
        curv_hot = free_energy_curvature(model, beta_hot, start_cutoff)?;
    }
    // Bisection in temperature between T(beta_cold) and T(beta_hot).
    let mut t_lo = units.beta_to_kelvin(beta_cold); // curvature < 0
    let mut t_hi = units.beta_to_kelvin(beta_hot); // curvature > 0
    for _ in 0..60 {
        if (t_hi - t_lo) / t_hi < 1e-4 {
            break;
        }
        let t_mid = 0.5 * (t_lo + t_hi);
        let c = free_energy_curvature(model, units.beta(t_mid), start_cutoff)?;
        if c < 0.0 {
            t_lo = t_mid;
        } else {
            t_hi = t_mid;
        }
    }
    Ok(CriticalTemperature {
        t_c_kelvin: 0.5 * (t_lo + t_hi),
        bracket_kelvin: (t_lo, t_hi),
        relative_width: (t_hi - t_lo) / t_hi,
    })
}

/// One grid point of a phase-diagram sweep.
#[derive(Debug, Clone, Serialize)]
pub struct PhasePoint {
    pub index: usize,
    pub n_cells: usize,
    pub l_r_henry: Option<f64>,
    pub l_c_henry: f64,
    pub e_j_joule: f64,
    pub t_kelvin: Option<f64>,
    pub threshold_henry: Option<f64>,
    pub phi0_weber: Option<f64>,
    pub psi0_weber: Option<f64>,
    pub phase: Option<Phase>,
    pub t_c_kelvin: Option<f64>,
    pub error: Option<String>,
}

/// Evaluate a grid of specs (optionally with a temperature each) into phase
/// table rows. Points run in parallel; row order follows the input order.
pub fn phase_diagram(points: &[(ValidatedSpec, Option<f64>)]) -> Vec<PhasePoint> {
    let mut rows: Vec<PhasePoint> = points
        .par_iter()
        .enumerate()
        .map(|(index, (spec, temp))| evaluate_point(index, spec, *temp))
        .collect();
    rows.sort_by_key(|r| r.index);
    rows
}

fn evaluate_point(index: usize, spec: &ValidatedSpec, temp: Option<f64>) -> PhasePoint {
    let mut row = PhasePoint {
        index,
        n_cells: spec.n_cells,
        l_r_henry: spec.l_r(),
        l_c_henry: spec.cells.and_then(|c| c.l_c).unwrap_or(f64::NAN),
        e_j_joule: spec.e_j().unwrap_or(f64::NAN),
        t_kelvin: temp,
        threshold_henry: None,
        phi0_weber: None,
        psi0_weber: None,
        phase: None,
        t_c_kelvin: None,
        error: None,
    };
    let potential = match EffectivePotential::from_spec(spec) {
        Ok(p) => p,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    if let Ok(c) = critical_inductance(spec) {
        row.threshold_henry = Some(c.threshold_henry);
    }
    match minimize_potential(&potential) {
        Ok(r) => {
            row.phi0_weber = Some(r.phi0_weber);
            row.psi0_weber = Some(r.psi0_weber);
            row.phase = Some(r.phase);
        }
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    }
    if row.phase == Some(Phase::Superradiant) {
        if let Ok(model) =
            crate::hamiltonian::build_flux_hamiltonian(spec, crate::hamiltonian::BuildMode::Concrete)
        {
            match critical_temperature(&model, 16) {
                Ok(tc) => row.t_c_kelvin = Some(tc.t_c_kelvin),
                Err(e) => {
                    if temp.is_some() {
                        row.error = Some(e.to_string());
                    }
                }
            }
        }
    }
    row
}
