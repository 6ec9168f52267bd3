//! Decision logic for the superradiant-transition question: search the
//! decoupling-transformation family on a Hamiltonian model and issue the
//! verdict combining structural feasibility, the mean-field criterion and
//! the substitution-justification checks.
//!
//! The transformation family is the one the derivations actually use: a
//! photon-coordinate redefinition φ_p → φ_p + Σ c_j·ψ_j (with its symplectic
//! charge counterpart) followed by the coherent-amplitude substitution and
//! c-number displacements of matter variables. Infeasibility within this
//! family is reported as "not confirmed", never as a proof of a transition.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::circuit::{Topology, ValidatedSpec};
use crate::error::{Error, Result};
use crate::hamiltonian::{
    build_hamiltonian, Boundary, EvaluatedModel, HamiltonianModel, Sector, VarKind,
};
use crate::meanfield::{
    critical_inductance, critical_temperature, minimize_potential, EffectivePotential, Phase,
};
use crate::spectrum::thermal::{assumption_a_margin, AssumptionAReport};

const RANK_TOL: f64 = 1e-10;

/// Classification outcome per circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    /// The decoupling analysis succeeds: no transition originates from the
    /// coupling, conditional on the substitution assumptions.
    NoGoHolds,
    /// The analysis cannot exclude a transition at these parameters.
    NotConfirmed,
    /// The mean-field critical condition fires: a transition exists at the
    /// semi-classical level.
    MeanFieldSRPT,
    /// Nonzero matter amplitude without resonator inductive energy; not
    /// counted as a superradiant transition.
    MatterPolarizedOnly,
    /// No Hamiltonian can be derived for this configuration.
    Unsupported,
}

/// Explicit coefficients of a successful decoupling transformation.
#[derive(Debug, Clone, Serialize)]
pub struct DecouplingWitness {
    /// (photon flux, matter flux, coefficient) entries of the redefinition.
    pub mix: Vec<(String, String, f64)>,
    /// Human-readable post-substitution displacement steps.
    pub displacements: Vec<String>,
    /// Largest photon–matter cross term left after the redefinition.
    pub residual_cross: f64,
}

/// The residual no coefficient choice cancels, for an infeasible search.
#[derive(Debug, Clone, Serialize)]
pub struct InfeasibilityCertificate {
    /// The cross-cancelling redefinition that was attempted.
    pub attempted_mix: Vec<(String, String, f64)>,
    /// Worst induced couplings between variables of different cells.
    pub residual_intercell: Vec<(String, String, f64)>,
    pub max_residual: f64,
    pub explanation: String,
}

#[derive(Debug, Clone, Serialize)]
pub enum DecouplingOutcome {
    Feasible(DecouplingWitness),
    Infeasible(InfeasibilityCertificate),
}

impl DecouplingOutcome {
    pub fn feasible(&self) -> bool {
        matches!(self, DecouplingOutcome::Feasible(_))
    }
}

/// Search the transformation family for coefficients that remove every
/// photon variable from the matter sector without changing the matter
/// physics (no induced couplings between different cells, no leftover
/// amplitude dependence).
pub fn decoupling_transform_exists(model: &HamiltonianModel) -> DecouplingOutcome {
    let ev = model.evaluate_internal();
    let photons: Vec<usize> = (0..ev.pairs.len())
        .filter(|&i| ev.pairs[i].sector == Sector::Photon)
        .collect();
    let matters: Vec<usize> = (0..ev.pairs.len())
        .filter(|&i| ev.pairs[i].sector == Sector::Matter)
        .collect();
    if photons.is_empty() || matters.is_empty() {
        return DecouplingOutcome::Feasible(DecouplingWitness {
            mix: vec![],
            displacements: vec![],
            residual_cross: 0.0,
        });
    }
    let np = photons.len();
    let nm = matters.len();

    // Photon-block and cross-block of the flux form.
    let f_pp = DMatrix::from_fn(np, np, |a, b| ev.flux[(photons[a], photons[b])]);
    let f_pm = DMatrix::from_fn(np, nm, |a, b| ev.flux[(photons[a], matters[b])]);
    let f_mm = DMatrix::from_fn(nm, nm, |a, b| ev.flux[(matters[a], matters[b])]);

    // Unique cross-cancelling coefficients: F_pp·C = -F_pm.
    let chol = match f_pp.clone().cholesky() {
        Some(c) => c,
        None => {
            return DecouplingOutcome::Infeasible(InfeasibilityCertificate {
                attempted_mix: vec![],
                residual_intercell: vec![],
                max_residual: f64::INFINITY,
                explanation: "photon flux block is not positive definite; no redefinition exists"
                    .into(),
            })
        }
    };
    let c = -chol.solve(&f_pm);

    // Residual matter flux form: the Schur complement F_mm - F_mpF_pp⁻¹F_pm.
    let residual = &f_mm - f_pm.transpose() * chol.solve(&f_pm);
    let scale = (0..nm)
        .map(|i| residual[(i, i)].abs())
        .fold(ev.flux.iter().fold(0.0f64, |m, v| m.max(v.abs())), f64::max);
    let tol = RANK_TOL * scale.max(1e-300);

    let mut mix: Vec<(String, String, f64)> = Vec::new();
    for (a, &p) in photons.iter().enumerate() {
        for (b, &m) in matters.iter().enumerate() {
            let v = c[(a, b)];
            if v.abs() > tol {
                mix.push((
                    ev.pairs[p].flux_name.clone(),
                    ev.pairs[m].flux_name.clone(),
                    v,
                ));
            }
        }
    }

    // Induced inter-cell couplings disqualify: they change the matter system
    // itself rather than relocating the photon.
    let mut offenders: Vec<(String, String, f64)> = Vec::new();
    let mut max_residual = 0.0f64;
    for a in 0..nm {
        for b in (a + 1)..nm {
            let va = matters[a];
            let vb = matters[b];
            if ev.pairs[va].cell == ev.pairs[vb].cell {
                continue;
            }
            let r = residual[(a, b)];
            if r.abs() > tol {
                max_residual = max_residual.max(r.abs());
                offenders.push((
                    ev.pairs[va].flux_name.clone(),
                    ev.pairs[vb].flux_name.clone(),
                    r,
                ));
            }
        }
    }
    if !offenders.is_empty() {
        offenders.sort_by(|x, y| y.2.abs().partial_cmp(&x.2.abs()).unwrap());
        offenders.truncate(8);
        return DecouplingOutcome::Infeasible(InfeasibilityCertificate {
            attempted_mix: mix,
            residual_intercell: offenders,
            max_residual,
            explanation: "cancelling the photon-matter cross terms induces couplings between \
                          different cells; the coupling cannot be relocated into the matter box"
                .into(),
        });
    }

    // Box arguments must not acquire matter content from other cells (the
    // photon content they carry becomes a displaceable c-number).
    for (arg_idx, arg) in ev.blackbox.iter().enumerate() {
        if arg.kind != VarKind::Flux {
            continue;
        }
        for (b, &m) in matters.iter().enumerate() {
            let induced: f64 = photons
                .iter()
                .enumerate()
                .map(|(a, &p)| arg.coeffs[p] * c[(a, b)])
                .sum();
            if induced.abs() > tol && ev.pairs[m].cell != Some(arg.cell) {
                return DecouplingOutcome::Infeasible(InfeasibilityCertificate {
                    attempted_mix: mix,
                    residual_intercell: vec![(
                        format!("box argument {arg_idx}"),
                        ev.pairs[m].flux_name.clone(),
                        induced,
                    )],
                    max_residual: induced.abs(),
                    explanation: "the redefinition drags another cell's flux into a box argument"
                        .into(),
                });
            }
            if induced.abs() > tol {
                return DecouplingOutcome::Infeasible(InfeasibilityCertificate {
                    attempted_mix: mix,
                    residual_intercell: vec![(
                        format!("box argument {arg_idx}"),
                        ev.pairs[m].flux_name.clone(),
                        induced,
                    )],
                    max_residual: induced.abs(),
                    explanation: "the redefinition rescales a box argument; the box is no longer \
                                  entered through its declared expression"
                        .into(),
                });
            }
        }
    }

    // Displacement consistency: clearing the substituted photon amplitude
    // out of box arguments shifts matter fluxes; a shifted flux must not
    // appear in a residual quadratic or a cosine, or amplitude dependence
    // survives as a linear term or a phase.
    let mut displacement: Vec<Option<f64>> = vec![None; nm]; // units of φ_c
    let mut displacements_desc: Vec<String> = Vec::new();
    for arg in &ev.blackbox {
        if arg.kind != VarKind::Flux {
            continue;
        }
        let photon_coef: f64 = photons.iter().map(|&p| arg.coeffs[p]).sum();
        if photon_coef == 0.0 {
            continue;
        }
        // Single matter flux carries the argument in every supported build.
        let carriers: Vec<usize> = matters
            .iter()
            .enumerate()
            .filter(|(_, &m)| arg.coeffs[m].abs() > 0.0)
            .map(|(b, _)| b)
            .collect();
        if carriers.is_empty() {
            return DecouplingOutcome::Infeasible(InfeasibilityCertificate {
                attempted_mix: mix,
                residual_intercell: vec![],
                max_residual: photon_coef.abs(),
                explanation: "a box argument carries photon flux with no matter flux to absorb it"
                    .into(),
            });
        }
        let b = carriers[0];
        let needed = -photon_coef / arg.coeffs[matters[b]];
        match displacement[b] {
            None => {
                displacement[b] = Some(needed);
                displacements_desc.push(format!(
                    "shift {} by {:+.3}·φ_c after the substitution",
                    ev.pairs[matters[b]].flux_name, needed
                ));
            }
            Some(prev) if (prev - needed).abs() > RANK_TOL * (1.0 + prev.abs()) => {
                return DecouplingOutcome::Infeasible(InfeasibilityCertificate {
                    attempted_mix: mix,
                    residual_intercell: vec![],
                    max_residual: (prev - needed).abs(),
                    explanation: format!(
                        "conflicting displacements required for {}",
                        ev.pairs[matters[b]].flux_name
                    ),
                });
            }
            Some(_) => {}
        }
    }
    for (b, disp) in displacement.iter().enumerate() {
        let Some(d) = disp else { continue };
        if d.abs() < RANK_TOL {
            continue;
        }
        let m = matters[b];
        if residual[(b, b)].abs() > tol {
            return DecouplingOutcome::Infeasible(InfeasibilityCertificate {
                attempted_mix: mix,
                residual_intercell: vec![(
                    ev.pairs[m].flux_name.clone(),
                    ev.pairs[m].flux_name.clone(),
                    residual[(b, b)],
                )],
                max_residual: residual[(b, b)].abs(),
                explanation: "a displaced matter flux keeps a quadratic term; the amplitude \
                              survives as a linear term in the matter sector"
                    .into(),
            });
        }
        if ev.cosines.iter().any(|cos| cos.arg_flux[m].abs() > 0.0) {
            return DecouplingOutcome::Infeasible(InfeasibilityCertificate {
                attempted_mix: mix,
                residual_intercell: vec![],
                max_residual: d.abs(),
                explanation: "a displaced matter flux enters a cosine; the amplitude survives \
                              as a phase"
                    .into(),
            });
        }
    }

    // Verify the witness numerically: max photon-matter cross term after the
    // redefinition must vanish.
    let shifted = apply_flux_mix_numeric(&ev, &photons, &matters, &c);
    let mut residual_cross = 0.0f64;
    for &p in &photons {
        for &m in &matters {
            residual_cross = residual_cross.max(shifted.flux[(p, m)].abs());
        }
    }
    let mut displacements = vec![
        "replace the photon pair by its coherent amplitude".to_string(),
    ];
    displacements.extend(displacements_desc);
    displacements.push("shift matter charges by the photon charge counterpart".to_string());
    DecouplingOutcome::Feasible(DecouplingWitness {
        mix,
        displacements,
        residual_cross,
    })
}

/// Numeric congruence transform of an evaluated model under the photon
/// redefinition φ_p → φ_p + Σ C[p,m]·ψ_m (charge counterpart implied).
pub fn apply_flux_mix_numeric(
    ev: &EvaluatedModel,
    photons: &[usize],
    matters: &[usize],
    c: &DMatrix<f64>,
) -> EvaluatedModel {
    let n = ev.pairs.len();
    let mut s = DMatrix::identity(n, n);
    for (a, &p) in photons.iter().enumerate() {
        for (b, &m) in matters.iter().enumerate() {
            s[(p, m)] = c[(a, b)];
        }
    }
    // Charge map (Sᵀ)⁻¹ for the block-unipotent S: identity with -Cᵀ in the
    // (matter, photon) block.
    let mut t = DMatrix::identity(n, n);
    for (a, &p) in photons.iter().enumerate() {
        for (b, &m) in matters.iter().enumerate() {
            t[(m, p)] = -c[(a, b)];
        }
    }
    let mut out = ev.clone();
    out.flux = s.transpose() * &ev.flux * &s;
    out.charge = t.transpose() * &ev.charge * &t;
    out.linear_flux = s.transpose() * &ev.linear_flux;
    out.linear_charge = t.transpose() * &ev.linear_charge;
    for cos in &mut out.cosines {
        let old = cos.arg_flux.clone();
        for j in 0..n {
            cos.arg_flux[j] = (0..n).map(|k| s[(k, j)] * old[k]).sum();
        }
    }
    for arg in &mut out.blackbox {
        let map = match arg.kind {
            VarKind::Flux => &s,
            VarKind::Charge => &t,
        };
        let old = arg.coeffs.clone();
        for j in 0..n {
            arg.coeffs[j] = (0..n).map(|k| map[(k, j)] * old[k]).sum();
        }
    }
    out
}

/// Mean-field attachment of a verdict.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MeanFieldAttachment {
    pub phi0_weber: f64,
    pub psi0_weber: f64,
    pub phase: Phase,
    pub threshold_henry: Option<f64>,
    pub t_c_kelvin: Option<f64>,
}

/// The no-go classification outcome for one circuit.
#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub topology: String,
    pub classification: Classification,
    /// Whether the substitution assumptions were checked or presumed.
    pub assumptions_note: String,
    pub decoupling: Option<DecouplingOutcome>,
    pub meanfield: Option<MeanFieldAttachment>,
    pub assumption_a: Option<AssumptionAReport>,
    pub explanation: String,
}

/// Options for [`classify_srpt`].
#[derive(Debug, Clone, Copy)]
pub struct ClassifyOptions {
    /// Compute the critical temperature when the mean-field condition fires.
    pub with_thermal: bool,
    pub boundary: Boundary,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            with_thermal: true,
            boundary: Boundary::Periodic,
        }
    }
}

/// Verdict for a configuration with no derivable Hamiltonian.
pub fn classify_unsupported(name: &str) -> Verdict {
    Verdict {
        topology: name.to_string(),
        classification: Classification::Unsupported,
        assumptions_note: "not applicable".into(),
        decoupling: None,
        meanfield: None,
        assumption_a: None,
        explanation: format!(
            "no Hamiltonian could be derived for {name} in the flux- or charge-based procedure; \
             the configuration cannot be analyzed"
        ),
    }
}

/// Issue the verdict for a validated spec: structural decoupling plus the
/// mean-field criterion plus the substitution-assumption bookkeeping.
pub fn classify_srpt(spec: &ValidatedSpec, options: &ClassifyOptions) -> Result<Verdict> {
    let model = build_hamiltonian(spec, options.boundary)?;
    let decoupling = decoupling_transform_exists(&model);
    let topology = spec.topology.as_str().to_string();

    let assumption_a = match spec.topology {
        Topology::Fig4CapacitiveTline => assumption_a_margin(spec, 0.0, None).ok(),
        _ => None,
    };

    let (classification, meanfield, assumptions_note, explanation) = match spec.topology {
        Topology::Fig2InductiveLc | Topology::Fig3CapacitiveLc | Topology::Fig4CapacitiveTline => {
            let note = match spec.topology {
                Topology::Fig4CapacitiveTline => {
                    "conditional on the substitution assumptions; the mode-budget proxy is \
                     evaluated numerically"
                }
                _ => "conditional on the substitution assumptions (presumed, not machine-checkable)",
            };
            (
                Classification::NoGoHolds,
                None,
                note.to_string(),
                format!(
                    "{topology}: the decoupling transformation removes the photon from the \
                     matter sector; no transition originates from this coupling"
                ),
            )
        }
        Topology::Fig5bInductivePerCell | Topology::Fig5cBambaCircuit => {
            let mut classification = Classification::NotConfirmed;
            let mut attachment = None;
            if spec.has_concrete_cells() {
                let condition = critical_inductance(spec)?;
                let potential = EffectivePotential::from_spec(spec)?;
                let mf = minimize_potential(&potential)?;
                let t_c = if condition.superradiant && options.with_thermal {
                    critical_temperature(&model, 16).ok().map(|t| t.t_c_kelvin)
                } else {
                    None
                };
                if condition.superradiant {
                    classification = Classification::MeanFieldSRPT;
                }
                attachment = Some(MeanFieldAttachment {
                    phi0_weber: mf.phi0_weber,
                    psi0_weber: mf.psi0_weber,
                    phase: mf.phase,
                    threshold_henry: Some(condition.threshold_henry),
                    t_c_kelvin: t_c,
                });
            }
            let explanation = match classification {
                Classification::MeanFieldSRPT => format!(
                    "{topology}: the decoupling family fails and the critical condition holds; \
                     the landscape has two symmetric minima with nonzero photon flux"
                ),
                _ => format!(
                    "{topology}: the decoupling family fails, so absence cannot be confirmed; \
                     the critical condition does not fire at these parameters"
                ),
            };
            (
                classification,
                attachment,
                "assumptions presumed; the decoupling argument itself fails here".to_string(),
                explanation,
            )
        }
        Topology::Fig5dNoResonatorInductor => {
            let potential = EffectivePotential::from_spec(spec)?;
            let mf = minimize_potential(&potential)?;
            let classification = if mf.phase == Phase::MatterPolarized {
                Classification::MatterPolarizedOnly
            } else {
                Classification::NotConfirmed
            };
            (
                classification,
                Some(MeanFieldAttachment {
                    phi0_weber: mf.phi0_weber,
                    psi0_weber: mf.psi0_weber,
                    phase: mf.phase,
                    threshold_henry: None,
                    t_c_kelvin: None,
                }),
                "assumptions presumed".to_string(),
                format!(
                    "{topology}: any amplitude originates from the matter minima alone (no \
                     resonator inductive energy competes); not counted as a superradiant \
                     transition"
                ),
            )
        }
        Topology::Fig6InductiveTline => (
            Classification::NotConfirmed,
            None,
            "assumptions presumed; the decoupling argument fails here".to_string(),
            format!(
                "{topology}: the per-segment couplings cannot all be relocated into the matter \
                 box; absence cannot be confirmed"
            ),
        ),
    };

    Ok(Verdict {
        topology,
        classification,
        assumptions_note,
        decoupling: Some(decoupling),
        meanfield,
        assumption_a,
        explanation,
    })
}

/// The competing energy terms at the mean-field minimum, plus the barrier
/// growth with cell count.
#[derive(Debug, Clone, Serialize)]
pub struct CompetitionReport {
    /// φ₀²/(2L_R), J.
    pub photonic_joule: f64,
    /// E_J-term per cell at the minimum, J.
    pub atomic_per_cell_joule: f64,
    /// (φ₀-ψ₀)²/(2L_c) per cell, J.
    pub coupling_per_cell_joule: f64,
    pub phi0_weber: f64,
    pub psi0_weber: f64,
    /// Barrier height vs. cell count at fixed per-cell parameters.
    pub barrier_by_n: Vec<(usize, f64)>,
}

/// Evaluate the three competing energies at the minimum and the barrier
/// height over a cell-count scan.
pub fn competition_report(spec: &ValidatedSpec, n_scan: &[usize]) -> Result<CompetitionReport> {
    match spec.topology {
        Topology::Fig5bInductivePerCell | Topology::Fig5cBambaCircuit => {}
        t => return Err(Error::TopologyMismatch(t.as_str().into())),
    }
    let p = EffectivePotential::from_spec(spec)?;
    let r = minimize_potential(&p)?;
    let units = spec.units;
    let photonic = 0.5 * p.inv_lr * r.phi0 * r.phi0;
    let atomic = p.cos_amp * r.psi0.cos();
    let coupling = 0.5 * p.inv_lc * (r.phi0 - r.psi0) * (r.phi0 - r.psi0);

    let mut barrier_by_n = Vec::with_capacity(n_scan.len());
    for &n in n_scan {
        let pn = EffectivePotential {
            n_cells: n as f64,
            ..p
        };
        barrier_by_n.push((n, units.energy_to_si(pn.barrier_height()?)));
    }

    Ok(CompetitionReport {
        photonic_joule: units.energy_to_si(photonic),
        atomic_per_cell_joule: units.energy_to_si(atomic),
        coupling_per_cell_joule: units.energy_to_si(coupling),
        phi0_weber: r.phi0_weber,
        psi0_weber: r.psi0_weber,
        barrier_by_n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{validate, CellParams, CircuitSpec, ResonatorParams, TlineParams};
    use crate::consts;
    use crate::hamiltonian::{build_flux_hamiltonian, BuildMode};

    fn fig2_abstract() -> HamiltonianModel {
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
        build_flux_hamiltonian(&spec, BuildMode::Abstract).unwrap()
    }

    fn fig5b(n: usize) -> HamiltonianModel {
        let spec = validate(&CircuitSpec {
            topology: Topology::Fig5bInductivePerCell,
            n_cells: n,
            resonator: Some(ResonatorParams {
                l_r: Some(1e-9),
                c_r: 1e-12,
            }),
            cells: Some(CellParams {
                l_c: Some(1e-10),
                ..Default::default()
            }),
            tline: None,
        })
        .unwrap();
        build_flux_hamiltonian(&spec, BuildMode::Abstract).unwrap()
    }

    #[test]
    fn fig2_witness_reproduces_unit_mix() {
        let outcome = decoupling_transform_exists(&fig2_abstract());
        let DecouplingOutcome::Feasible(w) = outcome else {
            panic!("expected feasible");
        };
        assert_eq!(w.mix.len(), 1);
        assert_eq!(w.mix[0].0, "phi");
        assert_eq!(w.mix[0].1, "psi");
        assert!((w.mix[0].2 - 1.0).abs() < 1e-12);
        assert!(w.residual_cross < 1e-12);
    }

    #[test]
    fn fig5b_single_cell_is_feasible() {
        let outcome = decoupling_transform_exists(&fig5b(1));
        let DecouplingOutcome::Feasible(w) = outcome else {
            panic!("expected feasible for a single cell");
        };
        // c = L_R/(L_R + L_c) = 1e-9/1.1e-9.
        assert!((w.mix[0].2 - 1e-9 / 1.1e-9).abs() < 1e-12);
    }

    #[test]
    fn fig5b_many_cells_is_infeasible_with_intercell_certificate() {
        for n in [2usize, 3, 7] {
            let outcome = decoupling_transform_exists(&fig5b(n));
            let DecouplingOutcome::Infeasible(cert) = outcome else {
                panic!("expected infeasible at N = {n}");
            };
            assert!(!cert.residual_intercell.is_empty());
            assert!(cert.max_residual > 0.0);
        }
    }

    #[test]
    fn fig3_and_fig4_are_feasible() {
        let fig3 = validate(&CircuitSpec {
            topology: Topology::Fig3CapacitiveLc,
            n_cells: 4,
            resonator: Some(ResonatorParams {
                l_r: Some(1e-9),
                c_r: 1e-12,
            }),
            cells: None,
            tline: None,
        })
        .unwrap();
        let m3 = crate::hamiltonian::build_charge_hamiltonian(&fig3, Boundary::Periodic).unwrap();
        assert!(decoupling_transform_exists(&m3).feasible());

        let fig4 = validate(&CircuitSpec {
            topology: Topology::Fig4CapacitiveTline,
            n_cells: 40,
            resonator: None,
            cells: None,
            tline: Some(TlineParams {
                l_t: 1e-6,
                c_t: 1e-10,
                dx: 1e-3,
                length: 8e-3,
                lambda_min: Some(2e-3),
                omega_a: Some(1e11),
            }),
        })
        .unwrap();
        let m4 = crate::hamiltonian::build_charge_hamiltonian(&fig4, Boundary::Periodic).unwrap();
        assert!(decoupling_transform_exists(&m4).feasible());
    }

    #[test]
    fn fig6_is_infeasible_with_neighbor_cell_residual() {
        let spec = validate(&CircuitSpec {
            topology: Topology::Fig6InductiveTline,
            n_cells: 4,
            resonator: None,
            cells: Some(CellParams {
                l_t_prime: Some(2e-6),
                ..Default::default()
            }),
            tline: Some(TlineParams {
                l_t: 1e-6,
                c_t: 1e-10,
                dx: 1e-3,
                length: 4e-3,
                lambda_min: None,
                omega_a: None,
            }),
        })
        .unwrap();
        let model = build_flux_hamiltonian(&spec, BuildMode::Abstract).unwrap();
        let DecouplingOutcome::Infeasible(cert) = decoupling_transform_exists(&model) else {
            panic!("expected infeasible");
        };
        // The residual couples ψ_j with ψ'_{j-1}: names from different cells.
        let (a, b, _) = &cert.residual_intercell[0];
        assert!(a.starts_with("psi") && b.starts_with("psi"));
        assert_ne!(a, b);
    }

    #[test]
    fn witness_transform_kills_cross_terms_numerically() {
        let model = fig5b(1);
        let ev = model.evaluate_internal();
        let DecouplingOutcome::Feasible(w) = decoupling_transform_exists(&model) else {
            panic!("feasible expected");
        };
        let c = DMatrix::from_fn(1, 1, |_, _| w.mix[0].2);
        let shifted = apply_flux_mix_numeric(&ev, &[0], &[1], &c);
        let scale = ev.flux.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(shifted.flux[(0, 1)].abs() < 1e-12 * scale);
        // Photon sector stays a bare oscillator: positive diagonal survives.
        assert!(shifted.flux[(0, 0)] > 0.0);
        assert!(shifted.charge[(0, 0)] > 0.0);
    }

    fn fig5c_spec(n: usize, l_r: f64) -> ValidatedSpec {
        validate(&CircuitSpec {
            topology: Topology::Fig5cBambaCircuit,
            n_cells: n,
            resonator: Some(ResonatorParams {
                l_r: Some(l_r),
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

    #[test]
    fn classify_above_threshold_is_meanfield_srpt() {
        let threshold = consts::PHI_Q_REDUCED * consts::PHI_Q_REDUCED / 1e-22 - 1e-10;
        let spec = fig5c_spec(2, threshold); // N·L_R = 2·threshold
        let v = classify_srpt(
            &spec,
            &ClassifyOptions {
                with_thermal: false,
                boundary: Boundary::Periodic,
            },
        )
        .unwrap();
        assert_eq!(v.classification, Classification::MeanFieldSRPT);
        let mf = v.meanfield.unwrap();
        assert!(mf.phi0_weber > 0.0);
        assert!(!v.decoupling.unwrap().feasible());
    }

    #[test]
    fn classify_below_threshold_is_not_confirmed() {
        let threshold = consts::PHI_Q_REDUCED * consts::PHI_Q_REDUCED / 1e-22 - 1e-10;
        let spec = fig5c_spec(1, 0.4 * threshold);
        let v = classify_srpt(
            &spec,
            &ClassifyOptions {
                with_thermal: false,
                boundary: Boundary::Periodic,
            },
        )
        .unwrap();
        assert_eq!(v.classification, Classification::NotConfirmed);
    }

    #[test]
    fn classify_nogo_family() {
        let fig4 = validate(&CircuitSpec {
            topology: Topology::Fig4CapacitiveTline,
            n_cells: 100,
            resonator: None,
            cells: None,
            tline: Some(TlineParams {
                l_t: 1e-6,
                c_t: 1e-10,
                dx: 1e-3,
                length: 1e-2,
                lambda_min: Some(1e-3),
                omega_a: Some(6.28e10),
            }),
        })
        .unwrap();
        let v = classify_srpt(&fig4, &ClassifyOptions::default()).unwrap();
        assert_eq!(v.classification, Classification::NoGoHolds);
        assert!(v.decoupling.unwrap().feasible());
        assert!(v.assumption_a.is_some());
    }

    #[test]
    fn unsupported_configuration_verdict() {
        let v = classify_unsupported("Fig5a_GeneralInductive");
        assert_eq!(v.classification, Classification::Unsupported);
    }

    #[test]
    fn competition_barrier_grows_with_n() {
        let threshold = consts::PHI_Q_REDUCED * consts::PHI_Q_REDUCED / 1e-22 - 1e-10;
        let spec = fig5c_spec(2, 2.0 * threshold);
        let report = competition_report(&spec, &[2, 4, 8, 16]).unwrap();
        for w in report.barrier_by_n.windows(2) {
            assert!(w[1].1 > w[0].1, "barrier not increasing: {:?}", report.barrier_by_n);
        }
    }
}
