//! Exact and coherent-state partition functions, the sandwich bounds that
//! control the substitution error, and the assumption margin that justifies
//! treating the photon sector classically.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::circuit::{Topology, ValidatedSpec};
use crate::consts;
use crate::error::{Error, Result};
use crate::hamiltonian::{c_number_substitute, photon_mode_internal, HamiltonianModel};
use crate::spectrum::ops::{ln_sum_exp_neg_beta, SingleModeProblem};
use crate::spectrum::AssembledMatrix;

/// Exact thermal trace over a dense spectrum.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExactPartition {
    pub ln_z: f64,
    /// e^{ln_z}; may under/overflow, the log form is authoritative.
    pub z: f64,
    /// Truncation-tail estimate dim·e^{-β·E_max} relative to Z.
    pub tail_ratio: f64,
}

/// Z = Σ e^{-β·E_i} over the full dense spectrum, with the truncation-tail
/// estimate dim·e^{-β·E_max} required to stay below 1e-10·Z.
pub fn partition_function_exact(assembled: &AssembledMatrix, beta: f64) -> Result<ExactPartition> {
    let dense = assembled
        .dense
        .as_ref()
        .ok_or_else(|| Error::InvalidSpec("exact partition function needs the dense path".into()))?;
    let mut ev: Vec<f64> = dense.clone().symmetric_eigen().eigenvalues.iter().cloned().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let ln_z = ln_sum_exp_neg_beta(&ev, beta);
    let e_max = *ev.last().unwrap();
    let ln_tail = (assembled.dim as f64).ln() - beta * e_max;
    let tail_ratio = (ln_tail - ln_z).exp();
    if tail_ratio > 1e-10 {
        return Err(Error::TailBoundTooLoose {
            bound: tail_ratio,
            tol: 1e-10,
        });
    }
    Ok(ExactPartition {
        ln_z,
        z: ln_z.exp(),
        tail_ratio,
    })
}

/// Gauss-Laguerre nodes and weights by Golub-Welsch on the Jacobi matrix.
pub fn gauss_laguerre(n: usize) -> Vec<(f64, f64)> {
    let mut j = DMatrix::zeros(n, n);
    for k in 0..n {
        j[(k, k)] = 2.0 * k as f64 + 1.0;
        if k + 1 < n {
            let b = (k + 1) as f64;
            j[(k, k + 1)] = b;
            j[(k + 1, k)] = b;
        }
    }
    let eig = j.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let node = eig.eigenvalues[i];
            let v0 = eig.eigenvectors[(0, i)];
            (node, v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pairs
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CNumberPartition {
    pub ln_zbar: f64,
    pub zbar: f64,
    pub radial_nodes: usize,
    pub angular_nodes: usize,
    /// |Δln Z̄| of the last node-doubling step.
    pub last_delta: f64,
}

/// Z̄ = ∫(d²α/π)·Tr e^{-βH(α)} by radial Gauss-Laguerre × angular trapezoid
/// quadrature over the coherent amplitude, with node doubling until the
/// relative change drops below `tol`.
pub fn partition_function_cnumber(
    model: &HamiltonianModel,
    beta: f64,
    tol: f64,
    cell_cutoff_start: usize,
) -> Result<CNumberPartition> {
    let (omega, _) = photon_mode_internal(model)?;
    let n_cells = model.matter_pairs().len() as f64;

    let ln_zm = |alpha_re: f64, alpha_im: f64| -> Result<f64> {
        let cnum = c_number_substitute(model, alpha_re, alpha_im)?;
        let cell = cnum
            .single_cell()
            .ok_or_else(|| Error::TopologyMismatch("matter sector does not decouple into identical cells".into()))?;
        let problem = SingleModeProblem {
            flux_stiffness: cell.flux_stiffness,
            charge_stiffness: cell.charge_stiffness,
            linear_flux: cell.linear_flux,
            linear_charge: cell.linear_charge,
            cosines: cell.cosines.clone(),
            constant: cell.constant,
        };
        let (ln_cell, _) = problem.ln_partition(beta, cell_cutoff_start, tol * 0.1 * beta.max(1.0), 2048)?;
        Ok(n_cells * ln_cell)
    };

    let evaluate = |radial: usize| -> Result<f64> {
        let angular = 2 * radial;
        let gl = gauss_laguerre(radial);
        // ln Z̄ = -βω/2 - ln(βω) + ln[(1/n_θ)·Σ w_u·e^{ln z_m}] via a shifted sum.
        let mut terms: Vec<(f64, f64)> = Vec::with_capacity(radial * angular); // (ln z_m, weight)
        for (u, w) in &gl {
            let r = (u / (beta * omega)).sqrt();
            for it in 0..angular {
                let theta = std::f64::consts::TAU * it as f64 / angular as f64;
                let lz = ln_zm(r * theta.cos(), r * theta.sin())?;
                terms.push((lz, w / angular as f64));
            }
        }
        let m = terms.iter().map(|(l, _)| *l).fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = terms.iter().map(|(l, w)| w * (l - m).exp()).sum();
        Ok(-beta * omega / 2.0 - (beta * omega).ln() + m + s.ln())
    };

    let mut radial = 8;
    let mut prev = evaluate(radial)?;
    loop {
        radial *= 2;
        let cur = evaluate(radial)?;
        let delta = (cur - prev).abs();
        if delta < tol {
            return Ok(CNumberPartition {
                ln_zbar: cur,
                zbar: cur.exp(),
                radial_nodes: radial,
                angular_nodes: 2 * radial,
                last_delta: delta,
            });
        }
        if radial >= 128 {
            return Err(Error::QuadratureNotConverged {
                delta,
                nodes: radial,
            });
        }
        prev = cur;
    }
}

/// Outcome of the sandwich bounds Z̄ ≤ Z ≤ exp(Σħω_k/k_BT)·Z̄.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HeppReport {
    pub lower_ok: bool,
    pub upper_ok: bool,
    /// ln Z - ln Z̄ (must be ≥ 0 up to tolerance).
    pub margin_lower: f64,
    /// β·Σħω_k + ln Z̄ - ln Z (must be ≥ 0 up to tolerance).
    pub margin_upper: f64,
}

/// Check both inequalities in log space; a failure beyond tolerance signals
/// a numerics bug, not physics.
pub fn hepp_bounds_check(ln_z: f64, ln_zbar: f64, beta: f64, mode_omegas_internal: &[f64]) -> HeppReport {
    let budget = beta * mode_omegas_internal.iter().sum::<f64>();
    let margin_lower = ln_z - ln_zbar;
    let margin_upper = budget + ln_zbar - ln_z;
    let tol = 1e-10 * (1.0 + ln_z.abs().max(ln_zbar.abs()));
    HeppReport {
        lower_ok: margin_lower > -tol,
        upper_ok: margin_upper > -tol,
        margin_lower,
        margin_upper,
    }
}

/// Transmission-line closed-form proxy for the assumption margin.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TlineProxy {
    /// (λ_a/λ_min)²/4.
    pub proxy: f64,
    /// Atoms per matter wavelength n = N·λ_a/ℓ.
    pub n_per_lambda: f64,
    pub justified: bool,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct AssumptionAReport {
    /// [Σħω_k/N] / |k_B·T·ln Z̄/N|, when the free energy is supplied.
    pub ratio: Option<f64>,
    /// Σħω_k over the confined modes, J.
    pub mode_energy_sum_joule: f64,
    pub mode_count: usize,
    pub tline: Option<TlineProxy>,
}

/// Quantify how far the photonic zero-point budget sits below the matter
/// free energy per atom. `ln_zbar_per_atom` is ln Z̄ / N when available.
pub fn assumption_a_margin(
    spec: &ValidatedSpec,
    t_kelvin: f64,
    ln_zbar_per_atom: Option<f64>,
) -> Result<AssumptionAReport> {
    let (sum_homega, mode_count) = match spec.topology {
        Topology::Fig4CapacitiveTline | Topology::Fig6InductiveTline => {
            let m = spec
                .mode_count
                .ok_or_else(|| Error::InvalidSpec("tline lambda_min required for the assumption margin".into()))?
                .floor()
                .max(1.0);
            let tl = spec.tline.expect("tline params present");
            let v = spec.velocity.expect("velocity derived");
            let base = consts::HBAR * std::f64::consts::PI * v / tl.length;
            (base * m * (m + 1.0) / 2.0, m as usize)
        }
        _ => {
            let omega_c = spec
                .omega_c
                .or(Some(spec.units.omega_ref_si))
                .expect("reference frequency");
            (consts::HBAR * omega_c, 1)
        }
    };

    let ratio = match ln_zbar_per_atom {
        Some(lz) => {
            let free = consts::K_B * t_kelvin * lz;
            if free == 0.0 {
                return Err(Error::ZeroFreeEnergy);
            }
            Some(sum_homega / (spec.n_cells as f64) / free.abs())
        }
        None => None,
    };

    let tline = match (spec.topology.is_tline(), spec.lambda_a, spec.tline) {
        (true, Some(lambda_a), Some(tl)) => {
            let lambda_min = tl
                .lambda_min
                .ok_or_else(|| Error::InvalidSpec("tline lambda_min required for the assumption margin".into()))?;
            let proxy = (lambda_a / lambda_min) * (lambda_a / lambda_min) / 4.0;
            let n_per_lambda = spec.n_cells as f64 * lambda_a / tl.length;
            Some(TlineProxy {
                proxy,
                n_per_lambda,
                justified: proxy < n_per_lambda,
            })
        }
        _ => None,
    };

    Ok(AssumptionAReport {
        ratio,
        mode_energy_sum_joule: sum_homega,
        mode_count,
        tline,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{validate, CellParams, CircuitSpec, ResonatorParams, TlineParams};
    use crate::hamiltonian::{build_flux_hamiltonian, BuildMode};
    use crate::spectrum::{assemble_matrix, TruncatedBasis};
    use approx::assert_relative_eq;

    #[test]
    fn gauss_laguerre_integrates_polynomials() {
        // ∫ e^{-u}·u^k du = k!.
        let gl = gauss_laguerre(12);
        for (k, expect) in [(0usize, 1.0f64), (1, 1.0), (2, 2.0), (3, 6.0), (5, 120.0)] {
            let got: f64 = gl.iter().map(|(u, w)| w * u.powi(k as i32)).sum();
            assert_relative_eq!(got, expect, max_relative = 1e-10);
        }
    }

    fn fig5c(n: usize, e_j: f64) -> crate::circuit::ValidatedSpec {
        validate(&CircuitSpec {
            topology: crate::circuit::Topology::Fig5cBambaCircuit,
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
    fn exact_partition_matches_normal_mode_product() {
        // E_J = 0: two coupled oscillators; Z = Π_k z_ho(Ω_k).
        let spec = fig5c(1, 0.0);
        let model = build_flux_hamiltonian(&spec, BuildMode::Concrete).unwrap();
        let ev = model.evaluate_internal();
        let g_sqrt = DMatrix::from_fn(2, 2, |i, j| if i == j { ev.charge[(i, i)].sqrt() } else { 0.0 });
        let dynamical = &g_sqrt * &ev.flux * &g_sqrt;
        let mut w2: Vec<f64> = dynamical.symmetric_eigen().eigenvalues.iter().cloned().collect();
        w2.sort_by(|a, b| a.partial_cmp(b).unwrap());

        let beta = 0.9;
        let asm = assemble_matrix(&model, &TruncatedBasis::new(40, 40)).unwrap();
        let z = partition_function_exact(&asm, beta).unwrap();
        let ln_expected: f64 = w2
            .iter()
            .map(|w2| {
                let w = w2.sqrt();
                -beta * w / 2.0 - (1.0 - (-beta * w).exp()).ln()
            })
            .sum();
        assert_relative_eq!(z.ln_z, ln_expected, max_relative = 1e-6);
    }

    #[test]
    fn ground_state_dominates_at_large_beta() {
        let spec = fig5c(1, 1e-22);
        let model = build_flux_hamiltonian(&spec, BuildMode::Concrete).unwrap();
        let asm = assemble_matrix(&model, &TruncatedBasis::new(12, 12)).unwrap();
        let e0 = crate::spectrum::ground_state(&asm, 1).unwrap().eigenvalues[0];
        let beta = 200.0;
        let z = partition_function_exact(&asm, beta).unwrap();
        assert_relative_eq!(z.ln_z, -beta * e0, max_relative = 1e-6);
    }

    #[test]
    fn cnumber_partition_reduces_to_closed_form_for_harmonic_cells() {
        // E_J = 0: the cell trace is α-independent (displaced oscillator), so
        // Z̄ = e^{-βω/2}/(βω)·z_cell exactly.
        let spec = fig5c(1, 0.0);
        let model = build_flux_hamiltonian(&spec, BuildMode::Concrete).unwrap();
        let beta = 1.3;
        let zbar = partition_function_cnumber(&model, beta, 1e-8, 16).unwrap();
        let omega_cell = 1.0 / (1e-10f64 * 1e-15).sqrt() / spec.units.omega_ref_si;
        let ln_cell = -beta * omega_cell / 2.0 - (1.0 - (-beta * omega_cell).exp()).ln();
        let expect = -beta / 2.0 - beta.ln() + ln_cell;
        assert_relative_eq!(zbar.ln_zbar, expect, max_relative = 1e-7);
    }

    #[test]
    fn hepp_closed_form_oscillator_passes_for_any_x() {
        for x in [0.05, 0.3, 1.0, 4.0, 20.0] {
            let ln_z = -x / 2.0 - (1.0 - (-x as f64).exp()).ln();
            let ln_zbar = -x / 2.0 - (x as f64).ln();
            let r = hepp_bounds_check(ln_z, ln_zbar, x, &[1.0]);
            assert!(r.lower_ok && r.upper_ok, "failed at x = {x}: {r:?}");
        }
    }

    #[test]
    fn hepp_margins_shrink_in_the_classical_limit() {
        let margin = |x: f64| {
            let ln_z = -x / 2.0 - (1.0 - (-x as f64).exp()).ln();
            let ln_zbar = -x / 2.0 - (x as f64).ln();
            hepp_bounds_check(ln_z, ln_zbar, x, &[1.0]).margin_lower
        };
        assert!(margin(0.01) < margin(0.1));
        assert!(margin(0.1) < margin(1.0));
    }

    #[test]
    fn assumption_a_tline_proxy_cases() {
        let mk = |n_cells: usize, lambda_min: f64, omega_a: f64| {
            validate(&CircuitSpec {
                topology: crate::circuit::Topology::Fig4CapacitiveTline,
                n_cells,
                resonator: None,
                cells: None,
                tline: Some(TlineParams {
                    l_t: 1e-6,
                    c_t: 1e-10,
                    dx: 1e-3,
                    length: 1e-2,
                    lambda_min: Some(lambda_min),
                    omega_a: Some(omega_a),
                }),
            })
            .unwrap()
        };
        // v = 1e8 m/s. λ_a = 2π·v/ω_a.
        let v: f64 = 1e8;
        // Pick ω_a so that λ_a/λ_min = 10 with λ_min = 1e-3: λ_a = 1e-2.
        let omega_a = std::f64::consts::TAU * v / 1e-2;
        // n = N·λ_a/ℓ = N·1 ⇒ N = 1000 gives n = 1000 ≫ proxy 25.
        let good = assumption_a_margin(&mk(1000, 1e-3, omega_a), 0.1, None).unwrap();
        let proxy = good.tline.unwrap();
        assert_relative_eq!(proxy.proxy, 25.0, max_relative = 1e-9);
        assert!(proxy.justified);
        // N = 10 gives n = 10 < 25: flagged unjustified.
        let bad = assumption_a_margin(&mk(10, 1e-3, omega_a), 0.1, None).unwrap();
        assert!(!bad.tline.unwrap().justified);
    }

    #[test]
    fn assumption_a_single_mode_scales_inversely_with_n() {
        let r = |n: usize| {
            assumption_a_margin(&fig5c(n, 1e-22), 0.05, Some(-2.0))
                .unwrap()
                .ratio
                .unwrap()
        };
        assert_relative_eq!(r(10) / r(100), 10.0, max_relative = 1e-9);
    }

    #[test]
    fn zero_free_energy_is_an_error() {
        assert!(matches!(
            assumption_a_margin(&fig5c(2, 1e-22), 0.05, Some(0.0)),
            Err(Error::ZeroFreeEnergy)
        ));
    }
}
