//! Canonical JSON document for a derived Hamiltonian: variable table, dense
//! matrices in row-major order with units, cosine and box-argument lists.
//! This is the interchange format the CLI emits and the numeric subcommands
//! can consume back.

use serde::{Deserialize, Serialize};

use crate::circuit::Units;
use crate::error::{Error, Result};
use crate::hamiltonian::{
    CanonicalPair, EvalBoxArg, EvalCosine, EvaluatedModel, HamiltonianModel, Sector, VarKind,
};

pub const SCHEMA: &str = "srpt.hamiltonian.v1";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixDoc {
    pub unit: String,
    /// Row-major dense entries.
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VariableDoc {
    pub flux: String,
    pub charge: String,
    pub sector: String,
    pub cell: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CosineDoc {
    pub amplitude_joule: f64,
    /// Argument coefficients over the flux variables, rad/Wb.
    pub argument_coefficients_rad_per_weber: Vec<f64>,
    pub phase_offset_rad: f64,
    pub cell: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoxArgDoc {
    pub kind: String,
    pub cell: usize,
    /// Dimensionless coefficients over the variables of `kind`.
    pub coefficients: Vec<f64>,
    /// Offset in Wb (flux slots) or C (charge slots).
    pub offset_si: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UnitsDoc {
    pub energy_si: f64,
    pub flux_si: f64,
    pub charge_si: f64,
    pub omega_ref_si: f64,
}

/// The full interchange document, SI units throughout.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HamiltonianDocument {
    pub schema: String,
    pub topology: String,
    pub mode: String,
    pub procedure: String,
    pub boundary: String,
    pub n_cells: usize,
    pub units: UnitsDoc,
    pub variables: Vec<VariableDoc>,
    pub flux_matrix: MatrixDoc,
    pub charge_matrix: MatrixDoc,
    pub linear_flux: MatrixDoc,
    pub linear_charge: MatrixDoc,
    pub constant_joule: f64,
    pub cosines: Vec<CosineDoc>,
    pub blackbox: Vec<BoxArgDoc>,
}

impl HamiltonianDocument {
    pub fn from_model(model: &HamiltonianModel) -> Self {
        let ev = model.evaluate_internal();
        let u = model.units;
        let n = ev.pairs.len();
        // Internal stiffness → SI inverse inductance / capacitance.
        let f_si = u.energy_si / (u.flux_si * u.flux_si);
        let g_si = u.energy_si / (u.charge_si * u.charge_si);
        let to_rows = |m: &nalgebra::DMatrix<f64>, scale: f64| -> Vec<Vec<f64>> {
            (0..n)
                .map(|i| (0..n).map(|j| m[(i, j)] * scale).collect())
                .collect()
        };
        HamiltonianDocument {
            schema: SCHEMA.to_string(),
            topology: model.topology.as_str().to_string(),
            mode: format!("{:?}", model.mode),
            procedure: format!("{:?}", model.procedure),
            boundary: format!("{:?}", model.boundary),
            n_cells: model.n_cells,
            units: UnitsDoc {
                energy_si: u.energy_si,
                flux_si: u.flux_si,
                charge_si: u.charge_si,
                omega_ref_si: u.omega_ref_si,
            },
            variables: ev
                .pairs
                .iter()
                .map(|p| VariableDoc {
                    flux: p.flux_name.clone(),
                    charge: p.charge_name.clone(),
                    sector: format!("{:?}", p.sector),
                    cell: p.cell,
                })
                .collect(),
            flux_matrix: MatrixDoc {
                unit: "1/H".into(),
                rows: to_rows(&ev.flux, f_si),
            },
            charge_matrix: MatrixDoc {
                unit: "1/F".into(),
                rows: to_rows(&ev.charge, g_si),
            },
            linear_flux: MatrixDoc {
                unit: "J/Wb".into(),
                rows: vec![ev
                    .linear_flux
                    .iter()
                    .map(|v| v * u.energy_si / u.flux_si)
                    .collect()],
            },
            linear_charge: MatrixDoc {
                unit: "J/C".into(),
                rows: vec![ev
                    .linear_charge
                    .iter()
                    .map(|v| v * u.energy_si / u.charge_si)
                    .collect()],
            },
            constant_joule: ev.constant * u.energy_si,
            cosines: ev
                .cosines
                .iter()
                .map(|c| CosineDoc {
                    amplitude_joule: c.amplitude * u.energy_si,
                    argument_coefficients_rad_per_weber: c
                        .arg_flux
                        .iter()
                        .map(|a| a / u.flux_si)
                        .collect(),
                    phase_offset_rad: c.phase_offset,
                    cell: c.cell,
                })
                .collect(),
            blackbox: ev
                .blackbox
                .iter()
                .map(|b| BoxArgDoc {
                    kind: format!("{:?}", b.kind),
                    cell: b.cell,
                    coefficients: b.coeffs.clone(),
                    offset_si: match b.kind {
                        VarKind::Flux => b.offset * u.flux_si,
                        VarKind::Charge => b.offset * u.charge_si,
                    },
                })
                .collect(),
        }
    }

    /// Reconstruct the numeric (internal-unit) model. Exact-coefficient
    /// structure is not recoverable from a document; the evaluated form is
    /// what the numeric subcommands need.
    pub fn to_evaluated(&self) -> Result<EvaluatedModel> {
        if self.schema != SCHEMA {
            return Err(Error::InvalidSpec(format!(
                "unknown document schema {}",
                self.schema
            )));
        }
        let n = self.variables.len();
        let u = Units {
            energy_si: self.units.energy_si,
            flux_si: self.units.flux_si,
            charge_si: self.units.charge_si,
            omega_ref_si: self.units.omega_ref_si,
        };
        let f_si = u.energy_si / (u.flux_si * u.flux_si);
        let g_si = u.energy_si / (u.charge_si * u.charge_si);
        let parse_matrix = |doc: &MatrixDoc, scale: f64| -> Result<nalgebra::DMatrix<f64>> {
            if doc.rows.len() != n || doc.rows.iter().any(|r| r.len() != n) {
                return Err(Error::InvalidSpec("matrix dimension mismatch".into()));
            }
            Ok(nalgebra::DMatrix::from_fn(n, n, |i, j| {
                doc.rows[i][j] / scale
            }))
        };
        let sector = |s: &str| -> Result<Sector> {
            match s {
                "Photon" => Ok(Sector::Photon),
                "Matter" => Ok(Sector::Matter),
                other => Err(Error::InvalidSpec(format!("unknown sector {other}"))),
            }
        };
        let pairs: Vec<CanonicalPair> = self
            .variables
            .iter()
            .map(|v| {
                Ok(CanonicalPair {
                    flux_name: v.flux.clone(),
                    charge_name: v.charge.clone(),
                    sector: sector(&v.sector)?,
                    cell: v.cell,
                })
            })
            .collect::<Result<_>>()?;
        let linear = |doc: &MatrixDoc, scale: f64| -> Result<nalgebra::DVector<f64>> {
            let row = doc
                .rows
                .first()
                .ok_or_else(|| Error::InvalidSpec("missing linear row".into()))?;
            if row.len() != n {
                return Err(Error::InvalidSpec("linear dimension mismatch".into()));
            }
            Ok(nalgebra::DVector::from_iterator(
                n,
                row.iter().map(|v| v / scale),
            ))
        };
        Ok(EvaluatedModel {
            pairs,
            flux: parse_matrix(&self.flux_matrix, f_si)?,
            charge: parse_matrix(&self.charge_matrix, g_si)?,
            linear_flux: linear(&self.linear_flux, u.energy_si / u.flux_si)?,
            linear_charge: linear(&self.linear_charge, u.energy_si / u.charge_si)?,
            constant: self.constant_joule / u.energy_si,
            cosines: self
                .cosines
                .iter()
                .map(|c| {
                    if c.argument_coefficients_rad_per_weber.len() != n {
                        return Err(Error::InvalidSpec("cosine dimension mismatch".into()));
                    }
                    Ok(EvalCosine {
                        amplitude: c.amplitude_joule / u.energy_si,
                        arg_flux: c
                            .argument_coefficients_rad_per_weber
                            .iter()
                            .map(|a| a * u.flux_si)
                            .collect(),
                        phase_offset: c.phase_offset_rad,
                        cell: c.cell,
                    })
                })
                .collect::<Result<_>>()?,
            blackbox: self
                .blackbox
                .iter()
                .map(|b| {
                    let kind = match b.kind.as_str() {
                        "Flux" => VarKind::Flux,
                        "Charge" => VarKind::Charge,
                        other => return Err(Error::InvalidSpec(format!("unknown slot kind {other}"))),
                    };
                    Ok(EvalBoxArg {
                        kind,
                        cell: b.cell,
                        coeffs: b.coefficients.clone(),
                        offset: match kind {
                            VarKind::Flux => b.offset_si / u.flux_si,
                            VarKind::Charge => b.offset_si / u.charge_si,
                        },
                    })
                })
                .collect::<Result<_>>()?,
            units: u,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{validate, CellParams, CircuitSpec, ResonatorParams, Topology};
    use crate::hamiltonian::{build_flux_hamiltonian, BuildMode};

    #[test]
    fn document_round_trips_through_json() {
        let spec = validate(&CircuitSpec {
            topology: Topology::Fig5cBambaCircuit,
            n_cells: 2,
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
        .unwrap();
        let model = build_flux_hamiltonian(&spec, BuildMode::Concrete).unwrap();
        let doc = HamiltonianDocument::from_model(&model);
        // SI flux matrix entry (0,0) = 1/L_R + 2/L_c.
        let expect = 1.0 / 1e-9 + 2.0 / 1e-10;
        assert!((doc.flux_matrix.rows[0][0] - expect).abs() / expect < 1e-12);

        let text = serde_json::to_string_pretty(&doc).unwrap();
        let parsed: HamiltonianDocument = serde_json::from_str(&text).unwrap();
        let ev = parsed.to_evaluated().unwrap();
        let orig = model.evaluate_internal();
        for i in 0..3 {
            for j in 0..3 {
                assert!((ev.flux[(i, j)] - orig.flux[(i, j)]).abs() <= 1e-12 * orig.flux[(i, j)].abs().max(1.0));
                assert!((ev.charge[(i, j)] - orig.charge[(i, j)]).abs() <= 1e-12 * orig.charge[(i, j)].abs().max(1.0));
            }
        }
        assert_eq!(ev.cosines.len(), 2);
        assert!((ev.cosines[0].arg_flux[1] - 1.0).abs() < 1e-12);
    }
}
