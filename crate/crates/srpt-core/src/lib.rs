//! Quantized Hamiltonians for lumped-element superconducting circuits, the
//! no-go decision logic for superradiant phase transitions, mean-field
//! thermodynamics of the per-cell inductive family, and exact diagonalization
//! on truncated bases at small cell counts.
//!
//! The crate is organized along the pipeline:
//!
//! * [`circuit`] — circuit specs, validation, derived quantities, units;
//! * [`hamiltonian`] — exact coefficient models, builders per topology,
//!   unitary rewrites and the coherent-amplitude substitution;
//! * [`meanfield`] — landscape minimization, critical condition, free energy
//!   and critical temperature, phase diagrams;
//! * [`spectrum`] — truncated-basis assembly, dense/iterative spectra,
//!   partition functions and the sandwich bounds;
//! * [`nogo`] — the decoupling-transformation search and the final verdict;
//! * [`report`] — the JSON interchange document for derived Hamiltonians.

pub mod circuit;
pub mod coeff;
pub mod consts;
pub mod error;
pub mod hamiltonian;
pub mod meanfield;
pub mod nogo;
pub mod report;
pub mod spectrum;

pub use circuit::{classify_topology, validate, CircuitSpec, Topology, TopologyClass, ValidatedSpec};
pub use error::{Error, Result};
pub use hamiltonian::{
    apply_unitary_shift, build_charge_hamiltonian, build_flux_hamiltonian, build_hamiltonian,
    c_number_substitute, resonator_mode, Boundary, BuildMode, HamiltonianModel, ShiftSpec,
};
pub use meanfield::{
    critical_inductance, critical_temperature, free_energy, minimize_potential,
    order_parameter_vs_bias, phase_diagram, thermal_order_parameter, EffectivePotential,
    MeanFieldResult, Phase,
};
pub use nogo::{
    classify_srpt, classify_unsupported, competition_report, decoupling_transform_exists,
    Classification, ClassifyOptions, DecouplingOutcome, Verdict,
};
pub use report::HamiltonianDocument;
pub use spectrum::{
    assemble_matrix, ground_state, verify_unitary_equivalence, SpectrumResult, TruncatedBasis,
};
