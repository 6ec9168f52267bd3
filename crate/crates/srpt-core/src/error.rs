//! Crate-wide error type with stable error codes for the CLI layer.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("element value must be positive: {field} = {value}")]
    NonPositiveElement { field: &'static str, value: f64 },

    #[error("topology {topology} {problem}")]
    TopologyFieldMismatch {
        topology: String,
        problem: String,
    },

    #[error("transmission line length {length} is not an integer multiple (>= 2) of dx {dx}")]
    NonIntegerSegments { length: f64, dx: f64 },

    #[error("operation does not apply to topology {0}")]
    TopologyMismatch(String),

    #[error("no Hamiltonian can be derived for topology {0}")]
    UnsupportedTopology(String),

    #[error("shift generator is not symplectic: {0}")]
    NonSymplecticGenerator(String),

    #[error("model has no photon sector")]
    NoPhotonSector,

    #[error("model has {0} photon pairs; the coherent-amplitude substitution needs exactly one")]
    MultiplePhotonPairs(usize),

    #[error("Josephson energy is zero; critical inductance threshold is infinite")]
    ZeroJosephsonEnergy,

    #[error("minimization did not converge: best residual {residual} at (phi, psi) = ({phi}, {psi})")]
    NonConvergence { phi: f64, psi: f64, residual: f64 },

    #[error("cell basis not converged: |dF| = {delta} above tolerance {tol} at cutoff {cutoff}")]
    BasisNotConverged { delta: f64, tol: f64, cutoff: usize },

    #[error("not superradiant at T = 0; no critical temperature exists")]
    NotSuperradiantAtZeroT,

    #[error("Hilbert-space dimension {dim} exceeds budget {budget}")]
    DimensionBudgetExceeded { dim: usize, budget: usize },

    #[error("model contains an abstract black box; matrix assembly needs a concrete model")]
    AbstractBlackBoxPresent,

    #[error("eigensolver did not converge: residual norm {residual} after {iterations} iterations")]
    EigensolverNotConverged { residual: f64, iterations: usize },

    #[error("partition-function tail bound {bound} exceeds {tol} * Z")]
    TailBoundTooLoose { bound: f64, tol: f64 },

    #[error("coherent-state quadrature not converged: |dZ|/Z = {delta} at {nodes} radial nodes")]
    QuadratureNotConverged { delta: f64, nodes: usize },

    #[error("free energy per atom is zero; assumption margin undefined")]
    ZeroFreeEnergy,

    #[error("invalid circuit spec: {0}")]
    InvalidSpec(String),
}

impl Error {
    /// Stable machine-readable code, used by the CLI error reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NonPositiveElement { .. } => "non_positive_element",
            Error::TopologyFieldMismatch { .. } => "topology_field_mismatch",
            Error::NonIntegerSegments { .. } => "non_integer_segments",
            Error::TopologyMismatch(_) => "topology_mismatch",
            Error::UnsupportedTopology(_) => "unsupported_topology",
            Error::NonSymplecticGenerator(_) => "non_symplectic_generator",
            Error::NoPhotonSector => "no_photon_sector",
            Error::MultiplePhotonPairs(_) => "multiple_photon_pairs",
            Error::ZeroJosephsonEnergy => "zero_josephson_energy",
            Error::NonConvergence { .. } => "non_convergence",
            Error::BasisNotConverged { .. } => "basis_not_converged",
            Error::NotSuperradiantAtZeroT => "not_superradiant_at_zero_t",
            Error::DimensionBudgetExceeded { .. } => "dimension_budget_exceeded",
            Error::AbstractBlackBoxPresent => "abstract_black_box_present",
            Error::EigensolverNotConverged { .. } => "eigensolver_not_converged",
            Error::TailBoundTooLoose { .. } => "tail_bound_too_loose",
            Error::QuadratureNotConverged { .. } => "quadrature_not_converged",
            Error::ZeroFreeEnergy => "zero_free_energy",
            Error::InvalidSpec(_) => "invalid_spec",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
