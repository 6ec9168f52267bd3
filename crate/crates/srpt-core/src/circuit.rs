//! Circuit specification data model: topologies, element values, validation
//! and the derived quantities every other module builds on.
//!
//! A [`CircuitSpec`] is the JSON-facing description of one of the seven
//! supported configurations. [`validate`] turns it into a [`ValidatedSpec`]
//! with all derived quantities populated, or reports every violation at once.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::consts;
use crate::error::Error;

/// The seven circuit configurations with a derivable Hamiltonian.
///
/// The string spellings are the wire format used in spec files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Topology {
    /// LC resonator coupled inductively (through its own inductor) to one black box.
    #[serde(rename = "Fig2_InductiveLC")]
    Fig2InductiveLc,
    /// LC resonator coupled capacitively to N black-box ports.
    #[serde(rename = "Fig3_CapacitiveLC")]
    Fig3CapacitiveLc,
    /// Discretized transmission line coupled capacitively to a long black box.
    #[serde(rename = "Fig4_CapacitiveTline")]
    Fig4CapacitiveTline,
    /// LC resonator coupled to N cells through one inductor per cell; cells abstract.
    #[serde(rename = "Fig5b_InductivePerCell")]
    Fig5bInductivePerCell,
    /// Same as Fig5b with each cell instantiated as a flux-biased Josephson junction.
    #[serde(rename = "Fig5c_BambaCircuit")]
    Fig5cBambaCircuit,
    /// Fig5c with the resonator inductor removed.
    #[serde(rename = "Fig5d_NoResonatorInductor")]
    Fig5dNoResonatorInductor,
    /// Transmission line coupled inductively to a long black box (two ports per segment).
    #[serde(rename = "Fig6_InductiveTline")]
    Fig6InductiveTline,
}

impl Topology {
    pub fn as_str(&self) -> &'static str {
        match self {
            Topology::Fig2InductiveLc => "Fig2_InductiveLC",
            Topology::Fig3CapacitiveLc => "Fig3_CapacitiveLC",
            Topology::Fig4CapacitiveTline => "Fig4_CapacitiveTline",
            Topology::Fig5bInductivePerCell => "Fig5b_InductivePerCell",
            Topology::Fig5cBambaCircuit => "Fig5c_BambaCircuit",
            Topology::Fig5dNoResonatorInductor => "Fig5d_NoResonatorInductor",
            Topology::Fig6InductiveTline => "Fig6_InductiveTline",
        }
    }

    pub fn is_tline(&self) -> bool {
        matches!(
            self,
            Topology::Fig4CapacitiveTline | Topology::Fig6InductiveTline
        )
    }
}

/// LC resonator element values. `l_r` is absent for the no-resonator-inductor
/// topology.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonatorParams {
    /// Resonator inductance, H.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_r: Option<f64>,
    /// Resonator capacitance, F.
    pub c_r: f64,
}

/// Per-cell element values. All cells are identical.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CellParams {
    /// Coupling inductance, H.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_c: Option<f64>,
    /// Josephson energy, J.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_j: Option<f64>,
    /// Junction capacitance, F.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_j: Option<f64>,
    /// External flux bias in units of the flux quantum, reduced to [0, 1).
    #[serde(default)]
    pub phi_ext_over_phi_q: f64,
    /// Second per-cell inductance, H (inductive transmission-line topology only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_t_prime: Option<f64>,
}

/// Transmission-line parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TlineParams {
    /// Inductance per unit length, H/m.
    pub l_t: f64,
    /// Capacitance per unit length, F/m.
    pub c_t: f64,
    /// Discretization segment length, m.
    pub dx: f64,
    /// Total line length, m.
    pub length: f64,
    /// Minimum confined wavelength, m.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_min: Option<f64>,
    /// Characteristic matter transition frequency, rad/s.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_a: Option<f64>,
}

/// User-facing description of a circuit: topology tag plus element values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitSpec {
    pub topology: Topology,
    pub n_cells: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resonator: Option<ResonatorParams>,
    #[serde(rename = "cell", skip_serializing_if = "Option::is_none")]
    pub cells: Option<CellParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tline: Option<TlineParams>,
}

impl CircuitSpec {
    pub fn from_json_str(s: &str) -> crate::error::Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidSpec(e.to_string()))
    }
}

/// Internal unit system: ħ = 1, energies in units of ħ·ω_ref, fluxes in units
/// of Φ_q/(2π), charges in units of ħ·2π/Φ_q. Conversion happens only at the
/// I/O boundary; everything numeric works on dimensionless values of order one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Units {
    /// Energy unit, J.
    pub energy_si: f64,
    /// Flux unit Φ_q/(2π), Wb.
    pub flux_si: f64,
    /// Charge unit ħ/flux_si, C.
    pub charge_si: f64,
    /// Reference angular frequency ω_ref = energy_si/ħ, rad/s.
    pub omega_ref_si: f64,
}

impl Units {
    fn from_omega_ref(omega_ref: f64) -> Self {
        let energy_si = consts::HBAR * omega_ref;
        let flux_si = consts::PHI_Q_REDUCED;
        Units {
            energy_si,
            flux_si,
            charge_si: consts::HBAR / flux_si,
            omega_ref_si: omega_ref,
        }
    }

    /// Internal value of an inverse inductance 1/L (L in henry): the
    /// dimensionless stiffness such that φ²/(2L) = ½·k·x² with x = φ/flux_si.
    pub fn inv_inductance(&self, l_henry: f64) -> f64 {
        self.flux_si * self.flux_si / (l_henry * self.energy_si)
    }

    /// Internal value of an inverse capacitance 1/C (C in farad).
    pub fn inv_capacitance(&self, c_farad: f64) -> f64 {
        self.charge_si * self.charge_si / (c_farad * self.energy_si)
    }

    /// Internal value of an energy in joule.
    pub fn energy(&self, e_joule: f64) -> f64 {
        e_joule / self.energy_si
    }

    /// Internal value of a flux in weber.
    pub fn flux(&self, phi_weber: f64) -> f64 {
        phi_weber / self.flux_si
    }

    /// SI flux from an internal flux value.
    pub fn flux_to_si(&self, x: f64) -> f64 {
        x * self.flux_si
    }

    /// SI energy from an internal energy value.
    pub fn energy_to_si(&self, e: f64) -> f64 {
        e * self.energy_si
    }

    /// Internal inverse temperature β = energy_si/(k_B T).
    pub fn beta(&self, t_kelvin: f64) -> f64 {
        self.energy_si / (consts::K_B * t_kelvin)
    }

    /// Temperature in kelvin from an internal β.
    pub fn beta_to_kelvin(&self, beta: f64) -> f64 {
        self.energy_si / (consts::K_B * beta)
    }
}

/// A spec that passed validation, with every derived quantity populated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidatedSpec {
    pub topology: Topology,
    pub n_cells: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resonator: Option<ResonatorParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cells: Option<CellParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tline: Option<TlineParams>,
    /// Resonator impedance √(L_R/C_R), Ω.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z_r: Option<f64>,
    /// Resonator frequency 1/√(L_R·C_R), rad/s.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_c: Option<f64>,
    /// Transmission-line phase velocity 1/√(L_T·C_T), m/s.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub velocity: Option<f64>,
    /// Matter wavelength 2π·v/ω_a, m.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_a: Option<f64>,
    /// Number of discretization segments ℓ/Δx.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub segments: Option<usize>,
    /// Effective number of confined photonic modes ℓ/λ_min.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode_count: Option<f64>,
    /// External flux bias, Wb, reduced to [0, Φ_q).
    pub phi_ext_weber: f64,
    /// Flux quantum h/(2e), Wb.
    pub flux_quantum: f64,
    pub units: Units,
}

/// No-go classification of a topology, independent of element values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TopologyClass {
    /// The decoupling analysis succeeds; superradiant transitions are excluded.
    NoGoFamily,
    /// The analysis cannot exclude a superradiant transition.
    NotConfirmedFamily,
}

/// Classify a topology into the no-go / not-confirmed families.
pub fn classify_topology(spec: &ValidatedSpec) -> TopologyClass {
    match spec.topology {
        Topology::Fig2InductiveLc | Topology::Fig3CapacitiveLc | Topology::Fig4CapacitiveTline => {
            TopologyClass::NoGoFamily
        }
        Topology::Fig5bInductivePerCell
        | Topology::Fig5cBambaCircuit
        | Topology::Fig5dNoResonatorInductor
        | Topology::Fig6InductiveTline => TopologyClass::NotConfirmedFamily,
    }
}

struct Violations(Vec<Error>);

impl Violations {
    fn new() -> Self {
        Violations(Vec::new())
    }

    fn positive(&mut self, field: &'static str, value: f64) {
        if !(value > 0.0) || !value.is_finite() {
            self.0.push(Error::NonPositiveElement { field, value });
        }
    }

    fn non_negative(&mut self, field: &'static str, value: f64) {
        if !(value >= 0.0) || !value.is_finite() {
            self.0.push(Error::NonPositiveElement { field, value });
        }
    }

    fn mismatch(&mut self, topology: Topology, problem: impl Into<String>) {
        self.0.push(Error::TopologyFieldMismatch {
            topology: topology.as_str().to_string(),
            problem: problem.into(),
        });
    }
}

/// Field demands of each topology. `Req` must be present, `Forbid` must be
/// absent, `Opt` may be present (enables a concrete build).
#[derive(Clone, Copy, PartialEq)]
enum Demand {
    Req,
    Forbid,
    Opt,
}

struct FieldRules {
    l_r: Demand,
    resonator: Demand,
    l_c: Demand,
    junction: Demand, // e_j together with c_j
    l_t_prime: Demand,
    tline: Demand,
}

fn rules(topology: Topology) -> FieldRules {
    use Demand::*;
    match topology {
        Topology::Fig2InductiveLc => FieldRules {
            l_r: Req,
            resonator: Req,
            l_c: Forbid,
            junction: Opt,
            l_t_prime: Forbid,
            tline: Forbid,
        },
        Topology::Fig3CapacitiveLc => FieldRules {
            l_r: Req,
            resonator: Req,
            l_c: Forbid,
            junction: Forbid,
            l_t_prime: Forbid,
            tline: Forbid,
        },
        Topology::Fig4CapacitiveTline => FieldRules {
            l_r: Forbid,
            resonator: Forbid,
            l_c: Forbid,
            junction: Forbid,
            l_t_prime: Forbid,
            tline: Req,
        },
        Topology::Fig5bInductivePerCell => FieldRules {
            l_r: Req,
            resonator: Req,
            l_c: Req,
            junction: Opt,
            l_t_prime: Forbid,
            tline: Forbid,
        },
        Topology::Fig5cBambaCircuit => FieldRules {
            l_r: Req,
            resonator: Req,
            l_c: Req,
            junction: Req,
            l_t_prime: Forbid,
            tline: Forbid,
        },
        Topology::Fig5dNoResonatorInductor => FieldRules {
            l_r: Forbid,
            resonator: Req,
            l_c: Req,
            junction: Req,
            l_t_prime: Forbid,
            tline: Forbid,
        },
        Topology::Fig6InductiveTline => FieldRules {
            l_r: Forbid,
            resonator: Forbid,
            l_c: Forbid,
            junction: Forbid,
            l_t_prime: Req,
            tline: Req,
        },
    }
}

/// Validate a circuit spec. Either every check passes and a [`ValidatedSpec`]
/// with derived quantities comes back, or the full list of violations does.
pub fn validate(spec: &CircuitSpec) -> std::result::Result<ValidatedSpec, Vec<Error>> {
    let mut v = Violations::new();
    let t = spec.topology;
    let r = rules(t);

    if spec.n_cells < 1 {
        v.mismatch(t, "requires n_cells >= 1".to_string());
    }

    // Resonator block.
    match (&spec.resonator, r.resonator) {
        (Some(res), Demand::Req | Demand::Opt) => {
            v.positive("c_r", res.c_r);
            match (res.l_r, r.l_r) {
                (Some(l_r), Demand::Req | Demand::Opt) => v.positive("l_r", l_r),
                (None, Demand::Req) => v.mismatch(t, "requires resonator.l_r"),
                (Some(_), Demand::Forbid) => v.mismatch(t, "forbids resonator.l_r"),
                (None, _) => {}
            }
        }
        (None, Demand::Req) => v.mismatch(t, "requires a resonator block"),
        (Some(_), Demand::Forbid) => v.mismatch(t, "forbids a resonator block"),
        (None, _) => {}
    }

    // Cell block.
    let cell_demanded = r.l_c != Demand::Forbid
        || r.junction != Demand::Forbid
        || r.l_t_prime != Demand::Forbid;
    match (&spec.cells, cell_demanded) {
        (Some(c), _) => {
            match (c.l_c, r.l_c) {
                (Some(l_c), Demand::Req | Demand::Opt) => v.positive("l_c", l_c),
                (None, Demand::Req) => v.mismatch(t, "requires cell.l_c"),
                (Some(_), Demand::Forbid) => v.mismatch(t, "forbids cell.l_c"),
                (None, _) => {}
            }
            match ((c.e_j, c.c_j), r.junction) {
                ((Some(e_j), Some(c_j)), Demand::Req | Demand::Opt) => {
                    v.non_negative("e_j", e_j);
                    v.positive("c_j", c_j);
                }
                ((None, None), Demand::Req) => v.mismatch(t, "requires cell.e_j and cell.c_j"),
                ((None, None), _) => {}
                ((Some(_), Some(_)), Demand::Forbid) => {
                    v.mismatch(t, "forbids cell.e_j and cell.c_j")
                }
                _ => v.mismatch(t, "cell.e_j and cell.c_j must be given together"),
            }
            match (c.l_t_prime, r.l_t_prime) {
                (Some(ltp), Demand::Req | Demand::Opt) => v.positive("l_t_prime", ltp),
                (None, Demand::Req) => v.mismatch(t, "requires cell.l_t_prime"),
                (Some(_), Demand::Forbid) => v.mismatch(t, "forbids cell.l_t_prime"),
                (None, _) => {}
            }
            if !c.phi_ext_over_phi_q.is_finite() {
                v.positive("phi_ext_over_phi_q", c.phi_ext_over_phi_q);
            }
        }
        (None, true) if r.l_c == Demand::Req || r.junction == Demand::Req || r.l_t_prime == Demand::Req => {
            v.mismatch(t, "requires a cell block")
        }
        (None, _) => {}
    }

    // Transmission-line block.
    match (&spec.tline, r.tline) {
        (Some(tl), Demand::Req | Demand::Opt) => {
            v.positive("l_t", tl.l_t);
            v.positive("c_t", tl.c_t);
            v.positive("dx", tl.dx);
            v.positive("length", tl.length);
            if let Some(lm) = tl.lambda_min {
                v.positive("lambda_min", lm);
            }
            if let Some(wa) = tl.omega_a {
                v.positive("omega_a", wa);
            }
        }
        (None, Demand::Req) => v.mismatch(t, "requires a tline block"),
        (Some(_), Demand::Forbid) => v.mismatch(t, "forbids a tline block"),
        (None, _) => {}
    }

    // Segment count must divide evenly; uses a relative tolerance so that
    // lengths written as decimals round-trip.
    let mut segments = None;
    if let (Some(tl), Demand::Req) = (&spec.tline, r.tline) {
        if tl.dx > 0.0 && tl.length > 0.0 {
            let ratio = tl.length / tl.dx;
            let rounded = ratio.round();
            if (ratio - rounded).abs() > 1e-9 * ratio.max(1.0) || rounded < 2.0 {
                v.0.push(Error::NonIntegerSegments {
                    length: tl.length,
                    dx: tl.dx,
                });
            } else {
                segments = Some(rounded as usize);
            }
        }
    }

    if !v.0.is_empty() {
        return Err(v.0);
    }

    // Derived quantities. All element values are positive from here on.
    let (z_r, omega_c) = match &spec.resonator {
        Some(res) => match res.l_r {
            Some(l_r) => ((l_r / res.c_r).sqrt().into(), (1.0 / (l_r * res.c_r).sqrt()).into()),
            None => (None, None),
        },
        None => (None, None),
    };
    let (velocity, lambda_a, mode_count) = match &spec.tline {
        Some(tl) => {
            let vel = 1.0 / (tl.l_t * tl.c_t).sqrt();
            let la = tl.omega_a.map(|wa| TAU * vel / wa);
            let m = tl.lambda_min.map(|lm| tl.length / lm);
            (Some(vel), la, m)
        }
        None => (None, None, None),
    };

    let omega_ref = match spec.topology {
        Topology::Fig4CapacitiveTline | Topology::Fig6InductiveTline => {
            let tl = spec.tline.as_ref().expect("tline required");
            std::f64::consts::PI * velocity.expect("velocity") / tl.length
        }
        Topology::Fig5dNoResonatorInductor => {
            let c = spec.cells.as_ref().expect("cells required");
            let res = spec.resonator.as_ref().expect("resonator required");
            1.0 / (c.l_c.expect("l_c required") * res.c_r).sqrt()
        }
        _ => omega_c.expect("resonator frequency"),
    };

    let phi_ext_weber = spec
        .cells
        .map(|c| c.phi_ext_over_phi_q.rem_euclid(1.0) * consts::PHI_Q)
        .unwrap_or(0.0);

    Ok(ValidatedSpec {
        topology: spec.topology,
        n_cells: spec.n_cells,
        resonator: spec.resonator,
        cells: spec.cells.map(|mut c| {
            c.phi_ext_over_phi_q = c.phi_ext_over_phi_q.rem_euclid(1.0);
            c
        }),
        tline: spec.tline,
        z_r,
        omega_c,
        velocity,
        lambda_a,
        segments,
        mode_count,
        phi_ext_weber,
        flux_quantum: consts::PHI_Q,
        units: Units::from_omega_ref(omega_ref),
    })
}

impl ValidatedSpec {
    /// Coupling inductance, H. Panics if the topology has none.
    pub fn l_c(&self) -> f64 {
        self.cells.and_then(|c| c.l_c).expect("topology has no coupling inductance")
    }

    /// Resonator inductance, H, when present.
    pub fn l_r(&self) -> Option<f64> {
        self.resonator.and_then(|r| r.l_r)
    }

    /// Josephson energy, J, when the cells are concrete.
    pub fn e_j(&self) -> Option<f64> {
        self.cells.and_then(|c| c.e_j)
    }

    /// Junction capacitance, F, when the cells are concrete.
    pub fn c_j(&self) -> Option<f64> {
        self.cells.and_then(|c| c.c_j)
    }

    /// True when the cell block carries junction values, so a concrete
    /// (cosine-term) Hamiltonian can be built.
    pub fn has_concrete_cells(&self) -> bool {
        matches!(
            self.cells,
            Some(CellParams {
                e_j: Some(_),
                c_j: Some(_),
                ..
            })
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn fig5c_spec() -> CircuitSpec {
        CircuitSpec {
            topology: Topology::Fig5cBambaCircuit,
            n_cells: 1,
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
        }
    }

    #[test]
    fn fig5c_reference_point_validates() {
        let spec = fig5c_spec();
        let v = validate(&spec).expect("valid");
        let omega_c = v.omega_c.unwrap();
        assert!((omega_c - 3.1623e10).abs() / 3.1623e10 < 1e-4);
        assert!((v.z_r.unwrap() - 31.623).abs() / 31.623 < 1e-4);
        assert!((v.phi_ext_weber - consts::PHI_Q / 2.0).abs() < 1e-25);
    }

    #[test]
    fn zero_capacitance_is_rejected() {
        let spec = CircuitSpec {
            topology: Topology::Fig2InductiveLc,
            n_cells: 1,
            resonator: Some(ResonatorParams {
                l_r: Some(1e-9),
                c_r: 0.0,
            }),
            cells: None,
            tline: None,
        };
        let errs = validate(&spec).unwrap_err();
        assert!(errs
            .iter()
            .any(|e| matches!(e, Error::NonPositiveElement { field: "c_r", .. })));
    }

    #[test]
    fn tline_segment_count() {
        let spec = CircuitSpec {
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
                omega_a: Some(1e10),
            }),
        };
        let v = validate(&spec).expect("valid");
        assert_eq!(v.segments, Some(10));
        let vel = v.velocity.unwrap();
        assert!((vel * vel * 1e-6 * 1e-10 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_integer_segments_rejected() {
        let spec = CircuitSpec {
            topology: Topology::Fig4CapacitiveTline,
            n_cells: 10,
            resonator: None,
            cells: None,
            tline: Some(TlineParams {
                l_t: 1e-6,
                c_t: 1e-10,
                dx: 3e-3,
                length: 1e-2,
                lambda_min: None,
                omega_a: None,
            }),
        };
        let errs = validate(&spec).unwrap_err();
        assert!(errs
            .iter()
            .any(|e| matches!(e, Error::NonIntegerSegments { .. })));
    }

    #[test]
    fn field_mismatch_reported() {
        // Fig3 forbids a cell block with l_c.
        let spec = CircuitSpec {
            topology: Topology::Fig3CapacitiveLc,
            n_cells: 3,
            resonator: Some(ResonatorParams {
                l_r: Some(1e-9),
                c_r: 1e-12,
            }),
            cells: Some(CellParams {
                l_c: Some(1e-10),
                ..Default::default()
            }),
            tline: None,
        };
        let errs = validate(&spec).unwrap_err();
        assert!(errs
            .iter()
            .any(|e| matches!(e, Error::TopologyFieldMismatch { .. })));
    }

    #[test]
    fn classification_is_pure_in_topology() {
        let mut spec = fig5c_spec();
        let v1 = validate(&spec).unwrap();
        assert_eq!(classify_topology(&v1), TopologyClass::NotConfirmedFamily);
        // Element values do not matter.
        spec.resonator.as_mut().unwrap().l_r = Some(7.7e-8);
        let v2 = validate(&spec).unwrap();
        assert_eq!(classify_topology(&v2), TopologyClass::NotConfirmedFamily);

        let fig3 = CircuitSpec {
            topology: Topology::Fig3CapacitiveLc,
            n_cells: 3,
            resonator: Some(ResonatorParams {
                l_r: Some(1e-9),
                c_r: 1e-12,
            }),
            cells: None,
            tline: None,
        };
        assert_eq!(
            classify_topology(&validate(&fig3).unwrap()),
            TopologyClass::NoGoFamily
        );
    }

    #[test]
    fn derived_quantities_satisfy_defining_algebra() {
        let v = validate(&fig5c_spec()).unwrap();
        let l_r = v.l_r().unwrap();
        let c_r = v.resonator.unwrap().c_r;
        let z = v.z_r.unwrap();
        let w = v.omega_c.unwrap();
        assert!((z * z - l_r / c_r).abs() <= 1e-12 * (l_r / c_r));
        assert!((w * w * l_r * c_r - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn flux_bias_reduced_modulo_flux_quantum() {
        let mut spec = fig5c_spec();
        spec.cells.as_mut().unwrap().phi_ext_over_phi_q = 2.5;
        let v = validate(&spec).unwrap();
        assert!((v.cells.unwrap().phi_ext_over_phi_q - 0.5).abs() < 1e-12);
        assert!(v.phi_ext_weber >= 0.0 && v.phi_ext_weber < consts::PHI_Q);
    }

    #[test]
    fn spec_json_round_trip() {
        let json = r#"{
            "topology": "Fig5c_BambaCircuit",
            "n_cells": 2,
            "resonator": {"l_r": 1e-9, "c_r": 1e-12},
            "cell": {"l_c": 1e-10, "e_j": 1e-22, "c_j": 1e-15, "phi_ext_over_phi_q": 0.5}
        }"#;
        let spec = CircuitSpec::from_json_str(json).unwrap();
        assert_eq!(spec.topology, Topology::Fig5cBambaCircuit);
        assert_eq!(spec.n_cells, 2);
        let back = serde_json::to_string(&spec).unwrap();
        let again = CircuitSpec::from_json_str(&back).unwrap();
        assert_eq!(spec, again);
    }
}
