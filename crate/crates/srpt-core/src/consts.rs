//! Physical constants (CODATA, SI units).

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Planck constant, J·s (exact by SI definition).
pub const PLANCK_H: f64 = 6.626_070_15e-34;

/// Elementary charge, C (exact by SI definition).
pub const E_CHARGE: f64 = 1.602_176_634e-19;

/// Boltzmann constant, J/K (exact by SI definition).
pub const K_B: f64 = 1.380_649e-23;

/// Superconducting flux quantum h/(2e), Wb.
pub const PHI_Q: f64 = 2.067_833_848e-15;

/// Reduced flux quantum Φ_q/(2π), Wb. Internal flux unit.
pub const PHI_Q_REDUCED: f64 = PHI_Q / std::f64::consts::TAU;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flux_quantum_matches_h_over_2e() {
        let derived = PLANCK_H / (2.0 * E_CHARGE);
        assert!((derived - PHI_Q).abs() / PHI_Q < 1e-9);
    }
}
