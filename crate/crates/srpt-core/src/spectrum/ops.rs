//! Single-mode operators in a truncated harmonic-oscillator basis.
//!
//! Flux and charge quadratures are built from ladder operators at an enlarged
//! cutoff and projected back, which suppresses the edge artifacts of truncated
//! operator products. Cosines of the flux quadrature use the closed-form
//! displacement-operator matrix elements (associated Laguerre polynomials),
//! so every entry is exact to rounding regardless of cutoff.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Margin added to the cutoff before operator products are formed.
pub const CUTOFF_PAD: usize = 4;

/// Flux quadrature X = √(z/2)(b + b†), truncated to `n`.
pub fn x_matrix(n: usize, z: f64) -> DMatrix<f64> {
    let big = n + CUTOFF_PAD;
    let mut x = DMatrix::zeros(big, big);
    let s = (z / 2.0).sqrt();
    for k in 1..big {
        let v = s * (k as f64).sqrt();
        x[(k - 1, k)] = v;
        x[(k, k - 1)] = v;
    }
    x.view((0, 0), (n, n)).into_owned()
}

/// X² truncated to `n`, formed at the padded cutoff.
pub fn xx_matrix(n: usize, z: f64) -> DMatrix<f64> {
    let big = n + CUTOFF_PAD;
    let mut x = DMatrix::zeros(big, big);
    let s = (z / 2.0).sqrt();
    for k in 1..big {
        let v = s * (k as f64).sqrt();
        x[(k - 1, k)] = v;
        x[(k, k - 1)] = v;
    }
    let sq = &x * &x;
    sq.view((0, 0), (n, n)).into_owned()
}

/// P² truncated to `n`. P = -i·√(1/(2z))(b - b†), so P² is real symmetric.
pub fn pp_matrix(n: usize, z: f64) -> DMatrix<f64> {
    let big = n + CUTOFF_PAD;
    // (b - b†) is real antisymmetric; P² = -(1/2z)(b - b†)².
    let mut d = DMatrix::zeros(big, big);
    for k in 1..big {
        let v = (k as f64).sqrt();
        d[(k - 1, k)] = v;
        d[(k, k - 1)] = -v;
    }
    let sq = &d * &d;
    let scale = -1.0 / (2.0 * z);
    let full = sq * scale;
    full.view((0, 0), (n, n)).into_owned()
}

/// Antisymmetric ladder difference (b - b†), truncated to `n`. The momentum
/// quadrature is P = -i·√(1/(2z))·this; cross products P_i⊗P_j stay real.
pub fn ladder_diff_matrix(n: usize) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(n, n);
    for k in 1..n {
        let v = (k as f64).sqrt();
        d[(k - 1, k)] = v;
        d[(k, k - 1)] = -v;
    }
    d
}

/// Matrix of amp·cos(a·X + θ) in the harmonic basis with impedance `z`.
///
/// Uses ⟨m|e^{iaX}|n⟩ = i^{m-n}·g^{m-n}·√(n!/m!)·e^{-g²/2}·L_n^{(m-n)}(g²)
/// with g = a·√(z/2); the real part against the phase factor e^{iθ} gives
/// the cosine. Exact elements of the untruncated operator.
pub fn cos_matrix(n: usize, z: f64, a: f64, theta: f64, amp: f64) -> DMatrix<f64> {
    let g = a * (z / 2.0).sqrt();
    let g2 = g * g;
    let damp = (-g2 / 2.0).exp();
    let mut out = DMatrix::zeros(n, n);
    for col in 0..n {
        // Laguerre recurrence in the degree for fixed order d = m - col.
        for row in col..n {
            let d = row - col;
            // g^d·√(col!/row!) as a stable product.
            let mut scale = 1.0;
            for j in (col + 1)..=row {
                scale *= g / (j as f64).sqrt();
            }
            let lag = laguerre(col, d as f64, g2);
            // Re[e^{iθ}·i^d]
            let phase = match d % 4 {
                0 => theta.cos(),
                1 => -theta.sin(),
                2 => -theta.cos(),
                _ => theta.sin(),
            };
            let v = amp * phase * scale * damp * lag;
            out[(row, col)] = v;
            out[(col, row)] = v;
        }
    }
    out
}

/// Associated Laguerre polynomial L_k^{(d)}(x) by the three-term recurrence.
fn laguerre(k: usize, d: f64, x: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let mut lm1 = 1.0;
    let mut l = 1.0 + d - x;
    for j in 2..=k {
        let jf = j as f64;
        let next = ((2.0 * jf - 1.0 + d - x) * l - (jf - 1.0 + d) * lm1) / jf;
        lm1 = l;
        l = next;
    }
    l
}

/// A single canonical pair with quadratic, linear and cosine terms:
/// H = ½·m⁻¹·P² + ½·k·X² + μ·X + λ·P + Σ amp·cos(a·X + θ) + const.
///
/// Linear momentum terms are folded away exactly (a momentum displacement is
/// unitary and X-dependent terms are untouched), keeping the matrix real.
#[derive(Debug, Clone)]
pub struct SingleModeProblem {
    pub flux_stiffness: f64,
    pub charge_stiffness: f64,
    pub linear_flux: f64,
    pub linear_charge: f64,
    /// (amplitude, argument coefficient, phase offset)
    pub cosines: Vec<(f64, f64, f64)>,
    pub constant: f64,
}

impl SingleModeProblem {
    /// Basis frequency and impedance. When the bare flux stiffness vanishes
    /// (it can after a variable substitution), the curvature of the cosine
    /// terms stands in so a harmonic basis still exists.
    pub fn basis_params(&self) -> Result<(f64, f64)> {
        let k_eff = if self.flux_stiffness > 1e-12 {
            self.flux_stiffness
        } else {
            self.cosines
                .iter()
                .map(|(amp, a, _)| amp.abs() * a * a)
                .sum::<f64>()
        };
        if k_eff <= 0.0 || self.charge_stiffness <= 0.0 {
            return Err(Error::InvalidSpec(
                "cell has no confining quadratic part; no harmonic basis exists".into(),
            ));
        }
        let omega = (k_eff * self.charge_stiffness).sqrt();
        let z = (self.charge_stiffness / k_eff).sqrt();
        Ok((omega, z))
    }

    /// Dense Hamiltonian at the given cutoff.
    pub fn hamiltonian(&self, cutoff: usize) -> Result<DMatrix<f64>> {
        let (_, z) = self.basis_params()?;
        let mut h = xx_matrix(cutoff, z) * (0.5 * self.flux_stiffness);
        h += pp_matrix(cutoff, z) * (0.5 * self.charge_stiffness);
        if self.linear_flux != 0.0 {
            h += x_matrix(cutoff, z) * self.linear_flux;
        }
        for &(amp, a, theta) in &self.cosines {
            if amp != 0.0 {
                h += cos_matrix(cutoff, z, a, theta, amp);
            }
        }
        // ½m⁻¹(P + λ/m⁻¹·…)² bookkeeping: λP drops, energy shifts down.
        let mut shift = self.constant;
        if self.linear_charge != 0.0 {
            shift -= self.linear_charge * self.linear_charge / (2.0 * self.charge_stiffness);
        }
        for i in 0..cutoff {
            h[(i, i)] += shift;
        }
        Ok(h)
    }

    /// Ascending eigenvalues at the given cutoff.
    pub fn eigenvalues(&self, cutoff: usize) -> Result<Vec<f64>> {
        let h = self.hamiltonian(cutoff)?;
        let mut ev: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().cloned().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(ev)
    }

    /// Ground energy, converged by cutoff doubling to |ΔE| < tol.
    pub fn ground_energy(&self, start_cutoff: usize, tol: f64, max_cutoff: usize) -> Result<f64> {
        let mut cutoff = start_cutoff.max(4);
        let mut prev = self.eigenvalues(cutoff)?[0];
        loop {
            cutoff *= 2;
            let cur = self.eigenvalues(cutoff)?[0];
            let delta = (cur - prev).abs();
            if delta < tol {
                return Ok(cur);
            }
            if cutoff >= max_cutoff {
                return Err(Error::BasisNotConverged {
                    delta,
                    tol,
                    cutoff,
                });
            }
            prev = cur;
        }
    }

    /// Partition function Σ e^{-β·E_i} at the given cutoff.
    pub fn partition(&self, beta: f64, cutoff: usize) -> Result<f64> {
        let ev = self.eigenvalues(cutoff)?;
        Ok(ev.iter().map(|e| (-beta * e).exp()).sum())
    }

    /// ln Z by log-sum-exp (safe at any β), at the given cutoff.
    pub fn ln_partition_at(&self, beta: f64, cutoff: usize) -> Result<f64> {
        let ev = self.eigenvalues(cutoff)?;
        Ok(ln_sum_exp_neg_beta(&ev, beta))
    }

    /// ln Z, converged by cutoff doubling to |Δln Z| < tol.
    pub fn ln_partition(&self, beta: f64, start_cutoff: usize, tol: f64, max_cutoff: usize) -> Result<(f64, usize)> {
        let mut cutoff = start_cutoff.max(4);
        let mut prev = self.ln_partition_at(beta, cutoff)?;
        loop {
            cutoff *= 2;
            let cur = self.ln_partition_at(beta, cutoff)?;
            let delta = (cur - prev).abs();
            if delta < tol {
                return Ok((cur, cutoff));
            }
            if cutoff >= max_cutoff {
                return Err(Error::BasisNotConverged {
                    delta,
                    tol,
                    cutoff,
                });
            }
            prev = cur;
        }
    }
}

/// ln Σ e^{-β·E_i} anchored at the lowest level, so large β never underflows.
pub fn ln_sum_exp_neg_beta(ascending: &[f64], beta: f64) -> f64 {
    let e0 = ascending[0];
    let sum: f64 = ascending.iter().map(|e| (-beta * (e - e0)).exp()).sum();
    -beta * e0 + sum.ln()
}

/// Flux-grid discretization of the same single-mode problem, used as a
/// validation fallback for the harmonic-basis path.
pub fn grid_eigenvalues(p: &SingleModeProblem, half_width: f64, points: usize, k: usize) -> Vec<f64> {
    let n = points;
    let dx = 2.0 * half_width / (n as f64 - 1.0);
    let m_inv = p.charge_stiffness;
    let mut h = DMatrix::zeros(n, n);
    // Second-order central difference for P² = -d²/dx² (ħ = 1).
    let t = m_inv / (2.0 * dx * dx);
    for i in 0..n {
        let x = -half_width + i as f64 * dx;
        let mut v = 0.5 * p.flux_stiffness * x * x + p.linear_flux * x + p.constant;
        for &(amp, a, theta) in &p.cosines {
            v += amp * (a * x + theta).cos();
        }
        if p.linear_charge != 0.0 {
            v -= p.linear_charge * p.linear_charge / (2.0 * m_inv);
        }
        h[(i, i)] = v + 2.0 * t;
        if i + 1 < n {
            h[(i, i + 1)] = -t;
            h[(i + 1, i)] = -t;
        }
    }
    let mut ev: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().cloned().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev.truncate(k);
    ev
}
