//! Exact coefficient storage for Hamiltonian terms.
//!
//! Every quadratic or cosine coefficient built from a circuit is a rational
//! combination of a handful of element "atoms" (1/L_R, 1/L_c, E_J, ...).
//! Storing those combinations exactly keeps unitary-rewrite identities exact;
//! floating point enters only when a model is handed to the numeric modules.

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;

use crate::circuit::{Units, ValidatedSpec};

/// One element-derived quantity. The numeric value depends on the evaluation
/// context (SI or internal units); the symbol does not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Atom {
    /// Dimensionless unity, for plain numbers.
    One,
    /// 1/L_R, 1/H.
    InvLr,
    /// 1/L_c, 1/H.
    InvLc,
    /// 1/C_R, 1/F.
    InvCr,
    /// 1/C_J, 1/F.
    InvCj,
    /// 1/(L_T·Δx), 1/H.
    InvLtDx,
    /// 1/(C_T·Δx), 1/F.
    InvCtDx,
    /// 1/(L_T'·Δx), 1/H.
    InvLtpDx,
    /// Josephson energy E_J, J.
    Ej,
}

impl Atom {
    pub fn symbol(&self) -> &'static str {
        match self {
            Atom::One => "1",
            Atom::InvLr => "1/L_R",
            Atom::InvLc => "1/L_c",
            Atom::InvCr => "1/C_R",
            Atom::InvCj => "1/C_J",
            Atom::InvLtDx => "1/(L_T*dx)",
            Atom::InvCtDx => "1/(C_T*dx)",
            Atom::InvLtpDx => "1/(L_T'*dx)",
            Atom::Ej => "E_J",
        }
    }
}

/// Numeric values of the atoms in some unit system.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AtomValues {
    pub inv_lr: f64,
    pub inv_lc: f64,
    pub inv_cr: f64,
    pub inv_cj: f64,
    pub inv_lt_dx: f64,
    pub inv_ct_dx: f64,
    pub inv_ltp_dx: f64,
    pub e_j: f64,
}

impl AtomValues {
    pub fn get(&self, atom: Atom) -> f64 {
        match atom {
            Atom::One => 1.0,
            Atom::InvLr => self.inv_lr,
            Atom::InvLc => self.inv_lc,
            Atom::InvCr => self.inv_cr,
            Atom::InvCj => self.inv_cj,
            Atom::InvLtDx => self.inv_lt_dx,
            Atom::InvCtDx => self.inv_ct_dx,
            Atom::InvLtpDx => self.inv_ltp_dx,
            Atom::Ej => self.e_j,
        }
    }

    /// Atom values in SI units (1/H, 1/F, J).
    pub fn si(spec: &ValidatedSpec) -> Self {
        let mut v = AtomValues::default();
        if let Some(l_r) = spec.l_r() {
            v.inv_lr = 1.0 / l_r;
        }
        if let Some(c) = spec.cells {
            if let Some(l_c) = c.l_c {
                v.inv_lc = 1.0 / l_c;
            }
        }
        if let Some(r) = spec.resonator {
            v.inv_cr = 1.0 / r.c_r;
        }
        if let Some(c_j) = spec.c_j() {
            v.inv_cj = 1.0 / c_j;
        }
        if let Some(e_j) = spec.e_j() {
            v.e_j = e_j;
        }
        if let Some(tl) = spec.tline {
            v.inv_lt_dx = 1.0 / (tl.l_t * tl.dx);
            v.inv_ct_dx = 1.0 / (tl.c_t * tl.dx);
        }
        if let Some(cell) = spec.cells {
            if let (Some(ltp), Some(tl)) = (cell.l_t_prime, spec.tline) {
                v.inv_ltp_dx = 1.0 / (ltp * tl.dx);
            }
        }
        v
    }

    /// Atom values in the internal unit system of `units`.
    pub fn internal(spec: &ValidatedSpec, units: &Units) -> Self {
        let si = Self::si(spec);
        let inv_l = |x: f64| {
            if x == 0.0 {
                0.0
            } else {
                units.inv_inductance(1.0 / x)
            }
        };
        let inv_c = |x: f64| {
            if x == 0.0 {
                0.0
            } else {
                units.inv_capacitance(1.0 / x)
            }
        };
        AtomValues {
            inv_lr: inv_l(si.inv_lr),
            inv_lc: inv_l(si.inv_lc),
            inv_cr: inv_c(si.inv_cr),
            inv_cj: inv_c(si.inv_cj),
            inv_lt_dx: inv_l(si.inv_lt_dx),
            inv_ct_dx: inv_c(si.inv_ct_dx),
            inv_ltp_dx: inv_l(si.inv_ltp_dx),
            e_j: units.energy(si.e_j),
        }
    }
}

/// An exact linear combination of atoms with rational weights.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Coeff {
    terms: BTreeMap<Atom, Rational64>,
}

impl Coeff {
    pub fn zero() -> Self {
        Coeff::default()
    }

    pub fn atom(a: Atom) -> Self {
        Coeff::scaled(a, Rational64::one())
    }

    pub fn scaled(a: Atom, r: Rational64) -> Self {
        let mut terms = BTreeMap::new();
        if !r.is_zero() {
            terms.insert(a, r);
        }
        Coeff { terms }
    }

    pub fn number(r: Rational64) -> Self {
        Coeff::scaled(Atom::One, r)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_assign(&mut self, other: &Coeff) {
        for (a, r) in &other.terms {
            let entry = self.terms.entry(*a).or_insert_with(Rational64::zero);
            *entry += r;
            if entry.is_zero() {
                self.terms.remove(a);
            }
        }
    }

    pub fn add(&self, other: &Coeff) -> Coeff {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn sub(&self, other: &Coeff) -> Coeff {
        self.add(&other.scale(-Rational64::one()))
    }

    pub fn scale(&self, r: Rational64) -> Coeff {
        if r.is_zero() {
            return Coeff::zero();
        }
        Coeff {
            terms: self.terms.iter().map(|(a, w)| (*a, w * r)).collect(),
        }
    }

    pub fn neg(&self) -> Coeff {
        self.scale(-Rational64::one())
    }

    pub fn eval(&self, values: &AtomValues) -> f64 {
        self.terms
            .iter()
            .map(|(a, r)| ratio_to_f64(*r) * values.get(*a))
            .sum()
    }

    pub fn terms(&self) -> impl Iterator<Item = (Atom, Rational64)> + '_ {
        self.terms.iter().map(|(a, r)| (*a, *r))
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (a, r) in &self.terms {
            if first {
                if r.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if r.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let abs = r.abs();
            if abs.is_one() && *a != Atom::One {
                write!(f, "{}", a.symbol())?;
            } else if *a == Atom::One {
                write!(f, "{}", abs)?;
            } else {
                write!(f, "{}*{}", abs, a.symbol())?;
            }
        }
        Ok(())
    }
}

pub fn ratio_to_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Dense rational matrix with just enough linear algebra for the symplectic
/// bookkeeping of variable substitutions.
#[derive(Debug, Clone, PartialEq)]
pub struct RatMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Rational64>,
}

impl RatMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMat {
            rows,
            cols,
            data: vec![Rational64::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RatMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational64::one();
        }
        m
    }

    pub fn transpose(&self) -> RatMat {
        let mut out = RatMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn mul(&self, other: &RatMat) -> RatMat {
        assert_eq!(self.cols, other.rows);
        let mut out = RatMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    /// Gauss-Jordan inverse. `None` when singular.
    pub fn inverse(&self) -> Option<RatMat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = RatMat::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a[(r, col)].is_zero())?;
            if pivot != col {
                for j in 0..n {
                    a.data.swap(col * n + j, pivot * n + j);
                    inv.data.swap(col * n + j, pivot * n + j);
                }
            }
            let p = a[(col, col)];
            for j in 0..n {
                a[(col, j)] /= p;
                inv[(col, j)] /= p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = a[(r, col)];
                if factor.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let v = a[(col, j)];
                    a[(r, j)] -= factor * v;
                    let w = inv[(col, j)];
                    inv[(r, j)] -= factor * w;
                }
            }
        }
        Some(inv)
    }
}

impl std::ops::Index<(usize, usize)> for RatMat {
    type Output = Rational64;
    fn index(&self, (i, j): (usize, usize)) -> &Rational64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RatMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational64 {
        &mut self.data[i * self.cols + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64 as R;

    #[test]
    fn combination_algebra_is_exact() {
        // 1/L_R + 2/L_c - 2/L_c == 1/L_R exactly.
        let mut c = Coeff::atom(Atom::InvLr);
        c.add_assign(&Coeff::scaled(Atom::InvLc, R::new(2, 1)));
        c.add_assign(&Coeff::scaled(Atom::InvLc, R::new(-2, 1)));
        assert_eq!(c, Coeff::atom(Atom::InvLr));
    }

    #[test]
    fn eval_combines_atom_values() {
        let mut c = Coeff::atom(Atom::InvLr);
        c.add_assign(&Coeff::scaled(Atom::InvLc, R::new(3, 2)));
        let vals = AtomValues {
            inv_lr: 2.0,
            inv_lc: 4.0,
            ..Default::default()
        };
        assert_eq!(c.eval(&vals), 2.0 + 1.5 * 4.0);
    }

    #[test]
    fn rational_inverse_round_trips() {
        let mut m = RatMat::identity(3);
        m[(0, 1)] = R::new(1, 2);
        m[(1, 2)] = R::new(-3, 1);
        m[(2, 0)] = R::new(2, 5);
        let inv = m.inverse().expect("invertible");
        assert_eq!(m.mul(&inv), RatMat::identity(3));
    }

    #[test]
    fn singular_matrix_has_no_inverse() {
        let mut m = RatMat::zeros(2, 2);
        m[(0, 0)] = R::one();
        assert!(m.inverse().is_none());
    }
}
