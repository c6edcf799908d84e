//! Linear algebra of the Minkowski space `R^{4,1} = (R⁵, η)` with
//! `η = diag(1, 1, 1, 1, −1)`, and its de Sitter quadric
//! `S^{3,1} = {x : |x|²_η = 1}`.
//!
//! The sign convention lives entirely in [`eta_dot`]: the fifth component
//! carries the minus sign and the 5×5 matrix is never materialised.  The
//! complex pairing is *bilinear*, not sesquitilinear — `⟨Y_z, Y_z⟩_η = 0` is
//! the conformality statement and would be destroyed by conjugation.

use num_complex::Complex64;
use std::ops::{Add, Mul, Neg, Sub};

/// A vector of `R^{4,1}`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec5(pub [f64; 5]);

/// A vector of the complexification `C⁵` of `R^{4,1}` (houses `Y_z`, `Y_z̄`).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CVec5(pub [Complex64; 5]);

/// Bilinear Minkowski product `a¹b¹ + a²b² + a³b³ + a⁴b⁴ − a⁵b⁵`.
pub fn eta_dot(a: &Vec5, b: &Vec5) -> f64 {
    a.0[0] * b.0[0] + a.0[1] * b.0[1] + a.0[2] * b.0[2] + a.0[3] * b.0[3] - a.0[4] * b.0[4]
}

/// Complex-bilinear Minkowski product (NOT sesquilinear).
pub fn eta_dot_c(a: &CVec5, b: &CVec5) -> Complex64 {
    a.0[0] * b.0[0] + a.0[1] * b.0[1] + a.0[2] * b.0[2] + a.0[3] * b.0[3] - a.0[4] * b.0[4]
}

/// Does `a` lie on the de Sitter quadric `|a|²_η = 1` within `tol`?
pub fn on_desitter(a: &Vec5, tol: f64) -> bool {
    debug_assert!(tol > 0.0);
    (eta_dot(a, a) - 1.0).abs() <= tol
}

impl Vec5 {
    pub fn zeros() -> Self {
        Vec5([0.0; 5])
    }

    pub fn complexify(&self) -> CVec5 {
        CVec5(self.0.map(|x| Complex64::new(x, 0.0)))
    }

    /// Euclidean (not η) norm, used for residual magnitudes.
    pub fn norm_euclid(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

impl CVec5 {
    pub fn conj(&self) -> CVec5 {
        CVec5(self.0.map(|x| x.conj()))
    }

    pub fn norm_euclid(&self) -> f64 {
        self.0.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }
}

impl Add for Vec5 {
    type Output = Vec5;
    fn add(self, rhs: Vec5) -> Vec5 {
        let mut out = self.0;
        for (o, r) in out.iter_mut().zip(rhs.0) {
            *o += r;
        }
        Vec5(out)
    }
}

impl Sub for Vec5 {
    type Output = Vec5;
    fn sub(self, rhs: Vec5) -> Vec5 {
        let mut out = self.0;
        for (o, r) in out.iter_mut().zip(rhs.0) {
            *o -= r;
        }
        Vec5(out)
    }
}

impl Mul<f64> for Vec5 {
    type Output = Vec5;
    fn mul(self, rhs: f64) -> Vec5 {
        Vec5(self.0.map(|x| x * rhs))
    }
}

impl Neg for Vec5 {
    type Output = Vec5;
    fn neg(self) -> Vec5 {
        Vec5(self.0.map(|x| -x))
    }
}

impl Add for CVec5 {
    type Output = CVec5;
    fn add(self, rhs: CVec5) -> CVec5 {
        let mut out = self.0;
        for (o, r) in out.iter_mut().zip(rhs.0) {
            *o += r;
        }
        CVec5(out)
    }
}

impl Sub for CVec5 {
    type Output = CVec5;
    fn sub(self, rhs: CVec5) -> CVec5 {
        let mut out = self.0;
        for (o, r) in out.iter_mut().zip(rhs.0) {
            *o -= r;
        }
        CVec5(out)
    }
}

impl Mul<Complex64> for CVec5 {
    type Output = CVec5;
    fn mul(self, rhs: Complex64) -> CVec5 {
        CVec5(self.0.map(|x| x * rhs))
    }
}
