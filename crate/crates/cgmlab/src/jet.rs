//! Truncated Taylor (jet) arithmetic in two chart variables `(u, v)`.
//!
//! [`Jet3`] carries the value and every partial derivative through order 3 —
//! exactly what the geometry needs: Bryant's quartic requires second
//! derivatives of `Y`, which require third derivatives of the immersion and
//! first derivatives of `H`.  Arithmetic is forward-mode on Taylor
//! *coefficients* `c_{ij} = ∂_u^i ∂_v^j f / (i! j!)`, truncated at total
//! degree 3, so products are plain convolutions and elementary functions are
//! univariate compositions — no finite differences anywhere.
//!
//! [`D1`] is the order-1 sibling used to push the whole fundamental-form
//! pipeline through one more analytic derivative (it is fed with entries of a
//! `Jet3`, e.g. the jet `(Φ_uu, Φ_uuu, Φ_uuv)`, so first derivatives of `H`,
//! `φ`, `λ` come out exactly).

use num_complex::Complex64;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Monomial exponents `(i, j)` for each coefficient slot, total degree ≤ 3.
const IJ: [(usize, usize); 10] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
];

const fn slot(i: usize, j: usize) -> usize {
    // triangular layout: degree d starts at d(d+1)/2, then ordered by j
    let d = i + j;
    d * (d + 1) / 2 + j
}

/// Order-3 two-variable jet, stored as Taylor coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet3 {
    pub c: [f64; 10],
}

impl Jet3 {
    pub fn constant(x: f64) -> Self {
        let mut c = [0.0; 10];
        c[0] = x;
        Jet3 { c }
    }

    /// The jet of the coordinate function `u` at `u = u0`.
    pub fn var_u(u0: f64) -> Self {
        let mut c = [0.0; 10];
        c[0] = u0;
        c[slot(1, 0)] = 1.0;
        Jet3 { c }
    }

    /// The jet of the coordinate function `v` at `v = v0`.
    pub fn var_v(v0: f64) -> Self {
        let mut c = [0.0; 10];
        c[0] = v0;
        c[slot(0, 1)] = 1.0;
        Jet3 { c }
    }

    /// Jet of a function of `v` alone, from `[f, f', f'', f''']`.
    pub fn from_v_derivs(d: [f64; 4]) -> Self {
        let mut c = [0.0; 10];
        c[0] = d[0];
        c[slot(0, 1)] = d[1];
        c[slot(0, 2)] = d[2] / 2.0;
        c[slot(0, 3)] = d[3] / 6.0;
        Jet3 { c }
    }

    /// Jet of a function of `u` alone, from `[f, f', f'', f''']`.
    pub fn from_u_derivs(d: [f64; 4]) -> Self {
        let mut c = [0.0; 10];
        c[0] = d[0];
        c[slot(1, 0)] = d[1];
        c[slot(2, 0)] = d[2] / 2.0;
        c[slot(3, 0)] = d[3] / 6.0;
        Jet3 { c }
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }
    pub fn du(&self) -> f64 {
        self.c[slot(1, 0)]
    }
    pub fn dv(&self) -> f64 {
        self.c[slot(0, 1)]
    }
    pub fn duu(&self) -> f64 {
        2.0 * self.c[slot(2, 0)]
    }
    pub fn duv(&self) -> f64 {
        self.c[slot(1, 1)]
    }
    pub fn dvv(&self) -> f64 {
        2.0 * self.c[slot(0, 2)]
    }
    pub fn duuu(&self) -> f64 {
        6.0 * self.c[slot(3, 0)]
    }
    pub fn duuv(&self) -> f64 {
        2.0 * self.c[slot(2, 1)]
    }
    pub fn duvv(&self) -> f64 {
        2.0 * self.c[slot(1, 2)]
    }
    pub fn dvvv(&self) -> f64 {
        6.0 * self.c[slot(0, 3)]
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|x| x.is_finite())
    }

    pub fn scale(&self, s: f64) -> Jet3 {
        let mut c = self.c;
        for x in c.iter_mut() {
            *x *= s;
        }
        Jet3 { c }
    }

    /// Compose with a univariate function given its derivatives
    /// `d = [f, f', f'', f''']` at `self.value()`:
    /// `f(g) = f + f'·w + f''·w²/2 + f'''·w³/6` with `w = g − g(0)` nilpotent.
    pub fn compose(&self, d: [f64; 4]) -> Jet3 {
        let mut w = *self;
        w.c[0] = 0.0;
        let w2 = w * w;
        let w3 = w2 * w;
        let mut out = w.scale(d[1]) + w2.scale(d[2] / 2.0) + w3.scale(d[3] / 6.0);
        out.c[0] += d[0];
        out
    }

    pub fn recip(&self) -> Jet3 {
        let x = self.c[0];
        self.compose([1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x), -6.0 / (x * x * x * x)])
    }

    pub fn sqrt(&self) -> Jet3 {
        let x = self.c[0];
        let s = x.sqrt();
        self.compose([s, 0.5 / s, -0.25 / (s * x), 0.375 / (s * x * x)])
    }

    pub fn ln(&self) -> Jet3 {
        let x = self.c[0];
        self.compose([x.ln(), 1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x)])
    }

    pub fn exp(&self) -> Jet3 {
        let e = self.c[0].exp();
        self.compose([e, e, e, e])
    }

    pub fn sin(&self) -> Jet3 {
        let (s, c) = self.c[0].sin_cos();
        self.compose([s, c, -s, -c])
    }

    pub fn cos(&self) -> Jet3 {
        let (s, c) = self.c[0].sin_cos();
        self.compose([c, -s, -c, s])
    }

    pub fn sinh(&self) -> Jet3 {
        let (s, c) = (self.c[0].sinh(), self.c[0].cosh());
        self.compose([s, c, s, c])
    }

    pub fn cosh(&self) -> Jet3 {
        let (s, c) = (self.c[0].sinh(), self.c[0].cosh());
        self.compose([c, s, c, s])
    }

    pub fn tanh(&self) -> Jet3 {
        let t = self.c[0].tanh();
        let s2 = 1.0 - t * t; // sech²
        self.compose([t, s2, -2.0 * t * s2, s2 * (6.0 * t * t - 2.0)])
    }

    /// `atan` of the jet (any base point).
    pub fn atan(&self) -> Jet3 {
        let x = self.c[0];
        let q = 1.0 + x * x;
        self.compose([
            x.atan(),
            1.0 / q,
            -2.0 * x / (q * q),
            (6.0 * x * x - 2.0) / (q * q * q),
        ])
    }

    /// Two-argument arctangent `atan2(y, x)`; requires `(x₀, y₀) ≠ (0, 0)`.
    ///
    /// Rotate by `−θ₀` so the angle increment is `atan` of a jet with zero
    /// base value; this keeps the computation away from the branch cut of
    /// any fixed chart of the angle.
    pub fn atan2(y: &Jet3, x: &Jet3) -> Jet3 {
        let theta0 = y.c[0].atan2(x.c[0]);
        let (s, c) = theta0.sin_cos();
        let xr = *x * Jet3::constant(c) + *y * Jet3::constant(s);
        let yr = *y * Jet3::constant(c) - *x * Jet3::constant(s);
        let mut out = (yr / xr).atan();
        out.c[0] += theta0;
        out
    }

    /// Integer power; works at a zero base point for `n ≥ 0`.
    pub fn powi(&self, n: i32) -> Jet3 {
        if n < 0 {
            return self.recip().powi(-n);
        }
        let mut acc = Jet3::constant(1.0);
        let mut base = *self;
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            k >>= 1;
        }
        acc
    }
}

impl Add for Jet3 {
    type Output = Jet3;
    fn add(self, rhs: Jet3) -> Jet3 {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(rhs.c) {
            *a += b;
        }
        Jet3 { c }
    }
}

impl Sub for Jet3 {
    type Output = Jet3;
    fn sub(self, rhs: Jet3) -> Jet3 {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(rhs.c) {
            *a -= b;
        }
        Jet3 { c }
    }
}

impl Neg for Jet3 {
    type Output = Jet3;
    fn neg(self) -> Jet3 {
        Jet3 { c: self.c.map(|x| -x) }
    }
}

impl Mul for Jet3 {
    type Output = Jet3;
    fn mul(self, rhs: Jet3) -> Jet3 {
        let mut c = [0.0; 10];
        for (ka, &(ia, ja)) in IJ.iter().enumerate() {
            if self.c[ka] == 0.0 {
                continue;
            }
            for (kb, &(ib, jb)) in IJ.iter().enumerate() {
                if ia + ib + ja + jb <= 3 {
                    c[slot(ia + ib, ja + jb)] += self.c[ka] * rhs.c[kb];
                }
            }
        }
        Jet3 { c }
    }
}

impl Div for Jet3 {
    type Output = Jet3;
    fn div(self, rhs: Jet3) -> Jet3 {
        self * rhs.recip()
    }
}

/// All complex Wirtinger derivatives of a scalar jet through order 3:
/// `∂_z = (∂_u − i∂_v)/2`, `∂_z̄ = (∂_u + i∂_v)/2` applied formally.
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexDerivs {
    pub value: f64,
    pub dz: Complex64,
    pub dzb: Complex64,
    pub dzz: Complex64,
    pub dzzb: Complex64,
    pub dzbzb: Complex64,
    pub dzzz: Complex64,
    pub dzzzb: Complex64,
    pub dzzbzb: Complex64,
    pub dzbzbzb: Complex64,
}

/// Complex Wirtinger derivatives of a real jet.
pub fn complex_derivatives(j: &Jet3) -> ComplexDerivs {
    let i = Complex64::new(0.0, 1.0);
    let (fu, fv) = (j.du(), j.dv());
    let (fuu, fuv, fvv) = (j.duu(), j.duv(), j.dvv());
    let (fuuu, fuuv, fuvv, fvvv) = (j.duuu(), j.duuv(), j.duvv(), j.dvvv());
    let dz = (Complex64::from(fu) - i * fv) * 0.5;
    let dzb = (Complex64::from(fu) + i * fv) * 0.5;
    let dzz = (Complex64::from(fuu - fvv) - i * (2.0 * fuv)) * 0.25;
    let dzzb = Complex64::from((fuu + fvv) * 0.25);
    let dzbzb = dzz.conj();
    let dzzz = (Complex64::from(fuuu - 3.0 * fuvv) - i * (3.0 * fuuv - fvvv)) * 0.125;
    let dzzzb = (Complex64::from(fuuu + fuvv) - i * (fuuv + fvvv)) * 0.125;
    let dzzbzb = dzzzb.conj();
    let dzbzbzb = dzzz.conj();
    ComplexDerivs {
        value: j.value(),
        dz,
        dzb,
        dzz,
        dzzb,
        dzbzb,
        dzzz,
        dzzzb,
        dzzbzb,
        dzbzbzb,
    }
}

// ---------------------------------------------------------------------------
// Order-1 jets for the analytic fundamental-form pipeline.
// ---------------------------------------------------------------------------

/// Value plus first partials — the scalar type the fundamental-form pipeline
/// runs in so that `H`, `λ`, `φ` come out with exact first derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct D1 {
    pub v: f64,
    pub du: f64,
    pub dv: f64,
}

impl D1 {
    pub fn constant(x: f64) -> D1 {
        D1 { v: x, du: 0.0, dv: 0.0 }
    }

    pub fn sqrt(self) -> D1 {
        let s = self.v.sqrt();
        let d = 0.5 / s;
        D1 { v: s, du: d * self.du, dv: d * self.dv }
    }

    pub fn recip(self) -> D1 {
        let d = -1.0 / (self.v * self.v);
        D1 { v: 1.0 / self.v, du: d * self.du, dv: d * self.dv }
    }

    pub fn ln(self) -> D1 {
        let d = 1.0 / self.v;
        D1 { v: self.v.ln(), du: d * self.du, dv: d * self.dv }
    }

    pub fn scale(self, s: f64) -> D1 {
        D1 { v: self.v * s, du: self.du * s, dv: self.dv * s }
    }

    /// `∂_z` of the carried scalar.
    pub fn dz(&self) -> Complex64 {
        Complex64::new(self.du, -self.dv) * 0.5
    }

    /// `∂_z̄` of the carried scalar.
    pub fn dzb(&self) -> Complex64 {
        Complex64::new(self.du, self.dv) * 0.5
    }
}

impl Add for D1 {
    type Output = D1;
    fn add(self, r: D1) -> D1 {
        D1 { v: self.v + r.v, du: self.du + r.du, dv: self.dv + r.dv }
    }
}

impl Sub for D1 {
    type Output = D1;
    fn sub(self, r: D1) -> D1 {
        D1 { v: self.v - r.v, du: self.du - r.du, dv: self.dv - r.dv }
    }
}

impl Neg for D1 {
    type Output = D1;
    fn neg(self) -> D1 {
        D1 { v: -self.v, du: -self.du, dv: -self.dv }
    }
}

impl Mul for D1 {
    type Output = D1;
    fn mul(self, r: D1) -> D1 {
        D1 {
            v: self.v * r.v,
            du: self.du * r.v + self.v * r.du,
            dv: self.dv * r.v + self.v * r.dv,
        }
    }
}

impl Div for D1 {
    type Output = D1;
    fn div(self, r: D1) -> D1 {
        self * r.recip()
    }
}

impl Jet3 {
    /// First-order jet of the value: `(f, f_u, f_v)`.
    pub fn d1(&self) -> D1 {
        D1 { v: self.value(), du: self.du(), dv: self.dv() }
    }
    /// First-order jet of `f_u`: `(f_u, f_uu, f_uv)`.
    pub fn d1_u(&self) -> D1 {
        D1 { v: self.du(), du: self.duu(), dv: self.duv() }
    }
    /// First-order jet of `f_v`.
    pub fn d1_v(&self) -> D1 {
        D1 { v: self.dv(), du: self.duv(), dv: self.dvv() }
    }
    /// First-order jet of `f_uu` (consumes third-order slots).
    pub fn d1_uu(&self) -> D1 {
        D1 { v: self.duu(), du: self.duuu(), dv: self.duuv() }
    }
    pub fn d1_uv(&self) -> D1 {
        D1 { v: self.duv(), du: self.duuv(), dv: self.duvv() }
    }
    pub fn d1_vv(&self) -> D1 {
        D1 { v: self.dvv(), du: self.duvv(), dv: self.dvvv() }
    }
}

/// Complex-valued order-1 jet (value and first partials of a complex scalar).
#[derive(Debug, Clone, Copy, Default)]
pub struct CD1 {
    pub v: Complex64,
    pub du: Complex64,
    pub dv: Complex64,
}

impl CD1 {
    pub fn from_re_im(re: D1, im: D1) -> CD1 {
        CD1 {
            v: Complex64::new(re.v, im.v),
            du: Complex64::new(re.du, im.du),
            dv: Complex64::new(re.dv, im.dv),
        }
    }

    pub fn dz(&self) -> Complex64 {
        (self.du - Complex64::new(0.0, 1.0) * self.dv) * 0.5
    }

    pub fn dzb(&self) -> Complex64 {
        (self.du + Complex64::new(0.0, 1.0) * self.dv) * 0.5
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn eval(f: impl Fn(Jet3, Jet3) -> Jet3, u: f64, v: f64) -> Jet3 {
        f(Jet3::var_u(u), Jet3::var_v(v))
    }

    #[test]
    fn product_rule_example() {
        // u*v at (2,3): value 6, ∂u = 3, ∂v = 2, ∂uv = 1, others 0
        let j = eval(|u, v| u * v, 2.0, 3.0);
        assert_eq!(j.value(), 6.0);
        assert_eq!(j.du(), 3.0);
        assert_eq!(j.dv(), 2.0);
        assert_eq!(j.duv(), 1.0);
        assert_eq!(j.duu(), 0.0);
        assert_eq!(j.duuv(), 0.0);
    }

    #[test]
    fn sine_jet() {
        let j = eval(|u, _| u.sin(), 0.0, 0.0);
        assert_eq!(j.value(), 0.0);
        assert_eq!(j.du(), 1.0);
        assert_eq!(j.duu(), 0.0);
        assert_eq!(j.duuu(), -1.0);
    }

    /// Finite-difference oracle: all ten derivatives of a messy composite
    /// must match second-order central differences with O(h²) error.
    #[test]
    fn finite_difference_oracle() {
        let f = |u: f64, v: f64| (u * v).sin() * (0.3 * u - v).exp() + (2.0 + u.cosh()).ln();
        let jf = |u: Jet3, v: Jet3| {
            (u * v).sin() * (u.scale(0.3) - v).exp() + (Jet3::constant(2.0) + u.cosh()).ln()
        };
        let (u0, v0) = (0.7, -0.4);
        let j = eval(jf, u0, v0);
        let h = 1e-4;
        let fd_u = (f(u0 + h, v0) - f(u0 - h, v0)) / (2.0 * h);
        let fd_uu = (f(u0 + h, v0) - 2.0 * f(u0, v0) + f(u0 - h, v0)) / (h * h);
        let fd_uv = (f(u0 + h, v0 + h) - f(u0 + h, v0 - h) - f(u0 - h, v0 + h)
            + f(u0 - h, v0 - h))
            / (4.0 * h * h);
        // wider step for the third derivative: the 2h³ denominator amplifies
        // rounding noise at h = 1e-4 beyond the comparison tolerance
        let h3 = 1e-3;
        let fd_uuu = (f(u0 + 2.0 * h3, v0) - 2.0 * f(u0 + h3, v0) + 2.0 * f(u0 - h3, v0)
            - f(u0 - 2.0 * h3, v0))
            / (2.0 * h3 * h3 * h3);
        assert_relative_eq!(j.value(), f(u0, v0), max_relative = 1e-14);
        assert_relative_eq!(j.du(), fd_u, max_relative = 1e-7);
        assert_relative_eq!(j.duu(), fd_uu, max_relative = 1e-5);
        assert_relative_eq!(j.duv(), fd_uv, max_relative = 1e-5);
        assert_relative_eq!(j.duuu(), fd_uuu, max_relative = 1e-3);
    }

    #[test]
    fn atan2_matches_atan_and_handles_quadrants() {
        for &(x0, y0) in &[(1.0, 0.3), (-0.8, 0.4), (-0.5, -1.2), (0.2, -0.9)] {
            let j = Jet3::atan2(&Jet3::var_v(y0), &Jet3::var_u(x0));
            assert_relative_eq!(j.value(), y0.atan2(x0), max_relative = 1e-14);
            // d/dx atan2(y, x) = -y/(x²+y²), d/dy = x/(x²+y²)
            let r2 = x0 * x0 + y0 * y0;
            assert_relative_eq!(j.du(), -y0 / r2, max_relative = 1e-12);
            assert_relative_eq!(j.dv(), x0 / r2, max_relative = 1e-12);
        }
    }

    #[test]
    fn wirtinger_of_holomorphic_z_cubed() {
        // f = Re((u+iv)³) = u³ − 3uv²: ∂z̄ f = 0-part tested via dzzb etc.
        let j = eval(|u, v| u.powi(3) - u.scale(3.0) * v.powi(2), 0.6, -0.3);
        let cd = complex_derivatives(&j);
        // ∂z Re z³ = 3z²/2 (since Re z³ = (z³ + z̄³)/2)
        let z = Complex64::new(0.6, -0.3);
        assert!((cd.dz - 1.5 * z * z).norm() < 1e-13);
        assert!(cd.dzzb.norm() < 1e-13, "harmonic ⇒ ∂²zz̄ = 0");
        assert!((cd.dzz - 3.0 * z).norm() < 1e-13);
        assert!((cd.dzzz - Complex64::from(3.0)).norm() < 1e-13);
    }

    #[test]
    fn laplacian_quarter() {
        // f = u² + v²: ∂²zz̄ = Δf/4 = 1; ∂²zz = 0
        let j = eval(|u, v| u.powi(2) + v.powi(2), 0.2, 0.9);
        let cd = complex_derivatives(&j);
        assert!((cd.dzzb - Complex64::from(1.0)).norm() < 1e-14);
        assert!(cd.dzz.norm() < 1e-14);
        // and f = u² − v² is holomorphic-harmonic: ∂²zz = 1, ∂²zz̄ = 0
        let j = eval(|u, v| u.powi(2) - v.powi(2), 0.2, 0.9);
        let cd = complex_derivatives(&j);
        assert!((cd.dzz - Complex64::from(1.0)).norm() < 1e-14);
        assert!(cd.dzzb.norm() < 1e-14);
    }

    #[test]
    fn d1_pipeline_consistency() {
        // D1 of derived slots agrees with Jet3 entries
        let j = eval(|u, v| (u * v).sin() * u.exp(), 0.3, 1.1);
        let d = j.d1_uu();
        assert_relative_eq!(d.v, j.duu(), max_relative = 1e-14);
        assert_relative_eq!(d.du, j.duuu(), max_relative = 1e-14);
        assert_relative_eq!(d.dv, j.duuv(), max_relative = 1e-14);
    }
}
