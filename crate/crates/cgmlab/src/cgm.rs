//! The conformal Gauss map `Y : Σ → S^{3,1}`, Bryant's quartic, curvatures
//! of the induced metric `g_Y = e^{2ρ} g` and every structure-equation
//! residual.
//!
//! Differentiation strategy: `Y` and `Y_z` come out of the order-1 jet
//! pipeline analytically (no discretization), because `H`, `λ`, `φ` and the
//! normal all carry exact first partials.  Only the *second-level*
//! derivatives — `Y_zz`, `Y_zz̄`, `φ_zz̄`, `ρ_zz̄`, `∂_z̄ Q` — are taken with
//! fourth-order five-point stencils applied to those analytic point
//! functions, so every residual floor is `O(h⁴)` on smooth data.
//!
//! Key identities (verified as tests and exported as residuals):
//!
//! * harmonicity `Y_zz̄ = −(e^{2ρ}/2) Y` for Willmore surfaces;
//! * conformality `η(Y_z, Y_z) = 0` and `2η(Y_z, Ȳ_z) = e^{2ρ}`;
//! * Bryant's quartic `Q = η(Y_zz, Y_zz)` equals
//!   `(φ_zz̄ φ − φ_z φ_z̄) e^{−2λ} + φ² H²/4` (R³; `H²+1` in S³);
//! * away from umbilics `4Q (φ e^{−λ})^{−2} e^{−2ρ} = 1 − K_Y + i K_Y^⊥`,
//!   with `K_Y = −4ρ_zz̄ e^{−2ρ}`, `ρ = log(|φ| e^{−λ})`.

use crate::fundamental::{self, FundamentalData};
use crate::jet::D1;
use crate::minkowski::{eta_dot_c, CVec5, Vec5};
use crate::numerics::{cdiff1_4, diff2_4};
use crate::surfaces::{Ambient, Chart, JetVec};
use crate::{Error, Result};
use num_complex::Complex64;

/// The conformal Gauss map and its exact first derivatives at one point.
#[derive(Debug, Clone)]
pub struct ConformalFrame {
    pub y: Vec5,
    /// `∂_z Y` (exact)
    pub yz: CVec5,
    /// the null-cone lift `ν` of the surface point
    pub nu: Vec5,
    /// `e^{2ρ} = |φ|² e^{−2λ}` (conformal factor of `g_Y` over the flat chart metric)
    pub e2rho: f64,
    pub h: f64,
    pub lambda: f64,
    pub phi: Complex64,
}

fn d1_parts(d: &D1) -> [f64; 3] {
    [d.v, d.du, d.dv]
}

/// `Y` with exact first partials, as five `D1` scalars.
fn y_components(fd: &FundamentalData, jet: &JetVec) -> [D1; 5] {
    let dim = fd.ambient.dim();
    let pos: Vec<D1> = (0..dim).map(|k| jet[k].d1()).collect();
    match fd.ambient {
        Ambient::R3 => {
            // Y = H (Φ, (|Φ|²−1)/2, (|Φ|²+1)/2) + (n, ⟨n,Φ⟩, ⟨n,Φ⟩)
            let mut q = D1::constant(0.0);
            let mut ndotp = D1::constant(0.0);
            for k in 0..3 {
                q = q + pos[k] * pos[k];
                ndotp = ndotp + fd.normal[k] * pos[k];
            }
            let half = q.scale(0.5);
            [
                fd.h * pos[0] + fd.normal[0],
                fd.h * pos[1] + fd.normal[1],
                fd.h * pos[2] + fd.normal[2],
                fd.h * (half - D1::constant(0.5)) + ndotp,
                fd.h * (half + D1::constant(0.5)) + ndotp,
            ]
        }
        Ambient::S3 => {
            // Y = H (Ψ, 1) + (N, 0)
            [
                fd.h * pos[0] + fd.normal[0],
                fd.h * pos[1] + fd.normal[1],
                fd.h * pos[2] + fd.normal[2],
                fd.h * pos[3] + fd.normal[3],
                fd.h,
            ]
        }
    }
}

/// Assemble the conformal Gauss map frame from the fundamental data and the
/// immersion jet at the same point.
pub fn conformal_frame(fd: &FundamentalData, jet: &JetVec) -> ConformalFrame {
    let yc = y_components(fd, jet);
    let mut y = Vec5::zeros();
    let mut yu = Vec5::zeros();
    let mut yv = Vec5::zeros();
    for (k, d) in yc.iter().enumerate() {
        let [v, du, dv] = d1_parts(d);
        y.0[k] = v;
        yu.0[k] = du;
        yv.0[k] = dv;
    }
    let i = Complex64::new(0.0, 1.0);
    let mut yz = CVec5::default();
    for k in 0..5 {
        yz.0[k] = (Complex64::from(yu.0[k]) - i * yv.0[k]) * 0.5;
    }
    let dim = fd.ambient.dim();
    let pos: Vec<D1> = (0..dim).map(|k| jet[k].d1()).collect();
    let nu = fd.nu(&pos)[0];
    ConformalFrame {
        y,
        yz,
        nu,
        e2rho: fd.phi.v.norm_sqr() * (-2.0 * fd.lambda.v).exp(),
        h: fd.h.v,
        lambda: fd.lambda.v,
        phi: fd.phi.v,
    }
}

/// Point-probe for second-level (stencil) derivatives over one chart.
pub struct Probe<'a> {
    pub ambient: Ambient,
    pub chart: &'a Chart,
    /// stencil step (chart units)
    pub h: f64,
}

impl<'a> Probe<'a> {
    pub fn new(ambient: Ambient, chart: &'a Chart, h: f64) -> Probe<'a> {
        Probe { ambient, chart, h }
    }

    pub fn for_surface(s: &'a crate::surfaces::SurfaceSpec, h: f64) -> Probe<'a> {
        Probe::new(s.ambient, s.main_chart(), h)
    }

    pub fn fd(&self, u: f64, v: f64) -> Result<FundamentalData> {
        fundamental::fundamental(self.ambient, &self.chart.eval(u, v)?, u, v)
    }

    pub fn frame(&self, u: f64, v: f64) -> Result<ConformalFrame> {
        let jet = self.chart.eval(u, v)?;
        let fd = fundamental::fundamental(self.ambient, &jet, u, v)?;
        Ok(conformal_frame(&fd, &jet))
    }

    /// Error unless the full 5-point cross around `(u, v)` lies inside the
    /// chart (periodic axes always do).
    pub fn check_stencil(&self, u: f64, v: f64) -> Result<()> {
        let d = &self.chart.domain;
        let r = 2.0 * self.h;
        let ok_u = d.periodic_u || (u - r >= d.u0 && u + r <= d.u1);
        let ok_v = d.periodic_v || (v - r >= d.v0 && v + r <= d.v1);
        if ok_u && ok_v {
            Ok(())
        } else {
            Err(Error::StencilOutOfChart { u, v, halfwidth: r })
        }
    }

    /// `∂_z̄` (or `∂_z` with `conjugate = false`) of an analytic complex
    /// point function, by five-point stencils along both axes.
    fn wirtinger<F>(&self, f: F, u: f64, v: f64, zbar: bool) -> Result<Complex64>
    where
        F: Fn(f64, f64) -> Result<Complex64>,
    {
        let h = self.h;
        let su: [Complex64; 5] = crate::numerics::sample5(u, h, |x| f(x, v))?;
        let sv: [Complex64; 5] = crate::numerics::sample5(v, h, |x| f(u, x))?;
        let fu = cdiff1_4(&su, h);
        let fv = cdiff1_4(&sv, h);
        let i = Complex64::new(0.0, 1.0);
        Ok(if zbar { (fu + i * fv) * 0.5 } else { (fu - i * fv) * 0.5 })
    }

    /// Second Wirtinger derivatives of the analytic field `Y_z`:
    /// `(Y_zz, Y_zz̄)`.
    fn yz_derivatives(&self, u: f64, v: f64) -> Result<(CVec5, CVec5)> {
        let h = self.h;
        let su: [CVec5; 5] = crate::numerics::sample5(u, h, |x| Ok(self.frame(x, v)?.yz))?;
        let sv: [CVec5; 5] = crate::numerics::sample5(v, h, |x| Ok(self.frame(u, x)?.yz))?;
        let i = Complex64::new(0.0, 1.0);
        let mut yzz = CVec5::default();
        let mut yzzb = CVec5::default();
        for k in 0..5 {
            let du = cdiff1_4(&[su[0].0[k], su[1].0[k], su[2].0[k], su[3].0[k], su[4].0[k]], h);
            let dv = cdiff1_4(&[sv[0].0[k], sv[1].0[k], sv[2].0[k], sv[3].0[k], sv[4].0[k]], h);
            yzz.0[k] = (du - i * dv) * 0.5;
            yzzb.0[k] = (du + i * dv) * 0.5;
        }
        Ok((yzz, yzzb))
    }
}

/// Bryant's quartic by both routes.
#[derive(Debug, Clone, Copy)]
pub struct BryantQuartic {
    /// explicit-formula route (primary)
    pub q: Complex64,
    /// frame route `η(Y_zz, Y_zz)`
    pub q_frame: Complex64,
    /// `|q − q_frame|`
    pub route_disagreement: f64,
}

/// Bryant's quartic coefficient at `(u, v)`: primary value from the explicit
/// formula `(φ_zz̄ φ − φ_z φ_z̄) e^{−2λ} + φ²(H² + κ)/4` (`κ = 0` in R³,
/// `1` in S³), cross-checked against `η(Y_zz, Y_zz)`.
pub fn bryant_quartic(p: &Probe, u: f64, v: f64) -> Result<BryantQuartic> {
    p.check_stencil(u, v)?;
    let fd = p.fd(u, v)?;
    let phi_zzb = p.wirtinger(|a, b| Ok(p.fd(a, b)?.phi_z()), u, v, true)?;
    let kappa = match p.ambient {
        Ambient::R3 => 0.0,
        Ambient::S3 => 1.0,
    };
    let q = (phi_zzb * fd.phi.v - fd.phi_z() * fd.phi_zb()) * (-2.0 * fd.lambda.v).exp()
        + fd.phi.v * fd.phi.v * (fd.h.v * fd.h.v + kappa) * 0.25;
    let (yzz, _) = p.yz_derivatives(u, v)?;
    let q_frame = eta_dot_c(&yzz, &yzz);
    let route_disagreement = (q - q_frame).norm();
    let scale = 1.0 + q.norm();
    if route_disagreement > 1e-5 * scale {
        return Err(Error::IllConditioned(format!(
            "Bryant quartic routes disagree by {route_disagreement:.3e} at ({u:.4}, {v:.4})"
        )));
    }
    Ok(BryantQuartic { q, q_frame, route_disagreement })
}

/// Curvatures of `g_Y` and the structure-equation residuals at one point.
#[derive(Debug, Clone, Copy)]
pub struct CurvatureField {
    pub ky: f64,
    pub kyperp: f64,
    /// `4Q (φ e^{−λ})^{−2} e^{−2ρ}`, equal to `1 − K_Y + i K_Y^⊥`
    pub one_minus_ky_plus_ikyperp: Complex64,
    pub e2rho: f64,
    pub residuals: Residuals,
}

/// Pointwise residuals of the structure equations (all should vanish for
/// Willmore surfaces; Gauss–Codazzi vanishes for every immersion).
#[derive(Debug, Clone, Copy, Default)]
pub struct Residuals {
    /// `|Y_zz̄ + (e^{2ρ}/2) Y|` (euclidean norm)
    pub harmonicity: f64,
    /// `|∂_z̄ φ − e^{2λ} ∂_z H|`
    pub gauss_codazzi: f64,
    /// `|∂_z̄ Q|`
    pub q_holomorphy: f64,
    /// `|2ρ_zz̄ − 2Re(Q(φe^{−λ})^{−2}) + e^{2ρ}/2|`
    pub gauss_eq: f64,
    /// `|Im ∂_z̄(φ_z/φ) − Im(Q(φe^{−λ})^{−2})|`
    pub ricci_eq: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.harmonicity
            .max(self.gauss_codazzi)
            .max(self.q_holomorphy)
            .max(self.gauss_eq)
            .max(self.ricci_eq)
    }
}

/// Median of `|φ| e^{−λ}` over a coarse grid; the umbilic mask floor is
/// `1e-6` times this.
pub fn umbilic_floor(p: &Probe) -> Result<f64> {
    let d = &p.chart.domain;
    let n = 32;
    let mut vals = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let u = d.u0 + (i as f64 + 0.5) / n as f64 * d.width();
            let v = d.v0 + (j as f64 + 0.5) / n as f64 * d.height();
            if p.chart.punctures.iter().any(|&(a, b)| (u - a).hypot(v - b) < 0.05 * d.width()) {
                continue;
            }
            let fd = p.fd(u, v)?;
            vals.push(fd.phi.v.norm() * (-fd.lambda.v).exp());
        }
    }
    vals.sort_by(|a, b| a.total_cmp(b));
    Ok(1e-6 * vals[vals.len() / 2])
}

/// Cheap evaluation of `(K_Y, e^{2ρ})` alone (one ρ-stencil, no quartic):
/// the workhorse of the Gauss–Bonnet sweeps.
pub fn ky_e2rho(p: &Probe, u: f64, v: f64, floor: f64) -> Result<(f64, f64)> {
    p.check_stencil(u, v)?;
    let fd = p.fd(u, v)?;
    let value = fd.phi.v.norm() * (-fd.lambda.v).exp();
    if value < floor {
        return Err(Error::UmbilicProximity { value, floor });
    }
    let e2rho = value * value;
    let rho_of = |a: f64, b: f64| -> Result<f64> {
        let f = p.fd(a, b)?;
        Ok(f.phi.v.norm().ln() - f.lambda.v)
    };
    let h = p.h;
    let su: [f64; 5] = crate::numerics::sample5(u, h, |x| rho_of(x, v))?;
    let sv: [f64; 5] = crate::numerics::sample5(v, h, |x| rho_of(u, x))?;
    let rho_zzb = (diff2_4(&su, h) + diff2_4(&sv, h)) * 0.25;
    Ok((-4.0 * rho_zzb / e2rho, e2rho))
}

/// Full curvature/residual evaluation at `(u, v)`.  `floor` is the umbilic
/// mask threshold on `|φ| e^{−λ}` (see [`umbilic_floor`]).
pub fn curvature_fields(p: &Probe, u: f64, v: f64, floor: f64) -> Result<CurvatureField> {
    p.check_stencil(u, v)?;
    let fd = p.fd(u, v)?;
    let value = fd.phi.v.norm() * (-fd.lambda.v).exp();
    if value < floor {
        return Err(Error::UmbilicProximity { value, floor });
    }
    let frame = conformal_frame(&fd, &p.chart.eval(u, v)?);
    let e2rho = frame.e2rho;

    // ρ_zz̄ = Δρ/4 with ρ = log|φ| − λ, by five-point second differences
    let rho_of = |a: f64, b: f64| -> Result<f64> {
        let f = p.fd(a, b)?;
        Ok(f.phi.v.norm().ln() - f.lambda.v)
    };
    let h = p.h;
    let su: [f64; 5] = crate::numerics::sample5(u, h, |x| rho_of(x, v))?;
    let sv: [f64; 5] = crate::numerics::sample5(v, h, |x| rho_of(u, x))?;
    let rho_zzb = (diff2_4(&su, h) + diff2_4(&sv, h)) * 0.25;
    let ky = -4.0 * rho_zzb / e2rho;

    let quartic = bryant_quartic(p, u, v)?;
    // Q (φ e^{−λ})^{−2} = Q e^{2λ} / φ²
    let qw = quartic.q * (2.0 * fd.lambda.v).exp() / (fd.phi.v * fd.phi.v);
    let w = 4.0 * qw / e2rho;
    let kyperp = w.im;

    // Ricci: ψ_zz̄ = Im ∂_z̄ (φ_z/φ), branch-cut free
    let psi_zzb = p
        .wirtinger(
            |a, b| {
                let f = p.fd(a, b)?;
                Ok(f.phi_z() / f.phi.v)
            },
            u,
            v,
            true,
        )?
        .im;

    // ∂_z̄ Q by an outer stencil over the explicit-formula route
    let dq = p.wirtinger(|a, b| Ok(bryant_quartic(p, a, b)?.q), u, v, true)?;

    let (_, yzzb) = p.yz_derivatives(u, v)?;
    let mut harm = yzzb;
    for k in 0..5 {
        harm.0[k] += Complex64::from(0.5 * e2rho * frame.y.0[k]);
    }

    Ok(CurvatureField {
        ky,
        kyperp,
        one_minus_ky_plus_ikyperp: w,
        e2rho,
        residuals: Residuals {
            harmonicity: harm.norm_euclid(),
            gauss_codazzi: fd.gauss_codazzi_residual(),
            q_holomorphy: dq.norm(),
            gauss_eq: (2.0 * rho_zzb - 2.0 * qw.re + 0.5 * e2rho).abs(),
            ricci_eq: (psi_zzb - qw.im).abs(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minkowski::eta_dot;
    use crate::surfaces;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn frame_at(s: &surfaces::SurfaceSpec, u: f64, v: f64) -> ConformalFrame {
        Probe::for_surface(s, 1e-3).frame(u, v).unwrap()
    }

    #[test]
    fn plane_maps_to_a_constant_point() {
        let s = surfaces::from_json(
            r#"{"ambient": "R3",
                "domain": {"u0": -1, "u1": 1, "v0": -1, "v1": 1,
                           "periodic_u": false, "periodic_v": false},
                "components": ["u", "v", "0"],
                "euler_characteristic": 1}"#,
        )
        .unwrap();
        let f = frame_at(&s, 0.3, -0.2);
        assert_eq!(f.y.0, [0.0, 0.0, 1.0, 0.0, 0.0]);
        assert_eq!(f.yz.norm_euclid(), 0.0);
    }

    #[test]
    fn unit_sphere_maps_to_the_point_representing_it() {
        let s = surfaces::sphere(1.0).unwrap();
        for &(u, v) in &[(0.0, 0.0), (2.0, 1.3)] {
            let f = frame_at(&s, u, v);
            // constant map: the de Sitter point of the unit sphere itself
            for (k, want) in [0.0, 0.0, 0.0, -1.0, 0.0].iter().enumerate() {
                assert_relative_eq!(f.y.0[k], want, epsilon = 1e-12);
            }
            assert_relative_eq!(f.y.0[4] - f.y.0[3], f.h, epsilon = 1e-12);
            assert!(f.e2rho < 1e-20);
        }
    }

    #[test]
    fn frame_invariants_across_the_catalog() {
        let list = vec![
            surfaces::sphere(1.0).unwrap(),
            surfaces::clifford(),
            surfaces::torus_rev(2.0, 1.0).unwrap(),
            surfaces::torus_rev_s3(2.0, 1.0).unwrap(),
            surfaces::inverted_catenoid(1.0).unwrap(),
            surfaces::bb_annulus(1.0, 1.0, 1.0).unwrap(),
        ];
        for s in &list {
            for &(fu, fv) in &[(0.27, 0.61), (0.83, 0.12), (0.49, 0.95)] {
                let d = &s.main_chart().domain;
                let (u, v) = (d.u0 + fu * d.width(), d.v0 + fv * d.height());
                let f = frame_at(s, u, v);
                assert!((eta_dot(&f.y, &f.y) - 1.0).abs() < 1e-9, "{}: |Y|² ≠ 1", s.name);
                assert!(eta_dot(&f.y, &f.nu).abs() < 1e-9, "{}: η(Y,ν) ≠ 0", s.name);
                let yz2 = eta_dot_c(&f.yz, &f.yz);
                assert!(yz2.norm() < 1e-9, "{}: η(Yz,Yz) = {yz2}", s.name);
                let gy = 2.0 * eta_dot_c(&f.yz, &f.yz.conj());
                assert!(
                    (gy.re - f.e2rho).abs() < 1e-9 * (1.0 + f.e2rho) && gy.im.abs() < 1e-12,
                    "{}: 2η(Yz,Ȳz) = {gy} vs e2rho = {}",
                    s.name,
                    f.e2rho
                );
                // H = Y₅ − Y₄ in the R³ presentation
                if s.ambient == Ambient::R3 {
                    assert_relative_eq!(f.y.0[4] - f.y.0[3], f.h, epsilon = 1e-11);
                }
            }
        }
    }

    #[test]
    fn clifford_frame_is_the_normal_with_matching_conformal_factor() {
        let s = surfaces::clifford();
        let f = frame_at(&s, 1.1, 0.4);
        // H = 0 ⇒ Y = (N, 0)
        assert!(f.y.0[4].abs() < 1e-12);
        assert_relative_eq!(f.e2rho, 0.5, max_relative = 1e-10);
    }

    #[test]
    fn stereographic_and_s3_frames_agree() {
        let r3 = surfaces::torus_rev(2.0_f64.sqrt(), 1.0).unwrap();
        let s3 = surfaces::torus_rev_s3(2.0_f64.sqrt(), 1.0).unwrap();
        for &(u, v) in &[(0.3, 0.5), (2.0, 1.7)] {
            let a = frame_at(&r3, u, v);
            let b = frame_at(&s3, u, v);
            for k in 0..5 {
                assert_relative_eq!(a.y.0[k], b.y.0[k], epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn quartic_vanishes_on_the_inverted_catenoid() {
        let s = surfaces::inverted_catenoid(1.0).unwrap();
        let p = Probe::for_surface(&s, 1e-3);
        for &(u, v) in &[(0.5, 0.3), (2.0, -1.2), (4.0, 2.5)] {
            let q = bryant_quartic(&p, u, v).unwrap();
            assert!(q.q.norm() < 1e-7, "Q = {} at ({u}, {v})", q.q);
        }
    }

    #[test]
    fn quartic_of_clifford_is_phi_squared_over_four() {
        let s = surfaces::clifford();
        let p = Probe::for_surface(&s, 1e-3);
        for &(u, v) in &[(0.7, 0.2), (3.0, 4.0)] {
            let fd = p.fd(u, v).unwrap();
            let q = bryant_quartic(&p, u, v).unwrap();
            let want = fd.phi.v * fd.phi.v * 0.25;
            assert!((q.q - want).norm() < 1e-8, "Q = {} vs φ²/4 = {want}", q.q);
            assert!(q.route_disagreement < 1e-8);
        }
    }

    #[test]
    fn quartic_of_bb_annulus_matches_hyperbolic_half_formula() {
        // away from the crossing circle, Q = −φ²/(4 z²) with z = Φ³
        let s = surfaces::bb_annulus(1.0, 1.0, 1.0).unwrap();
        let p = Probe::for_surface(&s, 1e-3);
        for &(u, v) in &[(0.4, 0.5), (2.0, -0.6), (1.0, 0.8)] {
            let jet = s.main_chart().eval(u, v).unwrap();
            let z = jet[2].value();
            let fd = p.fd(u, v).unwrap();
            let q = bryant_quartic(&p, u, v).unwrap();
            let want = -fd.phi.v * fd.phi.v / (4.0 * z * z);
            assert!(
                (q.q - want).norm() < 1e-6 * (1.0 + want.norm()),
                "Q = {} vs −φ²/4z² = {want}",
                q.q
            );
        }
    }

    #[test]
    fn clifford_curvatures_vanish() {
        let s = surfaces::clifford();
        let p = Probe::for_surface(&s, PI / 128.0);
        let floor = umbilic_floor(&p).unwrap();
        for &(u, v) in &[(0.9, 1.8), (4.2, 0.3)] {
            let c = curvature_fields(&p, u, v, floor).unwrap();
            assert!(c.ky.abs() < 1e-6, "KY = {}", c.ky);
            assert!(c.kyperp.abs() < 1e-6, "KY⊥ = {}", c.kyperp);
            assert!(c.residuals.max() < 1e-6, "residuals {:?}", c.residuals);
        }
    }

    #[test]
    fn inverted_catenoid_has_unit_curvature() {
        let s = surfaces::inverted_catenoid(1.0).unwrap();
        let p = Probe::for_surface(&s, 1e-3);
        let floor = umbilic_floor(&p).unwrap();
        for &(u, v) in &[(0.5, 0.4), (3.0, -1.5), (1.2, 2.0)] {
            let c = curvature_fields(&p, u, v, floor).unwrap();
            assert!((c.ky - 1.0).abs() < 1e-5, "KY = {}", c.ky);
            assert!(c.kyperp.abs() < 1e-5, "KY⊥ = {}", c.kyperp);
        }
    }

    #[test]
    fn liouville_and_identity_routes_agree() {
        let list = vec![
            surfaces::inverted_catenoid(1.0).unwrap(),
            surfaces::bb_annulus(1.0, 1.0, 1.0).unwrap(),
            surfaces::clifford(),
        ];
        for s in &list {
            let p = Probe::for_surface(s, 1e-3);
            let floor = umbilic_floor(&p).unwrap();
            for &(fu, fv) in &[(0.3, 0.7), (0.62, 0.31)] {
                let d = &s.main_chart().domain;
                let (u, v) = (d.u0 + fu * d.width(), d.v0 + fv * d.height());
                let c = curvature_fields(&p, u, v, floor).unwrap();
                let ky_identity = 1.0 - c.one_minus_ky_plus_ikyperp.re;
                assert!(
                    (c.ky - ky_identity).abs() < 5e-5,
                    "{}: Liouville KY = {} vs identity {}",
                    s.name,
                    c.ky,
                    ky_identity
                );
            }
        }
    }

    #[test]
    fn willmore_residuals_small_and_non_willmore_floor() {
        // Willmore built-ins: residual max well below the non-Willmore floor
        for s in [
            surfaces::clifford(),
            surfaces::inverted_catenoid(1.0).unwrap(),
            surfaces::bb_annulus(1.0, 1.0, 1.0).unwrap(),
        ] {
            let p = Probe::for_surface(&s, 1e-3);
            let floor = umbilic_floor(&p).unwrap();
            let d = &s.main_chart().domain;
            let (u, v) = (d.u0 + 0.37 * d.width(), d.v0 + 0.58 * d.height());
            let c = curvature_fields(&p, u, v, floor).unwrap();
            assert!(c.residuals.harmonicity < 1e-6, "{}: {:?}", s.name, c.residuals);
        }
        // torus_rev(2,1) is not Willmore: harmonicity stays above 1e-3
        let s = surfaces::torus_rev(2.0, 1.0).unwrap();
        let p = Probe::for_surface(&s, 1e-3);
        let floor = umbilic_floor(&p).unwrap();
        let c = curvature_fields(&p, 1.0, 1.0, floor).unwrap();
        assert!(c.residuals.harmonicity > 1e-3, "harmonicity {}", c.residuals.harmonicity);
    }

    #[test]
    fn sphere_is_masked_as_umbilic_everywhere() {
        let s = surfaces::sphere(1.0).unwrap();
        let p = Probe::for_surface(&s, 1e-3);
        assert!(matches!(
            curvature_fields(&p, 1.0, 0.5, 1e-12),
            Err(Error::UmbilicProximity { .. })
        ));
    }

    #[test]
    fn stencil_bounds_are_enforced() {
        let s = surfaces::bb_annulus(1.0, 1.0, 1.0).unwrap();
        let p = Probe::for_surface(&s, 1e-2);
        assert!(matches!(
            p.check_stencil(1.0, 0.999),
            Err(Error::StencilOutOfChart { .. })
        ));
        assert!(p.check_stencil(1.0, 0.5).is_ok());
    }

    #[test]
    fn residuals_drop_fourth_order_under_stencil_halving() {
        let s = surfaces::inverted_catenoid(1.0).unwrap();
        let (u, v) = (1.3, 0.9);
        let mut maxima = Vec::new();
        for h in [2e-2, 1e-2] {
            let p = Probe::for_surface(&s, h);
            let floor = umbilic_floor(&p).unwrap();
            let c = curvature_fields(&p, u, v, floor).unwrap();
            maxima.push(c.residuals.max());
        }
        assert!(
            maxima[0] / maxima[1] > 3.5,
            "stencil halving ratio {} (residuals {:?})",
            maxima[0] / maxima[1],
            maxima
        );
    }
}
