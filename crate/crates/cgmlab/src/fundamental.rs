//! First and second fundamental forms and derived scalars for isothermal
//! charts into R³ and S³.
//!
//! Conventions (fixed crate-wide):
//!
//! * `g_ij = ⟨∂_iΦ, ∂_jΦ⟩`, isothermal: `g = e^{2λ}δ` with `λ = ½ log g₁₁`
//!   (asserted, not assumed);
//! * `n = ∂_uΦ × ∂_vΦ / |·|` (R³), resp. the unit normal of `T_ΨS³`
//!   completing `(Ψ, ∂_uΨ, ∂_vΨ)` (S³);
//! * `A_ij = −⟨∂_iΦ, ∂_j n⟩ = ⟨∂²_{ij}Φ, n⟩`, `H = ½ tr_g A`,
//!   `Å = A − H g`;
//! * `φ = Å₁₁ − i Å₁₂ = 2⟨∂²_{zz}Φ, n⟩`, so `|Å|²_g = 2|φ|² e^{−4λ}`.
//!
//! The whole pipeline runs in order-1 jet arithmetic ([`D1`]) fed from the
//! order-3 jet of the immersion, so `λ`, `H` and `φ` come out with *exact*
//! first partial derivatives — the Gauss–Codazzi identity
//! `∂_z̄ φ = e^{2λ} ∂_z H` then holds to rounding error, with no finite
//! differences anywhere.

use crate::jet::{CD1, D1};
use crate::minkowski::Vec5;
use crate::surfaces::{Ambient, JetVec};
use crate::{Error, Result};
use num_complex::Complex64;

/// Fundamental forms and derived scalars at one chart point.  Scalar fields
/// are order-1 jets: `.v` is the value, `.du`/`.dv` the exact partials.
#[derive(Debug, Clone)]
pub struct FundamentalData {
    /// conformal factor `λ = ½ log g₁₁`
    pub lambda: D1,
    /// `e^{2λ} = g₁₁`
    pub e2l: D1,
    /// induced metric (values)
    pub g: [[f64; 2]; 2],
    /// unit normal with exact first derivatives (3 or 4 components)
    pub normal: Vec<D1>,
    /// second fundamental form (values)
    pub a: [[f64; 2]; 2],
    /// mean curvature
    pub h: D1,
    /// traceless second fundamental form (values)
    pub aring: [[f64; 2]; 2],
    /// `φ = Å₁₁ − iÅ₁₂`
    pub phi: CD1,
    /// `2⟨∂²_{zz}Φ, n⟩`, computed independently of `phi` as a cross-check
    pub h0_coeff: Complex64,
    pub ambient: Ambient,
}

impl FundamentalData {
    /// `|Å|²_g = 2|φ|² e^{−4λ}`.
    pub fn aring_norm2(&self) -> f64 {
        2.0 * self.phi.v.norm_sqr() * (-4.0 * self.lambda.v).exp()
    }

    /// Willmore integrand weight `|Å|²_g dvol_g` per chart area element.
    pub fn aring_density(&self) -> f64 {
        2.0 * self.phi.v.norm_sqr() * (-2.0 * self.lambda.v).exp()
    }

    /// `∂_z H`, exact.
    pub fn h_z(&self) -> Complex64 {
        self.h.dz()
    }

    /// `∂_z̄ φ`, exact.
    pub fn phi_zb(&self) -> Complex64 {
        self.phi.dzb()
    }

    /// `∂_z φ`, exact.
    pub fn phi_z(&self) -> Complex64 {
        self.phi.dz()
    }

    /// Gauss–Codazzi residual `∂_z̄ φ − e^{2λ} ∂_z H`; an exact identity of
    /// any immersion, so this measures only rounding noise.
    pub fn gauss_codazzi_residual(&self) -> f64 {
        (self.phi.dzb() - Complex64::from(self.e2l.v) * self.h.dz()).norm()
    }

    /// The null-cone lift `ν` of the chart point:
    /// `(Φ, (|Φ|²−1)/2, (|Φ|²+1)/2)` in R³, `(Ψ, 1)` in S³.  Carried with
    /// exact first derivatives as columns `[ν, ∂_u ν, ∂_v ν]`.
    pub fn nu(&self, pos: &[D1]) -> [Vec5; 3] {
        let comp = |d: &D1| [d.v, d.du, d.dv];
        let mut out = [Vec5::zeros(); 3];
        match self.ambient {
            Ambient::R3 => {
                let mut q = D1::constant(0.0);
                for x in pos {
                    q = q + *x * *x;
                }
                for k in 0..3 {
                    let c = comp(&pos[k]);
                    for s in 0..3 {
                        out[s].0[k] = c[s];
                    }
                }
                // ν₄ = (|Φ|²−1)/2, ν₅ = (|Φ|²+1)/2: same derivatives,
                // values shifted by ∓1/2
                let half = comp(&q.scale(0.5));
                for s in 0..3 {
                    out[s].0[3] = half[s];
                    out[s].0[4] = half[s];
                }
                out[0].0[3] -= 0.5;
                out[0].0[4] += 0.5;
            }
            Ambient::S3 => {
                for k in 0..4 {
                    let c = comp(&pos[k]);
                    for s in 0..3 {
                        out[s].0[k] = c[s];
                    }
                }
                out[0].0[4] = 1.0;
            }
        }
        out
    }
}

fn cross3(a: &[D1; 3], b: &[D1; 3]) -> [D1; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Normal of `T_ΨS³` orthogonal to `Ψ`, `Ψ_u`, `Ψ_v`: component `a` is the
/// signed 3×3 minor of the matrix with those rows, i.e.
/// `⟨N, w⟩ = det(Ψ, Ψ_u, Ψ_v, w)` before normalization.
fn normal4(psi: &[D1; 4], pu: &[D1; 4], pv: &[D1; 4]) -> [D1; 4] {
    let det3 = |c: [usize; 3]| -> D1 {
        let m = |r: &[D1; 4], i: usize| r[c[i]];
        m(psi, 0) * (m(pu, 1) * m(pv, 2) - m(pu, 2) * m(pv, 1))
            - m(psi, 1) * (m(pu, 0) * m(pv, 2) - m(pu, 2) * m(pv, 0))
            + m(psi, 2) * (m(pu, 0) * m(pv, 1) - m(pu, 1) * m(pv, 0))
    };
    [
        -det3([1, 2, 3]),
        det3([0, 2, 3]),
        -det3([0, 1, 3]),
        det3([0, 1, 2]),
    ]
}

const ISOTHERMAL_RTOL: f64 = 1e-8;

/// Fundamental forms of an R³ chart from its order-3 jet.  `(u, v)` is the
/// evaluation point, used only for error messages.
pub fn fundamental_r3(jet: &JetVec, u: f64, v: f64) -> Result<FundamentalData> {
    if jet.len() != 3 {
        return Err(Error::InvalidParams(format!(
            "fundamental_r3 expects 3 components, got {}",
            jet.len()
        )));
    }
    let pu: [D1; 3] = std::array::from_fn(|k| jet[k].d1_u());
    let pv: [D1; 3] = std::array::from_fn(|k| jet[k].d1_v());
    let mut n = cross3(&pu, &pv);
    let mut norm2 = D1::constant(0.0);
    for x in &n {
        norm2 = norm2 + *x * *x;
    }
    let nrm = norm2.sqrt();
    for x in n.iter_mut() {
        *x = *x / nrm;
    }
    let puu: [D1; 3] = std::array::from_fn(|k| jet[k].d1_uu());
    let puv: [D1; 3] = std::array::from_fn(|k| jet[k].d1_uv());
    let pvv: [D1; 3] = std::array::from_fn(|k| jet[k].d1_vv());
    let dot = |a: &[D1; 3], b: &[D1; 3]| {
        let mut s = D1::constant(0.0);
        for k in 0..3 {
            s = s + a[k] * b[k];
        }
        s
    };
    let h0 = {
        let two_zz = |k: usize| {
            let j = &jet[k];
            Complex64::new(0.5 * (j.duu() - j.dvv()), -j.duv())
        };
        (0..3).map(|k| two_zz(k) * n[k].v).sum::<Complex64>()
    };
    assemble(
        [dot(&pu, &pu), dot(&pu, &pv), dot(&pv, &pv)],
        [dot(&puu, &n), dot(&puv, &n), dot(&pvv, &n)],
        n.to_vec(),
        h0,
        Ambient::R3,
        u,
        v,
    )
}

/// Fundamental forms of an S³ chart (`Ψ : chart → S³ ⊂ R⁴`).
pub fn fundamental_s3(jet: &JetVec, u: f64, v: f64) -> Result<FundamentalData> {
    if jet.len() != 4 {
        return Err(Error::InvalidParams(format!(
            "fundamental_s3 expects 4 components, got {}",
            jet.len()
        )));
    }
    let pos: [D1; 4] = std::array::from_fn(|k| jet[k].d1());
    let radius2: f64 = pos.iter().map(|d| d.v * d.v).sum();
    let defect = (radius2.sqrt() - 1.0).abs();
    if defect > 1e-10 {
        return Err(Error::OffSphere { defect });
    }
    let pu: [D1; 4] = std::array::from_fn(|k| jet[k].d1_u());
    let pv: [D1; 4] = std::array::from_fn(|k| jet[k].d1_v());
    let mut n = normal4(&pos, &pu, &pv);
    let mut norm2 = D1::constant(0.0);
    for x in &n {
        norm2 = norm2 + *x * *x;
    }
    let nrm = norm2.sqrt();
    for x in n.iter_mut() {
        *x = *x / nrm;
    }
    let puu: [D1; 4] = std::array::from_fn(|k| jet[k].d1_uu());
    let puv: [D1; 4] = std::array::from_fn(|k| jet[k].d1_uv());
    let pvv: [D1; 4] = std::array::from_fn(|k| jet[k].d1_vv());
    let dot = |a: &[D1; 4], b: &[D1; 4]| {
        let mut s = D1::constant(0.0);
        for k in 0..4 {
            s = s + a[k] * b[k];
        }
        s
    };
    let h0 = {
        let two_zz = |k: usize| {
            let j = &jet[k];
            Complex64::new(0.5 * (j.duu() - j.dvv()), -j.duv())
        };
        (0..4).map(|k| two_zz(k) * n[k].v).sum::<Complex64>()
    };
    assemble(
        [dot(&pu, &pu), dot(&pu, &pv), dot(&pv, &pv)],
        [dot(&puu, &n), dot(&puv, &n), dot(&pvv, &n)],
        n.to_vec(),
        h0,
        Ambient::S3,
        u,
        v,
    )
}

/// Dispatch on the ambient space.
pub fn fundamental(ambient: Ambient, jet: &JetVec, u: f64, v: f64) -> Result<FundamentalData> {
    match ambient {
        Ambient::R3 => fundamental_r3(jet, u, v),
        Ambient::S3 => fundamental_s3(jet, u, v),
    }
}

fn assemble(
    [g11, g12, g22]: [D1; 3],
    [a11, a12, a22]: [D1; 3],
    normal: Vec<D1>,
    h0_coeff: Complex64,
    ambient: Ambient,
    u: f64,
    v: f64,
) -> Result<FundamentalData> {
    let det = g11.v * g22.v - g12.v * g12.v;
    let scale = 0.5 * (g11.v + g22.v);
    if !(det > 1e-14 * scale * scale) {
        return Err(Error::DegenerateMetric { u, v, det });
    }
    let defect = (g11.v - g22.v).abs() + g12.v.abs();
    if defect > ISOTHERMAL_RTOL * g11.v {
        return Err(Error::NotIsothermal { u, v, defect });
    }
    let e2l = g11;
    let lambda = e2l.ln().scale(0.5);
    let h = (a11 + a22) / e2l.scale(2.0);
    let phi = CD1::from_re_im((a11 - a22).scale(0.5), -a12);
    let hg11 = h * g11;
    let hg12 = h * g12;
    let hg22 = h * g22;
    Ok(FundamentalData {
        lambda,
        e2l,
        g: [[g11.v, g12.v], [g12.v, g22.v]],
        normal,
        a: [[a11.v, a12.v], [a12.v, a22.v]],
        h,
        aring: [
            [a11.v - hg11.v, a12.v - hg12.v],
            [a12.v - hg12.v, a22.v - hg22.v],
        ],
        phi,
        h0_coeff,
        ambient,
    })
}

/// `∂_z H` at a chart point, analytically through the jet pipeline.
pub fn mean_curvature_gradient(
    ambient: Ambient,
    chart: &crate::surfaces::Chart,
    u: f64,
    v: f64,
) -> Result<Complex64> {
    let jet = chart.eval(u, v)?;
    Ok(fundamental(ambient, &jet, u, v)?.h.dz())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surfaces;
    use approx::assert_relative_eq;

    fn at(s: &surfaces::SurfaceSpec, u: f64, v: f64) -> FundamentalData {
        fundamental(s.ambient, &s.main_chart().eval(u, v).unwrap(), u, v).unwrap()
    }

    #[test]
    fn unit_sphere_is_totally_umbilic_with_h_one() {
        let s = surfaces::sphere(1.0).unwrap();
        for &(u, v) in &[(0.0, 0.0), (1.3, 0.7), (4.0, -2.1)] {
            let fd = at(&s, u, v);
            assert_relative_eq!(fd.h.v, 1.0, epsilon = 1e-12);
            assert!(fd.phi.v.norm() < 1e-12);
            assert!(fd.aring_norm2() < 1e-12);
            assert!(fd.h0_coeff.norm() < 1e-12);
        }
    }

    #[test]
    fn plane_chart() {
        let s = surfaces::from_json(
            r#"{"ambient": "R3",
                "domain": {"u0": -1, "u1": 1, "v0": -1, "v1": 1,
                           "periodic_u": false, "periodic_v": false},
                "components": ["u", "v", "0"],
                "euler_characteristic": 1}"#,
        )
        .unwrap();
        let fd = at(&s, 0.2, -0.3);
        assert_eq!(fd.g, [[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(fd.h.v, 0.0);
        assert_eq!(fd.a, [[0.0, 0.0], [0.0, 0.0]]);
    }

    #[test]
    fn torus_outer_equator_principal_curvatures() {
        let s = surfaces::torus_rev(2.0, 1.0).unwrap();
        let fd = at(&s, 0.0, 0.0);
        // κ_i = A_ii / g_ii at the equator (A diagonal by symmetry)
        let k1 = fd.a[0][0] / fd.g[0][0];
        let k2 = fd.a[1][1] / fd.g[1][1];
        let (kmin, kmax) = if k1 < k2 { (k1, k2) } else { (k2, k1) };
        assert_relative_eq!(kmin, 1.0 / 3.0, max_relative = 1e-10);
        assert_relative_eq!(kmax, 1.0, max_relative = 1e-10);
        assert_relative_eq!(fd.h.v, 2.0 / 3.0, max_relative = 1e-10);
        assert!(fd.a[0][1].abs() < 1e-12);
    }

    #[test]
    fn clifford_is_minimal_with_unit_principal_curvatures() {
        let s = surfaces::clifford();
        for &(u, v) in &[(0.1, 0.2), (2.0, 5.0), (3.3, 1.0)] {
            let fd = at(&s, u, v);
            assert!(fd.h.v.abs() < 1e-12);
            assert_relative_eq!(fd.aring_norm2(), 2.0, max_relative = 1e-10);
            // N ⊥ Ψ
            let jet = s.main_chart().eval(u, v).unwrap();
            let dp: f64 = (0..4).map(|k| fd.normal[k].v * jet[k].value()).sum();
            assert!(dp.abs() < 1e-12);
            assert_relative_eq!(fd.e2l.v, 0.5, max_relative = 1e-12);
            assert_relative_eq!(fd.phi.v.norm(), 0.5, max_relative = 1e-10);
        }
    }

    #[test]
    fn great_sphere_is_totally_geodesic() {
        let s = surfaces::from_json(
            r#"{"ambient": "S3",
                "domain": {"u0": 0, "u1": 6.283185307179586, "v0": -3, "v1": 3,
                           "periodic_u": true, "periodic_v": false},
                "components": ["cos(u)/cosh(v)", "sin(u)/cosh(v)", "sinh(v)/cosh(v)", "0"],
                "euler_characteristic": 2}"#,
        )
        .unwrap();
        for &(u, v) in &[(0.3, 0.1), (2.0, -1.0)] {
            let fd = at(&s, u, v);
            assert!(fd.h.v.abs() < 1e-11);
            assert!(fd.phi.v.norm() < 1e-11);
        }
    }

    #[test]
    fn traceless_part_and_h0_consistency() {
        let surfaces: Vec<surfaces::SurfaceSpec> = vec![
            surfaces::sphere(0.8).unwrap(),
            surfaces::clifford(),
            surfaces::torus_rev(2.0, 1.0).unwrap(),
            surfaces::inverted_catenoid(1.0).unwrap(),
            surfaces::bb_annulus(1.0, 1.0, 1.0).unwrap(),
        ];
        for s in &surfaces {
            for &(fu, fv) in &[(0.21, 0.33), (0.64, 0.81), (0.95, 0.07)] {
                let d = &s.main_chart().domain;
                let (u, v) = (d.u0 + fu * d.width(), d.v0 + fv * d.height());
                let fd = at(s, u, v);
                // tr_g Å = 0
                let tr = (fd.aring[0][0] + fd.aring[1][1]) / fd.e2l.v;
                assert!(tr.abs() < 1e-10, "{}: tr Å = {tr:.3e}", s.name);
                // φ = h₀ (same object via two routes)
                assert!(
                    (fd.phi.v - fd.h0_coeff).norm() < 1e-9 * (1.0 + fd.phi.v.norm()),
                    "{}: φ = {} vs h₀ = {}",
                    s.name,
                    fd.phi.v,
                    fd.h0_coeff
                );
                // A = Å + Hg
                for i in 0..2 {
                    for j in 0..2 {
                        assert_relative_eq!(
                            fd.a[i][j],
                            fd.aring[i][j] + fd.h.v * fd.g[i][j],
                            epsilon = 1e-12 * (1.0 + fd.a[i][j].abs())
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn gauss_codazzi_is_exact_in_the_analytic_pipeline() {
        let list: Vec<surfaces::SurfaceSpec> = vec![
            surfaces::torus_rev(2.0, 1.0).unwrap(),
            surfaces::inverted_catenoid(1.0).unwrap(),
            surfaces::clifford(),
            surfaces::bb_annulus(1.0, 1.0, 1.0).unwrap(),
        ];
        for s in &list {
            for &(fu, fv) in &[(0.13, 0.41), (0.52, 0.66), (0.88, 0.29)] {
                let d = &s.main_chart().domain;
                let (u, v) = (d.u0 + fu * d.width(), d.v0 + fv * d.height());
                let fd = at(s, u, v);
                let res = fd.gauss_codazzi_residual();
                assert!(res < 1e-9, "{}: Gauss–Codazzi residual {res:.3e}", s.name);
            }
        }
    }

    #[test]
    fn willmore_density_is_conformally_invariant() {
        // torus_rev(√2, 1) in R³ vs its S³ lift: |Å|² dvol densities agree
        // pointwise in the shared chart coordinates
        let r3 = surfaces::torus_rev(2.0_f64.sqrt(), 1.0).unwrap();
        let s3 = surfaces::torus_rev_s3(2.0_f64.sqrt(), 1.0).unwrap();
        for &(fu, fv) in &[(0.17, 0.45), (0.5, 0.5), (0.73, 0.91)] {
            let d = &r3.main_chart().domain;
            let (u, v) = (d.u0 + fu * d.width(), d.v0 + fv * d.height());
            let a = at(&r3, u, v).aring_density();
            let b = at(&s3, u, v).aring_density();
            assert_relative_eq!(a, b, max_relative = 1e-8);
        }
    }

    #[test]
    fn s3_lift_of_clifford_matches_clifford_metric_scale() {
        // the stereographic Clifford torus lifts back to a minimal surface
        let s3 = surfaces::torus_rev_s3(2.0_f64.sqrt(), 1.0).unwrap();
        for &(u, v) in &[(0.2, 0.3), (1.5, 2.0)] {
            let fd = at(&s3, u, v);
            assert!(fd.h.v.abs() < 1e-8, "H_Ψ = {:.3e}", fd.h.v);
        }
    }

    #[test]
    fn off_sphere_is_rejected() {
        let s = surfaces::from_json(
            r#"{"ambient": "S3",
                "domain": {"u0": 0, "u1": 1, "v0": 0, "v1": 1,
                           "periodic_u": false, "periodic_v": false},
                "components": ["u", "v", "1", "0"],
                "euler_characteristic": 1}"#,
        )
        .unwrap();
        let jet = s.main_chart().eval(0.3, 0.4).unwrap();
        assert!(matches!(
            fundamental_s3(&jet, 0.3, 0.4),
            Err(Error::OffSphere { .. })
        ));
    }

    #[test]
    fn degenerate_metric_is_rejected() {
        let s = surfaces::from_json(
            r#"{"ambient": "R3",
                "domain": {"u0": -1, "u1": 1, "v0": -1, "v1": 1,
                           "periodic_u": false, "periodic_v": false},
                "components": ["u", "u", "0"],
                "euler_characteristic": 1}"#,
        )
        .unwrap();
        let jet = s.main_chart().eval(0.1, 0.1).unwrap();
        assert!(matches!(
            fundamental_r3(&jet, 0.1, 0.1),
            Err(Error::DegenerateMetric { .. })
        ));
    }

    #[test]
    fn non_isothermal_chart_is_rejected() {
        let s = surfaces::from_json(
            r#"{"ambient": "R3",
                "domain": {"u0": -1, "u1": 1, "v0": -1, "v1": 1,
                           "periodic_u": false, "periodic_v": false},
                "components": ["2*u", "v", "0"],
                "euler_characteristic": 1}"#,
        )
        .unwrap();
        let jet = s.main_chart().eval(0.1, 0.1).unwrap();
        assert!(matches!(
            fundamental_r3(&jet, 0.1, 0.1),
            Err(Error::NotIsothermal { .. })
        ));
    }

    #[test]
    fn mean_curvature_gradient_vanishes_on_clifford() {
        let s = surfaces::clifford();
        let hz = mean_curvature_gradient(s.ambient, s.main_chart(), 1.0, 2.0).unwrap();
        assert!(hz.norm() < 1e-12);
    }
}
