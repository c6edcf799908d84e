//! Willmore energies by quadrature and the space-form identities that tie
//! them to topology and to the renormalized limits.
//!
//! * `E = ∫ |Å|² dvol_g` (tracefree second fundamental form), `W = ∫ H² dvol`
//!   in R³ and `∫ (1 + H²) dvol` in S³; for closed surfaces
//!   `E = 2W − 4πχ`, and `E` is invariant under conformal changes of the
//!   ambient space while `W` is not.
//! * case 1 (surfaces with umbilic points only): `E = 4π(χ + Σ nᵢ)`.
//! * case 2 (minimal surfaces in S³): `E = 2·area − 4πχ`.
//! * case 3 (minimal surfaces in hyperbolic half-space meeting the ideal
//!   boundary): the renormalized area `𝓐(ε) = ∫_{d>ε} dvol_g/(ζ³)² −
//!   (2/ε)·𝓗¹(crossing circle)` converges as ε → 0, and pointwise
//!   `−4Q/φ² = 1/(ζ³)²`.

use crate::cgm;
use crate::fundamental;
use crate::gaussbonnet::stencil_probe;
use crate::numerics::{gauss_legendre, pairwise_sum, trapezoid_weights};
use crate::surfaces::{Ambient, SurfaceSpec};
use crate::umbilic::UmbilicReport;
use crate::{Error, Result};
use rayon::prelude::*;
use std::f64::consts::PI;

/// Energies of the main chart.
#[derive(Debug, Clone, serde::Serialize)]
pub struct EnergyReport {
    /// `∫ |Å|² dvol_g`
    pub e: f64,
    /// `∫ H² dvol` (R³) or `∫ (1 + H²) dvol` (S³)
    pub w: f64,
    /// `∫ dvol_g`
    pub area: f64,
    /// true when the chart covers the surface only up to a truncation
    pub partial: bool,
}

/// Quadrature nodes and weights along one axis: uniform/trapezoid on
/// periodic axes, Gauss–Legendre on bounded ones.
fn axis_rule(x0: f64, x1: f64, n: usize, periodic: bool) -> (Vec<f64>, Vec<f64>) {
    if periodic {
        let w = trapezoid_weights(x1 - x0, n, true);
        let h = (x1 - x0) / n as f64;
        ((0..n).map(|k| x0 + k as f64 * h).collect(), w)
    } else {
        let (t, wt) = gauss_legendre(n);
        let (mid, half) = ((x0 + x1) / 2.0, (x1 - x0) / 2.0);
        (
            t.iter().map(|&s| mid + half * s).collect(),
            wt.iter().map(|&w| w * half).collect(),
        )
    }
}

/// Tensor quadrature of the energy densities over the main chart.  `n` is
/// the node count along `u`; the `v` count is scaled by the aspect ratio.
pub fn willmore_energies(surface: &SurfaceSpec, n: usize) -> Result<EnergyReport> {
    let chart = surface.main_chart();
    let dom = &chart.domain;
    let nu = n.max(16);
    let nv = ((nu as f64 * dom.height() / dom.width()).round() as usize).clamp(16, 200_000);
    let (us, wu) = axis_rule(dom.u0, dom.u1, nu, dom.periodic_u);
    let (vs, wv) = axis_rule(dom.v0, dom.v1, nv, dom.periodic_v);
    let ambient = surface.ambient;
    let rows: Vec<[f64; 3]> = vs
        .par_iter()
        .zip(wv.par_iter())
        .map(|(&v, &wj)| -> Result<[f64; 3]> {
            let mut te = Vec::with_capacity(nu);
            let mut tw = Vec::with_capacity(nu);
            let mut ta = Vec::with_capacity(nu);
            for (&u, &wi) in us.iter().zip(wu.iter()) {
                let fd = fundamental::fundamental(ambient, &chart.eval(u, v)?, u, v)?;
                let dvol = (2.0 * fd.lambda.v).exp() * wi * wj;
                let h2 = fd.h.v * fd.h.v;
                te.push(fd.aring_norm2() * dvol);
                tw.push(match ambient {
                    Ambient::R3 => h2 * dvol,
                    Ambient::S3 => (1.0 + h2) * dvol,
                });
                ta.push(dvol);
            }
            Ok([pairwise_sum(&te), pairwise_sum(&tw), pairwise_sum(&ta)])
        })
        .collect::<Result<Vec<_>>>()?;
    let col = |k: usize| pairwise_sum(&rows.iter().map(|r| r[k]).collect::<Vec<_>>());
    Ok(EnergyReport { e: col(0), w: col(1), area: col(2), partial: !surface.meta.closed })
}

/// `|E − (2W − 4πχ)|`, the closed-surface consistency gap.
pub fn euler_identity_gap(surface: &SurfaceSpec, rep: &EnergyReport) -> f64 {
    (rep.e - (2.0 * rep.w - 4.0 * PI * surface.euler_characteristic as f64)).abs()
}

/// Two sides of one space-form identity.
#[derive(Debug, Clone, serde::Serialize)]
pub struct IdentityCheck {
    pub case: u8,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

/// Case 1: `E = 4π(χ + Σ nᵢ)` for Willmore surfaces whose umbilic set is a
/// finite point set with multiplicities `nᵢ`.
pub fn space_form_case1(
    surface: &SurfaceSpec,
    report: &UmbilicReport,
    grid_n: usize,
) -> Result<IdentityCheck> {
    if !report.curves.is_empty() {
        return Err(Error::InvalidParams(
            "case 1 needs a purely point-like umbilic set; curves were found".into(),
        ));
    }
    let e = willmore_energies(surface, grid_n)?.e;
    let rhs =
        4.0 * PI * (surface.euler_characteristic as f64 + report.total_multiplicity() as f64);
    Ok(IdentityCheck { case: 1, lhs: e, rhs, gap: (e - rhs).abs() })
}

/// Case 2: `E = 2·area − 4πχ` for minimal surfaces in S³ (the minimal
/// representative's area taken in the S³ chart itself).
pub fn space_form_case2(surface: &SurfaceSpec, grid_n: usize) -> Result<IdentityCheck> {
    if surface.ambient != Ambient::S3 {
        return Err(Error::InvalidParams(
            "case 2 applies to the S³ chart of a minimal surface; use the S³ built-in".into(),
        ));
    }
    let rep = willmore_energies(surface, grid_n)?;
    let rhs = 2.0 * rep.area - 4.0 * PI * surface.euler_characteristic as f64;
    Ok(IdentityCheck { case: 2, lhs: rep.e, rhs, gap: (rep.e - rhs).abs() })
}

/// Case 3 evidence for a hyperbolic-minimal annulus.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Case3Report {
    /// `(ε, 𝓐(ε))`, ε decreasing
    pub sweep: Vec<(f64, f64)>,
    /// pairwise Richardson limit estimates after removing the fitted O(ε) term
    pub extrapolated: Vec<f64>,
    /// largest consecutive difference of the extrapolated limits over the
    /// lower half of the ladder
    pub tail_diff: f64,
    /// limit estimate (last extrapolated value)
    pub limit: f64,
    /// max over samples of `|−4Q/φ² − 1/(ζ³)²| / (1 + |ζ³|⁻²)`
    pub pointwise_residual: f64,
    /// Euclidean length of the crossing circle
    pub crossing_length: f64,
}

/// Case 3: the renormalized area of a hyperbolic-minimal annulus converges
/// along the ε-ladder, and `−4Q/φ²` equals the hyperbolic density `1/(ζ³)²`.
pub fn space_form_case3(surface: &SurfaceSpec, eps: &[f64]) -> Result<Case3Report> {
    let prof = surface
        .meta
        .profile
        .clone()
        .ok_or_else(|| Error::MissingMetadata("case 3 needs the profile solution".into()))?;
    let chart = surface.main_chart();
    let dom = &chart.domain;
    if eps.len() < 4 {
        return Err(Error::InvalidParams("case 3 needs an ε-ladder of at least 4 values".into()));
    }
    let rho0 = prof.query(0.0)?.rho[0];
    let crossing_length = 2.0 * PI * rho0;

    // the geodesic distance to the crossing depends only on the profile
    // parameter; locate d = ±ε by bisection and integrate the two remaining
    // v-intervals with Gauss–Legendre, the periodic u-axis exactly (the
    // integrand is u-independent, so the u-integral is a 2π factor)
    let locate = |target: f64, side: f64| -> Result<f64> {
        let (mut lo, mut hi) = (0.0_f64, if side > 0.0 { dom.v1 } else { -dom.v0 });
        for _ in 0..200 {
            let mid = (lo + hi) / 2.0;
            if prof.distance(side * mid)?.abs() < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(side * (lo + hi) / 2.0)
    };
    let integrand = |v: f64| -> Result<f64> {
        let q = prof.query(v)?;
        // e^{2λ} = ρ², ζ³ = z
        Ok(q.rho[0] * q.rho[0] / (q.z[0] * q.z[0]))
    };
    let (t, wt) = gauss_legendre(96);
    let seg = |a: f64, b: f64| -> Result<f64> {
        let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
        let mut terms = Vec::with_capacity(t.len());
        for (&s, &w) in t.iter().zip(wt.iter()) {
            terms.push(integrand(mid + half * s)? * w * half);
        }
        Ok(pairwise_sum(&terms))
    };
    let mut sweep = Vec::with_capacity(eps.len());
    for &e in eps {
        let vp = locate(e, 1.0)?;
        let vm = locate(e, -1.0)?;
        let area = 2.0 * PI * (seg(vp, dom.v1)? + seg(dom.v0, vm)?);
        sweep.push((e, area - 2.0 / e * crossing_length));
    }
    // Richardson on the O(ε) model: 𝓐 ≈ 𝓐₀ + cε on consecutive pairs
    let extrapolated: Vec<f64> = sweep
        .windows(2)
        .map(|w| {
            let ((e0, a0), (e1, a1)) = (w[0], w[1]);
            a1 + (a1 - a0) * e1 / (e0 - e1)
        })
        .collect();
    let k0 = extrapolated.len() / 2;
    let tail_diff = extrapolated
        .windows(2)
        .skip(k0.saturating_sub(1))
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0_f64, f64::max);

    // pointwise density identity away from the crossing
    let h0 = 5e-3;
    let mut pointwise: f64 = 0.0;
    for &(u, v) in &[(0.3, 0.4), (2.0, -0.5), (4.4, 0.75), (1.1, -0.85), (5.9, 0.6)] {
        let (p, u, v) = stencil_probe(surface.ambient, chart, u, v, h0);
        let fd = p.fd(u, v)?;
        let q = cgm::bryant_quartic(&p, u, v)?.q;
        let z = chart.eval(u, v)?[2].value();
        let lhs = -4.0 * q / (fd.phi.v * fd.phi.v);
        let rhs = 1.0 / (z * z);
        pointwise = pointwise.max((lhs - num_complex::Complex64::new(rhs, 0.0)).norm() / (1.0 + rhs.abs()));
    }
    Ok(Case3Report {
        limit: *extrapolated.last().unwrap(),
        sweep,
        extrapolated,
        tail_diff,
        pointwise_residual: pointwise,
        crossing_length,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussbonnet::epsilon_ladder;
    use crate::surfaces;
    use crate::umbilic;
    use approx::assert_relative_eq;

    #[test]
    fn sphere_has_no_tracefree_energy_and_w_is_4pi() {
        let s = surfaces::sphere(1.0).unwrap();
        let rep = willmore_energies(&s, 96).unwrap();
        assert!(rep.e.abs() < 1e-8, "E = {}", rep.e);
        assert_relative_eq!(rep.w, 4.0 * PI, max_relative = 1e-8);
        assert!(!rep.partial);
    }

    #[test]
    fn clifford_energies_and_euler_identity() {
        let s = surfaces::clifford();
        let rep = willmore_energies(&s, 128).unwrap();
        assert_relative_eq!(rep.e, 4.0 * PI * PI, max_relative = 1e-10);
        assert_relative_eq!(rep.w, 2.0 * PI * PI, max_relative = 1e-10);
        assert_relative_eq!(rep.area, 2.0 * PI * PI, max_relative = 1e-10);
        assert!(euler_identity_gap(&s, &rep) < 1e-3 * (1.0 + rep.e));
    }

    #[test]
    fn closed_builtins_satisfy_the_euler_identity() {
        for s in [
            surfaces::sphere(2.0).unwrap(),
            surfaces::clifford(),
            surfaces::torus_rev(2.0, 1.0).unwrap(),
            surfaces::torus_rev_s3(2.0, 1.0).unwrap(),
        ] {
            let rep = willmore_energies(&s, 192).unwrap();
            let gap = euler_identity_gap(&s, &rep);
            assert!(gap < 1e-3 * (1.0 + rep.e), "{}: gap = {gap}", s.name);
        }
    }

    #[test]
    fn tracefree_energy_is_conformally_invariant_for_the_clifford_torus() {
        // the stereographic image of the Clifford torus is the R³ torus of
        // revolution with R/r = √2; E must agree across the conformal change
        let s3 = willmore_energies(&surfaces::clifford(), 128).unwrap();
        let r3 = willmore_energies(&surfaces::torus_rev(2.0_f64.sqrt(), 1.0).unwrap(), 192).unwrap();
        assert_relative_eq!(s3.e, r3.e, max_relative = 1e-3);
    }

    #[test]
    fn inverted_catenoid_energies_are_8pi() {
        let s = surfaces::inverted_catenoid(1.0).unwrap();
        let rep = willmore_energies(&s, 192).unwrap();
        assert_relative_eq!(rep.e, 8.0 * PI, max_relative = 1e-2);
        assert_relative_eq!(rep.w, 8.0 * PI, max_relative = 1e-2);
    }

    #[test]
    fn case1_holds_for_the_inverted_catenoid() {
        let s = surfaces::inverted_catenoid(1.0).unwrap();
        let report = umbilic::detect_umbilic_set(&s, 96).unwrap();
        let check = space_form_case1(&s, &report, 192).unwrap();
        // χ = 2, Σn = 0 → 8π on both sides
        assert_relative_eq!(check.rhs, 8.0 * PI, epsilon = 1e-12);
        assert!(check.gap < 1e-2 * (1.0 + check.rhs), "gap = {}", check.gap);
    }

    #[test]
    fn case2_holds_for_the_clifford_torus() {
        let check = space_form_case2(&surfaces::clifford(), 128).unwrap();
        assert_relative_eq!(check.lhs, check.rhs, max_relative = 1e-10);
        assert!(space_form_case2(&surfaces::torus_rev(2.0, 1.0).unwrap(), 64).is_err());
    }

    #[test]
    fn case3_renormalized_area_converges_for_the_bb_annulus() {
        let s = surfaces::bb_annulus(1.0, 1.0, 1.0).unwrap();
        let eps = epsilon_ladder(0.2, 0.02, 10);
        let rep = space_form_case3(&s, &eps).unwrap();
        assert_relative_eq!(rep.crossing_length, 2.0 * PI, epsilon = 1e-12);
        // successive raw differences shrink like O(ε): their ratio tracks the
        // ladder ratio
        let r = eps[1] / eps[0];
        let diffs: Vec<f64> = rep.sweep.windows(2).map(|w| (w[1].1 - w[0].1).abs()).collect();
        for w in diffs.windows(2).skip(2) {
            let ratio = w[1] / w[0];
            assert!((ratio - r).abs() < 0.25 * r, "diff ratio {ratio} vs ladder {r}");
        }
        assert!(rep.tail_diff < 5e-3, "tail_diff = {}", rep.tail_diff);
        assert!(rep.pointwise_residual < 1e-6, "pointwise = {}", rep.pointwise_residual);
    }
}
