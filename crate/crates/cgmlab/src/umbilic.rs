//! Detection, classification and tracing of the umbilic set `{φ = 0}`.
//!
//! The classifier works on the local normal form
//! `φ = C z^m (a + (bz − z̄)/2i + 𝒢)`, `𝒢 = O(|z|²)`:
//!
//! * type I — `a ≠ 0`, isolated, multiplicity `n = m`;
//! * type II — `a = 0`, `b ≠ 1`, isolated, `n = m + 1`;
//! * type III — `b = 1`, isolated, `n = m + 1`;
//! * type IV — `b = 1`, lying on an umbilic curve, `n = m`.
//!
//! Coefficients are recovered by least-squares fits of `F = φ/z^m` against
//! the basis `{1, z, z̄}` on probe circles; `m` is estimated from the
//! log–log radial slope and disambiguated between the two consistent integer
//! candidates by fit residual (the fit is run over all probe circles jointly,
//! which breaks the `z̄ = r²/z` aliasing a single circle would suffer).
//! `m = −1` is admitted for puncture (end-preimage) classification, where
//! `φ` is bounded and non-vanishing with a direction-dependent limit.

use crate::fundamental;
use crate::jet::CD1;
use crate::minkowski::Vec5;
use crate::numerics::{lsq_svd, pairwise_sum};
use crate::surfaces::{Ambient, Chart, Domain, SurfaceSpec};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector, Matrix2, Matrix3, Vector2, Vector3};
use num_complex::Complex64;
use rayon::prelude::*;

/// `|a|`-threshold of the type-I decision (on `f₀₀/f₀₁`).
const TAU_A: f64 = 1e-4;
/// `|b − 1|`-threshold separating type II from the III/IV family.
const TAU_B: f64 = 1e-3;
/// damped-Newton iteration cap per candidate.
const NEWTON_CAP: usize = 50;

// ---------------------------------------------------------------------------
// φ-field abstraction
// ---------------------------------------------------------------------------

/// A complex field with exact first partials on a rectangular domain — either
/// the `φ` of an actual immersion or a synthetic test field.
pub trait PhiField: Sync {
    fn phi(&self, u: f64, v: f64) -> Result<CD1>;
    fn domain(&self) -> &Domain;
    /// conformal factor `λ` of the background metric `g = e^{2λ}δ`
    /// (flat for synthetic fields)
    fn lambda(&self, u: f64, v: f64) -> Result<f64> {
        let _ = (u, v);
        Ok(0.0)
    }
    fn punctures(&self) -> &[(f64, f64)] {
        &[]
    }
}

/// `φ` of one chart of a surface.
pub struct SurfacePhi<'a> {
    pub ambient: Ambient,
    pub chart: &'a Chart,
}

impl<'a> SurfacePhi<'a> {
    pub fn new(s: &'a SurfaceSpec) -> SurfacePhi<'a> {
        SurfacePhi { ambient: s.ambient, chart: s.main_chart() }
    }

    pub fn on_chart(s: &'a SurfaceSpec, chart: &'a Chart) -> SurfacePhi<'a> {
        SurfacePhi { ambient: s.ambient, chart }
    }
}

impl PhiField for SurfacePhi<'_> {
    fn phi(&self, u: f64, v: f64) -> Result<CD1> {
        Ok(fundamental::fundamental(self.ambient, &self.chart.eval(u, v)?, u, v)?.phi)
    }

    fn domain(&self) -> &Domain {
        &self.chart.domain
    }

    fn lambda(&self, u: f64, v: f64) -> Result<f64> {
        Ok(fundamental::fundamental(self.ambient, &self.chart.eval(u, v)?, u, v)?.lambda.v)
    }

    fn punctures(&self) -> &[(f64, f64)] {
        &self.chart.punctures
    }
}

/// A closed-form test field on a flat domain.
pub struct SyntheticPhi<F: Fn(f64, f64) -> CD1 + Sync> {
    pub f: F,
    pub domain: Domain,
}

impl<F: Fn(f64, f64) -> CD1 + Sync> PhiField for SyntheticPhi<F> {
    fn phi(&self, u: f64, v: f64) -> Result<CD1> {
        Ok((self.f)(u, v))
    }

    fn domain(&self) -> &Domain {
        &self.domain
    }
}

/// Build the normal-form corpus field
/// `φ = C z^m (a + (bz − z̄)/2i + Σ_j g_j z^{j+2})` centred at the origin,
/// with exact partials.
pub fn normal_form_field(
    c: Complex64,
    m: i32,
    a: Complex64,
    b: f64,
    g: Vec<Complex64>,
    domain: Domain,
) -> SyntheticPhi<impl Fn(f64, f64) -> CD1 + Sync> {
    let f = move |u: f64, v: f64| -> CD1 {
        let z = Complex64::new(u, v);
        let zb = z.conj();
        let two_i = Complex64::new(0.0, 2.0);
        let mut inner = a + (b * z - zb) / two_i;
        let mut inner_z = Complex64::from(b) / two_i;
        for (j, gj) in g.iter().enumerate() {
            let p = (j + 2) as i32;
            inner += gj * z.powi(p);
            inner_z += gj * f64::from(p) * z.powi(p - 1);
        }
        let zm = z.powi(m);
        let value = c * zm * inner;
        // ∂_z and ∂_z̄ (∂_z̄ inner = −1/2i), then real partials via z = u + iv
        let dz = c * (f64::from(m) * z.powi(m - 1) * inner + zm * inner_z);
        let dzb = c * zm / (-two_i);
        let i1 = Complex64::new(0.0, 1.0);
        CD1 { v: value, du: dz + dzb, dv: i1 * (dz - dzb) }
    };
    SyntheticPhi { f, domain }
}

// ---------------------------------------------------------------------------
// Newton refinement
// ---------------------------------------------------------------------------

fn jacobian(p: &CD1) -> Matrix2<f64> {
    Matrix2::new(p.du.re, p.dv.re, p.du.im, p.dv.im)
}

#[derive(Debug, Clone, Copy)]
struct Zero {
    u: f64,
    v: f64,
    /// singular values of the real Jacobian of `(Re φ, Im φ)`
    s1: f64,
    s2: f64,
}

enum NewtonOutcome {
    Converged(Zero),
    /// no zero reachable: stalled at the given `|φ|`
    Stalled(f64),
}

/// Damped Newton with a truncated pseudo-inverse (rank-deficient Jacobians
/// step along the normal of the zero curve).  `tol` is the absolute `|φ|`
/// convergence target.
fn newton_refine(field: &dyn PhiField, u0: f64, v0: f64, tol: f64) -> Option<Zero> {
    match newton_full(field, u0, v0, tol) {
        Some(NewtonOutcome::Converged(z)) => Some(z),
        _ => None,
    }
}

fn newton_full(field: &dyn PhiField, u0: f64, v0: f64, tol: f64) -> Option<NewtonOutcome> {
    let d = *field.domain();
    let (mut u, mut v) = d.wrap(u0, v0);
    let mut p = field.phi(u, v).ok()?;
    for _ in 0..NEWTON_CAP {
        let j = jacobian(&p);
        let svd = j.svd(true, true);
        let s1 = svd.singular_values[0];
        let s2 = svd.singular_values[1];
        if p.v.norm() <= tol {
            return Some(NewtonOutcome::Converged(Zero { u, v, s1, s2 }));
        }
        let rhs = Vector2::new(-p.v.re, -p.v.im);
        let step = svd.solve(&rhs, 1e-8 * s1.max(f64::MIN_POSITIVE)).ok()?;
        // damping: halve until |φ| decreases
        let mut t = 1.0;
        let mut advanced = false;
        for _ in 0..25 {
            let (nu, nv) = d.wrap(u + t * step.x, v + t * step.y);
            if d.contains(nu, nv, 0.0) {
                if let Ok(np) = field.phi(nu, nv) {
                    if np.v.norm() < p.v.norm() {
                        u = nu;
                        v = nv;
                        p = np;
                        advanced = true;
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        if !advanced {
            // local minimum of |φ| that is not a zero
            return Some(NewtonOutcome::Stalled(p.v.norm()));
        }
    }
    if p.v.norm() <= tol {
        let j = jacobian(&p);
        let svd = j.svd(false, false);
        return Some(NewtonOutcome::Converged(Zero {
            u,
            v,
            s1: svd.singular_values[0],
            s2: svd.singular_values[1],
        }));
    }
    Some(NewtonOutcome::Stalled(p.v.norm()))
}

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

/// Umbilic type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Kind {
    I,
    II,
    III,
    IVSingular,
    /// `|b − 1| < τ_b` with unknown curve membership: reported, not guessed
    Ambiguous,
}

/// A classified umbilic point (or end-preimage candidate).
#[derive(Debug, Clone)]
pub struct UmbilicPoint {
    pub chart: String,
    pub u: f64,
    pub v: f64,
    pub kind: Kind,
    /// power of `z` in the normal form (`≥ −1`; `−1` only at punctures)
    pub m: i32,
    /// multiplicity `n(p)`
    pub n: i32,
    pub coeff_c: Complex64,
    pub coeff_a: Complex64,
    pub coeff_b: f64,
    /// relative rms residual of the chosen normal-form fit
    pub fit_residual: f64,
}

/// Classify the field around `(cu, cv)` with probe circles of radii
/// `{4h, 8h, 16h}`.  `on_curve` injects curve-membership knowledge for the
/// III/IV decision; `None` reports `Ambiguous` in the borderline band.
pub fn classify_umbilic(
    field: &dyn PhiField,
    cu: f64,
    cv: f64,
    h: f64,
    on_curve: Option<bool>,
) -> Result<UmbilicPoint> {
    let radii = [4.0 * h, 8.0 * h, 16.0 * h];
    let k = 48usize;
    // sample all circles once
    let mut samples: Vec<(Complex64, Complex64)> = Vec::with_capacity(3 * k); // (z, φ)
    for &r in &radii {
        for j in 0..k {
            let th = 2.0 * std::f64::consts::PI * (j as f64 + 0.37) / k as f64;
            let z = Complex64::from_polar(r, th);
            let p = field.phi(cu + z.re, cv + z.im)?;
            samples.push((z, p.v));
        }
    }
    // radial log–log slope (ray-averaged), skipping near-zero samples
    let mut mean_log = [0.0f64; 3];
    for (ci, &r) in radii.iter().enumerate() {
        let circle = &samples[ci * k..(ci + 1) * k];
        let logs: Vec<f64> =
            circle.iter().map(|(_, p)| p.norm()).filter(|&x| x > 1e-280).map(f64::ln).collect();
        if logs.is_empty() {
            return Err(Error::Classification(format!(
                "φ vanishes identically on the probe circle r = {r:.3e}"
            )));
        }
        mean_log[ci] = pairwise_sum(&logs) / logs.len() as f64;
    }
    let lr: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let lbar = (lr[0] + lr[1] + lr[2]) / 3.0;
    let ybar = (mean_log[0] + mean_log[1] + mean_log[2]) / 3.0;
    let slope = (0..3).map(|i| (lr[i] - lbar) * (mean_log[i] - ybar)).sum::<f64>()
        / (0..3).map(|i| (lr[i] - lbar).powi(2)).sum::<f64>();
    let shat = slope.round() as i32;

    // joint fit F = φ/z^m ≈ f₀₀ + f₁₀ z + f₀₁ z̄ over all circles for both
    // consistent integer orders; smaller relative residual wins
    let fit = |m: i32| -> Result<(Complex64, Complex64, Complex64, f64)> {
        let rows = 2 * samples.len();
        let mut a = DMatrix::<f64>::zeros(rows, 6);
        let mut b = DVector::<f64>::zeros(rows);
        let mut f_norm2 = 0.0;
        for (i, &(z, phi)) in samples.iter().enumerate() {
            let f = phi / z.powi(m);
            f_norm2 += f.norm_sqr();
            let basis = [Complex64::new(1.0, 0.0), z, z.conj()];
            for (col, g) in basis.iter().enumerate() {
                // complex coefficient c · basis g → real 2×2 block
                a[(2 * i, 2 * col)] = g.re;
                a[(2 * i, 2 * col + 1)] = -g.im;
                a[(2 * i + 1, 2 * col)] = g.im;
                a[(2 * i + 1, 2 * col + 1)] = g.re;
            }
            b[2 * i] = f.re;
            b[2 * i + 1] = f.im;
        }
        let (x, rms, _cond) = lsq_svd(&a, &b);
        let scale = (f_norm2 / samples.len() as f64).sqrt();
        Ok((
            Complex64::new(x[0], x[1]),
            Complex64::new(x[2], x[3]),
            Complex64::new(x[4], x[5]),
            rms / scale.max(f64::MIN_POSITIVE),
        ))
    };

    let mut best: Option<(i32, (Complex64, Complex64, Complex64, f64))> = None;
    for m in [shat, shat - 1] {
        if m < -1 {
            continue;
        }
        let r = fit(m)?;
        if best.as_ref().map_or(true, |(_, b)| r.3 < b.3) {
            best = Some((m, r));
        }
    }
    let (m, (f00, f10, f01, residual)) =
        best.ok_or_else(|| Error::Classification("no admissible vanishing order".into()))?;

    let coeff_scale = f00.norm().max(f10.norm()).max(f01.norm());
    if f01.norm() < 1e-8 * coeff_scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Classification(format!(
            "∂_z̄ coefficient f₀₁ ≈ 0 (|f₀₁| = {:.3e}) — normal form inapplicable",
            f01.norm()
        )));
    }
    // normal form: f₀₀ = C·a, f₁₀ = C·b/2i, f₀₁ = −C/2i
    let coeff_c = f01 * Complex64::new(0.0, -2.0);
    let coeff_a = f00 / coeff_c;
    let coeff_b = (f10 / f01).norm();

    let (kind, n) = if coeff_a.norm() > TAU_A {
        (Kind::I, m)
    } else if (coeff_b - 1.0).abs() > TAU_B {
        (Kind::II, m + 1)
    } else {
        match on_curve {
            Some(true) => (Kind::IVSingular, m),
            Some(false) => (Kind::III, m + 1),
            None => (Kind::Ambiguous, m + 1),
        }
    };
    Ok(UmbilicPoint {
        chart: String::new(),
        u: cu,
        v: cv,
        kind,
        m,
        n,
        coeff_c,
        coeff_a,
        coeff_b,
        fit_residual: residual,
    })
}

// ---------------------------------------------------------------------------
// Curve tracing
// ---------------------------------------------------------------------------

/// A traced umbilic curve (polyline in chart coordinates; closure is implied
/// — the last vertex connects back to the first, possibly across a periodic
/// identification).
#[derive(Debug, Clone)]
pub struct UmbilicCurve {
    pub chart: String,
    pub polyline: Vec<(f64, f64)>,
    pub closed: bool,
    /// length in the induced metric `g` (composite Simpson)
    pub length_g: f64,
    /// largest `|φ|` along the refined polyline
    pub max_phi_residual: f64,
    pub singular_points: Vec<UmbilicPoint>,
}

/// Corrector of the predictor–corrector march: damped 1-D Gauss–Newton for
/// `φ = 0` along the line `p + s·ν` (ν the march normal).  Constraining the
/// correction keeps it from sliding along the curve or being captured by a
/// deeper zero elsewhere (e.g. the rank-0 singular point of `φ = z·Im z`).
fn line_newton(
    field: &dyn PhiField,
    p: (f64, f64),
    nu: Vector2<f64>,
    tol: f64,
) -> Option<(f64, f64)> {
    let d = *field.domain();
    let at = |s: f64| -> Option<CD1> {
        let (u, v) = d.wrap(p.0 + s * nu.x, p.1 + s * nu.y);
        d.contains(u, v, 0.0).then(|| field.phi(u, v).ok())?
    };
    let mut s = 0.0;
    let mut q = at(s)?;
    for _ in 0..NEWTON_CAP {
        if q.v.norm() <= tol {
            let (u, v) = d.wrap(p.0 + s * nu.x, p.1 + s * nu.y);
            return Some((u, v));
        }
        let dpsi = q.du * nu.x + q.dv * nu.y;
        let denom = dpsi.norm_sqr();
        if denom == 0.0 {
            return None;
        }
        let full = -(dpsi.conj() * q.v).re / denom;
        let mut t = 1.0;
        let mut advanced = false;
        for _ in 0..25 {
            if let Some(nq) = at(s + t * full) {
                if nq.v.norm() < q.v.norm() {
                    s += t * full;
                    q = nq;
                    advanced = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !advanced {
            return None;
        }
    }
    None
}

fn kernel_direction(j: &Matrix2<f64>) -> Vector2<f64> {
    let svd = j.svd(false, true);
    let vt = svd.v_t.unwrap();
    Vector2::new(vt[(1, 0)], vt[(1, 1)])
}

/// Trace the umbilic curve through `seed` with predictor–corrector steps of
/// size `step`.  The polyline closes when it returns within `step/2` of the
/// start; escape through a non-periodic chart boundary yields an open curve.
pub fn trace_umbilic_curve(field: &dyn PhiField, seed: (f64, f64), step: f64) -> Result<UmbilicCurve> {
    let d = *field.domain();
    let tol = newton_tolerance(field)?;
    let z0 = newton_refine(field, seed.0, seed.1, tol).ok_or_else(|| {
        Error::Classification(format!("seed ({}, {}) not in the Newton basin", seed.0, seed.1))
    })?;

    let march = |dir: f64| -> Result<(Vec<(f64, f64, f64)>, bool, bool)> {
        // returns (vertices with σ1, closed, escaped)
        let mut out: Vec<(f64, f64, f64)> = vec![(z0.u, z0.v, z0.s1)];
        let p0 = field.phi(z0.u, z0.v)?;
        let mut t_prev = kernel_direction(&jacobian(&p0)) * dir;
        let (mut u, mut v) = (z0.u, z0.v);
        let max_steps = (40.0 * (d.width() + d.height()) / step).ceil() as usize;
        for k in 0..max_steps {
            let (pu, pv) = (u + step * t_prev.x, v + step * t_prev.y);
            if !d.contains(pu, pv, 0.0) && !(d.periodic_u || d.periodic_v) {
                return Ok((out, false, true));
            }
            let nu = Vector2::new(-t_prev.y, t_prev.x);
            let z = match line_newton(field, (pu, pv), nu, tol) {
                Some((zu, zv)) => {
                    let q = field.phi(zu, zv)?;
                    let svd = jacobian(&q).svd(false, false);
                    Zero { u: zu, v: zv, s1: svd.singular_values[0], s2: svd.singular_values[1] }
                }
                None => return Ok((out, false, true)),
            };
            if !d.contains(z.u, z.v, 0.0) {
                return Ok((out, false, true));
            }
            let p = field.phi(z.u, z.v)?;
            let mut t = kernel_direction(&jacobian(&p));
            if t.dot(&t_prev) < 0.0 {
                t = -t;
            }
            // at rank-0 points (singular points on the curve) the kernel
            // direction is unreliable — keep marching with the old tangent
            if t.dot(&t_prev) < 0.5 {
                t = t_prev;
            }
            // closure test
            let (du, dv) = d.delta((z.u, z.v), (z0.u, z0.v));
            if k >= 4 && du.hypot(dv) < 0.5 * step {
                return Ok((out, true, false));
            }
            // step-collapse guard
            let (su, sv) = d.delta((u, v), (z.u, z.v));
            if su.hypot(sv) < 0.05 * step {
                return Err(Error::Classification(format!(
                    "continuation step collapsed near ({:.6}, {:.6}) → ({:.6}, {:.6})",
                    u, v, z.u, z.v
                )));
            }
            out.push((z.u, z.v, z.s1));
            u = z.u;
            v = z.v;
            t_prev = t;
        }
        Err(Error::Classification("curve tracing exceeded the step budget".into()))
    };

    let (fwd, closed, escaped) = march(1.0)?;
    let mut verts = fwd;
    let mut is_closed = closed;
    if !closed && escaped {
        // open curve: march the other way and prepend
        let (bwd, _, _) = march(-1.0)?;
        let mut rev: Vec<_> = bwd.into_iter().skip(1).collect();
        rev.reverse();
        rev.extend(verts);
        verts = rev;
        is_closed = false;
    }
    if verts.len() < 3 {
        return Err(Error::Classification("curve degenerated to fewer than 3 vertices".into()));
    }

    // residual and singular-point scan
    let mut max_phi = 0.0f64;
    for &(u, v, _) in &verts {
        max_phi = max_phi.max(field.phi(u, v)?.v.norm());
    }
    let singular_points = find_singular_points(field, &verts, is_closed, step, tol)?;

    // length in g by composite Simpson with curve-refined midpoints
    let mut seg_lengths = Vec::with_capacity(verts.len());
    let n = verts.len();
    let last = if is_closed { n } else { n - 1 };
    for i in 0..last {
        let a = (verts[i].0, verts[i].1);
        let bv = verts[(i + 1) % n];
        let (du, dv) = d.delta(a, (bv.0, bv.1));
        let chord = du.hypot(dv);
        let mid0 = d.wrap(a.0 + 0.5 * du, a.1 + 0.5 * dv);
        let nu = Vector2::new(-dv, du).normalize();
        let mid = line_newton(field, mid0, nu, tol).unwrap_or(mid0);
        let la = field.lambda(a.0, a.1)?.exp();
        let lm = field.lambda(mid.0, mid.1)?.exp();
        let lb = field.lambda(bv.0, bv.1)?.exp();
        seg_lengths.push(chord * (la + 4.0 * lm + lb) / 6.0);
    }
    let length_g = pairwise_sum(&seg_lengths);

    Ok(UmbilicCurve {
        chart: String::new(),
        polyline: verts.iter().map(|&(u, v, _)| (u, v)).collect(),
        closed: is_closed,
        length_g,
        max_phi_residual: max_phi,
        singular_points,
    })
}

/// Absolute `|φ|` Newton tolerance: scaled from the field magnitude.
fn newton_tolerance(field: &dyn PhiField) -> Result<f64> {
    let d = field.domain();
    let n = 16;
    let mut mags = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let u = d.u0 + (i as f64 + 0.5) / n as f64 * d.width();
            let v = d.v0 + (j as f64 + 0.5) / n as f64 * d.height();
            if near_puncture(field, u, v, 0.02 * d.width().min(d.height())) {
                continue;
            }
            mags.push(field.phi(u, v)?.v.norm());
        }
    }
    mags.sort_by(f64::total_cmp);
    Ok(1e-11 * mags[mags.len() / 2].max(1e-30))
}

fn near_puncture(field: &dyn PhiField, u: f64, v: f64, r: f64) -> bool {
    let d = field.domain();
    field.punctures().iter().any(|&(pu, pv)| {
        let (du, dv) = d.delta((u, v), (pu, pv));
        du.hypot(dv) < r
    })
}

/// Zeros of the leading (transversal) coefficient along the curve: local
/// minima of `σ₁` refined by golden-section along the tangent.
fn find_singular_points(
    field: &dyn PhiField,
    verts: &[(f64, f64, f64)],
    closed: bool,
    step: f64,
    tol: f64,
) -> Result<Vec<UmbilicPoint>> {
    let n = verts.len();
    if n < 5 {
        return Ok(Vec::new());
    }
    let mut s1s: Vec<f64> = verts.iter().map(|&(_, _, s)| s).collect();
    let mut sorted = s1s.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[n / 2];
    if median <= 0.0 {
        return Ok(Vec::new());
    }
    let d = *field.domain();
    let mut out = Vec::new();
    let idx = |i: isize| -> usize { i.rem_euclid(n as isize) as usize };
    let range: Vec<usize> = if closed { (0..n).collect() } else { (1..n - 1).collect() };
    for &i in &range {
        let (prev, next) = (s1s[idx(i as isize - 1)], s1s[idx(i as isize + 1)]);
        if !(s1s[i] <= prev && s1s[i] < next && s1s[i] < 0.05 * median) {
            continue;
        }
        // golden-section minimisation of σ₁ along the local tangent
        let (cu, cv, _) = verts[i];
        let p = field.phi(cu, cv)?;
        let t = kernel_direction(&jacobian(&p));
        let nu_dir = Vector2::new(-t.y, t.x);
        let curve_point = |x: f64| -> Option<(f64, f64)> {
            line_newton(field, (cu + x * t.x, cv + x * t.y), nu_dir, tol)
        };
        let eval = |x: f64| -> f64 {
            match curve_point(x) {
                Some((u, v)) => match field.phi(u, v) {
                    Ok(p) => jacobian(&p).svd(false, false).singular_values[0],
                    Err(_) => f64::INFINITY,
                },
                None => f64::INFINITY,
            }
        };
        let (mut a, mut b) = (-step, step);
        let gr = (5.0_f64.sqrt() - 1.0) / 2.0;
        let (mut x1, mut x2) = (b - gr * (b - a), a + gr * (b - a));
        let (mut f1, mut f2) = (eval(x1), eval(x2));
        for _ in 0..60 {
            if f1 < f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - gr * (b - a);
                f1 = eval(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + gr * (b - a);
                f2 = eval(x2);
            }
        }
        let x = 0.5 * (a + b);
        if let Some((ru, rv)) = curve_point(x) {
            let p = field.phi(ru, rv)?;
            let s1_here = jacobian(&p).svd(false, false).singular_values[0];
            if s1_here < 1e-4 * median {
                let (zu, zv) = d.wrap(ru, rv);
                // avoid probing across the singular point's own curve zero
                if out.iter().all(|p: &UmbilicPoint| {
                    let (du, dv) = d.delta((zu, zv), (p.u, p.v));
                    du.hypot(dv) > step
                }) {
                    let mut pt = classify_umbilic(field, zu, zv, step / 2.0, Some(true))?;
                    pt.u = zu;
                    pt.v = zv;
                    out.push(pt);
                }
            }
        }
        // suppress the immediate neighbours from re-triggering
        s1s[i] = f64::INFINITY;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Detection
// ---------------------------------------------------------------------------

/// Everything found in one pass over a surface (or synthetic field).
#[derive(Debug, Clone, Default)]
pub struct UmbilicReport {
    pub points: Vec<UmbilicPoint>,
    pub curves: Vec<UmbilicCurve>,
    /// Newton non-convergent candidates: `(chart, u, v)` — reported, never
    /// silently dropped
    pub unresolved: Vec<(String, f64, f64)>,
}

impl UmbilicReport {
    /// Σ n(p) over all classified points (curve singular points included).
    pub fn total_multiplicity(&self) -> i32 {
        self.points.iter().map(|p| p.n).sum::<i32>()
            + self
                .curves
                .iter()
                .flat_map(|c| c.singular_points.iter())
                .map(|p| p.n)
                .sum::<i32>()
    }
}

/// Scan one field on a `grid_n²` grid, refine candidates, trace curves,
/// classify isolated points.
pub fn detect_in_field(field: &dyn PhiField, grid_n: usize, chart_name: &str) -> Result<UmbilicReport> {
    let d = *field.domain();
    let (hu, hv) = (d.width() / grid_n as f64, d.height() / grid_n as f64);
    let h = hu.max(hv);
    let tol = newton_tolerance(field)?;

    // candidate cells: the zero set passes within ~2 cells of the node
    let nodes: Vec<(f64, f64)> = (0..grid_n)
        .flat_map(|i| (0..grid_n).map(move |j| (i, j)))
        .map(|(i, j)| (d.u0 + (i as f64 + 0.5) * hu, d.v0 + (j as f64 + 0.5) * hv))
        .filter(|&(u, v)| !near_puncture(field, u, v, 4.0 * h))
        .collect();
    let candidates: Vec<(f64, f64)> = nodes
        .par_iter()
        .filter_map(|&(u, v)| {
            let p = field.phi(u, v).ok()?;
            let grad = hu * p.du.norm() + hv * p.dv.norm();
            (p.v.norm() <= 2.0 * grad).then_some((u, v))
        })
        .collect();

    // refine (parallel); candidates where Newton stalls well away from zero
    // were scan false-positives (e.g. exponentially decaying |φ|) and are
    // dropped, genuinely borderline non-convergence stays visible
    let refined: Vec<(f64, f64, Option<NewtonOutcome>)> = candidates
        .par_iter()
        .map(|&(u, v)| (u, v, newton_full(field, u, v, tol)))
        .collect();
    let mut unresolved: Vec<(String, f64, f64)> = Vec::new();
    let mut zeros: Vec<Zero> = Vec::new();
    for (u, v, r) in refined {
        match r {
            Some(NewtonOutcome::Converged(z)) => zeros.push(z),
            Some(NewtonOutcome::Stalled(phi)) if phi > 1e3 * tol => {}
            _ => unresolved.push((chart_name.to_string(), u, v)),
        }
    }
    // deduplicate
    let mut unique: Vec<Zero> = Vec::new();
    for z in zeros {
        let dup = unique.iter().any(|w| {
            let (du, dv) = d.delta((z.u, z.v), (w.u, w.v));
            du.hypot(dv) < 1.5 * h
        });
        if !dup {
            unique.push(z);
        }
    }

    // σ-scale of the field for rank decisions
    let mut grads: Vec<f64> = Vec::with_capacity(nodes.len());
    for &(u, v) in nodes.iter().step_by(7) {
        let p = field.phi(u, v)?;
        grads.push(p.du.norm().max(p.dv.norm()));
    }
    grads.sort_by(f64::total_cmp);
    let sigma_scale = grads.get(grads.len() / 2).copied().unwrap_or(0.0);

    let step = 2.0 * h;
    let mut curves: Vec<UmbilicCurve> = Vec::new();
    let mut isolated: Vec<Zero> = Vec::new();
    let on_some_curve = |curves: &[UmbilicCurve], z: &Zero| -> bool {
        curves.iter().any(|c| {
            c.polyline.iter().any(|&(u, v)| {
                let (du, dv) = d.delta((z.u, z.v), (u, v));
                du.hypot(dv) < 1.5 * step
            })
        })
    };
    // curve seeds first (rank-1 Jacobians), then the rest
    let (curve_seeds, rest): (Vec<Zero>, Vec<Zero>) = unique
        .into_iter()
        .partition(|z| z.s1 > 1e-5 * sigma_scale && z.s2 < 1e-3 * z.s1);
    for z in &curve_seeds {
        if on_some_curve(&curves, z) {
            continue;
        }
        match trace_umbilic_curve(field, (z.u, z.v), step) {
            Ok(mut c) => {
                c.chart = chart_name.to_string();
                curves.push(c);
            }
            Err(_) => unresolved.push((chart_name.to_string(), z.u, z.v)),
        }
    }
    for z in rest {
        if !on_some_curve(&curves, &z) {
            isolated.push(z);
        }
    }

    // classify isolated points, shrinking probes near non-periodic boundaries
    let mut points = Vec::new();
    for z in isolated {
        let mut hp = h;
        if !d.periodic_u {
            hp = hp.min(((z.u - d.u0).min(d.u1 - z.u) / 17.0).max(1e-9));
        }
        if !d.periodic_v {
            hp = hp.min(((z.v - d.v0).min(d.v1 - z.v) / 17.0).max(1e-9));
        }
        match classify_umbilic(field, z.u, z.v, hp, Some(false)) {
            Ok(mut p) => {
                p.chart = chart_name.to_string();
                points.push(p);
            }
            Err(_) => unresolved.push((chart_name.to_string(), z.u, z.v)),
        }
    }
    points.sort_by(|a, b| (a.u, a.v).partial_cmp(&(b.u, b.v)).unwrap());
    Ok(UmbilicReport { points, curves, unresolved })
}

/// `true` when the tracefree curvature `|Å|_g` is at numerical noise level
/// relative to the mean-curvature scale over the whole main chart (round
/// spheres and their Möbius images).
pub fn is_totally_umbilic(surface: &SurfaceSpec) -> Result<bool> {
    let chart = surface.main_chart();
    let d = &chart.domain;
    let n = 32;
    let (mut max_a2, mut max_h) = (0.0f64, 0.0f64);
    for i in 0..n {
        for j in 0..n {
            let u = d.u0 + (i as f64 + 0.5) / n as f64 * d.width();
            let v = d.v0 + (j as f64 + 0.5) / n as f64 * d.height();
            if chart.punctures.iter().any(|&(a, b)| {
                let (du, dv) = d.delta((u, v), (a, b));
                du.hypot(dv) < 0.02 * d.width().min(d.height())
            }) {
                continue;
            }
            let fd = fundamental::fundamental(surface.ambient, &chart.eval(u, v)?, u, v)?;
            max_a2 = max_a2.max(fd.aring_norm2());
            max_h = max_h.max(fd.h.v.abs());
        }
    }
    Ok(max_a2.sqrt() < 1e-8 * (1.0 + max_h))
}

/// Detect the umbilic set of a surface across all of its charts, including
/// declared punctures (end-preimages), which are classified directly by
/// probe circles.
pub fn detect_umbilic_set(surface: &SurfaceSpec, grid_n: usize) -> Result<UmbilicReport> {
    if grid_n < 64 {
        return Err(Error::InvalidParams("umbilic detection needs grid_n ≥ 64".into()));
    }
    if is_totally_umbilic(surface)? {
        // degenerate control case: `|Å|_g` sits at noise level everywhere, so
        // there is no zero set to chase — report it empty rather than tracing
        // numerical noise
        return Ok(UmbilicReport::default());
    }
    let mut report = UmbilicReport::default();
    let mut covered: Vec<(usize, f64, f64)> = Vec::new(); // (chart idx, u, v) of accepted points
    for (ci, chart) in surface.charts.iter().enumerate() {
        let field = SurfacePhi::on_chart(surface, chart);
        // end-preimages / punctures
        for &(pu, pv) in &chart.punctures {
            let dd = &chart.domain;
            let hp = (dd.width().min(dd.height()) / 80.0).min(5e-3);
            match classify_umbilic(&field, pu, pv, hp, Some(false)) {
                Ok(mut p) => {
                    p.chart = chart.name.clone();
                    covered.push((ci, pu, pv));
                    report.points.push(p);
                }
                Err(_) => report.unresolved.push((chart.name.clone(), pu, pv)),
            }
        }
        // auxiliary charts only classify their punctures; the main chart is
        // scanned in full
        if ci == 0 {
            let mut r = detect_in_field(&field, grid_n, &chart.name)?;
            report.points.append(&mut r.points);
            report.curves.append(&mut r.curves);
            report.unresolved.append(&mut r.unresolved);
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// H-dichotomy and the geodesic / Babich–Bobenko tests
// ---------------------------------------------------------------------------

/// Behaviour of the mean curvature along an umbilic curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HDichotomy {
    /// oscillation below `1e-6·(1+|H|)`
    Constant { h: f64 },
    /// number of sign changes of `∂_τ H` around the loop (≥ 2 when
    /// non-constant on a closed curve)
    Critical { count: usize },
}

/// Classify the restriction of `H` to a traced curve.
pub fn curve_h_dichotomy(surface: &SurfaceSpec, curve: &UmbilicCurve) -> Result<HDichotomy> {
    let chart = surface
        .chart(&curve.chart)
        .unwrap_or_else(|| surface.main_chart());
    let mut hs = Vec::with_capacity(curve.polyline.len());
    for &(u, v) in &curve.polyline {
        let fd = fundamental::fundamental(surface.ambient, &chart.eval(u, v)?, u, v)?;
        hs.push(fd.h.v);
    }
    let (min, max) = hs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
        (lo.min(x), hi.max(x))
    });
    let mean_abs = pairwise_sum(&hs.iter().map(|x| x.abs()).collect::<Vec<_>>()) / hs.len() as f64;
    if max - min < 1e-6 * (1.0 + mean_abs) {
        return Ok(HDichotomy::Constant { h: 0.5 * (min + max) });
    }
    let n = hs.len();
    let dhs: Vec<f64> = (0..n).map(|i| hs[(i + 1) % n] - hs[i]).filter(|&d| d != 0.0).collect();
    let mut count = 0;
    for i in 0..dhs.len() {
        if dhs[i] * dhs[(i + 1) % dhs.len()] < 0.0 {
            count += 1;
        }
    }
    Ok(HDichotomy::Critical { count })
}

/// Result of the geodesic / Babich–Bobenko battery on one curve.
#[derive(Debug, Clone)]
pub struct BbTestReport {
    pub kg_max: f64,
    pub planar: bool,
    pub plane_normal: [f64; 3],
    /// rms distance of the curve from the fitted plane
    pub pca_rms: f64,
    pub orthogonal: bool,
    /// max |⟨plane normal, surface normal⟩| along the curve
    pub max_normal_dot: f64,
    /// `max |Φ³H + n³|` over the whole chart (≈ 0 ⇔ hyperbolic-minimal halves)
    pub h_hyp_residual: f64,
    /// conformally invariant witness `e ∈ S^{3,1}` with `η(ν,e) = η(Y,e) = 0`
    /// along the curve, when spacelike
    pub conf_e: Option<Vec5>,
    pub conf_residual: f64,
}

/// Geodesic-curvature, planarity, orthogonality and hyperbolic-minimality
/// tests for a curve on an R³-ambient surface.
pub fn geodesic_bb_test(surface: &SurfaceSpec, curve: &UmbilicCurve) -> Result<BbTestReport> {
    if surface.ambient != Ambient::R3 {
        return Err(Error::InvalidParams("geodesic/BB test requires an R³ ambient".into()));
    }
    let chart = surface
        .chart(&curve.chart)
        .unwrap_or_else(|| surface.main_chart());
    let d = chart.domain;
    let n = curve.polyline.len();

    // unwrap the polyline into a continuous coordinate path
    let mut path: Vec<(f64, f64)> = Vec::with_capacity(n);
    path.push(curve.polyline[0]);
    for i in 1..n {
        let prev = *path.last().unwrap();
        let (du, dv) = d.delta((prev.0, prev.1), curve.polyline[i]);
        path.push((prev.0 + du, prev.1 + dv));
    }

    // per-vertex data
    let mut pts3 = Vec::with_capacity(n);
    let mut normals = Vec::with_capacity(n);
    let mut lambdas = Vec::with_capacity(n);
    for &(u, v) in &curve.polyline {
        let jet = chart.eval(u, v)?;
        let fd = fundamental::fundamental(surface.ambient, &jet, u, v)?;
        pts3.push(Vector3::new(jet[0].value(), jet[1].value(), jet[2].value()));
        normals.push(Vector3::new(fd.normal[0].v, fd.normal[1].v, fd.normal[2].v));
        lambdas.push((fd.lambda.v, fd.lambda.du, fd.lambda.dv));
    }

    // geodesic curvature: k_g = e^{−λ}(k_e − ∂_ν λ), ν the left normal
    let mut kg_max = 0.0f64;
    let interior: Vec<usize> = if curve.closed { (0..n).collect() } else { (1..n - 1).collect() };
    for &i in &interior {
        let a = path[(i + n - 1) % n];
        let b = path[i];
        let c = path[(i + 1) % n];
        // near the wrap seam, re-anchor around b
        let (a, c) = if curve.closed {
            let (dau, dav) = d.delta((b.0, b.1), curve.polyline[(i + n - 1) % n]);
            let (dcu, dcv) = d.delta((b.0, b.1), curve.polyline[(i + 1) % n]);
            ((b.0 + dau, b.1 + dav), (b.0 + dcu, b.1 + dcv))
        } else {
            (a, c)
        };
        let e1 = (b.0 - a.0, b.1 - a.1);
        let e2 = (c.0 - b.0, c.1 - b.1);
        let e3 = (c.0 - a.0, c.1 - a.1);
        let (l1, l2, l3) = (e1.0.hypot(e1.1), e2.0.hypot(e2.1), e3.0.hypot(e3.1));
        if l1 * l2 * l3 == 0.0 {
            continue;
        }
        let cross = e1.0 * e2.1 - e1.1 * e2.0;
        let ke = 2.0 * cross / (l1 * l2 * l3);
        let t = (e3.0 / l3, e3.1 / l3);
        let nu = (-t.1, t.0);
        let (lam, lu, lv) = lambdas[i];
        let dnu_lambda = lu * nu.0 + lv * nu.1;
        kg_max = kg_max.max(((-lam).exp() * (ke - dnu_lambda)).abs());
    }

    // plane fit by PCA
    let centroid = pts3.iter().sum::<Vector3<f64>>() / n as f64;
    let mut cov = Matrix3::<f64>::zeros();
    for p in &pts3 {
        let q = p - centroid;
        cov += q * q.transpose();
    }
    let eig = nalgebra::SymmetricEigen::new(cov);
    let (mut imin, mut imax) = (0usize, 0usize);
    for k in 1..3 {
        if eig.eigenvalues[k] < eig.eigenvalues[imin] {
            imin = k;
        }
        if eig.eigenvalues[k] > eig.eigenvalues[imax] {
            imax = k;
        }
    }
    let pca_rms = (eig.eigenvalues[imin].max(0.0) / n as f64).sqrt();
    let spread = (eig.eigenvalues[imax].max(0.0) / n as f64).sqrt();
    let planar = pca_rms < 1e-6 * spread.max(1e-12);
    let plane_n = eig.eigenvectors.column(imin).into_owned();

    // orthogonality: the plane normal must lie in the tangent plane, i.e. be
    // η-orthogonal to the surface normal along the curve
    let mut max_dot = 0.0f64;
    for nn in &normals {
        max_dot = max_dot.max(plane_n.dot(nn).abs());
    }
    let orthogonal = max_dot < 1e-5;

    // hyperbolic-minimality witness over the whole chart
    let mut h_hyp = 0.0f64;
    let gn = 48;
    for i in 0..gn {
        for j in 1..gn {
            let u = d.u0 + (i as f64 + 0.5) / gn as f64 * d.width();
            let v = d.v0 + j as f64 / gn as f64 * d.height();
            let jet = chart.eval(u, v)?;
            let fd = fundamental::fundamental(surface.ambient, &jet, u, v)?;
            h_hyp = h_hyp.max((jet[2].value() * fd.h.v + fd.normal[2].v).abs());
        }
    }

    // conformally invariant version: η(ν, e) = η(Y, e) = 0 along the curve
    let mut a = DMatrix::<f64>::zeros(2 * n, 5);
    for (i, &(u, v)) in curve.polyline.iter().enumerate() {
        let jet = chart.eval(u, v)?;
        let fd = fundamental::fundamental(surface.ambient, &jet, u, v)?;
        let frame = crate::cgm::conformal_frame(&fd, &jet);
        for k in 0..5 {
            let sgn = if k == 4 { -1.0 } else { 1.0 };
            a[(2 * i, k)] = sgn * frame.nu.0[k];
            a[(2 * i + 1, k)] = sgn * frame.y.0[k];
        }
    }
    let svd = a.svd(false, true);
    let vt = svd.v_t.as_ref().unwrap();
    let mut imin_s = 0usize;
    for k in 1..svd.singular_values.len() {
        if svd.singular_values[k] < svd.singular_values[imin_s] {
            imin_s = k;
        }
    }
    let conf_residual = svd.singular_values[imin_s] / (2.0 * n as f64).sqrt();
    let mut e = Vec5([vt[(imin_s, 0)], vt[(imin_s, 1)], vt[(imin_s, 2)], vt[(imin_s, 3)], vt[(imin_s, 4)]]);
    let s = crate::minkowski::eta_dot(&e, &e);
    let conf_e = if s > 1e-6 {
        let inv = s.sqrt().recip();
        for x in e.0.iter_mut() {
            *x *= inv;
        }
        // fix the overall sign deterministically
        let lead = e.0.iter().cloned().fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        if lead < 0.0 {
            for x in e.0.iter_mut() {
                *x = -*x;
            }
        }
        Some(e)
    } else {
        None
    };

    Ok(BbTestReport {
        kg_max,
        planar,
        plane_normal: [plane_n.x, plane_n.y, plane_n.z],
        pca_rms,
        orthogonal,
        max_normal_dot: max_dot,
        h_hyp_residual: h_hyp,
        conf_e,
        conf_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surfaces;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn flat_domain(half: f64) -> Domain {
        Domain { u0: -half, u1: half, v0: -half, v1: half, periodic_u: false, periodic_v: false }
    }

    fn nf_on(m: i32, a: f64, b: f64, half: f64) -> SyntheticPhi<impl Fn(f64, f64) -> CD1 + Sync> {
        normal_form_field(
            Complex64::new(1.0, 0.0),
            m,
            Complex64::new(a, 0.0),
            b,
            vec![Complex64::new(0.05, -0.03), Complex64::new(-0.02, 0.06)],
            flat_domain(half),
        )
    }

    fn nf(m: i32, a: f64, b: f64) -> SyntheticPhi<impl Fn(f64, f64) -> CD1 + Sync> {
        nf_on(m, a, b, 1.0)
    }

    #[test]
    fn classifier_recovers_synthetic_types() {
        // φ = z² (pure type I with a≠0)
        let p = classify_umbilic(&nf(2, 0.5, 0.0), 0.0, 0.0, 5e-3, Some(false)).unwrap();
        assert_eq!((p.kind, p.m, p.n), (Kind::I, 2, 2));
        assert!((p.coeff_a.norm() - 0.5).abs() < 1e-3, "a = {}", p.coeff_a);

        // φ = −z̄/2i-dominated: type II, m=0, n=1
        let p = classify_umbilic(&nf(0, 0.0, 0.0), 0.0, 0.0, 5e-3, Some(false)).unwrap();
        assert_eq!((p.kind, p.m, p.n), (Kind::II, 0, 1));
        assert!(p.coeff_b.abs() < 1e-3);

        // b = 2: still type II
        let p = classify_umbilic(&nf(1, 0.0, 2.0), 0.0, 0.0, 5e-3, Some(false)).unwrap();
        assert_eq!((p.kind, p.m, p.n), (Kind::II, 1, 2));
        assert!((p.coeff_b - 2.0).abs() < 1e-3);

        // b = 1 without curve knowledge: ambiguous, never guessed
        let p = classify_umbilic(&nf(1, 0.0, 1.0), 0.0, 0.0, 5e-3, None).unwrap();
        assert_eq!(p.kind, Kind::Ambiguous);
        // with curve membership: type IV, n = m
        let p = classify_umbilic(&nf(1, 0.0, 1.0), 0.0, 0.0, 5e-3, Some(true)).unwrap();
        assert_eq!((p.kind, p.m, p.n), (Kind::IVSingular, 1, 1));
    }

    #[test]
    fn classifier_handles_end_preimages_m_minus_one() {
        // φ = z^{-1}(bz − z̄)/2i: bounded, non-vanishing, type II with n = 0
        let p = classify_umbilic(&nf(-1, 0.0, 0.5), 0.0, 0.0, 5e-3, Some(false)).unwrap();
        assert_eq!((p.kind, p.m, p.n), (Kind::II, -1, 0));
        assert!((p.coeff_b - 0.5).abs() < 1e-3);
    }

    #[test]
    fn classifier_rejects_degenerate_normal_form() {
        // holomorphic φ = z: f₀₁ = 0 violates the ∂_z̄F ≠ 0 normalisation
        let field = SyntheticPhi {
            f: |u: f64, v: f64| CD1 {
                v: Complex64::new(u, v),
                du: Complex64::new(1.0, 0.0),
                dv: Complex64::new(0.0, 1.0),
            },
            domain: flat_domain(1.0),
        };
        assert!(matches!(
            classify_umbilic(&field, 0.0, 0.0, 5e-3, Some(false)),
            Err(Error::Classification(_))
        ));
    }

    fn im_z_field(pert: f64) -> SyntheticPhi<impl Fn(f64, f64) -> CD1 + Sync> {
        // φ = Im z + pert·Im(z)² on a u-periodic flat chart
        SyntheticPhi {
            f: move |_u: f64, v: f64| CD1 {
                v: Complex64::new(v + pert * v * v, 0.0),
                du: Complex64::new(0.0, 0.0),
                dv: Complex64::new(1.0 + 2.0 * pert * v, 0.0),
            },
            domain: Domain {
                u0: 0.0,
                u1: 2.0 * PI,
                v0: -1.0,
                v1: 1.0,
                periodic_u: true,
                periodic_v: false,
            },
        }
    }

    #[test]
    fn flat_curve_is_traced_and_measured() {
        let field = im_z_field(0.0);
        let c = trace_umbilic_curve(&field, (1.0, 0.05), 0.02).unwrap();
        assert!(c.closed);
        assert!(c.max_phi_residual < 1e-12);
        assert_relative_eq!(c.length_g, 2.0 * PI, max_relative = 1e-4);
        assert!(c.singular_points.is_empty());
        for &(_, v) in &c.polyline {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn perturbed_curve_keeps_topology() {
        let field = im_z_field(0.1);
        let c = trace_umbilic_curve(&field, (0.3, 0.08), 0.02).unwrap();
        assert!(c.closed);
        assert!(c.max_phi_residual < 1e-9);
        assert_relative_eq!(c.length_g, 2.0 * PI, max_relative = 1e-3);
    }

    #[test]
    fn curve_with_singular_point_type_iv() {
        // φ = z·Im z: curve {v = 0} carrying one type-IV point at the origin
        let field = SyntheticPhi {
            f: |u: f64, v: f64| {
                let z = Complex64::new(u, v);
                CD1 {
                    v: z * v,
                    du: Complex64::new(v, 0.0),
                    dv: z + Complex64::new(0.0, v),
                }
            },
            domain: flat_domain(1.0),
        };
        let c = trace_umbilic_curve(&field, (0.5, 0.03), 0.02).unwrap();
        assert!(!c.closed); // escapes the square chart on both sides
        assert_eq!(c.singular_points.len(), 1, "{:?}", c.singular_points);
        let p = &c.singular_points[0];
        assert_eq!((p.kind, p.m, p.n), (Kind::IVSingular, 1, 1));
        assert!(p.u.hypot(p.v) < 1e-6, "singular point at ({}, {})", p.u, p.v);
    }

    #[test]
    fn detection_finds_isolated_points() {
        // shrink the window so the secondary zero of the inner factor
        // (near z = −i for these coefficients) stays outside
        // z² zero: rank-0 Jacobian, still detected and classified
        let r = detect_in_field(&nf_on(2, 0.5, 0.0, 0.35), 96, "flat").unwrap();
        assert!(r.unresolved.is_empty());
        assert!(r.curves.is_empty());
        assert_eq!(r.points.len(), 1, "{:?}", r.points);
        assert_eq!((r.points[0].kind, r.points[0].n), (Kind::I, 2));
        // quadratic zero: |φ| < tol only pins the location to O(√tol)
        assert!(r.points[0].u.hypot(r.points[0].v) < 1e-5);

        // z̄-type zero: rank-2 Jacobian
        let r = detect_in_field(&nf_on(0, 0.0, 0.0, 0.35), 96, "flat").unwrap();
        assert_eq!(r.points.len(), 1, "{:?}", r.points);
        assert_eq!((r.points[0].kind, r.points[0].n), (Kind::II, 1));
    }

    #[test]
    fn detection_finds_curves() {
        let field = im_z_field(0.1);
        let r = detect_in_field(&field, 96, "flat").unwrap();
        assert_eq!(r.curves.len(), 1);
        assert!(r.points.is_empty(), "{:?}", r.points);
        assert!(r.curves[0].closed);
    }

    #[test]
    fn clifford_has_no_umbilics() {
        let s = surfaces::clifford();
        let r = detect_umbilic_set(&s, 64).unwrap();
        assert!(r.points.is_empty() && r.curves.is_empty() && r.unresolved.is_empty());
    }

    #[test]
    fn inverted_catenoid_ends_are_type_ii_with_zero_total_multiplicity() {
        let s = surfaces::inverted_catenoid(1.0).unwrap();
        let r = detect_umbilic_set(&s, 64).unwrap();
        assert!(r.curves.is_empty());
        assert!(r.unresolved.is_empty(), "{:?}", r.unresolved);
        assert_eq!(r.points.len(), 2, "{:?}", r.points);
        for p in &r.points {
            assert_eq!((p.kind, p.m, p.n), (Kind::II, -1, 0), "{p:?}");
        }
        assert_eq!(r.total_multiplicity(), 0);
    }

    #[test]
    fn bb_annulus_crossing_circle() {
        let s = surfaces::bb_annulus(1.0, 1.0, 1.0).unwrap();
        let r = detect_umbilic_set(&s, 64).unwrap();
        assert_eq!(r.curves.len(), 1, "points {:?}, unresolved {:?}", r.points, r.unresolved);
        assert!(r.points.is_empty());
        let c = &r.curves[0];
        assert!(c.closed);
        assert!(c.singular_points.is_empty());
        // the crossing circle has Euclidean radius = neck, so g-length 2π·neck
        assert_relative_eq!(c.length_g, 2.0 * PI, max_relative = 1e-4);

        // the hyperbolic-minimal halves force |H| → 1 at the plane crossing:
        // H is constant of unit magnitude along the circle
        match curve_h_dichotomy(&s, c).unwrap() {
            HDichotomy::Constant { h } => assert!((h.abs() - 1.0).abs() < 1e-6, "H = {h}"),
            other => panic!("expected constant H, got {other:?}"),
        }

        let bb = geodesic_bb_test(&s, c).unwrap();
        assert!(bb.kg_max < 1e-5, "k_g = {}", bb.kg_max);
        assert!(bb.planar, "pca rms {}", bb.pca_rms);
        assert!(bb.orthogonal, "normal dot {}", bb.max_normal_dot);
        assert!(bb.h_hyp_residual < 1e-6, "|ζ³H + n³| = {}", bb.h_hyp_residual);
        let e = bb.conf_e.expect("spacelike witness");
        for (k, want) in [0.0, 0.0, 1.0, 0.0, 0.0].iter().enumerate() {
            assert!((e.0[k] - want).abs() < 1e-5, "e = {:?}", e);
        }
    }

    #[test]
    fn h_dichotomy_counts_critical_points() {
        // meridian loop of a non-Willmore torus: H varies, ≥ 2 extrema
        let s = surfaces::torus_rev(2.0, 1.0).unwrap();
        let d = s.main_chart().domain;
        let n = 64;
        let polyline: Vec<(f64, f64)> =
            (0..n).map(|j| (1.0, d.v0 + j as f64 / n as f64 * d.height())).collect();
        let curve = UmbilicCurve {
            chart: s.main_chart().name.clone(),
            polyline,
            closed: true,
            length_g: 0.0,
            max_phi_residual: f64::NAN,
            singular_points: Vec::new(),
        };
        match curve_h_dichotomy(&s, &curve).unwrap() {
            HDichotomy::Critical { count } => assert!(count >= 2, "count = {count}"),
            other => panic!("expected critical points, got {other:?}"),
        }
    }

    #[test]
    fn sphere_equator_sanity_for_the_geometry_kernel() {
        let s = surfaces::sphere(1.0).unwrap();
        let n = 128;
        let polyline: Vec<(f64, f64)> =
            (0..n).map(|j| (2.0 * PI * j as f64 / n as f64, 0.0)).collect();
        let curve = UmbilicCurve {
            chart: s.main_chart().name.clone(),
            polyline,
            closed: true,
            length_g: 2.0 * PI,
            max_phi_residual: f64::NAN,
            singular_points: Vec::new(),
        };
        let bb = geodesic_bb_test(&s, &curve).unwrap();
        assert!(bb.kg_max < 1e-3, "equator k_g = {}", bb.kg_max);
        assert!(bb.planar && bb.orthogonal);
    }

    #[test]
    fn latitude_circle_geodesic_curvature_oracle() {
        // latitude v₀ on the unit sphere: k_g = sinh v₀ in the conformal chart
        let s = surfaces::sphere(1.0).unwrap();
        let v0 = 0.5f64;
        let n = 256;
        let polyline: Vec<(f64, f64)> =
            (0..n).map(|j| (2.0 * PI * j as f64 / n as f64, v0)).collect();
        let curve = UmbilicCurve {
            chart: s.main_chart().name.clone(),
            polyline,
            closed: true,
            length_g: 0.0,
            max_phi_residual: f64::NAN,
            singular_points: Vec::new(),
        };
        let bb = geodesic_bb_test(&s, &curve).unwrap();
        assert_relative_eq!(bb.kg_max, v0.sinh(), max_relative = 1e-3);
        assert!(!bb.orthogonal, "plane normal e_z is not tangent off the equator");
    }
}
