//! Catalog of built-in isothermal immersions plus JSON-defined charts.
//!
//! Every chart is a map `(u, v) ↦ ambient` evaluated in order-3 jets, so the
//! downstream geometry never touches finite differences for derivatives of
//! the immersion itself.  All built-ins are given directly in isothermal
//! (conformal) coordinates — the fundamental-form module asserts this rather
//! than re-uniformizing.
//!
//! Built-ins:
//!
//! * `sphere(r)` — round sphere in the conformal cylinder chart
//!   `r(sech v cos u, sech v sin u, tanh v)`; totally umbilic control case;
//! * `clifford` — Clifford torus in `S³`, `(cos u, sin u, cos v, sin v)/√2`;
//! * `torus_rev(R, r)` — torus of revolution in closed-form isothermal
//!   coordinates; Willmore exactly when `R/r = √2` (the stereographic
//!   Clifford torus);
//! * `torus_rev_s3(R, r)` — the same surface lifted to `S³` by inverse
//!   stereographic projection (used for conformal-invariance cross-checks);
//! * `inverted_catenoid(neck)` — compact Willmore sphere `Φ = f/|f|²` with
//!   `f` a catenoid and the inversion center at the origin away from the
//!   surface; the two catenoid ends map to punctures covered by dedicated
//!   compactified end charts;
//! * `bb_annulus(neck, half_height, shape)` — surface of revolution whose
//!   upper/lower halves are minimal for the hyperbolic half-space metrics
//!   `δ/z²`, crossing `{z = 0}` orthogonally in an umbilic circle (see
//!   [`profile`]).

pub mod profile;

use crate::expr::{self, ExprAst};
use crate::jet::Jet3;
use crate::{Error, Result};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

pub use profile::{Profile, ProfilePoint};

/// Ambient space of a chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ambient {
    R3,
    S3,
}

impl Ambient {
    pub fn dim(&self) -> usize {
        match self {
            Ambient::R3 => 3,
            Ambient::S3 => 4,
        }
    }
}

/// Rectangular chart domain with optional periodic identifications.
#[derive(Debug, Clone, Copy, Deserialize)]
pub struct Domain {
    pub u0: f64,
    pub u1: f64,
    pub v0: f64,
    pub v1: f64,
    pub periodic_u: bool,
    pub periodic_v: bool,
}

impl Domain {
    pub fn width(&self) -> f64 {
        self.u1 - self.u0
    }

    pub fn height(&self) -> f64 {
        self.v1 - self.v0
    }

    /// Map a point into the fundamental rectangle along periodic axes;
    /// non-periodic coordinates pass through unchanged.
    pub fn wrap(&self, u: f64, v: f64) -> (f64, f64) {
        let mut out = (u, v);
        if self.periodic_u {
            out.0 = self.u0 + (u - self.u0).rem_euclid(self.width());
        }
        if self.periodic_v {
            out.1 = self.v0 + (v - self.v0).rem_euclid(self.height());
        }
        out
    }

    pub fn contains(&self, u: f64, v: f64, tol: f64) -> bool {
        let in_u = self.periodic_u || (u >= self.u0 - tol && u <= self.u1 + tol);
        let in_v = self.periodic_v || (v >= self.v0 - tol && v <= self.v1 + tol);
        in_u && in_v
    }

    /// Shortest displacement from `(u0,v0)` to `(u1,v1)` respecting
    /// periodicity (used for distances in chart coordinates).
    pub fn delta(&self, from: (f64, f64), to: (f64, f64)) -> (f64, f64) {
        let mut du = to.0 - from.0;
        let mut dv = to.1 - from.1;
        if self.periodic_u {
            let w = self.width();
            du -= (du / w).round() * w;
        }
        if self.periodic_v {
            let h = self.height();
            dv -= (dv / h).round() * h;
        }
        (du, dv)
    }
}

/// Jet of all ambient components at one chart point (3 for R³, 4 for S³).
#[derive(Debug, Clone, Copy)]
pub struct JetVec {
    n: usize,
    c: [Jet3; 4],
}

impl JetVec {
    pub fn new3(x: Jet3, y: Jet3, z: Jet3) -> JetVec {
        JetVec { n: 3, c: [x, y, z, Jet3::default()] }
    }

    pub fn new4(x: Jet3, y: Jet3, z: Jet3, w: Jet3) -> JetVec {
        JetVec { n: 4, c: [x, y, z, w] }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn components(&self) -> &[Jet3] {
        &self.c[..self.n]
    }
}

impl std::ops::Index<usize> for JetVec {
    type Output = Jet3;
    fn index(&self, i: usize) -> &Jet3 {
        &self.c[..self.n][i]
    }
}

type EvalFn = dyn Fn(f64, f64) -> Result<JetVec> + Send + Sync;

/// One chart of a surface: a rectangle, a jet evaluator and a possibly empty
/// list of punctures (isolated chart points the immersion does not extend
/// analytically across, e.g. end-preimages of an inverted minimal surface).
pub struct Chart {
    pub name: String,
    pub domain: Domain,
    pub punctures: Vec<(f64, f64)>,
    eval: Arc<EvalFn>,
}

impl Chart {
    pub fn from_closure(
        name: &str,
        domain: Domain,
        eval: impl Fn(f64, f64) -> Result<JetVec> + Send + Sync + 'static,
    ) -> Chart {
        Chart { name: name.into(), domain, punctures: Vec::new(), eval: Arc::new(eval) }
    }

    pub fn with_punctures(mut self, p: Vec<(f64, f64)>) -> Chart {
        self.punctures = p;
        self
    }

    /// Evaluate the jet of the immersion.  Points are wrapped along periodic
    /// axes first; querying exactly at a puncture is an error.
    pub fn eval(&self, u: f64, v: f64) -> Result<JetVec> {
        let (u, v) = self.domain.wrap(u, v);
        for &(pu, pv) in &self.punctures {
            if (u - pu).hypot(v - pv) < 1e-12 {
                return Err(Error::Eval {
                    offset: 0,
                    msg: format!("chart '{}' is punctured at ({pu}, {pv})", self.name),
                });
            }
        }
        (self.eval)(u, v)
    }
}

/// Ground-truth metadata carried by catalog surfaces.
#[derive(Default, Clone)]
pub struct SurfaceMeta {
    pub is_willmore: Option<bool>,
    pub totally_umbilic: bool,
    pub closed: bool,
    /// known tracefree energy `E = ∫|Å|² dvol`, if any
    pub known_e: Option<f64>,
    /// known Willmore energy `W = ∫H² dvol` (R³) or `∫(1+H²)` (S³), if any
    pub known_w: Option<f64>,
    /// which space-form energy identity applies (1: conformally minimal in
    /// R³, 2: minimal in S³, 3: Babich–Bobenko type), if any
    pub space_form_case: Option<u8>,
    /// the profile solution backing a surface of revolution, when one exists
    pub profile: Option<Arc<Profile>>,
}

/// A surface: ambient, charts covering the fundamental domain, topology and
/// metadata.  The first chart is the main chart used for global quadrature;
/// later charts (if any) are auxiliary classification charts around
/// punctures.
pub struct SurfaceSpec {
    pub name: String,
    pub ambient: Ambient,
    pub charts: Vec<Chart>,
    pub euler_characteristic: i32,
    pub meta: SurfaceMeta,
}

impl SurfaceSpec {
    pub fn main_chart(&self) -> &Chart {
        &self.charts[0]
    }

    pub fn chart(&self, name: &str) -> Option<&Chart> {
        self.charts.iter().find(|c| c.name == name)
    }
}

// ---------------------------------------------------------------------------
// Built-ins
// ---------------------------------------------------------------------------

/// `(id, parameter summary, description)` for every built-in.
pub fn catalog() -> Vec<(&'static str, &'static str, &'static str)> {
    vec![
        ("sphere", "r=1", "round sphere (totally umbilic control case)"),
        ("clifford", "", "Clifford torus in S³, (cos u, sin u, cos v, sin v)/√2"),
        ("torus_rev", "R=2, r=1", "torus of revolution; Willmore iff R/r = √2"),
        ("torus_rev_s3", "R=2, r=1", "torus of revolution lifted to S³"),
        ("inverted_catenoid", "neck=1", "compact Willmore sphere f/|f|², two planar end punctures"),
        (
            "bb_annulus",
            "neck=1, half_height=1, shape=1",
            "annulus of revolution, hyperbolic-minimal halves crossing {z=0} in an umbilic circle",
        ),
    ]
}

fn take_params(
    id: &str,
    params: &BTreeMap<String, f64>,
    allowed: &[(&str, f64)],
) -> Result<Vec<f64>> {
    for k in params.keys() {
        if !allowed.iter().any(|(a, _)| a == k) {
            return Err(Error::InvalidParams(format!(
                "unknown parameter '{k}' for builtin '{id}' (allowed: {})",
                allowed.iter().map(|(a, _)| *a).collect::<Vec<_>>().join(", ")
            )));
        }
    }
    Ok(allowed.iter().map(|(k, d)| params.get(*k).copied().unwrap_or(*d)).collect())
}

/// Construct a built-in surface by id with parameter overrides.
pub fn builtin(id: &str, params: &BTreeMap<String, f64>) -> Result<SurfaceSpec> {
    match id {
        "sphere" => {
            let p = take_params(id, params, &[("r", 1.0)])?;
            sphere(p[0])
        }
        "clifford" => {
            take_params(id, params, &[])?;
            Ok(clifford())
        }
        "torus_rev" => {
            let p = take_params(id, params, &[("R", 2.0), ("r", 1.0)])?;
            torus_rev(p[0], p[1])
        }
        "torus_rev_s3" => {
            let p = take_params(id, params, &[("R", 2.0), ("r", 1.0)])?;
            torus_rev_s3(p[0], p[1])
        }
        "inverted_catenoid" => {
            let p = take_params(id, params, &[("neck", 1.0)])?;
            inverted_catenoid(p[0])
        }
        "bb_annulus" => {
            let p =
                take_params(id, params, &[("neck", 1.0), ("half_height", 1.0), ("shape", 1.0)])?;
            bb_annulus(p[0], p[1], p[2])
        }
        _ => Err(Error::InvalidParams(format!(
            "unknown builtin '{id}' (known: {})",
            catalog().iter().map(|(n, _, _)| *n).collect::<Vec<_>>().join(", ")
        ))),
    }
}

/// Round sphere of radius `r` in the conformal cylinder chart
/// `Φ = r (sech v cos u, sech v sin u, −tanh v)`; `e^λ = r sech v`.  The
/// orientation makes the chart normal point inward, so with the convention
/// `A_ij = ⟨∂²_ij Φ, n⟩` the mean curvature is `H = +1/r`.
pub fn sphere(r: f64) -> Result<SurfaceSpec> {
    if !(r > 0.0) {
        return Err(Error::InvalidParams(format!("sphere needs r > 0, got {r}")));
    }
    let domain =
        Domain { u0: 0.0, u1: 2.0 * PI, v0: -10.0, v1: 10.0, periodic_u: true, periodic_v: false };
    let chart = Chart::from_closure("main", domain, move |u, v| {
        let (u, v) = (Jet3::var_u(u), Jet3::var_v(v));
        let sech = v.cosh().recip();
        Ok(JetVec::new3(
            (sech * u.cos()).scale(r),
            (sech * u.sin()).scale(r),
            v.tanh().scale(-r),
        ))
    });
    Ok(SurfaceSpec {
        name: format!("sphere(r={r})"),
        ambient: Ambient::R3,
        charts: vec![chart],
        euler_characteristic: 2,
        meta: SurfaceMeta {
            is_willmore: Some(true),
            totally_umbilic: true,
            closed: true,
            known_e: Some(0.0),
            known_w: Some(4.0 * PI),
            ..Default::default()
        },
    })
}

/// Clifford torus in `S³`: `Ψ = (cos u, sin u, cos v, sin v)/√2`;
/// `e^{2λ} = 1/2`, minimal, `|φ| = 1/2`.
pub fn clifford() -> SurfaceSpec {
    let domain =
        Domain { u0: 0.0, u1: 2.0 * PI, v0: 0.0, v1: 2.0 * PI, periodic_u: true, periodic_v: true };
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let chart = Chart::from_closure("main", domain, move |u, v| {
        let (u, v) = (Jet3::var_u(u), Jet3::var_v(v));
        Ok(JetVec::new4(u.cos().scale(s), u.sin().scale(s), v.cos().scale(s), v.sin().scale(s)))
    });
    SurfaceSpec {
        name: "clifford".into(),
        ambient: Ambient::S3,
        charts: vec![chart],
        euler_characteristic: 0,
        meta: SurfaceMeta {
            is_willmore: Some(true),
            closed: true,
            known_e: Some(4.0 * PI * PI),
            known_w: Some(2.0 * PI * PI),
            space_form_case: Some(2),
            ..Default::default()
        },
    }
}

/// Shared construction of the isothermal torus-of-revolution jet.
///
/// With `a = √(R² − r²)` the angle `θ` around the tube relates to the
/// isothermal coordinate `v` through `χ = a v / r` and
///
/// ```text
/// cos θ = (R cos χ − r)/(R − r cos χ),   R + r cos θ = a²/(R − r cos χ),
/// ```
///
/// which integrates `dv = r dθ/(R + r cos θ)` in closed form (no branch
/// cuts).  The chart is `2π`-periodic in `u` and `2πr/a`-periodic in `v`.
fn torus_rev_jet(big_r: f64, r: f64, u: f64, v: f64) -> JetVec {
    let a = (big_r * big_r - r * r).sqrt();
    let (u, v) = (Jet3::var_u(u), Jet3::var_v(v));
    let chi = v.scale(a / r);
    let dinv = (Jet3::constant(big_r) - chi.cos().scale(r)).recip();
    let rho = dinv.scale(a * a);
    // negative sign orients the chart normal toward the tube axis, giving
    // positive principal curvatures (1/r and cos θ/(R + r cos θ))
    JetVec::new3(rho * u.cos(), rho * u.sin(), (chi.sin() * dinv).scale(-r * a))
}

fn torus_domain(big_r: f64, r: f64) -> Domain {
    let a = (big_r * big_r - r * r).sqrt();
    Domain {
        u0: 0.0,
        u1: 2.0 * PI,
        v0: 0.0,
        v1: 2.0 * PI * r / a,
        periodic_u: true,
        periodic_v: true,
    }
}

fn check_torus_params(big_r: f64, r: f64) -> Result<()> {
    if !(r > 0.0) || !(big_r > r) {
        return Err(Error::InvalidParams(format!(
            "torus needs R > r > 0, got R = {big_r}, r = {r}"
        )));
    }
    Ok(())
}

/// Torus of revolution `(R, r)` in isothermal coordinates; the Willmore case
/// is `R/r = √2` (stereographic image of the Clifford torus).
pub fn torus_rev(big_r: f64, r: f64) -> Result<SurfaceSpec> {
    check_torus_params(big_r, r)?;
    let chart = Chart::from_closure("main", torus_domain(big_r, r), move |u, v| {
        Ok(torus_rev_jet(big_r, r, u, v))
    });
    let is_clifford = (big_r * big_r - 2.0 * r * r).abs() < 1e-12 * r * r;
    Ok(SurfaceSpec {
        name: format!("torus_rev(R={big_r}, r={r})"),
        ambient: Ambient::R3,
        charts: vec![chart],
        euler_characteristic: 0,
        meta: SurfaceMeta {
            is_willmore: Some(is_clifford),
            closed: true,
            known_e: is_clifford.then(|| 4.0 * PI * PI),
            known_w: is_clifford.then(|| 2.0 * PI * PI),
            space_form_case: is_clifford.then_some(2),
            ..Default::default()
        },
    })
}

/// The same torus of revolution lifted to `S³` by inverse stereographic
/// projection `Ψ = (2Φ, |Φ|² − 1)/(|Φ|² + 1)`; used to cross-check the
/// conformal invariance of `|Å|² dvol` between ambient presentations.
pub fn torus_rev_s3(big_r: f64, r: f64) -> Result<SurfaceSpec> {
    check_torus_params(big_r, r)?;
    let chart = Chart::from_closure("main", torus_domain(big_r, r), move |u, v| {
        let p = torus_rev_jet(big_r, r, u, v);
        let s2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
        let q = (s2 + Jet3::constant(1.0)).recip();
        Ok(JetVec::new4(
            (p[0] * q).scale(2.0),
            (p[1] * q).scale(2.0),
            (p[2] * q).scale(2.0),
            (s2 - Jet3::constant(1.0)) * q,
        ))
    });
    let is_clifford = (big_r * big_r - 2.0 * r * r).abs() < 1e-12 * r * r;
    Ok(SurfaceSpec {
        name: format!("torus_rev_s3(R={big_r}, r={r})"),
        ambient: Ambient::S3,
        charts: vec![chart],
        euler_characteristic: 0,
        meta: SurfaceMeta {
            is_willmore: Some(is_clifford),
            closed: true,
            known_e: is_clifford.then(|| 4.0 * PI * PI),
            space_form_case: is_clifford.then_some(2),
            ..Default::default()
        },
    })
}

/// Half-width of the square end charts of the inverted catenoid, in the
/// compactified coordinate `w` (`|w| = e^{−|v|}`); overlaps the main chart
/// for `|v| ≥ −log 0.2 ≈ 1.61`.
const END_CHART_HALFWIDTH: f64 = 0.2;

/// Compact Willmore sphere obtained by inverting a catenoid
/// `f = c (cosh v cos u, cosh v sin u, v)` through the origin: `Φ = f/|f|²`.
/// The origin is not on the catenoid; both catenoid ends map to the origin of
/// R³, i.e. to punctures of the parametrization, each covered by a dedicated
/// end chart in the holomorphic coordinate `w = e^{∓i(u+iv)}`.
pub fn inverted_catenoid(neck: f64) -> Result<SurfaceSpec> {
    if !(neck > 0.0) {
        return Err(Error::InvalidParams(format!("inverted_catenoid needs neck > 0, got {neck}")));
    }
    let c = neck;
    let main_domain =
        Domain { u0: 0.0, u1: 2.0 * PI, v0: -10.0, v1: 10.0, periodic_u: true, periodic_v: false };
    let main = Chart::from_closure("main", main_domain, move |u, v| {
        let (u, v) = (Jet3::var_u(u), Jet3::var_v(v));
        let f = [
            (v.cosh() * u.cos()).scale(c),
            (v.cosh() * u.sin()).scale(c),
            v.scale(c),
        ];
        Ok(invert_through_origin(f))
    });
    // end charts: w = e^{v − iu} (lower end, v → −∞) and w = e^{−v + iu}
    // (upper end); both holomorphic in z = u + iv, so the charts stay
    // isothermal and orientation-compatible.  In w-coordinates
    //   lower: f₁ + i f₂ = c (w̄ + 1/w)/2,  f₃ = c log|w|,
    //   upper: f₁ + i f₂ = c (w + 1/w̄)/2,  f₃ = −c log|w|.
    let end = move |sign: f64| {
        move |u: f64, v: f64| -> Result<JetVec> {
            let (u, v) = (Jet3::var_u(u), Jet3::var_v(v));
            let r2 = u * u + v * v;
            let grow = Jet3::constant(1.0) + r2.recip();
            let f = [
                (u * grow).scale(0.5 * c),
                (v * grow).scale(0.5 * sign * c),
                r2.ln().scale(-0.5 * sign * c),
            ];
            Ok(invert_through_origin(f))
        }
    };
    let w = END_CHART_HALFWIDTH;
    let end_domain =
        Domain { u0: -w, u1: w, v0: -w, v1: w, periodic_u: false, periodic_v: false };
    let lower =
        Chart::from_closure("end_lower", end_domain, end(-1.0)).with_punctures(vec![(0.0, 0.0)]);
    let upper =
        Chart::from_closure("end_upper", end_domain, end(1.0)).with_punctures(vec![(0.0, 0.0)]);
    Ok(SurfaceSpec {
        name: format!("inverted_catenoid(neck={neck})"),
        ambient: Ambient::R3,
        charts: vec![main, lower, upper],
        euler_characteristic: 2,
        meta: SurfaceMeta {
            is_willmore: Some(true),
            closed: true,
            known_e: Some(8.0 * PI),
            known_w: Some(8.0 * PI),
            space_form_case: Some(1),
            ..Default::default()
        },
    })
}

fn invert_through_origin(f: [Jet3; 3]) -> JetVec {
    let q = (f[0] * f[0] + f[1] * f[1] + f[2] * f[2]).recip();
    JetVec::new3(f[0] * q, f[1] * q, f[2] * q)
}

/// Annulus of revolution whose halves are minimal for the hyperbolic
/// half-space metrics `δ/z²`, crossing `{z = 0}` orthogonally along the
/// umbilic circle `{v = 0}` of radius `neck`.  `half_height` is the chart
/// half-range in the isothermal profile parameter, `shape` the branch
/// parameter of the singular crossing (see [`profile`]).
pub fn bb_annulus(neck: f64, half_height: f64, shape: f64) -> Result<SurfaceSpec> {
    let prof = Arc::new(Profile::build(neck, shape, half_height)?);
    let domain = Domain {
        u0: 0.0,
        u1: 2.0 * PI,
        v0: -half_height,
        v1: half_height,
        periodic_u: true,
        periodic_v: false,
    };
    let p = prof.clone();
    let chart = Chart::from_closure("main", domain, move |u, v| {
        let q = p.query(v)?;
        let (rho, z) = (q.rho_jet(), q.z_jet());
        let u = Jet3::var_u(u);
        Ok(JetVec::new3(rho * u.cos(), rho * u.sin(), z))
    });
    Ok(SurfaceSpec {
        name: format!("bb_annulus(neck={neck}, half_height={half_height}, shape={shape})"),
        ambient: Ambient::R3,
        charts: vec![chart],
        euler_characteristic: 0,
        meta: SurfaceMeta {
            is_willmore: Some(true),
            closed: false,
            space_form_case: Some(3),
            profile: Some(prof),
            ..Default::default()
        },
    })
}

// ---------------------------------------------------------------------------
// JSON surface definitions
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct BuiltinRef {
    id: String,
    #[serde(default)]
    params: BTreeMap<String, f64>,
}

#[derive(Deserialize)]
struct SurfaceFile {
    name: Option<String>,
    ambient: Option<String>,
    domain: Option<Domain>,
    components: Option<Vec<String>>,
    euler_characteristic: Option<i32>,
    builtin: Option<BuiltinRef>,
}

/// Load a surface definition from JSON text: either a `builtin` reference
/// (id + params) or an explicit expression chart with `ambient`, `domain`,
/// `components` and `euler_characteristic`.
pub fn from_json(text: &str) -> Result<SurfaceSpec> {
    let file: SurfaceFile = serde_json::from_str(text)?;
    if let Some(b) = file.builtin {
        return builtin(&b.id, &b.params);
    }
    let missing = |what: &str| Error::MissingMetadata(format!("surface file lacks '{what}'"));
    let ambient = match file.ambient.as_deref() {
        Some("R3") => Ambient::R3,
        Some("S3") => Ambient::S3,
        Some(other) => {
            return Err(Error::InvalidParams(format!(
                "ambient must be \"R3\" or \"S3\", got \"{other}\""
            )))
        }
        None => return Err(missing("ambient")),
    };
    let domain = file.domain.ok_or_else(|| missing("domain"))?;
    if !(domain.u1 > domain.u0) || !(domain.v1 > domain.v0) {
        return Err(Error::InvalidParams("domain rectangle is empty".into()));
    }
    let components = file.components.ok_or_else(|| missing("components"))?;
    if components.len() != ambient.dim() {
        return Err(Error::InvalidParams(format!(
            "{} components given, ambient {:?} needs {}",
            components.len(),
            ambient,
            ambient.dim()
        )));
    }
    let chi = file.euler_characteristic.ok_or_else(|| missing("euler_characteristic"))?;
    let asts: Vec<ExprAst> =
        components.iter().map(|s| expr::parse_expression(s)).collect::<Result<_>>()?;
    let chart = Chart::from_closure("main", domain, move |u, v| {
        let mut c = [Jet3::default(); 4];
        for (k, ast) in asts.iter().enumerate() {
            c[k] = expr::eval_jet3(ast, u, v)?;
        }
        Ok(JetVec { n: asts.len(), c })
    });
    Ok(SurfaceSpec {
        name: file.name.unwrap_or_else(|| "json-surface".into()),
        ambient,
        charts: vec![chart],
        euler_characteristic: chi,
        meta: SurfaceMeta { closed: domain.periodic_u && domain.periodic_v, ..Default::default() },
    })
}

/// Load a surface definition from a file path.
pub fn load(path: &std::path::Path) -> Result<SurfaceSpec> {
    from_json(&std::fs::read_to_string(path)?)
}
