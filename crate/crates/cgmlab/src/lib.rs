//! Numerical laboratory for Willmore surfaces seen through their conformal
//! Gauss map `Y : Σ → S^{3,1}`.
//!
//! The pipeline is organised bottom-up:
//!
//! * [`minkowski`] — linear algebra of `R^{4,1}` and the de Sitter quadric;
//! * [`jet`] / [`expr`] — order-3 truncated Taylor (jet) arithmetic in two
//!   chart variables, and a tiny expression language evaluated in jets;
//! * [`surfaces`] — catalog of built-in isothermal immersions (sphere,
//!   Clifford torus in both presentations, inverted catenoid, hyperbolic
//!   minimal annulus of revolution) plus JSON-defined charts;
//! * [`fundamental`] — fundamental forms, mean curvature, traceless part
//!   `φ = Å₁₁ − iÅ₁₂` and their first complex derivatives, all analytic
//!   (no finite differences);
//! * [`cgm`] — the conformal Gauss map, Bryant's quartic by two independent
//!   routes, curvatures of `g_Y` and every structure-equation residual;
//! * [`umbilic`] — detection, classification (types I–IV with multiplicities)
//!   and tracing of the umbilic set `{φ = 0}`;
//! * [`gaussbonnet`] — ε-tube machinery for the renormalised Gauss–Bonnet
//!   expansion `∫_{Σ∖U_ε} K_Y = Σ 2L/ε + 2πχ + 2πΣnᵢ + O(ε|log ε|)`;
//! * [`energies`] — Willmore energies and the space-form identities.

pub mod cgm;
pub mod energies;
pub mod expr;
pub mod fundamental;
pub mod gaussbonnet;
pub mod jet;
pub mod minkowski;
pub mod numerics;
pub mod report;
pub mod surfaces;
pub mod umbilic;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error at byte {offset}: {msg}")]
    Parse { offset: usize, msg: String },
    #[error("evaluation error at byte {offset}: {msg}")]
    Eval { offset: usize, msg: String },
    #[error("degenerate metric (det g = {det:.3e}) — not an immersion at ({u:.6}, {v:.6})")]
    DegenerateMetric { u: f64, v: f64, det: f64 },
    #[error("chart is not isothermal at ({u:.6}, {v:.6}): |g11-g22|+|g12| = {defect:.3e}")]
    NotIsothermal { u: f64, v: f64, defect: f64 },
    #[error("point off S³: | |Ψ|² − 1 | = {defect:.3e}")]
    OffSphere { defect: f64 },
    #[error("point too close to the umbilic set: |φ|e^{{-λ}} = {value:.3e} below floor {floor:.3e}")]
    UmbilicProximity { value: f64, floor: f64 },
    #[error("stencil of half-width {halfwidth:.3e} does not fit inside the chart at ({u:.6}, {v:.6})")]
    StencilOutOfChart { u: f64, v: f64, halfwidth: f64 },
    #[error("invalid surface parameters: {0}")]
    InvalidParams(String),
    #[error("profile ODE failure: {0}")]
    ProfileOde(String),
    #[error("quadrature failure: {0}")]
    Quadrature(String),
    #[error("classification failure: {0}")]
    Classification(String),
    #[error("ill-conditioned fit: {0}")]
    IllConditioned(String),
    #[error("missing metadata: {0}")]
    MissingMetadata(String),
    #[error("totally umbilic surface: {0}")]
    TotallyUmbilic(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
