//! Report assembly: the machine-readable CSV/JSON artifacts emitted by the
//! command-line front end, plus the human-readable energy summary.
//!
//! All writers are deterministic: grids are traversed in row-major order,
//! parallel reductions use pairwise summation upstream, and JSON maps keep
//! insertion order, so repeated runs with the same inputs produce
//! byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::cgm::{self, Probe};
use crate::energies::{Case3Report, EnergyReport, IdentityCheck};
use crate::gaussbonnet::{stencil_probe, ExpansionFit, GaussBonnetRun};
use crate::surfaces::{Ambient, SurfaceSpec};
use crate::umbilic::{self, HDichotomy, UmbilicReport};
use crate::Result;

/// Maximum harmonicity residual below which a surface is reported Willmore.
pub const WILLMORE_RESIDUAL_FLOOR: f64 = 1e-3;

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// Serialize `value` as pretty JSON (insertion-ordered) into `path`.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

// ---------------------------------------------------------------------------
// Field dump (fields.csv)
// ---------------------------------------------------------------------------

/// One grid node of the field dump.
struct FieldRow {
    u: f64,
    v: f64,
    lambda: f64,
    h_mean: f64,
    phi_re: f64,
    phi_im: f64,
    e2rho: f64,
    ky: f64,
    kyperp: f64,
    res_harmonicity: f64,
    res_q_holomorphy: f64,
    res_max: f64,
}

/// Maximum harmonicity residual over a coarse sample of the main chart
/// (umbilic-proximate nodes skipped).  This is the Willmore detector used by
/// the energy report.
pub fn harmonicity_residual(surface: &SurfaceSpec, n: usize) -> Result<f64> {
    let chart = surface.main_chart();
    let dom = &chart.domain;
    let h0 = (dom.width().min(dom.height()) / 400.0).clamp(1e-4, 2e-2);
    let floor = cgm::umbilic_floor(&Probe::new(surface.ambient, chart, h0))?;
    let maxima = (0..n)
        .into_par_iter()
        .map(|i| {
            let u = dom.u0 + (i as f64 + 0.5) / n as f64 * dom.width();
            let mut best: f64 = 0.0;
            for j in 0..n {
                let v = dom.v0 + (j as f64 + 0.5) / n as f64 * dom.height();
                let (p, u, v) = stencil_probe(surface.ambient, chart, u, v, h0);
                match cgm::curvature_fields(&p, u, v, floor) {
                    Ok(cf) => best = best.max(cf.residuals.harmonicity),
                    Err(crate::Error::UmbilicProximity { .. }) => continue,
                    Err(e) => return Err(e),
                }
            }
            Ok(best)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(maxima.into_iter().fold(0.0, f64::max))
}

/// Write the per-node field dump for the main chart: fundamental data,
/// conformal-Gauss-map curvatures and structure-equation residuals.  Nodes
/// inside the umbilic proximity mask carry NaN curvatures.
pub fn write_fields_csv(surface: &SurfaceSpec, grid_n: usize, path: &Path) -> Result<()> {
    let chart = surface.main_chart();
    let dom = &chart.domain;
    let nu = grid_n.max(8);
    let aspect = dom.height() / dom.width();
    let nv = ((nu as f64 * aspect).round() as usize).clamp(8, 4 * nu);
    let h0 = (dom.width().min(dom.height()) / 400.0).clamp(1e-4, 2e-2);
    let floor = cgm::umbilic_floor(&Probe::new(surface.ambient, chart, h0))?;

    let rows: Vec<Vec<FieldRow>> = (0..nu)
        .into_par_iter()
        .map(|i| {
            let u = dom.u0 + (i as f64 + 0.5) / nu as f64 * dom.width();
            let mut out = Vec::with_capacity(nv);
            for j in 0..nv {
                let v = dom.v0 + (j as f64 + 0.5) / nv as f64 * dom.height();
                let (p, ua, va) = stencil_probe(surface.ambient, chart, u, v, h0);
                let fd = p.fd(ua, va)?;
                let mut row = FieldRow {
                    u,
                    v,
                    lambda: fd.lambda.v,
                    h_mean: fd.h.v,
                    phi_re: fd.phi.v.re,
                    phi_im: fd.phi.v.im,
                    e2rho: f64::NAN,
                    ky: f64::NAN,
                    kyperp: f64::NAN,
                    res_harmonicity: f64::NAN,
                    res_q_holomorphy: f64::NAN,
                    res_max: f64::NAN,
                };
                match cgm::curvature_fields(&p, ua, va, floor) {
                    Ok(cf) => {
                        row.e2rho = cf.e2rho;
                        row.ky = cf.ky;
                        row.kyperp = cf.kyperp;
                        row.res_harmonicity = cf.residuals.harmonicity;
                        row.res_q_holomorphy = cf.residuals.q_holomorphy;
                        row.res_max = cf.residuals.max();
                    }
                    Err(crate::Error::UmbilicProximity { .. }) => {}
                    Err(e) => return Err(e),
                }
                out.push(row);
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut text = String::with_capacity(64 * nu * nv);
    text.push_str(
        "u,v,lambda,h_mean,phi_re,phi_im,e2rho,ky,kyperp,res_harmonicity,res_q_holomorphy,res_max\n",
    );
    for band in &rows {
        for r in band {
            let _ = writeln!(
                text,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                r.u,
                r.v,
                r.lambda,
                r.h_mean,
                r.phi_re,
                r.phi_im,
                r.e2rho,
                r.ky,
                r.kyperp,
                r.res_harmonicity,
                r.res_q_holomorphy,
                r.res_max
            );
        }
    }
    write_text(path, &text)
}

// ---------------------------------------------------------------------------
// Umbilic report (umbilic.json)
// ---------------------------------------------------------------------------

#[derive(Serialize)]
pub struct PointJson {
    pub chart: String,
    pub u: f64,
    pub v: f64,
    pub kind: String,
    pub m: i32,
    pub n: i32,
    pub coeff_c: [f64; 2],
    pub coeff_a: [f64; 2],
    pub coeff_b: f64,
    pub fit_residual: f64,
}

#[derive(Serialize)]
pub struct CurveJson {
    pub chart: String,
    pub closed: bool,
    pub n_vertices: usize,
    pub length_g: f64,
    pub max_phi_residual: f64,
    /// maximum geodesic curvature along the traced curve (R³ surfaces only)
    pub k_g_max: Option<f64>,
    pub planar: Option<bool>,
    pub orthogonal: Option<bool>,
    pub geodesic: Option<bool>,
    pub h_hyp_residual: Option<f64>,
    /// `"constant(h)"` or `"critical(count)"` behaviour of `H` along the curve
    pub h_dichotomy: String,
    pub singular_points: Vec<PointJson>,
    pub polyline: Vec<[f64; 2]>,
}

#[derive(Serialize)]
pub struct UnresolvedJson {
    pub chart: String,
    pub u: f64,
    pub v: f64,
}

#[derive(Serialize)]
pub struct UmbilicJson {
    pub surface: String,
    pub grid: usize,
    pub seed: u64,
    /// normal orientation convention (`φ` flips sign with it)
    pub orientation: String,
    pub total_multiplicity: i32,
    pub points: Vec<PointJson>,
    pub curves: Vec<CurveJson>,
    pub unresolved: Vec<UnresolvedJson>,
}

fn point_json(p: &umbilic::UmbilicPoint) -> PointJson {
    PointJson {
        chart: p.chart.clone(),
        u: p.u,
        v: p.v,
        kind: format!("{:?}", p.kind),
        m: p.m,
        n: p.n,
        coeff_c: [p.coeff_c.re, p.coeff_c.im],
        coeff_a: [p.coeff_a.re, p.coeff_a.im],
        coeff_b: p.coeff_b,
        fit_residual: p.fit_residual,
    }
}

/// Assemble the umbilic JSON report, running the geodesic battery and the
/// mean-curvature dichotomy on every traced curve.
pub fn umbilic_json(
    surface: &SurfaceSpec,
    rep: &UmbilicReport,
    grid: usize,
    seed: u64,
) -> Result<UmbilicJson> {
    let mut curves = Vec::with_capacity(rep.curves.len());
    for c in &rep.curves {
        let dichotomy = match umbilic::curve_h_dichotomy(surface, c)? {
            HDichotomy::Constant { h } => format!("constant({h:.6})"),
            HDichotomy::Critical { count } => format!("critical({count})"),
        };
        let (k_g_max, planar, orthogonal, geodesic, h_hyp_residual) =
            if surface.ambient == Ambient::R3 {
                let bb = umbilic::geodesic_bb_test(surface, c)?;
                (
                    Some(bb.kg_max),
                    Some(bb.planar),
                    Some(bb.orthogonal),
                    Some(bb.kg_max < 1e-3),
                    Some(bb.h_hyp_residual),
                )
            } else {
                (None, None, None, None, None)
            };
        curves.push(CurveJson {
            chart: c.chart.clone(),
            closed: c.closed,
            n_vertices: c.polyline.len(),
            length_g: c.length_g,
            max_phi_residual: c.max_phi_residual,
            k_g_max,
            planar,
            orthogonal,
            geodesic,
            h_hyp_residual,
            h_dichotomy: dichotomy,
            singular_points: c.singular_points.iter().map(point_json).collect(),
            polyline: c.polyline.iter().map(|&(u, v)| [u, v]).collect(),
        });
    }
    Ok(UmbilicJson {
        surface: surface.name.clone(),
        grid,
        seed,
        orientation: "n = du x dv / |du x dv|".into(),
        total_multiplicity: rep.total_multiplicity(),
        points: rep.points.iter().map(point_json).collect(),
        curves,
        unresolved: rep
            .unresolved
            .iter()
            .map(|(chart, u, v)| UnresolvedJson { chart: chart.clone(), u: *u, v: *v })
            .collect(),
    })
}

// ---------------------------------------------------------------------------
// Gauss–Bonnet sweep (sweep.csv + fit.json)
// ---------------------------------------------------------------------------

/// Write the ε-sweep table: one row per ladder value.
pub fn write_sweep_csv(run: &GaussBonnetRun, path: &Path) -> Result<()> {
    let mut text = String::from("eps,integral,boundary_flux,clipped_area\n");
    for r in &run.rows {
        let _ = writeln!(text, "{},{},{},{}", r.eps, r.integral, r.boundary_flux, r.clipped_area);
    }
    write_text(path, &text)
}

#[derive(Serialize)]
pub struct FitCoeffsJson {
    pub c1: f64,
    pub c0: f64,
    pub c_log: f64,
    pub c_lin: f64,
    pub residual: f64,
    pub condition: f64,
}

fn fit_json(fit: &ExpansionFit) -> FitCoeffsJson {
    FitCoeffsJson {
        c1: fit.c1,
        c0: fit.c0,
        c_log: fit.c_log,
        c_lin: fit.c_lin,
        residual: fit.rms_residual,
        condition: fit.condition,
    }
}

#[derive(Serialize)]
pub struct GaussBonnetJson {
    pub surface: String,
    pub seed: u64,
    pub c1: f64,
    pub c0: f64,
    pub c_log: f64,
    pub residual: f64,
    pub expected_c1: f64,
    pub expected_c0: f64,
    pub verdict: String,
    /// fit of the renormalised curvature integral `∫_{Σ∖U_ε} K_Y dvol`
    pub integral_fit: FitCoeffsJson,
    /// fit of the boundary conformal-factor flux (its `c1` isolates `2ΣL`)
    pub flux_fit: FitCoeffsJson,
}

/// Assemble the fit JSON for a completed sweep.
pub fn gauss_bonnet_json(surface: &SurfaceSpec, run: &GaussBonnetRun, seed: u64) -> GaussBonnetJson {
    GaussBonnetJson {
        surface: surface.name.clone(),
        seed,
        c1: run.fit.c1,
        c0: run.fit.c0,
        c_log: run.fit.c_log,
        residual: run.fit.rms_residual,
        expected_c1: run.expected_c1,
        expected_c0: run.expected_c0,
        verdict: run.verdict.clone(),
        integral_fit: fit_json(&run.fit),
        flux_fit: fit_json(&run.flux_fit),
    }
}

// ---------------------------------------------------------------------------
// Energy report (energy.json + stdout summary)
// ---------------------------------------------------------------------------

#[derive(Serialize)]
pub struct IdentityCheckJson {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

#[derive(Serialize)]
pub struct RenormalizedAreaJson {
    /// `(ε, 𝓐(ε))` table: truncated hyperbolic area minus the `2/ε` pole
    pub sweep: Vec<[f64; 2]>,
    /// pairwise Richardson extrapolations of consecutive sweep rows
    pub extrapolated: Vec<f64>,
    pub limit: f64,
    /// largest consecutive difference over the converged tail
    pub tail_diff: f64,
    /// Euclidean length of the image of the crossing circle in `{x³ = 0}`
    pub crossing_length_euclidean: f64,
    /// intrinsic (g) length of the crossing circle, when traced
    pub crossing_length_g: Option<f64>,
    pub pointwise_quartic_residual: f64,
}

#[derive(Serialize)]
pub struct EnergyJson {
    pub surface: String,
    pub grid: usize,
    pub seed: u64,
    pub chi: i32,
    /// tracefree energy `∫ |Å|² dvol`
    pub e: f64,
    /// Willmore energy `∫ H² dvol` (R³) or `∫ (1 + H²) dvol` (S³)
    pub w: f64,
    pub area: f64,
    /// open surface: energies cover the truncated chart only
    pub partial: bool,
    pub willmore: bool,
    pub harmonicity_residual: f64,
    pub identity_checks: Vec<IdentityCheckJson>,
    pub conformal_volume: Option<f64>,
    pub renormalized_area: Option<RenormalizedAreaJson>,
}

fn identity_json(name: &str, c: &IdentityCheck) -> IdentityCheckJson {
    IdentityCheckJson { name: name.into(), lhs: c.lhs, rhs: c.rhs, gap: c.gap }
}

/// Assemble the full energy report.  Identity checks cover the Euler relation
/// (closed surfaces) and whichever space-form identity the catalog metadata
/// declares; case 3 additionally fills the renormalized-area table.
pub fn energy_json(
    surface: &SurfaceSpec,
    rep: &EnergyReport,
    umb: Option<&UmbilicReport>,
    case3: Option<&Case3Report>,
    grid: usize,
    seed: u64,
) -> Result<EnergyJson> {
    let residual = harmonicity_residual(surface, 24)?;
    let mut checks = Vec::new();
    if !rep.partial {
        let chi = surface.euler_characteristic as f64;
        let rhs = 2.0 * rep.w - 4.0 * std::f64::consts::PI * chi;
        checks.push(IdentityCheckJson {
            name: "euler: E = 2W - 4*pi*chi".into(),
            lhs: rep.e,
            rhs,
            gap: (rep.e - rhs).abs(),
        });
    }
    let mut conformal_volume = None;
    let mut renormalized_area = None;
    match surface.meta.space_form_case {
        Some(1) => {
            if let Some(umb) = umb {
                let c = crate::energies::space_form_case1(surface, umb, grid)?;
                checks.push(identity_json("case 1: E = 4*pi*(chi + sum n_i)", &c));
            }
        }
        Some(2) => {
            let c = crate::energies::space_form_case2(surface, grid)?;
            conformal_volume = Some((c.rhs + 4.0 * std::f64::consts::PI
                * surface.euler_characteristic as f64)
                / 2.0);
            checks.push(identity_json("case 2: E = 2*V_c - 4*pi*chi", &c));
        }
        Some(3) => {
            if let Some(c3) = case3 {
                renormalized_area = Some(RenormalizedAreaJson {
                    sweep: c3.sweep.iter().map(|&(e, a)| [e, a]).collect(),
                    extrapolated: c3.extrapolated.clone(),
                    limit: c3.limit,
                    tail_diff: c3.tail_diff,
                    crossing_length_euclidean: c3.crossing_length,
                    crossing_length_g: umb
                        .and_then(|u| u.curves.first())
                        .map(|c| c.length_g),
                    pointwise_quartic_residual: c3.pointwise_residual,
                });
            }
        }
        _ => {}
    }
    Ok(EnergyJson {
        surface: surface.name.clone(),
        grid,
        seed,
        chi: surface.euler_characteristic,
        e: rep.e,
        w: rep.w,
        area: rep.area,
        partial: rep.partial,
        willmore: residual < WILLMORE_RESIDUAL_FLOOR,
        harmonicity_residual: residual,
        identity_checks: checks,
        conformal_volume,
        renormalized_area,
    })
}

/// Human-readable summary table printed to standard output by the CLI.
pub fn energy_summary(e: &EnergyJson) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "surface            {}", e.surface);
    let _ = writeln!(s, "euler char         {}", e.chi);
    let _ = writeln!(
        s,
        "willmore           {} (max harmonicity residual {:.3e})",
        if e.willmore { "yes" } else { "NO" },
        e.harmonicity_residual
    );
    let _ = writeln!(s, "tracefree E        {:.9}{}", e.e, if e.partial { "  (truncated chart)" } else { "" });
    let _ = writeln!(s, "willmore W         {:.9}", e.w);
    let _ = writeln!(s, "area               {:.9}", e.area);
    if let Some(v) = e.conformal_volume {
        let _ = writeln!(s, "conformal volume   {v:.9}");
    }
    for c in &e.identity_checks {
        let _ = writeln!(s, "identity  {:<32} lhs {:+.6e}  rhs {:+.6e}  gap {:.3e}", c.name, c.lhs, c.rhs, c.gap);
    }
    if let Some(r) = &e.renormalized_area {
        let _ = writeln!(
            s,
            "renormalized area  limit {:.6}  tail diff {:.3e}  crossing length (euclidean) {:.6}",
            r.limit, r.tail_diff, r.crossing_length_euclidean
        );
    }
    s
}
