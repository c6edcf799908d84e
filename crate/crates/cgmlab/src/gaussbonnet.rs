//! Gauss–Bonnet with boundary around the umbilic set.
//!
//! Pieces: a fast-marching geodesic distance field to the umbilic set, the
//! nested family of ε-neighbourhoods (coordinate disks around isolated points,
//! geodesic tubes around curves), masked quadrature of `K_Y e^{2ρ}` outside
//! the family, the boundary flux `∮ ∂_ν ρ` extracted by marching squares on
//! the ε-level set, the four-term ε-expansion fit
//! `c₁/ε + c₀ + c_log ε log ε + c_lin ε`, and the two-route renormalized
//! energy that ties them together.

use crate::cgm::{self, Probe};
use crate::fundamental;
use crate::numerics::{lsq_svd, pairwise_sum, trapezoid_weights};
use crate::surfaces::{Ambient, Chart, Domain, SurfaceSpec};
use crate::umbilic::{PhiField, SurfacePhi, UmbilicReport};
use crate::{Error, Result};
use rayon::prelude::*;
use std::cmp::Reverse;
use std::collections::BinaryHeap;

// ---------------------------------------------------------------------------
// Geodesic distance field (fast marching)
// ---------------------------------------------------------------------------

/// Geodesic distance to the umbilic set, sampled on a uniform chart grid.
/// Nodes never reached by the march (distance above the requested horizon)
/// hold `+∞`.
#[derive(Debug, Clone)]
pub struct DistanceField {
    pub domain: Domain,
    pub nu: usize,
    pub nv: usize,
    pub hu: f64,
    pub hv: f64,
    /// row-major `[j * nu + i]`
    pub d: Vec<f64>,
}

impl DistanceField {
    fn node_u(&self, i: usize) -> f64 {
        self.domain.u0 + i as f64 * self.hu
    }

    fn node_v(&self, j: usize) -> f64 {
        self.domain.v0 + j as f64 * self.hv
    }

    /// Bilinear sample with periodic wrap; `+∞` if any participating node is
    /// beyond the marched horizon.
    pub fn sample(&self, u: f64, v: f64) -> f64 {
        let (u, v) = self.domain.wrap(u, v);
        let x = (u - self.domain.u0) / self.hu;
        let y = ((v - self.domain.v0) / self.hv).clamp(0.0, (self.nv - 1) as f64);
        let i0 = (x.floor() as isize).rem_euclid(self.nu as isize) as usize;
        let j0 = (y.floor() as usize).min(self.nv - 2);
        let fx = x - x.floor();
        let fy = y - j0 as f64;
        let i1 = if self.domain.periodic_u { (i0 + 1) % self.nu } else { (i0 + 1).min(self.nu - 1) };
        let g = |i: usize, j: usize| self.d[j * self.nu + i];
        let c = [g(i0, j0), g(i1, j0), g(i0, j0 + 1), g(i1, j0 + 1)];
        if c.iter().any(|x| !x.is_finite()) {
            return f64::INFINITY;
        }
        c[0] * (1.0 - fx) * (1.0 - fy) + c[1] * fx * (1.0 - fy) + c[2] * (1.0 - fx) * fy + c[3] * fx * fy
    }

    /// Gradient of the sampled distance by central differences (chart units).
    fn grad(&self, u: f64, v: f64) -> (f64, f64) {
        let du = 0.5 * self.hu;
        let dv = 0.5 * self.hv;
        let gu = (self.sample(u + du, v) - self.sample(u - du, v)) / (2.0 * du);
        let gv = (self.sample(u, v + dv) - self.sample(u, v - dv)) / (2.0 * dv);
        (gu, gv)
    }
}

/// Source geometry for a distance field: polylines and isolated points in one
/// chart.
#[derive(Debug, Clone, Default)]
pub struct SourceSet {
    pub curves: Vec<Vec<(f64, f64)>>,
    pub points: Vec<(f64, f64)>,
}

impl SourceSet {
    /// Everything the report places in the named chart.
    pub fn from_report(report: &UmbilicReport, chart_name: &str) -> SourceSet {
        SourceSet {
            curves: report
                .curves
                .iter()
                .filter(|c| c.chart == chart_name)
                .map(|c| {
                    let mut p = c.polyline.clone();
                    if c.closed {
                        if let Some(&first) = p.first() {
                            p.push(first); // include the wrap-around segment
                        }
                    }
                    p
                })
                .collect(),
            points: report
                .points
                .iter()
                .filter(|p| p.chart == chart_name)
                .map(|p| (p.u, p.v))
                .collect(),
        }
    }

}

/// Euclidean chart distance from `p` to the segment `a`–`b` (shortest
/// periodic representative).
fn segment_distance(dom: &Domain, p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (ax, ay) = dom.delta(p, a);
    let (bx, by) = dom.delta(p, b);
    let (ex, ey) = (bx - ax, by - ay);
    let l2 = ex * ex + ey * ey;
    let t = if l2 > 0.0 { (-(ax * ex + ay * ey) / l2).clamp(0.0, 1.0) } else { 0.0 };
    let (cx, cy) = (ax + t * ex, ay + t * ey);
    (cx * cx + cy * cy).sqrt()
}

#[derive(PartialEq)]
struct HeapItem {
    d: f64,
    idx: usize,
}

impl Eq for HeapItem {}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.d.total_cmp(&other.d).then(self.idx.cmp(&other.idx))
    }
}

/// First-order fast-marching solve of `|∇d| = e^{λ}` on a uniform grid, with
/// exact initialization in a band around the sources and an early stop once
/// the wavefront passes `d_max`.
fn eikonal_march(
    dom: &Domain,
    lam: &[f64],
    nu: usize,
    nv: usize,
    hu: f64,
    hv: f64,
    sources: &SourceSet,
    d_max: f64,
) -> Vec<f64> {
    let mut d = vec![f64::INFINITY; nu * nv];
    let mut heap: BinaryHeap<Reverse<HeapItem>> = BinaryHeap::new();
    let band = 2.5 * hu.max(hv);

    // exact (frozen-metric) initialization near every source primitive
    let mut seed_region = |u_lo: f64, u_hi: f64, v_lo: f64, v_hi: f64, dist: &dyn Fn((f64, f64)) -> f64| {
        let i_lo = ((u_lo - band - dom.u0) / hu).floor() as isize;
        let i_hi = ((u_hi + band - dom.u0) / hu).ceil() as isize;
        let mut j_lo = ((v_lo - band - dom.v0) / hv).floor() as isize;
        let mut j_hi = ((v_hi + band - dom.v0) / hv).ceil() as isize;
        if !dom.periodic_v {
            j_lo = j_lo.max(0);
            j_hi = j_hi.min(nv as isize - 1);
        }
        for raw_j in j_lo..=j_hi {
            let j = if dom.periodic_v { raw_j.rem_euclid(nv as isize) as usize } else { raw_j as usize };
            for raw_i in i_lo..=i_hi {
                let i = if dom.periodic_u {
                    raw_i.rem_euclid(nu as isize) as usize
                } else if (0..nu as isize).contains(&raw_i) {
                    raw_i as usize
                } else {
                    continue;
                };
                let p = (dom.u0 + raw_i as f64 * hu, dom.v0 + raw_j as f64 * hv);
                let dc = dist(p);
                if dc <= band {
                    let idx = j * nu + i;
                    let val = lam[idx].exp() * dc;
                    if val < d[idx] {
                        d[idx] = val;
                        heap.push(Reverse(HeapItem { d: val, idx }));
                    }
                }
            }
        }
    };
    for poly in &sources.curves {
        for w in poly.windows(2) {
            let (a, mut b) = (w[0], w[1]);
            // unwrap seam-crossing segments so the seeding box covers the
            // short arc, not its complement
            if dom.periodic_u && (b.0 - a.0).abs() > dom.width() / 2.0 {
                b.0 -= dom.width() * (b.0 - a.0).signum();
            }
            if dom.periodic_v && (b.1 - a.1).abs() > dom.height() / 2.0 {
                b.1 -= dom.height() * (b.1 - a.1).signum();
            }
            let u_lo = a.0.min(b.0);
            let u_hi = a.0.max(b.0);
            let v_lo = a.1.min(b.1);
            let v_hi = a.1.max(b.1);
            seed_region(u_lo, u_hi, v_lo, v_hi, &|p| segment_distance(dom, p, a, b));
        }
    }
    for &q in &sources.points {
        seed_region(q.0, q.0, q.1, q.1, &|p| {
            let (dx, dy) = dom.delta(p, q);
            (dx * dx + dy * dy).sqrt()
        });
    }

    while let Some(Reverse(HeapItem { d: dc, idx })) = heap.pop() {
        if dc > d[idx] * (1.0 + 1e-12) {
            continue; // stale entry
        }
        if dc > d_max {
            break;
        }
        let (i, j) = (idx % nu, idx / nu);
        let mut neighbors: Vec<usize> = Vec::with_capacity(4);
        if dom.periodic_u {
            neighbors.push(j * nu + (i + 1) % nu);
            neighbors.push(j * nu + (i + nu - 1) % nu);
        } else {
            if i + 1 < nu {
                neighbors.push(j * nu + i + 1);
            }
            if i > 0 {
                neighbors.push(j * nu + i - 1);
            }
        }
        if dom.periodic_v {
            neighbors.push(((j + 1) % nv) * nu + i);
            neighbors.push(((j + nv - 1) % nv) * nu + i);
        } else {
            if j + 1 < nv {
                neighbors.push((j + 1) * nu + i);
            }
            if j > 0 {
                neighbors.push((j - 1) * nu + i);
            }
        }
        for nb in neighbors {
            let (ni, nj) = (nb % nu, nb / nu);
            let pick = |a: Option<usize>, b: Option<usize>| -> f64 {
                let va = a.map_or(f64::INFINITY, |k| d[k]);
                let vb = b.map_or(f64::INFINITY, |k| d[k]);
                va.min(vb)
            };
            let a = pick(
                if dom.periodic_u || ni > 0 {
                    Some(nj * nu + (ni + nu - 1) % nu)
                } else {
                    None
                },
                if dom.periodic_u || ni + 1 < nu { Some(nj * nu + (ni + 1) % nu) } else { None },
            );
            let b = pick(
                if dom.periodic_v || nj > 0 {
                    Some(((nj + nv - 1) % nv) * nu + ni)
                } else {
                    None
                },
                if dom.periodic_v || nj + 1 < nv { Some(((nj + 1) % nv) * nu + ni) } else { None },
            );
            let f = lam[nb].exp();
            let trial = solve_upwind(a, b, hu, hv, f);
            if trial < d[nb] {
                d[nb] = trial;
                heap.push(Reverse(HeapItem { d: trial, idx: nb }));
            }
        }
    }
    d
}

/// One upwind update: smallest `x` with `((x−a)/hu)₊² + ((x−b)/hv)₊² = f²`.
fn solve_upwind(a: f64, b: f64, hu: f64, hv: f64, f: f64) -> f64 {
    let one_d = (a + f * hu).min(b + f * hv);
    if !a.is_finite() || !b.is_finite() {
        return one_d;
    }
    let (iu2, iv2) = (1.0 / (hu * hu), 1.0 / (hv * hv));
    let s = iu2 + iv2;
    let m = a * iu2 + b * iv2;
    let q = a * a * iu2 + b * b * iv2 - f * f;
    let disc = m * m - s * q;
    if disc <= 0.0 {
        return one_d;
    }
    let x = (m + disc.sqrt()) / s;
    if x >= a.max(b) {
        x
    } else {
        one_d
    }
}

/// Distance field on an arbitrary chart for the given sources.  `grid_n` is
/// the node count along `u`; `v` gets the same spacing.  The march stops at
/// `d_max`.
pub fn distance_field_on(
    ambient: Ambient,
    chart: &Chart,
    sources: &SourceSet,
    grid_n: usize,
    d_max: f64,
) -> Result<DistanceField> {
    let dom = chart.domain.clone();
    let nu = grid_n.max(16);
    let hu = dom.width() / if dom.periodic_u { nu as f64 } else { (nu - 1) as f64 };
    let nv_raw = (dom.height() / hu).round() as usize;
    let nv = nv_raw.clamp(16, 200_000);
    let hv = dom.height() / if dom.periodic_v { nv as f64 } else { (nv - 1) as f64 };
    let field = SurfacePhi { ambient, chart };
    let lam: Vec<f64> = (0..nv)
        .into_par_iter()
        .map(|j| -> Result<Vec<f64>> {
            let v = dom.v0 + j as f64 * hv;
            (0..nu).map(|i| field.lambda(dom.u0 + i as f64 * hu, v)).collect()
        })
        .collect::<Result<Vec<_>>>()?
        .concat();
    let d = eikonal_march(&dom, &lam, nu, nv, hu, hv, sources, d_max);
    Ok(DistanceField { domain: dom, nu, nv, hu, hv, d })
}

/// Distance field to the umbilic set on the main chart.
pub fn distance_field(
    surface: &SurfaceSpec,
    report: &UmbilicReport,
    grid_n: usize,
    d_max: f64,
) -> Result<DistanceField> {
    let chart = surface.main_chart();
    let sources = SourceSet::from_report(report, &chart.name);
    distance_field_on(surface.ambient, chart, &sources, grid_n, d_max)
}

/// Flat-metric distance field for synthetic tests.
pub fn distance_field_flat(domain: &Domain, sources: &SourceSet, grid_n: usize, d_max: f64) -> DistanceField {
    let nu = grid_n.max(16);
    let hu = domain.width() / if domain.periodic_u { nu as f64 } else { (nu - 1) as f64 };
    let nv = ((domain.height() / hu).round() as usize).clamp(16, 200_000);
    let hv = domain.height() / if domain.periodic_v { nv as f64 } else { (nv - 1) as f64 };
    let lam = vec![0.0; nu * nv];
    let d = eikonal_march(domain, &lam, nu, nv, hu, hv, sources, d_max);
    DistanceField { domain: domain.clone(), nu, nv, hu, hv, d }
}

// ---------------------------------------------------------------------------
// ε-neighbourhood family
// ---------------------------------------------------------------------------

/// Geometric ladder of ε values, largest first.
pub fn epsilon_ladder(eps_max: f64, eps_min: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && eps_max > eps_min && eps_min > 0.0);
    let r = (eps_min / eps_max).powf(1.0 / (n - 1) as f64);
    (0..n).map(|k| eps_max * r.powi(k as i32)).collect()
}

/// Isolated umbilic points and chart punctures of the main chart — the disk
/// centres of the ε-family.
pub fn main_chart_disks(surface: &SurfaceSpec, report: &UmbilicReport) -> Vec<(f64, f64)> {
    let chart = surface.main_chart();
    let mut disks: Vec<(f64, f64)> = report
        .points
        .iter()
        .filter(|p| p.chart == chart.name)
        .map(|p| (p.u, p.v))
        .collect();
    disks.extend(chart.punctures.iter().copied());
    disks
}

/// The nested family `U_ε` on the main chart: coordinate disks of radius ε
/// around isolated points ∪ geodesic ε-tubes around umbilic curves (one
/// distance field per curve).
pub struct EpsilonFamily<'a> {
    pub domain: Domain,
    pub disks: Vec<(f64, f64)>,
    pub tubes: Vec<&'a DistanceField>,
}

impl<'a> EpsilonFamily<'a> {
    /// Family for the main chart.  `tubes` must be supplied when the report
    /// carries curves in that chart.
    pub fn new(
        surface: &SurfaceSpec,
        report: &UmbilicReport,
        tubes: Vec<&'a DistanceField>,
    ) -> Result<EpsilonFamily<'a>> {
        let chart = surface.main_chart();
        if tubes.is_empty() && report.curves.iter().any(|c| c.chart == chart.name) {
            return Err(Error::InvalidParams(
                "the umbilic set contains curves; a distance field is required".into(),
            ));
        }
        Ok(EpsilonFamily {
            domain: chart.domain.clone(),
            disks: main_chart_disks(surface, report),
            tubes,
        })
    }

    /// Signed margin to `∂U_ε`: positive outside the family, negative inside.
    /// (Disk part in chart units, tube part in `g`-distance; the union is the
    /// pointwise minimum.)
    pub fn margin(&self, u: f64, v: f64, eps: f64) -> f64 {
        let mut m = f64::INFINITY;
        for &(cu, cv) in &self.disks {
            let (du, dv) = self.domain.delta((cu, cv), (u, v));
            m = m.min((du * du + dv * dv).sqrt() - eps);
        }
        for df in &self.tubes {
            m = m.min(df.sample(u, v) - eps);
        }
        // clamp so band-limited tube fields (d = +∞ beyond the marched band)
        // still give finite corner values to the sub-cell clipper
        m.clamp(-eps, eps)
    }
}

// ---------------------------------------------------------------------------
// Masked quadrature
// ---------------------------------------------------------------------------

/// Fraction of the unit square on which the bilinear interpolant of the
/// corner values `c = [c00, c10, c11, c01]` (counter-clockwise from the
/// origin) is positive, by linear edge clipping and the shoelace formula.
pub fn positive_fraction(c: [f64; 4]) -> f64 {
    clipped_polygon(c).map_or_else(
        || if c.iter().sum::<f64>() > 0.0 { 1.0 } else { 0.0 },
        |poly| shoelace(&poly),
    )
}

/// Clipped positive region as a polygon in the unit square, or `None` when no
/// edge is crossed (uniform sign).
fn clipped_polygon(c: [f64; 4]) -> Option<Vec<(f64, f64)>> {
    let corners = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
    let mut poly: Vec<(f64, f64)> = Vec::with_capacity(8);
    let mut crossed = false;
    for k in 0..4 {
        let (ca, cb) = (c[k], c[(k + 1) % 4]);
        let (pa, pb) = (corners[k], corners[(k + 1) % 4]);
        if ca > 0.0 {
            poly.push(pa);
        }
        if (ca > 0.0) != (cb > 0.0) {
            crossed = true;
            let t = ca / (ca - cb);
            poly.push((pa.0 + t * (pb.0 - pa.0), pa.1 + t * (pb.1 - pa.1)));
        }
    }
    if crossed {
        Some(poly)
    } else {
        None
    }
}

fn shoelace(poly: &[(f64, f64)]) -> f64 {
    let mut a = 0.0;
    for k in 0..poly.len() {
        let (x0, y0) = poly[k];
        let (x1, y1) = poly[(k + 1) % poly.len()];
        a += x0 * y1 - x1 * y0;
    }
    (a / 2.0).abs()
}

fn polygon_centroid(poly: &[(f64, f64)]) -> (f64, f64) {
    let (mut cx, mut cy, mut a) = (0.0, 0.0, 0.0);
    for k in 0..poly.len() {
        let (x0, y0) = poly[k];
        let (x1, y1) = poly[(k + 1) % poly.len()];
        let w = x0 * y1 - x1 * y0;
        a += w;
        cx += (x0 + x1) * w;
        cy += (y0 + y1) * w;
    }
    if a.abs() < 1e-300 {
        let n = poly.len() as f64;
        return (poly.iter().map(|p| p.0).sum::<f64>() / n, poly.iter().map(|p| p.1).sum::<f64>() / n);
    }
    (cx / (3.0 * a), cy / (3.0 * a))
}

/// Deterministic tensor quadrature of `f` over the chart domain minus `U_ε`,
/// with marching-squares sub-cell clipping of boundary cells.  Nodes whose
/// cell straddles the mask edge are evaluated at the centroid of the kept
/// sub-region.
pub fn masked_integral<F>(domain: &Domain, n: usize, fam: &EpsilonFamily, eps: f64, f: F) -> Result<f64>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    let nu = n.max(16);
    let hu = domain.width() / if domain.periodic_u { nu as f64 } else { (nu - 1) as f64 };
    let nv = ((domain.height() / hu).round() as usize).clamp(16, 200_000);
    let hv = domain.height() / if domain.periodic_v { nv as f64 } else { (nv - 1) as f64 };
    let wu = trapezoid_weights(domain.width(), nu, domain.periodic_u);
    let wv = trapezoid_weights(domain.height(), nv, domain.periodic_v);
    let rows: Vec<f64> = (0..nv)
        .into_par_iter()
        .map(|j| -> Result<f64> {
            let v = domain.v0 + j as f64 * hv;
            let mut terms = Vec::with_capacity(nu);
            for i in 0..nu {
                let u = domain.u0 + i as f64 * hu;
                // cell of this node, clamped to the domain on bounded axes
                let ulo = if domain.periodic_u { u - hu / 2.0 } else { (u - hu / 2.0).max(domain.u0) };
                let uhi = if domain.periodic_u { u + hu / 2.0 } else { (u + hu / 2.0).min(domain.u1) };
                let vlo = if domain.periodic_v { v - hv / 2.0 } else { (v - hv / 2.0).max(domain.v0) };
                let vhi = if domain.periodic_v { v + hv / 2.0 } else { (v + hv / 2.0).min(domain.v1) };
                let c = [
                    fam.margin(ulo, vlo, eps),
                    fam.margin(uhi, vlo, eps),
                    fam.margin(uhi, vhi, eps),
                    fam.margin(ulo, vhi, eps),
                ];
                let (frac, at) = match clipped_polygon(c) {
                    None => {
                        if c.iter().sum::<f64>() > 0.0 {
                            (1.0, (u, v))
                        } else {
                            continue;
                        }
                    }
                    Some(poly) => {
                        let frac = shoelace(&poly);
                        if frac <= 0.0 {
                            continue;
                        }
                        let (cx, cy) = polygon_centroid(&poly);
                        (frac, (ulo + cx * (uhi - ulo), vlo + cy * (vhi - vlo)))
                    }
                };
                terms.push(f(at.0, at.1)? * wu[i] * wv[j] * frac);
            }
            Ok(pairwise_sum(&terms))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(pairwise_sum(&rows))
}

/// `∫_{Σ∖U_ε} K_Y dvol_{g_Y}` on the main chart (`K_Y e^{2ρ}` against the
/// chart measure), by masked quadrature with the cheap Liouville evaluator.
pub fn integrate_ky_outside(
    surface: &SurfaceSpec,
    fam: &EpsilonFamily,
    eps: f64,
    grid_n: usize,
) -> Result<f64> {
    let chart = surface.main_chart();
    let dom = &chart.domain;
    let h0 = (dom.width().min(dom.height()) / 400.0).clamp(1e-4, 2e-2);
    masked_integral(dom, grid_n, fam, eps, |u, v| {
        let (p, u, v) = stencil_probe(surface.ambient, chart, u, v, h0);
        let (ky, e2rho) = cgm::ky_e2rho(&p, u, v, 0.0)?;
        Ok(ky * e2rho)
    })
}

/// Probe whose stencil half-width is shrunk so it fits inside bounded axes.
/// Points on (or within one stencil floor of) a bounded edge are nudged just
/// inside; returns the probe and the adjusted evaluation point.  The margin
/// is 4.1·h because the residual evaluators nest two stencil layers (an
/// outer Wirtinger cross over inner quartic stencils).
pub fn stencil_probe<'a>(
    ambient: Ambient,
    chart: &'a Chart,
    u: f64,
    v: f64,
    h0: f64,
) -> (Probe<'a>, f64, f64) {
    const H_FLOOR: f64 = 1e-4;
    let d = &chart.domain;
    let (mut u, mut v) = (u, v);
    let mut h = h0;
    if !d.periodic_u {
        u = u.clamp(d.u0 + 4.2 * H_FLOOR, d.u1 - 4.2 * H_FLOOR);
        h = h.min((u - d.u0).min(d.u1 - u) / 4.1);
    }
    if !d.periodic_v {
        v = v.clamp(d.v0 + 4.2 * H_FLOOR, d.v1 - 4.2 * H_FLOOR);
        h = h.min((v - d.v0).min(d.v1 - v) / 4.1);
    }
    (Probe::new(ambient, chart, h), u, v)
}

// ---------------------------------------------------------------------------
// Boundary flux of the conformal factor
// ---------------------------------------------------------------------------

/// Euclidean chart gradient of `ρ = log|φ| − 2λ` (the conformal factor of
/// `g_Y` relative to the flat chart metric); conformal invariance of the flux
/// reduces `∮ ∂_ν ρ dvol_h` to a Euclidean line integral of this gradient.
pub fn grad_rho(ambient: Ambient, chart: &Chart, u: f64, v: f64) -> Result<(f64, f64)> {
    let fd = fundamental::fundamental(ambient, &chart.eval(u, v)?, u, v)?;
    let p2 = fd.phi.v.norm_sqr();
    if p2 == 0.0 {
        return Err(Error::UmbilicProximity { value: 0.0, floor: f64::MIN_POSITIVE });
    }
    Ok((
        (fd.phi.v.conj() * fd.phi.du).re / p2 - 2.0 * fd.lambda.du,
        (fd.phi.v.conj() * fd.phi.dv).re / p2 - 2.0 * fd.lambda.dv,
    ))
}

/// Flux through a closed polyline (counter-clockwise; outward normal).
pub fn contour_rho_flux(ambient: Ambient, chart: &Chart, polyline: &[(f64, f64)]) -> Result<f64> {
    let mut terms = Vec::with_capacity(polyline.len());
    for k in 0..polyline.len() {
        let a = polyline[k];
        let b = polyline[(k + 1) % polyline.len()];
        let (tx, ty) = (b.0 - a.0, b.1 - a.1);
        let len = (tx * tx + ty * ty).sqrt();
        if len == 0.0 {
            continue;
        }
        let mid = ((a.0 + b.0) / 2.0, (a.1 + b.1) / 2.0);
        let g = grad_rho(ambient, chart, mid.0, mid.1)?;
        // outward normal of a CCW contour
        terms.push((g.0 * ty - g.1 * tx) / len * len);
    }
    Ok(pairwise_sum(&terms))
}

/// Flux through the circle of radius `eps` around `center` (outward normal).
pub fn circle_flux<G>(grad: G, center: (f64, f64), eps: f64, k: usize) -> Result<f64>
where
    G: Fn(f64, f64) -> Result<(f64, f64)>,
{
    let ds = 2.0 * std::f64::consts::PI * eps / k as f64;
    let mut terms = Vec::with_capacity(k);
    for m in 0..k {
        let th = 2.0 * std::f64::consts::PI * (m as f64 + 0.5) / k as f64;
        let (c, s) = (th.cos(), th.sin());
        let g = grad(center.0 + eps * c, center.1 + eps * s)?;
        terms.push((g.0 * c + g.1 * s) * ds);
    }
    Ok(pairwise_sum(&terms))
}

/// marching-squares contour segments of `G = d − eps` on a distance grid:
/// `(midpoint, euclidean length, unit normal along ∇d)`.
fn level_set_segments(df: &DistanceField, eps: f64) -> Vec<((f64, f64), f64, (f64, f64))> {
    let mut out = Vec::new();
    let ni = if df.domain.periodic_u { df.nu } else { df.nu - 1 };
    for j in 0..df.nv - 1 {
        for i in 0..ni {
            let i1 = (i + 1) % df.nu;
            let g = |a: usize, b: usize| df.d[b * df.nu + a] - eps;
            let c = [g(i, j), g(i1, j), g(i1, j + 1), g(i, j + 1)];
            if c.iter().any(|x| !x.is_finite()) {
                continue;
            }
            let corners = [
                (df.node_u(i), df.node_v(j)),
                (df.node_u(i) + df.hu, df.node_v(j)),
                (df.node_u(i) + df.hu, df.node_v(j + 1)),
                (df.node_u(i), df.node_v(j + 1)),
            ];
            let mut pts: Vec<(f64, f64)> = Vec::with_capacity(4);
            for k in 0..4 {
                let (ca, cb) = (c[k], c[(k + 1) % 4]);
                if (ca > 0.0) != (cb > 0.0) {
                    let t = ca / (ca - cb);
                    let (pa, pb) = (corners[k], corners[(k + 1) % 4]);
                    pts.push((pa.0 + t * (pb.0 - pa.0), pa.1 + t * (pb.1 - pa.1)));
                }
            }
            let pairs: Vec<((f64, f64), (f64, f64))> = match pts.len() {
                2 => vec![(pts[0], pts[1])],
                4 => {
                    // saddle: connect by the sign of the cell centre
                    let centre_pos = c.iter().sum::<f64>() > 0.0;
                    if centre_pos == (c[0] > 0.0) {
                        vec![(pts[0], pts[3]), (pts[1], pts[2])]
                    } else {
                        vec![(pts[0], pts[1]), (pts[2], pts[3])]
                    }
                }
                _ => continue,
            };
            for (a, b) in pairs {
                let len = ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
                if len == 0.0 {
                    continue;
                }
                let mid = ((a.0 + b.0) / 2.0, (a.1 + b.1) / 2.0);
                let (gu, gv) = df.grad(mid.0, mid.1);
                let gn = (gu * gu + gv * gv).sqrt();
                if !(gn > 0.0) || !gn.is_finite() {
                    continue;
                }
                out.push((mid, len, (gu / gn, gv / gn)));
            }
        }
    }
    out
}

/// `∮_{∂U_ε} ∂_ν ρ dvol_h`, normal pointing away from the umbilic set.
/// Isolated points contribute analytic ε-circles in their own charts; curves
/// contribute a marching-squares contour of a fresh band-limited distance
/// field at grid step `≤ ε/20` in `g`-units.
pub fn boundary_rho_flux(surface: &SurfaceSpec, report: &UmbilicReport, eps: f64) -> Result<f64> {
    let mut total = 0.0;
    for p in &report.points {
        let chart = surface
            .chart(&p.chart)
            .ok_or_else(|| Error::InvalidParams(format!("report references unknown chart '{}'", p.chart)))?;
        total += circle_flux(
            |u, v| grad_rho(surface.ambient, chart, u, v),
            (p.u, p.v),
            eps,
            512,
        )?;
    }
    for curve in &report.curves {
        let chart = surface
            .chart(&curve.chart)
            .ok_or_else(|| Error::InvalidParams(format!("report references unknown chart '{}'", curve.chart)))?;
        total += tube_flux_with(surface.ambient, chart, &curve.polyline, curve.closed, eps, |u, v| {
            grad_rho(surface.ambient, chart, u, v)
        })?;
    }
    Ok(total)
}

/// Flux of an arbitrary gradient field through the ε-level set of the
/// geodesic distance to one curve (normal along increasing distance).
pub fn tube_flux_with<G>(
    ambient: Ambient,
    chart: &Chart,
    polyline: &[(f64, f64)],
    closed: bool,
    eps: f64,
    grad: G,
) -> Result<f64>
where
    G: Fn(f64, f64) -> Result<(f64, f64)>,
{
    let df = curve_band_distance(ambient, chart, polyline, closed, eps)?;
    let mut terms = Vec::new();
    for (mid, len, n) in level_set_segments(&df, eps) {
        let g = grad(mid.0, mid.1)?;
        terms.push((g.0 * n.0 + g.1 * n.1) * len);
    }
    Ok(pairwise_sum(&terms))
}

/// Band-limited distance field around one curve at chart step `≈ ε/(20 e^λ)`.
pub fn curve_band_distance(
    ambient: Ambient,
    chart: &Chart,
    polyline: &[(f64, f64)],
    closed: bool,
    eps: f64,
) -> Result<DistanceField> {
    let field = SurfacePhi { ambient, chart };
    let mut el_min = f64::INFINITY;
    let mut el_max: f64 = 0.0;
    for &(u, v) in polyline.iter().step_by(1 + polyline.len() / 64) {
        let el = field.lambda(u, v)?.exp();
        el_min = el_min.min(el);
        el_max = el_max.max(el);
    }
    let parent = &chart.domain;
    let margin = 2.5 * eps / el_min;
    let (v_lo, v_hi) = if parent.periodic_v {
        (parent.v0, parent.v1)
    } else {
        let lo = polyline.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let hi = polyline.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        ((lo - margin).max(parent.v0), (hi + margin).min(parent.v1))
    };
    let sub = Domain {
        u0: parent.u0,
        u1: parent.u1,
        v0: v_lo,
        v1: v_hi,
        periodic_u: parent.periodic_u,
        periodic_v: parent.periodic_v,
    };
    let h_c = eps / (20.0 * el_max);
    let nu = ((sub.width() / h_c).ceil() as usize).clamp(64, 30_000);
    let hu = sub.width() / if sub.periodic_u { nu as f64 } else { (nu - 1) as f64 };
    let nv = ((sub.height() / h_c).ceil() as usize).clamp(32, 30_000);
    let hv = sub.height() / if sub.periodic_v { nv as f64 } else { (nv - 1) as f64 };
    let lam: Vec<f64> = (0..nv)
        .into_par_iter()
        .map(|j| -> Result<Vec<f64>> {
            let v = sub.v0 + j as f64 * hv;
            (0..nu).map(|i| field.lambda(sub.u0 + i as f64 * hu, v)).collect()
        })
        .collect::<Result<Vec<_>>>()?
        .concat();
    let mut poly = polyline.to_vec();
    if closed {
        if let Some(&first) = poly.first() {
            poly.push(first); // include the wrap-around segment
        }
    }
    let sources = SourceSet { curves: vec![poly], points: vec![] };
    let d = eikonal_march(&sub, &lam, nu, nv, hu, hv, &sources, 2.0 * eps);
    Ok(DistanceField { domain: sub, nu, nv, hu, hv, d })
}

// ---------------------------------------------------------------------------
// ε-expansion fit
// ---------------------------------------------------------------------------

/// Coefficients of `F(ε) ≈ c₁/ε + c₀ + c_log ε log ε + c_lin ε`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ExpansionFit {
    pub c1: f64,
    pub c0: f64,
    pub c_log: f64,
    pub c_lin: f64,
    pub rms_residual: f64,
    pub condition: f64,
}

/// Least-squares fit of the four-term expansion.  Requires ≥ 6 samples whose
/// ε values span at least a factor of 5; rejects ill-conditioned systems.
pub fn fit_expansion(samples: &[(f64, f64)]) -> Result<ExpansionFit> {
    if samples.len() < 6 {
        return Err(Error::InvalidParams(format!(
            "expansion fit needs at least 6 ε samples, got {}",
            samples.len()
        )));
    }
    let e_max = samples.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
    let e_min = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    if !(e_min > 0.0) || e_max / e_min < 5.0 {
        return Err(Error::InvalidParams(format!(
            "ε samples must be positive and span at least a factor 5 (got {e_min:.3e}..{e_max:.3e})"
        )));
    }
    let m = samples.len();
    let mut a = nalgebra::DMatrix::<f64>::zeros(m, 4);
    let mut b = nalgebra::DVector::<f64>::zeros(m);
    for (k, &(e, f)) in samples.iter().enumerate() {
        a[(k, 0)] = 1.0 / e;
        a[(k, 1)] = 1.0;
        a[(k, 2)] = e * e.ln();
        a[(k, 3)] = e;
        b[k] = f;
    }
    let (x, rms, cond) = lsq_svd(&a, &b);
    if !cond.is_finite() || cond > 1e12 {
        return Err(Error::IllConditioned(format!(
            "expansion fit condition number {cond:.3e} exceeds 1e12"
        )));
    }
    Ok(ExpansionFit { c1: x[0], c0: x[1], c_log: x[2], c_lin: x[3], rms_residual: rms, condition: cond })
}

// ---------------------------------------------------------------------------
// The full ε-sweep with verdict
// ---------------------------------------------------------------------------

/// One line of the sweep table.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SweepRow {
    pub eps: f64,
    /// `∫_{Σ∖U_ε} K_Y dvol_{g_Y}`
    pub integral: f64,
    /// `∮_{∂U_ε} ∂_ν ρ dvol_h`
    pub boundary_flux: f64,
    /// chart area removed by the mask
    pub clipped_area: f64,
}

/// Sweep, fits and verdict of the renormalized Gauss–Bonnet expansion
/// `∫_{Σ∖U_ε} K_Y = 2ΣL/ε + 2πχ + 2πΣnᵢ + O(ε|log ε|)`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct GaussBonnetRun {
    pub rows: Vec<SweepRow>,
    /// fit of the curvature-integral sweep
    pub fit: ExpansionFit,
    /// fit of the boundary-flux sweep (carries the same `2ΣL/ε` term)
    pub flux_fit: ExpansionFit,
    pub expected_c1: f64,
    pub expected_c0: f64,
    pub verdict: String,
}

/// Run the ε-sweep on the main chart.  Tube distance fields are rebuilt per ε
/// at grid step `≤ ε/20` so the boundary-clip error stays subdominant.
/// Verdict: PASS when the flux-fit `c₁` matches `2ΣL` within 1% and — for
/// closed surfaces — the integral-fit `c₀` matches `2πχ + 2πΣnᵢ` within
/// `1e-2·4π`.
pub fn gauss_bonnet_sweep(
    surface: &SurfaceSpec,
    report: &UmbilicReport,
    eps: &[f64],
    grid_n: usize,
) -> Result<GaussBonnetRun> {
    let chart = surface.main_chart();
    let dom = &chart.domain;
    let disks = main_chart_disks(surface, report);
    let curves: Vec<_> = report.curves.iter().filter(|c| c.chart == chart.name).collect();
    let total_len: f64 = curves.iter().map(|c| c.length_g).sum();
    let chart_area = dom.width() * dom.height();
    // conformal factor scale along the curves, for per-ε grid refinement
    let el_max = {
        let mut m = 0.0f64;
        for c in &curves {
            for &(u, v) in c.polyline.iter().step_by(4) {
                let fd = fundamental::fundamental(surface.ambient, &chart.eval(u, v)?, u, v)?;
                m = m.max(fd.lambda.v.exp());
            }
        }
        m.max(1e-12)
    };
    let mut rows = Vec::with_capacity(eps.len());
    for &e in eps {
        let dfs = curves
            .iter()
            .map(|c| curve_band_distance(surface.ambient, chart, &c.polyline, c.closed, e))
            .collect::<Result<Vec<_>>>()?;
        let fam = EpsilonFamily {
            domain: dom.clone(),
            disks: disks.clone(),
            tubes: dfs.iter().collect(),
        };
        // tube masks must stay resolved by the quadrature cells: refine the
        // integration grid with ε (chart cell ≤ ε/8 in g-units near the
        // curve), capped to keep the smallest rungs tractable
        let eff_n = if curves.is_empty() {
            grid_n
        } else {
            grid_n.max(((8.0 * el_max * dom.width() / e).ceil() as usize).min(1400))
        };
        let integral = integrate_ky_outside(surface, &fam, e, eff_n)?;
        let kept = masked_integral(dom, eff_n, &fam, e, |_, _| Ok(1.0))?;
        let boundary_flux = boundary_rho_flux(surface, report, e)?;
        rows.push(SweepRow { eps: e, integral, boundary_flux, clipped_area: chart_area - kept });
    }
    let fit = fit_expansion(&rows.iter().map(|r| (r.eps, r.integral)).collect::<Vec<_>>())?;
    let flux_fit =
        fit_expansion(&rows.iter().map(|r| (r.eps, r.boundary_flux)).collect::<Vec<_>>())?;
    let expected_c1 = 2.0 * total_len + 0.0;
    let expected_c0 = 2.0 * std::f64::consts::PI
        * (surface.euler_characteristic as f64 + report.total_multiplicity() as f64);
    // with curves the singular term is isolated by the boundary-flux fit
    // (contours live on per-ε refined band grids); with isolated points only,
    // the curvature integral's own fit carries the (vanishing) c₁
    let c1_meas = if curves.is_empty() { fit.c1 } else { flux_fit.c1 };
    let c1_ok = (c1_meas - expected_c1).abs() <= f64::max(1e-2, 0.01 * expected_c1.abs());
    let c0_ok = !surface.meta.closed
        || (fit.c0 - expected_c0).abs() <= 1e-2 * 4.0 * std::f64::consts::PI;
    let verdict = if c1_ok && c0_ok { "PASS" } else { "FAIL" }.to_string();
    Ok(GaussBonnetRun { rows, fit, flux_fit, expected_c1, expected_c0, verdict })
}

/// `∮ ∂_ν ρ` along the non-periodic edges of the main chart (outward normal,
/// Euclidean line element) — the outer-boundary term of the Green identity
/// `∫_R (−Δρ) = ∮_{∂U_ε} ∂_ν ρ − ∮_{outer} ∂_ν ρ` on `R = Σ∖U_ε`.
pub fn outer_boundary_flux(surface: &SurfaceSpec, n: usize) -> Result<f64> {
    let chart = surface.main_chart();
    edge_flux_with(chart, n, |u, v| grad_rho(surface.ambient, chart, u, v))
}

/// Flux of an arbitrary gradient field through the non-periodic chart edges
/// (outward normal, Euclidean line element).
pub fn edge_flux_with<G>(chart: &Chart, n: usize, grad: G) -> Result<f64>
where
    G: Fn(f64, f64) -> Result<(f64, f64)>,
{
    let dom = &chart.domain;
    let mut total = 0.0;
    if !dom.periodic_v {
        for (v, sign) in [(dom.v0, -1.0), (dom.v1, 1.0)] {
            let w = trapezoid_weights(dom.width(), n, dom.periodic_u);
            let h = dom.width() / if dom.periodic_u { n as f64 } else { (n - 1) as f64 };
            let mut terms = Vec::with_capacity(n);
            for i in 0..n {
                let u = dom.u0 + i as f64 * h;
                let g = grad(u, v)?;
                terms.push(sign * g.1 * w[i]);
            }
            total += pairwise_sum(&terms);
        }
    }
    if !dom.periodic_u {
        for (u, sign) in [(dom.u0, -1.0), (dom.u1, 1.0)] {
            let w = trapezoid_weights(dom.height(), n, dom.periodic_v);
            let h = dom.height() / if dom.periodic_v { n as f64 } else { (n - 1) as f64 };
            let mut terms = Vec::with_capacity(n);
            for j in 0..n {
                let v = dom.v0 + j as f64 * h;
                let g = grad(u, v)?;
                terms.push(sign * g.0 * w[j]);
            }
            total += pairwise_sum(&terms);
        }
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// Renormalized energy
// ---------------------------------------------------------------------------

/// The two-route renormalized Willmore energy and the ε-sweep behind it.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RenormalizedEnergy {
    /// route (i): direct quadrature of `|Å|²`
    pub direct: f64,
    /// route (ii): `2·lim_{ε→0}[∫_{Σ∖U_ε} Re(4Q/φ²) dvol_g + Σ 2L_g/ε] + 4πχ + 4πΣnᵢ`
    pub renormalized: f64,
    pub gap: f64,
    /// `(ε, bracket value)` pairs
    pub sweep: Vec<(f64, f64)>,
    pub fit: ExpansionFit,
}

/// Renormalized energy by both routes.  Rejects totally umbilic surfaces
/// (route (ii) divides by `φ`).
pub fn renormalized_energy(
    surface: &SurfaceSpec,
    report: &UmbilicReport,
    fam: &EpsilonFamily,
    eps: &[f64],
    grid_n: usize,
) -> Result<RenormalizedEnergy> {
    if surface.meta.totally_umbilic {
        return Err(Error::TotallyUmbilic(surface.name.clone()));
    }
    let direct = crate::energies::willmore_energies(surface, grid_n)?.e;
    let chart = surface.main_chart();
    let dom = &chart.domain;
    let h0 = (dom.width().min(dom.height()) / 400.0).clamp(1e-4, 2e-2);
    let curve_len: f64 = report
        .curves
        .iter()
        .filter(|c| c.chart == chart.name)
        .map(|c| c.length_g)
        .sum();
    let mut sweep = Vec::with_capacity(eps.len());
    for &e in eps {
        let integral = masked_integral(dom, grid_n, fam, e, |u, v| {
            let (p, u, v) = stencil_probe(surface.ambient, chart, u, v, h0);
            let fd = p.fd(u, v)?;
            let q = cgm::bryant_quartic(&p, u, v)?.q;
            let phi2 = fd.phi.v * fd.phi.v;
            if phi2.norm() == 0.0 {
                return Err(Error::UmbilicProximity { value: 0.0, floor: f64::MIN_POSITIVE });
            }
            Ok((4.0 * q / phi2).re * (2.0 * fd.lambda.v).exp())
        })?;
        sweep.push((e, integral + 2.0 * curve_len / e));
    }
    let fit = fit_expansion(&sweep)?;
    let n_sum: f64 = report.total_multiplicity() as f64;
    let chi = surface.euler_characteristic as f64;
    let renormalized =
        2.0 * fit.c0 + 4.0 * std::f64::consts::PI * chi + 4.0 * std::f64::consts::PI * n_sum;
    Ok(RenormalizedEnergy { direct, renormalized, gap: (direct - renormalized).abs(), sweep, fit })
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surfaces;
    use crate::umbilic;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn flat_domain(periodic_u: bool) -> Domain {
        Domain { u0: 0.0, u1: 2.0 * PI, v0: -1.0, v1: 1.0, periodic_u, periodic_v: false }
    }

    #[test]
    fn flat_distance_to_a_line_is_abs_v() {
        let dom = flat_domain(true);
        let poly: Vec<(f64, f64)> = (0..=64).map(|k| (2.0 * PI * k as f64 / 64.0, 0.0)).collect();
        let sources = SourceSet { curves: vec![poly], points: vec![] };
        let df = distance_field_flat(&dom, &sources, 128, 2.0);
        for &(u, v) in &[(0.3, 0.4), (2.0, -0.7), (5.5, 0.05), (1.0, 0.93)] {
            let d = df.sample(u, v);
            assert!((d - v.abs()).abs() < 2.0 * df.hv, "d({u},{v}) = {d}, want {}", v.abs());
        }
    }

    #[test]
    fn flat_distance_to_two_curves_takes_the_minimum() {
        let dom = flat_domain(true);
        let mk = |v0: f64| -> Vec<(f64, f64)> {
            (0..=64).map(|k| (2.0 * PI * k as f64 / 64.0, v0)).collect()
        };
        let sources = SourceSet { curves: vec![mk(0.5), mk(-0.5)], points: vec![] };
        let df = distance_field_flat(&dom, &sources, 128, 2.0);
        for &(u, v) in &[(0.1, 0.0), (3.0, 0.8), (4.0, -0.9), (1.5, 0.45)] {
            let want = f64::min((v - 0.5_f64).abs(), (v + 0.5_f64).abs());
            assert!((df.sample(u, v) - want).abs() < 2.0 * df.hv);
        }
    }

    #[test]
    fn bb_distance_field_matches_the_profile_arclength() {
        let s = surfaces::bb_annulus(1.0, 1.0, 1.0).unwrap();
        let prof = s.meta.profile.clone().unwrap();
        let poly: Vec<(f64, f64)> = (0..=96).map(|k| (2.0 * PI * k as f64 / 96.0, 0.0)).collect();
        let sources = SourceSet { curves: vec![poly], points: vec![] };
        let df = distance_field_on(s.ambient, s.main_chart(), &sources, 192, 1.5).unwrap();
        let tol = 2.0 * df.hu.max(df.hv) * 1.8; // 2 grid steps, e^λ ≲ 1.8 on the band
        for &v in &[0.1, -0.2, 0.35, -0.5, 0.7] {
            let want = prof.distance(v).unwrap().abs();
            let got = df.sample(1.0, v);
            assert!((got - want).abs() < tol, "d at s = {v}: got {got}, want {want}");
        }
    }

    #[test]
    fn positive_fraction_handles_the_basic_cases() {
        assert_relative_eq!(positive_fraction([1.0, 1.0, 1.0, 1.0]), 1.0);
        assert_relative_eq!(positive_fraction([-1.0, -1.0, -1.0, -1.0]), 0.0);
        // half-plane through the middle
        assert_relative_eq!(positive_fraction([-0.5, -0.5, 0.5, 0.5]), 0.5, epsilon = 1e-12);
        // corner triangle: positive only near corner 0, zero line cuts at t = 0.5
        assert_relative_eq!(positive_fraction([0.5, -0.5, -1.5, -0.5]), 0.125, epsilon = 1e-12);
    }

    #[test]
    fn masked_area_of_a_square_minus_a_disk() {
        let dom = Domain { u0: 0.0, u1: 1.0, v0: 0.0, v1: 1.0, periodic_u: false, periodic_v: false };
        let fam = EpsilonFamily { domain: dom.clone(), disks: vec![(0.5, 0.5)], tubes: vec![] };
        let eps = 0.25;
        let area = masked_integral(&dom, 160, &fam, eps, |_, _| Ok(1.0)).unwrap();
        assert_relative_eq!(area, 1.0 - PI * eps * eps, epsilon = 2e-4);
    }

    #[test]
    fn family_is_nested() {
        let dom = flat_domain(true);
        let poly: Vec<(f64, f64)> = (0..=64).map(|k| (2.0 * PI * k as f64 / 64.0, 0.2)).collect();
        let sources = SourceSet { curves: vec![poly], points: vec![(3.0, -0.5)] };
        let df = distance_field_flat(&dom, &sources, 96, 2.5);
        let fam = EpsilonFamily { domain: dom.clone(), disks: vec![(3.0, -0.5)], tubes: vec![&df] };
        for k in 0..40 {
            let u = 0.157 * k as f64;
            let v = -1.0 + 0.05 * k as f64;
            // U_{ε'} ⊂ U_ε for ε' < ε: inside the small set ⇒ inside the
            // large one (margins are clamped to ±ε, so compare signs)
            if fam.margin(u, v, 0.05) < 0.0 {
                assert!(fam.margin(u, v, 0.2) < 0.0);
            }
            // and the unclamped part still decreases with ε
            assert!(
                fam.margin(u, v, 0.05).min(0.049) >= fam.margin(u, v, 0.2).min(0.049) - 1e-12
            );
        }
    }

    #[test]
    fn expansion_fit_recovers_exact_coefficients() {
        let eps = epsilon_ladder(0.2, 0.02, 8);
        let (c1, c0, cl, cn) = (3.25, -1.5, 0.75, 2.0);
        let data: Vec<(f64, f64)> =
            eps.iter().map(|&e| (e, c1 / e + c0 + cl * e * e.ln() + cn * e)).collect();
        let fit = fit_expansion(&data).unwrap();
        assert_relative_eq!(fit.c1, c1, epsilon = 1e-9);
        assert_relative_eq!(fit.c0, c0, epsilon = 1e-9);
        assert_relative_eq!(fit.c_log, cl, epsilon = 1e-8);
        assert_relative_eq!(fit.c_lin, cn, epsilon = 1e-8);
        assert!(fit_expansion(&data[0..4]).is_err());
    }

    #[test]
    fn circle_flux_counts_the_zero_order() {
        // ρ = log|z²| = 2 log r around a double zero: flux must be 2·2π
        let grad = |u: f64, v: f64| -> Result<(f64, f64)> {
            let r2 = u * u + v * v;
            Ok((2.0 * u / r2, 2.0 * v / r2))
        };
        for &eps in &[0.3, 0.05] {
            let f = circle_flux(grad, (0.0, 0.0), eps, 256).unwrap();
            assert_relative_eq!(f, 4.0 * PI, epsilon = 1e-10);
        }
    }

    #[test]
    fn clifford_contour_flux_vanishes() {
        let s = surfaces::clifford();
        let chart = s.main_chart();
        let poly: Vec<(f64, f64)> = (0..128)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / 128.0;
                (3.0 + 0.6 * t.cos(), 2.0 + 0.6 * t.sin())
            })
            .collect();
        let f = contour_rho_flux(s.ambient, chart, &poly).unwrap();
        assert!(f.abs() < 1e-8, "flux = {f}");
    }

    #[test]
    fn clifford_ky_integral_is_zero() {
        let s = surfaces::clifford();
        let report = UmbilicReport::default();
        let fam = EpsilonFamily::new(&s, &report, vec![]).unwrap();
        let val = integrate_ky_outside(&s, &fam, 0.1, 64).unwrap();
        assert!(val.abs() < 1e-4, "∫K_Y = {val}");
    }

    #[test]
    fn torus_ky_integral_is_gauss_bonnet_zero() {
        // no umbilics, compact immersed Y: ∫K_Y dvol_{g_Y} = 2πχ(T²) = 0
        let s = surfaces::torus_rev(2.0, 1.0).unwrap();
        let fam = EpsilonFamily::new(&s, &UmbilicReport::default(), vec![]).unwrap();
        let val = integrate_ky_outside(&s, &fam, 0.1, 96).unwrap();
        assert!(val.abs() < 1e-3, "∫K_Y = {val}");
    }

    #[test]
    fn inverted_catenoid_ky_integral_approaches_4pi() {
        // K_Y ≡ 1, ∫dvol_{g_Y} = E/2 = 4π; the end disks live in the end
        // charts, so the main-chart mask is empty and ε is irrelevant
        let s = surfaces::inverted_catenoid(1.0).unwrap();
        let fam = EpsilonFamily::new(&s, &UmbilicReport::default(), vec![]).unwrap();
        let val = integrate_ky_outside(&s, &fam, 0.1, 128).unwrap();
        assert_relative_eq!(val, 4.0 * PI, max_relative = 1e-2);
    }

    #[test]
    fn bb_green_identity_ties_integral_and_fluxes() {
        // K_Y e^{2ρ} = −Δσ with σ = log|φ| − λ (flat-chart conformal factor
        // of g_Y); Green: ∫_{Σ∖U_ε}(−Δσ) = ∮_{∂U_ε}∂_νσ − ∮_{outer}∂_νσ
        let s = surfaces::bb_annulus(1.0, 1.0, 1.0).unwrap();
        let report = umbilic::detect_umbilic_set(&s, 96).unwrap();
        let eps = 0.15;
        let chart = s.main_chart();
        let grad_sigma = |u: f64, v: f64| -> crate::Result<(f64, f64)> {
            let fd = crate::fundamental::fundamental(s.ambient, &chart.eval(u, v)?, u, v)?;
            let p2 = fd.phi.v.norm_sqr();
            Ok((
                (fd.phi.v.conj() * fd.phi.du).re / p2 - fd.lambda.du,
                (fd.phi.v.conj() * fd.phi.dv).re / p2 - fd.lambda.dv,
            ))
        };
        let curve = &report.curves[0];
        let df = curve_band_distance(s.ambient, chart, &curve.polyline, curve.closed, eps).unwrap();
        let fam = EpsilonFamily::new(&s, &report, vec![&df]).unwrap();
        let inner =
            tube_flux_with(s.ambient, chart, &curve.polyline, curve.closed, eps, grad_sigma)
                .unwrap();
        let outer = edge_flux_with(chart, 512, grad_sigma).unwrap();
        let gap_at = |n: usize| {
            (integrate_ky_outside(&s, &fam, eps, n).unwrap() - (inner - outer)).abs()
        };
        let (coarse, fine) = (gap_at(128), gap_at(512));
        assert!(
            fine < 0.35 * coarse && fine < 2e-2 * (1.0 + inner.abs()),
            "gaps {coarse} → {fine}, flux = {inner}, outer = {outer}"
        );
    }

    #[test]
    fn bb_ky_integral_is_monotone_in_eps() {
        // K_Y ≥ 0 near the crossing circle: growing the mask can only shrink
        // the integral
        let s = surfaces::bb_annulus(1.0, 1.0, 1.0).unwrap();
        let report = umbilic::detect_umbilic_set(&s, 96).unwrap();
        let curve = &report.curves[0];
        let mut vals = Vec::new();
        for &eps in &[0.05, 0.1, 0.2] {
            let df = curve_band_distance(s.ambient, s.main_chart(), &curve.polyline, curve.closed, eps).unwrap();
            let fam = EpsilonFamily::new(&s, &report, vec![&df]).unwrap();
            vals.push(integrate_ky_outside(&s, &fam, eps, 128).unwrap());
        }
        assert!(vals[0] >= vals[1] && vals[1] >= vals[2], "not monotone: {vals:?}");
    }

    #[test]
    fn bb_boundary_flux_scales_like_twice_length_over_eps() {
        let s = surfaces::bb_annulus(1.0, 1.0, 1.0).unwrap();
        let report = umbilic::detect_umbilic_set(&s, 96).unwrap();
        assert_eq!(report.curves.len(), 1);
        let curve_l = report.curves[0].length_g;
        assert_relative_eq!(curve_l, 2.0 * PI, epsilon = 1e-3);
        let eps = 0.1;
        let flux = boundary_rho_flux(&s, &report, eps).unwrap();
        // 2L/ε dominates; the O(1) tail stays below a couple of percent here
        assert_relative_eq!(flux, 2.0 * curve_l / eps, max_relative = 0.03);
    }

    #[test]
    fn renormalized_energy_matches_direct_quadrature_on_the_clifford_torus() {
        let s = surfaces::clifford();
        let report = umbilic::detect_umbilic_set(&s, 64).unwrap();
        let fam = EpsilonFamily::new(&s, &report, vec![]).unwrap();
        let r =
            renormalized_energy(&s, &report, &fam, &epsilon_ladder(0.2, 0.02, 8), 96).unwrap();
        let e = 4.0 * PI * PI;
        assert_relative_eq!(r.direct, e, max_relative = 1e-6);
        assert_relative_eq!(r.renormalized, e, max_relative = 1e-3);
        assert!(r.gap <= 1e-3 * e, "gap {}", r.gap);
    }

    #[test]
    fn renormalized_energy_matches_direct_quadrature_on_the_inverted_catenoid() {
        let s = surfaces::inverted_catenoid(1.0).unwrap();
        let report = umbilic::detect_umbilic_set(&s, 96).unwrap();
        let fam = EpsilonFamily::new(&s, &report, vec![]).unwrap();
        let r =
            renormalized_energy(&s, &report, &fam, &epsilon_ladder(0.2, 0.02, 8), 128).unwrap();
        let e = 8.0 * PI;
        assert_relative_eq!(r.direct, e, max_relative = 1e-2);
        assert_relative_eq!(r.renormalized, e, max_relative = 1e-2);
    }

    #[test]
    fn renormalized_energy_rejects_totally_umbilic_surfaces() {
        let s = surfaces::sphere(1.0).unwrap();
        let report = umbilic::UmbilicReport::default();
        let fam = EpsilonFamily::new(&s, &report, vec![]).unwrap();
        assert!(matches!(
            renormalized_energy(&s, &report, &fam, &epsilon_ladder(0.2, 0.02, 8), 64),
            Err(Error::TotallyUmbilic(_))
        ));
    }
}
