//! Command-line front end: orchestrates the detection / sweep / energy
//! pipelines and emits machine-readable reports.
//!
//! Exit codes: 0 ok, 1 error, 2 partial (unresolved umbilic candidates).

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cgmlab::gaussbonnet::{self, epsilon_ladder};
use cgmlab::surfaces::{self, SurfaceSpec};
use cgmlab::{energies, report, umbilic, Error, Result};

#[derive(Parser)]
#[command(
    name = "cgm-lab",
    version,
    about = "Numerical laboratory for Willmore surfaces via the conformal Gauss map"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct SurfaceArgs {
    /// Built-in surface id (see `catalog`)
    #[arg(long, conflicts_with = "surface")]
    builtin: Option<String>,
    /// Built-in parameter override, `k=v` (repeatable)
    #[arg(long = "params", value_name = "K=V")]
    params: Vec<String>,
    /// JSON surface description file
    #[arg(long, value_name = "FILE")]
    surface: Option<PathBuf>,
}

#[derive(Args)]
struct CommonArgs {
    /// Grid resolution along the u-axis (v scaled by the chart aspect)
    #[arg(long, default_value_t = 128)]
    grid: usize,
    /// Worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory for reports
    #[arg(long, default_value = "out", value_name = "DIR")]
    out: PathBuf,
    /// RNG seed recorded in every report (all sampling is seeded)
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct EpsArgs {
    /// Smallest tube radius of the ε-ladder (g-units)
    #[arg(long, default_value_t = 0.02)]
    eps_min: f64,
    /// Largest tube radius of the ε-ladder (g-units)
    #[arg(long, default_value_t = 0.2)]
    eps_max: f64,
    /// Number of geometric ladder values
    #[arg(long, default_value_t = 10)]
    eps_steps: usize,
}

#[derive(Subcommand)]
enum Cmd {
    /// Detect and classify the umbilic set; dump curvature fields
    Analyze {
        #[command(flatten)]
        src: SurfaceArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Renormalized Gauss–Bonnet ε-sweep and expansion fit
    GaussBonnet {
        #[command(flatten)]
        src: SurfaceArgs,
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        eps: EpsArgs,
    },
    /// Willmore energies and space-form identity checks
    Energy {
        #[command(flatten)]
        src: SurfaceArgs,
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        eps: EpsArgs,
    },
    /// List built-in surfaces
    Catalog,
    /// Quick in-process verification battery
    Selftest {
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn parse_params(kvs: &[String]) -> Result<BTreeMap<String, f64>> {
    let mut map = BTreeMap::new();
    for kv in kvs {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::InvalidParams(format!("expected k=v, got '{kv}'")))?;
        let val: f64 = v
            .parse()
            .map_err(|_| Error::InvalidParams(format!("parameter '{k}': '{v}' is not a number")))?;
        map.insert(k.trim().to_string(), val);
    }
    Ok(map)
}

fn load_surface(src: &SurfaceArgs) -> Result<SurfaceSpec> {
    if let Some(path) = &src.surface {
        if !src.params.is_empty() {
            return Err(Error::InvalidParams("--params applies only to --builtin".into()));
        }
        return surfaces::load(path);
    }
    let id = src.builtin.as_deref().ok_or_else(|| {
        Error::InvalidParams("one of --builtin or --surface is required".into())
    })?;
    surfaces::builtin(id, &parse_params(&src.params)?)
}

fn init_threads(common: &CommonArgs) {
    if let Some(n) = common.threads {
        // ignore the error if a global pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn cmd_analyze(src: &SurfaceArgs, common: &CommonArgs) -> Result<u8> {
    let s = load_surface(src)?;
    let rep = umbilic::detect_umbilic_set(&s, common.grid)?;
    report::write_fields_csv(&s, common.grid, &common.out.join("fields.csv"))?;
    let uj = report::umbilic_json(&s, &rep, common.grid, common.seed)?;
    report::write_json(&common.out.join("umbilic.json"), &uj)?;
    println!(
        "{}: {} umbilic point(s), {} curve(s), {} unresolved; total multiplicity {}",
        s.name,
        uj.points.len(),
        uj.curves.len(),
        uj.unresolved.len(),
        uj.total_multiplicity
    );
    for c in &uj.curves {
        println!(
            "  curve on '{}': length_g {:.6}, closed {}, geodesic {}",
            c.chart,
            c.length_g,
            c.closed,
            c.geodesic.map(|b| b.to_string()).unwrap_or_else(|| "n/a".into())
        );
    }
    println!("wrote {}", common.out.join("fields.csv").display());
    println!("wrote {}", common.out.join("umbilic.json").display());
    Ok(if uj.unresolved.is_empty() { 0 } else { 2 })
}

fn cmd_gauss_bonnet(src: &SurfaceArgs, common: &CommonArgs, eps: &EpsArgs) -> Result<u8> {
    let s = load_surface(src)?;
    let rep = umbilic::detect_umbilic_set(&s, common.grid)?;
    let ladder = epsilon_ladder(eps.eps_max, eps.eps_min, eps.eps_steps);
    let run = gaussbonnet::gauss_bonnet_sweep(&s, &rep, &ladder, common.grid)?;
    report::write_sweep_csv(&run, &common.out.join("sweep.csv"))?;
    let fj = report::gauss_bonnet_json(&s, &run, common.seed);
    report::write_json(&common.out.join("fit.json"), &fj)?;
    println!(
        "{}: c1 {:+.6e} (expected {:+.6e}), c0 {:+.6e} (expected {:+.6e}), c_log {:+.3e}",
        s.name, fj.flux_fit.c1, fj.expected_c1, fj.c0, fj.expected_c0, fj.c_log
    );
    println!("verdict: {}", fj.verdict);
    println!("wrote {}", common.out.join("sweep.csv").display());
    println!("wrote {}", common.out.join("fit.json").display());
    Ok(if rep.unresolved.is_empty() { 0 } else { 2 })
}

fn cmd_energy(src: &SurfaceArgs, common: &CommonArgs, eps: &EpsArgs) -> Result<u8> {
    let s = load_surface(src)?;
    let er = energies::willmore_energies(&s, common.grid)?;
    let needs_umbilics = matches!(s.meta.space_form_case, Some(1) | Some(3));
    let umb = if needs_umbilics {
        Some(umbilic::detect_umbilic_set(&s, common.grid.min(128))?)
    } else {
        None
    };
    let case3 = if s.meta.space_form_case == Some(3) {
        let ladder = epsilon_ladder(eps.eps_max, eps.eps_min, eps.eps_steps);
        Some(energies::space_form_case3(&s, &ladder)?)
    } else {
        None
    };
    let ej = report::energy_json(&s, &er, umb.as_ref(), case3.as_ref(), common.grid, common.seed)?;
    report::write_json(&common.out.join("energy.json"), &ej)?;
    print!("{}", report::energy_summary(&ej));
    println!("wrote {}", common.out.join("energy.json").display());
    Ok(if umb.as_ref().is_some_and(|u| !u.unresolved.is_empty()) { 2 } else { 0 })
}

fn cmd_catalog() -> Result<u8> {
    println!("{:<18} {:<28} description", "id", "parameters");
    for (id, params, desc) in surfaces::catalog() {
        println!("{id:<18} {params:<28} {desc}");
    }
    Ok(0)
}

fn cmd_selftest(_common: &CommonArgs) -> Result<u8> {
    let mut failures = 0usize;
    let mut check = |name: &str, ok: bool, detail: String| {
        println!("{} {:<52} {}", if ok { "PASS" } else { "FAIL" }, name, detail);
        if !ok {
            failures += 1;
        }
    };
    let pi = std::f64::consts::PI;
    let none = BTreeMap::new();

    // round sphere: E ≈ 0, W ≈ 4π
    let sphere = surfaces::builtin("sphere", &none)?;
    let er = energies::willmore_energies(&sphere, 64)?;
    check(
        "sphere energies (E = 0, W = 4*pi)",
        er.e.abs() < 1e-8 && (er.w - 4.0 * pi).abs() < 1e-6,
        format!("E {:.3e}, W {:.9}", er.e, er.w),
    );

    // Clifford torus: E = 4π², flat conformal Gauss map, no umbilics
    let cl = surfaces::builtin("clifford", &none)?;
    let er = energies::willmore_energies(&cl, 96)?;
    check(
        "clifford energy (E = 4*pi^2)",
        (er.e - 4.0 * pi * pi).abs() < 1e-6,
        format!("E {:.9}", er.e),
    );
    let p = cgmlab::cgm::Probe::for_surface(&cl, 1e-3);
    let cf = cgmlab::cgm::curvature_fields(&p, 0.8, 1.9, 0.0)?;
    check(
        "clifford curvatures (K_Y = K_Y_perp = 0)",
        cf.ky.abs() < 1e-6 && cf.kyperp.abs() < 1e-6,
        format!("|K_Y| {:.3e}, |K_Y_perp| {:.3e}", cf.ky.abs(), cf.kyperp.abs()),
    );
    let rep = umbilic::detect_umbilic_set(&cl, 64)?;
    check(
        "clifford umbilic set is empty",
        rep.points.is_empty() && rep.curves.is_empty() && rep.unresolved.is_empty(),
        format!("{} points, {} curves", rep.points.len(), rep.curves.len()),
    );

    // expansion fit recovers exact coefficients
    let eps = epsilon_ladder(0.2, 0.02, 10);
    let samples: Vec<(f64, f64)> =
        eps.iter().map(|&e| (e, 2.0 * 3.1 / e + 5.0)).collect();
    let fit = gaussbonnet::fit_expansion(&samples)?;
    check(
        "expansion fit (6.2/eps + 5)",
        (fit.c1 - 6.2).abs() < 1e-10 && (fit.c0 - 5.0).abs() < 1e-10,
        format!("c1 {:.12}, c0 {:.12}", fit.c1, fit.c0),
    );

    // BB annulus: umbilic circle traced, planar and orthogonal crossing
    let bb = surfaces::builtin("bb_annulus", &none)?;
    let rep = umbilic::detect_umbilic_set(&bb, 96)?;
    let ok = rep.curves.len() == 1 && rep.curves[0].closed;
    let mut detail = format!("{} curve(s)", rep.curves.len());
    if ok {
        let t = umbilic::geodesic_bb_test(&bb, &rep.curves[0])?;
        detail = format!(
            "k_g max {:.3e}, planar {}, orthogonal {}",
            t.kg_max, t.planar, t.orthogonal
        );
        check("bb_annulus umbilic circle is a planar geodesic", t.kg_max < 1e-3 && t.planar && t.orthogonal, detail);
    } else {
        check("bb_annulus umbilic circle is a planar geodesic", false, detail);
    }

    println!("selftest: {} failure(s)", failures);
    Ok(if failures == 0 { 0 } else { 1 })
}

fn run() -> Result<u8> {
    let cli = Cli::parse();
    match &cli.cmd {
        Cmd::Analyze { src, common } => {
            init_threads(common);
            cmd_analyze(src, common)
        }
        Cmd::GaussBonnet { src, common, eps } => {
            init_threads(common);
            cmd_gauss_bonnet(src, common, eps)
        }
        Cmd::Energy { src, common, eps } => {
            init_threads(common);
            cmd_energy(src, common, eps)
        }
        Cmd::Catalog => cmd_catalog(),
        Cmd::Selftest { common } => {
            init_threads(common);
            cmd_selftest(common)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
