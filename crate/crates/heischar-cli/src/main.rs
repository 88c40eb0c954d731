//! Command-line front end: boundary scans, convex certificates, the
//! product map, convex profile maps, and report/plot emission.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use heischar::characteristic::{
    certify_convex, disc_certificate, scan, CertifyOptions, ScanConfig, DEFAULT_RANK_RATIO_TOL,
};
use heischar::convex::{disc_to_region, radial_extent, region_to_disc, ConvexProfile};
use heischar::heis::HPoint;
use heischar::profile::{euclidean_ball, koranyi_ball, make_torus, Domain, MeshSpec, Profile};
use heischar::report::{
    render_certificate_json, render_scan_json, svg_heatmap, svg_profile, write_csv, RunMeta,
    Timings,
};
use heischar::torus_map::{from_product, tangent_map_min_singular, to_product, ProductPoint};

/// Characteristic-point toolkit for Heisenberg-group domains.
#[derive(Parser)]
#[command(name = "heischar", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Scan a domain boundary for characteristic points.
    Scan(ScanArgs),
    /// Certify a convex-profile torus non-characteristic.
    Certify(CertifyArgs),
    /// Evaluate the product map (w, z/|z|), its inverse, or its round trips.
    Map(MapArgs),
    /// Convex profile-to-disc maps: radial extents, round trips, sketch.
    ProfileMap(ProfileMapArgs),
    /// Re-emit figures from an existing scan report.
    Report(ReportArgs),
}

#[derive(Args)]
struct ScanArgs {
    /// Built-in domain: koranyi-ball | euclidean-ball | torus.
    #[arg(long)]
    domain: String,
    /// Center: "x,y,t" for balls.
    #[arg(long, default_value = "0,0,0")]
    center: String,
    /// Radius for balls.
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Box grid nodes per axis (implicit scans).
    #[arg(long)]
    grid: Option<usize>,
    /// Parametric mesh "NSxNT" (torus scans).
    #[arg(long)]
    mesh: Option<String>,
    /// Profile for torus domains: a built-in call like "disc(1,2,1)".
    #[arg(long)]
    profile: Option<String>,
    /// Profile config file (builtin = ... or expr = ... with bbox = ...).
    #[arg(long)]
    profile_file: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-6)]
    tol_char: f64,
    #[arg(long, default_value_t = 1e-3)]
    tol_suspect: f64,
    /// Dedupe radius in gauge distance (default 1e-3 × domain diameter).
    #[arg(long)]
    dedupe_radius: Option<f64>,
    #[arg(long, default_value_t = 200)]
    refine_iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also run the convex certificate and attach it to the report
    /// (torus domains only).
    #[arg(long)]
    certify: bool,
    #[arg(long, default_value_t = 10_000)]
    cert_samples: usize,
    /// Output JSON path.
    #[arg(long)]
    out: PathBuf,
    /// Optional per-sample CSV path.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Optional SVG heatmap path (parametric scans only).
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct CertifyArgs {
    /// Profile: "disc" (with --center/--radius), a call like
    /// "ellipse(0,3,2,1)", or @ignored when --profile-file is given.
    #[arg(long)]
    profile: Option<String>,
    #[arg(long)]
    profile_file: Option<PathBuf>,
    /// Disc center "a1,a2" when --profile disc is used.
    #[arg(long)]
    center: Option<String>,
    /// Disc radius when --profile disc is used.
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// Interior reference point "a1,a2" (default: boundary centroid).
    #[arg(long)]
    reference_point: Option<String>,
    /// Reference disc radius (default: half the clearance).
    #[arg(long)]
    reference_radius: Option<f64>,
    /// Minimum admissible rank ratio per sample.
    #[arg(long, default_value_t = DEFAULT_RANK_RATIO_TOL)]
    min_rank_ratio: f64,
    /// Output JSON path (defaults to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MapArgs {
    /// Forward map of a point "x,y,t".
    #[arg(long)]
    point: Option<String>,
    /// Inverse map of a product point "w1,w2,u1,u2".
    #[arg(long)]
    inverse: Option<String>,
    /// Round-trip diagnostics over N random points.
    #[arg(long)]
    roundtrip: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ProfileMapArgs {
    #[arg(long)]
    profile: Option<String>,
    #[arg(long)]
    profile_file: Option<PathBuf>,
    /// Interior reference point "a1,a2".
    #[arg(long)]
    reference_point: Option<String>,
    #[arg(long)]
    reference_radius: Option<f64>,
    /// Print a(ω) at N circle directions.
    #[arg(long, default_value_t = 16)]
    omega_samples: usize,
    /// Disc/region round-trip diagnostics over N random points.
    #[arg(long)]
    roundtrip: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Optional SVG sketch of the profile with the reference disc.
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Existing scan report JSON.
    #[arg(long)]
    input: PathBuf,
    /// Emit the measure heatmap here.
    #[arg(long)]
    svg: PathBuf,
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("HEISCHAR_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Scan(args) => cmd_scan(args),
        Cmd::Certify(args) => cmd_certify(args),
        Cmd::Map(args) => cmd_map(args),
        Cmd::ProfileMap(args) => cmd_profile_map(args),
        Cmd::Report(args) => cmd_report(args),
    }
}

fn parse_tuple<const N: usize>(s: &str, what: &str) -> Result<[f64; N]> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("invalid {what} `{s}`"))?;
    if parts.len() != N {
        bail!("{what} needs {N} comma-separated numbers, got `{s}`");
    }
    let mut out = [0.0; N];
    out.copy_from_slice(&parts);
    Ok(out)
}

fn parse_mesh(s: &str) -> Result<(usize, usize)> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| anyhow!("mesh must look like 256x64, got `{s}`"))?;
    Ok((a.trim().parse()?, b.trim().parse()?))
}

fn load_profile(
    call: Option<&str>,
    file: Option<&Path>,
    center: Option<&str>,
    radius: Option<f64>,
) -> Result<Profile> {
    if let Some(path) = file {
        let contents = std::fs::read_to_string(path)
            .with_context(|| format!("reading profile file {}", path.display()))?;
        return Ok(Profile::from_config_str(&contents)?);
    }
    let call = call.ok_or_else(|| anyhow!("either --profile or --profile-file is required"))?;
    if call.contains('(') {
        return Ok(Profile::from_spec_str(call)?);
    }
    match call {
        "disc" => {
            let c = parse_tuple::<2>(
                center.ok_or_else(|| anyhow!("--profile disc needs --center a1,a2"))?,
                "disc center",
            )?;
            let r = radius.ok_or_else(|| anyhow!("--profile disc needs --radius"))?;
            Ok(Profile::disc(c, r)?)
        }
        other => bail!("unknown profile `{other}`; use a call like disc(1,2,1)"),
    }
}

fn meta_since(start: Instant) -> RunMeta {
    RunMeta {
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
        timings_ms: Timings {
            total_ms: start.elapsed().as_secs_f64() * 1e3,
        },
    }
}

fn cmd_scan(args: ScanArgs) -> Result<ExitCode> {
    let start = Instant::now();
    let (domain, default_mesh) = match args.domain.as_str() {
        "koranyi-ball" => {
            let c = parse_tuple::<3>(&args.center, "center")?;
            let d = koranyi_ball(&HPoint::from_coords3(c), args.radius)?;
            (Domain::Implicit(d), MeshSpec::Box { n: 64 })
        }
        "euclidean-ball" => {
            let c = parse_tuple::<3>(&args.center, "center")?;
            let d = euclidean_ball(c, args.radius)?;
            (Domain::Implicit(d), MeshSpec::Box { n: 48 })
        }
        "torus" => {
            let profile = load_profile(
                args.profile.as_deref(),
                args.profile_file.as_deref(),
                None,
                None,
            )?;
            let torus = make_torus(profile)?;
            let mesh = if torus.profile().boundary().is_some() {
                MeshSpec::Parametric {
                    n_s: 256,
                    n_theta: 64,
                }
            } else {
                MeshSpec::Box { n: 64 }
            };
            (Domain::Torus(torus), mesh)
        }
        other => bail!("unknown domain `{other}` (koranyi-ball | euclidean-ball | torus)"),
    };
    let mesh = match (&args.mesh, args.grid) {
        (Some(m), _) => {
            let (n_s, n_theta) = parse_mesh(m)?;
            MeshSpec::Parametric { n_s, n_theta }
        }
        (None, Some(n)) => MeshSpec::Box { n },
        (None, None) => default_mesh,
    };
    let mut cfg = ScanConfig {
        mesh,
        tol_char: args.tol_char,
        tol_suspect: args.tol_suspect,
        refine_iters: args.refine_iters,
        seed: args.seed,
        ..ScanConfig::default()
    };
    if let Some(r) = args.dedupe_radius {
        cfg.dedupe_radius_rel = r / domain.diameter();
    }
    let mut out = scan(&domain, &cfg)?;
    if args.certify {
        let Domain::Torus(torus) = &domain else {
            bail!("--certify applies to torus domains only");
        };
        out.report.certificate = Some(certify_convex(
            torus,
            &CertifyOptions {
                n_samples: args.cert_samples,
                ..CertifyOptions::default()
            },
        )?);
    }
    let json = render_scan_json(&out.report, &meta_since(start))?;
    std::fs::write(&args.out, &json).with_context(|| format!("writing {}", args.out.display()))?;
    if let Some(path) = &args.csv {
        let mut buf = Vec::new();
        write_csv(&out.samples, &mut buf)?;
        std::fs::write(path, buf).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &args.svg {
        let svg = svg_heatmap(&out.report)?;
        std::fs::write(path, svg).with_context(|| format!("writing {}", path.display()))?;
    }
    println!(
        "scan: {} samples, {} characteristic, {} suspect, global min m = {:.6e} -> {}",
        out.report.sample_count,
        out.report.characteristic.len(),
        out.report.suspect.len(),
        out.report.global_min_m.value,
        args.out.display()
    );
    if let Some(cert) = &out.report.certificate {
        if !cert.pass {
            return Ok(ExitCode::from(2));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_certify(args: CertifyArgs) -> Result<ExitCode> {
    let start = Instant::now();
    let profile = load_profile(
        args.profile.as_deref(),
        args.profile_file.as_deref(),
        args.center.as_deref(),
        args.radius,
    )?;
    let torus = make_torus(profile)?;
    let opts = CertifyOptions {
        n_samples: args.samples,
        reference_point: match &args.reference_point {
            Some(s) => Some(parse_tuple::<2>(s, "reference point")?),
            None => None,
        },
        reference_radius: args.reference_radius,
        min_rank_ratio: args.min_rank_ratio,
        ..CertifyOptions::default()
    };
    let cert = certify_convex(&torus, &opts)?;
    let disc_bound = match torus.profile().spec() {
        heischar::ProfileSpec::Disc { center, radius } => Some(disc_certificate(*center, *radius)?),
        _ => None,
    };
    let json = render_certificate_json(
        &Domain::Torus(torus.clone()).descriptor(),
        &cert,
        disc_bound.as_ref(),
        &meta_since(start),
    )?;
    match &args.out {
        Some(path) => {
            std::fs::write(path, &json).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{json}"),
    }
    if cert.pass {
        eprintln!(
            "certify: PASS on {} samples (min rank ratio {:.3e})",
            cert.n_samples, cert.min_rank_ratio
        );
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!(
            "certify: FAIL — {} of {} samples below the rank threshold {:.3e}",
            cert.violations.len(),
            cert.n_samples,
            cert.threshold
        );
        Ok(ExitCode::from(2))
    }
}

fn cmd_map(args: MapArgs) -> Result<ExitCode> {
    if let Some(point) = &args.point {
        let c = parse_tuple::<3>(point, "point")?;
        let q = to_product(&HPoint::from_coords3(c))?;
        let sv = tangent_map_min_singular(&HPoint::from_coords3(c))?;
        println!(
            "{}",
            serde_json::json!({ "point": c, "w": q.w, "u": q.u, "tangent_min_singular": sv })
        );
        return Ok(ExitCode::SUCCESS);
    }
    if let Some(inv) = &args.inverse {
        let v = parse_tuple::<4>(inv, "product point")?;
        let p = from_product(&ProductPoint::new([v[0], v[1]], [v[2], v[3]])?)?;
        println!(
            "{}",
            serde_json::json!({ "w": [v[0], v[1]], "u": [v[2], v[3]], "point": p.coords3() })
        );
        return Ok(ExitCode::SUCCESS);
    }
    if let Some(n) = args.roundtrip {
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        let mut max_err = 0.0f64;
        let mut min_sv = f64::INFINITY;
        let mut done = 0;
        while done < n {
            let p = HPoint::xyt(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-4.0..4.0),
            );
            if p.z_norm() < 0.1 {
                continue;
            }
            let back = from_product(&to_product(&p)?)?;
            for i in 0..3 {
                max_err = max_err.max((back.coords3()[i] - p.coords3()[i]).abs());
            }
            min_sv = min_sv.min(tangent_map_min_singular(&p)?);
            done += 1;
        }
        println!(
            "{}",
            serde_json::json!({
                "samples": n,
                "seed": args.seed,
                "max_roundtrip_error": max_err,
                "min_tangent_singular_value": min_sv,
            })
        );
        return Ok(ExitCode::SUCCESS);
    }
    bail!("map needs one of --point, --inverse, --roundtrip")
}

fn cmd_profile_map(args: ProfileMapArgs) -> Result<ExitCode> {
    let profile = load_profile(
        args.profile.as_deref(),
        args.profile_file.as_deref(),
        None,
        None,
    )?;
    let reference = match &args.reference_point {
        Some(s) => Some(parse_tuple::<2>(s, "reference point")?),
        None => None,
    };
    let cp = ConvexProfile::new(profile.clone(), reference, args.reference_radius)?;
    let a = cp.reference_point();
    let r = cp.reference_radius();
    let mut extents = Vec::new();
    for k in 0..args.omega_samples.max(4) {
        let phi = std::f64::consts::TAU * k as f64 / args.omega_samples.max(4) as f64;
        let omega = [a[0] + r * phi.cos(), a[1] + r * phi.sin()];
        extents.push(serde_json::json!({
            "angle": phi,
            "omega": omega,
            "radial_extent": radial_extent(&cp, omega)?,
        }));
    }
    let roundtrip = match args.roundtrip {
        Some(n) => {
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            let mut max_err = 0.0f64;
            for _ in 0..n {
                let ang: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                let rad: f64 = rng.gen_range(0.0..1.0f64).sqrt() * r;
                let y = [a[0] + rad * ang.cos(), a[1] + rad * ang.sin()];
                let x = disc_to_region(&cp, y)?;
                let back = region_to_disc(&cp, x)?;
                max_err = max_err.max(((back[0] - y[0]).powi(2) + (back[1] - y[1]).powi(2)).sqrt());
            }
            Some(serde_json::json!({ "samples": n, "seed": args.seed, "max_error": max_err }))
        }
        None => None,
    };
    let doc = serde_json::json!({
        "profile": serde_json::to_value(profile.spec())?,
        "reference_point": a,
        "reference_radius": r,
        "clearance": cp.clearance(),
        "radial_extents": extents,
        "roundtrip": roundtrip,
    });
    let text = format!("{}\n", serde_json::to_string_pretty(&doc)?);
    match &args.out {
        Some(path) => {
            std::fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{text}"),
    }
    if let Some(path) = &args.svg {
        let svg = svg_profile(&profile, Some(a), Some(r))?;
        std::fs::write(path, svg).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_report(args: ReportArgs) -> Result<ExitCode> {
    let text = std::fs::read_to_string(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let report: heischar::characteristic::CharacteristicReport =
        serde_json::from_value(value.clone()).map_err(|e| anyhow!("not a scan report: {e}"))?;
    let svg = svg_heatmap(&report)?;
    std::fs::write(&args.svg, svg).with_context(|| format!("writing {}", args.svg.display()))?;
    println!(
        "report: heatmap for {} ({} characteristic points) -> {}",
        value["domain"]["kind"].as_str().unwrap_or("?"),
        report.characteristic.len(),
        args.svg.display()
    );
    Ok(ExitCode::SUCCESS)
}
