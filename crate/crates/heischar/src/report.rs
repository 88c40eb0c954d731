//! Report emission: versioned JSON (the source of truth), CSV sample
//! tables, and static SVG figures (measure heatmap over the boundary
//! parameters, profile sketch).

// SVG fragments carry their own newlines inside the format strings.
#![allow(clippy::write_with_newline)]

use std::fmt::Write as _;
use std::io::Write;

use crate::characteristic::{BoundarySample, CharacteristicReport, ConvexCertificate, DiscBound};
use crate::error::{Error, Result};
use crate::profile::{DomainSpec, Profile};

pub const SCHEMA_VERSION: u32 = 1;

/// Volatile per-run data, grouped so reproducibility comparisons can strip
/// it in one place.
#[derive(Clone, Debug, Default, serde::Serialize)]
pub struct RunMeta {
    pub timestamp: String,
    pub timings_ms: Timings,
}

#[derive(Clone, Copy, Debug, Default, serde::Serialize)]
pub struct Timings {
    pub total_ms: f64,
}

#[derive(serde::Serialize)]
struct ScanEnvelope<'a> {
    schema_version: u32,
    #[serde(flatten)]
    report: &'a CharacteristicReport,
    run: &'a RunMeta,
}

/// Render a scan report as pretty JSON. Identical report + identical meta
/// gives identical bytes.
pub fn render_scan_json(report: &CharacteristicReport, meta: &RunMeta) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&ScanEnvelope {
        schema_version: SCHEMA_VERSION,
        report,
        run: meta,
    })?;
    s.push('\n');
    Ok(s)
}

#[derive(serde::Serialize)]
struct CertifyEnvelope<'a> {
    schema_version: u32,
    kind: &'static str,
    domain: &'a DomainSpec,
    certificate: &'a ConvexCertificate,
    #[serde(skip_serializing_if = "Option::is_none")]
    disc_bound: Option<&'a DiscBound>,
    run: &'a RunMeta,
}

pub fn render_certificate_json(
    domain: &DomainSpec,
    certificate: &ConvexCertificate,
    disc_bound: Option<&DiscBound>,
    meta: &RunMeta,
) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&CertifyEnvelope {
        schema_version: SCHEMA_VERSION,
        kind: "certify",
        domain,
        certificate,
        disc_bound,
        run: meta,
    })?;
    s.push('\n');
    Ok(s)
}

/// Canonical form of a report with the volatile `run` object removed;
/// reproducibility is byte equality of this.
pub fn strip_volatile(json: &str) -> Result<String> {
    let mut v: serde_json::Value = serde_json::from_str(json)?;
    if let Some(obj) = v.as_object_mut() {
        obj.remove("run");
    }
    Ok(serde_json::to_string_pretty(&v)?)
}

/// One row per boundary sample: s, theta, x, y, t, psi, |grad|, |hgrad|, m.
pub fn write_csv<W: Write>(samples: &[BoundarySample], mut w: W) -> Result<()> {
    writeln!(w, "s,theta,x,y,t,psi,grad_norm,hgrad_norm,m")?;
    for s in samples {
        let (ps, pt) = match s.param {
            Some([a, b]) => (format!("{a}"), format!("{b}")),
            None => (String::new(), String::new()),
        };
        let gn = (s.grad[0] * s.grad[0] + s.grad[1] * s.grad[1] + s.grad[2] * s.grad[2]).sqrt();
        let hn = (s.hgrad[0] * s.hgrad[0] + s.hgrad[1] * s.hgrad[1]).sqrt();
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            ps, pt, s.point[0], s.point[1], s.point[2], s.psi, gn, hn, s.m
        )?;
    }
    Ok(())
}

fn colormap(v: f64) -> [u8; 3] {
    // Five-stop dark-to-bright map, clamped.
    const STOPS: [[f64; 3]; 5] = [
        [0.267, 0.005, 0.329],
        [0.229, 0.322, 0.545],
        [0.128, 0.567, 0.551],
        [0.369, 0.789, 0.383],
        [0.993, 0.906, 0.144],
    ];
    let v = v.clamp(0.0, 1.0) * (STOPS.len() - 1) as f64;
    let i = (v.floor() as usize).min(STOPS.len() - 2);
    let f = v - i as f64;
    let mut out = [0u8; 3];
    for k in 0..3 {
        let c = STOPS[i][k] + f * (STOPS[i + 1][k] - STOPS[i][k]);
        out[k] = (c * 255.0).round() as u8;
    }
    out
}

/// Rectangular heatmap of the measure over the boundary parameters (s
/// horizontal, θ vertical) with the refined minima marked. Only parametric
/// scans carry the grid.
pub fn svg_heatmap(report: &CharacteristicReport) -> Result<String> {
    let grid = report.m_grid.as_ref().ok_or(Error::NonParametricReport)?;
    let (w, h) = (900.0f64, 320.0f64);
    let (mx, my) = (60.0f64, 40.0f64);
    let cw = w / grid.n_s as f64;
    let ch = h / grid.n_theta as f64;
    let m_max = grid
        .values
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .fold(0.0f64, f64::max)
        .max(1e-300);
    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0}\" height=\"{:.0}\" \
         viewBox=\"0 0 {:.0} {:.0}\">\n",
        w + 2.0 * mx,
        h + 2.0 * my + 20.0,
        w + 2.0 * mx,
        h + 2.0 * my + 20.0
    );
    let _ = write!(
        svg,
        "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n<text x=\"{:.1}\" y=\"{:.1}\" \
         font-family=\"monospace\" font-size=\"13\">measure heatmap: min m = {:.6e}, max m = \
         {:.6e}</text>\n",
        mx,
        my - 14.0,
        report.global_min_m.value,
        m_max
    );
    for i in 0..grid.n_s {
        for j in 0..grid.n_theta {
            let v = grid.values[i * grid.n_theta + j];
            let color = if !v.is_finite() {
                "#ff00ff".to_string()
            } else if v < report.tolerances.tol_char {
                "#000000".to_string()
            } else {
                let c = colormap(v / m_max);
                format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
            };
            let _ = write!(
                svg,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>\n",
                mx + i as f64 * cw,
                my + j as f64 * ch,
                cw + 0.5,
                ch + 0.5,
                color
            );
        }
    }
    let mark = |svg: &mut String, param: Option<[f64; 2]>, stroke: &str| {
        if let Some([s, theta]) = param {
            let x = mx + s * w;
            let y = my + theta / std::f64::consts::TAU * h;
            let _ = write!(
                svg,
                "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"6\" fill=\"none\" stroke=\"{stroke}\" \
                 stroke-width=\"2\"/>\n"
            );
        }
    };
    for c in &report.characteristic {
        mark(&mut svg, c.param, "#ff2020");
    }
    for c in &report.suspect {
        mark(&mut svg, c.param, "#ff9f20");
    }
    mark(&mut svg, report.global_min_m.param, "#ffffff");
    let _ = write!(
        svg,
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"12\">s →</text>\n\
         <text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"12\">θ ↓</text>\n\
         </svg>\n",
        mx + w / 2.0,
        my + h + 16.0,
        8.0,
        my + h / 2.0
    );
    Ok(svg)
}

/// Sketch of a profile boundary with the reference point and disc overlay.
pub fn svg_profile(profile: &Profile, a: Option<[f64; 2]>, r: Option<f64>) -> Result<String> {
    let pts = profile.curve_samples(256)?;
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &pts {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    lo[1] = lo[1].min(0.0);
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-9);
    let size = 420.0;
    let pad = 30.0;
    let sc = (size - 2.0 * pad) / span;
    let tx = |p: [f64; 2]| -> (f64, f64) {
        (pad + (p[0] - lo[0]) * sc, size - pad - (p[1] - lo[1]) * sc)
    };
    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size:.0}\" height=\"{size:.0}\" \
         viewBox=\"0 0 {size:.0} {size:.0}\">\n<rect width=\"100%\" height=\"100%\" \
         fill=\"#ffffff\"/>\n"
    );
    // Axis line y = 0 (the forbidden boundary of the upper half-plane).
    let (x0, y0) = tx([lo[0], 0.0]);
    let (x1, _) = tx([hi[0], 0.0]);
    let _ = write!(
        svg,
        "<line x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{x1:.2}\" y2=\"{y0:.2}\" stroke=\"#888888\" \
         stroke-dasharray=\"6 3\"/>\n"
    );
    let mut path = String::from("M");
    for p in &pts {
        let (x, y) = tx(*p);
        let _ = write!(path, " {x:.2},{y:.2}");
    }
    path.push_str(" Z");
    let _ = write!(
        svg,
        "<path d=\"{path}\" fill=\"#cfe4f7\" fill-opacity=\"0.6\" stroke=\"#1f5fa8\" \
         stroke-width=\"1.5\"/>\n"
    );
    if let Some(a) = a {
        let (x, y) = tx(a);
        if let Some(r) = r {
            let _ = write!(
                svg,
                "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{:.2}\" fill=\"none\" \
                 stroke=\"#d33682\" stroke-dasharray=\"4 3\"/>\n",
                r * sc
            );
        }
        let _ = write!(
            svg,
            "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3.5\" fill=\"#d33682\"/>\n"
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
