//! Characteristic-point analysis: the normalized characteristic measure,
//! tangent/horizontal intersections, boundary scanning with local
//! refinement, and the convex-profile certificate.
//!
//! A boundary point is characteristic exactly when the horizontal gradient
//! of a defining function vanishes there, equivalently when the boundary
//! tangent plane coincides with the horizontal plane. The scanner reports
//! the dimensionless measure m = |∇_HΨ| / (‖∇Ψ‖·(1 + 2|z|)), which is
//! invariant under rescaling Ψ by a positive smooth factor on the zero set
//! and bounded by √2, so a single absolute threshold is portable across
//! domains.

use rayon::prelude::*;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::field::{AmbientField, GradientData};
use crate::heis::{distance, HPoint, TangentVector};
use crate::profile::{
    boundary_mesh, newton_project, Domain, DomainSpec, MeshResult, MeshSpec, ProfileSpec,
    TorusDomain,
};

/// Angular tolerance for the planar tangent-membership test.
pub const ANGULAR_TOL: f64 = 1e-9;

/// Defaults mirrored by the CLI.
pub const DEFAULT_TOL_CHAR: f64 = 1e-6;
pub const DEFAULT_TOL_SUSPECT: f64 = 1e-3;
pub const DEFAULT_DEDUPE_RADIUS_REL: f64 = 1e-3;
pub const DEFAULT_REFINE_ITERS: usize = 200;
pub const DEFAULT_PROJECTION_TOL_REL: f64 = 1e-13;
pub const DEFAULT_RANK_RATIO_TOL: f64 = 1e-5;

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm3(a: &[f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

fn normalize3(a: &[f64; 3]) -> [f64; 3] {
    let n = norm3(a);
    [a[0] / n, a[1] / n, a[2] / n]
}

/// Covector annihilating the horizontal plane at (x, y): dt + 2x dy − 2y dx.
fn contact_covector(x: f64, y: f64) -> [f64; 3] {
    [-2.0 * y, 2.0 * x, 1.0]
}

/// σ₂/σ₁ of the 2×3 matrix with the given rows; 0 means proportional rows.
fn singular_ratio(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let c = cross3(a, b);
    let c2 = dot3(&c, &c);
    let aa = dot3(a, a);
    let bb = dot3(b, b);
    let tr = aa + bb;
    if tr <= 0.0 {
        return 0.0;
    }
    let disc = (tr * tr - 4.0 * c2).max(0.0).sqrt();
    let l1 = 0.5 * (tr + disc);
    if l1 <= 0.0 {
        return 0.0;
    }
    let l2 = c2 / l1;
    (l2 / l1).max(0.0).sqrt()
}

/// The normalized characteristic measure from precomputed gradient data.
pub fn measure_from_grad(x: f64, y: f64, grad: &GradientData<3>) -> Result<f64> {
    let gn = grad.euclidean_norm();
    if gn < 1e-300 {
        return Err(Error::DegenerateGradient);
    }
    let hn = grad.horizontal_norm();
    let z = (x * x + y * y).sqrt();
    Ok(hn / (gn * (1.0 + 2.0 * z)))
}

/// m = |∇_HΨ(ξ)| / (‖∇Ψ(ξ)‖·(1 + 2|z(ξ)|)); zero exactly at characteristic
/// points, at most √2 anywhere.
pub fn char_measure(psi: &AmbientField, xi: &HPoint) -> Result<f64> {
    if xi.n() != 1 {
        return Err(Error::RequiresDim1(xi.n()));
    }
    let c = xi.coords3();
    let gd = psi.eval_with_gradient(&c)?;
    measure_from_grad(c[0], c[1], &gd)
}

/// Tangent plane of the boundary at a point, its intersection with the
/// horizontal plane, and the resulting dimension (1 regular, 2
/// characteristic).
#[derive(Clone, Debug)]
pub struct TangentFrame {
    /// Orthonormal basis of ker ∇Ψ.
    pub basis: [[f64; 3]; 2],
    /// Frame fields X, Y at the point.
    pub horizontal: [[f64; 3]; 2],
    pub intersection_dim: u8,
    /// Generator of the 1-dimensional intersection when regular.
    pub generator: Option<[f64; 3]>,
    /// σ₂/σ₁ of the covector pair {∇Ψ, θ}; the dimension is 2 when this
    /// falls below the configured rank tolerance.
    pub rank_ratio: f64,
}

pub fn tangent_frame(psi: &AmbientField, xi: &HPoint, rank_ratio_tol: f64) -> Result<TangentFrame> {
    if xi.n() != 1 {
        return Err(Error::RequiresDim1(xi.n()));
    }
    let c = xi.coords3();
    let gd = psi.eval_with_gradient(&c)?;
    let g = gd.euclidean;
    let gn = norm3(&g);
    if gn < 1e-300 {
        return Err(Error::DegenerateGradient);
    }
    // Orthonormal tangent basis from the least-aligned axis.
    let axis = {
        let abs = [g[0].abs(), g[1].abs(), g[2].abs()];
        if abs[0] <= abs[1] && abs[0] <= abs[2] {
            [1.0, 0.0, 0.0]
        } else if abs[1] <= abs[2] {
            [0.0, 1.0, 0.0]
        } else {
            [0.0, 0.0, 1.0]
        }
    };
    let b1 = normalize3(&cross3(&g, &axis));
    let b2 = normalize3(&cross3(&g, &b1));
    let theta = contact_covector(c[0], c[1]);
    let ratio = singular_ratio(&g, &theta);
    let dim = if ratio < rank_ratio_tol { 2 } else { 1 };
    let generator = if dim == 1 {
        Some(normalize3(&cross3(&g, &theta)))
    } else {
        None
    };
    Ok(TangentFrame {
        basis: [b1, b2],
        horizontal: [[1.0, 0.0, 2.0 * c[1]], [0.0, 1.0, -2.0 * c[0]]],
        intersection_dim: dim,
        generator,
        rank_ratio: ratio,
    })
}

/// Membership of a coordinate vector in the boundary tangent plane of a
/// torus domain, decided in the profile plane: v is tangent iff the pushed
/// planar vector (v₃, 2(x v₁ + y v₂)) lies on the tangent line of the
/// profile boundary at w(ξ). The 2 is the derivative of x² + y².
pub fn tangent_membership(domain: &TorusDomain, xi: &HPoint, v: &TangentVector) -> Result<bool> {
    if v.base() != xi {
        return Err(Error::BasePointMismatch);
    }
    let c = xi.coords3();
    let w0 = [c[2], c[0] * c[0] + c[1] * c[1]];
    let u = domain.profile().implicit();
    let val = u.value_raw(&w0);
    let n = u.gradient_raw(&w0);
    let nn = (n[0] * n[0] + n[1] * n[1]).sqrt();
    if nn < 1e-12 {
        return Err(Error::MissingTangentData);
    }
    if val.abs() > 1e-6 * (1.0 + nn * u.bounds().diameter()) {
        return Err(Error::NotOnBoundary(val));
    }
    let [v1, v2, v3] = v.components3();
    let pushed = [v3, 2.0 * (c[0] * v1 + c[1] * v2)];
    let pn = (pushed[0] * pushed[0] + pushed[1] * pushed[1]).sqrt();
    if pn == 0.0 {
        return Ok(true);
    }
    Ok((n[0] * pushed[0] + n[1] * pushed[1]).abs() <= ANGULAR_TOL * nn * pn)
}

/// Horizontal unit normal ∇_HΨ/|∇_HΨ| at a non-characteristic boundary
/// point; undefined (an error) where the measure falls below `tol_char`.
pub fn horizontal_normal(
    psi: &AmbientField,
    xi: &HPoint,
    tol_char: f64,
) -> Result<crate::heis::HorizontalVector> {
    if xi.n() != 1 {
        return Err(Error::RequiresDim1(xi.n()));
    }
    let c = xi.coords3();
    let gd = psi.eval_with_gradient(&c)?;
    let m = measure_from_grad(c[0], c[1], &gd)?;
    if m <= tol_char {
        return Err(Error::CharacteristicPoint(m));
    }
    let h = gd.horizontal.expect("ambient field");
    let hn = (h[0] * h[0] + h[1] * h[1]).sqrt();
    crate::heis::HorizontalVector::new(xi.clone(), &[h[0] / hn], &[h[1] / hn])
}

/// Scan configuration; every tolerance here is echoed in the report.
#[derive(Clone, Debug)]
pub struct ScanConfig {
    pub mesh: MeshSpec,
    pub tol_char: f64,
    pub tol_suspect: f64,
    /// Merge radius for refined minima, relative to the domain diameter,
    /// measured in the gauge distance.
    pub dedupe_radius_rel: f64,
    pub refine_iters: usize,
    /// Newton projection target, relative to the boundary scale; the mesh
    /// guarantees 1e−10 · scale regardless.
    pub projection_tol_rel: f64,
    /// Rank-ratio threshold deciding intersection dimension 2.
    pub rank_ratio_tol: f64,
    /// Validation switch: refine torus minima in both boundary parameters
    /// instead of the s-only default.
    pub refine_full_2d: bool,
    pub seed: u64,
}

impl ScanConfig {
    pub fn parametric(n_s: usize, n_theta: usize) -> Self {
        ScanConfig {
            mesh: MeshSpec::Parametric { n_s, n_theta },
            ..ScanConfig::default()
        }
    }

    pub fn boxed(n: usize) -> Self {
        ScanConfig {
            mesh: MeshSpec::Box { n },
            ..ScanConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol_char > 0.0 && self.tol_char < self.tol_suspect) {
            return Err(Error::BadTolerances);
        }
        Ok(())
    }

    fn refine_step_hint(&self) -> f64 {
        match self.mesh {
            MeshSpec::Parametric { n_s, .. } => 1.0 / n_s as f64,
            MeshSpec::Box { n } => 1.0 / n as f64,
        }
    }
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            mesh: MeshSpec::Box { n: 64 },
            tol_char: DEFAULT_TOL_CHAR,
            tol_suspect: DEFAULT_TOL_SUSPECT,
            dedupe_radius_rel: DEFAULT_DEDUPE_RADIUS_REL,
            refine_iters: DEFAULT_REFINE_ITERS,
            projection_tol_rel: DEFAULT_PROJECTION_TOL_REL,
            rank_ratio_tol: DEFAULT_RANK_RATIO_TOL,
            refine_full_2d: false,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct Extremum {
    pub value: f64,
    pub point: [f64; 3],
    pub param: Option<[f64; 2]>,
}

#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct CharPoint {
    pub point: [f64; 3],
    pub m: f64,
    pub hgrad_norm: f64,
    pub converged: bool,
    pub param: Option<[f64; 2]>,
    pub intersection_dim: u8,
}

#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct ToleranceEcho {
    pub tol_char: f64,
    pub tol_suspect: f64,
    pub dedupe_radius: f64,
    pub projection_tol_rel: f64,
    pub rank_ratio_tol: f64,
    pub refine_iters: usize,
    pub fd_grad_step: f64,
    pub fd_hess_step: f64,
}

#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct MGrid {
    pub n_s: usize,
    pub n_theta: usize,
    /// Row-major, s index major.
    pub values: Vec<f64>,
}

/// Scan verdicts and context; volatile data (timestamps, timings) is added
/// by the emitter, not here, so equal inputs give equal reports.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct CharacteristicReport {
    pub kind: String,
    pub domain: DomainSpec,
    pub mesh: MeshSpec,
    pub tolerances: ToleranceEcho,
    pub seed: u64,
    pub scale: f64,
    pub sample_count: usize,
    pub dropped_samples: usize,
    pub global_min_m: Extremum,
    pub global_min_hgrad: Extremum,
    pub characteristic: Vec<CharPoint>,
    pub suspect: Vec<CharPoint>,
    pub defining_violations: Vec<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<ConvexCertificate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_grid: Option<MGrid>,
    pub notes: Vec<String>,
}

/// One scanned boundary sample, as emitted to CSV.
#[derive(Clone, Copy, Debug)]
pub struct BoundarySample {
    pub point: [f64; 3],
    pub psi: f64,
    pub grad: [f64; 3],
    pub hgrad: [f64; 2],
    pub m: f64,
    pub param: Option<[f64; 2]>,
}

pub struct ScanOutput {
    pub report: CharacteristicReport,
    pub samples: Vec<BoundarySample>,
}

struct RefinedMin {
    point: [f64; 3],
    m: f64,
    hgrad_norm: f64,
    converged: bool,
    param: Option<[f64; 2]>,
}

/// Exhaustive boundary scan: mesh the boundary, measure m everywhere,
/// refine local minima by minimizing |∇_HΨ|² in boundary coordinates, then
/// classify refined minima against the thresholds.
pub fn scan(domain: &Domain, cfg: &ScanConfig) -> Result<ScanOutput> {
    cfg.validate()?;
    let mesh = boundary_mesh(domain, &cfg.mesh, cfg.projection_tol_rel)?;
    let psi = domain.psi();
    let scale = mesh.scale;
    let degenerate_tol = 1e-10 * scale;

    let samples: Vec<BoundarySample> = mesh
        .samples
        .par_iter()
        .map(|s| {
            let h = s.grad.horizontal.expect("ambient mesh");
            let gn = s.grad.euclidean_norm();
            let m = if gn <= degenerate_tol {
                f64::NAN
            } else {
                let z = (s.point[0] * s.point[0] + s.point[1] * s.point[1]).sqrt();
                s.grad.horizontal_norm() / (gn * (1.0 + 2.0 * z))
            };
            BoundarySample {
                point: s.point,
                psi: s.psi,
                grad: s.grad.euclidean,
                hgrad: h,
                m,
                param: s.param,
            }
        })
        .collect();

    let defining_violations: Vec<[f64; 3]> = samples
        .iter()
        .filter(|s| !s.m.is_finite())
        .map(|s| s.point)
        .collect();

    let mut global_min_m = Extremum {
        value: f64::INFINITY,
        point: [0.0; 3],
        param: None,
    };
    let mut global_min_hgrad = Extremum {
        value: f64::INFINITY,
        point: [0.0; 3],
        param: None,
    };
    for s in &samples {
        if !s.m.is_finite() {
            continue;
        }
        if s.m < global_min_m.value {
            global_min_m = Extremum {
                value: s.m,
                point: s.point,
                param: s.param,
            };
        }
        let hn = (s.hgrad[0] * s.hgrad[0] + s.hgrad[1] * s.hgrad[1]).sqrt();
        if hn < global_min_hgrad.value {
            global_min_hgrad = Extremum {
                value: hn,
                point: s.point,
                param: s.param,
            };
        }
    }
    if !global_min_m.value.is_finite() {
        return Err(Error::DegenerateGradient);
    }

    // Local minima of m on the mesh seed the refinement.
    let refined = match (&cfg.mesh, domain) {
        (MeshSpec::Parametric { n_s, n_theta }, Domain::Torus(t)) => {
            let seeds = torus_seed_minima(&samples, *n_s, *n_theta);
            seeds
                .par_iter()
                .map(|&s0| refine_torus(t, psi, s0, cfg))
                .collect::<Result<Vec<_>>>()?
        }
        _ => {
            let seeds = box_seed_minima(&mesh, &samples);
            seeds
                .par_iter()
                .map(|&i| refine_implicit(psi, &samples[i], &mesh, cfg, scale))
                .collect::<Result<Vec<_>>>()?
        }
    };

    // Merge refined minima within the gauge dedupe radius, keeping the
    // lowest measure per cluster.
    let dedupe_radius = cfg.dedupe_radius_rel * domain.diameter();
    let mut order: Vec<usize> = (0..refined.len()).collect();
    order.sort_by(|&a, &b| {
        refined[a]
            .m
            .partial_cmp(&refined[b].m)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| {
                refined[a]
                    .point
                    .partial_cmp(&refined[b].point)
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
    });
    let mut kept: Vec<&RefinedMin> = Vec::new();
    for &i in &order {
        let cand = &refined[i];
        let p = HPoint::from_coords3(cand.point);
        let dup = kept.iter().any(|k| {
            distance(&p, &HPoint::from_coords3(k.point))
                .map(|d| d < dedupe_radius)
                .unwrap_or(false)
        });
        if !dup {
            kept.push(cand);
        }
    }

    let mut characteristic = Vec::new();
    let mut suspect = Vec::new();
    for r in kept {
        if r.m < global_min_m.value {
            global_min_m = Extremum {
                value: r.m,
                point: r.point,
                param: r.param,
            };
        }
        if r.m >= cfg.tol_suspect {
            continue;
        }
        let frame = tangent_frame(psi, &HPoint::from_coords3(r.point), cfg.rank_ratio_tol)?;
        let cp = CharPoint {
            point: r.point,
            m: r.m,
            hgrad_norm: r.hgrad_norm,
            converged: r.converged,
            param: r.param,
            intersection_dim: frame.intersection_dim,
        };
        if r.m < cfg.tol_char {
            characteristic.push(cp);
        } else {
            suspect.push(cp);
        }
    }

    let m_grid = match &cfg.mesh {
        MeshSpec::Parametric { n_s, n_theta } => Some(MGrid {
            n_s: *n_s,
            n_theta: *n_theta,
            values: samples.iter().map(|s| s.m).collect(),
        }),
        MeshSpec::Box { .. } => None,
    };

    let report = CharacteristicReport {
        kind: "scan".to_string(),
        domain: domain.descriptor(),
        mesh: cfg.mesh,
        tolerances: ToleranceEcho {
            tol_char: cfg.tol_char,
            tol_suspect: cfg.tol_suspect,
            dedupe_radius,
            projection_tol_rel: cfg.projection_tol_rel,
            rank_ratio_tol: cfg.rank_ratio_tol,
            refine_iters: cfg.refine_iters,
            fd_grad_step: crate::field::FD_GRAD_STEP,
            fd_hess_step: crate::field::FD_HESS_STEP,
        },
        seed: cfg.seed,
        scale,
        sample_count: samples.len(),
        dropped_samples: mesh.dropped,
        global_min_m,
        global_min_hgrad,
        characteristic,
        suspect,
        defining_violations,
        certificate: None,
        m_grid,
        notes: standard_notes(),
    };
    Ok(ScanOutput { report, samples })
}

pub fn standard_notes() -> Vec<String> {
    vec![
        "m = |grad_H psi| / (|grad psi| * (1 + 2|z|)); thresholds are absolute on m".to_string(),
        "tangent membership pushes (v1,v2,v3) to (v3, 2(x v1 + y v2)); the factor 2 is the \
         derivative of x^2 + y^2"
            .to_string(),
        "a scan that finds nothing certifies nothing: absence holds only at the scanned \
         resolution; use the convex certificate for a proof-grade verdict"
            .to_string(),
    ]
}

fn torus_seed_minima(samples: &[BoundarySample], n_s: usize, n_theta: usize) -> Vec<f64> {
    // The measure is θ-independent on a torus boundary; seed on the s-axis.
    let col: Vec<f64> = (0..n_s).map(|i| samples[i * n_theta].m).collect();
    let mut seeds = Vec::new();
    for i in 0..n_s {
        let prev = col[(i + n_s - 1) % n_s];
        let next = col[(i + 1) % n_s];
        if col[i].is_finite() && col[i] <= prev && col[i] <= next {
            seeds.push(i as f64 / n_s as f64);
        }
    }
    seeds
}

fn box_seed_minima(mesh: &MeshResult, samples: &[BoundarySample]) -> Vec<usize> {
    let mut by_cell: HashMap<[u32; 3], usize> = HashMap::new();
    for (i, s) in mesh.samples.iter().enumerate() {
        if let Some(c) = s.cell {
            by_cell.entry(c).or_insert(i);
        }
    }
    let mut seeds = Vec::new();
    for (i, s) in mesh.samples.iter().enumerate() {
        let Some(c) = s.cell else { continue };
        if !samples[i].m.is_finite() {
            continue;
        }
        let mut is_min = true;
        'outer: for di in -1i64..=1 {
            for dj in -1i64..=1 {
                for dk in -1i64..=1 {
                    if di == 0 && dj == 0 && dk == 0 {
                        continue;
                    }
                    let nc = [
                        (c[0] as i64 + di) as u32,
                        (c[1] as i64 + dj) as u32,
                        (c[2] as i64 + dk) as u32,
                    ];
                    if let Some(&j) = by_cell.get(&nc) {
                        if samples[j].m.is_finite() && samples[j].m < samples[i].m {
                            is_min = false;
                            break 'outer;
                        }
                    }
                }
            }
        }
        if is_min {
            seeds.push(i);
        }
    }
    seeds
}

fn hgrad_sq_at(psi: &AmbientField, p: &[f64; 3]) -> f64 {
    let g = psi.gradient_raw(p);
    let hx = g[0] + 2.0 * p[1] * g[2];
    let hy = g[1] - 2.0 * p[0] * g[2];
    hx * hx + hy * hy
}

fn sample_measures(psi: &AmbientField, p: &[f64; 3]) -> Result<(f64, f64)> {
    let gd = psi.eval_with_gradient(p)?;
    let m = measure_from_grad(p[0], p[1], &gd)?;
    Ok((m, gd.horizontal_norm()))
}

/// Damped descent of |∇_HΨ(B(s, θ))|² along the profile parameter. The
/// measure is θ-invariant on torus boundaries, so θ stays fixed unless the
/// full 2-d validation mode is requested.
fn refine_torus(
    domain: &TorusDomain,
    psi: &AmbientField,
    s0: f64,
    cfg: &ScanConfig,
) -> Result<RefinedMin> {
    let q = |s: f64, theta: f64| -> Result<f64> {
        let p = domain.boundary_point(s, theta)?.coords3();
        Ok(hgrad_sq_at(psi, &p))
    };
    let mut s = s0;
    let mut theta = 0.0f64;
    let mut alpha = 0.25 * cfg.refine_step_hint();
    let mut qs = q(s, theta)?;
    let mut converged = false;
    let h = 1e-7;
    for _ in 0..cfg.refine_iters {
        let p = domain.boundary_point(s, theta)?.coords3();
        let (m, _) = sample_measures(psi, &p)?;
        if m < cfg.tol_char / 10.0 {
            converged = true;
            break;
        }
        let ds = (q(s + h, theta)? - q(s - h, theta)?) / (2.0 * h);
        let dt = if cfg.refine_full_2d {
            (q(s, theta + h)? - q(s, theta - h)?) / (2.0 * h)
        } else {
            0.0
        };
        let gn = (ds * ds + dt * dt).sqrt();
        if gn < 1e-300 {
            converged = true;
            break;
        }
        let cand_s = s - alpha * ds / gn;
        let cand_t = theta - alpha * dt / gn;
        let qc = q(cand_s, cand_t)?;
        if qc < qs {
            s = cand_s;
            theta = cand_t;
            qs = qc;
            alpha = (alpha * 1.3).min(0.25);
        } else {
            alpha *= 0.5;
            if alpha < 1e-12 {
                converged = true;
                break;
            }
        }
    }
    let s = s.rem_euclid(1.0);
    let p = domain.boundary_point(s, theta)?.coords3();
    let (m, hn) = sample_measures(psi, &p)?;
    Ok(RefinedMin {
        point: p,
        m,
        hgrad_norm: hn,
        converged,
        param: Some([s, theta.rem_euclid(std::f64::consts::TAU)]),
    })
}

/// Tangent-plane projected descent of |∇_HΨ|² for implicit boundaries:
/// step in the tangent plane, re-project onto {Ψ = 0}, halve on
/// non-decrease.
fn refine_implicit(
    psi: &AmbientField,
    seed: &BoundarySample,
    mesh: &MeshResult,
    cfg: &ScanConfig,
    scale: f64,
) -> Result<RefinedMin> {
    let proj_tol = (cfg.projection_tol_rel * scale).max(1e-300);
    let mut p = seed.point;
    let mut alpha = mesh.cell_size;
    let alpha_cap = 4.0 * mesh.cell_size;
    let mut qp = hgrad_sq_at(psi, &p);
    let mut converged = false;
    for _ in 0..cfg.refine_iters {
        let gd = psi.eval_with_gradient(&p)?;
        let m = measure_from_grad(p[0], p[1], &gd)?;
        if m < cfg.tol_char / 10.0 {
            converged = true;
            break;
        }
        let nrm = normalize3(&gd.euclidean);
        let axis = if nrm[0].abs() <= nrm[1].abs() && nrm[0].abs() <= nrm[2].abs() {
            [1.0, 0.0, 0.0]
        } else if nrm[1].abs() <= nrm[2].abs() {
            [0.0, 1.0, 0.0]
        } else {
            [0.0, 0.0, 1.0]
        };
        let b1 = normalize3(&cross3(&nrm, &axis));
        let b2 = normalize3(&cross3(&nrm, &b1));
        let h = 1e-6 * (1.0 + norm3(&p));
        let probe = |d: &[f64; 3], sign: f64| {
            hgrad_sq_at(
                psi,
                &[
                    p[0] + sign * h * d[0],
                    p[1] + sign * h * d[1],
                    p[2] + sign * h * d[2],
                ],
            )
        };
        let dq1 = (probe(&b1, 1.0) - probe(&b1, -1.0)) / (2.0 * h);
        let dq2 = (probe(&b2, 1.0) - probe(&b2, -1.0)) / (2.0 * h);
        let gn = (dq1 * dq1 + dq2 * dq2).sqrt();
        if gn < 1e-300 {
            converged = true;
            break;
        }
        let dir = [
            -(dq1 * b1[0] + dq2 * b2[0]) / gn,
            -(dq1 * b1[1] + dq2 * b2[1]) / gn,
            -(dq1 * b1[2] + dq2 * b2[2]) / gn,
        ];
        let cand = [
            p[0] + alpha * dir[0],
            p[1] + alpha * dir[1],
            p[2] + alpha * dir[2],
        ];
        if let Ok(c) = newton_project(psi, cand, proj_tol, 60) {
            let qc = hgrad_sq_at(psi, &c);
            if qc < qp {
                p = c;
                qp = qc;
                alpha = (alpha * 1.3).min(alpha_cap);
                continue;
            }
        }
        alpha *= 0.5;
        if alpha < 1e-12 {
            converged = true;
            break;
        }
    }
    let (m, hn) = sample_measures(psi, &p)?;
    Ok(RefinedMin {
        point: p,
        m,
        hgrad_norm: hn,
        converged,
        param: None,
    })
}

/// Per-sample case classification of the convex certificate, relative to
/// the reference point (a₁, a₂): whether the sample's t or |z|² coordinate
/// coincides with it, or neither.
#[derive(Clone, Copy, Debug, Default, serde::Serialize, serde::Deserialize)]
pub struct CaseCounts {
    pub t_aligned: usize,
    pub radius_aligned: usize,
    pub generic: usize,
}

#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct CertViolation {
    pub point: [f64; 3],
    pub param: [f64; 2],
    pub rank_ratio: f64,
}

#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct ConvexCertificate {
    pub pass: bool,
    pub n_samples: usize,
    pub n_s: usize,
    pub n_theta: usize,
    pub reference_point: [f64; 2],
    pub reference_radius: f64,
    pub min_rank_ratio: f64,
    pub argmin_point: [f64; 3],
    pub case_counts: CaseCounts,
    pub threshold: f64,
    pub violations: Vec<CertViolation>,
    /// Closed-form lower bound of |∇_HΨ| for circular profiles.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analytic_disc_min_hgrad: Option<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct CertifyOptions {
    pub n_samples: usize,
    pub n_theta: usize,
    pub reference_point: Option<[f64; 2]>,
    pub reference_radius: Option<f64>,
    pub min_rank_ratio: f64,
    pub case_tol: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            n_samples: 10_000,
            n_theta: 16,
            reference_point: None,
            reference_radius: None,
            min_rank_ratio: DEFAULT_RANK_RATIO_TOL,
            case_tol: 1e-9,
        }
    }
}

/// Certify a convex-profile torus non-characteristic: at every boundary
/// sample the covector pair {∇Ψ, θ} must have rank 2, i.e. the tangency
/// condition and the horizontal-membership condition intersect in a line.
/// Each sample is classified into the coordinate-coincidence cases so the
/// exhaustive case split is visible in the output.
pub fn certify_convex(domain: &TorusDomain, opts: &CertifyOptions) -> Result<ConvexCertificate> {
    let cp = crate::convex::ConvexProfile::new(
        domain.profile().clone(),
        opts.reference_point,
        opts.reference_radius,
    )?;
    if domain.profile().y_min() <= 0.0 {
        return Err(Error::ProfileTouchesAxis(domain.profile().y_min()));
    }
    let n_theta = opts.n_theta.max(MIN_CERT_THETA);
    let n_s = opts.n_samples.div_ceil(n_theta);
    let psi = domain.psi();
    let a = cp.reference_point();
    type CertRow = Vec<(f64, [f64; 3], [f64; 2], u8)>;
    let rows: Result<Vec<CertRow>> = (0..n_s)
        .into_par_iter()
        .map(|i| {
            let s = i as f64 / n_s as f64;
            let mut row = Vec::with_capacity(n_theta);
            for j in 0..n_theta {
                let theta = std::f64::consts::TAU * j as f64 / n_theta as f64;
                let p = domain.boundary_point(s, theta)?.coords3();
                let g = psi.gradient(&p)?;
                let th = contact_covector(p[0], p[1]);
                let ratio = singular_ratio(&g, &th);
                let t0 = p[2];
                let zz0 = p[0] * p[0] + p[1] * p[1];
                let case = if (t0 - a[0]).abs() <= opts.case_tol * (1.0 + a[0].abs()) {
                    0u8
                } else if (zz0 - a[1]).abs() <= opts.case_tol * (1.0 + a[1].abs()) {
                    1
                } else {
                    2
                };
                row.push((ratio, p, [s, theta], case));
            }
            Ok(row)
        })
        .collect();
    let mut min_ratio = f64::INFINITY;
    let mut argmin = [0.0; 3];
    let mut counts = CaseCounts::default();
    let mut violations = Vec::new();
    let mut total = 0usize;
    for (ratio, p, param, case) in rows?.into_iter().flatten() {
        total += 1;
        match case {
            0 => counts.t_aligned += 1,
            1 => counts.radius_aligned += 1,
            _ => counts.generic += 1,
        }
        if ratio < min_ratio {
            min_ratio = ratio;
            argmin = p;
        }
        if ratio < opts.min_rank_ratio && violations.len() < 64 {
            violations.push(CertViolation {
                point: p,
                param,
                rank_ratio: ratio,
            });
        }
    }
    let analytic = match domain.profile().spec() {
        ProfileSpec::Disc { center, radius } => {
            disc_certificate(*center, *radius).ok().map(|b| b.min_hgrad)
        }
        _ => None,
    };
    Ok(ConvexCertificate {
        pass: violations.is_empty(),
        n_samples: total,
        n_s,
        n_theta,
        reference_point: a,
        reference_radius: cp.reference_radius(),
        min_rank_ratio: min_ratio,
        argmin_point: argmin,
        case_counts: counts,
        threshold: opts.min_rank_ratio,
        violations,
        analytic_disc_min_hgrad: analytic,
    })
}

const MIN_CERT_THETA: usize = 8;

/// Closed-form bound for circular profiles: on the lifted boundary
/// |∇_HΨ|² = 16|z|²r², minimized where |z|² = a₂ − r, hence
/// min |∇_HΨ|² = 16(a₂ − r)r². Requires the profile strictly above the
/// axis (a₂ > r).
#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct DiscBound {
    pub min_hgrad_sq: f64,
    pub min_hgrad: f64,
    pub attained_at_zsq: f64,
}

pub fn disc_certificate(center: [f64; 2], r: f64) -> Result<DiscBound> {
    if !(r > 0.0) {
        return Err(Error::NonPositiveRadius(r));
    }
    let clearance = center[1] - r;
    if clearance <= 0.0 {
        return Err(Error::ProfileTouchesAxis(clearance));
    }
    let min_sq = 16.0 * clearance * r * r;
    Ok(DiscBound {
        min_hgrad_sq: min_sq,
        min_hgrad: min_sq.sqrt(),
        attained_at_zsq: clearance,
    })
}
