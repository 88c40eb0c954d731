//! Constructive homeomorphism between a compact convex profile closure and
//! a reference disc around an interior point: the radial boundary extent,
//! the boundary-to-circle map and its inverse, and the full region/disc
//! maps built from them.

use crate::error::{Error, Result};
use crate::profile::Profile;

const CONVEXITY_SAMPLES: usize = 1024;
const RAY_SAMPLES: usize = 1024;
const BISECT_TOL: f64 = 1e-12;

/// A profile validated convex, together with an interior reference point A
/// and a radius r whose closed disc D(A, r) sits inside the region.
#[derive(Clone, Debug)]
pub struct ConvexProfile {
    profile: Profile,
    a: [f64; 2],
    r: f64,
    /// min ‖γ(s) − A‖ over the boundary, the clearance that bounds r.
    clearance: f64,
}

impl ConvexProfile {
    /// Validate convexity and fix A and r. Defaults: A is the boundary
    /// centroid, r is half the distance from A to the boundary.
    pub fn new(profile: Profile, a: Option<[f64; 2]>, r: Option<f64>) -> Result<Self> {
        let pts = profile.curve_samples(CONVEXITY_SAMPLES)?;
        check_convexity(&pts)?;
        let a = a.unwrap_or_else(|| {
            let mut c = [0.0, 0.0];
            for p in &pts {
                c[0] += p[0];
                c[1] += p[1];
            }
            [c[0] / pts.len() as f64, c[1] / pts.len() as f64]
        });
        if profile.implicit().value_raw(&a) >= 0.0 {
            return Err(Error::NotInterior);
        }
        let clearance = pts
            .iter()
            .map(|p| ((p[0] - a[0]).powi(2) + (p[1] - a[1]).powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min);
        let r = match r {
            Some(r) => {
                if !(r > 0.0) {
                    return Err(Error::NonPositiveRadius(r));
                }
                // The closed disc must stay inside the region closure;
                // touching the boundary is allowed.
                if r > clearance * (1.0 + 1e-12) {
                    return Err(Error::DiscNotContained { r, clearance });
                }
                r
            }
            None => 0.5 * clearance,
        };
        Ok(ConvexProfile {
            profile,
            a,
            r,
            clearance,
        })
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn reference_point(&self) -> [f64; 2] {
        self.a
    }

    pub fn reference_radius(&self) -> f64 {
        self.r
    }

    pub fn clearance(&self) -> f64 {
        self.clearance
    }
}

/// Reject boundary curves whose signed curvature changes sign at mesh
/// resolution (cross products of consecutive polyline edges).
fn check_convexity(pts: &[[f64; 2]]) -> Result<()> {
    let m = pts.len();
    let mut scale = 0.0f64;
    for i in 0..m {
        let a = pts[i];
        let b = pts[(i + 1) % m];
        scale = scale.max(((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).max(1e-300));
    }
    let tol = 1e-9 * scale;
    let (mut pos, mut neg) = (false, false);
    let mut first_neg = 0;
    for i in 0..m {
        let a = pts[i];
        let b = pts[(i + 1) % m];
        let c = pts[(i + 2) % m];
        let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
        if cross > tol {
            pos = true;
        }
        if cross < -tol {
            if !neg {
                first_neg = i;
            }
            neg = true;
        }
    }
    if pos && neg {
        return Err(Error::NonConvexProfile(first_neg));
    }
    Ok(())
}

/// March the implicit field along the ray A + τ·dir and return the single
/// boundary crossing as a τ value, bisected to 1e−12. Refuses rays that
/// exit and re-enter (multi-intersection) instead of returning the first
/// root, and rays that never exit within twice the bounding box.
pub fn ray_exit(profile: &Profile, origin: [f64; 2], dir: [f64; 2]) -> Result<f64> {
    let f = profile.implicit();
    let norm = (dir[0] * dir[0] + dir[1] * dir[1]).sqrt();
    if norm < 1e-300 {
        return Err(Error::RayNoExit);
    }
    let d = [dir[0] / norm, dir[1] / norm];
    let tau_max = 2.0 * f.bounds().diameter();
    let at = |tau: f64| [origin[0] + tau * d[0], origin[1] + tau * d[1]];
    let mut crossings = Vec::new();
    let mut prev = f.value_raw(&origin);
    let mut prev_tau = 0.0;
    for k in 1..=RAY_SAMPLES {
        let tau = tau_max * k as f64 / RAY_SAMPLES as f64;
        let v = f.value_raw(&at(tau));
        if prev <= 0.0 && v > 0.0 || prev >= 0.0 && v < 0.0 {
            crossings.push((prev_tau, tau));
        }
        prev = v;
        prev_tau = tau;
    }
    match crossings.len() {
        0 => Err(Error::RayNoExit),
        1 => {
            let (mut lo, mut hi) = crossings[0];
            let f_lo = f.value_raw(&at(lo));
            for _ in 0..128 {
                if hi - lo <= BISECT_TOL {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                let v = f.value_raw(&at(mid));
                if (v <= 0.0) == (f_lo <= 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok((0.5 * (lo + hi)) / norm)
        }
        n => Err(Error::RayMultiIntersection(n)),
    }
}

/// Radial extent a(ω): the scalar with A + a(ω)(ω − A) on the boundary,
/// for ω on the reference circle.
pub fn radial_extent(cp: &ConvexProfile, omega: [f64; 2]) -> Result<f64> {
    let d = [omega[0] - cp.a[0], omega[1] - cp.a[1]];
    let dist = (d[0] * d[0] + d[1] * d[1]).sqrt();
    if (dist - cp.r).abs() > 1e-9 * cp.r.max(1.0) {
        return Err(Error::NotOnCircle((dist - cp.r).abs()));
    }
    // ray_exit parametrizes by the input direction, so the returned value
    // is already in units of ω − A.
    ray_exit(&cp.profile, cp.a, d)
}

fn boundary_tol(cp: &ConvexProfile) -> f64 {
    1e-8 * (1.0 + cp.profile.implicit().bounds().diameter())
}

/// Boundary-to-circle map X ↦ A + r (X − A)/‖X − A‖.
pub fn boundary_to_circle(cp: &ConvexProfile, x: [f64; 2]) -> Result<[f64; 2]> {
    let v = cp.profile.implicit().value_raw(&x);
    if v.abs() > boundary_tol(cp) {
        return Err(Error::NotOnBoundary(v));
    }
    let d = [x[0] - cp.a[0], x[1] - cp.a[1]];
    let n = (d[0] * d[0] + d[1] * d[1]).sqrt();
    if n < 1e-14 {
        return Err(Error::NotInterior);
    }
    Ok([cp.a[0] + cp.r * d[0] / n, cp.a[1] + cp.r * d[1] / n])
}

/// Inverse of the boundary-to-circle map: ω ↦ A + a(ω)(ω − A).
pub fn circle_to_boundary(cp: &ConvexProfile, omega: [f64; 2]) -> Result<[f64; 2]> {
    let a = radial_extent(cp, omega)?;
    Ok([
        cp.a[0] + a * (omega[0] - cp.a[0]),
        cp.a[1] + a * (omega[1] - cp.a[1]),
    ])
}

/// Map a disc point into the region: A + ‖Y − A‖·a(ω)·d̂ with d̂ the unit
/// direction of Y − A and ω its projection onto the reference circle.
/// Sends A to A and the circle onto the boundary.
pub fn disc_to_region(cp: &ConvexProfile, y: [f64; 2]) -> Result<[f64; 2]> {
    let d = [y[0] - cp.a[0], y[1] - cp.a[1]];
    let dist = (d[0] * d[0] + d[1] * d[1]).sqrt();
    if dist > cp.r * (1.0 + 1e-12) {
        return Err(Error::OutsideDisc(dist, cp.r));
    }
    if dist < 1e-14 * cp.r {
        return Ok(cp.a);
    }
    let dhat = [d[0] / dist, d[1] / dist];
    let omega = [cp.a[0] + cp.r * dhat[0], cp.a[1] + cp.r * dhat[1]];
    let a = radial_extent(cp, omega)?;
    Ok([cp.a[0] + dist * a * dhat[0], cp.a[1] + dist * a * dhat[1]])
}

/// Map a region point into the disc: A + (‖X − A‖/a(ω))·d̂, the inverse of
/// [`disc_to_region`].
pub fn region_to_disc(cp: &ConvexProfile, x: [f64; 2]) -> Result<[f64; 2]> {
    let v = cp.profile.implicit().value_raw(&x);
    if v > boundary_tol(cp) {
        return Err(Error::OutsideRegion(v));
    }
    let d = [x[0] - cp.a[0], x[1] - cp.a[1]];
    let dist = (d[0] * d[0] + d[1] * d[1]).sqrt();
    if dist < 1e-14 {
        return Ok(cp.a);
    }
    let dhat = [d[0] / dist, d[1] / dist];
    let omega = [cp.a[0] + cp.r * dhat[0], cp.a[1] + cp.r * dhat[1]];
    let a = radial_extent(cp, omega)?;
    Ok([cp.a[0] + dist / a * dhat[0], cp.a[1] + dist / a * dhat[1]])
}
