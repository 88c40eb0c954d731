//! The diffeomorphism between the group minus its center and the product
//! of the open upper half-plane with the circle: p ↦ (w(p), z/|z|), its
//! inverse, and its tangent map.

use crate::error::{Error, Result};
use crate::heis::{HPoint, TangentVector};

/// Points closer than this to the center axis are refused outright; the
/// map is undefined on the axis and ill-conditioned next to it.
pub const CENTER_TOL: f64 = 1e-12;

/// A point of the product space: a half-plane point w with positive second
/// coordinate and a unit direction u on the circle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProductPoint {
    pub w: [f64; 2],
    pub u: [f64; 2],
}

impl ProductPoint {
    pub fn new(w: [f64; 2], u: [f64; 2]) -> Result<Self> {
        if !(w[1] > 0.0) {
            return Err(Error::NonPositiveRadiusCoord(w[1]));
        }
        let norm = (u[0] * u[0] + u[1] * u[1]).sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotUnit(norm));
        }
        Ok(ProductPoint { w, u })
    }
}

/// Forward map p ↦ (w, u) with w = (t, x² + y²) and u = z/|z|.
pub fn to_product(p: &HPoint) -> Result<ProductPoint> {
    if p.n() != 1 {
        return Err(Error::RequiresDim1(p.n()));
    }
    let [x, y, t] = p.coords3();
    let r = (x * x + y * y).sqrt();
    if r <= CENTER_TOL {
        return Err(Error::NearCenter(r));
    }
    Ok(ProductPoint {
        w: [t, x * x + y * y],
        u: [x / r, y / r],
    })
}

/// Inverse map (w, u) ↦ (√(w₂)·u, w₁).
pub fn from_product(q: &ProductPoint) -> Result<HPoint> {
    if !(q.w[1] > 0.0) {
        return Err(Error::NonPositiveRadiusCoord(q.w[1]));
    }
    let r = q.w[1].sqrt();
    Ok(HPoint::xyt(r * q.u[0], r * q.u[1], q.w[0]))
}

/// Tangent of the product space at a product point: a free half-plane
/// vector dw and a circle vector du orthogonal to u.
#[derive(Clone, Copy, Debug)]
pub struct ProductTangent {
    pub dw: [f64; 2],
    pub du: [f64; 2],
}

/// Tangent map of the forward map:
/// dw = (v₃, 2(x v₁ + y v₂)), du = (v₁, v₂)/|z| − (x v₁ + y v₂) z/|z|³.
pub fn tangent_map(p: &HPoint, v: &TangentVector) -> Result<ProductTangent> {
    if v.base() != p {
        return Err(Error::BasePointMismatch);
    }
    let [x, y, _] = p.coords3();
    let r2 = x * x + y * y;
    let r = r2.sqrt();
    if r <= CENTER_TOL {
        return Err(Error::NearCenter(r));
    }
    let [v1, v2, v3] = v.components3();
    let radial = x * v1 + y * v2;
    let dw = [v3, 2.0 * radial];
    let r3 = r2 * r;
    let du = [v1 / r - radial * x / r3, v2 / r - radial * y / r3];
    Ok(ProductTangent { dw, du })
}

/// Smallest singular value of the tangent map at p.
///
/// Written in the orthonormal output basis (dw₁, dw₂, tangential part of
/// du) the map is block-diagonal: dw₁ = v₃ alone, and the (v₁, v₂)-plane
/// maps through the 2×2 block [[2x, 2y], [−u₂/|z|, u₁/|z|]], so the
/// singular values are 1 and those of the block (closed form).
pub fn tangent_map_min_singular(p: &HPoint) -> Result<f64> {
    if p.n() != 1 {
        return Err(Error::RequiresDim1(p.n()));
    }
    let [x, y, _] = p.coords3();
    let r2 = x * x + y * y;
    let r = r2.sqrt();
    if r <= CENTER_TOL {
        return Err(Error::NearCenter(r));
    }
    // Block rows: (2x, 2y) and (-y, x)/|z|².
    let a = [2.0 * x, 2.0 * y];
    let b = [-y / r2, x / r2];
    let aa = a[0] * a[0] + a[1] * a[1];
    let bb = b[0] * b[0] + b[1] * b[1];
    let ab = a[0] * b[0] + a[1] * b[1];
    let tr = aa + bb;
    let det = aa * bb - ab * ab;
    let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
    let lam_max = 0.5 * (tr + disc);
    let lam_min = if lam_max > 0.0 { det / lam_max } else { 0.0 };
    Ok(lam_min.sqrt().min(1.0))
}
