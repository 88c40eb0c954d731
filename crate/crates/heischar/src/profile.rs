//! Planar profiles in the open upper half-plane and the group domains built
//! from them.
//!
//! A profile U is given by an implicit planar field (negative inside) and,
//! when available, a closed parametric boundary curve γ(s), s ∈ [0, 1).
//! Its preimage under w = t + i|z|² is a solid-torus domain around the
//! center axis with defining function Ψ(x, y, t) = u(t, x² + y²). Generic
//! domains (Koranyi balls, Euclidean balls, ad-hoc fields) are carried as
//! implicit domains over a bounding box.

use rayon::prelude::*;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr;
use crate::field::{
    compose_profile, AmbientField, BoundingBox, GradientData, PlanarField, ScalarField,
};
use crate::heis::HPoint;

const CURVE_VALIDATION_SAMPLES: usize = 512;

/// Closed parametric boundary curve on [0, 1); values are planar points
/// (t-coordinate, |z|²-coordinate).
#[derive(Clone)]
pub struct BoundaryCurve {
    eval: Arc<dyn Fn(f64) -> [f64; 2] + Send + Sync>,
    deriv: Option<Arc<dyn Fn(f64) -> [f64; 2] + Send + Sync>>,
}

impl std::fmt::Debug for BoundaryCurve {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BoundaryCurve")
            .field("analytic_deriv", &self.deriv.is_some())
            .finish()
    }
}

impl BoundaryCurve {
    pub fn new<F>(eval: F) -> Self
    where
        F: Fn(f64) -> [f64; 2] + Send + Sync + 'static,
    {
        BoundaryCurve {
            eval: Arc::new(eval),
            deriv: None,
        }
    }

    pub fn with_derivative<G>(mut self, deriv: G) -> Self
    where
        G: Fn(f64) -> [f64; 2] + Send + Sync + 'static,
    {
        self.deriv = Some(Arc::new(deriv));
        self
    }

    pub fn at(&self, s: f64) -> [f64; 2] {
        (self.eval)(s.rem_euclid(1.0))
    }

    /// dγ/ds, analytic when supplied, else periodic central differences.
    pub fn tangent(&self, s: f64) -> [f64; 2] {
        if let Some(d) = &self.deriv {
            return d(s.rem_euclid(1.0));
        }
        let h = 1e-6;
        let a = self.at(s + h);
        let b = self.at(s - h);
        [(a[0] - b[0]) / (2.0 * h), (a[1] - b[1]) / (2.0 * h)]
    }
}

/// Serializable description of a profile, echoed in reports.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum ProfileSpec {
    Disc {
        center: [f64; 2],
        radius: f64,
    },
    Ellipse {
        center: [f64; 2],
        semi_axes: [f64; 2],
    },
    RoundedPolygon {
        vertices: Vec<[f64; 2]>,
        corner_radius: f64,
    },
    Flower {
        center: [f64; 2],
        base_radius: f64,
        amplitude: f64,
        lobes: u32,
    },
    Expression {
        expr: String,
        bounds: [f64; 4],
    },
}

/// A bounded planar region in the open upper half-plane.
#[derive(Clone, Debug)]
pub struct Profile {
    implicit: PlanarField,
    boundary: Option<BoundaryCurve>,
    y_min: f64,
    spec: ProfileSpec,
}

impl Profile {
    pub fn implicit(&self) -> &PlanarField {
        &self.implicit
    }

    pub fn boundary(&self) -> Option<&BoundaryCurve> {
        self.boundary.as_ref()
    }

    /// Positive lower bound of the |z|²-coordinate on the boundary closure.
    pub fn y_min(&self) -> f64 {
        self.y_min
    }

    pub fn spec(&self) -> &ProfileSpec {
        &self.spec
    }

    pub fn curve_samples(&self, m: usize) -> Result<Vec<[f64; 2]>> {
        let curve = self.boundary.as_ref().ok_or(Error::MissingBoundaryCurve)?;
        Ok((0..m).map(|i| curve.at(i as f64 / m as f64)).collect())
    }

    fn assemble(
        implicit: PlanarField,
        boundary: Option<BoundaryCurve>,
        spec: ProfileSpec,
    ) -> Result<Self> {
        let y_min = match &boundary {
            Some(curve) => {
                let pts: Vec<[f64; 2]> = (0..CURVE_VALIDATION_SAMPLES)
                    .map(|i| curve.at(i as f64 / CURVE_VALIDATION_SAMPLES as f64))
                    .collect();
                validate_curve(&implicit, &pts)?;
                pts.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min)
            }
            None => implicit.bounds().min[1],
        };
        Ok(Profile {
            implicit,
            boundary,
            y_min,
            spec,
        })
    }

    /// Disc of center (a₁, a₂) and radius r.
    pub fn disc(center: [f64; 2], r: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::NonPositiveRadius(r));
        }
        let (a, b) = (center[0], center[1]);
        let bounds = BoundingBox::new([a - 1.5 * r, b - 1.5 * r], [a + 1.5 * r, b + 1.5 * r])?;
        let implicit =
            ScalarField::new(format!("disc({a},{b},{r})"), bounds, move |w: &[f64; 2]| {
                (w[0] - a).powi(2) + (w[1] - b).powi(2) - r * r
            })
            .with_gradient(move |w: &[f64; 2]| [2.0 * (w[0] - a), 2.0 * (w[1] - b)])
            .with_hessian(|_| [[2.0, 0.0], [0.0, 2.0]]);
        let curve = BoundaryCurve::new(move |s| {
            let phi = std::f64::consts::TAU * s;
            [a + r * phi.cos(), b + r * phi.sin()]
        })
        .with_derivative(move |s| {
            let phi = std::f64::consts::TAU * s;
            [
                -std::f64::consts::TAU * r * phi.sin(),
                std::f64::consts::TAU * r * phi.cos(),
            ]
        });
        Self::assemble(
            implicit,
            Some(curve),
            ProfileSpec::Disc { center, radius: r },
        )
    }

    /// Axis-aligned ellipse with semi-axes (r₁, r₂).
    pub fn ellipse(center: [f64; 2], rx: f64, ry: f64) -> Result<Self> {
        if !(rx > 0.0) {
            return Err(Error::NonPositiveRadius(rx));
        }
        if !(ry > 0.0) {
            return Err(Error::NonPositiveRadius(ry));
        }
        let (a, b) = (center[0], center[1]);
        let bounds = BoundingBox::new([a - 1.5 * rx, b - 1.5 * ry], [a + 1.5 * rx, b + 1.5 * ry])?;
        let implicit = ScalarField::new(
            format!("ellipse({a},{b},{rx},{ry})"),
            bounds,
            move |w: &[f64; 2]| {
                let u = (w[0] - a) / rx;
                let v = (w[1] - b) / ry;
                u * u + v * v - 1.0
            },
        )
        .with_gradient(move |w: &[f64; 2]| {
            [2.0 * (w[0] - a) / (rx * rx), 2.0 * (w[1] - b) / (ry * ry)]
        });
        let curve = BoundaryCurve::new(move |s| {
            let phi = std::f64::consts::TAU * s;
            [a + rx * phi.cos(), b + ry * phi.sin()]
        })
        .with_derivative(move |s| {
            let phi = std::f64::consts::TAU * s;
            [
                -std::f64::consts::TAU * rx * phi.sin(),
                std::f64::consts::TAU * ry * phi.cos(),
            ]
        });
        Self::assemble(
            implicit,
            Some(curve),
            ProfileSpec::Ellipse {
                center,
                semi_axes: [rx, ry],
            },
        )
    }

    /// Convex polygon with corners rounded by a radius: the region grown by
    /// `corner_radius`, whose boundary alternates offset edges and vertex
    /// arcs. The implicit field is the polygon signed distance minus the
    /// radius, negative inside.
    pub fn rounded_polygon(vertices: &[[f64; 2]], corner_radius: f64) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidProfile(
                "rounded polygon needs at least 3 vertices".into(),
            ));
        }
        if !(corner_radius > 0.0) {
            return Err(Error::NonPositiveRadius(corner_radius));
        }
        let mut verts = vertices.to_vec();
        // Normalize to counter-clockwise orientation.
        let area2: f64 = verts
            .iter()
            .zip(verts.iter().cycle().skip(1))
            .map(|(p, q)| p[0] * q[1] - q[0] * p[1])
            .sum();
        if area2 < 0.0 {
            verts.reverse();
        }
        let n = verts.len();
        for i in 0..n {
            let a = verts[i];
            let b = verts[(i + 1) % n];
            let c = verts[(i + 2) % n];
            let e1 = [b[0] - a[0], b[1] - a[1]];
            let e2 = [c[0] - b[0], c[1] - b[1]];
            let cross = e1[0] * e2[1] - e1[1] * e2[0];
            if cross <= 0.0 {
                return Err(Error::InvalidProfile(format!(
                    "rounded polygon requires strictly convex vertices (vertex {i})"
                )));
            }
        }
        let rho = corner_radius;
        let pieces = build_rounded_pieces(&verts, rho);
        let total: f64 = pieces.iter().map(|p| p.len).sum();
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for v in &verts {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k] - 2.0 * rho);
                hi[k] = hi[k].max(v[k] + 2.0 * rho);
            }
        }
        let bounds = BoundingBox::new(lo, hi)?;
        let verts_f = verts.clone();
        let implicit = ScalarField::new(
            format!("roundpoly(rho={rho}, {} vertices)", verts.len()),
            bounds,
            move |w: &[f64; 2]| polygon_sdf(*w, &verts_f) - rho,
        );
        let pieces_c = pieces.clone();
        let curve = BoundaryCurve::new(move |s| eval_pieces(&pieces_c, total, s).0)
            .with_derivative(move |s| eval_pieces(&pieces, total, s).1);
        Self::assemble(
            implicit,
            Some(curve),
            ProfileSpec::RoundedPolygon {
                vertices: verts,
                corner_radius: rho,
            },
        )
    }

    /// Smooth polar test shape r(φ) = r₀(1 + amp·cos(k φ)) around a center;
    /// non-convex once amp > 1/(1 + k²). Used as the non-convex rejection
    /// case for the convex machinery.
    pub fn flower(center: [f64; 2], base_radius: f64, amplitude: f64, lobes: u32) -> Result<Self> {
        if !(base_radius > 0.0) {
            return Err(Error::NonPositiveRadius(base_radius));
        }
        if !(0.0..1.0).contains(&amplitude) {
            return Err(Error::InvalidProfile(
                "flower amplitude must lie in [0, 1)".into(),
            ));
        }
        if lobes == 0 {
            return Err(Error::InvalidProfile(
                "flower needs at least one lobe".into(),
            ));
        }
        let (cx, cy) = (center[0], center[1]);
        let (r0, amp, k) = (base_radius, amplitude, lobes as f64);
        let rmax = r0 * (1.0 + amp);
        let bounds = BoundingBox::new(
            [cx - 1.5 * rmax, cy - 1.5 * rmax],
            [cx + 1.5 * rmax, cy + 1.5 * rmax],
        )?;
        let implicit = ScalarField::new(
            format!("flower({cx},{cy},{r0},{amp},{lobes})"),
            bounds,
            move |w: &[f64; 2]| {
                let dx = w[0] - cx;
                let dy = w[1] - cy;
                let phi = dy.atan2(dx);
                (dx * dx + dy * dy).sqrt() - r0 * (1.0 + amp * (k * phi).cos())
            },
        );
        let curve = BoundaryCurve::new(move |s| {
            let phi = std::f64::consts::TAU * s;
            let r = r0 * (1.0 + amp * (k * phi).cos());
            [cx + r * phi.cos(), cy + r * phi.sin()]
        })
        .with_derivative(move |s| {
            let phi = std::f64::consts::TAU * s;
            let r = r0 * (1.0 + amp * (k * phi).cos());
            let dr = -r0 * amp * k * (k * phi).sin();
            [
                std::f64::consts::TAU * (dr * phi.cos() - r * phi.sin()),
                std::f64::consts::TAU * (dr * phi.sin() + r * phi.cos()),
            ]
        });
        Self::assemble(
            implicit,
            Some(curve),
            ProfileSpec::Flower {
                center,
                base_radius,
                amplitude,
                lobes,
            },
        )
    }

    /// Implicit-only profile from an expression in the grammar of
    /// [`crate::expr`]; `bounds` is (xmin, xmax, ymin, ymax).
    pub fn from_expression(src: &str, bounds: [f64; 4]) -> Result<Self> {
        let bb = BoundingBox::new([bounds[0], bounds[2]], [bounds[1], bounds[3]])?;
        let implicit = expr::planar_field_from_expr(src, bb)?;
        Self::assemble(
            implicit,
            None,
            ProfileSpec::Expression {
                expr: src.to_string(),
                bounds,
            },
        )
    }

    /// Parse a built-in call such as `disc(1, 2, 1)`,
    /// `ellipse(0, 3, 2, 1)`, `flower(0, 3, 1, 0.35, 3)` or
    /// `roundpoly(0.25; 0, 2; 2, 2.5; 0.8, 4)`.
    pub fn from_spec_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let open = s.find('(').ok_or_else(|| {
            Error::InvalidProfile(format!(
                "expected a built-in call like disc(a1, a2, r), got `{s}`"
            ))
        })?;
        if !s.ends_with(')') {
            return Err(Error::InvalidProfile(format!("unbalanced call `{s}`")));
        }
        let name = s[..open].trim();
        let inner = &s[open + 1..s.len() - 1];
        let nums = |part: &str| -> Result<Vec<f64>> {
            part.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidProfile(format!("bad number `{t}` in `{s}`")))
                })
                .collect()
        };
        match name {
            "disc" => {
                let v = nums(inner)?;
                if v.len() != 3 {
                    return Err(Error::InvalidProfile("disc takes (a1, a2, r)".into()));
                }
                Self::disc([v[0], v[1]], v[2])
            }
            "ellipse" => {
                let v = nums(inner)?;
                if v.len() != 4 {
                    return Err(Error::InvalidProfile(
                        "ellipse takes (a1, a2, r1, r2)".into(),
                    ));
                }
                Self::ellipse([v[0], v[1]], v[2], v[3])
            }
            "flower" => {
                let v = nums(inner)?;
                if v.len() != 5 {
                    return Err(Error::InvalidProfile(
                        "flower takes (a1, a2, r0, amp, lobes)".into(),
                    ));
                }
                Self::flower([v[0], v[1]], v[2], v[3], v[4] as u32)
            }
            "roundpoly" => {
                let mut parts = inner.split(';');
                let rho: f64 = parts
                    .next()
                    .and_then(|t| t.trim().parse().ok())
                    .ok_or_else(|| {
                        Error::InvalidProfile("roundpoly takes (rho; x1, y1; x2, y2; ...)".into())
                    })?;
                let mut verts = Vec::new();
                for part in parts {
                    let v = nums(part)?;
                    if v.len() != 2 {
                        return Err(Error::InvalidProfile(
                            "each roundpoly vertex is `x, y`".into(),
                        ));
                    }
                    verts.push([v[0], v[1]]);
                }
                Self::rounded_polygon(&verts, rho)
            }
            other => Err(Error::InvalidProfile(format!("unknown built-in `{other}`"))),
        }
    }

    /// Parse a profile config file: `key = value` lines, `#` comments.
    /// Either `builtin = disc(...)` or `expr = ...` plus
    /// `bbox = xmin, xmax, ymin, ymax`.
    pub fn from_config_str(contents: &str) -> Result<Self> {
        let mut builtin = None;
        let mut expr_src = None;
        let mut bbox = None;
        for (lineno, raw) in contents.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidProfile(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            match key.trim() {
                "builtin" => builtin = Some(value.trim().to_string()),
                "expr" => expr_src = Some(value.trim().to_string()),
                "bbox" => {
                    let v: Vec<f64> = value
                        .split(',')
                        .map(|t| {
                            t.trim().parse().map_err(|_| {
                                Error::InvalidProfile(format!("line {}: bad bbox", lineno + 1))
                            })
                        })
                        .collect::<Result<_>>()?;
                    if v.len() != 4 {
                        return Err(Error::InvalidProfile(
                            "bbox takes xmin, xmax, ymin, ymax".into(),
                        ));
                    }
                    bbox = Some([v[0], v[1], v[2], v[3]]);
                }
                other => {
                    return Err(Error::InvalidProfile(format!(
                        "unknown profile key `{other}`"
                    )))
                }
            }
        }
        match (builtin, expr_src, bbox) {
            (Some(call), None, None) => Self::from_spec_str(&call),
            (None, Some(src), Some(bb)) => Self::from_expression(&src, bb),
            (None, Some(_), None) => Err(Error::InvalidProfile(
                "expression profiles need a `bbox = ...` line".into(),
            )),
            _ => Err(Error::InvalidProfile(
                "profile file needs either `builtin = ...` or `expr = ...` with `bbox`".into(),
            )),
        }
    }
}

fn validate_curve(implicit: &PlanarField, pts: &[[f64; 2]]) -> Result<()> {
    let m = pts.len();
    let y_min = pts.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min);
    if y_min <= 0.0 {
        return Err(Error::ProfileTouchesAxis(y_min));
    }
    // Curve/field consistency, scaled by diameter times max gradient.
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in pts {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let diam = ((hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2)).sqrt();
    let mut max_grad = 0.0f64;
    for p in pts.iter().step_by(8) {
        let g = implicit.gradient_raw(p);
        max_grad = max_grad.max((g[0] * g[0] + g[1] * g[1]).sqrt());
    }
    let tol = 1e-8 * (diam * max_grad).max(1e-12);
    for (i, p) in pts.iter().enumerate() {
        let v = implicit.value_raw(p);
        if v.abs() > tol {
            return Err(Error::CurveFieldMismatch {
                s: i as f64 / m as f64,
                value: v.abs(),
                tol,
            });
        }
    }
    // Simplicity at mesh resolution: no crossing between non-adjacent
    // polyline segments.
    for i in 0..m {
        let a1 = pts[i];
        let a2 = pts[(i + 1) % m];
        for j in i + 2..m {
            if i == 0 && j == m - 1 {
                continue;
            }
            let b1 = pts[j];
            let b2 = pts[(j + 1) % m];
            if segments_cross(a1, a2, b1, b2) {
                return Err(Error::SelfIntersectingCurve(
                    i as f64 / m as f64,
                    j as f64 / m as f64,
                ));
            }
        }
    }
    Ok(())
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_cross(a1: [f64; 2], a2: [f64; 2], b1: [f64; 2], b2: [f64; 2]) -> bool {
    let d1 = orient(b1, b2, a1);
    let d2 = orient(b1, b2, a2);
    let d3 = orient(a1, a2, b1);
    let d4 = orient(a1, a2, b2);
    (d1 * d2 < 0.0) && (d3 * d4 < 0.0)
}

/// Exact signed distance to a simple polygon, negative inside.
fn polygon_sdf(p: [f64; 2], v: &[[f64; 2]]) -> f64 {
    let n = v.len();
    let mut d = (p[0] - v[0][0]).powi(2) + (p[1] - v[0][1]).powi(2);
    let mut sign = 1.0f64;
    let mut j = n - 1;
    for i in 0..n {
        let e = [v[j][0] - v[i][0], v[j][1] - v[i][1]];
        let w = [p[0] - v[i][0], p[1] - v[i][1]];
        let ee = e[0] * e[0] + e[1] * e[1];
        let t = if ee > 0.0 {
            ((w[0] * e[0] + w[1] * e[1]) / ee).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let b = [w[0] - e[0] * t, w[1] - e[1] * t];
        d = d.min(b[0] * b[0] + b[1] * b[1]);
        let c0 = p[1] >= v[i][1];
        let c1 = p[1] < v[j][1];
        let c2 = e[0] * w[1] > e[1] * w[0];
        if (c0 && c1 && c2) || (!c0 && !c1 && !c2) {
            sign = -sign;
        }
        j = i;
    }
    sign * d.sqrt()
}

#[derive(Clone)]
enum Piece {
    Segment {
        start: [f64; 2],
        dir: [f64; 2],
    },
    Arc {
        center: [f64; 2],
        rho: f64,
        phi0: f64,
    },
}

#[derive(Clone)]
struct ArcPiece {
    piece: Piece,
    len: f64,
}

fn build_rounded_pieces(verts: &[[f64; 2]], rho: f64) -> Vec<ArcPiece> {
    let n = verts.len();
    let mut pieces = Vec::with_capacity(2 * n);
    for i in 0..n {
        let a = verts[i];
        let b = verts[(i + 1) % n];
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        let dir = [(b[0] - a[0]) / len, (b[1] - a[1]) / len];
        // Outward normal of a CCW edge.
        let nrm = [dir[1], -dir[0]];
        pieces.push(ArcPiece {
            piece: Piece::Segment {
                start: [a[0] + rho * nrm[0], a[1] + rho * nrm[1]],
                dir,
            },
            len,
        });
        // Arc at vertex b: outward normal rotates CCW from this edge's
        // normal to the next edge's normal.
        let c = verts[(i + 2) % n];
        let len2 = ((c[0] - b[0]).powi(2) + (c[1] - b[1]).powi(2)).sqrt();
        let dir2 = [(c[0] - b[0]) / len2, (c[1] - b[1]) / len2];
        let nrm2 = [dir2[1], -dir2[0]];
        let phi0 = nrm[1].atan2(nrm[0]);
        let mut sweep = nrm2[1].atan2(nrm2[0]) - phi0;
        while sweep < 0.0 {
            sweep += std::f64::consts::TAU;
        }
        pieces.push(ArcPiece {
            piece: Piece::Arc {
                center: b,
                rho,
                phi0,
            },
            len: rho * sweep,
        });
    }
    pieces
}

fn eval_pieces(pieces: &[ArcPiece], total: f64, s: f64) -> ([f64; 2], [f64; 2]) {
    let mut target = s.rem_euclid(1.0) * total;
    for p in pieces {
        if target <= p.len {
            return match &p.piece {
                Piece::Segment { start, dir } => (
                    [start[0] + target * dir[0], start[1] + target * dir[1]],
                    [dir[0] * total, dir[1] * total],
                ),
                Piece::Arc { center, rho, phi0 } => {
                    let phi = phi0 + target / rho;
                    (
                        [center[0] + rho * phi.cos(), center[1] + rho * phi.sin()],
                        [-total * phi.sin(), total * phi.cos()],
                    )
                }
            };
        }
        target -= p.len;
    }
    // Wrapped past the end by rounding; return the closing point.
    match &pieces[0].piece {
        Piece::Segment { start, dir } => (*start, [dir[0] * total, dir[1] * total]),
        Piece::Arc { center, rho, phi0 } => (
            [center[0] + rho * phi0.cos(), center[1] + rho * phi0.sin()],
            [-total * phi0.sin(), total * phi0.cos()],
        ),
    }
}

/// Serializable domain descriptor.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DomainSpec {
    KoranyiBall { center: [f64; 3], radius: f64 },
    EuclideanBall { center: [f64; 3], radius: f64 },
    Torus { profile: ProfileSpec },
    Implicit { name: String },
}

/// The solid-torus domain w⁻¹(U) with defining field Ψ = u(t, x² + y²).
#[derive(Clone, Debug)]
pub struct TorusDomain {
    profile: Profile,
    psi: AmbientField,
}

impl TorusDomain {
    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn psi(&self) -> &AmbientField {
        &self.psi
    }

    /// Boundary parametrization B(s, θ) = (√y(s)·cosθ, √y(s)·sinθ, x(s)).
    pub fn boundary_point(&self, s: f64, theta: f64) -> Result<HPoint> {
        let curve = self.profile.boundary().ok_or(Error::MissingBoundaryCurve)?;
        let w = curve.at(s);
        if w[1] <= 0.0 {
            return Err(Error::ProfileTouchesAxis(w[1]));
        }
        let r = w[1].sqrt();
        Ok(HPoint::xyt(r * theta.cos(), r * theta.sin(), w[0]))
    }
}

/// Build the torus domain over a profile. Fails when the profile closure
/// reaches the axis {y = 0}, where the construction would force
/// characteristic boundary points.
pub fn make_torus(profile: Profile) -> Result<TorusDomain> {
    if profile.y_min() <= 0.0 {
        return Err(Error::ProfileTouchesAxis(profile.y_min()));
    }
    let psi = compose_profile(profile.implicit());
    let domain = TorusDomain { profile, psi };
    if domain.profile.boundary().is_some() {
        // Lifted samples must sit on the zero set of the lifted field.
        let scale = boundary_field_scale(&domain)?;
        for i in 0..32 {
            let s = i as f64 / 32.0;
            for j in 0..8 {
                let theta = std::f64::consts::TAU * j as f64 / 8.0;
                let p = domain.boundary_point(s, theta)?;
                let v = domain.psi.value_raw(&p.coords3());
                if v.abs() > 1e-8 * scale {
                    return Err(Error::CurveFieldMismatch {
                        s,
                        value: v.abs(),
                        tol: 1e-8 * scale,
                    });
                }
            }
        }
    }
    Ok(domain)
}

fn boundary_field_scale(domain: &TorusDomain) -> Result<f64> {
    let mut max_grad = 0.0f64;
    for i in 0..64 {
        let p = domain.boundary_point(i as f64 / 64.0, 0.37)?;
        let g = domain.psi.gradient_raw(&p.coords3());
        max_grad = max_grad.max((g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt());
    }
    Ok((max_grad * domain.psi.bounds().diameter()).max(1e-12))
}

/// A domain carried only by an ambient defining field over a box.
#[derive(Clone, Debug)]
pub struct ImplicitDomain {
    psi: AmbientField,
    seeds: Vec<HPoint>,
    spec: DomainSpec,
}

impl ImplicitDomain {
    pub fn new(psi: AmbientField) -> Self {
        let name = psi.name().to_string();
        ImplicitDomain {
            psi,
            seeds: Vec::new(),
            spec: DomainSpec::Implicit { name },
        }
    }

    pub fn with_seeds(mut self, seeds: Vec<HPoint>) -> Self {
        self.seeds = seeds;
        self
    }

    pub fn with_spec(mut self, spec: DomainSpec) -> Self {
        self.spec = spec;
        self
    }

    pub fn psi(&self) -> &AmbientField {
        &self.psi
    }
}

/// Gauge ball around a center: the smooth defining field is the fourth
/// power of the gauge of center·ξ⁻¹ minus r⁴, a polynomial in ξ.
pub fn koranyi_ball(center: &HPoint, r: f64) -> Result<ImplicitDomain> {
    if center.n() != 1 {
        return Err(Error::RequiresDim1(center.n()));
    }
    if !(r > 0.0) {
        return Err(Error::NonPositiveRadius(r));
    }
    let [a, b, c] = center.coords3();
    let pad = 1.1;
    let t_extent = pad * (r * r + 2.0 * r * center.z_norm() + 1e-9);
    let bounds = BoundingBox::new(
        [a - pad * r, b - pad * r, c - t_extent],
        [a + pad * r, b + pad * r, c + t_extent],
    )?;
    let w = move |p: &[f64; 3]| {
        // center · p⁻¹ in coordinates.
        let wx = a - p[0];
        let wy = b - p[1];
        let wt = c - p[2] + 2.0 * (a * p[1] - p[0] * b);
        (wx, wy, wt)
    };
    let psi = ScalarField::new(
        format!("koranyi-ball(r={r})"),
        bounds,
        move |p: &[f64; 3]| {
            let (wx, wy, wt) = w(p);
            let zz = wx * wx + wy * wy;
            zz * zz + wt * wt - r.powi(4)
        },
    )
    .with_gradient(move |p: &[f64; 3]| {
        let (wx, wy, wt) = w(p);
        let zz = wx * wx + wy * wy;
        [
            -4.0 * zz * wx - 4.0 * b * wt,
            -4.0 * zz * wy + 4.0 * a * wt,
            -2.0 * wt,
        ]
    });
    Ok(ImplicitDomain::new(psi).with_spec(DomainSpec::KoranyiBall {
        center: center.coords3(),
        radius: r,
    }))
}

/// Euclidean ball as a group domain; its boundary is a round sphere, the
/// standard example of a domain that must carry characteristic points.
pub fn euclidean_ball(center: [f64; 3], r: f64) -> Result<ImplicitDomain> {
    if !(r > 0.0) {
        return Err(Error::NonPositiveRadius(r));
    }
    let [a, b, c] = center;
    let bounds = BoundingBox::new(
        [a - 1.2 * r, b - 1.2 * r, c - 1.2 * r],
        [a + 1.2 * r, b + 1.2 * r, c + 1.2 * r],
    )?;
    let psi = ScalarField::new(
        format!("euclidean-ball(r={r})"),
        bounds,
        move |p: &[f64; 3]| (p[0] - a).powi(2) + (p[1] - b).powi(2) + (p[2] - c).powi(2) - r * r,
    )
    .with_gradient(move |p: &[f64; 3]| [2.0 * (p[0] - a), 2.0 * (p[1] - b), 2.0 * (p[2] - c)])
    .with_hessian(|_| [[2.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 2.0]]);
    Ok(ImplicitDomain::new(psi).with_spec(DomainSpec::EuclideanBall { center, radius: r }))
}

/// Any scannable domain.
#[derive(Clone, Debug)]
pub enum Domain {
    Torus(TorusDomain),
    Implicit(ImplicitDomain),
}

impl Domain {
    pub fn psi(&self) -> &AmbientField {
        match self {
            Domain::Torus(d) => d.psi(),
            Domain::Implicit(d) => d.psi(),
        }
    }

    pub fn descriptor(&self) -> DomainSpec {
        match self {
            Domain::Torus(d) => DomainSpec::Torus {
                profile: d.profile().spec().clone(),
            },
            Domain::Implicit(d) => d.spec.clone(),
        }
    }

    pub fn diameter(&self) -> f64 {
        self.psi().bounds().diameter()
    }
}

/// Mesh request: a tensor grid in the boundary parameters for torus
/// domains, or a box grid of nodes per axis for implicit domains.
#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum MeshSpec {
    Parametric { n_s: usize, n_theta: usize },
    Box { n: usize },
}

pub const MIN_MESH_DIM: usize = 8;

/// One boundary sample with its derivative data.
#[derive(Clone, Debug)]
pub struct MeshSample {
    pub point: [f64; 3],
    pub psi: f64,
    pub grad: GradientData<3>,
    /// (s, θ) for parametric meshes.
    pub param: Option<[f64; 2]>,
    /// Grid cell for box meshes.
    pub cell: Option<[u32; 3]>,
}

#[derive(Clone, Debug)]
pub struct MeshResult {
    pub samples: Vec<MeshSample>,
    /// Tolerance scale: max |∇Ψ| over the mesh times the domain diameter.
    pub scale: f64,
    /// Box-grid seeds whose projection failed or wandered.
    pub dropped: usize,
    pub cell_size: f64,
}

/// Sample the boundary of a domain. Torus domains use the exact
/// parametrization on a tensor grid; implicit domains locate sign-change
/// cells of a box grid and project their centers onto {Ψ = 0} with Newton
/// steps along ∇Ψ.
pub fn boundary_mesh(
    domain: &Domain,
    spec: &MeshSpec,
    projection_tol_rel: f64,
) -> Result<MeshResult> {
    match (domain, spec) {
        (Domain::Torus(d), MeshSpec::Parametric { n_s, n_theta }) => mesh_torus(d, *n_s, *n_theta),
        (Domain::Implicit(d), MeshSpec::Box { n }) => mesh_implicit(d, *n, projection_tol_rel),
        (Domain::Torus(d), MeshSpec::Box { n }) => {
            // A torus can always be scanned generically through its field.
            let implicit = ImplicitDomain::new(d.psi().clone());
            mesh_implicit(&implicit, *n, projection_tol_rel)
        }
        (Domain::Implicit(_), MeshSpec::Parametric { .. }) => Err(Error::MissingBoundaryCurve),
    }
}

fn mesh_torus(domain: &TorusDomain, n_s: usize, n_theta: usize) -> Result<MeshResult> {
    if n_s < MIN_MESH_DIM {
        return Err(Error::MeshTooCoarse {
            min: MIN_MESH_DIM,
            got: n_s,
        });
    }
    if n_theta < MIN_MESH_DIM {
        return Err(Error::MeshTooCoarse {
            min: MIN_MESH_DIM,
            got: n_theta,
        });
    }
    let psi = domain.psi();
    let rows: Result<Vec<Vec<MeshSample>>> = (0..n_s)
        .into_par_iter()
        .map(|i| {
            let s = i as f64 / n_s as f64;
            let mut row = Vec::with_capacity(n_theta);
            for j in 0..n_theta {
                let theta = std::f64::consts::TAU * j as f64 / n_theta as f64;
                let p = domain.boundary_point(s, theta)?.coords3();
                let grad = psi.eval_with_gradient(&p)?;
                row.push(MeshSample {
                    point: p,
                    psi: grad.value,
                    grad,
                    param: Some([s, theta]),
                    cell: None,
                });
            }
            Ok(row)
        })
        .collect();
    let samples: Vec<MeshSample> = rows?.into_iter().flatten().collect();
    let max_grad = samples
        .iter()
        .map(|m| m.grad.euclidean_norm())
        .fold(0.0f64, f64::max);
    Ok(MeshResult {
        scale: (max_grad * psi.bounds().diameter()).max(1e-12),
        dropped: 0,
        cell_size: 1.0 / n_s as f64,
        samples,
    })
}

/// Newton projection onto {Ψ = 0} along the Euclidean gradient.
pub fn newton_project(
    psi: &AmbientField,
    start: [f64; 3],
    abs_tol: f64,
    max_iter: usize,
) -> Result<[f64; 3]> {
    let mut p = start;
    for _ in 0..max_iter {
        let v = psi.value_raw(&p);
        if !v.is_finite() {
            return Err(Error::ProjectionFailed("field value not finite".into()));
        }
        if v.abs() <= abs_tol {
            return Ok(p);
        }
        let g = psi.gradient_raw(&p);
        let gg = g[0] * g[0] + g[1] * g[1] + g[2] * g[2];
        if gg < 1e-30 {
            return Err(Error::ProjectionFailed(
                "gradient vanished during projection".into(),
            ));
        }
        let step = v / gg;
        p = [p[0] - step * g[0], p[1] - step * g[1], p[2] - step * g[2]];
    }
    let v = psi.value_raw(&p);
    if v.abs() <= abs_tol {
        Ok(p)
    } else {
        Err(Error::ProjectionFailed(format!(
            "|psi| = {:.3e} after {max_iter} iterations (target {abs_tol:.3e})",
            v.abs()
        )))
    }
}

fn mesh_implicit(domain: &ImplicitDomain, n: usize, projection_tol_rel: f64) -> Result<MeshResult> {
    if n < MIN_MESH_DIM {
        return Err(Error::MeshTooCoarse {
            min: MIN_MESH_DIM,
            got: n,
        });
    }
    let psi = domain.psi();
    let bb = psi.bounds();
    let step = [
        (bb.max[0] - bb.min[0]) / (n - 1) as f64,
        (bb.max[1] - bb.min[1]) / (n - 1) as f64,
        (bb.max[2] - bb.min[2]) / (n - 1) as f64,
    ];
    let coord = |i: usize, axis: usize| bb.min[axis] + step[axis] * i as f64;
    // Node values, z-major slabs in parallel.
    let values: Vec<f64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut slab = Vec::with_capacity(n * n);
            for j in 0..n {
                for k in 0..n {
                    slab.push(psi.value_raw(&[coord(i, 0), coord(j, 1), coord(k, 2)]));
                }
            }
            slab
        })
        .collect();
    let idx = |i: usize, j: usize, k: usize| (i * n + j) * n + k;
    let mut candidates = Vec::new();
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            for k in 0..n - 1 {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for (di, dj, dk) in CORNERS {
                    let v = values[idx(i + di, j + dj, k + dk)];
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                if lo <= 0.0 && hi >= 0.0 {
                    candidates.push([i as u32, j as u32, k as u32]);
                }
            }
        }
    }
    if candidates.is_empty() && domain.seeds.is_empty() {
        return Err(Error::EmptyBoundary);
    }
    let cell_diag = (step[0] * step[0] + step[1] * step[1] + step[2] * step[2]).sqrt();
    // Coarse gradient scale from a subsample of seeds, before projecting.
    let mut scale_est = 0.0f64;
    for c in candidates.iter().step_by((candidates.len() / 256).max(1)) {
        let p = [
            coord(c[0] as usize, 0) + 0.5 * step[0],
            coord(c[1] as usize, 1) + 0.5 * step[1],
            coord(c[2] as usize, 2) + 0.5 * step[2],
        ];
        let g = psi.gradient_raw(&p);
        scale_est = scale_est.max((g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt());
    }
    let scale_est = (scale_est * bb.diameter()).max(1e-12);
    let target = projection_tol_rel * scale_est;
    let guaranteed = 1e-10 * scale_est;
    let projected: Vec<Option<MeshSample>> = candidates
        .par_iter()
        .map(|c| {
            let seed = [
                coord(c[0] as usize, 0) + 0.5 * step[0],
                coord(c[1] as usize, 1) + 0.5 * step[1],
                coord(c[2] as usize, 2) + 0.5 * step[2],
            ];
            let p = newton_project(psi, seed, target, 60)
                .or_else(|_| newton_project(psi, seed, guaranteed, 60))
                .ok()?;
            let moved =
                ((p[0] - seed[0]).powi(2) + (p[1] - seed[1]).powi(2) + (p[2] - seed[2]).powi(2))
                    .sqrt();
            if moved > 2.0 * cell_diag {
                return None;
            }
            let grad = psi.eval_with_gradient(&p).ok()?;
            Some(MeshSample {
                point: p,
                psi: grad.value,
                grad,
                param: None,
                cell: Some(*c),
            })
        })
        .collect();
    let mut dropped = 0;
    let mut samples = Vec::with_capacity(candidates.len());
    for s in projected {
        match s {
            Some(s) => samples.push(s),
            None => dropped += 1,
        }
    }
    // Optional user seeds join the sample set after the same projection.
    for seed in &domain.seeds {
        let start = seed.coords3();
        if let Ok(p) = newton_project(psi, start, target, 60) {
            if let Ok(grad) = psi.eval_with_gradient(&p) {
                let cell = [
                    (((p[0] - bb.min[0]) / step[0]) as u32).min(n as u32 - 2),
                    (((p[1] - bb.min[1]) / step[1]) as u32).min(n as u32 - 2),
                    (((p[2] - bb.min[2]) / step[2]) as u32).min(n as u32 - 2),
                ];
                samples.push(MeshSample {
                    point: p,
                    psi: grad.value,
                    grad,
                    param: None,
                    cell: Some(cell),
                });
            }
        }
    }
    if samples.is_empty() {
        return Err(Error::EmptyBoundary);
    }
    let max_grad = samples
        .iter()
        .map(|m| m.grad.euclidean_norm())
        .fold(0.0f64, f64::max);
    Ok(MeshResult {
        scale: (max_grad * bb.diameter()).max(1e-12),
        dropped,
        cell_size: cell_diag,
        samples,
    })
}

const CORNERS: [(usize, usize, usize); 8] = [
    (0, 0, 0),
    (0, 0, 1),
    (0, 1, 0),
    (0, 1, 1),
    (1, 0, 0),
    (1, 0, 1),
    (1, 1, 0),
    (1, 1, 1),
];
