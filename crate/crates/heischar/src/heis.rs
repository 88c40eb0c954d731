//! Algebraic and differential structure of the Heisenberg group.
//!
//! Points live in ℝ^(2n+1) with complex shorthand z_j = x_j + i y_j. The
//! group law, dilations, gauge, frames and the Siegel-domain embedding are
//! exact closed forms; everything here is a pure function of its inputs.
//!
//! The product convention is fixed once: `group_mul(p, q) = p · q` with the
//! t-component t_p + t_q + 2(⟨x_q, y_p⟩ − ⟨x_p, y_q⟩). Under this choice the
//! frame fields X_j, Y_j are invariant under left translation, which the
//! tests check both in closed form and by finite differences.

use num_complex::Complex64;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::field::ScalarField;

type Coords = SmallVec<[f64; 3]>;

/// A point of the group in real coordinates (x_1..x_n, y_1..y_n, t).
#[derive(Clone, Debug, PartialEq)]
pub struct HPoint {
    coords: Coords,
}

impl HPoint {
    pub fn new(x: &[f64], y: &[f64], t: f64) -> Result<Self> {
        if x.len() != y.len() || x.is_empty() {
            return Err(Error::DimensionMismatch(x.len(), y.len()));
        }
        if !t.is_finite() || x.iter().chain(y).any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        let mut coords = Coords::with_capacity(2 * x.len() + 1);
        coords.extend_from_slice(x);
        coords.extend_from_slice(y);
        coords.push(t);
        Ok(HPoint { coords })
    }

    /// Point of the n = 1 group.
    pub fn xyt(x: f64, y: f64, t: f64) -> Self {
        debug_assert!(x.is_finite() && y.is_finite() && t.is_finite());
        HPoint {
            coords: SmallVec::from_slice(&[x, y, t]),
        }
    }

    pub fn origin(n: usize) -> Self {
        assert!(n >= 1);
        HPoint {
            coords: SmallVec::from_elem(0.0, 2 * n + 1),
        }
    }

    pub fn n(&self) -> usize {
        (self.coords.len() - 1) / 2
    }

    pub fn x(&self, j: usize) -> f64 {
        self.coords[j]
    }

    pub fn y(&self, j: usize) -> f64 {
        self.coords[self.n() + j]
    }

    pub fn t(&self) -> f64 {
        self.coords[self.coords.len() - 1]
    }

    /// Coordinates of an n = 1 point as [x, y, t].
    pub fn coords3(&self) -> [f64; 3] {
        debug_assert_eq!(self.n(), 1, "coords3 requires n = 1");
        [self.coords[0], self.coords[1], self.coords[2]]
    }

    pub fn from_coords3(c: [f64; 3]) -> Self {
        HPoint::xyt(c[0], c[1], c[2])
    }

    pub fn z_norm_sq(&self) -> f64 {
        let n = self.n();
        (0..n)
            .map(|j| self.x(j) * self.x(j) + self.y(j) * self.y(j))
            .sum()
    }

    pub fn z_norm(&self) -> f64 {
        self.z_norm_sq().sqrt()
    }
}

fn check_same_n(p: &HPoint, q: &HPoint) -> Result<usize> {
    if p.n() != q.n() {
        return Err(Error::DimensionMismatch(p.n(), q.n()));
    }
    Ok(p.n())
}

/// Group product p · q.
pub fn group_mul(p: &HPoint, q: &HPoint) -> Result<HPoint> {
    let n = check_same_n(p, q)?;
    let mut coords = Coords::with_capacity(2 * n + 1);
    for j in 0..n {
        coords.push(q.x(j) + p.x(j));
    }
    for j in 0..n {
        coords.push(q.y(j) + p.y(j));
    }
    let mut twist = 0.0;
    for j in 0..n {
        twist += q.x(j) * p.y(j) - p.x(j) * q.y(j);
    }
    coords.push(q.t() + p.t() + 2.0 * twist);
    Ok(HPoint { coords })
}

/// Group inverse (−z, −t).
pub fn group_inv(p: &HPoint) -> HPoint {
    HPoint {
        coords: p.coords.iter().map(|c| -c).collect(),
    }
}

/// Anisotropic dilation (λx, λy, λ²t), λ > 0.
pub fn dilate(lambda: f64, p: &HPoint) -> Result<HPoint> {
    if !(lambda > 0.0) {
        return Err(Error::NonPositiveDilation(lambda));
    }
    let n = p.n();
    let mut coords: Coords = p.coords.iter().map(|c| lambda * c).collect();
    coords[2 * n] = lambda * lambda * p.t();
    Ok(HPoint { coords })
}

/// Homogeneous dimension 2n + 2, the scaling exponent of the dilation
/// Jacobian determinant.
pub fn homogeneous_dimension(n: usize) -> u32 {
    (2 * n + 2) as u32
}

/// Homogeneous gauge (Σ|z_j|⁴ + t²)^(1/4).
pub fn gauge(p: &HPoint) -> f64 {
    let n = p.n();
    let mut s = 0.0;
    for j in 0..n {
        let zz = p.x(j) * p.x(j) + p.y(j) * p.y(j);
        s += zz * zz;
    }
    (s + p.t() * p.t()).sqrt().sqrt()
}

/// Left-invariant gauge distance: the gauge of q⁻¹ · p.
pub fn distance(p: &HPoint, q: &HPoint) -> Result<f64> {
    Ok(gauge(&group_mul(&group_inv(q), p)?))
}

/// A coordinate tangent vector carried at a base point.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    base: HPoint,
    v: Coords,
}

impl TangentVector {
    pub fn new(base: HPoint, components: &[f64]) -> Result<Self> {
        if components.len() != 2 * base.n() + 1 {
            return Err(Error::DimensionMismatch(components.len(), 2 * base.n() + 1));
        }
        if components.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(TangentVector {
            base,
            v: SmallVec::from_slice(components),
        })
    }

    pub fn base(&self) -> &HPoint {
        &self.base
    }

    pub fn components(&self) -> &[f64] {
        &self.v
    }

    pub fn components3(&self) -> [f64; 3] {
        debug_assert_eq!(self.base.n(), 1);
        [self.v[0], self.v[1], self.v[2]]
    }
}

/// The frame (X_1..X_n, Y_1..Y_n, T) evaluated at a point:
/// X_j = ∂x_j + 2y_j ∂t, Y_j = ∂y_j − 2x_j ∂t, T = ∂t.
pub struct Frame {
    pub x: Vec<TangentVector>,
    pub y: Vec<TangentVector>,
    pub t: TangentVector,
}

pub fn frame_at(p: &HPoint) -> Frame {
    let n = p.n();
    let dim = 2 * n + 1;
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for j in 0..n {
        let mut vx = vec![0.0; dim];
        vx[j] = 1.0;
        vx[dim - 1] = 2.0 * p.y(j);
        xs.push(TangentVector {
            base: p.clone(),
            v: SmallVec::from_vec(vx),
        });
        let mut vy = vec![0.0; dim];
        vy[n + j] = 1.0;
        vy[dim - 1] = -2.0 * p.x(j);
        ys.push(TangentVector {
            base: p.clone(),
            v: SmallVec::from_vec(vy),
        });
    }
    let mut vt = vec![0.0; dim];
    vt[dim - 1] = 1.0;
    Frame {
        x: xs,
        y: ys,
        t: TangentVector {
            base: p.clone(),
            v: SmallVec::from_vec(vt),
        },
    }
}

/// Differential of left translation by g, pushing a vector at p to one at
/// g·p. The group law is affine in the right factor, so this is exact:
/// (v_x, v_y, v_t) ↦ (v_x, v_y, v_t + Σ 2y_g v_x − 2x_g v_y).
pub fn left_translate_push(g: &HPoint, v: &TangentVector) -> Result<TangentVector> {
    let n = check_same_n(g, v.base())?;
    let base = group_mul(g, v.base())?;
    let mut out: Coords = v.v.clone();
    let mut vt = v.v[2 * n];
    for j in 0..n {
        vt = vt + 2.0 * g.y(j) * v.v[j] - 2.0 * g.x(j) * v.v[n + j];
    }
    out[2 * n] = vt;
    Ok(TangentVector { base, v: out })
}

/// The contact form θ₀ = dt + Σ(2x_j dy_j − 2y_j dx_j) applied to a vector
/// based at p. Annihilates the horizontal frame and pairs to 1 with T.
pub fn contact_form(p: &HPoint, v: &TangentVector) -> Result<f64> {
    if v.base() != p {
        return Err(Error::BasePointMismatch);
    }
    let n = p.n();
    let mut val = v.v[2 * n];
    for j in 0..n {
        val = val + 2.0 * p.x(j) * v.v[n + j] - 2.0 * p.y(j) * v.v[j];
    }
    Ok(val)
}

/// A vector in the horizontal plane, stored by its frame coefficients
/// Σ α_j X_j + β_j Y_j at a base point.
#[derive(Clone, Debug, PartialEq)]
pub struct HorizontalVector {
    base: HPoint,
    alpha: SmallVec<[f64; 2]>,
    beta: SmallVec<[f64; 2]>,
}

impl HorizontalVector {
    pub fn new(base: HPoint, alpha: &[f64], beta: &[f64]) -> Result<Self> {
        if alpha.len() != base.n() || beta.len() != base.n() {
            return Err(Error::DimensionMismatch(alpha.len(), base.n()));
        }
        if alpha.iter().chain(beta).any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(HorizontalVector {
            base,
            alpha: SmallVec::from_slice(alpha),
            beta: SmallVec::from_slice(beta),
        })
    }

    pub fn base(&self) -> &HPoint {
        &self.base
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn norm(&self) -> f64 {
        self.alpha
            .iter()
            .chain(self.beta.iter())
            .map(|c| c * c)
            .sum::<f64>()
            .sqrt()
    }

    /// Expand through the frame into a coordinate tangent vector.
    pub fn to_tangent(&self) -> TangentVector {
        let n = self.base.n();
        let mut v = vec![0.0; 2 * n + 1];
        let mut vt = 0.0;
        for j in 0..n {
            v[j] = self.alpha[j];
            v[n + j] = self.beta[j];
            vt += 2.0 * self.base.y(j) * self.alpha[j] - 2.0 * self.base.x(j) * self.beta[j];
        }
        v[2 * n] = vt;
        TangentVector {
            base: self.base.clone(),
            v: SmallVec::from_vec(v),
        }
    }
}

/// Complex structure on the horizontal plane: J X_j = Y_j, J Y_j = −X_j,
/// i.e. (α, β) ↦ (−β, α) on coefficients.
pub fn j_map(h: &HorizontalVector) -> HorizontalVector {
    HorizontalVector {
        base: h.base.clone(),
        alpha: h.beta.iter().map(|b| -b).collect(),
        beta: h.alpha.clone(),
    }
}

/// Horizontal gradient (Xf, Yf) of an ambient field at an n = 1 point.
pub fn horizontal_gradient(f: &ScalarField<3>, p: &HPoint) -> Result<HorizontalVector> {
    if p.n() != 1 {
        return Err(Error::RequiresDim1(p.n()));
    }
    let gd = f.eval_with_gradient(&p.coords3())?;
    let h = gd.horizontal.expect("ambient field");
    HorizontalVector::new(p.clone(), &h[..1], &h[1..])
}

/// Sublaplacian −(X² + Y²)f at an n = 1 point, with the sign convention
/// carrying the leading minus.
pub fn sublaplacian(f: &ScalarField<3>, p: &HPoint) -> Result<f64> {
    if p.n() != 1 {
        return Err(Error::RequiresDim1(p.n()));
    }
    let c = p.coords3();
    let (x, y) = (c[0], c[1]);
    let fxx = f.second_partial(&c, 0, 0)?;
    let fyy = f.second_partial(&c, 1, 1)?;
    let fxt = f.second_partial(&c, 0, 2)?;
    let fyt = f.second_partial(&c, 1, 2)?;
    let ftt = f.second_partial(&c, 2, 2)?;
    Ok(-(fxx + fyy + 4.0 * y * fxt - 4.0 * x * fyt + 4.0 * (x * x + y * y) * ftt))
}

/// Conjugate CR derivative ½(∂x + i∂y) − i z ∂t applied to a complex field
/// given by its real and imaginary parts; returns (Re, Im) of the result.
/// Vanishes identically on w = t + i|z|².
pub fn zbar_derivative(re: &ScalarField<3>, im: &ScalarField<3>, p: &HPoint) -> Result<[f64; 2]> {
    if p.n() != 1 {
        return Err(Error::RequiresDim1(p.n()));
    }
    let c = p.coords3();
    let (x, y) = (c[0], c[1]);
    let gr = re.gradient(&c)?;
    let gi = im.gradient(&c)?;
    let real = 0.5 * gr[0] - 0.5 * gi[1] + y * gr[2] + x * gi[2];
    let imag = 0.5 * gi[0] + 0.5 * gr[1] - x * gr[2] + y * gi[2];
    Ok([real, imag])
}

/// Embedding into the boundary of the Siegel domain:
/// p ↦ (t + i|z|², z_1, ..., z_n). The image satisfies Σ|ξ_j|² = Im ξ₀.
pub fn siegel_embed(p: &HPoint) -> Vec<Complex64> {
    let n = p.n();
    let mut out = Vec::with_capacity(n + 1);
    out.push(Complex64::new(p.t(), p.z_norm_sq()));
    for j in 0..n {
        out.push(Complex64::new(p.x(j), p.y(j)));
    }
    out
}

/// Affine holomorphic action of g on ℂ^(n+1):
/// ξ₀ ↦ ξ₀ + t + i|z|² + 2i Σ ξ_j z̄_j, ξ_j ↦ ξ_j + z_j.
/// Equivariant with the embedding: g • embed(p) = embed(g · p).
pub fn siegel_action(g: &HPoint, xi: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = g.n();
    if xi.len() != n + 1 {
        return Err(Error::DimensionMismatch(xi.len(), n + 1));
    }
    let mut out = Vec::with_capacity(n + 1);
    let mut xi0 = xi[0] + Complex64::new(g.t(), g.z_norm_sq());
    for j in 0..n {
        let zbar = Complex64::new(g.x(j), -g.y(j));
        xi0 += Complex64::new(0.0, 2.0) * xi[j + 1] * zbar;
    }
    out.push(xi0);
    for j in 0..n {
        out.push(xi[j + 1] + Complex64::new(g.x(j), g.y(j)));
    }
    Ok(out)
}
