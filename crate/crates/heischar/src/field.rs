//! Evaluable scalar fields with derivative access.
//!
//! A [`ScalarField`] is a total real-valued function on a declared bounding
//! box, either planar (`D = 2`, a profile function u(x, y)) or ambient
//! (`D = 3`, a function of (x, y, t) on the group). Analytic gradients and
//! Hessians are optional; missing derivatives fall back to central
//! differences with Richardson extrapolation.
//!
//! Planar coordinates are always ordered (t-coordinate, |z|²-coordinate),
//! matching the real and imaginary parts of w = t + i|z|².

use std::sync::Arc;

use crate::error::{Error, Result};

/// Relative first-derivative step, eps^(1/3).
pub const FD_GRAD_STEP: f64 = 6.055454452393343e-6;
/// Relative step for nested second differences, eps^(1/4).
pub const FD_HESS_STEP: f64 = 1.220703125e-4;

#[derive(Clone, Copy, Debug)]
pub struct FdPolicy {
    pub grad_rel_step: f64,
    pub hess_rel_step: f64,
}

impl Default for FdPolicy {
    fn default() -> Self {
        FdPolicy {
            grad_rel_step: FD_GRAD_STEP,
            hess_rel_step: FD_HESS_STEP,
        }
    }
}

/// Axis-aligned bounding box; mandatory metadata on every field so the
/// scanner never evaluates a field where it is undefined.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundingBox<const D: usize> {
    pub min: [f64; D],
    pub max: [f64; D],
}

impl<const D: usize> BoundingBox<D> {
    pub fn new(min: [f64; D], max: [f64; D]) -> Result<Self> {
        for i in 0..D {
            if !min[i].is_finite() || !max[i].is_finite() || min[i] >= max[i] {
                return Err(Error::InvalidBounds);
            }
        }
        Ok(BoundingBox { min, max })
    }

    pub fn contains(&self, p: &[f64; D]) -> bool {
        (0..D).all(|i| {
            let margin = 1e-9 * (self.max[i] - self.min[i]);
            p[i] >= self.min[i] - margin && p[i] <= self.max[i] + margin
        })
    }

    pub fn center(&self) -> [f64; D] {
        let mut c = [0.0; D];
        for (i, ci) in c.iter_mut().enumerate() {
            *ci = 0.5 * (self.min[i] + self.max[i]);
        }
        c
    }

    /// Euclidean diagonal, used as the domain diameter in tolerance scales.
    pub fn diameter(&self) -> f64 {
        (0..D)
            .map(|i| (self.max[i] - self.min[i]).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

pub type EvalFn<const D: usize> = dyn Fn(&[f64; D]) -> f64 + Send + Sync;
pub type GradFn<const D: usize> = dyn Fn(&[f64; D]) -> [f64; D] + Send + Sync;
pub type HessFn<const D: usize> = dyn Fn(&[f64; D]) -> [[f64; D]; D] + Send + Sync;

/// Value and first derivatives of a field at a point. For ambient fields
/// the frame components are filled in: XΨ = Ψ_x + 2yΨ_t, YΨ = Ψ_y − 2xΨ_t.
#[derive(Clone, Copy, Debug)]
pub struct GradientData<const D: usize> {
    pub value: f64,
    pub euclidean: [f64; D],
    /// Horizontal gradient coefficients (ambient fields only).
    pub horizontal: Option<[f64; 2]>,
}

impl<const D: usize> GradientData<D> {
    pub fn euclidean_norm(&self) -> f64 {
        self.euclidean.iter().map(|g| g * g).sum::<f64>().sqrt()
    }

    pub fn horizontal_norm(&self) -> f64 {
        let h = self
            .horizontal
            .expect("horizontal part requires an ambient field");
        (h[0] * h[0] + h[1] * h[1]).sqrt()
    }
}

#[derive(Clone)]
pub struct ScalarField<const D: usize> {
    name: String,
    eval: Arc<EvalFn<D>>,
    grad: Option<Arc<GradFn<D>>>,
    hess: Option<Arc<HessFn<D>>>,
    bounds: BoundingBox<D>,
    fd: FdPolicy,
}

pub type PlanarField = ScalarField<2>;
pub type AmbientField = ScalarField<3>;

impl<const D: usize> std::fmt::Debug for ScalarField<D> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarField")
            .field("name", &self.name)
            .field("arity", &D)
            .field("analytic_grad", &self.grad.is_some())
            .field("analytic_hess", &self.hess.is_some())
            .field("bounds", &self.bounds)
            .finish()
    }
}

impl<const D: usize> ScalarField<D> {
    pub fn new<F>(name: impl Into<String>, bounds: BoundingBox<D>, eval: F) -> Self
    where
        F: Fn(&[f64; D]) -> f64 + Send + Sync + 'static,
    {
        ScalarField {
            name: name.into(),
            eval: Arc::new(eval),
            grad: None,
            hess: None,
            bounds,
            fd: FdPolicy::default(),
        }
    }

    /// Attach an analytic gradient. In debug builds the closure is checked
    /// against central differences at a few interior points.
    pub fn with_gradient<G>(mut self, grad: G) -> Self
    where
        G: Fn(&[f64; D]) -> [f64; D] + Send + Sync + 'static,
    {
        self.grad = Some(Arc::new(grad));
        #[cfg(debug_assertions)]
        self.debug_validate_gradient();
        self
    }

    pub fn with_hessian<H>(mut self, hess: H) -> Self
    where
        H: Fn(&[f64; D]) -> [[f64; D]; D] + Send + Sync + 'static,
    {
        self.hess = Some(Arc::new(hess));
        self
    }

    pub fn with_fd_policy(mut self, fd: FdPolicy) -> Self {
        self.fd = fd;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn bounds(&self) -> &BoundingBox<D> {
        &self.bounds
    }

    pub fn has_analytic_gradient(&self) -> bool {
        self.grad.is_some()
    }

    /// Raw evaluation without the bounding-box check. Finite-difference
    /// probes use this; evaluators are expected to be total on a slightly
    /// padded box.
    pub fn value_raw(&self, p: &[f64; D]) -> f64 {
        (self.eval)(p)
    }

    pub fn value(&self, p: &[f64; D]) -> Result<f64> {
        self.check_inside(p)?;
        let v = (self.eval)(p);
        if !v.is_finite() {
            return Err(Error::NonFiniteValue {
                field: self.name.clone(),
                point: p.to_vec(),
            });
        }
        Ok(v)
    }

    fn check_inside(&self, p: &[f64; D]) -> Result<()> {
        if !self.bounds.contains(p) {
            return Err(Error::OutOfBounds {
                field: self.name.clone(),
                point: p.to_vec(),
            });
        }
        Ok(())
    }

    fn central(&self, p: &[f64; D], i: usize, h: f64) -> f64 {
        let mut a = *p;
        let mut b = *p;
        a[i] = p[i] + h;
        b[i] = p[i] - h;
        let h_eff = 0.5 * (a[i] - b[i]);
        ((self.eval)(&a) - (self.eval)(&b)) / (2.0 * h_eff)
    }

    /// One gradient component: analytic if present, else two central
    /// differences at steps h and h/2 combined by Richardson extrapolation.
    pub fn partial(&self, p: &[f64; D], i: usize) -> f64 {
        if let Some(g) = &self.grad {
            return g(p)[i];
        }
        let h = self.fd.grad_rel_step * p[i].abs().max(1.0);
        let d1 = self.central(p, i, h);
        let d2 = self.central(p, i, 0.5 * h);
        (4.0 * d2 - d1) / 3.0
    }

    /// Full gradient without the bounding-box check.
    pub fn gradient_raw(&self, p: &[f64; D]) -> [f64; D] {
        if let Some(g) = &self.grad {
            return g(p);
        }
        let mut out = [0.0; D];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.partial(p, i);
        }
        out
    }

    pub fn gradient(&self, p: &[f64; D]) -> Result<[f64; D]> {
        self.check_inside(p)?;
        let g = self.gradient_raw(p);
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue {
                field: self.name.clone(),
                point: p.to_vec(),
            });
        }
        Ok(g)
    }

    /// Second partial ∂²f/∂p_i∂p_j. Dispatch: analytic Hessian, else a
    /// central difference of the analytic gradient, else nested central
    /// differences of the values at relative step eps^(1/4).
    pub fn second_partial(&self, p: &[f64; D], i: usize, j: usize) -> Result<f64> {
        self.check_inside(p)?;
        if let Some(h) = &self.hess {
            return Ok(h(p)[i][j]);
        }
        if let Some(g) = &self.grad {
            let h = self.fd.grad_rel_step * p[i].abs().max(1.0);
            let mut a = *p;
            let mut b = *p;
            a[i] = p[i] + h;
            b[i] = p[i] - h;
            let h_eff = 0.5 * (a[i] - b[i]);
            return Ok((g(&a)[j] - g(&b)[j]) / (2.0 * h_eff));
        }
        let hi = self.fd.hess_rel_step * p[i].abs().max(1.0);
        if i == j {
            let mut a = *p;
            let mut b = *p;
            a[i] = p[i] + hi;
            b[i] = p[i] - hi;
            let h_eff = 0.5 * (a[i] - b[i]);
            let v = ((self.eval)(&a) - 2.0 * (self.eval)(p) + (self.eval)(&b)) / (h_eff * h_eff);
            return Ok(v);
        }
        let hj = self.fd.hess_rel_step * p[j].abs().max(1.0);
        let mut pp = *p;
        let mut pm = *p;
        let mut mp = *p;
        let mut mm = *p;
        pp[i] += hi;
        pp[j] += hj;
        pm[i] += hi;
        pm[j] -= hj;
        mp[i] -= hi;
        mp[j] += hj;
        mm[i] -= hi;
        mm[j] -= hj;
        Ok(
            ((self.eval)(&pp) - (self.eval)(&pm) - (self.eval)(&mp) + (self.eval)(&mm))
                / (4.0 * hi * hj),
        )
    }

    /// Value plus gradient; ambient fields also get the horizontal part.
    pub fn eval_with_gradient(&self, p: &[f64; D]) -> Result<GradientData<D>> {
        let value = self.value(p)?;
        let euclidean = self.gradient(p)?;
        let horizontal = if D == 3 {
            let g: &[f64] = &euclidean;
            let q: &[f64] = p;
            Some([g[0] + 2.0 * q[1] * g[2], g[1] - 2.0 * q[0] * g[2]])
        } else {
            None
        };
        Ok(GradientData {
            value,
            euclidean,
            horizontal,
        })
    }

    #[cfg(debug_assertions)]
    fn debug_validate_gradient(&self) {
        let grad = self.grad.as_ref().expect("called with analytic gradient");
        let c = self.bounds.center();
        let mut probes = vec![c];
        for i in 0..D {
            let mut q = c;
            q[i] = c[i] + 0.35 * (self.bounds.max[i] - self.bounds.min[i]);
            probes.push(q);
            q[i] = c[i] - 0.35 * (self.bounds.max[i] - self.bounds.min[i]);
            probes.push(q);
        }
        for q in &probes {
            let ga = grad(q);
            for i in 0..D {
                let h = self.fd.grad_rel_step * q[i].abs().max(1.0);
                let d1 = self.central(q, i, h);
                let d2 = self.central(q, i, 0.5 * h);
                let fd = (4.0 * d2 - d1) / 3.0;
                if !fd.is_finite() || !ga[i].is_finite() {
                    continue;
                }
                let scale = 1.0 + ga[i].abs() + fd.abs();
                debug_assert!(
                    (ga[i] - fd).abs() <= 1e-6 * scale,
                    "analytic gradient of `{}` disagrees with central differences at {:?}: \
                     component {} analytic {} vs fd {}",
                    self.name,
                    q,
                    i,
                    ga[i],
                    fd
                );
            }
        }
    }
}

/// Lift a planar profile function to the ambient field Ψ(x, y, t) = u(t, x²+y²).
///
/// The chain rule gives Ψ_x = 2x·u_b, Ψ_y = 2y·u_b, Ψ_t = u_a where (a, b)
/// are the planar coordinates; this is wired in as the analytic gradient of
/// the lift regardless of how u obtains its own derivatives.
pub fn compose_profile(u: &PlanarField) -> AmbientField {
    let b_max = u.bounds().max[1].max(0.0);
    let s = b_max.sqrt();
    let bounds = BoundingBox {
        min: [-s, -s, u.bounds().min[0]],
        max: [s, s, u.bounds().max[0]],
    };
    let u_eval = u.clone();
    let u_grad = u.clone();
    let name = format!("lift({})", u.name());
    let mut f = ScalarField::new(name, bounds, move |p: &[f64; 3]| {
        u_eval.value_raw(&[p[2], p[0] * p[0] + p[1] * p[1]])
    })
    .with_gradient(move |p: &[f64; 3]| {
        let w = [p[2], p[0] * p[0] + p[1] * p[1]];
        let g = u_grad.gradient_raw(&w);
        [2.0 * p[0] * g[1], 2.0 * p[1] * g[1], g[0]]
    });
    if u.hess.is_some() {
        let u2 = u.clone();
        f = f.with_hessian(move |p: &[f64; 3]| {
            let w = [p[2], p[0] * p[0] + p[1] * p[1]];
            let g = u2.gradient_raw(&w);
            let h = (u2.hess.as_ref().unwrap())(&w);
            let (x, y) = (p[0], p[1]);
            let (ua, ub) = (g[0], g[1]);
            let (uaa, uab, ubb) = (h[0][0], h[0][1], h[1][1]);
            let xx = 2.0 * ub + 4.0 * x * x * ubb;
            let yy = 2.0 * ub + 4.0 * y * y * ubb;
            let xy = 4.0 * x * y * ubb;
            let xt = 2.0 * x * uab;
            let yt = 2.0 * y * uab;
            let tt = uaa;
            let _ = ua;
            [[xx, xy, xt], [xy, yy, yt], [xt, yt, tt]]
        });
    }
    f
}

/// Pointwise product f·g with the product-rule gradient when both factors
/// supply one.
pub fn product<const D: usize>(f: &ScalarField<D>, g: &ScalarField<D>) -> ScalarField<D> {
    let name = format!("({})*({})", f.name(), g.name());
    let bounds = *f.bounds();
    let fe = f.clone();
    let ge = g.clone();
    let out = ScalarField::new(name, bounds, move |p: &[f64; D]| {
        fe.value_raw(p) * ge.value_raw(p)
    });
    if f.grad.is_some() && g.grad.is_some() {
        let fg = f.clone();
        let gg = g.clone();
        out.with_gradient(move |p: &[f64; D]| {
            let fv = fg.value_raw(p);
            let gv = gg.value_raw(p);
            let fd = fg.gradient_raw(p);
            let gd = gg.gradient_raw(p);
            let mut r = [0.0; D];
            for i in 0..D {
                r[i] = fv * gd[i] + gv * fd[i];
            }
            r
        })
    } else {
        out
    }
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct DefiningFailure {
    pub point: [f64; 3],
    pub grad_norm: f64,
}

/// Diagnostics from [`validate_defining`]. `tol` is absolute on |∇f|.
#[derive(Clone, Debug, serde::Serialize)]
pub struct DefiningDiagnostics {
    pub ok: bool,
    pub tol: f64,
    pub min_grad_norm: f64,
    pub argmin: [f64; 3],
    pub max_abs_value: f64,
    pub failures: Vec<DefiningFailure>,
}

/// Check that |∇f| stays above `tol` on a set of boundary samples, i.e.
/// that f is usable as a defining function there.
pub fn validate_defining(
    f: &ScalarField<3>,
    samples: &[[f64; 3]],
    tol: f64,
) -> Result<DefiningDiagnostics> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut min_grad = f64::INFINITY;
    let mut argmin = samples[0];
    let mut max_abs = 0.0f64;
    let mut failures = Vec::new();
    for p in samples {
        let gd = f.eval_with_gradient(p)?;
        let n = gd.euclidean_norm();
        max_abs = max_abs.max(gd.value.abs());
        if n < min_grad {
            min_grad = n;
            argmin = *p;
        }
        if n <= tol {
            failures.push(DefiningFailure {
                point: *p,
                grad_norm: n,
            });
        }
    }
    Ok(DefiningDiagnostics {
        ok: failures.is_empty(),
        tol,
        min_grad_norm: min_grad,
        argmin,
        max_abs_value: max_abs,
        failures,
    })
}
