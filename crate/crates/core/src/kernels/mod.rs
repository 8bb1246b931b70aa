//! Coordinate-transformation kernels `ω(x, y)`.

mod catalog;
mod ops;
mod riccati;

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coeff::Coefficient;
use crate::error::{domain, Error, Result};
use crate::grid::fornberg_weights;
use crate::scalar::{cabs, czero, re, Real, C};

pub use ops::{
    apply, discretize, discretize_between, invert, kernel_pde_residual, tabulate,
    ConditionReport, PdeResidual, ResidualDomain, DEFAULT_THRESHOLD,
};
pub use catalog::BUILTIN_IDS;
pub use riccati::riccati_kernel;

/// Highest total derivative order served by the finite-difference fallback.
pub const FD_MAX_ORDER: usize = 4;

type EvalFn<T> = dyn Fn(T, T) -> C<T> + Send + Sync;
type PartialFn<T> = dyn Fn(T, T, usize, usize) -> Option<C<T>> + Send + Sync;
type ProfileFn<T> = dyn Fn(T, usize) -> Option<T> + Send + Sync;

/// Working rectangle `[x_lo, x_hi] × [y_lo, y_hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect<T: Real> {
    pub x_lo: T,
    pub x_hi: T,
    pub y_lo: T,
    pub y_hi: T,
}

impl<T: Real> Rect<T> {
    pub fn new(x_lo: T, x_hi: T, y_lo: T, y_hi: T) -> Self {
        Self { x_lo, x_hi, y_lo, y_hi }
    }

    pub fn square(lo: T, hi: T) -> Self {
        Self::new(lo, hi, lo, hi)
    }
}

#[derive(Clone)]
enum Body<T: Real> {
    Pointwise { eval: Arc<EvalFn<T>>, partial: Arc<PartialFn<T>> },
    /// `scale · f(x − y)`; `profile(t, k)` is `f^{(k)}(t)` when known. `radius`
    /// bounds the numerical support and sets the number of periodic images.
    Translation { profile: Arc<ProfileFn<T>>, radius: T, scale: T },
    /// `a0(x)·δ(x − y)`, never evaluated pointwise.
    Diagonal(Coefficient<T>),
}

#[derive(Clone)]
pub struct Kernel<T: Real> {
    id: String,
    body: Body<T>,
    complex: bool,
    fd_fallback: bool,
    rect: Rect<T>,
    matched_columns: bool,
}

impl<T: Real> fmt::Debug for Kernel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kernel")
            .field("id", &self.id)
            .field("complex", &self.complex)
            .field("diagonal", &self.is_diagonal())
            .field("rect", &self.rect)
            .finish()
    }
}

impl<T: Real> Kernel<T> {
    /// General kernel from a closed-form evaluator and optional analytic partials.
    ///
    /// `partial(x, y, nx, ny)` returns `∂_x^nx ∂_y^ny ω` or `None` when that
    /// order has no closed form. Runs the derivative self-check.
    pub fn custom(
        id: impl Into<String>,
        eval: impl Fn(T, T) -> C<T> + Send + Sync + 'static,
        partial: impl Fn(T, T, usize, usize) -> Option<C<T>> + Send + Sync + 'static,
        rect: Rect<T>,
        complex: bool,
    ) -> Result<Self> {
        Self {
            id: id.into(),
            body: Body::Pointwise { eval: Arc::new(eval), partial: Arc::new(partial) },
            complex,
            fd_fallback: true,
            rect,
            matched_columns: false,
        }
        .checked()
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn is_complex(&self) -> bool {
        self.complex
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self.body, Body::Diagonal(_))
    }

    pub fn is_translation(&self) -> bool {
        matches!(self.body, Body::Translation { .. })
    }

    pub fn rect(&self) -> Rect<T> {
        self.rect
    }

    pub fn fd_fallback(&self) -> bool {
        self.fd_fallback
    }

    /// Disables finite-difference fallback for missing analytic partials.
    pub fn without_fd_fallback(mut self) -> Self {
        self.fd_fallback = false;
        self
    }

    pub fn with_rect(mut self, rect: Rect<T>) -> Result<Self> {
        self.rect = rect;
        self.checked()
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    /// `c·ω`.
    pub fn scaled(&self, c: T) -> Self {
        let mut out = self.clone();
        out.id = format!("{}*{}", c, self.id);
        out.body = match &self.body {
            Body::Translation { profile, radius, scale } => {
                Body::Translation { profile: profile.clone(), radius: *radius, scale: *scale * c }
            }
            Body::Pointwise { eval, partial } => {
                let (e, p) = (eval.clone(), partial.clone());
                Body::Pointwise {
                    eval: Arc::new(move |x, y| e(x, y) * c),
                    partial: Arc::new(move |x, y, a, b| p(x, y, a, b).map(|v| v * c)),
                }
            }
            Body::Diagonal(a0) => Body::Diagonal(a0.scaled(re(c))),
        };
        out
    }

    /// Multiplier `a0` of a diagonal-only kernel.
    pub fn diagonal_coefficient(&self) -> Option<&Coefficient<T>> {
        match &self.body {
            Body::Diagonal(a0) => Some(a0),
            _ => None,
        }
    }

    /// `ω(x, y)`.
    pub fn eval(&self, x: T, y: T) -> Result<C<T>> {
        let v = self.raw_eval(x, y)?;
        self.finite(v, x, y)
    }

    /// `∂_x^nx ∂_y^ny ω(x, y)`, analytic when available, else finite differences.
    pub fn partial(&self, x: T, y: T, nx: usize, ny: usize) -> Result<C<T>> {
        if nx + ny == 0 {
            return self.eval(x, y);
        }
        if let Some(v) = self.analytic(x, y, nx, ny)? {
            return self.finite(v, x, y);
        }
        if !self.fd_fallback || nx + ny > FD_MAX_ORDER {
            return Err(Error::UnsupportedOrder {
                order: nx + ny,
                context: format!("kernel `{}` has no analytic ∂x^{nx}∂y^{ny}", self.id),
            });
        }
        let v = fd_partial(&|u, v| self.raw_eval(u, v), x, y, nx, ny)?;
        self.finite(v, x, y)
    }

    pub fn has_analytic(&self, nx: usize, ny: usize) -> bool {
        let probe_x = (self.rect.x_lo + self.rect.x_hi) / T::lit(2.0);
        let probe_y = (self.rect.y_lo + self.rect.y_hi) / T::lit(2.0);
        matches!(self.analytic(probe_x, probe_y, nx, ny), Ok(Some(_)))
    }

    /// Partial of the kernel periodized over `period` (translation kernels only;
    /// other kernels are returned unchanged).
    pub(crate) fn partial_periodic(
        &self,
        period: Option<T>,
        x: T,
        y: T,
        nx: usize,
        ny: usize,
    ) -> Result<C<T>> {
        match (&self.body, period) {
            (Body::Translation { radius, .. }, Some(l)) => {
                let images = ((*radius + l) / l).ceil().to_i64().unwrap_or(1);
                let mut acc = czero();
                for m in -images..=images {
                    let shift = l * T::from_i64(m).unwrap_or_else(T::zero);
                    acc += self.partial(x, y - shift, nx, ny)?;
                }
                Ok(acc)
            }
            _ => self.partial(x, y, nx, ny),
        }
    }

    fn raw_eval(&self, x: T, y: T) -> Result<C<T>> {
        match &self.body {
            Body::Pointwise { eval, .. } => Ok(eval(x, y)),
            Body::Translation { profile, scale, .. } => profile(x - y, 0)
                .map(|v| re(v * *scale))
                .ok_or_else(|| domain(format!("kernel `{}` has no value profile", self.id))),
            Body::Diagonal(_) => Err(Error::Unsupported(format!(
                "kernel `{}` is diagonal-only and has no pointwise values",
                self.id
            ))),
        }
    }

    fn analytic(&self, x: T, y: T, nx: usize, ny: usize) -> Result<Option<C<T>>> {
        Ok(match &self.body {
            Body::Pointwise { partial, .. } => partial(x, y, nx, ny),
            Body::Translation { profile, scale, .. } => profile(x - y, nx + ny).map(|v| {
                let sign = if ny % 2 == 0 { T::one() } else { -T::one() };
                re(sign * *scale * v)
            }),
            Body::Diagonal(_) => {
                return Err(Error::Unsupported(format!(
                    "kernel `{}` is diagonal-only and has no pointwise derivatives",
                    self.id
                )))
            }
        })
    }

    fn finite(&self, v: C<T>, x: T, y: T) -> Result<C<T>> {
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation { kernel: self.id.clone(), x: x.as_f64(), y: y.as_f64() })
        }
    }

    /// Compares analytic first partials with finite differences at 100 seeded
    /// random points of the working rectangle.
    pub fn self_check(&self) -> Result<()> {
        if self.is_diagonal() {
            return Ok(());
        }
        let tol = T::lit(1e-6).max(T::default_epsilon().powf(T::lit(0.8)) * T::lit(100.0));
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let r = self.rect;
        for _ in 0..100 {
            let x = r.x_lo + (r.x_hi - r.x_lo) * T::lit(rng.gen::<f64>());
            let y = r.y_lo + (r.y_hi - r.y_lo) * T::lit(rng.gen::<f64>());
            self.eval(x, y)?;
            for (nx, ny) in [(1, 0), (0, 1)] {
                if let Some(a) = self.analytic(x, y, nx, ny)? {
                    let fd = fd_partial(&|u, v| self.raw_eval(u, v), x, y, nx, ny)?;
                    let err = cabs(a - fd);
                    if !(err <= tol * (T::one() + cabs(a))) {
                        return Err(Error::KernelSelfCheck {
                            kernel: self.id.clone(),
                            detail: format!(
                                "∂x^{nx}∂y^{ny} at ({x}, {y}): analytic {a}, finite difference {fd}"
                            ),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    fn checked(self) -> Result<Self> {
        self.self_check()?;
        Ok(self)
    }
}

/// Central fourth-order stencil for the `k`-th derivative: `(offset, weight)` pairs.
fn central_stencil<T: Real>(k: usize) -> Vec<(T, T)> {
    if k == 0 {
        return vec![(T::zero(), T::one())];
    }
    let step = T::default_epsilon().powf(T::one() / T::from_usize_lossy(k + 4));
    let half: i64 = if k <= 2 { 2 } else { 3 };
    let offsets: Vec<T> = (-half..=half).map(|j| step * T::from_i64(j).unwrap_or_else(T::zero)).collect();
    let w = fornberg_weights(T::zero(), &offsets, k);
    offsets.into_iter().zip(w[k].iter().copied()).collect()
}

fn fd_partial<T: Real>(
    f: &dyn Fn(T, T) -> Result<C<T>>,
    x: T,
    y: T,
    nx: usize,
    ny: usize,
) -> Result<C<T>> {
    if nx + ny > FD_MAX_ORDER {
        return Err(Error::UnsupportedOrder {
            order: nx + ny,
            context: format!("finite-difference fallback supports total order ≤ {FD_MAX_ORDER}"),
        });
    }
    let sx = central_stencil::<T>(nx);
    let sy = central_stencil::<T>(ny);
    let mut acc = czero();
    for &(dx, wx) in &sx {
        for &(dy, wy) in &sy {
            if wx * wy != T::zero() {
                acc += f(x + dx, y + dy)? * (wx * wy);
            }
        }
    }
    Ok(acc)
}

/// One-variable finite-difference derivative, used for products like `ω·b`.
pub(crate) fn fd_derivative<T: Real>(f: &dyn Fn(T) -> Result<C<T>>, t: T, k: usize) -> Result<C<T>> {
    fd_partial(&|_, v| f(v), T::zero(), t, 0, k)
}
