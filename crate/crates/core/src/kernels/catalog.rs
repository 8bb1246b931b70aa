//! Built-in kernels.

use std::sync::Arc;

use super::{Body, Kernel, Rect};
use crate::coeff::Coefficient;
use crate::error::{domain, Result};
use crate::scalar::{binomial, cexp, hermite, i_pow, re, Complex, Real, C};

/// Catalog identifiers understood by [`Kernel::by_name`].
pub const BUILTIN_IDS: [&str; 7] =
    ["gaussian", "xgauss", "fourier", "exp_exp_plus", "exp_exp_minus", "identity", "dilation"];

impl<T: Real> Kernel<T> {
    /// `f(x − y)` with `profile(t, k) = f^{(k)}(t)` where known.
    pub fn translation_family(
        id: impl Into<String>,
        profile: impl Fn(T, usize) -> Option<T> + Send + Sync + 'static,
        radius: T,
        rect: Rect<T>,
    ) -> Result<Self> {
        Self {
            id: id.into(),
            body: Body::Translation { profile: Arc::new(profile), radius, scale: T::one() },
            complex: false,
            fd_fallback: true,
            rect,
            matched_columns: false,
        }
        .checked()
    }

    /// `e^{−(x−y)²}`.
    pub fn gaussian() -> Result<Self> {
        Self::translation_family(
            "gaussian",
            |t: T, k| {
                let sign = if k % 2 == 0 { T::one() } else { -T::one() };
                Some(sign * hermite(k, t) * (-t * t).exp())
            },
            T::lit(7.5),
            Rect::square(T::lit(-6.0), T::lit(6.0)),
        )
    }

    /// `(x−y)·e^{−(x−y)²}`.
    pub fn xgauss() -> Result<Self> {
        Self::translation_family(
            "xgauss",
            |t: T, k| {
                let sign = if k % 2 == 0 { T::one() } else { -T::one() };
                Some(sign * hermite(k + 1, t) * (-t * t).exp() / T::lit(2.0))
            },
            T::lit(7.5),
            Rect::square(T::lit(-6.0), T::lit(6.0)),
        )
    }

    /// `e^{ixy}`. On periodic grids its columns live on the integer wavenumbers.
    pub fn fourier() -> Result<Self> {
        let eval = |x: T, y: T| Complex::new((x * y).cos(), (x * y).sin());
        let partial = move |x: T, y: T, nx: usize, ny: usize| -> Option<C<T>> {
            let w = eval(x, y);
            match (nx, ny) {
                (0, q) => Some(i_pow::<T>(q) * w * x.powi(q as i32)),
                (q, 0) => Some(i_pow::<T>(q) * w * y.powi(q as i32)),
                _ => None,
            }
        };
        let mut k = Self::custom(
            "fourier",
            eval,
            partial,
            Rect::new(T::zero(), T::two_pi(), T::lit(-8.0), T::lit(8.0)),
            true,
        )?;
        k.matched_columns = true;
        Ok(k)
    }

    /// `e^{x·e^{sign·y}}`, `sign ∈ {+1, −1}`.
    pub fn exp_exp(sign: i32) -> Result<Self> {
        let s = match sign {
            1 => T::one(),
            -1 => -T::one(),
            _ => return Err(domain(format!("exp_exp sign must be +1 or -1, got {sign}"))),
        };
        let id = if sign > 0 { "exp_exp_plus" } else { "exp_exp_minus" };
        let eval = move |x: T, y: T| re((x * (s * y).exp()).exp());
        // ∂y^m ω = s^m T_m(g) ω with g = x e^{sy} (Touchard polynomials);
        // ∂x^a ω = e^{a s y} ω; mixed partials by Leibniz in y.
        let partial = move |x: T, y: T, nx: usize, ny: usize| -> Option<C<T>> {
            let e = (s * y).exp();
            let g = x * e;
            let w = g.exp();
            let a = T::from_usize_lossy(nx);
            let ea = (a * s * y).exp();
            let mut acc = T::zero();
            for k in 0..=ny {
                let outer = (a * s).powi((ny - k) as i32);
                acc += binomial::<T>(ny, k) * outer * s.powi(k as i32) * touchard(k, g);
            }
            Some(re(acc * ea * w))
        };
        Self::custom(id, eval, partial, Rect::new(T::zero(), T::one(), -T::one(), T::one()), false)
    }

    /// `F(y)·e^{−c(x)·b(y)}`; analytic `∂x` when `c` has a derivative.
    pub fn exp_family(f: Coefficient<T>, c: Coefficient<T>, b: Coefficient<T>) -> Result<Self> {
        let id = format!("exp_family[F={},c={},b={}]", f.name(), c.name(), b.name());
        let complex = [f.value(T::lit(0.5)), b.value(T::lit(0.5))].iter().any(|z| z.im != T::zero());
        let (f1, c1, b1) = (f, c.clone(), b.clone());
        let eval = move |x: T, y: T| f1.value(y) * cexp(-(c1.value(x) * b1.value(y)));
        let ev = eval.clone();
        let partial = move |x: T, y: T, nx: usize, ny: usize| -> Option<C<T>> {
            match (nx, ny) {
                (1, 0) => c.derivative(x, 1).map(|dc| -dc * b.value(y) * ev(x, y)),
                _ => None,
            }
        };
        Self::custom(id, eval, partial, Rect::square(-T::one(), T::one()), complex)
    }

    /// `a0(x)·δ(x − y)`.
    pub fn multiplication(a0: Coefficient<T>) -> Self {
        Self {
            id: format!("multiplication[{}]", a0.name()),
            complex: a0.value(T::lit(0.5)).im != T::zero(),
            body: Body::Diagonal(a0),
            fd_fallback: false,
            rect: Rect::square(-T::one(), T::one()),
            matched_columns: false,
        }
    }

    /// `c·δ(x − y)`.
    pub fn dilation(c: T) -> Self {
        Self::multiplication(Coefficient::real_constant(c)).with_id(format!("dilation[{c}]"))
    }

    /// `δ(x − y)`.
    pub fn identity() -> Self {
        Self::dilation(T::one()).with_id("identity")
    }

    /// Built-in kernel by catalog id; `dilation` takes its factor from `param`.
    pub fn by_name(id: &str, param: Option<T>) -> Result<Self> {
        match id {
            "gaussian" => Self::gaussian(),
            "xgauss" => Self::xgauss(),
            "fourier" => Self::fourier(),
            "exp_exp_plus" => Self::exp_exp(1),
            "exp_exp_minus" => Self::exp_exp(-1),
            "identity" => Ok(Self::identity()),
            "dilation" => Ok(Self::dilation(param.unwrap_or_else(T::one))),
            other => Err(domain(format!("unknown kernel id `{other}`"))),
        }
    }
}

/// Touchard polynomial `T_m(g) = Σ_k S(m, k) g^k`.
fn touchard<T: Real>(m: usize, g: T) -> T {
    // Stirling numbers of the second kind, row by row
    let mut row = vec![T::one()];
    for n in 1..=m {
        let mut next = vec![T::zero(); n + 1];
        for k in 1..=n {
            let keep = if k < row.len() { T::from_usize_lossy(k) * row[k] } else { T::zero() };
            next[k] = keep + row[k - 1];
        }
        row = next;
    }
    row.iter().rev().fold(T::zero(), |acc, &s| acc * g + s)
}
