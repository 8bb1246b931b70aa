//! Coefficient functions `a(x)` used by local operators and kernel equations.

use std::fmt;
use std::sync::Arc;

use crate::error::{domain, Result};
use crate::scalar::{re, Complex, Real, C};

type DerivFn<T> = dyn Fn(T, usize) -> Option<C<T>> + Send + Sync;

/// A complex-valued function of one real variable, optionally with closed-form
/// derivatives of every order.
#[derive(Clone)]
pub struct Coefficient<T: Real> {
    name: String,
    f: Arc<DerivFn<T>>,
}

impl<T: Real> fmt::Debug for Coefficient<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Coefficient({})", self.name)
    }
}

impl<T: Real> Coefficient<T> {
    /// A function known only by its values; derivatives fall back to finite differences.
    pub fn new(name: impl Into<String>, f: impl Fn(T) -> C<T> + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(move |t, k| (k == 0).then(|| f(t))),
        }
    }

    pub fn real(name: impl Into<String>, f: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Self::new(name, move |t| re(f(t)))
    }

    /// `f(t, k)` must return the `k`-th derivative at `t`.
    pub fn with_derivatives(
        name: impl Into<String>,
        f: impl Fn(T, usize) -> C<T> + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), f: Arc::new(move |t, k| Some(f(t, k))) }
    }

    pub fn constant(c: C<T>) -> Self {
        let name = if c.im == T::zero() { format!("{}", c.re) } else { format!("{c}") };
        Self::with_derivatives(name, move |_, k| if k == 0 { c } else { Complex::new(T::zero(), T::zero()) })
    }

    pub fn real_constant(c: T) -> Self {
        Self::constant(re(c))
    }

    /// `t^p`.
    pub fn monomial(p: usize) -> Self {
        let name = match p {
            0 => "1".to_string(),
            1 => "x".to_string(),
            _ => format!("x^{p}"),
        };
        Self::with_derivatives(name, move |t, k| {
            if k > p {
                return re(T::zero());
            }
            let falling = (p - k + 1..=p).fold(T::one(), |acc, j| acc * T::from_usize_lossy(j));
            re(falling * t.powi((p - k) as i32))
        })
    }

    /// `e^{rate·t}`.
    pub fn exponential(rate: T) -> Self {
        Self::with_derivatives(format!("exp({rate}x)"), move |t, k| {
            re(rate.powi(k as i32) * (rate * t).exp())
        })
    }

    pub fn scaled(&self, factor: C<T>) -> Self {
        let inner = self.f.clone();
        Self {
            name: format!("({factor})*{}", self.name),
            f: Arc::new(move |t, k| inner(t, k).map(|v| v * factor)),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn value(&self, t: T) -> C<T> {
        (self.f)(t, 0).expect("coefficient value is always defined")
    }

    /// Closed-form `k`-th derivative, when available.
    pub fn derivative(&self, t: T, k: usize) -> Option<C<T>> {
        (self.f)(t, k)
    }

    pub fn has_derivatives(&self, up_to: usize) -> bool {
        let probe = T::lit(0.5);
        (0..=up_to).all(|k| self.derivative(probe, k).is_some())
    }

    /// Parses a registry name.
    ///
    /// Grammar: an optional `-`, an optional `i` (imaginary unit), then one of a
    /// decimal constant, `x`, `y`, `x2`, `y2`, `exp_x`, `exp_y`, `exp_neg_x`,
    /// `exp_neg_y`. The variable letter is cosmetic: `x` and `y` denote the same
    /// function of the coefficient's argument.
    pub fn parse(spec: &str) -> Result<Self> {
        let trimmed = spec.trim();
        let (negative, rest) = match trimmed.strip_prefix('-') {
            Some(r) => (true, r),
            None => (false, trimmed),
        };
        let (imaginary, body) = match rest.strip_prefix('i') {
            Some("") => (true, "1"),
            Some(r) if !r.starts_with("nf") => (true, r.trim_start_matches('*')),
            _ => (false, rest),
        };
        let base = match body {
            "x" | "y" => Self::monomial(1),
            "x2" | "y2" => Self::monomial(2),
            "exp_x" | "exp_y" => Self::exponential(T::one()),
            "exp_neg_x" | "exp_neg_y" => Self::exponential(-T::one()),
            other => {
                let v: f64 = other
                    .parse()
                    .map_err(|_| domain(format!("unknown coefficient `{spec}`")))?;
                if !v.is_finite() {
                    return Err(domain(format!("coefficient constant `{spec}` is not finite")));
                }
                Self::real_constant(T::lit(v))
            }
        };
        let mut factor = Complex::new(T::one(), T::zero());
        if imaginary {
            factor = Complex::new(T::zero(), T::one());
        }
        if negative {
            factor = -factor;
        }
        let scaled = if factor == Complex::new(T::one(), T::zero()) { base } else { base.scaled(factor) };
        Ok(Self { name: trimmed.to_string(), f: scaled.f })
    }
}
