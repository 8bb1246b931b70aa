//! Generalized functions: a sampled smooth part plus finitely many weighted
//! derivatives of delta functionals.
//!
//! Deltas stay symbolic. They are only consumed analytically, by [`pair`] and
//! by kernel application. Pairing follows the convention
//! `(D^q δ_{x0}, φ) = (−1)^q φ^{(q)}(x0)`.
//!
//! The smooth part may carry declared discontinuities ([`Jump`]): a jump of
//! order `k` and height `h` at `x0` stands for the piecewise polynomial
//! `h·(x−x0)^k/k!·H(x−x0)`, i.e. the `k`-th derivative of the smooth part
//! jumps by `h`. The sampled smooth part is split into a regular remainder
//! plus these exactly known pieces; differentiation acts numerically on the
//! remainder and exactly on the pieces, so a declared step differentiates to
//! a clean delta. At a node sitting exactly on a step the sample takes the
//! midpoint value.

use std::cmp::Ordering;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{domain, Error, Result};
use crate::grid::{inner_product, Grid};
use crate::quadrature::GaussLegendre;
use crate::scalar::{factorial, hermite, Real};

/// Default cap on delta-derivative orders.
pub const DEFAULT_ORDER_CAP: usize = 8;

/// `weight · D^order δ(x − x0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularTerm<T: Real> {
    pub x0: T,
    pub order: usize,
    pub weight: T,
}

impl<T: Real> SingularTerm<T> {
    pub fn new(x0: T, order: usize, weight: T) -> Self {
        Self { x0, order, weight }
    }
}

/// A declared discontinuity of the `order`-th derivative of the smooth part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump<T: Real> {
    pub x0: T,
    pub height: T,
    pub order: usize,
}

impl<T: Real> Jump<T> {
    pub fn step(x0: T, height: T) -> Self {
        Self { x0, height, order: 0 }
    }

    pub fn new(x0: T, height: T, order: usize) -> Self {
        Self { x0, height, order }
    }

    /// The piece `h·(x−x0)^k/k!·H(x−x0)` at `x`.
    pub fn profile(&self, x: T) -> T {
        match x.partial_cmp(&self.x0) {
            Some(Ordering::Greater) => {
                self.height * (x - self.x0).powi(self.order as i32) / factorial::<T>(self.order)
            }
            Some(Ordering::Equal) if self.order == 0 => self.height / T::lit(2.0),
            _ => T::zero(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedFunction<T: Real> {
    grid: Grid<T>,
    /// Smooth part minus the declared jump pieces; `None` means zero.
    regular: Option<Vec<T>>,
    jumps: Vec<Jump<T>>,
    singular: Vec<SingularTerm<T>>,
    order_cap: usize,
}

impl<T: Real> GeneralizedFunction<T> {
    /// Builds from full smooth samples (jump pieces included).
    pub fn new(
        grid: Grid<T>,
        smooth: Option<Vec<T>>,
        jumps: Vec<Jump<T>>,
        singular: Vec<SingularTerm<T>>,
    ) -> Result<Self> {
        let regular = match smooth {
            Some(mut s) => {
                grid.check_len(s.len(), "smooth part")?;
                for (v, &x) in s.iter_mut().zip(grid.nodes()) {
                    *v -= jumps.iter().fold(T::zero(), |acc, j| acc + j.profile(x));
                }
                Some(s)
            }
            None => None,
        };
        Self::from_regular(grid, regular, jumps, singular)
    }

    /// Builds from the regular remainder of the smooth part.
    pub fn from_regular(
        grid: Grid<T>,
        regular: Option<Vec<T>>,
        jumps: Vec<Jump<T>>,
        singular: Vec<SingularTerm<T>>,
    ) -> Result<Self> {
        let f = Self { grid, regular, jumps, singular, order_cap: DEFAULT_ORDER_CAP };
        f.validate()?;
        Ok(f.canonical())
    }

    pub fn zero(grid: &Grid<T>) -> Self {
        Self {
            grid: grid.clone(),
            regular: None,
            jumps: Vec::new(),
            singular: Vec::new(),
            order_cap: DEFAULT_ORDER_CAP,
        }
    }

    pub fn smooth(grid: &Grid<T>, samples: Vec<T>) -> Result<Self> {
        Self::new(grid.clone(), Some(samples), Vec::new(), Vec::new())
    }

    pub fn delta(grid: &Grid<T>, x0: T, order: usize, weight: T) -> Result<Self> {
        Self::from_regular(grid.clone(), None, Vec::new(), vec![SingularTerm::new(x0, order, weight)])
    }

    /// `height · H(x − x0)`.
    pub fn heaviside(grid: &Grid<T>, x0: T, height: T) -> Result<Self> {
        Self::from_regular(grid.clone(), None, vec![Jump::step(x0, height)], Vec::new())
    }

    pub fn with_order_cap(mut self, cap: usize) -> Result<Self> {
        self.order_cap = cap;
        self.validate()?;
        Ok(self)
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn order_cap(&self) -> usize {
        self.order_cap
    }

    pub fn regular(&self) -> Option<&[T]> {
        self.regular.as_deref()
    }

    pub fn jumps(&self) -> &[Jump<T>] {
        &self.jumps
    }

    pub fn singular(&self) -> &[SingularTerm<T>] {
        &self.singular
    }

    /// Full smooth samples (regular remainder plus jump pieces), or `None`
    /// when the smooth part is identically zero.
    pub fn smooth_samples(&self) -> Option<Vec<T>> {
        if self.regular.is_none() && self.jumps.is_empty() {
            return None;
        }
        let mut s = self.regular.clone().unwrap_or_else(|| vec![T::zero(); self.grid.len()]);
        for (v, &x) in s.iter_mut().zip(self.grid.nodes()) {
            *v += self.jump_value(x);
        }
        Some(s)
    }

    pub(crate) fn jump_value(&self, x: T) -> T {
        self.jumps.iter().fold(T::zero(), |acc, j| acc + j.profile(x))
    }

    pub fn max_singular_order(&self) -> Option<usize> {
        self.singular.iter().map(|t| t.order).max()
    }

    pub fn is_zero(&self) -> bool {
        self.singular.is_empty()
            && self.jumps.is_empty()
            && self.regular.as_ref().is_none_or(|r| r.iter().all(|v| *v == T::zero()))
    }

    fn validate(&self) -> Result<()> {
        if let Some(r) = &self.regular {
            self.grid.check_len(r.len(), "smooth part")?;
            if r.iter().any(|v| !v.is_finite()) {
                return Err(domain("smooth part has non-finite samples"));
            }
        }
        if !self.jumps.is_empty() && self.grid.is_periodic() {
            return Err(domain("jump declarations need a non-periodic grid"));
        }
        for j in &self.jumps {
            if !self.grid.contains_strictly(j.x0) || !j.height.is_finite() {
                return Err(domain(format!("jump at {} lies outside the open grid interval", j.x0)));
            }
        }
        for t in &self.singular {
            if !self.grid.contains_strictly(t.x0) || !t.weight.is_finite() {
                return Err(domain(format!(
                    "singular term at {} lies outside the open grid interval",
                    t.x0
                )));
            }
            if t.order > self.order_cap {
                return Err(Error::UnsupportedOrder {
                    order: t.order,
                    context: format!("delta-derivative order cap is {}", self.order_cap),
                });
            }
        }
        Ok(())
    }

    /// Canonical form: sorted terms, coincident terms merged, zero terms dropped.
    pub fn canonical(&self) -> Self {
        let mut singular = self.singular.clone();
        singular.sort_by(|a, b| {
            a.x0.partial_cmp(&b.x0).unwrap_or(Ordering::Equal).then(a.order.cmp(&b.order))
        });
        let mut merged: Vec<SingularTerm<T>> = Vec::with_capacity(singular.len());
        for t in singular {
            match merged.last_mut() {
                Some(last) if last.x0 == t.x0 && last.order == t.order => last.weight += t.weight,
                _ => merged.push(t),
            }
        }
        merged.retain(|t| t.weight != T::zero());

        let mut jumps = self.jumps.clone();
        jumps.sort_by(|a, b| {
            a.x0.partial_cmp(&b.x0).unwrap_or(Ordering::Equal).then(a.order.cmp(&b.order))
        });
        let mut merged_jumps: Vec<Jump<T>> = Vec::with_capacity(jumps.len());
        for j in jumps {
            match merged_jumps.last_mut() {
                Some(last) if last.x0 == j.x0 && last.order == j.order => last.height += j.height,
                _ => merged_jumps.push(j),
            }
        }
        merged_jumps.retain(|j| j.height != T::zero());

        Self {
            grid: self.grid.clone(),
            regular: self.regular.clone(),
            jumps: merged_jumps,
            singular: merged,
            order_cap: self.order_cap,
        }
    }

    pub fn scale(&self, c: T) -> Self {
        let mut out = self.clone();
        if let Some(r) = &mut out.regular {
            r.iter_mut().for_each(|v| *v *= c);
        }
        out.jumps.iter_mut().for_each(|j| j.height *= c);
        out.singular.iter_mut().for_each(|t| t.weight *= c);
        out.canonical()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(domain("generalized functions live on different grids"));
        }
        let regular = match (&self.regular, &other.regular) {
            (None, None) => None,
            (Some(a), None) => Some(a.clone()),
            (None, Some(b)) => Some(b.clone()),
            (Some(a), Some(b)) => Some(a.iter().zip(b).map(|(x, y)| *x + *y).collect()),
        };
        let out = Self {
            grid: self.grid.clone(),
            regular,
            jumps: self.jumps.iter().chain(&other.jumps).copied().collect(),
            singular: self.singular.iter().chain(&other.singular).copied().collect(),
            order_cap: self.order_cap.max(other.order_cap),
        };
        Ok(out.canonical())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-T::one()))
    }
}

/// Test function samples with derivatives: `derivatives[k]` holds `φ^{(k)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction<T: Real> {
    grid: Grid<T>,
    derivatives: Vec<Vec<T>>,
}

impl<T: Real> TestFunction<T> {
    pub fn new(grid: &Grid<T>, derivatives: Vec<Vec<T>>) -> Result<Self> {
        if derivatives.is_empty() {
            return Err(domain("test function needs at least its values"));
        }
        for d in &derivatives {
            grid.check_len(d.len(), "test function samples")?;
        }
        Ok(Self { grid: grid.clone(), derivatives })
    }

    /// Derivatives up to `max_order` computed with the grid's differentiation operators.
    pub fn from_values(grid: &Grid<T>, values: Vec<T>, max_order: usize) -> Result<Self> {
        let mut derivatives = Vec::with_capacity(max_order + 1);
        for q in 1..=max_order {
            derivatives.push(grid.differentiate(&values, q)?);
        }
        derivatives.insert(0, values);
        Self::new(grid, derivatives)
    }

    /// `amplitude · exp(−((x − center)/width)²)` with analytic derivatives.
    pub fn gaussian_bump(grid: &Grid<T>, center: T, width: T, amplitude: T, max_order: usize) -> Self {
        let derivatives = (0..=max_order)
            .map(|k| {
                grid.sample(|x| {
                    let t = (x - center) / width;
                    let sign = if k % 2 == 0 { T::one() } else { -T::one() };
                    amplitude * sign * hermite(k, t) * (-t * t).exp() / width.powi(k as i32)
                })
            })
            .collect();
        Self { grid: grid.clone(), derivatives }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn max_order(&self) -> usize {
        self.derivatives.len() - 1
    }

    pub fn values(&self) -> &[T] {
        &self.derivatives[0]
    }

    pub fn derivative(&self, k: usize) -> Option<&[T]> {
        self.derivatives.get(k).map(Vec::as_slice)
    }
}

/// `(f, φ) = ∫ smooth·φ + Σ a·(−1)^q·φ^{(q)}(x0)`.
pub fn pair<T: Real>(f: &GeneralizedFunction<T>, test: &TestFunction<T>) -> Result<T> {
    if f.grid != test.grid {
        return Err(domain("test function and generalized function live on different grids"));
    }
    let mut acc = match &f.regular {
        Some(r) => inner_product(r, test.values(), &f.grid)?,
        None => T::zero(),
    };
    for j in &f.jumps {
        acc += jump_integral(&f.grid, j, test.values());
    }
    for t in &f.singular {
        let d = test.derivative(t.order).ok_or_else(|| {
            domain(format!(
                "test function supplies derivatives up to {}, pairing needs order {}",
                test.max_order(),
                t.order
            ))
        })?;
        let sign = if t.order % 2 == 0 { T::one() } else { -T::one() };
        acc += t.weight * sign * f.grid.interpolate_cubic(d, t.x0)?;
    }
    Ok(acc)
}

/// `∫_{x0}^{hi} h·(x−x0)^k/k!·φ(x) dx` from samples of `φ`.
///
/// `φ` is smooth across `x0` even though the profile is not, so each cell right
/// of `x0` is integrated by Gauss-Legendre on a centred degree-7 interpolant of
/// `φ` times the exact profile.
fn jump_integral<T: Real>(grid: &Grid<T>, jump: &Jump<T>, phi: &[T]) -> T {
    const STENCIL: usize = 8;
    let nodes = grid.nodes();
    let n = nodes.len();
    let hi = nodes[n - 1];
    if jump.x0 >= hi {
        return T::zero();
    }
    let piece = |x: T| jump.height * (x - jump.x0).powi(jump.order as i32) / factorial::<T>(jump.order);
    let gl = GaussLegendre::<T>::new(8);
    let first = nodes.iter().position(|&x| x > jump.x0).unwrap_or(n - 1).max(1) - 1;
    let mut acc = T::zero();
    for i in first..n - 1 {
        let a = if nodes[i] > jump.x0 { nodes[i] } else { jump.x0 };
        let b = nodes[i + 1];
        if b <= a {
            continue;
        }
        let start = (i + 1).saturating_sub(STENCIL / 2).min(n.saturating_sub(STENCIL));
        let end = (start + STENCIL).min(n);
        let (xs, ys) = (&nodes[start..end], &phi[start..end]);
        acc += gl.integrate(a, b, 1, |x| piece(x) * lagrange(xs, ys, x));
    }
    acc
}

fn lagrange<T: Real>(xs: &[T], ys: &[T], x: T) -> T {
    let mut total = T::zero();
    for (i, (&xi, &yi)) in xs.iter().zip(ys).enumerate() {
        let mut basis = T::one();
        for (l, &xl) in xs.iter().enumerate() {
            if l != i {
                basis *= (x - xl) / (xi - xl);
            }
        }
        total += basis * yi;
    }
    total
}

/// Distributional derivative.
pub fn differentiate<T: Real>(f: &GeneralizedFunction<T>) -> Result<GeneralizedFunction<T>> {
    let regular = match &f.regular {
        Some(r) => Some(f.grid.differentiate(r, 1)?),
        None => None,
    };
    let mut jumps = Vec::with_capacity(f.jumps.len());
    let mut singular = Vec::with_capacity(f.singular.len() + f.jumps.len());
    for j in &f.jumps {
        if j.order == 0 {
            singular.push(SingularTerm::new(j.x0, 0, j.height));
        } else {
            jumps.push(Jump::new(j.x0, j.height, j.order - 1));
        }
    }
    for t in &f.singular {
        if t.order + 1 > f.order_cap {
            return Err(Error::UnsupportedOrder {
                order: t.order + 1,
                context: format!("delta-derivative order cap is {}", f.order_cap),
            });
        }
        singular.push(SingularTerm::new(t.x0, t.order + 1, t.weight));
    }
    let out = GeneralizedFunction {
        grid: f.grid.clone(),
        regular,
        jumps,
        singular,
        order_cap: f.order_cap,
    };
    Ok(out.canonical())
}

/// `L f` for `L = Σ c_q d^q/dx^q` with constant coefficients, given as `(q, c_q)` pairs.
pub fn apply_constant_coeff_operator<T: Real>(
    terms: &[(usize, T)],
    f: &GeneralizedFunction<T>,
) -> Result<GeneralizedFunction<T>> {
    let top = terms.iter().map(|(q, _)| *q).max().unwrap_or(0);
    let mut out = GeneralizedFunction::zero(&f.grid);
    out.order_cap = f.order_cap;
    let mut current = f.clone();
    for q in 0..=top {
        let c = terms.iter().filter(|(p, _)| *p == q).fold(T::zero(), |acc, (_, c)| acc + *c);
        if c != T::zero() {
            out = out.add(&current.scale(c))?;
        }
        if q < top {
            current = differentiate(&current)?;
        }
    }
    Ok(out.canonical())
}

#[derive(Serialize, Deserialize)]
struct GeneralizedFunctionJson {
    smooth: Option<Vec<f64>>,
    #[serde(default)]
    jumps: Vec<Vec<f64>>,
    #[serde(default)]
    singular: Vec<(f64, usize, f64)>,
    grid: serde_json::Value,
}

impl<T: Real> Serialize for GeneralizedFunction<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let jumps = self
            .jumps
            .iter()
            .map(|j| {
                let mut v = vec![j.x0.as_f64(), j.height.as_f64()];
                if j.order > 0 {
                    v.push(j.order as f64);
                }
                v
            })
            .collect();
        GeneralizedFunctionJson {
            smooth: self.smooth_samples().map(|s| s.into_iter().map(Real::as_f64).collect()),
            jumps,
            singular: self.singular.iter().map(|t| (t.x0.as_f64(), t.order, t.weight.as_f64())).collect(),
            grid: serde_json::to_value(&self.grid).map_err(serde::ser::Error::custom)?,
        }
        .serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for GeneralizedFunction<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = GeneralizedFunctionJson::deserialize(d)?;
        let grid: Grid<T> = serde_json::from_value(raw.grid).map_err(D::Error::custom)?;
        let mut jumps = Vec::with_capacity(raw.jumps.len());
        for j in &raw.jumps {
            let order = match j.as_slice() {
                [_, _] => 0,
                [_, _, k] if *k >= 0.0 && k.fract() == 0.0 => *k as usize,
                _ => return Err(D::Error::custom("jumps are [x0, height] or [x0, height, order]")),
            };
            jumps.push(Jump::new(T::lit(j[0]), T::lit(j[1]), order));
        }
        let singular = raw
            .singular
            .iter()
            .map(|&(x0, q, a)| SingularTerm::new(T::lit(x0), q, T::lit(a)))
            .collect();
        let smooth = raw.smooth.map(|s| s.into_iter().map(T::lit).collect());
        GeneralizedFunction::new(grid, smooth, jumps, singular).map_err(D::Error::custom)
    }
}
