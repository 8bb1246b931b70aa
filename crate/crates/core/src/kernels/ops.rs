//! Discretization, application, inversion and kernel-equation residuals.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{fd_derivative, Kernel, FD_MAX_ORDER};
use crate::coeff::Coefficient;
use crate::distributions::GeneralizedFunction;
use crate::error::{domain, Error, Result};
use crate::grid::Grid;
use crate::matrix::OperatorMatrix;
use crate::quadrature::GaussLegendre;
use crate::scalar::{binomial, cabs, czero, Real, C};

/// Default relative truncation threshold for regularized inversion.
pub const DEFAULT_THRESHOLD: f64 = 1e-10;

/// Singular-value summary of a regularized inversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub sigma_max: f64,
    pub sigma_min: f64,
    pub truncated: usize,
    pub rank: usize,
}

impl ConditionReport {
    /// `σ_max/σ_min` over all singular values (infinite when `σ_min = 0`).
    pub fn condition_number(&self) -> f64 {
        self.sigma_max / self.sigma_min
    }
}

/// Integer wavenumbers `−⌊n/2⌋, …, n − 1 − ⌊n/2⌋` with unit weights.
pub(crate) fn wavenumber_grid<T: Real>(n: usize) -> Result<Grid<T>> {
    let lo = -T::from_usize_lossy(n / 2);
    Grid::uniform(lo, lo + T::from_usize_lossy(n), n, true)
}

/// Nyström matrix `ω(x_i, y_j)·w_j`; diagonal kernels give `diag(a0(x_i))`.
///
/// The Fourier kernel on a periodic grid takes its columns on the integer
/// wavenumbers, which makes the matrix the discrete Fourier transform.
pub fn discretize<T: Real>(k: &Kernel<T>, grid: &Grid<T>) -> Result<OperatorMatrix<T>> {
    if k.matched_columns && grid.is_periodic() {
        let cols = wavenumber_grid(grid.len())?;
        return discretize_between(k, grid, &cols);
    }
    discretize_between(k, grid, grid)
}

/// Nyström matrix between explicit row and column grids.
///
/// Translation kernels on a shared periodic grid are periodized.
pub fn discretize_between<T: Real>(
    k: &Kernel<T>,
    rows: &Grid<T>,
    cols: &Grid<T>,
) -> Result<OperatorMatrix<T>> {
    if let Some(a0) = k.diagonal_coefficient() {
        if rows != cols {
            return Err(domain("diagonal kernels act on a single grid"));
        }
        let d: Vec<C<T>> = rows.nodes().iter().map(|&x| a0.value(x)).collect();
        return OperatorMatrix::diagonal(&d, rows);
    }
    if rows == cols {
        if let Some(table) = translation_table(k, rows)? {
            let n = rows.len();
            let w = rows.weights();
            let m = DMatrix::from_fn(n, n, |i, j| table[i + n - 1 - j] * w[j]);
            return Ok(OperatorMatrix::on_grid(m, rows));
        }
    }
    let period = (rows == cols && rows.is_periodic()).then(|| rows.length());
    let mut m = DMatrix::from_element(rows.len(), cols.len(), czero());
    for (i, &x) in rows.nodes().iter().enumerate() {
        for (j, (&y, &w)) in cols.nodes().iter().zip(cols.weights()).enumerate() {
            m[(i, j)] = k.partial_periodic(period, x, y, 0, 0)? * w;
        }
    }
    Ok(OperatorMatrix::new(m, rows.clone(), cols.clone()))
}

/// `φ = ω u` sampled on the grid of `u`.
///
/// The regular part goes through the Nyström sum, declared jump pieces are
/// integrated exactly in closed form by Gauss–Legendre panels, and each
/// `a·D^q δ(y − x0)` contributes `a·(−1)^q·∂_y^q ω(x, x0)`.
pub fn apply<T: Real>(k: &Kernel<T>, u: &GeneralizedFunction<T>) -> Result<Vec<C<T>>> {
    let grid = u.grid();
    let nodes = grid.nodes();
    if let Some(a0) = k.diagonal_coefficient() {
        if !u.singular().is_empty() {
            return Err(Error::Unsupported(format!(
                "diagonal kernel `{}` cannot act on delta terms",
                k.id()
            )));
        }
        let s = u.smooth_samples().unwrap_or_else(|| vec![T::zero(); grid.len()]);
        return Ok(nodes.iter().zip(s).map(|(&x, v)| a0.value(x) * v).collect());
    }
    let period = grid.is_periodic().then(|| grid.length());
    let mut out = vec![czero(); grid.len()];

    if let (Some(r), Some(table)) = (u.regular(), translation_table(k, grid)?) {
        let n = grid.len();
        let wr: Vec<T> = grid.weights().iter().zip(r).map(|(&w, &v)| w * v).collect();
        for (i, o) in out.iter_mut().enumerate() {
            *o = wr.iter().enumerate().fold(czero(), |acc, (j, &c)| acc + table[i + n - 1 - j] * c);
        }
    } else if let Some(r) = u.regular() {
        for (i, &x) in nodes.iter().enumerate() {
            let mut acc = czero();
            for ((&y, &w), &v) in nodes.iter().zip(grid.weights()).zip(r) {
                acc += k.partial_periodic(period, x, y, 0, 0)? * (w * v);
            }
            out[i] = acc;
        }
    }

    if !u.jumps().is_empty() {
        let gl = GaussLegendre::<T>::new(12);
        let width = (grid.spacing() * T::lit(4.0)).min(T::lit(0.5));
        for jump in u.jumps() {
            let span = grid.hi() - jump.x0;
            let panels = (span / width).ceil().to_usize().unwrap_or(1);
            for (i, &x) in nodes.iter().enumerate() {
                let mut failure = None;
                let v: C<T> = gl.integrate(jump.x0, grid.hi(), panels, |y| match k.eval(x, y) {
                    Ok(w) => w * jump.profile(y),
                    Err(e) => {
                        failure.get_or_insert(e);
                        czero()
                    }
                });
                if let Some(e) = failure {
                    return Err(e);
                }
                out[i] += v;
            }
        }
    }

    for t in u.singular() {
        let sign = if t.order % 2 == 0 { t.weight } else { -t.weight };
        for (i, &x) in nodes.iter().enumerate() {
            out[i] += k.partial_periodic(period, x, t.x0, 0, t.order)? * sign;
        }
    }
    Ok(out)
}

/// Values `ω(d·h)` for `d = −(n−1), …, n−1` of a translation kernel on a
/// uniform grid (periodized on periodic grids); `None` for other kernels.
fn translation_table<T: Real>(k: &Kernel<T>, grid: &Grid<T>) -> Result<Option<Vec<C<T>>>> {
    if !k.is_translation() {
        return Ok(None);
    }
    let n = grid.len() as i64;
    let h = grid.spacing();
    let period = grid.is_periodic().then(|| grid.length());
    (-(n - 1)..n)
        .map(|d| k.partial_periodic(period, h * T::from_i64(d).unwrap_or_else(T::zero), T::zero(), 0, 0))
        .collect::<Result<Vec<_>>>()
        .map(Some)
}

/// Truncated-SVD pseudo-inverse discarding `σ < threshold·σ_max`.
pub fn invert<T: Real>(
    m: &OperatorMatrix<T>,
    threshold: T,
) -> Result<(OperatorMatrix<T>, ConditionReport)> {
    if !(threshold > T::zero() && threshold < T::one()) {
        return Err(domain(format!("truncation threshold {threshold} must lie in (0, 1)")));
    }
    let svd = m.entries().clone().svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sigma = &svd.singular_values;
    let sigma_max = sigma.iter().fold(T::zero(), |a, &s| a.max(s));
    let sigma_min = sigma.iter().fold(sigma_max, |a, &s| a.min(s));
    let cut = threshold * sigma_max;

    let mut v = v_t.adjoint();
    let mut rank = 0;
    for (c, &s) in sigma.iter().enumerate() {
        let inv = if s > cut && s > T::zero() {
            rank += 1;
            T::one() / s
        } else {
            T::zero()
        };
        v.column_mut(c).scale_mut(inv);
    }
    if rank == 0 {
        return Err(Error::SingularTransform);
    }
    let report = ConditionReport {
        sigma_max: sigma_max.as_f64(),
        sigma_min: sigma_min.as_f64(),
        truncated: sigma.len() - rank,
        rank,
    };
    let pinv = v * u.adjoint();
    Ok((OperatorMatrix::new(pinv, m.col_grid().clone(), m.row_grid().clone()), report))
}

/// Evaluation nodes for kernel-equation residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualDomain<T: Real> {
    x_nodes: Vec<T>,
    y_nodes: Vec<T>,
}

impl<T: Real> ResidualDomain<T> {
    pub fn new(x_nodes: Vec<T>, y_nodes: Vec<T>) -> Result<Self> {
        if x_nodes.is_empty() || y_nodes.is_empty() {
            return Err(domain("residual domain needs at least one node per axis"));
        }
        if x_nodes.iter().chain(&y_nodes).any(|v| !v.is_finite()) {
            return Err(domain("residual domain nodes must be finite"));
        }
        Ok(Self { x_nodes, y_nodes })
    }

    /// Interior nodes of two grids (endpoints dropped on non-periodic grids).
    pub fn from_grids(x_grid: &Grid<T>, y_grid: &Grid<T>) -> Self {
        Self { x_nodes: interior(x_grid), y_nodes: interior(y_grid) }
    }

    pub fn square(grid: &Grid<T>) -> Self {
        Self::from_grids(grid, grid)
    }

    pub fn x_nodes(&self) -> &[T] {
        &self.x_nodes
    }

    pub fn y_nodes(&self) -> &[T] {
        &self.y_nodes
    }
}

fn interior<T: Real>(g: &Grid<T>) -> Vec<T> {
    let nodes = g.nodes();
    if g.is_periodic() {
        nodes.to_vec()
    } else {
        nodes[1..nodes.len() - 1].to_vec()
    }
}

/// Residual field of `a(x)·∂xⁿω − (−1)ⁿ·∂yᵐ(ω·b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PdeResidual<T: Real> {
    pub x_nodes: Vec<T>,
    pub y_nodes: Vec<T>,
    /// Row-major in `x`: entry `i·ny + j` belongs to `(x_i, y_j)`.
    pub values: Vec<C<T>>,
    pub max_norm: T,
}

impl<T: Real> PdeResidual<T> {
    pub fn value(&self, i: usize, j: usize) -> C<T> {
        self.values[i * self.y_nodes.len() + j]
    }

    pub fn triples(&self) -> impl Iterator<Item = (T, T, C<T>)> + '_ {
        self.x_nodes.iter().enumerate().flat_map(move |(i, &x)| {
            self.y_nodes.iter().enumerate().map(move |(j, &y)| (x, y, self.value(i, j)))
        })
    }
}

/// Evaluates `R(x, y) = a(x)·∂ⁿω/∂xⁿ − (−1)ⁿ·∂ᵐ(ω(x,y)·b(y))/∂yᵐ` on the domain.
///
/// `∂yᵐ(ω·b)` uses Leibniz' rule when `b` has closed-form derivatives and
/// finite differences of the product otherwise.
pub fn kernel_pde_residual<T: Real>(
    k: &Kernel<T>,
    n: usize,
    m: usize,
    a: &Coefficient<T>,
    b: &Coefficient<T>,
    domain_nodes: &ResidualDomain<T>,
) -> Result<PdeResidual<T>> {
    if k.is_diagonal() {
        return Err(Error::Unsupported(format!(
            "kernel `{}` is diagonal-only; its kernel equation is not pointwise",
            k.id()
        )));
    }
    for order in [n, m] {
        if order > FD_MAX_ORDER {
            return Err(Error::UnsupportedOrder {
                order,
                context: format!("kernel-equation residuals support orders ≤ {FD_MAX_ORDER}"),
            });
        }
    }
    let leibniz = b.has_derivatives(m);
    if !leibniz && m > 0 && !k.fd_fallback() {
        return Err(Error::UnsupportedOrder {
            order: m,
            context: format!("coefficient `{}` has no derivatives and fallback is off", b.name()),
        });
    }
    let sign = if n % 2 == 0 { T::one() } else { -T::one() };
    let mut values = Vec::with_capacity(domain_nodes.x_nodes.len() * domain_nodes.y_nodes.len());
    let mut max_norm = T::zero();
    for &x in &domain_nodes.x_nodes {
        let ax = a.value(x);
        for &y in &domain_nodes.y_nodes {
            let lhs = ax * k.partial(x, y, n, 0)?;
            let rhs = if leibniz {
                let mut acc = czero();
                for l in 0..=m {
                    let bl = b.derivative(y, m - l).expect("checked by has_derivatives");
                    acc += k.partial(x, y, 0, l)? * bl * binomial::<T>(m, l);
                }
                acc
            } else if m == 0 {
                k.eval(x, y)? * b.value(y)
            } else {
                fd_derivative(&|t| Ok(k.eval(x, t)? * b.value(t)), y, m)?
            };
            let r = lhs - rhs * sign;
            if !(r.re.is_finite() && r.im.is_finite()) {
                return Err(Error::Evaluation { kernel: k.id().to_string(), x: x.as_f64(), y: y.as_f64() });
            }
            max_norm = max_norm.max(cabs(r));
            values.push(r);
        }
    }
    Ok(PdeResidual {
        x_nodes: domain_nodes.x_nodes.clone(),
        y_nodes: domain_nodes.y_nodes.clone(),
        values,
        max_norm,
    })
}

/// `(x_i, y_j, ω(x_i, y_j))` triples, row-major in `x`.
pub fn tabulate<T: Real>(k: &Kernel<T>, xs: &[T], ys: &[T]) -> Result<Vec<(T, T, C<T>)>> {
    let mut out = Vec::with_capacity(xs.len() * ys.len());
    for &x in xs {
        for &y in ys {
            out.push((x, y, k.eval(x, y)?));
        }
    }
    Ok(out)
}
