//! Local differential operators, conjugation, metrics and locality scores.

use std::cmp::Ordering;

use nalgebra::{Schur, SymmetricEigen};

use crate::coeff::Coefficient;
use crate::error::{domain, Error, Result};
use crate::grid::{diff_matrix, Grid};
use crate::kernels::{invert, ConditionReport};
use crate::matrix::OperatorMatrix;
use crate::scalar::{cabs, czero, Real, C};

/// Highest derivative order of a [`LocalOperator`].
pub const MAX_LOCAL_ORDER: usize = 4;

/// `Σ_q a_q(x) d^q/dx^q`.
#[derive(Debug, Clone)]
pub struct LocalOperator<T: Real> {
    terms: Vec<(usize, Coefficient<T>)>,
}

impl<T: Real> LocalOperator<T> {
    pub fn new(mut terms: Vec<(usize, Coefficient<T>)>) -> Result<Self> {
        terms.sort_by_key(|(q, _)| *q);
        if terms.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(domain("local operators take at most one term per order"));
        }
        if let Some((q, _)) = terms.iter().find(|(q, _)| *q > MAX_LOCAL_ORDER) {
            return Err(Error::UnsupportedOrder {
                order: *q,
                context: format!("local operators have order ≤ {MAX_LOCAL_ORDER}"),
            });
        }
        Ok(Self { terms })
    }

    /// `d^q/dx^q`.
    pub fn derivative(q: usize) -> Result<Self> {
        Self::new(vec![(q, Coefficient::real_constant(T::one()))])
    }

    /// Multiplication by `a(x)`.
    pub fn multiplication(a: Coefficient<T>) -> Self {
        Self { terms: vec![(0, a)] }
    }

    pub fn terms(&self) -> &[(usize, Coefficient<T>)] {
        &self.terms
    }

    pub fn order(&self) -> usize {
        self.terms.iter().map(|(q, _)| *q).max().unwrap_or(0)
    }
}

/// `Σ_q diag(a_q(x_i))·D_q`.
pub fn to_matrix<T: Real>(op: &LocalOperator<T>, grid: &Grid<T>) -> Result<OperatorMatrix<T>> {
    let n = grid.len();
    let mut acc = OperatorMatrix::identity(grid).scale(czero());
    for (q, a) in &op.terms {
        let coeffs: Vec<C<T>> = grid.nodes().iter().map(|&x| a.value(x)).collect();
        let diag = OperatorMatrix::diagonal(&coeffs, grid)?;
        let term = if *q == 0 { diag } else { diag.compose(&diff_matrix(grid, *q)?)? };
        acc = acc.add(&term)?;
    }
    debug_assert_eq!(acc.dim(), n);
    Ok(acc)
}

/// `W⁻¹AW` through a truncated-SVD inverse of `W`.
///
/// When truncation discards singular values the product is formed as
/// `A + W⁺(AW − WA)`, which equals `W⁻¹AW` whenever `W` is invertible and
/// leaves `A` untouched on the numerical null space of `W`.
pub fn conjugate<T: Real>(
    a: &OperatorMatrix<T>,
    w: &OperatorMatrix<T>,
    threshold: T,
) -> Result<(OperatorMatrix<T>, ConditionReport)> {
    let n = w.entries().nrows();
    if a.entries().shape() != (n, n) {
        return Err(domain(format!(
            "operator of shape {:?} cannot be conjugated by a transform with {n} rows",
            a.entries().shape()
        )));
    }
    let (pinv, report) = invert(w, threshold)?;
    let aw = a.compose(w)?;
    if report.truncated == 0 {
        return Ok((pinv.compose(&aw)?, report));
    }
    if w.row_grid() != w.col_grid() {
        return Err(Error::SingularTransform);
    }
    let commutator = aw.sub(&w.compose(a)?)?;
    Ok((a.add(&pinv.compose(&commutator)?)?, report))
}

/// `max |AW − WB|`: the intertwining residual, free of any inversion.
pub fn intertwining_residual<T: Real>(
    a: &OperatorMatrix<T>,
    w: &OperatorMatrix<T>,
    b: &OperatorMatrix<T>,
) -> Result<T> {
    a.compose(w)?.max_abs_diff(&w.compose(b)?)
}

/// Hermitian positive definite Gram matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Metric<T: Real> {
    matrix: OperatorMatrix<T>,
}

impl<T: Real> Metric<T> {
    pub fn new(matrix: OperatorMatrix<T>) -> Result<Self> {
        let m = matrix.entries();
        if !m.is_square() {
            return Err(domain("metric must be square"));
        }
        let scale = T::one().max(matrix.max_abs());
        let asym = (m - m.adjoint()).iter().fold(T::zero(), |acc, z| acc.max(cabs(*z)));
        if asym > T::lit(1e-12) * scale {
            return Err(domain(format!("metric is not Hermitian (asymmetry {asym})")));
        }
        let (lo, _) = extreme_eigenvalues(&matrix);
        if !(lo > T::zero()) {
            return Err(Error::MetricDegenerate { min_eigenvalue: lo.as_f64() });
        }
        Ok(Self { matrix })
    }

    pub fn identity(grid: &Grid<T>) -> Self {
        Self { matrix: OperatorMatrix::identity(grid) }
    }

    pub fn matrix(&self) -> &OperatorMatrix<T> {
        &self.matrix
    }

    /// `φᴴ G ψ`.
    pub fn inner(&self, phi: &[C<T>], psi: &[C<T>]) -> Result<C<T>> {
        let g_psi = self.matrix.apply(psi)?;
        self.matrix.row_grid().check_len(phi.len(), "metric operand")?;
        Ok(phi.iter().zip(&g_psi).fold(czero(), |acc, (p, q)| acc + p.conj() * q))
    }
}

fn extreme_eigenvalues<T: Real>(m: &OperatorMatrix<T>) -> (T, T) {
    let eig = SymmetricEigen::new(m.entries().clone());
    let lo = eig.eigenvalues.iter().fold(T::max_value().unwrap_or_else(T::one), |a, &v| a.min(v));
    let hi = eig.eigenvalues.iter().fold(T::min_value().unwrap_or_else(T::zero), |a, &v| a.max(v));
    (lo, hi)
}

/// `Wᴴ G W`, rejected when its smallest eigenvalue is not above `1e−12·λ_max`.
pub fn transform_metric<T: Real>(g: &Metric<T>, w: &OperatorMatrix<T>) -> Result<Metric<T>> {
    let m = w.adjoint().compose(&g.matrix)?.compose(w)?;
    // remove rounding asymmetry before the eigen test
    let sym = m.add(&m.adjoint())?.scale(C::new(T::lit(0.5), T::zero()));
    let (lo, hi) = extreme_eigenvalues(&sym);
    if !(lo > T::lit(1e-12) * hi.abs()) {
        return Err(Error::MetricDegenerate { min_eigenvalue: lo.as_f64() });
    }
    Ok(Metric { matrix: sym })
}

/// Fraction of squared Frobenius mass with `|i − j| ≤ bandwidth` (periodic
/// distance on periodic grids). The zero matrix scores 1.
pub fn locality_score<T: Real>(a: &OperatorMatrix<T>, bandwidth: usize) -> T {
    let grid = a.row_grid();
    let periodic = grid.is_periodic() && a.entries().is_square();
    let mut total = T::zero();
    let mut inside = T::zero();
    for (j, col) in a.entries().column_iter().enumerate() {
        for (i, z) in col.iter().enumerate() {
            let mass = z.norm_sqr();
            total += mass;
            let d = if periodic { grid.index_distance(i, j) } else { i.abs_diff(j) };
            if d <= bandwidth {
                inside += mass;
            }
        }
    }
    if total == T::zero() {
        T::one()
    } else {
        inside / total
    }
}

/// Physical width `bandwidth·h` of a node bandwidth.
pub fn physical_bandwidth<T: Real>(grid: &Grid<T>, bandwidth: usize) -> T {
    grid.spacing() * T::from_usize_lossy(bandwidth)
}

/// Eigenvalues from the complex Schur form, sorted by (real, imaginary).
pub fn eigenvalues<T: Real>(a: &OperatorMatrix<T>) -> Result<Vec<C<T>>> {
    if !a.entries().is_square() {
        return Err(domain("eigenvalues need a square matrix"));
    }
    let (_, t) = Schur::new(a.entries().clone()).unpack();
    let mut ev: Vec<C<T>> = t.diagonal().iter().copied().collect();
    ev.sort_by(|p, q| {
        p.re.partial_cmp(&q.re).unwrap_or(Ordering::Equal).then(p.im.partial_cmp(&q.im).unwrap_or(Ordering::Equal))
    });
    Ok(ev)
}

/// Largest distance after greedily matching two spectra as multisets.
pub fn spectrum_distance<T: Real>(a: &[C<T>], b: &[C<T>]) -> Result<T> {
    if a.len() != b.len() {
        return Err(domain("spectra have different sizes"));
    }
    let mut used = vec![false; b.len()];
    let mut worst = T::zero();
    for p in a {
        let (best, dist) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, q)| (k, cabs(*p - *q)))
            .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap_or(Ordering::Equal))
            .expect("equal lengths leave an unmatched partner");
        used[best] = true;
        worst = worst.max(dist);
    }
    Ok(worst)
}
