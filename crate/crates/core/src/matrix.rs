//! Dense operator matrices tied to the grids they act between.

use nalgebra::{DMatrix, DVector};

use crate::error::{domain, Result};
use crate::grid::Grid;
use crate::scalar::{max_modulus, re, Real, C};

/// Dense `n×n` complex matrix representing a discretized operator or kernel.
///
/// Columns are indexed by nodes of `col_grid` (the input space) and rows by
/// nodes of `row_grid` (the output space). The two coincide except for
/// transforms such as the Fourier kernel, whose input lives on a wavenumber
/// grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix<T: Real> {
    entries: DMatrix<C<T>>,
    row_grid: Grid<T>,
    col_grid: Grid<T>,
}

impl<T: Real> OperatorMatrix<T> {
    /// # Panics
    /// If the matrix shape does not match the two grids.
    pub fn new(entries: DMatrix<C<T>>, row_grid: Grid<T>, col_grid: Grid<T>) -> Self {
        assert_eq!(entries.nrows(), row_grid.len(), "row count must match the row grid");
        assert_eq!(entries.ncols(), col_grid.len(), "column count must match the column grid");
        Self { entries, row_grid, col_grid }
    }

    pub fn on_grid(entries: DMatrix<C<T>>, grid: &Grid<T>) -> Self {
        Self::new(entries, grid.clone(), grid.clone())
    }

    pub fn from_real(entries: &DMatrix<T>, grid: &Grid<T>) -> Self {
        Self::on_grid(entries.map(re), grid)
    }

    pub fn identity(grid: &Grid<T>) -> Self {
        let n = grid.len();
        Self::on_grid(DMatrix::identity(n, n), grid)
    }

    pub fn diagonal(values: &[C<T>], grid: &Grid<T>) -> Result<Self> {
        grid.check_len(values.len(), "diagonal")?;
        let d = DVector::from_column_slice(values);
        Ok(Self::on_grid(DMatrix::from_diagonal(&d), grid))
    }

    pub fn entries(&self) -> &DMatrix<C<T>> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<C<T>> {
        self.entries
    }

    pub fn row_grid(&self) -> &Grid<T> {
        &self.row_grid
    }

    pub fn col_grid(&self) -> &Grid<T> {
        &self.col_grid
    }

    /// Grid of a square operator acting on one space (the row grid).
    pub fn grid(&self) -> &Grid<T> {
        &self.row_grid
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// `self · rhs`.
    pub fn compose(&self, rhs: &Self) -> Result<Self> {
        if self.entries.ncols() != rhs.entries.nrows() {
            return Err(domain(format!(
                "cannot compose {}-column operator with {}-row operator",
                self.entries.ncols(),
                rhs.entries.nrows()
            )));
        }
        Ok(Self::new(&self.entries * &rhs.entries, self.row_grid.clone(), rhs.col_grid.clone()))
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.same_shape(rhs)?;
        Ok(Self::new(&self.entries + &rhs.entries, self.row_grid.clone(), self.col_grid.clone()))
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.same_shape(rhs)?;
        Ok(Self::new(&self.entries - &rhs.entries, self.row_grid.clone(), self.col_grid.clone()))
    }

    pub fn scale(&self, factor: C<T>) -> Self {
        Self::new(self.entries.map(|z| z * factor), self.row_grid.clone(), self.col_grid.clone())
    }

    /// Conjugate transpose; rows and columns swap grids.
    pub fn adjoint(&self) -> Self {
        Self::new(self.entries.adjoint(), self.col_grid.clone(), self.row_grid.clone())
    }

    /// Matrix–vector product.
    pub fn apply(&self, v: &[C<T>]) -> Result<Vec<C<T>>> {
        self.col_grid.check_len(v.len(), "operand")?;
        let out = &self.entries * DVector::from_column_slice(v);
        Ok(out.iter().copied().collect())
    }

    pub fn apply_real(&self, v: &[T]) -> Result<Vec<C<T>>> {
        let v: Vec<C<T>> = v.iter().map(|&x| re(x)).collect();
        self.apply(&v)
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> T {
        max_modulus(self.entries.iter())
    }

    /// Largest entry modulus of `self − rhs`.
    pub fn max_abs_diff(&self, rhs: &Self) -> Result<T> {
        self.same_shape(rhs)?;
        Ok(max_modulus((&self.entries - &rhs.entries).iter()))
    }

    fn same_shape(&self, rhs: &Self) -> Result<()> {
        if self.entries.shape() != rhs.entries.shape() {
            return Err(domain(format!(
                "shape mismatch: {:?} vs {:?}",
                self.entries.shape(),
                rhs.entries.shape()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_uniform_grid;
    use nalgebra::Complex;

    #[test]
    fn compose_and_apply() {
        let g = make_uniform_grid(0.0, 1.0, 8, false).unwrap();
        let d: Vec<_> = (0..8).map(|i| Complex::new(i as f64, 0.0)).collect();
        let m = OperatorMatrix::diagonal(&d, &g).unwrap();
        let sq = m.compose(&m).unwrap();
        let out = sq.apply_real(&[1.0; 8]).unwrap();
        assert_eq!(out[3], Complex::new(9.0, 0.0));
        assert_eq!(sq.max_abs(), 49.0);
        assert!(m.apply_real(&[1.0; 3]).is_err());
        let i = OperatorMatrix::identity(&g);
        assert_eq!(i.compose(&m).unwrap(), m);
        assert_eq!(m.sub(&m).unwrap().max_abs(), 0.0);
    }
}
