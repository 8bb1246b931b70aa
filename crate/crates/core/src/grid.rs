//! Uniform grids, quadrature weights and differentiation operators.
//!
//! Periodic grids exclude the right endpoint and integrate with the rectangle
//! rule; they differentiate spectrally through a dense discrete Fourier
//! transform. Non-periodic grids include both endpoints, use trapezoid
//! weights and fourth-order finite-difference stencils (one-sided near the
//! boundary, built with Fornberg's recursion).

use nalgebra::{ComplexField, DMatrix};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{domain, Error, Result};
use crate::matrix::OperatorMatrix;
use crate::scalar::{czero, i_pow, re, Complex, Real, C};

/// Smallest admissible node count.
pub const MIN_NODES: usize = 8;

/// Highest derivative order available on non-periodic grids.
pub const MAX_STENCIL_ORDER: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T: Real> {
    lo: T,
    hi: T,
    n: usize,
    periodic: bool,
    nodes: Vec<T>,
    weights: Vec<T>,
}

/// Builds a uniform grid on `[lo, hi]` (or `[lo, hi)` when periodic).
pub fn make_uniform_grid<T: Real>(lo: T, hi: T, n: usize, periodic: bool) -> Result<Grid<T>> {
    Grid::uniform(lo, hi, n, periodic)
}

impl<T: Real> Grid<T> {
    pub fn uniform(lo: T, hi: T, n: usize, periodic: bool) -> Result<Self> {
        if n < MIN_NODES {
            return Err(domain(format!("grid needs at least {MIN_NODES} nodes, got {n}")));
        }
        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(domain(format!("grid interval [{lo}, {hi}] is empty or not finite")));
        }
        let intervals = if periodic { n } else { n - 1 };
        let h = (hi - lo) / T::from_usize_lossy(intervals);
        let nodes = (0..n).map(|i| lo + h * T::from_usize_lossy(i)).collect();
        let mut weights = vec![h; n];
        if !periodic {
            let half = h / T::lit(2.0);
            weights[0] = half;
            weights[n - 1] = half;
        }
        Ok(Self { lo, hi, n, periodic, nodes, weights })
    }

    pub fn lo(&self) -> T {
        self.lo
    }

    pub fn hi(&self) -> T {
        self.hi
    }

    pub fn len(&self) -> usize {
        self.n
    }

    /// Always false: grids carry at least [`MIN_NODES`] nodes.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Node spacing `h`.
    pub fn spacing(&self) -> T {
        self.nodes[1] - self.nodes[0]
    }

    /// Length of the interval, which is also the period of a periodic grid.
    pub fn length(&self) -> T {
        self.hi - self.lo
    }

    pub fn node(&self, i: usize) -> T {
        self.nodes[i]
    }

    /// Distance between two node indices, wrapping around on periodic grids.
    pub fn index_distance(&self, i: usize, j: usize) -> usize {
        let d = i.abs_diff(j);
        if self.periodic {
            d.min(self.n - d)
        } else {
            d
        }
    }

    /// True when `x` lies strictly inside `(lo, hi)`.
    pub fn contains_strictly(&self, x: T) -> bool {
        x > self.lo && x < self.hi
    }

    pub fn sample<F: Fn(T) -> T>(&self, f: F) -> Vec<T> {
        self.nodes.iter().map(|&x| f(x)).collect()
    }

    pub fn sample_complex<F: Fn(T) -> C<T>>(&self, f: F) -> Vec<C<T>> {
        self.nodes.iter().map(|&x| f(x)).collect()
    }

    pub(crate) fn check_len(&self, len: usize, what: &str) -> Result<()> {
        if len != self.n {
            return Err(domain(format!("{what} has {len} samples, grid has {} nodes", self.n)));
        }
        Ok(())
    }

    /// Local cubic (four-point Lagrange) interpolation of grid samples at `x`.
    pub fn interpolate_cubic(&self, samples: &[T], x: T) -> Result<T> {
        self.check_len(samples.len(), "interpolated samples")?;
        let (idx, basis) = self.cubic_stencil(x);
        Ok((0..4).fold(T::zero(), |acc, a| acc + basis[a] * samples[idx[a]]))
    }

    /// Node indices and Lagrange weights of the 4-point stencil around `x`.
    pub(crate) fn cubic_stencil(&self, x: T) -> ([usize; 4], [T; 4]) {
        let s = (x - self.lo) / self.spacing();
        let base = s.floor().to_i64().unwrap_or(0);
        let count = self.n as i64;
        let first = if self.periodic { base - 1 } else { (base - 1).clamp(0, count - 4) };
        let mut idx = [0usize; 4];
        let mut pos = [T::zero(); 4];
        for k in 0..4 {
            let j = first + k as i64;
            let wrapped = j.rem_euclid(count);
            idx[k] = wrapped as usize;
            // periodic images keep the stencil contiguous in x
            let wraps = T::from_i64((j - wrapped) / count).unwrap_or_else(T::zero);
            pos[k] = self.nodes[idx[k]] + self.length() * wraps;
        }
        let mut basis = [T::zero(); 4];
        if let Some(a) = pos.iter().position(|&p| p == x) {
            basis[a] = T::one();
            return (idx, basis);
        }
        for a in 0..4 {
            basis[a] = T::one();
            for b in 0..4 {
                if a != b {
                    basis[a] *= (x - pos[b]) / (pos[a] - pos[b]);
                }
            }
        }
        (idx, basis)
    }

    /// Applies the order-`q` derivative to real samples (real part of the result).
    pub fn differentiate(&self, samples: &[T], q: usize) -> Result<Vec<T>> {
        let op = DiffOperator::new(self, q)?;
        self.check_len(samples.len(), "differentiated samples")?;
        let complex: Vec<C<T>> = samples.iter().map(|&v| re(v)).collect();
        Ok(op.apply(&complex).into_iter().map(|z| z.re).collect())
    }

    /// Applies the order-`q` derivative to complex samples.
    pub fn differentiate_complex(&self, samples: &[C<T>], q: usize) -> Result<Vec<C<T>>> {
        let op = DiffOperator::new(self, q)?;
        self.check_len(samples.len(), "differentiated samples")?;
        Ok(op.apply(samples))
    }
}

/// Quadrature inner product `Σ_k w_k conj(f_k) g_k`.
pub fn inner_product<S>(f: &[S], g: &[S], grid: &Grid<S::RealField>) -> Result<S>
where
    S: ComplexField,
    S::RealField: Real,
{
    grid.check_len(f.len(), "left operand")?;
    grid.check_len(g.len(), "right operand")?;
    let mut acc = S::zero();
    for ((fk, gk), &w) in f.iter().zip(g).zip(grid.weights()) {
        acc += fk.clone().conjugate() * gk.clone() * S::from_real(w);
    }
    Ok(acc)
}

/// Order-`q` differentiation matrix on `grid`.
pub fn diff_matrix<T: Real>(grid: &Grid<T>, q: usize) -> Result<OperatorMatrix<T>> {
    let op = DiffOperator::new(grid, q)?;
    Ok(OperatorMatrix::new(op.dense(), grid.clone(), grid.clone()))
}

/// Wavenumbers in FFT order: `0, 1, …, ⌈n/2⌉−1, −⌊n/2⌋, …, −1`.
pub(crate) fn fft_wavenumbers(n: usize) -> Vec<i64> {
    let n = n as i64;
    (0..n).map(|k| if k < (n + 1) / 2 { k } else { k - n }).collect()
}

enum DiffOperator<T: Real> {
    Identity(usize),
    /// Circulant matrix given by its first column.
    Circulant(Vec<C<T>>),
    /// Row-wise stencils: (first column, weights).
    Stencil(Vec<(usize, Vec<T>)>),
}

impl<T: Real> DiffOperator<T> {
    fn new(grid: &Grid<T>, q: usize) -> Result<Self> {
        if q == 0 {
            return Ok(Self::Identity(grid.len()));
        }
        if grid.is_periodic() {
            Ok(Self::Circulant(spectral_column(grid, q)))
        } else {
            if q > MAX_STENCIL_ORDER {
                return Err(Error::UnsupportedOrder {
                    order: q,
                    context: format!(
                        "non-periodic grids support derivatives up to order {MAX_STENCIL_ORDER}"
                    ),
                });
            }
            Ok(Self::Stencil(stencil_rows(grid, q)))
        }
    }

    fn apply(&self, v: &[C<T>]) -> Vec<C<T>> {
        match self {
            Self::Identity(_) => v.to_vec(),
            Self::Circulant(col) => {
                let n = v.len();
                (0..n)
                    .map(|j| {
                        let mut acc = czero();
                        for (l, vl) in v.iter().enumerate() {
                            acc += col[(j + n - l) % n] * vl;
                        }
                        acc
                    })
                    .collect()
            }
            Self::Stencil(rows) => rows
                .iter()
                .map(|(start, w)| {
                    let mut acc = czero();
                    for (k, wk) in w.iter().enumerate() {
                        acc += v[start + k] * *wk;
                    }
                    acc
                })
                .collect(),
        }
    }

    fn dense(&self) -> DMatrix<C<T>> {
        match self {
            Self::Identity(n) => DMatrix::identity(*n, *n),
            Self::Circulant(col) => {
                let n = col.len();
                DMatrix::from_fn(n, n, |j, l| col[(j + n - l) % n])
            }
            Self::Stencil(rows) => {
                let n = rows.len();
                let mut m = DMatrix::from_element(n, n, czero());
                for (i, (start, w)) in rows.iter().enumerate() {
                    for (k, wk) in w.iter().enumerate() {
                        m[(i, start + k)] = re(*wk);
                    }
                }
                m
            }
        }
    }
}

/// First column of the spectral differentiation matrix `F⁻¹ diag((iκ)^q) F`.
///
/// The Nyquist mode of an even grid is treated as the wavenumber `−n/2`, so
/// odd-order matrices carry an imaginary Nyquist component and `D¹·D¹ = D²`
/// holds exactly.
fn spectral_column<T: Real>(grid: &Grid<T>, q: usize) -> Vec<C<T>> {
    let n = grid.len();
    let two_pi = T::two_pi();
    let scale = two_pi / grid.length();
    let roots: Vec<C<T>> = (0..n)
        .map(|r| {
            let angle = two_pi * T::from_usize_lossy(r) / T::from_usize_lossy(n);
            Complex::new(angle.cos(), angle.sin())
        })
        .collect();
    let symbols: Vec<(usize, C<T>)> = fft_wavenumbers(n)
        .into_iter()
        .map(|k| {
            let kappa = scale * T::from_i64(k).unwrap_or_else(T::zero);
            let sym = i_pow::<T>(q) * kappa.powi(q as i32);
            (k.rem_euclid(n as i64) as usize, sym)
        })
        .collect();
    let inv_n = T::one() / T::from_usize_lossy(n);
    let mut col: Vec<C<T>> = (0..n)
        .map(|m| {
            let mut acc = czero();
            for &(k, sym) in &symbols {
                acc += sym * roots[(k * m) % n];
            }
            acc * inv_n
        })
        .collect();
    // the zero mode has symbol 0, so rows sum to zero; enforce it exactly
    col[0] = -col[1..].iter().fold(czero(), |acc, c| acc + c);
    col
}

fn stencil_rows<T: Real>(grid: &Grid<T>, q: usize) -> Vec<(usize, Vec<T>)> {
    let n = grid.len();
    // centered fourth-order stencils: 5 points for q ≤ 2, 7 points for q ≤ 4
    let half = if q <= 2 { 2 } else { 3 };
    let one_sided = q + 4;
    let x = grid.nodes();
    (0..n)
        .map(|i| {
            let (start, width) = if i >= half && i + half < n {
                (i - half, 2 * half + 1)
            } else if i < half {
                (0, one_sided)
            } else {
                (n - one_sided, one_sided)
            };
            let w = fornberg_weights(x[i], &x[start..start + width], q);
            (start, w.into_iter().nth(q).unwrap_or_default())
        })
        .collect()
}

/// Fornberg's recursion: finite-difference weights for derivatives `0..=m` at
/// `z` from the nodes `x`. Returns `c[k][j]`, the weight of `x[j]` in the
/// order-`k` derivative.
pub fn fornberg_weights<T: Real>(z: T, x: &[T], m: usize) -> Vec<Vec<T>> {
    let np = x.len();
    let mut c = vec![vec![T::zero(); np]; m + 1];
    if np == 0 {
        return c;
    }
    let mut c1 = T::one();
    let mut c4 = x[0] - z;
    c[0][0] = T::one();
    for i in 1..np {
        let mn = i.min(m);
        let mut c2 = T::one();
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (T::from_usize_lossy(k) * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - T::from_usize_lossy(k) * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

#[derive(Serialize, Deserialize)]
struct GridSpec {
    lo: f64,
    hi: f64,
    n: usize,
    periodic: bool,
}

impl<T: Real> Serialize for Grid<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GridSpec { lo: self.lo.as_f64(), hi: self.hi.as_f64(), n: self.n, periodic: self.periodic }
            .serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for Grid<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let spec = GridSpec::deserialize(d)?;
        Grid::uniform(T::lit(spec.lo), T::lit(spec.hi), spec.n, spec.periodic)
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn max_err(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn trapezoid_grid_on_unit_interval() {
        let g = make_uniform_grid(0.0, 1.0, 11, false).unwrap();
        for (i, x) in g.nodes().iter().enumerate() {
            assert!((x - i as f64 * 0.1).abs() < 1e-15);
        }
        assert!((g.weights()[0] - 0.05).abs() < 1e-15);
        assert!((g.weights()[10] - 0.05).abs() < 1e-15);
        assert!(g.weights()[1..10].iter().all(|w| (w - 0.1).abs() < 1e-15));
    }

    #[test]
    fn periodic_grid_uses_equal_weights() {
        let g = make_uniform_grid(0.0, 2.0 * PI, 16, true).unwrap();
        assert_eq!(g.len(), 16);
        assert!(g.weights().iter().all(|w| (w - 2.0 * PI / 16.0).abs() < 1e-15));
        assert!(g.nodes()[15] < 2.0 * PI);
    }

    #[test]
    fn weights_sum_to_interval_length() {
        let g = make_uniform_grid(-5.0, 5.0, 64, false).unwrap();
        let s: f64 = g.weights().iter().sum();
        assert!((s - 10.0).abs() < 1e-12 * 10.0);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(matches!(make_uniform_grid(0.0, 1.0, 7, false), Err(Error::Domain(_))));
        assert!(matches!(make_uniform_grid(1.0, 1.0, 16, false), Err(Error::Domain(_))));
        assert!(matches!(make_uniform_grid(2.0, 1.0, 16, true), Err(Error::Domain(_))));
    }

    #[test]
    fn inner_products() {
        let g = make_uniform_grid(0.0, 1.0, 11, false).unwrap();
        let ones = vec![1.0; 11];
        assert!((inner_product(&ones, &ones, &g).unwrap() - 1.0).abs() < 1e-14);

        let p = make_uniform_grid(0.0, 2.0 * PI, 32, true).unwrap();
        let s = p.sample(f64::sin);
        let c = p.sample(f64::cos);
        assert!(inner_product(&s, &c, &p).unwrap().abs() < 1e-12);
        assert!((inner_product(&s, &s, &p).unwrap() - PI).abs() < 1e-10);

        assert!(matches!(inner_product(&s[..5], &c, &p), Err(Error::Domain(_))));
    }

    #[test]
    fn complex_inner_product_is_conjugate_symmetric() {
        let p = make_uniform_grid(0.0, 2.0 * PI, 16, true).unwrap();
        let f = p.sample_complex(|x| Complex::new(x.cos(), 0.3 * x));
        let g = p.sample_complex(|x| Complex::new(x * x, x.sin()));
        let fg = inner_product(&f, &g, &p).unwrap();
        let gf = inner_product(&g, &f, &p).unwrap();
        assert!((fg - gf.conj()).norm() < 1e-12);
    }

    #[test]
    fn spectral_derivatives_of_sine() {
        let g = make_uniform_grid(0.0, 2.0 * PI, 32, true).unwrap();
        let s = g.sample(f64::sin);
        let d1 = g.differentiate(&s, 1).unwrap();
        assert!(max_err(&d1, &g.sample(f64::cos)) < 1e-10);
        let d2 = g.differentiate(&s, 2).unwrap();
        assert!(max_err(&d2, &g.sample(|x| -x.sin())) < 1e-9);
        let zero = g.differentiate(&vec![3.5; 32], 1).unwrap();
        assert!(zero.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn finite_difference_orders() {
        let g = make_uniform_grid(-1.0, 1.0, 81, false).unwrap();
        let f = g.sample(|x| (2.0 * x).sin());
        let exact = [
            g.sample(|x| 2.0 * (2.0 * x).cos()),
            g.sample(|x| -4.0 * (2.0 * x).sin()),
            g.sample(|x| -8.0 * (2.0 * x).cos()),
            g.sample(|x| 16.0 * (2.0 * x).sin()),
        ];
        for q in 1..=4 {
            let d = g.differentiate(&f, q).unwrap();
            let err = max_err(&d, &exact[q - 1]);
            assert!(err < 1e-3, "order {q}: {err}");
        }
        let consts = g.differentiate(&vec![1.0; 81], 2).unwrap();
        assert!(consts.iter().all(|v| v.abs() < 1e-9));
        assert!(matches!(g.differentiate(&f, 5), Err(Error::UnsupportedOrder { order: 5, .. })));
    }

    #[test]
    fn finite_differences_converge_at_fourth_order() {
        let err = |n: usize| {
            let g = make_uniform_grid(0.0, 1.0, n, false).unwrap();
            let d = g.differentiate(&g.sample(f64::exp), 1).unwrap();
            max_err(&d, &g.sample(f64::exp))
        };
        let ratio = err(41) / err(81);
        assert!(ratio > 12.0, "ratio {ratio}");
    }

    #[test]
    fn fornberg_recovers_classical_stencil() {
        let w = fornberg_weights(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0], 2);
        let d1 = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
        let d2 = [-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0];
        assert!(max_err(&w[1], &d1) < 1e-14);
        assert!(max_err(&w[2], &d2) < 1e-14);
    }

    #[test]
    fn cubic_interpolation_is_exact_on_cubics() {
        let g = make_uniform_grid(-1.0, 1.0, 17, false).unwrap();
        let f = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x * x;
        let s = g.sample(f);
        for &x in &[-0.99, -0.31, 0.0, 0.42, 0.999] {
            assert!((g.interpolate_cubic(&s, x).unwrap() - f(x)).abs() < 1e-13);
        }
        let p = make_uniform_grid(0.0, 2.0 * PI, 64, true).unwrap();
        let s = p.sample(f64::cos);
        let x = 2.0 * PI - 0.01;
        assert!((p.interpolate_cubic(&s, x).unwrap() - x.cos()).abs() < 1e-5);
    }

    #[test]
    fn grid_json_round_trip() {
        let g = make_uniform_grid(-6.0, 6.0, 64, false).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"lo":-6.0,"hi":6.0,"n":64,"periodic":false}"#);
        let back: Grid<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<Grid<f64>>(r#"{"lo":0,"hi":1,"n":4,"periodic":false}"#).is_err());
    }
}
