//! Tabulated kernels `ω = e^f` with `g = f_x` solving `g_x + g² = b(y)/a(x)`.

use nalgebra::DMatrix;

use super::{Kernel, Rect};
use crate::coeff::Coefficient;
use crate::error::{domain, Error, Result};
use crate::grid::Grid;
use crate::scalar::{re, Real};

const BLOWUP: f64 = 1e6;
const SUBSTEPS: usize = 4;

/// Integrates the Riccati equation along `x` for every node `y_j` of `grid`,
/// starting at `grid.lo` with `g = g0(y_j)` and `f = 0`.
///
/// `(f, g)` advance together by classical RK4 with four substeps per grid
/// interval. The kernel evaluates `e^f` through tensor 4×4 Lagrange
/// interpolation of the tabulated `f`; its partials use finite differences.
pub fn riccati_kernel<T: Real>(
    a: &Coefficient<T>,
    b: &Coefficient<T>,
    g0: &Coefficient<T>,
    grid: &Grid<T>,
) -> Result<Kernel<T>> {
    if grid.is_periodic() {
        return Err(domain("Riccati kernels are tabulated on non-periodic grids"));
    }
    let real = |c: &Coefficient<T>, t: T| -> Result<T> {
        let v = c.value(t);
        if v.im != T::zero() || !v.re.is_finite() {
            return Err(domain(format!("coefficient `{}` must be real and finite at {t}", c.name())));
        }
        Ok(v.re)
    };
    let nodes = grid.nodes();
    let n = nodes.len();
    let mut table = DMatrix::from_element(n, n, T::zero());
    for (j, &y) in nodes.iter().enumerate() {
        let by = real(b, y)?;
        let rhs = |x: T, g: T| -> Result<T> {
            let ax = real(a, x)?;
            if ax.abs() <= T::default_epsilon() {
                return Err(domain(format!("coefficient `{}` vanishes near x = {x}", a.name())));
            }
            Ok(by / ax - g * g)
        };
        let mut g = real(g0, y)?;
        let mut f = T::zero();
        for i in 0..n - 1 {
            let h = (nodes[i + 1] - nodes[i]) / T::from_usize_lossy(SUBSTEPS);
            let half = h / T::lit(2.0);
            for s in 0..SUBSTEPS {
                let x = nodes[i] + h * T::from_usize_lossy(s);
                let k1 = rhs(x, g)?;
                let k2 = rhs(x + half, g + half * k1)?;
                let k3 = rhs(x + half, g + half * k2)?;
                let k4 = rhs(x + h, g + h * k3)?;
                // f' = g, so the f increments are the g stages
                f += h / T::lit(6.0) * (g + T::lit(2.0) * (g + half * k1) + T::lit(2.0) * (g + half * k2) + (g + h * k3));
                g += h / T::lit(6.0) * (k1 + T::lit(2.0) * k2 + T::lit(2.0) * k3 + k4);
                if !(g.abs() <= T::lit(BLOWUP)) {
                    return Err(Error::RiccatiSingularity {
                        x: (x + h).as_f64(),
                        y: y.as_f64(),
                        magnitude: g.abs().as_f64(),
                    });
                }
            }
            table[(i + 1, j)] = f;
        }
    }
    let g = grid.clone();
    let eval = move |x: T, y: T| {
        let (ix, wx) = g.cubic_stencil(x);
        let (iy, wy) = g.cubic_stencil(y);
        let mut f = T::zero();
        for a in 0..4 {
            for b in 0..4 {
                f += wx[a] * wy[b] * table[(ix[a], iy[b])];
            }
        }
        re(f.exp())
    };
    let id = format!("riccati[a={},b={},g0={}]", a.name(), b.name(), g0.name());
    Kernel::custom(id, eval, |_, _, _, _| None, Rect::square(grid.lo(), grid.hi()), false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_uniform_grid;

    #[test]
    fn zero_data_gives_unit_kernel() {
        let g: Grid<f64> = make_uniform_grid(-1.0, 1.0, 21, false).unwrap();
        let zero = Coefficient::real_constant(0.0);
        let k = riccati_kernel(&Coefficient::real_constant(1.0), &zero, &zero, &g).unwrap();
        for &(x, y) in &[(-1.0, 0.3), (0.37, -0.81), (1.0, 1.0)] {
            assert_eq!(k.eval(x, y).unwrap().re, 1.0);
        }
    }

    #[test]
    fn fixed_point_gives_exponential() {
        let g: Grid<f64> = make_uniform_grid(-1.0, 1.0, 21, false).unwrap();
        let one = Coefficient::real_constant(1.0);
        let k = riccati_kernel(&one, &one, &one, &g).unwrap();
        // f = x − lo, so ω = e^{x+1}
        for &(x, y) in &[(-0.5, 0.3), (0.77, -0.2)] {
            assert!((k.eval(x, y).unwrap().re - (x + 1.0f64).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn blowup_is_reported() {
        let g: Grid<f64> = make_uniform_grid(0.0, 4.0, 41, false).unwrap();
        let one = Coefficient::real_constant(1.0);
        // g' = −g², g(0) = −1 blows up at x = 1
        let k = riccati_kernel(&one, &Coefficient::real_constant(0.0), &Coefficient::real_constant(-1.0), &g);
        match k {
            Err(Error::RiccatiSingularity { x, .. }) => assert!((x - 1.0).abs() < 0.1),
            other => panic!("expected a Riccati singularity, got {other:?}"),
        }
    }

    #[test]
    fn vanishing_coefficient_is_rejected() {
        let g: Grid<f64> = make_uniform_grid(-1.0, 1.0, 21, false).unwrap();
        let one = Coefficient::real_constant(1.0);
        let x = Coefficient::monomial(1);
        assert!(matches!(riccati_kernel(&x, &one, &one, &g), Err(Error::Domain(_))));
    }
}
