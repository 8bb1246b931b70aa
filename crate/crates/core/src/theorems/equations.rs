//! Kernel-equation residuals: the x·d/dx intertwiner, the catalog kernels,
//! and tabulated Riccati kernels.

use super::{SuiteConfig, VerificationReport};
use crate::coeff::Coefficient;
use crate::error::Result;
use crate::grid::Grid;
use crate::kernels::{kernel_pde_residual, riccati_kernel, Kernel, ResidualDomain};
use crate::scalar::Complex;

/// Residuals of `x·ω_x + ∂_y ω = 0` for `e^{x·e^{+y}}` and `e^{x·e^{−y}}`.
pub fn check_xdx_intertwine(domain: &ResidualDomain<f64>, config: &SuiteConfig) -> Result<VerificationReport> {
    let tol = config.tol("intertwine");
    let mut report = VerificationReport::new("intertwine");
    let a = Coefficient::monomial(1);
    let b = Coefficient::real_constant(1.0);
    let plus = kernel_pde_residual(&Kernel::exp_exp(1)?, 1, 1, &a, &b, domain)?.max_norm;
    let minus = kernel_pde_residual(&Kernel::exp_exp(-1)?, 1, 1, &a, &b, domain)?.max_norm;
    // substituting e^{x e^{y}} leaves 2x·e^{y}·ω
    let mut predicted = 0.0f64;
    for &x in domain.x_nodes() {
        for &y in domain.y_nodes() {
            predicted = predicted.max((2.0 * x * y.exp() * (x * y.exp()).exp()).abs());
        }
    }
    report.check("minus_sign", minus, tol.get("minus_sign", 1e-10));
    report.measure("plus_sign", plus);
    report.measure("plus_sign_predicted", predicted);
    report.check(
        "plus_sign_vs_prediction",
        (plus - predicted).abs() / predicted.max(1.0),
        tol.get("plus_sign_vs_prediction", 1e-9),
    );
    let verdict = if minus <= plus { "exp_exp_minus" } else { "exp_exp_plus" };
    report.note(format!("{verdict} satisfies x·ω_x + ∂y(ω·1) = 0 on this domain"));
    report.note("e^{x·e^{y}} leaves the residual 2x·e^{y}·ω; the sign of the exponent is reported, not corrected");
    Ok(report)
}

pub(super) fn intertwine_suite(config: &SuiteConfig) -> Result<VerificationReport> {
    let xs = Grid::uniform(0.0, 1.0, 21, false)?;
    let ys = Grid::uniform(-1.0, 1.0, 21, false)?;
    let mut report = check_xdx_intertwine(&ResidualDomain::from_grids(&xs, &ys), config)?;
    let degenerate = ResidualDomain::new(vec![0.0], ys.nodes().to_vec())?;
    let d = check_xdx_intertwine(&degenerate, config)?;
    report.check("degenerate.minus_sign", d.residuals["minus_sign"], 0.0);
    report.check("degenerate.plus_sign", d.measurements["plus_sign"], 0.0);
    Ok(report)
}

/// Residuals of the catalog kernels against their kernel equations.
pub fn check_kernel_equations(config: &SuiteConfig) -> Result<VerificationReport> {
    let tol = config.tol("kernel-pde");
    let mut report = VerificationReport::new("kernel-pde");
    let one = Coefficient::real_constant(1.0);
    let line = Grid::uniform(-6.0, 6.0, 25, false)?;
    let square = ResidualDomain::square(&line);
    for id in ["gaussian", "xgauss"] {
        let r = kernel_pde_residual(&Kernel::by_name(id, None)?, 1, 1, &one, &one, &square)?;
        report.check(format!("{id}.n1_m1"), r.max_norm, tol.get(&format!("{id}.n1_m1"), 1e-10));
    }

    let circle = Grid::uniform(0.0, std::f64::consts::TAU, 32, true)?;
    let modes: Vec<f64> = (-16..16).map(f64::from).collect();
    let fourier_domain = ResidualDomain::new(circle.nodes().to_vec(), modes)?;
    let fourier = Kernel::fourier()?;
    let minus_iy = Coefficient::parse("-iy")?;
    let r = kernel_pde_residual(&fourier, 1, 0, &one, &minus_iy, &fourier_domain)?;
    report.check("fourier.n1_m0", r.max_norm, tol.get("fourier.n1_m0", 1e-10));
    let minus_y2 = Coefficient::parse("-y2")?;
    let r = kernel_pde_residual(&fourier, 2, 0, &one, &minus_y2, &fourier_domain)?;
    report.check("fourier.n2_m0", r.max_norm, tol.get("fourier.n2_m0", 1e-8));
    report.note("fourier with n = 2 pairs with b = −y², since (e^{ixy})_xx = −y²·e^{ixy}");

    let xs = Grid::uniform(0.0, 1.0, 21, false)?;
    let ys = Grid::uniform(-1.0, 1.0, 21, false)?;
    let rect = ResidualDomain::from_grids(&xs, &ys);
    let r = kernel_pde_residual(&Kernel::exp_exp(-1)?, 1, 1, &Coefficient::monomial(1), &one, &rect)?;
    report.check("exp_exp_minus.n1_m1", r.max_norm, tol.get("exp_exp_minus.n1_m1", 1e-10));
    let r = kernel_pde_residual(&Kernel::exp_exp(1)?, 1, 1, &Coefficient::monomial(1), &one, &rect)?;
    report.measure("exp_exp_plus.n1_m1", r.max_norm);

    // a = 1 gives c(x) = x; F = 1 and b(y) = y solve −a·ω_x = ω·b
    let family = Kernel::exp_family(one.clone(), Coefficient::monomial(1), Coefficient::monomial(1))?;
    let unit = Grid::uniform(-1.0, 1.0, 21, false)?;
    let r = kernel_pde_residual(&family, 1, 0, &one, &Coefficient::monomial(1), &ResidualDomain::square(&unit))?;
    report.check("exp_family.n1_m0", r.max_norm, tol.get("exp_family.n1_m0", 1e-10));
    Ok(report)
}

pub(super) fn kernel_pde_suite(config: &SuiteConfig) -> Result<VerificationReport> {
    check_kernel_equations(config)
}

/// Tabulated Riccati kernels on `grid` against closed forms and kernel equations.
pub fn check_riccati(grid: &Grid<f64>, config: &SuiteConfig) -> Result<VerificationReport> {
    let tol = config.tol("riccati");
    let mut report = VerificationReport::new("riccati");
    let one = Coefficient::real_constant(1.0);
    let zero = Coefficient::real_constant(0.0);
    let y = Coefficient::monomial(1);
    let y2 = Coefficient::monomial(2);
    let square = ResidualDomain::square(grid);
    let lo = grid.lo();

    let k = riccati_kernel(&one, &y2, &y, grid)?;
    let r = kernel_pde_residual(&k, 2, 0, &one, &y2, &square)?;
    report.check("fourier_like.n2_m0", r.max_norm, tol.get("fourier_like.n2_m0", 1e-6));
    let mut err = 0.0f64;
    for &x in grid.nodes() {
        for &t in grid.nodes() {
            let exact = (t * (x - lo)).exp();
            err = err.max((k.eval(x, t)? - Complex::new(exact, 0.0)).norm() / exact);
        }
    }
    report.check("fourier_like.closed_form", err, tol.get("fourier_like.closed_form", 1e-10));
    report.note(format!("f(lo, y) = 0 normalizes the kernel to e^{{y(x − {lo})}}"));

    let k = riccati_kernel(&one, &one, &one, grid)?;
    let r = kernel_pde_residual(&k, 2, 0, &one, &one, &square)?;
    report.check("fixed_point.n2_m0", r.max_norm, tol.get("fixed_point.n2_m0", 1e-8));

    let k = riccati_kernel(&one, &zero, &zero, grid)?;
    let mut err = 0.0f64;
    for &x in grid.nodes() {
        for &t in grid.nodes() {
            err = err.max((k.eval(x, t)? - Complex::new(1.0, 0.0)).norm());
        }
    }
    report.check("zero_data.unit_kernel", err, tol.get("zero_data.unit_kernel", 1e-14));
    Ok(report)
}

pub(super) fn riccati_suite(config: &SuiteConfig) -> Result<VerificationReport> {
    let grid = config.grid.resolve(0.0, 1.0, 41, false)?;
    check_riccati(&grid, config)
}
