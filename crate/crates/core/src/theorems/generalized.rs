//! Gaussian mollification turns generalized solutions of constant-coefficient
//! equations into smooth solutions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{SuiteConfig, VerificationReport};
use crate::distributions::{
    apply_constant_coeff_operator, pair, GeneralizedFunction, Jump, SingularTerm, TestFunction,
};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kernels::{apply, Kernel};
use crate::scalar::{Complex, C};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralizedOptions {
    /// Nodes closer than this to either end of a non-periodic grid are not
    /// compared: truncating the domain only disturbs the mollified functions there.
    pub margin: f64,
    pub tolerance: f64,
    pub smoothness_tolerance: f64,
    /// Random test functions used to confirm `L u = v`.
    pub test_functions: usize,
    pub precondition_tolerance: f64,
    pub seed: u64,
}

impl Default for GeneralizedOptions {
    fn default() -> Self {
        Self {
            margin: 6.0,
            tolerance: 1e-6,
            smoothness_tolerance: 1e-2,
            test_functions: 10,
            precondition_tolerance: 1e-6,
            seed: 7,
        }
    }
}

fn window(grid: &Grid<f64>, margin: f64) -> Vec<usize> {
    if grid.is_periodic() {
        return (0..grid.len()).collect();
    }
    let (lo, hi) = (grid.lo() + margin - 1e-9, grid.hi() - margin + 1e-9);
    (0..grid.len()).filter(|&i| (lo..=hi).contains(&grid.node(i))).collect()
}

/// `max|Δ⁴φ| / max|Δ²φ|` over consecutive window nodes: a smoothness proxy,
/// small when φ is well resolved, not a proof of smoothness.
fn smoothness_proxy(phi: &[C<f64>], idx: &[usize]) -> f64 {
    let vals: Vec<C<f64>> = idx.iter().map(|&i| phi[i]).collect();
    let diff = |v: &[C<f64>]| v.windows(2).map(|w| w[1] - w[0]).collect::<Vec<_>>();
    let d2 = diff(&diff(&vals));
    let d4 = diff(&diff(&d2));
    let m2 = d2.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    let m4 = d4.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    if m2 == 0.0 {
        0.0
    } else {
        m4 / m2
    }
}

/// Checks that `φ = ω u` and `ψ = ω v` satisfy `L(D)φ = ψ` for the Gaussian `ω`.
///
/// `operator` lists `(q, c_q)` of `L = Σ c_q d^q/dx^q`. Fails with
/// [`Error::NotASolution`] unless `L u = v` holds when paired with random
/// smooth test functions.
pub fn smooth_from_generalized(
    operator: &[(usize, f64)],
    u: &GeneralizedFunction<f64>,
    v: &GeneralizedFunction<f64>,
    options: &GeneralizedOptions,
) -> Result<VerificationReport> {
    let grid = u.grid();
    if v.grid() != grid {
        return Err(Error::Precondition("u and v live on different grids".into()));
    }
    let idx = window(grid, options.margin);
    if idx.len() < 5 {
        return Err(Error::Precondition(format!(
            "grid [{}, {}] leaves no comparison window at margin {}",
            grid.lo(),
            grid.hi(),
            options.margin
        )));
    }
    let (wlo, whi) = (grid.node(idx[0]), grid.node(idx[idx.len() - 1]));
    let mut report = VerificationReport::new("generalized");

    let defect = apply_constant_coeff_operator(operator, u)?.sub(v)?;
    let mut worst = 0.0f64;
    if !defect.is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
        for _ in 0..options.test_functions {
            let center = rng.gen_range(wlo..=whi);
            let width = rng.gen_range(0.7..1.5);
            let phi = TestFunction::gaussian_bump(grid, center, width, 1.0, defect.order_cap());
            let scale = 1.0 + pair(v, &phi)?.abs();
            let d = pair(&defect, &phi)?.abs() / scale;
            worst = worst.max(d);
            if d > options.precondition_tolerance {
                return Err(Error::NotASolution(format!(
                    "(Lu − v, φ) = {d:e} for a bump at {center:.3} of width {width:.3}"
                )));
            }
        }
    }
    report.measure("precondition_defect", worst);

    let kernel = Kernel::gaussian()?;
    let phi = apply(&kernel, u)?;
    let psi = apply(&kernel, v)?;
    let mut lphi = vec![Complex::new(0.0, 0.0); grid.len()];
    for &(q, c) in operator {
        let dq = if q == 0 { phi.clone() } else { grid.differentiate_complex(&phi, q)? };
        for (acc, d) in lphi.iter_mut().zip(dq) {
            *acc += d * c;
        }
    }
    let residual = idx.iter().fold(0.0f64, |a, &i| a.max((lphi[i] - psi[i]).norm()));
    report.check("operator_residual", residual, options.tolerance);
    report.check("smoothness_proxy", smoothness_proxy(&phi, &idx), options.smoothness_tolerance);
    report.measure("window_lo", wlo);
    report.measure("window_hi", whi);
    report.note("smoothness_proxy is max|Δ⁴φ|/max|Δ²φ| over the window, evidence rather than proof");
    Ok(report)
}

/// One randomly drawn `(L, u, v = L u)` triple.
#[derive(Debug, Clone)]
pub struct GeneralizedInstance {
    pub operator: Vec<(usize, f64)>,
    pub u: GeneralizedFunction<f64>,
    pub v: GeneralizedFunction<f64>,
}

/// Draws `L` of order ≤ 2 with coefficients in [−1, 1] and `u` made of
/// Gaussian bumps, an optional step or kink, and deltas of order ≤ 1.
pub fn random_instance<R: Rng>(rng: &mut R, grid: &Grid<f64>) -> Result<GeneralizedInstance> {
    let order = rng.gen_range(0..=2usize);
    let mut operator: Vec<(usize, f64)> = (0..=order).map(|q| (q, rng.gen_range(-1.0..=1.0))).collect();
    if operator[order].1.abs() < 0.1 {
        operator[order].1 = 0.5;
    }
    let bumps = rng.gen_range(1..=3);
    let specs: Vec<(f64, f64, f64)> = (0..bumps)
        .map(|_| (rng.gen_range(-4.0..=4.0), rng.gen_range(0.8..=1.5), rng.gen_range(-1.0..=1.0)))
        .collect();
    let regular = grid.sample(|x| {
        specs.iter().map(|&(c, w, a)| a * (-((x - c) / w).powi(2)).exp()).sum()
    });
    let mut jumps = Vec::new();
    if rng.gen_bool(0.5) {
        jumps.push(Jump::new(rng.gen_range(-3.0..=3.0), rng.gen_range(-1.0..=1.0), rng.gen_range(0..=1)));
    }
    let singular = (0..rng.gen_range(0..=2))
        .map(|_| SingularTerm::new(rng.gen_range(-3.0..=3.0), rng.gen_range(0..=1), rng.gen_range(-1.0..=1.0)))
        .collect();
    let u = GeneralizedFunction::from_regular(grid.clone(), Some(regular), jumps, singular)?;
    let v = apply_constant_coeff_operator(&operator, &u)?;
    Ok(GeneralizedInstance { operator, u, v })
}

fn theorem_grid(config: &SuiteConfig) -> Result<Grid<f64>> {
    config.grid.resolve(-12.0, 12.0, 1201, false)
}

pub(super) fn generalized_suite(config: &SuiteConfig) -> Result<VerificationReport> {
    let grid = theorem_grid(config)?;
    let tol = config.tol("generalized");
    let mut report = VerificationReport::new("generalized");
    let base = GeneralizedOptions { seed: config.seed, ..GeneralizedOptions::default() };

    let step = GeneralizedFunction::heaviside(&grid, 0.0, 1.0)?;
    let delta = GeneralizedFunction::delta(&grid, 0.0, 0, 1.0)?;
    let opts = GeneralizedOptions { tolerance: tol.get("heaviside.operator_residual", 1e-6), ..base };
    let mut sub = smooth_from_generalized(&[(1, 1.0)], &step, &delta, &opts)?;
    let phi = apply(&Kernel::gaussian()?, &step)?;
    let erf_err = window(&grid, base.margin).into_iter().fold(0.0f64, |a, i| {
        let x = grid.node(i);
        let exact = std::f64::consts::PI.sqrt() / 2.0 * (1.0 + libm::erf(x));
        a.max((phi[i] - Complex::new(exact, 0.0)).norm())
    });
    sub.check("erf_oracle", erf_err, tol.get("heaviside.erf_oracle", 1e-7));
    report.absorb("heaviside", sub);

    let zero = GeneralizedFunction::zero(&grid);
    let opts = GeneralizedOptions { tolerance: tol.get("zero.operator_residual", 0.0), ..base };
    report.absorb("zero", smooth_from_generalized(&[(1, 1.0)], &zero, &zero, &opts)?);

    let ramp = GeneralizedFunction::new(
        grid.clone(),
        Some(grid.sample(|x| x.abs() / 2.0)),
        vec![Jump::new(0.0, 1.0, 1)],
        vec![],
    )?;
    let opts = GeneralizedOptions { tolerance: tol.get("ramp.operator_residual", 1e-5), ..base };
    report.absorb("ramp", smooth_from_generalized(&[(2, 1.0)], &ramp, &delta, &opts)?);

    report.note(format!(
        "domain [{}, {}] with {} nodes; comparisons keep a margin of {} from each end",
        grid.lo(),
        grid.hi(),
        grid.len(),
        base.margin
    ));
    Ok(report)
}

pub(super) fn property_suite(config: &SuiteConfig) -> Result<VerificationReport> {
    let grid = theorem_grid(config)?;
    let tol = config.tol("generalized-property");
    let opts = GeneralizedOptions {
        tolerance: tol.get("operator_residual", 1e-5),
        seed: config.seed,
        ..GeneralizedOptions::default()
    };
    let mut rng = config.rng("generalized-property");
    let instances = 50;
    let mut worst = 0.0f64;
    let mut worst_smooth = 0.0f64;
    let mut failures = 0usize;
    for _ in 0..instances {
        let inst = random_instance(&mut rng, &grid)?;
        let r = smooth_from_generalized(&inst.operator, &inst.u, &inst.v, &opts)?;
        worst = worst.max(r.residuals["operator_residual"]);
        worst_smooth = worst_smooth.max(r.residuals["smoothness_proxy"]);
        if !r.passed {
            failures += 1;
        }
    }
    let mut report = VerificationReport::new("generalized-property");
    report.check("max_operator_residual", worst, opts.tolerance);
    report.check("max_smoothness_proxy", worst_smooth, opts.smoothness_tolerance);
    report.check("failed_instances", failures as f64, 0.0);
    report.measure("instances", instances as f64);
    Ok(report)
}
