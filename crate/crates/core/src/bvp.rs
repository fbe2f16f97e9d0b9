//! The equivalent semilinear boundary value problem
//!
//! ```text
//! U'' + (Γ² - κ² + κ² eps_L(z) + κ² α |U|²) U = 0,   |z| < d,
//! iΓ U(d) - U'(d) = 2iΓ a_inc,   iΓ U(-d) + U'(-d) = 0,
//! ```
//!
//! discretized by second-order differences and solved by damped Newton
//! iteration on the real and imaginary parts.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::BandMatrix;
use crate::model::{FieldSolution, Grid, PermittivityProfile, ProblemParams};
use crate::operators::incident_field;
use crate::quadrature::check_len;

/// Half-bandwidth of the interleaved (Re, Im) Jacobian.
const BAND: usize = 5;
const MAX_HALVINGS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct BvpResidual {
    /// Residual of the differential equation at nodes `1..n-1`.
    pub interior: Vec<Complex64>,
    /// `iΓU(d) - U'(d) - 2iΓ a_inc`.
    pub upper_bc: Complex64,
    /// `iΓU(-d) + U'(-d)`.
    pub lower_bc: Complex64,
}

impl BvpResidual {
    pub fn sup(&self) -> f64 {
        self.interior
            .iter()
            .map(|v| v.norm())
            .fold(self.upper_bc.norm().max(self.lower_bc.norm()), f64::max)
    }

    /// Sup-norm with interior rows scaled by `h²` and boundary rows by `h`,
    /// the row scaling of the Newton system.
    pub fn scaled_sup(&self, h: f64) -> f64 {
        self.interior
            .iter()
            .map(|v| v.norm() * h * h)
            .fold((self.upper_bc.norm() * h).max(self.lower_bc.norm() * h), f64::max)
    }
}

fn coefficients(grid: &Grid, params: &ProblemParams, profile: &PermittivityProfile) -> Result<Vec<Complex64>> {
    let k2 = params.kappa() * params.kappa();
    let base = params.gamma() * params.gamma() - k2;
    Ok(profile.sample(grid)?.iter().map(|e| base + k2 * e).collect())
}

fn check_grid(grid: &Grid) -> Result<()> {
    if grid.n() < 5 {
        return Err(Error::domain(format!("the boundary value problem needs at least 5 nodes, got {}", grid.n())));
    }
    Ok(())
}

fn residual_with(
    u: &[Complex64],
    coeff: &[Complex64],
    h: f64,
    params: &ProblemParams,
    alpha: f64,
) -> BvpResidual {
    let n = u.len();
    let k2a = params.kappa() * params.kappa() * alpha;
    let ig = Complex64::new(0.0, params.gamma());
    let interior = (1..n - 1)
        .map(|i| {
            let second = (u[i - 1] - 2.0 * u[i] + u[i + 1]) / (h * h);
            second + (coeff[i] + k2a * u[i].norm_sqr()) * u[i]
        })
        .collect();
    let du_lower = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h);
    let du_upper = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * h);
    BvpResidual {
        interior,
        upper_bc: ig * u[n - 1] - du_upper - 2.0 * ig * params.a_inc(),
        lower_bc: ig * u[0] + du_lower,
    }
}

pub fn bvp_residual(
    u: &[Complex64],
    grid: &Grid,
    params: &ProblemParams,
    profile: &PermittivityProfile,
    alpha: f64,
) -> Result<BvpResidual> {
    check_grid(grid)?;
    check_len(grid.n(), u.len())?;
    let coeff = coefficients(grid, params, profile)?;
    Ok(residual_with(u, &coeff, grid.h(), params, alpha))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BvpOptions {
    pub max_iters: usize,
    /// Tolerance on the row-scaled residual sup-norm.
    pub tol: f64,
    /// Starting field; the incident field when absent.
    pub initial: Option<Vec<Complex64>>,
}

impl Default for BvpOptions {
    fn default() -> Self {
        Self { max_iters: 50, tol: 1e-12, initial: None }
    }
}

fn add_block(m: &mut BandMatrix, row: usize, col: usize, c: Complex64) {
    m.add(2 * row, 2 * col, c.re);
    m.add(2 * row, 2 * col + 1, -c.im);
    m.add(2 * row + 1, 2 * col, c.im);
    m.add(2 * row + 1, 2 * col + 1, c.re);
}

fn jacobian(u: &[Complex64], coeff: &[Complex64], h: f64, params: &ProblemParams, alpha: f64) -> BandMatrix {
    let n = u.len();
    let mut m = BandMatrix::zeros(2 * n, BAND, BAND);
    let ig_h = Complex64::new(0.0, params.gamma() * h);
    let one = Complex64::new(1.0, 0.0);

    add_block(&mut m, 0, 0, ig_h - 1.5);
    add_block(&mut m, 0, 1, 2.0 * one);
    add_block(&mut m, 0, 2, -0.5 * one);

    let k2a_h2 = params.kappa() * params.kappa() * alpha * h * h;
    for i in 1..n - 1 {
        add_block(&mut m, i, i - 1, one);
        add_block(&mut m, i, i + 1, one);
        add_block(&mut m, i, i, -2.0 + h * h * coeff[i]);
        // d(|U|²U): ∂/∂x = (3x² + y², 2xy), ∂/∂y = (2xy, x² + 3y²)
        let (x, y) = (u[i].re, u[i].im);
        m.add(2 * i, 2 * i, k2a_h2 * (3.0 * x * x + y * y));
        m.add(2 * i + 1, 2 * i, k2a_h2 * 2.0 * x * y);
        m.add(2 * i, 2 * i + 1, k2a_h2 * 2.0 * x * y);
        m.add(2 * i + 1, 2 * i + 1, k2a_h2 * (x * x + 3.0 * y * y));
    }

    add_block(&mut m, n - 1, n - 1, ig_h - 1.5);
    add_block(&mut m, n - 1, n - 2, 2.0 * one);
    add_block(&mut m, n - 1, n - 3, -0.5 * one);
    m
}

fn scaled_rhs(r: &BvpResidual, h: f64) -> Vec<f64> {
    let n = r.interior.len() + 2;
    let mut out = vec![0.0; 2 * n];
    let mut put = |node: usize, v: Complex64| {
        out[2 * node] = -v.re;
        out[2 * node + 1] = -v.im;
    };
    put(0, r.lower_bc * h);
    for (k, v) in r.interior.iter().enumerate() {
        put(k + 1, v * (h * h));
    }
    put(n - 1, r.upper_bc * h);
    out
}

/// Damped Newton solve of the finite-difference equations.
///
/// The returned residual is the row-scaled sup-norm the iteration drives
/// below `opts.tol`. Amplitudes come from the face values:
/// `a_scat = U(d) - a_inc`, `b_scat = U(-d)`.
pub fn solve_bvp(
    params: &ProblemParams,
    profile: &PermittivityProfile,
    grid: &Grid,
    opts: &BvpOptions,
) -> Result<FieldSolution> {
    check_grid(grid)?;
    let n = grid.n();
    let h = grid.h();
    let alpha = params.alpha();
    let coeff = coefficients(grid, params, profile)?;
    let mut u = match &opts.initial {
        Some(init) => {
            check_len(n, init.len())?;
            init.clone()
        }
        None => grid.nodes().iter().map(|&z| incident_field(z, params)).collect(),
    };
    let mut res = residual_with(&u, &coeff, h, params, alpha);
    let mut norm = res.scaled_sup(h);
    let mut iters = 0;
    while norm > opts.tol {
        if iters == opts.max_iters {
            return Err(Error::NewtonNotConverged { iterations: iters, residual: norm });
        }
        iters += 1;
        let mut step = scaled_rhs(&res, h);
        jacobian(&u, &coeff, h, params, alpha).factor()?.solve(&mut step)?;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<Complex64> = u
                .iter()
                .enumerate()
                .map(|(k, v)| v + lambda * Complex64::new(step[2 * k], step[2 * k + 1]))
                .collect();
            let trial_res = residual_with(&trial, &coeff, h, params, alpha);
            let trial_norm = trial_res.scaled_sup(h);
            if trial_norm < norm {
                u = trial;
                res = trial_res;
                norm = trial_norm;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(Error::NewtonNotConverged { iterations: iters, residual: norm });
        }
    }
    let a_scat = u[n - 1] - params.a_inc();
    let b_scat = u[0];
    Ok(FieldSolution { grid: grid.clone(), u, a_scat, b_scat, residual: norm })
}

/// `Im(conj(U) U')` at interior nodes by central differences. Constant across
/// the layer for real permittivity.
pub fn wronskian_flux(u: &[Complex64], grid: &Grid) -> Vec<f64> {
    let h = grid.h();
    (1..u.len() - 1)
        .map(|i| (u[i].conj() * (u[i + 1] - u[i - 1]) / (2.0 * h)).im)
        .collect()
}
