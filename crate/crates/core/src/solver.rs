//! Iterative solvers for the discretized integral equation and post-processing
//! of the solved field.
//!
//! * Picard: `U_{n+1} = T(U_n)`.
//! * Coupled: freeze the permittivity at `eps_L + α|U_n|²`, solve the linear
//!   equation for `Ψ_n` by dense LU and set `U_{n+1} = Ψ_n`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::contraction;
use crate::error::{Error, Result};
use crate::linalg::solve_dense;
use crate::model::{FieldSolution, Grid, PermittivityProfile, ProblemParams};
use crate::operators::{incident_field, sup_diff, sup_norm, IntegralMap, KernelConvention};
use crate::quadrature::{check_len, phase_table, QuadratureRule, QuadratureScheme};

/// Iterates whose sup-norm exceeds this multiple of `|a_inc|` count as divergent.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

/// Condition estimates above this abort the coupled scheme.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    Picard,
    Coupled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialGuess {
    Zero,
    /// The incident field, which is the exact solution for a vacuum layer.
    #[default]
    Incident,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub max_iters: usize,
    /// Stop once `sup |U_{n+1} - U_n| <= tol`.
    pub tol: f64,
    pub scheme: Scheme,
    pub initial: InitialGuess,
    pub record_trace: bool,
    pub rule: QuadratureRule,
    pub convention: KernelConvention,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iters: 500,
            tol: 1e-10,
            scheme: Scheme::Picard,
            initial: InitialGuess::Incident,
            record_trace: true,
            rule: QuadratureRule::TrapezoidSplit,
            convention: KernelConvention::PHYSICAL,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::domain(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(Error::domain("max_iters must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct IterationTrace {
    /// `sup |U_{n+1} - U_n|` per step.
    pub deltas: Vec<f64>,
    /// Sup-norm equation residual of each new iterate.
    pub residuals: Vec<f64>,
    pub converged: bool,
    pub iters_used: usize,
    /// Guaranteed contraction rate, when a sufficient condition holds.
    pub predicted_rate: Option<f64>,
    /// `max |U| / max |U_inc|` of the final iterate.
    pub field_ratio: f64,
    /// Condition estimates of the coupled-scheme systems.
    pub conditions: Vec<f64>,
}

impl IterationTrace {
    /// `deltas[n] / deltas[n-1]` for `n >= 1`.
    pub fn ratios(&self) -> Vec<f64> {
        self.deltas.windows(2).map(|w| w[1] / w[0]).collect()
    }
}

/// Dispatches on `opts.scheme`.
pub fn solve(
    params: &ProblemParams,
    profile: &PermittivityProfile,
    grid: &Grid,
    opts: &SolveOptions,
) -> Result<(FieldSolution, IterationTrace)> {
    match opts.scheme {
        Scheme::Picard => solve_picard(params, profile, grid, opts),
        Scheme::Coupled => solve_coupled(params, profile, grid, opts),
    }
}

fn initial_iterate(map: &IntegralMap, initial: InitialGuess) -> Vec<Complex64> {
    match initial {
        InitialGuess::Zero => vec![Complex64::new(0.0, 0.0); map.forcing().len()],
        InitialGuess::Incident => map.forcing().to_vec(),
    }
}

fn check_bounded(u: &[Complex64], params: &ProblemParams, iteration: usize) -> Result<()> {
    let norm = sup_norm(u);
    let finite = u.iter().all(|v| v.re.is_finite() && v.im.is_finite());
    if !finite || norm > DIVERGENCE_FACTOR * params.a_inc().norm() {
        return Err(Error::Diverged {
            iteration,
            norm: if finite { norm } else { f64::INFINITY },
        });
    }
    Ok(())
}

pub fn solve_picard(
    params: &ProblemParams,
    profile: &PermittivityProfile,
    grid: &Grid,
    opts: &SolveOptions,
) -> Result<(FieldSolution, IterationTrace)> {
    opts.validate()?;
    let scheme = QuadratureScheme::new(opts.rule, grid.clone());
    let map = IntegralMap::new(params, profile, scheme, params.alpha(), opts.convention)?;
    let mut u = initial_iterate(&map, opts.initial);
    let mut trace = IterationTrace {
        predicted_rate: contraction::predicted_rate(params, profile, grid)?,
        ..Default::default()
    };
    let mut deltas = Vec::new();
    for it in 1..=opts.max_iters {
        let next = map.apply(&u)?;
        check_bounded(&next, params, it)?;
        let delta = sup_diff(&next, &u);
        deltas.push(delta);
        u = next;
        trace.iters_used = it;
        if delta <= opts.tol {
            trace.converged = true;
            break;
        }
    }
    let residual = sup_norm(&map.residual(&u)?);
    finish(params, profile, &map, u, residual, deltas, opts, trace)
}

pub fn solve_coupled(
    params: &ProblemParams,
    profile: &PermittivityProfile,
    grid: &Grid,
    opts: &SolveOptions,
) -> Result<(FieldSolution, IterationTrace)> {
    opts.validate()?;
    let scheme = QuadratureScheme::new(opts.rule, grid.clone());
    let alpha = params.alpha();
    let map = IntegralMap::new(params, profile, scheme.clone(), alpha, opts.convention)?;
    let n = grid.n();
    let phases = phase_table(grid, opts.convention.rate(params));
    let s0 = params.s0();
    let split: Vec<Vec<f64>> = match opts.rule {
        QuadratureRule::TrapezoidSplit => vec![scheme.full_weights()],
        QuadratureRule::SimpsonSplit => (0..n).map(|j| scheme.split_weights(j)).collect(),
    };

    let mut u = initial_iterate(&map, opts.initial);
    let mut trace = IterationTrace {
        predicted_rate: contraction::predicted_rate(params, profile, grid)?,
        ..Default::default()
    };
    let mut deltas = Vec::new();
    for it in 1..=opts.max_iters {
        let coeff: Vec<Complex64> = map
            .eps_minus_one()
            .iter()
            .zip(&u)
            .map(|(g, v)| g + alpha * v.norm_sqr())
            .collect();
        let mut m = vec![Complex64::new(0.0, 0.0); n * n];
        for (j, row) in m.chunks_exact_mut(n).enumerate() {
            let w = &split[if split.len() == 1 { 0 } else { j }];
            for (k, entry) in row.iter_mut().enumerate() {
                *entry = -s0 * w[k] * phases[j.abs_diff(k)] * coeff[k];
            }
            row[j] += 1.0;
        }
        let (next, cond) = solve_dense(m, n, map.forcing(), MAX_CONDITION)?;
        check_bounded(&next, params, it)?;
        trace.conditions.push(cond);
        let delta = sup_diff(&next, &u);
        deltas.push(delta);
        u = next;
        trace.iters_used = it;
        // Without the Kerr term the frozen system is the exact linear equation.
        if delta <= opts.tol || alpha == 0.0 {
            trace.converged = true;
            break;
        }
    }
    let residual = sup_norm(&map.residual(&u)?);
    finish(params, profile, &map, u, residual, deltas, opts, trace)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    params: &ProblemParams,
    profile: &PermittivityProfile,
    map: &IntegralMap,
    u: Vec<Complex64>,
    residual: f64,
    deltas: Vec<f64>,
    opts: &SolveOptions,
    mut trace: IterationTrace,
) -> Result<(FieldSolution, IterationTrace)> {
    let (a_scat, b_scat) = scattered_amplitudes(&u, map.scheme(), params, profile, params.alpha())?;
    trace.field_ratio = sup_norm(&u) / params.a_inc().norm();
    if opts.record_trace {
        trace.residuals = deltas.iter().skip(1).copied().chain([residual]).collect();
        trace.deltas = deltas;
    }
    let solution = FieldSolution {
        grid: map.scheme().grid().clone(),
        u,
        a_scat,
        b_scat,
        residual,
    };
    Ok((solution, trace))
}

fn source_density(
    u: &[Complex64],
    scheme: &QuadratureScheme,
    profile: &PermittivityProfile,
    alpha: f64,
) -> Result<Vec<Complex64>> {
    check_len(scheme.n(), u.len())?;
    let eps = profile.sample(scheme.grid())?;
    Ok(u.iter()
        .zip(&eps)
        .map(|(v, e)| (e - 1.0 + alpha * v.norm_sqr()) * v)
        .collect())
}

/// Reflected and transmitted amplitudes from the solved interior field:
/// `a_scat = s0 ∫ e^{iΓ(d - z0)} w`, `b_scat = a_inc e^{2iΓd} + s0 ∫ e^{iΓ(z0 + d)} w`,
/// with source density `w = (eps_L - 1 + α|U|²) U`.
pub fn scattered_amplitudes(
    u: &[Complex64],
    scheme: &QuadratureScheme,
    params: &ProblemParams,
    profile: &PermittivityProfile,
    alpha: f64,
) -> Result<(Complex64, Complex64)> {
    let w = source_density(u, scheme, profile, alpha)?;
    let gamma = params.gamma();
    let d = params.d();
    let weights = scheme.full_weights();
    let nodes = scheme.grid().nodes();
    let mut up = Complex64::new(0.0, 0.0);
    let mut down = Complex64::new(0.0, 0.0);
    for ((&z0, &wq), v) in nodes.iter().zip(&weights).zip(&w) {
        up += wq * Complex64::new(0.0, gamma * (d - z0)).exp() * v;
        down += wq * Complex64::new(0.0, gamma * (z0 + d)).exp() * v;
    }
    let s0 = params.s0();
    let a_scat = s0 * up;
    let b_scat = params.a_inc() * Complex64::new(0.0, 2.0 * gamma * d).exp() + s0 * down;
    Ok((a_scat, b_scat))
}

/// `U(z)` for `|z| > d` from the integral representation with the solved samples.
pub fn extend_field(
    u: &[Complex64],
    scheme: &QuadratureScheme,
    params: &ProblemParams,
    profile: &PermittivityProfile,
    alpha: f64,
    z: f64,
) -> Result<Complex64> {
    if !(z.abs() > params.d()) {
        return Err(Error::domain(format!("extend_field needs |z| > d, got z = {z}")));
    }
    let w = source_density(u, scheme, profile, alpha)?;
    let gamma = params.gamma();
    let integral: Complex64 = scheme
        .grid()
        .nodes()
        .iter()
        .zip(scheme.full_weights())
        .zip(&w)
        .map(|((&z0, wq), v)| wq * Complex64::new(0.0, gamma * (z - z0).abs()).exp() * v)
        .sum();
    Ok(incident_field(z, params) + params.s0() * integral)
}

/// Plane-wave representation outside the layer: `a_inc e^{-iΓ(z-d)} + a_scat e^{iΓ(z-d)}`
/// above and `b_scat e^{-iΓ(z+d)}` below.
pub fn exterior_plane_wave(params: &ProblemParams, a_scat: Complex64, b_scat: Complex64, z: f64) -> Result<Complex64> {
    let gamma = params.gamma();
    let d = params.d();
    if z > d {
        Ok(incident_field(z, params) + a_scat * Complex64::new(0.0, gamma * (z - d)).exp())
    } else if z < -d {
        Ok(b_scat * Complex64::new(0.0, -gamma * (z + d)).exp())
    } else {
        Err(Error::domain(format!("z = {z} lies inside the layer")))
    }
}

/// `sup |U - T(U)|` with the physical kernel and the trapezoid rule.
pub fn residual_norm(
    u: &[Complex64],
    profile: &PermittivityProfile,
    grid: &Grid,
    params: &ProblemParams,
    alpha: f64,
) -> Result<f64> {
    let map = IntegralMap::new(params, profile, QuadratureScheme::trapezoid(grid.clone()), alpha, KernelConvention::PHYSICAL)?;
    Ok(sup_norm(&map.residual(u)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxBalance {
    pub reflectance: f64,
    pub transmittance: f64,
    /// `1 - R - T`: absorbed fraction, zero for lossless layers.
    pub deficit: f64,
}

/// `R = |a_scat/a_inc|²`, `T = |b_scat/a_inc|²`. NaN when `a_inc = 0`.
pub fn flux_balance(solution: &FieldSolution, params: &ProblemParams) -> FluxBalance {
    let a = params.a_inc();
    let reflectance = (solution.a_scat / a).norm_sqr();
    let transmittance = (solution.b_scat / a).norm_sqr();
    FluxBalance {
        reflectance,
        transmittance,
        deficit: 1.0 - reflectance - transmittance,
    }
}
