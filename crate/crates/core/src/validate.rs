//! Grid-refinement validation against independent references.
//!
//! Two suites run at `n` and `2n - 1` nodes:
//! * closed-form images vs quadrature operators, under a chosen kernel convention;
//! * the integral-equation solution vs the finite-difference boundary value problem.
//!
//! Each comparison yields a difference check (against `10 h²` at the finer grid)
//! and an empirical-order check (`>= 1.8`).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bvp::{bvp_residual, solve_bvp, BvpOptions};
use crate::error::Result;
use crate::model::{Grid, PermittivityProfile, ProblemParams};
use crate::operators::{apply_F, apply_T, apply_weighted, sup_diff, KernelConvention};
use crate::oracle::{first_iteration_closed_form, incident_polynomial, lemma1_closed_form, lemma3_closed_form, TrigPolynomial};
use crate::quadrature::QuadratureScheme;
use crate::solver::{solve_picard, SolveOptions};

pub const VALIDATION_SCHEMA: &str = "kerrslab.validate/v1";
pub const MIN_ORDER: f64 = 1.8;
/// Below this node count the observed orders are not asymptotic.
pub const MIN_RELIABLE_N: usize = 33;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationCheck {
    pub name: String,
    pub passed: bool,
    /// Order checks on coarse grids are reported but not enforced.
    pub skipped: bool,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub schema: String,
    pub grid_sizes: [usize; 2],
    pub oracle_convention: u8,
    pub orders_reliable: bool,
    pub warnings: Vec<String>,
    pub checks: Vec<ValidationCheck>,
    pub passed: bool,
}

impl ValidationReport {
    pub fn failures(&self) -> Vec<&ValidationCheck> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

struct Builder {
    n: [usize; 2],
    h_fine: f64,
    reliable: bool,
    checks: Vec<ValidationCheck>,
}

impl Builder {
    fn fail(&mut self, name: &str, detail: String) {
        self.checks.push(ValidationCheck {
            name: name.into(),
            passed: false,
            skipped: false,
            value: f64::NAN,
            threshold: f64::NAN,
            detail,
        });
    }

    /// Records the order check, and the difference check when `bounded`.
    fn pair(&mut self, name: &str, errors: [f64; 2], bounded: bool) {
        let threshold = 10.0 * self.h_fine * self.h_fine;
        if bounded {
            self.checks.push(ValidationCheck {
                name: format!("{name}.difference"),
                passed: errors[1] <= threshold,
                skipped: false,
                value: errors[1],
                threshold,
                detail: format!("sup difference {:.3e} at n={} (n={}: {:.3e})", errors[1], self.n[1], self.n[0], errors[0]),
            });
        }
        let order = (errors[0] / errors[1]).log2();
        let ok = order >= MIN_ORDER;
        self.checks.push(ValidationCheck {
            name: format!("{name}.order"),
            passed: ok || !self.reliable,
            skipped: !self.reliable,
            value: order,
            threshold: MIN_ORDER,
            detail: format!("empirical order {order:.3} between n={} and n={}", self.n[0], self.n[1]),
        });
    }
}

fn oracle_errors(
    params: &ProblemParams,
    grid: &Grid,
    convention: KernelConvention,
    alpha: f64,
) -> Result<[f64; 4]> {
    let scheme = QuadratureScheme::trapezoid(grid.clone());
    let nodes = grid.nodes();
    let u0 = incident_polynomial(params).eval_many(nodes);
    let b = params.b();

    let constant = Complex64::new(-0.5, 0.0);
    let weight = vec![constant; nodes.len()];
    let quad = apply_weighted(&u0, &weight, &scheme, params, convention)?;
    let e1 = sup_diff(&quad, &lemma1_closed_form(params, constant, 0.0)?.eval_many(nodes));

    let (t, q) = (Complex64::new(0.3, 0.1), 0.4 * b);
    let weight = TrigPolynomial::single(t, q).eval_many(nodes);
    let quad = apply_weighted(&u0, &weight, &scheme, params, convention)?;
    let e2 = sup_diff(&quad, &lemma1_closed_form(params, t, q)?.eval_many(nodes));

    let quad = apply_F(&u0, &scheme, params, convention)?;
    let e3 = sup_diff(&quad, &lemma3_closed_form(params).eval_many(nodes));

    let eps = PermittivityProfile::real_constant(1.5, params.d())?;
    let quad = apply_T(&u0, &eps, &scheme, params, alpha, convention)?;
    let exact = first_iteration_closed_form(params, &TrigPolynomial::constant(constant), alpha)?;
    let e4 = sup_diff(&quad, &exact.eval_many(nodes));
    Ok([e1, e2, e3, e4])
}

/// Runs both suites at `grid_n` and `2 grid_n - 1` nodes.
pub fn run_validation(
    params: &ProblemParams,
    profile: &PermittivityProfile,
    grid_n: usize,
    oracle_convention: KernelConvention,
    opts: &SolveOptions,
) -> Result<ValidationReport> {
    let n = [grid_n, 2 * grid_n - 1];
    let grids = [Grid::new(n[0], params.d())?, Grid::new(n[1], params.d())?];
    let reliable = grid_n >= MIN_RELIABLE_N;
    let mut warnings = Vec::new();
    if !reliable {
        warnings.push(format!(
            "grid_n = {grid_n} is below {MIN_RELIABLE_N}: empirical orders are not asymptotic and are not enforced"
        ));
    }
    let mut b = Builder { n, h_fine: grids[1].h(), reliable, checks: Vec::new() };

    let names = [
        "oracle.constant_weight",
        "oracle.oscillating_weight",
        "oracle.cubic_image",
        "oracle.first_iterate",
    ];
    match (
        oracle_errors(params, &grids[0], oracle_convention, params.alpha()),
        oracle_errors(params, &grids[1], oracle_convention, params.alpha()),
    ) {
        (Ok(coarse), Ok(fine)) => {
            for (k, name) in names.iter().enumerate() {
                b.pair(name, [coarse[k], fine[k]], true);
            }
        }
        (Err(e), _) | (_, Err(e)) => b.fail("oracle", format!("closed form unavailable: {e}")),
    }

    let ie_opts = SolveOptions { convention: KernelConvention::PHYSICAL, ..*opts };
    let mut diffs = [0.0; 2];
    let mut residuals = [0.0; 2];
    let mut ok = true;
    for (k, grid) in grids.iter().enumerate() {
        let ie = match solve_picard(params, profile, grid, &ie_opts) {
            Ok((sol, trace)) if trace.converged => sol,
            Ok(_) => {
                b.fail("ie_bvp.integral_equation", format!("Picard iteration did not converge at n={}", grid.n()));
                ok = false;
                break;
            }
            Err(e) => {
                b.fail("ie_bvp.integral_equation", format!("integral equation solve failed at n={}: {e}", grid.n()));
                ok = false;
                break;
            }
        };
        let bvp = match solve_bvp(params, profile, grid, &BvpOptions { initial: Some(ie.u.clone()), ..Default::default() }) {
            Ok(sol) => sol,
            Err(e) => {
                b.fail("ie_bvp.boundary_value_problem", format!("BVP solve failed at n={}: {e}", grid.n()));
                ok = false;
                break;
            }
        };
        diffs[k] = sup_diff(&ie.u, &bvp.u);
        residuals[k] = bvp_residual(&ie.u, grid, params, profile, params.alpha())?.sup();
    }
    if ok {
        b.pair("ie_bvp.field", diffs, true);
        b.pair("ie_bvp.residual", residuals, false);
    }

    let passed = b.checks.iter().all(|c| c.passed);
    Ok(ValidationReport {
        schema: VALIDATION_SCHEMA.into(),
        grid_sizes: n,
        oracle_convention: oracle_convention.exponent_factor(),
        orders_reliable: reliable,
        warnings,
        checks: b.checks,
        passed,
    })
}
