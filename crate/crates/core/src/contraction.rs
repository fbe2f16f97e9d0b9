//! Sufficient conditions for unique solvability and convergence of the
//! fixed-point iteration.
//!
//! On the ball `‖U‖ <= p` the map satisfies `‖T(U)‖ <= K(p)` with
//! `K(p) = a + (E-1) q0 p + α q0 p³` (real case) and is Lipschitz with
//! constant `t(p) = q0 (E - 1 + 3αp²)`. The ball is invariant iff
//! `P_K(p) = D0 p³ - D1 p + a <= 0`, `D0 = α q0`, `D1 = 1 - (E-1) q0`.
//! The lossy case replaces `E - 1` by `E1 = max |eps_L - 1|`.
//!
//! `t(p_ext) = 1` exactly at the local minimum `p_ext = sqrt(D1/(3 D0))`, and `t`
//! increases in `p`, so the contraction factor is reported at the smallest
//! invariant radius `p1` unless a radius is supplied.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Grid, PermittivityProfile, ProblemParams};

const REFINE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContractionCase {
    /// Real permittivity, bound `E = max eps_L`.
    Real,
    /// Complex permittivity, bound `E1 = max |eps_L - 1|`.
    Complex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub case: ContractionCase,
    /// `E` (real case) or `E1` (complex case).
    pub e_bound: f64,
    pub q0: f64,
    pub a: f64,
    pub alpha: f64,
    pub d0: f64,
    pub d1: f64,
    /// Absent when `α = 0` or `D1 <= 0`.
    pub p_ext: Option<f64>,
    pub p1: Option<f64>,
    pub p2: Option<f64>,
    pub alpha0: Option<f64>,
    pub alpha1: Option<f64>,
    /// Contraction factor at `chosen_p`; at `p = 0` (a lower bound over all
    /// radii) when the linear part alone is not contracting.
    pub t_factor: Option<f64>,
    pub chosen_p: Option<f64>,
    pub satisfied: bool,
    /// Positive values mean the named condition holds with that slack.
    pub margins: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

/// Largest `eps_L` (real case) or `|eps_L - 1|` (complex case) over a 4x refined grid.
pub fn sup_bound(profile: &PermittivityProfile, grid: &Grid, complex_case: bool) -> Result<f64> {
    if !complex_case && !profile.is_real() {
        return Err(Error::domain("the real-case bound needs a real permittivity profile"));
    }
    let fine = grid.refined(REFINE);
    let mut best = f64::NEG_INFINITY;
    for &z in fine.nodes() {
        let e = profile.eval(z)?;
        let v = if complex_case { (e - 1.0).norm() } else { e.re };
        best = best.max(v);
    }
    Ok(best)
}

pub fn polynomial_pk(p: f64, d0: f64, d1: f64, a: f64) -> f64 {
    d0 * p * p * p - d1 * p + a
}

/// The two positive zeros `p1 < p2` of `P_K`, if `P_K` dips strictly below zero.
///
/// A double root (`P_K(p_ext) = 0`) yields `None`: there is no open interval.
pub fn positive_roots_pk(d0: f64, d1: f64, a: f64) -> Result<Option<(f64, f64)>> {
    if !(d0 > 0.0 && d0.is_finite()) {
        return Err(Error::domain(format!("D0 must be positive, got {d0}")));
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::domain(format!("a must be positive, got {a}")));
    }
    if !(d1 > 0.0) {
        return Ok(None);
    }
    let pk = |p: f64| polynomial_pk(p, d0, d1, a);
    let p_ext = (d1 / (3.0 * d0)).sqrt();
    if !(pk(p_ext) < 0.0) {
        return Ok(None);
    }
    let upper = (d1 / d0).sqrt() + a / d1;
    let p1 = bisect(pk, 0.0, p_ext, d0, d1);
    let p2 = bisect(pk, p_ext, upper, d0, d1);
    Ok(Some((p1, p2)))
}

// Bisection on a verified sign change, then Newton polishing kept inside the bracket.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, d0: f64, d1: f64) -> f64 {
    let (flo, fhi) = (f(lo), f(hi));
    debug_assert!(flo * fhi < 0.0, "root not bracketed");
    let lo_positive = flo > 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut p = if f(lo).abs() <= f(hi).abs() { lo } else { hi };
    for _ in 0..3 {
        let slope = 3.0 * d0 * p * p - d1;
        if slope == 0.0 {
            break;
        }
        let next = p - f(p) / slope;
        if next.is_finite() && next >= lo.min(hi) - (hi - lo).abs() && f(next).abs() < f(p).abs() {
            p = next;
        } else {
            break;
        }
    }
    p
}

/// Contraction factor `q0 (excess + 3αp²)`.
pub fn contraction_factor(q0: f64, excess: f64, alpha: f64, p: f64) -> f64 {
    q0 * (excess + 3.0 * alpha * p * p)
}

/// Real case: `E = max eps_L` with `E > 1`, `(E-1) q0 < 1`,
/// `α < α0 = (4/27) D1³ / (a² q0)`, `α < α1 = 1 / (3 q0 D1)` and `t0 < 1`.
pub fn check_real_case(
    params: &ProblemParams,
    profile: &PermittivityProfile,
    grid: &Grid,
    chosen_p: Option<f64>,
) -> Result<ContractionReport> {
    let e = sup_bound(profile, grid, false)?;
    let mut report = build_report(ContractionCase::Real, e, e - 1.0, params, chosen_p)?;
    report.margins.insert("e_minus_one".into(), e - 1.0);
    if !(e > 1.0) {
        report.satisfied = false;
        report.notes.push("max eps_L does not exceed 1".into());
    }
    Ok(report)
}

/// Complex case: `E1 = max |eps_L - 1|` with `0 < E1 q0 < 1`, the same
/// thresholds with `D1 = 1 - E1 q0`, and `t1 = q0 (E1 + 3αp²) < 1`.
pub fn check_complex_case(
    params: &ProblemParams,
    profile: &PermittivityProfile,
    grid: &Grid,
    chosen_p: Option<f64>,
) -> Result<ContractionReport> {
    let e1 = sup_bound(profile, grid, true)?;
    let mut report = build_report(ContractionCase::Complex, e1, e1, params, chosen_p)?;
    report.margins.insert("e1_q0".into(), e1 * params.q0());
    if !(e1 > 0.0) {
        report.satisfied = false;
        report.notes.push("E1 q0 = 0 is outside the open range (0, 1); the vacuum layer is solved by the incident field".into());
    }
    Ok(report)
}

fn build_report(
    case: ContractionCase,
    e_bound: f64,
    excess: f64,
    params: &ProblemParams,
    chosen_p: Option<f64>,
) -> Result<ContractionReport> {
    let q0 = params.q0();
    let alpha = params.alpha();
    let a = params.a_inc().norm();
    let d0 = alpha * q0;
    let d1 = 1.0 - excess * q0;
    let mut r = ContractionReport {
        case,
        e_bound,
        q0,
        a,
        alpha,
        d0,
        d1,
        p_ext: None,
        p1: None,
        p2: None,
        alpha0: None,
        alpha1: None,
        t_factor: None,
        chosen_p: None,
        satisfied: false,
        margins: BTreeMap::new(),
        notes: Vec::new(),
    };
    r.margins.insert("d1".into(), d1);
    if !(d1 > 0.0) {
        // t(p) >= t(0) = excess * q0 >= 1 for every radius.
        r.t_factor = Some(excess * q0);
        r.notes.push(format!("linear part is not contracting: 1 - excess * q0 = {d1}"));
        return Ok(r);
    }
    let alpha1 = 1.0 / (3.0 * q0 * d1);
    r.alpha1 = Some(alpha1);
    r.margins.insert("alpha1".into(), alpha1 - alpha);
    if a > 0.0 {
        let alpha0 = 4.0 / 27.0 * d1.powi(3) / (a * a * q0);
        r.alpha0 = Some(alpha0);
        r.margins.insert("alpha0".into(), alpha0 - alpha);
    }

    if alpha == 0.0 {
        // Linear layer: the map is affine with Lipschitz constant excess * q0.
        let t = excess * q0;
        r.t_factor = Some(t);
        r.margins.insert("t_factor".into(), 1.0 - t);
        r.satisfied = t < 1.0;
        r.notes.push("alpha = 0: linear case, radius bounds are vacuous".into());
        return Ok(r);
    }

    let p_ext = (d1 / (3.0 * d0)).sqrt();
    r.p_ext = Some(p_ext);
    let (p1, p2) = if a > 0.0 {
        r.margins.insert("pk_at_p_ext".into(), -polynomial_pk(p_ext, d0, d1, a));
        match positive_roots_pk(d0, d1, a)? {
            Some(roots) => roots,
            None => {
                r.notes.push("P_K has no two distinct positive zeros: no invariant ball".into());
                return Ok(r);
            }
        }
    } else {
        (0.0, (d1 / d0).sqrt())
    };
    r.p1 = Some(p1);
    r.p2 = Some(p2);
    let p = match chosen_p {
        Some(p) if !(p >= p1 && p < p2) => {
            r.notes.push(format!("chosen radius {p} lies outside [p1, p2) = [{p1}, {p2})"));
            r.chosen_p = Some(p);
            return Ok(r);
        }
        Some(p) => p,
        None => p1,
    };
    let t = contraction_factor(q0, excess, alpha, p);
    r.chosen_p = Some(p);
    r.t_factor = Some(t);
    r.margins.insert("t_factor".into(), 1.0 - t);
    let below_thresholds = r.alpha0.is_none_or(|a0| alpha < a0) && alpha < alpha1;
    r.satisfied = p1 < p2 && t < 1.0 && below_thresholds;
    Ok(r)
}

/// Weak-nonlinearity condition for the coupled scheme:
/// `L = κ d max(|1 - eps_L| + α|a|²) < cos φ`, with the premise `α|a|² < max |eps_L|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakCondition {
    pub satisfied: bool,
    /// `cos φ - L`.
    pub margin: f64,
    pub lhs: f64,
    /// `L / cos φ`, the Lipschitz bound of the frozen-coefficient map.
    pub rate: f64,
    pub premise_holds: bool,
}

pub fn check_weak_condition(params: &ProblemParams, profile: &PermittivityProfile, grid: &Grid) -> Result<WeakCondition> {
    let fine = grid.refined(REFINE);
    let kerr = params.alpha() * params.a_inc().norm_sqr();
    let mut worst = f64::NEG_INFINITY;
    let mut max_eps = f64::NEG_INFINITY;
    for &z in fine.nodes() {
        let e = profile.eval(z)?;
        worst = worst.max((1.0 - e).norm() + kerr);
        max_eps = max_eps.max(e.norm());
    }
    let lhs = params.kappa() * params.d() * worst;
    let cos_phi = params.cos_phi();
    let premise_holds = kerr < max_eps;
    Ok(WeakCondition {
        satisfied: lhs < cos_phi && premise_holds,
        margin: cos_phi - lhs,
        lhs,
        rate: lhs / cos_phi,
        premise_holds,
    })
}

/// Every applicable condition for one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolvabilityReport {
    /// Present only for real profiles.
    pub real: Option<ContractionReport>,
    pub complex: ContractionReport,
    pub weak: WeakCondition,
    pub any_satisfied: bool,
}

pub fn check_all(params: &ProblemParams, profile: &PermittivityProfile, grid: &Grid) -> Result<SolvabilityReport> {
    let real = if profile.is_real() {
        Some(check_real_case(params, profile, grid, None)?)
    } else {
        None
    };
    let complex = check_complex_case(params, profile, grid, None)?;
    let weak = check_weak_condition(params, profile, grid)?;
    let any_satisfied = real.as_ref().is_some_and(|r| r.satisfied) || complex.satisfied || weak.satisfied;
    Ok(SolvabilityReport { real, complex, weak, any_satisfied })
}

/// Contraction rate guaranteed for the Picard map, when a condition holds.
pub fn predicted_rate(params: &ProblemParams, profile: &PermittivityProfile, grid: &Grid) -> Result<Option<f64>> {
    let report = if profile.is_real() {
        check_real_case(params, profile, grid, None)?
    } else {
        check_complex_case(params, profile, grid, None)?
    };
    Ok(report.satisfied.then_some(report.t_factor).flatten())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::make_params;
    use crate::trig::TrigPolynomial;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const DELTA_HALF: f64 = 0.25 / PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn setup(eps: Complex64, alpha: f64) -> (ProblemParams, PermittivityProfile, Grid) {
        let p = make_params(1.0, 0.0, DELTA_HALF, alpha, c(1.0, 0.0)).unwrap();
        let prof = PermittivityProfile::constant(eps, p.d()).unwrap();
        let g = Grid::new(65, p.d()).unwrap();
        (p, prof, g)
    }

    #[test]
    fn sup_bounds() {
        let (_, prof, g) = setup(c(1.5, 0.0), 0.0);
        assert_eq!(sup_bound(&prof, &g, false).unwrap(), 1.5);
        let (_, prof, g) = setup(c(1.5, 0.05), 0.0);
        assert!((sup_bound(&prof, &g, true).unwrap() - 0.2525f64.sqrt()).abs() < 1e-15);
        assert!(sup_bound(&prof, &g, false).is_err());
        let cosine = TrigPolynomial::from_terms([(c(1.3, 0.0), 0.0), (c(0.1, 0.0), 1.0), (c(0.1, 0.0), -1.0)]);
        let prof = PermittivityProfile::trig(cosine, 0.5).unwrap();
        assert!((sup_bound(&prof, &Grid::new(5, 0.5).unwrap(), false).unwrap() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn pk_values() {
        assert_eq!(polynomial_pk(0.0, 0.3, 0.7, 2.5), 2.5);
        assert_eq!(polynomial_pk(1.0, 1.0, 3.0, 2.0), 0.0);
        assert!((polynomial_pk(2.0, 0.1, 1.0, 0.1) + 1.1).abs() < 1e-15);
    }

    #[test]
    fn pk_roots() {
        let (p1, p2) = positive_roots_pk(1.0, 10.0, 1.0).unwrap().unwrap();
        assert!(p1 < p2);
        assert!(polynomial_pk(p1, 1.0, 10.0, 1.0).abs() <= 1e-12);
        assert!(polynomial_pk(p2, 1.0, 10.0, 1.0).abs() <= 1e-12);
        // Trigonometric form of the roots of t³ + pt + q = 0 with p = -10, q = 1.
        let (pp, qq) = (-10.0f64, 1.0f64);
        let r = 2.0 * (-pp / 3.0).sqrt();
        let theta = ((3.0 * qq / (2.0 * pp)) * (-3.0 / pp).sqrt()).acos() / 3.0;
        let exact = |k: f64| r * (theta - 2.0 * PI * k / 3.0).cos();
        assert!((p2 - exact(0.0)).abs() < 1e-12, "{p2} vs {}", exact(0.0));
        assert!((p1 - exact(1.0)).abs() < 1e-12, "{p1} vs {}", exact(1.0));
        assert!((p1 - 0.1001).abs() < 1e-4);
        assert_eq!(positive_roots_pk(1.0, 1.0, 5.0).unwrap(), None);
        assert_eq!(positive_roots_pk(1.0, 3.0, 2.0).unwrap(), None);
        assert!(positive_roots_pk(0.0, 1.0, 1.0).is_err());
        assert!(positive_roots_pk(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn real_case_thresholds() {
        let (p, prof, g) = setup(c(1.5, 0.0), 0.01);
        let r = check_real_case(&p, &prof, &g, None).unwrap();
        assert!((r.alpha0.unwrap() - 0.125).abs() < 1e-12);
        assert!((r.alpha1.unwrap() - 8.0 / 9.0).abs() < 1e-12);
        assert!((r.d1 - 0.75).abs() < 1e-15);
        let p1 = r.p1.unwrap();
        assert!((r.t_factor.unwrap() - 0.5 * (0.5 + 0.03 * p1 * p1)).abs() < 1e-15);
        assert!(r.satisfied);
    }

    #[test]
    fn contraction_factor_is_one_at_the_local_minimum() {
        let (p, prof, g) = setup(c(1.5, 0.0), 0.05);
        let r = check_real_case(&p, &prof, &g, None).unwrap();
        let t_ext = contraction_factor(r.q0, r.e_bound - 1.0, r.alpha, r.p_ext.unwrap());
        assert!((t_ext - 1.0).abs() < 1e-14);
        let forced = check_real_case(&p, &prof, &g, r.p_ext).unwrap();
        assert!(!forced.satisfied);
    }

    #[test]
    fn linear_and_threshold_cases() {
        let (p, prof, g) = setup(c(1.5, 0.0), 0.0);
        let r = check_real_case(&p, &prof, &g, None).unwrap();
        assert!(r.satisfied);
        assert_eq!(r.p_ext, None);
        assert!((r.t_factor.unwrap() - 0.25).abs() < 1e-15);

        let (p, prof, g) = setup(c(3.1, 0.0), 0.01);
        let r = check_real_case(&p, &prof, &g, None).unwrap();
        assert!(!r.satisfied);
        assert!(r.d1 < 0.0);
    }

    #[test]
    fn complex_case() {
        let (p, prof, g) = setup(c(1.5, 0.05), 0.01);
        assert!(check_real_case(&p, &prof, &g, None).is_err());
        let r = check_complex_case(&p, &prof, &g, None).unwrap();
        let e1 = 0.2525f64.sqrt();
        assert!((r.d1 - (1.0 - 0.5 * e1)).abs() < 1e-15);
        assert!((r.alpha0.unwrap() - 4.0 / 27.0 * r.d1.powi(3) / 0.5).abs() < 1e-15);
        assert!(r.satisfied);

        let (p, prof, g) = setup(c(1.0, 0.0), 0.01);
        assert!(!check_complex_case(&p, &prof, &g, None).unwrap().satisfied);

        let (p, prof, g) = setup(c(1.5, 0.0), 0.01);
        let real = check_real_case(&p, &prof, &g, None).unwrap();
        let cplx = check_complex_case(&p, &prof, &g, None).unwrap();
        assert_eq!(cplx.e_bound, 0.5);
        assert_eq!(cplx.d1, real.d1);
        assert_eq!(cplx.t_factor, real.t_factor);
    }

    #[test]
    fn weak_condition() {
        let (p, prof, g) = setup(c(1.5, 0.0), 0.01);
        let w = check_weak_condition(&p, &prof, &g).unwrap();
        assert!(w.satisfied);
        assert!((w.lhs - 0.255).abs() < 1e-15);
        assert!((w.margin - 0.745).abs() < 1e-15);

        let (p, prof, g) = setup(c(1.0, 0.0), 0.0);
        let w = check_weak_condition(&p, &prof, &g).unwrap();
        assert!(w.satisfied && w.lhs == 0.0);

        let (p, prof, g) = setup(c(3.2, 0.0), 0.0);
        let w = check_weak_condition(&p, &prof, &g).unwrap();
        assert!(!w.satisfied);
        assert!((w.lhs - 1.1).abs() < 1e-15);
    }

    #[test]
    fn weak_rate_is_contraction_factor_at_a_over_root_three() {
        let (p, prof, g) = setup(c(1.5, 0.0), 0.03);
        let w = check_weak_condition(&p, &prof, &g).unwrap();
        let a = p.a_inc().norm();
        let t = contraction_factor(p.q0(), 0.5, p.alpha(), a / 3f64.sqrt());
        assert!((w.rate - t).abs() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn pk_sign_pattern(d0 in 0.01..5.0f64, d1 in 0.01..5.0f64, a in 0.01..3.0f64) {
            if let Some((p1, p2)) = positive_roots_pk(d0, d1, a).unwrap() {
                prop_assert!(0.0 < p1 && p1 < p2);
                let tol = 1e-10 * a.max(1.0);
                prop_assert!(polynomial_pk(p1, d0, d1, a).abs() <= tol);
                prop_assert!(polynomial_pk(p2, d0, d1, a).abs() <= tol);
                for k in 1..100 {
                    let inside = p1 + (p2 - p1) * k as f64 / 100.0;
                    prop_assert!(polynomial_pk(inside, d0, d1, a) < 0.0);
                    let below = p1 * k as f64 / 100.0;
                    prop_assert!(polynomial_pk(below, d0, d1, a) > 0.0);
                }
            }
        }

        #[test]
        fn larger_alpha_never_helps(e in 1.01..3.5f64, alpha in 0.0..0.5f64, bump in 0.0..0.5f64) {
            let (p, prof, g) = setup(c(e, 0.0), alpha);
            let lo = check_real_case(&p, &prof, &g, None).unwrap();
            let hi = check_real_case(&p.with_alpha(alpha + bump).unwrap(), &prof, &g, None).unwrap();
            prop_assert!(!(hi.satisfied && !lo.satisfied));
        }

        #[test]
        fn satisfied_reports_are_consistent(e in 1.01..3.5f64, alpha in 0.001..0.5f64) {
            let (p, prof, g) = setup(c(e, 0.0), alpha);
            let r = check_real_case(&p, &prof, &g, None).unwrap();
            if r.satisfied {
                prop_assert!(r.d1 > 0.0);
                prop_assert!(r.p1.unwrap() < r.p2.unwrap() && r.p1.unwrap() > 0.0);
                prop_assert!(r.t_factor.unwrap() < 1.0);
                prop_assert!(alpha < r.alpha0.unwrap().min(r.alpha1.unwrap()));
            }
        }
    }
}
